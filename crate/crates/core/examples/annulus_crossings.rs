//! Arcs of the annulus as lifts to the universal cover strip, and their
//! crossing numbers.
use tildea::{ArcKind, ArcLift, MarkedAnnulus};

fn main() {
    let c = MarkedAnnulus::new(3, 2).unwrap();
    let bridging = ArcLift::of(0, 0, 1, 0);
    let winding = ArcLift::of(0, 0, 1, -4);
    let peripheral = ArcLift::of(0, 0, 0, 2);
    for a in [bridging, winding, peripheral] {
        println!("{a}: {:?}, canonical {}", a.kind(), c.canonical(&a));
    }
    println!("bridging x winding: {}", c.crossing_number(&bridging, &winding).unwrap());
    println!("peripheral x winding: {}", c.crossing_number(&peripheral, &winding).unwrap());

    // a deck translate is the same arc
    let moved = c.translate(&winding, 3);
    println!("{moved} = {winding} in the annulus: {}", c.canonical(&moved) == c.canonical(&winding));

    // contractible or self-crossing lifts are rejected
    println!("{:?}", c.check_arc(&ArcLift::of(0, 0, 0, 1)));
    println!("{:?}", c.check_arc(&ArcLift::of(0, 0, 0, 7)));

    let arcs = c.arcs_within(1);
    let peripheral_count = arcs.iter().filter(|a| a.kind() != ArcKind::Bridging).count();
    println!("{} arcs within one period, {} peripheral", arcs.len(), peripheral_count);
    println!("peripheral arcs cross at most {} times", c.max_peripheral_crossing());
}
