//! Triangulations, flips, Ptolemy relations and their compatibility with
//! quiver mutation and with the universal cover.
use tildea::annulus::{verify_cover_flip, ArcSeed};
use tildea::{MarkedAnnulus, Triangulation};

fn main() {
    let c = MarkedAnnulus::new(2, 1).unwrap();
    let t = Triangulation::initial(c);
    println!("initial: {}", t.arcs().iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" "));
    for tri in t.triangles().unwrap() {
        println!("  triangle {:?}", tri.sides);
    }

    let flip = t.flip(1).unwrap();
    println!("flip {} -> {} with quadrilateral {:?}", flip.old_arc, flip.new_arc, flip.sides);
    assert_eq!(flip.triangulation.quiver().unwrap(), t.quiver().unwrap().mutate(1).unwrap());
    println!("cover flip agrees: {}", verify_cover_flip(&t, 1, 3).unwrap());

    // Ptolemy relation on the initial variables equals the seed exchange
    let state = ArcSeed::initial(c).unwrap();
    let relation = t.ptolemy_relation(1, state.seed.cluster()).unwrap();
    assert_eq!(relation.exchanged().unwrap(), state.flip(1).unwrap().seed.cluster()[1]);
    println!("x x' = {} + {}", relation.first, relation.second);

    let near = t.within_flips(3, 1_000).unwrap();
    println!("{} triangulations within 3 flips", near.len());
    println!("{}", serde_json::to_string(&flip.triangulation).unwrap());
}
