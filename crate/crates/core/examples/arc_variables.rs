//! The cluster variable of an arc, reached by flips that reduce crossings;
//! its denominator counts crossings with the initial arcs.
use tildea::annulus::{variable_of_arc, ArcLabeledGraph};
use tildea::engine::denominator_vector;
use tildea::{ArcLift, MarkedAnnulus, Triangulation};

fn main() {
    let c = MarkedAnnulus::new(2, 1).unwrap();
    let initial = Triangulation::initial(c);
    for gamma in [ArcLift::of(0, 0, 1, -3), ArcLift::of(0, 0, 0, 2), ArcLift::of(0, 1, 1, 2)] {
        let v = variable_of_arc(&gamma, c).unwrap();
        let crossings: Vec<u64> = initial.arcs().iter().map(|a| c.crossing_number(&gamma, a).unwrap()).collect();
        println!("{gamma}: denominator {:?}, crossings {crossings:?}", denominator_vector(&v).unwrap());
        println!("  {v}");
    }

    let graph = ArcLabeledGraph::enumerate(c, 4, 10_000).unwrap();
    println!("{} triangulations, {} arcs, injective: {}", graph.states.len(), graph.variable_of.len(), graph.is_injective());
}
