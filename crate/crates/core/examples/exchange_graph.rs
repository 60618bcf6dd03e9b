//! Seeds, mutation in the coordinate frame, and the depth-bounded exchange
//! graph with denominator vectors.
use tildea::engine::{self, ExchangeGraph, Seed};
use tildea::Quiver;

fn main() {
    let seed = Seed::initial(Quiver::tilde_a(2, 1).unwrap());
    let names: Vec<String> = (1..=3).map(|i| format!("x{i}")).collect();
    let (out, inc) = seed.exchange_monomials(0).unwrap();
    let next = seed.mutate(0).unwrap();
    println!("x1 x1' = {} + {}", out.display_with(&names), inc.display_with(&names));
    println!("x1' = {}", next.cluster()[0].display_with(&names));

    let graph = ExchangeGraph::enumerate(&seed, 4, 10_000).unwrap();
    println!("{} clusters within 4 mutations, {} edges", graph.len(), graph.edges().len());
    for v in graph.variables() {
        println!("  d = {:?}", engine::denominator_vector(&v).unwrap());
    }

    let audit = engine::positivity_audit(&seed, 4, 10_000).unwrap();
    println!("positivity: {} variables, passed {}", audit.variables_checked, audit.passed());
    println!("independent: {}", engine::is_algebraically_independent(graph.nodes()[5].seed.cluster()).unwrap());
    print!("{}", graph.to_dot());
}
