//! The Ã(3,2) triangulation whose fourth arc exchanges to a peripheral arc
//! with two boundary sides, giving x4 x4' = x1 + x5.
use tildea::prooflab::tilde_a32_example;

fn main() {
    let ex = tilde_a32_example().unwrap();
    println!("arcs: {}", ex.triangulation.arcs().iter().map(|a| a.to_string()).collect::<Vec<_>>().join(" "));
    println!("quiver: {:?}", ex.seed.quiver().arrows());
    let names: Vec<String> = (1..=5).map(|i| format!("x{i}")).collect();
    let (out, inc) = ex.seed.exchange_monomials(3).unwrap();
    println!("x4 x4' = {} + {}", out.display_with(&names), inc.display_with(&names));
    println!("x4' = {}", ex.seed.mutate(3).unwrap().cluster()[3].display_with(&names));
    println!("new arc: {}", ex.flipped.arcs()[3]);
}
