//! Locating flip sequences on concrete annuli whose Ptolemy relations match
//! the relation templates, then checking them between actual variables.
use tildea::prooflab::{self, Case1Variant};

fn main() {
    for (p, q, depth, variant) in [(2, 1, 3, Case1Variant::Generic), (3, 2, 4, Case1Variant::TwoBoundarySides), (1, 2, 4, Case1Variant::Loop)] {
        let r = prooflab::verify_case1(p, q, depth, variant).unwrap();
        println!("C({p},{q}) {variant:?}: {}", if r.passed { "PASS" } else { "FAIL" });
    }
    let r = prooflab::verify_case2_geometric(4, 1, 6).unwrap();
    print!("{r}");
    println!("{}", serde_json::to_string_pretty(&r.context["bindings"]).unwrap());
}
