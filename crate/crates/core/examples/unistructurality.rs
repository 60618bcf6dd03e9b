//! Whole-algebra experiments: quiver recovery from an acyclic cluster,
//! compatible sets versus clusters, re-rooting, and the compatibility oracle.
use tildea::prooflab;

fn main() {
    for (p, q) in [(1, 1), (2, 1), (3, 2)] {
        let r = prooflab::verify_quiver_recovery(p, q, 3).unwrap();
        println!("recovery Ã({p},{q}): {}", r.passed);
    }
    for (p, q, depth) in [(1, 1, 5), (2, 1, 4)] {
        let r = prooflab::unistructurality_experiment(p, q, depth).unwrap();
        print!("{r}");
        println!("  {:?}", r.context);
    }
    let r = prooflab::compatibility_oracle(2, 1, 4).unwrap();
    print!("{r}");
    print!("{}", prooflab::verify_cover_flips(3, 2, 10, 42).unwrap());
}
