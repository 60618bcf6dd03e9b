//! Formal identity chains over free indeterminates and the two-variable lemma.
use tildea::prooflab::{self, Case2Sums};

fn main() {
    println!("{}", prooflab::verify_lemma31_examples().unwrap());
    println!("{}", prooflab::verify_case2_formal().unwrap());
    println!("{}", prooflab::verify_case2_formal_with(Case2Sums::Consistent, true).unwrap());
    for n in 2..=4 {
        println!("{}", prooflab::verify_case3(n).unwrap());
    }
}
