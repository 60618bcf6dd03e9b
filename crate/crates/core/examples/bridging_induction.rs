//! The bridging flip sequence on C(2,2): recurrence shapes, crossing counts
//! and the positive residuals of the product identities.
use tildea::prooflab::verify_bridging_induction;

fn main() {
    let k: u8 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let r = verify_bridging_induction(2, 2, k, 4).unwrap();
    print!("{r}");
}
