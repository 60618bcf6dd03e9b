//! Quiver mutation and recognition of type Ã(p, q).
use tildea::{Quiver, TypeLabel};

fn main() {
    let q = Quiver::tilde_a(3, 2).unwrap();
    println!("Ã(3,2): {:?}", q.arrows());
    println!("acyclic: {}", q.is_acyclic());

    let m = q.mutate(0).unwrap().mutate(2).unwrap();
    println!("after mutating at 0 and 2: {:?}", m.arrows());
    println!("type: {:?}", m.classify_tilde_a().unwrap());
    assert_eq!(m.mutate(2).unwrap().mutate(0).unwrap(), q);

    // relabeling the vertices changes nothing up to isomorphism
    let shuffled = m.permuted(&[4, 2, 0, 1, 3]);
    println!("isomorphic after relabeling: {}", shuffled.is_isomorphic(&m));

    // an oriented 3-cycle is not of type Ã
    let cycle = Quiver::from_arrows(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
    assert_eq!(cycle.classify_tilde_a().unwrap(), TypeLabel::Other);

    let names: Vec<String> = (1..=5).map(|i| format!("x{i}")).collect();
    print!("{}", m.to_dot(Some(&names)));
}
