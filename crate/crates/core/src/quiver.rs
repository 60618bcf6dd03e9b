//! Quivers without loops or 2-cycles, stored as skew-symmetric integer matrices.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::{self, Write as _};
use std::sync::{Arc, Mutex, OnceLock};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QuiverError {
    #[error("point {index} out of range for a quiver on {n} points")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("invalid exchange matrix: {0}")]
    Invalid(String),
    #[error("mutation class exceeds the node limit of {limit}")]
    LimitExceeded { limit: usize },
    #[error("no affine type A quiver with p = {p}, q = {q} (need p >= q >= 1)")]
    BadParameters { p: usize, q: usize },
}

/// `b[i][j] > 0` is the number of arrows `i -> j`; `b[j][i] == -b[i][j]`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Quiver {
    b: Vec<Vec<i32>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "type")]
pub enum TypeLabel {
    TildeA { p: usize, q: usize },
    Other,
}

impl Quiver {
    pub fn empty(n: usize) -> Self {
        Self { b: vec![vec![0; n]; n] }
    }

    pub fn from_matrix(b: Vec<Vec<i32>>) -> Result<Self, QuiverError> {
        let n = b.len();
        for (i, row) in b.iter().enumerate() {
            if row.len() != n {
                return Err(QuiverError::Invalid(format!("row {i} has length {}", row.len())));
            }
            if row[i] != 0 {
                return Err(QuiverError::Invalid(format!("loop at {i}")));
            }
            for j in 0..n {
                if b[j][i] != -row[j] {
                    return Err(QuiverError::Invalid(format!("entries ({i},{j}) not skew-symmetric")));
                }
            }
        }
        Ok(Self { b })
    }

    /// Arrow list with repetition; opposite arrows between the same pair cancel.
    pub fn from_arrows(n: usize, arrows: &[(usize, usize)]) -> Result<Self, QuiverError> {
        let mut q = Self::empty(n);
        for &(s, t) in arrows {
            for idx in [s, t] {
                if idx >= n {
                    return Err(QuiverError::IndexOutOfRange { index: idx, n });
                }
            }
            if s == t {
                return Err(QuiverError::Invalid(format!("loop at {s}")));
            }
            q.add_arrows(s, t, 1);
        }
        Ok(q)
    }

    pub(crate) fn add_arrows(&mut self, s: usize, t: usize, k: i32) {
        self.b[s][t] += k;
        self.b[t][s] -= k;
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    /// Signed arrow count `i -> j`.
    pub fn entry(&self, i: usize, j: usize) -> i32 {
        self.b[i][j]
    }

    pub fn matrix(&self) -> &[Vec<i32>] {
        &self.b
    }

    pub fn arrows(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, row) in self.b.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                for _ in 0..v.max(0) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn mutate(&self, k: usize) -> Result<Self, QuiverError> {
        let n = self.n();
        if k >= n {
            return Err(QuiverError::IndexOutOfRange { index: k, n });
        }
        let b = &self.b;
        let mut out = b.clone();
        for i in 0..n {
            for j in 0..n {
                out[i][j] = if i == k || j == k {
                    -b[i][j]
                } else {
                    // paths i -> k -> j add arrows i -> j, paths j -> k -> i remove them
                    b[i][j] + (b[i][k].abs() * b[k][j] + b[i][k] * b[k][j].abs()) / 2
                };
            }
        }
        Ok(Self { b: out })
    }

    pub fn opposite(&self) -> Self {
        Self { b: self.b.iter().map(|r| r.iter().map(|v| -v).collect()).collect() }
    }

    /// Relabels points: point `i` of `self` becomes point `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.n();
        let mut out = vec![vec![0; n]; n];
        for i in 0..n {
            for j in 0..n {
                out[perm[i]][perm[j]] = self.b[i][j];
            }
        }
        Self { b: out }
    }

    pub fn is_acyclic(&self) -> bool {
        let n = self.n();
        let mut indeg: Vec<usize> = (0..n).map(|j| (0..n).filter(|&i| self.b[i][j] > 0).count()).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut seen = 0;
        while let Some(i) = queue.pop_front() {
            seen += 1;
            for j in 0..n {
                if self.b[i][j] > 0 {
                    indeg[j] -= 1;
                    if indeg[j] == 0 {
                        queue.push_back(j);
                    }
                }
            }
        }
        seen == n
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if self.b[i][j] != 0 && !seen[j] {
                    seen[j] = true;
                    stack.push(j);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Canonical relabeling: the labeling with the least key (upper triangle read
    /// column by column) among those respecting an iterated degree refinement.
    /// Returns the canonical quiver and the permutation carrying `self` onto it.
    pub fn canonical_form(&self) -> (Quiver, Vec<usize>) {
        let n = self.n();
        let colors = self.refined_colors();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&i| colors[i]);
        let mut block_end = vec![0; n];
        for pos in 0..n {
            let c = colors[order[pos]];
            block_end[pos] = (pos..n).take_while(|&k| colors[order[k]] == c).last().unwrap_or(pos) + 1;
        }
        let mut best: Option<(Vec<i32>, Vec<usize>)> = None;
        let mut key = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        self.search_canonical(&block_end, 0, &mut order, &mut key, &mut best);
        let (_, seq) = best.expect("at least one labeling");
        // seq[pos] = original point placed at canonical position pos
        let mut perm = vec![0; n];
        for (pos, &orig) in seq.iter().enumerate() {
            perm[orig] = pos;
        }
        (self.permuted(&perm), perm)
    }

    fn search_canonical(
        &self,
        block_end: &[usize],
        pos: usize,
        current: &mut Vec<usize>,
        key: &mut Vec<i32>,
        best: &mut Option<(Vec<i32>, Vec<usize>)>,
    ) {
        let n = self.n();
        if pos == n {
            if best.as_ref().is_none_or(|(k, _)| key.as_slice() < k.as_slice()) {
                *best = Some((key.clone(), current.clone()));
            }
            return;
        }
        for cand in pos..block_end[pos] {
            current.swap(pos, cand);
            let mark = key.len();
            key.extend((0..pos).map(|a| self.b[current[a]][current[pos]]));
            let worse = best.as_ref().is_some_and(|(k, _)| key.as_slice() > &k[..key.len()]);
            if !worse {
                self.search_canonical(block_end, pos + 1, current, key, best);
            }
            key.truncate(mark);
            current.swap(pos, cand);
        }
    }

    fn refined_colors(&self) -> Vec<usize> {
        let n = self.n();
        let mut colors = vec![0usize; n];
        loop {
            let sigs: Vec<(usize, Vec<(i32, usize)>)> = (0..n)
                .map(|i| {
                    let mut nb: Vec<(i32, usize)> = (0..n).filter(|&j| j != i && self.b[i][j] != 0).map(|j| (self.b[i][j], colors[j])).collect();
                    nb.sort_unstable();
                    (colors[i], nb)
                })
                .collect();
            let distinct: BTreeSet<&(usize, Vec<(i32, usize)>)> = sigs.iter().collect();
            let index: HashMap<&(usize, Vec<(i32, usize)>), usize> = distinct.iter().enumerate().map(|(k, s)| (*s, k)).collect();
            let next: Vec<usize> = sigs.iter().map(|s| index[s]).collect();
            let before = colors.iter().collect::<BTreeSet<_>>().len();
            let after = distinct.len();
            colors = next;
            if after == before {
                return colors;
            }
        }
    }

    /// Some permutation `perm` with `self.permuted(&perm) == *other`, if one exists.
    pub fn isomorphism(&self, other: &Quiver) -> Option<Vec<usize>> {
        if self.n() != other.n() {
            return None;
        }
        let (ca, pa) = self.canonical_form();
        let (cb, pb) = other.canonical_form();
        if ca != cb {
            return None;
        }
        // self -> canonical -> other
        let mut inv_b = vec![0; pb.len()];
        for (i, &c) in pb.iter().enumerate() {
            inv_b[c] = i;
        }
        Some(pa.iter().map(|&c| inv_b[c]).collect())
    }

    pub fn is_isomorphic(&self, other: &Quiver) -> bool {
        self.isomorphism(other).is_some()
    }

    /// The non-oriented cycle on `p + q` points with `p` arrows running one way
    /// around and `q` the other; for `p = q = 1` this is the Kronecker quiver.
    pub fn tilde_a(p: usize, q: usize) -> Result<Self, QuiverError> {
        if q < 1 || p < q {
            return Err(QuiverError::BadParameters { p, q });
        }
        let n = p + q;
        let mut out = Self::empty(n);
        for i in 0..n {
            let j = (i + 1) % n;
            if i < p {
                out.add_arrows(i, j, 1);
            } else {
                out.add_arrows(j, i, 1);
            }
        }
        Ok(out)
    }

    /// All quivers mutation-equivalent to `self`, in canonical form.
    pub fn mutation_class(&self, node_limit: usize) -> Result<BTreeSet<Quiver>, QuiverError> {
        let start = self.canonical_form().0;
        let mut seen = BTreeSet::new();
        seen.insert(start.clone());
        let mut queue = VecDeque::from([start]);
        while let Some(q) = queue.pop_front() {
            for k in 0..q.n() {
                let m = q.mutate(k)?.canonical_form().0;
                if seen.insert(m.clone()) {
                    if seen.len() > node_limit {
                        return Err(QuiverError::LimitExceeded { limit: node_limit });
                    }
                    queue.push_back(m);
                }
            }
        }
        Ok(seen)
    }

    /// Recognizes type Ã(p, q) by membership in the (cached) mutation class of
    /// the canonical cycle for every split `p + q = n`.
    pub fn classify_tilde_a(&self) -> Result<TypeLabel, QuiverError> {
        let n = self.n();
        if n < 2 || !self.is_connected() || self.b.iter().flatten().any(|v| v.abs() > 2) {
            return Ok(TypeLabel::Other);
        }
        let canon = self.canonical_form().0;
        for q in 1..=n / 2 {
            let p = n - q;
            if tilde_a_class(p, q)?.contains(&canon) {
                return Ok(TypeLabel::TildeA { p, q });
            }
        }
        Ok(TypeLabel::Other)
    }

    pub fn to_dot(&self, names: Option<&[String]>) -> String {
        let mut s = String::from("digraph quiver {\n");
        for i in 0..self.n() {
            let label = names.and_then(|n| n.get(i).cloned()).unwrap_or_else(|| (i + 1).to_string());
            let _ = writeln!(s, "  {i} [label=\"{label}\"];");
        }
        for (i, row) in self.b.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v > 0 {
                    let _ = writeln!(s, "  {i} -> {j}{};", if v > 1 { format!(" [label=\"{v}\"]") } else { String::new() });
                }
            }
        }
        s.push_str("}\n");
        s
    }
}

/// Mutation classes of the canonical Ã(p, q) quivers are finite; they are
/// computed once per `(p, q)` and shared.
pub const CLASS_NODE_LIMIT: usize = 200_000;

fn tilde_a_class(p: usize, q: usize) -> Result<Arc<BTreeSet<Quiver>>, QuiverError> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<BTreeSet<Quiver>>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(c) = cache.lock().expect("class cache").get(&(p, q)) {
        return Ok(c.clone());
    }
    let class = Arc::new(Quiver::tilde_a(p, q)?.mutation_class(CLASS_NODE_LIMIT)?);
    cache.lock().expect("class cache").insert((p, q), class.clone());
    Ok(class)
}

impl fmt::Debug for Quiver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let arrows: Vec<String> = self.arrows().iter().map(|(s, t)| format!("{}->{}", s + 1, t + 1)).collect();
        write!(f, "Quiver[{}]{{{}}}", self.n(), arrows.join(", "))
    }
}

#[derive(Serialize, Deserialize)]
struct QuiverJson {
    n: usize,
    arrows: Vec<(usize, usize)>,
}

impl Serialize for Quiver {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        QuiverJson { n: self.n(), arrows: self.arrows() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Quiver {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = QuiverJson::deserialize(d)?;
        Quiver::from_arrows(raw.n, &raw.arrows).map_err(D::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kronecker() -> Quiver {
        Quiver::from_arrows(2, &[(0, 1), (0, 1)]).unwrap()
    }

    #[test]
    fn mutate_linear_a3_at_middle() {
        let q = Quiver::from_arrows(3, &[(0, 1), (1, 2)]).unwrap();
        let m = q.mutate(1).unwrap();
        assert_eq!(m, Quiver::from_arrows(3, &[(1, 0), (2, 1), (0, 2)]).unwrap());
    }

    #[test]
    fn mutate_kronecker() {
        assert_eq!(kronecker().mutate(0).unwrap(), Quiver::from_arrows(2, &[(1, 0), (1, 0)]).unwrap());
        assert!(kronecker().mutate(2).is_err());
    }

    #[test]
    fn isomorphism_basics() {
        let a = Quiver::from_arrows(2, &[(0, 1)]).unwrap();
        let b = Quiver::from_arrows(2, &[(1, 0)]).unwrap();
        assert_eq!(a.isomorphism(&a), Some(vec![0, 1]));
        let w = a.isomorphism(&b).unwrap();
        assert_eq!(a.permuted(&w), b);
        assert!(!a.is_isomorphic(&kronecker()));
    }

    #[test]
    fn opposites() {
        let a = Quiver::from_arrows(2, &[(0, 1)]).unwrap();
        assert_eq!(a.opposite(), Quiver::from_arrows(2, &[(1, 0)]).unwrap());
        assert_eq!(kronecker().opposite().opposite(), kronecker());
        assert_eq!(kronecker().opposite(), Quiver::from_arrows(2, &[(1, 0), (1, 0)]).unwrap());
    }

    #[test]
    fn canonical_tilde_a() {
        assert_eq!(Quiver::tilde_a(1, 1).unwrap(), kronecker());
        assert_eq!(Quiver::tilde_a(2, 1).unwrap(), Quiver::from_arrows(3, &[(0, 1), (1, 2), (0, 2)]).unwrap());
        assert!(Quiver::tilde_a(1, 2).is_err());
        assert!(Quiver::tilde_a(1, 0).is_err());
        assert_eq!(Quiver::tilde_a(3, 2).unwrap().classify_tilde_a().unwrap(), TypeLabel::TildeA { p: 3, q: 2 });
    }

    #[test]
    fn small_mutation_classes() {
        assert_eq!(kronecker().mutation_class(10).unwrap().len(), 1);
        let a2 = Quiver::from_arrows(2, &[(0, 1)]).unwrap();
        let class = a2.mutation_class(10).unwrap();
        assert_eq!(class.len(), 1);
        assert!(class.contains(&a2.canonical_form().0));
        assert!(matches!(Quiver::tilde_a(3, 2).unwrap().mutation_class(2), Err(QuiverError::LimitExceeded { .. })));
    }

    #[test]
    fn classification() {
        assert_eq!(kronecker().classify_tilde_a().unwrap(), TypeLabel::TildeA { p: 1, q: 1 });
        let m = Quiver::tilde_a(3, 2).unwrap().mutate(3).unwrap();
        assert_eq!(m.classify_tilde_a().unwrap(), TypeLabel::TildeA { p: 3, q: 2 });
        assert_eq!(Quiver::from_arrows(2, &[(0, 1)]).unwrap().classify_tilde_a().unwrap(), TypeLabel::Other);
        // the oriented 3-cycle is mutation-equivalent to A3, not affine
        let cyc = Quiver::from_arrows(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(cyc.classify_tilde_a().unwrap(), TypeLabel::Other);
        // Ã(2,2) and Ã(3,1) are different classes on four points
        assert_eq!(Quiver::tilde_a(2, 2).unwrap().classify_tilde_a().unwrap(), TypeLabel::TildeA { p: 2, q: 2 });
        assert_eq!(Quiver::tilde_a(3, 1).unwrap().classify_tilde_a().unwrap(), TypeLabel::TildeA { p: 3, q: 1 });
    }

    #[test]
    fn json_and_dot() {
        let s = serde_json::to_string(&kronecker()).unwrap();
        assert_eq!(s, r#"{"n":2,"arrows":[[0,1],[0,1]]}"#);
        assert_eq!(serde_json::from_str::<Quiver>(&s).unwrap(), kronecker());
        assert!(kronecker().to_dot(None).contains("0 -> 1 [label=\"2\"]"));
    }

    fn random_quiver() -> impl Strategy<Value = Quiver> {
        (2usize..6).prop_flat_map(|n| {
            prop::collection::vec(-2i32..3, n * (n - 1) / 2).prop_map(move |vals| {
                let mut q = Quiver::empty(n);
                let mut it = vals.into_iter();
                for i in 0..n {
                    for j in i + 1..n {
                        q.add_arrows(i, j, it.next().unwrap());
                    }
                }
                q
            })
        })
    }

    proptest! {
        #[test]
        fn mutation_is_involutive(q in random_quiver(), k in 0usize..6) {
            let k = k % q.n();
            let m = q.mutate(k).unwrap();
            prop_assert!(Quiver::from_matrix(m.matrix().to_vec()).is_ok());
            prop_assert_eq!(m.mutate(k).unwrap(), q);
        }

        #[test]
        fn mutation_commutes_with_opposite(q in random_quiver(), k in 0usize..6) {
            let k = k % q.n();
            prop_assert_eq!(q.opposite().mutate(k).unwrap(), q.mutate(k).unwrap().opposite());
        }

        #[test]
        fn canonical_form_is_label_invariant(q in random_quiver(), seed in any::<u64>()) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut perm: Vec<usize> = (0..q.n()).collect();
            perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let r = q.permuted(&perm);
            let (cq, pq) = q.canonical_form();
            prop_assert_eq!(&q.permuted(&pq), &cq);
            prop_assert_eq!(cq, r.canonical_form().0);
            let w = q.isomorphism(&r).unwrap();
            prop_assert_eq!(q.permuted(&w), r);
        }

        #[test]
        fn classification_is_mutation_invariant(split in 0usize..4, k in 0usize..5, steps in prop::collection::vec(0usize..5, 0..4)) {
            let (p, q) = [(1, 1), (2, 1), (2, 2), (3, 2)][split];
            let mut quiver = Quiver::tilde_a(p, q).unwrap();
            for s in steps {
                quiver = quiver.mutate(s % (p + q)).unwrap();
            }
            let label = quiver.classify_tilde_a().unwrap();
            prop_assert_eq!(label, TypeLabel::TildeA { p, q });
            prop_assert_eq!(quiver.mutate(k % (p + q)).unwrap().classify_tilde_a().unwrap(), label);
        }
    }
}
