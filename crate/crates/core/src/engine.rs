//! Seeds, the exchange relation and depth-bounded exchange graphs.
//!
//! All cluster variables live in one coordinate frame: Laurent polynomials in
//! the variables of the root seed an enumeration started from. Seeds are
//! compared after sorting their clusters, so node identity in an
//! [`ExchangeGraph`] is plain data equality.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::laurent::{LaurentError, LaurentPoly};
use crate::quiver::{Quiver, QuiverError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error(transparent)]
    Quiver(#[from] QuiverError),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
    #[error("exchange relation at direction {direction} is not exactly divisible; this is a bug")]
    ExactDivisionFailed { direction: usize },
    #[error("enumeration exceeded the node limit of {limit}")]
    LimitExceeded { limit: usize },
    #[error("seed shape mismatch: {0}")]
    Shape(String),
    #[error("no pool variable has denominator vector e_{index}")]
    NoPartnerFound { index: usize },
    #[error("{count} pool variables have denominator vector e_{index}")]
    AmbiguousPartner { index: usize, count: usize },
    #[error("z_{index} times its exchange partner is not a sum of two unit monomials")]
    NotTwoMonomials { index: usize },
    #[error("local exchange data admit no globally consistent orientation")]
    InconsistentOrientation,
    #[error("operation requires the coordinate seed of its own frame")]
    NotCoordinateFrame,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Seed {
    quiver: Quiver,
    cluster: Vec<LaurentPoly>,
}

impl Seed {
    pub fn new(quiver: Quiver, cluster: Vec<LaurentPoly>) -> Result<Self, EngineError> {
        if cluster.len() != quiver.n() {
            return Err(EngineError::Shape(format!("{} variables for a quiver on {} points", cluster.len(), quiver.n())));
        }
        if let Some(first) = cluster.first() {
            if cluster.iter().any(|v| v.arity() != first.arity()) {
                return Err(EngineError::Shape("variables in different frames".into()));
            }
        }
        let distinct: BTreeSet<&LaurentPoly> = cluster.iter().collect();
        if distinct.len() != cluster.len() {
            return Err(EngineError::Shape("repeated cluster variable".into()));
        }
        Ok(Self { quiver, cluster })
    }

    /// The seed whose cluster is the coordinate variables `x_1, .., x_n`.
    pub fn initial(quiver: Quiver) -> Self {
        let n = quiver.n();
        let cluster = (0..n).map(|i| LaurentPoly::var(n, i)).collect();
        Self { quiver, cluster }
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn cluster(&self) -> &[LaurentPoly] {
        &self.cluster
    }

    pub fn rank(&self) -> usize {
        self.cluster.len()
    }

    /// Arity of the coordinate frame the variables are written in.
    pub fn frame_arity(&self) -> usize {
        self.cluster.first().map_or(0, |v| v.arity())
    }

    pub fn is_coordinate_seed(&self) -> bool {
        let n = self.frame_arity();
        n == self.rank() && self.cluster.iter().enumerate().all(|(i, v)| *v == LaurentPoly::var(n, i))
    }

    /// The two monomials of the exchange relation at `k`: the product over
    /// arrows leaving `k` and the product over arrows entering `k`.
    pub fn exchange_monomials(&self, k: usize) -> Result<(LaurentPoly, LaurentPoly), EngineError> {
        let n = self.rank();
        if k >= n {
            return Err(QuiverError::IndexOutOfRange { index: k, n }.into());
        }
        let arity = self.frame_arity();
        let mut out_prod = LaurentPoly::one(arity);
        let mut in_prod = LaurentPoly::one(arity);
        for j in 0..n {
            let b = self.quiver.entry(k, j);
            if b > 0 {
                out_prod = &out_prod * &self.cluster[j].pow(b as u32);
            } else if b < 0 {
                in_prod = &in_prod * &self.cluster[j].pow((-b) as u32);
            }
        }
        Ok((out_prod, in_prod))
    }

    /// The variable replacing `x_k` under mutation at `k`.
    pub fn exchanged_variable(&self, k: usize) -> Result<LaurentPoly, EngineError> {
        let (a, b) = self.exchange_monomials(k)?;
        (&a + &b).try_div_exact(&self.cluster[k]).map_err(|e| match e {
            LaurentError::NotDivisible => EngineError::ExactDivisionFailed { direction: k },
            other => other.into(),
        })
    }

    pub fn mutate(&self, k: usize) -> Result<Self, EngineError> {
        let fresh = self.exchanged_variable(k)?;
        let mut cluster = self.cluster.clone();
        cluster[k] = fresh;
        Ok(Self { quiver: self.quiver.mutate(k)?, cluster })
    }

    /// Sorts the cluster and relabels the quiver to match; returns the
    /// permutation `perm` sending old position `i` to `perm[i]`.
    pub fn canonical(&self) -> (Self, Vec<usize>) {
        let mut order: Vec<usize> = (0..self.rank()).collect();
        order.sort_by(|&a, &b| self.cluster[a].cmp(&self.cluster[b]));
        let mut perm = vec![0; order.len()];
        for (pos, &old) in order.iter().enumerate() {
            perm[old] = pos;
        }
        let cluster = order.iter().map(|&i| self.cluster[i].clone()).collect();
        (Self { quiver: self.quiver.permuted(&perm), cluster }, perm)
    }

    pub fn position_of(&self, v: &LaurentPoly) -> Option<usize> {
        self.cluster.iter().position(|c| c == v)
    }

    pub fn cluster_set(&self) -> BTreeSet<LaurentPoly> {
        self.cluster.iter().cloned().collect()
    }
}

#[derive(Debug, Clone)]
pub struct GraphNode {
    pub seed: Seed,
    pub depth: usize,
    /// `neighbors[k]` is the node reached by mutating at position `k` of `seed`.
    pub neighbors: Vec<Option<usize>>,
}

#[derive(Debug, Clone)]
pub struct ExchangeGraph {
    nodes: Vec<GraphNode>,
    index: HashMap<Vec<LaurentPoly>, usize>,
    depth: usize,
}

impl ExchangeGraph {
    /// Breadth-first enumeration of all seeds within `depth` mutations of `root`.
    pub fn enumerate(root: &Seed, depth: usize, node_limit: usize) -> Result<Self, EngineError> {
        let n = root.rank();
        let (start, _) = root.canonical();
        let mut g = Self { nodes: Vec::new(), index: HashMap::new(), depth };
        g.index.insert(start.cluster.clone(), 0);
        g.nodes.push(GraphNode { seed: start, depth: 0, neighbors: vec![None; n] });
        let mut queue = VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            if g.nodes[u].depth >= depth {
                continue;
            }
            for k in 0..n {
                if g.nodes[u].neighbors[k].is_some() {
                    continue;
                }
                let mutated = g.nodes[u].seed.mutate(k)?;
                let (canon, perm) = mutated.canonical();
                let back_slot = perm[k];
                let v = match g.index.get(&canon.cluster) {
                    Some(&v) => v,
                    None => {
                        if g.nodes.len() >= node_limit {
                            return Err(EngineError::LimitExceeded { limit: node_limit });
                        }
                        let v = g.nodes.len();
                        g.index.insert(canon.cluster.clone(), v);
                        let d = g.nodes[u].depth + 1;
                        g.nodes.push(GraphNode { seed: canon, depth: d, neighbors: vec![None; n] });
                        queue.push_back(v);
                        v
                    }
                };
                g.nodes[u].neighbors[k] = Some(v);
                g.nodes[v].neighbors[back_slot] = Some(u);
            }
        }
        Ok(g)
    }

    pub fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Undirected edges `(u, k, v)` with `u < v`, `k` the direction at `u`.
    pub fn edges(&self) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for (u, node) in self.nodes.iter().enumerate() {
            for (k, v) in node.neighbors.iter().enumerate() {
                if let Some(v) = *v {
                    if u < v {
                        out.push((u, k, v));
                    }
                }
            }
        }
        out
    }

    /// Node whose cluster is the given set of variables, in any order.
    pub fn find(&self, cluster: &[LaurentPoly]) -> Option<usize> {
        let mut key = cluster.to_vec();
        key.sort();
        self.index.get(&key).copied()
    }

    pub fn variables(&self) -> BTreeSet<LaurentPoly> {
        self.nodes.iter().flat_map(|n| n.seed.cluster.iter().cloned()).collect()
    }

    pub fn cluster_sets(&self) -> BTreeSet<Vec<LaurentPoly>> {
        self.index.keys().cloned().collect()
    }

    /// Graph distances from `start` along enumerated edges.
    pub fn distances_from(&self, start: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.nodes.len()];
        dist[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].expect("visited");
            for v in self.nodes[u].neighbors.iter().flatten() {
                if dist[*v].is_none() {
                    dist[*v] = Some(d + 1);
                    queue.push_back(*v);
                }
            }
        }
        dist
    }

    /// DOT rendering with nodes labeled by the denominator vectors of their cluster.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph exchange {\n");
        for (i, node) in self.nodes.iter().enumerate() {
            let labels: Vec<String> = node
                .seed
                .cluster
                .iter()
                .map(|v| {
                    let d = denominator_vector(v).unwrap_or_default();
                    format!("({})", d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
                })
                .collect();
            let _ = writeln!(s, "  {i} [label=\"{}\"];", labels.join(" "));
        }
        for (u, _, v) in self.edges() {
            let _ = writeln!(s, "  {u} -- {v};");
        }
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> serde_json::Value {
        let nodes: Vec<serde_json::Value> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| {
                serde_json::json!({
                    "id": i,
                    "depth": n.depth,
                    "seed": n.seed,
                    "denominators": n.seed.cluster.iter().map(|v| denominator_vector(v).unwrap_or_default()).collect::<Vec<_>>(),
                    "neighbors": n.neighbors,
                })
            })
            .collect();
        let edges: Vec<[usize; 3]> = self.edges().into_iter().map(|(u, k, v)| [u, k, v]).collect();
        serde_json::json!({ "depth": self.depth, "nodes": nodes, "edges": edges })
    }
}

pub fn variables_up_to_depth(seed: &Seed, depth: usize, node_limit: usize) -> Result<BTreeSet<LaurentPoly>, EngineError> {
    Ok(ExchangeGraph::enumerate(seed, depth, node_limit)?.variables())
}

pub fn denominator_vector(v: &LaurentPoly) -> Result<Vec<u32>, EngineError> {
    Ok(v.reduced_form()?.1)
}

/// Determinant of the Jacobian matrix `d vs[i] / d x_j`, expanded exactly.
pub fn jacobian_determinant(vs: &[LaurentPoly]) -> Result<LaurentPoly, EngineError> {
    let n = vs.len();
    if let Some(v) = vs.iter().find(|v| v.arity() != n) {
        return Err(LaurentError::ArityMismatch { left: n, right: v.arity() }.into());
    }
    if n > 20 {
        return Err(EngineError::Shape("Jacobian of more than 20 variables".into()));
    }
    let jac: Vec<Vec<LaurentPoly>> = vs.iter().map(|v| (0..n).map(|j| v.partial_derivative(j)).collect::<Result<_, _>>()).collect::<Result<_, _>>()?;
    // minors[mask]: determinant of rows (n - |mask|)..n restricted to the columns in mask
    let mut minors: HashMap<u32, LaurentPoly> = HashMap::new();
    minors.insert(0, LaurentPoly::one(n));
    for size in 1..=n {
        let row = n - size;
        let masks: Vec<u32> = (0u32..(1 << n)).filter(|m| m.count_ones() as usize == size).collect();
        for mask in masks {
            let mut acc = LaurentPoly::zero(n);
            let mut sign_pos = 0;
            for j in 0..n {
                if mask & (1 << j) == 0 {
                    continue;
                }
                let entry = &jac[row][j];
                if !entry.is_zero() {
                    if let Some(sub) = minors.get(&(mask & !(1 << j))) {
                        let term = entry * sub;
                        acc = if sign_pos % 2 == 0 { &acc + &term } else { &acc - &term };
                    }
                }
                sign_pos += 1;
            }
            if !acc.is_zero() {
                minors.insert(mask, acc);
            }
        }
        minors.retain(|m, _| m.count_ones() as usize == size);
    }
    Ok(minors.remove(&((1u32 << n) - 1)).unwrap_or_else(|| LaurentPoly::zero(n)))
}

/// Jacobian criterion in characteristic zero.
pub fn is_algebraically_independent(vs: &[LaurentPoly]) -> Result<bool, EngineError> {
    Ok(!jacobian_determinant(vs)?.is_zero())
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityReport {
    pub variables_checked: usize,
    pub violations: Vec<LaurentPoly>,
}

impl PositivityReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn positivity_audit(seed: &Seed, depth: usize, node_limit: usize) -> Result<PositivityReport, EngineError> {
    let vars = variables_up_to_depth(seed, depth, node_limit)?;
    let mut violations = Vec::new();
    for v in &vars {
        if !v.has_nonneg_numerator()? {
            violations.push(v.clone());
        }
    }
    Ok(PositivityReport { variables_checked: vars.len(), violations })
}

/// Reads the exchange quiver of the coordinate cluster off the pool of known
/// variables: the partner of `x_i` is the unique pool variable with
/// denominator vector `e_i`, and `x_i` times it is the sum of the two
/// monomials of the exchange relation. The orientation of each binomial is
/// fixed by propagating skew-symmetry, so the answer is determined up to
/// a global opposite.
pub fn infer_exchange_quiver(reference: &[LaurentPoly], pool: &BTreeSet<LaurentPoly>) -> Result<Quiver, EngineError> {
    let n = reference.len();
    if reference.iter().enumerate().any(|(i, v)| v.arity() != n || *v != LaurentPoly::var(n, i)) {
        return Err(EngineError::NotCoordinateFrame);
    }
    let mut binomials: Vec<[Vec<i32>; 2]> = Vec::with_capacity(n);
    for i in 0..n {
        let mut unit = vec![0u32; n];
        unit[i] = 1;
        let partners: Vec<&LaurentPoly> = pool.iter().filter(|v| v.arity() == n && !v.is_zero() && denominator_vector(v).ok().as_ref() == Some(&unit)).collect();
        let partner = match partners.len() {
            0 => return Err(EngineError::NoPartnerFound { index: i }),
            1 => partners[0],
            count => return Err(EngineError::AmbiguousPartner { index: i, count }),
        };
        let product = partner * &reference[i];
        let terms: Vec<(&Vec<i32>, &BigInt)> = product.terms().collect();
        if terms.len() != 2 || terms.iter().any(|(e, c)| !c.is_one() || e[i] != 0 || e.iter().any(|&d| d < 0)) {
            return Err(EngineError::NotTwoMonomials { index: i });
        }
        binomials.push([terms[0].0.clone(), terms[1].0.clone()]);
    }
    // orientation[i] = which monomial is the product over outgoing arrows
    let mut orientation: Vec<Option<usize>> = vec![None; n];
    let mut b = vec![vec![0i32; n]; n];
    for start in 0..n {
        if orientation[start].is_some() {
            continue;
        }
        orientation[start] = Some(0);
        let mut stack = vec![start];
        while let Some(i) = stack.pop() {
            let o = orientation[i].expect("assigned");
            let (outgoing, incoming) = (&binomials[i][o], &binomials[i][1 - o]);
            for j in 0..n {
                if outgoing[j] > 0 && incoming[j] > 0 {
                    return Err(EngineError::InconsistentOrientation);
                }
                b[i][j] = outgoing[j] - incoming[j];
                if b[i][j] == 0 {
                    continue;
                }
                // x_j must list i with the opposite sign
                let want = -b[i][j];
                let fit = (0..2).find(|&oj| binomials[j][oj][i] - binomials[j][1 - oj][i] == want);
                match (orientation[j], fit) {
                    (_, None) => return Err(EngineError::InconsistentOrientation),
                    (None, Some(oj)) => {
                        orientation[j] = Some(oj);
                        stack.push(j);
                    }
                    (Some(oj), Some(f)) if oj != f => return Err(EngineError::InconsistentOrientation),
                    _ => {}
                }
            }
        }
    }
    Ok(Quiver::from_matrix(b)?)
}

/// Bounded check that sending the coordinates of `seed` to `images` behaves as
/// a cluster automorphism: the image of the cluster must be an enumerated
/// cluster, and for every seed within `depth - 1` mutations and every
/// direction the image of the mutated cluster must be the mutation of the
/// image cluster at the image variable. `false` is conclusive; `true` means no
/// violation was found within the bound.
pub fn check_automorphism_candidate(seed: &Seed, images: &[LaurentPoly], depth: usize, node_limit: usize) -> Result<bool, EngineError> {
    if !seed.is_coordinate_seed() {
        return Err(EngineError::NotCoordinateFrame);
    }
    if images.len() != seed.rank() {
        return Err(EngineError::Shape(format!("{} images for rank {}", images.len(), seed.rank())));
    }
    let graph = ExchangeGraph::enumerate(seed, depth, node_limit)?;
    let Some(image_node) = graph.find(images) else {
        return Ok(false);
    };
    let reach = graph.nodes[image_node].depth + depth;
    let wide = ExchangeGraph::enumerate(seed, reach, node_limit)?;
    let apply = |v: &LaurentPoly| -> Result<Option<LaurentPoly>, EngineError> {
        match v.substitute(images) {
            Ok(w) => Ok(Some(w)),
            Err(LaurentError::NotDivisible) => Ok(None),
            Err(e) => Err(e.into()),
        }
    };
    for node in graph.nodes.iter().filter(|n| n.depth < depth) {
        let y = &node.seed;
        let mut fy = Vec::with_capacity(y.rank());
        for v in y.cluster() {
            match apply(v)? {
                Some(w) => fy.push(w),
                None => return Ok(false),
            }
        }
        let Some(target) = wide.find(&fy) else {
            return Ok(false);
        };
        let target_seed = &wide.nodes[target].seed;
        for k in 0..y.rank() {
            let fresh = y.exchanged_variable(k)?;
            let Some(f_fresh) = apply(&fresh)? else {
                return Ok(false);
            };
            let pos = target_seed.position_of(&fy[k]).expect("image variable in image cluster");
            if target_seed.exchanged_variable(pos)? != f_fresh {
                return Ok(false);
            }
        }
    }
    Ok(true)
}
