//! The marked annulus C(p, q) seen through its universal cover.
//!
//! The cover is a horizontal strip. Marked point `a` on boundary 0 lifts to
//! the bottom edge at abscissa `a / p`, marked point `b` on boundary 1 to the
//! top edge at `b / q`; the deck translation adds `p` to bottom positions and
//! `q` to top positions. Abscissae are kept as integers by scaling with
//! `p * q`, so one period is `p * q` units wide.
//!
//! An arc is stored as one lift: a chord of the strip between two marked
//! points. Two arcs cross once for every deck translate of the second whose
//! chord strictly interleaves the first in the boundary order of the strip
//! (bottom edge left to right, then top edge right to left). Walking the
//! boundary in that order is counterclockwise, which fixes the orientation
//! used for triangles and quivers.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EngineError, Seed};
use crate::laurent::LaurentPoly;
use crate::quiver::Quiver;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnulusError {
    #[error("an annulus needs a marked point on each boundary, got p = {p}, q = {q}")]
    BadParameters { p: u32, q: u32 },
    #[error("invalid arc {arc}: {defect}")]
    InvalidArc { arc: ArcLift, defect: ArcDefect },
    #[error("triangulation has {found} arcs, expected {expected}")]
    ArcCount { expected: usize, found: usize },
    #[error("arcs {0} and {1} cross")]
    Crossing(usize, usize),
    #[error("arc {0} is listed twice")]
    DuplicateArc(usize),
    #[error("arc index {index} out of range for {n} arcs")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("malformed triangulation: {0}")]
    Malformed(String),
    #[error("{0} values supplied for {1} arcs")]
    MissingAssignment(usize, usize),
    #[error("no flip sequence reached the arc within {cap} flips; this is a bug")]
    NonTermination { cap: usize },
    #[error("window of {window} periods is too small; at least 2 are needed")]
    WindowTooSmall { window: usize },
    #[error("enumeration exceeded the node limit of {limit}")]
    LimitExceeded { limit: usize },
    #[error(transparent)]
    Engine(#[from] EngineError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ArcDefect {
    BadBoundary,
    BoundarySegment,
    Contractible,
    SelfCrossing,
}

impl fmt::Display for ArcDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArcDefect::BadBoundary => "boundary index must be 0 or 1",
            ArcDefect::BoundarySegment => "it is a boundary segment",
            ArcDefect::Contractible => "it is contractible to a marked point",
            ArcDefect::SelfCrossing => "it crosses one of its own translates",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MarkedAnnulus {
    pub p: u32,
    pub q: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Endpoint {
    pub b: u8,
    pub pos: i64,
}

impl Endpoint {
    pub fn new(b: u8, pos: i64) -> Self {
        Self { b, pos }
    }

    /// Position in the boundary order of the strip.
    fn key(self) -> (u8, i64) {
        if self.b == 0 {
            (0, self.pos)
        } else {
            (1, -self.pos)
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.b, self.pos)
    }
}

/// One lift of an arc. The endpoints are kept sorted (boundary 0 first, then
/// by position) but not translated; [`MarkedAnnulus::canonical`] picks the
/// representative of the deck orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ArcLift {
    pub e1: Endpoint,
    pub e2: Endpoint,
}

impl ArcLift {
    pub fn new(a: Endpoint, b: Endpoint) -> Self {
        if (a.b, a.pos) <= (b.b, b.pos) {
            Self { e1: a, e2: b }
        } else {
            Self { e1: b, e2: a }
        }
    }

    /// Shorthand for `ArcLift::new(Endpoint::new(b1, x1), Endpoint::new(b2, x2))`.
    pub fn of(b1: u8, x1: i64, b2: u8, x2: i64) -> Self {
        Self::new(Endpoint::new(b1, x1), Endpoint::new(b2, x2))
    }

    pub fn endpoints(&self) -> [Endpoint; 2] {
        [self.e1, self.e2]
    }

    pub fn kind(&self) -> ArcKind {
        if self.e1.b == self.e2.b {
            ArcKind::Peripheral(self.e1.b)
        } else {
            ArcKind::Bridging
        }
    }
}

impl fmt::Display for ArcLift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.e1, self.e2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ArcKind {
    Peripheral(u8),
    Bridging,
}

/// A side of a triangle or of a flip quadrilateral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    Boundary,
    Arc(usize),
}

impl MarkedAnnulus {
    pub fn new(p: u32, q: u32) -> Result<Self, AnnulusError> {
        if p == 0 || q == 0 {
            return Err(AnnulusError::BadParameters { p, q });
        }
        Ok(Self { p, q })
    }

    pub fn rank(&self) -> usize {
        (self.p + self.q) as usize
    }

    /// Number of marked points on boundary `b`.
    pub fn period(&self, b: u8) -> i64 {
        if b == 0 {
            self.p as i64
        } else {
            self.q as i64
        }
    }

    /// Width of one deck period in abscissa units.
    pub fn deck_width(&self) -> i64 {
        self.p as i64 * self.q as i64
    }

    pub fn abscissa(&self, e: Endpoint) -> i64 {
        if e.b == 0 {
            e.pos * self.q as i64
        } else {
            e.pos * self.p as i64
        }
    }

    pub fn translate_endpoint(&self, e: Endpoint, k: i64) -> Endpoint {
        Endpoint { b: e.b, pos: e.pos + k * self.period(e.b) }
    }

    pub fn translate(&self, a: &ArcLift, k: i64) -> ArcLift {
        ArcLift::new(self.translate_endpoint(a.e1, k), self.translate_endpoint(a.e2, k))
    }

    /// Shift putting the lowest boundary-0 point (else the lowest boundary-1
    /// point) of `points` into the fundamental range.
    fn normalizing_shift(&self, points: &[Endpoint]) -> i64 {
        let anchor = points.iter().filter(|e| e.b == 0).map(|e| e.pos).min();
        match anchor {
            Some(pos) => -pos.div_euclid(self.p as i64),
            None => {
                let pos = points.iter().map(|e| e.pos).min().expect("nonempty point set");
                -pos.div_euclid(self.q as i64)
            }
        }
    }

    pub fn canonical(&self, a: &ArcLift) -> ArcLift {
        self.translate(a, self.normalizing_shift(&a.endpoints()))
    }

    /// Horizontal extent of the chord in abscissa units.
    pub fn extent(&self, a: &ArcLift) -> i64 {
        (self.abscissa(a.e1) - self.abscissa(a.e2)).abs()
    }

    fn span(&self, a: &ArcLift) -> (i64, i64) {
        let (x, y) = (self.abscissa(a.e1), self.abscissa(a.e2));
        (x.min(y), x.max(y))
    }

    /// Deck translates of `b` whose chord can meet the chord of `a`: chords
    /// with disjoint horizontal projections never interleave.
    fn translate_range(&self, a: &ArcLift, b: &ArcLift) -> std::ops::RangeInclusive<i64> {
        let d = self.deck_width();
        let (lo_a, hi_a) = self.span(a);
        let (lo_b, hi_b) = self.span(b);
        let lo = -(hi_b - lo_a).div_euclid(d);
        let hi = (hi_a - lo_b).div_euclid(d);
        lo..=hi
    }

    pub fn check_arc(&self, a: &ArcLift) -> Result<(), ArcDefect> {
        if a.e1.b > 1 || a.e2.b > 1 {
            return Err(ArcDefect::BadBoundary);
        }
        if a.e1.b == a.e2.b {
            let delta = (a.e1.pos - a.e2.pos).abs();
            if delta == 0 {
                return Err(ArcDefect::Contractible);
            }
            if delta == 1 {
                return Err(ArcDefect::BoundarySegment);
            }
        }
        if self.translate_range(a, a).any(|k| k != 0 && interleave(a, &self.translate(a, k))) {
            return Err(ArcDefect::SelfCrossing);
        }
        Ok(())
    }

    pub fn is_valid_arc(&self, a: &ArcLift) -> bool {
        self.check_arc(a).is_ok()
    }

    fn require_valid(&self, a: &ArcLift) -> Result<(), AnnulusError> {
        self.check_arc(a).map_err(|defect| AnnulusError::InvalidArc { arc: *a, defect })
    }

    /// Number of crossings between the arcs `a` and `b` of the annulus.
    pub fn crossing_number(&self, a: &ArcLift, b: &ArcLift) -> Result<u64, AnnulusError> {
        self.require_valid(a)?;
        self.require_valid(b)?;
        Ok(self.crossing_unchecked(a, b))
    }

    pub(crate) fn crossing_unchecked(&self, a: &ArcLift, b: &ArcLift) -> u64 {
        self.translate_range(a, b).filter(|&k| interleave(a, &self.translate(b, k))).count() as u64
    }

    /// All arcs in canonical form whose chords are at most `periods` deck
    /// periods wide. Peripheral arcs are finitely many and always included.
    pub fn arcs_within(&self, periods: i64) -> Vec<ArcLift> {
        let mut out = BTreeSet::new();
        for b in 0..2u8 {
            let n = self.period(b);
            for start in 0..n {
                for span in 2..=n {
                    out.insert(self.canonical(&ArcLift::of(b, start, b, start + span)));
                }
            }
        }
        let d = self.deck_width();
        for a in 0..self.p as i64 {
            let x = a * self.q as i64;
            // top points with |x - b p| <= periods * d
            let lo = (x - periods * d).div_euclid(self.p as i64) - 1;
            let hi = (x + periods * d).div_euclid(self.p as i64) + 1;
            for b in lo..=hi {
                let arc = ArcLift::of(0, a, 1, b);
                if self.extent(&arc) <= periods * d {
                    out.insert(arc);
                }
            }
        }
        out.into_iter().filter(|a| self.is_valid_arc(a)).collect()
    }

    /// Largest crossing number between two peripheral arcs.
    pub fn max_peripheral_crossing(&self) -> u64 {
        let peripheral: Vec<ArcLift> = self.arcs_within(0).into_iter().filter(|a| a.kind() != ArcKind::Bridging).collect();
        let mut best = 0;
        for a in &peripheral {
            for b in &peripheral {
                best = best.max(self.crossing_unchecked(a, b));
            }
        }
        best
    }
}

/// Strict interleaving of two chords in the boundary order of the strip.
fn interleave(a: &ArcLift, b: &ArcLift) -> bool {
    let (mut lo, mut hi) = (a.e1.key(), a.e2.key());
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    let [c, d] = b.endpoints().map(Endpoint::key);
    if c == lo || c == hi || d == lo || d == hi {
        return false;
    }
    let inside = |k: (u8, i64)| lo < k && k < hi;
    inside(c) != inside(d)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Triangle {
    /// Vertices in counterclockwise order.
    pub vertices: [Endpoint; 3],
    /// `sides[i]` joins `vertices[i]` and `vertices[(i + 1) % 3]`.
    pub sides: [Side; 3],
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "TriangulationRepr", into = "TriangulationRepr")]
pub struct Triangulation {
    annulus: MarkedAnnulus,
    arcs: Vec<ArcLift>,
}

#[derive(Serialize, Deserialize)]
struct TriangulationRepr {
    p: u32,
    q: u32,
    arcs: Vec<ArcLift>,
}

impl TryFrom<TriangulationRepr> for Triangulation {
    type Error = AnnulusError;
    fn try_from(r: TriangulationRepr) -> Result<Self, AnnulusError> {
        Triangulation::new(MarkedAnnulus::new(r.p, r.q)?, r.arcs)
    }
}

impl From<Triangulation> for TriangulationRepr {
    fn from(t: Triangulation) -> Self {
        TriangulationRepr { p: t.annulus.p, q: t.annulus.q, arcs: t.arcs }
    }
}

/// The data of one flip: the new triangulation, the replaced and replacing
/// arcs, and the sides of the quadrilateral in the order `[α, β, δ, ε]`, so
/// that `α, δ` and `β, ε` are the opposite pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Flip {
    pub triangulation: Triangulation,
    pub index: usize,
    pub old_arc: ArcLift,
    pub new_arc: ArcLift,
    pub sides: [Side; 4],
}

/// `gamma * gamma' = first + second`, with boundary sides set to 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PtolemyRelation {
    pub gamma: LaurentPoly,
    pub first: LaurentPoly,
    pub second: LaurentPoly,
}

impl PtolemyRelation {
    pub fn exchanged(&self) -> Result<LaurentPoly, AnnulusError> {
        (&self.first + &self.second)
            .try_div_exact(&self.gamma)
            .map_err(|e| AnnulusError::Engine(e.into()))
    }
}

impl Triangulation {
    pub fn new(annulus: MarkedAnnulus, arcs: Vec<ArcLift>) -> Result<Self, AnnulusError> {
        if arcs.len() != annulus.rank() {
            return Err(AnnulusError::ArcCount { expected: annulus.rank(), found: arcs.len() });
        }
        let arcs: Vec<ArcLift> = arcs.iter().map(|a| annulus.canonical(a)).collect();
        for a in &arcs {
            annulus.require_valid(a)?;
        }
        for i in 0..arcs.len() {
            for j in 0..i {
                if arcs[i] == arcs[j] {
                    return Err(AnnulusError::DuplicateArc(i));
                }
                if annulus.crossing_unchecked(&arcs[i], &arcs[j]) > 0 {
                    return Err(AnnulusError::Crossing(j, i));
                }
            }
        }
        Ok(Self { annulus, arcs })
    }

    /// The fan of bridging arcs from boundary-0 points to `1@0`, closed by
    /// the fan from `0@p` to the boundary-1 points.
    pub fn initial(annulus: MarkedAnnulus) -> Self {
        let (p, q) = (annulus.p as i64, annulus.q as i64);
        let mut arcs: Vec<ArcLift> = Vec::new();
        let fan = (0..=p).map(|i| ArcLift::of(0, i, 1, 0)).chain((0..=q).map(|j| ArcLift::of(0, p, 1, j)));
        for a in fan {
            let c = annulus.canonical(&a);
            if !arcs.contains(&c) {
                arcs.push(c);
            }
        }
        Self::new(annulus, arcs).expect("the fan is a triangulation")
    }

    pub fn annulus(&self) -> MarkedAnnulus {
        self.annulus
    }

    pub fn arcs(&self) -> &[ArcLift] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn arc_index(&self, a: &ArcLift) -> Option<usize> {
        let c = self.annulus.canonical(a);
        self.arcs.iter().position(|x| *x == c)
    }

    /// Arc set as a sorted key, independent of the labeling.
    pub fn arc_set(&self) -> Vec<ArcLift> {
        let mut v = self.arcs.clone();
        v.sort();
        v
    }

    pub fn max_extent(&self) -> i64 {
        self.arcs.iter().map(|a| self.annulus.extent(a)).max().unwrap_or(0)
    }

    pub fn total_crossing(&self, gamma: &ArcLift) -> u64 {
        self.arcs.iter().map(|a| self.annulus.crossing_unchecked(a, gamma)).sum()
    }

    fn side_of(&self, u: Endpoint, v: Endpoint) -> Option<Side> {
        if u.b == v.b && (u.pos - v.pos).abs() == 1 {
            return Some(Side::Boundary);
        }
        self.arc_index(&ArcLift::new(u, v)).map(Side::Arc)
    }

    /// Marked points joined to `u` in the lifted triangulation, with the side joining them.
    fn lift_neighbors(&self, u: Endpoint) -> Vec<(Endpoint, Side)> {
        let mut out = vec![(Endpoint::new(u.b, u.pos - 1), Side::Boundary), (Endpoint::new(u.b, u.pos + 1), Side::Boundary)];
        let period = self.annulus.period(u.b);
        for (j, arc) in self.arcs.iter().enumerate() {
            for (here, there) in [(arc.e1, arc.e2), (arc.e2, arc.e1)] {
                if here.b == u.b && (u.pos - here.pos).rem_euclid(period) == 0 {
                    let k = (u.pos - here.pos) / period;
                    out.push((self.annulus.translate_endpoint(there, k), Side::Arc(j)));
                }
            }
        }
        out
    }

    /// Third vertices of the two triangles on the chord `u v`: first the one
    /// between `u` and `v` in boundary order, then the one outside.
    fn apexes(&self, u: Endpoint, v: Endpoint) -> Result<(Endpoint, Endpoint), AnnulusError> {
        let (u, v) = if u.key() < v.key() { (u, v) } else { (v, u) };
        let nu: HashSet<Endpoint> = self.lift_neighbors(u).into_iter().map(|x| x.0).collect();
        let common: BTreeSet<Endpoint> = self.lift_neighbors(v).into_iter().map(|x| x.0).filter(|w| nu.contains(w) && *w != u && *w != v).collect();
        let (inner, outer): (Vec<Endpoint>, Vec<Endpoint>) = common.into_iter().partition(|w| u.key() < w.key() && w.key() < v.key());
        match (inner.as_slice(), outer.as_slice()) {
            ([w1], [w2]) => Ok((*w1, *w2)),
            _ => Err(AnnulusError::Malformed(format!("chord {u}-{v} has {} inner and {} outer apexes", inner.len(), outer.len()))),
        }
    }

    fn make_triangle(&self, mut vs: [Endpoint; 3]) -> Result<Triangle, AnnulusError> {
        let shift = self.annulus.normalizing_shift(&vs);
        for v in vs.iter_mut() {
            *v = self.annulus.translate_endpoint(*v, shift);
        }
        vs.sort_by_key(|e| e.key());
        let mut sides = [Side::Boundary; 3];
        for i in 0..3 {
            let (a, b) = (vs[i], vs[(i + 1) % 3]);
            sides[i] = self.side_of(a, b).ok_or_else(|| AnnulusError::Malformed(format!("triangle side {a}-{b} is not in the triangulation")))?;
        }
        Ok(Triangle { vertices: vs, sides })
    }

    /// One triangle per deck orbit.
    pub fn triangles(&self) -> Result<Vec<Triangle>, AnnulusError> {
        let mut out = BTreeSet::new();
        for arc in &self.arcs {
            let (w1, w2) = self.apexes(arc.e1, arc.e2)?;
            out.insert(self.make_triangle([arc.e1, arc.e2, w1])?);
            out.insert(self.make_triangle([arc.e1, arc.e2, w2])?);
        }
        Ok(out.into_iter().collect())
    }

    /// One point per arc; inside each triangle an arrow from a side to the
    /// side following it counterclockwise.
    pub fn quiver(&self) -> Result<Quiver, AnnulusError> {
        let n = self.arcs.len();
        let mut b = vec![vec![0i32; n]; n];
        for t in self.triangles()? {
            for i in 0..3 {
                if let (Side::Arc(x), Side::Arc(y)) = (t.sides[i], t.sides[(i + 1) % 3]) {
                    if x != y {
                        b[x][y] += 1;
                        b[y][x] -= 1;
                    }
                }
            }
        }
        Quiver::from_matrix(b).map_err(|e| AnnulusError::Engine(e.into()))
    }

    pub fn flip(&self, index: usize) -> Result<Flip, AnnulusError> {
        let n = self.arcs.len();
        let gamma = *self.arcs.get(index).ok_or(AnnulusError::IndexOutOfRange { index, n })?;
        let (u, v) = if gamma.e1.key() < gamma.e2.key() { (gamma.e1, gamma.e2) } else { (gamma.e2, gamma.e1) };
        let (w1, w2) = self.apexes(u, v)?;
        let side = |a, b| self.side_of(a, b).ok_or_else(|| AnnulusError::Malformed(format!("quadrilateral side {a}-{b} missing")));
        let sides = [side(u, w1)?, side(w1, v)?, side(v, w2)?, side(w2, u)?];
        if sides.contains(&Side::Arc(index)) {
            return Err(AnnulusError::Malformed(format!("arc {index} borders its own quadrilateral")));
        }
        let new_arc = self.annulus.canonical(&ArcLift::new(w1, w2));
        self.annulus.require_valid(&new_arc)?;
        for (j, other) in self.arcs.iter().enumerate() {
            if j != index && (*other == new_arc || self.annulus.crossing_unchecked(other, &new_arc) > 0) {
                return Err(AnnulusError::Malformed(format!("flipped arc {new_arc} conflicts with arc {j}")));
            }
        }
        let mut arcs = self.arcs.clone();
        arcs[index] = new_arc;
        Ok(Flip { triangulation: Self { annulus: self.annulus, arcs }, index, old_arc: gamma, new_arc, sides })
    }

    pub fn ptolemy_relation(&self, index: usize, values: &[LaurentPoly]) -> Result<PtolemyRelation, AnnulusError> {
        if values.len() != self.arcs.len() {
            return Err(AnnulusError::MissingAssignment(values.len(), self.arcs.len()));
        }
        let flip = self.flip(index)?;
        let arity = values[index].arity();
        let value = |s: Side| match s {
            Side::Boundary => LaurentPoly::one(arity),
            Side::Arc(j) => values[j].clone(),
        };
        let [alpha, beta, delta, epsilon] = flip.sides.map(value);
        Ok(PtolemyRelation { gamma: values[index].clone(), first: &alpha * &delta, second: &beta * &epsilon })
    }

    /// Arcs of the lifted triangulation: translates `0..window` of every arc,
    /// each tagged with the arc it covers.
    pub fn lift(&self, window: usize) -> Vec<(usize, ArcLift)> {
        let mut out = Vec::with_capacity(window * self.arcs.len());
        for k in 0..window as i64 {
            for (j, a) in self.arcs.iter().enumerate() {
                out.push((j, self.annulus.translate(a, k)));
            }
        }
        out
    }

    /// Triangulations reachable in at most `depth` flips, the first being `self`.
    pub fn within_flips(&self, depth: usize, limit: usize) -> Result<Vec<Triangulation>, AnnulusError> {
        let mut seen: HashSet<Vec<ArcLift>> = HashSet::from([self.arc_set()]);
        let mut out = vec![self.clone()];
        let mut frontier = vec![self.clone()];
        for _ in 0..depth {
            let mut next = Vec::new();
            for t in &frontier {
                for i in 0..t.len() {
                    let f = t.flip(i)?.triangulation;
                    if seen.insert(f.arc_set()) {
                        if out.len() >= limit {
                            return Err(AnnulusError::LimitExceeded { limit });
                        }
                        out.push(f.clone());
                        next.push(f);
                    }
                }
            }
            frontier = next;
        }
        Ok(out)
    }

    /// Whether some arc of the triangulation crosses `gamma`.
    pub fn blocks(&self, gamma: &ArcLift) -> bool {
        self.total_crossing(gamma) > 0
    }
}

/// Flips `T̃` at every lift of arc `index` inside a window of the cover and
/// compares the result with the lift of the flipped triangulation. The lift
/// is padded on both sides so that every quadrilateral meeting the central
/// `window` periods is complete; only chords inside the central periods are
/// compared.
pub fn verify_cover_flip(t: &Triangulation, index: usize, window: usize) -> Result<bool, AnnulusError> {
    if window < 2 {
        return Err(AnnulusError::WindowTooSmall { window });
    }
    let annulus = t.annulus();
    let d = annulus.deck_width();
    let flipped = t.flip(index)?.triangulation;
    let reach = t.max_extent().max(flipped.max_extent());
    let pad = 2 + (reach + d - 1) / d;
    let total = window + 2 * pad as usize;
    let (lo, hi) = (pad * d, (pad + window as i64) * d);
    let inside = |a: &ArcLift| {
        let (x, y) = (annulus.abscissa(a.e1), annulus.abscissa(a.e2));
        lo <= x.min(y) && x.max(y) <= hi
    };

    let mut strip: Vec<(usize, ArcLift)> = t.lift(total);
    let targets: Vec<usize> = (0..strip.len()).filter(|&k| strip[k].0 == index).collect();
    for k in targets {
        let chord = strip[k].1;
        if let Some(new_chord) = flip_in_strip(&strip, &chord) {
            strip[k].1 = new_chord;
        }
    }
    let got: BTreeSet<(usize, ArcLift)> = strip.into_iter().filter(|(_, a)| inside(a)).collect();
    let want: BTreeSet<(usize, ArcLift)> = flipped.lift(total).into_iter().filter(|(_, a)| inside(a)).collect();
    Ok(got == want)
}

/// Flip of one chord inside a finite set of chords, or `None` when one of
/// its two triangles is cut off by the edge of the window.
fn flip_in_strip(strip: &[(usize, ArcLift)], chord: &ArcLift) -> Option<ArcLift> {
    let neighbors = |u: Endpoint| -> HashSet<Endpoint> {
        let mut s: HashSet<Endpoint> = [Endpoint::new(u.b, u.pos - 1), Endpoint::new(u.b, u.pos + 1)].into_iter().collect();
        for (_, a) in strip {
            if a == chord {
                continue;
            }
            if a.e1 == u {
                s.insert(a.e2);
            } else if a.e2 == u {
                s.insert(a.e1);
            }
        }
        s
    };
    let (u, v) = if chord.e1.key() < chord.e2.key() { (chord.e1, chord.e2) } else { (chord.e2, chord.e1) };
    let nu = neighbors(u);
    let common: Vec<Endpoint> = neighbors(v).into_iter().filter(|w| nu.contains(w)).collect();
    let inner: Vec<&Endpoint> = common.iter().filter(|w| u.key() < w.key() && w.key() < v.key()).collect();
    let outer: Vec<&Endpoint> = common.iter().filter(|w| !(u.key() < w.key() && w.key() < v.key())).collect();
    match (inner.as_slice(), outer.as_slice()) {
        ([w1], [w2]) => Some(ArcLift::new(**w1, **w2)),
        _ => None,
    }
}

/// Triangulation and seed kept in lockstep: arc `i` carries variable `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArcSeed {
    pub triangulation: Triangulation,
    pub seed: Seed,
}

impl ArcSeed {
    pub fn initial(annulus: MarkedAnnulus) -> Result<Self, AnnulusError> {
        let triangulation = Triangulation::initial(annulus);
        let seed = Seed::initial(triangulation.quiver()?);
        Ok(Self { triangulation, seed })
    }

    pub fn flip(&self, index: usize) -> Result<Self, AnnulusError> {
        Ok(Self { triangulation: self.triangulation.flip(index)?.triangulation, seed: self.seed.mutate(index)? })
    }

    pub fn variable_of(&self, arc: &ArcLift) -> Option<&LaurentPoly> {
        self.triangulation.arc_index(arc).map(|i| &self.seed.cluster()[i])
    }

    /// Flips toward `gamma` until it is an arc of the triangulation; every
    /// flip strictly lowers the total crossing with `gamma`. `choose` picks
    /// one of the admissible flips, listed in preference order.
    pub fn flip_toward(&self, gamma: &ArcLift, choose: &mut dyn FnMut(&[usize]) -> usize) -> Result<(Self, Vec<usize>), AnnulusError> {
        let annulus = self.triangulation.annulus();
        annulus.require_valid(gamma)?;
        let cap = 64 + 4 * self.triangulation.total_crossing(gamma) as usize;
        let mut state = self.clone();
        let mut path = Vec::new();
        while state.triangulation.arc_index(gamma).is_none() {
            if path.len() >= cap {
                return Err(AnnulusError::NonTermination { cap });
            }
            let t = &state.triangulation;
            let before = t.total_crossing(gamma);
            let mut options: Vec<(std::cmp::Reverse<u64>, ArcLift, usize)> = Vec::new();
            for (i, a) in t.arcs().iter().enumerate() {
                let c = annulus.crossing_unchecked(a, gamma);
                if c == 0 {
                    continue;
                }
                let new_arc = t.flip(i)?.new_arc;
                let after = before - c + annulus.crossing_unchecked(&new_arc, gamma);
                if after < before {
                    options.push((std::cmp::Reverse(c), *a, i));
                }
            }
            if options.is_empty() {
                return Err(AnnulusError::NonTermination { cap: path.len() });
            }
            options.sort();
            let order: Vec<usize> = options.iter().map(|o| o.2).collect();
            let pick = order[choose(&order).min(order.len() - 1)];
            state = state.flip(pick)?;
            path.push(pick);
        }
        Ok((state, path))
    }
}

/// Greedy choice: the arc crossing `gamma` most often, ties broken by the
/// smallest canonical arc.
pub fn greedy(_: &[usize]) -> usize {
    0
}

/// The cluster variable of `gamma`, in the coordinates of the initial seed.
pub fn variable_of_arc(gamma: &ArcLift, annulus: MarkedAnnulus) -> Result<LaurentPoly, AnnulusError> {
    let root = ArcSeed::initial(annulus)?;
    let (state, _) = root.flip_toward(gamma, &mut greedy)?;
    Ok(state.variable_of(gamma).expect("flip_toward ends with gamma present").clone())
}

/// Breadth-first enumeration of triangulations together with their seeds,
/// asserting along the way that every arc keeps one variable.
#[derive(Debug, Clone)]
pub struct ArcLabeledGraph {
    pub states: Vec<ArcSeed>,
    pub depths: Vec<usize>,
    pub variable_of: HashMap<ArcLift, LaurentPoly>,
}

impl ArcLabeledGraph {
    pub fn enumerate(annulus: MarkedAnnulus, depth: usize, limit: usize) -> Result<Self, AnnulusError> {
        let root = ArcSeed::initial(annulus)?;
        let mut seen: HashSet<Vec<ArcLift>> = HashSet::from([root.triangulation.arc_set()]);
        let mut g = Self { states: Vec::new(), depths: Vec::new(), variable_of: HashMap::new() };
        let mut queue = VecDeque::from([(root, 0usize)]);
        while let Some((state, d)) = queue.pop_front() {
            g.record(&state)?;
            if d < depth {
                for i in 0..state.triangulation.len() {
                    let next = state.flip(i)?;
                    if seen.insert(next.triangulation.arc_set()) {
                        if seen.len() > limit {
                            return Err(AnnulusError::LimitExceeded { limit });
                        }
                        queue.push_back((next, d + 1));
                    }
                }
            }
            g.states.push(state);
            g.depths.push(d);
        }
        Ok(g)
    }

    fn record(&mut self, state: &ArcSeed) -> Result<(), AnnulusError> {
        for (arc, var) in state.triangulation.arcs().iter().zip(state.seed.cluster()) {
            match self.variable_of.get(arc) {
                Some(known) if known != var => {
                    return Err(AnnulusError::Malformed(format!("arc {arc} reached with two different variables")));
                }
                Some(_) => {}
                None => {
                    self.variable_of.insert(*arc, var.clone());
                }
            }
        }
        Ok(())
    }

    /// Whether distinct arcs received distinct variables.
    pub fn is_injective(&self) -> bool {
        let vars: HashSet<&LaurentPoly> = self.variable_of.values().collect();
        vars.len() == self.variable_of.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::denominator_vector;
    use crate::quiver::TypeLabel;
    use num_bigint::BigInt;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ann(p: u32, q: u32) -> MarkedAnnulus {
        MarkedAnnulus::new(p, q).unwrap()
    }

    /// Brute force crossing count over a wide range of translates.
    fn crossing_oracle(m: &MarkedAnnulus, a: &ArcLift, b: &ArcLift) -> u64 {
        (-60..=60).filter(|&k| interleave(a, &m.translate(b, k))).count() as u64
    }

    #[test]
    fn parameters() {
        assert!(MarkedAnnulus::new(0, 1).is_err());
        assert!(MarkedAnnulus::new(1, 0).is_err());
        assert_eq!(ann(3, 2).deck_width(), 6);
    }

    #[test]
    fn crossing_examples() {
        let c11 = ann(1, 1);
        assert_eq!(c11.crossing_number(&ArcLift::of(0, 0, 1, 0), &ArcLift::of(0, 0, 1, 2)).unwrap(), 1);
        let c32 = ann(3, 2);
        assert_eq!(c32.crossing_number(&ArcLift::of(0, 0, 0, 2), &ArcLift::of(0, 1, 0, 3)).unwrap(), 1);
        let a = ArcLift::of(0, 0, 1, 5);
        assert_eq!(c32.crossing_number(&a, &a).unwrap(), 0);
        assert!(c32.crossing_number(&ArcLift::of(0, 0, 0, 1), &a).is_err());
    }

    #[test]
    fn validity() {
        let m = ann(3, 1);
        assert_eq!(m.check_arc(&ArcLift::of(0, 0, 0, 1)), Err(ArcDefect::BoundarySegment));
        assert_eq!(m.check_arc(&ArcLift::of(0, 0, 0, 5)), Err(ArcDefect::SelfCrossing));
        assert_eq!(m.check_arc(&ArcLift::of(0, 0, 0, 3)), Ok(()));
        assert_eq!(m.check_arc(&ArcLift::of(1, 2, 1, 2)), Err(ArcDefect::Contractible));
        assert_eq!(m.check_arc(&ArcLift::of(0, 0, 2, 1)), Err(ArcDefect::BadBoundary));
        // one marked point on the inner boundary: no peripheral arcs there
        assert_eq!(m.check_arc(&ArcLift::of(1, 0, 1, 2)), Err(ArcDefect::SelfCrossing));
        assert!(m.is_valid_arc(&ArcLift::of(0, 0, 1, -40)));
    }

    #[test]
    fn kinds() {
        assert_eq!(ArcLift::of(0, 0, 1, 0).kind(), ArcKind::Bridging);
        assert_eq!(ArcLift::of(0, 0, 0, 2).kind(), ArcKind::Peripheral(0));
        assert_eq!(ArcLift::of(1, 3, 1, 1).kind(), ArcKind::Peripheral(1));
    }

    #[test]
    fn canonical_forms() {
        let m = ann(3, 2);
        assert_eq!(m.canonical(&ArcLift::of(1, 7, 0, 5)), ArcLift::of(0, 2, 1, 5));
        assert_eq!(m.canonical(&ArcLift::of(1, 7, 1, 5)), ArcLift::of(1, 1, 1, 3));
        assert_eq!(m.canonical(&ArcLift::of(0, -4, 0, -2)), ArcLift::of(0, 2, 0, 4));
    }

    #[test]
    fn crossing_matches_brute_force() {
        for (p, q) in [(1, 1), (2, 1), (3, 2), (4, 2)] {
            let m = ann(p, q);
            let arcs = m.arcs_within(2);
            for a in &arcs {
                for b in &arcs {
                    let c = m.crossing_unchecked(a, b);
                    assert_eq!(c, crossing_oracle(&m, a, b), "{a} {b}");
                    assert_eq!(c, m.crossing_unchecked(b, a));
                }
            }
        }
    }

    #[test]
    fn bridging_crossing_formula() {
        // two bridging lifts cross iff their endpoints are in opposite order
        let m = ann(2, 3);
        let arcs: Vec<ArcLift> = m.arcs_within(2).into_iter().filter(|a| a.kind() == ArcKind::Bridging).collect();
        for a in &arcs {
            for b in &arcs {
                let direct = (-40..=40)
                    .map(|k| m.translate(b, k))
                    .filter(|c| (a.e1.pos - c.e1.pos) * (a.e2.pos - c.e2.pos) < 0)
                    .count() as u64;
                assert_eq!(m.crossing_unchecked(a, b), direct);
            }
        }
    }

    #[test]
    fn peripheral_arcs_of_different_boundaries_never_cross() {
        let m = ann(4, 3);
        let arcs = m.arcs_within(0);
        for a in &arcs {
            for b in &arcs {
                if let (ArcKind::Peripheral(x), ArcKind::Peripheral(y)) = (a.kind(), b.kind()) {
                    if x != y {
                        assert_eq!(m.crossing_unchecked(a, b), 0);
                    }
                }
            }
        }
        assert_eq!(ann(4, 2).max_peripheral_crossing(), 2);
    }

    #[test]
    fn initial_triangulations() {
        let t = Triangulation::initial(ann(1, 1));
        assert_eq!(t.arcs(), &[ArcLift::of(0, 0, 1, 0), ArcLift::of(0, 0, 1, -1)]);
        for p in 1..=4 {
            for q in 1..=4 {
                let t = Triangulation::initial(ann(p, q));
                assert_eq!(t.len(), (p + q) as usize);
                assert_eq!(t.triangles().unwrap().len(), (p + q) as usize);
            }
        }
    }

    #[test]
    fn kronecker_from_c11() {
        let t = Triangulation::initial(ann(1, 1));
        let tris = t.triangles().unwrap();
        assert_eq!(tris.len(), 2);
        for tri in &tris {
            let arcs: BTreeSet<Side> = tri.sides.iter().copied().filter(|s| *s != Side::Boundary).collect();
            assert_eq!(arcs.len(), 2);
            assert_eq!(tri.sides.iter().filter(|s| **s == Side::Boundary).count(), 1);
        }
        let q = t.quiver().unwrap();
        assert!(q.is_isomorphic(&Quiver::tilde_a(1, 1).unwrap()));
    }

    #[test]
    fn initial_quivers_are_tilde_a() {
        for (p, q) in [(2, 1), (3, 2), (2, 2), (3, 1)] {
            let quiver = Triangulation::initial(ann(p, q)).quiver().unwrap();
            assert_eq!(quiver.classify_tilde_a().unwrap(), TypeLabel::TildeA { p: p as usize, q: q as usize });
            assert!(quiver.is_isomorphic(&Quiver::tilde_a(p as usize, q as usize).unwrap()));
        }
    }

    #[test]
    fn every_arc_borders_two_triangles() {
        for t in Triangulation::initial(ann(3, 2)).within_flips(3, 10_000).unwrap() {
            let tris = t.triangles().unwrap();
            assert_eq!(tris.len(), 5);
            for i in 0..t.len() {
                let count: usize = tris.iter().map(|tr| tr.sides.iter().filter(|s| **s == Side::Arc(i)).count()).sum();
                assert_eq!(count, 2);
            }
        }
    }

    #[test]
    fn kronecker_flip() {
        let t = Triangulation::initial(ann(1, 1));
        let f = t.flip(0).unwrap();
        assert_eq!(f.new_arc, ArcLift::of(0, 0, 1, -2));
        assert_eq!(f.sides, [Side::Boundary, Side::Arc(1), Side::Boundary, Side::Arc(1)]);
        assert!(f.triangulation.quiver().unwrap().is_isomorphic(&Quiver::tilde_a(1, 1).unwrap()));
        let back = f.triangulation.flip(0).unwrap();
        assert_eq!(back.triangulation, t);

        let x = |i| LaurentPoly::var(2, i);
        let rel = t.ptolemy_relation(0, &[x(0), x(1)]).unwrap();
        let expected = LaurentPoly::from_terms(2, [(vec![-1, 2], BigInt::from(1)), (vec![-1, 0], BigInt::from(1))]);
        assert_eq!(rel.exchanged().unwrap(), expected);
        assert!(t.ptolemy_relation(0, &[x(0)]).is_err());
        assert!(t.flip(7).is_err());
    }

    #[test]
    fn flips_commute_with_mutation_and_ptolemy_matches_exchange() {
        for (p, q) in [(1, 1), (2, 1), (3, 2)] {
            for t in Triangulation::initial(ann(p, q)).within_flips(3, 10_000).unwrap() {
                let quiver = t.quiver().unwrap();
                let seed = Seed::initial(quiver.clone());
                for i in 0..t.len() {
                    let f = t.flip(i).unwrap();
                    assert_eq!(f.triangulation.quiver().unwrap(), quiver.mutate(i).unwrap());
                    assert_eq!(f.triangulation.flip(i).unwrap().triangulation, t);
                    let rel = t.ptolemy_relation(i, seed.cluster()).unwrap();
                    let (out, inc) = seed.exchange_monomials(i).unwrap();
                    let mut ours = [rel.first.clone(), rel.second.clone()];
                    let mut theirs = [out, inc];
                    ours.sort();
                    theirs.sort();
                    assert_eq!(ours, theirs);
                }
            }
        }
    }

    #[test]
    fn triangulations_are_maximal() {
        let m = ann(2, 2);
        let candidates = m.arcs_within(2);
        for t in Triangulation::initial(m).within_flips(3, 10_000).unwrap() {
            for g in &candidates {
                if t.arc_index(g).is_none() {
                    assert!(t.blocks(g), "{g} extends {:?}", t.arcs());
                }
            }
        }
    }

    #[test]
    fn deck_invariance() {
        let m = ann(3, 2);
        let arcs = m.arcs_within(1);
        for a in arcs.iter().take(12) {
            for b in &arcs {
                for k in [-2, 1, 3] {
                    assert_eq!(m.crossing_unchecked(&m.translate(a, k), &m.translate(b, k)), m.crossing_unchecked(a, b));
                }
            }
        }
    }

    #[test]
    fn lifts_and_cover_flips() {
        let t = Triangulation::initial(ann(1, 1));
        assert_eq!(t.lift(3).len(), 6);
        assert!(verify_cover_flip(&Triangulation::initial(ann(3, 2)), 4, 4).unwrap());
        assert!(verify_cover_flip(&t, 0, 1).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut t = Triangulation::initial(ann(2, 2));
        for _ in 0..10 {
            let i = rng.gen_range(0..t.len());
            assert!(verify_cover_flip(&t, i, 3).unwrap());
            t = t.flip(rng.gen_range(0..t.len())).unwrap().triangulation;
        }
    }

    #[test]
    fn variables_of_arcs() {
        let m = ann(1, 1);
        assert_eq!(variable_of_arc(&ArcLift::of(0, 0, 1, 0), m).unwrap(), LaurentPoly::var(2, 0));
        let v = variable_of_arc(&ArcLift::of(0, 0, 1, 1), m).unwrap();
        let expected = LaurentPoly::from_terms(2, [(vec![2, -1], BigInt::from(1)), (vec![0, -1], BigInt::from(1))]);
        assert_eq!(v, expected);
    }

    #[test]
    fn denominators_record_crossings_with_the_initial_arcs() {
        let m = ann(2, 1);
        let t0 = Triangulation::initial(m);
        for gamma in m.arcs_within(2) {
            if t0.arc_index(&gamma).is_some() {
                continue;
            }
            let den = denominator_vector(&variable_of_arc(&gamma, m).unwrap()).unwrap();
            for (i, a) in t0.arcs().iter().enumerate() {
                assert_eq!(den[i] as u64, m.crossing_unchecked(a, &gamma), "{gamma}");
            }
        }
    }

    #[test]
    fn tie_breaking_does_not_matter() {
        let m = ann(3, 2);
        let root = ArcSeed::initial(m).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for gamma in m.arcs_within(2) {
            let (a, _) = root.flip_toward(&gamma, &mut greedy).unwrap();
            let (b, _) = root.flip_toward(&gamma, &mut |opts: &[usize]| rng.gen_range(0..opts.len())).unwrap();
            assert_eq!(a.variable_of(&gamma), b.variable_of(&gamma));
        }
    }

    #[test]
    fn arc_labels_are_consistent() {
        let g = ArcLabeledGraph::enumerate(ann(2, 1), 4, 10_000).unwrap();
        assert!(g.is_injective());
        assert!(g.states.len() > 10);
    }

    #[test]
    fn json_shapes() {
        let a = ArcLift::of(0, 0, 1, 2);
        assert_eq!(serde_json::to_string(&a).unwrap(), r#"{"e1":{"b":0,"pos":0},"e2":{"b":1,"pos":2}}"#);
        let t = Triangulation::initial(ann(1, 1));
        let s = serde_json::to_string(&t).unwrap();
        assert!(s.starts_with(r#"{"p":1,"q":1,"arcs":["#));
        assert_eq!(serde_json::from_str::<Triangulation>(&s).unwrap(), t);
        let bad = r#"{"p":1,"q":1,"arcs":[{"e1":{"b":0,"pos":0},"e2":{"b":1,"pos":0}}]}"#;
        assert!(serde_json::from_str::<Triangulation>(bad).is_err());
    }
}
