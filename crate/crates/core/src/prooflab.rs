//! Mechanical checks of the identities and combinatorics behind the proof that
//! cluster algebras of type Ã are unistructural.
//!
//! There are two layers. Formal chains work over free indeterminates
//! `z1, z2, ..`; primed variables are adjoined as exact Laurent quotients
//! defined by their exchange relations. Geometric checks search a concrete
//! annulus for a triangulation and flip sequence whose Ptolemy relations
//! unify with a list of relation templates, then verify every relation
//! between the actual cluster variables.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::annulus::{self, AnnulusError, ArcKind, ArcLabeledGraph, ArcLift, ArcSeed, MarkedAnnulus, Side, Triangulation};
use crate::engine::{self, EngineError, ExchangeGraph, Seed};
use crate::laurent::{LaurentError, LaurentPoly};
use crate::quiver::{Quiver, QuiverError, TypeLabel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabError {
    #[error("hypothesis does not hold: {0}")]
    HypothesisNotSatisfied(String),
    #[error("side condition violated: x1 x2 is the only term of a sum")]
    SideConditionViolated,
    #[error("both variables lie in the reference cluster although the hypothesis holds")]
    Falsified,
    #[error("{0} is not a Laurent polynomial")]
    NotLaurent(String),
    #[error("no configuration found: {0}")]
    NotFound(String),
    #[error("bad parameters: {0}")]
    BadParameters(String),
    #[error(transparent)]
    Laurent(#[from] LaurentError),
    #[error(transparent)]
    Quiver(#[from] QuiverError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Annulus(#[from] AnnulusError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepCheck {
    pub label: String,
    pub passed: bool,
    /// Normal form of the difference of the two sides; "0" when they agree.
    pub difference: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub name: String,
    pub passed: bool,
    pub witness: String,
    pub steps: Vec<StepCheck>,
    pub context: BTreeMap<String, serde_json::Value>,
    pub notes: Vec<String>,
}

impl IdentityReport {
    fn new(name: &str) -> Self {
        Self { name: name.to_string(), passed: true, witness: String::new(), steps: Vec::new(), context: BTreeMap::new(), notes: Vec::new() }
    }

    fn check(&mut self, label: impl Into<String>, ok: bool, detail: impl Into<String>) {
        let label = label.into();
        let detail = detail.into();
        if !ok && self.passed {
            self.witness = format!("{label}: {detail}");
        }
        self.passed &= ok;
        self.steps.push(StepCheck { label, passed: ok, difference: if ok { "0".into() } else { detail } });
    }

    fn equal(&mut self, label: impl Into<String>, lhs: &LaurentPoly, rhs: &LaurentPoly, names: &[String]) {
        let diff = lhs - rhs;
        let shown = diff.display_with(names).to_string();
        self.check(label, diff.is_zero(), shown);
    }

    fn set(&mut self, key: &str, value: serde_json::Value) {
        self.context.insert(key.to_string(), value);
    }

    fn finish(mut self) -> Self {
        if self.passed && self.witness.is_empty() {
            self.witness = format!("{} checks passed", self.steps.len());
        }
        self
    }
}

impl fmt::Display for IdentityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.name, if self.passed { "PASS" } else { "FAIL" })?;
        for s in &self.steps {
            if s.passed {
                writeln!(f, "  ok   {}", s.label)?;
            } else {
                writeln!(f, "  FAIL {}: {}", s.label, s.difference)?;
            }
        }
        for n in &self.notes {
            writeln!(f, "  note {n}")?;
        }
        Ok(())
    }
}

/// A sum of products of variables with positive integer coefficients, kept
/// symbolically so the side condition of the lemma can be read off.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SumOfProducts {
    pub terms: Vec<(u64, Vec<LaurentPoly>)>,
}

impl SumOfProducts {
    pub fn new(terms: Vec<(u64, Vec<LaurentPoly>)>) -> Self {
        Self { terms }
    }

    pub fn product(factors: Vec<LaurentPoly>) -> Self {
        Self { terms: vec![(1, factors)] }
    }

    pub fn evaluate(&self, arity: usize) -> LaurentPoly {
        let mut acc = LaurentPoly::zero(arity);
        for (c, factors) in &self.terms {
            let mut t = LaurentPoly::constant(arity, *c);
            for f in factors {
                t = &t * f;
            }
            acc = &acc + &t;
        }
        acc
    }

    /// Whether this sum is exactly the single term `x1 x2`.
    fn is_only(&self, x1: &LaurentPoly, x2: &LaurentPoly) -> bool {
        match self.terms.as_slice() {
            [(1, f)] if f.len() == 2 => (f[0] == *x1 && f[1] == *x2) || (f[0] == *x2 && f[1] == *x1),
            _ => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Lemma31Variant {
    /// `x1 x2 = S1`
    A,
    /// `x1 x2 S1 = S1 S2 + S3`
    B,
}

/// If `x1 x2` equals a positive expression as in the variant, at most one of
/// `x1`, `x2` may belong to the reference cluster.
pub fn verify_lemma31(x1: &LaurentPoly, x2: &LaurentPoly, sigmas: &[SumOfProducts], reference: &[LaurentPoly], variant: Lemma31Variant) -> Result<IdentityReport, LabError> {
    let arity = x1.arity();
    let needed = match variant {
        Lemma31Variant::A => 1,
        Lemma31Variant::B => 3,
    };
    if sigmas.len() != needed {
        return Err(LabError::BadParameters(format!("variant {variant:?} takes {needed} sums")));
    }
    if sigmas.iter().any(|s| s.terms.iter().any(|(c, _)| *c == 0)) {
        return Err(LabError::BadParameters("coefficients must be positive".into()));
    }
    if sigmas.iter().any(|s| s.is_only(x1, x2)) {
        return Err(LabError::SideConditionViolated);
    }
    let s: Vec<LaurentPoly> = sigmas.iter().map(|s| s.evaluate(arity)).collect();
    let x1x2 = x1 * x2;
    let (lhs, rhs) = match variant {
        Lemma31Variant::A => (x1x2, s[0].clone()),
        Lemma31Variant::B => (&x1x2 * &s[0], &(&s[0] * &s[1]) + &s[2]),
    };
    if lhs != rhs {
        return Err(LabError::HypothesisNotSatisfied(format!("difference {}", &lhs - &rhs)));
    }
    let in1 = reference.contains(x1);
    let in2 = reference.contains(x2);
    if in1 && in2 {
        return Err(LabError::Falsified);
    }
    let mut report = IdentityReport::new(match variant {
        Lemma31Variant::A => "lemma31-a",
        Lemma31Variant::B => "lemma31-b",
    });
    report.check("hypothesis", true, "");
    report.check("x1 or x2 outside the reference cluster", true, "");
    report.set("x1_in_reference", json!(in1));
    report.set("x2_in_reference", json!(in2));
    Ok(report.finish())
}

/// Both variants of the lemma on standard instances: the Kronecker exchange
/// `x1 x1' = x2^2 + 1` and the last line of the peripheral chain.
pub fn verify_lemma31_examples() -> Result<IdentityReport, LabError> {
    let mut report = IdentityReport::new("lemma31");
    let seed = Seed::initial(Quiver::tilde_a(1, 1)?);
    let (x1, x2) = (seed.cluster()[0].clone(), seed.cluster()[1].clone());
    let mutated = seed.mutate(0)?;
    let x1p = mutated.cluster()[0].clone();
    let sigma = SumOfProducts::new(vec![(1, vec![x2.clone(), x2.clone()]), (1, vec![])]);
    let a = verify_lemma31(&x1, &x1p, &[sigma], mutated.cluster(), Lemma31Variant::A)?;
    report.check("(a) on the Kronecker exchange", a.passed, "");
    let trivial = SumOfProducts::product(vec![x1.clone(), x2.clone()]);
    let guarded = verify_lemma31(&x1, &x2, &[trivial], seed.cluster(), Lemma31Variant::A);
    report.check("x1 x2 = x1 x2 is rejected", guarded.is_err_and(|e| e == LabError::SideConditionViolated), "side condition not enforced");

    let z = free_vars(10);
    let a = case2_primes(&z)?;
    let sigma1 = SumOfProducts::product(vec![a[1].clone(), a[2].clone()]);
    let sigma2 = SumOfProducts::product(vec![z[7].clone(), z[9].clone()]);
    let sigma3 = SumOfProducts::new(
        [
            vec![a[1].clone(), z[4].clone(), z[7].clone(), z[8].clone()],
            vec![a[1].clone(), z[3].clone(), a[4].clone(), z[6].clone()],
            vec![a[3].clone(), z[7].clone(), z[8].clone(), z[10].clone()],
            vec![a[4].clone(), z[6].clone(), z[8].clone(), z[10].clone()],
            vec![a[2].clone(), z[4].clone(), a[5].clone(), z[8].clone()],
        ]
        .into_iter()
        .map(|f| (1, f))
        .collect(),
    );
    let b = verify_lemma31(&z[1], &a[5], &[sigma1, sigma2, sigma3], &z[1..], Lemma31Variant::B)?;
    report.check("(b) on z1 z5' from the peripheral chain", b.passed, "");
    Ok(report.finish())
}

// ---------------------------------------------------------------------------
// formal chains

fn z_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("z{i}")).collect()
}

/// `z[1] ..= z[n]` as coordinate variables; `z[0]` is the constant 1.
fn free_vars(n: usize) -> Vec<LaurentPoly> {
    std::iter::once(LaurentPoly::one(n)).chain((0..n).map(|i| LaurentPoly::var(n, i))).collect()
}

fn quotient(num: LaurentPoly, den: &LaurentPoly, name: &str) -> Result<LaurentPoly, LabError> {
    num.try_div_exact(den).map_err(|e| match e {
        LaurentError::NotDivisible => LabError::NotLaurent(name.to_string()),
        other => other.into(),
    })
}

fn chain_steps(report: &mut IdentityReport, lines: &[(&str, LaurentPoly)], names: &[String]) {
    for w in lines.windows(2) {
        report.equal(format!("{} = {}", w[0].0, w[1].0), &w[0].1, &w[1].1, names);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case2Sums {
    /// `S1 = z2' z4 z5 z8` and `S2 = z1' z3 z4 z6 + ..`, exactly as printed.
    AsPrinted,
    /// `S1 = z2' z4 z5' z8` and `S2 = z1' z3 z4' z6 + ..`, the sums that make
    /// every line of the chain an identity.
    Consistent,
}

/// The primed variables of the peripheral chain, `z1' ..= z5'`.
fn case2_primes(z: &[LaurentPoly]) -> Result<[LaurentPoly; 6], LabError> {
    let a1 = quotient(&(&z[2] * &z[5]) + &(&z[4] * &z[8]), &z[1], "z1'")?;
    let a2 = quotient(&(&a1 * &z[3]) + &(&z[8] * &z[10]), &z[2], "z2'")?;
    let a3 = quotient(&(&a2 * &z[9]) + &(&z[4] * &z[8]), &z[3], "z3'")?;
    let a4 = quotient(&(&a1 * &a3) + &(&a2 * &z[5]), &z[4], "z4'")?;
    let a5 = quotient(&(&a3 * &z[7]) + &(&a4 * &z[6]), &z[5], "z5'")?;
    Ok([LaurentPoly::one(z[1].arity()), a1, a2, a3, a4, a5])
}

fn prod(fs: &[&LaurentPoly]) -> LaurentPoly {
    let mut acc = LaurentPoly::one(fs[0].arity());
    for f in fs {
        acc = &acc * *f;
    }
    acc
}

/// Lines of the peripheral chain and its three sums, over the given values.
fn case2_lines(z: &[LaurentPoly], a: &[LaurentPoly], sums: Case2Sums) -> (Vec<(&'static str, LaurentPoly)>, [LaurentPoly; 3]) {
    let s1 = match sums {
        Case2Sums::AsPrinted => prod(&[&a[2], &z[4], &z[5], &z[8]]),
        Case2Sums::Consistent => prod(&[&a[2], &z[4], &a[5], &z[8]]),
    };
    let first = match sums {
        Case2Sums::AsPrinted => prod(&[&a[1], &z[3], &z[4], &z[6]]),
        Case2Sums::Consistent => prod(&[&a[1], &z[3], &a[4], &z[6]]),
    };
    let s2 = &(&(&first + &prod(&[&a[3], &z[7], &z[8], &z[10]])) + &prod(&[&a[4], &z[6], &z[8], &z[10]])) + &s1;
    let s3 = &prod(&[&a[1], &z[4], &z[7], &z[8]]) + &s2;
    let lines = vec![
        ("z1 z1' z2' z5'", prod(&[&z[1], &a[1], &a[2], &a[5]])),
        ("(z2 z5 + z4 z8) z2' z5'", &(&(&z[2] * &z[5]) + &(&z[4] * &z[8])) * &(&a[2] * &a[5])),
        ("(z2 z2')(z5 z5') + S1", &prod(&[&z[2], &a[2], &z[5], &a[5]]) + &s1),
        ("(z1' z3 + z8 z10)(z3' z7 + z4' z6) + S1", &(&(&(&a[1] * &z[3]) + &(&z[8] * &z[10])) * &(&(&a[3] * &z[7]) + &(&a[4] * &z[6]))) + &s1),
        ("(z3 z3') z1' z7 + S2", &prod(&[&z[3], &a[3], &a[1], &z[7]]) + &s2),
        ("(z2' z9 + z4 z8) z1' z7 + S2", &(&(&(&a[2] * &z[9]) + &(&z[4] * &z[8])) * &(&a[1] * &z[7])) + &s2),
        ("(z1' z2') z7 z9 + S3", &prod(&[&a[1], &a[2], &z[7], &z[9]]) + &s3),
    ];
    (lines, [s1, s2, s3])
}

pub fn verify_case2_formal_with(sums: Case2Sums, boundary_degenerate: bool) -> Result<IdentityReport, LabError> {
    let names = z_names(10);
    let mut z = free_vars(10);
    if boundary_degenerate {
        z[8] = LaurentPoly::one(10);
        z[10] = LaurentPoly::one(10);
    }
    let a = case2_primes(&z)?;
    let (lines, _) = case2_lines(&z, &a, sums);
    let mut report = IdentityReport::new(match (sums, boundary_degenerate) {
        (Case2Sums::AsPrinted, _) => "case2-formal-as-printed",
        (Case2Sums::Consistent, false) => "case2-formal",
        (Case2Sums::Consistent, true) => "case2-formal-z8-z10-boundary",
    });
    chain_steps(&mut report, &lines, &names);
    report.equal("first line = last line", &lines[0].1, &lines[lines.len() - 1].1, &names);
    report.set("sums", json!(sums));
    Ok(report.finish())
}

/// The peripheral chain with the sums that make it an identity. The notes
/// record how the sums as printed fail.
pub fn verify_case2_formal() -> Result<IdentityReport, LabError> {
    let mut report = verify_case2_formal_with(Case2Sums::Consistent, false)?;
    let printed = verify_case2_formal_with(Case2Sums::AsPrinted, false)?;
    for s in printed.steps.iter().filter(|s| !s.passed) {
        report.notes.push(format!("with S1 = z2' z4 z5 z8 and S2 = z1' z3 z4 z6 + ..: step `{}` leaves {}", s.label, s.difference));
    }
    Ok(report)
}

/// The bridging chains for two, three and four crossings.
pub fn verify_case3(n: u32) -> Result<IdentityReport, LabError> {
    if !(2..=4).contains(&n) {
        return Err(LabError::BadParameters(format!("crossing count {n} is not 2, 3 or 4")));
    }
    let names = z_names(8);
    let z = free_vars(8);
    let b1 = quotient(&(&z[2] * &z[3]) + &(&z[4] * &z[6]), &z[1], "z1'")?;
    let b2 = quotient(&(&b1 * &z[5]) + &(&z[3] * &z[6]), &z[2], "z2'")?;
    let b3 = quotient(&b1.pow(2) + &(&b2 * &z[4]), &z[3], "z3'")?;
    let b4 = quotient(&(&b1 * &z[8]) + &(&b3 * &z[7]), &z[4], "z4'")?;
    let mut report = IdentityReport::new(&format!("case3-n{n}"));
    if n == 2 {
        let s1 = prod(&[&z[2], &z[3], &b4]);
        let s2 = &prod(&[&b3, &z[6], &z[7]]) + &s1;
        let lines = [
            ("z1 z1' z4'", prod(&[&z[1], &b1, &b4])),
            ("(z2 z3 + z4 z6) z4'", &(&(&z[2] * &z[3]) + &(&z[4] * &z[6])) * &b4),
            ("(z4 z4') z6 + S1", &prod(&[&z[4], &b4, &z[6]]) + &s1),
            ("(z1' z8 + z3' z7) z6 + S1", &(&(&(&b1 * &z[8]) + &(&b3 * &z[7])) * &z[6]) + &s1),
            ("z1' z6 z8 + S2", &prod(&[&b1, &z[6], &z[8]]) + &s2),
        ];
        chain_steps(&mut report, &lines, &names);
        return Ok(report.finish());
    }
    let c1 = quotient(&(&b2 * &z[7]) + &(&b3 * &b4), &b1, "z1''")?;
    let s4 = prod(&[&c1, &b3, &z[4], &z[6]]);
    let s5 = &prod(&[&c1, &z[2], &b2, &z[4]]) + &s4;
    let s6 = &prod(&[&b1, &z[2], &b2, &z[7]]) + &s5;
    let eq31 = &prod(&[&b1, &b3, &z[2], &b4]) + &s6;
    if n == 3 {
        let lines = [
            ("z1 z1' z3' z1''", prod(&[&z[1], &b1, &b3, &c1])),
            ("(z2 z3 + z4 z6) z3' z1''", &(&(&z[2] * &z[3]) + &(&z[4] * &z[6])) * &(&b3 * &c1)),
            ("(z3 z3') z1'' z2 + S4", &prod(&[&z[3], &b3, &c1, &z[2]]) + &s4),
            ("((z1')^2 + z2' z4) z1'' z2 + S4", &(&(&b1.pow(2) + &(&b2 * &z[4])) * &(&c1 * &z[2])) + &s4),
            ("(z1' z1'') z1' z2 + S5", &prod(&[&b1, &c1, &b1, &z[2]]) + &s5),
            ("(z2' z7 + z3' z4') z1' z2 + S5", &(&(&(&b2 * &z[7]) + &(&b3 * &b4)) * &(&b1 * &z[2])) + &s5),
            ("(z1' z3') z2 z4' + S6", eq31),
        ];
        chain_steps(&mut report, &lines, &names);
        return Ok(report.finish());
    }
    let c3 = quotient(&(&c1 * &z[8]) + &(&b4 * &z[7]), &b3, "z3''")?;
    let c4 = quotient(&c1.pow(2) + &(&b2 * &c3), &b4, "z4''")?;
    let s7 = &prod(&[&b1, &z[2], &b2, &b3, &c3]) + &(&c4 * &s6);
    let lines = [
        ("z1 z1' z3' z1'' z4''", prod(&[&z[1], &b1, &b3, &c1, &c4])),
        ("((z1' z3') z2 z4' + S6) z4''", &eq31 * &c4),
        ("(z4' z4'') z1' z3' z2 + z4'' S6", &prod(&[&b4, &c4, &b1, &b3, &z[2]]) + &(&c4 * &s6)),
        ("((z1'')^2 + z2' z3'') z1' z3' z2 + z4'' S6", &(&(&c1.pow(2) + &(&b2 * &c3)) * &prod(&[&b1, &b3, &z[2]])) + &(&c4 * &s6)),
        ("z1' z3' (z1'')^2 z2 + S7", &prod(&[&b1, &b3, &c1, &c1, &z[2]]) + &s7),
    ];
    chain_steps(&mut report, &lines, &names);
    Ok(report.finish())
}

// ---------------------------------------------------------------------------
// relation templates and their unification against flips

/// A template variable: `z{base}` with `primes` primes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym {
    pub base: u8,
    pub primes: u8,
}

pub const fn sym(base: u8, primes: u8) -> Sym {
    Sym { base, primes }
}

impl Sym {
    pub fn next(self) -> Sym {
        Sym { base: self.base, primes: self.primes + 1 }
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.primes {
            0..=2 => write!(f, "z{}{}", self.base, "'".repeat(self.primes as usize)),
            k => write!(f, "z{}^({k})", self.base),
        }
    }
}

impl Serialize for Sym {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// `flip * flip' = terms[0][0] terms[0][1] + terms[1][0] terms[1][1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Relation {
    pub flip: Sym,
    pub terms: [[Sym; 2]; 2],
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = |p: [Sym; 2]| if p[0] == p[1] { format!("({})^2", p[0]) } else { format!("{} {}", p[0], p[1]) };
        write!(f, "{} {} = {} + {}", self.flip, self.flip.next(), t(self.terms[0]), t(self.terms[1]))
    }
}

const fn rel(flip: Sym, a: Sym, b: Sym, c: Sym, d: Sym) -> Relation {
    Relation { flip, terms: [[a, b], [c, d]] }
}

/// What a template variable stands for: a boundary segment or an arc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Token {
    Boundary,
    Arc(ArcLift),
}

#[derive(Debug, Clone)]
pub struct Pattern {
    pub relations: Vec<Relation>,
    /// Bases whose unprimed symbols must be distinct arcs.
    pub primary: Vec<u8>,
}

#[derive(Debug, Clone)]
pub struct Binding {
    pub tokens: BTreeMap<Sym, Token>,
    pub values: BTreeMap<Sym, LaurentPoly>,
    /// Lockstep states before each flip, then the final one.
    pub states: Vec<ArcSeed>,
    pub flips: Vec<usize>,
}

impl Binding {
    pub fn arc(&self, s: Sym) -> Option<ArcLift> {
        match self.tokens.get(&s) {
            Some(Token::Arc(a)) => Some(*a),
            _ => None,
        }
    }

    pub fn value(&self, s: Sym) -> &LaurentPoly {
        &self.values[&s]
    }

    fn is_rigid(pattern: &Pattern, s: Sym) -> bool {
        s.primes > 0 || pattern.primary.contains(&s.base)
    }

    fn try_bind(&mut self, pattern: &Pattern, s: Sym, token: Token, value: &LaurentPoly) -> bool {
        if let Some(t) = self.tokens.get(&s) {
            return *t == token;
        }
        if Self::is_rigid(pattern, s) {
            if token == Token::Boundary {
                return false;
            }
            if self.tokens.iter().any(|(o, t)| Self::is_rigid(pattern, *o) && *t == token) {
                return false;
            }
        }
        self.tokens.insert(s, token);
        self.values.insert(s, value.clone());
        true
    }
}

fn side_token(t: &Triangulation, seed: &Seed, side: Side) -> (Token, LaurentPoly) {
    match side {
        Side::Boundary => (Token::Boundary, LaurentPoly::one(seed.frame_arity())),
        Side::Arc(j) => (Token::Arc(t.arcs()[j]), seed.cluster()[j].clone()),
    }
}

fn ordered<T>(p: [T; 2], swap: bool) -> [T; 2] {
    let [a, b] = p;
    if swap { [b, a] } else { [a, b] }
}

fn unify_from(state: &ArcSeed, pattern: &Pattern, step: usize, binding: Binding, accept: &dyn Fn(&Binding) -> bool) -> Result<Option<Binding>, LabError> {
    if step == pattern.relations.len() {
        let mut done = binding;
        done.states.push(state.clone());
        return Ok(if accept(&done) { Some(done) } else { None });
    }
    let r = pattern.relations[step];
    let t = &state.triangulation;
    let candidates: Vec<(usize, Binding)> = match binding.tokens.get(&r.flip) {
        Some(Token::Arc(a)) => match t.arc_index(a) {
            Some(i) => vec![(i, binding.clone())],
            None => vec![],
        },
        Some(Token::Boundary) => vec![],
        None => (0..t.len())
            .filter_map(|i| {
                let mut b = binding.clone();
                b.try_bind(pattern, r.flip, Token::Arc(t.arcs()[i]), &state.seed.cluster()[i]).then_some((i, b))
            })
            .collect(),
    };
    for (i, base) in candidates {
        let flip = t.flip(i)?;
        let next = state.flip(i)?;
        let sides: Vec<(Token, LaurentPoly)> = flip.sides.iter().map(|s| side_token(t, &state.seed, *s)).collect();
        // opposite pairs (alpha, delta) and (beta, epsilon)
        let pairs = [[&sides[0], &sides[2]], [&sides[1], &sides[3]]];
        for swap in [false, true] {
            let (p0, p1) = if swap { (pairs[1], pairs[0]) } else { (pairs[0], pairs[1]) };
            for o0 in [false, true] {
                for o1 in [false, true] {
                    let mut b = base.clone();
                    let ok = ordered(p0, o0).iter().zip(r.terms[0]).chain(ordered(p1, o1).iter().zip(r.terms[1])).all(|(tv, s)| b.try_bind(pattern, s, tv.0, &tv.1));
                    if !ok {
                        continue;
                    }
                    let new_sym = r.flip.next();
                    if !b.try_bind(pattern, new_sym, Token::Arc(flip.new_arc), &next.seed.cluster()[i]) {
                        continue;
                    }
                    b.states.push(state.clone());
                    b.flips.push(i);
                    if let Some(found) = unify_from(&next, pattern, step + 1, b, accept)? {
                        return Ok(Some(found));
                    }
                }
            }
        }
    }
    Ok(None)
}

/// First triangulation within `depth` flips of the initial one, in
/// breadth-first order, from which the pattern unifies and `accept` holds.
pub fn find_pattern(annulus: MarkedAnnulus, depth: usize, limit: usize, pattern: &Pattern, accept: &dyn Fn(&Binding) -> bool) -> Result<Option<(usize, Binding)>, LabError> {
    let graph = ArcLabeledGraph::enumerate(annulus, depth, limit)?;
    for (state, d) in graph.states.iter().zip(&graph.depths) {
        let empty = Binding { tokens: BTreeMap::new(), values: BTreeMap::new(), states: Vec::new(), flips: Vec::new() };
        if let Some(b) = unify_from(state, pattern, 0, empty, accept)? {
            return Ok(Some((*d, b)));
        }
    }
    Ok(None)
}

/// Checks every relation of the pattern between the bound variables, and the
/// cover flip identity at each visited triangulation.
fn check_relations(report: &mut IdentityReport, pattern: &Pattern, b: &Binding) -> Result<(), LabError> {
    let names: Vec<String> = (1..=b.values.values().next().map_or(0, |v| v.arity())).map(|i| format!("x{i}")).collect();
    for r in &pattern.relations {
        let lhs = b.value(r.flip) * b.value(r.flip.next());
        let rhs = &(b.value(r.terms[0][0]) * b.value(r.terms[0][1])) + &(b.value(r.terms[1][0]) * b.value(r.terms[1][1]));
        report.equal(r.to_string(), &lhs, &rhs, &names);
    }
    for (state, &i) in b.states.iter().zip(&b.flips) {
        let window = 3;
        report.check(format!("cover flip at arc {}", state.triangulation.arcs()[i]), annulus::verify_cover_flip(&state.triangulation, i, window)?, "lifted flip differs");
    }
    Ok(())
}

fn describe(report: &mut IdentityReport, depth: usize, b: &Binding) {
    let tokens: BTreeMap<String, String> = b
        .tokens
        .iter()
        .map(|(s, t)| {
            (
                s.to_string(),
                match t {
                    Token::Boundary => "boundary".to_string(),
                    Token::Arc(a) => a.to_string(),
                },
            )
        })
        .collect();
    report.set("start_depth", json!(depth));
    report.set("start_triangulation", serde_json::to_value(&b.states[0].triangulation).unwrap_or_default());
    report.set("flips", json!(b.flips));
    report.set("bindings", json!(tokens));
}

fn is_loop(annulus: &MarkedAnnulus, a: &ArcLift) -> bool {
    matches!(a.kind(), ArcKind::Peripheral(bd) if (a.e1.pos - a.e2.pos).abs() == annulus.period(bd))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Case1Variant {
    /// Any peripheral arc crossing a bridging arc once.
    Generic,
    /// Both `z1` and `z2` are boundary segments.
    TwoBoundarySides,
    /// The peripheral arc is a loop at a single marked point.
    Loop,
}

/// A peripheral arc and a bridging arc crossing once are the diagonals of a
/// quadrilateral: `y_i y_j = z1 z3 + z2 z4`.
pub fn verify_case1(p: u32, q: u32, depth: usize, variant: Case1Variant) -> Result<IdentityReport, LabError> {
    if p.max(q) < 2 {
        return Err(LabError::BadParameters("a peripheral arc needs two marked points on one boundary".into()));
    }
    let annulus = MarkedAnnulus::new(p, q)?;
    let yi = sym(0, 0);
    let pattern = Pattern { relations: vec![rel(yi, sym(1, 0), sym(3, 0), sym(2, 0), sym(4, 0))], primary: vec![0] };
    let accept = |b: &Binding| {
        let (Some(gi), Some(gj)) = (b.arc(yi), b.arc(yi.next())) else {
            return false;
        };
        let shape = gi.kind() != ArcKind::Bridging && gj.kind() == ArcKind::Bridging && annulus.crossing_unchecked(&gi, &gj) == 1;
        shape
            && match variant {
                Case1Variant::Generic => true,
                Case1Variant::TwoBoundarySides => b.tokens.get(&sym(1, 0)) == Some(&Token::Boundary) && b.tokens.get(&sym(2, 0)) == Some(&Token::Boundary),
                Case1Variant::Loop => is_loop(&annulus, &gi),
            }
    };
    let (d, b) = find_pattern(annulus, depth, 200_000, &pattern, &accept)?.ok_or_else(|| LabError::NotFound(format!("case 1 ({variant:?}) on C({p},{q}) within {depth} flips")))?;
    let mut report = IdentityReport::new("case1");
    describe(&mut report, d, &b);
    report.set("variant", json!(variant));
    let (gi, gj) = (b.arc(yi).expect("bound"), b.arc(yi.next()).expect("bound"));
    report.check("y_i peripheral, y_j bridging", gi.kind() != ArcKind::Bridging && gj.kind() == ArcKind::Bridging, "kinds differ");
    report.check("arcs cross once", annulus.crossing_number(&gi, &gj)? == 1, "crossing number is not 1");
    check_relations(&mut report, &pattern, &b)?;
    Ok(report.finish())
}

/// The five relations of the peripheral case with two crossings.
pub fn case2_pattern() -> Pattern {
    let z = |i| sym(i, 0);
    let p = |i| sym(i, 1);
    Pattern {
        relations: vec![
            rel(z(1), z(2), z(5), z(4), z(8)),
            rel(z(2), p(1), z(3), z(8), z(10)),
            rel(z(3), p(2), z(9), z(4), z(8)),
            rel(z(4), p(1), p(3), p(2), z(5)),
            rel(z(5), p(3), z(7), p(4), z(6)),
        ],
        primary: vec![1, 2, 3, 4, 5],
    }
}

/// Searches for the five-flip sequence from a peripheral arc `z1` to a
/// peripheral arc `z5'` crossing it twice, verifies the relations between
/// the actual variables, and evaluates the formal chain on them.
pub fn verify_case2_geometric(p: u32, q: u32, depth: usize) -> Result<IdentityReport, LabError> {
    if p.max(q) < 4 {
        return Err(LabError::BadParameters("four distinct endpoints on one boundary need p or q at least 4".into()));
    }
    let annulus = MarkedAnnulus::new(p, q)?;
    let pattern = case2_pattern();
    let accept = |b: &Binding| {
        let (Some(gi), Some(gj)) = (b.arc(sym(1, 0)), b.arc(sym(5, 1))) else {
            return false;
        };
        gi.kind() != ArcKind::Bridging && gj.kind() != ArcKind::Bridging && annulus.crossing_unchecked(&gi, &gj) == 2
    };
    let (d, b) = find_pattern(annulus, depth, 500_000, &pattern, &accept)?.ok_or_else(|| LabError::NotFound(format!("case 2 on C({p},{q}) within {depth} flips")))?;
    let mut report = IdentityReport::new("case2-geometric");
    describe(&mut report, d, &b);
    let (gi, gj) = (b.arc(sym(1, 0)).expect("bound"), b.arc(sym(5, 1)).expect("bound"));
    report.check("peripheral arcs crossing twice", annulus.crossing_number(&gi, &gj)? == 2, "crossing number is not 2");
    let ends: BTreeSet<_> = gi.endpoints().into_iter().chain(gj.endpoints()).map(|e| (e.b, e.pos.rem_euclid(annulus.period(e.b)))).collect();
    report.check("peripheral arcs cross at most twice", annulus.max_peripheral_crossing() <= 2, format!("maximum {}", annulus.max_peripheral_crossing()));
    report.check("four distinct endpoints", ends.len() == 4, format!("{} distinct endpoints", ends.len()));
    check_relations(&mut report, &pattern, &b)?;

    let arity = b.values.values().next().expect("values").arity();
    let z: Vec<LaurentPoly> = (0..=10).map(|i| if i == 0 { LaurentPoly::one(arity) } else { b.value(sym(i as u8, 0)).clone() }).collect();
    let a: Vec<LaurentPoly> = (0..=5).map(|i| if i == 0 { LaurentPoly::one(arity) } else { b.value(sym(i as u8, 1)).clone() }).collect();
    let (lines, _) = case2_lines(&z, &a, Case2Sums::Consistent);
    let names: Vec<String> = (1..=arity).map(|i| format!("x{i}")).collect();
    report.equal("formal chain on the found variables", &lines[0].1, &lines[lines.len() - 1].1, &names);
    Ok(report.finish())
}

/// Relations of the bridging case up to `z1^(k_max)` and `z4^(k_max)`.
pub fn induction_pattern(k_max: u8) -> Pattern {
    let z = |i| sym(i, 0);
    let p = |i| sym(i, 1);
    let pp = |i| sym(i, 2);
    let mut relations = vec![
        rel(z(1), z(2), z(3), z(4), z(6)),
        rel(z(2), p(1), z(5), z(3), z(6)),
        rel(z(3), p(1), p(1), p(2), z(4)),
        rel(z(4), p(1), z(8), p(3), z(7)),
        rel(p(1), p(2), z(7), p(3), p(4)),
        rel(p(3), pp(1), z(8), p(4), z(7)),
        rel(p(4), pp(1), pp(1), p(2), pp(3)),
    ];
    for k in 3..=k_max {
        relations.push(rel(sym(1, k - 1), sym(4, k - 1), sym(4, k - 1), p(2), pp(3)));
        relations.push(rel(sym(4, k - 1), sym(1, k), sym(1, k), p(2), pp(3)));
    }
    Pattern { relations, primary: vec![1, 2, 3, 4] }
}

/// `z1 z1' z3' prod_{k=2}^{j} (z1^(k) z4^(k))` as a product of symbols.
fn induction_prefix(j: u8) -> Vec<Sym> {
    let mut v = vec![sym(1, 0), sym(1, 1), sym(3, 1)];
    for k in 2..=j {
        v.push(sym(1, k));
        v.push(sym(4, k));
    }
    v
}

/// Runs the bridging flip sequence on a concrete annulus in lockstep with
/// the seed: the shape of every exchange relation, the crossing counts
/// `2k - 1` and `2k` with the initial bridging arc, and the two product
/// identities with their residuals built recursively over symbols.
pub fn verify_bridging_induction(p: u32, q: u32, k_max: u8, depth: usize) -> Result<IdentityReport, LabError> {
    if k_max < 3 {
        return Err(LabError::BadParameters("the induction starts at k = 3".into()));
    }
    let annulus = MarkedAnnulus::new(p, q)?;
    let pattern = induction_pattern(k_max);
    let accept = |b: &Binding| b.arc(sym(1, 0)).is_some_and(|a| a.kind() == ArcKind::Bridging);
    let (d, b) = find_pattern(annulus, depth, 200_000, &pattern, &accept)?.ok_or_else(|| LabError::NotFound(format!("bridging setup on C({p},{q}) within {depth} flips")))?;
    let mut report = IdentityReport::new("induction");
    describe(&mut report, d, &b);
    report.set("K", json!(k_max));
    check_relations(&mut report, &pattern, &b)?;

    let gamma = b.arc(sym(1, 0)).expect("bound");
    let cross = |s: Sym| b.arc(s).map(|a| annulus.crossing_unchecked(&gamma, &a));
    report.check("z4' crosses gamma_i twice", cross(sym(4, 1)) == Some(2), format!("{:?}", cross(sym(4, 1))));
    for k in 2..=k_max {
        let c1 = cross(sym(1, k));
        let c4 = cross(sym(4, k));
        report.check(format!("{} crosses gamma_i {} times", sym(1, k), 2 * k - 1), c1 == Some(2 * k as u64 - 1), format!("{c1:?}"));
        report.check(format!("{} crosses gamma_i {} times", sym(4, k), 2 * k), c4 == Some(2 * k as u64), format!("{c4:?}"));
    }

    // symbolic ring over the template variables, all coefficients positive by construction
    let symbols: Vec<Sym> = b.values.keys().copied().collect();
    let index: HashMap<Sym, usize> = symbols.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let ns = symbols.len();
    let s = |x: Sym| LaurentPoly::var(ns, index[&x]);
    let mono = |xs: &[Sym]| xs.iter().fold(LaurentPoly::one(ns), |acc, x| &acc * &s(*x));
    let values: Vec<LaurentPoly> = symbols.iter().map(|x| b.value(*x).clone()).collect();
    let eval = |f: &LaurentPoly| f.substitute(&values);
    let names: Vec<String> = (1..=values[0].arity()).map(|i| format!("x{i}")).collect();
    let (z2, z4, z6, z7) = (sym(2, 0), sym(4, 0), sym(6, 0), sym(7, 0));
    let (a1, a2, a3) = (sym(1, 1), sym(2, 1), sym(3, 1));
    let (c1, c3, c4) = (sym(1, 2), sym(3, 2), sym(4, 2));
    let s4 = mono(&[c1, a3, z4, z6]);
    let s5 = &mono(&[c1, z2, a2, z4]) + &s4;
    let s6 = &mono(&[a1, z2, a2, z7]) + &s5;
    let s7 = &mono(&[a1, z2, a2, a3, c3]) + &(&s(c4) * &s6);
    let mut sigma = s7;
    let mut lhs = mono(&induction_prefix(2));
    let main7 = mono(&[a1, a3, c1, c1, z2]);
    report.equal("z1 z1' z3' z1'' z4'' = z1' z3' (z1'')^2 z2 + S7", &eval(&lhs)?, &eval(&(&main7 + &sigma))?, &names);
    for m in 3..=k_max {
        // first product identity, ending in z1^(m)
        let inner = induction_prefix(m - 1)[3..].to_vec();
        let outer = induction_prefix(m - 2)[3..].to_vec();
        lhs = &lhs * &s(sym(1, m));
        let mut head = vec![a1, a3];
        head.extend(&outer);
        let tail = [head.clone(), vec![sym(1, m - 1), z2, a2, c3]].concat();
        sigma = &(&s(sym(1, m)) * &sigma) + &mono(&tail);
        let main = mono(&[vec![a1, a3], inner.clone(), vec![sym(4, m - 1), z2]].concat());
        report.equal(format!("product identity ending in {} with residual S{}", sym(1, m), 2 * m + 2), &eval(&lhs)?, &eval(&(&main + &sigma))?, &names);
        let residual = eval(&sigma)?;
        report.check(format!("S{} has non-negative coefficients in the initial cluster", 2 * m + 2), residual.has_nonneg_numerator()?, residual.to_string());
        // second product identity, ending in z4^(m)
        lhs = &lhs * &s(sym(4, m));
        let tail = [vec![a1, a3], inner.clone(), vec![z2, a2, c3]].concat();
        sigma = &(&s(sym(4, m)) * &sigma) + &mono(&tail);
        let main = mono(&[vec![a1, a3], inner, vec![sym(1, m), sym(1, m), z2]].concat());
        report.equal(format!("product identity ending in {} with residual S{}", sym(4, m), 2 * m + 3), &eval(&lhs)?, &eval(&(&main + &sigma))?, &names);
        let residual = eval(&sigma)?;
        report.check(format!("S{} has non-negative coefficients in the initial cluster", 2 * m + 3), residual.has_nonneg_numerator()?, residual.to_string());
    }
    report.notes.push("the printed product formulas are read with the square (z4^(m-1))^2 z2 in the first and the factor z2 in the second".into());
    Ok(report.finish())
}

/// A worked exchange on C(3, 2): a bridging arc labeled 4 whose flip is a
/// peripheral arc of the inner boundary, two of whose quadrilateral sides
/// are boundary segments, so that `x4 x4' = x1 + x5`.
#[derive(Debug, Clone)]
pub struct WorkedExample {
    pub triangulation: Triangulation,
    pub seed: Seed,
    pub flipped: Triangulation,
}

pub fn tilde_a32_example() -> Result<WorkedExample, LabError> {
    let annulus = MarkedAnnulus::new(3, 2)?;
    let (x1, x4, x5) = (sym(1, 0), sym(4, 0), sym(5, 0));
    let pattern = Pattern { relations: vec![rel(x4, x1, sym(6, 0), sym(7, 0), x5)], primary: vec![1, 4, 5] };
    let accept = |b: &Binding| {
        b.tokens.get(&sym(6, 0)) == Some(&Token::Boundary)
            && b.tokens.get(&sym(7, 0)) == Some(&Token::Boundary)
            && b.arc(x4).is_some_and(|a| a.kind() == ArcKind::Bridging)
            && b.arc(x4.next()).is_some_and(|a| a.kind() == ArcKind::Peripheral(1))
    };
    let (_, b) = find_pattern(annulus, 4, 100_000, &pattern, &accept)?.ok_or_else(|| LabError::NotFound("worked example on C(3,2)".into()))?;
    let t = &b.states[0].triangulation;
    let pick = |s: Sym| t.arc_index(&b.arc(s).expect("bound")).expect("arc of the start");
    let mut order = vec![pick(x1)];
    let rest: Vec<usize> = (0..t.len()).filter(|i| ![pick(x1), pick(x4), pick(x5)].contains(i)).collect();
    order.extend(rest);
    order.push(pick(x4));
    order.push(pick(x5));
    let triangulation = Triangulation::new(annulus, order.iter().map(|&i| t.arcs()[i]).collect())?;
    let seed = Seed::initial(triangulation.quiver()?);
    let flipped = triangulation.flip(3)?.triangulation;
    Ok(WorkedExample { triangulation, seed, flipped })
}

// ---------------------------------------------------------------------------
// whole-algebra experiments

/// Recovers the quiver of an acyclic seed from its exchange partners.
pub fn verify_quiver_recovery(p: usize, q: usize, depth: usize) -> Result<IdentityReport, LabError> {
    let quiver = Quiver::tilde_a(p, q)?;
    let seed = Seed::initial(quiver.clone());
    let pool = engine::variables_up_to_depth(&seed, depth, 500_000)?;
    let n = seed.rank();
    let mut report = IdentityReport::new("quiver-recovery");
    report.set("p", json!(p));
    report.set("q", json!(q));
    report.set("depth", json!(depth));
    report.set("pool_size", json!(pool.len()));
    report.check("reference quiver is acyclic", quiver.is_acyclic(), "cycle found");
    for i in 0..n {
        let mut unit = vec![0u32; n];
        unit[i] = 1;
        let count = pool.iter().filter(|v| engine::denominator_vector(v).ok().as_ref() == Some(&unit)).count();
        report.check(format!("one variable with denominator z{}", i + 1), count == 1, format!("{count} variables"));
    }
    match engine::infer_exchange_quiver(seed.cluster(), &pool) {
        Ok(r) => {
            report.check("recovered quiver is Q or its opposite", r == quiver || r == quiver.opposite(), format!("{:?}", r.arrows()));
            report.check("recovered quiver has type Ã(p,q)", r.classify_tilde_a()? == TypeLabel::TildeA { p: p.max(q), q: p.min(q) }, "classification differs");
        }
        Err(e) => report.check("exchange quiver inferred", false, e.to_string()),
    }
    Ok(report.finish())
}

fn cluster_key(cluster: &[LaurentPoly]) -> Vec<LaurentPoly> {
    let mut k = cluster.to_vec();
    k.sort();
    k
}

/// All `size`-subsets of `0..n` that are cliques of `adjacent`.
fn cliques(n: usize, size: usize, adjacent: &dyn Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    fn grow(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, adjacent: &dyn Fn(usize, usize) -> bool, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            if cur.iter().all(|&u| adjacent(u, v)) {
                cur.push(v);
                grow(v + 1, n, size, cur, adjacent, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    grow(0, n, size, &mut Vec::new(), adjacent, &mut out);
    out
}

/// Flips from `start` until every arc of `arcs` is present; compatible arcs
/// are never flipped away, so the arcs are reached one after another.
fn flip_to_arcs(start: &ArcSeed, arcs: &[ArcLift]) -> Result<(ArcSeed, usize), LabError> {
    let mut state = start.clone();
    let mut length = 0;
    for a in arcs {
        let (next, path) = state.flip_toward(a, &mut annulus::greedy)?;
        state = next;
        length += path.len();
    }
    Ok((state, length))
}

/// Depth-bounded shadow of unistructurality: every pairwise compatible set of
/// `p + q` variables is a cluster, and re-rooting at another seed reproduces
/// the exchange graph on the common radius.
pub fn unistructurality_experiment(p: u32, q: u32, depth: usize) -> Result<IdentityReport, LabError> {
    let annulus = MarkedAnnulus::new(p, q)?;
    let limit = 500_000;
    let root = ArcSeed::initial(annulus)?;
    let graph = ExchangeGraph::enumerate(&root.seed, depth, limit)?;
    let arcs = ArcLabeledGraph::enumerate(annulus, depth, limit)?;
    let n = annulus.rank();
    let mut report = IdentityReport::new("unistructurality");
    report.set("p", json!(p));
    report.set("q", json!(q));
    report.set("depth", json!(depth));
    report.set("clusters", json!(graph.len()));

    report.check("arcs and variables are in bijection", arcs.is_injective(), "two arcs share a variable");
    let pool = graph.variables();
    let arc_vars: BTreeSet<LaurentPoly> = arcs.variable_of.values().cloned().collect();
    report.check("arc variables = exchange graph variables", arc_vars == pool, format!("{} vs {}", arc_vars.len(), pool.len()));
    report.check("flip graph and exchange graph have equal size", arcs.states.len() == graph.len(), format!("{} vs {}", arcs.states.len(), graph.len()));
    report.set("pool_size", json!(pool.len()));

    let arc_of: HashMap<&LaurentPoly, ArcLift> = arcs.variable_of.iter().map(|(a, v)| (v, *a)).collect();
    let vars: Vec<&LaurentPoly> = pool.iter().collect();
    let pool_arcs: Vec<ArcLift> = vars.iter().map(|v| arc_of[*v]).collect();
    let compatible = |i: usize, j: usize| annulus.crossing_unchecked(&pool_arcs[i], &pool_arcs[j]) == 0;
    let subsets = cliques(vars.len(), n, &compatible);
    let (mut interior, mut exterior, mut failures) = (0usize, 0usize, Vec::new());
    for subset in &subsets {
        let wanted: Vec<ArcLift> = subset.iter().map(|&i| pool_arcs[i]).collect();
        let (state, length) = flip_to_arcs(&root, &wanted)?;
        let expected = cluster_key(&subset.iter().map(|&i| vars[i].clone()).collect::<Vec<_>>());
        if cluster_key(state.seed.cluster()) != expected {
            failures.push(format!("arcs {wanted:?} carry other variables"));
            continue;
        }
        if length <= depth {
            interior += 1;
            if graph.find(&expected).is_none() {
                failures.push(format!("compatible set {wanted:?} at distance {length} is not a cluster"));
            }
        } else {
            exterior += 1;
        }
    }
    let all_clusters_compatible = graph.nodes().iter().all(|node| {
        let a: Vec<ArcLift> = node.seed.cluster().iter().map(|v| arc_of[v]).collect();
        a.iter().all(|x| a.iter().all(|y| annulus.crossing_unchecked(x, y) == 0))
    });
    report.check("every cluster is a compatible set", all_clusters_compatible, "a cluster contains crossing arcs");
    report.check(
        "every interior compatible set is a cluster",
        failures.is_empty(),
        failures.first().cloned().unwrap_or_default(),
    );
    report.set("compatible_sets", json!(subsets.len()));
    report.set("interior_sets", json!(interior));
    report.set("exterior_sets", json!(exterior));

    // re-rooting
    let mut picked = Vec::new();
    for d in 1..=depth.min(3) {
        if let Some(i) = (0..graph.len()).find(|&i| graph.nodes()[i].depth == d) {
            picked.push(i);
        }
    }
    for &y in &picked {
        let dy = graph.nodes()[y].depth;
        let y_seed = &graph.nodes()[y].seed;
        let rerooted = ExchangeGraph::enumerate(&Seed::initial(y_seed.quiver().clone()), depth, limit)?;
        let to_root = |c: &[LaurentPoly]| -> Result<Vec<LaurentPoly>, LabError> { Ok(cluster_key(&c.iter().map(|v| v.substitute(y_seed.cluster())).collect::<Result<Vec<_>, _>>()?)) };
        let mut mapped: HashMap<Vec<LaurentPoly>, usize> = HashMap::new();
        for (i, node) in rerooted.nodes().iter().enumerate() {
            mapped.insert(to_root(node.seed.cluster())?, i);
        }
        let radius = depth - dy;
        let mut ok = true;
        let mut detail = String::new();
        for (i, node) in rerooted.nodes().iter().enumerate() {
            if node.depth <= radius && graph.find(&to_root(node.seed.cluster())?).is_none() {
                ok = false;
                detail = format!("re-rooted cluster {i} missing from the original");
            }
        }
        // anything within `radius` of the root is within `depth` of the new root
        for node in graph.nodes().iter().filter(|n| n.depth <= radius) {
            let Some(&j) = mapped.get(&cluster_key(node.seed.cluster())) else {
                ok = false;
                detail = "original cluster missing after re-rooting".into();
                continue;
            };
            if node.depth + 1 > radius {
                continue;
            }
            let ours: BTreeSet<Vec<LaurentPoly>> = node.neighbors.iter().flatten().map(|&v| cluster_key(graph.nodes()[v].seed.cluster())).collect();
            let theirs: BTreeSet<Vec<LaurentPoly>> = rerooted.nodes()[j].neighbors.iter().flatten().map(|&v| to_root(rerooted.nodes()[v].seed.cluster())).collect::<Result<_, _>>()?;
            if ours != theirs {
                ok = false;
                detail = "neighborhoods differ".into();
            }
        }
        report.check(format!("re-rooted at a seed at distance {dy}"), ok, detail);
    }
    Ok(report.finish())
}

/// Two arcs are compatible exactly when their variables share a cluster,
/// for all arcs met within `depth` flips.
pub fn compatibility_oracle(p: u32, q: u32, depth: usize) -> Result<IdentityReport, LabError> {
    let annulus = MarkedAnnulus::new(p, q)?;
    let root = ArcSeed::initial(annulus)?;
    let labeled = ArcLabeledGraph::enumerate(annulus, depth, 500_000)?;
    let arcs: Vec<ArcLift> = {
        let mut v: Vec<ArcLift> = labeled.variable_of.keys().copied().collect();
        v.sort();
        v
    };
    let mut witnesses = Vec::new();
    let mut longest = 2 * depth;
    for (i, a) in arcs.iter().enumerate() {
        for b in &arcs[i + 1..] {
            if annulus.crossing_unchecked(a, b) == 0 {
                let (state, length) = flip_to_arcs(&root, &[*a, *b])?;
                longest = longest.max(length);
                witnesses.push((*a, *b, cluster_key(state.seed.cluster())));
            }
        }
    }
    let graph = ExchangeGraph::enumerate(&root.seed, longest, 2_000_000)?;
    let mut report = IdentityReport::new("compatibility-oracle");
    report.set("arcs", json!(arcs.len()));
    report.set("graph_depth", json!(longest));
    report.set("clusters", json!(graph.len()));
    let var = |a: &ArcLift| labeled.variable_of[a].clone();
    let mut bad = Vec::new();
    for (a, b, key) in &witnesses {
        if graph.find(key).is_none() || !key.contains(&var(a)) || !key.contains(&var(b)) {
            bad.push(format!("compatible {a} {b} without a common cluster"));
        }
    }
    let clusters: Vec<HashSet<&LaurentPoly>> = graph.nodes().iter().map(|n| n.seed.cluster().iter().collect()).collect();
    let mut crossing_pairs = 0;
    for (i, a) in arcs.iter().enumerate() {
        for b in &arcs[i + 1..] {
            if annulus.crossing_unchecked(a, b) > 0 {
                crossing_pairs += 1;
                let (va, vb) = (var(a), var(b));
                if clusters.iter().any(|c| c.contains(&va) && c.contains(&vb)) {
                    bad.push(format!("crossing {a} {b} share a cluster"));
                }
            }
        }
    }
    report.set("compatible_pairs", json!(witnesses.len()));
    report.set("crossing_pairs", json!(crossing_pairs));
    report.check("crossing number zero iff common cluster", bad.is_empty(), bad.first().cloned().unwrap_or_default());
    Ok(report.finish())
}

/// A triangulation reached by a random walk of up to `steps` flips.
pub fn random_triangulation(annulus: MarkedAnnulus, steps: usize, rng: &mut ChaCha8Rng) -> Result<Triangulation, LabError> {
    let mut t = Triangulation::initial(annulus);
    for _ in 0..rng.gen_range(0..=steps) {
        t = t.flip(rng.gen_range(0..t.len()))?.triangulation;
    }
    Ok(t)
}

pub fn verify_cover_flips(p: u32, q: u32, count: usize, rng_seed: u64) -> Result<IdentityReport, LabError> {
    let annulus = MarkedAnnulus::new(p, q)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut report = IdentityReport::new("cover-flip");
    report.set("p", json!(p));
    report.set("q", json!(q));
    for _ in 0..count {
        let t = random_triangulation(annulus, 8, &mut rng)?;
        let i = rng.gen_range(0..t.len());
        let window = rng.gen_range(2..=4);
        report.check(format!("arc {} of {:?}, window {window}", t.arcs()[i], t.arcs()), annulus::verify_cover_flip(&t, i, window)?, "lifted flip differs");
    }
    Ok(report.finish())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lemma_a_on_kronecker() {
        let seed = Seed::initial(Quiver::tilde_a(1, 1).unwrap());
        let x1 = seed.cluster()[0].clone();
        let x2 = seed.cluster()[1].clone();
        let mutated = seed.mutate(0).unwrap();
        let x1p = mutated.cluster()[0].clone();
        let sigma = SumOfProducts::new(vec![(1, vec![x2.clone(), x2.clone()]), (1, vec![])]);
        let report = verify_lemma31(&x1, &x1p, std::slice::from_ref(&sigma), mutated.cluster(), Lemma31Variant::A).unwrap();
        assert!(report.passed);
        assert_eq!(report.context["x1_in_reference"], json!(false));
        // wrong hypothesis
        let wrong = SumOfProducts::product(vec![x2.clone()]);
        assert!(matches!(verify_lemma31(&x1, &x1p, &[wrong], mutated.cluster(), Lemma31Variant::A), Err(LabError::HypothesisNotSatisfied(_))));
        // degenerate x1 x2 = x1 x2
        let trivial = SumOfProducts::product(vec![x1.clone(), x2.clone()]);
        assert_eq!(verify_lemma31(&x1, &x2, &[trivial], seed.cluster(), Lemma31Variant::A).unwrap_err(), LabError::SideConditionViolated);
    }

    #[test]
    fn lemma_examples() {
        let r = verify_lemma31_examples().unwrap();
        assert!(r.passed, "{r}");
        assert_eq!(r.steps.len(), 3);
    }

    #[test]
    fn formal_chains() {
        let r = verify_case2_formal().unwrap();
        assert!(r.passed, "{r}");
        assert!(!r.notes.is_empty());
        assert!(!verify_case2_formal_with(Case2Sums::AsPrinted, false).unwrap().passed);
        assert!(verify_case2_formal_with(Case2Sums::Consistent, true).unwrap().passed);
        for n in 2..=4 {
            let r = verify_case3(n).unwrap();
            assert!(r.passed, "{r}");
        }
        assert!(verify_case3(5).is_err());
    }

    #[test]
    fn primes_are_laurent() {
        let z = free_vars(10);
        let a = case2_primes(&z).unwrap();
        // z1' is (z2 z5 + z4 z8) / z1, by hand
        let expected = (&(&z[2] * &z[5]) + &(&z[4] * &z[8])).shift(&[-1, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(a[1], expected);
    }

    #[test]
    fn symbols_print() {
        assert_eq!(sym(1, 0).to_string(), "z1");
        assert_eq!(sym(3, 2).to_string(), "z3''");
        assert_eq!(sym(4, 5).to_string(), "z4^(5)");
        assert_eq!(rel(sym(3, 0), sym(1, 1), sym(1, 1), sym(2, 1), sym(4, 0)).to_string(), "z3 z3' = (z1')^2 + z2' z4");
    }

    #[test]
    fn worked_example() {
        let ex = tilde_a32_example().unwrap();
        let x = |i: usize| LaurentPoly::var(5, i);
        let mutated = ex.seed.mutate(3).unwrap();
        assert_eq!(&mutated.cluster()[3] * &x(3), &x(0) + &x(4));
        assert_eq!(ex.triangulation.arcs()[3].kind(), ArcKind::Bridging);
        assert_eq!(ex.flipped.arcs()[3].kind(), ArcKind::Peripheral(1));
        assert_eq!(ex.seed.quiver().classify_tilde_a().unwrap(), TypeLabel::TildeA { p: 3, q: 2 });
    }

    #[test]
    fn case1_variants() {
        assert!(verify_case1(2, 1, 3, Case1Variant::Generic).unwrap().passed);
        assert!(verify_case1(3, 2, 4, Case1Variant::TwoBoundarySides).unwrap().passed);
        assert!(verify_case1(1, 2, 4, Case1Variant::Loop).unwrap().passed);
        assert!(verify_case1(1, 1, 2, Case1Variant::Generic).is_err());
    }

    #[test]
    fn quiver_recovery_small() {
        assert!(verify_quiver_recovery(1, 1, 3).unwrap().passed);
        assert!(verify_quiver_recovery(2, 1, 3).unwrap().passed);
    }

    #[test]
    fn cliques_of_a_path() {
        let adj = |a: usize, b: usize| a.abs_diff(b) == 1;
        assert_eq!(cliques(4, 2, &adj), vec![vec![0, 1], vec![1, 2], vec![2, 3]]);
        assert!(cliques(4, 3, &adj).is_empty());
    }
}
