//! Exact integer Laurent polynomials in a fixed number of variables.
//!
//! Every cluster variable in this crate is a [`LaurentPoly`]: a sparse map from
//! exponent vectors (entries may be negative) to nonzero [`BigInt`]
//! coefficients. Terms are kept in a `BTreeMap`, so iteration order is
//! lexicographic on exponent vectors and structural equality is polynomial
//! equality.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Exponents `d_1..d_n` of a Laurent monomial.
pub type ExponentVector = Vec<i32>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LaurentError {
    #[error("arity mismatch: {left} vs {right}")]
    ArityMismatch { left: usize, right: usize },
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("not exactly divisible")]
    NotDivisible,
    #[error("operation undefined on the zero polynomial")]
    ZeroInput,
    #[error("variable index {index} out of range for arity {arity}")]
    IndexOutOfRange { index: usize, arity: usize },
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LaurentPoly {
    arity: usize,
    terms: BTreeMap<ExponentVector, BigInt>,
}

impl LaurentPoly {
    pub fn zero(arity: usize) -> Self {
        Self { arity, terms: BTreeMap::new() }
    }

    pub fn one(arity: usize) -> Self {
        Self::constant(arity, 1)
    }

    pub fn constant(arity: usize, c: impl Into<BigInt>) -> Self {
        Self::monomial(arity, vec![0; arity], c)
    }

    /// The coordinate variable `x_i` (0-based).
    pub fn var(arity: usize, i: usize) -> Self {
        assert!(i < arity, "variable index {i} out of range for arity {arity}");
        let mut e = vec![0; arity];
        e[i] = 1;
        Self::monomial(arity, e, 1)
    }

    pub fn monomial(arity: usize, exponents: ExponentVector, c: impl Into<BigInt>) -> Self {
        assert_eq!(exponents.len(), arity);
        let c = c.into();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(exponents, c);
        }
        Self { arity, terms }
    }

    /// Builds a polynomial from possibly repeated, possibly zero terms.
    pub fn from_terms<I>(arity: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (ExponentVector, BigInt)>,
    {
        let mut out = Self::zero(arity);
        for (e, c) in terms {
            assert_eq!(e.len(), arity);
            out.add_term(e, c);
        }
        out
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ExponentVector, &BigInt)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, e: &[i32]) -> Option<&BigInt> {
        self.terms.get(e)
    }

    /// Exponent vector of the single term, if this is `c * x^e`.
    pub fn as_monomial(&self) -> Option<(&ExponentVector, &BigInt)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    /// True iff this is a single term with coefficient exactly 1.
    pub fn is_unit_monomial(&self) -> bool {
        self.as_monomial().is_some_and(|(_, c)| c.is_one())
    }

    fn add_term(&mut self, e: ExponentVector, c: BigInt) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check_arity(&self, other: &Self) -> Result<(), LaurentError> {
        if self.arity == other.arity {
            Ok(())
        } else {
            Err(LaurentError::ArityMismatch { left: self.arity, right: other.arity })
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, LaurentError> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self, LaurentError> {
        self.check_arity(other)?;
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c);
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self, LaurentError> {
        self.check_arity(other)?;
        let mut out = Self::zero(self.arity);
        // iterate the smaller side in the outer loop
        let (small, large) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        for (ea, ca) in &small.terms {
            for (eb, cb) in &large.terms {
                let e: ExponentVector = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        if c.is_zero() {
            return Self::zero(self.arity);
        }
        Self {
            arity: self.arity,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    /// Multiplies by the monomial `x^shift`.
    pub fn shift(&self, shift: &[i32]) -> Self {
        assert_eq!(shift.len(), self.arity);
        Self {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.iter().zip(shift).map(|(a, b)| a + b).collect(), c.clone()))
                .collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.arity);
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Per-variable minimum exponent; `None` for the zero polynomial.
    pub fn min_exponents(&self) -> Option<ExponentVector> {
        let mut it = self.terms.keys();
        let first = it.next()?.clone();
        Some(it.fold(first, |mut m, e| {
            for (a, b) in m.iter_mut().zip(e) {
                *a = (*a).min(*b);
            }
            m
        }))
    }

    fn max_exponents(&self) -> Option<ExponentVector> {
        let mut it = self.terms.keys();
        let first = it.next()?.clone();
        Some(it.fold(first, |mut m, e| {
            for (a, b) in m.iter_mut().zip(e) {
                *a = (*a).max(*b);
            }
            m
        }))
    }

    /// Exact quotient `self / divisor` in the Laurent ring over the integers.
    ///
    /// Both sides are shifted to polynomials whose minimum exponent in every
    /// variable is zero; the quotient of two such polynomials is again such a
    /// polynomial, found by reduction against the lex-leading term of the
    /// divisor. Any leading term that cannot be cancelled exactly means there is
    /// no Laurent quotient.
    pub fn try_div_exact(&self, divisor: &Self) -> Result<Self, LaurentError> {
        self.check_arity(divisor)?;
        if divisor.is_zero() {
            return Err(LaurentError::DivisionByZero);
        }
        if self.is_zero() {
            return Ok(Self::zero(self.arity));
        }
        if let Some((e, c)) = divisor.as_monomial() {
            if c.abs().is_one() {
                let neg: Vec<i32> = e.iter().map(|x| -x).collect();
                let q = self.shift(&neg);
                return Ok(if c.is_negative() { -q } else { q });
            }
        }
        let sa = self.min_exponents().expect("nonzero");
        let sb = divisor.min_exponents().expect("nonzero");
        let neg = |v: &[i32]| v.iter().map(|x| -x).collect::<Vec<_>>();
        let a = self.shift(&neg(&sa));
        let b = divisor.shift(&neg(&sb));
        let deg_a = a.max_exponents().expect("nonzero");
        let deg_b = b.max_exponents().expect("nonzero");
        let (lead_e, lead_c) = b.terms.iter().next_back().expect("nonzero");

        let mut rem = a;
        let mut quot = Self::zero(self.arity);
        while let Some((re, rc)) = rem.terms.iter().next_back() {
            let qe: ExponentVector = re.iter().zip(lead_e).map(|(x, y)| x - y).collect();
            if qe.iter().zip(deg_a.iter().zip(&deg_b)).any(|(q, (da, db))| *q < 0 || *q > da - db) {
                return Err(LaurentError::NotDivisible);
            }
            if !(rc % lead_c).is_zero() {
                return Err(LaurentError::NotDivisible);
            }
            let qc = rc / lead_c;
            for (e, c) in &b.terms {
                let te: ExponentVector = e.iter().zip(&qe).map(|(x, y)| x + y).collect();
                rem.add_term(te, -(c * &qc));
            }
            quot.add_term(qe, qc);
        }
        let offset: Vec<i32> = sa.iter().zip(&sb).map(|(x, y)| x - y).collect();
        Ok(quot.shift(&offset))
    }

    /// Splits `self` as `numerator / x^d` with `d_i = max(0, -min exponent of x_i)`.
    pub fn reduced_form(&self) -> Result<(Self, Vec<u32>), LaurentError> {
        let mins = self.min_exponents().ok_or(LaurentError::ZeroInput)?;
        let den: Vec<u32> = mins.iter().map(|&m| if m < 0 { (-m) as u32 } else { 0 }).collect();
        let shift: Vec<i32> = den.iter().map(|&d| d as i32).collect();
        Ok((self.shift(&shift), den))
    }

    /// True iff every coefficient of the reduced numerator is positive.
    pub fn has_nonneg_numerator(&self) -> Result<bool, LaurentError> {
        if self.is_zero() {
            return Err(LaurentError::ZeroInput);
        }
        // shifting by a monomial does not touch coefficients
        Ok(self.terms.values().all(|c| c.is_positive()))
    }

    pub fn partial_derivative(&self, i: usize) -> Result<Self, LaurentError> {
        if i >= self.arity {
            return Err(LaurentError::IndexOutOfRange { index: i, arity: self.arity });
        }
        let mut out = Self::zero(self.arity);
        for (e, c) in &self.terms {
            let k = e[i];
            if k == 0 {
                continue;
            }
            let mut ne = e.clone();
            ne[i] -= 1;
            out.add_term(ne, c * BigInt::from(k));
        }
        Ok(out)
    }

    /// Evaluates `self(values[0], .., values[n-1])` as a Laurent polynomial.
    ///
    /// Negative exponents require exact division by the substituted values;
    /// [`LaurentError::NotDivisible`] is returned when the result leaves the
    /// Laurent ring.
    pub fn substitute(&self, values: &[LaurentPoly]) -> Result<Self, LaurentError> {
        if values.len() != self.arity {
            return Err(LaurentError::ArityMismatch { left: self.arity, right: values.len() });
        }
        let target = values.first().map_or(0, |v| v.arity);
        if let Some(v) = values.iter().find(|v| v.arity != target) {
            return Err(LaurentError::ArityMismatch { left: target, right: v.arity });
        }
        if self.is_zero() {
            return Ok(Self::zero(target));
        }
        let (num, den) = self.reduced_form()?;
        let mut powers: Vec<Vec<LaurentPoly>> = values.iter().map(|v| vec![Self::one(v.arity), v.clone()]).collect();
        let mut power = |i: usize, k: usize| -> LaurentPoly {
            while powers[i].len() <= k {
                let next = &powers[i][powers[i].len() - 1] * &values[i];
                powers[i].push(next);
            }
            powers[i][k].clone()
        };
        let mut top = Self::zero(target);
        for (e, c) in &num.terms {
            let mut t = Self::constant(target, c.clone());
            for (i, &k) in e.iter().enumerate() {
                if k > 0 {
                    t = &t * &power(i, k as usize);
                }
            }
            top = &top + &t;
        }
        let mut bottom = Self::one(target);
        for (i, &d) in den.iter().enumerate() {
            if d > 0 {
                bottom = &bottom * &power(i, d as usize);
            }
        }
        top.try_div_exact(&bottom)
    }

    /// Total degree of the reduced numerator, used for compact summaries.
    pub fn max_abs_coefficient(&self) -> BigInt {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_else(BigInt::zero)
    }

    pub fn display_with<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        Named { poly: self, names }
    }

    fn write_named(&self, f: &mut fmt::Formatter<'_>, name: &dyn Fn(usize) -> String) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        // highest term first
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &d)| d != 0)
                .map(|(i, &d)| if d == 1 { name(i) } else { format!("{}^{}", name(i), d) })
                .collect();
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if mono.is_empty() {
                write!(f, "{abs}")?;
            } else {
                if !abs.is_one() {
                    write!(f, "{abs}*")?;
                }
                write!(f, "{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

struct Named<'a> {
    poly: &'a LaurentPoly,
    names: &'a [String],
}

impl fmt::Display for Named<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.poly.write_named(f, &|i| self.names.get(i).cloned().unwrap_or_else(|| format!("x{}", i + 1)))
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_named(f, &|i| format!("x{}", i + 1))
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LaurentPoly[{}]({})", self.arity, self)
    }
}

// Operator forms panic on arity mismatch; the `try_*` methods report it.

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.try_add(rhs).expect("LaurentPoly addition")
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.try_sub(rhs).expect("LaurentPoly subtraction")
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.try_mul(rhs).expect("LaurentPoly multiplication")
    }
}

impl Add for LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: LaurentPoly) -> LaurentPoly {
        &self + &rhs
    }
}

impl Sub for LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: LaurentPoly) -> LaurentPoly {
        &self - &rhs
    }
}

impl Mul for LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: LaurentPoly) -> LaurentPoly {
        &self * &rhs
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            arity: self.arity,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

#[derive(Serialize, Deserialize)]
struct TermJson {
    e: Vec<i32>,
    c: String,
}

#[derive(Serialize, Deserialize)]
struct PolyJson {
    arity: usize,
    terms: Vec<TermJson>,
}

impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyJson {
            arity: self.arity,
            terms: self.terms.iter().map(|(e, c)| TermJson { e: e.clone(), c: c.to_string() }).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = PolyJson::deserialize(d)?;
        let mut out = LaurentPoly::zero(raw.arity);
        for t in raw.terms {
            if t.e.len() != raw.arity {
                return Err(D::Error::custom(format!("exponent vector of length {} in arity {}", t.e.len(), raw.arity)));
            }
            let c: BigInt = t.c.parse().map_err(|_| D::Error::custom(format!("bad coefficient {:?}", t.c)))?;
            out.add_term(t.e, c);
        }
        Ok(out)
    }
}
