//! Exact scalar rings used as coefficients of tautological classes.
//!
//! Two rings ship: plain rationals and [`PhiScalar`], Laurent polynomials in
//! `u = φ^{1/4}` with rational coefficients. Every algorithm in the crate is
//! generic over [`Scalar`].

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = num_rational::BigRational;

/// Builds the rational `p/q`.
pub fn rat(p: i64, q: i64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

pub fn rat_int(p: i64) -> Rational {
    Rational::from_integer(BigInt::from(p))
}

pub fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Parses `p`, `-p` or `p/q`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(Rational::new(p, q))
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

/// A commutative coefficient ring containing the rationals.
pub trait Scalar:
    Clone + PartialEq + Zero + One + fmt::Debug + fmt::Display + Send + Sync + 'static
{
    fn from_rational(q: Rational) -> Self;
    fn add_to(&mut self, rhs: &Self);
    fn times(&self, rhs: &Self) -> Self;
    fn negated(&self) -> Self;
    fn scaled(&self, q: &Rational) -> Self;
    fn parse_scalar(s: &str) -> Option<Self>;

    fn plus(&self, rhs: &Self) -> Self {
        let mut out = self.clone();
        out.add_to(rhs);
        out
    }

    fn minus(&self, rhs: &Self) -> Self {
        self.plus(&rhs.negated())
    }

    fn from_int(k: i64) -> Self {
        Self::from_rational(rat_int(k))
    }
}

impl Scalar for Rational {
    fn from_rational(q: Rational) -> Self {
        q
    }
    fn add_to(&mut self, rhs: &Self) {
        *self += rhs;
    }
    fn times(&self, rhs: &Self) -> Self {
        self * rhs
    }
    fn negated(&self) -> Self {
        -self
    }
    fn scaled(&self, q: &Rational) -> Self {
        self * q
    }
    fn parse_scalar(s: &str) -> Option<Self> {
        parse_rational(s)
    }
}

/// Finite Laurent polynomial `Σ c_k u^k` with `u = φ^{1/4}`.
///
/// Exponents are stored in quarters of a power of φ; no zero coefficient is
/// ever stored.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct PhiScalar {
    terms: BTreeMap<i32, Rational>,
}

impl PhiScalar {
    /// `c · φ^{quarters/4}`.
    pub fn monomial(c: Rational, quarters: i32) -> Self {
        let mut terms = BTreeMap::new();
        if !Zero::is_zero(&c) {
            terms.insert(quarters, c);
        }
        PhiScalar { terms }
    }

    /// `φ^{quarters/4}`.
    pub fn phi_pow(quarters: i32) -> Self {
        Self::monomial(Rational::one(), quarters)
    }

    pub fn terms(&self) -> impl Iterator<Item = (i32, &Rational)> {
        self.terms.iter().map(|(k, v)| (*k, v))
    }

    /// Coefficient of `φ^{quarters/4}`.
    pub fn coeff(&self, quarters: i32) -> Rational {
        self.terms.get(&quarters).cloned().unwrap_or_else(Zero::zero)
    }

    /// Multiplies by `φ^{quarters/4}`.
    pub fn shift(&self, quarters: i32) -> Self {
        PhiScalar {
            terms: self.terms.iter().map(|(k, v)| (k + quarters, v.clone())).collect(),
        }
    }

    /// Inverse of a single monomial; `None` otherwise.
    pub fn monomial_inverse(&self) -> Option<Self> {
        if self.terms.len() != 1 {
            return None;
        }
        let (k, c) = self.terms.iter().next()?;
        Some(Self::monomial(c.recip(), -k))
    }

    /// Evaluates at a rational φ. Returns `None` when a surviving exponent is
    /// not an integer power of φ.
    pub fn specialize(&self, phi: &Rational) -> Option<Rational> {
        let mut acc = Rational::zero();
        for (k, c) in &self.terms {
            if k % 4 != 0 {
                return None;
            }
            let e = k / 4;
            let p = if e >= 0 {
                num_traits::pow(phi.clone(), e as usize)
            } else {
                if Zero::is_zero(phi) {
                    return None;
                }
                num_traits::pow(phi.recip(), (-e) as usize)
            };
            acc += c * p;
        }
        Some(acc)
    }

    pub fn as_rational(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => self.terms.get(&0).cloned(),
            _ => None,
        }
    }
}

impl std::ops::Add for PhiScalar {
    type Output = PhiScalar;
    fn add(mut self, rhs: PhiScalar) -> PhiScalar {
        self.add_to(&rhs);
        self
    }
}

impl std::ops::Mul for PhiScalar {
    type Output = PhiScalar;
    fn mul(self, rhs: PhiScalar) -> PhiScalar {
        self.times(&rhs)
    }
}

impl Zero for PhiScalar {
    fn zero() -> Self {
        PhiScalar::default()
    }
    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
}

impl One for PhiScalar {
    fn one() -> Self {
        PhiScalar::phi_pow(0)
    }
}

impl Scalar for PhiScalar {
    fn from_rational(q: Rational) -> Self {
        PhiScalar::monomial(q, 0)
    }
    fn add_to(&mut self, rhs: &Self) {
        for (k, v) in &rhs.terms {
            let entry = self.terms.entry(*k).or_insert_with(Zero::zero);
            *entry += v;
            if Zero::is_zero(entry) {
                self.terms.remove(k);
            }
        }
    }
    fn times(&self, rhs: &Self) -> Self {
        let mut out = PhiScalar::default();
        for (k1, v1) in &self.terms {
            for (k2, v2) in &rhs.terms {
                let entry = out.terms.entry(k1 + k2).or_insert_with(Zero::zero);
                *entry += v1 * v2;
            }
        }
        out.terms.retain(|_, v| !Zero::is_zero(v));
        out
    }
    fn negated(&self) -> Self {
        PhiScalar {
            terms: self.terms.iter().map(|(k, v)| (*k, -v)).collect(),
        }
    }
    fn scaled(&self, q: &Rational) -> Self {
        if Zero::is_zero(q) {
            return PhiScalar::default();
        }
        PhiScalar {
            terms: self.terms.iter().map(|(k, v)| (*k, v * q)).collect(),
        }
    }
    fn parse_scalar(s: &str) -> Option<Self> {
        let s = s.trim();
        if s == "0" {
            return Some(PhiScalar::default());
        }
        let inner = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')).unwrap_or(s);
        let mut out = PhiScalar::default();
        for term in inner.split(" + ") {
            let (c, q) = match term.split_once("*phi^") {
                Some((c, e)) => {
                    let e = parse_rational(e.trim_start_matches('(').trim_end_matches(')'))?;
                    let quarters = e * rat_int(4);
                    if !quarters.is_integer() {
                        return None;
                    }
                    (parse_rational(c)?, quarters.to_integer().to_i32()?)
                }
                None => (parse_rational(term)?, 0),
            };
            out.add_to(&PhiScalar::monomial(c, q));
        }
        Some(out)
    }
}

impl fmt::Display for PhiScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, c)| {
                if *k == 0 {
                    format!("{c}")
                } else {
                    let e = rat(*k as i64, 4);
                    if e.is_integer() {
                        format!("{c}*phi^{}", e.to_integer())
                    } else {
                        format!("{c}*phi^({e})")
                    }
                }
            })
            .collect();
        if parts.len() == 1 {
            write!(f, "{}", parts[0])
        } else {
            write!(f, "({})", parts.join(" + "))
        }
    }
}

impl fmt::Debug for PhiScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Clears denominators of a rational vector; returns the integer vector.
pub fn clear_denominators(row: &[Rational]) -> Vec<BigInt> {
    let lcm = row
        .iter()
        .fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
    row.iter()
        .map(|q| (q * Rational::from_integer(lcm.clone())).to_integer())
        .collect()
}

pub fn abs_rational(q: &Rational) -> Rational {
    q.abs()
}
