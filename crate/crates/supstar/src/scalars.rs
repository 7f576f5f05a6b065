//! Exact scalar arithmetic: Gaussian rationals and multivariate polynomials
//! over chart coordinates.
//!
//! Every identity verified by this crate is an exact algebraic identity, so
//! the coefficient ring is `Q[i]` rather than floating point, and smooth
//! functions are modelled as polynomials in the chart coordinates (closed
//! under partial derivatives and products).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use crate::error::Error;

/// A Gaussian rational `re + i*im`, always stored reduced (handled by
/// `BigRational`).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GaussRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        GaussRational { re, im }
    }

    pub fn zero() -> Self {
        GaussRational::new(BigRational::zero(), BigRational::zero())
    }

    pub fn one() -> Self {
        GaussRational::new(BigRational::one(), BigRational::zero())
    }

    /// The imaginary unit.
    pub fn i() -> Self {
        GaussRational::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        GaussRational::new(BigRational::from_integer(BigInt::from(n)), BigRational::zero())
    }

    pub fn from_ratio(p: i64, q: i64) -> Self {
        assert!(q != 0, "zero denominator");
        GaussRational::new(
            BigRational::new(BigInt::from(p), BigInt::from(q)),
            BigRational::zero(),
        )
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// Complex conjugate.
    pub fn conj(&self) -> Self {
        GaussRational::new(self.re.clone(), -self.im.clone())
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self) -> Option<Self> {
        let norm = &self.re * &self.re + &self.im * &self.im;
        if norm.is_zero() {
            return None;
        }
        Some(GaussRational::new(&self.re / &norm, -&self.im / &norm))
    }

    /// Parse a rational from `"p/q"` or `"p"`.
    pub fn parse_rational(s: &str) -> Result<BigRational, Error> {
        let s = s.trim();
        let (p, q) = match s.split_once('/') {
            Some((p, q)) => (p, q),
            None => (s, "1"),
        };
        let p: BigInt = p
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad rational numerator in {s:?}")))?;
        let q: BigInt = q
            .trim()
            .parse()
            .map_err(|_| Error::Parse(format!("bad rational denominator in {s:?}")))?;
        if q.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        Ok(BigRational::new(p, q))
    }
}

pub fn rational_to_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Debug for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for GaussRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_zero() {
            write!(f, "{}", rational_to_string(&self.re))
        } else if self.re.is_zero() {
            write!(f, "{}*i", rational_to_string(&self.im))
        } else if self.im.is_negative() {
            write!(
                f,
                "{}-{}*i",
                rational_to_string(&self.re),
                rational_to_string(&-&self.im)
            )
        } else {
            write!(
                f,
                "{}+{}*i",
                rational_to_string(&self.re),
                rational_to_string(&self.im)
            )
        }
    }
}

impl Add for &GaussRational {
    type Output = GaussRational;
    fn add(self, rhs: &GaussRational) -> GaussRational {
        GaussRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Sub for &GaussRational {
    type Output = GaussRational;
    fn sub(self, rhs: &GaussRational) -> GaussRational {
        GaussRational::new(&self.re - &rhs.re, &self.im - &rhs.im)
    }
}

impl Mul for &GaussRational {
    type Output = GaussRational;
    fn mul(self, rhs: &GaussRational) -> GaussRational {
        GaussRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &GaussRational {
    type Output = GaussRational;
    fn neg(self) -> GaussRational {
        GaussRational::new(-self.re.clone(), -self.im.clone())
    }
}

/// Exponent vector of a monomial; length equals the chart dimension.
pub type Exponents = Vec<u32>;

/// A multivariate polynomial over the chart coordinates with `GaussRational`
/// coefficients. No zero coefficients are stored and every exponent vector
/// has length `dim`.
#[derive(Clone, PartialEq, Eq)]
pub struct GaussPoly {
    dim: usize,
    terms: BTreeMap<Exponents, GaussRational>,
}

impl GaussPoly {
    pub fn zero(dim: usize) -> Self {
        GaussPoly { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: GaussRational) -> Self {
        let mut p = GaussPoly::zero(dim);
        if !c.is_zero() {
            p.terms.insert(vec![0; dim], c);
        }
        p
    }

    pub fn one(dim: usize) -> Self {
        GaussPoly::constant(dim, GaussRational::one())
    }

    /// The coordinate function `x_i` (0-based index).
    pub fn var(dim: usize, i: usize) -> Self {
        assert!(i < dim, "variable index out of range");
        let mut exps = vec![0; dim];
        exps[i] = 1;
        let mut p = GaussPoly::zero(dim);
        p.terms.insert(exps, GaussRational::one());
        p
    }

    pub fn monomial(dim: usize, exps: Exponents, c: GaussRational) -> Self {
        assert_eq!(exps.len(), dim);
        let mut p = GaussPoly::zero(dim);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponents, &GaussRational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Total degree; zero polynomial reports 0.
    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|e| e.iter().sum::<u32>())
            .max()
            .unwrap_or(0)
    }

    pub fn add_term(&mut self, exps: Exponents, c: &GaussRational) {
        assert_eq!(exps.len(), self.dim, "exponent vector length mismatch");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = &*e.get() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn check_dim(&self, other: &GaussPoly) -> Result<(), Error> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &GaussPoly) -> Result<GaussPoly, Error> {
        self.check_dim(other)?;
        let mut r = self.clone();
        for (e, c) in &other.terms {
            r.add_term(e.clone(), c);
        }
        Ok(r)
    }

    pub fn checked_sub(&self, other: &GaussPoly) -> Result<GaussPoly, Error> {
        self.check_dim(other)?;
        let mut r = self.clone();
        for (e, c) in &other.terms {
            r.add_term(e.clone(), &-c);
        }
        Ok(r)
    }

    pub fn checked_mul(&self, other: &GaussPoly) -> Result<GaussPoly, Error> {
        self.check_dim(other)?;
        let mut r = GaussPoly::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let exps: Exponents = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                r.add_term(exps, &(ca * cb));
            }
        }
        Ok(r)
    }

    pub fn scale(&self, c: &GaussRational) -> GaussPoly {
        let mut r = GaussPoly::zero(self.dim);
        if c.is_zero() {
            return r;
        }
        for (e, a) in &self.terms {
            r.add_term(e.clone(), &(a * c));
        }
        r
    }

    /// Exact partial derivative with respect to coordinate `i` (0-based).
    pub fn partial(&self, i: usize) -> Result<GaussPoly, Error> {
        if i >= self.dim {
            return Err(Error::IndexOutOfRange { index: i, bound: self.dim });
        }
        let mut r = GaussPoly::zero(self.dim);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut exps = e.clone();
            exps[i] -= 1;
            let m = GaussRational::from_int(e[i] as i64);
            r.add_term(exps, &(c * &m));
        }
        Ok(r)
    }

    /// Coefficient action of complex conjugation: imaginary parts negated.
    pub fn conj(&self) -> GaussPoly {
        let mut r = GaussPoly::zero(self.dim);
        for (e, c) in &self.terms {
            r.add_term(e.clone(), &c.conj());
        }
        r
    }

    /// Substitute `subs[i]` for coordinate `i`. All `subs` must share one
    /// target dimension.
    pub fn substitute(&self, subs: &[GaussPoly]) -> Result<GaussPoly, Error> {
        if subs.len() != self.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: subs.len() });
        }
        let out_dim = subs.first().map(|p| p.dim).unwrap_or(0);
        let mut r = GaussPoly::zero(out_dim);
        for (e, c) in &self.terms {
            let mut m = GaussPoly::constant(out_dim, c.clone());
            for (i, &k) in e.iter().enumerate() {
                for _ in 0..k {
                    m = m.checked_mul(&subs[i])?;
                }
            }
            r = r.checked_add(&m)?;
        }
        Ok(r)
    }

    /// Evaluate the coefficient of the constant monomial.
    pub fn constant_term(&self) -> GaussRational {
        self.terms
            .get(&vec![0; self.dim])
            .cloned()
            .unwrap_or_else(GaussRational::zero)
    }
}

impl fmt::Debug for GaussPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})")?;
            for (i, &k) in e.iter().enumerate() {
                if k == 1 {
                    write!(f, "*x{}", i + 1)?;
                } else if k > 1 {
                    write!(f, "*x{}^{}", i + 1, k)?;
                }
            }
        }
        Ok(())
    }
}

impl Add for &GaussPoly {
    type Output = GaussPoly;
    fn add(self, rhs: &GaussPoly) -> GaussPoly {
        self.checked_add(rhs).expect("dimension mismatch")
    }
}

impl Sub for &GaussPoly {
    type Output = GaussPoly;
    fn sub(self, rhs: &GaussPoly) -> GaussPoly {
        self.checked_sub(rhs).expect("dimension mismatch")
    }
}

impl Mul for &GaussPoly {
    type Output = GaussPoly;
    fn mul(self, rhs: &GaussPoly) -> GaussPoly {
        self.checked_mul(rhs).expect("dimension mismatch")
    }
}

impl Neg for &GaussPoly {
    type Output = GaussPoly;
    fn neg(self) -> GaussPoly {
        self.scale(&GaussRational::from_int(-1))
    }
}

impl AddAssign<&GaussPoly> for GaussPoly {
    fn add_assign(&mut self, rhs: &GaussPoly) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&GaussPoly> for GaussPoly {
    fn sub_assign(&mut self, rhs: &GaussPoly) {
        *self = &*self - rhs;
    }
}

impl MulAssign<&GaussPoly> for GaussPoly {
    fn mul_assign(&mut self, rhs: &GaussPoly) {
        *self = &*self * rhs;
    }
}

// JSON form: a polynomial is an array of {exps, re, im} objects with the
// rationals rendered as "p/q" strings.
#[derive(Serialize, Deserialize)]
struct JsonTerm {
    exps: Vec<u32>,
    re: String,
    im: String,
}

impl Serialize for GaussPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let terms: Vec<JsonTerm> = self
            .terms
            .iter()
            .map(|(e, c)| JsonTerm {
                exps: e.clone(),
                re: rational_to_string(&c.re),
                im: rational_to_string(&c.im),
            })
            .collect();
        terms.serialize(s)
    }
}

impl GaussPoly {
    /// Deserialize against a known chart dimension.
    pub fn from_json(v: &serde_json::Value, dim: usize) -> Result<GaussPoly, Error> {
        let terms: Vec<JsonTerm> = serde_json::from_value(v.clone())
            .map_err(|e| Error::Parse(format!("bad polynomial: {e}")))?;
        let mut p = GaussPoly::zero(dim);
        for t in terms {
            if t.exps.len() != dim {
                return Err(Error::Parse(format!(
                    "exponent vector length {} != chart dimension {dim}",
                    t.exps.len()
                )));
            }
            let c = GaussRational::new(
                GaussRational::parse_rational(&t.re)?,
                GaussRational::parse_rational(&t.im)?,
            );
            p.add_term(t.exps, &c);
        }
        Ok(p)
    }
}
