//! The graded Fedosov algebra: formal sums of sections of
//! `∨^s T*M ⊗ ΛE* ⊗ ΛT*M` with polynomial coefficients and powers of the
//! formal parameter λ, truncated by the total degree `Deg = 2t + s + d`.
//!
//! The symmetric factor is an exponent multi-index over the chart
//! coordinates; both Grassmann factors are bitmasks with inversion-count
//! signs. All sign bookkeeping for Grassmann merges lives in
//! [`merge_masks`]; the operator identities (δ² = 0,
//! δδ* + δ*δ = deg_s + deg_a, the supercommutativity law) arbitrate the
//! conventions.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

use crate::error::Error;
use crate::scalars::{Exponents, GaussPoly, GaussRational};

/// Grassmann factors as bitmasks: bit `i` set means basis index `i`
/// (0-based) is present.
pub type Mask = u64;

/// Sign and result of the exterior merge `a ∧ b` of two sorted index sets;
/// `None` on overlap.
pub fn merge_masks(a: Mask, b: Mask) -> Option<(Mask, i32)> {
    if a & b != 0 {
        return None;
    }
    // Count pairs (x in a, y in b) with y < x.
    let mut inversions = 0u32;
    let mut bb = b;
    while bb != 0 {
        let y = bb.trailing_zeros();
        bb &= bb - 1;
        inversions += (a >> (y + 1)).count_ones();
    }
    Some((a | b, if inversions % 2 == 0 { 1 } else { -1 }))
}

/// Sign of front-wedging index `i` into `set`; `None` if already present.
pub fn wedge_front(set: Mask, i: usize) -> Option<(Mask, i32)> {
    let bit = 1u64 << i;
    if set & bit != 0 {
        return None;
    }
    let below = (set & (bit - 1)).count_ones();
    Some((set | bit, if below % 2 == 0 { 1 } else { -1 }))
}

/// Sign of removing index `i` from `set` (front-insertion convention);
/// `None` if absent.
pub fn remove_front(set: Mask, i: usize) -> Option<(Mask, i32)> {
    let bit = 1u64 << i;
    if set & bit == 0 {
        return None;
    }
    let below = (set & (bit - 1)).count_ones();
    Some((set & !bit, if below % 2 == 0 { 1 } else { -1 }))
}

/// The graded part of a term: λ-power, symmetric multi-index, `ΛE*` subset,
/// `ΛT*M` subset.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct TermKey {
    pub t: u32,
    pub mu: Exponents,
    pub eset: Mask,
    pub aset: Mask,
}

impl TermKey {
    pub fn scalar(dim: usize) -> Self {
        TermKey { t: 0, mu: vec![0; dim], eset: 0, aset: 0 }
    }

    pub fn sym_degree(&self) -> u32 {
        self.mu.iter().sum()
    }

    pub fn e_degree(&self) -> u32 {
        self.eset.count_ones()
    }

    pub fn a_degree(&self) -> u32 {
        self.aset.count_ones()
    }

    /// Total degree `Deg = 2 deg_λ + deg_s + deg_E`.
    pub fn total_degree(&self) -> u32 {
        2 * self.t + self.sym_degree() + self.e_degree()
    }
}

/// Which degree map to apply.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum DegreeKind {
    Sym,
    E,
    Antisym,
    Lambda,
    Total,
}

/// A truncated element of the Fedosov algebra: a canonical map from graded
/// term keys to nonzero polynomial coefficients, representing its class
/// modulo terms of total degree above `trunc`.
#[derive(Clone, PartialEq, Eq)]
pub struct AlgebraElement {
    dim: usize,
    rank: usize,
    trunc: u32,
    terms: BTreeMap<TermKey, GaussPoly>,
}

impl AlgebraElement {
    pub fn zero(dim: usize, rank: usize, trunc: u32) -> Self {
        AlgebraElement { dim, rank, trunc, terms: BTreeMap::new() }
    }

    pub fn one(dim: usize, rank: usize, trunc: u32) -> Self {
        let mut e = AlgebraElement::zero(dim, rank, trunc);
        e.add_term(TermKey::scalar(dim), &GaussPoly::one(dim));
        e
    }

    /// A scalar-function element `f ⊗ 1 ⊗ 1`.
    pub fn from_poly(f: &GaussPoly, rank: usize, trunc: u32) -> Self {
        let mut e = AlgebraElement::zero(f.dim(), rank, trunc);
        e.add_term(TermKey::scalar(f.dim()), f);
        e
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&TermKey, &GaussPoly)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, key: &TermKey) -> GaussPoly {
        self.terms
            .get(key)
            .cloned()
            .unwrap_or_else(|| GaussPoly::zero(self.dim))
    }

    /// Change the truncation cap, dropping terms above the new cap.
    pub fn retruncate(&self, trunc: u32) -> AlgebraElement {
        let mut e = AlgebraElement::zero(self.dim, self.rank, trunc);
        for (k, c) in &self.terms {
            e.add_term(k.clone(), c);
        }
        e
    }

    /// Add `c` to the coefficient of `key`; terms of Deg above the
    /// truncation cap are dropped.
    pub fn add_term(&mut self, key: TermKey, c: &GaussPoly) {
        debug_assert_eq!(key.mu.len(), self.dim);
        debug_assert_eq!(c.dim(), self.dim);
        if c.is_zero() || key.total_degree() > self.trunc {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    fn check_compat(&self, other: &AlgebraElement) -> Result<(), Error> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { left: self.dim, right: other.dim });
        }
        if self.rank != other.rank {
            return Err(Error::DimensionMismatch { left: self.rank, right: other.rank });
        }
        Ok(())
    }

    pub fn add(&self, other: &AlgebraElement) -> AlgebraElement {
        self.check_compat(other).expect("incompatible elements");
        let mut e = AlgebraElement::zero(self.dim, self.rank, self.trunc.min(other.trunc));
        for (k, c) in &self.terms {
            e.add_term(k.clone(), c);
        }
        for (k, c) in &other.terms {
            e.add_term(k.clone(), c);
        }
        e
    }

    pub fn sub(&self, other: &AlgebraElement) -> AlgebraElement {
        self.add(&other.scale(&GaussRational::from_int(-1)))
    }

    pub fn scale(&self, c: &GaussRational) -> AlgebraElement {
        let mut e = AlgebraElement::zero(self.dim, self.rank, self.trunc);
        for (k, p) in &self.terms {
            e.add_term(k.clone(), &p.scale(c));
        }
        e
    }

    /// Multiply every coefficient by the central scalar function `f`.
    pub fn scale_poly(&self, f: &GaussPoly) -> AlgebraElement {
        let mut e = AlgebraElement::zero(self.dim, self.rank, self.trunc);
        for (k, p) in &self.terms {
            e.add_term(k.clone(), &(p * f));
        }
        e
    }

    /// The pointwise (undeformed) product. Coefficients multiply, symmetric
    /// multi-indices add, both Grassmann factors merge with their own
    /// exterior sign and no cross-sign between the two factors.
    pub fn undeformed_mul(&self, other: &AlgebraElement) -> Result<AlgebraElement, Error> {
        self.check_compat(other)?;
        let mut e = AlgebraElement::zero(self.dim, self.rank, self.trunc.min(other.trunc));
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let Some((eset, es)) = merge_masks(ka.eset, kb.eset) else {
                    continue;
                };
                let Some((aset, as_)) = merge_masks(ka.aset, kb.aset) else {
                    continue;
                };
                let key = TermKey {
                    t: ka.t + kb.t,
                    mu: ka.mu.iter().zip(&kb.mu).map(|(a, b)| a + b).collect(),
                    eset,
                    aset,
                };
                if key.total_degree() > e.trunc {
                    continue;
                }
                let c = (ca * cb).scale(&GaussRational::from_int((es * as_) as i64));
                e.add_term(key, &c);
            }
        }
        Ok(e)
    }

    /// Scale each term by the eigenvalue of the requested degree map.
    pub fn degree_map(&self, which: DegreeKind) -> AlgebraElement {
        let mut e = AlgebraElement::zero(self.dim, self.rank, self.trunc);
        for (k, c) in &self.terms {
            let eig = match which {
                DegreeKind::Sym => k.sym_degree(),
                DegreeKind::E => k.e_degree(),
                DegreeKind::Antisym => k.a_degree(),
                DegreeKind::Lambda => k.t,
                DegreeKind::Total => k.total_degree(),
            };
            e.add_term(k.clone(), &c.scale(&GaussRational::from_int(eig as i64)));
        }
        e
    }

    /// The E-parity map `(-1)^{deg_E}`.
    pub fn parity_e(&self) -> AlgebraElement {
        let mut e = AlgebraElement::zero(self.dim, self.rank, self.trunc);
        for (k, c) in &self.terms {
            let s = if k.e_degree() % 2 == 0 { 1 } else { -1 };
            e.add_term(k.clone(), &c.scale(&GaussRational::from_int(s)));
        }
        e
    }

    /// The λ-parity map `(-1)^{deg_λ}`.
    pub fn parity_lambda(&self) -> AlgebraElement {
        let mut e = AlgebraElement::zero(self.dim, self.rank, self.trunc);
        for (k, c) in &self.terms {
            let s = if k.t % 2 == 0 { 1 } else { -1 };
            e.add_term(k.clone(), &c.scale(&GaussRational::from_int(s)));
        }
        e
    }

    /// Complex conjugation of sections: coefficients conjugated, λ untouched.
    pub fn conj(&self) -> AlgebraElement {
        let mut e = AlgebraElement::zero(self.dim, self.rank, self.trunc);
        for (k, c) in &self.terms {
            e.add_term(k.clone(), &c.conj());
        }
        e
    }

    /// δ: move one symmetric index (with multiplicity) into the form factor.
    pub fn delta(&self) -> AlgebraElement {
        let mut e = AlgebraElement::zero(self.dim, self.rank, self.trunc);
        for (k, c) in &self.terms {
            for i in 0..self.dim {
                if k.mu[i] == 0 {
                    continue;
                }
                let Some((aset, sign)) = wedge_front(k.aset, i) else {
                    continue;
                };
                let mut mu = k.mu.clone();
                mu[i] -= 1;
                let key = TermKey { t: k.t, mu, eset: k.eset, aset };
                let m = GaussRational::from_int(k.mu[i] as i64 * sign as i64);
                e.add_term(key, &c.scale(&m));
            }
        }
        e
    }

    /// δ*: move one form index into the symmetric factor.
    pub fn delta_star(&self) -> AlgebraElement {
        let mut e = AlgebraElement::zero(self.dim, self.rank, self.trunc);
        for (k, c) in &self.terms {
            for i in 0..self.dim {
                let Some((aset, sign)) = remove_front(k.aset, i) else {
                    continue;
                };
                let mut mu = k.mu.clone();
                mu[i] += 1;
                let key = TermKey { t: k.t, mu, eset: k.eset, aset };
                e.add_term(key, &c.scale(&GaussRational::from_int(sign as i64)));
            }
        }
        e
    }

    /// The δ-homotopy: `(1/(s+a)) δ*` on terms with `s + a ≥ 1`, zero on the
    /// rest.
    pub fn delta_inv(&self) -> AlgebraElement {
        let mut e = AlgebraElement::zero(self.dim, self.rank, self.trunc);
        for (k, c) in &self.terms {
            let sa = k.sym_degree() + k.a_degree();
            if sa == 0 {
                continue;
            }
            let inv = GaussRational::from_ratio(1, sa as i64);
            for i in 0..self.dim {
                let Some((aset, sign)) = remove_front(k.aset, i) else {
                    continue;
                };
                let mut mu = k.mu.clone();
                mu[i] += 1;
                let key = TermKey { t: k.t, mu, eset: k.eset, aset };
                let m = &inv * &GaussRational::from_int(sign as i64);
                e.add_term(key, &c.scale(&m));
            }
        }
        e
    }

    /// Project onto symmetric degree zero.
    pub fn sigma(&self) -> AlgebraElement {
        let mut e = AlgebraElement::zero(self.dim, self.rank, self.trunc);
        for (k, c) in &self.terms {
            if k.sym_degree() == 0 {
                e.add_term(k.clone(), c);
            }
        }
        e
    }

    /// The C-valued variant of σ: symmetric degree zero and antisymmetric
    /// degree zero.
    pub fn sigma_c(&self) -> AlgebraElement {
        let mut e = AlgebraElement::zero(self.dim, self.rank, self.trunc);
        for (k, c) in &self.terms {
            if k.sym_degree() == 0 && k.a_degree() == 0 {
                e.add_term(k.clone(), c);
            }
        }
        e
    }

    /// Projection onto `s + a = 0`.
    pub fn sigma_sa(&self) -> AlgebraElement {
        let mut e = AlgebraElement::zero(self.dim, self.rank, self.trunc);
        for (k, c) in &self.terms {
            if k.sym_degree() + k.a_degree() == 0 {
                e.add_term(k.clone(), c);
            }
        }
        e
    }

    /// `i_s(∂_i)`: symmetric substitution (multiply by the multiplicity,
    /// decrement).
    pub fn insert_sym(&self, i: usize) -> Result<AlgebraElement, Error> {
        if i >= self.dim {
            return Err(Error::IndexOutOfRange { index: i, bound: self.dim });
        }
        let mut e = AlgebraElement::zero(self.dim, self.rank, self.trunc);
        for (k, c) in &self.terms {
            if k.mu[i] == 0 {
                continue;
            }
            let mut mu = k.mu.clone();
            mu[i] -= 1;
            let key = TermKey { t: k.t, mu, eset: k.eset, aset: k.aset };
            e.add_term(key, &c.scale(&GaussRational::from_int(k.mu[i] as i64)));
        }
        Ok(e)
    }

    /// `i(e_A)`: left insertion on the `ΛE*` factor, superderivation of type
    /// `(-1, 0)` — position sign within the E-factor only.
    pub fn insert_e(&self, a: usize) -> Result<AlgebraElement, Error> {
        if a >= self.rank {
            return Err(Error::IndexOutOfRange { index: a, bound: self.rank });
        }
        let mut e = AlgebraElement::zero(self.dim, self.rank, self.trunc);
        for (k, c) in &self.terms {
            let Some((eset, sign)) = remove_front(k.eset, a) else {
                continue;
            };
            let key = TermKey { t: k.t, mu: k.mu.clone(), eset, aset: k.aset };
            e.add_term(key, &c.scale(&GaussRational::from_int(sign as i64)));
        }
        Ok(e)
    }

    /// `j(e_A) = P_E ∘ i(e_A)`: the right insertion.
    pub fn insert_e_right(&self, a: usize) -> Result<AlgebraElement, Error> {
        Ok(self.insert_e(a)?.parity_e())
    }

    /// `i_a(∂_i)`: left insertion on the `ΛT*M` factor, type `(1, -1)` —
    /// position sign within the form factor only.
    pub fn insert_form(&self, i: usize) -> Result<AlgebraElement, Error> {
        if i >= self.dim {
            return Err(Error::IndexOutOfRange { index: i, bound: self.dim });
        }
        let mut e = AlgebraElement::zero(self.dim, self.rank, self.trunc);
        for (k, c) in &self.terms {
            let Some((aset, sign)) = remove_front(k.aset, i) else {
                continue;
            };
            let key = TermKey { t: k.t, mu: k.mu.clone(), eset: k.eset, aset };
            e.add_term(key, &c.scale(&GaussRational::from_int(sign as i64)));
        }
        Ok(e)
    }

    /// The component of total degree `k`.
    pub fn total_degree_component(&self, deg: u32) -> AlgebraElement {
        let mut e = AlgebraElement::zero(self.dim, self.rank, self.trunc);
        for (k, c) in &self.terms {
            if k.total_degree() == deg {
                e.add_term(k.clone(), c);
            }
        }
        e
    }

    /// Split into homogeneous components indexed by
    /// `(deg_E mod 2, deg_a mod 2)` — the data entering the
    /// supercommutativity sign.
    pub fn parity_components(&self) -> [AlgebraElement; 4] {
        let mut out = [
            AlgebraElement::zero(self.dim, self.rank, self.trunc),
            AlgebraElement::zero(self.dim, self.rank, self.trunc),
            AlgebraElement::zero(self.dim, self.rank, self.trunc),
            AlgebraElement::zero(self.dim, self.rank, self.trunc),
        ];
        for (k, c) in &self.terms {
            let idx = (k.e_degree() % 2) * 2 + k.a_degree() % 2;
            out[idx as usize].add_term(k.clone(), c);
        }
        out
    }

    /// Terms with the given (E-degree, a-degree) bidegree selector applied
    /// over all keys matching `f`.
    pub fn filter_terms(&self, f: impl Fn(&TermKey) -> bool) -> AlgebraElement {
        let mut e = AlgebraElement::zero(self.dim, self.rank, self.trunc);
        for (k, c) in &self.terms {
            if f(k) {
                e.add_term(k.clone(), c);
            }
        }
        e
    }

    /// Multiply by the imaginary unit.
    pub fn times_i(&self) -> AlgebraElement {
        self.scale(&GaussRational::i())
    }

    /// Divide by λ; errors if any term has λ-power zero.
    pub fn div_lambda(&self) -> Result<AlgebraElement, Error> {
        let mut e = AlgebraElement::zero(self.dim, self.rank, self.trunc);
        for (k, c) in &self.terms {
            if k.t == 0 {
                return Err(Error::LambdaDivision(format!("{k:?}")));
            }
            let key = TermKey { t: k.t - 1, mu: k.mu.clone(), eset: k.eset, aset: k.aset };
            e.add_term(key, c);
        }
        Ok(e)
    }

    /// Multiply by λ.
    pub fn mul_lambda(&self) -> AlgebraElement {
        let mut e = AlgebraElement::zero(self.dim, self.rank, self.trunc);
        for (k, c) in &self.terms {
            let key = TermKey { t: k.t + 1, mu: k.mu.clone(), eset: k.eset, aset: k.aset };
            e.add_term(key, c);
        }
        e
    }

    /// The coefficient of λ^t, returned with λ-power zero.
    pub fn lambda_component(&self, t: u32) -> AlgebraElement {
        let mut e = AlgebraElement::zero(self.dim, self.rank, self.trunc);
        for (k, c) in &self.terms {
            if k.t == t {
                let key = TermKey { t: 0, mu: k.mu.clone(), eset: k.eset, aset: k.aset };
                e.add_term(key, c);
            }
        }
        e
    }

    /// Drop terms with λ-power above `t`.
    pub fn truncate_lambda(&self, t: u32) -> AlgebraElement {
        self.filter_terms(|k| k.t <= t)
    }

    pub fn max_lambda_power(&self) -> u32 {
        self.terms.keys().map(|k| k.t).max().unwrap_or(0)
    }

    pub fn max_total_degree(&self) -> u32 {
        self.terms.keys().map(|k| k.total_degree()).max().unwrap_or(0)
    }
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in &self.terms {
            if !first {
                writeln!(f)?;
            }
            first = false;
            write!(f, "[{:?}] ", c)?;
            if k.t > 0 {
                write!(f, "λ^{} ", k.t)?;
            }
            for (i, &m) in k.mu.iter().enumerate() {
                if m > 0 {
                    write!(f, "dx{}^∨{} ", i + 1, m)?;
                }
            }
            for a in 0..self.rank {
                if k.eset & (1 << a) != 0 {
                    write!(f, "e^{} ", a + 1)?;
                }
            }
            for i in 0..self.dim {
                if k.aset & (1 << i) != 0 {
                    write!(f, "dx{}∧ ", i + 1)?;
                }
            }
        }
        Ok(())
    }
}

// JSON schema: {trunc, terms: [{t, mu, eset, aset, coeff}]} with eset/aset
// as ascending 1-based index arrays.
#[derive(Serialize, Deserialize)]
struct JsonElementTerm {
    t: u32,
    mu: Vec<u32>,
    eset: Vec<u32>,
    aset: Vec<u32>,
    coeff: serde_json::Value,
}

#[derive(Serialize, Deserialize)]
struct JsonElement {
    trunc: u32,
    terms: Vec<JsonElementTerm>,
}

fn mask_to_indices(mask: Mask) -> Vec<u32> {
    (0..64).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).collect()
}

fn indices_to_mask(ix: &[u32], bound: usize) -> Result<Mask, Error> {
    let mut m = 0u64;
    for &i in ix {
        if i == 0 || i as usize > bound {
            return Err(Error::IndexOutOfRange { index: i as usize, bound });
        }
        let bit = 1u64 << (i - 1);
        if m & bit != 0 {
            return Err(Error::Parse(format!("repeated Grassmann index {i}")));
        }
        m |= bit;
    }
    Ok(m)
}

impl AlgebraElement {
    pub fn to_json(&self) -> serde_json::Value {
        let terms = self
            .terms
            .iter()
            .map(|(k, c)| JsonElementTerm {
                t: k.t,
                mu: k.mu.clone(),
                eset: mask_to_indices(k.eset),
                aset: mask_to_indices(k.aset),
                coeff: serde_json::to_value(c).expect("polynomial serialization"),
            })
            .collect();
        serde_json::to_value(JsonElement { trunc: self.trunc, terms })
            .expect("element serialization")
    }

    pub fn from_json(v: &serde_json::Value, dim: usize, rank: usize) -> Result<Self, Error> {
        let raw: JsonElement = serde_json::from_value(v.clone())
            .map_err(|e| Error::Parse(format!("bad algebra element: {e}")))?;
        let mut out = AlgebraElement::zero(dim, rank, raw.trunc);
        for t in raw.terms {
            if t.mu.len() != dim {
                return Err(Error::Parse(format!(
                    "mu length {} != chart dimension {dim}",
                    t.mu.len()
                )));
            }
            let key = TermKey {
                t: t.t,
                mu: t.mu,
                eset: indices_to_mask(&t.eset, rank)?,
                aset: indices_to_mask(&t.aset, dim)?,
            };
            let coeff = GaussPoly::from_json(&t.coeff, dim)?;
            out.add_term(key, &coeff);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const DIM: usize = 2;
    const RANK: usize = 2;
    const K: u32 = 10;

    fn zero() -> AlgebraElement {
        AlgebraElement::zero(DIM, RANK, K)
    }

    fn term(t: u32, mu: &[u32], eset: &[usize], aset: &[usize]) -> AlgebraElement {
        let mut e = zero();
        let key = TermKey {
            t,
            mu: mu.to_vec(),
            eset: eset.iter().fold(0, |m, &i| m | (1 << i)),
            aset: aset.iter().fold(0, |m, &i| m | (1 << i)),
        };
        e.add_term(key, &GaussPoly::one(DIM));
        e
    }

    #[test]
    fn grassmann_merge_signs() {
        // (e1 dx1)(e2 dx2) = e1∧e2 ⊗ dx1∧dx2
        let a = term(0, &[0, 0], &[0], &[0]);
        let b = term(0, &[0, 0], &[1], &[1]);
        let ab = a.undeformed_mul(&b).unwrap();
        assert_eq!(ab, term(0, &[0, 0], &[0, 1], &[0, 1]));
        // repeated Grassmann index
        let e1 = term(0, &[0, 0], &[0], &[]);
        assert!(e1.undeformed_mul(&e1).unwrap().is_zero());
        // (e2 dx2)(e1 dx1) = (+1) e1∧e2 ⊗ dx1∧dx2: sign (-1)^{1*1+1*1}
        let ba = b.undeformed_mul(&a).unwrap();
        assert_eq!(ba, ab);
    }

    #[test]
    fn degree_maps() {
        let f = term(0, &[0, 0], &[0, 1], &[]);
        assert_eq!(
            f.degree_map(DegreeKind::E),
            f.scale(&GaussRational::from_int(2))
        );
        let g = term(1, &[2, 0], &[0], &[]);
        assert_eq!(
            g.degree_map(DegreeKind::Total),
            g.scale(&GaussRational::from_int(5))
        );
        let h = AlgebraElement::from_poly(&GaussPoly::var(DIM, 0), RANK, K);
        assert!(h.degree_map(DegreeKind::Antisym).is_zero());
    }

    #[test]
    fn parities_and_conj() {
        let e1 = term(0, &[0, 0], &[0], &[]);
        assert_eq!(e1.parity_e(), e1.scale(&GaussRational::from_int(-1)));
        let l2 = term(2, &[0, 0], &[], &[]);
        assert_eq!(l2.parity_lambda(), l2);
        let ie1 = e1.scale(&GaussRational::i());
        assert_eq!(ie1.conj(), ie1.scale(&GaussRational::from_int(-1)));
    }

    #[test]
    fn delta_examples() {
        // δ(dx1 ∨ dx1) = 2 dx1(sym) ⊗ dx1(form)
        let s = term(0, &[2, 0], &[], &[]);
        let expect = term(0, &[1, 0], &[], &[0]).scale(&GaussRational::from_int(2));
        assert_eq!(s.delta(), expect);
        // δ⁻¹(dx1 form) = dx1 sym
        let a = term(0, &[0, 0], &[], &[0]);
        assert_eq!(a.delta_inv(), term(0, &[1, 0], &[], &[]));
        // (δδ* + δ*δ) = (deg_s + deg_a) on dx1∨dx2 ⊗ dx1∧dx2
        let w = term(0, &[1, 1], &[], &[0, 1]);
        let lhs = w.delta_star().delta().add(&w.delta().delta_star());
        assert_eq!(lhs, w.scale(&GaussRational::from_int(4)));
    }

    #[test]
    fn sigma_examples() {
        let f = AlgebraElement::from_poly(&GaussPoly::var(DIM, 0), RANK, K);
        let g = term(0, &[1, 0], &[], &[]).scale_poly(&GaussPoly::var(DIM, 1));
        assert_eq!(f.add(&g).sigma(), f);
        let el = term(1, &[0, 0], &[0, 1], &[]);
        assert_eq!(el.sigma(), el);
        // σ∘δ⁻¹ = 0
        let w = term(0, &[1, 0], &[0], &[1]);
        assert!(w.delta_inv().sigma().is_zero());
    }

    #[test]
    fn insertion_examples() {
        let e12 = term(0, &[0, 0], &[0, 1], &[]);
        assert_eq!(e12.insert_e(0).unwrap(), term(0, &[0, 0], &[1], &[]));
        assert_eq!(
            e12.insert_e(1).unwrap(),
            term(0, &[0, 0], &[0], &[]).scale(&GaussRational::from_int(-1))
        );
        // j(e_1)(e^1) = +1
        let e1 = term(0, &[0, 0], &[0], &[]);
        assert_eq!(e1.insert_e_right(0).unwrap(), AlgebraElement::one(DIM, RANK, K));
        // i_s(∂_1)(dx1∨dx1) = 2 dx1
        let s = term(0, &[2, 0], &[], &[]);
        assert_eq!(
            s.insert_sym(0).unwrap(),
            term(0, &[1, 0], &[], &[]).scale(&GaussRational::from_int(2))
        );
    }

    #[test]
    fn json_roundtrip() {
        let e = term(1, &[1, 0], &[0], &[1])
            .scale_poly(&GaussPoly::var(DIM, 0))
            .add(&term(0, &[0, 2], &[], &[]).scale(&GaussRational::from_ratio(-2, 3)));
        let v = e.to_json();
        let back = AlgebraElement::from_json(&v, DIM, RANK).unwrap();
        assert_eq!(e, back);
    }

    #[test]
    fn truncation_drops_high_degree() {
        let mut e = AlgebraElement::zero(DIM, RANK, 2);
        e.add_term(
            TermKey { t: 2, mu: vec![0, 0], eset: 0, aset: 0 },
            &GaussPoly::one(DIM),
        );
        assert!(e.is_zero());
    }
}
