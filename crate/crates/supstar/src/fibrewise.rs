//! The fibrewise deformed product: the double sum of Moyal-type pairings
//! through the Poisson tensor on the symmetric factor and Clifford-type
//! pairings through the inverse fibre metric on the `ΛE*` factor, each power
//! weighted by `(iλ/2)^{k+l}/(k! l!)`.
//!
//! Every pairing step removes one symmetric (resp. E) degree from each side
//! and adds one λ-power, so each contribution to `F∘G` has total degree
//! `Deg(F) + Deg(G)`: truncation at `K` is exact for inputs exact at `K`.

use std::collections::BTreeMap;

use crate::error::Error;
use crate::geometry::ChartGeometry;
use crate::scalars::{GaussPoly, GaussRational};
use crate::superalgebra::{merge_masks, remove_front, AlgebraElement, TermKey};

/// One in-flight pair of graded term keys with the accumulated scalar
/// coefficient (pairing tensors, multiplicities, insertion signs).
type PairState = BTreeMap<(TermKey, TermKey), GaussPoly>;

fn add_state(state: &mut PairState, key: (TermKey, TermKey), c: GaussPoly) {
    if c.is_zero() {
        return;
    }
    match state.entry(key) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let s = e.get() + &c;
            if s.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = s;
            }
        }
    }
}

/// One Moyal pairing: `Λ^{ij} i_s(∂_i) ⊗ i_s(∂_j)`.
fn moyal_step(g: &ChartGeometry, state: &PairState) -> PairState {
    let mut out = PairState::new();
    for ((kf, kg), c) in state {
        for i in 0..g.dim {
            if kf.mu[i] == 0 {
                continue;
            }
            for j in 0..g.dim {
                if kg.mu[j] == 0 || g.lambda[i][j].is_zero() {
                    continue;
                }
                let mut nf = kf.clone();
                nf.mu[i] -= 1;
                let mut ng = kg.clone();
                ng.mu[j] -= 1;
                let mult = GaussRational::from_int((kf.mu[i] * kg.mu[j]) as i64);
                let c2 = c
                    .checked_mul(&g.lambda[i][j])
                    .expect("dim")
                    .scale(&mult);
                add_state(&mut out, (nf, ng), c2);
            }
        }
    }
    out
}

/// One Clifford pairing: `q^{AB} j(e_A) ⊗ i(e_B)`.
fn clifford_step(g: &ChartGeometry, state: &PairState) -> PairState {
    let mut out = PairState::new();
    for ((kf, kg), c) in state {
        for a in 0..g.rank {
            let Some((ef, s1)) = remove_front(kf.eset, a) else {
                continue;
            };
            // j(e_A) = P_E ∘ i(e_A)
            let jsign = if ef.count_ones() % 2 == 0 { s1 } else { -s1 };
            for b in 0..g.rank {
                if g.qinv[a][b].is_zero() {
                    continue;
                }
                let Some((eg, s2)) = remove_front(kg.eset, b) else {
                    continue;
                };
                let mut nf = kf.clone();
                nf.eset = ef;
                let mut ng = kg.clone();
                ng.eset = eg;
                let c2 = c
                    .checked_mul(&g.qinv[a][b])
                    .expect("dim")
                    .scale(&GaussRational::from_int((jsign * s2) as i64));
                add_state(&mut out, (nf, ng), c2);
            }
        }
    }
    out
}

/// Assemble the undeformed product of the pair state into `out`, scaled by
/// `(i/2)^{k+l}/(k! l!)` with λ-power raised by `k + l`.
fn assemble(state: &PairState, k: u32, l: u32, out: &mut AlgebraElement) {
    let mut factor = GaussRational::one();
    let half_i = &GaussRational::i() * &GaussRational::from_ratio(1, 2);
    for _ in 0..k + l {
        factor = &factor * &half_i;
    }
    let mut fact = 1i64;
    for m in 1..=k as i64 {
        fact *= m;
    }
    for m in 1..=l as i64 {
        fact *= m;
    }
    factor = &factor * &GaussRational::from_ratio(1, fact);
    for ((kf, kg), c) in state {
        let Some((eset, es)) = merge_masks(kf.eset, kg.eset) else {
            continue;
        };
        let Some((aset, as_)) = merge_masks(kf.aset, kg.aset) else {
            continue;
        };
        let key = TermKey {
            t: kf.t + kg.t + k + l,
            mu: kf.mu.iter().zip(&kg.mu).map(|(a, b)| a + b).collect(),
            eset,
            aset,
        };
        let s = &factor * &GaussRational::from_int((es * as_) as i64);
        out.add_term(key, &c.scale(&s));
    }
}

/// The fibrewise deformed product at an explicit truncation.
pub fn circ_trunc(
    g: &ChartGeometry,
    f: &AlgebraElement,
    h: &AlgebraElement,
    trunc: u32,
) -> Result<AlgebraElement, Error> {
    if f.dim() != g.dim || f.rank() != g.rank {
        return Err(Error::DimensionMismatch { left: f.dim(), right: g.dim });
    }
    if h.dim() != g.dim || h.rank() != g.rank {
        return Err(Error::DimensionMismatch { left: h.dim(), right: g.dim });
    }
    let mut out = AlgebraElement::zero(g.dim, g.rank, trunc);
    // Every pairing step preserves Deg(kf) + Deg(kg) + 2·(steps so far), so
    // pairs over the cap never contribute and are dropped up front.
    let mut base = PairState::new();
    for (kf, cf) in f.terms() {
        for (kg, cg) in h.terms() {
            if kf.total_degree() + kg.total_degree() > trunc {
                continue;
            }
            add_state(&mut base, (kf.clone(), kg.clone()), cf * cg);
        }
    }
    let mut k = 0u32;
    while !base.is_empty() {
        let mut cur = base.clone();
        let mut l = 0u32;
        while !cur.is_empty() {
            assemble(&cur, k, l, &mut out);
            cur = clifford_step(g, &cur);
            l += 1;
        }
        base = moyal_step(g, &base);
        k += 1;
    }
    Ok(out)
}

/// The fibrewise deformed product; result truncation is the shared cap.
pub fn circ(
    g: &ChartGeometry,
    f: &AlgebraElement,
    h: &AlgebraElement,
) -> Result<AlgebraElement, Error> {
    circ_trunc(g, f, h, f.trunc().min(h.trunc()))
}

/// The graded supercommutator `[F,G] = F∘G − (−1)^{d₁d₂+a₁a₂} G∘F`,
/// computed per homogeneous `(E-parity, a-parity)` component.
pub fn supercomm(
    g: &ChartGeometry,
    f: &AlgebraElement,
    h: &AlgebraElement,
) -> Result<AlgebraElement, Error> {
    supercomm_trunc(g, f, h, f.trunc().min(h.trunc()))
}

pub fn supercomm_trunc(
    g: &ChartGeometry,
    f: &AlgebraElement,
    h: &AlgebraElement,
    trunc: u32,
) -> Result<AlgebraElement, Error> {
    let mut out = AlgebraElement::zero(f.dim(), f.rank(), trunc);
    for (pf, fc) in f.parity_components().iter().enumerate() {
        if fc.is_zero() {
            continue;
        }
        let (d1, a1) = (pf as u32 / 2, pf as u32 % 2);
        for (ph, hc) in h.parity_components().iter().enumerate() {
            if hc.is_zero() {
                continue;
            }
            let (d2, a2) = (ph as u32 / 2, ph as u32 % 2);
            let sign = if (d1 * d2 + a1 * a2) % 2 == 0 { 1 } else { -1 };
            let fg = circ_trunc(g, fc, hc, trunc)?;
            let gf = circ_trunc(g, hc, fc, trunc)?;
            out = out.add(&fg.sub(&gf.scale(&GaussRational::from_int(sign))));
        }
    }
    Ok(out)
}

/// `(i/λ) [F,G]`; well defined because the λ⁰ part of the supercommutator
/// cancels by supercommutativity of the undeformed product.
pub fn ad_over_ilambda(
    g: &ChartGeometry,
    f: &AlgebraElement,
    h: &AlgebraElement,
) -> Result<AlgebraElement, Error> {
    ad_over_ilambda_trunc(g, f, h, f.trunc().min(h.trunc()))
}

pub fn ad_over_ilambda_trunc(
    g: &ChartGeometry,
    f: &AlgebraElement,
    h: &AlgebraElement,
    trunc: u32,
) -> Result<AlgebraElement, Error> {
    Ok(supercomm_trunc(g, f, h, trunc)?.div_lambda()?.times_i())
}

/// The formal Clifford product: the Clifford pairings only, on purely
/// E-type elements.
pub fn clifford_mul(
    g: &ChartGeometry,
    phi: &AlgebraElement,
    psi: &AlgebraElement,
) -> Result<AlgebraElement, Error> {
    for (k, _) in phi.terms().chain(psi.terms()) {
        if k.sym_degree() + k.a_degree() != 0 {
            return Err(Error::Setup(
                "clifford_mul requires purely E-type elements".into(),
            ));
        }
    }
    // On E-type inputs the Moyal pairings vanish, so ∘ reduces to the
    // Clifford sum.
    circ(g, phi, psi)
}
