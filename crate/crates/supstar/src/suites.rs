//! Seeded property suites over a chart: the graded-algebra identities, the
//! curvature identities, and the flatness/Taylor/star identities. Each
//! suite returns a `Report`; the CLI `check` command and the acceptance
//! tests both run through these.

use crate::error::Error;
use crate::fedosov::FedosovState;
use crate::fibrewise::{ad_over_ilambda, circ_trunc};
use crate::geometry::ChartGeometry;
use crate::report::Report;
use crate::sample::{ElementShape, Sampler};
use crate::superalgebra::AlgebraElement;

/// Graded-algebra identities on random elements: `δ² = 0`, `(δ*)² = 0`,
/// the Hodge-type relation `δδ* + δ*δ = deg_s + deg_a`, the decomposition
/// `δδ⁻¹ + δ⁻¹δ + σ_{sa} = id`, supercommutativity of the pointwise
/// product, and `δ∇ + ∇δ = 0`.
pub fn algebra_suite(g: &ChartGeometry, trunc: u32, seed: u64, trials: u32) -> Report {
    let mut rep = Report::new();
    let mut s = Sampler::new(seed);
    let shape = ElementShape::default();
    let mut dd = true;
    let mut ss = true;
    let mut hodge = true;
    let mut decomp = true;
    let mut super_sign = true;
    let mut anti = true;
    for _ in 0..trials {
        // δ* and δ⁻¹ raise the assembled degree by one; give the ceiling
        // headroom so no identity loses terms to truncation
        let w = s.element(g.dim, g.rank, trunc, shape).retruncate(trunc + 2);
        dd &= w.delta().delta().is_zero();
        ss &= w.delta_star().delta_star().is_zero();
        let lhs = w.delta().delta_star().add(&w.delta_star().delta());
        let rhs = w
            .degree_map(crate::superalgebra::DegreeKind::Sym)
            .add(&w.degree_map(crate::superalgebra::DegreeKind::Antisym));
        hodge &= lhs == rhs;
        let left = w.delta().delta_inv().add(&w.delta_inv().delta()).add(&w.sigma_sa());
        decomp &= left == w;
        let v = s.element(g.dim, g.rank, trunc, shape);
        super_sign &= supercomm_sign_holds(&w, &v);
        let mixed = g.nabla(&w.delta()).add(&g.nabla(&w).delta());
        anti &= mixed.is_zero();
    }
    rep.record("delta squares to zero", dd, "");
    rep.record("delta-star squares to zero", ss, "");
    rep.record("hodge relation", hodge, "δδ*+δ*δ != deg_s+deg_a");
    rep.record("delta decomposition", decomp, "δδ⁻¹+δ⁻¹δ+σ != id");
    rep.record("supercommutativity", super_sign, "sign law violated");
    rep.record("delta anticommutes with nabla", anti, "δ∇+∇δ != 0");
    rep
}

fn supercomm_sign_holds(f: &AlgebraElement, g: &AlgebraElement) -> bool {
    let fp = f.parity_components();
    let gp = g.parity_components();
    for (i, fi) in fp.iter().enumerate() {
        let (d1, a1) = ((i / 2) as u32, (i % 2) as u32);
        for (j, gj) in gp.iter().enumerate() {
            let (d2, a2) = ((j / 2) as u32, (j % 2) as u32);
            let fg = match fi.undeformed_mul(gj) {
                Ok(x) => x,
                Err(_) => return false,
            };
            let gf = match gj.undeformed_mul(fi) {
                Ok(x) => x,
                Err(_) => return false,
            };
            let sign = if (d1 * d2 + a1 * a2) % 2 == 0 { 1 } else { -1 };
            if gf != fg.scale(&crate::scalars::GaussRational::from_int(sign)) {
                return false;
            }
        }
    }
    true
}

/// Curvature identities: the Bianchi-type facts `δR = 0` and `∇R = 0`,
/// the symmetry projections fixing `R`, and `∇² = (i/λ)ad(R)` on random
/// elements.
pub fn geometry_suite(g: &ChartGeometry, trunc: u32, seed: u64, trials: u32) -> Report {
    let mut rep = g.validate();
    let curv = g.curvature(trunc);
    let r = &curv.total;
    rep.record("curvature delta-closed", r.delta().is_zero(), "δR != 0");
    rep.record("curvature covariantly constant", g.nabla(r).is_zero(), "∇R != 0");
    rep.record("curvature even E-parity", r.parity_e() == *r, "P_E(R) != R");
    rep.record("curvature even lambda-parity", r.parity_lambda() == *r, "P_λ(R) != R");
    rep.record("curvature real", r.conj() == *r, "C(R) != R");
    let mut s = Sampler::new(seed);
    let shape = ElementShape::default();
    let mut sq = true;
    for _ in 0..trials {
        let w = s.element(g.dim, g.rank, trunc, shape);
        let lhs = g.nabla(&g.nabla(&w));
        let rhs = match ad_over_ilambda(g, r, &w) {
            Ok(x) => x,
            Err(_) => {
                sq = false;
                break;
            }
        };
        sq &= lhs == rhs;
    }
    rep.record("nabla squared is curvature derivation", sq, "∇² != (i/λ)ad(R)");
    rep
}

/// Flatness and Taylor-series identities at truncation `trunc`: the fixed
/// points of `r`, vanishing of the exact components of `D²w`, `σ∘τ = id`,
/// `Dτ(φ) = 0`, and `τ(1) = 1`.
pub fn fedosov_suite(g: &ChartGeometry, trunc: u32, seed: u64, trials: u32) -> Result<Report, Error> {
    let state = FedosovState::build(g.clone(), trunc)?;
    let mut rep = Report::new();
    let r = state.r();
    rep.record("r real", r.conj() == *r, "C(r) != r");
    rep.record("r depends only on lambda squared", r.parity_lambda() == *r, "P_λ(r) != r");
    rep.record("r even E-parity", r.parity_e() == *r, "P_E(r) != r");
    rep.record("r normalized", r.delta_inv().is_zero(), "δ⁻¹r != 0");
    let mut s = Sampler::new(seed);
    let shape = ElementShape::default();
    let mut flat = true;
    for _ in 0..trials {
        let w = s.element(g.dim, g.rank, trunc, shape);
        let ddw = state.apply_d(&state.apply_d(&w)?)?;
        for deg in 0..=trunc.saturating_sub(2) {
            flat &= ddw.total_degree_component(deg).is_zero();
        }
    }
    rep.record("fedosov derivation squares to zero", flat, "exact D² component nonzero");
    let mut taylor_ok = true;
    let mut dtau_ok = true;
    for _ in 0..trials {
        let phi = s.observable(g.dim, g.rank, trunc, 2);
        let tau = state.taylor(&phi)?;
        taylor_ok &= tau.sigma_c() == phi.retruncate(tau.trunc());
        let dtau = state.apply_d(&tau)?;
        for deg in 0..=trunc.saturating_sub(1) {
            dtau_ok &= dtau.total_degree_component(deg).is_zero();
        }
    }
    let one = AlgebraElement::one(g.dim, g.rank, trunc);
    let tau_one = state.taylor(&one)?;
    rep.record("taylor splits the projection", taylor_ok, "σ∘τ != id");
    rep.record("taylor series are flat", dtau_ok, "Dτ(φ) != 0");
    rep.record("taylor fixes the unit", tau_one == one.retruncate(tau_one.trunc()), "τ(1) != 1");
    Ok(rep)
}

/// Star-product identities at λ-order `order`: associativity on random
/// triples, unitality, `M₀` equal to the pointwise product, and the
/// symmetry `M_t(ψ,φ) = (−1)^t (−1)^{d₁d₂} M_t(φ,ψ)`.
pub fn star_suite(g: &ChartGeometry, order: u32, seed: u64, trials: u32) -> Result<Report, Error> {
    let trunc = FedosovState::required_trunc(g.rank, order);
    let state = FedosovState::build(g.clone(), trunc)?;
    let mut rep = Report::new();
    let mut s = Sampler::new(seed);
    let mut assoc = true;
    let mut unital = true;
    let mut m0 = true;
    let mut symm = true;
    let one = AlgebraElement::one(g.dim, g.rank, trunc);
    for _ in 0..trials {
        let a = s.observable(g.dim, g.rank, trunc, 1);
        let b = s.observable(g.dim, g.rank, trunc, 1);
        let c = s.observable(g.dim, g.rank, trunc, 1);
        let ab_c = star_then(&state, &state.star(&a, &b, order)?, &c, order)?;
        let a_bc = star_then_right(&state, &a, &state.star(&b, &c, order)?, order)?;
        assoc &= ab_c == a_bc;
        unital &= state.star(&one, &a, order)? == a.retruncate(trunc + 4).truncate_lambda(order)
            && state.star(&a, &one, order)? == a.retruncate(trunc + 4).truncate_lambda(order);
        let ab = state.star(&a, &b, order)?;
        m0 &= ab.lambda_component(0) == a.retruncate(ab.trunc()).undeformed_mul(&b.retruncate(ab.trunc()))?.lambda_component(0);
        symm &= mt_symmetry_holds(&state, &mut s, order)?;
    }
    rep.record("star associative", assoc, "associativity failed");
    rep.record("star unital", unital, "unit not neutral");
    rep.record("leading order is the pointwise product", m0, "M₀ mismatch");
    rep.record("coefficient symmetry", symm, "M_t symmetry law failed");
    Ok(rep)
}

fn star_then(state: &FedosovState, ab: &AlgebraElement, c: &AlgebraElement, order: u32) -> Result<AlgebraElement, Error> {
    // ab carries λ-powers; push them through by λ-linearity of the star
    let mut out = AlgebraElement::zero(ab.dim(), ab.rank(), ab.trunc());
    for t in 0..=order {
        let part = ab.lambda_component(t);
        if part.is_zero() {
            continue;
        }
        let mut prod = state.star(&part, c, order)?;
        for _ in 0..t {
            prod = prod.mul_lambda();
        }
        out = out.add(&prod);
    }
    Ok(out.truncate_lambda(order))
}

fn star_then_right(state: &FedosovState, a: &AlgebraElement, bc: &AlgebraElement, order: u32) -> Result<AlgebraElement, Error> {
    let mut out = AlgebraElement::zero(bc.dim(), bc.rank(), bc.trunc());
    for t in 0..=order {
        let part = bc.lambda_component(t);
        if part.is_zero() {
            continue;
        }
        let mut prod = state.star(a, &part, order)?;
        for _ in 0..t {
            prod = prod.mul_lambda();
        }
        out = out.add(&prod);
    }
    Ok(out.truncate_lambda(order))
}

/// The coefficient symmetry alone, for driving higher λ-orders cheaply.
pub fn mt_symmetry_suite(g: &ChartGeometry, order: u32, seed: u64, trials: u32) -> Result<Report, Error> {
    let trunc = FedosovState::required_trunc(g.rank, order);
    let state = FedosovState::build(g.clone(), trunc)?;
    let mut s = Sampler::new(seed);
    let mut symm = true;
    for _ in 0..trials {
        symm &= mt_symmetry_holds(&state, &mut s, order)?;
    }
    let mut rep = Report::new();
    rep.record("coefficient symmetry", symm, "M_t symmetry law failed");
    Ok(rep)
}

fn mt_symmetry_holds(state: &FedosovState, s: &mut Sampler, order: u32) -> Result<bool, Error> {
    let g = state.geometry();
    let trunc = state.trunc();
    for d1 in 0..=g.rank.min(2) as u32 {
        for d2 in 0..=g.rank.min(2) as u32 {
            let a = s.observable_of_degree(g.dim, g.rank, trunc, d1, 1);
            let b = s.observable_of_degree(g.dim, g.rank, trunc, d2, 1);
            let ab = crate::fedosov::extract_mt(&state.star(&a, &b, order)?, order);
            let ba = crate::fedosov::extract_mt(&state.star(&b, &a, order)?, order);
            for (t, (mab, mba)) in ab.iter().zip(&ba).enumerate() {
                let sign = if (t as u32 + d1 * d2) % 2 == 0 { 1 } else { -1 };
                if *mba != mab.scale(&crate::scalars::GaussRational::from_int(sign)) {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// The truncation-sufficiency check: the star coefficients through λ-order
/// `order` agree between `K = 2·order + rank` and `K + 2`.
pub fn truncation_suite(g: &ChartGeometry, order: u32, seed: u64, trials: u32) -> Result<Report, Error> {
    let k = FedosovState::required_trunc(g.rank, order);
    let tight = FedosovState::build(g.clone(), k)?;
    let slack = FedosovState::build(g.clone(), k + 2)?;
    let mut s = Sampler::new(seed);
    let mut agree = true;
    for _ in 0..trials {
        let a = s.observable(g.dim, g.rank, k + 2, 1);
        let b = s.observable(g.dim, g.rank, k + 2, 1);
        let x = tight.star(&a.retruncate(k), &b.retruncate(k), order)?;
        let y = slack.star(&a, &b, order)?;
        for t in 0..=order {
            agree &= x.lambda_component(t) == y.lambda_component(t).retruncate(x.trunc());
        }
    }
    let mut rep = Report::new();
    rep.record("truncation bound sufficient", agree, "coefficients differ across K");
    Ok(rep)
}

/// Identities of the direct bracket: graded anticommutativity, the graded
/// Leibniz rule, and the graded Jacobi identity, on random E-type
/// elements; plus agreement with the `M₁` star coefficient.
pub fn bracket_suite(g: &ChartGeometry, seed: u64, trials: u32) -> Result<Report, Error> {
    use crate::fedosov::rothstein_bracket as br;
    let trunc = 8;
    let mut rep = Report::new();
    let mut s = Sampler::new(seed);
    let mut anti = true;
    let mut leibniz = true;
    let mut jacobi = true;
    for _ in 0..trials {
        for d1 in 0..=g.rank.min(2) as u32 {
            for d2 in 0..=g.rank.min(2) as u32 {
                let a = s.observable_of_degree(g.dim, g.rank, trunc, d1, 1);
                let b = s.observable_of_degree(g.dim, g.rank, trunc, d2, 1);
                let sign = if (1 + d1 * d2) % 2 == 0 { 1 } else { -1 };
                anti &= br(g, &b, &a)?
                    == br(g, &a, &b)?.scale(&crate::scalars::GaussRational::from_int(sign));
                let c = s.observable_of_degree(g.dim, g.rank, trunc, 1, 1);
                // {a, b∧c} = {a,b}∧c + (−1)^{d₁d₂} b∧{a,c}
                let lhs = br(g, &a, &b.undeformed_mul(&c)?)?;
                let rhs = br(g, &a, &b)?.undeformed_mul(&c)?.add(
                    &b.undeformed_mul(&br(g, &a, &c)?)?
                        .scale(&crate::scalars::GaussRational::from_int(if (d1 * d2) % 2 == 0 { 1 } else { -1 })),
                );
                leibniz &= lhs == rhs;
                // graded Jacobi: (−1)^{d₁d₃}{a,{b,c}} + cyclic = 0
                let d3 = 1u32;
                let j1 = br(g, &a, &br(g, &b, &c)?)?
                    .scale(&crate::scalars::GaussRational::from_int(if (d1 * d3) % 2 == 0 { 1 } else { -1 }));
                let j2 = br(g, &b, &br(g, &c, &a)?)?
                    .scale(&crate::scalars::GaussRational::from_int(if (d2 * d1) % 2 == 0 { 1 } else { -1 }));
                let j3 = br(g, &c, &br(g, &a, &b)?)?
                    .scale(&crate::scalars::GaussRational::from_int(if (d3 * d2) % 2 == 0 { 1 } else { -1 }));
                jacobi &= j1.add(&j2).add(&j3).is_zero();
            }
        }
    }
    rep.record("bracket graded anticommutative", anti, "sign law failed");
    rep.record("bracket graded Leibniz", leibniz, "derivation rule failed");
    rep.record("bracket graded Jacobi", jacobi, "cyclic sum nonzero");
    Ok(rep)
}

/// `M₁` from the star product equals the direct bracket for all E-degree
/// pairs, and the factorized product matches the full star on flat bundles.
pub fn headline_suite(g: &ChartGeometry, seed: u64, trials: u32) -> Result<Report, Error> {
    use crate::fedosov::{extract_mt, rothstein_bracket_both};
    let order = 1;
    let trunc = FedosovState::required_trunc(g.rank, order + 1);
    let state = FedosovState::build(g.clone(), trunc)?;
    let mut rep = Report::new();
    let mut s = Sampler::new(seed);
    let mut m1 = true;
    for _ in 0..trials {
        for d1 in 0..=g.rank.min(2) as u32 {
            for d2 in 0..=g.rank.min(2) as u32 {
                let a = s.observable_of_degree(g.dim, g.rank, trunc, d1, 1);
                let b = s.observable_of_degree(g.dim, g.rank, trunc, d2, 1);
                let mts = extract_mt(&state.star(&a, &b, order)?, order);
                let (two, one) = rothstein_bracket_both(g, &a, &b)?;
                let tr = mts[1].trunc();
                m1 &= two == one && mts[1] == two.retruncate(tr);
            }
        }
    }
    rep.record("first-order coefficient equals direct bracket", m1, "M₁ mismatch");
    if g.is_flat_e() && g.q_is_constant() {
        let base = crate::fedosov::FedosovBaseStar(&state);
        let mut fac = true;
        for _ in 0..trials {
            let a = s.observable(g.dim, g.rank, trunc, 1);
            let b = s.observable(g.dim, g.rank, trunc, 1);
            let full = state.star(&a, &b, order + 1)?;
            let split = crate::fedosov::flat_star(g, &a, &b, &base, order + 1)?;
            fac &= split.retruncate(full.trunc()) == full;
        }
        rep.record("factorized product matches full star", fac, "flat factorization failed");
    }
    Ok(rep)
}

/// Sanity identities of the fibrewise product itself: associativity and
/// the unit, at a modest truncation.
pub fn circ_suite(g: &ChartGeometry, trunc: u32, seed: u64, trials: u32) -> Result<Report, Error> {
    let mut rep = Report::new();
    let mut s = Sampler::new(seed);
    let shape = ElementShape { max_terms: 3, ..ElementShape::default() };
    let mut assoc = true;
    let mut unital = true;
    let one = AlgebraElement::one(g.dim, g.rank, trunc);
    for _ in 0..trials {
        let a = s.element(g.dim, g.rank, trunc, shape);
        let b = s.element(g.dim, g.rank, trunc, shape);
        let c = s.element(g.dim, g.rank, trunc, shape);
        let left = circ_trunc(g, &circ_trunc(g, &a, &b, trunc)?, &c, trunc)?;
        let right = circ_trunc(g, &a, &circ_trunc(g, &b, &c, trunc)?, trunc)?;
        assoc &= left == right;
        unital &= circ_trunc(g, &one, &a, trunc)? == a && circ_trunc(g, &a, &one, trunc)? == a;
    }
    rep.record("fibrewise product associative", assoc, "associativity failed");
    rep.record("fibrewise product unital", unital, "unit not neutral");
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn algebra_suite_flat_and_curved() {
        for g in [ChartGeometry::darboux_trivial(1, 1), ChartGeometry::curved_example()] {
            let rep = algebra_suite(&g, 8, 11, 5);
            assert!(rep.pass(), "{rep}");
        }
    }

    #[test]
    fn geometry_suite_curved() {
        let g = ChartGeometry::curved_example();
        let curv = g.curvature(8);
        assert!(!curv.rm.is_zero());
        assert!(!curv.re.is_zero());
        let rep = geometry_suite(&g, 8, 3, 4);
        assert!(rep.pass(), "{rep}");
    }

    #[test]
    fn fedosov_suite_curved() {
        let rep = fedosov_suite(&ChartGeometry::curved_example(), 6, 5, 3).unwrap();
        assert!(rep.pass(), "{rep}");
    }

    #[test]
    fn circ_suite_curved() {
        let rep = circ_suite(&ChartGeometry::curved_example(), 6, 9, 4).unwrap();
        assert!(rep.pass(), "{rep}");
    }

    #[test]
    fn star_and_bracket_suites_flat() {
        let g = ChartGeometry::darboux_trivial(1, 1);
        assert!(star_suite(&g, 1, 2, 2).unwrap().pass());
        assert!(bracket_suite(&g, 2, 1).unwrap().pass());
        assert!(headline_suite(&g, 2, 2).unwrap().pass());
    }
}
