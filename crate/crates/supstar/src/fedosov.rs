//! The Fedosov construction: the recursion for the connection element `r`,
//! the flat derivation `D = -δ + ∇ + (i/λ)ad(r)`, the Taylor-series lift
//! `τ`, the star product `φ∗ψ = σ(τ(φ)∘τ(ψ))` with its coefficients `M_t`,
//! the direct curvature-corrected super-Poisson bracket, and the factorized
//! product over flat bundles.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::error::Error;
use crate::fibrewise::{circ_trunc, supercomm_trunc};
use crate::geometry::{ChartGeometry, CurvatureData};
use crate::scalars::{GaussPoly, GaussRational};
use crate::superalgebra::{AlgebraElement, TermKey};

/// A validated geometry with the computed `r` components and memoized
/// curvature elements at a fixed truncation order.
///
/// All internal elements carry a truncation buffer above the nominal order:
/// the product is graded by total degree and every operator in `D` only
/// moves degree downwards, so components at degree `k` are exact whenever
/// the inputs were exact at `k` and above as tracked by the recursion.
pub struct FedosovState {
    geom: ChartGeometry,
    curv: CurvatureData,
    trunc: u32,
    r_parts: Vec<AlgebraElement>,
    r_total: AlgebraElement,
}

fn internal_trunc(k: u32) -> u32 {
    k + 4
}

impl FedosovState {
    /// Run the recursion `r^{(3)} = δ⁻¹R`,
    /// `r^{(k+3)} = δ⁻¹(∇r^{(k+2)} + (i/λ) Σ_l r^{(l+2)}∘r^{(k-l+2)})`
    /// through total degree `trunc`.
    pub fn build(geom: ChartGeometry, trunc: u32) -> Result<FedosovState, Error> {
        if trunc < 2 {
            return Err(Error::TruncationTooSmall { given: trunc, needed: 2 });
        }
        let rep = geom.validate();
        if !rep.pass() {
            let msg = rep
                .failures()
                .map(|c| format!("{}: {}", c.name, c.detail))
                .collect::<Vec<_>>()
                .join("; ");
            return Err(Error::Geometry(msg));
        }
        let it = internal_trunc(trunc);
        let curv = geom.curvature(it);
        let zero = AlgebraElement::zero(geom.dim, geom.rank, it);
        let mut r_parts = vec![zero.clone(); trunc as usize + 1];
        if trunc >= 3 {
            r_parts[3] = curv.total.delta_inv();
        }
        for deg in 4..=trunc as usize {
            // deg = k + 3
            let k = deg - 3;
            let mut b = geom.nabla(&r_parts[deg - 1]);
            let mut quad = zero.clone();
            for l in 1..=k.saturating_sub(1) {
                let p = circ_trunc(&geom, &r_parts[l + 2], &r_parts[k - l + 2], it)?;
                quad = quad.add(&p);
            }
            if !quad.is_zero() {
                b = b.add(&quad.div_lambda()?.times_i());
            }
            r_parts[deg] = b.delta_inv();
        }
        let mut r_total = zero;
        for p in &r_parts {
            r_total = r_total.add(p);
        }
        Ok(FedosovState { geom, curv, trunc, r_parts, r_total })
    }

    pub fn geometry(&self) -> &ChartGeometry {
        &self.geom
    }

    pub fn curvature(&self) -> &CurvatureData {
        &self.curv
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    /// The component of `r` of total degree `deg`.
    pub fn r_part(&self, deg: usize) -> &AlgebraElement {
        &self.r_parts[deg]
    }

    pub fn r(&self) -> &AlgebraElement {
        &self.r_total
    }

    /// Apply `D = -δ + ∇ + (i/λ)ad(r)`. For `w` exact through the state
    /// truncation the result is exact through one degree less.
    pub fn apply_d(&self, w: &AlgebraElement) -> Result<AlgebraElement, Error> {
        let it = internal_trunc(self.trunc);
        let w = w.retruncate(it);
        let mut out = w.delta().scale(&GaussRational::from_int(-1));
        out = out.add(&self.geom.nabla(&w));
        let comm = supercomm_trunc(&self.geom, &self.r_total, &w, it)?;
        if !comm.is_zero() {
            out = out.add(&comm.div_lambda()?.times_i());
        }
        Ok(out)
    }

    /// The Taylor-series lift of `φ` (symmetric and form degree zero):
    /// the unique `D`-flat element with `σ(τ(φ)) = φ`, built per total
    /// degree.
    pub fn taylor(&self, phi: &AlgebraElement) -> Result<AlgebraElement, Error> {
        for (k, _) in phi.terms() {
            if k.sym_degree() + k.a_degree() != 0 {
                return Err(Error::Setup("taylor argument must have no symmetric or form factor".into()));
            }
        }
        let it = internal_trunc(self.trunc);
        let phi = phi.retruncate(it);
        let zero = AlgebraElement::zero(self.geom.dim, self.geom.rank, it);
        let mut parts = vec![zero.clone(); self.trunc as usize + 1];
        parts[0] = phi.total_degree_component(0);
        for deg in 1..=self.trunc as usize {
            let k = deg - 1;
            let mut b = self.geom.nabla(&parts[k]);
            let mut comm = zero.clone();
            for l in 1..=k.saturating_sub(1) {
                if self.r_parts[l + 2].is_zero() {
                    continue;
                }
                let c = supercomm_trunc(&self.geom, &self.r_parts[l + 2], &parts[k - l], it)?;
                comm = comm.add(&c);
            }
            if !comm.is_zero() {
                b = b.add(&comm.div_lambda()?.times_i());
            }
            parts[deg] = b.delta_inv().add(&phi.total_degree_component(deg as u32));
        }
        let mut tau = zero;
        for p in &parts {
            tau = tau.add(p);
        }
        Ok(tau)
    }

    /// The truncation order needed for exactness through λ-order `t` at
    /// every E-degree: the λ-order-`t`, E-degree-`d` coefficient of `φ∗ψ`
    /// receives contributions only from Taylor components of total degrees
    /// summing to `2t + d`, so `2t + rank` suffices.
    pub fn required_trunc(rank: usize, order: u32) -> u32 {
        2 * order + rank as u32
    }

    /// The star product `φ∗ψ = σ(τ(φ)∘τ(ψ))`, exact through λ-order
    /// `order`. The state truncation must be at least `2·order + rank`.
    pub fn star(
        &self,
        phi: &AlgebraElement,
        psi: &AlgebraElement,
        order: u32,
    ) -> Result<AlgebraElement, Error> {
        let needed = Self::required_trunc(self.geom.rank, order);
        if self.trunc < needed {
            return Err(Error::TruncationTooSmall { given: self.trunc, needed });
        }
        let tphi = self.taylor(phi)?;
        let tpsi = self.taylor(psi)?;
        let prod = circ_trunc(&self.geom, &tphi, &tpsi, internal_trunc(self.trunc))?;
        Ok(prod.sigma_c().truncate_lambda(order))
    }
}

/// The coefficients `M_t` of `φ∗ψ = Σ (iλ/2)^t M_t(φ,ψ)`, as λ-free
/// elements, for `t = 0..=order`.
pub fn extract_mt(starred: &AlgebraElement, order: u32) -> Vec<AlgebraElement> {
    // inverse of (i/2): -2i
    let unscale = GaussRational::new(
        num_rational::BigRational::from_integer(0.into()),
        num_rational::BigRational::from_integer((-2).into()),
    );
    let mut out = Vec::with_capacity(order as usize + 1);
    let mut factor = GaussRational::one();
    for t in 0..=order {
        out.push(starred.lambda_component(t).scale(&factor));
        factor = &factor * &unscale;
    }
    out
}

/// An element of the endomorphism-valued bundle `TM ⊗ Λ_even E* ⊗ T*M`
/// carrying the fibrewise associative `•` multiplication (matrix product
/// with wedge of the even E-parts).
#[derive(Clone, PartialEq)]
pub struct BulletElement {
    dim: usize,
    rank: usize,
    entries: Vec<Vec<AlgebraElement>>,
}

impl BulletElement {
    pub fn zero(dim: usize, rank: usize, trunc: u32) -> Self {
        let z = AlgebraElement::zero(dim, rank, trunc);
        BulletElement { dim, rank, entries: vec![vec![z; dim]; dim] }
    }

    pub fn identity(dim: usize, rank: usize, trunc: u32) -> Self {
        let mut b = BulletElement::zero(dim, rank, trunc);
        for i in 0..dim {
            b.entries[i][i] = AlgebraElement::one(dim, rank, trunc);
        }
        b
    }

    pub fn entry(&self, i: usize, j: usize) -> &AlgebraElement {
        &self.entries[i][j]
    }

    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut AlgebraElement {
        &mut self.entries[i][j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|e| e.is_zero())
    }

    pub fn add(&self, other: &BulletElement) -> BulletElement {
        let mut out = self.clone();
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.entries[i][j] = self.entries[i][j].add(&other.entries[i][j]);
            }
        }
        out
    }

    pub fn sub(&self, other: &BulletElement) -> BulletElement {
        let mut out = self.clone();
        for i in 0..self.dim {
            for j in 0..self.dim {
                out.entries[i][j] = self.entries[i][j].sub(&other.entries[i][j]);
            }
        }
        out
    }

    pub fn scale(&self, c: &GaussRational) -> BulletElement {
        let mut out = self.clone();
        for row in &mut out.entries {
            for e in row {
                *e = e.scale(c);
            }
        }
        out
    }

    /// The `•` product: `(A•B)^i_j = Σ_k A^i_k ∧ B^k_j`.
    pub fn bullet(&self, other: &BulletElement) -> BulletElement {
        let trunc = self.entries[0][0].trunc();
        let mut out = BulletElement::zero(self.dim, self.rank, trunc);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let mut s = AlgebraElement::zero(self.dim, self.rank, trunc);
                for k in 0..self.dim {
                    if self.entries[i][k].is_zero() || other.entries[k][j].is_zero() {
                        continue;
                    }
                    s = s.add(
                        &self.entries[i][k]
                            .undeformed_mul(&other.entries[k][j])
                            .expect("compatible"),
                    );
                }
                out.entries[i][j] = s;
            }
        }
        out
    }

    /// Evaluate the power series `Σ_k coeff(k) · X^{•k}`; terminates because
    /// each factor raises the E-degree by at least two.
    pub fn power_series(&self, coeff: impl Fn(u32) -> GaussRational) -> BulletElement {
        let trunc = self.entries[0][0].trunc();
        let mut out = BulletElement::identity(self.dim, self.rank, trunc).scale(&coeff(0));
        let mut power = self.clone();
        let mut k = 1u32;
        while !power.is_zero() {
            out = out.add(&power.scale(&coeff(k)));
            power = power.bullet(self);
            k += 1;
        }
        out
    }
}

/// Rational binomial coefficient `binom(α, k)`.
fn binom(alpha: &BigRational, k: u32) -> BigRational {
    let mut num = BigRational::one();
    for j in 0..k {
        num *= alpha - BigRational::from_integer(BigInt::from(j));
        num /= BigRational::from_integer(BigInt::from(j + 1));
    }
    num
}

/// Series coefficient of `(1 - 2x)^alpha`: `binom(α,k)·(−2)^k`.
pub fn one_minus_2x_pow(alpha: &BigRational, k: u32) -> GaussRational {
    let mut c = binom(alpha, k);
    for _ in 0..k {
        c *= BigRational::from_integer(BigInt::from(-2));
    }
    GaussRational::new(c, BigRational::from_integer(0.into()))
}

/// The curvature endomorphism `R̂ᴱ` with components
/// `(R̂ᴱ)^i_j = ¼ Λ^{ik} R^{(E)}_{ABkj} e^A ∧ e^B`.
pub fn rhat_e(g: &ChartGeometry, trunc: u32) -> BulletElement {
    let quarter = GaussRational::from_ratio(1, 4);
    let mut out = BulletElement::zero(g.dim, g.rank, trunc);
    for i in 0..g.dim {
        for j in 0..g.dim {
            let mut entry = AlgebraElement::zero(g.dim, g.rank, trunc);
            for k in 0..g.dim {
                if g.lambda[i][k].is_zero() {
                    continue;
                }
                for a in 0..g.rank {
                    for b in 0..g.rank {
                        if a == b {
                            continue;
                        }
                        // R^{(E)}_{ABkj} = -q_{AC}(R^E)^C_{Bkj}
                        let mut comp = GaussPoly::zero(g.dim);
                        for c in 0..g.rank {
                            comp -= &(&g.q[a][c] * &g.riemann_e(c, b, k, j));
                        }
                        if comp.is_zero() {
                            continue;
                        }
                        let comp = comp.checked_mul(&g.lambda[i][k]).expect("dim");
                        let (eset, sign) =
                            crate::superalgebra::wedge_front(1 << b, a).expect("distinct");
                        let c =
                            comp.scale(&(&quarter * &GaussRational::from_int(sign as i64)));
                        entry.add_term(
                            TermKey { t: 0, mu: vec![0; g.dim], eset, aset: 0 },
                            &c,
                        );
                    }
                }
            }
            out.entries[i][j] = entry;
        }
    }
    out
}

/// Both closed forms of the first-order star-commutator bracket on a
/// λ-free argument pair: the two-factor `(1−2R̂ᴱ)^{−1/2}` form and the
/// single-factor `(1−2R̂ᴱ)^{−1}` form; the two are asserted equal and one
/// is returned.
pub fn rothstein_bracket(
    g: &ChartGeometry,
    phi: &AlgebraElement,
    psi: &AlgebraElement,
) -> Result<AlgebraElement, Error> {
    let (two, one) = rothstein_bracket_both(g, phi, psi)?;
    if two != one {
        return Err(Error::Setup(
            "two-factor and one-factor bracket forms disagree".into(),
        ));
    }
    Ok(two)
}

pub fn rothstein_bracket_both(
    g: &ChartGeometry,
    phi: &AlgebraElement,
    psi: &AlgebraElement,
) -> Result<(AlgebraElement, AlgebraElement), Error> {
    for (k, _) in phi.terms().chain(psi.terms()) {
        if k.sym_degree() + k.a_degree() != 0 || k.t != 0 {
            return Err(Error::Setup("bracket arguments must be λ-free E-type elements".into()));
        }
    }
    let trunc = phi.trunc().min(psi.trunc());
    let rhat = rhat_e(g, trunc);
    let half = BigRational::new(BigInt::from(-1), BigInt::from(2));
    let sqrt_inv = rhat.power_series(|k| one_minus_2x_pow(&half, k));
    let minus_one = BigRational::from_integer(BigInt::from(-1));
    let inv = rhat.power_series(|k| one_minus_2x_pow(&minus_one, k));

    let dphi: Vec<AlgebraElement> = (0..g.dim).map(|k| g.nabla_e(phi, k)).collect();
    let dpsi: Vec<AlgebraElement> = (0..g.dim).map(|k| g.nabla_e(psi, k)).collect();

    let qterm = algebraic_bracket(g, phi, psi)?;

    // two-factor form
    let mut two = qterm.clone();
    for i in 0..g.dim {
        for j in 0..g.dim {
            if g.lambda[i][j].is_zero() {
                continue;
            }
            for k in 0..g.dim {
                if sqrt_inv.entry(k, i).is_zero() {
                    continue;
                }
                for l in 0..g.dim {
                    if sqrt_inv.entry(l, j).is_zero() || dphi[k].is_zero() || dpsi[l].is_zero() {
                        continue;
                    }
                    let p = sqrt_inv
                        .entry(k, i)
                        .undeformed_mul(sqrt_inv.entry(l, j))?
                        .undeformed_mul(&dphi[k])?
                        .undeformed_mul(&dpsi[l])?;
                    two = two.add(&p.scale_poly(&g.lambda[i][j]));
                }
            }
        }
    }

    // single-factor form
    let mut one = qterm;
    for i in 0..g.dim {
        for j in 0..g.dim {
            if g.lambda[i][j].is_zero() || dpsi[j].is_zero() {
                continue;
            }
            for k in 0..g.dim {
                if inv.entry(k, i).is_zero() || dphi[k].is_zero() {
                    continue;
                }
                let p = inv
                    .entry(k, i)
                    .undeformed_mul(&dphi[k])?
                    .undeformed_mul(&dpsi[j])?;
                one = one.add(&p.scale_poly(&g.lambda[i][j]));
            }
        }
    }
    Ok((two, one))
}

/// The purely algebraic super-Poisson term
/// `q^{AB} (j(e_A)φ) ∧ (i(e_B)ψ)`.
pub fn algebraic_bracket(
    g: &ChartGeometry,
    phi: &AlgebraElement,
    psi: &AlgebraElement,
) -> Result<AlgebraElement, Error> {
    let trunc = phi.trunc().min(psi.trunc());
    let mut out = AlgebraElement::zero(g.dim, g.rank, trunc);
    for a in 0..g.rank {
        let jphi = phi.insert_e_right(a)?;
        if jphi.is_zero() {
            continue;
        }
        for b in 0..g.rank {
            if g.qinv[a][b].is_zero() {
                continue;
            }
            let ipsi = psi.insert_e(b)?;
            if ipsi.is_zero() {
                continue;
            }
            out = out.add(&jphi.undeformed_mul(&ipsi)?.scale_poly(&g.qinv[a][b]));
        }
    }
    Ok(out)
}

/// The quadratic-relation data behind the bracket formula: `ρ` is the
/// symmetric-degree-one, λ-degree-zero part of `r`, and
/// `ρ̂^i_j = Λ^{ik} (i_s(∂_k)ρ)_j` satisfies `ρ̂ − R̂ᴱ = ½ ρ̂•ρ̂`, whence
/// `ρ̂ = 1 − (1−2R̂ᴱ)^{1/2}`.
pub struct RothsteinOperator {
    pub rho: AlgebraElement,
    pub rho_hat: BulletElement,
    pub rhat_e: BulletElement,
}

pub fn rho_hat(state: &FedosovState) -> Result<RothsteinOperator, Error> {
    let g = state.geometry();
    let it = internal_trunc(state.trunc());
    let rho = state
        .r()
        .filter_terms(|k| k.t == 0 && k.sym_degree() == 1 && k.a_degree() == 1);
    let mut hat = BulletElement::zero(g.dim, g.rank, it);
    for (key, coeff) in rho.terms() {
        let k = key.mu.iter().position(|&m| m == 1).expect("sym degree one");
        let j = (0..g.dim).find(|&i| key.aset & (1 << i) != 0).expect("a degree one");
        for i in 0..g.dim {
            if g.lambda[i][k].is_zero() {
                continue;
            }
            let c = coeff.checked_mul(&g.lambda[i][k])?;
            hat.entry_mut(i, j).add_term(
                TermKey { t: 0, mu: vec![0; g.dim], eset: key.eset, aset: 0 },
                &c,
            );
        }
    }
    let rhat = rhat_e(g, it);
    // ρ̂ − R̂ᴱ = ½ ρ̂•ρ̂
    let lhs = hat.sub(&rhat);
    let rhs = hat.bullet(&hat).scale(&GaussRational::from_ratio(1, 2));
    if lhs != rhs {
        return Err(Error::Setup("quadratic relation for rho-hat failed".into()));
    }
    Ok(RothsteinOperator { rho, rho_hat: hat, rhat_e: rhat })
}

/// A base star product on scalar (E-degree-zero) λ-series elements.
pub trait BaseStar {
    fn base_star(
        &self,
        f: &AlgebraElement,
        g: &AlgebraElement,
        order: u32,
    ) -> Result<AlgebraElement, Error>;
}

/// The state's own star product restricted to functions.
pub struct FedosovBaseStar<'a>(pub &'a FedosovState);

impl BaseStar for FedosovBaseStar<'_> {
    fn base_star(
        &self,
        f: &AlgebraElement,
        g: &AlgebraElement,
        order: u32,
    ) -> Result<AlgebraElement, Error> {
        self.0.star(f, g, order)
    }
}

/// The Moyal-Weyl product on a Darboux chart, written directly as the
/// exponential pairing series. Independent of the Fedosov pipeline; used as
/// the base product in the BRST constructions and as a cross-check.
pub struct MoyalBase<'a>(pub &'a ChartGeometry);

impl BaseStar for MoyalBase<'_> {
    fn base_star(
        &self,
        f: &AlgebraElement,
        g: &AlgebraElement,
        order: u32,
    ) -> Result<AlgebraElement, Error> {
        let geom = self.0;
        let trunc = f.trunc().min(g.trunc());
        let mut out = AlgebraElement::zero(geom.dim, geom.rank, trunc);
        // Σ_k (iλ/2)^k/k! Λ^{i1j1}…Λ^{ikjk} ∂_{i…}f ∂_{j…}g on each pair of
        // λ-components.
        for (kf, cf) in f.terms() {
            for (kg, cg) in g.terms() {
                if kf.sym_degree() + kf.a_degree() + kf.e_degree() != 0
                    || kg.sym_degree() + kg.a_degree() + kg.e_degree() != 0
                {
                    return Err(Error::Setup("Moyal base needs scalar arguments".into()));
                }
                let mut pairs: Vec<(GaussPoly, GaussPoly)> = vec![(cf.clone(), cg.clone())];
                let mut factor = GaussRational::one();
                let half_i = &GaussRational::i() * &GaussRational::from_ratio(1, 2);
                let mut k = 0u32;
                while !pairs.is_empty() {
                    if kf.t + kg.t + k <= order {
                        let mut sum = GaussPoly::zero(geom.dim);
                        for (a, b) in &pairs {
                            sum += &a.checked_mul(b)?;
                        }
                        out.add_term(
                            TermKey {
                                t: kf.t + kg.t + k,
                                mu: vec![0; geom.dim],
                                eset: 0,
                                aset: 0,
                            },
                            &sum.scale(&factor),
                        );
                    } else {
                        break;
                    }
                    let mut next = Vec::new();
                    for (a, b) in &pairs {
                        for i in 0..geom.dim {
                            for j in 0..geom.dim {
                                if geom.lambda[i][j].is_zero() {
                                    continue;
                                }
                                let da = a.partial(i)?;
                                let db = b.partial(j)?;
                                if da.is_zero() || db.is_zero() {
                                    continue;
                                }
                                next.push((da.checked_mul(&geom.lambda[i][j])?, db));
                            }
                        }
                    }
                    pairs = next;
                    k += 1;
                    factor = &(&factor * &half_i) * &GaussRational::from_ratio(1, k as i64);
                }
            }
        }
        Ok(out.truncate_lambda(order))
    }
}

/// The factorized star product over a flat bundle: component functions are
/// multiplied by the base product, Grassmann frames by the formal Clifford
/// product.
pub fn flat_star(
    g: &ChartGeometry,
    phi: &AlgebraElement,
    psi: &AlgebraElement,
    base: &dyn BaseStar,
    order: u32,
) -> Result<AlgebraElement, Error> {
    if !g.is_flat_e() {
        return Err(Error::Setup("flat_star requires a flat bundle connection".into()));
    }
    if !g.q_is_constant() {
        return Err(Error::Setup("flat_star requires a constant fibre metric".into()));
    }
    let trunc = phi.trunc().min(psi.trunc());
    let frames = |e: &AlgebraElement| -> Result<Vec<(u64, AlgebraElement)>, Error> {
        let mut by_frame: std::collections::BTreeMap<u64, AlgebraElement> =
            std::collections::BTreeMap::new();
        for (k, c) in e.terms() {
            if k.sym_degree() + k.a_degree() != 0 {
                return Err(Error::Setup("flat_star arguments must be E-type".into()));
            }
            by_frame
                .entry(k.eset)
                .or_insert_with(|| AlgebraElement::zero(g.dim, g.rank, trunc))
                .add_term(TermKey { t: k.t, mu: k.mu.clone(), eset: 0, aset: 0 }, c);
        }
        Ok(by_frame.into_iter().collect())
    };
    let fphi = frames(phi)?;
    let fpsi = frames(psi)?;
    let mut out = AlgebraElement::zero(g.dim, g.rank, trunc);
    for (s1, c1) in &fphi {
        for (s2, c2) in &fpsi {
            let fs = base.base_star(c1, c2, order)?;
            if fs.is_zero() {
                continue;
            }
            let mut e1 = AlgebraElement::zero(g.dim, g.rank, trunc);
            e1.add_term(
                TermKey { t: 0, mu: vec![0; g.dim], eset: *s1, aset: 0 },
                &GaussPoly::one(g.dim),
            );
            let mut e2 = AlgebraElement::zero(g.dim, g.rank, trunc);
            e2.add_term(
                TermKey { t: 0, mu: vec![0; g.dim], eset: *s2, aset: 0 },
                &GaussPoly::one(g.dim),
            );
            let cl = crate::fibrewise::clifford_mul(g, &e1, &e2)?;
            if cl.is_zero() {
                continue;
            }
            out = out.add(&fs.undeformed_mul(&cl)?);
        }
    }
    Ok(out.truncate_lambda(order))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ChartGeometry;

    fn scalar(g: &ChartGeometry, p: &GaussPoly, trunc: u32) -> AlgebraElement {
        AlgebraElement::from_poly(p, g.rank, trunc)
    }

    #[test]
    fn flat_r_vanishes() {
        let g = ChartGeometry::darboux_trivial(1, 1);
        let st = FedosovState::build(g, 6).unwrap();
        assert!(st.r().is_zero());
    }

    #[test]
    fn flat_taylor_of_coordinate() {
        // flat R²: τ(x¹) = x¹ + dx¹(sym)
        let g = ChartGeometry::darboux_trivial(1, 1);
        let st = FedosovState::build(g, 6).unwrap();
        let x = scalar(st.geometry(), &GaussPoly::var(2, 0), 6);
        let tau = st.taylor(&x).unwrap();
        let mut expect = x.retruncate(internal_trunc(6));
        expect.add_term(
            TermKey { t: 0, mu: vec![1, 0], eset: 0, aset: 0 },
            &GaussPoly::one(2),
        );
        assert_eq!(tau, expect);
        // D(x¹ + dx¹sym) = 0
        assert!(st.apply_d(&tau).unwrap().is_zero());
    }

    #[test]
    fn tau_of_one_is_one() {
        let g = ChartGeometry::darboux_trivial(2, 2);
        let st = FedosovState::build(g, 6).unwrap();
        let one = AlgebraElement::one(4, 2, 6);
        assert_eq!(st.taylor(&one).unwrap(), one.retruncate(internal_trunc(6)));
        assert!(st.apply_d(&one).unwrap().is_zero());
    }

    #[test]
    fn moyal_commutator() {
        // x∗p − p∗x = iλ on the Darboux chart, via the full pipeline and
        // via the direct Moyal series.
        let g = ChartGeometry::darboux_trivial(1, 1);
        let order = 2;
        let k = FedosovState::required_trunc(1, order);
        let st = FedosovState::build(g, k).unwrap();
        let x = scalar(st.geometry(), &GaussPoly::var(2, 0), k);
        let p = scalar(st.geometry(), &GaussPoly::var(2, 1), k);
        let comm = st.star(&x, &p, order).unwrap().sub(&st.star(&p, &x, order).unwrap());
        let mut expect = AlgebraElement::zero(2, 1, comm.trunc());
        expect.add_term(
            TermKey { t: 1, mu: vec![0, 0], eset: 0, aset: 0 },
            &GaussPoly::constant(2, GaussRational::i()),
        );
        assert_eq!(comm, expect);
        let moyal = MoyalBase(st.geometry());
        let mcomm = moyal
            .base_star(&x, &p, order)
            .unwrap()
            .sub(&moyal.base_star(&p, &x, order).unwrap());
        assert_eq!(
            mcomm.lambda_component(1).retruncate(comm.trunc()),
            comm.lambda_component(1)
        );
    }

    #[test]
    fn star_units() {
        let g = ChartGeometry::darboux_trivial(1, 2);
        let k = FedosovState::required_trunc(2, 1);
        let st = FedosovState::build(g, k).unwrap();
        let one = AlgebraElement::one(2, 2, k);
        let mut psi = AlgebraElement::zero(2, 2, k);
        psi.add_term(
            TermKey { t: 0, mu: vec![0, 0], eset: 0b11, aset: 0 },
            &GaussPoly::var(2, 1),
        );
        let l = st.star(&one, &psi, 1).unwrap();
        let r = st.star(&psi, &one, 1).unwrap();
        assert_eq!(l, psi.retruncate(l.trunc()));
        assert_eq!(r, psi.retruncate(r.trunc()));
        let mts = extract_mt(&l, 1);
        assert!(mts[1].is_zero());
    }

    #[test]
    fn clifford_value_from_star() {
        // rank-1 flat E: e¹∗e¹ = (iλ/2) q¹¹
        let g = ChartGeometry::darboux_trivial(1, 1);
        let k = FedosovState::required_trunc(1, 1);
        let st = FedosovState::build(g, k).unwrap();
        let mut e1 = AlgebraElement::zero(2, 1, k);
        e1.add_term(
            TermKey { t: 0, mu: vec![0, 0], eset: 1, aset: 0 },
            &GaussPoly::one(2),
        );
        let sq = st.star(&e1, &e1, 1).unwrap();
        let mut expect = AlgebraElement::zero(2, 1, sq.trunc());
        expect.add_term(
            TermKey { t: 1, mu: vec![0, 0], eset: 0, aset: 0 },
            &GaussPoly::constant(2, &GaussRational::i() * &GaussRational::from_ratio(1, 2)),
        );
        assert_eq!(sq, expect);
    }

    #[test]
    fn star_rejects_small_truncation() {
        let g = ChartGeometry::darboux_trivial(1, 1);
        let st = FedosovState::build(g, 3).unwrap();
        let one = AlgebraElement::one(2, 1, 3);
        assert!(matches!(
            st.star(&one, &one, 2),
            Err(Error::TruncationTooSmall { .. })
        ));
    }

    #[test]
    fn flat_bracket_is_poisson_plus_pairing() {
        let g = ChartGeometry::darboux_trivial(1, 2);
        let x = scalar(&g, &GaussPoly::var(2, 0), 8);
        let p = scalar(&g, &GaussPoly::var(2, 1), 8);
        let br = rothstein_bracket(&g, &x, &p).unwrap();
        assert_eq!(br, AlgebraElement::one(2, 2, 8));
        // degree-0 arguments: plain Poisson bracket
        let f = scalar(&g, &(&GaussPoly::var(2, 0) * &GaussPoly::var(2, 0)), 8);
        let bf = rothstein_bracket(&g, &f, &p).unwrap();
        assert_eq!(
            bf,
            scalar(&g, &GaussPoly::var(2, 0), 8).scale(&GaussRational::from_int(2))
        );
    }

    #[test]
    fn flat_rho_hat_is_zero() {
        let g = ChartGeometry::darboux_trivial(1, 1);
        let st = FedosovState::build(g, 6).unwrap();
        let op = rho_hat(&st).unwrap();
        assert!(op.rho.is_zero());
        assert!(op.rho_hat.is_zero());
    }

    fn curved_chart() -> ChartGeometry {
        // symplectic connection on R² with Γ_{112} = x¹ totally symmetric,
        // so Γ²_{12} = Γ²_{21} = x¹ and Γ¹_{11} = -x¹; curvature is nonzero
        let mut g = ChartGeometry::darboux_trivial(1, 1);
        let x = GaussPoly::var(2, 0);
        g.gamma[1][0][1] = x.clone();
        g.gamma[1][1][0] = x.clone();
        g.gamma[0][0][0] = -&x;
        assert!(g.validate().pass());
        g
    }

    #[test]
    fn nabla_squared_is_curvature_derivation() {
        let g = curved_chart();
        let trunc = 8;
        let curv = g.curvature(trunc);
        assert!(!curv.total.is_zero());
        let mut w = AlgebraElement::zero(2, 1, trunc);
        w.add_term(
            TermKey { t: 0, mu: vec![2, 1], eset: 1, aset: 0 },
            &GaussPoly::var(2, 1),
        );
        w.add_term(
            TermKey { t: 1, mu: vec![0, 1], eset: 0, aset: 1 },
            &GaussPoly::var(2, 0),
        );
        let lhs = g.nabla(&g.nabla(&w));
        let rhs = crate::fibrewise::ad_over_ilambda(&g, &curv.total, &w).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn curved_d_is_flat() {
        let g = curved_chart();
        let k = 6;
        let st = FedosovState::build(g, k).unwrap();
        assert!(!st.r().is_zero());
        // Dr reproduces R + r∘r structure, so D² vanishes: check on a probe
        let mut w = AlgebraElement::zero(2, 1, k);
        w.add_term(
            TermKey { t: 0, mu: vec![1, 0], eset: 1, aset: 0 },
            &GaussPoly::var(2, 1),
        );
        let ddw = st.apply_d(&st.apply_d(&w).unwrap()).unwrap();
        for deg in 0..=k.saturating_sub(2) {
            assert!(
                ddw.total_degree_component(deg).is_zero(),
                "D² failed at degree {deg}"
            );
        }
    }

    #[test]
    fn curved_taylor_is_d_flat() {
        let g = curved_chart();
        let k = 6;
        let st = FedosovState::build(g.clone(), k).unwrap();
        let phi = AlgebraElement::from_poly(
            &(&GaussPoly::var(2, 0) * &GaussPoly::var(2, 1)),
            1,
            k,
        );
        let tau = st.taylor(&phi).unwrap();
        assert_eq!(tau.sigma_c(), phi.retruncate(tau.trunc()));
        let dtau = st.apply_d(&tau).unwrap();
        for deg in 0..=k.saturating_sub(1) {
            assert!(
                dtau.total_degree_component(deg).is_zero(),
                "Dτ failed at degree {deg}"
            );
        }
    }

    #[test]
    fn binomial_series_coefficients() {
        let mh = BigRational::new(BigInt::from(-1), BigInt::from(2));
        // (1-2x)^{-1/2} = 1 + x + (3/2)x² + ...
        assert_eq!(one_minus_2x_pow(&mh, 0), GaussRational::one());
        assert_eq!(one_minus_2x_pow(&mh, 1), GaussRational::one());
        assert_eq!(one_minus_2x_pow(&mh, 2), GaussRational::from_ratio(3, 2));
        let mo = BigRational::from_integer(BigInt::from(-1));
        assert_eq!(one_minus_2x_pow(&mo, 2), GaussRational::from_int(4));
    }
}
