//! BRST constructions over a Darboux chart: ghost gradings, the quantum
//! BRST charge `Θ = Σ J_a c^a − ½ f^c_{ab} c^a∧c^b∧b_c` with its operator
//! `Q = (1/iλ)[Θ, ·]`, and the classical side: the Koszul boundary with an
//! exact-division homotopy, the charge recursion, and a bounded-degree
//! cohomology probe with exact ranks.
//!
//! Frame convention: E carries rank `2n`; indices `0..n` are the ghosts
//! `c^a`, indices `n..2n` the antighosts `b_a`, and `q` is the natural
//! pairing `q(c^a, b_b) = δ^a_b`.

use std::collections::BTreeMap;

use crate::error::Error;
use crate::fedosov::{flat_star, rothstein_bracket, BaseStar, MoyalBase};
use crate::geometry::{ChartGeometry, PolyMatrix};
use crate::report::Report;
use crate::scalars::{GaussPoly, GaussRational};
use crate::superalgebra::{wedge_front, AlgebraElement, Mask, TermKey};

/// Effectively untruncated: products of polynomial data terminate on their
/// own, so BRST elements never hit the degree cap.
pub const OPEN_TRUNC: u32 = 1 << 20;

fn ghost_mask(n: usize) -> Mask {
    (1u64 << n) - 1
}

fn antighost_mask(n: usize) -> Mask {
    ((1u64 << n) - 1) << n
}

/// Ghost-sector form degree of a frame set.
pub fn ghost_degree(eset: Mask, n: usize) -> u32 {
    (eset & ghost_mask(n)).count_ones()
}

/// Antighost-sector form degree of a frame set.
pub fn antighost_degree(eset: Mask, n: usize) -> u32 {
    (eset & antighost_mask(n)).count_ones()
}

/// `Gh` = ghost degree minus antighost degree.
pub fn ghost_number(eset: Mask, n: usize) -> i32 {
    ghost_degree(eset, n) as i32 - antighost_degree(eset, n) as i32
}

/// Split an element into its ghost-number eigencomponents.
pub fn ghost_number_components(phi: &AlgebraElement, n: usize) -> BTreeMap<i32, AlgebraElement> {
    let mut out: BTreeMap<i32, AlgebraElement> = BTreeMap::new();
    for (k, c) in phi.terms() {
        out.entry(ghost_number(k.eset, n))
            .or_insert_with(|| AlgebraElement::zero(phi.dim(), phi.rank(), phi.trunc()))
            .add_term(k.clone(), c);
    }
    out
}

/// The grading operator: each term scaled by its ghost number.
pub fn apply_ghost_number(phi: &AlgebraElement, n: usize) -> AlgebraElement {
    let mut out = AlgebraElement::zero(phi.dim(), phi.rank(), phi.trunc());
    for (k, c) in phi.terms() {
        let g = ghost_number(k.eset, n);
        if g != 0 {
            out.add_term(k.clone(), &c.scale(&GaussRational::from_int(g as i64)));
        }
    }
    out
}

/// Extract the antighost-degree-`i` part.
pub fn antighost_component(phi: &AlgebraElement, n: usize, i: u32) -> AlgebraElement {
    phi.filter_terms(|k| antighost_degree(k.eset, n) == i)
}

fn pairing_metric(n: usize) -> (PolyMatrix, PolyMatrix) {
    let dim_probe = 1; // metric entries are constants; dim fixed by caller
    let _ = dim_probe;
    let rank = 2 * n;
    let mut q = vec![vec![GaussPoly::zero(0); rank]; rank];
    for a in 0..n {
        q[a][n + a] = GaussPoly::one(0);
        q[n + a][a] = GaussPoly::one(0);
    }
    (q.clone(), q)
}

/// Build the Darboux chart `R^{2m}` with the ghost/antighost bundle of a
/// rank-`n` constraint system: rank `2n`, flat connections, pairing metric.
pub fn ghost_chart(m: usize, n: usize) -> ChartGeometry {
    let dim = 2 * m;
    let (mut q, mut qinv) = pairing_metric(n);
    for row in q.iter_mut().chain(qinv.iter_mut()) {
        for e in row {
            *e = if e.is_zero() { GaussPoly::zero(dim) } else { GaussPoly::one(dim) };
        }
    }
    let mut g = ChartGeometry::darboux_trivial(m, 2 * n);
    g.q = q;
    g.qinv = qinv;
    g
}

/// A Lie algebra with a polynomial quantum momentum map over a Darboux
/// chart, quantized by the factorized product with the Moyal base.
pub struct QuantumBRSTSetup {
    pub lie_dim: usize,
    /// structure[c][a][b] = f^c_{ab}
    pub structure: Vec<Vec<Vec<GaussRational>>>,
    /// qmm[a] = ⟨J, ξ_a⟩, a λ-series of polynomials as a scalar element
    pub qmm: Vec<AlgebraElement>,
    pub geom: ChartGeometry,
}

impl QuantumBRSTSetup {
    pub fn new(
        m: usize,
        structure: Vec<Vec<Vec<GaussRational>>>,
        qmm_polys: Vec<GaussPoly>,
    ) -> Result<QuantumBRSTSetup, Error> {
        let n = qmm_polys.len();
        if structure.len() != n || structure.iter().any(|s| s.len() != n || s.iter().any(|r| r.len() != n)) {
            return Err(Error::Setup("structure constants must be n×n×n".into()));
        }
        let geom = ghost_chart(m, n);
        let qmm = qmm_polys
            .iter()
            .map(|p| {
                if p.dim() != 2 * m {
                    return Err(Error::DimensionMismatch { left: p.dim(), right: 2 * m });
                }
                Ok(AlgebraElement::from_poly(p, 2 * n, OPEN_TRUNC))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(QuantumBRSTSetup { lie_dim: n, structure, qmm, geom })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<QuantumBRSTSetup, Error> {
        let obj = v.as_object().ok_or_else(|| Error::Parse("setup must be an object".into()))?;
        let dim = obj
            .get("dim_m")
            .and_then(|d| d.as_u64())
            .ok_or_else(|| Error::Parse("missing dim_m".into()))? as usize;
        if dim % 2 != 0 {
            return Err(Error::Parse("dim_m must be even".into()));
        }
        let st = obj
            .get("structure")
            .and_then(|s| s.as_array())
            .ok_or_else(|| Error::Parse("missing structure".into()))?;
        let parse_rat = |v: &serde_json::Value| -> Result<GaussRational, Error> {
            let s = v.as_str().ok_or_else(|| Error::Parse("structure entry must be a string".into()))?;
            Ok(GaussRational::new(
                GaussRational::parse_rational(s)?,
                num_rational::BigRational::from_integer(0.into()),
            ))
        };
        let structure = st
            .iter()
            .map(|pl| {
                pl.as_array()
                    .ok_or_else(|| Error::Parse("structure must be 3-dimensional".into()))?
                    .iter()
                    .map(|row| {
                        row.as_array()
                            .ok_or_else(|| Error::Parse("structure must be 3-dimensional".into()))?
                            .iter()
                            .map(parse_rat)
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let qmm = obj
            .get("qmm")
            .and_then(|s| s.as_array())
            .ok_or_else(|| Error::Parse("missing qmm".into()))?
            .iter()
            .map(|p| GaussPoly::from_json(p, dim))
            .collect::<Result<Vec<_>, _>>()?;
        QuantumBRSTSetup::new(dim / 2, structure, qmm)
    }

    /// The factorized star product on the ghost-extended chart.
    pub fn star(&self, phi: &AlgebraElement, psi: &AlgebraElement) -> Result<AlgebraElement, Error> {
        flat_star(&self.geom, phi, psi, &MoyalBase(&self.geom), OPEN_TRUNC)
    }

    /// Setup invariants: antisymmetry and Jacobi for the structure
    /// constants, and the momentum-map condition
    /// `J_a∗J_b − J_b∗J_a = iλ f^c_{ab} J_c` for every pair.
    pub fn validate(&self) -> Report {
        let mut rep = Report::new();
        let n = self.lie_dim;
        let zero = GaussRational::zero();
        let anti = (0..n).all(|c| {
            (0..n).all(|a| (0..n).all(|b| {
                &self.structure[c][a][b] + &self.structure[c][b][a] == zero
            }))
        });
        rep.record("structure antisymmetry", anti, "f^c_{ab} + f^c_{ba} != 0");
        let mut jacobi = true;
        'jac: for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for e in 0..n {
                        let mut s = GaussRational::zero();
                        for d in 0..n {
                            s = &s + &(&self.structure[d][a][b] * &self.structure[e][d][c]);
                            s = &s + &(&self.structure[d][b][c] * &self.structure[e][d][a]);
                            s = &s + &(&self.structure[d][c][a] * &self.structure[e][d][b]);
                        }
                        if !s.is_zero() {
                            jacobi = false;
                            break 'jac;
                        }
                    }
                }
            }
        }
        rep.record("structure Jacobi identity", jacobi, "cyclic sum nonzero");
        let mut qm_ok = true;
        let mut detail = String::new();
        'pairs: for a in 0..n {
            for b in a + 1..n {
                let moyal = MoyalBase(&self.geom);
                let lhs = match (
                    moyal.base_star(&self.qmm[a], &self.qmm[b], OPEN_TRUNC),
                    moyal.base_star(&self.qmm[b], &self.qmm[a], OPEN_TRUNC),
                ) {
                    (Ok(x), Ok(y)) => x.sub(&y),
                    _ => {
                        qm_ok = false;
                        detail = "product failed".into();
                        break 'pairs;
                    }
                };
                let mut rhs = AlgebraElement::zero(self.geom.dim, self.geom.rank, OPEN_TRUNC);
                for c in 0..n {
                    if self.structure[c][a][b].is_zero() {
                        continue;
                    }
                    rhs = rhs.add(&self.qmm[c].scale(&self.structure[c][a][b]));
                }
                let rhs = rhs.mul_lambda().times_i();
                if lhs != rhs {
                    qm_ok = false;
                    detail = format!("momentum-map condition fails for pair ({a},{b})");
                    break 'pairs;
                }
            }
        }
        rep.record("quantum momentum map", qm_ok, &detail);
        rep
    }

    /// The BRST charge `Θ = Σ_a J_a c^a − ½ f^c_{ab} c^a∧c^b∧b_c`.
    pub fn charge(&self) -> Result<AlgebraElement, Error> {
        let rep = self.validate();
        if !rep.pass() {
            let msg = rep
                .failures()
                .map(|c| format!("{}: {}", c.name, c.detail))
                .collect::<Vec<_>>()
                .join("; ");
            return Err(Error::Setup(msg));
        }
        let n = self.lie_dim;
        let g = &self.geom;
        let mut theta = AlgebraElement::zero(g.dim, g.rank, OPEN_TRUNC);
        for a in 0..n {
            for (k, c) in self.qmm[a].terms() {
                theta.add_term(TermKey { t: k.t, mu: k.mu.clone(), eset: 1 << a, aset: 0 }, c);
            }
        }
        let mhalf = GaussRational::from_ratio(-1, 2);
        for c in 0..n {
            for a in 0..n {
                for b in 0..n {
                    if a == b || self.structure[c][a][b].is_zero() {
                        continue;
                    }
                    // build c^a∧c^b∧b_c in written order
                    let (s1, sign1) = match wedge_front(1 << (n + c), b) {
                        Some(x) => x,
                        None => continue,
                    };
                    let (s2, sign2) = match wedge_front(s1, a) {
                        Some(x) => x,
                        None => continue,
                    };
                    let coeff = &(&mhalf * &self.structure[c][a][b])
                        * &GaussRational::from_int((sign1 * sign2) as i64);
                    theta.add_term(
                        TermKey { t: 0, mu: vec![0; g.dim], eset: s2, aset: 0 },
                        &GaussPoly::constant(g.dim, coeff),
                    );
                }
            }
        }
        for (k, _) in theta.terms() {
            if ghost_number(k.eset, n) != 1 {
                return Err(Error::Setup("charge is not of ghost number one".into()));
            }
        }
        Ok(theta)
    }

    /// The ghost-number generator `γ = Σ_a c^a∧b_a`, whose normalized inner
    /// derivation reproduces `Gh`.
    pub fn gamma(&self) -> AlgebraElement {
        let n = self.lie_dim;
        let g = &self.geom;
        let mut out = AlgebraElement::zero(g.dim, g.rank, OPEN_TRUNC);
        for a in 0..n {
            out.add_term(
                TermKey { t: 0, mu: vec![0; g.dim], eset: (1 << a) | (1 << (n + a)), aset: 0 },
                &GaussPoly::one(g.dim),
            );
        }
        out
    }

    /// `Q(φ) = (1/iλ)(Θ∗φ − (−1)^{|φ|} φ∗Θ)` with `|φ|` the E-parity.
    pub fn operator(&self, theta: &AlgebraElement, phi: &AlgebraElement) -> Result<AlgebraElement, Error> {
        let comm = self.graded_commutator(theta, phi)?;
        // 1/(iλ) = -i/λ
        Ok(comm.div_lambda()?.times_i().scale(&GaussRational::from_int(-1)))
    }

    fn graded_commutator(&self, theta: &AlgebraElement, phi: &AlgebraElement) -> Result<AlgebraElement, Error> {
        let even = phi.filter_terms(|k| k.e_degree() % 2 == 0);
        let odd = phi.filter_terms(|k| k.e_degree() % 2 == 1);
        let mut out = self.star(theta, phi)?;
        if !even.is_zero() {
            out = out.sub(&self.star(&even, theta)?);
        }
        if !odd.is_zero() {
            out = out.add(&self.star(&odd, theta)?);
        }
        Ok(out)
    }

    /// The normalized inner derivation by `γ`; equals `Gh` on any element.
    pub fn inner_ghost_number(&self, phi: &AlgebraElement) -> Result<AlgebraElement, Error> {
        let gamma = self.gamma();
        let comm = self.star(&gamma, phi)?.sub(&self.star(phi, &gamma)?);
        if comm.is_zero() {
            return Ok(comm);
        }
        Ok(comm.div_lambda()?.times_i().scale(&GaussRational::from_int(-1)))
    }
}

/// Polynomial constraints forming part of a coordinate system with a
/// polynomial inverse; carries the chart and the substitution data.
pub struct ClassicalBRSTSetup {
    pub n: usize,
    pub constraints: Vec<GaussPoly>,
    /// adapted coordinates y_i(x); the first n entries equal the constraints
    pub forward: Vec<GaussPoly>,
    /// inverse substitution x_i(y)
    pub backward: Vec<GaussPoly>,
    pub geom: ChartGeometry,
}

impl ClassicalBRSTSetup {
    pub fn new(
        m: usize,
        constraints: Vec<GaussPoly>,
        forward: Vec<GaussPoly>,
        backward: Vec<GaussPoly>,
    ) -> Result<ClassicalBRSTSetup, Error> {
        let n = constraints.len();
        let dim = 2 * m;
        if forward.len() != dim || backward.len() != dim {
            return Err(Error::Setup("coordinate change must cover every chart coordinate".into()));
        }
        let geom = ghost_chart(m, n);
        Ok(ClassicalBRSTSetup { n, constraints, forward, backward, geom })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<ClassicalBRSTSetup, Error> {
        let obj = v.as_object().ok_or_else(|| Error::Parse("setup must be an object".into()))?;
        let dim = obj
            .get("dim_m")
            .and_then(|d| d.as_u64())
            .ok_or_else(|| Error::Parse("missing dim_m".into()))? as usize;
        if dim % 2 != 0 {
            return Err(Error::Parse("dim_m must be even".into()));
        }
        let polys = |name: &str| -> Result<Vec<GaussPoly>, Error> {
            obj.get(name)
                .and_then(|s| s.as_array())
                .ok_or_else(|| Error::Parse(format!("missing {name}")))?
                .iter()
                .map(|p| GaussPoly::from_json(p, dim))
                .collect()
        };
        let cc = obj
            .get("coord_change")
            .and_then(|c| c.as_object())
            .ok_or_else(|| Error::Parse("missing coord_change".into()))?;
        let arm = |name: &str| -> Result<Vec<GaussPoly>, Error> {
            cc.get(name)
                .and_then(|s| s.as_array())
                .ok_or_else(|| Error::Parse(format!("missing coord_change.{name}")))?
                .iter()
                .map(|p| GaussPoly::from_json(p, dim))
                .collect()
        };
        ClassicalBRSTSetup::new(dim / 2, polys("constraints")?, arm("forward")?, arm("backward")?)
    }

    /// Poisson bracket of scalar polynomials via `Λ`.
    fn poisson(&self, f: &GaussPoly, g: &GaussPoly) -> Result<GaussPoly, Error> {
        let dim = self.geom.dim;
        let mut out = GaussPoly::zero(dim);
        for i in 0..dim {
            for j in 0..dim {
                if self.geom.lambda[i][j].is_zero() {
                    continue;
                }
                out += &f.partial(i)?.checked_mul(&g.partial(j)?)?.checked_mul(&self.geom.lambda[i][j])?;
            }
        }
        Ok(out)
    }

    /// Setup invariants: the coordinate change is a two-sided polynomial
    /// inverse, its first `n` components are the constraints, and the
    /// constraints are in involution up to the ideal they generate.
    pub fn validate(&self) -> Report {
        let mut rep = Report::new();
        let dim = self.geom.dim;
        let heads = (0..self.n).all(|a| self.forward[a] == self.constraints[a]);
        rep.record("adapted coordinates extend constraints", heads, "forward[a] != J_a");
        let idp: Vec<GaussPoly> = (0..dim).map(|i| GaussPoly::var(dim, i)).collect();
        let round1 = (0..dim).all(|i| {
            self.forward[i].substitute(&self.backward).map(|p| p == idp[i]).unwrap_or(false)
        });
        let round2 = (0..dim).all(|i| {
            self.backward[i].substitute(&self.forward).map(|p| p == idp[i]).unwrap_or(false)
        });
        rep.record("coordinate change invertible", round1 && round2, "composition is not the identity");
        let mut cois = true;
        let mut detail = String::new();
        'outer: for a in 0..self.n {
            for b in a + 1..self.n {
                let pb = match self.poisson(&self.constraints[a], &self.constraints[b]) {
                    Ok(p) => p,
                    Err(e) => {
                        cois = false;
                        detail = e.to_string();
                        break 'outer;
                    }
                };
                let in_y = match pb.substitute(&self.backward) {
                    Ok(p) => p,
                    Err(e) => {
                        cois = false;
                        detail = e.to_string();
                        break 'outer;
                    }
                };
                if !restrict_leading(&in_y, self.n).is_zero() {
                    cois = false;
                    detail = format!("{{J_{a},J_{b}}} is not in the constraint ideal");
                    break 'outer;
                }
            }
        }
        rep.record("coisotropy", cois, &detail);
        rep
    }

    /// The Koszul boundary `∂ = Σ_a J_a · i(b_a)`.
    pub fn koszul_boundary(&self, w: &AlgebraElement) -> Result<AlgebraElement, Error> {
        let mut out = AlgebraElement::zero(self.geom.dim, self.geom.rank, w.trunc());
        for a in 0..self.n {
            let ins = w.insert_e(self.n + a)?;
            if ins.is_zero() {
                continue;
            }
            out = out.add(&ins.scale_poly(&self.constraints[a]));
        }
        Ok(out)
    }

    /// The contracting homotopy by exact division in the adapted
    /// coordinates: on a monomial `y^α e^S` with
    /// `ν = Σ_{a<n} α_a + (antighost degree of S)`,
    /// `h = (1/ν) Σ_a α_a y^{α-e_a} b_a∧e^S` (zero on the `ν = 0` part).
    pub fn koszul_homotopy(&self, w: &AlgebraElement) -> Result<AlgebraElement, Error> {
        let dim = self.geom.dim;
        let mut out = AlgebraElement::zero(dim, self.geom.rank, w.trunc());
        for (key, coeff) in w.terms() {
            if key.sym_degree() + key.a_degree() != 0 {
                return Err(Error::Setup("Koszul sector elements carry no Weyl or form factors".into()));
            }
            let c_y = coeff.substitute(&self.backward)?;
            let adeg = antighost_degree(key.eset, self.n);
            for (exps, val) in c_y.terms() {
                let nu = exps.iter().take(self.n).sum::<u32>() + adeg;
                if nu == 0 {
                    continue;
                }
                for a in 0..self.n {
                    if exps[a] == 0 {
                        continue;
                    }
                    if key.eset & (1 << (self.n + a)) != 0 {
                        continue; // b_a∧b_a = 0
                    }
                    let (eset, sign) = wedge_front(key.eset, self.n + a).expect("checked");
                    let mut lowered = exps.clone();
                    lowered[a] -= 1;
                    let scale = &(val * &GaussRational::from_ratio(exps[a] as i64, nu as i64))
                        * &GaussRational::from_int(sign as i64);
                    let mono = GaussPoly::monomial(dim, lowered, scale);
                    let back = mono.substitute(&self.forward)?;
                    out.add_term(
                        TermKey { t: key.t, mu: key.mu.clone(), eset, aset: 0 },
                        &back,
                    );
                }
            }
        }
        Ok(out)
    }

    /// The augmentation `w ↦ ε(w)`: drop antighost legs, restrict
    /// coefficients to the constraint surface, pull back to the chart.
    pub fn koszul_restriction(&self, w: &AlgebraElement) -> Result<AlgebraElement, Error> {
        let dim = self.geom.dim;
        let mut out = AlgebraElement::zero(dim, self.geom.rank, w.trunc());
        for (key, coeff) in w.terms() {
            if antighost_degree(key.eset, self.n) != 0 {
                continue;
            }
            let c_y = coeff.substitute(&self.backward)?;
            let surf = restrict_leading(&c_y, self.n);
            if surf.is_zero() {
                continue;
            }
            out.add_term(key.clone(), &surf.substitute(&self.forward)?);
        }
        Ok(out)
    }

    /// The charge recursion: `Θ⁰ = Σ J_a c^a`; at step `i`, `B_i` is the
    /// antighost-degree-`i` part of `{Θ,Θ}_R` and `Θ` gains `−½ h(B_i)`.
    /// Terminates within `n` steps for coisotropic data; the final bracket
    /// is checked to vanish identically.
    pub fn charge(&self) -> Result<AlgebraElement, Error> {
        let rep = self.validate();
        if !rep.pass() {
            let msg = rep
                .failures()
                .map(|c| format!("{}: {}", c.name, c.detail))
                .collect::<Vec<_>>()
                .join("; ");
            return Err(Error::Setup(msg));
        }
        let g = &self.geom;
        let mut theta = AlgebraElement::zero(g.dim, g.rank, OPEN_TRUNC);
        for a in 0..self.n {
            let mut leg = AlgebraElement::zero(g.dim, g.rank, OPEN_TRUNC);
            leg.add_term(
                TermKey { t: 0, mu: vec![0; g.dim], eset: 1 << a, aset: 0 },
                &self.constraints[a],
            );
            theta = theta.add(&leg);
        }
        for i in 0..=self.n as u32 {
            let obstruction = rothstein_bracket(g, &theta, &theta)?;
            if obstruction.is_zero() {
                return Ok(theta);
            }
            for low in 0..i {
                if !antighost_component(&obstruction, self.n, low).is_zero() {
                    return Err(Error::Setup(format!(
                        "charge recursion reopened antighost degree {low} at step {i}"
                    )));
                }
            }
            let b_i = antighost_component(&obstruction, self.n, i);
            let corr = self.koszul_homotopy(&b_i)?.scale(&GaussRational::from_ratio(-1, 2));
            theta = theta.add(&corr);
        }
        let residual = rothstein_bracket(g, &theta, &theta)?;
        if residual.is_zero() {
            Ok(theta)
        } else {
            Err(Error::Setup(
                "charge recursion failed to close within the antighost bound".into(),
            ))
        }
    }

    /// `Q = {Θ, ·}_R` with the flat-bundle bracket.
    pub fn operator(&self, theta: &AlgebraElement, phi: &AlgebraElement) -> Result<AlgebraElement, Error> {
        rothstein_bracket(&self.geom, theta, phi)
    }

    /// Restrict `Q` to the finite sector spanned, in the adapted
    /// coordinates, by `y^α e^S` with `|α| + antighost(S) ≤ max_poly_deg`,
    /// and report per ghost number `g`: the domain dimension, the exact
    /// rank of `Q` on the sector, and the probe value
    /// `dim ker(Q|_g) − rank(Q|_{g−1})`.
    ///
    /// The antighost weighting makes the sector invariant under the Koszul
    /// part of `Q`, so the probe value is the honest cohomology dimension
    /// of the restricted complex whenever every image stays inside the
    /// sector; each row records whether that closure held.
    pub fn cohomology_probe(
        &self,
        theta: &AlgebraElement,
        max_poly_deg: u32,
    ) -> Result<Vec<ProbeRow>, Error> {
        let dim = self.geom.dim;
        let rank = self.geom.rank;
        let n = self.n as i32;
        let mut monos: Vec<Vec<u32>> = Vec::new();
        enumerate_monomials(dim, max_poly_deg, &mut vec![0; dim], 0, &mut monos);
        let mut sector_basis: BTreeMap<i32, Vec<(Vec<u32>, Mask)>> = BTreeMap::new();
        for eset in 0u64..(1 << rank) {
            let g = ghost_number(eset, self.n);
            let ah = antighost_degree(eset, self.n);
            for m in &monos {
                if m.iter().sum::<u32>() + ah <= max_poly_deg {
                    sector_basis.entry(g).or_default().push((m.clone(), eset));
                }
            }
        }
        let in_domain = |v: &SparseVec| -> bool {
            v.keys().all(|(exps, eset)| {
                exps.iter().sum::<u32>() + antighost_degree(*eset, self.n) <= max_poly_deg
            })
        };
        let mut ranks: BTreeMap<i32, usize> = BTreeMap::new();
        let mut closed: BTreeMap<i32, bool> = BTreeMap::new();
        for (g, basis) in &sector_basis {
            let mut elim = Eliminator::new();
            let mut sector_closed = true;
            for (exps, eset) in basis {
                // y^α in chart coordinates
                let coeff = GaussPoly::monomial(dim, exps.clone(), GaussRational::one())
                    .substitute(&self.forward)?;
                let mut phi = AlgebraElement::zero(dim, rank, OPEN_TRUNC);
                phi.add_term(TermKey { t: 0, mu: vec![0; dim], eset: *eset, aset: 0 }, &coeff);
                let image = self.operator(theta, &phi)?;
                let v = self.adapted_vector(&image)?;
                sector_closed &= in_domain(&v);
                elim.insert(v);
            }
            ranks.insert(*g, elim.rank());
            closed.insert(*g, sector_closed);
        }
        let mut rows = Vec::new();
        for g in -n..=n {
            let dim_g = sector_basis.get(&g).map(|b| b.len()).unwrap_or(0);
            let rank_g = *ranks.get(&g).unwrap_or(&0);
            let rank_below = *ranks.get(&(g - 1)).unwrap_or(&0);
            rows.push(ProbeRow {
                ghost_number: g,
                dimension: dim_g,
                rank: rank_g,
                closed: *closed.get(&g).unwrap_or(&true) && *closed.get(&(g - 1)).unwrap_or(&true),
                cohomology: dim_g as i64 - rank_g as i64 - rank_below as i64,
            });
        }
        Ok(rows)
    }

    /// Sparse vector of an element over `(adapted monomial, frame set)`.
    fn adapted_vector(&self, e: &AlgebraElement) -> Result<SparseVec, Error> {
        let mut v = SparseVec::new();
        for (k, c) in e.terms() {
            debug_assert_eq!(k.t, 0);
            let in_y = c.substitute(&self.backward)?;
            for (exps, val) in in_y.terms() {
                let entry = v.entry((exps.clone(), k.eset)).or_insert_with(GaussRational::zero);
                *entry = &*entry + val;
            }
        }
        v.retain(|_, c| !c.is_zero());
        Ok(v)
    }
}

/// One ghost-number row of the cohomology probe. `closed` records whether
/// the images from this sector and the one below stayed inside the probe
/// domain, i.e. whether `cohomology` is the exact dimension for the
/// restricted complex.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize)]
pub struct ProbeRow {
    pub ghost_number: i32,
    pub dimension: usize,
    pub rank: usize,
    pub closed: bool,
    pub cohomology: i64,
}

/// Kill the first `n` variables of a polynomial (restriction to the
/// surface where the adapted leading coordinates vanish).
fn restrict_leading(p: &GaussPoly, n: usize) -> GaussPoly {
    let mut out = GaussPoly::zero(p.dim());
    for (exps, c) in p.terms() {
        if exps.iter().take(n).all(|&e| e == 0) {
            out.add_term(exps.clone(), c);
        }
    }
    out
}

fn enumerate_monomials(dim: usize, budget: u32, cur: &mut Vec<u32>, pos: usize, out: &mut Vec<Vec<u32>>) {
    if pos == dim {
        out.push(cur.clone());
        return;
    }
    for e in 0..=budget {
        cur[pos] = e;
        enumerate_monomials(dim, budget - e, cur, pos + 1, out);
    }
    cur[pos] = 0;
}

type SparseVec = BTreeMap<(Vec<u32>, Mask), GaussRational>;

/// Incremental exact Gaussian elimination over sparse vectors.
struct Eliminator {
    pivots: Vec<((Vec<u32>, Mask), SparseVec)>,
}

impl Eliminator {
    fn new() -> Eliminator {
        Eliminator { pivots: Vec::new() }
    }

    fn insert(&mut self, mut v: SparseVec) {
        for (pkey, prow) in &self.pivots {
            if let Some(c) = v.get(pkey).cloned() {
                if c.is_zero() {
                    continue;
                }
                for (k, pv) in prow {
                    let entry = v.entry(k.clone()).or_insert_with(GaussRational::zero);
                    *entry = &*entry - &(&c * pv);
                }
                v.retain(|_, c| !c.is_zero());
            }
        }
        if let Some((key, lead)) = v.iter().next().map(|(k, c)| (k.clone(), c.clone())) {
            let inv = lead.inv().expect("nonzero lead");
            let row: SparseVec = v.iter().map(|(k, c)| (k.clone(), c * &inv)).collect();
            self.pivots.push((key, row));
        }
    }

    fn rank(&self) -> usize {
        self.pivots.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abelian_pair() -> QuantumBRSTSetup {
        // g = R², J = (p₁, p₂) on R⁴
        let zero = || vec![vec![GaussRational::zero(); 2]; 2];
        QuantumBRSTSetup::new(
            2,
            vec![zero(), zero()],
            vec![GaussPoly::var(4, 2), GaussPoly::var(4, 3)],
        )
        .unwrap()
    }

    #[test]
    fn ghost_grading_basics() {
        // n = 2: frames 0,1 ghosts; 2,3 antighosts
        assert_eq!(ghost_number(0b0011, 2), 2);
        assert_eq!(ghost_number(0b1100, 2), -2);
        assert_eq!(ghost_number(0b0110, 2), 0);
        let s = abelian_pair();
        let mut phi = AlgebraElement::zero(4, 4, OPEN_TRUNC);
        phi.add_term(
            TermKey { t: 0, mu: vec![0; 4], eset: 0b0001, aset: 0 },
            &GaussPoly::var(4, 0),
        );
        let gh = apply_ghost_number(&phi, s.lie_dim);
        assert_eq!(gh, phi);
    }

    #[test]
    fn abelian_charge_is_linear() {
        let s = abelian_pair();
        assert!(s.validate().pass());
        let theta = s.charge().unwrap();
        let mut expect = AlgebraElement::zero(4, 4, OPEN_TRUNC);
        expect.add_term(
            TermKey { t: 0, mu: vec![0; 4], eset: 0b0001, aset: 0 },
            &GaussPoly::var(4, 2),
        );
        expect.add_term(
            TermKey { t: 0, mu: vec![0; 4], eset: 0b0010, aset: 0 },
            &GaussPoly::var(4, 3),
        );
        assert_eq!(theta, expect);
        assert!(s.star(&theta, &theta).unwrap().is_zero());
    }

    #[test]
    fn inner_derivation_matches_ghost_number() {
        let s = abelian_pair();
        let mut phi = AlgebraElement::zero(4, 4, OPEN_TRUNC);
        phi.add_term(
            TermKey { t: 0, mu: vec![0; 4], eset: 0b0001, aset: 0 },
            &GaussPoly::var(4, 0),
        );
        phi.add_term(
            TermKey { t: 0, mu: vec![0; 4], eset: 0b1100, aset: 0 },
            &GaussPoly::one(4),
        );
        phi.add_term(
            TermKey { t: 1, mu: vec![0; 4], eset: 0b0110, aset: 0 },
            &GaussPoly::var(4, 3),
        );
        let lhs = s.inner_ghost_number(&phi).unwrap();
        assert_eq!(lhs, apply_ghost_number(&phi, s.lie_dim));
    }

    #[test]
    fn abelian_q_of_coordinate() {
        // Θ = p·c on R², Q(x) = -c
        let s = QuantumBRSTSetup::new(
            1,
            vec![vec![vec![GaussRational::zero()]]],
            vec![GaussPoly::var(2, 1)],
        )
        .unwrap();
        let theta = s.charge().unwrap();
        let x = AlgebraElement::from_poly(&GaussPoly::var(2, 0), 2, OPEN_TRUNC);
        let qx = s.operator(&theta, &x).unwrap();
        let mut expect = AlgebraElement::zero(2, 2, OPEN_TRUNC);
        expect.add_term(
            TermKey { t: 0, mu: vec![0, 0], eset: 0b01, aset: 0 },
            &GaussPoly::constant(2, GaussRational::from_int(-1)),
        );
        assert_eq!(qx, expect);
        // Q(1) = 0 and Q² on x vanishes
        let one = AlgebraElement::one(2, 2, OPEN_TRUNC);
        assert!(s.operator(&theta, &one).unwrap().is_zero());
        assert!(s.operator(&theta, &qx).unwrap().is_zero());
    }

    #[test]
    fn so2_charge_checks() {
        // one-dimensional g with quadratic momentum map ½(x²+p²)
        let h = GaussPoly::monomial(2, vec![2, 0], GaussRational::from_ratio(1, 2))
            .checked_add(&GaussPoly::monomial(2, vec![0, 2], GaussRational::from_ratio(1, 2)))
            .unwrap();
        let s = QuantumBRSTSetup::new(1, vec![vec![vec![GaussRational::zero()]]], vec![h]).unwrap();
        let theta = s.charge().unwrap();
        assert!(s.star(&theta, &theta).unwrap().is_zero());
        let mut phi = AlgebraElement::zero(2, 2, OPEN_TRUNC);
        phi.add_term(
            TermKey { t: 0, mu: vec![0, 0], eset: 0b10, aset: 0 },
            &GaussPoly::var(2, 0),
        );
        let q1 = s.operator(&theta, &phi).unwrap();
        let q2 = s.operator(&theta, &q1).unwrap();
        assert!(q2.is_zero());
    }

    #[test]
    fn corrupted_structure_detected() {
        let mut st = vec![vec![vec![GaussRational::zero(); 2]; 2]; 2];
        st[0][0][1] = GaussRational::one(); // not antisymmetric
        let s = QuantumBRSTSetup::new(2, st, vec![GaussPoly::var(4, 2), GaussPoly::var(4, 3)]).unwrap();
        assert!(!s.validate().pass());
    }

    #[test]
    fn corrupted_momentum_map_detected() {
        // J = (p₁ + x², p₂) fails the abelian momentum-map condition
        let zero = || vec![vec![GaussRational::zero(); 2]; 2];
        let bad = GaussPoly::var(4, 2).checked_add(&GaussPoly::var(4, 1)).unwrap();
        let s = QuantumBRSTSetup::new(2, vec![zero(), zero()], vec![bad, GaussPoly::var(4, 3)]).unwrap();
        let rep = s.validate();
        assert!(!rep.pass());
        assert!(rep.failures().any(|c| c.name == "quantum momentum map"));
    }

    fn abelian_classical() -> ClassicalBRSTSetup {
        // J = (p₁, p₂) on R⁴; adapted coordinates (p₁, p₂, x¹, x²)
        let v = |i| GaussPoly::var(4, i);
        ClassicalBRSTSetup::new(
            2,
            vec![v(2), v(3)],
            vec![v(2), v(3), v(0), v(1)],
            vec![v(2), v(3), v(0), v(1)],
        )
        .unwrap()
    }

    fn twisted_classical() -> ClassicalBRSTSetup {
        // J₁ = p₁, J₂ = p₂ − x¹p₁ with {J₁,J₂} = J₁
        let v = |i| GaussPoly::var(4, i);
        let j2 = v(3).checked_sub(&v(0).checked_mul(&v(2)).unwrap()).unwrap();
        // y = (p₁, p₂ − x¹p₁, x¹, x²); inverse p₂ = y₂ + y₃y₁
        let back3 = v(1).checked_add(&v(2).checked_mul(&v(0)).unwrap()).unwrap();
        ClassicalBRSTSetup::new(
            2,
            vec![v(2), j2.clone()],
            vec![v(2), j2, v(0), v(1)],
            vec![v(2), v(3), v(0), back3],
        )
        .unwrap()
    }

    #[test]
    fn classical_setups_validate() {
        assert!(abelian_classical().validate().pass());
        assert!(twisted_classical().validate().pass());
    }

    #[test]
    fn koszul_identities() {
        let s = twisted_classical();
        let mut w = AlgebraElement::zero(4, 4, OPEN_TRUNC);
        // p₁·x² on b₁ plus a two-antighost term
        w.add_term(
            TermKey { t: 0, mu: vec![0; 4], eset: 0b0100, aset: 0 },
            &GaussPoly::var(4, 2)
                .checked_mul(&GaussPoly::var(4, 0))
                .unwrap()
                .checked_mul(&GaussPoly::var(4, 0))
                .unwrap(),
        );
        w.add_term(
            TermKey { t: 0, mu: vec![0; 4], eset: 0b1100, aset: 0 },
            &GaussPoly::var(4, 1),
        );
        let dd = s.koszul_boundary(&s.koszul_boundary(&w).unwrap()).unwrap();
        assert!(dd.is_zero());
        let hh = s.koszul_homotopy(&s.koszul_homotopy(&w).unwrap()).unwrap();
        assert!(hh.is_zero());
        let lhs = s
            .koszul_boundary(&s.koszul_homotopy(&w).unwrap())
            .unwrap()
            .add(&s.koszul_homotopy(&s.koszul_boundary(&w).unwrap()).unwrap());
        let expect = w.sub(&s.koszul_restriction(&w).unwrap());
        assert_eq!(lhs, expect);
    }

    #[test]
    fn abelian_probe_matches_enumeration() {
        // frozen from an independent exact enumeration of
        // Q = -c¹∂_{x¹} - c²∂_{x²} + p₁i(b₁) + p₂i(b₂) at weight ≤ 2
        let s = abelian_classical();
        let theta = s.charge().unwrap();
        let rows = s.cohomology_probe(&theta, 2).unwrap();
        let expect = [
            (-2, 1, 1, 0),
            (-1, 12, 11, 0),
            (0, 36, 24, 1),
            (1, 40, 12, 4),
            (2, 15, 0, 3),
        ];
        assert_eq!(rows.len(), expect.len());
        for (row, (g, d, r, c)) in rows.iter().zip(expect) {
            assert!(row.closed);
            assert_eq!((row.ghost_number, row.dimension, row.rank, row.cohomology), (g, d, r, c));
        }
    }

    #[test]
    fn abelian_charge_closes_immediately() {
        let s = abelian_classical();
        let theta = s.charge().unwrap();
        for (k, _) in theta.terms() {
            assert_eq!(antighost_degree(k.eset, 2), 0);
        }
        assert!(rothstein_bracket(&s.geom, &theta, &theta).unwrap().is_zero());
    }

    #[test]
    fn twisted_charge_gains_structure_term() {
        let s = twisted_classical();
        let theta = s.charge().unwrap();
        assert!(rothstein_bracket(&s.geom, &theta, &theta).unwrap().is_zero());
        let t1 = antighost_component(&theta, 2, 1);
        assert!(!t1.is_zero());
        // the correction carries c¹∧c²∧b₁
        for (k, _) in t1.terms() {
            assert_eq!(k.eset & 0b0011, 0b0011);
            assert_eq!(antighost_degree(k.eset, 2), 1);
        }
        // Q² = 0 on a probe
        let mut phi = AlgebraElement::zero(4, 4, OPEN_TRUNC);
        phi.add_term(
            TermKey { t: 0, mu: vec![0; 4], eset: 0b0101, aset: 0 },
            &GaussPoly::var(4, 0),
        );
        let q1 = s.operator(&theta, &phi).unwrap();
        let q2 = s.operator(&theta, &q1).unwrap();
        assert!(q2.is_zero());
    }
}
