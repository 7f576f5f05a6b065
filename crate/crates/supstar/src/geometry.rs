//! Chart-level geometric input: the symplectic form and Poisson tensor, the
//! symplectic connection on the base, the metric connection on the bundle,
//! validation of all compatibility conditions, the covariant derivative on
//! the Fedosov algebra, and the curvature elements.

use serde::Deserialize;

use crate::error::Error;
use crate::report::Report;
use crate::scalars::{GaussPoly, GaussRational};
use crate::superalgebra::{remove_front, wedge_front, AlgebraElement, TermKey};

pub type PolyMatrix = Vec<Vec<GaussPoly>>;
pub type PolyCube = Vec<Vec<Vec<GaussPoly>>>;

/// The geometric input on a chart: `omega[i][j]` and `lambda[i][j]` with
/// `Λ^{ik} ω_{jk} = δ^i_j`, Christoffel symbols `gamma[k][i][j]` of the
/// symplectic connection (`∇_{∂_i} ∂_j = Γ^k_{ij} ∂_k`), bundle connection
/// coefficients `aconn[b][i][a]` (`∇^E_{∂_i} e_a = aconn[b][i][a] e_b`), and
/// the fibre metric `q` with its supplied inverse.
#[derive(Clone)]
pub struct ChartGeometry {
    pub dim: usize,
    pub rank: usize,
    pub omega: PolyMatrix,
    pub lambda: PolyMatrix,
    pub gamma: PolyCube,
    pub aconn: PolyCube,
    pub q: PolyMatrix,
    pub qinv: PolyMatrix,
}

pub fn zero_matrix(dim: usize, rows: usize, cols: usize) -> PolyMatrix {
    vec![vec![GaussPoly::zero(dim); cols]; rows]
}

pub fn zero_cube(dim: usize, a: usize, b: usize, c: usize) -> PolyCube {
    vec![vec![vec![GaussPoly::zero(dim); c]; b]; a]
}

pub fn identity_matrix(dim: usize, n: usize) -> PolyMatrix {
    let mut m = zero_matrix(dim, n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = GaussPoly::one(dim);
    }
    m
}

impl ChartGeometry {
    /// The standard chart on `R^{2m}` with coordinates
    /// `(x^1..x^m, p_1..p_m)`, constant symplectic form, flat connections,
    /// and the supplied constant fibre metric.
    pub fn darboux(m: usize, q: PolyMatrix) -> ChartGeometry {
        let dim = 2 * m;
        let rank = q.len();
        let one = GaussPoly::one(dim);
        let mut omega = zero_matrix(dim, dim, dim);
        let mut lambda = zero_matrix(dim, dim, dim);
        for i in 0..m {
            omega[i][m + i] = one.clone();
            omega[m + i][i] = -&one;
            lambda[i][m + i] = one.clone();
            lambda[m + i][i] = -&one;
        }
        let qinv = invert_constant_matrix(&q).expect("fibre metric not invertible");
        ChartGeometry {
            dim,
            rank,
            omega,
            lambda,
            gamma: zero_cube(dim, dim, dim, dim),
            aconn: zero_cube(dim, rank, dim, rank),
            q,
            qinv,
        }
    }

    /// Darboux chart with the rank-`n` identity fibre metric.
    pub fn darboux_trivial(m: usize, n: usize) -> ChartGeometry {
        ChartGeometry::darboux(m, identity_matrix(2 * m, n))
    }

    /// A rank-2 chart on the plane with nonzero base and bundle curvature:
    /// the symplectic connection has the totally symmetric component
    /// `Γ_{112} = x¹`, and the metric bundle connection is generated by
    /// `∇ᴱ_{∂₂}e₁ = x¹ e₂`.
    pub fn curved_example() -> ChartGeometry {
        let mut g = ChartGeometry::darboux_trivial(1, 2);
        let x = GaussPoly::var(2, 0);
        g.gamma[1][0][1] = x.clone();
        g.gamma[1][1][0] = x.clone();
        g.gamma[0][0][0] = -&x;
        g.aconn[1][1][0] = x.clone();
        g.aconn[0][1][1] = -&x;
        g
    }

    pub fn is_flat_e(&self) -> bool {
        self.aconn
            .iter()
            .flatten()
            .flatten()
            .all(|p| p.is_zero())
    }

    pub fn q_is_constant(&self) -> bool {
        self.q.iter().flatten().all(|p| p.total_degree() == 0)
    }

    /// Check every structural invariant exactly; the report lists each check
    /// with the first offending component.
    pub fn validate(&self) -> Report {
        let mut rep = Report::new();
        let d = self.dim;
        let n = self.rank;

        let shapes_ok = self.omega.len() == d
            && self.omega.iter().all(|r| r.len() == d)
            && self.lambda.len() == d
            && self.lambda.iter().all(|r| r.len() == d)
            && self.gamma.len() == d
            && self.gamma.iter().all(|r| r.len() == d && r.iter().all(|c| c.len() == d))
            && self.aconn.len() == n
            && self.aconn.iter().all(|r| r.len() == d && r.iter().all(|c| c.len() == n))
            && self.q.len() == n
            && self.q.iter().all(|r| r.len() == n)
            && self.qinv.len() == n
            && self.qinv.iter().all(|r| r.len() == n);
        rep.record("shapes", shapes_ok, if shapes_ok { "" } else { "array shape mismatch" });
        if !shapes_ok {
            return rep;
        }

        check_all(&mut rep, "omega antisymmetry", (0..d).flat_map(|i| (0..d).map(move |j| (i, j))), |(i, j)| {
            ((&self.omega[i][j] + &self.omega[j][i]).is_zero(), format!("(i,j)=({},{})", i + 1, j + 1))
        });
        check_all(&mut rep, "lambda antisymmetry", (0..d).flat_map(|i| (0..d).map(move |j| (i, j))), |(i, j)| {
            ((&self.lambda[i][j] + &self.lambda[j][i]).is_zero(), format!("(i,j)=({},{})", i + 1, j + 1))
        });
        check_all(&mut rep, "lambda inverse to omega", (0..d).flat_map(|i| (0..d).map(move |j| (i, j))), |(i, j)| {
            let mut s = GaussPoly::zero(d);
            for k in 0..d {
                s += &(&self.lambda[i][k] * &self.omega[j][k]);
            }
            let expect = if i == j { GaussPoly::one(d) } else { GaussPoly::zero(d) };
            ((&s - &expect).is_zero(), format!("(i,j)=({},{})", i + 1, j + 1))
        });
        check_all(&mut rep, "torsion-free", (0..d).flat_map(|k| (0..d).flat_map(move |i| (0..d).map(move |j| (k, i, j)))), |(k, i, j)| {
            ((&self.gamma[k][i][j] - &self.gamma[k][j][i]).is_zero(), format!("(k,i,j)=({},{},{})", k + 1, i + 1, j + 1))
        });
        check_all(&mut rep, "nabla omega = 0", (0..d).flat_map(|i| (0..d).flat_map(move |j| (0..d).map(move |k| (i, j, k)))), |(i, j, k)| {
            (self.nabla_omega(i, j, k).is_zero(), format!("(i,j,k)=({},{},{})", i + 1, j + 1, k + 1))
        });
        check_all(&mut rep, "q symmetry", (0..n).flat_map(|a| (0..n).map(move |b| (a, b))), |(a, b)| {
            ((&self.q[a][b] - &self.q[b][a]).is_zero(), format!("(A,B)=({},{})", a + 1, b + 1))
        });
        check_all(&mut rep, "q inverse", (0..n).flat_map(|a| (0..n).map(move |b| (a, b))), |(a, b)| {
            let mut s = GaussPoly::zero(d);
            for c in 0..n {
                s += &(&self.q[a][c] * &self.qinv[c][b]);
            }
            let expect = if a == b { GaussPoly::one(d) } else { GaussPoly::zero(d) };
            ((&s - &expect).is_zero(), format!("(A,B)=({},{})", a + 1, b + 1))
        });
        check_all(&mut rep, "nabla q = 0", (0..d).flat_map(|i| (0..n).flat_map(move |a| (0..n).map(move |b| (i, a, b)))), |(i, a, b)| {
            (self.nabla_q(i, a, b).is_zero(), format!("(i,A,B)=({},{},{})", i + 1, a + 1, b + 1))
        });
        rep
    }

    /// `(∇_{∂_i} ω)_{jk}`.
    fn nabla_omega(&self, i: usize, j: usize, k: usize) -> GaussPoly {
        let mut s = self.omega[j][k].partial(i).expect("index");
        for l in 0..self.dim {
            s -= &(&self.gamma[l][i][j] * &self.omega[l][k]);
            s -= &(&self.gamma[l][i][k] * &self.omega[j][l]);
        }
        s
    }

    /// `(∇^E_{∂_i} q)_{AB}`.
    fn nabla_q(&self, i: usize, a: usize, b: usize) -> GaussPoly {
        let mut s = self.q[a][b].partial(i).expect("index");
        for c in 0..self.rank {
            s -= &(&self.aconn[c][i][a] * &self.q[c][b]);
            s -= &(&self.aconn[c][i][b] * &self.q[a][c]);
        }
        s
    }

    /// The covariant derivative on the Fedosov algebra: per term, the sum
    /// over `i` of `dx^i` front-wedged into the form factor of the
    /// coefficient derivative plus the Christoffel and bundle-connection
    /// corrections.
    pub fn nabla(&self, f: &AlgebraElement) -> AlgebraElement {
        let mut out = AlgebraElement::zero(f.dim(), f.rank(), f.trunc());
        for (key, coeff) in f.terms() {
            for i in 0..self.dim {
                let Some((aset, wsign)) = wedge_front(key.aset, i) else {
                    continue;
                };
                let ws = GaussRational::from_int(wsign as i64);
                // plain coefficient derivative
                let dc = coeff.partial(i).expect("index");
                out.add_term(
                    TermKey { t: key.t, mu: key.mu.clone(), eset: key.eset, aset },
                    &dc.scale(&ws),
                );
                // ∇^M_{∂_i} dx^j = -Γ^j_{ik} dx^k on each symmetric slot
                for j in 0..self.dim {
                    if key.mu[j] == 0 {
                        continue;
                    }
                    let mult = GaussRational::from_int(key.mu[j] as i64);
                    for k in 0..self.dim {
                        let g = &self.gamma[j][i][k];
                        if g.is_zero() {
                            continue;
                        }
                        let mut mu = key.mu.clone();
                        mu[j] -= 1;
                        mu[k] += 1;
                        let c = coeff.checked_mul(g).expect("dim").scale(&(&mult * &ws));
                        out.add_term(
                            TermKey { t: key.t, mu, eset: key.eset, aset },
                            &-&c,
                        );
                    }
                }
                // ∇^E_{∂_i} e^A = -aconn[A][i][B] e^B on each E slot
                for a in 0..self.rank {
                    if key.eset & (1 << a) == 0 {
                        continue;
                    }
                    for b in 0..self.rank {
                        let conn = &self.aconn[a][i][b];
                        if conn.is_zero() {
                            continue;
                        }
                        let Some((rest, s1)) = remove_front(key.eset, a) else {
                            continue;
                        };
                        let Some((eset, s2)) = wedge_front(rest, b) else {
                            continue;
                        };
                        let s = GaussRational::from_int((s1 * s2 * wsign) as i64);
                        let c = coeff.checked_mul(conn).expect("dim").scale(&s);
                        out.add_term(
                            TermKey { t: key.t, mu: key.mu.clone(), eset, aset },
                            &-&c,
                        );
                    }
                }
            }
        }
        out
    }

    /// `∇^E_{∂_k}` of an E-type element (no symmetric or form factor):
    /// coefficient derivative plus bundle-connection corrections, no wedged
    /// `dx^k`.
    pub fn nabla_e(&self, phi: &AlgebraElement, k: usize) -> AlgebraElement {
        let mut out = AlgebraElement::zero(phi.dim(), phi.rank(), phi.trunc());
        for (key, coeff) in phi.terms() {
            debug_assert_eq!(key.sym_degree() + key.a_degree(), 0);
            out.add_term(key.clone(), &coeff.partial(k).expect("index"));
            for a in 0..self.rank {
                if key.eset & (1 << a) == 0 {
                    continue;
                }
                for b in 0..self.rank {
                    let conn = &self.aconn[a][k][b];
                    if conn.is_zero() {
                        continue;
                    }
                    let Some((rest, s1)) = remove_front(key.eset, a) else {
                        continue;
                    };
                    let Some((eset, s2)) = wedge_front(rest, b) else {
                        continue;
                    };
                    let c = coeff
                        .checked_mul(conn)
                        .expect("dim")
                        .scale(&GaussRational::from_int((s1 * s2) as i64));
                    out.add_term(
                        TermKey { t: key.t, mu: key.mu.clone(), eset, aset: key.aset },
                        &-&c,
                    );
                }
            }
        }
        out
    }

    /// Base curvature components `R^u_{lij}` with
    /// `R(∂_i,∂_j)∂_l = R^u_{lij} ∂_u`.
    pub fn riemann_m(&self, u: usize, l: usize, i: usize, j: usize) -> GaussPoly {
        let mut s = self.gamma[u][j][l].partial(i).expect("index");
        s -= &self.gamma[u][i][l].partial(j).expect("index");
        for k in 0..self.dim {
            s += &(&self.gamma[u][i][k] * &self.gamma[k][j][l]);
            s -= &(&self.gamma[u][j][k] * &self.gamma[k][i][l]);
        }
        s
    }

    /// Bundle curvature components `(R^E)^B_{Aij}` with
    /// `R^E(∂_i,∂_j) e_A = (R^E)^B_{Aij} e_B`.
    pub fn riemann_e(&self, b: usize, a: usize, i: usize, j: usize) -> GaussPoly {
        let mut s = self.aconn[b][j][a].partial(i).expect("index");
        s -= &self.aconn[b][i][a].partial(j).expect("index");
        for c in 0..self.rank {
            s += &(&self.aconn[b][i][c] * &self.aconn[c][j][a]);
            s -= &(&self.aconn[b][j][c] * &self.aconn[c][i][a]);
        }
        s
    }

    /// The curvature elements of the Fedosov algebra at truncation `trunc`.
    pub fn curvature(&self, trunc: u32) -> CurvatureData {
        let d = self.dim;
        let n = self.rank;
        let quarter = GaussRational::from_ratio(1, 4);
        let mut rm = AlgebraElement::zero(d, n, trunc);
        for k in 0..d {
            for l in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        if i == j {
                            continue;
                        }
                        // R^{(M)}_{klij} = ω_{ku} R^u_{lij}
                        let mut comp = GaussPoly::zero(d);
                        for u in 0..d {
                            comp += &(&self.omega[k][u] * &self.riemann_m(u, l, i, j));
                        }
                        if comp.is_zero() {
                            continue;
                        }
                        let (aset, s1) = wedge_front(1 << j, i).expect("distinct");
                        let mut mu = vec![0; d];
                        mu[k] += 1;
                        mu[l] += 1;
                        let c = comp.scale(&(&quarter * &GaussRational::from_int(s1 as i64)));
                        rm.add_term(TermKey { t: 0, mu, eset: 0, aset }, &c);
                    }
                }
            }
        }
        let mut re = AlgebraElement::zero(d, n, trunc);
        for a in 0..n {
            for b in 0..n {
                if a == b {
                    continue;
                }
                for i in 0..d {
                    for j in 0..d {
                        if i == j {
                            continue;
                        }
                        // R^{(E)}_{ABij} = -q_{AC} (R^E)^C_{Bij}
                        let mut comp = GaussPoly::zero(d);
                        for c in 0..n {
                            comp -= &(&self.q[a][c] * &self.riemann_e(c, b, i, j));
                        }
                        if comp.is_zero() {
                            continue;
                        }
                        let (eset, s1) = wedge_front(1 << b, a).expect("distinct");
                        let (aset, s2) = wedge_front(1 << j, i).expect("distinct");
                        let c = comp.scale(&(&quarter * &GaussRational::from_int((s1 * s2) as i64)));
                        re.add_term(TermKey { t: 0, mu: vec![0; d], eset, aset }, &c);
                    }
                }
            }
        }
        let total = rm.add(&re);
        CurvatureData { rm, re, total }
    }
}

fn check_all<I, T>(rep: &mut Report, name: &str, items: I, f: impl Fn(T) -> (bool, String))
where
    I: IntoIterator<Item = T>,
{
    for item in items {
        let (ok, detail) = f(item);
        if !ok {
            rep.record(name, false, format!("first failure at {detail}"));
            return;
        }
    }
    rep.record(name, true, "");
}

/// The curvature elements: base part in `∨²T*M ⊗ Λ²T*M`, bundle part in
/// `Λ²E* ⊗ Λ²T*M`, and their sum.
#[derive(Clone)]
pub struct CurvatureData {
    pub rm: AlgebraElement,
    pub re: AlgebraElement,
    pub total: AlgebraElement,
}

/// Invert a matrix of constant polynomials exactly.
pub fn invert_constant_matrix(m: &PolyMatrix) -> Result<PolyMatrix, Error> {
    let n = m.len();
    let dim = m.first().and_then(|r| r.first()).map(|p| p.dim()).unwrap_or(0);
    let mut a: Vec<Vec<GaussRational>> = Vec::with_capacity(n);
    for row in m {
        if row.len() != n {
            return Err(Error::Geometry("matrix not square".into()));
        }
        let mut r = Vec::with_capacity(2 * n);
        for p in row {
            if p.total_degree() != 0 {
                return Err(Error::Geometry("matrix not constant".into()));
            }
            r.push(p.constant_term());
        }
        a.push(r);
    }
    let mut inv: Vec<Vec<GaussRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { GaussRational::one() } else { GaussRational::zero() })
                .collect()
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::Geometry("singular matrix".into()))?;
        a.swap(col, pivot);
        inv.swap(col, pivot);
        let pinv = a[col][col].inv().expect("nonzero pivot");
        for j in 0..n {
            a[col][j] = &a[col][j] * &pinv;
            inv[col][j] = &inv[col][j] * &pinv;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let t = &f * &a[col][j];
                a[r][j] = &a[r][j] - &t;
                let t = &f * &inv[col][j];
                inv[r][j] = &inv[r][j] - &t;
            }
        }
    }
    Ok(inv
        .into_iter()
        .map(|row| row.into_iter().map(|c| GaussPoly::constant(dim, c)).collect())
        .collect())
}

/// Hess's formula: make a torsion-free connection symplectic,
/// `ω(∇_X Y, Z) = ω(∇̃_X Y, Z) + ⅓(∇̃_X ω)(Y,Z) + ⅓(∇̃_Y ω)(X,Z)`.
pub fn hess_symplectrize(
    gtilde: &PolyCube,
    omega: &PolyMatrix,
    lambda: &PolyMatrix,
) -> Result<PolyCube, Error> {
    let d = omega.len();
    let dim = omega
        .first()
        .and_then(|r| r.first())
        .map(|p| p.dim())
        .ok_or_else(|| Error::Geometry("empty omega".into()))?;
    let nab = |i: usize, j: usize, k: usize| -> Result<GaussPoly, Error> {
        // (∇̃_{∂_i} ω)_{jk}
        let mut s = omega[j][k].partial(i)?;
        for l in 0..d {
            s -= &(&gtilde[l][i][j] * &omega[l][k]);
            s -= &(&gtilde[l][i][k] * &omega[j][l]);
        }
        Ok(s)
    };
    let third = GaussRational::from_ratio(1, 3);
    let mut gamma = zero_cube(dim, d, d, d);
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                // ω_{lk} Γ^l_{ij} = rhs_{ijk}
                let mut rhs = GaussPoly::zero(dim);
                for l in 0..d {
                    rhs += &(&omega[l][k] * &gtilde[l][i][j]);
                }
                rhs += &nab(i, j, k)?.scale(&third);
                rhs += &nab(j, i, k)?.scale(&third);
                // Γ^m_{ij} = Λ^{mk} rhs_{ijk}
                for (m, g) in gamma.iter_mut().enumerate() {
                    g[i][j] += &(&lambda[m][k] * &rhs);
                }
            }
        }
    }
    Ok(gamma)
}

/// Make a bundle connection metric,
/// `q(∇_X e_1, e_2) = q(∇̃_X e_1, e_2) + ½(∇̃_X q)(e_1, e_2)`.
pub fn make_metric_connection(
    atilde: &PolyCube,
    q: &PolyMatrix,
    qinv: &PolyMatrix,
) -> Result<PolyCube, Error> {
    let n = q.len();
    let dim = q
        .first()
        .and_then(|r| r.first())
        .map(|p| p.dim())
        .ok_or_else(|| Error::Geometry("empty q".into()))?;
    let d = dim;
    let half = GaussRational::from_ratio(1, 2);
    let mut aconn = zero_cube(dim, n, d, n);
    for i in 0..d {
        for a in 0..n {
            for b in 0..n {
                // rhs_{iab} = q(∇_{∂_i} e_a, e_b)
                let mut rhs = GaussPoly::zero(dim);
                for c in 0..n {
                    rhs += &(&atilde[c][i][a] * &q[c][b]);
                }
                // ½ (∇̃_{∂_i} q)(e_a, e_b)
                let mut nq = q[a][b].partial(i)?;
                for c in 0..n {
                    nq -= &(&atilde[c][i][a] * &q[c][b]);
                    nq -= &(&atilde[c][i][b] * &q[a][c]);
                }
                rhs += &nq.scale(&half);
                // a^m_{ia} = q^{mb} rhs_{iab}
                for (m, ac) in aconn.iter_mut().enumerate() {
                    ac[i][a] += &(&qinv[m][b] * &rhs);
                }
            }
        }
    }
    Ok(aconn)
}

// JSON: {dim_m, rank_n, omega, lambda, gamma, aconn, q, qinv}.
#[derive(Deserialize)]
struct JsonGeometry {
    dim_m: usize,
    rank_n: usize,
    omega: serde_json::Value,
    lambda: serde_json::Value,
    gamma: serde_json::Value,
    aconn: serde_json::Value,
    q: serde_json::Value,
    qinv: serde_json::Value,
}

fn matrix_from_json(v: &serde_json::Value, dim: usize) -> Result<PolyMatrix, Error> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Parse("expected matrix".into()))?;
    rows.iter()
        .map(|row| {
            let cols = row
                .as_array()
                .ok_or_else(|| Error::Parse("expected matrix row".into()))?;
            cols.iter().map(|p| GaussPoly::from_json(p, dim)).collect()
        })
        .collect()
}

fn cube_from_json(v: &serde_json::Value, dim: usize) -> Result<PolyCube, Error> {
    let slices = v
        .as_array()
        .ok_or_else(|| Error::Parse("expected 3d array".into()))?;
    slices.iter().map(|s| matrix_from_json(s, dim)).collect()
}

fn matrix_to_json(m: &PolyMatrix) -> serde_json::Value {
    serde_json::to_value(m).expect("matrix serialization")
}

impl ChartGeometry {
    pub fn from_json(v: &serde_json::Value) -> Result<ChartGeometry, Error> {
        let raw: JsonGeometry = serde_json::from_value(v.clone())
            .map_err(|e| Error::Parse(format!("bad geometry: {e}")))?;
        let dim = raw.dim_m;
        Ok(ChartGeometry {
            dim,
            rank: raw.rank_n,
            omega: matrix_from_json(&raw.omega, dim)?,
            lambda: matrix_from_json(&raw.lambda, dim)?,
            gamma: cube_from_json(&raw.gamma, dim)?,
            aconn: cube_from_json(&raw.aconn, dim)?,
            q: matrix_from_json(&raw.q, dim)?,
            qinv: matrix_from_json(&raw.qinv, dim)?,
        })
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dim_m": self.dim,
            "rank_n": self.rank,
            "omega": matrix_to_json(&self.omega),
            "lambda": matrix_to_json(&self.lambda),
            "gamma": serde_json::to_value(&self.gamma).expect("gamma"),
            "aconn": serde_json::to_value(&self.aconn).expect("aconn"),
            "q": matrix_to_json(&self.q),
            "qinv": matrix_to_json(&self.qinv),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalars::GaussPoly;

    #[test]
    fn darboux_validates() {
        let g = ChartGeometry::darboux_trivial(1, 1);
        let rep = g.validate();
        assert!(rep.pass(), "{rep}");
    }

    #[test]
    fn broken_omega_flagged() {
        let mut g = ChartGeometry::darboux_trivial(1, 1);
        g.omega[0][0] = GaussPoly::one(2);
        let rep = g.validate();
        assert!(!rep.pass());
        assert!(rep.failures().any(|c| c.name == "omega antisymmetry"));
    }

    #[test]
    fn torsion_flagged() {
        let mut g = ChartGeometry::darboux_trivial(1, 1);
        g.gamma[0][0][1] = GaussPoly::one(2);
        let rep = g.validate();
        assert!(rep.failures().any(|c| c.name == "torsion-free"));
    }

    #[test]
    fn flat_nabla_of_coordinate() {
        let g = ChartGeometry::darboux_trivial(1, 1);
        let x = AlgebraElement::from_poly(&GaussPoly::var(2, 0), 1, 6);
        let nx = g.nabla(&x);
        // dx^1 as a form
        let mut expect = AlgebraElement::zero(2, 1, 6);
        expect.add_term(
            TermKey { t: 0, mu: vec![0, 0], eset: 0, aset: 1 },
            &GaussPoly::one(2),
        );
        assert_eq!(nx, expect);
        let c = AlgebraElement::one(2, 1, 6);
        assert!(g.nabla(&c).is_zero());
    }

    #[test]
    fn flat_curvature_vanishes() {
        let g = ChartGeometry::darboux_trivial(2, 2);
        let c = g.curvature(8);
        assert!(c.total.is_zero());
    }

    #[test]
    fn hess_is_projection() {
        // already-symplectic input is a fixed point; flat input stays flat
        let g = ChartGeometry::darboux_trivial(1, 1);
        let out = hess_symplectrize(&g.gamma, &g.omega, &g.lambda).unwrap();
        assert_eq!(out, g.gamma);
    }

    #[test]
    fn metric_connection_fixed_point() {
        let g = ChartGeometry::darboux_trivial(1, 2);
        let out = make_metric_connection(&g.aconn, &g.q, &g.qinv).unwrap();
        assert_eq!(out, g.aconn);
    }

    #[test]
    fn hess_repairs_nonconstant_omega() {
        // ω = (1+x¹) dx¹∧dx², Λ = 1/(1+x¹)·(...) is not polynomial, so use
        // a chart where ω has polynomial inverse: ω₁₂ = 1 + x¹ has none;
        // instead take ω₁₂ = 1 and a nonflat Γ̃ and check the output stays
        // symplectic.
        let dim = 2;
        let mut gt = zero_cube(dim, dim, dim, dim);
        gt[0][0][0] = GaussPoly::var(dim, 1); // Γ̃^1_{11} = p
        let base = ChartGeometry::darboux_trivial(1, 1);
        let gamma = hess_symplectrize(&gt, &base.omega, &base.lambda).unwrap();
        let g = ChartGeometry { gamma, ..base };
        let rep = g.validate();
        assert!(rep.pass(), "{rep}");
    }

    #[test]
    fn metric_connection_repairs_varying_q() {
        // rank-1 E over R², q₁₁ = 1 + (x¹)²·0 + ... use q = 1 + x¹ q is
        // invertible as a metric but not polynomially; compatibility only
        // needs ∇q = 0, which the formula achieves for any q with supplied
        // qinv on the chart where qinv stays polynomial. Use constant qinv
        // case q = 2.
        let dim = 2;
        let two = GaussPoly::constant(dim, GaussRational::from_int(2));
        let q = vec![vec![two]];
        let qinv = vec![vec![GaussPoly::constant(dim, GaussRational::from_ratio(1, 2))]];
        let atilde = zero_cube(dim, 1, dim, 1);
        let aconn = make_metric_connection(&atilde, &q, &qinv).unwrap();
        let base = ChartGeometry::darboux_trivial(1, 1);
        let g = ChartGeometry { aconn, q, qinv, rank: 1, ..base };
        assert!(g.validate().pass());
    }

    #[test]
    fn json_roundtrip() {
        let g = ChartGeometry::darboux_trivial(2, 2);
        let v = g.to_json();
        let h = ChartGeometry::from_json(&v).unwrap();
        assert!(h.validate().pass());
        assert_eq!(g.omega, h.omega);
    }
}
