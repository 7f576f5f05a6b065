//! Compile-and-run copies of the code blocks in the guide under
//! book/src/. If a guide snippet drifts from the library API, this
//! target is what catches it.

#![allow(unused)]

#[test]
fn algebra_snippet_0() {
    use supstar::scalars::GaussPoly;
    use supstar::superalgebra::{AlgebraElement, TermKey};

    // x¹ dy² ∧ dx¹ on a 2-dimensional chart with a rank-1 bundle
    let mut w = AlgebraElement::zero(2, 1, 6);
    w.add_term(
        TermKey { t: 0, mu: vec![0, 1], eset: 0, aset: 0b01 },
        &GaussPoly::var(2, 0),
    );
    assert_eq!(w.num_terms(), 1);
}

#[test]
fn algebra_snippet_1() {
    use supstar::geometry::ChartGeometry;
    use supstar::suites::algebra_suite;

    let g = ChartGeometry::darboux_trivial(1, 1);
    assert!(algebra_suite(&g, 6, 42, 10).pass());
}

#[test]
fn brst_snippet_0() {
    use supstar::brst::QuantumBRSTSetup;
    use supstar::scalars::{GaussPoly, GaussRational};

    // one constraint J = p on the plane, trivial structure constants
    let s = QuantumBRSTSetup::new(
        1,
        vec![vec![vec![GaussRational::zero()]]],
        vec![GaussPoly::var(2, 1)],
    ).unwrap();
    assert!(s.validate().pass());
    let theta = s.charge().unwrap();
    assert!(s.star(&theta, &theta).unwrap().is_zero());
}

#[test]
fn brst_snippet_1() {
    use supstar::brst::ClassicalBRSTSetup;
    use supstar::scalars::GaussPoly;

    let v = |i| GaussPoly::var(4, i);
    let s = ClassicalBRSTSetup::new(
        2,
        vec![v(2), v(3)],                  // J = (p₁, p₂)
        vec![v(2), v(3), v(0), v(1)],      // adapted coordinates
        vec![v(2), v(3), v(0), v(1)],      // and their inverse
    ).unwrap();
    assert!(s.validate().pass());
    let theta = s.charge().unwrap();
    let bracket = supstar::fedosov::rothstein_bracket(&s.geom, &theta, &theta).unwrap();
    assert!(bracket.is_zero());
}

#[test]
fn fedosov_snippet_0() {
    use supstar::fedosov::FedosovState;
    use supstar::geometry::ChartGeometry;

    let g = ChartGeometry::curved_example();
    let state = FedosovState::build(g, 6).unwrap();
    let r = state.r();
    assert!(r.delta_inv().is_zero());   // normalization δ⁻¹r = 0
    assert_eq!(r.conj(), *r);           // r is real
    assert_eq!(r.parity_lambda(), *r);  // r depends only on λ²
}

#[test]
fn fedosov_snippet_1() {
    use supstar::fedosov::FedosovState;
    use supstar::geometry::ChartGeometry;
    use supstar::scalars::GaussPoly;
    use supstar::superalgebra::AlgebraElement;

    let g = ChartGeometry::darboux_trivial(1, 1);
    let state = FedosovState::build(g, 6).unwrap();
    let x = AlgebraElement::from_poly(&GaussPoly::var(2, 0), 1, 6);
    let tau = state.taylor(&x).unwrap();
    // flat chart: τ(x) = x + dy¹, and D kills it
    assert_eq!(tau.num_terms(), 2);
    assert_eq!(tau.sigma_c(), x.retruncate(tau.trunc()));
}

#[test]
fn fibrewise_snippet_0() {
    use supstar::fibrewise::circ;
    use supstar::geometry::ChartGeometry;
    use supstar::scalars::GaussPoly;
    use supstar::superalgebra::{AlgebraElement, TermKey};

    let g = ChartGeometry::darboux_trivial(1, 1);
    let mut dy = AlgebraElement::zero(2, 1, 6);
    dy.add_term(TermKey { t: 0, mu: vec![1, 0], eset: 0, aset: 0 }, &GaussPoly::one(2));
    let mut dp = AlgebraElement::zero(2, 1, 6);
    dp.add_term(TermKey { t: 0, mu: vec![0, 1], eset: 0, aset: 0 }, &GaussPoly::one(2));

    // dy ∘ dp − dp ∘ dy = iλ·Λ^{12} on Darboux data
    let comm = circ(&g, &dy, &dp).unwrap().sub(&circ(&g, &dp, &dy).unwrap());
    assert_eq!(comm.num_terms(), 1);
}

#[test]
fn scalars_snippet_0() {
    use supstar::scalars::GaussRational;

    let a = GaussRational::from_ratio(3, 4);
    let i = GaussRational::i();
    let b = &a + &(&i * &a);          // 3/4 + (3/4)i
    assert_eq!(b.conj(), &a - &(&i * &a));
    assert_eq!(&(&i * &i) * &a, -&a); // i² = −1
}

#[test]
fn scalars_snippet_1() {
    use supstar::scalars::{GaussPoly, GaussRational};

    let x = GaussPoly::var(2, 0);
    let p = GaussPoly::var(2, 1);
    let f = &(&x * &x) + &p;           // x² + p
    assert_eq!(f.partial(0).unwrap(), x.scale(&GaussRational::from_int(2)));
}

#[test]
fn star_bracket_snippet_0() {
    use supstar::fedosov::{extract_mt, FedosovState};
    use supstar::geometry::ChartGeometry;
    use supstar::scalars::GaussPoly;
    use supstar::superalgebra::AlgebraElement;

    let g = ChartGeometry::darboux_trivial(1, 1);
    let k = FedosovState::required_trunc(1, 1);
    let state = FedosovState::build(g, k).unwrap();
    let x = AlgebraElement::from_poly(&GaussPoly::var(2, 0), 1, k);
    let p = AlgebraElement::from_poly(&GaussPoly::var(2, 1), 1, k);

    // x ∗ p − p ∗ x = iλ, exactly
    let comm = state.star(&x, &p, 1).unwrap().sub(&state.star(&p, &x, 1).unwrap());
    assert_eq!(comm.num_terms(), 1);

    // the coefficient table: φ ∗ ψ = Σ_t (iλ/2)^t M_t(φ, ψ)
    let mts = extract_mt(&state.star(&x, &p, 1).unwrap(), 1);
    assert_eq!(mts.len(), 2); // M_0 = x·p, M_1 = the pairing term
}

#[test]
fn star_bracket_snippet_1() {
    use supstar::fedosov::rothstein_bracket_both;
    use supstar::geometry::ChartGeometry;
    use supstar::scalars::GaussPoly;
    use supstar::superalgebra::AlgebraElement;

    let g = ChartGeometry::curved_example();
    let f = AlgebraElement::from_poly(&GaussPoly::var(2, 0), 2, 8);
    let h = AlgebraElement::from_poly(&GaussPoly::var(2, 1), 2, 8);
    let (two_factor, one_factor) = rothstein_bracket_both(&g, &f, &h).unwrap();
    assert_eq!(two_factor, one_factor);
}
