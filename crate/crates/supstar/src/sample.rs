//! Seeded random generators for property testing: small Gaussian
//! rationals, polynomials, and algebra elements of bounded shape.
//! Deterministic given the seed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scalars::{GaussPoly, GaussRational};
use crate::superalgebra::{AlgebraElement, Mask, TermKey};

pub struct Sampler {
    rng: ChaCha8Rng,
}

/// Bounds on the shape of a sampled element.
#[derive(Clone, Copy)]
pub struct ElementShape {
    pub max_terms: usize,
    pub max_lambda: u32,
    pub max_sym: u32,
    pub max_poly_deg: u32,
    pub with_forms: bool,
}

impl Default for ElementShape {
    fn default() -> Self {
        ElementShape { max_terms: 4, max_lambda: 1, max_sym: 2, max_poly_deg: 2, with_forms: true }
    }
}

impl Sampler {
    pub fn new(seed: u64) -> Sampler {
        Sampler { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rational(&mut self) -> GaussRational {
        let part = |rng: &mut ChaCha8Rng| {
            let p = rng.gen_range(-3i64..=3);
            let q = rng.gen_range(1i64..=2);
            (p, q)
        };
        let (pr, qr) = part(&mut self.rng);
        let (pi, qi) = part(&mut self.rng);
        &GaussRational::from_ratio(pr, qr)
            + &(&GaussRational::i() * &GaussRational::from_ratio(pi, qi))
    }

    pub fn poly(&mut self, dim: usize, max_deg: u32, max_terms: usize) -> GaussPoly {
        let mut out = GaussPoly::zero(dim);
        let terms = self.rng.gen_range(1..=max_terms.max(1));
        for _ in 0..terms {
            let mut exps = vec![0u32; dim];
            let mut budget = max_deg;
            for e in exps.iter_mut() {
                if budget == 0 {
                    break;
                }
                *e = self.rng.gen_range(0..=budget);
                budget -= *e;
            }
            let c = self.rational();
            out.add_term(exps, &c);
        }
        out
    }

    fn mask(&mut self, bits: usize) -> Mask {
        if bits == 0 {
            return 0;
        }
        self.rng.gen_range(0..(1u64 << bits))
    }

    pub fn element(
        &mut self,
        dim: usize,
        rank: usize,
        trunc: u32,
        shape: ElementShape,
    ) -> AlgebraElement {
        let mut out = AlgebraElement::zero(dim, rank, trunc);
        for _ in 0..shape.max_terms {
            let t = self.rng.gen_range(0..=shape.max_lambda);
            let mut mu = vec![0u32; dim];
            let mut budget = shape.max_sym;
            for m in mu.iter_mut() {
                if budget == 0 {
                    break;
                }
                *m = self.rng.gen_range(0..=budget);
                budget -= *m;
            }
            let eset = self.mask(rank);
            let aset = if shape.with_forms { self.mask(dim) } else { 0 };
            let coeff = self.poly(dim, shape.max_poly_deg, 2);
            out.add_term(TermKey { t, mu, eset, aset }, &coeff);
        }
        out
    }

    /// A λ-free element with neither symmetric nor form legs.
    pub fn observable(&mut self, dim: usize, rank: usize, trunc: u32, max_poly_deg: u32) -> AlgebraElement {
        let mut out = AlgebraElement::zero(dim, rank, trunc);
        for _ in 0..3 {
            let eset = self.mask(rank);
            let coeff = self.poly(dim, max_poly_deg, 2);
            out.add_term(TermKey { t: 0, mu: vec![0; dim], eset, aset: 0 }, &coeff);
        }
        out
    }

    /// An observable concentrated at one E-degree.
    pub fn observable_of_degree(
        &mut self,
        dim: usize,
        rank: usize,
        trunc: u32,
        e_degree: u32,
        max_poly_deg: u32,
    ) -> AlgebraElement {
        let full = self.observable(dim, rank, trunc, max_poly_deg);
        let mut part = full.filter_terms(|k| k.e_degree() == e_degree);
        if part.is_zero() && e_degree as usize <= rank {
            let eset: Mask = (1u64 << e_degree) - 1;
            part.add_term(
                TermKey { t: 0, mu: vec![0; dim], eset, aset: 0 },
                &self.poly(dim, max_poly_deg, 2),
            );
        }
        part
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_given_seed() {
        let shape = ElementShape::default();
        let a = Sampler::new(7).element(2, 1, 8, shape);
        let b = Sampler::new(7).element(2, 1, 8, shape);
        assert_eq!(a, b);
        let c = Sampler::new(8).element(2, 1, 8, shape);
        assert!(a != c);
    }

    #[test]
    fn degree_shapes_respected() {
        let mut s = Sampler::new(1);
        for d in 0..=2u32 {
            let e = s.observable_of_degree(2, 2, 10, d, 2);
            assert!(!e.is_zero());
            for (k, _) in e.terms() {
                assert_eq!(k.e_degree(), d);
            }
        }
    }
}
