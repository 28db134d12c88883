//! Seeded random operators for property sweeps and the `random` model.

use faer::c64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::operator::ComplexMatrix;

fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Matrix with i.i.d. complex Gaussian entries of unit variance.
pub fn random_complex(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            m.set(i, j, c64::new(s * gaussian(rng), s * gaussian(rng)));
        }
    }
    m
}

/// GUE-like Hermitian matrix `(G + G†)/2`, exactly Hermitian.
pub fn random_hermitian(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = random_complex(dim, rng);
    let mut h = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        h.set(i, i, c64::new(g.get(i, i).re, 0.0));
        for j in (i + 1)..dim {
            let v = (g.get(i, j) + g.get(j, i).conj()) * 0.5;
            h.set(i, j, v);
            h.set(j, i, v.conj());
        }
    }
    h
}
