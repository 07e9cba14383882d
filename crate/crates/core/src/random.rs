//! Seeded random sampling: Haar-random vectors, random states and rotations.
//!
//! Every sampler takes an explicit RNG. [`stream_rng`] derives independent,
//! reproducible streams from `(seed, index)` so parallel loops give the same
//! answer regardless of scheduling.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matrix::{CMatrix, C64};

pub type SimRng = ChaCha8Rng;

pub fn stream_rng(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn gaussian_c(rng: &mut impl Rng) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Unit vector distributed uniformly (Haar) on the sphere of `C^d`.
pub fn haar_vector(d: usize, rng: &mut impl Rng) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..d).map(|_| gaussian_c(rng)).collect();
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

/// `|ψ⟩⟨ψ|` for Haar-random `ψ`.
pub fn haar_pure_state(d: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::outer(&haar_vector(d, rng))
}

/// Full-rank random density matrix `GG†/Tr(GG†)` with Ginibre `G`.
pub fn random_mixed_state(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| gaussian_c(rng));
    let rho = &g * &g.adjoint();
    let tr = rho.trace().re;
    rho.scale(1.0 / tr).hermitian_part()
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| gaussian_c(rng)).hermitian_part()
}

/// Haar-random real orthogonal matrix.
pub fn random_orthogonal(m: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    let a = DMatrix::<f64>::from_fn(m, m, |_, _| rng.sample(StandardNormal));
    let qr = a.qr();
    let (q, r) = (qr.q(), qr.r());
    (0..m)
        .map(|i| {
            (0..m)
                .map(|j| {
                    let s = if r[(j, j)] < 0.0 { -1.0 } else { 1.0 };
                    q[(i, j)] * s
                })
                .collect()
        })
        .collect()
}

/// Random orthogonal `M×M` matrix fixing the uniform vector `(1,…,1)/√M`,
/// i.e. with all row and column sums equal to one.
pub fn random_strict_rotation(m: usize, rng: &mut impl Rng) -> Vec<Vec<f64>> {
    // Householder reflection sending e_0 to the uniform vector.
    let n = 1.0 / (m as f64).sqrt();
    let mut w = vec![n; m];
    w[0] -= 1.0;
    let wn2: f64 = w.iter().map(|x| x * x).sum();
    let house = |i: usize, j: usize| {
        let delta = if i == j { 1.0 } else { 0.0 };
        if wn2 < 1e-15 {
            delta
        } else {
            delta - 2.0 * w[i] * w[j] / wn2
        }
    };
    let inner = random_orthogonal(m - 1, rng);
    let block = |i: usize, j: usize| match (i, j) {
        (0, 0) => 1.0,
        (0, _) | (_, 0) => 0.0,
        _ => inner[i - 1][j - 1],
    };
    // O = H · diag(1, inner) · H
    let mut hb = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            hb[i][j] = (0..m).map(|k| house(i, k) * block(k, j)).sum();
        }
    }
    (0..m)
        .map(|i| (0..m).map(|j| (0..m).map(|k| hb[i][k] * house(k, j)).sum()).collect())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: f64 = stream_rng(7, 3).gen();
        let b: f64 = stream_rng(7, 3).gen();
        let c: f64 = stream_rng(7, 4).gen();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn mixed_state_is_a_state() {
        let mut rng = stream_rng(1, 0);
        let rho = random_mixed_state(4, &mut rng);
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert!(crate::matrix::min_eigenvalue(&rho) > -1e-12);
    }

    #[test]
    fn strict_rotation_fixes_uniform_vector() {
        let mut rng = stream_rng(2, 0);
        for m in 2..=6 {
            let o = random_strict_rotation(m, &mut rng);
            for i in 0..m {
                let row: f64 = o[i].iter().sum();
                let col: f64 = (0..m).map(|k| o[k][i]).sum();
                assert!((row - 1.0).abs() < 1e-12 && (col - 1.0).abs() < 1e-12);
                for j in 0..m {
                    let dot: f64 = (0..m).map(|k| o[k][i] * o[k][j]).sum();
                    assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
                }
            }
        }
    }
}
