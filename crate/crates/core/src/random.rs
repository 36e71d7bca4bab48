//! Seeded random test objects. Every generator takes an explicit RNG so that
//! a seed fixes the whole experiment.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::lattice::{DiracOperator, OperatorPair, OperatorPath, Potential, PotentialKind, Schedule};
use crate::matrix::Matrix;
use crate::scalar::Real;
use crate::spectrum::{eigensolve, Spectrum};

pub type SeededRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal<T: Real>(rng: &mut SeededRng) -> T {
    T::lit(rng.sample::<f64, _>(StandardNormal))
}

/// GUE-like Hermitian matrix with spectrum roughly in `[−2·scale, 2·scale]`.
pub fn random_hermitian<T: Real>(rng: &mut SeededRng, n: usize, scale: T) -> Matrix<T> {
    let sd = scale / T::from_usize_lossy(2 * n).sqrt();
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        m[(i, i)] = Complex::new(normal::<T>(rng) * sd * T::lit(2f64.sqrt()), T::zero());
        for j in i + 1..n {
            let z = Complex::new(normal::<T>(rng), normal::<T>(rng)) * sd;
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
        }
    }
    m
}

/// Haar-distributed unitary, from the eigenvectors of a random Hermitian matrix.
pub fn random_unitary<T: Real>(rng: &mut SeededRng, n: usize) -> Result<Matrix<T>> {
    let h = random_hermitian::<T>(rng, n, T::one());
    let (_, v) = T::hermitian_eigen(&h, true)?;
    Ok(v.expect("vectors requested"))
}

/// `Q·diag(λ)·Q*` for a random unitary `Q`; exact zeros in `λ` give an exact kernel.
pub fn hermitian_with_spectrum<T: Real>(rng: &mut SeededRng, eigenvalues: &[T]) -> Result<Matrix<T>> {
    let q = random_unitary::<T>(rng, eigenvalues.len())?;
    let d = Matrix::from_real_diagonal(eigenvalues);
    let mut m = q.matmul(&d).matmul(&q.adjoint());
    m.symmetrize();
    Ok(m)
}

/// Node-local patch: a random Hermitian block on `node`, zero elsewhere.
pub fn random_block_patch<T: Real>(
    rng: &mut SeededRng,
    sites: usize,
    rank: usize,
    node: usize,
    scale: T,
) -> Result<Potential<T>> {
    let blocks = (0..sites)
        .map(|s| {
            if s == node {
                random_hermitian(rng, rank, scale)
            } else {
                Matrix::zeros(rank, rank)
            }
        })
        .collect();
    Potential::from_blocks(PotentialKind::MatrixValued, blocks)
}

/// A raw `dim × dim` Hermitian operator split into sites of size `block`.
pub fn random_operator<T: Real>(rng: &mut SeededRng, dim: usize, block: usize, scale: T) -> Result<DiracOperator<T>> {
    DiracOperator::from_matrix(random_hermitian(rng, dim, scale), block, 1)
}

/// Random pair `(A, A + P)` with `P` a random block on a random site.
pub fn random_operator_pair<T: Real>(
    rng: &mut SeededRng,
    dim: usize,
    block: usize,
    patch_scale: T,
) -> Result<OperatorPair<T>> {
    let a0 = random_operator(rng, dim, block, T::one())?;
    let sites = dim / block;
    let node = rng.random_range(0..sites);
    let patch = random_block_patch(rng, sites, block, node, patch_scale)?;
    crate::lattice::make_pair(&a0, &patch)
}

/// Random linear path `A + r·P` from a random pair.
pub fn random_path<T: Real>(rng: &mut SeededRng, dim: usize, block: usize, patch_scale: T) -> Result<OperatorPath<T>> {
    let pair = random_operator_pair(rng, dim, block, patch_scale)?;
    OperatorPath::new(pair.a0.clone(), pair.patch().clone(), Schedule::Linear)
}

/// Spectra of a triple `A₀, A₁ = A₀ + P₁, A₂ = A₁ + P₂` with single-site
/// patches, redrawn until every spectrum avoids `(−min_gap, min_gap)`. `A₀`
/// has eigenvalues of random sign with `|λ| ∈ [3·min_gap, 2]`, so patches
/// still move eigenvalues across zero.
pub fn random_gapped_triple<T: Real>(
    rng: &mut SeededRng,
    dim: usize,
    block: usize,
    min_gap: T,
) -> Result<[Spectrum<T>; 3]> {
    let sites = dim / block;
    loop {
        let eigs: Vec<T> = (0..dim)
            .map(|_| {
                let mag = T::lit(rng.random_range(0.0..1.0)) * (T::lit(2.0) - T::lit(3.0) * min_gap) + T::lit(3.0) * min_gap;
                if rng.random_bool(0.5) {
                    mag
                } else {
                    -mag
                }
            })
            .collect();
        let a0 = DiracOperator::from_matrix(hermitian_with_spectrum(rng, &eigs)?, block, 1)?;
        let node = rng.random_range(0..sites);
        let patch = random_block_patch(rng, sites, block, node, T::one())?;
        let p = crate::lattice::make_pair(&a0, &patch)?;
        let node = rng.random_range(0..sites);
        let patch = random_block_patch(rng, sites, block, node, T::one())?;
        let a2 = crate::lattice::make_pair(&p.a1, &patch)?.a1;
        let spectra = [eigensolve(&p.a0, false)?, eigensolve(&p.a1, false)?, eigensolve(&a2, false)?];
        if spectra
            .iter()
            .all(|s| s.eigenvalues().iter().all(|l| l.abs() >= min_gap))
        {
            return Ok(spectra);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_matrix() {
        let a = random_hermitian::<f64>(&mut seeded(7), 6, 1.0);
        let b = random_hermitian::<f64>(&mut seeded(7), 6, 1.0);
        assert_eq!(a, b);
        assert!(a.is_hermitian(0.0));
    }

    #[test]
    fn prescribed_spectrum_reproduced() {
        let want = [-2.0, 0.0, 0.0, 1.5];
        let m = hermitian_with_spectrum::<f64>(&mut seeded(3), &want).unwrap();
        let (vals, _) = f64::hermitian_eigen(&m, false).unwrap();
        for (v, w) in vals.iter().zip(want) {
            assert!((v - w).abs() < 1e-13);
        }
    }

    #[test]
    fn random_pair_differs_on_one_block() {
        let p = random_operator_pair::<f64>(&mut seeded(1), 40, 8, 1.0).unwrap();
        assert_eq!(p.diff_support().len(), 1);
    }
}
