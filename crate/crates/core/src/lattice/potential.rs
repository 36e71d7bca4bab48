use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Real;

/// Structural class of a potential, recorded for reporting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PotentialKind {
    /// `V(x)·σ₃` on a rank-2 bundle.
    DiagonalSigma3,
    DiagonalGeneral,
    MatrixValued,
}

/// Node-local Hermitian bundle map: one `rank × rank` block per node.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential<T> {
    kind: PotentialKind,
    rank: usize,
    blocks: Vec<Matrix<T>>,
    support: Vec<usize>,
}

fn support_of<T: Real>(blocks: &[Matrix<T>]) -> Vec<usize> {
    blocks
        .iter()
        .enumerate()
        .filter(|(_, b)| b.max_abs() > T::zero())
        .map(|(i, _)| i)
        .collect()
}

impl<T: Real> Potential<T> {
    /// General constructor; every block must be square of the common rank and Hermitian.
    pub fn from_blocks(kind: PotentialKind, blocks: Vec<Matrix<T>>) -> Result<Self> {
        let rank = blocks.first().map_or(0, Matrix::rows);
        if rank == 0 {
            return Err(Error::InvalidPotential("no blocks given".into()));
        }
        for (node, b) in blocks.iter().enumerate() {
            if b.rows() != rank || b.cols() != rank {
                return Err(Error::InvalidPotential(format!(
                    "block at node {node} is {}x{}, expected {rank}x{rank}",
                    b.rows(),
                    b.cols()
                )));
            }
            if b.as_slice().iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidPotential(format!("non-finite entry at node {node}")));
            }
            let defect = b.hermiticity_defect();
            if defect > T::hermitian_tol() * b.max_abs().max(T::one()) {
                return Err(Error::InvalidPotential(format!(
                    "block at node {node} is not Hermitian (defect {:e})",
                    defect.to_f64_lossy()
                )));
            }
        }
        let support = support_of(&blocks);
        Ok(Self {
            kind,
            rank,
            blocks,
            support,
        })
    }

    pub fn zeros(nodes: usize, rank: usize) -> Self {
        Self {
            kind: PotentialKind::DiagonalGeneral,
            rank,
            blocks: vec![Matrix::zeros(rank, rank); nodes],
            support: Vec::new(),
        }
    }

    /// `V(x)·σ₃` from nodal samples.
    pub fn sigma3(values: &[T]) -> Result<Self> {
        let blocks = values
            .iter()
            .map(|&v| Matrix::from_real_diagonal(&[v, -v]))
            .collect();
        Self::from_blocks(PotentialKind::DiagonalSigma3, blocks)
    }

    /// `V(x)·I` on a rank-`rank` bundle.
    pub fn scalar(values: &[T], rank: usize) -> Result<Self> {
        let blocks = values
            .iter()
            .map(|&v| Matrix::from_real_diagonal(&vec![v; rank]))
            .collect();
        Self::from_blocks(PotentialKind::DiagonalGeneral, blocks)
    }

    /// Real diagonal blocks given per node.
    pub fn diagonal(values: &[Vec<T>]) -> Result<Self> {
        let blocks = values.iter().map(|d| Matrix::from_real_diagonal(d)).collect();
        Self::from_blocks(PotentialKind::DiagonalGeneral, blocks)
    }

    pub fn kind(&self) -> PotentialKind {
        self.kind
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn num_nodes(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, node: usize) -> &Matrix<T> {
        &self.blocks[node]
    }

    pub fn blocks(&self) -> &[Matrix<T>] {
        &self.blocks
    }

    /// Nodes carrying a nonzero block.
    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn is_zero(&self) -> bool {
        self.support.is_empty()
    }

    pub fn scaled(&self, c: T) -> Self {
        let blocks: Vec<_> = self.blocks.iter().map(|b| b.scale(c)).collect();
        let support = support_of(&blocks);
        Self {
            kind: self.kind,
            rank: self.rank,
            blocks,
            support,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.rank != other.rank || self.num_nodes() != other.num_nodes() {
            return Err(Error::Incompatible("potentials differ in rank or node count".into()));
        }
        let kind = if self.kind == other.kind {
            self.kind
        } else {
            PotentialKind::MatrixValued
        };
        let blocks: Vec<_> = self.blocks.iter().zip(&other.blocks).map(|(a, b)| a.add(b)).collect();
        let support = support_of(&blocks);
        Ok(Self {
            kind,
            rank: self.rank,
            blocks,
            support,
        })
    }

    /// Largest operator norm over the blocks, i.e. the norm of the bundle map.
    pub fn operator_norm(&self) -> Result<T> {
        let mut worst = T::zero();
        for &node in &self.support {
            let (vals, _) = T::hermitian_eigen(&self.blocks[node], false)?;
            for v in vals {
                worst = worst.max(v.abs());
            }
        }
        Ok(worst)
    }

    /// Block-diagonal matrix of size `nodes·rank`.
    pub fn to_matrix(&self) -> Matrix<T> {
        let r = self.rank;
        let mut m = Matrix::zeros(self.num_nodes() * r, self.num_nodes() * r);
        for &node in &self.support {
            let b = &self.blocks[node];
            for a in 0..r {
                for c in 0..r {
                    m[(node * r + a, node * r + c)] = b[(a, c)];
                }
            }
        }
        m
    }

    /// Adds the potential in place onto a matrix with the matching layout.
    pub fn add_into(&self, m: &mut Matrix<T>, scale: T) {
        let r = self.rank;
        for &node in &self.support {
            let b = &self.blocks[node];
            for a in 0..r {
                for c in 0..r {
                    let z: Complex<T> = b[(a, c)] * scale;
                    m[(node * r + a, node * r + c)] += z;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn support_tracks_nonzero_blocks() {
        let p = Potential::<f64>::sigma3(&[0.0, 1.0, 0.0, -2.0]).unwrap();
        assert_eq!(p.support(), &[1, 3]);
        assert_eq!(p.kind(), PotentialKind::DiagonalSigma3);
        assert!((p.operator_norm().unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn non_hermitian_block_rejected() {
        let mut b = Matrix::<f64>::zeros(2, 2);
        b[(0, 1)] = Complex::new(1.0, 0.0);
        let err = Potential::from_blocks(PotentialKind::MatrixValued, vec![Matrix::zeros(2, 2), b]).unwrap_err();
        assert!(matches!(err, Error::InvalidPotential(_)));
    }

    #[test]
    fn block_matrix_layout() {
        let p = Potential::<f64>::sigma3(&[0.0, 3.0]).unwrap();
        let m = p.to_matrix();
        assert_eq!(m[(2, 2)].re, 3.0);
        assert_eq!(m[(3, 3)].re, -3.0);
        assert_eq!(m[(0, 0)].re, 0.0);
    }
}
