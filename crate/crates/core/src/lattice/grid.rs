use crate::error::{Error, Result};
use crate::scalar::Real;

/// How the lattice is closed at its ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Topology {
    Periodic,
    /// Couplings leaving the grid are dropped (Dirichlet-like closure).
    TruncatedLine,
    /// One-dimensional piece produced by cutting a line.
    HalfLine,
}

/// Uniform lattice in one or two dimensions. Nodes are numbered with the
/// first axis running fastest: `node = ix + points_per_axis * iy`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    dim: usize,
    points_per_axis: usize,
    spacing: T,
    topology: Topology,
    origin_offset: Vec<T>,
}

impl<T: Real> Grid<T> {
    pub fn new(
        dim: usize,
        points_per_axis: usize,
        spacing: T,
        topology: Topology,
        origin_offset: Vec<T>,
    ) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid(format!("dimension must be 1 or 2, got {dim}")));
        }
        if points_per_axis < 4 {
            return Err(Error::InvalidGrid(format!(
                "need at least 4 points per axis, got {points_per_axis}"
            )));
        }
        if !(spacing > T::zero()) || !spacing.is_finite() {
            return Err(Error::InvalidGrid(format!("spacing must be positive, got {spacing}")));
        }
        if topology == Topology::HalfLine && dim != 1 {
            return Err(Error::InvalidGrid("half-line topology requires dim = 1".into()));
        }
        if origin_offset.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "origin has {} components for a {dim}-dimensional grid",
                origin_offset.len()
            )));
        }
        Ok(Self {
            dim,
            points_per_axis,
            spacing,
            topology,
            origin_offset,
        })
    }

    /// Grid whose node `points_per_axis / 2` sits at the origin on every axis.
    pub fn centered(dim: usize, points_per_axis: usize, spacing: T, topology: Topology) -> Result<Self> {
        let shift = -T::from_usize_lossy(points_per_axis / 2) * spacing;
        Self::new(dim, points_per_axis, spacing, topology, vec![shift; dim])
    }

    /// Centered grid covering a physical interval of the given length.
    pub fn centered_on_length(dim: usize, points_per_axis: usize, length: T, topology: Topology) -> Result<Self> {
        Self::centered(dim, points_per_axis, length / T::from_usize_lossy(points_per_axis), topology)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn origin_offset(&self) -> &[T] {
        &self.origin_offset
    }

    pub fn num_nodes(&self) -> usize {
        self.points_per_axis.pow(self.dim as u32)
    }

    /// Per-axis indices of a node.
    pub fn axis_indices(&self, node: usize) -> Vec<usize> {
        let p = self.points_per_axis;
        (0..self.dim).map(|d| (node / p.pow(d as u32)) % p).collect()
    }

    pub fn node_index(&self, axis_indices: &[usize]) -> usize {
        let p = self.points_per_axis;
        axis_indices
            .iter()
            .enumerate()
            .map(|(d, &i)| i * p.pow(d as u32))
            .sum()
    }

    /// Physical coordinates of a node.
    pub fn coordinates(&self, node: usize) -> Vec<T> {
        self.axis_indices(node)
            .iter()
            .zip(&self.origin_offset)
            .map(|(&i, &o)| o + T::from_usize_lossy(i) * self.spacing)
            .collect()
    }

    /// Nodes adjacent to a non-periodic edge of the grid.
    pub fn is_boundary(&self, node: usize) -> bool {
        match self.topology {
            Topology::Periodic => false,
            Topology::TruncatedLine | Topology::HalfLine => self
                .axis_indices(node)
                .iter()
                .any(|&i| i == 0 || i + 1 == self.points_per_axis),
        }
    }

    /// Samples a function of the physical coordinates at every node.
    pub fn sample(&self, f: impl Fn(&[T]) -> T) -> Vec<T> {
        (0..self.num_nodes()).map(|n| f(&self.coordinates(n))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_parameters() {
        assert!(Grid::<f64>::centered(3, 8, 1.0, Topology::Periodic).is_err());
        assert!(Grid::<f64>::centered(1, 3, 1.0, Topology::Periodic).is_err());
        assert!(Grid::<f64>::centered(1, 8, 0.0, Topology::Periodic).is_err());
        assert!(Grid::<f64>::centered(2, 8, 1.0, Topology::HalfLine).is_err());
    }

    #[test]
    fn indexing_round_trips() {
        let g = Grid::<f64>::centered(2, 5, 0.5, Topology::TruncatedLine).unwrap();
        for n in 0..g.num_nodes() {
            assert_eq!(g.node_index(&g.axis_indices(n)), n);
        }
        assert_eq!(g.coordinates(g.node_index(&[2, 2])), vec![0.0, 0.0]);
        assert!(g.is_boundary(0));
        assert!(!g.is_boundary(g.node_index(&[2, 3])));
    }
}
