//! Sample grids for Kähler potentials (in `ρ`) and symplectic potentials (in `x`).

use crate::grid::{linspace, TensorAxes};
use crate::polytope::DelzantPolytope;

use super::{PotentialError, Result};

/// Tensor-product grid in the log-radial coordinates `ρ`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    axes: TensorAxes,
}

impl RadialGrid {
    pub fn new(axes: Vec<Vec<f64>>) -> Result<Self> {
        let axes = TensorAxes::new(axes);
        if axes.dim() == 0 || !axes.is_strictly_increasing() {
            return Err(PotentialError::BadGrid);
        }
        Ok(RadialGrid { axes })
    }

    /// `n` equispaced samples of `[lo, hi]` on each of `dim` axes.
    pub fn uniform(dim: usize, lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::new(vec![linspace(lo, hi, n); dim])
    }

    pub fn dim(&self) -> usize {
        self.axes.dim()
    }

    pub fn len(&self) -> usize {
        self.axes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }

    pub fn node(&self, i: usize) -> Vec<f64> {
        self.axes.point(i)
    }

    pub fn axes(&self) -> &TensorAxes {
        &self.axes
    }

    /// Nodes at least `margin` cells from every grid edge.
    pub fn inner_nodes(&self, margin: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.axes.is_inner(i, margin)).collect()
    }
}

/// Tensor-product samples of `P`'s bounding box, kept only where every facet
/// function is at least the margin `ε_bd`.
#[derive(Debug, Clone)]
pub struct PolytopeGrid {
    polytope: DelzantPolytope,
    margin: f64,
    axes: TensorAxes,
    mask: Vec<bool>,
    boundary_adjacent: Vec<bool>,
}

impl PolytopeGrid {
    pub fn new(polytope: &DelzantPolytope, per_axis: usize, margin: f64) -> Result<Self> {
        if per_axis < 2 || !(margin > 0.0) {
            return Err(PotentialError::BadGrid);
        }
        let (lo, hi) = polytope.bounding_box();
        let axes: Vec<Vec<f64>> = lo
            .iter()
            .zip(&hi)
            .map(|(&a, &b)| linspace(a + margin, b - margin, per_axis))
            .collect();
        let axes = TensorAxes::new(axes);
        if !axes.is_strictly_increasing() {
            return Err(PotentialError::BadGrid);
        }
        let tol = 1e-12;
        let mask: Vec<bool> = (0..axes.len())
            .map(|i| polytope.min_facet_value(&axes.point(i)) >= margin - tol)
            .collect();
        let shape = axes.shape();
        let boundary_adjacent = (0..axes.len())
            .map(|i| {
                let idx = axes.unravel(i);
                (0..axes.dim()).any(|d| {
                    let s = axes.stride(d);
                    idx[d] == 0 || idx[d] + 1 == shape[d] || !mask[i - s] || !mask[i + s]
                })
            })
            .collect();
        Ok(PolytopeGrid {
            polytope: polytope.clone(),
            margin,
            axes,
            mask,
            boundary_adjacent,
        })
    }

    /// Margin `1/(4 k_max)`: keeps every strictly interior `α/k`, `k ≤ k_max`, inside the sampled region.
    pub fn for_levels(polytope: &DelzantPolytope, per_axis: usize, k_max: i64) -> Result<Self> {
        Self::new(polytope, per_axis, 1.0 / (4.0 * k_max as f64))
    }

    pub fn polytope(&self) -> &DelzantPolytope {
        &self.polytope
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn axes(&self) -> &TensorAxes {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }

    pub fn node(&self, i: usize) -> Vec<f64> {
        self.axes.point(i)
    }

    pub fn is_valid(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn is_boundary_adjacent(&self, i: usize) -> bool {
        self.boundary_adjacent[i]
    }

    pub fn valid_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(|&i| self.mask[i])
    }

    /// Every tensor node lies in the polytope (true for boxes, false for simplices).
    pub fn is_full_tensor(&self) -> bool {
        self.mask.iter().all(|&m| m)
    }
}
