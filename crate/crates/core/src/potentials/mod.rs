//! Toric Kähler potentials `φ(ρ)` on the open orbit and symplectic potentials
//! `u(x)` on the polytope, related by the classical Legendre transform
//!
//! ```text
//! u(x) = ⟨x, ρ⟩ − φ(ρ),   x = ∇φ(ρ),   ρ = ∇u(x),   ∇²u(x) = (∇²φ(ρ))⁻¹.
//! ```
//!
//! `ρ` is the primal log-radial coordinate, so no factor 2 appears anywhere.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::polytope::PolytopeError;

pub mod fields;
pub mod grid;
pub mod io;
pub mod legendre;
pub mod spline;
mod symplectic;
mod kahler;

pub use fields::{
    Constant, FacetProduct, FubiniStudy, GuilleminField, LegendreDual, LinearCombination, Quadratic,
    Shifted,
};
pub use grid::{PolytopeGrid, RadialGrid};
pub use kahler::KahlerPotential;
pub use legendre::{gradient_preimage, moment_map, to_kahler, to_symplectic};
pub use symplectic::{abreu_delta, abreu_delta_fd, guillemin_potential, SymplecticPotential};

#[derive(Debug, Error)]
pub enum PotentialError {
    #[error("point {0:?} is outside the domain of the potential")]
    OutsideDomain(Vec<f64>),
    #[error("target {0:?} is outside the gradient image")]
    OutsideImage(Vec<f64>),
    #[error("Newton iteration stalled at {point:?} after {iterations} steps (residual {residual:e})")]
    NoConvergence {
        point: Vec<f64>,
        iterations: usize,
        residual: f64,
    },
    #[error("Hessian is not positive definite at {0:?}")]
    NotConvex(Vec<f64>),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("sampled potentials need a full tensor grid with at least 4 samples per axis")]
    NotTensorGrid,
    #[error("grid axes must be strictly increasing")]
    BadGrid,
    #[error("unknown potential preset `{0}`")]
    UnknownPreset(String),
    #[error("potential file: {0}")]
    Format(String),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, PotentialError>;

/// A twice differentiable function on (a subset of) `R^m`.
pub trait ScalarField: Debug + Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, x: &[f64]) -> Result<f64>;
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>>;
    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>>;

    /// Coordinate box containing the domain; `None` when unbounded.
    fn domain_box(&self) -> Option<Vec<(f64, f64)>> {
        None
    }
}

pub type Field = Arc<dyn ScalarField>;

pub(crate) fn check_dim(expected: usize, x: &[f64]) -> Result<()> {
    if x.len() == expected {
        Ok(())
    } else {
        Err(PotentialError::Dimension {
            expected,
            found: x.len(),
        })
    }
}
