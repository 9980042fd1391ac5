use nalgebra::DMatrix;

use super::fields::{shared, FubiniStudy, LegendreDual};
use super::grid::RadialGrid;
use super::spline::SampledField;
use super::{Field, PotentialError, Result, ScalarField, SymplecticPotential};

/// Convex `φ(ρ)` sampled on a radial grid, with an evaluator used for all
/// off-grid queries: a closed form when one is known, otherwise a spline
/// through the samples.
#[derive(Debug, Clone)]
pub struct KahlerPotential {
    grid: RadialGrid,
    values: Vec<f64>,
    field: Field,
    closed_form: bool,
}

impl KahlerPotential {
    pub fn from_field(grid: RadialGrid, field: Field) -> Result<Self> {
        if field.dim() != grid.dim() {
            return Err(PotentialError::Dimension {
                expected: grid.dim(),
                found: field.dim(),
            });
        }
        let values = (0..grid.len())
            .map(|i| field.value(&grid.node(i)))
            .collect::<Result<Vec<_>>>()?;
        Ok(KahlerPotential {
            grid,
            values,
            field,
            closed_form: true,
        })
    }

    pub fn from_samples(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(PotentialError::NotTensorGrid);
        }
        let spline = SampledField::new(grid.axes().axes(), &values, false)?;
        Ok(KahlerPotential {
            grid,
            values,
            field: shared(spline),
            closed_form: false,
        })
    }

    /// Exact Legendre dual of `u`, each evaluation a Newton solve.
    pub fn dual_of(u: &SymplecticPotential, grid: RadialGrid) -> Result<Self> {
        let start = u.polytope().centroid();
        Self::from_field(grid, shared(LegendreDual::new(shared(u.clone()), start)))
    }

    /// `"fubini-study"`: `log(1 + Σ e^{ρ_i})` in dimension `m`.
    pub fn preset(name: &str, grid: RadialGrid) -> Result<Self> {
        match name.trim() {
            "fubini-study" => {
                let m = grid.dim();
                Self::from_field(grid, shared(FubiniStudy::Simplex(m)))
            }
            other => Err(PotentialError::UnknownPreset(other.to_string())),
        }
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.values
    }

    pub fn sample(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn field(&self) -> &dyn ScalarField {
        self.field.as_ref()
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed_form
    }

    pub fn value(&self, rho: &[f64]) -> Result<f64> {
        self.field.value(rho)
    }

    pub fn gradient(&self, rho: &[f64]) -> Result<Vec<f64>> {
        self.field.gradient(rho)
    }

    pub fn hessian(&self, rho: &[f64]) -> Result<DMatrix<f64>> {
        self.field.hessian(rho)
    }

    /// Finite-difference Hessian of the samples at node `i`.
    pub fn fd_hessian(&self, i: usize) -> DMatrix<f64> {
        let m = self.dim();
        let axes = self.grid.axes();
        DMatrix::from_fn(m, m, |a, b| axes.d11(&self.values, i, a, b))
    }

    /// First node (one cell in from the edges) whose FD Hessian is not positive definite.
    pub fn convexity_violation(&self) -> Option<usize> {
        self.grid
            .inner_nodes(1)
            .into_iter()
            .find(|&i| self.fd_hessian(i).cholesky().is_none())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::DelzantPolytope;
    use approx::assert_abs_diff_eq;

    #[test]
    fn dual_of_perturbed_is_convex_and_consistent() {
        let u = SymplecticPotential::perturbed(DelzantPolytope::interval(), 0.1);
        let grid = RadialGrid::uniform(1, -6.0, 6.0, 241).unwrap();
        let exact = KahlerPotential::dual_of(&u, grid.clone()).unwrap();
        let sampled = KahlerPotential::from_samples(grid, exact.samples().to_vec()).unwrap();
        assert!(exact.convexity_violation().is_none());
        for r in [-5.5, -1.234, 0.0, 2.5] {
            assert_abs_diff_eq!(sampled.value(&[r]).unwrap(), exact.value(&[r]).unwrap(), epsilon = 1e-8);
            assert_abs_diff_eq!(sampled.gradient(&[r]).unwrap()[0], exact.gradient(&[r]).unwrap()[0], epsilon = 1e-6);
        }
        assert!(sampled.value(&[7.0]).is_err());
    }

    #[test]
    fn preset_fubini_study() {
        let phi = KahlerPotential::preset("fubini-study", RadialGrid::uniform(2, -2.0, 2.0, 9).unwrap()).unwrap();
        assert_abs_diff_eq!(phi.value(&[0.0, 0.0]).unwrap(), 3f64.ln(), epsilon = 1e-15);
        assert!(KahlerPotential::preset("nope", RadialGrid::uniform(1, 0.0, 1.0, 5).unwrap()).is_err());
    }
}
