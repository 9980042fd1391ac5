//! Heat flow of symplectic potentials over `N` and the PDE residuals of the
//! dual Kähler families.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::dirichlet::{laplacian, max_stable_step, DirichletError, DomainN};
use crate::grid::{linspace, TensorAxes};
use crate::potentials::{io, to_kahler, PolytopeGrid, PotentialError, RadialGrid, ScalarField, SymplecticPotential};

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("time step {dtau} exceeds the explicit-Euler limit {limit}")]
    Cfl { dtau: f64, limit: f64 },
    #[error("fiber Hessian is not invertible at {0:?}")]
    Singular(Vec<f64>),
    #[error("fiberwise positivity fails at {point:?}: Φ_ρρ = {value}")]
    Positivity { point: Vec<f64>, value: f64 },
    #[error("{0}")]
    Shape(String),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Dirichlet(#[from] DirichletError),
}

pub type Result<T> = std::result::Result<T, FlowError>;

/// Samples of `F(y, ρ)` on a tensor grid whose first `n` axes are `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyGrid {
    axes: TensorAxes,
    n: usize,
    values: Vec<f64>,
}

impl FamilyGrid {
    pub fn new(y_axes: Vec<Vec<f64>>, rho_axes: Vec<Vec<f64>>, values: Vec<f64>) -> Result<Self> {
        let n = y_axes.len();
        let axes = TensorAxes::new(y_axes.into_iter().chain(rho_axes).collect());
        if n == 0 || axes.dim() == n {
            return Err(FlowError::Shape("need at least one y axis and one ρ axis".into()));
        }
        if !axes.is_strictly_increasing() || axes.axes().iter().any(|a| a.len() < 3) {
            return Err(FlowError::Shape("axes must be increasing with at least 3 nodes".into()));
        }
        if values.len() != axes.len() {
            return Err(FlowError::Shape(format!("{} values for {} nodes", values.len(), axes.len())));
        }
        Ok(FamilyGrid { axes, n, values })
    }

    /// Evaluates `f(y, ρ)` at every node, in parallel.
    pub fn from_fn<E, F>(y_axes: Vec<Vec<f64>>, rho_axes: Vec<Vec<f64>>, f: F) -> std::result::Result<Self, E>
    where
        E: Send + From<FlowError>,
        F: Fn(&[f64], &[f64]) -> std::result::Result<f64, E> + Sync,
    {
        let n = y_axes.len();
        let axes = TensorAxes::new(y_axes.iter().chain(&rho_axes).cloned().collect());
        let values = (0..axes.len())
            .into_par_iter()
            .map(|i| {
                let p = axes.point(i);
                f(&p[..n], &p[n..])
            })
            .collect::<std::result::Result<Vec<_>, E>>()?;
        Ok(Self::new(y_axes, rho_axes, values)?)
    }

    pub fn axes(&self) -> &TensorAxes {
        &self.axes
    }

    pub fn y_dim(&self) -> usize {
        self.n
    }

    pub fn rho_dim(&self) -> usize {
        self.axes.dim() - self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(y, ρ)` of node `i`.
    pub fn point(&self, i: usize) -> (Vec<f64>, Vec<f64>) {
        let mut p = self.axes.point(i);
        let rho = p.split_off(self.n);
        (p, rho)
    }

    /// Number of `ρ` nodes in one `y` slice.
    pub fn slice_len(&self) -> usize {
        self.axes.stride(self.n - 1)
    }

    pub fn same_grid(&self, other: &FamilyGrid) -> bool {
        self.n == other.n && self.axes == other.axes
    }

    /// Pointwise `self − other` on a common grid.
    pub fn difference(&self, other: &FamilyGrid) -> Result<FamilyGrid> {
        if !self.same_grid(other) {
            return Err(FlowError::Shape("grids differ".into()));
        }
        Ok(FamilyGrid {
            axes: self.axes.clone(),
            n: self.n,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn d1(&self, i: usize, d: usize) -> f64 {
        self.axes.d1(&self.values, i, d)
    }

    pub fn d11(&self, i: usize, d: usize, e: usize) -> f64 {
        self.axes.d11(&self.values, i, d, e)
    }

    fn spacings(&self) -> Vec<f64> {
        self.axes
            .axes()
            .iter()
            .map(|a| a.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max))
            .collect()
    }

    fn report(&self, pointwise: impl Fn(usize) -> Result<Option<f64>> + Sync) -> Result<ResidualReport> {
        let vals = (0..self.len())
            .into_par_iter()
            .filter(|&i| self.axes.is_inner(i, 2))
            .map(|i| pointwise(i))
            .collect::<Result<Vec<_>>>()?;
        let vals: Vec<f64> = vals.into_iter().flatten().collect();
        let sup = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mean = if vals.is_empty() {
            0.0
        } else {
            vals.iter().map(|v| v.abs()).sum::<f64>() / vals.len() as f64
        };
        Ok(ResidualReport {
            sup,
            mean,
            count: vals.len(),
            spacings: self.spacings(),
        })
    }
}

/// Size of a PDE residual over the nodes at least two cells from every grid edge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub sup: f64,
    /// Mean absolute value.
    pub mean: f64,
    pub count: usize,
    /// Largest spacing along each axis.
    pub spacings: Vec<f64>,
}

/// `Δ_N Φ − Σ_a (∇_ρ ∂_a Φ)ᵀ (∇²_ρ Φ)⁻¹ (∇_ρ ∂_a Φ)` at node `i`.
fn eells_sampson_at(f: &FamilyGrid, i: usize) -> Result<f64> {
    let (n, m) = (f.y_dim(), f.rho_dim());
    let h = DMatrix::from_fn(m, m, |r, c| f.d11(i, n + r, n + c));
    let chol = h.cholesky().ok_or_else(|| {
        let (y, rho) = f.point(i);
        FlowError::Singular(y.into_iter().chain(rho).collect())
    })?;
    let mut value = 0.0;
    for a in 0..n {
        value += f.d11(i, a, a);
        let v = nalgebra::DVector::from_fn(m, |r, _| f.d11(i, a, n + r));
        value -= v.dot(&chol.solve(&v));
    }
    Ok(value)
}

/// Residual of the harmonic map equation for a family of Kähler potentials
/// over a flat `N`, in the form dual to `Δ_N u = 0`.
pub fn eells_sampson_residual(phi: &FamilyGrid) -> Result<ResidualReport> {
    phi.report(|i| eells_sampson_at(phi, i).map(Some))
}

/// `|(Φ⁺ − Φ)/Δτ − (Δ_N Φ − Σ_a ⟨∇_ρ∂_aΦ, (∇²_ρΦ)⁻¹ ∇_ρ∂_aΦ⟩)|` for two
/// consecutive flow snapshots on a common grid.
pub fn flow_duality_residual(before: &FamilyGrid, after: &FamilyGrid, dtau: f64) -> Result<ResidualReport> {
    if !before.same_grid(after) {
        return Err(FlowError::Shape("snapshots live on different grids".into()));
    }
    before.report(|i| {
        let dt = (after.values[i] - before.values[i]) / dtau;
        Ok(Some(dt - eells_sampson_at(before, i)?))
    })
}

/// `(Φ_qq + Φ_ss)·Φ_ρρ − Φ_qρ² − Φ_sρ²` for `Φ(q, s, ρ)` with `m = 1`.
///
/// Fails with the first node where `Φ_ρρ ≤ 0`.
pub fn hcma_residual(phi: &FamilyGrid) -> Result<ResidualReport> {
    if phi.y_dim() != 2 || phi.rho_dim() != 1 {
        return Err(FlowError::Shape("HCMA residual needs (q, s, ρ) grids".into()));
    }
    if let Some(i) = (0..phi.len()).find(|&i| phi.axes.is_inner(i, 1) && !(phi.d11(i, 2, 2) > 0.0)) {
        let (y, rho) = phi.point(i);
        return Err(FlowError::Positivity {
            point: y.into_iter().chain(rho).collect(),
            value: phi.d11(i, 2, 2),
        });
    }
    phi.report(|i| {
        let prr = phi.d11(i, 2, 2);
        Ok(Some(
            (phi.d11(i, 0, 0) + phi.d11(i, 1, 1)) * prr - phi.d11(i, 0, 2).powi(2) - phi.d11(i, 1, 2).powi(2),
        ))
    })
}

/// Heat flow `∂_τ u = Δ_N u` of symplectic potentials with fixed boundary slices.
///
/// The flow is linear and acts pointwise in `x`, so the state is kept as a
/// propagator `M(τ)` with `u(τ, y_i) = Σ_j M_ij u(0, y_j)`.
#[derive(Debug, Clone)]
pub struct FlowState {
    tau: f64,
    domain: DomainN,
    grid: PolytopeGrid,
    initial: Arc<Vec<SymplecticPotential>>,
    propagator: DMatrix<f64>,
    convex: Vec<bool>,
    violations: Vec<(f64, usize)>,
}

impl FlowState {
    /// Initial data `u(0, y)` at every node of `N`; convexity in `x` is
    /// checked at the valid nodes of `grid`.
    pub fn new(domain: DomainN, grid: PolytopeGrid, initial: Vec<SymplecticPotential>) -> Result<Self> {
        domain.validate()?;
        if initial.len() != domain.node_count() {
            return Err(FlowError::Shape(format!(
                "{} initial slices for {} nodes",
                initial.len(),
                domain.node_count()
            )));
        }
        if initial.iter().any(|u| u.polytope() != grid.polytope()) {
            return Err(FlowError::Shape("initial slices must live on the grid's polytope".into()));
        }
        let n = domain.node_count();
        let mut state = FlowState {
            tau: 0.0,
            domain,
            grid,
            initial: Arc::new(initial),
            propagator: DMatrix::identity(n, n),
            convex: vec![true; n],
            violations: Vec::new(),
        };
        state.check_convexity()?;
        Ok(state)
    }

    pub fn from_fn(domain: DomainN, grid: PolytopeGrid, f: impl Fn([f64; 2]) -> SymplecticPotential) -> Result<Self> {
        let initial = (0..domain.node_count()).map(|i| f(domain.node(i))).collect();
        Self::new(domain, grid, initial)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn domain(&self) -> &DomainN {
        &self.domain
    }

    pub fn grid(&self) -> &PolytopeGrid {
        &self.grid
    }

    pub fn propagator(&self) -> &DMatrix<f64> {
        &self.propagator
    }

    /// Per-node convexity in `x` at the last check.
    pub fn convexity_flags(&self) -> &[bool] {
        &self.convex
    }

    pub fn is_convex(&self) -> bool {
        self.convex.iter().all(|&c| c)
    }

    /// Every `(τ, node)` at which a convexity check failed.
    pub fn violations(&self) -> &[(f64, usize)] {
        &self.violations
    }

    /// `u(τ, y)` at node `y`.
    pub fn potential_at(&self, node: usize) -> Result<SymplecticPotential> {
        let terms: Vec<(f64, &SymplecticPotential)> = self
            .propagator
            .row(node)
            .iter()
            .zip(self.initial.iter())
            .filter(|(w, _)| **w != 0.0)
            .map(|(w, u)| (*w, u))
            .collect();
        Ok(SymplecticPotential::combination(&terms)?)
    }

    /// `u(τ, y)` at the valid grid nodes of node `y` (NaN elsewhere).
    pub fn samples(&self, node: usize) -> Result<Vec<f64>> {
        Ok(self.potential_at(node)?.sample_on(&self.grid)?)
    }

    /// Node `y` in the potentials text format with a `τ` header.
    pub fn snapshot(&self, node: usize) -> Result<String> {
        Ok(io::write_symplectic(&self.potential_at(node)?, &self.grid, Some(self.tau))?)
    }

    fn check_convexity(&mut self) -> Result<()> {
        let grid = &self.grid;
        let flags = (0..self.domain.node_count())
            .into_par_iter()
            .map(|y| {
                let u = self.potential_at(y)?;
                for i in grid.valid_nodes() {
                    if u.hessian(&grid.node(i))?.cholesky().is_none() {
                        return Ok(false);
                    }
                }
                Ok(true)
            })
            .collect::<Result<Vec<bool>>>()?;
        for (y, &ok) in flags.iter().enumerate() {
            if !ok {
                self.violations.push((self.tau, y));
            }
        }
        self.convex = flags;
        Ok(())
    }

    /// Legendre duals `Φ(τ, y, ρ)` on `N`-nodes × `ρ`-grid; `N` must be the
    /// interval or a rectangle so that the nodes form a tensor grid.
    pub fn dual_family(&self, rho_axes: Vec<Vec<f64>>) -> Result<FamilyGrid> {
        let y_axes = match self.domain {
            DomainN::Interval { cells } => vec![linspace(0.0, 1.0, cells + 1)],
            DomainN::Rectangle { nx, ny, width, height } => {
                vec![linspace(0.0, width, nx + 1), linspace(0.0, height, ny + 1)]
            }
            DomainN::Disc { .. } => return Err(FlowError::Shape("disc nodes are not a tensor grid".into())),
        };
        let radial = RadialGrid::new(rho_axes.clone())?;
        let rows = (0..self.domain.node_count())
            .into_par_iter()
            .map(|y| Ok(to_kahler(&self.potential_at(y)?, &radial)?.samples().to_vec()))
            .collect::<Result<Vec<_>>>()?;
        FamilyGrid::new(y_axes, rho_axes, rows.concat())
    }
}

/// Advances the flow by `steps` explicit-Euler steps of size `dtau`.
///
/// Boundary slices stay fixed. Convexity in `x` is rechecked afterwards and
/// failures are recorded, not repaired.
pub fn heat_evolve(mut state: FlowState, dtau: f64, steps: usize) -> Result<FlowState> {
    let limit = max_stable_step(&state.domain);
    if !(dtau > 0.0) || dtau > limit * (1.0 + 1e-12) {
        return Err(FlowError::Cfl { dtau, limit });
    }
    let n = state.domain.node_count();
    let domain = &state.domain;
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| state.propagator.column(j).iter().copied().collect()).collect();
    cols.par_iter_mut().try_for_each(|c| -> Result<()> {
        for _ in 0..steps {
            let lap = laplacian(domain, c)?;
            for (v, l) in c.iter_mut().zip(lap) {
                *v += dtau * l;
            }
        }
        Ok(())
    })?;
    state.propagator = DMatrix::from_fn(n, n, |i, j| cols[j][i]);
    state.tau += dtau * steps as f64;
    state.check_convexity()?;
    Ok(state)
}
