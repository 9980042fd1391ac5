//! Measurements behind the CLI suites and the acceptance tests.

use std::f64::consts::PI;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{
    build_approximants, comparison_y_axes, error_report, sample_approximant, sample_exact, solve_harmonic_map,
    ErrorReport, ExactFamily, ExperimentConfig, HarmonicFamily, HarnessError, Result,
};
use crate::bergman::{
    localization_gap, norming_constants, peak_asymptotics_check, ratio_report, szego_sum, BergmanFamily, NormingTable,
    PeakFit,
};
use crate::dirichlet::{harmonic_weights, poisson_kernel, DomainN};
use crate::flows::{flow_duality_residual, hcma_residual, heat_evolve, FamilyGrid, FlowState, ResidualReport};
use crate::grid::linspace;
use crate::polytope::DelzantPolytope;
use crate::potentials::{
    to_kahler, to_symplectic, KahlerPotential, PolytopeGrid, RadialGrid, ScalarField, SymplecticPotential,
};
use crate::quadrature::{interval_rule, PanelSpec};

#[derive(Debug, Clone, Serialize)]
pub struct LegendreCheck {
    pub sup_error: f64,
    pub seconds: f64,
}

/// `sup |to_kahler(to_symplectic(φ_FS)) − φ_FS|` over the interior nodes of
/// `[−extent, extent]` sampled with `nodes` points.
pub fn legendre_check(nodes: usize, extent: f64) -> Result<LegendreCheck> {
    let start = Instant::now();
    let p = DelzantPolytope::interval();
    let radial = RadialGrid::uniform(1, -extent, extent, nodes)?;
    let phi = KahlerPotential::preset("fubini-study", radial.clone())?;
    let grid = PolytopeGrid::new(&p, 401, 1e-3)?;
    let u = to_symplectic(&phi, &grid)?;
    let back = to_kahler(&u, &radial)?;
    let sup_error = radial
        .inner_nodes(1)
        .into_iter()
        .map(|i| (back.sample(i) - phi.sample(i)).abs())
        .fold(0.0, f64::max);
    Ok(LegendreCheck {
        sup_error,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Everything produced by one convergence run.
#[derive(Debug, Clone)]
pub struct ConvergenceRun {
    pub family: HarmonicFamily,
    pub approximants: Vec<BergmanFamily>,
    pub exact: ExactFamily,
    pub report: ErrorReport,
    pub seconds: f64,
}

/// Harmonic map, approximants at every level and their error norms.
pub fn convergence_run(cfg: &ExperimentConfig) -> Result<ConvergenceRun> {
    let start = Instant::now();
    let family = solve_harmonic_map(cfg)?;
    let approximants = build_approximants(cfg, &family)?;
    let r = &cfg.resolution;
    let y_axes = comparison_y_axes(family.domain(), r.patch_nodes, r.patch_extent);
    let rho_axes = r.rho_axes(family.polytope().dim());
    let exact = sample_exact(&family, y_axes.clone(), rho_axes.clone(), cfg.window)?;
    let sampled = approximants
        .par_iter()
        .map(|bf| Ok((bf.level(), sample_approximant(bf, y_axes.clone(), rho_axes.clone())?)))
        .collect::<Result<Vec<_>>>()?;
    let report = error_report(&exact, &sampled)?;
    Ok(ConvergenceRun {
        family,
        approximants,
        exact,
        report,
        seconds: start.elapsed().as_secs_f64(),
    })
}

/// Largest difference between the harmonic exponents `λ_α(y)` of a disc
/// approximant (trapezoid Poisson weights over the boundary nodes) and a
/// direct Gauss–Legendre integration of `P_r(θ − γ) log Q_θ(α)` with fresh
/// norming tables at the quadrature angles.
pub fn poisson_cross_check(
    boundary: impl Fn(f64) -> SymplecticPotential + Sync,
    bf: &BergmanFamily,
    points: &[[f64; 2]],
    layout: PanelSpec,
) -> Result<f64> {
    let h = bf.norming();
    if !matches!(h.domain(), DomainN::Disc { .. }) {
        return Err(HarnessError::Config("the Poisson cross-check needs a disc".into()));
    }
    let k = h.level();
    let (thetas, ws) = interval_rule(0.0, 2.0 * PI, layout);
    let tables = thetas
        .par_iter()
        .map(|&t| norming_constants(&boundary(t), k))
        .collect::<std::result::Result<Vec<NormingTable>, _>>()?;
    let mut worst = 0.0f64;
    for &y in points {
        let (r, gamma) = (y[0].hypot(y[1]), y[1].atan2(y[0]));
        let w = crate::dirichlet::weights_at(h.domain(), y)?;
        let kernel = thetas
            .iter()
            .zip(&ws)
            .map(|(&t, &wt)| Ok(wt * poisson_kernel(r, t - gamma)?))
            .collect::<Result<Vec<f64>>>()?;
        for a in 0..h.points().len() {
            let direct: f64 = kernel.iter().zip(&tables).map(|(c, t)| c * t.log_q()[a]).sum();
            worst = worst.max((direct - h.lambda_with_weights(a, &w)).abs());
        }
    }
    Ok(worst)
}

/// Residual of the complex Monge–Ampère determinant for the disc pipeline on
/// the patch `[−w, w]²` with `n` nodes per axis and `n_rho` nodes on `[−e, e]`.
pub fn hcma_run(family: &HarmonicFamily, n: usize, extent: f64, n_rho: usize, rho_extent: f64) -> Result<ResidualReport> {
    if family.polytope().dim() != 1 || !matches!(family.domain(), DomainN::Disc { .. }) {
        return Err(HarnessError::Config("HCMA residual is for CP¹ over the disc".into()));
    }
    let y_axes = vec![linspace(-extent, extent, n); 2];
    let rho_axes = vec![linspace(-rho_extent, rho_extent, n_rho)];
    let exact = sample_exact(family, y_axes, rho_axes, 0.0)?;
    Ok(hcma_residual(&exact.phi)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowDualityRun {
    pub residual: ResidualReport,
    pub dtau: f64,
    pub steps: usize,
    pub convex: bool,
}

/// Initial data of the duality experiment: `u₀ + a(y)·x(1 − x)` with
/// `a(y) = 0.05 + 0.1y + 0.15 sin(πy)`, not harmonic in `y`.
pub fn flow_initial_amplitude(y: f64) -> f64 {
    0.05 + 0.1 * y + 0.15 * (PI * y).sin()
}

/// Heat flow on `N = [0, 1]` with `cells` cells and `Δτ = 0.4h²` up to
/// `tau_end`, then the duality residual between the Legendre duals of two
/// consecutive steps, sampled at `rho_nodes` points of `ρ ∈ [−3, 3]`.
///
/// `on_snapshot` is called every `every` steps when given.
pub fn flow_duality_run(
    cells: usize,
    rho_nodes: usize,
    tau_end: f64,
    every: Option<usize>,
    on_snapshot: &mut dyn FnMut(usize, &FlowState) -> Result<()>,
) -> Result<FlowDualityRun> {
    let p = DelzantPolytope::interval();
    let domain = DomainN::interval(cells)?;
    let h = 1.0 / cells as f64;
    let dtau = 0.4 * h * h;
    let steps = (tau_end / dtau).round() as usize;
    let grid = PolytopeGrid::new(&p, 21, 0.01)?;
    let mut state = FlowState::from_fn(domain, grid, |y| SymplecticPotential::perturbed(p.clone(), flow_initial_amplitude(y[0])))?;
    let chunk = every.unwrap_or(steps).max(1);
    let mut done = 0;
    if every.is_some() {
        on_snapshot(0, &state)?;
    }
    while done < steps {
        let n = chunk.min(steps - done);
        state = heat_evolve(state, dtau, n)?;
        done += n;
        if every.is_some() {
            on_snapshot(done, &state)?;
        }
    }
    let rho = vec![linspace(-3.0, 3.0, rho_nodes)];
    let before = state.dual_family(rho.clone())?;
    let state = heat_evolve(state, dtau, 1)?;
    let after = state.dual_family(rho)?;
    Ok(FlowDualityRun {
        residual: flow_duality_residual(&before, &after, dtau)?,
        dtau,
        steps,
        convex: state.is_convex() && state.violations().is_empty(),
    })
}

/// `sup_ρ |Σ_α P(α, ρ) − 1|` (volume-normalized) over the given `ρ` values.
pub fn szego_deviation(u: &SymplecticPotential, k: i64, rhos: &[Vec<f64>]) -> Result<f64> {
    let table = norming_constants(u, k)?;
    let phi = kahler_of(u)?;
    let vals = rhos
        .par_iter()
        .map(|r| Ok((szego_sum(&table, &phi, u.polytope(), r)? - 1.0).abs()))
        .collect::<Result<Vec<f64>>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// `sup_ρ` of the Szegő mass outside `|α/k − ∇φ(ρ)| ≤ k^{δ − 1/2}`, as a
/// fraction of the full sum.
pub fn localization_tail(u: &SymplecticPotential, k: i64, rhos: &[Vec<f64>], delta: f64) -> Result<f64> {
    let table = norming_constants(u, k)?;
    let phi = kahler_of(u)?;
    let p = u.polytope();
    let vals = rhos
        .par_iter()
        .map(|r| Ok(localization_gap(&table, &phi, p, r, delta)? / szego_sum(&table, &phi, p, r)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Kähler potential dual to `u`, evaluated by Newton inversion.
pub fn kahler_of(u: &SymplecticPotential) -> Result<KahlerPotential> {
    let grid = RadialGrid::uniform(u.dim(), -1.0, 1.0, 3)?;
    Ok(KahlerPotential::dual_of(u, grid)?)
}

/// Lattice points whose `α/k` is farther than `δ_k = 1/(√k log k)` from every facet.
pub fn deep_interior_points(p: &DelzantPolytope, k: i64) -> Result<Vec<Vec<i64>>> {
    let kf = k as f64;
    let delta = 1.0 / (kf.sqrt() * kf.ln());
    let mut out = Vec::new();
    for alpha in p.lattice_points(k)?.iter() {
        let x: Vec<f64> = alpha.iter().map(|&a| a as f64 / kf).collect();
        if p.lattice_is_interior(alpha, k) && p.near_facets(&x, delta)?.1 == 0 {
            out.push(alpha.to_vec());
        }
    }
    Ok(out)
}

/// Leading-order peak fit over the deep interior at level `k`.
pub fn peak_fit(u: &SymplecticPotential, k: i64) -> Result<PeakFit> {
    let table = norming_constants(u, k)?;
    let alphas = deep_interior_points(u.polytope(), k)?;
    Ok(peak_asymptotics_check(&table, u, &alphas)?)
}

#[derive(Debug, Clone, Serialize)]
pub struct RatioSummary {
    pub k: i64,
    /// `max max(R_k, 1/R_k)`.
    pub bound: f64,
    /// `max |R_k − R_∞|`.
    pub max_gap: f64,
    pub count: usize,
}

/// `R_k(y, α)` at every interior node `y` and interior `α` of an interval family.
pub fn ratio_bounds(family: &HarmonicFamily, k: i64) -> Result<RatioSummary> {
    let domain = family.domain();
    let cells = match *domain {
        DomainN::Interval { cells } => cells,
        _ => return Err(HarnessError::Config("ratio bounds are measured on the interval".into())),
    };
    let tables = family
        .boundary()
        .par_iter()
        .map(|u| norming_constants(u, k))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let h = crate::bergman::harmonic_norming(domain, &tables)?;
    let w = harmonic_weights(domain)?;
    let p = family.polytope();
    let interior: Vec<Vec<i64>> =
        p.lattice_points(k)?.iter().filter(|a| p.lattice_is_interior(a, k)).map(<[i64]>::to_vec).collect();
    let per_node = (1..cells)
        .into_par_iter()
        .map(|y| {
            let u = family.potential_at(y);
            let table = norming_constants(u, k)?;
            let weights: Vec<f64> = w.row(y).iter().copied().collect();
            interior
                .iter()
                .map(|a| Ok(ratio_report(&h, &table, family.boundary(), &weights, u, a)?))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let all: Vec<_> = per_node.into_iter().flatten().collect();
    Ok(RatioSummary {
        k,
        bound: all.iter().map(|r| r.r_k.max(1.0 / r.r_k)).fold(1.0, f64::max),
        max_gap: all.iter().map(|r| (r.r_k - r.r_inf).abs()).fold(0.0, f64::max),
        count: all.len(),
    })
}

/// `ρ` values whose moment image lies in `{min_r ℓ_r ≥ window}` for `u`, from a uniform scan.
pub fn window_rhos(u: &SymplecticPotential, window: f64, n: usize) -> Result<Vec<Vec<f64>>> {
    if u.dim() != 1 {
        return Err(HarnessError::Config("window scans are one-dimensional".into()));
    }
    let (lo, hi) = (u.gradient(&[window])?[0], u.gradient(&[1.0 - window])?[0]);
    Ok(linspace(lo, hi, n).into_iter().map(|r| vec![r]).collect())
}

/// Exact and approximant samples on a common grid, for callers that want
/// their own norms.
pub fn sampled_pair(run: &ConvergenceRun, index: usize) -> Result<(FamilyGrid, FamilyGrid)> {
    let g = &run.exact.phi;
    let n = g.y_dim();
    let bf = run.approximants.get(index).ok_or_else(|| HarnessError::Config("no such level".into()))?;
    let approx = sample_approximant(bf, g.axes().axes()[..n].to_vec(), g.axes().axes()[n..].to_vec())?;
    Ok((g.clone(), approx))
}

#[derive(Debug, Clone, Serialize)]
pub struct DualityCheck {
    /// `max |∇φ(∇u(x)) − x|`.
    pub gradient_error: f64,
    /// `max ‖∇²φ(ρ)·∇²u(x) − I‖_F / ‖I‖_F`.
    pub hessian_error: f64,
    pub pairs: usize,
}

/// Gradient and Hessian duality between `u = u₀ + a·x(1 − x)` and its dual
/// sampled on `ρ ∈ [−3, 3]` with spacing `spacing`, at `pairs` points of `[0.1, 0.9]`.
pub fn gradient_hessian_duality(amplitude: f64, spacing: f64, pairs: usize) -> Result<DualityCheck> {
    let p = DelzantPolytope::interval();
    let u = SymplecticPotential::perturbed(p, amplitude);
    let n = (6.0 / spacing).round() as usize + 1;
    let phi = to_kahler(&u, &RadialGrid::uniform(1, -3.0, 3.0, n)?)?;
    let mut gradient_error = 0.0f64;
    let mut hessian_error = 0.0f64;
    for x in linspace(0.1, 0.9, pairs) {
        let rho = u.gradient(&[x])?;
        gradient_error = gradient_error.max((phi.gradient(&rho)?[0] - x).abs());
        let prod = phi.hessian(&rho)? * u.hessian(&[x])?;
        let id = nalgebra::DMatrix::<f64>::identity(prod.nrows(), prod.ncols());
        hessian_error = hessian_error.max((prod - &id).norm() / id.norm());
    }
    Ok(DualityCheck {
        gradient_error,
        hessian_error,
        pairs,
    })
}

/// `max_α |log Q(α) + log P(α) − k u(α/k)|` over interior `α`, with the
/// peak `P` evaluated directly from the dual Kähler potential at `∇u(α/k)`.
pub fn duality_identity_error(u: &SymplecticPotential, k: i64) -> Result<f64> {
    let table = norming_constants(u, k)?;
    let phi = kahler_of(u)?;
    let p = u.polytope();
    let mut worst = 0.0f64;
    for alpha in table.points() {
        if !p.lattice_is_interior(alpha, k) {
            continue;
        }
        let peak = crate::bergman::peak_value_at_preimage(&table, u, &phi, alpha)?;
        let x: Vec<f64> = alpha.iter().map(|&a| a as f64 / k as f64).collect();
        worst = worst.max((table.get(alpha)? + peak.ln() - k as f64 * u.value(&x)?).abs());
    }
    Ok(worst)
}
