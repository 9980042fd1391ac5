use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{ExperimentConfig, HarnessError, Result};
use crate::bergman::{harmonic_norming, norming_constants, BergmanFamily, NormingTable};
use crate::dirichlet::{harmonic_weights, weights_at, DomainN};
use crate::flows::FamilyGrid;
use crate::grid::{linspace, TensorAxes};
use crate::polytope::DelzantPolytope;
use crate::potentials::{gradient_preimage, PolytopeGrid, ScalarField, SymplecticPotential};

/// The harmonic map `y ↦ u_y` obtained by extending the boundary symplectic
/// potentials harmonically over `N`.
#[derive(Debug, Clone)]
pub struct HarmonicFamily {
    polytope: DelzantPolytope,
    domain: DomainN,
    boundary: Vec<SymplecticPotential>,
    slices: Vec<SymplecticPotential>,
}

impl HarmonicFamily {
    pub fn polytope(&self) -> &DelzantPolytope {
        &self.polytope
    }

    pub fn domain(&self) -> &DomainN {
        &self.domain
    }

    pub fn boundary(&self) -> &[SymplecticPotential] {
        &self.boundary
    }

    /// `u_y` at node `y` of `N`.
    pub fn potential_at(&self, node: usize) -> &SymplecticPotential {
        &self.slices[node]
    }

    /// `u_y` at an arbitrary point of `N`.
    pub fn potential_at_point(&self, y: [f64; 2]) -> Result<SymplecticPotential> {
        let w = weights_at(&self.domain, y)?;
        combine(&self.boundary, &w)
    }

    /// `Φ(y, ρ) = ⟨x, ρ⟩ − u_y(x)` at `∇u_y(x) = ρ`, together with `x`.
    pub fn kahler_at(u: &SymplecticPotential, rho: &[f64], start: &[f64]) -> Result<(f64, Vec<f64>)> {
        let x = gradient_preimage(u, rho, start)?;
        let v = x.iter().zip(rho).map(|(a, b)| a * b).sum::<f64>() - u.value(&x)?;
        Ok((v, x))
    }
}

fn combine(boundary: &[SymplecticPotential], w: &[f64]) -> Result<SymplecticPotential> {
    let terms: Vec<(f64, &SymplecticPotential)> =
        w.iter().zip(boundary).filter(|(w, _)| **w != 0.0).map(|(w, u)| (*w, u)).collect();
    Ok(SymplecticPotential::combination(&terms)?)
}

/// Solves the harmonic map problem for the configured boundary family.
pub fn solve_harmonic_map(cfg: &ExperimentConfig) -> Result<HarmonicFamily> {
    cfg.validate()?;
    let p = cfg.polytope.build()?;
    let domain = cfg.domain.build()?;
    let boundary = cfg.family.build(&p, &domain)?;
    let grid = PolytopeGrid::for_levels(&p, cfg.resolution.polytope_nodes, *cfg.levels.last().unwrap())?;
    solve_harmonic_map_with(domain, boundary, &grid)
}

/// Harmonic extension of explicit boundary potentials; every slice is
/// checked for strict convexity at the valid nodes of `grid`.
pub fn solve_harmonic_map_with(
    domain: DomainN,
    boundary: Vec<SymplecticPotential>,
    grid: &PolytopeGrid,
) -> Result<HarmonicFamily> {
    let nb = domain.boundary_nodes().len();
    if boundary.len() != nb || boundary.is_empty() {
        return Err(HarnessError::Config(format!("{} boundary potentials for {nb} boundary nodes", boundary.len())));
    }
    let p = boundary[0].polytope().clone();
    if boundary.iter().any(|u| u.polytope() != &p) || grid.polytope() != &p {
        return Err(HarnessError::Config("boundary potentials live on different polytopes".into()));
    }
    let w: DMatrix<f64> = harmonic_weights(&domain)?;
    let slices = (0..domain.node_count())
        .into_par_iter()
        .map(|y| {
            let row: Vec<f64> = w.row(y).iter().copied().collect();
            let u = combine(&boundary, &row)?;
            for i in grid.valid_nodes() {
                let x = grid.node(i);
                if u.hessian(&x)?.cholesky().is_none() {
                    return Err(HarnessError::NotConvex { node: y, x });
                }
            }
            Ok(u)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HarmonicFamily {
        polytope: p,
        domain,
        boundary,
        slices,
    })
}

/// Boundary norming tables, harmonic norming constants and the approximant at level `k`.
pub fn build_approximant(family: &HarmonicFamily, k: i64) -> Result<BergmanFamily> {
    let tables = family
        .boundary
        .par_iter()
        .map(|u| norming_constants(u, k))
        .collect::<std::result::Result<Vec<NormingTable>, _>>()?;
    Ok(BergmanFamily::new(harmonic_norming(&family.domain, &tables)?))
}

/// One approximant per configured level.
pub fn build_approximants(cfg: &ExperimentConfig, family: &HarmonicFamily) -> Result<Vec<BergmanFamily>> {
    cfg.levels.par_iter().map(|&k| build_approximant(family, k)).collect()
}

/// `y` axes on which families are compared: the nodes for the interval,
/// the Cartesian patch `[−w, w]²` otherwise.
pub fn comparison_y_axes(domain: &DomainN, patch_nodes: usize, patch_extent: f64) -> Vec<Vec<f64>> {
    match *domain {
        DomainN::Interval { cells } => vec![linspace(0.0, 1.0, cells + 1)],
        _ => vec![linspace(-patch_extent, patch_extent, patch_nodes); 2],
    }
}

fn y_point(y: &[f64]) -> [f64; 2] {
    [y[0], y.get(1).copied().unwrap_or(0.0)]
}

/// Exact `Φ` on a comparison grid, with the interior window mask
/// `min_r ℓ_r(∇_ρΦ) ≥ window`.
#[derive(Debug, Clone)]
pub struct ExactFamily {
    pub phi: FamilyGrid,
    pub mask: Vec<bool>,
    pub window: f64,
}

pub fn sample_exact(
    family: &HarmonicFamily,
    y_axes: Vec<Vec<f64>>,
    rho_axes: Vec<Vec<f64>>,
    window: f64,
) -> Result<ExactFamily> {
    let ys = TensorAxes::new(y_axes.clone());
    let rhos = TensorAxes::new(rho_axes.clone());
    let p = &family.polytope;
    let rows = (0..ys.len())
        .into_par_iter()
        .map(|j| {
            let u = family.potential_at_point(y_point(&ys.point(j)))?;
            let mut x = p.centroid();
            let mut vals = Vec::with_capacity(rhos.len());
            let mut mask = Vec::with_capacity(rhos.len());
            for i in 0..rhos.len() {
                let (v, xi) = HarmonicFamily::kahler_at(&u, &rhos.point(i), &x)?;
                mask.push(p.min_facet_value(&xi) >= window);
                vals.push(v);
                x = xi;
            }
            Ok((vals, mask))
        })
        .collect::<Result<Vec<_>>>()?;
    let (vals, mask): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    Ok(ExactFamily {
        phi: FamilyGrid::new(y_axes, rho_axes, vals.concat())?,
        mask: mask.concat(),
        window,
    })
}

/// `Φ_k` on a comparison grid.
pub fn sample_approximant(bf: &BergmanFamily, y_axes: Vec<Vec<f64>>, rho_axes: Vec<Vec<f64>>) -> Result<FamilyGrid> {
    let ys = TensorAxes::new(y_axes.clone());
    let rhos = TensorAxes::new(rho_axes.clone());
    let domain = bf.norming().domain();
    let rows = (0..ys.len())
        .into_par_iter()
        .map(|j| {
            let w = weights_at(domain, y_point(&ys.point(j)))?;
            Ok((0..rhos.len()).map(|i| bf.value_with_weights(&w, &rhos.point(i))).collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FamilyGrid::new(y_axes, rho_axes, rows.concat())?)
}
