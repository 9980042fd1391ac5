use std::sync::Arc;

use nalgebra::DMatrix;

use super::{BergmanError, NormingTable, Result};
use crate::dirichlet::{harmonic_weights, weights_at, DomainN};
use crate::lse::LogSumExp;
use crate::potentials::{abreu_delta, SymplecticPotential};

/// Harmonic extensions `λ_α` of the boundary values `log Q_{ψ(q)}(α)`.
#[derive(Debug, Clone)]
pub struct HarmonicNorming {
    level: i64,
    domain: DomainN,
    points: Vec<Vec<i64>>,
    /// `boundary[(a, q)] = log Q_q(α_a)`.
    boundary: DMatrix<f64>,
    /// `lambda[(a, y)] = λ_{α_a}(y)` at every node `y`.
    lambda: DMatrix<f64>,
}

impl HarmonicNorming {
    pub fn level(&self) -> i64 {
        self.level
    }

    pub fn domain(&self) -> &DomainN {
        &self.domain
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    /// `λ_α(y)` at node `y`.
    pub fn lambda(&self, alpha_index: usize, node: usize) -> f64 {
        self.lambda[(alpha_index, node)]
    }

    /// `λ_α` over all nodes.
    pub fn lambda_field(&self, alpha_index: usize) -> Vec<f64> {
        self.lambda.row(alpha_index).iter().copied().collect()
    }

    /// `Σ_q w_q log Q_q(α)` for explicit boundary weights.
    pub fn lambda_with_weights(&self, alpha_index: usize, weights: &[f64]) -> f64 {
        self.boundary.row(alpha_index).iter().zip(weights).map(|(a, b)| a * b).sum()
    }

    pub fn boundary_log_q(&self, alpha_index: usize, q: usize) -> f64 {
        self.boundary[(alpha_index, q)]
    }
}

/// Extends each `α`-column of the boundary tables harmonically over `N`.
///
/// `tables[q]` belongs to the `q`-th boundary node in the order of
/// [`DomainN::boundary_nodes`].
pub fn harmonic_norming(domain: &DomainN, tables: &[NormingTable]) -> Result<HarmonicNorming> {
    let nb = domain.boundary_nodes().len();
    if tables.len() != nb {
        return Err(BergmanError::LatticeMismatch(format!("{} tables for {nb} boundary nodes", tables.len())));
    }
    let first = &tables[0];
    for (q, t) in tables.iter().enumerate() {
        if t.level() != first.level() || t.points() != first.points() {
            return Err(BergmanError::LatticeMismatch(format!("boundary node {q} has a different lattice set")));
        }
    }
    let na = first.len();
    let boundary = DMatrix::from_fn(na, nb, |a, q| tables[q].log_q()[a]);
    let w = harmonic_weights(domain)?;
    let lambda = &boundary * w.transpose();
    // boundary rows of W are unit vectors, so this copy only removes rounding noise
    let mut lambda = lambda;
    for (q, &b) in domain.boundary_nodes().iter().enumerate() {
        for a in 0..na {
            lambda[(a, b)] = boundary[(a, q)];
        }
    }
    Ok(HarmonicNorming {
        level: first.level(),
        domain: domain.clone(),
        points: first.points().to_vec(),
        boundary,
        lambda,
    })
}

fn log_sum(points: &[Vec<i64>], rho: &[f64], lambda: impl Fn(usize) -> f64) -> f64 {
    let mut acc = LogSumExp::new();
    for (a, alpha) in points.iter().enumerate() {
        let dot: f64 = alpha.iter().zip(rho).map(|(&x, r)| x as f64 * r).sum();
        acc.push(dot - lambda(a));
    }
    acc.value()
}

/// `Φ_k(y, ρ) = (1/k) log Σ_α exp(⟨α, ρ⟩ − λ_α(y))` at node `y`.
pub fn bergman_potential(h: &HarmonicNorming, node: usize, rho: &[f64]) -> f64 {
    log_sum(&h.points, rho, |a| h.lambda[(a, node)]) / h.level as f64
}

/// The level-`k` approximant as a function on `N × R^m`.
#[derive(Debug, Clone)]
pub struct BergmanFamily {
    norming: Arc<HarmonicNorming>,
}

impl BergmanFamily {
    pub fn new(norming: HarmonicNorming) -> Self {
        BergmanFamily {
            norming: Arc::new(norming),
        }
    }

    pub fn level(&self) -> i64 {
        self.norming.level
    }

    pub fn norming(&self) -> &HarmonicNorming {
        &self.norming
    }

    /// `Φ_k` at a node of `N`.
    pub fn value(&self, node: usize, rho: &[f64]) -> f64 {
        bergman_potential(&self.norming, node, rho)
    }

    /// `Φ_k` at an arbitrary point of `N`, through the boundary weights at that point.
    pub fn value_at(&self, y: [f64; 2], rho: &[f64]) -> Result<f64> {
        let w = weights_at(&self.norming.domain, y)?;
        Ok(self.value_with_weights(&w, rho))
    }

    pub fn value_with_weights(&self, weights: &[f64], rho: &[f64]) -> f64 {
        let h = &self.norming;
        log_sum(&h.points, rho, |a| h.lambda_with_weights(a, weights)) / h.level as f64
    }
}

/// Ratio `R_k(y, α) = Q_y(α) e^{−λ_α(y)}` and its limit `R_∞(y, α/k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioReport {
    pub r_k: f64,
    pub r_inf: f64,
}

/// Compares the harmonic exponent with the norming constant of the harmonic
/// map itself.
///
/// By the peak identity `log Q_y(α) = k u_y(α/k) − log P_y(α)` and the
/// harmonicity of `y ↦ u_y(α/k)`, the `k u` terms cancel in
/// `log R_k = log Q_y(α) − λ_α(y)`, leaving the harmonic defect of
/// `log P_y(α)`. Its leading term comes from `P ≈ C k^{m/2} √det ∇²u` and
/// `det ∇²u = 1/(δ Π ℓ_r)`:
///
/// ```text
/// log R_∞(y, x) = ½ log δ_y(x) − ½ Σ_q W(y, q) log δ_q(x).
/// ```
pub fn ratio_report(
    h: &HarmonicNorming,
    table_at_y: &NormingTable,
    boundary: &[SymplecticPotential],
    weights: &[f64],
    u_y: &SymplecticPotential,
    alpha: &[i64],
) -> Result<RatioReport> {
    let k = h.level;
    if !u_y.polytope().lattice_is_interior(alpha, k) {
        return Err(BergmanError::NotInterior(alpha.iter().map(|&a| a as f64 / k as f64).collect()));
    }
    if boundary.len() != weights.len() {
        return Err(BergmanError::LatticeMismatch("one boundary potential per weight".into()));
    }
    let a = h
        .points
        .iter()
        .position(|p| p.as_slice() == alpha)
        .ok_or_else(|| BergmanError::MissingAlpha(alpha.to_vec()))?;
    let log_r_k = table_at_y.get(alpha)? - h.lambda_with_weights(a, weights);
    let x: Vec<f64> = alpha.iter().map(|&v| v as f64 / k as f64).collect();
    let mut mean_log_delta = 0.0;
    for (w, u) in weights.iter().zip(boundary) {
        if *w != 0.0 {
            mean_log_delta += w * abreu_delta(u, &x)?.ln();
        }
    }
    let log_r_inf = 0.5 * abreu_delta(u_y, &x)?.ln() - 0.5 * mean_log_delta;
    Ok(RatioReport {
        r_k: log_r_k.exp(),
        r_inf: log_r_inf.exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bergman::norming_constants;
    use crate::polytope::DelzantPolytope;
    use approx::assert_abs_diff_eq;

    fn interval_family(a: f64) -> (DomainN, Vec<SymplecticPotential>) {
        let p = DelzantPolytope::interval();
        (
            DomainN::interval(10).unwrap(),
            vec![SymplecticPotential::guillemin(p.clone()), SymplecticPotential::perturbed(p, a)],
        )
    }

    #[test]
    fn equal_endpoints_give_constant_lambda() {
        let u = SymplecticPotential::guillemin(DelzantPolytope::interval());
        let t = norming_constants(&u, 2).unwrap();
        let h = harmonic_norming(&DomainN::interval(4).unwrap(), &[t.clone(), t.clone()]).unwrap();
        for a in 0..3 {
            for y in 0..5 {
                assert_abs_diff_eq!(h.lambda(a, y), t.log_q()[a], epsilon = 1e-15);
            }
        }
        // Φ_2(0, 0) = ½ log(3 + 6 + 3)
        assert_abs_diff_eq!(bergman_potential(&h, 0, &[0.0]), 0.5 * 12f64.ln(), epsilon = 1e-12);
    }

    #[test]
    fn lambda_is_linear_on_the_interval() {
        let t0 = NormingTable::new(2, vec![vec![0], vec![1], vec![2]], vec![0.0, -(6f64.ln()), 0.0], "").unwrap();
        let t1 = NormingTable::new(2, vec![vec![0], vec![1], vec![2]], vec![0.0, -(6f64.ln()) + 2.0, 0.0], "").unwrap();
        let h = harmonic_norming(&DomainN::interval(2).unwrap(), &[t0, t1]).unwrap();
        assert_abs_diff_eq!(h.lambda(1, 1), -(6f64.ln()) + 1.0, epsilon = 1e-15);
    }

    #[test]
    fn single_lattice_point_gives_affine_potential() {
        let t = NormingTable::new(3, vec![vec![2]], vec![0.4], "").unwrap();
        let h = harmonic_norming(&DomainN::interval(2).unwrap(), &[t.clone(), t]).unwrap();
        for rho in [-1.0, 0.0, 2.5] {
            assert_abs_diff_eq!(bergman_potential(&h, 1, &[rho]), (2.0 * rho - 0.4) / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn mismatched_lattices_are_rejected() {
        let u = SymplecticPotential::guillemin(DelzantPolytope::interval());
        let d = DomainN::interval(2).unwrap();
        let (a, b) = (norming_constants(&u, 2).unwrap(), norming_constants(&u, 3).unwrap());
        assert!(matches!(harmonic_norming(&d, &[a.clone(), b]), Err(BergmanError::LatticeMismatch(_))));
        assert!(harmonic_norming(&d, &[a]).is_err());
    }

    #[test]
    fn ratios_are_one_on_the_boundary_and_for_constant_families() {
        let (d, ends) = interval_family(0.1);
        let k = 8;
        let tables: Vec<_> = ends.iter().map(|u| norming_constants(u, k).unwrap()).collect();
        let h = harmonic_norming(&d, &tables).unwrap();
        for alpha in 1..k {
            let r = ratio_report(&h, &tables[1], &ends, &[0.0, 1.0], &ends[1], &[alpha]).unwrap();
            assert_abs_diff_eq!(r.r_k, 1.0, epsilon = 1e-14);
            assert_abs_diff_eq!(r.r_inf, 1.0, epsilon = 1e-14);
        }
        let same = vec![ends[1].clone(), ends[1].clone()];
        let hs = harmonic_norming(&d, &[tables[1].clone(), tables[1].clone()]).unwrap();
        let r = ratio_report(&hs, &tables[1], &same, &[0.5, 0.5], &ends[1], &[3]).unwrap();
        assert_abs_diff_eq!(r.r_k, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.r_inf, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn disc_with_constant_boundary_family_has_constant_lambda() {
        let d = DomainN::disc(3, 64).unwrap();
        let u = SymplecticPotential::perturbed(DelzantPolytope::interval(), 0.05);
        let t = norming_constants(&u, 4).unwrap();
        let h = harmonic_norming(&d, &vec![t.clone(); 64]).unwrap();
        for y in 0..d.node_count() {
            assert_abs_diff_eq!(h.lambda(2, y), t.log_q()[2], epsilon = 1e-8);
        }
        let fam = BergmanFamily::new(h);
        assert_abs_diff_eq!(fam.value_at([0.1, 0.2], &[0.3]).unwrap(), fam.value(0, &[0.3]), epsilon = 1e-8);
    }
}
