use statrs::function::gamma::ln_gamma;

use super::{BergmanError, NormingTable, Result};
use crate::lse::LogSumExp;
use crate::polytope::DelzantPolytope;
use crate::potentials::{KahlerPotential, ScalarField, SymplecticPotential};

fn dot(alpha: &[i64], rho: &[f64]) -> f64 {
    alpha.iter().zip(rho).map(|(&a, r)| a as f64 * r).sum()
}

/// `log P(α, ρ) = ⟨α, ρ⟩ − kφ(ρ) − log Q(α)`.
pub fn log_normalized_monomial(table: &NormingTable, phi: &KahlerPotential, alpha: &[i64], rho: &[f64]) -> Result<f64> {
    let q = table.get(alpha)?;
    Ok(dot(alpha, rho) - table.level() as f64 * phi.value(rho)? - q)
}

pub fn normalized_monomial(table: &NormingTable, phi: &KahlerPotential, alpha: &[i64], rho: &[f64]) -> Result<f64> {
    Ok(log_normalized_monomial(table, phi, alpha, rho)?.exp())
}

fn interior_point(u: &SymplecticPotential, k: i64, alpha: &[i64]) -> Result<Vec<f64>> {
    let x: Vec<f64> = alpha.iter().map(|&a| a as f64 / k as f64).collect();
    if !u.polytope().lattice_is_interior(alpha, k) {
        return Err(BergmanError::NotInterior(x));
    }
    Ok(x)
}

/// Peak value `P(α) = exp(k u(α/k) − log Q(α))`.
///
/// The peak of `ρ ↦ P(α, ρ)` sits at `ρ* = ∇u(α/k)`, where
/// `⟨α, ρ*⟩ − kφ(ρ*) = k u(α/k)` by the Legendre identity.
pub fn peak_value(table: &NormingTable, u: &SymplecticPotential, alpha: &[i64]) -> Result<f64> {
    let k = table.level();
    let x = interior_point(u, k, alpha)?;
    Ok((k as f64 * u.value(&x)? - table.get(alpha)?).exp())
}

/// Peak value by direct evaluation of the normalized monomial at `∇u(α/k)`.
pub fn peak_value_at_preimage(
    table: &NormingTable,
    u: &SymplecticPotential,
    phi: &KahlerPotential,
    alpha: &[i64],
) -> Result<f64> {
    let x = interior_point(u, table.level(), alpha)?;
    let rho = u.gradient(&x)?;
    normalized_monomial(table, phi, alpha, &rho)
}

/// Bargmann–Fock model peak `k e^{−α} α^α / α!` (with `0⁰ = 1`).
pub fn bargmann_fock_peak(k: i64, alpha: i64) -> f64 {
    let a = alpha as f64;
    let a_log_a = if alpha == 0 { 0.0 } else { a * a.ln() };
    ((k as f64).ln() - a + a_log_a - ln_gamma(a + 1.0)).exp()
}

/// Density of states `(V/k^m) Σ_α P(α, ρ)`, which tends to 1.
///
/// The factor `V/k^m` (with `V` the Euclidean volume of `P`) is the volume
/// normalization of the `L²` inner product, dropped from the norming
/// constants themselves.
pub fn szego_sum(table: &NormingTable, phi: &KahlerPotential, p: &DelzantPolytope, rho: &[f64]) -> Result<f64> {
    let k = table.level();
    let mut acc = LogSumExp::new();
    for alpha in table.points() {
        acc.push(log_normalized_monomial(table, phi, alpha, rho)?);
    }
    Ok((acc.value() + volume_factor(p, k)?).exp())
}

fn volume_factor(p: &DelzantPolytope, k: i64) -> Result<f64> {
    Ok(p.volume()?.ln() - p.dim() as f64 * (k as f64).ln())
}

/// Part of the Szegő sum carried by `α` with `|α/k − ∇φ(ρ)| > k^{δ − 1/2}`.
pub fn localization_gap(
    table: &NormingTable,
    phi: &KahlerPotential,
    p: &DelzantPolytope,
    rho: &[f64],
    delta: f64,
) -> Result<f64> {
    if !(delta > 0.0 && delta < 0.5) {
        return Err(BergmanError::BadDelta(delta));
    }
    let k = table.level() as f64;
    let radius = k.powf(delta - 0.5);
    let center = phi.gradient(rho)?;
    let mut acc = LogSumExp::new();
    for alpha in table.points() {
        let dist = alpha
            .iter()
            .zip(&center)
            .map(|(&a, c)| (a as f64 / k - c).powi(2))
            .sum::<f64>()
            .sqrt();
        if dist > radius {
            acc.push(log_normalized_monomial(table, phi, alpha, rho)?);
        }
    }
    Ok((acc.value() + volume_factor(p, table.level())?).exp())
}

/// Leading constant of the interior peak asymptotics
/// `P(α) ≈ C k^{m/2} √det ∇²u(α/k)`.
#[derive(Debug, Clone)]
pub struct PeakFit {
    pub constants: Vec<f64>,
    pub mean: f64,
    /// Standard deviation over mean.
    pub dispersion: f64,
    /// `(max − min)/mean`.
    pub spread: f64,
}

/// Fits `C` for each `α`; every `α/k` must be farther than `δ_k = 1/(√k log k)` from all facets.
pub fn peak_asymptotics_check(table: &NormingTable, u: &SymplecticPotential, alphas: &[Vec<i64>]) -> Result<PeakFit> {
    let k = table.level();
    let kf = k as f64;
    let delta = 1.0 / (kf.sqrt() * kf.ln());
    let m = u.dim() as f64;
    let mut constants = Vec::with_capacity(alphas.len());
    for alpha in alphas {
        let x = interior_point(u, k, alpha)?;
        if u.polytope().near_facets(&x, delta)?.1 != 0 {
            return Err(BergmanError::NotInterior(x));
        }
        let det = u.hessian(&x)?.determinant();
        if !(det > 0.0) {
            return Err(crate::potentials::PotentialError::NotConvex(x).into());
        }
        constants.push(peak_value(table, u, alpha)? * kf.powf(-m / 2.0) / det.sqrt());
    }
    if constants.is_empty() {
        return Err(BergmanError::Table("no lattice points to fit".into()));
    }
    let n = constants.len() as f64;
    let mean = constants.iter().sum::<f64>() / n;
    let var = constants.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / n;
    let (lo, hi) = constants
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &c| (l.min(c), h.max(c)));
    Ok(PeakFit {
        dispersion: var.sqrt() / mean,
        spread: (hi - lo) / mean,
        mean,
        constants,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bergman::norming_constants;
    use crate::potentials::fields::{shared, FubiniStudy};
    use crate::potentials::RadialGrid;
    use approx::assert_abs_diff_eq;

    fn fs() -> (SymplecticPotential, KahlerPotential) {
        let p = DelzantPolytope::interval();
        let grid = RadialGrid::uniform(1, -12.0, 12.0, 241).unwrap();
        (
            SymplecticPotential::guillemin(p),
            KahlerPotential::from_field(grid, shared(FubiniStudy::Simplex(1))).unwrap(),
        )
    }

    #[test]
    fn monomial_and_peak_at_level_two() {
        let (u, phi) = fs();
        let t = norming_constants(&u, 2).unwrap();
        assert_abs_diff_eq!(normalized_monomial(&t, &phi, &[1], &[0.0]).unwrap(), 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(peak_value(&t, &u, &[1]).unwrap(), 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(peak_value_at_preimage(&t, &u, &phi, &[1]).unwrap(), 1.5, epsilon = 1e-12);
        assert!(peak_value(&t, &u, &[0]).is_err());
        // doubling every Q halves every P(α, z)
        let doubled = t.shifted(2f64.ln());
        assert_abs_diff_eq!(normalized_monomial(&doubled, &phi, &[1], &[0.3]).unwrap(), 0.5 * normalized_monomial(&t, &phi, &[1], &[0.3]).unwrap(), epsilon = 1e-14);
    }

    #[test]
    fn peak_is_the_maximum_over_rho() {
        let (u, phi) = fs();
        let t = norming_constants(&u, 8).unwrap();
        let grid = phi.grid();
        for a in 1..8 {
            let (best, _) = (0..grid.len())
                .map(|i| (i, normalized_monomial(&t, &phi, &[a], &grid.node(i)).unwrap()))
                .fold((0, f64::NEG_INFINITY), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
            let rho_star = u.gradient(&[a as f64 / 8.0]).unwrap()[0];
            let h = grid.node(1)[0] - grid.node(0)[0];
            assert!((grid.node(best)[0] - rho_star).abs() <= h);
        }
    }

    #[test]
    fn bargmann_fock_values() {
        assert_abs_diff_eq!(bargmann_fock_peak(5, 0), 5.0, epsilon = 1e-14);
        assert_abs_diff_eq!(bargmann_fock_peak(5, 1), 5.0 / std::f64::consts::E, epsilon = 1e-14);
        // Stirling: α^α e^{−α}/α! ≈ 1/√(2πα)
        let ratio = bargmann_fock_peak(3, 400) / (3.0 / (2.0 * std::f64::consts::PI * 400.0).sqrt());
        assert!((ratio - 1.0).abs() < 1e-3);
    }

    #[test]
    fn szego_sum_of_fubini_study_is_one_plus_one_over_k() {
        let (u, phi) = fs();
        let p = DelzantPolytope::interval();
        for k in [2, 4, 8] {
            let t = norming_constants(&u, k).unwrap();
            for rho in [-1.0, 0.0, 0.5] {
                let s = szego_sum(&t, &phi, &p, &[rho]).unwrap();
                // direct summation: Σ_α C(k,α)(k+1) x^α(1−x)^{k−α} / k = (k+1)/k
                assert_abs_diff_eq!(s, (k as f64 + 1.0) / k as f64, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn szego_sum_ignores_constant_shifts() {
        let p = DelzantPolytope::interval();
        let u = SymplecticPotential::perturbed(p.clone(), 0.1);
        let grid = RadialGrid::uniform(1, -6.0, 6.0, 121).unwrap();
        let phi = KahlerPotential::dual_of(&u, grid.clone()).unwrap();
        let us = u.shifted(0.4);
        let phis = KahlerPotential::dual_of(&us, grid).unwrap();
        let a = szego_sum(&norming_constants(&u, 6).unwrap(), &phi, &p, &[0.2]).unwrap();
        let b = szego_sum(&norming_constants(&us, 6).unwrap(), &phis, &p, &[0.2]).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-10);
    }

    #[test]
    fn localization_gap_bounds() {
        let (u, phi) = fs();
        let p = DelzantPolytope::interval();
        let t = norming_constants(&u, 8).unwrap();
        // window of radius 8^{-0.01} ≈ 0.98 around 1/2 covers P
        assert_eq!(localization_gap(&t, &phi, &p, &[0.0], 0.49).unwrap(), 0.0);
        let gap = localization_gap(&t, &phi, &p, &[1.0], 0.25).unwrap();
        assert!(gap > 0.0 && gap <= szego_sum(&t, &phi, &p, &[1.0]).unwrap());
        assert!(localization_gap(&t, &phi, &p, &[0.0], 0.5).is_err());
    }

    #[test]
    fn peak_fit_rejects_near_facet_points() {
        let (u, _) = fs();
        let t = norming_constants(&u, 16).unwrap();
        assert!(peak_asymptotics_check(&t, &u, &[vec![1]]).is_err());
        let fit = peak_asymptotics_check(&t, &u, &[vec![6], vec![8], vec![10]]).unwrap();
        assert!(fit.dispersion < 0.05);
    }
}
