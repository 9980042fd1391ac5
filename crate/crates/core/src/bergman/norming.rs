use rayon::prelude::*;

use super::{BergmanError, NormingTable, Result};
use crate::lse::LogSumExp;
use crate::potentials::{ScalarField, SymplecticPotential};
use crate::quadrature::{polytope_rule, NodeSet, PanelSpec};

/// Composite Gauss–Legendre settings for the norming integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub panels: usize,
    pub order: usize,
    /// Largest accepted change of `log Q` when the panel count is doubled;
    /// `None` skips the doubling check.
    pub tolerance: Option<f64>,
}

impl QuadratureOptions {
    /// `8k` panels per axis, eight nodes each, validated by doubling to `1e-8`.
    pub fn for_level(k: i64) -> Self {
        QuadratureOptions {
            panels: 8 * k.max(1) as usize,
            order: 8,
            tolerance: Some(1e-8),
        }
    }
}

/// Per-node data that does not depend on `α`:
/// `base = log w + k u(x) − k⟨x, ∇u(x)⟩` and `g = ∇u(x)`.
fn node_data(u: &SymplecticPotential, k: i64, nodes: &NodeSet) -> Result<(Vec<f64>, Vec<f64>)> {
    let m = nodes.dim;
    let kf = k as f64;
    let rows: Vec<(f64, Vec<f64>)> = (0..nodes.len())
        .into_par_iter()
        .map(|i| {
            let x = nodes.point(i);
            let v = u.value(x)?;
            let g = u.gradient(x)?;
            let xg: f64 = x.iter().zip(&g).map(|(a, b)| a * b).sum();
            Ok((nodes.weights[i].ln() + kf * v - kf * xg, g))
        })
        .collect::<Result<_>>()?;
    let mut base = Vec::with_capacity(rows.len());
    let mut grads = Vec::with_capacity(rows.len() * m);
    for (b, g) in rows {
        base.push(b);
        grads.extend(g);
    }
    Ok((base, grads))
}

fn log_q_values(u: &SymplecticPotential, k: i64, points: &[Vec<i64>], layout: PanelSpec) -> Result<Vec<f64>> {
    let nodes = polytope_rule(u.polytope(), layout)?;
    let m = nodes.dim;
    let (base, grads) = node_data(u, k, &nodes)?;
    Ok(points
        .par_iter()
        .map(|alpha| {
            let a: Vec<f64> = alpha.iter().map(|&v| v as f64).collect();
            let mut acc = LogSumExp::new();
            for (i, b) in base.iter().enumerate() {
                let g = &grads[i * m..(i + 1) * m];
                acc.push(b + a.iter().zip(g).map(|(x, y)| x * y).sum::<f64>());
            }
            acc.value()
        })
        .collect())
}

/// `log Q_k(α)` for all `α ∈ kP ∩ Z^m` with the default rule for level `k`.
pub fn norming_constants(u: &SymplecticPotential, k: i64) -> Result<NormingTable> {
    norming_constants_with(u, k, QuadratureOptions::for_level(k))
}

pub fn norming_constants_with(u: &SymplecticPotential, k: i64, opts: QuadratureOptions) -> Result<NormingTable> {
    let lattice = u.polytope().lattice_points(k)?;
    let points = lattice.points;
    let layout = PanelSpec::new(opts.panels, opts.order);
    let coarse = log_q_values(u, k, &points, layout)?;
    let values = match opts.tolerance {
        None => coarse,
        Some(tol) => {
            let fine = log_q_values(u, k, &points, layout.doubled())?;
            for ((a, c), f) in points.iter().zip(&coarse).zip(&fine) {
                let diff = (c - f).abs();
                if !(diff <= tol) {
                    return Err(BergmanError::QuadratureNotConverged {
                        alpha: a.clone(),
                        difference: diff,
                    });
                }
            }
            fine
        }
    };
    let provenance = format!(
        "level {k}, {} panels x {} Gauss-Legendre nodes per axis",
        if opts.tolerance.is_some() { 2 * layout.panels } else { layout.panels },
        layout.order
    );
    NormingTable::new(k, points, values, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polytope::DelzantPolytope;
    use approx::assert_relative_eq;
    use statrs::function::gamma::ln_gamma;

    /// `log B(α+1, k−α+1) = log(α!(k−α)!/(k+1)!)`.
    fn log_beta(k: i64, a: i64) -> f64 {
        ln_gamma(a as f64 + 1.0) + ln_gamma((k - a) as f64 + 1.0) - ln_gamma(k as f64 + 2.0)
    }

    #[test]
    fn fubini_study_level_two() {
        let u = SymplecticPotential::guillemin(DelzantPolytope::interval());
        let t = norming_constants(&u, 2).unwrap();
        let q: Vec<f64> = t.log_q().iter().map(|v| v.exp()).collect();
        assert_relative_eq!(q[0], 1.0 / 3.0, max_relative = 1e-12);
        assert_relative_eq!(q[1], 1.0 / 6.0, max_relative = 1e-12);
        assert_relative_eq!(q[2], 1.0 / 3.0, max_relative = 1e-12);
    }

    #[test]
    fn fubini_study_matches_beta_oracle() {
        let u = SymplecticPotential::guillemin(DelzantPolytope::interval());
        for k in [1, 5, 17, 32] {
            let t = norming_constants(&u, k).unwrap();
            for (a, v) in t.points().iter().zip(t.log_q()) {
                assert!((v - log_beta(k, a[0])).abs() < 1e-10, "k={k} α={a:?}");
            }
        }
    }

    #[test]
    fn beta_oracle_by_independent_half_line_quadrature() {
        // ∫₀^∞ t^α (1+t)^{−k−2} dt with t = s/(1−s), midpoint rule on a fine grid
        let k = 6;
        for a in 0..=k {
            let n = 200_000;
            let h = 1.0 / n as f64;
            let v: f64 = (0..n)
                .map(|i| {
                    let s = (i as f64 + 0.5) * h;
                    let t = s / (1.0 - s);
                    t.powi(a as i32) * (1.0 + t).powi(-(k as i32) - 2) / (1.0 - s).powi(2) * h
                })
                .sum();
            assert_relative_eq!(v.ln(), log_beta(k, a), max_relative = 1e-6);
        }
    }

    #[test]
    fn constant_shift_moves_log_q_by_k_c() {
        let p = DelzantPolytope::interval();
        let u = SymplecticPotential::perturbed(p, 0.1);
        let (a, b) = (norming_constants(&u, 4).unwrap(), norming_constants(&u.shifted(0.7), 4).unwrap());
        for (x, y) in a.log_q().iter().zip(b.log_q()) {
            assert!((y - x - 4.0 * 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn simplex_fubini_study_closed_form() {
        // ∫_Δ x^a y^b (1−x−y)^c = a! b! c! / (k+2)!
        let u = SymplecticPotential::guillemin(DelzantPolytope::simplex2());
        let k = 3;
        let opts = QuadratureOptions { panels: 6, order: 8, tolerance: Some(1e-8) };
        let t = norming_constants_with(&u, k, opts).unwrap();
        assert_eq!(t.len(), 10);
        for (a, v) in t.points().iter().zip(t.log_q()) {
            let c = k - a[0] - a[1];
            let exact = ln_gamma(a[0] as f64 + 1.0) + ln_gamma(a[1] as f64 + 1.0) + ln_gamma(c as f64 + 1.0)
                - ln_gamma(k as f64 + 3.0);
            assert!((v - exact).abs() < 1e-9, "{a:?}");
        }
    }

    #[test]
    fn doubling_check_catches_coarse_rules() {
        let u = SymplecticPotential::perturbed(DelzantPolytope::interval(), 0.1);
        let opts = QuadratureOptions { panels: 1, order: 2, tolerance: Some(1e-12) };
        assert!(matches!(
            norming_constants_with(&u, 6, opts),
            Err(BergmanError::QuadratureNotConverged { .. })
        ));
    }
}
