//! Pass/fail suites behind the CLI subcommands.

use std::fmt;

use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use super::experiments::*;
use super::{rate_fit_series, ExperimentConfig, HarnessError, Norm, RateFit, Result};
use crate::bergman::norming_constants;
use crate::polytope::DelzantPolytope;
use crate::potentials::SymplecticPotential;
use crate::quadrature::PanelSpec;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionOutcome {
    pub id: u8,
    pub title: String,
    pub passed: bool,
    pub detail: String,
}

impl CriterionOutcome {
    pub fn new(id: u8, title: &str, passed: bool, detail: String) -> Self {
        CriterionOutcome {
            id,
            title: title.to_string(),
            passed,
            detail,
        }
    }
}

impl fmt::Display for CriterionOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {:>2} {}: {}", self.id, self.title, self.detail)
    }
}

pub fn strictly_decreasing(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[1] < w[0])
}

fn fmt_series(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3e}")).collect::<Vec<_>>().join(", ")
}

fn interval() -> DelzantPolytope {
    DelzantPolytope::interval()
}

/// Legendre round trip and gradient/Hessian duality.
pub fn legendre_suite(nodes: usize) -> Result<Vec<CriterionOutcome>> {
    let lc = legendre_check(nodes, 12.0)?;
    let dc = gradient_hessian_duality(0.1, 0.012, 100)?;
    Ok(vec![
        CriterionOutcome::new(
            1,
            "Legendre involution",
            lc.sup_error < 1e-8 && lc.seconds < 1.0,
            format!("sup error {:.3e} in {:.3} s", lc.sup_error, lc.seconds),
        ),
        CriterionOutcome::new(
            2,
            "gradient/Hessian duality",
            dc.gradient_error < 1e-6 && dc.hessian_error < 1e-4,
            format!(
                "gradient {:.3e}, Hessian {:.3e} over {} pairs",
                dc.gradient_error, dc.hessian_error, dc.pairs
            ),
        ),
    ])
}

/// Beta oracle and the peak duality identity.
pub fn norming_suite() -> Result<Vec<CriterionOutcome>> {
    let u = SymplecticPotential::guillemin(interval());
    let mut worst = 0.0f64;
    for k in 1..=32i64 {
        let t = norming_constants(&u, k)?;
        for (a, lq) in t.log_q().iter().enumerate() {
            let a = a as f64;
            let kf = k as f64;
            let oracle = ln_gamma(a + 1.0) + ln_gamma(kf - a + 1.0) - ln_gamma(kf + 2.0);
            worst = worst.max((lq - oracle).exp_m1().abs());
        }
    }
    let mut dual = 0.0f64;
    for u in [SymplecticPotential::guillemin(interval()), SymplecticPotential::perturbed(interval(), 0.1)] {
        for k in 2..=64 {
            dual = dual.max(duality_identity_error(&u, k)?);
        }
    }
    Ok(vec![
        CriterionOutcome::new(3, "norming constants vs Beta", worst < 1e-6, format!("max relative error {worst:.3e}")),
        CriterionOutcome::new(4, "log Q + log P = k u(α/k)", dual < 5e-5, format!("max defect {dual:.3e}")),
    ])
}

/// `C⁰` decrease and `log k / k` flatness, then derivative norms.
pub fn geodesic_suite(run: &ConvergenceRun) -> Result<Vec<CriterionOutcome>> {
    let r = &run.report;
    let c0: Vec<f64> = r.levels.iter().map(|l| l.c0).collect();
    let (flat_ok, flat_detail) = match rate_fit_series(&r.series(Norm::C0Raw)) {
        Err(HarnessError::RateFit(why)) => (false, format!("no rate fit: {why}")),
        Err(e) => return Err(e),
        Ok(RateFit::ExactMatch) => (true, "exact match".to_string()),
        Ok(RateFit::Fitted(s)) => (
            s.flatness_variation < 0.5,
            format!("ε k/log k = [{}], variation {:.1}%", fmt_series(&s.flatness), 100.0 * s.flatness_variation),
        ),
    };
    let mut out = vec![CriterionOutcome::new(
        6,
        "geodesic C0 convergence",
        strictly_decreasing(&c0) && flat_ok && run.seconds < 60.0,
        format!("C0 = [{}]; {flat_detail}; {:.1} s", fmt_series(&c0), run.seconds),
    )];
    let mut ok = true;
    let mut detail = Vec::new();
    for norm in Norm::DERIVATIVES {
        let v: Vec<f64> = r.levels.iter().map(|l| l.get(norm)).collect();
        let worst_ratio = v.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max);
        ok &= strictly_decreasing(&v) && worst_ratio <= 0.9;
        detail.push(format!("{} max ratio {worst_ratio:.3}", norm.name()));
    }
    out.push(CriterionOutcome::new(7, "geodesic C1/C2 convergence", ok, detail.join(", ")));
    Ok(out)
}

/// Disc `C⁰` decrease, Poisson cross-check and the HCMA residual.
pub fn disc_suite(run: &ConvergenceRun, cfg: &ExperimentConfig) -> Result<Vec<CriterionOutcome>> {
    let c0: Vec<f64> = run.report.levels.iter().map(|l| l.c0).collect();
    let amplitude = match cfg.family {
        super::FamilySpec::Loop { amplitude } => amplitude,
        _ => return Err(super::HarnessError::Config("the disc suite needs a loop family".into())),
    };
    let p = run.family.polytope().clone();
    let boundary = |t: f64| SymplecticPotential::perturbed(p.clone(), amplitude * (1.0 + t.cos()));
    let points = [[0.0, 0.0], [0.3, 0.1], [-0.2, 0.4], [0.0, -0.5]];
    let cross = poisson_cross_check(boundary, &run.approximants[0], &points, PanelSpec::new(16, 16))?;
    let coarse = hcma_run(&run.family, 9, 0.5, 25, 3.0)?;
    let fine = hcma_run(&run.family, 17, 0.5, 49, 3.0)?;
    let ratio = coarse.sup / fine.sup;
    Ok(vec![
        CriterionOutcome::new(
            8,
            "disc C0 convergence",
            strictly_decreasing(&c0) && cross < 1e-8,
            format!("C0 = [{}]; Poisson exponents agree to {cross:.2e}", fmt_series(&c0)),
        ),
        CriterionOutcome::new(
            9,
            "HCMA residual",
            (2.5..=6.0).contains(&ratio),
            format!("sup {:.3e} -> {:.3e}, ratio {ratio:.2}; Φ_ρρ > 0", coarse.sup, fine.sup),
        ),
    ])
}

/// Eells–Sampson duality of heat-flow snapshots under `h → h/2`, `Δτ → Δτ/4`.
pub fn flow_suite(coarse: &FlowDualityRun, fine: &FlowDualityRun) -> CriterionOutcome {
    let ratio = coarse.residual.sup / fine.residual.sup;
    CriterionOutcome::new(
        10,
        "heat flow / Eells-Sampson duality",
        ratio >= 3.0 && coarse.convex && fine.convex,
        format!("sup {:.3e} -> {:.3e}, ratio {ratio:.2}", coarse.residual.sup, fine.residual.sup),
    )
}

/// Which diagnostics to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Diagnostic {
    Szego,
    Localization,
    PeakAsymptotics,
    RatioBounds,
}

impl Diagnostic {
    pub const ALL: [Diagnostic; 4] =
        [Diagnostic::Szego, Diagnostic::Localization, Diagnostic::PeakAsymptotics, Diagnostic::RatioBounds];
}

pub fn diagnostics_suite(which: Diagnostic, window: f64) -> Result<CriterionOutcome> {
    let fs = SymplecticPotential::guillemin(interval());
    let perturbed = SymplecticPotential::perturbed(interval(), 0.1);
    match which {
        Diagnostic::Szego => {
            let mut ok = true;
            let mut detail = Vec::new();
            for (name, u) in [("FS", &fs), ("perturbed", &perturbed)] {
                let rhos = window_rhos(u, window, 41)?;
                let (a, b) = (szego_deviation(u, 16, &rhos)?, szego_deviation(u, 64, &rhos)?);
                ok &= a / b >= 3.0;
                detail.push(format!("{name}: {a:.3e} -> {b:.3e} (x{:.2})", a / b));
            }
            Ok(CriterionOutcome::new(5, "Szego normalization", ok, detail.join("; ")))
        }
        Diagnostic::Localization => {
            let rhos = window_rhos(&perturbed, window, 41)?;
            let (a, b) = (localization_tail(&perturbed, 8, &rhos, 0.25)?, localization_tail(&perturbed, 64, &rhos, 0.25)?);
            Ok(CriterionOutcome::new(
                13,
                "localization",
                a >= 10.0 * b,
                format!("tail {a:.3e} -> {b:.3e} (x{:.1})", a / b),
            ))
        }
        Diagnostic::PeakAsymptotics => {
            let fits = [16, 64, 256]
                .iter()
                .map(|&k| peak_fit(&perturbed, k))
                .collect::<Result<Vec<_>>>()?;
            let d: Vec<f64> = fits.iter().map(|f| f.dispersion).collect();
            Ok(CriterionOutcome::new(
                12,
                "peak asymptotics",
                d[1] <= 0.05 && strictly_decreasing(&d),
                format!("dispersion [{}] at k = 16, 64, 256; C ≈ {:.4}", fmt_series(&d), fits[2].mean),
            ))
        }
        Diagnostic::RatioBounds => {
            let fam = super::solve_harmonic_map(&ExperimentConfig::geodesic(0.1))?;
            let s = [8, 16, 32, 64]
                .iter()
                .map(|&k| ratio_bounds(&fam, k))
                .collect::<Result<Vec<_>>>()?;
            let gaps: Vec<f64> = s.iter().map(|r| r.max_gap).collect();
            let (c16, c64) = (s[1].bound, s[3].bound);
            let stable = (c64 / c16 - 1.0).abs() <= 0.2;
            Ok(CriterionOutcome::new(
                11,
                "R_k bounds",
                stable && strictly_decreasing(&gaps),
                format!("C = {c16:.6} (k=16), {c64:.6} (k=64); max|R_k - R_inf| = [{}]", fmt_series(&gaps)),
            ))
        }
    }
}
