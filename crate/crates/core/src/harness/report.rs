use std::io::Write;

use serde::Serialize;

use super::{ExactFamily, HarnessError, Result};
use crate::flows::FamilyGrid;

/// Sup norms of `E = Φ_k − Φ` over the interior window at one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelErrors {
    pub k: i64,
    /// `sup |E − c|`, with `c` the mean of `E` over the `ρ` slice at the first `y` node.
    pub c0: f64,
    /// `sup |E|`.
    pub c0_raw: f64,
    pub c1_y: f64,
    pub c1_rho: f64,
    pub c2_rhorho: f64,
    pub c2_yrho: f64,
    pub c2_yy: f64,
}

/// Column selector for [`LevelErrors`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Norm {
    C0,
    C0Raw,
    C1Y,
    C1Rho,
    C2RhoRho,
    C2YRho,
    C2YY,
}

impl Norm {
    pub const DERIVATIVES: [Norm; 5] = [Norm::C1Y, Norm::C1Rho, Norm::C2RhoRho, Norm::C2YRho, Norm::C2YY];

    pub fn name(self) -> &'static str {
        match self {
            Norm::C0 => "C0",
            Norm::C0Raw => "C0_raw",
            Norm::C1Y => "C1_y",
            Norm::C1Rho => "C1_rho",
            Norm::C2RhoRho => "C2_rhorho",
            Norm::C2YRho => "C2_yrho",
            Norm::C2YY => "C2_yy",
        }
    }
}

impl LevelErrors {
    pub fn get(&self, norm: Norm) -> f64 {
        match norm {
            Norm::C0 => self.c0,
            Norm::C0Raw => self.c0_raw,
            Norm::C1Y => self.c1_y,
            Norm::C1Rho => self.c1_rho,
            Norm::C2RhoRho => self.c2_rhorho,
            Norm::C2YRho => self.c2_yrho,
            Norm::C2YY => self.c2_yy,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorReport {
    pub levels: Vec<LevelErrors>,
    /// Largest spacing along each `y` axis, then each `ρ` axis.
    pub spacings: Vec<f64>,
    pub window: f64,
    /// Window nodes used for `C⁰`.
    pub window_nodes: usize,
}

impl ErrorReport {
    pub fn series(&self, norm: Norm) -> Vec<(i64, f64)> {
        self.levels.iter().map(|l| (l.k, l.get(norm))).collect()
    }

    /// CSV with columns `k, C0, C1_y, C1_rho, C2_rhorho, C2_yrho, C2_yy`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["k", "C0", "C1_y", "C1_rho", "C2_rhorho", "C2_yrho", "C2_yy"])?;
        for l in &self.levels {
            out.write_record(
                std::iter::once(l.k.to_string()).chain(
                    [l.c0, l.c1_y, l.c1_rho, l.c2_rhorho, l.c2_yrho, l.c2_yy]
                        .iter()
                        .map(|v| format!("{v:.10e}")),
                ),
            )?;
        }
        out.flush()?;
        Ok(())
    }

    /// Whitespace-separated table for gnuplot, with the raw `C⁰` as an extra column.
    pub fn write_dat<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# window {} spacings {:?}", self.window, self.spacings)?;
        writeln!(w, "# k C0 C1_y C1_rho C2_rhorho C2_yrho C2_yy C0_raw")?;
        for l in &self.levels {
            writeln!(
                w,
                "{} {:.10e} {:.10e} {:.10e} {:.10e} {:.10e} {:.10e} {:.10e}",
                l.k, l.c0, l.c1_y, l.c1_rho, l.c2_rhorho, l.c2_yrho, l.c2_yy, l.c0_raw
            )?;
        }
        Ok(())
    }
}

/// Error norms of each approximant against the exact family on its window.
///
/// Derivative norms use centered differences at window nodes one cell away
/// from every grid edge.
pub fn error_report(exact: &ExactFamily, approximants: &[(i64, FamilyGrid)]) -> Result<ErrorReport> {
    let phi = &exact.phi;
    if exact.mask.len() != phi.len() {
        return Err(HarnessError::Config("window mask does not match the grid".into()));
    }
    let (n, m) = (phi.y_dim(), phi.rho_dim());
    let slice = phi.slice_len();
    let inner: Vec<usize> = (0..phi.len())
        .filter(|&i| exact.mask[i] && phi.axes().is_inner(i, 1))
        .collect();
    let mut levels = Vec::with_capacity(approximants.len());
    for (k, approx) in approximants {
        let e = approx.difference(phi).map_err(|_| HarnessError::GridMismatch(*k))?;
        let v = e.values();
        let c = v[..slice].iter().sum::<f64>() / slice as f64;
        let sup = |f: &dyn Fn(usize) -> f64, nodes: &mut dyn Iterator<Item = usize>| nodes.map(f).fold(0.0f64, |a, b| a.max(b.abs()));
        let window = || (0..v.len()).filter(|&i| exact.mask[i]);
        let c0 = sup(&|i| v[i] - c, &mut window());
        let c0_raw = sup(&|i| v[i], &mut window());
        let over = |f: &dyn Fn(usize) -> f64| sup(f, &mut inner.iter().copied());
        let pairs = |lo: usize, hi: usize, lo2: usize, hi2: usize| -> Vec<(usize, usize)> {
            (lo..hi).flat_map(|a| (lo2..hi2).map(move |b| (a, b))).collect()
        };
        let c1_y = (0..n).map(|a| over(&|i| e.d1(i, a))).fold(0.0, f64::max);
        let c1_rho = (n..n + m).map(|a| over(&|i| e.d1(i, a))).fold(0.0, f64::max);
        let max2 = |ps: Vec<(usize, usize)>| ps.into_iter().map(|(a, b)| over(&|i| e.d11(i, a, b))).fold(0.0, f64::max);
        levels.push(LevelErrors {
            k: *k,
            c0,
            c0_raw,
            c1_y,
            c1_rho,
            c2_rhorho: max2(pairs(n, n + m, n, n + m)),
            c2_yrho: max2(pairs(0, n, n, n + m)),
            c2_yy: max2(pairs(0, n, 0, n)),
        });
    }
    let spacings = phi
        .axes()
        .axes()
        .iter()
        .map(|a| a.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max))
        .collect();
    Ok(ErrorReport {
        levels,
        spacings,
        window: exact.window,
        window_nodes: exact.mask.iter().filter(|&&b| b).count(),
    })
}

/// Least-squares fit of `log ε = a + s·log k`, with the flatness of
/// `ε_k·k/log k` as a check of the `log k / k` model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum RateFit {
    /// All errors vanish.
    ExactMatch,
    Fitted(RateFitStats),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFitStats {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// `ε_k·k/log k` per level.
    pub flatness: Vec<f64>,
    /// `(max − min)/min` of `flatness`.
    pub flatness_variation: f64,
    /// RMS log-residual of the power law and of the best `c·log k/k` model.
    pub power_rms: f64,
    pub log_model_rms: f64,
}

pub fn rate_fit_series(series: &[(i64, f64)]) -> Result<RateFit> {
    if series.len() < 4 {
        return Err(HarnessError::RateFit(format!("{} levels; at least 4 needed", series.len())));
    }
    if series.iter().all(|&(_, e)| e == 0.0) {
        return Ok(RateFit::ExactMatch);
    }
    if series.iter().any(|&(k, e)| !(e > 0.0 && e.is_finite()) || k < 2) {
        return Err(HarnessError::RateFit("errors must be positive and finite at levels k ≥ 2".into()));
    }
    let xs: Vec<f64> = series.iter().map(|&(k, _)| (k as f64).ln()).collect();
    let ys: Vec<f64> = series.iter().map(|&(_, e)| e.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    let flatness: Vec<f64> = series.iter().map(|&(k, e)| e * k as f64 / (k as f64).ln()).collect();
    let (lo, hi) = flatness.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &f| (a.min(f), b.max(f)));
    // best constant for log ε = log c + log(log k/k) is the mean log-residual
    let log_res: Vec<f64> = flatness.iter().map(|f| f.ln()).collect();
    let mean_log = log_res.iter().sum::<f64>() / n;
    let log_model_rms = (log_res.iter().map(|r| (r - mean_log).powi(2)).sum::<f64>() / n).sqrt();
    Ok(RateFit::Fitted(RateFitStats {
        slope,
        intercept,
        r_squared,
        flatness,
        flatness_variation: (hi - lo) / lo,
        power_rms: (ss_res / n).sqrt(),
        log_model_rms,
    }))
}

/// Rate fit of one column of the report.
pub fn rate_fit(report: &ErrorReport, norm: Norm) -> Result<RateFit> {
    rate_fit_series(&report.series(norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::linspace;
    use approx::assert_abs_diff_eq;

    fn exact() -> ExactFamily {
        let phi = FamilyGrid::from_fn(vec![linspace(0.0, 1.0, 11)], vec![linspace(-2.0, 2.0, 21)], |y, r| {
            Ok::<_, crate::flows::FlowError>((1.0 + r[0].exp()).ln() + 0.1 * y[0] * r[0])
        })
        .unwrap();
        let mask = (0..phi.len()).map(|i| phi.point(i).1[0].abs() <= 1.5).collect();
        ExactFamily { phi, mask, window: 0.1 }
    }

    fn shifted(e: &ExactFamily, f: impl Fn(&[f64], &[f64]) -> f64) -> FamilyGrid {
        let g = &e.phi;
        let vals = (0..g.len()).map(|i| {
            let (y, r) = g.point(i);
            g.values()[i] + f(&y, &r)
        });
        FamilyGrid::new(g.axes().axes()[..1].to_vec(), g.axes().axes()[1..].to_vec(), vals.collect()).unwrap()
    }

    #[test]
    fn injected_and_shifted_families() {
        let e = exact();
        let r = error_report(&e, &[(4, e.phi.clone()), (8, shifted(&e, |_, _| 0.3))]).unwrap();
        for norm in [Norm::C0, Norm::C0Raw].into_iter().chain(Norm::DERIVATIVES) {
            assert_eq!(r.levels[0].get(norm), 0.0);
        }
        assert_abs_diff_eq!(r.levels[1].c0, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.levels[1].c0_raw, 0.3, epsilon = 1e-15);
        for norm in Norm::DERIVATIVES {
            assert_abs_diff_eq!(r.levels[1].get(norm), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn derivative_norms_of_a_polynomial_error() {
        let e = exact();
        // E = y² ρ / 2: E_y = yρ, E_ρ = y²/2, E_yρ = y, E_yy = ρ, E_ρρ = 0
        let r = error_report(&e, &[(2, shifted(&e, |y, r| 0.5 * y[0] * y[0] * r[0]))]).unwrap();
        let l = r.levels[0];
        assert_abs_diff_eq!(l.c1_y, 0.9 * 1.4, epsilon = 1e-12);
        assert_abs_diff_eq!(l.c1_rho, 0.5 * 0.81, epsilon = 1e-12);
        assert_abs_diff_eq!(l.c2_yrho, 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(l.c2_yy, 1.4, epsilon = 1e-12);
        assert_abs_diff_eq!(l.c2_rhorho, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn shrinking_the_window_never_increases_norms() {
        let e = exact();
        let approx = shifted(&e, |y, r| (y[0] * r[0]).sin() * 0.01);
        let wide = error_report(&e, &[(2, approx.clone())]).unwrap();
        let mut narrow = e.clone();
        for (i, m) in narrow.mask.iter_mut().enumerate() {
            *m &= e.phi.point(i).1[0].abs() <= 0.8;
        }
        let narrow = error_report(&narrow, &[(2, approx)]).unwrap();
        for norm in [Norm::C0, Norm::C0Raw].into_iter().chain(Norm::DERIVATIVES) {
            assert!(narrow.levels[0].get(norm) <= wide.levels[0].get(norm));
        }
    }

    #[test]
    fn synthetic_rates() {
        let ks = [8i64, 16, 32, 64, 128];
        let log_model: Vec<_> = ks.iter().map(|&k| (k, (k as f64).ln() / k as f64)).collect();
        let RateFit::Fitted(s) = rate_fit_series(&log_model).unwrap() else { panic!() };
        assert!(s.flatness.iter().all(|f| (f - 1.0).abs() < 1e-10));
        assert!(s.log_model_rms < 1e-10);
        let root: Vec<_> = ks.iter().map(|&k| (k, (k as f64).powf(-0.5))).collect();
        let RateFit::Fitted(s) = rate_fit_series(&root).unwrap() else { panic!() };
        assert_abs_diff_eq!(s.slope, -0.5, epsilon = 1e-10);
        assert_abs_diff_eq!(s.r_squared, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn degenerate_fits() {
        let zeros = [(8, 0.0), (16, 0.0), (32, 0.0), (64, 0.0)];
        assert_eq!(rate_fit_series(&zeros).unwrap(), RateFit::ExactMatch);
        assert!(rate_fit_series(&zeros[..3]).is_err());
        assert!(rate_fit_series(&[(8, 1.0), (16, 0.0), (32, 0.5), (64, 0.1)]).is_err());
    }

    #[test]
    fn csv_and_dat_layout() {
        let e = exact();
        let r = error_report(&e, &[(4, shifted(&e, |_, r| 0.01 * r[0]))]).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,C0,C1_y,C1_rho,C2_rhorho,C2_yrho,C2_yy\n4,"));
        let mut dat = Vec::new();
        r.write_dat(&mut dat).unwrap();
        assert_eq!(String::from_utf8(dat).unwrap().lines().count(), 3);
    }
}
