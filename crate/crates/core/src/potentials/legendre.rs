//! Newton inversion of gradients and the Legendre transform between grids.

use super::grid::{PolytopeGrid, RadialGrid};
use super::{KahlerPotential, PotentialError, Result, ScalarField, SymplecticPotential};
use crate::potentials::guillemin_potential;

const MAX_ITER: usize = 100;
const TOL: f64 = 1e-12;

/// Solves `∇f(s) = target` for a strictly convex `f`.
///
/// In one variable the root of the increasing function `f' − target` is
/// bracketed and Newton steps leaving the bracket are replaced by bisection.
/// Points where `f` cannot be evaluated count as lying beyond the bracket end
/// they are closest to. In several variables `f − ⟨target, ·⟩` is minimized by
/// damped Newton with backtracking.
pub fn gradient_preimage(f: &dyn ScalarField, target: &[f64], start: &[f64]) -> Result<Vec<f64>> {
    super::check_dim(f.dim(), target)?;
    if f.dim() == 1 {
        let bracket = f.domain_box().map(|b| b[0]).unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
        solve_1d(f, target[0], start[0], bracket).map(|s| vec![s])
    } else {
        solve_nd(f, target, start)
    }
}

fn tolerance(target: &[f64]) -> f64 {
    TOL * target.iter().fold(1.0f64, |a, t| a.max(t.abs()))
}

fn solve_1d(f: &dyn ScalarField, target: f64, start: f64, (mut lo, mut hi): (f64, f64)) -> Result<f64> {
    let g = |s: f64| -> Option<(f64, f64)> {
        let d = f.gradient(&[s]).ok()?[0] - target;
        let dd = f.hessian(&[s]).ok()?[(0, 0)];
        Some((d, dd))
    };
    let tol = tolerance(&[target]);
    let outside = || PotentialError::OutsideImage(vec![target]);
    // a finite, evaluable bracket end must already have the right sign
    if lo.is_finite() {
        if let Some((d, _)) = g(lo) {
            if d > tol {
                return Err(outside());
            }
        }
    }
    if hi.is_finite() {
        if let Some((d, _)) = g(hi) {
            if d < -tol {
                return Err(outside());
            }
        }
    }
    let mut s = start;
    if !(s > lo && s < hi) {
        s = match (lo.is_finite(), hi.is_finite()) {
            (true, true) => 0.5 * (lo + hi),
            (true, false) => lo + 1.0,
            (false, true) => hi - 1.0,
            (false, false) => 0.0,
        };
    }
    // widen infinite ends until the sign change is enclosed
    let mut step = 1.0;
    while !lo.is_finite() || !hi.is_finite() {
        let (d, _) = g(s).ok_or_else(|| PotentialError::OutsideDomain(vec![s]))?;
        if d.abs() <= tol {
            return Ok(s);
        }
        if d < 0.0 {
            lo = s;
            if hi.is_finite() {
                break;
            }
            s += step;
        } else {
            hi = s;
            if lo.is_finite() {
                break;
            }
            s -= step;
        }
        step *= 2.0;
        if step > 1e6 {
            return Err(outside());
        }
    }
    if !(s > lo && s < hi) {
        s = 0.5 * (lo + hi);
    }
    let mut last = f64::INFINITY;
    for _ in 0..MAX_ITER {
        let next = match g(s) {
            Some((d, dd)) => {
                last = d.abs();
                if last <= tol {
                    return Ok(s);
                }
                if d < 0.0 {
                    lo = s;
                } else {
                    hi = s;
                }
                let newton = s - d / dd;
                if dd > 0.0 && newton > lo && newton < hi {
                    newton
                } else {
                    0.5 * (lo + hi)
                }
            }
            // not evaluable: shrink toward the far end of the bracket
            None => {
                if (s - lo) < (hi - s) {
                    lo = s;
                } else {
                    hi = s;
                }
                0.5 * (lo + hi)
            }
        };
        if next == s || hi - lo <= 4.0 * f64::EPSILON * s.abs().max(f64::MIN_POSITIVE) {
            // bracket exhausted in floating point
            return if last <= 1e3 * tol {
                Ok(s)
            } else {
                Err(PotentialError::NoConvergence {
                    point: vec![s],
                    iterations: MAX_ITER,
                    residual: last,
                })
            };
        }
        s = next;
    }
    Err(PotentialError::NoConvergence {
        point: vec![s],
        iterations: MAX_ITER,
        residual: last,
    })
}

fn solve_nd(f: &dyn ScalarField, target: &[f64], start: &[f64]) -> Result<Vec<f64>> {
    let m = target.len();
    let objective = |s: &[f64]| -> Option<f64> {
        let v = f.value(s).ok()?;
        Some(v - s.iter().zip(target).map(|(a, b)| a * b).sum::<f64>())
    };
    let residual = |s: &[f64]| -> Option<Vec<f64>> {
        Some(f.gradient(s).ok()?.iter().zip(target).map(|(g, t)| g - t).collect())
    };
    let norm = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let tol = tolerance(target);
    let mut s = start.to_vec();
    let mut fs = objective(&s).ok_or_else(|| PotentialError::OutsideDomain(s.clone()))?;
    let mut r = residual(&s).ok_or_else(|| PotentialError::OutsideDomain(s.clone()))?;
    for _ in 0..MAX_ITER {
        if norm(&r) <= tol {
            return Ok(s);
        }
        let h = f.hessian(&s)?;
        let rv = nalgebra::DVector::from_vec(r.clone());
        let dir = match h.cholesky() {
            Some(c) => -c.solve(&rv),
            None => -rv.clone(),
        };
        let slope = dir.dot(&rv);
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..60 {
            let trial: Vec<f64> = (0..m).map(|i| s[i] + t * dir[i]).collect();
            if let (Some(ft), Some(rt)) = (objective(&trial), residual(&trial)) {
                // near the solution the objective stops resolving progress;
                // a smaller gradient is then the acceptance test
                if ft <= fs + 1e-4 * t * slope || norm(&rt) < 0.5 * norm(&r) {
                    s = trial;
                    fs = ft;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    if norm(&r) <= 1e3 * tol {
        return Ok(s);
    }
    Err(PotentialError::NoConvergence {
        point: s,
        iterations: MAX_ITER,
        residual: norm(&r),
    })
}

/// `∇φ(ρ)`, a point of the polytope.
pub fn moment_map(phi: &KahlerPotential, rho: &[f64]) -> Result<Vec<f64>> {
    phi.gradient(rho)
}

/// Legendre transform of `φ` sampled on the polytope grid.
///
/// Each valid node `x` is mapped to `ρ` with `∇φ(ρ) = x`, warm-started from
/// the previous node, and `u(x) = ⟨x, ρ⟩ − φ(ρ)`. The smooth part `u − u₀` is
/// stored as samples and interpolated by a spline.
pub fn to_symplectic(phi: &KahlerPotential, grid: &PolytopeGrid) -> Result<SymplecticPotential> {
    let p = grid.polytope();
    if phi.dim() != p.dim() {
        return Err(PotentialError::Dimension {
            expected: p.dim(),
            found: phi.dim(),
        });
    }
    let mut f = vec![f64::NAN; grid.len()];
    let mut rho = vec![0.0; p.dim()];
    for i in grid.valid_nodes() {
        let x = grid.node(i);
        rho = gradient_preimage(phi.field(), &x, &rho).map_err(|e| locate(e, &x))?;
        let u = x.iter().zip(&rho).map(|(a, b)| a * b).sum::<f64>() - phi.value(&rho)?;
        f[i] = u - guillemin_potential(p, &x)?;
    }
    SymplecticPotential::from_samples(grid.clone(), f)
}

/// Inverse Legendre transform sampled on a radial grid.
pub fn to_kahler(u: &SymplecticPotential, grid: &RadialGrid) -> Result<KahlerPotential> {
    if u.dim() != grid.dim() {
        return Err(PotentialError::Dimension {
            expected: grid.dim(),
            found: u.dim(),
        });
    }
    let mut x = u.polytope().centroid();
    let mut values = Vec::with_capacity(grid.len());
    for i in 0..grid.len() {
        let rho = grid.node(i);
        x = gradient_preimage(u, &rho, &x).map_err(|e| locate(e, &rho))?;
        values.push(x.iter().zip(&rho).map(|(a, b)| a * b).sum::<f64>() - u.value(&x)?);
    }
    KahlerPotential::from_samples(grid.clone(), values)
}

fn locate(e: PotentialError, at: &[f64]) -> PotentialError {
    match e {
        PotentialError::NoConvergence {
            iterations, residual, ..
        } => PotentialError::NoConvergence {
            point: at.to_vec(),
            iterations,
            residual,
        },
        other => other,
    }
}
