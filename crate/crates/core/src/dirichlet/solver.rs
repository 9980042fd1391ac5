//! Five-point Dirichlet Laplace solver on a rectangle.

use super::{DirichletError, DomainN, Result};

/// Cholesky factor of a symmetric positive definite band matrix.
///
/// Row `i` of the factor is stored as `l[i][d] = L[i][i − d]`, `d ≤ bw`.
#[derive(Debug, Clone)]
pub struct BandedCholesky {
    bw: usize,
    l: Vec<Vec<f64>>,
}

impl BandedCholesky {
    /// Factors the matrix whose entry `(i, j)`, `i − bw ≤ j ≤ i`, is `entry(i, j)`.
    pub fn factor(n: usize, bw: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut l = vec![vec![0.0; bw + 1]; n];
        for i in 0..n {
            for j in i.saturating_sub(bw)..=i {
                let mut s = entry(i, j);
                for k in i.saturating_sub(bw).max(j.saturating_sub(bw))..j {
                    s -= l[i][i - k] * l[j][j - k];
                }
                if i == j {
                    if s <= 0.0 {
                        return Err(DirichletError::SolverFailed(format!("pivot {s:e} at row {i}")));
                    }
                    l[i][0] = s.sqrt();
                } else {
                    l[i][i - j] = s / l[j][0];
                }
            }
        }
        Ok(BandedCholesky { bw, l })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.l.len();
        let bw = self.bw;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.l[i][i - k] * y[k];
            }
            y[i] = s / self.l[i][0];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= self.l[k][k - i] * y[k];
            }
            y[i] = s / self.l[i][0];
        }
        y
    }
}

#[derive(Debug, Clone)]
enum Method {
    Direct(BandedCholesky),
    ConjugateGradient,
}

/// Solver for `−Δ_h u = 0` in the interior with Dirichlet boundary values.
#[derive(Debug, Clone)]
pub struct LaplaceSolver {
    nx: usize,
    ny: usize,
    cx: f64,
    cy: f64,
    boundary: Vec<usize>,
    method: Method,
}

/// Largest grid (in nodes) factored directly; larger ones use conjugate gradients.
const DIRECT_LIMIT: usize = 256 * 256;
const CG_TOL: f64 = 1e-10;

impl LaplaceSolver {
    pub fn new(domain: &DomainN) -> Result<Self> {
        let DomainN::Rectangle { nx, ny, width, height } = *domain else {
            return Err(DirichletError::BadDomain("the five-point solver needs a rectangle".into()));
        };
        let cx = (nx as f64 / width).powi(2);
        let cy = (ny as f64 / height).powi(2);
        let (mx, my) = (nx - 1, ny - 1);
        let method = if domain.node_count() <= DIRECT_LIMIT {
            let entry = |i: usize, j: usize| {
                if i == j {
                    2.0 * (cx + cy)
                } else if i - j == 1 && i % my != 0 {
                    -cy
                } else if i - j == my {
                    -cx
                } else {
                    0.0
                }
            };
            Method::Direct(BandedCholesky::factor(mx * my, my, entry)?)
        } else {
            Method::ConjugateGradient
        };
        Ok(LaplaceSolver {
            nx,
            ny,
            cx,
            cy,
            boundary: domain.boundary_nodes(),
            method,
        })
    }

    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let (mx, my) = (self.nx - 1, self.ny - 1);
        let mut out = vec![0.0; u.len()];
        for a in 0..mx {
            for b in 0..my {
                let i = a * my + b;
                let mut v = 2.0 * (self.cx + self.cy) * u[i];
                if b > 0 {
                    v -= self.cy * u[i - 1];
                }
                if b + 1 < my {
                    v -= self.cy * u[i + 1];
                }
                if a > 0 {
                    v -= self.cx * u[i - my];
                }
                if a + 1 < mx {
                    v -= self.cx * u[i + my];
                }
                out[i] = v;
            }
        }
        out
    }

    fn conjugate_gradient(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
        let mut x = vec![0.0; rhs.len()];
        let mut r = rhs.to_vec();
        let mut p = r.clone();
        let mut rr = dot(&r, &r);
        let target = CG_TOL * CG_TOL * rr.max(f64::MIN_POSITIVE);
        for _ in 0..10 * rhs.len() {
            if rr <= target {
                return Ok(x);
            }
            let ap = self.apply(&p);
            let alpha = rr / dot(&p, &ap);
            for i in 0..x.len() {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let next = dot(&r, &r);
            let beta = next / rr;
            rr = next;
            for i in 0..p.len() {
                p[i] = r[i] + beta * p[i];
            }
        }
        Err(DirichletError::SolverFailed("conjugate gradients did not reach 1e-10".into()))
    }

    /// Node values of the discrete harmonic function with boundary values `g`.
    pub fn solve(&self, g: &[f64]) -> Result<Vec<f64>> {
        let (nx, ny) = (self.nx, self.ny);
        let (mx, my) = (nx - 1, ny - 1);
        let mut full = vec![0.0; (nx + 1) * (ny + 1)];
        for (&b, &v) in self.boundary.iter().zip(g) {
            full[b] = v;
        }
        let node = |a: usize, b: usize| a * (ny + 1) + b;
        let mut rhs = vec![0.0; mx * my];
        for a in 1..nx {
            for b in 1..ny {
                let mut v = 0.0;
                if a == 1 {
                    v += self.cx * full[node(0, b)];
                }
                if a == nx - 1 {
                    v += self.cx * full[node(nx, b)];
                }
                if b == 1 {
                    v += self.cy * full[node(a, 0)];
                }
                if b == ny - 1 {
                    v += self.cy * full[node(a, ny)];
                }
                rhs[(a - 1) * my + (b - 1)] = v;
            }
        }
        let inner = match &self.method {
            Method::Direct(c) => c.solve(&rhs),
            Method::ConjugateGradient => self.conjugate_gradient(&rhs)?,
        };
        for a in 1..nx {
            for b in 1..ny {
                full[node(a, b)] = inner[(a - 1) * my + (b - 1)];
            }
        }
        Ok(full)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn banded_cholesky_matches_dense_solve() {
        let n = 12;
        let entry = |i: usize, j: usize| if i == j { 4.0 } else if i - j <= 2 { -1.0 + 0.1 * j as f64 / n as f64 } else { 0.0 };
        let c = BandedCholesky::factor(n, 2, entry).unwrap();
        let dense = nalgebra::DMatrix::from_fn(n, n, |i, j| if i >= j { entry(i, j) } else { entry(j, i) });
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let x = c.solve(&b);
        let r = &dense * nalgebra::DVector::from_vec(x) - nalgebra::DVector::from_vec(b);
        assert!(r.amax() < 1e-13);
    }

    #[test]
    fn conjugate_gradient_agrees_with_direct() {
        let d = DomainN::rectangle(9, 7, 1.0, 1.0).unwrap();
        let direct = LaplaceSolver::new(&d).unwrap();
        let cg = LaplaceSolver {
            method: Method::ConjugateGradient,
            ..direct.clone()
        };
        let g: Vec<f64> = (0..d.boundary_nodes().len()).map(|q| (q as f64 * 0.37).cos()).collect();
        let (a, b) = (direct.solve(&g).unwrap(), cg.solve(&g).unwrap());
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}
