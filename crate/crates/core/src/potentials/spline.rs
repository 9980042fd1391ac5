//! Not-a-knot cubic splines in one and two variables.

use nalgebra::DMatrix;

use super::{check_dim, PotentialError, Result, ScalarField};

/// Second derivatives `M_i` of the interpolating not-a-knot spline.
fn second_derivatives(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let slope = |i: usize| (ys[i + 1] - ys[i]) / h[i];
    // unknowns M_1 .. M_{n-2}; the end values follow from continuity of S'''
    let k = n - 2;
    let mut sub = vec![0.0; k];
    let mut diag = vec![0.0; k];
    let mut sup = vec![0.0; k];
    let mut rhs = vec![0.0; k];
    for r in 0..k {
        let i = r + 1;
        sub[r] = h[i - 1];
        diag[r] = 2.0 * (h[i - 1] + h[i]);
        sup[r] = h[i];
        rhs[r] = 6.0 * (slope(i) - slope(i - 1));
    }
    // M_0 = M_1 + (M_1 - M_2) h0/h1
    diag[0] += h[0] * (1.0 + h[0] / h[1]);
    if k > 1 {
        sup[0] -= h[0] * h[0] / h[1];
    }
    // M_{n-1} = M_{n-2} + (M_{n-2} - M_{n-3}) h_{n-2}/h_{n-3}
    let (a, b) = (h[n - 3], h[n - 2]);
    diag[k - 1] += b * (1.0 + b / a);
    if k > 1 {
        sub[k - 1] -= b * b / a;
    }
    let inner = thomas(&sub, &diag, &sup, &rhs);
    let mut m = Vec::with_capacity(n);
    m.push(inner[0] + (inner[0] - inner.get(1).copied().unwrap_or(inner[0])) * h[0] / h[1]);
    m.extend_from_slice(&inner);
    let last = inner[k - 1];
    let prev = if k > 1 { inner[k - 2] } else { last };
    m.push(last + (last - prev) * b / a);
    m
}

fn thomas(sub: &[f64], diag: &[f64], sup: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - sub[i] * c[i - 1];
        c[i] = sup[i] / den;
        d[i] = (rhs[i] - sub[i] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Interpolating cubic spline through `(xs[i], ys[i])`.
#[derive(Debug, Clone)]
pub struct CubicSpline {
    xs: Vec<f64>,
    ys: Vec<f64>,
    m: Vec<f64>,
}

impl CubicSpline {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() < 4 || xs.len() != ys.len() {
            return Err(PotentialError::NotTensorGrid);
        }
        if !xs.windows(2).all(|w| w[1] > w[0]) {
            return Err(PotentialError::BadGrid);
        }
        let m = second_derivatives(&xs, &ys);
        Ok(CubicSpline { xs, ys, m })
    }

    pub fn knots(&self) -> &[f64] {
        &self.xs
    }

    pub fn range(&self) -> (f64, f64) {
        (self.xs[0], self.xs[self.xs.len() - 1])
    }

    /// `(S, S', S'')` at `x`; outside the knots the end cubic is continued.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let n = self.xs.len();
        let i = self.xs.partition_point(|&k| k <= x).clamp(1, n - 1) - 1;
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let h = x1 - x0;
        let (a, b) = (x1 - x, x - x0);
        let (m0, m1) = (self.m[i], self.m[i + 1]);
        let c0 = self.ys[i] / h - m0 * h / 6.0;
        let c1 = self.ys[i + 1] / h - m1 * h / 6.0;
        let s = m0 * a.powi(3) / (6.0 * h) + m1 * b.powi(3) / (6.0 * h) + c0 * a + c1 * b;
        let ds = -m0 * a * a / (2.0 * h) + m1 * b * b / (2.0 * h) - c0 + c1;
        let dds = (m0 * a + m1 * b) / h;
        (s, ds, dds)
    }
}

/// Sampled field on a 1D or 2D tensor grid.
#[derive(Debug, Clone)]
pub enum SampledField {
    Line {
        spline: CubicSpline,
        extrapolate: bool,
    },
    Plane {
        xs: Vec<f64>,
        rows: Vec<CubicSpline>,
        extrapolate: bool,
    },
}

impl SampledField {
    /// `values` row-major over `axes`; `extrapolate` allows evaluation past the grid.
    pub fn new(axes: &[Vec<f64>], values: &[f64], extrapolate: bool) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(PotentialError::NotTensorGrid);
        }
        match axes {
            [xs] => Ok(SampledField::Line {
                spline: CubicSpline::new(xs.clone(), values.to_vec())?,
                extrapolate,
            }),
            [xs, ys] => {
                if xs.len() < 4 || values.len() != xs.len() * ys.len() {
                    return Err(PotentialError::NotTensorGrid);
                }
                let rows = values
                    .chunks(ys.len())
                    .map(|row| CubicSpline::new(ys.clone(), row.to_vec()))
                    .collect::<Result<Vec<_>>>()?;
                Ok(SampledField::Plane {
                    xs: xs.clone(),
                    rows,
                    extrapolate,
                })
            }
            _ => Err(PotentialError::NotTensorGrid),
        }
    }

    fn boxes(&self) -> Vec<(f64, f64)> {
        match self {
            SampledField::Line { spline, .. } => vec![spline.range()],
            SampledField::Plane { xs, rows, .. } => {
                vec![(xs[0], xs[xs.len() - 1]), rows[0].range()]
            }
        }
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        check_dim(self.dim(), x)?;
        let extrapolate = match self {
            SampledField::Line { extrapolate, .. } | SampledField::Plane { extrapolate, .. } => *extrapolate,
        };
        let tol = 1e-12;
        if !extrapolate
            && self
                .boxes()
                .iter()
                .zip(x)
                .any(|(&(lo, hi), &v)| v < lo - tol * (1.0 + lo.abs()) || v > hi + tol * (1.0 + hi.abs()))
        {
            return Err(PotentialError::OutsideDomain(x.to_vec()));
        }
        Ok(())
    }

    /// Value, gradient and Hessian.
    pub fn jet(&self, x: &[f64]) -> Result<(f64, Vec<f64>, DMatrix<f64>)> {
        self.check(x)?;
        match self {
            SampledField::Line { spline, .. } => {
                let (s, d, dd) = spline.eval(x[0]);
                Ok((s, vec![d], DMatrix::from_element(1, 1, dd)))
            }
            SampledField::Plane { xs, rows, .. } => {
                let n = rows.len();
                let (mut v, mut v1, mut v11) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
                for r in rows {
                    let (a, b, c) = r.eval(x[1]);
                    v.push(a);
                    v1.push(b);
                    v11.push(c);
                }
                let (s, s0, s00) = CubicSpline::new(xs.clone(), v)?.eval(x[0]);
                let (s1, s01, _) = CubicSpline::new(xs.clone(), v1)?.eval(x[0]);
                let (s11, _, _) = CubicSpline::new(xs.clone(), v11)?.eval(x[0]);
                Ok((s, vec![s0, s1], DMatrix::from_row_slice(2, 2, &[s00, s01, s01, s11])))
            }
        }
    }
}

impl ScalarField for SampledField {
    fn dim(&self) -> usize {
        match self {
            SampledField::Line { .. } => 1,
            SampledField::Plane { .. } => 2,
        }
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        match self {
            SampledField::Line { spline, .. } => Ok(spline.eval(x[0]).0),
            SampledField::Plane { .. } => Ok(self.jet(x)?.0),
        }
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.jet(x)?.1)
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.jet(x)?.2)
    }

    fn domain_box(&self) -> Option<Vec<(f64, f64)>> {
        match self {
            SampledField::Line { extrapolate: false, .. } | SampledField::Plane { extrapolate: false, .. } => {
                Some(self.boxes())
            }
            _ => None,
        }
    }
}
