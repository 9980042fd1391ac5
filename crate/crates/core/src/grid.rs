//! Tensor-product sample grids and centered finite differences on them.

/// Per-axis sample vectors; nodes are stored row-major (last axis fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct TensorAxes {
    axes: Vec<Vec<f64>>,
    strides: Vec<usize>,
}

impl TensorAxes {
    pub fn new(axes: Vec<Vec<f64>>) -> Self {
        let mut strides = vec![1; axes.len()];
        for d in (0..axes.len().saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * axes[d + 1].len();
        }
        TensorAxes { axes, strides }
    }

    pub fn uniform(lo: &[f64], hi: &[f64], n: &[usize]) -> Self {
        let axes = lo
            .iter()
            .zip(hi)
            .zip(n)
            .map(|((&a, &b), &n)| linspace(a, b, n))
            .collect();
        Self::new(axes)
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, d: usize) -> &[f64] {
        &self.axes[d]
    }

    pub fn axes(&self) -> &[Vec<f64>] {
        &self.axes
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(Vec::len).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Vec::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn stride(&self, d: usize) -> usize {
        self.strides[d]
    }

    pub fn unravel(&self, mut i: usize) -> Vec<usize> {
        self.strides
            .iter()
            .map(|&s| {
                let q = i / s;
                i -= q * s;
                q
            })
            .collect()
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn point(&self, i: usize) -> Vec<f64> {
        self.unravel(i)
            .iter()
            .enumerate()
            .map(|(d, &j)| self.axes[d][j])
            .collect()
    }

    /// True when every axis index is at least `margin` cells from both ends.
    pub fn is_inner(&self, i: usize, margin: usize) -> bool {
        self.unravel(i)
            .iter()
            .zip(&self.axes)
            .all(|(&j, a)| j >= margin && j + margin < a.len())
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.axes
            .iter()
            .all(|a| !a.is_empty() && a.windows(2).all(|w| w[1] > w[0]))
    }

    /// Centered first derivative along `d` at node `i`.
    ///
    /// Uses the three-point formula for possibly unequal spacings; one-sided
    /// at the ends of the axis.
    pub fn d1(&self, values: &[f64], i: usize, d: usize) -> f64 {
        let idx = self.unravel(i);
        let a = &self.axes[d];
        let s = self.strides[d];
        let j = idx[d];
        let n = a.len();
        if j == 0 {
            (values[i + s] - values[i]) / (a[1] - a[0])
        } else if j == n - 1 {
            (values[i] - values[i - s]) / (a[j] - a[j - 1])
        } else {
            let (hm, hp) = (a[j] - a[j - 1], a[j + 1] - a[j]);
            let (um, u0, up) = (values[i - s], values[i], values[i + s]);
            (up * hm * hm - um * hp * hp + u0 * (hp * hp - hm * hm)) / (hm * hp * (hm + hp))
        }
    }

    /// Centered second derivative along `d`; the stencil is shifted inward at the ends.
    pub fn d2(&self, values: &[f64], i: usize, d: usize) -> f64 {
        let idx = self.unravel(i);
        let a = &self.axes[d];
        let s = self.strides[d];
        let n = a.len();
        let j = idx[d].clamp(1, n - 2);
        let c = i - idx[d] * s + j * s;
        let (hm, hp) = (a[j] - a[j - 1], a[j + 1] - a[j]);
        2.0 * (values[c - s] * hp - values[c] * (hm + hp) + values[c + s] * hm) / (hm * hp * (hm + hp))
    }

    /// Mixed derivative `∂_d ∂_e` by the four-corner formula (interior nodes only).
    pub fn d11(&self, values: &[f64], i: usize, d: usize, e: usize) -> f64 {
        if d == e {
            return self.d2(values, i, d);
        }
        let idx = self.unravel(i);
        let (ad, ae) = (&self.axes[d], &self.axes[e]);
        let (sd, se) = (self.strides[d], self.strides[e]);
        let jd = idx[d].clamp(1, ad.len() - 2);
        let je = idx[e].clamp(1, ae.len() - 2);
        let c = i - idx[d] * sd - idx[e] * se + jd * sd + je * se;
        let hd = ad[jd + 1] - ad[jd - 1];
        let he = ae[je + 1] - ae[je - 1];
        (values[c + sd + se] - values[c + sd - se] - values[c - sd + se] + values[c - sd - se]) / (hd * he)
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ravel_round_trip() {
        let g = TensorAxes::uniform(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0], &[3, 4, 5]);
        for i in 0..g.len() {
            assert_eq!(g.ravel(&g.unravel(i)), i);
        }
        assert_eq!(g.stride(0), 20);
    }

    #[test]
    fn differences_are_exact_on_quadratics() {
        let g = TensorAxes::new(vec![vec![0.0, 0.1, 0.25, 0.5, 0.6], linspace(-1.0, 1.0, 7)]);
        let f = |p: &[f64]| 3.0 * p[0] * p[0] - 2.0 * p[0] * p[1] + p[1] * p[1] + p[0];
        let vals: Vec<f64> = (0..g.len()).map(|i| f(&g.point(i))).collect();
        let i = g.ravel(&[2, 3]);
        let p = g.point(i);
        assert_abs_diff_eq!(g.d1(&vals, i, 0), 6.0 * p[0] - 2.0 * p[1] + 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.d1(&vals, i, 1), -2.0 * p[0] + 2.0 * p[1], epsilon = 1e-12);
        assert_abs_diff_eq!(g.d2(&vals, i, 0), 6.0, epsilon = 1e-10);
        assert_abs_diff_eq!(g.d2(&vals, i, 1), 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(g.d11(&vals, i, 0, 1), -2.0, epsilon = 1e-10);
    }
}
