//! Harmonic extension of boundary data over a flat parameter domain `N`.
//!
//! Every extension is linear in the boundary data, so each domain exposes a
//! weight matrix `W` with `u(y) = Σ_q W(y, q) g(q)`. The weights are the
//! discrete form of the positive boundary kernel `K = −∂_ν G`; the Poisson
//! kernel of the disc is stored with this positive sign.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use thiserror::Error;

mod solver;

pub use solver::{BandedCholesky, LaplaceSolver};

#[derive(Debug, Error)]
pub enum DirichletError {
    #[error("radius {0} is outside [0, 1)")]
    RadiusOutOfRange(f64),
    #[error("invalid domain: {0}")]
    BadDomain(String),
    #[error("expected {expected} values, found {found}")]
    DataLength { expected: usize, found: usize },
    #[error("boundary data must be finite")]
    NonFinite,
    #[error("linear solver failed: {0}")]
    SolverFailed(String),
    #[error("point {0:?} is not a node of the domain")]
    NotANode([f64; 2]),
}

pub type Result<T> = std::result::Result<T, DirichletError>;

/// Parameter domain with its sampling.
///
/// Node numbering:
/// * `Interval { cells }`: `t_i = i / cells`, `i = 0..=cells`.
/// * `Disc { rings, angles }`: node 0 is the center; ring `i ≥ 1`, angle `j`
///   is node `1 + (i − 1)·angles + j` at `r = i/rings`, `γ = 2πj/angles`.
/// * `Rectangle`: node `(i, j)` is `i·(ny + 1) + j` at `(i·w/nx, j·h/ny)`.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainN {
    Interval { cells: usize },
    Disc { rings: usize, angles: usize },
    Rectangle { nx: usize, ny: usize, width: f64, height: f64 },
}

impl DomainN {
    pub fn interval(cells: usize) -> Result<Self> {
        let d = DomainN::Interval { cells };
        d.validate()?;
        Ok(d)
    }

    pub fn disc(rings: usize, angles: usize) -> Result<Self> {
        let d = DomainN::Disc { rings, angles };
        d.validate()?;
        Ok(d)
    }

    pub fn rectangle(nx: usize, ny: usize, width: f64, height: f64) -> Result<Self> {
        let d = DomainN::Rectangle { nx, ny, width, height };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            DomainN::Interval { cells } if cells >= 1 => Ok(()),
            DomainN::Disc { rings, angles } if rings >= 1 && angles >= 64 && angles % 2 == 0 => Ok(()),
            DomainN::Rectangle { nx, ny, width, height } if nx >= 2 && ny >= 2 && width > 0.0 && height > 0.0 => {
                Ok(())
            }
            DomainN::Disc { .. } => Err(DirichletError::BadDomain(
                "disc needs at least one ring and an even angle count of at least 64".into(),
            )),
            _ => Err(DirichletError::BadDomain(format!("{self:?}"))),
        }
    }

    /// Parameter dimension of `N` (1 for the interval, 2 otherwise).
    pub fn dim(&self) -> usize {
        match self {
            DomainN::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn node_count(&self) -> usize {
        match *self {
            DomainN::Interval { cells } => cells + 1,
            DomainN::Disc { rings, angles } => 1 + rings * angles,
            DomainN::Rectangle { nx, ny, .. } => (nx + 1) * (ny + 1),
        }
    }

    /// Cartesian coordinates of node `i` (the interval uses the first slot).
    pub fn node(&self, i: usize) -> [f64; 2] {
        match *self {
            DomainN::Interval { cells } => [i as f64 / cells as f64, 0.0],
            DomainN::Disc { .. } => {
                let (r, g) = self.polar(i);
                [r * g.cos(), r * g.sin()]
            }
            DomainN::Rectangle { nx, ny, width, height } => {
                let (a, b) = (i / (ny + 1), i % (ny + 1));
                [a as f64 * width / nx as f64, b as f64 * height / ny as f64]
            }
        }
    }

    /// `(r, γ)` of a disc node; other domains return `(0, 0)`.
    pub fn polar(&self, i: usize) -> (f64, f64) {
        match *self {
            DomainN::Disc { rings, angles } if i > 0 => {
                let ring = (i - 1) / angles + 1;
                let j = (i - 1) % angles;
                (ring as f64 / rings as f64, 2.0 * PI * j as f64 / angles as f64)
            }
            _ => (0.0, 0.0),
        }
    }

    pub fn boundary_nodes(&self) -> Vec<usize> {
        match *self {
            DomainN::Interval { cells } => vec![0, cells],
            DomainN::Disc { rings, angles } => (0..angles).map(|j| 1 + (rings - 1) * angles + j).collect(),
            DomainN::Rectangle { nx, ny, .. } => (0..self.node_count())
                .filter(|&i| {
                    let (a, b) = (i / (ny + 1), i % (ny + 1));
                    a == 0 || a == nx || b == 0 || b == ny
                })
                .collect(),
        }
    }

    pub fn is_boundary(&self, i: usize) -> bool {
        self.boundary_nodes().contains(&i)
    }

    /// Angles `θ_j` of the boundary quadrature nodes of the disc.
    pub fn boundary_angles(&self) -> Vec<f64> {
        match *self {
            DomainN::Disc { angles, .. } => (0..angles).map(|j| 2.0 * PI * j as f64 / angles as f64).collect(),
            _ => Vec::new(),
        }
    }
}

/// Values on the boundary nodes, in [`DomainN::boundary_nodes`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub values: Vec<f64>,
}

impl BoundaryData {
    pub fn new(values: Vec<f64>) -> Self {
        BoundaryData { values }
    }

    /// Samples `g` at the boundary nodes.
    pub fn sample(domain: &DomainN, g: impl Fn([f64; 2]) -> f64) -> Self {
        BoundaryData {
            values: domain.boundary_nodes().into_iter().map(|i| g(domain.node(i))).collect(),
        }
    }
}

/// Values on all nodes of the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicField {
    pub values: Vec<f64>,
}

/// `K(r, θ) = (1/2π)(1 − r²)/(1 − 2r cos θ + r²)`.
pub fn poisson_kernel(r: f64, theta: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(DirichletError::RadiusOutOfRange(r));
    }
    Ok((1.0 - r * r) / (2.0 * PI * (1.0 - 2.0 * r * theta.cos() + r * r)))
}

fn disc_weights_polar(r: f64, gamma: f64, angles: usize) -> Result<Vec<f64>> {
    let dtheta = 2.0 * PI / angles as f64;
    (0..angles)
        .map(|j| Ok(poisson_kernel(r, j as f64 * dtheta - gamma)? * dtheta))
        .collect()
}

/// Boundary weights for an arbitrary point `y` of `N`.
///
/// Interval: `(1 − t, t)`. Disc: trapezoid Poisson weights (exact boundary
/// nodes get a unit vector). Rectangle: only grid nodes are supported.
pub fn weights_at(domain: &DomainN, y: [f64; 2]) -> Result<Vec<f64>> {
    match *domain {
        DomainN::Interval { .. } => {
            let t = y[0];
            if !(-1e-12..=1.0 + 1e-12).contains(&t) {
                return Err(DirichletError::NotANode(y));
            }
            Ok(vec![1.0 - t, t])
        }
        DomainN::Disc { angles, .. } => {
            let r = y[0].hypot(y[1]);
            let gamma = y[1].atan2(y[0]);
            if r < 1.0 - 1e-12 {
                return disc_weights_polar(r, gamma, angles);
            }
            let dtheta = 2.0 * PI / angles as f64;
            let j = (gamma.rem_euclid(2.0 * PI) / dtheta).round() as usize % angles;
            let on_node = (j as f64 * dtheta - gamma.rem_euclid(2.0 * PI)).abs() < 1e-9;
            if (r - 1.0).abs() < 1e-12 && on_node {
                let mut w = vec![0.0; angles];
                w[j] = 1.0;
                Ok(w)
            } else {
                Err(DirichletError::NotANode(y))
            }
        }
        DomainN::Rectangle { nx, ny, width, height } => {
            let a = y[0] * nx as f64 / width;
            let b = y[1] * ny as f64 / height;
            let (ia, ib) = (a.round(), b.round());
            if (a - ia).abs() > 1e-9 || (b - ib).abs() > 1e-9 || ia < 0.0 || ib < 0.0 || ia > nx as f64 || ib > ny as f64 {
                return Err(DirichletError::NotANode(y));
            }
            let node = ia as usize * (ny + 1) + ib as usize;
            Ok(harmonic_weights(domain)?.row(node).iter().copied().collect())
        }
    }
}

/// Weight matrix `W` (nodes × boundary nodes) of the discrete harmonic extension.
pub fn harmonic_weights(domain: &DomainN) -> Result<DMatrix<f64>> {
    domain.validate()?;
    let nodes = domain.node_count();
    let boundary = domain.boundary_nodes();
    let mut w = DMatrix::zeros(nodes, boundary.len());
    match *domain {
        DomainN::Interval { .. } => {
            for i in 0..nodes {
                let t = domain.node(i)[0];
                w[(i, 0)] = 1.0 - t;
                w[(i, 1)] = t;
            }
        }
        DomainN::Disc { rings, angles } => {
            let interior = 1 + (rings - 1) * angles;
            let rows: Vec<Vec<f64>> = (0..interior)
                .into_par_iter()
                .map(|i| {
                    let (r, g) = domain.polar(i);
                    disc_weights_polar(r, g, angles)
                })
                .collect::<Result<_>>()?;
            for (i, row) in rows.into_iter().enumerate() {
                for (q, v) in row.into_iter().enumerate() {
                    w[(i, q)] = v;
                }
            }
            for (q, &b) in boundary.iter().enumerate() {
                w[(b, q)] = 1.0;
            }
        }
        DomainN::Rectangle { .. } => {
            let solver = LaplaceSolver::new(domain)?;
            let cols: Vec<Vec<f64>> = (0..boundary.len())
                .into_par_iter()
                .map(|q| {
                    let mut g = vec![0.0; boundary.len()];
                    g[q] = 1.0;
                    solver.solve(&g)
                })
                .collect::<Result<_>>()?;
            for (q, col) in cols.into_iter().enumerate() {
                for (i, v) in col.into_iter().enumerate() {
                    w[(i, q)] = v;
                }
            }
        }
    }
    Ok(w)
}

/// Harmonic function on `N` with boundary values `g`.
pub fn harmonic_extend(domain: &DomainN, g: &BoundaryData) -> Result<HarmonicField> {
    domain.validate()?;
    let nb = domain.boundary_nodes().len();
    if g.values.len() != nb {
        return Err(DirichletError::DataLength {
            expected: nb,
            found: g.values.len(),
        });
    }
    if g.values.iter().any(|v| !v.is_finite()) {
        return Err(DirichletError::NonFinite);
    }
    let values = match domain {
        DomainN::Rectangle { .. } => LaplaceSolver::new(domain)?.solve(&g.values)?,
        _ => {
            let w = harmonic_weights(domain)?;
            (0..domain.node_count())
                .map(|i| w.row(i).iter().zip(&g.values).map(|(a, b)| a * b).sum())
                .collect()
        }
    };
    Ok(HarmonicField { values })
}

/// Discrete Laplacian of nodal values `u`; zero at boundary nodes.
///
/// The disc uses the polar five-point formula `u_rr + u_r/r + u_γγ/r²` on
/// rings `1..rings`, with the center value as the inner neighbor of ring 1,
/// and `4(ū₁ − u₀)/h_r²` at the center (`ū₁` the ring-1 mean).
pub fn laplacian(domain: &DomainN, u: &[f64]) -> Result<Vec<f64>> {
    let n = domain.node_count();
    if u.len() != n {
        return Err(DirichletError::DataLength {
            expected: n,
            found: u.len(),
        });
    }
    let mut out = vec![0.0; n];
    match *domain {
        DomainN::Interval { cells } => {
            let h = 1.0 / cells as f64;
            for i in 1..cells {
                out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) / (h * h);
            }
        }
        DomainN::Disc { rings, angles } => {
            let hr = 1.0 / rings as f64;
            let hg = 2.0 * PI / angles as f64;
            let idx = |ring: usize, j: usize| if ring == 0 { 0 } else { 1 + (ring - 1) * angles + j % angles };
            let ring1 = (0..angles).map(|j| u[idx(1, j)]).sum::<f64>() / angles as f64;
            out[0] = 4.0 * (ring1 - u[0]) / (hr * hr);
            for ring in 1..rings {
                let r = ring as f64 * hr;
                for j in 0..angles {
                    let c = u[idx(ring, j)];
                    let (inn, out_) = (u[idx(ring - 1, j)], u[idx(ring + 1, j)]);
                    let (prev, next) = (u[idx(ring, j + angles - 1)], u[idx(ring, j + 1)]);
                    let urr = (inn - 2.0 * c + out_) / (hr * hr);
                    let ur = (out_ - inn) / (2.0 * hr);
                    let ugg = (prev - 2.0 * c + next) / (hg * hg);
                    out[idx(ring, j)] = urr + ur / r + ugg / (r * r);
                }
            }
        }
        DomainN::Rectangle { nx, ny, width, height } => {
            let (hx, hy) = (width / nx as f64, height / ny as f64);
            let at = |a: usize, b: usize| u[a * (ny + 1) + b];
            for a in 1..nx {
                for b in 1..ny {
                    out[a * (ny + 1) + b] = (at(a - 1, b) - 2.0 * at(a, b) + at(a + 1, b)) / (hx * hx)
                        + (at(a, b - 1) - 2.0 * at(a, b) + at(a, b + 1)) / (hy * hy);
                }
            }
        }
    }
    Ok(out)
}

/// Largest explicit-Euler step `1/(2 Σ_d h_d⁻²)` for [`laplacian`].
///
/// On the disc the angular spacing is taken on the first ring, `h_r·h_γ`.
pub fn max_stable_step(domain: &DomainN) -> f64 {
    match *domain {
        DomainN::Interval { cells } => 0.5 / (cells * cells) as f64,
        DomainN::Disc { rings, angles } => {
            let hr = 1.0 / rings as f64;
            let hg = hr * 2.0 * PI / angles as f64;
            0.5 / (1.0 / (hr * hr) + 1.0 / (hg * hg))
        }
        DomainN::Rectangle { nx, ny, width, height } => {
            let (hx, hy) = (width / nx as f64, height / ny as f64);
            0.5 / (1.0 / (hx * hx) + 1.0 / (hy * hy))
        }
    }
}

/// Sup over interior nodes of the discrete Laplacian of `field`.
///
/// The disc center is excluded, as its stencil averages a whole ring.
pub fn laplace_residual(domain: &DomainN, field: &HarmonicField) -> Result<f64> {
    let lap = laplacian(domain, &field.values)?;
    let skip = matches!(domain, DomainN::Disc { .. }) as usize;
    Ok(lap.iter().skip(skip).fold(0.0f64, |m, v| m.max(v.abs())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn poisson_kernel_examples() {
        assert_abs_diff_eq!(poisson_kernel(0.0, 1.3).unwrap(), 1.0 / (2.0 * PI), epsilon = 1e-15);
        assert_abs_diff_eq!(poisson_kernel(0.5, 0.0).unwrap(), 3.0 / (2.0 * PI), epsilon = 1e-15);
        let n = 512;
        let total: f64 = (0..n)
            .map(|j| poisson_kernel(0.9, 2.0 * PI * j as f64 / n as f64).unwrap() * 2.0 * PI / n as f64)
            .sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-10);
        assert!(poisson_kernel(1.0, 0.0).is_err());
    }

    #[test]
    fn interval_extension_is_linear() {
        let d = DomainN::interval(10).unwrap();
        let f = harmonic_extend(&d, &BoundaryData::new(vec![2.0, 6.0])).unwrap();
        assert_abs_diff_eq!(f.values[5], 4.0, epsilon = 1e-15);
        assert!(laplace_residual(&d, &f).unwrap() < 1e-12);
    }

    #[test]
    fn disc_extension_of_cosine() {
        // trapezoid error is about r^n at the outermost interior ring r = 0.9
        let d = DomainN::disc(10, 256).unwrap();
        let g = BoundaryData::sample(&d, |p| p[0]);
        let f = harmonic_extend(&d, &g).unwrap();
        for i in 0..d.node_count() {
            let (r, gam) = d.polar(i);
            assert_abs_diff_eq!(f.values[i], r * gam.cos(), epsilon = 1e-11);
        }
        let w = weights_at(&d, [0.5, 0.0]).unwrap();
        let v: f64 = w.iter().zip(&g.values).map(|(a, b)| a * b).sum();
        assert_abs_diff_eq!(v, 0.5, epsilon = 1e-14);
        let c = harmonic_extend(&d, &BoundaryData::new(vec![5.0; 256])).unwrap();
        assert!(c.values.iter().all(|v| (v - 5.0).abs() < 1e-10));
    }

    #[test]
    fn disc_residual_is_second_order_in_angle() {
        let res = |angles| {
            let d = DomainN::disc(8, angles).unwrap();
            let f = HarmonicField {
                values: (0..d.node_count()).map(|i| d.node(i)[0]).collect(),
            };
            laplace_residual(&d, &f).unwrap()
        };
        let ratio = res(64) / res(128);
        assert!((ratio - 4.0).abs() < 0.1, "ratio {ratio}");
    }

    #[test]
    fn rectangle_matches_harmonic_polynomial() {
        let d = DomainN::rectangle(20, 16, 2.0, 1.0).unwrap();
        // x² − y² and xy are reproduced exactly by the five-point stencil
        let h = |p: [f64; 2]| p[0] * p[0] - p[1] * p[1] + 0.5 * p[0] * p[1];
        let f = harmonic_extend(&d, &BoundaryData::sample(&d, h)).unwrap();
        for i in 0..d.node_count() {
            assert_abs_diff_eq!(f.values[i], h(d.node(i)), epsilon = 1e-11);
        }
        assert!(laplace_residual(&d, &f).unwrap() < 1e-10);
    }

    #[test]
    fn weights_reproduce_boundary_and_sum_to_one() {
        for d in [
            DomainN::interval(7).unwrap(),
            DomainN::disc(5, 128).unwrap(),
            DomainN::rectangle(6, 5, 1.0, 1.0).unwrap(),
        ] {
            let w = harmonic_weights(&d).unwrap();
            for i in 0..d.node_count() {
                assert_abs_diff_eq!(w.row(i).sum(), 1.0, epsilon = 1e-12);
                assert!(w.row(i).iter().all(|&x| x >= -1e-15));
            }
            for (q, &b) in d.boundary_nodes().iter().enumerate() {
                assert_eq!(w[(b, q)], 1.0);
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(DomainN::disc(4, 63).is_err());
        assert!(DomainN::disc(4, 66).is_ok());
        let d = DomainN::interval(4).unwrap();
        assert!(harmonic_extend(&d, &BoundaryData::new(vec![1.0])).is_err());
        assert!(harmonic_extend(&d, &BoundaryData::new(vec![1.0, f64::NAN])).is_err());
    }

    fn domains() -> impl Strategy<Value = DomainN> {
        prop_oneof![
            (1usize..20).prop_map(|c| DomainN::Interval { cells: c }),
            (1usize..5).prop_map(|r| DomainN::Disc { rings: r, angles: 128 }),
            (2usize..8, 2usize..8).prop_map(|(a, b)| DomainN::Rectangle { nx: a, ny: b, width: 1.0, height: 1.5 }),
        ]
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn linearity_positivity_and_boundary_consistency(d in domains(), seed in prop::collection::vec(0.0f64..1.0, 256), a in -2.0f64..2.0) {
            let nb = d.boundary_nodes().len();
            let g1 = BoundaryData::new(seed[..nb].to_vec());
            let g2 = BoundaryData::new(seed[seed.len() - nb..].to_vec());
            let e1 = harmonic_extend(&d, &g1).unwrap();
            let e2 = harmonic_extend(&d, &g2).unwrap();
            let mix = BoundaryData::new(g1.values.iter().zip(&g2.values).map(|(x, y)| a * x + y).collect());
            let em = harmonic_extend(&d, &mix).unwrap();
            for i in 0..d.node_count() {
                prop_assert!((em.values[i] - (a * e1.values[i] + e2.values[i])).abs() < 1e-10);
                prop_assert!(e1.values[i] >= -1e-12);
                let (lo, hi) = g1.values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
                prop_assert!(e1.values[i] >= lo - 1e-10 && e1.values[i] <= hi + 1e-10);
            }
            for (q, &b) in d.boundary_nodes().iter().enumerate() {
                prop_assert_eq!(e1.values[b], g1.values[q]);
            }
        }
    }
}
