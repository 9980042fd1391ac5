//! Composite Gauss–Legendre rules on intervals and Delzant polygons.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;

use crate::polytope::{DelzantPolytope, PolytopeError};

/// Panel layout for a composite rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PanelSpec {
    pub panels: usize,
    pub order: usize,
}

impl PanelSpec {
    pub fn new(panels: usize, order: usize) -> Self {
        PanelSpec {
            panels: panels.max(1),
            order: order.max(1),
        }
    }

    pub fn doubled(self) -> Self {
        PanelSpec {
            panels: 2 * self.panels,
            ..self
        }
    }
}

/// Nodes and weights flattened as `points[i*dim..(i+1)*dim]`, `weights[i]`.
#[derive(Debug, Clone)]
pub struct NodeSet {
    pub dim: usize,
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn integrate<F: FnMut(&[f64]) -> f64>(&self, mut f: F) -> f64 {
        (0..self.len()).map(|i| self.weights[i] * f(self.point(i))).sum()
    }
}

fn reference_rule(order: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(order).expect("order is positive");
    GaussLegendre::new(n).as_node_weight_pairs().to_vec()
}

/// Composite rule on `[a, b]` with equal panels.
pub fn interval_rule(a: f64, b: f64, layout: PanelSpec) -> (Vec<f64>, Vec<f64>) {
    let rule = reference_rule(layout.order);
    let h = (b - a) / layout.panels as f64;
    let mut xs = Vec::with_capacity(layout.panels * layout.order);
    let mut ws = Vec::with_capacity(layout.panels * layout.order);
    for p in 0..layout.panels {
        let lo = a + p as f64 * h;
        for &(t, w) in &rule {
            xs.push(lo + 0.5 * h * (t + 1.0));
            ws.push(0.5 * h * w);
        }
    }
    (xs, ws)
}

/// Quadrature nodes covering `P`.
///
/// In dimension 2 the polygon is fanned into triangles and each triangle is
/// pulled back from the unit square by the collapsed map
/// `x = v0 + s(v1 - v0) + st(v2 - v1)`, whose Jacobian `s·|det|` vanishes at
/// the apex. All nodes are strictly interior.
pub fn polytope_rule(p: &DelzantPolytope, layout: PanelSpec) -> Result<NodeSet, PolytopeError> {
    match p.dim() {
        1 => {
            let (lo, hi) = p.bounding_box();
            let (xs, ws) = interval_rule(lo[0], hi[0], layout);
            Ok(NodeSet {
                dim: 1,
                points: xs,
                weights: ws,
            })
        }
        2 => {
            let (ts, tw) = interval_rule(0.0, 1.0, layout);
            let mut points = Vec::new();
            let mut weights = Vec::new();
            for [v0, v1, v2] in p.triangles()? {
                let e1 = [v1[0] - v0[0], v1[1] - v0[1]];
                let e2 = [v2[0] - v1[0], v2[1] - v1[1]];
                let det = (e1[0] * e2[1] - e1[1] * e2[0]).abs();
                for (&s, &ws) in ts.iter().zip(&tw) {
                    for (&t, &wt) in ts.iter().zip(&tw) {
                        points.push(v0[0] + s * e1[0] + s * t * e2[0]);
                        points.push(v0[1] + s * e1[1] + s * t * e2[1]);
                        weights.push(ws * wt * s * det);
                    }
                }
            }
            Ok(NodeSet {
                dim: 2,
                points,
                weights,
            })
        }
        d => Err(PolytopeError::UnsupportedDimension(d)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interval_rule_is_exact_on_polynomials() {
        let (xs, ws) = interval_rule(0.0, 2.0, PanelSpec::new(3, 4));
        let v: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.powi(7)).sum();
        assert_relative_eq!(v, 2f64.powi(8) / 8.0, max_relative = 1e-13);
    }

    #[test]
    fn polygon_rules_integrate_monomials() {
        let s = polytope_rule(&DelzantPolytope::simplex2(), PanelSpec::new(2, 6)).unwrap();
        assert_relative_eq!(s.integrate(|_| 1.0), 0.5, max_relative = 1e-13);
        // ∫_Δ x² y dA = 2!·1!/5! = 1/60
        assert_relative_eq!(s.integrate(|p| p[0] * p[0] * p[1]), 1.0 / 60.0, max_relative = 1e-12);

        let q = polytope_rule(&DelzantPolytope::square(), PanelSpec::new(2, 6)).unwrap();
        assert_relative_eq!(q.integrate(|p| p[0] * p[1] * p[1]), 1.0 / 6.0, max_relative = 1e-12);
        assert!((0..q.len()).all(|i| DelzantPolytope::square().is_interior(q.point(i))));
    }

    #[test]
    fn beta_integral_with_endpoint_singularity() {
        // ∫₀¹ x^½ dx = 2/3, only algebraically convergent at 0
        let coarse = PanelSpec::new(16, 8);
        let (xs, ws) = interval_rule(0.0, 1.0, coarse);
        let v: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x.sqrt()).sum();
        assert!((v - 2.0 / 3.0).abs() < 1e-5);
    }
}
