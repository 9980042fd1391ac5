use std::sync::Arc;

use nalgebra::DMatrix;

use super::fields::{polytope_box, shared, Constant, FacetProduct, GuilleminField, LinearCombination, Shifted};
use super::grid::PolytopeGrid;
use super::spline::SampledField;
use super::{check_dim, Field, PotentialError, Result, ScalarField};
use crate::polytope::DelzantPolytope;

/// `u₀(x) = Σ_r ℓ_r(x) log ℓ_r(x)` at an interior point.
pub fn guillemin_potential(p: &DelzantPolytope, x: &[f64]) -> Result<f64> {
    GuilleminField::new(p.clone()).value(x)
}

/// `u = c·u₀ + f` on a Delzant polytope; `c` is 1 except for test potentials
/// without the logarithmic boundary behavior.
#[derive(Debug, Clone)]
pub struct SymplecticPotential {
    polytope: DelzantPolytope,
    guillemin: f64,
    u0: GuilleminField,
    smooth: Field,
    samples: Option<Arc<(PolytopeGrid, Vec<f64>)>>,
}

impl SymplecticPotential {
    fn build(polytope: DelzantPolytope, guillemin: f64, smooth: Field) -> Self {
        SymplecticPotential {
            u0: GuilleminField::new(polytope.clone()),
            polytope,
            guillemin,
            smooth,
            samples: None,
        }
    }

    pub fn guillemin(polytope: DelzantPolytope) -> Self {
        let dim = polytope.dim();
        Self::build(polytope, 1.0, shared(Constant { dim, value: 0.0 }))
    }

    /// `u₀ + a·Π_r ℓ_r`.
    pub fn perturbed(polytope: DelzantPolytope, amplitude: f64) -> Self {
        let f = shared(FacetProduct::new(polytope.clone(), amplitude));
        Self::build(polytope, 1.0, f)
    }

    pub fn with_smooth(polytope: DelzantPolytope, smooth: Field) -> Self {
        Self::build(polytope, 1.0, smooth)
    }

    /// A potential with no Guillemin part, e.g. `|x|²/2` on a truncated line.
    pub fn pure(polytope: DelzantPolytope, field: Field) -> Self {
        Self::build(polytope, 0.0, field)
    }

    /// `u₀ + f` with `f` given at the valid nodes of a full tensor grid.
    pub fn from_samples(grid: PolytopeGrid, f: Vec<f64>) -> Result<Self> {
        if !grid.is_full_tensor() || f.len() != grid.len() {
            return Err(PotentialError::NotTensorGrid);
        }
        let spline = SampledField::new(grid.axes().axes(), &f, true)?;
        let mut u = Self::build(grid.polytope().clone(), 1.0, shared(spline));
        u.samples = Some(Arc::new((grid, f)));
        Ok(u)
    }

    /// `Σ w_i u_i`; all terms must live on the same polytope.
    pub fn combination(terms: &[(f64, &SymplecticPotential)]) -> Result<Self> {
        let first = terms.first().ok_or(PotentialError::NotTensorGrid)?.1;
        let p = first.polytope.clone();
        for (_, u) in terms {
            if u.polytope != p {
                return Err(PotentialError::Dimension {
                    expected: p.num_facets(),
                    found: u.polytope.num_facets(),
                });
            }
        }
        let c = terms.iter().map(|(w, u)| w * u.guillemin).sum();
        let smooth = LinearCombination::new(p.dim(), terms.iter().map(|(w, u)| (*w, u.smooth.clone())).collect());
        Ok(Self::build(p, c, shared(smooth)))
    }

    pub fn shifted(&self, c: f64) -> Self {
        Self::build(
            self.polytope.clone(),
            self.guillemin,
            shared(Shifted {
                inner: self.smooth.clone(),
                shift: c,
            }),
        )
    }

    /// `"guillemin"`, `"fubini-study"` (the same symplectic potential) or `"perturbed(a)"`.
    pub fn preset(name: &str, polytope: DelzantPolytope) -> Result<Self> {
        let name = name.trim();
        match name {
            "guillemin" | "fubini-study" => Ok(Self::guillemin(polytope)),
            _ => {
                let a = name
                    .strip_prefix("perturbed(")
                    .and_then(|s| s.strip_suffix(')'))
                    .and_then(|s| s.trim().parse::<f64>().ok())
                    .ok_or_else(|| PotentialError::UnknownPreset(name.to_string()))?;
                Ok(Self::perturbed(polytope, a))
            }
        }
    }

    pub fn polytope(&self) -> &DelzantPolytope {
        &self.polytope
    }

    pub fn guillemin_coefficient(&self) -> f64 {
        self.guillemin
    }

    pub fn smooth(&self) -> &Field {
        &self.smooth
    }

    /// Grid and smooth-part samples, when this potential was built from samples.
    pub fn samples(&self) -> Option<(&PolytopeGrid, &[f64])> {
        self.samples.as_ref().map(|s| (&s.0, s.1.as_slice()))
    }

    /// `u` at every valid node of `grid`; masked nodes hold NaN.
    pub fn sample_on(&self, grid: &PolytopeGrid) -> Result<Vec<f64>> {
        let mut out = vec![f64::NAN; grid.len()];
        for i in grid.valid_nodes() {
            out[i] = self.value(&grid.node(i))?;
        }
        Ok(out)
    }

    /// Smooth part `f` at every valid node of `grid`; masked nodes hold NaN.
    pub fn sample_smooth(&self, grid: &PolytopeGrid) -> Vec<f64> {
        (0..grid.len())
            .map(|i| {
                if grid.is_valid(i) {
                    self.smooth.value(&grid.node(i)).unwrap_or(f64::NAN)
                } else {
                    f64::NAN
                }
            })
            .collect()
    }

    fn check_domain(&self, x: &[f64]) -> Result<()> {
        check_dim(self.polytope.dim(), x)?;
        if self.guillemin == 0.0 && !self.polytope.contains(x, 1e-12) {
            return Err(PotentialError::OutsideDomain(x.to_vec()));
        }
        Ok(())
    }
}

impl ScalarField for SymplecticPotential {
    fn dim(&self) -> usize {
        self.polytope.dim()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        self.check_domain(x)?;
        let mut v = self.smooth.value(x)?;
        if self.guillemin != 0.0 {
            v += self.guillemin * self.u0.value(x)?;
        }
        Ok(v)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_domain(x)?;
        let mut g = self.smooth.gradient(x)?;
        if self.guillemin != 0.0 {
            for (a, b) in g.iter_mut().zip(self.u0.gradient(x)?) {
                *a += self.guillemin * b;
            }
        }
        Ok(g)
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.check_domain(x)?;
        let mut h = self.smooth.hessian(x)?;
        if self.guillemin != 0.0 {
            h += self.u0.hessian(x)? * self.guillemin;
        }
        Ok(h)
    }

    fn domain_box(&self) -> Option<Vec<(f64, f64)>> {
        Some(polytope_box(&self.polytope))
    }
}

/// `δ(x) = 1 / (det ∇²u(x) · Π_r ℓ_r(x))`, smooth and positive up to `∂P`.
pub fn abreu_delta(u: &SymplecticPotential, x: &[f64]) -> Result<f64> {
    let h = u.hessian(x)?;
    delta_from_hessian(u.polytope(), h, x)
}

/// Same as [`abreu_delta`] with the Hessian replaced by centered differences
/// of `u`, at a step proportional to the distance to the nearest facet.
pub fn abreu_delta_fd(u: &SymplecticPotential, x: &[f64]) -> Result<f64> {
    let m = u.dim();
    let s = 1e-3 * u.polytope().min_facet_value(x);
    if !(s > 0.0) {
        return Err(PotentialError::OutsideDomain(x.to_vec()));
    }
    let at = |di: &[(usize, f64)]| -> Result<f64> {
        let mut y = x.to_vec();
        for &(i, d) in di {
            y[i] += d;
        }
        u.value(&y)
    };
    let u_x = u.value(x)?;
    let mut h = DMatrix::zeros(m, m);
    for i in 0..m {
        h[(i, i)] = (at(&[(i, s)])? - 2.0 * u_x + at(&[(i, -s)])?) / (s * s);
        for j in 0..i {
            let v = (at(&[(i, s), (j, s)])? - at(&[(i, s), (j, -s)])? - at(&[(i, -s), (j, s)])?
                + at(&[(i, -s), (j, -s)])?)
                / (4.0 * s * s);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    delta_from_hessian(u.polytope(), h, x)
}

fn delta_from_hessian(p: &DelzantPolytope, h: DMatrix<f64>, x: &[f64]) -> Result<f64> {
    let chol = h.cholesky().ok_or_else(|| PotentialError::NotConvex(x.to_vec()))?;
    let det: f64 = chol.l().diagonal().iter().map(|d| d * d).product();
    let prod: f64 = p.facet_values(x).iter().product();
    Ok(1.0 / (det * prod))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::linspace;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn guillemin_examples() {
        let i = DelzantPolytope::interval();
        assert_abs_diff_eq!(guillemin_potential(&i, &[0.5]).unwrap(), -(2f64.ln()), epsilon = 1e-15);
        let tiny = guillemin_potential(&i, &[1e-8]).unwrap();
        // x log x ≈ −1.842e-7 plus (1−x)log(1−x) ≈ −1e-8
        assert_abs_diff_eq!(tiny, 1e-8 * (1e-8f64).ln() - 1e-8, epsilon = 1e-15);
        let s = DelzantPolytope::simplex2();
        assert_abs_diff_eq!(guillemin_potential(&s, &[1.0 / 3.0, 1.0 / 3.0]).unwrap(), -(3f64.ln()), epsilon = 1e-14);
        assert!(guillemin_potential(&i, &[0.0]).is_err());
        assert!(guillemin_potential(&i, &[1.2]).is_err());
    }

    #[test]
    fn abreu_examples() {
        let i = DelzantPolytope::interval();
        let u0 = SymplecticPotential::guillemin(i.clone());
        assert_abs_diff_eq!(abreu_delta(&u0, &[0.3]).unwrap(), 1.0, epsilon = 1e-13);
        // u = u₀ + 0.1 x(1−x): u'' = 4 − 0.2 at the midpoint
        let up = SymplecticPotential::perturbed(i, 0.1);
        assert_abs_diff_eq!(abreu_delta(&up, &[0.5]).unwrap(), 1.0 / (3.8 * 0.25), epsilon = 1e-13);
        assert_abs_diff_eq!(abreu_delta_fd(&up, &[0.5]).unwrap(), 1.0 / (3.8 * 0.25), epsilon = 1e-6);
    }

    #[test]
    fn abreu_is_one_for_guillemin_down_to_the_margin() {
        for p in [DelzantPolytope::interval(), DelzantPolytope::simplex2(), DelzantPolytope::square()] {
            let u0 = SymplecticPotential::guillemin(p.clone());
            let grid = PolytopeGrid::for_levels(&p, 17, 64).unwrap();
            for i in grid.valid_nodes() {
                let x = grid.node(i);
                assert_abs_diff_eq!(abreu_delta_fd(&u0, &x).unwrap(), 1.0, epsilon = 1e-4);
            }
        }
    }

    #[test]
    fn sampled_smooth_part_interpolates() {
        let p = DelzantPolytope::interval();
        let grid = PolytopeGrid::new(&p, 81, 0.01).unwrap();
        let exact = SymplecticPotential::perturbed(p.clone(), 0.1);
        let f: Vec<f64> = (0..grid.len()).map(|i| exact.smooth().value(&grid.node(i)).unwrap()).collect();
        let u = SymplecticPotential::from_samples(grid, f).unwrap();
        for x in linspace(0.003, 0.997, 50) {
            assert_abs_diff_eq!(u.value(&[x]).unwrap(), exact.value(&[x]).unwrap(), epsilon = 1e-12);
            assert_abs_diff_eq!(u.hessian(&[x]).unwrap()[(0, 0)], exact.hessian(&[x]).unwrap()[(0, 0)], epsilon = 1e-9);
        }
    }

    #[test]
    fn presets_parse() {
        let p = DelzantPolytope::interval();
        let u = SymplecticPotential::preset("perturbed(0.25)", p.clone()).unwrap();
        assert_abs_diff_eq!(u.value(&[0.5]).unwrap(), -(2f64.ln()) + 0.25 * 0.25, epsilon = 1e-15);
        assert!(SymplecticPotential::preset("bogus", p).is_err());
    }

    proptest! {
        #[test]
        fn delta_positive_for_small_perturbations(a in -0.5f64..0.5, x in 0.01f64..0.99) {
            let u = SymplecticPotential::perturbed(DelzantPolytope::interval(), a);
            prop_assert!(abreu_delta(&u, &[x]).unwrap() > 0.0);
        }

        #[test]
        fn combinations_are_affine(w in 0.0f64..1.0, x in 0.05f64..0.95) {
            let p = DelzantPolytope::interval();
            let a = SymplecticPotential::guillemin(p.clone());
            let b = SymplecticPotential::perturbed(p, 0.3);
            let c = SymplecticPotential::combination(&[(1.0 - w, &a), (w, &b)]).unwrap();
            let lhs = c.value(&[x]).unwrap();
            let rhs = (1.0 - w) * a.value(&[x]).unwrap() + w * b.value(&[x]).unwrap();
            prop_assert!((lhs - rhs).abs() < 1e-13);
        }
    }
}
