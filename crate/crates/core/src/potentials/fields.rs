//! Closed-form scalar fields used as potentials or their smooth parts.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::legendre::gradient_preimage;
use super::{check_dim, Field, PotentialError, Result, ScalarField};
use crate::polytope::DelzantPolytope;

/// `u₀(x) = Σ_r ℓ_r(x) log ℓ_r(x)`, defined on the open polytope.
#[derive(Debug, Clone)]
pub struct GuilleminField {
    polytope: DelzantPolytope,
}

impl GuilleminField {
    pub fn new(polytope: DelzantPolytope) -> Self {
        GuilleminField { polytope }
    }

    fn facet_values(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.polytope.dim(), x)?;
        let ls = self.polytope.facet_values(x);
        if ls.iter().any(|&l| !(l > 0.0)) {
            return Err(PotentialError::OutsideDomain(x.to_vec()));
        }
        Ok(ls)
    }
}

impl ScalarField for GuilleminField {
    fn dim(&self) -> usize {
        self.polytope.dim()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.facet_values(x)?.iter().map(|&l| l * l.ln()).sum())
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        let ls = self.facet_values(x)?;
        let mut g = vec![0.0; self.dim()];
        for (f, l) in self.polytope.facets().iter().zip(ls) {
            let c = l.ln() + 1.0;
            for (gi, &v) in g.iter_mut().zip(&f.normal) {
                *gi += c * v as f64;
            }
        }
        Ok(g)
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let ls = self.facet_values(x)?;
        let m = self.dim();
        let mut h = DMatrix::zeros(m, m);
        for (f, l) in self.polytope.facets().iter().zip(ls) {
            let v = DVector::from_iterator(m, f.normal.iter().map(|&a| a as f64));
            h += &v * v.transpose() / l;
        }
        Ok(h)
    }

    fn domain_box(&self) -> Option<Vec<(f64, f64)>> {
        Some(polytope_box(&self.polytope))
    }
}

pub(crate) fn polytope_box(p: &DelzantPolytope) -> Vec<(f64, f64)> {
    let (lo, hi) = p.bounding_box();
    lo.into_iter().zip(hi).collect()
}

/// `a · Π_r ℓ_r(x)`: vanishes on every facet, so it perturbs a potential
/// without changing its boundary behavior.
#[derive(Debug, Clone)]
pub struct FacetProduct {
    polytope: DelzantPolytope,
    amplitude: f64,
}

impl FacetProduct {
    pub fn new(polytope: DelzantPolytope, amplitude: f64) -> Self {
        FacetProduct { polytope, amplitude }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }
}

fn product_except(ls: &[f64], skip: &[usize]) -> f64 {
    ls.iter()
        .enumerate()
        .filter(|(r, _)| !skip.contains(r))
        .map(|(_, &l)| l)
        .product()
}

impl ScalarField for FacetProduct {
    fn dim(&self) -> usize {
        self.polytope.dim()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x)?;
        Ok(self.amplitude * self.polytope.facet_values(x).iter().product::<f64>())
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x)?;
        let ls = self.polytope.facet_values(x);
        let mut g = vec![0.0; self.dim()];
        for (r, f) in self.polytope.facets().iter().enumerate() {
            let c = self.amplitude * product_except(&ls, &[r]);
            for (gi, &v) in g.iter_mut().zip(&f.normal) {
                *gi += c * v as f64;
            }
        }
        Ok(g)
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.dim(), x)?;
        let m = self.dim();
        let ls = self.polytope.facet_values(x);
        let facets = self.polytope.facets();
        let mut h = DMatrix::zeros(m, m);
        for r in 0..facets.len() {
            for s in 0..facets.len() {
                if r == s {
                    continue;
                }
                let c = self.amplitude * product_except(&ls, &[r, s]);
                for i in 0..m {
                    for j in 0..m {
                        h[(i, j)] += c * (facets[r].normal[i] * facets[s].normal[j]) as f64;
                    }
                }
            }
        }
        Ok(h)
    }
}

/// Fubini–Study type Kähler potentials on the open orbit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FubiniStudy {
    /// `log(1 + Σ e^{ρ_i})`, dual to the Guillemin potential of the standard simplex.
    Simplex(usize),
    /// `Σ log(1 + e^{ρ_i})`, dual to the Guillemin potential of the unit cube.
    Product(usize),
}

fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

fn logistic(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl FubiniStudy {
    fn simplex_weights(rho: &[f64]) -> (f64, Vec<f64>) {
        let top = rho.iter().copied().fold(0.0, f64::max);
        let exps: Vec<f64> = rho.iter().map(|&r| (r - top).exp()).collect();
        let s = (-top).exp() + exps.iter().sum::<f64>();
        (top + s.ln(), exps.iter().map(|e| e / s).collect())
    }
}

impl ScalarField for FubiniStudy {
    fn dim(&self) -> usize {
        match *self {
            FubiniStudy::Simplex(m) | FubiniStudy::Product(m) => m,
        }
    }

    fn value(&self, rho: &[f64]) -> Result<f64> {
        check_dim(self.dim(), rho)?;
        Ok(match self {
            FubiniStudy::Simplex(_) => Self::simplex_weights(rho).0,
            FubiniStudy::Product(_) => rho.iter().map(|&r| softplus(r)).sum(),
        })
    }

    fn gradient(&self, rho: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), rho)?;
        Ok(match self {
            FubiniStudy::Simplex(_) => Self::simplex_weights(rho).1,
            FubiniStudy::Product(_) => rho.iter().map(|&r| logistic(r)).collect(),
        })
    }

    fn hessian(&self, rho: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.dim(), rho)?;
        let m = self.dim();
        Ok(match self {
            FubiniStudy::Simplex(_) => {
                let p = DVector::from_vec(Self::simplex_weights(rho).1);
                DMatrix::from_diagonal(&p) - &p * p.transpose()
            }
            FubiniStudy::Product(_) => DMatrix::from_diagonal(&DVector::from_iterator(
                m,
                rho.iter().map(|&r| {
                    let s = logistic(r);
                    s * (1.0 - s)
                }),
            )),
        })
    }
}

/// `|x|²/2`, its own Legendre transform.
#[derive(Debug, Clone, Copy)]
pub struct Quadratic(pub usize);

impl ScalarField for Quadratic {
    fn dim(&self) -> usize {
        self.0
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.0, x)?;
        Ok(0.5 * x.iter().map(|v| v * v).sum::<f64>())
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.0, x)?;
        Ok(x.to_vec())
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.0, x)?;
        Ok(DMatrix::identity(self.0, self.0))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Constant {
    pub dim: usize,
    pub value: f64,
}

impl ScalarField for Constant {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x)?;
        Ok(self.value)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x)?;
        Ok(vec![0.0; self.dim])
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.dim, x)?;
        Ok(DMatrix::zeros(self.dim, self.dim))
    }
}

/// `inner + c`.
#[derive(Debug, Clone)]
pub struct Shifted {
    pub inner: Field,
    pub shift: f64,
}

impl ScalarField for Shifted {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        Ok(self.inner.value(x)? + self.shift)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.inner.gradient(x)
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        self.inner.hessian(x)
    }

    fn domain_box(&self) -> Option<Vec<(f64, f64)>> {
        self.inner.domain_box()
    }
}

/// `Σ w_i f_i`.
#[derive(Debug, Clone)]
pub struct LinearCombination {
    dim: usize,
    terms: Vec<(f64, Field)>,
}

impl LinearCombination {
    pub fn new(dim: usize, terms: Vec<(f64, Field)>) -> Self {
        // zero weights would still force their term's domain on the sum
        let terms = terms.into_iter().filter(|(w, _)| *w != 0.0).collect();
        LinearCombination { dim, terms }
    }

    pub fn terms(&self) -> &[(f64, Field)] {
        &self.terms
    }
}

impl ScalarField for LinearCombination {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim, x)?;
        let mut acc = 0.0;
        for (w, f) in &self.terms {
            acc += w * f.value(x)?;
        }
        Ok(acc)
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim, x)?;
        let mut acc = vec![0.0; self.dim];
        for (w, f) in &self.terms {
            for (a, g) in acc.iter_mut().zip(f.gradient(x)?) {
                *a += w * g;
            }
        }
        Ok(acc)
    }

    fn hessian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        check_dim(self.dim, x)?;
        let mut acc = DMatrix::zeros(self.dim, self.dim);
        for (w, f) in &self.terms {
            acc += f.hessian(x)? * *w;
        }
        Ok(acc)
    }

    fn domain_box(&self) -> Option<Vec<(f64, f64)>> {
        // intersection of the term boxes
        let mut out: Option<Vec<(f64, f64)>> = None;
        for (_, f) in &self.terms {
            if let Some(b) = f.domain_box() {
                out = Some(match out {
                    None => b,
                    Some(o) => o
                        .iter()
                        .zip(&b)
                        .map(|(p, q)| (p.0.max(q.0), p.1.min(q.1)))
                        .collect(),
                });
            }
        }
        out
    }
}

/// Convex conjugate `f*(y) = sup_x ⟨x, y⟩ − f(x)` evaluated by Newton on `∇f(x) = y`.
///
/// The gradient is the maximizer `x` and the Hessian is `(∇²f(x))⁻¹`.
#[derive(Debug, Clone)]
pub struct LegendreDual {
    primal: Field,
    start: Vec<f64>,
}

impl LegendreDual {
    pub fn new(primal: Field, start: Vec<f64>) -> Self {
        LegendreDual { primal, start }
    }

    pub fn primal(&self) -> &Field {
        &self.primal
    }

    fn maximizer(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), y)?;
        gradient_preimage(self.primal.as_ref(), y, &self.start)
    }

    /// Value, maximizer and dual Hessian in one Newton solve.
    pub fn jet(&self, y: &[f64]) -> Result<(f64, Vec<f64>, DMatrix<f64>)> {
        let x = self.maximizer(y)?;
        let v = x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() - self.primal.value(&x)?;
        let h = self.primal.hessian(&x)?;
        let inv = h
            .cholesky()
            .ok_or_else(|| PotentialError::NotConvex(x.clone()))?
            .inverse();
        Ok((v, x, inv))
    }
}

impl ScalarField for LegendreDual {
    fn dim(&self) -> usize {
        self.primal.dim()
    }

    fn value(&self, y: &[f64]) -> Result<f64> {
        let x = self.maximizer(y)?;
        Ok(x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() - self.primal.value(&x)?)
    }

    fn gradient(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.maximizer(y)
    }

    fn hessian(&self, y: &[f64]) -> Result<DMatrix<f64>> {
        Ok(self.jet(y)?.2)
    }
}

pub fn shared<F: ScalarField + 'static>(f: F) -> Field {
    Arc::new(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn fd_check(f: &dyn ScalarField, x: &[f64], tol: f64) {
        let h = 1e-5;
        let g = f.gradient(x).unwrap();
        let hs = f.hessian(x).unwrap();
        for i in 0..x.len() {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[i] += h;
            xm[i] -= h;
            let fd = (f.value(&xp).unwrap() - f.value(&xm).unwrap()) / (2.0 * h);
            assert_abs_diff_eq!(g[i], fd, epsilon = tol);
            let gp = f.gradient(&xp).unwrap();
            let gm = f.gradient(&xm).unwrap();
            for j in 0..x.len() {
                assert_abs_diff_eq!(hs[(i, j)], (gp[j] - gm[j]) / (2.0 * h), epsilon = tol);
            }
        }
    }

    #[test]
    fn closed_forms_match_finite_differences() {
        let s = DelzantPolytope::simplex2();
        fd_check(&GuilleminField::new(s.clone()), &[0.2, 0.3], 1e-6);
        fd_check(&FacetProduct::new(s, 0.7), &[0.2, 0.3], 1e-6);
        fd_check(&FubiniStudy::Simplex(2), &[0.4, -1.1], 1e-6);
        fd_check(&FubiniStudy::Product(2), &[0.4, -1.1], 1e-6);
        fd_check(&FacetProduct::new(DelzantPolytope::square(), -0.3), &[0.6, 0.1], 1e-6);
    }

    #[test]
    fn fubini_study_is_stable_far_out() {
        let fs = FubiniStudy::Simplex(1);
        assert!(fs.gradient(&[-20.0]).unwrap()[0] < 1e-8);
        assert_abs_diff_eq!(fs.value(&[800.0]).unwrap(), 800.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fs.gradient(&[0.0]).unwrap()[0], 0.5);
    }

    #[test]
    fn legendre_dual_of_guillemin_is_fubini_study() {
        let u0 = shared(GuilleminField::new(DelzantPolytope::simplex2()));
        let dual = LegendreDual::new(u0, vec![1.0 / 3.0, 1.0 / 3.0]);
        let fs = FubiniStudy::Simplex(2);
        for rho in [[0.0, 0.0], [1.5, -2.0], [-6.0, 3.0]] {
            assert_abs_diff_eq!(dual.value(&rho).unwrap(), fs.value(&rho).unwrap(), epsilon = 1e-11);
            let (ha, hb) = (dual.hessian(&rho).unwrap(), fs.hessian(&rho).unwrap());
            assert!((ha - hb).abs().max() < 1e-9);
        }
    }

    proptest! {
        #[test]
        fn guillemin_is_defined_only_inside(x in -0.5f64..1.5) {
            let u0 = GuilleminField::new(DelzantPolytope::interval());
            prop_assert_eq!(u0.value(&[x]).is_ok(), x > 0.0 && x < 1.0);
        }
    }
}
