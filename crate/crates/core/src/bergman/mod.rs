//! Norming constants, normalized monomials and the level-`k` Bergman
//! approximants of a harmonic family of toric metrics.
//!
//! Everything is kept in log domain. With `x = ∇φ(ρ)` the pushforward of the
//! monomial norm to the polytope gives
//!
//! ```text
//! log Q(α) = log ∫_P exp(k u(x) + ⟨α − kx, ∇u(x)⟩) dx,
//! ```
//!
//! where the torus volume `(2π)^m` is dropped for every `α` alike.

use std::collections::HashMap;
use std::io::{Read, Write};

use thiserror::Error;

use crate::dirichlet::DirichletError;
use crate::polytope::PolytopeError;
use crate::potentials::PotentialError;

mod harmonic;
mod monomials;
mod norming;

pub use harmonic::{bergman_potential, harmonic_norming, ratio_report, BergmanFamily, HarmonicNorming, RatioReport};
pub use monomials::{
    bargmann_fock_peak, localization_gap, log_normalized_monomial, normalized_monomial, peak_asymptotics_check,
    peak_value, peak_value_at_preimage, szego_sum, PeakFit,
};
pub use norming::{norming_constants, norming_constants_with, QuadratureOptions};

#[derive(Debug, Error)]
pub enum BergmanError {
    #[error("quadrature for α = {alpha:?} changed by {difference:e} under panel doubling")]
    QuadratureNotConverged { alpha: Vec<i64>, difference: f64 },
    #[error("α = {0:?} is not in the table")]
    MissingAlpha(Vec<i64>),
    #[error("α/k = {0:?} is not strictly inside the polytope")]
    NotInterior(Vec<f64>),
    #[error("boundary tables disagree: {0}")]
    LatticeMismatch(String),
    #[error("non-finite log norming constant for α = {0:?}")]
    NonFinite(Vec<i64>),
    #[error("δ must lie in (0, 1/2), got {0}")]
    BadDelta(f64),
    #[error("norming table: {0}")]
    Table(String),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Dirichlet(#[from] DirichletError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, BergmanError>;

/// `α ↦ log Q_k(α)` for every lattice point of `kP`.
#[derive(Debug, Clone)]
pub struct NormingTable {
    level: i64,
    points: Vec<Vec<i64>>,
    log_q: Vec<f64>,
    index: HashMap<Vec<i64>, usize>,
    provenance: String,
}

impl PartialEq for NormingTable {
    fn eq(&self, other: &Self) -> bool {
        self.level == other.level && self.points == other.points && self.log_q == other.log_q
    }
}

impl NormingTable {
    pub fn new(level: i64, points: Vec<Vec<i64>>, log_q: Vec<f64>, provenance: impl Into<String>) -> Result<Self> {
        if points.len() != log_q.len() {
            return Err(BergmanError::Table("points and values differ in length".into()));
        }
        if let Some(i) = log_q.iter().position(|v| !v.is_finite()) {
            return Err(BergmanError::NonFinite(points[i].clone()));
        }
        let index = points.iter().enumerate().map(|(i, a)| (a.clone(), i)).collect::<HashMap<_, _>>();
        if index.len() != points.len() {
            return Err(BergmanError::Table("duplicate lattice point".into()));
        }
        Ok(NormingTable {
            level,
            points,
            log_q,
            index,
            provenance: provenance.into(),
        })
    }

    pub fn level(&self) -> i64 {
        self.level
    }

    pub fn points(&self) -> &[Vec<i64>] {
        &self.points
    }

    pub fn log_q(&self) -> &[f64] {
        &self.log_q
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn position(&self, alpha: &[i64]) -> Option<usize> {
        self.index.get(alpha).copied()
    }

    pub fn get(&self, alpha: &[i64]) -> Result<f64> {
        self.position(alpha)
            .map(|i| self.log_q[i])
            .ok_or_else(|| BergmanError::MissingAlpha(alpha.to_vec()))
    }

    /// Same table with every `log Q` shifted by `c`.
    pub fn shifted(&self, c: f64) -> Self {
        NormingTable {
            log_q: self.log_q.iter().map(|v| v + c).collect(),
            ..self.clone()
        }
    }

    /// CSV with columns `k`, `alpha` (comma-joined coordinates), `log_q`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        let map = |e: csv::Error| BergmanError::Table(e.to_string());
        out.write_record(["k", "alpha", "log_q"]).map_err(map)?;
        for (a, q) in self.points.iter().zip(&self.log_q) {
            let alpha = a.iter().map(i64::to_string).collect::<Vec<_>>().join(",");
            out.write_record([self.level.to_string(), alpha, format!("{q:?}")]).map_err(map)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let map = |e: csv::Error| BergmanError::Table(e.to_string());
        let mut level = None;
        let mut points = Vec::new();
        let mut log_q = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(map)?;
            let bad = |what: &str| BergmanError::Table(format!("bad {what} in {rec:?}"));
            let k: i64 = rec.get(0).and_then(|s| s.trim().parse().ok()).ok_or_else(|| bad("k"))?;
            if *level.get_or_insert(k) != k {
                return Err(BergmanError::Table("mixed levels in one table".into()));
            }
            let alpha = rec
                .get(1)
                .ok_or_else(|| bad("alpha"))?
                .split(',')
                .map(|s| s.trim().parse::<i64>().map_err(|_| bad("alpha")))
                .collect::<Result<Vec<_>>>()?;
            let q: f64 = rec.get(2).and_then(|s| s.trim().parse().ok()).ok_or_else(|| bad("log_q"))?;
            points.push(alpha);
            log_q.push(q);
        }
        let level = level.ok_or_else(|| BergmanError::Table("empty table".into()))?;
        NormingTable::new(level, points, log_q, "csv")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip() {
        let t = NormingTable::new(2, vec![vec![0, 0], vec![1, 0], vec![0, 1]], vec![-1.5, 0.1 + 0.2, -3.0], "test").unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let back = NormingTable::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.get(&[1, 0]).unwrap(), 0.1 + 0.2);
    }

    #[test]
    fn rejects_non_finite_and_duplicates() {
        assert!(NormingTable::new(1, vec![vec![0]], vec![f64::NAN], "").is_err());
        assert!(NormingTable::new(1, vec![vec![0], vec![0]], vec![0.0, 1.0], "").is_err());
    }
}
