//! End-to-end pipelines, error norms, rate fits and the pass/fail suites.

use thiserror::Error;

mod config;
pub mod experiments;
mod pipeline;
mod report;
pub mod suites;

pub use config::{DomainSpec, ExperimentConfig, FamilySpec, PolytopeSpec, Resolution};
pub use pipeline::{
    build_approximant, build_approximants, comparison_y_axes, sample_approximant, sample_exact, solve_harmonic_map,
    solve_harmonic_map_with, ExactFamily, HarmonicFamily,
};
pub use report::{error_report, rate_fit, rate_fit_series, ErrorReport, LevelErrors, Norm, RateFit, RateFitStats};
pub use suites::CriterionOutcome;

use crate::bergman::BergmanError;
use crate::dirichlet::DirichletError;
use crate::flows::FlowError;
use crate::polytope::PolytopeError;
use crate::potentials::PotentialError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("u(y, ·) is not strictly convex at node {node}, x = {x:?}")]
    NotConvex { node: usize, x: Vec<f64> },
    #[error("level {0} was sampled on a different grid")]
    GridMismatch(i64),
    #[error("rate fit: {0}")]
    RateFit(String),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Dirichlet(#[from] DirichletError),
    #[error(transparent)]
    Bergman(#[from] BergmanError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
