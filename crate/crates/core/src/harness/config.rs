use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::{HarnessError, Result};
use crate::dirichlet::DomainN;
use crate::grid::linspace;
use crate::polytope::DelzantPolytope;
use crate::potentials::{io, SymplecticPotential};

/// A preset name (`"interval"`, `"simplex2"`, `"square"`) or a polytope JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolytopeSpec {
    Preset(String),
    Facets(serde_json::Value),
}

impl PolytopeSpec {
    pub fn build(&self) -> Result<DelzantPolytope> {
        Ok(match self {
            PolytopeSpec::Preset(name) => DelzantPolytope::preset(name)?,
            PolytopeSpec::Facets(v) => DelzantPolytope::from_json_value(v)?,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainSpec {
    Interval { cells: usize },
    Disc { rings: usize, angles: usize },
    Rectangle { nx: usize, ny: usize, width: f64, height: f64 },
}

impl DomainSpec {
    pub fn build(&self) -> Result<DomainN> {
        Ok(match *self {
            DomainSpec::Interval { cells } => DomainN::interval(cells)?,
            DomainSpec::Disc { rings, angles } => DomainN::disc(rings, angles)?,
            DomainSpec::Rectangle { nx, ny, width, height } => DomainN::rectangle(nx, ny, width, height)?,
        })
    }
}

/// Boundary data `q ↦ u_ψ(q)` on `∂N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FamilySpec {
    /// Interval endpoints `u₀` and `u₀ + a·Π ℓ_r`.
    Geodesic { amplitude: f64 },
    /// Disc boundary `u_θ = u₀ + a(1 + cos θ)·Π ℓ_r`.
    Loop { amplitude: f64 },
    /// Interval endpoints given as symplectic presets.
    Endpoints { start: String, end: String },
    /// One symplectic potential file per boundary node.
    Files { paths: Vec<PathBuf> },
}

impl FamilySpec {
    /// Parses `geodesic(a)` or `loop(a)`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        let arg = |prefix: &str| {
            s.strip_prefix(prefix)
                .and_then(|r| r.strip_prefix('('))
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|r| r.trim().parse::<f64>().ok())
        };
        if let Some(a) = arg("geodesic") {
            Ok(FamilySpec::Geodesic { amplitude: a })
        } else if let Some(a) = arg("loop") {
            Ok(FamilySpec::Loop { amplitude: a })
        } else {
            Err(HarnessError::Config(format!("unknown boundary family {s:?}")))
        }
    }

    /// Boundary potentials in the order of [`DomainN::boundary_nodes`].
    pub fn build(&self, p: &DelzantPolytope, domain: &DomainN) -> Result<Vec<SymplecticPotential>> {
        let interval_only = |what: &str| {
            if matches!(domain, DomainN::Interval { .. }) {
                Ok(())
            } else {
                Err(HarnessError::Config(format!("{what} needs an interval domain")))
            }
        };
        match self {
            FamilySpec::Geodesic { amplitude } => {
                interval_only("geodesic")?;
                Ok(vec![
                    SymplecticPotential::guillemin(p.clone()),
                    SymplecticPotential::perturbed(p.clone(), *amplitude),
                ])
            }
            FamilySpec::Endpoints { start, end } => {
                interval_only("endpoints")?;
                Ok(vec![
                    SymplecticPotential::preset(start, p.clone())?,
                    SymplecticPotential::preset(end, p.clone())?,
                ])
            }
            FamilySpec::Loop { amplitude } => {
                if !matches!(domain, DomainN::Disc { .. }) {
                    return Err(HarnessError::Config("loop needs a disc domain".into()));
                }
                Ok(domain
                    .boundary_angles()
                    .into_iter()
                    .map(|t| SymplecticPotential::perturbed(p.clone(), amplitude * (1.0 + t.cos())))
                    .collect())
            }
            FamilySpec::Files { paths } => {
                let nb = domain.boundary_nodes().len();
                if paths.len() != nb {
                    return Err(HarnessError::Config(format!("{} files for {nb} boundary nodes", paths.len())));
                }
                paths
                    .iter()
                    .map(|path| {
                        let text = std::fs::read_to_string(path)?;
                        let (u, _) = io::read_symplectic(&text)?;
                        if u.polytope() != p {
                            return Err(HarnessError::Config(format!("{} is on a different polytope", path.display())));
                        }
                        Ok(u)
                    })
                    .collect()
            }
        }
    }
}

/// Sampling of the comparison grids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Resolution {
    /// `ρ ∈ [−rho_extent, rho_extent]` along every axis.
    pub rho_extent: f64,
    pub rho_nodes: usize,
    /// Nodes per axis of the polytope grid used for convexity checks.
    pub polytope_nodes: usize,
    /// `y` nodes per axis of the Cartesian patch on 2-dimensional domains.
    pub patch_nodes: usize,
    /// Half-width of the Cartesian patch `[−w, w]²`.
    pub patch_extent: f64,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution {
            rho_extent: 4.0,
            rho_nodes: 161,
            polytope_nodes: 41,
            patch_nodes: 11,
            patch_extent: 0.5,
        }
    }
}

impl Resolution {
    pub fn rho_axes(&self, m: usize) -> Vec<Vec<f64>> {
        vec![linspace(-self.rho_extent, self.rho_extent, self.rho_nodes); m]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub polytope: PolytopeSpec,
    pub domain: DomainSpec,
    pub family: FamilySpec,
    pub levels: Vec<i64>,
    #[serde(default)]
    pub resolution: Resolution,
    /// Interior window `ℓ_r(∇_ρΦ) ≥ window` for error norms.
    #[serde(default = "default_window")]
    pub window: f64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_window() -> f64 {
    0.1
}

impl ExperimentConfig {
    /// `geodesic(a)` on `CP¹` over `N = [0, 1]` with 20 cells.
    pub fn geodesic(amplitude: f64) -> Self {
        ExperimentConfig {
            polytope: PolytopeSpec::Preset("interval".into()),
            domain: DomainSpec::Interval { cells: 20 },
            family: FamilySpec::Geodesic { amplitude },
            levels: vec![8, 16, 32, 64],
            resolution: Resolution::default(),
            window: default_window(),
            output: None,
        }
    }

    /// `loop(a)` on `CP¹` over the unit disc.
    pub fn disc_loop(amplitude: f64) -> Self {
        ExperimentConfig {
            polytope: PolytopeSpec::Preset("interval".into()),
            domain: DomainSpec::Disc { rings: 8, angles: 128 },
            family: FamilySpec::Loop { amplitude },
            levels: vec![8, 16, 32],
            resolution: Resolution {
                rho_nodes: 81,
                ..Resolution::default()
            },
            window: default_window(),
            output: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels.is_empty() || self.levels[0] < 1 || self.levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(HarnessError::Config("levels must be positive and strictly increasing".into()));
        }
        let r = &self.resolution;
        if !(r.rho_extent > 0.0) || r.rho_nodes < 5 || r.polytope_nodes < 4 || r.patch_nodes < 5 {
            return Err(HarnessError::Config("resolution too coarse".into()));
        }
        if !(r.patch_extent > 0.0 && r.patch_extent < 1.0 / std::f64::consts::SQRT_2) {
            return Err(HarnessError::Config("the patch must lie inside the unit disc".into()));
        }
        if !(0.0..0.5).contains(&self.window) {
            return Err(HarnessError::Config("window must lie in [0, 1/2)".into()));
        }
        let p = self.polytope.build()?;
        let d = self.domain.build()?;
        if let FamilySpec::Geodesic { .. } | FamilySpec::Loop { .. } | FamilySpec::Endpoints { .. } = self.family {
            self.family.build(&p, &d)?;
        }
        Ok(())
    }
}
