//! Experiment plans: a base problem, sweep axes, and diagnostic knobs.

use std::path::Path;

use hjdg_core::problem::{domain_center, validate_problem, DiffusionSpec, ProblemConfig, ProblemSpec, PullBack};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const DEFAULT_ALPHA1: f64 = 8.0 / 7.0;
pub const DEFAULT_K_MAX: usize = 6;

fn default_alpha1() -> f64 {
    DEFAULT_ALPHA1
}

fn default_k_max() -> usize {
    DEFAULT_K_MAX
}

/// `β₁ = 1/4`, shrunk until `3β₁ ≤ r*`.
pub fn default_beta1() -> f64 {
    0.25f64.min(R_STAR_PROXY / 3.0)
}

fn default_delta0() -> f64 {
    0.1
}

fn default_dg_levels() -> usize {
    4
}

fn default_workers() -> usize {
    1
}

/// Which diagnostics a sweep runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosticFlags {
    #[serde(default = "yes")]
    pub holder: bool,
    #[serde(default)]
    pub dg: bool,
}

fn yes() -> bool {
    true
}

impl Default for DiagnosticFlags {
    fn default() -> Self {
        Self { holder: true, dg: false }
    }
}

/// Radius proxy used to shrink the default `β₁`.
pub const R_STAR_PROXY: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentPlan {
    pub base: ProblemConfig,
    #[serde(default)]
    pub epsilons: Option<Vec<f64>>,
    /// Diffusion patterns swept as the roughness axis.
    #[serde(default)]
    pub roughness: Option<Vec<DiffusionSpec>>,
    /// Multipliers applied to the source.
    #[serde(default)]
    pub source_strengths: Option<Vec<f64>>,
    /// Integer refinement factors: cells times r, h over r.
    #[serde(default)]
    pub refinements: Option<Vec<usize>>,
    #[serde(default)]
    pub diagnostics: DiagnosticFlags,
    /// Oscillation centers; the domain center when absent.
    #[serde(default)]
    pub centers: Option<Vec<Vec<f64>>>,
    /// Extra centers drawn from the inner half of the domain with `seed`.
    #[serde(default)]
    pub random_centers: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_alpha1")]
    pub alpha1: f64,
    /// Explicit `β₁`; otherwise `min(1/4, r*/3)`.
    #[serde(default)]
    pub beta1: Option<f64>,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    /// Time available below the center; a third of the run when absent.
    #[serde(default)]
    pub lookback: Option<f64>,
    /// `λ*` in the `Λ₀` normalization condition; `K₀` when absent.
    #[serde(default)]
    pub lambda_star: Option<f64>,
    /// `μ₀`; `|Q₂|` when absent.
    #[serde(default)]
    pub mu0: Option<f64>,
    #[serde(default = "default_delta0")]
    pub delta0: f64,
    #[serde(default = "default_dg_levels")]
    pub dg_levels: usize,
    #[serde(default)]
    pub cfl_safety: Option<f64>,
    /// Run points that fail validation, flagged as probes.
    #[serde(default)]
    pub allow_probes: bool,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub output: Option<String>,
}

impl ExperimentPlan {
    pub fn from_json_str(text: &str) -> Result<Self, CliError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn beta1(&self) -> f64 {
        self.beta1.unwrap_or_else(default_beta1)
    }

    /// Cartesian product of the axes; an absent axis contributes the base value.
    pub fn points(&self) -> Vec<SweepPoint> {
        let eps = self.epsilons.clone().unwrap_or_else(|| vec![self.base.epsilon]);
        let rough: Vec<Option<usize>> = match &self.roughness {
            Some(r) => (0..r.len()).map(Some).collect(),
            None => vec![None],
        };
        let strengths = self.source_strengths.clone().unwrap_or_else(|| vec![1.0]);
        let refinements = self.refinements.clone().unwrap_or_else(|| vec![1]);
        let mut out = Vec::new();
        for &refinement in &refinements {
            for &strength in &strengths {
                for &r in &rough {
                    for &epsilon in &eps {
                        out.push(SweepPoint {
                            index: out.len(),
                            epsilon,
                            roughness: r,
                            strength,
                            refinement,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn roughness_label(&self, point: &SweepPoint) -> String {
        let d = match (point.roughness, &self.roughness) {
            (Some(i), Some(list)) => &list[i],
            _ => &self.base.diffusion,
        };
        serde_json::to_string(d).unwrap_or_default()
    }

    /// The problem of one sweep point, with the names of any violated hypotheses.
    pub fn build(&self, point: &SweepPoint) -> Result<(ProblemSpec, Vec<String>), CliError> {
        let mut cfg = self.base.clone();
        cfg.epsilon = point.epsilon;
        if let (Some(i), Some(list)) = (point.roughness, &self.roughness) {
            cfg.diffusion = list[i].clone();
        }
        if point.refinement == 0 {
            return Err(CliError::Plan("refinement factors must be positive".into()));
        }
        if point.refinement > 1 {
            let r = point.refinement;
            let (lo, h) = (
                cfg.grid.origin.clone().unwrap_or_else(|| {
                    cfg.grid.cells.iter().map(|&c| -0.5 * c as f64 * cfg.grid.h).collect()
                }),
                cfg.grid.h,
            );
            cfg.grid.cells = cfg.grid.cells.iter().map(|c| c * r).collect();
            cfg.grid.h = h / r as f64;
            cfg.grid.origin = Some(lo);
        }
        let n = cfg.n;
        if point.strength != 1.0 {
            cfg.source = cfg.source.transformed(point.strength, PullBack::identity(n));
        }
        let spec = cfg.into_spec()?;
        let violations = validate_problem(&spec).iter().map(|v| v.to_string()).collect();
        Ok((spec, violations))
    }

    /// Configured centers followed by the seeded random ones.
    pub fn centers(&self, spec: &ProblemSpec) -> Vec<Vec<f64>> {
        let space = spec.space();
        let mut out = self.centers.clone().unwrap_or_else(|| vec![domain_center(space)]);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for _ in 0..self.random_centers {
            out.push(
                (0..space.dim())
                    .map(|a| {
                        let (lo, hi) = space.bounds(a);
                        let (mid, half) = (0.5 * (lo + hi), 0.25 * (hi - lo));
                        mid + half * rng.gen_range(-1.0..1.0)
                    })
                    .collect(),
            );
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub index: usize,
    pub epsilon: f64,
    pub roughness: Option<usize>,
    pub strength: f64,
    pub refinement: usize,
}
