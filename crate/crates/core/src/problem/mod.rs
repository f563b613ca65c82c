//! PDE instances: growth parameters, coefficient fields, data, and the
//! structural hypotheses they are checked against.

mod coefficients;
mod data;
pub mod quadrature;

pub use coefficients::{domain_center, DiffusionSpec, MatrixValue, PullBack, SourceSpec};
pub use data::{BoundaryData, InitialData};

use std::fmt;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridError, SpaceTimeGrid, SpatialGrid};

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("bad matrix: {0}")]
    BadMatrix(String),
    #[error("|x|^(-{exponent}) is not in L^{m} in dimension {n}")]
    Divergent { exponent: f64, m: f64, n: usize },
    #[error("integrability exponent must be at least 1 (conjugates need more than 1), got {0}")]
    BadExponent(f64),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One PDE instance `∂t u + Λ⁻¹|∇u|^p − div(A∇u) = f` with `A = ε M`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub p: f64,
    pub lambda: f64,
    pub lambda0: f64,
    pub m: f64,
    pub epsilon: f64,
    pub diffusion: DiffusionSpec,
    pub source: SourceSpec,
    pub grid: SpaceTimeGrid,
    pub initial: InitialData,
    pub boundary: BoundaryData,
}

impl ProblemSpec {
    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn space(&self) -> &SpatialGrid {
        self.grid.space()
    }

    /// Per-cell row-major `A = ε M`.
    pub fn diffusion_field(&self) -> Result<Vec<f64>, ProblemError> {
        Ok(self
            .diffusion
            .patterns(self.space())?
            .into_iter()
            .map(|v| self.epsilon * v)
            .collect())
    }

    /// Largest operator norm over the realized matrices.
    pub fn diffusion_norm(&self) -> Result<f64, ProblemError> {
        let n = self.dim();
        let mut norm = 0.0_f64;
        for pat in self.diffusion.distinct_patterns(n)? {
            norm = norm.max(self.epsilon.abs() * operator_norm(&pat, n));
        }
        Ok(norm)
    }

    pub fn m_threshold(&self) -> f64 {
        m_threshold(self.dim(), self.p)
    }

    /// `‖f‖_m` over the whole domain and time interval.
    pub fn source_norm(&self) -> Result<f64, ProblemError> {
        self.source.lm_norm_domain(self.m, &self.grid)
    }

    /// Same instance with `g` added to the source and `rate * t` added to the
    /// boundary data: the problem solved by `u + rate * t`.
    pub fn shifted_by_time(&self, rate: f64) -> Self {
        Self {
            source: self.source.clone().offset(rate),
            boundary: self.boundary.clone().shifted(rate),
            ..self.clone()
        }
    }

    pub fn with_grid(&self, grid: SpaceTimeGrid) -> Self {
        Self {
            grid,
            ..self.clone()
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self, ProblemError> {
        let cfg: ProblemConfig = serde_json::from_str(text)?;
        cfg.into_spec()
    }

    pub fn from_path(path: &Path) -> Result<Self, ProblemError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// `1 + max(n, 2)/p`.
pub fn m_threshold(n: usize, p: f64) -> f64 {
    1.0 + (n.max(2) as f64) / p
}

/// Largest singular value of a row-major `n x n` matrix.
pub fn operator_norm(entries: &[f64], n: usize) -> f64 {
    let m = DMatrix::from_row_slice(n, n, entries);
    m.singular_values().max()
}

/// Hölder conjugate `m/(m-1)`.
pub fn m_conjugate(m: f64) -> Result<f64, ProblemError> {
    if !(m > 1.0) {
        return Err(ProblemError::BadExponent(m));
    }
    Ok(m / (m - 1.0))
}

/// A failed structural hypothesis.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    PNotSuperquadratic { p: f64 },
    LambdaNotPositive { lambda: f64 },
    Lambda0Negative { lambda0: f64 },
    MBelowThreshold { m: f64, threshold: f64 },
    EpsilonOutOfRange { epsilon: f64, lambda: f64 },
    DiffusionTooLarge { norm: f64, lambda: f64 },
    SourceTooLarge { norm: f64, lambda: f64 },
    SourceNotIntegrable(String),
    Malformed(String),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::PNotSuperquadratic { p } => write!(f, "p must exceed 2 (got {p})"),
            Violation::LambdaNotPositive { lambda } => {
                write!(f, "lambda must be positive (got {lambda})")
            }
            Violation::Lambda0Negative { lambda0 } => {
                write!(f, "lambda0 must be nonnegative (got {lambda0})")
            }
            Violation::MBelowThreshold { m, threshold } => {
                write!(f, "m = {m} does not exceed 1 + max(n,2)/p = {threshold}")
            }
            Violation::EpsilonOutOfRange { epsilon, lambda } => {
                write!(f, "epsilon = {epsilon} outside [0, {lambda}]")
            }
            Violation::DiffusionTooLarge { norm, lambda } => {
                write!(f, "|A| = {norm} exceeds lambda = {lambda}")
            }
            Violation::SourceTooLarge { norm, lambda } => {
                write!(f, "|f|_m = {norm} exceeds lambda = {lambda}")
            }
            Violation::SourceNotIntegrable(msg) => write!(f, "source not integrable: {msg}"),
            Violation::Malformed(msg) => write!(f, "malformed problem: {msg}"),
        }
    }
}

/// Every structural hypothesis the instance fails; empty when all hold.
pub fn validate_problem(spec: &ProblemSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    if !(spec.p > 2.0) {
        out.push(Violation::PNotSuperquadratic { p: spec.p });
    }
    if !(spec.lambda > 0.0) {
        out.push(Violation::LambdaNotPositive {
            lambda: spec.lambda,
        });
    }
    if !(spec.lambda0 >= 0.0) {
        out.push(Violation::Lambda0Negative {
            lambda0: spec.lambda0,
        });
    }
    let threshold = spec.m_threshold();
    if !(spec.m > threshold) {
        out.push(Violation::MBelowThreshold {
            m: spec.m,
            threshold,
        });
    }
    if !(spec.epsilon >= 0.0 && spec.epsilon <= spec.lambda) {
        out.push(Violation::EpsilonOutOfRange {
            epsilon: spec.epsilon,
            lambda: spec.lambda,
        });
    }
    match spec.diffusion_norm() {
        Ok(norm) if norm > spec.lambda => out.push(Violation::DiffusionTooLarge {
            norm,
            lambda: spec.lambda,
        }),
        Ok(_) => {}
        Err(e) => out.push(Violation::Malformed(e.to_string())),
    }
    if spec.m >= 1.0 {
        match spec.source_norm() {
            Ok(norm) if norm > spec.lambda => out.push(Violation::SourceTooLarge {
                norm,
                lambda: spec.lambda,
            }),
            Ok(_) => {}
            Err(e @ ProblemError::Divergent { .. }) => {
                out.push(Violation::SourceNotIntegrable(e.to_string()))
            }
            Err(e) => out.push(Violation::Malformed(e.to_string())),
        }
    }
    out
}

/// The model Hamiltonian `Λ⁻¹|v|^p` and the growth envelope other
/// Hamiltonians are validated against.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianSpec {
    pub lambda: f64,
    pub p: f64,
}

impl HamiltonianSpec {
    pub fn model(&self, v: &[f64]) -> f64 {
        norm(v).powf(self.p) / self.lambda
    }

    /// Whether `Λ⁻¹|v|^p − f ≤ value ≤ Λ|v|^p + Λ`.
    pub fn within_envelope(&self, v: &[f64], f: f64, value: f64) -> bool {
        let g = norm(v).powf(self.p);
        g / self.lambda - f <= value && value <= self.lambda * g + self.lambda
    }

    /// Lattice points of `[-radius, radius]^n` (`per_axis` per axis) at which
    /// `hamiltonian` leaves the envelope.
    pub fn envelope_violations(
        &self,
        n: usize,
        radius: f64,
        per_axis: usize,
        f: f64,
        hamiltonian: impl Fn(&[f64]) -> f64,
    ) -> Vec<Vec<f64>> {
        let ranges = vec![0..per_axis; n];
        let step = 2.0 * radius / (per_axis.max(2) - 1) as f64;
        let mut bad = Vec::new();
        crate::grid::for_each_multi_index(&ranges, |idx| {
            let v: Vec<f64> = idx.iter().map(|&i| -radius + i as f64 * step).collect();
            if !self.within_envelope(&v, f, hamiltonian(&v)) {
                bad.push(v);
            }
        });
        bad
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// JSON form of a [`ProblemSpec`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemConfig {
    pub n: usize,
    pub p: f64,
    pub m: f64,
    pub lambda: f64,
    #[serde(default)]
    pub lambda0: f64,
    pub epsilon: f64,
    pub diffusion: DiffusionSpec,
    pub source: SourceSpec,
    pub grid: GridConfig,
    pub initial: InitialData,
    pub boundary: BoundaryData,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub cells: Vec<usize>,
    pub h: f64,
    pub dt: f64,
    pub t0: f64,
    pub t1: f64,
    #[serde(default)]
    pub origin: Option<Vec<f64>>,
}

impl GridConfig {
    pub fn build(&self) -> Result<SpaceTimeGrid, GridError> {
        let space = match &self.origin {
            Some(o) => SpatialGrid::new(self.cells.clone(), self.h, o.clone())?,
            None => SpatialGrid::centered(self.cells.clone(), self.h)?,
        };
        SpaceTimeGrid::new(space, self.dt, self.t0, self.t1)
    }
}

impl ProblemConfig {
    pub fn into_spec(self) -> Result<ProblemSpec, ProblemError> {
        if self.grid.cells.len() != self.n {
            return Err(ProblemError::Config(format!(
                "n = {} but grid has {} axes",
                self.n,
                self.grid.cells.len()
            )));
        }
        let grid = self.grid.build()?;
        let spec = ProblemSpec {
            p: self.p,
            lambda: self.lambda,
            lambda0: self.lambda0,
            m: self.m,
            epsilon: self.epsilon,
            diffusion: self.diffusion,
            source: self.source,
            grid,
            initial: self.initial,
            boundary: self.boundary,
        };
        // surface shape errors early
        spec.diffusion.patterns(spec.space())?;
        spec.initial.values(spec.space())?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base_spec() -> ProblemSpec {
        let space = SpatialGrid::centered(vec![64], 1.0 / 16.0).unwrap();
        let grid = SpaceTimeGrid::new(space, 0.01, 0.0, 0.1).unwrap();
        ProblemSpec {
            p: 3.0,
            lambda: 1.0,
            lambda0: 0.0,
            m: 2.0,
            epsilon: 0.01,
            diffusion: DiffusionSpec::Scalar,
            source: SourceSpec::Zero,
            grid,
            initial: InitialData::Constant { value: 0.0 },
            boundary: BoundaryData::Frozen,
        }
    }

    #[test]
    fn valid_instance_has_no_violations() {
        assert!(validate_problem(&base_spec()).is_empty());
    }

    #[test]
    fn p_two_is_rejected() {
        let spec = ProblemSpec {
            p: 2.0,
            ..base_spec()
        };
        let v = validate_problem(&spec);
        assert!(v.contains(&Violation::PNotSuperquadratic { p: 2.0 }));
        assert!(v[0].to_string().contains("p must exceed 2"));
    }

    #[test]
    fn m_below_five_thirds_is_rejected() {
        let spec = ProblemSpec {
            m: 1.5,
            ..base_spec()
        };
        let v = validate_problem(&spec);
        assert!(v.iter().any(|v| matches!(
            v,
            Violation::MBelowThreshold { threshold, .. } if (threshold - 5.0 / 3.0).abs() < 1e-15
        )));
    }

    #[test]
    fn large_coefficients_are_flagged() {
        let spec = ProblemSpec {
            epsilon: 0.5,
            diffusion: DiffusionSpec::Uniform {
                matrix: MatrixValue::Scalar(3.0),
            },
            source: SourceSpec::Constant { value: 10.0 },
            ..base_spec()
        };
        let v = validate_problem(&spec);
        assert!(v.iter().any(|v| matches!(v, Violation::DiffusionTooLarge { .. })));
        assert!(v.iter().any(|v| matches!(v, Violation::SourceTooLarge { .. })));
    }

    #[test]
    fn conjugates() {
        assert_eq!(m_conjugate(2.0).unwrap(), 2.0);
        assert_eq!(m_conjugate(3.0).unwrap(), 1.5);
        assert!((m_conjugate(1.5).unwrap() - 3.0).abs() < 1e-15);
        assert!(m_conjugate(1.0).is_err());
    }

    #[test]
    fn operator_norm_of_rotation_and_symmetric() {
        let (c, s) = (0.3f64.cos(), 0.3f64.sin());
        assert!((operator_norm(&[c, -s, s, c], 2) - 1.0).abs() < 1e-12);
        assert!((operator_norm(&[0.0, 2.0, 2.0, 0.0], 2) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn envelope_contains_model() {
        let h = HamiltonianSpec { lambda: 2.0, p: 3.0 };
        assert!(h.envelope_violations(2, 3.0, 21, 0.0, |v| h.model(v)).is_empty());
        // a Hamiltonian growing like |v|^4 escapes the upper bound
        let bad = h.envelope_violations(1, 10.0, 41, 0.0, |v| v[0].powi(4));
        assert!(!bad.is_empty());
    }

    #[test]
    fn config_round_trip() {
        let text = r#"{
            "n": 1, "p": 3, "m": 2, "lambda": 1, "lambda0": 0, "epsilon": 0.01,
            "diffusion": {"kind": "checkerboard", "block": 4, "a": 1.0, "b": 0.1},
            "source": {"kind": "radial_singular", "coefficient": 1.0, "exponent": 0.25, "center": [0.3]},
            "grid": {"cells": [64], "h": 0.03125, "dt": 0.01, "t0": 0, "t1": 0.25},
            "initial": {"kind": "tanh", "amplitude": 2.0, "width": 0.01},
            "boundary": {"kind": "frozen"}
        }"#;
        let spec = ProblemSpec::from_json_str(text).unwrap();
        assert_eq!(spec.grid.steps(), 25);
        assert_eq!(spec.diffusion, DiffusionSpec::checkerboard(4, 1.0, 0.1));
        let cfg: ProblemConfig = serde_json::from_str(text).unwrap();
        let again: ProblemConfig = serde_json::from_str(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, again);
        assert!(ProblemSpec::from_json_str(r#"{"n": 2}"#).is_err());
    }
}
