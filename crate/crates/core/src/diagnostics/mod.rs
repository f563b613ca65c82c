//! De Giorgi diagnostics on solved fields: truncations, cutoffs, energies,
//! level-set and interstitial measures, oscillation decay, and exponent fits.

mod energy;
mod oscillation;

pub use energy::{
    dg1_iterate, energy, energy_inequality_sides, energy_terms, DG1Config, EnergyLevel,
    EnergyReport, EnergySides, EnergyWindow, TruncationLadder,
};
pub use oscillation::{
    classify_majority, fit_gamma, oscillation_profile, theoretical_gamma, GammaFit, Majority,
    OscLevel, OscillationProfile,
};

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

use crate::grid::{cylinder_samples, GridError, GridField, ParabolicCylinder, SpatialGrid};
use crate::problem::ProblemError;
use crate::smoothstep::RadialStep;

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error("matrix is not symmetric (|a_ij - a_ji| = {0})")]
    Asymmetric(f64),
    #[error("cutoff infeasible: {0}")]
    InfeasibleCutoff(String),
    #[error("forms (7)/(8) need b > sigma = {sigma}, got b = {b}")]
    ExponentTooSmall { b: f64, sigma: f64 },
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("fit is degenerate: {0}")]
    Degenerate(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Pointwise `max(u - c, 0)`.
pub fn truncate(u: &GridField, c: f64) -> GridField {
    u.map(|v| (v - c).max(0.0))
}

/// `min(λ_min(M), 0)` for a symmetric row-major `n x n` matrix.
pub fn m_minus(entries: &[f64], n: usize) -> Result<f64, DiagnosticsError> {
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((entries[i * n + j] - entries[j * n + i]).abs());
        }
    }
    if worst > 1e-12 {
        return Err(DiagnosticsError::Asymmetric(worst));
    }
    let lmin = match n {
        1 => entries[0],
        _ => {
            let m = DMatrix::from_row_slice(n, n, entries);
            SymmetricEigen::new(m).eigenvalues.min()
        }
    };
    Ok(lmin.min(0.0))
}

/// Radial smoothstep cutoff: 1 on `B_plateau`, 0 outside `B_support`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialCutoff {
    pub support: f64,
    pub plateau: f64,
    pub center: Vec<f64>,
    profile: RadialStep,
}

impl RadialCutoff {
    /// Fails unless `plateau < support` and `gradient_bound >= 2/(support - plateau)`.
    pub fn new(support: f64, plateau: f64, gradient_bound: f64, dim: usize) -> Result<Self, DiagnosticsError> {
        if !(plateau >= 0.0 && plateau < support) {
            return Err(DiagnosticsError::InfeasibleCutoff(format!(
                "plateau {plateau} must lie in [0, support = {support})"
            )));
        }
        let need = 2.0 / (support - plateau);
        if gradient_bound < need * (1.0 - 1e-12) {
            return Err(DiagnosticsError::InfeasibleCutoff(format!(
                "gradient bound {gradient_bound} below 2/(R - r) = {need}"
            )));
        }
        Ok(Self {
            support,
            plateau,
            center: vec![0.0; dim],
            profile: RadialStep::new(plateau, support),
        })
    }

    pub fn value(&self, r: f64) -> f64 {
        self.profile.value(r)
    }

    pub fn radial_derivative(&self, r: f64) -> f64 {
        self.profile.d1(r)
    }

    /// Exact `max |∇φ|`.
    pub fn max_gradient(&self) -> f64 {
        self.profile.d1_max()
    }

    pub fn sample(&self, space: &SpatialGrid) -> CutoffField {
        let mut values = Vec::with_capacity(space.len());
        let mut grad_norm = Vec::with_capacity(space.len());
        let mut x = vec![0.0; space.dim()];
        for c in 0..space.len() {
            space.center_into(c, &mut x);
            let r = x
                .iter()
                .zip(&self.center)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            values.push(self.value(r));
            grad_norm.push(self.radial_derivative(r).abs());
        }
        CutoffField { values, grad_norm }
    }
}

/// A cutoff sampled at cell centers, with its exact gradient magnitude.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffField {
    pub values: Vec<f64>,
    pub grad_norm: Vec<f64>,
}

impl CutoffField {
    pub fn sup(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn grad_sup(&self) -> f64 {
        self.grad_norm.iter().fold(0.0_f64, |m, v| m.max(*v))
    }
}

/// `dt h^n #{samples of cyl with pred(u)}`.
fn count_measure(u: &GridField, cyl: &ParabolicCylinder, pred: impl Fn(f64) -> bool) -> f64 {
    let (slices, cells) = cylinder_samples(u.grid(), cyl);
    let mut count = 0usize;
    for k in slices {
        let s = u.slice(k);
        count += cells.iter().filter(|&&c| pred(s[c])).count();
    }
    count as f64 * u.grid().dt() * u.space().cell_volume()
}

/// Measure of `{u > threshold} ∩ cyl` on the samples.
pub fn levelset_measure(u: &GridField, threshold: f64, cyl: &ParabolicCylinder) -> f64 {
    count_measure(u, cyl, |v| v > threshold)
}

/// Measures of `{u ≤ 0} ∩ Q₂`, `{0 < u < 1} ∩ Q₂`, and `{u ≥ 1} ∩ Q̄₂`.
pub fn interstitial_measure(u: &GridField) -> (f64, f64, f64) {
    let n = u.space().dim();
    let q2 = ParabolicCylinder::q2(n);
    let below = count_measure(u, &q2, |v| v <= 0.0);
    let between = count_measure(u, &q2, |v| v > 0.0 && v < 1.0);
    let above = count_measure(u, &ParabolicCylinder::q_bar2(n), |v| v >= 1.0);
    (below, between, above)
}

/// Smallest integer strictly greater than `q2_measure / mu0`.
pub fn k0_levels(mu0: f64, q2_measure: f64) -> Result<usize, DiagnosticsError> {
    if !(mu0 > 0.0) {
        return Err(DiagnosticsError::Parameter(format!("mu0 must be positive, got {mu0}")));
    }
    Ok((q2_measure / mu0).floor() as usize + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{SpaceTimeGrid, SpatialGrid};

    fn q3_grid(h: f64, dt: f64) -> SpaceTimeGrid {
        let cells = (6.0 / h).round() as usize;
        let space = SpatialGrid::centered(vec![cells], h).unwrap();
        SpaceTimeGrid::new(space, dt, -4.0, 0.0).unwrap()
    }

    #[test]
    fn truncation_examples() {
        let g = q3_grid(0.25, 0.5);
        assert!(truncate(&GridField::constant(g.clone(), 1.0), 0.5)
            .values()
            .iter()
            .all(|&v| v == 0.5));
        assert!(truncate(&GridField::constant(g.clone(), -1.0), 0.3)
            .values()
            .iter()
            .all(|&v| v == 0.0));
        let x = GridField::from_fn(g, |_, x| x[0]).unwrap();
        let t = truncate(&x, 0.0);
        for (a, b) in t.values().iter().zip(x.values()) {
            assert_eq!(*a, b.max(0.0));
        }
    }

    #[test]
    fn m_minus_examples() {
        assert_eq!(m_minus(&[2.0, 0.0, 0.0, 3.0], 2).unwrap(), 0.0);
        assert!((m_minus(&[1.0, 0.0, 0.0, -2.0], 2).unwrap() + 2.0).abs() < 1e-15);
        assert!((m_minus(&[0.0, 1.0, 1.0, 0.0], 2).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(
            m_minus(&[0.0, 1.0, 0.0, 0.0], 2),
            Err(DiagnosticsError::Asymmetric(_))
        ));
    }

    #[test]
    fn cutoff_examples() {
        let phi = RadialCutoff::new(2.0, 1.5, 4.0, 1).unwrap();
        assert_eq!(phi.value(0.0), 1.0);
        assert_eq!(phi.value(2.0), 0.0);
        assert_eq!(phi.value(2.5), 0.0);
        let mut g = 0.0_f64;
        for i in 0..=100_000 {
            let r = 1.5 + 0.5 * i as f64 / 100_000.0;
            g = g.max(phi.radial_derivative(r).abs());
        }
        assert!((3.0..=4.0).contains(&g), "{g}");
        assert!(RadialCutoff::new(2.0, 1.5, 3.9, 1).is_err());
        assert!(RadialCutoff::new(1.0, 1.5, 100.0, 1).is_err());
    }

    #[test]
    fn levelset_examples() {
        let g = q3_grid(1.0 / 32.0, 1.0 / 32.0);
        let q = ParabolicCylinder::q_bar2(1);
        let tol = 8.0 * (1.0 / 32.0) * 2.0;
        assert!((levelset_measure(&GridField::constant(g.clone(), 1.0), 0.0, &q) - 8.0).abs() < tol);
        assert_eq!(levelset_measure(&GridField::constant(g.clone(), -1.0), 0.0, &q), 0.0);
        let x = GridField::from_fn(g, |_, x| x[0]).unwrap();
        assert!((levelset_measure(&x, 0.0, &q) - 4.0).abs() < tol);
    }

    #[test]
    fn interstitial_examples() {
        let g = q3_grid(1.0 / 32.0, 1.0 / 32.0);
        let tol = 0.6;
        let (b, m, a) = interstitial_measure(&GridField::constant(g.clone(), 0.5));
        assert!((m - 16.0).abs() < tol && b == 0.0 && a == 0.0);
        let (b, m, a) = interstitial_measure(&GridField::constant(g.clone(), 2.0));
        assert!((a - 8.0).abs() < tol && b == 0.0 && m == 0.0);
        let (b, _, _) = interstitial_measure(&GridField::from_fn(g, |_, x| 2.0 * x[0]).unwrap());
        assert!((b - 8.0).abs() < tol, "{b}");
    }

    #[test]
    fn k0_examples() {
        assert_eq!(k0_levels(8.0, 16.0).unwrap(), 3);
        assert_eq!(k0_levels(5.0, 16.0).unwrap(), 4);
        assert_eq!(k0_levels(16.0, 16.0).unwrap(), 2);
        assert!(k0_levels(0.0, 16.0).is_err());
    }
}
