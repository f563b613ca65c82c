//! The barrier `σ(t, x) = −2 + λ² β(|x|/λ) − λ² t / 8`, its classical
//! residual, the choice of `K₀`, and the comparison check on solved fields.

use thiserror::Error;

use crate::diagnostics::{m_minus, DiagnosticsError};
use crate::grid::{Ball, GridError, GridField};
use crate::smoothstep::RadialStep;

#[derive(Debug, Error)]
pub enum BarrierError {
    #[error("invalid barrier parameter: {0}")]
    Parameter(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error("no K0 above 1e-12 makes the display negative")]
    NoK0,
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
}

/// `β(r) = 1 − S(2r − 1)`: 1 on `[0, 1/2]`, 0 on `[1, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpProfile {
    step: RadialStep,
}

impl Default for BumpProfile {
    fn default() -> Self {
        Self {
            step: RadialStep::new(0.5, 1.0),
        }
    }
}

impl BumpProfile {
    pub fn value(&self, r: f64) -> f64 {
        self.step.value(r)
    }

    pub fn d1(&self, r: f64) -> f64 {
        self.step.d1(r)
    }

    pub fn d2(&self, r: f64) -> f64 {
        self.step.d2(r)
    }

    /// `‖β′‖∞ = 15/4`.
    pub fn d1_max(&self) -> f64 {
        self.step.d1_max()
    }

    /// `‖β″‖∞ = 40/√3`.
    pub fn d2_max(&self) -> f64 {
        self.step.d2_max()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSpec {
    pub lambda: f64,
    pub lambda0: f64,
    /// Hamiltonian constant `Λ`.
    pub big_lambda: f64,
    pub p: f64,
    pub k0: f64,
    pub profile: BumpProfile,
}

impl BarrierSpec {
    /// Requires `0 < λ ≤ K₀ ≤ 1` and `Λ₀ ≤ λ² K₀`.
    pub fn new(lambda: f64, lambda0: f64, big_lambda: f64, p: f64, k0: f64) -> Result<Self, BarrierError> {
        if !(lambda > 0.0 && lambda <= k0 && k0 <= 1.0) {
            return Err(BarrierError::Parameter(format!(
                "need 0 < lambda <= K0 <= 1, got lambda = {lambda}, K0 = {k0}"
            )));
        }
        if !(lambda0 >= 0.0 && lambda0 <= lambda * lambda * k0) {
            return Err(BarrierError::Parameter(format!(
                "need 0 <= Lambda0 <= lambda^2 K0 = {}, got {lambda0}",
                lambda * lambda * k0
            )));
        }
        if !(p > 2.0 && big_lambda > 0.0) {
            return Err(BarrierError::Parameter(format!(
                "need p > 2 and Lambda > 0, got p = {p}, Lambda = {big_lambda}"
            )));
        }
        Ok(Self {
            lambda,
            lambda0,
            big_lambda,
            p,
            k0,
            profile: BumpProfile::default(),
        })
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn barrier_value(spec: &BarrierSpec, t: f64, x: &[f64]) -> f64 {
    let l = spec.lambda;
    -2.0 + l * l * spec.profile.value(norm(x) / l) - l * l * t / 8.0
}

/// Eigenvalues of `D²σ(x)`: the radial one `β″(|x|/λ)` first, then `n − 1`
/// copies of `(λ/|x|) β′(|x|/λ)`. All vanish on the plateau `|x| ≤ λ/2`.
pub fn hessian_eigenvalues(spec: &BarrierSpec, x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let l = spec.lambda;
    let r = norm(x);
    if r <= l / 2.0 {
        return vec![0.0; n];
    }
    let s = r / l;
    let mut eig = vec![(l / r) * spec.profile.d1(s); n];
    eig[0] = spec.profile.d2(s);
    eig
}

/// `∂tσ + Λ|∇σ|^p − Λ₀ m⁻(D²σ)` from the closed-form derivatives.
pub fn barrier_residual(spec: &BarrierSpec, _t: f64, x: &[f64]) -> f64 {
    let l = spec.lambda;
    let dt = -l * l / 8.0;
    let r = norm(x);
    if r <= l / 2.0 {
        return dt;
    }
    let grad = l * spec.profile.d1(r / l).abs();
    let eig = hessian_eigenvalues(spec, x);
    let lmin = eig.iter().cloned().fold(0.0_f64, f64::min);
    dt + spec.big_lambda * grad.powf(spec.p) - spec.lambda0 * lmin
}

/// `Λ K^(p−2) ‖β′‖^p + K ‖β″‖ + 2 K² (n − 1) ‖β′‖ − 1/8`.
pub fn k0_display(big_lambda: f64, p: f64, n: usize, profile: &BumpProfile, k: f64) -> f64 {
    let b1 = profile.d1_max();
    let b2 = profile.d2_max();
    big_lambda * k.powf(p - 2.0) * b1.powf(p) + k * b2 + 2.0 * k * k * (n as f64 - 1.0) * b1 - 0.125
}

const K0_TARGET: f64 = -1e-9;
const K0_TOL: f64 = 1e-6;
const K0_FLOOR: f64 = 1e-12;

/// Largest `K₀ ≤ 1`, to within `1e−6`, with the display at most `−1e−9`.
pub fn k0_search(big_lambda: f64, p: f64, n: usize, profile: &BumpProfile) -> Result<f64, BarrierError> {
    if !(p > 2.0) {
        return Err(BarrierError::Parameter(format!("p must exceed 2, got {p}")));
    }
    let ok = |k: f64| k0_display(big_lambda, p, n, profile, k) <= K0_TARGET;
    if ok(1.0) {
        return Ok(1.0);
    }
    if !ok(K0_FLOOR) {
        return Err(BarrierError::NoK0);
    }
    let (mut lo, mut hi) = (K0_FLOOR, 1.0);
    while hi - lo > K0_TOL {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    /// `σ ≤ u` on every parabolic-boundary sample.
    pub boundary_ordered: bool,
    /// `min (u − σ)` over the parabolic-boundary samples.
    pub boundary_gap: f64,
    /// `min (u + 2 − λ²/2)` over `[0, T] × B_{λ/2}`.
    pub margin: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Checks the conclusion `u ≥ −2 + λ²/2` on `[0, T] × B_{λ/2}` after
/// verifying both hypotheses on the samples. `u` lives on a grid with
/// `t_start = 0`.
pub fn comparison_check(u: &GridField, spec: &BarrierSpec, t_final: f64) -> Result<ComparisonReport, BarrierError> {
    let grid = u.grid();
    let space = u.space();
    let n = space.dim();
    if !(t_final > 0.0 && t_final < 4.0) {
        return Err(BarrierError::Parameter(format!("T must lie in (0, 4), got {t_final}")));
    }
    if grid.t_start().abs() > 1e-12 || grid.t_end() < t_final - 1e-9 * grid.dt() {
        return Err(BarrierError::Parameter(format!(
            "field covers [{}, {}], need [0, {t_final}]",
            grid.t_start(),
            grid.t_end()
        )));
    }
    let l = spec.lambda;
    let b2 = space.cells_in_ball(&Ball::at_origin(n, 2.0));
    let slices = grid.slices_in(0.0, t_final);
    for k in slices.clone() {
        let row = u.slice(k);
        if let Some(&c) = b2.iter().find(|&&c| row[c] < -2.0) {
            return Err(BarrierError::Hypothesis(format!(
                "u >= -2 on [0,T] x B_2 fails at t = {}, x = {:?}",
                grid.time(k),
                space.center(c)
            )));
        }
    }
    let first = u.slice(0);
    for c in space.cells_in_ball(&Ball::at_origin(n, l)) {
        if first[c] < -2.0 + l * l {
            return Err(BarrierError::Hypothesis(format!(
                "u >= -2 + lambda^2 on {{0}} x B_lambda fails at x = {:?}",
                space.center(c)
            )));
        }
    }

    let h = space.h();
    let mut gap = f64::INFINITY;
    let mut x = vec![0.0; n];
    for k in slices.clone() {
        let t = grid.time(k) - grid.t_start();
        let row = u.slice(k);
        for &c in &b2 {
            space.center_into(c, &mut x);
            let on_edge = k == 0 || space.is_boundary(c) || norm(&x) > 2.0 - h;
            if on_edge {
                gap = gap.min(row[c] - barrier_value(spec, t, &x));
            }
        }
    }
    let inner = space.cells_in_ball(&Ball::at_origin(n, l / 2.0));
    if inner.is_empty() {
        return Err(BarrierError::Grid(GridError::EmptyIntersection));
    }
    let mut margin = f64::INFINITY;
    for k in slices {
        let row = u.slice(k);
        for &c in &inner {
            margin = margin.min(row[c] + 2.0 - l * l / 2.0);
        }
    }
    let tolerance = h + grid.dt();
    Ok(ComparisonReport {
        boundary_ordered: gap >= 0.0,
        boundary_gap: gap,
        margin,
        tolerance,
        pass: margin >= -tolerance,
    })
}

/// `Λ₀ m⁻(D²σ)` evaluated through the generic eigen-solver, for cross-checks.
pub fn barrier_pucci(spec: &BarrierSpec, x: &[f64]) -> Result<f64, BarrierError> {
    let n = x.len();
    let l = spec.lambda;
    let r = norm(x);
    let mut hess = vec![0.0; n * n];
    if r > l / 2.0 {
        let eig = hessian_eigenvalues(spec, x);
        let (radial, tangential) = (eig[0], if n > 1 { eig[1] } else { 0.0 });
        for i in 0..n {
            for j in 0..n {
                let e = x[i] * x[j] / (r * r);
                let id = if i == j { 1.0 } else { 0.0 };
                hess[i * n + j] = radial * e + tangential * (id - e);
            }
        }
    }
    Ok(spec.lambda0 * m_minus(&hess, n)?)
}
