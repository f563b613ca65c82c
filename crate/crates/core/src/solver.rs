//! Explicit monotone scheme for `∂t u + Λ⁻¹|∇u|^p − div(A∇u) = f` and the
//! discrete residuals of the distributional and viscosity inequalities.
//!
//! The Hamiltonian uses the Godunov upwind gradient
//! `Σ_i max(D⁻_i u, 0)² + min(D⁺_i u, 0)²`. The diffusion is in flux form:
//! on the face between cells `c` and `c + e_d` the flux is
//! `Σ_j Ā_dj ∂_j u` with `Ā` the average of the two cell matrices, `∂_d u`
//! the two-point difference across the face, and the tangential `∂_j u`
//! the average of the centered differences at `c` and `c + e_d`.
//!
//! Output slices are spaced by the grid `dt`; between two slices the solver
//! takes as many equal sub-steps as the stability bound requires.

use std::fmt::Write as _;
use std::time::Instant;

use thiserror::Error;

use crate::diagnostics::m_minus;
use crate::grid::{
    gradient_of, one_sided_differences, GridError, GridField, SpatialGrid,
};
use crate::problem::{ProblemError, ProblemSpec};

const TINY: f64 = 1e-300;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("time step {dt} exceeds the stability limit {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("non-finite value after step to t = {t}")]
    NonFinite { t: f64 },
    #[error("test function is nonzero on the grid boundary or the first/last time slice")]
    SupportViolation,
    #[error("point (slice {slice}, cell {cell}) lacks a full stencil")]
    StencilOutOfRange { slice: usize, cell: usize },
    #[error("bad scheme configuration: {0}")]
    BadConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub cfl_safety: f64,
    /// Gradient magnitude above which the run is flagged (never clipped).
    pub max_grad_clip: Option<f64>,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            cfl_safety: 0.4,
            max_grad_clip: None,
        }
    }
}

/// Godunov value `Λ⁻¹ (Σ max(b_i,0)² + min(f_i,0)²)^(p/2)`.
pub fn hamiltonian_flux(forward: &[f64], backward: &[f64], p: f64, lambda: f64) -> f64 {
    let s: f64 = forward
        .iter()
        .zip(backward)
        .map(|(&f, &b)| {
            let b = b.max(0.0);
            let f = f.min(0.0);
            b * b + f * f
        })
        .sum();
    s.powf(p / 2.0) / lambda
}

/// Per-output-interval record of the time stepping.
#[derive(Debug, Clone, PartialEq)]
pub struct CflRecord {
    pub t: f64,
    pub substeps: usize,
    pub dt: f64,
    pub max_gradient: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveStats {
    pub substeps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    pub max_gradient: f64,
    /// Smallest `1 - dt / dt_stable` over all sub-steps.
    pub min_cfl_margin: f64,
    /// False when `A` has negative diagonal or nonzero off-diagonal entries.
    pub monotone: bool,
    pub grad_clip_exceeded: bool,
    /// `‖∇u‖_{L^p}` over the output slices (centered gradients).
    pub grad_lp_norm: f64,
    pub wall_seconds: f64,
    pub history: Vec<CflRecord>,
}

impl SolveStats {
    /// Key-value metadata, one `key=value` per line.
    pub fn to_metadata(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "substeps={}", self.substeps);
        let _ = writeln!(s, "dt_min={}", self.dt_min);
        let _ = writeln!(s, "dt_max={}", self.dt_max);
        let _ = writeln!(s, "max_gradient={}", self.max_gradient);
        let _ = writeln!(s, "min_cfl_margin={}", self.min_cfl_margin);
        let _ = writeln!(
            s,
            "regime={}",
            if self.monotone { "monotone" } else { "non-monotone" }
        );
        let _ = writeln!(s, "grad_clip_exceeded={}", self.grad_clip_exceeded);
        let _ = writeln!(s, "grad_lp_norm={}", self.grad_lp_norm);
        let _ = writeln!(s, "wall_seconds={:.3}", self.wall_seconds);
        let hist: Vec<String> = self
            .history
            .iter()
            .map(|r| format!("{}:{}:{}:{}", r.t, r.substeps, r.dt, r.max_gradient))
            .collect();
        let _ = writeln!(s, "cfl_history={}", hist.join(","));
        s
    }
}

/// A problem with its coefficient fields realized on the grid.
pub struct Solver<'a> {
    spec: &'a ProblemSpec,
    cfg: SchemeConfig,
    /// Row-major `n x n` per cell.
    a: Vec<f64>,
    a_max: f64,
    diagonal: bool,
    monotone: bool,
    static_source: Option<Vec<f64>>,
    initial: Vec<f64>,
    boundary_cells: Vec<usize>,
    interior_cells: Vec<usize>,
}

impl<'a> Solver<'a> {
    pub fn new(spec: &'a ProblemSpec, cfg: SchemeConfig) -> Result<Self, SolverError> {
        if !(cfg.cfl_safety > 0.0 && cfg.cfl_safety <= 1.0) {
            return Err(SolverError::BadConfig(format!(
                "cfl_safety {} outside (0, 1]",
                cfg.cfl_safety
            )));
        }
        let space = spec.space();
        let n = space.dim();
        let a = spec.diffusion_field()?;
        let a_max = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let mut diagonal = true;
        let mut monotone = true;
        for cell in a.chunks(n * n) {
            for i in 0..n {
                for j in 0..n {
                    let v = cell[i * n + j];
                    if i == j && v < 0.0 {
                        monotone = false;
                    }
                    if i != j && v != 0.0 {
                        diagonal = false;
                        monotone = false;
                    }
                }
            }
        }
        let static_source = if spec.source.is_time_independent() {
            Some(spec.source.cell_values(space, spec.grid.t_start())?)
        } else {
            None
        };
        let initial = spec.initial.values(space)?;
        let (boundary_cells, interior_cells) =
            (0..space.len()).partition(|&c| space.is_boundary(c));
        Ok(Self {
            spec,
            cfg,
            a,
            a_max,
            diagonal,
            monotone,
            static_source,
            initial,
            boundary_cells,
            interior_cells,
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        self.spec
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    /// Initial slice with the boundary data at `t_start` imposed.
    pub fn initial_slice(&self) -> Vec<f64> {
        let mut u = self.initial.clone();
        self.apply_boundary(&mut u, self.spec.grid.t_start());
        u
    }

    fn apply_boundary(&self, u: &mut [f64], t: f64) {
        let space = self.spec.space();
        let mut x = vec![0.0; space.dim()];
        for &c in &self.boundary_cells {
            space.center_into(c, &mut x);
            u[c] = self.spec.boundary.value(t, &x, self.initial[c]);
        }
    }

    /// Largest upwind gradient magnitude over interior cells.
    pub fn max_gradient(&self, u: &[f64]) -> f64 {
        let space = self.spec.space();
        self.interior_cells
            .iter()
            .map(|&c| upwind_sq(space, u, c))
            .fold(0.0_f64, f64::max)
            .sqrt()
    }

    /// Stability limit for a step from `u`.
    pub fn stable_dt(&self, u: &[f64]) -> f64 {
        self.stable_dt_for_gradient(self.max_gradient(u))
    }

    fn stable_dt_for_gradient(&self, g: f64) -> f64 {
        let space = self.spec.space();
        let n = space.dim() as f64;
        let h = space.h();
        let spec = self.spec;
        let adv = (2.0 * n).sqrt() * spec.p * g.powf(spec.p - 1.0) / (spec.lambda * h);
        let stencil = if self.diagonal { 2.0 * n } else { 2.0 * n + n * (n - 1.0) };
        let diff = stencil * self.a_max / (h * h);
        self.cfg.cfl_safety / (adv + diff + TINY)
    }

    fn source_at(&self, t: f64) -> Result<std::borrow::Cow<'_, [f64]>, SolverError> {
        match &self.static_source {
            Some(v) => Ok(std::borrow::Cow::Borrowed(v)),
            None => Ok(std::borrow::Cow::Owned(
                self.spec.source.cell_values(self.spec.space(), t)?,
            )),
        }
    }

    /// `div(A∇u)` at an interior cell.
    fn divergence(&self, u: &[f64], c: usize) -> f64 {
        let space = self.spec.space();
        let n = space.dim();
        let h = space.h();
        let nn = n * n;
        let mut div = 0.0;
        for d in 0..n {
            for (sign, nb) in [(1.0, space.shifted(c, d, 1)), (-1.0, space.shifted(c, d, -1))] {
                let nb = nb.expect("interior cell has all neighbors");
                let a_c = &self.a[c * nn..(c + 1) * nn];
                let a_n = &self.a[nb * nn..(nb + 1) * nn];
                // outward normal derivative across the face
                let mut flux = 0.5 * (a_c[d * n + d] + a_n[d * n + d]) * (u[nb] - u[c]) / h;
                if !self.diagonal {
                    for j in (0..n).filter(|&j| j != d) {
                        let a_dj = 0.5 * (a_c[d * n + j] + a_n[d * n + j]);
                        if a_dj != 0.0 {
                            let dj = 0.5 * (centered(space, u, c, j) + centered(space, u, nb, j));
                            flux += sign * a_dj * dj;
                        }
                    }
                }
                div += flux / h;
            }
        }
        div
    }

    /// One explicit step of size `dt` from time `t`.
    pub fn step(&self, u: &[f64], t: f64, dt: f64) -> Result<Vec<f64>, SolverError> {
        let limit = self.stable_dt(u);
        if dt > limit * (1.0 + 1e-12) {
            return Err(SolverError::CflViolation { dt, limit });
        }
        let f = self.source_at(t)?;
        let mut next = u.to_vec();
        self.advance(u, &f, dt, &mut next);
        self.apply_boundary(&mut next, t + dt);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::NonFinite { t: t + dt });
        }
        Ok(next)
    }

    fn advance(&self, u: &[f64], f: &[f64], dt: f64, out: &mut [f64]) {
        let space = self.spec.space();
        let (p, lambda) = (self.spec.p, self.spec.lambda);
        for &c in &self.interior_cells {
            let ham = upwind_sq(space, u, c).powf(p / 2.0) / lambda;
            let div = if self.a_max > 0.0 { self.divergence(u, c) } else { 0.0 };
            out[c] = u[c] + dt * (f[c] - ham + div);
        }
    }

    /// Runs from `t_start` to `t_end`, recording every output slice.
    pub fn solve(&self) -> Result<(GridField, SolveStats), SolverError> {
        let clock = Instant::now();
        let grid = &self.spec.grid;
        let space = grid.space();
        let mut stats = SolveStats {
            dt_min: f64::INFINITY,
            dt_max: 0.0,
            min_cfl_margin: 1.0,
            monotone: self.monotone,
            ..SolveStats::default()
        };
        let mut u = self.initial_slice();
        let mut values = Vec::with_capacity(grid.len());
        values.extend_from_slice(&u);
        let mut next = u.clone();
        let mut lp_acc = lp_slice(space, &u, self.spec.p) * 0.5 * grid.dt();

        for k in 0..grid.steps() {
            let t0 = grid.time(k);
            let t1 = grid.time(k + 1);
            let mut t = t0;
            let mut interval_steps = 0usize;
            let mut interval_g = 0.0_f64;
            let mut last_dt = 0.0;
            while t < t1 {
                let g = self.max_gradient(&u);
                interval_g = interval_g.max(g);
                let limit = self.stable_dt_for_gradient(g);
                let remaining = t1 - t;
                let pieces = (remaining / limit).ceil().max(1.0);
                let dt = if pieces <= 1.0 { remaining } else { remaining / pieces };
                stats.min_cfl_margin = stats.min_cfl_margin.min(1.0 - dt / limit);
                let f = self.source_at(t)?;
                next.copy_from_slice(&u);
                self.advance(&u, &f, dt, &mut next);
                let t_new = if pieces <= 1.0 { t1 } else { t + dt };
                self.apply_boundary(&mut next, t_new);
                if next.iter().any(|v| !v.is_finite()) {
                    return Err(SolverError::NonFinite { t: t_new });
                }
                std::mem::swap(&mut u, &mut next);
                t = t_new;
                interval_steps += 1;
                stats.dt_min = stats.dt_min.min(dt);
                stats.dt_max = stats.dt_max.max(dt);
                last_dt = dt;
            }
            stats.substeps += interval_steps;
            stats.max_gradient = stats.max_gradient.max(interval_g);
            stats.history.push(CflRecord {
                t: t0,
                substeps: interval_steps,
                dt: last_dt,
                max_gradient: interval_g,
            });
            let w = if k + 1 == grid.steps() { 0.5 } else { 1.0 };
            lp_acc += w * grid.dt() * lp_slice(space, &u, self.spec.p);
            values.extend_from_slice(&u);
        }
        let g_final = self.max_gradient(&u);
        stats.max_gradient = stats.max_gradient.max(g_final);
        if let Some(clip) = self.cfg.max_grad_clip {
            stats.grad_clip_exceeded = stats.max_gradient > clip;
        }
        stats.grad_lp_norm = lp_acc.powf(1.0 / self.spec.p);
        stats.wall_seconds = clock.elapsed().as_secs_f64();
        let field = GridField::new(grid.clone(), values)?;
        Ok((field, stats))
    }
}

/// Convenience wrapper around [`Solver::solve`].
pub fn solve(spec: &ProblemSpec, cfg: SchemeConfig) -> Result<(GridField, SolveStats), SolverError> {
    Solver::new(spec, cfg)?.solve()
}

#[inline]
fn upwind_sq(space: &SpatialGrid, u: &[f64], c: usize) -> f64 {
    let mut s = 0.0;
    for d in 0..space.dim() {
        let (b, f) = one_sided_differences(space, u, c, d);
        let b = b.max(0.0);
        let f = f.min(0.0);
        s += b * b + f * f;
    }
    s
}

#[inline]
fn centered(space: &SpatialGrid, u: &[f64], c: usize, axis: usize) -> f64 {
    let h = space.h();
    match (space.shifted(c, axis, -1), space.shifted(c, axis, 1)) {
        (Some(m), Some(p)) => (u[p] - u[m]) / (2.0 * h),
        (None, Some(p)) => (u[p] - u[c]) / h,
        (Some(m), None) => (u[c] - u[m]) / h,
        (None, None) => 0.0,
    }
}

fn lp_slice(space: &SpatialGrid, u: &[f64], p: f64) -> f64 {
    let grad = gradient_of(space, u);
    let vol = space.cell_volume();
    (0..space.len())
        .map(|c| {
            let g2: f64 = grad.iter().map(|g| g[c] * g[c]).sum();
            g2.powf(p / 2.0)
        })
        .sum::<f64>()
        * vol
}

/// Weak residual `∬ −u ∂tφ + (Λ⁻¹|∇u|^p − f) φ + A∇u·∇φ` of the model equation.
///
/// `phi` lives on the grid of `u` and must vanish on the boundary ring and on
/// the first and last time slices. Time derivatives of `phi` and all spatial
/// gradients are centered.
pub fn residual_dist(u: &GridField, spec: &ProblemSpec, phi: &GridField) -> Result<f64, SolverError> {
    let grid = u.grid();
    let space = grid.space();
    if phi.grid().len() != grid.len() {
        return Err(GridError::LengthMismatch {
            expected: grid.len(),
            got: phi.grid().len(),
        }
        .into());
    }
    let last = grid.steps();
    for k in 0..=last {
        let s = phi.slice(k);
        let edge = k == 0 || k == last;
        for c in 0..space.len() {
            if s[c] != 0.0 && (edge || space.is_boundary(c)) {
                return Err(SolverError::SupportViolation);
            }
        }
    }
    let n = space.dim();
    let a = spec.diffusion_field()?;
    let static_source = if spec.source.is_time_independent() {
        Some(spec.source.cell_values(space, grid.t_start())?)
    } else {
        None
    };
    let dt = grid.dt();
    let mut total = 0.0;
    for k in 1..last {
        let t = grid.time(k);
        let uk = u.slice(k);
        let pk = phi.slice(k);
        if pk.iter().all(|&v| v == 0.0) {
            continue;
        }
        let (pm, pp) = (phi.slice(k - 1), phi.slice(k + 1));
        let f = match &static_source {
            Some(v) => std::borrow::Cow::Borrowed(v.as_slice()),
            None => std::borrow::Cow::Owned(spec.source.cell_values(space, t)?),
        };
        let gu = gradient_of(space, uk);
        let gp = gradient_of(space, pk);
        let mut acc = 0.0;
        for c in 0..space.len() {
            let dphi_dt = (pp[c] - pm[c]) / (2.0 * dt);
            if pk[c] == 0.0 && dphi_dt == 0.0 && gp.iter().all(|g| g[c] == 0.0) {
                continue;
            }
            let g2: f64 = gu.iter().map(|g| g[c] * g[c]).sum();
            let ham = g2.powf(spec.p / 2.0) / spec.lambda;
            let mut a_term = 0.0;
            for i in 0..n {
                let mut ai = 0.0;
                for j in 0..n {
                    ai += a[c * n * n + i * n + j] * gu[j][c];
                }
                a_term += ai * gp[i][c];
            }
            acc += -uk[c] * dphi_dt + (ham - f[c]) * pk[c] + a_term;
        }
        total += acc;
    }
    Ok(total * dt * space.cell_volume())
}

/// Pointwise `∂t u + Λ|∇u|^p − Λ₀ m⁻(D²u) + Λ` at slice `k`, cell `c`, from
/// centered differences. Requires `0 < k < steps` and a cell off the boundary ring.
pub fn residual_visc(u: &GridField, spec: &ProblemSpec, k: usize, c: usize) -> Result<f64, SolverError> {
    let grid = u.grid();
    let space = grid.space();
    if k == 0 || k >= grid.steps() || c >= space.len() || space.is_boundary(c) {
        return Err(SolverError::StencilOutOfRange { slice: k, cell: c });
    }
    let n = space.dim();
    let h = space.h();
    let s = u.slice(k);
    let dt_u = (u.value(k + 1, c) - u.value(k - 1, c)) / (2.0 * grid.dt());
    let mut g2 = 0.0;
    let mut hess = vec![0.0; n * n];
    for i in 0..n {
        let ip = space.shifted(c, i, 1).expect("interior");
        let im = space.shifted(c, i, -1).expect("interior");
        let gi = (s[ip] - s[im]) / (2.0 * h);
        g2 += gi * gi;
        hess[i * n + i] = (s[ip] - 2.0 * s[c] + s[im]) / (h * h);
        for j in (i + 1)..n {
            let corner = |a: usize, da: isize, db: isize| {
                space
                    .shifted(a, i, da)
                    .and_then(|x| space.shifted(x, j, db))
                    .expect("interior")
            };
            let v = (s[corner(c, 1, 1)] - s[corner(c, 1, -1)] - s[corner(c, -1, 1)]
                + s[corner(c, -1, -1)])
                / (4.0 * h * h);
            hess[i * n + j] = v;
            hess[j * n + i] = v;
        }
    }
    let mm = m_minus(&hess, n).expect("finite-difference Hessian is symmetric");
    Ok(dt_u + spec.lambda * g2.powf(spec.p / 2.0) - spec.lambda0 * mm + spec.lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{SpaceTimeGrid, SpatialGrid};
    use crate::problem::{BoundaryData, DiffusionSpec, InitialData, MatrixValue, SourceSpec};

    fn spec_1d(cells: usize, h: f64, dt: f64, t1: f64) -> ProblemSpec {
        let space = SpatialGrid::centered(vec![cells], h).unwrap();
        ProblemSpec {
            p: 3.0,
            lambda: 1.0,
            lambda0: 0.0,
            m: 2.0,
            epsilon: 0.0,
            diffusion: DiffusionSpec::Scalar,
            source: SourceSpec::Zero,
            grid: SpaceTimeGrid::new(space, dt, 0.0, t1).unwrap(),
            initial: InitialData::Constant { value: 0.0 },
            boundary: BoundaryData::Frozen,
        }
    }

    #[test]
    fn flux_examples() {
        assert_eq!(hamiltonian_flux(&[0.0], &[0.0], 3.0, 1.0), 0.0);
        assert_eq!(hamiltonian_flux(&[2.0], &[2.0], 3.0, 1.0), 8.0);
        assert_eq!(hamiltonian_flux(&[1.0], &[-1.0], 3.0, 1.0), 0.0);
        // local max: both sides count
        assert_eq!(hamiltonian_flux(&[-1.0], &[1.0], 4.0, 2.0), 2.0);
    }

    #[test]
    fn constants_are_steady() {
        let spec = ProblemSpec {
            epsilon: 0.3,
            diffusion: DiffusionSpec::checkerboard(2, 1.0, 0.2),
            initial: InitialData::Constant { value: 1.7 },
            ..spec_1d(32, 1.0 / 16.0, 0.01, 0.1)
        };
        let (u, _) = solve(&spec, SchemeConfig::default()).unwrap();
        assert!(u.values().iter().all(|&v| v == 1.7));
    }

    #[test]
    fn linear_profile_is_exact() {
        let h = 1.0 / 128.0;
        let spec = ProblemSpec {
            initial: InitialData::Affine {
                slope: vec![2.0],
                offset: 0.0,
            },
            boundary: BoundaryData::Affine {
                slope: vec![2.0],
                offset: 0.0,
                rate: -8.0,
            },
            ..spec_1d(256, h, 0.01, 0.1)
        };
        let (u, stats) = solve(&spec, SchemeConfig::default()).unwrap();
        let err = u
            .map_with_coords(|t, x, v| v - (2.0 * x[0] - 8.0 * t))
            .sup_norm();
        assert!(err < 1e-10, "{err}");
        assert!(stats.monotone);
        assert!((stats.max_gradient - 2.0).abs() < 1e-9);
    }

    #[test]
    fn cfl_violation_is_reported() {
        let spec = ProblemSpec {
            epsilon: 1.0,
            ..spec_1d(32, 1.0 / 16.0, 0.01, 0.1)
        };
        let solver = Solver::new(&spec, SchemeConfig::default()).unwrap();
        let u = solver.initial_slice();
        let limit = solver.stable_dt(&u);
        assert!(matches!(
            solver.step(&u, 0.0, 2.0 * limit),
            Err(SolverError::CflViolation { .. })
        ));
        assert!(solver.step(&u, 0.0, limit).is_ok());
    }

    #[test]
    fn off_diagonal_diffusion_flags_non_monotone() {
        let space = SpatialGrid::centered(vec![12, 12], 1.0 / 8.0).unwrap();
        let spec = ProblemSpec {
            epsilon: 0.1,
            diffusion: DiffusionSpec::Uniform {
                matrix: MatrixValue::Full(vec![vec![1.0, 0.5], vec![0.5, 1.0]]),
            },
            grid: SpaceTimeGrid::new(space, 0.01, 0.0, 0.02).unwrap(),
            initial: InitialData::Affine {
                slope: vec![1.0, -1.0],
                offset: 0.0,
            },
            ..spec_1d(8, 0.1, 0.1, 0.1)
        };
        let (u, stats) = solve(&spec, SchemeConfig::default()).unwrap();
        assert!(!stats.monotone);
        assert!(stats.to_metadata().contains("regime=non-monotone"));
        assert!(u.values().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn quadratic_diffusion_matches_heat_equation() {
        // u = x²: ∂t u = 2ε - |2x|^p; at the center cell the gradient vanishes
        let h = 1.0 / 32.0;
        let spec = ProblemSpec {
            epsilon: 0.5,
            initial: InitialData::Affine {
                slope: vec![0.0],
                offset: 0.0,
            },
            ..spec_1d(65, h, 1e-4, 1e-4)
        };
        let spec = ProblemSpec {
            initial: InitialData::Sampled(
                (0..65).map(|i| spec.space().coord(i, 0).powi(2)).collect(),
            ),
            ..spec
        };
        let solver = Solver::new(&spec, SchemeConfig::default()).unwrap();
        let u0 = solver.initial_slice();
        let dt = solver.stable_dt(&u0) * 0.5;
        let u1 = solver.step(&u0, 0.0, dt).unwrap();
        assert!(((u1[32] - u0[32]) / dt - 1.0).abs() < 1e-10);
    }

    #[test]
    fn viscosity_residual_examples() {
        let spec = ProblemSpec {
            lambda: 1.5,
            ..spec_1d(16, 0.125, 0.1, 0.3)
        };
        let c = GridField::constant(spec.grid.clone(), 4.0);
        assert_eq!(residual_visc(&c, &spec, 1, 5).unwrap(), 1.5);
        assert!(residual_visc(&c, &spec, 0, 5).is_err());
        assert!(residual_visc(&c, &spec, 1, 0).is_err());

        let space = SpatialGrid::centered(vec![9, 9], 0.125).unwrap();
        let spec2 = ProblemSpec {
            lambda: 1.0,
            lambda0: 0.0,
            grid: SpaceTimeGrid::new(space, 0.1, 0.0, 0.3).unwrap(),
            ..spec
        };
        let cap = GridField::from_fn(spec2.grid.clone(), |_, x| -(x[0] * x[0] + x[1] * x[1]) / 2.0).unwrap();
        let center = spec2.space().flat_index(&[4, 4]);
        assert!((residual_visc(&cap, &spec2, 1, center).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distributional_residual_zero_test_function() {
        let spec = spec_1d(16, 0.125, 0.1, 0.5);
        let u = GridField::from_fn(spec.grid.clone(), |t, x| x[0] + t).unwrap();
        let phi = GridField::constant(spec.grid.clone(), 0.0);
        assert_eq!(residual_dist(&u, &spec, &phi).unwrap(), 0.0);
        let bad = GridField::constant(spec.grid.clone(), 1.0);
        assert!(matches!(
            residual_dist(&u, &spec, &bad),
            Err(SolverError::SupportViolation)
        ));
    }
}
