//! Exact scaling symmetries `v = α u(τ t, β x)` of the model equation and the
//! transformed coefficients that go with them.
//!
//! The image grid keeps the cell indices of the source grid and divides every
//! coordinate, `h`, and `dt` by the scales, so `v` is `α u` sample for sample.

use thiserror::Error;

use crate::grid::{gradient_of, GridError, GridField};
use crate::problem::{m_threshold, InitialData, ProblemError, ProblemSpec, PullBack};

#[derive(Debug, Error)]
pub enum ScalingError {
    #[error("invalid scaling parameter: {0}")]
    Parameter(String),
    #[error("scaling constraint violated: {0}")]
    Constraint(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Problem(#[from] ProblemError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingExponents {
    pub e1: f64,
    pub e2: f64,
    pub p: f64,
    pub m: f64,
    pub n: usize,
}

/// `e1` is the midpoint of `(max(2, n/(m−1)), p)`;
/// `e2 = max(−(p−e1)/(p−1), n/m − e1 (m−1)/m)`.
pub fn compute_exponents(p: f64, m: f64, n: usize) -> Result<ScalingExponents, ScalingError> {
    if !(p > 2.0) {
        return Err(ScalingError::Parameter(format!("p must exceed 2, got {p}")));
    }
    if !(m > m_threshold(n, p)) {
        return Err(ScalingError::Parameter(format!(
            "m = {m} must exceed 1 + max(n, 2)/p = {}",
            m_threshold(n, p)
        )));
    }
    let lo = 2f64.max(n as f64 / (m - 1.0));
    if !(lo < p) {
        return Err(ScalingError::Parameter(format!("empty interval ({lo}, {p}) for e1")));
    }
    let e1 = 0.5 * (lo + p);
    let e2 = (-(p - e1) / (p - 1.0)).max(n as f64 / m - e1 * (m - 1.0) / m);
    Ok(ScalingExponents { e1, e2, p, m, n })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScaleMode {
    /// Free `α`, `β` under the size constraints; `Λ₀` rescales.
    General,
    /// Time scale `β^e1`, `α ≤ β^e2`; `Λ₀` is kept.
    Exponent,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleParams {
    pub alpha: f64,
    pub beta: f64,
    pub mode: ScaleMode,
}

const REL_TOL: f64 = 1e-12;

fn at_most(a: f64, b: f64) -> bool {
    a <= b * (1.0 + REL_TOL)
}

impl ScaleParams {
    pub fn general(alpha: f64, beta: f64) -> Self {
        Self {
            alpha,
            beta,
            mode: ScaleMode::General,
        }
    }

    pub fn exponent(alpha: f64, beta: f64) -> Self {
        Self {
            alpha,
            beta,
            mode: ScaleMode::Exponent,
        }
    }

    /// Time scale `τ` with `v(t, x) = α u(τ t, β x)`.
    pub fn time_scale(&self, p: f64, exps: Option<&ScalingExponents>) -> f64 {
        match self.mode {
            ScaleMode::General => self.alpha.powf(p - 1.0) * self.beta.powf(p),
            ScaleMode::Exponent => self.beta.powf(exps.map_or(f64::NAN, |e| e.e1)),
        }
    }

    /// Largest `β` allowed by the three constraints of the general scaling.
    pub fn general_beta_bound(alpha: f64, p: f64, m: f64, n: usize) -> Result<f64, ScalingError> {
        let d = p * (m - 1.0) - n as f64;
        if !(d > 0.0) {
            return Err(ScalingError::Constraint(format!(
                "p(m-1) - n = {d} must be positive"
            )));
        }
        Ok((1.0 / alpha)
            .min(alpha.powf(-(p - 1.0) / (p - 2.0)))
            .min(alpha.powf(-(p * (m - 1.0) + 1.0) / d)))
    }

    pub fn validate(&self, p: f64, m: f64, n: usize, exps: Option<&ScalingExponents>) -> Result<(), ScalingError> {
        let (a, b) = (self.alpha, self.beta);
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(ScalingError::Parameter(format!("alpha = {a}, beta = {b} must be positive")));
        }
        match self.mode {
            ScaleMode::General => {
                let bound = Self::general_beta_bound(a, p, m, n)?;
                if !at_most(b, bound) {
                    return Err(ScalingError::Constraint(format!(
                        "beta = {b} exceeds the bound {bound} for alpha = {a}"
                    )));
                }
            }
            ScaleMode::Exponent => {
                let e = exps.ok_or_else(|| ScalingError::Parameter("exponents required".into()))?;
                if !(b <= 1.0 && a >= 1.0 && at_most(a, b.powf(e.e2))) {
                    return Err(ScalingError::Constraint(format!(
                        "need 0 < beta <= 1 <= alpha <= beta^e2 = {}, got alpha = {a}, beta = {b}",
                        b.powf(e.e2)
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Shared transform: `v = α u` on the image grid, diffusion and source
/// rescaled by `diff_scale` and `source_scale`.
#[allow(clippy::too_many_arguments)]
fn apply(
    u: &GridField,
    spec: &ProblemSpec,
    alpha: f64,
    tau: f64,
    beta: f64,
    diff_scale: f64,
    source_scale: f64,
    lambda0: f64,
) -> Result<(GridField, ProblemSpec), ScalingError> {
    if u.grid().len() != spec.grid.len() {
        return Err(GridError::LengthMismatch {
            expected: spec.grid.len(),
            got: u.grid().len(),
        }
        .into());
    }
    let grid = u.grid().image(tau, beta);
    let v = u.map(|x| alpha * x).relabeled(grid.clone())?;
    let map = PullBack {
        time_scale: tau,
        time_shift: 0.0,
        space_scale: beta,
        space_shift: vec![0.0; u.space().dim()],
    };
    let spec2 = ProblemSpec {
        p: spec.p,
        lambda: spec.lambda,
        lambda0,
        m: spec.m,
        epsilon: spec.epsilon * diff_scale,
        diffusion: spec.diffusion.clone(),
        source: spec.source.clone().transformed(source_scale, map.clone()),
        grid,
        initial: InitialData::Sampled(v.slice(0).to_vec()),
        boundary: spec.boundary.clone().transformed(alpha, map),
    };
    Ok((v, spec2))
}

/// `v = α u(α^(p−1) β^p t, β x)` with `A′ = α^(p−1) β^(p−2) A`,
/// `f′ = α^p β^p f`, and `Λ₀′ = α^(p−1) β^(p−2) Λ₀`.
pub fn scale_61(u: &GridField, spec: &ProblemSpec, params: ScaleParams) -> Result<(GridField, ProblemSpec), ScalingError> {
    if params.mode != ScaleMode::General {
        return Err(ScalingError::Parameter("scale_61 needs general parameters".into()));
    }
    params.validate(spec.p, spec.m, spec.dim(), None)?;
    let (a, b, p) = (params.alpha, params.beta, spec.p);
    let kappa = a.powf(p - 1.0) * b.powf(p - 2.0);
    apply(
        u,
        spec,
        a,
        params.time_scale(p, None),
        b,
        kappa,
        a.powf(p) * b.powf(p),
        kappa * spec.lambda0,
    )
}

/// `v = α u(β^e1 t, β x)` with `A′ = β^(e1−2) A` and `f′ = α β^e1 f`.
pub fn scale_62(
    u: &GridField,
    spec: &ProblemSpec,
    params: ScaleParams,
    exps: &ScalingExponents,
) -> Result<(GridField, ProblemSpec), ScalingError> {
    if params.mode != ScaleMode::Exponent {
        return Err(ScalingError::Parameter("scale_62 needs exponent-tied parameters".into()));
    }
    params.validate(spec.p, spec.m, spec.dim(), Some(exps))?;
    let (a, b) = (params.alpha, params.beta);
    apply(
        u,
        spec,
        a,
        b.powf(exps.e1),
        b,
        b.powf(exps.e1 - 2.0),
        a * b.powf(exps.e1),
        spec.lambda0,
    )
}

/// Moves `(t0, x0)` to the space-time origin.
pub fn translate(u: &GridField, spec: &ProblemSpec, t0: f64, x0: &[f64]) -> (GridField, ProblemSpec) {
    let v = u.translated(t0, x0);
    let map = PullBack {
        time_scale: 1.0,
        time_shift: t0,
        space_scale: 1.0,
        space_shift: x0.to_vec(),
    };
    let spec2 = ProblemSpec {
        source: spec.source.clone().transformed(1.0, map.clone()),
        boundary: spec.boundary.clone().transformed(1.0, map),
        initial: InitialData::Sampled(v.slice(0).to_vec()),
        grid: v.grid().clone(),
        ..spec.clone()
    };
    (v, spec2)
}

/// `∬ Λ⁻¹ |∇u|^p φ` with the quadrature and gradients of the weak residual.
pub fn hamiltonian_integral(u: &GridField, spec: &ProblemSpec, phi: &GridField) -> f64 {
    let grid = u.grid();
    let space = u.space();
    let mut total = 0.0;
    for k in 1..grid.steps() {
        let pk = phi.slice(k);
        if pk.iter().all(|&v| v == 0.0) {
            continue;
        }
        let g = gradient_of(space, u.slice(k));
        for c in 0..space.len() {
            if pk[c] != 0.0 {
                let g2: f64 = g.iter().map(|d| d[c] * d[c]).sum();
                total += g2.powf(spec.p / 2.0) / spec.lambda * pk[c];
            }
        }
    }
    total * grid.dt() * space.cell_volume()
}

/// Weak residual of the general image: `α β^(−n) R`.
pub fn predicted_residual_61(residual: f64, params: ScaleParams, n: usize) -> f64 {
    params.alpha * params.beta.powi(-(n as i32)) * residual
}

/// Weak residual of the exponent-tied image against the model Hamiltonian:
/// `α β^(−n) [R − (1 − κ) H]` with `κ = α^(p−1) β^(p−e1)` and
/// `H = ∬ Λ⁻¹|∇u|^p φ`.
pub fn predicted_residual_62(residual: f64, hamiltonian: f64, params: ScaleParams, exps: &ScalingExponents) -> f64 {
    let (a, b) = (params.alpha, params.beta);
    let kappa = a.powf(exps.p - 1.0) * b.powf(exps.p - exps.e1);
    a * b.powi(-(exps.n as i32)) * (residual - (1.0 - kappa) * hamiltonian)
}

/// `v_k = 2^k (v − 2) + 2`; requires `v ≤ 2`.
pub fn dg_level_transform(v: &GridField, k: u32) -> Result<GridField, ScalingError> {
    if let Some(x) = v.values().iter().find(|&&x| x > 2.0) {
        return Err(ScalingError::Hypothesis(format!("v reaches {x} > 2")));
    }
    let s = 2f64.powi(k as i32);
    Ok(v.map(|x| s * (x - 2.0) + 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{SpaceTimeGrid, SpatialGrid};
    use crate::problem::{BoundaryData, DiffusionSpec, SourceSpec};
    use approx::assert_relative_eq;

    fn spec(p: f64, m: f64) -> ProblemSpec {
        let space = SpatialGrid::centered(vec![64], 1.0 / 16.0).unwrap();
        ProblemSpec {
            p,
            lambda: 1.5,
            lambda0: 0.2,
            m,
            epsilon: 0.1,
            diffusion: DiffusionSpec::checkerboard(4, 1.0, 0.1),
            source: SourceSpec::RadialSingular {
                coefficient: 1.0,
                exponent: 0.25,
                center: Some(vec![0.3]),
            },
            grid: SpaceTimeGrid::new(space, 1.0 / 32.0, -1.0, 0.0).unwrap(),
            initial: InitialData::Sine {
                amplitude: 1.0,
                frequency: 1.0,
            },
            boundary: BoundaryData::Frozen,
        }
    }

    #[test]
    fn exponent_examples() {
        let e = compute_exponents(3.0, 2.0, 1).unwrap();
        assert_eq!((e.e1, e.e2), (2.5, -0.25));
        let e = compute_exponents(4.0, 2.0, 2).unwrap();
        assert_relative_eq!(e.e1, 3.0);
        assert_relative_eq!(e.e2, -1.0 / 3.0);
        assert!(compute_exponents(3.0, 1.5, 1).is_err());
    }

    #[test]
    fn general_example_is_valid() {
        let p = ScaleParams::general(0.5, 2.0);
        p.validate(3.0, 2.0, 1, None).unwrap();
        assert!(ScaleParams::general(0.5, 2.1).validate(3.0, 2.0, 1, None).is_err());
        // p(m - 1) = n leaves no admissible beta
        assert!(ScaleParams::general(0.5, 1.0).validate(3.0, 4.0 / 3.0, 1, None).is_err());
    }

    #[test]
    fn identity_parameters() {
        let s = spec(3.0, 2.0);
        let u = GridField::from_fn(s.grid.clone(), |t, x| x[0] * x[0] + t).unwrap();
        let (v, s2) = scale_61(&u, &s, ScaleParams::general(1.0, 1.0)).unwrap();
        assert_eq!(v.values(), u.values());
        assert_eq!(s2.epsilon, s.epsilon);
        assert_eq!(s2.lambda0, s.lambda0);
        let f = s.source.cell_values(s.space(), -0.5).unwrap();
        let f2 = s2.source.cell_values(s2.space(), -0.5).unwrap();
        for (a, b) in f.iter().zip(&f2) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
        let e = compute_exponents(3.0, 2.0, 1).unwrap();
        let (v, s2) = scale_62(&u, &s, ScaleParams::exponent(1.0, 1.0), &e).unwrap();
        assert_eq!(v.values(), u.values());
        assert_eq!(s2.epsilon, s.epsilon);
    }

    #[test]
    fn coefficient_norms_shrink() {
        let s = spec(3.0, 2.0);
        let u = GridField::constant(s.grid.clone(), 0.0);
        let f_norm = s.source_norm().unwrap();
        let a_norm = s.diffusion_norm().unwrap();
        let (_, s2) = scale_61(&u, &s, ScaleParams::general(1.5, 0.4)).unwrap();
        assert!(s2.source_norm().unwrap() <= f_norm * (1.0 + 1e-12));
        assert!(s2.diffusion_norm().unwrap() <= a_norm);
        assert!(s2.lambda0 <= s.lambda0);
        let e = compute_exponents(3.0, 2.0, 1).unwrap();
        let b: f64 = 0.5;
        let (_, s2) = scale_62(&u, &s, ScaleParams::exponent(b.powf(e.e2), b), &e).unwrap();
        assert!(s2.source_norm().unwrap() <= f_norm * (1.0 + 1e-12));
        assert!(s2.diffusion_norm().unwrap() <= a_norm);
    }

    #[test]
    fn composition() {
        let s = spec(3.0, 2.0);
        let u = GridField::from_fn(s.grid.clone(), |t, x| (2.0 * x[0]).sin() + t).unwrap();
        let (p1, p2) = (ScaleParams::general(1.2, 0.5), ScaleParams::general(1.1, 0.5));
        let (v1, s1) = scale_61(&u, &s, p1).unwrap();
        let (v2, s2) = scale_61(&v1, &s1, p2).unwrap();
        let (w, sw) = scale_61(&u, &s, ScaleParams::general(1.2 * 1.1, 0.25)).unwrap();
        for (a, b) in v2.values().iter().zip(w.values()) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
        assert_relative_eq!(s2.grid.dt(), sw.grid.dt(), max_relative = 1e-12);
        assert_relative_eq!(s2.grid.h(), sw.grid.h(), max_relative = 1e-12);
        assert_relative_eq!(s2.epsilon, sw.epsilon, max_relative = 1e-12);
        let t = sw.grid.time(7);
        let f1 = s2.source.cell_values(s2.space(), t).unwrap();
        let f2 = sw.source.cell_values(sw.space(), t).unwrap();
        for (a, b) in f1.iter().zip(&f2) {
            assert_relative_eq!(a, b, max_relative = 1e-9);
        }
    }

    #[test]
    fn level_transform() {
        let g = spec(3.0, 2.0).grid;
        let two = GridField::constant(g.clone(), 2.0);
        assert!(dg_level_transform(&two, 5).unwrap().values().iter().all(|&x| x == 2.0));
        let zero = GridField::constant(g.clone(), 0.0);
        assert!(dg_level_transform(&zero, 1).unwrap().values().iter().all(|&x| x == -2.0));
        assert!(dg_level_transform(&GridField::constant(g, 2.5), 1).is_err());
    }
}
