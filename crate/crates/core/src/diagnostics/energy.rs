//! Truncation energies and the three forms of the energy inequality.

use std::io::Write;

use super::{levelset_measure, CutoffField, DiagnosticsError, RadialCutoff};
use crate::grid::{sup_inf_on, upwind_magnitude_sq, GridField, ParabolicCylinder, SpaceTimeGrid};
use crate::problem::{m_conjugate, ProblemSpec, SourceSpec};

/// `x^e` on `{x > 0}` and 0 elsewhere, so that `0^0 = 0`.
#[inline]
fn pos_pow(x: f64, e: f64) -> f64 {
    if x > 0.0 {
        x.powf(e)
    } else {
        0.0
    }
}

/// Trapezoid weights for the slices in `[t_lo, t_hi]`.
fn time_weights(grid: &SpaceTimeGrid, t_lo: f64, t_hi: f64) -> Vec<(usize, f64)> {
    let r = grid.slices_in(t_lo, t_hi);
    if r.len() < 2 {
        return Vec::new();
    }
    let (first, last) = (r.start, r.end - 1);
    r.map(|k| {
        let w = if k == first || k == last { 0.5 } else { 1.0 };
        (k, w * grid.dt())
    })
    .collect()
}

/// Truncated slice `u* = (u - c)_+` and its squared upwind gradient.
fn truncated_slice(u: &GridField, k: usize, c: f64) -> (Vec<f64>, Vec<f64>) {
    let space = u.space();
    let star: Vec<f64> = u.slice(k).iter().map(|v| (v - c).max(0.0)).collect();
    let grad2 = (0..space.len())
        .map(|cell| upwind_magnitude_sq(space, &star, cell))
        .collect();
    (star, grad2)
}

/// The two terms `sup_t ∫φ² u*^(b+1)` and `∬ φ² u*^b |∇u*|^p` over `[t_from, t_to]`.
pub fn energy_terms(u: &GridField, c: f64, b: f64, p: f64, phi: &[f64], t_from: f64, t_to: f64) -> (f64, f64) {
    let grid = u.grid();
    let vol = u.space().cell_volume();
    let mut sup = 0.0_f64;
    for k in grid.slices_in(t_from, t_to) {
        let s = u.slice(k);
        let v: f64 = s
            .iter()
            .zip(phi)
            .map(|(&x, &f)| f * f * pos_pow(x - c, b + 1.0))
            .sum();
        sup = sup.max(v * vol);
    }
    let mut grad_term = 0.0;
    for (k, w) in time_weights(grid, t_from, t_to) {
        let (star, g2) = truncated_slice(u, k, c);
        let v: f64 = (0..star.len())
            .map(|i| phi[i] * phi[i] * pos_pow(star[i], b) * g2[i].powf(p / 2.0))
            .sum();
        grad_term += w * v * vol;
    }
    (sup, grad_term)
}

/// Left side of the energy inequality for `u* = (u - c)_+`.
pub fn energy(u: &GridField, c: f64, b: f64, p: f64, phi: &[f64], t_from: f64, t_to: f64) -> f64 {
    let (a, g) = energy_terms(u, c, b, p, phi, t_from, t_to);
    a + g
}

/// Times `S < T <= top` of the energy inequality; the paper's `0` is `top`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyWindow {
    pub s: f64,
    pub t: f64,
    pub top: f64,
}

impl EnergyWindow {
    pub fn new(s: f64, t: f64, top: f64) -> Result<Self, DiagnosticsError> {
        if !(s < t && t <= top) {
            return Err(DiagnosticsError::Parameter(format!(
                "need S < T <= top, got ({s}, {t}, {top})"
            )));
        }
        Ok(Self { s, t, top })
    }
}

/// Raw sides of the three forms. No constant `C(Λ, b)` is applied.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergySides {
    pub lhs: f64,
    pub rhs6: f64,
    pub rhs7: Option<f64>,
    pub form8: Option<Form8Sides>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Form8Sides {
    /// `∫φ²u*^(b+1)(top) − ∫φ²u*^(b+1)(S)`.
    pub bracket: f64,
    pub gradient_term: f64,
    pub rhs: f64,
}

/// Evaluates the energy-inequality forms for `u* = (u - c)_+` with a
/// time-independent cutoff. Forms (7)/(8) are computed when `alt_forms` is set
/// and require `b > σ = (1 - 2/p)⁻¹`.
pub fn energy_inequality_sides(
    u: &GridField,
    spec: &ProblemSpec,
    c: f64,
    b: f64,
    phi: &CutoffField,
    window: EnergyWindow,
    alt_forms: bool,
) -> Result<EnergySides, DiagnosticsError> {
    let sigma = 1.0 / (1.0 - 2.0 / spec.p);
    if alt_forms && b <= sigma {
        return Err(DiagnosticsError::ExponentTooSmall { b, sigma });
    }
    let m_star = m_conjugate(spec.m)?;
    let source = if alt_forms { Some(&spec.source) } else { None };
    sides(u, spec.p, m_star, c, b, phi, window, source)
}

#[allow(clippy::too_many_arguments)]
fn sides(
    u: &GridField,
    p: f64,
    m_star: f64,
    c: f64,
    b: f64,
    phi: &CutoffField,
    window: EnergyWindow,
    source: Option<&SourceSpec>,
) -> Result<EnergySides, DiagnosticsError> {
    let grid = u.grid();
    let space = u.space();
    let vol = space.cell_volume();
    let sigma = 1.0 / (1.0 - 2.0 / p);
    let lhs = energy(u, c, b, p, &phi.values, window.t, window.top);

    let (mut i1, mut igrad, mut im, mut isig) = (0.0, 0.0, 0.0, 0.0);
    let (mut f_term, mut phi_term, mut sig_term, mut grad_term) = (0.0, 0.0, 0.0, 0.0);
    for (k, w) in time_weights(grid, window.s, window.top) {
        let (star, g2) = truncated_slice(u, k, c);
        let f = match source {
            Some(src) => Some(src.cell_values(space, grid.time(k))?),
            None => None,
        };
        for i in 0..star.len() {
            let ph = phi.values[i];
            if ph <= 0.0 || star[i] <= 0.0 {
                continue;
            }
            let us = star[i];
            i1 += w * us.powf(b + 1.0);
            igrad += w * us.powf(b - 1.0) * g2[i];
            im += w * us.powf(b * m_star);
            if let Some(f) = &f {
                let ph2 = ph * ph;
                isig += w * us.powf(b - sigma);
                f_term += w * ph2 * us.powf(b) * f[i];
                phi_term += w * us.powf(b + 1.0) * phi.grad_norm[i] * phi.grad_norm[i];
                sig_term += w * ph2 * us.powf(b - sigma);
                grad_term += w * ph2 * us.powf(b) * g2[i].powf(p / 2.0);
            }
        }
    }
    let pre = (1.0 + 1.0 / (window.t - window.s)) * (phi.sup().powi(2) + phi.grad_sup().powi(2));
    let lm = (im * vol).powf(1.0 / m_star);
    let rhs6 = pre * (i1 * vol + igrad * vol + lm);
    let (rhs7, form8) = if source.is_some() {
        let slice_mass = |k: usize| -> f64 {
            u.slice(k)
                .iter()
                .zip(&phi.values)
                .map(|(&x, &f)| f * f * pos_pow(x - c, b + 1.0))
                .sum::<f64>()
                * vol
        };
        let r = grid.slices_in(window.s, window.top);
        let bracket = if r.is_empty() {
            0.0
        } else {
            slice_mass(r.end - 1) - slice_mass(r.start)
        };
        (
            Some(pre * (i1 * vol + isig * vol + lm)),
            Some(Form8Sides {
                bracket,
                gradient_term: grad_term * vol,
                rhs: (f_term + phi_term + sig_term) * vol,
            }),
        )
    } else {
        (None, None)
    };
    Ok(EnergySides {
        lhs,
        rhs6,
        rhs7,
        form8,
    })
}

/// Heights `C_k = 1/2 − 2^(−k−1)`, radii `1 + 2^(−k)`, times `T_k = −1 − 2^(−k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncationLadder {
    pub k_max: usize,
}

impl TruncationLadder {
    pub fn new(k_max: usize) -> Self {
        Self { k_max }
    }

    pub fn height(&self, k: usize) -> f64 {
        0.5 - 0.5f64.powi(k as i32 + 1)
    }

    pub fn radius(&self, k: usize) -> f64 {
        1.0 + 0.5f64.powi(k as i32)
    }

    pub fn time(&self, k: usize) -> f64 {
        -1.0 - 0.5f64.powi(k as i32)
    }

    pub fn gradient_bound(&self, k: usize) -> f64 {
        4.0 * 2f64.powi(k as i32)
    }

    /// `φ_k`: support `B^k`, plateau `B^(k+1)`, gradient bound `2^(k+2)`.
    pub fn cutoff(&self, k: usize, dim: usize) -> Result<RadialCutoff, DiagnosticsError> {
        RadialCutoff::new(self.radius(k), self.radius(k + 1), self.gradient_bound(k), dim)
    }
}

/// Exponents of the first De Giorgi step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DG1Config {
    pub n: usize,
    pub p: f64,
    pub m: f64,
    pub b: f64,
    pub beta: f64,
    pub p_prime: f64,
    pub q: f64,
    pub theta: f64,
    pub sigma: f64,
    pub m_star: f64,
    /// Smallness threshold for `|{u > 0} ∩ Q̄₂|`.
    pub delta0: f64,
}

impl DG1Config {
    /// `β = 1, p' = p` for `n = 1`; otherwise β is the midpoint of the
    /// admissible window `0 < 1/n − β/2 < 1/p` intersected with `(0, 1]`.
    pub fn new(n: usize, p: f64, m: f64, delta0: f64) -> Result<Self, DiagnosticsError> {
        if !(p > 2.0) {
            return Err(DiagnosticsError::Parameter(format!("p must exceed 2, got {p}")));
        }
        let nf = n as f64;
        let (beta, p_prime) = if n == 1 {
            (1.0, p)
        } else {
            let lo = (2.0 / nf - 2.0 / p).max(0.0);
            let hi = (2.0 / nf).min(1.0);
            if !(lo < hi) {
                return Err(DiagnosticsError::Parameter(format!(
                    "empty beta window ({lo}, {hi}) for n = {n}, p = {p}"
                )));
            }
            let beta = 0.5 * (lo + hi);
            (beta, 1.0 / (beta / 2.0 + 1.0 / p - 1.0 / nf))
        };
        let q = p + (1.0 - p / p_prime) * 2.0 / (1.0 + beta);
        Ok(Self {
            n,
            p,
            m,
            b: 1.0,
            beta,
            p_prime,
            q,
            theta: p / q,
            sigma: 1.0 / (1.0 - 2.0 / p),
            m_star: m_conjugate(m)?,
            delta0,
        })
    }

    pub fn window_holds(&self) -> bool {
        if self.n == 1 {
            return true;
        }
        let w = 1.0 / self.n as f64 - self.beta / 2.0;
        0.0 < w && w < 1.0 / self.p
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyLevel {
    pub k: usize,
    pub height: f64,
    /// `|{u_k > 0} ∩ [T_k, 0] × B^k|`.
    pub measure: f64,
    pub energy: f64,
    pub lhs: f64,
    pub rhs6: f64,
    pub rhs7: Option<f64>,
    pub rhs8: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub levels: Vec<EnergyLevel>,
    pub sup_q1: f64,
    /// `sup_{Q₁} u ≤ 1/2`.
    pub conclusion_holds: bool,
    pub positive_measure: f64,
    pub delta0: f64,
    pub measure_hypothesis_holds: bool,
}

impl EnergyReport {
    pub const HEADER: [&'static str; 8] = ["k", "C_k", "measure", "E_k", "lhs", "rhs6", "rhs7", "rhs8"];

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DiagnosticsError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::HEADER)?;
        for l in &self.levels {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            w.write_record([
                l.k.to_string(),
                l.height.to_string(),
                l.measure.to_string(),
                l.energy.to_string(),
                l.lhs.to_string(),
                l.rhs6.to_string(),
                opt(l.rhs7),
                opt(l.rhs8),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Energies `E_k` of the truncations `(u − C_k)_+` on the ladder. The field
/// must satisfy `u ≤ 1` on `Q̄₂`.
pub fn dg1_iterate(u: &GridField, cfg: &DG1Config, ladder: &TruncationLadder) -> Result<EnergyReport, DiagnosticsError> {
    let n = u.space().dim();
    let qbar2 = ParabolicCylinder::q_bar2(n);
    let (sup, _) = sup_inf_on(u, &qbar2)?;
    if sup > 1.0 {
        return Err(DiagnosticsError::Hypothesis(format!(
            "u reaches {sup} > 1 on Q̄₂"
        )));
    }
    let mut levels = Vec::with_capacity(ladder.k_max + 1);
    for k in 0..=ladder.k_max {
        let c = ladder.height(k);
        let phi = ladder.cutoff(k, n)?.sample(u.space());
        let window = EnergyWindow::new(ladder.time(k), ladder.time(k + 1), 0.0)?;
        let s = sides(u, cfg.p, cfg.m_star, c, cfg.b, &phi, window, None)?;
        let cyl = ParabolicCylinder::at_origin(n, ladder.time(k), 0.0, ladder.radius(k));
        levels.push(EnergyLevel {
            k,
            height: c,
            measure: levelset_measure(u, c, &cyl),
            energy: s.lhs,
            lhs: s.lhs,
            rhs6: s.rhs6,
            rhs7: s.rhs7,
            rhs8: s.form8.map(|f| f.rhs),
        });
    }
    let (sup_q1, _) = sup_inf_on(u, &ParabolicCylinder::q1(n))?;
    let positive_measure = levelset_measure(u, 0.0, &qbar2);
    Ok(EnergyReport {
        levels,
        sup_q1,
        conclusion_holds: sup_q1 <= 0.5,
        positive_measure,
        delta0: cfg.delta0,
        measure_hypothesis_holds: positive_measure <= cfg.delta0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::SpatialGrid;
    use approx::assert_relative_eq;

    fn grid(h: f64, dt: f64) -> SpaceTimeGrid {
        let cells = (6.0 / h).round() as usize;
        let space = SpatialGrid::centered(vec![cells], h).unwrap();
        SpaceTimeGrid::new(space, dt, -2.0, 0.0).unwrap()
    }

    #[test]
    fn ladder_values() {
        let l = TruncationLadder::new(5);
        assert_eq!(l.height(0), 0.0);
        assert_eq!(l.time(0), -2.0);
        assert_eq!(l.radius(0), 2.0);
        for k in 0..10 {
            assert!(l.height(k + 1) > l.height(k) && l.height(k) < 0.5);
            assert!(l.time(k + 1) > l.time(k) && l.time(k) < -1.0);
            assert!(l.radius(k + 1) < l.radius(k) && l.radius(k) > 1.0);
            assert!(l.cutoff(k, 1).is_ok());
        }
    }

    #[test]
    fn energy_of_constant_is_cutoff_mass() {
        let g = grid(1.0 / 256.0, 1.0 / 16.0);
        let phi = RadialCutoff::new(2.0, 1.5, 4.0, 1).unwrap().sample(g.space());
        let one = GridField::constant(g.clone(), 1.0);
        let (a, b) = energy_terms(&one, 0.0, 1.0, 3.0, &phi.values, -1.0, 0.0);
        assert_eq!(b, 0.0);
        // ∫φ² = 2 (1.5 + 0.5 ∫_0^1 (1 - S)^2) and ∫_0^1 (1-S)^2 = 181/462
        let exact = 2.0 * (1.5 + 0.5 * 181.0 / 462.0);
        assert!((a - exact).abs() < 1e-4, "{a} vs {exact}");
        let below = GridField::constant(g, -0.5);
        assert_eq!(energy(&below, 0.0, 1.0, 3.0, &phi.values, -1.0, 0.0), 0.0);
    }

    #[test]
    fn energy_homogeneity() {
        let g = grid(1.0 / 64.0, 1.0 / 16.0);
        let phi = RadialCutoff::new(2.0, 1.5, 4.0, 1).unwrap().sample(g.space());
        let u = GridField::from_fn(g, |t, x| 1.0 + (x[0] * 3.0).sin().powi(2) + 0.1 * t).unwrap();
        let c = 0.25;
        let doubled = u.map(|v| c + 2.0 * (v - c));
        let (a1, g1) = energy_terms(&u, c, 1.5, 3.0, &phi.values, -1.0, 0.0);
        let (a2, g2) = energy_terms(&doubled, c, 1.5, 3.0, &phi.values, -1.0, 0.0);
        assert_relative_eq!(a2, 2f64.powf(2.5) * a1, max_relative = 1e-12);
        assert_relative_eq!(g2, 2f64.powf(4.5) * g1, max_relative = 1e-12);
    }

    #[test]
    fn sides_vanish_below_level_and_sigma_guard() {
        let g = grid(1.0 / 32.0, 1.0 / 8.0);
        let space = g.space().clone();
        let spec = ProblemSpec {
            p: 4.0,
            lambda: 1.0,
            lambda0: 0.0,
            m: 2.0,
            epsilon: 0.0,
            diffusion: crate::problem::DiffusionSpec::Scalar,
            source: SourceSpec::Constant { value: 0.5 },
            grid: g.clone(),
            initial: crate::problem::InitialData::Constant { value: 0.0 },
            boundary: crate::problem::BoundaryData::Frozen,
        };
        let phi = RadialCutoff::new(2.0, 1.5, 4.0, 1).unwrap().sample(&space);
        let w = EnergyWindow::new(-2.0, -1.0, 0.0).unwrap();
        let low = GridField::constant(g.clone(), -1.0);
        let s = energy_inequality_sides(&low, &spec, 0.0, 3.0, &phi, w, true).unwrap();
        assert_eq!(s.lhs, 0.0);
        assert_eq!(s.rhs6, 0.0);
        assert_eq!(s.rhs7, Some(0.0));
        let f8 = s.form8.unwrap();
        assert_eq!((f8.bracket, f8.gradient_term, f8.rhs), (0.0, 0.0, 0.0));
        // p = 4 gives σ = 2, so b = 1 admits only form (6)
        assert!(matches!(
            energy_inequality_sides(&low, &spec, 0.0, 1.0, &phi, w, true),
            Err(DiagnosticsError::ExponentTooSmall { .. })
        ));
        let s = energy_inequality_sides(&low, &spec, 0.0, 1.0, &phi, w, false).unwrap();
        assert!(s.rhs7.is_none() && s.form8.is_none());
    }

    #[test]
    fn dg1_identities() {
        let g = grid(1.0 / 32.0, 1.0 / 16.0);
        let cfg = DG1Config::new(1, 3.0, 2.0, 0.1).unwrap();
        assert_eq!((cfg.beta, cfg.p_prime, cfg.q), (1.0, 3.0, 3.0));
        assert_relative_eq!((1.0 + cfg.beta) * cfg.q, 2.0 * cfg.p);
        let l = TruncationLadder::new(4);
        let neg = dg1_iterate(&GridField::constant(g.clone(), -1.0), &cfg, &l).unwrap();
        assert!(neg.levels.iter().all(|v| v.energy == 0.0));
        assert!(neg.conclusion_holds);
        let one = dg1_iterate(&GridField::constant(g.clone(), 1.0), &cfg, &l).unwrap();
        assert!(one.levels.iter().all(|v| v.energy > 0.0));
        assert!(!one.measure_hypothesis_holds);
        assert!(dg1_iterate(&GridField::constant(g, 1.5), &cfg, &l).is_err());

        let mut buf = Vec::new();
        one.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("k,C_k,measure,E_k,lhs,rhs6,rhs7,rhs8\n"));
        assert_eq!(text.lines().count(), 6);
    }

    #[test]
    fn dg1_config_in_higher_dimensions() {
        for (n, p) in [(2, 3.0), (3, 4.0), (2, 10.0)] {
            let cfg = DG1Config::new(n, p, 3.0, 0.1).unwrap();
            assert!(cfg.window_holds());
            assert_relative_eq!(
                (1.0 + cfg.beta) * cfg.q,
                p + 2.0 * p / n as f64,
                max_relative = 1e-12
            );
        }
    }
}
