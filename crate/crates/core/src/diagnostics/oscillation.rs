//! Oscillation decay over shrinking cylinders and Hölder exponent fits.

use std::io::Write;

use super::{count_measure, DiagnosticsError};
use crate::grid::{cylinder_samples, GridField, ParabolicCylinder, SpaceTimeGrid};

/// Fewest samples a cylinder must hold for its oscillation to count.
pub const MIN_SAMPLES: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub struct OscLevel {
    pub k: usize,
    pub t_lo: f64,
    pub radius: f64,
    /// `max(τ₁^k, β₁^k)` with `τ₁ = α₁^(p−1) β₁^p`.
    pub scale: f64,
    pub osc: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaFit {
    pub gamma: f64,
    pub intercept: f64,
    /// RMS of the log residuals.
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillationProfile {
    pub alpha1: f64,
    pub beta1: f64,
    pub p: f64,
    pub levels: Vec<OscLevel>,
    pub fit: Option<GammaFit>,
    /// Requested depth was cut short for lack of samples.
    pub truncated: bool,
    /// Fewer than two levels with positive oscillation.
    pub degenerate: bool,
}

impl OscillationProfile {
    pub const HEADER: [&'static str; 8] = ["k", "t_lo", "radius", "scale", "osc", "samples", "gamma", "residual"];

    pub fn gamma(&self) -> Option<f64> {
        self.fit.map(|f| f.gamma)
    }

    /// One row per level, then a `fit` row carrying gamma and the residual.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DiagnosticsError> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::HEADER)?;
        for l in &self.levels {
            w.write_record([
                l.k.to_string(),
                l.t_lo.to_string(),
                l.radius.to_string(),
                l.scale.to_string(),
                l.osc.to_string(),
                l.samples.to_string(),
                String::new(),
                String::new(),
            ])?;
        }
        let (g, r) = match self.fit {
            Some(f) => (f.gamma.to_string(), f.residual.to_string()),
            None => ("nan".to_string(), "nan".to_string()),
        };
        w.write_record(["fit", "", "", "", "", "", &g, &r])?;
        w.flush()?;
        Ok(())
    }
}

/// Least-squares slope of `log osc` against `log scale`, over points with
/// positive oscillation.
pub fn fit_gamma(scales: &[f64], oscs: &[f64]) -> Result<GammaFit, DiagnosticsError> {
    let pts: Vec<(f64, f64)> = scales
        .iter()
        .zip(oscs)
        .filter(|(s, o)| **s > 0.0 && **o > 0.0)
        .map(|(s, o)| (s.ln(), o.ln()))
        .collect();
    if pts.len() < 2 {
        return Err(DiagnosticsError::Degenerate(format!(
            "{} level(s) with positive oscillation",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(DiagnosticsError::Degenerate("all scales coincide".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let gamma = sxy / sxx;
    let intercept = my - gamma * mx;
    let ss: f64 = pts
        .iter()
        .map(|p| (p.1 - intercept - gamma * p.0).powi(2))
        .sum();
    Ok(GammaFit {
        gamma,
        intercept,
        residual: (ss / n).sqrt(),
    })
}

/// Exponent implied by the iteration: `−log α₁ / log(α₁^(p−1) β₁^p)`.
pub fn theoretical_gamma(alpha1: f64, beta1: f64, p: f64) -> f64 {
    -alpha1.ln() / (alpha1.powf(p - 1.0) * beta1.powf(p)).ln()
}

/// Oscillation of `u` over `Q_k = [−τ₁^k, 0] × B_{β₁^k}` for `k = 0..=k_max`,
/// centered at the space-time origin.
pub fn oscillation_profile(
    u: &GridField,
    p: f64,
    alpha1: f64,
    beta1: f64,
    k_max: usize,
) -> Result<OscillationProfile, DiagnosticsError> {
    if !(alpha1 > 1.0) {
        return Err(DiagnosticsError::Parameter(format!("alpha1 must exceed 1, got {alpha1}")));
    }
    if !(beta1 > 0.0 && beta1 < 1.0) {
        return Err(DiagnosticsError::Parameter(format!("beta1 must lie in (0, 1), got {beta1}")));
    }
    let tau1 = alpha1.powf(p - 1.0) * beta1.powf(p);
    let n = u.space().dim();
    let mut levels = Vec::new();
    let mut truncated = false;
    for k in 0..=k_max {
        let t_lo = -tau1.powi(k as i32);
        let radius = beta1.powi(k as i32);
        let cyl = ParabolicCylinder::at_origin(n, t_lo, 0.0, radius);
        let (slices, cells) = cylinder_samples(u.grid(), &cyl);
        let samples = slices.len() * cells.len();
        if samples < MIN_SAMPLES {
            truncated = true;
            break;
        }
        let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
        for s in slices {
            let row = u.slice(s);
            for &c in &cells {
                hi = hi.max(row[c]);
                lo = lo.min(row[c]);
            }
        }
        levels.push(OscLevel {
            k,
            t_lo,
            radius,
            scale: tau1.powi(k as i32).max(radius),
            osc: hi - lo,
            samples,
        });
    }
    let scales: Vec<f64> = levels.iter().map(|l| l.scale).collect();
    let oscs: Vec<f64> = levels.iter().map(|l| l.osc).collect();
    let fit = fit_gamma(&scales, &oscs).ok();
    Ok(OscillationProfile {
        alpha1,
        beta1,
        p,
        levels,
        degenerate: fit.is_none(),
        fit,
        truncated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Majority {
    MostlyNegative,
    MostlyPositive,
}

/// Labels `u` by the share of `{u ≤ 0}` in `q_small` (ties count as mostly
/// negative) and rescales `q_small` onto the reference cylinder `[−4, 0] × B_2`,
/// reflecting time and negating in the mostly-positive branch. The result is
/// sampled on `target` by multilinear interpolation.
pub fn classify_majority(
    u: &GridField,
    q_small: &ParabolicCylinder,
    target: SpaceTimeGrid,
) -> Result<(Majority, GridField), DiagnosticsError> {
    let total = count_measure(u, q_small, |_| true);
    if total == 0.0 {
        return Err(DiagnosticsError::Degenerate(format!(
            "no samples of the field fall in {q_small:?}"
        )));
    }
    let nonpos = count_measure(u, q_small, |v| v <= 0.0);
    let label = if 2.0 * nonpos >= total {
        Majority::MostlyNegative
    } else {
        Majority::MostlyPositive
    };
    let s_t = (q_small.t_hi - q_small.t_lo) / 4.0;
    let s_x = q_small.radius / 2.0;
    let t_top = q_small.t_hi;
    let center = q_small.center.clone();
    let place = |x: &[f64]| -> Vec<f64> { x.iter().zip(&center).map(|(a, c)| c + s_x * a).collect() };
    let v = match label {
        Majority::MostlyNegative => u.resample(target, 1.0, 0.0, |t, x| (t_top + s_t * t, place(x)))?,
        Majority::MostlyPositive => {
            u.resample(target, -1.0, 0.0, |t, x| (t_top + s_t * (-4.0 - t), place(x)))?
        }
    };
    Ok((label, v))
}
