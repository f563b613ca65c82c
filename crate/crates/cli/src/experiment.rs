//! Sweep execution: solve each point, normalize around each center, and run
//! the oscillation and De Giorgi diagnostics.

use std::collections::BTreeMap;

use hjdg_core::barrier::{k0_search, BumpProfile};
use hjdg_core::diagnostics::{
    classify_majority, dg1_iterate, interstitial_measure, k0_levels, oscillation_profile,
    theoretical_gamma, DG1Config, EnergyReport, Majority, OscillationProfile, TruncationLadder,
};
use hjdg_core::grid::{unit_ball_volume, GridField, ParabolicCylinder, SpaceTimeGrid, SpatialGrid};
use hjdg_core::problem::ProblemSpec;
use hjdg_core::scaling::{compute_exponents, dg_level_transform, scale_61, translate, ScaleParams};
use hjdg_core::solver::{solve, SchemeConfig, SolveStats};
use rayon::prelude::*;

use crate::plan::{ExperimentPlan, SweepPoint};
use crate::CliError;

/// Why a sweep row has no result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ErrorCode {
    Hypothesis,
    Solver,
    Normalization,
    Diagnostics,
}

impl ErrorCode {
    pub fn as_str(&self) -> &'static str {
        match self {
            ErrorCode::Hypothesis => "hypothesis",
            ErrorCode::Solver => "solver",
            ErrorCode::Normalization => "normalization",
            ErrorCode::Diagnostics => "diagnostics",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    pub code: ErrorCode,
    pub message: String,
}

impl RowError {
    fn new(code: ErrorCode, e: impl std::fmt::Display) -> Self {
        Self {
            code,
            message: e.to_string(),
        }
    }
}

/// `w(t, x) = α_w ū(t0 + α_w^(p−1) β_w^p t, x0 + β_w x)` with `ū = u + Λ t`.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalization {
    pub sup_norm: f64,
    pub alpha_w: f64,
    pub beta_w: f64,
    pub tau_w: f64,
    pub lookback: f64,
    pub rho: f64,
}

/// Rescales the solved field around `(t_end, center)` so that it lives on
/// `Q₃` with `|w| ≤ 2`, picking the largest admissible `β_w`.
pub fn normalize(
    u: &GridField,
    spec: &ProblemSpec,
    center: &[f64],
    lookback: f64,
    lambda_star: f64,
    k0: f64,
) -> Result<(GridField, ProblemSpec, Normalization), CliError> {
    let p = spec.p;
    let space = spec.space();
    let big_lambda = spec.lambda;
    let ubar = u.map_with_coords(|t, _, v| v + big_lambda * t);
    let shifted = spec.shifted_by_time(big_lambda);
    let sup_norm = ubar.sup_norm();
    let alpha_w = if sup_norm > 0.0 { 2.0 / sup_norm } else { 1.0 };
    let rho = (0..space.dim())
        .map(|a| {
            let (lo, hi) = space.bounds(a);
            (center[a] - lo).min(hi - center[a])
        })
        .fold(f64::INFINITY, f64::min);
    if !(rho > 0.0) {
        return Err(CliError::Plan(format!("center {center:?} lies outside the domain")));
    }
    let t0 = spec.grid.t_end();
    let lookback = lookback.min(t0 - spec.grid.t_start());
    let mut beta_w = (rho / 3.0)
        .min((lookback / (4.0 * alpha_w.powf(p - 1.0))).powf(1.0 / p))
        .min(ScaleParams::general_beta_bound(alpha_w, p, spec.m, spec.dim())?);
    if spec.lambda0 > 0.0 {
        let cap = lambda_star * lambda_star * k0 / (alpha_w.powf(p - 1.0) * spec.lambda0);
        beta_w = beta_w.min(cap.powf(1.0 / (p - 2.0)));
    }
    // stay strictly inside every constraint
    beta_w *= 1.0 - 1e-9;
    let (ut, st) = translate(&ubar, &shifted, t0, center);
    let params = ScaleParams::general(alpha_w, beta_w);
    let (w, ws) = scale_61(&ut, &st, params)?;
    let norm = Normalization {
        sup_norm,
        alpha_w,
        beta_w,
        tau_w: params.time_scale(p, None),
        lookback,
        rho,
    };
    Ok((w, ws, norm))
}

/// Solver summary carried into reports (wall time excluded for determinism).
#[derive(Debug, Clone, PartialEq)]
pub struct StatsSummary {
    pub substeps: usize,
    pub dt_min: f64,
    pub dt_max: f64,
    pub max_gradient: f64,
    pub monotone: bool,
    pub grad_lp_norm: f64,
}

impl From<&SolveStats> for StatsSummary {
    fn from(s: &SolveStats) -> Self {
        Self {
            substeps: s.substeps,
            dt_min: s.dt_min,
            dt_max: s.dt_max,
            max_gradient: s.max_gradient,
            monotone: s.monotone,
            grad_lp_norm: s.grad_lp_norm,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointInfo {
    pub point: usize,
    pub center: Vec<f64>,
    pub epsilon: f64,
    pub roughness: String,
    pub strength: f64,
    pub refinement: usize,
    pub probe: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderRow {
    pub info: PointInfo,
    pub error: Option<RowError>,
    pub normalization: Option<Normalization>,
    pub profile: Option<OscillationProfile>,
    pub stats: Option<StatsSummary>,
    pub metadata: Option<String>,
}

impl HolderRow {
    pub fn gamma(&self) -> Option<f64> {
        self.profile.as_ref().and_then(|p| p.gamma())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HolderSummary {
    pub gamma_min: Option<f64>,
    pub gamma_max: Option<f64>,
    /// Worst `max/min` gamma along the ε axis with the other axes fixed.
    pub eps_ratio: Option<f64>,
    /// Worst `max/min` gamma along the roughness axis.
    pub roughness_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderReport {
    pub alpha1: f64,
    pub beta1: f64,
    pub theoretical_gamma: Option<f64>,
    pub rows: Vec<HolderRow>,
    pub summary: HolderSummary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LadderLevel {
    pub k: usize,
    pub below: f64,
    pub between: f64,
    pub above: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgRow {
    pub info: PointInfo,
    pub error: Option<RowError>,
    pub majority: Option<Majority>,
    pub k0: usize,
    pub ladder: Vec<LadderLevel>,
    /// First ladder level with `|{v_k ≥ 1} ∩ Q̄₂| ≤ δ₀`.
    pub first_small: Option<usize>,
    pub energy: Option<EnergyReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DgReport {
    pub delta0: f64,
    pub mu0: f64,
    pub rows: Vec<DgRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub holder: Option<HolderReport>,
    pub dg: Option<DgReport>,
}

impl SweepReport {
    /// Most severe error code over all rows.
    pub fn worst_error(&self) -> Option<ErrorCode> {
        let h = self.holder.iter().flat_map(|r| r.rows.iter().filter_map(|x| x.error.as_ref()));
        let d = self.dg.iter().flat_map(|r| r.rows.iter().filter_map(|x| x.error.as_ref()));
        let codes: Vec<ErrorCode> = h.chain(d).map(|e| e.code).collect();
        if codes.contains(&ErrorCode::Solver) {
            Some(ErrorCode::Solver)
        } else {
            codes.into_iter().min()
        }
    }
}

/// Reference-cylinder grid for the majority rescaling.
fn dg_target_grid(n: usize) -> Result<SpaceTimeGrid, CliError> {
    let cells = if n == 1 { 384 } else { 96 };
    let space = SpatialGrid::centered(vec![cells; n], 6.0 / cells as f64)?;
    Ok(SpaceTimeGrid::new(space, 1.0 / 16.0, -4.0, 0.0)?)
}

fn q2_measure(n: usize) -> f64 {
    4.0 * unit_ball_volume(n) * 2f64.powi(n as i32)
}

struct PointOutcome {
    holder: Vec<HolderRow>,
    dg: Vec<DgRow>,
}

struct Knobs {
    alpha1: f64,
    beta1: f64,
    k0: Option<f64>,
    lambda_star: Option<f64>,
    mu0: Option<f64>,
}

fn run_point(plan: &ExperimentPlan, point: &SweepPoint, knobs: &Knobs) -> PointOutcome {
    let base_info = |center: Vec<f64>, probe: bool| PointInfo {
        point: point.index,
        center,
        epsilon: point.epsilon,
        roughness: plan.roughness_label(point),
        strength: point.strength,
        refinement: point.refinement,
        probe,
    };
    let flags = plan.diagnostics;
    let fail = |info: PointInfo, err: RowError| PointOutcome {
        holder: if flags.holder {
            vec![HolderRow {
                info: info.clone(),
                error: Some(err.clone()),
                normalization: None,
                profile: None,
                stats: None,
                metadata: None,
            }]
        } else {
            Vec::new()
        },
        dg: if flags.dg {
            vec![DgRow {
                info,
                error: Some(err),
                majority: None,
                k0: 0,
                ladder: Vec::new(),
                first_small: None,
                energy: None,
            }]
        } else {
            Vec::new()
        },
    };

    let (spec, violations) = match plan.build(point) {
        Ok(x) => x,
        Err(e) => return fail(base_info(Vec::new(), false), RowError::new(ErrorCode::Hypothesis, e)),
    };
    let probe = !violations.is_empty();
    if probe && !plan.allow_probes {
        return fail(
            base_info(Vec::new(), false),
            RowError::new(ErrorCode::Hypothesis, violations.join("; ")),
        );
    }
    let mut cfg = SchemeConfig::default();
    if let Some(c) = plan.cfl_safety {
        cfg.cfl_safety = c;
    }
    let (u, stats) = match solve(&spec, cfg) {
        Ok(x) => x,
        Err(e) => return fail(base_info(Vec::new(), probe), RowError::new(ErrorCode::Solver, e)),
    };
    let k0 = knobs.k0.unwrap_or(0.0);
    let lambda_star = knobs.lambda_star.unwrap_or(k0);
    let lookback = plan
        .lookback
        .unwrap_or((spec.grid.t_end() - spec.grid.t_start()) / 3.0);
    let n = spec.dim();

    let mut out = PointOutcome {
        holder: Vec::new(),
        dg: Vec::new(),
    };
    for center in plan.centers(&spec) {
        let info = base_info(center.clone(), probe);
        let normalized = normalize(&u, &spec, &center, lookback, lambda_star, k0);
        let (w, norm) = match normalized {
            Ok((w, _, norm)) => (Some(w), Some(norm)),
            Err(e) => {
                let err = RowError::new(ErrorCode::Normalization, e);
                let f = fail(info, err);
                out.holder.extend(f.holder);
                out.dg.extend(f.dg);
                continue;
            }
        };
        let w = w.expect("normalized field");
        if flags.holder {
            let mut row = HolderRow {
                info: info.clone(),
                error: None,
                normalization: norm.clone(),
                profile: None,
                stats: Some(StatsSummary::from(&stats)),
                metadata: Some(deterministic_metadata(&stats)),
            };
            match oscillation_profile(&w, spec.p, knobs.alpha1, knobs.beta1, plan.k_max) {
                Ok(p) => row.profile = Some(p),
                Err(e) => row.error = Some(RowError::new(ErrorCode::Diagnostics, e)),
            }
            out.holder.push(row);
        }
        if flags.dg {
            out.dg.push(dg_row(info, &w, &spec, plan, knobs.mu0.unwrap_or(q2_measure(n))));
        }
    }
    out
}

fn dg_row(info: PointInfo, w: &GridField, spec: &ProblemSpec, plan: &ExperimentPlan, mu0: f64) -> DgRow {
    let mut row = DgRow {
        info,
        error: None,
        majority: None,
        k0: 0,
        ladder: Vec::new(),
        first_small: None,
        energy: None,
    };
    let n = spec.dim();
    let result = (|| -> Result<(), CliError> {
        let exps = compute_exponents(spec.p, spec.m, n)?;
        let k0 = k0_levels(mu0, q2_measure(n))?;
        row.k0 = k0;
        let s_t = 2f64.powf(k0 as f64 * exps.e1 / exps.e2);
        let s_x = 2f64.powf(k0 as f64 / exps.e2);
        let q_small = ParabolicCylinder::at_origin(n, -4.0 * s_t, 0.0, 2.0 * s_x);
        let (label, v) = classify_majority(w, &q_small, dg_target_grid(n)?)?;
        row.majority = Some(label);
        let mut last = v.clone();
        for k in 0..=k0 {
            let vk = dg_level_transform(&v, k as u32)?;
            let (below, between, above) = interstitial_measure(&vk);
            if row.first_small.is_none() && above <= plan.delta0 {
                row.first_small = Some(k);
            }
            row.ladder.push(LadderLevel {
                k,
                below,
                between,
                above,
            });
            last = vk;
        }
        let cfg = DG1Config::new(n, spec.p, spec.m, plan.delta0)?;
        let shifted = last.map(|x| x - 1.0);
        row.energy = Some(dg1_iterate(&shifted, &cfg, &TruncationLadder::new(plan.dg_levels))?);
        Ok(())
    })();
    if let Err(e) = result {
        row.error = Some(RowError::new(ErrorCode::Diagnostics, e));
    }
    row
}

/// Solver metadata without the wall-clock line, so reruns compare equal.
fn deterministic_metadata(stats: &SolveStats) -> String {
    stats
        .to_metadata()
        .lines()
        .filter(|l| !l.starts_with("wall_seconds="))
        .map(|l| format!("{l}\n"))
        .collect()
}

/// Worst `max/min` of gamma within groups that differ only along one axis.
fn axis_ratio(rows: &[HolderRow], key: impl Fn(&PointInfo) -> String) -> Option<f64> {
    let mut groups: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in rows {
        let usable = r.error.is_none() && r.profile.as_ref().is_some_and(|p| !p.degenerate);
        if let (true, Some(g)) = (usable, r.gamma()) {
            groups.entry(key(&r.info)).or_default().push(g);
        }
    }
    let mut worst: Option<f64> = None;
    for g in groups.values().filter(|g| g.len() >= 2) {
        let max = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = g.iter().cloned().fold(f64::INFINITY, f64::min);
        let ratio = if min > 0.0 { max / min } else { f64::INFINITY };
        worst = Some(worst.map_or(ratio, |w| w.max(ratio)));
    }
    worst
}

fn summarize(rows: &[HolderRow]) -> HolderSummary {
    let gammas: Vec<f64> = rows
        .iter()
        .filter(|r| r.error.is_none() && r.profile.as_ref().is_some_and(|p| !p.degenerate))
        .filter_map(|r| r.gamma())
        .collect();
    let fmt_center = |c: &[f64]| format!("{c:?}");
    HolderSummary {
        gamma_min: gammas.iter().cloned().reduce(f64::min),
        gamma_max: gammas.iter().cloned().reduce(f64::max),
        eps_ratio: axis_ratio(rows, |i| {
            format!("{}|{}|{}|{}", i.roughness, i.strength, i.refinement, fmt_center(&i.center))
        }),
        roughness_ratio: axis_ratio(rows, |i| {
            format!("{}|{}|{}|{}", i.epsilon, i.strength, i.refinement, fmt_center(&i.center))
        }),
    }
}

/// Runs every sweep point with the diagnostics selected in the plan. Failing
/// points produce rows with an error code; the sweep always completes.
pub fn run_sweep(plan: &ExperimentPlan) -> Result<SweepReport, CliError> {
    let points = plan.points();
    let n = plan.base.n;
    let k0 = k0_search(plan.base.lambda, plan.base.p, n, &BumpProfile::default()).ok();
    let knobs = Knobs {
        alpha1: plan.alpha1,
        beta1: plan.beta1(),
        k0,
        lambda_star: plan.lambda_star,
        mu0: plan.mu0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(plan.workers.max(1))
        .build()
        .map_err(|e| CliError::Plan(e.to_string()))?;
    let outcomes: Vec<PointOutcome> =
        pool.install(|| points.par_iter().map(|pt| run_point(plan, pt, &knobs)).collect());
    let mut holder_rows = Vec::new();
    let mut dg_rows = Vec::new();
    for o in outcomes {
        holder_rows.extend(o.holder);
        dg_rows.extend(o.dg);
    }
    let holder = plan.diagnostics.holder.then(|| HolderReport {
        alpha1: knobs.alpha1,
        beta1: knobs.beta1,
        theoretical_gamma: Some(theoretical_gamma(knobs.alpha1, knobs.beta1, plan.base.p)),
        summary: summarize(&holder_rows),
        rows: holder_rows,
    });
    let dg = plan.diagnostics.dg.then(|| DgReport {
        delta0: plan.delta0,
        mu0: plan.mu0.unwrap_or(q2_measure(n)),
        rows: dg_rows,
    });
    Ok(SweepReport { holder, dg })
}

pub fn run_holder_experiment(plan: &ExperimentPlan) -> Result<HolderReport, CliError> {
    let mut p = plan.clone();
    p.diagnostics.holder = true;
    p.diagnostics.dg = false;
    Ok(run_sweep(&p)?.holder.expect("holder enabled"))
}

pub fn run_dg_pipeline(plan: &ExperimentPlan) -> Result<DgReport, CliError> {
    let mut p = plan.clone();
    p.diagnostics.holder = false;
    p.diagnostics.dg = true;
    Ok(run_sweep(&p)?.dg.expect("dg enabled"))
}
