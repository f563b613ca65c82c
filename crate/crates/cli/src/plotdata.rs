//! CSV persistence for sweep reports.

use std::fs::{self, File};
use std::io::Write;
use std::path::Path;

use hjdg_core::diagnostics::Majority;

use crate::experiment::{DgReport, HolderReport, HolderRow, SweepReport};
use crate::CliError;

pub const OSC_FILE: &str = "osc_loglog.csv";
pub const EPS_FILE: &str = "eps_gamma.csv";
pub const ENERGY_FILE: &str = "energy.csv";
pub const SUMMARY_FILE: &str = "holder_summary.csv";
pub const LADDER_FILE: &str = "dg_ladder.csv";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn center_label(c: &[f64]) -> String {
    c.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// The three figure files: log-log oscillation pairs with one fit row per
/// profile, `(ε, γ)` pairs, and `(k, E_k)` pairs. Empty reports give
/// header-only files.
pub fn emit_plotdata(report: &SweepReport, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    let mut osc = csv::Writer::from_path(dir.join(OSC_FILE))?;
    osc.write_record(["point", "center", "k", "log_scale", "log_osc", "gamma", "residual"])?;
    let mut eps = csv::Writer::from_path(dir.join(EPS_FILE))?;
    eps.write_record(["point", "center", "epsilon", "roughness", "gamma", "residual"])?;
    if let Some(h) = &report.holder {
        for row in &h.rows {
            let Some(prof) = &row.profile else { continue };
            let (pt, c) = (row.info.point.to_string(), center_label(&row.info.center));
            for l in &prof.levels {
                osc.write_record([
                    pt.clone(),
                    c.clone(),
                    l.k.to_string(),
                    l.scale.ln().to_string(),
                    l.osc.ln().to_string(),
                    String::new(),
                    String::new(),
                ])?;
            }
            let (g, r) = (opt(prof.fit.map(|f| f.gamma)), opt(prof.fit.map(|f| f.residual)));
            osc.write_record([pt.clone(), c.clone(), "fit".into(), String::new(), String::new(), g.clone(), r.clone()])?;
            if !prof.degenerate {
                eps.write_record([pt, c, row.info.epsilon.to_string(), row.info.roughness.clone(), g, r])?;
            }
        }
    }
    osc.flush()?;
    eps.flush()?;

    let mut energy = csv::Writer::from_path(dir.join(ENERGY_FILE))?;
    energy.write_record(["point", "center", "k", "E_k"])?;
    if let Some(d) = &report.dg {
        for row in &d.rows {
            let Some(e) = &row.energy else { continue };
            for l in &e.levels {
                energy.write_record([
                    row.info.point.to_string(),
                    center_label(&row.info.center),
                    l.k.to_string(),
                    l.energy.to_string(),
                ])?;
            }
        }
    }
    energy.flush()?;
    Ok(())
}

fn status(row: &HolderRow) -> String {
    match &row.error {
        Some(e) => e.code.as_str().to_string(),
        None => "ok".to_string(),
    }
}

pub const SUMMARY_HEADER: [&str; 20] = [
    "point", "center", "epsilon", "roughness", "strength", "refinement", "probe", "status", "gamma",
    "residual", "degenerate", "truncated", "levels", "sup_norm", "alpha_w", "beta_w", "substeps",
    "dt_min", "dt_max", "monotone",
];

fn write_holder(h: &HolderReport, dir: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(dir.join(SUMMARY_FILE))?;
    w.write_record(SUMMARY_HEADER)?;
    for row in &h.rows {
        let prof = row.profile.as_ref();
        let norm = row.normalization.as_ref();
        let stats = row.stats.as_ref();
        w.write_record([
            row.info.point.to_string(),
            center_label(&row.info.center),
            row.info.epsilon.to_string(),
            row.info.roughness.clone(),
            row.info.strength.to_string(),
            row.info.refinement.to_string(),
            row.info.probe.to_string(),
            status(row),
            opt(row.gamma()),
            opt(prof.and_then(|p| p.fit.map(|f| f.residual))),
            prof.map(|p| p.degenerate.to_string()).unwrap_or_default(),
            prof.map(|p| p.truncated.to_string()).unwrap_or_default(),
            prof.map(|p| p.levels.len().to_string()).unwrap_or_default(),
            opt(norm.map(|n| n.sup_norm)),
            opt(norm.map(|n| n.alpha_w)),
            opt(norm.map(|n| n.beta_w)),
            stats.map(|s| s.substeps.to_string()).unwrap_or_default(),
            opt(stats.map(|s| s.dt_min)),
            opt(stats.map(|s| s.dt_max)),
            stats.map(|s| s.monotone.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;

    for (j, row) in h.rows.iter().enumerate() {
        let pdir = dir.join(format!("point_{:03}", row.info.point));
        fs::create_dir_all(&pdir)?;
        if let Some(p) = &row.profile {
            p.write_csv(File::create(pdir.join(format!("osc_{j:03}.csv")))?)?;
        }
        if let Some(meta) = &row.metadata {
            fs::write(pdir.join("solve_meta.txt"), meta)?;
        }
        if let Some(e) = &row.error {
            fs::write(pdir.join(format!("error_{j:03}.txt")), format!("{}: {}\n", e.code.as_str(), e.message))?;
        }
    }

    let mut s = File::create(dir.join("summary.txt"))?;
    writeln!(s, "alpha1={}", h.alpha1)?;
    writeln!(s, "beta1={}", h.beta1)?;
    writeln!(s, "theoretical_gamma={}", opt(h.theoretical_gamma))?;
    writeln!(s, "gamma_min={}", opt(h.summary.gamma_min))?;
    writeln!(s, "gamma_max={}", opt(h.summary.gamma_max))?;
    writeln!(s, "eps_ratio={}", opt(h.summary.eps_ratio))?;
    writeln!(s, "roughness_ratio={}", opt(h.summary.roughness_ratio))?;
    Ok(())
}

fn write_dg(d: &DgReport, dir: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(dir.join(LADDER_FILE))?;
    w.write_record([
        "point", "center", "status", "majority", "k0", "k", "below", "between", "above", "first_small",
        "sup_q1", "conclusion",
    ])?;
    for (j, row) in d.rows.iter().enumerate() {
        let majority = match row.majority {
            Some(Majority::MostlyNegative) => "mostly-negative",
            Some(Majority::MostlyPositive) => "mostly-positive",
            None => "",
        };
        let st = row.error.as_ref().map_or("ok", |e| e.code.as_str());
        let (sup, concl) = row
            .energy
            .as_ref()
            .map_or((String::new(), String::new()), |e| (e.sup_q1.to_string(), e.conclusion_holds.to_string()));
        let first = row.first_small.map(|k| k.to_string()).unwrap_or_default();
        let base = [row.info.point.to_string(), center_label(&row.info.center), st.to_string(), majority.to_string()];
        if row.ladder.is_empty() {
            let mut rec = base.to_vec();
            rec.extend([row.k0.to_string(), String::new(), String::new(), String::new(), String::new(), first.clone(), sup.clone(), concl.clone()]);
            w.write_record(rec)?;
        }
        for l in &row.ladder {
            let mut rec = base.to_vec();
            rec.extend([
                row.k0.to_string(),
                l.k.to_string(),
                l.below.to_string(),
                l.between.to_string(),
                l.above.to_string(),
                first.clone(),
                sup.clone(),
                concl.clone(),
            ]);
            w.write_record(rec)?;
        }
        if let Some(e) = &row.energy {
            let pdir = dir.join(format!("point_{:03}", row.info.point));
            fs::create_dir_all(&pdir)?;
            e.write_csv(File::create(pdir.join(format!("energy_{j:03}.csv")))?)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Per-point files, the summaries, and the figure data.
pub fn write_outputs(report: &SweepReport, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    if let Some(h) = &report.holder {
        write_holder(h, dir)?;
    }
    if let Some(d) = &report.dg {
        write_dg(d, dir)?;
    }
    emit_plotdata(report, dir)
}
