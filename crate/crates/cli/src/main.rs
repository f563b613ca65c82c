use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use hjdg_cli::plan::{default_beta1, DEFAULT_ALPHA1, DEFAULT_K_MAX};
use hjdg_cli::{
    normalize, run_sweep, sweep_exit_code, write_outputs, CliError, ExperimentPlan, EXIT_HYPOTHESIS, EXIT_OK,
};
use hjdg_core::barrier::{k0_search, BumpProfile};
use hjdg_core::diagnostics::oscillation_profile;
use hjdg_core::grid::{read_checkpoint, write_checkpoint};
use hjdg_core::problem::{domain_center, validate_problem, ProblemSpec};
use hjdg_core::solver::{solve, SchemeConfig};

#[derive(Parser)]
#[command(name = "hjdg", version, about = "Solve viscous Hamilton-Jacobi problems and measure Hoelder decay")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Largest acceptable gamma-fit residual; worse fits are flagged.
    #[arg(long, global = true, default_value_t = 0.1)]
    tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one problem and write a checkpoint plus run metadata.
    Solve { config: PathBuf },
    /// Oscillation profile of a checkpointed solution around the domain center.
    Diagnose { config: PathBuf, checkpoint: PathBuf },
    /// Run an experiment plan.
    Sweep { plan: PathBuf },
    /// Summarize the holder_summary.csv of a finished sweep.
    Report { dir: PathBuf },
}

fn load_problem(path: &Path) -> Result<ProblemSpec, CliError> {
    let spec = ProblemSpec::from_path(path)?;
    let violations = validate_problem(&spec);
    if !violations.is_empty() {
        let msg: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
        return Err(CliError::Plan(format!("hypothesis violated: {}", msg.join("; "))));
    }
    Ok(spec)
}

fn cmd_solve(config: &Path, out: &Path) -> Result<i32, CliError> {
    let spec = load_problem(config)?;
    let (u, stats) = solve(&spec, SchemeConfig::default())?;
    fs::create_dir_all(out)?;
    write_checkpoint(&u, BufWriter::new(File::create(out.join("solution.hjdg"))?))?;
    fs::write(out.join("solve_meta.txt"), stats.to_metadata())?;
    println!(
        "solved {} slices, {} sub-steps, max gradient {}",
        u.grid().slices(),
        stats.substeps,
        stats.max_gradient
    );
    Ok(EXIT_OK)
}

fn cmd_diagnose(config: &Path, checkpoint: &Path, out: &Path, tol: f64) -> Result<i32, CliError> {
    let spec = load_problem(config)?;
    let u = read_checkpoint(BufReader::new(File::open(checkpoint)?))?;
    if u.grid() != &spec.grid {
        return Err(CliError::Plan("checkpoint grid differs from the config grid".into()));
    }
    let center = domain_center(spec.space());
    let k0 = k0_search(spec.lambda, spec.p, spec.dim(), &BumpProfile::default()).unwrap_or(0.0);
    let lookback = (spec.grid.t_end() - spec.grid.t_start()) / 3.0;
    let (w, _, norm) = normalize(&u, &spec, &center, lookback, k0, k0)?;
    let profile = oscillation_profile(&w, spec.p, DEFAULT_ALPHA1, default_beta1(), DEFAULT_K_MAX)?;
    fs::create_dir_all(out)?;
    profile.write_csv(File::create(out.join("osc.csv"))?)?;
    println!("alpha_w={} beta_w={}", norm.alpha_w, norm.beta_w);
    match profile.fit {
        Some(f) if !profile.degenerate => {
            let flag = if f.residual > tol { " (residual above tolerance)" } else { "" };
            println!("gamma={} residual={}{flag}", f.gamma, f.residual);
        }
        _ => println!("degenerate profile: {} levels", profile.levels.len()),
    }
    Ok(EXIT_OK)
}

fn cmd_sweep(path: &Path, workers: Option<usize>, out: Option<PathBuf>, tol: f64) -> Result<i32, CliError> {
    let mut plan = ExperimentPlan::from_path(path)?;
    if let Some(w) = workers {
        plan.workers = w;
    }
    let dir = out
        .or_else(|| plan.output.clone().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("hjdg-out"));
    let report = run_sweep(&plan)?;
    write_outputs(&report, &dir)?;
    if let Some(h) = &report.holder {
        for row in &h.rows {
            let fit = row.profile.as_ref().and_then(|p| p.fit);
            let status = match (&row.error, fit) {
                (Some(e), _) => format!("{}: {}", e.code.as_str(), e.message),
                (None, Some(f)) if f.residual > tol => format!("gamma={} residual={} (flagged)", f.gamma, f.residual),
                (None, Some(f)) => format!("gamma={} residual={}", f.gamma, f.residual),
                (None, None) => "degenerate".to_string(),
            };
            println!("point {} eps={} {status}", row.info.point, row.info.epsilon);
        }
        if let (Some(lo), Some(hi)) = (h.summary.gamma_min, h.summary.gamma_max) {
            println!("gamma range [{lo}, {hi}]");
        }
    }
    if let Some(d) = &report.dg {
        for row in &d.rows {
            match (&row.error, &row.energy) {
                (Some(e), _) => println!("dg point {}: {}: {}", row.info.point, e.code.as_str(), e.message),
                (None, Some(e)) => println!(
                    "dg point {}: sup_Q1={} conclusion={}",
                    row.info.point, e.sup_q1, e.conclusion_holds
                ),
                (None, None) => {}
            }
        }
    }
    println!("wrote {}", dir.display());
    Ok(sweep_exit_code(&report))
}

fn cmd_report(dir: &Path, tol: f64) -> anyhow::Result<i32> {
    let path = dir.join(hjdg_cli::plotdata::SUMMARY_FILE);
    let mut rdr = csv::Reader::from_path(&path).with_context(|| format!("reading {}", path.display()))?;
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).context(format!("missing column {name}"));
    let (status, gamma, residual, eps) = (col("status")?, col("gamma")?, col("residual")?, col("epsilon")?);
    let (mut ok, mut failed, mut flagged) = (0usize, 0usize, 0usize);
    let mut gammas = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if &rec[status] != "ok" {
            failed += 1;
            continue;
        }
        ok += 1;
        if let (Ok(g), Ok(r)) = (rec[gamma].parse::<f64>(), rec[residual].parse::<f64>()) {
            if r > tol {
                flagged += 1;
            }
            println!("eps={} gamma={g} residual={r}", &rec[eps]);
            gammas.push(g);
        }
    }
    println!("{ok} ok, {failed} failed, {flagged} fits above residual {tol}");
    if let (Some(lo), Some(hi)) = (
        gammas.iter().cloned().reduce(f64::min),
        gammas.iter().cloned().reduce(f64::max),
    ) {
        println!("gamma range [{lo}, {hi}], max/min {}", hi / lo);
    }
    Ok(if failed > 0 { EXIT_HYPOTHESIS } else { EXIT_OK })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let result = match &cli.command {
        Command::Solve { config } => cmd_solve(config, &out),
        Command::Diagnose { config, checkpoint } => cmd_diagnose(config, checkpoint, &out, cli.tol),
        Command::Sweep { plan } => cmd_sweep(plan, cli.workers, cli.out.clone(), cli.tol),
        Command::Report { dir } => {
            return match cmd_report(dir, cli.tol) {
                Ok(code) => ExitCode::from(code as u8),
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(1)
                }
            }
        }
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
