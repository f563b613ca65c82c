//! Sweep runner: solve a family of problems, normalize around interior
//! centers, and record oscillation and De Giorgi diagnostics as CSV.

// `!(x > y)` is deliberate throughout: it rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod experiment;
pub mod plan;
pub mod plotdata;

use hjdg_core::barrier::BarrierError;
use hjdg_core::diagnostics::DiagnosticsError;
use hjdg_core::grid::GridError;
use hjdg_core::problem::ProblemError;
use hjdg_core::scaling::ScalingError;
use hjdg_core::solver::SolverError;

pub use experiment::{
    normalize, run_dg_pipeline, run_holder_experiment, run_sweep, DgReport, DgRow, ErrorCode, HolderReport,
    HolderRow, HolderSummary, Normalization, SweepReport,
};
pub use plan::{DiagnosticFlags, ExperimentPlan, SweepPoint};
pub use plotdata::{emit_plotdata, write_outputs};

pub const EXIT_OK: i32 = 0;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
/// Unreadable inputs and write failures.
pub const EXIT_IO: i32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("plan: {0}")]
    Plan(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Problem(#[from] ProblemError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error(transparent)]
    Diagnostics(#[from] DiagnosticsError),
    #[error(transparent)]
    Barrier(#[from] BarrierError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

impl CliError {
    /// Process exit code for a failure of this kind.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solver(_) => EXIT_SOLVER,
            CliError::Io(_) | CliError::Json(_) | CliError::Csv(_) | CliError::Grid(_) => EXIT_IO,
            _ => EXIT_HYPOTHESIS,
        }
    }
}

/// Exit code for a completed sweep: solver failures dominate; any other row
/// error, or any probe point, counts as a hypothesis violation.
pub fn sweep_exit_code(report: &SweepReport) -> i32 {
    let holder = report.holder.iter().flat_map(|h| h.rows.iter().map(|r| r.info.probe));
    let dg = report.dg.iter().flat_map(|d| d.rows.iter().map(|r| r.info.probe));
    let probes = holder.chain(dg).any(|p| p);
    match report.worst_error() {
        Some(ErrorCode::Solver) => EXIT_SOLVER,
        Some(_) => EXIT_HYPOTHESIS,
        None if probes => EXIT_HYPOTHESIS,
        None => EXIT_OK,
    }
}
