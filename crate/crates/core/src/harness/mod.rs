//! Run orchestration: flat-file configs, built-in cases, refinement
//! pipelines, and CSV report emission for the solver and its estimates.

pub mod cases;
pub mod config;
pub mod convergence;
pub mod csv;
pub mod verify;

pub use cases::{manufactured_case, resolve_case, singular_case, ResolvedCase};
pub use config::CaseConfig;
pub use convergence::{
    convergence_table, inject_fine_to_coarse, run_convergence, solve_level, solve_levels,
    ConvergenceRow, ConvergenceTable, LevelRun,
};
pub use verify::{run_verify, EnergyRow, EstimateRow, VerifyOutputs};

use crate::error::Result;

/// Writes `solution_<level>.csv` and `picard_<level>.csv` for one level.
pub fn write_level_artifacts(cfg: &CaseConfig, run: &LevelRun) -> Result<()> {
    csv::write_atomic(
        &cfg.out_dir.join(format!("solution_{}.csv", run.level)),
        &run.u.to_csv(),
    )?;
    csv::write_atomic(
        &cfg.out_dir.join(format!("picard_{}.csv", run.level)),
        &run.report.to_csv(),
    )
}

/// Artifacts for every successful level; failed levels are skipped here and
/// reported by the caller.
pub fn write_all_artifacts(cfg: &CaseConfig, runs: &[Result<LevelRun>]) -> Result<()> {
    for run in runs.iter().filter_map(|r| r.as_ref().ok()) {
        write_level_artifacts(cfg, run)?;
    }
    Ok(())
}
