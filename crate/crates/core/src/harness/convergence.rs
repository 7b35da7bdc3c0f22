//! Refinement studies: solve every level of a case, then measure L² errors
//! against the sampled exact solution or (self-convergence) against the
//! finest level injected down by cell averaging.

use crate::error::{Error, Result};
use crate::field::{lp_norm, truncate, CellField};
use crate::harness::cases::{Exact, ResolvedCase};
use crate::harness::config::CaseConfig;
use crate::mesh::{build_rect_mesh, AdmissibleMesh};
use crate::solver::{picard_solve, PicardReport};

pub struct LevelRun {
    pub level: usize,
    pub mesh: AdmissibleMesh<f64>,
    pub u: CellField<f64>,
    pub report: PicardReport<f64>,
}

/// Solves one refinement level; an unconverged Picard run is a per-level
/// error so callers can continue with the remaining levels.
pub fn solve_level(cfg: &CaseConfig, case: &ResolvedCase, level: usize) -> Result<LevelRun> {
    let (nx, ny) = cfg.resolution(level);
    let mesh = build_rect_mesh(nx, ny, cfg.lx, cfg.ly)?;
    let (u, report) = picard_solve(&mesh, &case.data, &cfg.picard, cfg.quad_subdiv)?;
    if !report.converged {
        return Err(Error::NoConvergence {
            max_iter: report.iterations,
            last_update: *report.update_history.last().unwrap_or(&f64::NAN),
        });
    }
    Ok(LevelRun {
        level,
        mesh,
        u,
        report,
    })
}

/// All levels of the config; failed levels are kept as errors in place.
pub fn solve_levels(cfg: &CaseConfig, case: &ResolvedCase) -> Vec<Result<LevelRun>> {
    (0..cfg.levels)
        .map(|k| solve_level(cfg, case, k))
        .collect()
}

/// Measure-weighted injection of a fine solution onto a coarser nested grid
/// (every coarse cell is the disjoint union of (2^Δ)² fine cells).
pub fn inject_fine_to_coarse(
    fine_mesh: &AdmissibleMesh<f64>,
    fine_u: &CellField<f64>,
    coarse_mesh: &AdmissibleMesh<f64>,
) -> Result<CellField<f64>> {
    let fg = fine_mesh
        .grid
        .ok_or_else(|| Error::Mesh("injection requires structured grids".into()))?;
    let cg = coarse_mesh
        .grid
        .ok_or_else(|| Error::Mesh("injection requires structured grids".into()))?;
    if fg.nx % cg.nx != 0 || fg.ny % cg.ny != 0 || fg.nx / cg.nx != fg.ny / cg.ny {
        return Err(Error::InvalidArgument(format!(
            "grids {}x{} and {}x{} are not nested by a common factor",
            fg.nx, fg.ny, cg.nx, cg.ny
        )));
    }
    let r = fg.nx / cg.nx;
    let mut values = Vec::with_capacity(coarse_mesh.n_cells());
    for cid in 0..coarse_mesh.n_cells() {
        let (i, j) = (cid % cg.nx, cid / cg.nx);
        let mut num = 0.0;
        let mut den = 0.0;
        for b in 0..r {
            for a in 0..r {
                let fid = (i * r + a) + fg.nx * (j * r + b);
                let m = fine_mesh.cells[fid].measure;
                num += m * fine_u[fid];
                den += m;
            }
        }
        values.push(num / den);
    }
    CellField::new(values)
}

#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub level: usize,
    pub h: f64,
    pub n_cells: usize,
    pub err_l2: f64,
    pub err_t1: f64,
    pub err_t2: f64,
    /// log₂(err_prev/err_this); absent on the first measured level.
    pub order: Option<f64>,
    pub picard_iters: usize,
}

#[derive(Clone, Debug, Default)]
pub struct ConvergenceTable {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,h,N,errL2,errL2_T1,errL2_T2,order,picardIters\n");
        for r in &self.rows {
            let order = r.order.map(|o| o.to_string()).unwrap_or_default();
            s.push_str(&format!(
                "{},{},{},{},{},{},{},{}\n",
                r.level, r.h, r.n_cells, r.err_l2, r.err_t1, r.err_t2, order, r.picard_iters
            ));
        }
        s
    }
}

fn error_triple(
    mesh: &AdmissibleMesh<f64>,
    u: &CellField<f64>,
    reference: &CellField<f64>,
) -> Result<(f64, f64, f64)> {
    let e = lp_norm(mesh, &u.sub(reference), 2.0)?;
    let mut truncated = [0.0; 2];
    for (slot, n) in truncated.iter_mut().zip([1.0, 2.0]) {
        let d = truncate(u, n)?.sub(&truncate(reference, n)?);
        *slot = lp_norm(mesh, &d, 2.0)?;
    }
    Ok((e, truncated[0], truncated[1]))
}

/// Assembles the error table from already-solved levels. With an exact
/// solution the reference is its cell-center sampling; otherwise the finest
/// successful level serves as reference and is excluded from the rows.
pub fn convergence_table(
    runs: &[Result<LevelRun>],
    exact: Option<&Exact>,
) -> Result<ConvergenceTable> {
    let ok: Vec<&LevelRun> = runs.iter().filter_map(|r| r.as_ref().ok()).collect();
    if ok.is_empty() {
        return Err(Error::InvalidArgument(
            "no level converged; nothing to tabulate".into(),
        ));
    }
    let mut rows = Vec::new();
    let mut prev_err: Option<f64> = None;
    match exact {
        Some(f) => {
            for run in &ok {
                let reference = CellField::sample(&run.mesh, |x, y| f(x, y))?;
                let (e, e1, e2) = error_triple(&run.mesh, &run.u, &reference)?;
                let order = prev_err.map(|p| (p / e).log2());
                prev_err = Some(e);
                rows.push(ConvergenceRow {
                    level: run.level,
                    h: run.mesh.h,
                    n_cells: run.mesh.n_cells(),
                    err_l2: e,
                    err_t1: e1,
                    err_t2: e2,
                    order,
                    picard_iters: run.report.iterations,
                });
            }
        }
        None => {
            let finest = *ok.last().unwrap();
            for run in &ok[..ok.len() - 1] {
                let reference = inject_fine_to_coarse(&finest.mesh, &finest.u, &run.mesh)?;
                let (e, e1, e2) = error_triple(&run.mesh, &run.u, &reference)?;
                let order = prev_err.map(|p| (p / e).log2());
                prev_err = Some(e);
                rows.push(ConvergenceRow {
                    level: run.level,
                    h: run.mesh.h,
                    n_cells: run.mesh.n_cells(),
                    err_l2: e,
                    err_t1: e1,
                    err_t2: e2,
                    order,
                    picard_iters: run.report.iterations,
                });
            }
        }
    }
    Ok(ConvergenceTable { rows })
}

/// Solve-and-tabulate in one call. `use_exact` demands the case carry an
/// exact solution.
pub fn run_convergence(
    cfg: &CaseConfig,
    case: &ResolvedCase,
    use_exact: bool,
) -> Result<(ConvergenceTable, Vec<Result<LevelRun>>)> {
    if use_exact && case.exact.is_none() {
        return Err(Error::Config(format!(
            "case '{}' has no exact solution; drop --exact",
            case.name
        )));
    }
    let runs = solve_levels(cfg, case);
    let table = convergence_table(&runs, if use_exact { case.exact.as_ref() } else { None })?;
    Ok((table, runs))
}
