//! Estimate sweeps: for every refinement level, evaluate each measured
//! inequality on the computed solution (plus randomized fields for the
//! purely structural ones) and collect schema-stable CSV rows.

use crate::analysis::{
    diffusive_energy, convective_energy, exceedance_bound, gradient_pairing, log_estimate,
    pw_median_check, sobolev_check, tn_estimate, DataNorms, EstimateReport,
};
use crate::error::Result;
use crate::field::{discrete_gradient, lp_norm, truncate, CellField};
use crate::harness::cases::ResolvedCase;
use crate::harness::config::CaseConfig;
use crate::harness::convergence::{solve_levels, LevelRun};
use crate::mesh::Vec2;
use crate::scheme::{cell_source, edge_velocity};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Truncation levels for the T_n estimate rows.
pub const TN_LEVELS: [f64; 4] = [1.0, 2.0, 4.0, 8.0];
/// Levels for exceedance rows and energy rows.
pub const ENERGY_LEVELS: [f64; 5] = [2.0, 4.0, 8.0, 16.0, 32.0];
/// Randomized fields per level for the structural inequality sweeps.
pub const RANDOM_FIELDS: usize = 20;

#[derive(Clone, Debug)]
pub struct EstimateRow {
    pub name: String,
    pub level: usize,
    pub h: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug)]
pub struct EnergyRow {
    pub n: f64,
    pub level: usize,
    pub h: f64,
    pub diffusive: f64,
    pub convective: f64,
}

#[derive(Clone, Debug, Default)]
pub struct VerifyOutputs {
    pub estimates: Vec<EstimateRow>,
    pub energies: Vec<EnergyRow>,
}

impl VerifyOutputs {
    pub fn estimates_csv(&self) -> String {
        let mut s = String::from("name,level,h,lhs,rhs,ratio\n");
        for r in &self.estimates {
            s.push_str(&format!(
                "{},{},{},{},{},{}\n",
                r.name, r.level, r.h, r.lhs, r.rhs, r.ratio
            ));
        }
        s
    }

    pub fn energy_csv(&self) -> String {
        let mut s = String::from("n,level,h,diffusive,convective\n");
        for r in &self.energies {
            s.push_str(&format!(
                "{},{},{},{},{}\n",
                r.n, r.level, r.h, r.diffusive, r.convective
            ));
        }
        s
    }
}

fn push_report(rows: &mut Vec<EstimateRow>, rep: EstimateReport<f64>, level: usize, h: f64) {
    rows.push(EstimateRow {
        name: rep.name,
        level,
        h,
        lhs: rep.lhs,
        rhs: rep.rhs,
        ratio: rep.ratio,
    });
}

/// Smooth dictionary paired against discrete gradients of truncates; the
/// pairings should become Cauchy across levels (a weak-convergence trace).
fn gradient_dictionary() -> [(&'static str, fn(f64, f64) -> Vec2<f64>); 3] {
    [
        ("w0", |_, _| Vec2::new(1.0, 0.0)),
        ("w1", |_, _| Vec2::new(0.0, 1.0)),
        ("w2", |x, y| {
            Vec2::new((std::f64::consts::PI * y).sin(), (std::f64::consts::PI * x).sin())
        }),
    ]
}

/// Runs the full estimate sweep on every successful level.
pub fn run_verify(
    cfg: &CaseConfig,
    case: &ResolvedCase,
) -> Result<(VerifyOutputs, Vec<Result<LevelRun>>)> {
    let runs = solve_levels(cfg, case);
    let mut out = VerifyOutputs::default();
    let dict = gradient_dictionary();
    // pairings of the previous successful level, per (n, dictionary entry)
    let mut prev_pairings: Option<[[f64; 3]; 2]> = None;

    for run in runs.iter().filter_map(|r| r.as_ref().ok()) {
        let mesh = &run.mesh;
        let u = &run.u;
        let (level, h) = (run.level, mesh.h);
        let v_edges = edge_velocity(mesh, &case.data, cfg.quad_subdiv)?;
        let (f, _) = cell_source(mesh, &case.data, cfg.quad_subdiv)?;
        let norms = DataNorms::compute(mesh, &case.data, cfg.quad_subdiv)?;

        push_report(
            &mut out.estimates,
            log_estimate(mesh, u, &case.data, &f, &v_edges)?,
            level,
            h,
        );
        for n in TN_LEVELS {
            push_report(&mut out.estimates, tn_estimate(mesh, u, n, &norms)?, level, h);
        }

        // Chebyshev companion: meas{|u|>n}·ln²(1+n) ≤ ∫ ln²(1+|u|)
        let log_l2 = lp_norm(mesh, &u.map(|x| x.abs().ln_1p()), 2.0)?;
        for (n, _, weighted) in exceedance_bound(mesh, u, &ENERGY_LEVELS)? {
            push_report(
                &mut out.estimates,
                EstimateReport::new(format!("exceedance_n{n}"), weighted, log_l2 * log_l2)?,
                level,
                h,
            );
        }

        for n in ENERGY_LEVELS {
            out.energies.push(EnergyRow {
                n,
                level,
                h,
                diffusive: diffusive_energy(mesh, u, n, &case.data)?,
                convective: convective_energy(mesh, u, n, &v_edges)?,
            });
        }

        let mut pw = pw_median_check(mesh, u, 2.0, mesh.xi)?;
        pw.name.push_str("_sol");
        push_report(&mut out.estimates, pw, level, h);
        let mut sb = sobolev_check(mesh, u, 4.0)?;
        sb.name.push_str("_sol");
        push_report(&mut out.estimates, sb, level, h);

        let mut rng = ChaCha8Rng::seed_from_u64(9000 + level as u64);
        for j in 0..RANDOM_FIELDS {
            let w = CellField::new(
                (0..mesh.n_cells())
                    .map(|_| rng.random_range(-1.0..1.0))
                    .collect::<Vec<f64>>(),
            )?;
            let mut pw = pw_median_check(mesh, &w, 2.0, mesh.xi)?;
            pw.name.push_str(&format!("_r{j:02}"));
            push_report(&mut out.estimates, pw, level, h);
            let mut sb = sobolev_check(mesh, &w, 4.0)?;
            sb.name.push_str(&format!("_r{j:02}"));
            push_report(&mut out.estimates, sb, level, h);
        }

        let mut pairings = [[0.0; 3]; 2];
        for (ni, n) in [1.0, 2.0].into_iter().enumerate() {
            let g = discrete_gradient(mesh, &truncate(u, n)?);
            for (wi, (_, w)) in dict.iter().enumerate() {
                pairings[ni][wi] = gradient_pairing(mesh, &g, w);
            }
        }
        if let Some(prev) = prev_pairings {
            for (ni, n) in [1.0, 2.0].into_iter().enumerate() {
                for (wi, (wname, _)) in dict.iter().enumerate() {
                    let p = pairings[ni][wi];
                    push_report(
                        &mut out.estimates,
                        EstimateReport::new(
                            format!("weakgrad_cauchy_n{n}_{wname}"),
                            (p - prev[ni][wi]).abs(),
                            p.abs(),
                        )?,
                        level,
                        h,
                    );
                }
            }
        }
        prev_pairings = Some(pairings);
    }

    Ok((out, runs))
}
