use clap::{Parser, Subcommand};
use medfv::harness::{
    self, resolve_case, run_convergence, run_verify, solve_level, CaseConfig,
};
use medfv::mesh::{build_rect_mesh, check_admissibility};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "medfv",
    version,
    about = "Cell-centered finite volume solver for noncoercive quasilinear \
             convection-diffusion with null-median selection and estimate sweeps"
)]
struct Cli {
    /// Force the deterministic summation path so repeated runs emit
    /// byte-identical CSVs. All reductions in this build are already
    /// sequential and deterministic; the flag documents the contract.
    #[arg(long, global = true)]
    reproducible: bool,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print mesh counts and admissibility quantities (full dump for small meshes).
    MeshInfo {
        #[arg(long)]
        nx: usize,
        #[arg(long)]
        ny: usize,
        #[arg(long, default_value_t = 1.0)]
        lx: f64,
        #[arg(long, default_value_t = 1.0)]
        ly: f64,
    },
    /// Solve the configured case on the base mesh and write its artifacts.
    Solve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Refinement study: errors against the exact solution (--exact) or
    /// against the finest level.
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        exact: bool,
    },
    /// Estimate and energy sweeps across all refinement levels.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("medfv: {e}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> medfv::Result<()> {
    match cli.command {
        Cmd::MeshInfo { nx, ny, lx, ly } => {
            let mesh = build_rect_mesh(nx, ny, lx, ly)?;
            let audit = check_admissibility(&mesh);
            if !audit.ok() {
                return Err(medfv::Error::Mesh(audit.violations.join("; ")));
            }
            println!("cells: {}", mesh.n_cells());
            println!(
                "edges: {} ({} interior)",
                mesh.n_edges(),
                mesh.n_interior_edges()
            );
            println!("size h: {}", mesh.h);
            println!("regularity xi: {}", mesh.xi);
            println!("measure: {}", mesh.total_measure);
            if mesh.n_cells() <= 100 {
                print!("{}", mesh.text_dump());
            }
            Ok(())
        }
        Cmd::Solve { config } => {
            let cfg = CaseConfig::from_file(&config)?;
            let case = resolve_case(&cfg)?;
            let run = solve_level(&cfg, &case, 0)?;
            harness::write_level_artifacts(&cfg, &run)?;
            println!(
                "case {}: {}x{} cells, {} Picard iterations, final residual {}",
                case.name,
                cfg.nx,
                cfg.ny,
                run.report.iterations,
                run.report.final_residual
            );
            println!("artifacts in {}", cfg.out_dir.display());
            Ok(())
        }
        Cmd::Converge { config, exact } => {
            let cfg = CaseConfig::from_file(&config)?;
            let case = resolve_case(&cfg)?;
            let (table, runs) = run_convergence(&cfg, &case, exact)?;
            report_failures(&runs);
            harness::write_all_artifacts(&cfg, &runs)?;
            let csv = table.to_csv();
            harness::csv::write_atomic(&cfg.out_dir.join("convergence.csv"), &csv)?;
            print!("{csv}");
            Ok(())
        }
        Cmd::Verify { config } => {
            let cfg = CaseConfig::from_file(&config)?;
            let case = resolve_case(&cfg)?;
            let (out, runs) = run_verify(&cfg, &case)?;
            report_failures(&runs);
            harness::write_all_artifacts(&cfg, &runs)?;
            harness::csv::write_atomic(&cfg.out_dir.join("estimates.csv"), &out.estimates_csv())?;
            harness::csv::write_atomic(&cfg.out_dir.join("energy.csv"), &out.energy_csv())?;
            println!(
                "wrote {} estimate rows and {} energy rows to {}",
                out.estimates.len(),
                out.energies.len(),
                cfg.out_dir.display()
            );
            Ok(())
        }
    }
}

fn report_failures(runs: &[medfv::Result<harness::LevelRun>]) {
    for (level, r) in runs.iter().enumerate() {
        if let Err(e) = r {
            eprintln!("medfv: level {level} failed: {e}");
        }
    }
}
