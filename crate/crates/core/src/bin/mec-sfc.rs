use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use mec_sfc::error::Result;
use mec_sfc::harness::{emit_results, run_sweep, Algorithm, SolutionFile, SweepSpec};
use mec_sfc::jcora::{validate, FeasibilityReport};
use mec_sfc::scenario::{generate_scenario, ScenarioConfig};

const EXIT_INFEASIBLE: u8 = 2;
const EXIT_ERROR: u8 = 1;

#[derive(Parser)]
#[command(name = "mec-sfc", version, about = "Offloading, service-chain placement and CPU allocation for MEC systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one seeded scenario.
    Solve {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "gtda")]
        algo: Algorithm,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a parameter sweep and write CSV results.
    Sweep {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-check a solution file against its scenario.
    Validate {
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load_config(path: Option<&PathBuf>) -> Result<ScenarioConfig> {
    match path {
        Some(p) => ScenarioConfig::load(p),
        None => Ok(ScenarioConfig::default()),
    }
}

fn print_report(rep: &FeasibilityReport) {
    for c in &rep.checks {
        let status = if c.passed() { "ok" } else { "VIOLATED" };
        println!("  {:<16} {status:<9} violations={} worst={:e}", format!("{:?}", c.constraint), c.violations, c.worst);
    }
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Solve { config, seed, algo, out } => {
            let cfg = load_config(config.as_ref())?;
            let seed = seed.unwrap_or(cfg.seed);
            let scenario = generate_scenario(&cfg, seed)?;
            let solution = algo.solve(&scenario)?;
            std::fs::create_dir_all(&out)?;
            let path = out.join(format!("{algo}_seed{seed}.json"));
            let feasible = solution.report.feasibility.is_feasible();
            println!(
                "{algo} seed {seed}: objective {:.6e}, {} of {} requests offloaded, feasible {feasible}",
                solution.report.objective,
                solution.report.offloaded_requests,
                scenario.request_count()
            );
            SolutionFile { seed, algorithm: algo.to_string(), solution }.write(&path)?;
            println!("wrote {}", path.display());
            Ok(feasible)
        }
        Command::Sweep { spec, out } => {
            let spec = SweepSpec::load(&spec)?;
            let table = run_sweep(&spec)?;
            let path = emit_results(&table, &spec, &out)?;
            for (value, algo, seed, err) in &table.failures {
                eprintln!("failed: value {value} algo {algo} seed {seed}: {err}");
            }
            let infeasible = table.rows.iter().filter(|r| !r.feasible).count();
            println!("{} rows written to {} ({infeasible} infeasible)", table.rows.len(), path.display());
            Ok(infeasible == 0)
        }
        Command::Validate { solution, config } => {
            let file = SolutionFile::load(&solution)?;
            let cfg = load_config(config.as_ref())?;
            let scenario = generate_scenario(&cfg, file.seed)?;
            let rep = validate(&file.solution.assignment, &scenario);
            println!("{} seed {}: feasible {}", file.algorithm, file.seed, rep.is_feasible());
            print_report(&rep);
            Ok(rep.is_feasible())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_INFEASIBLE),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
