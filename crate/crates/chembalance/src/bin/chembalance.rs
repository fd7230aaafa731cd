//! Benchmark CLI: the shear-layer run, the single-cell sweep, and a
//! mechanism checker.

use chembalance::harness::{
    emit_report, load_mechanism, run_benchmark, single_cell_benchmark, write_field_csv,
    write_single_cell_csv, HarnessError, Mode, RunConfig, BUILTIN_MECH,
};
use chembalance::kinetics::CompositionVector;
use chembalance::odesolver::JacobianMode;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "chembalance", about = "Load-balanced finite-rate chemistry benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the 2D shear-layer benchmark and write timing.csv, summary.txt
    /// and a final field snapshot.
    Run(RunArgs),
    /// Time a single-cell ignition problem across tolerances and
    /// Jacobian modes.
    SingleCell(SingleCellArgs),
    /// Parse and validate a mechanism file.
    CheckMech { path: String },
}

#[derive(Args)]
struct RunArgs {
    /// Flat key = value config file; omitted fields use defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    iters: Option<usize>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    abstol: Option<f64>,
    #[arg(long)]
    reltol: Option<f64>,
    /// standard | balanced | balanced-analytic
    #[arg(long)]
    mode: Option<String>,
    /// on | off
    #[arg(long)]
    refmap: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args)]
struct SingleCellArgs {
    /// Mechanism file path, or the builtin sentinel.
    #[arg(long, default_value = BUILTIN_MECH)]
    mech: String,
    /// Comma-separated abstol:reltol pairs, e.g. 1e-8:1e-5,1e-10:1e-5.
    #[arg(long, default_value = "1e-8:1e-5,1e-10:1e-5,1e-12:1e-5")]
    sweep: String,
    /// Initial temperature, K.
    #[arg(long, default_value_t = 1200.0)]
    temperature: f64,
    /// Integration interval, s.
    #[arg(long, default_value_t = 1e-5)]
    dt: f64,
    /// Repetitions per configuration.
    #[arg(long, default_value_t = 5)]
    reps: usize,
    /// Output CSV path; `-` writes to stdout.
    #[arg(long, default_value = "-")]
    out: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::SingleCell(args) => cmd_single_cell(args),
        Command::CheckMech { path } => cmd_check_mech(&path),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), HarnessError> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
                path: path.display().to_string(),
                source,
            })?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(v) = args.nx {
        config.nx = v;
    }
    if let Some(v) = args.ny {
        config.ny = v;
    }
    if let Some(v) = args.workers {
        config.workers = v;
    }
    if let Some(v) = args.iters {
        config.iterations = v;
    }
    if let Some(v) = args.dt {
        config.dt = v;
    }
    if let Some(v) = args.abstol {
        config.abstol = v;
    }
    if let Some(v) = args.reltol {
        config.reltol = v;
    }
    if let Some(v) = &args.mode {
        config.mode = Mode::parse(v)?;
    }
    if let Some(v) = &args.refmap {
        config.refmap.enabled = match v.as_str() {
            "on" => true,
            "off" => false,
            other => {
                return Err(HarnessError::Config(format!(
                    "bad --refmap value `{other}` (expected on | off)"
                )))
            }
        };
    }
    if let Some(v) = args.seed {
        config.seed = v;
    }
    config.validate()?;

    let mech = load_mechanism(&config.mechanism)?;
    eprintln!(
        "running {} on {}x{} grid, {} workers, {} iterations",
        config.mode.name(),
        config.nx,
        config.ny,
        config.workers,
        config.iterations
    );
    let report = run_benchmark(&mech, &config)?;
    emit_report(&report, &args.out, None)?;
    let snapshot = args.out.join(format!("field_{:04}.csv", config.iterations));
    write_field_csv(&report.final_field, &mech, &snapshot)?;
    println!("mode = {}", report.mode.name());
    println!("wall_seconds = {:.4e}", report.wall_seconds);
    if !report.imbalance.is_empty() {
        println!(
            "mean_imbalance = {:.3}",
            report.mean_imbalance(0..report.imbalance.len())
        );
    }
    println!(
        "solves: {} explicit, {} mapped",
        report.total_explicit(),
        report.total_mapped()
    );
    println!("max field T = {:.1} K", report.final_field.max_t());
    println!("report written to {}", args.out.display());
    Ok(())
}

fn cmd_single_cell(args: SingleCellArgs) -> Result<(), HarnessError> {
    let mech = load_mechanism(&args.mech)?;
    let sweep = parse_sweep(&args.sweep)?;
    // stoichiometric H2/air-style state: fuel blended into the oxidizer
    // stream at the fuel stream's stoichiometric mixture fraction
    let phi0 = ignition_state(&mech, args.temperature);
    let rows = single_cell_benchmark(
        &mech,
        &phi0,
        101_325.0,
        args.dt,
        &sweep,
        &[JacobianMode::Analytical, JacobianMode::FiniteDifference],
        args.reps.max(3),
    )?;
    if args.out == "-" {
        println!("abstol,reltol,mode,mean_seconds,rhs_evals,jacobian_evals");
        for r in &rows {
            let mode = match r.mode {
                JacobianMode::Analytical => "analytic",
                JacobianMode::FiniteDifference => "fd",
            };
            println!(
                "{:e},{:e},{},{:.9e},{},{}",
                r.abstol, r.reltol, mode, r.mean_seconds, r.rhs_evals, r.jacobian_evals
            );
        }
    } else {
        write_single_cell_csv(&rows, std::path::Path::new(&args.out))?;
        println!("table written to {}", args.out);
    }
    Ok(())
}

fn ignition_state(mech: &chembalance::kinetics::Mechanism, t: f64) -> CompositionVector {
    // blend fuel and oxidizer streams halfway between the streams'
    // mixture fractions weighted toward the oxidizer, which for H2/air
    // sits near stoichiometry; any reactive blend works for timing
    let z = 0.03;
    let y_full: Vec<f64> = mech
        .fuel_stream
        .iter()
        .zip(&mech.oxidizer_stream)
        .map(|(f, o)| z * f + (1.0 - z) * o)
        .collect();
    CompositionVector::from_full(t, &y_full)
}

fn parse_sweep(s: &str) -> Result<Vec<(f64, f64)>, HarnessError> {
    s.split(',')
        .map(|pair| {
            let (a, r) = pair
                .split_once(':')
                .ok_or_else(|| HarnessError::Config(format!("bad sweep entry `{pair}`")))?;
            let abstol: f64 = a
                .trim()
                .parse()
                .map_err(|_| HarnessError::Config(format!("bad abstol `{a}`")))?;
            let reltol: f64 = r
                .trim()
                .parse()
                .map_err(|_| HarnessError::Config(format!("bad reltol `{r}`")))?;
            Ok((abstol, reltol))
        })
        .collect()
}

fn cmd_check_mech(path: &str) -> Result<(), HarnessError> {
    let mech = load_mechanism(path)?;
    println!("mechanism ok");
    println!("elements: {}", mech.elements.len());
    println!("species: {}", mech.n_species());
    println!("reactions: {}", mech.reactions.len());
    let reversible = mech.reactions.iter().filter(|r| r.reversible).count();
    let third_body = mech.reactions.iter().filter(|r| r.third_body.is_some()).count();
    println!("  reversible: {reversible}");
    println!("  third-body: {third_body}");
    println!(
        "species names: {}",
        mech.species.iter().map(|s| s.name.as_str()).collect::<Vec<_>>().join(" ")
    );
    Ok(())
}
