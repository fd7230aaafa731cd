//! Report emission: per-iteration timing CSV and a text summary.

use super::benchmark::{jacobian_mode_name, BenchmarkReport, SingleCellRow};
use super::HarnessError;
use std::io::Write;
use std::path::Path;

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.display().to_string(), source }
}

/// Write `timing.csv` (one row per iteration per rank) and `summary.txt`
/// into `out_dir`. When a `(name, wall_seconds)` baseline is given the
/// summary includes the speed-up factor relative to it.
pub fn emit_report(
    report: &BenchmarkReport,
    out_dir: &Path,
    baseline: Option<(&str, f64)>,
) -> Result<(), HarnessError> {
    std::fs::create_dir_all(out_dir).map_err(io_err(out_dir))?;

    let timing_path = out_dir.join("timing.csv");
    let mut csv = std::io::BufWriter::new(
        std::fs::File::create(&timing_path).map_err(io_err(&timing_path))?,
    );
    (|| {
        writeln!(csv, "iteration,rank,busy_s,solves_explicit,solves_mapped")?;
        for iter in 0..report.busy.len() {
            for rank in 0..report.workers {
                writeln!(
                    csv,
                    "{},{},{:.9e},{},{}",
                    iter,
                    rank,
                    report.busy[iter][rank],
                    report.solves_explicit[iter][rank],
                    report.solves_mapped[iter][rank],
                )?;
            }
        }
        csv.flush()
    })()
    .map_err(io_err(&timing_path))?;

    let summary_path = out_dir.join("summary.txt");
    let mut out = std::io::BufWriter::new(
        std::fs::File::create(&summary_path).map_err(io_err(&summary_path))?,
    );
    (|| {
        writeln!(out, "mode = {}", report.mode.name())?;
        writeln!(out, "workers = {}", report.workers)?;
        writeln!(out, "iterations = {}", report.iterations)?;
        writeln!(out, "wall_seconds = {:.6e}", report.wall_seconds)?;
        writeln!(out, "total_busy_seconds = {:.6e}", report.total_busy())?;
        writeln!(out, "solves_explicit = {}", report.total_explicit())?;
        writeln!(out, "solves_mapped = {}", report.total_mapped())?;
        if !report.imbalance.is_empty() {
            writeln!(
                out,
                "mean_imbalance = {:.4}",
                report.mean_imbalance(0..report.imbalance.len())
            )?;
            let max = report.imbalance.iter().cloned().fold(0.0, f64::max);
            writeln!(out, "max_imbalance = {max:.4}")?;
        }
        writeln!(out, "steps_accepted = {}", report.stats_total.steps_accepted)?;
        writeln!(out, "steps_rejected = {}", report.stats_total.steps_rejected)?;
        writeln!(out, "rhs_evals = {}", report.stats_total.rhs_evals)?;
        writeln!(out, "jacobian_evals = {}", report.stats_total.jacobian_evals)?;
        writeln!(out, "lu_factorizations = {}", report.stats_total.lu_factorizations)?;
        if let Some((name, wall)) = baseline {
            writeln!(out, "baseline = {name}")?;
            writeln!(out, "speedup = {:.4}", report.speedup_vs(wall))?;
        }
        out.flush()
    })()
    .map_err(io_err(&summary_path))
}

/// Write the single-cell benchmark table as CSV.
pub fn write_single_cell_csv(rows: &[SingleCellRow], path: &Path) -> Result<(), HarnessError> {
    let mut out =
        std::io::BufWriter::new(std::fs::File::create(path).map_err(io_err(path))?);
    (|| {
        writeln!(out, "abstol,reltol,mode,mean_seconds,rhs_evals,jacobian_evals")?;
        for r in rows {
            writeln!(
                out,
                "{:e},{:e},{},{:.9e},{},{}",
                r.abstol,
                r.reltol,
                jacobian_mode_name(r.mode),
                r.mean_seconds,
                r.rhs_evals,
                r.jacobian_evals,
            )?;
        }
        out.flush()
    })()
    .map_err(io_err(path))
}
