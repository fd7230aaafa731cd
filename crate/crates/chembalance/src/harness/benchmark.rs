//! The benchmark loops: the 2D shear layer and the single-cell sweep.

use super::config::{Mode, RunConfig};
use super::field::{init_shear_layer, mixing_step, FieldState};
use super::HarnessError;
use crate::balancer::{
    imbalance_ratio, run_balanced_iteration, ChemistryProblem, ChemistrySolution, ThreadMessenger,
};
use crate::clock::thread_cpu_seconds;
use crate::kinetics::{CompositionVector, Mechanism};
use crate::odesolver::{integrate, IntegratorStats, JacobianMode, ToleranceSpec};
use crate::refmap::{assign_zones, apply_mapping, RefMapConfig, ZoneAssignment};
use std::collections::HashMap;
use std::ops::Range;

/// Everything measured during a benchmark run. All per-iteration vectors
/// have one entry per iteration; the nested vectors one entry per rank.
#[derive(Debug, Clone)]
pub struct BenchmarkReport {
    pub mode: Mode,
    pub workers: usize,
    pub iterations: usize,
    /// Chemistry busy seconds (thread CPU time inside solves).
    pub busy: Vec<Vec<f64>>,
    pub solves_explicit: Vec<Vec<usize>>,
    pub solves_mapped: Vec<Vec<usize>>,
    /// Per-iteration max/mean busy ratio.
    pub imbalance: Vec<f64>,
    /// Chemistry makespan: the sum over iterations of the busiest rank's
    /// time. With one rank per execution unit this is the chemistry wall
    /// time of the run; it is the basis for speed-up comparisons.
    pub wall_seconds: f64,
    pub stats_total: IntegratorStats,
    pub final_field: FieldState,
}

impl BenchmarkReport {
    /// Mean imbalance ratio over an iteration range (clamped to the run).
    pub fn mean_imbalance(&self, range: Range<usize>) -> f64 {
        let lo = range.start.min(self.imbalance.len());
        let hi = range.end.min(self.imbalance.len());
        assert!(hi > lo, "empty iteration range");
        self.imbalance[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
    }

    /// Speed-up factor relative to a baseline's wall time.
    pub fn speedup_vs(&self, baseline_wall: f64) -> f64 {
        baseline_wall / self.wall_seconds
    }

    pub fn total_explicit(&self) -> usize {
        self.solves_explicit.iter().flatten().sum()
    }

    pub fn total_mapped(&self) -> usize {
        self.solves_mapped.iter().flatten().sum()
    }

    pub fn total_busy(&self) -> f64 {
        self.busy.iter().flatten().sum()
    }
}

/// Split `n` cells into `p` contiguous blocks differing by at most one.
pub(crate) fn partition(n: usize, p: usize) -> Vec<Range<usize>> {
    let base = n / p;
    let extra = n % p;
    let mut out = Vec::with_capacity(p);
    let mut start = 0;
    for r in 0..p {
        let len = base + usize::from(r < extra);
        out.push(start..start + len);
        start += len;
    }
    out
}

fn disabled_refmap() -> RefMapConfig {
    RefMapConfig { enabled: false, ..RefMapConfig::default() }
}

/// Run the shear-layer benchmark.
///
/// Each iteration: assign refmap dispositions per rank, build chemistry
/// problems for the explicit cells (costs seeded from the previous
/// iteration's measurements), solve them in the mode's configuration,
/// map the remaining cells, then apply the mixing step. Standard mode
/// solves rank by rank with no messaging; the balanced modes run P
/// worker threads through the messenger. Solutions are pure functions of
/// the problem, so every mode yields the same chemistry.
pub fn run_benchmark(m: &Mechanism, config: &RunConfig) -> Result<BenchmarkReport, HarnessError> {
    run_benchmark_with(m, config, |_, _| {})
}

/// [`run_benchmark`] with an observer called after every iteration with
/// the iteration index and the post-mixing field, for callers that need
/// intermediate states.
pub fn run_benchmark_with<F>(
    m: &Mechanism,
    config: &RunConfig,
    mut observe: F,
) -> Result<BenchmarkReport, HarnessError>
where
    F: FnMut(usize, &FieldState),
{
    config.validate()?;
    let mut field = init_shear_layer(m, config)?;
    let tol = config.tolerances();
    let p_workers = config.workers;
    let jac = match config.mode {
        Mode::Standard | Mode::Balanced => JacobianMode::FiniteDifference,
        Mode::BalancedAnalytic => JacobianMode::Analytical,
    };
    let refmap_cfg = if config.mode != Mode::Standard && config.refmap.enabled {
        config.refmap
    } else {
        disabled_refmap()
    };
    let parts = partition(field.n_cells(), p_workers);
    let mut measured: HashMap<u64, f64> = HashMap::new();
    let mut previous: HashMap<u64, f64> = HashMap::new();

    let mut report = BenchmarkReport {
        mode: config.mode,
        workers: p_workers,
        iterations: config.iterations,
        busy: Vec::new(),
        solves_explicit: Vec::new(),
        solves_mapped: Vec::new(),
        imbalance: Vec::new(),
        wall_seconds: 0.0,
        stats_total: IntegratorStats::default(),
        final_field: field.clone(),
    };

    for iter in 0..config.iterations {
        let mean_cost = if measured.is_empty() {
            1.0
        } else {
            measured.values().sum::<f64>() / measured.len() as f64
        };

        // per-rank dispositions and problem lists
        let mut rank_ids: Vec<Vec<u64>> = Vec::with_capacity(p_workers);
        let mut rank_assign: Vec<ZoneAssignment> = Vec::with_capacity(p_workers);
        let mut rank_problems: Vec<Vec<ChemistryProblem>> = Vec::with_capacity(p_workers);
        for part in &parts {
            let ids: Vec<u64> = part.clone().map(|i| i as u64).collect();
            let zt: Vec<(u64, f64, f64)> = ids
                .iter()
                .map(|&id| (id, field.z[id as usize], field.cells[id as usize].t))
                .collect();
            let assign = assign_zones(&zt, &refmap_cfg);
            // Estimate from the last measurement, extrapolated by the
            // cell's recent growth ratio: induction-phase cells get more
            // expensive every iteration and a flat estimate consistently
            // underpredicts the front ranks. A cell with no measurement
            // of its own borrows its zone reference's estimate, which is
            // refreshed every iteration.
            let extrapolated = |id: u64| -> Option<f64> {
                let last = *measured.get(&id)?;
                let growth = previous
                    .get(&id)
                    .map(|&p| if p > 0.0 { (last / p).clamp(1.0, 4.0) } else { 1.0 })
                    .unwrap_or(1.0);
                Some(last * growth)
            };
            let estimate = |k: usize, id: u64| {
                extrapolated(id)
                    .or_else(|| {
                        assign.zone_reference[assign.zone[k]].and_then(extrapolated)
                    })
                    .unwrap_or(mean_cost)
            };
            let problems: Vec<ChemistryProblem> = ids
                .iter()
                .enumerate()
                .zip(&assign.disposition)
                .filter(|(_, d)| matches!(d, crate::refmap::Disposition::SolveExplicit))
                .map(|((k, &id), _)| ChemistryProblem {
                    cell_id: id,
                    phi: field.cells[id as usize].clone(),
                    pressure: field.pressure,
                    dt: config.dt,
                    cost_estimate: estimate(k, id),
                })
                .collect();
            rank_ids.push(ids);
            rank_assign.push(assign);
            rank_problems.push(problems);
        }
        let explicit_counts: Vec<usize> = rank_problems.iter().map(|p| p.len()).collect();
        let mapped_counts: Vec<usize> = rank_ids
            .iter()
            .zip(&explicit_counts)
            .map(|(ids, &e)| ids.len() - e)
            .collect();

        // solve
        let mut busy = vec![0.0f64; p_workers];
        let mut solved: HashMap<u64, ChemistrySolution> = HashMap::new();
        if config.mode == Mode::Standard {
            for (r, problems) in rank_problems.iter().enumerate() {
                let t0 = thread_cpu_seconds();
                for p in problems {
                    let (phi_new, stats) = integrate(m, &p.phi, p.pressure, p.dt, tol, jac)
                        .map_err(|source| HarnessError::Solve { cell_id: p.cell_id, source })?;
                    solved.insert(
                        p.cell_id,
                        ChemistrySolution {
                            cell_id: p.cell_id,
                            phi_new,
                            measured_cost: stats.cpu_time,
                            stats,
                        },
                    );
                }
                busy[r] = thread_cpu_seconds() - t0;
            }
        } else {
            let mut group = ThreadMessenger::group(p_workers);
            let results: Vec<_> = std::thread::scope(|s| {
                let handles: Vec<_> = group
                    .drain(..)
                    .zip(rank_problems.iter())
                    .map(|(mut msg, problems)| {
                        s.spawn(move || run_balanced_iteration(m, problems, &mut msg, tol, jac))
                    })
                    .collect();
                handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
            });
            for (r, res) in results.into_iter().enumerate() {
                let (sols, timing) = res?;
                busy[r] = timing.busy_seconds;
                for s in sols {
                    solved.insert(s.cell_id, s);
                }
            }
        }

        for s in solved.values() {
            // rhs evaluations are a deterministic, noise-free proxy for
            // per-cell work; wall-clock costs at this scale are dominated
            // by timer jitter and make the growth ratio meaningless
            let work = s.stats.rhs_evals as f64;
            if let Some(old) = measured.insert(s.cell_id, work) {
                previous.insert(s.cell_id, old);
            }
            report.stats_total.accumulate(&s.stats);
        }

        // map the skipped cells and write the new field
        let explicit_states: HashMap<u64, CompositionVector> =
            solved.iter().map(|(&id, s)| (id, s.phi_new.clone())).collect();
        for (r, assign) in rank_assign.iter().enumerate() {
            let ids = &rank_ids[r];
            let old: Vec<CompositionVector> =
                ids.iter().map(|&id| field.cells[id as usize].clone()).collect();
            let new_states = apply_mapping(assign, ids, &old, &explicit_states);
            for (&id, state) in ids.iter().zip(new_states) {
                field.cells[id as usize] = state;
            }
        }

        mixing_step(&mut field, m, config.diffusivity, config.dt)?;
        observe(iter, &field);

        report.wall_seconds += busy.iter().cloned().fold(0.0, f64::max);
        report.imbalance.push(imbalance_ratio(&busy));
        report.busy.push(busy);
        report.solves_explicit.push(explicit_counts);
        report.solves_mapped.push(mapped_counts);
    }

    report.final_field = field;
    Ok(report)
}

/// One line of the single-cell benchmark table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingleCellRow {
    pub abstol: f64,
    pub reltol: f64,
    pub mode: JacobianMode,
    pub mean_seconds: f64,
    pub rhs_evals: u64,
    pub jacobian_evals: u64,
}

pub(crate) fn jacobian_mode_name(mode: JacobianMode) -> &'static str {
    match mode {
        JacobianMode::Analytical => "analytic",
        JacobianMode::FiniteDifference => "fd",
    }
}

/// Time a single-cell problem across tolerance/Jacobian combinations.
/// `reps` solves per combination are averaged (at least 3). The
/// evaluation counts are deterministic per combination, so they come
/// from the final repetition.
pub fn single_cell_benchmark(
    m: &Mechanism,
    phi0: &CompositionVector,
    pressure: f64,
    dt: f64,
    sweep: &[(f64, f64)],
    modes: &[JacobianMode],
    reps: usize,
) -> Result<Vec<SingleCellRow>, HarnessError> {
    assert!(reps >= 3, "need at least 3 repetitions for a mean");
    let mut rows = Vec::with_capacity(sweep.len() * modes.len());
    for &(abstol, reltol) in sweep {
        let tol = ToleranceSpec::new(abstol, reltol);
        for &mode in modes {
            let mut total = 0.0;
            let mut stats = IntegratorStats::default();
            for _ in 0..reps {
                let (_, s) = integrate(m, phi0, pressure, dt, tol, mode)
                    .map_err(|source| HarnessError::Solve { cell_id: 0, source })?;
                total += s.cpu_time;
                stats = s;
            }
            rows.push(SingleCellRow {
                abstol,
                reltol,
                mode,
                mean_seconds: total / reps as f64,
                rhs_evals: stats.rhs_evals,
                jacobian_evals: stats.jacobian_evals,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::parse_mechanism;

    fn tiny_config(mode: Mode) -> RunConfig {
        let mut c = RunConfig::default();
        c.nx = 8;
        c.ny = 4;
        c.workers = 2;
        c.iterations = 2;
        c.mode = mode;
        c.refmap.enabled = false;
        c
    }

    #[test]
    fn partition_covers_everything_contiguously() {
        let parts = partition(10, 3);
        assert_eq!(parts, vec![0..4, 4..7, 7..10]);
        let parts = partition(8, 8);
        assert_eq!(parts.len(), 8);
        assert!(parts.iter().all(|r| r.len() == 1));
    }

    #[test]
    fn single_worker_standard_run_is_balanced_by_definition() {
        let m = parse_mechanism(crate::H2_O2_MECH).unwrap();
        let mut c = tiny_config(Mode::Standard);
        c.workers = 1;
        let r = run_benchmark(&m, &c).unwrap();
        assert_eq!(r.busy.len(), 2);
        assert!(r.imbalance.iter().all(|&x| x == 1.0));
        assert_eq!(r.total_explicit(), 2 * 32);
        assert_eq!(r.total_mapped(), 0);
        // makespan with one rank is just the total busy time
        assert!((r.wall_seconds - r.total_busy()).abs() < 1e-12);
    }

    #[test]
    fn identical_runs_are_bit_identical() {
        let m = parse_mechanism(crate::H2_O2_MECH).unwrap();
        let c = tiny_config(Mode::Balanced);
        let a = run_benchmark(&m, &c).unwrap();
        let b = run_benchmark(&m, &c).unwrap();
        assert_eq!(a.final_field, b.final_field);
        assert_eq!(a.solves_explicit, b.solves_explicit);
    }

    #[test]
    fn balancing_does_not_change_the_physics() {
        let m = parse_mechanism(crate::H2_O2_MECH).unwrap();
        let std_run = run_benchmark(&m, &tiny_config(Mode::Standard)).unwrap();
        let bal_run = run_benchmark(&m, &tiny_config(Mode::Balanced)).unwrap();
        assert_eq!(std_run.final_field, bal_run.final_field);
    }

    #[test]
    fn report_dimensions_match_iterations_and_workers() {
        let m = parse_mechanism(crate::H2_O2_MECH).unwrap();
        let c = tiny_config(Mode::Balanced);
        let r = run_benchmark(&m, &c).unwrap();
        assert_eq!(r.busy.len(), c.iterations);
        for v in &r.busy {
            assert_eq!(v.len(), c.workers);
        }
        assert_eq!(r.imbalance.len(), c.iterations);
    }

    #[test]
    fn refmap_skips_solves_on_the_tiny_field() {
        let m = parse_mechanism(crate::H2_O2_MECH).unwrap();
        let mut c = tiny_config(Mode::Balanced);
        c.refmap.enabled = true;
        c.refmap.eps_z = 1e-3;
        c.refmap.eps_t = 1.0;
        let r = run_benchmark(&m, &c).unwrap();
        assert!(r.total_mapped() > 0);
        assert_eq!(r.total_mapped() + r.total_explicit(), 2 * 32);
    }

    #[test]
    fn zero_reaction_single_cell_rows_match_across_modes() {
        let m = parse_mechanism(
            "ELEMENTS\nAR 39.95\nSPECIES\n\
             A AR:1 200 1000 3500 2.5 0 0 0 0 0 0 2.5 0 0 0 0 0 0\n\
             B AR:1 200 1000 3500 2.5 0 0 0 0 0 0 2.5 0 0 0 0 0 0\n",
        )
        .unwrap();
        let phi0 = CompositionVector { t: 1000.0, y: vec![0.5] };
        let rows = single_cell_benchmark(
            &m,
            &phi0,
            101325.0,
            1e-5,
            &[(1e-8, 1e-5)],
            &[JacobianMode::Analytical, JacobianMode::FiniteDifference],
            3,
        )
        .unwrap();
        assert_eq!(rows.len(), 2);
        // quiescent: one accepted step, jacobian evaluated once per mode
        for r in &rows {
            assert_eq!(r.jacobian_evals, 1);
        }
    }
}
