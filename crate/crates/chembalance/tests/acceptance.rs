//! Acceptance gate: one test per criterion. Each test prints a single
//! `criterion N ...: PASS` line on success (visible with
//! `cargo test --test acceptance -- --show-output`) and fails loudly
//! otherwise. The three full-scale shear-layer runs are shared between
//! the criteria that need them.

use chembalance::balancer::{compute_plan, imbalance_ratio, LoadVector};
use chembalance::dense::DenseMatrix;
use chembalance::harness::{
    run_benchmark, run_benchmark_with, single_cell_benchmark, BenchmarkReport, Mode, RunConfig,
};
use chembalance::kinetics::{
    analytical_jacobian, fd_jacobian, parse_mechanism, CompositionVector, Mechanism,
};
use chembalance::odesolver::{
    integrate, integrate_system, rosenbrock_step, JacobianMode, OdeError, OdeSystem, ToleranceSpec,
};
use chembalance::refmap::{assign_zones, apply_mapping, Disposition, RefMapConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::sync::OnceLock;
use std::time::Instant;

fn mech() -> Mechanism {
    parse_mechanism(chembalance::H2_O2_MECH).expect("bundled mechanism parses")
}

fn pass(line: &str) {
    println!("{line}: PASS");
}

/// Fuel/oxidizer blend at mixture fraction z, at temperature t.
fn blend(m: &Mechanism, z: f64, t: f64) -> CompositionVector {
    let y_full: Vec<f64> = m
        .fuel_stream
        .iter()
        .zip(&m.oxidizer_stream)
        .map(|(f, o)| z * f + (1.0 - z) * o)
        .collect();
    CompositionVector::from_full(t, &y_full)
}

/// Random valid H2/air states: T in [800, 2500] K, normalized random Y.
fn random_states(m: &Mechanism, count: usize, seed: u64) -> Vec<CompositionVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let t = rng.gen_range(800.0..2500.0);
            let mut y: Vec<f64> = (0..m.n_species()).map(|_| rng.gen_range(0.0..1.0)).collect();
            let sum: f64 = y.iter().sum();
            for v in &mut y {
                *v /= sum;
            }
            CompositionVector::from_full(t, &y)
        })
        .collect()
}

fn column_scaled_error(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    let n = a.dim();
    let mut worst = 0.0f64;
    for j in 0..n {
        let mut scale = 0.0f64;
        for i in 0..n {
            scale = scale.max(a[(i, j)].abs()).max(b[(i, j)].abs());
        }
        if scale == 0.0 {
            continue;
        }
        for i in 0..n {
            worst = worst.max((a[(i, j)] - b[(i, j)]).abs() / scale);
        }
    }
    worst
}

#[test]
fn criterion_1_jacobian_fidelity() {
    let start = Instant::now();
    let m = mech();
    let mut worst = 0.0f64;
    for phi in random_states(&m, 100, 42) {
        let ja = analytical_jacobian(&m, &phi, 101_325.0).unwrap();
        // step floor 1e-6 * 1e-3: a reference-quality central difference;
        // flooring at the integrator's abstol instead puts near-zero mass
        // fractions at step 1e-14, where the difference is pure roundoff
        let jf = fd_jacobian(&m, &phi, 101_325.0, 1e-6, 1e-3).unwrap();
        worst = worst.max(column_scaled_error(&ja, &jf));
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(worst < 1e-5, "max column-scaled error {worst:.3e} >= 1e-5");
    assert!(elapsed < 10.0, "runtime {elapsed:.1} s >= 10 s");
    pass(&format!(
        "criterion 1 (Jacobian fidelity, max scaled error {worst:.2e} over 100 states in {elapsed:.1} s)"
    ));
}

/// y0' = -k1 y0, y1' = k1 y0 - k2 y1, y2' = k2 y1; closed form known.
struct LinearChain {
    k1: f64,
    k2: f64,
}

impl LinearChain {
    fn exact(&self, t: f64) -> [f64; 3] {
        let y0 = (-self.k1 * t).exp();
        let y1 = self.k1 / (self.k2 - self.k1) * ((-self.k1 * t).exp() - (-self.k2 * t).exp());
        [y0, y1, 1.0 - y0 - y1]
    }
}

impl OdeSystem for LinearChain {
    fn dim(&self) -> usize {
        3
    }
    fn rhs(&mut self, y: &[f64], out: &mut [f64]) -> Result<(), OdeError> {
        out[0] = -self.k1 * y[0];
        out[1] = self.k1 * y[0] - self.k2 * y[1];
        out[2] = self.k2 * y[1];
        Ok(())
    }
    fn jacobian(&mut self, _y: &[f64], out: &mut DenseMatrix) -> Result<(), OdeError> {
        out.fill(0.0);
        out[(0, 0)] = -self.k1;
        out[(1, 0)] = self.k1;
        out[(1, 1)] = -self.k2;
        out[(2, 1)] = self.k2;
        Ok(())
    }
}

#[test]
fn criterion_2_integrator_order_and_oracle() {
    // fixed-step convergence on a smooth problem across 4 halvings
    let t_end = 1.0;
    let mut errs = Vec::new();
    for level in 0..5 {
        let steps = 8usize << level;
        let h = t_end / steps as f64;
        let mut sys = LinearChain { k1: 1.3, k2: 0.7 };
        let mut y = vec![1.0, 0.0, 0.0];
        for _ in 0..steps {
            y = rosenbrock_step(&mut sys, &y, h).unwrap().0;
        }
        let exact = sys.exact(t_end);
        let err: f64 = y
            .iter()
            .zip(exact.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        errs.push(err);
    }
    // least-squares slope of log2(err) against the halving level
    let n = errs.len() as f64;
    let xs: Vec<f64> = (0..errs.len()).map(|i| i as f64).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.log2()).collect();
    let xm = xs.iter().sum::<f64>() / n;
    let ym = ys.iter().sum::<f64>() / n;
    let slope: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum::<f64>()
        / xs.iter().map(|x| (x - xm) * (x - xm)).sum::<f64>();
    let order = -slope;
    assert!(
        (3.5..=4.5).contains(&order),
        "convergence order {order:.2} outside [3.5, 4.5]; errors {errs:?}"
    );

    // adaptive driver against the closed form at the quoted tolerances
    let tol = ToleranceSpec::new(1e-8, 1e-5);
    let mut sys = LinearChain { k1: 40.0, k2: 3.0 };
    let (y, _) = integrate_system(&mut sys, &[1.0, 0.0, 0.0], 1.0, tol, 1e-3).unwrap();
    let exact = sys.exact(1.0);
    let worst: f64 = y
        .iter()
        .zip(exact.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    assert!(
        worst < 10.0 * 1e-5,
        "closed-form mismatch {worst:.3e} >= 10 reltol"
    );
    pass(&format!(
        "criterion 2 (integrator order {order:.2}, closed-form error {worst:.1e})"
    ));
}

/// Element mass fractions of a full composition.
fn element_mass_fractions(m: &Mechanism, y_full: &[f64]) -> Vec<f64> {
    let mut z = vec![0.0; m.elements.len()];
    for (i, sp) in m.species.iter().enumerate() {
        for &(e, count) in &sp.composition {
            z[e] += y_full[i] * count as f64 * m.elements[e].atomic_weight / sp.molecular_weight;
        }
    }
    z
}

#[test]
fn criterion_3_conservation() {
    let m = mech();
    let phi0 = blend(&m, 0.03, 1200.0);
    let tol = ToleranceSpec::new(1e-8, 1e-5);
    let (phi1, _) = integrate(&m, &phi0, 101_325.0, 1e-4, tol, JacobianMode::Analytical).unwrap();
    assert!(phi1.t > 1500.0, "transient did not ignite (T = {:.0} K)", phi1.t);

    // implied sum is structural: stored fractions plus the implied last
    let y_full = phi1.full_y();
    let sum: f64 = y_full.iter().sum();
    assert!((sum - 1.0).abs() < 1e-14, "mass fraction sum {sum} drifted");

    let z0 = element_mass_fractions(&m, &phi0.full_y());
    let z1 = element_mass_fractions(&m, &y_full);
    let mut drift = 0.0f64;
    for (e, (&a, &b)) in z0.iter().zip(&z1).enumerate() {
        if a > 0.0 {
            let rel = (b - a).abs() / a;
            assert!(rel < 1e-8, "element {} drifted by {rel:.2e}", m.elements[e].symbol);
            drift = drift.max(rel);
        }
    }
    pass(&format!(
        "criterion 3 (conservation: sum |{:.1e}|, worst element drift {drift:.1e}, T end {:.0} K)",
        sum - 1.0,
        phi1.t
    ));
}

#[test]
fn criterion_4_analytical_jacobian_benefit() {
    let start = Instant::now();
    let m = mech();
    let phi0 = blend(&m, 0.03, 1200.0);
    let sweep = [(1e-8, 1e-5), (1e-10, 1e-5), (1e-12, 1e-5)];
    let rows = single_cell_benchmark(
        &m,
        &phi0,
        101_325.0,
        1e-5,
        &sweep,
        &[JacobianMode::Analytical, JacobianMode::FiniteDifference],
        15,
    )
    .unwrap();
    let mut ratios = Vec::new();
    for pair in rows.chunks(2) {
        let (ana, fd) = (&pair[0], &pair[1]);
        assert_eq!(ana.mode, JacobianMode::Analytical);
        assert!(
            ana.mean_seconds <= fd.mean_seconds,
            "analytic slower than FD at abstol {:e}: {:.3e} vs {:.3e} s",
            ana.abstol,
            ana.mean_seconds,
            fd.mean_seconds
        );
        ratios.push(fd.mean_seconds / ana.mean_seconds);
    }
    for w in ratios.windows(2) {
        assert!(
            w[1] >= w[0],
            "FD/analytic ratio not non-decreasing as abstol tightens: {ratios:?}"
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 120.0, "runtime {elapsed:.1} s >= 2 min");
    pass(&format!(
        "criterion 4 (FD/analytic time ratios {:.2} / {:.2} / {:.2}, non-decreasing, {elapsed:.0} s)",
        ratios[0], ratios[1], ratios[2]
    ));
}

struct FullScaleRuns {
    standard: BenchmarkReport,
    balanced: BenchmarkReport,
    analytic: BenchmarkReport,
    /// Real elapsed seconds: [standard, balanced, balanced-analytic].
    elapsed: [f64; 3],
}

fn full_scale() -> &'static FullScaleRuns {
    static RUNS: OnceLock<FullScaleRuns> = OnceLock::new();
    RUNS.get_or_init(|| {
        let m = mech();
        let mut config = RunConfig::default();
        config.nx = 64;
        config.ny = 64;
        config.workers = 8;
        config.iterations = 50;
        let one = |mode: Mode| {
            let mut c = config.clone();
            c.mode = mode;
            let t0 = Instant::now();
            let r = run_benchmark(&m, &c).expect("benchmark run");
            (r, t0.elapsed().as_secs_f64())
        };
        let (standard, e0) = one(Mode::Standard);
        let (balanced, e1) = one(Mode::Balanced);
        let (analytic, e2) = one(Mode::BalancedAnalytic);
        FullScaleRuns { standard, balanced, analytic, elapsed: [e0, e1, e2] }
    })
}

#[test]
fn criterion_5_imbalance_mitigation() {
    let runs = full_scale();
    let std_imb = runs.standard.mean_imbalance(10..50);
    let bal_imb = runs.balanced.mean_imbalance(10..50);
    let speedup = runs.balanced.speedup_vs(runs.standard.wall_seconds);
    let elapsed = runs.elapsed[0] + runs.elapsed[1];
    assert!(std_imb >= 2.0, "standard mean imbalance {std_imb:.3} < 2.0");
    assert!(bal_imb <= 1.3, "balanced mean imbalance {bal_imb:.3} > 1.3");
    assert!(speedup >= 1.5, "balanced speed-up {speedup:.2} < 1.5");
    assert!(elapsed < 600.0, "runtime {elapsed:.0} s >= 10 min");
    pass(&format!(
        "criterion 5 (imbalance standard {std_imb:.2} >= 2.0, balanced {bal_imb:.2} <= 1.3, speed-up {speedup:.1}x)"
    ));
}

#[test]
fn criterion_6_mode_ordering() {
    let runs = full_scale();
    let (ws, wb, wa) = (
        runs.standard.wall_seconds,
        runs.balanced.wall_seconds,
        runs.analytic.wall_seconds,
    );
    let total: f64 = runs.elapsed.iter().sum();
    assert!(ws > wb && wb > wa, "wall times not ordered: {ws:.2} / {wb:.2} / {wa:.2} s");
    let speedup = ws / wa;
    assert!(speedup >= 3.0, "balanced+analytic only {speedup:.2}x faster than standard");
    assert!(total < 900.0, "total runtime {total:.0} s >= 15 min");
    pass(&format!(
        "criterion 6 (wall {ws:.2} > {wb:.2} > {wa:.2} s, analytic speed-up {speedup:.1}x)"
    ));
}

fn small_config(mode: Mode) -> RunConfig {
    let mut c = RunConfig::default();
    c.nx = 16;
    c.ny = 16;
    c.workers = 4;
    c.iterations = 10;
    c.mode = mode;
    c.refmap.enabled = false;
    c
}

#[test]
fn criterion_7_balancing_invariance() {
    let m = mech();
    let std_run = run_benchmark(&m, &small_config(Mode::Standard)).unwrap();
    let bal_run = run_benchmark(&m, &small_config(Mode::Balanced)).unwrap();
    assert_eq!(
        std_run.final_field, bal_run.final_field,
        "balanced final field differs from standard with mapping off"
    );
    pass("criterion 7 (balanced final field bit-identical to standard, refmap off)");
}

#[test]
fn criterion_8_refmap_exactness_and_savings() {
    let m = mech();
    let mut base = RunConfig::default();
    base.nx = 32;
    base.ny = 32;
    base.workers = 4;
    base.iterations = 20;
    base.mode = Mode::Balanced;

    // zero tolerances must be bit-identical to mapping disabled
    let mut off = base.clone();
    off.refmap.enabled = false;
    let run_off = run_benchmark(&m, &off).unwrap();
    let mut zero = base.clone();
    zero.refmap = RefMapConfig { z_bins: 16, eps_z: 0.0, eps_t: 0.0, enabled: true };
    let run_zero = run_benchmark(&m, &zero).unwrap();
    assert_eq!(
        run_off.final_field, run_zero.final_field,
        "zero-tolerance mapping changed the field"
    );

    // finite tolerances must save >= 30% of the explicit solves
    let mut on = base.clone();
    on.refmap = RefMapConfig { z_bins: 16, eps_z: 1e-3, eps_t: 1.0, enabled: true };
    let run_on = run_benchmark(&m, &on).unwrap();
    let total = run_off.total_explicit();
    let saved = 1.0 - run_on.total_explicit() as f64 / total as f64;
    assert!(
        saved >= 0.30,
        "mapping saved only {:.0}% of {total} explicit solves",
        100.0 * saved
    );

    // per-iteration accuracy: re-solve every mapped cell explicitly and
    // compare the temperature the mapping produced for that iteration
    let tol = on.tolerances();
    let mut worst_dev = 0.0f64;
    let parts: Vec<std::ops::Range<usize>> = {
        let n = on.nx * on.ny;
        let base_len = n / on.workers;
        let extra = n % on.workers;
        let mut out = Vec::new();
        let mut start = 0;
        for r in 0..on.workers {
            let len = base_len + usize::from(r < extra);
            out.push(start..start + len);
            start += len;
        }
        out
    };
    let mut prev_field = chembalance::harness::init_shear_layer(&m, &on).unwrap();
    run_benchmark_with(&m, &on, |_, field_after| {
        // field_after includes the mixing step; compare chemistry outputs
        // before mixing by redoing this iteration from prev_field
        for part in &parts {
            let ids: Vec<u64> = part.clone().map(|i| i as u64).collect();
            let zt: Vec<(u64, f64, f64)> = ids
                .iter()
                .map(|&id| (id, prev_field.z[id as usize], prev_field.cells[id as usize].t))
                .collect();
            let assign = assign_zones(&zt, &on.refmap);
            let mut explicit: HashMap<u64, CompositionVector> = HashMap::new();
            for (&id, d) in ids.iter().zip(&assign.disposition) {
                if matches!(d, Disposition::SolveExplicit) {
                    let (phi, _) = integrate(
                        &m,
                        &prev_field.cells[id as usize],
                        prev_field.pressure,
                        on.dt,
                        tol,
                        JacobianMode::FiniteDifference,
                    )
                    .unwrap();
                    explicit.insert(id, phi);
                }
            }
            let old: Vec<CompositionVector> =
                ids.iter().map(|&id| prev_field.cells[id as usize].clone()).collect();
            let mapped = apply_mapping(&assign, &ids, &old, &explicit);
            for ((&id, d), phi_mapped) in ids.iter().zip(&assign.disposition).zip(&mapped) {
                if matches!(d, Disposition::MapFromReference { .. }) {
                    let (phi_exact, _) = integrate(
                        &m,
                        &prev_field.cells[id as usize],
                        prev_field.pressure,
                        on.dt,
                        tol,
                        JacobianMode::FiniteDifference,
                    )
                    .unwrap();
                    worst_dev = worst_dev.max((phi_mapped.t - phi_exact.t).abs());
                }
            }
        }
        prev_field = field_after.clone();
    })
    .unwrap();
    assert!(
        worst_dev < 1.0,
        "mapped temperature deviates {worst_dev:.3} K from the explicit solve"
    );
    pass(&format!(
        "criterion 8 (zero-eps bit-identical, {:.0}% solves saved, max mapped deviation {worst_dev:.2} K)",
        100.0 * saved
    ));
}

#[test]
fn criterion_9_plan_determinism() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..1000 {
        let p = rng.gen_range(2..=12);
        let costs: Vec<Vec<(u64, f64)>> = (0..p)
            .map(|r| {
                let n = rng.gen_range(0..30);
                let mut v: Vec<(u64, f64)> = (0..n)
                    .map(|k| ((r * 1000 + k) as u64, rng.gen_range(0.01..3.0f64)))
                    .collect();
                v.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
                v
            })
            .collect();
        let loads = LoadVector(costs.iter().map(|c| c.iter().map(|x| x.1).sum()).collect());

        // every worker computes the plan independently from the same
        // gathered inputs; all copies must agree exactly
        let reference = compute_plan(&loads, &costs);
        for _ in 1..p {
            assert_eq!(compute_plan(&loads, &costs), reference, "case {case} diverged");
        }

        let before = imbalance_ratio(&loads.0);
        let mut after = loads.0.clone();
        for t in &reference.transfers {
            let moved: f64 = t
                .cells
                .iter()
                .map(|id| costs[t.from].iter().find(|c| c.0 == *id).unwrap().1)
                .sum();
            after[t.from] -= moved;
            after[t.to] += moved;
        }
        let after_ratio = imbalance_ratio(&after);
        assert!(
            after_ratio <= before + 1e-9,
            "case {case}: estimated imbalance rose {before:.4} -> {after_ratio:.4}"
        );
    }
    pass("criterion 9 (1000 random plans identical across workers, estimated imbalance never rose)");
}
