//! Tolerance sweep on a single-cell ignition problem: mean solve time
//! and work counters for the analytical and finite-difference Jacobian
//! modes side by side.

use chembalance::harness::single_cell_benchmark;
use chembalance::kinetics::{parse_mechanism, CompositionVector};
use chembalance::odesolver::JacobianMode;

fn main() {
    let m = parse_mechanism(chembalance::H2_O2_MECH).unwrap();
    let y_full: Vec<f64> = m
        .fuel_stream
        .iter()
        .zip(&m.oxidizer_stream)
        .map(|(f, o)| 0.03 * f + 0.97 * o)
        .collect();
    let phi0 = CompositionVector::from_full(1200.0, &y_full);

    let sweep = [(1e-8, 1e-5), (1e-10, 1e-5), (1e-12, 1e-5)];
    let rows = single_cell_benchmark(
        &m,
        &phi0,
        101_325.0,
        1e-5,
        &sweep,
        &[JacobianMode::Analytical, JacobianMode::FiniteDifference],
        7,
    )
    .unwrap();

    println!(
        "{:>8}  {:>8}  {:>9}  {:>12}  {:>9}  {:>9}",
        "abstol", "reltol", "jacobian", "mean [s]", "rhs", "jacobians"
    );
    for r in &rows {
        let mode = match r.mode {
            JacobianMode::Analytical => "analytic",
            JacobianMode::FiniteDifference => "fd",
        };
        println!(
            "{:>8.0e}  {:>8.0e}  {:>9}  {:>12.3e}  {:>9}  {:>9}",
            r.abstol, r.reltol, mode, r.mean_seconds, r.rhs_evals, r.jacobian_evals
        );
    }
}
