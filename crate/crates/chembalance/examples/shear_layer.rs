//! A small shear-layer benchmark in both standard and balanced modes,
//! printing per-mode wall time, imbalance and solve counts.

use chembalance::harness::{run_benchmark, Mode, RunConfig};
use chembalance::kinetics::parse_mechanism;

fn main() {
    let m = parse_mechanism(chembalance::H2_O2_MECH).unwrap();
    let mut config = RunConfig::default();
    config.nx = 32;
    config.ny = 32;
    config.workers = 4;
    config.iterations = 20;

    println!(
        "{:>18}  {:>10}  {:>10}  {:>9}  {:>8}  {:>9}",
        "mode", "wall [s]", "imbalance", "explicit", "mapped", "max T [K]"
    );
    let mut baseline = None;
    for mode in [Mode::Standard, Mode::Balanced, Mode::BalancedAnalytic] {
        config.mode = mode;
        let r = run_benchmark(&m, &config).unwrap();
        println!(
            "{:>18}  {:>10.3}  {:>10.3}  {:>9}  {:>8}  {:>9.1}",
            mode.name(),
            r.wall_seconds,
            r.mean_imbalance(0..r.imbalance.len()),
            r.total_explicit(),
            r.total_mapped(),
            r.final_field.max_t()
        );
        match baseline {
            None => baseline = Some(r.wall_seconds),
            Some(w) => println!("{:>18}  speed-up vs standard: {:.2}x", "", r.speedup_vs(w)),
        }
    }
}
