//! Single-cell constant-pressure ignition: advance an H2/air blend in
//! fixed chemistry intervals and print the temperature history plus the
//! ignition delay (steepest temperature rise).

use chembalance::kinetics::{parse_mechanism, CompositionVector};
use chembalance::odesolver::{integrate, JacobianMode, ToleranceSpec};

fn main() {
    let m = parse_mechanism(chembalance::H2_O2_MECH).unwrap();
    let y_full: Vec<f64> = m
        .fuel_stream
        .iter()
        .zip(&m.oxidizer_stream)
        .map(|(f, o)| 0.03 * f + 0.97 * o)
        .collect();
    let mut phi = CompositionVector::from_full(1100.0, &y_full);
    let tol = ToleranceSpec::new(1e-8, 1e-5);
    let dt = 5e-6;

    println!("{:>12}  {:>10}", "t [s]", "T [K]");
    let mut best_slope = 0.0;
    let mut delay = 0.0;
    for step in 0..=80 {
        let t_now = step as f64 * dt;
        if step % 8 == 0 {
            println!("{:>12.2e}  {:>10.1}", t_now, phi.t);
        }
        let (next, _) = integrate(&m, &phi, 101_325.0, dt, tol, JacobianMode::Analytical).unwrap();
        let slope = (next.t - phi.t) / dt;
        if slope > best_slope {
            best_slope = slope;
            delay = t_now + 0.5 * dt;
        }
        phi = next;
    }
    println!("\nignition delay (max dT/dt): {delay:.2e} s");
    println!("final temperature: {:.1} K", phi.t);
}
