//! Bilger mixture fraction along a fuel/oxidizer blend line: Z is 1 in
//! pure fuel, 0 in pure oxidizer, and linear under mixing.

use chembalance::kinetics::{bilger_z, parse_mechanism};

fn main() {
    let m = parse_mechanism(chembalance::H2_O2_MECH).unwrap();
    println!("{:>8}  {:>10}  {:>12}", "blend", "Bilger Z", "|Z - blend|");
    for k in 0..=10 {
        let alpha = k as f64 / 10.0;
        let y_full: Vec<f64> = m
            .fuel_stream
            .iter()
            .zip(&m.oxidizer_stream)
            .map(|(f, o)| alpha * f + (1.0 - alpha) * o)
            .collect();
        let z = bilger_z(&m, &y_full).unwrap();
        println!("{:>8.2}  {:>10.6}  {:>12.2e}", alpha, z, (z - alpha).abs());
    }
}
