//! The fixed-width binary wire format used to ship chemistry problems
//! and solutions between workers: encode a batch, print the layout, and
//! verify the byte-exact round trip.

use chembalance::balancer::{
    decode_problems, encode_problems, problem_record_size, solution_record_size, ChemistryProblem,
};
use chembalance::kinetics::{parse_mechanism, CompositionVector};

fn main() {
    let m = parse_mechanism(chembalance::H2_O2_MECH).unwrap();
    let n = m.n_species();
    println!("species: {n}");
    println!("problem record:  {} bytes (cell id, dt, p, T, {} mass fractions, cost)", problem_record_size(n), n - 1);
    println!("solution record: {} bytes (cell id, T, {} mass fractions, cost, 5 counters, cpu time)", solution_record_size(n), n - 1);

    let y_full: Vec<f64> = m
        .fuel_stream
        .iter()
        .zip(&m.oxidizer_stream)
        .map(|(f, o)| 0.03 * f + 0.97 * o)
        .collect();
    let problems: Vec<ChemistryProblem> = (0..3)
        .map(|k| ChemistryProblem {
            cell_id: 100 + k,
            phi: CompositionVector::from_full(1200.0 + k as f64, &y_full),
            pressure: 101_325.0,
            dt: 1e-5,
            cost_estimate: 0.5 + 0.1 * k as f64,
        })
        .collect();

    let buf = encode_problems(&problems);
    println!("\nencoded {} problems into {} bytes", problems.len(), buf.len());
    println!("first record: {:02x?}", &buf[..problem_record_size(n).min(48)]);

    let decoded = decode_problems(&buf, n).unwrap();
    assert_eq!(decoded, problems, "round trip must be byte-exact");
    println!("round trip: byte-exact ({} problems recovered)", decoded.len());
}
