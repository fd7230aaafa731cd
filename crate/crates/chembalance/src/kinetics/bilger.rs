//! Bilger mixture fraction.

use super::{KineticsError, Mechanism};

/// Bilger mixture fraction of a full-length mass-fraction vector:
/// 1 in the mechanism's fuel stream, 0 in its oxidizer stream, linear
/// under mass-weighted mixing. The coupling function uses the C, H and O
/// element terms; mechanisms without one of them simply drop that term.
pub fn bilger_z(m: &Mechanism, y_full: &[f64]) -> Result<f64, KineticsError> {
    assert_eq!(y_full.len(), m.n_species());
    let sum: f64 = y_full.iter().sum();
    assert!((sum - 1.0).abs() < 1e-8, "mass fractions sum to {sum}");
    let denom = m.beta_fuel - m.beta_ox;
    if denom.abs() < 1e-300 {
        return Err(KineticsError::DegenerateStreams);
    }
    let beta: f64 = y_full.iter().zip(&m.bilger_coef).map(|(y, c)| y * c).sum();
    let z = (beta - m.beta_ox) / denom;
    // clamp round-off just outside [0, 1]
    if z < 0.0 && z > -1e-12 {
        return Ok(0.0);
    }
    if z > 1.0 && z < 1.0 + 1e-12 {
        return Ok(1.0);
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::parse_mechanism;

    #[test]
    fn streams_map_to_endpoints_and_blends_are_linear() {
        let m = parse_mechanism(crate::H2_O2_MECH).unwrap();
        assert_eq!(bilger_z(&m, &m.fuel_stream).unwrap(), 1.0);
        assert_eq!(bilger_z(&m, &m.oxidizer_stream).unwrap(), 0.0);
        let blend: Vec<f64> = m
            .fuel_stream
            .iter()
            .zip(&m.oxidizer_stream)
            .map(|(f, o)| 0.5 * f + 0.5 * o)
            .collect();
        assert!((bilger_z(&m, &blend).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn linearity_over_random_alphas() {
        let m = parse_mechanism(crate::H2_O2_MECH).unwrap();
        let ya = &m.fuel_stream;
        let mut yb = vec![0.0; m.n_species()];
        yb[m.species_index("H2O").unwrap()] = 0.3;
        yb[m.species_index("O2").unwrap()] = 0.2;
        yb[m.species_index("N2").unwrap()] = 0.5;
        let za = bilger_z(&m, ya).unwrap();
        let zb = bilger_z(&m, &yb).unwrap();
        for k in 0..=10 {
            let a = k as f64 / 10.0;
            let mix: Vec<f64> = ya.iter().zip(&yb).map(|(x, y)| a * x + (1.0 - a) * y).collect();
            let z = bilger_z(&m, &mix).unwrap();
            assert!((z - (a * za + (1.0 - a) * zb)).abs() < 1e-12);
        }
    }

    #[test]
    fn stoichiometric_h2_air_mixture_fraction() {
        // Hand element balance: Z_st = Y_H2 at stoichiometry since Z is
        // linear and the streams are pure fuel / air.
        let m = parse_mechanism(crate::H2_O2_MECH).unwrap();
        let y_h2 = 1.0 / (1.0 + 8.0 / 0.233);
        let mut y = vec![0.0; m.n_species()];
        y[m.species_index("H2").unwrap()] = y_h2;
        y[m.species_index("O2").unwrap()] = (1.0 - y_h2) * 0.233;
        y[m.species_index("N2").unwrap()] = (1.0 - y_h2) * 0.767;
        let z = bilger_z(&m, &y).unwrap();
        assert!((z - 0.0285).abs() / 0.0285 < 0.02, "Z_st = {z}");
    }

    #[test]
    fn degenerate_streams_error() {
        // No C/H/O elements at all: beta vanishes for every composition.
        let m = parse_mechanism(
            "ELEMENTS\nX 10.0\nSPECIES\n\
             A X:1 200 1000 3500 2.5 0 0 0 0 0 0 2.5 0 0 0 0 0 0\n\
             B X:1 200 1000 3500 2.5 0 0 0 0 0 0 2.5 0 0 0 0 0 0\n",
        )
        .unwrap();
        assert!(matches!(bilger_z(&m, &[0.5, 0.5]), Err(KineticsError::DegenerateStreams)));
    }
}
