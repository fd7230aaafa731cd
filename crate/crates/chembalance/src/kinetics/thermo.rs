//! NASA-7 polynomial thermodynamics.

use super::{KineticsError, SpeciesSpec, R_UNIVERSAL};

/// Evaluate cp [J/(kmol K)], h [J/kmol] and s [J/(kmol K)] for one
/// species at temperature `t`. No extrapolation outside the fitted range.
pub fn thermo_props(s: &SpeciesSpec, t: f64) -> Result<(f64, f64, f64), KineticsError> {
    let p = &s.thermo;
    if t < p.t_low || t > p.t_high {
        return Err(KineticsError::TemperatureOutOfRange {
            species: s.name.clone(),
            t,
            t_low: p.t_low,
            t_high: p.t_high,
        });
    }
    let a = p.coeffs(t);
    Ok((cp_from(a, t), h_from(a, t), s_from(a, t)))
}

#[inline]
pub(crate) fn cp_from(a: &[f64; 7], t: f64) -> f64 {
    R_UNIVERSAL * (a[0] + t * (a[1] + t * (a[2] + t * (a[3] + t * a[4]))))
}

#[inline]
pub(crate) fn h_from(a: &[f64; 7], t: f64) -> f64 {
    R_UNIVERSAL
        * t
        * (a[0]
            + t * (a[1] / 2.0 + t * (a[2] / 3.0 + t * (a[3] / 4.0 + t * a[4] / 5.0)))
            + a[5] / t)
}

#[inline]
pub(crate) fn s_from(a: &[f64; 7], t: f64) -> f64 {
    R_UNIVERSAL
        * (a[0] * t.ln() + t * (a[1] + t * (a[2] / 2.0 + t * (a[3] / 3.0 + t * a[4] / 4.0))) + a[6])
}

/// d(cp)/dT, J/(kmol K^2).
#[inline]
pub(crate) fn dcp_dt_from(a: &[f64; 7], t: f64) -> f64 {
    R_UNIVERSAL * (a[1] + t * (2.0 * a[2] + t * (3.0 * a[3] + t * 4.0 * a[4])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::NasaPoly;

    fn species_with(low: [f64; 7], high: [f64; 7]) -> SpeciesSpec {
        SpeciesSpec {
            name: "X".into(),
            composition: vec![],
            molecular_weight: 1.0,
            thermo: NasaPoly { t_low: 200.0, t_mid: 1000.0, t_high: 3500.0, low, high },
        }
    }

    #[test]
    fn constant_cp_degenerate_polynomial() {
        let mut a = [0.0; 7];
        a[0] = 3.5;
        let s = species_with(a, a);
        let (cp, _, _) = thermo_props(&s, 500.0).unwrap();
        assert!((cp - 3.5 * R_UNIVERSAL).abs() < 1e-9);
    }

    #[test]
    fn out_of_range_is_an_error() {
        let s = species_with([1.0; 7], [1.0; 7]);
        assert!(thermo_props(&s, 100.0).is_err());
        assert!(thermo_props(&s, 4000.0).is_err());
        assert!(thermo_props(&s, 200.0).is_ok());
    }

    #[test]
    fn dcp_dt_matches_finite_difference() {
        let a = [2.0, 1e-3, -2e-6, 3e-9, -1e-12, 100.0, 5.0];
        let t = 900.0;
        let dt = 1e-3;
        let fd = (cp_from(&a, t + dt) - cp_from(&a, t - dt)) / (2.0 * dt);
        assert!((dcp_dt_from(&a, t) - fd).abs() < 1e-6 * fd.abs().max(1.0));
    }

    #[test]
    fn enthalpy_slope_is_cp() {
        // dh/dT = cp for the NASA form.
        let a = [3.2, 5e-4, -1e-7, 2e-11, -9e-16, -1000.0, 4.0];
        let t = 1500.0;
        let dt = 1e-2;
        let fd = (h_from(&a, t + dt) - h_from(&a, t - dt)) / (2.0 * dt);
        let cp = cp_from(&a, t);
        assert!((fd - cp).abs() < 1e-6 * cp.abs());
    }
}
