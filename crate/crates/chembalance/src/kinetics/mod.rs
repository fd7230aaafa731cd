//! Chemical kinetic mechanism representation and evaluation.
//!
//! A [`Mechanism`] holds elements, species with NASA-7 thermodynamic
//! polynomials, and elementary reactions (reversible and third-body
//! enhanced; no pressure-dependent falloff). Evaluation covers
//! thermodynamic properties, Arrhenius rate constants, molar production
//! rates, the constant-pressure reactor right-hand side, its fully
//! analytical Jacobian, a central finite-difference Jacobian, and the
//! Bilger mixture fraction.
//!
//! Rate inputs follow the Chemkin convention (mol, cm3, s, cal/mol) in
//! mechanism files and are converted once at parse time to the internal
//! SI-kmol basis (kmol, m3, s, J). Concentrations are kmol/m3 and molar
//! production rates kmol/(m3 s) throughout.

mod bilger;
mod jacobian;
mod parse;
mod rates;
mod thermo;

pub use bilger::bilger_z;
pub use jacobian::{analytical_jacobian, fd_jacobian, fd_jacobian_counted};
pub(crate) use jacobian::{analytical_jacobian_state, fd_jacobian_state};
pub(crate) use rates::rhs_state;
pub use parse::parse_mechanism;
pub use rates::{production_rates, rate_constant, reverse_rate_constant, rhs, RateWorkspace};
pub use thermo::thermo_props;

use std::collections::HashMap;
use thiserror::Error;

/// Universal gas constant, J/(kmol K).
pub const R_UNIVERSAL: f64 = 8314.462618;
/// Gas constant in the activation-energy unit system, cal/(mol K).
pub const R_CAL: f64 = 1.9872036;
/// Standard-state pressure for equilibrium constants, Pa.
pub const P_ATM: f64 = 101_325.0;

#[derive(Debug, Error)]
pub enum KineticsError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("reaction `{reaction}` is not element balanced: {detail}")]
    ElementImbalance { reaction: String, detail: String },
    #[error("species `{0}` referenced by a reaction is not declared")]
    UnknownSpecies(String),
    #[error("species `{species}`: thermo discontinuity at T_mid for {property} ({low} vs {high})")]
    ThermoDiscontinuity { species: String, property: &'static str, low: f64, high: f64 },
    #[error("temperature {t} K outside thermo range [{t_low}, {t_high}] for species `{species}`")]
    TemperatureOutOfRange { species: String, t: f64, t_low: f64, t_high: f64 },
    #[error("stream `{stream}` mass fractions sum to {sum}, expected 1")]
    StreamSum { stream: String, sum: f64 },
    #[error("fuel and oxidizer streams have equal Bilger coupling function; mixture fraction is undefined")]
    DegenerateStreams,
    #[error("{0}")]
    Invalid(String),
}

/// A chemical element with its atomic weight in kg/kmol.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub symbol: String,
    pub atomic_weight: f64,
}

/// NASA-7 polynomial pair with its temperature ranges, Kelvin.
#[derive(Debug, Clone, PartialEq)]
pub struct NasaPoly {
    pub t_low: f64,
    pub t_mid: f64,
    pub t_high: f64,
    pub low: [f64; 7],
    pub high: [f64; 7],
}

impl NasaPoly {
    #[inline]
    pub fn coeffs(&self, t: f64) -> &[f64; 7] {
        if t <= self.t_mid {
            &self.low
        } else {
            &self.high
        }
    }
}

/// A species: elemental composition, derived molecular weight, thermo fit.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesSpec {
    pub name: String,
    /// (element index, atom count) pairs.
    pub composition: Vec<(usize, u32)>,
    /// kg/kmol, derived from the composition at parse time.
    pub molecular_weight: f64,
    pub thermo: NasaPoly,
}

/// An elementary reaction in internal SI-kmol units.
///
/// `a_si` is the pre-exponential converted from the mol-cm3 input
/// convention to kmol/m3 concentrations; `t_act` is Ea/R in Kelvin.
#[derive(Debug, Clone, PartialEq)]
pub struct ReactionSpec {
    /// (species index, stoichiometric coefficient) for reactants.
    pub reactants: Vec<(usize, u32)>,
    /// (species index, stoichiometric coefficient) for products.
    pub products: Vec<(usize, u32)>,
    /// Pre-exponential as given in the file (mol, cm3, s units).
    pub a_input: f64,
    /// Pre-exponential in the SI-kmol basis.
    pub a_si: f64,
    /// Temperature exponent.
    pub b: f64,
    /// Activation energy as given, cal/mol.
    pub ea_cal: f64,
    /// Activation temperature Ea/R_cal, Kelvin.
    pub t_act: f64,
    pub reversible: bool,
    /// Third-body efficiencies per species; `None` for plain reactions.
    pub third_body: Option<Vec<f64>>,
    /// Sum of product coefficients minus sum of reactant coefficients.
    pub delta_nu: i32,
    /// Original equation text, kept for diagnostics.
    pub equation: String,
}

/// A fully validated mechanism. Immutable after parsing; share freely
/// across workers.
#[derive(Debug, Clone)]
pub struct Mechanism {
    pub elements: Vec<Element>,
    pub species: Vec<SpeciesSpec>,
    pub reactions: Vec<ReactionSpec>,
    /// Full-length mass-fraction composition of the fuel stream.
    pub fuel_stream: Vec<f64>,
    /// Full-length mass-fraction composition of the oxidizer stream.
    pub oxidizer_stream: Vec<f64>,
    species_index: HashMap<String, usize>,
    /// Per-species Bilger coupling coefficient; beta(Y) = sum_i coef_i Y_i.
    pub(crate) bilger_coef: Vec<f64>,
    pub(crate) beta_fuel: f64,
    pub(crate) beta_ox: f64,
}

impl Mechanism {
    pub fn n_species(&self) -> usize {
        self.species.len()
    }

    /// Dimension of the ODE state vector: temperature plus N-1 stored
    /// mass fractions.
    pub fn state_dim(&self) -> usize {
        self.species.len()
    }

    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.species_index.get(name).copied()
    }

    pub(crate) fn build_index(species: &[SpeciesSpec]) -> HashMap<String, usize> {
        species
            .iter()
            .enumerate()
            .map(|(i, s)| (s.name.clone(), i))
            .collect()
    }
}

/// Reactor state at constant pressure: temperature plus the first N-1
/// species mass fractions. The last species is implied as 1 - sum, so
/// total mass is conserved structurally.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionVector {
    /// Temperature, K.
    pub t: f64,
    /// Mass fractions of species 1..N-1.
    pub y: Vec<f64>,
}

impl CompositionVector {
    /// Build from a full-length mass-fraction vector, dropping the last
    /// (implied) component.
    pub fn from_full(t: f64, y_full: &[f64]) -> Self {
        CompositionVector { t, y: y_full[..y_full.len() - 1].to_vec() }
    }

    /// Mass fraction of the implied last species.
    pub fn implied_last(&self) -> f64 {
        1.0 - self.y.iter().sum::<f64>()
    }

    /// Full-length mass-fraction vector including the implied species.
    pub fn full_y(&self) -> Vec<f64> {
        let mut y = self.y.clone();
        y.push(self.implied_last());
        y
    }

    /// Flatten to the ODE state layout `[T, Y_1..Y_{N-1}]`.
    pub fn to_state(&self) -> Vec<f64> {
        let mut s = Vec::with_capacity(1 + self.y.len());
        s.push(self.t);
        s.extend_from_slice(&self.y);
        s
    }

    pub fn from_state(state: &[f64]) -> Self {
        CompositionVector { t: state[0], y: state[1..].to_vec() }
    }

    /// Check the state invariants: positive temperature, stored mass
    /// fractions in [0, 1], implied component in [0, 1] within `tol`.
    pub fn validate(&self, tol: f64) -> Result<(), KineticsError> {
        if !(self.t > 0.0) {
            return Err(KineticsError::Invalid(format!("non-positive temperature {}", self.t)));
        }
        for (i, &y) in self.y.iter().enumerate() {
            if !(-tol..=1.0 + tol).contains(&y) {
                return Err(KineticsError::Invalid(format!("Y[{i}] = {y} outside [0, 1]")));
            }
        }
        let last = self.implied_last();
        if !(-tol..=1.0 + tol).contains(&last) {
            return Err(KineticsError::Invalid(format!("implied last mass fraction {last} outside [0, 1]")));
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod test_states {
    use super::{CompositionVector, Mechanism};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Stoichiometric H2/air stored mass fractions (N2 implied).
    pub fn stoich_h2_air(m: &Mechanism) -> Vec<f64> {
        let y_h2 = 1.0 / (1.0 + 8.0 / 0.233);
        let mut y = vec![0.0; m.n_species() - 1];
        y[m.species_index("H2").unwrap()] = y_h2;
        y[m.species_index("O2").unwrap()] = (1.0 - y_h2) * 0.233;
        y
    }

    /// Random valid states: T in [800, 2500] K, random normalized Y.
    pub fn random_h2_air_states(m: &Mechanism, count: usize, seed: u64) -> Vec<CompositionVector> {
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
}
