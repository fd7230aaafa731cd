//! Benchmark run configuration and the flat `key = value` config format.

use super::HarnessError;
use crate::kinetics::{parse_mechanism, Mechanism};
use crate::odesolver::ToleranceSpec;
use crate::refmap::RefMapConfig;

/// Which solver configuration the benchmark runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Finite-difference Jacobian, no balancing, no reference mapping.
    Standard,
    /// Finite-difference Jacobian with balancing and reference mapping.
    Balanced,
    /// Analytical Jacobian with balancing and reference mapping.
    BalancedAnalytic,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Mode, HarnessError> {
        match s {
            "standard" => Ok(Mode::Standard),
            "balanced" => Ok(Mode::Balanced),
            "balanced-analytic" | "balanced+analytic" => Ok(Mode::BalancedAnalytic),
            other => Err(HarnessError::Config(format!(
                "unknown mode `{other}` (expected standard | balanced | balanced-analytic)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Mode::Standard => "standard",
            Mode::Balanced => "balanced",
            Mode::BalancedAnalytic => "balanced-analytic",
        }
    }
}

/// Mechanism source: this sentinel selects the bundled H2/O2 mechanism,
/// anything else is a file path.
pub const BUILTIN_MECH: &str = "builtin:h2";

/// Everything a benchmark run needs. The flat config file mirrors these
/// field names; see [`RunConfig::parse`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mechanism: String,
    pub nx: usize,
    pub ny: usize,
    pub workers: usize,
    pub iterations: usize,
    /// Chemistry interval per iteration, s.
    pub dt: f64,
    pub abstol: f64,
    pub reltol: f64,
    pub mode: Mode,
    pub refmap: RefMapConfig,
    /// Mixing diffusivity, m2/s.
    pub diffusivity: f64,
    /// Domain length in x, m.
    pub domain_length: f64,
    /// Temperature floor of the initial profile, K.
    pub t_base: f64,
    /// Interface peak temperature, K.
    pub t_peak: f64,
    /// Amplitude of the seeded per-cell temperature noise, K.
    pub t_noise: f64,
    pub pressure: f64,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mechanism: BUILTIN_MECH.to_string(),
            nx: 64,
            ny: 64,
            workers: 8,
            iterations: 50,
            dt: 2e-5,
            abstol: 1e-8,
            reltol: 1e-5,
            mode: Mode::Standard,
            refmap: RefMapConfig::default(),
            diffusivity: 1e-4,
            domain_length: 0.008,
            t_base: 800.0,
            t_peak: 1500.0,
            t_noise: 0.5,
            pressure: 101_325.0,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn tolerances(&self) -> ToleranceSpec {
        ToleranceSpec::new(self.abstol, self.reltol)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.workers < 1 {
            return Err(HarnessError::Config("workers must be >= 1".into()));
        }
        if self.nx * self.ny < self.workers {
            return Err(HarnessError::Config(format!(
                "grid {}x{} smaller than worker count {}",
                self.nx, self.ny, self.workers
            )));
        }
        if !(self.dt > 0.0 && self.domain_length > 0.0 && self.pressure > 0.0) {
            return Err(HarnessError::Config("dt, domain_length and pressure must be positive".into()));
        }
        Ok(())
    }

    /// Parse the flat `key = value` format. `#` starts a comment; blank
    /// lines are ignored; unknown keys are errors. Keys match the field
    /// names, with the nested refmap fields spelled `refmap.z_bins`,
    /// `refmap.eps_z`, `refmap.eps_t` and `refmap.enabled`.
    pub fn parse(text: &str) -> Result<RunConfig, HarnessError> {
        let mut c = RunConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {}: expected `key = value`", lineno + 1))
            })?;
            c.set(key.trim(), value.trim())
                .map_err(|e| HarnessError::Config(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(c)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
            v.parse().map_err(|_| format!("bad value `{v}` for {key}"))
        }
        match key {
            "mechanism" => self.mechanism = value.to_string(),
            "nx" => self.nx = num(key, value)?,
            "ny" => self.ny = num(key, value)?,
            "workers" => self.workers = num(key, value)?,
            "iterations" => self.iterations = num(key, value)?,
            "dt" => self.dt = num(key, value)?,
            "abstol" => self.abstol = num(key, value)?,
            "reltol" => self.reltol = num(key, value)?,
            "mode" => self.mode = Mode::parse(value).map_err(|e| e.to_string())?,
            "refmap.enabled" => self.refmap.enabled = num(key, value)?,
            "refmap.z_bins" => self.refmap.z_bins = num(key, value)?,
            "refmap.eps_z" => self.refmap.eps_z = num(key, value)?,
            "refmap.eps_t" => self.refmap.eps_t = num(key, value)?,
            "diffusivity" => self.diffusivity = num(key, value)?,
            "domain_length" => self.domain_length = num(key, value)?,
            "t_base" => self.t_base = num(key, value)?,
            "t_peak" => self.t_peak = num(key, value)?,
            "t_noise" => self.t_noise = num(key, value)?,
            "pressure" => self.pressure = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }
}

/// Load the configured mechanism: the builtin sentinel or a file path.
pub fn load_mechanism(source: &str) -> Result<Mechanism, HarnessError> {
    let text = if source == BUILTIN_MECH {
        crate::H2_O2_MECH.to_string()
    } else {
        std::fs::read_to_string(source).map_err(|source_err| HarnessError::Io {
            path: source.to_string(),
            source: source_err,
        })?
    };
    Ok(parse_mechanism(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn parse_round_trip_of_each_key() {
        let text = "\
            # benchmark setup\n\
            nx = 32\n\
            ny = 16\n\
            workers = 4\n\
            iterations = 10\n\
            dt = 1e-6\n\
            abstol = 1e-9\n\
            reltol = 1e-6\n\
            mode = balanced-analytic\n\
            refmap.enabled = false\n\
            refmap.z_bins = 8\n\
            refmap.eps_z = 0.01\n\
            refmap.eps_t = 2.5\n\
            diffusivity = 2e-4\n\
            seed = 7\n";
        let c = RunConfig::parse(text).unwrap();
        assert_eq!(c.nx, 32);
        assert_eq!(c.ny, 16);
        assert_eq!(c.workers, 4);
        assert_eq!(c.mode, Mode::BalancedAnalytic);
        assert!(!c.refmap.enabled);
        assert_eq!(c.refmap.z_bins, 8);
        assert_eq!(c.seed, 7);
    }

    #[test]
    fn unknown_key_is_rejected_with_line() {
        let err = RunConfig::parse("nx = 4\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn grid_smaller_than_workers_is_invalid() {
        let mut c = RunConfig::default();
        c.nx = 1;
        c.ny = 2;
        c.workers = 4;
        assert!(c.validate().is_err());
    }

    #[test]
    fn builtin_mechanism_loads() {
        let m = load_mechanism(BUILTIN_MECH).unwrap();
        assert_eq!(m.n_species(), 9);
    }
}
