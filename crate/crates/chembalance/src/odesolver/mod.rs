//! Adaptive stiff integration of single-cell chemistry problems.

pub mod lu;
mod rosenbrock;

pub use lu::{lu_factor, lu_solve, LuFactors};
pub use rosenbrock::{rosenbrock_step, rosenbrock_step_ws, OdeSystem, RosenbrockWorkspace};

use crate::clock::thread_cpu_seconds;
use crate::dense::DenseMatrix;
use crate::kinetics::{
    self, CompositionVector, KineticsError, Mechanism, RateWorkspace,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OdeError {
    #[error("singular matrix at column {column}")]
    SingularMatrix { column: usize },
    #[error("right-hand side evaluation failed: {0}")]
    Rhs(#[from] KineticsError),
    #[error("step size underflow at t = {t:.3e} s (h = {h:.3e}); state: {state:?}")]
    StiffnessFailure { t: f64, h: f64, state: Vec<f64> },
}

/// Absolute and relative error tolerances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceSpec {
    pub abstol: f64,
    pub reltol: f64,
}

impl ToleranceSpec {
    pub fn new(abstol: f64, reltol: f64) -> Self {
        assert!(abstol > 0.0 && reltol > 0.0);
        ToleranceSpec { abstol, reltol }
    }
}

/// Which Jacobian the integrator hands to the Rosenbrock stepper.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacobianMode {
    /// Exact hand-derived Jacobian.
    Analytical,
    /// Central finite differences with relative step 1e-6.
    FiniteDifference,
}

/// Work counters and timing for one integration.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct IntegratorStats {
    pub steps_accepted: u64,
    pub steps_rejected: u64,
    pub rhs_evals: u64,
    pub jacobian_evals: u64,
    pub lu_factorizations: u64,
    pub cpu_time: f64,
}

impl IntegratorStats {
    pub fn accumulate(&mut self, other: &IntegratorStats) {
        self.steps_accepted += other.steps_accepted;
        self.steps_rejected += other.steps_rejected;
        self.rhs_evals += other.rhs_evals;
        self.jacobian_evals += other.jacobian_evals;
        self.lu_factorizations += other.lu_factorizations;
        self.cpu_time += other.cpu_time;
    }
}

/// Weighted root-mean-square error norm:
/// `sqrt( 1/n sum (err_i / (abstol + reltol |ref_i|))^2 )`.
pub fn wrms_norm(err: &[f64], y_ref: &[f64], tol: ToleranceSpec) -> f64 {
    assert_eq!(err.len(), y_ref.len());
    let n = err.len() as f64;
    let sum: f64 = err
        .iter()
        .zip(y_ref)
        .map(|(e, r)| {
            let w = tol.abstol + tol.reltol * r.abs();
            (e / w) * (e / w)
        })
        .sum();
    (sum / n).sqrt()
}

const FD_ETA: f64 = 1e-6;
const H0_CAP: f64 = 1e-7;
const SAFETY: f64 = 0.9;
const GROW_MAX: f64 = 5.0;
const SHRINK_MIN: f64 = 0.2;
const H_UNDERFLOW: f64 = 1e-15;

/// Driver-side counters from the adaptive loop.
#[derive(Debug, Default, Clone, Copy)]
pub struct DriverStats {
    pub steps_accepted: u64,
    pub steps_rejected: u64,
    pub lu_factorizations: u64,
}

/// Adaptive integration of any [`OdeSystem`] from 0 to `dt`.
///
/// Accepts a step when the WRMS norm of the embedded error estimate is
/// at most 1; the next step is `h min(5, max(0.2, 0.9 err^(-1/4)))`.
/// The final partial step lands exactly on `dt`.
pub fn integrate_system<S: OdeSystem>(
    sys: &mut S,
    y0: &[f64],
    dt: f64,
    tol: ToleranceSpec,
    h0_cap: f64,
) -> Result<(Vec<f64>, DriverStats), OdeError> {
    assert!(dt > 0.0);
    let n = sys.dim();
    let mut stats = DriverStats::default();
    let mut ws = RosenbrockWorkspace::new(n);
    let mut y = y0.to_vec();
    let mut f0 = vec![0.0; n];
    let mut y_new = vec![0.0; n];
    let mut err_vec = vec![0.0; n];
    let mut t = 0.0f64;

    sys.rhs(&y, &mut f0)?;
    // A quiescent system needs exactly one step across the interval.
    let mut h = if f0.iter().all(|&v| v == 0.0) {
        dt
    } else {
        dt.min(h0_cap)
    };

    loop {
        let remaining = dt - t;
        if remaining <= 0.0 {
            break;
        }
        let mut last = false;
        if h >= remaining * (1.0 - 1e-12) {
            h = remaining;
            last = true;
        }
        if h < H_UNDERFLOW * dt {
            return Err(OdeError::StiffnessFailure { t, h, state: y });
        }
        stats.lu_factorizations += 1;
        match rosenbrock_step_ws(sys, &y, &f0, h, &mut ws, &mut y_new, &mut err_vec) {
            Ok(()) => {
                let err = wrms_norm(&err_vec, &y, tol);
                if err <= 1.0 {
                    stats.steps_accepted += 1;
                    t += h;
                    std::mem::swap(&mut y, &mut y_new);
                    if last || dt - t <= 0.0 {
                        break;
                    }
                    sys.rhs(&y, &mut f0)?;
                    h *= step_factor(err);
                } else {
                    stats.steps_rejected += 1;
                    h *= step_factor(err);
                }
            }
            Err(OdeError::SingularMatrix { .. }) => {
                // retry with a halved step; the underflow guard above
                // converts persistent failure into a stiffness error
                stats.steps_rejected += 1;
                h *= 0.5;
            }
            Err(OdeError::Rhs(_)) => {
                // a stage state left the valid thermo range; shrink
                stats.steps_rejected += 1;
                h *= 0.5;
            }
            Err(e) => return Err(e),
        }
    }
    Ok((y, stats))
}

#[inline]
fn step_factor(err: f64) -> f64 {
    if err == 0.0 {
        GROW_MAX
    } else {
        (SAFETY * err.powf(-0.25)).clamp(SHRINK_MIN, GROW_MAX)
    }
}

/// The chemistry ODE as an [`OdeSystem`], with work counters.
pub struct ChemistrySystem<'a> {
    mech: &'a Mechanism,
    pressure: f64,
    mode: JacobianMode,
    abstol: f64,
    ws: RateWorkspace,
    pub rhs_evals: u64,
    pub jacobian_evals: u64,
}

impl<'a> ChemistrySystem<'a> {
    pub fn new(mech: &'a Mechanism, pressure: f64, mode: JacobianMode, tol: ToleranceSpec) -> Self {
        ChemistrySystem {
            mech,
            pressure,
            mode,
            abstol: tol.abstol,
            ws: RateWorkspace::new(mech),
            rhs_evals: 0,
            jacobian_evals: 0,
        }
    }
}

impl OdeSystem for ChemistrySystem<'_> {
    fn dim(&self) -> usize {
        self.mech.state_dim()
    }

    fn rhs(&mut self, y: &[f64], out: &mut [f64]) -> Result<(), OdeError> {
        self.rhs_evals += 1;
        kinetics::rhs_state(self.mech, y, self.pressure, &mut self.ws, out)?;
        Ok(())
    }

    fn jacobian(&mut self, y: &[f64], out: &mut DenseMatrix) -> Result<(), OdeError> {
        self.jacobian_evals += 1;
        match self.mode {
            JacobianMode::Analytical => {
                kinetics::analytical_jacobian_state(self.mech, y, self.pressure, &mut self.ws, out)?;
            }
            JacobianMode::FiniteDifference => {
                let evals = kinetics::fd_jacobian_state(
                    self.mech,
                    y,
                    self.pressure,
                    FD_ETA,
                    self.abstol,
                    &mut self.ws,
                    out,
                )?;
                self.rhs_evals += evals as u64;
            }
        }
        Ok(())
    }
}

/// Integrate a single-cell chemistry problem over `dt` seconds at
/// constant pressure. Pure in its arguments: identical inputs give
/// bit-identical outputs (only `cpu_time` in the stats varies).
pub fn integrate(
    m: &Mechanism,
    phi0: &CompositionVector,
    pressure: f64,
    dt: f64,
    tol: ToleranceSpec,
    mode: JacobianMode,
) -> Result<(CompositionVector, IntegratorStats), OdeError> {
    let t0 = thread_cpu_seconds();
    let mut sys = ChemistrySystem::new(m, pressure, mode, tol);
    let (y, d) = integrate_system(&mut sys, &phi0.to_state(), dt, tol, H0_CAP)?;
    let stats = IntegratorStats {
        steps_accepted: d.steps_accepted,
        steps_rejected: d.steps_rejected,
        rhs_evals: sys.rhs_evals,
        jacobian_evals: sys.jacobian_evals,
        lu_factorizations: d.lu_factorizations,
        cpu_time: thread_cpu_seconds() - t0,
    };
    Ok((CompositionVector::from_state(&y), stats))
}
