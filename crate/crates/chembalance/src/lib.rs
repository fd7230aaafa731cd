//! Load-balanced finite-rate chemistry at desk scale.
//!
//! The crate solves per-cell constant-pressure reactor problems with a
//! linearly implicit Rosenbrock method, using either a hand-derived
//! analytical Jacobian or a finite-difference one, and redistributes the
//! per-cell work between concurrent workers so that no single worker
//! becomes the bottleneck of a synchronized iteration. A zonal reference
//! mapping on the Bilger mixture fraction skips solves for cells whose
//! thermochemical state matches an already-solved reference.
//!
//! The main pieces:
//!
//! * [`kinetics`] — mechanism representation, thermodynamics, reaction
//!   rates, the chemistry ODE right-hand side and its Jacobians.
//! * [`odesolver`] — dense LU with partial pivoting and the adaptive
//!   Rosenbrock integrator.
//! * [`balancer`] — deterministic work redistribution between workers
//!   over a message-passing contract.
//! * [`refmap`] — mixture-fraction zone assignment and solution mapping.
//! * [`harness`] — the 2D shear-layer benchmark, the single-cell timing
//!   benchmark, and report emission.
//!
//! See the `examples/` directory for one runnable example per capability,
//! and the `chembalance` binary for the benchmark CLI.

pub mod balancer;
pub mod clock;
pub mod dense;
pub mod harness;
pub mod kinetics;
pub mod odesolver;
pub mod refmap;

/// The bundled hydrogen/oxygen mechanism (9 species including N2).
pub const H2_O2_MECH: &str = include_str!("../data/h2_o2.mech");
