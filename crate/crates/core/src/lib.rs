//! A numerical laboratory for single-spin-flip (Glauber) kinetic Ising
//! dynamics in a pure boundary phase, together with a one-dimensional
//! birth-death caricature of droplet shrinkage.
//!
//! The crate provides three layers:
//!
//! * exact small-system oracles: full Gibbs enumeration, dense generators,
//!   and inverse spectral gaps on boxes of at most a few thousand states;
//! * stochastic machinery: event-driven and uniformized continuous-time
//!   dynamics, a monotone grand coupling, coarse-grained block observables,
//!   and variational lower bounds on relaxation constants estimated by MCMC;
//! * the birth-death chain with stationary law exp(-x^alpha),
//!   alpha = (d-1)/d, where Hardy-inequality constants sandwich the exact
//!   gap and certify its scaling in the box side.
//!
//! Everything numeric is generic over the [`Real`] scalar (f32 or f64);
//! [`Scalar`] fixes the default precision used by the experiment drivers.

pub mod birth_death;
pub mod coarse;
pub mod coupling;
pub mod droplet;
pub mod dynamics;
mod error;
pub mod generator;
pub mod gibbs;
pub mod lattice;
pub mod moments;
pub mod numeric;
pub mod rates;
pub mod testfn;
pub mod variational;

pub use error::{Error, Result};
pub use numeric::Real;
pub use rates::{RateKind, RateModel};

/// Default floating-point precision for experiments and the CLI.
pub type Scalar = f64;
