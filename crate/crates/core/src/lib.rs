//! Exact microcanonical dimension counting and macroscopic adiabatic
//! accessibility for families of independent-site quantum models.
//!
//! The crate is organised bottom-up:
//!
//! * [`spectra`] builds model families and counts joint eigenvalue
//!   multiplicities exactly, either as a full table or by streaming box
//!   counts over site compositions.
//! * [`microcanonical`] turns macrostates into downward sets and shells and
//!   reports their dimensions, Boltzmann entropies and flat states.
//! * [`regularization`] produces entropy-density sequences over scale grids,
//!   finite-size limit estimates, upper/lower entropies over schedule
//!   families and the stepwise `δ⁽⁰⁾` schedule.
//! * [`accessibility`] decides convertibility: majorization, the η-window
//!   and `δ′` constructions, and the three asymptotic verdict rules.
//! * [`channels`] builds doubly stochastic witnesses (T-transform chains),
//!   pinching maps, trace distances and the impossibility bound.
//!
//! Probability-vector code is generic over [`Scalar`], implemented for
//! `f32`, `f64` and exact [`Rational`]s.

pub mod accessibility;
pub mod channels;
mod error;
pub mod microcanonical;
pub mod regularization;
mod scalar;
pub mod serde_util;
pub mod spectra;

pub use error::{Error, Result};
pub use scalar::{ln_biguint, parse_rational, rational_from_f64, ExtReal, Rational, Scalar};

pub use accessibility::{EtaWindow, Verdict};
pub use channels::{DoublyStochasticMap, PinchingMap};
pub use microcanonical::{FlatState, Macrostate, ShellConvention};
pub use regularization::{DeltaSchedule, EntropySequence, LimitEstimate};
pub use spectra::{JointSpectrum, ModelSystem};

/// Arbitrary-precision dimension count.
pub type Count = num_bigint::BigUint;

/// Doubly stochastic map over double-precision weights.
pub type MapF64 = DoublyStochasticMap<f64>;
/// Doubly stochastic map over single-precision weights.
pub type MapF32 = DoublyStochasticMap<f32>;
/// Doubly stochastic map with exact rational entries.
pub type ExactMap = DoublyStochasticMap<Rational>;

/// Run-length spectrum over double-precision weights.
pub type RunsF64 = accessibility::RunSpectrum<f64>;
/// Run-length spectrum with exact rational weights.
pub type ExactRuns = accessibility::RunSpectrum<Rational>;
