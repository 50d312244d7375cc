//! Numerical laboratory for two-player non-local games under anchored input
//! distributions.
//!
//! The crate is organised bottom-up:
//!
//! - [`distrib`]: finite joint distributions over named axes, kernels, events,
//!   sampling (including correlated sampling) and the classical lemma checks.
//! - [`qmath`]: density operators over labelled tensor factors, distance and
//!   entropy measures, smooth max-information witnesses, Uhlmann unitaries and
//!   the quantum lemma checks.
//! - [`games`]: the game model, anchoring and repetition transforms, exact
//!   classical values, see-saw entangled lower bounds and theorem bounds.
//! - [`breaker`]: the anchored distribution, the correlation-breaking joint and
//!   the success-conditioned states with their Uhlmann repair unitaries.
//! - [`lab`]: the seeded verification battery.

pub mod breaker;
pub mod distrib;
pub mod games;
pub mod lab;
pub mod qmath;
pub mod rng;

pub use distrib::{Axis, DistribError, Event, FiniteDistribution, Kernel};
pub use games::{Game, GameError};
pub use qmath::{DensityOperator, HilbertSpace, PureState, QmathError};
