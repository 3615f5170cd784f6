//! Received-power optimization for an RIS-aided single-antenna link.
//!
//! The transmitter, receiver and every RIS element are z-directed thin-wire
//! dipoles; the RIS elements are terminated by tunable loads
//! `R₀ + j·x(s)`. [`em`] synthesizes the impedance matrices, [`channel`]
//! evaluates the end-to-end transfer function, [`gradient`] its exact
//! derivative in `x`, and [`optimizer`] runs projected gradient ascent on
//! `x` inside a reactance box.

pub mod channel;
pub mod em;
pub mod error;
pub mod gradient;
pub mod impedance;
pub mod linalg;
pub mod metrics;
pub mod optimizer;
pub mod quadrature;
pub mod synthetic;

pub use channel::{Bounds, ChannelEval, Link, RisLoad};
pub use error::{Error, Result};
pub use impedance::ImpedanceSet;
pub use metrics::MultCounter;
pub use optimizer::{optimize, OptimizeOutcome, OptimizerConfig};
