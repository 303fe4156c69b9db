//! Limit laws, weight martingales and asymptotic expansions for Brownian
//! motion penalized by functionals of its one-sided maximum.
//!
//! The crate is organised bottom-up:
//!
//! * [`exact_laws`] holds closed-form densities, the regime partition and the
//!   density/penalty types everyone else consumes.
//! * [`martingales`] evaluates the weight martingales at a path state.
//! * [`quadrature`] is the deterministic oracle for rectangle events.
//! * [`samplers`] and [`penalized_mc`] generate paths and weighted estimates.
//! * [`expansion`] fits `1/t` coefficients and compares them to closed forms.
//! * [`harness`] carries verdicts, the KS test and the acceptance suite.

// `!(x > 0.0)` is the idiom that also rejects NaN; tabulated coefficients
// keep their published digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision, clippy::needless_range_loop)]

pub mod error;
pub mod exact_laws;
pub mod expansion;
pub mod harness;
pub mod integrate;
pub mod martingales;
pub mod penalized_mc;
pub mod quadrature;
pub mod samplers;
pub mod special;

pub use error::{Error, Result};
pub use exact_laws::{BivariatePenalty, DensitySpec, Regime};
pub use martingales::PathState;
pub use quadrature::RectEvent;
pub use samplers::{Path, RngStream};
