//! Joint estimation of plant state and packet-loss occurrences in networked
//! control systems whose input links drop packets according to a Markov chain.
//!
//! * [`model`]: plant, input-output form, loss strategies and the mode algebra
//! * [`markov`]: chains over the modes
//! * [`filters`]: Kalman filter, mode posterior recursion and the estimators
//! * [`sim`]: seeded trials and Monte Carlo runs
//! * [`metrics`]: mode detection error, state RMSE and cross-trial summaries
//! * [`cli`]: experiment configs and the `ncs` command line

pub mod cli;
pub mod error;
pub mod filters;
pub mod linalg;
pub mod markov;
pub mod metrics;
pub mod model;
pub mod sim;

pub use error::{Error, Result};
