//! Ergospheres, event horizons and wave containment for stationary wave
//! equations in moving media ("artificial black holes").
//!
//! Pipeline: [`metric`] → [`ergosphere`] → [`bicharacteristics`] →
//! [`horizon`] → [`stability`], cross-checked by [`wavesim`].

pub mod bicharacteristics;
pub mod cli;
pub mod config;
pub mod curve;
pub mod ergosphere;
pub mod horizon;
pub mod io;
pub mod parallel;
pub mod error;
pub mod metric;
pub mod stability;
pub mod wavesim;
pub mod ode;

pub use error::{Error, Result};
