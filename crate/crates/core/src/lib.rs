//! Donor-acceptor rectifier models with time-resolved and steady-state
//! Fisher information.

pub mod cli;
pub mod distributions;
pub mod dual;
pub mod error;
pub mod fisher;
pub mod generator;
pub mod io;
pub mod model;
pub mod multilevel;
pub mod ode;
pub mod sweep;
pub mod tls;

pub use error::{Error, Result};
pub use model::{ModelKind, ModelParams, Param};
