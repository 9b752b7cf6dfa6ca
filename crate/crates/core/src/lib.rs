//! Driven-dissipative Jaynes-Cummings model: mean-field steady states,
//! quantum trajectories, telegraph-signal analysis and a two-component
//! bright-state model.

// `!(x > 0.0)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bright;
pub mod classical;
pub mod error;
pub mod exec;
pub mod mcwf;
pub mod ode;
pub mod params;
pub mod poly;
pub mod state;
pub mod telegraph;

pub use error::{Error, Result};
pub use exec::{par_map, Execution};
pub use params::SystemParams;
pub use state::{expectations, JcOperator, Observables, PureState, Qubit, QubitState, C64};
