//! Measurement-induced state transitions in a cos(phi)-coupled transmon readout.
//!
//! * [`hilbert`] builds the cos(phi), transverse and three-mode Hamiltonians.
//! * [`branch`] labels dressed states along the photon ladder and finds crossings.
//! * [`classical`] treats the driven transmon as a kicked pendulum.
//! * [`readout`] models pointer states, thermometry, calibration and cavity ring-up.
//! * [`fitting`] fits circuit parameters to transition frequencies versus flux.
//!
//! Energies are in GHz with h = 1, times in ns.
// Negated comparisons below are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod branch;
pub mod classical;
pub mod error;
pub mod fitting;
pub mod hilbert;
pub mod linalg;
pub mod optim;
pub mod params;
pub mod readout;

pub use error::{Error, Result};
pub use params::{CircuitParams, HilbertSpec};
