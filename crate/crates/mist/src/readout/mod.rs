//! Readout chain: pointer states, thresholds, thermometry, photon-number
//! calibration and the linear cavity response.

mod calib;
mod cavity;
mod pointer;
mod thermal;

pub use calib::{photon_calibration, Calibration};
pub use cavity::{
    cavity_response, optimize_clear, square_ring_up_analytic, write_envelope_csv, CavityResponse, ClearOptions,
    ClearResult, ClearShape, PulseEnvelope, Segment, MIN_SEGMENT_NS, PROTOCOL_NS, SETTLE_FRACTION,
};
pub use pointer::{
    classify, confusion, linear_chi, lorentzian_transmission, pointer_positions, read_iq_csv, sample_shots, write_iq_csv,
    Confusion, Label, PointerState, Thresholds, DEFAULT_RADIUS_FACTOR, DEFAULT_SNR, HIGH_STATE_RADIUS_FACTOR, RESOLVED,
};
pub use thermal::{boltzmann, thermal_fit, ThermalFitResult, ThermalStatus, FITTED_STATES, RESOLUTION_MK};
