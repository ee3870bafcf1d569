//! Branch analysis: ladder labels, crossings and their flux dependence.

mod crossings;
mod export;
mod label;
mod sweep;

pub use crossings::{find_crossings, CrossingEvent, CrossingKind, CrossingSearch};
pub use export::{write_branch_csv, write_crossings_json};
pub use label::{
    apply_creation, diagonalize_and_label, label_eigenstates, nt_expectation, usable_photons, BranchTable,
    LabeledSpectrum, AMBIGUITY, LADDER_BREAK,
};
pub use sweep::{
    ac_stark_curve, analyse_flux, least_squares_line, mist_map_over_flux, sign_change_roots, stark_extrapolation,
    FluxPoint, MistMap, PairCurve, StarkCurve, StarkExtrapolation, FLUX_RANGE,
};
