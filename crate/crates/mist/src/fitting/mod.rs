//! Weighted least-squares fit of circuit parameters to transition frequencies
//! versus flux.

mod fit;
mod model;
mod problem;

pub use fit::{fit, fit_report, jacobian_condition, FitOptions, FitResult, StartSummary};
pub use model::{fit_spec, model_transitions, FluxSpectrum, TransitionId, TransitionModel, MIN_LABEL_WEIGHT};
pub use problem::{
    read_points_csv, synthetic_points, weighted_cost, write_points_csv, Anchor, CostBreakdown, DigitizedPoint, FitProblem,
    FreeParam, Observable, PointResidual, INVALID_PENALTY,
};
