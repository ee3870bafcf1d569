//! Truncated Hilbert spaces, operators and the Hamiltonian models.

mod models;
mod modes;
pub mod ops;
mod transmon;

pub use models::{
    build_cosphi_two_mode, build_three_mode, build_transverse_two_mode, cosphi_two_mode_from,
    matched_transverse_coupling, perturbative_chi, transverse_two_mode_from, PerturbativeChi,
    ThreeModeWorkspace, THREE_MODE_DIM_CAP,
};
pub use modes::{normal_modes, DerivedModes};
pub use transmon::{solve_transmon, transmon_eigensystem, TransmonEigenbasis};

/// Which two-mode model to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Cosphi,
    Transverse,
}

impl std::str::FromStr for ModelKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cosphi" => Ok(Self::Cosphi),
            "transverse" => Ok(Self::Transverse),
            other => Err(format!("unknown model '{other}' (expected cosphi or transverse)")),
        }
    }
}

/// Build the requested two-mode model at the flux stored in `p`. The
/// transverse model uses the matched coupling.
pub fn build_two_mode(
    kind: ModelKind,
    p: &crate::params::CircuitParams,
    spec: &crate::params::HilbertSpec,
) -> crate::error::Result<crate::linalg::HermitianOperator> {
    let modes = normal_modes(p)?;
    match kind {
        ModelKind::Cosphi => build_cosphi_two_mode(p, &modes, spec),
        ModelKind::Transverse => build_transverse_two_mode(p, &modes, matched_transverse_coupling(&modes), spec),
    }
}
