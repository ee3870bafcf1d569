//! Transition frequencies of the three-mode model versus flux.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{normal_modes, ThreeModeWorkspace, THREE_MODE_DIM_CAP};
use crate::linalg::eigh;
use crate::params::{CircuitParams, HilbertSpec};

/// Squared overlap below which a product-state label is rejected.
pub const MIN_LABEL_WEIGHT: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionId {
    C01,
    A01,
    Q01,
    Q02,
    Q04,
}

impl TransitionId {
    pub const ALL: [TransitionId; 5] = [Self::C01, Self::A01, Self::Q01, Self::Q02, Self::Q04];

    /// Upper product state (transmon, ancilla, cavity); the lower one is the ground state.
    pub fn upper_state(self) -> (usize, usize, usize) {
        match self {
            Self::C01 => (0, 0, 1),
            Self::A01 => (0, 1, 0),
            Self::Q01 => (1, 0, 0),
            Self::Q02 => (2, 0, 0),
            Self::Q04 => (4, 0, 0),
        }
    }
}

impl fmt::Display for TransitionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Self::C01 => "c01",
            Self::A01 => "a01",
            Self::Q01 => "q01",
            Self::Q02 => "q02",
            Self::Q04 => "q04",
        };
        f.write_str(s)
    }
}

impl FromStr for TransitionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.to_string() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown transition '{s}' (c01, a01, q01, q02, q04)")))
    }
}

/// Small three-mode truncation used inside the fit: D = 8 transmon levels and
/// three Fock states per oscillator.
pub fn fit_spec() -> HilbertSpec {
    HilbertSpec { n_charge: 121, d: 8, d_c: 3, d_a: 3, fock_buffer: 40 }
}

/// Labeled low-lying levels at one flux. `None` marks a state whose best
/// eigenstate overlap squared stays below [`MIN_LABEL_WEIGHT`].
#[derive(Debug, Clone, Serialize)]
pub struct FluxSpectrum {
    pub flux_ext: f64,
    pub transitions: Vec<(TransitionId, Option<f64>)>,
    /// E(1,0,1) - E(1,0,0) - E(0,0,1) + E(0,0,0)
    pub chi_qc: Option<f64>,
}

impl FluxSpectrum {
    pub fn get(&self, id: TransitionId) -> Option<f64> {
        self.transitions.iter().find(|(t, _)| *t == id).and_then(|(_, f)| *f)
    }
}

/// Evaluates the model at many fluxes for one parameter set, reusing the
/// flux-independent transmon solution.
pub struct TransitionModel {
    p: CircuitParams,
    spec: HilbertSpec,
    work: ThreeModeWorkspace,
}

impl TransitionModel {
    pub fn new(p: &CircuitParams, spec: &HilbertSpec) -> Result<Self> {
        p.validate()?;
        spec.validate(p)?;
        Ok(Self { p: *p, spec: *spec, work: ThreeModeWorkspace::new(p, spec, THREE_MODE_DIM_CAP)? })
    }

    pub fn at_flux(&self, flux_ext: f64) -> Result<FluxSpectrum> {
        let p = self.p.with_flux(flux_ext);
        let modes = normal_modes(&p)?;
        let h = self.work.build(&p, &modes)?;
        let eig = eigh(&h.data)?;
        let (d_a, d_c) = (self.spec.d_a, self.spec.d_c);
        let index = |(j, a, c): (usize, usize, usize)| (j * d_a + a) * d_c + c;
        // eigenstate with the largest weight on a product state
        let label = |state: (usize, usize, usize)| -> Option<f64> {
            let i = index(state);
            let (k, w) = (0..eig.len())
                .map(|k| (k, eig.vectors[(i, k)].powi(2)))
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))?;
            (w >= MIN_LABEL_WEIGHT).then_some(eig.values[k])
        };
        let e0 = label((0, 0, 0));
        let rel = |s| Some(label(s)? - e0?);
        let transitions = TransitionId::ALL.iter().map(|&t| (t, rel(t.upper_state()))).collect();
        let chi_qc = (|| Some(rel((1, 0, 1))? - rel((1, 0, 0))? - rel((0, 0, 1))?))();
        Ok(FluxSpectrum { flux_ext, transitions, chi_qc })
    }
}

/// Predicted frequencies `[flux][id]`; `None` where labeling failed.
pub fn model_transitions(
    p: &CircuitParams,
    flux_grid: &[f64],
    ids: &[TransitionId],
    spec: &HilbertSpec,
) -> Result<Vec<Vec<Option<f64>>>> {
    let model = TransitionModel::new(p, spec)?;
    flux_grid
        .iter()
        .map(|&f| {
            let s = model.at_flux(f)?;
            Ok(ids.iter().map(|&id| s.get(id)).collect())
        })
        .collect()
}
