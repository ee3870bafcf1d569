//! Digitized data, anchors, free parameters and the weighted cost.

use std::io::{Read, Write};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::model::{FluxSpectrum, TransitionId, TransitionModel};
use crate::error::{Error, Result};
use crate::params::{CircuitParams, HilbertSpec};

/// Cost added for every point whose transition could not be labeled.
pub const INVALID_PENALTY: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DigitizedPoint {
    #[serde(rename = "flux")]
    pub flux_ext: f64,
    pub transition_id: TransitionId,
    #[serde(rename = "freq_GHz")]
    pub freq: f64,
    /// Bandwidth used to weight the point (GHz).
    #[serde(rename = "band_GHz")]
    pub band_weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    OmegaQ,
    OmegaC,
    ChiQc,
}

/// Zero-flux target with a tolerance window, both in GHz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub observable: Observable,
    pub target: f64,
    pub window: f64,
}

impl Anchor {
    /// omega_q = 2.0687 GHz (5 MHz), omega_c = 7.294 GHz (10 MHz),
    /// chi_qc = -2.02 MHz (200 kHz).
    pub fn measured() -> Vec<Anchor> {
        vec![
            Anchor { observable: Observable::OmegaQ, target: 2.0687, window: 0.005 },
            Anchor { observable: Observable::OmegaC, target: 7.294, window: 0.010 },
            Anchor { observable: Observable::ChiQc, target: -0.00202, window: 0.0002 },
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FreeParam {
    #[serde(rename = "E_Cq")]
    ECq,
    #[serde(rename = "E_Ca")]
    ECa,
    #[serde(rename = "E_J")]
    EJ,
    #[serde(rename = "L_a0")]
    La0,
    #[serde(rename = "omega_c_bare")]
    OmegaCBare,
    #[serde(rename = "g_ac")]
    GAc,
}

impl FreeParam {
    pub const ALL: [FreeParam; 6] = [Self::ECq, Self::ECa, Self::EJ, Self::La0, Self::OmegaCBare, Self::GAc];

    pub fn get(self, p: &CircuitParams) -> f64 {
        match self {
            Self::ECq => p.e_cq,
            Self::ECa => p.e_ca,
            Self::EJ => p.e_j,
            Self::La0 => p.l_a0,
            Self::OmegaCBare => p.omega_c_bare,
            Self::GAc => p.g_ac,
        }
    }

    pub fn set(self, p: &mut CircuitParams, v: f64) {
        match self {
            Self::ECq => p.e_cq = v,
            Self::ECa => p.e_ca = v,
            Self::EJ => p.e_j = v,
            Self::La0 => p.l_a0 = v,
            Self::OmegaCBare => p.omega_c_bare = v,
            Self::GAc => p.g_ac = v,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::ECq => "E_Cq",
            Self::ECa => "E_Ca",
            Self::EJ => "E_J",
            Self::La0 => "L_a0",
            Self::OmegaCBare => "omega_c_bare",
            Self::GAc => "g_ac",
        }
    }
}

impl std::str::FromStr for FreeParam {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown fit parameter '{s}'")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FitProblem {
    pub points: Vec<DigitizedPoint>,
    pub anchors: Vec<Anchor>,
    pub free_params: Vec<FreeParam>,
    /// (lower, upper) per free parameter.
    pub bounds: Vec<(f64, f64)>,
    pub spec: HilbertSpec,
}

impl FitProblem {
    /// Bounds of +-`fraction` around the values in `initial`.
    pub fn new(
        points: Vec<DigitizedPoint>,
        anchors: Vec<Anchor>,
        free_params: Vec<FreeParam>,
        initial: &CircuitParams,
        fraction: f64,
    ) -> Result<Self> {
        let bounds = free_params
            .iter()
            .map(|fp| {
                let v = fp.get(initial);
                let (a, b) = (v * (1.0 - fraction), v * (1.0 + fraction));
                (a.min(b), a.max(b))
            })
            .collect();
        let problem = Self { points, anchors, free_params, bounds, spec: super::model::fit_spec() };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(pt) = self.points.iter().find(|p| !(p.freq > 0.0 && p.band_weight > 0.0)) {
            return Err(Error::InvalidParameter(format!("point needs freq > 0 and band > 0: {pt:?}")));
        }
        if let Some(a) = self.anchors.iter().find(|a| !(a.window > 0.0)) {
            return Err(Error::InvalidParameter(format!("anchor window must be positive: {a:?}")));
        }
        if self.bounds.len() != self.free_params.len() || self.bounds.iter().any(|(a, b)| !(a < b)) {
            return Err(Error::InvalidParameter("one increasing (lower, upper) bound per free parameter".into()));
        }
        Ok(())
    }

    /// Distinct fluxes in first-seen order.
    pub fn fluxes(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        let needs_zero = !self.anchors.is_empty();
        for f in self.points.iter().map(|p| p.flux_ext).chain(needs_zero.then_some(0.0)) {
            if !out.iter().any(|g| g.to_bits() == f.to_bits()) {
                out.push(f);
            }
        }
        out
    }

    pub fn apply(&self, base: &CircuitParams, values: &[f64]) -> CircuitParams {
        let mut p = *base;
        for (fp, &v) in self.free_params.iter().zip(values) {
            fp.set(&mut p, v);
        }
        p
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PointResidual {
    pub flux: f64,
    pub transition_id: TransitionId,
    pub data: f64,
    pub model: Option<f64>,
    /// (model - data) / band, `None` when invalid.
    pub weighted: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CostBreakdown {
    pub total: f64,
    pub points: Vec<PointResidual>,
    /// (observable, model, weighted residual)
    pub anchors: Vec<(Observable, Option<f64>, Option<f64>)>,
    pub invalid: usize,
}

fn spectra(problem: &FitProblem, trial: &CircuitParams) -> Result<Vec<FluxSpectrum>> {
    let model = TransitionModel::new(trial, &problem.spec)?;
    problem.fluxes().iter().map(|&f| model.at_flux(f)).collect()
}

/// Sum over points of ((model - data)/band)^2 plus anchors ((model - target)/window)^2,
/// with [`INVALID_PENALTY`] per unlabeled point or anchor.
pub fn weighted_cost(problem: &FitProblem, trial: &CircuitParams) -> Result<CostBreakdown> {
    let fluxes = problem.fluxes();
    let specs = spectra(problem, trial)?;
    let at = |f: f64| &specs[fluxes.iter().position(|g| g.to_bits() == f.to_bits()).unwrap()];
    let mut total = 0.0;
    let mut invalid = 0;
    let points = problem
        .points
        .iter()
        .map(|pt| {
            let model = at(pt.flux_ext).get(pt.transition_id);
            let weighted = model.map(|m| (m - pt.freq) / pt.band_weight);
            match weighted {
                Some(w) => total += w * w,
                None => {
                    invalid += 1;
                    total += INVALID_PENALTY;
                }
            }
            PointResidual { flux: pt.flux_ext, transition_id: pt.transition_id, data: pt.freq, model, weighted }
        })
        .collect();
    let anchors = problem
        .anchors
        .iter()
        .map(|a| {
            let s = at(0.0);
            let model = match a.observable {
                Observable::OmegaQ => s.get(TransitionId::Q01),
                Observable::OmegaC => s.get(TransitionId::C01),
                Observable::ChiQc => s.chi_qc,
            };
            let weighted = model.map(|m| (m - a.target) / a.window);
            match weighted {
                Some(w) => total += w * w,
                None => {
                    invalid += 1;
                    total += INVALID_PENALTY;
                }
            }
            (a.observable, model, weighted)
        })
        .collect();
    Ok(CostBreakdown { total, points, anchors, invalid })
}

/// Noise-free (or multiplicatively noisy) synthetic points from `p`.
pub fn synthetic_points(
    p: &CircuitParams,
    flux_grid: &[f64],
    ids: &[TransitionId],
    band: f64,
    relative_noise: f64,
    seed: u64,
) -> Result<Vec<DigitizedPoint>> {
    let model = TransitionModel::new(p, &super::model::fit_spec())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut out = Vec::new();
    for &f in flux_grid {
        let s = model.at_flux(f)?;
        for &id in ids {
            let v = s.get(id).ok_or_else(|| Error::InvalidParameter(format!("{id} unlabeled at flux {f}")))?;
            let noise = if relative_noise > 0.0 { 1.0 + relative_noise * normal.sample(&mut rng) } else { 1.0 };
            out.push(DigitizedPoint { flux_ext: f, transition_id: id, freq: v * noise, band_weight: band });
        }
    }
    Ok(out)
}

/// CSV with columns flux, transition_id, freq_GHz, band_GHz.
pub fn read_points_csv<R: Read>(r: R) -> Result<Vec<DigitizedPoint>> {
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_points_csv<W: Write>(w: W, points: &[DigitizedPoint]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    for p in points {
        wtr.serialize(p)?;
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_problem() -> (CircuitParams, FitProblem) {
        let p = CircuitParams::measured_sample();
        let pts = synthetic_points(&p, &[-0.1, 0.0, 0.1], &TransitionId::ALL, 0.01, 0.0, 1).unwrap();
        let prob = FitProblem::new(pts, vec![], FreeParam::ALL.to_vec(), &p, 0.5).unwrap();
        (p, prob)
    }

    #[test]
    fn generator_has_zero_cost() {
        let (p, prob) = small_problem();
        assert!(weighted_cost(&prob, &p).unwrap().total < 1e-20);
    }

    #[test]
    fn shifting_one_point_by_its_band_costs_one() {
        let (p, mut prob) = small_problem();
        prob.points[4].freq += prob.points[4].band_weight;
        assert!((weighted_cost(&prob, &p).unwrap().total - 1.0).abs() < 1e-9);
    }

    #[test]
    fn csv_round_trip() {
        let (_, prob) = small_problem();
        let mut buf = Vec::new();
        write_points_csv(&mut buf, &prob.points).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("flux,transition_id,freq_GHz,band_GHz"));
        assert_eq!(read_points_csv(&buf[..]).unwrap(), prob.points);
    }

    #[test]
    fn invalid_inputs_rejected() {
        let p = CircuitParams::measured_sample();
        let bad = vec![DigitizedPoint { flux_ext: 0.0, transition_id: TransitionId::Q01, freq: 2.0, band_weight: 0.0 }];
        assert!(FitProblem::new(bad, vec![], vec![FreeParam::EJ], &p, 0.5).is_err());
        let anchor = vec![Anchor { observable: Observable::OmegaQ, target: 2.0, window: 0.0 }];
        assert!(FitProblem::new(vec![], anchor, vec![FreeParam::EJ], &p, 0.5).is_err());
    }
}
