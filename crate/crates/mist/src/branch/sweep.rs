//! Flux sweeps of the crossing structure and ac-Stark curves.

use rayon::prelude::*;
use serde::Serialize;

use super::crossings::{find_crossings, CrossingEvent, CrossingSearch};
use super::label::{diagonalize_and_label, BranchTable};
use crate::error::{Error, Result};
use crate::hilbert::{build_two_mode, ModelKind};
use crate::params::{CircuitParams, HilbertSpec};

/// Largest |flux| (in flux quanta) accepted by the sweep.
pub const FLUX_RANGE: f64 = 0.2;

#[derive(Debug, Clone, Serialize)]
pub struct FluxPoint {
    pub flux_ext: f64,
    pub table: BranchTable,
    pub events: Vec<CrossingEvent>,
}

/// Per pair: first crossing versus flux and the fluxes where the crossing
/// reaches zero photons.
#[derive(Debug, Clone, Serialize)]
pub struct PairCurve {
    pub pair: (usize, usize),
    pub flux: Vec<f64>,
    /// First crossing (lowest rung of either orientation), `None` if none.
    pub n_c_star: Vec<Option<f64>>,
    /// E(hi, 0) - E(lo, 1) at every flux.
    pub zero_photon_detuning: Vec<f64>,
    /// Roots of the zero-photon detuning, linearly interpolated.
    pub zero_photon_flux: Vec<f64>,
}

impl PairCurve {
    /// First crossing at the grid flux nearest to `flux`.
    pub fn n_c_star_at(&self, flux: f64) -> Option<f64> {
        let k = (0..self.flux.len()).min_by(|&a, &b| (self.flux[a] - flux).abs().total_cmp(&(self.flux[b] - flux).abs()))?;
        self.n_c_star[k]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MistMap {
    pub points: Vec<FluxPoint>,
    pub curves: Vec<PairCurve>,
}

impl MistMap {
    pub fn curve(&self, pair: (usize, usize)) -> Option<&PairCurve> {
        let key = (pair.0.min(pair.1), pair.0.max(pair.1));
        self.curves.iter().find(|c| c.pair == key)
    }

    pub fn events(&self) -> impl Iterator<Item = &CrossingEvent> {
        self.points.iter().flat_map(|p| p.events.iter())
    }
}

/// Label the spectrum of one two-mode model at one flux and search crossings.
pub fn analyse_flux(
    kind: ModelKind,
    p: &CircuitParams,
    spec: &HilbertSpec,
    search: &CrossingSearch,
) -> Result<FluxPoint> {
    let h = build_two_mode(kind, p, spec)?;
    let labeled = diagonalize_and_label(&h, spec.d, spec.d_c)?;
    let events = find_crossings(&h, &labeled, search, p.flux_ext);
    Ok(FluxPoint { flux_ext: p.flux_ext, table: labeled.table, events })
}

/// Branch analysis over a grid of fluxes, one diagonalisation per flux in
/// parallel.
pub fn mist_map_over_flux(
    kind: ModelKind,
    p: &CircuitParams,
    spec: &HilbertSpec,
    flux_grid: &[f64],
    search: &CrossingSearch,
) -> Result<MistMap> {
    if let Some(f) = flux_grid.iter().find(|f| !(f.abs() <= FLUX_RANGE)) {
        return Err(Error::InvalidParameter(format!("flux {f} outside +-{FLUX_RANGE} flux quanta")));
    }
    spec.validate(p)?;
    let points: Vec<FluxPoint> = flux_grid
        .par_iter()
        .map(|&f| analyse_flux(kind, &p.with_flux(f), spec, search))
        .collect::<Result<_>>()?;

    let mut pairs: Vec<(usize, usize)> = search.pairs.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    pairs.dedup();
    let curves = pairs
        .into_iter()
        .map(|pair| {
            let n_c_star = points
                .iter()
                .map(|pt| {
                    pt.events
                        .iter()
                        .filter(|e| e.branch_pair == pair)
                        .map(|e| e.n_c_star)
                        .min_by(f64::total_cmp)
                })
                .collect();
            let det: Vec<f64> = points
                .iter()
                .map(|pt| match (pt.table.energy_at(pair.1, 0), pt.table.energy_at(pair.0, 1)) {
                    (Some(a), Some(b)) => a - b,
                    _ => f64::NAN,
                })
                .collect();
            let flux: Vec<f64> = points.iter().map(|pt| pt.flux_ext).collect();
            let zero_photon_flux = sign_change_roots(&flux, &det);
            PairCurve { pair, flux, n_c_star, zero_photon_detuning: det, zero_photon_flux }
        })
        .collect();
    Ok(MistMap { points, curves })
}

/// Linear-interpolated roots of y(x) sampled on a grid (sorted by x first).
pub fn sign_change_roots(x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut roots = Vec::new();
    for w in idx.windows(2) {
        let (i, k) = (w[0], w[1]);
        if y[i] == 0.0 {
            roots.push(x[i]);
        } else if y[i] * y[k] < 0.0 {
            roots.push(x[i] + (x[k] - x[i]) * y[i] / (y[i] - y[k]));
        }
    }
    if let Some(&last) = idx.last() {
        if y[last] == 0.0 {
            roots.push(x[last]);
        }
    }
    roots
}

/// Transition frequency versus photon number and its least-squares slope over
/// the first `window + 1` rungs.
#[derive(Debug, Clone, Serialize)]
pub struct StarkCurve {
    pub pair: (usize, usize),
    pub frequency: Vec<f64>,
    /// GHz per photon.
    pub slope: f64,
    pub intercept: f64,
    pub window: usize,
}

pub fn ac_stark_curve(table: &BranchTable, pair: (usize, usize), window: usize) -> Result<StarkCurve> {
    let (j1, j2) = pair;
    if j1.max(j2) >= table.d {
        return Err(Error::InvalidParameter(format!("branch {} not kept (D = {})", j1.max(j2), table.d)));
    }
    for j in [j1, j2] {
        if table.len(j) < window + 1 {
            return Err(Error::BranchTruncated { j, len: table.len(j), needed: window + 1 });
        }
    }
    let frequency = table.transition(j1, j2);
    let (slope, intercept) = least_squares_line(&frequency[..=window]);
    Ok(StarkCurve { pair, frequency, slope, intercept, window })
}

/// Straight-line fit y = a n + b over n = 0..y.len().
pub fn least_squares_line(y: &[f64]) -> (f64, f64) {
    let m = y.len() as f64;
    let mx = (m - 1.0) / 2.0;
    let my = y.iter().sum::<f64>() / m;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (n, v) in y.iter().enumerate() {
        let dx = n as f64 - mx;
        sxy += dx * (v - my);
        sxx += dx * dx;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx)
}

/// Linear extrapolation of the ground-referenced transition 0 -> j up to the
/// cavity frequency.
#[derive(Debug, Clone, Serialize)]
pub struct StarkExtrapolation {
    pub j: usize,
    pub slope: f64,
    pub intercept: f64,
    /// Dressed cavity frequency E(0,1) - E(0,0).
    pub omega_c: f64,
    /// Zero-photon detuning omega_0j - omega_c.
    pub detuning: f64,
    /// Photon number where the extrapolated line reaches omega_c.
    pub n_intersect: f64,
}

pub fn stark_extrapolation(table: &BranchTable, j: usize, window: usize) -> Result<StarkExtrapolation> {
    let curve = ac_stark_curve(table, (0, j), window)?;
    let omega_c = table.energy[0][1] - table.energy[0][0];
    let detuning = curve.frequency[0] - omega_c;
    let n_intersect = (omega_c - curve.intercept) / curve.slope;
    Ok(StarkExtrapolation { j, slope: curve.slope, intercept: curve.intercept, omega_c, detuning, n_intersect })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_sampled_line() {
        let x = [0.3, -0.1, 0.1, 0.0, 0.2];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v - 0.15).collect();
        let r = sign_change_roots(&x, &y);
        assert_eq!(r.len(), 1);
        assert!((r[0] - 0.075).abs() < 1e-12);
    }

    #[test]
    fn exact_line_fit() {
        let y: Vec<f64> = (0..21).map(|n| 7.0 - 0.0054 * n as f64).collect();
        let (a, b) = least_squares_line(&y);
        assert!((a + 0.0054).abs() < 1e-13 && (b - 7.0).abs() < 1e-12);
    }
}
