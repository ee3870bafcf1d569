//! Chirikov resonance-overlap margins.

use serde::Serialize;

use super::bessel::bessel_j_upto;
use super::harmonics::{CouplingKind, HarmonicSeries};

/// Plasma frequency sqrt(16 E_J E_C), with the single-junction E_J (GHz).
pub fn plasma_frequency(e_j: f64, e_c: f64) -> f64 {
    (16.0 * e_j * e_c).sqrt()
}

/// Ratio lhs/rhs of the overlap condition at drive amplitude `eta`; values
/// above 1 mean the neighbouring resonances stay separated.
///
/// cos(phi): (w_d / w_p) / (sqrt|J_0| + sqrt|J_2|), resonances m = 0 and 2.
/// transverse: (w_d / 2 w_p) / (sqrt|J_0| + sqrt|J_1|), resonances m = 0 and 1.
pub fn chirikov_margin_at(kind: CouplingKind, omega_d: f64, omega_p: f64, eta: f64) -> f64 {
    let j = bessel_j_upto(2, eta);
    match kind {
        CouplingKind::Cosphi => (omega_d / omega_p) / (j[0].abs().sqrt() + j[2].abs().sqrt()),
        CouplingKind::Transverse => (omega_d / (2.0 * omega_p)) / (j[0].abs().sqrt() + j[1].abs().sqrt()),
    }
}

/// Margin for a built series; `e_j` is the single-junction energy.
pub fn chirikov_margin(series: &HarmonicSeries, e_j: f64) -> f64 {
    chirikov_margin_at(series.kind, series.omega_d, plasma_frequency(e_j, series.e_c), series.eta)
}

#[derive(Debug, Clone, Serialize)]
pub struct ChirikovScan {
    pub kind: CouplingKind,
    pub n_bar: Vec<f64>,
    pub eta: Vec<f64>,
    pub margin: Vec<f64>,
    pub min_margin: f64,
    pub argmin_n_bar: f64,
}

/// Margin over n_bar in [0, n_bar_max] on `samples` points, eta = eta_per_root
/// sqrt(n_bar). The minimum is refined by golden section between the
/// neighbouring grid points.
pub fn chirikov_scan(
    kind: CouplingKind,
    omega_d: f64,
    omega_p: f64,
    eta_per_root: f64,
    n_bar_max: f64,
    samples: usize,
) -> ChirikovScan {
    let samples = samples.max(2);
    let f = |nb: f64| chirikov_margin_at(kind, omega_d, omega_p, eta_per_root * nb.max(0.0).sqrt());
    let n_bar: Vec<f64> = (0..samples).map(|k| n_bar_max * k as f64 / (samples - 1) as f64).collect();
    let margin: Vec<f64> = n_bar.iter().map(|&nb| f(nb)).collect();
    let k = (0..samples).min_by(|&a, &b| margin[a].total_cmp(&margin[b])).unwrap();
    let (lo, hi) = (n_bar[k.saturating_sub(1)], n_bar[(k + 1).min(samples - 1)]);
    let (mut x, mut fx) = crate::optim::golden_section(f, lo, hi, 1e-9 * n_bar_max.max(1.0));
    if margin[k] < fx {
        x = n_bar[k];
        fx = margin[k];
    }
    ChirikovScan {
        kind,
        eta: n_bar.iter().map(|nb| eta_per_root * nb.sqrt()).collect(),
        n_bar,
        margin,
        min_margin: fx,
        argmin_n_bar: x,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undriven_cosphi_margin_is_frequency_ratio() {
        let wp = plasma_frequency(3.96, 0.0734);
        assert!((chirikov_margin_at(CouplingKind::Cosphi, 7.294, wp, 0.0) - 7.294 / wp).abs() < 1e-14);
    }

    #[test]
    fn scan_minimum_is_below_grid_values() {
        let wp = plasma_frequency(3.96, 0.0734);
        let s = chirikov_scan(CouplingKind::Transverse, 7.29, wp, 0.0875, 750.0, 301);
        assert!(s.margin.iter().all(|&m| m >= s.min_margin - 1e-15));
    }
}
