//! Photon-number calibration from qubit ac-Stark shifts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Calibration {
    pub power: Vec<f64>,
    /// n_bar = delta_omega / chi per point.
    pub n_bar: Vec<f64>,
    #[serde(rename = "slope_photons_per_power_unit")]
    pub slope: f64,
    pub intercept: f64,
    pub power_range: (f64, f64),
}

impl Calibration {
    /// Photon number at `power` and whether it lies outside the calibrated range.
    pub fn predict(&self, power: f64) -> (f64, bool) {
        let extrapolated = power < self.power_range.0 || power > self.power_range.1;
        (self.slope * power + self.intercept, extrapolated)
    }

    /// `{slope_photons_per_power_unit, intercept}`
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "slope_photons_per_power_unit": self.slope, "intercept": self.intercept })
    }
}

/// n_bar(P) = delta_omega_q(P) / chi_qc per point plus a least-squares line
/// n_bar = slope P + intercept.
pub fn photon_calibration(stark: &[(f64, f64)], chi_qc: f64) -> Result<Calibration> {
    if chi_qc == 0.0 || !chi_qc.is_finite() {
        return Err(Error::Calibration(format!("chi_qc must be nonzero, got {chi_qc}")));
    }
    if let Some((p, d)) = stark.iter().find(|(_, d)| d * chi_qc < 0.0) {
        return Err(Error::Calibration(format!(
            "Stark shift {d} at power {p} has the opposite sign to chi_qc = {chi_qc}"
        )));
    }
    let n_bar: Vec<f64> = stark.iter().map(|(_, d)| d / chi_qc).collect();
    let power: Vec<f64> = stark.iter().map(|(p, _)| *p).collect();
    let lo = power.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = power.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if power.len() < 2 || !(hi > lo) {
        return Err(Error::Calibration("need at least two distinct powers".into()));
    }
    let (slope, intercept) = fit_line(&power, &n_bar);
    Ok(Calibration { power, n_bar, slope, intercept, power_range: (lo, hi) })
}

/// Ordinary least squares y = a x + b on arbitrary abscissae.
fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let m = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::branch::least_squares_line;

    #[test]
    fn identity_gives_one_photon() {
        let c = photon_calibration(&[(1.0, -0.00202), (2.0, -0.00404)], -0.00202).unwrap();
        assert!((c.n_bar[0] - 1.0).abs() < 1e-12);
        assert!((c.slope - 1.0).abs() < 1e-12 && c.intercept.abs() < 1e-12);
    }

    #[test]
    fn top_of_range() {
        let c = photon_calibration(&[(0.0, 0.0), (1.0, -0.303)], -0.00202).unwrap();
        assert!((c.n_bar[1] - 150.0).abs() < 1e-9);
        assert!(c.predict(2.0).1 && !c.predict(0.5).1);
    }

    #[test]
    fn sign_mismatch_rejected() {
        assert!(matches!(photon_calibration(&[(1.0, 0.002), (2.0, 0.004)], -0.00202), Err(Error::Calibration(_))));
        assert!(photon_calibration(&[(1.0, 0.002)], 0.0).is_err());
    }

    #[test]
    fn agrees_with_evenly_spaced_fit() {
        let y = [0.3, 1.1, 2.2, 2.8];
        let x = [0.0, 1.0, 2.0, 3.0];
        let (a, b) = fit_line(&x, &y);
        let (a2, b2) = least_squares_line(&y);
        assert!((a - a2).abs() < 1e-14 && (b - b2).abs() < 1e-14);
    }
}
