//! Drive harmonics of the semiclassical transmon Hamiltonian
//! H(t) = 4 E_C n^2 - sum_n A_n cos(phi - n w_d t).

use serde::{Deserialize, Serialize};

use super::bessel::bessel_j_upto;
use crate::error::{Error, Result};
use crate::hilbert::{matched_transverse_coupling, DerivedModes};
use crate::params::CircuitParams;

/// Largest drive amplitude accepted.
pub const ETA_MAX: f64 = 50.0;
/// Bessel magnitude below which harmonics are dropped.
const TAIL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CouplingKind {
    Cosphi,
    Transverse,
}

impl From<crate::hilbert::ModelKind> for CouplingKind {
    fn from(k: crate::hilbert::ModelKind) -> Self {
        match k {
            crate::hilbert::ModelKind::Cosphi => Self::Cosphi,
            crate::hilbert::ModelKind::Transverse => Self::Transverse,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HarmonicSeries {
    pub kind: CouplingKind,
    /// Drive amplitude entering the Bessel functions.
    pub eta: f64,
    pub phi_ext_bar: f64,
    /// Transmon-mode Josephson energy 2 E_J.
    pub e_j_mode: f64,
    pub e_c: f64,
    /// Drive frequency (GHz).
    pub omega_d: f64,
    /// Harmonics kept: |n| <= n_h.
    pub n_h: usize,
    /// A_{-n_h} ..= A_{n_h}.
    coeffs: Vec<f64>,
}

impl HarmonicSeries {
    /// Build from explicit inputs. `e_j_mode` is the transmon-mode Josephson
    /// energy (2 E_J).
    pub fn from_parts(kind: CouplingKind, e_j_mode: f64, e_c: f64, omega_d: f64, eta: f64, phi_ext_bar: f64) -> Result<Self> {
        if !(eta.abs() <= ETA_MAX) {
            return Err(Error::DriveTooStrong(eta));
        }
        if !(e_c > 0.0 && omega_d > 0.0) {
            return Err(Error::InvalidParameter("E_C and omega_d must be positive".into()));
        }
        let mut n_h = eta.abs().ceil() as usize + 12;
        let mut j = bessel_j_upto(n_h, eta);
        while j[n_h].abs() >= TAIL {
            n_h += 4;
            j = bessel_j_upto(n_h, eta);
        }
        let jn = |n: i64| {
            let v = j[n.unsigned_abs() as usize];
            if n < 0 && n % 2 != 0 {
                -v
            } else {
                v
            }
        };
        let sign = |k: i64| if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let (c, s) = (phi_ext_bar.cos(), phi_ext_bar.sin());
        let nh = n_h as i64;
        let coeffs = (-nh..=nh)
            .map(|n| match kind {
                CouplingKind::Transverse => e_j_mode * jn(n),
                CouplingKind::Cosphi => {
                    if n.rem_euclid(2) == 0 {
                        let k = n / 2;
                        sign(k) * e_j_mode * c * jn(n)
                    } else {
                        // n = 2k - 1
                        let k = (n + 1) / 2;
                        sign(k) * e_j_mode * s * jn(n)
                    }
                }
            })
            .collect();
        Ok(Self { kind, eta, phi_ext_bar, e_j_mode, e_c, omega_d, n_h, coeffs })
    }

    /// A_n, zero outside the kept range.
    pub fn a(&self, n: i64) -> f64 {
        if n.unsigned_abs() as usize > self.n_h {
            0.0
        } else {
            self.coeffs[(n + self.n_h as i64) as usize]
        }
    }

    /// (n, A_n) for every kept harmonic.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let nh = self.n_h as i64;
        (-nh..=nh).map(move |n| (n, self.a(n)))
    }

    /// Drive period in ns.
    pub fn period(&self) -> f64 {
        1.0 / self.omega_d
    }

    /// sum_n A_n cos(phi - n w_d t)
    pub fn potential_sum(&self, phi: f64, t: f64) -> f64 {
        let th = 2.0 * std::f64::consts::PI * self.omega_d * t;
        self.iter().map(|(n, a)| a * (phi - n as f64 * th).cos()).sum()
    }

    /// Closed form of [`Self::potential_sum`] before the Bessel expansion.
    pub fn potential_closed_form(&self, phi: f64, t: f64) -> f64 {
        let th = 2.0 * std::f64::consts::PI * self.omega_d * t;
        match self.kind {
            CouplingKind::Cosphi => self.e_j_mode * phi.cos() * (self.eta * th.cos() + self.phi_ext_bar).cos(),
            CouplingKind::Transverse => self.e_j_mode * (phi - self.eta * th.sin()).cos(),
        }
    }

    /// Semiclassical energy 4 E_C n^2 - sum_n A_n cos(phi - n w_d t) (GHz).
    pub fn hamiltonian(&self, phi: f64, n: f64, t: f64) -> f64 {
        4.0 * self.e_c * n * n - self.potential_sum(phi, t)
    }
}

/// Harmonics for the circuit at its stored flux and drive photon number
/// `n_bar`. The drive frequency defaults to the cavity-like polariton.
///
/// cos(phi) coupling: eta = 2 phi_c sqrt(n_bar), with the flux displacement
/// phi_ext_bar splitting even and odd harmonics. Transverse coupling (matched
/// g = |phi_c| w_c): eta = 2 g sqrt(n_bar) / w_d.
pub fn harmonic_coefficients(kind: CouplingKind, p: &CircuitParams, modes: &DerivedModes, n_bar: f64) -> Result<HarmonicSeries> {
    if !(n_bar >= 0.0) {
        return Err(Error::InvalidParameter(format!("n_bar must be >= 0, got {n_bar}")));
    }
    let omega_d = p.omega_d.unwrap_or(modes.omega_c_pol);
    let e_j_mode = 2.0 * p.e_j;
    match kind {
        CouplingKind::Cosphi => {
            let eta = 2.0 * modes.phi_c.abs() * n_bar.sqrt();
            HarmonicSeries::from_parts(kind, e_j_mode, p.e_cq, omega_d, eta, modes.phi_ext_bar)
        }
        CouplingKind::Transverse => {
            let g = matched_transverse_coupling(modes);
            let eta = 2.0 * g * n_bar.sqrt() / omega_d;
            HarmonicSeries::from_parts(kind, e_j_mode, p.e_cq, omega_d, eta, 0.0)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undriven_keeps_only_dc_term() {
        let s = HarmonicSeries::from_parts(CouplingKind::Cosphi, 7.92, 0.0734, 7.29, 0.0, 0.3).unwrap();
        assert_eq!(s.a(0), 7.92 * 0.3f64.cos());
        for n in 1..=s.n_h as i64 {
            assert_eq!(s.a(n), 0.0);
        }
        let s = HarmonicSeries::from_parts(CouplingKind::Cosphi, 7.92, 0.0734, 7.29, 0.0, 0.0).unwrap();
        assert_eq!(s.iter().map(|(_, a)| a).sum::<f64>(), 7.92);
    }

    #[test]
    fn odd_harmonics_vanish_without_flux() {
        let s = HarmonicSeries::from_parts(CouplingKind::Cosphi, 7.92, 0.0734, 7.29, 1.3, 0.0).unwrap();
        for n in (-(s.n_h as i64)..=s.n_h as i64).filter(|n| n % 2 != 0) {
            assert_eq!(s.a(n), 0.0);
        }
        assert!(s.a(2) != 0.0);
    }

    #[test]
    fn tail_is_negligible() {
        for eta in [0.0, 0.5, 3.0, 20.0, 49.0] {
            let s = HarmonicSeries::from_parts(CouplingKind::Transverse, 7.92, 0.0734, 7.29, eta, 0.0).unwrap();
            assert!(s.a(s.n_h as i64).abs() < 1e-12 * 7.92);
        }
    }

    #[test]
    fn strong_drive_rejected() {
        assert!(matches!(
            HarmonicSeries::from_parts(CouplingKind::Cosphi, 7.92, 0.0734, 7.29, 50.5, 0.0),
            Err(Error::DriveTooStrong(_))
        ));
    }

    #[test]
    fn resummation_matches_closed_form() {
        for kind in [CouplingKind::Cosphi, CouplingKind::Transverse] {
            let s = HarmonicSeries::from_parts(kind, 7.92, 0.0734, 7.29, 2.2, 0.37).unwrap();
            for k in 0..50 {
                let (phi, t) = (-3.0 + 0.13 * k as f64, 0.011 * k as f64);
                let d = s.potential_sum(phi, t) - s.potential_closed_form(phi, t);
                assert!(d.abs() < 1e-12, "{kind:?} {d}");
            }
        }
    }
}
