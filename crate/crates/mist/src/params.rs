//! Circuit parameters, Hilbert-space truncation and the parameter-file format.
//!
//! Energies and frequencies are stored in GHz with h = 1, so an energy E and the
//! frequency E/h share one number.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant (J s).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Elementary charge (C).
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;
/// Boltzmann constant (J/K).
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Ratio between the SQUID loop area and the flux-threading loop of the ancilla.
pub const SQUID_AREA_RATIO: f64 = 28.0;

/// Josephson inductance L_J = phi0^2 / E_J in nH, with E_J given in GHz and
/// phi0 = hbar / 2e the reduced flux quantum.
pub fn josephson_inductance_nh(e_j_ghz: f64) -> f64 {
    let phi0 = HBAR / (2.0 * ELECTRON_CHARGE);
    phi0 * phi0 / (PLANCK * e_j_ghz * 1e9) * 1e9
}

/// Temperature equivalent of one GHz, in mK.
pub fn ghz_to_millikelvin() -> f64 {
    PLANCK * 1e9 / BOLTZMANN * 1e3
}

/// All circuit energies, couplings, flux and drive settings.
///
/// Field names in the parameter file follow the symbols of the model (`E_Cq`,
/// `E_J`, ...). `flux_ext` is the external flux in units of the flux quantum;
/// the reduced phase entering the displacement is `2 pi flux_ext`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CircuitParams {
    #[serde(rename = "E_Cq")]
    pub e_cq: f64,
    /// Single-junction Josephson energy; the transmon mode sees 2 E_J.
    #[serde(rename = "E_J")]
    pub e_j: f64,
    pub n_g: f64,
    #[serde(rename = "E_Ca")]
    pub e_ca: f64,
    /// Zero-flux ancilla inductance (nH).
    #[serde(rename = "L_a0")]
    pub l_a0: f64,
    pub omega_c_bare: f64,
    pub g_ac: f64,
    pub flux_ext: f64,
    pub n_bar: f64,
    /// Drive frequency; `None` means "drive at the cavity-like polariton".
    pub omega_d: Option<f64>,
    pub kappa_c: f64,
    pub chi_qc_target: f64,
}

impl Default for CircuitParams {
    fn default() -> Self {
        Self::measured_sample()
    }
}

impl CircuitParams {
    /// Parameters of the measured sample.
    pub fn measured_sample() -> Self {
        Self {
            e_cq: 0.0734,
            e_j: 3.96,
            n_g: 0.0,
            e_ca: 0.0335,
            l_a0: 4.24,
            omega_c_bare: 7.23,
            g_ac: 0.215,
            flux_ext: 0.0,
            n_bar: 0.0,
            omega_d: None,
            kappa_c: 0.0172,
            chi_qc_target: -0.00202,
        }
    }

    pub fn with_flux(mut self, flux_ext: f64) -> Self {
        self.flux_ext = flux_ext;
        self
    }

    /// Reduced external phase 2 pi Phi/Phi0.
    pub fn phi_ext(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.flux_ext
    }

    /// Ancilla inductance at the current flux, L_a0 / |cos(pi Phi/Phi0 / 28)|.
    pub fn ancilla_inductance(&self) -> f64 {
        let c = (std::f64::consts::PI * self.flux_ext / SQUID_AREA_RATIO).cos();
        self.l_a0 / c.abs()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("E_Cq", self.e_cq),
            ("E_J", self.e_j),
            ("E_Ca", self.e_ca),
            ("L_a0", self.l_a0),
            ("omega_c_bare", self.omega_c_bare),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.n_bar >= 0.0) {
            return Err(Error::InvalidParameter(format!("n_bar must be >= 0, got {}", self.n_bar)));
        }
        if !self.g_ac.is_finite() || !self.flux_ext.is_finite() || !self.n_g.is_finite() {
            return Err(Error::InvalidParameter("non-finite coupling, flux or offset charge".into()));
        }
        if let Some(w) = self.omega_d {
            if !(w > 0.0) {
                return Err(Error::InvalidParameter(format!("omega_d must be positive, got {w}")));
            }
        }
        if 2.0 * self.e_j / self.e_cq <= 20.0 {
            log::warn!(
                "2E_J/E_Cq = {:.1} is outside the transmon regime; charge dispersion may matter",
                2.0 * self.e_j / self.e_cq
            );
        }
        Ok(())
    }

    pub fn from_toml_str(s: &str) -> Result<Self> {
        let p: Self = toml::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> String {
        // flat key = value lines, stable order
        let mut s = String::new();
        let mut line = |k: &str, v: f64| s.push_str(&format!("{k} = {v:?}\n"));
        line("E_Cq", self.e_cq);
        line("E_J", self.e_j);
        line("n_g", self.n_g);
        line("E_Ca", self.e_ca);
        line("L_a0", self.l_a0);
        line("omega_c_bare", self.omega_c_bare);
        line("g_ac", self.g_ac);
        line("flux_ext", self.flux_ext);
        line("n_bar", self.n_bar);
        if let Some(w) = self.omega_d {
            line("omega_d", w);
        }
        line("kappa_c", self.kappa_c);
        line("chi_qc_target", self.chi_qc_target);
        s
    }
}

/// Truncation of the transmon, cavity and ancilla Hilbert spaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HilbertSpec {
    /// Number of charge states, odd so the basis is symmetric around n = 0.
    pub n_charge: usize,
    /// Transmon eigenstates kept (D).
    pub d: usize,
    pub d_c: usize,
    /// Ancilla Fock dimension, 1 when the ancilla is frozen.
    pub d_a: usize,
    /// Extra Fock states used while building matrix functions of quadratures.
    pub fock_buffer: usize,
}

impl HilbertSpec {
    pub fn desk() -> Self {
        Self { n_charge: 501, d: 10, d_c: 200, d_a: 3, fock_buffer: 40 }
    }

    pub fn full() -> Self {
        Self { n_charge: 501, d: 20, d_c: 500, d_a: 3, fock_buffer: 40 }
    }

    pub fn with_dims(mut self, d: usize, d_c: usize) -> Self {
        self.d = d;
        self.d_c = d_c;
        self
    }

    pub fn validate(&self, p: &CircuitParams) -> Result<()> {
        if self.n_charge.is_multiple_of(2) {
            return Err(Error::Dimension(format!("n_charge must be odd, got {}", self.n_charge)));
        }
        let min_charge = 4.0 * (2.0 * p.e_j / p.e_cq).sqrt();
        if (self.n_charge as f64) < min_charge {
            return Err(Error::Dimension(format!(
                "n_charge = {} below 4 sqrt(2E_J/E_Cq) = {min_charge:.1}",
                self.n_charge
            )));
        }
        if self.d < 6 {
            return Err(Error::Dimension(format!("D must be >= 6, got {}", self.d)));
        }
        if self.d > self.n_charge {
            return Err(Error::Dimension(format!("D = {} exceeds n_charge = {}", self.d, self.n_charge)));
        }
        if self.d_c < 2 {
            return Err(Error::Dimension(format!("d_c must be >= 2, got {}", self.d_c)));
        }
        if self.d_a < 1 {
            return Err(Error::Dimension("d_a must be >= 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn josephson_inductance_matches_known_prefactor() {
        // L_J [nH] = 163.46 / E_J [GHz]
        let l = josephson_inductance_nh(1.0);
        assert!((l - 163.46).abs() < 0.02, "{l}");
    }

    #[test]
    fn toml_round_trip() {
        let p = CircuitParams::measured_sample().with_flux(-0.04);
        let q = CircuitParams::from_toml_str(&p.to_toml_string()).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(CircuitParams::from_toml_str("E_J = 4.0\nbogus = 1.0\n").is_err());
    }

    #[test]
    fn missing_keys_default_to_sample() {
        let p = CircuitParams::from_toml_str("E_J = 4.0\n").unwrap();
        assert_eq!(p.e_j, 4.0);
        assert_eq!(p.e_cq, 0.0734);
    }

    #[test]
    fn spec_validation() {
        let p = CircuitParams::measured_sample();
        assert!(HilbertSpec::desk().validate(&p).is_ok());
        let mut s = HilbertSpec::desk();
        s.n_charge = 500;
        assert!(s.validate(&p).is_err());
        s.n_charge = 21;
        assert!(s.validate(&p).is_err());
        let s = HilbertSpec::desk().with_dims(5, 10);
        assert!(s.validate(&p).is_err());
    }

    #[test]
    fn ancilla_inductance_is_even_in_flux() {
        let p = CircuitParams::measured_sample();
        let a = p.with_flux(0.13).ancilla_inductance();
        let b = p.with_flux(-0.13).ancilla_inductance();
        assert_eq!(a, b);
        assert!(a > p.l_a0);
    }
}
