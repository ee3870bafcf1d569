//! Normal modes of the linearised ancilla and the cavity, plus the static
//! displacement produced by the external flux.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{josephson_inductance_nh, CircuitParams};

/// Polariton frequencies, mixing coefficients and the derived phases that enter
/// the Josephson cosines. Index 0 is the ancilla, index 1 the cavity, so
/// `u[0][1]` is u_ac.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivedModes {
    pub omega_a_bare: f64,
    pub omega_c_bare: f64,
    pub omega_a_pol: f64,
    pub omega_c_pol: f64,
    pub theta: f64,
    pub u: [[f64; 2]; 2],
    pub v: [[f64; 2]; 2],
    pub phi_a: f64,
    pub phi_c: f64,
    pub e_j_bar: f64,
    pub phi_ext_bar: f64,
    pub alpha_a: f64,
    pub alpha_c: f64,
    /// L_J / L_a at the current flux.
    pub inductance_ratio: f64,
}

impl DerivedModes {
    pub fn u_aa(&self) -> f64 {
        self.u[0][0]
    }

    pub fn u_ac(&self) -> f64 {
        self.u[0][1]
    }

    /// <0_a| cos(phi_a u_aa (a + a^dag)) |0_a> = exp(-phi_a^2 u_aa^2 / 2), the
    /// factor by which a frozen ancilla dresses the cavity cosine.
    pub fn ancilla_dressing(&self) -> f64 {
        (-0.5 * (self.phi_a * self.u_aa()).powi(2)).exp()
    }

    /// Largest deviation of the diagonal of u v^T from one.
    pub fn symplectic_defect(&self) -> f64 {
        (0..2)
            .map(|i| (self.u[i][0] * self.v[i][0] + self.u[i][1] * self.v[i][1] - 1.0).abs())
            .fold(0.0, f64::max)
    }
}

/// Normal-mode transformation of the ancilla-cavity pair.
///
/// The bare ancilla is the linearised mode of the junction pair shunted by L_a:
/// its inductive energy is 2 E_J (1 + 2 L_J/L_a), the same combination that sets
/// the zero-point phase phi_a = [E_Ca / (E_J (1 + 2 L_J/L_a))]^(1/4).
pub fn normal_modes(p: &CircuitParams) -> Result<DerivedModes> {
    p.validate()?;
    let l_j = josephson_inductance_nh(p.e_j);
    let r = l_j / p.ancilla_inductance();
    let e_l = 2.0 * p.e_j * (1.0 + 2.0 * r);
    let wa = (8.0 * p.e_ca * e_l).sqrt();
    let wc = p.omega_c_bare;
    let g = p.g_ac;
    if (wc - wa).abs() < 1e-9 {
        return Err(Error::DegenerateModes { separation: (wc - wa).abs() });
    }
    let theta = 0.5 * (4.0 * g * (wa * wc).sqrt() / (wc * wc - wa * wa)).atan();
    let (s, c) = theta.sin_cos();
    let cross = 2.0 * g * (wa * wc).sqrt() * (2.0 * theta).sin();
    let wa_pol = (wa * wa * c * c + wc * wc * s * s - cross).sqrt();
    let wc_pol = (wc * wc * c * c + wa * wa * s * s + cross).sqrt();

    let s1 = (wc / wa).powf(0.25);
    let s2 = (wa_pol * wa_pol / (wa * wc)).powf(0.25);
    let s3 = (wc_pol * wc_pol / (wa * wc)).powf(0.25);
    let u = [[s1 * s2 * c, s1 * s3 * s], [-s2 / s1 * s, s3 / s1 * c]];
    let v = [[c / (s1 * s2), s / (s1 * s3)], [-s1 / s2 * s, s1 / s3 * c]];

    let phi_a = (p.e_ca / (p.e_j * (1.0 + 2.0 * r))).powf(0.25);
    let phi_c = phi_a * u[0][1];
    let e_j_bar = p.e_j * (-0.5 * phi_a * phi_a * (u[0][0].powi(2) + u[0][1].powi(2))).exp();

    let phi_ext = p.phi_ext();
    let alpha_a = phi_ext * phi_a * u[0][0] * r * (2.0 * p.e_j / wa_pol);
    let alpha_c = phi_ext * phi_a * u[0][1] * r * (2.0 * p.e_j / wc_pol);
    let phi_ext_bar = 2.0 * phi_a * (u[0][0] * alpha_a + u[0][1] * alpha_c);

    Ok(DerivedModes {
        omega_a_bare: wa,
        omega_c_bare: wc,
        omega_a_pol: wa_pol,
        omega_c_pol: wc_pol,
        theta,
        u,
        v,
        phi_a,
        phi_c,
        e_j_bar,
        phi_ext_bar,
        alpha_a,
        alpha_c,
        inductance_ratio: r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trace_and_symplectic_invariants() {
        let m = normal_modes(&CircuitParams::measured_sample()).unwrap();
        let lhs = m.omega_a_pol.powi(2) + m.omega_c_pol.powi(2);
        let rhs = m.omega_a_bare.powi(2) + m.omega_c_bare.powi(2);
        assert!((lhs - rhs).abs() / rhs < 1e-12);
        assert!(m.symplectic_defect() < 1e-12);
    }

    #[test]
    fn decoupled_limit() {
        let mut p = CircuitParams::measured_sample();
        p.g_ac = 0.0;
        let m = normal_modes(&p).unwrap();
        assert_eq!(m.theta, 0.0);
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((m.u[i][j] - id).abs() < 1e-14);
                assert!((m.v[i][j] - id).abs() < 1e-14);
            }
        }
        assert!((m.omega_c_pol - p.omega_c_bare).abs() < 1e-12);
        assert!((m.omega_a_pol - m.omega_a_bare).abs() < 1e-12);
    }

    #[test]
    fn zero_flux_has_no_displacement() {
        let m = normal_modes(&CircuitParams::measured_sample()).unwrap();
        assert_eq!(m.phi_ext_bar, 0.0);
        assert_eq!(m.alpha_a, 0.0);
    }

    #[test]
    fn displacement_is_odd_in_flux() {
        let p = CircuitParams::measured_sample();
        let a = normal_modes(&p.with_flux(0.07)).unwrap();
        let b = normal_modes(&p.with_flux(-0.07)).unwrap();
        assert_eq!(a.phi_ext_bar, -b.phi_ext_bar);
        assert_eq!(a.omega_c_pol, b.omega_c_pol);
    }

    #[test]
    fn degenerate_modes_rejected() {
        let mut p = CircuitParams::measured_sample();
        let m = normal_modes(&p).unwrap();
        p.omega_c_bare = m.omega_a_bare;
        assert!(matches!(normal_modes(&p), Err(Error::DegenerateModes { .. })));
    }
}
