use serde::Serialize;

use super::harmonics::HarmonicSeries;

/// Points sampled along each separatrix branch (odd, so psi = 0 is included).
pub const SEPARATRIX_SAMPLES: usize = 257;

/// Separatrix of the isolated resonance phi = m w_d t, in charge units.
#[derive(Debug, Clone, Serialize)]
pub struct Separatrix {
    pub m: i64,
    /// m w_d / (8 E_C)
    pub center_n: f64,
    /// Full width sqrt(2 |A_m| / E_C).
    pub width: f64,
    /// Resonance angle psi = phi - m w_d t.
    pub psi: Vec<f64>,
    pub n_upper: Vec<f64>,
    pub n_lower: Vec<f64>,
}

/// Resonance centre m w_d / (8 E_C).
pub fn resonance_center(series: &HarmonicSeries, m: i64) -> f64 {
    m as f64 * series.omega_d / (8.0 * series.e_c)
}

/// Full separatrix width sqrt(2 |A_m| / E_C).
pub fn resonance_width(series: &HarmonicSeries, m: i64) -> f64 {
    (2.0 * series.a(m).abs() / series.e_c).sqrt()
}

/// Separatrices for every |m| <= m_max with A_m != 0.
///
/// Near resonance m the slow Hamiltonian is the pendulum
/// 4 E_C (n - n_m)^2 - A_m cos psi, whose separatrix is
/// n = n_m +- sqrt(|A_m| (1 + sgn(A_m) cos psi) / (4 E_C)).
pub fn separatrices(series: &HarmonicSeries, m_max: usize) -> Vec<Separatrix> {
    let mm = m_max as i64;
    (-mm..=mm)
        .filter(|&m| series.a(m) != 0.0)
        .map(|m| {
            let a = series.a(m);
            let center_n = resonance_center(series, m);
            let psi: Vec<f64> = (0..SEPARATRIX_SAMPLES)
                .map(|k| -std::f64::consts::PI + 2.0 * std::f64::consts::PI * k as f64 / (SEPARATRIX_SAMPLES - 1) as f64)
                .collect();
            let half: Vec<f64> = psi
                .iter()
                .map(|&p| (a.abs() * (1.0 + a.signum() * p.cos()) / (4.0 * series.e_c)).max(0.0).sqrt())
                .collect();
            Separatrix {
                m,
                center_n,
                width: resonance_width(series, m),
                n_upper: half.iter().map(|h| center_n + h).collect(),
                n_lower: half.iter().map(|h| center_n - h).collect(),
                psi,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::CouplingKind;

    #[test]
    fn undriven_width() {
        let s = HarmonicSeries::from_parts(CouplingKind::Cosphi, 7.92, 0.0734, 7.294, 0.0, 0.0).unwrap();
        let seps = separatrices(&s, 3);
        assert_eq!(seps.len(), 1);
        assert!((seps[0].width - (4.0f64 * 3.96 / 0.0734).sqrt()).abs() < 1e-12);
        let max = seps[0].n_upper.iter().cloned().fold(f64::MIN, f64::max);
        assert!((2.0 * max - seps[0].width).abs() < 1e-9);
    }

    #[test]
    fn odd_resonances_absent_without_flux() {
        let s = HarmonicSeries::from_parts(CouplingKind::Cosphi, 7.92, 0.0734, 7.294, 1.2, 0.0).unwrap();
        let seps = separatrices(&s, 4);
        assert!(seps.iter().all(|x| x.m % 2 == 0));
        assert_eq!(seps.len(), 5);
        let c: Vec<f64> = seps.iter().map(|x| x.center_n).collect();
        assert!((c[3] - c[2] - 7.294 / (4.0 * 0.0734)).abs() < 1e-12);
    }
}
