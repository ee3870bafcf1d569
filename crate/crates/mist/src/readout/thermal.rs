//! Effective temperature from measured state populations.

use serde::Serialize;

use crate::optim::golden_section;
use crate::params::ghz_to_millikelvin;

/// Number of states entering the fit (0..=4).
pub const FITTED_STATES: usize = 5;
/// Temperatures below this are reported as unresolved.
pub const RESOLUTION_MK: f64 = 1.0;
const T_MIN_MK: f64 = 0.01;
const T_MAX_MK: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThermalStatus {
    Ok,
    /// Best fit below 1 mK; `t_eff_mk` is an upper bound.
    BelowResolution,
    /// Populations are consistent only with an infinite (or negative) temperature.
    Unphysical,
}

#[derive(Debug, Clone, Serialize)]
pub struct ThermalFitResult {
    pub t_eff_mk: f64,
    /// Boltzmann populations at `t_eff_mk` for every supplied energy.
    pub populations: Vec<f64>,
    /// Sum of squared differences over the fitted states.
    pub residual: f64,
    pub status: ThermalStatus,
    /// Measured populations were not decreasing over the fitted states.
    pub non_monotone: bool,
}

/// Boltzmann weights at temperature `t_mk` (mK) for energies in GHz above the
/// ground state, normalised over the given states.
pub fn boltzmann(energies: &[f64], t_mk: f64) -> Vec<f64> {
    let beta = ghz_to_millikelvin() / t_mk;
    let e0 = energies.iter().cloned().fold(f64::INFINITY, f64::min);
    let w: Vec<f64> = energies.iter().map(|e| (-(e - e0) * beta).exp()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

/// Least-squares Boltzmann fit to populations of states 0..=4 (fewer if fewer
/// are given). `energies[k]` is the energy of state k above the ground state in
/// GHz. Both the data and the model are renormalised over the fitted states,
/// so unassigned shots do not bias the temperature.
pub fn thermal_fit(populations: &[f64], energies: &[f64]) -> ThermalFitResult {
    let m = FITTED_STATES.min(populations.len()).min(energies.len());
    let total: f64 = populations[..m].iter().sum();
    let data: Vec<f64> = populations[..m].iter().map(|p| if total > 0.0 { p / total } else { 0.0 }).collect();
    let cost = |log_t: f64| {
        let model = boltzmann(&energies[..m], log_t.exp());
        model.iter().zip(&data).map(|(a, b)| (a - b).powi(2)).sum::<f64>()
    };
    let (log_t, residual) = golden_section(cost, T_MIN_MK.ln(), T_MAX_MK.ln(), 1e-12);
    let t = log_t.exp();
    let non_monotone = data.windows(2).any(|w| w[1] > w[0]);
    let status = if t > 0.5 * T_MAX_MK {
        ThermalStatus::Unphysical
    } else if t < RESOLUTION_MK {
        ThermalStatus::BelowResolution
    } else {
        ThermalStatus::Ok
    };
    if non_monotone {
        log::warn!("populations are not monotone; thermal fit residual {residual:e}");
    }
    ThermalFitResult {
        t_eff_mk: if status == ThermalStatus::BelowResolution { RESOLUTION_MK } else { t },
        populations: boltzmann(energies, t),
        residual,
        status,
        non_monotone,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spectrum() -> Vec<f64> {
        // levels of a weakly anharmonic transmon (GHz above ground)
        vec![0.0, 2.0687, 4.056, 5.96, 7.78, 9.51]
    }

    #[test]
    fn round_trip() {
        for t in [10.0, 72.0, 300.0] {
            let p = boltzmann(&spectrum(), t);
            let r = thermal_fit(&p, &spectrum());
            assert!((r.t_eff_mk / t - 1.0).abs() < 1e-6, "{t} -> {}", r.t_eff_mk);
            assert_eq!(r.status, ThermalStatus::Ok);
        }
    }

    #[test]
    fn ground_state_only() {
        let r = thermal_fit(&[1.0, 0.0, 0.0, 0.0, 0.0], &spectrum());
        assert_eq!(r.status, ThermalStatus::BelowResolution);
        assert_eq!(r.t_eff_mk, RESOLUTION_MK);
    }

    #[test]
    fn equal_populations_unphysical() {
        let r = thermal_fit(&[0.2; 5], &spectrum());
        assert_eq!(r.status, ThermalStatus::Unphysical);
    }

    #[test]
    fn inverted_populations_flagged() {
        let r = thermal_fit(&[0.5, 0.1, 0.3, 0.05, 0.05], &spectrum());
        assert!(r.non_monotone);
        assert!(r.residual > 1e-3);
    }
}
