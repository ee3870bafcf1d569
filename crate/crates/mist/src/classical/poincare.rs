//! Stroboscopic sections and a Lyapunov-based chaos classification.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::harmonics::HarmonicSeries;
use super::integrator::{wrap_phase, IntegratorOptions, PeriodicFlow};
use super::separatrix::{resonance_center, resonance_width, separatrices, Separatrix};
use crate::error::Result;

/// lambda T above this marks a trajectory chaotic.
pub const CHAOS_THRESHOLD: f64 = 0.01;
/// Initial separation of the shadow trajectory.
pub const SHADOW_OFFSET: f64 = 1e-8;

#[derive(Debug, Clone, Serialize)]
pub struct ChaosReport {
    /// Largest Lyapunov estimate per trajectory (1/ns).
    pub lyapunov: Vec<f64>,
    pub chaotic: Vec<bool>,
    pub chaotic_fraction: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PoincareSection {
    /// Drive period (ns).
    pub period: f64,
    pub initial_conditions: Vec<(f64, f64)>,
    /// Stroboscopic samples (phi in [-pi, pi), n), including t = 0.
    pub points: Vec<Vec<(f64, f64)>>,
    pub separatrices: Vec<Separatrix>,
    pub chaos: ChaosReport,
}

#[derive(Debug, Clone, Copy)]
pub struct SectionOptions {
    pub n_periods: usize,
    pub integrator: IntegratorOptions,
    /// Highest resonance order drawn and used to size the default grid.
    pub m_max: usize,
}

impl Default for SectionOptions {
    fn default() -> Self {
        Self { n_periods: 2000, integrator: IntegratorOptions::default(), m_max: 2 }
    }
}

/// `count` initial conditions at phi = 0 with n spanning
/// +-(centre of resonance m_max + 2 widths).
pub fn default_initial_conditions(series: &HarmonicSeries, m_max: usize, count: usize) -> Vec<(f64, f64)> {
    let m = m_max as i64;
    let widest = (0..=m).map(|k| resonance_width(series, k)).fold(0.0, f64::max);
    let span = resonance_center(series, m) + 2.0 * widest;
    let count = count.max(1);
    if count == 1 {
        return vec![(0.0, 0.0)];
    }
    (0..count).map(|k| (0.0, -span + 2.0 * span * k as f64 / (count - 1) as f64)).collect()
}

/// Extra initial conditions on a ring of `per_ring` points just inside each
/// separatrix (at 90% of its half width), for denser sampling of the
/// resonance boundaries.
pub fn separatrix_rings(series: &HarmonicSeries, m_max: usize, per_ring: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for s in separatrices(series, m_max) {
        for k in 0..per_ring {
            let psi = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * k as f64 / per_ring as f64;
            let a = series.a(s.m);
            let half = (a.abs() * (1.0 + a.signum() * psi.cos()) / (4.0 * series.e_c)).max(0.0).sqrt();
            out.push((psi, s.center_n + 0.9 * half));
            out.push((psi, s.center_n - 0.9 * half));
        }
    }
    out
}

struct Run {
    points: Vec<(f64, f64)>,
    lyapunov: f64,
}

fn run_one(flow: &PeriodicFlow, ic: (f64, f64), n_periods: usize, period: f64) -> Run {
    let (mut phi, mut n) = ic;
    let (mut sphi, mut sn) = (phi + SHADOW_OFFSET, n);
    let mut points = Vec::with_capacity(n_periods + 1);
    points.push((wrap_phase(phi).0, n));
    let mut log_sum = 0.0;
    for _ in 0..n_periods {
        flow.period(&mut phi, &mut n);
        flow.period(&mut sphi, &mut sn);
        points.push((wrap_phase(phi).0, n));
        let (dphi, dn) = (sphi - phi, sn - n);
        let d = dphi.hypot(dn);
        if d > 0.0 && d.is_finite() {
            log_sum += (d / SHADOW_OFFSET).ln();
            let s = SHADOW_OFFSET / d;
            sphi = phi + dphi * s;
            sn = n + dn * s;
        } else {
            sphi = phi + SHADOW_OFFSET;
            sn = n;
        }
    }
    let lyapunov = if n_periods > 0 { log_sum / (n_periods as f64 * period) } else { 0.0 };
    Run { points, lyapunov }
}

/// Poincare section for the given initial conditions (parallel over
/// trajectories). Each trajectory carries a shadow started 1e-8 away in phi
/// and renormalised every period; lambda T > 0.01 counts as chaotic.
pub fn poincare_section(series: &HarmonicSeries, ics: &[(f64, f64)], opts: &SectionOptions) -> Result<PoincareSection> {
    let flow = PeriodicFlow::new(series, &opts.integrator)?;
    let period = series.period();
    let runs: Vec<Run> = ics.par_iter().map(|&ic| run_one(&flow, ic, opts.n_periods, period)).collect();
    let lyapunov: Vec<f64> = runs.iter().map(|r| r.lyapunov).collect();
    let chaotic: Vec<bool> = lyapunov.iter().map(|l| l * period > CHAOS_THRESHOLD).collect();
    let chaotic_fraction =
        if chaotic.is_empty() { 0.0 } else { chaotic.iter().filter(|&&c| c).count() as f64 / chaotic.len() as f64 };
    Ok(PoincareSection {
        period,
        initial_conditions: ics.to_vec(),
        points: runs.into_iter().map(|r| r.points).collect(),
        separatrices: separatrices(series, opts.m_max),
        chaos: ChaosReport { lyapunov, chaotic, chaotic_fraction },
    })
}

/// CSV with columns trajectory_id, period_index, phi, n.
pub fn write_section_csv<W: Write>(w: W, section: &PoincareSection) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["trajectory_id", "period_index", "phi", "n"])?;
    for (id, pts) in section.points.iter().enumerate() {
        for (k, (phi, n)) in pts.iter().enumerate() {
            wtr.write_record([id.to_string(), k.to_string(), format!("{phi:.12e}"), format!("{n:.12e}")])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

/// CSV with columns m, psi, n_upper, n_lower.
pub fn write_separatrix_csv<W: Write>(w: W, seps: &[Separatrix]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["m", "psi", "n_upper", "n_lower"])?;
    for s in seps {
        for k in 0..s.psi.len() {
            wtr.write_record([
                s.m.to_string(),
                format!("{:.12e}", s.psi[k]),
                format!("{:.12e}", s.n_upper[k]),
                format!("{:.12e}", s.n_lower[k]),
            ])?;
        }
    }
    wtr.flush()?;
    Ok(())
}
