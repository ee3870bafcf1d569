//! Symplectic splitting integrator for the driven pendulum.
//!
//! Energies are in GHz (h = 1), so with t in ns Hamilton's equations read
//! dphi/dt = 2 pi dH/dn = 2 pi 8 E_C n and
//! dn/dt = -2 pi dH/dphi = -2 pi sum_n A_n sin(phi - n w_d t).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::harmonics::HarmonicSeries;
use crate::error::{Error, Result};

pub const MIN_STEPS_PER_PERIOD: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Splitting {
    /// Kick-drift-kick, second order.
    Strang,
    /// Triple-jump composition of Strang steps, fourth order.
    Yoshida4,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IntegratorOptions {
    pub steps_per_period: usize,
    pub splitting: Splitting,
    /// Record every step instead of once per period.
    pub dense: bool,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { steps_per_period: 1024, splitting: Splitting::Yoshida4, dense: false }
    }
}

/// Wrap to [-pi, pi) and return the number of turns removed.
pub fn wrap_phase(phi: f64) -> (f64, i64) {
    let w = ((phi + PI) / (2.0 * PI)).floor();
    let mut wrapped = phi - 2.0 * PI * w;
    if wrapped >= PI {
        wrapped -= 2.0 * PI;
    }
    (wrapped, w as i64)
}

/// Kick and drift weights of one step, in units of the step size. Kick j acts
/// at offset `kick_time[j]` within the step.
#[derive(Debug, Clone)]
struct Scheme {
    kick: Vec<f64>,
    drift: Vec<f64>,
    kick_time: Vec<f64>,
}

impl Scheme {
    fn new(s: Splitting) -> Self {
        match s {
            Splitting::Strang => Self { kick: vec![0.5, 0.5], drift: vec![1.0], kick_time: vec![0.0, 1.0] },
            Splitting::Yoshida4 => {
                let c = 2f64.powf(1.0 / 3.0);
                let w1 = 1.0 / (2.0 - c);
                let w0 = -c / (2.0 - c);
                Self {
                    kick: vec![0.5 * w1, 0.5 * (w1 + w0), 0.5 * (w0 + w1), 0.5 * w1],
                    drift: vec![w1, w0, w1],
                    kick_time: vec![0.0, w1, w1 + w0, 1.0],
                }
            }
        }
    }
}

/// C(t) = sum A_n cos(n w t), S(t) = sum A_n sin(n w t).
fn drive_sums(series: &HarmonicSeries, t: f64) -> (f64, f64) {
    let th = 2.0 * PI * series.omega_d * t;
    let (mut c, mut s) = (0.0, 0.0);
    for (n, a) in series.iter() {
        if a != 0.0 {
            let (sn, cn) = (n as f64 * th).sin_cos();
            c += a * cn;
            s += a * sn;
        }
    }
    (c, s)
}

#[inline]
fn kick(n: &mut f64, phi: f64, dt: f64, c: f64, s: f64) {
    let (sp, cp) = phi.sin_cos();
    *n -= 2.0 * PI * dt * (sp * c - cp * s);
}

/// Step-by-step flow with the drive sums tabulated over one period.
#[derive(Debug, Clone)]
pub struct PeriodicFlow {
    scheme: Scheme,
    steps: usize,
    h: f64,
    drift_rate: f64,
    /// (C, S) at every kick of every step in one period.
    table: Vec<(f64, f64)>,
}

impl PeriodicFlow {
    pub fn new(series: &HarmonicSeries, opts: &IntegratorOptions) -> Result<Self> {
        if opts.steps_per_period < MIN_STEPS_PER_PERIOD {
            return Err(Error::TooFewSteps(opts.steps_per_period));
        }
        let scheme = Scheme::new(opts.splitting);
        let steps = opts.steps_per_period;
        let h = series.period() / steps as f64;
        let mut table = Vec::with_capacity(steps * scheme.kick.len());
        for k in 0..steps {
            for &off in &scheme.kick_time {
                table.push(drive_sums(series, (k as f64 + off) * h));
            }
        }
        Ok(Self { scheme, steps, h, drift_rate: 2.0 * PI * 8.0 * series.e_c, table })
    }

    pub fn steps_per_period(&self) -> usize {
        self.steps
    }

    pub fn step_size(&self) -> f64 {
        self.h
    }

    /// Advance by step `k` (0-based within the period) of the tabulated period.
    #[inline]
    pub fn step(&self, k: usize, phi: &mut f64, n: &mut f64) {
        let nk = self.scheme.kick.len();
        let row = &self.table[k * nk..(k + 1) * nk];
        for ((&(c, s), &a), &b) in row.iter().zip(&self.scheme.kick).zip(&self.scheme.drift) {
            kick(n, *phi, a * self.h, c, s);
            *phi += b * self.h * self.drift_rate * *n;
        }
        let (c, s) = row[nk - 1];
        kick(n, *phi, self.scheme.kick[nk - 1] * self.h, c, s);
    }

    /// Advance by one full drive period.
    pub fn period(&self, phi: &mut f64, n: &mut f64) {
        for k in 0..self.steps {
            self.step(k, phi, n);
        }
    }
}

/// `n_steps` steps of size `h` (negative runs backwards) from time `t0`,
/// evaluating the drive directly. Returns (phi, n).
pub fn flow(series: &HarmonicSeries, phi: f64, n: f64, t0: f64, h: f64, n_steps: usize, splitting: Splitting) -> (f64, f64) {
    let sc = Scheme::new(splitting);
    let rate = 2.0 * PI * 8.0 * series.e_c;
    let (mut phi, mut n) = (phi, n);
    let nk = sc.kick.len();
    for k in 0..n_steps {
        let t = t0 + k as f64 * h;
        for j in 0..sc.drift.len() {
            let (c, s) = drive_sums(series, t + sc.kick_time[j] * h);
            kick(&mut n, phi, sc.kick[j] * h, c, s);
            phi += sc.drift[j] * h * rate * n;
        }
        let (c, s) = drive_sums(series, t + sc.kick_time[nk - 1] * h);
        kick(&mut n, phi, sc.kick[nk - 1] * h, c, s);
    }
    (phi, n)
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub t: Vec<f64>,
    /// Wrapped to [-pi, pi).
    pub phi: Vec<f64>,
    pub n: Vec<f64>,
    /// Turns removed by the wrapping.
    pub winding: Vec<i64>,
    pub energy: Vec<f64>,
    /// max |H - H(0)| / max(|H(0)|, 2 E_J) over the samples; meaningful as a
    /// conservation check only without drive.
    pub energy_drift: f64,
}

/// Integrate from t = 0, sampling once per period (or every step if dense).
pub fn integrate_trajectory(
    series: &HarmonicSeries,
    ic: (f64, f64),
    n_periods: usize,
    opts: &IntegratorOptions,
) -> Result<Trajectory> {
    let flow = PeriodicFlow::new(series, opts)?;
    let (mut phi, mut n) = ic;
    let h = flow.step_size();
    let cap = if opts.dense { n_periods * flow.steps + 1 } else { n_periods + 1 };
    let mut tr = Trajectory {
        t: Vec::with_capacity(cap),
        phi: Vec::with_capacity(cap),
        n: Vec::with_capacity(cap),
        winding: Vec::with_capacity(cap),
        energy: Vec::with_capacity(cap),
        energy_drift: 0.0,
    };
    let record = |tr: &mut Trajectory, t: f64, phi: f64, n: f64| {
        let (w, turns) = wrap_phase(phi);
        tr.t.push(t);
        tr.phi.push(w);
        tr.n.push(n);
        tr.winding.push(turns);
        tr.energy.push(series.hamiltonian(phi, n, t));
    };
    record(&mut tr, 0.0, phi, n);
    for p in 0..n_periods {
        if opts.dense {
            for k in 0..flow.steps {
                flow.step(k, &mut phi, &mut n);
                record(&mut tr, (p * flow.steps + k + 1) as f64 * h, phi, n);
            }
        } else {
            flow.period(&mut phi, &mut n);
            record(&mut tr, (p + 1) as f64 * series.period(), phi, n);
        }
    }
    let e0 = tr.energy[0];
    let scale = e0.abs().max(series.e_j_mode);
    tr.energy_drift = tr.energy.iter().map(|e| (e - e0).abs()).fold(0.0, f64::max) / scale;
    Ok(tr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::CouplingKind;

    fn undriven() -> HarmonicSeries {
        HarmonicSeries::from_parts(CouplingKind::Cosphi, 7.92, 0.0734, 7.294, 0.0, 0.0).unwrap()
    }

    #[test]
    fn wrapping() {
        let (w, k) = wrap_phase(3.0 * PI);
        assert!((w + PI).abs() < 1e-12 && k == 2);
        let (w, k) = wrap_phase(-0.5);
        assert!(w == -0.5 && k == 0);
    }

    #[test]
    fn too_few_steps_rejected() {
        let opts = IntegratorOptions { steps_per_period: 32, ..Default::default() };
        assert!(matches!(integrate_trajectory(&undriven(), (0.1, 0.0), 1, &opts), Err(Error::TooFewSteps(32))));
    }

    #[test]
    fn small_oscillation_at_plasma_frequency() {
        let s = undriven();
        let opts = IntegratorOptions { dense: true, ..Default::default() };
        let tr = integrate_trajectory(&s, (0.01, 0.0), 60, &opts).unwrap();
        // upward zero crossings of phi
        let mut crossings = Vec::new();
        for k in 1..tr.phi.len() {
            if tr.phi[k - 1] < 0.0 && tr.phi[k] >= 0.0 {
                let f = tr.phi[k - 1] / (tr.phi[k - 1] - tr.phi[k]);
                crossings.push(tr.t[k - 1] + f * (tr.t[k] - tr.t[k - 1]));
            }
        }
        let period = (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64;
        let wp = (8.0 * 0.0734 * 7.92f64).sqrt();
        assert!((1.0 / period / wp - 1.0).abs() < 0.01, "{} vs {wp}", 1.0 / period);
    }

    #[test]
    fn matches_direct_flow() {
        let s = HarmonicSeries::from_parts(CouplingKind::Transverse, 7.92, 0.0734, 7.294, 1.5, 0.0).unwrap();
        let opts = IntegratorOptions { steps_per_period: 128, ..Default::default() };
        let tr = integrate_trajectory(&s, (0.4, 3.0), 3, &opts).unwrap();
        let (phi, n) = flow(&s, 0.4, 3.0, 0.0, s.period() / 128.0, 3 * 128, Splitting::Yoshida4);
        assert!((wrap_phase(phi).0 - tr.phi[3]).abs() < 1e-10 && (n - tr.n[3]).abs() < 1e-10);
    }
}
