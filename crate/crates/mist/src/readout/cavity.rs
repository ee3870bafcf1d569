//! Linear cavity response to segmented drive envelopes (square and CLEAR).
//!
//! d alpha/dt = (i Delta - kappa/2) alpha + eps(t) with Delta = 2 pi detuning and
//! kappa = 2 pi kappa_c (1/ns). Within a segment of constant eps the solution is
//! alpha(t) = alpha_ss + (alpha_0 - alpha_ss) exp(lambda t),
//! lambda = i Delta - kappa/2, alpha_ss = -eps / lambda.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::optim::{nelder_mead_box, NelderMeadOptions};

/// Settling band, relative to the steady-state amplitude.
pub const SETTLE_FRACTION: f64 = 0.05;
/// Shortest CLEAR segment (ns).
pub const MIN_SEGMENT_NS: f64 = 2.0;
/// Total pulse length of the readout protocol (ns).
pub const PROTOCOL_NS: f64 = 500.0;
/// Grid spacing used to bracket settling times before bisection (ns).
const SCAN_NS: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Segment {
    pub duration: f64,
    pub amplitude: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseEnvelope {
    pub segments: Vec<Segment>,
    /// Index of the hold segment whose steady state defines ring-up.
    pub hold: usize,
}

/// Two-step overshoot: (a1, t1) then (a2, t2), amplitudes relative to the hold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClearShape {
    pub a1: f64,
    pub t1: f64,
    pub a2: f64,
    pub t2: f64,
}

impl PulseEnvelope {
    pub fn square(duration: f64, amplitude: Complex64) -> Result<Self> {
        let e = Self { segments: vec![Segment { duration, amplitude }], hold: 0 };
        e.validate()?;
        Ok(e)
    }

    /// Up-overshoot, up-compensation, hold and the mirrored ring-down segments
    /// (hold - a1, hold - a2), `total` ns long overall.
    pub fn clear(shape: ClearShape, hold: Complex64, total: f64) -> Result<Self> {
        if shape.t1 < MIN_SEGMENT_NS || shape.t2 < MIN_SEGMENT_NS {
            return Err(Error::InvalidParameter(format!("CLEAR segments must last at least {MIN_SEGMENT_NS} ns")));
        }
        let t_hold = total - 2.0 * (shape.t1 + shape.t2);
        if t_hold < MIN_SEGMENT_NS {
            return Err(Error::InvalidParameter(format!("no room for a hold segment in {total} ns")));
        }
        let seg = |duration: f64, amplitude: Complex64| Segment { duration, amplitude };
        let e = Self {
            segments: vec![
                seg(shape.t1, hold * shape.a1),
                seg(shape.t2, hold * shape.a2),
                seg(t_hold, hold),
                seg(shape.t1, hold * (1.0 - shape.a1)),
                seg(shape.t2, hold * (1.0 - shape.a2)),
            ],
            hold: 2,
        };
        e.validate()?;
        Ok(e)
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() || self.hold >= self.segments.len() {
            return Err(Error::InvalidParameter("envelope needs a hold segment".into()));
        }
        if let Some(s) = self.segments.iter().find(|s| !(s.duration > 0.0)) {
            return Err(Error::InvalidParameter(format!("segment duration must be positive, got {}", s.duration)));
        }
        Ok(())
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration).sum()
    }

    fn start_of(&self, k: usize) -> f64 {
        self.segments[..k].iter().map(|s| s.duration).sum()
    }

    /// Drive amplitude at time t (zero outside the envelope).
    pub fn amplitude_at(&self, t: f64) -> Complex64 {
        let mut start = 0.0;
        for s in &self.segments {
            if t >= start && t < start + s.duration {
                return s.amplitude;
            }
            start += s.duration;
        }
        Complex64::new(0.0, 0.0)
    }
}

#[derive(Debug, Clone, Copy)]
struct Line {
    lambda: Complex64,
    decay: f64,
}

impl Line {
    fn new(kappa_c: f64, detuning: f64) -> Result<Self> {
        if !(kappa_c > 0.0) {
            return Err(Error::InvalidParameter(format!("kappa_c must be positive, got {kappa_c}")));
        }
        let kappa = 2.0 * PI * kappa_c;
        Ok(Self { lambda: Complex64::new(-0.5 * kappa, 2.0 * PI * detuning), decay: 0.5 * kappa })
    }

    fn steady(&self, eps: Complex64) -> Complex64 {
        -eps / self.lambda
    }

    fn evolve(&self, alpha0: Complex64, eps: Complex64, t: f64) -> Complex64 {
        let ss = self.steady(eps);
        ss + (alpha0 - ss) * (self.lambda * t).exp()
    }
}

/// Field at the start of every segment plus the end of the envelope.
fn boundary_fields(env: &PulseEnvelope, line: &Line) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0)];
    for s in &env.segments {
        let a = *out.last().unwrap();
        out.push(line.evolve(a, s.amplitude, s.duration));
    }
    out
}

fn field_at(env: &PulseEnvelope, line: &Line, bounds: &[Complex64], t: f64) -> Complex64 {
    let mut start = 0.0;
    for (k, s) in env.segments.iter().enumerate() {
        if t < start + s.duration {
            return line.evolve(bounds[k], s.amplitude, (t - start).max(0.0));
        }
        start += s.duration;
    }
    line.evolve(*bounds.last().unwrap(), Complex64::new(0.0, 0.0), t - start)
}

/// Last time in [a, b] where `f` exceeds the band, found on a grid and refined
/// by bisection. `None` if `f` stays inside.
fn last_exit<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> Option<f64> {
    let n = ((b - a) / SCAN_NS).ceil().max(1.0) as usize;
    let h = (b - a) / n as f64;
    for k in (0..n).rev() {
        let (lo, hi) = (a + k as f64 * h, a + (k + 1) as f64 * h);
        if f(lo) > SETTLE_FRACTION && f(hi) <= SETTLE_FRACTION {
            let (mut l, mut r) = (lo, hi);
            for _ in 0..60 {
                let m = 0.5 * (l + r);
                if f(m) > SETTLE_FRACTION {
                    l = m;
                } else {
                    r = m;
                }
            }
            return Some(r);
        }
        if f(hi) > SETTLE_FRACTION {
            return Some(hi);
        }
    }
    None
}

#[derive(Debug, Clone, Serialize)]
pub struct CavityResponse {
    pub t: Vec<f64>,
    pub alpha: Vec<Complex64>,
    /// Steady state of the hold amplitude.
    pub steady_state: Complex64,
    /// Time after which alpha stays within 5% of the steady state for the rest
    /// of the hold; `None` if it never settles or there is no drive.
    pub ring_up: Option<f64>,
    /// Time after the hold ends until |alpha| stays below 5% of the steady state.
    pub ring_down: Option<f64>,
}

fn settling_times(env: &PulseEnvelope, line: &Line) -> (Complex64, Option<f64>, Option<f64>) {
    let bounds = boundary_fields(env, line);
    let ss = line.steady(env.segments[env.hold].amplitude);
    if ss.norm() == 0.0 {
        return (ss, None, None);
    }
    let t_hold = env.start_of(env.hold);
    let t_hold_end = t_hold + env.segments[env.hold].duration;
    let t_end = env.total_duration();

    // within the hold the deviation decays as exp(-kappa t / 2)
    let dev0 = (bounds[env.hold] - ss).norm() / ss.norm();
    let ring_up = if dev0 > SETTLE_FRACTION {
        let t = t_hold + (dev0 / SETTLE_FRACTION).ln() / line.decay;
        (t <= t_hold_end).then_some(t)
    } else {
        let dev = |t: f64| (field_at(env, line, &bounds, t) - ss).norm() / ss.norm();
        Some(if t_hold > 0.0 { last_exit(dev, 0.0, t_hold).unwrap_or(0.0) } else { 0.0 })
    };

    // after the envelope the field decays freely
    let amp_end = bounds.last().unwrap().norm() / ss.norm();
    let ring_down = if amp_end > SETTLE_FRACTION {
        Some(t_end + (amp_end / SETTLE_FRACTION).ln() / line.decay - t_hold_end)
    } else {
        let amp = |t: f64| field_at(env, line, &bounds, t).norm() / ss.norm();
        Some(if t_end > t_hold_end { last_exit(amp, t_hold_end, t_end).unwrap_or(t_hold_end) - t_hold_end } else { 0.0 })
    };
    (ss, ring_up, ring_down)
}

/// Field on a grid of spacing `dt` over the envelope and the free decay until
/// 5% settling (at least 100 ns), with ring-up and ring-down times.
pub fn cavity_response(env: &PulseEnvelope, kappa_c: f64, detuning: f64, dt: f64) -> Result<CavityResponse> {
    env.validate()?;
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    let line = Line::new(kappa_c, detuning)?;
    let (steady_state, ring_up, ring_down) = settling_times(env, &line);
    let bounds = boundary_fields(env, &line);
    let tail = (SETTLE_FRACTION.recip().ln() / line.decay).max(100.0);
    let t_stop = env.total_duration() + tail;
    let n = (t_stop / dt).ceil() as usize;
    let t: Vec<f64> = (0..=n).map(|k| k as f64 * dt).collect();
    let alpha = t.iter().map(|&x| field_at(env, &line, &bounds, x)).collect();
    Ok(CavityResponse { t, alpha, steady_state, ring_up, ring_down })
}

/// Closed-form ring-up of a square pulse on resonance, (2/kappa) ln(1/0.05).
pub fn square_ring_up_analytic(kappa_c: f64) -> f64 {
    SETTLE_FRACTION.recip().ln() / (PI * kappa_c)
}

#[derive(Debug, Clone, Copy)]
pub struct ClearOptions {
    /// Bound on |a1|, |a2| relative to the hold amplitude.
    pub max_amplitude_ratio: f64,
    pub max_segment_ns: f64,
    pub total_ns: f64,
}

impl Default for ClearOptions {
    fn default() -> Self {
        Self { max_amplitude_ratio: 4.0, max_segment_ns: 40.0, total_ns: PROTOCOL_NS }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClearResult {
    pub shape: ClearShape,
    pub envelope: PulseEnvelope,
    pub ring_up: f64,
    pub ring_down: f64,
    pub square_ring_up: f64,
    pub square_ring_down: f64,
}

/// Choose the CLEAR overshoot segments that minimise ring-up (ties broken by
/// ring-down): coarse grid search, then Nelder-Mead from the best grid point.
pub fn optimize_clear(kappa_c: f64, detuning: f64, hold: Complex64, opts: &ClearOptions) -> Result<ClearResult> {
    let line = Line::new(kappa_c, detuning)?;
    if hold.norm() == 0.0 {
        return Err(Error::InvalidParameter("hold amplitude must be nonzero".into()));
    }
    let penalty = 10.0 * opts.total_ns;
    let objective = |x: &[f64]| -> f64 {
        let shape = ClearShape { a1: x[0], t1: x[1], a2: x[2], t2: x[3] };
        match PulseEnvelope::clear(shape, hold, opts.total_ns) {
            Ok(env) => {
                let (_, up, down) = settling_times(&env, &line);
                up.unwrap_or(penalty) + 1e-3 * down.unwrap_or(penalty)
            }
            Err(_) => 2.0 * penalty,
        }
    };
    let r = opts.max_amplitude_ratio;
    let lo = [-r, MIN_SEGMENT_NS, -r, MIN_SEGMENT_NS];
    let hi = [r, opts.max_segment_ns, r, opts.max_segment_ns];
    let mut best = (f64::INFINITY, vec![1.0, MIN_SEGMENT_NS, 1.0, MIN_SEGMENT_NS]);
    let amps: Vec<f64> = (0..=8).map(|k| -r + 2.0 * r * k as f64 / 8.0).collect();
    let times: Vec<f64> = (0..6)
        .map(|k| MIN_SEGMENT_NS * (opts.max_segment_ns / MIN_SEGMENT_NS).powf(k as f64 / 5.0))
        .collect();
    for &a1 in &amps {
        for &t1 in &times {
            for &a2 in &amps {
                for &t2 in &times {
                    let x = vec![a1, t1, a2, t2];
                    let f = objective(&x);
                    if f < best.0 {
                        best = (f, x);
                    }
                }
            }
        }
    }
    let nm = NelderMeadOptions { max_evals: 3000, initial_step: 0.02, ..Default::default() };
    let m = nelder_mead_box(objective, &best.1, &lo, &hi, &nm);
    let x = if m.f < best.0 { m.x } else { best.1 };
    let shape = ClearShape { a1: x[0], t1: x[1], a2: x[2], t2: x[3] };
    let envelope = PulseEnvelope::clear(shape, hold, opts.total_ns)?;
    let (_, up, down) = settling_times(&envelope, &line);
    let square = PulseEnvelope::square(opts.total_ns, hold)?;
    let (_, sq_up, sq_down) = settling_times(&square, &line);
    Ok(ClearResult {
        shape,
        envelope,
        ring_up: up.unwrap_or(f64::INFINITY),
        ring_down: down.unwrap_or(f64::INFINITY),
        square_ring_up: sq_up.unwrap_or(f64::INFINITY),
        square_ring_down: sq_down.unwrap_or(f64::INFINITY),
    })
}

/// CSV with columns t_ns, re, im.
pub fn write_envelope_csv<W: Write>(w: W, t: &[f64], values: &[Complex64]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["t_ns", "re", "im"])?;
    for (t, v) in t.iter().zip(values) {
        wtr.write_record([format!("{t:.6}"), format!("{:.12e}", v.re), format!("{:.12e}", v.im)])?;
    }
    wtr.flush()?;
    Ok(())
}
