//! Dispersive pointer states in the IQ plane and multi-state classification.

use std::io::{Read, Write};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default signal-to-noise ratio: pointer spread sigma = 1/SNR in transmission
/// units.
pub const DEFAULT_SNR: f64 = 50.0;
/// Disc radius for the resolved states, in sigma.
pub const DEFAULT_RADIUS_FACTOR: f64 = 2.0;
/// Radius of the catch-all disc for states 6 and above, in sigma.
pub const HIGH_STATE_RADIUS_FACTOR: f64 = 6.0;
/// States 0..RESOLVED get their own disc.
pub const RESOLVED: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointerState {
    pub k: usize,
    /// (I, Q)
    pub center: (f64, f64),
    /// Gaussian width per quadrature.
    pub sigma: f64,
}

/// Complex transmission of a Lorentzian cavity line of full width `kappa`
/// detuned by `delta` from the drive: S = 1 / (1 - 2 i delta / kappa).
pub fn lorentzian_transmission(delta: f64, kappa: f64) -> Complex64 {
    Complex64::new(1.0, 0.0) / Complex64::new(1.0, -2.0 * delta / kappa)
}

/// Shifts chi_k = k chi_qc for k = 0..count.
pub fn linear_chi(chi_qc: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| k as f64 * chi_qc).collect()
}

/// IQ centres for transmon states with cavity shifts `chi[k]` when driving at
/// `omega_d`: state k sees the cavity at omega_c + chi_k.
pub fn pointer_positions(omega_c: f64, kappa: f64, chi: &[f64], omega_d: f64, snr: f64) -> Result<Vec<PointerState>> {
    if !(kappa > 0.0) {
        return Err(Error::InvalidParameter(format!("kappa must be positive, got {kappa}")));
    }
    if !(snr > 0.0) {
        return Err(Error::InvalidParameter(format!("SNR must be positive, got {snr}")));
    }
    Ok(chi
        .iter()
        .enumerate()
        .map(|(k, &c)| {
            let s = lorentzian_transmission(omega_d - omega_c - c, kappa);
            PointerState { k, center: (s.re, s.im), sigma: 1.0 / snr }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    State(usize),
    /// States 6 and above, bunched near the off-resonant point.
    HighStates,
    Outlier,
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Label::State(k) => write!(f, "{k}"),
            Label::HighStates => write!(f, "6+"),
            Label::Outlier => write!(f, "outlier"),
        }
    }
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

/// Circular thresholds: one disc of `radius_factor` sigma per state k < 6 and
/// a 6-sigma disc for 6+ around the highest-k pointer supplied (when more than
/// six are given).
#[derive(Debug, Clone)]
pub struct Thresholds {
    pub discs: Vec<((f64, f64), f64)>,
    pub high: Option<((f64, f64), f64)>,
}

impl Thresholds {
    pub fn new(states: &[PointerState], radius_factor: f64) -> Result<Self> {
        let resolved: Vec<&PointerState> = states.iter().filter(|s| s.k < RESOLVED).collect();
        for (i, a) in resolved.iter().enumerate() {
            for b in &resolved[i + 1..] {
                let r = radius_factor * (a.sigma + b.sigma);
                if dist(a.center, b.center) <= r {
                    return Err(Error::OverlappingThresholds(a.k, b.k));
                }
            }
        }
        let discs = resolved.iter().map(|s| (s.center, radius_factor * s.sigma)).collect();
        let high = states
            .iter()
            .filter(|s| s.k >= RESOLVED)
            .max_by_key(|s| s.k)
            .map(|s| (s.center, HIGH_STATE_RADIUS_FACTOR * s.sigma));
        Ok(Self { discs, high })
    }

    pub fn label(&self, p: (f64, f64)) -> Label {
        // resolved discs do not overlap, so at most one contains p
        for (k, &(c, r)) in self.discs.iter().enumerate() {
            if dist(p, c) <= r {
                return Label::State(k);
            }
        }
        match self.high {
            Some((c, r)) if dist(p, c) <= r => Label::HighStates,
            _ => Label::Outlier,
        }
    }
}

/// Label every point; rejects configurations whose resolved discs overlap.
pub fn classify(points: &[(f64, f64)], states: &[PointerState], radius_factor: f64) -> Result<Vec<Label>> {
    let th = Thresholds::new(states, radius_factor)?;
    Ok(points.iter().map(|&p| th.label(p)).collect())
}

/// `shots` Gaussian samples around each pointer state. Each state draws from
/// its own ChaCha stream, so results do not depend on thread scheduling.
pub fn sample_shots(states: &[PointerState], shots: usize, seed: u64) -> Vec<(usize, (f64, f64))> {
    states
        .par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(s.k as u64);
            let normal = Normal::new(0.0, s.sigma).expect("positive sigma");
            (0..shots)
                .map(|_| (s.k, (s.center.0 + normal.sample(&mut rng), s.center.1 + normal.sample(&mut rng))))
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect()
}

/// Misassignment statistics from labeled shots.
#[derive(Debug, Clone, Serialize)]
pub struct Confusion {
    /// counts[true k][label], label columns 0..6 = states, 6 = 6+, 7 = outlier.
    pub counts: Vec<[usize; RESOLVED + 2]>,
    /// Fraction of shots from state k (< 6) labeled k+1 or k-1, worst case.
    pub adjacent_rate: f64,
    /// Fraction labeled as any other state (outliers excluded from both).
    pub wrong_state_rate: f64,
}

pub fn confusion(truth: &[usize], labels: &[Label], n_states: usize) -> Confusion {
    let mut counts = vec![[0usize; RESOLVED + 2]; n_states];
    for (&k, l) in truth.iter().zip(labels) {
        let col = match l {
            Label::State(j) => *j,
            Label::HighStates => RESOLVED,
            Label::Outlier => RESOLVED + 1,
        };
        counts[k][col] += 1;
    }
    let mut adjacent_rate: f64 = 0.0;
    let (mut wrong, mut assigned) = (0usize, 0usize);
    for (k, row) in counts.iter().enumerate() {
        let total: usize = row.iter().sum();
        if total == 0 {
            continue;
        }
        if k < RESOLVED {
            let adj = if k > 0 { row[k - 1] } else { 0 } + if k + 1 < RESOLVED + 1 { row[k + 1] } else { 0 };
            adjacent_rate = adjacent_rate.max(adj as f64 / total as f64);
        }
        let correct = if k < RESOLVED { row[k] } else { row[RESOLVED] };
        let in_disc = total - row[RESOLVED + 1];
        wrong += in_disc - correct;
        assigned += in_disc;
    }
    Confusion {
        counts,
        adjacent_rate,
        wrong_state_rate: if assigned > 0 { wrong as f64 / assigned as f64 } else { 0.0 },
    }
}

/// CSV with columns I, Q.
pub fn write_iq_csv<W: Write>(w: W, points: &[(f64, f64)]) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(["I", "Q"])?;
    for (i, q) in points {
        wtr.write_record([format!("{i:.12e}"), format!("{q:.12e}")])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_iq_csv<R: Read>(r: R) -> Result<Vec<(f64, f64)>> {
    #[derive(Deserialize)]
    struct Row {
        #[serde(rename = "I")]
        i: f64,
        #[serde(rename = "Q")]
        q: f64,
    }
    let mut rdr = csv::Reader::from_reader(r);
    rdr.deserialize::<Row>().map(|row| row.map(|r| (r.i, r.q)).map_err(Error::from)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn operating_point() -> Vec<PointerState> {
        // drive in the middle of the 0..5 pointer spread
        let chi = linear_chi(-0.00202, 10);
        pointer_positions(7.294, 0.0172, &chi, 7.294 + 2.5 * -0.00202, DEFAULT_SNR).unwrap()
    }

    #[test]
    fn center_point_gets_its_label() {
        let s = operating_point();
        for st in &s[..6] {
            assert_eq!(classify(&[st.center], &s, 2.0).unwrap()[0], Label::State(st.k));
        }
        assert_eq!(classify(&[s[9].center], &s, 2.0).unwrap()[0], Label::HighStates);
    }

    #[test]
    fn far_point_is_outlier() {
        let s = operating_point();
        let p = (s[0].center.0 + 10.0 * s[0].sigma, s[0].center.1 + 10.0 * s[0].sigma);
        assert_eq!(classify(&[p], &s, 2.0).unwrap()[0], Label::Outlier);
    }

    #[test]
    fn zero_shift_collapses_centres() {
        let s = pointer_positions(7.0, 0.0172, &[0.0; 4], 7.001, 50.0).unwrap();
        assert!(s.iter().all(|x| x.center == s[0].center));
        assert!(matches!(classify(&[(0.0, 0.0)], &s, 2.0), Err(Error::OverlappingThresholds(0, 1))));
    }

    #[test]
    fn high_states_converge() {
        let s = operating_point();
        let steps: Vec<f64> = s.windows(2).map(|w| dist(w[0].center, w[1].center)).collect();
        for w in steps.windows(2).skip(3) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn iq_csv_round_trip() {
        let pts = vec![(0.25, -0.5), (1e-3, 3.0)];
        let mut buf = Vec::new();
        write_iq_csv(&mut buf, &pts).unwrap();
        assert_eq!(read_iq_csv(&buf[..]).unwrap(), pts);
    }
}
