//! Crossings between photon-offset branches.

use serde::{Deserialize, Serialize};

use super::label::{apply_creation, LabeledSpectrum};
use crate::linalg::{dot, matvec, norm, HermitianOperator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossingKind {
    /// Gap below the resolution threshold (symmetry protected).
    Exact,
    Avoided,
}

/// A crossing between |j', n> and |j, n + delta>.
#[derive(Debug, Clone, Serialize)]
pub struct CrossingEvent {
    /// (lower j, higher j)
    pub branch_pair: (usize, usize),
    /// Photon offset between the two ladders.
    pub delta: usize,
    /// `true` when the branch with the larger j sits at rung n and the smaller j
    /// at rung n + delta.
    pub upper_first: bool,
    /// Rung of the first-listed branch at closest approach.
    pub n_c_star: f64,
    pub gap_mhz: f64,
    pub kind: CrossingKind,
    /// Labels followed the adiabatic states and exchanged <N_t>.
    pub adiabatic: bool,
    pub flux_ext: f64,
}

#[derive(Debug, Clone)]
pub struct CrossingSearch {
    pub pairs: Vec<(usize, usize)>,
    pub offsets: Vec<usize>,
    /// Gaps below this (MHz) are classified as exact.
    pub gap_threshold_mhz: f64,
    /// Ignore crossings above this rung.
    pub n_max: Option<usize>,
    /// Rungs walked back along c^dag to build the diabatic states.
    pub lookback: usize,
    /// Local gap minima above this are not considered crossings.
    pub max_gap_mhz: f64,
    /// Half-width in rungs of the window used to detect an <N_t> exchange.
    pub swap_window: usize,
}

impl Default for CrossingSearch {
    fn default() -> Self {
        Self {
            pairs: Vec::new(),
            offsets: vec![1],
            gap_threshold_mhz: 0.05,
            n_max: None,
            lookback: 2,
            max_gap_mhz: 500.0,
            swap_window: 4,
        }
    }
}

impl CrossingSearch {
    pub fn pairs(pairs: &[(usize, usize)]) -> Self {
        Self { pairs: pairs.to_vec(), ..Default::default() }
    }

    /// Every pair (j, k) with j in `js` and k != j below `d`.
    pub fn partners(js: &[usize], d: usize) -> Self {
        let mut pairs = Vec::new();
        for &j in js {
            for k in 0..d {
                let p = (j.min(k), j.max(k));
                if k != j && !pairs.contains(&p) {
                    pairs.push(p);
                }
            }
        }
        Self::pairs(&pairs)
    }
}

/// Effective coupling between diabatic continuations of (top, n) and
/// (bottom, n + delta): both are carried up the c^dag ladder from `lookback`
/// rungs earlier and the 2x2 Hamiltonian in their span is symmetrically
/// orthogonalised. Returns the minimal splitting 2|V| in GHz.
fn diabatic_gap(
    h: &HermitianOperator,
    spec: &LabeledSpectrum,
    top: usize,
    bottom: usize,
    n: usize,
    delta: usize,
    lookback: usize,
) -> f64 {
    let t = &spec.table;
    let (d, d_c) = (t.d, t.d_c);
    let n0 = n.saturating_sub(lookback);
    let carry = |j: usize, start: usize| {
        let mut v = spec.eigen.vector(t.index[j][start]).to_vec();
        for _ in 0..(n - n0) {
            v = apply_creation(&v, d, d_c);
            let s = norm(&v);
            v.iter_mut().for_each(|x| *x /= s);
        }
        v
    };
    let a = carry(top, n0);
    let b = carry(bottom, n0 + delta);
    let (ha, hb) = (matvec(&h.data, &a), matvec(&h.data, &b));
    let s = dot(&a, &b);
    let (h11, h22, h12) = (dot(&a, &ha), dot(&b, &hb), dot(&a, &hb));
    let v = (h12 - 0.5 * s * (h11 + h22)) / (1.0 - s * s);
    2.0 * v.abs()
}

/// Search the labeled spectrum for crossings between the requested pairs.
///
/// For a pair (j, k) and offset delta the gap function
/// g(n) = E(top, n) - E(bottom, n + delta) is scanned in both orientations.
/// A sign change of g is a crossing that the labels followed diabatically; its
/// splitting is estimated from the coupling of the diabatic states. A local
/// minimum of |g| with an exchange of <N_t> between the two branches is a
/// crossing the labels followed adiabatically; its splitting is the minimum of a
/// parabola fitted to g^2.
pub fn find_crossings(
    h: &HermitianOperator,
    spec: &LabeledSpectrum,
    search: &CrossingSearch,
    flux_ext: f64,
) -> Vec<CrossingEvent> {
    let t = &spec.table;
    let mut out = Vec::new();
    for &(x, y) in &search.pairs {
        let (lo, hi) = (x.min(y), x.max(y));
        if hi >= t.d || lo == hi {
            continue;
        }
        for &delta in &search.offsets {
            for upper_first in [true, false] {
                let (top, bottom) = if upper_first { (hi, lo) } else { (lo, hi) };
                let mut len = t.len(top).min(t.len(bottom).saturating_sub(delta));
                if let Some(m) = search.n_max {
                    len = len.min(m + 1);
                }
                if len < 2 {
                    continue;
                }
                let g: Vec<f64> = (0..len).map(|n| t.energy[top][n] - t.energy[bottom][n + delta]).collect();
                let mut push = |n_star: f64, gap: f64, adiabatic: bool| {
                    let gap_mhz = gap * 1e3;
                    out.push(CrossingEvent {
                        branch_pair: (lo, hi),
                        delta,
                        upper_first,
                        n_c_star: n_star,
                        gap_mhz,
                        kind: if gap_mhz < search.gap_threshold_mhz { CrossingKind::Exact } else { CrossingKind::Avoided },
                        adiabatic,
                        flux_ext,
                    });
                };
                for n in 0..len - 1 {
                    if g[n] == 0.0 || g[n] * g[n + 1] < 0.0 {
                        let frac = if g[n] == 0.0 { 0.0 } else { g[n] / (g[n] - g[n + 1]) };
                        let m = if frac <= 0.5 { n } else { n + 1 };
                        let gap = diabatic_gap(h, spec, top, bottom, m, delta, search.lookback);
                        push(n as f64 + frac, gap, false);
                    }
                }
                let w = search.swap_window;
                for n in 1..len - 1 {
                    let (a, b, c) = (g[n - 1], g[n], g[n + 1]);
                    let same_sign = a * b > 0.0 && b * c > 0.0;
                    if !(same_sign && b.abs() < a.abs() && b.abs() <= c.abs() && b.abs() * 1e3 < search.max_gap_mhz) {
                        continue;
                    }
                    let (before, after) = (n.saturating_sub(w), (n + w).min(len - 1));
                    let d_top = t.nt[top][after] - t.nt[top][before];
                    let d_bot = t.nt[bottom][after + delta] - t.nt[bottom][before + delta];
                    let need = 0.3 * (hi - lo) as f64;
                    if !(d_top * d_bot < 0.0 && d_top.abs() > need && d_bot.abs() > need) {
                        continue;
                    }
                    // parabola through g^2 at n-1, n, n+1
                    let (qa, qb, qc) = (a * a, b * b, c * c);
                    let curv = qa - 2.0 * qb + qc;
                    let (shift, min_sq) = if curv > 0.0 {
                        let s = 0.5 * (qa - qc) / curv;
                        (s, qb - 0.25 * (qa - qc) * s)
                    } else {
                        (0.0, qb)
                    };
                    push(n as f64 + shift, min_sq.max(0.0).sqrt(), true);
                }
            }
        }
    }
    out.sort_by(|a, b| {
        a.branch_pair
            .cmp(&b.branch_pair)
            .then(a.delta.cmp(&b.delta))
            .then(a.n_c_star.total_cmp(&b.n_c_star))
            .then(b.upper_first.cmp(&a.upper_first))
    });
    out
}
