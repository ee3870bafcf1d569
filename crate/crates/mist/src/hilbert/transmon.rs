//! Transmon in the charge basis: H = 4 E_C (n - n_g)^2 - E_J' cos(phi).

use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg::eigh;
use crate::params::{CircuitParams, HilbertSpec};

/// Lowest D transmon eigenstates and the phase and charge operators expressed in
/// them.
#[derive(Debug, Clone)]
pub struct TransmonEigenbasis {
    /// Ground-referenced energies (GHz), strictly increasing.
    pub energies: Vec<f64>,
    pub cos_phi: Mat<f64>,
    /// Real matrix S with <a|sin(phi)|b> = -i S_ab (sin(phi) is imaginary in a
    /// real eigenbasis).
    pub sin_phi: Mat<f64>,
    pub n_op: Mat<f64>,
    /// +1 / -1 under n -> -n when n_g = 0, otherwise `None`.
    pub parity: Option<Vec<i8>>,
    /// Eigenvectors in the charge basis, column k for state k; charge index i
    /// stands for n = i - (n_charge - 1)/2.
    pub charge_vectors: Mat<f64>,
}

impl TransmonEigenbasis {
    pub fn d(&self) -> usize {
        self.energies.len()
    }

    pub fn omega_q(&self) -> f64 {
        self.energies[1] - self.energies[0]
    }

    pub fn alpha_q(&self) -> f64 {
        self.energies[2] - 2.0 * self.energies[1] + self.energies[0]
    }

    /// Copy restricted to the lowest `d` states.
    pub fn truncated(&self, d: usize) -> Self {
        let sub = |m: &Mat<f64>| Mat::from_fn(d, d, |i, j| m[(i, j)]);
        Self {
            energies: self.energies[..d].to_vec(),
            cos_phi: sub(&self.cos_phi),
            sin_phi: sub(&self.sin_phi),
            n_op: sub(&self.n_op),
            parity: self.parity.as_ref().map(|p| p[..d].to_vec()),
            charge_vectors: Mat::from_fn(self.charge_vectors.nrows(), d, |i, j| self.charge_vectors[(i, j)]),
        }
    }
}

/// Transmon eigensystem with the mode Josephson energy 2 E_J.
pub fn transmon_eigensystem(p: &CircuitParams, spec: &HilbertSpec) -> Result<TransmonEigenbasis> {
    spec.validate(p)?;
    solve_transmon(p.e_cq, 2.0 * p.e_j, p.n_g, spec.n_charge, spec.d)
}

fn parity_half(e_c: f64, e_j: f64, half: usize, even: bool) -> Result<(Vec<f64>, Mat<f64>)> {
    // even: |0>, (|k>+|-k>)/sqrt2 ; odd: (|k>-|-k>)/sqrt2, k = 1..half
    let (size, offset) = if even { (half + 1, 0) } else { (half, 1) };
    let mut h = Mat::<f64>::zeros(size, size);
    for i in 0..size {
        let k = (i + offset) as f64;
        h[(i, i)] = 4.0 * e_c * k * k;
        if i + 1 < size {
            let t = if even && i == 0 { -e_j / std::f64::consts::SQRT_2 } else { -e_j / 2.0 };
            h[(i, i + 1)] = t;
            h[(i + 1, i)] = t;
        }
    }
    let e = eigh(&h)?;
    Ok((e.values, e.vectors))
}

/// Transmon eigensystem for explicit energies. `e_j_mode` is the full Josephson
/// energy multiplying cos(phi).
pub fn solve_transmon(e_c: f64, e_j_mode: f64, n_g: f64, n_charge: usize, d: usize) -> Result<TransmonEigenbasis> {
    if n_charge.is_multiple_of(2) || n_charge < 3 {
        return Err(Error::Dimension(format!("n_charge must be odd and >= 3, got {n_charge}")));
    }
    if d > n_charge {
        return Err(Error::Dimension(format!("D = {d} exceeds n_charge = {n_charge}")));
    }
    let half = (n_charge - 1) / 2;
    let charge = |i: usize| i as f64 - half as f64;

    // (energy, parity, charge-basis vector)
    let mut states: Vec<(f64, Option<i8>, Vec<f64>)> = Vec::new();
    if n_g == 0.0 {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (we, ve) = parity_half(e_c, e_j_mode, half, true)?;
        for k in 0..we.len().min(d) {
            let mut v = vec![0.0; n_charge];
            v[half] = ve[(0, k)];
            for m in 1..=half {
                v[half + m] = ve[(m, k)] * s;
                v[half - m] = ve[(m, k)] * s;
            }
            states.push((we[k], Some(1), v));
        }
        let (wo, vo) = parity_half(e_c, e_j_mode, half, false)?;
        for k in 0..wo.len().min(d) {
            let mut v = vec![0.0; n_charge];
            for m in 1..=half {
                v[half + m] = vo[(m - 1, k)] * s;
                v[half - m] = -vo[(m - 1, k)] * s;
            }
            states.push((wo[k], Some(-1), v));
        }
        states.sort_by(|a, b| a.0.total_cmp(&b.0));
        states.truncate(d);
    } else {
        let h = Mat::from_fn(n_charge, n_charge, |i, j| {
            if i == j {
                4.0 * e_c * (charge(i) - n_g).powi(2)
            } else if i.abs_diff(j) == 1 {
                -e_j_mode / 2.0
            } else {
                0.0
            }
        });
        let e = eigh(&h)?;
        for k in 0..d {
            states.push((e.values[k], None, e.vector(k).to_vec()));
        }
    }
    // deterministic sign: largest component over n >= 0 positive
    for (_, _, v) in states.iter_mut() {
        let mut best = half;
        for i in half..n_charge {
            if v[i].abs() > v[best].abs() + 1e-14 {
                best = i;
            }
        }
        if v[best] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
    for w in states.windows(2) {
        if w[1].0 < w[0].0 || !w[1].0.is_finite() {
            return Err(Error::Eigensolver("transmon levels are not sorted".into()));
        }
    }

    let e0 = states[0].0;
    let energies: Vec<f64> = states.iter().map(|s| s.0 - e0).collect();
    let vecs: Vec<&Vec<f64>> = states.iter().map(|s| &s.2).collect();
    let shift = |a: &[f64], b: &[f64]| -> (f64, f64) {
        // (sum a(n+1) b(n), sum a(n-1) b(n))
        let mut up = 0.0;
        let mut down = 0.0;
        for i in 0..n_charge {
            if i + 1 < n_charge {
                up += a[i + 1] * b[i];
            }
            if i >= 1 {
                down += a[i - 1] * b[i];
            }
        }
        (up, down)
    };
    let mut cos_phi = Mat::<f64>::zeros(d, d);
    let mut sin_phi = Mat::<f64>::zeros(d, d);
    let mut n_op = Mat::<f64>::zeros(d, d);
    for a in 0..d {
        for b in 0..d {
            let (up, down) = shift(vecs[a], vecs[b]);
            cos_phi[(a, b)] = 0.5 * (up + down);
            sin_phi[(a, b)] = 0.5 * (up - down);
            n_op[(a, b)] = (0..n_charge).map(|i| charge(i) * vecs[a][i] * vecs[b][i]).sum();
        }
    }
    let parity: Option<Vec<i8>> = states.iter().map(|s| s.1).collect();
    if let Some(par) = &parity {
        for a in 0..d {
            for b in 0..d {
                if par[a] == par[b] {
                    sin_phi[(a, b)] = 0.0;
                    n_op[(a, b)] = 0.0;
                } else {
                    cos_phi[(a, b)] = 0.0;
                }
            }
        }
    }
    let charge_vectors = Mat::from_fn(n_charge, d, |i, k| vecs[k][i]);
    Ok(TransmonEigenbasis { energies, cos_phi, sin_phi, n_op, parity, charge_vectors })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_rotor_limit() {
        let t = solve_transmon(0.2, 0.0, 0.0, 41, 5).unwrap();
        let want = [0.0, 0.8, 0.8, 3.2, 3.2];
        for (e, w) in t.energies.iter().zip(want) {
            assert!((e - w).abs() < 1e-12);
        }
        let t = solve_transmon(0.2, 0.0, 0.2, 41, 5).unwrap();
        let mut want: Vec<f64> = (-20..=20).map(|n: i32| 4.0 * 0.2 * (n as f64 - 0.2).powi(2)).collect();
        want.sort_by(|a, b| a.total_cmp(b));
        for k in 0..5 {
            assert!((t.energies[k] - (want[k] - want[0])).abs() < 1e-12);
        }
    }

    #[test]
    fn parity_blocks_equal_full_solve() {
        let a = solve_transmon(0.0734, 7.92, 0.0, 101, 8).unwrap();
        let b = solve_transmon(0.0734, 7.92, 1e-300, 101, 8).unwrap();
        for k in 0..8 {
            assert!((a.energies[k] - b.energies[k]).abs() < 1e-10);
            for l in 0..8 {
                assert!((a.cos_phi[(k, l)].abs() - b.cos_phi[(k, l)].abs()).abs() < 1e-9);
                assert!((a.n_op[(k, l)].abs() - b.n_op[(k, l)].abs()).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn harmonic_estimate_bracket() {
        let t = solve_transmon(0.0734, 7.92, 0.0, 501, 6).unwrap();
        let harmonic = (8.0 * 7.92 * 0.0734f64).sqrt() - 0.0734;
        assert!((t.omega_q() - harmonic).abs() < 0.02);
        assert!(t.alpha_q() < 0.0);
    }

    #[test]
    fn sin_phi_commutator_identity() {
        // [n, cos phi] = i sin phi  =>  (n C - C n)_ab = S_ab  (with sin = -i S)
        let t = solve_transmon(0.0734, 7.92, 0.0, 201, 30).unwrap();
        let comm = &t.n_op * &t.cos_phi - &t.cos_phi * &t.n_op;
        for a in 0..6 {
            for b in 0..6 {
                assert!((comm[(a, b)] - t.sin_phi[(a, b)]).abs() < 1e-6, "{a} {b}");
            }
        }
    }
}
