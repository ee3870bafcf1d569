//! Ladder labeling of dressed states |j, n_c>.

use faer::Mat;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{eigh, Eigen, FactorKind, HermitianOperator};

/// Overlap below which a ladder step is considered broken.
pub const LADDER_BREAK: f64 = 0.1;
/// Two candidates closer than this in overlap count as a labeling ambiguity.
pub const AMBIGUITY: f64 = 1e-3;

/// Photon ladders kept for analysis: the top 10% of the Fock space is dropped
/// because truncation distorts states near the edge.
pub fn usable_photons(d_c: usize) -> usize {
    d_c - d_c.div_ceil(10)
}

/// Labeled dressed energies and transmon occupations along the photon ladder.
/// `energy[j][n]` is E(j, n); a branch whose ladder broke is shorter than
/// `d_c_usable`.
#[derive(Debug, Clone, Serialize)]
pub struct BranchTable {
    pub d: usize,
    pub d_c: usize,
    pub d_c_usable: usize,
    pub energy: Vec<Vec<f64>>,
    pub nt: Vec<Vec<f64>>,
    pub confidence: Vec<Vec<f64>>,
    /// Eigenstate index behind each label.
    pub index: Vec<Vec<usize>>,
    /// (j, n) labels decided by the lower-energy tie break.
    pub ambiguities: Vec<(usize, usize)>,
}

impl BranchTable {
    pub fn len(&self, j: usize) -> usize {
        self.energy[j].len()
    }

    pub fn energy_at(&self, j: usize, n: usize) -> Option<f64> {
        self.energy.get(j)?.get(n).copied()
    }

    /// [E(j2, n) - E(j1, n)] over the rungs both branches reach.
    pub fn transition(&self, j1: usize, j2: usize) -> Vec<f64> {
        let len = self.len(j1).min(self.len(j2));
        (0..len).map(|n| self.energy[j2][n] - self.energy[j1][n]).collect()
    }

    /// E(1,1) - E(1,0) - E(0,1) + E(0,0)
    pub fn chi_qc(&self) -> Option<f64> {
        Some(self.energy_at(1, 1)? - self.energy_at(1, 0)? - self.energy_at(0, 1)? + self.energy_at(0, 0)?)
    }
}

/// Labeled table together with the eigenpairs it refers to.
#[derive(Debug, Clone)]
pub struct LabeledSpectrum {
    pub table: BranchTable,
    pub eigen: Eigen,
}

/// Diagonalise an undriven transmon (x) cavity Hamiltonian and label its
/// eigenstates along the photon ladder.
pub fn diagonalize_and_label(h: &HermitianOperator, d: usize, d_c: usize) -> Result<LabeledSpectrum> {
    if d * d_c != h.dim() {
        return Err(Error::Dimension(format!("D d_c = {} but H has dimension {}", d * d_c, h.dim())));
    }
    if h.basis.len() != 2 || h.factor_dim(FactorKind::CavityFock) != Some(d_c) {
        return Err(Error::Dimension("branch analysis needs a transmon (x) cavity operator".into()));
    }
    let eigen = eigh(&h.data)?;
    let table = label_eigenstates(&eigen, d, d_c, usable_photons(d_c));
    Ok(LabeledSpectrum { table, eigen })
}

/// <N_t> = sum_j j |<j, n|psi>|^2 for every eigenvector.
fn nt_all(eigen: &Eigen, d: usize, d_c: usize) -> Vec<f64> {
    (0..eigen.len())
        .map(|k| {
            let v = eigen.vector(k);
            (0..d).map(|j| j as f64 * v[j * d_c..(j + 1) * d_c].iter().map(|x| x * x).sum::<f64>()).sum()
        })
        .collect()
}

/// <N_t> of every labeled state.
pub fn nt_expectation(table: &BranchTable, eigen: &Eigen) -> Vec<Vec<f64>> {
    table
        .index
        .iter()
        .map(|row| {
            row.iter()
                .map(|&k| {
                    let v = eigen.vector(k);
                    (0..table.d)
                        .map(|j| j as f64 * v[j * table.d_c..(j + 1) * table.d_c].iter().map(|x| x * x).sum::<f64>())
                        .sum()
                })
                .collect()
        })
        .collect()
}

/// Apply c^dag on the cavity factor of a transmon (x) cavity vector.
pub fn apply_creation(v: &[f64], d: usize, d_c: usize) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for j in 0..d {
        for n in 0..d_c - 1 {
            out[j * d_c + n + 1] = ((n + 1) as f64).sqrt() * v[j * d_c + n];
        }
    }
    out
}

/// Greedy assignment of one rung: `overlaps[j]` holds |<psi_k|target_j>| for
/// every eigenstate k. Returns (eigen index, confidence) per branch, `None` when
/// the ladder breaks.
fn assign_rung(
    overlaps: &[Option<Vec<f64>>],
    values: &[f64],
    used: &mut [bool],
    ambiguous: &mut Vec<usize>,
) -> Vec<Option<(usize, f64)>> {
    let m = overlaps.len();
    // candidate lists sorted by descending overlap, ties by lower energy
    let lists: Vec<Option<Vec<usize>>> = overlaps
        .iter()
        .map(|o| {
            o.as_ref().map(|o| {
                let mut idx: Vec<usize> = (0..o.len()).filter(|&k| !used[k]).collect();
                idx.sort_by(|&a, &b| o[b].total_cmp(&o[a]).then(values[a].total_cmp(&values[b])));
                idx
            })
        })
        .collect();
    let mut cursor = vec![0usize; m];
    let mut out: Vec<Option<(usize, f64)>> = vec![None; m];
    let mut done: Vec<bool> = lists.iter().map(|l| l.is_none()).collect();
    loop {
        let mut pick: Option<(usize, usize, f64)> = None;
        for j in 0..m {
            if done[j] {
                continue;
            }
            let list = lists[j].as_ref().unwrap();
            let o = overlaps[j].as_ref().unwrap();
            while cursor[j] < list.len() && used[list[cursor[j]]] {
                cursor[j] += 1;
            }
            if cursor[j] >= list.len() {
                done[j] = true;
                continue;
            }
            let mut k = list[cursor[j]];
            let mut conf = o[k];
            // runner-up within the ambiguity window: lower eigenvalue wins
            let mut c2 = cursor[j] + 1;
            while c2 < list.len() && used[list[c2]] {
                c2 += 1;
            }
            if c2 < list.len() && conf - o[list[c2]] < AMBIGUITY && conf >= LADDER_BREAK {
                let k2 = list[c2];
                if !ambiguous.contains(&j) {
                    ambiguous.push(j);
                }
                if values[k2] < values[k] {
                    k = k2;
                    conf = o[k2];
                }
            }
            if pick.is_none_or(|(_, _, best)| conf > best) {
                pick = Some((j, k, conf));
            }
        }
        let Some((j, k, conf)) = pick else { break };
        done[j] = true;
        if conf >= LADDER_BREAK {
            used[k] = true;
            out[j] = Some((k, conf));
        }
    }
    out
}

/// Ladder labeling of an eigen decomposition (see [`diagonalize_and_label`]).
///
/// Rung 0 assigns each j to the eigenstate with the largest overlap with |j,0>.
/// Rung n+1 assigns |j,n+1> to the unassigned eigenstate that maximises
/// |<psi|c^dag|j,n>|. Within a rung the most confident branch picks first.
pub fn label_eigenstates(eigen: &Eigen, d: usize, d_c: usize, d_c_usable: usize) -> BranchTable {
    let n_states = eigen.len();
    let mut used = vec![false; n_states];
    let nt = nt_all(eigen, d, d_c);
    let mut energy = vec![Vec::new(); d];
    let mut nts = vec![Vec::new(); d];
    let mut confidence = vec![Vec::new(); d];
    let mut index: Vec<Vec<usize>> = vec![Vec::new(); d];
    let mut ambiguities = Vec::new();
    let mut alive = vec![true; d];

    for n in 0..d_c_usable.min(d_c) {
        let targets: Vec<Option<Vec<f64>>> = (0..d)
            .map(|j| {
                if !alive[j] {
                    return None;
                }
                Some(if n == 0 {
                    let mut t = vec![0.0; d * d_c];
                    t[j * d_c] = 1.0;
                    t
                } else {
                    let mut t = apply_creation(eigen.vector(index[j][n - 1]), d, d_c);
                    let s = crate::linalg::norm(&t);
                    t.iter_mut().for_each(|x| *x /= s);
                    t
                })
            })
            .collect();
        let live: Vec<usize> = (0..d).filter(|&j| alive[j]).collect();
        if live.is_empty() {
            break;
        }
        let w = Mat::from_fn(d * d_c, live.len(), |i, c| targets[live[c]].as_ref().unwrap()[i]);
        let o = eigen.vectors.transpose() * &w;
        let overlaps: Vec<Option<Vec<f64>>> = (0..d)
            .map(|j| live.iter().position(|&l| l == j).map(|c| (0..n_states).map(|k| o[(k, c)].abs()).collect()))
            .collect();
        let mut amb = Vec::new();
        let picks = assign_rung(&overlaps, &eigen.values, &mut used, &mut amb);
        for j in amb {
            log::debug!("ambiguous label for branch {j} at rung {n}");
            ambiguities.push((j, n));
        }
        for j in 0..d {
            if !alive[j] {
                continue;
            }
            match picks[j] {
                Some((k, conf)) => {
                    energy[j].push(eigen.values[k]);
                    nts[j].push(nt[k]);
                    confidence[j].push(conf);
                    index[j].push(k);
                }
                None => {
                    log::debug!("ladder for branch {j} broke at rung {n}");
                    alive[j] = false;
                }
            }
        }
    }
    BranchTable { d, d_c, d_c_usable, energy, nt: nts, confidence, index, ambiguities }
}
