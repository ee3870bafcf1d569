//! Dense symmetric eigensolver with automatic block splitting, tensor products and
//! the tagged operator type shared by every model.

use std::io::{Read, Write};

use faer::{Mat, MatRef, Side};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eigenpairs sorted by ascending eigenvalue. Column `k` of `vectors` is the
/// eigenvector belonging to `values[k]`.
#[derive(Debug, Clone)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Mat<f64>,
}

impl Eigen {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        self.vectors.col_as_slice(k)
    }

    /// Reorder eigenpairs; `order[i]` is the old index of the new column `i`.
    pub fn permuted(&self, order: &[usize]) -> Eigen {
        let n = self.vectors.nrows();
        let vectors = Mat::from_fn(n, order.len(), |i, j| self.vectors[(i, order[j])]);
        Eigen { values: order.iter().map(|&k| self.values[k]).collect(), vectors }
    }
}

fn eigh_dense(m: MatRef<'_, f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    let n = m.nrows();
    if n == 1 {
        return Ok((vec![m[(0, 0)]], Mat::from_fn(1, 1, |_, _| 1.0)));
    }
    let e = m.selfadjoint_eigendecomposition(Side::Lower);
    let s = e.s().column_vector();
    let values: Vec<f64> = (0..n).map(|i| s.read(i)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Eigensolver("non-finite eigenvalue".into()));
    }
    Ok((values, e.u().to_owned()))
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Index sets of the connected components of the sparsity graph of `m`
/// (entries that are exactly zero do not connect).
pub fn symmetry_blocks(m: &Mat<f64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut parent: Vec<usize> = (0..n).collect();
    for j in 0..n {
        let col = m.col_as_slice(j);
        for (i, &v) in col.iter().enumerate().take(j) {
            if v != 0.0 {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let r = find(&mut parent, i);
        if slot[r] == usize::MAX {
            slot[r] = blocks.len();
            blocks.push(Vec::new());
        }
        blocks[slot[r]].push(i);
    }
    blocks
}

/// Full eigendecomposition of a real symmetric matrix.
///
/// The matrix is split into the connected components of its exact-zero pattern,
/// so conserved parities are exploited automatically and eigenvectors carry
/// exact zeros outside their symmetry sector. Each eigenvector is signed so its
/// largest component is positive. Eigenvalues that coincide to 1e-10 relative are
/// ordered by descending largest component, i.e. by overlap with a bare product
/// state.
pub fn eigh(m: &Mat<f64>) -> Result<Eigen> {
    let n = m.nrows();
    if n != m.ncols() {
        return Err(Error::Dimension(format!("eigh on a {}x{} matrix", n, m.ncols())));
    }
    let blocks = symmetry_blocks(m);
    let mut values = Vec::with_capacity(n);
    let mut vectors = Mat::<f64>::zeros(n, n);
    let mut col = 0;
    for idx in &blocks {
        let sub = Mat::from_fn(idx.len(), idx.len(), |a, b| m[(idx[a], idx[b])]);
        let (w, v) = eigh_dense(sub.as_ref())?;
        for k in 0..idx.len() {
            values.push(w[k]);
            for (a, &row) in idx.iter().enumerate() {
                vectors[(row, col)] = v[(a, k)];
            }
            col += 1;
        }
    }
    let peak = |k: usize| -> (usize, f64) {
        let c = vectors.col_as_slice(k);
        let mut best = (0usize, 0.0f64);
        for (i, &x) in c.iter().enumerate() {
            if x.abs() > best.1.abs() + 1e-14 {
                best = (i, x);
            }
        }
        best
    };
    let peaks: Vec<(usize, f64)> = (0..n).map(peak).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (va, vb) = (values[a], values[b]);
        let tol = 1e-10 * (1.0 + va.abs().max(vb.abs()));
        if (va - vb).abs() > tol {
            va.total_cmp(&vb)
        } else {
            peaks[b].1.abs().total_cmp(&peaks[a].1.abs()).then(peaks[a].0.cmp(&peaks[b].0))
        }
    });
    let sorted_vectors = Mat::from_fn(n, n, |i, j| {
        let k = order[j];
        let s = if peaks[k].1 < 0.0 { -1.0 } else { 1.0 };
        s * vectors[(i, k)]
    });
    Ok(Eigen { values: order.iter().map(|&k| values[k]).collect(), vectors: sorted_vectors })
}

/// Kronecker product a (x) b.
pub fn kron(a: &Mat<f64>, b: &Mat<f64>) -> Mat<f64> {
    let (ra, ca, rb, cb) = (a.nrows(), a.ncols(), b.nrows(), b.ncols());
    Mat::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

pub fn identity(n: usize) -> Mat<f64> {
    Mat::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
}

pub fn diagonal(d: &[f64]) -> Mat<f64> {
    Mat::from_fn(d.len(), d.len(), |i, j| if i == j { d[i] } else { 0.0 })
}

pub fn max_abs(m: &Mat<f64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for &x in m.col_as_slice(j) {
            best = best.max(x.abs());
        }
    }
    best
}

/// y = M x
pub fn matvec(m: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; m.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        for (yi, &mij) in y.iter_mut().zip(m.col_as_slice(j)) {
            *yi += mij * xj;
        }
    }
    y
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Which tensor factor a basis index belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FactorKind {
    TransmonEigen,
    AncillaFock,
    CavityFock,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factor {
    pub kind: FactorKind,
    pub dim: usize,
}

/// Phase convention of the cavity factor.
///
/// `QuarterTurn` means the stored real matrix is U^dag H U with U|n> = i^n |n>.
/// That rotation maps -i(c - c^dag) onto c + c^dag, so charge-coupled models
/// become real. Entries in the standard basis are recovered by `entry`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CavityPhase {
    Standard,
    QuarterTurn,
}

/// Dense Hermitian operator on an ordered tensor-product basis. The factor
/// listed last varies fastest in the flattened index.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    pub data: Mat<f64>,
    pub basis: Vec<Factor>,
    pub cavity_phase: CavityPhase,
}

impl HermitianOperator {
    pub fn new(data: Mat<f64>, basis: Vec<Factor>) -> Result<Self> {
        let dim: usize = basis.iter().map(|f| f.dim).product();
        if data.nrows() != dim || data.ncols() != dim {
            return Err(Error::Dimension(format!(
                "matrix is {}x{} but basis has dimension {dim}",
                data.nrows(),
                data.ncols()
            )));
        }
        Ok(Self { data, basis, cavity_phase: CavityPhase::Standard })
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn factor_dim(&self, kind: FactorKind) -> Option<usize> {
        self.basis.iter().find(|f| f.kind == kind).map(|f| f.dim)
    }

    /// max |M - M^dag| / max |M|
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..j {
                worst = worst.max((self.data[(i, j)] - self.data[(j, i)]).abs());
            }
        }
        let scale = max_abs(&self.data);
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    fn cavity_index(&self, flat: usize) -> Option<usize> {
        let mut stride = 1;
        for f in self.basis.iter().rev() {
            if f.kind == FactorKind::CavityFock {
                return Some((flat / stride) % f.dim);
            }
            stride *= f.dim;
        }
        None
    }

    /// Matrix element in the standard (unrotated) basis.
    pub fn entry(&self, r: usize, c: usize) -> Complex64 {
        let v = self.data[(r, c)];
        match (self.cavity_phase, self.cavity_index(r), self.cavity_index(c)) {
            (CavityPhase::QuarterTurn, Some(nr), Some(nc)) => {
                // H = U H' U^dag, so H_rc = i^(n_r - n_c) H'_rc
                let k = (nr as i64 - nc as i64).rem_euclid(4);
                let phase = [Complex64::new(1.0, 0.0), Complex64::i(), -Complex64::new(1.0, 0.0), -Complex64::i()];
                phase[k as usize] * v
            }
            _ => Complex64::new(v, 0.0),
        }
    }

    /// Binary dump: two little-endian u64 (rows, cols), then row-major complex128
    /// little-endian (re, im).
    pub fn write_dump<W: Write>(&self, mut w: W) -> Result<()> {
        let n = self.dim() as u64;
        w.write_all(&n.to_le_bytes())?;
        w.write_all(&n.to_le_bytes())?;
        let mut row = Vec::with_capacity(16 * self.dim());
        for r in 0..self.dim() {
            row.clear();
            for c in 0..self.dim() {
                let z = self.entry(r, c);
                row.extend_from_slice(&z.re.to_le_bytes());
                row.extend_from_slice(&z.im.to_le_bytes());
            }
            w.write_all(&row)?;
        }
        Ok(())
    }
}

/// Read a dump written by [`HermitianOperator::write_dump`].
pub fn read_dump<R: Read>(mut r: R) -> Result<(usize, usize, Vec<Complex64>)> {
    let mut head = [0u8; 16];
    r.read_exact(&mut head)?;
    let rows = u64::from_le_bytes(head[..8].try_into().unwrap()) as usize;
    let cols = u64::from_le_bytes(head[8..].try_into().unwrap()) as usize;
    let mut buf = vec![0u8; rows * cols * 16];
    r.read_exact(&mut buf)?;
    let data = buf
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Ok((rows, cols, data))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_split_on_exact_zeros() {
        let m = Mat::from_fn(4, 4, |i, j| if (i + j) % 2 == 0 { 1.0 + (i * j) as f64 } else { 0.0 });
        let b = symmetry_blocks(&m);
        assert_eq!(b, vec![vec![0, 2], vec![1, 3]]);
    }

    #[test]
    fn blocked_eigh_matches_dense() {
        let m = Mat::from_fn(6, 6, |i, j| {
            if (i + j) % 2 == 0 {
                1.0 / (1.0 + (i as f64 - j as f64).abs()) + if i == j { i as f64 } else { 0.0 }
            } else {
                0.0
            }
        });
        let e = eigh(&m).unwrap();
        let (w, _) = eigh_dense(m.as_ref()).unwrap();
        for (a, b) in e.values.iter().zip(&w) {
            assert!((a - b).abs() < 1e-12);
        }
        for k in 0..6 {
            let v = e.vector(k);
            let mv = matvec(&m, v);
            for i in 0..6 {
                assert!((mv[i] - e.values[k] * v[i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kron_layout() {
        let a = diagonal(&[1.0, 2.0]);
        let b = Mat::from_fn(2, 2, |i, j| (2 * i + j) as f64);
        let k = kron(&a, &b);
        assert_eq!(k[(3, 2)], 2.0 * 2.0);
        assert_eq!(k[(1, 3)], 0.0);
        assert_eq!(k[(0, 1)], 1.0);
    }

    #[test]
    fn dump_round_trip_with_quarter_turn() {
        let data = Mat::from_fn(4, 4, |i, j| if i == j { i as f64 } else { 0.5 });
        let mut op = HermitianOperator::new(
            data,
            vec![
                Factor { kind: FactorKind::TransmonEigen, dim: 2 },
                Factor { kind: FactorKind::CavityFock, dim: 2 },
            ],
        )
        .unwrap();
        op.cavity_phase = CavityPhase::QuarterTurn;
        let mut buf = Vec::new();
        op.write_dump(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 16 * 16);
        let (r, c, z) = read_dump(&buf[..]).unwrap();
        assert_eq!((r, c), (4, 4));
        // rows 0 (n=0) and 1 (n=1): i^(0-1) = -i
        assert_eq!(z[1], Complex64::new(0.0, -0.5));
        assert_eq!(z[4], Complex64::new(0.0, 0.5));
        assert_eq!(z[2], Complex64::new(0.5, 0.0));
    }
}
