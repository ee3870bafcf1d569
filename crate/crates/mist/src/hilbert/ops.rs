//! Fock-space operators and matrix functions of a quadrature.

use faer::Mat;

use crate::error::{Error, Result};
use crate::linalg::eigh;

/// Annihilation operator a on d Fock states.
pub fn annihilation(d: usize) -> Mat<f64> {
    Mat::from_fn(d, d, |i, j| if j == i + 1 { (j as f64).sqrt() } else { 0.0 })
}

/// Creation operator a^dag on d Fock states.
pub fn creation(d: usize) -> Mat<f64> {
    Mat::from_fn(d, d, |i, j| if i == j + 1 { (i as f64).sqrt() } else { 0.0 })
}

/// Quadrature X = a + a^dag on d Fock states.
pub fn quadrature(d: usize) -> Mat<f64> {
    Mat::from_fn(d, d, |i, j| {
        if j == i + 1 {
            (j as f64).sqrt()
        } else if i == j + 1 {
            (i as f64).sqrt()
        } else {
            0.0
        }
    })
}

/// Spectral decomposition of X = a + a^dag built in `d + buffer` Fock states,
/// from which cos(sX) and sin(sX) are evaluated and truncated to `d`.
///
/// A Taylor series of these functions loses accuracy quickly at large Fock
/// numbers; the buffered spectral route stays exact on the retained block as
/// long as the buffer is wide enough (see [`verify_buffer`]).
#[derive(Debug, Clone)]
pub struct QuadratureBasis {
    pub d: usize,
    pub buffer: usize,
    nodes: Vec<f64>,
    /// first `d` rows of the eigenvector matrix of X
    head: Mat<f64>,
}

impl QuadratureBasis {
    pub fn new(d: usize, buffer: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::Dimension("quadrature basis needs d >= 1".into()));
        }
        let m = d + buffer;
        let e = eigh(&quadrature(m))?;
        let head = Mat::from_fn(d, m, |i, k| e.vectors[(i, k)]);
        Ok(Self { d, buffer, nodes: e.values, head })
    }

    fn apply(&self, f: impl Fn(f64) -> f64) -> Mat<f64> {
        let m = self.nodes.len();
        let scaled = Mat::from_fn(self.d, m, |i, k| self.head[(i, k)] * f(self.nodes[k]));
        &scaled * self.head.transpose()
    }

    /// cos(sX) and sin(sX). X is odd under photon parity, so cos(sX) only
    /// connects Fock states whose index differs by an even number and sin(sX)
    /// by an odd number; those selection rules are imposed exactly.
    pub fn cos_sin(&self, scale: f64) -> (Mat<f64>, Mat<f64>) {
        let mut c = self.apply(|x| (scale * x).cos());
        let mut s = self.apply(|x| (scale * x).sin());
        for j in 0..self.d {
            for i in 0..self.d {
                if (i + j) % 2 == 1 {
                    c[(i, j)] = 0.0;
                } else {
                    s[(i, j)] = 0.0;
                }
            }
        }
        (c, s)
    }

    /// cos(sX + offset) = cos(offset) cos(sX) - sin(offset) sin(sX)
    pub fn shifted_cos(&self, scale: f64, offset: f64) -> Mat<f64> {
        let (c, s) = self.cos_sin(scale);
        combine(&c, offset.cos(), &s, -offset.sin())
    }

    /// sin(sX + offset) = sin(offset) cos(sX) + cos(offset) sin(sX)
    pub fn shifted_sin(&self, scale: f64, offset: f64) -> Mat<f64> {
        let (c, s) = self.cos_sin(scale);
        combine(&c, offset.sin(), &s, offset.cos())
    }
}

fn combine(a: &Mat<f64>, ca: f64, b: &Mat<f64>, cb: f64) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| {
        // keep exact zeros exact when a coefficient vanishes
        let x = if ca == 0.0 { 0.0 } else { ca * a[(i, j)] };
        let y = if cb == 0.0 { 0.0 } else { cb * b[(i, j)] };
        x + y
    })
}

/// Check that `buffer` extra Fock states suffice for cos(sX + offset) on the
/// leading `d` states: the result must not move by more than 1e-8 when the
/// buffer is doubled.
pub fn verify_buffer(d: usize, buffer: usize, scale: f64, offset: f64) -> Result<()> {
    let a = QuadratureBasis::new(d, buffer)?.shifted_cos(scale, offset);
    let b = QuadratureBasis::new(d, 2 * buffer.max(10))?.shifted_cos(scale, offset);
    let mut dev = 0.0f64;
    for j in 0..d {
        for i in 0..d {
            dev = dev.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    if dev > 1e-8 {
        return Err(Error::FockBufferTooSmall { buffer, deviation: dev });
    }
    Ok(())
}
