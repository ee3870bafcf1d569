//! The three Hamiltonian models: cos(phi) two-mode with a frozen ancilla,
//! the transversely coupled equivalent, and the full transmon-ancilla-cavity model.

use faer::Mat;
use serde::Serialize;

use super::modes::DerivedModes;
use super::ops::{quadrature, verify_buffer, QuadratureBasis};
use super::transmon::{solve_transmon, transmon_eigensystem, TransmonEigenbasis};
use crate::error::{Error, Result};
use crate::linalg::{diagonal, identity, kron, CavityPhase, Factor, FactorKind, HermitianOperator};
use crate::params::{CircuitParams, HilbertSpec};

/// Default cap on D d_a d_c for the three-mode model.
pub const THREE_MODE_DIM_CAP: usize = 12_000;

fn number_diag(d: usize, omega: f64) -> Mat<f64> {
    diagonal(&(0..d).map(|n| omega * n as f64).collect::<Vec<_>>())
}

fn shifted_identity(m: &Mat<f64>, scale: f64) -> Mat<f64> {
    // scale * m - 1
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| scale * m[(i, j)] - if i == j { 1.0 } else { 0.0 })
}

fn two_mode_basis(d: usize, d_c: usize) -> Vec<Factor> {
    vec![
        Factor { kind: FactorKind::TransmonEigen, dim: d },
        Factor { kind: FactorKind::CavityFock, dim: d_c },
    ]
}

/// cos(phi) two-mode Hamiltonian on transmon (x) cavity:
///
/// H = H_q + omega_c c^dag c - 2 E_J (cos phi_q - 1) (x) (eps_a cos[phi_c (c + c^dag) + phi_bar] - 1)
///
/// with H_q the transmon at 2 E_J and eps_a the vacuum dressing of a frozen
/// ancilla. Projecting the three-mode model onto the ancilla vacuum gives exactly
/// this operator; its zero-photon transmon sees 2 E_J_bar.
pub fn build_cosphi_two_mode(p: &CircuitParams, modes: &DerivedModes, spec: &HilbertSpec) -> Result<HermitianOperator> {
    let tb = transmon_eigensystem(p, spec)?;
    verify_buffer(spec.d_c, spec.fock_buffer, modes.phi_c, modes.phi_ext_bar)?;
    let q = QuadratureBasis::new(spec.d_c, spec.fock_buffer)?;
    cosphi_two_mode_from(&tb, &q, p, modes)
}

/// Same as [`build_cosphi_two_mode`] with a precomputed transmon basis and
/// cavity quadrature basis.
pub fn cosphi_two_mode_from(
    tb: &TransmonEigenbasis,
    cavity: &QuadratureBasis,
    p: &CircuitParams,
    modes: &DerivedModes,
) -> Result<HermitianOperator> {
    let (d, d_c) = (tb.d(), cavity.d);
    let cos_c = cavity.shifted_cos(modes.phi_c, modes.phi_ext_bar);
    let coupling = kron(
        &shifted_identity(&tb.cos_phi, 1.0),
        &shifted_identity(&cos_c, modes.ancilla_dressing()),
    );
    let bare = &kron(&diagonal(&tb.energies), &identity(d_c)) + &kron(&identity(d), &number_diag(d_c, modes.omega_c_pol));
    let h = Mat::from_fn(d * d_c, d * d_c, |i, j| bare[(i, j)] - 2.0 * p.e_j * coupling[(i, j)]);
    HermitianOperator::new(h, two_mode_basis(d, d_c))
}

/// Transversely coupled model H_q + omega_c c^dag c - i g n_q (c - c^dag).
///
/// The returned matrix is stored in the quarter-turn cavity gauge where the
/// coupling reads g n_q (c + c^dag) and is real; `HermitianOperator::entry`
/// restores the standard-basis elements.
pub fn build_transverse_two_mode(
    p: &CircuitParams,
    modes: &DerivedModes,
    g_qc: f64,
    spec: &HilbertSpec,
) -> Result<HermitianOperator> {
    let tb = transmon_eigensystem(p, spec)?;
    transverse_two_mode_from(&tb, spec.d_c, modes.omega_c_pol, g_qc)
}

pub fn transverse_two_mode_from(tb: &TransmonEigenbasis, d_c: usize, omega_c: f64, g_qc: f64) -> Result<HermitianOperator> {
    let d = tb.d();
    let bare = &kron(&diagonal(&tb.energies), &identity(d_c)) + &kron(&identity(d), &number_diag(d_c, omega_c));
    let coupling = kron(&tb.n_op, &quadrature(d_c));
    let h = Mat::from_fn(d * d_c, d * d_c, |i, j| {
        let c = coupling[(i, j)];
        bare[(i, j)] + if c == 0.0 { 0.0 } else { g_qc * c }
    });
    let mut op = HermitianOperator::new(h, two_mode_basis(d, d_c))?;
    op.cavity_phase = CavityPhase::QuarterTurn;
    Ok(op)
}

/// Workspace for repeated three-mode constructions at fixed dimensions.
#[derive(Debug, Clone)]
pub struct ThreeModeWorkspace {
    pub transmon: TransmonEigenbasis,
    pub ancilla: QuadratureBasis,
    pub cavity: QuadratureBasis,
}

impl ThreeModeWorkspace {
    pub fn new(p: &CircuitParams, spec: &HilbertSpec, cap: usize) -> Result<Self> {
        if spec.d_a < 2 {
            return Err(Error::Dimension(format!("three-mode model needs d_a >= 2, got {}", spec.d_a)));
        }
        let dim = spec.d * spec.d_a * spec.d_c;
        if dim > cap {
            return Err(Error::MemoryGuard { dim, cap });
        }
        Ok(Self {
            transmon: solve_transmon(p.e_cq, 2.0 * p.e_j, p.n_g, spec.n_charge, spec.d)?,
            ancilla: QuadratureBasis::new(spec.d_a, spec.fock_buffer)?,
            cavity: QuadratureBasis::new(spec.d_c, spec.fock_buffer)?,
        })
    }

    /// H = H_q + omega_a a^dag a + omega_c c^dag c - 2 E_J (cos phi_q - 1) (x) (cos Phi - 1),
    /// Phi = phi_a [u_aa (a + a^dag) + u_ac (c + c^dag)] + phi_bar.
    ///
    /// The two quadratures commute, so cos Phi = cos A (x) cos B - sin A (x) sin B
    /// with A = phi_a u_aa X_a + phi_bar and B = phi_a u_ac X_c; each factor is a
    /// buffered spectral matrix function, which equals the spectral function of the
    /// summed quadrature restricted to the retained block.
    pub fn build(&self, p: &CircuitParams, modes: &DerivedModes) -> Result<HermitianOperator> {
        let tb = &self.transmon;
        let (d, d_a, d_c) = (tb.d(), self.ancilla.d, self.cavity.d);
        let sa = modes.phi_a * modes.u_aa();
        let sc = modes.phi_a * modes.u_ac();
        let cos_a = self.ancilla.shifted_cos(sa, modes.phi_ext_bar);
        let sin_a = self.ancilla.shifted_sin(sa, modes.phi_ext_bar);
        let (cos_c, sin_c) = self.cavity.cos_sin(sc);
        let cos_big = &kron(&cos_a, &cos_c) - &kron(&sin_a, &sin_c);
        let coupling = kron(&shifted_identity(&tb.cos_phi, 1.0), &shifted_identity(&cos_big, 1.0));
        let n = d * d_a * d_c;
        let mut h = Mat::from_fn(n, n, |i, j| -2.0 * p.e_j * coupling[(i, j)]);
        for i in 0..n {
            let (j, rest) = (i / (d_a * d_c), i % (d_a * d_c));
            let (na, nc) = (rest / d_c, rest % d_c);
            h[(i, i)] += tb.energies[j] + modes.omega_a_pol * na as f64 + modes.omega_c_pol * nc as f64;
        }
        HermitianOperator::new(
            h,
            vec![
                Factor { kind: FactorKind::TransmonEigen, dim: d },
                Factor { kind: FactorKind::AncillaFock, dim: d_a },
                Factor { kind: FactorKind::CavityFock, dim: d_c },
            ],
        )
    }
}

/// Full transmon (x) ancilla (x) cavity Hamiltonian with the default memory cap.
pub fn build_three_mode(p: &CircuitParams, modes: &DerivedModes, spec: &HilbertSpec) -> Result<HermitianOperator> {
    spec.validate(p)?;
    ThreeModeWorkspace::new(p, spec, THREE_MODE_DIM_CAP)?.build(p, modes)
}

/// Transverse coupling that reproduces the cos(phi) AC Stark shift,
/// g_qc = |phi_c| omega_c.
pub fn matched_transverse_coupling(modes: &DerivedModes) -> f64 {
    modes.phi_c.abs() * modes.omega_c_pol
}

/// Analytic cross-Kerr estimate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PerturbativeChi {
    pub chi: f64,
    pub phi_q: f64,
    pub phi_c: f64,
    pub convention: &'static str,
}

/// chi_qc = -2 E_J_bar phi_q^2 phi_c^2 with phi_q = (2 E_Cq / 2E_J)^(1/4).
///
/// Both zero-point phases multiply (b + b^dag) and (c + c^dag). Writing the
/// phases per (b + b^dag)/sqrt2 instead doubles each square and produces the
/// equivalent form -2 E_J_bar phi_q^2 phi_c^2 / 4.
pub fn perturbative_chi(p: &CircuitParams, modes: &DerivedModes) -> PerturbativeChi {
    let phi_q = (2.0 * p.e_cq / (2.0 * p.e_j)).powf(0.25);
    PerturbativeChi {
        chi: -2.0 * modes.e_j_bar * phi_q.powi(2) * modes.phi_c.powi(2),
        phi_q,
        phi_c: modes.phi_c,
        convention: "phi = phi_zpf (b + b^dag)",
    }
}
