use mist::branch::*;
use mist::hilbert::ops::QuadratureBasis;
use mist::hilbert::*;
use mist::linalg::{dot, eigh, matvec, Eigen, HermitianOperator};
use mist::{CircuitParams, HilbertSpec};
use proptest::prelude::*;

/// Cos(phi) model on D = 3 transmon levels and d_c = 4 Fock states, with the
/// cavity zero-point phase scaled by `coupling`.
fn tiny(flux: f64, coupling: f64) -> HermitianOperator {
    let p = CircuitParams::measured_sample().with_flux(flux);
    let spec = HilbertSpec { n_charge: 61, d: 6, d_c: 4, d_a: 3, fock_buffer: 40 };
    let tb = transmon_eigensystem(&p, &spec).unwrap().truncated(3);
    let q = QuadratureBasis::new(4, 40).unwrap();
    let mut modes = normal_modes(&p).unwrap();
    modes.phi_c *= coupling;
    cosphi_two_mode_from(&tb, &q, &p, &modes).unwrap()
}

/// Global assignment of eigenstates to product states that maximises the
/// summed squared overlap, by dynamic programming over subsets.
fn brute_force_labels(e: &Eigen) -> Vec<usize> {
    let n = e.len();
    let w = |state: usize, k: usize| e.vectors[(state, k)].powi(2);
    let full = 1usize << n;
    let mut best = vec![f64::NEG_INFINITY; full];
    let mut choice = vec![usize::MAX; full];
    best[0] = 0.0;
    for mask in 0..full {
        if best[mask] == f64::NEG_INFINITY {
            continue;
        }
        let state = mask.count_ones() as usize;
        if state == n {
            continue;
        }
        for k in 0..n {
            if mask & (1 << k) == 0 {
                let v = best[mask] + w(state, k);
                let next = mask | (1 << k);
                if v > best[next] {
                    best[next] = v;
                    choice[next] = k;
                }
            }
        }
    }
    let mut labels = vec![0; n];
    let mut mask = full - 1;
    for state in (0..n).rev() {
        let k = choice[mask];
        labels[state] = k;
        mask &= !(1 << k);
    }
    labels
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ladder_labels_match_brute_force(flux in -0.2f64..0.2, coupling in 0.2f64..1.5) {
        let h = tiny(flux, coupling);
        let e = eigh(&h.data).unwrap();
        let table = label_eigenstates(&e, 3, 4, usable_photons(4));
        let oracle = brute_force_labels(&e);
        for j in 0..3 {
            prop_assert_eq!(table.len(j), usable_photons(4));
            for n in 0..table.len(j) {
                prop_assert_eq!(table.index[j][n], oracle[j * 4 + n], "label ({}, {})", j, n);
            }
        }
    }

    #[test]
    fn labels_ignore_eigenpair_order(perm in Just((0..96).collect::<Vec<usize>>()).prop_shuffle(), flux in -0.1f64..0.1) {
        let spec = HilbertSpec { n_charge: 121, d: 8, d_c: 12, d_a: 3, fock_buffer: 40 };
        let h = build_two_mode(ModelKind::Cosphi, &CircuitParams::measured_sample().with_flux(flux), &spec).unwrap();
        let e = eigh(&h.data).unwrap();
        let a = label_eigenstates(&e, 8, 12, usable_photons(12));
        let b = label_eigenstates(&e.permuted(&perm), 8, 12, usable_photons(12));
        prop_assert_eq!(&a.energy, &b.energy);
        prop_assert_eq!(&a.nt, &b.nt);
        prop_assert_eq!(&a.confidence, &b.confidence);
        prop_assert_eq!(&a.ambiguities, &b.ambiguities);
        for j in 0..8 {
            for n in 0..a.len(j) {
                prop_assert_eq!(perm[b.index[j][n]], a.index[j][n]);
            }
        }
    }

    #[test]
    fn labeled_energies_equal_restricted_trace(flux in -0.2f64..0.2) {
        let spec = HilbertSpec { n_charge: 121, d: 8, d_c: 20, d_a: 3, fock_buffer: 40 };
        let p = CircuitParams::measured_sample().with_flux(flux);
        let h = build_two_mode(ModelKind::Cosphi, &p, &spec).unwrap();
        let s = diagonalize_and_label(&h, spec.d, spec.d_c).unwrap();
        let (mut sum_e, mut trace) = (0.0, 0.0);
        for (j, row) in s.table.index.iter().enumerate() {
            for (n, &k) in row.iter().enumerate() {
                let v = s.eigen.vector(k);
                sum_e += s.table.energy[j][n];
                trace += dot(v, &matvec(&h.data, v));
            }
        }
        prop_assert!((sum_e - trace).abs() <= 1e-8 * trace.abs());
    }
}

#[test]
fn decoupled_labels_factorize() {
    // with phi_c = 0 the cavity decouples; the frozen ancilla still renormalises
    // the transmon, so only the cavity factor is a pure Fock state
    let h = tiny(0.07, 0.0);
    let e = eigh(&h.data).unwrap();
    let t = label_eigenstates(&e, 3, 4, 3);
    for j in 0..3 {
        for n in 0..3 {
            let v = e.vector(t.index[j][n]);
            let on_n: f64 = (0..3).map(|jj| v[jj * 4 + n].powi(2)).sum();
            assert!((on_n - 1.0).abs() < 1e-12);
            assert!((t.nt[j][n] - t.nt[j][0]).abs() < 1e-12);
            assert!((t.nt[j][n] - j as f64).abs() < 0.05);
            assert!((t.energy[j][n] - t.energy[j][0] - n as f64 * (t.energy[0][1] - t.energy[0][0])).abs() < 1e-12);
        }
    }
}

#[test]
fn nt_of_product_and_superposition() {
    // columns: |1,0>, (|0,0> + |2,1>)/sqrt2 on D = 3, d_c = 2
    let mut v = faer::Mat::<f64>::zeros(6, 2);
    v[(2, 0)] = 1.0;
    v[(0, 1)] = std::f64::consts::FRAC_1_SQRT_2;
    v[(5, 1)] = std::f64::consts::FRAC_1_SQRT_2;
    let e = Eigen { values: vec![0.0, 1.0], vectors: v };
    let table = BranchTable {
        d: 3,
        d_c: 2,
        d_c_usable: 1,
        energy: vec![vec![1.0], vec![0.0]],
        nt: vec![vec![0.0], vec![0.0]],
        confidence: vec![vec![1.0], vec![1.0]],
        index: vec![vec![1], vec![0]],
        ambiguities: vec![],
    };
    let nt = nt_expectation(&table, &e);
    assert_eq!(nt[1][0], 1.0);
    assert!((nt[0][0] - 1.0).abs() < 1e-15);
}

#[test]
fn creation_operator_on_product_state() {
    let mut v = vec![0.0; 12];
    v[4 + 1] = 1.0; // |1,1>
    let w = apply_creation(&v, 3, 4);
    assert!((w[4 + 2] - 2f64.sqrt()).abs() < 1e-15);
    assert_eq!(w.iter().filter(|x| **x != 0.0).count(), 1);
}

fn analyse(flux: f64, d_c: usize, pairs: &[(usize, usize)]) -> FluxPoint {
    let spec = HilbertSpec::desk().with_dims(10, d_c);
    let p = CircuitParams::measured_sample().with_flux(flux);
    analyse_flux(ModelKind::Cosphi, &p, &spec, &CrossingSearch::pairs(pairs)).unwrap()
}

fn avoided(pt: &FluxPoint, pair: (usize, usize)) -> Vec<f64> {
    pt.events
        .iter()
        .filter(|e| e.branch_pair == pair && e.kind == CrossingKind::Avoided)
        .map(|e| e.n_c_star)
        .collect()
}

#[test]
fn pair_order_does_not_matter() {
    let a = analyse(-0.04, 60, &[(1, 5)]);
    let b = analyse(-0.04, 60, &[(5, 1)]);
    assert!(!a.events.is_empty());
    assert_eq!(a.events.len(), b.events.len());
    for (x, y) in a.events.iter().zip(&b.events) {
        assert_eq!(x.branch_pair, y.branch_pair);
        assert_eq!(x.n_c_star, y.n_c_star);
        assert_eq!(x.gap_mhz, y.gap_mhz);
    }
}

#[test]
fn flux_activated_crossing_is_symmetric_and_converged() {
    let minus = avoided(&analyse(-0.04, 60, &[(1, 5)]), (1, 5));
    let plus = avoided(&analyse(0.04, 60, &[(1, 5)]), (1, 5));
    let bigger = avoided(&analyse(-0.04, 75, &[(1, 5)]), (1, 5));
    assert_eq!(minus.len(), 1, "{minus:?}");
    assert!((minus[0] - plus[0]).abs() < 1e-6, "{minus:?} {plus:?}");
    assert!((minus[0] - bigger[0]).abs() < 2.0, "{minus:?} {bigger:?}");
    assert!((minus[0] - 13.0).abs() <= 8.0);
}

#[test]
fn zero_flux_crossings_are_exact() {
    let pt = analyse(0.0, 60, &[(0, 4), (1, 5), (0, 2), (1, 3)]);
    assert!(pt.events.iter().all(|e| e.kind == CrossingKind::Exact), "{:?}", pt.events);
    let n_max = (0.95 * pt.table.d_c_usable as f64) as usize;
    for n in 0..=n_max.min(pt.table.len(0) - 1) {
        assert!(pt.table.nt[0][n].abs() < 0.1 && (pt.table.nt[1][n] - 1.0).abs() < 0.1);
    }
}

#[test]
fn stark_slope_near_dispersive_shift() {
    let pt = analyse(0.0, 40, &[]);
    let curve = ac_stark_curve(&pt.table, (0, 1), 10).unwrap();
    let chi = pt.table.chi_qc().unwrap();
    assert!((curve.slope / chi - 1.0).abs() < 0.1, "{} vs {chi}", curve.slope);
    assert!((curve.slope / -0.00202 - 1.0).abs() < 0.1);
}

#[test]
fn csv_and_json_exports() {
    let pt = analyse(-0.04, 40, &[(1, 5)]);
    let mut csv = Vec::new();
    write_branch_csv(&mut csv, pt.flux_ext, &pt.table, true).unwrap();
    let text = String::from_utf8(csv).unwrap();
    let rows: usize = (0..pt.table.d).map(|j| pt.table.len(j)).sum();
    assert_eq!(text.lines().count(), rows + 1);
    assert!(text.starts_with("flux,j,n_c,energy_GHz,nt,confidence"));
    let mut json = Vec::new();
    write_crossings_json(&mut json, &pt.events).unwrap();
    let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
    assert_eq!(v.as_array().unwrap().len(), pt.events.len());
    assert!(v[0]["gap_MHz"].is_number());
}
