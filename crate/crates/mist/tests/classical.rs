use std::f64::consts::PI;

use mist::classical::*;
use mist::hilbert::normal_modes;
use mist::CircuitParams;
use proptest::prelude::*;

const E_J_MODE: f64 = 7.92;
const E_C: f64 = 0.0734;
const OMEGA_D: f64 = 7.294;

fn kind() -> impl Strategy<Value = CouplingKind> {
    prop_oneof![Just(CouplingKind::Cosphi), Just(CouplingKind::Transverse)]
}

/// J_n(x) = (1/pi) int_0^pi cos(n t - x sin t) dt by the trapezoid rule, which
/// converges geometrically for this periodic integrand.
fn bessel_quadrature(n: i64, x: f64) -> f64 {
    let m = 4000;
    let h = PI / m as f64;
    let f = |t: f64| (n as f64 * t - x * t.sin()).cos();
    let inner: f64 = (1..m).map(|k| f(k as f64 * h)).sum();
    (inner + 0.5 * (f(0.0) + f(PI))) * h / PI
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn resummation_identity(kind in kind(), eta in 0.0f64..8.0, phibar in -1.0f64..1.0, seed in 0u64..1000) {
        let s = HarmonicSeries::from_parts(kind, E_J_MODE, E_C, OMEGA_D, eta, phibar).unwrap();
        let mut x = seed as f64 + 0.5;
        for _ in 0..100 {
            // cheap deterministic scatter over phase space
            x = (x * 7.31 + 0.123).fract() * 997.0;
            let phi = -PI + 2.0 * PI * (x / 997.0);
            let t = s.period() * (x * 3.7).fract();
            let d = s.potential_sum(phi, t) - s.potential_closed_form(phi, t);
            prop_assert!(d.abs() < 1e-10, "{d}");
        }
    }

    #[test]
    fn zero_flux_drive_has_half_period(eta in 0.0f64..8.0, phi in -PI..PI, n in -30.0f64..30.0, t in 0.0f64..1.0) {
        let s = HarmonicSeries::from_parts(CouplingKind::Cosphi, E_J_MODE, E_C, OMEGA_D, eta, 0.0).unwrap();
        let t = t * s.period();
        let d = s.hamiltonian(phi, n, t) - s.hamiltonian(phi, n, t + 0.5 * s.period());
        prop_assert!(d.abs() < 1e-12 * E_J_MODE);
        for k in (1..=s.n_h as i64).step_by(2) {
            prop_assert_eq!(s.a(k), 0.0);
            prop_assert_eq!(s.a(-k), 0.0);
        }
    }

    #[test]
    fn splitting_is_time_reversible(
        kind in kind(),
        eta in 0.0f64..3.0,
        phi in -PI..PI,
        n in -20.0f64..20.0,
        t0 in 0.0f64..1.0,
        yoshida in any::<bool>(),
    ) {
        let s = HarmonicSeries::from_parts(kind, E_J_MODE, E_C, OMEGA_D, eta, 0.2).unwrap();
        let split = if yoshida { Splitting::Yoshida4 } else { Splitting::Strang };
        let h = s.period() / 256.0;
        let steps = 2560;
        let (p1, n1) = flow(&s, phi, n, t0, h, steps, split);
        let (p0, n0) = flow(&s, p1, n1, t0 + steps as f64 * h, -h, steps, split);
        prop_assert!((p0 - phi).abs() < 1e-9 && (n0 - n).abs() < 1e-9, "{} {}", p0 - phi, n0 - n);
    }

    #[test]
    fn undriven_energy_is_conserved(phi in -3.0f64..3.0, n in -15.0f64..15.0) {
        let s = HarmonicSeries::from_parts(CouplingKind::Cosphi, E_J_MODE, E_C, OMEGA_D, 0.0, 0.0).unwrap();
        let tr = integrate_trajectory(&s, (phi, n), 1000, &IntegratorOptions::default()).unwrap();
        prop_assert!(tr.energy_drift < 1e-8, "{}", tr.energy_drift);
    }

    #[test]
    fn separatrix_width_follows_amplitude(kind in kind(), eta in 0.05f64..6.0) {
        let s = HarmonicSeries::from_parts(kind, E_J_MODE, E_C, OMEGA_D, eta, 0.3).unwrap();
        let mut rows: Vec<(f64, f64)> = (-4i64..=4).map(|m| (s.a(m).abs(), resonance_width(&s, m))).collect();
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in rows.windows(2) {
            prop_assert!(w[1].1 >= w[0].1);
        }
        for (a, w) in rows {
            prop_assert!((w * w - 2.0 * a / E_C).abs() <= 1e-12 * (1.0 + w * w));
        }
        for sep in separatrices(&s, 3) {
            let widest = sep.n_upper.iter().zip(&sep.n_lower).map(|(u, l)| u - l).fold(0.0, f64::max);
            prop_assert!((widest - sep.width).abs() < 1e-9 * (1.0 + sep.width));
        }
    }

    #[test]
    fn chirikov_margin_is_scale_free(kind in kind(), eta in 0.0f64..10.0, scale in 0.01f64..100.0) {
        let a = chirikov_margin_at(kind, OMEGA_D, plasma_frequency(3.96, E_C), eta);
        let b = chirikov_margin_at(kind, scale * OMEGA_D, plasma_frequency(scale * 3.96, scale * E_C), eta);
        prop_assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn margin_uses_accurate_bessel_values(kind in kind(), eta in 0.0f64..10.0) {
        let wp = plasma_frequency(3.96, E_C);
        let m = match kind {
            CouplingKind::Cosphi => (OMEGA_D / wp) / (bessel_quadrature(0, eta).abs().sqrt() + bessel_quadrature(2, eta).abs().sqrt()),
            CouplingKind::Transverse => (OMEGA_D / (2.0 * wp)) / (bessel_quadrature(0, eta).abs().sqrt() + bessel_quadrature(1, eta).abs().sqrt()),
        };
        let got = chirikov_margin_at(kind, OMEGA_D, wp, eta);
        // square roots amplify errors near Bessel zeros
        prop_assert!((got - m).abs() <= 1e-7 * m, "{got} vs {m}");
    }

    #[test]
    fn bessel_matches_quadrature(n in 0i64..30, x in 0.0f64..40.0) {
        let a = bessel_j(n, x);
        let b = bessel_quadrature(n, x);
        prop_assert!((a - b).abs() < 1e-12, "J_{n}({x}) {a} vs {b}");
    }
}

#[test]
fn flux_zero_harmonics_have_no_odd_terms() {
    let p = CircuitParams::measured_sample();
    let modes = normal_modes(&p).unwrap();
    let s = harmonic_coefficients(CouplingKind::Cosphi, &p, &modes, 300.0).unwrap();
    assert!(s.iter().filter(|(n, _)| n % 2 != 0).all(|(_, a)| a == 0.0));
    let s = harmonic_coefficients(CouplingKind::Cosphi, &p.with_flux(-0.04), &modes_at(-0.04), 300.0).unwrap();
    assert!(s.a(1) != 0.0);
}

fn modes_at(flux: f64) -> mist::hilbert::DerivedModes {
    normal_modes(&CircuitParams::measured_sample().with_flux(flux)).unwrap()
}

#[test]
fn sections_are_deterministic() {
    let s = HarmonicSeries::from_parts(CouplingKind::Transverse, E_J_MODE, E_C, OMEGA_D, 1.5, 0.0).unwrap();
    let ics = default_initial_conditions(&s, 2, 9);
    let opts = SectionOptions { n_periods: 60, ..Default::default() };
    let a = poincare_section(&s, &ics, &opts).unwrap();
    let b = poincare_section(&s, &ics, &opts).unwrap();
    let mut ca = Vec::new();
    let mut cb = Vec::new();
    write_section_csv(&mut ca, &a).unwrap();
    write_section_csv(&mut cb, &b).unwrap();
    assert_eq!(ca, cb);
    assert_eq!(a.chaos.lyapunov, b.chaos.lyapunov);
    let text = String::from_utf8(ca).unwrap();
    assert!(text.starts_with("trajectory_id,period_index,phi,n"));
    assert_eq!(text.lines().count(), 1 + 9 * 61);
}

#[test]
fn yoshida_conserves_better_than_strang() {
    let s = HarmonicSeries::from_parts(CouplingKind::Cosphi, E_J_MODE, E_C, OMEGA_D, 0.0, 0.0).unwrap();
    let run = |splitting| {
        integrate_trajectory(&s, (2.0, 1.0), 200, &IntegratorOptions { splitting, ..Default::default() })
            .unwrap()
            .energy_drift
    };
    assert!(run(Splitting::Yoshida4) < 1e-3 * run(Splitting::Strang));
}
