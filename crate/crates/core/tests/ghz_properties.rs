use qsl_steering::assemblage::{conditional_qfi, conditional_variance, conditional_variance_at};
use qsl_steering::ghz::{
    alice_assemblage, alice_pauli_assemblage, bob_jz, bures_distance, critical_visibility,
    critical_visibility_residual, ghz_energy_variance_bound, ghz_exact_energy_variance, ghz_time_bound, noisy_ghz,
    spectral_qfi, GhzScenario, PauliSetting,
};
use qsl_steering::linalg::{propagator, DensityMatrix};
use qsl_steering::random::{random_density_matrix, random_hermitian, random_pure_state, stream_rng};
use qsl_steering::Constants;

const VISIBILITIES: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[test]
fn z_setting_energy_variance_has_closed_form() {
    for n in 1..=8 {
        for p in VISIBILITIES {
            let s = GhzScenario::natural(n, p).unwrap();
            let asm = alice_pauli_assemblage(&noisy_ghz(&s).unwrap(), PauliSetting::Z).unwrap();
            let dense = conditional_variance_at(&asm, &bob_jz(n, s.mu), "z").unwrap();
            assert!((dense - ghz_exact_energy_variance(&s)).abs() < 1e-10, "N={n} p={p}");
            // the closed form drops the spread between the two mixture components
            assert!(ghz_energy_variance_bound(&s) <= dense + 1e-10);
        }
    }
}

#[test]
fn closed_form_energy_variance_is_exact_at_the_endpoints() {
    for n in 1..=6 {
        for p in [0.0, 1.0] {
            let s = GhzScenario::natural(n, p).unwrap();
            assert!((ghz_energy_variance_bound(&s) - ghz_exact_energy_variance(&s)).abs() < 1e-12);
        }
    }
}

#[test]
fn white_noise_admits_the_qfi_bound() {
    for n in 1..=5 {
        let s = GhzScenario::natural(n, 0.0).unwrap();
        let asm = alice_assemblage(&noisy_ghz(&s).unwrap(), &[PauliSetting::Z, PauliSetting::X]).unwrap();
        let h = bob_jz(n, 1.0);
        let q = conditional_qfi(&asm, &h, &Constants::NATURAL).unwrap().value;
        let v = conditional_variance(&asm, &h).unwrap().value;
        assert!(q <= 4.0 * v + 1e-9);
    }
}

#[test]
fn pure_state_qfi_is_four_variances() {
    let mut rng = stream_rng(5, 0);
    for dim in [2, 3, 4] {
        for _ in 0..30 {
            let rho = DensityMatrix::pure(&random_pure_state(&mut rng, dim)).unwrap();
            let h = random_hermitian(&mut rng, dim);
            let q = spectral_qfi(&rho, &h, &Constants::NATURAL).unwrap();
            let v = rho.variance(&h).unwrap();
            assert!((q - 4.0 * v).abs() < 1e-10 * (1.0 + q), "{q} vs {}", 4.0 * v);
        }
    }
}

#[test]
fn bures_angle_is_a_unitarily_invariant_symmetric_distance() {
    let mut rng = stream_rng(9, 0);
    for _ in 0..50 {
        let a = random_density_matrix(&mut rng, 3, 3).unwrap();
        let b = random_density_matrix(&mut rng, 3, 2).unwrap();
        let d = bures_distance(&a, &b).unwrap();
        assert!(d >= 0.0);
        assert!((d - bures_distance(&b, &a).unwrap()).abs() < 1e-10);
        assert!(bures_distance(&a, &a).unwrap() < 1e-6);
        let u = propagator(random_hermitian(&mut rng, 3).matrix(), 0.7, 1.0);
        let ua = DensityMatrix::new(&u * a.matrix() * u.adjoint()).unwrap();
        let ub = DensityMatrix::new(&u * b.matrix() * u.adjoint()).unwrap();
        assert!((bures_distance(&ua, &ub).unwrap() - d).abs() < 1e-10);
    }
}

#[test]
fn time_bound_grows_from_zero() {
    for n in 1..=6 {
        let at = |p: f64| ghz_time_bound(&GhzScenario::natural(n, p).unwrap());
        assert_eq!(at(0.0), 0.0);
        assert!(at(1e-9) < 1e-7);
        let mut prev = 0.0;
        for i in 1..1000 {
            let v = at(i as f64 / 1000.0);
            assert!(v > prev, "N={n}, p={}", i as f64 / 1000.0);
            prev = v;
        }
        assert_eq!(at(1.0), f64::INFINITY);
    }
    let s = GhzScenario::natural(1, 0.5).unwrap();
    assert!((ghz_time_bound(&s) - 0.577350269190).abs() < 1e-12);
}

#[test]
fn critical_visibility_solves_its_quadratic() {
    assert!((critical_visibility(1).unwrap() - (17f64.sqrt() - 1.0) / 8.0).abs() < 1e-12);
    for n in 1..=10 {
        let p = critical_visibility(n).unwrap();
        assert!(p > 0.0 && p < 1.0);
        assert!(critical_visibility_residual(n, p).abs() <= 1e-10);
    }
    assert!(critical_visibility(0).is_err());
}
