use std::path::PathBuf;

use lmoment::characters::{primes_between, DirichletCharacter, PrimeModulus};
use lmoment::exponential_sums::gauss_sum;
use lmoment::lvalues::{
    central_values_all, dirichlet_central_afe, dirichlet_central_oracle, dirichlet_cutoff, hurwitz_zeta,
    twist_central_afe, twist_cutoff,
};
use lmoment::weights::{shared_v1, shared_v2};
use lmoment::{Complex64, Error, HeckeSystem, Method};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn real() -> HeckeSystem {
    HeckeSystem::load(&PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/maass_13.7797.txt")).unwrap()
}

/// `L(1/2, chibar)` summed term by term to an explicit cutoff.
fn dirichlet_afe_direct(chi: &DirichletCharacter<'_>, cutoff: u64) -> Complex64 {
    let q = chi.modulus().q() as f64;
    let v1 = shared_v1(1.0 / q.sqrt()).unwrap();
    let (mut a, mut b) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for m in 1..=cutoff {
        let w = v1.value(m as f64 / q.sqrt()) / (m as f64).sqrt();
        a += chi.conj().value(m as i64) * w;
        b += chi.value(m as i64) * w;
    }
    a + gauss_sum(&chi.conj()) / q.sqrt() * b
}

/// `L(1/2, f x chi)` summed term by term to an explicit cutoff.
fn twist_afe_direct(f: &HeckeSystem, chi: &DirichletCharacter<'_>, cutoff: u64) -> Complex64 {
    let q = chi.modulus().q() as f64;
    let v2 = shared_v2(f.t_f(), 1.0 / q).unwrap();
    let coeffs = f.coefficients(cutoff).unwrap();
    let (mut a, mut b) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
    for n in 1..=cutoff {
        let w = coeffs[n as usize] * v2.value(n as f64 / q) / (n as f64).sqrt();
        a += chi.value(n as i64) * w;
        b += chi.conj().value(n as i64) * w;
    }
    let tau = gauss_sum(chi);
    a + tau * tau / q * b
}

#[test]
fn hurwitz_examples() {
    let z2 = hurwitz_zeta(Complex64::new(2.0, 0.0), 1.0).unwrap();
    assert!((z2 - std::f64::consts::PI.powi(2) / 6.0).norm() < 1e-12);
    let zh = hurwitz_zeta(Complex64::new(0.5, 0.0), 1.0).unwrap();
    assert!((zh.re + 1.460_354_508_8).abs() < 1e-10);
    assert!(matches!(hurwitz_zeta(Complex64::new(1.0, 0.0), 0.5), Err(Error::Pole(_))));
}

#[test]
fn hurwitz_shift_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..100 {
        let s = Complex64::new(rng.gen_range(-3.0..3.0), rng.gen_range(-30.0..30.0));
        if (s - 1.0).norm() < 0.1 {
            continue;
        }
        let a: f64 = rng.gen_range(0.05..1.0);
        let lhs = hurwitz_zeta(s, a).unwrap() - hurwitz_zeta(s, a + 1.0).unwrap();
        let rhs = (-s * a.ln()).exp();
        assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm() + lhs.norm()), "s = {s}, a = {a}");
    }
}

#[test]
fn oracle_conjugation_and_reality() {
    let pm = PrimeModulus::new(11).unwrap();
    for chi in pm.characters().filter(|c| c.is_primitive()) {
        let a = dirichlet_central_oracle(&chi).unwrap().value;
        let b = dirichlet_central_oracle(&chi.conj()).unwrap().value;
        assert!((a - b.conj()).norm() <= 1e-10, "k = {}", chi.index());
    }
    let pm5 = PrimeModulus::new(5).unwrap();
    let v = dirichlet_central_oracle(&pm5.character(2)).unwrap();
    assert!(v.value.im.abs() <= 1e-10);
    assert_eq!(v.method, Method::HurwitzOracle);
    assert!(matches!(dirichlet_central_oracle(&pm5.character(0)), Err(Error::PrincipalCharacter)));
}

#[test]
fn afe_agrees_with_oracle_for_primes_to_101() {
    let mut worst: f64 = 0.0;
    for q in primes_between(5, 101) {
        let pm = PrimeModulus::new(q).unwrap();
        for chi in pm.even_primitive() {
            let afe = dirichlet_central_afe(&chi).unwrap();
            assert!(afe.conjugated && afe.method == Method::Afe);
            let oracle = dirichlet_central_oracle(&chi).unwrap();
            let diff = (afe.value - oracle.value.conj()).norm();
            assert!(diff <= 1e-8, "q = {q}, k = {}: {diff:e}", chi.index());
            worst = worst.max(diff);
        }
    }
    eprintln!("largest AFE / oracle difference {worst:e}");
}

#[test]
fn afe_rejects_odd_and_principal_characters() {
    let pm = PrimeModulus::new(13).unwrap();
    assert!(matches!(dirichlet_central_afe(&pm.character(3)), Err(Error::OddCharacter)));
    assert!(matches!(dirichlet_central_afe(&pm.character(0)), Err(Error::PrincipalCharacter)));
    let f = HeckeSystem::mock(1, 9.5, 5000);
    assert!(matches!(twist_central_afe(&f, &pm.character(5)), Err(Error::OddCharacter)));
}

#[test]
fn dirichlet_root_number_consistency() {
    for q in [7, 29, 101] {
        let pm = PrimeModulus::new(q).unwrap();
        for chi in pm.even_primitive() {
            let a = dirichlet_central_afe(&chi).unwrap().value;
            let b = dirichlet_central_afe(&chi.conj()).unwrap().value;
            assert!((a - b.conj()).norm() <= 1e-8, "q = {q}, k = {}", chi.index());
        }
    }
}

#[test]
fn quadratic_values_are_real() {
    let f = real();
    for q in [5, 13, 29, 101] {
        let pm = PrimeModulus::new(q).unwrap();
        let chi = pm.character((q - 1) / 2);
        assert!(chi.is_real() && chi.is_even());
        assert!(dirichlet_central_afe(&chi).unwrap().value.im.abs() <= 1e-9);
        assert!(twist_central_afe(&f, &chi).unwrap().value.im.abs() <= 1e-8);
    }
}

#[test]
fn cutoff_robustness_at_101() {
    let f = real();
    let pm = PrimeModulus::new(101).unwrap();
    let (m, n) = (dirichlet_cutoff(101), twist_cutoff(101));
    for chi in pm.even_primitive().step_by(7) {
        let d = (dirichlet_afe_direct(&chi, m) - dirichlet_afe_direct(&chi, 2 * m)).norm();
        assert!(d < 1e-9, "Dirichlet, k = {}: {d:e}", chi.index());
        let t = (twist_afe_direct(&f, &chi, n) - twist_afe_direct(&f, &chi, 2 * n)).norm();
        assert!(t < 1e-8, "twist, k = {}: {t:e}", chi.index());
        // the class-sum route agrees with the term-by-term route
        let afe = twist_central_afe(&f, &chi).unwrap();
        assert!((afe.value - twist_afe_direct(&f, &chi, afe.cutoff)).norm() < 1e-10);
    }
}

#[test]
fn error_estimates_bound_refinement() {
    let f = real();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let primes = primes_between(11, 400);
    for _ in 0..20 {
        let q = primes[rng.gen_range(0..primes.len())];
        let pm = PrimeModulus::new(q).unwrap();
        let k = 2 * rng.gen_range(1..(q - 1) / 2);
        let chi = pm.character(k);
        let d = dirichlet_central_afe(&chi).unwrap();
        let moved = (dirichlet_afe_direct(&chi, 4 * d.cutoff) - d.value).norm();
        assert!(moved <= d.err_estimate, "q = {q}, k = {k}: {moved:e} > {:e}", d.err_estimate);
        let t = twist_central_afe(&f, &chi).unwrap();
        let moved = (twist_afe_direct(&f, &chi, 4 * t.cutoff) - t.value).norm();
        assert!(moved <= t.err_estimate, "q = {q}, k = {k}: {moved:e} > {:e}", t.err_estimate);
    }
}

#[test]
fn twist_functional_equation_consistency() {
    let f = real();
    for q in [13, 53, 101] {
        let pm = PrimeModulus::new(q).unwrap();
        for chi in pm.even_primitive() {
            let tau = gauss_sum(&chi);
            let eps = tau * tau / q as f64;
            assert!((eps.norm() - 1.0).abs() <= 1e-10);
            let v = twist_central_afe(&f, &chi).unwrap();
            let vbar = twist_central_afe(&f, &chi.conj()).unwrap();
            assert!((vbar.value - v.value.conj()).norm() <= 1e-8, "q = {q}, k = {}", chi.index());
            // L(1/2, f x chibar) = conj(eps) L(1/2, f x chi)
            assert!((vbar.value - eps.conj() * v.value).norm() <= 1e-8, "q = {q}, k = {}", chi.index());
            // branches swap into conjugates
            assert!((vbar.branches[0] - v.branches[0].conj()).norm() <= 1e-10);
            assert!((vbar.branches[1] - v.branches[1].conj()).norm() <= 1e-10);
            assert!(v.branches.iter().all(|b| b.re.is_finite() && b.im.is_finite()));
        }
    }
}

#[test]
fn bulk_values_match_single_values() {
    let f = real();
    for q in [5, 37, 101] {
        let pm = PrimeModulus::new(q).unwrap();
        let all = central_values_all(&f, &pm).unwrap();
        assert_eq!(all.len() as u64, (q - 3) / 2);
        for (t, d) in &all {
            let chi = pm.character(t.index);
            assert!((t.value - twist_central_afe(&f, &chi).unwrap().value).norm() <= 1e-12);
            assert!((d.value - dirichlet_central_afe(&chi).unwrap().value).norm() <= 1e-12);
        }
    }
}

#[test]
fn twist_needs_enough_data() {
    let f = HeckeSystem::mock(1, 9.5, 1000);
    let pm = PrimeModulus::new(101).unwrap();
    assert!(matches!(twist_central_afe(&f, &pm.character(2)), Err(Error::InsufficientData { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn oracle_is_conjugation_equivariant(qi in 0usize..20, k in 1u64..1000) {
        let q = primes_between(5, 100)[qi];
        let pm = PrimeModulus::new(q).unwrap();
        let k = 1 + k % (q - 2);
        let chi = pm.character(k);
        let a = dirichlet_central_oracle(&chi).unwrap().value;
        let b = dirichlet_central_oracle(&chi.conj()).unwrap().value;
        prop_assert!((a - b.conj()).norm() <= 1e-10);
    }
}
