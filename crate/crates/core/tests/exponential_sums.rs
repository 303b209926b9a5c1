use lmoment::characters::{primes_between, PrimeModulus};
use lmoment::exponential_sums::{gauss_sum, gauss_sums_bulk, kloosterman, ramanujan_sum};
use proptest::prelude::*;

#[test]
fn gauss_sum_examples() {
    let pm5 = PrimeModulus::new(5).unwrap();
    let tau = gauss_sum(&pm5.character(2));
    assert!((tau.re - 5f64.sqrt()).abs() < 1e-12 && tau.im.abs() < 1e-12, "{tau}");
    for q in [5, 7, 101] {
        let pm = PrimeModulus::new(q).unwrap();
        assert!((gauss_sum(&pm.character(0)) + 1.0).norm() < 1e-12);
    }
    let pm3 = PrimeModulus::new(3).unwrap();
    let tau = gauss_sum(&pm3.character(1));
    assert!(tau.re.abs() < 1e-12 && (tau.im - 3f64.sqrt()).abs() < 1e-12, "{tau}");
}

#[test]
fn kloosterman_examples() {
    let pm5 = PrimeModulus::new(5).unwrap();
    assert!((kloosterman(1, 1, &pm5) - 0.381_966_0).abs() < 1e-7);
    let pm7 = PrimeModulus::new(7).unwrap();
    assert!((kloosterman(1, 2, &pm7) - kloosterman(2, 1, &pm7)).abs() < 1e-12);
}

#[test]
fn ramanujan_examples() {
    assert_eq!(ramanujan_sum(3, &PrimeModulus::new(7).unwrap()), -1);
    assert_eq!(ramanujan_sum(14, &PrimeModulus::new(7).unwrap()), 6);
    assert_eq!(ramanujan_sum(1, &PrimeModulus::new(5).unwrap()), -1);
}

#[test]
fn gauss_identities_for_primes_to_199() {
    for q in primes_between(3, 199) {
        let pm = PrimeModulus::new(q).unwrap();
        let bulk = gauss_sums_bulk(&pm);
        for chi in pm.characters().filter(|c| c.is_primitive()) {
            let tau = gauss_sum(&chi);
            let tau_bar = gauss_sum(&chi.conj());
            assert!((tau.norm_sqr() - q as f64).abs() <= 1e-10, "q = {q}, k = {}", chi.index());
            assert!((tau * tau_bar - chi.parity_sign() * q as f64).norm() <= 1e-10, "q = {q}, k = {}", chi.index());
            assert!((tau_bar - chi.parity_sign() * tau.conj()).norm() <= 1e-10);
            assert!((bulk[chi.index() as usize] - tau).norm() <= 1e-9, "q = {q}, k = {}", chi.index());
        }
    }
}

#[test]
fn weil_bound_for_primes_to_97() {
    for q in primes_between(3, 97) {
        let pm = PrimeModulus::new(q).unwrap();
        let bound = 2.0 * (q as f64).sqrt();
        for a in 1..q as i64 {
            for b in 1..q as i64 {
                let s = kloosterman(a, b, &pm);
                assert!(s.abs() <= bound, "S({a}, {b}; {q}) = {s}");
            }
        }
        assert_eq!(kloosterman(0, 1, &pm).round(), -1.0);
        assert!((kloosterman(0, 1, &pm) + 1.0).abs() < 1e-10);
    }
}

proptest! {
    #[test]
    fn kloosterman_symmetries(qi in 0usize..24, a in -500i64..500, b in -500i64..500, c in 1i64..500) {
        let q = primes_between(3, 97)[qi];
        let pm = PrimeModulus::new(q).unwrap();
        let s = kloosterman(a, b, &pm);
        prop_assert!((s - kloosterman(b, a, &pm)).abs() < 1e-10);
        prop_assert!((s - kloosterman(a + q as i64, b - 3 * q as i64, &pm)).abs() < 1e-10);
        if c % q as i64 != 0 {
            // x -> c x moves the factor c from a to b
            prop_assert!((kloosterman(a * c, b, &pm) - kloosterman(a, b * c, &pm)).abs() < 1e-10);
        }
    }

    #[test]
    fn ramanujan_sum_case_split(qi in 0usize..40, n in -100_000i64..100_000) {
        let q = primes_between(3, 200)[qi];
        let pm = PrimeModulus::new(q).unwrap();
        let expected = if n % q as i64 == 0 { q as i64 - 1 } else { -1 };
        prop_assert_eq!(ramanujan_sum(n, &pm), expected);
    }
}
