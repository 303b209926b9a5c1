use std::path::PathBuf;

use lmoment::characters::primes_between;
use lmoment::lvalues::{dirichlet_central_afe, dirichlet_central_oracle, twist_central_afe, twist_cutoff};
use lmoment::moment::{
    cross_term_decomposition, diagonal_sum, moment_with_oracle_factor, nonvanishing_search, prime_scan, scan_summary,
    twisted_moment, WITNESS_LIMIT, WITNESS_THRESHOLD,
};
use lmoment::{Error, HeckeSystem, PrimeModulus};

fn real() -> HeckeSystem {
    HeckeSystem::load(&PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/maass_13.7797.txt")).unwrap()
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

#[test]
fn single_character_at_five() {
    let f = real();
    let pm = PrimeModulus::new(5).unwrap();
    let r = twisted_moment(&f, &pm).unwrap();
    assert_eq!(r.characters, 1);
    let chi = pm.character(2);
    let direct = twist_central_afe(&f, &chi).unwrap().value * dirichlet_central_afe(&chi).unwrap().value;
    assert!((r.moment - direct).norm() <= 1e-12 * (1.0 + direct.norm()));
    // the witness verdict agrees with the oracle value of the Dirichlet factor
    let oracle = dirichlet_central_oracle(&chi).unwrap();
    let twist = twist_central_afe(&f, &chi).unwrap();
    let expected = twist.value.norm() > twist.err_estimate && oracle.value.norm() > oracle.err_estimate;
    assert_eq!(nonvanishing_search(&f, &pm, 0.0).unwrap().len() == 1, expected);
}

#[test]
fn structure_for_primes_to_101() {
    let f = real();
    for q in primes_between(5, 101) {
        let pm = PrimeModulus::new(q).unwrap();
        let r = twisted_moment(&f, &pm).unwrap();
        assert_eq!(r.characters, (q - 3) / 2, "q = {q}");
        assert!(r.decomposition_defect <= 1e-9, "q = {q}: {:e}", r.decomposition_defect);
        assert!((r.cross_terms.total() - r.moment).norm() <= 1e-9 * r.moment.norm());
        assert!(r.moment.im.abs() <= 1e-9 * (1.0 + r.moment.norm()), "q = {q}: {}", r.moment);
        assert_eq!(cross_term_decomposition(&f, &pm).unwrap(), r.cross_terms);
        assert!((r.main_term - (q as f64 - 2.0) / 2.0 * r.l_one).abs() <= 1e-12 * r.main_term);
        let oracle = moment_with_oracle_factor(&f, &pm).unwrap();
        assert!((oracle - r.moment).norm() <= r.characters as f64 * 1e-8, "q = {q}");
    }
}

#[test]
fn diagonal_dominates_the_first_cross_term() {
    let f = real();
    let pm = PrimeModulus::new(101).unwrap();
    let r = twisted_moment(&f, &pm).unwrap();
    let diag = diagonal_sum(&f, &pm).unwrap();
    let off = (r.cross_terms.s1s3 - diag).norm() / r.main_term;
    assert!(off <= 0.1, "off-diagonal share {off}");
}

#[test]
fn small_moduli_are_refused() {
    let f = real();
    let pm = PrimeModulus::new(3).unwrap();
    assert!(matches!(twisted_moment(&f, &pm), Err(Error::ModulusTooSmall(3))));
    let short = HeckeSystem::mock(1, f.t_f(), 1000);
    let pm = PrimeModulus::new(101).unwrap();
    assert!(matches!(twisted_moment(&short, &pm), Err(Error::InsufficientDataAt { q: 101, .. })));
    assert!(matches!(prime_scan(&short, 5, 200), Err(Error::InsufficientDataAt { q: 199, .. })));
}

#[test]
fn small_scan() {
    let f = real();
    let reports = prime_scan(&f, 5, 30).unwrap();
    let qs: Vec<u64> = reports.iter().map(|r| r.q).collect();
    assert_eq!(qs, [5, 7, 11, 13, 17, 19, 23, 29]);
    for w in reports.windows(2) {
        assert!(w[1].cutoffs.twist_nominal >= w[0].cutoffs.twist_nominal);
        assert_eq!(w[1].cutoffs.twist_nominal, twist_cutoff(w[1].q));
    }
}

#[test]
fn reports_do_not_depend_on_thread_count() {
    let run = |threads: usize| {
        let f = real();
        pool(threads).install(|| {
            let single = twisted_moment(&f, &PrimeModulus::new(1009).unwrap()).unwrap();
            let scan = prime_scan(&f, 100, 300).unwrap();
            format!("{single:?}\n{scan:?}")
        })
    };
    assert_eq!(run(1), run(8));
}

#[test]
fn trend_over_primes_to_2000() {
    let f = real();
    let reports = prime_scan(&f, 100, 2000).unwrap();
    let s = scan_summary(&reports);
    assert!(s.min_ratio >= 0.3 && s.max_ratio <= 1.7, "{s:?}");
    assert!(s.medians_nonincreasing, "{:?}", s.blocks);
    assert!(s.max_s2s4_exponent <= 0.75 + 0.2, "{}", s.max_s2s4_exponent);
    for r in &reports {
        assert!(r.decomposition_defect <= 1e-9 && r.imaginary_part <= 1e-9, "q = {}", r.q);
    }
}

#[test]
fn witnesses_for_primes_50_to_500() {
    let f = real();
    for q in primes_between(50, 500) {
        let pm = PrimeModulus::new(q).unwrap();
        let found = nonvanishing_search(&f, &pm, WITNESS_THRESHOLD).unwrap();
        let confirmed = found.iter().any(|w| {
            let oracle = dirichlet_central_oracle(&pm.character(w.index)).unwrap();
            oracle.value.norm() > WITNESS_THRESHOLD + oracle.err_estimate
                && (oracle.value.norm() - w.dirichlet_abs).abs() <= 1e-8
        });
        assert!(confirmed, "q = {q}: no oracle-confirmed witness among {}", found.len());
        for w in found.windows(2) {
            assert!(w[0].twist_abs.min(w[0].dirichlet_abs) >= w[1].twist_abs.min(w[1].dirichlet_abs));
        }
    }
}

#[test]
fn zero_threshold_keeps_every_value_above_its_error_bar() {
    let f = real();
    let pm = PrimeModulus::new(61).unwrap();
    let all = nonvanishing_search(&f, &pm, 0.0).unwrap();
    let mut expected = 0;
    for chi in pm.even_primitive() {
        let t = twist_central_afe(&f, &chi).unwrap();
        let d = dirichlet_central_afe(&chi).unwrap();
        if t.value.norm() > t.err_estimate && d.value.norm() > d.err_estimate {
            expected += 1;
            assert!(all.iter().any(|w| w.index == chi.index()));
        }
    }
    assert_eq!(all.len(), expected);
    let r = twisted_moment(&f, &pm).unwrap();
    assert!(r.witnesses.len() <= WITNESS_LIMIT && r.witness_count as usize >= r.witnesses.len());
}
