//! The twisted first moment over even primitive characters mod a prime,
//!
//! ```text
//!   M(q) = sum_{chi even primitive} L(1/2, f x chi) L(1/2, chibar),
//! ```
//!
//! its split into the four products of approximate-functional-equation
//! branches `(S1 + S2)(S3 + S4)`, the main term `(q - 2)/2 L(1, f)`, and
//! nonvanishing witnesses.
//!
//! Every character is visited in index order and every reduction is a
//! compensated sum in that order, so a report does not depend on how many
//! threads computed it.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::characters::{primes_between, PrimeModulus};
use crate::error::{Error, Result};
use crate::hecke::HeckeSystem;
use crate::lvalues::{central_values_all, dirichlet_oracle_all, twist_cutoff, CentralValue};
use crate::sum::{ComplexSum, Neumaier};
use crate::weights::{shared_v1, shared_v2};

/// Default witness threshold.
pub const WITNESS_THRESHOLD: f64 = 1e-6;
/// Number of witnesses kept in a [`MomentReport`].
pub const WITNESS_LIMIT: usize = 8;

#[derive(Clone, Copy, Debug, Default, Serialize, PartialEq)]
pub struct CrossTerms {
    pub s1s3: Complex64,
    pub s1s4: Complex64,
    pub s2s3: Complex64,
    pub s2s4: Complex64,
}

impl CrossTerms {
    pub fn total(&self) -> Complex64 {
        [self.s1s3, self.s1s4, self.s2s3, self.s2s4].into_iter().collect::<ComplexSum>().value()
    }
}

/// A character at which both central values are certifiably nonzero.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Witness {
    pub index: u64,
    pub twist_abs: f64,
    pub dirichlet_abs: f64,
    pub twist_err: f64,
    pub dirichlet_err: f64,
}

impl Witness {
    fn strength(&self) -> f64 {
        self.twist_abs.min(self.dirichlet_abs)
    }
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Cutoffs {
    pub dirichlet: u64,
    pub dirichlet_nominal: u64,
    pub twist: u64,
    pub twist_nominal: u64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct MomentReport {
    pub q: u64,
    /// Number of even primitive characters summed.
    pub characters: u64,
    pub moment: Complex64,
    pub l_one: f64,
    pub main_term: f64,
    pub ratio: f64,
    pub cross_terms: CrossTerms,
    /// `|sum of cross terms - moment| / |moment|`.
    pub decomposition_defect: f64,
    /// `|Im moment| / (1 + |moment|)`.
    pub imaginary_part: f64,
    /// Bound on the moment's error from the per-value error estimates.
    pub err_bound: f64,
    pub witness_threshold: f64,
    pub witness_count: u64,
    /// The strongest witnesses, at most [`WITNESS_LIMIT`].
    pub witnesses: Vec<Witness>,
    pub cutoffs: Cutoffs,
}

fn check_modulus(f: &HeckeSystem, pm: &PrimeModulus) -> Result<()> {
    if pm.q() < 5 {
        return Err(Error::ModulusTooSmall(pm.q()));
    }
    let need = twist_cutoff(pm.q());
    if f.reach() < need {
        return Err(Error::InsufficientDataAt { q: pm.q(), n: f.reach() + 1, pmax: f.pmax() });
    }
    Ok(())
}

fn values(f: &HeckeSystem, pm: &PrimeModulus) -> Result<Vec<(CentralValue, CentralValue)>> {
    check_modulus(f, pm)?;
    central_values_all(f, pm).map_err(|e| match e {
        Error::InsufficientData { n, pmax } => Error::InsufficientDataAt { q: pm.q(), n, pmax },
        e => e,
    })
}

/// `M(q)` with cross terms, main term and witnesses.
pub fn twisted_moment(f: &HeckeSystem, pm: &PrimeModulus) -> Result<MomentReport> {
    let vals = values(f, pm)?;
    let l_one = f.l_one_default()?.value;
    let q = pm.q();
    let mut moment = ComplexSum::new();
    let mut cross = [ComplexSum::new(); 4];
    let mut err = Neumaier::new();
    for (t, d) in &vals {
        moment.add(t.value * d.value);
        let [s1, s2] = t.branches;
        let [s3, s4] = d.branches;
        cross[0].add(s1 * s3);
        cross[1].add(s1 * s4);
        cross[2].add(s2 * s3);
        cross[3].add(s2 * s4);
        err.add(t.value.norm() * d.err_estimate + d.value.norm() * t.err_estimate + t.err_estimate * d.err_estimate);
    }
    let moment = moment.value();
    let cross_terms =
        CrossTerms { s1s3: cross[0].value(), s1s4: cross[1].value(), s2s3: cross[2].value(), s2s4: cross[3].value() };
    let main_term = (q as f64 - 2.0) / 2.0 * l_one;
    let witnesses = witnesses_from(&vals, WITNESS_THRESHOLD);
    let (t0, d0) = &vals[0];
    Ok(MomentReport {
        q,
        characters: vals.len() as u64,
        moment,
        l_one,
        main_term,
        ratio: moment.re / main_term,
        decomposition_defect: (cross_terms.total() - moment).norm() / moment.norm(),
        imaginary_part: moment.im.abs() / (1.0 + moment.norm()),
        cross_terms,
        err_bound: err.value(),
        witness_threshold: WITNESS_THRESHOLD,
        witness_count: witnesses.len() as u64,
        witnesses: witnesses.into_iter().take(WITNESS_LIMIT).collect(),
        cutoffs: Cutoffs {
            dirichlet: d0.cutoff,
            dirichlet_nominal: crate::lvalues::dirichlet_cutoff(q),
            twist: t0.cutoff,
            twist_nominal: twist_cutoff(q),
        },
    })
}

/// The four cross-term sums `sum_chi S_i S_j`.
pub fn cross_term_decomposition(f: &HeckeSystem, pm: &PrimeModulus) -> Result<CrossTerms> {
    twisted_moment(f, pm).map(|r| r.cross_terms)
}

fn witnesses_from(vals: &[(CentralValue, CentralValue)], threshold: f64) -> Vec<Witness> {
    let mut w: Vec<Witness> = vals
        .iter()
        .filter(|(t, d)| t.value.norm() > threshold + t.err_estimate && d.value.norm() > threshold + d.err_estimate)
        .map(|(t, d)| Witness {
            index: t.index,
            twist_abs: t.value.norm(),
            dirichlet_abs: d.value.norm(),
            twist_err: t.err_estimate,
            dirichlet_err: d.err_estimate,
        })
        .collect();
    w.sort_by(|a, b| b.strength().total_cmp(&a.strength()).then(a.index.cmp(&b.index)));
    w
}

/// Every even primitive `chi` with `|L(1/2, f x chi)|` and `|L(1/2, chi)|` both
/// above `threshold` plus their error estimates, strongest first.
pub fn nonvanishing_search(f: &HeckeSystem, pm: &PrimeModulus, threshold: f64) -> Result<Vec<Witness>> {
    assert!(threshold >= 0.0, "negative witness threshold");
    Ok(witnesses_from(&values(f, pm)?, threshold))
}

/// The moment with the Dirichlet factor taken from the Hurwitz-zeta oracle
/// (`conj(L(1/2, chi))`) instead of its approximate functional equation.
pub fn moment_with_oracle_factor(f: &HeckeSystem, pm: &PrimeModulus) -> Result<Complex64> {
    let vals = values(f, pm)?;
    let oracle = dirichlet_oracle_all(pm)?;
    Ok(vals.iter().map(|(t, _)| t.value * oracle[t.index as usize].value.conj()).collect::<ComplexSum>().value())
}

/// Diagonal approximation of `S1S3`:
/// `(q - 2)/2 sum_{n < M} lambda(n)/n V1(n / sqrt q) V2(n / q)` over `(n, q) = 1`.
pub fn diagonal_sum(f: &HeckeSystem, pm: &PrimeModulus) -> Result<f64> {
    let q = pm.q();
    let m = crate::lvalues::dirichlet_cutoff(q);
    let v1 = shared_v1(1.0 / (q as f64).sqrt())?;
    let v2 = shared_v2(f.t_f(), 1.0 / q as f64)?;
    let coeffs = f.coefficients_checked(m)?;
    let mut acc = Neumaier::new();
    for n in (1..m).filter(|n| n % q != 0) {
        let x = n as f64;
        acc.add(coeffs[n as usize] / x * v1.value(x / (q as f64).sqrt()) * v2.value(x / q as f64));
    }
    Ok((q as f64 - 2.0) / 2.0 * acc.value())
}

/// Reports for every prime in `[q_min, q_max]`, ascending, computed in parallel.
pub fn prime_scan(f: &HeckeSystem, q_min: u64, q_max: u64) -> Result<Vec<MomentReport>> {
    let primes = primes_between(q_min.max(5), q_max);
    if let Some(&top) = primes.last() {
        let need = twist_cutoff(top);
        if f.reach() < need {
            return Err(Error::InsufficientDataAt { q: top, n: f.reach() + 1, pmax: f.pmax() });
        }
        // shared state is filled before the parallel section
        f.l_one_default()?;
        f.coefficients(need)?;
    }
    primes.par_iter().map(|&q| twisted_moment(f, &PrimeModulus::new(q)?)).collect()
}

/// Primes of a scan grouped into `[lo, 2 lo)`.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct DyadicBlock {
    pub lo: u64,
    pub hi: u64,
    pub count: usize,
    /// Median of `|ratio - 1|`.
    pub median_deviation: f64,
}

/// Trend statistics of a prime scan.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct ScanSummary {
    pub primes: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub blocks: Vec<DyadicBlock>,
    pub medians_nonincreasing: bool,
    /// Largest `log |sum S2 S4| / log q`.
    pub max_s2s4_exponent: f64,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Blocks start at the smallest scanned prime and double.
pub fn scan_summary(reports: &[MomentReport]) -> ScanSummary {
    let mut blocks = Vec::new();
    if let (Some(first), Some(last)) = (reports.first(), reports.last()) {
        let mut lo = first.q;
        while lo <= last.q {
            let hi = 2 * lo;
            let dev: Vec<f64> =
                reports.iter().filter(|r| r.q >= lo && r.q < hi).map(|r| (r.ratio - 1.0).abs()).collect();
            blocks.push(DyadicBlock { lo, hi, count: dev.len(), median_deviation: median(dev) });
            lo = hi;
        }
    }
    ScanSummary {
        primes: reports.len(),
        min_ratio: reports.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min),
        max_ratio: reports.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max),
        medians_nonincreasing: blocks.windows(2).all(|w| w[1].median_deviation <= w[0].median_deviation),
        blocks,
        max_s2s4_exponent: reports
            .iter()
            .map(|r| r.cross_terms.s2s4.norm().ln() / (r.q as f64).ln())
            .fold(f64::NEG_INFINITY, f64::max),
    }
}
