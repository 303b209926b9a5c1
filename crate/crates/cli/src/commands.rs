use serde_json::{json, Value};

use lmoment::characters::primitive_pair_sum;
use lmoment::exponential_sums::{gauss_sum, gauss_sums_bulk, kloosterman};
use lmoment::lvalues::{dirichlet_central_afe, dirichlet_central_oracle, twist_central_afe, twist_cutoff};
use lmoment::moment::{prime_scan, scan_summary, twisted_moment};
use lmoment::voronoi::voronoi_check;
use lmoment::{Complex64, HeckeSystem, PrimeModulus, TestFunction};

use crate::CertificateKind::{Certificate as Cert, Diagnostic, NegativeControl};
use crate::{common_inputs, Certificate, CliError, Command, Common, Outcome, Table, DEFAULT_PMAX, DEFAULT_T_F};

type Res = Result<Outcome, CliError>;

pub fn dispatch(cmd: &Command, common: &Common) -> Res {
    match *cmd {
        Command::Chars { q } => chars(common, q),
        Command::Gauss { q } => gauss(common, q),
        Command::Kloosterman { q } => kloosterman_table(common, q),
        Command::Lvalue { q, k, twist } => lvalue(common, q, k, twist),
        Command::Moment { q } => moment(common, q),
        Command::Scan { qmin, qmax } => scan(common, qmin, qmax),
        Command::Voronoi { q, d, n } => voronoi(common, q, d, n),
        Command::CheckData => check_data(common),
    }
}

fn inputs(common: &Common, own: Value) -> Value {
    let mut v = common_inputs(common);
    if let (Some(dst), Value::Object(src)) = (v.as_object_mut(), own) {
        dst.extend(src);
    }
    v
}

fn tol(common: &Common, default: f64) -> f64 {
    common.tol.unwrap_or(default)
}

fn system(common: &Common) -> Result<HeckeSystem, CliError> {
    let loaded = match &common.data {
        Some(path) => Some(HeckeSystem::load(path)?),
        None if common.mock => None,
        None => return Err(CliError::Usage("--data is required for this command".into())),
    };
    Ok(match (loaded, common.mock) {
        (Some(f), false) => f,
        (Some(f), true) => HeckeSystem::mock(common.seed, f.t_f(), f.pmax()),
        (None, _) => HeckeSystem::mock(common.seed, DEFAULT_T_F, DEFAULT_PMAX),
    })
}

fn c(z: Complex64) -> Value {
    json!([z.re, z.im])
}

fn chars(common: &Common, q: u64) -> Res {
    let pm = PrimeModulus::new(q)?;
    let all: Vec<_> = pm.characters().collect();
    let even = all.iter().filter(|c| c.is_even()).count();
    let primitive = all.iter().filter(|c| c.is_primitive()).count();
    let even_primitive = pm.even_primitive().count();
    let quadratic_even = pm.character(pm.order() / 2).is_even();
    let size = (q - 1).min(6) as i64;
    let mut worst: f64 = 0.0;
    let mut matrix = Vec::new();
    for n in 1..=size {
        let mut row = Vec::new();
        for m in 1..=size {
            let s = primitive_pair_sum(&pm, n, m)?;
            let expected = if n == m { q as f64 - 2.0 } else { -1.0 };
            worst = worst.max((s - Complex64::new(expected, 0.0)).norm());
            row.push(s.re);
        }
        matrix.push(row);
    }
    Ok(Outcome {
        inputs: inputs(common, json!({ "q": q })),
        outputs: json!({
            "generator": pm.generator(),
            "characters": all.len(),
            "even": even,
            "odd": all.len() - even,
            "primitive": primitive,
            "even_primitive": even_primitive,
            "quadratic_is_even": quadratic_even,
            "orthogonality": { "n_m_range": [1, size], "real_parts": matrix },
        }),
        certificates: vec![Certificate::at_most("orthogonality_max_error", Cert, worst, tol(common, 1e-10))],
        table: None,
    })
}

fn gauss(common: &Common, q: u64) -> Res {
    let pm = PrimeModulus::new(q)?;
    let bulk = gauss_sums_bulk(&pm);
    let qf = q as f64;
    let mut rows = Vec::new();
    let (mut w_norm, mut w_pair, mut w_bulk): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut table = Table {
        header: ["k", "re", "im", "norm_residual", "pairing_residual", "bulk_difference"].map(String::from).to_vec(),
        rows: Vec::new(),
    };
    for chi in pm.characters().filter(|c| c.is_primitive()) {
        let k = chi.index() as usize;
        let tau = gauss_sum(&chi);
        let norm = (tau.norm_sqr() - qf).abs();
        let pair = (tau * gauss_sum(&chi.conj()) - chi.parity_sign() * qf).norm();
        let diff = (tau - bulk[k]).norm();
        w_norm = w_norm.max(norm);
        w_pair = w_pair.max(pair);
        w_bulk = w_bulk.max(diff);
        rows.push(json!({ "k": k, "tau": c(tau), "norm_residual": norm, "pairing_residual": pair, "bulk_difference": diff }));
        table.rows.push(vec![
            k.to_string(),
            tau.re.to_string(),
            tau.im.to_string(),
            norm.to_string(),
            pair.to_string(),
            diff.to_string(),
        ]);
    }
    Ok(Outcome {
        inputs: inputs(common, json!({ "q": q })),
        outputs: json!({ "gauss_sums": rows }),
        certificates: vec![
            Certificate::at_most("norm_residual", Cert, w_norm, tol(common, 1e-10)),
            Certificate::at_most("pairing_residual", Cert, w_pair, tol(common, 1e-10)),
            Certificate::at_most("bulk_difference", Cert, w_bulk, tol(common, 1e-9)),
        ],
        table: Some(table),
    })
}

fn kloosterman_table(common: &Common, q: u64) -> Res {
    let pm = PrimeModulus::new(q)?;
    // S(a, b) = S(1, ab) for a a unit
    let by_product: Vec<f64> = (0..q as i64).map(|c| kloosterman(1, c, &pm)).collect();
    let bound = 2.0 * (q as f64).sqrt();
    let mut table = Table { header: ["a", "b", "value", "margin"].map(String::from).to_vec(), rows: Vec::new() };
    let mut values = Vec::new();
    let mut min_margin = f64::INFINITY;
    for a in 1..q {
        let mut row = Vec::new();
        for b in 1..q {
            let s = by_product[(a * b % q) as usize];
            min_margin = min_margin.min(bound - s.abs());
            row.push(s);
            table.rows.push(vec![a.to_string(), b.to_string(), s.to_string(), (bound - s.abs()).to_string()]);
        }
        values.push(row);
    }
    let ramanujan = kloosterman(0, 1, &pm);
    Ok(Outcome {
        inputs: inputs(common, json!({ "q": q })),
        outputs: json!({ "weil_bound": bound, "values": values, "min_margin": min_margin, "s_0_1": ramanujan }),
        certificates: vec![
            Certificate::at_least("weil_margin", Cert, min_margin, -tol(common, 1e-10)),
            Certificate::at_most("s_0_1_residual", Cert, (ramanujan + 1.0).abs(), tol(common, 1e-10)),
        ],
        table: Some(table),
    })
}

fn lvalue(common: &Common, q: u64, k: u64, twist: bool) -> Res {
    let pm = PrimeModulus::new(q)?;
    let chi = pm.character(k);
    let own = json!({ "q": q, "k": k, "twist": twist });
    if twist {
        let f = system(common)?;
        if f.reach() < twist_cutoff(q) {
            return Err(lmoment::Error::InsufficientDataAt { q, n: f.reach() + 1, pmax: f.pmax() }.into());
        }
        let v = twist_central_afe(&f, &chi)?;
        let other = twist_central_afe(&f, &chi.conj())?;
        let diff = (v.value - other.value.conj()).norm();
        Ok(Outcome {
            inputs: inputs(common, own),
            outputs: json!({ "value": v, "conjugate_route": c(other.value.conj()) }),
            certificates: vec![Certificate::at_most("conjugate_route_difference", Cert, diff, tol(common, 1e-8))],
            table: None,
        })
    } else {
        let afe = dirichlet_central_afe(&chi)?;
        let oracle = dirichlet_central_oracle(&chi)?;
        let diff = (afe.value - oracle.value.conj()).norm();
        Ok(Outcome {
            inputs: inputs(common, own),
            outputs: json!({ "value": c(oracle.value), "afe": afe, "oracle": oracle }),
            certificates: vec![Certificate::at_most("oracle_difference", Cert, diff, tol(common, 1e-8))],
            table: None,
        })
    }
}

fn moment(common: &Common, q: u64) -> Res {
    let pm = PrimeModulus::new(q)?;
    let f = system(common)?;
    let r = twisted_moment(&f, &pm)?;
    let t = tol(common, 1e-9);
    let certificates = vec![
        Certificate::at_most("decomposition_defect", Cert, r.decomposition_defect, t),
        Certificate::at_most("imaginary_part", Cert, r.imaginary_part, t),
        Certificate::at_least("witness_count", Diagnostic, r.witness_count as f64, 1.0),
    ];
    Ok(Outcome {
        inputs: inputs(common, json!({ "q": q })),
        outputs: serde_json::to_value(&r).map_err(|e| CliError::Output(e.to_string()))?,
        certificates,
        table: None,
    })
}

fn scan(common: &Common, qmin: u64, qmax: u64) -> Res {
    if qmin > qmax {
        return Err(CliError::Usage(format!("empty range: qmin {qmin} > qmax {qmax}")));
    }
    let f = system(common)?;
    let reports = prime_scan(&f, qmin, qmax)?;
    let summary = scan_summary(&reports);
    let t = tol(common, 1e-9);
    let worst_defect = reports.iter().map(|r| r.decomposition_defect).fold(0.0, f64::max);
    let worst_imag = reports.iter().map(|r| r.imaginary_part).fold(0.0, f64::max);
    let worst_dev = reports.iter().map(|r| (r.ratio - 1.0).abs()).fold(0.0, f64::max);
    let header = [
        "q",
        "characters",
        "moment_re",
        "moment_im",
        "main_term",
        "ratio",
        "s1s3_re",
        "s1s4_re",
        "s2s3_re",
        "s2s4_re",
        "decomposition_defect",
        "imaginary_part",
        "err_bound",
        "witness_count",
        "dirichlet_cutoff",
        "twist_cutoff",
    ];
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                r.q.to_string(),
                r.characters.to_string(),
                r.moment.re.to_string(),
                r.moment.im.to_string(),
                r.main_term.to_string(),
                r.ratio.to_string(),
                r.cross_terms.s1s3.re.to_string(),
                r.cross_terms.s1s4.re.to_string(),
                r.cross_terms.s2s3.re.to_string(),
                r.cross_terms.s2s4.re.to_string(),
                r.decomposition_defect.to_string(),
                r.imaginary_part.to_string(),
                r.err_bound.to_string(),
                r.witness_count.to_string(),
                r.cutoffs.dirichlet.to_string(),
                r.cutoffs.twist.to_string(),
            ]
        })
        .collect();
    let certificates = vec![
        Certificate::at_most("max_decomposition_defect", Cert, worst_defect, t),
        Certificate::at_most("max_imaginary_part", Cert, worst_imag, t),
        Certificate::at_most("max_ratio_deviation", Diagnostic, worst_dev, 0.7),
        Certificate::flag("dyadic_medians_nonincreasing", Diagnostic, summary.medians_nonincreasing),
    ];
    Ok(Outcome {
        inputs: inputs(common, json!({ "qmin": qmin, "qmax": qmax })),
        outputs: json!({ "summary": summary, "reports": reports }),
        certificates,
        table: Some(Table { header: header.map(String::from).to_vec(), rows }),
    })
}

fn voronoi(common: &Common, q: u64, d: i64, n: u64) -> Res {
    let pm = PrimeModulus::new(q)?;
    let f = system(common)?;
    let check = voronoi_check(&f, d, &pm, n, &TestFunction::canonical())?;
    let kind = if check.negative_control { NegativeControl } else { Cert };
    let certificates = vec![
        Certificate::at_most("residual", kind, check.residual, tol(common, 1e-3)),
        Certificate::at_most("residual_within_error_budget", Diagnostic, check.residual, check.error_budget),
        Certificate::flag("tail_certified", Diagnostic, check.tail_certified),
    ];
    Ok(Outcome {
        inputs: inputs(common, json!({ "q": q, "d": d, "N": n, "test_function": "canonical" })),
        outputs: serde_json::to_value(&check).map_err(|e| CliError::Output(e.to_string()))?,
        certificates,
        table: None,
    })
}

fn check_data(common: &Common) -> Res {
    let f = system(common)?;
    let grid: Vec<u64> = [10, 100, 1_000, 10_000, 100_000].into_iter().filter(|&x| x <= f.reach()).collect();
    let avg = f.average_bound_report(&grid)?;
    let mut certificates = vec![Certificate::flag("average_bound_unflagged", Diagnostic, !avg.flagged)];
    let l_one = match f.l_one_default() {
        Ok(l) => {
            certificates.push(Certificate::at_most("l_one_disagreement", Cert, l.disagreement, tol(common, 1e-6)));
            serde_json::to_value(l).map_err(|e| CliError::Output(e.to_string()))?
        }
        Err(e) if e.is_numerical() => {
            certificates.push(Certificate::flag("l_one_converged", Cert, false));
            json!({ "error": e.to_string() })
        }
        Err(e) => return Err(e.into()),
    };
    Ok(Outcome {
        inputs: inputs(common, json!({})),
        outputs: json!({
            "t_f": f.t_f(),
            "pmax": f.pmax(),
            "precision": f.precision(),
            "provenance": f.provenance().to_string(),
            "reach": f.reach(),
            "average_bound": avg,
            "l_one": l_one,
        }),
        certificates,
        table: None,
    })
}
