use std::collections::BTreeMap;
use std::io::Write;

use num_complex::Complex64;
use twlab::brieskorn::{sample_curvatures, BrieskornLink};
use twlab::gausscurv::{
    lambda1_report, verify_main_theorem, Lambda1Options, TheoremReport, VERDICT_TOL,
};
use twlab::report::{
    add_stats, analyze_summary, link_summary, AnalyzeRecord, BoundRecord, LinkRecord, Provenance,
    Record, Report, Summary, SummaryValue, SweepRecord,
};
use twlab::webster3::{structural_residual, tw_direct, RESIDUAL_TOL};
use twlab::Family;

use crate::source::{resolve, resolve_with, Failure, Surface};
use crate::{AnalyzeArgs, BrieskornArgs, OutputArgs, SweepArgs};

/// Tolerance for reference values obtained from the direct solver.
const DIRECT_TOL: f64 = 1e-6;
const CIRCLE_ANGLES: [f64; 4] = [
    0.0,
    std::f64::consts::FRAC_PI_3,
    std::f64::consts::FRAC_PI_2,
    1.1,
];

fn provenance(
    command: &str,
    seed: u64,
    points: usize,
    dirs: usize,
    metric: &str,
    direct: bool,
    out: &OutputArgs,
) -> Provenance {
    Provenance {
        tool: "twlab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        rho: None,
        seed,
        points,
        dirs,
        metric: metric.into(),
        direct,
        tolerances: BTreeMap::from([
            ("tol".to_string(), out.tol),
            ("verdict".to_string(), VERDICT_TOL),
            ("structural_residual".to_string(), RESIDUAL_TOL),
            ("direct".to_string(), DIRECT_TOL),
        ]),
    }
}

fn write_outputs(report: &Report, out: &OutputArgs) -> Result<(), Failure> {
    let text =
        serde_json::to_string_pretty(report).map_err(|e| Failure::Numeric(e.to_string()))? + "\n";
    match &out.out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    if let Some(path) = &out.csv {
        let mut w = csv::Writer::from_path(path).map_err(|e| Failure::Numeric(e.to_string()))?;
        if let Some(first) = report.samples.first() {
            w.write_record(first.columns().iter().map(|(k, _)| k))
                .map_err(|e| Failure::Numeric(e.to_string()))?;
        }
        for rec in &report.samples {
            w.write_record(rec.columns().iter().map(|(_, v)| v))
                .map_err(|e| Failure::Numeric(e.to_string()))?;
        }
        w.flush()?;
    }
    Ok(())
}

fn finish(report: Report, out: &OutputArgs, failures: Vec<String>) -> Result<(), Failure> {
    write_outputs(&report, out)?;
    if out.assert && !failures.is_empty() {
        return Err(Failure::Assertion(failures));
    }
    Ok(())
}

fn insert(summary: &mut Summary, key: &str, v: impl Into<SummaryValue>) {
    summary.insert(key.to_string(), v.into());
}

struct Analysis {
    records: Vec<AnalyzeRecord>,
    theorem: TheoremReport,
}

/// Theorem sweep plus, for hypersurfaces in C^2, the direct solver whenever
/// it is requested or the Gauss path is not valid.
fn run_analysis(
    s: &Surface,
    points: usize,
    dirs: usize,
    seed: u64,
    direct: bool,
) -> Result<Analysis, Failure> {
    if direct && s.n() != 1 {
        return Err(Failure::Usage(format!(
            "--direct needs a hypersurface in C^2, got C^{}",
            s.f.dim()
        )));
    }
    let theorem = verify_main_theorem(&s.f, &s.metric, points, dirs, seed)?;
    let gauss = theorem.gauss_path_valid();
    let mut records: Vec<AnalyzeRecord> = theorem
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| AnalyzeRecord::from_point(i, r, gauss))
        .collect();
    if s.n() == 1 && (direct || !gauss) {
        for (rec, pr) in records.iter_mut().zip(&theorem.records) {
            let st = tw_direct(&s.f, &pr.point)?;
            rec.r_direct = Some(st.r);
            rec.torsion_direct = Some(st.torsion_norm());
            rec.structural_residual = Some(structural_residual(&st));
            if !gauss {
                rec.k_min = Some(st.k());
                rec.k_max = Some(st.k());
            }
        }
    }
    Ok(Analysis { records, theorem })
}

fn theorem_summary(summary: &mut Summary, t: &TheoremReport) {
    insert(summary, "gauss_path_valid", t.gauss_path_valid());
    insert(summary, "flags", t.flags.join("; ").as_str());
    insert(summary, "c_convex", t.c_convex);
    insert(summary, "theorem_holds", t.theorem_holds);
    insert(
        summary,
        "equivalence_disagreements",
        t.equivalence_disagreements,
    );
}

fn analysis_checks(s: &Surface, a: &Analysis, tol: f64) -> Vec<String> {
    let mut fails = Vec::new();
    if a.theorem.theorem_holds == Some(false) {
        fails.push(format!(
            "curvature lower bound violated (min bound residual {:e})",
            a.theorem.min_bound_residual
        ));
    }
    if a.theorem.equivalence_disagreements > 0 {
        fails.push(format!(
            "{} convexity verdict disagreement(s)",
            a.theorem.equivalence_disagreements
        ));
    }
    let worst = a
        .records
        .iter()
        .filter_map(|r| r.structural_residual)
        .fold(0.0, f64::max);
    if worst > RESIDUAL_TOL {
        fails.push(format!(
            "structural residual {worst:e} above {RESIDUAL_TOL:e}"
        ));
    }
    let ks = || a.records.iter().flat_map(|r| [r.k_min, r.k_max]).flatten();
    let mut expect_k = |target: f64, label: &str| {
        if let Some(k) = ks().find(|k| (k - target).abs() > tol) {
            fails.push(format!(
                "{label}: K = {k} differs from {target} by more than {tol:e}"
            ));
        }
    };
    match s.family {
        Some(Family::Sphere) => expect_k(1.0, "sphere"),
        Some(Family::PerturbedSphereE) => expect_k(0.25, "perturbed_sphere_E"),
        Some(Family::Reinhardt) => {
            for r in &a.records {
                if let (Some(rr), Some(t)) = (r.r_direct, r.torsion_direct) {
                    if (rr - 0.5).abs() > DIRECT_TOL || (t - 0.5).abs() > DIRECT_TOL {
                        fails.push(format!(
                            "reinhardt: R = {rr}, |A| = {t} at sample {} (expected 1/2)",
                            r.index
                        ));
                        break;
                    }
                }
            }
        }
        _ => {}
    }
    fails
}

pub fn analyze(args: &AnalyzeArgs) -> Result<(), Failure> {
    let s = resolve(&args.source)?;
    check_counts(args.sampling.points)?;
    let a = run_analysis(
        &s,
        args.sampling.points,
        args.sampling.dirs,
        args.sampling.seed,
        args.direct,
    )?;
    let mut summary = analyze_summary(&a.records);
    theorem_summary(&mut summary, &a.theorem);
    let fails = analysis_checks(&s, &a, args.output.tol);
    let mut prov = provenance(
        "analyze",
        args.sampling.seed,
        args.sampling.points,
        args.sampling.dirs,
        &s.metric_text,
        args.direct,
        &args.output,
    );
    prov.rho = args.source.rho.clone();
    let report = Report {
        family: s.name.clone(),
        params: s.params.clone(),
        provenance: prov,
        samples: a.records.into_iter().map(Record::Analyze).collect(),
        summary,
    };
    finish(report, &args.output, fails)
}

fn check_counts(points: usize) -> Result<(), Failure> {
    if points == 0 {
        return Err(Failure::Usage("--points must be at least 1".into()));
    }
    Ok(())
}

fn sweep_values(from: f64, to: f64, steps: usize) -> Result<Vec<f64>, Failure> {
    if steps == 0 || !from.is_finite() || !to.is_finite() {
        return Err(Failure::Usage(
            "--steps must be at least 1 and the range finite".into(),
        ));
    }
    if steps == 1 {
        return Ok(vec![from]);
    }
    Ok((0..steps)
        .map(|i| from + (to - from) * i as f64 / (steps - 1) as f64)
        .collect())
}

pub fn sweep(args: &SweepArgs) -> Result<(), Failure> {
    let base = &args.analyze;
    let family: Family = match &base.source.family {
        Some(name) => name.parse()?,
        None => return Err(Failure::Usage("sweep needs --family".into())),
    };
    if !family.parameter_names().contains(&args.param.as_str()) {
        return Err(Failure::Usage(format!(
            "`{}` is not a parameter of {family}",
            args.param
        )));
    }
    if args.at_circle && family != Family::Hartogs {
        return Err(Failure::Usage(
            "--at-circle is only defined for the hartogs family".into(),
        ));
    }
    check_counts(base.sampling.points)?;
    let base_surface = resolve(&base.source);
    let mut params = match &base_surface {
        Ok(s) => s.params.clone(),
        Err(_) => {
            let mut p = BTreeMap::new();
            for (k, v) in [
                ("n", base.source.n),
                ("t", base.source.t),
                ("eps", base.source.eps),
            ] {
                if let Some(v) = v {
                    p.insert(k.to_string(), v);
                }
            }
            p
        }
    };
    for item in &base.source.set {
        if let Some((k, v)) = item.split_once('=') {
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Failure::Usage(format!("--set {k}: `{v}` is not a number")))?;
            params.insert(k.trim().to_string(), v);
        }
    }
    let mut records = Vec::new();
    let mut fails = Vec::new();
    for value in sweep_values(args.from, args.to, args.steps)? {
        params.insert(args.param.clone(), value);
        let s = resolve_with(&base.source, params.clone())?;
        let a = run_analysis(
            &s,
            base.sampling.points,
            base.sampling.dirs,
            base.sampling.seed,
            base.direct,
        )?;
        let gauss = a.theorem.gauss_path_valid();
        let bp_min = a
            .records
            .iter()
            .map(|r| r.bp_min)
            .fold(f64::INFINITY, f64::min);
        let ks: Vec<f64> = a
            .records
            .iter()
            .flat_map(|r| [r.k_min, r.k_max])
            .flatten()
            .collect();
        let mut rec = SweepRecord {
            parameter: args.param.clone(),
            value,
            points: a.records.len(),
            bp_min,
            min_torsion_margin: gauss.then_some(a.theorem.min_torsion_margin),
            k_min: ks.iter().copied().reduce(f64::min),
            k_max: ks.iter().copied().reduce(f64::max),
            r: None,
            r_min: None,
            r_max: None,
            structural_residual: None,
        };
        let mut rs: Vec<f64> = a.records.iter().filter_map(|r| r.r_direct).collect();
        let mut residual = a
            .records
            .iter()
            .filter_map(|r| r.structural_residual)
            .reduce(f64::max);
        if args.at_circle {
            rs.clear();
            for tau in CIRCLE_ANGLES {
                let st = tw_direct(
                    &s.f,
                    &[Complex64::new(0.0, 0.0), Complex64::from_polar(1.0, tau)],
                )?;
                rs.push(st.r);
                residual = Some(residual.unwrap_or(0.0).max(structural_residual(&st)));
            }
            let expected = 2.0 * (1.0 - value);
            if let Some(r) = rs.iter().find(|r| (*r - expected).abs() > DIRECT_TOL) {
                fails.push(format!("hartogs t = {value}: R = {r}, expected {expected}"));
            }
        }
        rec.r = rs.first().copied();
        rec.r_min = rs.iter().copied().reduce(f64::min);
        rec.r_max = rs.iter().copied().reduce(f64::max);
        rec.structural_residual = residual;
        if family == Family::Hartogs && bp_min < -VERDICT_TOL {
            fails.push(format!(
                "hartogs t = {value}: Behnke-Peschl minimum {bp_min:e} < 0"
            ));
        }
        if residual.is_some_and(|r| r > RESIDUAL_TOL) {
            fails.push(format!(
                "{} = {value}: structural residual above tolerance",
                args.param
            ));
        }
        records.push(rec);
    }
    let mut summary = Summary::new();
    add_stats(&mut summary, "R", records.iter().map(|r| r.r));
    add_stats(
        &mut summary,
        "bp_min",
        records.iter().map(|r| Some(r.bp_min)),
    );
    add_stats(
        &mut summary,
        "K",
        records.iter().flat_map(|r| [r.k_min, r.k_max]),
    );
    add_stats(
        &mut summary,
        "structural_residual",
        records.iter().map(|r| r.structural_residual),
    );
    insert(&mut summary, "values", records.len());
    params.remove(&args.param);
    let report = Report {
        family: family.name().to_string(),
        params,
        provenance: provenance(
            "sweep",
            base.sampling.seed,
            base.sampling.points,
            base.sampling.dirs,
            &base.source.metric,
            base.direct || args.at_circle,
            &base.output,
        ),
        samples: records.into_iter().map(Record::Sweep).collect(),
        summary,
    };
    finish(report, &base.output, fails)
}

pub fn brieskorn(args: &BrieskornArgs) -> Result<(), Failure> {
    if args.exponents.len() < 3 {
        return Err(Failure::Usage("need ≥ 3 exponents".into()));
    }
    check_counts(args.points)?;
    let link = BrieskornLink::new(&args.exponents, args.r)?;
    let samples = sample_curvatures(&link, args.points, args.seed)?;
    let records: Vec<LinkRecord> = samples
        .iter()
        .enumerate()
        .map(|(i, s)| LinkRecord::new(i, s))
        .collect();
    let mut summary = link_summary(&records);
    insert(&mut summary, "degree", link.degree() as f64);
    let mut fails = Vec::new();
    for r in &records {
        if r.constraint_residual >= 1e-10 {
            fails.push(format!(
                "sample {}: constraint residual {:e}",
                r.index, r.constraint_residual
            ));
        }
        if r.identity_residual >= 1e-10 {
            fails.push(format!(
                "sample {}: identity residual {:e}",
                r.index, r.identity_residual
            ));
        }
        if r.k_ambient > 1e-12 {
            fails.push(format!(
                "sample {}: ambient curvature {} > 0",
                r.index, r.k_ambient
            ));
        }
        if (r.k_ambient - r.k_ambient_general).abs() >= 1e-12 * r.k_ambient.abs().max(1.0) {
            fails.push(format!("sample {}: Vitter forms disagree", r.index));
        }
    }
    let mut params: BTreeMap<String, f64> = BTreeMap::from([("r".to_string(), args.r)]);
    for (j, &a) in args.exponents.iter().enumerate() {
        params.insert(format!("a{j}"), a as f64);
    }
    let report = Report {
        family: "brieskorn".into(),
        params,
        provenance: provenance(
            "brieskorn",
            args.seed,
            args.points,
            1,
            "weighted",
            false,
            &args.output,
        ),
        samples: records.into_iter().map(Record::Link).collect(),
        summary,
    };
    finish(report, &args.output, fails)
}

pub fn lambda1(args: &AnalyzeArgs) -> Result<(), Failure> {
    let s = resolve(&args.source)?;
    check_counts(args.sampling.points)?;
    let opts = Lambda1Options {
        use_reference_tensor: s.family == Some(Family::PerturbedSphereE) && s.n() >= 2,
    };
    let rep = lambda1_report(
        &s.f,
        &s.metric,
        args.sampling.points,
        args.sampling.seed,
        opts,
    )?;
    let mut summary = Summary::new();
    insert(&mut summary, "best_lower", rep.best_lower);
    insert(&mut summary, "upper", rep.upper);
    insert(&mut summary, "upper_exact", rep.upper_exact);
    insert(&mut summary, "consistent", rep.consistent);
    insert(&mut summary, "c_convex", rep.c_convex);
    insert(&mut summary, "constant_hessian", rep.constant_hessian);
    insert(&mut summary, "identity_hessian", rep.identity_hessian);
    insert(&mut summary, "reference_tensor", opts.use_reference_tensor);
    let mut fails = Vec::new();
    if rep.consistent == Some(false) {
        fails.push(format!(
            "lower bound {:?} exceeds upper bound {:?}",
            rep.best_lower, rep.upper
        ));
    }
    let mut prov = provenance(
        "lambda1",
        args.sampling.seed,
        args.sampling.points,
        0,
        &s.metric_text,
        args.direct,
        &args.output,
    );
    prov.rho = args.source.rho.clone();
    let report = Report {
        family: s.name.clone(),
        params: s.params.clone(),
        provenance: prov,
        samples: rep
            .lower_bounds
            .iter()
            .map(|b| Record::Bound(BoundRecord::new(b)))
            .collect(),
        summary,
    };
    finish(report, &args.output, fails)
}
