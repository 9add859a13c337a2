use std::f64::consts::PI;
use std::path::Path;

use pdkernel::quad::GaussRule;
use pdkernel::{
    build_onb, concentration, discrete_isometry_check, discretize, extend_type1, g_r_extension, sample_via_spectrum,
    second_moment, solve_theta_spectrum, verify_against_mercer, Bump, KernelFamily, MeasureOnInterval, MomentVerdict,
    NystromConfig, PdKernel, TestFunction, TranscendentalSpec,
};
use serde_json::{json, Value};

use crate::output::{csv_bytes, emit, json_bytes, num, Format};
use crate::{
    CliError, Command, ConcentrationArgs, ExtendArgs, IsometryArgs, MercerArgs, MomentsArgs, OnbArgs, SampleArgs,
    SpectrumArgs,
};

const TRACE_TOL: f64 = 1e-9;
const ROOT_MATCH_TOL: f64 = 1e-3;
const CURVE_SAMPLES: usize = 2001;

pub struct Outcome {
    pub bytes: Vec<u8>,
    /// Set when an internal check did not pass; the output is still written.
    pub failed_check: Option<String>,
}

impl Outcome {
    fn ok(bytes: Vec<u8>) -> Self {
        Outcome { bytes, failed_check: None }
    }
}

pub fn run(cmd: &Command, format: Format) -> Result<Outcome, CliError> {
    match cmd {
        Command::Spectrum(a) => spectrum(a, format),
        Command::Extend(a) => extend(a, format),
        Command::Mercer(a) => mercer(a, format),
        Command::Onb(a) => onb(a, format),
        Command::Moments(a) => moments(a, format),
        Command::Concentration(a) => concentration_cmd(a, format),
        Command::Sample(a) => sample(a, format),
        Command::Isometry(a) => isometry(a, format),
    }
}

fn kernel(spec: &str) -> Result<PdKernel, CliError> {
    Ok(PdKernel::from_spec(spec)?)
}

fn wrap(v: f64) -> f64 {
    (v + PI).rem_euclid(2.0 * PI) - PI
}

fn spectrum(a: &SpectrumArgs, format: Format) -> Result<Outcome, CliError> {
    let s = solve_theta_spectrum(a.theta, a.n)?;
    if s.was_reduced() {
        eprintln!("note: theta {} reduced modulo 2π to {}", a.theta, s.theta());
    }
    if let Some(path) = &a.curves {
        // λ − θ and −2 arctan λ, both wrapped to (−π, π]; they cross at Λ_θ.
        let lo = s.lambdas()[0] - PI;
        let hi = s.lambdas()[s.lambdas().len() - 1] + PI;
        let rows: Vec<Vec<String>> = (0..CURVE_SAMPLES)
            .map(|i| {
                let l = lo + (hi - lo) * i as f64 / (CURVE_SAMPLES - 1) as f64;
                vec![num(l), num(wrap(l - s.theta())), num(wrap(-2.0 * l.atan()))]
            })
            .collect();
        emit(Some(path), &csv_bytes(&["lambda", "phase", "minus_two_arctan"], &rows)?)?;
    }
    let bytes = match format {
        Format::Json => {
            let mut out = s.to_json()?.into_bytes();
            out.push(b'\n');
            out
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> =
                s.roots().iter().map(|r| vec![r.n.to_string(), num(r.lambda), num(r.residual)]).collect();
            csv_bytes(&["n", "lambda", "residual"], &rows)?
        }
    };
    Ok(Outcome::ok(bytes))
}

fn grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, CliError> {
    if n < 2 || hi.partial_cmp(&lo) != Some(std::cmp::Ordering::Greater) {
        return Err(CliError::Usage("need at least two samples on a nonempty range".into()));
    }
    Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
}

fn extend(a: &ExtendArgs, format: Format) -> Result<Outcome, CliError> {
    let k = kernel(&a.kernel)?;
    if k.family() != KernelFamily::Exp {
        return Err(CliError::Usage("extensions are implemented for the exp kernel".into()));
    }
    let xs = grid(a.xmin, a.xmax, a.samples)?;
    let local = |x: f64| if x.abs() <= 1.0 { Some((-x.abs()).exp()) } else { None };
    let (kind, param, tail, values): (&str, f64, Option<f64>, Vec<(f64, f64)>) = match (a.theta, a.r) {
        (Some(theta), None) => {
            let ext = extend_type1(theta, a.n)?;
            if ext.theta != theta {
                eprintln!("note: theta {theta} reduced modulo 2π to {}", ext.theta);
            }
            let v = ext.eval_batch(&xs).into_iter().map(|z| (z.re, z.im)).collect();
            ("type1", ext.theta, Some(ext.tail_bound), v)
        }
        (None, Some(r)) => {
            let g = g_r_extension(r)?;
            ("type2", r, None, g.eval_batch(&xs).into_iter().map(|v| (v, 0.0)).collect())
        }
        _ => return Err(CliError::Usage("give exactly one of --theta and --r".into())),
    };
    let errors: Vec<Option<f64>> =
        xs.iter().zip(&values).map(|(&x, &(re, im))| local(x).map(|f| (re - f).hypot(im))).collect();
    let worst = errors.iter().flatten().fold(0.0f64, |m, &e| m.max(e));
    let failed_check = tail
        .filter(|&b| worst > b * (1.0 + 1e-9) + 1e-14)
        .map(|b| format!("restriction error {worst:e} exceeds tail bound {b:e}"));
    let bytes = match format {
        Format::Json => json_bytes(&json!({
            "kind": kind,
            "parameter": param,
            "tail_bound": tail,
            "max_restriction_error": worst,
            "x": xs,
            "re": values.iter().map(|v| v.0).collect::<Vec<_>>(),
            "im": values.iter().map(|v| v.1).collect::<Vec<_>>(),
            "restriction_error": errors,
        }))?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = xs
                .iter()
                .zip(&values)
                .zip(&errors)
                .map(|((&x, &(re, im)), e)| vec![num(x), num(re), num(im), e.map(num).unwrap_or_default()])
                .collect();
            csv_bytes(&["x", "re", "im", "restriction_error"], &rows)?
        }
    };
    Ok(Outcome { bytes, failed_check })
}

fn transcendental_for(k: &PdKernel) -> Option<TranscendentalSpec> {
    match k.family() {
        KernelFamily::Exp => Some(TranscendentalSpec::ExpBvp),
        KernelFamily::Triangle => Some(TranscendentalSpec::TriangleRederived),
        _ => None,
    }
}

fn mercer(a: &MercerArgs, format: Format) -> Result<Outcome, CliError> {
    let k = kernel(&a.kernel)?;
    let dec = discretize(&k, &NystromConfig::with_nodes(a.nodes))?;
    let trace_error = (dec.trace() - k.half_width() * k.value_at_zero()).abs();
    let spec = transcendental_for(&k);
    let report = spec.map(|s| verify_against_mercer(s, &dec, a.n, ROOT_MATCH_TOL)).transpose()?;
    let mut failures = Vec::new();
    if trace_error >= TRACE_TOL {
        failures.push(format!("trace error {trace_error:e}"));
    }
    if let Some(r) = report.as_ref().filter(|r| !r.unmatched.is_empty()) {
        failures.push(format!("eigenvalues {:?} have no matching root", r.unmatched));
    }
    if let (Some(path), Some(s)) = (&a.curves, spec) {
        let kmax = 4.0 * PI * (a.n as f64 + 1.0);
        // Both equations are tan(k/c) = rational(k): c = 1 for exp, 4 for triangle.
        let (c, header, rhs): (f64, [&str; 3], fn(f64) -> f64) = match s {
            TranscendentalSpec::ExpBvp => (1.0, ["k", "tan_k", "two_k_over_k2_minus_1"], |k| 2.0 * k / (k * k - 1.0)),
            _ => (4.0, ["k", "tan_quarter_k", "four_over_three_k"], |k| 4.0 / (3.0 * k)),
        };
        let rows: Vec<Vec<String>> = (1..=CURVE_SAMPLES)
            .map(|i| {
                let x = kmax * i as f64 / CURVE_SAMPLES as f64;
                vec![num(x), num((x / c).tan()), num(rhs(x))]
            })
            .collect();
        emit(Some(path), &csv_bytes(&header, &rows)?)?;
    }
    let bytes = match format {
        Format::Json => json_bytes(&json!({
            "kernel": k.name(),
            "nodes": a.nodes,
            "trace": dec.trace(),
            "trace_error": trace_error,
            "eigenvalues": dec.eigenvalues(),
            "comparison": report,
        }))?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = dec
                .eigenvalues()
                .iter()
                .enumerate()
                .map(|(i, &l)| {
                    let m = report.as_ref().and_then(|r| r.matches.get(i));
                    vec![
                        (i + 1).to_string(),
                        num(l),
                        m.and_then(|m| m.mapped).map(num).unwrap_or_default(),
                        m.map(|m| num(m.relative_error)).unwrap_or_default(),
                    ]
                })
                .collect();
            csv_bytes(&["n", "eigenvalue", "transcendental", "relative_error"], &rows)?
        }
    };
    eprintln!("trace {} (error {trace_error:e})", num(dec.trace()));
    let failed_check = (!failures.is_empty()).then(|| failures.join("; "));
    Ok(Outcome { bytes, failed_check })
}

fn onb(a: &OnbArgs, format: Format) -> Result<Outcome, CliError> {
    let k = kernel(&a.kernel)?;
    let basis = build_onb(&k, a.depth)?;
    if let Some(path) = &a.functions {
        let xs = grid(0.0, k.half_width(), a.samples)?;
        let mut header = vec!["x".to_string()];
        header.extend(basis.iter().map(|e| e.index.label()));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows: Vec<Vec<String>> = xs
            .iter()
            .map(|&x| std::iter::once(num(x)).chain(basis.iter().map(|e| num(e.eval(&k, x)))).collect())
            .collect();
        emit(Some(path), &csv_bytes(&header, &rows)?)?;
    }
    let bytes = match format {
        Format::Json => {
            let rows: Vec<Value> = basis
                .iter()
                .map(|e| {
                    json!({
                        "label": e.index.label(),
                        "center": e.index.center(k.half_width()),
                        "squared_norm": e.raw_norm_sq,
                        "normalization": e.normalization,
                        "terms": e.terms,
                    })
                })
                .collect();
            json_bytes(&json!({ "kernel": k.name(), "depth": a.depth, "elements": rows }))?
        }
        Format::Csv => {
            let mut buf = Vec::new();
            pdkernel::dyadic::write_onb_table(&basis, &mut buf)?;
            buf
        }
    };
    Ok(Outcome::ok(bytes))
}

struct MomentRow {
    kernel: String,
    exponent: Option<f64>,
    moment: String,
    indices: String,
}

fn moment_row(spec: &str) -> Result<MomentRow, CliError> {
    let k = kernel(spec)?;
    let Some(m) = k.spectral_measure() else {
        return Ok(MomentRow {
            kernel: k.name(),
            exponent: None,
            moment: "indeterminate".into(),
            indices: "indeterminate".into(),
        });
    };
    let r = second_moment(&m, m.range().max(1.0))?;
    let (moment, indices) = match r.verdict {
        MomentVerdict::Divergent { .. } => ("divergent", "(1,1)"),
        MomentVerdict::Finite(_) => ("finite", "(0,0)"),
        MomentVerdict::Indeterminate(_) => ("indeterminate", "indeterminate"),
    };
    Ok(MomentRow { kernel: k.name(), exponent: r.fitted_exponent, moment: moment.into(), indices: indices.into() })
}

fn moments(a: &MomentsArgs, format: Format) -> Result<Outcome, CliError> {
    let defaults = ["exp", "triangle", "cubic"].map(String::from).to_vec();
    let specs = a.kernel.as_ref().unwrap_or(&defaults);
    let rows = specs.iter().map(|s| moment_row(s)).collect::<Result<Vec<_>, _>>()?;
    let bytes = match format {
        Format::Json => json_bytes(&Value::Array(
            rows.iter()
                .map(|r| json!({ "kernel": r.kernel, "tail_exponent": r.exponent, "second_moment": r.moment, "indices": r.indices }))
                .collect(),
        ))?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![r.kernel.clone(), r.exponent.map(num).unwrap_or_default(), r.moment.clone(), r.indices.clone()])
                .collect();
            csv_bytes(&["kernel", "tail_exponent", "second_moment", "indices"], &rows)?
        }
    };
    Ok(Outcome::ok(bytes))
}

fn read_measure(path: &Path) -> Result<MeasureOnInterval, CliError> {
    let text = std::fs::read_to_string(path)?;
    let v: Value = serde_json::from_str(&text)?;
    let bad = |what: &str| CliError::Usage(format!("{}: {what}", path.display()));
    let a = v["a"].as_f64().ok_or_else(|| bad("missing number \"a\""))?;
    let nums = |key: &str| -> Result<Vec<f64>, CliError> {
        match &v[key] {
            Value::Null => Ok(Vec::new()),
            Value::Array(xs) => xs.iter().map(|x| x.as_f64().ok_or_else(|| bad(key))).collect(),
            _ => Err(bad(key)),
        }
    };
    let density = nums("density")?;
    let atoms = match &v["atoms"] {
        Value::Null => Vec::new(),
        Value::Array(xs) => xs
            .iter()
            .map(|p| match (p[0].as_f64(), p[1].as_f64()) {
                (Some(x), Some(w)) => Ok((x, pdkernel::Complex64::new(w, 0.0))),
                _ => Err(bad("atoms must be [x, weight] pairs")),
            })
            .collect::<Result<_, _>>()?,
        _ => return Err(bad("atoms")),
    };
    let samples = density.into_iter().map(|d| pdkernel::Complex64::new(d, 0.0)).collect();
    Ok(MeasureOnInterval::from_samples(a, samples, atoms)?)
}

fn concentration_cmd(a: &ConcentrationArgs, format: Format) -> Result<Outcome, CliError> {
    let mut rows = Vec::new();
    for p in &a.measures {
        let c = concentration(&read_measure(p)?)?;
        rows.push((p.display().to_string(), c.q, c.dispersion));
    }
    let bytes = match format {
        Format::Json => json_bytes(&Value::Array(
            rows.iter().map(|(s, q, d)| json!({ "source": s, "q": q, "dispersion": d })).collect(),
        ))?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = rows.iter().map(|(s, q, d)| vec![s.clone(), num(*q), num(*d)]).collect();
            csv_bytes(&["source", "q", "dispersion"], &rows)?
        }
    };
    Ok(Outcome::ok(bytes))
}

fn sample(a: &SampleArgs, format: Format) -> Result<Outcome, CliError> {
    let phi = match &a.phi {
        Some(p) => TestFunction::from_csv(p)?,
        None => TestFunction::from_bumps(1.0, a.nodes, &[(1.0, Bump::new(0.5, 0.3)?)])?,
    };
    let ext = extend_type1(a.theta, a.n)?;
    let rule = GaussRule::new(20);
    let direct = |x: f64| -> f64 {
        let g = |y: f64| (-(x - y).abs()).exp() * phi.eval(y);
        rule.composite(0.0, x, 16, g) + rule.composite(x, 1.0, 16, g)
    };
    let l1 = rule.composite(0.0, 1.0, 64, |y| phi.eval(y).abs());
    let allowed = ext.tail_bound * l1 + 1e-6;
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for i in 1..=a.samples {
        let x = i as f64 / (a.samples + 1) as f64;
        let v = sample_via_spectrum(&phi, &ext, x)?;
        let d = direct(x);
        worst = worst.max((v.re - d).hypot(v.im));
        rows.push((x, v.re, v.im, d));
    }
    let failed_check = (worst > allowed).then(|| format!("sampling gap {worst:e} exceeds {allowed:e}"));
    let bytes = match format {
        Format::Json => json_bytes(&json!({
            "theta": ext.theta,
            "tail_bound": ext.tail_bound,
            "max_gap": worst,
            "samples": rows.iter().map(|r| json!({ "x": r.0, "re": r.1, "im": r.2, "direct": r.3 })).collect::<Vec<_>>(),
        }))?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = rows.iter().map(|r| vec![num(r.0), num(r.1), num(r.2), num(r.3)]).collect();
            csv_bytes(&["x", "re", "im", "direct"], &rows)?
        }
    };
    Ok(Outcome { bytes, failed_check })
}

fn isometry(a: &IsometryArgs, format: Format) -> Result<Outcome, CliError> {
    let k = kernel(&a.kernel)?;
    let mu = k.spectral_measure().ok_or(pdkernel::Error::MissingMeasure)?;
    let r = discrete_isometry_check(
        &a.points,
        |u| pdkernel::Complex64::new(k.value(u), 0.0),
        &mu,
        a.trials,
        a.tol,
        a.seed,
    )?;
    let failed_check =
        (!r.passed).then(|| format!("relative gap {:e}, Gram minimum {:e}", r.max_relative_gap, r.min_eigenvalue));
    let bytes = match format {
        Format::Json => json_bytes(&serde_json::to_value(&r)?)?,
        Format::Csv => csv_bytes(
            &["passed", "trials", "max_relative_gap", "min_eigenvalue"],
            &[vec![r.passed.to_string(), r.trials.to_string(), num(r.max_relative_gap), num(r.min_eigenvalue)]],
        )?,
    };
    Ok(Outcome { bytes, failed_check })
}
