use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use super::{
    BryantArgs, CliError, ClosedFormArgs, DimsArgs, Format, GridSpec, IntegrateFlatArgs,
    IntegrateWarpedArgs, ScanBlowupArgs, SolverArgs, Span, VerifyArgs,
};
use crate::curvature::curvature_warped;
use crate::dims::{bound_table, classify};
use crate::flat::{self, reconstruct, CoefficientConvention, FlatSolitonState};
use crate::identities::{self, elliptic_monitor, hamilton_monitor};
use crate::integrator::{IntegrateOptions, IntegrationResult, Termination, Tolerances};
use crate::profile_io::{self, fmt_f64, write_all_atomic, Profile};
use crate::riccati::{
    blowup_time, reduce, residual_closed_form, solve_riccati, solve_riccati_literal_case3,
    ClosedFormSteady,
};
use crate::warped::{
    self as warped, bryant_series_start, warped_soliton_residual, warped_to_profile,
    WarpedSolitonState,
};

const SCHEMA_VERSION: u32 = 1;
/// Bryant elliptic residuals are reported from this many series-start
/// parameters onward, where the start-up transient has decayed.
const BRYANT_WINDOW_FACTOR: f64 = 50.0;
const MAX_TABLE_ROWS: u64 = 1_000_000;

type Outputs = Vec<(PathBuf, Vec<u8>)>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn render(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values always serialise");
    s.push('\n');
    s
}

/// Stages the JSON summary with the other artifacts, writes everything
/// atomically, and returns the summary when it belongs on stdout.
fn emit(mut outputs: Outputs, out_json: Option<&PathBuf>, summary: &Value) -> Result<Option<String>, CliError> {
    let text = render(summary);
    let stdout = match out_json {
        Some(path) => {
            outputs.push((path.clone(), text.into_bytes()));
            None
        }
        None => Some(text),
    };
    write_all_atomic(&outputs)?;
    Ok(stdout)
}

fn check_finite(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be finite, got {v}")))
    }
}

fn check_positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(usage(format!("--{name} must be positive and finite, got {v}")))
    }
}

fn check_n(n: usize) -> Result<(), CliError> {
    if n < 3 {
        return Err(usage(format!("--n must be at least 3, got {n}")));
    }
    Ok(())
}

/// Output times from `a` towards `b` every `dt`, always ending at `b`.
fn output_grid(a: f64, b: f64, dt: f64) -> Vec<f64> {
    let dir = (b - a).signum();
    let steps = ((b - a).abs() / dt * (1.0 + 1e-12)).floor() as usize;
    let mut ts: Vec<f64> = (0..=steps).map(|i| a + dir * i as f64 * dt).collect();
    if let Some(&last) = ts.last() {
        if (last - b).abs() <= 1e-9 * dt {
            ts.pop();
        }
    }
    ts.push(b);
    ts
}

fn solver_options(s: &SolverArgs, span: Span) -> Result<IntegrateOptions, CliError> {
    check_positive("rtol", s.rtol)?;
    check_positive("atol", s.atol)?;
    check_positive("blowup-threshold", s.blowup_threshold)?;
    if s.max_steps == 0 {
        return Err(usage("--max-steps must be at least 1"));
    }
    let t_eval = match s.dt {
        Some(dt) => {
            check_positive("dt", dt)?;
            Some(output_grid(span.0, span.1, dt))
        }
        None => None,
    };
    Ok(IntegrateOptions {
        tolerances: Tolerances {
            rel: s.rtol,
            abs: s.atol,
        },
        blowup_threshold: s.blowup_threshold,
        max_steps: s.max_steps,
        t_eval,
        ..Default::default()
    })
}

fn state_csv(header: &[String], result: &IntegrationResult, width: usize) -> Result<Vec<u8>, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(crate::Error::from)?;
    for s in &result.samples {
        let mut row = vec![fmt_f64(s.t)];
        row.extend(s.y[..width].iter().map(|v| fmt_f64(*v)));
        w.write_record(&row).map_err(crate::Error::from)?;
    }
    w.into_inner()
        .map_err(|e| CliError::Io(e.into_error().to_string()))
}

fn termination_json(result: &IntegrationResult) -> Value {
    json!({
        "terminationReason": result.termination.as_str(),
        "blowupEstimate": result.blowup_estimate,
        "thresholdCrossing": result.threshold_crossing,
        "acceptedSteps": result.accepted_steps,
        "rejectedSteps": result.rejected_steps,
    })
}

fn merge(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

fn numeric_failure(result: &IntegrationResult) -> Option<CliError> {
    match result.termination {
        Termination::StepUnderflow | Termination::StepLimit => Some(CliError::Numeric(format!(
            "integration stopped at t = {} ({}) without blow-up",
            result.last().t,
            result.termination.as_str()
        ))),
        _ => None,
    }
}

fn finish(
    outputs: Outputs,
    out_json: Option<&PathBuf>,
    summary: &Value,
    result: &IntegrationResult,
) -> Result<Option<String>, CliError> {
    let stdout = emit(outputs, out_json, summary)?;
    if let Some(err) = numeric_failure(result) {
        if let Some(text) = stdout {
            print!("{text}");
        }
        return Err(err);
    }
    Ok(stdout)
}

pub fn integrate_flat(a: &IntegrateFlatArgs) -> Result<Option<String>, CliError> {
    check_n(a.n)?;
    if a.u.len() != a.n - 1 {
        return Err(usage(format!(
            "--u needs {} components for n = {}, got {}",
            a.n - 1,
            a.n,
            a.u.len()
        )));
    }
    check_finite("lambda", a.lambda)?;
    check_finite("u0", a.u0)?;
    check_finite("f0", a.f0)?;
    if a.u.iter().any(|v| !v.is_finite()) {
        return Err(usage("--u components must be finite"));
    }
    let h0 = if a.h0.is_empty() {
        vec![1.0; a.n - 1]
    } else {
        a.h0.clone()
    };
    if h0.len() != a.n - 1 || h0.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(usage(format!(
            "--h0 needs {} positive finite components",
            a.n - 1
        )));
    }
    let opts = solver_options(&a.solver, a.span)?;
    let convention = CoefficientConvention::from(a.convention);

    let initial = FlatSolitonState::new(a.span.0, a.u0, a.u.clone());
    let traj = flat::integrate(&initial, a.lambda, a.n, convention, a.span.1, &opts)?;
    let profile = reconstruct(&traj, &h0, a.f0)?;
    let hamilton = hamilton_monitor(&profile)?;
    let quadratic_drift = (a.lambda == 0.0).then(|| {
        let q: Vec<f64> = traj.states().iter().map(|s| s.quadratic_integral()).collect();
        q.iter().fold(0.0_f64, |m, v| m.max((v - q[0]).abs()))
    });
    let last = traj.last_state();

    let mut outputs = Outputs::new();
    if let Some(path) = &a.output.out_csv {
        let mut header = vec!["t".to_string(), "u0".to_string()];
        header.extend((1..a.n).map(|i| format!("u{i}")));
        outputs.push((path.clone(), state_csv(&header, &traj.result, a.n)?));
    }
    if let Some(base) = &a.output.profile_out {
        let (csv_path, json_path) = profile_io::profile_paths(base);
        let (csv, header) = profile_io::encode_diagonal(&profile)?;
        outputs.push((csv_path, csv));
        outputs.push((json_path, header));
    }
    let summary = merge(
        json!({
            "schemaVersion": SCHEMA_VERSION,
            "command": "integrate-flat",
            "n": a.n,
            "lambda": a.lambda,
            "convention": convention.as_str(),
            "span": [a.span.0, a.span.1],
            "samples": traj.len(),
            "conservedDrift": hamilton.hamilton_drift,
            "hamiltonConstant": hamilton.hamilton_value(),
            "quadraticIntegralDrift": quadratic_drift,
            "final": { "t": last.t, "u0": last.u0, "u": last.u },
        }),
        termination_json(&traj.result),
    );
    finish(outputs, a.output.out_json.as_ref(), &summary, &traj.result)
}

pub fn integrate_warped(a: &IntegrateWarpedArgs) -> Result<Option<String>, CliError> {
    check_n(a.n)?;
    for (name, v) in [
        ("mu", a.mu),
        ("lambda", a.lambda),
        ("w", a.w),
        ("u0", a.u0),
        ("f0", a.f0),
    ] {
        check_finite(name, v)?;
    }
    check_positive("warp", a.warp)?;
    let opts = solver_options(&a.solver, a.span)?;
    let initial = WarpedSolitonState {
        t: a.span.0,
        warp: a.warp,
        w: a.w,
        u0: a.u0,
    };
    let traj = warped::integrate_warped(&initial, a.n, a.mu, a.lambda, a.span.1, &opts)?;
    let profile = warped_to_profile(&traj, a.f0)?;
    let hamilton = hamilton_monitor(&profile)?;

    let mut outputs = Outputs::new();
    if let Some(path) = &a.output.out_csv {
        let header = ["t", "F", "w", "u0"].map(String::from);
        outputs.push((path.clone(), state_csv(&header, &traj.result, 3)?));
    }
    if let Some(base) = &a.output.profile_out {
        let (csv_path, json_path) = profile_io::profile_paths(base);
        let (csv, header) = profile_io::encode_warped(&profile)?;
        outputs.push((csv_path, csv));
        outputs.push((json_path, header));
    }
    let last = traj.result.last();
    let summary = merge(
        json!({
            "schemaVersion": SCHEMA_VERSION,
            "command": "integrate-warped",
            "n": a.n,
            "mu": a.mu,
            "lambda": a.lambda,
            "span": [a.span.0, a.span.1],
            "samples": traj.result.samples.len(),
            "conservedDrift": hamilton.hamilton_drift,
            "hamiltonConstant": hamilton.hamilton_value(),
            "final": { "t": last.t, "F": last.y[0], "w": last.y[1], "u0": last.y[2] },
        }),
        termination_json(&traj.result),
    );
    finish(outputs, a.output.out_json.as_ref(), &summary, &traj.result)
}

/// Up to ten units either side of `t0`, pulled 5% inside any finite pole.
fn default_window(sol: &ClosedFormSteady) -> GridSpec {
    let (lo, hi) = sol.domain;
    let mut a = lo.max(sol.t0 - 10.0);
    let mut b = hi.min(sol.t0 + 10.0);
    let width = b - a;
    if lo.is_finite() && a == lo {
        a += 0.05 * width;
    }
    if hi.is_finite() && b == hi {
        b -= 0.05 * width;
    }
    GridSpec(a, b, 1000)
}

fn opt_finite(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else {
        Value::Null
    }
}

pub fn closed_form(a: &ClosedFormArgs) -> Result<Option<String>, CliError> {
    let n = a.u.len() + 1;
    check_n(n).map_err(|_| usage("--u needs at least 2 components"))?;
    check_finite("u0", a.u0)?;
    check_finite("t0", a.t0)?;
    if a.u.iter().any(|v| !v.is_finite()) {
        return Err(usage("--u components must be finite"));
    }
    let red = reduce(&FlatSolitonState::new(a.t0, a.u0, a.u.clone()));
    let sol = if a.paper_verbatim {
        solve_riccati_literal_case3(&red, a.t0)?
    } else {
        solve_riccati(&red, a.t0)?
    };
    let window = a.grid.unwrap_or_else(|| default_window(&sol));
    let grid = window.points();
    let residuals = residual_closed_form(&sol, &red, &grid)?;

    let mut outputs = Outputs::new();
    if let Some(base) = &a.profile_out {
        let profile = sol.profile(grid.clone(), &vec![1.0; n - 1], 0.0)?;
        let (csv_path, json_path) = profile_io::profile_paths(base);
        let (csv, header) = profile_io::encode_diagonal(&profile)?;
        outputs.push((csv_path, csv));
        outputs.push((json_path, header));
    }
    let summary = json!({
        "schemaVersion": SCHEMA_VERSION,
        "command": "closed-form",
        "paperVerbatim": a.paper_verbatim,
        "caseTag": sol.case_tag,
        "constants": sol.branch,
        "signChoice": sol.sign_choice,
        "t0": a.t0,
        "domain": { "start": opt_finite(sol.domain.0), "end": opt_finite(sol.domain.1) },
        "blowup": { "forward": blowup_time(&sol, 1), "backward": blowup_time(&sol, -1) },
        "reduction": red,
        "grid": { "start": window.0, "end": window.1, "points": window.2 },
        "residuals": residuals,
        "maxResidual": residuals.max(),
    });
    emit(outputs, a.out_json.as_ref(), &summary)
}

fn scan_threads() -> Result<usize, CliError> {
    match std::env::var("SOLITON_LAB_THREADS") {
        Err(_) => Ok(0),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k >= 1 => Ok(k),
            _ => Err(usage(format!(
                "SOLITON_LAB_THREADS must be a positive integer, got {v:?}"
            ))),
        },
    }
}

pub fn scan_blowup(a: &ScanBlowupArgs) -> Result<Option<String>, CliError> {
    check_n(a.n)?;
    check_finite("lambda", a.lambda)?;
    check_positive("range", a.range)?;
    check_positive("span", a.span)?;
    check_positive("blowup-threshold", a.blowup_threshold)?;
    let threads = scan_threads()?;
    let convention = CoefficientConvention::from(a.convention);

    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let states: Vec<FlatSolitonState> = (0..a.samples)
        .map(|_| {
            let u0 = rng.gen_range(-a.range..=a.range);
            let u = (0..a.n - 1).map(|_| rng.gen_range(-a.range..=a.range)).collect();
            FlatSolitonState::new(0.0, u0, u)
        })
        .collect();
    let opts = IntegrateOptions {
        blowup_threshold: a.blowup_threshold,
        ..Default::default()
    };
    let one = |(index, s): (usize, &FlatSolitonState)| -> Result<Value, CliError> {
        let analytic = (a.lambda == 0.0)
            .then(|| solve_riccati(&reduce(s), 0.0).ok())
            .flatten();
        let mut entry = json!({ "index": index, "u0": s.u0, "u": s.u });
        for (key, t_end, dir) in [("forward", a.span, 1), ("backward", -a.span, -1)] {
            let traj = flat::integrate(s, a.lambda, a.n, convention, t_end, &opts)?;
            let mut side = json!({
                "terminationReason": traj.termination().as_str(),
                "blowupEstimate": traj.blowup_estimate(),
            });
            if let Some(sol) = &analytic {
                side["analyticBlowup"] = json!(blowup_time(sol, dir));
            }
            entry[key] = side;
        }
        if a.lambda == 0.0 {
            let red = reduce(s);
            entry["caseTag"] = json!(red.case_tag());
            entry["riccatiConstant"] = json!(red.c());
        }
        Ok(entry)
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Numeric(format!("cannot start worker pool: {e}")))?;
    let entries: Vec<Value> = pool.install(|| {
        states
            .par_iter()
            .enumerate()
            .map(one)
            .collect::<Result<Vec<_>, _>>()
    })?;
    let blown = entries
        .iter()
        .filter(|e| {
            ["forward", "backward"]
                .iter()
                .any(|k| e[*k]["terminationReason"] == Termination::BlowUpDetected.as_str())
        })
        .count();
    let summary = json!({
        "schemaVersion": SCHEMA_VERSION,
        "command": "scan-blowup",
        "n": a.n,
        "lambda": a.lambda,
        "convention": convention.as_str(),
        "seed": a.seed,
        "range": a.range,
        "span": a.span,
        "blowupThreshold": a.blowup_threshold,
        "samples": entries,
        "samplesWithBlowup": blown,
    });
    emit(Outputs::new(), a.out_json.as_ref(), &summary)
}

pub fn bryant(a: &BryantArgs) -> Result<Option<String>, CliError> {
    check_n(a.n)?;
    check_positive("dt", a.dt)?;
    check_positive("rtol", a.rtol)?;
    check_positive("atol", a.atol)?;
    let start = bryant_series_start(a.n, a.epsilon)?;
    if !(a.t_end > a.epsilon && a.t_end.is_finite()) {
        return Err(usage(format!(
            "--t-end must exceed epsilon = {}, got {}",
            a.epsilon, a.t_end
        )));
    }
    let mut grid = vec![a.epsilon];
    grid.extend(
        output_grid(0.0, a.t_end, a.dt)
            .into_iter()
            .filter(|&t| t > a.epsilon),
    );
    let opts = IntegrateOptions {
        tolerances: Tolerances {
            rel: a.rtol,
            abs: a.atol,
        },
        t_eval: Some(grid),
        ..Default::default()
    };
    let mu = (a.n - 2) as f64;
    let traj = warped::integrate_warped(&start, a.n, mu, 0.0, a.t_end, &opts)?;
    let profile = warped_to_profile(&traj, 0.0)?;
    let residual = warped_soliton_residual(&profile)?;
    let hamilton = hamilton_monitor(&profile)?;
    let window_start = BRYANT_WINDOW_FACTOR * a.epsilon;
    let first = profile.grid.partition_point(|&t| t < window_start);
    let elliptic = if profile.len() - first >= 5 {
        elliptic_monitor(&profile.slice(first..profile.len()))?.elliptic_residual
    } else {
        None
    };
    let scalar = (0..profile.len())
        .map(|i| curvature_warped(&profile, i).map(|k| k.scalar))
        .collect::<crate::Result<Vec<f64>>>()?;

    let mut outputs = Outputs::new();
    if let Some(path) = &a.output.out_csv {
        let header = ["t", "F", "w", "u0"].map(String::from);
        outputs.push((path.clone(), state_csv(&header, &traj.result, 3)?));
    }
    if let Some(base) = &a.output.profile_out {
        let (csv_path, json_path) = profile_io::profile_paths(base);
        let (csv, header) = profile_io::encode_warped(&profile)?;
        outputs.push((csv_path, csv));
        outputs.push((json_path, header));
    }
    let last = traj.result.last();
    let summary = merge(
        json!({
            "schemaVersion": SCHEMA_VERSION,
            "command": "bryant",
            "n": a.n,
            "mu": mu,
            "epsilon": a.epsilon,
            "tEnd": a.t_end,
            "samples": profile.len(),
            "solitonResidual": residual.max_abs,
            "hamiltonDrift": hamilton.hamilton_drift,
            "ellipticResidual": elliptic,
            "ellipticWindowStart": window_start,
            "scalarPositive": scalar.iter().all(|&s| s > 0.0),
            "scalarNonincreasing": scalar.windows(2).all(|w| w[1] <= w[0]),
            "scalarStart": scalar.first(),
            "scalarEnd": scalar.last(),
            "final": { "t": last.t, "F": last.y[0], "w": last.y[1], "u0": last.y[2] },
        }),
        termination_json(&traj.result),
    );
    finish(outputs, a.output.out_json.as_ref(), &summary, &traj.result)
}

pub fn verify(a: &VerifyArgs) -> Result<Option<String>, CliError> {
    if !(a.gate >= 0.0) {
        return Err(usage(format!("--gate must be non-negative, got {}", a.gate)));
    }
    let profile = profile_io::read_profile(&a.profile)?;
    let (report, soliton) = match &profile {
        Profile::Diagonal(p) => (
            identities::verify(p)?,
            flat::soliton_residual(p)?.max_abs,
        ),
        Profile::Warped(p) => (identities::verify(p)?, warped_soliton_residual(p)?.max_abs),
    };
    let worst = report.worst();
    let pass = worst <= a.gate;
    let q = &report.hamilton_constant;
    let mut details = serde_json::to_value(&report).map_err(crate::Error::from)?;
    if let Some(map) = details.as_object_mut() {
        map.remove("hamiltonConstant");
    }
    let summary = merge(
        json!({
            "schemaVersion": SCHEMA_VERSION,
            "command": "verify",
            "gate": a.gate,
            "pass": pass,
            "solitonResidual": soliton,
            "samples": q.len(),
            "hamiltonValue": report.hamilton_value(),
            "hamiltonRange": [
                q.iter().copied().fold(f64::INFINITY, f64::min),
                q.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            ],
        }),
        details,
    );
    let stdout = emit(Outputs::new(), a.out_json.as_ref(), &summary)?;
    if pass {
        Ok(stdout)
    } else {
        Err(CliError::Gate(stdout.unwrap_or_default()))
    }
}

pub fn dims(a: &DimsArgs) -> Result<Option<String>, CliError> {
    if let Some(n_max) = a.table {
        if n_max > MAX_TABLE_ROWS {
            return Err(usage(format!("--table is limited to {MAX_TABLE_ROWS}")));
        }
        let rows = bound_table(n_max)?;
        return Ok(Some(match a.format {
            Format::Json => render(&json!({
                "schemaVersion": SCHEMA_VERSION,
                "command": "dims",
                "table": rows,
            })),
            Format::Text => {
                let mut out = format!(
                    "{:>8} {:>12} {:>12} {:>12}\n",
                    "n", "kobayashi", "solitonMax", "gapCeiling"
                );
                for r in rows {
                    out.push_str(&format!(
                        "{:>8} {:>12} {:>12} {:>12}\n",
                        r.n, r.kobayashi, r.soliton_max, r.gap_ceiling
                    ));
                }
                out
            }
        }));
    }
    let (n, d) = match (a.n, a.d) {
        (Some(n), Some(d)) => (n, d),
        _ => return Err(usage("dims needs N and D, or --table N")),
    };
    let v = classify(n, d)?;
    Ok(Some(match a.format {
        Format::Json => {
            let mut value = serde_json::to_value(v).map_err(crate::Error::from)?;
            value["schemaVersion"] = json!(SCHEMA_VERSION);
            value["command"] = json!("dims");
            render(&value)
        }
        Format::Text => format!(
            "n={} d={} {} (kobayashi {}, solitonMax {}, gapCeiling {})\n",
            v.n, v.d, v.verdict, v.bounds.kobayashi, v.bounds.soliton_max, v.bounds.gap_ceiling
        ),
    }))
}
