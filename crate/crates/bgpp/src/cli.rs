//! Command-line front end.
//!
//! Four subcommands cover the workflows the library supports:
//!
//! * `simulate` integrates one flow (full, reduced, or Eguchi-Hanson) and
//!   writes a sample table with the conserved quantities and their drift.
//! * `verify` runs the seeded verification suite and writes a JSON report;
//!   the exit code says whether every selected check passed.
//! * `tau-table` tabulates the reparametrised time over a radial grid; in
//!   Eguchi-Hanson mode the closed form and its deviation from quadrature
//!   come along as extra columns.
//! * `eh` analyses one Eguchi-Hanson level set: discriminant, turning
//!   points, interlacing, rotor rate.
//!
//! Exit codes: 0 success, 1 failed verification checks, 2 usage error
//! (including inadmissible initial data), 3 runtime failure inside
//! integration or quadrature.
//!
//! Tables open with `#` metadata lines echoing the parameters, seed and
//! tolerances. Every number is printed with 17 significant digits, so a
//! rerun with the same flags and seed reproduces the output byte for byte.

use crate::eguchi_hanson::{
    eh_discriminant, eh_levels_from_state, eh_roots, eh_tau_closed, eh_tau_degenerate,
    eh_tau_quadrature, EhLevels, EhState,
};
use crate::error::Error;
use crate::full_flow::{integrals, MixedState};
use crate::integrate::{integrate_flow, FlowSpec, IntegratorConfig};
use crate::metric::{validate_params, MetricParams};
use crate::reduced_flow::{levels_from_state, tau_of_t, LevelSet, ReducedState};
use crate::verify::{
    verify_analytic_vs_numeric, verify_bracket_suite, verify_conservation,
    verify_eh_limit_consistency, verify_eh_roots, verify_eh_tau_agreement, verify_multicentre,
    verify_radial_identity, DEFAULT_SEED,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use serde_json::{json, Map, Value};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::PathBuf;

/// Parse the process arguments and run; returns the exit code.
pub fn run_from_env() -> i32 {
    run(std::env::args_os())
}

/// Run the command line on explicit arguments (first entry is the program
/// name). Returns the exit code instead of exiting, so tests can drive it.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.exit_code() == 0 { 0 } else { 2 };
        }
    };
    let outcome = match cli.command {
        Cmd::Simulate(args) => cmd_simulate(args),
        Cmd::Verify(args) => cmd_verify(args),
        Cmd::TauTable(args) => cmd_tau_table(args),
        Cmd::Eh(args) => cmd_eh(args),
    };
    match outcome {
        Ok(code) => code,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

#[derive(Parser)]
#[command(
    name = "bgpp",
    version,
    about = "Geodesic flow of the triaxial Bianchi-IX gravitational instantons"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate a flow and write a trajectory table.
    Simulate(SimulateArgs),
    /// Run the seeded verification suite and write a JSON report.
    Verify(VerifyArgs),
    /// Tabulate the reparametrised time tau over a radial grid.
    TauTable(TauTableArgs),
    /// Analyse an Eguchi-Hanson level set.
    Eh(EhArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FlowKind {
    Full,
    Reduced,
    Eh,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct SimulateArgs {
    /// Which flow to integrate.
    #[arg(long, value_enum)]
    flow: FlowKind,
    /// Metric parameters t1,t2,t3 (full and reduced flows).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    params: Option<Vec<f64>>,
    /// Bolt radius squared (eh flow).
    #[arg(long)]
    gamma2: Option<f64>,
    /// Initial state: t,P_t,M1,M2,M3,phi,theta,psi (full);
    /// t,P_t,M1,M2,M3 (reduced); rho,P_rho,M1,M2,M3 (eh).
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    state: Vec<f64>,
    /// Affine-parameter window a,b (default 0,10). Equal ends emit the
    /// initial sample alone.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    span: Option<Vec<f64>>,
    /// Number of evenly spaced output samples.
    #[arg(long, default_value_t = 201)]
    samples: usize,
    /// Relative step-error tolerance.
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    /// Absolute step-error tolerance.
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
    /// Table format: csv or json (JSON lines).
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed echoed into the metadata (simulate itself draws nothing).
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct VerifyArgs {
    /// Metric parameters t1,t2,t3 (default 0,1,2).
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    params: Option<Vec<f64>>,
    /// Bolt radius squared for the Eguchi-Hanson checks.
    #[arg(long, default_value_t = 1.0)]
    gamma2: f64,
    /// Comma list restricting the report: brackets, conservation, radial,
    /// analytic, multicentre, eh. Default: all.
    #[arg(long, value_delimiter = ',')]
    checks: Option<Vec<String>>,
    /// Relative step-error tolerance for the integrations.
    #[arg(long, default_value_t = 1e-10)]
    rel_tol: f64,
    /// Absolute step-error tolerance for the integrations.
    #[arg(long, default_value_t = 1e-12)]
    abs_tol: f64,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed for the state and level samplers.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct TauTableArgs {
    /// Metric parameters t1,t2,t3: tabulate tau(t) for a generic level set.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    params: Option<Vec<f64>>,
    /// Bolt radius squared: tabulate tau(rho) in the Eguchi-Hanson limit.
    #[arg(long)]
    gamma2: Option<f64>,
    /// Level set: e,m2,n2 with --params, or e,m3,mu2 with --gamma2.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    levels: Vec<f64>,
    /// Radial grid lo,hi,n: n evenly spaced points from lo to hi.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    grid: Vec<f64>,
    /// Table format: csv or json (JSON lines).
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed echoed into the metadata (the table draws nothing).
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct EhArgs {
    /// Bolt radius squared.
    #[arg(long)]
    gamma2: f64,
    /// Level set e,m3,mu2.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        required = true
    )]
    levels: Vec<f64>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed echoed into the report.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

/// Failure carrying the process exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn runtime(err: Error) -> Failure {
    Failure {
        code: 3,
        message: err.to_string(),
    }
}

/// 17-significant-digit decimal; round-trips to the same f64.
fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_params(params: &Option<Vec<f64>>) -> Result<MetricParams, Failure> {
    let p = params
        .as_ref()
        .ok_or_else(|| usage("--params t1,t2,t3 is required for this mode"))?;
    if p.len() != 3 {
        return Err(usage(format!(
            "--params takes three comma-separated values, got {}",
            p.len()
        )));
    }
    validate_params(p[0], p[1], p[2], PARAM_DEGENERACY_TOL).map_err(|e| usage(e.to_string()))
}

fn parse_span(span: &Option<Vec<f64>>) -> Result<(f64, f64), Failure> {
    match span {
        None => Ok((0.0, 10.0)),
        Some(s) if s.len() == 2 => {
            if !s[0].is_finite() || !s[1].is_finite() || s[1] < s[0] {
                Err(usage("--span needs finite a,b with b >= a"))
            } else {
                Ok((s[0], s[1]))
            }
        }
        Some(s) => Err(usage(format!(
            "--span takes two comma-separated values, got {}",
            s.len()
        ))),
    }
}

fn integrator_config(rel_tol: f64, abs_tol: f64) -> Result<IntegratorConfig, Failure> {
    // NaN must fail this gate as well, hence the negated comparisons.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(rel_tol > 0.0) || !(abs_tol > 0.0) {
        return Err(usage("tolerances must be positive"));
    }
    Ok(IntegratorConfig {
        rel_tol,
        abs_tol,
        ..Default::default()
    })
}

/// Plain-text table with `#` metadata, rendered as CSV or JSON lines.
struct Table {
    meta: Vec<(&'static str, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_jsonl(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.meta {
            let _ = writeln!(out, "# {key} = {value}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|&x| fmt_f(x)).collect();
            let _ = writeln!(out, "{}", line.join(","));
        }
        out
    }

    fn render_jsonl(&self) -> String {
        let mut out = String::new();
        let mut meta = Map::new();
        for (key, value) in &self.meta {
            meta.insert((*key).to_string(), Value::String(value.clone()));
        }
        let _ = writeln!(out, "{}", Value::Object(meta));
        for row in &self.rows {
            let fields: Vec<String> = self
                .columns
                .iter()
                .zip(row)
                .map(|(c, &x)| format!("\"{c}\":{}", fmt_f(x)))
                .collect();
            let _ = writeln!(out, "{{{}}}", fields.join(","));
        }
        out
    }
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure {
            code: 3,
            message: format!("cannot write {}: {e}", path.display()),
        }),
        None => {
            // Write without the panicking print! path: a closed pipe on
            // stdout (head, less quitting early) is normal termination.
            use std::io::Write;
            match std::io::stdout().write_all(text.as_bytes()) {
                Ok(()) => Ok(()),
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
                Err(e) => Err(Failure {
                    code: 3,
                    message: format!("cannot write stdout: {e}"),
                }),
            }
        }
    }
}

fn join_floats(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|&x| fmt_f(x)).collect();
    parts.join(",")
}

// ---------------------------------------------------------------- simulate

fn cmd_simulate(args: SimulateArgs) -> Result<i32, Failure> {
    let span = parse_span(&args.span)?;
    let config = integrator_config(args.rel_tol, args.abs_tol)?;
    if args.samples < 1 {
        return Err(usage("--samples must be at least 1"));
    }

    let spec = build_spec(&args)?;
    let mut meta: Vec<(&'static str, String)> = vec![("command", "simulate".into())];
    match &spec {
        FlowSpec::Full { params, .. } | FlowSpec::Reduced { params, .. } => {
            let flow = if matches!(spec, FlowSpec::Full { .. }) {
                "full"
            } else {
                "reduced"
            };
            meta.push(("flow", flow.into()));
            meta.push(("params", join_floats(&params.t_raw())));
        }
        FlowSpec::Eh { gamma2, .. } => {
            meta.push(("flow", "eh".into()));
            meta.push(("gamma2", fmt_f(*gamma2)));
        }
    }
    meta.push(("state", join_floats(&args.state)));
    meta.push(("span", join_floats(&[span.0, span.1])));
    meta.push(("samples", args.samples.to_string()));
    meta.push(("rel_tol", fmt_f(args.rel_tol)));
    meta.push(("abs_tol", fmt_f(args.abs_tol)));
    meta.push(("seed", args.seed.to_string()));

    let (columns, lambda, rows) = if span.0 == span.1 {
        // Degenerate window: the initial sample alone.
        let (columns, state_row) = initial_row(&spec);
        (columns, vec![span.0], vec![state_row])
    } else {
        let run = integrate_flow(&spec, span, args.samples.max(2), &config).map_err(runtime)?;
        (run.columns, run.lambda, run.rows)
    };

    let (integral_names, eval) = integral_evaluator(&spec);
    let mut header: Vec<String> = vec!["lambda".into()];
    header.extend(columns.iter().map(|c| c.to_string()));
    for name in &integral_names {
        header.push(name.clone());
    }
    for name in &integral_names {
        header.push(format!("drift_{name}"));
    }

    let mut table_rows = Vec::with_capacity(rows.len());
    let mut initial_values: Option<Vec<f64>> = None;
    for (k, row) in rows.iter().enumerate() {
        let values = eval(row).map_err(runtime)?;
        let reference = initial_values.get_or_insert_with(|| values.clone());
        let mut out_row = Vec::with_capacity(header.len());
        out_row.push(lambda[k]);
        out_row.extend_from_slice(row);
        out_row.extend_from_slice(&values);
        for (v, r) in values.iter().zip(reference.iter()) {
            out_row.push(v - r);
        }
        table_rows.push(out_row);
    }

    let table = Table {
        meta,
        columns: header,
        rows: table_rows,
    };
    emit(&table.render(args.format), &args.out)?;
    Ok(0)
}

/// Build the flow specification, validating the initial data (exit 2 when it
/// is inadmissible: wrong arity, radial coordinate at or below the domain
/// edge, and so on).
fn build_spec(args: &SimulateArgs) -> Result<FlowSpec, Failure> {
    match args.flow {
        FlowKind::Full => {
            if args.gamma2.is_some() {
                return Err(usage("--gamma2 applies to the eh flow only"));
            }
            let params = parse_params(&args.params)?;
            if args.state.len() != 8 {
                return Err(usage(format!(
                    "full flow takes --state t,P_t,M1,M2,M3,phi,theta,psi (8 values), got {}",
                    args.state.len()
                )));
            }
            let s = &args.state;
            let state = MixedState {
                t: s[0],
                p_t: s[1],
                m: [s[2], s[3], s[4]],
                phi: s[5],
                theta: s[6],
                psi: s[7],
            };
            integrals(&params, &state).map_err(|e| usage(e.to_string()))?;
            Ok(FlowSpec::Full { params, state })
        }
        FlowKind::Reduced => {
            if args.gamma2.is_some() {
                return Err(usage("--gamma2 applies to the eh flow only"));
            }
            let params = parse_params(&args.params)?;
            if args.state.len() != 5 {
                return Err(usage(format!(
                    "reduced flow takes --state t,P_t,M1,M2,M3 (5 values), got {}",
                    args.state.len()
                )));
            }
            let s = &args.state;
            let state = ReducedState {
                t: s[0],
                p_t: s[1],
                m: [s[2], s[3], s[4]],
            };
            levels_from_state(&params, &state).map_err(|e| usage(e.to_string()))?;
            Ok(FlowSpec::Reduced { params, state })
        }
        FlowKind::Eh => {
            if args.params.is_some() {
                return Err(usage("--params applies to the full and reduced flows"));
            }
            let gamma2 = args
                .gamma2
                .ok_or_else(|| usage("--gamma2 is required for the eh flow"))?;
            if args.state.len() != 5 {
                return Err(usage(format!(
                    "eh flow takes --state rho,P_rho,M1,M2,M3 (5 values), got {}",
                    args.state.len()
                )));
            }
            let s = &args.state;
            let state = EhState {
                rho: s[0],
                p_rho: s[1],
                m: [s[2], s[3], s[4]],
            };
            eh_levels_from_state(gamma2, &state).map_err(|e| usage(e.to_string()))?;
            Ok(FlowSpec::Eh { gamma2, state })
        }
    }
}

/// State column names and the initial state row for a zero-length window.
fn initial_row(spec: &FlowSpec) -> (Vec<&'static str>, Vec<f64>) {
    match spec {
        FlowSpec::Full { state, .. } => (
            vec!["t", "P_t", "M1", "M2", "M3", "phi", "theta", "psi"],
            state.to_vector().iter().copied().collect(),
        ),
        FlowSpec::Reduced { state, .. } => (
            vec!["t", "P_t", "M1", "M2", "M3"],
            state.to_vector().iter().copied().collect(),
        ),
        FlowSpec::Eh { state, .. } => (
            vec!["rho", "P_rho", "M1", "M2", "M3"],
            state.to_vector().iter().copied().collect(),
        ),
    }
}

type RowEval<'a> = Box<dyn Fn(&[f64]) -> crate::error::Result<Vec<f64>> + 'a>;

/// Names of the conserved quantities of a flow and an evaluator mapping a
/// state row to their values.
fn integral_evaluator(spec: &FlowSpec) -> (Vec<String>, RowEval<'_>) {
    match spec {
        FlowSpec::Full { params, .. } => (
            vec!["H".into(), "P_phi".into(), "m2".into(), "n2".into()],
            Box::new(move |row: &[f64]| {
                let state = MixedState {
                    t: row[0],
                    p_t: row[1],
                    m: [row[2], row[3], row[4]],
                    phi: row[5],
                    theta: row[6],
                    psi: row[7],
                };
                let v = integrals(params, &state)?;
                Ok(vec![v.h, v.p_phi, v.m2, v.n2])
            }),
        ),
        FlowSpec::Reduced { params, .. } => (
            vec!["H".into(), "m2".into(), "n2".into()],
            Box::new(move |row: &[f64]| {
                let state = ReducedState {
                    t: row[0],
                    p_t: row[1],
                    m: [row[2], row[3], row[4]],
                };
                let v = levels_from_state(params, &state)?;
                Ok(vec![v.e, v.m2, v.n2])
            }),
        ),
        FlowSpec::Eh { gamma2, .. } => (
            vec!["H".into(), "m3".into(), "mu2".into()],
            Box::new(move |row: &[f64]| {
                let state = EhState {
                    rho: row[0],
                    p_rho: row[1],
                    m: [row[2], row[3], row[4]],
                };
                let v = eh_levels_from_state(*gamma2, &state)?;
                Ok(vec![v.e, v.m3, v.mu2])
            }),
        ),
    }
}

// ------------------------------------------------------------------ verify

const ALL_CHECKS: [&str; 6] = [
    "brackets",
    "conservation",
    "radial",
    "analytic",
    "multicentre",
    "eh",
];

fn cmd_verify(args: VerifyArgs) -> Result<i32, Failure> {
    let params = match &args.params {
        Some(_) => parse_params(&args.params)?,
        None => validate_params(0.0, 1.0, 2.0, PARAM_DEGENERACY_TOL)
            .map_err(|e| usage(e.to_string()))?,
    };
    if !(args.gamma2.is_finite() && args.gamma2 > 0.0) {
        return Err(usage("--gamma2 must be positive"));
    }
    let config = integrator_config(args.rel_tol, args.abs_tol)?;
    let selected: Vec<String> = match &args.checks {
        None => ALL_CHECKS.iter().map(|s| s.to_string()).collect(),
        Some(list) => {
            for name in list {
                if !ALL_CHECKS.contains(&name.as_str()) {
                    return Err(usage(format!(
                        "unknown check '{name}'; expected one of {}",
                        ALL_CHECKS.join(", ")
                    )));
                }
            }
            list.clone()
        }
    };

    let mut checks = Map::new();
    let mut all_pass = true;
    for name in &selected {
        let section = run_check(name, &params, args.gamma2, args.seed, &config)?;
        if section["pass"] != Value::Bool(true) {
            all_pass = false;
        }
        checks.insert(name.clone(), section);
    }

    let report = json!({
        "command": "verify",
        "seed": args.seed,
        "params": params.t_raw().to_vec(),
        "gamma2": args.gamma2,
        "rel_tol": args.rel_tol,
        "abs_tol": args.abs_tol,
        "checks": Value::Object(checks),
        "all_pass": all_pass,
    });
    let mut text = serde_json::to_string_pretty(&report).expect("report serialises");
    text.push('\n');
    emit(&text, &args.out)?;
    Ok(if all_pass { 0 } else { 1 })
}

fn run_check(
    name: &str,
    params: &MetricParams,
    gamma2: f64,
    seed: u64,
    config: &IntegratorConfig,
) -> Result<Value, Failure> {
    match name {
        "brackets" => {
            let r = verify_bracket_suite(params, 100, seed).map_err(runtime)?;
            let pass = r.full_max_bracket <= BRACKET_TOL
                && r.full_jacobi_max <= JACOBI_TOL
                && r.full_min_rank_ratio > RANK_RATIO_MIN
                && r.reduced_max_bracket <= BRACKET_TOL
                && r.reduced_casimir_max == 0.0
                && r.reduced_min_rank_ratio > RANK_RATIO_MIN
                && r.reduced_tensor_rank == 4;
            Ok(json!({
                "n_states": r.n_states,
                "full_max_bracket": r.full_max_bracket,
                "full_jacobi_max": r.full_jacobi_max,
                "full_min_rank_ratio": r.full_min_rank_ratio,
                "reduced_max_bracket": r.reduced_max_bracket,
                "reduced_casimir_max": r.reduced_casimir_max,
                "reduced_min_rank_ratio": r.reduced_min_rank_ratio,
                "reduced_tensor_rank": r.reduced_tensor_rank,
                "bracket_tolerance": BRACKET_TOL,
                "jacobi_tolerance": JACOBI_TOL,
                "rank_ratio_min": RANK_RATIO_MIN,
                "pass": pass,
            }))
        }
        "conservation" => {
            let r = verify_conservation(params, 20, (0.0, 10.0), config, seed).map_err(runtime)?;
            let pass = r.full_worst_drift <= DRIFT_TOL && r.reduced_worst_drift <= DRIFT_TOL;
            Ok(json!({
                "n_trajectories": r.n_trajectories,
                "span": [r.span.0, r.span.1],
                "full_worst_drift": r.full_worst_drift,
                "reduced_worst_drift": r.reduced_worst_drift,
                "drift_tolerance": DRIFT_TOL,
                "pass": pass,
            }))
        }
        "radial" => {
            // The identity is checked against the levels of the initial
            // state, so transport has to be tighter than the defect bound.
            let tight = IntegratorConfig {
                rel_tol: 1e-12,
                abs_tol: 1e-14,
                ..Default::default()
            };
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut worst = 0.0_f64;
            for _ in 0..5 {
                let state = crate::verify::sample_reduced_state(params, &mut rng);
                let defect = verify_radial_identity(params, &state, (0.0, 5.0), 101, &tight)
                    .map_err(runtime)?;
                worst = worst.max(defect);
            }
            let pass = worst <= RADIAL_TOL;
            Ok(json!({
                "n_trajectories": 5,
                "max_relative_defect": worst,
                "defect_tolerance": RADIAL_TOL,
                "pass": pass,
            }))
        }
        "analytic" => {
            let mut sections = Map::new();
            let mut pass = true;
            for (label, m0) in [
                ("case_i", [0.3, 0.4, 1.2]),
                ("case_ii", [1.2, 0.4, 0.3]),
                ("case_iii", [0.9, 0.4, 0.9]),
            ] {
                let t0 = params.t_max() + 1.0;
                let state = ReducedState {
                    t: t0,
                    p_t: 0.8,
                    m: m0,
                };
                let r = verify_analytic_vs_numeric(params, &state, (0.0, 4.0), 201, config)
                    .map_err(runtime)?;
                pass = pass && r.max_abs <= ANALYTIC_TOL;
                sections.insert(
                    label.to_string(),
                    json!({
                        "case": r.case.map(|c| format!("{c:?}")),
                        "max_abs": r.max_abs,
                        "n_branches": r.n_branches,
                    }),
                );
            }
            sections.insert("tolerance".into(), json!(ANALYTIC_TOL));
            sections.insert("pass".into(), Value::Bool(pass));
            Ok(Value::Object(sections))
        }
        "multicentre" => {
            let r = verify_multicentre(params, 50, 1e-5, seed).map_err(runtime)?;
            let pass = r.max_residual <= MULTICENTRE_TOL && r.observed_order >= ORDER_MIN;
            Ok(json!({
                "n_points": r.n_points,
                "h": r.h,
                "max_residual": r.max_residual,
                "observed_order": r.observed_order,
                "residual_tolerance": MULTICENTRE_TOL,
                "order_min": ORDER_MIN,
                "pass": pass,
            }))
        }
        "eh" => {
            let roots = verify_eh_roots(1000, seed).map_err(runtime)?;
            let tau = verify_eh_tau_agreement(20, seed).map_err(runtime)?;
            let chain = verify_eh_limit_consistency(gamma2, 0.0, 100, seed).map_err(runtime)?;
            let pass = roots.interlacing_failures == 0
                && roots.min_discriminant > 0.0
                && tau.max_relative_diff <= EH_TAU_TOL
                && tau.degenerate_max_relative_diff <= EH_TAU_TOL
                && chain <= EH_CHAIN_TOL;
            Ok(json!({
                "n_levels": roots.n_levels,
                "min_discriminant": roots.min_discriminant,
                "interlacing_failures": roots.interlacing_failures,
                "n_tau_pairs": tau.n_pairs,
                "tau_max_relative_diff": tau.max_relative_diff,
                "tau_degenerate_max_relative_diff": tau.degenerate_max_relative_diff,
                "tau_tolerance": EH_TAU_TOL,
                "chain_rule_max_defect": chain,
                "chain_rule_tolerance": EH_CHAIN_TOL,
                "pass": pass,
            }))
        }
        other => Err(usage(format!("unknown check '{other}'"))),
    }
}

// --------------------------------------------------------------- tau-table

fn cmd_tau_table(args: TauTableArgs) -> Result<i32, Failure> {
    if args.levels.len() != 3 {
        return Err(usage(format!(
            "--levels takes three comma-separated values, got {}",
            args.levels.len()
        )));
    }
    let grid = parse_grid(&args.grid)?;
    match (&args.params, args.gamma2) {
        (Some(_), None) => tau_table_generic(&args, &grid),
        (None, Some(gamma2)) => tau_table_eh(&args, gamma2, &grid),
        _ => Err(usage(
            "choose a mode: --params t1,t2,t3 (generic) or --gamma2 G (Eguchi-Hanson)",
        )),
    }
}

fn parse_grid(grid: &[f64]) -> Result<Vec<f64>, Failure> {
    if grid.len() != 3 {
        return Err(usage(format!(
            "--grid takes lo,hi,n, got {} values",
            grid.len()
        )));
    }
    let (lo, hi, n_raw) = (grid[0], grid[1], grid[2]);
    if !lo.is_finite() || !hi.is_finite() {
        return Err(usage("--grid bounds must be finite"));
    }
    if n_raw.fract() != 0.0 || !(1.0..=1e7).contains(&n_raw) {
        return Err(usage("--grid point count must be an integer in [1, 1e7]"));
    }
    let n = n_raw as usize;
    if n == 1 {
        return Ok(vec![lo]);
    }
    if hi <= lo {
        return Err(usage("--grid needs hi > lo when n > 1"));
    }
    let step = (hi - lo) / ((n - 1) as f64);
    Ok((0..n)
        .map(|k| if k == n - 1 { hi } else { lo + step * k as f64 })
        .collect())
}

fn tau_table_generic(args: &TauTableArgs, grid: &[f64]) -> Result<i32, Failure> {
    let params = parse_params(&args.params)?;
    let levels = LevelSet {
        e: args.levels[0],
        m2: args.levels[1],
        n2: args.levels[2],
    };
    let base = grid[0];
    let mut rows = Vec::with_capacity(grid.len());
    for &t in grid {
        let tau = tau_of_t(&params, &levels, base, t).map_err(runtime)?;
        rows.push(vec![t, tau]);
    }
    let table = Table {
        meta: vec![
            ("command", "tau-table".into()),
            ("params", join_floats(&params.t_raw())),
            ("levels", join_floats(&args.levels)),
            ("grid", join_floats(&args.grid)),
            ("seed", args.seed.to_string()),
        ],
        columns: vec!["t".into(), "tau".into()],
        rows,
    };
    emit(&table.render(args.format), &args.out)?;
    Ok(0)
}

fn tau_table_eh(args: &TauTableArgs, gamma2: f64, grid: &[f64]) -> Result<i32, Failure> {
    if !(gamma2.is_finite() && gamma2 > 0.0) {
        return Err(usage("--gamma2 must be positive"));
    }
    let levels = EhLevels {
        e: args.levels[0],
        m3: args.levels[1],
        mu2: args.levels[2],
    };
    let base = grid[0];
    let closed_base = eh_tau_closed(gamma2, &levels, base).map_err(runtime)?;
    let mut rows = Vec::with_capacity(grid.len());
    for &rho in grid {
        let quad = eh_tau_quadrature(gamma2, &levels, base, rho).map_err(runtime)?;
        let closed = eh_tau_closed(gamma2, &levels, rho).map_err(runtime)? - closed_base;
        rows.push(vec![rho, quad, closed, (quad - closed).abs()]);
    }
    let table = Table {
        meta: vec![
            ("command", "tau-table".into()),
            ("gamma2", fmt_f(gamma2)),
            ("levels", join_floats(&args.levels)),
            ("grid", join_floats(&args.grid)),
            ("seed", args.seed.to_string()),
        ],
        columns: vec![
            "rho".into(),
            "tau".into(),
            "tau_closed".into(),
            "abs_diff".into(),
        ],
        rows,
    };
    emit(&table.render(args.format), &args.out)?;
    Ok(0)
}

// ---------------------------------------------------------------------- eh

fn cmd_eh(args: EhArgs) -> Result<i32, Failure> {
    if !(args.gamma2.is_finite() && args.gamma2 > 0.0) {
        return Err(usage("--gamma2 must be positive"));
    }
    if args.levels.len() != 3 {
        return Err(usage(format!(
            "--levels takes e,m3,mu2, got {} values",
            args.levels.len()
        )));
    }
    let levels = EhLevels {
        e: args.levels[0],
        m3: args.levels[1],
        mu2: args.levels[2],
    };
    if !args.levels.iter().all(|x| x.is_finite()) || levels.mu2 < 0.0 {
        return Err(usage("--levels must be finite with mu2 >= 0"));
    }
    let gamma = args.gamma2.sqrt();
    let discriminant = eh_discriminant(args.gamma2, &levels).map_err(runtime)?;

    let (roots_value, interlacing, outer) = match eh_roots(args.gamma2, &levels) {
        Ok([r1, r2, r3]) => {
            let ok = -gamma < r1 && r1 < 0.0 && 0.0 < r2 && r2 < gamma && gamma < r3;
            (json!([r1, r2, r3]), json!(ok), json!(r3))
        }
        Err(err) => (Value::Null, Value::Null, json!(err.to_string())),
    };
    // Probing the elementary formula is the cheapest locus test.
    let degenerate = eh_tau_degenerate(args.gamma2, &levels, gamma + 1.0).is_ok();

    let report = json!({
        "command": "eh",
        "gamma2": args.gamma2,
        "gamma": gamma,
        "levels": { "e": levels.e, "m3": levels.m3, "mu2": levels.mu2 },
        "discriminant": discriminant,
        "roots": roots_value,
        "interlacing": interlacing,
        "outer_turning_point": outer,
        "rotor_rate": args.gamma2 * levels.m3,
        "degenerate_log_locus": degenerate,
        "seed": args.seed,
    });
    let mut text = serde_json::to_string_pretty(&report).expect("report serialises");
    text.push('\n');
    emit(&text, &args.out)?;
    Ok(0)
}

// Degeneracy tolerance applied to user-supplied metric parameters.
const PARAM_DEGENERACY_TOL: f64 = 1e-12;

// Verification thresholds, echoed into the JSON report next to the maxima
// they gate.
const BRACKET_TOL: f64 = 1e-9;
const JACOBI_TOL: f64 = 1e-6;
const RANK_RATIO_MIN: f64 = 1e-8;
const DRIFT_TOL: f64 = 1e-8;
const RADIAL_TOL: f64 = 1e-9;
const ANALYTIC_TOL: f64 = 1e-6;
const MULTICENTRE_TOL: f64 = 1e-6;
const ORDER_MIN: f64 = 1.8;
const EH_TAU_TOL: f64 = 1e-9;
const EH_CHAIN_TOL: f64 = 1e-10;

#[cfg(test)]
mod tests {
    use super::*;

    fn run_vec(args: &[&str]) -> i32 {
        run(args.iter().map(|s| s.to_string()))
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_grid(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(parse_grid(&[4.0, 9.0, 1.0]).unwrap(), vec![4.0]);
        assert!(parse_grid(&[1.0, 2.0, 2.5]).is_err());
        assert!(parse_grid(&[2.0, 1.0, 5.0]).is_err());
    }

    #[test]
    fn usage_errors_exit_2() {
        // Unknown flow value.
        assert_eq!(
            run_vec(&["bgpp", "simulate", "--flow", "sideways", "--state", "1"]),
            2
        );
        // Radial coordinate at the domain edge.
        assert_eq!(
            run_vec(&[
                "bgpp",
                "simulate",
                "--flow",
                "reduced",
                "--params",
                "0,1,2",
                "--state",
                "2,0.5,1,0,0",
                "--out",
                "/dev/null",
            ]),
            2
        );
        // Corrupted tolerance.
        assert_eq!(
            run_vec(&[
                "bgpp",
                "verify",
                "--checks",
                "radial",
                "--rel-tol",
                "banana",
            ]),
            2
        );
        // Unknown check name.
        assert_eq!(run_vec(&["bgpp", "verify", "--checks", "vibes"]), 2);
    }

    #[test]
    fn formatted_floats_round_trip() {
        for &x in &[0.1, -3.25e-17, 2.0 / 3.0, 1e300, -0.0] {
            let s = fmt_f(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }
}
