use std::fs;

use cavity_core::finite::{parse_graph, verify_payoff_identity, CouplingStat, FiniteStats};
use cavity_core::pwit::GapMethod;
use cavity_core::suites::{
    bounds_sandwich_suite, instance_text, operator_properties_suite, parse_instance_header,
    payoff_identity_suite, simulator_consistency_suite, Check, SuiteReport,
};
use cavity_core::{
    beta_limit, edgecover_d1, edgecover_d2, empirical_statistics, neighborhood_coupling_stat,
    replica_gap_profile, rigorous_bounds, tsp_d1_reference, BetaConfig, BetaEstimate, Error,
    ModelParams, Problem, SolverConfig,
};
use serde_json::{json, Value};

use crate::args::{
    BetaArgs, CouplingArgs, FiniteArgs, Format, GapArgs, Method, OutputArgs, Suite, VerifyArgs,
};
use crate::output::{csv, json, json_line, num, opt, Sink};

/// Why a command did not succeed; maps onto the exit status.
#[derive(Debug)]
pub enum Failure {
    /// A verification check failed (exit 2).
    Verification,
    /// A solver did not converge or an extrapolation misbehaved (exit 3).
    Numerical(String),
    /// Bad flags, unreadable input or an infeasible request (exit 4).
    Config(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Verification => 2,
            Failure::Numerical(_) => 3,
            Failure::Config(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            Failure::Verification => "verification",
            Failure::Numerical(_) => "non-convergence",
            Failure::Config(_) => "invalid-config",
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NonConvergence { .. }
            | Error::NonMonotoneBeta { .. }
            | Error::CutoffTooSmall { .. }
            | Error::RootBracket(_) => Failure::Numerical(e.to_string()),
            _ => Failure::Config(e.to_string()),
        }
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure::Config(format!("i/o: {e}"))
}

/// Writes the diagnostic record for a failed run to the sink (JSON only).
pub fn report_failure(sink: &Sink, command: &str, f: &Failure) {
    let message = match f {
        Failure::Verification => return,
        Failure::Numerical(m) | Failure::Config(m) => m,
    };
    eprintln!("cavity {command}: {message}");
    if sink.format == Format::Json {
        let rec = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "error": { "kind": f.kind(), "message": message },
        });
        let _ = sink.write(&json(&rec));
    }
}

pub fn beta_sink(args: &BetaArgs, out: &OutputArgs) -> Sink {
    Sink::new(out, &format!("beta-{}-d{}", args.problem, args.d), false)
}

pub fn beta(args: &BetaArgs, sink: &Sink) -> Result<(), Failure> {
    let defaults = BetaConfig::default();
    let schedule = match (&args.theta, &args.theta_schedule) {
        (Some(t), _) => vec![*t],
        (None, Some(s)) => s.clone(),
        (None, None) => defaults.schedule.clone(),
    };
    let cfg = BetaConfig {
        schedule,
        solver: SolverConfig {
            cells: args.cells,
            step: args.step,
            tol: args.tol,
            max_iter: args.max_iter,
            record_history: false,
        },
        richardson: !args.no_richardson,
        ..defaults
    };
    let est = beta_limit(args.problem, args.d, &cfg)?;
    let text = match sink.format {
        Format::Json => {
            let bounds = match args.problem {
                Problem::Matching => Some(rigorous_bounds(args.d)?),
                _ => None,
            };
            let rec = json!({
                "command": "beta",
                "version": env!("CARGO_PKG_VERSION"),
                "config": {
                    "problem": args.problem,
                    "d": args.d,
                    "theta_schedule": cfg.schedule,
                    "solver": cfg.solver,
                    "richardson": cfg.richardson,
                },
                "result": {
                    "estimate": est,
                    "bounds": bounds,
                    "references": references(args.problem, args.d)?,
                },
            });
            json(&rec)
        }
        Format::Csv => beta_csv(&est),
    };
    sink.write(&text).map_err(io_failure)
}

/// Independent values the estimate can be compared with.
fn references(problem: Problem, d: f64) -> Result<Vec<Value>, Failure> {
    let mut out = Vec::new();
    if d == 1.0 {
        match problem {
            Problem::Matching => out.push(json!({
                "name": "pi^2/12",
                "value": std::f64::consts::PI.powi(2) / 12.0,
            })),
            Problem::Tsp => out.push(json!({
                "name": "parametric area integral",
                "value": tsp_d1_reference()?,
            })),
            Problem::EdgeCover => out.push(json!({
                "name": "W(1) + W(1)^2/2",
                "value": edgecover_d1().1,
            })),
        }
    }
    if d == 2.0 && problem == Problem::EdgeCover {
        let r = edgecover_d2()?;
        out.push(json!({
            "name": "moment equations",
            "value": r.cost,
            "a": r.moments.a,
            "b": r.moments.b,
        }));
    }
    Ok(out)
}

pub const BETA_COLUMNS: &[&str] = &[
    "problem", "d", "theta", "beta", "beta_fine", "beta_coarse", "step", "q", "iterations", "residual",
];

fn beta_csv(est: &BetaEstimate) -> String {
    let problem = est.problem.to_string();
    let mut rows: Vec<Vec<String>> = est
        .points
        .iter()
        .chain(est.undiluted.iter())
        .map(|p| {
            vec![
                problem.clone(),
                num(est.d),
                num(p.theta),
                num(p.beta),
                num(p.beta_fine),
                opt(p.beta_coarse),
                num(p.step),
                num(p.q),
                p.iterations.to_string(),
                num(p.residual),
            ]
        })
        .collect();
    let mut limit = vec![problem, num(est.d), "limit".into(), num(est.beta_limit)];
    limit.resize(BETA_COLUMNS.len(), String::new());
    rows.push(limit);
    csv(BETA_COLUMNS, &rows)
}

pub fn verify_sink(args: &VerifyArgs, out: &OutputArgs) -> Sink {
    Sink::new(out, &format!("verify-{}", args.suite.name()), true)
}

pub fn verify(args: &VerifyArgs, sink: &Sink) -> Result<(), Failure> {
    let report = match (args.suite, &args.replay) {
        (Suite::PayoffIdentity, Some(path)) => replay(path)?,
        (_, Some(_)) => {
            return Err(Failure::Config("--replay applies to payoff-identity only".into()));
        }
        (Suite::PayoffIdentity, None) => payoff_identity_suite(args.seed, args.graphs, args.trees)?,
        (Suite::OperatorProperties, None) => operator_properties_suite(args.seed)?,
        (Suite::SimulatorConsistency, None) => simulator_consistency_suite(
            args.d,
            args.theta,
            args.k,
            args.samples,
            args.seed,
            &args.games,
            args.cells,
        )?,
        (Suite::BoundsSandwich, None) => {
            let cfg = BetaConfig {
                solver: SolverConfig::default().with_cells(args.cells),
                ..BetaConfig::default()
            };
            bounds_sandwich_suite(&args.ds, &cfg)?
        }
    };
    let text = match sink.format {
        Format::Json => {
            let mut s = String::new();
            for c in &report.checks {
                s.push_str(&json_line(&json!({
                    "command": "verify",
                    "suite": report.suite,
                    "seed": report.seed,
                    "check": c,
                })));
            }
            s.push_str(&json_line(&json!({
                "command": "verify",
                "suite": report.suite,
                "seed": report.seed,
                "summary": {
                    "passed": report.passed,
                    "checks": report.checks.len(),
                    "failures": report.failures().count(),
                },
            })));
            s
        }
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .checks
                .iter()
                .map(|c| {
                    vec![
                        report.suite.clone(),
                        c.name.clone(),
                        c.passed.to_string(),
                        opt(c.value),
                        opt(c.bound),
                        c.detail.clone(),
                    ]
                })
                .collect();
            csv(VERIFY_COLUMNS, &rows)
        }
    };
    sink.write(&text).map_err(io_failure)?;
    save_instances(&report, sink)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Verification)
    }
}

pub const VERIFY_COLUMNS: &[&str] = &["suite", "check", "passed", "value", "bound", "detail"];

fn replay(path: &std::path::Path) -> Result<SuiteReport, Failure> {
    let text = fs::read_to_string(path).map_err(io_failure)?;
    let (problem, start, theta) = parse_instance_header(&text).ok_or_else(|| {
        Failure::Config("replay file needs a `# problem P start S theta T` line".into())
    })?;
    let g = parse_graph(&text)?;
    let r = verify_payoff_identity(&g, start, theta, problem)?;
    let check = Check {
        name: format!("{problem} payoff identity (replay)"),
        passed: r.equal,
        value: Some(r.game_value),
        bound: Some(r.optimization_difference),
        detail: format!(
            "game value {} vs optimization difference {}",
            r.game_value, r.optimization_difference
        ),
        instance: (!r.equal).then(|| {
            instance_text(&g, problem, start, theta, r.game_value, r.optimization_difference)
        }),
    };
    Ok(SuiteReport {
        suite: "payoff-identity".into(),
        seed: 0,
        passed: check.passed,
        checks: vec![check],
    })
}

/// Failing instances go next to the report, one graph file each.
fn save_instances(report: &SuiteReport, sink: &Sink) -> Result<(), Failure> {
    for (i, c) in report.checks.iter().enumerate() {
        let Some(text) = &c.instance else { continue };
        match sink.dir() {
            Some(dir) => {
                let path = dir.join(format!("failing-{}-{i}.graph", report.suite));
                fs::write(&path, text).map_err(io_failure)?;
                eprintln!("failing instance for `{}` written to {}", c.name, path.display());
            }
            None => eprintln!("failing instance for `{}`:\n{text}", c.name),
        }
    }
    Ok(())
}

pub fn gap_sink(out: &OutputArgs) -> Sink {
    Sink::new(out, "simulate-replica-gap", false)
}

pub const GAP_COLUMNS: &[&str] = &["k", "mean_gap", "ci_halfwidth", "min_gap", "samples"];

pub fn replica_gap(args: &GapArgs, sink: &Sink) -> Result<(), Failure> {
    if args.k_min > args.k_max {
        return Err(Failure::Config("--k-min exceeds --k-max".into()));
    }
    let p = ModelParams::new(args.d, args.theta)?;
    let ks: Vec<usize> = (args.k_min..=args.k_max).collect();
    let method = match args.method {
        Method::Exact => GapMethod::Exact,
        Method::Population => GapMethod::Population,
        Method::Auto => GapMethod::Auto,
    };
    let prof = replica_gap_profile(&p, &ks, args.samples, args.seed, args.game, method)?;
    let text = match sink.format {
        Format::Json => json(&json!({
            "command": "simulate",
            "version": env!("CARGO_PKG_VERSION"),
            "config": {
                "table": "replica-gap",
                "d": args.d,
                "theta": args.theta,
                "game": args.game,
                "k_min": args.k_min,
                "k_max": args.k_max,
                "samples": args.samples,
                "seed": args.seed,
            },
            "result": { "table": "replica-gap", "method": prof.method, "rows": prof.rows },
        })),
        Format::Csv => {
            let rows: Vec<Vec<String>> = prof
                .rows
                .iter()
                .map(|r| {
                    vec![
                        r.k.to_string(),
                        num(r.mean_gap),
                        num(r.ci_halfwidth),
                        num(r.min_gap),
                        r.samples.to_string(),
                    ]
                })
                .collect();
            csv(GAP_COLUMNS, &rows)
        }
    };
    sink.write(&text).map_err(io_failure)
}

pub fn finite_sink(out: &OutputArgs) -> Sink {
    Sink::new(out, "simulate-finite-n", false)
}

pub const FINITE_COLUMNS: &[&str] = &[
    "n",
    "d",
    "theta",
    "trials",
    "mean_diluted_per_vertex",
    "ci_diluted",
    "mean_q",
    "ci_q",
    "mean_perfect_per_vertex",
    "ci_perfect",
    "lower_bound",
    "upper_bound",
];

pub fn finite_n(args: &FiniteArgs, sink: &Sink) -> Result<(), Failure> {
    let bounds = rigorous_bounds(args.d)?;
    let stats = args
        .ns
        .iter()
        .map(|&n| empirical_statistics(n, args.d, args.theta, args.trials, args.seed))
        .collect::<Result<Vec<FiniteStats>, Error>>()?;
    let text = match sink.format {
        Format::Json => json(&json!({
            "command": "simulate",
            "version": env!("CARGO_PKG_VERSION"),
            "config": {
                "table": "finite-n",
                "ns": args.ns,
                "d": args.d,
                "theta": args.theta,
                "trials": args.trials,
                "seed": args.seed,
            },
            "result": { "table": "finite-n", "bounds": bounds, "rows": stats },
        })),
        Format::Csv => {
            let rows: Vec<Vec<String>> = stats
                .iter()
                .map(|s| {
                    vec![
                        s.n.to_string(),
                        num(s.d),
                        num(s.theta),
                        s.trials.to_string(),
                        num(s.mean_diluted_per_vertex),
                        num(s.ci_diluted),
                        num(s.mean_q),
                        num(s.ci_q),
                        opt(s.mean_perfect_per_vertex),
                        opt(s.ci_perfect),
                        num(bounds.lower),
                        num(bounds.upper),
                    ]
                })
                .collect();
            csv(FINITE_COLUMNS, &rows)
        }
    };
    sink.write(&text).map_err(io_failure)
}

pub fn coupling_sink(out: &OutputArgs) -> Sink {
    Sink::new(out, "simulate-coupling", false)
}

pub const COUPLING_COLUMNS: &[&str] =
    &["n", "k", "trials", "mean_kn", "mean_pwit", "expected_pwit", "z_score"];

pub fn coupling(args: &CouplingArgs, sink: &Sink) -> Result<(), Failure> {
    let s: CouplingStat =
        neighborhood_coupling_stat(args.n, args.d, args.theta, args.k, args.trials, args.seed)?;
    let text = match sink.format {
        Format::Json => json(&json!({
            "command": "simulate",
            "version": env!("CARGO_PKG_VERSION"),
            "config": {
                "table": "coupling",
                "n": args.n,
                "d": args.d,
                "theta": args.theta,
                "k": args.k,
                "trials": args.trials,
                "seed": args.seed,
            },
            "result": { "table": "coupling", "rows": [s] },
        })),
        Format::Csv => csv(
            COUPLING_COLUMNS,
            &[vec![
                s.n.to_string(),
                s.k.to_string(),
                s.trials.to_string(),
                num(s.mean_kn),
                num(s.mean_pwit),
                num(s.expected_pwit),
                num(s.z_score),
            ]],
        ),
    };
    sink.write(&text).map_err(io_failure)
}
