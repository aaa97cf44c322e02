//! The `csh` command-line front end: graph generation, solving at a fixed
//! coupling, locating `λ_c`, coupling sweeps and re-verification of stored
//! results.
//!
//! Exit codes: 0 solved (or command completed), 1 input error, 2 no solution,
//! 3 inconclusive, 4 verification failed.

pub mod args;
pub mod output;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use anyhow::{bail, ensure, Context, Result};
use csh_core::calculus::{check_max_principle_with_slack, integrate, laplacian};
use csh_core::families::{generate, Family, GenerateOptions};
use csh_core::solver::default_shift;
use csh_core::{
    diagnostics, find_critical, residual, solve_at_critical, solve_reduced, CriticalOptions,
    Instance, MaxPrincipleVerdict, NonlinearityKind, ProblemSpec, SolveOutcome, Status,
    VertexFunction, WeightedGraph,
};
use rayon::prelude::*;
use serde::Serialize;

use args::{
    Cli, Command, CriticalArgs, FamilyName, GenerateArgs, ProblemArgs, SolveArgs, SweepArgs,
    VerifyArgs,
};
use output::{
    emit, format_f64, load_graph, to_json, LoadedGraph, SolveReport, StoredSolve, VertexValues,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NO_SOLUTION: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_VERIFY_FAILED: i32 = 4;

/// Runs one command and returns its exit code. Errors are input errors.
pub fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Solve(a) => run_solve(&a),
        Command::Critical(a) => run_critical(&a),
        Command::Sweep(a) => run_sweep(&a),
        Command::Verify(a) => run_verify(&a),
        Command::Generate(a) => run_generate(&a),
    }
}

fn status_code(status: Status) -> i32 {
    match status {
        Status::Solved => EXIT_OK,
        Status::NoSolution => EXIT_NO_SOLUTION,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn instance<'g>(graph: &'g WeightedGraph, problem: &ProblemArgs) -> Result<Instance<'g>> {
    let mut seen = std::collections::HashSet::new();
    for v in &problem.vortices {
        if !seen.insert(v) {
            eprintln!(
                "warning: vortex {v:?} is listed more than once; it counts with multiplicity"
            );
        }
    }
    Ok(Instance::new(
        graph,
        problem.equation.into(),
        &problem.vortices,
    )?)
}

/// `‖residual‖∞` of `u` for the full equation.
fn full_residual(spec: &ProblemSpec<'_>, u: &VertexFunction) -> Result<VertexFunction> {
    Ok(residual(spec, u)?)
}

pub fn run_solve(a: &SolveArgs) -> Result<i32> {
    let LoadedGraph { graph, sha256 } = load_graph(&a.problem.graph)?;
    let inst = instance(&graph, &a.problem)?;
    let spec = inst.with_lambda(a.lambda)?;
    let opts = a.solver.options();
    opts.validate()?;
    let reduced = spec.reduce(opts.linear_tol)?;
    let out = solve_reduced(&reduced, a.lambda, &opts, None)?;
    let (residual_inf, diag) = match &out.u {
        Some(u) => (
            full_residual(&spec, u)?.norm_inf(),
            Some(diagnostics(&reduced, &out)?),
        ),
        None => (out.residual, None),
    };
    let report = solve_report(
        &graph,
        &a.problem.vortices,
        &sha256,
        &out,
        residual_inf,
        diag,
    );
    emit(a.output.as_deref(), &to_json(&report)?)?;
    eprintln!("{}: {}", out.status, out.reason);
    Ok(status_code(out.status))
}

fn solve_report<'a>(
    graph: &'a WeightedGraph,
    vortices: &'a [String],
    sha256: &'a str,
    out: &'a SolveOutcome,
    residual_inf: f64,
    diagnostics: Option<csh_core::DiagnosticReport>,
) -> SolveReport<'a> {
    SolveReport {
        status: out.status,
        equation: out.kind,
        lambda: out.lambda,
        vortices,
        graph_sha256: sha256,
        reason: &out.reason,
        u: out.u.as_ref().map(|u| VertexValues {
            ids: graph.ids(),
            values: u.values(),
        }),
        iterations: out.iterations,
        residual_inf,
        shift: out.shift,
        trace: out.trace.iter().map(|t| (t.n, t.delta, t.min)).collect(),
        diagnostics,
    }
}

#[derive(Serialize)]
struct CriticalReport<'a> {
    equation: NonlinearityKind,
    vortices: &'a [String],
    graph_sha256: &'a str,
    lambda_c: f64,
    bracket: [f64; 2],
    half_width: f64,
    lambda_tol: f64,
    analytic_bound: f64,
    solution_at_critical: AtCritical<'a>,
    probes: &'a [csh_core::solver::Probe],
    /// Couplings whose probe stayed inconclusive and were treated as unsolved.
    inconclusive: &'a [f64],
}

#[derive(Serialize)]
struct AtCritical<'a> {
    status: Status,
    /// Refined estimate at which the residual below was evaluated.
    lambda_c: f64,
    bracket: [f64; 2],
    /// Coupling the stored solution was computed at.
    lambda: f64,
    residual_at_estimate: f64,
    monotone: bool,
    ladder: &'a [csh_core::solver::LadderRung],
    u: Option<VertexValues<'a>>,
}

pub fn run_critical(a: &CriticalArgs) -> Result<i32> {
    let LoadedGraph { graph, sha256 } = load_graph(&a.problem.graph)?;
    let inst = instance(&graph, &a.problem)?;
    let opts = CriticalOptions {
        lambda_tol: a.lambda_tol,
        solve: a.solver.options(),
        ..CriticalOptions::default()
    };
    opts.solve.validate()?;
    let crit = find_critical(&inst, &opts)?;
    let sol = solve_at_critical(&inst, &crit, &opts)?;
    if !crit.inconclusive.is_empty() {
        eprintln!(
            "warning: {} probe(s) stayed inconclusive and were treated as unsolved: {:?}",
            crit.inconclusive.len(),
            crit.inconclusive
        );
    }
    let report = CriticalReport {
        equation: inst.kind(),
        vortices: &a.problem.vortices,
        graph_sha256: &sha256,
        lambda_c: crit.lambda_c,
        bracket: [crit.lambda_lo, crit.lambda_hi],
        half_width: crit.half_width,
        lambda_tol: crit.lambda_tol,
        analytic_bound: crit.analytic_bound,
        solution_at_critical: AtCritical {
            status: sol.status,
            lambda_c: sol.lambda_c,
            bracket: [sol.lambda_lo, sol.lambda_hi],
            lambda: sol.outcome.lambda,
            residual_at_estimate: sol.residual_at_estimate,
            monotone: sol.monotone,
            ladder: &sol.ladder,
            u: sol.outcome.u.as_ref().map(|u| VertexValues {
                ids: graph.ids(),
                values: u.values(),
            }),
        },
        probes: &crit.probes,
        inconclusive: &crit.inconclusive,
    };
    emit(a.output.as_deref(), &to_json(&report)?)?;
    eprintln!(
        "lambda_c = {} ± {} (bound {})",
        crit.lambda_c, crit.half_width, crit.analytic_bound
    );
    Ok(EXIT_OK)
}

struct SweepRow {
    lambda: f64,
    status: Status,
    min_u: Option<f64>,
    mean_u: Option<f64>,
    grad_norm: Option<f64>,
    sobolev_norm: Option<f64>,
    iterations: usize,
    flags: Vec<&'static str>,
}

pub fn run_sweep(a: &SweepArgs) -> Result<i32> {
    ensure!(a.lambda_min > 0.0, "--lambda-min must be positive");
    ensure!(
        a.lambda_max >= a.lambda_min,
        "--lambda-max must be at least --lambda-min"
    );
    ensure!(a.steps >= 1, "--steps must be at least 1");
    let LoadedGraph { graph, .. } = load_graph(&a.problem.graph)?;
    let inst = instance(&graph, &a.problem)?;
    let opts = a.solver.options();
    opts.validate()?;
    let reduced = inst.reduce(opts.linear_tol)?;
    let lambdas: Vec<f64> = (0..a.steps)
        .map(|i| match a.steps {
            1 => a.lambda_min,
            n => a.lambda_min + (a.lambda_max - a.lambda_min) * i as f64 / (n - 1) as f64,
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.threads.unwrap_or(0))
        .build()
        .context("building the worker pool")?;
    let rows: Vec<SweepRow> = pool.install(|| {
        lambdas
            .par_iter()
            .map(|&lambda| -> Result<SweepRow> {
                let out = solve_reduced(&reduced, lambda, &opts, None)?;
                let d = match out.status {
                    Status::Solved => Some(diagnostics(&reduced, &out)?),
                    _ => None,
                };
                Ok(SweepRow {
                    lambda,
                    status: out.status,
                    min_u: d.map(|d| d.min_u),
                    mean_u: d.map(|d| d.mean_u),
                    grad_norm: d.map(|d| d.grad_norm),
                    sobolev_norm: d.map(|d| d.sobolev_norm),
                    iterations: out.iterations,
                    flags: Vec::new(),
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let rows = flag_rows(rows);

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "lambda",
        "status",
        "min_u",
        "mean_u",
        "grad_norm",
        "sobolev_norm",
        "iterations",
        "flag",
    ])?;
    let num = |v: Option<f64>| v.map(format_f64).unwrap_or_default();
    for r in &rows {
        w.write_record([
            format_f64(r.lambda),
            r.status.to_string(),
            num(r.min_u),
            num(r.mean_u),
            num(r.grad_norm),
            num(r.sobolev_norm),
            r.iterations.to_string(),
            r.flags.join(";"),
        ])?;
    }
    let bytes = w.into_inner().context("flushing CSV")?;
    emit(a.output.as_deref(), &bytes)?;
    let flagged = rows.iter().filter(|r| !r.flags.is_empty()).count();
    if flagged > 0 {
        eprintln!("warning: {flagged} row(s) flagged");
    }
    Ok(EXIT_OK)
}

/// Marks rows that break the expected structure: solvability is upward
/// closed in `λ` and `min u` increases strictly with `λ`.
fn flag_rows(mut rows: Vec<SweepRow>) -> Vec<SweepRow> {
    let mut seen_solved = false;
    let mut previous_min: Option<f64> = None;
    for r in &mut rows {
        match r.status {
            Status::Solved => {
                if let (Some(prev), Some(m)) = (previous_min, r.min_u) {
                    if m <= prev {
                        r.flags.push("min_u-not-increasing");
                    }
                }
                previous_min = r.min_u;
                seen_solved = true;
            }
            Status::NoSolution if seen_solved => r.flags.push("unsolved-above-solved"),
            Status::Inconclusive => r.flags.push("inconclusive"),
            Status::NoSolution => {}
        }
    }
    rows
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

pub fn run_verify(a: &VerifyArgs) -> Result<i32> {
    let LoadedGraph { graph, sha256 } = load_graph(&a.graph)?;
    let text = std::fs::read_to_string(&a.result)
        .with_context(|| format!("reading result {}", a.result.display()))?;
    let stored: StoredSolve = serde_json::from_str(&text)
        .with_context(|| format!("invalid result file {}", a.result.display()))?;
    if stored.graph_sha256 != sha256 {
        bail!(
            "graph hash mismatch: the result was computed on a graph hashing to {}, but {} hashes to {}",
            stored.graph_sha256,
            a.graph.display(),
            sha256
        );
    }
    if stored.status != Status::Solved {
        println!(
            "[FAIL] status: result reports {}, there is no solution to verify",
            stored.status
        );
        return Ok(EXIT_VERIFY_FAILED);
    }
    let values = stored
        .u
        .as_ref()
        .context("result is marked Solved but has no `u`")?;
    let u = values_in_graph_order(&graph, values)?;
    let inst = Instance::new(&graph, stored.equation, &stored.vortices)?;
    let spec = inst.with_lambda(stored.lambda)?;

    let checks = verify_checks(&spec, &u, stored.residual_inf, a.tol)?;
    for c in &checks {
        println!(
            "[{}] {}: {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    Ok(if checks.iter().all(|c| c.pass) {
        println!("verification passed");
        EXIT_OK
    } else {
        println!("verification failed");
        EXIT_VERIFY_FAILED
    })
}

fn values_in_graph_order(
    graph: &WeightedGraph,
    values: &BTreeMap<String, f64>,
) -> Result<VertexFunction> {
    if let Some(extra) = values.keys().find(|k| graph.vertex_index(k).is_err()) {
        bail!("result has a value for {extra:?}, which is not a vertex of the graph");
    }
    let u = graph
        .ids()
        .iter()
        .map(|id| {
            values
                .get(id)
                .copied()
                .with_context(|| format!("result has no value for vertex {id:?}"))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(VertexFunction(u))
}

fn verify_checks(
    spec: &ProblemSpec<'_>,
    u: &VertexFunction,
    recorded: Option<f64>,
    tol: f64,
) -> Result<Vec<Check>> {
    let g = spec.graph();
    let mut checks = Vec::new();

    let top = (0..u.len())
        .max_by(|&a, &b| u[a].total_cmp(&u[b]))
        .unwrap_or(0);
    let negative = u[top] < 0.0;
    checks.push(Check {
        name: "negativity",
        pass: negative,
        detail: format!("max u = {} at vertex {}", u[top], g.id(top)),
    });
    if !negative && spec.kind() == NonlinearityKind::Generalized {
        checks.push(Check {
            name: "residual",
            pass: false,
            detail: format!("not evaluated: u > 0 at vertex {}", g.id(top)),
        });
        return Ok(checks);
    }

    let res = full_residual(spec, u)?;
    let worst = res.argmax_abs().unwrap_or(0);
    let res_inf = res[worst].abs();
    checks.push(Check {
        name: "residual",
        pass: res_inf <= tol,
        detail: format!(
            "max |residual| = {res_inf:.3e} at vertex {} (tolerance {tol:.1e})",
            g.id(worst)
        ),
    });
    checks.push(match recorded {
        Some(r) => Check {
            name: "recorded residual",
            pass: (r - res_inf).abs() <= tol,
            detail: format!("recorded {r:.3e}, recomputed {res_inf:.3e}"),
        },
        None => Check {
            name: "recorded residual",
            pass: false,
            detail: "missing from the result file".into(),
        },
    });

    // Δu − H(u) carries 4π·mult/μ at each vortex and nothing elsewhere
    let nl = spec.nonlinearity();
    let lap = laplacian(g, u)?;
    let h = VertexFunction(
        u.iter()
            .map(|&w| nl.eval(w))
            .collect::<csh_core::Result<Vec<f64>>>()?,
    );
    let source = lap.sub(&h);
    let mult = spec.instance.multiplicity();
    let deviation = |x: usize| (source[x] * g.measure()[x] / (4.0 * PI) - mult[x] as f64).abs();
    let worst_mass = (0..g.len())
        .map(|x| (deviation(x), x))
        .max_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap_or((0.0, 0));
    let total = integrate(g, &source)? / (4.0 * PI);
    let n = spec.instance.n_vortices() as f64;
    let mass_tol = tol * g.volume().total() / (4.0 * PI) * 10.0;
    checks.push(Check {
        name: "vortex bookkeeping",
        pass: worst_mass.0 <= mass_tol && (total - n).abs() <= mass_tol,
        detail: format!(
            "total Dirac mass {total:.12}·4π for N = {n}; largest per-vertex deviation {:.3e} at vertex {}",
            worst_mass.0,
            g.id(worst_mass.1)
        ),
    });

    // a solution with u ≤ 0 has (Δ − K)u = H(u) − Ku + 4πΣδ ≥ 0 for K ≥ sup|H′|
    let k = default_shift(spec.kind(), spec.lambda);
    let mp = check_max_principle_with_slack(g, u, k, tol)?;
    checks.push(Check {
        name: "maximum principle",
        pass: mp.verdict() == MaxPrincipleVerdict::Confirmed,
        detail: format!(
            "K = {k:.6}: min (Δu − Ku) = {:.3e}, max u = {:.6e} ({:?})",
            mp.premise_min,
            mp.max_value,
            mp.verdict()
        ),
    });
    Ok(checks)
}

pub fn run_generate(a: &GenerateArgs) -> Result<i32> {
    let family = parse_family(a.family, &a.params)?;
    let opts = GenerateOptions {
        seed: a.seed,
        random_weights: a.random_weights,
        random_measure: a.random_measure,
    };
    let graph = generate(family, &opts)?;
    emit(a.output.as_deref(), &to_json(&graph.to_file())?)?;
    Ok(EXIT_OK)
}

fn parse_family(name: FamilyName, params: &[String]) -> Result<Family> {
    let int = |i: usize| -> Result<usize> {
        let s = params
            .get(i)
            .with_context(|| format!("{name:?} needs parameter #{}", i + 1))?;
        s.parse()
            .with_context(|| format!("expected a non-negative integer, got {s:?}"))
    };
    let arity = match name {
        FamilyName::Torus | FamilyName::Random => 2,
        _ => 1,
    };
    ensure!(
        params.len() == arity,
        "{name:?} takes {arity} parameter(s), got {}",
        params.len()
    );
    Ok(match name {
        FamilyName::Path => Family::Path(int(0)?),
        FamilyName::Cycle => Family::Cycle(int(0)?),
        FamilyName::Complete => Family::Complete(int(0)?),
        FamilyName::Torus => Family::Torus(int(0)?, int(1)?),
        FamilyName::Random => {
            let p: f64 = params[1]
                .parse()
                .with_context(|| format!("expected an edge probability, got {:?}", params[1]))?;
            Family::Random { n: int(0)?, p }
        }
    })
}
