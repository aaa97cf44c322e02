//! Locating the critical coupling `λ_c` and the solution at `λ_c`.
//!
//! The set of couplings with a solution is an upward-closed interval: a
//! solution at `λ′` is a lower solution for every `λ > λ′`. Bisection on the
//! solve verdict is therefore sound. The lower end starts at the integral
//! bound `aπN/|V|`, the upper end is found by doubling.
//!
//! A maximal solution at `λ₁` is an upper solution at every `λ₂ < λ₁`
//! (the reaction term is nonpositive), so probes below a solved coupling are
//! warm-started from its solution.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::VertexFunction;
use crate::solver::{
    residual, solve_reduced, Instance, Reduced, SolveOptions, SolveOutcome, Status,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriticalOptions {
    /// Target bracket width for `λ_c`.
    pub lambda_tol: f64,
    pub solve: SolveOptions,
    /// Doubling stops once `λ_hi` exceeds `cap_factor · bound`.
    pub cap_factor: f64,
    /// Residual required of the solution accepted at `λ_c`.
    pub accept_tol: f64,
}

impl Default for CriticalOptions {
    fn default() -> Self {
        Self {
            lambda_tol: 1e-3,
            solve: SolveOptions::default(),
            cap_factor: 1e6,
            accept_tol: 1e-6,
        }
    }
}

/// One solve performed while searching for `λ_c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Probe {
    pub lambda: f64,
    pub status: Status,
    pub iterations: usize,
    /// The first attempt was inconclusive and the probe was repeated with
    /// ten times the iteration budget.
    pub reprobed: bool,
}

#[derive(Debug, Clone)]
pub struct CriticalResult {
    /// No solution was found at or below this coupling.
    pub lambda_lo: f64,
    /// A solution exists here.
    pub lambda_hi: f64,
    /// Bracket midpoint.
    pub lambda_c: f64,
    pub half_width: f64,
    pub analytic_bound: f64,
    pub lambda_tol: f64,
    pub solution_at_hi: SolveOutcome,
    /// Probes in the order they were run.
    pub probes: Vec<Probe>,
    /// Couplings whose probe stayed inconclusive after the retry; they were
    /// treated as unsolved.
    pub inconclusive: Vec<f64>,
}

fn probe(
    reduced: &Reduced<'_>,
    lambda: f64,
    opts: &SolveOptions,
    start: Option<&VertexFunction>,
    probes: &mut Vec<Probe>,
    inconclusive: &mut Vec<f64>,
) -> Result<SolveOutcome> {
    let mut out = solve_reduced(reduced, lambda, opts, start)?;
    let mut reprobed = false;
    if out.status == Status::Inconclusive {
        let retry = SolveOptions {
            max_iter: opts.max_iter.saturating_mul(10),
            ..*opts
        };
        out = solve_reduced(reduced, lambda, &retry, start)?;
        reprobed = true;
        if out.status == Status::Inconclusive {
            inconclusive.push(lambda);
        }
    }
    probes.push(Probe {
        lambda,
        status: out.status,
        iterations: out.iterations,
        reprobed,
    });
    Ok(out)
}

/// Brackets `λ_c` to within `opts.lambda_tol`.
pub fn find_critical(instance: &Instance<'_>, opts: &CriticalOptions) -> Result<CriticalResult> {
    if !(opts.lambda_tol > 0.0) {
        return Err(Error::InvalidParameter(
            "lambda_tol must be positive".into(),
        ));
    }
    let reduced = instance.reduce(opts.solve.linear_tol)?;
    find_critical_reduced(&reduced, opts)
}

pub fn find_critical_reduced(
    reduced: &Reduced<'_>,
    opts: &CriticalOptions,
) -> Result<CriticalResult> {
    let bound = reduced.instance.analytic_bound();
    let mut probes = Vec::new();
    let mut inconclusive = Vec::new();
    let finish = |lo: f64, hi: f64, sol: SolveOutcome, probes, inconclusive| CriticalResult {
        lambda_lo: lo,
        lambda_hi: hi,
        lambda_c: 0.5 * (lo + hi),
        half_width: 0.5 * (hi - lo),
        analytic_bound: bound,
        lambda_tol: opts.lambda_tol,
        solution_at_hi: sol,
        probes,
        inconclusive,
    };

    let at_bound = probe(
        reduced,
        bound,
        &opts.solve,
        None,
        &mut probes,
        &mut inconclusive,
    )?;
    if at_bound.is_solved() {
        return Ok(finish(bound, bound, at_bound, probes, inconclusive));
    }

    let mut lo = bound;
    let mut hi = 2.0 * bound;
    let mut best = loop {
        let out = probe(
            reduced,
            hi,
            &opts.solve,
            None,
            &mut probes,
            &mut inconclusive,
        )?;
        if out.is_solved() {
            break out;
        }
        lo = hi;
        hi *= 2.0;
        if hi > opts.cap_factor * bound {
            return Err(Error::DoublingCap {
                cap: opts.cap_factor * bound,
            });
        }
    };

    while hi - lo > opts.lambda_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let out = probe(
            reduced,
            mid,
            &opts.solve,
            best.solution.as_ref(),
            &mut probes,
            &mut inconclusive,
        )?;
        if out.is_solved() {
            hi = mid;
            best = out;
        } else {
            lo = mid;
        }
    }
    Ok(finish(lo, hi, best, probes, inconclusive))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LadderRung {
    pub lambda: f64,
    pub status: Status,
    pub iterations: usize,
    /// `υ` at this rung lies strictly below `υ` at the previous solved rung
    /// (within 1e-10); `None` for the first solved rung.
    pub below_previous: Option<bool>,
}

#[derive(Debug, Clone)]
pub struct CriticalSolution {
    /// Refined estimate of `λ_c`.
    pub lambda_c: f64,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    /// Solution at the smallest solved coupling `lambda_hi`.
    pub outcome: SolveOutcome,
    /// `‖residual‖_∞` of `outcome.u` evaluated with `λ = lambda_c`.
    pub residual_at_estimate: f64,
    pub ladder: Vec<LadderRung>,
    /// Every solved rung lies below the previous one.
    pub monotone: bool,
    /// Status of the accepted solution: solved iff the residual at the
    /// estimate is within `accept_tol` and `υ₀ + υ < 0`.
    pub status: Status,
}

/// Approaches `λ_c` from above: solves at `λ_c + λ_tol·2⁻ᵏ`, `k = 0..6`,
/// warm-starting each rung from the previous solution and checking that the
/// maximal solutions decrease with `λ`. The bracket is then narrowed until the
/// solution at its upper end satisfies the equation at the midpoint within
/// `opts.accept_tol`.
pub fn solve_at_critical(
    instance: &Instance<'_>,
    critical: &CriticalResult,
    opts: &CriticalOptions,
) -> Result<CriticalSolution> {
    let reduced = instance.reduce(opts.solve.linear_tol)?;
    solve_at_critical_reduced(&reduced, critical, opts)
}

pub fn solve_at_critical_reduced(
    reduced: &Reduced<'_>,
    critical: &CriticalResult,
    opts: &CriticalOptions,
) -> Result<CriticalSolution> {
    let mut lo = critical.lambda_lo;
    let mut hi = critical.lambda_hi;
    let mut best = critical.solution_at_hi.clone();
    let est = critical.lambda_c;
    let extremum = reduced.instance.kind.extremum();
    let mut ladder = Vec::new();
    let mut monotone = true;
    let mut previous: Option<SolveOutcome> = None;
    let mut unused = (Vec::new(), Vec::new());

    for k in 0..=6 {
        let lambda = est + critical.lambda_tol * 0.5f64.powi(k);
        // a solved coupling above `lambda` provides an upper solution
        let start = match &previous {
            Some(p) => p.solution.clone(),
            None if hi >= lambda => best.solution.clone(),
            None => None,
        };
        let out = probe(
            reduced,
            lambda,
            &opts.solve,
            start.as_ref(),
            &mut unused.0,
            &mut unused.1,
        )?;
        let mut rung = LadderRung {
            lambda,
            status: out.status,
            iterations: out.iterations,
            below_previous: None,
        };
        if !out.is_solved() {
            lo = lo.max(lambda);
            ladder.push(rung);
            break;
        }
        if let (Some(prev), Some(cur)) = (
            previous.as_ref().and_then(|p| p.solution.as_ref()),
            &out.solution,
        ) {
            let below = cur.iter().zip(prev.iter()).all(|(c, p)| *c < *p + 1e-10);
            monotone &= below;
            rung.below_previous = Some(below);
        }
        ladder.push(rung);
        if lambda < hi {
            hi = lambda;
            best = out.clone();
        }
        previous = Some(out);
    }

    let residual_at = |lambda: f64, out: &SolveOutcome| -> Result<f64> {
        match &out.u {
            Some(u) => Ok(residual(&reduced.instance.with_lambda(lambda)?, u)?.norm_inf()),
            None => Ok(f64::INFINITY),
        }
    };

    // ‖res(λ)‖ ≤ ‖res(λ_hi)‖ + (λ_hi − λ)·sup|H|/λ
    let mut guard = 0;
    while guard < 80 && best.residual + 0.5 * (hi - lo) * extremum > opts.accept_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let out = probe(
            reduced,
            mid,
            &opts.solve,
            best.solution.as_ref(),
            &mut unused.0,
            &mut unused.1,
        )?;
        if out.is_solved() {
            hi = mid;
            best = out;
        } else {
            lo = mid;
        }
        guard += 1;
    }

    let lambda_c = 0.5 * (lo + hi);
    let residual_at_estimate = residual_at(lambda_c, &best)?;
    let negative = best.u.as_ref().is_some_and(|u| u.max() < 0.0);
    let status = if best.is_solved() && negative && residual_at_estimate <= opts.accept_tol {
        Status::Solved
    } else {
        Status::Inconclusive
    };
    Ok(CriticalSolution {
        lambda_c,
        lambda_lo: lo,
        lambda_hi: hi,
        outcome: best,
        residual_at_estimate,
        ladder,
        monotone,
        status,
    })
}
