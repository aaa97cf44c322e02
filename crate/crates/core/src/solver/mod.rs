//! Monotone upper/lower-solution iteration for
//!
//! * generalized: `Δu = −λ e^{g(u)}(e^{g(u)} − 1)² + 4π Σ_j δ_{p_j}`
//! * standard:    `Δu = λ eᵘ(eᵘ − 1) + 4π Σ_j δ_{p_j}`
//!
//! Writing `u = υ₀ + υ` with `Δυ₀ = −4πN/|V| + 4πΣδ_{p_j}` turns both into
//! `Δυ = H(υ₀ + υ) + 4πN/|V|`. Starting from the upper solution `ψ₀ = −υ₀`,
//! the scheme
//!
//! ```text
//! (Δ − K) ψₙ = H(υ₀ + ψₙ₋₁) − K ψₙ₋₁ + 4πN/|V|,    K > sup |H'|
//! ```
//!
//! decreases strictly and converges to the maximal solution whenever a lower
//! solution exists, and runs off to −∞ otherwise.

mod critical;
mod diagnostics;

pub use critical::{
    find_critical, solve_at_critical, CriticalOptions, CriticalResult, CriticalSolution,
    LadderRung, Probe,
};
pub use diagnostics::{diagnostics, growth_exponent, DiagnosticReport};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::calculus::laplacian;
use crate::error::{Error, Result};
use crate::graph::{VertexFunction, WeightedGraph};
use crate::linear::{
    dirac_source_indices, solve_poisson, PoissonProblem, ShiftedOperator, DEFAULT_LINEAR_TOL,
};
use crate::scalar::{lipschitz_bound, Nonlinearity, NonlinearityKind};

/// An equation variant with its vortex data, without a coupling.
#[derive(Debug, Clone)]
pub struct Instance<'g> {
    graph: &'g WeightedGraph,
    kind: NonlinearityKind,
    vortices: Vec<usize>,
}

impl<'g> Instance<'g> {
    pub fn new<S: AsRef<str>>(
        graph: &'g WeightedGraph,
        kind: NonlinearityKind,
        vortices: &[S],
    ) -> Result<Self> {
        let idx = vortices
            .iter()
            .map(|v| graph.vertex_index(v.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::from_indices(graph, kind, idx)
    }

    pub fn from_indices(
        graph: &'g WeightedGraph,
        kind: NonlinearityKind,
        vortices: Vec<usize>,
    ) -> Result<Self> {
        if vortices.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one vortex is required".into(),
            ));
        }
        if let Some(&bad) = vortices.iter().find(|&&p| p >= graph.len()) {
            return Err(Error::InvalidParameter(format!(
                "vortex index {bad} out of range"
            )));
        }
        Ok(Self {
            graph,
            kind,
            vortices,
        })
    }

    pub fn graph(&self) -> &'g WeightedGraph {
        self.graph
    }

    pub fn kind(&self) -> NonlinearityKind {
        self.kind
    }

    pub fn vortices(&self) -> &[usize] {
        &self.vortices
    }

    pub fn n_vortices(&self) -> usize {
        self.vortices.len()
    }

    /// Number of times each vertex appears in the vortex list.
    pub fn multiplicity(&self) -> Vec<usize> {
        let mut m = vec![0; self.graph.len()];
        for &p in &self.vortices {
            m[p] += 1;
        }
        m
    }

    pub fn has_repeated_vortices(&self) -> bool {
        self.multiplicity().iter().any(|&m| m > 1)
    }

    /// `4πN/|V|`.
    pub fn background(&self) -> f64 {
        4.0 * PI * self.vortices.len() as f64 / self.graph.volume().total()
    }

    /// Necessary condition on the coupling: `27πN/|V|` (generalized) or
    /// `16πN/|V|` (standard).
    pub fn analytic_bound(&self) -> f64 {
        self.kind.bound_coefficient() * PI * self.vortices.len() as f64
            / self.graph.volume().total()
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<ProblemSpec<'g>> {
        Nonlinearity::new(self.kind, lambda)?;
        Ok(ProblemSpec {
            instance: self.clone(),
            lambda,
        })
    }

    /// Solves for `υ₀` in the mean-zero gauge.
    pub fn reduce(&self, tol: f64) -> Result<Reduced<'g>> {
        let source = dirac_source_indices(self.graph, &self.vortices)?;
        let upsilon0 = solve_poisson(&PoissonProblem::new(self.graph, source)?, tol)?;
        Ok(Reduced {
            instance: self.clone(),
            upsilon0,
        })
    }
}

/// One PDE instance: equation, coupling and vortices on a graph.
#[derive(Debug, Clone)]
pub struct ProblemSpec<'g> {
    pub instance: Instance<'g>,
    pub lambda: f64,
}

impl<'g> ProblemSpec<'g> {
    pub fn new<S: AsRef<str>>(
        graph: &'g WeightedGraph,
        kind: NonlinearityKind,
        lambda: f64,
        vortices: &[S],
    ) -> Result<Self> {
        Instance::new(graph, kind, vortices)?.with_lambda(lambda)
    }

    pub fn graph(&self) -> &'g WeightedGraph {
        self.instance.graph
    }

    pub fn kind(&self) -> NonlinearityKind {
        self.instance.kind
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        Nonlinearity {
            kind: self.instance.kind,
            lambda: self.lambda,
        }
    }

    pub fn reduce(&self, tol: f64) -> Result<Reduced<'g>> {
        self.instance.reduce(tol)
    }
}

/// An instance together with its Poisson potential `υ₀`.
#[derive(Debug, Clone)]
pub struct Reduced<'g> {
    pub instance: Instance<'g>,
    pub upsilon0: VertexFunction,
}

impl<'g> Reduced<'g> {
    pub fn graph(&self) -> &'g WeightedGraph {
        self.instance.graph
    }

    /// Same instance with `υ₀` replaced by `υ₀ + c`; `u = υ₀ + υ` is unchanged.
    pub fn shift_gauge(&self, c: f64) -> Self {
        Self {
            instance: self.instance.clone(),
            upsilon0: self.upsilon0.map(|v| v + c),
        }
    }

    /// The upper solution `ψ₀ = −υ₀`.
    pub fn initial_upper(&self) -> VertexFunction {
        self.upsilon0.map(|v| -v)
    }

    /// `u = υ₀ + υ`.
    pub fn full(&self, upsilon: &VertexFunction) -> VertexFunction {
        self.upsilon0.add(upsilon)
    }

    /// Tolerance for `υ₀ + ψ` landing marginally above zero through rounding.
    fn regime_slack(&self) -> f64 {
        1e-12 * (1.0 + self.upsilon0.norm_inf())
    }
}

/// Default shift: `sup |H'| + max(1, 0.1λ)`.
pub fn default_shift(kind: NonlinearityKind, lambda: f64) -> f64 {
    lipschitz_bound(kind, lambda) + (0.1 * lambda).max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Solved,
    NoSolution,
    Inconclusive,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Solved => "Solved",
            Self::NoSolution => "NoSolution",
            Self::Inconclusive => "Inconclusive",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Shift `K`; defaults to [`default_shift`].
    pub shift: Option<f64>,
    /// Bound on both the step `‖ψₙ − ψₙ₋₁‖_∞` and the equation residual.
    pub tol: f64,
    pub max_iter: usize,
    /// Divergence floor for `min ψₙ`; defaults to `−10⁶(1 + ‖υ₀‖_∞)`.
    pub floor: Option<f64>,
    pub linear_tol: f64,
    /// Maximum number of trace entries kept; older entries are thinned.
    pub trace_cap: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            shift: None,
            tol: 1e-10,
            max_iter: 200_000,
            floor: None,
            linear_tol: DEFAULT_LINEAR_TOL,
            trace_cap: 4096,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidParameter(
                "max_iter must be at least 1".into(),
            ));
        }
        if !(self.linear_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "linear_tol must be positive".into(),
            ));
        }
        if self.trace_cap < 2 {
            return Err(Error::InvalidParameter(
                "trace_cap must be at least 2".into(),
            ));
        }
        if let Some(f) = self.floor {
            if !(f.is_finite() && f < 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "floor must be negative, got {f}"
                )));
            }
        }
        Ok(())
    }
}

/// One iterate of the scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationState {
    pub psi: VertexFunction,
    pub n: usize,
    /// `‖ψₙ − ψₙ₋₁‖_∞`; zero for the initial state.
    pub delta: f64,
    /// `min_x ψₙ(x)`.
    pub min: f64,
}

impl IterationState {
    pub fn initial(psi: VertexFunction) -> Self {
        let min = psi.min();
        Self {
            psi,
            n: 0,
            delta: 0.0,
            min,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub n: usize,
    pub delta: f64,
    pub min: f64,
}

#[derive(Debug, Clone)]
struct Trace {
    entries: Vec<TraceEntry>,
    stride: usize,
    cap: usize,
}

impl Trace {
    fn new(cap: usize) -> Self {
        Self {
            entries: Vec::new(),
            stride: 1,
            cap,
        }
    }

    fn push(&mut self, e: TraceEntry) {
        if !e.n.is_multiple_of(self.stride) {
            return;
        }
        self.entries.push(e);
        if self.entries.len() > self.cap {
            let stride = 2 * self.stride;
            self.entries.retain(|e| e.n % stride == 0);
            self.stride = stride;
        }
    }

    fn finish(mut self, last: TraceEntry) -> Vec<TraceEntry> {
        if self.entries.last().map(|e| e.n) != Some(last.n) {
            self.entries.push(last);
        }
        self.entries
    }
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: Status,
    pub kind: NonlinearityKind,
    pub lambda: f64,
    pub shift: f64,
    /// Why the run stopped.
    pub reason: String,
    /// The maximal solution `υ` (present iff solved).
    pub solution: Option<VertexFunction>,
    /// `u = υ₀ + υ` (present iff solved).
    pub u: Option<VertexFunction>,
    /// Last iterate, whatever the status.
    pub last_iterate: VertexFunction,
    pub iterations: usize,
    /// `‖Δυ − H(υ₀ + υ) − 4πN/|V|‖_∞` at the last iterate (NaN if never evaluated).
    pub residual: f64,
    pub delta: f64,
    /// `max_{n,x} (ψₙ(x) − ψₙ₋₁(x))`; nonpositive when the chain is monotone.
    pub max_increase: f64,
    /// A constant `c′ > 0` for which `υ₋ ≡ −c′` is a verified lower solution.
    pub constant_lower: Option<f64>,
    pub trace: Vec<TraceEntry>,
}

impl SolveOutcome {
    pub fn is_solved(&self) -> bool {
        self.status == Status::Solved
    }
}

/// Step limit for the final pass in the variable `u` (see [`Scheme::polish`]).
const POLISH_STEPS: usize = 1000;
/// Per-vertex relative step at which the final pass stops.
const POLISH_RTOL: f64 = 1e-12;

/// Monotone scheme at a fixed coupling and shift, sharing one factorization.
pub struct Scheme<'a> {
    reduced: &'a Reduced<'a>,
    nonlinearity: Nonlinearity,
    op: ShiftedOperator<'a>,
    background: f64,
    linear_tol: f64,
}

impl<'a> Scheme<'a> {
    /// Requires `K > sup |H'|` (`2λ` generalized, `λ` standard).
    pub fn new(reduced: &'a Reduced<'a>, lambda: f64, shift: f64, linear_tol: f64) -> Result<Self> {
        let nonlinearity = Nonlinearity::new(reduced.instance.kind, lambda)?;
        let bound = lipschitz_bound(nonlinearity.kind, lambda);
        if !(shift > bound) {
            return Err(Error::InvalidParameter(format!(
                "shift K = {shift} must exceed the Lipschitz bound {bound} of the {} reaction term",
                nonlinearity.kind
            )));
        }
        Ok(Self {
            reduced,
            nonlinearity,
            op: ShiftedOperator::new(reduced.graph(), shift)?,
            background: reduced.instance.background(),
            linear_tol,
        })
    }

    pub fn shift(&self) -> f64 {
        self.op.shift()
    }

    /// `H(υ₀ + ψ)`; fails when `υ₀ + ψ > 0` somewhere beyond rounding.
    pub fn reaction(&self, psi: &VertexFunction) -> Result<VertexFunction> {
        let slack = self.reduced.regime_slack();
        let mut out = Vec::with_capacity(psi.len());
        for (x, (&v0, &p)) in self.reduced.upsilon0.iter().zip(psi.iter()).enumerate() {
            let mut w = v0 + p;
            if w > 0.0 {
                if w > slack {
                    return Err(Error::OutOfDomain(format!(
                        "iterate left the regime u < 0 at vertex {} (u = {w})",
                        self.reduced.graph().id(x)
                    )));
                }
                w = 0.0;
            }
            out.push(self.nonlinearity.eval_closed(w));
        }
        Ok(VertexFunction(out))
    }

    /// `Δψ − h − 4πN/|V|` given `h = H(υ₀ + ψ)`.
    pub fn residual_with(
        &self,
        psi: &VertexFunction,
        h: &VertexFunction,
    ) -> Result<VertexFunction> {
        let lap = laplacian(self.reduced.graph(), psi)?;
        Ok(lap.zip_map(h, |l, h| l - h - self.background))
    }

    /// Solves `(Δ − K)ψ' = h − Kψ + 4πN/|V|`.
    pub fn next_with(&self, psi: &VertexFunction, h: &VertexFunction) -> Result<VertexFunction> {
        let k = self.op.shift();
        let rhs = h.zip_map(psi, |h, p| h - k * p + self.background);
        self.op.solve_from(&rhs, Some(psi), self.linear_tol)
    }

    pub fn step(&self, state: &IterationState) -> Result<IterationState> {
        let h = self.reaction(&state.psi)?;
        let psi = self.next_with(&state.psi, &h)?;
        Ok(self.advance(state, psi))
    }

    /// The same scheme written for `u = υ₀ + ψ`:
    /// `(Δ − K)uₙ = H(uₙ₋₁) − Kuₙ₋₁ + 4π Σ δ_{p_j}`, started from `min(u, 0)`.
    ///
    /// At large `λ` the maximal solution decays geometrically away from the
    /// vortices and drops below the rounding level of `υ₀ + ψ`. In this form
    /// the right-hand side is nonnegative (`K` exceeds the Lipschitz bound and
    /// `H(0) = 0`), so the M-matrix substitutions never cancel and tiny values
    /// keep their sign. Errors from the `ψ` form reach distant vertices only
    /// one hop per step, so the pass also runs until every vertex changes by
    /// at most [`POLISH_RTOL`] relative to itself. Returns `u`, the step count
    /// and the residual once that holds with `δ ≤ tol` and residual `≤ tol`,
    /// or `None` after `max_steps`.
    fn polish(
        &self,
        u: &VertexFunction,
        tol: f64,
        max_steps: usize,
    ) -> Result<Option<(VertexFunction, usize, f64)>> {
        let g = self.reduced.graph();
        let k = self.op.shift();
        let mult = self.reduced.instance.multiplicity();
        let dirac = g.function(|x| 4.0 * PI * mult[x] as f64 / g.measure()[x]);
        let mut u = u.map(|v| v.min(0.0));
        for step in 1..=max_steps {
            let h = u.map(|w| self.nonlinearity.eval_closed(w));
            let rhs = g.function(|x| h[x] - k * u[x] + dirac[x]);
            let next = self.op.solve_from(&rhs, Some(&u), self.linear_tol)?;
            let (delta, relative) =
                next.iter()
                    .zip(u.iter())
                    .fold((0.0f64, 0.0f64), |(d, r), (a, b)| {
                        let step = (a - b).abs();
                        (d.max(step), r.max(step / a.abs()))
                    });
            u = next;
            if delta <= tol && relative <= POLISH_RTOL && u.max() < 0.0 {
                let h = u.map(|w| self.nonlinearity.eval_closed(w));
                let lap = laplacian(g, &u)?;
                let res = g.function(|x| lap[x] - h[x] - dirac[x]).norm_inf();
                if res <= tol {
                    return Ok(Some((u, step, res)));
                }
            }
        }
        Ok(None)
    }

    fn advance(&self, state: &IterationState, psi: VertexFunction) -> IterationState {
        let delta = psi
            .iter()
            .zip(state.psi.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let min = psi.min();
        IterationState {
            psi,
            n: state.n + 1,
            delta,
            min,
        }
    }
}

/// One step of the scheme from `state`. Builds the factorization on every
/// call; use [`Scheme`] for repeated steps.
pub fn iterate_step(
    state: &IterationState,
    reduced: &Reduced<'_>,
    lambda: f64,
    shift: f64,
) -> Result<IterationState> {
    Scheme::new(reduced, lambda, shift, DEFAULT_LINEAR_TOL)?.step(state)
}

/// Largest `c′ > 0` window such that `υ₋ ≡ −c′` is a lower solution,
/// i.e. `0 ≥ H(υ₀ − c′) + 4πN/|V|` at every vertex. Returns the midpoint of
/// the feasible window after verifying the inequality directly.
pub fn constant_lower_solution(reduced: &Reduced<'_>, lambda: f64) -> Option<f64> {
    let kind = reduced.instance.kind;
    let nl = Nonlinearity::new(kind, lambda).ok()?;
    let background = reduced.instance.background();
    let (w_lo, w_hi) = kind.band(background / lambda)?;
    let lo = (reduced.upsilon0.max() - w_hi).max(0.0);
    let hi = reduced.upsilon0.min() - w_lo;
    if !(hi > lo) {
        return None;
    }
    let c = 0.5 * (lo + hi);
    if c <= 0.0 {
        return None;
    }
    let ok = reduced.upsilon0.iter().all(|&v0| {
        let w = v0 - c;
        w < 0.0 && nl.eval_closed(w) + background <= 0.0
    });
    ok.then_some(c)
}

/// Solves at `spec.lambda` from the upper solution `ψ₀ = −υ₀`.
pub fn solve_at(spec: &ProblemSpec<'_>, opts: &SolveOptions) -> Result<SolveOutcome> {
    let reduced = spec.reduce(opts.linear_tol)?;
    solve_reduced(&reduced, spec.lambda, opts, None)
}

/// Runs the scheme on a reduced instance. `start`, when given, must be an
/// upper solution dominating every solution at `lambda` (for instance the
/// maximal solution at a larger coupling); the default is `−υ₀`.
pub fn solve_reduced(
    reduced: &Reduced<'_>,
    lambda: f64,
    opts: &SolveOptions,
    start: Option<&VertexFunction>,
) -> Result<SolveOutcome> {
    opts.validate()?;
    let instance = &reduced.instance;
    let kind = instance.kind;
    Nonlinearity::new(kind, lambda)?;
    let shift = opts.shift.unwrap_or_else(|| default_shift(kind, lambda));
    let constant_lower = constant_lower_solution(reduced, lambda);

    let psi0 = match start {
        Some(s) => {
            reduced.graph().check_domain(s)?;
            s.clone()
        }
        None => reduced.initial_upper(),
    };
    let mut outcome = SolveOutcome {
        status: Status::Inconclusive,
        kind,
        lambda,
        shift,
        reason: String::new(),
        solution: None,
        u: None,
        last_iterate: psi0.clone(),
        iterations: 0,
        residual: f64::NAN,
        delta: 0.0,
        max_increase: f64::NEG_INFINITY,
        constant_lower,
        trace: Vec::new(),
    };

    let background = instance.background();
    let band = kind.band(background / lambda);
    let Some((w_lo, _)) = band else {
        outcome.status = Status::NoSolution;
        outcome.reason = format!(
            "lambda = {lambda} is below the necessary bound {} = {}*pi*N/|V|",
            instance.analytic_bound(),
            kind.bound_coefficient()
        );
        return Ok(outcome);
    };
    let floor = opts
        .floor
        .unwrap_or_else(|| -1e6 * (1.0 + reduced.upsilon0.norm_inf()));
    // every solution has max u ≥ w_lo, and ψₙ dominates every solution
    let certificate = w_lo - 1e-9 * (1.0 + w_lo.abs());

    let scheme = Scheme::new(reduced, lambda, shift, opts.linear_tol)?;
    let mut trace = Trace::new(opts.trace_cap);
    let mut state = IterationState::initial(psi0);
    let mut prev_delta = f64::INFINITY;
    trace.push(TraceEntry {
        n: 0,
        delta: 0.0,
        min: state.min,
    });

    loop {
        let h = match scheme.reaction(&state.psi) {
            Ok(h) => h,
            Err(e) => {
                outcome.reason = e.to_string();
                break;
            }
        };
        let res = scheme.residual_with(&state.psi, &h)?.norm_inf();
        outcome.residual = res;
        if state.n > 0 && state.delta <= opts.tol && res <= opts.tol {
            let u = reduced.full(&state.psi);
            // re-resolve u in its own variable so values near 0 keep their
            // sign and relative accuracy; the ψ-form result is the fallback
            let budget = opts.max_iter.saturating_sub(state.n).clamp(1, POLISH_STEPS);
            if let Some((u, steps, res)) = scheme.polish(&u, opts.tol, budget)? {
                let psi = u.zip_map(&reduced.upsilon0, |u, v0| u - v0);
                outcome.status = Status::Solved;
                outcome.reason = format!(
                    "converged: step {:.3e}, residual {res:.3e} after {steps} step(s) in u",
                    state.delta
                );
                outcome.residual = res;
                state = scheme.advance(&state, psi.clone());
                state.n += steps - 1;
                outcome.u = Some(u);
                outcome.solution = Some(psi);
            } else if u.max() < 0.0 {
                outcome.status = Status::Solved;
                outcome.reason =
                    format!("converged: step {:.3e}, residual {:.3e}", state.delta, res);
                outcome.u = Some(u);
                outcome.solution = Some(state.psi.clone());
            } else {
                outcome.reason = format!("converged to u with max {} >= 0", u.max());
            }
            break;
        }
        let max_u = state
            .psi
            .iter()
            .zip(reduced.upsilon0.iter())
            .fold(f64::NEG_INFINITY, |m, (p, v)| m.max(p + v));
        if max_u < certificate {
            outcome.status = Status::NoSolution;
            outcome.reason =
                format!("iterate fell below the necessary level: max u = {max_u:.6e} < {w_lo:.6e}");
            break;
        }
        if state.min < floor {
            outcome.status = Status::NoSolution;
            outcome.reason = format!("iterate fell below the floor {floor:.3e}");
            break;
        }
        if state.n >= opts.max_iter {
            if state.delta > opts.tol && state.delta >= prev_delta {
                outcome.status = Status::NoSolution;
                outcome.reason = format!(
                    "max_iter reached with non-decreasing step {:.3e}",
                    state.delta
                );
            } else {
                outcome.reason = format!(
                    "max_iter reached with step {:.3e} still shrinking, residual {:.3e}",
                    state.delta, res
                );
            }
            break;
        }

        let psi = scheme.next_with(&state.psi, &h)?;
        let increase = psi
            .iter()
            .zip(state.psi.iter())
            .fold(f64::NEG_INFINITY, |m, (a, b)| m.max(a - b));
        outcome.max_increase = outcome.max_increase.max(increase);
        prev_delta = state.delta;
        state = scheme.advance(&state, psi);
        trace.push(TraceEntry {
            n: state.n,
            delta: state.delta,
            min: state.min,
        });
    }

    outcome.iterations = state.n;
    outcome.delta = state.delta;
    outcome.trace = trace.finish(TraceEntry {
        n: state.n,
        delta: state.delta,
        min: state.min,
    });
    outcome.last_iterate = state.psi;
    Ok(outcome)
}

/// `Δu − H(u) − 4π·mult(x)/μ(x)` pointwise, for the full unknown `u`.
///
/// The generalized equation needs `u ≤ 0`; the standard one accepts any `u`.
pub fn residual(spec: &ProblemSpec<'_>, u: &VertexFunction) -> Result<VertexFunction> {
    let g = spec.graph();
    g.check_domain(u)?;
    u.check_finite()?;
    let nl = spec.nonlinearity();
    if spec.kind() == NonlinearityKind::Generalized {
        if let Some(x) = u.iter().position(|&v| v > 0.0) {
            return Err(Error::OutOfDomain(format!(
                "u = {} > 0 at vertex {}; the generalized equation needs u <= 0",
                u[x],
                g.id(x)
            )));
        }
    }
    let mult = spec.instance.multiplicity();
    let lap = laplacian(g, u)?;
    Ok(g.function(|x| {
        let dirac = 4.0 * PI * mult[x] as f64 / g.measure()[x];
        lap[x] - nl.eval_closed(u[x]) - dirac
    }))
}

#[cfg(test)]
mod tests;
