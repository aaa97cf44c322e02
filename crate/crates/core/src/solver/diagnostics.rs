use serde::Serialize;

use crate::calculus::{gradient_norm, integrate, mean, sobolev_norm};
use crate::error::{Error, Result};
use crate::solver::{Reduced, SolveOutcome};

/// Norms of a maximal solution `υ_λ = ῡ_λ + υ′_λ` (mean plus mean-zero part).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticReport {
    pub lambda: f64,
    /// `ῡ_λ = (1/|V|) ∫ υ_λ dμ`.
    pub mean: f64,
    /// `∫ υ′_λ dμ`, zero up to rounding.
    pub fluctuation_integral: f64,
    /// `‖∇υ′_λ‖₂`.
    pub grad_norm: f64,
    /// `‖υ_λ‖_{W^{1,2}}`.
    pub sobolev_norm: f64,
    /// `−(1/|V|) ∫ υ₀ dμ`, an upper bound for `ῡ_λ`.
    pub mean_upper_bound: f64,
    pub min_u: f64,
    pub mean_u: f64,
}

pub fn diagnostics(reduced: &Reduced<'_>, outcome: &SolveOutcome) -> Result<DiagnosticReport> {
    let (Some(upsilon), Some(u)) = (&outcome.solution, &outcome.u) else {
        return Err(Error::InvalidParameter(format!(
            "diagnostics need a solved outcome, got {}",
            outcome.status
        )));
    };
    let g = reduced.graph();
    let bar = mean(g, upsilon)?;
    let fluctuation = upsilon.map(|v| v - bar);
    Ok(DiagnosticReport {
        lambda: outcome.lambda,
        mean: bar,
        fluctuation_integral: integrate(g, &fluctuation)?,
        grad_norm: gradient_norm(g, &fluctuation)?,
        sobolev_norm: sobolev_norm(g, upsilon)?,
        mean_upper_bound: -mean(g, &reduced.upsilon0)?,
        min_u: u.min(),
        mean_u: mean(g, u)?,
    })
}

/// Least-squares slope of `ln y` against `ln λ`; `None` with fewer than two
/// usable points.
pub fn growth_exponent(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(l, y)| *l > 0.0 && *y > 0.0)
        .map(|(l, y)| (l.ln(), y.ln()))
        .collect();
    if logs.len() < 2 {
        return None;
    }
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
