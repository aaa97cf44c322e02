//! Discrete calculus on a [`WeightedGraph`]: μ-Laplacian, gradient form,
//! integral, `W^{1,2}` norm, the maximum-principle check and the Poincaré
//! constant.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::graph::{VertexFunction, WeightedGraph};

/// `Δu(x) = (1/μ(x)) Σ_{y∼x} ω_xy (u(y) − u(x))`.
pub fn laplacian(g: &WeightedGraph, u: &VertexFunction) -> Result<VertexFunction> {
    g.check_domain(u)?;
    let mu = g.measure();
    Ok(g.function(|x| {
        let s: f64 = g.neighbors(x).map(|(y, w)| w * (u[y] - u[x])).sum();
        s / mu[x]
    }))
}

/// `Γ(u,v)(x) = (1/2μ(x)) Σ_{y∼x} ω_xy (u(y) − u(x))(v(y) − v(x))`.
pub fn gradient_form(
    g: &WeightedGraph,
    u: &VertexFunction,
    v: &VertexFunction,
) -> Result<VertexFunction> {
    g.check_domain(u)?;
    g.check_domain(v)?;
    let mu = g.measure();
    Ok(g.function(|x| {
        let s: f64 = g
            .neighbors(x)
            .map(|(y, w)| w * (u[y] - u[x]) * (v[y] - v[x]))
            .sum();
        s / (2.0 * mu[x])
    }))
}

/// `|∇u|² = Γ(u,u)`.
pub fn gradient_sq(g: &WeightedGraph, u: &VertexFunction) -> Result<VertexFunction> {
    gradient_form(g, u, u)
}

/// `∫_V u dμ = Σ_x μ(x) u(x)`.
pub fn integrate(g: &WeightedGraph, u: &VertexFunction) -> Result<f64> {
    g.check_domain(u)?;
    Ok(g.measure().iter().zip(u.iter()).map(|(m, v)| m * v).sum())
}

/// Mean value `(1/|V|) ∫_V u dμ`.
pub fn mean(g: &WeightedGraph, u: &VertexFunction) -> Result<f64> {
    Ok(integrate(g, u)? / g.volume().total())
}

/// `(∫_V |∇u|² dμ)^{1/2}`.
pub fn gradient_norm(g: &WeightedGraph, u: &VertexFunction) -> Result<f64> {
    Ok(integrate(g, &gradient_sq(g, u)?)?.max(0.0).sqrt())
}

/// `‖u‖_{W^{1,2}} = (∫_V (|∇u|² + u²) dμ)^{1/2}`.
pub fn sobolev_norm(g: &WeightedGraph, u: &VertexFunction) -> Result<f64> {
    let grad = gradient_sq(g, u)?;
    let density = grad.zip_map(u, |gr, v| gr + v * v);
    Ok(integrate(g, &density)?.max(0.0).sqrt())
}

/// Outcome of checking the maximum principle `Δu − Ku ≥ 0 ⇒ u ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxPrincipleCheck {
    /// `min_x (Δu − Ku)(x)`.
    pub premise_min: f64,
    /// `max_x u(x)`.
    pub max_value: f64,
    pub premise_holds: bool,
    pub conclusion_holds: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaxPrincipleVerdict {
    /// Premise and conclusion both hold.
    Confirmed,
    /// The premise fails, nothing is asserted.
    PremiseViolated,
    /// The premise holds but `u > 0` somewhere.
    Contradiction,
}

impl MaxPrincipleCheck {
    pub fn verdict(&self) -> MaxPrincipleVerdict {
        match (self.premise_holds, self.conclusion_holds) {
            (false, _) => MaxPrincipleVerdict::PremiseViolated,
            (true, true) => MaxPrincipleVerdict::Confirmed,
            (true, false) => MaxPrincipleVerdict::Contradiction,
        }
    }
}

pub fn check_max_principle(
    g: &WeightedGraph,
    u: &VertexFunction,
    k: f64,
) -> Result<MaxPrincipleCheck> {
    check_max_principle_with_slack(g, u, k, 0.0)
}

/// As [`check_max_principle`], accepting `Δu − Ku ≥ −slack` and `u ≤ slack`.
pub fn check_max_principle_with_slack(
    g: &WeightedGraph,
    u: &VertexFunction,
    k: f64,
    slack: f64,
) -> Result<MaxPrincipleCheck> {
    if !(k.is_finite() && k > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "max principle needs K > 0, got {k}"
        )));
    }
    let lap = laplacian(g, u)?;
    let premise_min = lap.zip_map(u, |l, v| l - k * v).min();
    let max_value = u.max();
    Ok(MaxPrincipleCheck {
        premise_min,
        max_value,
        premise_holds: premise_min >= -slack,
        conclusion_holds: max_value <= slack,
    })
}

/// Smallest `C` with `∫u² dμ ≤ C ∫|∇u|² dμ` for all mean-zero `u`: the
/// reciprocal of the smallest nonzero eigenvalue of `L φ = σ M φ`.
///
/// A single-vertex graph has no nonzero mean-zero functions and returns 0.
pub fn estimate_poincare_constant(g: &WeightedGraph) -> Result<f64> {
    let n = g.len();
    if n == 1 {
        return Ok(0.0);
    }
    let inv_sqrt_mu: Vec<f64> = g.measure().iter().map(|m| 1.0 / m.sqrt()).collect();
    let mut s: DMatrix<f64> = g.laplacian_matrix().to_dense();
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] *= inv_sqrt_mu[i] * inv_sqrt_mu[j];
        }
    }
    let mut eig: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    let scale = eig[n - 1].abs().max(f64::MIN_POSITIVE);
    let zeros = eig.iter().filter(|&&e| e.abs() <= 1e-10 * scale).count();
    if zeros != 1 {
        return Err(Error::InvalidParameter(format!(
            "Laplacian kernel has dimension {zeros}; graph must be connected"
        )));
    }
    Ok(1.0 / eig[1])
}
