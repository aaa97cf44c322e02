//! The two linear problems behind the scheme.
//!
//! * the singular Poisson problem `Δυ₀ = s` with `∫s dμ = 0`, solved in the
//!   mean-zero gauge `∫υ₀ dμ = 0`;
//! * the shifted problem `(Δ − K)ψ = b`, `K > 0`, solved as the SPD system
//!   `(KM + L)ψ = −Mb` where `L` is the combinatorial Laplacian and
//!   `M = diag(μ)`.
//!
//! Graphs with fewer than [`DENSE_LIMIT`] vertices use a dense Cholesky
//! factor computed once; larger graphs use conjugate gradients with a
//! diagonal preconditioner.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::calculus::{integrate, laplacian};
use crate::error::{Error, Result};
use crate::graph::{VertexFunction, WeightedGraph};
use crate::sparse::CsrMatrix;

/// Vertex count from which the iterative path is used.
pub const DENSE_LIMIT: usize = 200;

/// Default relative tolerance for the linear solves.
pub const DEFAULT_LINEAR_TOL: f64 = 1e-13;

/// `s(x) = −4πN/|V| + 4π·mult(x)/μ(x)`, the source of `Δυ₀ = s`.
pub fn dirac_source<S: AsRef<str>>(g: &WeightedGraph, vortices: &[S]) -> Result<VertexFunction> {
    let idx = vortices
        .iter()
        .map(|v| g.vertex_index(v.as_ref()))
        .collect::<Result<Vec<_>>>()?;
    dirac_source_indices(g, &idx)
}

pub fn dirac_source_indices(g: &WeightedGraph, vortices: &[usize]) -> Result<VertexFunction> {
    if vortices.is_empty() {
        return Err(Error::InvalidParameter(
            "at least one vortex is required".into(),
        ));
    }
    if let Some(&bad) = vortices.iter().find(|&&p| p >= g.len()) {
        return Err(Error::InvalidParameter(format!(
            "vortex index {bad} out of range"
        )));
    }
    let background = -4.0 * PI * vortices.len() as f64 / g.volume().total();
    let mut s = g.constant(background);
    for &p in vortices {
        s[p] += 4.0 * PI / g.measure()[p];
    }
    Ok(s)
}

/// `Δυ₀ = source` on a connected graph with `∫ source dμ = 0`.
#[derive(Debug, Clone)]
pub struct PoissonProblem<'g> {
    graph: &'g WeightedGraph,
    source: VertexFunction,
}

impl<'g> PoissonProblem<'g> {
    /// Checks compatibility: `|∫ s dμ| ≤ 1e-10 · ∫ |s| dμ`.
    pub fn new(graph: &'g WeightedGraph, source: VertexFunction) -> Result<Self> {
        graph.check_domain(&source)?;
        source.check_finite()?;
        let integral = integrate(graph, &source)?;
        let scale = integrate(graph, &source.map(f64::abs))?;
        let tolerance = 1e-10 * scale;
        if integral.abs() > tolerance {
            return Err(Error::IncompatibleSource {
                integral,
                tolerance,
            });
        }
        Ok(Self { graph, source })
    }

    pub fn graph(&self) -> &'g WeightedGraph {
        self.graph
    }

    pub fn source(&self) -> &VertexFunction {
        &self.source
    }
}

/// Solves `Δυ₀ = s` with `∫υ₀ dμ = 0`; `‖Δυ₀ − s‖_∞ ≤ tol·‖s‖_∞`.
pub fn solve_poisson(p: &PoissonProblem<'_>, tol: f64) -> Result<VertexFunction> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let g = p.graph;
    let n = g.len();
    let mu = g.measure();
    let s_inf = p.source.norm_inf();
    if s_inf == 0.0 {
        return Ok(g.constant(0.0));
    }
    // L υ = −M s
    let rhs: Vec<f64> = mu
        .iter()
        .zip(p.source.iter())
        .map(|(m, s)| -m * s)
        .collect();
    let vol = g.volume().total();

    let mut x = if n < DENSE_LIMIT {
        // L + m mᵀ/|V| is SPD and its solution is automatically mean-zero
        let mut a = g.laplacian_matrix().to_dense();
        for i in 0..n {
            for j in 0..n {
                a[(i, j)] += mu[i] * mu[j] / vol;
            }
        }
        let chol = Cholesky::new(a)
            .ok_or_else(|| Error::InvalidParameter("Poisson matrix not SPD".into()))?;
        chol.solve(&DVector::from_vec(rhs)).as_slice().to_vec()
    } else {
        let diag = g.laplacian_matrix().diagonal();
        let project = |x: &mut [f64]| {
            let mean: f64 = x.iter().zip(mu).map(|(v, m)| v * m).sum::<f64>() / vol;
            x.iter_mut().for_each(|v| *v -= mean);
        };
        let stop = |r: &[f64]| {
            r.iter()
                .zip(mu)
                .fold(0.0f64, |m, (r, mu)| m.max((r / mu).abs()))
                <= tol * s_inf
        };
        let mut x = vec![0.0; n];
        pcg(
            g.laplacian_matrix(),
            None,
            &diag,
            &rhs,
            &mut x,
            stop,
            project,
            20 * n + 200,
        )?;
        x
    };
    let mean: f64 = x.iter().zip(mu).map(|(v, m)| v * m).sum::<f64>() / vol;
    x.iter_mut().for_each(|v| *v -= mean);
    Ok(VertexFunction(x))
}

enum Factor {
    Dense(Cholesky<f64, Dyn>),
    Iterative { diag: Vec<f64> },
}

/// `Δ − K` on a fixed graph, factored once for repeated solves.
pub struct ShiftedOperator<'g> {
    graph: &'g WeightedGraph,
    shift: f64,
    factor: Factor,
}

impl std::fmt::Debug for ShiftedOperator<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ShiftedOperator")
            .field("vertices", &self.graph.len())
            .field("shift", &self.shift)
            .field("dense", &matches!(self.factor, Factor::Dense(_)))
            .finish()
    }
}

impl<'g> ShiftedOperator<'g> {
    pub fn new(graph: &'g WeightedGraph, shift: f64) -> Result<Self> {
        if !(shift.is_finite() && shift > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "shift K must be positive, got {shift}"
            )));
        }
        let n = graph.len();
        let mu = graph.measure();
        let factor = if n < DENSE_LIMIT {
            let mut a: DMatrix<f64> = graph.laplacian_matrix().to_dense();
            for i in 0..n {
                a[(i, i)] += shift * mu[i];
            }
            Factor::Dense(
                Cholesky::new(a)
                    .ok_or_else(|| Error::InvalidParameter("shifted matrix not SPD".into()))?,
            )
        } else {
            let diag = graph
                .laplacian_matrix()
                .diagonal()
                .iter()
                .zip(mu)
                .map(|(d, m)| d + shift * m)
                .collect();
            Factor::Iterative { diag }
        };
        Ok(Self {
            graph,
            shift,
            factor,
        })
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn graph(&self) -> &'g WeightedGraph {
        self.graph
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.factor, Factor::Dense(_))
    }

    /// `(Δ − K)ψ`.
    pub fn apply(&self, psi: &VertexFunction) -> Result<VertexFunction> {
        let lap = laplacian(self.graph, psi)?;
        Ok(lap.zip_map(psi, |l, p| l - self.shift * p))
    }

    /// Solves `(Δ − K)ψ = b` with `‖(Δ − K)ψ − b‖_∞ ≤ tol·max(1, ‖b‖_∞)`.
    pub fn solve(&self, b: &VertexFunction, tol: f64) -> Result<VertexFunction> {
        self.solve_from(b, None, tol)
    }

    /// As [`Self::solve`], starting the iterative path from `guess`.
    pub fn solve_from(
        &self,
        b: &VertexFunction,
        guess: Option<&VertexFunction>,
        tol: f64,
    ) -> Result<VertexFunction> {
        let g = self.graph;
        g.check_domain(b)?;
        if let Some(x0) = guess {
            g.check_domain(x0)?;
        }
        let mu = g.measure();
        let rhs: Vec<f64> = mu.iter().zip(b.iter()).map(|(m, b)| -m * b).collect();
        match &self.factor {
            Factor::Dense(chol) => Ok(VertexFunction(
                chol.solve(&DVector::from_vec(rhs)).as_slice().to_vec(),
            )),
            Factor::Iterative { diag } => {
                let target = tol * b.norm_inf().max(1.0);
                let stop = |r: &[f64]| {
                    r.iter()
                        .zip(mu)
                        .fold(0.0f64, |m, (r, mu)| m.max((r / mu).abs()))
                        <= target
                };
                let mut x = guess.map_or_else(|| vec![0.0; g.len()], |x0| x0.0.clone());
                let shift_mass: Vec<f64> = mu.iter().map(|m| self.shift * m).collect();
                pcg(
                    g.laplacian_matrix(),
                    Some(&shift_mass),
                    diag,
                    &rhs,
                    &mut x,
                    stop,
                    |_| {},
                    20 * g.len() + 200,
                )?;
                Ok(VertexFunction(x))
            }
        }
    }
}

/// Solves `(A + diag(extra)) x = b` by Jacobi-preconditioned conjugate
/// gradients. `stop` sees the unpreconditioned residual; `project` is applied
/// to the iterate after every update.
#[allow(clippy::too_many_arguments)]
fn pcg(
    a: &CsrMatrix,
    extra: Option<&[f64]>,
    diag: &[f64],
    b: &[f64],
    x: &mut [f64],
    stop: impl Fn(&[f64]) -> bool,
    project: impl Fn(&mut [f64]),
    max_iter: usize,
) -> Result<usize> {
    let n = b.len();
    let matvec = |v: &[f64], out: &mut [f64]| {
        a.mul_vec_into(v, out);
        if let Some(e) = extra {
            out.iter_mut()
                .zip(e.iter().zip(v))
                .for_each(|(o, (e, v))| *o += e * v);
        }
    };
    let mut ax = vec![0.0; n];
    matvec(x, &mut ax);
    let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    if stop(&r) {
        return Ok(0);
    }
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(r, z)| r * z).sum();
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        matvec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(p, a)| p * a).sum();
        if pap <= 0.0 {
            break;
        }
        let alpha = rz / pap;
        x.iter_mut().zip(&p).for_each(|(x, p)| *x += alpha * p);
        r.iter_mut().zip(&ap).for_each(|(r, a)| *r -= alpha * a);
        project(x);
        if stop(&r) {
            return Ok(it);
        }
        z.iter_mut()
            .zip(r.iter().zip(diag))
            .for_each(|(z, (r, d))| *z = r / d);
        let rz_new: f64 = r.iter().zip(&z).map(|(r, z)| r * z).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        p.iter_mut().zip(&z).for_each(|(p, z)| *p = z + beta * *p);
    }
    // recompute the true residual before giving up; the recurrence drifts
    matvec(x, &mut ax);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    if stop(&r) {
        return Ok(max_iter);
    }
    Err(Error::LinearSolve {
        residual: r.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        iterations: max_iter,
    })
}
