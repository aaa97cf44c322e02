//! Independent reference implementations shared by the integration tests.
//!
//! Nothing here calls into the solver: the dense Laplacian is assembled from
//! the edge list, the inverse of `f` is plain bisection, and the nonlinear
//! system is attacked with damped dense Newton from random starts.

#![allow(dead_code)]

use std::f64::consts::PI;

use csh_core::families::{generate, Family, GenerateOptions};
use csh_core::{NonlinearityKind, VertexFunction, WeightedGraph};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn k3() -> WeightedGraph {
    generate(Family::Complete(3), &GenerateOptions::default()).unwrap()
}

pub fn torus(a: usize, b: usize) -> WeightedGraph {
    generate(Family::Torus(a, b), &GenerateOptions::default()).unwrap()
}

pub fn random_graph(n: usize, p: f64, seed: u64, weighted: bool) -> WeightedGraph {
    let opts = GenerateOptions {
        seed,
        random_weights: weighted,
        random_measure: weighted,
    };
    generate(Family::Random { n, p }, &opts).unwrap()
}

/// Dense matrix of `Δ` built straight from the edge list.
pub fn dense_laplacian(g: &WeightedGraph) -> DMatrix<f64> {
    let n = g.len();
    let mu = g.measure();
    let mut m = DMatrix::zeros(n, n);
    for e in g.edges() {
        m[(e.a, e.b)] += e.weight / mu[e.a];
        m[(e.b, e.a)] += e.weight / mu[e.b];
        m[(e.a, e.a)] -= e.weight / mu[e.a];
        m[(e.b, e.b)] -= e.weight / mu[e.b];
    }
    m
}

pub fn apply(m: &DMatrix<f64>, u: &[f64]) -> Vec<f64> {
    (m * DVector::from_column_slice(u))
        .iter()
        .copied()
        .collect()
}

/// `1 + v − e^v`, written out without any care for cancellation.
pub fn f_naive(v: f64) -> f64 {
    1.0 + v - v.exp()
}

/// Inverse of `f` on `(−∞, 0]` by bisection on `[u − 1, u]`.
pub fn g_bisect(u: f64) -> f64 {
    let (mut lo, mut hi) = (u - 1.0, u);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f_naive(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `f` with full relative accuracy near 0: `−Σ_{k≥2} v^k/k!` for small `|v|`.
pub fn f_series(v: f64) -> f64 {
    if v.abs() >= 0.5 {
        return f_naive(v);
    }
    let (mut term, mut sum) = (v, 0.0);
    for k in 2..40 {
        term *= v / k as f64;
        sum -= term;
    }
    sum
}

/// Inverse of [`f_series`] by bisection on `[u − 1, u]`; accurate relative to
/// `|g(u)|` even when `u` is far below the rounding level of 1.
pub fn g_series_bisect(u: f64) -> f64 {
    let (mut lo, mut hi) = (u - 1.0, u.min(-f64::MIN_POSITIVE));
    if u > -1e-3 {
        // g(u) ≈ −√(−2u) here, so bracket tightly around it
        let s = (-2.0 * u).sqrt();
        (lo, hi) = (-2.0 * s, -0.5 * s);
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f_series(mid) < u {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Every connected simple graph on the labeled vertex set `0..n`.
pub fn connected_graphs(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let mut out = Vec::new();
    for mask in 0u32..(1 << pairs.len()) {
        let edges: Vec<(usize, usize)> = pairs
            .iter()
            .enumerate()
            .filter(|(k, _)| mask >> k & 1 == 1)
            .map(|(_, &e)| e)
            .collect();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(x) = stack.pop() {
            for &(a, b) in &edges {
                let y = if a == x {
                    b
                } else if b == x {
                    a
                } else {
                    continue;
                };
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        if seen.iter().all(|&s| s) {
            out.push(edges);
        }
    }
    out
}

pub fn unit_graph(n: usize, edges: &[(usize, usize)]) -> WeightedGraph {
    let vertices: Vec<(String, f64)> = (0..n).map(|i| (format!("v{i}"), 1.0)).collect();
    let edges: Vec<(String, String, f64)> = edges
        .iter()
        .map(|&(a, b)| (format!("v{a}"), format!("v{b}"), 1.0))
        .collect();
    WeightedGraph::new(&vertices, &edges).unwrap()
}

/// The full equation in Newton-friendly variables.
///
/// Generalized: unknown `v = g(u)`, so `u = f(v)` and the reaction term is the
/// polynomial `−λ e^v (e^v − 1)²`. Standard: unknown `u` itself.
pub struct NewtonOracle {
    lap: DMatrix<f64>,
    dirac: Vec<f64>,
    kind: NonlinearityKind,
    lambda: f64,
}

impl NewtonOracle {
    pub fn new(g: &WeightedGraph, kind: NonlinearityKind, lambda: f64, vortices: &[usize]) -> Self {
        let mut dirac = vec![0.0; g.len()];
        for &p in vortices {
            dirac[p] += 4.0 * PI / g.measure()[p];
        }
        Self {
            lap: dense_laplacian(g),
            dirac,
            kind,
            lambda,
        }
    }

    fn to_u(&self, z: &[f64]) -> Vec<f64> {
        match self.kind {
            NonlinearityKind::Generalized => z.iter().map(|&v| f_naive(v)).collect(),
            NonlinearityKind::Standard => z.to_vec(),
        }
    }

    fn lift(&self, u: &[f64]) -> Vec<f64> {
        match self.kind {
            NonlinearityKind::Generalized => u.iter().map(|&u| g_bisect(u)).collect(),
            NonlinearityKind::Standard => u.to_vec(),
        }
    }

    /// `Δu − H − 4π Σ δ` at `z`.
    fn system(&self, z: &[f64]) -> Vec<f64> {
        let lap_u = apply(&self.lap, &self.to_u(z));
        let l = self.lambda;
        (0..z.len())
            .map(|x| {
                let t = z[x].exp();
                let h = match self.kind {
                    NonlinearityKind::Generalized => -l * t * (t - 1.0) * (t - 1.0),
                    NonlinearityKind::Standard => l * t * (t - 1.0),
                };
                lap_u[x] - h - self.dirac[x]
            })
            .collect()
    }

    fn jacobian(&self, z: &[f64]) -> DMatrix<f64> {
        let n = z.len();
        let l = self.lambda;
        let mut j = self.lap.clone();
        for x in 0..n {
            let t = z[x].exp();
            match self.kind {
                NonlinearityKind::Generalized => {
                    for r in 0..n {
                        j[(r, x)] *= 1.0 - t;
                    }
                    j[(x, x)] += l * t * (1.0 - t) * (1.0 - 3.0 * t);
                }
                NonlinearityKind::Standard => j[(x, x)] -= l * (2.0 * t * t - t),
            }
        }
        j
    }

    fn admissible(&self, z: &[f64]) -> bool {
        z.iter().all(|v| v.is_finite())
            && (self.kind == NonlinearityKind::Standard || z.iter().all(|&v| v < 0.0))
    }

    /// Damped Newton from `u_start`; returns `u` at a root with
    /// `‖F‖_∞ ≤ 1e-10·(1 + λ)`.
    pub fn newton(&self, u_start: &[f64]) -> Option<Vec<f64>> {
        let tol = 1e-10 * (1.0 + self.lambda);
        let norm = |r: &[f64]| r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut z = self.lift(u_start);
        if !self.admissible(&z) {
            return None;
        }
        let mut r = self.system(&z);
        for _ in 0..200 {
            let rn = norm(&r);
            if rn <= tol {
                return Some(self.to_u(&z));
            }
            let step = self
                .jacobian(&z)
                .lu()
                .solve(&DVector::from_vec(r.clone()))?;
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..50 {
                let trial: Vec<f64> = z
                    .iter()
                    .zip(step.iter())
                    .map(|(a, s)| a - alpha * s)
                    .collect();
                if self.admissible(&trial) {
                    let tr = self.system(&trial);
                    if norm(&tr) < (1.0 - 1e-4 * alpha) * rn {
                        z = trial;
                        r = tr;
                        accepted = true;
                        break;
                    }
                }
                alpha *= 0.5;
            }
            if !accepted {
                return None;
            }
        }
        (norm(&r) <= tol).then(|| self.to_u(&z))
    }

    /// Distinct roots found from `starts` random points in `[−20, 0)^V` plus
    /// the `extra` starts, deduplicated at 1e-6.
    pub fn roots(&self, starts: usize, extra: &[Vec<f64>], seed: u64) -> Vec<Vec<f64>> {
        let n = self.dirac.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut all: Vec<Vec<f64>> = extra.to_vec();
        for _ in 0..starts {
            all.push((0..n).map(|_| rng.gen_range(-20.0..0.0)).collect());
        }
        let mut roots: Vec<Vec<f64>> = Vec::new();
        for s in &all {
            if let Some(u) = self.newton(s) {
                let dup = roots
                    .iter()
                    .any(|r| r.iter().zip(&u).all(|(a, b)| (a - b).abs() <= 1e-6));
                if !dup {
                    roots.push(u);
                }
            }
        }
        roots
    }
}

pub fn max_abs_diff(a: &VertexFunction, b: &VertexFunction) -> f64 {
    a.iter()
        .zip(b.iter())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}
