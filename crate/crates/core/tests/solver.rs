//! End-to-end scenarios for the solver against independent oracles.

mod common;

use std::f64::consts::PI;

use csh_core::solver::growth_exponent;
use csh_core::{
    diagnostics, find_critical, residual, solve_at, CriticalOptions, Instance, NonlinearityKind,
    ShiftedOperator, SolveOptions, Status, VertexFunction, WeightedGraph,
};
use nalgebra::{DMatrix, DVector};

use common::*;

#[test]
fn k3_at_200_matches_newton_from_the_scheme_output() {
    let g = k3();
    let inst = Instance::new(&g, NonlinearityKind::Generalized, &["a"]).unwrap();
    let spec = inst.with_lambda(200.0).unwrap();
    let out = solve_at(&spec, &SolveOptions::default()).unwrap();
    assert_eq!(out.status, Status::Solved, "{}", out.reason);
    let u = out.u.unwrap();
    assert!(u.max() < 0.0);
    assert!(residual(&spec, &u).unwrap().norm_inf() <= 1e-8);

    let oracle = NewtonOracle::new(&g, NonlinearityKind::Generalized, 200.0, &[0]);
    let root = oracle
        .newton(u.values())
        .expect("Newton converges near the scheme output");
    let root = VertexFunction(root);
    assert!(max_abs_diff(&root, &u) <= 1e-8);
    // the oracle root satisfies the equation as evaluated by the library
    assert!(residual(&spec, &root).unwrap().norm_inf() <= 1e-8);
}

#[test]
fn below_the_bound_is_rejected_without_iterating() {
    let g = k3();
    for (kind, bound) in [
        (NonlinearityKind::Generalized, 9.0 * PI),
        (NonlinearityKind::Standard, 16.0 * PI / 3.0),
    ] {
        let inst = Instance::new(&g, kind, &["a"]).unwrap();
        assert!((inst.analytic_bound() - bound).abs() < 1e-12);
        let out = solve_at(
            &inst.with_lambda(0.999 * bound).unwrap(),
            &SolveOptions::default(),
        )
        .unwrap();
        assert_eq!(out.status, Status::NoSolution);
        assert_eq!(out.iterations, 0);
    }
}

#[test]
fn bound_uses_total_measure() {
    let g = WeightedGraph::new(
        &[("a", 2.0), ("b", 0.5), ("c", 1.5)],
        &[("a", "b", 1.0), ("b", "c", 2.0)],
    )
    .unwrap();
    let inst = Instance::new(&g, NonlinearityKind::Standard, &["a", "c"]).unwrap();
    assert!((inst.analytic_bound() - 16.0 * PI * 2.0 / 4.0).abs() < 1e-12);
    let spec = inst.with_lambda(6.0 * inst.analytic_bound()).unwrap();
    let out = solve_at(&spec, &SolveOptions::default()).unwrap();
    assert_eq!(out.status, Status::Solved, "{}", out.reason);
    let u = out.u.unwrap();
    assert!(residual(&spec, &u).unwrap().norm_inf() <= 1e-8);
    let roots =
        NewtonOracle::new(&g, NonlinearityKind::Standard, spec.lambda, &[0, 2]).roots(100, &[], 5);
    assert!(!roots.is_empty());
    for r in roots {
        assert!(r.iter().zip(u.iter()).all(|(a, b)| *a <= b + 1e-8));
    }
}

#[test]
fn repeated_vortex_counts_twice() {
    let g = torus(3, 4);
    let inst = Instance::new(&g, NonlinearityKind::Generalized, &["b", "b"]).unwrap();
    assert!(inst.has_repeated_vortices());
    assert_eq!(inst.multiplicity()[1], 2);
    let spec = inst.with_lambda(4.0 * inst.analytic_bound()).unwrap();
    let out = solve_at(&spec, &SolveOptions::default()).unwrap();
    let u = out.u.expect("solved");
    let oracle = NewtonOracle::new(&g, NonlinearityKind::Generalized, spec.lambda, &[1, 1]);
    let root = oracle.newton(u.values()).unwrap();
    assert!(root
        .iter()
        .zip(u.iter())
        .all(|(a, b)| (a - b).abs() <= 1e-8));
}

#[test]
fn iterative_shifted_solve_matches_dense_oracle() {
    let g = random_graph(240, 0.03, 9, true);
    let k = 3.5;
    let op = ShiftedOperator::new(&g, k).unwrap();
    assert!(!op.is_dense());
    let b = g.function(|x| ((x * 37) % 11) as f64 - 5.0);
    let psi = op.solve(&b, 1e-13).unwrap();
    let m = dense_laplacian(&g) - DMatrix::identity(g.len(), g.len()) * k;
    let exact = m
        .lu()
        .solve(&DVector::from_column_slice(b.values()))
        .unwrap();
    let scale = exact.amax();
    for (a, e) in psi.iter().zip(exact.iter()) {
        assert!((a - e).abs() <= 1e-10 * scale);
    }
}

#[test]
fn large_instance_agrees_across_paths() {
    // the same torus solved through the iterative path, and a coarser copy
    // through the dense one, both meet the residual target
    for (a, b) in [(10, 10), (15, 15)] {
        let g = torus(a, b);
        let inst = Instance::new(&g, NonlinearityKind::Standard, &["a"]).unwrap();
        let spec = inst.with_lambda(4.0 * inst.analytic_bound()).unwrap();
        let out = solve_at(&spec, &SolveOptions::default()).unwrap();
        let u = out.u.expect("solved");
        assert!(residual(&spec, &u).unwrap().norm_inf() <= 1e-8);
        assert!(out.max_increase <= 1e-13);
    }
}

#[test]
fn diagnostics_along_a_sweep() {
    let g = k3();
    for kind in [NonlinearityKind::Generalized, NonlinearityKind::Standard] {
        let inst = Instance::new(&g, kind, &["a"]).unwrap();
        let crit = find_critical(&inst, &CriticalOptions::default()).unwrap();
        let reduced = inst.reduce(1e-13).unwrap();
        let (lo, hi) = (crit.lambda_c + 0.1, 10.0 * crit.lambda_c);
        let mut ratios = Vec::new();
        let mut grads = Vec::new();
        let mut previous_min: Option<f64> = None;
        for i in 0..12 {
            let lambda = lo + (hi - lo) * i as f64 / 11.0;
            let out =
                solve_at(&inst.with_lambda(lambda).unwrap(), &SolveOptions::default()).unwrap();
            let d = diagnostics(&reduced, &out).unwrap();
            assert!(d.fluctuation_integral.abs() <= 1e-12 * (1.0 + d.mean.abs()));
            assert!(d.mean < d.mean_upper_bound);
            assert!(d.mean_upper_bound.abs() <= 1e-12);
            if let Some(m) = previous_min {
                assert!(d.min_u > m);
            }
            previous_min = Some(d.min_u);
            ratios.push(d.grad_norm / lambda);
            grads.push((lambda, d.grad_norm));
        }
        // the gradient of the fluctuation grows at most linearly
        let max_ratio = ratios.iter().cloned().fold(0.0, f64::max);
        assert!(
            max_ratio.is_finite() && max_ratio < 1.0,
            "{kind}: {max_ratio}"
        );
        let exponent = growth_exponent(&grads).unwrap();
        assert!(exponent <= 1.0 + 1e-9, "{kind}: exponent {exponent}");
    }
}

#[test]
fn diagnostics_refuse_unsolved_outcomes() {
    let g = k3();
    let inst = Instance::new(&g, NonlinearityKind::Generalized, &["a"]).unwrap();
    let out = solve_at(&inst.with_lambda(30.0).unwrap(), &SolveOptions::default()).unwrap();
    assert_eq!(out.status, Status::NoSolution);
    assert!(diagnostics(&inst.reduce(1e-13).unwrap(), &out).is_err());
}

#[test]
fn tiny_iteration_budget_is_inconclusive_not_no_solution() {
    let g = k3();
    let inst = Instance::new(&g, NonlinearityKind::Generalized, &["a"]).unwrap();
    let opts = SolveOptions {
        max_iter: 3,
        ..SolveOptions::default()
    };
    let out = solve_at(&inst.with_lambda(200.0).unwrap(), &opts).unwrap();
    assert_eq!(out.status, Status::Inconclusive);
    assert!(out.solution.is_none());
}

/// Reaction terms written out independently, accurate relative to `|H(u)|`
/// near `u = 0`.
fn reaction_oracle(kind: NonlinearityKind, lambda: f64, u: f64) -> f64 {
    match kind {
        NonlinearityKind::Standard => lambda * u.exp() * u.exp_m1(),
        NonlinearityKind::Generalized => {
            let v = g_series_bisect(u);
            let one_minus_t = -v.exp_m1();
            -lambda * v.exp() * one_minus_t * one_minus_t
        }
    }
}

#[test]
fn values_far_below_rounding_stay_negative_and_accurate() {
    // path x4 – x3 – x0 – x1 – x2 – x5 with the vortex at the leaf x4; at these
    // couplings u at x5 is around 1e-20, far below the rounding level of the
    // O(1) singular part
    let vertices: Vec<(String, f64)> = [0.5, 0.5, 0.9295370069774371, 0.5, 0.5, 0.5]
        .iter()
        .enumerate()
        .map(|(i, &m)| (format!("x{i}"), m))
        .collect();
    let edges: Vec<(String, String, f64)> = [(0, 1), (1, 2), (0, 3), (3, 4), (2, 5)]
        .iter()
        .map(|&(a, b)| (format!("x{a}"), format!("x{b}"), 0.5))
        .collect();
    let g = WeightedGraph::new(&vertices, &edges).unwrap();
    let lap = dense_laplacian(&g);
    for (kind, lambda) in [
        (NonlinearityKind::Generalized, 272.86528798074784),
        (NonlinearityKind::Generalized, 671.3509329156325),
        (NonlinearityKind::Standard, 397.83758987593035),
    ] {
        let inst = Instance::new(&g, kind, &["x4"]).unwrap();
        let out = solve_at(&inst.with_lambda(lambda).unwrap(), &SolveOptions::default()).unwrap();
        assert_eq!(
            out.status,
            Status::Solved,
            "{kind} at {lambda}: {}",
            out.reason
        );
        let u = out.u.unwrap();
        assert!(u.max() < 0.0, "{kind} at {lambda}: max u = {}", u.max());
        assert!(
            u[5].abs() < 1e-14,
            "the far end is below rounding: {}",
            u[5]
        );

        // same maximal solution as Newton started from it
        let oracle = NewtonOracle::new(&g, kind, lambda, &[4]);
        let root = VertexFunction(oracle.newton(u.values()).expect("Newton converges"));
        assert!(max_abs_diff(&root, &u) <= 1e-8);

        // every vertex balances relative to the size of its own terms
        for x in 0..g.len() {
            let dirac = if x == 4 {
                4.0 * PI / g.measure()[x]
            } else {
                0.0
            };
            let h = reaction_oracle(kind, lambda, u[x]);
            let flux: f64 = (0..g.len()).map(|y| lap[(x, y)] * u[y]).sum();
            let scale: f64 = (0..g.len())
                .map(|y| (lap[(x, y)] * u[y]).abs())
                .sum::<f64>()
                + h.abs()
                + dirac;
            let imbalance = (flux - h - dirac).abs();
            assert!(
                imbalance <= 1e-9 * scale,
                "{kind} at {lambda}, vertex {x}: imbalance {imbalance:e} vs scale {scale:e}"
            );
        }
    }
}
