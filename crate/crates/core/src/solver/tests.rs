use std::f64::consts::PI;

use super::*;
use crate::families::{generate, Family, GenerateOptions};
use crate::scalar::NonlinearityKind::{Generalized, Standard};

fn k3() -> WeightedGraph {
    generate(Family::Complete(3), &GenerateOptions::default()).unwrap()
}

#[test]
fn reduce_k3() {
    let g = k3();
    let r = Instance::new(&g, Generalized, &["a"])
        .unwrap()
        .reduce(1e-13)
        .unwrap();
    let e = [-8.0 * PI / 9.0, 4.0 * PI / 9.0, 4.0 * PI / 9.0];
    for (a, b) in r.upsilon0.iter().zip(e) {
        assert!((a - b).abs() < 1e-13);
    }
    let lap = laplacian(&g, &r.upsilon0).unwrap();
    assert!((lap[1] + 4.0 * PI / 3.0).abs() < 1e-13);
    assert!(crate::calculus::integrate(&g, &r.upsilon0).unwrap().abs() < 1e-13);
}

#[test]
fn first_step_is_dirac_driven() {
    let g = k3();
    let r = Instance::new(&g, Generalized, &["a"])
        .unwrap()
        .reduce(1e-13)
        .unwrap();
    let k = default_shift(Generalized, 200.0);
    let s0 = IterationState::initial(r.initial_upper());
    let s1 = iterate_step(&s0, &r, 200.0, k).unwrap();
    // (Δ − K)(ψ₁ − ψ₀) = 4π δ_a
    let op = ShiftedOperator::new(&g, k).unwrap();
    let d = op.apply(&s1.psi.sub(&s0.psi)).unwrap();
    assert!((d[0] - 4.0 * PI).abs() < 1e-11 && d[1].abs() < 1e-11 && d[2].abs() < 1e-11);
    assert!(s1.psi.iter().zip(s0.psi.iter()).all(|(a, b)| a < b));
}

#[test]
fn shift_below_lipschitz_is_rejected() {
    let g = k3();
    let r = Instance::new(&g, Generalized, &["a"])
        .unwrap()
        .reduce(1e-13)
        .unwrap();
    let s0 = IterationState::initial(r.initial_upper());
    assert!(matches!(
        iterate_step(&s0, &r, 10.0, 20.0),
        Err(Error::InvalidParameter(_))
    ));
    assert!(iterate_step(&s0, &r, 10.0, 19.0).is_err());
    let rs = Instance::new(&g, Standard, &["a"])
        .unwrap()
        .reduce(1e-13)
        .unwrap();
    assert!(iterate_step(&s0, &rs, 10.0, 10.5).is_ok());
}

#[test]
fn solves_k3_large_lambda() {
    let g = k3();
    let spec = ProblemSpec::new(&g, Generalized, 200.0, &["a"]).unwrap();
    let out = solve_at(&spec, &SolveOptions::default()).unwrap();
    assert_eq!(out.status, Status::Solved, "{}", out.reason);
    let u = out.u.as_ref().unwrap();
    assert!(u.max() < 0.0);
    assert!(residual(&spec, u).unwrap().norm_inf() <= 1e-8);
    assert!(out.max_increase <= 1e-13);
}

#[test]
fn fast_reject_below_bound() {
    let g = k3();
    for (kind, lam) in [(Generalized, 28.0), (Standard, 16.0)] {
        let spec = ProblemSpec::new(&g, kind, lam, &["a"]).unwrap();
        let out = solve_at(&spec, &SolveOptions::default()).unwrap();
        assert_eq!(out.status, Status::NoSolution);
        assert_eq!(out.iterations, 0);
    }
}

#[test]
fn geometric_decay_of_steps() {
    let g = k3();
    let r = Instance::new(&g, Generalized, &["a"])
        .unwrap()
        .reduce(1e-13)
        .unwrap();
    let lam = 200.0;
    let scheme = Scheme::new(&r, lam, default_shift(Generalized, lam), 1e-13).unwrap();
    let mut s = IterationState::initial(r.initial_upper());
    let mut deltas = Vec::new();
    for _ in 0..50 {
        s = scheme.step(&s).unwrap();
        deltas.push(s.delta);
    }
    let tail = &deltas[5..40];
    assert!(tail.windows(2).all(|w| w[1] < w[0]), "{deltas:?}");
}

#[test]
fn constant_lower_solution_k3() {
    let g = k3();
    let r = Instance::new(&g, Generalized, &["a"])
        .unwrap()
        .reduce(1e-13)
        .unwrap();
    // direct scan oracle over c′ ∈ (0, 10]: H(υ₀ − c′) + 4π/3 ≤ 0 at every vertex
    let scan = |lam: f64| {
        let nl = Nonlinearity::new(Generalized, lam).unwrap();
        (1..=2000).map(|i| i as f64 * 0.005).any(|c| {
            r.upsilon0
                .iter()
                .all(|v| v - c < 0.0 && nl.eval_closed(v - c) + 4.0 * PI / 3.0 <= 0.0)
        })
    };
    // the window of admissible constants opens only around λ ≈ 750 on K₃
    assert!(!scan(200.0));
    assert!(constant_lower_solution(&r, 200.0).is_none());
    assert!(scan(1000.0));
    let c = constant_lower_solution(&r, 1000.0).unwrap();
    let nl = Nonlinearity::new(Generalized, 1000.0).unwrap();
    assert!(r
        .upsilon0
        .iter()
        .all(|v| nl.eval_closed(v - c) + 4.0 * PI / 3.0 <= 0.0));
    assert!(constant_lower_solution(&r, 20.0).is_none());
}

#[test]
fn residual_of_zero_shows_dirac() {
    let g = k3();
    let spec = ProblemSpec::new(&g, Generalized, 50.0, &["a", "a"]).unwrap();
    let r = residual(&spec, &g.constant(0.0)).unwrap();
    assert!((r[0] + 8.0 * PI).abs() < 1e-14);
    assert_eq!(r[1], 0.0);
    assert!(residual(&spec, &g.constant(0.1)).is_err());
}

#[test]
fn perturbation_is_visible_in_residual() {
    let g = k3();
    let spec = ProblemSpec::new(&g, Standard, 100.0, &["b"]).unwrap();
    let out = solve_at(&spec, &SolveOptions::default()).unwrap();
    let mut u = out.u.unwrap();
    u[2] += 0.1;
    assert!(residual(&spec, &u).unwrap().norm_inf() > 0.01);
}

#[test]
fn invalid_options_rejected() {
    let g = k3();
    let spec = ProblemSpec::new(&g, Standard, 100.0, &["b"]).unwrap();
    let bad = SolveOptions {
        tol: 0.0,
        ..Default::default()
    };
    assert!(solve_at(&spec, &bad).is_err());
    assert!(ProblemSpec::new(&g, Standard, -1.0, &["b"]).is_err());
    assert!(matches!(
        ProblemSpec::new(&g, Standard, 1.0, &["z"]),
        Err(Error::UnknownVertex(_))
    ));
}

#[test]
fn trace_is_thinned() {
    let mut t = Trace::new(8);
    for n in 0..100 {
        t.push(TraceEntry {
            n,
            delta: 0.0,
            min: 0.0,
        });
    }
    let e = t.finish(TraceEntry {
        n: 100,
        delta: 0.0,
        min: 0.0,
    });
    assert!(e.len() <= 10);
    assert_eq!(e.last().unwrap().n, 100);
    assert_eq!(e[0].n, 0);
}
