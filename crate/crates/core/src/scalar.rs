//! Scalar pieces of the two equations: the map `f(v) = 1 + v − eᵛ` on
//! `(−∞, 0]`, its inverse `g`, and the reaction terms
//!
//! * generalized: `H(w) = −λ e^{g(w)} (e^{g(w)} − 1)²`
//! * standard:    `H(w) = λ eʷ (eʷ − 1)`
//!
//! Both are evaluated through `t = e^{g(w)}` (resp. `t = eʷ`) with `1 − t`
//! taken from `expm1` so that the squared factor does not cancel.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Residual tolerance used by [`g_inverse`] when none is given.
pub const DEFAULT_G_TOL: f64 = 1e-14;

/// Below this magnitude `g` is taken from its series at the origin, where
/// `f'(0) = 0` makes Newton ill-conditioned.
const SERIES_CUTOFF: f64 = 1e-8;

/// `f(v) = 1 + v − eᵛ` for `v ≤ 0`.
pub fn f_forward(v: f64) -> Result<f64> {
    if v > 0.0 || v.is_nan() {
        return Err(Error::OutOfDomain(format!(
            "f is defined on (-inf, 0], got {v}"
        )));
    }
    Ok(f_unchecked(v))
}

#[inline]
fn f_unchecked(v: f64) -> f64 {
    if v == f64::NEG_INFINITY {
        return v;
    }
    v - v.exp_m1()
}

/// Inverse of [`f_forward`] on `(−∞, 0]`: returns `v ≤ 0` with
/// `|f(v) − u| ≤ tol` (or the closest representable value when `tol` is
/// below the attainable precision). The result lies in `[u − 1, u]`.
pub fn g_inverse(u: f64, tol: f64) -> Result<f64> {
    if u > 0.0 || u.is_nan() {
        return Err(Error::OutOfDomain(format!(
            "g is defined on (-inf, 0], got {u}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "g tolerance must be positive, got {tol}"
        )));
    }
    Ok(g_unchecked(u, tol))
}

/// [`g_inverse`] with [`DEFAULT_G_TOL`].
pub fn g(u: f64) -> Result<f64> {
    g_inverse(u, DEFAULT_G_TOL)
}

pub(crate) fn g_unchecked(u: f64, tol: f64) -> f64 {
    if u == 0.0 {
        return 0.0;
    }
    if u == f64::NEG_INFINITY {
        return u;
    }
    if u > -SERIES_CUTOFF {
        // f(−s − s²/6) = −s²/2 + O(s⁴) with s = √(−2u)
        let s = (-2.0 * u).sqrt();
        return -s - s * s / 6.0;
    }

    let (mut lo, mut hi) = (u - 1.0, u);
    let mut v = if u < -2.0 {
        u - 1.0 + (u - 1.0).exp()
    } else {
        let s = (-2.0 * u).sqrt();
        (-s - s * s / 6.0).clamp(lo, hi)
    };
    let mut best = (f64::INFINITY, v);
    for _ in 0..200 {
        let r = f_unchecked(v) - u;
        if r.abs() < best.0 {
            best = (r.abs(), v);
        }
        if r.abs() <= tol {
            return v;
        }
        if r < 0.0 {
            lo = v;
        } else {
            hi = v;
        }
        let slope = -v.exp_m1();
        let newton = v - r / slope;
        let next = if slope > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if next == v || next <= lo || next >= hi {
            break;
        }
        v = next;
    }
    best.1
}

/// Which of the two equations is being solved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NonlinearityKind {
    Generalized,
    Standard,
}

impl NonlinearityKind {
    /// `sup_{w<0} |H(w)| / λ`: 4/27 (generalized), 1/4 (standard).
    pub fn extremum(self) -> f64 {
        match self {
            Self::Generalized => 4.0 / 27.0,
            Self::Standard => 0.25,
        }
    }

    /// Coefficient `a` in the necessary condition `λ ≥ aπN/|V|`: 27 or 16.
    pub fn bound_coefficient(self) -> f64 {
        match self {
            Self::Generalized => 27.0,
            Self::Standard => 16.0,
        }
    }

    /// `|H|/λ` as a function of `t ∈ (0, 1]`.
    pub fn profile(self, t: f64) -> f64 {
        match self {
            Self::Generalized => t * (1.0 - t) * (1.0 - t),
            Self::Standard => t * (1.0 - t),
        }
    }

    /// `t` as a function of `w`.
    pub fn t_of(self, w: f64) -> f64 {
        match self {
            Self::Generalized => g_unchecked(w, DEFAULT_G_TOL).exp(),
            Self::Standard => w.exp(),
        }
    }

    /// `w` as a function of `t`, the inverse of [`Self::t_of`].
    pub fn w_of(self, t: f64) -> f64 {
        match self {
            Self::Generalized => f_unchecked(t.ln()),
            Self::Standard => t.ln(),
        }
    }

    /// Interval `[w_lo, w_hi] ⊂ (−∞, 0)` on which `|H(w)|/λ ≥ kappa`, or
    /// `None` when `kappa` exceeds the extremum.
    pub fn band(self, kappa: f64) -> Option<(f64, f64)> {
        let peak = self.extremum();
        if !(kappa > 0.0) || kappa > peak {
            return None;
        }
        let (t_lo, t_hi) = match self {
            Self::Standard => {
                let d = (1.0 - 4.0 * kappa).max(0.0).sqrt();
                // product of roots is kappa; avoids cancellation in (1 − d)/2
                let t_hi = 0.5 * (1.0 + d);
                (kappa / t_hi, t_hi)
            }
            Self::Generalized => {
                let h = |t: f64| self.profile(t) - kappa;
                let third = 1.0 / 3.0;
                (
                    bisect_increasing(h, 0.0, third),
                    bisect_increasing(|t| -h(t), third, 1.0),
                )
            }
        };
        Some((self.w_of(t_lo), self.w_of(t_hi)))
    }
}

impl fmt::Display for NonlinearityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Generalized => "generalized",
            Self::Standard => "standard",
        })
    }
}

impl FromStr for NonlinearityKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "generalized" | "gen" => Ok(Self::Generalized),
            "standard" | "std" => Ok(Self::Standard),
            other => Err(Error::InvalidParameter(format!(
                "unknown equation variant {other:?}"
            ))),
        }
    }
}

/// Root of an increasing function on `[a, b]` by bisection to full precision.
fn bisect_increasing(h: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        if h(m) < 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// The reaction term `H` of one equation at a fixed coupling `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nonlinearity {
    pub kind: NonlinearityKind,
    pub lambda: f64,
}

impl Nonlinearity {
    pub fn new(kind: NonlinearityKind, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        Ok(Self { kind, lambda })
    }

    /// `H(w)` with `H(0) = 0`. The generalized term needs `w ≤ 0`, which
    /// callers guarantee.
    #[inline]
    pub(crate) fn eval_closed(&self, w: f64) -> f64 {
        match self.kind {
            NonlinearityKind::Generalized => {
                debug_assert!(w <= 0.0);
                let v = g_unchecked(w, DEFAULT_G_TOL);
                let t = v.exp();
                let one_minus_t = -v.exp_m1();
                -self.lambda * t * one_minus_t * one_minus_t
            }
            NonlinearityKind::Standard => {
                let t = w.exp();
                self.lambda * t * w.exp_m1()
            }
        }
    }

    /// `H(w)`, defined for `w ≤ 0` (generalized) or any finite `w` (standard).
    pub fn eval(&self, w: f64) -> Result<f64> {
        let ok = match self.kind {
            NonlinearityKind::Generalized => w <= 0.0,
            NonlinearityKind::Standard => w.is_finite(),
        };
        if !ok {
            return Err(Error::OutOfDomain(format!(
                "{} reaction term undefined at w = {w}",
                self.kind
            )));
        }
        Ok(self.eval_closed(w))
    }

    /// `dH/dw` for `w ≤ 0`: `λ t(3t − 1)` (generalized), `λ t(2t − 1)` (standard).
    pub fn derivative(&self, w: f64) -> Result<f64> {
        check_regime(w)?;
        let t = self.kind.t_of(w);
        Ok(match self.kind {
            NonlinearityKind::Generalized => self.lambda * t * (3.0 * t - 1.0),
            NonlinearityKind::Standard => self.lambda * t * (2.0 * t - 1.0),
        })
    }
}

fn check_regime(w: f64) -> Result<()> {
    if w < 0.0 {
        Ok(())
    } else {
        Err(Error::OutOfDomain(format!(
            "the reaction term is only evaluated for w < 0, got {w}"
        )))
    }
}

/// `H(w)` for the selected equation; `w` must be strictly negative.
pub fn nonlinearity(kind: NonlinearityKind, lambda: f64, w: f64) -> Result<f64> {
    check_regime(w)?;
    Ok(Nonlinearity::new(kind, lambda)?.eval_closed(w))
}

/// Certified bound on `sup_{w<0} |dH/dw|`: `2λ` (generalized), `λ` (standard).
pub fn lipschitz_bound(kind: NonlinearityKind, lambda: f64) -> f64 {
    match kind {
        NonlinearityKind::Generalized => 2.0 * lambda,
        NonlinearityKind::Standard => lambda,
    }
}
