//! Problem constants and domain predicates.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Largest supported dimension; `N = 2^d` children per cube.
pub const MAX_DIMENSION: u32 = 20;

/// Absolute tolerance used for domain boundaries.
pub const BOUNDARY_TOL: f64 = 1e-12;

/// The constants `Q`, `d` and the derived `N = 2^d`, `η = 1 − (N−1)/(NQ)` and
/// `ε = −log η / log N`.
///
/// `η` is kept in the scalar type (exact for rationals); `ε` is always a float.
#[derive(Debug, Clone, PartialEq)]
pub struct Params<T> {
    q: T,
    d: u32,
    n: u64,
    eta: T,
    epsilon: f64,
    degenerate: bool,
}

impl<T: Scalar> Params<T> {
    pub fn new(q: T, d: u32) -> Result<Self> {
        let qf = q.as_f64();
        if !qf.is_finite() {
            return Err(Error::InvalidParams(format!("Q must be finite, got {qf}")));
        }
        if q < T::one() {
            return Err(Error::InvalidParams(format!("Q must be at least 1, got {qf}")));
        }
        if !(1..=MAX_DIMENSION).contains(&d) {
            return Err(Error::InvalidParams(format!(
                "d must lie in 1..={MAX_DIMENSION}, got {d}"
            )));
        }
        let n = 1u64 << d;
        let nt = T::from_count(n);
        let eta = T::one() - (nt.clone() - T::one()) / (nt * q.clone());
        let epsilon = -eta.as_f64().ln() / (n as f64).ln();
        let degenerate = q == T::one();
        Ok(Params { q, d, n, eta, epsilon, degenerate })
    }

    pub fn q(&self) -> &T {
        &self.q
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    /// Children per cube, `N = 2^d`.
    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn n_scalar(&self) -> T {
        T::from_count(self.n)
    }

    pub fn eta(&self) -> &T {
        &self.eta
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    /// `Q = 1`: every admissible weight is constant.
    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn q_f64(&self) -> f64 {
        self.q.as_f64()
    }

    pub fn eta_f64(&self) -> f64 {
        self.eta.as_f64()
    }

    /// The factor `(NQ − (N−1))/Q = Nη` applied by the corner step.
    pub fn corner_factor(&self) -> T {
        self.n_scalar() * self.eta.clone()
    }

    /// `0 ≤ x ≤ 1` and `1 ≤ y ≤ Q`, with boundary tolerance.
    pub fn in_omega(&self, x: &T, y: &T) -> bool {
        let tol = T::lit(BOUNDARY_TOL);
        *x >= T::zero() - tol.clone()
            && *x <= T::one() + tol.clone()
            && *y >= T::one() - tol.clone()
            && *y <= self.q.clone() + tol
    }

    /// `(x, y) ∈ Ω` and `y ≤ 1 + (Q−1)·N^k·x`.
    pub fn in_omega_k(&self, k: u32, x: &T, y: &T) -> bool {
        if !self.in_omega(x, y) {
            return false;
        }
        let mut scale = T::one();
        for _ in 0..k {
            scale = scale * self.n_scalar();
        }
        *y <= T::one() + (self.q.clone() - T::one()) * scale * x.clone() + T::lit(BOUNDARY_TOL)
    }

    /// `0 ≤ x ≤ 1` and `0 < m ≤ y ≤ Qm`.
    pub fn in_omega_b(&self, x: &T, y: &T, m: &T) -> bool {
        let tol = T::lit(BOUNDARY_TOL);
        let scale = if *m > T::one() { m.clone() } else { T::one() };
        *m > T::zero()
            && *x >= T::zero() - tol.clone()
            && *x <= T::one() + tol.clone()
            && *y >= m.clone() - tol.clone() * scale.clone()
            && *y <= self.q.clone() * m.clone() + tol * scale
    }

    /// Weak-type endpoint exponent `log N / log(N − (N−1)/Q)`.
    pub fn osekowski_p_max(&self) -> Result<f64> {
        if self.degenerate {
            return Err(Error::Degenerate("p_max is infinite at Q = 1"));
        }
        let n = self.n as f64;
        Ok(n.ln() / (n - (n - 1.0) / self.q_f64()).ln())
    }

    /// The f64 view of these parameters.
    pub fn to_f64(&self) -> Params<f64> {
        Params {
            q: self.q.as_f64(),
            d: self.d,
            n: self.n,
            eta: self.eta.as_f64(),
            epsilon: self.epsilon,
            degenerate: self.degenerate,
        }
    }

    pub fn summary(&self) -> ParamsSummary {
        ParamsSummary {
            q: self.q_f64(),
            d: self.d,
            n: self.n,
            eta: self.eta_f64(),
            epsilon: self.epsilon,
            degenerate: self.degenerate,
        }
    }
}

/// Serializable snapshot of a [`Params`].
#[derive(Debug, Clone, Serialize)]
pub struct ParamsSummary {
    #[serde(rename = "Q")]
    pub q: f64,
    pub d: u32,
    #[serde(rename = "N")]
    pub n: u64,
    pub eta: f64,
    pub epsilon: f64,
    pub degenerate: bool,
}

/// A point `(x, y, m)` of the Bellman domain. `m` absent means `m = 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainPoint<T> {
    pub x: T,
    pub y: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<T>,
}

impl<T: Scalar> DomainPoint<T> {
    pub fn new(x: T, y: T) -> Self {
        DomainPoint { x, y, m: None }
    }

    pub fn m(&self) -> T {
        self.m.clone().unwrap_or_else(T::one)
    }
}
