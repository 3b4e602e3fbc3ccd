//! Closed-form evaluation of `f`, the smooth majorant `f̃`, `M(x, y)`,
//! `B(x, y, m)` and the supporting wedges `M_k`.
//!
//! `f` is the piecewise-linear interpolant of `Q η^k` at the nodes `x_k = N^{−k}`.
//! On `(N^{−k−1}, N^{−k}]` it is `η^k (Q − 1 + N^k x)`, which is the form used
//! here: `N^k x` is obtained by exact scaling (N is a power of two), so nodes are
//! classified without any logarithm.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::{Params, BOUNDARY_TOL};
use crate::scalar::Real;

/// Past this many levels `η^k` is evaluated in log space.
pub const K_MAX_DIRECT: u32 = 60;

/// Relative tolerance for treating a point as a node of `f`.
pub const NODE_TOL: f64 = 1e-12;

fn lit<T: Real>(v: f64) -> T {
    T::from(v).expect("representable literal")
}

fn n_of<T: Real>(p: &Params<T>) -> T {
    lit(p.n() as f64)
}

/// Interval of `f` containing `x ∈ (0, 1]`: `x ∈ (N^{−k−1}, N^{−k}]`, with the
/// rescaled coordinate `t = N^k x ∈ (1/N, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval<T> {
    pub k: u32,
    pub t: T,
}

pub fn locate<T: Real>(p: &Params<T>, x: T) -> Interval<T> {
    debug_assert!(x > T::zero() && x <= T::one());
    let n = n_of(p);
    let mut t = x;
    let mut k = 0u32;
    while t * n <= T::one() {
        t = t * n;
        k += 1;
    }
    Interval { k, t }
}

/// `η^k`, switching to log space for large `k`.
pub fn eta_pow<T: Real>(p: &Params<T>, k: u32) -> T {
    let eta = *p.eta();
    if k <= K_MAX_DIRECT {
        eta.powi(k as i32)
    } else {
        (lit::<T>(k as f64) * eta.ln()).exp()
    }
}

fn check_unit<T: Real>(x: T) -> Result<()> {
    let tol = lit::<T>(BOUNDARY_TOL);
    if x.is_nan() || x < -tol || x > T::one() + tol {
        return Err(Error::Domain(format!("x = {:?} outside [0, 1]", x)));
    }
    Ok(())
}

fn clamp_unit<T: Real>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}

fn nondegenerate<T: Real>(p: &Params<T>) -> Result<()> {
    if p.is_degenerate() {
        return Err(Error::Degenerate("f is undefined at Q = 1"));
    }
    Ok(())
}

fn f_unchecked<T: Real>(p: &Params<T>, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    let Interval { k, t } = locate(p, x);
    let q = *p.q();
    if k <= K_MAX_DIRECT {
        eta_pow(p, k) * (q - T::one() + t)
    } else {
        (lit::<T>(k as f64) * p.eta().ln() + (q - T::one() + t).ln()).exp()
    }
}

/// The piecewise-linear `f(x) = B(x, Q, 1)`.
pub fn eval_f<T: Real>(p: &Params<T>, x: T) -> Result<T> {
    nondegenerate(p)?;
    check_unit(x)?;
    Ok(f_unchecked(p, clamp_unit(x)))
}

/// The smooth majorant `f̃(x) = Q x^ε`.
pub fn eval_f_smooth<T: Real>(p: &Params<T>, x: T) -> Result<T> {
    nondegenerate(p)?;
    check_unit(x)?;
    let x = clamp_unit(x);
    Ok(*p.q() * x.powf(lit(p.epsilon())))
}

/// `f'(x) = (Nη)^k` on the open interval `(N^{−k−1}, N^{−k})`.
pub fn f_slope<T: Real>(p: &Params<T>, x: T) -> Result<T> {
    nondegenerate(p)?;
    if x.is_nan() || x <= T::zero() || x >= T::one() {
        return Err(Error::Domain(format!("slope needs 0 < x < 1, got {:?}", x)));
    }
    let Interval { k, t } = locate(p, x);
    let tol = lit::<T>(NODE_TOL);
    if (t - T::one()).abs() <= tol || (t * n_of(p) - T::one()).abs() <= tol {
        return Err(Error::NodePoint { x: x.to_f64().unwrap_or(f64::NAN) });
    }
    Ok((n_of(p) * *p.eta()).powi(k as i32))
}

/// `x + y − 1`.
pub fn lower_branch<T: Real>(x: T, y: T) -> T {
    x + y - T::one()
}

/// `((y−1)/(Q−1)) f(x(Q−1)/(y−1))`; requires `y > 1`.
pub fn upper_branch<T: Real>(p: &Params<T>, x: T, y: T) -> T {
    let q1 = *p.q() - T::one();
    let s = (y - T::one()) / q1;
    s * f_unchecked(p, clamp_unit(x / s))
}

/// Which formula of `M` applies at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "branch", rename_all = "lowercase")]
pub enum Branch {
    Lower,
    /// `k` indexes the interval of `f` holding `u = x(Q−1)/(y−1)`; `node` is set
    /// when `u` sits on `N^{−k}`.
    Upper { k: u32, node: bool },
    Degenerate,
}

impl std::fmt::Display for Branch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Branch::Lower => write!(f, "lower branch"),
            Branch::Upper { k, node: true } => write!(f, "upper branch, node k={k}"),
            Branch::Upper { k, node: false } => write!(f, "upper branch, interval k={k}"),
            Branch::Degenerate => write!(f, "degenerate (Q = 1)"),
        }
    }
}

fn check_omega<T: Real>(p: &Params<T>, x: T, y: T) -> Result<()> {
    if !p.in_omega(&x, &y) {
        return Err(Error::Domain(format!(
            "(x, y) = ({:?}, {:?}) not in Ω for Q = {:?}",
            x,
            y,
            p.q()
        )));
    }
    Ok(())
}

fn is_lower<T: Real>(p: &Params<T>, x: T, y: T) -> bool {
    y <= T::one() + (*p.q() - T::one()) * x + lit(BOUNDARY_TOL)
}

pub fn classify<T: Real>(p: &Params<T>, x: T, y: T) -> Result<Branch> {
    check_omega(p, x, y)?;
    if p.is_degenerate() {
        return Ok(Branch::Degenerate);
    }
    if is_lower(p, x, y) {
        return Ok(Branch::Lower);
    }
    let u = clamp_unit(x * (*p.q() - T::one()) / (y - T::one()));
    if u <= T::zero() {
        return Ok(Branch::Upper { k: u32::MAX, node: false });
    }
    let Interval { k, t } = locate(p, u);
    Ok(Branch::Upper { k, node: (t - T::one()).abs() <= lit(NODE_TOL) })
}

/// `M(x, y) = B(x, y, 1)`.
pub fn eval_m<T: Real>(p: &Params<T>, x: T, y: T) -> Result<T> {
    check_omega(p, x, y)?;
    let (x, y) = (clamp_unit(x), y.max(T::one()).min(*p.q()));
    if p.is_degenerate() {
        return Ok(x);
    }
    if is_lower(p, x, y) {
        Ok(lower_branch(x, y))
    } else {
        Ok(upper_branch(p, x, y))
    }
}

/// `B(x, y, m) = m · M(x, y/m)`.
pub fn eval_b<T: Real>(p: &Params<T>, x: T, y: T, m: T) -> Result<T> {
    if !p.in_omega_b(&x, &y, &m) {
        return Err(Error::Domain(format!(
            "(x, y, m) = ({:?}, {:?}, {:?}) not in Ω_B for Q = {:?}",
            x,
            y,
            m,
            p.q()
        )));
    }
    let ratio = (y / m).max(T::one()).min(*p.q());
    Ok(m * eval_m(p, x, ratio)?)
}

/// Coefficients of the `k`-th plane of `M`: `a_k x + b_k (y − 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WedgeCoeffs<T> {
    pub k: u32,
    pub a: T,
    pub b: T,
}

impl<T: Real> WedgeCoeffs<T> {
    pub fn new(p: &Params<T>, k: u32) -> Self {
        let b = eta_pow(p, k);
        let a = (n_of(p) * *p.eta()).powi(k as i32);
        WedgeCoeffs { k, a, b }
    }

    pub fn plane(&self, x: T, y: T) -> T {
        self.a * x + self.b * (y - T::one())
    }
}

/// Two-plane wedge `M_k`: plane `k−1` on `Ω_k`, plane `k` on `Ω ∖ Ω_k`.
///
/// The planes meet along `∂Ω_k`, so this is `min(plane_{k−1}, plane_k)`. Plane
/// `k` coincides with `M` on `Ω_{k+1} ∖ Ω_k`, hence `M_k = M` on `Ω_{k+1} ∖ Ω_{k−1}`.
pub fn wedge_mk<T: Real>(p: &Params<T>, k: u32, x: T, y: T) -> Result<T> {
    check_omega(p, x, y)?;
    if k == 0 {
        return Ok(WedgeCoeffs::new(p, 0).plane(x, y));
    }
    let plane = if p.in_omega_k(k, &x, &y) { k - 1 } else { k };
    Ok(WedgeCoeffs::new(p, plane).plane(x, y))
}

/// A tabulated sample of the Bellman function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceSample {
    pub x: f64,
    pub y: f64,
    pub m: f64,
    pub value: f64,
}

/// Tabulated `(x, y, m) → B` samples.
#[derive(Debug, Clone, Serialize)]
pub struct BellmanSurface {
    pub samples: Vec<SurfaceSample>,
}

impl BellmanSurface {
    /// Uniform `nx × ny` grid over `[0,1] × [m, Qm]`.
    pub fn tabulate(p: &Params<f64>, nx: usize, ny: usize, m: f64) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return Err(Error::Precondition("table needs at least 2 points per axis".into()));
        }
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::Domain(format!("m = {m} must be positive")));
        }
        let q = p.q_f64();
        let mut samples = Vec::with_capacity(nx * ny);
        for i in 0..nx {
            let x = i as f64 / (nx - 1) as f64;
            for j in 0..ny {
                let y = m * (1.0 + (q - 1.0) * j as f64 / (ny - 1) as f64);
                samples.push(SurfaceSample { x, y, m, value: eval_b(p, x, y, m)? });
            }
        }
        Ok(BellmanSurface { samples })
    }
}
