//! Weight/set pairs that attain the Bellman function.
//!
//! * [`boundary_weight`]: the edge `x = 1`.
//! * [`apply_t`] / [`apply_s`]: one corner step along `y = Q`; value times `η`,
//!   measure divided by `N`.
//! * [`build_corner`]: the nodes `(N^{−k}, Q)`.
//! * [`concatenate`]: `C_λ`, mixing two pairs by the binary digits of `λ`.
//! * [`build_extremizer`]: any `(x, y) ∈ Ω`.

use serde::Serialize;

use crate::dyadic::{stats, DyadicSet, DyadicWeight, PairDocument, WeightStats, MAX_TREE_DEPTH};
use crate::error::{Error, Result};
use crate::params::{DomainPoint, Params, BOUNDARY_TOL};
use crate::scalar::{close, Scalar};

/// Largest number of binary digits a single concatenation may use.
pub const MAX_DIGITS: usize = 32;

/// Relative tolerance for the float-mode preconditions (`⟨w⟩ = Q`, `m = 1`, ...).
pub const PAIR_TOL: f64 = 1e-9;

/// A constructed `(w, E)` with the point it targets and what it achieves.
#[derive(Debug, Clone)]
pub struct ExtremalPair<T> {
    pub w: DyadicWeight<T>,
    pub e: DyadicSet<T>,
    pub target: DomainPoint<T>,
    pub achieved: WeightStats<T>,
    /// Binary digits used by the deepest concatenation (0 when none).
    pub truncation_depth: usize,
}

impl<T: Scalar> ExtremalPair<T> {
    fn assemble(w: DyadicWeight<T>, e: DyadicSet<T>, target: DomainPoint<T>, depth: usize) -> Result<Self> {
        let achieved = stats(&w, &e)?;
        Ok(ExtremalPair { w, e, target, achieved, truncation_depth: depth })
    }

    /// `(𝟙, ∅)`: stats `(0, 1, 1, 1, 0)`.
    pub fn trivial(p: &Params<T>) -> Result<Self> {
        let n = p.n() as usize;
        Self::assemble(
            DyadicWeight::constant(n, T::one())?,
            DyadicSet::empty(n),
            DomainPoint::new(T::zero(), T::one()),
            0,
        )
    }

    /// Wraps an arbitrary pair, e.g. one read from JSON.
    pub fn from_parts(w: DyadicWeight<T>, e: DyadicSet<T>) -> Result<Self> {
        let achieved = stats(&w, &e)?;
        let target = DomainPoint::new(achieved.x.clone(), achieved.y.clone());
        Ok(ExtremalPair { w, e, target, achieved, truncation_depth: 0 })
    }

    pub fn depth(&self) -> usize {
        self.w.depth().max(self.e.depth())
    }

    pub fn envelope(&self, p: &Params<T>) -> Result<PairEnvelope> {
        Ok(PairEnvelope {
            pair: PairDocument::new(p, &self.w, &self.e)?,
            target: TargetJson { x: self.target.x.as_f64(), y: self.target.y.as_f64() },
            achieved: self.achieved.to_f64(),
            depth: self.truncation_depth,
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TargetJson {
    pub x: f64,
    pub y: f64,
}

/// The pair document plus target, achieved stats and digit depth.
#[derive(Debug, Clone, Serialize)]
pub struct PairEnvelope {
    #[serde(flatten)]
    pub pair: PairDocument,
    pub target: TargetJson,
    pub achieved: WeightStats<f64>,
    pub depth: usize,
}

fn need_nondegenerate<T: Scalar>(p: &Params<T>) -> Result<()> {
    if p.is_degenerate() {
        return Err(Error::Degenerate("extremal constructions need Q > 1"));
    }
    Ok(())
}

fn check_normalized<T: Scalar>(p: &Params<T>, pair: &ExtremalPair<T>, what: &str) -> Result<()> {
    let s = &pair.achieved;
    if !close(&s.m, &T::one(), PAIR_TOL) {
        return Err(Error::Precondition(format!("{what}: ess inf must be 1, got {:?}", s.m)));
    }
    if s.char > p.q().clone() * (T::one() + T::lit(PAIR_TOL)) {
        return Err(Error::Precondition(format!(
            "{what}: characteristic {:?} exceeds Q = {:?}",
            s.char,
            p.q()
        )));
    }
    Ok(())
}

/// Depth-1 weight `(1, …, 1, 1 + N(y−1))` with `E = P`; achieves `(1, y, 1, y, y)`.
pub fn boundary_weight<T: Scalar>(p: &Params<T>, y: T) -> Result<ExtremalPair<T>> {
    let tol = T::lit(BOUNDARY_TOL);
    if y < T::one() - tol.clone() || y > p.q().clone() + tol {
        return Err(Error::Domain(format!("boundary weight needs 1 ≤ y ≤ Q, got {:?}", y)));
    }
    let n = p.n() as usize;
    let w = if y <= T::one() {
        DyadicWeight::constant(n, T::one())?
    } else {
        let heavy = T::one() + p.n_scalar() * (y.clone() - T::one());
        let mut children = vec![DyadicWeight::constant(n, T::one())?; n - 1];
        children.push(DyadicWeight::constant(n, heavy)?);
        DyadicWeight::from_children(n, children)?
    };
    ExtremalPair::assemble(w, DyadicSet::full(n), DomainPoint::new(T::one(), y), 0)
}

/// `S(E)`: a copy of `E` in child 1, other children empty.
pub fn apply_s<T: Scalar>(e: &DyadicSet<T>) -> Result<DyadicSet<T>> {
    let n = e.fanout();
    let mut children = vec![e.clone()];
    children.extend(std::iter::repeat_with(|| DyadicSet::empty(n)).take(n - 1));
    DyadicSet::from_children(n, children)
}

/// `T(w, E)`: `w` scaled by `Nη` into child 1, constant 1 elsewhere, `E ↦ S(E)`.
///
/// Needs `⟨w⟩ = Q`, `ess inf w = 1` and `[w] ≤ Q`. Preserves all three and
/// multiplies `w(E)` by `η` exactly.
pub fn apply_t<T: Scalar>(p: &Params<T>, pair: &ExtremalPair<T>) -> Result<ExtremalPair<T>> {
    need_nondegenerate(p)?;
    check_normalized(p, pair, "apply_T")?;
    if !close(&pair.achieved.y, p.q(), PAIR_TOL) {
        return Err(Error::Precondition(format!(
            "apply_T needs ⟨w⟩ = Q, got {:?}",
            pair.achieved.y
        )));
    }
    let n = p.n() as usize;
    if pair.depth() + 1 > MAX_TREE_DEPTH {
        return Err(Error::DepthCap { requested: pair.depth() + 1, cap: MAX_TREE_DEPTH });
    }
    let mut children = vec![pair.w.scaled(&p.corner_factor())?];
    children.extend(std::iter::repeat_with(|| DyadicWeight::constant(n, T::one())).take(n - 1).collect::<Result<Vec<_>>>()?);
    let w = DyadicWeight::from_children(n, children)?;
    let e = apply_s(&pair.e)?;
    let target = DomainPoint::new(pair.target.x.clone() / p.n_scalar(), pair.target.y.clone());
    ExtremalPair::assemble(w, e, target, pair.truncation_depth)
}

/// `T^k` applied to `boundary_weight(Q)`; achieves `(N^{−k}, Q, 1, Q, Qη^k)`.
pub fn build_corner<T: Scalar>(p: &Params<T>, k: usize) -> Result<ExtremalPair<T>> {
    need_nondegenerate(p)?;
    if k + 1 > MAX_TREE_DEPTH {
        return Err(Error::DepthCap { requested: k + 1, cap: MAX_TREE_DEPTH });
    }
    let mut pair = boundary_weight(p, p.q().clone())?;
    for _ in 0..k {
        pair = apply_t(p, &pair)?;
    }
    Ok(pair)
}

/// Binary digits of `λ ∈ [0, 1]`, stopping once the remainder is exactly 0 or 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Digits<T> {
    pub digits: Vec<bool>,
    /// Value of the tail after the listed digits, scaled to `[0, 1]`:
    /// `Some(0)` / `Some(1)` when the expansion closes, `None` when truncated.
    pub tail: Option<bool>,
    /// `Σ b_j 2^{−j}` over the listed digits.
    pub truncated: T,
}

pub fn binary_digits<T: Scalar>(lambda: &T, max_digits: usize) -> Digits<T> {
    let two = T::from_count(2);
    let mut rem = lambda.clone();
    let mut digits = Vec::new();
    let mut truncated = T::zero();
    let mut weight = T::one();
    loop {
        if rem == T::zero() {
            return Digits { digits, tail: Some(false), truncated };
        }
        if rem == T::one() {
            return Digits { digits, tail: Some(true), truncated };
        }
        if digits.len() == max_digits {
            return Digits { digits, tail: None, truncated };
        }
        weight = weight / two.clone();
        rem = rem * two.clone();
        let bit = rem >= T::one();
        if bit {
            rem = rem - T::one();
            truncated = truncated + weight.clone();
        }
        digits.push(bit);
    }
}

/// `C_λ(pair0, pair1)` truncated after `depth` binary digits of `λ`.
///
/// Stage `j` puts a copy of `pair_{b_j}` on the first half of the children of
/// every cube left over from stage `j − 1`, and recurses into the second half.
/// A closed expansion fills the leftover region with the repeating pair; a
/// truncated one fills it with `(𝟙, ∅)`, which has measure `2^{−depth}` and
/// moves the value by at most `Q·2^{−depth}` (checked).
pub fn concatenate<T: Scalar>(
    p: &Params<T>,
    lambda: T,
    pair0: &ExtremalPair<T>,
    pair1: &ExtremalPair<T>,
    depth: usize,
) -> Result<ExtremalPair<T>> {
    if !(lambda >= T::zero() && lambda <= T::one()) {
        return Err(Error::Domain(format!("λ = {:?} outside [0, 1]", lambda)));
    }
    if depth < 1 {
        return Err(Error::Precondition("concatenation depth must be at least 1".into()));
    }
    if depth > MAX_DIGITS {
        return Err(Error::DepthCap { requested: depth, cap: MAX_DIGITS });
    }
    check_normalized(p, pair0, "concatenate(pair0)")?;
    check_normalized(p, pair1, "concatenate(pair1)")?;
    let n = p.n() as usize;
    if pair0.w.fanout() != n || pair1.w.fanout() != n {
        return Err(Error::Fanout { left: n, right: pair0.w.fanout().max(pair1.w.fanout()) });
    }

    let digits = binary_digits(&lambda, depth);
    let stages = digits.digits.len();
    let inner = pair0.depth().max(pair1.depth());
    if stages + inner > MAX_TREE_DEPTH {
        return Err(Error::DepthCap { requested: stages + inner, cap: MAX_TREE_DEPTH });
    }

    let (mut w, mut e) = match digits.tail {
        Some(false) => (pair0.w.clone(), pair0.e.clone()),
        Some(true) => (pair1.w.clone(), pair1.e.clone()),
        None => (DyadicWeight::constant(n, T::one())?, DyadicSet::empty(n)),
    };
    let half = n / 2;
    for &bit in digits.digits.iter().rev() {
        let placed = if bit { pair1 } else { pair0 };
        let mut wc = vec![placed.w.clone(); half];
        wc.extend(std::iter::repeat_n(w, half));
        let mut ec = vec![placed.e.clone(); half];
        ec.extend(std::iter::repeat_n(e, half));
        w = DyadicWeight::from_children(n, wc)?;
        e = DyadicSet::from_children(n, ec)?;
    }

    let mix = |a: &T, b: &T| (T::one() - lambda.clone()) * a.clone() + lambda.clone() * b.clone();
    let target = DomainPoint::new(
        mix(&pair0.achieved.x, &pair1.achieved.x),
        mix(&pair0.achieved.y, &pair1.achieved.y),
    );
    let used = pair0.truncation_depth.max(pair1.truncation_depth).max(stages);
    let out = ExtremalPair::assemble(w, e, target, used)?;

    // Value of the truncated mix versus the pair's own statistics.
    let ld = digits.truncated.clone();
    let expected = match digits.tail {
        Some(_) => mix(&pair0.achieved.value, &pair1.achieved.value),
        None => (T::one() - ld.clone()) * pair0.achieved.value.clone() + ld * pair1.achieved.value.clone(),
    };
    let mut bound = p.q().clone();
    for _ in 0..stages {
        bound = bound / T::from_count(2);
    }
    let slack = T::lit(PAIR_TOL) * p.q().clone();
    if (out.achieved.value.clone() - expected.clone()).abs_val() > bound.clone() + slack {
        return Err(Error::Construction(format!(
            "value {:?} differs from the λ-mix {:?} by more than Q·2^-{stages}",
            out.achieved.value, expected
        )));
    }
    Ok(out)
}

/// Pair on the edge `y = Q` at `x = u`: a corner at nodes, else the mix of the
/// two neighbouring corners.
fn top_edge_pair<T: Scalar>(p: &Params<T>, u: &T, depth: usize) -> Result<ExtremalPair<T>> {
    let n = p.n_scalar();
    if *u <= T::zero() {
        let b = boundary_weight(p, p.q().clone())?;
        return ExtremalPair::assemble(b.w, DyadicSet::empty(p.n() as usize), DomainPoint::new(T::zero(), p.q().clone()), 0);
    }
    let mut hi = T::one();
    let mut k = 0usize;
    while u.clone() * n.clone() <= hi {
        hi = hi / n.clone();
        k += 1;
        if k + 2 > MAX_TREE_DEPTH {
            return Err(Error::DepthCap { requested: k + 2, cap: MAX_TREE_DEPTH });
        }
    }
    if *u == hi {
        return build_corner(p, k);
    }
    let lo = hi.clone() / n;
    let lambda = (u.clone() - lo.clone()) / (hi - lo);
    let upper = build_corner(p, k)?;
    let lower = build_corner(p, k + 1)?;
    concatenate(p, lambda, &lower, &upper, depth)
}

/// Pair approaching `M(x, y)` for any `(x, y) ∈ Ω`, using up to `depth` binary
/// digits per concatenation.
///
/// * `y ≤ 1 + (Q−1)x`: `C_x((𝟙, ∅), boundary_weight(1 + (y−1)/x))`.
/// * `y = Q`: the top-edge pair at `x`.
/// * otherwise: `C_λ((𝟙, ∅), top-edge pair at u)` with `u = x(Q−1)/(y−1)` and
///   `λ = (y−1)/(Q−1)`.
pub fn build_extremizer<T: Scalar>(p: &Params<T>, x: T, y: T, depth: usize) -> Result<ExtremalPair<T>> {
    need_nondegenerate(p)?;
    if !p.in_omega(&x, &y) {
        return Err(Error::Domain(format!("(x, y) = ({:?}, {:?}) not in Ω", x, y)));
    }
    if depth > MAX_DIGITS {
        return Err(Error::DepthCap { requested: depth, cap: MAX_DIGITS });
    }
    let depth = depth.max(1);
    let zero = T::zero();
    let one = T::one();
    let q = p.q().clone();
    let x = if x < zero.clone() { zero.clone() } else if x > one { one.clone() } else { x };
    let y = if y < one { one.clone() } else if y > q { q.clone() } else { y };
    let q1 = q.clone() - T::one();
    let target = DomainPoint::new(x.clone(), y.clone());

    let lower = y <= T::one() + q1.clone() * x.clone() + T::lit(BOUNDARY_TOL);
    let mut pair = if lower {
        if x <= zero {
            ExtremalPair::trivial(p)?
        } else {
            let yy = T::one() + (y.clone() - T::one()) / x.clone();
            let yy = if yy > q { q.clone() } else { yy };
            let inner = boundary_weight(p, yy)?;
            concatenate(p, x.clone(), &ExtremalPair::trivial(p)?, &inner, depth)?
        }
    } else {
        let s = (y.clone() - T::one()) / q1.clone();
        let u = x.clone() / s.clone();
        let u = if u > one { one } else { u };
        let top = top_edge_pair(p, &u, depth)?;
        if y == q {
            top
        } else {
            concatenate(p, s, &ExtremalPair::trivial(p)?, &top, depth)?
        }
    };
    pair.target = target;
    Ok(pair)
}
