use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{run_sampler, CheckReport, Draw};
use crate::bellman::{eval_b, eval_m, wedge_mk};
use crate::error::{Error, Result};
use crate::params::Params;

fn need_q(p: &Params<f64>) -> Result<()> {
    if p.is_degenerate() {
        return Err(Error::Degenerate("inequality suites need Q > 1"));
    }
    Ok(())
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        lo
    } else {
        lo + (hi - lo) * rng.random::<f64>()
    }
}

/// Uniform on `[lo, hi]`, snapped to an endpoint one time in `1/snap`.
fn edgy(rng: &mut ChaCha8Rng, lo: f64, hi: f64, snap: u32) -> f64 {
    match rng.random_range(0..snap * 2) {
        0 => lo,
        1 => hi,
        _ => uniform(rng, lo, hi),
    }
}

/// `M(x,y) − ((N−1)/N) M(x̃,ỹ) − (ŷ/(NQ)) M(x̂,Q)` with `x̂ = Nx − (N−1)x̃` and
/// `ŷ = Ny − (N−1)ỹ`. `None` unless `x̂ ∈ [0, 1]` and `ŷ ≥ Q`.
pub fn main_inequality_m_slack(p: &Params<f64>, x: f64, y: f64, xt: f64, yt: f64) -> Option<f64> {
    let n = p.n() as f64;
    let q = *p.q();
    let tol = 1e-12;
    let xh = n * x - (n - 1.0) * xt;
    let yh = n * y - (n - 1.0) * yt;
    if !(p.in_omega(&x, &y) && p.in_omega(&xt, &yt)) || xh < -tol || xh > 1.0 + tol || yh < q - tol * q {
        return None;
    }
    let xh = xh.clamp(0.0, 1.0);
    let lhs = eval_m(p, x, y).ok()?;
    let rhs = (n - 1.0) / n * eval_m(p, xt, yt).ok()? + yh / (n * q) * eval_m(p, xh, q).ok()?;
    Some(lhs - rhs)
}

/// Main inequality in reduced `M` form.
///
/// Draws `(x̃, ỹ) ∈ Ω`, `x̂ ∈ [0, 1]` and `ŷ ∈ [Q, NQ − (N−1)ỹ]` and sets
/// `x = (x̂ + (N−1)x̃)/N`, `y = (ŷ + (N−1)ỹ)/N`, which covers every admissible
/// configuration without rejection. Samples with `x̃ > x` are counted under
/// `x_tilde_gt_x`.
pub fn check_main_inequality_m(p: &Params<f64>, n_samples: u64, seed: u64, tol: f64) -> Result<CheckReport> {
    need_q(p)?;
    let n = p.n() as f64;
    let q = *p.q();
    let notes = vec!["admits x̂ ∈ [0,1], ŷ ≥ Q; samples with x̃ > x are tagged".to_string()];
    Ok(run_sampler("main-inequality-M", n_samples, seed, tol, notes, |_, rng| {
        let xt = edgy(rng, 0.0, 1.0, 16);
        let yt = edgy(rng, 1.0, q, 16);
        let xh = edgy(rng, 0.0, 1.0, 16);
        let yh = edgy(rng, q, n * q - (n - 1.0) * yt, 16);
        let x = ((xh + (n - 1.0) * xt) / n).clamp(0.0, 1.0);
        let y = ((yh + (n - 1.0) * yt) / n).clamp(1.0, q);
        let slack = main_inequality_m_slack(p, x, y, xt, yt)?;
        Some(Draw {
            slack,
            witness: vec![("x", x), ("y", y), ("x_tilde", xt), ("y_tilde", yt), ("x_hat", xh), ("y_hat", yh)],
            tag: (xt > x).then_some("x_tilde_gt_x"),
        })
    }))
}

/// `B(x̄, ȳ, min m) − ⟨B(x_i, y_i, m_i)⟩`, or `None` if a point leaves `Ω_B`.
pub fn main_inequality_b_slack(p: &Params<f64>, children: &[(f64, f64, f64)]) -> Option<f64> {
    let k = children.len() as f64;
    let x = children.iter().map(|c| c.0).sum::<f64>() / k;
    let y = children.iter().map(|c| c.1).sum::<f64>() / k;
    let m = children.iter().map(|c| c.2).fold(f64::INFINITY, f64::min);
    let parent = eval_b(p, x.min(1.0), y, m).ok()?;
    let mut avg = 0.0;
    for &(xi, yi, mi) in children {
        avg += eval_b(p, xi, yi, mi).ok()?;
    }
    Some(parent - avg / k)
}

/// Main inequality for `B` on `N`-tuples with `min m_i = 1`.
///
/// Sample `i` falls in stratum `i mod N`. Stratum 0 draws general tuples
/// (`m_i ∈ [1, Q]`, one of them 1, `y_i ∈ [m_i, Q m_i]`), shrinking the
/// excesses `y_i − m_i` by a common factor when needed to keep `ȳ ≤ Q`.
/// Stratum `k ≥ 1` draws the specialization with `k` children at `m = 1` and
/// `N − k` children on `y = Q m`, spending part of the room `Σ (Q − y_low)` on
/// the latter so that `ȳ ≤ Q`.
pub fn check_main_inequality_b(p: &Params<f64>, n_samples: u64, seed: u64, tol: f64) -> Result<CheckReport> {
    need_q(p)?;
    let n = p.n();
    let q = *p.q();
    let notes = vec![format!("strata 0..{} (index mod N); stratum 0 is the general tuple", n - 1)];
    Ok(run_sampler("main-inequality-B", n_samples, seed, tol, notes, |i, rng| {
        let stratum = (i % n) as usize;
        let n = n as usize;
        let mut children = Vec::with_capacity(n);
        if stratum == 0 {
            let pivot = rng.random_range(0..n);
            let ms: Vec<f64> = (0..n).map(|j| if j == pivot { 1.0 } else { edgy(rng, 1.0, q, 16) }).collect();
            let room: Vec<f64> = ms.iter().map(|&m| edgy(rng, 0.0, 1.0, 16) * (q - 1.0) * m).collect();
            let spare = n as f64 * q - ms.iter().sum::<f64>();
            let want: f64 = room.iter().sum();
            let s = if want > spare { spare / want } else { 1.0 };
            for (m, r) in ms.into_iter().zip(room) {
                children.push((edgy(rng, 0.0, 1.0, 16), (m + s * r).min(q * m), m));
            }
        } else {
            let k = stratum;
            let mut budget = 0.0;
            for _ in 0..k {
                let y = edgy(rng, 1.0, q, 16);
                budget += q - y;
                children.push((edgy(rng, 0.0, 1.0, 16), y, 1.0));
            }
            let t = edgy(rng, 0.0, 1.0, 8);
            let g: Vec<f64> = (k..n).map(|_| rng.random::<f64>() + 1e-3).collect();
            let gs: f64 = g.iter().sum();
            for gi in g {
                let y = q + t * budget * gi / gs;
                children.push((edgy(rng, 0.0, 1.0, 16), y, y / q));
            }
        }
        let slack = main_inequality_b_slack(p, &children)?;
        let mut witness = vec![("stratum", stratum as f64)];
        const NAMES: [(&str, &str, &str); 8] = [
            ("x0", "y0", "m0"), ("x1", "y1", "m1"), ("x2", "y2", "m2"), ("x3", "y3", "m3"),
            ("x4", "y4", "m4"), ("x5", "y5", "m5"), ("x6", "y6", "m6"), ("x7", "y7", "m7"),
        ];
        for (c, names) in children.iter().zip(NAMES.iter()) {
            witness.extend([(names.0, c.0), (names.1, c.1), (names.2, c.2)]);
        }
        Some(Draw { slack, witness, tag: None })
    }))
}

/// `M_k(x,y) − ((N−1)/N) M_k(x̃,ỹ) − (ŷ/(NQ)) M_k(x̂,Q)`, or `None` when the
/// configuration is inadmissible: `(x, y) ∉ Ω_k`, `x̂ ∉ [0, N^{−k}]` or `ŷ < Q`.
pub fn wedge_slack(p: &Params<f64>, k: u32, x: f64, y: f64, xt: f64, yt: f64) -> Option<f64> {
    let n = p.n() as f64;
    let q = *p.q();
    let tol = 1e-12;
    let xh = n * x - (n - 1.0) * xt;
    let yh = n * y - (n - 1.0) * yt;
    let node = n.powi(-(k as i32));
    if !p.in_omega_k(k, &x, &y) || !p.in_omega(&xt, &yt) {
        return None;
    }
    if xh < -tol || xh > node * (1.0 + tol) || yh < q * (1.0 - tol) {
        return None;
    }
    let xh = xh.clamp(0.0, node);
    let lhs = wedge_mk(p, k, x, y).ok()?;
    let rhs = (n - 1.0) / n * wedge_mk(p, k, xt, yt).ok()? + yh / (n * q) * wedge_mk(p, k, xh, q).ok()?;
    Some(lhs - rhs)
}

/// Wedge inequality for `k = 1..=k_max` (stratum `1 + i mod k_max`).
///
/// Draws `x̂ ∈ [0, N^{−k}]`, `(x̃, ỹ) ∈ Ω`, `ŷ ∈ [Q, NQ − (N−1)ỹ]` and rejects
/// unless the derived `(x, y)` lies in `Ω_k`.
pub fn check_wedge_inequality(
    p: &Params<f64>,
    k_max: u32,
    n_samples: u64,
    seed: u64,
    tol: f64,
) -> Result<CheckReport> {
    need_q(p)?;
    if k_max < 1 {
        return Err(Error::Precondition("k_max must be at least 1".into()));
    }
    let n = p.n() as f64;
    let q = *p.q();
    let notes = vec![format!("k = 1..={k_max}; admits x̂ ∈ [0, N^-k], ŷ ≥ Q, (x, y) ∈ Ω_k")];
    Ok(run_sampler("wedge-inequality", n_samples, seed, tol, notes, |i, rng| {
        let k = 1 + (i % k_max as u64) as u32;
        let node = n.powi(-(k as i32));
        let xt = edgy(rng, 0.0, 1.0, 16);
        let yt = edgy(rng, 1.0, q, 16);
        let xh = edgy(rng, 0.0, node, 16);
        let yh = edgy(rng, q, n * q - (n - 1.0) * yt, 16);
        let x = ((xh + (n - 1.0) * xt) / n).clamp(0.0, 1.0);
        let y = ((yh + (n - 1.0) * yt) / n).clamp(1.0, q);
        let slack = wedge_slack(p, k, x, y, xt, yt)?;
        Some(Draw {
            slack,
            witness: vec![("k", k as f64), ("x", x), ("y", y), ("x_tilde", xt), ("y_tilde", yt)],
            tag: None,
        })
    }))
}
