use rand::Rng;

use super::{run_points, run_sampler, CheckReport, Draw};
use crate::bellman::{eval_b, eval_f, eval_f_smooth, eval_m, lower_branch, upper_branch, wedge_mk};
use crate::error::{Error, Result};
use crate::params::Params;

fn need_q(p: &Params<f64>) -> Result<()> {
    if p.is_degenerate() {
        return Err(Error::Degenerate("property suites need Q > 1"));
    }
    Ok(())
}

/// `M(λp₁ + (1−λ)p₂) − λM(p₁) − (1−λ)M(p₂)` over random pairs in `Ω`.
pub fn check_concavity(p: &Params<f64>, n_samples: u64, seed: u64, tol: f64) -> Result<CheckReport> {
    need_q(p)?;
    let q = *p.q();
    Ok(run_sampler("concavity", n_samples, seed, tol, vec![], |_, rng| {
        let (x1, y1) = (rng.random::<f64>(), 1.0 + (q - 1.0) * rng.random::<f64>());
        let (x2, y2) = (rng.random::<f64>(), 1.0 + (q - 1.0) * rng.random::<f64>());
        let l: f64 = rng.random();
        let mid = eval_m(p, l * x1 + (1.0 - l) * x2, l * y1 + (1.0 - l) * y2).ok()?;
        let slack = mid - l * eval_m(p, x1, y1).ok()? - (1.0 - l) * eval_m(p, x2, y2).ok()?;
        Some(Draw {
            slack,
            witness: vec![("x1", x1), ("y1", y1), ("x2", x2), ("y2", y2), ("lambda", l)],
            tag: None,
        })
    }))
}

/// `t₁M(x, y/t₁) − t₂M(x, y/t₂)` for `1 ≤ t₁ < t₂ ≤ y`.
pub fn check_t_monotonicity(p: &Params<f64>, n_samples: u64, seed: u64, tol: f64) -> Result<CheckReport> {
    need_q(p)?;
    let q = *p.q();
    Ok(run_sampler("t-monotonicity", n_samples, seed, tol, vec![], |_, rng| {
        let x: f64 = rng.random();
        let y = 1.0 + (q - 1.0) * rng.random::<f64>();
        let t2 = 1.0 + (y - 1.0) * rng.random::<f64>();
        let t1 = 1.0 + (t2 - 1.0) * rng.random::<f64>();
        let slack = t1 * eval_m(p, x, y / t1).ok()? - t2 * eval_m(p, x, (y / t2).max(1.0)).ok()?;
        Some(Draw { slack, witness: vec![("x", x), ("y", y), ("t1", t1), ("t2", t2)], tag: None })
    }))
}

/// `f̃(x) − f(x)` on a uniform grid of `n_grid` points in `[0, 1]`, plus all nodes.
pub fn check_smooth_bound(p: &Params<f64>, n_grid: usize, tol: f64) -> Result<CheckReport> {
    need_q(p)?;
    let n = p.n() as f64;
    let mut xs: Vec<f64> = (0..n_grid).map(|i| i as f64 / (n_grid.max(2) - 1) as f64).collect();
    xs.extend((0..=40).map(|k| n.powi(-k)));
    Ok(run_points("smooth-bound", &xs, tol, vec![], |&x| {
        let slack = eval_f_smooth(p, x).ok()? - eval_f(p, x).ok()?;
        Some(Draw { slack, witness: vec![("x", x)], tag: None })
    }))
}

/// `−|f(N^{−k}) − f̃(N^{−k})| / (Qη^k)` for `k ≤ k_max`; passes at `tol = 1e−12`.
pub fn check_node_identity(p: &Params<f64>, k_max: u32, tol: f64) -> Result<CheckReport> {
    need_q(p)?;
    let n = p.n() as f64;
    let ks: Vec<u32> = (0..=k_max).collect();
    Ok(run_points("node-identity", &ks, tol, vec![], |&k| {
        let x = n.powi(-(k as i32));
        let exact = p.q() * p.eta().powi(k as i32);
        let f = eval_f(p, x).ok()?;
        let g = eval_f_smooth(p, x).ok()?;
        let err = ((f - g).abs().max((f - exact).abs())) / exact;
        Some(Draw { slack: -err, witness: vec![("k", k as f64), ("f", f), ("f_smooth", g)], tag: None })
    }))
}

/// `−|lower − upper|` on `n_points` points of `y = 1 + (Q−1)x`, `x ∈ (0, 1]`.
pub fn check_branch_continuity(p: &Params<f64>, n_points: usize, tol: f64) -> Result<CheckReport> {
    need_q(p)?;
    let q = *p.q();
    let xs: Vec<f64> = (1..=n_points).map(|i| i as f64 / n_points as f64).collect();
    Ok(run_points("branch-continuity", &xs, tol, vec![], |&x| {
        let y = 1.0 + (q - 1.0) * x;
        let slack = -(lower_branch(x, y) - upper_branch(p, x, y)).abs();
        Some(Draw { slack, witness: vec![("x", x), ("y", y)], tag: None })
    }))
}

/// `−|B(x, λy, λm) − λB(x, y, m)| / max(1, λB)` over random `(x, y, m, λ)`.
pub fn check_homogeneity(p: &Params<f64>, n_samples: u64, seed: u64, tol: f64) -> Result<CheckReport> {
    need_q(p)?;
    let q = *p.q();
    Ok(run_sampler("homogeneity", n_samples, seed, tol, vec![], |_, rng| {
        let x: f64 = rng.random();
        let m = (rng.random::<f64>() * 6.0 - 3.0).exp();
        let y = m * (1.0 + (q - 1.0) * rng.random::<f64>());
        let l = (rng.random::<f64>() * 6.0 - 3.0).exp();
        let scaled = eval_b(p, x, l * y, l * m).ok()?;
        let base = l * eval_b(p, x, y, m).ok()?;
        let slack = -(scaled - base).abs() / base.abs().max(1.0);
        Some(Draw { slack, witness: vec![("x", x), ("y", y), ("m", m), ("lambda", l)], tag: None })
    }))
}

/// `M_k − M` on an `n_grid × n_grid` grid of `Ω` for `k = 1..=k_max`.
pub fn check_wedge_domination(p: &Params<f64>, k_max: u32, n_grid: usize, tol: f64) -> Result<CheckReport> {
    need_q(p)?;
    let q = *p.q();
    let g = n_grid.max(2);
    let mut pts = Vec::with_capacity(g * g * k_max as usize);
    for k in 1..=k_max {
        for i in 0..g {
            for j in 0..g {
                let x = i as f64 / (g - 1) as f64;
                let y = 1.0 + (q - 1.0) * j as f64 / (g - 1) as f64;
                pts.push((k, x, y));
            }
        }
    }
    Ok(run_points("wedge-domination", &pts, tol, vec![], |&(k, x, y)| {
        let slack = wedge_mk(p, k, x, y).ok()? - eval_m(p, x, y).ok()?;
        Some(Draw { slack, witness: vec![("k", k as f64), ("x", x), ("y", y)], tag: None })
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn property_suites_pass() {
        for (q, d) in [(10.0, 2), (2.0, 1), (5.0, 3), (1.5, 1)] {
            let p = Params::new(q, d).unwrap();
            for r in [
                check_concavity(&p, 3000, 1, 1e-9).unwrap(),
                check_t_monotonicity(&p, 3000, 1, 1e-9).unwrap(),
                check_smooth_bound(&p, 5000, 1e-9).unwrap(),
                check_node_identity(&p, 40, 1e-12).unwrap(),
                check_branch_continuity(&p, 1000, 1e-9).unwrap(),
                check_homogeneity(&p, 1000, 1, 1e-12).unwrap(),
                check_wedge_domination(&p, 10, 30, 1e-9).unwrap(),
            ] {
                assert!(r.passed, "{r:?}");
            }
        }
    }

    #[test]
    fn t_monotonicity_endpoints() {
        let p = Params::new(10.0, 2).unwrap();
        let a = eval_m(&p, 1.0, 10.0).unwrap();
        let b = 10.0 * eval_m(&p, 1.0, 1.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn concavity_on_dividing_line_is_tight() {
        let p = Params::new(10.0, 2).unwrap();
        let m = |x: f64| eval_m(&p, x, 1.0 + 9.0 * x).unwrap();
        let (a, b, l) = (0.2, 0.8, 0.3);
        let s = m(l * a + (1.0 - l) * b) - l * m(a) - (1.0 - l) * m(b);
        assert!(s.abs() < 1e-12);
    }
}
