use std::collections::BTreeMap;

use super::{CheckReport, DEFAULT_TOL};
use crate::dyadic::DyadicWeight;
use crate::params::Params;

/// `p_max([w])`, infinite for `[w] = 1`.
pub fn weak_type_endpoint(w: &DyadicWeight<f64>) -> f64 {
    let c = w.a1_characteristic();
    if c <= 1.0 {
        return f64::INFINITY;
    }
    let d = (w.fanout() as f64).log2().round() as u32;
    Params::new(c, d.max(1)).and_then(|p| p.osekowski_p_max()).unwrap_or(f64::INFINITY)
}

/// `sup_λ λ |{w > λ}|^{1/p}` with the level attaining it.
///
/// The supremum over `λ` between consecutive leaf values is approached as `λ`
/// rises to the upper value `v`, giving `v · |{w ≥ v}|^{1/p}`.
pub fn weak_type_norm(w: &DyadicWeight<f64>, p_exp: f64) -> (f64, f64) {
    let mut dist = w.leaf_distribution();
    dist.sort_by(|a, b| b.0.total_cmp(&a.0));
    let inv = if p_exp.is_infinite() { 0.0 } else { 1.0 / p_exp };
    let mut tail = 0.0;
    let mut best = (0.0, 0.0);
    let mut i = 0;
    while i < dist.len() {
        let v = dist[i].0;
        while i < dist.len() && dist[i].0 == v {
            tail += dist[i].1;
            i += 1;
        }
        let val = v * tail.min(1.0).powf(inv);
        if val > best.0 {
            best = (val, v);
        }
    }
    best
}

/// `∫w − ‖w‖_{L^{p,∞}}`, required `≥ −tol·∫w`.
///
/// Needs `ess inf w = 1` and `p_exp ≤ p_max([w])`; otherwise the report is
/// marked inapplicable and fails.
pub fn check_weak_type(w: &DyadicWeight<f64>, p_exp: f64) -> CheckReport {
    let integral = w.average();
    let endpoint = weak_type_endpoint(w);
    let mut counters = BTreeMap::new();
    let mut notes = vec![format!("p = {p_exp}, p_max([w]) = {endpoint}")];
    let tol = DEFAULT_TOL * integral.max(1.0);
    let inapplicable = if (w.ess_inf() - 1.0).abs() > 1e-12 {
        Some("weight is not normalized (ess inf ≠ 1)")
    } else if p_exp.is_nan() || p_exp <= 0.0 || p_exp > endpoint * (1.0 + 1e-12) {
        Some("exponent above the weak-type endpoint")
    } else {
        None
    };
    if let Some(why) = inapplicable {
        counters.insert("inapplicable".into(), 1);
        notes.push(format!("inapplicable: {why}"));
        return CheckReport {
            suite: "weak-type".into(),
            samples: 0,
            worst_slack: f64::NAN,
            worst_witness: BTreeMap::new(),
            passed: false,
            tol,
            counters,
            notes,
        };
    }
    let (norm, level) = weak_type_norm(w, p_exp);
    let slack = integral - norm;
    let witness = BTreeMap::from([
        ("level".to_string(), level),
        ("norm".to_string(), norm),
        ("integral".to_string(), integral),
        ("p".to_string(), p_exp),
    ]);
    counters.insert("levels".into(), w.leaf_distribution().len() as u64);
    CheckReport::finish("weak-type", 1, Some((slack, witness)), tol, counters, notes)
}
