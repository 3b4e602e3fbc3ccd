//! Independent checks of the closed form and the constructions.
//!
//! Random suites draw sample `i` from its own ChaCha8 stream (`seed`, stream
//! `i`), so reports do not depend on thread count or scheduling. Each report
//! keeps the smallest slack `LHS − RHS` and the sample attaining it.

mod inequality;
mod oracle;
mod properties;
mod weak;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

pub use inequality::{
    check_main_inequality_b, check_main_inequality_m, check_wedge_inequality,
    main_inequality_b_slack, main_inequality_m_slack, wedge_slack,
};
pub use oracle::{
    brute_force_oracle, default_grid, oracle_vs_closed_form, OracleBucket, OracleTable,
    ORACLE_CANDIDATE_LIMIT, Y_BUCKET_FRACTION,
};
pub use properties::{
    check_branch_continuity, check_concavity, check_homogeneity, check_node_identity,
    check_smooth_bound, check_t_monotonicity, check_wedge_domination,
};
pub use weak::{check_weak_type, weak_type_endpoint, weak_type_norm};

/// Default slack tolerance for double-precision suites.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Draws allowed per sample index before it counts as rejected.
pub const MAX_ATTEMPTS: u32 = 256;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub suite: String,
    /// Admitted samples.
    pub samples: u64,
    /// Smallest `LHS − RHS`; NaN when nothing was admitted.
    pub worst_slack: f64,
    pub worst_witness: BTreeMap<String, f64>,
    pub passed: bool,
    pub tol: f64,
    pub counters: BTreeMap<String, u64>,
    pub notes: Vec<String>,
}

impl CheckReport {
    fn finish(
        suite: impl Into<String>,
        samples: u64,
        worst: Option<(f64, BTreeMap<String, f64>)>,
        tol: f64,
        counters: BTreeMap<String, u64>,
        mut notes: Vec<String>,
    ) -> Self {
        let (worst_slack, worst_witness) = worst.unwrap_or((f64::NAN, BTreeMap::new()));
        if samples == 0 {
            notes.push("no admissible samples".into());
        }
        CheckReport {
            suite: suite.into(),
            samples,
            worst_slack,
            worst_witness,
            passed: worst_slack >= -tol,
            tol,
            counters,
            notes,
        }
    }

    /// One-line summary: `PASS suite samples=… worst_slack=…`.
    pub fn summary(&self) -> String {
        format!(
            "{} {} samples={} worst_slack={:.3e} tol={:.0e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.suite,
            self.samples,
            self.worst_slack,
            self.tol
        )
    }
}

/// One admitted draw.
pub(crate) struct Draw {
    pub slack: f64,
    pub witness: Witness,
    /// Extra counter to bump, e.g. which side condition held.
    pub tag: Option<&'static str>,
}

type Witness = Vec<(&'static str, f64)>;

#[derive(Default)]
struct Acc {
    worst: Option<(f64, u64, Witness)>,
    admitted: u64,
    rejected: u64,
    tags: BTreeMap<&'static str, (u64, f64)>,
}

impl Acc {
    fn push(&mut self, index: u64, draw: Option<Draw>) {
        let Some(draw) = draw else {
            self.rejected += 1;
            return;
        };
        self.admitted += 1;
        let slack = if draw.slack.is_nan() { f64::NEG_INFINITY } else { draw.slack };
        if let Some(tag) = draw.tag {
            let e = self.tags.entry(tag).or_insert((0, f64::INFINITY));
            e.0 += 1;
            e.1 = e.1.min(slack);
        }
        let better = match &self.worst {
            None => true,
            Some((s, i, _)) => slack < *s || (slack == *s && index < *i),
        };
        if better {
            self.worst = Some((slack, index, draw.witness));
        }
    }

    fn merge(mut self, other: Acc) -> Acc {
        self.admitted += other.admitted;
        self.rejected += other.rejected;
        for (k, (c, s)) in other.tags {
            let e = self.tags.entry(k).or_insert((0, f64::INFINITY));
            e.0 += c;
            e.1 = e.1.min(s);
        }
        if let Some((s, i, w)) = other.worst {
            let better = match &self.worst {
                None => true,
                Some((s0, i0, _)) => s < *s0 || (s == *s0 && i < *i0),
            };
            if better {
                self.worst = Some((s, i, w));
            }
        }
        self
    }
}

/// Runs `draw` on `n_samples` independent streams and reduces to the worst slack.
///
/// `draw(i, rng)` returns `None` for an inadmissible draw and is retried up to
/// [`MAX_ATTEMPTS`] times on the same stream.
pub(crate) fn run_sampler<F>(
    suite: &str,
    n_samples: u64,
    seed: u64,
    tol: f64,
    mut notes: Vec<String>,
    draw: F,
) -> CheckReport
where
    F: Fn(u64, &mut ChaCha8Rng) -> Option<Draw> + Sync,
{
    let acc = (0..n_samples)
        .into_par_iter()
        .fold(Acc::default, |mut acc, i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i);
            let mut got = None;
            for _ in 0..MAX_ATTEMPTS {
                got = draw(i, &mut rng);
                if got.is_some() {
                    break;
                }
            }
            acc.push(i, got);
            acc
        })
        .reduce(Acc::default, Acc::merge);

    let mut counters = BTreeMap::new();
    counters.insert("admitted".to_string(), acc.admitted);
    counters.insert("rejected".to_string(), acc.rejected);
    for (tag, (count, worst)) in &acc.tags {
        counters.insert((*tag).to_string(), *count);
        if *count > 0 {
            notes.push(format!("{tag}: {count} samples, worst slack {worst:.3e}"));
        }
    }
    let worst = acc.worst.map(|(s, i, w)| {
        let mut map: BTreeMap<String, f64> = w.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        map.insert("index".into(), i as f64);
        (s, map)
    });
    CheckReport::finish(suite, acc.admitted, worst, tol, counters, notes)
}

/// Deterministic evaluation over a fixed list of points.
pub(crate) fn run_points<P, F>(suite: &str, points: &[P], tol: f64, notes: Vec<String>, eval: F) -> CheckReport
where
    P: Sync,
    F: Fn(&P) -> Option<Draw> + Sync,
{
    let acc = points
        .par_iter()
        .enumerate()
        .fold(Acc::default, |mut acc, (i, pt)| {
            acc.push(i as u64, eval(pt));
            acc
        })
        .reduce(Acc::default, Acc::merge);
    let mut counters = BTreeMap::new();
    counters.insert("admitted".to_string(), acc.admitted);
    counters.insert("rejected".to_string(), acc.rejected);
    for (tag, (count, _)) in &acc.tags {
        counters.insert((*tag).to_string(), *count);
    }
    let worst = acc.worst.map(|(s, i, w)| {
        let mut map: BTreeMap<String, f64> = w.into_iter().map(|(k, v)| (k.to_string(), v)).collect();
        map.insert("index".into(), i as f64);
        (s, map)
    });
    CheckReport::finish(suite, acc.admitted, worst, tol, counters, notes)
}
