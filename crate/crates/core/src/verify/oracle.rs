//! Exhaustive search over complete trees with leaf values from a finite grid.
//!
//! Subtrees are built bottom-up and pruned as soon as some node has
//! `⟨w⟩ > Q · min w`, since `[w] = max over nodes of ⟨w⟩_R / min_R w`. For a fixed
//! weight and `|E| = j·N^{−depth}`, the best set is the `j` heaviest leaves.
//!
//! Feasible sizes are roughly `d = 1, depth ≤ 3` and `d = 2, depth 1` with grids
//! of ten or so values; larger requests are refused with the candidate count.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::{run_points, CheckReport, Draw};
use crate::bellman::eval_b;
use crate::dyadic::{stats, DyadicSet, DyadicWeight};
use crate::error::{Error, Result};
use crate::params::Params;

/// Most candidate trees examined at any one level.
pub const ORACLE_CANDIDATE_LIMIT: u128 = 200_000_000;

/// y-bucket width as a fraction of `Q − 1`.
pub const Y_BUCKET_FRACTION: f64 = 0.05;

const CHAR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleBucket {
    pub x: f64,
    pub y_bucket: i64,
    /// Bucket midpoint in `y`.
    pub y_mid: f64,
    /// `⟨w⟩` of the witness.
    pub y: f64,
    pub m: f64,
    pub value: f64,
    pub char: f64,
    pub witness_id: usize,
    pub leaves: Vec<f64>,
    pub set: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleTable {
    #[serde(rename = "Q")]
    pub q: f64,
    pub d: u32,
    pub depth: usize,
    pub grid: Vec<f64>,
    pub y_bucket_width: f64,
    /// Complete trees examined at the top level.
    pub enumerated: u64,
    /// Of those, trees with `[w] ≤ Q` and `ess inf w = 1`.
    pub admissible: u64,
    pub buckets: Vec<OracleBucket>,
}

impl OracleTable {
    pub fn y_bucket(&self, y: f64) -> i64 {
        ((y - 1.0) / self.y_bucket_width).round() as i64
    }

    /// Bucket holding `(x, y)`; `x` must be a multiple of `N^{−depth}`.
    pub fn find(&self, x: f64, y: f64) -> Option<&OracleBucket> {
        let yb = self.y_bucket(y);
        self.buckets.iter().find(|b| b.y_bucket == yb && (b.x - x).abs() < 1e-12)
    }

    pub fn witness(&self, id: usize) -> Result<(DyadicWeight<f64>, DyadicSet<f64>)> {
        let b = self
            .buckets
            .get(id)
            .ok_or_else(|| Error::Precondition(format!("no witness {id}")))?;
        let n = 1usize << self.d;
        Ok((
            DyadicWeight::from_leaves(n, self.depth, &b.leaves)?,
            DyadicSet::from_mask(n, self.depth, &b.set)?,
        ))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `x,y,m,value,witness_id` with `y` the bucket midpoint.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,m,value,witness_id\n");
        for b in &self.buckets {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e},{:.16e},{}", b.x, b.y_mid, b.m, b.value, b.witness_id);
        }
        out
    }
}

/// `{1} ∪ {1 + j(Q−1)N/(G−1)} ∪ {c^i, (1 + N(Q−1))c^i : i < depth}` with `c = Nη`.
///
/// The last family holds the leaf values of the corner pairs at tree depth
/// `≤ depth`, so the corner buckets are reachable.
pub fn default_grid(p: &Params<f64>, g: usize, depth: usize) -> Vec<f64> {
    let q = *p.q();
    let n = p.n() as f64;
    let c = p.corner_factor();
    let top = 1.0 + n * (q - 1.0);
    let mut vals = vec![1.0];
    for i in 0..depth {
        vals.push(c.powi(i as i32));
        vals.push(top * c.powi(i as i32));
    }
    let g = g.max(2);
    for j in 1..g {
        vals.push(1.0 + j as f64 * (q - 1.0) * n / (g - 1) as f64);
    }
    let mut out: Vec<f64> = Vec::new();
    for v in vals {
        if !out.iter().any(|&u| (u - v).abs() <= 1e-12 * v) {
            out.push(v);
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

struct Sub {
    mean: f64,
    min: f64,
    kids: Vec<u32>,
}

fn decode(mut idx: u64, base: u64, n: usize, out: &mut [u32]) {
    for slot in out.iter_mut().take(n).rev() {
        *slot = (idx % base) as u32;
        idx /= base;
    }
}

fn leaves_of(levels: &[Vec<Sub>], level: usize, id: u32, out: &mut Vec<f64>) {
    let s = &levels[level][id as usize];
    if level == 0 {
        out.push(s.mean);
    } else {
        for &k in &s.kids {
            leaves_of(levels, level - 1, k, out);
        }
    }
}

fn candidates(count: usize, n: usize) -> Result<u64> {
    let c = (count as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if c > ORACLE_CANDIDATE_LIMIT {
        return Err(Error::Infeasible(format!(
            "oracle would examine ~{c} candidate trees (limit {ORACLE_CANDIDATE_LIMIT})"
        )));
    }
    Ok(c as u64)
}

#[derive(Clone, Copy)]
struct Best {
    value: f64,
    index: u64,
}

/// Best `w(E)` per `(x, y)` bucket over all admissible grid trees of the given depth.
pub fn brute_force_oracle(p: &Params<f64>, depth: usize, grid: &[f64]) -> Result<OracleTable> {
    if p.is_degenerate() {
        return Err(Error::Degenerate("oracle needs Q > 1"));
    }
    if depth < 1 {
        return Err(Error::Precondition("oracle depth must be at least 1".into()));
    }
    if !grid.contains(&1.0) || grid.iter().any(|&v| v.is_nan() || v < 1.0 || v.is_infinite()) {
        return Err(Error::Precondition("grid must contain 1 and only finite values ≥ 1".into()));
    }
    let q = *p.q();
    let n = p.n() as usize;
    let mut grid = grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let admissible = |mean: f64, min: f64| mean <= (q + CHAR_TOL) * min;

    let mut levels: Vec<Vec<Sub>> = vec![grid.iter().map(|&v| Sub { mean: v, min: v, kids: vec![] }).collect()];
    for _ in 1..depth {
        let prev = levels.last().expect("level 0 exists");
        let base = prev.len() as u64;
        let total = candidates(prev.len(), n)?;
        let next: Vec<Sub> = (0..total)
            .into_par_iter()
            .filter_map(|idx| {
                let mut kids = vec![0u32; n];
                decode(idx, base, n, &mut kids);
                let mean = kids.iter().map(|&k| prev[k as usize].mean).sum::<f64>() / n as f64;
                let min = kids.iter().map(|&k| prev[k as usize].min).fold(f64::INFINITY, f64::min);
                admissible(mean, min).then_some(Sub { mean, min, kids })
            })
            .collect();
        levels.push(next);
    }

    let top = levels.last().expect("at least one level");
    let base = top.len() as u64;
    let total = candidates(top.len(), n)?;
    let n_leaves = n.pow(depth as u32);
    let width = Y_BUCKET_FRACTION * (q - 1.0);
    let levels_ref = &levels;

    type Map = BTreeMap<(usize, i64), Best>;
    let merge = |mut a: Map, b: Map| {
        for (k, v) in b {
            a.entry(k)
                .and_modify(|cur| {
                    if v.value > cur.value || (v.value == cur.value && v.index < cur.index) {
                        *cur = v;
                    }
                })
                .or_insert(v);
        }
        a
    };
    let (map, count) = (0..total)
        .into_par_iter()
        .fold(
            || (Map::new(), 0u64),
            |(mut map, mut count), idx| {
                let mut kids = vec![0u32; n];
                decode(idx, base, n, &mut kids);
                let mean = kids.iter().map(|&k| top[k as usize].mean).sum::<f64>() / n as f64;
                let min = kids.iter().map(|&k| top[k as usize].min).fold(f64::INFINITY, f64::min);
                if min != 1.0 || !admissible(mean, min) {
                    return (map, count);
                }
                count += 1;
                let mut leaves = Vec::with_capacity(n_leaves);
                for &k in &kids {
                    leaves_of(levels_ref, depth - 1, k, &mut leaves);
                }
                leaves.sort_by(|a, b| b.total_cmp(a));
                let yb = ((mean - 1.0) / width).round() as i64;
                let mut acc = 0.0;
                for j in 0..=n_leaves {
                    if j > 0 {
                        acc += leaves[j - 1];
                    }
                    let value = acc / n_leaves as f64;
                    let e = map.entry((j, yb)).or_insert(Best { value, index: idx });
                    if value > e.value || (value == e.value && idx < e.index) {
                        *e = Best { value, index: idx };
                    }
                }
                (map, count)
            },
        )
        .reduce(|| (Map::new(), 0), |(a, ca), (b, cb)| (merge(a, b), ca + cb));

    let mut buckets = Vec::with_capacity(map.len());
    for (id, ((j, yb), best)) in map.into_iter().enumerate() {
        let mut kids = vec![0u32; n];
        decode(best.index, base, n, &mut kids);
        let mut leaves = Vec::with_capacity(n_leaves);
        for &k in &kids {
            leaves_of(&levels, depth - 1, k, &mut leaves);
        }
        let mut order: Vec<usize> = (0..n_leaves).collect();
        order.sort_by(|&a, &b| leaves[b].total_cmp(&leaves[a]).then(a.cmp(&b)));
        let mut set = vec![false; n_leaves];
        for &i in order.iter().take(j) {
            set[i] = true;
        }
        let w = DyadicWeight::from_leaves(n, depth, &leaves)?;
        let e = DyadicSet::from_mask(n, depth, &set)?;
        let s = stats(&w, &e)?;
        buckets.push(OracleBucket {
            x: j as f64 / n_leaves as f64,
            y_bucket: yb,
            y_mid: 1.0 + yb as f64 * width,
            y: s.y,
            m: s.m,
            value: best.value,
            char: s.char,
            witness_id: id,
            leaves,
            set,
        });
    }

    Ok(OracleTable {
        q,
        d: p.d(),
        depth,
        grid,
        y_bucket_width: width,
        enumerated: total,
        admissible: count,
        buckets,
    })
}

enum Probe<'a> {
    Bucket(&'a OracleBucket),
    Corner { k: u32, x: f64, found: Option<&'a OracleBucket> },
}

/// Oracle `≤` closed form at every bucket (witness's own `⟨w⟩`), and oracle
/// `≥ Qη^k − tol` at the corner buckets `(N^{−k}, Q)`, `k ≤ depth`.
pub fn oracle_vs_closed_form(table: &OracleTable, p: &Params<f64>, tol: f64) -> Result<CheckReport> {
    if (table.q - p.q()).abs() > 0.0 || table.d != p.d() {
        return Err(Error::Precondition("oracle table built with different parameters".into()));
    }
    let n = p.n() as f64;
    let q = *p.q();
    let mut probes: Vec<Probe> = table.buckets.iter().map(Probe::Bucket).collect();
    for k in 0..=table.depth as u32 {
        let x = n.powi(-(k as i32));
        probes.push(Probe::Corner { k, x, found: table.find(x, q) });
    }
    let notes = vec![format!("{} buckets; corners k = 0..={}", table.buckets.len(), table.depth)];
    Ok(run_points("oracle-vs-closed-form", &probes, tol, notes, |probe| match probe {
        Probe::Bucket(b) => {
            let bound = eval_b(p, b.x, b.y, b.m).ok()?;
            Some(Draw {
                slack: bound - b.value,
                witness: vec![("x", b.x), ("y", b.y), ("value", b.value), ("witness_id", b.witness_id as f64)],
                tag: None,
            })
        }
        Probe::Corner { k, x, found: Some(b) } => {
            let target = q * p.eta().powi(*k as i32);
            Some(Draw {
                slack: b.value - target,
                witness: vec![("k", *k as f64), ("x", *x), ("value", b.value), ("target", target)],
                tag: Some("corner"),
            })
        }
        Probe::Corner { .. } => None,
    }))
}
