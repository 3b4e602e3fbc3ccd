//! Acceptance criteria 1–8, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach the terminal; exits 1 if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use a1_bellman::bellman::eval_m;
use a1_bellman::extremize::{build_corner, build_extremizer};
use a1_bellman::scalar::ratio;
use a1_bellman::verify::{self, CheckReport};
use a1_bellman::{BigRational, ExactParams, Params64};
use a1_bellman_cli::{cmd_plot_data, ParamArgs};
use num_traits::{One, Pow};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GOLDEN: &str = include_str!("golden/plot_data_Q10_d2.csv");

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check, Duration);

fn p(q: f64, d: u32) -> Params64 {
    Params64::new(q, d).unwrap()
}

fn require(r: &CheckReport, what: &str) -> Result<(), String> {
    if r.passed {
        Ok(())
    } else {
        Err(format!("{what}: {} (witness {:?})", r.summary(), r.worst_witness))
    }
}

fn corner_exactness() -> Check {
    let p = ExactParams::new(ratio(10, 1), 2).unwrap();
    let four = BigRational::from_integer(4.into());
    for k in 0..=8u32 {
        let s = build_corner(&p, k as usize).map_err(|e| e.to_string())?.achieved;
        let value = ratio(10, 1) * Pow::pow(ratio(37, 40), k);
        let want = (BigRational::one() / Pow::pow(&four, k), ratio(10, 1), BigRational::one(), ratio(10, 1), value);
        if (s.x.clone(), s.y.clone(), s.m.clone(), s.char.clone(), s.value.clone()) != want {
            return Err(format!("k={k}: got {s:?}"));
        }
    }
    let s3 = build_corner(&p, 3).unwrap().achieved;
    if s3.value != ratio(791_453_125, 100_000_000) || s3.x != ratio(1, 64) {
        return Err(format!("k=3: {s3:?}"));
    }
    Ok("k=0..8 exact; k=3 value 7.91453125, |E| = 1/64".into())
}

fn node_identity() -> Check {
    for (q, d) in [(10.0, 2), (2.0, 1), (100.0, 3)] {
        require(&verify::check_node_identity(&p(q, d), 40, 1e-12).unwrap(), &format!("Q={q} d={d}"))?;
    }
    Ok("k ≤ 40 at rel 1e-12 for (10,2), (2,1), (100,3)".into())
}

fn main_inequalities() -> Check {
    let mut worst = f64::INFINITY;
    for (q, d) in [(10.0, 2), (2.0, 1), (5.0, 3)] {
        let p = p(q, d);
        for r in [
            verify::check_main_inequality_m(&p, 100_000, 1, 1e-9).unwrap(),
            verify::check_main_inequality_b(&p, 100_000, 2, 1e-9).unwrap(),
            verify::check_wedge_inequality(&p, 6, 100_000, 3, 1e-9).unwrap(),
        ] {
            require(&r, &format!("Q={q} d={d}"))?;
            if r.samples < 100_000 {
                return Err(format!("{}: only {} admitted samples", r.suite, r.samples));
            }
            worst = worst.min(r.worst_slack);
        }
    }
    Ok(format!("M, B (all strata), wedge k ≤ 6; 1e5 samples each; worst slack {worst:.2e}"))
}

fn property_suites() -> Check {
    for (q, d) in [(10.0, 2), (2.0, 1), (5.0, 3)] {
        let p = p(q, d);
        for r in [
            verify::check_concavity(&p, 10_000, 4, 1e-9).unwrap(),
            verify::check_t_monotonicity(&p, 10_000, 5, 1e-9).unwrap(),
            verify::check_smooth_bound(&p, 100_000, 1e-9).unwrap(),
            verify::check_branch_continuity(&p, 1000, 1e-9).unwrap(),
            verify::check_homogeneity(&p, 1000, 6, 1e-12).unwrap(),
            verify::check_wedge_domination(&p, 10, 100, 1e-9).unwrap(),
        ] {
            require(&r, &format!("Q={q} d={d}"))?;
        }
    }
    Ok("concavity, t-monotonicity, smooth bound, branch continuity, homogeneity, wedge domination".into())
}

fn oracle_sandwich() -> Check {
    let p = p(2.0, 1);
    let table = verify::brute_force_oracle(&p, 2, &verify::default_grid(&p, 6, 2)).map_err(|e| e.to_string())?;
    require(&verify::oracle_vs_closed_form(&table, &p, 1e-9).unwrap(), "oracle")?;
    for (x, want) in [(0.5, 1.5), (0.25, 1.125)] {
        let got = table.find(x, 2.0).map(|b| b.value);
        if got.is_none_or(|v| (v - want).abs() > 1e-12) {
            return Err(format!("corner ({x}, 2): {got:?}, want {want}"));
        }
    }
    Ok(format!("{} buckets ≤ B; corners (1/2,2) = 1.5, (1/4,2) = 1.125", table.buckets.len()))
}

fn extremizer_convergence() -> Check {
    let p = p(10.0, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_ratio: f64 = 0.0;
    for i in 0..50 {
        let x: f64 = rng.random();
        let y = 1.0 + 9.0 * rng.random::<f64>();
        let bound = eval_m(&p, x, y).unwrap();
        let mut prev = f64::INFINITY;
        for depth in [12usize, 16, 20] {
            let pair = build_extremizer(&p, x, y, depth).map_err(|e| format!("({x}, {y}) depth {depth}: {e}"))?;
            let gap = bound - pair.achieved.value;
            let cap = 2.0 * 10.0 * 2f64.powi(-(depth as i32));
            if gap < -1e-9 || gap > cap || gap > prev + 1e-12 {
                return Err(format!("point {i} ({x}, {y}) depth {depth}: gap {gap:e}, previous {prev:e}, cap {cap:e}"));
            }
            worst_ratio = worst_ratio.max(gap / cap);
            prev = gap;
        }
    }
    Ok(format!("50 points, depths 12/16/20; gap nonincreasing, max gap/(2Q·2^-D) = {worst_ratio:.3}"))
}

fn weak_type() -> Check {
    let p10 = p(10.0, 2);
    for k in 0..=8 {
        let c = build_corner(&p10, k).unwrap();
        require(&verify::check_weak_type(&c.w, verify::weak_type_endpoint(&c.w)), &format!("corner {k}"))?;
    }
    let mut witnesses = Vec::new();
    for q in [2.0, 3.0] {
        let p = p(q, 1);
        let table = verify::brute_force_oracle(&p, 2, &verify::default_grid(&p, 6, 2)).unwrap();
        for b in &table.buckets {
            witnesses.push(table.witness(b.witness_id).unwrap().0);
        }
    }
    witnesses.truncate(100);
    if witnesses.len() < 100 {
        return Err(format!("only {} oracle witnesses", witnesses.len()));
    }
    for (i, w) in witnesses.iter().enumerate() {
        require(&verify::check_weak_type(w, verify::weak_type_endpoint(w)), &format!("witness {i}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let q = (rng.random::<f64>() * 7.0).exp() + 1e-3;
        let d = rng.random_range(1..=20);
        let p = p(1.0 + q, d);
        let pm = p.osekowski_p_max().unwrap();
        if ((1.0 - 1.0 / pm) - p.epsilon()).abs() > 1e-12 {
            return Err(format!("Q={} d={d}: 1 − 1/p_max = {}, ε = {}", 1.0 + q, 1.0 - 1.0 / pm, p.epsilon()));
        }
    }
    Ok("corners k ≤ 8, 100 oracle witnesses, 1 − 1/p_max = ε on 100 (Q, d)".into())
}

fn figure_one() -> Check {
    let args = ParamArgs { q: 10.0, d: 2 };
    let a = cmd_plot_data(&args, 200).map_err(|e| e.to_string())?;
    let b = cmd_plot_data(&args, 200).map_err(|e| e.to_string())?;
    if a != b || a != GOLDEN {
        return Err("output differs from the golden file".into());
    }
    let mut nodes = 0;
    for line in a.lines().skip(2) {
        let v: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let (x, fq, gq) = (v[0], v[3], v[4]);
        if fq > gq * (1.0 + 1e-12) {
            return Err(format!("f > f̃ at x = {x}"));
        }
        let k = -x.log(4.0);
        if (k - k.round()).abs() < 1e-9 {
            nodes += 1;
            if (fq - gq).abs() > 1e-12 * gq {
                return Err(format!("f/Q ≠ f̃/Q at node x = {x}"));
            }
        }
    }
    Ok(format!("{} rows, {nodes} nodes agree, f ≤ f̃, golden file identical", a.lines().count() - 2))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("corner exactness", corner_exactness, Duration::from_secs(1)),
        ("node identity", node_identity, Duration::from_secs(1)),
        ("main inequality suites", main_inequalities, Duration::from_secs(30)),
        ("property suites", property_suites, Duration::from_secs(10)),
        ("oracle sandwich", oracle_sandwich, Duration::from_secs(300)),
        ("extremizer convergence", extremizer_convergence, Duration::from_secs(60)),
        ("weak-type corollary", weak_type, Duration::from_secs(60)),
        ("figure 1 data", figure_one, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (i, (name, check, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let took = start.elapsed();
        let line = match result {
            Ok(detail) if took <= *budget => format!("PASS  criterion {} ({name}) [{:.2}s] {detail}", i + 1, took.as_secs_f64()),
            Ok(detail) => {
                failed += 1;
                format!("FAIL  criterion {} ({name}) [{:.2}s > {:?}] {detail}", i + 1, took.as_secs_f64(), budget)
            }
            Err(why) => {
                failed += 1;
                format!("FAIL  criterion {} ({name}) [{:.2}s] {why}", i + 1, took.as_secs_f64())
            }
        };
        println!("{line}");
    }
    if failed == 0 {
        println!("acceptance: 8/8 passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failed} of 8 failed");
        ExitCode::FAILURE
    }
}
