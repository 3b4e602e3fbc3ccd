use a1_bellman::dyadic::{stats, DyadicSet, DyadicWeight};
use a1_bellman::extremize::{apply_t, boundary_weight, build_corner, build_extremizer, concatenate, ExtremalPair};
use a1_bellman::scalar::ratio;
use a1_bellman::{BigRational, ExactParams};
use num_traits::{One, Pow};

fn params(q: (i64, i64), d: u32) -> ExactParams {
    ExactParams::new(ratio(q.0, q.1), d).unwrap()
}

#[test]
fn corners_are_exact_up_to_twelve() {
    for (q, d) in [((10, 1), 2), ((2, 1), 1), ((7, 2), 3), ((5, 1), 1)] {
        let p = params(q, d);
        let n = BigRational::from_integer((1i64 << d).into());
        for k in 0..=12u32 {
            let c = build_corner(&p, k as usize).unwrap();
            let s = &c.achieved;
            assert_eq!(s.x, BigRational::one() / Pow::pow(&n, k));
            assert_eq!(&s.y, p.q());
            assert_eq!(s.m, BigRational::one());
            assert_eq!(&s.char, p.q());
            assert_eq!(s.value, p.q() * Pow::pow(p.eta(), k));
        }
    }
}

#[test]
fn t_is_exact_on_mixed_pairs() {
    let p = params((10, 1), 2);
    let c0 = build_corner(&p, 0).unwrap();
    let c1 = build_corner(&p, 1).unwrap();
    let mixed = concatenate(&p, ratio(5, 8), &c1, &c0, 6).unwrap();
    let t = apply_t(&p, &mixed).unwrap();
    assert_eq!(t.achieved.value, mixed.achieved.value.clone() * p.eta().clone());
    assert_eq!(t.achieved.x, mixed.achieved.x.clone() / ratio(4, 1));
    assert_eq!(t.achieved.char, mixed.achieved.char);
}

#[test]
fn exact_stats_match_float_stats() {
    let pe = params((10, 1), 2);
    let pf = a1_bellman::Params64::new(10.0, 2).unwrap();
    for k in 0..6 {
        let e = build_corner(&pe, k).unwrap().achieved.to_f64();
        let f = build_corner(&pf, k).unwrap().achieved;
        assert!((e.value - f.value).abs() < 1e-13);
        assert_eq!(e.x, f.x);
    }
}

#[test]
fn exact_pairs_round_trip_through_f64_leaves() {
    let leaves: Vec<BigRational> = [1, 3, 2, 2].iter().map(|&v| ratio(v, 1)).collect();
    let w = DyadicWeight::from_leaves(2, 2, &leaves).unwrap();
    let e = DyadicSet::from_mask(2, 2, &[false, true, true, false]).unwrap();
    let s = stats(&w, &e).unwrap();
    assert_eq!(s.value, ratio(5, 4));
    assert_eq!(s.char, ratio(2, 1));
    let pair = ExtremalPair::from_parts(w, e).unwrap();
    assert_eq!(pair.achieved, s);
}

#[test]
fn exact_boundary_and_dyadic_extremizers() {
    let p = params((10, 1), 2);
    let b = boundary_weight(&p, ratio(7, 1)).unwrap();
    assert_eq!(b.achieved.value, ratio(7, 1));
    // Lower region with dyadic x: λ = x terminates.
    let e = build_extremizer(&p, ratio(1, 2), ratio(3, 1), 4).unwrap();
    assert_eq!(e.achieved.x, ratio(1, 2));
    assert_eq!(e.achieved.y, ratio(3, 1));
    assert_eq!(e.achieved.value, ratio(5, 2));
}
