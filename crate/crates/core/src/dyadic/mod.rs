//! Finite dyadic-tree weights and sets on the unit cube.

mod json;
mod set;
mod weight;

use std::collections::HashMap;
use std::sync::Arc;

use serde::Serialize;

pub use json::{PairDocument, SetJson, WeightJson, DEFAULT_EXPANSION_LIMIT};
pub use set::DyadicSet;
pub use weight::{DyadicWeight, LeafMaximal, MAX_TREE_DEPTH};

use set::SetNode;
use weight::{key, WeightKind, WeightNode};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Bookkept statistics of a `(w, E)` pair on the unit cube.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightStats<T> {
    /// `|E|`.
    pub x: T,
    /// `⟨w⟩`.
    pub y: T,
    /// `ess inf w`.
    pub m: T,
    /// `[w]_{A₁ᵈ}`.
    pub char: T,
    /// `w(E)`.
    pub value: T,
}

impl<T: Scalar> WeightStats<T> {
    pub fn to_f64(&self) -> WeightStats<f64> {
        WeightStats {
            x: self.x.as_f64(),
            y: self.y.as_f64(),
            m: self.m.as_f64(),
            char: self.char.as_f64(),
            value: self.value.as_f64(),
        }
    }
}

pub fn average<T: Scalar>(w: &DyadicWeight<T>) -> T {
    w.average()
}

pub fn ess_inf<T: Scalar>(w: &DyadicWeight<T>) -> T {
    w.ess_inf()
}

pub fn maximal_function<T: Scalar>(w: &DyadicWeight<T>) -> Vec<LeafMaximal<T>> {
    w.maximal_function()
}

pub fn a1_characteristic<T: Scalar>(w: &DyadicWeight<T>) -> T {
    w.a1_characteristic()
}

pub fn measure<T: Scalar>(e: &DyadicSet<T>) -> T {
    e.measure()
}

/// `∫_E w` over the unit cube. Constant nodes broadcast over deeper structure
/// on the other side.
pub fn weight_on_set<T: Scalar>(w: &DyadicWeight<T>, e: &DyadicSet<T>) -> Result<T> {
    if w.fanout() != e.fanout() {
        return Err(Error::Fanout { left: w.fanout(), right: e.fanout() });
    }
    let mut memo = HashMap::new();
    Ok(integrate(&w.root, &e.root, &mut memo))
}

fn integrate<T: Scalar>(
    w: &Arc<WeightNode<T>>,
    e: &Arc<SetNode<T>>,
    memo: &mut HashMap<(usize, usize), T>,
) -> T {
    match (&w.kind, &**e) {
        (_, SetNode::Empty) => T::zero(),
        (_, SetNode::Full) => w.mean.clone(),
        (WeightKind::Leaf(v), s) => v.clone() * s.measure(),
        (WeightKind::Internal(wc), SetNode::Internal { children: ec, .. }) => {
            let k = (key(w), key(e));
            if let Some(v) = memo.get(&k) {
                return v.clone();
            }
            let n = T::from_count(wc.len() as u64);
            let sum = wc
                .iter()
                .zip(ec)
                .fold(T::zero(), |acc, (a, b)| acc + integrate(a, b, memo));
            let v = sum / n;
            memo.insert(k, v.clone());
            v
        }
    }
}

pub fn stats<T: Scalar>(w: &DyadicWeight<T>, e: &DyadicSet<T>) -> Result<WeightStats<T>> {
    Ok(WeightStats {
        x: e.measure(),
        y: w.average(),
        m: w.ess_inf(),
        char: w.a1_characteristic(),
        value: weight_on_set(w, e)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use num_rational::BigRational;

    #[test]
    fn full_and_constant_cases() {
        let c = DyadicWeight::constant(4, 3.0f64).unwrap();
        let e = DyadicSet::from_mask(4, 2, &(0..16).map(|i| i % 3 == 0).collect::<Vec<_>>())
            .unwrap();
        assert!((weight_on_set(&c, &e).unwrap() - 3.0 * e.measure()).abs() < 1e-15);
        let w = DyadicWeight::from_leaves(4, 1, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(weight_on_set(&w, &DyadicSet::full(4)).unwrap(), w.average());
        assert_eq!(measure(&DyadicSet::<f64>::full(4)), 1.0);
    }

    #[test]
    fn fanout_mismatch() {
        let w = DyadicWeight::constant(4, 1.0).unwrap();
        assert!(matches!(
            weight_on_set(&w, &DyadicSet::full(2)),
            Err(Error::Fanout { left: 4, right: 2 })
        ));
    }

    #[test]
    fn boundary_pair_stats() {
        let w = DyadicWeight::from_leaves(4, 1, &[1.0, 1.0, 1.0, 25.0]).unwrap();
        let s = stats(&w, &DyadicSet::full(4)).unwrap();
        assert_eq!(s, WeightStats { x: 1.0, y: 7.0, m: 1.0, char: 7.0, value: 7.0 });
        let one = DyadicWeight::constant(4, 1.0).unwrap();
        let s = stats(&one, &DyadicSet::full(4)).unwrap();
        assert_eq!(s, WeightStats { x: 1.0, y: 1.0, m: 1.0, char: 1.0, value: 1.0 });
    }

    #[test]
    fn mixed_depth_broadcast() {
        // Weight refined on child 0 only; set refined on child 1 only.
        let inner = DyadicWeight::from_leaves(2, 1, &[ratio(1, 1), ratio(3, 1)]).unwrap();
        let one = DyadicWeight::constant(2, ratio(1, 1)).unwrap();
        let w = DyadicWeight::from_children(2, vec![inner, one]).unwrap();
        let e = DyadicSet::from_children(
            2,
            vec![
                DyadicSet::full(2),
                DyadicSet::from_mask(2, 1, &[true, false]).unwrap(),
            ],
        )
        .unwrap();
        // (1·¼ + 3·¼) over child 0, plus 1·¼ on half of child 1.
        assert_eq!(weight_on_set(&w, &e).unwrap(), ratio(5, 4));
        assert_eq!(e.measure(), ratio(3, 4));
        assert_eq!(w.average(), BigRational::from_count(3) / BigRational::from_count(2));
    }
}
