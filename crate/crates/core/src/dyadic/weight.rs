use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{max_of, min_of, Scalar};

/// Hard cap on tree depth (root at depth 0).
pub const MAX_TREE_DEPTH: usize = 128;

#[derive(Debug)]
pub(crate) enum WeightKind<T> {
    Leaf(T),
    Internal(Vec<Arc<WeightNode<T>>>),
}

/// Tree node with aggregates cached at construction. Subtrees are shared
/// through `Arc`, so repeated copies of a weight cost one pointer each.
#[derive(Debug)]
pub(crate) struct WeightNode<T> {
    pub(crate) kind: WeightKind<T>,
    /// Average over the node's cube.
    pub(crate) mean: T,
    /// Minimum leaf value below the node.
    pub(crate) min: T,
    /// Max over all sub-cubes R of `⟨w⟩_R / inf_R w`.
    pub(crate) char: T,
    pub(crate) depth: usize,
}

pub(crate) fn key<N>(node: &Arc<N>) -> usize {
    Arc::as_ptr(node) as *const () as usize
}

/// A positive weight on the unit cube, constant on the leaves of a finite
/// `N`-ary dyadic tree. A leaf at depth `j` is a constant on its whole subcube.
#[derive(Debug, Clone)]
pub struct DyadicWeight<T> {
    fanout: usize,
    pub(crate) root: Arc<WeightNode<T>>,
}

/// One row of the maximal-function table.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafMaximal<T> {
    /// Child indices from the root down to the leaf.
    pub path: Vec<usize>,
    pub measure: T,
    pub value: T,
    /// `M^d_P w` on the leaf: the largest average over the cubes containing it.
    pub maximal: T,
}

fn check_fanout(fanout: usize) -> Result<()> {
    if fanout < 2 || !fanout.is_power_of_two() {
        return Err(Error::Malformed(format!("fan-out {fanout} is not 2^d with d ≥ 1")));
    }
    Ok(())
}

impl<T: Scalar> DyadicWeight<T> {
    pub fn constant(fanout: usize, value: T) -> Result<Self> {
        check_fanout(fanout)?;
        let v = value.as_f64();
        if value.partial_cmp(&T::zero()) != Some(Ordering::Greater) || !v.is_finite() {
            return Err(Error::Malformed(format!("leaf value {v} must be positive and finite")));
        }
        Ok(DyadicWeight { fanout, root: Arc::new(leaf_node(value)) })
    }

    /// Joins exactly `fanout` subtrees under a new root.
    pub fn from_children(fanout: usize, children: Vec<DyadicWeight<T>>) -> Result<Self> {
        check_fanout(fanout)?;
        if children.len() != fanout {
            return Err(Error::Malformed(format!(
                "internal node needs {fanout} children, got {}",
                children.len()
            )));
        }
        for c in &children {
            if c.fanout != fanout {
                return Err(Error::Fanout { left: fanout, right: c.fanout });
            }
        }
        let node = internal_node(children.into_iter().map(|c| c.root).collect());
        if node.depth > MAX_TREE_DEPTH {
            return Err(Error::DepthCap { requested: node.depth, cap: MAX_TREE_DEPTH });
        }
        Ok(DyadicWeight { fanout, root: Arc::new(node) })
    }

    /// Complete tree of the given depth with leaves in lexicographic order.
    pub fn from_leaves(fanout: usize, depth: usize, leaves: &[T]) -> Result<Self> {
        check_fanout(fanout)?;
        let expected = fanout
            .checked_pow(depth as u32)
            .ok_or_else(|| Error::Malformed("leaf count overflows".into()))?;
        if leaves.len() != expected {
            return Err(Error::Malformed(format!(
                "depth {depth} with fan-out {fanout} needs {expected} leaves, got {}",
                leaves.len()
            )));
        }
        let mut level = leaves
            .iter()
            .map(|v| Self::constant(fanout, v.clone()))
            .collect::<Result<Vec<_>>>()?;
        while level.len() > 1 {
            let mut next = Vec::with_capacity(level.len() / fanout);
            let mut it = level.into_iter();
            loop {
                let group: Vec<_> = it.by_ref().take(fanout).collect();
                if group.is_empty() {
                    break;
                }
                next.push(Self::from_children(fanout, group)?);
            }
            level = next;
        }
        Ok(level.pop().expect("at least one leaf"))
    }

    pub fn fanout(&self) -> usize {
        self.fanout
    }

    pub fn depth(&self) -> usize {
        self.root.depth
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.root.kind, WeightKind::Leaf(_))
    }

    pub fn leaf_value(&self) -> Option<&T> {
        match &self.root.kind {
            WeightKind::Leaf(v) => Some(v),
            WeightKind::Internal(_) => None,
        }
    }

    pub fn children(&self) -> Option<Vec<DyadicWeight<T>>> {
        match &self.root.kind {
            WeightKind::Leaf(_) => None,
            WeightKind::Internal(ch) => Some(
                ch.iter()
                    .map(|c| DyadicWeight { fanout: self.fanout, root: c.clone() })
                    .collect(),
            ),
        }
    }

    /// `⟨w⟩_P`.
    pub fn average(&self) -> T {
        self.root.mean.clone()
    }

    pub fn ess_inf(&self) -> T {
        self.root.min.clone()
    }

    /// `[w]_{A₁ᵈ(P)}`, read from the cached aggregates.
    ///
    /// Equals `max_leaf M^d_P w / w` because the worst leaf in every cube is its
    /// minimum; [`Self::maximal_function`] gives the per-leaf route.
    pub fn a1_characteristic(&self) -> T {
        self.root.char.clone()
    }

    /// Per-leaf localized dyadic maximal function, computed top-down.
    ///
    /// The table lists every leaf with multiplicity, so it is exponential in the
    /// depth of heavily shared trees.
    pub fn maximal_function(&self) -> Vec<LeafMaximal<T>> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        walk_maximal(&self.root, self.fanout, T::zero(), T::one(), &mut path, &mut out);
        out
    }

    /// Multiplies every leaf by `factor > 0`, preserving sharing.
    pub fn scaled(&self, factor: &T) -> Result<Self> {
        if factor.partial_cmp(&T::zero()) != Some(Ordering::Greater) {
            return Err(Error::Precondition("scale factor must be positive".into()));
        }
        let mut memo = HashMap::new();
        Ok(DyadicWeight { fanout: self.fanout, root: scale_node(&self.root, factor, &mut memo) })
    }

    /// Splits every leaf into `N` equal children.
    pub fn refined(&self) -> Result<Self> {
        if self.depth() + 1 > MAX_TREE_DEPTH {
            return Err(Error::DepthCap { requested: self.depth() + 1, cap: MAX_TREE_DEPTH });
        }
        let mut memo = HashMap::new();
        Ok(DyadicWeight { fanout: self.fanout, root: refine_node(&self.root, self.fanout, &mut memo) })
    }

    /// Distinct leaf values with the measure of their level sets, ascending.
    pub fn leaf_distribution(&self) -> Vec<(T, T)> {
        let mut memo = HashMap::new();
        distribution(&self.root, &mut memo)
    }

    /// Node count of the fully expanded tree, saturating.
    pub fn expanded_node_count(&self) -> u128 {
        fn go<T>(n: &Arc<WeightNode<T>>, memo: &mut HashMap<usize, u128>) -> u128 {
            if let Some(&c) = memo.get(&key(n)) {
                return c;
            }
            let c = match &n.kind {
                WeightKind::Leaf(_) => 1,
                WeightKind::Internal(ch) => ch
                    .iter()
                    .fold(1u128, |acc, c| acc.saturating_add(go(c, memo))),
            };
            memo.insert(key(n), c);
            c
        }
        go(&self.root, &mut HashMap::new())
    }
}

pub(crate) fn leaf_node<T: Scalar>(value: T) -> WeightNode<T> {
    WeightNode {
        mean: value.clone(),
        min: value.clone(),
        char: T::one(),
        depth: 0,
        kind: WeightKind::Leaf(value),
    }
}

pub(crate) fn internal_node<T: Scalar>(children: Vec<Arc<WeightNode<T>>>) -> WeightNode<T> {
    let n = T::from_count(children.len() as u64);
    let mut sum = T::zero();
    let mut min = children[0].min.clone();
    let mut char = T::one();
    let mut depth = 0;
    for c in &children {
        sum = sum + c.mean.clone();
        min = min_of(min, c.min.clone());
        char = max_of(char, c.char.clone());
        depth = depth.max(c.depth + 1);
    }
    let mean = sum / n;
    let char = max_of(char, mean.clone() / min.clone());
    WeightNode { kind: WeightKind::Internal(children), mean, min, char, depth }
}

fn walk_maximal<T: Scalar>(
    node: &Arc<WeightNode<T>>,
    fanout: usize,
    running: T,
    measure: T,
    path: &mut Vec<usize>,
    out: &mut Vec<LeafMaximal<T>>,
) {
    let running = max_of(running, node.mean.clone());
    match &node.kind {
        WeightKind::Leaf(v) => out.push(LeafMaximal {
            path: path.clone(),
            measure,
            value: v.clone(),
            maximal: running,
        }),
        WeightKind::Internal(children) => {
            let child_measure = measure / T::from_count(fanout as u64);
            for (i, c) in children.iter().enumerate() {
                path.push(i);
                walk_maximal(c, fanout, running.clone(), child_measure.clone(), path, out);
                path.pop();
            }
        }
    }
}

fn scale_node<T: Scalar>(
    node: &Arc<WeightNode<T>>,
    factor: &T,
    memo: &mut HashMap<usize, Arc<WeightNode<T>>>,
) -> Arc<WeightNode<T>> {
    if let Some(n) = memo.get(&key(node)) {
        return n.clone();
    }
    let out = Arc::new(match &node.kind {
        WeightKind::Leaf(v) => leaf_node(v.clone() * factor.clone()),
        WeightKind::Internal(ch) => {
            internal_node(ch.iter().map(|c| scale_node(c, factor, memo)).collect())
        }
    });
    memo.insert(key(node), out.clone());
    out
}

fn refine_node<T: Scalar>(
    node: &Arc<WeightNode<T>>,
    fanout: usize,
    memo: &mut HashMap<usize, Arc<WeightNode<T>>>,
) -> Arc<WeightNode<T>> {
    if let Some(n) = memo.get(&key(node)) {
        return n.clone();
    }
    let out = Arc::new(match &node.kind {
        WeightKind::Leaf(v) => {
            let leaf = Arc::new(leaf_node(v.clone()));
            internal_node(vec![leaf; fanout])
        }
        WeightKind::Internal(ch) => {
            internal_node(ch.iter().map(|c| refine_node(c, fanout, memo)).collect())
        }
    });
    memo.insert(key(node), out.clone());
    out
}

fn distribution<T: Scalar>(
    node: &Arc<WeightNode<T>>,
    memo: &mut HashMap<usize, Vec<(T, T)>>,
) -> Vec<(T, T)> {
    if let Some(d) = memo.get(&key(node)) {
        return d.clone();
    }
    let out = match &node.kind {
        WeightKind::Leaf(v) => vec![(v.clone(), T::one())],
        WeightKind::Internal(ch) => {
            let n = T::from_count(ch.len() as u64);
            let mut merged: Vec<(T, T)> = Vec::new();
            for c in ch {
                for (v, m) in distribution(c, memo) {
                    merged.push((v, m / n.clone()));
                }
            }
            merged.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("leaf values are ordered"));
            let mut out: Vec<(T, T)> = Vec::with_capacity(merged.len());
            for (v, m) in merged {
                match out.last_mut() {
                    Some(last) if last.0 == v => last.1 = last.1.clone() + m,
                    _ => out.push((v, m)),
                }
            }
            out
        }
    };
    memo.insert(key(node), out.clone());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use num_rational::BigRational;

    fn w(leaves: &[f64]) -> DyadicWeight<f64> {
        DyadicWeight::from_leaves(4, 1, leaves).unwrap()
    }

    #[test]
    fn averages() {
        assert_eq!(DyadicWeight::constant(4, 1.0).unwrap().average(), 1.0);
        assert_eq!(w(&[1.0, 1.0, 1.0, 13.0]).average(), 4.0);
        assert_eq!(w(&[1.0, 1.0, 1.0, 37.0]).average(), 10.0);
    }

    #[test]
    fn ess_inf_is_min_leaf() {
        assert_eq!(DyadicWeight::constant(2, 2.5).unwrap().ess_inf(), 2.5);
        assert_eq!(w(&[1.0, 1.0, 1.0, 37.0]).ess_inf(), 1.0);
    }

    #[test]
    fn maximal_function_table() {
        let c = DyadicWeight::constant(4, 1.0).unwrap();
        let t = c.maximal_function();
        assert_eq!(t.len(), 1);
        assert_eq!(t[0].maximal, 1.0);

        let t = w(&[1.0, 1.0, 1.0, 37.0]).maximal_function();
        let m: Vec<f64> = t.iter().map(|l| l.maximal).collect();
        assert_eq!(m, vec![10.0, 10.0, 10.0, 37.0]);
        assert_eq!(t[3].path, vec![3]);
        assert_eq!(t[3].measure, 0.25);
    }

    #[test]
    fn characteristic_examples() {
        assert_eq!(DyadicWeight::constant(4, 3.0).unwrap().a1_characteristic(), 1.0);
        assert_eq!(w(&[1.0, 1.0, 1.0, 37.0]).a1_characteristic(), 10.0);
        for &y in &[1.5, 4.0, 9.0, 10.0] {
            let top = 1.0 + 4.0 * (y - 1.0);
            assert!((w(&[1.0, 1.0, 1.0, top]).a1_characteristic() - y).abs() < 1e-14);
        }
    }

    #[test]
    fn characteristic_matches_maximal_route_on_depth_two() {
        let leaves: Vec<f64> = (0..16).map(|i| 1.0 + ((i * 7) % 5) as f64).collect();
        let wt = DyadicWeight::from_leaves(4, 2, &leaves).unwrap();
        let via_table = wt
            .maximal_function()
            .iter()
            .map(|l| l.maximal / l.value)
            .fold(0.0, f64::max);
        assert!((via_table - wt.a1_characteristic()).abs() < 1e-14);
    }

    #[test]
    fn rejects_malformed() {
        assert!(DyadicWeight::constant(4, 0.0).is_err());
        assert!(DyadicWeight::constant(4, f64::INFINITY).is_err());
        assert!(DyadicWeight::constant(3, 1.0).is_err());
        assert!(DyadicWeight::from_leaves(4, 1, &[1.0, 2.0]).is_err());
        let a = DyadicWeight::constant(2, 1.0).unwrap();
        let b = DyadicWeight::constant(4, 1.0).unwrap();
        assert!(matches!(
            DyadicWeight::from_children(2, vec![a, b]),
            Err(Error::Fanout { .. })
        ));
    }

    #[test]
    fn depth_cap_enforced() {
        let mut t = DyadicWeight::constant(2, 1.0).unwrap();
        for _ in 0..MAX_TREE_DEPTH {
            let one = DyadicWeight::constant(2, 1.0).unwrap();
            t = DyadicWeight::from_children(2, vec![t, one]).unwrap();
        }
        let one = DyadicWeight::constant(2, 1.0).unwrap();
        assert!(matches!(
            DyadicWeight::from_children(2, vec![t, one]),
            Err(Error::DepthCap { .. })
        ));
    }

    #[test]
    fn scaling_and_distribution() {
        let x = w(&[1.0, 1.0, 2.0, 4.0]).scaled(&2.0).unwrap();
        assert_eq!(x.average(), 4.0);
        assert_eq!(x.leaf_distribution(), vec![(2.0, 0.5), (4.0, 0.25), (8.0, 0.25)]);
    }

    #[test]
    fn shared_subtrees_count_with_multiplicity() {
        let leaf = DyadicWeight::constant(4, 1.0).unwrap();
        let mut t = leaf.clone();
        for _ in 0..30 {
            t = DyadicWeight::from_children(4, vec![t.clone(), t.clone(), t.clone(), leaf.clone()])
                .unwrap();
        }
        assert!(t.expanded_node_count() > 1u128 << 40);
        assert_eq!(t.average(), 1.0);
    }

    #[test]
    fn rational_mode() {
        let wt = DyadicWeight::from_leaves(2, 1, &[ratio(1, 1), ratio(3, 1)]).unwrap();
        assert_eq!(wt.average(), BigRational::from_count(2));
        assert_eq!(wt.a1_characteristic(), BigRational::from_count(2));
    }
}
