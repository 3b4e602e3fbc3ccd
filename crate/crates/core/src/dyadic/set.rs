use std::collections::HashMap;
use std::sync::Arc;

use super::weight::{key, MAX_TREE_DEPTH};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug)]
pub(crate) enum SetNode<T> {
    Full,
    Empty,
    Internal { children: Vec<Arc<SetNode<T>>>, measure: T, depth: usize },
}

impl<T: Scalar> SetNode<T> {
    pub(crate) fn measure(&self) -> T {
        match self {
            SetNode::Full => T::one(),
            SetNode::Empty => T::zero(),
            SetNode::Internal { measure, .. } => measure.clone(),
        }
    }

    fn depth(&self) -> usize {
        match self {
            SetNode::Internal { depth, .. } => *depth,
            _ => 0,
        }
    }
}

/// A subset of the unit cube, as a tree of full/empty/mixed nodes.
///
/// Canonical: no internal node has all-full or all-empty children.
#[derive(Debug, Clone)]
pub struct DyadicSet<T> {
    fanout: usize,
    pub(crate) root: Arc<SetNode<T>>,
}

impl<T: Scalar> DyadicSet<T> {
    pub fn full(fanout: usize) -> Self {
        DyadicSet { fanout, root: Arc::new(SetNode::Full) }
    }

    pub fn empty(fanout: usize) -> Self {
        DyadicSet { fanout, root: Arc::new(SetNode::Empty) }
    }

    /// Joins `fanout` subsets, collapsing uniform children.
    pub fn from_children(fanout: usize, children: Vec<DyadicSet<T>>) -> Result<Self> {
        if children.len() != fanout {
            return Err(Error::Malformed(format!(
                "internal set node needs {fanout} children, got {}",
                children.len()
            )));
        }
        for c in &children {
            if c.fanout != fanout {
                return Err(Error::Fanout { left: fanout, right: c.fanout });
            }
        }
        let root = join(children.into_iter().map(|c| c.root).collect());
        if root.depth() > MAX_TREE_DEPTH {
            return Err(Error::DepthCap { requested: root.depth(), cap: MAX_TREE_DEPTH });
        }
        Ok(DyadicSet { fanout, root })
    }

    /// Complete tree of the given depth from per-leaf membership.
    pub fn from_mask(fanout: usize, depth: usize, mask: &[bool]) -> Result<Self> {
        let expected = fanout.pow(depth as u32);
        if mask.len() != expected {
            return Err(Error::Malformed(format!(
                "depth {depth} set needs {expected} leaves, got {}",
                mask.len()
            )));
        }
        let mut level: Vec<DyadicSet<T>> = mask
            .iter()
            .map(|&b| if b { Self::full(fanout) } else { Self::empty(fanout) })
            .collect();
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
        self.root.depth()
    }

    pub fn is_full(&self) -> bool {
        matches!(*self.root, SetNode::Full)
    }

    pub fn is_empty(&self) -> bool {
        matches!(*self.root, SetNode::Empty)
    }

    pub fn children(&self) -> Option<Vec<DyadicSet<T>>> {
        match &*self.root {
            SetNode::Internal { children, .. } => Some(
                children
                    .iter()
                    .map(|c| DyadicSet { fanout: self.fanout, root: c.clone() })
                    .collect(),
            ),
            _ => None,
        }
    }

    /// `|E|` as a fraction of the unit cube.
    pub fn measure(&self) -> T {
        self.root.measure()
    }

    pub fn complement(&self) -> Self {
        fn go<T: Scalar>(
            n: &Arc<SetNode<T>>,
            memo: &mut HashMap<usize, Arc<SetNode<T>>>,
        ) -> Arc<SetNode<T>> {
            if let Some(c) = memo.get(&key(n)) {
                return c.clone();
            }
            let out = match &**n {
                SetNode::Full => Arc::new(SetNode::Empty),
                SetNode::Empty => Arc::new(SetNode::Full),
                SetNode::Internal { children, .. } => {
                    join(children.iter().map(|c| go(c, memo)).collect())
                }
            };
            memo.insert(key(n), out.clone());
            out
        }
        DyadicSet { fanout: self.fanout, root: go(&self.root, &mut HashMap::new()) }
    }
}

pub(crate) fn join<T: Scalar>(children: Vec<Arc<SetNode<T>>>) -> Arc<SetNode<T>> {
    if children.iter().all(|c| matches!(**c, SetNode::Full)) {
        return Arc::new(SetNode::Full);
    }
    if children.iter().all(|c| matches!(**c, SetNode::Empty)) {
        return Arc::new(SetNode::Empty);
    }
    let n = T::from_count(children.len() as u64);
    let measure = children.iter().fold(T::zero(), |acc, c| acc + c.measure()) / n;
    let depth = 1 + children.iter().map(|c| c.depth()).max().unwrap_or(0);
    Arc::new(SetNode::Internal { children, measure, depth })
}
