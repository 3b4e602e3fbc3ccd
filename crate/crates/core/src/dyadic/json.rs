//! JSON tree format.
//!
//! ```text
//! weight node: {"leaf": <number>} | {"children": [<node> × N]}
//! set node:    {"set": "full"} | {"set": "empty"} | {"children": [<node> × N]}
//! document:    {"Q": <number>, "d": <integer>, "weight": <node>, "set": <node>}
//! ```
//!
//! Numbers go through `f64`; serde_json prints the shortest round-trip form,
//! so `f64` trees survive a write/read cycle bit for bit.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::set::SetNode;
use super::weight::{key, WeightKind, WeightNode};
use super::{DyadicSet, DyadicWeight, MAX_TREE_DEPTH};
use crate::error::{Error, Result};
use crate::params::Params;
use crate::scalar::Scalar;

/// Largest expanded tree written by default.
pub const DEFAULT_EXPANSION_LIMIT: u128 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum WeightJson {
    Leaf { leaf: f64 },
    Children { children: Vec<WeightJson> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetKind {
    Full,
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum SetJson {
    Uniform { set: SetKind },
    Children { children: Vec<SetJson> },
}

/// A `(w, E)` pair with its problem constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDocument {
    #[serde(rename = "Q")]
    pub q: f64,
    pub d: u32,
    pub weight: WeightJson,
    pub set: SetJson,
}

fn expanded_set_count<T>(n: &Arc<SetNode<T>>, memo: &mut HashMap<usize, u128>) -> u128 {
    if let Some(&c) = memo.get(&key(n)) {
        return c;
    }
    let c = match &**n {
        SetNode::Internal { children, .. } => children
            .iter()
            .fold(1u128, |acc, c| acc.saturating_add(expanded_set_count(c, memo))),
        _ => 1,
    };
    memo.insert(key(n), c);
    c
}

impl<T: Scalar> DyadicWeight<T> {
    pub fn to_json(&self) -> Result<WeightJson> {
        self.to_json_limited(DEFAULT_EXPANSION_LIMIT)
    }

    /// Expands shared subtrees; refuses trees above `limit` nodes.
    pub fn to_json_limited(&self, limit: u128) -> Result<WeightJson> {
        let count = self.expanded_node_count();
        if count > limit {
            return Err(Error::Infeasible(format!(
                "weight tree expands to ~{count} nodes (limit {limit})"
            )));
        }
        fn go<T: Scalar>(n: &WeightNode<T>) -> WeightJson {
            match &n.kind {
                WeightKind::Leaf(v) => WeightJson::Leaf { leaf: v.as_f64() },
                WeightKind::Internal(ch) => {
                    WeightJson::Children { children: ch.iter().map(|c| go(c)).collect() }
                }
            }
        }
        Ok(go(&self.root))
    }

    pub fn from_json(fanout: usize, node: &WeightJson) -> Result<Self> {
        Self::from_json_with_depth(fanout, node, MAX_TREE_DEPTH)
    }

    pub fn from_json_with_depth(fanout: usize, node: &WeightJson, max_depth: usize) -> Result<Self> {
        fn go<T: Scalar>(
            fanout: usize,
            node: &WeightJson,
            level: usize,
            max_depth: usize,
        ) -> Result<DyadicWeight<T>> {
            if level > max_depth {
                return Err(Error::DepthCap { requested: level, cap: max_depth });
            }
            match node {
                WeightJson::Leaf { leaf } => {
                    let v = T::from_f64(*leaf)
                        .ok_or_else(|| Error::Malformed(format!("leaf {leaf} not representable")))?;
                    DyadicWeight::constant(fanout, v)
                }
                WeightJson::Children { children } => {
                    let ch = children
                        .iter()
                        .map(|c| go(fanout, c, level + 1, max_depth))
                        .collect::<Result<Vec<_>>>()?;
                    DyadicWeight::from_children(fanout, ch)
                }
            }
        }
        go(fanout, node, 0, max_depth)
    }
}

impl<T: Scalar> DyadicSet<T> {
    pub fn to_json(&self) -> Result<SetJson> {
        self.to_json_limited(DEFAULT_EXPANSION_LIMIT)
    }

    pub fn to_json_limited(&self, limit: u128) -> Result<SetJson> {
        let count = expanded_set_count(&self.root, &mut HashMap::new());
        if count > limit {
            return Err(Error::Infeasible(format!(
                "set tree expands to ~{count} nodes (limit {limit})"
            )));
        }
        fn go<T>(n: &SetNode<T>) -> SetJson {
            match n {
                SetNode::Full => SetJson::Uniform { set: SetKind::Full },
                SetNode::Empty => SetJson::Uniform { set: SetKind::Empty },
                SetNode::Internal { children, .. } => {
                    SetJson::Children { children: children.iter().map(|c| go(c)).collect() }
                }
            }
        }
        Ok(go(&self.root))
    }

    /// Parses a set node. Non-canonical input is canonicalized.
    pub fn from_json(fanout: usize, node: &SetJson) -> Result<Self> {
        fn go<T: Scalar>(fanout: usize, node: &SetJson, level: usize) -> Result<DyadicSet<T>> {
            if level > MAX_TREE_DEPTH {
                return Err(Error::DepthCap { requested: level, cap: MAX_TREE_DEPTH });
            }
            match node {
                SetJson::Uniform { set: SetKind::Full } => Ok(DyadicSet::full(fanout)),
                SetJson::Uniform { set: SetKind::Empty } => Ok(DyadicSet::empty(fanout)),
                SetJson::Children { children } => {
                    let ch = children
                        .iter()
                        .map(|c| go(fanout, c, level + 1))
                        .collect::<Result<Vec<_>>>()?;
                    DyadicSet::from_children(fanout, ch)
                }
            }
        }
        go(fanout, node, 0)
    }
}

impl PairDocument {
    pub fn new<T: Scalar>(p: &Params<T>, w: &DyadicWeight<T>, e: &DyadicSet<T>) -> Result<Self> {
        Ok(PairDocument { q: p.q_f64(), d: p.d(), weight: w.to_json()?, set: e.to_json()? })
    }

    pub fn parse(s: &str) -> Result<Self> {
        let mut de = serde_json::Deserializer::from_str(s);
        de.disable_recursion_limit();
        let doc = PairDocument::deserialize(&mut de)?;
        de.end()?;
        Ok(doc)
    }

    pub fn to_string(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    /// Rebuilds `(Params, w, E)` in the requested scalar type.
    pub fn decode<T: Scalar>(&self) -> Result<(Params<T>, DyadicWeight<T>, DyadicSet<T>)> {
        let q = T::from_f64(self.q).ok_or_else(|| Error::InvalidParams(format!("Q = {}", self.q)))?;
        let p = Params::new(q, self.d)?;
        let fanout = p.n() as usize;
        let w = DyadicWeight::from_json(fanout, &self.weight)?;
        let e = DyadicSet::from_json(fanout, &self.set)?;
        Ok((p, w, e))
    }
}
