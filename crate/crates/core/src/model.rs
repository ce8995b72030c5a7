//! Object nodes, motion nodes and functional units.
//!
//! A functional unit is the atomic piece of manipulation knowledge: a set of
//! input objects, one motion, and a set of output objects. Object identity is
//! parameterized by a [`HierarchyLevel`]; the coarser the level, the more
//! detail is ignored when two nodes are compared.

use std::collections::{BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("empty label")]
    EmptyLabel,
    #[error("label `{0}` contains a comma")]
    Comma(String),
    #[error("object `{0}` lists itself as an ingredient")]
    SelfIngredient(String),
    #[error("functional unit has no inputs")]
    NoInputs,
    #[error("functional unit has no outputs")]
    NoOutputs,
    #[error("duplicate {side} object `{node}` in functional unit")]
    DuplicateObject { side: &'static str, node: String },
    #[error("time span start {start} is after end {end}")]
    InvertedTimeSpan { start: f64, end: f64 },
    #[error("time span bound {0} is not a finite number")]
    NonFiniteTime(f64),
    #[error("motion `{0}` is not in the motion index")]
    UnknownMotion(String),
    #[error("invalid hierarchy level `{0}` (expected 1, 2 or 3)")]
    InvalidLevel(String),
}

/// Lowercases and collapses inner whitespace to single spaces.
pub fn normalize_label(raw: &str) -> String {
    raw.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

fn checked_label(raw: &str) -> Result<String, ModelError> {
    let label = normalize_label(raw);
    if label.is_empty() {
        return Err(ModelError::EmptyLabel);
    }
    if label.contains(',') {
        return Err(ModelError::Comma(label));
    }
    Ok(label)
}

/// Degree of detail carried by object nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HierarchyLevel {
    /// Object type only.
    L1,
    /// Object type and state.
    L2,
    /// Object type, state and ingredient contents.
    L3,
}

impl HierarchyLevel {
    pub const ALL: [HierarchyLevel; 3] = [HierarchyLevel::L1, HierarchyLevel::L2, HierarchyLevel::L3];

    pub fn number(self) -> u8 {
        match self {
            HierarchyLevel::L1 => 1,
            HierarchyLevel::L2 => 2,
            HierarchyLevel::L3 => 3,
        }
    }
}

impl fmt::Display for HierarchyLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

impl FromStr for HierarchyLevel {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().trim_start_matches(['L', 'l']) {
            "1" => Ok(HierarchyLevel::L1),
            "2" => Ok(HierarchyLevel::L2),
            "3" => Ok(HierarchyLevel::L3),
            _ => Err(ModelError::InvalidLevel(s.to_string())),
        }
    }
}

/// An object as observed in a functional unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectNode {
    label: String,
    states: BTreeSet<String>,
    ingredients: BTreeSet<String>,
    is_moving: bool,
}

impl ObjectNode {
    pub fn new<S, I>(label: &str, states: S, ingredients: I, is_moving: bool) -> Result<Self, ModelError>
    where
        S: IntoIterator,
        S::Item: AsRef<str>,
        I: IntoIterator,
        I::Item: AsRef<str>,
    {
        let label = checked_label(label)?;
        let states = states
            .into_iter()
            .map(|s| checked_label(s.as_ref()))
            .collect::<Result<BTreeSet<_>, _>>()?;
        let ingredients = ingredients
            .into_iter()
            .map(|s| checked_label(s.as_ref()))
            .collect::<Result<BTreeSet<_>, _>>()?;
        if ingredients.contains(&label) {
            return Err(ModelError::SelfIngredient(label));
        }
        Ok(ObjectNode { label, states, ingredients, is_moving })
    }

    /// A node with no states, no contents, not moving.
    pub fn plain(label: &str) -> Result<Self, ModelError> {
        Self::new(label, None::<&str>, None::<&str>, false)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn states(&self) -> &BTreeSet<String> {
        &self.states
    }

    pub fn ingredients(&self) -> &BTreeSet<String> {
        &self.ingredients
    }

    pub fn is_moving(&self) -> bool {
        self.is_moving
    }

    /// Identity key of this node at `level`.
    pub fn key(&self, level: HierarchyLevel) -> NodeKey {
        let label = self.label.clone();
        match level {
            HierarchyLevel::L1 => NodeKey { label, states: Vec::new(), ingredients: Vec::new(), is_moving: false },
            HierarchyLevel::L2 => NodeKey {
                label,
                states: self.states.iter().cloned().collect(),
                ingredients: Vec::new(),
                is_moving: self.is_moving,
            },
            HierarchyLevel::L3 => NodeKey {
                label,
                states: self.states.iter().cloned().collect(),
                ingredients: self.ingredients.iter().cloned().collect(),
                is_moving: self.is_moving,
            },
        }
    }

    /// Keeps only the fields that `level` distinguishes.
    pub fn reduced_to(&self, level: HierarchyLevel) -> ObjectNode {
        match level {
            HierarchyLevel::L1 => ObjectNode {
                label: self.label.clone(),
                states: BTreeSet::new(),
                ingredients: BTreeSet::new(),
                is_moving: false,
            },
            HierarchyLevel::L2 => ObjectNode { ingredients: BTreeSet::new(), ..self.clone() },
            HierarchyLevel::L3 => self.clone(),
        }
    }

    /// Rewrites the node label and ingredient labels through `map`.
    ///
    /// An ingredient that maps onto the node's own label is dropped so the
    /// result still satisfies the node invariants.
    pub(crate) fn relabeled<F>(&self, map: F) -> ObjectNode
    where
        F: Fn(&str) -> Option<String>,
    {
        let label = map(&self.label).unwrap_or_else(|| self.label.clone());
        let ingredients = self
            .ingredients
            .iter()
            .map(|i| map(i).unwrap_or_else(|| i.clone()))
            .filter(|i| *i != label)
            .collect();
        ObjectNode { label, states: self.states.clone(), ingredients, is_moving: self.is_moving }
    }

    /// Like [`relabeled`](Self::relabeled) but refuses to produce a node
    /// that would contain itself.
    pub(crate) fn try_relabeled<F>(&self, map: F) -> Option<ObjectNode>
    where
        F: Fn(&str) -> Option<String>,
    {
        let label = map(&self.label).unwrap_or_else(|| self.label.clone());
        let mut ingredients = BTreeSet::new();
        for i in &self.ingredients {
            let mapped = map(i).unwrap_or_else(|| i.clone());
            if mapped == label {
                return None;
            }
            ingredients.insert(mapped);
        }
        Some(ObjectNode { label, states: self.states.clone(), ingredients, is_moving: self.is_moving })
    }
}

impl fmt::Display for ObjectNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.key(HierarchyLevel::L3).fmt(f)
    }
}

/// Comparable identity of an object node at some hierarchy level.
///
/// Fields that the level ignores are left empty; set-valued fields are kept
/// sorted so the key is order-insensitive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeKey {
    pub label: String,
    pub states: Vec<String>,
    pub ingredients: Vec<String>,
    pub is_moving: bool,
}

impl NodeKey {
    /// A node carrying exactly the information in this key.
    pub fn to_node(&self) -> ObjectNode {
        ObjectNode {
            label: self.label.clone(),
            states: self.states.iter().cloned().collect(),
            ingredients: self.ingredients.iter().cloned().collect(),
            is_moving: self.is_moving,
        }
    }
}

/// Renders as `label[:state,...][@ingredient,...][ (moving)]`.
impl fmt::Display for NodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)?;
        if !self.states.is_empty() {
            write!(f, ":{}", self.states.join(","))?;
        }
        if !self.ingredients.is_empty() {
            write!(f, "@{}", self.ingredients.join(","))?;
        }
        if self.is_moving {
            f.write_str(" (moving)")?;
        }
        Ok(())
    }
}

pub fn node_identity(node: &ObjectNode, level: HierarchyLevel) -> NodeKey {
    node.key(level)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MotionNode {
    label: String,
}

impl MotionNode {
    pub fn new(label: &str) -> Result<Self, ModelError> {
        Ok(MotionNode { label: checked_label(label)? })
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

impl fmt::Display for MotionNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Source-video timestamps in seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSpan {
    start: f64,
    end: f64,
}

impl TimeSpan {
    pub fn new(start: f64, end: f64) -> Result<Self, ModelError> {
        for t in [start, end] {
            if !t.is_finite() {
                return Err(ModelError::NonFiniteTime(t));
            }
        }
        if start > end {
            return Err(ModelError::InvertedTimeSpan { start, end });
        }
        Ok(TimeSpan { start, end })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn end(&self) -> f64 {
        self.end
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalUnit {
    inputs: Vec<ObjectNode>,
    motion: MotionNode,
    outputs: Vec<ObjectNode>,
    time_span: Option<TimeSpan>,
    provenance: Option<String>,
}

impl FunctionalUnit {
    /// Validates non-empty sides and that no side lists the same node twice.
    pub fn new(inputs: Vec<ObjectNode>, motion: MotionNode, outputs: Vec<ObjectNode>) -> Result<Self, ModelError> {
        if inputs.is_empty() {
            return Err(ModelError::NoInputs);
        }
        if outputs.is_empty() {
            return Err(ModelError::NoOutputs);
        }
        for (side, nodes) in [("input", &inputs), ("output", &outputs)] {
            let mut seen = HashSet::new();
            for n in nodes {
                if !seen.insert(n) {
                    return Err(ModelError::DuplicateObject { side, node: n.to_string() });
                }
            }
        }
        Ok(FunctionalUnit { inputs, motion, outputs, time_span: None, provenance: None })
    }

    /// Builds a unit from already-valid nodes, collapsing repeated nodes on
    /// each side. Used by transforms whose relabeling can merge nodes.
    pub(crate) fn collapsed(
        inputs: Vec<ObjectNode>,
        motion: MotionNode,
        outputs: Vec<ObjectNode>,
        template: &FunctionalUnit,
    ) -> Self {
        FunctionalUnit {
            inputs: dedup_in_order(inputs),
            motion,
            outputs: dedup_in_order(outputs),
            time_span: template.time_span,
            provenance: template.provenance.clone(),
        }
    }

    pub fn with_time_span(mut self, span: Option<TimeSpan>) -> Self {
        self.time_span = span;
        self
    }

    pub fn with_provenance(mut self, provenance: Option<String>) -> Self {
        self.provenance = provenance;
        self
    }

    pub fn inputs(&self) -> &[ObjectNode] {
        &self.inputs
    }

    pub fn motion(&self) -> &MotionNode {
        &self.motion
    }

    pub fn outputs(&self) -> &[ObjectNode] {
        &self.outputs
    }

    pub fn time_span(&self) -> Option<TimeSpan> {
        self.time_span
    }

    pub fn provenance(&self) -> Option<&str> {
        self.provenance.as_deref()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &ObjectNode> {
        self.inputs.iter().chain(self.outputs.iter())
    }

    /// Order-insensitive identity of the unit at `level`.
    pub fn key(&self, level: HierarchyLevel) -> UnitKey {
        let side = |nodes: &[ObjectNode]| {
            let mut keys: Vec<NodeKey> = nodes.iter().map(|n| n.key(level)).collect();
            keys.sort();
            keys
        };
        UnitKey { motion: self.motion.label.clone(), inputs: side(&self.inputs), outputs: side(&self.outputs) }
    }

    pub fn equals(&self, other: &FunctionalUnit, level: HierarchyLevel) -> bool {
        self.motion == other.motion && self.key(level) == other.key(level)
    }
}

fn dedup_in_order(nodes: Vec<ObjectNode>) -> Vec<ObjectNode> {
    let mut seen = HashSet::new();
    nodes.into_iter().filter(|n| seen.insert(n.clone())).collect()
}

pub fn unit_equals(a: &FunctionalUnit, b: &FunctionalUnit, level: HierarchyLevel) -> bool {
    a.equals(b, level)
}

/// Multiset identity of a functional unit: motion plus sorted input and
/// output node keys.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct UnitKey {
    pub motion: String,
    pub inputs: Vec<NodeKey>,
    pub outputs: Vec<NodeKey>,
}

/// Objects available in the environment, in unlimited quantity.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Kitchen {
    items: Vec<ObjectNode>,
}

impl Kitchen {
    /// Exact duplicates are dropped; first occurrence order is kept.
    pub fn new(items: impl IntoIterator<Item = ObjectNode>) -> Self {
        let mut seen = HashSet::new();
        let items = items.into_iter().filter(|n| seen.insert(n.clone())).collect();
        Kitchen { items }
    }

    pub fn items(&self) -> &[ObjectNode] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn keys(&self, level: HierarchyLevel) -> HashSet<NodeKey> {
        self.items.iter().map(|n| n.key(level)).collect()
    }
}

impl FromIterator<ObjectNode> for Kitchen {
    fn from_iter<T: IntoIterator<Item = ObjectNode>>(iter: T) -> Self {
        Kitchen::new(iter)
    }
}
