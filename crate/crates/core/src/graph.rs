//! The deduplicated functional-unit network and its derived indices.

use std::collections::HashMap;
use std::fmt;

use crate::model::{FunctionalUnit, HierarchyLevel, NodeKey, UnitKey};

/// Dense index of an object identity inside one [`FoonGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ObjectId(pub(crate) u32);

impl ObjectId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Index of a functional unit inside one [`FoonGraph`], in insertion order.
pub type UnitId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GraphStats {
    pub object_node_count: usize,
    pub motion_node_count: usize,
    pub unit_count: usize,
}

impl fmt::Display for GraphStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "objects={} motions={} units={}", self.object_node_count, self.motion_node_count, self.unit_count)
    }
}

/// A set of functional units, unique under unit identity at `level`.
///
/// Object identities are interned into [`ObjectId`]s; `object_index` and
/// `producer_index` are maintained on every insertion and are never edited
/// independently of `units`.
#[derive(Debug, Clone)]
pub struct FoonGraph {
    level: HierarchyLevel,
    units: Vec<FunctionalUnit>,
    unit_keys: HashMap<UnitKey, UnitId>,
    objects: Vec<NodeKey>,
    object_ids: HashMap<NodeKey, ObjectId>,
    unit_inputs: Vec<Vec<ObjectId>>,
    unit_outputs: Vec<Vec<ObjectId>>,
    object_index: Vec<Vec<UnitId>>,
    producer_index: Vec<Vec<UnitId>>,
}

impl FoonGraph {
    pub fn new(level: HierarchyLevel) -> Self {
        FoonGraph {
            level,
            units: Vec::new(),
            unit_keys: HashMap::new(),
            objects: Vec::new(),
            object_ids: HashMap::new(),
            unit_inputs: Vec::new(),
            unit_outputs: Vec::new(),
            object_index: Vec::new(),
            producer_index: Vec::new(),
        }
    }

    /// Builds a graph keeping the first occurrence of every unit identity.
    pub fn from_units<I>(level: HierarchyLevel, units: I) -> Self
    where
        I: IntoIterator<Item = FunctionalUnit>,
    {
        let mut g = FoonGraph::new(level);
        for u in units {
            g.insert(u);
        }
        g
    }

    /// Adds `unit` unless an equal unit is already present. Returns whether
    /// it was added.
    pub(crate) fn insert(&mut self, unit: FunctionalUnit) -> bool {
        let key = unit.key(self.level);
        self.insert_keyed(key, unit)
    }

    pub(crate) fn insert_keyed(&mut self, key: UnitKey, unit: FunctionalUnit) -> bool {
        if self.unit_keys.contains_key(&key) {
            return false;
        }
        let id = self.units.len();
        let inputs = self.intern_side(&key.inputs, id, false);
        let outputs = self.intern_side(&key.outputs, id, true);
        self.unit_keys.insert(key, id);
        self.unit_inputs.push(inputs);
        self.unit_outputs.push(outputs);
        self.units.push(unit);
        true
    }

    fn intern_side(&mut self, keys: &[NodeKey], unit: UnitId, produces: bool) -> Vec<ObjectId> {
        let mut ids: Vec<ObjectId> = Vec::with_capacity(keys.len());
        for k in keys {
            let id = self.intern(k);
            if ids.contains(&id) {
                continue;
            }
            ids.push(id);
            let uses = &mut self.object_index[id.index()];
            if uses.last() != Some(&unit) {
                uses.push(unit);
            }
            if produces {
                self.producer_index[id.index()].push(unit);
            }
        }
        ids
    }

    fn intern(&mut self, key: &NodeKey) -> ObjectId {
        if let Some(&id) = self.object_ids.get(key) {
            return id;
        }
        let id = ObjectId(u32::try_from(self.objects.len()).expect("object count fits in u32"));
        self.objects.push(key.clone());
        self.object_ids.insert(key.clone(), id);
        self.object_index.push(Vec::new());
        self.producer_index.push(Vec::new());
        id
    }

    pub fn level(&self) -> HierarchyLevel {
        self.level
    }

    pub fn units(&self) -> &[FunctionalUnit] {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn unit(&self, id: UnitId) -> &FunctionalUnit {
        &self.units[id]
    }

    pub fn contains_unit(&self, unit: &FunctionalUnit) -> bool {
        self.unit_keys.contains_key(&unit.key(self.level))
    }

    pub fn contains_key(&self, key: &UnitKey) -> bool {
        self.unit_keys.contains_key(key)
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn object_key(&self, id: ObjectId) -> &NodeKey {
        &self.objects[id.index()]
    }

    pub fn object_id(&self, key: &NodeKey) -> Option<ObjectId> {
        self.object_ids.get(key).copied()
    }

    pub fn object_ids(&self) -> impl Iterator<Item = ObjectId> + '_ {
        (0..self.objects.len()).map(|i| ObjectId(i as u32))
    }

    /// Distinct input identities of a unit, in first-appearance order.
    pub fn unit_inputs(&self, id: UnitId) -> &[ObjectId] {
        &self.unit_inputs[id]
    }

    pub fn unit_outputs(&self, id: UnitId) -> &[ObjectId] {
        &self.unit_outputs[id]
    }

    /// Units in which the object appears on either side.
    pub fn object_index(&self, id: ObjectId) -> &[UnitId] {
        &self.object_index[id.index()]
    }

    /// Units producing the object, in insertion order.
    pub fn producers(&self, id: ObjectId) -> &[UnitId] {
        &self.producer_index[id.index()]
    }

    pub fn stats(&self) -> GraphStats {
        GraphStats {
            object_node_count: self.objects.len(),
            motion_node_count: self.units.len(),
            unit_count: self.units.len(),
        }
    }
}

impl AsRef<[FunctionalUnit]> for FoonGraph {
    fn as_ref(&self) -> &[FunctionalUnit] {
        &self.units
    }
}

pub fn graph_stats(g: &FoonGraph) -> GraphStats {
    g.stats()
}
