//! Whole-graph transforms: merging subgraphs, dropping detail to a coarser
//! hierarchy level, expanding with similar objects and compressing by
//! object categories.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::exec::Exec;
use crate::graph::FoonGraph;
use crate::model::{FunctionalUnit, HierarchyLevel, Kitchen, ObjectNode, UnitKey};
use crate::parser::CategoryIndex;
use crate::similarity::SimilarityIndex;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransformError {
    #[error("cannot raise a level {from} graph to level {to}")]
    RaiseLevel { from: HierarchyLevel, to: HierarchyLevel },
    #[error("expansion would produce up to {projected} units, above the cap of {cap}")]
    TooLarge { projected: usize, cap: usize },
    #[error("unit cap {cap} is below the input size {units}")]
    CapBelowInput { cap: usize, units: usize },
    #[error("similarity index threshold {index} differs from the configured {config}")]
    ThresholdMismatch { index: f64, config: f64 },
    #[error("unknown generalization mode `{0}` (expected `first` or `all`)")]
    UnknownMode(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionConfig {
    pub threshold: f64,
    /// Upper bound on candidate units; exceeded expansions fail instead of
    /// running.
    pub max_units: Option<usize>,
}

impl Default for ExpansionConfig {
    fn default() -> Self {
        ExpansionConfig { threshold: 0.89, max_units: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GeneralizeMode {
    /// Every categorized label takes its first listed category.
    #[default]
    FirstCategory,
    /// One unit per assignment of categories to the categorized labels.
    AllCombinations,
}

impl FromStr for GeneralizeMode {
    type Err = TransformError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "first" => Ok(GeneralizeMode::FirstCategory),
            "all" => Ok(GeneralizeMode::AllCombinations),
            other => Err(TransformError::UnknownMode(other.to_string())),
        }
    }
}

impl fmt::Display for GeneralizeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GeneralizeMode::FirstCategory => "first",
            GeneralizeMode::AllCombinations => "all",
        })
    }
}

/// Union of all units, keeping the first occurrence of each unit identity
/// at `level`.
pub fn merge<'a, I, S>(sources: I, level: HierarchyLevel) -> FoonGraph
where
    I: IntoIterator<Item = &'a S>,
    S: AsRef<[FunctionalUnit]> + ?Sized + 'a,
{
    FoonGraph::from_units(level, sources.into_iter().flat_map(|s| s.as_ref().iter().cloned()))
}

/// Rewrites every node to the detail of `target`, then deduplicates.
/// Nodes that become identical within one side of a unit are merged.
pub fn abstract_to_level(g: &FoonGraph, target: HierarchyLevel) -> Result<FoonGraph, TransformError> {
    if target > g.level() {
        return Err(TransformError::RaiseLevel { from: g.level(), to: target });
    }
    if target == g.level() {
        return Ok(g.clone());
    }
    let reduce = |nodes: &[ObjectNode]| nodes.iter().map(|n| n.reduced_to(target)).collect::<Vec<_>>();
    Ok(FoonGraph::from_units(
        target,
        g.units()
            .iter()
            .map(|u| FunctionalUnit::collapsed(reduce(u.inputs()), u.motion().clone(), reduce(u.outputs()), u)),
    ))
}

/// Label substitution choices for one unit: each distinct label with its
/// alternatives, the label itself first.
type Alternatives = Vec<(String, Vec<String>)>;

fn product_size(alts: &Alternatives) -> usize {
    alts.iter().fold(1usize, |acc, (_, a)| acc.saturating_mul(a.len()))
}

/// Visits every tuple of the Cartesian product in odometer order (last
/// position fastest), handing out a label -> replacement map that omits
/// unchanged labels.
fn for_each_assignment<F>(alts: &Alternatives, mut f: F)
where
    F: FnMut(&HashMap<&str, &str>),
{
    let mut pos = vec![0usize; alts.len()];
    loop {
        let map: HashMap<&str, &str> = alts
            .iter()
            .zip(&pos)
            .filter(|(_, &p)| p > 0)
            .map(|((label, a), &p)| (label.as_str(), a[p].as_str()))
            .collect();
        f(&map);
        let mut i = alts.len();
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            pos[i] += 1;
            if pos[i] < alts[i].1.len() {
                break;
            }
            pos[i] = 0;
        }
    }
}

fn distinct_node_labels(u: &FunctionalUnit) -> Vec<&str> {
    let mut labels: Vec<&str> = Vec::new();
    for n in u.nodes() {
        if !labels.contains(&n.label()) {
            labels.push(n.label());
        }
    }
    labels
}

fn expansion_alternatives(u: &FunctionalUnit, idx: &SimilarityIndex) -> Alternatives {
    distinct_node_labels(u)
        .into_iter()
        .map(|l| {
            let mut alts = vec![l.to_string()];
            alts.extend(idx.neighbors(l).map(|(n, _)| n.to_string()));
            (l.to_string(), alts)
        })
        .collect()
}

/// Substituted copies of `u`, one per label assignment other than the
/// identity. Assignments that would put the same node twice on one side, or
/// make a node contain itself, produce nothing.
fn expand_unit(u: &FunctionalUnit, alts: &Alternatives, level: HierarchyLevel) -> Vec<(UnitKey, FunctionalUnit)> {
    let mut out = Vec::new();
    for_each_assignment(alts, |map| {
        if map.is_empty() {
            return;
        }
        let relabel = |nodes: &[ObjectNode]| -> Option<Vec<ObjectNode>> {
            nodes.iter().map(|n| n.try_relabeled(|l| map.get(l).map(|s| s.to_string()))).collect()
        };
        let (Some(inputs), Some(outputs)) = (relabel(u.inputs()), relabel(u.outputs())) else {
            return;
        };
        if let Ok(unit) = FunctionalUnit::new(inputs, u.motion().clone(), outputs) {
            let unit = unit.with_time_span(u.time_span()).with_provenance(u.provenance().map(str::to_string));
            out.push((unit.key(level), unit));
        }
    });
    out
}

/// Adds, for every unit, a copy for each combination of similar
/// replacements of its object labels. Replacement is per label: a label
/// takes the same replacement everywhere in the unit, including inside
/// ingredient sets. The original units keep their positions at the front.
pub fn expand(
    g: &FoonGraph,
    idx: &SimilarityIndex,
    cfg: &ExpansionConfig,
    exec: Exec,
) -> Result<FoonGraph, TransformError> {
    if idx.threshold() != cfg.threshold {
        return Err(TransformError::ThresholdMismatch { index: idx.threshold(), config: cfg.threshold });
    }
    let alternatives: Vec<Alternatives> = exec.map(g.units(), |u| expansion_alternatives(u, idx));
    if let Some(cap) = cfg.max_units {
        if cap < g.len() {
            return Err(TransformError::CapBelowInput { cap, units: g.len() });
        }
        let projected = alternatives.iter().fold(0usize, |acc, a| acc.saturating_add(product_size(a)));
        if projected > cap {
            return Err(TransformError::TooLarge { projected, cap });
        }
    }

    let level = g.level();
    let indices: Vec<usize> = (0..g.len()).collect();
    let candidates = exec.map(&indices, |&i| expand_unit(g.unit(i), &alternatives[i], level));

    let mut out = g.clone();
    for (key, unit) in candidates.into_iter().flatten() {
        out.insert_keyed(key, unit);
    }
    Ok(out)
}

fn category_alternatives(u: &FunctionalUnit, cats: &CategoryIndex) -> Alternatives {
    let mut labels: Vec<&str> = Vec::new();
    for n in u.nodes() {
        for l in std::iter::once(n.label()).chain(n.ingredients().iter().map(String::as_str)) {
            if !labels.contains(&l) && !cats.categories_of(l).is_empty() {
                labels.push(l);
            }
        }
    }
    labels
        .into_iter()
        .map(|l| {
            let mut alts = vec![l.to_string()];
            alts.extend(cats.categories_of(l).iter().cloned());
            (l.to_string(), alts)
        })
        .collect()
}

fn generalize_unit(u: &FunctionalUnit, cats: &CategoryIndex, mode: GeneralizeMode) -> Vec<FunctionalUnit> {
    let rebuild = |map: &dyn Fn(&str) -> Option<String>| {
        let relabel = |nodes: &[ObjectNode]| nodes.iter().map(|n| n.relabeled(map)).collect::<Vec<_>>();
        FunctionalUnit::collapsed(relabel(u.inputs()), u.motion().clone(), relabel(u.outputs()), u)
    };
    match mode {
        GeneralizeMode::FirstCategory => vec![rebuild(&|l| cats.first_category(l).map(str::to_string))],
        GeneralizeMode::AllCombinations => {
            let alts = category_alternatives(u, cats);
            let mut out = Vec::new();
            for_each_assignment(&alts, |map| {
                // The identity tuple would keep specific labels; every
                // categorized label must take one of its categories.
                if map.len() == alts.len() {
                    out.push(rebuild(&|l| map.get(l).map(|s| s.to_string())));
                }
            });
            out
        }
    }
}

/// Replaces object labels (and ingredient labels) with their categories.
/// Labels without a category are kept. Units that become equal collapse.
pub fn generalize(g: &FoonGraph, cats: &CategoryIndex, mode: GeneralizeMode, exec: Exec) -> FoonGraph {
    let level = g.level();
    let generalized = exec.map(g.units(), |u| {
        generalize_unit(u, cats, mode).into_iter().map(|v| (v.key(level), v)).collect::<Vec<_>>()
    });
    let mut out = FoonGraph::new(level);
    for (key, unit) in generalized.into_iter().flatten() {
        out.insert_keyed(key, unit);
    }
    out
}

/// The category-level counterpart of a single node, using first categories.
pub fn categorize_node(node: &ObjectNode, cats: &CategoryIndex) -> ObjectNode {
    node.relabeled(|l| cats.first_category(l).map(str::to_string))
}

fn categorize_all(node: &ObjectNode, cats: &CategoryIndex) -> Vec<ObjectNode> {
    let mut labels: Vec<&str> = Vec::new();
    for l in std::iter::once(node.label()).chain(node.ingredients().iter().map(String::as_str)) {
        if !labels.contains(&l) && !cats.categories_of(l).is_empty() {
            labels.push(l);
        }
    }
    let alts: Alternatives = labels
        .into_iter()
        .map(|l| (l.to_string(), cats.categories_of(l).to_vec()))
        .map(|(l, c)| {
            let mut a = vec![l.clone()];
            a.extend(c);
            (l, a)
        })
        .collect();
    let mut out = Vec::new();
    for_each_assignment(&alts, |map| {
        if map.len() == alts.len() {
            out.push(node.relabeled(|l| map.get(l).map(|s| s.to_string())));
        }
    });
    out
}

/// Maps a retrieval query onto a generalized network. Kitchen items follow
/// `mode` (every category combination in `AllCombinations`); the goal always
/// takes first categories, since a query has a single goal.
pub fn categorize_query(
    kitchen: &Kitchen,
    goal: &ObjectNode,
    cats: &CategoryIndex,
    mode: GeneralizeMode,
) -> (Kitchen, ObjectNode) {
    let items: Vec<ObjectNode> = match mode {
        GeneralizeMode::FirstCategory => kitchen.items().iter().map(|n| categorize_node(n, cats)).collect(),
        GeneralizeMode::AllCombinations => kitchen.items().iter().flat_map(|n| categorize_all(n, cats)).collect(),
    };
    (Kitchen::new(items), categorize_node(goal, cats))
}
