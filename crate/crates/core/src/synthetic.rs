//! Seeded recipe-like networks for benchmarking without an annotated
//! corpus.
//!
//! Objects come in families of interchangeable labels (`food3a`, `food3b`,
//! ...). Family members are similar to each other and share a category,
//! which is what expansion and generalization act on. Each dish is a chain
//! of `add` steps into one container, every step fed by a preparation unit
//! (tool + raw ingredient). Some dishes get variants that swap an
//! ingredient for a family member, giving alternative producers in the
//! regular network that collapse once generalized.

use std::collections::BTreeMap;

use crate::exec::Exec;
use crate::experiment::{ExperimentError, GenNetwork, Networks};
use crate::graph::FoonGraph;
use crate::model::{FunctionalUnit, HierarchyLevel, MotionNode, ObjectNode};
use crate::parser::{CategoryIndex, SimilarityMatrix};
use crate::rng::SplitMix64;
use crate::similarity::SimilarityIndex;
use crate::transform::{expand, generalize, ExpansionConfig, GeneralizeMode};

const SIMILAR: f64 = 0.9;
const THRESHOLD: f64 = 0.89;
const PREP: [(&str, &str); 5] =
    [("chop", "chopped"), ("slice", "sliced"), ("peel", "peeled"), ("dice", "diced"), ("grate", "grated")];

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticParams {
    pub dishes: usize,
    pub min_steps: usize,
    pub max_steps: usize,
    pub food_families: usize,
    pub tool_families: usize,
    pub container_families: usize,
    /// Relative weights of family sizes 1, 2, 3, ...
    pub family_size_weights: Vec<u64>,
    /// Chance that a dish also gets a one-ingredient variant.
    pub variant_rate: f64,
}

impl SyntheticParams {
    /// Sized so that the level-2 regular, expanded and generalized networks
    /// land near 866, 5493 and 821 units.
    pub fn paper_scale() -> Self {
        SyntheticParams {
            dishes: 154,
            min_steps: 3,
            max_steps: 5,
            food_families: 90,
            tool_families: 24,
            container_families: 40,
            family_size_weights: vec![2, 5, 5, 3],
            variant_rate: 0.25,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticWorld {
    pub reg: FoonGraph,
    pub similarity: SimilarityMatrix,
    pub categories: CategoryIndex,
    pub threshold: f64,
}

struct Families {
    members: Vec<Vec<String>>,
}

impl Families {
    /// Family sizes follow `weights` exactly (stratified, not sampled), so
    /// network sizes vary little between seeds.
    fn new(prefix: &str, count: usize, weights: &[u64]) -> Self {
        let total: u64 = weights.iter().sum();
        let members = (0..count)
            .map(|f| {
                let mut r = (2 * f as u64 + 1) * total / (2 * count as u64);
                let mut size = weights.len();
                for (i, &w) in weights.iter().enumerate() {
                    if r < w {
                        size = i + 1;
                        break;
                    }
                    r -= w;
                }
                (0..size).map(|m| format!("{prefix}{f}{}", (b'a' + m as u8) as char)).collect()
            })
            .collect();
        Families { members }
    }

    fn pick(&self, rng: &mut SplitMix64) -> (usize, usize) {
        let f = rng.below(self.members.len() as u64) as usize;
        (f, rng.below(self.members[f].len() as u64) as usize)
    }

    fn label(&self, (f, m): (usize, usize)) -> &str {
        &self.members[f][m]
    }
}

fn obj(label: &str, state: &str) -> ObjectNode {
    ObjectNode::new(label, [state], Vec::<&str>::new(), false).expect("generated labels are valid")
}

fn tool(label: &str) -> ObjectNode {
    ObjectNode::plain(label).expect("generated labels are valid")
}

fn unit(inputs: Vec<ObjectNode>, motion: &str, outputs: Vec<ObjectNode>) -> FunctionalUnit {
    FunctionalUnit::new(inputs, MotionNode::new(motion).expect("motion"), outputs).expect("generated units are valid")
}

pub fn generate(params: &SyntheticParams, seed: u64, level: HierarchyLevel) -> SyntheticWorld {
    let mut rng = SplitMix64::new(seed);
    let foods = Families::new("food", params.food_families, &params.family_size_weights);
    let tools = Families::new("tool", params.tool_families, &params.family_size_weights);
    let containers = Families::new("vessel", params.container_families, &params.family_size_weights);

    // Family members are prepared the same way, each with its own tool.
    let mut prep: BTreeMap<String, (usize, String)> = BTreeMap::new();
    for family in &foods.members {
        let p = rng.below(PREP.len() as u64) as usize;
        for label in family {
            let t = tools.label(tools.pick(&mut rng)).to_string();
            prep.insert(label.clone(), (p, t));
        }
    }
    let prepare = |label: &str| {
        let (p, t) = &prep[label];
        let (motion, state) = PREP[*p];
        (
            unit(vec![tool(t), obj(label, "raw")], motion, vec![tool(t), obj(label, state)]),
            obj(label, state),
        )
    };

    let mut units = Vec::new();
    let span = (params.max_steps - params.min_steps + 1) as u64;
    for d in 0..params.dishes {
        let vessel = containers.label(containers.pick(&mut rng)).to_string();
        let steps = params.min_steps + rng.below(span) as usize;
        let mut picks = Vec::with_capacity(steps);
        while picks.len() < steps {
            let p = foods.pick(&mut rng);
            if !picks.iter().any(|&(f, _)| f == p.0) {
                picks.push(p);
            }
        }
        let stage = |j: usize| if j == 0 { "empty".to_string() } else { format!("dish{d} stage{j}") };
        for (j, &p) in picks.iter().enumerate() {
            let (prep_unit, prepared) = prepare(foods.label(p));
            units.push(prep_unit);
            units.push(unit(vec![obj(&vessel, &stage(j)), prepared], "add", vec![obj(&vessel, &stage(j + 1))]));
        }
        let draw = rng.below(1_000_000) as f64 / 1_000_000.0;
        let swappable: Vec<usize> = (0..steps).filter(|&j| foods.members[picks[j].0].len() > 1).collect();
        if draw < params.variant_rate && !swappable.is_empty() {
            let j = swappable[rng.below(swappable.len() as u64) as usize];
            let (f, m) = picks[j];
            let size = foods.members[f].len();
            let other = (m + 1 + rng.below(size as u64 - 1) as usize) % size;
            let (prep_unit, prepared) = prepare(foods.label((f, other)));
            units.push(prep_unit);
            units.push(unit(vec![obj(&vessel, &stage(j)), prepared], "add", vec![obj(&vessel, &stage(j + 1))]));
        }
    }

    let mut similarity = SimilarityMatrix::new();
    let mut assignments: Vec<(String, Vec<String>)> = Vec::new();
    let mut categories = Vec::new();
    for (prefix, fams) in [("food", &foods), ("tool", &tools), ("vessel", &containers)] {
        for (f, members) in fams.members.iter().enumerate() {
            let category = format!("{prefix}{f}");
            for (i, a) in members.iter().enumerate() {
                assignments.push((a.clone(), vec![category.clone()]));
                for b in &members[i + 1..] {
                    similarity.insert(a, b, SIMILAR).expect("distinct labels");
                }
            }
            categories.push(category);
        }
    }
    let categories = CategoryIndex::new(categories, assignments).expect("categories are declared");

    SyntheticWorld { reg: FoonGraph::from_units(level, units), similarity, categories, threshold: THRESHOLD }
}

/// The calibrated world used by the benchmark.
pub fn paper_scale(seed: u64, level: HierarchyLevel) -> SyntheticWorld {
    generate(&SyntheticParams::paper_scale(), seed, level)
}

impl SyntheticWorld {
    pub fn similarity_index(&self) -> SimilarityIndex {
        SimilarityIndex::from_matrix(&self.similarity, self.threshold).expect("generated scores are in range")
    }

    /// Regular, expanded and generalized networks.
    pub fn networks(&self, mode: GeneralizeMode, exec: Exec) -> Result<Networks, ExperimentError> {
        let cfg = ExpansionConfig { threshold: self.threshold, max_units: None };
        let exp = expand(&self.reg, &self.similarity_index(), &cfg, exec)?;
        let gen = generalize(&self.reg, &self.categories, mode, exec);
        Ok(Networks {
            reg: self.reg.clone(),
            exp: Some(exp),
            gen: Some(GenNetwork { graph: gen, categories: self.categories.clone(), mode }),
        })
    }
}
