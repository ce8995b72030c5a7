//! Seeded benchmark: random goals and kitchens, retrieval on the regular,
//! expanded and generalized networks, success counts and timings.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::exec::Exec;
use crate::graph::FoonGraph;
use crate::model::{HierarchyLevel, Kitchen, NodeKey};
use crate::parser::{
    parse_category_index, parse_kitchen, parse_similarity_matrix, parse_subgraph, CategoryIndex, ParseError,
};
use crate::retrieval::{Retrieval, RetrievalOutcome, Retriever, SearchBudget};
use crate::rng::SplitMix64;
use crate::similarity::{SimilarityError, SimilarityIndex};
use crate::synthetic;
use crate::transform::{categorize_node, categorize_query, expand, generalize, ExpansionConfig, GeneralizeMode, TransformError};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("asked for {wanted} goals but only {eligible} objects are produced by some unit")]
    TooFewGoals { wanted: usize, eligible: usize },
    #[error("kitchen size {size} exceeds the pool of {pool} objects")]
    KitchenTooLarge { size: usize, pool: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("network {name} is at level {found}, the experiment runs at level {expected}")]
    LevelMismatch { name: &'static str, found: HierarchyLevel, expected: HierarchyLevel },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: ParseError },
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Similarity(#[from] SimilarityError),
}

/// Number of pool objects placed in each trial's kitchen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KitchenSize {
    Count(usize),
    /// Share of the pool, rounded to the nearest count.
    Fraction(f64),
}

impl KitchenSize {
    pub fn resolve(self, pool: usize) -> Result<usize, ExperimentError> {
        let n = match self {
            KitchenSize::Count(n) => n,
            KitchenSize::Fraction(f) if (0.0..=1.0).contains(&f) => (f * pool as f64).round() as usize,
            KitchenSize::Fraction(f) => {
                return Err(ExperimentError::Config(format!("kitchen fraction {f} outside [0, 1]")));
            }
        };
        if n > pool {
            return Err(ExperimentError::KitchenTooLarge { size: n, pool });
        }
        Ok(n)
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub goals_per_trial: usize,
    /// Candidate kitchen objects; sorted and deduplicated before sampling.
    pub kitchen_pool: Vec<NodeKey>,
    pub kitchen_size: KitchenSize,
    pub seed: u64,
    pub budget: SearchBudget,
    pub level: HierarchyLevel,
    /// `Parallel` runs trials concurrently.
    pub exec: Exec,
    /// When false every wall-clock field is reported as zero.
    pub record_timing: bool,
}

impl ExperimentConfig {
    pub fn new(level: HierarchyLevel, kitchen_pool: Vec<NodeKey>) -> Self {
        ExperimentConfig {
            trials: 10,
            goals_per_trial: 100,
            kitchen_pool,
            kitchen_size: KitchenSize::Fraction(0.5),
            seed: 0,
            budget: SearchBudget::default(),
            level,
            exec: Exec::default(),
            record_timing: true,
        }
    }
}

/// A generalized network and what is needed to map queries onto it.
#[derive(Debug, Clone)]
pub struct GenNetwork {
    pub graph: FoonGraph,
    pub categories: CategoryIndex,
    pub mode: GeneralizeMode,
}

#[derive(Debug, Clone)]
pub struct Networks {
    pub reg: FoonGraph,
    pub exp: Option<FoonGraph>,
    pub gen: Option<GenNetwork>,
}

impl Networks {
    fn names(&self) -> Vec<&'static str> {
        let mut names = vec!["REG"];
        if self.exp.is_some() {
            names.push("EXP");
        }
        if self.gen.is_some() {
            names.push("GEN");
        }
        names
    }
}

/// Identities some unit brings into existence. An object passing through a
/// unit unchanged (a knife used for cutting) is not produced by it.
fn produced(g: &FoonGraph) -> BTreeSet<&NodeKey> {
    let mut out = BTreeSet::new();
    for u in 0..g.len() {
        let inputs = g.unit_inputs(u);
        out.extend(g.unit_outputs(u).iter().filter(|o| !inputs.contains(o)).map(|&o| g.object_key(o)));
    }
    out
}

/// Input identities that no unit produces, in canonical order.
pub fn default_kitchen_pool(g: &FoonGraph) -> Vec<NodeKey> {
    let produced = produced(g);
    let pool: BTreeSet<&NodeKey> = (0..g.len())
        .flat_map(|u| g.unit_inputs(u).iter().map(|&i| g.object_key(i)))
        .filter(|k| !produced.contains(k))
        .collect();
    pool.into_iter().cloned().collect()
}

/// `n` distinct produced identities of `g`, drawn without replacement.
pub fn select_goals(g: &FoonGraph, n: usize, rng: &mut SplitMix64) -> Result<Vec<NodeKey>, ExperimentError> {
    let eligible: Vec<&NodeKey> = produced(g).into_iter().collect();
    if n > eligible.len() {
        return Err(ExperimentError::TooFewGoals { wanted: n, eligible: eligible.len() });
    }
    Ok(rng.sample(&eligible, n).into_iter().cloned().collect())
}

/// A kitchen of `size` distinct pool objects drawn without replacement.
pub fn select_kitchen(pool: &[NodeKey], size: usize, rng: &mut SplitMix64) -> Result<Kitchen, ExperimentError> {
    let sorted: Vec<&NodeKey> = pool.iter().collect::<BTreeSet<_>>().into_iter().collect();
    if size > sorted.len() {
        return Err(ExperimentError::KitchenTooLarge { size, pool: sorted.len() });
    }
    Ok(rng.sample(&sorted, size).into_iter().map(NodeKey::to_node).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoalOutcome {
    pub goal: String,
    pub outcome: &'static str,
    /// Units in the retrieved tree, when solved.
    pub steps: Option<usize>,
    pub expansions: u64,
    pub ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkTrial {
    pub network: &'static str,
    pub successes: usize,
    pub timeouts: usize,
    pub unsolvables: usize,
    pub mean_retrieval_ms: f64,
    pub outcomes: Vec<GoalOutcome>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialReport {
    /// 1-based.
    pub trial: usize,
    pub kitchen: Vec<String>,
    pub goals: Vec<String>,
    pub networks: Vec<NetworkTrial>,
}

impl TrialReport {
    pub fn network(&self, name: &str) -> Option<&NetworkTrial> {
        self.networks.iter().find(|n| n.network == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NetworkSummary {
    pub network: &'static str,
    pub mean_successes: f64,
    pub mean_retrieval_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub trials: Vec<TrialReport>,
    pub summary: Vec<NetworkSummary>,
}

#[derive(Serialize)]
#[serde(tag = "record", rename_all = "lowercase")]
enum Line<'a> {
    Sample { trial: usize, kitchen: &'a [String], goals: &'a [String] },
    Goal { trial: usize, network: &'a str, #[serde(flatten)] outcome: &'a GoalOutcome },
    Trial { trial: usize, network: &'a str, successes: usize, timeouts: usize, unsolvables: usize, mean_retrieval_ms: f64 },
    Aggregate { network: &'a str, trials: usize, mean_successes: f64, mean_retrieval_ms: f64 },
}

impl ExperimentReport {
    pub fn summary(&self, name: &str) -> Option<&NetworkSummary> {
        self.summary.iter().find(|s| s.network == name)
    }

    /// Sets every wall-clock field to zero.
    pub fn zero_timings(&mut self) {
        for t in &mut self.trials {
            for n in &mut t.networks {
                n.mean_retrieval_ms = 0.0;
                n.outcomes.iter_mut().for_each(|o| o.ms = 0.0);
            }
        }
        self.summary.iter_mut().for_each(|s| s.mean_retrieval_ms = 0.0);
    }

    /// One JSON record per sample, goal retrieval, trial summary and
    /// network aggregate.
    pub fn to_json_lines(&self) -> String {
        let mut out = String::new();
        let mut push = |line: Line| {
            out.push_str(&serde_json::to_string(&line).expect("report records serialize"));
            out.push('\n');
        };
        for t in &self.trials {
            push(Line::Sample { trial: t.trial, kitchen: &t.kitchen, goals: &t.goals });
            for n in &t.networks {
                for o in &n.outcomes {
                    push(Line::Goal { trial: t.trial, network: n.network, outcome: o });
                }
                push(Line::Trial {
                    trial: t.trial,
                    network: n.network,
                    successes: n.successes,
                    timeouts: n.timeouts,
                    unsolvables: n.unsolvables,
                    mean_retrieval_ms: n.mean_retrieval_ms,
                });
            }
        }
        for s in &self.summary {
            push(Line::Aggregate {
                network: s.network,
                trials: self.trials.len(),
                mean_successes: s.mean_successes,
                mean_retrieval_ms: s.mean_retrieval_ms,
            });
        }
        out
    }

    /// Success counts per trial, then mean successes and mean retrieval
    /// time, one column per network.
    pub fn to_csv(&self) -> String {
        let names: Vec<&str> = self.summary.iter().map(|s| s.network).collect();
        let mut out = format!("trial,{}\n", names.join(","));
        for t in &self.trials {
            let row: Vec<String> =
                names.iter().map(|n| t.network(n).map_or(0, |x| x.successes).to_string()).collect();
            let _ = writeln!(out, "{},{}", t.trial, row.join(","));
        }
        let successes: Vec<String> = self.summary.iter().map(|s| format!("{:.1}", s.mean_successes)).collect();
        let _ = writeln!(out, "mean_successes,{}", successes.join(","));
        let times: Vec<String> = self.summary.iter().map(|s| format!("{:.3}", s.mean_retrieval_ms)).collect();
        let _ = writeln!(out, "mean_retrieval_ms,{}", times.join(","));
        out
    }
}

fn to_ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

fn check_level(name: &'static str, g: &FoonGraph, level: HierarchyLevel) -> Result<(), ExperimentError> {
    if g.level() != level {
        return Err(ExperimentError::LevelMismatch { name, found: g.level(), expected: level });
    }
    Ok(())
}

fn run_trial(
    cfg: &ExperimentConfig,
    nets: &Networks,
    kitchen_size: usize,
    t: usize,
) -> Result<TrialReport, ExperimentError> {
    let mut rng = SplitMix64::for_trial(cfg.seed, t as u64);
    let kitchen = select_kitchen(&cfg.kitchen_pool, kitchen_size, &mut rng)?;
    let goals = select_goals(&nets.reg, cfg.goals_per_trial, &mut rng)?;

    let names = nets.names();
    let mut outcomes: Vec<Vec<GoalOutcome>> = vec![Vec::with_capacity(goals.len()); names.len()];
    let reg = Retriever::new(&nets.reg).budget(cfg.budget);
    let exp = nets.exp.as_ref().map(|g| Retriever::new(g).budget(cfg.budget));
    let gen = nets.gen.as_ref().map(|g| Retriever::new(&g.graph).budget(cfg.budget));

    let reg_kitchen = reg.prepare(&kitchen);
    let exp_kitchen = exp.as_ref().map(|r| r.prepare(&kitchen));
    let gen_kitchen = match (&gen, &nets.gen) {
        (Some(r), Some(g)) => goals
            .first()
            .map(|first| r.prepare(&categorize_query(&kitchen, &first.to_node(), &g.categories, g.mode).0)),
        _ => None,
    };

    // Retrievals for one goal are interleaved across networks so that any
    // drift in machine load affects all of them alike.
    for key in &goals {
        let goal = key.to_node();
        let mut slot = 0;
        let mut record = |r: Retrieval, slot: &mut usize| {
            outcomes[*slot].push(GoalOutcome {
                goal: key.to_string(),
                outcome: r.outcome.kind(),
                steps: match &r.outcome {
                    RetrievalOutcome::Solved { tree, .. } => Some(tree.units.len()),
                    _ => None,
                },
                expansions: r.expansions,
                ms: if cfg.record_timing { to_ms(r.elapsed) } else { 0.0 },
            });
            *slot += 1;
        };
        record(reg.retrieve_prepared(&goal, &reg_kitchen), &mut slot);
        if let (Some(r), Some(k)) = (&exp, &exp_kitchen) {
            record(r.retrieve_prepared(&goal, k), &mut slot);
        }
        if let (Some(r), Some(g), Some(k)) = (&gen, &nets.gen, &gen_kitchen) {
            // The query goal always takes first categories, whatever the mode.
            record(r.retrieve_prepared(&categorize_node(&goal, &g.categories), k), &mut slot);
        }
    }

    let networks = names
        .into_iter()
        .zip(outcomes)
        .map(|(network, outcomes)| {
            let count = |kind: &str| outcomes.iter().filter(|o| o.outcome == kind).count();
            let total: f64 = outcomes.iter().map(|o| o.ms).sum();
            NetworkTrial {
                network,
                successes: count("solved"),
                timeouts: count("timeout"),
                unsolvables: count("unsolvable"),
                mean_retrieval_ms: if outcomes.is_empty() { 0.0 } else { total / outcomes.len() as f64 },
                outcomes,
            }
        })
        .collect();

    Ok(TrialReport {
        trial: t + 1,
        kitchen: kitchen.items().iter().map(|n| n.key(cfg.level).to_string()).collect(),
        goals: goals.iter().map(ToString::to_string).collect(),
        networks,
    })
}

/// Runs every trial and aggregates per-network means. Equal configurations
/// give equal reports apart from wall-clock fields.
pub fn run_experiment(cfg: &ExperimentConfig, nets: &Networks) -> Result<ExperimentReport, ExperimentError> {
    if cfg.trials == 0 {
        return Err(ExperimentError::Config("trials must be at least 1".into()));
    }
    check_level("REG", &nets.reg, cfg.level)?;
    if let Some(g) = &nets.exp {
        check_level("EXP", g, cfg.level)?;
    }
    if let Some(g) = &nets.gen {
        check_level("GEN", &g.graph, cfg.level)?;
    }
    let pool: BTreeSet<&NodeKey> = cfg.kitchen_pool.iter().collect();
    let kitchen_size = cfg.kitchen_size.resolve(pool.len())?;

    let trials: Vec<TrialReport> =
        cfg.exec.map_range(cfg.trials, |t| run_trial(cfg, nets, kitchen_size, t)).into_iter().collect::<Result<_, _>>()?;

    let summary = nets
        .names()
        .into_iter()
        .map(|name| {
            let per_trial: Vec<&NetworkTrial> = trials.iter().filter_map(|t| t.network(name)).collect();
            let successes: usize = per_trial.iter().map(|n| n.successes).sum();
            let goals: usize = per_trial.iter().map(|n| n.outcomes.len()).sum();
            let ms: f64 = per_trial.iter().flat_map(|n| n.outcomes.iter().map(|o| o.ms)).sum();
            NetworkSummary {
                network: name,
                mean_successes: successes as f64 / trials.len() as f64,
                mean_retrieval_ms: if goals == 0 { 0.0 } else { ms / goals as f64 },
            }
        })
        .collect();
    Ok(ExperimentReport { trials, summary })
}

/// Benchmark configuration file (TOML). Paths are relative to the file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    #[serde(default = "defaults::trials")]
    pub trials: usize,
    #[serde(default = "defaults::goals")]
    pub goals_per_trial: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::level")]
    pub level: u8,
    #[serde(default = "defaults::kitchen_size")]
    pub kitchen_size: KitchenSize,
    #[serde(default = "defaults::max_expansions")]
    pub max_expansions: u64,
    pub wall_clock_limit_ms: Option<u64>,
    #[serde(default = "defaults::yes")]
    pub timing: bool,
    #[serde(default = "defaults::yes")]
    pub parallel: bool,
    /// Regular network. Exactly one of `reg` and `synthetic` is required.
    pub reg: Option<PathBuf>,
    /// Seed for a generated paper-scale world instead of files.
    pub synthetic: Option<u64>,
    pub exp: Option<PathBuf>,
    /// Similarity matrix used to expand `reg` when `exp` is not given.
    pub similarity: Option<PathBuf>,
    #[serde(default = "defaults::threshold")]
    pub threshold: f64,
    pub gen: Option<PathBuf>,
    /// Needed for the generalized network and its query mapping.
    pub categories: Option<PathBuf>,
    #[serde(default)]
    pub mode: Option<String>,
    /// Kitchen file; defaults to the never-produced inputs of `reg`.
    pub kitchen_pool: Option<PathBuf>,
}

mod defaults {
    use super::KitchenSize;
    pub fn trials() -> usize {
        10
    }
    pub fn goals() -> usize {
        100
    }
    pub fn level() -> u8 {
        2
    }
    pub fn kitchen_size() -> KitchenSize {
        KitchenSize::Fraction(0.5)
    }
    pub fn max_expansions() -> u64 {
        1_000_000
    }
    pub fn yes() -> bool {
        true
    }
    pub fn threshold() -> f64 {
        0.89
    }
}

fn read(path: &Path) -> Result<String, ExperimentError> {
    std::fs::read_to_string(path).map_err(|source| ExperimentError::Io { path: path.to_path_buf(), source })
}

fn load_graph(path: &Path, level: HierarchyLevel) -> Result<FoonGraph, ExperimentError> {
    let name = path.display().to_string();
    let sub = parse_subgraph(&read(path)?, &name)
        .map_err(|source| ExperimentError::Parse { path: path.to_path_buf(), source })?;
    Ok(FoonGraph::from_units(level, sub.units))
}

/// Reads a benchmark configuration and builds the networks it names.
pub fn load_experiment(path: &Path) -> Result<(ExperimentConfig, Networks), ExperimentError> {
    let file = ExperimentFile::parse(&read(path)?)?;
    file.build(path.parent().unwrap_or(Path::new(".")))
}

impl ExperimentFile {
    pub fn parse(text: &str) -> Result<Self, ExperimentError> {
        toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn build(&self, base: &Path) -> Result<(ExperimentConfig, Networks), ExperimentError> {
        let level: HierarchyLevel =
            self.level.to_string().parse().map_err(|e: crate::model::ModelError| ExperimentError::Config(e.to_string()))?;
        let mode: GeneralizeMode = match &self.mode {
            Some(m) => m.parse()?,
            None => GeneralizeMode::default(),
        };
        let exec = if self.parallel { Exec::Parallel } else { Exec::Sequential };
        let at = |p: &PathBuf| base.join(p);

        let nets = match (&self.reg, self.synthetic) {
            (Some(_), Some(_)) | (None, None) => {
                return Err(ExperimentError::Config("give exactly one of `reg` and `synthetic`".into()));
            }
            (None, Some(seed)) => {
                let world = synthetic::paper_scale(seed, level);
                world.networks(mode, exec)?
            }
            (Some(reg), None) => {
                let reg = load_graph(&at(reg), level)?;
                let exp = match (&self.exp, &self.similarity) {
                    (Some(p), _) => Some(load_graph(&at(p), level)?),
                    (None, Some(p)) => {
                        let m = parse_similarity_matrix(&read(&at(p))?)
                            .map_err(|source| ExperimentError::Parse { path: at(p), source })?;
                        let idx = SimilarityIndex::from_matrix(&m, self.threshold)?;
                        let cfg = ExpansionConfig { threshold: self.threshold, max_units: None };
                        Some(expand(&reg, &idx, &cfg, exec)?)
                    }
                    (None, None) => None,
                };
                let categories = match &self.categories {
                    Some(p) => Some(
                        parse_category_index(&read(&at(p))?)
                            .map_err(|source| ExperimentError::Parse { path: at(p), source })?,
                    ),
                    None => None,
                };
                let gen = match (&self.gen, categories) {
                    (Some(p), Some(categories)) => {
                        Some(GenNetwork { graph: load_graph(&at(p), level)?, categories, mode })
                    }
                    (None, Some(categories)) => {
                        Some(GenNetwork { graph: generalize(&reg, &categories, mode, exec), categories, mode })
                    }
                    (Some(_), None) => {
                        return Err(ExperimentError::Config("`gen` needs `categories` for query mapping".into()));
                    }
                    (None, None) => None,
                };
                Networks { reg, exp, gen }
            }
        };

        let kitchen_pool = match &self.kitchen_pool {
            Some(p) => {
                let k = parse_kitchen(&read(&at(p))?).map_err(|source| ExperimentError::Parse { path: at(p), source })?;
                k.items().iter().map(|n| n.key(level)).collect()
            }
            None => default_kitchen_pool(&nets.reg),
        };
        let cfg = ExperimentConfig {
            trials: self.trials,
            goals_per_trial: self.goals_per_trial,
            kitchen_pool,
            kitchen_size: self.kitchen_size,
            seed: self.seed,
            budget: SearchBudget {
                max_expansions: self.max_expansions,
                wall_clock_limit: self.wall_clock_limit_ms.map(Duration::from_millis),
            },
            level,
            exec,
            record_timing: self.timing,
        };
        Ok((cfg, nets))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_subgraph;
    use crate::retrieval::is_solvable;
    use HierarchyLevel::*;

    const SALAD: &str = "O\tknife\nO\tlettuce\nS\twhole\nM\tcut\nO\tknife\nO\tlettuce\nS\tchopped\n//\n\
O\tbowl\nS\tcontains\nI\ttomato\nO\tlettuce\nS\tchopped\nM\tpour\nO\tbowl\nS\tcontains\nI\tlettuce,tomato\n//\n";

    fn salad(level: HierarchyLevel) -> FoonGraph {
        FoonGraph::from_units(level, parse_subgraph(SALAD, "salad").unwrap().units)
    }

    #[test]
    fn salad_goals_are_the_two_outputs() {
        let g = salad(L3);
        let goals = select_goals(&g, 2, &mut SplitMix64::new(1)).unwrap();
        let labels: BTreeSet<String> = goals.iter().map(ToString::to_string).collect();
        assert_eq!(
            labels,
            BTreeSet::from(["bowl:contains@lettuce,tomato".to_string(), "lettuce:chopped".to_string()])
        );
        assert!(select_goals(&g, 0, &mut SplitMix64::new(1)).unwrap().is_empty());
        assert!(matches!(
            select_goals(&g, 3, &mut SplitMix64::new(1)),
            Err(ExperimentError::TooFewGoals { wanted: 3, eligible: 2 })
        ));
    }

    #[test]
    fn kitchen_sampling_edges() {
        let pool = default_kitchen_pool(&salad(L3));
        assert_eq!(pool.len(), 3);
        let all = select_kitchen(&pool, 3, &mut SplitMix64::new(9)).unwrap();
        assert_eq!(all.keys(L3), pool.iter().cloned().collect());
        assert!(select_kitchen(&pool, 0, &mut SplitMix64::new(9)).unwrap().is_empty());
        assert!(select_kitchen(&pool, 4, &mut SplitMix64::new(9)).is_err());
    }

    #[test]
    fn full_kitchen_salad_solves_both_goals() {
        let g = salad(L3);
        let pool = default_kitchen_pool(&g);
        let mut cfg = ExperimentConfig::new(L3, pool.clone());
        cfg.trials = 1;
        cfg.goals_per_trial = 2;
        cfg.kitchen_size = KitchenSize::Fraction(1.0);
        let nets = Networks { reg: g.clone(), exp: None, gen: None };
        let report = run_experiment(&cfg, &nets).unwrap();
        let kitchen: Kitchen = pool.iter().map(NodeKey::to_node).collect();
        // Two goals means every eligible output, whatever the seed.
        let oracle = select_goals(&g, 2, &mut SplitMix64::new(0))
            .unwrap()
            .iter()
            .filter(|k| is_solvable(&g, &k.to_node(), &kitchen))
            .count();
        assert_eq!(oracle, 2);
        assert_eq!(report.trials[0].network("REG").unwrap().successes, oracle);
        assert_eq!(oracle, 2);
    }

    #[test]
    fn reports_are_reproducible_without_timing() {
        let g = salad(L2);
        let mut cfg = ExperimentConfig::new(L2, default_kitchen_pool(&g));
        cfg.trials = 4;
        // At level 2 the bowl passes through `pour` unchanged, leaving one
        // produced object.
        cfg.goals_per_trial = 1;
        cfg.seed = 11;
        let nets = Networks { reg: g, exp: None, gen: None };
        let mut a = run_experiment(&cfg, &nets).unwrap();
        let mut b = run_experiment(&cfg, &nets).unwrap();
        a.zero_timings();
        b.zero_timings();
        assert_eq!(a.to_json_lines(), b.to_json_lines());
        assert_eq!(a.to_csv(), b.to_csv());
        for t in &a.trials {
            let n = &t.networks[0];
            assert_eq!(n.successes + n.timeouts + n.unsolvables, cfg.goals_per_trial);
        }
    }

    #[test]
    fn level_mismatch_is_rejected() {
        let cfg = ExperimentConfig::new(L2, vec![]);
        let nets = Networks { reg: salad(L3), exp: None, gen: None };
        assert!(matches!(run_experiment(&cfg, &nets), Err(ExperimentError::LevelMismatch { .. })));
    }

    #[test]
    fn kitchen_size_parses_from_toml() {
        let f: ExperimentFile = toml::from_str("synthetic = 1\nkitchen_size = 40\n").unwrap();
        assert_eq!(f.kitchen_size, KitchenSize::Count(40));
        let f: ExperimentFile = toml::from_str("synthetic = 1\nkitchen_size = 0.25\n").unwrap();
        assert_eq!(f.kitchen_size, KitchenSize::Fraction(0.25));
        assert!(toml::from_str::<ExperimentFile>("bogus = 1\n").is_err());
        assert_eq!(KitchenSize::Fraction(0.5).resolve(5).unwrap(), 3);
        assert!(KitchenSize::Fraction(1.5).resolve(5).is_err());
    }
}
