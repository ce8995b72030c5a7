//! Task-tree retrieval.
//!
//! The search chains backwards from the goal. Producers of an object are
//! tried depth-first, cheapest known subtree first; the inputs of one
//! candidate unit are swept breadth-first, resolving everything already
//! available before recursing into the rest.
//!
//! Success is memoized per object for the whole query. Objects on the
//! current path are in progress and any candidate needing one is skipped.
//! A failure that was caused by such a skip only holds while the skipped
//! ancestors stay on the path, so it is memoized with the path depths it
//! relied on and dropped when the deepest of those frames returns.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::time::{Duration, Instant};

use crate::graph::{FoonGraph, ObjectId, UnitId};
use crate::model::{FunctionalUnit, HierarchyLevel, Kitchen, NodeKey, ObjectNode};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    /// Candidate-unit visits allowed before giving up.
    pub max_expansions: u64,
    pub wall_clock_limit: Option<Duration>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget { max_expansions: 1_000_000, wall_clock_limit: None }
    }
}

impl SearchBudget {
    pub fn expansions(max_expansions: u64) -> Self {
        SearchBudget { max_expansions, wall_clock_limit: None }
    }

    pub fn unlimited() -> Self {
        SearchBudget { max_expansions: u64::MAX, wall_clock_limit: None }
    }
}

/// Units in execution order that produce `goal` from the kitchen. Units
/// are borrowed from the searched graph.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskTree<'g> {
    pub units: Vec<&'g FunctionalUnit>,
    pub goal: NodeKey,
    pub level: HierarchyLevel,
}

impl TaskTree<'_> {
    /// Objects the tree takes from the kitchen: inputs not produced by an
    /// earlier unit, or the goal itself when the tree is empty.
    pub fn kitchen_used(&self) -> BTreeSet<NodeKey> {
        if self.units.is_empty() {
            return BTreeSet::from([self.goal.clone()]);
        }
        let mut produced = HashSet::new();
        let mut used = BTreeSet::new();
        for u in &self.units {
            for n in u.inputs() {
                let k = n.key(self.level);
                if !produced.contains(&k) {
                    used.insert(k);
                }
            }
            produced.extend(u.outputs().iter().map(|n| n.key(self.level)));
        }
        used
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RetrievalOutcome<'g> {
    Solved { tree: TaskTree<'g>, elapsed_ms: f64 },
    Unsolvable,
    TimedOut { expansions: u64 },
}

impl RetrievalOutcome<'_> {
    pub fn is_solved(&self) -> bool {
        matches!(self, RetrievalOutcome::Solved { .. })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            RetrievalOutcome::Solved { .. } => "solved",
            RetrievalOutcome::Unsolvable => "unsolvable",
            RetrievalOutcome::TimedOut { .. } => "timeout",
        }
    }
}

/// An outcome together with search statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct Retrieval<'g> {
    pub outcome: RetrievalOutcome<'g>,
    pub expansions: u64,
    pub elapsed: Duration,
}

/// Retrieval settings shared across queries on one graph.
#[derive(Debug, Clone)]
pub struct Retriever<'g> {
    graph: &'g FoonGraph,
    budget: SearchBudget,
    motion_costs: Option<&'g HashMap<String, f64>>,
}

impl<'g> Retriever<'g> {
    pub fn new(graph: &'g FoonGraph) -> Self {
        Retriever { graph, budget: SearchBudget::default(), motion_costs: None }
    }

    pub fn budget(mut self, budget: SearchBudget) -> Self {
        self.budget = budget;
        self
    }

    /// Breaks ties between equally cheap candidates by motion cost (lower
    /// first). Motions missing from the table cost 0.
    pub fn motion_costs(mut self, costs: &'g HashMap<String, f64>) -> Self {
        self.motion_costs = Some(costs);
        self
    }

    /// Resolves a kitchen against this graph once, for reuse across
    /// queries.
    pub fn prepare(&self, kitchen: &Kitchen) -> PreparedKitchen {
        let keys = kitchen.keys(self.graph.level());
        let mut ids: Vec<ObjectId> = keys.iter().filter_map(|k| self.graph.object_id(k)).collect();
        ids.sort_unstable();
        PreparedKitchen { keys, ids, objects: self.graph.object_count() }
    }

    pub fn retrieve(&self, goal: &ObjectNode, kitchen: &Kitchen) -> Retrieval<'g> {
        let start = Instant::now();
        let prepared = self.prepare(kitchen);
        self.run(goal, &prepared, start)
    }

    /// Like [`retrieve`](Self::retrieve); the timing covers only the search.
    pub fn retrieve_prepared(&self, goal: &ObjectNode, kitchen: &PreparedKitchen) -> Retrieval<'g> {
        assert_eq!(kitchen.objects, self.graph.object_count(), "kitchen prepared for another graph");
        self.run(goal, kitchen, Instant::now())
    }

    fn run(&self, goal: &ObjectNode, kitchen: &PreparedKitchen, start: Instant) -> Retrieval<'g> {
        let g = self.graph;
        let goal_key = goal.key(g.level());
        let done = |outcome, expansions| Retrieval { outcome, expansions, elapsed: start.elapsed() };

        if kitchen.keys.contains(&goal_key) {
            let tree = TaskTree { units: Vec::new(), goal: goal_key, level: g.level() };
            return done(RetrievalOutcome::Solved { tree, elapsed_ms: ms(start.elapsed()) }, 0);
        }
        let Some(goal_id) = g.object_id(&goal_key) else {
            return done(RetrievalOutcome::Unsolvable, 0);
        };

        let mut search = Search::new(g, &kitchen.ids, self.budget, self.motion_costs, start);
        match search.solve(goal_id, 0) {
            Step::Solved => {
                let tree = search.extract(goal_id, goal_key);
                let exp = search.expansions;
                done(RetrievalOutcome::Solved { tree, elapsed_ms: ms(start.elapsed()) }, exp)
            }
            Step::Failed(_) => done(RetrievalOutcome::Unsolvable, search.expansions),
            Step::TimedOut => {
                let exp = search.expansions;
                done(RetrievalOutcome::TimedOut { expansions: exp }, exp)
            }
        }
    }
}

/// A kitchen resolved to the object ids of one graph.
#[derive(Debug, Clone)]
pub struct PreparedKitchen {
    keys: HashSet<NodeKey>,
    ids: Vec<ObjectId>,
    objects: usize,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

pub fn retrieve_task_tree<'g>(
    g: &'g FoonGraph,
    goal: &ObjectNode,
    k: &Kitchen,
    budget: SearchBudget,
) -> RetrievalOutcome<'g> {
    Retriever::new(g).budget(budget).retrieve(goal, k).outcome
}

#[derive(Debug, Clone, Copy)]
struct Resolved {
    /// `None` for kitchen items.
    unit: Option<UnitId>,
    cost: u64,
    order: u64,
}

#[derive(Debug, Clone)]
enum Failure {
    Permanent,
    /// Valid while the path frames at these depths are unchanged.
    OnPath(Vec<u32>),
}

enum Step {
    Solved,
    /// Path depths the failure relied on; empty means unconditional.
    Failed(Vec<u32>),
    TimedOut,
}

struct Search<'a> {
    g: &'a FoonGraph,
    resolved: Vec<Option<Resolved>>,
    failed: Vec<Option<Failure>>,
    on_path: Vec<Option<u32>>,
    conditional: Vec<Vec<ObjectId>>,
    budget: SearchBudget,
    motion_costs: Option<&'a HashMap<String, f64>>,
    start: Instant,
    expansions: u64,
    seq: u64,
}

fn union_into(acc: &mut Vec<u32>, deps: &[u32]) {
    for &d in deps {
        if let Err(pos) = acc.binary_search(&d) {
            acc.insert(pos, d);
        }
    }
}

impl<'a> Search<'a> {
    fn new(
        g: &'a FoonGraph,
        kitchen: &[ObjectId],
        budget: SearchBudget,
        motion_costs: Option<&'a HashMap<String, f64>>,
        start: Instant,
    ) -> Self {
        let n = g.object_count();
        let mut resolved = vec![None; n];
        for id in kitchen {
            resolved[id.index()] = Some(Resolved { unit: None, cost: 0, order: 0 });
        }
        Search {
            g,
            resolved,
            failed: vec![None; n],
            on_path: vec![None; n],
            conditional: Vec::new(),
            budget,
            motion_costs,
            start,
            expansions: 0,
            seq: 1,
        }
    }

    fn out_of_budget(&self) -> bool {
        if self.expansions >= self.budget.max_expansions {
            return true;
        }
        match self.budget.wall_clock_limit {
            Some(limit) if self.expansions.is_multiple_of(64) => self.start.elapsed() >= limit,
            _ => false,
        }
    }

    fn cost_estimate(&self, u: UnitId) -> u64 {
        1 + self
            .g
            .unit_inputs(u)
            .iter()
            .map(|i| self.resolved[i.index()].map_or(1, |r| r.cost))
            .fold(0u64, u64::saturating_add)
    }

    fn candidates(&self, x: ObjectId) -> Vec<UnitId> {
        let mut ranked: Vec<(u64, f64, UnitId)> = self
            .g
            .producers(x)
            .iter()
            .map(|&u| {
                let motion = self
                    .motion_costs
                    .and_then(|c| c.get(self.g.unit(u).motion().label()).copied())
                    .unwrap_or(0.0);
                (self.cost_estimate(u), motion, u)
            })
            .collect();
        ranked.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)).then(a.2.cmp(&b.2)));
        ranked.into_iter().map(|(_, _, u)| u).collect()
    }

    fn solve(&mut self, x: ObjectId, depth: u32) -> Step {
        if self.resolved[x.index()].is_some() {
            return Step::Solved;
        }
        match &self.failed[x.index()] {
            Some(Failure::Permanent) => return Step::Failed(Vec::new()),
            Some(Failure::OnPath(deps)) => return Step::Failed(deps.clone()),
            None => {}
        }

        self.on_path[x.index()] = Some(depth);
        if self.conditional.len() <= depth as usize {
            self.conditional.resize_with(depth as usize + 1, Vec::new);
        }
        let mut deps: Vec<u32> = Vec::new();

        'candidates: for u in self.candidates(x) {
            if self.out_of_budget() {
                return Step::TimedOut;
            }
            self.expansions += 1;

            let mut pending = Vec::new();
            for &i in self.g.unit_inputs(u) {
                let idx = i.index();
                if self.resolved[idx].is_some() {
                    continue;
                }
                if let Some(d) = self.on_path[idx] {
                    union_into(&mut deps, &[d]);
                    continue 'candidates;
                }
                match &self.failed[idx] {
                    Some(Failure::Permanent) => continue 'candidates,
                    Some(Failure::OnPath(d)) => {
                        let d = d.clone();
                        union_into(&mut deps, &d);
                        continue 'candidates;
                    }
                    None => pending.push(i),
                }
            }

            for i in pending {
                match self.solve(i, depth + 1) {
                    Step::Solved => {}
                    Step::Failed(d) => {
                        union_into(&mut deps, &d);
                        continue 'candidates;
                    }
                    Step::TimedOut => return Step::TimedOut,
                }
            }

            let cost = self.cost_estimate(u);
            self.resolved[x.index()] = Some(Resolved { unit: Some(u), cost, order: self.seq });
            self.seq += 1;
            self.leave(x, depth);
            return Step::Solved;
        }

        self.leave(x, depth);
        deps.retain(|&d| d < depth);
        match deps.last() {
            None => self.failed[x.index()] = Some(Failure::Permanent),
            Some(&deepest) => {
                self.failed[x.index()] = Some(Failure::OnPath(deps.clone()));
                self.conditional[deepest as usize].push(x);
            }
        }
        Step::Failed(deps)
    }

    /// Pops `x` off the path and forgets failures that assumed it was there.
    fn leave(&mut self, x: ObjectId, depth: u32) {
        self.on_path[x.index()] = None;
        for y in std::mem::take(&mut self.conditional[depth as usize]) {
            if matches!(&self.failed[y.index()], Some(Failure::OnPath(d)) if d.last() == Some(&depth)) {
                self.failed[y.index()] = None;
            }
        }
    }

    fn extract(&self, goal: ObjectId, goal_key: NodeKey) -> TaskTree<'a> {
        let mut first_order: HashMap<UnitId, u64> = HashMap::new();
        let mut seen = HashSet::new();
        let mut stack = vec![goal];
        while let Some(x) = stack.pop() {
            if !seen.insert(x) {
                continue;
            }
            let r = self.resolved[x.index()].expect("extracting a solved object");
            if let Some(u) = r.unit {
                let e = first_order.entry(u).or_insert(r.order);
                *e = (*e).min(r.order);
                stack.extend(self.g.unit_inputs(u).iter().copied());
            }
        }
        let mut ordered: Vec<(u64, UnitId)> = first_order.into_iter().map(|(u, o)| (o, u)).collect();
        ordered.sort_unstable();
        TaskTree {
            units: ordered.into_iter().map(|(_, u)| self.g.unit(u)).collect(),
            goal: goal_key,
            level: self.g.level(),
        }
    }
}

/// Whether `goal` is derivable from the kitchen, by forward chaining over
/// all units. Independent of the search above and budget-free.
pub fn is_solvable(g: &FoonGraph, goal: &ObjectNode, k: &Kitchen) -> bool {
    let level = g.level();
    let goal = goal.key(level);
    let kitchen = k.keys(level);
    if kitchen.contains(&goal) {
        return true;
    }
    let Some(target) = g.object_id(&goal) else {
        return false;
    };
    // Forward chaining: a unit fires once its last missing input arrives.
    let mut missing: Vec<usize> = (0..g.len()).map(|u| g.unit_inputs(u).len()).collect();
    let mut available = vec![false; g.object_count()];
    let mut queue: Vec<ObjectId> = kitchen.iter().filter_map(|key| g.object_id(key)).collect();
    queue.iter().for_each(|id| available[id.index()] = true);
    while let Some(x) = queue.pop() {
        for &u in g.object_index(x) {
            if !g.unit_inputs(u).contains(&x) {
                continue;
            }
            missing[u] -= 1;
            if missing[u] == 0 {
                for &o in g.unit_outputs(u) {
                    if !available[o.index()] {
                        available[o.index()] = true;
                        queue.push(o);
                    }
                }
            }
        }
    }
    available[target.index()]
}

/// Checks that `tree` can be executed in order from the kitchen and ends
/// with its goal available.
pub fn verify_tree(g: &FoonGraph, tree: &TaskTree<'_>, k: &Kitchen) -> bool {
    let level = g.level();
    let mut available = k.keys(level);
    let mut seen = HashSet::new();
    for &u in &tree.units {
        if !g.contains_unit(u) || !seen.insert(u.key(level)) {
            return false;
        }
        if !u.inputs().iter().all(|n| available.contains(&n.key(level))) {
            return false;
        }
        available.extend(u.outputs().iter().map(|n| n.key(level)));
    }
    available.contains(&tree.goal)
}
