//! Shared fixtures, generators and brute-force oracles for the integration
//! suites.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};

use foon::parser::{CategoryIndex, SimilarityMatrix, Taxonomy};
use foon::similarity::SimilarityIndex;
use foon::{FoonGraph, FunctionalUnit, HierarchyLevel, Kitchen, MotionNode, ObjectNode, TimeSpan};
use proptest::prelude::*;
use proptest::sample::subsequence;

pub mod checks;

pub const LEVELS: [HierarchyLevel; 3] = [HierarchyLevel::L1, HierarchyLevel::L2, HierarchyLevel::L3];

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn read_fixture(rel: &str) -> String {
    std::fs::read_to_string(fixture(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"))
}

/// Files in a fixture directory with the given extension, sorted by name.
pub fn fixture_files(dir: &str, ext: &str) -> Vec<PathBuf> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(fixture(dir))
        .unwrap_or_else(|e| panic!("{dir}: {e}"))
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == ext))
        .collect();
    files.sort();
    files
}

pub fn node(label: &str, states: &[&str], ingredients: &[&str]) -> ObjectNode {
    ObjectNode::new(label, states, ingredients, false).unwrap()
}

pub fn unit(inputs: Vec<ObjectNode>, motion: &str, outputs: Vec<ObjectNode>) -> FunctionalUnit {
    FunctionalUnit::new(inputs, MotionNode::new(motion).unwrap(), outputs).unwrap()
}

// ---------------------------------------------------------------------------
// Generators
// ---------------------------------------------------------------------------

const LABELS: [&str; 8] = ["apple", "bowl", "knife", "lettuce", "onion", "pan", "tomato", "water"];
const STATES: [&str; 5] = ["chopped", "hot", "mixed", "raw", "whole"];
const MOTIONS: [&str; 4] = ["cut", "heat", "mix", "pour"];

/// Nodes drawn from a small vocabulary so that collisions are common.
pub fn arb_node() -> impl Strategy<Value = ObjectNode> {
    (
        prop::sample::select(&LABELS[..]),
        subsequence(&STATES[..], 0..=2),
        subsequence(&LABELS[..], 0..=2),
        any::<bool>(),
    )
        .prop_filter_map("node contains itself", |(l, s, i, m)| ObjectNode::new(l, s, i, m).ok())
}

fn arb_side(max: usize) -> impl Strategy<Value = Vec<ObjectNode>> {
    prop::collection::vec(arb_node(), 1..=max).prop_map(|nodes| {
        let mut seen = HashSet::new();
        nodes.into_iter().filter(|n| seen.insert(n.clone())).collect()
    })
}

fn arb_span() -> impl Strategy<Value = Option<TimeSpan>> {
    prop::option::of((0u32..4000, 0u32..4000)).prop_map(|o| {
        o.map(|(a, b)| TimeSpan::new(a.min(b) as f64 / 8.0, a.max(b) as f64 / 8.0).unwrap())
    })
}

pub fn arb_unit() -> impl Strategy<Value = FunctionalUnit> {
    (arb_side(3), prop::sample::select(&MOTIONS[..]), arb_side(3), arb_span()).prop_map(|(i, m, o, span)| {
        FunctionalUnit::new(i, MotionNode::new(m).unwrap(), o).unwrap().with_time_span(span)
    })
}

pub fn arb_units(max: usize) -> impl Strategy<Value = Vec<FunctionalUnit>> {
    prop::collection::vec(arb_unit(), 0..=max)
}

pub fn arb_level() -> impl Strategy<Value = HierarchyLevel> {
    prop::sample::select(&LEVELS[..])
}

/// Units over labels `o0..o{labels}` with states `s0`/`s1`, which keeps the
/// number of distinct objects small enough for chains and loops to form.
pub fn arb_chain_units(max_units: usize, labels: usize) -> impl Strategy<Value = Vec<FunctionalUnit>> {
    let obj = (0..labels, 0..2usize).prop_map(|(l, s)| node(&format!("o{l}"), &[&format!("s{s}")], &[]));
    let side = move |max| {
        prop::collection::vec(obj.clone(), 1..=max).prop_map(|nodes| {
            let mut seen = HashSet::new();
            nodes.into_iter().filter(|n| seen.insert(n.clone())).collect::<Vec<_>>()
        })
    };
    let u = (side(3), prop::sample::select(&MOTIONS[..]), side(2)).prop_map(|(i, m, o)| unit(i, m, o));
    prop::collection::vec(u, 1..=max_units)
}

/// Every object identity appearing in `g`, as nodes.
pub fn all_objects(g: &FoonGraph) -> Vec<ObjectNode> {
    g.object_ids().map(|id| g.object_key(id).to_node()).collect()
}

/// Kitchens as subsets of `objects`, one flag per object.
pub fn kitchen_from_mask(objects: &[ObjectNode], mask: u64) -> Kitchen {
    objects.iter().enumerate().filter(|(i, _)| mask >> (i % 64) & 1 == 1).map(|(_, n)| n.clone()).collect()
}

/// A similarity matrix over `o0..o{labels}` with at most `max_neighbors`
/// partners per label. Scores are multiples of 0.05.
pub fn arb_similarity(labels: usize, max_neighbors: usize) -> impl Strategy<Value = SimilarityMatrix> {
    prop::collection::vec((0..labels, 0..labels, 10u32..=20), 0..=labels * max_neighbors / 2 + 1).prop_map(
        move |pairs| {
            let mut m = SimilarityMatrix::new();
            let mut degree = vec![0usize; labels];
            for (a, b, s) in pairs {
                let (la, lb) = (format!("o{a}"), format!("o{b}"));
                if a == b || m.get(&la, &lb).is_some() || degree[a] == max_neighbors || degree[b] == max_neighbors {
                    continue;
                }
                m.insert(&la, &lb, s as f64 * 0.05).unwrap();
                degree[a] += 1;
                degree[b] += 1;
            }
            m
        },
    )
}

/// Category assignments for `o0..o{labels}`: each label gets up to two of
/// the categories `c0..c3`, or none.
pub fn arb_categories(labels: usize) -> impl Strategy<Value = CategoryIndex> {
    prop::collection::vec(subsequence(vec!["c0", "c1", "c2", "c3"], 0..=2).prop_shuffle(), labels).prop_map(
        |per_label| {
            let assignments: Vec<(String, Vec<String>)> = per_label
                .into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_empty())
                .map(|(i, c)| (format!("o{i}"), c.into_iter().map(str::to_string).collect()))
                .collect();
            CategoryIndex::new(["c0", "c1", "c2", "c3"], assignments).unwrap()
        },
    )
}

/// A rooted DAG on `t0..t{n}`: node `i > 0` has one or two parents among
/// the earlier nodes, so `t0` is the only root.
pub fn arb_taxonomy(max_nodes: usize) -> impl Strategy<Value = Taxonomy> {
    (2..=max_nodes)
        .prop_flat_map(|n| prop::collection::vec((any::<u32>(), any::<u32>(), any::<bool>()), n - 1))
        .prop_map(|choices| taxonomy_from_choices(&choices))
}

pub fn taxonomy_from_choices(choices: &[(u32, u32, bool)]) -> Taxonomy {
    let mut edges = Vec::new();
    for (k, &(a, b, two)) in choices.iter().enumerate() {
        let i = k + 1;
        let p = a as usize % i;
        edges.push((format!("t{i}"), format!("t{p}")));
        let q = b as usize % i;
        if two && q != p {
            edges.push((format!("t{i}"), format!("t{q}")));
        }
    }
    Taxonomy::from_edges(edges).unwrap()
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

/// Node identity rendered by hand from the level rules.
pub fn identity_string(n: &ObjectNode, level: HierarchyLevel) -> String {
    match level {
        HierarchyLevel::L1 => n.label().to_string(),
        HierarchyLevel::L2 => {
            let states: Vec<&str> = n.states().iter().map(String::as_str).collect();
            format!("{}|{}|{}", n.label(), states.join(","), n.is_moving())
        }
        HierarchyLevel::L3 => {
            let states: Vec<&str> = n.states().iter().map(String::as_str).collect();
            let ingredients: Vec<&str> = n.ingredients().iter().map(String::as_str).collect();
            format!("{}|{}|{}|{}", n.label(), states.join(","), n.is_moving(), ingredients.join(","))
        }
    }
}

/// Unit identity as motion plus sorted identity strings on each side.
pub fn unit_identity(u: &FunctionalUnit, level: HierarchyLevel) -> (String, Vec<String>, Vec<String>) {
    let side = |nodes: &[ObjectNode]| {
        let mut v: Vec<String> = nodes.iter().map(|n| identity_string(n, level)).collect();
        v.sort();
        v
    };
    (u.motion().label().to_string(), side(u.inputs()), side(u.outputs()))
}

/// Wu-Palmer by exhaustive path enumeration.
///
/// Every upward path from `a` and from `b` is listed. A common ancestor's
/// depth is the length in nodes of the longest path from it to a root; the
/// deepest common ancestor wins and, among equally deep ones, the pair of
/// shortest paths to it gives the step count.
pub fn brute_wu_palmer(t: &Taxonomy, a: &str, b: &str) -> Option<f64> {
    if !t.contains(a) || !t.contains(b) {
        return None;
    }
    if a == b {
        return Some(1.0);
    }
    let up_a = shortest_up(t, a);
    let up_b = shortest_up(t, b);
    let mut best: Option<(usize, usize)> = None;
    for (c, &da) in &up_a {
        let Some(&db) = up_b.get(c) else { continue };
        let depth = longest_to_root(t, c);
        let cand = (depth, da + db);
        best = match best {
            Some(prev) if prev.0 > cand.0 || (prev.0 == cand.0 && prev.1 <= cand.1) => Some(prev),
            _ => Some(cand),
        };
    }
    best.map(|(d, s)| 2.0 * d as f64 / (2.0 * d as f64 + s as f64))
}

fn all_up_paths(t: &Taxonomy, from: &str) -> Vec<Vec<String>> {
    let parents: Vec<&str> = t.parents(from).collect();
    if parents.is_empty() {
        return vec![vec![from.to_string()]];
    }
    let mut out = Vec::new();
    for p in parents {
        for mut path in all_up_paths(t, p) {
            path.insert(0, from.to_string());
            out.push(path);
        }
    }
    out
}

/// Shortest edge count from `from` to every node on any upward path.
fn shortest_up(t: &Taxonomy, from: &str) -> BTreeMap<String, usize> {
    let mut out: BTreeMap<String, usize> = BTreeMap::new();
    for path in all_up_paths(t, from) {
        for (d, n) in path.into_iter().enumerate() {
            let e = out.entry(n).or_insert(d);
            *e = (*e).min(d);
        }
    }
    out
}

fn longest_to_root(t: &Taxonomy, from: &str) -> usize {
    all_up_paths(t, from).iter().map(Vec::len).max().unwrap_or(1)
}

/// Expansion by enumerating every substitution tuple of every unit
/// directly: each distinct node label ranges over itself and its neighbors,
/// the tuple is applied to node and ingredient labels, and tuples that
/// yield an invalid unit are dropped. Returns the distinct identities of
/// the original and substituted units.
pub fn brute_expansion_identities(
    g: &FoonGraph,
    idx: &SimilarityIndex,
) -> BTreeSet<(String, Vec<String>, Vec<String>)> {
    let level = g.level();
    let mut out = BTreeSet::new();
    for u in g.units() {
        out.insert(unit_identity(u, level));
        let mut labels: Vec<String> = Vec::new();
        for n in u.inputs().iter().chain(u.outputs()) {
            if !labels.iter().any(|l| l == n.label()) {
                labels.push(n.label().to_string());
            }
        }
        let choices: Vec<Vec<String>> = labels
            .iter()
            .map(|l| std::iter::once(l.clone()).chain(idx.neighbors(l).map(|(n, _)| n.to_string())).collect())
            .collect();
        let mut tuples: Vec<Vec<String>> = vec![Vec::new()];
        for c in &choices {
            tuples = tuples
                .into_iter()
                .flat_map(|t| {
                    c.iter().map(move |x| {
                        let mut t = t.clone();
                        t.push(x.clone());
                        t
                    })
                })
                .collect();
        }
        for t in tuples {
            let map: BTreeMap<&str, &str> = labels.iter().map(String::as_str).zip(t.iter().map(String::as_str)).collect();
            let sub = |l: &str| map.get(l).copied().unwrap_or(l).to_string();
            let side = |nodes: &[ObjectNode]| -> Option<Vec<ObjectNode>> {
                nodes
                    .iter()
                    .map(|n| {
                        let ingredients: Vec<String> = n.ingredients().iter().map(|i| sub(i)).collect();
                        ObjectNode::new(&sub(n.label()), n.states(), ingredients, n.is_moving()).ok()
                    })
                    .collect()
            };
            let (Some(i), Some(o)) = (side(u.inputs()), side(u.outputs())) else { continue };
            if let Ok(v) = FunctionalUnit::new(i, u.motion().clone(), o) {
                out.insert(unit_identity(&v, level));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Fixture suites shared by the focused tests and the acceptance run
// ---------------------------------------------------------------------------

/// Parses every golden file and compares its serialization with the
/// `.canonical` file next to it, byte for byte. Also checks that the
/// canonical text is a fixed point and parses to the same units. Returns
/// the number of files checked.
pub fn check_golden_files() -> Result<usize, String> {
    use foon::parser::{parse_subgraph, serialize_subgraph};
    let files = fixture_files("golden", "foon");
    for path in &files {
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| format!("{name}: {e}"))?;
        let expected = std::fs::read_to_string(path.with_extension("canonical")).map_err(|e| format!("{name}: {e}"))?;
        let parsed = parse_subgraph(&text, &name).map_err(|e| format!("{name}: {e}"))?;
        let out = serialize_subgraph(&parsed);
        if out != expected {
            return Err(format!("{name}: serialization differs\n--- got\n{out}--- expected\n{expected}"));
        }
        let reparsed = parse_subgraph(&out, &name).map_err(|e| format!("{name} (canonical): {e}"))?;
        if reparsed != parsed {
            return Err(format!("{name}: canonical text parses to different units"));
        }
        if serialize_subgraph(&reparsed) != out {
            return Err(format!("{name}: canonical form is not a fixed point"));
        }
    }
    Ok(files.len())
}

/// Every malformed subgraph file must fail with exactly the message in its
/// `.err` file.
pub fn check_error_files() -> Result<usize, String> {
    use foon::parser::parse_subgraph;
    let files = fixture_files("errors", "foon");
    for path in &files {
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        let text = std::fs::read_to_string(path).map_err(|e| format!("{name}: {e}"))?;
        let expected = std::fs::read_to_string(path.with_extension("err")).map_err(|e| format!("{name}: {e}"))?;
        match parse_subgraph(&text, &name) {
            Ok(_) => return Err(format!("{name}: parsed without error")),
            Err(e) if e.to_string() == expected.trim_end() => {}
            Err(e) => return Err(format!("{name}: got `{e}`, expected `{}`", expected.trim_end())),
        }
    }
    Ok(files.len())
}

/// Same as [`check_error_files`] for the table formats, dispatched on the
/// file extension.
pub fn check_table_error_files() -> Result<usize, String> {
    use foon::parser::{parse_category_index, parse_similarity_matrix, parse_taxonomy};
    let mut checked = 0;
    for ext in ["sim", "tax", "cat"] {
        for path in fixture_files("tables", ext) {
            let name = path.file_name().unwrap().to_string_lossy().to_string();
            let text = std::fs::read_to_string(&path).map_err(|e| format!("{name}: {e}"))?;
            let expected = std::fs::read_to_string(fixture(&format!("tables/{name}.err")))
                .map_err(|e| format!("{name}: {e}"))?;
            let got = match ext {
                "sim" => parse_similarity_matrix(&text).err(),
                "tax" => parse_taxonomy(&text).err(),
                _ => parse_category_index(&text).err(),
            };
            match got {
                None => return Err(format!("{name}: parsed without error")),
                Some(e) if e.to_string() == expected.trim_end() => {}
                Some(e) => return Err(format!("{name}: got `{e}`, expected `{}`", expected.trim_end())),
            }
            checked += 1;
        }
    }
    Ok(checked)
}
