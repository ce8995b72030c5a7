//! Property bodies. `properties.rs` drives them through `proptest!` and the
//! acceptance runner drives them with its own case counts.

use std::collections::{BTreeSet, HashSet};

use foon::parser::{parse_subgraph, serialize_units, CategoryIndex, SimilarityMatrix, Taxonomy};
use foon::retrieval::{is_solvable, verify_tree, RetrievalOutcome, Retriever, SearchBudget};
use foon::similarity::{build_similarity_index, SimilarityIndex, SimilaritySource, WuPalmer};
use foon::transform::{
    abstract_to_level, categorize_query, expand, generalize, merge, ExpansionConfig, GeneralizeMode,
};
use foon::{unit_equals, Exec, FoonGraph, FunctionalUnit, HierarchyLevel, Kitchen, ObjectNode};
use proptest::prelude::*;

use super::{all_objects, brute_expansion_identities, brute_wu_palmer, identity_string, unit_identity, LEVELS};

type Check = Result<(), TestCaseError>;

pub fn roundtrip(units: &[FunctionalUnit]) -> Check {
    let text = serialize_units(units);
    let parsed = parse_subgraph(&text, "").map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
    prop_assert_eq!(&parsed.units, &units.to_vec());
    prop_assert_eq!(serialize_units(&parsed.units), text);
    Ok(())
}

/// Equivalence-relation laws of `unit_equals` plus agreement with the
/// hand-rendered identity.
pub fn unit_equality(a: &FunctionalUnit, b: &FunctionalUnit, c: &FunctionalUnit) -> Check {
    for level in LEVELS {
        let eq = |x: &FunctionalUnit, y: &FunctionalUnit| unit_equals(x, y, level);
        prop_assert!(eq(a, a));
        prop_assert_eq!(eq(a, b), eq(b, a));
        if eq(a, b) && eq(b, c) {
            prop_assert!(eq(a, c));
        }
        for (x, y) in [(a, b), (b, c), (a, c)] {
            prop_assert_eq!(eq(x, y), unit_identity(x, level) == unit_identity(y, level));
        }
    }
    // Coarser levels never separate what a finer level merges.
    for (x, y) in [(a, b), (b, c), (a, c)] {
        if unit_equals(x, y, HierarchyLevel::L3) {
            prop_assert!(unit_equals(x, y, HierarchyLevel::L2));
        }
        if unit_equals(x, y, HierarchyLevel::L2) {
            prop_assert!(unit_equals(x, y, HierarchyLevel::L1));
        }
    }
    Ok(())
}

/// Node keys collapse along L3 => L2 => L1 and match the hand rendering.
pub fn key_coarsening(a: &ObjectNode, b: &ObjectNode) -> Check {
    for level in LEVELS {
        prop_assert_eq!(a.key(level) == b.key(level), identity_string(a, level) == identity_string(b, level));
    }
    if a.key(HierarchyLevel::L3) == b.key(HierarchyLevel::L3) {
        prop_assert_eq!(a.key(HierarchyLevel::L2), b.key(HierarchyLevel::L2));
    }
    if a.key(HierarchyLevel::L2) == b.key(HierarchyLevel::L2) {
        prop_assert_eq!(a.key(HierarchyLevel::L1), b.key(HierarchyLevel::L1));
    }
    Ok(())
}

pub fn merge_laws(a: &[FunctionalUnit], b: &[FunctionalUnit], c: &[FunctionalUnit], level: HierarchyLevel) -> Check {
    let ga = merge([a], level);
    prop_assert_eq!(merge([a, a], level).units().to_vec(), ga.units().to_vec());
    prop_assert_eq!(merge([ga.units()], level).units().to_vec(), ga.units().to_vec());

    let left = merge([merge([a, b], level).units(), c], level);
    let right = merge([a, merge([b, c], level).units()], level);
    prop_assert_eq!(left.units().to_vec(), right.units().to_vec());

    // No two units of a merged graph are equal at its level.
    let keys: HashSet<_> = left.units().iter().map(|u| u.key(level)).collect();
    prop_assert_eq!(keys.len(), left.len());
    Ok(())
}

pub fn abstraction_monotone(units: &[FunctionalUnit]) -> Check {
    let g3 = FoonGraph::from_units(HierarchyLevel::L3, units.iter().cloned());
    let g2 = abstract_to_level(&g3, HierarchyLevel::L2).unwrap();
    let g1 = abstract_to_level(&g3, HierarchyLevel::L1).unwrap();
    let g21 = abstract_to_level(&g2, HierarchyLevel::L1).unwrap();
    prop_assert!(g1.len() <= g2.len() && g2.len() <= g3.len(), "{} {} {}", g1.len(), g2.len(), g3.len());
    prop_assert!(g1.object_count() <= g2.object_count() && g2.object_count() <= g3.object_count());
    prop_assert_eq!(g21.units().to_vec(), g1.units().to_vec());
    prop_assert!(abstract_to_level(&g1, HierarchyLevel::L2).is_err());
    Ok(())
}

/// Scores agree with path enumeration on every pair.
pub fn wu_palmer_oracle(t: &Taxonomy) -> Check {
    let wp = WuPalmer::new(t);
    for a in t.nodes() {
        for b in t.nodes() {
            let got = wp.similarity(a, b).ok();
            prop_assert_eq!(got, brute_wu_palmer(t, a, b), "{} {}", a, b);
        }
    }
    Ok(())
}

/// Symmetry, range and self-similarity on the given pairs.
pub fn wu_palmer_laws(t: &Taxonomy, pairs: &[(usize, usize)]) -> Check {
    let wp = WuPalmer::new(t);
    let nodes: Vec<&String> = t.nodes().iter().collect();
    for &(i, j) in pairs {
        let (a, b) = (nodes[i % nodes.len()], nodes[j % nodes.len()]);
        let ab = wp.similarity(a, b).unwrap();
        prop_assert_eq!(ab, wp.similarity(b, a).unwrap());
        prop_assert!(ab > 0.0 && ab <= 1.0, "{} {} {}", a, b, ab);
        prop_assert_eq!(wp.similarity(a, a).unwrap(), 1.0);
        prop_assert_eq!(ab == 1.0, a == b);
    }
    Ok(())
}

/// Raising the threshold only removes neighbors; the index stays symmetric
/// and every kept score reaches the threshold.
pub fn threshold_monotone(m: &SimilarityMatrix, t1: f64, t2: f64) -> Check {
    let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
    let a = SimilarityIndex::from_matrix(m, lo).unwrap();
    let b = SimilarityIndex::from_matrix(m, hi).unwrap();
    for label in m.labels() {
        let wide: BTreeSet<&str> = a.neighbors(&label).map(|(n, _)| n).collect();
        let narrow: BTreeSet<&str> = b.neighbors(&label).map(|(n, _)| n).collect();
        prop_assert!(narrow.is_subset(&wide));
        for (idx, t) in [(&a, lo), (&b, hi)] {
            for (n, s) in idx.neighbors(&label) {
                prop_assert!(s >= t);
                prop_assert!(idx.neighbors(n).any(|(back, s2)| back == label && s2 == s));
            }
        }
    }
    Ok(())
}

/// A taxonomy-built index equals the index of the matrix of its scores.
pub fn taxonomy_index_matches_matrix(t: &Taxonomy, threshold: f64) -> Check {
    let objects: BTreeSet<String> = t.nodes().clone();
    let built = build_similarity_index(
        SimilaritySource::Taxonomy { taxonomy: t, overrides: None },
        &objects,
        threshold,
        Exec::Parallel,
    )
    .unwrap();
    prop_assert!(built.unresolved.is_empty());
    let mut m = SimilarityMatrix::new();
    let labels: Vec<&String> = objects.iter().collect();
    for (i, a) in labels.iter().enumerate() {
        for b in &labels[i + 1..] {
            m.insert(a, b, brute_wu_palmer(t, a, b).unwrap()).unwrap();
        }
    }
    prop_assert_eq!(built.index, SimilarityIndex::from_matrix(&m, threshold).unwrap());
    Ok(())
}

pub fn expansion_oracle(units: &[FunctionalUnit], m: &SimilarityMatrix, threshold: f64) -> Check {
    let g = FoonGraph::from_units(HierarchyLevel::L2, units.iter().cloned());
    let idx = SimilarityIndex::from_matrix(m, threshold).unwrap();
    let cfg = ExpansionConfig { threshold, max_units: None };
    let e = expand(&g, &idx, &cfg, Exec::Parallel).unwrap();
    prop_assert_eq!(e.units()[..g.len()].to_vec(), g.units().to_vec());
    for u in g.units() {
        prop_assert!(e.contains_unit(u));
    }
    let expected = brute_expansion_identities(&g, &idx);
    let got: BTreeSet<_> = e.units().iter().map(|u| unit_identity(u, g.level())).collect();
    prop_assert_eq!(e.len(), expected.len());
    prop_assert_eq!(got, expected);
    prop_assert_eq!(expand(&g, &idx, &cfg, Exec::Sequential).unwrap().units().to_vec(), e.units().to_vec());
    Ok(())
}

/// Retrieval against the fixpoint oracle for every object of `g` as goal.
/// Returns the number of solved queries.
pub fn retrieval_oracle(g: &FoonGraph, kitchens: &[Kitchen]) -> Result<usize, TestCaseError> {
    let goals = all_objects(g);
    let mut solved = 0;
    for k in kitchens {
        for goal in &goals {
            let oracle = is_solvable(g, goal, k);
            match Retriever::new(g).budget(SearchBudget::unlimited()).retrieve(goal, k).outcome {
                RetrievalOutcome::Solved { tree, .. } => {
                    prop_assert!(oracle, "solved but oracle says no: {}", goal);
                    prop_assert!(verify_tree(g, &tree, k), "tree for {} does not verify", goal);
                    solved += 1;
                }
                RetrievalOutcome::Unsolvable => prop_assert!(!oracle, "oracle solves {}", goal),
                RetrievalOutcome::TimedOut { .. } => prop_assert!(false, "unlimited budget timed out"),
            }
        }
    }
    Ok(solved)
}

/// Every budget up to `max_budget` terminates, and a timeout happens only
/// when the budget is spent.
pub fn budgets_terminate(g: &FoonGraph, k: &Kitchen, max_budget: u64) -> Check {
    for goal in all_objects(g) {
        let full = Retriever::new(g).budget(SearchBudget::unlimited()).retrieve(&goal, k);
        for b in 1..=max_budget {
            let r = Retriever::new(g).budget(SearchBudget::expansions(b)).retrieve(&goal, k);
            match r.outcome {
                RetrievalOutcome::TimedOut { expansions } => prop_assert_eq!(expansions, b),
                RetrievalOutcome::Solved { .. } => prop_assert!(full.outcome.is_solved()),
                RetrievalOutcome::Unsolvable => prop_assert!(!full.outcome.is_solved()),
            }
            prop_assert!(r.expansions <= b);
        }
    }
    Ok(())
}

/// Adding kitchen items never loses a solved goal.
pub fn kitchen_monotone(g: &FoonGraph, small: &Kitchen, extra: &Kitchen) -> Check {
    let big: Kitchen = small.items().iter().chain(extra.items()).cloned().collect();
    for goal in all_objects(g) {
        let retrieve = |k: &Kitchen| Retriever::new(g).budget(SearchBudget::unlimited()).retrieve(&goal, k);
        if retrieve(small).outcome.is_solved() {
            prop_assert!(retrieve(&big).outcome.is_solved());
        }
    }
    Ok(())
}

/// Everything REG solves, EXP solves, by oracle and by search.
pub fn exp_dominates(g: &FoonGraph, m: &SimilarityMatrix, threshold: f64, kitchens: &[Kitchen]) -> Check {
    let idx = SimilarityIndex::from_matrix(m, threshold).unwrap();
    let e = expand(g, &idx, &ExpansionConfig { threshold, max_units: None }, Exec::Parallel).unwrap();
    let reg_search = Retriever::new(g).budget(SearchBudget::unlimited());
    let exp_search = Retriever::new(&e).budget(SearchBudget::unlimited());
    for k in kitchens {
        let (rk, ek) = (reg_search.prepare(k), exp_search.prepare(k));
        for goal in all_objects(g) {
            if is_solvable(g, &goal, k) {
                prop_assert!(is_solvable(&e, &goal, k));
            }
            if reg_search.retrieve_prepared(&goal, &rk).outcome.is_solved() {
                prop_assert!(exp_search.retrieve_prepared(&goal, &ek).outcome.is_solved());
            }
        }
    }
    Ok(())
}

/// REG-solvable queries stay solvable once goal, kitchen and network are
/// generalized with first categories; the network never grows.
pub fn gen_lifting(g: &FoonGraph, cats: &CategoryIndex, kitchens: &[Kitchen]) -> Check {
    let mode = GeneralizeMode::FirstCategory;
    let gen = generalize(g, cats, mode, Exec::Parallel);
    prop_assert!(gen.len() <= g.len());
    prop_assert_eq!(generalize(g, cats, mode, Exec::Sequential).units().to_vec(), gen.units().to_vec());
    let gen_search = Retriever::new(&gen).budget(SearchBudget::unlimited());
    for k in kitchens {
        let mut prepared = None;
        for goal in all_objects(g) {
            if is_solvable(g, &goal, k) {
                let (gk, ggoal) = categorize_query(k, &goal, cats, mode);
                prop_assert!(is_solvable(&gen, &ggoal, &gk), "{} lost after generalization", goal);
                let pk = prepared.get_or_insert_with(|| gen_search.prepare(&gk));
                prop_assert!(gen_search.retrieve_prepared(&ggoal, pk).outcome.is_solved());
            }
        }
    }
    Ok(())
}
