//! Wu-Palmer similarity over a concept taxonomy and the neighbor index that
//! drives network expansion.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::exec::Exec;
use crate::parser::{SimilarityMatrix, Taxonomy};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimilarityError {
    #[error("label `{0}` is not in the taxonomy")]
    UnknownLabel(String),
    #[error("`{0}` and `{1}` have no common subsumer")]
    NoCommonSubsumer(String, String),
    #[error("threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),
}

/// Precomputed node depths for repeated Wu-Palmer queries.
///
/// Depth counts nodes on the longest path from a root, so roots have depth 1.
#[derive(Debug, Clone)]
pub struct WuPalmer<'t> {
    taxonomy: &'t Taxonomy,
    depth: HashMap<&'t str, usize>,
}

impl<'t> WuPalmer<'t> {
    pub fn new(taxonomy: &'t Taxonomy) -> Self {
        let mut depth = HashMap::with_capacity(taxonomy.nodes.len());
        for n in &taxonomy.nodes {
            longest_depth(taxonomy, n, &mut depth);
        }
        WuPalmer { taxonomy, depth }
    }

    pub fn depth(&self, label: &str) -> Option<usize> {
        self.depth.get(label).copied()
    }

    /// Minimum edge count from `label` up to each of its ancestors,
    /// including `label` itself at distance 0.
    pub fn ancestor_distances(&self, label: &str) -> HashMap<&'t str, usize> {
        let mut dist = HashMap::new();
        let Some(start) = self.taxonomy.nodes.get(label) else {
            return dist;
        };
        let mut queue = VecDeque::from([(start.as_str(), 0usize)]);
        dist.insert(start.as_str(), 0);
        while let Some((n, d)) = queue.pop_front() {
            for p in self.taxonomy.parents.get(n).into_iter().flatten() {
                if !dist.contains_key(p.as_str()) {
                    dist.insert(p.as_str(), d + 1);
                    queue.push_back((p.as_str(), d + 1));
                }
            }
        }
        dist
    }

    pub fn similarity(&self, a: &str, b: &str) -> Result<f64, SimilarityError> {
        for l in [a, b] {
            if !self.taxonomy.contains(l) {
                return Err(SimilarityError::UnknownLabel(l.to_string()));
            }
        }
        if a == b {
            return Ok(1.0);
        }
        let (da, db) = (self.ancestor_distances(a), self.ancestor_distances(b));
        self.score_from(&da, &db).ok_or_else(|| SimilarityError::NoCommonSubsumer(a.to_string(), b.to_string()))
    }

    /// Picks the deepest common subsumer. Among equally deep subsumers the
    /// one nearest to both nodes wins, which is the highest score.
    fn score_from(&self, da: &HashMap<&str, usize>, db: &HashMap<&str, usize>) -> Option<f64> {
        let (small, large) = if da.len() <= db.len() { (da, db) } else { (db, da) };
        let mut best: Option<(usize, usize)> = None;
        for (c, &d1) in small {
            let Some(&d2) = large.get(c) else { continue };
            let depth = self.depth[c];
            let cand = (depth, d1 + d2);
            best = match best {
                Some((bd, bs)) if bd > depth || (bd == depth && bs <= cand.1) => Some((bd, bs)),
                _ => Some(cand),
            };
        }
        best.map(|(depth, steps)| {
            let twice = 2.0 * depth as f64;
            twice / (twice + steps as f64)
        })
    }
}

fn longest_depth<'t>(t: &'t Taxonomy, node: &'t str, memo: &mut HashMap<&'t str, usize>) -> usize {
    if let Some(&d) = memo.get(node) {
        return d;
    }
    let d = 1 + t
        .parents
        .get(node)
        .into_iter()
        .flatten()
        .map(|p| longest_depth(t, p.as_str(), memo))
        .max()
        .unwrap_or(0);
    memo.insert(node, d);
    d
}

/// Wu-Palmer similarity of two taxonomy concepts.
pub fn wu_palmer(t: &Taxonomy, a: &str, b: &str) -> Result<f64, SimilarityError> {
    WuPalmer::new(t).similarity(a, b)
}

/// Where pairwise scores come from when building a [`SimilarityIndex`].
#[derive(Debug, Clone, Copy)]
pub enum SimilaritySource<'a> {
    Matrix(&'a SimilarityMatrix),
    /// Taxonomy-derived scores; pairs present in `overrides` take the
    /// override value instead.
    Taxonomy { taxonomy: &'a Taxonomy, overrides: Option<&'a SimilarityMatrix> },
}

/// For every object, the other objects whose similarity reaches the
/// threshold. Symmetric by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityIndex {
    threshold: f64,
    neighbors: BTreeMap<String, BTreeMap<String, f64>>,
}

impl SimilarityIndex {
    pub fn empty(threshold: f64) -> Self {
        SimilarityIndex { threshold, neighbors: BTreeMap::new() }
    }

    /// Index over every label mentioned in `m`.
    pub fn from_matrix(m: &SimilarityMatrix, threshold: f64) -> Result<Self, SimilarityError> {
        check_threshold(threshold)?;
        let mut idx = SimilarityIndex::empty(threshold);
        for (a, b, s) in m.iter() {
            if a != b && s >= threshold {
                idx.link(a, b, s);
            }
        }
        Ok(idx)
    }

    fn link(&mut self, a: &str, b: &str, s: f64) {
        self.neighbors.entry(a.to_string()).or_default().insert(b.to_string(), s);
        self.neighbors.entry(b.to_string()).or_default().insert(a.to_string(), s);
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// Neighbors of `label` sorted by label.
    pub fn neighbors(&self, label: &str) -> impl Iterator<Item = (&str, f64)> {
        self.neighbors.get(label).into_iter().flatten().map(|(l, s)| (l.as_str(), *s))
    }

    pub fn neighbor_count(&self, label: &str) -> usize {
        self.neighbors.get(label).map_or(0, BTreeMap::len)
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }

    /// Each linked pair once, as a similarity matrix.
    pub fn to_matrix(&self) -> SimilarityMatrix {
        let mut m = SimilarityMatrix::new();
        for (a, ns) in &self.neighbors {
            for (b, &s) in ns {
                if a < b {
                    m.insert(a, b, s).expect("index scores are valid");
                }
            }
        }
        m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IndexBuild {
    pub index: SimilarityIndex,
    /// Objects for which the source has no information at all.
    pub unresolved: Vec<String>,
}

fn check_threshold(threshold: f64) -> Result<(), SimilarityError> {
    if (0.0..=1.0).contains(&threshold) {
        Ok(())
    } else {
        Err(SimilarityError::InvalidThreshold(threshold))
    }
}

/// Links every pair of distinct `objects` whose score is at least
/// `threshold`. Objects the source knows nothing about get no neighbors and
/// are listed in [`IndexBuild::unresolved`].
pub fn build_similarity_index(
    source: SimilaritySource<'_>,
    objects: &BTreeSet<String>,
    threshold: f64,
    exec: Exec,
) -> Result<IndexBuild, SimilarityError> {
    check_threshold(threshold)?;
    let objects: Vec<&str> = objects.iter().map(String::as_str).collect();

    let (rows, unresolved): (Vec<Vec<(usize, f64)>>, Vec<String>) = match source {
        SimilaritySource::Matrix(m) => {
            let known = m.labels();
            let rows = exec.map_range(objects.len(), |i| {
                (i + 1..objects.len())
                    .filter_map(|j| m.get(objects[i], objects[j]).map(|s| (j, s)))
                    .filter(|&(_, s)| s >= threshold)
                    .collect()
            });
            let unresolved = objects.iter().filter(|o| !known.contains(**o)).map(|o| o.to_string()).collect();
            (rows, unresolved)
        }
        SimilaritySource::Taxonomy { taxonomy, overrides } => {
            let wp = WuPalmer::new(taxonomy);
            let ancestors: Vec<Option<HashMap<&str, usize>>> = exec.map(&objects, |o| {
                taxonomy.contains(o).then(|| wp.ancestor_distances(o))
            });
            let overridden = overrides.map(SimilarityMatrix::labels).unwrap_or_default();
            let rows = exec.map_range(objects.len(), |i| {
                (i + 1..objects.len())
                    .filter_map(|j| {
                        let manual = overrides.and_then(|m| m.get(objects[i], objects[j]));
                        let score = manual.or_else(|| match (&ancestors[i], &ancestors[j]) {
                            (Some(a), Some(b)) => wp.score_from(a, b),
                            _ => None,
                        })?;
                        Some((j, score))
                    })
                    .filter(|&(_, s)| s >= threshold)
                    .collect()
            });
            let unresolved = objects
                .iter()
                .zip(&ancestors)
                .filter(|(o, a)| a.is_none() && !overridden.contains(**o))
                .map(|(o, _)| o.to_string())
                .collect();
            (rows, unresolved)
        }
    };

    let mut index = SimilarityIndex::empty(threshold);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, s) in row {
            index.link(objects[i], objects[j], s);
        }
    }
    Ok(IndexBuild { index, unresolved })
}
