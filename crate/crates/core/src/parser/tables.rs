use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use super::{content_lines, ParseError, ParseErrorKind};
use crate::model::{normalize_label, Kitchen, ModelError, ObjectNode};

fn label(raw: &str, line: usize) -> Result<String, ParseError> {
    let l = normalize_label(raw);
    if l.is_empty() {
        return Err(ParseError::new(line, ModelError::EmptyLabel.into()));
    }
    if l.contains(',') {
        return Err(ParseError::new(line, ModelError::Comma(l).into()));
    }
    Ok(l)
}

fn field_count(tag: &str, fields: &[&str], expected: &'static str, ok: bool, line: usize) -> Result<(), ParseError> {
    if ok {
        Ok(())
    } else {
        Err(ParseError::new(line, ParseErrorKind::FieldCount { tag: tag.to_string(), expected, found: fields.len() }))
    }
}

/// Symmetric pairwise similarity scores in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimilarityMatrix {
    entries: BTreeMap<(String, String), f64>,
}

fn ordered(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}

impl SimilarityMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a score for the unordered pair. Re-inserting the same score is
    /// a no-op; a different score is an error.
    pub fn insert(&mut self, a: &str, b: &str, score: f64) -> Result<(), ParseErrorKind> {
        if !(0.0..=1.0).contains(&score) {
            return Err(ParseErrorKind::ScoreOutOfRange(score));
        }
        if a == b && score != 1.0 {
            return Err(ParseErrorKind::SelfScore(a.to_string()));
        }
        let key = ordered(a, b);
        match self.entries.get(&key) {
            Some(&prev) if prev != score => {
                Err(ParseErrorKind::ConflictingScore { a: key.0, b: key.1, first: prev, second: score })
            }
            _ => {
                self.entries.insert(key, score);
                Ok(())
            }
        }
    }

    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        self.entries.get(&ordered(a, b)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries as `(a, b, score)` with `a <= b`, sorted.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &str, f64)> {
        self.entries.iter().map(|((a, b), s)| (a.as_str(), b.as_str(), *s))
    }

    pub fn labels(&self) -> BTreeSet<String> {
        self.entries.keys().flat_map(|(a, b)| [a.clone(), b.clone()]).collect()
    }
}

pub fn parse_similarity_matrix(text: &str) -> Result<SimilarityMatrix, ParseError> {
    let mut m = SimilarityMatrix::new();
    for (line, raw) in content_lines(text) {
        let fields: Vec<&str> = raw.split('\t').collect();
        field_count("similarity", &fields, "3", fields.len() == 3, line)?;
        let a = label(fields[0], line)?;
        let b = label(fields[1], line)?;
        let score: f64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| ParseError::new(line, ParseErrorKind::MalformedScore(fields[2].to_string())))?;
        m.insert(&a, &b, score).map_err(|k| ParseError::new(line, k))?;
    }
    Ok(m)
}

pub fn serialize_similarity_matrix(m: &SimilarityMatrix) -> String {
    let mut out = String::new();
    for (a, b, s) in m.iter() {
        let _ = writeln!(out, "{a}\t{b}\t{s}");
    }
    out
}

/// A concept hierarchy with possibly several parents per node.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Taxonomy {
    pub(crate) nodes: BTreeSet<String>,
    pub(crate) parents: BTreeMap<String, BTreeSet<String>>,
}

impl Taxonomy {
    /// Builds a taxonomy from `(child, parent)` edges, rejecting cycles.
    ///
    /// On a cycle, the error names the cycle and the index of the earliest
    /// edge taking part in it.
    pub fn from_edges<I, S>(edges: I) -> Result<Self, (usize, ParseErrorKind)>
    where
        I: IntoIterator<Item = (S, S)>,
        S: AsRef<str>,
    {
        let mut t = Taxonomy::default();
        let mut edge_index: HashMap<(String, String), usize> = HashMap::new();
        for (i, (child, parent)) in edges.into_iter().enumerate() {
            let (child, parent) = (child.as_ref().to_string(), parent.as_ref().to_string());
            t.nodes.insert(child.clone());
            t.nodes.insert(parent.clone());
            t.parents.entry(child.clone()).or_default().insert(parent.clone());
            edge_index.entry((child, parent)).or_insert(i);
        }
        if let Some(cycle) = t.find_cycle() {
            let first = cycle
                .windows(2)
                .filter_map(|w| edge_index.get(&(w[0].clone(), w[1].clone())))
                .min()
                .copied()
                .unwrap_or(0);
            return Err((first, ParseErrorKind::TaxonomyCycle(cycle)));
        }
        Ok(t)
    }

    /// Returns one cycle as a closed path `a -> b -> ... -> a`.
    fn find_cycle(&self) -> Option<Vec<String>> {
        #[derive(Clone, Copy, PartialEq)]
        enum Mark {
            Active,
            Done,
        }
        let mut marks: HashMap<&str, Mark> = HashMap::new();
        let empty = BTreeSet::new();
        for start in &self.nodes {
            if marks.contains_key(start.as_str()) {
                continue;
            }
            // Iterative DFS along parent edges; `path` mirrors the stack.
            let mut stack: Vec<(&str, std::collections::btree_set::Iter<'_, String>)> =
                vec![(start.as_str(), self.parents.get(start).unwrap_or(&empty).iter())];
            marks.insert(start, Mark::Active);
            while let Some((node, iter)) = stack.last_mut() {
                let node = *node;
                match iter.next() {
                    Some(p) => match marks.get(p.as_str()) {
                        Some(Mark::Active) => {
                            let pos = stack.iter().position(|(n, _)| *n == p.as_str()).unwrap_or(0);
                            let mut cycle: Vec<String> = stack[pos..].iter().map(|(n, _)| n.to_string()).collect();
                            cycle.push(p.clone());
                            return Some(cycle);
                        }
                        Some(Mark::Done) => {}
                        None => {
                            marks.insert(p, Mark::Active);
                            stack.push((p.as_str(), self.parents.get(p).unwrap_or(&empty).iter()));
                        }
                    },
                    None => {
                        marks.insert(node, Mark::Done);
                        stack.pop();
                    }
                }
            }
        }
        None
    }

    pub fn contains(&self, label: &str) -> bool {
        self.nodes.contains(label)
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn parents(&self, label: &str) -> impl Iterator<Item = &str> {
        self.parents.get(label).into_iter().flatten().map(String::as_str)
    }

    pub fn roots(&self) -> BTreeSet<&str> {
        self.nodes
            .iter()
            .filter(|n| self.parents.get(*n).is_none_or(|p| p.is_empty()))
            .map(String::as_str)
            .collect()
    }
}

pub fn parse_taxonomy(text: &str) -> Result<Taxonomy, ParseError> {
    let mut edges = Vec::new();
    let mut lines = Vec::new();
    for (line, raw) in content_lines(text) {
        let fields: Vec<&str> = raw.split('\t').collect();
        field_count("taxonomy", &fields, "2", fields.len() == 2, line)?;
        edges.push((label(fields[0], line)?, label(fields[1], line)?));
        lines.push(line);
    }
    Taxonomy::from_edges(edges).map_err(|(i, kind)| ParseError::new(lines[i], kind))
}

/// Object label to category labels, most specific category first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CategoryIndex {
    categories: BTreeSet<String>,
    assignments: BTreeMap<String, Vec<String>>,
}

impl CategoryIndex {
    pub fn new<C, A, L>(categories: C, assignments: A) -> Result<Self, ParseErrorKind>
    where
        C: IntoIterator,
        C::Item: AsRef<str>,
        A: IntoIterator<Item = (String, L)>,
        L: IntoIterator,
        L::Item: AsRef<str>,
    {
        let mut idx = CategoryIndex::default();
        for c in categories {
            let c = normalize_label(c.as_ref());
            if c.is_empty() {
                return Err(ModelError::EmptyLabel.into());
            }
            if !idx.categories.insert(c.clone()) {
                return Err(ParseErrorKind::DuplicateCategory(c));
            }
        }
        for (object, cats) in assignments {
            let cats: Vec<String> = cats.into_iter().map(|c| normalize_label(c.as_ref())).collect();
            idx.assign(normalize_label(&object), cats)?;
        }
        Ok(idx)
    }

    fn assign(&mut self, object: String, cats: Vec<String>) -> Result<(), ParseErrorKind> {
        let mut seen = BTreeSet::new();
        for c in &cats {
            if !self.categories.contains(c) {
                return Err(ParseErrorKind::UndeclaredCategory(c.clone()));
            }
            if *c == object {
                return Err(ParseErrorKind::SelfCategory(object));
            }
            if !seen.insert(c) {
                return Err(ParseErrorKind::DuplicateCategory(c.clone()));
            }
        }
        match self.assignments.get(&object) {
            Some(prev) if *prev != cats => Err(ParseErrorKind::ConflictingRow(object)),
            _ => {
                self.assignments.insert(object, cats);
                Ok(())
            }
        }
    }

    pub fn categories(&self) -> &BTreeSet<String> {
        &self.categories
    }

    /// Categories of `label`, empty when it has none.
    pub fn categories_of(&self, label: &str) -> &[String] {
        self.assignments.get(label).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn first_category(&self, label: &str) -> Option<&str> {
        self.categories_of(label).first().map(String::as_str)
    }

    pub fn assignments(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.assignments.iter().map(|(o, c)| (o.as_str(), c.as_slice()))
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.values().all(Vec::is_empty)
    }
}

pub fn parse_category_index(text: &str) -> Result<CategoryIndex, ParseError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines.next().ok_or(ParseError::new(1, ParseErrorKind::MissingCategoryHeader))?;
    let fields: Vec<&str> = header.split('\t').collect();
    if fields[0] != "CATEGORIES" {
        return Err(ParseError::new(hline, ParseErrorKind::MissingCategoryHeader));
    }
    field_count("CATEGORIES", &fields, "1 or 2", fields.len() <= 2, hline)?;
    let declared: Vec<&str> = fields.get(1).map(|f| split_list(f)).unwrap_or_default();
    let mut idx = CategoryIndex::new(declared, Vec::<(String, Vec<String>)>::new())
        .map_err(|k| ParseError::new(hline, k))?;
    for (line, raw) in lines {
        let fields: Vec<&str> = raw.split('\t').collect();
        field_count("category", &fields, "1 or 2", fields.len() <= 2, line)?;
        let object = label(fields[0], line)?;
        let cats = fields.get(1).map(|f| split_list(f)).unwrap_or_default();
        let cats = cats.into_iter().map(|c| label(c, line)).collect::<Result<Vec<_>, _>>()?;
        idx.assign(object, cats).map_err(|k| ParseError::new(line, k))?;
    }
    Ok(idx)
}

fn split_list(field: &str) -> Vec<&str> {
    if field.trim().is_empty() {
        Vec::new()
    } else {
        field.split(',').collect()
    }
}

/// One object per line: `label[\tstate,...][\tI=ingredient,...]`.
pub fn parse_kitchen(text: &str) -> Result<Kitchen, ParseError> {
    let mut items = Vec::new();
    for (line, raw) in content_lines(text) {
        let fields: Vec<&str> = raw.split('\t').collect();
        field_count("kitchen", &fields, "1 to 3", fields.len() <= 3, line)?;
        let mut states: Vec<&str> = Vec::new();
        let mut ingredients: Vec<&str> = Vec::new();
        for (i, f) in fields.iter().enumerate().skip(1) {
            if let Some(list) = f.strip_prefix("I=") {
                if i + 1 != fields.len() {
                    return Err(ParseError::new(line, ParseErrorKind::MalformedKitchenField(f.to_string())));
                }
                ingredients = split_list(list);
            } else if i == 1 {
                states = split_list(f);
            } else {
                return Err(ParseError::new(line, ParseErrorKind::MalformedKitchenField(f.to_string())));
            }
        }
        let node = ObjectNode::new(fields[0], states, ingredients, false).map_err(|e| ParseError::new(line, e.into()))?;
        items.push(node);
    }
    Ok(Kitchen::new(items))
}

pub fn serialize_kitchen(k: &Kitchen) -> String {
    let mut out = String::new();
    for n in k.items() {
        out.push_str(n.label());
        if !n.states().is_empty() {
            let states: Vec<&str> = n.states().iter().map(String::as_str).collect();
            let _ = write!(out, "\t{}", states.join(","));
        }
        if !n.ingredients().is_empty() {
            let ings: Vec<&str> = n.ingredients().iter().map(String::as_str).collect();
            let _ = write!(out, "\tI={}", ings.join(","));
        }
        out.push('\n');
    }
    out
}

/// Parses a goal written as `label[:state,...][@ingredient,...]`.
pub fn parse_goal(text: &str) -> Result<ObjectNode, ParseError> {
    let bad = || ParseError::new(1, ParseErrorKind::MalformedGoal(text.to_string()));
    let (head, ingredients) = match text.split_once('@') {
        Some((h, i)) => (h, split_list(i)),
        None => (text, Vec::new()),
    };
    let (name, states) = match head.split_once(':') {
        Some((n, s)) => (n, split_list(s)),
        None => (head, Vec::new()),
    };
    if name.trim().is_empty() || ingredients.iter().any(|i| i.contains(':')) {
        return Err(bad());
    }
    ObjectNode::new(name, states, ingredients, false).map_err(|e| ParseError::new(1, e.into()))
}

/// One label per line, normalized; blank and `#` lines skipped.
pub fn parse_label_list(text: &str) -> Result<BTreeSet<String>, ParseError> {
    content_lines(text).map(|(line, raw)| label(raw, line)).collect()
}
