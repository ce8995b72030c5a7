//! Readers and writers for the line-oriented, tab-separated input formats.
//!
//! Subgraph files describe functional units one block at a time:
//!
//! ```text
//! # comment
//! O	knife
//! O	lettuce
//! S	whole
//! M	cut	12.5	14
//! O	knife
//! O	lettuce
//! S	chopped
//! //
//! ```
//!
//! `O` opens an object (input before the `M` line, output after it), `S`
//! adds a state, `I` sets comma-separated ingredient contents and `W` sets
//! the moving flag. `//` closes the unit. All errors carry a 1-based line
//! number.

// The format examples above are tab-separated on purpose.
#![allow(clippy::tabs_in_doc_comments)]

mod subgraph;
mod tables;

pub use subgraph::{parse_subgraph, parse_subgraph_checked, serialize_subgraph, serialize_units, Subgraph};
pub use tables::{
    parse_category_index, parse_goal, parse_kitchen, parse_label_list, parse_similarity_matrix, parse_taxonomy,
    serialize_kitchen, serialize_similarity_matrix, CategoryIndex, SimilarityMatrix, Taxonomy,
};

use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{kind}, line {line}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub(crate) fn new(line: usize, kind: ParseErrorKind) -> Self {
        ParseError { line, kind }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("state before object")]
    StateBeforeObject,
    #[error("ingredients before object")]
    IngredientsBeforeObject,
    #[error("moving flag before object")]
    MovingFlagBeforeObject,
    #[error("unknown line tag `{0}`")]
    UnknownTag(String),
    #[error("`{tag}` line has {found} fields, expected {expected}")]
    FieldCount { tag: String, expected: &'static str, found: usize },
    #[error("unit missing motion line")]
    MissingMotion,
    #[error("second motion line in one unit")]
    DuplicateMotion,
    #[error("unit has no input objects")]
    NoInputs,
    #[error("unit has no output objects")]
    NoOutputs,
    #[error("unit not terminated by `//`")]
    UnterminatedUnit,
    #[error("malformed timestamps: {0}")]
    MalformedTimestamps(String),
    #[error("duplicate state `{0}`")]
    DuplicateState(String),
    #[error("ingredients already set for this object")]
    DuplicateIngredients,
    #[error("moving flag already set for this object")]
    DuplicateMovingFlag,
    #[error("moving flag must be 0 or 1, got `{0}`")]
    BadMovingFlag(String),
    #[error("motion `{0}` is not in the motion index")]
    UnknownMotion(String),
    #[error("malformed score `{0}`")]
    MalformedScore(String),
    #[error("score {0} outside [0, 1]")]
    ScoreOutOfRange(f64),
    #[error("self-similarity of `{0}` must be 1.0")]
    SelfScore(String),
    #[error("conflicting scores for `{a}`/`{b}`: {first} vs {second}")]
    ConflictingScore { a: String, b: String, first: f64, second: f64 },
    #[error("taxonomy cycle: {}", .0.join(" -> "))]
    TaxonomyCycle(Vec<String>),
    #[error("missing `CATEGORIES` header")]
    MissingCategoryHeader,
    #[error("undeclared category `{0}`")]
    UndeclaredCategory(String),
    #[error("object `{0}` is its own category")]
    SelfCategory(String),
    #[error("category `{0}` listed twice")]
    DuplicateCategory(String),
    #[error("conflicting rows for `{0}`")]
    ConflictingRow(String),
    #[error("malformed kitchen field `{0}`")]
    MalformedKitchenField(String),
    #[error("malformed goal `{0}`")]
    MalformedGoal(String),
    #[error(transparent)]
    Invalid(#[from] ModelError),
}

/// Non-blank, non-comment lines with their 1-based numbers.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}
