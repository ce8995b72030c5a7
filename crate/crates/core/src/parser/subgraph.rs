use std::borrow::Borrow;
use std::collections::BTreeSet;
use std::fmt::Write as _;

use super::{content_lines, ParseError, ParseErrorKind};
use crate::model::{FunctionalUnit, ModelError, MotionNode, ObjectNode, TimeSpan};

/// Functional units annotated from one source, in file order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Subgraph {
    pub source: String,
    pub units: Vec<FunctionalUnit>,
}

impl Subgraph {
    pub fn new(source: impl Into<String>, units: Vec<FunctionalUnit>) -> Self {
        Subgraph { source: source.into(), units }
    }
}

impl AsRef<[FunctionalUnit]> for Subgraph {
    fn as_ref(&self) -> &[FunctionalUnit] {
        &self.units
    }
}

struct PendingObject {
    line: usize,
    label: String,
    states: Vec<String>,
    ingredients: Option<Vec<String>>,
    moving: Option<bool>,
}

impl PendingObject {
    fn finish(self) -> Result<ObjectNode, ParseError> {
        ObjectNode::new(&self.label, &self.states, self.ingredients.unwrap_or_default(), self.moving.unwrap_or(false))
            .map_err(|e| ParseError::new(self.line, e.into()))
    }
}

#[derive(Default)]
struct PendingUnit {
    first_line: usize,
    inputs: Vec<ObjectNode>,
    outputs: Vec<ObjectNode>,
    motion: Option<(MotionNode, Option<TimeSpan>)>,
    current: Option<PendingObject>,
}

impl PendingUnit {
    fn is_empty(&self) -> bool {
        self.inputs.is_empty() && self.outputs.is_empty() && self.motion.is_none() && self.current.is_none()
    }

    fn flush_object(&mut self) -> Result<(), ParseError> {
        if let Some(obj) = self.current.take() {
            let node = obj.finish()?;
            if self.motion.is_some() {
                self.outputs.push(node);
            } else {
                self.inputs.push(node);
            }
        }
        Ok(())
    }
}

pub fn parse_subgraph(text: &str, source: &str) -> Result<Subgraph, ParseError> {
    parse(text, source, None)
}

/// Like [`parse_subgraph`], additionally requiring every motion label to be
/// present in `motions`.
pub fn parse_subgraph_checked(text: &str, source: &str, motions: &BTreeSet<String>) -> Result<Subgraph, ParseError> {
    parse(text, source, Some(motions))
}

fn expect_fields(tag: &str, fields: &[&str], allowed: &[usize], expected: &'static str, line: usize) -> Result<(), ParseError> {
    if allowed.contains(&fields.len()) {
        Ok(())
    } else {
        Err(ParseError::new(line, ParseErrorKind::FieldCount { tag: tag.to_string(), expected, found: fields.len() }))
    }
}

fn parse(text: &str, source: &str, motions: Option<&BTreeSet<String>>) -> Result<Subgraph, ParseError> {
    let provenance = (!source.is_empty()).then(|| source.to_string());
    let mut units = Vec::new();
    let mut unit = PendingUnit::default();
    let mut last_line = 0;

    for (line, raw) in content_lines(text) {
        last_line = line;
        if raw.trim_end() == "//" {
            unit.flush_object()?;
            let done = std::mem::take(&mut unit);
            let (motion, span) = done.motion.ok_or(ParseError::new(line, ParseErrorKind::MissingMotion))?;
            if done.inputs.is_empty() {
                return Err(ParseError::new(line, ParseErrorKind::NoInputs));
            }
            if done.outputs.is_empty() {
                return Err(ParseError::new(line, ParseErrorKind::NoOutputs));
            }
            let u = FunctionalUnit::new(done.inputs, motion, done.outputs)
                .map_err(|e| ParseError::new(done.first_line, e.into()))?
                .with_time_span(span)
                .with_provenance(provenance.clone());
            units.push(u);
            continue;
        }

        if unit.is_empty() {
            unit.first_line = line;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        let tag = fields[0];
        match tag {
            "O" => {
                expect_fields(tag, &fields, &[2], "2", line)?;
                unit.flush_object()?;
                unit.current = Some(PendingObject {
                    line,
                    label: fields[1].to_string(),
                    states: Vec::new(),
                    ingredients: None,
                    moving: None,
                });
            }
            "S" => {
                expect_fields(tag, &fields, &[2], "2", line)?;
                let obj = unit.current.as_mut().ok_or(ParseError::new(line, ParseErrorKind::StateBeforeObject))?;
                let state = crate::model::normalize_label(fields[1]);
                if obj.states.iter().any(|s| crate::model::normalize_label(s) == state) {
                    return Err(ParseError::new(line, ParseErrorKind::DuplicateState(state)));
                }
                obj.states.push(fields[1].to_string());
            }
            "I" => {
                expect_fields(tag, &fields, &[2], "2", line)?;
                let obj =
                    unit.current.as_mut().ok_or(ParseError::new(line, ParseErrorKind::IngredientsBeforeObject))?;
                if obj.ingredients.is_some() {
                    return Err(ParseError::new(line, ParseErrorKind::DuplicateIngredients));
                }
                obj.ingredients = Some(fields[1].split(',').map(str::to_string).collect());
            }
            "W" => {
                expect_fields(tag, &fields, &[2], "2", line)?;
                let obj =
                    unit.current.as_mut().ok_or(ParseError::new(line, ParseErrorKind::MovingFlagBeforeObject))?;
                if obj.moving.is_some() {
                    return Err(ParseError::new(line, ParseErrorKind::DuplicateMovingFlag));
                }
                obj.moving = Some(match fields[1] {
                    "0" => false,
                    "1" => true,
                    other => return Err(ParseError::new(line, ParseErrorKind::BadMovingFlag(other.to_string()))),
                });
            }
            "M" => {
                expect_fields(tag, &fields, &[2, 4], "2 or 4", line)?;
                if unit.motion.is_some() {
                    return Err(ParseError::new(line, ParseErrorKind::DuplicateMotion));
                }
                unit.flush_object()?;
                let motion = MotionNode::new(fields[1]).map_err(|e| ParseError::new(line, e.into()))?;
                if let Some(index) = motions {
                    if !index.contains(motion.label()) {
                        return Err(ParseError::new(
                            line,
                            ModelError::UnknownMotion(motion.label().to_string()).into(),
                        ));
                    }
                }
                let span = if fields.len() == 4 { Some(parse_span(fields[2], fields[3], line)?) } else { None };
                unit.motion = Some((motion, span));
            }
            other => return Err(ParseError::new(line, ParseErrorKind::UnknownTag(other.to_string()))),
        }
    }

    if !unit.is_empty() {
        return Err(ParseError::new(last_line, ParseErrorKind::UnterminatedUnit));
    }
    Ok(Subgraph { source: source.to_string(), units })
}

fn parse_span(start: &str, end: &str, line: usize) -> Result<TimeSpan, ParseError> {
    let num = |s: &str| {
        s.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| ParseError::new(line, ParseErrorKind::MalformedTimestamps(format!("`{s}` is not a number"))))
    };
    let (start, end) = (num(start)?, num(end)?);
    TimeSpan::new(start, end).map_err(|e| ParseError::new(line, ParseErrorKind::MalformedTimestamps(e.to_string())))
}

pub fn serialize_subgraph(s: &Subgraph) -> String {
    serialize_units(&s.units)
}

/// Canonical text for a unit list: set fields sorted, defaults omitted.
pub fn serialize_units<U: Borrow<FunctionalUnit>>(units: &[U]) -> String {
    let mut out = String::new();
    for u in units {
        let u = u.borrow();
        for n in u.inputs() {
            write_object(&mut out, n);
        }
        out.push_str("M\t");
        out.push_str(u.motion().label());
        if let Some(span) = u.time_span() {
            let _ = write!(out, "\t{}\t{}", span.start(), span.end());
        }
        out.push('\n');
        for n in u.outputs() {
            write_object(&mut out, n);
        }
        out.push_str("//\n");
    }
    out
}

fn write_object(out: &mut String, n: &ObjectNode) {
    let _ = writeln!(out, "O\t{}", n.label());
    for s in n.states() {
        let _ = writeln!(out, "S\t{s}");
    }
    if !n.ingredients().is_empty() {
        let list: Vec<&str> = n.ingredients().iter().map(String::as_str).collect();
        let _ = writeln!(out, "I\t{}", list.join(","));
    }
    if n.is_moving() {
        out.push_str("W\t1\n");
    }
}
