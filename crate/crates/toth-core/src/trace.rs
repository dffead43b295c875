//! Parsing raw completions into ordered reasoning steps and normalized
//! answers.
//!
//! The step grammar is deliberately rigid: a marker is digits followed by
//! one of `.`, `)`, `:` and whitespace, optionally prefixed by "step"
//! (case-insensitive). Completions without any marker degrade to a single
//! step rather than erroring, so every non-blank completion stays
//! scoreable.

use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::graph::ReasoningStep;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace text contains no reasoning steps")]
    EmptyTrace,
    #[error("no {kind} answer token found")]
    AnswerNotFound { kind: AnswerKind },
}

/// An agent's completion split into ordered steps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedTrace {
    steps: Vec<ReasoningStep>,
    raw_text: String,
}

impl ParsedTrace {
    pub fn steps(&self) -> &[ReasoningStep] {
        &self.steps
    }

    pub fn raw_text(&self) -> &str {
        &self.raw_text
    }

    pub fn into_steps(self) -> Vec<ReasoningStep> {
        self.steps
    }

    /// Canonical re-serialization: one numbered line per step. Parsing the
    /// result reproduces the same steps.
    pub fn to_numbered_string(&self) -> String {
        let mut out = String::new();
        for step in &self.steps {
            out.push_str(&format!("{}. {}\n", step.index + 1, step.text));
        }
        out
    }
}

fn marker_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)(?:^|\s)(?:step\s+)?\d+[.):]\s+").unwrap())
}

/// Splits a completion on numbered markers ("1.", "2)", "Step 3:").
///
/// Text before the first marker is dropped; a completion without markers
/// becomes a single step. The last step is flagged `is_final` when it
/// carries a "final answer" phrase, or when it is the only step.
pub fn parse_trace(raw_text: &str) -> Result<ParsedTrace, TraceError> {
    if raw_text.trim().is_empty() {
        return Err(TraceError::EmptyTrace);
    }

    let spans: Vec<(usize, usize)> = marker_regex()
        .find_iter(raw_text)
        .map(|m| (m.start(), m.end()))
        .collect();

    let mut texts: Vec<String> = Vec::new();
    if spans.is_empty() {
        texts.push(raw_text.trim().to_string());
    } else {
        for (i, &(_, end)) in spans.iter().enumerate() {
            let segment_end = spans.get(i + 1).map_or(raw_text.len(), |&(start, _)| start);
            let segment = raw_text[end..segment_end].trim();
            if !segment.is_empty() {
                texts.push(segment.to_string());
            }
        }
    }
    if texts.is_empty() {
        return Err(TraceError::EmptyTrace);
    }

    let last = texts.len() - 1;
    let steps = texts
        .into_iter()
        .enumerate()
        .map(|(i, text)| {
            let concluding =
                i == last && (last == 0 || text.to_lowercase().contains("final answer"));
            ReasoningStep {
                index: i,
                text,
                is_final: concluding,
            }
        })
        .collect();

    Ok(ParsedTrace {
        steps,
        raw_text: raw_text.to_string(),
    })
}

/// What a task's answer is expected to look like.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnswerKind {
    Boolean,
    Integer,
    Text,
}

impl AnswerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AnswerKind::Boolean => "boolean",
            AnswerKind::Integer => "integer",
            AnswerKind::Text => "text",
        }
    }

    pub fn parse(value: &str) -> Option<AnswerKind> {
        match value.trim().to_ascii_lowercase().as_str() {
            "boolean" | "bool" => Some(AnswerKind::Boolean),
            "integer" | "int" => Some(AnswerKind::Integer),
            "text" => Some(AnswerKind::Text),
            _ => None,
        }
    }
}

impl fmt::Display for AnswerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A normalized final answer. Booleans canonicalize to yes/no.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Answer {
    Boolean(bool),
    Integer(i64),
    Text(String),
}

impl Answer {
    pub fn kind(&self) -> AnswerKind {
        match self {
            Answer::Boolean(_) => AnswerKind::Boolean,
            Answer::Integer(_) => AnswerKind::Integer,
            Answer::Text(_) => AnswerKind::Text,
        }
    }

    /// Parses a gold answer, requiring the whole string to be one
    /// recognizable token of the given kind.
    pub fn parse_strict(kind: AnswerKind, raw: &str) -> Result<Answer, TraceError> {
        let trimmed = raw.trim();
        match kind {
            AnswerKind::Boolean => match trimmed.to_ascii_lowercase().as_str() {
                "yes" | "true" => Ok(Answer::Boolean(true)),
                "no" | "false" => Ok(Answer::Boolean(false)),
                _ => Err(TraceError::AnswerNotFound { kind }),
            },
            AnswerKind::Integer => {
                let cleaned = trimmed.replace(',', "");
                cleaned
                    .parse::<i64>()
                    .map(Answer::Integer)
                    .map_err(|_| TraceError::AnswerNotFound { kind })
            }
            AnswerKind::Text => {
                if trimmed.is_empty() {
                    Err(TraceError::AnswerNotFound { kind })
                } else {
                    Ok(Answer::Text(trimmed.to_string()))
                }
            }
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Answer::Boolean(true) => f.write_str("yes"),
            Answer::Boolean(false) => f.write_str("no"),
            Answer::Integer(value) => write!(f, "{value}"),
            Answer::Text(value) => f.write_str(value),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawAnswer {
    kind: AnswerKind,
    value: String,
}

impl Serialize for Answer {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        RawAnswer {
            kind: self.kind(),
            value: self.to_string(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Answer {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawAnswer::deserialize(deserializer)?;
        Answer::parse_strict(raw.kind, &raw.value).map_err(D::Error::custom)
    }
}

fn boolean_token_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)\b(yes|no|true|false)\b").unwrap())
}

fn integer_token_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\d{1,3}(?:,\d{3})+|\d+").unwrap())
}

/// Pulls the final answer out of a step's text. The last recognizable token
/// wins; models tend to restate their conclusion at the end.
pub fn extract_answer(step_text: &str, kind: AnswerKind) -> Result<Answer, TraceError> {
    match kind {
        AnswerKind::Boolean => {
            let last = boolean_token_regex()
                .find_iter(step_text)
                .last()
                .ok_or(TraceError::AnswerNotFound { kind })?;
            match last.as_str().to_ascii_lowercase().as_str() {
                "yes" | "true" => Ok(Answer::Boolean(true)),
                _ => Ok(Answer::Boolean(false)),
            }
        }
        AnswerKind::Integer => {
            let m = integer_token_regex()
                .find_iter(step_text)
                .last()
                .ok_or(TraceError::AnswerNotFound { kind })?;
            let digits = m.as_str().replace(',', "");
            let negated = is_negated(step_text.as_bytes(), m.start());
            let literal = if negated {
                format!("-{digits}")
            } else {
                digits
            };
            literal
                .parse::<i64>()
                .map(Answer::Integer)
                .map_err(|_| TraceError::AnswerNotFound { kind })
        }
        AnswerKind::Text => Answer::parse_strict(kind, step_text),
    }
}

// A minus sign counts only when it is preceded by nothing or whitespace,
// so ranges like "3-4" read as two positive literals.
fn is_negated(bytes: &[u8], match_start: usize) -> bool {
    if match_start == 0 || bytes[match_start - 1] != b'-' {
        return false;
    }
    match_start == 1 || bytes[match_start - 2].is_ascii_whitespace()
}
