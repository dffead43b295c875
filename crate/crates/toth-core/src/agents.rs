//! Style-conditioned prompts and text-generation providers.
//!
//! Each of the three reasoning styles gets the same instruction block with
//! only the style keyword substituted, followed by the bare `Q: ... A:`
//! input form. One generation call per agent per question; sampling-based
//! baselines pay for every extra sample, this pipeline does not.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};
use std::sync::OnceLock;
use std::time::Duration;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::http::{self, HttpError};
use crate::trace::{parse_trace, ParsedTrace, TraceError};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("question must be non-empty")]
    EmptyQuestion,
    #[error("generation provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error("malformed generation response: {0}")]
    MalformedResponse(String),
    #[error(transparent)]
    Trace(#[from] TraceError),
}

/// The three reasoning paradigms, in their fixed enumeration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentStyle {
    /// Infers the most plausible explanation for the observed facts.
    Abductive,
    /// Derives conclusions that necessarily follow from the premises.
    Deductive,
    /// Generalizes a rule from the observed examples.
    Inductive,
}

impl AgentStyle {
    pub const ALL: [AgentStyle; 3] = [
        AgentStyle::Abductive,
        AgentStyle::Deductive,
        AgentStyle::Inductive,
    ];

    /// The literal keyword substituted into the prompt template.
    pub fn keyword(self) -> &'static str {
        match self {
            AgentStyle::Abductive => "abductive",
            AgentStyle::Deductive => "deductive",
            AgentStyle::Inductive => "inductive",
        }
    }

    pub fn parse(value: &str) -> Option<AgentStyle> {
        match value.trim().to_ascii_lowercase().as_str() {
            "abductive" => Some(AgentStyle::Abductive),
            "deductive" => Some(AgentStyle::Deductive),
            "inductive" => Some(AgentStyle::Inductive),
            _ => None,
        }
    }
}

impl fmt::Display for AgentStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Decoding settings passed to the generation provider.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodingConfig {
    pub temperature: f64,
    pub max_tokens: u32,
    /// Advisory; endpoints may ignore it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl Default for DecodingConfig {
    fn default() -> Self {
        DecodingConfig {
            temperature: 0.7,
            max_tokens: 526,
            seed: None,
        }
    }
}

/// Builds the style-conditioned prompt for a question.
pub fn build_prompt(style: AgentStyle, question: &str) -> Result<String, AgentError> {
    let question = question.trim();
    if question.is_empty() {
        return Err(AgentError::EmptyQuestion);
    }
    let s = style.keyword();
    Ok(format!(
        "Use the {s} reasoning style to answer the following question.\n\
         Follow these instructions carefully:\n\
         - Break the problem into clear, numbered reasoning steps using {s}.\n\
         - Reference any known principles, patterns, or assumptions involved.\n\
         - Arrive at a final answer that directly responds to the question.\n\
         \n\
         Q: {question} \nA:"
    ))
}

/// Produces a completion for a prompt. Implementations must be safe for
/// concurrent use and count every generate call.
pub trait GenerationProvider: Send + Sync {
    fn generate(&self, prompt: &str, config: &DecodingConfig) -> Result<String, AgentError>;

    fn call_count(&self) -> u64;
}

/// Runs one agent: build the prompt, generate once, parse the trace.
pub fn run_agent(
    style: AgentStyle,
    question: &str,
    provider: &dyn GenerationProvider,
    config: &DecodingConfig,
) -> Result<ParsedTrace, AgentError> {
    let prompt = build_prompt(style, question)?;
    let completion = provider.generate(&prompt, config)?;
    Ok(parse_trace(&completion)?)
}

fn prompt_style_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"Use the (abductive|deductive|inductive) reasoning style").unwrap()
    })
}

fn prompt_question_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?s)Q: (.*?) \nA:").unwrap())
}

/// Recovers `(style, question)` from a prompt built by this crate; the
/// stub provider keys its fixtures on that pair.
pub fn parse_prompt(prompt: &str) -> (Option<AgentStyle>, Option<String>) {
    let style = prompt_style_regex()
        .captures(prompt)
        .and_then(|c| AgentStyle::parse(&c[1]));
    let question = prompt_question_regex()
        .captures(prompt)
        .map(|c| c[1].to_string());
    (style, question)
}

#[derive(Debug, Deserialize)]
struct FixtureFile {
    #[serde(default)]
    generations: Vec<FixtureRecord>,
}

#[derive(Debug, Deserialize)]
struct FixtureRecord {
    #[serde(default)]
    style: Option<AgentStyle>,
    question: String,
    completions: Vec<String>,
}

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error("cannot read fixture file: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse fixture file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("fixture for {question:?} has no completions")]
    Empty { question: String },
}

struct FixtureEntry {
    completions: Vec<String>,
    cursor: AtomicUsize,
}

/// Deterministic offline generation provider.
///
/// Completions come from a fixture table keyed by `(style, question)`;
/// repeated calls for the same key cycle through the fixture's completions
/// in order. Keys without a fixture fall back to a synthesized completion
/// that is a pure function of the key, so any question is answerable
/// offline and every run is reproducible.
#[derive(Default)]
pub struct StubGeneration {
    fixtures: HashMap<(Option<AgentStyle>, String), FixtureEntry>,
    calls: AtomicU64,
}

impl StubGeneration {
    pub fn new() -> Self {
        StubGeneration::default()
    }

    pub fn with_fixture(
        mut self,
        style: Option<AgentStyle>,
        question: &str,
        completions: Vec<String>,
    ) -> Self {
        self.fixtures.insert(
            (style, question.trim().to_string()),
            FixtureEntry {
                completions,
                cursor: AtomicUsize::new(0),
            },
        );
        self
    }

    /// Loads a fixture table from JSON:
    /// `{"generations": [{"style": "deductive", "question": "...",
    /// "completions": ["..."]}]}` with `style` omitted for style-free
    /// prompts.
    pub fn from_fixture_file(path: &Path) -> Result<Self, FixtureError> {
        let text = std::fs::read_to_string(path)?;
        let file: FixtureFile = serde_json::from_str(&text)?;
        let mut stub = StubGeneration::new();
        for record in file.generations {
            if record.completions.is_empty() {
                return Err(FixtureError::Empty {
                    question: record.question,
                });
            }
            stub = stub.with_fixture(record.style, &record.question, record.completions);
        }
        Ok(stub)
    }

    fn synthesize(style: Option<AgentStyle>, question: &str) -> String {
        let voice = style.map_or("direct", AgentStyle::keyword);
        format!(
            "1. Restating the question: {question}\n\
             2. Working through it with {voice} reasoning over the stated facts.\n\
             3. Final answer: yes"
        )
    }
}

impl GenerationProvider for StubGeneration {
    fn generate(&self, prompt: &str, _config: &DecodingConfig) -> Result<String, AgentError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let (style, question) = parse_prompt(prompt);
        let question = question.unwrap_or_else(|| prompt.trim().to_string());
        if let Some(entry) = self.fixtures.get(&(style, question.clone())) {
            let i = entry.cursor.fetch_add(1, Ordering::Relaxed) % entry.completions.len();
            return Ok(entry.completions[i].clone());
        }
        Ok(Self::synthesize(style, &question))
    }

    fn call_count(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

/// Client for a chat-completions HTTP endpoint. The prompt travels as a
/// single user message; no system message is sent.
pub struct HttpGeneration {
    endpoint: String,
    model: String,
    client: reqwest::blocking::Client,
    calls: AtomicU64,
}

impl HttpGeneration {
    pub fn new(
        endpoint: impl Into<String>,
        model: impl Into<String>,
        timeout: Duration,
    ) -> Result<Self, AgentError> {
        let client = http::build_client(timeout)
            .map_err(|e| AgentError::ProviderUnavailable(e.to_string()))?;
        Ok(HttpGeneration {
            endpoint: endpoint.into(),
            model: model.into(),
            client,
            calls: AtomicU64::new(0),
        })
    }
}

impl GenerationProvider for HttpGeneration {
    fn generate(&self, prompt: &str, config: &DecodingConfig) -> Result<String, AgentError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let mut body = serde_json::json!({
            "model": self.model,
            "messages": [{ "role": "user", "content": prompt }],
            "temperature": config.temperature,
            "max_tokens": config.max_tokens,
        });
        if let Some(seed) = config.seed {
            body["seed"] = serde_json::json!(seed);
        }
        let response =
            http::post_json(&self.client, &self.endpoint, &body).map_err(|e| match e {
                HttpError::Unavailable(msg) => AgentError::ProviderUnavailable(msg),
                HttpError::Malformed(msg) => AgentError::MalformedResponse(msg),
            })?;
        response
            .pointer("/choices/0/message/content")
            .and_then(|v| v.as_str())
            .map(str::to_string)
            .ok_or_else(|| {
                AgentError::MalformedResponse(
                    "response carries no choices[0].message.content".to_string(),
                )
            })
    }

    fn call_count(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prompt_is_bit_exact() {
        let prompt = build_prompt(AgentStyle::Deductive, "Is X true?").unwrap();
        let expected = "Use the deductive reasoning style to answer the following question.\n\
                        Follow these instructions carefully:\n\
                        - Break the problem into clear, numbered reasoning steps using deductive.\n\
                        - Reference any known principles, patterns, or assumptions involved.\n\
                        - Arrive at a final answer that directly responds to the question.\n\
                        \n\
                        Q: Is X true? \nA:";
        assert_eq!(prompt, expected);
    }

    #[test]
    fn prompts_differ_only_at_style_sites() {
        let q = "Does Bob lie?";
        let abductive = build_prompt(AgentStyle::Abductive, q).unwrap();
        let inductive = build_prompt(AgentStyle::Inductive, q).unwrap();
        assert_eq!(
            abductive.replace("abductive", "{style}"),
            inductive.replace("inductive", "{style}")
        );
    }

    #[test]
    fn empty_question_is_rejected() {
        assert!(matches!(
            build_prompt(AgentStyle::Deductive, "   "),
            Err(AgentError::EmptyQuestion)
        ));
    }

    #[test]
    fn prompt_round_trips_through_parse_prompt() {
        let q = "Is the sky blue?";
        for style in AgentStyle::ALL {
            let prompt = build_prompt(style, q).unwrap();
            let (parsed_style, parsed_q) = parse_prompt(&prompt);
            assert_eq!(parsed_style, Some(style));
            assert_eq!(parsed_q.as_deref(), Some(q));
        }
    }

    #[test]
    fn run_agent_parses_fixture_completion() {
        let q = "Does Alice tell the truth?";
        let stub = StubGeneration::new().with_fixture(
            Some(AgentStyle::Deductive),
            q,
            vec!["1. Alice speaks. 2. Records agree. 3. Final answer: yes".to_string()],
        );
        let trace =
            run_agent(AgentStyle::Deductive, q, &stub, &DecodingConfig::default()).unwrap();
        assert_eq!(trace.steps().len(), 3);
        assert!(trace.steps()[2].is_final);
        assert_eq!(stub.call_count(), 1);
    }

    #[test]
    fn unnumbered_fixture_degrades_to_single_step() {
        let q = "What is two plus two?";
        let stub = StubGeneration::new().with_fixture(
            Some(AgentStyle::Inductive),
            q,
            vec!["it is plainly 4".to_string()],
        );
        let trace =
            run_agent(AgentStyle::Inductive, q, &stub, &DecodingConfig::default()).unwrap();
        assert_eq!(trace.steps().len(), 1);
    }

    #[test]
    fn stub_cycles_through_completions_deterministically() {
        let q = "Pick one.";
        let stub = StubGeneration::new().with_fixture(
            None,
            q,
            vec!["yes".to_string(), "yes".to_string(), "no".to_string()],
        );
        let prompt = format!("Q: {q} \nA:");
        let outputs: Vec<String> = (0..6)
            .map(|_| stub.generate(&prompt, &DecodingConfig::default()).unwrap())
            .collect();
        assert_eq!(outputs, vec!["yes", "yes", "no", "yes", "yes", "no"]);
    }

    #[test]
    fn stub_synthesis_is_deterministic_per_key() {
        let stub = StubGeneration::new();
        let prompt = build_prompt(AgentStyle::Abductive, "Is water wet?").unwrap();
        let a = stub.generate(&prompt, &DecodingConfig::default()).unwrap();
        let b = stub.generate(&prompt, &DecodingConfig::default()).unwrap();
        assert_eq!(a, b);
        assert!(a.contains("abductive"));
        assert_eq!(stub.call_count(), 2);
    }

    #[test]
    fn decoding_defaults() {
        let config = DecodingConfig::default();
        assert_eq!(config.temperature, 0.7);
        assert_eq!(config.max_tokens, 526);
        assert_eq!(config.seed, None);
    }
}
