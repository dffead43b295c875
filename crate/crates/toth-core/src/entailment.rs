//! Entailment providers, the label-to-trust calibration, and edge inference.
//!
//! Two providers implement the same contract: [`HttpEntailment`] talks to an
//! NLI-serving endpoint, [`StubEntailment`] is a deterministic lexical rule
//! set for offline runs and tests. Both count their classify calls, which is
//! how the linear work bound of the pipeline is asserted.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Edge;
use crate::http::{self, HttpError};
use crate::trace::ParsedTrace;

#[derive(Debug, Error)]
pub enum EntailmentError {
    #[error("calibration value {value} for {label} is outside [0, 1]")]
    InvalidCalibration {
        label: EntailmentLabel,
        value: f64,
    },
    #[error("trust score {0} is outside [0, 1]")]
    InvalidTrust(f64),
    #[error("entailment provider unavailable: {0}")]
    ProviderUnavailable(String),
    #[error("malformed entailment response: {0}")]
    MalformedResponse(String),
}

/// NLI verdict over a premise/hypothesis pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntailmentLabel {
    Entailment,
    Neutral,
    Contradiction,
}

impl EntailmentLabel {
    pub const ALL: [EntailmentLabel; 3] = [
        EntailmentLabel::Entailment,
        EntailmentLabel::Neutral,
        EntailmentLabel::Contradiction,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntailmentLabel::Entailment => "entailment",
            EntailmentLabel::Neutral => "neutral",
            EntailmentLabel::Contradiction => "contradiction",
        }
    }

    pub fn parse(value: &str) -> Option<EntailmentLabel> {
        match value.trim().to_ascii_lowercase().as_str() {
            "entailment" => Some(EntailmentLabel::Entailment),
            "neutral" => Some(EntailmentLabel::Neutral),
            "contradiction" => Some(EntailmentLabel::Contradiction),
            _ => None,
        }
    }
}

impl fmt::Display for EntailmentLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Probability-like edge weight in [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct TrustScore(f64);

impl TrustScore {
    pub fn new(value: f64) -> Result<Self, EntailmentError> {
        if (0.0..=1.0).contains(&value) {
            Ok(TrustScore(value))
        } else {
            Err(EntailmentError::InvalidTrust(value))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for TrustScore {
    type Error = EntailmentError;

    fn try_from(value: f64) -> Result<Self, EntailmentError> {
        TrustScore::new(value)
    }
}

impl From<TrustScore> for f64 {
    fn from(trust: TrustScore) -> f64 {
        trust.0
    }
}

/// Label-to-trust map. The defaults weight entailment high, neutral in the
/// middle, and contradiction close to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Calibration {
    pub entailment: f64,
    pub neutral: f64,
    pub contradiction: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Calibration {
            entailment: 0.95,
            neutral: 0.60,
            contradiction: 0.10,
        }
    }
}

/// Looks a label up in the calibration map.
pub fn trust_of(
    label: EntailmentLabel,
    calibration: &Calibration,
) -> Result<TrustScore, EntailmentError> {
    let value = match label {
        EntailmentLabel::Entailment => calibration.entailment,
        EntailmentLabel::Neutral => calibration.neutral,
        EntailmentLabel::Contradiction => calibration.contradiction,
    };
    TrustScore::new(value).map_err(|_| EntailmentError::InvalidCalibration { label, value })
}

/// Classifies premise/hypothesis pairs. Implementations must be safe for
/// concurrent calls; `call_count` increments exactly once per classify.
pub trait EntailmentProvider: Send + Sync {
    fn classify(&self, premise: &str, hypothesis: &str)
        -> Result<EntailmentLabel, EntailmentError>;

    fn call_count(&self) -> u64;
}

/// Runs NLI over step pairs of a trace and emits forward edges.
///
/// For every ordered pair `(i, j)` with `0 < j - i <= window` the earlier
/// step is the premise and the later step the hypothesis. Pairs are visited
/// by ascending gap, then ascending position. The default window of 1
/// yields a chain with exactly `s - 1` edges; a single-step trace yields
/// none.
pub fn infer_edges(
    trace: &ParsedTrace,
    provider: &dyn EntailmentProvider,
    window: usize,
    calibration: &Calibration,
) -> Result<Vec<Edge>, EntailmentError> {
    let steps = trace.steps();
    let window = window.max(1);
    let mut edges = Vec::new();
    for gap in 1..=window {
        for source in 0..steps.len().saturating_sub(gap) {
            let target = source + gap;
            let label = provider.classify(&steps[source].text, &steps[target].text)?;
            edges.push(Edge {
                source,
                target,
                label,
                trust: trust_of(label, calibration)?,
            });
        }
    }
    Ok(edges)
}

const NEGATION_MARKERS: [&str; 3] = ["not", "lies", "false"];

const STOPWORDS: [&str; 22] = [
    "the", "a", "an", "is", "are", "was", "were", "be", "been", "do", "does", "did", "to", "of",
    "in", "on", "and", "or", "it", "that", "this", "so",
];

/// Deterministic lexical entailment rules.
///
/// Containment (one side's tokens a subsequence of the other's) reads as
/// entailment; a negation marker on exactly one side over shared content
/// reads as contradiction; anything else is neutral.
pub fn stub_classify(premise: &str, hypothesis: &str) -> EntailmentLabel {
    let p = normalize_tokens(premise);
    let h = normalize_tokens(hypothesis);
    if is_subsequence(&h, &p) || is_subsequence(&p, &h) {
        return EntailmentLabel::Entailment;
    }
    let p_negated = has_negation(&p);
    let h_negated = has_negation(&h);
    if p_negated != h_negated && shares_content_token(&p, &h) {
        return EntailmentLabel::Contradiction;
    }
    EntailmentLabel::Neutral
}

fn normalize_tokens(text: &str) -> Vec<String> {
    // expand contractions first so "doesn't" carries its negation
    let lowered = text.to_lowercase().replace("n't", " not");
    lowered
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

fn is_subsequence(needle: &[String], haystack: &[String]) -> bool {
    let mut it = haystack.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

fn has_negation(tokens: &[String]) -> bool {
    tokens
        .iter()
        .any(|t| NEGATION_MARKERS.contains(&t.as_str()))
}

fn shares_content_token(a: &[String], b: &[String]) -> bool {
    let content = |tokens: &[String]| -> Vec<String> {
        tokens
            .iter()
            .filter(|t| {
                !STOPWORDS.contains(&t.as_str()) && !NEGATION_MARKERS.contains(&t.as_str())
            })
            .cloned()
            .collect()
    };
    let b_content = content(b);
    content(a).iter().any(|t| b_content.contains(t))
}

/// Offline provider backed by [`stub_classify`].
#[derive(Debug, Default)]
pub struct StubEntailment {
    calls: AtomicU64,
}

impl StubEntailment {
    pub fn new() -> Self {
        StubEntailment::default()
    }
}

impl EntailmentProvider for StubEntailment {
    fn classify(
        &self,
        premise: &str,
        hypothesis: &str,
    ) -> Result<EntailmentLabel, EntailmentError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(stub_classify(premise, hypothesis))
    }

    fn call_count(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

/// Client for an NLI-serving HTTP endpoint.
///
/// Requests are `POST {"premise", "hypothesis"}`; accepted responses are
/// either `{"label": "..."}` or `{"scores": {"entailment": .., ..}}`, in
/// which case the argmax label wins. Transient failures are retried once.
pub struct HttpEntailment {
    endpoint: String,
    client: reqwest::blocking::Client,
    calls: AtomicU64,
}

impl HttpEntailment {
    pub fn new(endpoint: impl Into<String>, timeout: Duration) -> Result<Self, EntailmentError> {
        let client = http::build_client(timeout)
            .map_err(|e| EntailmentError::ProviderUnavailable(e.to_string()))?;
        Ok(HttpEntailment {
            endpoint: endpoint.into(),
            client,
            calls: AtomicU64::new(0),
        })
    }
}

impl EntailmentProvider for HttpEntailment {
    fn classify(
        &self,
        premise: &str,
        hypothesis: &str,
    ) -> Result<EntailmentLabel, EntailmentError> {
        self.calls.fetch_add(1, Ordering::Relaxed);
        let body = serde_json::json!({ "premise": premise, "hypothesis": hypothesis });
        let response = http::post_json(&self.client, &self.endpoint, &body).map_err(
            |e| match e {
                HttpError::Unavailable(msg) => EntailmentError::ProviderUnavailable(msg),
                HttpError::Malformed(msg) => EntailmentError::MalformedResponse(msg),
            },
        )?;
        parse_nli_response(&response)
    }

    fn call_count(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

/// One-shot classification against an endpoint; builds a throwaway client.
pub fn http_classify(
    premise: &str,
    hypothesis: &str,
    endpoint: &str,
    timeout: Duration,
) -> Result<EntailmentLabel, EntailmentError> {
    HttpEntailment::new(endpoint, timeout)?.classify(premise, hypothesis)
}

fn parse_nli_response(body: &serde_json::Value) -> Result<EntailmentLabel, EntailmentError> {
    if let Some(label) = body.get("label").and_then(|v| v.as_str()) {
        return EntailmentLabel::parse(label).ok_or_else(|| {
            EntailmentError::MalformedResponse(format!("unknown label `{label}`"))
        });
    }
    if let Some(scores) = body.get("scores").and_then(|v| v.as_object()) {
        let scores: HashMap<&str, f64> = scores
            .iter()
            .filter_map(|(k, v)| v.as_f64().map(|f| (k.as_str(), f)))
            .collect();
        let mut best: Option<(EntailmentLabel, f64)> = None;
        for label in EntailmentLabel::ALL {
            if let Some(&score) = scores.get(label.as_str()) {
                if best.is_none_or(|(_, s)| score > s) {
                    best = Some((label, score));
                }
            }
        }
        return best.map(|(label, _)| label).ok_or_else(|| {
            EntailmentError::MalformedResponse("scores object carries no known label".to_string())
        });
    }
    Err(EntailmentError::MalformedResponse(
        "expected a `label` or `scores` field".to_string(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::parse_trace;
    use proptest::prelude::*;

    #[test]
    fn default_calibration_matches_label_map() {
        let cal = Calibration::default();
        assert_eq!(
            trust_of(EntailmentLabel::Entailment, &cal).unwrap().get(),
            0.95
        );
        assert_eq!(trust_of(EntailmentLabel::Neutral, &cal).unwrap().get(), 0.60);
        assert_eq!(
            trust_of(EntailmentLabel::Contradiction, &cal).unwrap().get(),
            0.10
        );
    }

    #[test]
    fn out_of_range_calibration_is_rejected() {
        let cal = Calibration {
            entailment: 1.2,
            ..Calibration::default()
        };
        let err = trust_of(EntailmentLabel::Entailment, &cal).unwrap_err();
        assert!(matches!(
            err,
            EntailmentError::InvalidCalibration { value, .. } if value == 1.2
        ));
    }

    #[test]
    fn window_one_yields_chain_calls_and_edges() {
        let trace = parse_trace("1. a b\n2. c d\n3. e f\n4. g h").unwrap();
        let provider = StubEntailment::new();
        let edges = infer_edges(&trace, &provider, 1, &Calibration::default()).unwrap();
        assert_eq!(provider.call_count(), 3);
        let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e.source, e.target)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2), (2, 3)]);
    }

    #[test]
    fn single_step_trace_yields_no_calls() {
        let trace = parse_trace("only one step here").unwrap();
        let provider = StubEntailment::new();
        let edges = infer_edges(&trace, &provider, 1, &Calibration::default()).unwrap();
        assert!(edges.is_empty());
        assert_eq!(provider.call_count(), 0);
    }

    #[test]
    fn window_two_visits_pairs_by_gap() {
        let trace = parse_trace("1. a b\n2. c d\n3. e f").unwrap();
        let provider = StubEntailment::new();
        let edges = infer_edges(&trace, &provider, 2, &Calibration::default()).unwrap();
        assert_eq!(provider.call_count(), 3);
        let pairs: Vec<(usize, usize)> = edges.iter().map(|e| (e.source, e.target)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2), (0, 2)]);
    }

    #[test]
    fn containment_reads_as_entailment() {
        assert_eq!(
            stub_classify("Alice tells the truth", "Alice tells the truth about Bob"),
            EntailmentLabel::Entailment
        );
    }

    #[test]
    fn negation_over_shared_content_reads_as_contradiction() {
        assert_eq!(
            stub_classify("Alice tells the truth", "Alice does not tell the truth"),
            EntailmentLabel::Contradiction
        );
        assert_eq!(
            stub_classify("statement one is true", "statement one is false"),
            EntailmentLabel::Contradiction
        );
    }

    #[test]
    fn disjoint_content_reads_as_neutral() {
        assert_eq!(
            stub_classify("Alice tells the truth", "Bob owns five apples"),
            EntailmentLabel::Neutral
        );
    }

    #[test]
    fn negation_on_both_sides_is_not_contradiction() {
        assert_eq!(
            stub_classify("Alice does not lie about it", "Alice is not here today"),
            EntailmentLabel::Neutral
        );
    }

    #[test]
    fn label_response_parses_case_insensitively() {
        let body = serde_json::json!({ "label": "ENTAILMENT" });
        assert_eq!(
            parse_nli_response(&body).unwrap(),
            EntailmentLabel::Entailment
        );
    }

    #[test]
    fn scores_response_takes_argmax() {
        let body = serde_json::json!({
            "scores": {"entailment": 0.1, "neutral": 0.2, "contradiction": 0.7}
        });
        assert_eq!(
            parse_nli_response(&body).unwrap(),
            EntailmentLabel::Contradiction
        );
    }

    #[test]
    fn score_ties_break_by_label_order() {
        let body = serde_json::json!({
            "scores": {"entailment": 0.4, "neutral": 0.4, "contradiction": 0.2}
        });
        assert_eq!(
            parse_nli_response(&body).unwrap(),
            EntailmentLabel::Entailment
        );
    }

    #[test]
    fn unknown_shapes_are_malformed() {
        assert!(parse_nli_response(&serde_json::json!({"label": "shrug"})).is_err());
        assert!(parse_nli_response(&serde_json::json!({"verdict": "entailment"})).is_err());
        assert!(parse_nli_response(&serde_json::json!({"scores": {"other": 1.0}})).is_err());
    }

    proptest! {
        #[test]
        fn classify_is_reflexively_entailing(text in "[a-z]{1,8}( [a-z]{1,8}){0,6}") {
            prop_assert_eq!(stub_classify(&text, &text), EntailmentLabel::Entailment);
        }

        #[test]
        fn inferred_edges_point_forward(
            step_count in 1usize..8,
            window in 1usize..4,
        ) {
            let raw = (0..step_count)
                .map(|i| format!("{}. statement number {}", i + 1, i))
                .collect::<Vec<_>>()
                .join("\n");
            let trace = parse_trace(&raw).unwrap();
            let provider = StubEntailment::new();
            let edges = infer_edges(&trace, &provider, window, &Calibration::default()).unwrap();
            for edge in &edges {
                prop_assert!(edge.source < edge.target);
                prop_assert!(edge.target - edge.source <= window);
            }
            let expected: usize = (1..=window)
                .map(|gap| step_count.saturating_sub(gap))
                .sum();
            prop_assert_eq!(edges.len(), expected);
            prop_assert_eq!(provider.call_count() as usize, expected);
        }
    }
}
