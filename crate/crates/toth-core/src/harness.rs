//! Dataset loading, baseline methods, and stratified accuracy reports.
//!
//! Datasets are JSONL, one task per line:
//!
//! ```text
//! {"id": "wol-001", "question": "...", "answer": "yes",
//!  "kind": "boolean", "difficulty": {"statements": 3}}
//! ```
//!
//! Reports carry exact correct/total counts per difficulty stratum next to
//! the derived accuracy, so the numbers can always be re-audited.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{AgentError, AgentStyle, DecodingConfig, GenerationProvider};
use crate::entailment::EntailmentProvider;
use crate::pipeline::{solve, PipelineConfig, PipelineError};
use crate::trace::{extract_answer, Answer, AnswerKind};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("line {line}: {detail}")]
    MalformedRecord { line: usize, detail: String },
    #[error("line {line}: unknown task kind `{value}`")]
    UnknownKind { line: usize, value: String },
    #[error("cannot read dataset {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("majority vote over an empty answer list")]
    EmptyVote,
    #[error("provider unavailable: {0}")]
    ProviderUnavailable(String),
}

const KNOWN_DIFFICULTY_KEYS: [&str; 3] = ["statements", "depth", "length"];

/// One benchmark item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub question: String,
    pub gold: Answer,
    pub kind: AnswerKind,
    /// Difficulty tags, e.g. `statements: 3` or `depth: 0, length: 3`.
    pub difficulty: BTreeMap<String, String>,
}

impl Task {
    /// The stratum this task counts toward: the statement count alone for
    /// symbolic tasks, `dN/lM` for arithmetic ones.
    pub fn stratum(&self) -> String {
        stratum_label(&self.difficulty)
    }
}

pub fn stratum_label(difficulty: &BTreeMap<String, String>) -> String {
    if difficulty.is_empty() {
        return "unspecified".to_string();
    }
    if difficulty.len() == 1 {
        if let Some(statements) = difficulty.get("statements") {
            return statements.clone();
        }
    }
    if let (Some(depth), Some(length)) = (difficulty.get("depth"), difficulty.get("length")) {
        if difficulty.len() == 2 {
            return format!("d{depth}/l{length}");
        }
    }
    difficulty
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join("/")
}

#[derive(Debug, Deserialize)]
struct RawTask {
    id: String,
    question: String,
    answer: serde_json::Value,
    kind: String,
    #[serde(default)]
    difficulty: BTreeMap<String, serde_json::Value>,
}

/// Loads and validates a JSONL dataset. The first malformed line aborts
/// with its line number; blank lines are skipped; an empty file is an
/// empty (valid) dataset.
pub fn load_dataset(path: &Path) -> Result<Vec<Task>, HarnessError> {
    let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut tasks = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawTask =
            serde_json::from_str(line).map_err(|e| HarnessError::MalformedRecord {
                line: line_no,
                detail: e.to_string(),
            })?;
        tasks.push(validate_task(raw, line_no)?);
    }
    Ok(tasks)
}

fn validate_task(raw: RawTask, line: usize) -> Result<Task, HarnessError> {
    let kind = match AnswerKind::parse(&raw.kind) {
        Some(AnswerKind::Boolean) => AnswerKind::Boolean,
        Some(AnswerKind::Integer) => AnswerKind::Integer,
        _ => {
            return Err(HarnessError::UnknownKind {
                line,
                value: raw.kind,
            })
        }
    };
    if raw.question.trim().is_empty() {
        return Err(HarnessError::MalformedRecord {
            line,
            detail: "question is empty".to_string(),
        });
    }
    let gold_text = match &raw.answer {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Number(n) => n.to_string(),
        serde_json::Value::Bool(b) => b.to_string(),
        other => {
            return Err(HarnessError::MalformedRecord {
                line,
                detail: format!("answer must be a scalar, got {other}"),
            })
        }
    };
    let gold = Answer::parse_strict(kind, &gold_text).map_err(|_| {
        HarnessError::MalformedRecord {
            line,
            detail: format!("answer {gold_text:?} does not parse as {kind}"),
        }
    })?;
    let mut difficulty = BTreeMap::new();
    for (key, value) in raw.difficulty {
        if !KNOWN_DIFFICULTY_KEYS.contains(&key.as_str()) {
            return Err(HarnessError::MalformedRecord {
                line,
                detail: format!("unknown difficulty tag `{key}`"),
            });
        }
        let rendered = match value {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => {
                return Err(HarnessError::MalformedRecord {
                    line,
                    detail: format!("difficulty `{key}` must be a string or number, got {other}"),
                })
            }
        };
        difficulty.insert(key, rendered);
    }
    Ok(Task {
        id: raw.id,
        question: raw.question,
        gold,
        kind,
        difficulty,
    })
}

/// Evaluation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Toth,
    CotGreedy,
    SelfConsistency,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Toth => "toth",
            Method::CotGreedy => "cot_greedy",
            Method::SelfConsistency => "self_consistency",
        }
    }

    pub fn parse(value: &str) -> Option<Method> {
        match value.trim().to_ascii_lowercase().as_str() {
            "toth" => Some(Method::Toth),
            "cot_greedy" | "cot" => Some(Method::CotGreedy),
            "self_consistency" | "sc" => Some(Method::SelfConsistency),
            _ => None,
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Harness-level settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarnessConfig {
    /// Samples per task for self-consistency.
    pub self_consistency_n: usize,
    /// Bounded number of tasks evaluated in flight.
    pub concurrency: usize,
    /// Greedy chain-of-thought decodes at this temperature.
    pub cot_temperature: f64,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            self_consistency_n: 20,
            concurrency: 1,
            cot_temperature: 0.0,
        }
    }
}

/// Exact per-stratum tally with its derived accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StratumAccuracy {
    pub correct: usize,
    pub total: usize,
    pub accuracy: f64,
}

impl StratumAccuracy {
    fn new(correct: usize, total: usize) -> Self {
        StratumAccuracy {
            correct,
            total,
            accuracy: if total == 0 {
                0.0
            } else {
                correct as f64 / total as f64
            },
        }
    }
}

/// Per-task record kept in the report for auditing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskOutcome {
    pub id: String,
    pub stratum: String,
    pub expected: Answer,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted: Option<Answer>,
    pub correct: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected_style: Option<AgentStyle>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub temperature: f64,
    pub max_tokens: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub self_consistency_n: Option<usize>,
}

/// Accuracy report for one method over one task set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub method: Method,
    pub n_tasks: usize,
    pub n_correct: usize,
    pub overall_accuracy: f64,
    pub per_difficulty: BTreeMap<String, StratumAccuracy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_style_selection_counts: Option<BTreeMap<String, usize>>,
    pub metadata: ReportMetadata,
    pub tasks: Vec<TaskOutcome>,
}

/// Modal answer, ties broken by first occurrence.
pub fn majority_vote(answers: &[Answer]) -> Result<Answer, HarnessError> {
    if answers.is_empty() {
        return Err(HarnessError::EmptyVote);
    }
    let mut tally: HashMap<&Answer, (usize, usize)> = HashMap::new();
    for (position, answer) in answers.iter().enumerate() {
        let entry = tally.entry(answer).or_insert((0, position));
        entry.0 += 1;
    }
    let winner = tally
        .into_iter()
        .max_by(|a, b| a.1 .0.cmp(&b.1 .0).then(b.1 .1.cmp(&a.1 .1)))
        .map(|(answer, _)| answer.clone())
        .expect("non-empty tally");
    Ok(winner)
}

/// The bare question form shared by every method.
pub fn question_prompt(question: &str) -> String {
    format!("Q: {} \nA:", question.trim())
}

/// Greedy chain-of-thought prompt: the canonical step-by-step cue sits in
/// the answer slot.
pub fn cot_prompt(question: &str) -> String {
    format!("Q: {} \nA: Let's think step by step.", question.trim())
}

/// Runs one method over the task set and assembles the report.
pub fn run_method(
    method: Method,
    tasks: &[Task],
    generation: &dyn GenerationProvider,
    entailment: &dyn EntailmentProvider,
    pipeline_config: &PipelineConfig,
    config: &HarnessConfig,
) -> Result<Report, HarnessError> {
    let outcomes = run_tasks(tasks, config.concurrency.max(1), |task| {
        evaluate_task(method, task, generation, entailment, pipeline_config, config)
    });
    let mut results = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        results.push(outcome?);
    }

    let mut strata: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    let mut style_counts: BTreeMap<String, usize> = BTreeMap::new();
    let mut n_correct = 0;
    for outcome in &results {
        let entry = strata.entry(outcome.stratum.clone()).or_insert((0, 0));
        entry.1 += 1;
        if outcome.correct {
            entry.0 += 1;
            n_correct += 1;
        }
        if let Some(style) = outcome.selected_style {
            *style_counts.entry(style.keyword().to_string()).or_insert(0) += 1;
        }
    }

    let per_difficulty = strata
        .into_iter()
        .map(|(tag, (correct, total))| (tag, StratumAccuracy::new(correct, total)))
        .collect();

    Ok(Report {
        method,
        n_tasks: results.len(),
        n_correct,
        overall_accuracy: StratumAccuracy::new(n_correct, results.len()).accuracy,
        per_difficulty,
        per_style_selection_counts: (method == Method::Toth).then_some(style_counts),
        metadata: ReportMetadata {
            temperature: match method {
                Method::CotGreedy => config.cot_temperature,
                _ => pipeline_config.decoding.temperature,
            },
            max_tokens: pipeline_config.decoding.max_tokens,
            seed: pipeline_config.decoding.seed,
            self_consistency_n: (method == Method::SelfConsistency)
                .then_some(config.self_consistency_n),
        },
        tasks: results,
    })
}

fn evaluate_task(
    method: Method,
    task: &Task,
    generation: &dyn GenerationProvider,
    entailment: &dyn EntailmentProvider,
    pipeline_config: &PipelineConfig,
    config: &HarnessConfig,
) -> Result<TaskOutcome, HarnessError> {
    let mut outcome = TaskOutcome {
        id: task.id.clone(),
        stratum: task.stratum(),
        expected: task.gold.clone(),
        predicted: None,
        correct: false,
        selected_style: None,
        error: None,
    };
    match method {
        Method::Toth => match solve(
            &task.question,
            task.kind,
            generation,
            entailment,
            pipeline_config,
        ) {
            Ok(result) => {
                outcome.selected_style = Some(result.selected_style);
                outcome.predicted = Some(result.answer);
            }
            Err(PipelineError::ProviderUnavailable(msg)) => {
                return Err(HarnessError::ProviderUnavailable(msg))
            }
            Err(e) => outcome.error = Some(e.to_string()),
        },
        Method::CotGreedy => {
            let decoding = DecodingConfig {
                temperature: config.cot_temperature,
                ..pipeline_config.decoding
            };
            match generate_answer(&cot_prompt(&task.question), task.kind, generation, &decoding) {
                Ok(answer) => outcome.predicted = Some(answer),
                Err(GenerateFailure::Outage(msg)) if pipeline_config.fail_fast => {
                    return Err(HarnessError::ProviderUnavailable(msg))
                }
                Err(e) => outcome.error = Some(e.to_string()),
            }
        }
        Method::SelfConsistency => {
            let prompt = cot_prompt(&task.question);
            let mut votes = Vec::with_capacity(config.self_consistency_n);
            let mut last_error = None;
            for _ in 0..config.self_consistency_n {
                match generate_answer(&prompt, task.kind, generation, &pipeline_config.decoding) {
                    Ok(answer) => votes.push(answer),
                    Err(GenerateFailure::Outage(msg)) if pipeline_config.fail_fast => {
                        return Err(HarnessError::ProviderUnavailable(msg))
                    }
                    Err(e) => last_error = Some(e.to_string()),
                }
            }
            match majority_vote(&votes) {
                Ok(answer) => outcome.predicted = Some(answer),
                Err(_) => {
                    outcome.error =
                        Some(last_error.unwrap_or_else(|| "no vote produced an answer".into()))
                }
            }
        }
    }
    outcome.correct = outcome.predicted.as_ref() == Some(&task.gold);
    Ok(outcome)
}

#[derive(Debug, Error)]
enum GenerateFailure {
    #[error("provider unavailable: {0}")]
    Outage(String),
    #[error("{0}")]
    Other(String),
}

fn generate_answer(
    prompt: &str,
    kind: AnswerKind,
    generation: &dyn GenerationProvider,
    decoding: &DecodingConfig,
) -> Result<Answer, GenerateFailure> {
    let completion = generation.generate(prompt, decoding).map_err(|e| match e {
        AgentError::ProviderUnavailable(msg) => GenerateFailure::Outage(msg),
        other => GenerateFailure::Other(other.to_string()),
    })?;
    extract_answer(&completion, kind).map_err(|e| GenerateFailure::Other(e.to_string()))
}

/// Evaluates tasks with at most `concurrency` in flight; results come back
/// in task order regardless of scheduling.
fn run_tasks<T, F>(tasks: &[Task], concurrency: usize, evaluate: F) -> Vec<T>
where
    T: Send,
    F: Fn(&Task) -> T + Sync,
{
    if concurrency <= 1 || tasks.len() <= 1 {
        return tasks.iter().map(&evaluate).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..tasks.len()).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..concurrency.min(tasks.len()) {
            scope.spawn(|| loop {
                let index = next.fetch_add(1, Ordering::Relaxed);
                if index >= tasks.len() {
                    break;
                }
                let result = evaluate(&tasks[index]);
                slots.lock().expect("result store poisoned")[index] = Some(result);
            });
        }
    });
    slots
        .into_inner()
        .expect("result store poisoned")
        .into_iter()
        .map(|slot| slot.expect("every task evaluated"))
        .collect()
}

/// Plain-text table: one row per report, one column per difficulty tag
/// plus the overall column. Accuracies render to four decimal places.
pub fn render_table(reports: &[Report]) -> String {
    let mut tags: Vec<String> = Vec::new();
    for report in reports {
        for tag in report.per_difficulty.keys() {
            if !tags.contains(tag) {
                tags.push(tag.clone());
            }
        }
    }
    tags.sort();

    let mut header: Vec<String> = vec!["method".to_string()];
    header.extend(tags.iter().cloned());
    header.push("overall".to_string());

    let mut rows: Vec<Vec<String>> = vec![header];
    for report in reports {
        let mut row = vec![report.method.name().to_string()];
        for tag in &tags {
            row.push(match report.per_difficulty.get(tag) {
                Some(stratum) => format!("{:.4}", stratum.accuracy),
                None => "-".to_string(),
            });
        }
        row.push(format!("{:.4}", report.overall_accuracy));
        rows.push(row);
    }

    let widths: Vec<usize> = (0..rows[0].len())
        .map(|col| rows.iter().map(|row| row[col].len()).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (col, cell) in row.iter().enumerate() {
            if col > 0 {
                line.push_str("  ");
            }
            let _ = write!(line, "{:<width$}", cell, width = widths[col]);
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// CSV mirror of [`render_table`].
pub fn render_csv(reports: &[Report]) -> String {
    let mut tags: Vec<String> = Vec::new();
    for report in reports {
        for tag in report.per_difficulty.keys() {
            if !tags.contains(tag) {
                tags.push(tag.clone());
            }
        }
    }
    tags.sort();
    let mut out = String::from("method");
    for tag in &tags {
        let _ = write!(out, ",{tag}");
    }
    out.push_str(",overall\n");
    for report in reports {
        out.push_str(report.method.name());
        for tag in &tags {
            match report.per_difficulty.get(tag) {
                Some(stratum) => {
                    let _ = write!(out, ",{:.4}", stratum.accuracy);
                }
                None => out.push_str(",-"),
            }
        }
        let _ = writeln!(out, ",{:.4}", report.overall_accuracy);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::StubGeneration;
    use crate::entailment::StubEntailment;

    fn boolean_task(id: &str, question: &str, gold: bool, statements: u32) -> Task {
        Task {
            id: id.to_string(),
            question: question.to_string(),
            gold: Answer::Boolean(gold),
            kind: AnswerKind::Boolean,
            difficulty: BTreeMap::from([("statements".to_string(), statements.to_string())]),
        }
    }

    #[test]
    fn majority_vote_examples() {
        let yes = Answer::Boolean(true);
        let no = Answer::Boolean(false);
        assert_eq!(
            majority_vote(&[yes.clone(), no.clone(), yes.clone()]).unwrap(),
            yes
        );
        assert_eq!(
            majority_vote(&[
                Answer::Integer(18),
                Answer::Integer(18),
                Answer::Integer(20)
            ])
            .unwrap(),
            Answer::Integer(18)
        );
        // tie: first occurrence wins
        assert_eq!(majority_vote(&[yes.clone(), no.clone()]).unwrap(), yes);
        assert_eq!(majority_vote(&[no.clone(), yes]).unwrap(), no);
        assert!(matches!(majority_vote(&[]), Err(HarnessError::EmptyVote)));
    }

    #[test]
    fn self_consistency_majority_over_samples() {
        let q = "Is the coin fair?";
        let mut completions = Vec::new();
        for i in 0..20 {
            completions.push(if i < 12 {
                "I believe yes".to_string()
            } else {
                "I believe no".to_string()
            });
        }
        let generation = StubGeneration::new().with_fixture(None, &cot_prompt(q), completions);
        let entailment = StubEntailment::new();
        let tasks = vec![boolean_task("t1", q, true, 3)];
        let report = run_method(
            Method::SelfConsistency,
            &tasks,
            &generation,
            &entailment,
            &PipelineConfig::default(),
            &HarnessConfig::default(),
        )
        .unwrap();
        assert_eq!(report.n_correct, 1);
        assert_eq!(report.metadata.self_consistency_n, Some(20));
        assert_eq!(generation.call_count(), 20);
    }

    #[test]
    fn cot_greedy_uses_one_generation_per_task() {
        let q = "Is two even?";
        let generation = StubGeneration::new().with_fixture(
            None,
            &cot_prompt(q),
            vec!["Two divides evenly, so yes".to_string()],
        );
        let entailment = StubEntailment::new();
        let tasks = vec![boolean_task("t1", q, true, 3)];
        let report = run_method(
            Method::CotGreedy,
            &tasks,
            &generation,
            &entailment,
            &PipelineConfig::default(),
            &HarnessConfig::default(),
        )
        .unwrap();
        assert_eq!(generation.call_count(), 1);
        assert_eq!(report.n_correct, 1);
        assert_eq!(report.metadata.temperature, 0.0);
        assert_eq!(report.per_style_selection_counts, None);
    }

    #[test]
    fn stratified_accuracies_partition_the_set() {
        // 2 tasks at "3" (both right), 2 at "4" (one right)
        let make = |id: &str, statements: u32, right: bool| {
            let q = format!("Question {id}?");
            let completion = if right {
                "final answer: yes".to_string()
            } else {
                "final answer: no".to_string()
            };
            (boolean_task(id, &q, true, statements), q, completion)
        };
        let specs = [
            make("a", 3, true),
            make("b", 3, true),
            make("c", 4, true),
            make("d", 4, false),
        ];
        let mut generation = StubGeneration::new();
        for (_, q, completion) in &specs {
            generation = generation.with_fixture(None, &cot_prompt(q), vec![completion.clone()]);
        }
        let tasks: Vec<Task> = specs.iter().map(|(t, _, _)| t.clone()).collect();
        let report = run_method(
            Method::CotGreedy,
            &tasks,
            &generation,
            &StubEntailment::new(),
            &PipelineConfig::default(),
            &HarnessConfig::default(),
        )
        .unwrap();
        assert_eq!(report.per_difficulty["3"].accuracy, 1.0);
        assert_eq!(report.per_difficulty["4"].accuracy, 0.5);
        assert_eq!(report.overall_accuracy, 0.75);
        // strata recombine to the overall count
        let recombined: usize = report.per_difficulty.values().map(|s| s.correct).sum();
        assert_eq!(recombined, report.n_correct);
        let total: usize = report.per_difficulty.values().map(|s| s.total).sum();
        assert_eq!(total, report.n_tasks);
    }

    #[test]
    fn stratum_labels() {
        assert_eq!(
            stratum_label(&BTreeMap::from([("statements".into(), "4".into())])),
            "4"
        );
        assert_eq!(
            stratum_label(&BTreeMap::from([
                ("depth".into(), "0".into()),
                ("length".into(), "3".into())
            ])),
            "d0/l3"
        );
        assert_eq!(stratum_label(&BTreeMap::new()), "unspecified");
    }

    #[test]
    fn concurrent_runs_match_sequential() {
        let specs: Vec<(Task, String, String)> = (0..8)
            .map(|i| {
                let q = format!("Question number {i}?");
                let completion = format!("thinking... final answer: {}", if i % 2 == 0 { "yes" } else { "no" });
                (
                    boolean_task(&format!("t{i}"), &q, i % 2 == 0, 3 + (i % 3) as u32),
                    q,
                    completion,
                )
            })
            .collect();
        let build_stub = || {
            let mut stub = StubGeneration::new();
            for (_, q, completion) in &specs {
                stub = stub.with_fixture(None, &cot_prompt(q), vec![completion.clone()]);
            }
            stub
        };
        let tasks: Vec<Task> = specs.iter().map(|(t, _, _)| t.clone()).collect();
        let sequential = run_method(
            Method::CotGreedy,
            &tasks,
            &build_stub(),
            &StubEntailment::new(),
            &PipelineConfig::default(),
            &HarnessConfig::default(),
        )
        .unwrap();
        let concurrent = run_method(
            Method::CotGreedy,
            &tasks,
            &build_stub(),
            &StubEntailment::new(),
            &PipelineConfig::default(),
            &HarnessConfig {
                concurrency: 4,
                ..HarnessConfig::default()
            },
        )
        .unwrap();
        assert_eq!(sequential.tasks, concurrent.tasks);
        assert_eq!(sequential.overall_accuracy, concurrent.overall_accuracy);
    }

    #[test]
    fn table_renders_method_rows_and_difficulty_columns() {
        let report = Report {
            method: Method::Toth,
            n_tasks: 4,
            n_correct: 3,
            overall_accuracy: 0.75,
            per_difficulty: BTreeMap::from([
                ("3".to_string(), StratumAccuracy::new(2, 2)),
                ("4".to_string(), StratumAccuracy::new(1, 2)),
            ]),
            per_style_selection_counts: Some(BTreeMap::new()),
            metadata: ReportMetadata {
                temperature: 0.7,
                max_tokens: 526,
                seed: None,
                self_consistency_n: None,
            },
            tasks: Vec::new(),
        };
        let table = render_table(std::slice::from_ref(&report));
        let mut lines = table.lines();
        assert_eq!(lines.next().unwrap().split_whitespace().collect::<Vec<_>>(), vec!["method", "3", "4", "overall"]);
        assert_eq!(
            lines.next().unwrap().split_whitespace().collect::<Vec<_>>(),
            vec!["toth", "1.0000", "0.5000", "0.7500"]
        );
        let csv = render_csv(&[report]);
        assert_eq!(csv, "method,3,4,overall\ntoth,1.0000,0.5000,0.7500\n");
    }
}
