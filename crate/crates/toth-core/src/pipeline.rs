//! End-to-end orchestration: three agents, three graphs, one answer.
//!
//! Each style runs independently: generate a trace, infer trusted edges,
//! build the graph, propagate beliefs, score. The best-scoring graph's
//! terminal node yields the answer. A failing agent is excluded from
//! selection and reported in diagnostics instead of aborting the run,
//! unless the pipeline is configured to fail fast.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::{run_agent, AgentError, AgentStyle, DecodingConfig, GenerationProvider};
use crate::entailment::{infer_edges, Calibration, EntailmentError, EntailmentProvider};
use crate::graph::ReasoningGraph;
use crate::propagation::{
    graph_score, propagate, select_best, EntropyBase, GraphScore, DEFAULT_PRIOR,
};
use crate::trace::{extract_answer, Answer, AnswerKind};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("all agents failed to produce a usable graph")]
    NoValidGraph,
    #[error("provider unavailable: {0}")]
    ProviderUnavailable(String),
}

/// Knobs for one pipeline run. Defaults follow the reference constants:
/// window 1, prior 0.5, bit entropy, 0.95/0.60/0.10 calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Maximum step gap bridged by NLI edges; 1 gives a chain.
    pub window: usize,
    pub prior: f64,
    pub entropy_base: EntropyBase,
    pub calibration: Calibration,
    pub decoding: DecodingConfig,
    /// Style preference for score ties, strongest first.
    pub tie_break: [AgentStyle; 3],
    /// Abort on provider failure instead of degrading to the survivors.
    pub fail_fast: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            window: 1,
            prior: DEFAULT_PRIOR,
            entropy_base: EntropyBase::Bits,
            calibration: Calibration::default(),
            decoding: DecodingConfig::default(),
            tie_break: AgentStyle::ALL,
            fail_fast: false,
        }
    }
}

/// Everything one agent produced, successful or not.
#[derive(Debug, Clone)]
pub struct AgentRun {
    pub style: AgentStyle,
    pub graph: Option<ReasoningGraph>,
    pub score: Option<GraphScore>,
    pub answer: Option<Answer>,
    pub error: Option<String>,
    pub step_count: usize,
    pub nli_calls: u64,
    pub degenerate: bool,
    pub elapsed: Duration,
}

/// Outcome of a full solve.
#[derive(Debug, Clone)]
pub struct ToThResult {
    pub question: String,
    pub answer: Answer,
    pub selected_style: AgentStyle,
    /// One entry per style, in canonical order.
    pub agents: Vec<AgentRun>,
    pub nli_calls_total: u64,
    pub generation_calls: u64,
}

impl ToThResult {
    pub fn selected_run(&self) -> &AgentRun {
        self.agents
            .iter()
            .find(|run| run.style == self.selected_style)
            .expect("selected style always has a run")
    }

    /// Serializes the result. Wall-clock timings are volatile, so they are
    /// only included on request; everything else is deterministic for
    /// deterministic providers.
    pub fn to_json(&self, include_timings: bool) -> serde_json::Value {
        let scores: Vec<serde_json::Value> = self
            .agents
            .iter()
            .filter_map(|run| {
                run.score.map(|s| {
                    serde_json::json!({
                        "style": run.style,
                        "mu": s.mu,
                        "entropy": s.entropy,
                        "score": s.score,
                    })
                })
            })
            .collect();
        let graphs: Vec<serde_json::Value> = self
            .agents
            .iter()
            .filter_map(|run| run.graph.as_ref())
            .map(|g| serde_json::to_value(g).expect("graph serialization cannot fail"))
            .collect();
        let agent_diags: Vec<serde_json::Value> = self
            .agents
            .iter()
            .map(|run| {
                let mut diag = serde_json::json!({
                    "style": run.style,
                    "steps": run.step_count,
                    "nli_calls": run.nli_calls,
                    "degenerate": run.degenerate,
                    "error": run.error,
                });
                if include_timings {
                    diag["elapsed_ms"] = serde_json::json!(run.elapsed.as_millis() as u64);
                }
                diag
            })
            .collect();
        serde_json::json!({
            "question": self.question,
            "answer": self.answer,
            "selected_style": self.selected_style,
            "scores": scores,
            "graphs": graphs,
            "diagnostics": {
                "agents": agent_diags,
                "nli_calls_total": self.nli_calls_total,
                "generation_calls": self.generation_calls,
            },
        })
    }
}

/// Answers a question by running all three agents and selecting the most
/// coherent reasoning graph.
pub fn solve(
    question: &str,
    kind: AnswerKind,
    generation: &dyn GenerationProvider,
    entailment: &dyn EntailmentProvider,
    config: &PipelineConfig,
) -> Result<ToThResult, PipelineError> {
    let generation_before = generation.call_count();
    let nli_before = entailment.call_count();

    let mut runs = Vec::with_capacity(AgentStyle::ALL.len());
    for style in AgentStyle::ALL {
        let run = run_one(style, question, kind, generation, entailment, config)?;
        runs.push(run);
    }

    let candidates: Vec<Option<(AgentStyle, f64)>> = runs
        .iter()
        .map(|run| match (&run.score, &run.answer) {
            (Some(score), Some(_)) => Some((run.style, score.score)),
            _ => None,
        })
        .collect();
    let selected = select_best(&candidates, &config.tie_break)
        .map_err(|_| PipelineError::NoValidGraph)?;

    let answer = runs[selected]
        .answer
        .clone()
        .expect("selected candidate carries an answer");
    Ok(ToThResult {
        question: question.to_string(),
        answer,
        selected_style: runs[selected].style,
        agents: runs,
        nli_calls_total: entailment.call_count() - nli_before,
        generation_calls: generation.call_count() - generation_before,
    })
}

fn run_one(
    style: AgentStyle,
    question: &str,
    kind: AnswerKind,
    generation: &dyn GenerationProvider,
    entailment: &dyn EntailmentProvider,
    config: &PipelineConfig,
) -> Result<AgentRun, PipelineError> {
    let started = Instant::now();
    let nli_before = entailment.call_count();
    let mut run = AgentRun {
        style,
        graph: None,
        score: None,
        answer: None,
        error: None,
        step_count: 0,
        nli_calls: 0,
        degenerate: false,
        elapsed: Duration::ZERO,
    };

    let outcome = build_candidate(style, question, kind, generation, entailment, config, &mut run);
    if let Err(failure) = outcome {
        if config.fail_fast {
            if let Some(message) = provider_outage(&failure) {
                return Err(PipelineError::ProviderUnavailable(message));
            }
        }
        run.error = Some(failure.to_string());
    }
    run.nli_calls = entailment.call_count() - nli_before;
    run.elapsed = started.elapsed();
    Ok(run)
}

#[derive(Debug, Error)]
enum StageError {
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Entailment(#[from] EntailmentError),
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error(transparent)]
    Propagation(#[from] crate::propagation::PropagationError),
    #[error(transparent)]
    Trace(#[from] crate::trace::TraceError),
}

fn provider_outage(error: &StageError) -> Option<String> {
    match error {
        StageError::Agent(AgentError::ProviderUnavailable(msg)) => Some(msg.clone()),
        StageError::Entailment(EntailmentError::ProviderUnavailable(msg)) => Some(msg.clone()),
        _ => None,
    }
}

fn build_candidate(
    style: AgentStyle,
    question: &str,
    kind: AnswerKind,
    generation: &dyn GenerationProvider,
    entailment: &dyn EntailmentProvider,
    config: &PipelineConfig,
    run: &mut AgentRun,
) -> Result<(), StageError> {
    let trace = run_agent(style, question, generation, &config.decoding)?;
    run.step_count = trace.steps().len();

    let edges = infer_edges(&trace, entailment, config.window, &config.calibration)?;
    let graph = ReasoningGraph::new(trace.into_steps(), edges)?.with_style(style);

    let state = propagate(&graph, config.prior)?;
    run.degenerate = state.degenerate();
    let graph = graph.with_beliefs(state.into_values())?;

    let score = graph_score(&graph, config.entropy_base)?;
    let terminal = graph.terminal_node()?;
    // a graph whose terminal step yields no answer cannot answer the
    // question, so it is kept for diagnostics but not for selection
    let answer = extract_answer(&graph.nodes()[terminal].text, kind);

    run.score = Some(score);
    run.graph = Some(graph);
    run.answer = Some(answer?);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::StubGeneration;
    use crate::entailment::StubEntailment;

    const Q: &str = "Does Alice tell the truth?";

    // Chain under the stub rules: each step extends the previous one.
    fn chain_completion() -> String {
        "1. alice speaks of bob\n\
         2. alice speaks of bob truly\n\
         3. alice speaks of bob truly so the final answer is yes"
            .to_string()
    }

    // Steps 1→2 contradict under the stub's negation rule.
    fn contradiction_completion(answer: &str) -> String {
        format!(
            "1. bob tells the truth\n\
             2. bob does not tell the truth\n\
             3. final answer: {answer}"
        )
    }

    fn fixture_stub() -> StubGeneration {
        StubGeneration::new()
            .with_fixture(
                Some(AgentStyle::Abductive),
                Q,
                vec![contradiction_completion("no")],
            )
            .with_fixture(Some(AgentStyle::Deductive), Q, vec![chain_completion()])
            .with_fixture(
                Some(AgentStyle::Inductive),
                Q,
                vec![contradiction_completion("yes")],
            )
    }

    #[test]
    fn clean_chain_agent_wins_selection() {
        let generation = fixture_stub();
        let entailment = StubEntailment::new();
        let result = solve(
            Q,
            AnswerKind::Boolean,
            &generation,
            &entailment,
            &PipelineConfig::default(),
        )
        .unwrap();
        assert_eq!(result.selected_style, AgentStyle::Deductive);
        assert_eq!(result.answer, Answer::Boolean(true));
        // every agent produced a 3-step trace: 2 NLI calls each
        assert_eq!(result.nli_calls_total, 6);
        assert_eq!(result.generation_calls, 3);
        let selected = result.selected_run();
        assert!(selected.score.unwrap().score > 0.0);
    }

    #[test]
    fn failing_agent_is_excluded_with_diagnostics() {
        let generation = fixture_stub().with_fixture(
            Some(AgentStyle::Abductive),
            Q,
            // blank completion parses to an empty trace
            vec!["   ".to_string()],
        );
        let entailment = StubEntailment::new();
        let result = solve(
            Q,
            AnswerKind::Boolean,
            &generation,
            &entailment,
            &PipelineConfig::default(),
        )
        .unwrap();
        assert_eq!(result.selected_style, AgentStyle::Deductive);
        let abductive = &result.agents[0];
        assert!(abductive.error.is_some());
        assert!(abductive.graph.is_none());
    }

    #[test]
    fn all_agents_failing_is_no_valid_graph() {
        let generation = StubGeneration::new()
            .with_fixture(Some(AgentStyle::Abductive), Q, vec!["  ".to_string()])
            .with_fixture(Some(AgentStyle::Deductive), Q, vec!["  ".to_string()])
            .with_fixture(Some(AgentStyle::Inductive), Q, vec![" ".to_string()]);
        let entailment = StubEntailment::new();
        let err = solve(
            Q,
            AnswerKind::Boolean,
            &generation,
            &entailment,
            &PipelineConfig::default(),
        )
        .unwrap_err();
        assert!(matches!(err, PipelineError::NoValidGraph));
    }

    #[test]
    fn unanswerable_terminal_step_excludes_the_graph() {
        // the inductive trace ends without any boolean token
        let generation = fixture_stub().with_fixture(
            Some(AgentStyle::Inductive),
            Q,
            vec!["1. bob speaks\n2. bob speaks often\n3. bob speaks often indeed".to_string()],
        );
        let entailment = StubEntailment::new();
        let result = solve(
            Q,
            AnswerKind::Boolean,
            &generation,
            &entailment,
            &PipelineConfig::default(),
        )
        .unwrap();
        let inductive = &result.agents[2];
        assert!(inductive.error.is_some());
        assert!(inductive.graph.is_some(), "graph kept for diagnostics");
        assert_ne!(result.selected_style, AgentStyle::Inductive);
    }

    #[test]
    fn answer_comes_from_terminal_node_of_selected_graph() {
        let generation = fixture_stub();
        let entailment = StubEntailment::new();
        let result = solve(
            Q,
            AnswerKind::Boolean,
            &generation,
            &entailment,
            &PipelineConfig::default(),
        )
        .unwrap();
        let graph = result.selected_run().graph.as_ref().unwrap();
        let terminal = graph.terminal_node().unwrap();
        let expected = extract_answer(&graph.nodes()[terminal].text, AnswerKind::Boolean).unwrap();
        assert_eq!(result.answer, expected);
    }

    #[test]
    fn result_json_shape_is_stable() {
        let generation = fixture_stub();
        let entailment = StubEntailment::new();
        let result = solve(
            Q,
            AnswerKind::Boolean,
            &generation,
            &entailment,
            &PipelineConfig::default(),
        )
        .unwrap();
        let json = result.to_json(false);
        assert_eq!(json["question"], Q);
        assert_eq!(json["selected_style"], "deductive");
        assert_eq!(json["scores"].as_array().unwrap().len(), 3);
        assert_eq!(json["graphs"].as_array().unwrap().len(), 3);
        let diag = &json["diagnostics"];
        assert_eq!(diag["agents"].as_array().unwrap().len(), 3);
        assert_eq!(diag["nli_calls_total"], 6);
        assert!(diag["agents"][0].get("elapsed_ms").is_none());
        let timed = result.to_json(true);
        assert!(timed["diagnostics"]["agents"][0].get("elapsed_ms").is_some());
    }
}
