//! Reasoning-graph data model and structural algorithms.
//!
//! A [`ReasoningGraph`] is a directed acyclic graph over the ordered steps of
//! one agent's trace. Edges carry an entailment label together with its
//! calibrated trust score. Node beliefs stay absent until the propagation
//! pass fills them in; after that the graph is immutable.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::AgentStyle;
use crate::entailment::{trust_of, Calibration, EntailmentError, EntailmentLabel, TrustScore};

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph contains a directed cycle")]
    CycleDetected,
    #[error("edge {source} -> {target} references a node outside 0..{node_count}")]
    DanglingEdge {
        source: usize,
        target: usize,
        node_count: usize,
    },
    #[error("a reasoning graph needs at least one step")]
    EmptyTrace,
    #[error("step {index}: {reason}")]
    InvalidStep { index: usize, reason: String },
    #[error("beliefs vector has {got} entries for {expected} nodes")]
    BeliefLengthMismatch { got: usize, expected: usize },
    #[error("belief {value} for node {index} is outside [0, 1]")]
    BeliefOutOfRange { index: usize, value: f64 },
    #[error(transparent)]
    Calibration(#[from] EntailmentError),
}

/// One intermediate conclusion in an agent's trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReasoningStep {
    /// 0-based position in the trace.
    pub index: usize,
    pub text: String,
    /// Marks the trace's concluding step.
    pub is_final: bool,
}

impl ReasoningStep {
    pub fn new(index: usize, text: impl Into<String>) -> Self {
        ReasoningStep {
            index,
            text: text.into(),
            is_final: false,
        }
    }

    pub fn final_step(index: usize, text: impl Into<String>) -> Self {
        ReasoningStep {
            index,
            text: text.into(),
            is_final: true,
        }
    }
}

/// A directed inferential dependency between two steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub label: EntailmentLabel,
    pub trust: TrustScore,
}

/// DAG of reasoning steps with trust-weighted edges and optional beliefs.
///
/// Construction validates every structural invariant (non-empty, contiguous
/// step indices, in-range endpoints, acyclicity), so a value of this type is
/// always a well-formed DAG. Deserialization runs the same checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGraph")]
pub struct ReasoningGraph {
    nodes: Vec<ReasoningStep>,
    edges: Vec<Edge>,
    #[serde(skip_serializing_if = "Option::is_none")]
    beliefs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    agent_style: Option<AgentStyle>,
}

#[derive(Deserialize)]
struct RawGraph {
    nodes: Vec<ReasoningStep>,
    edges: Vec<Edge>,
    #[serde(default)]
    beliefs: Option<Vec<f64>>,
    #[serde(default)]
    agent_style: Option<AgentStyle>,
}

impl TryFrom<RawGraph> for ReasoningGraph {
    type Error = GraphError;

    fn try_from(raw: RawGraph) -> Result<Self, GraphError> {
        let mut graph = ReasoningGraph::new(raw.nodes, raw.edges)?;
        if let Some(style) = raw.agent_style {
            graph = graph.with_style(style);
        }
        match raw.beliefs {
            Some(beliefs) => graph.with_beliefs(beliefs),
            None => Ok(graph),
        }
    }
}

impl ReasoningGraph {
    /// Validating constructor over pre-built edges.
    pub fn new(nodes: Vec<ReasoningStep>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        if nodes.is_empty() {
            return Err(GraphError::EmptyTrace);
        }
        for (i, step) in nodes.iter().enumerate() {
            if step.index != i {
                return Err(GraphError::InvalidStep {
                    index: step.index,
                    reason: format!("expected contiguous index {i}"),
                });
            }
            if step.text.trim().is_empty() {
                return Err(GraphError::InvalidStep {
                    index: i,
                    reason: "step text is empty".to_string(),
                });
            }
        }
        for edge in &edges {
            if edge.source >= nodes.len() || edge.target >= nodes.len() {
                return Err(GraphError::DanglingEdge {
                    source: edge.source,
                    target: edge.target,
                    node_count: nodes.len(),
                });
            }
        }
        let graph = ReasoningGraph {
            nodes,
            edges,
            beliefs: None,
            agent_style: None,
        };
        graph.topological_order()?;
        Ok(graph)
    }

    pub fn nodes(&self) -> &[ReasoningStep] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn beliefs(&self) -> Option<&[f64]> {
        self.beliefs.as_deref()
    }

    pub fn agent_style(&self) -> Option<AgentStyle> {
        self.agent_style
    }

    pub fn with_style(mut self, style: AgentStyle) -> Self {
        self.agent_style = Some(style);
        self
    }

    /// Attaches propagated beliefs, one per node, each in [0, 1].
    pub fn with_beliefs(mut self, beliefs: Vec<f64>) -> Result<Self, GraphError> {
        if beliefs.len() != self.nodes.len() {
            return Err(GraphError::BeliefLengthMismatch {
                got: beliefs.len(),
                expected: self.nodes.len(),
            });
        }
        for (index, &value) in beliefs.iter().enumerate() {
            if !(0.0..=1.0).contains(&value) {
                return Err(GraphError::BeliefOutOfRange { index, value });
            }
        }
        self.beliefs = Some(beliefs);
        Ok(self)
    }

    /// Kahn's algorithm with ties broken by ascending step index, so the
    /// returned order is deterministic.
    pub fn topological_order(&self) -> Result<Vec<usize>, GraphError> {
        let n = self.nodes.len();
        let mut indegree = vec![0usize; n];
        let mut successors: Vec<Vec<usize>> = vec![Vec::new(); n];
        for edge in &self.edges {
            successors[edge.source].push(edge.target);
            indegree[edge.target] += 1;
        }
        let mut ready: BinaryHeap<Reverse<usize>> = indegree
            .iter()
            .enumerate()
            .filter(|&(_, &d)| d == 0)
            .map(|(i, _)| Reverse(i))
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(node)) = ready.pop() {
            order.push(node);
            for &next in &successors[node] {
                indegree[next] -= 1;
                if indegree[next] == 0 {
                    ready.push(Reverse(next));
                }
            }
        }
        if order.len() != n {
            return Err(GraphError::CycleDetected);
        }
        Ok(order)
    }

    /// The node holding the trace's conclusion: a step flagged `is_final`
    /// when it is a sink, otherwise the sink with the largest step index.
    pub fn terminal_node(&self) -> Result<usize, GraphError> {
        if self.nodes.is_empty() {
            return Err(GraphError::EmptyTrace);
        }
        let mut has_outgoing = vec![false; self.nodes.len()];
        for edge in &self.edges {
            has_outgoing[edge.source] = true;
        }
        let mut last_sink = None;
        let mut last_final_sink = None;
        for (i, out) in has_outgoing.iter().enumerate() {
            if *out {
                continue;
            }
            last_sink = Some(i);
            if self.nodes[i].is_final {
                last_final_sink = Some(i);
            }
        }
        Ok(last_final_sink
            .or(last_sink)
            .expect("an acyclic graph has at least one sink"))
    }

    /// Graphviz rendering with node labels `i: text (P=0.xx)` and edge
    /// labels `label/trust`.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph reasoning {\n  rankdir=TB;\n");
        if let Some(style) = self.agent_style {
            let _ = writeln!(out, "  label=\"{style}\";");
        }
        for (i, step) in self.nodes.iter().enumerate() {
            let label = match &self.beliefs {
                Some(beliefs) => format!("{i}: {} (P={:.2})", step.text, beliefs[i]),
                None => format!("{i}: {}", step.text),
            };
            let _ = writeln!(out, "  n{i} [label=\"{}\"];", dot_escape(&label));
        }
        for edge in &self.edges {
            let _ = writeln!(
                out,
                "  n{} -> n{} [label=\"{}/{:.2}\"];",
                edge.source,
                edge.target,
                edge.label,
                edge.trust.get()
            );
        }
        out.push_str("}\n");
        out
    }
}

/// Builds a validated graph, assigning each edge's trust from its label via
/// the calibration map.
pub fn build_graph(
    steps: Vec<ReasoningStep>,
    edges: &[(usize, usize, EntailmentLabel)],
    calibration: &Calibration,
) -> Result<ReasoningGraph, GraphError> {
    let edges = edges
        .iter()
        .map(|&(source, target, label)| {
            Ok(Edge {
                source,
                target,
                label,
                trust: trust_of(label, calibration)?,
            })
        })
        .collect::<Result<Vec<_>, EntailmentError>>()?;
    ReasoningGraph::new(steps, edges)
}

fn dot_escape(text: &str) -> String {
    let mut escaped = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '"' => escaped.push_str("\\\""),
            '\\' => escaped.push_str("\\\\"),
            '\n' => escaped.push_str("\\n"),
            '\r' => {}
            other => escaped.push(other),
        }
    }
    escaped
}
