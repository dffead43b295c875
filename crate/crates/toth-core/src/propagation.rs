//! Bayesian confidence propagation, graph entropy, scoring, and selection.
//!
//! The update rule is
//!
//! ```text
//! f(p, θ) = p·θ / (p·θ + (1 − p)·(1 − θ))
//! ```
//!
//! applied along each edge in topological order. Parentless nodes keep the
//! prior; a node with several parents averages the per-parent updates. A
//! graph is then scored by mean belief minus mean binary entropy, so high
//! confidence is rewarded and residual uncertainty is charged for.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agents::AgentStyle;
use crate::graph::{GraphError, ReasoningGraph};

pub const DEFAULT_PRIOR: f64 = 0.5;

#[derive(Debug, Error)]
pub enum PropagationError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("edge {source} -> {target} carries no usable trust score")]
    MissingTrust { source: usize, target: usize },
    #[error("prior {0} is outside [0, 1]")]
    InvalidPrior(f64),
    #[error("supplied order is not a topological order of the graph")]
    InvalidOrder,
    #[error("cannot score an empty belief set")]
    EmptyGraph,
    #[error("graph has no propagated beliefs")]
    BeliefsMissing,
    #[error("no valid graph to select from")]
    NoValidGraph,
}

/// Posterior update along one trusted edge.
///
/// `f(0.5, θ) = θ` and `f(p, 0.5) = p`. When the denominator vanishes
/// (`p` and `θ` at opposite extremes) the prior is returned unchanged —
/// see [`bayes_update_flagged`] for detecting that case.
pub fn bayes_update(p: f64, theta: f64) -> f64 {
    bayes_update_flagged(p, theta).0
}

/// Like [`bayes_update`], also reporting whether the degenerate
/// zero-denominator case was hit.
pub fn bayes_update_flagged(p: f64, theta: f64) -> (f64, bool) {
    debug_assert!((0.0..=1.0).contains(&p), "belief {p} out of range");
    debug_assert!((0.0..=1.0).contains(&theta), "trust {theta} out of range");
    let numerator = p * theta;
    let denominator = numerator + (1.0 - p) * (1.0 - theta);
    if denominator == 0.0 {
        return (p, true);
    }
    (numerator / denominator, false)
}

/// Per-node posteriors produced by a propagation pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefState {
    values: Vec<f64>,
    prior: f64,
    degenerate: bool,
}

impl BeliefState {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn prior(&self) -> f64 {
        self.prior
    }

    /// True when any update hit the zero-denominator case; such graphs are
    /// flagged rather than rejected.
    pub fn degenerate(&self) -> bool {
        self.degenerate
    }
}

/// Propagates beliefs through the graph in deterministic topological order.
pub fn propagate(graph: &ReasoningGraph, prior: f64) -> Result<BeliefState, PropagationError> {
    let order = graph.topological_order()?;
    propagate_in_order(graph, prior, &order)
}

/// Propagation over a caller-supplied topological order. The result does
/// not depend on which valid order is chosen; this entry point exists so
/// that can be checked.
pub fn propagate_in_order(
    graph: &ReasoningGraph,
    prior: f64,
    order: &[usize],
) -> Result<BeliefState, PropagationError> {
    if !(0.0..=1.0).contains(&prior) {
        return Err(PropagationError::InvalidPrior(prior));
    }
    let n = graph.nodes().len();
    validate_order(graph, order, n)?;

    // parent lists keep edge-list order, so the multi-parent mean is summed
    // identically no matter which topological order drives the visit
    let mut parents: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for edge in graph.edges() {
        let trust = edge.trust.get();
        if !(0.0..=1.0).contains(&trust) {
            return Err(PropagationError::MissingTrust {
                source: edge.source,
                target: edge.target,
            });
        }
        parents[edge.target].push((edge.source, trust));
    }

    let mut values = vec![f64::NAN; n];
    let mut degenerate = false;
    for &node in order {
        values[node] = if parents[node].is_empty() {
            prior
        } else {
            let mut sum = 0.0;
            for &(parent, trust) in &parents[node] {
                let (updated, hit_degenerate) = bayes_update_flagged(values[parent], trust);
                degenerate |= hit_degenerate;
                sum += updated;
            }
            sum / parents[node].len() as f64
        };
    }

    Ok(BeliefState {
        values,
        prior,
        degenerate,
    })
}

fn validate_order(
    graph: &ReasoningGraph,
    order: &[usize],
    n: usize,
) -> Result<(), PropagationError> {
    if order.len() != n {
        return Err(PropagationError::InvalidOrder);
    }
    let mut position = vec![usize::MAX; n];
    for (pos, &node) in order.iter().enumerate() {
        if node >= n || position[node] != usize::MAX {
            return Err(PropagationError::InvalidOrder);
        }
        position[node] = pos;
    }
    for edge in graph.edges() {
        if position[edge.source] >= position[edge.target] {
            return Err(PropagationError::InvalidOrder);
        }
    }
    Ok(())
}

/// Logarithm base used for the per-node entropy terms. Bits keep each term
/// in [0, 1], which is what makes the mean "normalized".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntropyBase {
    #[default]
    Bits,
    Nats,
}

/// Two-outcome entropy of `p`, with `h(0) = h(1) = 0` by continuity.
pub fn binary_entropy(p: f64, base: EntropyBase) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        return 0.0;
    }
    let h = match base {
        EntropyBase::Bits => p * p.log2() + (1.0 - p) * (1.0 - p).log2(),
        EntropyBase::Nats => p * p.ln() + (1.0 - p) * (1.0 - p).ln(),
    };
    -h
}

/// Mean per-node entropy of a belief state.
pub fn graph_entropy(beliefs: &BeliefState, base: EntropyBase) -> Result<f64, PropagationError> {
    mean_entropy(beliefs.values(), base)
}

fn mean_entropy(values: &[f64], base: EntropyBase) -> Result<f64, PropagationError> {
    if values.is_empty() {
        return Err(PropagationError::EmptyGraph);
    }
    let total: f64 = values.iter().map(|&p| binary_entropy(p, base)).sum();
    Ok(total / values.len() as f64)
}

/// Confidence/uncertainty trade-off for one graph.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphScore {
    /// Mean node belief.
    pub mu: f64,
    /// Mean per-node binary entropy.
    pub entropy: f64,
    /// `mu - entropy`.
    pub score: f64,
}

/// Scores a propagated graph: mean belief minus mean entropy.
pub fn graph_score(
    graph: &ReasoningGraph,
    base: EntropyBase,
) -> Result<GraphScore, PropagationError> {
    let beliefs = graph.beliefs().ok_or(PropagationError::BeliefsMissing)?;
    if beliefs.is_empty() {
        return Err(PropagationError::EmptyGraph);
    }
    let mu = beliefs.iter().sum::<f64>() / beliefs.len() as f64;
    let entropy = mean_entropy(beliefs, base)?;
    Ok(GraphScore {
        mu,
        entropy,
        score: mu - entropy,
    })
}

/// Picks the index of the best-scoring candidate. `None` entries are
/// candidates that failed upstream and are excluded. Ties go to the style
/// appearing earliest in `tie_break`.
pub fn select_best(
    candidates: &[Option<(AgentStyle, f64)>],
    tie_break: &[AgentStyle],
) -> Result<usize, PropagationError> {
    let rank = |style: AgentStyle| {
        tie_break
            .iter()
            .position(|&t| t == style)
            .unwrap_or(usize::MAX)
    };
    let mut best: Option<(usize, AgentStyle, f64)> = None;
    for (index, candidate) in candidates.iter().enumerate() {
        let Some((style, score)) = *candidate else {
            continue;
        };
        if score.is_nan() {
            continue;
        }
        let better = match best {
            None => true,
            Some((_, best_style, best_score)) => {
                score > best_score || (score == best_score && rank(style) < rank(best_style))
            }
        };
        if better {
            best = Some((index, style, score));
        }
    }
    best.map(|(index, _, _)| index)
        .ok_or(PropagationError::NoValidGraph)
}
