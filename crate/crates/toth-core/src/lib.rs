//! Multi-style reasoning over entailment-calibrated graphs.
//!
//! Three solver agents (abductive, deductive, inductive) each answer a
//! question with a numbered reasoning trace. Every trace is turned into a
//! directed acyclic reasoning graph whose edges carry trust scores derived
//! from natural-language-inference labels. Beliefs are pushed through each
//! graph with a Bayesian update rule, graphs are ranked by mean confidence
//! minus normalized entropy, and the winning graph's terminal step yields
//! the final answer.
//!
//! The crate is organized around that flow:
//!
//! - [`graph`]: reasoning-graph data model and structural algorithms
//! - [`trace`]: parsing model output into steps and normalized answers
//! - [`entailment`]: NLI providers and the label-to-trust calibration
//! - [`propagation`]: belief propagation, entropy, scoring, selection
//! - [`agents`]: style-conditioned prompts and generation providers
//! - [`pipeline`]: the end-to-end solve orchestration
//! - [`harness`]: datasets, baselines, and accuracy reports

pub mod agents;
pub mod entailment;
pub mod graph;
pub mod harness;
mod http;
pub mod pipeline;
pub mod propagation;
pub mod trace;

pub use agents::{AgentError, AgentStyle, DecodingConfig, GenerationProvider, StubGeneration};
pub use entailment::{
    Calibration, EntailmentError, EntailmentLabel, EntailmentProvider, StubEntailment, TrustScore,
};
pub use graph::{Edge, GraphError, ReasoningGraph, ReasoningStep};
pub use pipeline::{PipelineConfig, PipelineError, ToThResult};
pub use propagation::{BeliefState, EntropyBase, GraphScore, PropagationError};
pub use trace::{Answer, AnswerKind, ParsedTrace, TraceError};
