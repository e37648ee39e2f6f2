//! Reliability propagation over networks of agents and messages.
//!
//! Agents and messages carry reliabilities in `[-1, 1]`, optionally split
//! into named dimensions. Messages travel in chains; changes to a message's
//! reliability fall back on its sender and are cycle-checked against the
//! chain's history. A [`BeliefStore`] answers threshold queries over the
//! statements carried by messages.
//!
//! Scenarios are small line-oriented scripts, see [`scenario`], run by the
//! [`Simulator`].

pub mod algebra;
pub mod engine;
pub mod error;
pub mod event;
pub mod network;
pub mod propagation;
pub mod scenario;
pub mod threshold;
pub mod trace;

pub use algebra::{
    align_dimensions, and_combine, average, clamp, dominance_weights, lift_elementwise,
    or_combine, weighted_mean, DimensionedReliability, Reliability, WeightVector,
    DEFAULT_DIMENSION, TOLERANCE,
};
pub use engine::{run_scenario, RunConfig, Simulator};
pub use error::{Error, Result};
pub use event::{Comparator, ConfigKey, ScenarioEvent};
pub use network::{
    Agent, AgentId, Cause, ChainHistory, ChainId, CycleDetected, Direction, Edge, HistoryEntry,
    Hop, Message, MessageContent, MessageId, Network, Polarity, Target,
};
pub use propagation::{
    backpropagate_to_agent, chain_combine, chain_decompose, contents_agree, dampen,
    merge_reliability_judgements, message_initial_reliability, reconcile_pair, reconcile_set,
    BackPropagation, Decomposition, Delta, PropagationConfig, ReliabilityDelta,
};
pub use scenario::{parse_scenario, parse_scenario_lines};
pub use threshold::{Acceptance, BeliefStore, Statement, StatementKey};
pub use trace::{to_tsv, write_tsv, TraceKind, TraceRecord, TSV_HEADER};
