//! Agents, messages and message chains.
//!
//! Every message belongs to a chain. A chain remembers each directed hop
//! `(source, destination, direction)` taken on its behalf; re-taking a hop
//! in the same direction is a cycle and is refused. Coming back to an earlier
//! agent along a new edge (typically a backward repercussion) is allowed.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::algebra::DimensionedReliability;
use crate::error::{Error, Result};

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub struct $name(String);

        impl $name {
            pub fn new(token: impl Into<String>) -> Result<Self> {
                let token = token.into();
                if token.is_empty() || token.chars().any(char::is_whitespace) {
                    return Err(Error::InvalidId(token));
                }
                Ok(Self(token))
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

id_type!(
    /// Identifies an agent. An agent with several competences is modelled as
    /// several agents.
    AgentId
);
id_type!(MessageId);
id_type!(ChainId);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Direction {
    Forward,
    Backward,
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Forward => "fwd",
            Direction::Backward => "back",
        })
    }
}

/// A directed edge between two agents.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub source: AgentId,
    pub destination: AgentId,
    pub direction: Direction,
}

impl Edge {
    pub fn new(source: AgentId, destination: AgentId, direction: Direction) -> Self {
        Self {
            source,
            destination,
            direction,
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{} {}", self.source, self.destination, self.direction)
    }
}

/// What a reliability judgement is about.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Target {
    Agent(AgentId),
    Message(MessageId),
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Agent(id) => write!(f, "agent:{id}"),
            Target::Message(id) => write!(f, "msg:{id}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Polarity {
    Affirmed,
    Negated,
}

impl Polarity {
    pub fn symbol(self) -> char {
        match self {
            Polarity::Affirmed => '+',
            Polarity::Negated => '-',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MessageContent {
    Numeric {
        topic: String,
        value: f64,
    },
    Proposition {
        topic: String,
        claim: String,
        polarity: Polarity,
    },
    ReliabilityJudgement {
        target: Target,
        judged: DimensionedReliability,
    },
}

impl MessageContent {
    pub fn topic(&self) -> Option<&str> {
        match self {
            MessageContent::Numeric { topic, .. } | MessageContent::Proposition { topic, .. } => {
                Some(topic)
            }
            MessageContent::ReliabilityJudgement { .. } => None,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        match self {
            MessageContent::Numeric { topic, value } => {
                if topic.is_empty() {
                    return Err(Error::InvalidEvent("empty topic".into()));
                }
                if !value.is_finite() {
                    return Err(Error::InvalidNumeric(*value));
                }
            }
            MessageContent::Proposition { topic, claim, .. } => {
                if topic.is_empty() || claim.is_empty() {
                    return Err(Error::InvalidEvent("empty topic or claim".into()));
                }
            }
            MessageContent::ReliabilityJudgement { .. } => {}
        }
        Ok(())
    }
}

impl fmt::Display for MessageContent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MessageContent::Numeric { topic, value } => write!(f, "{topic}={value}"),
            MessageContent::Proposition {
                topic,
                claim,
                polarity,
            } => write!(f, "{topic}:{claim}:{}", polarity.symbol()),
            MessageContent::ReliabilityJudgement { target, judged } => {
                write!(f, "{target} judged {judged}")
            }
        }
    }
}

/// One step of a chain, with the content and reliability carried at the time.
#[derive(Debug, Clone, PartialEq)]
pub struct Hop {
    pub source: AgentId,
    pub destination: AgentId,
    pub direction: Direction,
    pub value: MessageContent,
    pub reliability: DimensionedReliability,
}

impl Hop {
    pub fn new(
        source: AgentId,
        destination: AgentId,
        direction: Direction,
        value: MessageContent,
        reliability: DimensionedReliability,
    ) -> Result<Self> {
        if source == destination {
            return Err(Error::InvalidEvent(format!(
                "hop from `{source}` to itself"
            )));
        }
        Ok(Self {
            source,
            destination,
            direction,
            value,
            reliability,
        })
    }

    pub fn edge(&self) -> Edge {
        Edge::new(self.source.clone(), self.destination.clone(), self.direction)
    }
}

/// Signal that a hop would re-traverse an edge already in the history.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleDetected {
    pub edge: Edge,
}

impl fmt::Display for CycleDetected {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "edge {} already traversed", self.edge)
    }
}

impl std::error::Error for CycleDetected {}

/// Ordered hops without a repeated directed edge.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ChainHistory {
    hops: Vec<Hop>,
    edges: BTreeSet<Edge>,
}

impl ChainHistory {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn hops(&self) -> &[Hop] {
        &self.hops
    }

    pub fn len(&self) -> usize {
        self.hops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hops.is_empty()
    }

    pub fn has_traversed(&self, edge: &Edge) -> bool {
        self.edges.contains(edge)
    }

    /// Appends `hop` unless its edge is already present. Nothing changes on
    /// rejection.
    pub fn push(&mut self, hop: Hop) -> Result<(), CycleDetected> {
        let edge = hop.edge();
        if self.edges.contains(&edge) {
            return Err(CycleDetected { edge });
        }
        self.edges.insert(edge);
        self.hops.push(hop);
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cause {
    Message(MessageId),
    Event(String),
}

impl fmt::Display for Cause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cause::Message(id) => write!(f, "msg:{id}"),
            Cause::Event(tag) => f.write_str(tag),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry {
    pub prior: DimensionedReliability,
    pub cause: Cause,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Agent {
    id: AgentId,
    reliability: DimensionedReliability,
    inertia: f64,
    history: Vec<HistoryEntry>,
}

impl Agent {
    pub const DEFAULT_INERTIA: f64 = 1.0;

    pub fn new(id: AgentId, reliability: DimensionedReliability, inertia: f64) -> Result<Self> {
        if !inertia.is_finite() || inertia < 0.0 {
            return Err(Error::InvalidParameter {
                name: "inertia",
                value: inertia,
            });
        }
        Ok(Self {
            id,
            reliability,
            inertia,
            history: Vec::new(),
        })
    }

    pub fn id(&self) -> &AgentId {
        &self.id
    }

    pub fn reliability(&self) -> &DimensionedReliability {
        &self.reliability
    }

    pub fn inertia(&self) -> f64 {
        self.inertia
    }

    /// One entry per update applied, oldest first.
    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    /// Replaces the reliability, records the previous one and adds to inertia.
    pub(crate) fn record_update(
        &mut self,
        reliability: DimensionedReliability,
        absorbed: f64,
        cause: Cause,
    ) {
        debug_assert!(absorbed >= 0.0);
        let prior = std::mem::replace(&mut self.reliability, reliability);
        self.history.push(HistoryEntry { prior, cause });
        self.inertia += absorbed;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    id: MessageId,
    chain: ChainId,
    source: AgentId,
    destination: AgentId,
    prior: Option<MessageId>,
    content: MessageContent,
    reliability: DimensionedReliability,
    inertia: f64,
    hops: ChainHistory,
}

impl Message {
    /// Builds a sent message whose first hop is the forward delivery from
    /// `source` to `destination`.
    pub fn sent(
        id: MessageId,
        chain: ChainId,
        source: AgentId,
        destination: AgentId,
        prior: Option<MessageId>,
        content: MessageContent,
        reliability: DimensionedReliability,
    ) -> Result<Self> {
        content.validate()?;
        let hop = Hop::new(
            source.clone(),
            destination.clone(),
            Direction::Forward,
            content.clone(),
            reliability.clone(),
        )?;
        let mut hops = ChainHistory::new();
        hops.push(hop).expect("first hop of a fresh history");
        Ok(Self {
            id,
            chain,
            source,
            destination,
            prior,
            content,
            reliability,
            inertia: Agent::DEFAULT_INERTIA,
            hops,
        })
    }

    pub fn id(&self) -> &MessageId {
        &self.id
    }

    pub fn chain(&self) -> &ChainId {
        &self.chain
    }

    pub fn source(&self) -> &AgentId {
        &self.source
    }

    pub fn destination(&self) -> &AgentId {
        &self.destination
    }

    /// The message this one was forwarded from.
    pub fn prior(&self) -> Option<&MessageId> {
        self.prior.as_ref()
    }

    pub fn content(&self) -> &MessageContent {
        &self.content
    }

    pub fn reliability(&self) -> &DimensionedReliability {
        &self.reliability
    }

    pub fn inertia(&self) -> f64 {
        self.inertia
    }

    /// Hops taken by this message: its delivery, then any backward
    /// repercussions travelling over its link.
    pub fn hops(&self) -> &[Hop] {
        self.hops.hops()
    }

    /// Reliability at the time the message was sent.
    pub fn initial_reliability(&self) -> &DimensionedReliability {
        &self.hops.hops()[0].reliability
    }

    pub fn has_traversed(&self, edge: &Edge) -> bool {
        self.hops.has_traversed(edge)
    }

    /// Returns a copy with `hop` appended, or [`CycleDetected`] if its edge is
    /// already among the message's hops.
    pub fn extend_chain(&self, hop: Hop) -> Result<Message, CycleDetected> {
        if self.hops.has_traversed(&hop.edge()) {
            return Err(CycleDetected { edge: hop.edge() });
        }
        let mut next = self.clone();
        next.hops.push(hop)?;
        Ok(next)
    }

    pub(crate) fn record_update(&mut self, reliability: DimensionedReliability, absorbed: f64) {
        self.reliability = reliability;
        self.inertia += absorbed;
    }

    pub(crate) fn push_hop(&mut self, hop: Hop) {
        // The chain-wide history has already admitted this edge.
        let _ = self.hops.push(hop);
    }
}

/// Registry of agents, messages and chain histories for one run.
#[derive(Debug, Clone, Default)]
pub struct Network {
    agents: BTreeMap<AgentId, Agent>,
    messages: BTreeMap<MessageId, Message>,
    chains: BTreeMap<ChainId, ChainHistory>,
    chain_counter: u64,
}

impl Network {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_agent(&mut self, agent: Agent) -> Result<()> {
        if self.agents.contains_key(agent.id()) {
            return Err(Error::DuplicateId(agent.id().to_string()));
        }
        self.agents.insert(agent.id().clone(), agent);
        Ok(())
    }

    pub fn agent(&self, id: &AgentId) -> Result<&Agent> {
        self.agents
            .get(id)
            .ok_or_else(|| Error::UnknownAgent(id.to_string()))
    }

    pub(crate) fn agent_mut(&mut self, id: &AgentId) -> Result<&mut Agent> {
        self.agents
            .get_mut(id)
            .ok_or_else(|| Error::UnknownAgent(id.to_string()))
    }

    pub fn agents(&self) -> impl Iterator<Item = &Agent> {
        self.agents.values()
    }

    pub fn message(&self, id: &MessageId) -> Result<&Message> {
        self.messages
            .get(id)
            .ok_or_else(|| Error::UnknownEntity(id.to_string()))
    }

    pub(crate) fn message_mut(&mut self, id: &MessageId) -> Result<&mut Message> {
        self.messages
            .get_mut(id)
            .ok_or_else(|| Error::UnknownEntity(id.to_string()))
    }

    pub fn messages(&self) -> impl Iterator<Item = &Message> {
        self.messages.values()
    }

    pub fn contains_message(&self, id: &MessageId) -> bool {
        self.messages.contains_key(id)
    }

    /// Allocates the next sequential chain id (`C1`, `C2`, ...), skipping ids
    /// already registered explicitly.
    pub fn new_chain(&mut self, origin: &AgentId) -> Result<ChainId> {
        self.agent(origin)?;
        loop {
            self.chain_counter += 1;
            let id = ChainId(format!("C{}", self.chain_counter));
            if !self.chains.contains_key(&id) {
                self.chains.insert(id.clone(), ChainHistory::new());
                return Ok(id);
            }
        }
    }

    /// Registers an explicitly named chain; existing chains are left as is.
    pub fn ensure_chain(&mut self, id: &ChainId) {
        self.chains.entry(id.clone()).or_default();
    }

    pub fn chain(&self, id: &ChainId) -> Option<&ChainHistory> {
        self.chains.get(id)
    }

    pub fn chains(&self) -> impl Iterator<Item = (&ChainId, &ChainHistory)> {
        self.chains.iter()
    }

    /// Records `hop` on `chain`, refusing a repeated edge.
    pub(crate) fn traverse(&mut self, chain: &ChainId, hop: Hop) -> Result<(), CycleDetected> {
        self.chains.entry(chain.clone()).or_default().push(hop)
    }

    pub(crate) fn insert_message(&mut self, message: Message) -> Result<()> {
        if self.messages.contains_key(message.id()) {
            return Err(Error::DuplicateId(message.id().to_string()));
        }
        self.messages.insert(message.id().clone(), message);
        Ok(())
    }

    /// The messages from the chain's origin up to and including `id`,
    /// following `prior` links.
    pub fn path(&self, id: &MessageId) -> Result<Vec<&Message>> {
        let mut path = vec![self.message(id)?];
        while let Some(prior) = path.last().and_then(|m| m.prior()) {
            if path.len() > self.messages.len() {
                break;
            }
            path.push(self.message(prior)?);
        }
        path.reverse();
        Ok(path)
    }

    /// Messages that nothing has been forwarded from.
    pub fn is_forwarded(&self, id: &MessageId) -> bool {
        self.messages.values().any(|m| m.prior() == Some(id))
    }
}
