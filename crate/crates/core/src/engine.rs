//! Deterministic event engine.
//!
//! Events are applied strictly in order. Every reliability change lands in
//! the trace as one `update` (agents, messages) or `assert` (statements)
//! record per dimension; an edge refused by a chain's history shows up as a
//! `suppressed` record instead.
//!
//! A message's *combined* reliability is that of its path, from the chain's
//! origin through `prior` links: its own reliability for a lone message,
//! `alpha * min` otherwise. Judgements on a message, reconciliation and
//! observation all set a new combined value, which is broken down onto the
//! path and pushed back from the leaf towards the origin, each message
//! followed by its sender.

use crate::algebra::{align_dimensions, DimensionedReliability, Reliability};
use crate::error::{Error, Result};
use crate::event::{ConfigKey, ScenarioEvent};
use crate::network::{
    Agent, AgentId, Cause, ChainId, Direction, Hop, Message, MessageContent, MessageId, Network,
    Target,
};
use crate::propagation::{
    chain_combine, chain_decompose, dampen, merge_reliability_judgements,
    message_initial_reliability, reconcile_pair, reconcile_set, Delta, PropagationConfig,
};
use crate::threshold::{BeliefStore, StatementKey};
use crate::trace::{TraceKind, TraceRecord};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub propagation: PropagationConfig,
    /// Acceptance threshold for queries.
    pub tau: Reliability,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            propagation: PropagationConfig::default(),
            tau: Reliability::new(0.5).expect("in range"),
        }
    }
}

impl RunConfig {
    /// Sets one parameter, leaving the config untouched if the result would be
    /// out of range.
    pub fn set(&mut self, key: ConfigKey, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::InvalidNumeric(value));
        }
        let reliability = || {
            if (-1.0..=1.0).contains(&value) {
                Reliability::new(value)
            } else {
                Err(Error::InvalidParameter {
                    name: match key {
                        ConfigKey::Tau => "tau",
                        _ => "dim_default",
                    },
                    value,
                })
            }
        };
        let mut next = self.clone();
        match key {
            ConfigKey::Alpha => next.propagation.alpha = value,
            ConfigKey::LambdaAgree => next.propagation.lambda_agree = value,
            ConfigKey::LambdaDisagree => next.propagation.lambda_disagree = value,
            ConfigKey::Epsilon => next.propagation.epsilon_numeric = value,
            ConfigKey::DimDefault => next.propagation.dimension_default = reliability()?,
            ConfigKey::Tau => next.tau = reliability()?,
        }
        next.propagation.validate()?;
        *self = next;
        Ok(())
    }

    pub fn get(&self, key: ConfigKey) -> f64 {
        match key {
            ConfigKey::Alpha => self.propagation.alpha,
            ConfigKey::LambdaAgree => self.propagation.lambda_agree,
            ConfigKey::LambdaDisagree => self.propagation.lambda_disagree,
            ConfigKey::Epsilon => self.propagation.epsilon_numeric,
            ConfigKey::DimDefault => self.propagation.dimension_default.value(),
            ConfigKey::Tau => self.tau.value(),
        }
    }
}

/// Engine state: network, belief store and the trace so far.
#[derive(Debug, Clone)]
pub struct Simulator {
    config: RunConfig,
    network: Network,
    store: BeliefStore,
    trace: Vec<TraceRecord>,
    events_applied: usize,
}

impl Simulator {
    pub fn new(config: RunConfig) -> Result<Self> {
        config.propagation.validate()?;
        let store = BeliefStore::new(config.propagation.dimension_default);
        Ok(Self {
            config,
            network: Network::new(),
            store,
            trace: Vec::new(),
            events_applied: 0,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.config
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn store(&self) -> &BeliefStore {
        &self.store
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn events_applied(&self) -> usize {
        self.events_applied
    }

    /// Reliability of the path ending in `id`.
    pub fn combined_reliability(&self, id: &MessageId) -> Result<DimensionedReliability> {
        let path = self.network.path(id)?;
        if let [single] = path.as_slice() {
            return Ok(single.reliability().clone());
        }
        let parts: Vec<_> = path.iter().map(|m| m.reliability().clone()).collect();
        chain_combine(&parts, &self.config.propagation)
    }

    /// Applies all events in order, stopping at the first error.
    pub fn run_all<'a, I>(&mut self, events: I) -> Result<()>
    where
        I: IntoIterator<Item = &'a ScenarioEvent>,
    {
        for event in events {
            self.run_event(event)?;
        }
        Ok(())
    }

    /// Applies one event and returns the trace records it produced.
    pub fn run_event(&mut self, event: &ScenarioEvent) -> Result<&[TraceRecord]> {
        let start = self.trace.len();
        let step = self.events_applied + 1;
        match event {
            ScenarioEvent::DeclareAgent {
                id,
                reliability,
                inertia,
            } => {
                let agent = Agent::new(id.clone(), reliability.clone(), *inertia)?;
                self.network.add_agent(agent)?;
            }
            ScenarioEvent::Configure { key, value } => {
                self.config.set(*key, *value)?;
                self.store
                    .set_dimension_default(self.config.propagation.dimension_default);
            }
            ScenarioEvent::Send {
                id,
                chain,
                from,
                to,
                content,
                declared,
            } => {
                if let MessageContent::ReliabilityJudgement { .. } = content {
                    return Err(Error::InvalidEvent("judgements are sent with `judge`".into()));
                }
                let rel = self.initial_reliability(from, declared.as_ref())?;
                self.deliver(id, chain.clone(), from, to, None, content.clone(), rel)?;
            }
            ScenarioEvent::Forward {
                id,
                prior,
                from,
                to,
                value,
            } => self.forward(id, prior, from, to, *value)?,
            ScenarioEvent::Judge {
                id,
                chain,
                from,
                to,
                target,
                judged,
                declared,
            } => self.judge(id, chain.as_ref(), from, to, target, judged, declared.as_ref())?,
            ScenarioEvent::Reconcile { topic } => self.reconcile(topic)?,
            ScenarioEvent::Observe { id, reference } => self.observe(id, reference)?,
            ScenarioEvent::Expect {
                entity,
                dimension,
                comparator,
                value,
            } => {
                let rel = match entity {
                    Target::Agent(a) => self.network.agent(a)?.reliability(),
                    Target::Message(m) => self.network.message(m)?.reliability(),
                };
                let actual = match dimension {
                    Some(dim) => rel.get_or(dim, self.default()).value(),
                    None => rel.average()?.value(),
                };
                if !comparator.holds(actual, *value) {
                    let mut expected = format!("{} {value}", comparator.as_str());
                    if let Some(dim) = dimension {
                        expected = format!("{dim} {expected}");
                    }
                    return Err(Error::ExpectFailed {
                        step,
                        entity: entity.to_string(),
                        expected,
                        actual,
                    });
                }
            }
        }
        self.events_applied = step;
        Ok(&self.trace[start..])
    }

    fn default(&self) -> Reliability {
        self.config.propagation.dimension_default
    }

    fn initial_reliability(
        &self,
        from: &AgentId,
        declared: Option<&DimensionedReliability>,
    ) -> Result<DimensionedReliability> {
        let agent = self.network.agent(from)?;
        message_initial_reliability(agent, declared, &self.config.propagation)
    }

    fn forward(
        &mut self,
        id: &MessageId,
        prior: &MessageId,
        from: &AgentId,
        to: &AgentId,
        value: Option<f64>,
    ) -> Result<()> {
        let prior_msg = self.network.message(prior)?;
        if prior_msg.destination() != from {
            return Err(Error::InvalidEvent(format!(
                "`{from}` cannot forward `{prior}`, which was delivered to `{}`",
                prior_msg.destination()
            )));
        }
        let content = match (prior_msg.content(), value) {
            (content, None) => content.clone(),
            (MessageContent::Numeric { topic, .. }, Some(value)) => MessageContent::Numeric {
                topic: topic.clone(),
                value,
            },
            (_, Some(_)) => {
                return Err(Error::InvalidEvent(format!(
                    "`{prior}` is not numeric; `value` cannot be changed"
                )))
            }
        };
        let chain = prior_msg.chain().clone();
        let rel = self.initial_reliability(from, None)?;
        self.deliver(id, Some(chain), from, to, Some(prior.clone()), content, rel)?;
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn judge(
        &mut self,
        id: &MessageId,
        chain: Option<&ChainId>,
        from: &AgentId,
        to: &AgentId,
        target: &Target,
        judged: &DimensionedReliability,
        declared: Option<&DimensionedReliability>,
    ) -> Result<()> {
        let chain = match target {
            Target::Agent(agent) => {
                self.network.agent(agent)?;
                chain.cloned()
            }
            Target::Message(msg) => {
                let target_chain = self.network.message(msg)?.chain();
                Some(chain.unwrap_or(target_chain).clone())
            }
        };
        let rel = self.initial_reliability(from, declared)?;
        let content = MessageContent::ReliabilityJudgement {
            target: target.clone(),
            judged: judged.clone(),
        };
        let Some(chain) = self.deliver(id, chain, from, to, None, content, rel)? else {
            return Ok(());
        };
        let judgement = [(judged.clone(), self.combined_reliability(id)?)];
        let cfg = self.config.propagation.clone();
        match target {
            Target::Agent(agent_id) => {
                let agent = self.network.agent(agent_id)?;
                let (merged, inertia) =
                    merge_reliability_judgements(agent.reliability(), agent.inertia(), &judgement, &cfg)?;
                let absorbed = inertia - agent.inertia();
                let old = agent.reliability().clone();
                self.record(TraceKind::Update, format!("agent:{agent_id}"), &old, &merged, &chain, false);
                self.network.agent_mut(agent_id)?.record_update(
                    merged,
                    absorbed,
                    Cause::Message(id.clone()),
                );
            }
            Target::Message(msg_id) => {
                let nu = self.combined_reliability(msg_id)?;
                let iota = self.network.message(msg_id)?.inertia();
                let (merged, inertia) = merge_reliability_judgements(&nu, iota, &judgement, &cfg)?;
                self.adjust_path(msg_id, merged, &chain, inertia - iota)?;
            }
        }
        Ok(())
    }

    fn reconcile(&mut self, topic: &str) -> Result<()> {
        let leaves: Vec<MessageId> = self
            .network
            .messages()
            .filter(|m| m.content().topic() == Some(topic))
            .map(|m| m.id().clone())
            .filter(|id| !self.network.is_forwarded(id))
            .collect();
        let views = leaves
            .iter()
            .map(|id| self.view(id))
            .collect::<Result<Vec<_>>>()?;
        if views.len() < 2 {
            return Err(Error::NotEnoughMessages {
                topic: topic.to_string(),
                found: views.len(),
            });
        }
        let refs: Vec<&Message> = views.iter().collect();
        let deltas = reconcile_set(&refs, &self.config.propagation)?;
        for delta in deltas {
            let Target::Message(id) = &delta.target else {
                continue;
            };
            let current = self.combined_reliability(id)?;
            let new = delta.delta.apply_to(&current, self.default());
            self.adjust_path(id, new, &delta.cause, 0.0)?;
        }
        Ok(())
    }

    fn observe(&mut self, id: &MessageId, reference: &MessageId) -> Result<()> {
        if id == reference {
            return Err(Error::InvalidEvent(format!("`{id}` observed against itself")));
        }
        let observed = self.view(id)?;
        let recorded = self.view(reference)?;
        let (delta, _) = reconcile_pair(&observed, &recorded, &self.config.propagation)?;
        let new = delta.delta.apply_to(observed.reliability(), self.default());
        self.adjust_path(id, new, &delta.cause, 0.0)
    }

    /// The message with its reliability replaced by the combined one.
    fn view(&self, id: &MessageId) -> Result<Message> {
        let mut view = self.network.message(id)?.clone();
        view.record_update(self.combined_reliability(id)?, 0.0);
        Ok(view)
    }

    /// Records and inserts a new message after its forward hop has been
    /// admitted on `chain` (a fresh chain when `None`). Returns the chain, or
    /// `None` if the hop was refused.
    #[allow(clippy::too_many_arguments)]
    fn deliver(
        &mut self,
        id: &MessageId,
        chain: Option<ChainId>,
        from: &AgentId,
        to: &AgentId,
        prior: Option<MessageId>,
        content: MessageContent,
        rel: DimensionedReliability,
    ) -> Result<Option<ChainId>> {
        if self.network.contains_message(id) {
            return Err(Error::DuplicateId(id.to_string()));
        }
        self.network.agent(to)?;
        content.validate()?;
        if from == to {
            return Err(Error::InvalidEvent(format!("`{from}` sends to itself")));
        }
        let chain = match chain {
            Some(chain) => {
                self.network.ensure_chain(&chain);
                chain
            }
            None => self.network.new_chain(from)?,
        };
        let message = Message::sent(
            id.clone(),
            chain.clone(),
            from.clone(),
            to.clone(),
            prior,
            content,
            rel,
        )?;
        if self.network.traverse(&chain, message.hops()[0].clone()).is_err() {
            let level = average_or_zero(message.reliability());
            self.suppressed(format!("msg:{id}"), level, &chain);
            return Ok(None);
        }
        self.network.insert_message(message)?;
        self.assert_support(id)?;
        Ok(Some(chain))
    }

    fn assert_support(&mut self, id: &MessageId) -> Result<()> {
        let message = self.network.message(id)?;
        let Some(key) = StatementKey::for_content(message.content()) else {
            return Ok(());
        };
        let message = message.clone();
        let combined = self.combined_reliability(id)?;
        let old = self.store.get(&key).map(|s| s.reliability().clone());
        let new = self.store.assert_with(&message, combined)?.reliability().clone();
        let entity = format!("stmt:{key}");
        match old {
            Some(old) => self.record(TraceKind::Assert, entity, &old, &new, message.chain(), true),
            None => {
                let empty = DimensionedReliability::new();
                self.record(TraceKind::Assert, entity, &empty, &new, message.chain(), false)
            }
        }
        Ok(())
    }

    /// Re-reads every supporting message's combined reliability into the
    /// belief store.
    fn refresh_support(&mut self) -> Result<()> {
        let supporters: Vec<(MessageId, ChainId)> = self
            .network
            .messages()
            .filter(|m| StatementKey::for_content(m.content()).is_some())
            .map(|m| (m.id().clone(), m.chain().clone()))
            .collect();
        for (id, chain) in supporters {
            let combined = self.combined_reliability(&id)?;
            for (key, old, new) in self.store.update_support(&id, &combined) {
                self.record(TraceKind::Assert, format!("stmt:{key}"), &old, &new, &chain, true);
            }
        }
        Ok(())
    }

    /// Sets the combined reliability of the path ending in `leaf` and pushes
    /// the change back towards the origin on `chain`.
    fn adjust_path(
        &mut self,
        leaf: &MessageId,
        new_combined: DimensionedReliability,
        chain: &ChainId,
        absorbed: f64,
    ) -> Result<()> {
        let cfg = self.config.propagation.clone();
        let path: Vec<Message> = self.network.path(leaf)?.into_iter().cloned().collect();
        let new_parts = if path.len() == 1 {
            vec![new_combined]
        } else {
            let parts: Vec<_> = path.iter().map(|m| m.reliability().clone()).collect();
            let old = chain_combine(&parts, &cfg)?;
            let mut target = DimensionedReliability::new();
            for (dim, r) in new_combined.iter() {
                target.insert(dim, Reliability::saturating(r.value().clamp(-cfg.alpha, cfg.alpha)));
            }
            chain_decompose(&parts, &old, &target, &cfg)?.parts
        };

        for (message, new_rel) in path.iter().zip(new_parts).rev() {
            let hop = Hop {
                source: message.destination().clone(),
                destination: message.source().clone(),
                direction: Direction::Backward,
                value: message.content().clone(),
                reliability: new_rel.clone(),
            };
            let agent = self.network.agent(message.source())?.clone();
            if self.network.traverse(chain, hop.clone()).is_err() {
                let m_level = average_or_zero(message.reliability());
                let a_level = average_or_zero(agent.reliability());
                self.suppressed(format!("msg:{}", message.id()), m_level, chain);
                self.suppressed(format!("agent:{}", agent.id()), a_level, chain);
                continue;
            }
            let delta = Delta::between(message.reliability(), &new_rel, cfg.dimension_default);
            let updated = dampen(&agent, &delta, Cause::Message(message.id().clone()), &cfg);

            let entity = format!("msg:{}", message.id());
            self.record(TraceKind::Update, entity, message.reliability(), &new_rel, chain, false);
            let stored = self.network.message_mut(message.id())?;
            stored.record_update(new_rel, if message.id() == leaf { absorbed } else { 0.0 });
            stored.push_hop(hop);

            let entity = format!("agent:{}", agent.id());
            self.record(TraceKind::Update, entity, agent.reliability(), updated.reliability(), chain, false);
            *self.network.agent_mut(agent.id())? = updated;
        }
        self.refresh_support()
    }

    fn record(
        &mut self,
        kind: TraceKind,
        entity: String,
        old: &DimensionedReliability,
        new: &DimensionedReliability,
        cause: &ChainId,
        only_changed: bool,
    ) {
        let (old, new) = align_dimensions(old, new, self.default());
        for ((dim, o), (_, n)) in old.iter().zip(new.iter()) {
            if only_changed && o == n {
                continue;
            }
            self.trace.push(TraceRecord {
                step: self.trace.len() as u64 + 1,
                kind,
                entity: entity.clone(),
                dimension: dim.to_string(),
                old: o.value(),
                new: n.value(),
                cause: cause.clone(),
            });
        }
    }

    fn suppressed(&mut self, entity: String, level: f64, cause: &ChainId) {
        self.trace.push(TraceRecord {
            step: self.trace.len() as u64 + 1,
            kind: TraceKind::Suppressed,
            entity,
            dimension: "-".into(),
            old: level,
            new: level,
            cause: cause.clone(),
        });
    }
}

fn average_or_zero(r: &DimensionedReliability) -> f64 {
    r.average().map(Reliability::value).unwrap_or(0.0)
}

/// Runs `events` on a fresh simulator.
pub fn run_scenario<'a, I>(events: I, config: RunConfig) -> Result<Simulator>
where
    I: IntoIterator<Item = &'a ScenarioEvent>,
{
    let mut sim = Simulator::new(config)?;
    sim.run_all(events)?;
    Ok(sim)
}
