//! Synthetic scenarios for benchmarks and fuzzing.
//!
//! [`random_scenario`] produces arbitrary event mixes, including events that
//! the engine will reject (unknown ids, mismatched topics, repeated hops).
//! The remaining builders produce well-formed workloads of a given size.

use rand::seq::IndexedRandom;
use rand::Rng;
use relprop_core::{
    AgentId, ChainId, Comparator, ConfigKey, DimensionedReliability, MessageContent, MessageId,
    Polarity, Reliability, ScenarioEvent, Target,
};

#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub agents: usize,
    /// Events after the agent declarations.
    pub events: usize,
    /// Use the dimensions `a` and `b` instead of scalar reliabilities.
    pub dimensioned: bool,
}

fn agent(i: usize) -> AgentId {
    AgentId::new(format!("A{i}")).expect("valid id")
}

fn message(i: usize) -> MessageId {
    MessageId::new(format!("M{i}")).expect("valid id")
}

fn scalar(x: f64) -> DimensionedReliability {
    DimensionedReliability::scalar(Reliability::new(x).expect("finite"))
}

fn random_reliability<R: Rng>(rng: &mut R, dimensioned: bool) -> DimensionedReliability {
    if !dimensioned {
        return scalar(rng.random_range(-1.0..=1.0));
    }
    let mut out = DimensionedReliability::new();
    for dim in ["a", "b"] {
        if out.is_empty() || rng.random_bool(0.7) {
            out.insert(dim, Reliability::new(rng.random_range(-1.0..=1.0)).expect("finite"));
        }
    }
    out
}

/// A random event sequence: `shape.agents` declarations followed by up to
/// `shape.events` events.
pub fn random_scenario<R: Rng>(rng: &mut R, shape: Shape) -> Vec<ScenarioEvent> {
    let agents = shape.agents.max(2);
    let mut events: Vec<ScenarioEvent> = (0..agents)
        .map(|i| ScenarioEvent::DeclareAgent {
            id: agent(i),
            reliability: random_reliability(rng, shape.dimensioned),
            inertia: rng.random_range(0.0..3.0),
        })
        .collect();
    // (id, destination) of every message the generator has tried to create
    let mut sent: Vec<(MessageId, usize)> = Vec::new();
    let chains = ["K1", "K2"].map(|c| ChainId::new(c).expect("valid id"));
    let topics = ["t", "u"];

    for _ in 0..shape.events {
        let from = rng.random_range(0..agents);
        let mut to = rng.random_range(0..agents);
        if to == from && rng.random_bool(0.9) {
            to = (to + 1) % agents;
        }
        let chain = if rng.random_bool(0.3) {
            chains.choose(rng).cloned()
        } else {
            None
        };
        let declared = rng
            .random_bool(0.5)
            .then(|| random_reliability(rng, shape.dimensioned));
        let next_id = message(sent.len());
        let event = match rng.random_range(0..100) {
            0..=29 => {
                let topic = topics.choose(rng).expect("non-empty").to_string();
                let content = if topic == "t" {
                    MessageContent::Numeric {
                        topic,
                        value: rng.random_range(0..4) as f64,
                    }
                } else {
                    MessageContent::Proposition {
                        topic,
                        claim: ["x", "y"].choose(rng).expect("non-empty").to_string(),
                        polarity: if rng.random_bool(0.5) {
                            Polarity::Affirmed
                        } else {
                            Polarity::Negated
                        },
                    }
                };
                sent.push((next_id.clone(), to));
                ScenarioEvent::Send {
                    id: next_id,
                    chain,
                    from: agent(from),
                    to: agent(to),
                    content,
                    declared,
                }
            }
            30..=49 if !sent.is_empty() => {
                let (prior, at) = sent.choose(rng).cloned().expect("non-empty");
                sent.push((next_id.clone(), to));
                ScenarioEvent::Forward {
                    id: next_id,
                    prior,
                    from: agent(at),
                    to: agent(to),
                    value: rng.random_bool(0.3).then(|| rng.random_range(0..4) as f64),
                }
            }
            50..=69 => {
                let target = match sent.choose(rng) {
                    Some((m, _)) if rng.random_bool(0.6) => Target::Message(m.clone()),
                    _ => Target::Agent(agent(rng.random_range(0..agents))),
                };
                sent.push((next_id.clone(), to));
                ScenarioEvent::Judge {
                    id: next_id,
                    chain,
                    from: agent(from),
                    to: agent(to),
                    target,
                    judged: random_reliability(rng, shape.dimensioned),
                    declared,
                }
            }
            70..=84 => ScenarioEvent::Reconcile {
                topic: topics.choose(rng).expect("non-empty").to_string(),
            },
            85..=94 if sent.len() >= 2 => {
                let a = sent.choose(rng).expect("non-empty").0.clone();
                let b = sent.choose(rng).expect("non-empty").0.clone();
                ScenarioEvent::Observe { id: a, reference: b }
            }
            95..=97 => {
                let (key, value) = match rng.random_range(0..5) {
                    0 => (ConfigKey::Alpha, rng.random_range(0.0..=1.0)),
                    1 => (ConfigKey::LambdaAgree, rng.random_range(0.0..1.0)),
                    2 => (ConfigKey::LambdaDisagree, rng.random_range(0.0..1.0)),
                    3 => (ConfigKey::Epsilon, rng.random_range(0.0..2.0)),
                    _ => (ConfigKey::DimDefault, rng.random_range(-1.0..=1.0)),
                };
                ScenarioEvent::Configure { key, value }
            }
            _ => ScenarioEvent::Expect {
                entity: Target::Agent(agent(from)),
                dimension: None,
                comparator: Comparator::Ge,
                value: -1.0,
            },
        };
        events.push(event);
    }
    events
}

/// One chain `A0 -> A1 -> ... -> A{len}` carrying a numeric value, followed
/// by a judgement of its last message.
pub fn forward_chain(len: usize) -> Vec<ScenarioEvent> {
    let len = len.max(1);
    let mut events: Vec<_> = (0..=len + 1)
        .map(|i| ScenarioEvent::DeclareAgent {
            id: agent(i),
            reliability: scalar(0.9 - 0.4 * (i as f64 / (len + 1) as f64)),
            inertia: 1.0,
        })
        .collect();
    events.push(ScenarioEvent::Send {
        id: message(0),
        chain: None,
        from: agent(0),
        to: agent(1),
        content: MessageContent::Numeric {
            topic: "t".into(),
            value: 1.0,
        },
        declared: None,
    });
    for i in 1..len {
        events.push(ScenarioEvent::Forward {
            id: message(i),
            prior: message(i - 1),
            from: agent(i),
            to: agent(i + 1),
            value: None,
        });
    }
    events.push(ScenarioEvent::Judge {
        id: MessageId::new("J").expect("valid id"),
        chain: None,
        from: agent(len),
        to: agent(len + 1),
        target: Target::Message(message(len - 1)),
        judged: scalar(1.0),
        declared: None,
    });
    events
}

/// `n` sources reporting on one topic to a sink, then one reconciliation.
/// Values alternate between two clusters so both agreement and
/// disagreement occur.
pub fn fan_in(n: usize) -> Vec<ScenarioEvent> {
    let n = n.max(2);
    let sink = agent(n);
    let mut events: Vec<_> = (0..=n)
        .map(|i| ScenarioEvent::DeclareAgent {
            id: agent(i),
            reliability: scalar(((i * 37) % 19) as f64 / 10.0 - 0.9),
            inertia: 1.0,
        })
        .collect();
    for i in 0..n {
        events.push(ScenarioEvent::Send {
            id: message(i),
            chain: None,
            from: agent(i),
            to: sink.clone(),
            content: MessageContent::Numeric {
                topic: "t".into(),
                value: if i % 3 == 0 { 10.0 } else { 0.0 },
            },
            declared: None,
        });
    }
    events.push(ScenarioEvent::Reconcile { topic: "t".into() });
    events
}
