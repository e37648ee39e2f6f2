#![allow(dead_code)]

use proptest::prelude::*;
use relprop_core::{
    AgentId, ChainId, DimensionedReliability, MessageContent, MessageId, Polarity, Reliability,
    ScenarioEvent, Simulator, Target,
};

pub fn aid(s: &str) -> AgentId {
    AgentId::new(s).unwrap()
}

pub fn mid(s: &str) -> MessageId {
    MessageId::new(s).unwrap()
}

pub fn scalar(x: f64) -> DimensionedReliability {
    DimensionedReliability::scalar(Reliability::new(x).unwrap())
}

pub fn agent_av(sim: &Simulator, id: &str) -> f64 {
    sim.network().agent(&aid(id)).unwrap().reliability().average().unwrap().value()
}

pub fn msg_av(sim: &Simulator, id: &str) -> f64 {
    sim.network().message(&mid(id)).unwrap().reliability().average().unwrap().value()
}

pub fn combined_av(sim: &Simulator, id: &str) -> f64 {
    sim.combined_reliability(&mid(id)).unwrap().average().unwrap().value()
}

/// Every stored reliability of agents, messages and statements.
pub fn all_reliabilities(sim: &Simulator) -> Vec<(String, DimensionedReliability)> {
    let net = sim.network();
    net.agents()
        .map(|a| (format!("agent:{}", a.id()), a.reliability().clone()))
        .chain(net.messages().map(|m| (format!("msg:{}", m.id()), m.reliability().clone())))
        .chain(sim.store().statements().map(|s| (format!("stmt:{}", s.key()), s.reliability().clone())))
        .collect()
}

#[derive(Debug, Clone)]
pub enum Op {
    Send { from: usize, to: usize, numeric: bool, value: u8, chain: Option<u8>, declared: Option<f64> },
    Forward { msg: usize, to: usize, value: Option<u8> },
    JudgeAgent { from: usize, to: usize, target: usize, judged: f64 },
    JudgeMessage { from: usize, to: usize, msg: usize, judged: f64, chain: Option<u8> },
    Reconcile { numeric: bool },
    Observe { a: usize, b: usize },
}

fn rel() -> impl Strategy<Value = f64> {
    prop_oneof![Just(-1.0), Just(0.0), Just(1.0), -1.0f64..=1.0]
}

pub fn op(agents: usize) -> impl Strategy<Value = Op> {
    let a = move || 0..agents;
    prop_oneof![
        3 => (a(), a(), any::<bool>(), 0u8..3, proptest::option::of(0u8..2), proptest::option::of(rel()))
            .prop_map(|(from, to, numeric, value, chain, declared)| Op::Send { from, to, numeric, value, chain, declared }),
        2 => (0usize..64, a(), proptest::option::of(0u8..3)).prop_map(|(msg, to, value)| Op::Forward { msg, to, value }),
        1 => (a(), a(), a(), rel()).prop_map(|(from, to, target, judged)| Op::JudgeAgent { from, to, target, judged }),
        2 => (a(), a(), 0usize..64, rel(), proptest::option::of(0u8..2))
            .prop_map(|(from, to, msg, judged, chain)| Op::JudgeMessage { from, to, msg, judged, chain }),
        2 => any::<bool>().prop_map(|numeric| Op::Reconcile { numeric }),
        1 => (0usize..64, 0usize..64).prop_map(|(a, b)| Op::Observe { a, b }),
    ]
}

fn agent_name(i: usize) -> AgentId {
    aid(&format!("A{i}"))
}

/// Turns ops into events. Message references index into the messages
/// created so far, so most events are valid; the rest must be rejected
/// without touching the state.
pub fn events(initial: &[(f64, f64)], ops: &[Op]) -> Vec<ScenarioEvent> {
    let mut out: Vec<ScenarioEvent> = initial
        .iter()
        .enumerate()
        .map(|(i, &(r, inertia))| ScenarioEvent::DeclareAgent { id: agent_name(i), reliability: scalar(r), inertia })
        .collect();
    let chain = |c: Option<u8>| c.map(|c| ChainId::new(format!("K{c}")).unwrap());
    let mut created: Vec<(MessageId, usize)> = Vec::new();
    for op in ops {
        let next = mid(&format!("M{}", created.len()));
        let pick = |i: usize| created.get(i % created.len().max(1)).cloned();
        let event = match op.clone() {
            Op::Send { from, to, numeric, value, chain: c, declared } => {
                created.push((next.clone(), to));
                let content = if numeric {
                    MessageContent::Numeric { topic: "t".into(), value: value as f64 }
                } else {
                    MessageContent::Proposition {
                        topic: "p".into(),
                        claim: format!("c{}", value % 2),
                        polarity: if value == 2 { Polarity::Negated } else { Polarity::Affirmed },
                    }
                };
                ScenarioEvent::Send { id: next, chain: chain(c), from: agent_name(from), to: agent_name(to), content, declared: declared.map(scalar) }
            }
            Op::Forward { msg, to, value } => {
                let Some((prior, at)) = pick(msg) else { continue };
                created.push((next.clone(), to));
                ScenarioEvent::Forward { id: next, prior, from: agent_name(at), to: agent_name(to), value: value.map(f64::from) }
            }
            Op::JudgeAgent { from, to, target, judged } => {
                created.push((next.clone(), to));
                ScenarioEvent::Judge { id: next, chain: None, from: agent_name(from), to: agent_name(to), target: Target::Agent(agent_name(target)), judged: scalar(judged), declared: None }
            }
            Op::JudgeMessage { from, to, msg, judged, chain: c } => {
                let Some((target, _)) = pick(msg) else { continue };
                created.push((next.clone(), to));
                ScenarioEvent::Judge { id: next, chain: chain(c), from: agent_name(from), to: agent_name(to), target: Target::Message(target), judged: scalar(judged), declared: None }
            }
            Op::Reconcile { numeric } => ScenarioEvent::Reconcile { topic: if numeric { "t" } else { "p" }.into() },
            Op::Observe { a, b } => {
                let (Some((a, _)), Some((b, _))) = (pick(a), pick(b)) else { continue };
                ScenarioEvent::Observe { id: a, reference: b }
            }
        };
        out.push(event);
    }
    out
}

pub fn scenario(max_ops: usize) -> impl Strategy<Value = Vec<ScenarioEvent>> {
    (prop::collection::vec((rel(), 0.0f64..3.0), 2..5))
        .prop_flat_map(move |initial| {
            let n = initial.len();
            (Just(initial), prop::collection::vec(op(n), 0..max_ops))
        })
        .prop_map(|(initial, ops)| events(&initial, &ops))
}
