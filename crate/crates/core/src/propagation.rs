//! The update calculus.
//!
//! * A message starts from its sender's reliability, ANDed with any
//!   reliability declared on the message itself.
//! * A chain of messages has combined reliability `alpha * min(parts)`;
//!   a new combined value is broken back down onto the parts so the same
//!   relation holds again.
//! * Parallel messages on one topic reconcile pairwise: agreement raises both,
//!   disagreement lowers both, and the less reliable side moves more.
//! * A change to a message falls back on its sender, dampened by the sender's
//!   inertia, as a backward hop on the message's chain.
//! * Reliability judgements about an agent or message merge into its current
//!   value, weighted by inertia and by the judging messages' confidence.

use std::collections::BTreeMap;

use crate::algebra::{
    self, align_dimensions, and_combine, average, lift_elementwise, DimensionedReliability,
    Reliability, WeightVector, TOLERANCE,
};
use crate::error::{Error, Result};
use crate::network::{
    Agent, Cause, ChainId, CycleDetected, Direction, Hop, Message, MessageContent, Target,
};

#[derive(Debug, Clone, PartialEq)]
pub struct PropagationConfig {
    /// AND and chain attenuation, in `[0, 1]`.
    pub alpha: f64,
    pub lambda_agree: f64,
    pub lambda_disagree: f64,
    /// Numeric values within this distance agree (inclusive).
    pub epsilon_numeric: f64,
    /// Fill value for dimensions missing on one side of an operation.
    pub dimension_default: Reliability,
}

impl Default for PropagationConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            lambda_agree: 0.2,
            lambda_disagree: 0.2,
            epsilon_numeric: 0.0,
            dimension_default: Reliability::ZERO,
        }
    }
}

impl PropagationConfig {
    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, f64, bool); 4] = [
            ("alpha", self.alpha, (0.0..=1.0).contains(&self.alpha)),
            ("lambda_agree", self.lambda_agree, self.lambda_agree >= 0.0),
            ("lambda_disagree", self.lambda_disagree, self.lambda_disagree >= 0.0),
            ("epsilon", self.epsilon_numeric, self.epsilon_numeric >= 0.0),
        ];
        for (name, value, ok) in checks {
            if !value.is_finite() || !ok {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        Ok(())
    }
}

/// A finite signed change per dimension.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Delta(BTreeMap<String, f64>);

impl Delta {
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut map = BTreeMap::new();
        for (dim, v) in entries {
            if !v.is_finite() {
                return Err(Error::InvalidNumeric(v));
            }
            map.insert(dim.into(), v);
        }
        Ok(Self(map))
    }

    /// `new - old` per dimension, over the union of both, with `default`
    /// standing in for a missing side.
    pub fn between(
        old: &DimensionedReliability,
        new: &DimensionedReliability,
        default: Reliability,
    ) -> Self {
        let (old, new) = align_dimensions(old, new, default);
        Self(
            old.iter()
                .zip(new.iter())
                .map(|((dim, o), (_, n))| (dim.to_string(), n.value() - o.value()))
                .collect(),
        )
    }

    pub fn get(&self, dimension: &str) -> f64 {
        self.0.get(dimension).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Missing dimensions count as zero change.
    pub fn accumulate(&mut self, other: &Delta) {
        for (dim, v) in other.iter() {
            *self.0.entry(dim.to_string()).or_insert(0.0) += v;
        }
    }

    /// `clamp(base + self)` per dimension.
    pub fn apply_to(
        &self,
        base: &DimensionedReliability,
        default: Reliability,
    ) -> DimensionedReliability {
        self.apply_scaled(base, 1.0, default)
    }

    fn apply_scaled(
        &self,
        base: &DimensionedReliability,
        scale: f64,
        default: Reliability,
    ) -> DimensionedReliability {
        let mut out = base.clone();
        for (dim, v) in self.iter() {
            let current = base.get_or(dim, default).value();
            out.insert(dim, Reliability::saturating(current + v * scale));
        }
        out
    }
}

/// A reconciliation outcome for one agent or message.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityDelta {
    pub target: Target,
    pub delta: Delta,
    pub cause: ChainId,
}

/// Reliability of a message sent by `agent`: the agent's own reliability, or
/// its AND with the reliability declared on the message.
pub fn message_initial_reliability(
    agent: &Agent,
    declared: Option<&DimensionedReliability>,
    cfg: &PropagationConfig,
) -> Result<DimensionedReliability> {
    match declared {
        None => Ok(agent.reliability().clone()),
        Some(declared) => lift_elementwise(
            |a, m| and_combine(a, m, cfg.alpha),
            agent.reliability(),
            declared,
            cfg.dimension_default,
        ),
    }
}

/// Result of a successful back-propagation.
#[derive(Debug, Clone, PartialEq)]
pub struct BackPropagation {
    pub agent: Agent,
    pub carrier: Message,
}

/// Pushes a change of `carrier`'s reliability back to its sender.
///
/// Each dimension moves by `delta / (inertia + 1)` and inertia grows by one,
/// even for a zero delta. The update travels as the backward hop
/// `carrier.destination -> carrier.source`; if the carrier already took that
/// hop the agent is left untouched and [`CycleDetected`] is returned.
pub fn backpropagate_to_agent(
    agent: &Agent,
    delta: &Delta,
    carrier: &Message,
    cfg: &PropagationConfig,
) -> Result<BackPropagation, CycleDetected> {
    debug_assert_eq!(agent.id(), carrier.source());
    let hop = Hop {
        source: carrier.destination().clone(),
        destination: carrier.source().clone(),
        direction: Direction::Backward,
        value: carrier.content().clone(),
        reliability: carrier.reliability().clone(),
    };
    let carrier = carrier.extend_chain(hop)?;
    let agent = dampen(agent, delta, Cause::Message(carrier.id().clone()), cfg);
    Ok(BackPropagation { agent, carrier })
}

/// The agent side of [`backpropagate_to_agent`] without the hop check:
/// `clamp(rho + delta / (inertia + 1))`, inertia plus one.
pub fn dampen(agent: &Agent, delta: &Delta, cause: Cause, cfg: &PropagationConfig) -> Agent {
    let damped = delta.apply_scaled(
        agent.reliability(),
        1.0 / (agent.inertia() + 1.0),
        cfg.dimension_default,
    );
    let mut agent = agent.clone();
    agent.record_update(damped, 1.0, cause);
    agent
}

fn align_all(parts: &[DimensionedReliability], default: Reliability) -> Vec<DimensionedReliability> {
    let mut union = DimensionedReliability::new();
    for p in parts {
        for dim in p.dimensions() {
            union.insert(dim, default);
        }
    }
    parts
        .iter()
        .map(|p| align_dimensions(p, &union, default).0)
        .collect()
}

/// `alpha * min(parts)` per dimension.
pub fn chain_combine(
    parts: &[DimensionedReliability],
    cfg: &PropagationConfig,
) -> Result<DimensionedReliability> {
    if parts.is_empty() {
        return Err(Error::EmptyInput);
    }
    let aligned = align_all(parts, cfg.dimension_default);
    let mut out = DimensionedReliability::new();
    for dim in aligned[0].dimensions() {
        let min = aligned
            .iter()
            .map(|p| p.get_or(dim, cfg.dimension_default))
            .fold(Reliability::MAX, |acc, r| if r < acc { r } else { acc });
        out.insert(dim, and_combine(min, Reliability::MAX, cfg.alpha)?);
    }
    Ok(out)
}

/// New parts produced by [`chain_decompose`].
#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    pub parts: Vec<DimensionedReliability>,
    /// Whether any part had to be clamped into `[-1, 1]`.
    pub clamped: bool,
}

/// Breaks a change of a chain's combined reliability down onto its parts.
///
/// Per dimension: when the old and new combined values share a sign, every
/// part is scaled by `new / old`; across zero, `(new - old) / alpha` is added
/// to every part. Both keep `alpha * min(new parts) == new` unless a part
/// clamps. `new_combined` must lie in `[-alpha, alpha]`, the range
/// [`chain_combine`] can produce.
pub fn chain_decompose(
    old_parts: &[DimensionedReliability],
    old_combined: &DimensionedReliability,
    new_combined: &DimensionedReliability,
    cfg: &PropagationConfig,
) -> Result<Decomposition> {
    let expected = chain_combine(old_parts, cfg)?;
    let (expected, given) = align_dimensions(&expected, old_combined, cfg.dimension_default);
    for ((dim, e), (_, g)) in expected.iter().zip(given.iter()) {
        if (e.value() - g.value()).abs() > TOLERANCE {
            return Err(Error::InconsistentChain {
                dimension: dim.to_string(),
                expected: e.value(),
                given: g.value(),
            });
        }
    }
    for (_, v) in new_combined.iter() {
        if v.value().abs() > cfg.alpha + TOLERANCE {
            return Err(Error::UnattainableCombined {
                value: v.value(),
                alpha: cfg.alpha,
            });
        }
    }

    let default = cfg.dimension_default;
    let mut parts = align_all(old_parts, default);
    let mut clamped = false;
    for (dim, new) in new_combined.iter() {
        let old = expected
            .get(dim)
            .map(Reliability::value)
            .unwrap_or(cfg.alpha * default.value());
        let new = new.value();
        if (new - old).abs() <= TOLERANCE {
            continue;
        }
        let step: Box<dyn Fn(f64) -> f64> = if old.abs() > TOLERANCE && old * new > 0.0 {
            let k = new / old;
            Box::new(move |p| p * k)
        } else {
            let shift = (new - old) / cfg.alpha;
            Box::new(move |p| p + shift)
        };
        for part in &mut parts {
            let raw = step(part.get_or(dim, default).value());
            let value = Reliability::saturating(raw);
            clamped |= value.value() != raw;
            part.insert(dim, value);
        }
    }
    Ok(Decomposition { parts, clamped })
}

/// Whether two statement-carrying contents agree.
pub fn contents_agree(a: &MessageContent, b: &MessageContent, epsilon: f64) -> Result<bool> {
    use MessageContent::*;
    match (a, b) {
        (Numeric { topic: t1, value: v1 }, Numeric { topic: t2, value: v2 }) if t1 == t2 => {
            Ok((v1 - v2).abs() <= epsilon + TOLERANCE)
        }
        (
            Proposition { topic: t1, claim: c1, polarity: p1 },
            Proposition { topic: t2, claim: c2, polarity: p2 },
        ) if t1 == t2 => Ok(c1 == c2 && p1 == p2),
        (Numeric { topic: t1, .. }, Numeric { topic: t2, .. })
        | (Proposition { topic: t1, .. }, Proposition { topic: t2, .. }) => Err(
            Error::NotComparable(format!("topics `{t1}` and `{t2}` differ")),
        ),
        _ => Err(Error::NotComparable(
            "contents are of different kinds or are judgements".into(),
        )),
    }
}

/// Pairwise reconciliation of two parallel messages.
///
/// With `conf(r) = (1 + r) / 2` and `spread(r) = (1 - r) / 2`, each side moves
/// by `lambda * conf(r_other) * spread(r_self)` per dimension: upwards on
/// agreement with `lambda_agree`, downwards on disagreement with
/// `lambda_disagree`.
pub fn reconcile_pair(
    m1: &Message,
    m2: &Message,
    cfg: &PropagationConfig,
) -> Result<(ReliabilityDelta, ReliabilityDelta)> {
    let agree = contents_agree(m1.content(), m2.content(), cfg.epsilon_numeric)?;
    let (r1, r2) = align_dimensions(m1.reliability(), m2.reliability(), cfg.dimension_default);
    let lambda = if agree {
        cfg.lambda_agree
    } else {
        -cfg.lambda_disagree
    };
    let side = |own: &DimensionedReliability, other: &DimensionedReliability| {
        Delta(
            own.iter()
                .zip(other.iter())
                .map(|((dim, mine), (_, theirs))| {
                    (dim.to_string(), lambda * theirs.confidence() * mine.spread())
                })
                .collect(),
        )
    };
    Ok((
        ReliabilityDelta {
            target: Target::Message(m1.id().clone()),
            delta: side(&r1, &r2),
            cause: m1.chain().clone(),
        },
        ReliabilityDelta {
            target: Target::Message(m2.id().clone()),
            delta: side(&r2, &r1),
            cause: m2.chain().clone(),
        },
    ))
}

/// Reconciles every unordered pair, in message-id order, and sums the deltas
/// per message. One delta per message is returned, ordered by id.
pub fn reconcile_set(msgs: &[&Message], cfg: &PropagationConfig) -> Result<Vec<ReliabilityDelta>> {
    if msgs.len() < 2 {
        return Err(Error::NotEnoughMessages {
            topic: msgs
                .first()
                .and_then(|m| m.content().topic())
                .unwrap_or_default()
                .to_string(),
            found: msgs.len(),
        });
    }
    let mut sorted: Vec<&Message> = msgs.to_vec();
    sorted.sort_by(|a, b| a.id().cmp(b.id()));
    let mut totals: Vec<ReliabilityDelta> = sorted
        .iter()
        .map(|m| ReliabilityDelta {
            target: Target::Message(m.id().clone()),
            delta: Delta::default(),
            cause: m.chain().clone(),
        })
        .collect();
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            let (a, b) = reconcile_pair(sorted[i], sorted[j], cfg)?;
            totals[i].delta.accumulate(&a.delta);
            totals[j].delta.accumulate(&b.delta);
        }
    }
    Ok(totals)
}

/// Merges reliability judgements `(mu, rho)` about one entity into its current
/// reliability `nu`.
///
/// Raw weights are `iota` for `nu` and `conf(av(rho_j))` for each `mu_j`; the
/// result is their normalized weighted mean per dimension. Inertia grows by the
/// number of judgements. If every raw weight is zero, `nu` is kept.
pub fn merge_reliability_judgements(
    nu: &DimensionedReliability,
    iota: f64,
    judgements: &[(DimensionedReliability, DimensionedReliability)],
    cfg: &PropagationConfig,
) -> Result<(DimensionedReliability, f64)> {
    if judgements.is_empty() {
        return Err(Error::EmptyInput);
    }
    if !iota.is_finite() || iota < 0.0 {
        return Err(Error::InvalidParameter {
            name: "inertia",
            value: iota,
        });
    }
    let new_inertia = iota + judgements.len() as f64;
    let mut raw = vec![iota];
    for (_, rho) in judgements {
        raw.push(average(rho)?.confidence());
    }
    let weights = match WeightVector::normalize(&raw) {
        Ok(w) => w,
        Err(_) => return Ok((nu.clone(), new_inertia)),
    };

    let mut values = vec![nu.clone()];
    values.extend(judgements.iter().map(|(mu, _)| mu.clone()));
    let values = align_all(&values, cfg.dimension_default);
    let mut merged = DimensionedReliability::new();
    for dim in values[0].dimensions() {
        let column = values.iter().map(|v| v.get_or(dim, cfg.dimension_default));
        merged.insert(dim, algebra::mean_with(&weights, column));
    }
    Ok((merged, new_inertia))
}
