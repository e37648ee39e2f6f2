//! Belief store and "relative truth" queries.
//!
//! Statements are keyed by topic and claim (with polarity) or by topic and a
//! numeric value. An affirmed and a negated claim are separate statements
//! with independent reliabilities; nothing here derives one from the other.

use std::collections::BTreeMap;
use std::fmt;

use crate::algebra::{lift_elementwise, or_combine, DimensionedReliability, Reliability, TOLERANCE};
use crate::error::{Error, Result};
use crate::network::{Message, MessageContent, MessageId, Polarity};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum StatementKey {
    Claim {
        topic: String,
        claim: String,
        polarity: Polarity,
    },
    /// Numeric statements are bucketed by the exact printed value.
    Value { topic: String, value: String },
    Or(Box<StatementKey>, Box<StatementKey>),
}

impl StatementKey {
    pub fn claim(topic: impl Into<String>, claim: impl Into<String>, polarity: Polarity) -> Self {
        StatementKey::Claim {
            topic: topic.into(),
            claim: claim.into(),
            polarity,
        }
    }

    pub fn value(topic: impl Into<String>, value: f64) -> Self {
        StatementKey::Value {
            topic: topic.into(),
            value: value.to_string(),
        }
    }

    pub fn or(a: StatementKey, b: StatementKey) -> Self {
        StatementKey::Or(Box::new(a), Box::new(b))
    }

    /// `None` for judgement contents.
    pub fn for_content(content: &MessageContent) -> Option<Self> {
        match content {
            MessageContent::Numeric { topic, value } => Some(Self::value(topic.clone(), *value)),
            MessageContent::Proposition {
                topic,
                claim,
                polarity,
            } => Some(Self::claim(topic.clone(), claim.clone(), *polarity)),
            MessageContent::ReliabilityJudgement { .. } => None,
        }
    }
}

impl fmt::Display for StatementKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StatementKey::Claim {
                topic,
                claim,
                polarity,
            } => write!(f, "{topic}:{claim}:{}", polarity.symbol()),
            StatementKey::Value { topic, value } => write!(f, "{topic}={value}"),
            StatementKey::Or(a, b) => write!(f, "({a} | {b})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Statement {
    key: StatementKey,
    reliability: DimensionedReliability,
    supporters: Vec<MessageId>,
    contributions: BTreeMap<MessageId, DimensionedReliability>,
    direct: Option<DimensionedReliability>,
    /// Lower bound from the components of a compound statement.
    components: Option<DimensionedReliability>,
}

impl Statement {
    fn new(key: StatementKey) -> Self {
        Self {
            key,
            reliability: DimensionedReliability::new(),
            supporters: Vec::new(),
            contributions: BTreeMap::new(),
            direct: None,
            components: None,
        }
    }

    pub fn key(&self) -> &StatementKey {
        &self.key
    }

    pub fn reliability(&self) -> &DimensionedReliability {
        &self.reliability
    }

    /// Supporting messages in the order they were first asserted.
    pub fn supporters(&self) -> &[MessageId] {
        &self.supporters
    }

    fn accepted(&self, tau: Reliability, mode: Acceptance) -> bool {
        match mode {
            Acceptance::Average => self
                .reliability
                .average()
                .is_ok_and(|av| av.value() >= tau.value() - TOLERANCE),
            Acceptance::EveryDimension => {
                !self.reliability.is_empty()
                    && self
                        .reliability
                        .iter()
                        .all(|(_, r)| r.value() >= tau.value() - TOLERANCE)
            }
        }
    }
}

/// How a dimensioned reliability is compared against a threshold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Acceptance {
    /// Compare the average over dimensions.
    #[default]
    Average,
    /// Require every dimension to reach the threshold.
    EveryDimension,
}

#[derive(Debug, Clone, Default)]
pub struct BeliefStore {
    statements: BTreeMap<StatementKey, Statement>,
    dimension_default: Reliability,
}

impl BeliefStore {
    pub fn new(dimension_default: Reliability) -> Self {
        Self {
            statements: BTreeMap::new(),
            dimension_default,
        }
    }

    pub(crate) fn set_dimension_default(&mut self, default: Reliability) {
        self.dimension_default = default;
    }

    pub fn get(&self, key: &StatementKey) -> Option<&Statement> {
        self.statements.get(key)
    }

    pub fn statements(&self) -> impl Iterator<Item = &Statement> {
        self.statements.values()
    }

    pub fn len(&self) -> usize {
        self.statements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }

    /// Records `msg` as support for the statement it carries, at the message's
    /// reliability.
    pub fn assert_statement(&mut self, msg: &Message) -> Result<&Statement> {
        self.assert_with(msg, msg.reliability().clone())
    }

    /// Like [`assert_statement`](Self::assert_statement) with an explicit
    /// reliability, e.g. the combined reliability of the message's chain.
    pub fn assert_with(
        &mut self,
        msg: &Message,
        reliability: DimensionedReliability,
    ) -> Result<&Statement> {
        let key = StatementKey::for_content(msg.content())
            .ok_or_else(|| Error::NotAStatement(msg.id().to_string()))?;
        let default = self.dimension_default;
        let statement = self
            .statements
            .entry(key.clone())
            .or_insert_with(|| Statement::new(key));
        if !statement.supporters.contains(msg.id()) {
            statement.supporters.push(msg.id().clone());
        }
        statement.contributions.insert(msg.id().clone(), reliability);
        recompute(statement, default);
        Ok(statement)
    }

    /// Records a reliability asserted for the statement itself rather than
    /// through a supporting message. Compound keys use this.
    pub fn assert_direct(&mut self, key: StatementKey, reliability: DimensionedReliability) {
        let default = self.dimension_default;
        let statement = self
            .statements
            .entry(key.clone())
            .or_insert_with(|| Statement::new(key));
        statement.direct = Some(match statement.direct.take() {
            Some(prev) => max_of(&prev, &reliability, default),
            None => reliability,
        });
        recompute(statement, default);
    }

    /// Replaces the contribution of `supporter` everywhere it appears.
    /// Returns the keys whose reliability changed, with old and new values.
    pub fn update_support(
        &mut self,
        supporter: &MessageId,
        reliability: &DimensionedReliability,
    ) -> Vec<(StatementKey, DimensionedReliability, DimensionedReliability)> {
        let default = self.dimension_default;
        let mut changed = Vec::new();
        for statement in self.statements.values_mut() {
            if let Some(slot) = statement.contributions.get_mut(supporter) {
                *slot = reliability.clone();
                let old = statement.reliability.clone();
                recompute(statement, default);
                if old != statement.reliability {
                    changed.push((statement.key.clone(), old, statement.reliability.clone()));
                }
            }
        }
        changed
    }

    /// Statements whose average reliability is at least `tau`, sorted by their
    /// printed key.
    pub fn accepted_at(&self, tau: Reliability) -> Vec<&Statement> {
        self.accepted_with(tau, Acceptance::Average)
    }

    pub fn accepted_with(&self, tau: Reliability, mode: Acceptance) -> Vec<&Statement> {
        let mut out: Vec<&Statement> = self
            .statements
            .values()
            .filter(|s| s.accepted(tau, mode))
            .collect();
        out.sort_by_cached_key(|s| s.key.to_string());
        out
    }

    /// Builds the disjunction of two stored statements. Its reliability is the
    /// elementwise max of the components, or a larger directly asserted value.
    pub fn compound_or(&mut self, a: &StatementKey, b: &StatementKey) -> Result<&Statement> {
        let default = self.dimension_default;
        let sa = self
            .statements
            .get(a)
            .ok_or_else(|| Error::UnknownStatement(a.to_string()))?;
        let sb = self
            .statements
            .get(b)
            .ok_or_else(|| Error::UnknownStatement(b.to_string()))?;
        let lower = max_of(&sa.reliability, &sb.reliability, default);
        let mut supporters = sa.supporters.clone();
        for id in &sb.supporters {
            if !supporters.contains(id) {
                supporters.push(id.clone());
            }
        }
        let key = StatementKey::or(a.clone(), b.clone());
        let statement = self
            .statements
            .entry(key.clone())
            .or_insert_with(|| Statement::new(key));
        statement.supporters = supporters;
        statement.components = Some(lower);
        recompute(statement, default);
        Ok(statement)
    }

    /// `(topic, claim)` pairs held in both polarities at level `tau` or above.
    pub fn conflict_report(&self, tau: Reliability) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (key, statement) in &self.statements {
            let StatementKey::Claim {
                topic,
                claim,
                polarity: Polarity::Affirmed,
            } = key
            else {
                continue;
            };
            let negated = StatementKey::claim(topic.clone(), claim.clone(), Polarity::Negated);
            let both = statement.accepted(tau, Acceptance::Average)
                && self
                    .statements
                    .get(&negated)
                    .is_some_and(|n| n.accepted(tau, Acceptance::Average));
            if both {
                out.push((topic.clone(), claim.clone()));
            }
        }
        out
    }
}

fn max_of(
    a: &DimensionedReliability,
    b: &DimensionedReliability,
    default: Reliability,
) -> DimensionedReliability {
    lift_elementwise(|x, y| Ok(or_combine(x, y)), a, b, default).expect("or_combine is total")
}

fn recompute(statement: &mut Statement, default: Reliability) {
    let mut acc: Option<DimensionedReliability> = None;
    let sources = statement
        .direct
        .iter()
        .chain(statement.components.iter())
        .chain(statement.contributions.values());
    for r in sources {
        acc = Some(match acc {
            Some(prev) => max_of(&prev, r, default),
            None => r.clone(),
        });
    }
    statement.reliability = acc.unwrap_or_default();
}
