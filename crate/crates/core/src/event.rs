//! Scenario events and their canonical one-line text form.

use std::fmt;
use std::str::FromStr;

use crate::algebra::{DimensionedReliability, TOLERANCE};
use crate::network::{AgentId, ChainId, MessageContent, MessageId, Polarity, Target};

/// A tunable run parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConfigKey {
    Alpha,
    LambdaAgree,
    LambdaDisagree,
    Epsilon,
    DimDefault,
    Tau,
}

impl ConfigKey {
    pub const ALL: [ConfigKey; 6] = [
        ConfigKey::Alpha,
        ConfigKey::LambdaAgree,
        ConfigKey::LambdaDisagree,
        ConfigKey::Epsilon,
        ConfigKey::DimDefault,
        ConfigKey::Tau,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConfigKey::Alpha => "alpha",
            ConfigKey::LambdaAgree => "lambda_agree",
            ConfigKey::LambdaDisagree => "lambda_disagree",
            ConfigKey::Epsilon => "epsilon",
            ConfigKey::DimDefault => "dim_default",
            ConfigKey::Tau => "tau",
        }
    }
}

impl FromStr for ConfigKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ConfigKey::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| format!("unknown config parameter `{s}`"))
    }
}

impl fmt::Display for ConfigKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Comparator {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl Comparator {
    pub fn as_str(self) -> &'static str {
        match self {
            Comparator::Lt => "lt",
            Comparator::Le => "le",
            Comparator::Eq => "eq",
            Comparator::Ge => "ge",
            Comparator::Gt => "gt",
        }
    }

    /// Compares with the crate-wide tolerance; `lt` and `gt` are strict
    /// beyond it.
    pub fn holds(self, actual: f64, expected: f64) -> bool {
        match self {
            Comparator::Lt => actual < expected - TOLERANCE,
            Comparator::Le => actual <= expected + TOLERANCE,
            Comparator::Eq => (actual - expected).abs() <= TOLERANCE,
            Comparator::Ge => actual >= expected - TOLERANCE,
            Comparator::Gt => actual > expected + TOLERANCE,
        }
    }
}

impl FromStr for Comparator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "lt" => Comparator::Lt,
            "le" => Comparator::Le,
            "eq" => Comparator::Eq,
            "ge" => Comparator::Ge,
            "gt" => Comparator::Gt,
            _ => return Err(format!("unknown comparator `{s}`")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioEvent {
    DeclareAgent {
        id: AgentId,
        reliability: DimensionedReliability,
        inertia: f64,
    },
    Configure {
        key: ConfigKey,
        value: f64,
    },
    Send {
        id: MessageId,
        chain: Option<ChainId>,
        from: AgentId,
        to: AgentId,
        content: MessageContent,
        declared: Option<DimensionedReliability>,
    },
    /// `from` passes `prior` on to `to`, optionally changing a numeric value.
    Forward {
        id: MessageId,
        prior: MessageId,
        from: AgentId,
        to: AgentId,
        value: Option<f64>,
    },
    Judge {
        id: MessageId,
        chain: Option<ChainId>,
        from: AgentId,
        to: AgentId,
        target: Target,
        judged: DimensionedReliability,
        declared: Option<DimensionedReliability>,
    },
    Reconcile {
        topic: String,
    },
    /// Compares a message with a recorded reference value.
    Observe {
        id: MessageId,
        reference: MessageId,
    },
    Expect {
        entity: Target,
        dimension: Option<String>,
        comparator: Comparator,
        value: f64,
    },
}

impl fmt::Display for ScenarioEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScenarioEvent::DeclareAgent {
                id,
                reliability,
                inertia,
            } => write!(f, "agent {id} rel={reliability} inertia={inertia}"),
            ScenarioEvent::Configure { key, value } => write!(f, "config {key}={value}"),
            ScenarioEvent::Send {
                id,
                chain,
                from,
                to,
                content,
                declared,
            } => {
                write!(f, "send {id}")?;
                if let Some(chain) = chain {
                    write!(f, " chain={chain}")?;
                }
                write!(f, " from={from} to={to}")?;
                match content {
                    MessageContent::Numeric { topic, value } => {
                        write!(f, " topic={topic} value={value}")?
                    }
                    MessageContent::Proposition {
                        topic,
                        claim,
                        polarity,
                    } => write!(f, " topic={topic} claim={claim} pol={}", polarity.symbol())?,
                    MessageContent::ReliabilityJudgement { .. } => {
                        return Err(fmt::Error);
                    }
                }
                if let Some(rel) = declared {
                    write!(f, " rel={rel}")?;
                }
                Ok(())
            }
            ScenarioEvent::Forward {
                id,
                prior,
                from,
                to,
                value,
            } => {
                write!(f, "forward {id} prior={prior} from={from} to={to}")?;
                if let Some(v) = value {
                    write!(f, " value={v}")?;
                }
                Ok(())
            }
            ScenarioEvent::Judge {
                id,
                chain,
                from,
                to,
                target,
                judged,
                declared,
            } => {
                write!(f, "judge {id}")?;
                if let Some(chain) = chain {
                    write!(f, " chain={chain}")?;
                }
                write!(f, " from={from} to={to} target={target} judged={judged}")?;
                if let Some(rel) = declared {
                    write!(f, " rel={rel}")?;
                }
                Ok(())
            }
            ScenarioEvent::Reconcile { topic } => write!(f, "reconcile topic={topic}"),
            ScenarioEvent::Observe { id, reference } => {
                write!(f, "observe {id} against={reference}")
            }
            ScenarioEvent::Expect {
                entity,
                dimension,
                comparator,
                value,
            } => {
                write!(f, "expect {entity}")?;
                if let Some(dim) = dimension {
                    write!(f, " dim={dim}")?;
                }
                write!(f, " cmp={} val={value}", comparator.as_str())
            }
        }
    }
}

impl Polarity {
    pub(crate) fn parse(s: &str) -> Option<Self> {
        match s {
            "+" => Some(Polarity::Affirmed),
            "-" => Some(Polarity::Negated),
            _ => None,
        }
    }
}
