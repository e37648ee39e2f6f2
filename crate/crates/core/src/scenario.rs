//! Line-oriented scenario parser.
//!
//! One event per line, `#` starts a comment, keywords are lowercase and
//! arguments are `key=value` fields:
//!
//! ```text
//! agent <id> rel=<r|dim:r,dim:r> inertia=<x>
//! config <alpha|lambda_agree|lambda_disagree|epsilon|dim_default|tau>=<x>
//! send <mid> chain=<cid>? from=<aid> to=<aid> topic=<t> (value=<num> | claim=<token> pol=<+|->) rel=<...>?
//! forward <mid> prior=<mid> from=<aid> to=<aid> value=<num>?
//! judge <mid> chain=<cid>? from=<aid> to=<aid> target=<agent:id|msg:id> judged=<...> rel=<...>?
//! reconcile topic=<t>
//! observe <mid> against=<mid>
//! expect <agent:id|msg:id> dim=<d>? cmp=<lt|le|eq|ge|gt> val=<x>
//! ```
//!
//! `inertia` defaults to 1 when omitted.

use std::collections::BTreeMap;

use crate::algebra::{clamp, DimensionedReliability};
use crate::error::{Error, Result};
use crate::event::ScenarioEvent;
use crate::network::{Agent, AgentId, ChainId, MessageContent, MessageId, Polarity, Target};

/// Parses a whole scenario.
pub fn parse_scenario(text: &str) -> Result<Vec<ScenarioEvent>> {
    Ok(parse_scenario_lines(text)?
        .into_iter()
        .map(|(_, event)| event)
        .collect())
}

/// Parses a whole scenario, keeping the 1-based line number of each event.
pub fn parse_scenario_lines(text: &str) -> Result<Vec<(usize, ScenarioEvent)>> {
    let mut events = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        match parse_line(raw) {
            Ok(Some(event)) => events.push((line, event)),
            Ok(None) => {}
            Err(reason) => return Err(Error::Parse { line, reason }),
        }
    }
    Ok(events)
}

/// Parses one line; `Ok(None)` for blank and comment-only lines.
pub fn parse_line(raw: &str) -> Result<Option<ScenarioEvent>, String> {
    let text = raw.split('#').next().unwrap_or_default();
    let mut tokens = text.split_whitespace();
    let Some(keyword) = tokens.next() else {
        return Ok(None);
    };
    let mut line = Line::split(tokens)?;
    let event = match keyword {
        "agent" => {
            let id = agent_id(line.positional(1)?[0])?;
            let reliability = reliability(line.require("rel")?)?;
            let inertia = match line.take("inertia") {
                Some(v) => number(v)?,
                None => Agent::DEFAULT_INERTIA,
            };
            if inertia < 0.0 {
                return Err(format!("inertia must be non-negative, got {inertia}"));
            }
            ScenarioEvent::DeclareAgent {
                id,
                reliability,
                inertia,
            }
        }
        "config" => {
            line.positional(0)?;
            if line.fields.len() != 1 {
                return Err("config takes exactly one parameter=value field".into());
            }
            let (key, value) = line.fields.pop_first().expect("one field");
            ScenarioEvent::Configure {
                key: key.parse()?,
                value: number(value)?,
            }
        }
        "send" => {
            let id = message_id(line.positional(1)?[0])?;
            let chain = line.take("chain").map(chain_id).transpose()?;
            let from = agent_id(line.require("from")?)?;
            let to = agent_id(line.require("to")?)?;
            let topic = line.require("topic")?.to_string();
            let content = match (line.take("value"), line.take("claim")) {
                (Some(v), None) => {
                    if line.fields.contains_key("pol") {
                        return Err("`pol` only applies to claims".into());
                    }
                    MessageContent::Numeric {
                        topic,
                        value: number(v)?,
                    }
                }
                (None, Some(claim)) => {
                    let pol = line.require("pol")?;
                    let polarity = Polarity::parse(pol)
                        .ok_or_else(|| format!("polarity must be `+` or `-`, got `{pol}`"))?;
                    MessageContent::Proposition {
                        topic,
                        claim: claim.to_string(),
                        polarity,
                    }
                }
                (Some(_), Some(_)) => return Err("give either `value` or `claim`, not both".into()),
                (None, None) => return Err("missing `value` or `claim`".into()),
            };
            let declared = line.take("rel").map(reliability).transpose()?;
            ScenarioEvent::Send {
                id,
                chain,
                from,
                to,
                content,
                declared,
            }
        }
        "forward" => ScenarioEvent::Forward {
            id: message_id(line.positional(1)?[0])?,
            prior: message_id(line.require("prior")?)?,
            from: agent_id(line.require("from")?)?,
            to: agent_id(line.require("to")?)?,
            value: line.take("value").map(number).transpose()?,
        },
        "judge" => ScenarioEvent::Judge {
            id: message_id(line.positional(1)?[0])?,
            chain: line.take("chain").map(chain_id).transpose()?,
            from: agent_id(line.require("from")?)?,
            to: agent_id(line.require("to")?)?,
            target: target(line.require("target")?)?,
            judged: reliability(line.require("judged")?)?,
            declared: line.take("rel").map(reliability).transpose()?,
        },
        "reconcile" => {
            line.positional(0)?;
            ScenarioEvent::Reconcile {
                topic: line.require("topic")?.to_string(),
            }
        }
        "observe" => ScenarioEvent::Observe {
            id: message_id(line.positional(1)?[0])?,
            reference: message_id(line.require("against")?)?,
        },
        "expect" => {
            let entity = target(line.positional(1)?[0])?;
            ScenarioEvent::Expect {
                entity,
                dimension: line.take("dim").map(str::to_string),
                comparator: line.require("cmp")?.parse()?,
                value: number(line.require("val")?)?,
            }
        }
        other => return Err(format!("unknown keyword `{other}`")),
    };
    line.finish()?;
    Ok(Some(event))
}

struct Line<'a> {
    positionals: Vec<&'a str>,
    fields: BTreeMap<&'a str, &'a str>,
}

impl<'a> Line<'a> {
    fn split(tokens: impl Iterator<Item = &'a str>) -> Result<Self, String> {
        let mut positionals = Vec::new();
        let mut fields = BTreeMap::new();
        for token in tokens {
            match token.split_once('=') {
                Some((key, value)) => {
                    if key.is_empty() {
                        return Err(format!("malformed field `{token}`"));
                    }
                    if value.is_empty() {
                        return Err(format!("empty value for `{key}`"));
                    }
                    if fields.insert(key, value).is_some() {
                        return Err(format!("duplicate field `{key}`"));
                    }
                }
                None => positionals.push(token),
            }
        }
        Ok(Self {
            positionals,
            fields,
        })
    }

    fn positional(&self, count: usize) -> Result<&[&'a str], String> {
        if self.positionals.len() != count {
            return Err(format!(
                "expected {count} positional argument(s), found {}",
                self.positionals.len()
            ));
        }
        Ok(&self.positionals)
    }

    fn take(&mut self, key: &str) -> Option<&'a str> {
        self.fields.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<&'a str, String> {
        self.take(key)
            .ok_or_else(|| format!("missing field `{key}`"))
    }

    fn finish(self) -> Result<(), String> {
        match self.fields.keys().next() {
            Some(key) => Err(format!("unexpected field `{key}`")),
            None => Ok(()),
        }
    }
}

fn number(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not a finite number"));
    }
    Ok(v)
}

fn reliability(s: &str) -> Result<DimensionedReliability, String> {
    if !s.contains(':') {
        let r = clamp(number(s)?).map_err(|e| e.to_string())?;
        return Ok(DimensionedReliability::scalar(r));
    }
    let mut out = DimensionedReliability::new();
    for entry in s.split(',') {
        let (dim, value) = entry
            .split_once(':')
            .ok_or_else(|| format!("malformed dimension entry `{entry}`"))?;
        if dim.is_empty() {
            return Err(format!("empty dimension name in `{s}`"));
        }
        if out.get(dim).is_some() {
            return Err(format!("duplicate dimension `{dim}`"));
        }
        out.insert(dim, clamp(number(value)?).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

fn target(s: &str) -> Result<Target, String> {
    match s.split_once(':') {
        Some(("agent", id)) => Ok(Target::Agent(agent_id(id)?)),
        Some(("msg", id)) => Ok(Target::Message(message_id(id)?)),
        _ => Err(format!("expected `agent:<id>` or `msg:<id>`, got `{s}`")),
    }
}

fn agent_id(s: &str) -> Result<AgentId, String> {
    AgentId::new(s).map_err(|e| e.to_string())
}

fn message_id(s: &str) -> Result<MessageId, String> {
    MessageId::new(s).map_err(|e| e.to_string())
}

fn chain_id(s: &str) -> Result<ChainId, String> {
    ChainId::new(s).map_err(|e| e.to_string())
}
