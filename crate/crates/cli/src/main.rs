use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use relprop_core::{
    parse_scenario_lines, write_tsv, Acceptance, AgentId, ChainId, ConfigKey, Error, MessageId, RunConfig,
    Simulator,
};

#[derive(Parser)]
#[command(name = "relprop", version, about = "Run reliability propagation scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its trace as TSV.
    Run {
        #[command(flatten)]
        common: Common,
        /// Trace output file; standard output when omitted.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Run a scenario and print the statements accepted at level tau.
    Query {
        #[command(flatten)]
        common: Common,
        /// Used unless the scenario sets `tau` itself.
        #[arg(long, allow_negative_numbers = true)]
        tau: Option<f64>,
        /// Require every dimension, not just the average, to reach tau.
        #[arg(long)]
        every_dimension: bool,
    },
    /// Run a scenario and describe one agent or message.
    Explain {
        #[command(flatten)]
        common: Common,
        /// `agent:<id>`, `msg:<id>` or a bare id.
        #[arg(long)]
        entity: String,
    },
}

#[derive(Args)]
struct Common {
    scenario: PathBuf,
    /// Parameter override, e.g. `alpha=0.9`; the scenario's own `config`
    /// lines take precedence.
    #[arg(long = "config", value_name = "KEY=VALUE")]
    config: Vec<String>,
}

/// Exit status 2 for a failed `expect`, 1 for everything else.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(error: E) -> Self {
        Failure {
            code: 1,
            error: error.into(),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {:#}", failure.error);
            ExitCode::from(failure.code)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { common, trace } => {
            let (sim, outcome) = simulate(&common, RunConfig::default())?;
            match trace {
                Some(path) => {
                    let file = fs::File::create(&path)
                        .with_context(|| format!("cannot create {}", path.display()))?;
                    write_tsv(sim.trace(), io::BufWriter::new(file))?;
                }
                None => write_tsv(sim.trace(), io::stdout().lock())?,
            }
            outcome
        }
        Command::Query {
            common,
            tau,
            every_dimension,
        } => {
            let mut base = RunConfig::default();
            if let Some(tau) = tau {
                base.set(ConfigKey::Tau, tau).context("--tau")?;
            }
            let (sim, outcome) = simulate(&common, base)?;
            outcome?;
            let mut out = io::stdout().lock();
            let mode = if every_dimension {
                Acceptance::EveryDimension
            } else {
                Acceptance::Average
            };
            for statement in sim.store().accepted_with(sim.config().tau, mode) {
                let level = statement.reliability().average()?.value();
                writeln!(out, "{}\t{level:.9}", statement.key())?;
            }
            Ok(())
        }
        Command::Explain { common, entity } => {
            let (sim, outcome) = simulate(&common, RunConfig::default())?;
            outcome?;
            let text = explain(&sim, &entity)?;
            io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

/// Parses and runs the scenario. A runtime failure is returned alongside the
/// partially run simulator so its trace can still be written.
fn simulate(common: &Common, mut base: RunConfig) -> Result<(Simulator, Result<(), Failure>), Failure> {
    for entry in &common.config {
        let (key, value) = entry
            .split_once('=')
            .ok_or_else(|| anyhow!("--config expects KEY=VALUE, got `{entry}`"))?;
        let key: ConfigKey = key.parse().map_err(|e: String| anyhow!(e))?;
        let value: f64 = value
            .parse()
            .with_context(|| format!("--config {key}: `{value}` is not a number"))?;
        base.set(key, value).with_context(|| format!("--config {key}"))?;
    }
    let text = read(&common.scenario)?;
    let events = parse_scenario_lines(&text)
        .with_context(|| format!("{}", common.scenario.display()))?;
    let mut sim = Simulator::new(base)?;
    for (line, event) in &events {
        if let Err(error) = sim.run_event(event) {
            let code = if matches!(error, Error::ExpectFailed { .. }) { 2 } else { 1 };
            let error = anyhow::Error::new(error)
                .context(format!("{}:{line}", common.scenario.display()));
            return Ok((sim, Err(Failure { code, error })));
        }
    }
    Ok((sim, Ok(())))
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn explain(sim: &Simulator, entity: &str) -> anyhow::Result<String> {
    let net = sim.network();
    let (kind, id) = match entity.split_once(':') {
        Some((kind @ ("agent" | "msg"), id)) => (kind, id),
        _ => {
            let agent = AgentId::new(entity).is_ok_and(|a| net.agent(&a).is_ok());
            let message = MessageId::new(entity).is_ok_and(|m| net.contains_message(&m));
            match (agent, message) {
                (true, true) => bail!("`{entity}` names both an agent and a message; use agent: or msg:"),
                (true, false) => ("agent", entity),
                (false, true) => ("msg", entity),
                (false, false) => bail!("unknown entity `{entity}`"),
            }
        }
    };
    let tag = format!("{kind}:{id}");
    let mut out = String::new();
    let mut chains: Vec<ChainId> = Vec::new();
    let mut touch = |c: &ChainId| {
        if !chains.contains(c) {
            chains.push(c.clone());
        }
    };

    if kind == "agent" {
        let agent = net.agent(&AgentId::new(id)?)?;
        out += &format!("{tag}\nreliability\t{}\ninertia\t{}\nhistory\n", agent.reliability(), agent.inertia());
        for (i, entry) in agent.history().iter().enumerate() {
            out += &format!("  {}\tprior {}\tcause {}\n", i + 1, entry.prior, entry.cause);
        }
        for (chain, history) in net.chains() {
            if history.hops().iter().any(|h| &h.source == agent.id() || &h.destination == agent.id()) {
                touch(chain);
            }
        }
    } else {
        let message = net.message(&MessageId::new(id)?)?;
        let path: Vec<String> = net.path(message.id())?.iter().map(|m| m.id().to_string()).collect();
        out += &format!(
            "{tag}\ncontent\t{}\nchain\t{}\npath\t{}\nreliability\t{} (initially {})\ncombined\t{}\ninertia\t{}\nhops\n",
            message.content(),
            message.chain(),
            path.join(" "),
            message.reliability(),
            message.initial_reliability(),
            sim.combined_reliability(message.id())?,
            message.inertia(),
        );
        for hop in message.hops() {
            out += &format!("  {}\t{}\n", hop.edge(), hop.reliability);
        }
        touch(message.chain());
    }

    out += "trace\n";
    for record in sim.trace().iter().filter(|r| r.entity == tag) {
        out += &format!("  {record}\n");
        touch(&record.cause);
    }
    chains.sort();
    out += "chains\n";
    for chain in &chains {
        out += &format!("  {chain}\n");
        if let Some(history) = net.chain(chain) {
            for hop in history.hops() {
                out += &format!("    {}\t{}\n", hop.edge(), hop.reliability);
            }
        }
    }
    Ok(out)
}
