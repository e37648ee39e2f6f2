//! Trace records and their tab-separated form.

use std::fmt;
use std::io;

use crate::network::ChainId;

pub const TSV_HEADER: &str = "step\tkind\tentity\tdimension\told\tnew\tcause";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Update,
    Suppressed,
    Assert,
}

impl TraceKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TraceKind::Update => "update",
            TraceKind::Suppressed => "suppressed",
            TraceKind::Assert => "assert",
        }
    }
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One line of a run's trace. `entity` is `agent:<id>`, `msg:<id>` or
/// `stmt:<key>`; suppressed records carry `-` as dimension and `old == new`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub step: u64,
    pub kind: TraceKind,
    pub entity: String,
    pub dimension: String,
    pub old: f64,
    pub new: f64,
    pub cause: ChainId,
}

impl TraceRecord {
    pub fn delta(&self) -> f64 {
        self.new - self.old
    }
}

fn real(x: f64) -> String {
    let s = format!("{x:.9}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}\t{}",
            self.step,
            self.kind,
            self.entity,
            self.dimension,
            real(self.old),
            real(self.new),
            self.cause
        )
    }
}

pub fn write_tsv<W: io::Write>(records: &[TraceRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{TSV_HEADER}")?;
    for record in records {
        writeln!(out, "{record}")?;
    }
    Ok(())
}

pub fn to_tsv(records: &[TraceRecord]) -> String {
    let mut buf = Vec::new();
    write_tsv(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("trace is UTF-8")
}
