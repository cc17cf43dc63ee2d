//! Deterministic report writing: stable JSON, plain CSV, aligned text.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

/// Tolerance used when re-deriving satisfaction flags from stored numbers.
pub const CHECK_TOL: f64 = 1e-9;

/// A bound-versus-measurement comparison embedded in command reports and
/// re-evaluated by the report command.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Check {
    pub name: String,
    pub bound: f64,
    pub empirical: f64,
    /// "ge": empirical must be at least the bound; "le": at most.
    pub relation: Relation,
    pub satisfied: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Ge,
    Le,
}

impl Check {
    pub fn ge(name: &str, bound: f64, empirical: f64) -> Self {
        Check {
            name: name.to_string(),
            bound,
            empirical,
            relation: Relation::Ge,
            satisfied: empirical >= bound - CHECK_TOL,
        }
    }

    pub fn le(name: &str, bound: f64, empirical: f64) -> Self {
        Check {
            name: name.to_string(),
            bound,
            empirical,
            relation: Relation::Le,
            satisfied: empirical <= bound + CHECK_TOL,
        }
    }

    /// Satisfaction recomputed from the stored numbers, ignoring the stored
    /// flag; this is what makes tampered result files detectable.
    pub fn revalidate(&self) -> bool {
        match self.relation {
            Relation::Ge => self.empirical >= self.bound - CHECK_TOL,
            Relation::Le => self.empirical <= self.bound + CHECK_TOL,
        }
    }
}

/// Provenance block embedded at the top of every report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Provenance {
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
}

/// Writes pretty JSON with a trailing newline, byte-stable across runs.
pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> anyhow::Result<PathBuf> {
    let path = dir.join(name);
    let mut bytes = serde_json::to_vec_pretty(value)
        .with_context(|| format!("serializing {name}"))?;
    bytes.push(b'\n');
    std::fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Writes JSON lines (one compact object per line).
pub fn write_jsonl<T: Serialize>(dir: &Path, name: &str, rows: &[T]) -> anyhow::Result<PathBuf> {
    let path = dir.join(name);
    let mut out = Vec::new();
    for row in rows {
        serde_json::to_writer(&mut out, row).with_context(|| format!("serializing {name}"))?;
        out.push(b'\n');
    }
    std::fs::write(&path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Writes a CSV with a header row; fields are plain numbers or bare words so
/// no quoting is needed.
pub fn write_csv(
    dir: &Path,
    name: &str,
    header: &[&str],
    rows: &[Vec<String>],
) -> anyhow::Result<PathBuf> {
    let path = dir.join(name);
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    std::fs::write(&path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

/// Renders checks as an aligned text table.
pub fn checks_table(checks: &[Check]) -> String {
    let mut out = String::new();
    let name_width = checks.iter().map(|c| c.name.len()).max().unwrap_or(4).max(4);
    let _ = writeln!(
        out,
        "{:<name_width$}  {:>14}  {:>14}  {:>3}  {}",
        "name", "bound", "empirical", "rel", "satisfied"
    );
    for c in checks {
        let rel = match c.relation {
            Relation::Ge => ">=",
            Relation::Le => "<=",
        };
        let _ = writeln!(
            out,
            "{:<name_width$}  {:>14.8}  {:>14.8}  {:>3}  {}",
            c.name, c.bound, c.empirical, rel, c.satisfied
        );
    }
    out
}
