//! Experiment harness: single runs, seed batches, and record summaries.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc;
use std::time::Duration;

use anyhow::{bail, Context};
use patience::deal::{deal, Layout};
use patience::dominance::{applicable_dominances, with_overrides, DominanceConfig};
use patience::engine::{format_solution, parse_solution};
use patience::rules::{parse_rules, RuleSet};
use patience::search::{
    solve, verify_solution, SearchLimits, SearchOutcome, SolveOptions, StreamlinerMode, Verdict,
};
use patience::stats::{conservative_interval, display, z95, Form, SampleSummary, StatsError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceRecord {
    pub game: String,
    pub seed: u32,
    pub verdict: Verdict,
    pub nodes: u64,
    pub max_depth: usize,
    pub wall_ms: u64,
    pub peak_table_bytes: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution_length: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub game: String,
    #[serde(flatten)]
    pub counts: SampleSummary,
    pub interval: String,
    pub lo: f64,
    pub hi: f64,
    pub partial: bool,
}

/// One line of a record stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Line {
    Summary { summary: BatchSummary },
    Record(InstanceRecord),
}

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Parses one NDJSON line.
pub fn parse_line(text: &str) -> Result<Line, serde_json::Error> {
    serde_json::from_str(text)
}

/// Reads every instance record, skipping blank lines and summary lines.
pub fn read_records(input: impl BufRead) -> Result<Vec<InstanceRecord>, RecordError> {
    let mut out = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(&line) {
            Ok(Line::Record(r)) => out.push(r),
            Ok(Line::Summary { .. }) => {}
            Err(e) => {
                return Err(RecordError::Malformed {
                    line: i + 1,
                    message: e.to_string(),
                })
            }
        }
    }
    Ok(out)
}

pub fn tally<'a>(records: impl IntoIterator<Item = &'a InstanceRecord>) -> SampleSummary {
    let mut s = SampleSummary::default();
    for r in records {
        s.n += 1;
        match r.verdict {
            Verdict::Winnable => s.wins += 1,
            Verdict::Unwinnable => s.losses += 1,
            Verdict::TimedOut | Verdict::MemedOut => s.unknowns += 1,
        }
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Display {
    pub digits: u32,
    pub form: Form,
}

impl Default for Display {
    fn default() -> Display {
        Display {
            digits: 3,
            form: Form::PlusMinus,
        }
    }
}

pub fn summarize_counts(
    game: &str,
    counts: SampleSummary,
    partial: bool,
    fmt: Display,
) -> Result<BatchSummary, StatsError> {
    let iv = conservative_interval(&counts, &z95())?;
    Ok(BatchSummary {
        game: game.to_string(),
        counts,
        interval: display(&iv, fmt.digits, fmt.form),
        lo: iv.lo_f64(),
        hi: iv.hi_f64(),
        partial,
    })
}

/// Per-game summaries recomputed from records alone, in game-name order.
pub fn summarize(
    records: &[InstanceRecord],
    fmt: Display,
) -> Result<Vec<BatchSummary>, StatsError> {
    if records.is_empty() {
        return Err(StatsError::EmptySample);
    }
    let mut games: BTreeMap<&str, Vec<&InstanceRecord>> = BTreeMap::new();
    for r in records {
        games.entry(&r.game).or_default().push(r);
    }
    games
        .into_iter()
        .map(|(g, rs)| summarize_counts(g, tally(rs), false, fmt))
        .collect()
}

pub fn summary_table(rows: &[BatchSummary]) -> String {
    let rows: Vec<_> = rows
        .iter()
        .map(|s| (s.game.clone(), s.counts, s.interval.clone()))
        .collect();
    patience::stats::text_table(&rows)
}

/// Per-game resource defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Limits {
    pub timeout_s: Option<f64>,
    pub node_budget: Option<u64>,
    pub cache_bytes: Option<usize>,
}

impl Limits {
    /// Fields set in `self` win over `base`.
    pub fn over(&self, base: &Limits) -> Limits {
        Limits {
            timeout_s: self.timeout_s.or(base.timeout_s),
            node_budget: self.node_budget.or(base.node_budget),
            cache_bytes: self.cache_bytes.or(base.cache_bytes),
        }
    }

    pub fn to_search(&self) -> SearchLimits {
        let mut l = SearchLimits::default();
        l.time = self.timeout_s.map(Duration::from_secs_f64);
        l.node_budget = self.node_budget;
        if let Some(b) = self.cache_bytes {
            l.cache_bytes = b;
        }
        l
    }
}

/// An experiment profile: `{"defaults": {...}, "games": {"klondike": {...}}}`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Profile {
    #[serde(default)]
    pub defaults: Limits,
    #[serde(default)]
    pub games: BTreeMap<String, Limits>,
}

impl Profile {
    pub fn limits_for(&self, game: &str) -> Limits {
        self.games
            .get(game)
            .cloned()
            .unwrap_or_default()
            .over(&self.defaults)
    }
}

/// A rules file, its game name, and the options to search it with.
pub struct Job {
    pub game: String,
    pub rules: RuleSet,
    pub limits: SearchLimits,
    pub options: SolveOptions,
    pub timing: bool,
}

pub fn game_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "game".into())
}

pub fn load_rules(path: &Path) -> anyhow::Result<RuleSet> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_rules(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn dominance_config(
    rules: &RuleSet,
    enabled: bool,
    overrides: &[(String, bool)],
) -> anyhow::Result<DominanceConfig> {
    let base = if enabled {
        applicable_dominances(rules)?
    } else {
        DominanceConfig::default()
    };
    Ok(with_overrides(rules, base, overrides)?)
}

pub fn parse_streamliners(s: &str) -> anyhow::Result<StreamlinerMode> {
    Ok(match s {
        "on" => StreamlinerMode::On,
        "off" => StreamlinerMode::Off,
        "auto" => StreamlinerMode::Auto,
        _ => bail!("expected on, off or auto, got `{s}`"),
    })
}

pub fn parse_override(s: &str) -> anyhow::Result<(String, bool)> {
    let (name, value) = s.split_once('=').context("expected name=on|off")?;
    let on = match value {
        "on" => true,
        "off" => false,
        _ => bail!("expected on or off, got `{value}`"),
    };
    Ok((name.to_string(), on))
}

pub struct SingleRun {
    pub record: InstanceRecord,
    pub outcome: SearchOutcome,
}

impl Job {
    pub fn run_layout(
        &self,
        seed: u32,
        layout: &Layout,
        cancel: Option<&AtomicBool>,
    ) -> anyhow::Result<SingleRun> {
        let outcome = solve(&self.rules, layout, &self.limits, &self.options, cancel)?;
        if let Some(sol) = &outcome.solution {
            verify_solution(&self.rules, layout, sol)
                .map_err(|e| anyhow::anyhow!("seed {seed}: solution failed verification: {e}"))?;
        }
        let record = InstanceRecord {
            game: self.game.clone(),
            seed,
            verdict: outcome.verdict,
            nodes: outcome.nodes,
            max_depth: outcome.max_depth,
            wall_ms: if self.timing {
                outcome.elapsed.as_millis() as u64
            } else {
                0
            },
            peak_table_bytes: outcome.peak_table_bytes,
            solution_length: outcome.solution.as_ref().map(Vec::len),
        };
        Ok(SingleRun { record, outcome })
    }

    pub fn run_seed(&self, seed: u32, cancel: Option<&AtomicBool>) -> anyhow::Result<SingleRun> {
        let layout = deal(&self.rules, seed)?;
        self.run_layout(seed, &layout, cancel)
    }

    /// Runs `count` consecutive seeds on `jobs` threads, writing each record
    /// as it completes and a summary line at the end.
    pub fn run_batch(
        &self,
        seed_start: u32,
        count: u32,
        jobs: usize,
        out: &mut dyn Write,
        cancel: &AtomicBool,
        fmt: Display,
    ) -> anyhow::Result<BatchSummary> {
        if count == 0 {
            bail!("count must be at least 1");
        }
        let next = AtomicU64::new(0);
        let (tx, rx) = mpsc::channel::<anyhow::Result<InstanceRecord>>();
        let mut records = Vec::new();
        std::thread::scope(|scope| -> anyhow::Result<()> {
            for _ in 0..jobs.max(1) {
                let tx = tx.clone();
                let next = &next;
                scope.spawn(move || loop {
                    if cancel.load(Ordering::Relaxed) {
                        break;
                    }
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= count as u64 {
                        break;
                    }
                    let seed = seed_start.wrapping_add(i as u32);
                    let r = self.run_seed(seed, Some(cancel)).map(|r| r.record);
                    if tx.send(r).is_err() {
                        break;
                    }
                });
            }
            drop(tx);
            for r in rx {
                let r = match r {
                    Ok(r) => r,
                    Err(e) => {
                        cancel.store(true, Ordering::Relaxed);
                        return Err(e);
                    }
                };
                writeln!(out, "{}", serde_json::to_string(&r)?)?;
                out.flush()?;
                records.push(r);
            }
            Ok(())
        })?;
        let partial = records.len() < count as usize;
        let summary = summarize_counts(&self.game, tally(&records), partial, fmt)?;
        let line = Line::Summary {
            summary: summary.clone(),
        };
        writeln!(out, "{}", serde_json::to_string(&line)?)?;
        out.flush()?;
        Ok(summary)
    }
}

pub fn read_solution(path: &Path) -> anyhow::Result<Vec<patience::engine::Move>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(parse_solution(&text)?)
}

pub fn write_solution(path: &Path, moves: &[patience::engine::Move]) -> anyhow::Result<()> {
    std::fs::write(path, format_solution(moves))
        .with_context(|| format!("writing {}", path.display()))
}

pub fn exit_code(v: Verdict) -> i32 {
    match v {
        Verdict::Winnable => 0,
        Verdict::Unwinnable => 1,
        Verdict::TimedOut => 3,
        Verdict::MemedOut => 4,
    }
}
