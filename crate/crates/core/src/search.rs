//! Depth-first search over canonical positions.
//!
//! The search keeps its own stack of frames over a shared move arena, so
//! depth is limited by memory rather than by the call stack. Every position
//! entered is recorded in the transposition table; positions already there
//! are skipped, which also rules out cycles because the current path stays
//! pinned.

use std::sync::atomic::{AtomicBool, Ordering};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::deal::Layout;
use crate::dominance::{filter_partial_pile_moves, safe_foundation_move, DominanceConfig};
use crate::engine::{suit_blind, EngineError, GameState, KeyBuilder, KeyPlan, Move, Undo};
use crate::rules::{BuildPolicy, RuleSet};
use crate::table::TranspositionTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Verdict {
    Winnable,
    Unwinnable,
    TimedOut,
    MemedOut,
}

impl Verdict {
    pub fn is_resolved(self) -> bool {
        matches!(self, Verdict::Winnable | Verdict::Unwinnable)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchLimits {
    pub time: Option<Duration>,
    pub cache_bytes: usize,
    pub node_budget: Option<u64>,
    /// Share of the budgets given to the streamlined phase.
    pub streamliner_fraction: f64,
}

impl Default for SearchLimits {
    fn default() -> SearchLimits {
        SearchLimits {
            time: None,
            cache_bytes: 1 << 30,
            node_budget: None,
            streamliner_fraction: 0.10,
        }
    }
}

impl SearchLimits {
    fn scaled(&self, f: f64) -> SearchLimits {
        SearchLimits {
            time: self.time.map(|t| t.mul_f64(f)),
            cache_bytes: self.cache_bytes,
            node_budget: self
                .node_budget
                .map(|n| ((n as f64 * f).ceil() as u64).max(1)),
            streamliner_fraction: self.streamliner_fraction,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct StreamlinerSet {
    pub auto_foundation: bool,
    pub suit_symmetry: bool,
}

impl StreamlinerSet {
    pub fn any(self) -> bool {
        self.auto_foundation || self.suit_symmetry
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StreamlinerMode {
    On,
    Off,
    #[default]
    Auto,
}

/// The streamliners worth running for a rule set.
pub fn streamliners_for(rules: &RuleSet, mode: StreamlinerMode) -> StreamlinerSet {
    let suit_foundations = rules.has_suit_foundations() && !rules.foundations_complete_pile_only;
    match mode {
        StreamlinerMode::Off => StreamlinerSet::default(),
        StreamlinerMode::Auto => StreamlinerSet {
            auto_foundation: suit_foundations,
            suit_symmetry: suit_foundations && rules.build_policy == BuildPolicy::RedBlack,
        },
        StreamlinerMode::On => StreamlinerSet {
            auto_foundation: rules.foundations_present || rules.hole,
            suit_symmetry: rules.build_policy == BuildPolicy::RedBlack && !suit_blind(rules),
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub verdict: Verdict,
    pub solution: Option<Vec<Move>>,
    pub nodes: u64,
    pub max_depth: usize,
    pub peak_table_bytes: usize,
    pub elapsed: Duration,
    /// Whether the verdict came from the streamlined phase.
    pub streamlined: bool,
}

#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    pub streamliners: StreamlinerMode,
    pub dominances: DominanceConfig,
}

struct Frame {
    start: usize,
    next: usize,
    end: usize,
    undo: Option<Undo>,
    key: Box<[u8]>,
}

fn children(
    state: &GameState,
    rules: &RuleSet,
    cfg: &DominanceConfig,
    streamliners: StreamlinerSet,
    scratch: &mut Vec<Move>,
    out: &mut Vec<Move>,
) {
    if let Some(m) = safe_foundation_move(state, rules, cfg, scratch) {
        out.push(m);
        return;
    }
    let start = out.len();
    state.legal_moves(rules, out);
    if streamliners.auto_foundation {
        if let Some(m) = out[start..]
            .iter()
            .copied()
            .find(|m| m.is_foundation_build())
        {
            out.truncate(start);
            out.push(m);
            return;
        }
    }
    filter_partial_pile_moves(state, rules, cfg, out, start);
}

/// Exhaustive search from `initial`.
pub fn dfs(
    rules: &RuleSet,
    initial: &GameState,
    cfg: &DominanceConfig,
    streamliners: StreamlinerSet,
    limits: &SearchLimits,
    cancel: Option<&AtomicBool>,
) -> SearchOutcome {
    let started = Instant::now();
    let erase = suit_blind(rules);
    let mut keys = KeyBuilder::new(KeyPlan {
        erase_suits: erase,
        colour_tableau: streamliners.suit_symmetry && !erase,
    });
    let mut table = TranspositionTable::new(limits.cache_bytes);
    let mut state = initial.clone();
    let mut key = Vec::new();
    let mut arena: Vec<Move> = Vec::new();
    let mut scratch = Vec::new();
    let mut frames: Vec<Frame> = Vec::new();
    let mut nodes: u64 = 1;
    let mut max_depth = 0;
    #[cfg(debug_assertions)]
    let (mut before, mut probe) = (initial.clone(), initial.clone());

    let finish = |verdict, solution, nodes, max_depth, table: &TranspositionTable| SearchOutcome {
        verdict,
        solution,
        nodes,
        max_depth,
        peak_table_bytes: table.peak_bytes(),
        elapsed: started.elapsed(),
        streamlined: streamliners.any(),
    };

    keys.key(rules, &state, &mut key);
    if !table.insert_pinned(&key) {
        return finish(Verdict::MemedOut, None, nodes, 0, &table);
    }
    if state.is_won(rules) {
        return finish(Verdict::Winnable, Some(vec![]), nodes, 0, &table);
    }
    children(&state, rules, cfg, streamliners, &mut scratch, &mut arena);
    frames.push(Frame {
        start: 0,
        next: 0,
        end: arena.len(),
        undo: None,
        key: key.as_slice().into(),
    });

    loop {
        let top = frames.last_mut().expect("search stack");
        if top.next == top.end {
            let frame = frames.pop().expect("search stack");
            arena.truncate(frame.start);
            table.unpin(&frame.key);
            if let Some(u) = frame.undo {
                state.undo_unchecked(u);
            }
            if frames.is_empty() {
                return finish(Verdict::Unwinnable, None, nodes, max_depth, &table);
            }
            continue;
        }
        let mv = arena[top.next];
        top.next += 1;

        #[cfg(debug_assertions)]
        before.clone_from(&state);
        let undo = state.apply_unchecked(mv);
        keys.key(rules, &state, &mut key);
        if table.contains(&key) {
            state.undo_unchecked(undo);
            #[cfg(debug_assertions)]
            assert_eq!(state, before, "apply/undo round trip of {mv}");
            continue;
        }
        #[cfg(debug_assertions)]
        {
            probe.clone_from(&state);
            probe.undo_unchecked(undo);
            assert_eq!(probe, before, "apply/undo round trip of {mv}");
        }

        if limits.node_budget.is_some_and(|b| nodes >= b) {
            return finish(Verdict::TimedOut, None, nodes, max_depth, &table);
        }
        nodes += 1;
        if nodes % 1024 == 0 {
            let late = limits.time.is_some_and(|t| started.elapsed() >= t);
            if late || cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
                return finish(Verdict::TimedOut, None, nodes, max_depth, &table);
            }
        }
        if !table.insert_pinned(&key) {
            return finish(Verdict::MemedOut, None, nodes, max_depth, &table);
        }
        if state.is_won(rules) {
            let mut solution: Vec<Move> = frames
                .iter()
                .filter_map(|f| f.undo.map(|u| u.mv()))
                .collect();
            solution.push(mv);
            return finish(
                Verdict::Winnable,
                Some(solution),
                nodes,
                frames.len(),
                &table,
            );
        }
        let start = arena.len();
        children(&state, rules, cfg, streamliners, &mut scratch, &mut arena);
        frames.push(Frame {
            start,
            next: start,
            end: arena.len(),
            undo: Some(undo),
            key: key.as_slice().into(),
        });
        max_depth = max_depth.max(frames.len() - 1);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("layout does not fit the rules: {0}")]
    Layout(String),
    #[error("move {index} ({mv}) is illegal")]
    IllegalMove { index: usize, mv: Move },
    #[error("the moves end in an unwon position")]
    NotWon,
}

/// Replays `moves` from the deal under the plain rules.
pub fn verify_solution(
    rules: &RuleSet,
    layout: &Layout,
    moves: &[Move],
) -> Result<(), VerifyError> {
    let mut state =
        GameState::initial(rules, layout).map_err(|e| VerifyError::Layout(e.to_string()))?;
    for (index, &mv) in moves.iter().enumerate() {
        state
            .apply(rules, mv)
            .map_err(|_| VerifyError::IllegalMove { index, mv })?;
    }
    if state.is_won(rules) {
        Ok(())
    } else {
        Err(VerifyError::NotWon)
    }
}

/// Streamlined search first, then full search if that does not find a
/// verified win.
pub fn solve(
    rules: &RuleSet,
    layout: &Layout,
    limits: &SearchLimits,
    options: &SolveOptions,
    cancel: Option<&AtomicBool>,
) -> Result<SearchOutcome, EngineError> {
    let initial = GameState::initial(rules, layout)?;
    let started = Instant::now();
    let streamliners = streamliners_for(rules, options.streamliners);
    let mut spent_nodes = 0;
    let mut peak = 0;
    let mut deepest = 0;
    if streamliners.any() && limits.streamliner_fraction > 0.0 {
        let first = dfs(
            rules,
            &initial,
            &options.dominances,
            streamliners,
            &limits.scaled(limits.streamliner_fraction),
            cancel,
        );
        if first.verdict == Verdict::Winnable {
            let solution = first.solution.as_deref().unwrap_or_default();
            let verified = verify_solution(rules, layout, solution);
            debug_assert!(
                verified.is_ok(),
                "streamlined win failed verification: {verified:?}"
            );
            if verified.is_ok() {
                return Ok(SearchOutcome {
                    elapsed: started.elapsed(),
                    ..first
                });
            }
        }
        if cancel.is_some_and(|c| c.load(Ordering::Relaxed)) {
            return Ok(SearchOutcome {
                verdict: Verdict::TimedOut,
                solution: None,
                elapsed: started.elapsed(),
                ..first
            });
        }
        spent_nodes = first.nodes;
        peak = first.peak_table_bytes;
        deepest = first.max_depth;
    }
    let remaining = SearchLimits {
        time: limits.time.map(|t| t.saturating_sub(started.elapsed())),
        node_budget: limits.node_budget.map(|n| n.saturating_sub(spent_nodes)),
        ..limits.clone()
    };
    let full = dfs(
        rules,
        &initial,
        &options.dominances,
        StreamlinerSet::default(),
        &remaining,
        cancel,
    );
    Ok(SearchOutcome {
        nodes: full.nodes + spent_nodes,
        peak_table_bytes: full.peak_table_bytes.max(peak),
        max_depth: full.max_depth.max(deepest),
        elapsed: started.elapsed(),
        ..full
    })
}
