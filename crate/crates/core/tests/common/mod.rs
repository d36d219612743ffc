#![allow(dead_code)]

pub mod fixtures;
pub mod oracle;

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering::Relaxed};

use patience::deal::{deal, Layout};
use patience::dominance::applicable_dominances;
use patience::rules::{parse_rules, RuleSet};
use patience::search::{
    solve, SearchLimits, SearchOutcome, SolveOptions, StreamlinerMode, Verdict,
};

pub fn games_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../games")
}

/// Every corpus game as (file stem, rules), sorted by name.
pub fn corpus() -> Vec<(String, RuleSet)> {
    let mut out: Vec<(String, RuleSet)> = std::fs::read_dir(games_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            let rules = parse_rules(&std::fs::read_to_string(&p).unwrap())
                .unwrap_or_else(|e| panic!("{name}: {e}"));
            (name, rules)
        })
        .collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

pub fn game(name: &str) -> RuleSet {
    let p = games_dir().join(format!("{name}.json"));
    parse_rules(&std::fs::read_to_string(p).unwrap()).unwrap()
}

pub fn options(rules: &RuleSet) -> SolveOptions {
    SolveOptions {
        streamliners: StreamlinerMode::Auto,
        dominances: applicable_dominances(rules).unwrap(),
    }
}

pub fn plain() -> SolveOptions {
    SolveOptions {
        streamliners: StreamlinerMode::Off,
        ..SolveOptions::default()
    }
}

/// Running soundness counts across every solve made through [`run`].
#[derive(Debug, Default)]
pub struct Tally {
    pub wins: AtomicU64,
    pub verified: AtomicU64,
    pub streamlined_wins: AtomicU64,
    pub streamlined_verified: AtomicU64,
}

pub static TALLY: Tally = Tally {
    wins: AtomicU64::new(0),
    verified: AtomicU64::new(0),
    streamlined_wins: AtomicU64::new(0),
    streamlined_verified: AtomicU64::new(0),
};

/// Solves and checks any winning line against the full rules.
pub fn run(
    rules: &RuleSet,
    layout: &Layout,
    opts: &SolveOptions,
    limits: &SearchLimits,
) -> SearchOutcome {
    let out = solve(rules, layout, limits, opts, None).unwrap();
    if out.verdict == Verdict::Winnable {
        let ok = out
            .solution
            .as_ref()
            .is_some_and(|sol| patience::search::verify_solution(rules, layout, sol).is_ok());
        TALLY.wins.fetch_add(1, Relaxed);
        TALLY.verified.fetch_add(ok as u64, Relaxed);
        if out.streamlined {
            TALLY.streamlined_wins.fetch_add(1, Relaxed);
            TALLY.streamlined_verified.fetch_add(ok as u64, Relaxed);
        }
        assert!(ok, "winning line fails verification");
    }
    out
}

pub fn verdict(rules: &RuleSet, seed: u32, opts: &SolveOptions) -> Verdict {
    let layout = deal(rules, seed).unwrap();
    run(rules, &layout, opts, &SearchLimits::default()).verdict
}

/// Ranks per suit in the reduced packs the oracle exhausts for each game.
pub fn oracle_rank(name: &str) -> u8 {
    match name {
        "spanish_patience" | "spider" => 4,
        _ => 5,
    }
}

/// Deals where two configurations disagree, as readable lines.
pub fn compare(
    rules: &RuleSet,
    label: &str,
    seeds: std::ops::Range<u32>,
    a: (&SolveOptions, &SearchLimits),
    b: (&SolveOptions, &SearchLimits),
) -> Vec<String> {
    let mut bad = vec![];
    for seed in seeds {
        let layout = deal(rules, seed).unwrap();
        let va = run(rules, &layout, a.0, a.1).verdict;
        let vb = run(rules, &layout, b.0, b.1).verdict;
        if va != vb {
            bad.push(format!("{label} seed {seed}: {va:?} vs {vb:?}"));
        }
    }
    bad
}

/// Verdicts with and without the partial-pile restriction.
pub fn partial_pile_agreement(game_name: &str, ranks: &[u8], seeds: u32) -> Vec<String> {
    let mut bad = vec![];
    for &rank in ranks {
        let rules = game(game_name).with_max_rank(rank);
        let base = patience::dominance::applicable_dominances(&rules).unwrap();
        let on =
            patience::dominance::with_overrides(&rules, base, &[("partial-pile".into(), true)])
                .unwrap();
        let off =
            patience::dominance::with_overrides(&rules, base, &[("partial-pile".into(), false)])
                .unwrap();
        let with = SolveOptions {
            streamliners: StreamlinerMode::Off,
            dominances: on,
        };
        let without = SolveOptions {
            streamliners: StreamlinerMode::Off,
            dominances: off,
        };
        let limits = SearchLimits::default();
        bad.extend(compare(
            &rules,
            &format!("{game_name} rank {rank}"),
            0..seeds,
            (&with, &limits),
            (&without, &limits),
        ));
    }
    bad
}

/// Verdicts under a 1 MiB table against a 1 GiB table, and how many deals
/// filled the small table.
pub fn cache_sizes(game_name: &str, rank: u8, seeds: u32) -> (Vec<String>, u32) {
    let rules = game(game_name).with_max_rank(rank);
    let opts = options(&rules);
    let small = SearchLimits {
        cache_bytes: 1 << 20,
        ..SearchLimits::default()
    };
    let large = SearchLimits {
        cache_bytes: 1 << 30,
        ..SearchLimits::default()
    };
    let (mut bad, mut evicting) = (vec![], 0);
    for seed in 0..seeds {
        let layout = deal(&rules, seed).unwrap();
        let a = run(&rules, &layout, &opts, &small);
        let b = run(&rules, &layout, &opts, &large);
        evicting += (b.peak_table_bytes > small.cache_bytes) as u32;
        if a.verdict != b.verdict {
            bad.push(format!(
                "{game_name} rank {rank} seed {seed}: {:?} vs {:?}",
                a.verdict, b.verdict
            ));
        }
    }
    (bad, evicting)
}

/// Solver against the brute-force oracle on `seeds` reduced deals of one game.
/// Returns discrepancies (including oracle overflow) and the oracle's win count.
pub fn oracle_check(name: &str, rules: &RuleSet, seeds: u32) -> (Vec<String>, u32) {
    let r = rules.with_max_rank(oracle_rank(name));
    let opts = options(&r);
    let (mut bad, mut wins) = (vec![], 0);
    for seed in 0..seeds {
        let layout = deal(&r, seed).unwrap();
        let expected = match oracle::Oracle::new(&r, &layout).solve(&layout, 3_000_000) {
            oracle::Reach::Won => Verdict::Winnable,
            oracle::Reach::Lost => Verdict::Unwinnable,
            oracle::Reach::TooBig => {
                bad.push(format!("{name} seed {seed}: oracle ran out of room"));
                continue;
            }
        };
        let got = run(&r, &layout, &opts, &SearchLimits::default()).verdict;
        wins += (expected == Verdict::Winnable) as u32;
        if got != expected {
            bad.push(format!(
                "{name} seed {seed}: solver {got:?}, oracle {expected:?}"
            ));
        }
    }
    (bad, wins)
}
