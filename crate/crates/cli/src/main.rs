use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use patience::deal::{deal, Layout};
use patience::engine::GameState;
use patience::search::{verify_solution, SolveOptions};
use patience::stats::Form;
use patience_cli::*;

#[derive(Parser)]
#[command(
    name = "patience",
    version,
    about = "Exhaustive solver for patience games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one deal and print its record.
    Solve(SolveArgs),
    /// Solve consecutive seeds and stream records.
    Batch(BatchArgs),
    /// Recompute counts and intervals from record files.
    Summarize(SummarizeArgs),
    /// Check rules files for inconsistencies.
    Validate { files: Vec<PathBuf> },
    /// Replay a solution file against a deal.
    Verify {
        #[arg(long)]
        rules: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u32,
        #[arg(long)]
        deal: Option<PathBuf>,
        #[arg(long)]
        solution: PathBuf,
    },
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    rules: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u32,
    #[arg(long)]
    timeout_s: Option<f64>,
    #[arg(long)]
    node_budget: Option<u64>,
    #[arg(long)]
    cache_bytes: Option<usize>,
    /// Per-game limits; command-line flags take precedence.
    #[arg(long)]
    profile: Option<PathBuf>,
    #[arg(long, default_value = "auto", value_parser = ["on", "off", "auto"])]
    streamliners: String,
    #[arg(long)]
    no_dominances: bool,
    /// name=on|off, repeatable.
    #[arg(long = "dominance")]
    dominances: Vec<String>,
    /// Write 0 for wall_ms so records are reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    search: SearchArgs,
    /// Print the deal as JSON before solving.
    #[arg(long)]
    show_deal: bool,
    /// Print the initial position as text on stderr.
    #[arg(long)]
    dump: bool,
    /// Solve this layout file instead of dealing.
    #[arg(long)]
    deal: Option<PathBuf>,
    #[arg(long)]
    solution: Option<PathBuf>,
}

#[derive(Args)]
struct BatchArgs {
    #[command(flatten)]
    search: SearchArgs,
    #[arg(long, default_value_t = 1)]
    count: u32,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    display: DisplayArgs,
}

#[derive(Args)]
struct DisplayArgs {
    #[arg(long, default_value_t = 3)]
    digits: u32,
    /// Print intervals as lo-hi ranges.
    #[arg(long)]
    range: bool,
}

impl DisplayArgs {
    fn get(&self) -> Display {
        Display {
            digits: self.digits,
            form: if self.range {
                Form::Range
            } else {
                Form::PlusMinus
            },
        }
    }
}

#[derive(Args)]
struct SummarizeArgs {
    files: Vec<PathBuf>,
    #[command(flatten)]
    display: DisplayArgs,
    /// Also print an aligned text table on stderr.
    #[arg(long)]
    table: bool,
}

fn job(a: &SearchArgs) -> anyhow::Result<Job> {
    let rules = load_rules(&a.rules)?;
    let game = game_name(&a.rules);
    let profile: Profile = match &a.profile {
        Some(p) => serde_json::from_str(
            &std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        )
        .with_context(|| format!("parsing {}", p.display()))?,
        None => Profile::default(),
    };
    let flags = Limits {
        timeout_s: a.timeout_s,
        node_budget: a.node_budget,
        cache_bytes: a.cache_bytes,
    };
    let limits = flags.over(&profile.limits_for(&game)).to_search();
    let overrides = a
        .dominances
        .iter()
        .map(|s| parse_override(s))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let options = SolveOptions {
        streamliners: parse_streamliners(&a.streamliners)?,
        dominances: dominance_config(&rules, !a.no_dominances, &overrides)?,
    };
    Ok(Job {
        game,
        rules,
        limits,
        options,
        timing: !a.no_timing,
    })
}

fn read_layout(path: &Path) -> anyhow::Result<Layout> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Layout::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn interrupt_flag() -> Arc<AtomicBool> {
    let flag = Arc::new(AtomicBool::new(false));
    let f = flag.clone();
    let _ = ctrlc::set_handler(move || f.store(true, Ordering::Relaxed));
    flag
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Solve(a) => {
            let job = job(&a.search)?;
            let layout = match &a.deal {
                Some(p) => read_layout(p)?,
                None => deal(&job.rules, a.search.seed)?,
            };
            if a.show_deal {
                println!("{}", layout.to_json());
            }
            if a.dump {
                eprint!("{}", GameState::initial(&job.rules, &layout)?.dump());
            }
            let cancel = interrupt_flag();
            let run = job.run_layout(a.search.seed, &layout, Some(&cancel))?;
            println!("{}", serde_json::to_string(&run.record)?);
            if let (Some(path), Some(moves)) = (&a.solution, &run.outcome.solution) {
                write_solution(path, moves)?;
            }
            Ok(exit_code(run.record.verdict))
        }
        Command::Batch(a) => {
            let job = job(&a.search)?;
            let cancel = interrupt_flag();
            let mut out: Box<dyn Write> = match &a.out {
                Some(p) => Box::new(BufWriter::new(
                    File::create(p).with_context(|| format!("creating {}", p.display()))?,
                )),
                None => Box::new(std::io::stdout().lock()),
            };
            let summary = job.run_batch(
                a.search.seed,
                a.count,
                a.jobs,
                &mut out,
                &cancel,
                a.display.get(),
            )?;
            eprint!("{}", summary_table(std::slice::from_ref(&summary)));
            Ok(if summary.partial { 130 } else { 0 })
        }
        Command::Summarize(a) => {
            let mut records = Vec::new();
            for f in &a.files {
                let file = File::open(f).with_context(|| format!("opening {}", f.display()))?;
                records.extend(
                    read_records(BufReader::new(file)).with_context(|| f.display().to_string())?,
                );
            }
            let rows = summarize(&records, a.display.get())?;
            for r in &rows {
                println!(
                    "{}",
                    serde_json::to_string(&Line::Summary { summary: r.clone() })?
                );
            }
            if a.table {
                eprint!("{}", summary_table(&rows));
            }
            Ok(0)
        }
        Command::Validate { files } => {
            let mut bad = false;
            for f in &files {
                match load_rules(f) {
                    Ok(r) => {
                        let diags = r.validate();
                        for d in &diags {
                            println!("{}: {d}", f.display());
                        }
                        bad |= !diags.is_empty();
                    }
                    Err(e) => {
                        println!("{}: {e:#}", f.display());
                        bad = true;
                    }
                }
            }
            Ok(if bad { 1 } else { 0 })
        }
        Command::Verify {
            rules,
            seed,
            deal: layout_path,
            solution,
        } => {
            let r = load_rules(&rules)?;
            let layout = match &layout_path {
                Some(p) => read_layout(p)?,
                None => deal(&r, seed)?,
            };
            let moves = read_solution(&solution)?;
            match verify_solution(&r, &layout, &moves) {
                Ok(()) => {
                    println!("ok: {} moves", moves.len());
                    Ok(0)
                }
                Err(e) => {
                    println!("invalid: {e}");
                    Ok(1)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
