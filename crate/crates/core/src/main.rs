use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use lexforge::io::{parse_gold_tsv, parse_lexicon_tsv};
use lexforge::pipeline::{emit_outputs, evaluate, run_pipeline, PipelineConfig};
use lexforge::synth::{generate, write_fixture, SynthConfig};
use lexforge::Error;

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;

/// Compiles a bilingual noun lexicon from unaligned noisy parallel text.
#[derive(Parser)]
#[command(name = "lexforge", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the extraction pipeline over a parallel corpus.
    Run(RunArgs),
    /// Score an emitted lexicon against a gold file.
    Eval(EvalArgs),
    /// Generate a synthetic fixture with known ground truth.
    Synth(SynthArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Tagged source text, `surface/TAG` tokens.
    #[arg(long)]
    source: PathBuf,
    /// Target text, bare whitespace-separated tokens.
    #[arg(long)]
    target: PathBuf,
    /// Optional `key = value` config file; CLI flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for the lexicon, report and dumps.
    #[arg(long)]
    out: PathBuf,
    /// Source tags admitted to matching, comma-separated.
    #[arg(long)]
    noun_tags: Option<String>,
    #[arg(long)]
    min_freq: Option<usize>,
    #[arg(long)]
    max_freq_ratio: Option<f64>,
    #[arg(long)]
    euclid_threshold: Option<f64>,
    #[arg(long)]
    max_start_offset: Option<f64>,
    #[arg(long)]
    dtw_threshold: Option<f64>,
    /// Diagonal band half width for warp matching (off unless set).
    #[arg(long)]
    dtw_band: Option<usize>,
    #[arg(long)]
    top_n: Option<usize>,
    #[arg(long)]
    min_gap_source: Option<usize>,
    #[arg(long)]
    max_jump_target: Option<usize>,
    /// Anchor diagonal band, fraction of target length.
    #[arg(long)]
    slope_band: Option<f64>,
    #[arg(long)]
    t_threshold: Option<f64>,
    #[arg(long)]
    min_secondary_freq: Option<usize>,
    /// Dump per-word gap signals as CSV.
    #[arg(long)]
    dump_signals: bool,
    /// Dump warp paths of the primary pairs as CSV.
    #[arg(long)]
    dump_paths: bool,
    /// Dump the anchor scatter (CSV + SVG) and segment tables.
    #[arg(long)]
    dump_anchors: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Lexicon TSV produced by `run`.
    #[arg(long)]
    lexicon: PathBuf,
    /// Gold file: `source<TAB>target` rows.
    #[arg(long)]
    gold: PathBuf,
    /// Rank cutoff for counting a hit.
    #[arg(short, default_value_t = 1)]
    n: usize,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Token count of each side.
    #[arg(long, default_value_t = 100_000)]
    tokens: usize,
    /// Planted translation pairs (three quarters high-frequency).
    #[arg(long, default_value_t = 200)]
    pairs: usize,
    /// Output directory for the fixture files.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Synth(args) => cmd_synth(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { EXIT_USAGE } else { EXIT_DATA })
        }
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Error> {
    let mut cfg = PipelineConfig::default();
    if let Some(path) = &args.config {
        cfg.apply_config_file(path)?;
    }
    if let Some(tags) = &args.noun_tags {
        cfg.noun_tags = tags
            .split(',')
            .map(|t| t.trim().to_string())
            .filter(|t| !t.is_empty())
            .collect::<BTreeSet<_>>();
        if cfg.noun_tags.is_empty() {
            return Err(Error::Config {
                key: "noun-tags".into(),
                reason: "expected a comma-separated tag list".into(),
            });
        }
    }
    if let Some(v) = args.min_freq {
        cfg.min_frequency = v;
    }
    if let Some(v) = args.max_freq_ratio {
        cfg.max_freq_ratio = v;
    }
    if let Some(v) = args.euclid_threshold {
        cfg.euclid_threshold = v;
    }
    if let Some(v) = args.max_start_offset {
        cfg.max_start_offset_ratio = v;
    }
    if let Some(v) = args.dtw_threshold {
        cfg.dtw_threshold = v;
    }
    if let Some(v) = args.dtw_band {
        cfg.dtw_band = Some(v);
    }
    if let Some(v) = args.top_n {
        if v == 0 {
            return Err(Error::Config {
                key: "top-n".into(),
                reason: "must be at least 1".into(),
            });
        }
        cfg.top_n = v;
    }
    if let Some(v) = args.min_gap_source {
        cfg.min_gap_source = Some(v);
    }
    if let Some(v) = args.max_jump_target {
        cfg.max_jump_target = Some(v);
    }
    if let Some(v) = args.slope_band {
        cfg.slope_band_fraction = v;
    }
    if let Some(v) = args.t_threshold {
        cfg.t_threshold = v;
    }
    if let Some(v) = args.min_secondary_freq {
        cfg.min_secondary_freq = v;
    }
    cfg.dump_signals |= args.dump_signals;
    cfg.dump_paths |= args.dump_paths;
    cfg.dump_anchors |= args.dump_anchors;

    let output = run_pipeline(&cfg, &args.source, &args.target)?;
    let written = emit_outputs(&output, &cfg, &args.out)?;

    let r = &output.report;
    println!(
        "primary {} entries, secondary {} entries ({} anchors, {} segments)",
        r.primary_entries, r.secondary_entries, r.anchor_points, r.segments
    );
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<(), Error> {
    let lexicon_text =
        fs::read_to_string(&args.lexicon).map_err(|e| Error::io(&args.lexicon, e))?;
    let lexicon = parse_lexicon_tsv(&lexicon_text, &args.lexicon)?;
    let gold_text = fs::read_to_string(&args.gold).map_err(|e| Error::io(&args.gold, e))?;
    let gold = parse_gold_tsv(&gold_text, &args.gold)?;
    let report = evaluate(&lexicon, &gold, args.n.max(1));
    print!("{}", report.render());
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<(), Error> {
    let cfg = SynthConfig {
        seed: args.seed,
        tokens: args.tokens,
        pairs: args.pairs,
        ..SynthConfig::default()
    };
    let corpus = generate(&cfg);
    let written = write_fixture(&corpus, &args.out)?;
    println!(
        "generated {} tokens per side, {} planted pairs",
        args.tokens,
        corpus.planted.len()
    );
    for path in written {
        println!("wrote {}", path.display());
    }
    Ok(())
}
