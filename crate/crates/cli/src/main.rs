use std::collections::BTreeMap;
use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mhscreen_cli::formats::{
    load_outcomes, load_pairs, load_sets, with_file, write_pairs, write_sets,
};
use mhscreen_cli::harness::{
    parse_schedule, report_fr_curves, run_screen_signed, sign_referenced, write_fr_csv,
};
use mhscreen_cli::HarnessError;
use mhscreen_core::minwise::cache::{read_cache, write_cache};
use mhscreen_core::{
    gen_synthetic, make_family, FamilyId, GroupSpec, ScreenConfig, SignatureStore, ThresholdTable,
    TokenSet, WorkloadSpec, DEFAULT_K,
};

const DEFAULT_SCHEDULE: &str = "100,200,300,400,500,600,700,800,900";

/// MinHash threshold screening with early termination.
#[derive(Parser, Debug)]
#[command(name = "mhscreen", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a synthetic workload with exactly known pair similarities
    Gen(GenArgs),
    /// Sign a sets file into a binary signature cache
    Sign(SignArgs),
    /// Screen pairs against a similarity threshold
    Screen(ScreenArgs),
    /// Print the per-checkpoint threshold table as CSV
    Thresholds(ThresholdArgs),
    /// Filtering-rate curves from one or more outcome CSVs
    Fr(FrArgs),
}

#[derive(Args, Debug)]
struct GenArgs {
    /// Pair group `J:count:size`, e.g. `0.8:4000:400-600` (J decimal or a/b,
    /// size is the union size or a range). Repeatable.
    #[arg(long = "group", required = true)]
    groups: Vec<String>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output sets file
    #[arg(long)]
    sets: PathBuf,
    /// Output pairs file
    #[arg(long)]
    pairs: PathBuf,
}

#[derive(Args, Debug)]
struct SignArgs {
    #[arg(long)]
    sets: PathBuf,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Keep only the lowest b bits of each slot (1..=32)
    #[arg(long)]
    bits: Option<u32>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ThresholdParams {
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
    /// Small probability bounding a wrong early decision
    #[arg(long, default_value_t = 1e-5)]
    e: f64,
    /// Separate small probability for the upper (early output) test
    #[arg(long)]
    e_upper: Option<f64>,
    /// Comma-separated checkpoints; empty disables early termination
    #[arg(long, default_value = DEFAULT_SCHEDULE)]
    schedule: String,
}

#[derive(Args, Debug)]
struct ScreenArgs {
    /// Sets file to sign on the fly
    #[arg(long, conflicts_with = "cache", required_unless_present = "cache")]
    sets: Option<PathBuf>,
    /// Signature cache from `sign`
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    pairs: PathBuf,
    #[command(flatten)]
    params: ThresholdParams,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Also run the full-K comparison and report accuracy against it
    #[arg(long)]
    baseline: bool,
    /// Output directory for outcomes.csv, report.txt and report.json
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct ThresholdArgs {
    #[command(flatten)]
    params: ThresholdParams,
    /// Output CSV (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FrArgs {
    /// Outcome CSV, optionally labelled `LABEL=PATH`. Repeatable.
    #[arg(long = "outcomes", required = true)]
    outcomes: Vec<String>,
    #[arg(long, default_value = DEFAULT_SCHEDULE)]
    schedule: String,
    /// Output CSV (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Gen(args) => gen(args),
        Command::Sign(args) => sign(args),
        Command::Screen(args) => screen(args),
        Command::Thresholds(args) => thresholds(args),
        Command::Fr(args) => fr(args),
    }
}

fn gen(args: GenArgs) -> Result<()> {
    let groups = args
        .groups
        .iter()
        .map(|g| g.parse::<GroupSpec>())
        .collect::<Result<Vec<_>, _>>()?;
    let workload = gen_synthetic(&WorkloadSpec {
        groups,
        seed: args.seed,
    })?;
    with_file(&args.sets, |w| {
        write_sets(w, &workload.sets).map_err(HarnessError::io(&args.sets))
    })?;
    with_file(&args.pairs, |w| {
        write_pairs(w, &workload.pairs).map_err(HarnessError::io(&args.pairs))
    })?;
    eprintln!(
        "wrote {} sets and {} pairs",
        workload.sets.len(),
        workload.pairs.len()
    );
    Ok(())
}

fn load_sets_warn(path: &Path) -> Result<BTreeMap<u64, TokenSet>> {
    let loaded = load_sets(path).with_context(|| format!("reading {}", path.display()))?;
    if loaded.duplicate_tokens > 0 {
        eprintln!(
            "warning: dropped {} duplicate tokens",
            loaded.duplicate_tokens
        );
    }
    Ok(loaded.sets)
}

fn sign(args: SignArgs) -> Result<()> {
    let sets = load_sets_warn(&args.sets)?;
    let family = make_family(args.k, args.seed)?;
    let refs: Vec<&TokenSet> = sets.values().collect();
    let mut sigs = family.sign_all(&refs)?;
    let mut id = family.id();
    if let Some(bits) = args.bits {
        sigs = sigs
            .iter()
            .map(|s| s.to_b_bit(bits))
            .collect::<Result<_, _>>()?;
        id = FamilyId { bits, ..id };
    }
    let entries: Vec<(u64, &_)> = sets.keys().copied().zip(sigs.iter()).collect();
    with_file(&args.out, |w| Ok(write_cache(w, id, &entries)?))?;
    eprintln!("signed {} sets", entries.len());
    Ok(())
}

fn screen_config(params: &ThresholdParams, k: usize, seed: u64) -> Result<ScreenConfig> {
    let cfg = ScreenConfig::new(
        params.threshold,
        params.e,
        parse_schedule(&params.schedule)?,
        k,
        seed,
    )
    .with_e_upper(params.e_upper.unwrap_or(params.e));
    cfg.validate()?;
    Ok(cfg)
}

fn screen(args: ScreenArgs) -> Result<()> {
    let pairs = load_pairs(&args.pairs)?;
    let (store, sets, k, seed): (SignatureStore, _, _, _) = match (&args.sets, &args.cache) {
        (Some(path), _) => {
            let sets = load_sets_warn(path)?;
            let store = sign_referenced(&sets, &pairs, args.k, args.seed)?;
            (store, Some(sets), args.k, args.seed)
        }
        (None, Some(path)) => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let (family, entries) = read_cache(BufReader::new(file))?;
            (
                entries.into_iter().collect(),
                None,
                family.k,
                family.master_seed,
            )
        }
        (None, None) => bail!("one of --sets or --cache is required"),
    };
    let cfg = screen_config(&args.params, k, seed)?;
    let run = run_screen_signed(&store, sets.as_ref(), &pairs, &cfg, args.baseline)?;
    run.write_to_dir(&args.out)?;
    print!("{}", run.to_text());
    Ok(())
}

fn thresholds(args: ThresholdArgs) -> Result<()> {
    let p = &args.params;
    let table = ThresholdTable::build(
        p.threshold,
        p.e,
        p.e_upper.unwrap_or(p.e),
        &parse_schedule(&p.schedule)?,
    )?;
    match &args.out {
        Some(path) => with_file(path, |w| table.write_csv(w).map_err(HarnessError::io(path)))?,
        None => table.write_csv(io::stdout().lock())?,
    }
    Ok(())
}

fn fr(args: FrArgs) -> Result<()> {
    let schedule = parse_schedule(&args.schedule)?;
    let curves = args
        .outcomes
        .iter()
        .map(|spec| {
            let (label, path) = spec
                .split_once('=')
                .unwrap_or((spec.as_str(), spec.as_str()));
            let outcomes = load_outcomes(Path::new(path))?
                .iter()
                .map(|r| r.to_outcome())
                .collect::<Result<Vec<_>, _>>()?;
            Ok((label.to_string(), outcomes))
        })
        .collect::<Result<Vec<_>>>()?;
    let rows = report_fr_curves(&curves, &schedule)?;
    match &args.out {
        Some(path) => with_file(path, |w| write_fr_csv(w, &rows))?,
        None => {
            let mut out = io::stdout().lock();
            write_fr_csv(&mut out, &rows)?;
            out.flush()?;
        }
    }
    Ok(())
}
