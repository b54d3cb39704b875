//! `hedono` — measure the average emotional valence of text corpora.
//!
//! Subcommands: `score` a corpus, `shift` (explain the difference between
//! two corpora word by word), `series` (bin by date or metadata),
//! `bootstrap` (stability under lexicon subsampling), `prepare` (clean a
//! corpus into scoring-ready JSONL).
//!
//! Exit codes: 0 success, 1 usage or processing error, 2 insufficient data
//! (nothing scorable, or every bin below threshold).

mod config;

use std::io::{self, BufRead, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hedono_core::ingest::{
    self, dedup_day, explode_sentences, feel_filter, read_corpus, JsonlReader,
};
use hedono_core::render;
use hedono_core::robustness::bootstrap_series;
use hedono_core::score::{count_documents, score, top_words};
use hedono_core::series::{bin_series, adaptive_age_bins, rank_groups, relative_series};
use hedono_core::shift::shift;
use hedono_core::{DocumentRecord, FrequencyVector, Lexicon, SeriesKey, TopWord, ValenceScore};

use config::Config;

#[derive(Parser)]
#[command(name = "hedono", version, about = "Corpus valence measurement")]
struct Cli {
    /// Worker threads for parallel stages (default: one per CPU core).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,

    /// Config file with `key = value` defaults for tuning flags.
    /// Falls back to the HEDONO_CONFIG environment variable.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a corpus: frequency-weighted average valence.
    Score(ScoreArgs),
    /// Decompose the score difference between two corpora word by word.
    Shift(ShiftArgs),
    /// Bin a corpus by date or metadata and score each bin.
    Series(SeriesArgs),
    /// Re-run a series on many random lexicon subsets to gauge stability.
    Bootstrap(BootstrapArgs),
    /// Clean and filter a corpus into scoring-ready JSONL.
    Prepare(PrepareArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args)]
struct ScoreArgs {
    /// Corpus: JSONL file, directory of .txt files, or `-` for stdin text.
    corpus: PathBuf,

    /// Lexicon file: tab- or comma-delimited with a `word,valence`
    /// header row, valence in [1, 9].
    #[arg(long, value_name = "PATH")]
    lexicon: PathBuf,

    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// How many most-frequent lexicon words to list (0 disables the table).
    #[arg(long, value_name = "K")]
    top_words: Option<usize>,
}

#[derive(Args)]
struct ShiftArgs {
    /// Reference corpus (JSONL file or directory of .txt files).
    reference: PathBuf,

    /// Comparison corpus; contributions explain comparison minus reference.
    comparison: PathBuf,

    #[arg(long, value_name = "PATH")]
    lexicon: PathBuf,

    /// How many top-magnitude words to render.
    #[arg(long, value_name = "K")]
    top_k: Option<usize>,

    /// Render words whose contribution is exactly zero as well.
    #[arg(long)]
    include_zeros: bool,

    /// Also write the rendering as an SVG chart.
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,

    /// Also write every word's contribution (zeros included) as CSV.
    #[arg(long, value_name = "PATH")]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct SeriesArgs {
    /// Corpus: JSONL file or directory of .txt files.
    corpus: PathBuf,

    #[arg(long, value_name = "PATH")]
    lexicon: PathBuf,

    /// Bin key: date, year, month, day, weekday, age, latitude, or any
    /// metadata field name.
    #[arg(long, default_value = "date", value_name = "KEY")]
    by: String,

    /// Minimum lexicon-word tokens for a bin to count as valid.
    #[arg(long, value_name = "N")]
    threshold: Option<u64>,

    /// Report valid bins centered on their unweighted mean score.
    #[arg(long, conflicts_with = "rank")]
    relative: bool,

    /// Bin by age with boundaries widened until every bin has at least
    /// --min-anew lexicon words.
    #[arg(long, conflicts_with_all = ["by", "threshold"])]
    adaptive_age: bool,

    /// Lexicon-word floor for adaptive age bins and for ranking.
    #[arg(long, value_name = "N")]
    min_anew: Option<u64>,

    /// Report only the top and bottom --top-k bins by score.
    #[arg(long)]
    rank: bool,

    /// Document floor for ranking.
    #[arg(long, value_name = "N")]
    min_docs: Option<u64>,

    /// Group count per end of the ranking.
    #[arg(long, value_name = "K")]
    top_k: Option<usize>,
}

#[derive(Args)]
struct BootstrapArgs {
    /// Corpus: JSONL file or directory of .txt files.
    corpus: PathBuf,

    #[arg(long, value_name = "PATH")]
    lexicon: PathBuf,

    #[arg(long, default_value = "date", value_name = "KEY")]
    by: String,

    #[arg(long, value_name = "N")]
    threshold: Option<u64>,

    /// Lexicon words per random subset.
    #[arg(short = 'm', long, value_name = "M")]
    subset_size: Option<usize>,

    /// Number of random subsets.
    #[arg(short = 'N', long, value_name = "N")]
    subsets: Option<usize>,

    /// Seed for the subset sampler; reruns with the same seed are
    /// byte-identical.
    #[arg(long, value_name = "SEED")]
    seed: Option<u64>,

    /// Also write a histogram of the per-subset mean scores as CSV.
    #[arg(long, value_name = "PATH")]
    means_out: Option<PathBuf>,

    /// Bin count for --means-out.
    #[arg(long, value_name = "N")]
    hist_bins: Option<usize>,
}

#[derive(Args)]
struct PrepareArgs {
    /// Corpus: JSONL file, directory of .txt files, or `-` for stdin JSONL.
    corpus: PathBuf,

    /// Split documents into sentences, one record each.
    #[arg(long)]
    sentences: bool,

    /// Keep only sentences with a first-person pronoun and a "feel" form
    /// (implies --sentences).
    #[arg(long)]
    feel_filter: bool,

    /// Drop repeats of the same record text within the same day.
    #[arg(long)]
    dedup: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // Exit 2 is reserved for insufficient data, so usage errors remap
        // to 1; --help and --version stay 0.
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            // A closed stdout (`hedono ... | head`) is termination, not
            // failure.
            let broken_pipe = err.chain().any(|c| {
                c.downcast_ref::<io::Error>()
                    .is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe)
            });
            if broken_pipe {
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {err:#}");
            let insufficient = err
                .downcast_ref::<hedono_core::Error>()
                .is_some_and(hedono_core::Error::is_data_insufficiency);
            ExitCode::from(if insufficient { 2 } else { 1 })
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = Config::load(cli.config.as_deref())?;
    let jobs: usize = cfg.resolve(cli.jobs, "jobs", 0)?;
    if jobs > 0 {
        hedono_core::set_jobs(jobs).map_err(|m| anyhow!("--jobs: {m}"))?;
    }
    match cli.command {
        Command::Score(args) => cmd_score(args, &cfg),
        Command::Shift(args) => cmd_shift(args, &cfg),
        Command::Series(args) => cmd_series(args, &cfg),
        Command::Bootstrap(args) => cmd_bootstrap(args, &cfg),
        Command::Prepare(args) => cmd_prepare(args),
    }
}

fn load_lexicon(path: &Path) -> Result<Lexicon> {
    Lexicon::load(path).with_context(|| format!("loading lexicon {}", path.display()))
}

/// Counts a whole corpus into one pooled frequency vector, streaming JSONL
/// and stdin in batches so memory stays bounded by the batch, not the
/// corpus.
fn pooled_vector(path: &Path, lex: &Lexicon) -> Result<FrequencyVector> {
    const BATCH: usize = 4096;
    let mut acc = FrequencyVector::empty(lex);
    let mut batch: Vec<String> = Vec::with_capacity(BATCH);
    let flush = |acc: &mut FrequencyVector, batch: &mut Vec<String>| -> Result<()> {
        if !batch.is_empty() {
            acc.merge_in_place(&count_documents(batch, lex))?;
            batch.clear();
        }
        Ok(())
    };
    if path == Path::new("-") {
        for line in io::stdin().lock().lines() {
            batch.push(line.context("reading stdin")?);
            if batch.len() == BATCH {
                flush(&mut acc, &mut batch)?;
            }
        }
    } else if path.is_dir() {
        for doc in read_corpus(path)? {
            batch.push(doc.text);
            if batch.len() == BATCH {
                flush(&mut acc, &mut batch)?;
            }
        }
    } else {
        let reader = ingest::read_jsonl_path(path)
            .with_context(|| format!("opening corpus {}", path.display()))?;
        for doc in reader {
            batch.push(doc.text);
            if batch.len() == BATCH {
                flush(&mut acc, &mut batch)?;
            }
        }
    }
    flush(&mut acc, &mut batch)?;
    Ok(acc)
}

/// Loads a corpus whole; binning needs every record's metadata in memory.
fn load_docs(path: &Path) -> Result<Vec<DocumentRecord>> {
    let docs = read_corpus(path).with_context(|| format!("reading corpus {}", path.display()))?;
    if docs.is_empty() {
        return Err(hedono_core::Error::Unscorable(format!(
            "corpus {} contains no documents",
            path.display()
        ))
        .into());
    }
    Ok(docs)
}

fn cmd_score(args: ScoreArgs, cfg: &Config) -> Result<()> {
    let top_k: usize = cfg.resolve(args.top_words, "top-words", 20)?;
    let lex = load_lexicon(&args.lexicon)?;
    let v = pooled_vector(&args.corpus, &lex)?;
    let s = score(&v, &lex)?;
    let top = if top_k > 0 { top_words(&v, &lex, top_k)? } else { Vec::new() };
    let total = v.total_words();
    let mut out = io::stdout().lock();
    match args.format {
        Format::Text => print_score_text(&mut out, &s, total, &top)?,
        Format::Json => {
            let val = score_json(&s, total, lex.n(), &top);
            writeln!(out, "{}", serde_json::to_string_pretty(&val)?)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(["score", "total_words", "anew_words", "anew_fraction", "distinct_anew"])?;
            w.write_record([
                s.value.to_string(),
                total.to_string(),
                s.anew_words.to_string(),
                (s.anew_words as f64 / total as f64).to_string(),
                s.distinct_anew.to_string(),
            ])?;
            w.flush()?;
        }
    }
    Ok(())
}

fn print_score_text(
    out: &mut impl io::Write,
    s: &ValenceScore,
    total: u64,
    top: &[TopWord],
) -> Result<()> {
    writeln!(out, "score          {:.4}", s.value)?;
    writeln!(out, "total words    {total}")?;
    writeln!(out, "anew words     {}", s.anew_words)?;
    writeln!(out, "anew fraction  {:.2}%", 100.0 * s.anew_words as f64 / total as f64)?;
    writeln!(out, "distinct anew  {}", s.distinct_anew)?;
    if !top.is_empty() {
        writeln!(out)?;
        writeln!(out, "rank  word                  count     pct")?;
        for (i, t) in top.iter().enumerate() {
            writeln!(out, "{:>4}  {:<20} {:>6}  {:>5.2}%", i + 1, t.word, t.count, t.pct)?;
        }
    }
    Ok(())
}

fn score_json(s: &ValenceScore, total: u64, lexicon_words: usize, top: &[TopWord]) -> serde_json::Value {
    serde_json::json!({
        "score": s.value,
        "total_words": total,
        "anew_words": s.anew_words,
        // Fraction in [0, 1] here; the text format shows a percentage.
        "anew_fraction": s.anew_words as f64 / total as f64,
        "distinct_anew": s.distinct_anew,
        "lexicon_words": lexicon_words,
        "top_words": top.iter().map(|t| serde_json::json!({
            "word": t.word,
            "count": t.count,
            "pct": t.pct,
        })).collect::<Vec<_>>(),
    })
}

fn cmd_shift(args: ShiftArgs, cfg: &Config) -> Result<()> {
    let top_k: usize = cfg.resolve(args.top_k, "top-k", 20)?;
    let lex = load_lexicon(&args.lexicon)?;
    let a = pooled_vector(&args.reference, &lex)?;
    let b = pooled_vector(&args.comparison, &lex)?;
    let r = shift(&a, &b, &lex)?;

    let mut out = io::stdout().lock();
    out.write_all(render::render_text(&r, top_k, args.include_zeros)?.as_bytes())?;
    let sum: f64 = r.contributions.iter().map(|c| c.delta_pct).sum();
    if r.percentages {
        writeln!(out, "contributions sum to {sum:+.2} (percent of |delta|)")?;
    } else {
        writeln!(out, "scores are equal; contributions above are raw, and sum to {sum:+.4}")?;
    }
    drop(out);

    if let Some(path) = &args.svg {
        let svg = render::render_svg(&r, top_k, args.include_zeros)?;
        std::fs::write(path, svg).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.csv {
        let mut w = csv::Writer::from_path(path)
            .with_context(|| format!("writing {}", path.display()))?;
        w.write_record(["word", "delta_pct", "valence_rel", "abundance_rel", "quadrant"])?;
        for c in &r.contributions {
            w.write_record([
                c.word.clone(),
                c.delta_pct.to_string(),
                c.valence_rel.to_string(),
                c.abundance_rel.to_string(),
                c.quadrant.label().to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(())
}

fn cmd_series(args: SeriesArgs, cfg: &Config) -> Result<()> {
    let threshold: u64 = cfg.resolve(args.threshold, "threshold", 1000)?;
    let min_anew: u64 = cfg.resolve(args.min_anew, "min-anew", 1000)?;
    let min_docs: u64 = cfg.resolve(args.min_docs, "min-docs", 50)?;
    let top_k: usize = cfg.resolve(args.top_k, "top-k", 20)?;
    let lex = load_lexicon(&args.lexicon)?;
    let docs = load_docs(&args.corpus)?;

    let bins = if args.adaptive_age {
        adaptive_age_bins(&docs, &lex, min_anew)?
    } else {
        bin_series(&docs, &lex, &SeriesKey::parse(&args.by), threshold)?
    };

    let mut out = io::stdout().lock();
    if args.rank {
        let ranked = rank_groups(&bins, min_docs, min_anew, top_k)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["which", "rank", "key", "score", "docs", "anew_words"])?;
        for (which, group) in [("top", &ranked.top), ("bottom", &ranked.bottom)] {
            for (i, b) in group.iter().enumerate() {
                w.write_record([
                    which.to_string(),
                    (i + 1).to_string(),
                    b.key.clone(),
                    b.score.map(|s| s.to_string()).unwrap_or_default(),
                    b.docs.to_string(),
                    b.anew_words.to_string(),
                ])?;
            }
        }
        w.flush()?;
    } else if args.relative {
        let rel = relative_series(&bins)?;
        writeln!(out, "# v_avg = {}", rel.v_avg)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["key", "rel_score"])?;
        for (key, v) in &rel.points {
            w.write_record([key.clone(), v.to_string()])?;
        }
        w.flush()?;
    } else {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["key", "score", "anew_words", "docs", "valid"])?;
        for b in &bins {
            w.write_record([
                b.key.clone(),
                b.score.map(|s| s.to_string()).unwrap_or_default(),
                b.anew_words.to_string(),
                b.docs.to_string(),
                b.valid.to_string(),
            ])?;
        }
        w.flush()?;
    }
    Ok(())
}

fn cmd_bootstrap(args: BootstrapArgs, cfg: &Config) -> Result<()> {
    let threshold: u64 = cfg.resolve(args.threshold, "threshold", 1000)?;
    let subset_size: usize = cfg.resolve(args.subset_size, "subset-size", 750)?;
    let subsets: usize = cfg.resolve(args.subsets, "subsets", 1000)?;
    let seed: u64 = cfg.resolve(args.seed, "seed", 0)?;
    let hist_bins: usize = cfg.resolve(args.hist_bins, "hist-bins", 20)?;
    if hist_bins == 0 {
        bail!("--hist-bins must be at least 1");
    }
    let lex = load_lexicon(&args.lexicon)?;
    let docs = load_docs(&args.corpus)?;
    let run = bootstrap_series(
        &docs,
        &lex,
        &SeriesKey::parse(&args.by),
        threshold,
        subset_size,
        subsets,
        seed,
    )?;

    let mut out = io::stdout().lock();
    writeln!(out, "# subset_size = {}", run.subset_size)?;
    writeln!(out, "# subsets = {}", run.num_subsets)?;
    writeln!(out, "# seed = {}", run.seed)?;
    writeln!(out, "# dropped_subsets = {}", run.dropped_subsets)?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["key", "q1", "median", "q3", "whisker_lo", "whisker_hi", "n_outliers"])?;
    for (key, b) in &run.per_bin {
        w.write_record([
            key.clone(),
            b.q1.to_string(),
            b.median.to_string(),
            b.q3.to_string(),
            b.whisker_lo.to_string(),
            b.whisker_hi.to_string(),
            b.outliers.len().to_string(),
        ])?;
    }
    w.flush()?;

    if let Some(path) = &args.means_out {
        let mut w = csv::Writer::from_path(path)
            .with_context(|| format!("writing {}", path.display()))?;
        w.write_record(["lo", "hi", "count"])?;
        for (lo, hi, count) in histogram(&run.v_avg_distribution, hist_bins) {
            w.write_record([lo.to_string(), hi.to_string(), count.to_string()])?;
        }
        w.flush()?;
    }
    Ok(())
}

/// Equal-width bins over [min, max]; the top edge is inclusive. A constant
/// sample collapses to a single zero-width bin.
fn histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, u64)> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() || lo == hi {
        return vec![(lo, hi, values.len() as u64)];
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &v in values {
        counts[(((v - lo) / width) as usize).min(bins - 1)] += 1;
    }
    counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (lo + i as f64 * width, lo + (i + 1) as f64 * width, c))
        .collect()
}

fn cmd_prepare(args: PrepareArgs) -> Result<()> {
    // Boxed iterator stages: each flag independently wraps the stream.
    let docs: Box<dyn Iterator<Item = DocumentRecord>> = if args.corpus == Path::new("-") {
        Box::new(JsonlReader::new(io::stdin().lock()))
    } else if args.corpus.is_dir() {
        Box::new(read_corpus(&args.corpus)?.into_iter())
    } else {
        Box::new(
            ingest::read_jsonl_path(&args.corpus)
                .with_context(|| format!("opening corpus {}", args.corpus.display()))?,
        )
    };
    let docs: Box<dyn Iterator<Item = DocumentRecord>> = if args.sentences || args.feel_filter {
        Box::new(docs.flat_map(|d| explode_sentences(&d)))
    } else {
        docs
    };
    let docs: Box<dyn Iterator<Item = DocumentRecord>> = if args.feel_filter {
        Box::new(feel_filter(docs))
    } else {
        docs
    };
    let docs: Box<dyn Iterator<Item = DocumentRecord>> = if args.dedup {
        Box::new(dedup_day(docs))
    } else {
        docs
    };

    let mut out = io::BufWriter::new(io::stdout().lock());
    let mut emitted: u64 = 0;
    for doc in docs {
        let mut m = serde_json::Map::new();
        for (k, v) in &doc.meta {
            m.insert(k.clone(), serde_json::Value::String(v.clone()));
        }
        m.insert("text".into(), serde_json::Value::String(doc.text));
        writeln!(out, "{}", serde_json::Value::Object(m))?;
        emitted += 1;
    }
    out.flush()?;
    log::info!("prepare emitted {emitted} records");
    Ok(())
}
