use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use kpeval_core::analytics::{agreement_report, corpus_stats, Granularity};
use kpeval_core::baselines::{gazetteer_build, gazetteer_predict, oracle_predict, random_predict};
use kpeval_core::brat::{load_corpus, load_predictions, load_texts, write_corpus};
use kpeval_core::codec::tsv::{read_sequences, write_sequences};
use kpeval_core::codec::{
    decode_document, encode_document, DecodeStats, RelationDropReason, SpanDropReason,
};
use kpeval_core::model::canonicalize_document;
use kpeval_core::parallel;
use kpeval_core::scorer::{score_by_group, score_with, Pooling, Scenario, ScoreOptions};
use kpeval_core::{Corpus, Error, ValidationReport};

#[derive(Parser)]
#[command(
    name = "kpeval",
    version,
    about = "Keyphrase and relation extraction toolkit"
)]
struct Cli {
    /// Worker threads for per-document work (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a corpus directory for malformed or inconsistent annotations.
    Validate {
        dir: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Corpus statistics.
    Stats {
        dir: PathBuf,
        #[arg(long, default_value_t = 10)]
        top: usize,
        #[arg(long)]
        json: bool,
    },
    /// Score predictions against gold annotations.
    Score {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        scenario: u8,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        json: bool,
        #[arg(long, value_enum, default_value_t = PoolArg::Bc)]
        pool: PoolArg,
        /// File of `doc_id<TAB>genre` lines; scores each genre separately.
        #[arg(long, value_name = "MAPFILE")]
        by_genre: Option<PathBuf>,
    },
    /// Convert between annotation files and token-label sequences.
    Convert {
        #[arg(long, value_enum)]
        to: ConvertTo,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Widen spans that do not fall on token boundaries.
        #[arg(long)]
        snap: bool,
        #[arg(long)]
        force: bool,
    },
    /// Produce baseline predictions.
    Baseline {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Annotated training corpus (gazetteer only).
        #[arg(long)]
        train: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
        scenario: u8,
        #[arg(long)]
        snap: bool,
        #[arg(long)]
        force: bool,
    },
    /// Token-level agreement between two annotations of the same texts.
    Agreement {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, value_enum, default_value_t = GranularityArg::TokenA)]
        granularity: GranularityArg,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum PoolArg {
    Bc,
    Abc,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConvertTo {
    Seq,
    Ann,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Oracle,
    Random,
    Gazetteer,
}

#[derive(Clone, Copy, ValueEnum)]
enum GranularityArg {
    #[value(name = "token_a")]
    TokenA,
    #[value(name = "token_b")]
    TokenB,
}

/// Outcome of a command that ran to completion.
#[derive(Debug, PartialEq, Eq)]
enum Status {
    Ok,
    Problem,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = cli.jobs;
    match parallel::with_jobs(jobs, move || run(cli.command)) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Problem) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> anyhow::Result<Status> {
    match command {
        Command::Validate { dir, json } => validate(&dir, json),
        Command::Stats { dir, top, json } => stats(&dir, top, json),
        Command::Score {
            scenario,
            gold,
            pred,
            json,
            pool,
            by_genre,
        } => {
            let mut options =
                ScoreOptions::new(Scenario::from_number(scenario).expect("range-checked"));
            options.pooling = match pool {
                PoolArg::Bc => Pooling::Bc,
                PoolArg::Abc => Pooling::Abc,
            };
            score(&gold, &pred, options, by_genre.as_deref(), json)
        }
        Command::Convert {
            to,
            input,
            out,
            snap,
            force,
        } => match to {
            ConvertTo::Seq => convert_to_seq(&input, &out, snap, force),
            ConvertTo::Ann => convert_to_ann(&input, &out, force),
        },
        Command::Baseline {
            kind,
            train,
            seed,
            input,
            out,
            scenario,
            snap,
            force,
        } => {
            let scenario = Scenario::from_number(scenario).expect("range-checked");
            baseline(
                kind,
                train.as_deref(),
                seed,
                &input,
                &out,
                scenario,
                snap,
                force,
            )
        }
        Command::Agreement {
            a,
            b,
            granularity,
            json,
        } => {
            let granularity = match granularity {
                GranularityArg::TokenA => Granularity::TokenA,
                GranularityArg::TokenB => Granularity::TokenB,
            };
            agreement(&a, &b, granularity, json)
        }
    }
}

fn print_json(value: &impl serde::Serialize) -> anyhow::Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Writes load problems to stderr; true when there were errors.
fn report_issues(label: &str, report: &ValidationReport) -> bool {
    for issue in &report.errors {
        eprintln!("{label}: error\t{issue}");
    }
    for issue in &report.warnings {
        eprintln!("{label}: warning\t{issue}");
    }
    !report.is_clean()
}

fn load_clean(dir: &Path) -> anyhow::Result<Option<Corpus>> {
    let (corpus, report) =
        load_corpus(dir).with_context(|| format!("reading {}", dir.display()))?;
    if report_issues(&dir.display().to_string(), &report) {
        eprintln!(
            "{}: {} error(s); nothing done",
            dir.display(),
            report.errors.len()
        );
        return Ok(None);
    }
    Ok(Some(corpus.canonicalized()?))
}

fn validate(dir: &Path, json: bool) -> anyhow::Result<Status> {
    let (corpus, report) =
        load_corpus(dir).with_context(|| format!("reading {}", dir.display()))?;
    if json {
        print_json(&json!({
            "documents": corpus.len(),
            "errors": report.errors,
            "warnings": report.warnings,
        }))?;
    } else {
        let mut out = io::stdout().lock();
        for issue in &report.errors {
            writeln!(out, "error\t{issue}")?;
        }
        for issue in &report.warnings {
            writeln!(out, "warning\t{issue}")?;
        }
        writeln!(
            out,
            "{} documents, {} errors, {} warnings",
            corpus.len(),
            report.errors.len(),
            report.warnings.len()
        )?;
    }
    Ok(if report.is_clean() {
        Status::Ok
    } else {
        Status::Problem
    })
}

fn stats(dir: &Path, top: usize, json: bool) -> anyhow::Result<Status> {
    let (corpus, report) =
        load_corpus(dir).with_context(|| format!("reading {}", dir.display()))?;
    let problem = report_issues(&dir.display().to_string(), &report);
    let stats = corpus_stats(&corpus, top);
    if json {
        print_json(&stats)?;
    } else {
        print!("{stats}");
    }
    Ok(if problem { Status::Problem } else { Status::Ok })
}

fn read_genre_map(path: &Path) -> anyhow::Result<HashMap<String, String>> {
    let content =
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut map = HashMap::new();
    for (n, line) in content.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut fields = line.split_whitespace();
        match (fields.next(), fields.next(), fields.next()) {
            (Some(doc), Some(genre), None) => {
                map.insert(doc.to_string(), genre.to_string());
            }
            _ => bail!(
                "{}: line {}: expected `doc_id<TAB>genre`",
                path.display(),
                n + 1
            ),
        }
    }
    Ok(map)
}

fn score(
    gold_dir: &Path,
    pred_dir: &Path,
    options: ScoreOptions,
    by_genre: Option<&Path>,
    json: bool,
) -> anyhow::Result<Status> {
    let groups = by_genre.map(read_genre_map).transpose()?;
    let (gold, gold_report) =
        load_corpus(gold_dir).with_context(|| format!("reading {}", gold_dir.display()))?;
    let mut problem = report_issues("gold", &gold_report);
    let (pred, pred_report) = match load_predictions(pred_dir, &gold) {
        Ok(loaded) => loaded,
        Err(Error::UnknownPrediction(id)) => {
            eprintln!("pred: prediction for {id:?}, which is not in the gold corpus");
            return Ok(Status::Problem);
        }
        Err(e) => return Err(e).with_context(|| format!("reading {}", pred_dir.display())),
    };
    problem |= report_issues("pred", &pred_report);

    let report = score_with(&gold, &pred, options)?;
    for d in &report.diagnostics {
        eprintln!("warning: {d}");
    }
    let grouped = groups
        .as_ref()
        .map(|g| score_by_group(&gold, &pred, options, g))
        .transpose()?;
    if json {
        match &grouped {
            None => print_json(&report.view())?,
            Some(grouped) => {
                let groups: serde_json::Map<String, serde_json::Value> = grouped
                    .iter()
                    .map(|(k, v)| Ok((k.clone(), serde_json::to_value(v.view())?)))
                    .collect::<anyhow::Result<_>>()?;
                print_json(&json!({ "all": report.view(), "groups": groups }))?;
            }
        }
    } else {
        print!("{report}");
        for (genre, r) in grouped.iter().flatten() {
            println!("\n[{genre}]");
            print!("{r}");
        }
    }
    Ok(if problem { Status::Problem } else { Status::Ok })
}

/// Builds the output in a temporary sibling directory and renames it into place.
fn write_dir_atomically(
    out: &Path,
    force: bool,
    fill: impl FnOnce(&Path) -> anyhow::Result<()>,
) -> anyhow::Result<()> {
    if out.exists() && !force {
        bail!(
            "{} already exists (use --force to overwrite)",
            out.display()
        );
    }
    let name = out
        .file_name()
        .with_context(|| format!("{} is not a directory name", out.display()))?
        .to_string_lossy()
        .into_owned();
    let parent = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).with_context(|| format!("creating {}", parent.display()))?;
    let tmp = parent.join(format!(".{name}.tmp-{}", std::process::id()));
    if tmp.exists() {
        fs::remove_dir_all(&tmp)?;
    }
    fs::create_dir(&tmp).with_context(|| format!("creating {}", tmp.display()))?;
    if let Err(e) = fill(&tmp) {
        let _ = fs::remove_dir_all(&tmp);
        return Err(e);
    }
    if out.exists() {
        fs::remove_dir_all(out).with_context(|| format!("removing {}", out.display()))?;
    }
    fs::rename(&tmp, out).with_context(|| format!("renaming into {}", out.display()))?;
    Ok(())
}

fn convert_to_seq(input: &Path, out: &Path, snap: bool, force: bool) -> anyhow::Result<Status> {
    let Some(corpus) = load_clean(input)? else {
        return Ok(Status::Problem);
    };
    let docs: Vec<_> = corpus.documents().collect();
    let encoded = parallel::map(&docs, |doc| encode_document(doc, snap));
    let mut files = Vec::with_capacity(docs.len());
    let (mut aligned, mut snapped) = (0, 0);
    let mut span_drops = [0usize; 3];
    let mut rel_drops = [0usize; 3];
    for (doc, result) in docs.iter().zip(encoded) {
        let (seqs, outcome) = result?;
        aligned += outcome.aligned.len();
        snapped += outcome.snapped.len();
        for (i, reason) in [
            SpanDropReason::BoundaryMismatch,
            SpanDropReason::CrossesSentence,
            SpanDropReason::Overlap,
        ]
        .into_iter()
        .enumerate()
        {
            span_drops[i] += outcome.span_drops(reason);
        }
        for (i, reason) in [
            RelationDropReason::ArgumentDropped,
            RelationDropReason::CrossSentenceRelation,
            RelationDropReason::CellConflict,
        ]
        .into_iter()
        .enumerate()
        {
            rel_drops[i] += outcome.relation_drops(reason);
        }
        files.push((doc.doc_id.clone(), doc.text.clone(), write_sequences(&seqs)));
    }
    write_dir_atomically(out, force, |tmp| {
        for (id, text, tsv) in &files {
            fs::write(tmp.join(format!("{id}.tsv")), tsv)?;
            fs::write(tmp.join(format!("{id}.txt")), text)?;
        }
        Ok(())
    })?;
    println!("documents                 {}", docs.len());
    println!("keyphrases aligned        {aligned}");
    println!("  of which snapped        {snapped}");
    println!("dropped: boundary         {}", span_drops[0]);
    println!("dropped: crosses sentence {}", span_drops[1]);
    println!("dropped: overlap          {}", span_drops[2]);
    println!("relations dropped: arg    {}", rel_drops[0]);
    println!("relations dropped: cross  {}", rel_drops[1]);
    println!("relations dropped: cell   {}", rel_drops[2]);
    Ok(Status::Ok)
}

fn convert_to_ann(input: &Path, out: &Path, force: bool) -> anyhow::Result<Status> {
    let mut stems = Vec::new();
    for entry in fs::read_dir(input).with_context(|| format!("reading {}", input.display()))? {
        let path = entry?.path();
        if path.extension().is_some_and(|e| e == "tsv") {
            if let Some(stem) = path.file_stem() {
                stems.push(stem.to_string_lossy().into_owned());
            }
        }
    }
    stems.sort();
    let decoded = parallel::map(&stems, |stem| -> Result<_, String> {
        let tsv_path = input.join(format!("{stem}.tsv"));
        let txt_path = input.join(format!("{stem}.txt"));
        let text =
            fs::read_to_string(&txt_path).map_err(|e| format!("{}: {e}", txt_path.display()))?;
        let tsv =
            fs::read_to_string(&tsv_path).map_err(|e| format!("{}: {e}", tsv_path.display()))?;
        let seqs = read_sequences(&tsv).map_err(|e| e.in_file(&tsv_path).to_string())?;
        let (doc, stats) = decode_document(&seqs, &text, stem)
            .map_err(|e| format!("{}: {e}", tsv_path.display()))?;
        Ok((doc, stats))
    });
    let mut corpus = Corpus::new();
    let mut stats = DecodeStats::default();
    let mut failed = 0;
    for result in decoded {
        match result {
            Ok((doc, s)) => {
                stats.add(s);
                corpus.insert(doc);
            }
            Err(message) => {
                eprintln!("error: {message}");
                failed += 1;
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} file(s) could not be decoded; nothing written");
        return Ok(Status::Problem);
    }
    write_dir_atomically(out, force, |tmp| Ok(write_corpus(tmp, &corpus, true)?))?;
    println!("documents                 {}", corpus.len());
    println!("repaired boundaries       {}", stats.repaired_boundaries);
    println!("type ties                 {}", stats.type_ties);
    println!("stray type labels         {}", stats.stray_types);
    println!("ignored relation cells    {}", stats.ignored_cells);
    Ok(Status::Ok)
}

#[allow(clippy::too_many_arguments)]
fn baseline(
    kind: KindArg,
    train: Option<&Path>,
    seed: u64,
    input: &Path,
    out: &Path,
    scenario: Scenario,
    snap: bool,
    force: bool,
) -> anyhow::Result<Status> {
    let predictions = match kind {
        KindArg::Oracle => {
            let Some(gold) = load_clean(input)? else {
                return Ok(Status::Problem);
            };
            oracle_predict(&gold, snap)?
        }
        KindArg::Random => {
            let (texts, report) =
                load_texts(input).with_context(|| format!("reading {}", input.display()))?;
            if report_issues(&input.display().to_string(), &report) {
                return Ok(Status::Problem);
            }
            let texts = texts.try_map(canonicalize_document)?;
            random_predict(&texts, scenario, seed)?
        }
        KindArg::Gazetteer => {
            let Some(train) = train else {
                bail!("--kind gazetteer needs --train <dir>");
            };
            let Some(train) = load_clean(train)? else {
                return Ok(Status::Problem);
            };
            let (texts, report) =
                load_texts(input).with_context(|| format!("reading {}", input.display()))?;
            if report_issues(&input.display().to_string(), &report) {
                return Ok(Status::Problem);
            }
            gazetteer_predict(&gazetteer_build(&train)?, &texts)
        }
    };
    write_dir_atomically(out, force, |tmp| {
        Ok(write_corpus(tmp, &predictions, false)?)
    })?;
    let n_kp: usize = predictions.documents().map(|d| d.keyphrases.len()).sum();
    let n_rel: usize = predictions.documents().map(|d| d.relations.len()).sum();
    println!(
        "{} documents, {n_kp} keyphrases, {n_rel} relations written to {}",
        predictions.len(),
        out.display()
    );
    Ok(Status::Ok)
}

fn agreement(a: &Path, b: &Path, granularity: Granularity, json: bool) -> anyhow::Result<Status> {
    let (Some(x), Some(y)) = (load_clean(a)?, load_clean(b)?) else {
        return Ok(Status::Problem);
    };
    let report = match agreement_report(&x, &y, granularity) {
        Ok(r) => r,
        Err(e @ Error::EmptyInput(_)) => {
            eprintln!("error: {e}");
            return Ok(Status::Problem);
        }
        Err(e) => return Err(e.into()),
    };
    if json {
        print_json(&report)?;
    } else {
        print!("{report}");
    }
    Ok(Status::Ok)
}
