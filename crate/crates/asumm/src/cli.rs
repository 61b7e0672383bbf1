//! The `asumm` command line.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use asumm_core::classify::logreg::{train_logreg, LogRegModel};
use asumm_core::classify::{
    aspect_classes, aspect_training_data, build_triplets, classify_aspect, classify_relevance,
    relevance_classes, relevance_training_data, AspectBackend, RelevanceBackend, ZsLabelMap,
    ZsVariant, RELEVANCE_FEATURES,
};
use asumm_core::corpus::{stratified_split, Split};
use asumm_core::evalkit::{
    classification_report, cohens_kappa, compression_stats, end_to_end_labels, evaluate_summaries,
    relevance_labels, AspectRouge, ClassificationReport, CompressionReport, EndToEndLabel,
    RougeConfig,
};
use asumm_core::lingfeat::{FeatureVector, PatternLists};
use asumm_core::pipeline::{
    best_answer_baseline, chunk_by_aspect, gold_extractive_summaries, source_chunk,
    summarize_chunks, AbstractiveSummarizer, AspectChunk, LabelSource, SummarizerBackend,
};
use asumm_core::sampler::{answer_count_fences, subsample_per_category, Fences};
use asumm_core::textprep::preprocess_thread;
use asumm_core::{Aspect, Relevance, SummarySet, Thread};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::config::{AspectChoice, BackendChoice, RelevanceChoice, RunConfig, StrategyChoice};
use crate::error::{Error, Result};
use crate::gateway::{Gateway, Mode};
use crate::io;
use crate::manifest::RunManifest;

#[derive(Debug, Parser)]
#[command(name = "asumm", version, about = "Aspect-based summarization of community answers")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for per-thread stages.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
    /// Answer model calls from the built-in stand-ins.
    #[arg(long, global = true)]
    pub offline: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate and normalize a raw thread file.
    Ingest(InOut),
    /// Drop answer-count outliers and subsample threads per category.
    Sample(SampleArgs),
    /// Clean and split answers into sentences.
    Preprocess(PreprocessArgs),
    /// Stratified train/val/test split.
    Split(SplitArgs),
    /// (question, relevant, irrelevant) triplets from annotated threads.
    Triplets(InOut),
    /// Fit the cosine-feature relevance classifier.
    TrainRelevance(TrainArgs),
    /// Fit the mood/pronoun/question-feature aspect classifier.
    TrainAspect(TrainArgs),
    /// Predict relevance and aspect labels.
    Classify(ClassifyArgs),
    /// Produce per-aspect summaries.
    Summarize(SummarizeArgs),
    /// Score summaries (and optionally labels) against gold.
    Evaluate(EvaluateArgs),
    /// Compression statistics of gold summaries.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct InOut {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub io: InOut,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Fence and sampling report (JSON).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[command(flatten)]
    pub io: InOut,
    /// Abbreviation guards, one per line.
    #[arg(long)]
    pub guards: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// thread_id → split map (JSON).
    #[arg(long)]
    pub out: PathBuf,
    /// Train, val and test shares, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub ratios: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write train.jsonl, val.jsonl and test.jsonl here.
    #[arg(long)]
    pub emit_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub io: InOut,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub io: InOut,
    #[arg(long, value_enum)]
    pub relevance: Option<RelevanceChoice>,
    #[arg(long)]
    pub relevance_model: Option<PathBuf>,
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long, value_enum)]
    pub aspect: Option<AspectChoice>,
    #[arg(long)]
    pub aspect_model: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Labels {
    Gold,
    Predicted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Baseline {
    BestAnswer,
}

#[derive(Debug, Args)]
pub struct SummarizeArgs {
    #[command(flatten)]
    pub io: InOut,
    #[arg(long, value_enum)]
    pub strategy: Option<StrategyChoice>,
    #[arg(long, value_enum)]
    pub backend: Option<BackendChoice>,
    /// Which sentence labels form the aspect chunks.
    #[arg(long, value_enum, default_value = "predicted")]
    pub labels: Labels,
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub max_words: Option<usize>,
    /// Copy the best answer into every aspect instead of summarizing.
    #[arg(long, value_enum, conflicts_with = "reference")]
    pub baseline: Option<Baseline>,
    /// Emit gold extractive references (whole gold chunks).
    #[arg(long)]
    pub reference: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Table,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub system: PathBuf,
    #[arg(long)]
    pub gold: PathBuf,
    /// Threads carrying gold and predicted labels, for classification scores.
    #[arg(long)]
    pub classified: Option<PathBuf>,
    /// Two independently annotated copies of the same threads.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    pub agreement: Option<Vec<PathBuf>>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Gold-annotated threads.
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub gold_summaries: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Plot-ready histogram data (CSV).
    #[arg(long)]
    pub histogram: Option<PathBuf>,
    #[arg(long, default_value_t = 20)]
    pub bins: usize,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Ingest(_) => "ingest",
            Command::Sample(_) => "sample",
            Command::Preprocess(_) => "preprocess",
            Command::Split(_) => "split",
            Command::Triplets(_) => "triplets",
            Command::TrainRelevance(_) => "train-relevance",
            Command::TrainAspect(_) => "train-aspect",
            Command::Classify(_) => "classify",
            Command::Summarize(_) => "summarize",
            Command::Evaluate(_) => "evaluate",
            Command::Stats(_) => "stats",
        }
    }
}

/// Maps `f` over `items` on up to `jobs` scoped threads; results keep input
/// order and the first error by position wins.
pub fn par_map<T, R, F>(items: &[T], jobs: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync,
{
    let jobs = jobs.max(1).min(items.len().max(1));
    if jobs == 1 {
        return items.iter().map(&f).collect();
    }
    let chunk = items.len().div_ceil(jobs);
    let f = &f;
    let parts: Vec<Result<Vec<R>>> = std::thread::scope(|s| {
        let handles: Vec<_> = items
            .chunks(chunk)
            .map(|part| s.spawn(move || part.iter().map(f).collect::<Result<Vec<R>>>()))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(items.len());
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}

struct Ctx<'a> {
    cfg: RunConfig,
    jobs: usize,
    manifest: RunManifest,
    gateway: Option<Gateway>,
    stdout: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn gateway(&mut self) -> Result<&Gateway> {
        if self.gateway.is_none() {
            let patterns = self.cfg.pattern_lists()?;
            self.gateway = Some(Gateway::with_patterns(self.cfg.gateway.clone(), patterns)?);
        }
        Ok(self.gateway.as_ref().expect("initialized"))
    }

    fn read_threads(&mut self, path: &Path) -> Result<Vec<Thread>> {
        self.manifest.input(path)?;
        let ingested = io::read_threads(path)?;
        if !ingested.skipped.is_empty() {
            self.manifest.warn(format!(
                "{}: skipped {} thread(s) with no answers",
                path.display(),
                ingested.skipped.len()
            ));
        }
        Ok(ingested.threads)
    }

    fn read_summaries(&mut self, path: &Path) -> Result<Vec<SummarySet>> {
        self.manifest.input(path)?;
        io::read_summaries(path)
    }

    fn write_threads(&mut self, path: &Path, threads: &[Thread]) -> Result<()> {
        io::write_threads(path, threads)?;
        self.manifest.output(path);
        Ok(())
    }

    fn write_jsonl<T: Serialize>(&mut self, path: &Path, items: &[T]) -> Result<()> {
        io::write_jsonl(path, items)?;
        self.manifest.output(path);
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, path: &Path, value: &T) -> Result<()> {
        io::write_json(path, value)?;
        self.manifest.output(path);
        Ok(())
    }

    fn print(&mut self, text: &str) -> Result<()> {
        self.stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e))
    }
}

/// Parses `args` and runs the command; returns the process exit status.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    let name = cli.command.name();
    match run(cli, stdout) {
        Ok(manifest) => {
            let line = serde_json::to_string(&manifest).expect("serializable manifest");
            let _ = writeln!(stderr, "{line}");
            0
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {name}: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<RunManifest> {
    if cli.jobs == 0 {
        return Err(Error::Usage("--jobs must be at least 1".into()));
    }
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    if cli.offline {
        cfg.gateway.mode = Mode::Offline;
    }
    let mode = match cfg.gateway.mode {
        Mode::Live => "live",
        Mode::Offline => "offline",
    };
    let mut ctx = Ctx {
        manifest: RunManifest::new(cli.command.name(), cfg.hash(), cli.jobs, mode),
        cfg,
        jobs: cli.jobs,
        gateway: None,
        stdout,
    };
    if let Some(p) = &cli.config {
        ctx.manifest.input(p)?;
    }
    match cli.command {
        Command::Ingest(a) => ingest(&mut ctx, a)?,
        Command::Sample(a) => sample(&mut ctx, a)?,
        Command::Preprocess(a) => preprocess(&mut ctx, a)?,
        Command::Split(a) => split(&mut ctx, a)?,
        Command::Triplets(a) => triplets(&mut ctx, a)?,
        Command::TrainRelevance(a) => train_relevance(&mut ctx, a)?,
        Command::TrainAspect(a) => train_aspect(&mut ctx, a)?,
        Command::Classify(a) => classify(&mut ctx, a)?,
        Command::Summarize(a) => summarize(&mut ctx, a)?,
        Command::Evaluate(a) => evaluate(&mut ctx, a)?,
        Command::Stats(a) => stats(&mut ctx, a)?,
    }
    if let Some(g) = &ctx.gateway {
        ctx.manifest.gateway = g.stats();
    }
    Ok(ctx.manifest)
}

fn ingest(ctx: &mut Ctx, a: InOut) -> Result<()> {
    let threads = ctx.read_threads(&a.input)?;
    ctx.write_threads(&a.out, &threads)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleReport {
    pub fences: Fences,
    pub input_threads: usize,
    pub outliers: Vec<String>,
    pub within_fences: usize,
    pub k: usize,
    pub seed: u64,
    pub sampled: usize,
    pub per_category: BTreeMap<String, usize>,
}

fn sample(ctx: &mut Ctx, a: SampleArgs) -> Result<()> {
    let seed = ctx.cfg.require_seed(a.seed)?;
    ctx.manifest.seed = Some(seed);
    let k = a.k.unwrap_or(ctx.cfg.sampler.k);
    let threads = ctx.read_threads(&a.io.input)?;
    let fences = answer_count_fences(&threads).map_err(Error::data("sample"))?;
    let (kept, outliers): (Vec<Thread>, Vec<Thread>) = threads
        .iter()
        .cloned()
        .partition(|t| fences.contains(t.answers.len() as f64));
    let sampled = subsample_per_category(&kept, k, seed).map_err(Error::data("sample"))?;
    let mut per_category = BTreeMap::new();
    for t in &sampled {
        *per_category.entry(t.category.clone()).or_insert(0) += 1;
    }
    for (category, n) in &per_category {
        if *n < k {
            ctx.manifest
                .warn(format!("category {category} has only {n} thread(s) within the fences"));
        }
    }
    ctx.write_threads(&a.io.out, &sampled)?;
    if let Some(report) = &a.report {
        let r = SampleReport {
            fences,
            input_threads: threads.len(),
            outliers: outliers.into_iter().map(|t| t.thread_id).collect(),
            within_fences: kept.len(),
            k,
            seed,
            sampled: sampled.len(),
            per_category,
        };
        ctx.write_json(report, &r)?;
    }
    Ok(())
}

fn preprocess(ctx: &mut Ctx, a: PreprocessArgs) -> Result<()> {
    if let Some(g) = &a.guards {
        ctx.manifest.input(g)?;
    }
    let cleaner = ctx.cfg.cleaner(a.guards.as_deref())?;
    let threads = ctx.read_threads(&a.io.input)?;
    let out = par_map(&threads, ctx.jobs, |t| Ok(preprocess_thread(t.clone(), &cleaner)))?;
    ctx.write_threads(&a.io.out, &out)
}

fn split(ctx: &mut Ctx, a: SplitArgs) -> Result<()> {
    let seed = ctx.cfg.require_seed(a.seed)?;
    ctx.manifest.seed = Some(seed);
    let ratios = match a.ratios {
        Some(r) if r.len() == 3 => [r[0], r[1], r[2]],
        Some(r) => return Err(Error::Usage(format!("--ratios takes 3 values, got {}", r.len()))),
        None => ctx.cfg.split.ratios,
    };
    let threads = ctx.read_threads(&a.input)?;
    let outcome = stratified_split(&threads, ratios, seed).map_err(Error::data("split"))?;
    for w in &outcome.warnings {
        ctx.manifest.warn(w.clone());
    }
    ctx.write_json(&a.out, &outcome.assignment)?;
    if let Some(dir) = &a.emit_dir {
        for part in Split::ALL {
            let subset: Vec<Thread> = threads
                .iter()
                .filter(|t| outcome.assignment.get(&t.thread_id) == Some(&part))
                .cloned()
                .collect();
            let name = match part {
                Split::Train => "train.jsonl",
                Split::Val => "val.jsonl",
                Split::Test => "test.jsonl",
            };
            ctx.write_threads(&dir.join(name), &subset)?;
        }
    }
    Ok(())
}

fn triplets(ctx: &mut Ctx, a: InOut) -> Result<()> {
    let threads = ctx.read_threads(&a.input)?;
    let triplets = build_triplets(&threads);
    ctx.write_jsonl(&a.out, &triplets)
}

fn train_config(ctx: &mut Ctx, seed: Option<u64>) -> Result<asumm_core::classify::TrainConfig> {
    let seed = ctx.cfg.require_seed(seed)?;
    ctx.manifest.seed = Some(seed);
    let mut train = ctx.cfg.train.clone();
    train.seed = seed;
    Ok(train)
}

fn train_relevance(ctx: &mut Ctx, a: TrainArgs) -> Result<()> {
    let train = train_config(ctx, a.seed)?;
    let threads = ctx.read_threads(&a.io.input)?;
    let gateway = ctx.gateway()?;
    let (x, y) = relevance_training_data(&threads, gateway).map_err(Error::data("train-relevance"))?;
    let names: Vec<String> = RELEVANCE_FEATURES.iter().map(|s| s.to_string()).collect();
    let model = train_logreg(&x, &y, &relevance_classes(), &names, &train).map_err(Error::data("train-relevance"))?;
    ctx.write_json(&a.io.out, &model)
}

fn train_aspect(ctx: &mut Ctx, a: TrainArgs) -> Result<()> {
    let train = train_config(ctx, a.seed)?;
    let threads = ctx.read_threads(&a.io.input)?;
    let patterns = ctx.cfg.pattern_lists()?;
    let gateway = ctx.gateway()?;
    let (x, y) = aspect_training_data(&threads, &patterns, gateway).map_err(Error::data("train-aspect"))?;
    let names: Vec<String> = FeatureVector::NAMES.iter().map(|s| s.to_string()).collect();
    let model = train_logreg(&x, &y, &aspect_classes(), &names, &train).map_err(Error::data("train-aspect"))?;
    ctx.write_json(&a.io.out, &model)
}

fn load_model(ctx: &mut Ctx, path: Option<PathBuf>, what: &str) -> Result<LogRegModel> {
    let path = path.ok_or_else(|| Error::Usage(format!("{what} requires a model file")))?;
    ctx.manifest.input(&path)?;
    io::read_json(&path)
}

fn classify(ctx: &mut Ctx, a: ClassifyArgs) -> Result<()> {
    let relevance = a.relevance.unwrap_or(ctx.cfg.classify.relevance);
    let aspect = a.aspect.unwrap_or(ctx.cfg.classify.aspect);
    let threshold = a.threshold.unwrap_or(ctx.cfg.classify.pair_threshold);
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::Usage("--threshold must lie in [0, 1]".into()));
    }
    let relevance_model = match relevance {
        RelevanceChoice::CosineLr => Some(load_model(
            ctx,
            a.relevance_model.or(ctx.cfg.classify.relevance_model.clone()),
            "--relevance cosine-lr",
        )?),
        RelevanceChoice::Pair => None,
    };
    let aspect_model = match aspect {
        AspectChoice::Gm => Some(load_model(
            ctx,
            a.aspect_model.or(ctx.cfg.classify.aspect_model.clone()),
            "--aspect gm",
        )?),
        _ => None,
    };
    let patterns: PatternLists = ctx.cfg.pattern_lists()?;
    let labels: ZsLabelMap = ctx.cfg.zs_labels()?;
    let threads = ctx.read_threads(&a.io.input)?;
    let jobs = ctx.jobs;
    let gateway = ctx.gateway()?;
    let out = par_map(&threads, jobs, |t| {
        let rb = match &relevance_model {
            Some(model) => RelevanceBackend::CosineLr {
                embedder: gateway,
                model,
            },
            None => RelevanceBackend::PairClassifier {
                classifier: gateway,
                threshold,
            },
        };
        let ab = match (aspect, &aspect_model) {
            (AspectChoice::Gm, Some(model)) => AspectBackend::Gm {
                model,
                patterns: &patterns,
                moods: gateway,
            },
            (AspectChoice::Zs | AspectChoice::ZsPp, _) => AspectBackend::Zs {
                nli: gateway,
                labels: &labels,
                patterns: &patterns,
                variant: if aspect == AspectChoice::Zs {
                    ZsVariant::Zs
                } else {
                    ZsVariant::ZsPp
                },
            },
            _ => AspectBackend::Multiclass(gateway),
        };
        let t = classify_relevance(t.clone(), &rb).map_err(Error::data("relevance"))?;
        classify_aspect(t, &ab).map_err(Error::data("aspect"))
    })?;
    ctx.write_threads(&a.io.out, &out)
}

fn summarize(ctx: &mut Ctx, a: SummarizeArgs) -> Result<()> {
    let mut scfg = ctx.cfg.summarizer.clone();
    if let Some(s) = a.strategy {
        scfg.strategy = s;
    }
    if let Some(b) = a.backend {
        scfg.backend = b;
    }
    if let Some(f) = a.family {
        scfg.family = f;
    }
    if let Some(m) = a.max_words {
        if m == 0 {
            return Err(Error::Usage("--max-words must be at least 1".into()));
        }
        scfg.max_words = m;
    }
    let threads = ctx.read_threads(&a.io.input)?;
    let spec = scfg.spec();
    let jobs = ctx.jobs;

    let sets: Vec<SummarySet> = if a.baseline == Some(Baseline::BestAnswer) {
        threads
            .iter()
            .map(|t| best_answer_baseline(t, &scfg.ans_aspects))
            .collect()
    } else if a.reference {
        threads
            .iter()
            .map(|t| gold_extractive_summaries(t).map_err(Error::data("chunk")))
            .collect::<Result<_>>()?
    } else {
        let gateway: Option<&Gateway> = match spec.backend {
            SummarizerBackend::GatewayAbstractive => Some(ctx.gateway()?),
            SummarizerBackend::ExtractiveLead => None,
        };
        let source = match a.labels {
            Labels::Gold => LabelSource::Gold,
            Labels::Predicted => LabelSource::Predicted,
        };
        par_map(&threads, jobs, |t| {
            let chunks: Vec<AspectChunk> = match scfg.strategy {
                StrategyChoice::Ans => scfg
                    .ans_aspects
                    .iter()
                    .map(|&aspect| source_chunk(t, aspect))
                    .filter(|c| !c.sentences.is_empty())
                    .collect(),
                StrategyChoice::Pipeline => chunk_by_aspect(t, source).map_err(Error::data("chunk"))?,
            };
            summarize_chunks(
                &t.thread_id,
                &chunks,
                &spec,
                gateway.map(|g| g as &dyn AbstractiveSummarizer),
                scfg.on_gateway_error,
            )
            .map_err(Error::data("summarize"))
        })?
    };
    ctx.write_jsonl(&a.io.out, &sets)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RougeSettings {
    pub lowercase: bool,
    pub strip_punctuation: bool,
    pub stemming: bool,
    pub stopword_removal: bool,
    /// The number reported in tables.
    pub headline: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agreement {
    pub sentences: usize,
    pub relevance_kappa: f64,
    /// Over the five end-to-end labels (four aspects plus NA).
    pub aspect_kappa: f64,
}

/// Externally collected human ratings; never filled in by this tool.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct HumanEval {
    pub coherence: Option<f64>,
    pub consistency: Option<f64>,
    pub fluency: Option<f64>,
    pub relevance: Option<f64>,
    pub coverage: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub threads: usize,
    pub rouge_settings: RougeSettings,
    pub rouge: BTreeMap<Aspect, AspectRouge>,
    pub relevance: Option<ClassificationReport<Relevance>>,
    pub aspect: Option<ClassificationReport<Aspect>>,
    pub end_to_end: Option<ClassificationReport<EndToEndLabel>>,
    pub agreement: Option<Agreement>,
    pub human: Option<HumanEval>,
}

fn agreement(a: &[Thread], b: &[Thread]) -> Result<Agreement> {
    let bmap = io::by_id(b);
    let mut a_aligned = Vec::new();
    let mut b_aligned = Vec::new();
    for t in a {
        let other = bmap
            .get(t.thread_id.as_str())
            .ok_or_else(|| Error::data("agreement")(asumm_core::Error::UnmatchedThread(t.thread_id.clone())))?;
        if t.sentence_count() != other.sentence_count() {
            return Err(Error::data("agreement")(asumm_core::Error::LengthMismatch {
                left: t.sentence_count(),
                right: other.sentence_count(),
            }));
        }
        a_aligned.push(t.clone());
        b_aligned.push((*other).clone());
    }
    // treat annotator B's labels as "predictions" to reuse the label extractors
    for t in &mut b_aligned {
        for s in t.sentences_mut() {
            s.relevance_pred = s.relevance_gold;
            s.aspect_pred = s.aspect_gold;
        }
    }
    let (ra, _) = relevance_labels_gold(&a_aligned)?;
    let (_, rb) = relevance_labels(&b_aligned).map_err(Error::data("agreement"))?;
    let ea = end_to_end_gold(&a_aligned)?;
    let (_, eb) = end_to_end_labels(&b_aligned).map_err(Error::data("agreement"))?;
    Ok(Agreement {
        sentences: ra.len(),
        relevance_kappa: cohens_kappa(&ra, &rb).map_err(Error::data("agreement"))?,
        aspect_kappa: cohens_kappa(&ea, &eb).map_err(Error::data("agreement"))?,
    })
}

fn relevance_labels_gold(threads: &[Thread]) -> Result<(Vec<Relevance>, ())> {
    threads
        .iter()
        .flat_map(Thread::sentences)
        .map(|s| s.relevance_gold)
        .collect::<Option<Vec<_>>>()
        .map(|v| (v, ()))
        .ok_or_else(|| Error::Usage("agreement files must carry gold relevance labels".into()))
}

fn end_to_end_gold(threads: &[Thread]) -> Result<Vec<EndToEndLabel>> {
    let (labels, _) = relevance_labels_gold(threads)?;
    Ok(threads
        .iter()
        .flat_map(Thread::sentences)
        .zip(labels)
        .map(|(s, r)| match (r, s.aspect_gold) {
            (Relevance::Relevant, Some(a)) => EndToEndLabel::Aspect(a),
            _ => EndToEndLabel::Na,
        })
        .collect())
}

pub fn evaluate_files(
    system: &[SummarySet],
    gold: &[SummarySet],
    classified: Option<&[Thread]>,
    annotators: Option<(&[Thread], &[Thread])>,
) -> Result<EvalReport> {
    let rcfg = RougeConfig::default();
    let rouge = evaluate_summaries(system, gold, &rcfg).map_err(Error::data("evaluate"))?;
    let mut report = EvalReport {
        threads: gold.len(),
        rouge_settings: RougeSettings {
            lowercase: rcfg.lowercase,
            strip_punctuation: rcfg.strip_punctuation,
            stemming: false,
            stopword_removal: false,
            headline: "f1".into(),
        },
        rouge,
        relevance: None,
        aspect: None,
        end_to_end: None,
        agreement: None,
        human: None,
    };
    if let Some(threads) = classified {
        let stage = Error::data;
        let (g, p) = relevance_labels(threads).map_err(stage("evaluate"))?;
        report.relevance = Some(
            classification_report(&g, &p, Some(&[Relevance::Irrelevant, Relevance::Relevant]))
                .map_err(stage("evaluate"))?,
        );
        let (g, p) = asumm_core::evalkit::aspect_labels(threads);
        report.aspect = Some(classification_report(&g, &p, Some(&Aspect::ALL)).map_err(stage("evaluate"))?);
        let (g, p) = end_to_end_labels(threads).map_err(stage("evaluate"))?;
        report.end_to_end =
            Some(classification_report(&g, &p, Some(&EndToEndLabel::ALL)).map_err(stage("evaluate"))?);
    }
    if let Some((a, b)) = annotators {
        report.agreement = Some(agreement(a, b)?);
    }
    Ok(report)
}

fn f4(x: f64) -> String {
    format!("{x:.4}")
}

pub fn render_eval_table(r: &EvalReport) -> String {
    let mut s = String::new();
    s.push_str(&format!(
        "{:<12} {:>8} {:>8} {:>8} {:>6} {:>8}\n",
        "aspect", "R1", "R2", "RL", "pairs", "missing"
    ));
    for (aspect, v) in &r.rouge {
        s.push_str(&format!(
            "{:<12} {:>8} {:>8} {:>8} {:>6} {:>8}\n",
            aspect.as_str(),
            f4(v.mean.r1.f1),
            f4(v.mean.r2.f1),
            f4(v.mean.rl.f1),
            v.pairs,
            v.missing
        ));
    }
    let mut class_block = |title: &str, labels: Vec<String>, rep: (&[asumm_core::evalkit::ClassMetrics], f64)| {
        s.push_str(&format!("\n{title} (macro-F1 {})\n", f4(rep.1)));
        s.push_str(&format!("{:<12} {:>8} {:>8} {:>8} {:>8}\n", "class", "P", "R", "F1", "support"));
        for (l, m) in labels.iter().zip(rep.0) {
            s.push_str(&format!(
                "{:<12} {:>8} {:>8} {:>8} {:>8}\n",
                l,
                f4(m.precision),
                f4(m.recall),
                f4(m.f1),
                m.support
            ));
        }
    };
    if let Some(c) = &r.relevance {
        class_block("relevance", c.labels.iter().map(|l| format!("{l:?}").to_lowercase()).collect(), (&c.per_class, c.macro_f1));
    }
    if let Some(c) = &r.aspect {
        class_block("aspect", c.labels.iter().map(|l| l.as_str().to_string()).collect(), (&c.per_class, c.macro_f1));
    }
    if let Some(c) = &r.end_to_end {
        class_block("end-to-end", c.labels.iter().map(ToString::to_string).collect(), (&c.per_class, c.macro_f1));
        s.push_str("\nconfusion (rows gold, columns predicted)\n");
        s.push_str(&format!("{:<12}", ""));
        for l in &c.labels {
            s.push_str(&format!(" {:>11}", l.to_string()));
        }
        s.push('\n');
        for (l, row) in c.labels.iter().zip(&c.confusion.counts) {
            s.push_str(&format!("{:<12}", l.to_string()));
            for n in row {
                s.push_str(&format!(" {n:>11}"));
            }
            s.push('\n');
        }
    }
    if let Some(a) = &r.agreement {
        s.push_str(&format!(
            "\nagreement over {} sentences: relevance kappa {}, aspect kappa {}\n",
            a.sentences,
            f4(a.relevance_kappa),
            f4(a.aspect_kappa)
        ));
    }
    s
}

fn evaluate(ctx: &mut Ctx, a: EvaluateArgs) -> Result<()> {
    let system = ctx.read_summaries(&a.system)?;
    let gold = ctx.read_summaries(&a.gold)?;
    let classified = match &a.classified {
        Some(p) => Some(ctx.read_threads(p)?),
        None => None,
    };
    let annotators = match &a.agreement {
        Some(paths) => Some((ctx.read_threads(&paths[0])?, ctx.read_threads(&paths[1])?)),
        None => None,
    };
    let report = evaluate_files(
        &system,
        &gold,
        classified.as_deref(),
        annotators.as_ref().map(|(x, y)| (x.as_slice(), y.as_slice())),
    )?;
    if let Some(out) = &a.out {
        ctx.write_json(out, &report)?;
    }
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("serializable report") + "\n",
        Format::Table => render_eval_table(&report),
    };
    ctx.print(&text)
}

/// Equal-width histogram over `[0, max(1, max value)]`.
pub fn histogram(values: &[f64], bins: usize) -> Vec<(f64, f64, usize)> {
    let top = values.iter().copied().fold(1.0_f64, f64::max);
    let width = top / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in values {
        let i = ((v / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, c)| (i as f64 * width, (i + 1) as f64 * width, c))
        .collect()
}

pub fn histogram_csv(report: &CompressionReport, bins: usize) -> String {
    let mut series: Vec<(String, Vec<f64>)> = vec![
        ("summary_ratio".into(), report.threads.iter().map(|t| t.summary_ratio).collect()),
        ("relevance_ratio".into(), report.threads.iter().map(|t| t.relevance_ratio).collect()),
    ];
    for aspect in Aspect::ALL {
        let v: Vec<f64> = report
            .threads
            .iter()
            .filter_map(|t| t.aspect_ratios.get(&aspect).copied())
            .collect();
        if !v.is_empty() {
            series.push((format!("aspect_ratio:{}", aspect.as_str()), v));
        }
    }
    let mut s = String::from("metric,bin_lower,bin_upper,count\n");
    for (name, values) in series {
        for (lo, hi, n) in histogram(&values, bins) {
            s.push_str(&format!("{name},{lo:.6},{hi:.6},{n}\n"));
        }
    }
    s
}

pub fn render_stats_table(r: &CompressionReport) -> String {
    let mut s = format!("{:<22} {:>8} {:>8} {:>6}\n", "ratio", "mean", "std", "n");
    let mut row = |name: &str, m: &asumm_core::evalkit::Summary| {
        s.push_str(&format!("{:<22} {:>8} {:>8} {:>6}\n", name, f4(m.mean), f4(m.std), m.n));
    };
    row("summary/answers", &r.summary);
    row("relevant/answers", &r.relevance);
    for (aspect, m) in &r.per_aspect {
        row(&format!("{}/chunk", aspect.as_str()), m);
    }
    s
}

fn stats(ctx: &mut Ctx, a: StatsArgs) -> Result<()> {
    if a.bins == 0 {
        return Err(Error::Usage("--bins must be at least 1".into()));
    }
    let threads = ctx.read_threads(&a.input)?;
    let gold = ctx.read_summaries(&a.gold_summaries)?;
    let report = compression_stats(&threads, &gold).map_err(Error::data("stats"))?;
    for w in &report.warnings {
        ctx.manifest.warn(w.clone());
    }
    if let Some(out) = &a.out {
        ctx.write_json(out, &report)?;
    }
    if let Some(h) = &a.histogram {
        io::write_atomic(h, histogram_csv(&report, a.bins).as_bytes())?;
        ctx.manifest.output(h);
    }
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&report).expect("serializable report") + "\n",
        Format::Table => render_stats_table(&report),
    };
    ctx.print(&text)
}
