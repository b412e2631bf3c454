//! Command-line entry point. Every subcommand writes a run manifest next
//! to its primary output; all randomness derives from `--seed`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use embedforge_core::batching::{build_epoch, subsample_indices, TrainingConfig, TrainingSource};
use embedforge_core::filter::FilterConfig;
use embedforge_core::mining::{mine_hard_negatives, MiningParams};
use embedforge_core::prompts::ParamDomains;
use embedforge_core::rng::{stream, stream_id};
use embedforge_core::topics::{fit_topic_distribution, TopicDistribution};
use embedforge_core::toy::{heldout_ndcg10, synthetic_task, toy_config, train_toy, SyntheticSpec, ToyEncoder};
use embedforge_core::vocab::{reduction_ratio, trim_vocabulary, EmbeddingMatrix};
use embedforge_core::Category;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::evaluate::{evaluate, load_manifest, render_markdown, ModelReport};
use crate::generation::{load_campaign_config, load_param_domains, run_campaign, slot_prompt, HttpTransport};
use crate::io;
use crate::rerank::{apply_filter, score_triplets, HttpReranker, ScoreCache};
use crate::runlog::{hash_paths, manifest_path, unix_now, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "embedforge", version, about = "Synthesize, filter, batch and evaluate text-embedding training data")]
pub struct Cli {
    /// Master seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for parallel stages.
    #[arg(long, global = true, default_value_t = default_jobs())]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

fn default_jobs() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the two-label topic distribution from a classified query log.
    FitTopics(FitTopicsArgs),
    /// Render sampled prompts without sending them.
    GenPrompts(GenPromptsArgs),
    /// Run or resume a generation campaign.
    Generate(GenerateArgs),
    /// Keep triplets whose reranker margin lies strictly inside (0, C).
    Filter(FilterArgs),
    /// Mine hard negatives from a teacher run.
    MineNegatives(MineArgs),
    /// Plan source-homogeneous batches for a training mix.
    BuildBatches(BuildBatchesArgs),
    /// Train the hashing toy encoder.
    TrainToy(TrainToyArgs),
    /// Trim an embedding matrix to the most frequent tokens.
    TrimVocab(TrimVocabArgs),
    /// Evaluate embeddings on the datasets of a task manifest.
    Evaluate(EvaluateArgs),
    /// Render evaluation reports as a markdown table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct FitTopicsArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenPromptsArgs {
    #[arg(long)]
    pub topics: PathBuf,
    #[arg(long)]
    pub category: Category,
    #[arg(long)]
    pub count: u64,
    /// Parameter domains TOML; the built-in domains when omitted.
    #[arg(long)]
    pub domains: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub topics: PathBuf,
    #[arg(long)]
    pub domains: Option<PathBuf>,
    /// Append-only journal; an existing one is resumed.
    #[arg(long)]
    pub journal: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Overrides the seed in the campaign config.
    #[arg(long)]
    pub campaign_seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct FilterArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Precomputed scores, JSONL of {"id", "s_pos", "s_neg"}.
    #[arg(long, conflicts_with = "reranker_url", required_unless_present = "reranker_url")]
    pub scores: Option<PathBuf>,
    #[arg(long)]
    pub reranker_url: Option<String>,
    /// Reranker score cache (JSONL).
    #[arg(long)]
    pub cache: Option<PathBuf>,
    #[arg(long, default_value_t = 60.0)]
    pub timeout_secs: f64,
    #[arg(long, default_value_t = 0.96)]
    pub c: f64,
    /// Defaults to `<in>` with a `.kept.jsonl` extension.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Rejected ids with reasons (TSV).
    #[arg(long)]
    pub rejected: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MineArgs {
    /// Teacher scores as a TREC run.
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long)]
    pub qrels: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub top_n: usize,
    #[arg(long, default_value_t = 100)]
    pub window: usize,
    #[arg(long, default_value_t = 1)]
    pub per_query: usize,
}

#[derive(Debug, Args)]
pub struct BuildBatchesArgs {
    /// Mix TOML with `batch_size` and `[[source]]` tables.
    #[arg(long)]
    pub mix: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub epochs: usize,
}

#[derive(Debug, Args)]
pub struct TrainToyArgs {
    /// Triplets to train on; the synthetic separable task when omitted.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Output directory for loss.csv, weights.vmat and summary.json.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long, default_value_t = embedforge_core::toy::DEFAULT_HASH_DIM)]
    pub hash_dim: usize,
    #[arg(long, default_value_t = embedforge_core::toy::DEFAULT_EMBED_DIM)]
    pub embed_dim: usize,
}

#[derive(Debug, Args)]
pub struct TrimVocabArgs {
    #[arg(long)]
    pub matrix: PathBuf,
    #[arg(long)]
    pub stats: PathBuf,
    #[arg(long)]
    pub target: usize,
    /// Tokens always kept, in order; repeatable.
    #[arg(long = "special")]
    pub specials: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub id_map: PathBuf,
    /// Total model parameters, to report the overall reduction ratio.
    #[arg(long)]
    pub total_params: Option<u64>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Embedding root with one directory per dataset id.
    #[arg(long)]
    pub emb: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Model name in the report; defaults to the manifest's or the emb directory name.
    #[arg(long)]
    pub model: Option<String>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Report JSON files, one table row each.
    #[arg(long = "in", required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    /// Markdown output; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// What a subcommand read and wrote, for the run manifest.
struct Run {
    config: Option<PathBuf>,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Run {
    fn new(config: Option<&Path>, inputs: &[&Path], outputs: &[&Path]) -> Self {
        Run {
            config: config.map(Path::to_path_buf),
            inputs: inputs.iter().map(|p| p.to_path_buf()).collect(),
            outputs: outputs.iter().map(|p| p.to_path_buf()).collect(),
        }
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let text = serde_json::to_string_pretty(value).expect("serializable");
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

fn domains(path: Option<&Path>) -> Result<ParamDomains> {
    path.map_or_else(|| Ok(ParamDomains::default()), load_param_domains)
}

fn fit_topics(a: &FitTopicsArgs) -> Result<Run> {
    let samples = io::load_labeled_queries(&a.input)?;
    let dist = fit_topic_distribution(&samples)?;
    write_json(&a.out, &dist)?;
    log::info!("fitted {} topics from {} queries", dist.taxonomy.len(), samples.len());
    Ok(Run::new(None, &[&a.input], &[&a.out]))
}

fn gen_prompts(a: &GenPromptsArgs, seed: u64) -> Result<Run> {
    let dist: TopicDistribution = read_json(&a.topics)?;
    let sampler = dist.sampler()?;
    let domains = domains(a.domains.as_deref())?;
    let mut rows = Vec::new();
    for slot in 0..a.count {
        let p = slot_prompt(a.category, slot, seed, &sampler, &domains)?;
        rows.push(json!({
            "id": p.id,
            "tier": p.hardness.tier.as_str(),
            "hardness": p.hardness.score,
            "prompt_hash": p.prompt_hash,
            "params": p.params,
            "prompt": p.prompt,
        }));
    }
    io::write_jsonl(&a.out, rows)?;
    let mut inputs = vec![a.topics.as_path()];
    inputs.extend(a.domains.as_deref());
    Ok(Run::new(a.domains.as_deref(), &inputs, &[&a.out]))
}

fn generate(a: &GenerateArgs) -> Result<Run> {
    let mut cfg = load_campaign_config(&a.config)?;
    if let Some(s) = a.campaign_seed {
        cfg.seed = s;
    }
    let dist: TopicDistribution = read_json(&a.topics)?;
    let domains = domains(a.domains.as_deref())?;
    let transport = HttpTransport::from_env();
    let outcome = run_campaign(&cfg, &dist, &domains, &transport, &a.journal)?;
    io::write_triplets(&a.out, &outcome.triplets)?;
    let stats_path = a.out.with_extension("stats.json");
    write_json(&stats_path, &outcome.stats)?;
    log::info!("{} triplets, {} requests, cost {:.4}", outcome.triplets.len(), outcome.stats.requests, outcome.stats.cost);
    Ok(Run::new(Some(&a.config), &[&a.config, &a.topics], &[&a.out, &stats_path, &a.journal]))
}

fn filter(a: &FilterArgs, jobs: usize) -> Result<Run> {
    let cfg = FilterConfig::new(a.c)?;
    let set = io::load_triplets(&a.input, None)?;
    if !set.rejections.is_empty() {
        log::warn!("{} invalid lines skipped", set.rejections.len());
    }
    let mut inputs = vec![a.input.clone()];
    let scores = match (&a.scores, &a.reranker_url) {
        (Some(path), _) => {
            inputs.push(path.clone());
            io::load_score_run(path)?
        }
        (None, Some(url)) => {
            let reranker = HttpReranker::new(url.clone(), Duration::from_secs_f64(a.timeout_secs));
            let mut cache = match &a.cache {
                Some(p) => ScoreCache::open(p)?,
                None => ScoreCache::in_memory(),
            };
            score_triplets(&set.triplets, &reranker, &mut cache, jobs)?
        }
        (None, None) => return Err(Error::Config("either --scores or --reranker-url is required".into())),
    };
    let out = a.out.clone().unwrap_or_else(|| a.input.with_extension("kept.jsonl"));
    let filtered = apply_filter(set.triplets, &scores, &cfg)?;
    io::write_triplets(&out, &filtered.kept)?;
    let mut outputs = vec![out.clone()];
    if let Some(path) = &a.rejected {
        let rows: Vec<String> = filtered.rejected.iter().map(|(id, r)| format!("{id}\t{r}")).collect();
        let text = if rows.is_empty() { String::new() } else { rows.join("\n") + "\n" };
        std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
        outputs.push(path.clone());
    }
    log::info!("kept {}, rejected {}", filtered.kept.len(), filtered.rejected.len());
    let inputs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    let outputs: Vec<&Path> = outputs.iter().map(PathBuf::as_path).collect();
    Ok(Run::new(None, &inputs, &outputs))
}

fn mine(a: &MineArgs, seed: u64) -> Result<Run> {
    let run = io::load_teacher_run(&a.run)?;
    let qrels = io::load_qrels(&a.qrels)?;
    let params = MiningParams { top_n_for_sigma: a.top_n, candidate_window_k: a.window, negatives_per_query: a.per_query, seed };
    params.validate()?;
    let mut records = Vec::new();
    for (qi, (qid, judged)) in qrels.iter().enumerate() {
        let Some(scores) = run.get(qid) else {
            log::warn!("query {qid} has no teacher scores");
            continue;
        };
        let relevant: BTreeSet<String> = judged.iter().filter(|(_, g)| **g > 0).map(|(d, _)| d.clone()).collect();
        for (pi, pos) in relevant.iter().enumerate() {
            let others: BTreeSet<String> = relevant.iter().filter(|d| *d != pos).cloned().collect();
            let mut rng = stream(seed, stream_id(qi as u64, pi as u64));
            match mine_hard_negatives(qid, scores, pos, &others, &params, &mut rng) {
                Ok(m) => records.push(io::MinedRecord { qid: m.query_id, pos: m.positive, negs: m.sampled, sigma: m.sigma }),
                Err(e @ (embedforge_core::Error::PositiveMissing(_) | embedforge_core::Error::EmptyEligible(_))) => {
                    log::warn!("query {qid}: {e}");
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    io::write_mined(&a.out, &records)?;
    Ok(Run::new(None, &[&a.run, &a.qrels], &[&a.out]))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MixSource {
    name: TrainingSource,
    #[serde(default)]
    path: Option<PathBuf>,
    #[serde(default)]
    count: Option<usize>,
    #[serde(default)]
    fraction: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MixManifest {
    #[serde(default)]
    training: Option<TrainingConfig>,
    #[serde(default)]
    batch_size: Option<usize>,
    #[serde(rename = "source")]
    sources: Vec<MixSource>,
}

fn build_batches(a: &BuildBatchesArgs, seed: u64) -> Result<Run> {
    let text = std::fs::read_to_string(&a.mix).map_err(|e| Error::io(&a.mix, e))?;
    let mix: MixManifest = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", a.mix.display())))?;
    let base = a.mix.parent().unwrap_or(Path::new("."));
    let mut cfg = mix.training.unwrap_or_default();
    if let Some(b) = mix.batch_size {
        cfg.batch_size = b;
    }
    cfg.seed = seed;

    let mut counts = BTreeMap::new();
    let mut kept_indices: BTreeMap<TrainingSource, Vec<usize>> = BTreeMap::new();
    let mut inputs = vec![a.mix.clone()];
    for (si, s) in mix.sources.iter().enumerate() {
        let available = match (&s.path, s.count) {
            (Some(p), count) => {
                let p = base.join(p);
                let n = io::load_triplets(&p, s.file_category())?.triplets.len();
                inputs.push(p);
                count.map_or(n, |c| c.min(n))
            }
            (None, Some(c)) => c,
            (None, None) => return Err(Error::Config(format!("source {} needs a path or a count", s.name))),
        };
        let idx = match s.fraction {
            Some(f) => subsample_indices(available, f, &mut stream(seed, stream_id(1, si as u64)))?,
            None => (0..available).collect(),
        };
        if counts.insert(s.name, idx.len()).is_some() {
            return Err(Error::Config(format!("source {} listed twice", s.name)));
        }
        kept_indices.insert(s.name, idx);
    }

    let mut rows = Vec::new();
    for epoch in 0..a.epochs {
        let batches = build_epoch(&counts, &cfg, &mut stream(seed, stream_id(2, epoch as u64)))?;
        for (bi, b) in batches.into_iter().enumerate() {
            let items: Vec<usize> = b.items.iter().map(|i| kept_indices[&b.source][*i]).collect();
            rows.push(json!({
                "epoch": epoch,
                "batch": bi,
                "source": b.source,
                "in_batch_negatives": b.in_batch_negatives_enabled,
                "items": items,
            }));
        }
    }
    log::info!("{} batches over {} epoch(s)", rows.len(), a.epochs);
    io::write_jsonl(&a.out, rows)?;
    let inputs: Vec<&Path> = inputs.iter().map(PathBuf::as_path).collect();
    Ok(Run::new(Some(&a.mix), &inputs, &[&a.out]))
}

impl MixSource {
    /// Public retrieval sets are stored with the retrieval keys.
    fn file_category(&self) -> Option<Category> {
        match self.name {
            TrainingSource::Synthetic(c) => Some(c),
            _ => Some(Category::ShortLong),
        }
    }
}

fn train_toy_cmd(a: &TrainToyArgs, seed: u64) -> Result<Run> {
    let mut cfg = toy_config(seed);
    if let Some(e) = a.epochs {
        cfg.epochs = e;
    }
    if let Some(b) = a.batch_size {
        cfg.batch_size = b;
    }
    if let Some(lr) = a.lr {
        cfg.learning_rate = lr;
    }
    let encoder = ToyEncoder::new(a.hash_dim, a.embed_dim, seed)?;
    let mut inputs = Vec::new();
    let (data, heldout) = match &a.data {
        Some(p) => {
            inputs.push(p.as_path());
            (io::load_triplets(p, None)?.triplets, None)
        }
        None => {
            let task = synthetic_task(&SyntheticSpec::default(), seed)?;
            (task.train, Some(task.heldout))
        }
    };
    let baseline = heldout.as_ref().map(|h| heldout_ndcg10(&encoder, h)).transpose()?;
    let (trained, losses) = train_toy(encoder, &data, &cfg)?;
    let after = heldout.as_ref().map(|h| heldout_ndcg10(&trained, h)).transpose()?;

    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    let loss_path = a.out.join("loss.csv");
    io::write_loss_curve(&loss_path, &losses)?;
    let tokens: Vec<String> = (0..trained.hash_dim).map(|i| format!("h{i}")).collect();
    let rows: Vec<f32> = trained.weights.iter().map(|w| *w as f32).collect();
    let weights_path = a.out.join("weights.vmat");
    io::write_matrix(&weights_path, &EmbeddingMatrix::new(tokens, trained.embed_dim, rows)?)?;
    let per_epoch = losses.len() / cfg.epochs.max(1);
    let epoch_mean = |e: usize| {
        let s = &losses[e * per_epoch..(e + 1) * per_epoch];
        s.iter().sum::<f64>() / s.len().max(1) as f64
    };
    let summary_path = a.out.join("summary.json");
    write_json(
        &summary_path,
        &json!({
            "config": cfg,
            "batches": losses.len(),
            "first_epoch_loss": (per_epoch > 0).then(|| epoch_mean(0)),
            "final_epoch_loss": (per_epoch > 0).then(|| epoch_mean(cfg.epochs - 1)),
            "baseline_ndcg10": baseline,
            "trained_ndcg10": after,
        }),
    )?;
    Ok(Run::new(None, &inputs, &[&loss_path, &weights_path, &summary_path]))
}

fn trim_vocab(a: &TrimVocabArgs) -> Result<Run> {
    let mat = io::read_matrix(&a.matrix)?;
    let stats = io::read_token_stats(&a.stats)?;
    let trimmed = trim_vocabulary(&mat, &stats, a.target, &a.specials)?;
    io::write_matrix(&a.out, &trimmed.matrix)?;
    io::write_id_map(&a.id_map, &trimmed.id_map)?;
    if let Some(total) = a.total_params {
        let r = reduction_ratio(mat.vocab_size() as u64, trimmed.matrix.vocab_size() as u64, mat.dim() as u64, total)?;
        log::info!("parameter reduction {:.1}%", 100.0 * r);
    }
    Ok(Run::new(None, &[&a.matrix, &a.stats], &[&a.out, &a.id_map]))
}

fn evaluate_cmd(a: &EvaluateArgs, jobs: usize) -> Result<Run> {
    let manifest = load_manifest(&a.manifest)?;
    let model = a.model.clone().or_else(|| manifest.model.clone()).unwrap_or_else(|| {
        a.emb.file_name().map_or_else(|| "model".to_string(), |n| n.to_string_lossy().into_owned())
    });
    let report = evaluate(&manifest, &a.emb, &model, jobs)?;
    write_json(&a.out, &report)?;
    Ok(Run::new(Some(&a.manifest), &[&a.manifest, &a.emb], &[&a.out]))
}

fn report(a: &ReportArgs) -> Result<Run> {
    let reports: Vec<ModelReport> = a.inputs.iter().map(|p| read_json(p)).collect::<Result<_>>()?;
    let table = render_markdown(&reports);
    let inputs: Vec<&Path> = a.inputs.iter().map(PathBuf::as_path).collect();
    match &a.out {
        Some(out) => {
            std::fs::write(out, &table).map_err(|e| Error::io(out, e))?;
            Ok(Run::new(None, &inputs, &[out]))
        }
        None => {
            print!("{table}");
            Ok(Run::new(None, &inputs, &[]))
        }
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::FitTopics(_) => "fit-topics",
            Command::GenPrompts(_) => "gen-prompts",
            Command::Generate(_) => "generate",
            Command::Filter(_) => "filter",
            Command::MineNegatives(_) => "mine-negatives",
            Command::BuildBatches(_) => "build-batches",
            Command::TrainToy(_) => "train-toy",
            Command::TrimVocab(_) => "trim-vocab",
            Command::Evaluate(_) => "evaluate",
            Command::Report(_) => "report",
        }
    }
}

/// Runs a parsed command line and writes its run manifest.
pub fn execute(cli: &Cli) -> Result<()> {
    let started = unix_now();
    let jobs = cli.jobs.max(1);
    let run = match &cli.command {
        Command::FitTopics(a) => fit_topics(a)?,
        Command::GenPrompts(a) => gen_prompts(a, cli.seed)?,
        Command::Generate(a) => generate(a)?,
        Command::Filter(a) => filter(a, jobs)?,
        Command::MineNegatives(a) => mine(a, cli.seed)?,
        Command::BuildBatches(a) => build_batches(a, cli.seed)?,
        Command::TrainToy(a) => train_toy_cmd(a, cli.seed)?,
        Command::TrimVocab(a) => trim_vocab(a)?,
        Command::Evaluate(a) => evaluate_cmd(a, jobs)?,
        Command::Report(a) => report(a)?,
    };
    let Some(primary) = run.outputs.first() else { return Ok(()) };
    let target = match &cli.command {
        Command::TrainToy(a) => manifest_path(&a.out),
        _ => manifest_path(primary),
    };
    let manifest = RunManifest {
        subcommand: cli.command.name().to_string(),
        config: run.config.map(|p| p.display().to_string()),
        seed: cli.seed,
        started_unix: started,
        finished_unix: unix_now(),
        inputs: hash_paths(&run.inputs)?,
        outputs: hash_paths(&run.outputs)?,
    };
    manifest.write(&target)
}

/// Parses `argv`, runs the command and maps the outcome to an exit code:
/// 0 on success, 1 on a domain error (JSON on stderr), 2 on a usage error.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", json!({"error": e.kind(), "message": e.to_string()}));
            1
        }
    }
}
