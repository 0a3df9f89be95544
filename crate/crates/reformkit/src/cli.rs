//! Command-line interface.
//!
//! Build configuration is layered: preset, then config file, then flags.
//! The seed resolves as `--seed`, then a `seed` key in the config file,
//! then `REFORMKIT_SEED`, then the preset or default seed.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use reformkit_core::builder::{sample_pairs, BuildConfig, Reform, Task};
use reformkit_core::corpus::{Language, MultiParallelCorpus};
use reformkit_core::metrics::{DirectionScore, Metric, ScoreConfig, Smoothing};
use reformkit_core::presets;
use reformkit_core::schedule::{curve_tsv, dump_curve, SchedulePolicy};
use reformkit_core::textseg::Segmenter;
use serde_json::{json, Value};

use crate::build::{build, read_examples, shard_paths, write_json, Corpus};
use crate::io::{self, BilingualFormat};
use crate::synth::{self, SynthSpec};
use crate::{Error, Result};

pub const SEED_ENV: &str = "REFORMKIT_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "reformkit",
    version,
    about = "Reformulated translation dataset builder"
)]
pub struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build train/valid/test shards and a manifest.
    Build(BuildArgs),
    /// Print sampled (sentence_id, src, tgt) triples from a multi-parallel corpus.
    Sample(SampleArgs),
    /// Inspect a schedule.
    Schedule(ScheduleArgs),
    /// Score hypotheses against references.
    Score(ScoreArgs),
    /// Length statistics of shards or a text file.
    Stats(StatsArgs),
    /// In/out-pretrain breakdown and pretraining-size scatter.
    Analyze(AnalyzeArgs),
    /// List presets, or print one preset's configuration.
    Presets(PresetsArgs),
    /// Write a synthetic multi-parallel corpus.
    Synth(SynthArgs),
    /// Build, score and analyze the bundled synthetic corpus end to end.
    Demo(DemoArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TaskArg {
    Bilingual,
    Multiparallel,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ReformArg {
    None,
    Pose,
    PrefixSuffix,
    Parse,
    Mips,
    Mask,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SegmenterArg {
    UnicodeWords,
    Whitespace,
    Codepoints,
}

impl From<SegmenterArg> for Segmenter {
    fn from(s: SegmenterArg) -> Self {
        match s {
            SegmenterArg::UnicodeWords => Segmenter::UnicodeWords,
            SegmenterArg::Whitespace => Segmenter::Whitespace,
            SegmenterArg::Codepoints => Segmenter::Codepoints,
        }
    }
}

/// Configuration sources and per-field overrides shared by `build` and
/// `schedule`.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// Named preset to start from.
    #[arg(long)]
    pub preset: Option<String>,
    /// JSON file with BuildConfig fields; overrides the preset.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub task: Option<TaskArg>,
    #[arg(long, value_enum)]
    pub reform: Option<ReformArg>,
    /// Front share of the scaffold for prefix-suffix.
    #[arg(long)]
    pub prefix_share: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub n_train: Option<u64>,
    #[arg(long)]
    pub n_valid: Option<u64>,
    #[arg(long)]
    pub n_test: Option<u64>,
    #[arg(long)]
    pub max_len: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<u64>,
    #[arg(long)]
    pub halve_batch: Option<bool>,
    #[arg(long)]
    pub pivot: Option<String>,
    #[arg(long, value_enum)]
    pub segmenter: Option<SegmenterArg>,
    #[arg(long)]
    pub shard_size: Option<u64>,
    /// Schedule as inline JSON, e.g. '{"kind":"mix","p":0.8}'.
    #[arg(long)]
    pub schedule: Option<String>,
}

fn env_seed() -> Result<Option<u64>> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::Usage(format!("{SEED_ENV}={v:?} is not an unsigned integer"))),
        Err(_) => Ok(None),
    }
}

fn parse_json(text: &str, context: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| Error::json(context, e))
}

impl ConfigArgs {
    /// Resolves the effective, validated configuration.
    pub fn resolve(&self) -> Result<BuildConfig> {
        let mut cfg = match &self.preset {
            Some(name) => serde_json::to_value(
                presets::get(name)
                    .ok_or_else(|| {
                        Error::Usage(format!("unknown preset {name:?}; see `reformkit presets`"))
                    })?
                    .config,
            ),
            None => serde_json::to_value(BuildConfig::default()),
        }
        .map_err(|e| Error::json("preset", e))?;
        let mut config_has_seed = false;
        if let Some(path) = &self.config {
            let file = parse_json(&io::read_to_string(path)?, &path.display().to_string())?;
            let Value::Object(fields) = file else {
                return Err(Error::Usage(format!(
                    "{} must hold a JSON object",
                    path.display()
                )));
            };
            config_has_seed = fields.contains_key("seed");
            let obj = cfg.as_object_mut().expect("config is an object");
            for (k, v) in fields {
                obj.insert(k, v);
            }
        }
        let mut cfg: BuildConfig = serde_json::from_value(cfg).map_err(|e| {
            Error::Core(reformkit_core::Error::InvalidConfig(format!("config: {e}")))
        })?;

        if let Some(s) = self.seed {
            cfg.seed = s;
        } else if !config_has_seed {
            if let Some(s) = env_seed()? {
                cfg.seed = s;
            }
        }
        if let Some(t) = self.task {
            cfg.task = match t {
                TaskArg::Bilingual => Task::Bilingual,
                TaskArg::Multiparallel => Task::Multiparallel,
            };
        }
        if let Some(r) = self.reform {
            cfg.reform = match r {
                ReformArg::None => Reform::None,
                ReformArg::Pose => Reform::Pose,
                ReformArg::PrefixSuffix => Reform::PrefixSuffix { prefix_share: 0.5 },
                ReformArg::Parse => Reform::Parse,
                ReformArg::Mips => Reform::Mips,
                ReformArg::Mask => Reform::Mask,
            };
        }
        if let Some(share) = self.prefix_share {
            match &mut cfg.reform {
                Reform::PrefixSuffix { prefix_share } => *prefix_share = share,
                _ => {
                    return Err(Error::Usage(
                        "--prefix-share needs reform prefix-suffix".into(),
                    ))
                }
            }
        }
        if let Some(s) = &self.schedule {
            cfg.schedule = serde_json::from_value(parse_json(s, "--schedule")?)
                .map_err(|e| Error::json("--schedule", e))?;
        }
        macro_rules! set {
            ($($f:ident),*) => {$( if let Some(v) = self.$f.clone() { cfg.$f = v; } )*};
        }
        set!(
            n_train,
            n_valid,
            n_test,
            max_len,
            batch_size,
            halve_batch,
            shard_size
        );
        if let Some(p) = &self.pivot {
            cfg.pivot = Some(p.clone());
        }
        if let Some(s) = self.segmenter {
            cfg.segmenter = s.into();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Where the corpus comes from.
#[derive(Debug, Clone, Default, Args)]
pub struct CorpusArgs {
    /// Bilingual corpus file (.tsv or .jsonl).
    #[arg(long, conflicts_with_all = ["multiparallel", "synthetic"])]
    pub corpus: Option<PathBuf>,
    /// Bilingual format; inferred from the extension when absent.
    #[arg(long)]
    pub format: Option<String>,
    /// Source language code of a bilingual corpus.
    #[arg(long, default_value = "src")]
    pub src: String,
    /// Target language code of a bilingual corpus.
    #[arg(long, default_value = "tgt")]
    pub tgt: String,
    /// Multi-parallel corpus: directory with manifest.json, or a TSV file.
    #[arg(long, conflicts_with = "synthetic")]
    pub multiparallel: Option<PathBuf>,
    /// Language manifest for a multi-parallel corpus.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Use the bundled synthetic corpus.
    #[arg(long)]
    pub synthetic: bool,
}

pub enum LoadedCorpus {
    Bilingual(reformkit_core::corpus::BilingualCorpus),
    Multiparallel(MultiParallelCorpus),
}

impl LoadedCorpus {
    pub fn as_corpus(&self) -> Corpus<'_> {
        match self {
            LoadedCorpus::Bilingual(c) => Corpus::Bilingual(c),
            LoadedCorpus::Multiparallel(c) => Corpus::Multiparallel(c),
        }
    }
}

impl CorpusArgs {
    pub fn load(&self) -> Result<LoadedCorpus> {
        if self.synthetic {
            return Ok(LoadedCorpus::Multiparallel(synth::bundled()?));
        }
        if let Some(p) = &self.multiparallel {
            return Ok(LoadedCorpus::Multiparallel(io::load_multiparallel(
                p,
                self.manifest.as_deref(),
            )?));
        }
        let Some(p) = &self.corpus else {
            return Err(Error::Usage(
                "one of --corpus, --multiparallel or --synthetic is required".into(),
            ));
        };
        let format = match &self.format {
            Some(f) => f.parse()?,
            None => BilingualFormat::from_path(p)?,
        };
        let c = io::load_bilingual(
            p,
            format,
            Language::new(&self.src),
            Language::new(&self.tgt),
        )?;
        Ok(LoadedCorpus::Bilingual(c))
    }
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(flatten)]
    pub corpus: CorpusArgs,
    /// Output directory for shards, manifest.json and config.json.
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads; output is identical for any value.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub corpus: CorpusArgs,
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Write TSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Total steps; defaults to the count implied by the configuration.
    #[arg(long)]
    pub steps: Option<u64>,
    /// Print the policy curve as TSV.
    #[arg(long)]
    pub dump: bool,
    /// Sample points of the dumped curve.
    #[arg(long, default_value_t = 101)]
    pub resolution: u64,
    /// Print the policy at one step as JSON.
    #[arg(long, conflicts_with = "dump")]
    pub at: Option<u64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Bleu,
    Chrfpp,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long, value_enum)]
    pub metric: MetricArg,
    /// Hypotheses, one per line.
    #[arg(long)]
    pub hyp: PathBuf,
    /// References, line-aligned with the hypotheses.
    #[arg(long, required_unless_present = "test_dir")]
    pub r#ref: Option<PathBuf>,
    /// Build directory; scores each direction of its test split instead.
    #[arg(long, conflicts_with = "ref")]
    pub test_dir: Option<PathBuf>,
    /// Direction label recorded in the output, e.g. bod_Tibt-eng_Latn.
    #[arg(long)]
    pub direction: Option<String>,
    /// Add-k smoothing constant for BLEU orders above unigrams.
    #[arg(long)]
    pub add_k: Option<f64>,
    /// Write JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Build directory.
    #[arg(long, conflicts_with = "text")]
    pub shards: Option<PathBuf>,
    /// Restrict to one split of the build directory.
    #[arg(long, requires = "shards")]
    pub split: Option<String>,
    /// Plain text file, one sentence per line.
    #[arg(long, required_unless_present = "shards")]
    pub text: Option<PathBuf>,
    /// Precomputed per-line token counts for --text.
    #[arg(long, requires = "text")]
    pub counts: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "unicode-words")]
    pub segmenter: SegmenterArg,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// JSON array of {src, tgt, value, n_sentences}.
    #[arg(long)]
    pub scores: PathBuf,
    /// Language manifest with pretraining metadata.
    #[arg(long)]
    pub languages: PathBuf,
    #[arg(long, default_value = "eng_Latn")]
    pub english: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PresetsArgs {
    /// Print this preset's configuration as JSON.
    pub name: Option<String>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 8)]
    pub languages: usize,
    #[arg(long, default_value_t = 200)]
    pub sentences: usize,
    #[arg(long, default_value_t = 8)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub workers: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn emit(out: Option<&Path>, stdout: &mut dyn Write, text: &str) -> Result<()> {
    match out {
        Some(p) => io::write_atomic(p, text.as_bytes()),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Error::io("<stdout>", e)),
    }
}

fn pretty(v: &impl serde::Serialize) -> Result<String> {
    serde_json::to_string_pretty(v)
        .map(|s| s + "\n")
        .map_err(|e| Error::json("output", e))
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Build(a) => {
            let cfg = a.config.resolve()?;
            let corpus = a.corpus.load()?;
            let m = build(&cfg, corpus.as_corpus(), &a.out, a.workers)?;
            let summary = json!({
                "out": a.out.display().to_string(),
                "corpus_sha256": m.corpus_sha256,
                "plan": m.plan,
                "splits": m.splits,
                "shards": m.shards.len(),
            });
            emit(None, stdout, &pretty(&summary)?)
        }
        Command::Sample(a) => {
            let LoadedCorpus::Multiparallel(c) = a.corpus.load()? else {
                return Err(Error::Usage("sample needs a multi-parallel corpus".into()));
            };
            let seed = match a.seed {
                Some(s) => s,
                None => env_seed()?.unwrap_or(0),
            };
            let mut text = String::from("sentence_id\tsrc\ttgt\n");
            for (id, s, t) in sample_pairs(&c, a.n, seed)? {
                text.push_str(&format!("{id}\t{s}\t{t}\n"));
            }
            emit(a.out.as_deref(), stdout, &text)
        }
        Command::Schedule(a) => {
            let cfg = a.config.resolve()?;
            let steps = match a.steps {
                Some(t) => t,
                None => cfg.total_steps()?,
            };
            let policy = SchedulePolicy::new(cfg.schedule, steps)?;
            if let Some(step) = a.at {
                let p = policy.policy_at(step)?;
                emit(
                    None,
                    stdout,
                    &pretty(&json!({ "step": step, "policy": p }))?,
                )
            } else if a.dump {
                emit(
                    None,
                    stdout,
                    &curve_tsv(&dump_curve(&policy, a.resolution)?),
                )
            } else {
                emit(None, stdout, &pretty(&policy)?)
            }
        }
        Command::Score(a) => {
            let mut cfg = ScoreConfig::new(match a.metric {
                MetricArg::Bleu => Metric::Bleu,
                MetricArg::Chrfpp => Metric::Chrfpp,
            });
            if let Some(k) = a.add_k {
                cfg.bleu.smoothing = Smoothing::AddK(k);
            }
            let text = if let Some(dir) = &a.test_dir {
                let examples = read_examples(&shard_paths(dir, Some("test"))?)?;
                let hyps: Vec<String> = io::split_lines(&io::read_to_string(&a.hyp)?)
                    .into_iter()
                    .map(String::from)
                    .collect();
                pretty(&crate::score::score_directions(&examples, &hyps, &cfg)?)?
            } else {
                let r = a.r#ref.as_deref().expect("clap requires --ref");
                pretty(&crate::score::score_files(&a.hyp, r, &cfg, a.direction)?)?
            };
            emit(a.out.as_deref(), stdout, &text)
        }
        Command::Stats(a) => {
            let seg: Segmenter = a.segmenter.into();
            let text = if let Some(dir) = &a.shards {
                let paths = if dir.exists() {
                    shard_paths(dir, a.split.as_deref())?
                } else {
                    Vec::new()
                };
                pretty(&crate::stats::shard_stats(&paths, seg)?)?
            } else {
                let t = a.text.as_deref().expect("clap requires --text");
                pretty(&crate::stats::text_stats(t, seg, a.counts.as_deref())?)?
            };
            emit(a.out.as_deref(), stdout, &text)
        }
        Command::Analyze(a) => {
            let scores: Vec<DirectionScore> = serde_json::from_str(&io::read_to_string(&a.scores)?)
                .map_err(|e| Error::json(a.scores.display().to_string(), e))?;
            let langs = io::read_languages(&a.languages)?;
            let r = crate::analyze::analyze(&scores, &langs, &a.english, &a.out)?;
            emit(None, stdout, &pretty(&r.breakdown)?)
        }
        Command::Presets(a) => match a.name {
            Some(name) => {
                let p = presets::get(&name)
                    .ok_or_else(|| Error::Usage(format!("unknown preset {name:?}")))?;
                emit(None, stdout, &pretty(&p.config)?)
            }
            None => {
                let mut text = String::new();
                for p in presets::all() {
                    text.push_str(&format!("{}\t{}\n", p.name, p.description));
                }
                emit(None, stdout, &text)
            }
        },
        Command::Synth(a) => {
            let c = synth::generate(SynthSpec {
                languages: a.languages,
                sentences: a.sentences,
                seed: a.seed,
            })?;
            io::write_multiparallel(&a.out, &c)
        }
        Command::Demo(a) => {
            let seed = match a.seed {
                Some(s) => s,
                None => env_seed()?.unwrap_or(0),
            };
            let report = crate::demo::run_demo(&a.out, seed, a.workers)?;
            emit(None, stdout, &pretty(&report)?)
        }
    }
}

/// Parses `args`, runs, and maps the outcome to a process exit code,
/// printing failures to stderr as one `error: ...` line.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_env("REFORMKIT_LOG")
        .target(env_logger::Target::Stderr)
        .try_init();
    match run(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            eprintln!("error: {msg}");
            e.exit_code()
        }
    }
}

pub fn write_scores(path: &Path, scores: &[DirectionScore]) -> Result<()> {
    write_json(path, &scores)
}
