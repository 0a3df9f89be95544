//! Sharded dataset build.
//!
//! Each split is cut into contiguous index ranges of `shard_size` examples.
//! Shards are assembled in parallel and written independently; the manifest
//! is a sequential reduction over shards in index order, so every output
//! byte is independent of the worker count.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use reformkit_core::builder::{
    assemblers, batch_plan, Assembler, BuildConfig, CorpusRef, SplitTally,
};
use reformkit_core::corpus::{BilingualCorpus, MultiParallelCorpus};
use reformkit_core::reformulate::Tag;
use reformkit_core::stats::LengthSummary;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::io::{write_atomic, AtomicFile};
use crate::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShardEntry {
    pub file: String,
    pub split: String,
    pub start: u64,
    pub count: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSummary {
    pub examples: u64,
    pub tags: BTreeMap<Tag, u64>,
    pub reformulated: u64,
    pub truncated: u64,
    pub long_targets: u64,
    pub input_length: Option<LengthSummary>,
    pub target_length: Option<LengthSummary>,
}

impl From<&SplitTally> for SplitSummary {
    fn from(t: &SplitTally) -> Self {
        Self {
            examples: t.examples,
            tags: t.tags.clone(),
            reformulated: t.reformulated(),
            truncated: t.truncated,
            long_targets: t.long_targets,
            input_length: t.input_lengths.summary(),
            target_length: t.target_lengths.summary(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSummary {
    pub examples_per_step: u64,
    pub total_steps: u64,
    pub tokens_per_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildManifest {
    pub config: BuildConfig,
    pub corpus_sha256: String,
    pub plan: PlanSummary,
    pub splits: BTreeMap<String, SplitSummary>,
    pub shards: Vec<ShardEntry>,
}

impl BuildManifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = crate::io::read_to_string(&path)?;
        serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
    }
}

#[derive(Debug, Clone, Copy)]
pub enum Corpus<'a> {
    Bilingual(&'a BilingualCorpus),
    Multiparallel(&'a MultiParallelCorpus),
}

impl Corpus<'_> {
    fn as_ref(&self) -> CorpusRef<'_> {
        match *self {
            Corpus::Bilingual(c) => CorpusRef::Bilingual(c),
            Corpus::Multiparallel(c) => CorpusRef::Multiparallel(c),
        }
    }

    /// Digest over language metadata and all texts in corpus order.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        let mut field = |s: &str| {
            h.update((s.len() as u64).to_le_bytes());
            h.update(s.as_bytes());
        };
        match *self {
            Corpus::Bilingual(c) => {
                field("bilingual");
                field(&c.source_lang().code);
                field(&c.target_lang().code);
                for (s, t) in c.pairs() {
                    field(s);
                    field(t);
                }
            }
            Corpus::Multiparallel(c) => {
                field("multiparallel");
                let langs = serde_json::to_string(c.languages()).expect("languages serialize");
                field(&langs);
                for r in c.records() {
                    for l in c.languages() {
                        field(r.texts.get(&l.code).map(String::as_str).unwrap_or_default());
                    }
                }
            }
        }
        hex::encode(h.finalize())
    }
}

pub fn shard_name(split: &str, index: usize) -> String {
    format!("{split}-{index:05}.jsonl")
}

struct ShardJob<'a> {
    assembler: &'a Assembler<'a>,
    index: usize,
    start: u64,
    count: u64,
}

struct ShardOut {
    entry: ShardEntry,
    tally: SplitTally,
}

fn write_shard(job: &ShardJob<'_>, cfg: &BuildConfig, out_dir: &Path) -> Result<ShardOut> {
    let split = job.assembler.kind().as_str();
    let name = shard_name(split, job.index);
    let path = out_dir.join(&name);
    let mut file = AtomicFile::create(&path)?;
    let mut hasher = Sha256::new();
    let mut tally = SplitTally::default();
    let mut line = Vec::new();
    for i in job.start..job.start + job.count {
        let ex = job.assembler.assemble(i)?;
        tally.record(&ex, cfg.segmenter, cfg.max_len);
        line.clear();
        serde_json::to_writer(&mut line, &ex).map_err(|e| Error::json("example", e))?;
        line.push(b'\n');
        hasher.update(&line);
        file.write_all(&line).map_err(|e| Error::io(&path, e))?;
    }
    file.commit()?;
    Ok(ShardOut {
        entry: ShardEntry {
            file: name,
            split: split.into(),
            start: job.start,
            count: job.count,
            sha256: hex::encode(hasher.finalize()),
        },
        tally,
    })
}

/// Builds all three splits into `out_dir` using `workers` threads and
/// returns the manifest, which is also written as `manifest.json` next to
/// the effective `config.json`.
pub fn build(
    cfg: &BuildConfig,
    corpus: Corpus<'_>,
    out_dir: &Path,
    workers: usize,
) -> Result<BuildManifest> {
    if workers == 0 {
        return Err(Error::Usage("--workers must be >= 1".into()));
    }
    let splits = assemblers(cfg, corpus.as_ref())?;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;

    let mut jobs = Vec::new();
    for a in &splits {
        let mut start = 0;
        let mut index = 0;
        while start < a.len() {
            let count = cfg.shard_size.min(a.len() - start);
            jobs.push(ShardJob {
                assembler: a,
                index,
                start,
                count,
            });
            start += count;
            index += 1;
        }
    }
    log::info!("building {} shard(s) on {workers} worker(s)", jobs.len());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Usage(format!("thread pool: {e}")))?;
    let outs: Vec<ShardOut> = pool.install(|| {
        jobs.par_iter()
            .map(|j| write_shard(j, cfg, out_dir))
            .collect::<Result<_>>()
    })?;

    let mut tallies: BTreeMap<String, SplitTally> = BTreeMap::new();
    for a in &splits {
        tallies.insert(a.kind().as_str().into(), SplitTally::default());
    }
    let mut shards = Vec::with_capacity(outs.len());
    for o in outs {
        tallies
            .get_mut(&o.entry.split)
            .expect("known split")
            .merge(&o.tally);
        shards.push(o.entry);
    }

    let train = &tallies["train"];
    let means = train.input_lengths.mean().zip(train.target_lengths.mean());
    let plan = batch_plan(
        cfg,
        cfg.reform != reformkit_core::builder::Reform::None,
        means,
    )?;
    let manifest = BuildManifest {
        config: cfg.clone(),
        corpus_sha256: corpus.digest(),
        plan: PlanSummary {
            examples_per_step: plan.examples_per_step,
            total_steps: cfg.total_steps()?,
            tokens_per_step: plan.tokens_per_step,
        },
        splits: tallies.iter().map(|(k, t)| (k.clone(), t.into())).collect(),
        shards,
    };
    write_json(&out_dir.join(CONFIG_FILE), cfg)?;
    write_json(&out_dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::json(path.display().to_string(), e))?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Shard files of a build directory, optionally restricted to one split,
/// in manifest order when a manifest exists and name order otherwise.
pub fn shard_paths(dir: &Path, split: Option<&str>) -> Result<Vec<PathBuf>> {
    let keep = |name: &str| split.is_none_or(|s| name.starts_with(&format!("{s}-")));
    if dir.join(MANIFEST_FILE).exists() {
        let m = BuildManifest::read(dir)?;
        return Ok(m
            .shards
            .iter()
            .filter(|s| keep(&s.file))
            .map(|s| dir.join(&s.file))
            .collect());
    }
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let name = path
            .file_name()
            .and_then(|n| n.to_str())
            .unwrap_or_default();
        if name.ends_with(".jsonl") && keep(name) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

/// Reads every example of the given shards in order.
pub fn read_examples(
    paths: &[PathBuf],
) -> Result<Vec<reformkit_core::reformulate::ReformulatedExample>> {
    let mut out = Vec::new();
    for p in paths {
        let text = crate::io::read_to_string(p)?;
        for (i, line) in crate::io::split_lines(&text).into_iter().enumerate() {
            let ex = serde_json::from_str(line)
                .map_err(|e| Error::json(format!("{}:{}", p.display(), i + 1), e))?;
            out.push(ex);
        }
    }
    Ok(out)
}

/// Recomputes the SHA-256 of a file.
pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
