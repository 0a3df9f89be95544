//! Per-example dataset assembly.
//!
//! Example `i` of a split is a pure function of `(corpus, config, i)`: its
//! source pair, its schedule step `i / examples_per_step`, and every random
//! draw come from substreams keyed by the example index. The std crate
//! shards the index space across workers; output is identical for any
//! sharding.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::{BilingualCorpus, MultiParallelCorpus, SplitSizes, TranslationExample};
use crate::mask::{mask_tokens, span_mask, SentinelTemplate};
use crate::reformulate::{
    baseline, mips_reform, parse_reform, pose, prefix_suffix, ReformulatedExample, ScaffoldFormat,
    Tag,
};
use crate::rng::{derive_seed, domain, substream, FeistelPermutation};
use crate::schedule::{PrefixLaw, ScheduleKind, SchedulePolicy};
use crate::stats::LengthHistogram;
use crate::textseg::{count_units, segment, Segmenter};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Bilingual,
    Multiparallel,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Reform {
    None,
    Pose,
    PrefixSuffix {
        #[serde(default = "half")]
        prefix_share: f64,
    },
    Parse,
    Mips,
    /// Token or span masking; parameters come from a `mask_window` schedule.
    Mask,
}

impl Reform {
    /// Reformulations that add a whole parallel sentence per example.
    pub fn is_parallel_scaffold(self) -> bool {
        matches!(self, Reform::Parse | Reform::Mips)
    }
}

/// Record-level held-out fractions for multi-parallel corpora. Bilingual
/// corpora hold out exactly `n_valid` / `n_test` pairs instead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitPolicy {
    pub valid_fraction: f64,
    pub test_fraction: f64,
}

impl Default for SplitPolicy {
    fn default() -> Self {
        Self {
            valid_fraction: 0.1,
            test_fraction: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildConfig {
    pub task: Task,
    pub reform: Reform,
    pub schedule: ScheduleKind,
    pub seed: u64,
    pub n_train: u64,
    pub n_valid: u64,
    pub n_test: u64,
    /// Input length cap in segmentation units.
    pub max_len: usize,
    pub batch_size: u64,
    /// Halve examples per step while a parallel scaffold is active.
    pub halve_batch: bool,
    pub fmt: ScaffoldFormat,
    pub pivot: Option<String>,
    pub segmenter: Segmenter,
    pub sentinel: SentinelTemplate,
    pub split: SplitPolicy,
    pub shard_size: u64,
}

impl Default for BuildConfig {
    fn default() -> Self {
        Self {
            task: Task::Bilingual,
            reform: Reform::None,
            schedule: ScheduleKind::Mix { p: 1.0 },
            seed: 0,
            n_train: 512,
            n_valid: 0,
            n_test: 0,
            max_len: 256,
            batch_size: 512,
            halve_batch: false,
            fmt: ScaffoldFormat::default(),
            pivot: None,
            segmenter: Segmenter::default(),
            sentinel: SentinelTemplate::default(),
            split: SplitPolicy::default(),
            shard_size: 100_000,
        }
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.batch_size == 0 {
            return bad("batch_size must be >= 1".into());
        }
        if self.n_train < self.batch_size {
            return bad(format!(
                "n_train {} is smaller than batch_size {}",
                self.n_train, self.batch_size
            ));
        }
        if self.max_len == 0 {
            return bad("max_len must be >= 1".into());
        }
        if self.shard_size == 0 {
            return bad("shard_size must be >= 1".into());
        }
        self.fmt.validate()?;
        self.sentinel.validate()?;
        self.schedule.validate()?;
        for (what, v) in [
            ("split.valid_fraction", self.split.valid_fraction),
            ("split.test_fraction", self.split.test_fraction),
        ] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::out_of_range(what, v, "[0, 1)"));
            }
        }
        if self.split.valid_fraction + self.split.test_fraction >= 1.0 {
            return bad("held-out fractions leave no training records".into());
        }
        let masking = matches!(self.schedule, ScheduleKind::MaskWindow { .. });
        if (self.reform == Reform::Mask) != masking {
            return bad("reform \"mask\" and a mask_window schedule go together".into());
        }
        if let Reform::PrefixSuffix { prefix_share } = self.reform {
            if !(0.0..=1.0).contains(&prefix_share) {
                return Err(Error::out_of_range("prefix_share", prefix_share, "[0, 1]"));
            }
        }
        if self.reform.is_parallel_scaffold() && self.task != Task::Multiparallel {
            return bad("parse and mips need a multiparallel task".into());
        }
        if self.reform == Reform::Parse && self.pivot.as_deref().is_none_or(str::is_empty) {
            return bad("parse needs a pivot language".into());
        }
        if self.halve_batch && self.reform.is_parallel_scaffold() && self.batch_size % 2 == 1 {
            return Err(Error::OddBatch(self.batch_size as usize));
        }
        Ok(())
    }

    pub fn examples_per_step(&self) -> Result<u64> {
        Ok(batch_plan(self, self.reform != Reform::None, None)?.examples_per_step)
    }

    /// Schedule length implied by `n_train / examples_per_step`.
    pub fn total_steps(&self) -> Result<u64> {
        Ok(self.n_train.div_ceil(self.examples_per_step()?).max(1))
    }

    pub fn schedule_policy(&self) -> Result<SchedulePolicy> {
        SchedulePolicy::new(self.schedule, self.total_steps()?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchPlan {
    pub examples_per_step: u64,
    /// `examples_per_step * (mean input + mean target length)` when length
    /// statistics are supplied.
    pub tokens_per_step: Option<f64>,
}

/// Examples per optimizer step. Parallel scaffolds roughly double the
/// tokens per example, so with `halve_batch` set the batch is halved while
/// one is active, holding tokens per step constant.
pub fn batch_plan(
    cfg: &BuildConfig,
    reform_active: bool,
    mean_lengths: Option<(f64, f64)>,
) -> Result<BatchPlan> {
    let halve = cfg.halve_batch && reform_active && cfg.reform.is_parallel_scaffold();
    let examples_per_step = if halve {
        if cfg.batch_size % 2 == 1 {
            return Err(Error::OddBatch(cfg.batch_size as usize));
        }
        cfg.batch_size / 2
    } else {
        cfg.batch_size
    };
    Ok(BatchPlan {
        examples_per_step,
        tokens_per_step: mean_lengths.map(|(i, t)| examples_per_step as f64 * (i + t)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampledPair {
    pub sentence_id: u64,
    pub src: usize,
    pub tgt: usize,
}

/// Uniform draws over (record, ordered language pair with src != tgt).
///
/// Without replacement while `n` fits in the combination space (a keyed
/// permutation), with replacement beyond it. Draw `i` depends only on the
/// seed and `i`.
#[derive(Debug, Clone)]
pub struct PairSampler {
    n_langs: u64,
    n_records: u64,
    seed: u64,
    permutation: Option<FeistelPermutation>,
}

impl PairSampler {
    pub fn new(corpus: &MultiParallelCorpus, n: u64, seed: u64) -> Result<Self> {
        let n_langs = corpus.languages().len() as u64;
        if n_langs < 2 {
            return Err(Error::TooFewLanguages {
                needed: 2,
                available: n_langs as usize,
            });
        }
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if n == 0 {
            return Err(Error::out_of_range("sample count", 0, ">= 1"));
        }
        let n_records = corpus.len() as u64;
        let total = n_records * n_langs * (n_langs - 1);
        let permutation = (n <= total).then(|| FeistelPermutation::new(total, seed));
        Ok(Self {
            n_langs,
            n_records,
            seed,
            permutation,
        })
    }

    pub fn directions_per_record(&self) -> u64 {
        self.n_langs * (self.n_langs - 1)
    }

    pub fn combinations(&self) -> u64 {
        self.n_records * self.directions_per_record()
    }

    pub fn with_replacement(&self) -> bool {
        self.permutation.is_none()
    }

    /// Record position (not id) and language indices for draw `i`.
    pub fn draw(&self, i: u64) -> (usize, usize, usize) {
        let c = match &self.permutation {
            Some(p) => p.apply(i),
            None => substream(self.seed, domain::SAMPLE, i).random_range(0..self.combinations()),
        };
        let dirs = self.directions_per_record();
        let record = c / dirs;
        let dir = c % dirs;
        let src = dir / (self.n_langs - 1);
        let mut tgt = dir % (self.n_langs - 1);
        if tgt >= src {
            tgt += 1;
        }
        (record as usize, src as usize, tgt as usize)
    }
}

/// Deterministic stream of `n` sampled (sentence id, src code, tgt code).
pub fn sample_pairs(
    corpus: &MultiParallelCorpus,
    n: u64,
    seed: u64,
) -> Result<impl Iterator<Item = (u64, &str, &str)> + '_> {
    let sampler = PairSampler::new(corpus, n, seed)?;
    Ok((0..n).map(move |i| {
        let (r, s, t) = sampler.draw(i);
        (
            corpus.records()[r].id,
            corpus.languages()[s].code.as_str(),
            corpus.languages()[t].code.as_str(),
        )
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    Train,
    Valid,
    Test,
}

impl SplitKind {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitKind::Train => "train",
            SplitKind::Valid => "valid",
            SplitKind::Test => "test",
        }
    }

    fn domain(self) -> u64 {
        match self {
            SplitKind::Train => domain::TRAIN,
            SplitKind::Valid => domain::VALID,
            SplitKind::Test => domain::TEST,
        }
    }
}

/// Corpus input to a build.
#[derive(Debug, Clone, Copy)]
pub enum CorpusRef<'a> {
    Bilingual(&'a BilingualCorpus),
    Multiparallel(&'a MultiParallelCorpus),
}

#[derive(Debug)]
enum Source {
    Bilingual {
        corpus: BilingualCorpus,
        cycle: bool,
        seed: u64,
    },
    Multi {
        corpus: MultiParallelCorpus,
        sampler: PairSampler,
    },
}

/// Assembles examples `0..len()` of one split.
#[derive(Debug)]
pub struct Assembler<'a> {
    cfg: &'a BuildConfig,
    kind: SplitKind,
    len: u64,
    source: Source,
    policy: SchedulePolicy,
    examples_per_step: u64,
}

/// Record-level split of a corpus into the three builder splits, then one
/// assembler per split.
pub fn assemblers<'a>(cfg: &'a BuildConfig, corpus: CorpusRef<'_>) -> Result<[Assembler<'a>; 3]> {
    cfg.validate()?;
    let policy = cfg.schedule_policy()?;
    let examples_per_step = cfg.examples_per_step()?;
    let split_seed = derive_seed(cfg.seed, domain::SPLIT, 0);
    let sources: [Source; 3] = match corpus {
        CorpusRef::Bilingual(c) => {
            if cfg.task != Task::Bilingual {
                return Err(Error::InvalidConfig(
                    "task is multiparallel but corpus is bilingual".into(),
                ));
            }
            let held = (cfg.n_valid + cfg.n_test) as usize;
            if held >= c.len() {
                return Err(Error::SplitTooLarge {
                    requested: held + 1,
                    available: c.len(),
                });
            }
            let sizes = SplitSizes::new(c.len() - held, cfg.n_valid as usize, cfg.n_test as usize);
            let [tr, va, te] = c.split(sizes, split_seed)?;
            [(tr, true), (va, false), (te, false)].map(|(corpus, cycle)| Source::Bilingual {
                corpus,
                cycle,
                seed: cfg.seed,
            })
        }
        CorpusRef::Multiparallel(c) => {
            if cfg.task != Task::Multiparallel {
                return Err(Error::InvalidConfig(
                    "task is bilingual but corpus is multiparallel".into(),
                ));
            }
            if cfg.reform == Reform::Mips && c.languages().len() < 4 {
                return Err(Error::TooFewLanguages {
                    needed: 4,
                    available: c.languages().len(),
                });
            }
            if let (Reform::Parse, Some(p)) = (cfg.reform, cfg.pivot.as_deref()) {
                if c.language(p).is_none() {
                    return Err(Error::UnknownLanguage(p.into()));
                }
            }
            let n = c.len();
            let valid = libm::floor(n as f64 * cfg.split.valid_fraction) as usize;
            let test = libm::floor(n as f64 * cfg.split.test_fraction) as usize;
            for (want, have, name) in [(cfg.n_valid, valid, "valid"), (cfg.n_test, test, "test")] {
                if want > 0 && have == 0 {
                    return Err(Error::InvalidConfig(format!(
                        "{name} split has no records; raise split.{name}_fraction"
                    )));
                }
            }
            let [tr, va, te] =
                c.split(SplitSizes::new(n - valid - test, valid, test), split_seed)?;
            let counts = [cfg.n_train, cfg.n_valid, cfg.n_test];
            let mut out: Vec<Source> = Vec::with_capacity(3);
            for (i, part) in [tr, va, te].into_iter().enumerate() {
                let kind = [SplitKind::Train, SplitKind::Valid, SplitKind::Test][i];
                let sampler = if part.is_empty() {
                    None
                } else {
                    Some(PairSampler::new(
                        &part,
                        counts[i].max(1),
                        derive_seed(cfg.seed, domain::SAMPLE, kind.domain()),
                    )?)
                };
                match sampler {
                    Some(sampler) => out.push(Source::Multi {
                        corpus: part,
                        sampler,
                    }),
                    None if counts[i] == 0 => out.push(Source::Multi {
                        sampler: PairSampler {
                            n_langs: 2,
                            n_records: 0,
                            seed: 0,
                            permutation: None,
                        },
                        corpus: part,
                    }),
                    None => return Err(Error::EmptyCorpus),
                }
            }
            let mut it = out.into_iter();
            [it.next().unwrap(), it.next().unwrap(), it.next().unwrap()]
        }
    };
    let mut it = sources.into_iter();
    let mut make = |kind: SplitKind, len: u64| {
        let source = it.next().expect("three sources");
        if let Source::Bilingual { corpus, .. } = &source {
            if kind != SplitKind::Train && (corpus.len() as u64) < len {
                return Err(Error::SplitTooLarge {
                    requested: len as usize,
                    available: corpus.len(),
                });
            }
        }
        Ok(Assembler {
            cfg,
            kind,
            len,
            source,
            policy,
            examples_per_step,
        })
    };
    Ok([
        make(SplitKind::Train, cfg.n_train)?,
        make(SplitKind::Valid, cfg.n_valid)?,
        make(SplitKind::Test, cfg.n_test)?,
    ])
}

impl Assembler<'_> {
    pub fn kind(&self) -> SplitKind {
        self.kind
    }

    pub fn len(&self) -> u64 {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn policy(&self) -> &SchedulePolicy {
        &self.policy
    }

    pub fn examples_per_step(&self) -> u64 {
        self.examples_per_step
    }

    /// Languages available to this split, empty for bilingual.
    pub fn multiparallel(&self) -> Option<&MultiParallelCorpus> {
        match &self.source {
            Source::Multi { corpus, .. } => Some(corpus),
            Source::Bilingual { .. } => None,
        }
    }

    fn translation(&self, i: u64) -> Result<(TranslationExample, Option<usize>)> {
        match &self.source {
            Source::Bilingual {
                corpus,
                cycle,
                seed,
                ..
            } => {
                let n = corpus.len() as u64;
                if n == 0 {
                    return Err(Error::EmptyCorpus);
                }
                // epoch-wise passes, each in its own shuffled order
                let pos = if *cycle {
                    let epoch = i / n;
                    FeistelPermutation::new(n, derive_seed(*seed, domain::EPOCH, epoch))
                        .apply(i % n)
                } else {
                    i
                };
                Ok((corpus.example(pos as usize), None))
            }
            Source::Multi { corpus, sampler } => {
                let (r, s, t) = sampler.draw(i);
                let langs = corpus.languages();
                let rec = &corpus.records()[r];
                let ex = TranslationExample::from_record(rec, &langs[s].code, &langs[t].code)?;
                Ok((ex, Some(r)))
            }
        }
    }

    /// Example `i` of this split.
    pub fn assemble(&self, i: u64) -> Result<ReformulatedExample> {
        let cfg = self.cfg;
        let (ex, record) = self.translation(i)?;
        if self.kind != SplitKind::Train {
            return Ok(baseline(&ex, &cfg.fmt));
        }
        let mut rng = substream(cfg.seed, self.kind.domain(), i);
        let step = i / self.examples_per_step;
        let step_policy = self.policy.evaluate(step.min(self.policy.total_steps - 1));
        let draw: f64 = rng.random();
        let reformulate = cfg.reform != Reform::None && draw < step_policy.reform_fraction;

        let mut out = if !reformulate {
            baseline(&ex, &cfg.fmt)
        } else {
            let prefix = |rng: &mut rand_chacha::ChaCha8Rng| match step_policy.prefix_law {
                PrefixLaw::Uniform01 => rng.random::<f64>(),
                PrefixLaw::Fixed(v) => v,
            };
            match cfg.reform {
                Reform::None => unreachable!(),
                Reform::Pose => pose(&ex, prefix(&mut rng), cfg.segmenter, &cfg.fmt)?,
                Reform::PrefixSuffix { prefix_share } => {
                    prefix_suffix(&ex, prefix(&mut rng), prefix_share, cfg.segmenter, &cfg.fmt)?
                }
                Reform::Parse => {
                    let corpus = self.multiparallel().ok_or(Error::EmptyCorpus)?;
                    let rec = &corpus.records()[record.unwrap_or_default()];
                    let pivot = cfg.pivot.as_deref().unwrap_or_default();
                    parse_reform(rec, &ex.source_lang, &ex.target_lang, pivot, &cfg.fmt)?
                }
                Reform::Mips => {
                    let corpus = self.multiparallel().ok_or(Error::EmptyCorpus)?;
                    let rec = &corpus.records()[record.unwrap_or_default()];
                    let others: Vec<&str> = corpus
                        .languages()
                        .iter()
                        .map(|l| l.code.as_str())
                        .filter(|c| *c != ex.source_lang && *c != ex.target_lang)
                        .collect();
                    if others.len() < 2 {
                        return Err(Error::TooFewLanguages {
                            needed: 4,
                            available: others.len() + 2,
                        });
                    }
                    let a = rng.random_range(0..others.len());
                    let mut b = rng.random_range(0..others.len() - 1);
                    if b >= a {
                        b += 1;
                    }
                    mips_reform(
                        rec,
                        &ex.source_lang,
                        &ex.target_lang,
                        others[a],
                        others[b],
                        &cfg.fmt,
                    )?
                }
                Reform::Mask => {
                    let base = baseline(&ex, &cfg.fmt);
                    match step_policy.mask {
                        None => base,
                        Some(m) if m.span => span_mask(
                            &base,
                            m.p,
                            m.mean_span,
                            &mut rng,
                            cfg.segmenter,
                            &cfg.sentinel,
                        )?,
                        Some(m) => mask_tokens(&base, m.p, &mut rng, cfg.segmenter, &cfg.sentinel)?,
                    }
                }
            }
        };
        out.meta.step_index = Some(step);
        truncate_input(&mut out, cfg.max_len, cfg.segmenter, &cfg.fmt.delimiter);
        Ok(out)
    }
}

/// Cuts the input to `max_len` units from the right. Scaffolds follow the
/// source, so they are consumed before any source text. Returns whether a
/// cut happened.
pub fn truncate_input(
    ex: &mut ReformulatedExample,
    max_len: usize,
    seg: Segmenter,
    delimiter: &str,
) -> bool {
    let sg = segment(&ex.input_text, seg);
    if sg.len() <= max_len {
        return false;
    }
    let mut cut = sg.take_prefix(max_len).unwrap_or(&ex.input_text).trim_end();
    let delim = delimiter.trim();
    if !delim.is_empty() {
        while let Some(rest) = cut.strip_suffix(delim) {
            cut = rest.trim_end();
        }
    }
    ex.input_text = String::from(cut);
    ex.meta.truncated = true;
    true
}

/// Mergeable per-split totals recorded in the build manifest.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SplitTally {
    pub examples: u64,
    pub tags: BTreeMap<Tag, u64>,
    pub truncated: u64,
    /// Examples whose target exceeds `max_len`; targets are never cut.
    pub long_targets: u64,
    pub input_lengths: LengthHistogram,
    pub target_lengths: LengthHistogram,
}

impl SplitTally {
    pub fn record(&mut self, ex: &ReformulatedExample, seg: Segmenter, max_len: usize) {
        self.examples += 1;
        *self.tags.entry(ex.tag).or_default() += 1;
        if ex.meta.truncated {
            self.truncated += 1;
        }
        let target_len = count_units(&ex.target_text, seg);
        if target_len > max_len {
            self.long_targets += 1;
        }
        self.input_lengths.add(count_units(&ex.input_text, seg));
        self.target_lengths.add(target_len);
    }

    pub fn merge(&mut self, other: &SplitTally) {
        self.examples += other.examples;
        for (t, c) in &other.tags {
            *self.tags.entry(*t).or_default() += c;
        }
        self.truncated += other.truncated;
        self.long_targets += other.long_targets;
        self.input_lengths.merge(&other.input_lengths);
        self.target_lengths.merge(&other.target_lengths);
    }

    pub fn reformulated(&self) -> u64 {
        self.tags
            .iter()
            .filter(|(t, _)| t.is_reformulated())
            .map(|(_, c)| c)
            .sum()
    }
}
