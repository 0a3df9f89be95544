//! End-to-end run over the bundled synthetic corpus.

use std::collections::BTreeMap;
use std::path::Path;

use reformkit_core::analysis::BreakdownReport;
use reformkit_core::builder::{BuildConfig, Reform};
use reformkit_core::metrics::{Metric, ScoreConfig};
use reformkit_core::presets;
use serde::Serialize;

use crate::build::{build, read_examples, shard_paths, write_json, Corpus, SplitSummary};
use crate::io::{write_atomic, write_multiparallel};
use crate::score::{score_directions, score_files};
use crate::{synth, Result};

#[derive(Debug, Clone, Serialize)]
pub struct DemoReport {
    pub corpus_sha256: String,
    pub builds: BTreeMap<String, SplitSummary>,
    pub chrfpp: f64,
    pub directions: usize,
    pub breakdown: BreakdownReport,
}

pub const BUILDS: [&str; 3] = ["baseline", "parse", "mips"];

/// Demo configuration for one reformulation: the multi-parallel presets
/// scaled down to the bundled corpus.
pub fn demo_config(name: &str, seed: u64) -> BuildConfig {
    let mut cfg = presets::get("parse_mix80").expect("preset exists").config;
    match name {
        "parse" => {}
        "mips" => {
            cfg = presets::get("mips_mix80").expect("preset exists").config;
        }
        _ => {
            cfg.reform = Reform::None;
            cfg.pivot = None;
        }
    }
    cfg.seed = seed;
    cfg.n_train = 8192;
    cfg.n_valid = 500;
    cfg.n_test = 1000;
    cfg.batch_size = 512;
    cfg.shard_size = 2048;
    cfg
}

/// Writes the corpus, builds baseline/ParSE/MiPS datasets, scores a copy
/// hypothesis of the baseline test split per direction and analyzes it.
pub fn run_demo(out: &Path, seed: u64, workers: usize) -> Result<DemoReport> {
    let corpus = synth::bundled()?;
    write_multiparallel(&out.join("corpus"), &corpus)?;
    let mut builds = BTreeMap::new();
    let mut digest = String::new();
    for name in BUILDS {
        let cfg = demo_config(name, seed);
        log::info!("demo: building {name}");
        let m = build(
            &cfg,
            Corpus::Multiparallel(&corpus),
            &out.join(name),
            workers,
        )?;
        digest = m.corpus_sha256;
        builds.insert(name.to_string(), m.splits["train"].clone());
    }

    let base = out.join("baseline");
    let test = read_examples(&shard_paths(&base, Some("test"))?)?;
    let mut copy = String::new();
    for ex in &test {
        copy.push_str(&ex.target_text);
        copy.push('\n');
    }
    let hyp = base.join("hyp.txt");
    let reference = base.join("ref.txt");
    write_atomic(&hyp, copy.as_bytes())?;
    write_atomic(&reference, copy.as_bytes())?;
    let cfg = ScoreConfig::new(Metric::Chrfpp);
    let corpus_score = score_files(&hyp, &reference, &cfg, None)?;
    write_json(&out.join("score.json"), &corpus_score)?;

    let targets: Vec<String> = test.iter().map(|e| e.target_text.clone()).collect();
    let scores = score_directions(&test, &targets, &cfg)?;
    write_json(&out.join("scores.json"), &scores)?;
    let analysis = crate::analyze::analyze(
        &scores,
        corpus.languages(),
        "eng_Latn",
        &out.join("analysis"),
    )?;

    Ok(DemoReport {
        corpus_sha256: digest,
        builds,
        chrfpp: corpus_score.value,
        directions: scores.len(),
        breakdown: analysis.breakdown,
    })
}
