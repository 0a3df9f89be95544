//! Length statistics over built shards or plain text files.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use reformkit_core::builder::SplitTally;
use reformkit_core::stats::{LengthHistogram, LengthSummary};
use reformkit_core::textseg::{count_units, Segmenter};
use serde::Serialize;
use std::collections::BTreeMap;

use crate::build::read_examples;
use crate::io::{read_counts, read_to_string, split_lines};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShardStats {
    pub segmenter: Segmenter,
    pub shards: usize,
    pub examples: u64,
    pub tags: BTreeMap<String, u64>,
    pub truncated: u64,
    pub input_length: Option<LengthSummary>,
    pub target_length: Option<LengthSummary>,
}

/// Summarizes shards under `seg`. An empty shard list gives an empty
/// report.
pub fn shard_stats(paths: &[PathBuf], seg: Segmenter) -> Result<ShardStats> {
    let parts: Vec<SplitTally> = paths
        .par_iter()
        .map(|p| {
            let mut t = SplitTally::default();
            for ex in read_examples(std::slice::from_ref(p))? {
                t.record(&ex, seg, usize::MAX);
            }
            Ok(t)
        })
        .collect::<Result<_>>()?;
    let mut total = SplitTally::default();
    for p in &parts {
        total.merge(p);
    }
    Ok(ShardStats {
        segmenter: seg,
        shards: paths.len(),
        examples: total.examples,
        tags: total
            .tags
            .iter()
            .map(|(t, c)| (t.as_str().to_string(), *c))
            .collect(),
        truncated: total.truncated,
        input_length: total.input_lengths.summary(),
        target_length: total.target_lengths.summary(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TextStats {
    pub file: String,
    /// `"sidecar"` when lengths come from a counts file.
    pub source: String,
    pub lines: u64,
    pub length: Option<LengthSummary>,
}

/// Line lengths of a text file, or the precomputed counts of `sidecar`
/// (which must have one entry per line).
pub fn text_stats(path: &Path, seg: Segmenter, sidecar: Option<&Path>) -> Result<TextStats> {
    let text = read_to_string(path)?;
    let lines = split_lines(&text);
    let (hist, source): (LengthHistogram, String) = match sidecar {
        Some(sc) => {
            let counts = read_counts(sc)?;
            if counts.len() != lines.len() {
                return Err(Error::Usage(format!(
                    "{} has {} counts for {} lines",
                    sc.display(),
                    counts.len(),
                    lines.len()
                )));
            }
            (counts.into_iter().collect(), "sidecar".into())
        }
        None => (
            lines
                .par_iter()
                .map(|l| count_units(l, seg))
                .collect::<Vec<_>>()
                .into_iter()
                .collect(),
            serde_json::to_value(seg)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default(),
        ),
    };
    Ok(TextStats {
        file: path.display().to_string(),
        source,
        lines: lines.len() as u64,
        length: hist.summary(),
    })
}
