//! Breakdown and scatter reports written to disk.

use std::path::Path;

use reformkit_core::analysis::{
    breakdown, pretrain_scatter, BreakdownReport, ScatterMode, ScatterReport,
};
use reformkit_core::corpus::Language;
use reformkit_core::metrics::DirectionScore;
use serde::Serialize;

use crate::build::write_json;
use crate::io::write_atomic;
use crate::Result;

pub const BREAKDOWN_FILE: &str = "breakdown.json";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub breakdown: BreakdownReport,
    pub from_lang: ScatterReport,
    pub into_lang: ScatterReport,
}

pub fn scatter_file(mode: ScatterMode) -> &'static str {
    match mode {
        ScatterMode::FromLang => "scatter_from_lang.tsv",
        ScatterMode::IntoLang => "scatter_into_lang.tsv",
    }
}

pub fn scatter_tsv(r: &ScatterReport) -> String {
    let mut out = String::from("language\tpretrain_size\tmean_score\tn_directions\n");
    for row in &r.rows {
        out.push_str(&format!(
            "{}\t{}\t{:.6}\t{}\n",
            row.language, row.pretrain_size, row.mean_score, row.n_directions
        ));
    }
    out
}

/// Writes `breakdown.json` (breakdown plus both scatter summaries) and one
/// TSV per scatter mode into `out_dir`.
pub fn analyze(
    scores: &[DirectionScore],
    langs: &[Language],
    english: &str,
    out_dir: &Path,
) -> Result<AnalysisReport> {
    let report = AnalysisReport {
        breakdown: breakdown(scores, langs, english)?,
        from_lang: pretrain_scatter(scores, langs, ScatterMode::FromLang),
        into_lang: pretrain_scatter(scores, langs, ScatterMode::IntoLang),
    };
    write_json(&out_dir.join(BREAKDOWN_FILE), &report)?;
    for r in [&report.from_lang, &report.into_lang] {
        write_atomic(
            &out_dir.join(scatter_file(r.mode)),
            scatter_tsv(r).as_bytes(),
        )?;
    }
    Ok(report)
}
