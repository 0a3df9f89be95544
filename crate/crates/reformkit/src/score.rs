//! File-level scoring.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use reformkit_core::metrics::{BleuStats, ChrfStats, DirectionScore, Metric, ScoreConfig};
use reformkit_core::reformulate::ReformulatedExample;
use serde::{Deserialize, Serialize};

use crate::io::{read_to_string, split_lines};
use crate::{Error, Result};

pub const TOKENIZE: &str = "whitespace";

/// Hypotheses and references of one direction.
type Aligned<'a> = (Vec<&'a str>, Vec<&'a str>);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub metric: Metric,
    pub value: f64,
    pub n: u64,
    pub config: ScoreConfig,
    pub tokenize: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<String>,
}

/// Corpus-level score with sentence statistics computed in parallel and
/// summed in corpus order.
pub fn score_lines<S: AsRef<str> + Sync>(hyps: &[S], refs: &[S], cfg: &ScoreConfig) -> Result<f64> {
    cfg.validate()?;
    if hyps.len() != refs.len() {
        return Err(reformkit_core::Error::LengthMismatch {
            hyps: hyps.len(),
            refs: refs.len(),
        }
        .into());
    }
    if hyps.is_empty() {
        return Err(reformkit_core::Error::EmptyCorpus.into());
    }
    let pairs: Vec<(&str, &str)> = hyps
        .iter()
        .zip(refs)
        .map(|(h, r)| (h.as_ref(), r.as_ref()))
        .collect();
    Ok(match cfg.metric {
        Metric::Bleu => {
            let parts: Vec<BleuStats> = pairs
                .par_iter()
                .map(|(h, r)| BleuStats::sentence(h, r, cfg.bleu.max_ngram))
                .collect();
            let mut total = BleuStats::default();
            for p in &parts {
                total.add(p);
            }
            total.score(cfg.bleu.smoothing)
        }
        Metric::Chrfpp => {
            let parts: Vec<ChrfStats> = pairs
                .par_iter()
                .map(|(h, r)| ChrfStats::sentence(h, r, &cfg.chrfpp))
                .collect();
            let mut total = ChrfStats::default();
            for p in &parts {
                total.add(p);
            }
            total.score(cfg.chrfpp.beta)
        }
    })
}

fn lines_of(path: &Path) -> Result<Vec<String>> {
    Ok(split_lines(&read_to_string(path)?)
        .into_iter()
        .map(String::from)
        .collect())
}

pub fn score_files(
    hyp: &Path,
    reference: &Path,
    cfg: &ScoreConfig,
    direction: Option<String>,
) -> Result<ScoreReport> {
    let hyps = lines_of(hyp)?;
    let refs = lines_of(reference)?;
    let value = score_lines(&hyps, &refs, cfg)?;
    Ok(ScoreReport {
        metric: cfg.metric,
        value,
        n: hyps.len() as u64,
        config: *cfg,
        tokenize: TOKENIZE.into(),
        direction,
    })
}

/// Scores hypotheses line-aligned with `examples` separately for every
/// translation direction present, sorted by (source, target).
pub fn score_directions(
    examples: &[ReformulatedExample],
    hyps: &[String],
    cfg: &ScoreConfig,
) -> Result<Vec<DirectionScore>> {
    if examples.len() != hyps.len() {
        return Err(Error::Usage(format!(
            "{} hypotheses for {} test examples",
            hyps.len(),
            examples.len()
        )));
    }
    let mut groups: BTreeMap<(&str, &str), Aligned> = BTreeMap::new();
    for (ex, h) in examples.iter().zip(hyps) {
        let g = groups
            .entry((ex.meta.src_lang.as_str(), ex.meta.tgt_lang.as_str()))
            .or_default();
        g.0.push(h);
        g.1.push(&ex.target_text);
    }
    groups
        .into_iter()
        .map(|((s, t), (h, r))| {
            let v = score_lines(&h, &r, cfg)?;
            Ok(DirectionScore::new(s, t, v, h.len() as u64)?)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use reformkit_core::metrics::chrfpp;

    #[test]
    fn parallel_matches_sequential() {
        let h: Vec<String> = (0..50).map(|i| format!("a b c {i} d {}", i % 7)).collect();
        let r: Vec<String> = (0..50).map(|i| format!("a b {} {i} d", i % 3)).collect();
        let cfg = ScoreConfig::new(Metric::Chrfpp);
        let seq = chrfpp(&h, &r, &cfg.chrfpp).unwrap();
        assert_eq!(score_lines(&h, &r, &cfg).unwrap(), seq);
        let cfg = ScoreConfig::new(Metric::Bleu);
        assert_eq!(
            score_lines(&h, &r, &cfg).unwrap(),
            cfg.score(&h, &r).unwrap()
        );
    }

    #[test]
    fn identity_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("h.txt");
        std::fs::write(&p, "the cat sat\non the mat\n").unwrap();
        let rep = score_files(&p, &p, &ScoreConfig::new(Metric::Chrfpp), None).unwrap();
        assert_eq!(rep.value, 100.0);
        assert_eq!(rep.n, 2);
        assert_eq!(rep.tokenize, "whitespace");
    }
}
