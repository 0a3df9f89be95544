//! Corpus-level BLEU and chrF++, and xx-yy direction averaging.
//!
//! Both metrics reduce per-sentence integer statistics by summation, so a
//! corpus score does not depend on sentence order or on how sentences are
//! distributed across workers.
//!
//! BLEU scores whitespace-tokenized text. chrF++ uses character n-grams
//! over the text with whitespace removed plus whitespace-token word
//! n-grams; precision and recall are each averaged over the n-gram orders
//! that occur (hypothesis side for precision, reference side for recall)
//! and combined into F-beta.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Bleu,
    Chrfpp,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Bleu => "bleu",
            Metric::Chrfpp => "chrfpp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "method", content = "k", rename_all = "snake_case")]
pub enum Smoothing {
    #[default]
    None,
    /// Adds `k` to matches and totals of every order above unigrams.
    AddK(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BleuConfig {
    pub max_ngram: usize,
    pub smoothing: Smoothing,
}

impl Default for BleuConfig {
    fn default() -> Self {
        Self {
            max_ngram: 4,
            smoothing: Smoothing::None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ChrfConfig {
    pub char_n: usize,
    pub word_n: usize,
    pub beta: f64,
}

impl Default for ChrfConfig {
    fn default() -> Self {
        Self {
            char_n: 6,
            word_n: 2,
            beta: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreConfig {
    pub metric: Metric,
    #[serde(default)]
    pub bleu: BleuConfig,
    #[serde(default)]
    pub chrfpp: ChrfConfig,
}

impl ScoreConfig {
    pub fn new(metric: Metric) -> Self {
        Self {
            metric,
            bleu: BleuConfig::default(),
            chrfpp: ChrfConfig::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.bleu.max_ngram == 0 {
            return Err(Error::out_of_range("bleu max_ngram", 0, ">= 1"));
        }
        if let Smoothing::AddK(k) = self.bleu.smoothing {
            if k.is_nan() || k <= 0.0 {
                return Err(Error::out_of_range("add-k smoothing", k, "> 0"));
            }
        }
        if self.chrfpp.char_n == 0 {
            return Err(Error::out_of_range("chrF char_n", 0, ">= 1"));
        }
        if self.chrfpp.beta.is_nan() || self.chrfpp.beta <= 0.0 {
            return Err(Error::out_of_range("chrF beta", self.chrfpp.beta, "> 0"));
        }
        Ok(())
    }

    pub fn score<S: AsRef<str>>(&self, hyps: &[S], refs: &[S]) -> Result<f64> {
        self.validate()?;
        match self.metric {
            Metric::Bleu => bleu(hyps, refs, &self.bleu),
            Metric::Chrfpp => chrfpp(hyps, refs, &self.chrfpp),
        }
    }
}

fn check_lengths<S>(hyps: &[S], refs: &[S]) -> Result<()> {
    if hyps.len() != refs.len() {
        return Err(Error::LengthMismatch {
            hyps: hyps.len(),
            refs: refs.len(),
        });
    }
    if hyps.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(())
}

fn ngram_counts<T: Ord>(items: &[T], n: usize) -> BTreeMap<&[T], u64> {
    let mut m = BTreeMap::new();
    if n > 0 && items.len() >= n {
        for w in items.windows(n) {
            *m.entry(w).or_insert(0) += 1;
        }
    }
    m
}

/// (hypothesis n-grams, reference n-grams, clipped matches) for one order.
fn order_stats<T: Ord>(hyp: &[T], reference: &[T], n: usize) -> [u64; 3] {
    let h = ngram_counts(hyp, n);
    let r = ngram_counts(reference, n);
    let matches = h
        .iter()
        .map(|(g, c)| (*c).min(r.get(g).copied().unwrap_or(0)))
        .sum();
    [h.values().sum(), r.values().sum(), matches]
}

/// Summable BLEU sufficient statistics.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BleuStats {
    pub hyp_len: u64,
    pub ref_len: u64,
    pub max_ref_len: u64,
    /// Per order `n = 1..=max_ngram`: total hypothesis n-grams.
    pub totals: Vec<u64>,
    /// Per order: clipped matches.
    pub matches: Vec<u64>,
}

impl BleuStats {
    pub fn sentence(hyp: &str, reference: &str, max_ngram: usize) -> Self {
        let h: Vec<&str> = hyp.split_whitespace().collect();
        let r: Vec<&str> = reference.split_whitespace().collect();
        let mut s = BleuStats {
            hyp_len: h.len() as u64,
            ref_len: r.len() as u64,
            max_ref_len: r.len() as u64,
            totals: vec![0; max_ngram],
            matches: vec![0; max_ngram],
        };
        for n in 1..=max_ngram {
            let [t, _, m] = order_stats(&h, &r, n);
            s.totals[n - 1] = t;
            s.matches[n - 1] = m;
        }
        s
    }

    pub fn add(&mut self, other: &BleuStats) {
        if self.totals.len() < other.totals.len() {
            self.totals.resize(other.totals.len(), 0);
            self.matches.resize(other.matches.len(), 0);
        }
        self.hyp_len += other.hyp_len;
        self.ref_len += other.ref_len;
        self.max_ref_len = self.max_ref_len.max(other.max_ref_len);
        for (a, b) in self.totals.iter_mut().zip(&other.totals) {
            *a += b;
        }
        for (a, b) in self.matches.iter_mut().zip(&other.matches) {
            *a += b;
        }
    }

    /// Score in `[0, 100]`.
    ///
    /// When the longest reference has fewer than `max_ngram` tokens the
    /// order is reduced to that length, so short corpora still score.
    pub fn score(&self, smoothing: Smoothing) -> f64 {
        if self.max_ref_len == 0 {
            return if self.hyp_len == 0 { 100.0 } else { 0.0 };
        }
        if self.hyp_len == 0 {
            return 0.0;
        }
        let order = (self.totals.len() as u64).min(self.max_ref_len) as usize;
        let mut log_sum = 0.0;
        for n in 0..order {
            let (mut m, mut t) = (self.matches[n] as f64, self.totals[n] as f64);
            if let Smoothing::AddK(k) = smoothing {
                if n > 0 {
                    m += k;
                    t += k;
                }
            }
            if m == 0.0 || t == 0.0 {
                return 0.0;
            }
            log_sum += libm::log(m / t);
        }
        let (c, r) = (self.hyp_len as f64, self.ref_len as f64);
        let bp = if c > r { 1.0 } else { libm::exp(1.0 - r / c) };
        (100.0 * bp * libm::exp(log_sum / order as f64)).clamp(0.0, 100.0)
    }
}

pub fn bleu<S: AsRef<str>>(hyps: &[S], refs: &[S], cfg: &BleuConfig) -> Result<f64> {
    check_lengths(hyps, refs)?;
    if cfg.max_ngram == 0 {
        return Err(Error::out_of_range("bleu max_ngram", 0, ">= 1"));
    }
    let mut total = BleuStats {
        totals: vec![0; cfg.max_ngram],
        matches: vec![0; cfg.max_ngram],
        ..BleuStats::default()
    };
    for (h, r) in hyps.iter().zip(refs) {
        total.add(&BleuStats::sentence(h.as_ref(), r.as_ref(), cfg.max_ngram));
    }
    Ok(total.score(cfg.smoothing))
}

/// Summable chrF++ statistics: per order `[hyp, ref, matches]`, character
/// orders first, then word orders.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChrfStats {
    pub orders: Vec<[u64; 3]>,
}

impl ChrfStats {
    pub fn sentence(hyp: &str, reference: &str, cfg: &ChrfConfig) -> Self {
        let hc: Vec<char> = hyp.chars().filter(|c| !c.is_whitespace()).collect();
        let rc: Vec<char> = reference.chars().filter(|c| !c.is_whitespace()).collect();
        let hw: Vec<&str> = hyp.split_whitespace().collect();
        let rw: Vec<&str> = reference.split_whitespace().collect();
        let mut orders = Vec::with_capacity(cfg.char_n + cfg.word_n);
        for n in 1..=cfg.char_n {
            orders.push(order_stats(&hc, &rc, n));
        }
        for n in 1..=cfg.word_n {
            orders.push(order_stats(&hw, &rw, n));
        }
        ChrfStats { orders }
    }

    pub fn add(&mut self, other: &ChrfStats) {
        if self.orders.len() < other.orders.len() {
            self.orders.resize(other.orders.len(), [0; 3]);
        }
        for (a, b) in self.orders.iter_mut().zip(&other.orders) {
            for k in 0..3 {
                a[k] += b[k];
            }
        }
    }

    pub fn score(&self, beta: f64) -> f64 {
        let mean = |pick: fn(&[u64; 3]) -> Option<f64>| {
            let vals: Vec<f64> = self.orders.iter().filter_map(pick).collect();
            if vals.is_empty() {
                0.0
            } else {
                vals.iter().sum::<f64>() / vals.len() as f64
            }
        };
        let precision = mean(|o| (o[0] > 0).then(|| o[2] as f64 / o[0] as f64));
        let recall = mean(|o| (o[1] > 0).then(|| o[2] as f64 / o[1] as f64));
        let b2 = beta * beta;
        let denom = b2 * precision + recall;
        if denom == 0.0 {
            return 0.0;
        }
        (100.0 * (1.0 + b2) * precision * recall / denom).clamp(0.0, 100.0)
    }
}

pub fn chrfpp<S: AsRef<str>>(hyps: &[S], refs: &[S], cfg: &ChrfConfig) -> Result<f64> {
    check_lengths(hyps, refs)?;
    let mut total = ChrfStats::default();
    for (h, r) in hyps.iter().zip(refs) {
        total.add(&ChrfStats::sentence(h.as_ref(), r.as_ref(), cfg));
    }
    Ok(total.score(cfg.beta))
}

/// Metric value for one translation direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionScore {
    pub src: String,
    pub tgt: String,
    pub value: f64,
    #[serde(default)]
    pub n_sentences: u64,
}

impl DirectionScore {
    pub fn new(
        src: impl Into<String>,
        tgt: impl Into<String>,
        value: f64,
        n_sentences: u64,
    ) -> Result<Self> {
        let s = Self {
            src: src.into(),
            tgt: tgt.into(),
            value,
            n_sentences,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=100.0).contains(&self.value) {
            return Err(Error::out_of_range(
                "direction score",
                self.value,
                "[0, 100]",
            ));
        }
        if self.src == self.tgt {
            return Err(Error::LanguageCollision(format!(
                "direction {}-{} has the same source and target",
                self.src, self.tgt
            )));
        }
        Ok(())
    }
}

/// Unweighted mean over directions (the xx-yy average).
pub fn average_directions(scores: &[DirectionScore]) -> Result<f64> {
    if scores.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let mut seen = BTreeMap::new();
    for s in scores {
        s.validate()?;
        if seen.insert((s.src.as_str(), s.tgt.as_str()), ()).is_some() {
            return Err(Error::DuplicateDirection {
                src: s.src.clone(),
                tgt: s.tgt.clone(),
            });
        }
    }
    Ok(scores.iter().map(|s| s.value).sum::<f64>() / scores.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bleu_identity_and_disjoint() {
        let refs = ["the cat sat on the mat", "a b c d e"];
        assert_eq!(bleu(&refs, &refs, &BleuConfig::default()).unwrap(), 100.0);
        let hyps = ["x y z", "q r s t"];
        assert_eq!(bleu(&hyps, &refs, &BleuConfig::default()).unwrap(), 0.0);
    }

    #[test]
    fn bleu_hand_computed() {
        // refs max length 3 -> orders 1..3
        // p1 = 2/4 (the clipped to 1, cat), p2 = 1/3, p3 = 0/2
        let h = ["the the the cat"];
        let r = ["the cat sat"];
        assert_eq!(bleu(&h, &r, &BleuConfig::default()).unwrap(), 0.0);
        let smoothed = BleuConfig {
            max_ngram: 4,
            smoothing: Smoothing::AddK(1.0),
        };
        // p1 = 2/4, p2 = 2/4, p3 = 1/3; c = 4 > r = 3 so BP = 1
        let expected = 100.0 * libm::pow(0.5 * 0.5 * (1.0 / 3.0), 1.0 / 3.0);
        assert!((bleu(&h, &r, &smoothed).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn bleu_brevity_penalty() {
        let h = ["a b c d"];
        let r = ["a b c d e f"];
        let expected = 100.0 * libm::exp(1.0 - 6.0 / 4.0);
        assert!((bleu(&h, &r, &BleuConfig::default()).unwrap() - expected).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        assert_eq!(
            bleu(&["a"], &["a", "b"], &BleuConfig::default()),
            Err(Error::LengthMismatch { hyps: 1, refs: 2 })
        );
        let empty: [&str; 0] = [];
        assert_eq!(
            chrfpp(&empty, &empty, &ChrfConfig::default()),
            Err(Error::EmptyCorpus)
        );
    }

    #[test]
    fn chrf_cat_hat() {
        // char orders 1..3 and word order 1 occur on both sides
        // P = R = (2/3 + 1/2 + 0 + 0) / 4 = 7/24
        let v = chrfpp(&["cat"], &["hat"], &ChrfConfig::default()).unwrap();
        assert!((v - 100.0 * 7.0 / 24.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn chrf_identity_and_empty() {
        let refs = ["Das ist gut.", "ein zwei drei"];
        assert_eq!(chrfpp(&refs, &refs, &ChrfConfig::default()).unwrap(), 100.0);
        assert_eq!(
            chrfpp(&["", ""], &refs, &ChrfConfig::default()).unwrap(),
            0.0
        );
    }

    #[test]
    fn direction_average() {
        let ds = |v: &[f64]| -> Vec<DirectionScore> {
            v.iter()
                .enumerate()
                .map(|(i, &x)| DirectionScore::new(format!("s{i}"), "t", x, 1).unwrap())
                .collect()
        };
        assert_eq!(average_directions(&ds(&[10.0, 20.0, 30.0])).unwrap(), 20.0);
        assert_eq!(average_directions(&ds(&[42.5])).unwrap(), 42.5);
        let mut dup = ds(&[1.0, 2.0]);
        dup[1].src = dup[0].src.clone();
        assert!(matches!(
            average_directions(&dup),
            Err(Error::DuplicateDirection { .. })
        ));
        assert!(average_directions(&[]).is_err());
        assert!(DirectionScore::new("a", "a", 1.0, 1).is_err());
        assert!(DirectionScore::new("a", "b", 101.0, 1).is_err());
    }

    #[test]
    fn config_validation() {
        let mut c = ScoreConfig::new(Metric::Bleu);
        assert!(c.validate().is_ok());
        c.bleu.max_ngram = 0;
        assert!(c.validate().is_err());
        let mut c = ScoreConfig::new(Metric::Chrfpp);
        c.chrfpp.beta = 0.0;
        assert!(c.validate().is_err());
    }
}
