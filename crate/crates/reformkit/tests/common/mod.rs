//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// All n-grams of `items` with multiplicities, by direct enumeration.
fn grams<T: Clone + Eq + std::hash::Hash>(items: &[T], n: usize) -> HashMap<Vec<T>, u64> {
    let mut m = HashMap::new();
    if n == 0 || items.len() < n {
        return m;
    }
    for start in 0..=items.len() - n {
        let g: Vec<T> = items[start..start + n].to_vec();
        *m.entry(g).or_insert(0) += 1;
    }
    m
}

fn clipped<T: Clone + Eq + std::hash::Hash>(h: &[T], r: &[T], n: usize) -> (u64, u64, u64) {
    let hg = grams(h, n);
    let rg = grams(r, n);
    let mut matched = 0;
    for (g, c) in &hg {
        if let Some(rc) = rg.get(g) {
            matched += c.min(rc);
        }
    }
    (hg.values().sum(), rg.values().sum(), matched)
}

/// Corpus BLEU from the definition: clipped n-gram precisions summed over
/// the corpus, geometric mean, brevity penalty. Order shrinks to the
/// longest reference; add-k touches orders >= 2.
pub fn bleu(hyps: &[String], refs: &[String], max_n: usize, add_k: Option<f64>) -> f64 {
    let ht: Vec<Vec<&str>> = hyps
        .iter()
        .map(|s| s.split_whitespace().collect())
        .collect();
    let rt: Vec<Vec<&str>> = refs
        .iter()
        .map(|s| s.split_whitespace().collect())
        .collect();
    let c: usize = ht.iter().map(Vec::len).sum();
    let r: usize = rt.iter().map(Vec::len).sum();
    let longest = rt.iter().map(Vec::len).max().unwrap_or(0);
    if longest == 0 {
        return if c == 0 { 100.0 } else { 0.0 };
    }
    if c == 0 {
        return 0.0;
    }
    let order = max_n.min(longest);
    let mut product = 1.0f64;
    for n in 1..=order {
        let (mut matched, mut total) = (0.0, 0.0);
        for (h, rr) in ht.iter().zip(&rt) {
            let (t, _, m) = clipped(h, rr, n);
            matched += m as f64;
            total += t as f64;
        }
        if let (Some(k), true) = (add_k, n >= 2) {
            matched += k;
            total += k;
        }
        if matched == 0.0 || total == 0.0 {
            return 0.0;
        }
        product *= matched / total;
    }
    let bp = if c > r {
        1.0
    } else {
        (1.0 - r as f64 / c as f64).exp()
    };
    100.0 * bp * product.powf(1.0 / order as f64)
}

/// Corpus chrF++: character n-grams (whitespace removed) and word n-grams
/// summed over the corpus; precision and recall averaged over the orders
/// where they are defined; F-beta of the averages.
pub fn chrfpp(hyps: &[String], refs: &[String], char_n: usize, word_n: usize, beta: f64) -> f64 {
    let mut per_order: Vec<(u64, u64, u64)> = vec![(0, 0, 0); char_n + word_n];
    for (h, r) in hyps.iter().zip(refs) {
        let hc: Vec<char> = h.chars().filter(|c| !c.is_whitespace()).collect();
        let rc: Vec<char> = r.chars().filter(|c| !c.is_whitespace()).collect();
        let hw: Vec<&str> = h.split_whitespace().collect();
        let rw: Vec<&str> = r.split_whitespace().collect();
        for n in 1..=char_n {
            let (a, b, m) = clipped(&hc, &rc, n);
            let o = &mut per_order[n - 1];
            *o = (o.0 + a, o.1 + b, o.2 + m);
        }
        for n in 1..=word_n {
            let (a, b, m) = clipped(&hw, &rw, n);
            let o = &mut per_order[char_n + n - 1];
            *o = (o.0 + a, o.1 + b, o.2 + m);
        }
    }
    let precisions: Vec<f64> = per_order
        .iter()
        .filter(|o| o.0 > 0)
        .map(|o| o.2 as f64 / o.0 as f64)
        .collect();
    let recalls: Vec<f64> = per_order
        .iter()
        .filter(|o| o.1 > 0)
        .map(|o| o.2 as f64 / o.1 as f64)
        .collect();
    let avg = |v: &[f64]| {
        if v.is_empty() {
            0.0
        } else {
            v.iter().sum::<f64>() / v.len() as f64
        }
    };
    let (p, r) = (avg(&precisions), avg(&recalls));
    let b2 = beta * beta;
    if b2 * p + r == 0.0 {
        return 0.0;
    }
    100.0 * (1.0 + b2) * p * r / (b2 * p + r)
}

/// Random sentence over a small vocabulary so n-grams collide often.
pub fn random_sentence(rng: &mut ChaCha8Rng, max_words: usize) -> String {
    const VOCAB: [&str; 12] = [
        "the",
        "a",
        "cat",
        "dog",
        "sat",
        "on",
        "mat",
        "ran",
        "é",
        "ཀ་ཁ",
        "猫",
        "x-y",
    ];
    let n = rng.random_range(0..=max_words);
    (0..n)
        .map(|_| VOCAB[rng.random_range(0..VOCAB.len())])
        .collect::<Vec<_>>()
        .join(" ")
}

/// Pairs where the hypothesis is a noisy copy of the reference.
pub fn random_pairs(seed: u64, n: usize) -> (Vec<String>, Vec<String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hyps = Vec::new();
    let mut refs = Vec::new();
    for _ in 0..n {
        let r = random_sentence(&mut rng, 14);
        let h = if rng.random_bool(0.5) {
            let mut w: Vec<&str> = r.split_whitespace().collect();
            if !w.is_empty() && rng.random_bool(0.7) {
                let i = rng.random_range(0..w.len());
                w.remove(i);
            }
            w.join(" ")
        } else {
            random_sentence(&mut rng, 14)
        };
        hyps.push(h);
        refs.push(r);
    }
    (hyps, refs)
}

/// Spearman correlation from its definition: ranks by pairwise counting
/// (ties get the average rank), then Pearson on the ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    let rank = |v: &[f64]| -> Vec<f64> {
        v.iter()
            .map(|a| {
                let less = v.iter().filter(|b| *b < a).count() as f64;
                let equal = v.iter().filter(|b| *b == a).count() as f64;
                less + (equal + 1.0) / 2.0
            })
            .collect()
    };
    let (rx, ry) = (rank(x), rank(y));
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for i in 0..rx.len() {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx).powi(2);
        syy += (ry[i] - my).powi(2);
    }
    if rx.len() < 2 || sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Pearson chi-square statistic of `samples` in [0, 1] against the uniform
/// law over `buckets` equal-width bins.
pub fn chi_square_uniform(samples: &[f64], buckets: usize) -> f64 {
    let mut counts = vec![0u64; buckets];
    for &u in samples {
        let b = ((u * buckets as f64) as usize).min(buckets - 1);
        counts[b] += 1;
    }
    let expected = samples.len() as f64 / buckets as f64;
    counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum()
}

/// Upper 0.001 quantile of chi-square with 9 degrees of freedom.
pub const CHI2_9DF_P001: f64 = 27.877;

/// Simulates span masking over `seqs` sequences of `len` units by drawing
/// whole span and gap lengths from geometric laws (inverse CDF), starting
/// in the stationary state. Returns (masked fraction, mean span length).
pub fn simulate_spans(seed: u64, seqs: usize, len: usize, p: f64, mean_span: f64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gap_mean = (mean_span * (1.0 - p) / p).max(1.0);
    let geometric = |rng: &mut ChaCha8Rng, mean: f64| -> usize {
        if mean <= 1.0 {
            return 1;
        }
        let u: f64 = 1.0 - rng.random::<f64>();
        (u.ln() / (1.0 - 1.0 / mean).ln()).ceil().max(1.0) as usize
    };
    let (mut masked, mut spans, mut span_units) = (0usize, 0usize, 0usize);
    for _ in 0..seqs {
        let mut in_span = rng.random::<f64>() < mean_span / (mean_span + gap_mean);
        let mut pos = 0;
        while pos < len {
            let run = geometric(&mut rng, if in_span { mean_span } else { gap_mean });
            let run = run.min(len - pos);
            if in_span {
                masked += run;
                spans += 1;
                span_units += run;
            }
            pos += run;
            in_span = !in_span;
        }
    }
    (
        masked as f64 / (seqs * len) as f64,
        span_units as f64 / spans as f64,
    )
}

/// Two-language slice of the synthetic generator as a bilingual corpus.
pub fn synthetic_bilingual(sentences: usize, seed: u64) -> reformkit_core::corpus::BilingualCorpus {
    use reformkit::synth::{generate, SynthSpec};
    let c = generate(SynthSpec {
        languages: 2,
        sentences,
        seed,
    })
    .unwrap();
    let langs = c.languages().to_vec();
    let pairs = c
        .records()
        .iter()
        .map(|r| {
            (
                r.text(&langs[1].code).unwrap().to_string(),
                r.text(&langs[0].code).unwrap().to_string(),
            )
        })
        .collect();
    reformkit_core::corpus::BilingualCorpus::new(langs[1].clone(), langs[0].clone(), pairs).unwrap()
}
