//! Sentinel masking of the input side: independent per-unit masking and
//! contiguous span masking. Targets are never touched.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::reformulate::{ReformulatedExample, Tag};
use crate::textseg::{segment, Segmenter};
use crate::{Error, Result};

/// Sentinel surface form with a `{k}` slot for the sentinel number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SentinelTemplate(String);

impl Default for SentinelTemplate {
    fn default() -> Self {
        Self("<extra_id_{k}>".into())
    }
}

impl SentinelTemplate {
    pub fn new(template: impl Into<String>) -> Result<Self> {
        let t = Self(template.into());
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.matches("{k}").count() != 1 {
            return Err(Error::InvalidConfig(format!(
                "sentinel template {:?} must contain exactly one {{k}} slot",
                self.0
            )));
        }
        Ok(())
    }

    pub fn render(&self, k: usize) -> String {
        self.0.replace("{k}", &format!("{k}"))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

fn check_rate(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::out_of_range("mask probability", p, "(0, 1)"))
    }
}

/// Replaces the given unit ranges of the input with one sentinel each.
/// Ranges must be sorted; overlapping or touching ranges are merged first.
pub fn collapse_spans(
    ex: &ReformulatedExample,
    seg: Segmenter,
    sentinels: &SentinelTemplate,
    spans: &[Range<usize>],
    tag: Tag,
) -> ReformulatedExample {
    let sg = segment(&ex.input_text, seg);
    let n = sg.len();
    let merged = merge_spans(spans, n);
    let mut out = String::with_capacity(ex.input_text.len());
    let mut masked = 0usize;
    let mut next = 0usize;
    for (k, span) in merged.iter().enumerate() {
        for i in next..span.start {
            out.push_str(sg.unit(i).text);
        }
        let (lead, _, _) = sg.unit_parts(span.start);
        let (_, _, trail) = sg.unit_parts(span.end - 1);
        out.push_str(lead);
        out.push_str(&sentinels.render(k));
        out.push_str(trail);
        masked += span.len();
        next = span.end;
    }
    for i in next..n {
        out.push_str(sg.unit(i).text);
    }
    let mut meta = ex.meta.clone();
    meta.mask_rate = Some(if n == 0 {
        0.0
    } else {
        masked as f64 / n as f64
    });
    ReformulatedExample {
        input_text: out,
        target_text: ex.target_text.clone(),
        tag,
        meta,
    }
}

fn merge_spans(spans: &[Range<usize>], n: usize) -> Vec<Range<usize>> {
    let mut merged: Vec<Range<usize>> = Vec::new();
    for s in spans {
        let s = s.start.min(n)..s.end.min(n);
        if s.is_empty() {
            continue;
        }
        match merged.last_mut() {
            Some(last) if s.start <= last.end => last.end = last.end.max(s.end),
            _ => merged.push(s),
        }
    }
    merged
}

/// Masks each input unit for which `decide(i)` is true. Every masked unit
/// gets its own sentinel, numbered from 0 left to right.
pub fn mask_tokens_with(
    ex: &ReformulatedExample,
    seg: Segmenter,
    sentinels: &SentinelTemplate,
    mut decide: impl FnMut(usize) -> bool,
) -> ReformulatedExample {
    let sg = segment(&ex.input_text, seg);
    let n = sg.len();
    let mut out = String::with_capacity(ex.input_text.len());
    let mut k = 0usize;
    for i in 0..n {
        // adjacent picks stay separate sentinels
        if decide(i) {
            let (lead, _, trail) = sg.unit_parts(i);
            out.push_str(lead);
            out.push_str(&sentinels.render(k));
            out.push_str(trail);
            k += 1;
        } else {
            out.push_str(sg.unit(i).text);
        }
    }
    let mut meta = ex.meta.clone();
    meta.mask_rate = Some(if n == 0 { 0.0 } else { k as f64 / n as f64 });
    ReformulatedExample {
        input_text: out,
        target_text: ex.target_text.clone(),
        tag: Tag::Mask,
        meta,
    }
}

/// Independent per-unit masking with probability `p`.
pub fn mask_tokens<R: Rng + ?Sized>(
    ex: &ReformulatedExample,
    p: f64,
    rng: &mut R,
    seg: Segmenter,
    sentinels: &SentinelTemplate,
) -> Result<ReformulatedExample> {
    check_rate(p)?;
    Ok(mask_tokens_with(ex, seg, sentinels, |_| {
        rng.random::<f64>() < p
    }))
}

/// Draws mask spans over `n` units as an alternating renewal process.
///
/// Span lengths are geometric with mean `mean_span`; gaps are geometric with
/// mean `mean_span * (1 - p) / p` (at least 1), which makes the long-run
/// masked fraction `p`. Gaps are never empty, so spans never touch. When
/// `p > mean_span / (mean_span + 1)` the gap mean is clamped to 1 and the
/// realized rate falls short of `p`.
pub fn draw_spans<R: Rng + ?Sized>(
    n: usize,
    p: f64,
    mean_span: u32,
    rng: &mut R,
) -> Result<Vec<Range<usize>>> {
    check_rate(p)?;
    if mean_span == 0 {
        return Err(Error::out_of_range("mean span", mean_span, ">= 1"));
    }
    let span_mean = mean_span as f64;
    let gap_mean = (span_mean * (1.0 - p) / p).max(1.0);
    let stay_masked = 1.0 - 1.0 / span_mean;
    let stay_open = 1.0 - 1.0 / gap_mean;
    let stationary = span_mean / (span_mean + gap_mean);

    let mut spans = Vec::new();
    let mut masked = n > 0 && rng.random::<f64>() < stationary;
    let mut start = 0usize;
    for i in 0..n {
        if i > 0 {
            let stay = if masked { stay_masked } else { stay_open };
            if rng.random::<f64>() >= stay {
                if masked {
                    spans.push(start..i);
                }
                masked = !masked;
                start = i;
            }
        }
    }
    if masked && n > 0 {
        spans.push(start..n);
    }
    Ok(spans)
}

/// Span masking: each drawn span collapses into a single sentinel.
pub fn span_mask<R: Rng + ?Sized>(
    ex: &ReformulatedExample,
    p: f64,
    mean_span: u32,
    rng: &mut R,
    seg: Segmenter,
    sentinels: &SentinelTemplate,
) -> Result<ReformulatedExample> {
    let n = segment(&ex.input_text, seg).len();
    let spans = draw_spans(n, p, mean_span, rng)?;
    Ok(collapse_spans(ex, seg, sentinels, &spans, Tag::SpanMask))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::TranslationExample;
    use crate::reformulate::{baseline, ScaffoldFormat};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn example(input: &str) -> ReformulatedExample {
        let ex = TranslationExample::new("a", "b", input, "target stays").unwrap();
        baseline(&ex, &ScaffoldFormat::default())
    }

    #[test]
    fn no_decisions_means_no_change() {
        let ex = example("one two three");
        let out = mask_tokens_with(
            &ex,
            Segmenter::default(),
            &SentinelTemplate::default(),
            |_| false,
        );
        assert_eq!(out.input_text, ex.input_text);
        assert_eq!(out.meta.mask_rate, Some(0.0));
    }

    #[test]
    fn numbering_is_left_to_right() {
        let ex = example("u0 u1 u2 u3 u4 u5 u6 u7 u8 u9");
        let out = mask_tokens_with(
            &ex,
            Segmenter::default(),
            &SentinelTemplate::default(),
            |i| i == 2 || i == 7,
        );
        assert_eq!(
            out.input_text,
            "u0 u1 <extra_id_0> u3 u4 u5 u6 <extra_id_1> u8 u9"
        );
        assert_eq!(out.target_text, "target stays");
        assert_eq!(out.meta.mask_rate, Some(0.2));
        assert_eq!(out.tag, Tag::Mask);
    }

    #[test]
    fn short_input_collapses_to_one_sentinel() {
        let ex = example("ab cd");
        let whole = [Range { start: 0, end: 2 }];
        let out = collapse_spans(
            &ex,
            Segmenter::default(),
            &SentinelTemplate::default(),
            &whole,
            Tag::SpanMask,
        );
        assert_eq!(out.input_text, "<extra_id_0>");
        assert_eq!(out.meta.mask_rate, Some(1.0));
    }

    #[test]
    fn touching_spans_merge() {
        let ex = example("a b c d e f");
        let out = collapse_spans(
            &ex,
            Segmenter::default(),
            &SentinelTemplate::default(),
            &[1..2, 2..4, 5..6],
            Tag::SpanMask,
        );
        assert_eq!(out.input_text, "a <extra_id_0> e <extra_id_1>");
    }

    #[test]
    fn drawn_spans_never_touch() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let spans = draw_spans(50, 0.3, 2, &mut rng).unwrap();
            for w in spans.windows(2) {
                assert!(w[0].end < w[1].start);
            }
            for s in &spans {
                assert!(!s.is_empty() && s.end <= 50);
            }
        }
    }

    #[test]
    fn rates_validated() {
        let ex = example("a b");
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = SentinelTemplate::default();
        assert!(mask_tokens(&ex, 0.0, &mut rng, Segmenter::default(), &t).is_err());
        assert!(mask_tokens(&ex, 1.0, &mut rng, Segmenter::default(), &t).is_err());
        assert!(span_mask(&ex, 0.2, 0, &mut rng, Segmenter::default(), &t).is_err());
        assert!(SentinelTemplate::new("<mask>").is_err());
    }
}
