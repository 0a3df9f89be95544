//! Reformulation kernels: baseline, POSE, prefix+suffix, ParSE and MiPS.
//!
//! Every kernel is a pure function of its arguments. Scaffolds are joined to
//! the translation with [`ScaffoldFormat::delimiter`].

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::corpus::{SentenceRecord, TranslationExample};
use crate::textseg::{segment, Segmenter};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tag {
    Baseline,
    Pose,
    PrefixSuffix,
    Parse,
    Mips,
    Mask,
    SpanMask,
}

impl Tag {
    pub const ALL: [Tag; 7] = [
        Tag::Baseline,
        Tag::Pose,
        Tag::PrefixSuffix,
        Tag::Parse,
        Tag::Mips,
        Tag::Mask,
        Tag::SpanMask,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Baseline => "baseline",
            Tag::Pose => "pose",
            Tag::PrefixSuffix => "prefix_suffix",
            Tag::Parse => "parse",
            Tag::Mips => "mips",
            Tag::Mask => "mask",
            Tag::SpanMask => "span_mask",
        }
    }

    pub fn is_reformulated(self) -> bool {
        self != Tag::Baseline
    }
}

impl core::fmt::Display for Tag {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Why a kernel emitted a different shape than requested.
pub const FALLBACK_PIVOT_COLLISION: &str = "pivot_collision";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub src_lang: String,
    pub tgt_lang: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence_id: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_index: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix_fraction: Option<f64>,
    /// Front share of the scaffold for prefix+suffix.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prefix_share: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub scaffold_langs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fallback: Option<String>,
    #[serde(default, skip_serializing_if = "core::ops::Not::not")]
    pub truncated: bool,
}

/// One training record as written to the JSONL shards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReformulatedExample {
    #[serde(rename = "input")]
    pub input_text: String,
    #[serde(rename = "target")]
    pub target_text: String,
    pub tag: Tag,
    pub meta: Meta,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScaffoldFormat {
    pub delimiter: String,
    /// Prepended to every input with `{code}` replaced by the target
    /// language code. Empty for no tag.
    pub target_lang_tag_template: String,
}

impl Default for ScaffoldFormat {
    fn default() -> Self {
        Self {
            delimiter: "\n".into(),
            target_lang_tag_template: String::new(),
        }
    }
}

impl ScaffoldFormat {
    pub fn new(delimiter: impl Into<String>, template: impl Into<String>) -> Result<Self> {
        let fmt = Self {
            delimiter: delimiter.into(),
            target_lang_tag_template: template.into(),
        };
        fmt.validate()?;
        Ok(fmt)
    }

    pub fn validate(&self) -> Result<()> {
        if self.delimiter.is_empty() {
            return Err(Error::InvalidConfig(
                "scaffold delimiter must be nonempty".into(),
            ));
        }
        let t = &self.target_lang_tag_template;
        if !t.is_empty() && t.matches("{code}").count() != 1 {
            return Err(Error::InvalidConfig(format!(
                "tag template {t:?} must contain exactly one {{code}} slot"
            )));
        }
        Ok(())
    }

    fn head(&self, target_lang: &str) -> String {
        self.target_lang_tag_template.replace("{code}", target_lang)
    }
}

/// `round(x)` with halves rounded up, for nonnegative `x`. The small bias
/// absorbs products like `0.35 * 10 = 3.4999999999999996`.
pub fn round_half_up(x: f64) -> usize {
    libm::floor(x + 0.5 + 1e-9) as usize
}

fn check_unit_interval(what: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::out_of_range(what, v, "[0, 1]"))
    }
}

fn base_meta(ex: &TranslationExample) -> Meta {
    Meta {
        src_lang: ex.source_lang.clone(),
        tgt_lang: ex.target_lang.clone(),
        sentence_id: ex.sentence_id,
        ..Meta::default()
    }
}

fn join_input(fmt: &ScaffoldFormat, target_lang: &str, source: &str, scaffolds: &[&str]) -> String {
    let mut s = fmt.head(target_lang);
    s.push_str(source);
    for part in scaffolds.iter().filter(|p| !p.is_empty()) {
        s.push_str(&fmt.delimiter);
        s.push_str(part);
    }
    s
}

pub fn baseline(ex: &TranslationExample, fmt: &ScaffoldFormat) -> ReformulatedExample {
    ReformulatedExample {
        input_text: join_input(fmt, &ex.target_lang, &ex.source_text, &[]),
        target_text: ex.target_text.clone(),
        tag: Tag::Baseline,
        meta: base_meta(ex),
    }
}

/// Partial output scaffold: appends the first `round(u * n)` units of the
/// target to the source.
pub fn pose(
    ex: &TranslationExample,
    u: f64,
    seg: Segmenter,
    fmt: &ScaffoldFormat,
) -> Result<ReformulatedExample> {
    check_unit_interval("prefix fraction", u)?;
    let target = segment(&ex.target_text, seg);
    let k = round_half_up(u * target.len() as f64);
    let prefix = target.take_prefix(k)?;
    Ok(ReformulatedExample {
        input_text: join_input(fmt, &ex.target_lang, &ex.source_text, &[prefix]),
        target_text: ex.target_text.clone(),
        tag: Tag::Pose,
        meta: Meta {
            prefix_fraction: Some(u),
            ..base_meta(ex)
        },
    })
}

/// Same total scaffold length as [`pose`], split into a front piece of
/// `round(r * k)` units and a back piece holding the rest.
pub fn prefix_suffix(
    ex: &TranslationExample,
    u: f64,
    r: f64,
    seg: Segmenter,
    fmt: &ScaffoldFormat,
) -> Result<ReformulatedExample> {
    check_unit_interval("prefix fraction", u)?;
    check_unit_interval("prefix share", r)?;
    let target = segment(&ex.target_text, seg);
    let n = target.len();
    let k = round_half_up(u * n as f64).min(n);
    let front = round_half_up(r * k as f64).min(k);
    let back = (k - front).min(n - front);
    let prefix = target.take_prefix(front)?;
    let suffix = target.take_suffix(back)?;
    Ok(ReformulatedExample {
        input_text: join_input(fmt, &ex.target_lang, &ex.source_text, &[prefix, suffix]),
        target_text: ex.target_text.clone(),
        tag: Tag::PrefixSuffix,
        meta: Meta {
            prefix_fraction: Some(u),
            prefix_share: Some(r),
            ..base_meta(ex)
        },
    })
}

/// Parallel scaffold through a pivot language.
///
/// When the pivot is the source or the target the example is emitted in
/// baseline shape and `meta.fallback` is set.
pub fn parse_reform(
    rec: &SentenceRecord,
    src: &str,
    tgt: &str,
    pivot: &str,
    fmt: &ScaffoldFormat,
) -> Result<ReformulatedExample> {
    let ex = TranslationExample::from_record(rec, src, tgt)?;
    if pivot == src || pivot == tgt {
        let mut out = baseline(&ex, fmt);
        out.meta.fallback = Some(FALLBACK_PIVOT_COLLISION.to_string());
        return Ok(out);
    }
    let scaffold = rec.text(pivot)?;
    Ok(ReformulatedExample {
        input_text: join_input(fmt, tgt, &ex.source_text, &[scaffold]),
        target_text: ex.target_text.clone(),
        tag: Tag::Parse,
        meta: Meta {
            scaffold_langs: vec![pivot.to_string()],
            ..base_meta(&ex)
        },
    })
}

/// Mixed-language parallel scaffold: one extra translation on each side,
/// four distinct languages in total.
pub fn mips_reform(
    rec: &SentenceRecord,
    src: &str,
    tgt: &str,
    aux_in: &str,
    aux_out: &str,
    fmt: &ScaffoldFormat,
) -> Result<ReformulatedExample> {
    let codes = [src, tgt, aux_in, aux_out];
    for i in 0..codes.len() {
        for j in i + 1..codes.len() {
            if codes[i] == codes[j] {
                return Err(Error::LanguageCollision(format!(
                    "MiPS needs 4 distinct languages, got {src}/{tgt}/{aux_in}/{aux_out}"
                )));
            }
        }
    }
    let ex = TranslationExample::from_record(rec, src, tgt)?;
    let scaffold_in = rec.text(aux_in)?;
    let scaffold_out = rec.text(aux_out)?;
    let mut target_text = ex.target_text.clone();
    target_text.push_str(&fmt.delimiter);
    target_text.push_str(scaffold_out);
    Ok(ReformulatedExample {
        input_text: join_input(fmt, tgt, &ex.source_text, &[scaffold_in]),
        target_text,
        tag: Tag::Mips,
        meta: Meta {
            scaffold_langs: vec![aux_in.to_string(), aux_out.to_string()],
            ..base_meta(&ex)
        },
    })
}
