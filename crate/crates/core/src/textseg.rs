//! Lossless text segmentation.
//!
//! A [`Segmentation`] covers its source string with contiguous units; joining
//! the units gives the string back byte for byte. For the word segmenters,
//! separators (whitespace, punctuation) ride along with the preceding unit,
//! so "the quick, brown" is `["the ", "quick, ", "brown"]`.

use alloc::vec::Vec;
use serde::{Deserialize, Serialize};
use unicode_segmentation::UnicodeSegmentation;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Segmenter {
    /// UAX #29 word boundaries; a unit starts at every segment that holds an
    /// alphanumeric character.
    #[default]
    UnicodeWords,
    /// Runs of non-whitespace.
    Whitespace,
    /// One unit per Unicode scalar value.
    Codepoints,
}

impl Segmenter {
    fn is_word_like(self) -> bool {
        !matches!(self, Segmenter::Codepoints)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Unit<'a> {
    pub text: &'a str,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segmentation<'a> {
    text: &'a str,
    bounds: Vec<(usize, usize)>,
    word_like: bool,
}

impl<'a> Segmentation<'a> {
    pub fn source(&self) -> &'a str {
        self.text
    }

    pub fn len(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }

    pub fn unit(&self, i: usize) -> Unit<'a> {
        let (start, end) = self.bounds[i];
        Unit {
            text: &self.text[start..end],
            start,
            end,
        }
    }

    pub fn units(&self) -> impl ExactSizeIterator<Item = Unit<'a>> + '_ {
        (0..self.bounds.len()).map(move |i| self.unit(i))
    }

    /// Splits unit `i` into (leading whitespace, content, trailing
    /// whitespace). For the codepoint segmenter the content is the unit.
    pub fn unit_parts(&self, i: usize) -> (&'a str, &'a str, &'a str) {
        let u = self.unit(i).text;
        if !self.word_like {
            return ("", u, "");
        }
        let lead = u.len() - u.trim_start().len();
        let body_end = u.trim_end().len().max(lead);
        (&u[..lead], &u[lead..body_end], &u[body_end..])
    }

    /// The source text covering the first `k` units.
    ///
    /// For word segmenters, whitespace trailing the k-th unit is dropped
    /// unless `k` covers every unit, so `take_prefix(len())` is always the
    /// full string.
    pub fn take_prefix(&self, k: usize) -> Result<&'a str> {
        let n = self.len();
        if k > n {
            return Err(Error::out_of_range(
                "prefix unit count",
                k,
                &alloc::format!("0..={n}"),
            ));
        }
        if k == 0 {
            return Ok("");
        }
        if k == n {
            return Ok(self.text);
        }
        let s = &self.text[..self.bounds[k - 1].1];
        Ok(if self.word_like { s.trim_end() } else { s })
    }

    /// The source text covering the last `k` units.
    pub fn take_suffix(&self, k: usize) -> Result<&'a str> {
        let n = self.len();
        if k > n {
            return Err(Error::out_of_range(
                "suffix unit count",
                k,
                &alloc::format!("0..={n}"),
            ));
        }
        if k == 0 {
            return Ok("");
        }
        Ok(&self.text[self.bounds[n - k].0..])
    }
}

pub fn segment(s: &str, seg: Segmenter) -> Segmentation<'_> {
    let bounds = match seg {
        Segmenter::UnicodeWords => {
            let atoms = s
                .split_word_bound_indices()
                .map(|(i, piece)| (i, piece.chars().any(char::is_alphanumeric)));
            group_bounds(s, atoms, true)
        }
        Segmenter::Whitespace => group_bounds(
            s,
            s.char_indices().map(|(i, c)| (i, !c.is_whitespace())),
            false,
        ),
        Segmenter::Codepoints => s
            .char_indices()
            .map(|(i, c)| (i, i + c.len_utf8()))
            .collect(),
    };
    Segmentation {
        text: s,
        bounds,
        word_like: seg.is_word_like(),
    }
}

/// Groups atoms into units: a new unit opens at every "content" atom that
/// follows content, separators attach backwards. Leading separators join
/// the first unit. With `split_adjacent` two touching content atoms are
/// separate units (ideographs under UAX #29); otherwise they merge.
fn group_bounds(
    s: &str,
    atoms: impl Iterator<Item = (usize, bool)>,
    split_adjacent: bool,
) -> Vec<(usize, usize)> {
    let mut bounds = Vec::new();
    let mut start = 0usize;
    let mut has_content = false;
    let mut prev_content = false;
    for (idx, content) in atoms {
        if content && has_content && (split_adjacent || !prev_content) {
            bounds.push((start, idx));
            start = idx;
        }
        has_content |= content;
        prev_content = content;
    }
    if !s.is_empty() {
        bounds.push((start, s.len()));
    }
    bounds
}

pub fn count_units(s: &str, seg: Segmenter) -> usize {
    segment(s, seg).len()
}

/// Length used for token statistics; same units as [`count_units`].
pub fn token_length(s: &str, seg: Segmenter) -> usize {
    count_units(s, seg)
}
