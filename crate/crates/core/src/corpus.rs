//! Bilingual and multi-parallel corpora.
//!
//! Constructors validate and reject; nothing is ever dropped silently, so a
//! corpus that loads has exactly as many pairs/records as its input rows.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::rng::{domain, substream};
use crate::{Error, Result};

/// A language as declared in a corpus manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Language {
    pub code: String,
    #[serde(default)]
    pub in_pretrain: bool,
    /// Number of pretraining examples; 0 means unknown.
    #[serde(default)]
    pub pretrain_size: u64,
}

impl Language {
    pub fn new(code: impl Into<String>) -> Self {
        Self {
            code: code.into(),
            in_pretrain: false,
            pretrain_size: 0,
        }
    }

    pub fn with_pretrain(mut self, in_pretrain: bool, pretrain_size: u64) -> Self {
        self.in_pretrain = in_pretrain;
        self.pretrain_size = pretrain_size;
        self
    }
}

/// Unicode NFC, the only normalization applied to loaded text.
pub fn nfc(s: &str) -> String {
    s.nfc().collect()
}

fn is_blank(s: &str) -> bool {
    s.trim().is_empty()
}

fn check_language_set(languages: &[Language]) -> Result<()> {
    let mut seen = BTreeMap::new();
    for lang in languages {
        if lang.code.trim().is_empty() {
            return Err(Error::Validation("language code must be nonempty".into()));
        }
        if seen.insert(lang.code.as_str(), ()).is_some() {
            return Err(Error::Validation(format!(
                "language code {} declared twice",
                lang.code
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BilingualCorpus {
    source_lang: Language,
    target_lang: Language,
    pairs: Vec<(String, String)>,
}

impl BilingualCorpus {
    pub fn new(
        source_lang: Language,
        target_lang: Language,
        pairs: Vec<(String, String)>,
    ) -> Result<Self> {
        check_language_set(&[source_lang.clone(), target_lang.clone()])?;
        for (index, (src, tgt)) in pairs.iter().enumerate() {
            if is_blank(src) {
                return Err(Error::EmptyText {
                    index,
                    field: "source",
                });
            }
            if is_blank(tgt) {
                return Err(Error::EmptyText {
                    index,
                    field: "target",
                });
            }
        }
        Ok(Self {
            source_lang,
            target_lang,
            pairs,
        })
    }

    pub fn source_lang(&self) -> &Language {
        &self.source_lang
    }

    pub fn target_lang(&self) -> &Language {
        &self.target_lang
    }

    pub fn pairs(&self) -> &[(String, String)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn example(&self, index: usize) -> TranslationExample {
        let (src, tgt) = &self.pairs[index];
        TranslationExample {
            source_lang: self.source_lang.code.clone(),
            target_lang: self.target_lang.code.clone(),
            source_text: src.clone(),
            target_text: tgt.clone(),
            sentence_id: None,
        }
    }

    /// Disjoint train/valid/test corpora; see [`split_indices`].
    pub fn split(&self, sizes: SplitSizes, seed: u64) -> Result<[BilingualCorpus; 3]> {
        let parts = split_indices(self.pairs.len(), sizes, seed)?;
        Ok(parts.map(|idx| BilingualCorpus {
            source_lang: self.source_lang.clone(),
            target_lang: self.target_lang.clone(),
            pairs: idx.iter().map(|&i| self.pairs[i].clone()).collect(),
        }))
    }
}

/// One sentence in every corpus language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SentenceRecord {
    pub id: u64,
    pub texts: BTreeMap<String, String>,
}

impl SentenceRecord {
    pub fn text(&self, code: &str) -> Result<&str> {
        self.texts
            .get(code)
            .map(String::as_str)
            .ok_or_else(|| Error::MissingText {
                sentence_id: self.id,
                language: code.into(),
            })
    }
}

/// Fully aligned corpus: every record carries one nonempty text per
/// declared language.
///
/// Loaded corpora have dense ids `0..n`. Corpora produced by [`split`]
/// keep the ids of the parent so sentence provenance survives the split.
///
/// [`split`]: MultiParallelCorpus::split
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiParallelCorpus {
    languages: Vec<Language>,
    records: Vec<SentenceRecord>,
}

impl MultiParallelCorpus {
    /// Builds a corpus from one column of sentences per language, in the
    /// order of `languages`.
    pub fn from_columns(languages: Vec<Language>, columns: Vec<Vec<String>>) -> Result<Self> {
        check_language_set(&languages)?;
        if columns.len() != languages.len() {
            return Err(Error::Validation(format!(
                "{} languages declared but {} text columns supplied",
                languages.len(),
                columns.len()
            )));
        }
        let expected = modal_length(&columns);
        for (lang, col) in languages.iter().zip(&columns) {
            if col.len() != expected {
                return Err(Error::Alignment {
                    language: lang.code.clone(),
                    expected,
                    actual: col.len(),
                });
            }
            if let Some(index) = col.iter().position(|t| is_blank(t)) {
                return Err(Error::Validation(format!(
                    "row {index}: empty text for language {}",
                    lang.code
                )));
            }
        }
        let mut columns: Vec<_> = columns.into_iter().map(Vec::into_iter).collect();
        let records = (0..expected)
            .map(|id| {
                let texts = languages
                    .iter()
                    .zip(columns.iter_mut())
                    .map(|(lang, col)| (lang.code.clone(), col.next().unwrap_or_default()))
                    .collect();
                SentenceRecord {
                    id: id as u64,
                    texts,
                }
            })
            .collect();
        Ok(Self { languages, records })
    }

    pub fn from_records(languages: Vec<Language>, records: Vec<SentenceRecord>) -> Result<Self> {
        check_language_set(&languages)?;
        for (pos, rec) in records.iter().enumerate() {
            if rec.id != pos as u64 {
                return Err(Error::Validation(format!(
                    "record at position {pos} has id {}, ids must be dense",
                    rec.id
                )));
            }
            if rec.texts.len() != languages.len() {
                return Err(Error::Validation(format!(
                    "record {} has {} texts for {} languages",
                    rec.id,
                    rec.texts.len(),
                    languages.len()
                )));
            }
            for lang in &languages {
                if is_blank(rec.text(&lang.code)?) {
                    return Err(Error::Validation(format!(
                        "row {pos}: empty text for language {}",
                        lang.code
                    )));
                }
            }
        }
        Ok(Self { languages, records })
    }

    pub fn languages(&self) -> &[Language] {
        &self.languages
    }

    pub fn language(&self, code: &str) -> Option<&Language> {
        self.languages.iter().find(|l| l.code == code)
    }

    pub fn records(&self) -> &[SentenceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Column of texts for one language, in record order.
    pub fn column(&self, code: &str) -> Result<Vec<&str>> {
        if self.language(code).is_none() {
            return Err(Error::UnknownLanguage(code.into()));
        }
        self.records.iter().map(|r| r.text(code)).collect()
    }

    pub fn split(&self, sizes: SplitSizes, seed: u64) -> Result<[MultiParallelCorpus; 3]> {
        let parts = split_indices(self.records.len(), sizes, seed)?;
        Ok(parts.map(|idx| MultiParallelCorpus {
            languages: self.languages.clone(),
            records: idx.iter().map(|&i| self.records[i].clone()).collect(),
        }))
    }
}

fn modal_length(columns: &[Vec<String>]) -> usize {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for c in columns {
        *counts.entry(c.len()).or_default() += 1;
    }
    // ties resolve toward the larger length
    counts
        .iter()
        .max_by_key(|(len, n)| (**n, **len))
        .map(|(len, _)| *len)
        .unwrap_or(0)
}

/// One translation unit before reformulation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationExample {
    pub source_lang: String,
    pub target_lang: String,
    pub source_text: String,
    pub target_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentence_id: Option<u64>,
}

impl TranslationExample {
    pub fn new(
        source_lang: impl Into<String>,
        target_lang: impl Into<String>,
        source_text: impl Into<String>,
        target_text: impl Into<String>,
    ) -> Result<Self> {
        let ex = Self {
            source_lang: source_lang.into(),
            target_lang: target_lang.into(),
            source_text: source_text.into(),
            target_text: target_text.into(),
            sentence_id: None,
        };
        ex.validate()?;
        Ok(ex)
    }

    pub fn from_record(rec: &SentenceRecord, src: &str, tgt: &str) -> Result<Self> {
        let ex = Self {
            source_lang: src.into(),
            target_lang: tgt.into(),
            source_text: rec.text(src)?.into(),
            target_text: rec.text(tgt)?.into(),
            sentence_id: Some(rec.id),
        };
        ex.validate()?;
        Ok(ex)
    }

    pub fn validate(&self) -> Result<()> {
        if self.source_lang == self.target_lang {
            return Err(Error::LanguageCollision(format!(
                "source and target are both {}",
                self.source_lang
            )));
        }
        if is_blank(&self.source_text) {
            return Err(Error::EmptyText {
                index: 0,
                field: "source",
            });
        }
        if is_blank(&self.target_text) {
            return Err(Error::EmptyText {
                index: 0,
                field: "target",
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSizes {
    pub train: usize,
    pub valid: usize,
    pub test: usize,
}

impl SplitSizes {
    pub fn new(train: usize, valid: usize, test: usize) -> Self {
        Self { train, valid, test }
    }
}

/// Seeded partition of `0..n` into three disjoint index sets of exactly the
/// requested sizes. Each set is returned in ascending order.
pub fn split_indices(n: usize, sizes: SplitSizes, seed: u64) -> Result<[Vec<usize>; 3]> {
    let requested = sizes
        .train
        .checked_add(sizes.valid)
        .and_then(|s| s.checked_add(sizes.test))
        .unwrap_or(usize::MAX);
    if requested > n {
        return Err(Error::SplitTooLarge {
            requested,
            available: n,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut substream(seed, domain::SPLIT, n as u64));
    let take = |from: usize, len: usize| {
        let mut v = order[from..from + len].to_vec();
        v.sort_unstable();
        v
    };
    let train = take(0, sizes.train);
    let valid = take(sizes.train, sizes.valid);
    let test = take(sizes.train + sizes.valid, sizes.test);
    Ok([train, valid, test])
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn langs(codes: &[&str]) -> Vec<Language> {
        codes.iter().map(|c| Language::new(*c)).collect()
    }

    fn columns(codes: &[&str], n: usize) -> Vec<Vec<String>> {
        codes
            .iter()
            .map(|c| (0..n).map(|i| format!("{c} sentence {i}")).collect())
            .collect()
    }

    #[test]
    fn bilingual_preserves_order() {
        let pairs = vec![
            ("ཀ".to_string(), "a".to_string()),
            ("ཁ".to_string(), "b".to_string()),
            ("ག".to_string(), "c".to_string()),
        ];
        let c = BilingualCorpus::new(Language::new("bod"), Language::new("eng"), pairs.clone())
            .unwrap();
        assert_eq!(c.pairs(), &pairs[..]);
    }

    #[test]
    fn bilingual_rejects_blank_target() {
        let pairs = vec![
            ("x".to_string(), "a".to_string()),
            ("y".to_string(), "  ".to_string()),
        ];
        let err =
            BilingualCorpus::new(Language::new("bod"), Language::new("eng"), pairs).unwrap_err();
        assert_eq!(
            err,
            Error::EmptyText {
                index: 1,
                field: "target"
            }
        );
    }

    #[test]
    fn multiparallel_from_columns() {
        let codes = ["a", "b", "c", "d"];
        let c = MultiParallelCorpus::from_columns(langs(&codes), columns(&codes, 10)).unwrap();
        assert_eq!(c.len(), 10);
        for (i, r) in c.records().iter().enumerate() {
            assert_eq!(r.id, i as u64);
            assert_eq!(r.texts.len(), 4);
        }
        assert_eq!(c.records()[3].text("c").unwrap(), "c sentence 3");
    }

    #[test]
    fn multiparallel_alignment_error_names_language() {
        let codes = ["a", "b", "c", "d"];
        let mut cols = columns(&codes, 10);
        cols[2].pop();
        let err = MultiParallelCorpus::from_columns(langs(&codes), cols).unwrap_err();
        assert_eq!(
            err,
            Error::Alignment {
                language: "c".into(),
                expected: 10,
                actual: 9
            }
        );
    }

    #[test]
    fn pretrain_metadata_passes_through() {
        let codes = ["a", "b", "c", "d"];
        let mut ls = langs(&codes);
        ls[0] = ls[0].clone().with_pretrain(true, 1000);
        ls[2] = ls[2].clone().with_pretrain(true, 5);
        let c = MultiParallelCorpus::from_columns(ls, columns(&codes, 3)).unwrap();
        let flagged: Vec<_> = c
            .languages()
            .iter()
            .filter(|l| l.in_pretrain)
            .map(|l| l.code.as_str())
            .collect();
        assert_eq!(flagged, ["a", "c"]);
        assert_eq!(c.language("a").unwrap().pretrain_size, 1000);
    }

    #[test]
    fn duplicate_codes_rejected() {
        let err = MultiParallelCorpus::from_columns(langs(&["a", "a"]), columns(&["a", "a"], 2))
            .unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn split_sizes_disjoint_and_deterministic() {
        let [tr, va, te] = split_indices(100, SplitSizes::new(80, 10, 10), 7).unwrap();
        assert_eq!((tr.len(), va.len(), te.len()), (80, 10, 10));
        let mut all: Vec<_> = tr.iter().chain(&va).chain(&te).copied().collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 100);
        assert_eq!(
            split_indices(100, SplitSizes::new(80, 10, 10), 7).unwrap(),
            [tr.clone(), va, te]
        );
        let [tr2, _, _] = split_indices(100, SplitSizes::new(80, 10, 10), 8).unwrap();
        assert_ne!(tr, tr2);
    }

    #[test]
    fn split_too_large() {
        let err = split_indices(100, SplitSizes::new(90, 10, 10), 7).unwrap_err();
        assert_eq!(
            err,
            Error::SplitTooLarge {
                requested: 110,
                available: 100
            }
        );
    }

    #[test]
    fn multiparallel_split_keeps_ids() {
        let codes = ["a", "b"];
        let c = MultiParallelCorpus::from_columns(langs(&codes), columns(&codes, 20)).unwrap();
        let [tr, va, te] = c.split(SplitSizes::new(10, 5, 5), 3).unwrap();
        let mut ids: Vec<u64> = tr
            .records()
            .iter()
            .chain(va.records())
            .chain(te.records())
            .map(|r| r.id)
            .collect();
        ids.sort_unstable();
        assert_eq!(ids, (0..20).collect::<Vec<_>>());
        for r in va.records() {
            assert_eq!(r.text("a").unwrap(), format!("a sentence {}", r.id));
        }
    }

    #[test]
    fn example_rejects_same_language() {
        assert!(TranslationExample::new("eng", "eng", "a", "b").is_err());
    }

    #[test]
    fn nfc_composes() {
        assert_eq!(nfc("e\u{301}"), "\u{e9}");
    }
}
