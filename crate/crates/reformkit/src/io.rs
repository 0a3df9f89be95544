//! Corpus file formats and atomic output.
//!
//! * Bilingual TSV: two tab-separated columns, no header, LF endings.
//! * Bilingual JSONL: `{"source": ..., "target": ...}` per line.
//! * Multi-parallel: a directory with `manifest.json` (array of
//!   `{"code", "in_pretrain", "pretrain_size"}`) and one `{code}.txt` per
//!   language with one sentence per line. A single TSV file with one column
//!   per manifest language (manifest order) is accepted as well.
//!
//! All loaded text is NFC-normalized.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;
use reformkit_core::corpus::{nfc, BilingualCorpus, Language, MultiParallelCorpus};
use serde::Deserialize;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BilingualFormat {
    Tsv,
    Jsonl,
}

impl FromStr for BilingualFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tsv" => Ok(Self::Tsv),
            "jsonl" => Ok(Self::Jsonl),
            other => Err(Error::Usage(format!(
                "unknown corpus format {other:?} (expected tsv or jsonl)"
            ))),
        }
    }
}

impl BilingualFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("tsv") => Ok(Self::Tsv),
            Some("jsonl") => Ok(Self::Jsonl),
            _ => Err(Error::Usage(format!(
                "cannot infer corpus format from {}; pass --format",
                path.display()
            ))),
        }
    }
}

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Lines of an LF-terminated file; a final newline does not start a line.
pub fn split_lines(text: &str) -> Vec<&str> {
    if text.is_empty() {
        return Vec::new();
    }
    text.strip_suffix('\n')
        .unwrap_or(text)
        .split('\n')
        .collect()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PairRow {
    source: String,
    target: String,
}

pub fn load_bilingual(
    path: &Path,
    format: BilingualFormat,
    source_lang: Language,
    target_lang: Language,
) -> Result<BilingualCorpus> {
    let text = read_to_string(path)?;
    let mut pairs = Vec::new();
    let mut rejected = Vec::new();
    for (i, line) in split_lines(&text).into_iter().enumerate() {
        let lineno = i + 1;
        let row = match format {
            BilingualFormat::Tsv => {
                let fields: Vec<&str> = line.split('\t').collect();
                if fields.len() == 2 {
                    Ok((fields[0].to_string(), fields[1].to_string()))
                } else {
                    Err(format!(
                        "expected 2 tab-separated fields, found {}",
                        fields.len()
                    ))
                }
            }
            BilingualFormat::Jsonl => serde_json::from_str::<PairRow>(line)
                .map(|r| (r.source, r.target))
                .map_err(|e| e.to_string()),
        };
        match row {
            Ok((s, _)) if s.trim().is_empty() => rejected.push((lineno, "empty source".into())),
            Ok((_, t)) if t.trim().is_empty() => rejected.push((lineno, "empty target".into())),
            Ok((s, t)) => pairs.push((nfc(&s), nfc(&t))),
            Err(why) => rejected.push((lineno, why)),
        }
    }
    if !rejected.is_empty() {
        return Err(Error::Rows {
            path: path.to_path_buf(),
            rejected,
        });
    }
    Ok(BilingualCorpus::new(source_lang, target_lang, pairs)?)
}

fn check_single_line(text: &str, what: &str) -> Result<()> {
    if text.contains('\n') {
        return Err(Error::Usage(format!(
            "{what} contains a newline and cannot be written line-based"
        )));
    }
    Ok(())
}

pub fn write_bilingual(
    path: &Path,
    corpus: &BilingualCorpus,
    format: BilingualFormat,
) -> Result<()> {
    let mut out = String::new();
    for (s, t) in corpus.pairs() {
        check_single_line(s, "source text")?;
        check_single_line(t, "target text")?;
        match format {
            BilingualFormat::Tsv => {
                if s.contains('\t') || t.contains('\t') {
                    return Err(Error::Usage("text contains a tab; use jsonl".into()));
                }
                out.push_str(s);
                out.push('\t');
                out.push_str(t);
            }
            BilingualFormat::Jsonl => {
                let row = serde_json::json!({ "source": s, "target": t });
                out.push_str(&row.to_string());
            }
        }
        out.push('\n');
    }
    write_atomic(path, out.as_bytes())
}

pub fn read_languages(path: &Path) -> Result<Vec<Language>> {
    let text = read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::json(path.display().to_string(), e))
}

pub fn write_languages(path: &Path, langs: &[Language]) -> Result<()> {
    let json = serde_json::to_string_pretty(langs).map_err(|e| Error::json("manifest", e))?;
    write_atomic(path, format!("{json}\n").as_bytes())
}

pub const MANIFEST_FILE: &str = "manifest.json";

/// Loads a multi-parallel corpus from a directory (manifest + one file per
/// language, read in parallel) or from a single column-per-language TSV.
pub fn load_multiparallel(path: &Path, manifest: Option<&Path>) -> Result<MultiParallelCorpus> {
    let manifest_path = match manifest {
        Some(m) => m.to_path_buf(),
        None if path.is_dir() => path.join(MANIFEST_FILE),
        None => {
            return Err(Error::Usage(
                "a single-file multi-parallel corpus needs --manifest".into(),
            ))
        }
    };
    let langs = read_languages(&manifest_path)?;
    let columns: Vec<Vec<String>> = if path.is_dir() {
        langs
            .par_iter()
            .map(|l| {
                let file = path.join(format!("{}.txt", l.code));
                let text = read_to_string(&file)?;
                column_from_lines(&file, &text)
            })
            .collect::<Result<_>>()?
    } else {
        let text = read_to_string(path)?;
        let mut cols = vec![Vec::new(); langs.len()];
        let mut rejected = Vec::new();
        for (i, line) in split_lines(&text).into_iter().enumerate() {
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != langs.len() {
                rejected.push((
                    i + 1,
                    format!("expected {} fields, found {}", langs.len(), fields.len()),
                ));
                continue;
            }
            for (c, f) in cols.iter_mut().zip(fields) {
                c.push(nfc(f));
            }
        }
        if !rejected.is_empty() {
            return Err(Error::Rows {
                path: path.to_path_buf(),
                rejected,
            });
        }
        cols
    };
    Ok(MultiParallelCorpus::from_columns(langs, columns)?)
}

fn column_from_lines(file: &Path, text: &str) -> Result<Vec<String>> {
    let lines = split_lines(text);
    let rejected: Vec<(usize, String)> = lines
        .iter()
        .enumerate()
        .filter(|(_, l)| l.trim().is_empty())
        .map(|(i, _)| (i + 1, "empty sentence".to_string()))
        .collect();
    if !rejected.is_empty() {
        return Err(Error::Rows {
            path: file.to_path_buf(),
            rejected,
        });
    }
    Ok(lines.into_iter().map(nfc).collect())
}

pub fn write_multiparallel(dir: &Path, corpus: &MultiParallelCorpus) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for lang in corpus.languages() {
        let mut out = String::new();
        for t in corpus.column(&lang.code)? {
            check_single_line(t, "sentence")?;
            out.push_str(t);
            out.push('\n');
        }
        write_atomic(&dir.join(format!("{}.txt", lang.code)), out.as_bytes())?;
    }
    write_languages(&dir.join(MANIFEST_FILE), corpus.languages())
}

/// Sidecar of precomputed token counts, one integer per line.
pub fn read_counts(path: &Path) -> Result<Vec<usize>> {
    let text = read_to_string(path)?;
    let mut counts = Vec::new();
    let mut rejected = Vec::new();
    for (i, line) in split_lines(&text).into_iter().enumerate() {
        match line.trim().parse::<usize>() {
            Ok(c) => counts.push(c),
            Err(e) => rejected.push((i + 1, e.to_string())),
        }
    }
    if !rejected.is_empty() {
        return Err(Error::Rows {
            path: path.to_path_buf(),
            rejected,
        });
    }
    Ok(counts)
}

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(format!(".tmp-{}", std::process::id()));
    path.with_file_name(name)
}

/// Writes through a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut w = AtomicFile::create(path)?;
    w.write_all(bytes).map_err(|e| Error::io(path, e))?;
    w.commit()
}

/// A file that only appears under its final name once `commit` succeeds.
pub struct AtomicFile {
    path: PathBuf,
    tmp: PathBuf,
    file: Option<std::io::BufWriter<fs::File>>,
}

impl AtomicFile {
    pub fn create(path: &Path) -> Result<Self> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let tmp = temp_path(path);
        let file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            tmp,
            file: Some(std::io::BufWriter::new(file)),
        })
    }

    pub fn commit(mut self) -> Result<()> {
        let file = self.file.take().expect("commit once");
        let file = file
            .into_inner()
            .map_err(|e| Error::io(&self.tmp, e.into_error()))?;
        file.sync_all().map_err(|e| Error::io(&self.tmp, e))?;
        drop(file);
        fs::rename(&self.tmp, &self.path).map_err(|e| Error::io(&self.path, e))
    }
}

impl Write for AtomicFile {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        self.file.as_mut().expect("not committed").write(buf)
    }

    fn flush(&mut self) -> std::io::Result<()> {
        self.file.as_mut().expect("not committed").flush()
    }
}

impl Drop for AtomicFile {
    fn drop(&mut self) {
        if self.file.is_some() {
            let _ = fs::remove_file(&self.tmp);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn langs() -> (Language, Language) {
        (Language::new("bod_Tibt"), Language::new("eng_Latn"))
    }

    #[test]
    fn tsv_three_rows_in_order() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.tsv");
        fs::write(&p, "ཀ\ta\nཁ\tb\nག\tc\n").unwrap();
        let (s, t) = langs();
        let c = load_bilingual(&p, BilingualFormat::Tsv, s, t).unwrap();
        let targets: Vec<&str> = c.pairs().iter().map(|(_, t)| t.as_str()).collect();
        assert_eq!(targets, ["a", "b", "c"]);
    }

    #[test]
    fn tsv_empty_target_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.tsv");
        fs::write(&p, "ཀ\ta\nཁ\t\nག\tc\n").unwrap();
        let (s, t) = langs();
        match load_bilingual(&p, BilingualFormat::Tsv, s, t) {
            Err(Error::Rows { rejected, .. }) => {
                assert_eq!(rejected, vec![(2, "empty target".to_string())]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn jsonl_count_matches_line_count() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.jsonl");
        let body: String = (0..100)
            .map(|i| format!("{{\"source\":\"s{i}\",\"target\":\"t{i}\"}}\n"))
            .collect();
        fs::write(&p, &body).unwrap();
        // independent line counter
        let newlines = fs::read(&p)
            .unwrap()
            .iter()
            .filter(|b| **b == b'\n')
            .count();
        let (s, t) = langs();
        let c = load_bilingual(&p, BilingualFormat::Jsonl, s, t).unwrap();
        assert_eq!(c.len(), newlines);
    }

    #[test]
    fn jsonl_rejects_missing_field() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.jsonl");
        fs::write(&p, "{\"source\":\"a\"}\n").unwrap();
        let (s, t) = langs();
        assert!(matches!(
            load_bilingual(&p, BilingualFormat::Jsonl, s, t),
            Err(Error::Rows { .. })
        ));
    }

    #[test]
    fn unknown_format_is_usage_error() {
        let e = "csv".parse::<BilingualFormat>().unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn multiparallel_alignment_error() {
        let dir = tempfile::tempdir().unwrap();
        let ls: Vec<Language> = ["a", "b", "c", "d"]
            .iter()
            .map(|c| Language::new(*c))
            .collect();
        write_languages(&dir.path().join(MANIFEST_FILE), &ls).unwrap();
        for l in &ls {
            let n = if l.code == "c" { 9 } else { 10 };
            let body: String = (0..n).map(|i| format!("{} {i}\n", l.code)).collect();
            fs::write(dir.path().join(format!("{}.txt", l.code)), body).unwrap();
        }
        match load_multiparallel(dir.path(), None) {
            Err(Error::Core(reformkit_core::Error::Alignment {
                language,
                expected,
                actual,
            })) => assert_eq!((language.as_str(), expected, actual), ("c", 10, 9)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn single_file_multiparallel() {
        let dir = tempfile::tempdir().unwrap();
        let m = dir.path().join("langs.json");
        write_languages(&m, &[Language::new("x"), Language::new("y")]).unwrap();
        let p = dir.path().join("c.tsv");
        fs::write(&p, "a\tb\nc\td\n").unwrap();
        let c = load_multiparallel(&p, Some(&m)).unwrap();
        assert_eq!(c.column("y").unwrap(), ["b", "d"]);
        assert!(load_multiparallel(&p, None).is_err());
    }

    #[test]
    fn sidecar_counts() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("n.txt");
        fs::write(&p, "3\n10\n7\n").unwrap();
        assert_eq!(read_counts(&p).unwrap(), [3, 10, 7]);
        fs::write(&p, "3\nx\n").unwrap();
        assert!(read_counts(&p).is_err());
    }

    #[test]
    fn atomic_file_leaves_nothing_on_drop() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("out.txt");
        {
            let mut f = AtomicFile::create(&p).unwrap();
            f.write_all(b"partial").unwrap();
        }
        assert!(!p.exists());
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
        write_atomic(&p, b"done").unwrap();
        assert_eq!(fs::read_to_string(&p).unwrap(), "done");
    }
}
