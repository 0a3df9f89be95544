//! In/out-pretrain breakdowns and pretraining-size correlation.
//!
//! All cells are unweighted means over directions. The four in/out cells
//! partition the directions; the English cells overlap them.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

use crate::corpus::Language;
use crate::metrics::{average_directions, DirectionScore};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Cell {
    /// `None` when no direction falls in the cell.
    pub mean: Option<f64>,
    pub n: u64,
}

impl Cell {
    fn from_values(values: &[f64]) -> Self {
        Cell {
            mean: (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64),
            n: values.len() as u64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownReport {
    pub in_in: Cell,
    /// Source outside pretraining, target inside.
    pub out_in: Cell,
    pub in_out: Cell,
    pub out_out: Cell,
    pub to_eng: Cell,
    pub from_eng: Cell,
    pub avg: Cell,
    pub english: String,
}

fn lookup<'a>(langs: &'a BTreeMap<&str, &Language>, code: &str) -> Result<&'a Language> {
    langs
        .get(code)
        .copied()
        .ok_or_else(|| Error::UnknownLanguage(code.into()))
}

pub fn breakdown(
    scores: &[DirectionScore],
    langs: &[Language],
    english: &str,
) -> Result<BreakdownReport> {
    let by_code: BTreeMap<&str, &Language> = langs.iter().map(|l| (l.code.as_str(), l)).collect();
    let avg = average_directions(scores)?;
    let mut cells: [Vec<f64>; 6] = Default::default();
    for s in scores {
        let src = lookup(&by_code, &s.src)?;
        let tgt = lookup(&by_code, &s.tgt)?;
        let quadrant = match (src.in_pretrain, tgt.in_pretrain) {
            (true, true) => 0,
            (false, true) => 1,
            (true, false) => 2,
            (false, false) => 3,
        };
        cells[quadrant].push(s.value);
        if s.tgt == english {
            cells[4].push(s.value);
        }
        if s.src == english {
            cells[5].push(s.value);
        }
    }
    let [in_in, out_in, in_out, out_out, to_eng, from_eng] = cells.map(|v| Cell::from_values(&v));
    Ok(BreakdownReport {
        in_in,
        out_in,
        in_out,
        out_out,
        to_eng,
        from_eng,
        avg: Cell {
            mean: Some(avg),
            n: scores.len() as u64,
        },
        english: english.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScatterMode {
    /// Average over directions whose source is the language.
    FromLang,
    /// Average over directions whose target is the language.
    IntoLang,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterRow {
    pub language: String,
    pub pretrain_size: u64,
    pub mean_score: f64,
    pub n_directions: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterReport {
    pub mode: ScatterMode,
    pub rows: Vec<ScatterRow>,
    /// Languages left out for unknown (zero) or missing pretraining size.
    pub excluded: Vec<String>,
    pub spearman: f64,
    /// True when the correlation is undefined (fewer than two rows or a
    /// constant column) and reported as 0.
    pub degenerate: bool,
}

pub fn pretrain_scatter(
    scores: &[DirectionScore],
    langs: &[Language],
    mode: ScatterMode,
) -> ScatterReport {
    let mut per_lang: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for s in scores {
        let key = match mode {
            ScatterMode::FromLang => s.src.as_str(),
            ScatterMode::IntoLang => s.tgt.as_str(),
        };
        per_lang.entry(key).or_default().push(s.value);
    }
    let by_code: BTreeMap<&str, &Language> = langs.iter().map(|l| (l.code.as_str(), l)).collect();
    let mut rows = Vec::new();
    let mut excluded = Vec::new();
    for (code, values) in per_lang {
        match by_code.get(code) {
            Some(l) if l.pretrain_size > 0 => rows.push(ScatterRow {
                language: code.into(),
                pretrain_size: l.pretrain_size,
                mean_score: values.iter().sum::<f64>() / values.len() as f64,
                n_directions: values.len() as u64,
            }),
            _ => excluded.push(String::from(code)),
        }
    }
    let sizes: Vec<f64> = rows.iter().map(|r| r.pretrain_size as f64).collect();
    let means: Vec<f64> = rows.iter().map(|r| r.mean_score).collect();
    let (spearman, degenerate) = match spearman(&sizes, &means) {
        Some(rho) => (rho, false),
        None => (0.0, true),
    };
    ScatterReport {
        mode,
        rows,
        excluded,
        spearman,
        degenerate,
    }
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = alloc::vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation (Pearson on average ranks). `None` when
/// undefined.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}
