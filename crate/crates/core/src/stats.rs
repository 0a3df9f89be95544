//! Exact length statistics via histograms, so shards can be summarized
//! independently and merged.

use alloc::collections::BTreeMap;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthHistogram {
    counts: BTreeMap<usize, u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LengthSummary {
    pub n: u64,
    pub mean: f64,
    pub median: f64,
    pub min: usize,
    pub max: usize,
}

impl LengthHistogram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, len: usize) {
        *self.counts.entry(len).or_default() += 1;
    }

    pub fn merge(&mut self, other: &LengthHistogram) {
        for (&len, &c) in &other.counts {
            *self.counts.entry(len).or_default() += c;
        }
    }

    pub fn count(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Length at 0-based rank `r` in sorted order.
    fn order_stat(&self, r: u64) -> usize {
        let mut seen = 0;
        for (&len, &c) in &self.counts {
            seen += c;
            if r < seen {
                return len;
            }
        }
        unreachable!("rank {r} beyond histogram of {seen}")
    }

    pub fn mean(&self) -> Option<f64> {
        let n = self.count();
        if n == 0 {
            return None;
        }
        let sum: u128 = self
            .counts
            .iter()
            .map(|(&l, &c)| l as u128 * c as u128)
            .sum();
        Some(sum as f64 / n as f64)
    }

    /// Median; the mean of the two middle values for even counts.
    pub fn median(&self) -> Option<f64> {
        let n = self.count();
        if n == 0 {
            return None;
        }
        if n % 2 == 1 {
            Some(self.order_stat(n / 2) as f64)
        } else {
            let a = self.order_stat(n / 2 - 1) as f64;
            let b = self.order_stat(n / 2) as f64;
            Some((a + b) / 2.0)
        }
    }

    pub fn summary(&self) -> Option<LengthSummary> {
        Some(LengthSummary {
            n: self.count(),
            mean: self.mean()?,
            median: self.median()?,
            min: *self.counts.keys().next()?,
            max: *self.counts.keys().next_back()?,
        })
    }
}

impl FromIterator<usize> for LengthHistogram {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut h = Self::new();
        for l in iter {
            h.add(l);
        }
        h
    }
}
