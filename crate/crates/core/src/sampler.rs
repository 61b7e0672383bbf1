//! Answer-count outlier removal and per-category subsampling.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::corpus::Thread;
use crate::error::Error;
use crate::util::rng_for;

/// Tukey fences at 1.5 IQR beyond the hinges.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fences {
    pub q1: f64,
    pub q3: f64,
    pub iqr: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Fences {
    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

/// Computes Tukey's hinges and the fences derived from them.
///
/// The hinges are the medians of the lower and upper halves of the sorted
/// data; for odd `n` both halves include the overall median.
pub fn tukey_fences(values: &[f64]) -> Result<Fences, Error> {
    if values.is_empty() {
        return Err(Error::Empty("tukey_fences requires at least one value"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("tukey_fences got a non-finite value".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let half = n.div_ceil(2);
    let q1 = median_sorted(&sorted[..half]);
    let q3 = median_sorted(&sorted[n - half..]);
    let iqr = q3 - q1;
    Ok(Fences {
        q1,
        q3,
        iqr,
        lower: q1 - 1.5 * iqr,
        upper: q3 + 1.5 * iqr,
    })
}

/// Fences over the answer counts of all threads (pooled across categories).
pub fn answer_count_fences(threads: &[Thread]) -> Result<Fences, Error> {
    let counts: Vec<f64> = threads.iter().map(|t| t.answers.len() as f64).collect();
    tukey_fences(&counts)
}

/// Keeps threads whose answer count lies within the pooled fences.
pub fn filter_by_answer_count(threads: Vec<Thread>) -> Vec<Thread> {
    match answer_count_fences(&threads) {
        Ok(fences) => threads
            .into_iter()
            .filter(|t| fences.contains(t.answers.len() as f64))
            .collect(),
        Err(_) => threads,
    }
}

/// Draws `min(k, available)` threads per category without replacement.
///
/// The draw for each category uses an RNG derived from `(seed, category)`
/// over the category's threads in input order; the output keeps input order.
pub fn subsample_per_category(threads: &[Thread], k: usize, seed: u64) -> Result<Vec<Thread>, Error> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    let mut by_category: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, t) in threads.iter().enumerate() {
        by_category.entry(t.category.as_str()).or_default().push(i);
    }
    let mut chosen = BTreeSet::new();
    for (category, members) in by_category {
        if members.len() <= k {
            chosen.extend(members);
            continue;
        }
        let mut rng = rng_for(seed, category);
        chosen.extend(index::sample(&mut rng, members.len(), k).into_iter().map(|j| members[j]));
    }
    Ok(chosen.into_iter().map(|i| threads[i].clone()).collect())
}
