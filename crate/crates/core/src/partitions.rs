//! Partitions of `M` modes into `K` molecules.
//!
//! A partition is kept as its ascending list of molecule sizes. Lists of
//! partitions are ordered by the ranking number `η = Σ m_j M^{K-j}`, which
//! for equal-length ascending lists with digits below `M` coincides with
//! lexicographic order.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Above this many partitions, [`random_partition`] falls back to random
/// compositions.
pub const UNIFORM_SAMPLING_LIMIT: u128 = 1_000_000;

/// Molecule sizes of a `K`-partition of `M ≤ N` modes of an `N`-mode parent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModePartition {
    parent_modes: usize,
    sizes: Vec<usize>,
}

impl ModePartition {
    /// Sorts `sizes` ascending and checks `K ≥ 2`, sizes `≥ 1`, `M ≤ N`.
    pub fn new(parent_modes: usize, mut sizes: Vec<usize>) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::domain(format!(
                "a multipartition needs at least 2 molecules, got {}",
                sizes.len()
            )));
        }
        if sizes.contains(&0) {
            return Err(Error::domain("molecule sizes must be >= 1"));
        }
        sizes.sort_unstable();
        let total: usize = sizes.iter().sum();
        if total > parent_modes {
            return Err(Error::domain(format!(
                "molecules hold {total} modes but the parent state has only {parent_modes}"
            )));
        }
        Ok(Self {
            parent_modes,
            sizes,
        })
    }

    pub fn parent_modes(&self) -> usize {
        self.parent_modes
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn blocks(&self) -> usize {
        self.sizes.len()
    }

    pub fn probe_size(&self) -> usize {
        self.sizes[0]
    }

    pub fn is_atomic(&self) -> bool {
        self.sizes.iter().all(|&m| m == 1)
    }

    /// Same partition with every size and the parent multiplied by `s`.
    pub fn scaled(&self, s: usize) -> Result<Self> {
        Self::new(
            self.parent_modes * s,
            self.sizes.iter().map(|m| m * s).collect(),
        )
    }
}

impl fmt::Display for ModePartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.sizes.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}} of {}", self.parent_modes)
    }
}

fn check_mk(m: usize, k: usize) -> Result<()> {
    if k < 1 || k > m {
        return Err(Error::domain(format!("need 1 <= K <= M, got M={m} K={k}")));
    }
    Ok(())
}

/// All ascending `k`-part partitions of `m`, sorted by ranking number.
pub fn sorted_partitions(m: usize, k: usize) -> Result<Vec<Vec<usize>>> {
    check_mk(m, k)?;
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    extend_partitions(m, k, 1, &mut cur, &mut out);
    Ok(out)
}

fn extend_partitions(
    remaining: usize,
    parts: usize,
    lo: usize,
    cur: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if parts == 1 {
        if remaining >= lo {
            cur.push(remaining);
            out.push(cur.clone());
            cur.pop();
        }
        return;
    }
    // the smallest remaining part can be at most remaining / parts
    for v in lo..=remaining / parts {
        cur.push(v);
        extend_partitions(remaining - v, parts - 1, v, cur, out);
        cur.pop();
    }
}

/// `η = Σ_j m_j M^{K-j}`.
pub fn ranking_number(sizes: &[usize], m: usize) -> Result<u128> {
    let base = m as u128;
    sizes.iter().try_fold(0u128, |acc, &digit| {
        acc.checked_mul(base)
            .and_then(|x| x.checked_add(digit as u128))
            .ok_or_else(|| Error::domain("ranking number overflows 128 bits"))
    })
}

/// Counts ascending partitions with a lower bound on the parts.
///
/// `count(k, s, lo)` is the number of ascending length-`k` lists with sum
/// `s` and every element `≥ lo`. Values saturate at `u128::MAX`.
struct PartitionCounter {
    m: usize,
    table: Vec<Option<u128>>,
}

impl PartitionCounter {
    fn new(m: usize, k: usize) -> Self {
        Self {
            m,
            table: vec![None; (k + 1) * (m + 1) * (m + 2)],
        }
    }

    fn count(&mut self, k: usize, s: usize, lo: usize) -> u128 {
        if k == 0 {
            return u128::from(s == 0);
        }
        if lo * k > s {
            return 0;
        }
        if k == 1 {
            return 1;
        }
        let idx = (k * (self.m + 1) + s) * (self.m + 2) + lo;
        if let Some(v) = self.table[idx] {
            return v;
        }
        let mut total = 0u128;
        for v in lo..=s / k {
            total = total.saturating_add(self.count(k - 1, s - v, v));
        }
        self.table[idx] = Some(total);
        total
    }
}

/// Number of partitions of `m` into exactly `k` positive parts.
pub fn partition_count(m: usize, k: usize) -> Result<u128> {
    check_mk(m, k)?;
    Ok(PartitionCounter::new(m, k).count(k, m, 1))
}

/// The `index`-th element (0-based) of `sorted_partitions(m, k)`, without
/// enumerating the list.
pub fn unrank_partition(m: usize, k: usize, index: u128) -> Result<Vec<usize>> {
    check_mk(m, k)?;
    let mut counter = PartitionCounter::new(m, k);
    if index >= counter.count(k, m, 1) {
        return Err(Error::domain(format!(
            "partition index {index} out of range"
        )));
    }
    let mut rest = index;
    let mut out = Vec::with_capacity(k);
    let (mut s, mut lo) = (m, 1);
    for parts in (1..=k).rev() {
        if parts == 1 {
            out.push(s);
            break;
        }
        let mut v = lo;
        loop {
            let block = counter.count(parts - 1, s - v, v);
            if rest < block {
                break;
            }
            rest -= block;
            v += 1;
        }
        out.push(v);
        s -= v;
        lo = v;
    }
    Ok(out)
}

/// How a random partition was drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SamplingMode {
    /// Uniform over distinct multisets (index sampling).
    Uniform,
    /// Sorted sizes of a uniform random composition; not uniform over multisets.
    Composition,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampledPartition {
    pub sizes: Vec<usize>,
    pub mode: SamplingMode,
}

/// Random ascending `k`-partition of `m`.
///
/// Uniform over the partitions when there are at most
/// [`UNIFORM_SAMPLING_LIMIT`] of them; otherwise `k - 1` distinct cut points
/// in `1..m` are drawn and the resulting composition is sorted.
pub fn random_partition<G: Rng + ?Sized>(
    m: usize,
    k: usize,
    rng: &mut G,
) -> Result<SampledPartition> {
    let count = partition_count(m, k)?;
    if count <= UNIFORM_SAMPLING_LIMIT {
        let index = rng.random_range(0..count);
        return Ok(SampledPartition {
            sizes: unrank_partition(m, k, index)?,
            mode: SamplingMode::Uniform,
        });
    }
    let mut cuts: Vec<usize> = rand::seq::index::sample(rng, m - 1, k - 1)
        .into_iter()
        .map(|c| c + 1)
        .collect();
    cuts.sort_unstable();
    let mut sizes = Vec::with_capacity(k);
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(m)) {
        sizes.push(c - prev);
        prev = c;
    }
    sizes.sort_unstable();
    Ok(SampledPartition {
        sizes,
        mode: SamplingMode::Composition,
    })
}
