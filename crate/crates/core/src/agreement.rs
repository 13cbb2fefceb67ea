//! Per-item agreement and sequential rank agreement for complete lists.
//!
//! For an item ranked `r_1..r_L` across `L` lists, the standard-deviation
//! agreement is the sample SD of those ranks. The sequential rank agreement
//! at depth `d` pools these per-item variances over every item that appears
//! in the top `d` of at least one list.
//!
//! All rank arithmetic is done in exact integers: with `s = Σ r_i` and
//! `q = Σ r_i²`, the item's sample variance is `(L·q − s²) / (L·(L−1))`, so
//! the pooled variance over a set `S` is a single integer ratio
//! `Σ_S (L·q − s²) / (L·(L−1)·|S|)`. The scalar type only sees that ratio.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::curve::DepthCurve;
use crate::error::{Error, Result};
use crate::lists::{ItemId, ListSet, RankedList};
use crate::scalar::Scalar;

/// Spread measure applied to the ranks a single item receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgreementMetric {
    /// Sample standard deviation, pooled as a pooled variance.
    #[default]
    Sd,
    /// Median absolute deviation from the median (unscaled), pooled by
    /// root-mean-square over the cumulative item set.
    Mad,
}

impl AgreementMetric {
    pub fn as_str(self) -> &'static str {
        match self {
            AgreementMetric::Sd => "sd",
            AgreementMetric::Mad => "mad",
        }
    }
}

impl fmt::Display for AgreementMetric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AgreementMetric {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "sd" | "standard-deviation" => Ok(AgreementMetric::Sd),
            "mad" | "median-absolute-deviation" => Ok(AgreementMetric::Mad),
            other => Err(format!("unknown agreement metric {other:?} (expected sd or mad)")),
        }
    }
}

/// `L·Σr² − (Σr)²`, i.e. `L·(L−1)` times the sample variance.
fn scaled_variance(sum: u64, sum_sq: u64, lists: u64) -> u128 {
    let sum = sum as u128;
    lists as u128 * sum_sq as u128 - sum * sum
}

/// Four times the median absolute deviation of `ranks`. Sorts `ranks` in place.
///
/// Medians of integers are half-integers, so doubling the ranks keeps every
/// intermediate value integral and the final MAD is a multiple of 1/4.
fn mad_quarters(ranks: &mut [u32], devs: &mut Vec<u64>) -> u64 {
    ranks.sort_unstable();
    let n = ranks.len();
    let mid = n / 2;
    let median2 = if n % 2 == 1 { 2 * ranks[mid] as u64 } else { ranks[mid - 1] as u64 + ranks[mid] as u64 };
    devs.clear();
    devs.extend(ranks.iter().map(|&r| (2 * r as u64).abs_diff(median2)));
    devs.sort_unstable();
    if n % 2 == 1 {
        2 * devs[mid]
    } else {
        devs[mid - 1] + devs[mid]
    }
}

/// Agreement of the `L` ranks one item received.
///
/// Ranks are 1-based. For [`AgreementMetric::Sd`] this is
/// `sqrt(Σ (r_i − r̄)² / (L − 1))`; for [`AgreementMetric::Mad`] it is
/// `median(|r_i − median(r)|)`.
pub fn item_agreement<S: Scalar>(ranks: &[u32], metric: AgreementMetric) -> Result<S> {
    if ranks.len() < 2 {
        return Err(Error::TooFewRanks(ranks.len()));
    }
    if let Some(&bad) = ranks.iter().find(|&&r| r == 0) {
        return Err(Error::RankOutOfRange { rank: bad, size: 0 });
    }
    let n = ranks.len() as u64;
    match metric {
        AgreementMetric::Sd => {
            let sum = ranks.iter().map(|&r| r as u64).sum();
            let sum_sq = ranks.iter().map(|&r| r as u64 * r as u64).sum();
            Ok(S::ratio(scaled_variance(sum, sum_sq, n), (n * (n - 1)) as u128).sqrt())
        }
        AgreementMetric::Mad => {
            let mut sorted = ranks.to_vec();
            let quarters = mad_quarters(&mut sorted, &mut Vec::with_capacity(ranks.len()));
            Ok(S::ratio(quarters as u128, 4))
        }
    }
}

/// `S_d`: the items ranked within the top `d` of any list, in increasing id order.
pub fn cumulative_item_set(lists: &ListSet, depth: usize) -> Result<Vec<ItemId>> {
    let complete = lists.complete_orders("cumulative_item_set")?;
    let size = lists.universe_size();
    if depth == 0 || depth > size {
        return Err(Error::DepthOutOfRange { depth, max: size });
    }
    let mut member = vec![false; size];
    for list in complete {
        for &item in &list[..depth] {
            member[item as usize] = true;
        }
    }
    Ok((0..size as ItemId).filter(|&i| member[i as usize]).collect())
}

pub(crate) fn resolve_depth(max_depth: Option<usize>, size: usize) -> Result<usize> {
    match max_depth {
        None => Ok(size),
        Some(d) if d >= 1 && d <= size => Ok(d),
        Some(d) => Err(Error::DepthOutOfRange { depth: d, max: size }),
    }
}

/// Sequential rank agreement of complete lists for depths `1..=max_depth`
/// (default: the universe size).
pub fn sra_complete<S: Scalar>(
    lists: &ListSet,
    metric: AgreementMetric,
    max_depth: Option<usize>,
) -> Result<DepthCurve<S>> {
    let orders = lists.complete_orders("sra_complete")?;
    let depth = resolve_depth(max_depth, lists.universe_size())?;
    Ok(sra_of_orders(&orders, lists.universe_size(), metric, depth))
}

pub(crate) fn sra_of_lists<S: Scalar>(lists: &[RankedList], metric: AgreementMetric, depth: usize) -> DepthCurve<S> {
    let orders: Vec<&[ItemId]> = lists.iter().map(|l| l.order()).collect();
    sra_of_orders(&orders, lists[0].len(), metric, depth)
}

/// Core incremental kernel. `orders` must be validated permutations of `0..size`.
///
/// Per-item scaled dispersions are computed once in `O(L·P)`; the cumulative
/// set then grows by scanning each list's next entry per depth, so the whole
/// curve costs `O(L·P)` as well.
pub(crate) fn sra_of_orders<S: Scalar>(
    orders: &[&[ItemId]],
    size: usize,
    metric: AgreementMetric,
    depth: usize,
) -> DepthCurve<S> {
    let n_lists = orders.len();
    let (item_terms, denom_per_item) = match metric {
        AgreementMetric::Sd => {
            let mut sum = vec![0u64; size];
            let mut sum_sq = vec![0u64; size];
            for order in orders {
                for (pos, &item) in order.iter().enumerate() {
                    let rank = pos as u64 + 1;
                    sum[item as usize] += rank;
                    sum_sq[item as usize] += rank * rank;
                }
            }
            let terms: Vec<u128> =
                sum.iter().zip(&sum_sq).map(|(&s, &q)| scaled_variance(s, q, n_lists as u64)).collect();
            (terms, (n_lists * (n_lists - 1)) as u128)
        }
        AgreementMetric::Mad => {
            // item-major rank matrix
            let mut ranks = vec![0u32; size * n_lists];
            for (l, order) in orders.iter().enumerate() {
                for (pos, &item) in order.iter().enumerate() {
                    ranks[item as usize * n_lists + l] = pos as u32 + 1;
                }
            }
            let mut devs = Vec::with_capacity(n_lists);
            let terms: Vec<u128> = ranks
                .chunks_mut(n_lists)
                .map(|item_ranks| {
                    let q = mad_quarters(item_ranks, &mut devs) as u128;
                    q * q
                })
                .collect();
            (terms, 16)
        }
    };

    let mut seen = vec![false; size];
    let mut total: u128 = 0;
    let mut count: u128 = 0;
    let mut values = Vec::with_capacity(depth);
    for pos in 0..depth {
        for order in orders {
            let item = order[pos] as usize;
            if !seen[item] {
                seen[item] = true;
                total += item_terms[item];
                count += 1;
            }
        }
        values.push(S::ratio(total, denom_per_item * count).sqrt());
    }
    DepthCurve::new_unchecked(values)
}
