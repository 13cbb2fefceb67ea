//! Null reference bands and pointwise p-values.
//!
//! Two sources of null curves are supported: independent uniform
//! permutations generated here ([`h0_band`]), and curves computed from
//! replicate list sets that the caller produced on data without signal
//! ([`band_from_replicates`]).

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agreement::{resolve_depth, sra_of_lists, AgreementMetric};
use crate::censored::{sra_censored, MonteCarloConfig};
use crate::curve::{check_lengths, DepthCurve};
use crate::error::{Error, Result};
use crate::lists::{CensoredRankedList, ItemId, ListSet, RankList, RankedList};
use crate::rng::{derive_seed, substream, Domain, RandomSeed};
use crate::scalar::Scalar;

/// Two-sided 95% envelope plus the median.
pub const DEFAULT_QUANTILES: [f64; 3] = [0.025, 0.5, 0.975];
/// One-sided lower 95% envelope plus the median.
pub const LOWER_QUANTILES: [f64; 2] = [0.05, 0.5];
/// Random completions per null realization when the shape has censored lists.
pub const DEFAULT_FILL_PERMUTATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Hypothesis {
    /// Lists are independent uniformly random permutations.
    #[serde(rename = "H0-independent")]
    Independent,
    /// Curves were supplied from externally generated replicate list sets.
    #[serde(rename = "replicate-supplied")]
    ReplicateSupplied,
}

impl Hypothesis {
    pub fn as_str(self) -> &'static str {
        match self {
            Hypothesis::Independent => "H0-independent",
            Hypothesis::ReplicateSupplied => "replicate-supplied",
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Hypothesis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "H0-independent" => Ok(Hypothesis::Independent),
            "replicate-supplied" => Ok(Hypothesis::ReplicateSupplied),
            other => Err(format!("unknown hypothesis tag {other:?}")),
        }
    }
}

/// Pointwise empirical quantiles of `B` null curves.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceBand<S> {
    quantiles: Vec<f64>,
    /// One curve per quantile level, in the order of `quantiles`.
    values: Vec<Vec<S>>,
    permutations: usize,
    hypothesis: Hypothesis,
    reliable_depth: Option<usize>,
}

impl<S: Scalar> ReferenceBand<S> {
    pub fn new(quantiles: Vec<f64>, values: Vec<Vec<S>>, permutations: usize, hypothesis: Hypothesis) -> Result<Self> {
        check_quantiles(&quantiles)?;
        if values.len() != quantiles.len() {
            return Err(Error::LengthMismatch { expected: quantiles.len(), found: values.len() });
        }
        if permutations == 0 {
            return Err(Error::ZeroPermutations);
        }
        let depth = values[0].len();
        if depth == 0 {
            return Err(Error::EmptyCurve);
        }
        for row in &values {
            if row.len() != depth {
                return Err(Error::LengthMismatch { expected: depth, found: row.len() });
            }
            DepthCurve::new(row.clone())?;
        }
        for d in 0..depth {
            if values.windows(2).any(|w| w[0][d] > w[1][d]) {
                return Err(Error::NonMonotoneBand { depth: d + 1 });
            }
        }
        Ok(Self { quantiles, values, permutations, hypothesis, reliable_depth: None })
    }

    pub fn quantiles(&self) -> &[f64] {
        &self.quantiles
    }

    /// Band values at quantile index `i` for every depth.
    pub fn level(&self, i: usize) -> &[S] {
        &self.values[i]
    }

    pub fn levels(&self) -> &[Vec<S>] {
        &self.values
    }

    /// All quantile values at 1-based depth `d`.
    pub fn at(&self, depth: usize) -> Option<Vec<S>> {
        let idx = depth.checked_sub(1)?;
        self.values.iter().map(|row| row.get(idx).copied()).collect()
    }

    pub fn max_depth(&self) -> usize {
        self.values[0].len()
    }

    /// Number of null curves the band was computed from.
    pub fn permutations(&self) -> usize {
        self.permutations
    }

    pub fn hypothesis(&self) -> Hypothesis {
        self.hypothesis
    }

    /// Depths beyond this are extrapolated past every list's observed prefix.
    pub fn reliable_depth(&self) -> Option<usize> {
        self.reliable_depth
    }

    pub fn with_reliable_depth(mut self, depth: Option<usize>) -> Self {
        self.reliable_depth = depth;
        self
    }
}

/// Settings for independent-permutation null curves.
#[derive(Debug, Clone, PartialEq)]
pub struct NullConfig {
    pub permutations: usize,
    pub seed: RandomSeed,
    pub quantiles: Vec<f64>,
    /// Random completions per realization for censored shapes.
    pub fill_permutations: usize,
    pub max_depth: Option<usize>,
}

impl NullConfig {
    pub fn new(permutations: usize, seed: RandomSeed) -> Self {
        Self {
            permutations,
            seed,
            quantiles: DEFAULT_QUANTILES.to_vec(),
            fill_permutations: DEFAULT_FILL_PERMUTATIONS,
            max_depth: None,
        }
    }
}

fn check_quantiles(levels: &[f64]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::EmptyQuantiles);
    }
    for &q in levels {
        if !(q > 0.0 && q < 1.0) {
            return Err(Error::InvalidQuantile(q));
        }
    }
    if let Some(w) = levels.windows(2).find(|w| w[0] >= w[1]) {
        // levels must be strictly increasing
        return Err(Error::InvalidQuantile(w[1]));
    }
    Ok(())
}

/// Sort and deduplicate quantile levels, rejecting anything outside (0, 1).
pub fn normalize_quantiles(levels: &[f64]) -> Result<Vec<f64>> {
    let mut out = levels.to_vec();
    out.sort_by(f64::total_cmp);
    out.dedup();
    check_quantiles(&out)?;
    Ok(out)
}

/// Nearest-rank quantile of an ascending sample: the `⌈q·n⌉`-th smallest value.
pub fn nearest_rank<S: Copy>(sorted: &[S], level: f64) -> S {
    let n = sorted.len();
    // products like 0.975 * 400 land a hair above the integer
    let k = (level * n as f64 - 1e-9).ceil().clamp(1.0, n as f64) as usize;
    sorted[k - 1]
}

fn summarize<S: Scalar>(
    curves: &[DepthCurve<S>],
    quantiles: &[f64],
    hypothesis: Hypothesis,
) -> Result<ReferenceBand<S>> {
    let quantiles = normalize_quantiles(quantiles)?;
    let depth = check_lengths(curves)?;
    let mut values = vec![Vec::with_capacity(depth); quantiles.len()];
    let mut column = Vec::with_capacity(curves.len());
    for d in 0..depth {
        column.clear();
        column.extend(curves.iter().map(|c| c.values()[d]));
        column.sort_by(|a, b| a.partial_cmp(b).expect("curve values are finite"));
        for (row, &q) in values.iter_mut().zip(&quantiles) {
            row.push(nearest_rank(&column, q));
        }
    }
    ReferenceBand::new(quantiles, values, curves.len(), hypothesis)
}

fn random_order(size: usize, seed: RandomSeed, iteration: u64, list: u32) -> Vec<ItemId> {
    let mut order: Vec<ItemId> = (0..size as ItemId).collect();
    order.shuffle(&mut substream(seed, Domain::NullPermutation, iteration, list));
    order
}

/// One null realization shaped like `shape`: `L` independent uniform
/// permutations, each censored at the depth of the corresponding input list.
pub fn h0_realization(shape: &ListSet, seed: RandomSeed, iteration: u64) -> Result<ListSet> {
    let size = shape.universe_size();
    let lists = shape
        .lists()
        .iter()
        .enumerate()
        .map(|(idx, list)| {
            let order = random_order(size, seed, iteration, idx as u32);
            Ok(match list {
                RankList::Complete(_) => RankedList::new_unchecked(order).into(),
                RankList::Censored(c) => {
                    let mut prefix = order;
                    prefix.truncate(c.depth());
                    CensoredRankedList::new(prefix, size)?.into()
                }
            })
        })
        .collect::<Result<Vec<RankList>>>()?;
    ListSet::new(shape.universe().clone(), lists)
}

fn null_curve<S: Scalar>(
    shape: &ListSet,
    metric: AgreementMetric,
    config: &NullConfig,
    depth: usize,
    iteration: u64,
) -> Result<DepthCurve<S>> {
    if shape.has_censored() {
        let realization = h0_realization(shape, config.seed, iteration)?;
        let fill =
            MonteCarloConfig::new(config.fill_permutations, derive_seed(config.seed, Domain::FillOut, iteration))?;
        sra_censored(&realization, metric, &fill, Some(depth))
    } else {
        let size = shape.universe_size();
        let lists: Vec<RankedList> = (0..shape.len())
            .map(|l| RankedList::new_unchecked(random_order(size, config.seed, iteration, l as u32)))
            .collect();
        Ok(sra_of_lists(&lists, metric, depth))
    }
}

/// The `B` null SRA curves behind [`h0_band`], in iteration order.
pub fn h0_null_curves<S: Scalar>(
    shape: &ListSet,
    metric: AgreementMetric,
    config: &NullConfig,
) -> Result<Vec<DepthCurve<S>>> {
    if config.permutations == 0 {
        return Err(Error::ZeroPermutations);
    }
    let depth = resolve_depth(config.max_depth, shape.universe_size())?;
    (0..config.permutations).into_par_iter().map(|b| null_curve(shape, metric, config, depth, b as u64)).collect()
}

/// Pointwise quantile band of SRA under independent random permutations of
/// lists shaped like `shape` (same `P`, `L`, and censoring depths).
pub fn h0_band<S: Scalar>(shape: &ListSet, metric: AgreementMetric, config: &NullConfig) -> Result<ReferenceBand<S>> {
    normalize_quantiles(&config.quantiles)?;
    let curves = h0_null_curves(shape, metric, config)?;
    let reliable = shape.has_censored().then(|| shape.recommended_max_depth());
    Ok(summarize(&curves, &config.quantiles, Hypothesis::Independent)?.with_reliable_depth(reliable))
}

/// Pointwise quantile band of externally supplied replicate curves.
pub fn band_from_replicates<S: Scalar>(curves: &[DepthCurve<S>], quantiles: &[f64]) -> Result<ReferenceBand<S>> {
    summarize(curves, quantiles, Hypothesis::ReplicateSupplied)
}

/// `p(d) = (1 + #{b : null_b(d) ≤ observed(d)}) / (B + 1)`.
///
/// Small values mean the observed lists agree better than the null curves.
pub fn pointwise_pvalues<S: Scalar>(observed: &DepthCurve<S>, null_curves: &[DepthCurve<S>]) -> Result<DepthCurve<S>> {
    let depth = check_lengths(null_curves)?;
    if observed.max_depth() != depth {
        return Err(Error::LengthMismatch { expected: depth, found: observed.max_depth() });
    }
    let denom = S::from_count(null_curves.len() + 1);
    let values = observed
        .iter()
        .map(|(d, obs)| {
            let at_most = null_curves.iter().filter(|c| c.values()[d - 1] <= obs).count();
            S::from_count(at_most + 1) / denom
        })
        .collect();
    Ok(DepthCurve::new_unchecked(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{censor, example};

    fn curve(values: &[f64]) -> DepthCurve<f64> {
        DepthCurve::new(values.to_vec()).unwrap()
    }

    #[test]
    fn nearest_rank_rule() {
        let sorted: Vec<u32> = (1..=400).collect();
        assert_eq!(nearest_rank(&sorted, 0.025), 10);
        assert_eq!(nearest_rank(&sorted, 0.5), 200);
        assert_eq!(nearest_rank(&sorted, 0.975), 390);
        assert_eq!(nearest_rank(&[5], 0.01), 5);
        let nine: Vec<u32> = (1..=9).collect();
        assert_eq!(nearest_rank(&nine, 0.5), 5);
    }

    #[test]
    fn quantile_validation() {
        assert!(matches!(normalize_quantiles(&[]), Err(Error::EmptyQuantiles)));
        assert!(matches!(normalize_quantiles(&[0.0]), Err(Error::InvalidQuantile(_))));
        assert!(matches!(normalize_quantiles(&[0.5, 1.0]), Err(Error::InvalidQuantile(_))));
        assert_eq!(normalize_quantiles(&[0.9, 0.1, 0.9]).unwrap(), vec![0.1, 0.9]);
    }

    #[test]
    fn single_replicate_band_is_the_curve() {
        let c = curve(&[1.0, 2.5, 3.0]);
        let band = band_from_replicates(std::slice::from_ref(&c), &DEFAULT_QUANTILES).unwrap();
        for level in band.levels() {
            assert_eq!(level, c.values());
        }
        assert_eq!(band.hypothesis(), Hypothesis::ReplicateSupplied);
        assert_eq!(band.permutations(), 1);
    }

    #[test]
    fn constant_replicates_give_constant_band() {
        let reps = vec![curve(&[2.0, 2.0]); 25];
        let band = band_from_replicates(&reps, &[0.1, 0.5, 0.9]).unwrap();
        assert!(band.levels().iter().flatten().all(|&v| v == 2.0));
    }

    #[test]
    fn replicate_length_mismatch() {
        let reps = vec![curve(&[1.0, 2.0]), curve(&[1.0])];
        assert!(matches!(band_from_replicates(&reps, &DEFAULT_QUANTILES), Err(Error::LengthMismatch { .. })));
        assert!(matches!(band_from_replicates::<f64>(&[], &DEFAULT_QUANTILES), Err(Error::NoCurves)));
        assert!(matches!(band_from_replicates(&reps[..1], &[]), Err(Error::EmptyQuantiles)));
    }

    #[test]
    fn band_rejects_non_monotone_levels() {
        let res = ReferenceBand::new(vec![0.1, 0.9], vec![vec![2.0f64], vec![1.0]], 5, Hypothesis::Independent);
        assert!(matches!(res, Err(Error::NonMonotoneBand { depth: 1 })));
    }

    #[test]
    fn pvalue_counting() {
        let nulls: Vec<_> = (1..=9).map(|v| curve(&[v as f64, v as f64])).collect();
        let observed = curve(&[0.5, 5.0]);
        let p = pointwise_pvalues(&observed, &nulls).unwrap();
        assert_eq!(p.values(), &[0.1, 0.6]);
        let above = pointwise_pvalues(&curve(&[100.0, 100.0]), &nulls).unwrap();
        assert_eq!(above.values(), &[1.0, 1.0]);
        assert!(pointwise_pvalues(&curve(&[1.0]), &nulls).is_err());
    }

    #[test]
    fn h0_band_is_seed_deterministic_and_monotone() {
        let cfg = NullConfig::new(50, RandomSeed(12));
        let a: ReferenceBand<f64> = h0_band(&example(), AgreementMetric::Sd, &cfg).unwrap();
        let b: ReferenceBand<f64> = h0_band(&example(), AgreementMetric::Sd, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.max_depth(), 5);
        assert_eq!(a.reliable_depth(), None);
        for d in 1..=5 {
            let at = a.at(d).unwrap();
            assert!(at.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn identical_lists_sit_below_h0_band() {
        let order: Vec<u32> = (0..12).collect();
        let set = ListSet::from_orders(vec![order.clone(), order]).unwrap();
        let cfg = NullConfig::new(200, RandomSeed(3));
        let band: ReferenceBand<f64> = h0_band(&set, AgreementMetric::Sd, &cfg).unwrap();
        // two random lists share their top item with probability 1/12, so depth 1 can be 0
        assert!(band.level(0)[2..].iter().all(|&v| v > 0.0));
    }

    #[test]
    fn censored_shape_band_flags_depths() {
        let shape = censor(&example(), &[2, 2, 3]);
        let mut cfg = NullConfig::new(20, RandomSeed(6));
        cfg.fill_permutations = 5;
        let band: ReferenceBand<f64> = h0_band(&shape, AgreementMetric::Sd, &cfg).unwrap();
        assert_eq!(band.max_depth(), 5);
        assert_eq!(band.reliable_depth(), Some(3));
        let realization = h0_realization(&shape, RandomSeed(6), 0).unwrap();
        let depths: Vec<_> = realization.lists().iter().map(RankList::observed_depth).collect();
        assert_eq!(depths, vec![2, 2, 3]);
    }

    #[test]
    fn zero_permutations_rejected() {
        let cfg = NullConfig::new(0, RandomSeed(1));
        assert!(matches!(h0_band::<f64>(&example(), AgreementMetric::Sd, &cfg), Err(Error::ZeroPermutations)));
    }
}
