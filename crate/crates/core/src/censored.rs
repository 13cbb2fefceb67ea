//! Sequential rank agreement for censored lists by repeated random completion.
//!
//! Each censored list only observes its top `d_l` ranks. A realization fills
//! the remaining ranks `d_l+1..=P` with a uniformly random order of the
//! unobserved items; the reported curve is the pointwise mean of the SRA
//! curves of `B` independent realizations.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::agreement::{resolve_depth, sra_of_lists, AgreementMetric};
use crate::curve::DepthCurve;
use crate::error::{Error, Result};
use crate::lists::{CensoredRankedList, ListSet, RankList, RankedList};
use crate::rng::{substream, Domain, RandomSeed};
use crate::scalar::Scalar;

pub const DEFAULT_PERMUTATIONS: usize = 1000;

/// Realizations are evaluated in chunks of this many; each chunk is reduced
/// into the running sum in iteration order before the next one starts.
const CHUNK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarloConfig {
    pub permutations: usize,
    pub seed: RandomSeed,
}

impl MonteCarloConfig {
    pub fn new(permutations: usize, seed: RandomSeed) -> Result<Self> {
        if permutations == 0 {
            return Err(Error::ZeroPermutations);
        }
        Ok(Self { permutations, seed })
    }
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self { permutations: DEFAULT_PERMUTATIONS, seed: RandomSeed::from_entropy() }
    }
}

/// Complete `list` by placing its unobserved items on ranks `d_l+1..=P` in
/// uniformly random order.
pub fn fill_out<R: Rng + ?Sized>(list: &CensoredRankedList, rng: &mut R) -> RankedList {
    let mut tail = list.unobserved();
    tail.shuffle(rng);
    let mut order = Vec::with_capacity(list.universe_size());
    order.extend_from_slice(list.prefix());
    order.extend_from_slice(&tail);
    RankedList::new_unchecked(order)
}

/// One realization: every censored list filled out from its own substream.
pub(crate) fn realize(lists: &ListSet, seed: RandomSeed, iteration: u64) -> Vec<RankedList> {
    lists
        .lists()
        .iter()
        .enumerate()
        .map(|(idx, list)| match list {
            RankList::Complete(list) => list.clone(),
            RankList::Censored(list) => {
                let mut rng = substream(seed, Domain::FillOut, iteration, idx as u32);
                fill_out(list, &mut rng)
            }
        })
        .collect()
}

/// Sequential rank agreement of a list set with censored lists.
///
/// Deterministic in `(lists, metric, config)` and independent of the number
/// of worker threads. With no censored lists every realization is identical
/// and the result equals [`crate::sra_complete`].
pub fn sra_censored<S: Scalar>(
    lists: &ListSet,
    metric: AgreementMetric,
    config: &MonteCarloConfig,
    max_depth: Option<usize>,
) -> Result<DepthCurve<S>> {
    if config.permutations == 0 {
        return Err(Error::ZeroPermutations);
    }
    let depth = resolve_depth(max_depth, lists.universe_size())?;
    if !lists.has_censored() {
        return crate::agreement::sra_complete(lists, metric, Some(depth));
    }
    let mut sum = vec![S::zero(); depth];
    let mut start = 0;
    while start < config.permutations {
        let end = (start + CHUNK).min(config.permutations);
        let curves: Vec<DepthCurve<S>> = (start..end)
            .into_par_iter()
            .map(|b| sra_of_lists(&realize(lists, config.seed, b as u64), metric, depth))
            .collect();
        for curve in &curves {
            for (acc, v) in sum.iter_mut().zip(curve.values()) {
                *acc = *acc + *v;
            }
        }
        start = end;
    }
    let n = S::from_count(config.permutations);
    Ok(DepthCurve::new_unchecked(sum.into_iter().map(|s| s / n).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{censor, example};
    use crate::lists::ItemUniverse;
    use crate::sra_complete;
    use std::collections::HashMap;

    #[test]
    fn fill_out_preserves_prefix_and_covers_universe() {
        let list = CensoredRankedList::new(vec![4, 1], 6).unwrap();
        for it in 0..50 {
            let mut rng = substream(RandomSeed(3), Domain::FillOut, it, 0);
            let full = fill_out(&list, &mut rng);
            assert_eq!(&full.order()[..2], &[4, 1]);
            let mut sorted = full.order().to_vec();
            sorted.sort_unstable();
            assert_eq!(sorted, (0..6).collect::<Vec<_>>());
        }
    }

    #[test]
    fn fill_out_of_full_prefix_is_identity() {
        let list = CensoredRankedList::new(vec![2, 0, 1], 3).unwrap();
        for seed in 0..10 {
            let mut rng = substream(RandomSeed(seed), Domain::FillOut, 0, 0);
            assert_eq!(fill_out(&list, &mut rng).order(), &[2, 0, 1]);
        }
    }

    #[test]
    fn fill_out_two_way_frequencies() {
        // prefix (B) over {A, B, C}: (B,A,C) and (B,C,A) each about 1/2
        let list = CensoredRankedList::new(vec![1], 3).unwrap();
        let draws = 4000;
        let mut first_a = 0;
        for it in 0..draws {
            let mut rng = substream(RandomSeed(11), Domain::FillOut, it, 0);
            if fill_out(&list, &mut rng).order() == [1, 0, 2] {
                first_a += 1;
            }
        }
        // 4 standard deviations of a fair binomial
        let sd = (draws as f64 * 0.25).sqrt();
        assert!((first_a as f64 - draws as f64 / 2.0).abs() < 4.0 * sd, "{first_a}");
    }

    #[test]
    fn fill_out_six_way_chi_square() {
        // prefix (A, B) over {A..E}: the 6 orders of {C, D, E} uniform
        let list = CensoredRankedList::new(vec![0, 1], 5).unwrap();
        let draws = 6000u64;
        let mut counts: HashMap<Vec<u32>, u64> = HashMap::new();
        for it in 0..draws {
            let mut rng = substream(RandomSeed(29), Domain::FillOut, it, 0);
            *counts.entry(fill_out(&list, &mut rng).order()[2..].to_vec()).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        let expected = draws as f64 / 6.0;
        let chi2: f64 = counts.values().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 5 degrees of freedom, 0.999 quantile
        assert!(chi2 < 20.515, "chi-square {chi2}");
    }

    #[test]
    fn filled_ranks_have_uniform_variance() {
        // mean-imputation would collapse this variance to zero
        let p = 40u32;
        let list = CensoredRankedList::new((0..10).collect(), p as usize).unwrap();
        let item = 25usize;
        let draws = 3000;
        let ranks: Vec<f64> = (0..draws)
            .map(|it| {
                let mut rng = substream(RandomSeed(5), Domain::FillOut, it, 0);
                fill_out(&list, &mut rng).ranks()[item] as f64
            })
            .collect();
        let mean = ranks.iter().sum::<f64>() / draws as f64;
        let var = ranks.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (draws as f64 - 1.0);
        // uniform on 11..=40: mean 25.5, variance (30^2 - 1) / 12
        let target = (30.0f64 * 30.0 - 1.0) / 12.0;
        assert!((mean - 25.5).abs() < 0.5, "{mean}");
        assert!((var / target - 1.0).abs() < 0.1, "{var} vs {target}");
    }

    #[test]
    fn zero_permutations_rejected() {
        assert!(matches!(MonteCarloConfig::new(0, RandomSeed(1)), Err(Error::ZeroPermutations)));
        let cfg = MonteCarloConfig { permutations: 0, seed: RandomSeed(1) };
        assert!(sra_censored::<f64>(&censor(&example(), &[2, 2, 2]), AgreementMetric::Sd, &cfg, None).is_err());
    }

    #[test]
    fn complete_input_degenerates_to_exact() {
        let cfg = MonteCarloConfig::new(7, RandomSeed(99)).unwrap();
        let exact: DepthCurve<f64> = sra_complete(&example(), AgreementMetric::Sd, None).unwrap();
        let mc: DepthCurve<f64> = sra_censored(&example(), AgreementMetric::Sd, &cfg, None).unwrap();
        assert_eq!(exact, mc);
    }

    #[test]
    fn censoring_at_universe_size_reproduces_exact_curve() {
        let set = censor(&example(), &[5, 5, 5]);
        assert!(set.has_censored());
        let cfg = MonteCarloConfig::new(10, RandomSeed(4)).unwrap();
        let exact: DepthCurve<f64> = sra_complete(&example(), AgreementMetric::Sd, None).unwrap();
        let mc: DepthCurve<f64> = sra_censored(&set, AgreementMetric::Sd, &cfg, None).unwrap();
        for (a, b) in exact.values().iter().zip(mc.values()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn seeded_runs_are_bit_identical() {
        let set = censor(&example(), &[2, 3, 1]);
        let cfg = MonteCarloConfig::new(200, RandomSeed(17)).unwrap();
        let a: DepthCurve<f64> = sra_censored(&set, AgreementMetric::Sd, &cfg, None).unwrap();
        let b: DepthCurve<f64> = sra_censored(&set, AgreementMetric::Sd, &cfg, None).unwrap();
        assert_eq!(a, b);
        let other = MonteCarloConfig::new(200, RandomSeed(18)).unwrap();
        let c: DepthCurve<f64> = sra_censored(&set, AgreementMetric::Sd, &other, None).unwrap();
        assert_ne!(a, c);
        for (x, y) in a.values().iter().zip(c.values()) {
            assert!((x - y).abs() < 0.2);
        }
    }

    #[test]
    fn thread_count_does_not_change_result() {
        let set = censor(&example(), &[2, 2, 3]);
        let cfg = MonteCarloConfig::new(300, RandomSeed(8)).unwrap();
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| sra_censored::<f64>(&set, AgreementMetric::Mad, &cfg, None).unwrap())
        };
        assert_eq!(run(1), run(4));
    }

    #[test]
    fn mixed_complete_and_censored() {
        let universe = ItemUniverse::new(5).unwrap();
        let set = ListSet::new(
            universe,
            vec![
                RankedList::new(vec![0, 1, 2, 3, 4]).unwrap().into(),
                CensoredRankedList::new(vec![0, 1], 5).unwrap().into(),
            ],
        )
        .unwrap();
        let cfg = MonteCarloConfig::new(100, RandomSeed(2)).unwrap();
        let curve: DepthCurve<f64> = sra_censored(&set, AgreementMetric::Sd, &cfg, Some(2)).unwrap();
        // top two agree exactly in both lists
        assert_eq!(curve.values(), &[0.0, 0.0]);
        assert_eq!(set.recommended_max_depth(), 5);
    }
}
