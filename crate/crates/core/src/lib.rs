//! Sequential rank agreement of ranked lists.
//!
//! Given `L` rankings of the same `P` items, the sequential rank agreement at
//! depth `d` is the pooled standard deviation of the ranks of every item that
//! appears in the top `d` of at least one list. Small values mean the lists
//! agree on their top items.
//!
//! The crate covers complete lists ([`sra_complete`]), censored lists whose
//! tails are filled in by random completion ([`sra_censored`]), null
//! reference bands and p-values ([`h0_band`], [`band_from_replicates`],
//! [`pointwise_pvalues`]), the multi-list average overlap
//! ([`average_overlap`]), and file formats for all of these ([`ingest`]).
//!
//! Curve computations are generic over the floating-point [`Scalar`]; the
//! aliases below fix the usual choices.
//!
//! ```
//! use seqrank::{sra_complete, AgreementMetric, Curve, ListSet};
//!
//! let lists = ListSet::from_orders(vec![
//!     vec![0, 1, 2, 3, 4],
//!     vec![0, 2, 3, 1, 4],
//!     vec![1, 0, 4, 2, 3],
//! ])?;
//! let curve: Curve = sra_complete(&lists, AgreementMetric::Sd, None)?;
//! assert!((curve.values()[0] - (4.0f64 / 3.0).sqrt()).abs() < 1e-12);
//! # Ok::<(), seqrank::Error>(())
//! ```

mod agreement;
mod censored;
mod curve;
mod error;
pub mod ingest;
mod lists;
mod nullref;
mod overlap;
pub mod rng;
mod scalar;

pub use agreement::{cumulative_item_set, item_agreement, sra_complete, AgreementMetric};
pub use censored::{fill_out, sra_censored, MonteCarloConfig, DEFAULT_PERMUTATIONS};
pub use curve::DepthCurve;
pub use error::{Error, Result};
pub use lists::{CensoredRankedList, ItemId, ItemUniverse, ListSet, RankList, RankedList};
pub use nullref::{
    band_from_replicates, h0_band, h0_null_curves, h0_realization, nearest_rank, normalize_quantiles,
    pointwise_pvalues, Hypothesis, NullConfig, ReferenceBand, DEFAULT_FILL_PERMUTATIONS, DEFAULT_QUANTILES,
    LOWER_QUANTILES,
};
pub use overlap::{average_overlap, overlap_at, overlap_curve};
pub use rng::RandomSeed;
pub use scalar::Scalar;

/// Double-precision depth curve.
pub type Curve = DepthCurve<f64>;
/// Single-precision depth curve.
pub type Curve32 = DepthCurve<f32>;
/// Double-precision reference band.
pub type Band = ReferenceBand<f64>;
/// Single-precision reference band.
pub type Band32 = ReferenceBand<f32>;

/// Sequential rank agreement, dispatching on whether any list is censored.
pub fn sra<S: Scalar>(
    lists: &ListSet,
    metric: AgreementMetric,
    config: &MonteCarloConfig,
    max_depth: Option<usize>,
) -> Result<DepthCurve<S>> {
    if lists.has_censored() {
        sra_censored(lists, metric, config, max_depth)
    } else {
        sra_complete(lists, metric, max_depth)
    }
}
