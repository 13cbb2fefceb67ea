//! Overlap and average overlap of `L` complete lists.
//!
//! `O(d)` is the fraction of the top-`d` slots occupied by items that are in
//! the top `d` of every list; `AO(d)` is the running mean `Σ_{i≤d} O(i) / d`.

use crate::agreement::resolve_depth;
use crate::curve::DepthCurve;
use crate::error::{Error, Result};
use crate::lists::{ItemId, ListSet};
use crate::scalar::Scalar;

/// Sizes of the common top-`d` intersection for `d = 1..=depth`.
fn intersection_sizes(orders: &[&[ItemId]], size: usize, depth: usize) -> Vec<usize> {
    let n_lists = orders.len() as u32;
    let mut hits = vec![0u32; size];
    let mut common = 0usize;
    let mut out = Vec::with_capacity(depth);
    for pos in 0..depth {
        for order in orders {
            let item = order[pos] as usize;
            hits[item] += 1;
            if hits[item] == n_lists {
                common += 1;
            }
        }
        out.push(common);
    }
    out
}

/// `O(d) = |∩_l top-d(l)| / d`.
pub fn overlap_at<S: Scalar>(lists: &ListSet, depth: usize) -> Result<S> {
    let orders = lists.complete_orders("overlap")?;
    let size = lists.universe_size();
    if depth == 0 || depth > size {
        return Err(Error::DepthOutOfRange { depth, max: size });
    }
    let common = intersection_sizes(&orders, size, depth)[depth - 1];
    Ok(S::from_count(common) / S::from_count(depth))
}

/// The pointwise overlap curve `O(1..=D)`.
pub fn overlap_curve<S: Scalar>(lists: &ListSet, max_depth: Option<usize>) -> Result<DepthCurve<S>> {
    let orders = lists.complete_orders("overlap")?;
    let depth = resolve_depth(max_depth, lists.universe_size())?;
    let values = intersection_sizes(&orders, lists.universe_size(), depth)
        .into_iter()
        .enumerate()
        .map(|(i, common)| S::from_count(common) / S::from_count(i + 1))
        .collect();
    Ok(DepthCurve::new_unchecked(values))
}

/// Average overlap `AO(d) = (1/d) Σ_{i=1..d} O(i)` for `d = 1..=D`.
pub fn average_overlap<S: Scalar>(lists: &ListSet, max_depth: Option<usize>) -> Result<DepthCurve<S>> {
    let pointwise = overlap_curve::<S>(lists, max_depth)?;
    let mut running = S::zero();
    let values = pointwise
        .iter()
        .map(|(d, o)| {
            running = running + o;
            running / S::from_count(d)
        })
        .collect();
    Ok(DepthCurve::new_unchecked(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{censor, example};
    use approx::assert_abs_diff_eq;

    #[test]
    fn overlap_examples() {
        let set = example();
        assert_eq!(overlap_at::<f64>(&set, 1).unwrap(), 0.0);
        assert_eq!(overlap_at::<f64>(&set, 2).unwrap(), 0.5);
        assert_eq!(overlap_at::<f64>(&set, 5).unwrap(), 1.0);
        assert!(overlap_at::<f64>(&set, 0).is_err());
        assert!(overlap_at::<f64>(&set, 6).is_err());
    }

    #[test]
    fn average_overlap_examples() {
        let ao: DepthCurve<f64> = average_overlap(&example(), None).unwrap();
        let expected = [0.0, 0.25, 5.0 / 18.0, 19.0 / 48.0, 31.0 / 60.0];
        for (got, want) in ao.values().iter().zip(expected) {
            assert_abs_diff_eq!(*got, want, epsilon = 1e-12);
        }
        let truncated: DepthCurve<f64> = average_overlap(&example(), Some(2)).unwrap();
        assert_eq!(truncated.values(), &ao.values()[..2]);
    }

    #[test]
    fn identical_lists_have_unit_average_overlap() {
        let order: Vec<u32> = vec![3, 1, 4, 0, 2];
        let set = ListSet::from_orders(vec![order.clone(), order.clone(), order]).unwrap();
        let ao: DepthCurve<f64> = average_overlap(&set, None).unwrap();
        assert!(ao.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn censored_lists_are_unsupported() {
        let set = censor(&example(), &[5, 2, 5]);
        assert!(matches!(average_overlap::<f64>(&set, None), Err(Error::CensoredInput { list: 1, .. })));
        assert!(matches!(overlap_at::<f64>(&set, 1), Err(Error::CensoredInput { .. })));
    }
}
