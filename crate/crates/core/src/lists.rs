//! Ranked lists over a shared item universe.
//!
//! Items are identified by dense integer ids `0..P`. A [`RankedList`] stores
//! the inverse ranking: position `r - 1` holds the item ranked `r`.

use std::collections::HashSet;

use crate::error::{Error, Result};

pub type ItemId = u32;

/// The `P` items that every list in a [`ListSet`] ranks.
///
/// Labels are optional and may cover only the first `labels.len()` ids: items
/// that never appear in any observed prefix of a censored input have no name.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItemUniverse {
    size: usize,
    labels: Vec<String>,
}

impl ItemUniverse {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::EmptyUniverse);
        }
        if size > ItemId::MAX as usize {
            return Err(Error::NotAPermutation { size, reason: "universe exceeds the 32-bit id space".into() });
        }
        Ok(Self { size, labels: Vec::new() })
    }

    /// A universe with one label per item.
    pub fn labeled(labels: Vec<String>) -> Result<Self> {
        let size = labels.len();
        Self::partially_labeled(size, labels)
    }

    /// A universe of `size` items whose first `labels.len()` ids are named.
    pub fn partially_labeled(size: usize, labels: Vec<String>) -> Result<Self> {
        let mut universe = Self::new(size)?;
        if labels.len() > size {
            return Err(Error::LabelCount { size, labels: labels.len() });
        }
        let mut seen = HashSet::with_capacity(labels.len());
        for label in &labels {
            if !seen.insert(label.as_str()) {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        universe.labels = labels;
        Ok(universe)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, id: ItemId) -> Option<&str> {
        self.labels.get(id as usize).map(String::as_str)
    }

    pub fn is_fully_labeled(&self) -> bool {
        self.labels.len() == self.size
    }
}

/// A complete ranking: a permutation of `0..P`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RankedList {
    order: Vec<ItemId>,
}

impl RankedList {
    pub fn new(order: Vec<ItemId>) -> Result<Self> {
        let size = order.len();
        if size == 0 {
            return Err(Error::EmptyUniverse);
        }
        let mut seen = vec![false; size];
        for &item in &order {
            let slot = seen
                .get_mut(item as usize)
                .ok_or_else(|| Error::NotAPermutation { size, reason: format!("item id {item} out of range") })?;
            if *slot {
                return Err(Error::NotAPermutation { size, reason: format!("item id {item} appears more than once") });
            }
            *slot = true;
        }
        Ok(Self { order })
    }

    pub(crate) fn new_unchecked(order: Vec<ItemId>) -> Self {
        debug_assert!(Self::new(order.clone()).is_ok());
        Self { order }
    }

    pub fn identity(size: usize) -> Result<Self> {
        ItemUniverse::new(size)?;
        Ok(Self { order: (0..size as ItemId).collect() })
    }

    /// Items in rank order; `order()[r - 1]` is the item with rank `r`.
    pub fn order(&self) -> &[ItemId] {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Rank (1-based) of every item, indexed by item id.
    pub fn ranks(&self) -> Vec<u32> {
        let mut ranks = vec![0u32; self.order.len()];
        for (pos, &item) in self.order.iter().enumerate() {
            ranks[item as usize] = pos as u32 + 1;
        }
        ranks
    }

    pub fn into_order(self) -> Vec<ItemId> {
        self.order
    }
}

/// Observed top-`d` prefix of a ranking over `P` items. Items outside the
/// prefix are only known to rank somewhere in `d+1..=P`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CensoredRankedList {
    prefix: Vec<ItemId>,
    universe_size: usize,
}

impl CensoredRankedList {
    pub fn new(prefix: Vec<ItemId>, universe_size: usize) -> Result<Self> {
        if prefix.is_empty() {
            return Err(Error::InvalidPrefix("observed prefix is empty".into()));
        }
        if prefix.len() > universe_size {
            return Err(Error::InvalidPrefix(format!(
                "prefix of length {} exceeds universe size {universe_size}",
                prefix.len()
            )));
        }
        let mut seen = HashSet::with_capacity(prefix.len());
        for &item in &prefix {
            if item as usize >= universe_size {
                return Err(Error::InvalidPrefix(format!("item id {item} out of range")));
            }
            if !seen.insert(item) {
                return Err(Error::InvalidPrefix(format!("item id {item} appears more than once")));
            }
        }
        Ok(Self { prefix, universe_size })
    }

    pub fn prefix(&self) -> &[ItemId] {
        &self.prefix
    }

    /// Number of observed ranks.
    pub fn depth(&self) -> usize {
        self.prefix.len()
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    /// Items outside the observed prefix, in increasing id order.
    pub fn unobserved(&self) -> Vec<ItemId> {
        let mut observed = vec![false; self.universe_size];
        for &item in &self.prefix {
            observed[item as usize] = true;
        }
        (0..self.universe_size as ItemId).filter(|&i| !observed[i as usize]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RankList {
    Complete(RankedList),
    Censored(CensoredRankedList),
}

impl RankList {
    pub fn universe_size(&self) -> usize {
        match self {
            RankList::Complete(list) => list.len(),
            RankList::Censored(list) => list.universe_size(),
        }
    }

    /// Observed depth `d_l`; a complete list observes all `P` ranks.
    pub fn observed_depth(&self) -> usize {
        match self {
            RankList::Complete(list) => list.len(),
            RankList::Censored(list) => list.depth(),
        }
    }

    pub fn observed(&self) -> &[ItemId] {
        match self {
            RankList::Complete(list) => list.order(),
            RankList::Censored(list) => list.prefix(),
        }
    }

    pub fn is_censored(&self) -> bool {
        matches!(self, RankList::Censored(_))
    }

    pub fn as_complete(&self) -> Option<&RankedList> {
        match self {
            RankList::Complete(list) => Some(list),
            RankList::Censored(_) => None,
        }
    }
}

impl From<RankedList> for RankList {
    fn from(list: RankedList) -> Self {
        RankList::Complete(list)
    }
}

impl From<CensoredRankedList> for RankList {
    fn from(list: CensoredRankedList) -> Self {
        RankList::Censored(list)
    }
}

/// `L >= 2` rankings of one shared universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListSet {
    universe: ItemUniverse,
    lists: Vec<RankList>,
}

impl ListSet {
    pub fn new(universe: ItemUniverse, lists: Vec<RankList>) -> Result<Self> {
        if lists.len() < 2 {
            return Err(Error::TooFewLists(lists.len()));
        }
        for (idx, list) in lists.iter().enumerate() {
            if list.universe_size() != universe.size() {
                return Err(Error::UniverseMismatch {
                    list: idx,
                    expected: universe.size(),
                    found: list.universe_size(),
                });
            }
        }
        Ok(Self { universe, lists })
    }

    /// Convenience constructor for complete lists over an unlabeled universe.
    pub fn from_orders(orders: Vec<Vec<ItemId>>) -> Result<Self> {
        let size = orders.first().map_or(0, Vec::len);
        let universe = ItemUniverse::new(size)?;
        let lists =
            orders.into_iter().map(|order| RankedList::new(order).map(RankList::from)).collect::<Result<Vec<_>>>()?;
        Self::new(universe, lists)
    }

    pub fn universe(&self) -> &ItemUniverse {
        &self.universe
    }

    pub fn universe_size(&self) -> usize {
        self.universe.size()
    }

    pub fn lists(&self) -> &[RankList] {
        &self.lists
    }

    pub fn len(&self) -> usize {
        self.lists.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lists.is_empty()
    }

    pub fn has_censored(&self) -> bool {
        self.lists.iter().any(RankList::is_censored)
    }

    /// The complete lists, or the index of the first censored one.
    /// Full orders of every list; a censored list qualifies only if its
    /// prefix covers the whole universe.
    pub(crate) fn complete_orders(&self, operation: &'static str) -> Result<Vec<&[ItemId]>> {
        self.lists
            .iter()
            .enumerate()
            .map(|(idx, list)| match list {
                RankList::Complete(l) => Ok(l.order()),
                RankList::Censored(c) if c.depth() == self.universe_size() => Ok(c.prefix()),
                RankList::Censored(_) => Err(Error::CensoredInput { operation, list: idx }),
            })
            .collect()
    }

    /// Depths beyond which every list is censored: `max(d_1, ..., d_L)`.
    pub fn recommended_max_depth(&self) -> usize {
        self.lists.iter().map(RankList::observed_depth).max().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutation_validation() {
        assert!(RankedList::new(vec![2, 0, 1]).is_ok());
        assert!(matches!(RankedList::new(vec![0, 0, 1]), Err(Error::NotAPermutation { .. })));
        assert!(matches!(RankedList::new(vec![0, 3, 1]), Err(Error::NotAPermutation { .. })));
        assert!(RankedList::new(vec![]).is_err());
    }

    #[test]
    fn ranks_invert_order() {
        let list = RankedList::new(vec![2, 0, 1]).unwrap();
        assert_eq!(list.ranks(), vec![2, 3, 1]);
    }

    #[test]
    fn censored_prefix_validation() {
        assert!(CensoredRankedList::new(vec![1, 0], 5).is_ok());
        assert!(CensoredRankedList::new(vec![], 5).is_err());
        assert!(CensoredRankedList::new(vec![1, 1], 5).is_err());
        assert!(CensoredRankedList::new(vec![5], 5).is_err());
        assert!(CensoredRankedList::new(vec![0, 1, 2], 2).is_err());
        let list = CensoredRankedList::new(vec![3, 0], 5).unwrap();
        assert_eq!(list.unobserved(), vec![1, 2, 4]);
    }

    #[test]
    fn universe_labels() {
        assert!(ItemUniverse::new(0).is_err());
        assert!(matches!(ItemUniverse::labeled(vec!["a".into(), "a".into()]), Err(Error::DuplicateLabel(_))));
        assert!(ItemUniverse::partially_labeled(1, vec!["a".into(), "b".into()]).is_err());
        let u = ItemUniverse::partially_labeled(4, vec!["a".into(), "b".into()]).unwrap();
        assert_eq!(u.label(1), Some("b"));
        assert_eq!(u.label(3), None);
        assert!(!u.is_fully_labeled());
    }

    #[test]
    fn list_set_needs_two_lists_of_one_universe() {
        assert!(matches!(ListSet::from_orders(vec![vec![0, 1]]), Err(Error::TooFewLists(1))));
        let universe = ItemUniverse::new(3).unwrap();
        let lists = vec![RankedList::new(vec![0, 1, 2]).unwrap().into(), RankedList::new(vec![0, 1]).unwrap().into()];
        assert!(matches!(ListSet::new(universe, lists), Err(Error::UniverseMismatch { list: 1, .. })));
    }

    #[test]
    fn recommended_depth_is_largest_observed_depth() {
        let universe = ItemUniverse::new(60).unwrap();
        let censored = |d: u32| RankList::from(CensoredRankedList::new((0..d).collect(), 60).unwrap());
        let set = ListSet::new(universe.clone(), vec![censored(16), censored(33), censored(50)]).unwrap();
        assert_eq!(set.recommended_max_depth(), 50);
        let with_complete =
            ListSet::new(universe, vec![censored(20), RankedList::identity(60).unwrap().into()]).unwrap();
        assert_eq!(with_complete.recommended_max_depth(), 60);
    }
}
