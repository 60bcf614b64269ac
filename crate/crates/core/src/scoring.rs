use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::item::{ItemId, ItemStore, Payload};
use crate::similarity::SimilarityMeasure;

/// Counts similarity evaluations and enforces an optional hard budget.
#[derive(Debug, Clone, Default)]
pub struct SimilarityCounter {
    count: u64,
    budget: Option<u64>,
}

impl SimilarityCounter {
    pub fn unbounded() -> Self {
        Self::default()
    }

    pub fn with_budget(budget: u64) -> Self {
        SimilarityCounter {
            count: 0,
            budget: Some(budget),
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    pub fn remaining(&self) -> Option<u64> {
        self.budget.map(|b| b.saturating_sub(self.count))
    }

    pub fn exhausted(&self) -> bool {
        matches!(self.budget, Some(b) if self.count >= b)
    }

    /// Drop the budget but keep the running count.
    pub fn lift_budget(&mut self) {
        self.budget = None;
    }

    /// Charge one evaluation, refusing before the measure runs if the budget
    /// is already spent.
    pub fn charge(&mut self) -> Result<()> {
        if let Some(budget) = self.budget {
            if self.count >= budget {
                return Err(Error::BudgetExhausted { budget });
            }
        }
        self.count += 1;
        Ok(())
    }
}

/// Evaluate a measure under a counter. The evaluation is charged first, so
/// an exhausted budget never leaks an extra computation.
pub fn counted_similarity(
    counter: &mut SimilarityCounter,
    measure: SimilarityMeasure,
    a: &Payload,
    b: &Payload,
) -> Result<f64> {
    counter.charge()?;
    measure.evaluate(a, b)
}

/// Scores graph nodes against one query, caching results so a node is only
/// ever charged once. Search and update phases that share a scorer also
/// share its cache and its budget.
pub struct QueryScorer<'a> {
    items: &'a ItemStore,
    query: &'a Payload,
    measure: SimilarityMeasure,
    counter: SimilarityCounter,
    cache: HashMap<ItemId, f64>,
}

impl<'a> QueryScorer<'a> {
    pub fn new(
        items: &'a ItemStore,
        query: &'a Payload,
        measure: SimilarityMeasure,
        counter: SimilarityCounter,
    ) -> Self {
        Self::with_cache(items, query, measure, counter, HashMap::new())
    }

    /// Resume scoring from a previously extracted cache; cached nodes stay
    /// free of charge.
    pub(crate) fn with_cache(
        items: &'a ItemStore,
        query: &'a Payload,
        measure: SimilarityMeasure,
        counter: SimilarityCounter,
        cache: HashMap<ItemId, f64>,
    ) -> Self {
        QueryScorer {
            items,
            query,
            measure,
            counter,
            cache,
        }
    }

    /// Give up the scorer, keeping its cache for a later phase.
    pub(crate) fn into_cache(self) -> HashMap<ItemId, f64> {
        self.cache
    }

    /// Similarity of the query to a stored item, charged on first use only.
    pub fn score(&mut self, id: ItemId) -> Result<f64> {
        if let Some(&s) = self.cache.get(&id) {
            return Ok(s);
        }
        let item = self.items.require(id)?;
        let s = counted_similarity(&mut self.counter, self.measure, self.query, &item.payload)?;
        self.cache.insert(id, s);
        Ok(s)
    }

    pub fn is_scored(&self, id: ItemId) -> bool {
        self.cache.contains_key(&id)
    }

    pub fn scored_count(&self) -> usize {
        self.cache.len()
    }

    pub fn similarities_computed(&self) -> u64 {
        self.counter.count()
    }

    pub fn exhausted(&self) -> bool {
        self.counter.exhausted()
    }

    pub fn lift_budget(&mut self) {
        self.counter.lift_budget();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::item::Item;

    #[test]
    fn budget_refuses_before_evaluating() {
        let mut counter = SimilarityCounter::with_budget(2);
        let a = Payload::Text("ab".into());
        let b = Payload::Text("abc".into());
        counted_similarity(&mut counter, SimilarityMeasure::JaroWinkler, &a, &b).unwrap();
        counted_similarity(&mut counter, SimilarityMeasure::JaroWinkler, &a, &b).unwrap();
        let err =
            counted_similarity(&mut counter, SimilarityMeasure::JaroWinkler, &a, &b).unwrap_err();
        assert!(matches!(err, Error::BudgetExhausted { budget: 2 }));
        assert_eq!(counter.count(), 2);
    }

    #[test]
    fn scorer_caches_repeat_lookups() {
        let items = ItemStore::from_items([Item::text(0, "abcd"), Item::text(1, "abce")]).unwrap();
        let query = Payload::Text("abcf".into());
        let mut scorer = QueryScorer::new(
            &items,
            &query,
            SimilarityMeasure::JaroWinkler,
            SimilarityCounter::with_budget(2),
        );
        let s0 = scorer.score(0).unwrap();
        assert_eq!(scorer.score(0).unwrap(), s0);
        assert_eq!(scorer.similarities_computed(), 1);
        scorer.score(1).unwrap();
        assert!(scorer.exhausted());
        assert_eq!(scorer.score(1).unwrap(), scorer.score(1).unwrap());
        assert_eq!(scorer.similarities_computed(), 2);
    }

    #[test]
    fn lifting_budget_keeps_count() {
        let mut counter = SimilarityCounter::with_budget(1);
        counter.charge().unwrap();
        assert!(counter.exhausted());
        counter.lift_budget();
        assert!(!counter.exhausted());
        counter.charge().unwrap();
        assert_eq!(counter.count(), 2);
    }
}
