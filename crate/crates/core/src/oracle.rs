use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::item::{Item, ItemId, ItemStore};
use crate::neighbor::{Neighbor, NeighborList};
use crate::scoring::{counted_similarity, SimilarityCounter};
use crate::similarity::SimilarityMeasure;

/// Exhaustively computed reference answers: the exact graph over the stored
/// items and the exact top-k list for each held-out query.
#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub graph: Graph,
    pub queries: BTreeMap<ItemId, NeighborList>,
}

impl GroundTruth {
    pub fn compute(
        items: &ItemStore,
        queries: &[Item],
        k: usize,
        measure: SimilarityMeasure,
    ) -> Result<Self> {
        let graph = brute_build(items, k, measure)?;
        let mut per_query = BTreeMap::new();
        for q in queries {
            per_query.insert(q.id, brute_search(items, q, k, measure)?);
        }
        Ok(GroundTruth {
            graph,
            queries: per_query,
        })
    }
}

/// Build the exact k-nn graph by evaluating every pair once; each pair's
/// similarity serves both endpoints, so exactly n(n-1)/2 evaluations run.
pub fn brute_build(items: &ItemStore, k: usize, measure: SimilarityMeasure) -> Result<Graph> {
    let mut counter = SimilarityCounter::unbounded();
    brute_build_counted(items, k, measure, &mut counter)
}

/// [`brute_build`] with an externally owned evaluation counter.
pub fn brute_build_counted(
    items: &ItemStore,
    k: usize,
    measure: SimilarityMeasure,
    counter: &mut SimilarityCounter,
) -> Result<Graph> {
    let n = items.len();
    if n <= k {
        return Err(Error::InsufficientItems { n, k });
    }
    let all: Vec<&Item> = items.iter().collect();
    let mut lists: Vec<NeighborList> = vec![NeighborList::new(k); n];
    for i in 0..n {
        for j in (i + 1)..n {
            let s = counted_similarity(counter, measure, &all[i].payload, &all[j].payload)?;
            lists[i].insert(Neighbor::new(all[j].id, s));
            lists[j].insert(Neighbor::new(all[i].id, s));
        }
    }
    let mut graph = Graph::new(k, measure);
    for (item, list) in all.into_iter().zip(lists) {
        graph.add_node(item.clone(), list)?;
    }
    Ok(graph)
}

/// Exact top-k for one query by scanning every stored item. The query's own
/// id is excluded from the candidates, so the scan costs one evaluation per
/// other item.
pub fn brute_search(
    items: &ItemStore,
    query: &Item,
    k: usize,
    measure: SimilarityMeasure,
) -> Result<NeighborList> {
    let mut counter = SimilarityCounter::unbounded();
    let mut list = NeighborList::new(k);
    for item in items.iter() {
        if item.id == query.id {
            continue;
        }
        let s = counted_similarity(&mut counter, measure, &query.payload, &item.payload)?;
        list.insert(Neighbor::new(item.id, s));
    }
    Ok(list)
}
