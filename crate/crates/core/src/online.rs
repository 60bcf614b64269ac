use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::item::{Item, ItemId, ItemStore};
use crate::neighbor::{Neighbor, NeighborList};
use crate::oracle::brute_build;
use crate::scoring::{QueryScorer, SimilarityCounter};
use crate::search::{ignns_with_scorer, SearchParams};
use crate::similarity::SimilarityMeasure;

/// Parameters of one online insertion: the search knobs plus the depth of
/// the reverse-edge update walk.
#[derive(Debug, Clone, PartialEq)]
pub struct UpdateParams {
    pub depth: usize,
    pub search: SearchParams,
}

/// The update frontier can touch up to k^depth nodes, so depth is capped.
pub const MAX_DEPTH: usize = 10;

impl UpdateParams {
    pub fn new(depth: usize, search: SearchParams) -> Self {
        UpdateParams { depth, search }
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 || self.depth > MAX_DEPTH {
            return Err(Error::InvalidParam(format!(
                "depth must be between 1 and {MAX_DEPTH}"
            )));
        }
        self.search.validate()
    }
}

/// Cost accounting of an online build, in distinct similarity evaluations.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub similarities_search: u64,
    pub similarities_update: u64,
    pub nodes_added: u64,
}

impl BuildStats {
    pub fn total_similarities(&self) -> u64 {
        self.similarities_search + self.similarities_update
    }
}

/// Insert one item into an existing graph: search for its neighbors under
/// the usual budget, then walk out from those neighbors for `depth` rounds
/// offering the new node to every visited node's list. The update rounds
/// reuse the search phase's similarity cache and run unbudgeted.
pub fn online_add(
    graph: &mut Graph,
    new_item: Item,
    params: &UpdateParams,
    stats: &mut BuildStats,
) -> Result<()> {
    params.validate()?;
    if graph.contains_node(new_item.id) || graph.items().contains(new_item.id) {
        return Err(Error::DuplicateId(new_item.id));
    }
    if graph.len() < graph.k() {
        return Err(Error::GraphTooSmall {
            n: graph.len(),
            k: graph.k(),
        });
    }
    let mut search_params = params.search.clone();
    search_params.k_results = graph.k();
    let budget = search_params.budget_for(graph.len())?;

    let mut scorer = QueryScorer::new(
        graph.items(),
        &new_item.payload,
        graph.measure(),
        SimilarityCounter::with_budget(budget),
    );
    let (neighbors, _, _) = ignns_with_scorer(graph, &mut scorer, &search_params)?;
    stats.similarities_search += scorer.similarities_computed();

    scorer.lift_budget();
    let before = scorer.similarities_computed();
    let schedule = update_schedule(graph, new_item.id, &neighbors, params.depth);
    let scored: Vec<(ItemId, f64)> = schedule
        .into_iter()
        .map(|id| scorer.score(id).map(|s| (id, s)))
        .collect::<Result<_>>()?;
    stats.similarities_update += scorer.similarities_computed() - before;

    apply_reverse_edges(graph, new_item.id, &scored);
    graph.add_node(new_item, neighbors)?;
    stats.nodes_added += 1;
    Ok(())
}

/// Offer `new_item` to the lists of every node within `depth` hops of the
/// given neighbors. Standalone variant with its own similarity accounting;
/// an insertion done through [`online_add`] shares the search cache instead.
pub fn update_neighbors(
    graph: &mut Graph,
    new_item: &Item,
    neighbors: &NeighborList,
    depth: usize,
    stats: &mut BuildStats,
) -> Result<()> {
    if neighbors.is_empty() {
        return Err(Error::InvalidParam("update needs a non-empty frontier".into()));
    }
    let mut scorer = QueryScorer::new(
        graph.items(),
        &new_item.payload,
        graph.measure(),
        SimilarityCounter::unbounded(),
    );
    let schedule = update_schedule(graph, new_item.id, neighbors, depth);
    let scored: Vec<(ItemId, f64)> = schedule
        .into_iter()
        .map(|id| scorer.score(id).map(|s| (id, s)))
        .collect::<Result<_>>()?;
    stats.similarities_update += scorer.similarities_computed();
    apply_reverse_edges(graph, new_item.id, &scored);
    Ok(())
}

/// Breadth-first expansion from the discovered neighbors: round r visits the
/// nodes r hops out, each node once, the new node's own id never. Rounds
/// read the lists as they are before this insertion touches them, which
/// matches running the walk interleaved with the inserts (a node's list only
/// changes when the node itself is processed, after its neighbors are
/// enqueued).
pub(crate) fn update_schedule(
    graph: &Graph,
    new_id: ItemId,
    neighbors: &NeighborList,
    depth: usize,
) -> Vec<ItemId> {
    let mut frontier: Vec<ItemId> = neighbors
        .iter()
        .map(|n| n.node_id)
        .filter(|&id| id != new_id && graph.contains_node(id))
        .collect();
    let mut seen: HashSet<ItemId> = frontier.iter().copied().collect();
    let mut schedule = Vec::new();
    for _ in 0..depth {
        if frontier.is_empty() {
            break;
        }
        schedule.extend(frontier.iter().copied());
        let mut next = Vec::new();
        for &node in &frontier {
            let list = graph.node(node).expect("frontier stays on graph nodes");
            for nb in list.iter() {
                if nb.node_id != new_id
                    && graph.contains_node(nb.node_id)
                    && seen.insert(nb.node_id)
                {
                    next.push(nb.node_id);
                }
            }
        }
        frontier = next;
    }
    schedule
}

pub(crate) fn apply_reverse_edges(graph: &mut Graph, new_id: ItemId, scored: &[(ItemId, f64)]) {
    for &(id, s) in scored {
        graph
            .node_mut(id)
            .expect("scheduled nodes exist")
            .insert(Neighbor::new(new_id, s));
    }
}

/// Build a graph from a stream of items: brute-force the first `seed_size`
/// into an exact seed graph, then insert the rest one by one. Each insertion
/// derives its own rng seed from the base seed and the item id.
pub fn build_online(
    items: &ItemStore,
    k: usize,
    measure: SimilarityMeasure,
    params: &UpdateParams,
    seed_size: usize,
) -> Result<(Graph, BuildStats)> {
    params.validate()?;
    let seed_size = seed_size.max(k + 1);
    if items.len() <= k {
        return Err(Error::InsufficientItems {
            n: items.len(),
            k,
        });
    }
    let seed_items = ItemStore::from_items(items.iter().take(seed_size).cloned())?;
    let mut graph = if seed_items.len() > k {
        brute_build(&seed_items, k, measure)?
    } else {
        return Err(Error::InsufficientItems {
            n: seed_items.len(),
            k,
        });
    };
    let mut stats = BuildStats::default();
    for item in items.iter().skip(seed_size) {
        let mut item_params = params.clone();
        item_params.search.rng_seed = crate::mix_seed(params.search.rng_seed, item.id);
        online_add(&mut graph, item.clone(), &item_params, &mut stats)?;
    }
    Ok((graph, stats))
}

/// Default seed-graph size for streaming builds.
pub fn default_seed_size(k: usize) -> usize {
    (k + 1).max(50)
}
