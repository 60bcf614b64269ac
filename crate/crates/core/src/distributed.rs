use std::collections::{HashMap, HashSet};
use std::sync::mpsc;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::item::{Item, ItemId, ItemStore, Payload};
use crate::neighbor::{Neighbor, NeighborList};
use crate::online::UpdateParams;
use crate::partition::{assign_step, partition_graph, update_medoids, PartitionParams, Partitioning};
use crate::scoring::{QueryScorer, SimilarityCounter};
use crate::search::{ignns_with_scorer, SearchParams, SearchReport};
use crate::similarity::SimilarityMeasure;

/// One worker's share of the graph: its medoid and the subgraph of the
/// nodes it owns. Neighbor ids may point into other partitions; the owner
/// cannot dereference those.
#[derive(Debug, Clone)]
pub struct Partition {
    pub medoid: ItemId,
    pub graph: Graph,
}

/// A graph split into p disjoint node sets for shared-nothing workers.
#[derive(Debug, Clone)]
pub struct PartitionedGraph {
    k: usize,
    measure: SimilarityMeasure,
    parts: Vec<Partition>,
    partition_params: PartitionParams,
    adds_since_refresh: usize,
    nodes_at_last_refresh: usize,
}

/// Worker pool shape and the optional medoid maintenance cadence: with an
/// interval f, medoids are recomputed after every f * n additions (n taken
/// at the previous recomputation).
#[derive(Debug, Clone, PartialEq)]
pub struct DistributedConfig {
    pub workers: usize,
    pub medoid_update_interval: Option<f64>,
}

impl DistributedConfig {
    pub fn new(workers: usize, medoid_update_interval: Option<f64>) -> Self {
        DistributedConfig {
            workers,
            medoid_update_interval,
        }
    }

    fn validate(&self, p: usize) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::InvalidParam("workers must be at least 1".into()));
        }
        if self.workers > p {
            return Err(Error::InvalidParam(format!(
                "{} workers cannot own {} partitions exclusively",
                self.workers, p
            )));
        }
        if let Some(f) = self.medoid_update_interval {
            if !(f > 0.0) || !f.is_finite() {
                return Err(Error::InvalidParam(
                    "medoid update interval must be a positive fraction".into(),
                ));
            }
        }
        Ok(())
    }
}

/// What one distributed insertion did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AddOutcome {
    pub partition: usize,
    pub similarities_search: u64,
    pub similarities_update: u64,
    pub similarities_placement: u64,
    pub refreshed_medoids: bool,
}

/// Accumulated accounting of a distributed build.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DistributedBuildStats {
    pub similarities_search: u64,
    pub similarities_update: u64,
    pub similarities_placement: u64,
    pub nodes_added: u64,
    pub medoid_refreshes: u64,
}

impl DistributedBuildStats {
    pub fn absorb(&mut self, outcome: &AddOutcome) {
        self.similarities_search += outcome.similarities_search;
        self.similarities_update += outcome.similarities_update;
        self.similarities_placement += outcome.similarities_placement;
        self.nodes_added += 1;
        if outcome.refreshed_medoids {
            self.medoid_refreshes += 1;
        }
    }
}

impl PartitionedGraph {
    /// Split a graph along an existing partitioning.
    pub fn from_partitioning(
        graph: &Graph,
        partitioning: &Partitioning,
        params: PartitionParams,
    ) -> Result<Self> {
        let mut parts = Vec::with_capacity(partitioning.clusters.len());
        for (index, cluster) in partitioning.clusters.iter().enumerate() {
            if cluster.size() == 0 {
                return Err(Error::EmptyPartition { index });
            }
            let mut sub = Graph::new(graph.k(), graph.measure());
            for &id in cluster.members() {
                let item = graph.items().require(id)?.clone();
                let list = graph.node(id).ok_or(Error::UnknownItem(id))?.clone();
                sub.add_node(item, list)?;
            }
            parts.push(Partition {
                medoid: cluster.medoid_id,
                graph: sub,
            });
        }
        Ok(PartitionedGraph {
            k: graph.k(),
            measure: graph.measure(),
            parts,
            partition_params: params,
            adds_since_refresh: 0,
            nodes_at_last_refresh: graph.len(),
        })
    }

    /// Partition a graph from scratch and split it.
    pub fn build(graph: &Graph, params: PartitionParams) -> Result<Self> {
        let partitioning = partition_graph(graph, &params)?;
        Self::from_partitioning(graph, &partitioning, params)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn measure(&self) -> SimilarityMeasure {
        self.measure
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.parts
    }

    pub fn partition_count(&self) -> usize {
        self.parts.len()
    }

    pub fn len(&self) -> usize {
        self.parts.iter().map(|p| p.graph.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.iter().all(|p| p.graph.is_empty())
    }

    pub fn medoids(&self) -> Vec<ItemId> {
        self.parts.iter().map(|p| p.medoid).collect()
    }

    pub fn partition_of(&self, id: ItemId) -> Option<usize> {
        self.parts.iter().position(|p| p.graph.contains_node(id))
    }

    pub fn contains_node(&self, id: ItemId) -> bool {
        self.partition_of(id).is_some()
    }

    /// Reassemble the full graph (ids come back sorted; edges unchanged).
    pub fn to_global(&self) -> Result<Graph> {
        let mut graph = Graph::new(self.k, self.measure);
        for part in &self.parts {
            for (id, list) in part.graph.nodes() {
                let item = part.graph.items().require(id)?.clone();
                graph.add_node(item, list.clone())?;
            }
        }
        Ok(graph)
    }
}

/// Run a job against every partition, read-only, at most `workers` threads.
/// Results come back in partition order no matter how threads interleave.
fn scatter<T, F>(parts: &[Partition], workers: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &Partition) -> Result<T> + Sync,
{
    let workers = workers.min(parts.len()).max(1);
    let (tx, rx) = mpsc::channel::<(usize, Result<T>)>();
    std::thread::scope(|scope| {
        let mut groups: Vec<Vec<(usize, &Partition)>> = (0..workers).map(|_| Vec::new()).collect();
        for (i, part) in parts.iter().enumerate() {
            groups[i % workers].push((i, part));
        }
        for group in groups {
            let tx = tx.clone();
            let job = &job;
            scope.spawn(move || {
                for (i, part) in group {
                    let out = job(i, part);
                    let _ = tx.send((i, out));
                }
            });
        }
    });
    drop(tx);
    let mut results: Vec<(usize, Result<T>)> = rx.into_iter().collect();
    results.sort_by_key(|(i, _)| *i);
    results.into_iter().map(|(_, r)| r).collect()
}

/// As [`scatter`], with exclusive access: each partition is mutated only by
/// the one worker owning it.
fn scatter_mut<T, F>(parts: &mut [Partition], workers: usize, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, &mut Partition) -> Result<T> + Sync,
{
    let workers = workers.min(parts.len()).max(1);
    let (tx, rx) = mpsc::channel::<(usize, Result<T>)>();
    std::thread::scope(|scope| {
        let mut groups: Vec<Vec<(usize, &mut Partition)>> =
            (0..workers).map(|_| Vec::new()).collect();
        for (i, part) in parts.iter_mut().enumerate() {
            groups[i % workers].push((i, part));
        }
        for group in groups {
            let tx = tx.clone();
            let job = &job;
            scope.spawn(move || {
                for (i, part) in group {
                    let out = job(i, part);
                    let _ = tx.send((i, out));
                }
            });
        }
    });
    drop(tx);
    let mut results: Vec<(usize, Result<T>)> = rx.into_iter().collect();
    results.sort_by_key(|(i, _)| *i);
    results.into_iter().map(|(_, r)| r).collect()
}

struct PartitionSearch {
    results: NeighborList,
    similarities: u64,
    restarts: u64,
    nodes_visited: u64,
    cache: HashMap<ItemId, f64>,
}

fn search_partitions(
    pg: &PartitionedGraph,
    query: &Payload,
    params: &SearchParams,
    workers: usize,
) -> Result<Vec<PartitionSearch>> {
    for (index, part) in pg.parts.iter().enumerate() {
        if part.graph.is_empty() {
            return Err(Error::EmptyPartition { index });
        }
    }
    scatter(&pg.parts, workers, |index, part| {
        let mut local = params.clone();
        local.rng_seed = crate::mix_seed(params.rng_seed, index as u64);
        let budget = local.budget_for(part.graph.len())?;
        let mut scorer = QueryScorer::new(
            part.graph.items(),
            query,
            part.graph.measure(),
            SimilarityCounter::with_budget(budget),
        );
        let (results, restarts, nodes_visited) = ignns_with_scorer(&part.graph, &mut scorer, &local)?;
        let similarities = scorer.similarities_computed();
        Ok(PartitionSearch {
            results,
            similarities,
            restarts,
            nodes_visited,
            cache: scorer.into_cache(),
        })
    })
}

fn merge_reports(k: usize, searches: &[PartitionSearch]) -> SearchReport {
    let mut results = NeighborList::new(k);
    let mut similarities = 0;
    let mut restarts = 0;
    let mut nodes_visited = 0;
    for s in searches {
        for n in s.results.iter() {
            results.insert(*n);
        }
        similarities += s.similarities;
        restarts += s.restarts;
        nodes_visited += s.nodes_visited;
    }
    SearchReport {
        results,
        similarities_computed: similarities,
        restarts,
        nodes_visited,
    }
}

/// Search all partitions independently (one worker per partition) and keep
/// the best k of the combined candidates. Each partition's walk gets budget
/// floor(|partition| / speedup) and never crosses partition borders.
pub fn distributed_search(
    pg: &PartitionedGraph,
    query: &Payload,
    params: &SearchParams,
) -> Result<SearchReport> {
    params.validate()?;
    let searches = search_partitions(pg, query, params, pg.parts.len())?;
    Ok(merge_reports(params.k_results, &searches))
}

/// Insert one item: distributed search finds its neighbor list, the update
/// walk is routed partition by partition (each worker re-scores and mutates
/// only nodes it owns, reusing its search cache), the node lands in the
/// partition of its most similar medoid, and medoids are periodically
/// recomputed when an interval is configured.
pub fn distributed_online_add(
    pg: &mut PartitionedGraph,
    new_item: Item,
    params: &UpdateParams,
    config: &DistributedConfig,
) -> Result<AddOutcome> {
    params.validate()?;
    config.validate(pg.parts.len())?;
    if pg.contains_node(new_item.id) {
        return Err(Error::DuplicateId(new_item.id));
    }

    let mut search_params = params.search.clone();
    search_params.k_results = pg.k;
    let searches = search_partitions(pg, &new_item.payload, &search_params, config.workers)?;
    let neighbors = merge_reports(pg.k, &searches).results;
    let similarities_search: u64 = searches.iter().map(|s| s.similarities).sum();
    let mut caches: Vec<HashMap<ItemId, f64>> = searches.into_iter().map(|s| s.cache).collect();

    // Breadth-first update rounds, owner-routed: the coordinator keeps the
    // frontier and the globally-seen set; owners score their nodes, splice
    // the new node into their lists, and report the neighbors to enqueue.
    let mut frontier: Vec<ItemId> = neighbors
        .iter()
        .map(|n| n.node_id)
        .filter(|&id| id != new_item.id && pg.contains_node(id))
        .collect();
    let mut seen: HashSet<ItemId> = frontier.iter().copied().collect();
    let mut similarities_update = 0u64;
    for _ in 0..params.depth {
        if frontier.is_empty() {
            break;
        }
        let mut per_part: Vec<Vec<ItemId>> = vec![Vec::new(); pg.parts.len()];
        for &id in &frontier {
            let owner = pg.partition_of(id).expect("frontier nodes are owned");
            per_part[owner].push(id);
        }
        let new_id = new_item.id;
        let query = &new_item.payload;
        let measure = pg.measure;
        let assignments = &per_part;
        let round: Vec<(u64, Vec<ItemId>, HashMap<ItemId, f64>)> = {
            let caches_in: Vec<HashMap<ItemId, f64>> =
                caches.iter_mut().map(std::mem::take).collect();
            let caches_slot: Vec<std::sync::Mutex<Option<HashMap<ItemId, f64>>>> =
                caches_in.into_iter().map(|c| std::sync::Mutex::new(Some(c))).collect();
            let caches_ref = &caches_slot;
            scatter_mut(&mut pg.parts, config.workers, move |index, part| {
                let mine = &assignments[index];
                let cache = caches_ref[index]
                    .lock()
                    .expect("cache mutex")
                    .take()
                    .expect("each partition runs once per round");
                let mut scorer = QueryScorer::with_cache(
                    part.graph.items(),
                    query,
                    measure,
                    SimilarityCounter::unbounded(),
                    cache,
                );
                let before = scorer.similarities_computed();
                let mut outgoing = Vec::new();
                let mut scored = Vec::with_capacity(mine.len());
                for &node in mine {
                    let list = part.graph.node(node).expect("owner holds its nodes");
                    for nb in list.iter() {
                        if nb.node_id != new_id {
                            outgoing.push(nb.node_id);
                        }
                    }
                    scored.push((node, scorer.score(node)?));
                }
                let computed = scorer.similarities_computed() - before;
                let cache = scorer.into_cache();
                for (node, s) in scored {
                    part.graph
                        .node_mut(node)
                        .expect("owner holds its nodes")
                        .insert(Neighbor::new(new_id, s));
                }
                Ok((computed, outgoing, cache))
            })?
        };
        let mut next = Vec::new();
        for (index, (computed, outgoing, cache)) in round.into_iter().enumerate() {
            similarities_update += computed;
            caches[index] = cache;
            for id in outgoing {
                if seen.insert(id) {
                    next.push(id);
                }
            }
        }
        frontier = next;
    }

    // Placement: ask each partition for the similarity to its medoid (the
    // answer is often already in its cache) and take the best.
    let mut similarities_placement = 0u64;
    let mut best: Option<(f64, usize)> = None;
    for (index, part) in pg.parts.iter().enumerate() {
        let cache = std::mem::take(&mut caches[index]);
        let mut scorer = QueryScorer::with_cache(
            part.graph.items(),
            &new_item.payload,
            pg.measure,
            SimilarityCounter::unbounded(),
            cache,
        );
        let before = scorer.similarities_computed();
        let sim = scorer.score(part.medoid)?;
        similarities_placement += scorer.similarities_computed() - before;
        caches[index] = scorer.into_cache();
        let better = match best {
            None => true,
            Some((b, _)) => sim > b,
        };
        if better {
            best = Some((sim, index));
        }
    }
    let (_, target) = best.expect("at least one partition");
    pg.parts[target].graph.add_node(new_item, neighbors)?;
    pg.adds_since_refresh += 1;

    let mut refreshed = false;
    if let Some(interval) = config.medoid_update_interval {
        if pg.adds_since_refresh as f64 >= interval * pg.nodes_at_last_refresh as f64 {
            refresh_medoids(pg)?;
            refreshed = true;
        }
    }

    Ok(AddOutcome {
        partition: target,
        similarities_search,
        similarities_update,
        similarities_placement,
        refreshed_medoids: refreshed,
    })
}

/// One medoid maintenance cycle: recompute each cluster's medoid from hop
/// distances, then re-run the greedy assignment at the grown size and
/// re-split the partitions along it.
fn refresh_medoids(pg: &mut PartitionedGraph) -> Result<()> {
    let global = pg.to_global()?;
    let current = Partitioning {
        clusters: pg
            .parts
            .iter()
            .map(|part| cluster_of(part))
            .collect::<Result<Vec<_>>>()?,
        assignment: Default::default(),
        capacity: pg.partition_params.capacity(global.len()),
        iterations: 0,
    };
    let medoids = update_medoids(&global, &current);
    let assigned = assign_step(global.items(), &medoids, &pg.partition_params, pg.measure)?;
    let rebuilt = PartitionedGraph::from_partitioning(
        &global,
        &assigned,
        pg.partition_params.clone(),
    )?;
    pg.parts = rebuilt.parts;
    pg.nodes_at_last_refresh = global.len();
    pg.adds_since_refresh = 0;
    Ok(())
}

fn cluster_of(part: &Partition) -> Result<crate::partition::ClusterState> {
    crate::partition::ClusterState::from_members(part.medoid, part.graph.ids().collect())
}

/// Build a partitioned graph from a stream: brute-force seed graph over the
/// first `seed_size` items, balanced partitioning, then distributed
/// insertion of the rest.
pub fn build_distributed(
    items: &ItemStore,
    k: usize,
    measure: SimilarityMeasure,
    params: &UpdateParams,
    partition_params: &PartitionParams,
    config: &DistributedConfig,
    seed_size: usize,
) -> Result<(PartitionedGraph, DistributedBuildStats)> {
    params.validate()?;
    let seed_size = seed_size.max(k + 1).max(partition_params.p);
    if items.len() <= k {
        return Err(Error::InsufficientItems { n: items.len(), k });
    }
    let seed_items = ItemStore::from_items(items.iter().take(seed_size).cloned())?;
    let seed_graph = crate::oracle::brute_build(&seed_items, k, measure)?;
    let mut pg = PartitionedGraph::build(&seed_graph, partition_params.clone())?;
    let mut stats = DistributedBuildStats::default();
    for item in items.iter().skip(seed_size) {
        let mut item_params = params.clone();
        item_params.search.rng_seed = crate::mix_seed(params.search.rng_seed, item.id);
        let outcome = distributed_online_add(&mut pg, item.clone(), &item_params, config)?;
        stats.absorb(&outcome);
    }
    Ok((pg, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{generate_synthetic, SyntheticConfig};
    use crate::online::build_online;
    use crate::oracle::{brute_build, brute_search};
    use crate::search::ignns_search;

    fn searchable(n: usize, k: usize, seed: u64) -> (Graph, ItemStore) {
        let items = generate_synthetic(&SyntheticConfig::new(n, seed)).unwrap();
        let graph = brute_build(&items, k, SimilarityMeasure::EuclideanInverse).unwrap();
        (graph, items)
    }

    #[test]
    fn single_partition_search_equals_sequential() {
        let (graph, _) = searchable(120, 5, 21);
        let pg = PartitionedGraph::build(&graph, PartitionParams::new(1, 1.0, 3, 5)).unwrap();
        let query = Payload::Vector(vec![30.0, 60.0, 10.0]);
        let params = SearchParams::new(5, 4.0, 1.2, 33);
        let distributed = distributed_search(&pg, &query, &params).unwrap();
        let sequential = ignns_search(&graph, &query, &params).unwrap();
        assert_eq!(distributed, sequential);
    }

    #[test]
    fn exhaustive_distributed_search_is_exact() {
        let (graph, items) = searchable(150, 5, 8);
        let query = Item::vector(9000, vec![45.0, 45.0, 45.0]);
        let truth = brute_search(&items, &query, 5, SimilarityMeasure::EuclideanInverse).unwrap();
        for p in [2usize, 3] {
            let pg =
                PartitionedGraph::build(&graph, PartitionParams::new(p, 1.2, 3, 11)).unwrap();
            let params = SearchParams::new(5, 1.0, 5.0, 77);
            let report = distributed_search(&pg, &query.payload, &params).unwrap();
            assert_eq!(report.results.entries(), truth.entries(), "p={p}");
            assert_eq!(report.similarities_computed, 150);
        }
    }

    #[test]
    fn local_budgets_sum_to_the_global_budget() {
        let (graph, _) = searchable(200, 5, 3);
        let pg = PartitionedGraph::build(&graph, PartitionParams::new(4, 1.1, 3, 2)).unwrap();
        let query = Payload::Vector(vec![10.0, 90.0, 50.0]);
        let params = SearchParams::new(5, 2.0, 1.2, 5);
        let report = distributed_search(&pg, &query, &params).unwrap();
        let expected: u64 = pg
            .partitions()
            .iter()
            .map(|part| (part.graph.len() as f64 / 2.0).floor() as u64)
            .sum();
        assert!(report.similarities_computed <= expected);
        assert!(expected <= 100 + pg.partition_count() as u64);
    }

    #[test]
    fn merge_keeps_global_top_k() {
        let (graph, _) = searchable(150, 5, 14);
        let pg = PartitionedGraph::build(&graph, PartitionParams::new(3, 1.2, 3, 6)).unwrap();
        let query = Payload::Vector(vec![70.0, 20.0, 40.0]);
        let params = SearchParams::new(5, 1.0, 5.0, 13);
        let searches = search_partitions(&pg, &query, &params, 3).unwrap();
        let merged = merge_reports(5, &searches);
        let mut flat: Vec<Neighbor> = searches
            .iter()
            .flat_map(|s| s.results.iter().copied())
            .collect();
        flat.sort_by(crate::neighbor::rank_cmp);
        flat.truncate(5);
        assert_eq!(merged.results.entries(), flat.as_slice());
    }

    #[test]
    fn single_partition_add_equals_sequential_build() {
        let items = generate_synthetic(&SyntheticConfig::new(60, 17)).unwrap();
        let search = SearchParams::new(4, 1.0, 5.0, 99);
        let params = UpdateParams::new(3, search);
        let (sequential, _) = build_online(
            &items,
            4,
            SimilarityMeasure::EuclideanInverse,
            &params,
            20,
        )
        .unwrap();
        let config = DistributedConfig::new(1, None);
        let (pg, stats) = build_distributed(
            &items,
            4,
            SimilarityMeasure::EuclideanInverse,
            &params,
            &PartitionParams::new(1, 1.0, 2, 4),
            &config,
            20,
        )
        .unwrap();
        let global = pg.to_global().unwrap();
        assert_eq!(global.len(), sequential.len());
        for (id, list) in sequential.nodes() {
            assert_eq!(global.node(id).unwrap().entries(), list.entries(), "node {id}");
        }
        assert_eq!(stats.nodes_added, 40);
    }

    #[test]
    fn new_item_matching_a_medoid_lands_with_it() {
        let (graph, items) = searchable(80, 4, 25);
        let mut pg = PartitionedGraph::build(&graph, PartitionParams::new(4, 1.3, 3, 9)).unwrap();
        let (j, medoid) = (2usize, pg.medoids()[2]);
        let payload = items.get(medoid).unwrap().payload.clone();
        let params = UpdateParams::new(2, SearchParams::new(4, 2.0, 1.2, 51));
        let outcome = distributed_online_add(
            &mut pg,
            Item { id: 5000, payload },
            &params,
            &DistributedConfig::new(2, None),
        )
        .unwrap();
        assert_eq!(outcome.partition, j);
        assert!(pg.partitions()[j].graph.contains_node(5000));
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let items = generate_synthetic(&SyntheticConfig::new(90, 41)).unwrap();
        let params = UpdateParams::new(2, SearchParams::new(4, 2.0, 1.2, 7));
        let pparams = PartitionParams::new(3, 1.2, 2, 3);
        let mut globals = Vec::new();
        for workers in [1usize, 2, 3] {
            let (pg, _) = build_distributed(
                &items,
                4,
                SimilarityMeasure::EuclideanInverse,
                &params,
                &pparams,
                &DistributedConfig::new(workers, Some(0.25)),
                30,
            )
            .unwrap();
            globals.push(pg.to_global().unwrap());
        }
        for g in &globals[1..] {
            assert_eq!(g.len(), globals[0].len());
            for (id, list) in globals[0].nodes() {
                assert_eq!(g.node(id).unwrap().entries(), list.entries());
            }
        }
    }

    #[test]
    fn medoid_refresh_keeps_the_graph_complete_and_balanced() {
        let items = generate_synthetic(&SyntheticConfig::new(100, 53)).unwrap();
        let params = UpdateParams::new(2, SearchParams::new(4, 2.0, 1.2, 19));
        let pparams = PartitionParams::new(4, 1.2, 2, 13);
        let (mut pg, stats) = build_distributed(
            &items,
            4,
            SimilarityMeasure::EuclideanInverse,
            &params,
            &pparams,
            &DistributedConfig::new(4, Some(0.1)),
            40,
        )
        .unwrap();
        assert!(stats.medoid_refreshes >= 2);
        assert_eq!(pg.len(), 100);
        // a refresh rebalances to the capacity of the grown node count
        refresh_medoids(&mut pg).unwrap();
        let capacity = pparams.capacity(100);
        for part in pg.partitions() {
            assert!(part.graph.len() <= capacity);
            assert!(part.graph.contains_node(part.medoid));
        }
        let global = pg.to_global().unwrap();
        assert_eq!(global.len(), 100);
    }

    #[test]
    fn rejects_duplicate_ids_and_oversized_worker_pools() {
        let (graph, _) = searchable(40, 3, 2);
        let mut pg = PartitionedGraph::build(&graph, PartitionParams::new(2, 1.2, 2, 1)).unwrap();
        let params = UpdateParams::new(2, SearchParams::new(3, 2.0, 1.2, 3));
        let dup = distributed_online_add(
            &mut pg,
            Item::vector(0, vec![1.0, 2.0, 3.0]),
            &params,
            &DistributedConfig::new(2, None),
        );
        assert!(matches!(dup.unwrap_err(), Error::DuplicateId(0)));
        let oversized = distributed_online_add(
            &mut pg,
            Item::vector(900, vec![1.0, 2.0, 3.0]),
            &params,
            &DistributedConfig::new(5, None),
        );
        assert!(matches!(oversized.unwrap_err(), Error::InvalidParam(_)));
    }
}
