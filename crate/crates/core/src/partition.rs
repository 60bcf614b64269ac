use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::item::{ItemId, ItemStore, Payload};
use crate::similarity::SimilarityMeasure;

/// Knobs of the balanced k-medoids partitioner.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionParams {
    pub p: usize,
    pub imbalance: f64,
    pub max_iterations: usize,
    pub rng_seed: u64,
}

impl PartitionParams {
    pub fn new(p: usize, imbalance: f64, max_iterations: usize, rng_seed: u64) -> Self {
        PartitionParams {
            p,
            imbalance,
            max_iterations,
            rng_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.p == 0 {
            return Err(Error::InvalidParam("p must be at least 1".into()));
        }
        if !(self.imbalance >= 1.0) {
            return Err(Error::InvalidParam("imbalance must be at least 1".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParam(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }

    /// Hard per-cluster capacity: ceil(n * imbalance / p). The tiny slack
    /// keeps binary rounding of the product from bumping an exact integer
    /// (2000 * 1.1 / 8 must give 275, not 276).
    pub fn capacity(&self, n: usize) -> usize {
        ((n as f64 * self.imbalance / self.p as f64) - 1e-9).ceil() as usize
    }
}

/// One cluster: its representative node and its members.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterState {
    pub medoid_id: ItemId,
    members: BTreeSet<ItemId>,
}

impl ClusterState {
    fn seeded(medoid_id: ItemId) -> Self {
        let mut members = BTreeSet::new();
        members.insert(medoid_id);
        ClusterState { medoid_id, members }
    }

    pub(crate) fn from_members(medoid_id: ItemId, members: BTreeSet<ItemId>) -> Result<Self> {
        if !members.contains(&medoid_id) {
            return Err(Error::InvalidParam(format!(
                "medoid {medoid_id} is not a cluster member"
            )));
        }
        Ok(ClusterState { medoid_id, members })
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &BTreeSet<ItemId> {
        &self.members
    }

    pub fn contains(&self, id: ItemId) -> bool {
        self.members.contains(&id)
    }
}

/// Capacity penalty: empty clusters weigh 1, full clusters 0.
pub fn weight(cluster: &ClusterState, capacity: usize) -> f64 {
    1.0 - cluster.size() as f64 / capacity as f64
}

/// A complete disjoint assignment of nodes to p clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct Partitioning {
    pub clusters: Vec<ClusterState>,
    pub assignment: BTreeMap<ItemId, usize>,
    pub capacity: usize,
    pub iterations: usize,
}

impl Partitioning {
    pub fn medoids(&self) -> Vec<ItemId> {
        self.clusters.iter().map(|c| c.medoid_id).collect()
    }
}

/// Greedily assign every item to the eligible cluster maximizing
/// similarity-to-medoid times the capacity weight. Items are swept in
/// ascending id order and the weight always reflects the cluster's current
/// size, so early assignments shape later ones; clusters at capacity stop
/// being eligible. Medoids are placed in their own clusters up front.
pub fn assign_step(
    items: &ItemStore,
    medoids: &[ItemId],
    params: &PartitionParams,
    measure: SimilarityMeasure,
) -> Result<Partitioning> {
    params.validate()?;
    if medoids.len() != params.p {
        return Err(Error::InvalidParam(format!(
            "expected {} medoids, got {}",
            params.p,
            medoids.len()
        )));
    }
    let distinct: BTreeSet<ItemId> = medoids.iter().copied().collect();
    if distinct.len() != medoids.len() {
        return Err(Error::InvalidParam("medoids must be distinct".into()));
    }
    let n = items.len();
    let capacity = params.capacity(n);
    if params.p * capacity < n {
        return Err(Error::CapacityInfeasible {
            p: params.p,
            capacity,
            n,
        });
    }
    let medoid_payloads: Vec<&Payload> = medoids
        .iter()
        .map(|&m| items.require(m).map(|i| &i.payload))
        .collect::<Result<_>>()?;

    let mut clusters: Vec<ClusterState> =
        medoids.iter().map(|&m| ClusterState::seeded(m)).collect();
    let mut assignment: BTreeMap<ItemId, usize> = medoids
        .iter()
        .enumerate()
        .map(|(t, &m)| (m, t))
        .collect();

    for item in items.iter() {
        if assignment.contains_key(&item.id) {
            continue;
        }
        let mut best: Option<(f64, usize, ItemId, usize)> = None;
        for (t, cluster) in clusters.iter().enumerate() {
            let size = cluster.size();
            if size >= capacity {
                continue;
            }
            let sim = measure.evaluate(medoid_payloads[t], &item.payload)?;
            let score = sim * (1.0 - size as f64 / capacity as f64);
            let better = match best {
                None => true,
                Some((b_score, b_size, b_medoid, _)) => {
                    score > b_score
                        || (score == b_score
                            && (size < b_size || (size == b_size && cluster.medoid_id < b_medoid)))
                }
            };
            if better {
                best = Some((score, size, cluster.medoid_id, t));
            }
        }
        let (_, _, _, t) = best.ok_or(Error::CapacityInfeasible {
            p: params.p,
            capacity,
            n,
        })?;
        clusters[t].members.insert(item.id);
        assignment.insert(item.id, t);
    }
    Ok(Partitioning {
        clusters,
        assignment,
        capacity,
        iterations: 0,
    })
}

/// Per cluster, pick the member minimizing the summed hop distances to all
/// other members, where hops run along the cluster's own edges ignoring
/// direction and an unreachable pair costs |cluster| hops. Ties go to the
/// smaller id.
pub fn update_medoids(graph: &Graph, partitioning: &Partitioning) -> Vec<ItemId> {
    partitioning
        .clusters
        .par_iter()
        .map(|cluster| cluster_medoid(graph, cluster))
        .collect()
}

fn cluster_medoid(graph: &Graph, cluster: &ClusterState) -> ItemId {
    let members: Vec<ItemId> = cluster.members().iter().copied().collect();
    let index: HashMap<ItemId, usize> = members
        .iter()
        .enumerate()
        .map(|(i, &id)| (id, i))
        .collect();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); members.len()];
    for (i, &id) in members.iter().enumerate() {
        if let Some(list) = graph.node(id) {
            for nb in list.iter() {
                if let Some(&j) = index.get(&nb.node_id) {
                    adjacency[i].push(j);
                    adjacency[j].push(i);
                }
            }
        }
    }
    let penalty = members.len() as u64;
    let mut best: Option<(u64, ItemId)> = None;
    let mut dist = vec![u64::MAX; members.len()];
    let mut queue = VecDeque::new();
    for (i, &candidate) in members.iter().enumerate() {
        dist.fill(u64::MAX);
        dist[i] = 0;
        queue.clear();
        queue.push_back(i);
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if dist[v] == u64::MAX {
                    dist[v] = dist[u] + 1;
                    queue.push_back(v);
                }
            }
        }
        let total: u64 = dist
            .iter()
            .map(|&d| if d == u64::MAX { penalty } else { d })
            .sum();
        let better = match best {
            None => true,
            Some((b_total, b_id)) => total < b_total || (total == b_total && candidate < b_id),
        };
        if better {
            best = Some((total, candidate));
        }
    }
    best.expect("clusters are non-empty").1
}

/// Balanced k-medoids over a graph: seed p random medoids, then alternate
/// assignment and medoid update until the medoids stop moving or
/// max_iterations passes. The returned clusters carry the updated medoids
/// (each updated medoid is a member of its own cluster by construction).
pub fn partition_graph(graph: &Graph, params: &PartitionParams) -> Result<Partitioning> {
    params.validate()?;
    let n = graph.len();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if params.p > n {
        return Err(Error::InvalidParam(format!(
            "cannot split {n} nodes into {} partitions",
            params.p
        )));
    }
    let ids: Vec<ItemId> = graph.ids().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut medoids: Vec<ItemId> = rand::seq::index::sample(&mut rng, n, params.p)
        .iter()
        .map(|i| ids[i])
        .collect();

    let mut iterations = 0;
    loop {
        let mut partitioning = assign_step(graph.items(), &medoids, params, graph.measure())?;
        iterations += 1;
        let updated = update_medoids(graph, &partitioning);
        for (cluster, &m) in partitioning.clusters.iter_mut().zip(&updated) {
            cluster.medoid_id = m;
        }
        partitioning.iterations = iterations;
        let converged = updated == medoids;
        medoids = updated;
        if converged || iterations >= params.max_iterations {
            return Ok(partitioning);
        }
    }
}

/// Write the assignment as `node_id<tab>cluster_index` lines, ascending ids.
pub fn save_partitioning(partitioning: &Partitioning, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for (id, cluster) in &partitioning.assignment {
        writeln!(out, "{id}\t{cluster}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Read back `node_id<tab>cluster_index` lines.
pub fn load_assignment(path: impl AsRef<Path>) -> Result<Vec<(ItemId, usize)>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut pairs = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (id, cluster) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, lineno, "expected id<tab>cluster"))?;
        pairs.push((
            id.parse()
                .map_err(|_| Error::parse(path, lineno, "bad node id"))?,
            cluster
                .parse()
                .map_err(|_| Error::parse(path, lineno, "bad cluster index"))?,
        ));
    }
    Ok(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::item::Item;
    use crate::neighbor::{Neighbor, NeighborList};
    use crate::oracle::brute_build;

    fn line_store(n: usize) -> ItemStore {
        ItemStore::from_items((0..n as u64).map(|i| Item::vector(i, vec![i as f64]))).unwrap()
    }

    #[test]
    fn weight_endpoints() {
        let mut cluster = ClusterState::seeded(0);
        cluster.members.remove(&0);
        assert_eq!(weight(&cluster, 10), 1.0);
        for id in 0..10 {
            cluster.members.insert(id);
        }
        assert_eq!(weight(&cluster, 10), 0.0);
        for id in 5..10 {
            cluster.members.remove(&id);
        }
        assert_eq!(weight(&cluster, 10), 0.5);
    }

    #[test]
    fn capacity_arithmetic_stays_exact() {
        let params = PartitionParams::new(8, 1.1, 1, 0);
        assert_eq!(params.capacity(2000), 275);
        let exact = PartitionParams::new(4, 1.0, 1, 0);
        assert_eq!(exact.capacity(100), 25);
        let uneven = PartitionParams::new(3, 1.0, 1, 0);
        assert_eq!(uneven.capacity(10), 4);
    }

    #[test]
    fn single_partition_takes_everything() {
        let items = line_store(7);
        let params = PartitionParams::new(1, 1.0, 1, 0);
        let part = assign_step(&items, &[3], &params, SimilarityMeasure::EuclideanInverse)
            .unwrap();
        assert_eq!(part.clusters[0].size(), 7);
        assert!(part.assignment.values().all(|&t| t == 0));
    }

    #[test]
    fn tight_capacity_forces_perfect_balance() {
        let items = line_store(12);
        let params = PartitionParams::new(3, 1.0, 1, 0);
        let part = assign_step(
            &items,
            &[0, 6, 11],
            &params,
            SimilarityMeasure::EuclideanInverse,
        )
        .unwrap();
        assert_eq!(part.capacity, 4);
        for cluster in &part.clusters {
            assert_eq!(cluster.size(), 4);
        }
        assert_eq!(part.assignment.len(), 12);
    }

    #[test]
    fn separated_blobs_stay_whole() {
        let mut items = ItemStore::new();
        for i in 0..10u64 {
            items.insert(Item::vector(i, vec![i as f64 * 0.1])).unwrap();
        }
        for i in 10..20u64 {
            items
                .insert(Item::vector(i, vec![100.0 + (i - 10) as f64 * 0.1]))
                .unwrap();
        }
        let params = PartitionParams::new(2, 1.0, 1, 0);
        let part = assign_step(
            &items,
            &[4, 14],
            &params,
            SimilarityMeasure::EuclideanInverse,
        )
        .unwrap();
        for id in 0..10u64 {
            assert_eq!(part.assignment[&id], 0);
        }
        for id in 10..20u64 {
            assert_eq!(part.assignment[&id], 1);
        }
    }

    #[test]
    fn medoids_own_cluster_even_under_pressure() {
        // One far-away medoid: the greedy sweep would otherwise leave it
        // stranded in a full cluster.
        let mut items = line_store(5);
        items.insert(Item::vector(50, vec![50.0])).unwrap();
        let params = PartitionParams::new(2, 1.0, 1, 0);
        let part = assign_step(&items, &[2, 50], &params, SimilarityMeasure::EuclideanInverse)
            .unwrap();
        for (t, cluster) in part.clusters.iter().enumerate() {
            assert!(cluster.contains(cluster.medoid_id));
            assert_eq!(part.assignment[&cluster.medoid_id], t);
        }
    }

    // undirected view: path 0 - 1 - 2, plus node 3 pointing at 0
    fn path_graph() -> Graph {
        let mut g = Graph::new(1, SimilarityMeasure::EuclideanInverse);
        let edge = |to: u64| {
            let mut l = NeighborList::new(1);
            l.insert(Neighbor::new(to, 0.5));
            l
        };
        g.add_node(Item::vector(0, vec![0.0]), edge(1)).unwrap();
        g.add_node(Item::vector(1, vec![1.0]), edge(2)).unwrap();
        g.add_node(Item::vector(2, vec![2.0]), edge(1)).unwrap();
        g.add_node(Item::vector(3, vec![50.0]), edge(0)).unwrap();
        g
    }

    #[test]
    fn path_center_becomes_medoid() {
        let g = path_graph();
        let mut members = BTreeSet::new();
        members.extend([0u64, 1, 2]);
        let cluster = ClusterState {
            medoid_id: 0,
            members,
        };
        let part = Partitioning {
            clusters: vec![cluster],
            assignment: BTreeMap::new(),
            capacity: 3,
            iterations: 0,
        };
        assert_eq!(update_medoids(&g, &part), vec![1]);
    }

    #[test]
    fn unreachable_members_pay_the_cluster_penalty() {
        let mut g = Graph::new(1, SimilarityMeasure::EuclideanInverse);
        let edge = |to: u64| {
            let mut l = NeighborList::new(1);
            l.insert(Neighbor::new(to, 0.5));
            l
        };
        g.add_node(Item::vector(0, vec![0.0]), edge(1)).unwrap();
        g.add_node(Item::vector(1, vec![1.0]), edge(2)).unwrap();
        g.add_node(Item::vector(2, vec![2.0]), edge(1)).unwrap();
        g.add_node(Item::vector(3, vec![50.0]), edge(4)).unwrap();
        let mut members = BTreeSet::new();
        members.extend([0u64, 1, 2, 3]);
        let part = Partitioning {
            clusters: vec![ClusterState {
                medoid_id: 0,
                members,
            }],
            assignment: BTreeMap::new(),
            capacity: 4,
            iterations: 0,
        };
        // sums: node0 = 1+2+4 = 7, node1 = 1+1+4 = 6, node2 = 2+1+4 = 7,
        // node3 = 4+4+4 = 12
        assert_eq!(update_medoids(&g, &part), vec![1]);
    }

    #[test]
    fn singleton_cluster_keeps_its_member() {
        let g = path_graph();
        let mut members = BTreeSet::new();
        members.insert(3u64);
        let part = Partitioning {
            clusters: vec![ClusterState {
                medoid_id: 3,
                members,
            }],
            assignment: BTreeMap::new(),
            capacity: 1,
            iterations: 0,
        };
        assert_eq!(update_medoids(&g, &part), vec![3]);
    }

    #[test]
    fn medoid_update_matches_all_pairs_oracle() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let items = ItemStore::from_items(
            (0..30u64).map(|i| Item::vector(i, vec![rng.random::<f64>() * 20.0])),
        )
        .unwrap();
        let graph = brute_build(&items, 3, SimilarityMeasure::EuclideanInverse).unwrap();
        let members: BTreeSet<ItemId> = items.ids().collect();
        let part = Partitioning {
            clusters: vec![ClusterState {
                medoid_id: 0,
                members: members.clone(),
            }],
            assignment: BTreeMap::new(),
            capacity: 30,
            iterations: 0,
        };

        // independent oracle: dense all-pairs shortest paths by repeated
        // relaxation over the undirected edge set
        let ids: Vec<ItemId> = members.iter().copied().collect();
        let pos: HashMap<ItemId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let m = ids.len();
        let mut d = vec![vec![u64::MAX; m]; m];
        for i in 0..m {
            d[i][i] = 0;
        }
        for (id, list) in graph.nodes() {
            for nb in list.iter() {
                let (i, j) = (pos[&id], pos[&nb.node_id]);
                d[i][j] = 1;
                d[j][i] = 1;
            }
        }
        for mid in 0..m {
            for i in 0..m {
                for j in 0..m {
                    if d[i][mid] != u64::MAX && d[mid][j] != u64::MAX {
                        d[i][j] = d[i][j].min(d[i][mid] + d[mid][j]);
                    }
                }
            }
        }
        let oracle = ids
            .iter()
            .enumerate()
            .map(|(i, &id)| {
                let total: u64 = d[i]
                    .iter()
                    .map(|&x| if x == u64::MAX { m as u64 } else { x })
                    .sum();
                (total, id)
            })
            .min()
            .unwrap()
            .1;
        assert_eq!(update_medoids(&graph, &part), vec![oracle]);
    }

    #[test]
    fn full_partitioning_is_balanced_and_deterministic() {
        let items = line_store(60);
        let graph = brute_build(&items, 4, SimilarityMeasure::EuclideanInverse).unwrap();
        let params = PartitionParams::new(4, 1.1, 5, 9);
        let a = partition_graph(&graph, &params).unwrap();
        let b = partition_graph(&graph, &params).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.capacity, 17);
        let mut seen = BTreeSet::new();
        for cluster in &a.clusters {
            assert!(cluster.size() <= 17);
            assert!(cluster.contains(cluster.medoid_id));
            for &id in cluster.members() {
                assert!(seen.insert(id));
            }
        }
        assert_eq!(seen.len(), 60);
        assert!(a.iterations >= 1 && a.iterations <= 5);
    }

    #[test]
    fn assignment_file_round_trips() {
        let items = line_store(10);
        let params = PartitionParams::new(2, 1.2, 1, 1);
        let part = assign_step(&items, &[2, 7], &params, SimilarityMeasure::EuclideanInverse)
            .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("parts.tsv");
        save_partitioning(&part, &path).unwrap();
        let pairs = load_assignment(&path).unwrap();
        assert_eq!(pairs.len(), 10);
        for (id, cluster) in pairs {
            assert_eq!(part.assignment[&id], cluster);
        }
    }
}
