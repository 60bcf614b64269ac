//! End-to-end acceptance checks. Each test prints one PASS line; a failure
//! panics with the measured numbers so the miss is visible.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use knngf::datasets::{generate_synthetic, SyntheticConfig};
use knngf::distributed::{
    build_distributed, distributed_online_add, distributed_search, DistributedConfig,
    PartitionedGraph,
};
use knngf::metrics::{correct_edges, quality_factor, recall};
use knngf::online::{build_online, UpdateParams};
use knngf::oracle::{brute_build, brute_search};
use knngf::partition::{partition_graph, PartitionParams};
use knngf::search::{eager_speedup_model, gnns_search, ignns_search, SearchParams};
use knngf::{Graph, Item, ItemStore, Payload, SimilarityMeasure};

const EUCLID: SimilarityMeasure = SimilarityMeasure::EuclideanInverse;

fn blob(n: usize, seed: u64) -> ItemStore {
    generate_synthetic(&SyntheticConfig::new(n, seed)).unwrap()
}

/// One Gaussian cluster instead of five: hop neighbourhoods keep growing
/// with radius, so deeper update frontiers always reach fresh nodes.
fn unimodal(n: usize, seed: u64) -> ItemStore {
    let mut config = SyntheticConfig::new(n, seed);
    config.centers = 1;
    generate_synthetic(&config).unwrap()
}

fn split(items: &ItemStore, n: usize) -> (ItemStore, Vec<Item>) {
    let head = ItemStore::from_items(items.iter().take(n).cloned()).unwrap();
    let tail = items.iter().skip(n).cloned().collect();
    (head, tail)
}

fn assert_graphs_identical(got: &Graph, want: &Graph) {
    assert_eq!(got.k(), want.k());
    assert!(got.ids().eq(want.ids()), "node sets differ");
    for (id, want_list) in want.nodes() {
        let got_list = got.node(id).unwrap();
        assert_eq!(
            got_list.entries(),
            want_list.entries(),
            "neighbour lists differ at node {id}"
        );
    }
}

/// Longest shortest path over the graph's edges taken as undirected;
/// `usize::MAX` when disconnected.
fn undirected_diameter(graph: &Graph) -> usize {
    let mut adjacency: HashMap<u64, BTreeSet<u64>> = HashMap::new();
    for (id, list) in graph.nodes() {
        for n in list.iter() {
            adjacency.entry(id).or_default().insert(n.node_id);
            adjacency.entry(n.node_id).or_default().insert(id);
        }
    }
    let mut diameter = 0usize;
    for start in graph.ids() {
        let mut dist: HashMap<u64, usize> = HashMap::from([(start, 0)]);
        let mut queue = VecDeque::from([start]);
        while let Some(node) = queue.pop_front() {
            let d = dist[&node];
            for &next in adjacency.get(&node).into_iter().flatten() {
                if !dist.contains_key(&next) {
                    dist.insert(next, d + 1);
                    queue.push_back(next);
                }
            }
        }
        if dist.len() < graph.len() {
            return usize::MAX;
        }
        diameter = diameter.max(*dist.values().max().unwrap());
    }
    diameter
}

#[test]
fn speedup_model_matches_reference_table() {
    let start = Instant::now();
    let table = [
        (4, 2, 1.5, 2.66),
        (10, 2, 2.14, 4.66),
        (10, 3, 3.88, 2.57),
        (10, 4, 5.77, 1.73),
    ];
    for (k, d, want_es, want_speedup) in table {
        let model = eager_speedup_model(k, d);
        assert!(
            (model.similarities_per_step - want_es).abs() <= 0.01,
            "e_s for k={k}, d={d}: got {}, want {want_es}",
            model.similarities_per_step
        );
        assert!(
            (model.speedup - want_speedup).abs() <= 0.01,
            "speedup for k={k}, d={d}: got {}, want {want_speedup}",
            model.speedup
        );
    }
    assert!(start.elapsed().as_secs_f64() < 1.0);
    println!("PASS [1/10] eager-descent cost model matches its reference table within 0.01");
}

#[test]
fn distributed_exhaustive_search_equals_brute_force() {
    let start = Instant::now();
    let items = blob(550, 11);
    let (graph_items, queries) = split(&items, 500);
    let queries = &queries[..50];
    let graph = brute_build(&graph_items, 10, EUCLID).unwrap();
    for p in [1usize, 2, 4] {
        let pg = PartitionedGraph::build(&graph, PartitionParams::new(p, 1.2, 5, 17 + p as u64))
            .unwrap();
        for query in queries {
            let want = brute_search(&graph_items, query, 10, EUCLID).unwrap();
            let params = SearchParams::new(10, 1.0, 5.0, query.id);
            let got = distributed_search(&pg, &query.payload, &params).unwrap();
            assert_eq!(
                got.results.entries(),
                want.entries(),
                "p={p}, query {}",
                query.id
            );
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "took {elapsed:.1}s, cap is 60s");
    println!("PASS [2/10] exhaustive distributed search returns the exact top-10 at p=1,2,4");
}

#[test]
fn improved_search_never_trails_the_baseline() {
    let start = Instant::now();
    let speedups = [10.0, 20.0, 40.0, 80.0];
    let reps = 10;
    let queries_per_rep = 100;
    let mut gnns_sum = [0.0f64; 4];
    let mut ignns_sum = [0.0f64; 4];
    let mut count = 0usize;
    for rep in 0..reps {
        let items = blob(5000 + queries_per_rep, 1000 + rep);
        let (graph_items, queries) = split(&items, 5000);
        let graph = brute_build(&graph_items, 10, EUCLID).unwrap();
        for query in &queries {
            let truth = brute_search(&graph_items, query, 10, EUCLID).unwrap();
            let seed = (1000 + rep) ^ (query.id.wrapping_mul(7919));
            for (i, &speedup) in speedups.iter().enumerate() {
                let params = SearchParams::new(10, speedup, 5.0, seed);
                let g = gnns_search(&graph, &query.payload, &params).unwrap();
                let ig = ignns_search(&graph, &query.payload, &params).unwrap();
                gnns_sum[i] += recall(&g.results, &truth).unwrap();
                ignns_sum[i] += recall(&ig.results, &truth).unwrap();
            }
        }
        count += queries.len();
    }
    let mut strict_wins = 0;
    for (i, &speedup) in speedups.iter().enumerate() {
        let gnns_mean = gnns_sum[i] / count as f64;
        let ignns_mean = ignns_sum[i] / count as f64;
        assert!(
            ignns_mean >= gnns_mean,
            "at speedup {speedup}: improved {ignns_mean:.4} < baseline {gnns_mean:.4}"
        );
        if ignns_mean > gnns_mean {
            strict_wins += 1;
        }
    }
    assert!(
        strict_wins >= 2,
        "improved search strictly ahead at only {strict_wins} of 4 speedups"
    );
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 600.0, "took {elapsed:.1}s, cap is 600s");
    println!(
        "PASS [3/10] improved search matches or beats the baseline at all 4 speedups \
         (strictly at {strict_wins})"
    );
}

#[test]
fn searches_never_exceed_the_similarity_budget() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xB0D9E7);
    for case in 0..1000u64 {
        let n = rng.random_range(30..=120usize);
        let k = rng.random_range(1..=8usize);
        let budget = rng.random_range(k..=n) as u64;
        let speedup = n as f64 / budget as f64;
        let expansion = [1.0, 1.2, 5.0, 100.0][rng.random_range(0..4usize)];
        let measure = [
            SimilarityMeasure::EuclideanInverse,
            SimilarityMeasure::JaroWinkler,
            SimilarityMeasure::Cosine2Gram,
        ][rng.random_range(0..3usize)];
        let items = if measure.expects_vectors() {
            ItemStore::from_items((0..n as u64).map(|id| {
                Item::vector(id, vec![rng.random::<f64>() * 50.0, rng.random::<f64>() * 50.0])
            }))
            .unwrap()
        } else {
            ItemStore::from_items((0..n as u64).map(|id| {
                let len = rng.random_range(2..=10usize);
                let s: String = (0..len)
                    .map(|_| (b'a' + rng.random_range(0..26u8)) as char)
                    .collect();
                Item::text(id, s)
            }))
            .unwrap()
        };
        let graph = brute_build(&items, k, measure).unwrap();
        let query = if measure.expects_vectors() {
            Payload::Vector(vec![rng.random::<f64>() * 50.0, rng.random::<f64>() * 50.0])
        } else {
            Payload::Text("query".to_string())
        };
        let params = SearchParams::new(k, speedup, expansion, case);
        let report = if case % 2 == 0 {
            gnns_search(&graph, &query, &params).unwrap()
        } else {
            ignns_search(&graph, &query, &params).unwrap()
        };
        let cap = (n as f64 / speedup).floor() as u64;
        assert!(
            report.similarities_computed <= cap,
            "case {case}: {} similarities against a budget of {cap}",
            report.similarities_computed
        );
    }
    println!("PASS [4/10] 1000 randomized searches all stayed within floor(n/speedup)");
}

#[test]
fn partitioning_respects_capacity_and_covers_every_node() {
    let start = Instant::now();
    let items = blob(2000, 5);
    let graph = brute_build(&items, 10, EUCLID).unwrap();
    for seed in 0..10 {
        let params = PartitionParams::new(8, 1.1, 10, seed);
        assert_eq!(params.capacity(2000), 275);
        let partitioning = partition_graph(&graph, &params).unwrap();
        assert_eq!(partitioning.clusters.len(), 8);
        let mut seen = BTreeSet::new();
        for cluster in &partitioning.clusters {
            assert!(
                cluster.size() <= 275,
                "seed {seed}: cluster of {} nodes exceeds 275",
                cluster.size()
            );
            for &id in cluster.members() {
                assert!(seen.insert(id), "seed {seed}: node {id} in two clusters");
            }
        }
        assert!(seen.iter().copied().eq(graph.ids()), "seed {seed}: nodes missing");
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 120.0, "took {elapsed:.1}s, cap is 120s");
    println!("PASS [5/10] 8-way partitioning stays within capacity 275 and covers all nodes, 10 seeds");
}

#[test]
fn online_build_reproduces_the_exact_graph() {
    let start = Instant::now();
    for seed in 0..10 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let items = ItemStore::from_items(
            (0..50u64).map(|id| Item::vector(id, vec![rng.random::<f64>() * 1000.0])),
        )
        .unwrap();
        let reference = brute_build(&items, 10, EUCLID).unwrap();
        let diameter = undirected_diameter(&reference);
        assert!(
            diameter <= 10,
            "seed {seed}: diameter {diameter} exceeds the update depth"
        );
        let params = UpdateParams::new(10, SearchParams::new(10, 1.0, 5.0, seed));
        let (graph, _) = build_online(&items, 10, EUCLID, &params, 11).unwrap();
        assert_graphs_identical(&graph, &reference);
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 10.0, "took {elapsed:.1}s, cap is 10s");
    println!("PASS [6/10] online building reproduces the brute-force graph bit-exactly, 10 seeds");
}

#[test]
fn deeper_updates_cost_more_and_buy_little_beyond_depth_two() {
    let items = unimodal(2000, 77);
    let reference = brute_build(&items, 10, EUCLID).unwrap();
    let mut totals = Vec::new();
    let mut correct = Vec::new();
    for depth in 1..=5usize {
        let params = UpdateParams::new(depth, SearchParams::new(10, 20.0, 5.0, 77));
        let (graph, stats) = build_online(&items, 10, EUCLID, &params, 1000).unwrap();
        totals.push(stats.total_similarities());
        correct.push(correct_edges(&graph, &reference).unwrap());
    }
    for d in 1..totals.len() {
        assert!(
            totals[d] > totals[d - 1],
            "similarity total did not increase from depth {} to {}: {} vs {}",
            d,
            d + 1,
            totals[d - 1],
            totals[d]
        );
    }
    let gain = correct[4] - correct[1];
    assert!(
        gain < 0.10,
        "correct-edges gain from depth 2 to 5 is {:.3} ({:.3} -> {:.3})",
        gain,
        correct[1],
        correct[4]
    );
    println!(
        "PASS [7/10] update cost rises strictly with depth while depth 2->5 buys {:.1} points",
        gain * 100.0
    );
}

#[test]
fn distributed_online_quality_holds_up_over_many_additions() {
    let items = blob(6000, 88);
    let (seed_items, additions) = split(&items, 2000);
    let seed_graph = brute_build(&seed_items, 10, EUCLID).unwrap();
    let mut pg =
        PartitionedGraph::build(&seed_graph, PartitionParams::new(4, 1.2, 10, 88)).unwrap();
    let config = DistributedConfig::new(4, None);
    let mut checkpoints = Vec::new();
    let mut done = 0usize;
    for chunk in additions.chunks(800) {
        for item in chunk {
            let mut params = UpdateParams::new(2, SearchParams::new(10, 4.0, 5.0, 0));
            params.search.rng_seed = 88 ^ item.id.wrapping_mul(7919);
            distributed_online_add(&mut pg, item.clone(), &params, &config).unwrap();
        }
        done += chunk.len();
        let current = ItemStore::from_items(items.iter().take(2000 + done).cloned()).unwrap();
        let reference = brute_build(&current, 10, EUCLID).unwrap();
        checkpoints.push(correct_edges(&pg.to_global().unwrap(), &reference).unwrap());
    }
    for (i, &value) in checkpoints.iter().enumerate() {
        assert!(
            value >= 0.6,
            "checkpoint {}: correct edges {value:.3} below 0.6 (all: {checkpoints:?})",
            i + 1
        );
    }
    let decline = checkpoints.first().unwrap() - checkpoints.last().unwrap();
    assert!(
        decline < 0.15,
        "correct edges fell {:.3} from first to last checkpoint ({checkpoints:?})",
        decline
    );
    println!(
        "PASS [8/10] distributed online quality stays >= 0.6 and declines {:.1} points over 4000 additions",
        decline.max(0.0) * 100.0
    );
}

#[test]
fn medoid_refresh_interval_makes_no_material_difference() {
    let mut with_refresh = Vec::new();
    let mut without = Vec::new();
    for seed in 0..10u64 {
        let items = blob(4000, 900 + seed);
        let reference = brute_build(&items, 10, EUCLID).unwrap();
        for (interval, out) in [
            (Some(0.1), &mut with_refresh),
            (None, &mut without),
        ] {
            let params = UpdateParams::new(2, SearchParams::new(10, 4.0, 5.0, seed));
            let pparams = PartitionParams::new(4, 1.2, 10, seed);
            let config = DistributedConfig::new(4, interval);
            let (pg, _) =
                build_distributed(&items, 10, EUCLID, &params, &pparams, &config, 2000).unwrap();
            out.push(correct_edges(&pg.to_global().unwrap(), &reference).unwrap());
        }
    }
    let range = |values: &[f64]| {
        (
            values.iter().copied().fold(f64::INFINITY, f64::min),
            values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        )
    };
    let (a_min, a_max) = range(&with_refresh);
    let (b_min, b_max) = range(&without);
    assert!(
        a_min.max(b_min) <= a_max.min(b_max),
        "ranges do not overlap: refresh [{a_min:.3}, {a_max:.3}] vs none [{b_min:.3}, {b_max:.3}]"
    );
    println!(
        "PASS [9/10] final correct-edges ranges overlap: refresh [{a_min:.3}, {a_max:.3}], none [{b_min:.3}, {b_max:.3}]"
    );
}

#[test]
fn quality_factor_identities_hold() {
    let relative = |a: f64, b: f64| (a - b).abs() / b.abs().max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5EED);
    for _ in 0..100 {
        let n = rng.random_range(100..=100_000usize);
        let n_a = rng.random_range(1..=100_000usize);
        let k = rng.random_range(1..=50usize);
        let e_c = rng.random::<f64>() * ((n + n_a) * k) as f64;
        let report = quality_factor(n, n_a, k, e_c);
        let (nf, naf, kf) = (n as f64, n_a as f64, k as f64);
        let e_m = naf * kf + nf * kf * naf / (naf + nf);
        let e_u = (nf + naf) * kf - e_m;
        let q = (e_c - e_u) / e_m;
        assert!(relative(report.expected_modified, e_m) <= 1e-9);
        assert!(relative(report.expected_unmodified, e_u) <= 1e-9);
        assert!(relative(report.quality, q) <= 1e-9);
    }
    let frozen = quality_factor(1000, 1000, 10, 18000.0);
    assert!((frozen.quality - 0.8666666666666667).abs() < 1e-12);
    println!("PASS [10/10] quality-factor identities hold to 1e-9 on 100 random tuples");
}
