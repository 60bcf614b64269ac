use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::datasets::{generate_synthetic, load_text, SyntheticConfig};
use crate::distributed::{build_distributed, distributed_search, DistributedConfig, PartitionedGraph};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::item::{Item, ItemStore};
use crate::metrics::{correct_edges, quality_factor, recall};
use crate::mix_seed;
use crate::online::{build_online, UpdateParams};
use crate::oracle::{brute_build, brute_search};
use crate::partition::PartitionParams;
use crate::search::{gnns_search, ignns_search, SearchParams};
use crate::similarity::SimilarityMeasure;

/// The experiment protocols the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Search recall across a grid of expansion coefficients.
    ExpansionSweep,
    /// Improved vs classic search recall across a grid of speedups.
    AlgoCompare,
    /// Online build cost and edge correctness across update depths.
    DepthSweep,
    /// Distributed search recall across partition counts.
    PartitionSweep,
    /// Final edge correctness with and without periodic medoid updates.
    MedoidInterval,
    /// Edge correctness and quality factor over the course of a distributed
    /// online build.
    OnlineQuality,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::ExpansionSweep => "expansion-sweep",
            ExperimentKind::AlgoCompare => "algo-compare",
            ExperimentKind::DepthSweep => "depth-sweep",
            ExperimentKind::PartitionSweep => "partition-sweep",
            ExperimentKind::MedoidInterval => "medoid-interval",
            ExperimentKind::OnlineQuality => "online-quality",
        }
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expansion-sweep" => Ok(ExperimentKind::ExpansionSweep),
            "algo-compare" => Ok(ExperimentKind::AlgoCompare),
            "depth-sweep" => Ok(ExperimentKind::DepthSweep),
            "partition-sweep" => Ok(ExperimentKind::PartitionSweep),
            "medoid-interval" => Ok(ExperimentKind::MedoidInterval),
            "online-quality" => Ok(ExperimentKind::OnlineQuality),
            other => Err(Error::InvalidParam(format!(
                "unknown experiment kind '{other}'"
            ))),
        }
    }
}

/// Fully resolved experiment settings. Every field has a default, so a
/// config file only states what differs from the protocol's usual shape.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub measure: SimilarityMeasure,
    pub n: usize,
    pub n_add: usize,
    pub k: usize,
    pub repetitions: usize,
    pub queries: usize,
    pub rng_seed: u64,
    pub speedup: f64,
    pub expansion: f64,
    pub depth: usize,
    pub partitions: usize,
    pub workers: usize,
    pub imbalance: f64,
    pub iterations: usize,
    pub medoid_interval: Option<f64>,
    pub expansions: Vec<f64>,
    pub speedups: Vec<f64>,
    pub depths: Vec<usize>,
    pub partition_counts: Vec<usize>,
    pub dim: usize,
    pub centers: usize,
    pub center_spread: f64,
    pub cluster_stddev: f64,
    pub text_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn defaults(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            measure: SimilarityMeasure::EuclideanInverse,
            n: 1000,
            n_add: 1000,
            k: 10,
            repetitions: 10,
            queries: 100,
            rng_seed: 42,
            speedup: match kind {
                ExperimentKind::ExpansionSweep => 50.0,
                ExperimentKind::AlgoCompare => 10.0,
                ExperimentKind::DepthSweep => 20.0,
                _ => 4.0,
            },
            expansion: 5.0,
            depth: 2,
            partitions: 4,
            workers: 4,
            imbalance: 1.2,
            iterations: 3,
            medoid_interval: Some(0.1),
            expansions: vec![1.0, 1.01, 1.1, 1.2, 2.0, 5.0, 10.0, 100.0],
            speedups: vec![10.0, 20.0, 40.0, 80.0, 160.0],
            depths: vec![1, 2, 3, 4, 5],
            partition_counts: vec![1, 2, 4, 8],
            dim: 3,
            centers: 5,
            center_spread: 100.0,
            cluster_stddev: 5.0,
            text_path: None,
        }
    }

    /// Read a flat `key=value` file ('#' starts a comment). Unknown keys are
    /// rejected so a typo cannot silently fall back to a default.
    pub fn from_file(kind: ExperimentKind, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut pairs: BTreeMap<String, String> = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, idx + 1, "expected key=value"))?;
            pairs.insert(key.trim().to_string(), value.trim().to_string());
        }
        Self::from_pairs(kind, pairs)
    }

    pub fn from_pairs(kind: ExperimentKind, mut pairs: BTreeMap<String, String>) -> Result<Self> {
        let mut config = Self::defaults(kind);
        fn take<T: FromStr>(
            pairs: &mut BTreeMap<String, String>,
            key: &str,
            into: &mut T,
        ) -> Result<()> {
            if let Some(raw) = pairs.remove(key) {
                *into = raw
                    .parse()
                    .map_err(|_| Error::InvalidParam(format!("bad value for {key}: {raw}")))?;
            }
            Ok(())
        }
        fn take_list<T: FromStr>(
            pairs: &mut BTreeMap<String, String>,
            key: &str,
            into: &mut Vec<T>,
        ) -> Result<()> {
            if let Some(raw) = pairs.remove(key) {
                *into = raw
                    .split(',')
                    .map(|v| v.trim().parse())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::InvalidParam(format!("bad value for {key}: {raw}")))?;
                if into.is_empty() {
                    return Err(Error::InvalidParam(format!("{key} must not be empty")));
                }
            }
            Ok(())
        }
        take(&mut pairs, "measure", &mut config.measure)?;
        take(&mut pairs, "n", &mut config.n)?;
        take(&mut pairs, "n_add", &mut config.n_add)?;
        take(&mut pairs, "k", &mut config.k)?;
        take(&mut pairs, "repetitions", &mut config.repetitions)?;
        take(&mut pairs, "queries", &mut config.queries)?;
        take(&mut pairs, "seed", &mut config.rng_seed)?;
        take(&mut pairs, "speedup", &mut config.speedup)?;
        take(&mut pairs, "expansion", &mut config.expansion)?;
        take(&mut pairs, "depth", &mut config.depth)?;
        take(&mut pairs, "partitions", &mut config.partitions)?;
        take(&mut pairs, "workers", &mut config.workers)?;
        take(&mut pairs, "imbalance", &mut config.imbalance)?;
        take(&mut pairs, "iterations", &mut config.iterations)?;
        take_list(&mut pairs, "expansions", &mut config.expansions)?;
        take_list(&mut pairs, "speedups", &mut config.speedups)?;
        take_list(&mut pairs, "depths", &mut config.depths)?;
        take_list(&mut pairs, "partition_counts", &mut config.partition_counts)?;
        take(&mut pairs, "dim", &mut config.dim)?;
        take(&mut pairs, "centers", &mut config.centers)?;
        take(&mut pairs, "center_spread", &mut config.center_spread)?;
        take(&mut pairs, "cluster_stddev", &mut config.cluster_stddev)?;
        if let Some(raw) = pairs.remove("medoid_interval") {
            config.medoid_interval = match raw.as_str() {
                "none" => None,
                v => Some(v.parse().map_err(|_| {
                    Error::InvalidParam(format!("bad value for medoid_interval: {v}"))
                })?),
            };
        }
        if let Some(raw) = pairs.remove("text_path") {
            config.text_path = Some(PathBuf::from(raw));
        }
        if !config.measure.expects_vectors() && config.text_path.is_none() {
            return Err(Error::InvalidParam(
                "text measures need text_path in the config".into(),
            ));
        }
        if let Some(key) = pairs.keys().next() {
            return Err(Error::InvalidParam(format!("unknown config key '{key}'")));
        }
        if config.repetitions == 0 {
            return Err(Error::InvalidParam("repetitions must be at least 1".into()));
        }
        if config.expansion < 1.0 {
            return Err(Error::InvalidParam("expansion must be at least 1".into()));
        }
        Ok(config)
    }

    /// Items for one repetition. Synthetic data is re-drawn per repetition;
    /// a text corpus is sub-sampled without replacement.
    fn dataset(&self, total: usize, rep: usize) -> Result<ItemStore> {
        let seed = mix_seed(self.rng_seed, rep as u64);
        match &self.text_path {
            None => generate_synthetic(&SyntheticConfig {
                n: total,
                dim: self.dim,
                centers: self.centers,
                center_spread: self.center_spread,
                cluster_stddev: self.cluster_stddev,
                rng_seed: seed,
            }),
            Some(path) => {
                let corpus = load_text(path)?;
                if corpus.len() < total {
                    return Err(Error::InvalidParam(format!(
                        "corpus holds {} items, experiment needs {total}",
                        corpus.len()
                    )));
                }
                let all: Vec<&Item> = corpus.iter().collect();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let sampled = rand::seq::index::sample(&mut rng, all.len(), total);
                ItemStore::from_items(sampled.iter().map(|i| all[i].clone()))
            }
        }
    }

    fn search_params(&self, speedup: f64, expansion: f64, seed: u64) -> SearchParams {
        let mut p = SearchParams::new(self.k, speedup, expansion, seed);
        p.restarts_baseline = None;
        p
    }
}

/// One aggregated measurement: a parameter point, a metric, and its
/// mean/min/max over the repetitions.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub experiment: String,
    pub measure: String,
    pub n: usize,
    pub n_add: usize,
    pub k: usize,
    pub algo: String,
    pub param: String,
    pub param_value: String,
    pub metric: String,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    pub reps: usize,
}

pub const CSV_HEADER: &str =
    "experiment,measure,n,n_add,k,algo,param,param_value,metric,mean,min,max,reps";

impl CsvRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{:.6},{:.6},{:.6},{}",
            self.experiment,
            self.measure,
            self.n,
            self.n_add,
            self.k,
            self.algo,
            self.param,
            self.param_value,
            self.metric,
            self.mean,
            self.min,
            self.max,
            self.reps
        )
    }
}

pub fn write_csv(rows: &[CsvRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    writeln!(out, "{CSV_HEADER}").map_err(|e| Error::io(path, e))?;
    for row in rows {
        writeln!(out, "{}", row.to_csv_line()).map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

fn aggregate(values: &[f64]) -> (f64, f64, f64) {
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (mean, min, max)
}

/// Run the configured experiment and return its aggregated rows.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<CsvRow>> {
    match config.kind {
        ExperimentKind::ExpansionSweep => run_expansion_sweep(config),
        ExperimentKind::AlgoCompare => run_algo_compare(config),
        ExperimentKind::DepthSweep => run_depth_sweep(config),
        ExperimentKind::PartitionSweep => run_partition_sweep(config),
        ExperimentKind::MedoidInterval => run_medoid_interval(config),
        ExperimentKind::OnlineQuality => run_online_quality(config),
    }
}

fn row(
    config: &ExperimentConfig,
    algo: &str,
    param: &str,
    param_value: String,
    metric: &str,
    values: &[f64],
) -> CsvRow {
    let (mean, min, max) = aggregate(values);
    CsvRow {
        experiment: config.kind.name().to_string(),
        measure: config.measure.name().to_string(),
        n: config.n,
        n_add: config.n_add,
        k: config.k,
        algo: algo.to_string(),
        param: param.to_string(),
        param_value,
        metric: metric.to_string(),
        mean,
        min,
        max,
        reps: config.repetitions,
    }
}

/// Graph plus exact per-query answers for one search repetition.
struct SearchFixture {
    graph: Graph,
    queries: Vec<(Item, crate::neighbor::NeighborList)>,
}

fn search_fixture(config: &ExperimentConfig, rep: usize) -> Result<SearchFixture> {
    let items = config.dataset(config.n + config.queries, rep)?;
    let graph_items = ItemStore::from_items(items.iter().take(config.n).cloned())?;
    let graph = brute_build(&graph_items, config.k, config.measure)?;
    let queries = items
        .iter()
        .skip(config.n)
        .map(|q| {
            brute_search(&graph_items, q, config.k, config.measure).map(|t| (q.clone(), t))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SearchFixture { graph, queries })
}

fn mean_recall<F>(fixture: &SearchFixture, mut search: F) -> Result<f64>
where
    F: FnMut(&Item) -> Result<crate::neighbor::NeighborList>,
{
    let mut total = 0.0;
    for (query, truth) in &fixture.queries {
        let results = search(query)?;
        total += recall(&results, truth)?;
    }
    Ok(total / fixture.queries.len() as f64)
}

fn run_expansion_sweep(config: &ExperimentConfig) -> Result<Vec<CsvRow>> {
    let per_rep: Vec<Vec<f64>> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| {
            let fixture = search_fixture(config, rep)?;
            let rep_seed = mix_seed(config.rng_seed, rep as u64);
            config
                .expansions
                .iter()
                .map(|&expansion| {
                    mean_recall(&fixture, |query| {
                        let params = config.search_params(
                            config.speedup,
                            expansion,
                            mix_seed(rep_seed, query.id),
                        );
                        Ok(ignns_search(&fixture.graph, &query.payload, &params)?.results)
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(config
        .expansions
        .iter()
        .enumerate()
        .map(|(i, &expansion)| {
            let values: Vec<f64> = per_rep.iter().map(|r| r[i]).collect();
            row(config, "ignns", "expansion", format!("{expansion}"), "recall", &values)
        })
        .collect())
}

fn run_algo_compare(config: &ExperimentConfig) -> Result<Vec<CsvRow>> {
    struct Point {
        gnns: f64,
        ignns: f64,
    }
    let per_rep: Vec<Vec<Point>> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| {
            let fixture = search_fixture(config, rep)?;
            let rep_seed = mix_seed(config.rng_seed, rep as u64);
            config
                .speedups
                .iter()
                .map(|&speedup| {
                    let gnns = mean_recall(&fixture, |query| {
                        let params = config.search_params(
                            speedup,
                            config.expansion,
                            mix_seed(rep_seed, query.id),
                        );
                        Ok(gnns_search(&fixture.graph, &query.payload, &params)?.results)
                    })?;
                    let ignns = mean_recall(&fixture, |query| {
                        let params = config.search_params(
                            speedup,
                            config.expansion,
                            mix_seed(rep_seed, query.id),
                        );
                        Ok(ignns_search(&fixture.graph, &query.payload, &params)?.results)
                    })?;
                    Ok(Point { gnns, ignns })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (i, &speedup) in config.speedups.iter().enumerate() {
        for (algo, pick) in [
            ("gnns", &(|p: &Point| p.gnns) as &dyn Fn(&Point) -> f64),
            ("ignns", &|p: &Point| p.ignns),
        ] {
            let values: Vec<f64> = per_rep.iter().map(|r| pick(&r[i])).collect();
            rows.push(row(config, algo, "speedup", format!("{speedup}"), "recall", &values));
        }
    }
    Ok(rows)
}

fn run_depth_sweep(config: &ExperimentConfig) -> Result<Vec<CsvRow>> {
    struct Point {
        correct: f64,
        similarities: f64,
    }
    let total = config.n + config.n_add;
    let per_rep: Vec<Vec<Point>> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| {
            let items = config.dataset(total, rep)?;
            let reference = brute_build(&items, config.k, config.measure)?;
            let rep_seed = mix_seed(config.rng_seed, rep as u64);
            config
                .depths
                .iter()
                .map(|&depth| {
                    let params = UpdateParams::new(
                        depth,
                        config.search_params(config.speedup, config.expansion, rep_seed),
                    );
                    let (graph, stats) =
                        build_online(&items, config.k, config.measure, &params, config.n)?;
                    Ok(Point {
                        correct: correct_edges(&graph, &reference)?,
                        similarities: stats.total_similarities() as f64,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    for (i, &depth) in config.depths.iter().enumerate() {
        let correct: Vec<f64> = per_rep.iter().map(|r| r[i].correct).collect();
        let sims: Vec<f64> = per_rep.iter().map(|r| r[i].similarities).collect();
        rows.push(row(config, "ignns", "depth", format!("{depth}"), "correct_edges", &correct));
        rows.push(row(config, "ignns", "depth", format!("{depth}"), "similarities", &sims));
    }
    Ok(rows)
}

fn run_partition_sweep(config: &ExperimentConfig) -> Result<Vec<CsvRow>> {
    let per_rep: Vec<Vec<f64>> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| {
            let fixture = search_fixture(config, rep)?;
            let rep_seed = mix_seed(config.rng_seed, rep as u64);
            config
                .partition_counts
                .iter()
                .map(|&p| {
                    let pg = PartitionedGraph::build(
                        &fixture.graph,
                        PartitionParams::new(
                            p,
                            config.imbalance,
                            config.iterations,
                            mix_seed(rep_seed, p as u64),
                        ),
                    )?;
                    mean_recall(&fixture, |query| {
                        let params = config.search_params(
                            config.speedup,
                            config.expansion,
                            mix_seed(rep_seed, query.id),
                        );
                        Ok(distributed_search(&pg, &query.payload, &params)?.results)
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(config
        .partition_counts
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let values: Vec<f64> = per_rep.iter().map(|r| r[i]).collect();
            row(config, "ignns", "partitions", format!("{p}"), "recall", &values)
        })
        .collect())
}

fn distributed_build_correctness(
    config: &ExperimentConfig,
    items: &ItemStore,
    interval: Option<f64>,
    rep_seed: u64,
) -> Result<f64> {
    let params = UpdateParams::new(
        config.depth,
        config.search_params(config.speedup, config.expansion, rep_seed),
    );
    let pparams = PartitionParams::new(
        config.partitions,
        config.imbalance,
        config.iterations,
        mix_seed(rep_seed, 0x9a),
    );
    let dconfig = DistributedConfig::new(config.workers.min(config.partitions), interval);
    let (pg, _) = build_distributed(
        items,
        config.k,
        config.measure,
        &params,
        &pparams,
        &dconfig,
        config.n,
    )?;
    let reference = brute_build(items, config.k, config.measure)?;
    correct_edges(&pg.to_global()?, &reference)
}

fn run_medoid_interval(config: &ExperimentConfig) -> Result<Vec<CsvRow>> {
    let total = config.n + config.n_add;
    let settings: Vec<Option<f64>> = vec![config.medoid_interval, None];
    let per_rep: Vec<Vec<f64>> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| {
            let items = config.dataset(total, rep)?;
            let rep_seed = mix_seed(config.rng_seed, rep as u64);
            settings
                .iter()
                .map(|&interval| distributed_build_correctness(config, &items, interval, rep_seed))
                .collect()
        })
        .collect::<Result<_>>()?;
    Ok(settings
        .iter()
        .enumerate()
        .map(|(i, interval)| {
            let values: Vec<f64> = per_rep.iter().map(|r| r[i]).collect();
            let label = interval.map_or("none".to_string(), |f| format!("{f}"));
            row(config, "ignns", "medoid_interval", label, "correct_edges", &values)
        })
        .collect())
}

fn run_online_quality(config: &ExperimentConfig) -> Result<Vec<CsvRow>> {
    use crate::distributed::distributed_online_add;

    const CHECKPOINTS: usize = 5;
    struct Point {
        correct: f64,
        quality: f64,
    }
    let total = config.n + config.n_add;
    let per_rep: Vec<Vec<Point>> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| {
            let items = config.dataset(total, rep)?;
            let rep_seed = mix_seed(config.rng_seed, rep as u64);
            let seed_items = ItemStore::from_items(items.iter().take(config.n).cloned())?;
            let seed_graph = brute_build(&seed_items, config.k, config.measure)?;
            let pparams = PartitionParams::new(
                config.partitions,
                config.imbalance,
                config.iterations,
                mix_seed(rep_seed, 0x9a),
            );
            let mut pg = PartitionedGraph::build(&seed_graph, pparams)?;
            let dconfig = DistributedConfig::new(
                config.workers.min(config.partitions),
                config.medoid_interval,
            );
            let additions: Vec<Item> = items.iter().skip(config.n).cloned().collect();
            let step = additions.len().div_ceil(CHECKPOINTS);
            let mut points = Vec::with_capacity(CHECKPOINTS);
            let mut done = 0usize;
            for chunk in additions.chunks(step) {
                for item in chunk {
                    let mut params = UpdateParams::new(
                        config.depth,
                        config.search_params(config.speedup, config.expansion, 0),
                    );
                    params.search.rng_seed = mix_seed(rep_seed, item.id);
                    distributed_online_add(&mut pg, item.clone(), &params, &dconfig)?;
                }
                done += chunk.len();
                let current = ItemStore::from_items(
                    items.iter().take(config.n + done).cloned(),
                )?;
                let reference = brute_build(&current, config.k, config.measure)?;
                let correct = correct_edges(&pg.to_global()?, &reference)?;
                let total_edges: usize = reference.nodes().map(|(_, l)| l.len()).sum();
                let report = quality_factor(
                    config.n,
                    done,
                    config.k,
                    correct * total_edges as f64,
                );
                points.push(Point {
                    correct,
                    quality: report.quality,
                });
            }
            Ok(points)
        })
        .collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let checkpoints = per_rep[0].len();
    for i in 0..checkpoints {
        let progress = (i + 1) as f64 / checkpoints as f64;
        let correct: Vec<f64> = per_rep.iter().map(|r| r[i].correct).collect();
        let quality: Vec<f64> = per_rep.iter().map(|r| r[i].quality).collect();
        rows.push(row(
            config,
            "ignns",
            "progress",
            format!("{progress:.2}"),
            "correct_edges",
            &correct,
        ));
        rows.push(row(
            config,
            "ignns",
            "progress",
            format!("{progress:.2}"),
            "quality_factor",
            &quality,
        ));
    }
    Ok(rows)
}
