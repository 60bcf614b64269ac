use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{run_experiment, write_csv, ExperimentConfig, ExperimentKind};
use crate::datasets::{generate_synthetic, load_text, load_vectors, save_vectors, SyntheticConfig};
use crate::distributed::{build_distributed, DistributedConfig, PartitionedGraph};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::item::{ItemId, ItemStore, Payload};
use crate::online::{build_online, default_seed_size, UpdateParams};
use crate::oracle::brute_build;
use crate::partition::{partition_graph, save_partitioning, PartitionParams};
use crate::search::{gnns_search, ignns_search, SearchParams};
use crate::similarity::SimilarityMeasure;

#[derive(Parser)]
#[command(
    name = "knngf",
    version,
    about = "Build, search, partition, and maintain k-nn graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Algo {
    Gnns,
    Ignns,
}

#[derive(Args)]
struct ItemArgs {
    /// Item file: `id<tab>v1,v2,...` for vector measures, one string per
    /// line otherwise.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "euclidean")]
    measure: SimilarityMeasure,
}

impl ItemArgs {
    fn load(&self) -> Result<ItemStore> {
        load_items(&self.input, self.measure)
    }
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long, default_value_t = 10)]
    k: usize,
    #[arg(long, default_value_t = 10.0)]
    speedup: f64,
    /// Restart-skip coefficient; defaults to 5 for vector data and 1.2 for
    /// text data.
    #[arg(long)]
    expansion: Option<f64>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl SearchArgs {
    fn params(&self, measure: SimilarityMeasure) -> SearchParams {
        let expansion = self
            .expansion
            .unwrap_or(if measure.expects_vectors() { 5.0 } else { 1.2 });
        SearchParams::new(self.k, self.speedup, expansion, self.seed)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample vectors from a mixture of Gaussian clusters.
    GenSynthetic {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 5)]
        centers: usize,
        #[arg(long, default_value_t = 100.0)]
        spread: f64,
        #[arg(long, default_value_t = 5.0)]
        stddev: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build the exact k-nn graph by evaluating every pair.
    BuildBrute {
        #[command(flatten)]
        items: ItemArgs,
        #[arg(long, default_value_t = 10)]
        k: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Query a stored graph with hill-climbing search.
    Search {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        items: ItemArgs,
        #[arg(long, value_enum)]
        algo: Algo,
        #[command(flatten)]
        search: SearchArgs,
        /// Take the payload of this item as the query.
        #[arg(long, conflicts_with = "query")]
        query_id: Option<ItemId>,
        /// Literal query payload: comma-separated numbers for vector
        /// measures, a string otherwise.
        #[arg(long)]
        query: Option<String>,
    },
    /// Build a graph by inserting items one at a time; --k is both the
    /// graph degree and the per-insertion result count.
    BuildOnline {
        #[command(flatten)]
        items: ItemArgs,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[command(flatten)]
        search: SearchArgs,
        /// Size of the brute-force seed graph (defaults to max(k+1, 50)).
        #[arg(long)]
        seed_size: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split a graph into balanced clusters around medoids.
    Partition {
        #[arg(long)]
        graph: PathBuf,
        #[command(flatten)]
        items: ItemArgs,
        #[arg(long)]
        partitions: usize,
        #[arg(long, default_value_t = 1.1)]
        imbalance: f64,
        #[arg(long, default_value_t = 10)]
        iterations: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a graph online across simulated shared-nothing workers.
    BuildDistributed {
        #[command(flatten)]
        items: ItemArgs,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long)]
        seed_size: Option<usize>,
        #[arg(long)]
        partitions: usize,
        /// Worker threads (defaults to one per partition).
        #[arg(long)]
        workers: Option<usize>,
        /// Recompute medoids after this fraction of new nodes, or `none`.
        #[arg(long, default_value = "none")]
        medoid_interval: String,
        #[arg(long, default_value_t = 1.1)]
        imbalance: f64,
        #[arg(long, default_value_t = 10)]
        iterations: usize,
        #[arg(long)]
        out: PathBuf,
        /// Also write the node-to-partition map here.
        #[arg(long)]
        partition_out: Option<PathBuf>,
    },
    /// Run an experiment protocol and write aggregated CSV.
    Bench {
        kind: ExperimentKind,
        /// Flat key=value settings file; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn run() -> Result<()> {
    Cli::parse().execute()
}

impl Cli {
    fn execute(self) -> Result<()> {
        match self.command {
            Command::GenSynthetic {
                n,
                dim,
                centers,
                spread,
                stddev,
                seed,
                out,
            } => {
                let config = SyntheticConfig {
                    n,
                    dim,
                    centers,
                    center_spread: spread,
                    cluster_stddev: stddev,
                    rng_seed: seed,
                };
                let items = generate_synthetic(&config)?;
                save_vectors(&items, &out)?;
                eprintln!("wrote {} vectors of dim {} to {}", items.len(), dim, out.display());
                Ok(())
            }
            Command::BuildBrute { items, k, out } => {
                let store = items.load()?;
                let graph = brute_build(&store, k, items.measure)?;
                graph.save(&out)?;
                eprintln!("built exact graph: {} nodes, k={}", graph.len(), k);
                Ok(())
            }
            Command::Search {
                graph,
                items,
                algo,
                search,
                query_id,
                query,
            } => {
                let store = items.load()?;
                let query = query_payload(&store, items.measure, query_id, query)?;
                let graph = Graph::load(&graph, store, items.measure)?;
                let params = search.params(items.measure);
                let report = match algo {
                    Algo::Gnns => gnns_search(&graph, &query, &params)?,
                    Algo::Ignns => ignns_search(&graph, &query, &params)?,
                };
                let stdout = std::io::stdout();
                let mut out = stdout.lock();
                for neighbor in report.results.iter() {
                    writeln!(out, "{}\t{:.16e}", neighbor.node_id, neighbor.similarity)
                        .map_err(|e| Error::io("stdout", e))?;
                }
                eprintln!(
                    "similarities={} restarts={} visited={}",
                    report.similarities_computed, report.restarts, report.nodes_visited
                );
                Ok(())
            }
            Command::BuildOnline {
                items,
                depth,
                search,
                seed_size,
                out,
            } => {
                let store = items.load()?;
                let k = search.k;
                let params = UpdateParams::new(depth, search.params(items.measure));
                let seed_size = seed_size.unwrap_or_else(|| default_seed_size(k));
                let (graph, stats) = build_online(&store, k, items.measure, &params, seed_size)?;
                graph.save(&out)?;
                eprintln!(
                    "added {} nodes; similarities: search={} update={}",
                    stats.nodes_added, stats.similarities_search, stats.similarities_update
                );
                Ok(())
            }
            Command::Partition {
                graph,
                items,
                partitions,
                imbalance,
                iterations,
                seed,
                out,
            } => {
                let store = items.load()?;
                let graph = Graph::load(&graph, store, items.measure)?;
                let params = PartitionParams::new(partitions, imbalance, iterations, seed);
                let partitioning = partition_graph(&graph, &params)?;
                save_partitioning(&partitioning, &out)?;
                let sizes: Vec<usize> =
                    partitioning.clusters.iter().map(|c| c.size()).collect();
                eprintln!(
                    "{} clusters after {} iterations, sizes {:?}",
                    partitions, partitioning.iterations, sizes
                );
                Ok(())
            }
            Command::BuildDistributed {
                items,
                depth,
                search,
                seed_size,
                partitions,
                workers,
                medoid_interval,
                imbalance,
                iterations,
                out,
                partition_out,
            } => {
                let store = items.load()?;
                let k = search.k;
                let params = UpdateParams::new(depth, search.params(items.measure));
                let pparams =
                    PartitionParams::new(partitions, imbalance, iterations, search.seed);
                let config = DistributedConfig::new(
                    workers.unwrap_or(partitions),
                    parse_interval(&medoid_interval)?,
                );
                let seed_size = seed_size.unwrap_or_else(|| default_seed_size(k));
                let (pg, stats) = build_distributed(
                    &store,
                    k,
                    items.measure,
                    &params,
                    &pparams,
                    &config,
                    seed_size,
                )?;
                pg.to_global()?.save(&out)?;
                if let Some(path) = partition_out {
                    save_partition_map(&pg, &path)?;
                }
                eprintln!(
                    "added {} nodes across {} partitions; similarities: search={} update={} placement={}; medoid refreshes={}",
                    stats.nodes_added,
                    partitions,
                    stats.similarities_search,
                    stats.similarities_update,
                    stats.similarities_placement,
                    stats.medoid_refreshes
                );
                Ok(())
            }
            Command::Bench { kind, config, out } => {
                let config = match config {
                    Some(path) => ExperimentConfig::from_file(kind, path)?,
                    None => ExperimentConfig::defaults(kind),
                };
                let rows = run_experiment(&config)?;
                write_csv(&rows, &out)?;
                eprintln!("{} wrote {} rows to {}", kind.name(), rows.len(), out.display());
                Ok(())
            }
        }
    }
}

fn load_items(path: &Path, measure: SimilarityMeasure) -> Result<ItemStore> {
    if measure.expects_vectors() {
        load_vectors(path)
    } else {
        load_text(path)
    }
}

fn query_payload(
    store: &ItemStore,
    measure: SimilarityMeasure,
    query_id: Option<ItemId>,
    query: Option<String>,
) -> Result<Payload> {
    match (query_id, query) {
        (Some(id), None) => Ok(store.require(id)?.payload.clone()),
        (None, Some(raw)) => {
            if measure.expects_vectors() {
                let coords = raw
                    .split(',')
                    .map(|v| v.trim().parse())
                    .collect::<std::result::Result<Vec<f64>, _>>()
                    .map_err(|_| Error::InvalidParam(format!("bad query vector: {raw}")))?;
                Ok(Payload::Vector(coords))
            } else {
                Ok(Payload::Text(raw.trim().to_lowercase()))
            }
        }
        _ => Err(Error::InvalidParam(
            "search needs exactly one of --query-id and --query".into(),
        )),
    }
}

fn parse_interval(raw: &str) -> Result<Option<f64>> {
    match raw {
        "none" => Ok(None),
        v => v
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidParam(format!("bad medoid interval: {v}"))),
    }
}

fn save_partition_map(pg: &PartitionedGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut assignment: BTreeMap<ItemId, usize> = BTreeMap::new();
    for (index, part) in pg.partitions().iter().enumerate() {
        for id in part.graph.ids() {
            assignment.insert(id, index);
        }
    }
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for (id, cluster) in &assignment {
        writeln!(out, "{id}\t{cluster}").map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}
