//! Python bindings. One class per core type, one function per pure
//! computation; payloads cross the boundary as `list[float]` or `str`.

use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use knngf::distributed::{
    build_distributed, distributed_online_add, distributed_search, DistributedConfig,
};
use knngf::online::{build_online, default_seed_size, UpdateParams};
use knngf::oracle::{brute_build, brute_search};
use knngf::partition::{partition_graph, PartitionParams};
use knngf::search::{gnns_search, ignns_search, SearchParams};
use knngf::similarity::{self, SimilarityMeasure};
use knngf::{Item, ItemId, ItemStore, Payload};

fn to_py(err: knngf::Error) -> PyErr {
    match &err {
        knngf::Error::Io { .. } => PyIOError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

fn parse_measure(name: &str) -> PyResult<SimilarityMeasure> {
    name.parse().map_err(to_py)
}

fn parse_payload(value: &Bound<'_, PyAny>) -> PyResult<Payload> {
    if let Ok(text) = value.extract::<String>() {
        return Ok(Payload::Text(text));
    }
    if let Ok(vector) = value.extract::<Vec<f64>>() {
        return Ok(Payload::Vector(vector));
    }
    Err(PyValueError::new_err(
        "payload must be a list of floats or a string",
    ))
}

fn search_params(k: usize, speedup: f64, expansion: f64, seed: u64) -> SearchParams {
    SearchParams::new(k, speedup, expansion, seed)
}

/// A collection of items (vectors or strings) with stable integer ids.
#[pyclass]
struct Dataset {
    store: ItemStore,
}

#[pymethods]
impl Dataset {
    /// Sample n points from a mixture of Gaussian clusters.
    #[staticmethod]
    #[pyo3(signature = (n, dim=3, centers=5, spread=100.0, stddev=5.0, seed=42))]
    fn synthetic(
        n: usize,
        dim: usize,
        centers: usize,
        spread: f64,
        stddev: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let config = knngf::datasets::SyntheticConfig {
            n,
            dim,
            centers,
            center_spread: spread,
            cluster_stddev: stddev,
            rng_seed: seed,
        };
        Ok(Dataset {
            store: knngf::datasets::generate_synthetic(&config).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_vectors(vectors: Vec<Vec<f64>>) -> PyResult<Self> {
        let items = vectors
            .into_iter()
            .enumerate()
            .map(|(i, v)| Item::vector(i as ItemId, v));
        Ok(Dataset {
            store: ItemStore::from_items(items).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_texts(texts: Vec<String>) -> PyResult<Self> {
        let items = texts
            .into_iter()
            .enumerate()
            .map(|(i, s)| Item::text(i as ItemId, s));
        Ok(Dataset {
            store: ItemStore::from_items(items).map_err(to_py)?,
        })
    }

    /// Read `id<tab>v1,v2,...` lines.
    #[staticmethod]
    fn load_vectors(path: &str) -> PyResult<Self> {
        Ok(Dataset {
            store: knngf::datasets::load_vectors(path).map_err(to_py)?,
        })
    }

    /// Read one lowercased string per line.
    #[staticmethod]
    fn load_text(path: &str) -> PyResult<Self> {
        Ok(Dataset {
            store: knngf::datasets::load_text(path).map_err(to_py)?,
        })
    }

    fn save_vectors(&self, path: &str) -> PyResult<()> {
        knngf::datasets::save_vectors(&self.store, path).map_err(to_py)
    }

    fn ids(&self) -> Vec<ItemId> {
        self.store.ids().collect()
    }

    fn get(&self, py: Python<'_>, id: ItemId) -> PyResult<Py<PyAny>> {
        let item = self.store.require(id).map_err(to_py)?;
        Ok(match &item.payload {
            Payload::Vector(v) => v.clone().into_pyobject(py)?.into_any().unbind(),
            Payload::Text(s) => s.clone().into_pyobject(py)?.into_any().unbind(),
        })
    }

    fn __len__(&self) -> usize {
        self.store.len()
    }
}

/// Search cost and outcome: ranked `(id, similarity)` pairs plus counters.
#[pyclass]
struct SearchOutcome {
    #[pyo3(get)]
    results: Vec<(ItemId, f64)>,
    #[pyo3(get)]
    similarities: u64,
    #[pyo3(get)]
    restarts: u64,
    #[pyo3(get)]
    visited: u64,
}

impl From<knngf::search::SearchReport> for SearchOutcome {
    fn from(report: knngf::search::SearchReport) -> Self {
        SearchOutcome {
            results: report
                .results
                .iter()
                .map(|n| (n.node_id, n.similarity))
                .collect(),
            similarities: report.similarities_computed,
            restarts: report.restarts,
            visited: report.nodes_visited,
        }
    }
}

/// Similarity evaluations spent building a graph online.
#[pyclass]
struct BuildOutcome {
    #[pyo3(get)]
    nodes_added: u64,
    #[pyo3(get)]
    search_similarities: u64,
    #[pyo3(get)]
    update_similarities: u64,
    #[pyo3(get)]
    placement_similarities: u64,
    #[pyo3(get)]
    medoid_refreshes: u64,
}

/// A directed k-nn graph bound to its item store and similarity measure.
#[pyclass]
struct Graph {
    inner: knngf::Graph,
}

#[pymethods]
impl Graph {
    /// Exact graph: evaluate every pair.
    #[staticmethod]
    #[pyo3(signature = (dataset, k, measure="euclidean"))]
    fn build_brute(dataset: &Dataset, k: usize, measure: &str) -> PyResult<Self> {
        let measure = parse_measure(measure)?;
        Ok(Graph {
            inner: brute_build(&dataset.store, k, measure).map_err(to_py)?,
        })
    }

    /// Approximate graph: brute-force a small seed, then insert the rest
    /// one at a time with budgeted searches and depth-bounded updates.
    #[staticmethod]
    #[pyo3(signature = (dataset, k, measure="euclidean", depth=2, speedup=10.0, expansion=5.0, seed=42, seed_size=None))]
    #[allow(clippy::too_many_arguments)]
    fn build_online(
        dataset: &Dataset,
        k: usize,
        measure: &str,
        depth: usize,
        speedup: f64,
        expansion: f64,
        seed: u64,
        seed_size: Option<usize>,
    ) -> PyResult<(Self, BuildOutcome)> {
        let measure = parse_measure(measure)?;
        let params = UpdateParams::new(depth, search_params(k, speedup, expansion, seed));
        let seed_size = seed_size.unwrap_or_else(|| default_seed_size(k));
        let (graph, stats) =
            build_online(&dataset.store, k, measure, &params, seed_size).map_err(to_py)?;
        Ok((
            Graph { inner: graph },
            BuildOutcome {
                nodes_added: stats.nodes_added,
                search_similarities: stats.similarities_search,
                update_similarities: stats.similarities_update,
                placement_similarities: 0,
                medoid_refreshes: 0,
            },
        ))
    }

    #[staticmethod]
    #[pyo3(signature = (path, dataset, measure="euclidean"))]
    fn load(path: &str, dataset: &Dataset, measure: &str) -> PyResult<Self> {
        let measure = parse_measure(measure)?;
        Ok(Graph {
            inner: knngf::Graph::load(path, dataset.store.clone(), measure).map_err(to_py)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(to_py)
    }

    /// Hill-climbing search; `algo` is "gnns" or "ignns".
    #[pyo3(signature = (query, k=10, algo="ignns", speedup=10.0, expansion=5.0, seed=42))]
    fn search(
        &self,
        query: &Bound<'_, PyAny>,
        k: usize,
        algo: &str,
        speedup: f64,
        expansion: f64,
        seed: u64,
    ) -> PyResult<SearchOutcome> {
        let payload = parse_payload(query)?;
        let params = search_params(k, speedup, expansion, seed);
        let report = match algo {
            "gnns" => gnns_search(&self.inner, &payload, &params),
            "ignns" => ignns_search(&self.inner, &payload, &params),
            other => return Err(PyValueError::new_err(format!("unknown algorithm '{other}'"))),
        }
        .map_err(to_py)?;
        Ok(report.into())
    }

    /// Exact answer by scanning the whole item store.
    #[pyo3(signature = (query, k=10))]
    fn search_brute(&self, query: &Bound<'_, PyAny>, k: usize) -> PyResult<Vec<(ItemId, f64)>> {
        let payload = parse_payload(query)?;
        let probe = Item {
            id: u64::MAX,
            payload,
        };
        let truth = brute_search(self.inner.items(), &probe, k, self.inner.measure())
            .map_err(to_py)?;
        Ok(truth.iter().map(|n| (n.node_id, n.similarity)).collect())
    }

    fn neighbors(&self, id: ItemId) -> PyResult<Vec<(ItemId, f64)>> {
        match self.inner.node(id) {
            Some(list) => Ok(list.iter().map(|n| (n.node_id, n.similarity)).collect()),
            None => Err(PyValueError::new_err(format!("unknown node {id}"))),
        }
    }

    fn ids(&self) -> Vec<ItemId> {
        self.inner.ids().collect()
    }

    /// Balanced k-medoids split; returns (medoids, {node: cluster}).
    #[pyo3(signature = (partitions, imbalance=1.1, iterations=10, seed=42))]
    fn partition(
        &self,
        partitions: usize,
        imbalance: f64,
        iterations: usize,
        seed: u64,
    ) -> PyResult<(Vec<ItemId>, std::collections::HashMap<ItemId, usize>)> {
        let params = PartitionParams::new(partitions, imbalance, iterations, seed);
        let partitioning = partition_graph(&self.inner, &params).map_err(to_py)?;
        Ok((
            partitioning.medoids(),
            partitioning.assignment.into_iter().collect(),
        ))
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k()
    }

    #[getter]
    fn measure(&self) -> String {
        self.inner.measure().name().to_string()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

/// A graph split across simulated shared-nothing workers.
#[pyclass]
struct PartitionedGraph {
    inner: knngf::distributed::PartitionedGraph,
    workers: usize,
    medoid_interval: Option<f64>,
}

#[pymethods]
impl PartitionedGraph {
    /// Partition an existing graph.
    #[staticmethod]
    #[pyo3(signature = (graph, partitions, imbalance=1.1, iterations=10, seed=42, workers=None, medoid_interval=None))]
    fn build(
        graph: &Graph,
        partitions: usize,
        imbalance: f64,
        iterations: usize,
        seed: u64,
        workers: Option<usize>,
        medoid_interval: Option<f64>,
    ) -> PyResult<Self> {
        let params = PartitionParams::new(partitions, imbalance, iterations, seed);
        Ok(PartitionedGraph {
            inner: knngf::distributed::PartitionedGraph::build(&graph.inner, params)
                .map_err(to_py)?,
            workers: workers.unwrap_or(partitions),
            medoid_interval,
        })
    }

    /// Build online across workers from scratch.
    #[staticmethod]
    #[pyo3(signature = (dataset, k, partitions, measure="euclidean", depth=2, speedup=4.0, expansion=5.0, seed=42, seed_size=None, imbalance=1.1, iterations=10, workers=None, medoid_interval=None))]
    #[allow(clippy::too_many_arguments)]
    fn build_online(
        dataset: &Dataset,
        k: usize,
        partitions: usize,
        measure: &str,
        depth: usize,
        speedup: f64,
        expansion: f64,
        seed: u64,
        seed_size: Option<usize>,
        imbalance: f64,
        iterations: usize,
        workers: Option<usize>,
        medoid_interval: Option<f64>,
    ) -> PyResult<(Self, BuildOutcome)> {
        let measure = parse_measure(measure)?;
        let params = UpdateParams::new(depth, search_params(k, speedup, expansion, seed));
        let pparams = PartitionParams::new(partitions, imbalance, iterations, seed);
        let workers = workers.unwrap_or(partitions);
        let config = DistributedConfig::new(workers, medoid_interval);
        let seed_size = seed_size.unwrap_or_else(|| default_seed_size(k));
        let (pg, stats) = build_distributed(
            &dataset.store,
            k,
            measure,
            &params,
            &pparams,
            &config,
            seed_size,
        )
        .map_err(to_py)?;
        Ok((
            PartitionedGraph {
                inner: pg,
                workers,
                medoid_interval,
            },
            BuildOutcome {
                nodes_added: stats.nodes_added,
                search_similarities: stats.similarities_search,
                update_similarities: stats.similarities_update,
                placement_similarities: stats.similarities_placement,
                medoid_refreshes: stats.medoid_refreshes,
            },
        ))
    }

    /// Search every partition under its share of the budget and merge.
    #[pyo3(signature = (query, k=10, speedup=10.0, expansion=5.0, seed=42))]
    fn search(
        &self,
        query: &Bound<'_, PyAny>,
        k: usize,
        speedup: f64,
        expansion: f64,
        seed: u64,
    ) -> PyResult<SearchOutcome> {
        let payload = parse_payload(query)?;
        let params = search_params(k, speedup, expansion, seed);
        let report = distributed_search(&self.inner, &payload, &params).map_err(to_py)?;
        Ok(report.into())
    }

    /// Insert one new item: search, update, place in the most similar
    /// medoid's partition. Returns the chosen partition index.
    #[pyo3(signature = (id, payload, depth=2, speedup=4.0, expansion=5.0, seed=42))]
    fn add(
        &mut self,
        id: ItemId,
        payload: &Bound<'_, PyAny>,
        depth: usize,
        speedup: f64,
        expansion: f64,
        seed: u64,
    ) -> PyResult<usize> {
        let item = Item {
            id,
            payload: parse_payload(payload)?,
        };
        let k = self.inner.k();
        let params = UpdateParams::new(depth, search_params(k, speedup, expansion, seed));
        let config = DistributedConfig::new(self.workers, self.medoid_interval);
        let outcome =
            distributed_online_add(&mut self.inner, item, &params, &config).map_err(to_py)?;
        Ok(outcome.partition)
    }

    /// Reassemble the partitions into one whole graph.
    fn to_graph(&self) -> PyResult<Graph> {
        Ok(Graph {
            inner: self.inner.to_global().map_err(to_py)?,
        })
    }

    fn medoids(&self) -> Vec<ItemId> {
        self.inner.medoids()
    }

    fn partition_sizes(&self) -> Vec<usize> {
        self.inner.partitions().iter().map(|p| p.graph.len()).collect()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyfunction]
fn euclidean_inverse(a: Vec<f64>, b: Vec<f64>) -> PyResult<f64> {
    similarity::euclidean_inverse(&a, &b).map_err(to_py)
}

#[pyfunction]
fn jaro_winkler(a: &str, b: &str) -> f64 {
    similarity::jaro_winkler(a, b)
}

#[pyfunction]
fn cosine_2gram(a: &str, b: &str) -> f64 {
    similarity::cosine_2gram(a, b)
}

/// Expected evaluations per eager-descent step and the resulting speedup
/// over full neighbour scans, as (higher, lower, per_step, speedup).
#[pyfunction]
fn eager_speedup_model(k: u32, d: u32) -> (f64, f64, f64, f64) {
    let m = knngf::search::eager_speedup_model(k, d);
    (
        m.higher_neighbors,
        m.lower_neighbors,
        m.similarities_per_step,
        m.speedup,
    )
}

/// Quality factor of an online build that kept `correct` reference edges,
/// as (expected_modified, expected_unmodified, quality).
#[pyfunction]
fn quality_factor(n: usize, n_a: usize, k: usize, correct: f64) -> (f64, f64, f64) {
    let report = knngf::metrics::quality_factor(n, n_a, k, correct);
    (
        report.expected_modified,
        report.expected_unmodified,
        report.quality,
    )
}

#[pymodule]
fn knngf_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Dataset>()?;
    m.add_class::<Graph>()?;
    m.add_class::<PartitionedGraph>()?;
    m.add_class::<SearchOutcome>()?;
    m.add_class::<BuildOutcome>()?;
    m.add_function(wrap_pyfunction!(euclidean_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(jaro_winkler, m)?)?;
    m.add_function(wrap_pyfunction!(cosine_2gram, m)?)?;
    m.add_function(wrap_pyfunction!(eager_speedup_model, m)?)?;
    m.add_function(wrap_pyfunction!(quality_factor, m)?)?;
    Ok(())
}
