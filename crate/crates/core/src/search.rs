use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::item::{ItemId, Payload};
use crate::neighbor::{Neighbor, NeighborList};
use crate::scoring::{QueryScorer, SimilarityCounter};

/// Knobs of one graph search.
///
/// The evaluation budget is floor(n / speedup) distinct similarity
/// computations, where n is the size of the searched graph. `expansion`
/// controls the restart-skip rule of the improved search: a fresh random
/// start r is abandoned when sim(query, r) < s_max / expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchParams {
    pub k_results: usize,
    pub speedup: f64,
    pub expansion: f64,
    /// Restart cap for the classic baseline; `None` stops on budget alone.
    pub restarts_baseline: Option<u64>,
    pub rng_seed: u64,
}

impl SearchParams {
    pub fn new(k_results: usize, speedup: f64, expansion: f64, rng_seed: u64) -> Self {
        SearchParams {
            k_results,
            speedup,
            expansion,
            restarts_baseline: None,
            rng_seed,
        }
    }

    pub fn with_k(mut self, k_results: usize) -> Self {
        self.k_results = k_results;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_results == 0 {
            return Err(Error::InvalidParam("k_results must be at least 1".into()));
        }
        if !(self.speedup > 0.0) || !self.speedup.is_finite() {
            return Err(Error::InvalidParam(
                "speedup must be a positive finite number".into(),
            ));
        }
        if !(self.expansion >= 1.0) {
            return Err(Error::InvalidParam("expansion must be at least 1".into()));
        }
        Ok(())
    }

    /// Similarity budget for a graph of n nodes.
    pub fn budget_for(&self, n: usize) -> Result<u64> {
        let budget = (n as f64 / self.speedup).floor() as u64;
        if budget < self.k_results as u64 {
            return Err(Error::BudgetTooSmall {
                budget,
                k: self.k_results,
            });
        }
        Ok(budget)
    }
}

/// Outcome of one search: the best nodes found plus cost accounting.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    pub results: NeighborList,
    pub similarities_computed: u64,
    pub restarts: u64,
    pub nodes_visited: u64,
}

/// Classic hill climbing: from a random start, evaluate every neighbor of
/// the current node and move to the best one as long as it improves; at a
/// local maximum restart somewhere random. Stops when the budget is spent.
pub fn gnns_search(graph: &Graph, query: &Payload, params: &SearchParams) -> Result<SearchReport> {
    run(graph, query, params, Descent::FullScan)
}

/// Improved hill climbing. Two changes against the classic walk: a fresh
/// random start is abandoned when its similarity falls below s_max /
/// expansion (the one evaluation still counts), and the walk eagerly moves
/// to the first neighbor that improves on the current node instead of
/// scanning all of them.
pub fn ignns_search(graph: &Graph, query: &Payload, params: &SearchParams) -> Result<SearchReport> {
    run(graph, query, params, Descent::Eager)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Descent {
    FullScan,
    Eager,
}

fn run(
    graph: &Graph,
    query: &Payload,
    params: &SearchParams,
    descent: Descent,
) -> Result<SearchReport> {
    params.validate()?;
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let budget = params.budget_for(graph.len())?;
    let mut scorer = QueryScorer::new(
        graph.items(),
        query,
        graph.measure(),
        SimilarityCounter::with_budget(budget),
    );
    let (results, restarts, nodes_visited) = climb(graph, &mut scorer, params, descent)?;
    Ok(SearchReport {
        results,
        similarities_computed: scorer.similarities_computed(),
        restarts,
        nodes_visited,
    })
}

/// Run the improved search against an externally owned scorer, so a caller
/// can keep using the accumulated similarity cache afterwards.
pub(crate) fn ignns_with_scorer(
    graph: &Graph,
    scorer: &mut QueryScorer<'_>,
    params: &SearchParams,
) -> Result<(NeighborList, u64, u64)> {
    params.validate()?;
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    climb(graph, scorer, params, Descent::Eager)
}

/// Score a node unless the budget is already spent; `None` means the search
/// must stop, keeping whatever it has.
fn try_score(scorer: &mut QueryScorer<'_>, id: ItemId) -> Result<Option<f64>> {
    match scorer.score(id) {
        Ok(s) => Ok(Some(s)),
        Err(Error::BudgetExhausted { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn climb(
    graph: &Graph,
    scorer: &mut QueryScorer<'_>,
    params: &SearchParams,
    descent: Descent,
) -> Result<(NeighborList, u64, u64)> {
    let ids: Vec<ItemId> = graph.ids().collect();
    let n = ids.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);
    let mut best = NeighborList::new(params.k_results);
    let mut restarts: u64 = 0;
    let mut visited: u64 = 0;

    'search: while !scorer.exhausted() && scorer.scored_count() < n {
        if descent == Descent::FullScan {
            if let Some(cap) = params.restarts_baseline {
                if restarts >= cap {
                    break;
                }
            }
        }
        // A start landing on an already-evaluated node is redrawn for free;
        // at least one unevaluated node exists here, so this terminates.
        let start = loop {
            let candidate = ids[rng.random_range(0..n)];
            if !scorer.is_scored(candidate) {
                break candidate;
            }
        };
        restarts += 1;
        let s_max = best.entries().first().map_or(0.0, |e| e.similarity);
        let Some(start_sim) = try_score(scorer, start)? else {
            break;
        };
        best.insert(Neighbor::new(start, start_sim));
        if descent == Descent::Eager && start_sim < s_max / params.expansion {
            continue;
        }

        let mut current = start;
        let mut current_sim = start_sim;
        visited += 1;
        loop {
            let list = graph.node(current).expect("walk stays on graph nodes");
            let mut step: Option<(ItemId, f64)> = None;
            for nb in list.iter() {
                // Edges leading out of this graph's node set (partition
                // borders) are not traversable here.
                if !graph.contains_node(nb.node_id) {
                    continue;
                }
                let Some(s) = try_score(scorer, nb.node_id)? else {
                    break 'search;
                };
                best.insert(Neighbor::new(nb.node_id, s));
                match descent {
                    Descent::Eager => {
                        if s > current_sim {
                            step = Some((nb.node_id, s));
                            break;
                        }
                    }
                    Descent::FullScan => {
                        let improves = match step {
                            None => s > current_sim,
                            Some((best_id, best_sim)) => {
                                s > best_sim || (s == best_sim && nb.node_id < best_id)
                            }
                        };
                        if improves {
                            step = Some((nb.node_id, s));
                        }
                    }
                }
            }
            match step {
                Some((id, s)) => {
                    current = id;
                    current_sim = s;
                    visited += 1;
                }
                None => break,
            }
        }
    }
    Ok((best, restarts, visited))
}

/// Numbers of the closed-form cost model for eager descent on a k-nn graph
/// whose walk sits d hops from the optimum: expected counts of neighbors
/// more/less similar than the current node, expected similarity evaluations
/// per step, and the implied speedup over scanning all k neighbors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EagerSpeedup {
    pub higher_neighbors: f64,
    pub lower_neighbors: f64,
    pub similarities_per_step: f64,
    pub speedup: f64,
}

pub fn eager_speedup_model(k: u32, d: u32) -> EagerSpeedup {
    assert!(k >= 1 && d >= 1, "model defined for k >= 1, d >= 1");
    let k = f64::from(k);
    let higher = k / 2f64.powi(d as i32);
    let lower = k - higher;
    let per_step = lower / (1.0 + higher);
    EagerSpeedup {
        higher_neighbors: higher,
        lower_neighbors: lower,
        similarities_per_step: per_step,
        speedup: k / per_step,
    }
}
