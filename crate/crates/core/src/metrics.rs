use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::item::ItemId;
use crate::neighbor::NeighborList;

/// Fraction of the exact top-k a search recovered.
pub fn recall(result: &NeighborList, truth: &NeighborList) -> Result<f64> {
    if result.capacity() != truth.capacity() {
        return Err(Error::InvalidParam(format!(
            "recall compares equal-k lists, got {} vs {}",
            result.capacity(),
            truth.capacity()
        )));
    }
    let truth_ids: BTreeSet<ItemId> = truth.iter().map(|n| n.node_id).collect();
    let hits = result
        .iter()
        .filter(|n| truth_ids.contains(&n.node_id))
        .count();
    Ok(hits as f64 / truth.capacity() as f64)
}

/// Fraction of the reference graph's directed edges present in the online
/// graph. Both graphs must cover the same nodes with the same k.
pub fn correct_edges(online: &Graph, reference: &Graph) -> Result<f64> {
    if online.k() != reference.k()
        || online.len() != reference.len()
        || !reference.ids().eq(online.ids())
    {
        return Err(Error::NodeSetMismatch);
    }
    let mut present = 0usize;
    let mut total = 0usize;
    for (id, ref_list) in reference.nodes() {
        let online_list = online.node(id).expect("node sets match");
        total += ref_list.len();
        present += ref_list
            .iter()
            .filter(|n| online_list.contains(n.node_id))
            .count();
    }
    if total == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(present as f64 / total as f64)
}

/// Edge-quality accounting for a graph built online on top of an n-node
/// seed: out of the (n + n_a) * k final edges, e_m is how many an exact
/// builder would have (re)written while adding the n_a nodes, e_u is the
/// rest. Q relates the measured count of correct edges e_c to those
/// expectations: 1 when every expected-modified edge is correct, 0 when only
/// the untouched ones are.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityReport {
    pub initial_nodes: usize,
    pub added_nodes: usize,
    pub k: usize,
    pub correct: f64,
    pub expected_modified: f64,
    pub expected_unmodified: f64,
    pub quality: f64,
}

pub fn quality_factor(n: usize, n_a: usize, k: usize, e_c: f64) -> QualityReport {
    let (nf, naf, kf) = (n as f64, n_a as f64, k as f64);
    let expected_modified = naf * kf + nf * kf * naf / (naf + nf);
    let expected_unmodified = (nf + naf) * kf - expected_modified;
    QualityReport {
        initial_nodes: n,
        added_nodes: n_a,
        k,
        correct: e_c,
        expected_modified,
        expected_unmodified,
        quality: (e_c - expected_unmodified) / expected_modified,
    }
}
