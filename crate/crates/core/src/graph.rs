use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use crate::error::{Error, Result};
use crate::item::{Item, ItemId, ItemStore};
use crate::neighbor::{Neighbor, NeighborList};
use crate::similarity::SimilarityMeasure;

/// A directed k-nn graph: every node keeps a similarity-ranked list of up to
/// k neighbors. The backing item store holds the payloads the similarities
/// were computed from.
///
/// Neighbor ids are not required to be nodes of this graph: a partition of a
/// larger graph keeps its edges toward other partitions even though it only
/// owns its own nodes.
#[derive(Debug, Clone)]
pub struct Graph {
    k: usize,
    measure: SimilarityMeasure,
    nodes: BTreeMap<ItemId, NeighborList>,
    items: ItemStore,
}

impl Graph {
    pub fn new(k: usize, measure: SimilarityMeasure) -> Self {
        assert!(k > 0, "graph degree k must be positive");
        Graph {
            k,
            measure,
            nodes: BTreeMap::new(),
            items: ItemStore::new(),
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn measure(&self) -> SimilarityMeasure {
        self.measure
    }

    pub fn items(&self) -> &ItemStore {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains_node(&self, id: ItemId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn node(&self, id: ItemId) -> Option<&NeighborList> {
        self.nodes.get(&id)
    }

    pub fn node_mut(&mut self, id: ItemId) -> Option<&mut NeighborList> {
        self.nodes.get_mut(&id)
    }

    /// Nodes in ascending id order.
    pub fn nodes(&self) -> impl Iterator<Item = (ItemId, &NeighborList)> {
        self.nodes.iter().map(|(id, list)| (*id, list))
    }

    /// Node ids in ascending order.
    pub fn ids(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.nodes.keys().copied()
    }

    /// Insert a node together with its payload and neighbor list.
    pub fn add_node(&mut self, item: Item, neighbors: NeighborList) -> Result<()> {
        if neighbors.capacity() != self.k {
            return Err(Error::InvalidParam(format!(
                "neighbor list capacity {} does not match graph k {}",
                neighbors.capacity(),
                self.k
            )));
        }
        if neighbors.contains(item.id) {
            return Err(Error::InvalidParam(format!(
                "node {} cannot be its own neighbor",
                item.id
            )));
        }
        if self.nodes.contains_key(&item.id) {
            return Err(Error::DuplicateId(item.id));
        }
        let id = item.id;
        if !self.items.contains(id) {
            self.items.insert(item)?;
        }
        self.nodes.insert(id, neighbors);
        Ok(())
    }

    /// Write one line per node: the node id followed by tab-separated
    /// (neighbor id, similarity) pairs. Similarities use 17 significant
    /// digits so reloading reproduces them bit-exactly.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        for (id, list) in &self.nodes {
            write!(out, "{id}").map_err(|e| Error::io(path, e))?;
            for n in list.iter() {
                write!(out, "\t{}\t{:.16e}", n.node_id, n.similarity)
                    .map_err(|e| Error::io(path, e))?;
            }
            writeln!(out).map_err(|e| Error::io(path, e))?;
        }
        out.flush().map_err(|e| Error::io(path, e))
    }

    /// Load a graph saved by [`Graph::save`]. The item store is supplied
    /// separately (items are serialized by the dataset module); k is the
    /// largest per-node pair count in the file.
    pub fn load(
        path: impl AsRef<Path>,
        items: ItemStore,
        measure: SimilarityMeasure,
    ) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut rows: Vec<(ItemId, Vec<Neighbor>)> = Vec::new();
        let mut k = 0usize;
        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split('\t');
            let id: ItemId = fields
                .next()
                .unwrap()
                .parse()
                .map_err(|_| Error::parse(path, lineno, "bad node id"))?;
            let rest: Vec<&str> = fields.collect();
            if rest.len() % 2 != 0 {
                return Err(Error::parse(path, lineno, "odd field count"));
            }
            let mut neighbors = Vec::with_capacity(rest.len() / 2);
            for pair in rest.chunks(2) {
                let node_id: ItemId = pair[0]
                    .parse()
                    .map_err(|_| Error::parse(path, lineno, "bad neighbor id"))?;
                let similarity: f64 = pair[1]
                    .parse()
                    .map_err(|_| Error::parse(path, lineno, "bad similarity"))?;
                if !similarity.is_finite() || similarity < 0.0 {
                    return Err(Error::parse(path, lineno, "similarity out of range"));
                }
                neighbors.push(Neighbor::new(node_id, similarity));
            }
            k = k.max(neighbors.len());
            rows.push((id, neighbors));
        }
        if rows.is_empty() || k == 0 {
            return Err(Error::parse(path, 0, "no graph records"));
        }
        let mut graph = Graph::new(k, measure);
        graph.items = items;
        for (id, neighbors) in rows {
            let item = graph.items.require(id)?.clone();
            let mut list = NeighborList::new(k);
            for n in neighbors {
                list.insert(n);
            }
            graph.add_node(item, list)?;
        }
        Ok(graph)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::item::Payload;

    fn small_graph() -> Graph {
        let mut g = Graph::new(2, SimilarityMeasure::EuclideanInverse);
        for id in 0..3u64 {
            let mut list = NeighborList::new(2);
            for other in 0..3u64 {
                if other != id {
                    list.insert(Neighbor::new(other, 1.0 / (1.0 + other as f64)));
                }
            }
            g.add_node(Item::vector(id, vec![id as f64, 0.5]), list)
                .unwrap();
        }
        g
    }

    #[test]
    fn rejects_self_edges_and_duplicates() {
        let mut g = Graph::new(1, SimilarityMeasure::EuclideanInverse);
        let mut list = NeighborList::new(1);
        list.insert(Neighbor::new(0, 1.0));
        let err = g.add_node(Item::vector(0, vec![0.0]), list.clone()).unwrap_err();
        assert!(matches!(err, Error::InvalidParam(_)));

        g.add_node(Item::vector(0, vec![0.0]), NeighborList::new(1))
            .unwrap();
        let err = g
            .add_node(Item::vector(0, vec![1.0]), NeighborList::new(1))
            .unwrap_err();
        assert!(matches!(err, Error::DuplicateId(0)));
    }

    #[test]
    fn save_load_round_trips_bit_exact() {
        let g = small_graph();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("graph.tsv");
        g.save(&path).unwrap();
        let loaded = Graph::load(&path, g.items().clone(), g.measure()).unwrap();
        assert_eq!(loaded.k(), g.k());
        assert_eq!(loaded.len(), g.len());
        for (id, list) in g.nodes() {
            let other = loaded.node(id).unwrap();
            assert_eq!(other.entries(), list.entries());
        }
        match loaded.items().require(1).map(|i| &i.payload) {
            Ok(Payload::Vector(v)) => assert_eq!(v, &vec![1.0, 0.5]),
            other => panic!("unexpected payload: {other:?}"),
        }
    }

    #[test]
    fn load_rejects_malformed_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.tsv");
        std::fs::write(&path, "0\t1\n").unwrap();
        let items = ItemStore::from_items([Item::vector(0, vec![0.0])]).unwrap();
        let err = Graph::load(&path, items, SimilarityMeasure::EuclideanInverse).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }
}
