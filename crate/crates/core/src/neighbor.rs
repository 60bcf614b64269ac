use std::cmp::Ordering;

use crate::item::ItemId;

/// One directed edge of the graph: a target node and its similarity to the
/// owning node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub node_id: ItemId,
    pub similarity: f64,
}

impl Neighbor {
    pub fn new(node_id: ItemId, similarity: f64) -> Self {
        Neighbor {
            node_id,
            similarity,
        }
    }
}

/// Ranking order shared by neighbor lists and search results: higher
/// similarity first, ties broken by smaller node id.
pub fn rank_cmp(a: &Neighbor, b: &Neighbor) -> Ordering {
    b.similarity
        .total_cmp(&a.similarity)
        .then_with(|| a.node_id.cmp(&b.node_id))
}

/// Fixed-capacity list of the best neighbors seen so far, kept sorted by
/// [`rank_cmp`]. Inserting a weaker candidate into a full list is a no-op;
/// a stronger one evicts the current weakest entry.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborList {
    capacity: usize,
    entries: Vec<Neighbor>,
}

impl NeighborList {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "neighbor list capacity must be positive");
        NeighborList {
            capacity,
            entries: Vec::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() == self.capacity
    }

    /// Neighbors in rank order (most similar first).
    pub fn entries(&self) -> &[Neighbor] {
        &self.entries
    }

    pub fn contains(&self, id: ItemId) -> bool {
        self.entries.iter().any(|n| n.node_id == id)
    }

    /// Offer a candidate. Returns true when the list changed.
    pub fn insert(&mut self, candidate: Neighbor) -> bool {
        if self.entries.iter().any(|n| n.node_id == candidate.node_id) {
            return false;
        }
        if self.is_full() {
            let weakest = self.entries.last().expect("full list is non-empty");
            if rank_cmp(&candidate, weakest) != Ordering::Less {
                return false;
            }
            self.entries.pop();
        }
        let at = self
            .entries
            .partition_point(|n| rank_cmp(n, &candidate) == Ordering::Less);
        self.entries.insert(at, candidate);
        true
    }

    /// Similarity of the weakest kept neighbor, if the list is full.
    pub fn threshold(&self) -> Option<f64> {
        if self.is_full() {
            self.entries.last().map(|n| n.similarity)
        } else {
            None
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = &Neighbor> {
        self.entries.iter()
    }
}
