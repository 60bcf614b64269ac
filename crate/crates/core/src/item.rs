use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Stable identifier of a dataset element.
pub type ItemId = u64;

/// The comparable content of an element: a dense vector or a string.
#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    Vector(Vec<f64>),
    Text(String),
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Vector(_) => "vector",
            Payload::Text(_) => "text",
        }
    }
}

/// A dataset element with a stable id.
#[derive(Debug, Clone, PartialEq)]
pub struct Item {
    pub id: ItemId,
    pub payload: Payload,
}

impl Item {
    pub fn vector(id: ItemId, values: Vec<f64>) -> Self {
        Item {
            id,
            payload: Payload::Vector(values),
        }
    }

    pub fn text(id: ItemId, value: impl Into<String>) -> Self {
        Item {
            id,
            payload: Payload::Text(value.into()),
        }
    }
}

/// Id-keyed collection of items. Vector items must share one dimension.
///
/// Iteration order is ascending by id, which keeps every algorithm that
/// sweeps the store deterministic.
#[derive(Debug, Clone, Default)]
pub struct ItemStore {
    items: BTreeMap<ItemId, Item>,
    dim: Option<usize>,
}

impl ItemStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, item: Item) -> Result<()> {
        if self.items.contains_key(&item.id) {
            return Err(Error::DuplicateId(item.id));
        }
        if let Payload::Vector(v) = &item.payload {
            if v.is_empty() {
                return Err(Error::InvalidParam("zero-dimensional vector".into()));
            }
            match self.dim {
                None => self.dim = Some(v.len()),
                Some(d) if d != v.len() => {
                    return Err(Error::DimensionMismatch {
                        left: d,
                        right: v.len(),
                    })
                }
                Some(_) => {}
            }
        }
        self.items.insert(item.id, item);
        Ok(())
    }

    pub fn from_items(items: impl IntoIterator<Item = Item>) -> Result<Self> {
        let mut store = Self::new();
        for item in items {
            store.insert(item)?;
        }
        Ok(store)
    }

    pub fn get(&self, id: ItemId) -> Option<&Item> {
        self.items.get(&id)
    }

    pub fn require(&self, id: ItemId) -> Result<&Item> {
        self.items.get(&id).ok_or(Error::UnknownItem(id))
    }

    pub fn contains(&self, id: ItemId) -> bool {
        self.items.contains_key(&id)
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Dimension shared by all vector items, if any vector has been inserted.
    pub fn dim(&self) -> Option<usize> {
        self.dim
    }

    /// Items in ascending id order.
    pub fn iter(&self) -> impl Iterator<Item = &Item> {
        self.items.values()
    }

    /// Ids in ascending order.
    pub fn ids(&self) -> impl Iterator<Item = ItemId> + '_ {
        self.items.keys().copied()
    }
}
