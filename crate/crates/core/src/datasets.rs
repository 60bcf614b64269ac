use std::fs;
use std::io::{BufWriter, Write as _};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::item::{Item, ItemId, ItemStore, Payload};

/// Parameters of the synthetic Gaussian-mixture vector generator.
#[derive(Debug, Clone)]
pub struct SyntheticConfig {
    pub n: usize,
    pub dim: usize,
    pub centers: usize,
    pub center_spread: f64,
    pub cluster_stddev: f64,
    pub rng_seed: u64,
}

impl SyntheticConfig {
    /// Defaults chosen so the mixture's clusters overlap mildly: searches
    /// are non-trivial but hill climbing still converges.
    pub fn new(n: usize, rng_seed: u64) -> Self {
        SyntheticConfig {
            n,
            dim: 3,
            centers: 5,
            center_spread: 100.0,
            cluster_stddev: 5.0,
            rng_seed,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParam("n must be at least 1".into()));
        }
        if self.dim == 0 {
            return Err(Error::InvalidParam("dim must be at least 1".into()));
        }
        if self.centers == 0 {
            return Err(Error::InvalidParam("centers must be at least 1".into()));
        }
        if !(self.center_spread >= 0.0) || !(self.cluster_stddev >= 0.0) {
            return Err(Error::InvalidParam(
                "center_spread and cluster_stddev must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// Draw items from a mixture of isotropic Gaussians: centers uniform in
/// [0, center_spread]^dim, each point a uniformly chosen center plus noise.
/// Ids run 0..n-1; the same seed reproduces the payloads bit for bit.
pub fn generate_synthetic(config: &SyntheticConfig) -> Result<ItemStore> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
    let centers: Vec<Vec<f64>> = (0..config.centers)
        .map(|_| {
            (0..config.dim)
                .map(|_| rng.random::<f64>() * config.center_spread)
                .collect()
        })
        .collect();
    let noise = Normal::new(0.0, config.cluster_stddev)
        .map_err(|e| Error::InvalidParam(format!("bad cluster_stddev: {e}")))?;
    let mut store = ItemStore::new();
    for id in 0..config.n as ItemId {
        let center = &centers[rng.random_range(0..config.centers)];
        let point: Vec<f64> = center.iter().map(|c| c + noise.sample(&mut rng)).collect();
        store.insert(Item::vector(id, point))?;
    }
    Ok(store)
}

/// One item per non-empty line, id = dense index, text lowercased and
/// trimmed.
pub fn load_text(path: impl AsRef<Path>) -> Result<ItemStore> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut store = ItemStore::new();
    let mut id: ItemId = 0;
    for line in text.lines() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        store.insert(Item::text(id, trimmed.to_lowercase()))?;
        id += 1;
    }
    Ok(store)
}

/// Write vector items as `id<tab>v1,v2,...,vd` lines.
pub fn save_vectors(items: &ItemStore, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    for item in items.iter() {
        let Payload::Vector(v) = &item.payload else {
            return Err(Error::PayloadMismatch {
                measure: "vector file",
                payload: item.payload.kind(),
            });
        };
        let coords: Vec<String> = v.iter().map(|x| format!("{x:.16e}")).collect();
        writeln!(out, "{}\t{}", item.id, coords.join(","))
            .map_err(|e| Error::io(path, e))?;
    }
    out.flush().map_err(|e| Error::io(path, e))
}

/// Read vector items written by [`save_vectors`].
pub fn load_vectors(path: impl AsRef<Path>) -> Result<ItemStore> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut store = ItemStore::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (id_field, coord_field) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, lineno, "expected id<tab>coords"))?;
        let id: ItemId = id_field
            .parse()
            .map_err(|_| Error::parse(path, lineno, "bad item id"))?;
        let coords: Vec<f64> = coord_field
            .split(',')
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::parse(path, lineno, "bad coordinate"))?;
        store.insert(Item::vector(id, coords))?;
    }
    Ok(store)
}
