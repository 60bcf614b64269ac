use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::item::Payload;

/// Similarity functions mapping a pair of payloads into [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimilarityMeasure {
    /// 1 / (1 + euclidean distance) between vectors.
    EuclideanInverse,
    /// Jaro-Winkler similarity between strings.
    JaroWinkler,
    /// Cosine similarity between character-bigram count vectors.
    Cosine2Gram,
}

impl SimilarityMeasure {
    pub fn name(self) -> &'static str {
        match self {
            SimilarityMeasure::EuclideanInverse => "euclidean",
            SimilarityMeasure::JaroWinkler => "jarowinkler",
            SimilarityMeasure::Cosine2Gram => "cosine2gram",
        }
    }

    pub fn expects_vectors(self) -> bool {
        matches!(self, SimilarityMeasure::EuclideanInverse)
    }

    /// Evaluate the measure on two payloads.
    pub fn evaluate(self, a: &Payload, b: &Payload) -> Result<f64> {
        match (self, a, b) {
            (SimilarityMeasure::EuclideanInverse, Payload::Vector(x), Payload::Vector(y)) => {
                euclidean_inverse(x, y)
            }
            (SimilarityMeasure::JaroWinkler, Payload::Text(x), Payload::Text(y)) => {
                Ok(jaro_winkler(x, y))
            }
            (SimilarityMeasure::Cosine2Gram, Payload::Text(x), Payload::Text(y)) => {
                Ok(cosine_2gram(x, y))
            }
            (measure, a, b) => Err(Error::PayloadMismatch {
                measure: measure.name(),
                payload: if a.kind() == measure_payload(measure) {
                    b.kind()
                } else {
                    a.kind()
                },
            }),
        }
    }
}

fn measure_payload(measure: SimilarityMeasure) -> &'static str {
    if measure.expects_vectors() {
        "vector"
    } else {
        "text"
    }
}

impl fmt::Display for SimilarityMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SimilarityMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(SimilarityMeasure::EuclideanInverse),
            "jarowinkler" => Ok(SimilarityMeasure::JaroWinkler),
            "cosine2gram" => Ok(SimilarityMeasure::Cosine2Gram),
            other => Err(Error::InvalidParam(format!(
                "unknown measure '{other}', expected euclidean, jarowinkler or cosine2gram"
            ))),
        }
    }
}

/// 1 / (1 + ||a - b||). Identical vectors score 1, the score decays toward 0
/// with distance.
pub fn euclidean_inverse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let dist2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok(1.0 / (1.0 + dist2.sqrt()))
}

/// Jaro similarity: mean of match ratios and transposition ratio over the
/// matched characters.
fn jaro(a: &[char], b: &[char]) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let window = (a.len().max(b.len()) / 2).saturating_sub(1);
    let mut b_taken = vec![false; b.len()];
    let mut a_matches = Vec::with_capacity(a.len());
    for (i, ca) in a.iter().enumerate() {
        let lo = i.saturating_sub(window);
        let hi = (i + window + 1).min(b.len());
        for j in lo..hi {
            if !b_taken[j] && b[j] == *ca {
                b_taken[j] = true;
                a_matches.push((j, *ca));
                break;
            }
        }
    }
    if a_matches.is_empty() {
        return 0.0;
    }
    let m = a_matches.len() as f64;
    // a_matches lists matched chars in a-order; sorting a copy by the b
    // position gives them in b-order. Half the positional disagreements
    // are transpositions.
    let mut by_b = a_matches.clone();
    by_b.sort_by_key(|(j, _)| *j);
    let transpositions = a_matches
        .iter()
        .zip(&by_b)
        .filter(|((_, x), (_, y))| x != y)
        .count() as f64
        / 2.0;
    (m / a.len() as f64 + m / b.len() as f64 + (m - transpositions) / m) / 3.0
}

/// Jaro-Winkler similarity: Jaro boosted by shared prefix length (at most 4
/// characters, 0.1 per character).
pub fn jaro_winkler(a: &str, b: &str) -> f64 {
    let ca: Vec<char> = a.chars().collect();
    let cb: Vec<char> = b.chars().collect();
    let j = jaro(&ca, &cb);
    let prefix = ca
        .iter()
        .zip(&cb)
        .take(4)
        .take_while(|(x, y)| x == y)
        .count() as f64;
    (j + prefix * 0.1 * (1.0 - j)).clamp(0.0, 1.0)
}

fn bigram_counts(s: &str) -> HashMap<(char, char), u64> {
    let chars: Vec<char> = s.chars().collect();
    let mut counts = HashMap::new();
    for pair in chars.windows(2) {
        *counts.entry((pair[0], pair[1])).or_insert(0) += 1;
    }
    counts
}

/// Cosine similarity of character-bigram count vectors. Strings shorter than
/// two characters have no bigrams and score 0 against everything.
pub fn cosine_2gram(a: &str, b: &str) -> f64 {
    let ca = bigram_counts(a);
    let cb = bigram_counts(b);
    if ca.is_empty() || cb.is_empty() {
        return 0.0;
    }
    let dot: u64 = ca
        .iter()
        .filter_map(|(g, &x)| cb.get(g).map(|&y| x * y))
        .sum();
    if dot == 0 {
        return 0.0;
    }
    let na: u64 = ca.values().map(|&x| x * x).sum();
    let nb: u64 = cb.values().map(|&x| x * x).sum();
    // Counts are small integers, so na * nb is exact in f64 and identical
    // strings divide to exactly 1.
    (dot as f64 / (na as f64 * nb as f64).sqrt()).clamp(0.0, 1.0)
}
