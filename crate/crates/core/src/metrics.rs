//! Front quality metrics and multi-run statistics.
//!
//! Generational distance measures convergence toward a reference front;
//! spacing measures how evenly a front is distributed (standard deviation
//! of nearest-neighbour distances). Because the three objectives live on
//! very different scales, metric computations normally min-max normalize
//! over the union of the compared sets first; the raw variants are exposed
//! for callers that pre-scale.

use serde::{Deserialize, Serialize};

use crate::eval::EvaluatedSolution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpNorm {
    /// Euclidean nearest-neighbour distances.
    #[default]
    L2,
    /// Manhattan nearest-neighbour distances.
    L1,
}

fn dist(a: &[f64], b: &[f64], norm: SpNorm) -> f64 {
    match norm {
        SpNorm::L2 => a
            .iter()
            .zip(b)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt(),
        SpNorm::L1 => a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum(),
    }
}

/// Generational distance: `sqrt(sum_i D_i^2) / N` where `D_i` is the
/// Euclidean distance from front point `i` to its nearest reference point.
pub fn gd(front: &[Vec<f64>], reference: &[Vec<f64>]) -> f64 {
    assert!(!front.is_empty() && !reference.is_empty(), "gd needs non-empty sets");
    assert_eq!(front[0].len(), reference[0].len(), "dimensionality mismatch");
    let sum_sq: f64 = front
        .iter()
        .map(|p| {
            reference
                .iter()
                .map(|r| dist(p, r, SpNorm::L2))
                .fold(f64::INFINITY, f64::min)
                .powi(2)
        })
        .sum();
    sum_sq.sqrt() / front.len() as f64
}

/// Spacing over nearest-neighbour distances within the front.
pub fn sp(front: &[Vec<f64>], norm: SpNorm) -> f64 {
    assert!(front.len() >= 2, "spacing needs at least two points");
    let d: Vec<f64> = front
        .iter()
        .enumerate()
        .map(|(i, p)| {
            front
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, q)| dist(p, q, norm))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    sp_from_distances(&d)
}

/// Spacing aggregation over precomputed nearest-neighbour distances.
pub fn sp_from_distances(d: &[f64]) -> f64 {
    assert!(d.len() >= 2);
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    let var = d.iter().map(|x| (mean - x) * (mean - x)).sum::<f64>() / (d.len() - 1) as f64;
    var.sqrt()
}

/// Min-max normalize every point set over their union, column-wise.
/// Constant columns map to 0.5.
pub fn normalize_over_union(sets: &[&[Vec<f64>]]) -> Vec<Vec<Vec<f64>>> {
    let dim = sets
        .iter()
        .flat_map(|s| s.iter())
        .map(|p| p.len())
        .next()
        .unwrap_or(0);
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for set in sets {
        for p in set.iter() {
            for d in 0..dim {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
    }
    sets.iter()
        .map(|set| {
            set.iter()
                .map(|p| {
                    (0..dim)
                        .map(|d| {
                            if hi[d] > lo[d] {
                                (p[d] - lo[d]) / (hi[d] - lo[d])
                            } else {
                                0.5
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// GD between fronts after joint min-max normalization.
pub fn gd_normalized(front: &[Vec<f64>], reference: &[Vec<f64>]) -> f64 {
    let norm = normalize_over_union(&[front, reference]);
    gd(&norm[0], &norm[1])
}

/// SP of a front after normalization against a reference scale.
pub fn sp_normalized(front: &[Vec<f64>], reference: &[Vec<f64>], norm: SpNorm) -> f64 {
    let scaled = normalize_over_union(&[front, reference]);
    sp(&scaled[0], norm)
}

/// Share of `population` not dominated by any other member.
pub fn nondominated_fraction(population: &[EvaluatedSolution]) -> f64 {
    crate::optim::nondominated_fraction(population)
}

/// Mutually non-dominated subset of a pooled collection of objective
/// vectors (the batch reference front).
pub fn nondominated_subset(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    points
        .iter()
        .filter(|p| {
            !points
                .iter()
                .any(|q| crate::optim::pareto_dominates(q, p))
        })
        .cloned()
        .collect()
}

/// First iteration from which the non-dominated fraction stays at or
/// above `threshold`; `None` when the history never stabilizes.
pub fn iterations_to_stabilize(history: &[f64], threshold: f64) -> Option<usize> {
    assert!(!history.is_empty());
    assert!(threshold > 0.0 && threshold <= 1.0);
    let mut candidate = None;
    for (i, &f) in history.iter().enumerate() {
        if f >= threshold {
            if candidate.is_none() {
                candidate = Some(i);
            }
        } else {
            candidate = None;
        }
    }
    candidate
}

/// Per-run record of the statistics reported by the comparison tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub stabilize_iteration: Option<usize>,
    pub gd: f64,
    pub sp: f64,
    pub elapsed_seconds: f64,
    pub front_size: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Aggregate {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

impl Aggregate {
    pub fn over(values: impl IntoIterator<Item = f64>) -> Option<Aggregate> {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        Some(Aggregate {
            min: v.iter().copied().fold(f64::INFINITY, f64::min),
            max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean: v.iter().sum::<f64>() / v.len() as f64,
        })
    }
}
