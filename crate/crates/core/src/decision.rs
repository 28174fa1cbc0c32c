//! Stage 2: decision analysis over a Pareto front.
//!
//! The front is soft-clustered into three preference groups with fuzzy
//! c-means on min-max-normalized objectives; each cluster is labeled with
//! the objective its centre is best at; and within each cluster the
//! members are ranked by grey relation projection against the ideal
//! scheme. The highest-ranked member of each cluster is that preference's
//! compromise recommendation.

use serde::{Deserialize, Serialize};

use crate::eval::EvaluatedSolution;
use crate::seed::{domain, substream};
use rand::Rng;

/// Distinguishing coefficient of the grey relation coefficient.
pub const GRP_RHO: f64 = 0.5;
pub const FCM_FUZZINESS: f64 = 2.0;
pub const FCM_TOLERANCE: f64 = 1e-6;
pub const FCM_MAX_ITERATIONS: usize = 200;

#[derive(Debug, thiserror::Error)]
pub enum DecisionError {
    #[error("clustering needs at least {need} points (got {got})")]
    TooFewPoints { need: usize, got: usize },
    #[error("fuzziness must exceed 1")]
    BadFuzziness,
    #[error("weights must be nonnegative with a positive sum")]
    BadWeights,
}

/// Min-max normalize columns of a point set; constant columns map to 0.5.
pub fn min_max_normalize(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    if points.is_empty() {
        return vec![];
    }
    let dim = points[0].len();
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in points {
        for d in 0..dim {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    points
        .iter()
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
}

#[derive(Debug, Clone, Serialize)]
pub struct FcmResult {
    /// Membership matrix, one row per point, rows sum to 1.
    pub memberships: Vec<Vec<f64>>,
    /// Cluster centres in the original objective space.
    pub centers: Vec<Vec<f64>>,
    /// Cluster centres in the normalized space the algorithm ran in.
    pub centers_norm: Vec<Vec<f64>>,
    pub iterations: usize,
    /// Final value of the membership-weighted squared-distance loss,
    /// evaluated in normalized space.
    pub loss: f64,
}

/// The loss the clustering minimizes: `sum_ij mu_ij^t ||w_i - v_j||^2`.
pub fn fcm_loss(points_norm: &[Vec<f64>], memberships: &[Vec<f64>], centers_norm: &[Vec<f64>], t: f64) -> f64 {
    points_norm
        .iter()
        .zip(memberships)
        .map(|(p, mu)| {
            centers_norm
                .iter()
                .zip(mu)
                .map(|(c, m)| m.powf(t) * dist_sq(p, c))
                .sum::<f64>()
        })
        .sum()
}

fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Fuzzy c-means over `points` (normalized internally). Alternates centre
/// and membership updates until the largest centre movement drops below
/// `tol`; the loss is non-increasing across iterations.
pub fn fcm(
    points: &[Vec<f64>],
    c: usize,
    t: f64,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<FcmResult, DecisionError> {
    if points.len() < c {
        return Err(DecisionError::TooFewPoints {
            need: c,
            got: points.len(),
        });
    }
    if t <= 1.0 {
        return Err(DecisionError::BadFuzziness);
    }
    let n = points.len();
    let dim = points[0].len();
    let norm = min_max_normalize(points);

    // random membership rows, normalized to sum 1
    let mut rng = substream(seed, &[domain::FCM_INIT]);
    let mut mu: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let row: Vec<f64> = (0..c).map(|_| rng.random_range(1e-6..1.0)).collect();
            let s: f64 = row.iter().sum();
            row.into_iter().map(|v| v / s).collect()
        })
        .collect();

    let mut centers = vec![vec![0.0; dim]; c];
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        // centres from memberships
        let mut next = vec![vec![0.0; dim]; c];
        for j in 0..c {
            let mut weight = 0.0;
            for i in 0..n {
                let w = mu[i][j].powf(t);
                weight += w;
                for d in 0..dim {
                    next[j][d] += w * norm[i][d];
                }
            }
            if weight > 0.0 {
                for d in 0..dim {
                    next[j][d] /= weight;
                }
            }
        }
        let movement = centers
            .iter()
            .zip(&next)
            .map(|(a, b)| dist_sq(a, b).sqrt())
            .fold(0.0f64, f64::max);
        centers = next;

        // memberships from centres
        for i in 0..n {
            let d: Vec<f64> = (0..c).map(|j| dist_sq(&norm[i], &centers[j])).collect();
            if let Some(hit) = d.iter().position(|&x| x == 0.0) {
                for j in 0..c {
                    mu[i][j] = if j == hit { 1.0 } else { 0.0 };
                }
                continue;
            }
            let expo = 1.0 / (t - 1.0);
            for j in 0..c {
                let denom: f64 = (0..c).map(|k| (d[j] / d[k]).powf(expo)).sum();
                mu[i][j] = 1.0 / denom;
            }
        }

        if iterations > 1 && movement < tol {
            break;
        }
    }

    let loss = fcm_loss(&norm, &mu, &centers, t);

    // denormalize the centres back into objective space
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for p in points {
        for d in 0..dim {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let centers_orig = centers
        .iter()
        .map(|c| {
            (0..dim)
                .map(|d| {
                    if hi[d] > lo[d] {
                        lo[d] + c[d] * (hi[d] - lo[d])
                    } else {
                        lo[d]
                    }
                })
                .collect()
        })
        .collect();

    Ok(FcmResult {
        memberships: mu,
        centers: centers_orig,
        centers_norm: centers,
        iterations,
        loss,
    })
}

/// Objective identity for cluster labeling and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveKind {
    Loss,
    Emission,
    VoltageDeviation,
}

impl ObjectiveKind {
    pub const ALL: [ObjectiveKind; 3] = [
        ObjectiveKind::Loss,
        ObjectiveKind::Emission,
        ObjectiveKind::VoltageDeviation,
    ];

    pub fn short(self) -> &'static str {
        match self {
            ObjectiveKind::Loss => "O",
            ObjectiveKind::Emission => "E",
            ObjectiveKind::VoltageDeviation => "Vde",
        }
    }
}

/// Assign each of three cluster centres (normalized space) the objective
/// it represents best: the permutation minimizing the sum of assigned
/// centre coordinates, ties broken in objective order.
pub fn label_clusters(centers_norm: &[Vec<f64>]) -> Vec<ObjectiveKind> {
    assert_eq!(centers_norm.len(), 3, "three preference clusters");
    assert!(centers_norm.iter().all(|c| c.len() == 3));
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut best = PERMS[0];
    let mut best_cost = f64::INFINITY;
    for perm in PERMS {
        let cost: f64 = (0..3).map(|cluster| centers_norm[cluster][perm[cluster]]).sum();
        if cost < best_cost - 1e-15 {
            best_cost = cost;
            best = perm;
        }
    }
    best.iter().map(|&k| ObjectiveKind::ALL[k]).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct GrpRanking {
    /// Benefit-normalized member matrix.
    pub benefit: Vec<Vec<f64>>,
    /// Grey relation coefficients against the positive and negative ideals.
    pub gamma_pos: Vec<Vec<f64>>,
    pub gamma_neg: Vec<Vec<f64>>,
    /// Projections on the ideal scheme.
    pub v_pos: Vec<f64>,
    pub v_neg: Vec<f64>,
    /// Projection of the ideal scheme itself.
    pub v_ideal: f64,
    /// Priority membership per member, in `[0, 1]`.
    pub d: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Grey relation projection ranking of a member set (minimized raw
/// objectives). Steps: benefit normalization within the set, grey
/// relation coefficients against the all-ones / all-zeros ideals with
/// distinguishing coefficient [`GRP_RHO`], weighted projection, and the
/// priority membership.
pub fn grp_rank(members: &[Vec<f64>], weights: &[f64]) -> Result<GrpRanking, DecisionError> {
    if members.is_empty() {
        return Err(DecisionError::TooFewPoints { need: 1, got: 0 });
    }
    let dim = members[0].len();
    assert_eq!(weights.len(), dim, "one weight per indicator");
    if weights.iter().any(|w| *w < 0.0) || weights.iter().sum::<f64>() <= 0.0 {
        return Err(DecisionError::BadWeights);
    }
    let wsum: f64 = weights.iter().sum();
    let w: Vec<f64> = weights.iter().map(|x| x / wsum).collect();
    let wnorm = w.iter().map(|x| x * x).sum::<f64>().sqrt();

    // benefit scores: best (minimal) raw value maps to 1
    let n = members.len();
    let mut benefit = vec![vec![0.0; dim]; n];
    for k in 0..dim {
        let lo = members.iter().map(|m| m[k]).fold(f64::INFINITY, f64::min);
        let hi = members.iter().map(|m| m[k]).fold(f64::NEG_INFINITY, f64::max);
        for i in 0..n {
            benefit[i][k] = if hi > lo { (hi - members[i][k]) / (hi - lo) } else { 1.0 };
        }
    }

    let coeffs = |ideal: f64| -> Vec<Vec<f64>> {
        let deltas: Vec<Vec<f64>> = benefit
            .iter()
            .map(|row| row.iter().map(|b| (b - ideal).abs()).collect())
            .collect();
        let dmin = deltas
            .iter()
            .flatten()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let dmax = deltas
            .iter()
            .flatten()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        if dmax == 0.0 {
            // every scheme coincides with this ideal
            return vec![vec![1.0; dim]; n];
        }
        deltas
            .iter()
            .map(|row| {
                row.iter()
                    .map(|dl| (dmin + GRP_RHO * dmax) / (dl + GRP_RHO * dmax))
                    .collect()
            })
            .collect()
    };
    let gamma_pos = coeffs(1.0);
    let gamma_neg = coeffs(0.0);

    let project = |gamma: &[Vec<f64>]| -> Vec<f64> {
        gamma
            .iter()
            .map(|row| row.iter().zip(&w).map(|(g, wk)| g * wk * wk / wnorm).sum())
            .collect()
    };
    let v_pos = project(&gamma_pos);
    let v_neg = project(&gamma_neg);
    // the ideal scheme has every coefficient equal to 1
    let v_ideal = wnorm;

    let d = v_pos
        .iter()
        .zip(&v_neg)
        .map(|(vp, vn)| {
            let num = (v_ideal - vn) * (v_ideal - vn);
            let den = num + (v_ideal - vp) * (v_ideal - vp);
            if (v_ideal - vp).abs() == 0.0 {
                // the scheme coincides with the ideal projection
                1.0
            } else if den == 0.0 {
                1.0
            } else {
                num / den
            }
        })
        .collect();

    Ok(GrpRanking {
        benefit,
        gamma_pos,
        gamma_neg,
        v_pos,
        v_neg,
        v_ideal,
        d,
        weights: w,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterReport {
    pub objective: ObjectiveKind,
    /// Indices into the input front.
    pub member_indices: Vec<usize>,
    /// Priority membership per member, aligned with `member_indices`.
    pub d: Vec<f64>,
    /// Index (into the input front) of the recommended compromise.
    pub compromise: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompromiseReport {
    pub weights: Vec<f64>,
    pub clusters: Vec<ClusterReport>,
    pub fcm_iterations: usize,
    pub fcm_loss: f64,
}

impl CompromiseReport {
    /// The three selected front indices in cluster order.
    pub fn selected(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.compromise).collect()
    }

    pub fn cluster_for(&self, kind: ObjectiveKind) -> &ClusterReport {
        self.clusters
            .iter()
            .find(|c| c.objective == kind)
            .expect("each objective labels exactly one cluster")
    }
}

/// Full stage-2 pipeline over a front of evaluated solutions: cluster,
/// label, rank, and pick the best-ranked member of each cluster.
pub fn select_compromise(
    front: &[EvaluatedSolution],
    weights: &[f64],
    seed: u64,
) -> Result<CompromiseReport, DecisionError> {
    if front.len() < 3 {
        return Err(DecisionError::TooFewPoints {
            need: 3,
            got: front.len(),
        });
    }
    let points: Vec<Vec<f64>> = front.iter().map(|s| s.objectives.clone()).collect();
    let clustering = fcm(
        &points,
        3,
        FCM_FUZZINESS,
        FCM_TOLERANCE,
        FCM_MAX_ITERATIONS,
        seed,
    )?;

    // hard assignment by maximal membership
    let mut assignment: Vec<usize> = clustering
        .memberships
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
                .map(|(j, _)| j)
                .unwrap()
        })
        .collect();

    // an emptied cluster steals its strongest supporter so every
    // preference keeps a recommendation
    for j in 0..3 {
        if !assignment.contains(&j) {
            let best = (0..front.len())
                .max_by(|&a, &b| {
                    clustering.memberships[a][j]
                        .partial_cmp(&clustering.memberships[b][j])
                        .unwrap()
                        .then(b.cmp(&a))
                })
                .unwrap();
            assignment[best] = j;
        }
    }

    let labels = label_clusters(&clustering.centers_norm);

    let mut clusters = Vec::with_capacity(3);
    for j in 0..3 {
        let mut member_indices: Vec<usize> =
            (0..front.len()).filter(|&i| assignment[i] == j).collect();
        // rank in lexicographic objective order so ties resolve stably
        member_indices.sort_by(|&a, &b| {
            points[a]
                .iter()
                .zip(points[b].iter())
                .find_map(|(x, y)| x.partial_cmp(y).filter(|o| o.is_ne()))
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        let member_points: Vec<Vec<f64>> =
            member_indices.iter().map(|&i| points[i].clone()).collect();
        let ranking = grp_rank(&member_points, weights)?;
        let best_local = (0..member_indices.len())
            .max_by(|&a, &b| {
                ranking.d[a]
                    .partial_cmp(&ranking.d[b])
                    .unwrap()
                    .then(b.cmp(&a))
            })
            .unwrap();
        clusters.push(ClusterReport {
            objective: labels[j],
            compromise: member_indices[best_local],
            member_indices,
            d: ranking.d,
        });
    }

    Ok(CompromiseReport {
        weights: {
            let s: f64 = weights.iter().sum();
            weights.iter().map(|w| w / s).collect()
        },
        clusters,
        fcm_iterations: clustering.iterations,
        fcm_loss: clustering.loss,
    })
}

/// Stage-2 seed derived from a pipeline master seed.
pub fn decide_seed(master: u64) -> u64 {
    crate::seed::derive(master, &[domain::DECIDE_STAGE])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth(objectives: &[f64]) -> EvaluatedSolution {
        EvaluatedSolution {
            genes: vec![],
            objectives: objectives.to_vec(),
            violation: 0.0,
            feasible: true,
            converged: true,
            outer_iterations: 0,
        }
    }

    #[test]
    fn single_cluster_centre_is_the_mean() {
        let pts = vec![vec![0.0, 2.0], vec![1.0, 4.0], vec![2.0, 6.0]];
        let r = fcm(&pts, 1, 2.0, 1e-9, 100, 1).unwrap();
        assert!((r.centers[0][0] - 1.0).abs() < 1e-9);
        assert!((r.centers[0][1] - 4.0).abs() < 1e-9);
        for row in &r.memberships {
            assert_eq!(row, &vec![1.0]);
        }
    }

    #[test]
    fn two_well_separated_groups_cluster_crisply() {
        let pts = vec![vec![0.0], vec![0.0], vec![2.0], vec![2.0]];
        let r = fcm(&pts, 2, 2.0, 1e-9, 200, 7).unwrap();
        let mut centers: Vec<f64> = r.centers.iter().map(|c| c[0]).collect();
        centers.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((centers[0] - 0.0).abs() < 1e-6, "{centers:?}");
        assert!((centers[1] - 2.0).abs() < 1e-6);
        for row in &r.memberships {
            assert!(row.iter().cloned().fold(0.0, f64::max) > 0.99);
        }
    }

    #[test]
    fn membership_rows_sum_to_one_and_loss_recomputes() {
        let pts: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos(), i as f64])
            .collect();
        let r = fcm(&pts, 3, 2.0, 1e-7, 200, 3).unwrap();
        for row in &r.memberships {
            assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        let norm = min_max_normalize(&pts);
        let recomputed = fcm_loss(&norm, &r.memberships, &r.centers_norm, 2.0);
        assert!((recomputed - r.loss).abs() < 1e-12);
    }

    #[test]
    fn fcm_loss_is_monotone_nonincreasing() {
        // re-run the alternation manually and check the recorded losses
        let pts: Vec<Vec<f64>> = (0..30)
            .map(|i| {
                vec![
                    ((i * 7) % 13) as f64,
                    ((i * 3) % 5) as f64,
                    ((i * 11) % 17) as f64,
                ]
            })
            .collect();
        let norm = min_max_normalize(&pts);
        let mut prev = f64::INFINITY;
        for it in 1..=25 {
            let r = fcm(&pts, 3, 2.0, 0.0, it, 9).unwrap();
            let loss = fcm_loss(&norm, &r.memberships, &r.centers_norm, 2.0);
            assert!(loss <= prev + 1e-12, "loss rose at iteration {it}");
            prev = loss;
        }
    }

    #[test]
    fn too_few_points_rejected() {
        assert!(matches!(
            fcm(&[vec![1.0]], 2, 2.0, 1e-6, 10, 0),
            Err(DecisionError::TooFewPoints { .. })
        ));
    }

    #[test]
    fn label_identity_like_centres() {
        let centers = vec![
            vec![0.1, 0.9, 0.9],
            vec![0.9, 0.1, 0.9],
            vec![0.9, 0.9, 0.1],
        ];
        assert_eq!(
            label_clusters(&centers),
            vec![
                ObjectiveKind::Loss,
                ObjectiveKind::Emission,
                ObjectiveKind::VoltageDeviation
            ]
        );
    }

    #[test]
    fn label_is_equivariant_under_cluster_permutation() {
        let centers = vec![
            vec![0.2, 0.7, 0.8],
            vec![0.9, 0.1, 0.7],
            vec![0.6, 0.8, 0.05],
        ];
        let base = label_clusters(&centers);
        let swapped = vec![centers[2].clone(), centers[0].clone(), centers[1].clone()];
        let relabeled = label_clusters(&swapped);
        assert_eq!(relabeled[0], base[2]);
        assert_eq!(relabeled[1], base[0]);
        assert_eq!(relabeled[2], base[1]);
    }

    #[test]
    fn grp_ideal_projection_for_equal_weights() {
        let members = vec![vec![1.0, 10.0, 0.1], vec![2.0, 5.0, 0.2]];
        let r = grp_rank(&members, &[1.0, 1.0, 1.0]).unwrap();
        assert!((r.v_ideal - 1.0 / 3.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn grp_frozen_example() {
        // values frozen from an independent step-by-step evaluation
        let members = vec![
            vec![8.2, 1030.0, 0.011],
            vec![9.6, 900.0, 0.009],
            vec![9.5, 910.0, 0.005],
            vec![9.0, 950.0, 0.008],
        ];
        let r = grp_rank(&members, &[1.0, 1.0, 1.0]).unwrap();
        let expect = [0.2, 0.426029072136938, 0.771732189543997, 0.515139408414395];
        for (got, want) in r.d.iter().zip(expect) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn dominating_member_outranks() {
        let members = vec![vec![1.0, 1.0, 1.0], vec![2.0, 2.0, 2.0]];
        let r = grp_rank(&members, &[1.0, 1.0, 1.0]).unwrap();
        assert_eq!(r.d[0], 1.0);
        assert_eq!(r.d[1], 0.0);
    }

    #[test]
    fn member_on_the_positive_ideal_scores_one() {
        let members = vec![vec![1.0, 1.0, 5.0], vec![3.0, 4.0, 9.0], vec![2.0, 3.0, 7.0]];
        let r = grp_rank(&members, &[1.0, 1.0, 1.0]).unwrap();
        assert!(r.benefit[0].iter().all(|b| *b == 1.0));
        assert!((r.v_pos[0] - r.v_ideal).abs() < 1e-12);
        assert_eq!(r.d[0], 1.0);
    }

    #[test]
    fn first_objective_weight_orders_by_its_benefit() {
        let members = vec![
            vec![8.2, 1030.0, 0.011],
            vec![9.6, 900.0, 0.009],
            vec![9.5, 910.0, 0.005],
            vec![9.0, 950.0, 0.008],
        ];
        let r = grp_rank(&members, &[1.0, 0.0, 0.0]).unwrap();
        // expected ordering: by descending benefit of the first column
        let frozen = [1.0, 0.0, 0.0356633380884448, 0.428208923662508];
        for (got, want) in r.d.iter().zip(frozen) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn d_stays_in_unit_interval_on_random_inputs() {
        use rand::Rng;
        let mut rng = substream(31, &[]);
        for _ in 0..1000 {
            let n = rng.random_range(1..8);
            let members: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    vec![
                        rng.random_range(-10.0..10.0),
                        rng.random_range(0.0..1e4),
                        rng.random_range(0.0..0.1),
                    ]
                })
                .collect();
            let w = [
                rng.random_range(0.1..1.0),
                rng.random_range(0.1..1.0),
                rng.random_range(0.1..1.0),
            ];
            let r = grp_rank(&members, &w).unwrap();
            for d in &r.d {
                assert!((0.0..=1.0).contains(d), "d = {d}");
            }
        }
    }

    #[test]
    fn d_is_invariant_under_affine_objective_rescaling() {
        let members = vec![
            vec![8.2, 1030.0, 0.011],
            vec![9.6, 900.0, 0.009],
            vec![9.5, 910.0, 0.005],
        ];
        let rescaled: Vec<Vec<f64>> = members
            .iter()
            .map(|m| vec![m[0] * 123.0 - 7.0, m[1], m[2]])
            .collect();
        let a = grp_rank(&members, &[1.0, 2.0, 3.0]).unwrap();
        let b = grp_rank(&rescaled, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(a.d, b.d);
    }

    #[test]
    fn three_distant_points_become_three_unit_compromises() {
        let front = vec![
            synth(&[1.0, 100.0, 0.1]),
            synth(&[10.0, 10.0, 0.2]),
            synth(&[5.0, 50.0, 0.01]),
        ];
        let report = select_compromise(&front, &[1.0, 1.0, 1.0], 5).unwrap();
        assert_eq!(report.clusters.len(), 3);
        let mut kinds: Vec<ObjectiveKind> =
            report.clusters.iter().map(|c| c.objective).collect();
        kinds.dedup();
        assert_eq!(kinds.len(), 3, "labels must be distinct");
        for c in &report.clusters {
            assert_eq!(c.member_indices.len(), 1);
            assert_eq!(c.d, vec![1.0]);
        }
        // the three selections are members of the input, not synthesized
        let mut sel = report.selected();
        sel.sort_unstable();
        assert_eq!(sel, vec![0, 1, 2]);
    }

    #[test]
    fn compromise_is_the_cluster_maximum() {
        use rand::Rng;
        let mut rng = substream(77, &[]);
        let front: Vec<EvaluatedSolution> = (0..40)
            .map(|_| {
                synth(&[
                    rng.random_range(8.0..10.0),
                    rng.random_range(900.0..1100.0),
                    rng.random_range(0.004..0.03),
                ])
            })
            .collect();
        let report = select_compromise(&front, &[1.0, 1.0, 1.0], 13).unwrap();
        for c in &report.clusters {
            let best = c.d.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let pos = c.member_indices.iter().position(|&i| i == c.compromise).unwrap();
            assert_eq!(c.d[pos], best);
        }
    }

    #[test]
    fn weight_normalization_in_report() {
        let front = vec![
            synth(&[1.0, 100.0, 0.1]),
            synth(&[10.0, 10.0, 0.2]),
            synth(&[5.0, 50.0, 0.01]),
        ];
        let report = select_compromise(&front, &[2.0, 1.0, 1.0], 5).unwrap();
        assert_eq!(report.weights, vec![0.5, 0.25, 0.25]);
    }

    use crate::seed::substream;
}
