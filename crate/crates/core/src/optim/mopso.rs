//! Multi-objective particle swarm optimization with an external archive.
//!
//! Velocity update `v <- w v + c1 r1 (pbest - x) + c2 r2 (leader - x)`
//! with per-gene random factors, velocities clamped to the gene range and
//! positions clamped to their bounds. Leaders come from the archive's
//! grid roulette. The perturbation operator mutates one gene of a
//! decaying fraction of the swarm with a range that shrinks as the run
//! progresses, so early iterations explore and late iterations refine.

use rand::Rng;

use crate::eval::EvaluatedSolution;
use crate::seed::{domain, substream};

use super::{dominates, evaluate_population, ParetoArchive, Parallelism, ParetoSet, Problem};

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct MopsoParams {
    pub population: usize,
    pub repository: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub inertia_damping: f64,
    pub personal_coeff: f64,
    pub global_coeff: f64,
    pub mutation_rate: f64,
    pub grid_divisions: usize,
    pub seed: u64,
}

impl Default for MopsoParams {
    fn default() -> Self {
        MopsoParams {
            population: 100,
            repository: 100,
            iterations: 50,
            inertia: 0.73,
            inertia_damping: 1.0,
            personal_coeff: 1.5,
            global_coeff: 1.5,
            mutation_rate: 0.5,
            grid_divisions: 30,
            seed: 0,
        }
    }
}

/// Velocity limit as a share of each gene's range. Tighter than the full
/// range so the swarm can contract onto the archive once exploration ends.
const VELOCITY_CLAMP: f64 = 0.2;

/// Relative coverage of the perturbation at iteration `t`: decays as
/// `(1 - t/T)^1.5`, shrinking the mutation neighbourhood from the whole
/// gene range down to nothing by the final iteration. The mutated share
/// of the swarm stays constant at the mutation rate.
fn mutation_coverage(t: usize, iterations: usize) -> f64 {
    let u = 1.0 - t as f64 / iterations.max(1) as f64;
    if u <= 0.0 {
        0.0
    } else {
        u.powf(1.5)
    }
}

pub fn mopso_run<P: Problem>(
    problem: &P,
    params: &MopsoParams,
    parallelism: Parallelism,
) -> ParetoSet {
    assert!(params.population >= 1 && params.repository >= 1);
    assert!(params.grid_divisions >= 2);
    assert!(params.inertia > 0.0 && params.inertia <= 1.0);
    parallelism.run(|| mopso_inner(problem, params))
}

fn mopso_inner<P: Problem>(problem: &P, params: &MopsoParams) -> ParetoSet {
    let start = std::time::Instant::now();
    let specs = problem.gene_specs();
    let dim = specs.len();
    let pop = params.population;
    let seed = params.seed;

    let mut positions: Vec<Vec<f64>> = (0..pop)
        .map(|i| {
            let mut rng = substream(seed, &[domain::SWARM_INIT, i as u64]);
            specs
                .iter()
                .map(|s| rng.random_range(s.min..=s.max))
                .collect()
        })
        .collect();
    let mut velocities: Vec<Vec<f64>> = vec![vec![0.0; dim]; pop];

    let mut evaluated = evaluate_population(problem, &positions);
    let mut pbest: Vec<EvaluatedSolution> = evaluated.clone();
    let mut pbest_pos: Vec<Vec<f64>> = positions.clone();

    let mut archive = ParetoArchive::new(params.repository, params.grid_divisions);
    {
        let mut rng = substream(seed, &[domain::ARCHIVE, 0]);
        for sol in &evaluated {
            archive.insert(sol.clone(), &mut rng);
        }
    }

    let mut history = Vec::with_capacity(params.iterations);
    let mut inertia = params.inertia;

    for t in 0..params.iterations {
        let coverage = mutation_coverage(t, params.iterations);
        for i in 0..pop {
            let mut rng = substream(seed, &[domain::PARTICLE_MOVE, t as u64, i as u64]);
            let leader_pos: Vec<f64> = match archive.select_leader(&mut rng) {
                Some(m) => m.genes.clone(),
                // empty archive: follow the least-violating personal best
                None => {
                    let best = (0..pop)
                        .min_by(|a, b| {
                            pbest[*a]
                                .violation
                                .partial_cmp(&pbest[*b].violation)
                                .unwrap()
                        })
                        .unwrap();
                    pbest_pos[best].clone()
                }
            };
            let r1: f64 = rng.random();
            let r2: f64 = rng.random();
            for d in 0..dim {
                let vmax = VELOCITY_CLAMP * specs[d].range();
                let v = inertia * velocities[i][d]
                    + params.personal_coeff * r1 * (pbest_pos[i][d] - positions[i][d])
                    + params.global_coeff * r2 * (leader_pos[d] - positions[i][d]);
                velocities[i][d] = v.clamp(-vmax, vmax);
                positions[i][d] =
                    (positions[i][d] + velocities[i][d]).clamp(specs[d].min, specs[d].max);
            }
            if coverage > 0.0 && rng.random::<f64>() < params.mutation_rate * coverage {
                let d = rng.random_range(0..dim);
                let spec = &specs[d];
                match spec.step {
                    None => {
                        let delta = coverage * spec.range();
                        let lo = (positions[i][d] - delta).max(spec.min);
                        let hi = (positions[i][d] + delta).min(spec.max);
                        positions[i][d] = rng.random_range(lo..=hi);
                    }
                    Some(step) => {
                        let steps_in_range = (spec.range() / step).round() as i64;
                        let max_jump = ((coverage * steps_in_range as f64).round() as i64).max(1);
                        let jump = rng.random_range(1..=max_jump)
                            * if rng.random::<bool>() { 1 } else { -1 };
                        positions[i][d] = (positions[i][d] + jump as f64 * step)
                            .clamp(spec.min, spec.max);
                    }
                }
            }
        }

        evaluated = evaluate_population(problem, &positions);

        for i in 0..pop {
            let new = &evaluated[i];
            if dominates(new, &pbest[i]) {
                pbest[i] = new.clone();
                pbest_pos[i] = positions[i].clone();
            } else if !dominates(&pbest[i], new) {
                // mutual non-dominance: replace with probability 1/2
                let mut rng = substream(seed, &[domain::PBEST_TIE, t as u64, i as u64]);
                if rng.random::<bool>() {
                    pbest[i] = new.clone();
                    pbest_pos[i] = positions[i].clone();
                }
            }
        }

        let mut rng = substream(seed, &[domain::ARCHIVE, t as u64 + 1]);
        for sol in &evaluated {
            archive.insert(sol.clone(), &mut rng);
        }

        // convergence is tracked as repository occupancy: the share of a
        // population-sized budget already held as non-dominated solutions
        history.push((archive.len() as f64 / pop as f64).min(1.0));
        inertia *= params.inertia_damping;
    }

    ParetoSet {
        members: archive.into_members(),
        history,
        iterations: params.iterations,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    }
}
