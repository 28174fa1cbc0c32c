//! NSGA-II baseline: fast non-dominated sorting with crowding-distance
//! truncation, binary tournaments, simulated binary crossover on
//! continuous genes and lattice-respecting jumps on discrete genes. Shares
//! the evaluation, dominance and encoding contracts with the swarm
//! optimizer so runs are directly comparable.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::eval::{EvaluatedSolution, GeneSpec};
use crate::seed::{domain, substream};

use super::{dominates, evaluate_population, nondominated_fraction, Parallelism, ParetoSet, Problem};

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct Nsga2Params {
    pub population: usize,
    pub iterations: usize,
    pub crossover_prob: f64,
    /// Per-gene mutation probability; `None` selects `1 / chromosome length`.
    pub mutation_prob: Option<f64>,
    pub crossover_eta: f64,
    pub mutation_eta: f64,
    pub seed: u64,
}

impl Default for Nsga2Params {
    fn default() -> Self {
        Nsga2Params {
            population: 100,
            iterations: 50,
            crossover_prob: 0.9,
            mutation_prob: None,
            crossover_eta: 20.0,
            mutation_eta: 20.0,
            seed: 0,
        }
    }
}

struct Ranked {
    rank: Vec<usize>,
    crowding: Vec<f64>,
    fronts: Vec<Vec<usize>>,
}

fn fast_nondominated_sort(pop: &[EvaluatedSolution]) -> Ranked {
    let n = pop.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    let mut fronts: Vec<Vec<usize>> = vec![Vec::new()];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            if dominates(&pop[i], &pop[j]) {
                dominated_by[i].push(j);
            } else if dominates(&pop[j], &pop[i]) {
                count[i] += 1;
            }
        }
        if count[i] == 0 {
            fronts[0].push(i);
        }
    }
    let mut rank = vec![0usize; n];
    let mut f = 0;
    while !fronts[f].is_empty() {
        let mut next = Vec::new();
        for &i in &fronts[f] {
            rank[i] = f;
            for &j in &dominated_by[i] {
                count[j] -= 1;
                if count[j] == 0 {
                    next.push(j);
                }
            }
        }
        fronts.push(next);
        f += 1;
    }
    fronts.pop();

    let mut crowding = vec![0.0f64; n];
    let dim = pop[0].objectives.len();
    for front in &fronts {
        if front.len() <= 2 {
            for &i in front {
                crowding[i] = f64::INFINITY;
            }
            continue;
        }
        for m in 0..dim {
            let mut order = front.clone();
            order.sort_by(|&a, &b| pop[a].objectives[m].partial_cmp(&pop[b].objectives[m]).unwrap());
            let lo = pop[order[0]].objectives[m];
            let hi = pop[order[order.len() - 1]].objectives[m];
            crowding[order[0]] = f64::INFINITY;
            crowding[order[order.len() - 1]] = f64::INFINITY;
            if hi > lo {
                for w in 1..order.len() - 1 {
                    crowding[order[w]] +=
                        (pop[order[w + 1]].objectives[m] - pop[order[w - 1]].objectives[m]) / (hi - lo);
                }
            }
        }
    }
    Ranked {
        rank,
        crowding,
        fronts,
    }
}

fn tournament(ranked: &Ranked, rng: &mut ChaCha8Rng, n: usize) -> usize {
    let a = rng.random_range(0..n);
    let b = rng.random_range(0..n);
    if ranked.rank[a] != ranked.rank[b] {
        if ranked.rank[a] < ranked.rank[b] {
            a
        } else {
            b
        }
    } else if ranked.crowding[a] != ranked.crowding[b] {
        if ranked.crowding[a] > ranked.crowding[b] {
            a
        } else {
            b
        }
    } else {
        a
    }
}

fn sbx(a: f64, b: f64, spec: &GeneSpec, eta: f64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let u: f64 = rng.random();
    let beta = if u <= 0.5 {
        (2.0 * u).powf(1.0 / (eta + 1.0))
    } else {
        (1.0 / (2.0 * (1.0 - u))).powf(1.0 / (eta + 1.0))
    };
    let c1 = 0.5 * ((1.0 + beta) * a + (1.0 - beta) * b);
    let c2 = 0.5 * ((1.0 - beta) * a + (1.0 + beta) * b);
    (c1.clamp(spec.min, spec.max), c2.clamp(spec.min, spec.max))
}

fn polynomial_mutation(v: f64, spec: &GeneSpec, eta: f64, rng: &mut ChaCha8Rng) -> f64 {
    let span = spec.range();
    if span <= 0.0 {
        return v;
    }
    let u: f64 = rng.random();
    let delta = if u < 0.5 {
        (2.0 * u).powf(1.0 / (eta + 1.0)) - 1.0
    } else {
        1.0 - (2.0 * (1.0 - u)).powf(1.0 / (eta + 1.0))
    };
    (v + delta * span).clamp(spec.min, spec.max)
}

fn lattice_mutation(v: f64, spec: &GeneSpec, step: f64, rng: &mut ChaCha8Rng) -> f64 {
    let steps_in_range = ((spec.range() / step).round() as i64).max(1);
    let max_jump = (steps_in_range / 5).max(1);
    let jump = rng.random_range(1..=max_jump) * if rng.random::<bool>() { 1 } else { -1 };
    (v + jump as f64 * step).clamp(spec.min, spec.max)
}

pub fn nsga2_run<P: Problem>(
    problem: &P,
    params: &Nsga2Params,
    parallelism: Parallelism,
) -> ParetoSet {
    assert!(params.population >= 2);
    parallelism.run(|| nsga2_inner(problem, params))
}

fn nsga2_inner<P: Problem>(problem: &P, params: &Nsga2Params) -> ParetoSet {
    let start = std::time::Instant::now();
    let specs = problem.gene_specs();
    let dim = specs.len();
    let pop_size = params.population;
    let seed = params.seed;
    let pm = params.mutation_prob.unwrap_or(1.0 / dim.max(1) as f64);

    let mut genomes: Vec<Vec<f64>> = (0..pop_size)
        .map(|i| {
            let mut rng = substream(seed, &[domain::GA_INIT, i as u64]);
            specs
                .iter()
                .map(|s| rng.random_range(s.min..=s.max))
                .collect()
        })
        .collect();
    let mut evaluated = evaluate_population(problem, &genomes);
    let mut history = Vec::with_capacity(params.iterations);

    for gen in 0..params.iterations {
        let ranked = fast_nondominated_sort(&evaluated);
        let mut rng = substream(seed, &[domain::GA_GEN, gen as u64]);

        let mut offspring: Vec<Vec<f64>> = Vec::with_capacity(pop_size);
        while offspring.len() < pop_size {
            let pa = tournament(&ranked, &mut rng, pop_size);
            let pb = tournament(&ranked, &mut rng, pop_size);
            let mut c1 = genomes[pa].clone();
            let mut c2 = genomes[pb].clone();
            if rng.random::<f64>() < params.crossover_prob {
                for d in 0..dim {
                    if rng.random::<f64>() < 0.5 {
                        let (x, y) = sbx(c1[d], c2[d], &specs[d], params.crossover_eta, &mut rng);
                        c1[d] = x;
                        c2[d] = y;
                    }
                }
            }
            for child in [&mut c1, &mut c2] {
                for d in 0..dim {
                    if rng.random::<f64>() < pm {
                        child[d] = match specs[d].step {
                            None => polynomial_mutation(child[d], &specs[d], params.mutation_eta, &mut rng),
                            Some(step) => lattice_mutation(child[d], &specs[d], step, &mut rng),
                        };
                    }
                }
            }
            offspring.push(c1);
            if offspring.len() < pop_size {
                offspring.push(c2);
            }
        }

        let children = evaluate_population(problem, &offspring);

        // elitist environmental selection over parents + offspring
        let mut combined = evaluated;
        combined.extend(children);
        let mut genomes_all = genomes;
        genomes_all.extend(offspring);
        let ranked_all = fast_nondominated_sort(&combined);

        let mut chosen: Vec<usize> = Vec::with_capacity(pop_size);
        'fill: for front in &ranked_all.fronts {
            if chosen.len() + front.len() <= pop_size {
                chosen.extend(front.iter().copied());
                if chosen.len() == pop_size {
                    break 'fill;
                }
            } else {
                let mut rest = front.clone();
                rest.sort_by(|&a, &b| {
                    ranked_all.crowding[b]
                        .partial_cmp(&ranked_all.crowding[a])
                        .unwrap()
                        .then(a.cmp(&b))
                });
                rest.truncate(pop_size - chosen.len());
                chosen.extend(rest);
                break 'fill;
            }
        }
        genomes = chosen.iter().map(|&i| genomes_all[i].clone()).collect();
        evaluated = chosen.iter().map(|&i| combined[i].clone()).collect();
        history.push(nondominated_fraction(&evaluated));
    }

    // final front: feasible rank-0 members
    let ranked = fast_nondominated_sort(&evaluated);
    let members: Vec<EvaluatedSolution> = ranked.fronts[0]
        .iter()
        .map(|&i| evaluated[i].clone())
        .filter(|s| s.feasible)
        .collect();

    ParetoSet {
        members,
        history,
        iterations: params.iterations,
        elapsed_seconds: start.elapsed().as_secs_f64(),
    }
}
