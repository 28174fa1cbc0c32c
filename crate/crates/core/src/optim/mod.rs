//! Multi-objective optimizers over hybrid-coded decision vectors.
//!
//! Both algorithms share the evaluation contract, the constraint-aware
//! dominance relation and the gene encoding; they differ only in the
//! search dynamics. Population evaluation may run in parallel — results
//! are bit-identical for any thread count because every random draw comes
//! from a seed-derived substream and evaluation itself is pure.

mod archive;
mod mopso;
mod nsga2;

pub use archive::ParetoArchive;
pub use mopso::{mopso_run, MopsoParams};
pub use nsga2::{nsga2_run, Nsga2Params};

use rayon::prelude::*;
use serde::Serialize;

use crate::eval::{self, EvaluatedSolution, GeneSpace, GeneSpec};
use crate::model::NetworkCase;

/// Constraint-aware dominance: any feasible solution beats any infeasible
/// one; two infeasible solutions compare by violation; two feasible
/// solutions compare by Pareto dominance on minimized objectives.
pub fn dominates(a: &EvaluatedSolution, b: &EvaluatedSolution) -> bool {
    match (a.feasible, b.feasible) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => a.violation < b.violation,
        (true, true) => pareto_dominates(&a.objectives, &b.objectives),
    }
}

/// Componentwise minimization dominance: no objective worse, at least one
/// strictly better.
pub fn pareto_dominates(a: &[f64], b: &[f64]) -> bool {
    assert_eq!(a.len(), b.len(), "objective dimensionality must match");
    let mut strictly_better = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strictly_better = true;
        }
    }
    strictly_better
}

/// An optimizable problem: box-bounded genes (with optional lattice steps)
/// and a pure evaluation function.
pub trait Problem: Sync {
    fn gene_specs(&self) -> &[GeneSpec];
    fn evaluate(&self, genes: &[f64]) -> EvaluatedSolution;
}

/// The OPF problem over a network case.
pub struct OpfProblem<'a> {
    pub case: &'a NetworkCase,
    pub space: GeneSpace,
}

impl<'a> OpfProblem<'a> {
    pub fn new(case: &'a NetworkCase) -> Self {
        OpfProblem {
            space: GeneSpace::for_case(case),
            case,
        }
    }
}

impl Problem for OpfProblem<'_> {
    fn gene_specs(&self) -> &[GeneSpec] {
        self.space.specs()
    }

    fn evaluate(&self, genes: &[f64]) -> EvaluatedSolution {
        eval::evaluate(self.case, &self.space, genes).solution
    }
}

/// Restriction of a problem to a subset of its objectives, e.g. for the
/// loss-versus-emission comparative experiments. Constraint handling is
/// untouched.
pub struct ObjectiveProjection<P: Problem> {
    inner: P,
    keep: Vec<usize>,
}

impl<P: Problem> ObjectiveProjection<P> {
    pub fn new(inner: P, keep: impl Into<Vec<usize>>) -> Self {
        ObjectiveProjection {
            inner,
            keep: keep.into(),
        }
    }
}

impl<P: Problem> Problem for ObjectiveProjection<P> {
    fn gene_specs(&self) -> &[GeneSpec] {
        self.inner.gene_specs()
    }

    fn evaluate(&self, genes: &[f64]) -> EvaluatedSolution {
        let mut sol = self.inner.evaluate(genes);
        sol.objectives = self.keep.iter().map(|&k| sol.objectives[k]).collect();
        sol
    }
}

/// Evaluation parallelism. The default uses the global rayon pool; a fixed
/// thread count builds a dedicated pool. Results never depend on this.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum Parallelism {
    #[default]
    Default,
    Threads(usize),
}

impl Parallelism {
    fn run<T: Send>(self, f: impl FnOnce() -> T + Send) -> T {
        match self {
            Parallelism::Default => f(),
            Parallelism::Threads(n) => rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .expect("thread pool")
                .install(f),
        }
    }
}

pub(crate) fn evaluate_population<P: Problem>(
    problem: &P,
    positions: &[Vec<f64>],
) -> Vec<EvaluatedSolution> {
    positions
        .par_iter()
        .map(|genes| problem.evaluate(genes))
        .collect()
}

/// Output of one optimizer run.
#[derive(Debug, Clone, Serialize)]
pub struct ParetoSet {
    /// Mutually non-dominated evaluated solutions.
    pub members: Vec<EvaluatedSolution>,
    /// Fraction of the population that was non-dominated, per iteration.
    pub history: Vec<f64>,
    pub iterations: usize,
    pub elapsed_seconds: f64,
}

/// Share of `population` not dominated by any other member, under the
/// same constraint-aware dominance the optimizers use.
pub fn nondominated_fraction(population: &[EvaluatedSolution]) -> f64 {
    assert!(!population.is_empty());
    let n = population.len();
    let count = population
        .iter()
        .enumerate()
        .filter(|(i, a)| !population.iter().enumerate().any(|(j, b)| j != *i && dominates(b, a)))
        .count();
    count as f64 / n as f64
}

#[cfg(test)]
pub(crate) mod testkit {
    use super::*;

    /// Bi-objective test problem: f1 = x^2, f2 = (x - 2)^2 on x in [-5, 5];
    /// the true Pareto set is x in [0, 2].
    pub struct SchafferProblem {
        specs: Vec<GeneSpec>,
    }

    impl SchafferProblem {
        pub fn new() -> Self {
            SchafferProblem {
                specs: vec![GeneSpec {
                    name: "x".into(),
                    min: -5.0,
                    max: 5.0,
                    step: None,
                }],
            }
        }
    }

    impl Problem for SchafferProblem {
        fn gene_specs(&self) -> &[GeneSpec] {
            &self.specs
        }

        fn evaluate(&self, genes: &[f64]) -> EvaluatedSolution {
            let x = genes[0];
            EvaluatedSolution {
                genes: genes.to_vec(),
                objectives: vec![x * x, (x - 2.0) * (x - 2.0)],
                violation: 0.0,
                feasible: true,
                converged: true,
                outer_iterations: 0,
            }
        }
    }

    pub fn synth(objectives: &[f64]) -> EvaluatedSolution {
        EvaluatedSolution {
            genes: vec![],
            objectives: objectives.to_vec(),
            violation: 0.0,
            feasible: true,
            converged: true,
            outer_iterations: 0,
        }
    }

    pub fn synth_infeasible(violation: f64) -> EvaluatedSolution {
        EvaluatedSolution {
            genes: vec![],
            objectives: vec![1.0, 1.0, 1.0],
            violation,
            feasible: false,
            converged: true,
            outer_iterations: 0,
        }
    }
}
