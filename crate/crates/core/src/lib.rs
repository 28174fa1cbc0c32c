//! Two-stage multi-objective optimal power flow for hybrid AC/DC grids
//! with VSC-HVDC.
//!
//! Stage 1 searches the operating space with a multi-objective particle
//! swarm (an NSGA-II baseline is included for comparisons), evaluating
//! every candidate through a full sequential AC/DC power flow and scoring
//! it on system losses, polluting-gas emissions and voltage deviation.
//! Stage 2 clusters the resulting Pareto front with fuzzy c-means and
//! ranks each cluster by grey relation projection to recommend one
//! compromise operating point per preference.

pub mod ac;
pub mod builtin;
pub mod converter;
pub mod coupled;
pub mod dc;
pub mod decision;
pub mod eval;
pub mod metrics;
pub mod model;
pub mod optim;
pub mod seed;

pub use builtin::builtin_case;
pub use coupled::{solve_coupled, ControlSetpoints, CoupledSolution, SolveError};
pub use eval::{evaluate, EvaluatedSolution, Evaluation, GeneSpace, ObjectiveVector};
pub use model::{load_case, validate_case, CaseError, NetworkCase};
pub use optim::{mopso_run, nsga2_run, MopsoParams, Nsga2Params, ParetoSet, Parallelism};
