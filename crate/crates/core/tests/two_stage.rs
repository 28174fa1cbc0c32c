//! Library-level run of both stages over the bundled cases.

use acdcopf_core::decision::{decide_seed, select_compromise, ObjectiveKind};
use acdcopf_core::optim::{dominates, OpfProblem};
use acdcopf_core::*;

#[test]
fn three_terminal_pipeline_end_to_end() {
    let case = builtin_case("ieee14-3t").unwrap();
    let problem = OpfProblem::new(&case);
    let params = MopsoParams {
        population: 60,
        repository: 60,
        iterations: 30,
        seed: 20,
        ..MopsoParams::default()
    };
    let set = mopso_run(&problem, &params, Parallelism::Default);
    assert!(set.members.len() >= 3, "front too small: {}", set.members.len());
    assert_eq!(set.history.len(), 30);

    // the front is feasible and mutually non-dominated
    for (i, a) in set.members.iter().enumerate() {
        assert!(a.feasible);
        for (j, b) in set.members.iter().enumerate() {
            if i != j {
                assert!(!dominates(a, b));
            }
        }
    }

    let report = select_compromise(&set.members, &[1.0 / 3.0; 3], decide_seed(20)).unwrap();
    assert_eq!(report.clusters.len(), 3);
    let mut labels: Vec<&str> = report.clusters.iter().map(|c| c.objective.short()).collect();
    labels.sort_unstable();
    assert_eq!(labels, ["E", "O", "Vde"]);
    // the selected compromises are members of the front, not synthesized
    for c in &report.clusters {
        assert!(c.compromise < set.members.len());
        assert!(c.member_indices.contains(&c.compromise));
    }
    let _ = report.cluster_for(ObjectiveKind::Emission);
}

#[test]
fn runs_are_identical_across_parallelism() {
    let case = builtin_case("ieee14-2t").unwrap();
    let problem = OpfProblem::new(&case);
    let params = MopsoParams {
        population: 30,
        repository: 30,
        iterations: 10,
        seed: 9,
        ..MopsoParams::default()
    };
    let serial = mopso_run(&problem, &params, Parallelism::Threads(1));
    let parallel = mopso_run(&problem, &params, Parallelism::Threads(4));
    let genes = |s: &ParetoSet| -> Vec<Vec<f64>> {
        s.members.iter().map(|m| m.genes.clone()).collect()
    };
    assert_eq!(genes(&serial), genes(&parallel));
    assert_eq!(serial.history, parallel.history);
}

#[test]
fn evaluation_matches_reference_solve_for_front_members() {
    // re-running the coupled solve over decoded genes reproduces the
    // objectives stored in the front
    let case = builtin_case("ieee14-2t").unwrap();
    let space = eval::GeneSpace::for_case(&case);
    let problem = OpfProblem::new(&case);
    let set = mopso_run(
        &problem,
        &MopsoParams {
            population: 30,
            repository: 30,
            iterations: 8,
            seed: 33,
            ..MopsoParams::default()
        },
        Parallelism::Default,
    );
    for m in set.members.iter().take(5) {
        let again = eval::evaluate(&case, &space, &m.genes);
        assert_eq!(again.solution.objectives, m.objectives);
        assert_eq!(again.solution.violation, m.violation);
    }
}
