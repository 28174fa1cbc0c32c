//! Property tests over the numeric kernels.

use num_complex::Complex64;
use proptest::prelude::*;

use acdcopf_core::converter::converter_flow;
use acdcopf_core::decision::grp_rank;
use acdcopf_core::metrics::{gd, sp, SpNorm};
use acdcopf_core::model::{lattice_count, snap_to_lattice};
use acdcopf_core::optim::pareto_dominates;

proptest! {
    #[test]
    fn snapped_values_lie_on_the_lattice(
        v in -2.0..4.0f64,
        kmin in 0u32..40,
        steps in 1u32..200,
        step in prop::sample::select(vec![0.0125, 0.01, 0.005, 0.25]),
    ) {
        let min = kmin as f64 * step - 1.0;
        let max = min + steps as f64 * step;
        let snapped = snap_to_lattice(v, min, max, step);
        prop_assert!(snapped >= min - 1e-12 && snapped <= max + 1e-12);
        let k = (snapped - min) / step;
        prop_assert!((k - k.round()).abs() < 1e-9, "off lattice: {snapped}");
        // snapping is idempotent
        prop_assert_eq!(snap_to_lattice(snapped, min, max, step), snapped);
    }

    #[test]
    fn lattice_counts_match_enumeration(steps in 1u32..500, step in 0.001..0.5f64) {
        let min = -0.3;
        let max = min + steps as f64 * step;
        prop_assert_eq!(lattice_count(min, max, step), steps as usize + 1);
    }

    #[test]
    fn coupling_flow_conserves_power(
        us in 0.9..1.1f64,
        uc in 0.9..1.1f64,
        ds in -0.3..0.3f64,
        dc in -0.3..0.3f64,
        r in 0.0..0.01f64,
        x in 0.05..0.3f64,
    ) {
        let u_s = Complex64::from_polar(us, ds);
        let u_c = Complex64::from_polar(uc, dc);
        let (ps, _, pc, _) = converter_flow(u_s, u_c, r, x);
        let i = (u_s - u_c) / Complex64::new(r, x);
        // active power lost in the coupling branch is exactly |I|^2 r
        prop_assert!(((ps - pc) - i.norm_sqr() * r).abs() < 1e-12);
        prop_assert!(ps - pc >= -1e-12);
    }

    #[test]
    fn dominance_is_a_strict_partial_order(
        a in prop::array::uniform3(0.0..10.0f64),
        b in prop::array::uniform3(0.0..10.0f64),
        c in prop::array::uniform3(0.0..10.0f64),
    ) {
        prop_assert!(!pareto_dominates(&a, &a));
        prop_assert!(!(pareto_dominates(&a, &b) && pareto_dominates(&b, &a)));
        if pareto_dominates(&a, &b) && pareto_dominates(&b, &c) {
            prop_assert!(pareto_dominates(&a, &c));
        }
    }

    #[test]
    fn gd_is_homogeneous_and_zero_on_subsets(
        front in prop::collection::vec(prop::array::uniform2(0.0..5.0f64), 1..6),
        k in 0.1..10.0f64,
    ) {
        let front: Vec<Vec<f64>> = front.into_iter().map(|p| p.to_vec()).collect();
        let reference = front.clone();
        prop_assert_eq!(gd(&front, &reference), 0.0);
        let scaled: Vec<Vec<f64>> = front.iter().map(|p| p.iter().map(|v| v * k).collect()).collect();
        let shifted_ref = vec![vec![0.0, 0.0]];
        let lhs = gd(&scaled, &shifted_ref);
        let rhs = k * gd(&front, &shifted_ref);
        prop_assert!((lhs - rhs).abs() < 1e-9 * rhs.max(1.0));
    }

    #[test]
    fn sp_is_permutation_invariant(
        mut front in prop::collection::vec(prop::array::uniform2(0.0..5.0f64), 2..8),
        swap_a in 0usize..8,
        swap_b in 0usize..8,
    ) {
        let original: Vec<Vec<f64>> = front.iter().map(|p| p.to_vec()).collect();
        let (i, j) = (swap_a % front.len(), swap_b % front.len());
        front.swap(i, j);
        let permuted: Vec<Vec<f64>> = front.iter().map(|p| p.to_vec()).collect();
        prop_assert_eq!(sp(&original, SpNorm::L2), sp(&permuted, SpNorm::L2));
    }

    #[test]
    fn priority_memberships_are_affine_invariant(
        rows in prop::collection::vec(prop::array::uniform3(0.0..100.0f64), 2..7),
        scale in 0.5..50.0f64,
        shift in -10.0..10.0f64,
    ) {
        let members: Vec<Vec<f64>> = rows.iter().map(|p| p.to_vec()).collect();
        let rescaled: Vec<Vec<f64>> = members
            .iter()
            .map(|m| vec![m[0] * scale + shift, m[1], m[2]])
            .collect();
        let w = [0.2, 0.3, 0.5];
        let a = grp_rank(&members, &w).unwrap();
        let b = grp_rank(&rescaled, &w).unwrap();
        for (x, y) in a.d.iter().zip(&b.d) {
            prop_assert!((x - y).abs() < 1e-9, "{x} vs {y}");
        }
    }
}
