mod common;

use multirate_core::problems::biot::{BiotParams, BiotSetup};
use multirate_core::problems::heatwave::{heatwave_1d, HEATWAVE_1D_END_TIME};
use multirate_core::slab_system::{march, SlabBases, SlabSolution};
use multirate_core::temporal_mesh::{temporal_matrix, DgOrder, TemporalHierarchy, TemporalKind};
use proptest::prelude::*;

const KINDS: [TemporalKind; 3] = [TemporalKind::Mass, TemporalKind::DtMass, TemporalKind::JumpPlusInitial];

fn kind_index(k: TemporalKind) -> usize {
    match k {
        TemporalKind::Mass => 0,
        TemporalKind::DtMass => 1,
        TemporalKind::JumpPlusInitial => 2,
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn check_coupling(order: DgOrder, r1: usize, r2: usize, slab_index: usize) {
    let h = TemporalHierarchy::build(3.0, 4, r1, r2).unwrap();
    let slab = h.slab(slab_index);
    let bases = SlabBases::new(order, &slab).unwrap();
    let mut breaks: Vec<f64> = slab.fine_elements.iter().map(|e| e.0).collect();
    breaks.push(slab.end);
    for row in 0..2 {
        for col in 0..2 {
            for kind in KINDS {
                let got = bases.coupling(row, col, kind).unwrap();
                let want = common::brute_force_temporal(&bases.groups[row], &bases.groups[col], kind_index(kind), &breaks);
                let scale = want.iter().flatten().fold(1.0f64, |m, x| m.max(x.abs()));
                for (i, wr) in want.iter().enumerate() {
                    for (j, w) in wr.iter().enumerate() {
                        assert!(
                            (got[(i, j)] - w).abs() <= 1e-13 * scale,
                            "{order:?} {r1}:{r2} ({row},{col}) {kind:?} [{i},{j}] {} vs {w}",
                            got[(i, j)]
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn cross_group_coupling_matches_pointwise_quadrature() {
    for order in [DgOrder::Dg0, DgOrder::Dg1] {
        for (r1, r2) in [(1, 2), (2, 1), (1, 4), (4, 1), (1, 8), (2, 8), (8, 4)] {
            check_coupling(order, r1, r2, 2);
        }
    }
}

#[test]
fn heatwave_single_rate_dg0_is_backward_euler() {
    let setup = heatwave_1d(8, DgOrder::Dg0).unwrap();
    let steps = 10;
    let oracle = common::heatwave_backward_euler(&setup, HEATWAVE_1D_END_TIME, steps);
    let h = TemporalHierarchy::build(HEATWAVE_1D_END_TIME, steps, 1, 1).unwrap();
    let mut n = 0;
    let mut obs = |s: &SlabSolution| {
        for f in 0..4 {
            let got = s.end_trace(f);
            let want = &oracle[n][f];
            let err = max_abs_diff(&got, want);
            assert!(err <= 1e-10 * max_abs(want).max(1.0), "step {n} field {f}: {err}");
        }
        n += 1;
        Ok(())
    };
    march(&setup.problem, &h, &mut [&mut obs]).unwrap();
    assert_eq!(n, steps);
}

#[test]
fn biot_single_rate_dg0_is_backward_euler() {
    let setup = BiotSetup::new(BiotParams::mandel(), 4, 4, DgOrder::Dg0).unwrap();
    let (t_end, steps) = (4.0e4, 10);
    let oracle = common::biot_backward_euler(&setup, t_end, steps);
    let h = TemporalHierarchy::build(t_end, steps, 1, 1).unwrap();
    let mut n = 0;
    let mut obs = |s: &SlabSolution| {
        for f in 0..2 {
            let got = s.end_trace(f);
            let want = &oracle[n][f];
            let err = max_abs_diff(&got, want);
            assert!(err <= 1e-10 * max_abs(want), "step {n} field {f}: {err}");
        }
        n += 1;
        Ok(())
    };
    march(&setup.problem, &h, &mut [&mut obs]).unwrap();
    assert_eq!(n, steps);
}

/// Splitting every slab into `r` equal sub-elements for both groups is the same
/// discretization as `r` times as many single-rate slabs.
#[test]
fn uniform_refinement_inside_slabs_matches_more_slabs() {
    for order in [DgOrder::Dg0, DgOrder::Dg1] {
        let setup = heatwave_1d(6, order).unwrap();
        let a = march(&setup.problem, &TemporalHierarchy::build(HEATWAVE_1D_END_TIME, 5, 2, 2).unwrap(), &mut []).unwrap();
        let b = march(&setup.problem, &TemporalHierarchy::build(HEATWAVE_1D_END_TIME, 10, 1, 1).unwrap(), &mut []).unwrap();
        for f in 0..4 {
            let (x, y) = (&a.final_traces[f], &b.final_traces[f]);
            assert!(max_abs_diff(x, y) <= 1e-10 * max_abs(y), "{order:?} field {f}");
        }
    }
}

#[test]
fn marching_is_bitwise_deterministic() {
    let setup = heatwave_1d(6, DgOrder::Dg1).unwrap();
    let h = TemporalHierarchy::build(HEATWAVE_1D_END_TIME, 6, 1, 4).unwrap();
    let a = march(&setup.problem, &h, &mut []).unwrap();
    let b = march(&setup.problem, &h, &mut []).unwrap();
    for f in 0..4 {
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.final_traces[f]), bits(&b.final_traces[f]));
    }
    assert_eq!(a.factorizations, 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Coupling a group with itself through the fine mesh reproduces its own matrix.
    #[test]
    fn restriction_preserves_same_group_forms(p1 in 0u32..4, p2 in 0u32..4, dg1 in any::<bool>(), slab in 0usize..4) {
        let order = if dg1 { DgOrder::Dg1 } else { DgOrder::Dg0 };
        let h = TemporalHierarchy::build(2.0, 4, 1 << p1, 1 << p2).unwrap();
        let bases = SlabBases::new(order, &h.slab(slab)).unwrap();
        let fine_dt = temporal_matrix(&bases.fine, &bases.fine, TemporalKind::Mass).unwrap();
        for g in 0..2 {
            let own = temporal_matrix(&bases.groups[g], &bases.groups[g], TemporalKind::Mass).unwrap();
            let via = &bases.restriction[g] * &fine_dt * bases.restriction[g].transpose();
            prop_assert!((own - via).abs().max() < 1e-13);
        }
    }

    /// The coarse functions sum to one, so every fine column of `R` does too.
    #[test]
    fn restriction_is_partition_of_unity(p1 in 0u32..4, p2 in 0u32..4, dg1 in any::<bool>()) {
        let order = if dg1 { DgOrder::Dg1 } else { DgOrder::Dg0 };
        let h = TemporalHierarchy::build(1.0, 1, 1 << p1, 1 << p2).unwrap();
        let bases = SlabBases::new(order, &h.slab(0)).unwrap();
        for g in 0..2 {
            let cols = bases.restriction[g].row_sum();
            for c in cols.iter() {
                prop_assert!((c - 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn coupling_matches_brute_force(p1 in 0u32..4, p2 in 0u32..4, dg1 in any::<bool>(), slab in 0usize..4) {
        let order = if dg1 { DgOrder::Dg1 } else { DgOrder::Dg0 };
        check_coupling(order, 1 << p1, 1 << p2, slab);
    }
}
