//! Averaging, minimum-norm liftings and the splitting equivalences.

mod common;

use std::sync::Arc;

use common::*;
use lipfree::equivariance::DEFAULT_GROUP_CAP;
use lipfree::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn action(inst: &GroupInstance) -> FiniteGroupAction<Rational> {
    close_group(&inst.generators, &inst.space, &inst.norm, DEFAULT_GROUP_CAP).unwrap()
}

/// A lifting other than the basis one: add a random map into `Ker β`.
fn perturbed_lifting(rng: &mut ChaCha8Rng, inst: &GroupInstance) -> LinearMap<Rational> {
    let t0 = basis_lifting(&inst.space, &inst.norm).unwrap();
    let beta = barycenter(&inst.space, &inst.norm).unwrap();
    let kernel = beta.matrix.kernel();
    let d = inst.norm.dim();
    if kernel.cols() == 0 {
        return t0;
    }
    let coeffs = Matrix::from_rows(
        (0..kernel.cols()).map(|_| (0..d).map(|_| r(rng.gen_range(-2..=2), 2)).collect()).collect(),
    )
    .unwrap();
    t0.with_matrix(t0.matrix.add(&kernel.mul(&coeffs).unwrap()).unwrap()).unwrap()
}

#[test]
fn line_with_antipodal_symmetry() {
    let norm = Arc::new(PolyhedralNorm::<Rational>::l1(1));
    let space = Arc::new(PointedMetricSpace::induced(&norm, vec![vec![q(0)], vec![q(1)], vec![q(-1)]], 0, None).unwrap());
    let group = close_group(&[diag(&[-1])], &space, &norm, 10).unwrap();
    assert_eq!(group.order(), 2);
    let t0 = basis_lifting(&space, &norm).unwrap();
    assert_eq!(t0.matrix.column(0), vec![q(1), q(0)]);
    let dev = check_equivariant(&t0, &group).unwrap();
    assert!(dev.max_deviation > q(0));
    assert_eq!(group.element(dev.witness), &diag(&[-1]));
    let u = average_lifting(&t0, &group).unwrap();
    assert_eq!(u.matrix.column(0), vec![r(1, 2), r(-1, 2)]);
    assert_eq!(op_norm(&u).unwrap().value, q(1));
    assert_eq!(check_equivariant(&u, &group).unwrap().max_deviation, q(0));
    let split = splitting_equivalences(&SplittingInput::Lifting(u.clone()), &space, &norm, Some(&group)).unwrap();
    assert!(split.all_pass(), "{split:?}");
    let best = min_norm_lifting(&space, &norm, Some(&group), None).unwrap();
    assert_eq!(best.value, q(1));
    assert_eq!(best.recomputed_norm, q(1));
}

#[test]
fn averaging_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    for _ in 0..12 {
        let inst = random_group_instance(&mut rng, 24, 30);
        let group = action(&inst);
        assert_eq!(group.order(), inst.order);
        assert_eq!(group.is_isometric().unwrap(), inst.isometric);
        let beta = barycenter(&inst.space, &inst.norm).unwrap();
        let t0 = perturbed_lifting(&mut rng, &inst);
        let t = average_lifting(&t0, &group).unwrap();
        assert_eq!(beta.compose(&t).unwrap().matrix, Matrix::identity(inst.norm.dim()));
        assert_eq!(check_equivariant(&t, &group).unwrap().max_deviation, q(0));
        let c = group.max_operator_norm().unwrap();
        let n0 = op_norm(&t0).unwrap().value;
        let n = op_norm(&t).unwrap().value;
        assert!(n <= c.clone() * c * n0);
        // Averaging an equivariant map changes nothing.
        assert_eq!(average_lifting(&t, &group).unwrap(), t);
        let split = splitting_equivalences(&SplittingInput::Lifting(t.clone()), &inst.space, &inst.norm, Some(&group)).unwrap();
        assert!(split.all_pass(), "{split:?}");
        // The other two forms lead back to the same lifting.
        for input in [SplittingInput::Complement(split.complement.clone()), SplittingInput::Projection(split.projection.clone())] {
            let again = splitting_equivalences(&input, &inst.space, &inst.norm, Some(&group)).unwrap();
            assert!(again.all_pass());
            assert_eq!(again.lifting, t);
        }
    }
}

#[test]
fn midpoints_of_equivariant_liftings() {
    let mut rng = ChaCha8Rng::seed_from_u64(405);
    for _ in 0..10 {
        let inst = random_group_instance(&mut rng, 24, 30);
        let group = action(&inst);
        let a = average_lifting(&perturbed_lifting(&mut rng, &inst), &group).unwrap();
        let b = average_lifting(&perturbed_lifting(&mut rng, &inst), &group).unwrap();
        let mid = a.add(&b).unwrap().scale(&r(1, 2));
        assert_eq!(check_equivariant(&mid, &group).unwrap().max_deviation, q(0));
        let beta = barycenter(&inst.space, &inst.norm).unwrap();
        assert_eq!(beta.compose(&mid).unwrap().matrix, Matrix::identity(inst.norm.dim()));
    }
}

#[test]
fn minimum_norm_is_monotone_in_the_group() {
    let mut rng = ChaCha8Rng::seed_from_u64(406);
    for _ in 0..5 {
        let inst = random_group_instance(&mut rng, 8, 9);
        let group = action(&inst);
        let free = min_norm_lifting(&inst.space, &inst.norm, None, None).unwrap();
        let equi = min_norm_lifting(&inst.space, &inst.norm, Some(&group), None).unwrap();
        assert!(free.value >= q(1));
        assert!(equi.value >= free.value);
        assert_eq!(equi.recomputed_norm, equi.value);
        assert_eq!(check_equivariant(&equi.lifting, &group).unwrap().max_deviation, q(0));
        let below = equi.value.clone() - r(1, 100);
        assert!(matches!(
            min_norm_lifting(&inst.space, &inst.norm, Some(&group), Some(&below)),
            Err(Error::Infeasible(_))
        ));
    }
}

#[test]
fn dual_projection_is_idempotent() {
    let mut rng = ChaCha8Rng::seed_from_u64(407);
    for _ in 0..6 {
        let inst = random_group_instance(&mut rng, 24, 20);
        let group = action(&inst);
        let t = average_lifting(&basis_lifting(&inst.space, &inst.norm).unwrap(), &group).unwrap();
        let beta = barycenter(&inst.space, &inst.norm).unwrap();
        let p = dual_projection_from_lifting(&t, &beta).unwrap();
        assert_eq!(p.compose(&p).unwrap().matrix, p.matrix);
        assert_eq!(p.matrix.rank(), inst.norm.dim());
    }
}

#[test]
fn group_capacity_is_enforced() {
    let norm = Arc::new(PolyhedralNorm::<Rational>::l1(2));
    let pts = plane_points(&[(0, 0), (1, 0), (0, 1), (-1, 0), (0, -1)]);
    let space = induced(&norm, pts);
    assert!(matches!(close_group(&[quarter_turn()], &space, &norm, 3), Err(Error::Capacity { .. })));
    assert_eq!(close_group(&[quarter_turn()], &space, &norm, 4).unwrap().order(), 4);
    let off = plane_points(&[(0, 0), (1, 0), (0, 1)]);
    assert!(matches!(close_group(&[quarter_turn()], &induced(&norm, off), &norm, 10), Err(Error::Action(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn cayley_table_is_a_group(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_group_instance(&mut rng, 24, 30);
        let group = action(&inst);
        let n = group.order();
        for a in 0..n {
            prop_assert_eq!(group.cayley()[a][group.inverse(a)], 0);
            prop_assert_eq!(group.cayley()[0][a], a);
            let mut row = group.cayley()[a].clone();
            row.sort_unstable();
            prop_assert_eq!(row, (0..n).collect::<Vec<_>>());
        }
        for g in 0..n {
            let gt = induced_free_action(&group, g);
            let h = group.inverse(g);
            prop_assert_eq!(gt.compose(&induced_free_action(&group, h)).unwrap().matrix, Matrix::identity(inst.space.free_dim()));
            prop_assert_eq!(op_norm(&gt).unwrap().value <= group.max_operator_norm().unwrap(), true);
        }
    }
}
