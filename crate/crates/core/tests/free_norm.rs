//! Free norms, metrics and polyhedral norms against independent routes.

mod common;

use std::sync::Arc;

use common::*;
use lipfree::free_space::{free_norm_full, lip_ball_lp};
use lipfree::operators::normalized_molecules;
use lipfree::*;
use lipfree_lp::{solve, verify_certificate};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vector(rng: &mut ChaCha8Rng, space: &Space<Rational>) -> FreeVector<Rational> {
    let coords: Vec<Rational> = (0..space.free_dim()).map(|_| r(rng.gen_range(-6..=6), rng.gen_range(1..=3))).collect();
    FreeVector::from_dense(space, &coords).unwrap()
}

fn random_function(rng: &mut ChaCha8Rng, space: &Space<Rational>) -> LipFunction<Rational> {
    let coords: Vec<Rational> = (0..space.free_dim()).map(|_| r(rng.gen_range(-9..=9), rng.gen_range(1..=4))).collect();
    LipFunction::from_free_coords(space, &coords).unwrap()
}

#[test]
fn free_norm_matches_lip_ball_vertex_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for trial in 0..40 {
        let n = rng.gen_range(2..=4);
        let space = if trial % 2 == 0 { random_metric(&mut rng, n) } else { random_path_metric(&mut rng, n) };
        let vertices = lip_ball_vertices_oracle(&space);
        for _ in 0..5 {
            let mu = random_vector(&mut rng, &space);
            let oracle = vertices
                .iter()
                .map(|v| lipfree_lp::dot(v, &mu.to_dense()))
                .fold(q(0), Rational::max_of);
            let got = free_norm(&mu).unwrap();
            assert_eq!(got.value, oracle);
            assert_eq!(got.gap, q(0));
            assert_eq!(free_norm_full(&mu).unwrap(), (oracle.clone(), oracle));
        }
    }
}

#[test]
fn equilateral_sum_has_norm_two() {
    let d = Matrix::from_rows(vec![vec![q(0), q(1), q(1)], vec![q(1), q(0), q(1)], vec![q(1), q(1), q(0)]]).unwrap();
    let space = Arc::new(PointedMetricSpace::new(vec!["0".into(), "A".into(), "B".into()], 0, d).unwrap());
    let mu = FreeVector::from_coeffs(&space, [(1, q(1)), (2, q(1))]);
    let vertices = lip_ball_vertices_oracle(&space);
    assert_eq!(vertices.iter().map(|v| lipfree_lp::dot(v, &mu.to_dense())).fold(q(0), Rational::max_of), q(2));
    assert_eq!(free_norm(&mu).unwrap().value, q(2));
    let lp = lip_ball_lp(&mu);
    let sol = solve(&lp).unwrap();
    assert!(verify_certificate(&lp, &sol));
}

#[test]
fn lip_ball_vertices_agree_with_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..15 {
        let n = rng.gen_range(2..=4);
        let space = random_path_metric(&mut rng, n);
        let mut a = lipfree::operators::lip_ball_vertices(&space).unwrap();
        let mut b = lip_ball_vertices_oracle(&space);
        a.sort_by(|x, y| x.partial_cmp(y).unwrap());
        b.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert_eq!(a, b);
    }
}

#[test]
fn witnesses_are_certificates() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..30 {
        let n = rng.gen_range(2..=8);
        let space = random_path_metric(&mut rng, n);
        let mu = random_vector(&mut rng, &space);
        let res = free_norm(&mu).unwrap();
        assert!(lip_constant(&res.witness_f) <= q(1));
        assert_eq!(pair(&res.witness_f, &mu).unwrap(), res.value);
        let mut balance = vec![q(0); space.len()];
        let mut cost = q(0);
        for t in &res.witness_flow {
            assert!(t.weight > q(0));
            balance[t.from] += t.weight.clone();
            balance[t.to] -= t.weight.clone();
            cost += t.weight.clone() * space.dist(t.from, t.to).clone();
        }
        for x in space.non_base_points() {
            assert_eq!(balance[x], mu.coeff(x));
        }
        assert_eq!(cost, res.value);
    }
}

#[test]
fn isometry_on_every_pair() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..20 {
        let n = rng.gen_range(2..=8);
        let space = random_path_metric(&mut rng, n);
        for x in 0..n {
            for y in 0..n {
                if x != y {
                    let res = free_norm(&molecule(&space, x, y).unwrap()).unwrap();
                    assert_eq!(&res.value, space.dist(x, y));
                    assert_eq!(res.gap, q(0));
                }
            }
        }
    }
}

#[test]
fn float_mode_free_norm() {
    let norm = PolyhedralNorm::<f64>::l1(2);
    let pts = vec![vec![0.0, 0.0], vec![1.0, 0.5], vec![-0.25, 2.0], vec![3.0, -1.0]];
    let space = Arc::new(PointedMetricSpace::induced(&norm, pts, 0, None).unwrap());
    for x in 0..4 {
        for y in 0..4 {
            if x != y {
                let res = free_norm(&molecule(&space, x, y).unwrap()).unwrap();
                assert!(res.value.approx_eq(space.dist(x, y)));
                assert!(res.gap_closed());
            }
        }
    }
}

#[test]
fn relabeling_preserves_norms() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let n = rng.gen_range(3..=6);
        let space = random_path_metric(&mut rng, n);
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let moved = Arc::new(space.permuted(&perm).unwrap());
        assert!(moved.validate().is_empty());
        let mu = random_vector(&mut rng, &space);
        // New point i is old point perm[i].
        let moved_mu = FreeVector::from_coeffs(
            &moved,
            (0..n).map(|i| (i, mu.coeff(perm[i]))),
        );
        assert_eq!(free_norm(&mu).unwrap().value, free_norm(&moved_mu).unwrap().value);
    }
}

#[test]
fn op_norm_routes_agree_on_small_spaces() {
    // Molecule maximization against maximization of pairings over the
    // Lipschitz-ball vertices of the codomain.
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..15 {
        let size = rng.gen_range(2..=4);
        let m = random_path_metric(&mut rng, size);
        let size = rng.gen_range(2..=4);
        let n = random_path_metric(&mut rng, size);
        let rows = n.free_dim();
        let cols = m.free_dim();
        let a = Matrix::from_rows(
            (0..rows).map(|_| (0..cols).map(|_| r(rng.gen_range(-3..=3), rng.gen_range(1..=2))).collect()).collect(),
        )
        .unwrap();
        let map = LinearMap::new(SpaceDescriptor::Free(m.clone()), SpaceDescriptor::Free(n.clone()), a.clone()).unwrap();
        let direct = op_norm(&map).unwrap().value;
        let verts = lip_ball_vertices_oracle(&n);
        let mut via_duals = q(0);
        for f in &verts {
            for mol in normalized_molecules(&m) {
                let v = lipfree_lp::dot(f, &a.mul_vec(&mol).unwrap()).abs();
                via_duals = Rational::max_of(via_duals, v);
            }
        }
        assert_eq!(direct, via_duals);
        assert_eq!(op_norm(&map.adjoint()).unwrap().value, direct);
    }
}

#[test]
fn linearization_norm_is_lipschitz_constant() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..25 {
        let size = rng.gen_range(2..=6);
        let m = random_path_metric(&mut rng, size);
        let size = rng.gen_range(2..=6);
        let n = random_path_metric(&mut rng, size);
        let image: Vec<usize> = (0..m.len()).map(|x| if x == m.base() { n.base() } else { rng.gen_range(0..n.len()) }).collect();
        let l = linearize(&m, &n, &image).unwrap();
        assert_eq!(op_norm(&l).unwrap().value, lipfree::operators::point_map_lipschitz(&m, &n, &image));
    }
}

#[test]
fn polytope_norm_bipolar_and_axioms() {
    let octagon = PolyhedralNorm::polytope(plane_points(&[
        (2, 1), (1, 2), (-1, 2), (-2, 1), (-2, -1), (-1, -2), (1, -2), (2, -1),
    ]))
    .unwrap();
    let facets = octagon.dual_extreme_points().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..30 {
        let x = vec![r(rng.gen_range(-9..=9), 3), r(rng.gen_range(-9..=9), 2)];
        let y = vec![r(rng.gen_range(-9..=9), 2), r(rng.gen_range(-9..=9), 5)];
        let nx = octagon.eval(&x).unwrap();
        let via = facets.iter().map(|w| lipfree_lp::dot(w, &x)).fold(q(0), Rational::max_of);
        assert_eq!(nx, via);
        let k = r(rng.gen_range(-5..=5), 3);
        let kx: Vec<Rational> = x.iter().map(|v| v.clone() * k.clone()).collect();
        assert_eq!(octagon.eval(&kx).unwrap(), nx.clone() * k.abs());
        let sum: Vec<Rational> = x.iter().zip(&y).map(|(a, b)| a.clone() + b.clone()).collect();
        assert!(octagon.eval(&sum).unwrap() <= nx + octagon.eval(&y).unwrap());
    }
    for v in octagon.extreme_points().unwrap() {
        assert_eq!(octagon.eval(&v).unwrap(), q(1));
    }
    for n in [PolyhedralNorm::<Rational>::l1(3), PolyhedralNorm::linf(3)] {
        for v in n.extreme_points().unwrap() {
            assert_eq!(n.eval(&v).unwrap(), q(1));
        }
    }
}

#[test]
fn induced_metrics_validate() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let norms = [
        PolyhedralNorm::<Rational>::l1(2),
        PolyhedralNorm::linf(2),
        PolyhedralNorm::polytope(plane_points(&[(2, 1), (1, 2), (-1, 2), (-2, 1), (-2, -1), (-1, -2), (1, -2), (2, -1)]))
            .unwrap(),
    ];
    for norm in &norms {
        let mut pts: Vec<Vec<Rational>> = vec![vec![q(0), q(0)]];
        while pts.len() < 6 {
            let p = vec![q(rng.gen_range(-3..=3)), q(rng.gen_range(-3..=3))];
            if !pts.contains(&p) {
                pts.push(p);
            }
        }
        let s = PointedMetricSpace::induced(norm, pts, 0, None).unwrap();
        assert!(s.validate().is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn free_norm_axioms(seed in 0u64..100_000, n in 2usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let space = random_path_metric(&mut rng, n);
        let a = random_vector(&mut rng, &space);
        let b = random_vector(&mut rng, &space);
        let k = r(rng.gen_range(-4..=4), rng.gen_range(1..=3));
        let na = free_norm(&a).unwrap();
        let nb = free_norm(&b).unwrap();
        prop_assert_eq!(na.gap.clone(), q(0));
        prop_assert_eq!(free_norm(&a.scale(&k)).unwrap().value, na.value.clone() * k.abs());
        prop_assert!(free_norm(&a.add(&b).unwrap()).unwrap().value <= na.value.clone() + nb.value.clone());
        let f = random_function(&mut rng, &space);
        prop_assert!(pair(&f, &a).unwrap().abs() <= lip_constant(&f) * na.value);
    }

    #[test]
    fn adjoint_pairing_identity(seed in 0u64..100_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let size = rng.gen_range(2..=5);
        let m = random_path_metric(&mut rng, size);
        let size = rng.gen_range(2..=5);
        let n = random_path_metric(&mut rng, size);
        let a = Matrix::from_rows(
            (0..n.free_dim()).map(|_| (0..m.free_dim()).map(|_| q(rng.gen_range(-3..=3))).collect()).collect(),
        ).unwrap();
        let map = LinearMap::new(SpaceDescriptor::Free(m.clone()), SpaceDescriptor::Free(n.clone()), a).unwrap();
        let v = random_vector(&mut rng, &m);
        let phi = random_function(&mut rng, &n);
        let lhs = lipfree_lp::dot(&map.adjoint().apply(&phi.to_free_coords()).unwrap(), &v.to_dense());
        let rhs = lipfree_lp::dot(&phi.to_free_coords(), &map.apply(&v.to_dense()).unwrap());
        prop_assert_eq!(lhs, rhs);
        prop_assert_eq!(map.adjoint().adjoint(), map);
    }
}
