//! Grid liftings for sign-invariant norms on the cube.

mod common;

use std::sync::Arc;

use common::*;
use lipfree::free_space::free_norms;
use lipfree::*;

fn options(op: bool) -> CubeOptions<Rational> {
    CubeOptions { compute_op_norm: op, ..CubeOptions::default() }
}

#[test]
fn lifting_properties_on_all_small_grids() {
    for d in 1..=3 {
        for qq in 1..=4 {
            for norm in [PolyhedralNorm::<Rational>::l1(d), PolyhedralNorm::linf(d)] {
                let norm = Arc::new(norm);
                let spec = GridSpec::new(d, qq);
                let res = cube_lifting(&spec, &norm, &options(false)).unwrap();
                assert!(res.beta_identity && res.beta_axis.iter().all(|b| *b));
                assert!(res.signs_enumerated);
                assert_eq!(res.signs_checked, 1 << d);
                assert_eq!(res.max_sign_deviation, q(0));
                // Independent check of βφ = e_n from the coordinates.
                let coords = res.space.coords().unwrap();
                for (n, phi) in res.phi.iter().enumerate() {
                    let mut bary = vec![q(0); d];
                    for (p, c) in phi.iter() {
                        for k in 0..d {
                            bary[k] += c.clone() * coords[p][k].clone();
                        }
                    }
                    let mut e = vec![q(0); d];
                    e[n] = q(1);
                    assert_eq!(bary, e);
                }
                let norms = free_norms(&res.phi).unwrap();
                for (a, b) in norms.iter().zip(&res.phi_norms) {
                    assert_eq!(&a.value, b);
                    assert!(a.value >= q(1));
                }
                if qq == 4 && d <= 2 {
                    assert!(res.phi_norms_within);
                }
            }
        }
    }
}

#[test]
fn phi_norms_do_not_grow_with_the_grid() {
    for d in 1..=3 {
        for norm in [PolyhedralNorm::<Rational>::l1(d), PolyhedralNorm::linf(d)] {
            let norm = Arc::new(norm);
            let values: Vec<Rational> = (1..=4)
                .map(|qq| cube_lifting(&GridSpec::new(d, qq), &norm, &options(false)).unwrap().phi_norms[0].clone())
                .collect();
            assert!(values.windows(2).all(|w| w[1] <= w[0]), "{values:?}");
        }
    }
}

#[test]
fn operator_norm_on_small_grids() {
    for (d, qq) in [(1, 3), (2, 2), (2, 3)] {
        for norm in [PolyhedralNorm::<Rational>::l1(d), PolyhedralNorm::linf(d)] {
            let res = cube_lifting(&GridSpec::new(d, qq), &Arc::new(norm), &options(true)).unwrap();
            assert_eq!(res.op_norm, Some(q(1)));
            assert_eq!(res.op_norm_within, Some(true));
        }
    }
}

#[test]
fn scaled_axes() {
    let norm = Arc::new(PolyhedralNorm::<Rational>::l1(2));
    let mut spec = GridSpec::new(2, 2);
    spec.alpha = vec![q(2), r(1, 3)];
    let res = cube_lifting(&spec, &norm, &options(true)).unwrap();
    assert!(res.beta_identity);
    assert_eq!(res.max_sign_deviation, q(0));
    assert!(res.space.validate().is_empty());
}
