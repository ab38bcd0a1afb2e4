#![allow(dead_code)]

use std::sync::Arc;

use lipfree::{Matrix, PointedMetricSpace, PolyhedralNorm, Rational, Scalar, Space};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn q(n: i64) -> Rational {
    Rational::from_i64(n)
}

pub fn r(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

/// Random metric with all distances in `[1, 2]`, so every triangle holds.
pub fn random_metric(rng: &mut ChaCha8Rng, n: usize) -> Space<Rational> {
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = r(rng.gen_range(4..=8), 4);
            d[(i, j)] = v.clone();
            d[(j, i)] = v;
        }
    }
    let labels = (0..n).map(|i| format!("p{i}")).collect();
    Arc::new(PointedMetricSpace::new(labels, rng.gen_range(0..n), d).unwrap())
}

/// Random metric from a weighted graph's shortest paths, which can be far
/// from uniform.
pub fn random_path_metric(rng: &mut ChaCha8Rng, n: usize) -> Space<Rational> {
    let mut d = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i + 1..n {
            let v = r(rng.gen_range(1..=12), rng.gen_range(1..=3));
            d[(i, j)] = v.clone();
            d[(j, i)] = v;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[(i, k)].clone() + d[(k, j)].clone();
                if via < d[(i, j)] {
                    d[(i, j)] = via;
                }
            }
        }
    }
    let labels = (0..n).map(|i| format!("p{i}")).collect();
    Arc::new(PointedMetricSpace::new(labels, 0, d).unwrap())
}

pub fn plane_points(pts: &[(i64, i64)]) -> Vec<Vec<Rational>> {
    pts.iter().map(|&(a, b)| vec![q(a), q(b)]).collect()
}

pub fn induced(norm: &Arc<PolyhedralNorm<Rational>>, pts: Vec<Vec<Rational>>) -> Space<Rational> {
    let base = pts.iter().position(|p| p.iter().all(|x| *x == q(0))).expect("origin present");
    Arc::new(PointedMetricSpace::induced(norm, pts, base, None).unwrap())
}

pub fn quarter_turn() -> Matrix<Rational> {
    Matrix::from_rows(vec![vec![q(0), q(-1)], vec![q(1), q(0)]]).unwrap()
}

pub fn diag(entries: &[i64]) -> Matrix<Rational> {
    let mut m = Matrix::zeros(entries.len(), entries.len());
    for (i, &e) in entries.iter().enumerate() {
        m[(i, i)] = q(e);
    }
    m
}

pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Vertices of the Lipschitz ball by brute force: every choice of
/// `|M| - 1` tight constraints `±(f(x) - f(y)) = d(x, y)` that determines a
/// unique point, kept when it satisfies all constraints.
pub fn lip_ball_vertices_oracle(space: &Space<Rational>) -> Vec<Vec<Rational>> {
    let nf = space.free_dim();
    let mut planes: Vec<(Vec<Rational>, Rational)> = Vec::new();
    for a in 0..space.len() {
        for b in a + 1..space.len() {
            let mut row = vec![q(0); nf];
            if let Some(i) = space.free_index(a) {
                row[i] = q(1);
            }
            if let Some(i) = space.free_index(b) {
                row[i] = q(-1);
            }
            let neg: Vec<Rational> = row.iter().map(|x| -x.clone()).collect();
            planes.push((row, space.dist(a, b).clone()));
            planes.push((neg, space.dist(a, b).clone()));
        }
    }
    let mut out: Vec<Vec<Rational>> = Vec::new();
    for subset in combinations(planes.len(), nf) {
        let a = Matrix::from_rows(subset.iter().map(|&i| planes[i].0.clone()).collect()).unwrap();
        if a.rank() < nf {
            continue;
        }
        let b: Vec<Rational> = subset.iter().map(|&i| planes[i].1.clone()).collect();
        let x = a.solve(&b).unwrap();
        let feasible = planes.iter().all(|(row, rhs)| lipfree_lp::dot(row, &x) <= *rhs);
        if feasible && !out.contains(&x) {
            out.push(x);
        }
    }
    out
}

/// Closes a set of matrices under multiplication, giving up past `cap`.
pub fn matrix_closure(generators: &[Matrix<Rational>], cap: usize) -> Option<Vec<Matrix<Rational>>> {
    let d = generators.first()?.rows();
    let mut out = vec![Matrix::identity(d)];
    let mut i = 0;
    while i < out.len() {
        for g in generators {
            let h = g.mul(&out[i]).unwrap();
            if !out.contains(&h) {
                if out.len() == cap {
                    return None;
                }
                out.push(h);
            }
        }
        i += 1;
    }
    Some(out)
}

pub fn signed_permutation(rng: &mut ChaCha8Rng, d: usize) -> Matrix<Rational> {
    let mut perm: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    let mut m = Matrix::zeros(d, d);
    for (i, &p) in perm.iter().enumerate() {
        m[(i, p)] = q(if rng.gen_bool(0.5) { 1 } else { -1 });
    }
    m
}

/// A random finite group acting linearly on `(ℝ^d, ℓ¹ or ℓ∞)` together with
/// an invariant point set containing the origin.
pub struct GroupInstance {
    pub norm: Arc<PolyhedralNorm<Rational>>,
    pub space: Space<Rational>,
    pub generators: Vec<Matrix<Rational>>,
    pub order: usize,
    pub isometric: bool,
}

/// Signed permutations are isometries of both norms; conjugating them by a
/// shear gives a non-isometric action of the same group.
pub fn random_group_instance(rng: &mut ChaCha8Rng, max_order: usize, max_points: usize) -> GroupInstance {
    loop {
        let d = rng.gen_range(2..=3);
        let norm = Arc::new(if rng.gen_bool(0.5) { PolyhedralNorm::l1(d) } else { PolyhedralNorm::linf(d) });
        let count = rng.gen_range(1..=2);
        let mut gens: Vec<Matrix<Rational>> = (0..count).map(|_| signed_permutation(rng, d)).collect();
        let isometric = rng.gen_bool(0.6);
        if !isometric {
            let mut shear = Matrix::identity(d);
            shear[(0, 1)] = q(1);
            let inv = shear.inverse().unwrap();
            gens = gens.iter().map(|g| shear.mul(g).unwrap().mul(&inv).unwrap()).collect();
        }
        let Some(elements) = matrix_closure(&gens, max_order) else { continue };
        let mut pts: Vec<Vec<Rational>> = vec![vec![q(0); d]];
        for _ in 0..rng.gen_range(1..=3) {
            let seed: Vec<Rational> = (0..d).map(|_| r(rng.gen_range(-4..=4), rng.gen_range(1..=2))).collect();
            for g in &elements {
                let p = g.mul_vec(&seed).unwrap();
                if !pts.contains(&p) {
                    pts.push(p);
                }
            }
        }
        if pts.len() > max_points || Matrix::from_rows(pts.clone()).unwrap().rank() < d {
            continue;
        }
        let space = Arc::new(PointedMetricSpace::induced(&norm, pts, 0, None).unwrap());
        return GroupInstance { norm, space, generators: gens, order: elements.len(), isometric };
    }
}
