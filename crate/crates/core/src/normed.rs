//! Finite-dimensional real normed spaces with polyhedral unit balls.

use lipfree_lp::{dot, solve, Bound, LpProblem, Matrix, Relation, Scalar, Sense, Status};

use crate::error::{Error, Result};

/// Largest dimension for which ℓ∞ sign vectors (or ℓ¹ dual sign vectors)
/// are enumerated.
pub const MAX_SIGN_DIM: usize = 20;

/// Cap on vertex subsets examined when enumerating facets of a V-polytope.
pub const MAX_FACET_SUBSETS: usize = 200_000;

#[derive(Debug, Clone, PartialEq)]
pub enum NormShape<S> {
    L1,
    LInf,
    /// Unit ball given as the convex hull of a centrally symmetric vertex list.
    Polytope(Vec<Vec<S>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolyhedralNorm<S> {
    dim: usize,
    shape: NormShape<S>,
}

impl<S: Scalar> PolyhedralNorm<S> {
    pub fn l1(dim: usize) -> Self {
        PolyhedralNorm { dim, shape: NormShape::L1 }
    }

    pub fn linf(dim: usize) -> Self {
        PolyhedralNorm { dim, shape: NormShape::LInf }
    }

    /// Validates a V-polytope unit ball: nonempty, symmetric, spanning.
    pub fn polytope(vertices: Vec<Vec<S>>) -> Result<Self> {
        let dim = vertices
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::InvalidNorm("empty vertex list".into()))?;
        if dim == 0 || vertices.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidNorm("vertices must share a positive dimension".into()));
        }
        for v in &vertices {
            let neg: Vec<S> = v.iter().map(|x| -x.clone()).collect();
            if !vertices.iter().any(|w| approx_vec_eq(w, &neg)) {
                return Err(Error::InvalidNorm(format!(
                    "vertex list is not symmetric: -({}) missing",
                    fmt_vec(v)
                )));
            }
        }
        let m = Matrix::from_rows(vertices.clone()).expect("rectangular");
        if m.rank() < dim {
            return Err(Error::InvalidNorm("vertices do not span the space".into()));
        }
        Ok(PolyhedralNorm { dim, shape: NormShape::Polytope(vertices) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> &NormShape<S> {
        &self.shape
    }

    fn check_dim(&self, x: &[S]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Malformed(format!(
                "vector of length {} for a {}-dimensional norm",
                x.len(),
                self.dim
            )));
        }
        Ok(())
    }

    /// ‖x‖. For V-polytopes this is the gauge LP
    /// `min Σλᵢ s.t. Σλᵢvᵢ = x, λ ≥ 0`.
    pub fn eval(&self, x: &[S]) -> Result<S> {
        self.check_dim(x)?;
        match &self.shape {
            NormShape::L1 => Ok(x.iter().fold(S::zero(), |acc, v| acc + v.abs())),
            NormShape::LInf => Ok(x.iter().fold(S::zero(), |acc, v| S::max_of(acc, v.abs()))),
            NormShape::Polytope(vertices) => gauge(vertices, x),
        }
    }

    /// Extreme points of the unit ball.
    pub fn extreme_points(&self) -> Result<Vec<Vec<S>>> {
        match &self.shape {
            NormShape::L1 => Ok(signed_basis(self.dim)),
            NormShape::LInf => sign_vectors(self.dim),
            NormShape::Polytope(vertices) => {
                let mut unique: Vec<Vec<S>> = Vec::new();
                for v in vertices {
                    if !unique.iter().any(|w| approx_vec_eq(w, v)) {
                        unique.push(v.clone());
                    }
                }
                let mut extreme = Vec::with_capacity(unique.len());
                for (i, v) in unique.iter().enumerate() {
                    let others: Vec<Vec<S>> =
                        unique.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, w)| w.clone()).collect();
                    if !in_convex_hull(&others, v)? {
                        extreme.push(v.clone());
                    }
                }
                Ok(extreme)
            }
        }
    }

    /// One representative of each antipodal pair of extreme points.
    pub fn extreme_points_mod_sign(&self) -> Result<Vec<Vec<S>>> {
        Ok(half_of_symmetric(self.extreme_points()?))
    }

    /// Dual norm `max_v |⟨φ, v⟩|` over extreme points `v` of the ball.
    pub fn dual_eval(&self, phi: &[S]) -> Result<S> {
        self.check_dim(phi)?;
        match &self.shape {
            NormShape::L1 => Ok(phi.iter().fold(S::zero(), |acc, v| S::max_of(acc, v.abs()))),
            NormShape::LInf => Ok(phi.iter().fold(S::zero(), |acc, v| acc + v.abs())),
            NormShape::Polytope(_) => Ok(self
                .extreme_points()?
                .iter()
                .fold(S::zero(), |acc, v| S::max_of(acc, dot(phi, v).abs()))),
        }
    }

    /// Extreme points of the dual unit ball (facet normals of the ball).
    pub fn dual_extreme_points(&self) -> Result<Vec<Vec<S>>> {
        match &self.shape {
            NormShape::L1 => sign_vectors(self.dim),
            NormShape::LInf => Ok(signed_basis(self.dim)),
            NormShape::Polytope(_) => {
                let ext = self.extreme_points()?;
                facet_normals(&ext, self.dim)
            }
        }
    }

    /// Operator norm of `g` as a map from this space to itself.
    pub fn operator_norm(&self, g: &Matrix<S>) -> Result<S> {
        if g.shape() != (self.dim, self.dim) {
            return Err(Error::Malformed("operator shape does not match the norm".into()));
        }
        let mut best = S::zero();
        for v in self.extreme_points_mod_sign()? {
            let gv = g.mul_vec(&v).expect("shape checked");
            best = S::max_of(best, self.eval(&gv)?);
        }
        Ok(best)
    }

    /// True when `g` and its inverse are both contractions.
    pub fn is_isometry(&self, g: &Matrix<S>) -> Result<bool> {
        let inv = g.inverse().ok_or_else(|| Error::Action("operator is not invertible".into()))?;
        Ok(self.operator_norm(g)?.le_tol(&S::one()) && self.operator_norm(&inv)?.le_tol(&S::one()))
    }

    /// Norm invariance under every coordinate sign change (1-unconditional).
    pub fn is_sign_invariant(&self) -> Result<bool> {
        match &self.shape {
            NormShape::L1 | NormShape::LInf => Ok(true),
            NormShape::Polytope(vertices) => {
                if self.dim > MAX_SIGN_DIM {
                    return Err(Error::Capacity { what: "sign-orbit check dimension", needed: self.dim, cap: MAX_SIGN_DIM });
                }
                for v in vertices {
                    let base = self.eval(v)?;
                    for s in sign_vectors::<S>(self.dim)? {
                        let flipped: Vec<S> = v.iter().zip(&s).map(|(a, b)| a.clone() * b.clone()).collect();
                        if !self.eval(&flipped)?.approx_eq(&base) {
                            return Ok(false);
                        }
                    }
                }
                Ok(true)
            }
        }
    }
}

fn gauge<S: Scalar>(vertices: &[Vec<S>], x: &[S]) -> Result<S> {
    let k = vertices.len();
    let mut lp = LpProblem::new(Sense::Minimize, vec![S::one(); k]);
    for (r, xr) in x.iter().enumerate() {
        lp.add_constraint(vertices.iter().map(|v| v[r].clone()).collect(), Relation::Eq, xr.clone());
    }
    let sol = solve(&lp)?;
    match sol.status {
        Status::Optimal => Ok(sol.objective_value),
        s => Err(Error::InvalidNorm(format!("gauge LP is {s:?}; vertex list does not span"))),
    }
}

fn in_convex_hull<S: Scalar>(points: &[Vec<S>], v: &[S]) -> Result<bool> {
    if points.is_empty() {
        return Ok(false);
    }
    let k = points.len();
    let mut lp = LpProblem::new(Sense::Minimize, vec![S::zero(); k]);
    for (r, vr) in v.iter().enumerate() {
        lp.add_constraint(points.iter().map(|p| p[r].clone()).collect(), Relation::Eq, vr.clone());
    }
    lp.add_constraint(vec![S::one(); k], Relation::Eq, S::one());
    for j in 0..k {
        lp.set_bound(j, Bound::non_negative());
    }
    Ok(solve(&lp)?.status == Status::Optimal)
}

/// Facet normals `w` with `max_v ⟨w, v⟩ = 1` attained on `dim` independent
/// extreme points.
fn facet_normals<S: Scalar>(ext: &[Vec<S>], dim: usize) -> Result<Vec<Vec<S>>> {
    let n = ext.len();
    let subsets = binomial(n, dim);
    if subsets > MAX_FACET_SUBSETS {
        return Err(Error::Capacity { what: "facet enumeration subsets", needed: subsets, cap: MAX_FACET_SUBSETS });
    }
    let mut normals: Vec<Vec<S>> = Vec::new();
    for subset in combinations(n, dim) {
        let a = Matrix::from_rows(subset.iter().map(|&i| ext[i].clone()).collect()).expect("rectangular");
        let Some(inv) = a.inverse() else { continue };
        let w = inv.mul_vec(&vec![S::one(); dim]).expect("square");
        if ext.iter().all(|v| dot(&w, v).le_tol(&S::one())) && !normals.iter().any(|u| approx_vec_eq(u, &w)) {
            normals.push(w);
        }
    }
    Ok(normals)
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    acc as usize
}

/// All `k`-subsets of `0..n` in lexicographic order.
pub(crate) fn combinations(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = if k <= n { Some((0..k).collect()) } else { None };
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        // Advance to the next combination.
        let mut next = out.clone();
        let mut i = k;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            if next[i] < n - k + i {
                next[i] += 1;
                for j in i + 1..k {
                    next[j] = next[j - 1] + 1;
                }
                cur = Some(next);
                break;
            }
        }
        if k == 0 {
            cur = None;
        }
        Some(out)
    })
}

fn signed_basis<S: Scalar>(dim: usize) -> Vec<Vec<S>> {
    let mut out = Vec::with_capacity(2 * dim);
    for i in 0..dim {
        for s in [S::one(), -S::one()] {
            let mut e = vec![S::zero(); dim];
            e[i] = s;
            out.push(e);
        }
    }
    out
}

/// All `2^dim` vectors in `{1, -1}^dim`, first coordinate varying slowest.
pub fn sign_vectors<S: Scalar>(dim: usize) -> Result<Vec<Vec<S>>> {
    if dim > MAX_SIGN_DIM {
        return Err(Error::Capacity { what: "sign vector dimension", needed: dim, cap: MAX_SIGN_DIM });
    }
    Ok((0..1usize << dim)
        .map(|mask| {
            (0..dim)
                .map(|i| if mask >> (dim - 1 - i) & 1 == 0 { S::one() } else { -S::one() })
                .collect()
        })
        .collect())
}

/// Keeps the first of each `{v, -v}` pair.
pub(crate) fn half_of_symmetric<S: Scalar>(points: Vec<Vec<S>>) -> Vec<Vec<S>> {
    let mut kept: Vec<Vec<S>> = Vec::new();
    for p in points {
        let neg: Vec<S> = p.iter().map(|x| -x.clone()).collect();
        if !kept.iter().any(|k| approx_vec_eq(k, &neg) || approx_vec_eq(k, &p)) {
            kept.push(p);
        }
    }
    kept
}

pub(crate) fn approx_vec_eq<S: Scalar>(a: &[S], b: &[S]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.approx_eq(y))
}

pub(crate) fn fmt_vec<S: Scalar>(v: &[S]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}
