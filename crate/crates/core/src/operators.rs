//! Linear maps between coordinatized spaces and their exact operator norms.

use std::sync::Arc;

use lipfree_lp::{Matrix, Scalar};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::free_space::{free_norm, lip_constant, same_space, FreeVector, LipFunction, Space};
use crate::normed::{half_of_symmetric, PolyhedralNorm};

/// Cap on the raw parent/sign assignments examined when enumerating the
/// vertices of a Lipschitz ball.
pub const MAX_LIP_VERTEX_ASSIGNMENTS: usize = 200_000;

/// Coordinates: free spaces use non-base points in label order, `Lip`
/// uses values at the same points, normed spaces use their own basis.
#[derive(Debug, Clone)]
pub enum SpaceDescriptor<S: Scalar> {
    Free(Space<S>),
    Normed(Arc<PolyhedralNorm<S>>),
    /// Dual of `Free`: Lipschitz functions vanishing at the base.
    Lip(Space<S>),
    DualNormed(Arc<PolyhedralNorm<S>>),
}

impl<S: Scalar> PartialEq for SpaceDescriptor<S> {
    fn eq(&self, other: &Self) -> bool {
        use SpaceDescriptor::*;
        match (self, other) {
            (Free(a), Free(b)) | (Lip(a), Lip(b)) => same_space(a, b),
            (Normed(a), Normed(b)) | (DualNormed(a), DualNormed(b)) => Arc::ptr_eq(a, b) || a == b,
            _ => false,
        }
    }
}

impl<S: Scalar> SpaceDescriptor<S> {
    pub fn dim(&self) -> usize {
        match self {
            SpaceDescriptor::Free(m) | SpaceDescriptor::Lip(m) => m.free_dim(),
            SpaceDescriptor::Normed(n) | SpaceDescriptor::DualNormed(n) => n.dim(),
        }
    }

    pub fn dual(&self) -> Self {
        match self {
            SpaceDescriptor::Free(m) => SpaceDescriptor::Lip(m.clone()),
            SpaceDescriptor::Lip(m) => SpaceDescriptor::Free(m.clone()),
            SpaceDescriptor::Normed(n) => SpaceDescriptor::DualNormed(n.clone()),
            SpaceDescriptor::DualNormed(n) => SpaceDescriptor::Normed(n.clone()),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            SpaceDescriptor::Free(_) => "free",
            SpaceDescriptor::Lip(_) => "lip0",
            SpaceDescriptor::Normed(_) => "normed",
            SpaceDescriptor::DualNormed(_) => "dual-normed",
        }
    }

    /// Norm of a coordinate vector.
    pub fn norm_of(&self, v: &[S]) -> Result<S> {
        match self {
            SpaceDescriptor::Free(m) => Ok(free_norm(&FreeVector::from_dense(m, v)?)?.value),
            SpaceDescriptor::Lip(m) => Ok(lip_constant(&LipFunction::from_free_coords(m, v)?)),
            SpaceDescriptor::Normed(n) => n.eval(v),
            SpaceDescriptor::DualNormed(n) => n.dual_eval(v),
        }
    }

    /// A finite set of unit vectors whose closed absolute convex hull is
    /// the unit ball, one per antipodal pair.
    pub fn ball_generators(&self) -> Result<Vec<Vec<S>>> {
        match self {
            SpaceDescriptor::Free(m) => Ok(normalized_molecules(m)),
            SpaceDescriptor::Normed(n) => n.extreme_points_mod_sign(),
            SpaceDescriptor::DualNormed(n) => Ok(half_of_symmetric(n.dual_extreme_points()?)),
            SpaceDescriptor::Lip(m) => Ok(half_of_symmetric(lip_ball_vertices(m)?)),
        }
    }
}

/// `(δx - δy)/d(x, y)` over unordered pairs, base point included.
pub fn normalized_molecules<S: Scalar>(m: &Space<S>) -> Vec<Vec<S>> {
    let n = m.len();
    let mut out = Vec::with_capacity(n * (n - 1) / 2);
    for x in 0..n {
        for y in x + 1..n {
            let mut v = vec![S::zero(); m.free_dim()];
            let d = m.dist(x, y).clone();
            if let Some(i) = m.free_index(x) {
                v[i] = S::one() / d.clone();
            }
            if let Some(i) = m.free_index(y) {
                v[i] = -S::one() / d.clone();
            }
            out.push(v);
        }
    }
    out
}

/// Vertices of the Lipschitz ball of `Lip₀(M)`: every vertex is fixed by a
/// spanning tree of tight pairs rooted at the base, so each non-base point
/// picks a parent and a sign, and the feasible results are kept.
pub fn lip_ball_vertices<S: Scalar>(m: &Space<S>) -> Result<Vec<Vec<S>>> {
    let n = m.len();
    let k = n - 1;
    let per_point = 2 * k;
    let total = (per_point as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if total > MAX_LIP_VERTEX_ASSIGNMENTS as u128 {
        return Err(Error::Capacity {
            what: "Lipschitz-ball vertex assignments",
            needed: total.min(usize::MAX as u128) as usize,
            cap: MAX_LIP_VERTEX_ASSIGNMENTS,
        });
    }
    let base = m.base();
    let others: Vec<usize> = m.non_base_points().collect();
    let mut vertices: Vec<Vec<S>> = Vec::new();
    let mut choice = vec![0usize; k];
    'outer: loop {
        // choice[i] encodes (parent among the other n-1 points, sign).
        let parent_of = |i: usize| -> (usize, bool) {
            let c = choice[i];
            let idx = c / 2;
            let p = (0..n).filter(|&p| p != others[i]).nth(idx).expect("in range");
            (p, c % 2 == 0)
        };
        let mut value: Vec<Option<S>> = vec![None; n];
        value[base] = Some(S::zero());
        let mut acyclic = true;
        for i in 0..k {
            let mut chain = Vec::new();
            let mut cur = others[i];
            while value[cur].is_none() {
                if chain.contains(&cur) || chain.len() > n {
                    acyclic = false;
                    break;
                }
                chain.push(cur);
                let ci = others.iter().position(|&o| o == cur).expect("non-base");
                cur = parent_of(ci).0;
            }
            if !acyclic {
                break;
            }
            for &c in chain.iter().rev() {
                let ci = others.iter().position(|&o| o == c).expect("non-base");
                let (p, up) = parent_of(ci);
                let pv = value[p].clone().expect("parent resolved");
                let d = m.dist(c, p).clone();
                value[c] = Some(if up { pv + d } else { pv - d });
            }
        }
        if acyclic {
            let values: Vec<S> = value.into_iter().map(|v| v.expect("all resolved")).collect();
            let f = LipFunction::new(m, values).expect("base is zero");
            if lip_constant(&f).le_tol(&S::one()) {
                let coords = f.to_free_coords();
                if !vertices.iter().any(|w| crate::normed::approx_vec_eq(w, &coords)) {
                    vertices.push(coords);
                }
            }
        }
        // Next assignment.
        for slot in choice.iter_mut() {
            *slot += 1;
            if *slot < per_point {
                continue 'outer;
            }
            *slot = 0;
        }
        break;
    }
    Ok(vertices)
}

#[derive(Debug, Clone)]
pub struct LinearMap<S: Scalar> {
    pub domain: SpaceDescriptor<S>,
    pub codomain: SpaceDescriptor<S>,
    pub matrix: Matrix<S>,
}

impl<S: Scalar> PartialEq for LinearMap<S> {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain && self.codomain == other.codomain && self.matrix == other.matrix
    }
}

impl<S: Scalar> LinearMap<S> {
    pub fn new(domain: SpaceDescriptor<S>, codomain: SpaceDescriptor<S>, matrix: Matrix<S>) -> Result<Self> {
        if matrix.shape() != (codomain.dim(), domain.dim()) {
            return Err(Error::Malformed(format!(
                "matrix is {}x{}, descriptors need {}x{}",
                matrix.rows(),
                matrix.cols(),
                codomain.dim(),
                domain.dim()
            )));
        }
        Ok(LinearMap { domain, codomain, matrix })
    }

    pub fn identity(space: SpaceDescriptor<S>) -> Self {
        let n = space.dim();
        LinearMap { domain: space.clone(), codomain: space, matrix: Matrix::identity(n) }
    }

    pub fn apply(&self, v: &[S]) -> Result<Vec<S>> {
        self.matrix.mul_vec(v).ok_or_else(|| Error::Malformed("vector length does not match the domain".into()))
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinearMap<S>) -> Result<LinearMap<S>> {
        if inner.codomain != self.domain {
            return Err(Error::SpaceMismatch);
        }
        Ok(LinearMap {
            domain: inner.domain.clone(),
            codomain: self.codomain.clone(),
            matrix: self.matrix.mul(&inner.matrix).expect("dimensions agree"),
        })
    }

    pub fn with_matrix(&self, matrix: Matrix<S>) -> Result<LinearMap<S>> {
        LinearMap::new(self.domain.clone(), self.codomain.clone(), matrix)
    }

    pub fn add(&self, other: &LinearMap<S>) -> Result<LinearMap<S>> {
        if self.domain != other.domain || self.codomain != other.codomain {
            return Err(Error::SpaceMismatch);
        }
        self.with_matrix(self.matrix.add(&other.matrix).expect("same shape"))
    }

    pub fn sub(&self, other: &LinearMap<S>) -> Result<LinearMap<S>> {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, k: &S) -> LinearMap<S> {
        LinearMap { domain: self.domain.clone(), codomain: self.codomain.clone(), matrix: self.matrix.scale(k) }
    }

    /// Transposed matrix between the dual spaces.
    pub fn adjoint(&self) -> LinearMap<S> {
        LinearMap { domain: self.codomain.dual(), codomain: self.domain.dual(), matrix: self.matrix.transpose() }
    }

    pub fn approx_eq(&self, other: &LinearMap<S>) -> bool {
        self.matrix.approx_eq(&other.matrix)
    }
}

/// Linear extension of a base-preserving point map `L: M → N`, given as
/// `image[x] = L(x)`.
pub fn linearize<S: Scalar>(m: &Space<S>, n: &Space<S>, image: &[usize]) -> Result<LinearMap<S>> {
    if image.len() != m.len() || image.iter().any(|&y| y >= n.len()) {
        return Err(Error::Malformed("point map must send every point of M into N".into()));
    }
    if image[m.base()] != n.base() {
        return Err(Error::Precondition("point map does not preserve the base point".into()));
    }
    let mut a = Matrix::zeros(n.free_dim(), m.free_dim());
    for x in m.non_base_points() {
        if let Some(r) = n.free_index(image[x]) {
            a[(r, m.free_index(x).expect("non-base"))] = S::one();
        }
    }
    LinearMap::new(SpaceDescriptor::Free(m.clone()), SpaceDescriptor::Free(n.clone()), a)
}

/// `max d(Lx, Ly)/d(x, y)` over unordered pairs.
pub fn point_map_lipschitz<S: Scalar>(m: &Space<S>, n: &Space<S>, image: &[usize]) -> S {
    let mut best = S::zero();
    for x in 0..m.len() {
        for y in x + 1..m.len() {
            best = S::max_of(best, n.dist(image[x], image[y]).clone() / m.dist(x, y).clone());
        }
    }
    best
}

/// `β(δx) = x`, from the free space over `M` to the ambient normed space.
pub fn barycenter<S: Scalar>(m: &Space<S>, norm: &Arc<PolyhedralNorm<S>>) -> Result<LinearMap<S>> {
    let coords = m.coords().ok_or_else(|| Error::Precondition("barycenter needs point coordinates".into()))?;
    if coords[m.base()].iter().any(|c| !c.is_zero_tol()) {
        return Err(Error::Precondition("base point is not at the origin; translate first".into()));
    }
    if coords.iter().any(|c| c.len() != norm.dim()) {
        return Err(Error::Malformed("coordinates do not match the norm dimension".into()));
    }
    let cols: Vec<Vec<S>> = m.non_base_points().map(|p| coords[p].clone()).collect();
    let a = Matrix::from_columns(norm.dim(), &cols).expect("checked");
    LinearMap::new(SpaceDescriptor::Free(m.clone()), SpaceDescriptor::Normed(norm.clone()), a)
}

#[derive(Debug, Clone)]
pub struct OpNorm<S: Scalar> {
    pub value: S,
    /// Unit-ball generator of the domain where the maximum is attained.
    pub argmax: Vec<S>,
}

/// Exact operator norm: the maximum of the codomain norm over a finite set
/// of generators of the domain ball.
pub fn op_norm<S: Scalar>(a: &LinearMap<S>) -> Result<OpNorm<S>> {
    let gens = a.domain.ball_generators()?;
    op_norm_over(a, &gens)
}

pub(crate) fn op_norm_over<S: Scalar>(a: &LinearMap<S>, gens: &[Vec<S>]) -> Result<OpNorm<S>> {
    let values: Vec<S> = gens
        .par_iter()
        .map(|v| a.codomain.norm_of(&a.apply(v)?))
        .collect::<Result<Vec<S>>>()?;
    let mut best: Option<(S, usize)> = None;
    for (i, v) in values.into_iter().enumerate() {
        if best.as_ref().map_or(true, |(b, _)| v > *b) {
            best = Some((v, i));
        }
    }
    Ok(match best {
        Some((value, i)) => OpNorm { value, argmax: gens[i].clone() },
        None => OpNorm { value: S::zero(), argmax: Vec::new() },
    })
}

/// `β*T*` on `Lip₀(M)`, the projection onto restrictions of linear
/// functionals induced by a lifting `T`.
pub fn dual_projection_from_lifting<S: Scalar>(t: &LinearMap<S>, beta: &LinearMap<S>) -> Result<LinearMap<S>> {
    check_lifting(t, beta)?;
    Ok(t.compose(beta)?.adjoint())
}

/// Errors unless `β∘T = Id`.
pub fn check_lifting<S: Scalar>(t: &LinearMap<S>, beta: &LinearMap<S>) -> Result<()> {
    let bt = beta.compose(t)?;
    let id = Matrix::identity(bt.matrix.rows());
    if !bt.matrix.approx_eq(&id) {
        let dev = bt.matrix.max_abs_diff(&id).expect("square");
        return Err(Error::Precondition(format!("beta∘T is not the identity (max deviation {dev})")));
    }
    Ok(())
}
