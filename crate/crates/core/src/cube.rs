//! Grid discretization of the cube `[-1/2, 1/2]^d` and the sign-equivariant
//! lifting it carries for 1-unconditional norms.

use std::sync::Arc;

use lipfree_lp::{Matrix, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::free_space::{free_norm, FreeVector, Space};
use crate::metric::PointedMetricSpace;
use crate::normed::PolyhedralNorm;
use crate::operators::{barycenter, op_norm, LinearMap, SpaceDescriptor};

pub const DEFAULT_GRID_CAP: usize = 10_000;
/// Dimensions up to this enumerate every sign vector; above it a fixed
/// seeded sample is checked.
pub const MAX_ENUMERATED_SIGN_DIM: usize = 12;
pub const SIGN_SAMPLE_SIZE: usize = 4096;

#[derive(Debug, Clone)]
pub struct GridSpec<S: Scalar> {
    pub d: usize,
    /// Subdivisions per axis; levels are `-1/2 + j/q`.
    pub q: usize,
    pub alpha: Vec<S>,
    pub cap: usize,
}

impl<S: Scalar> GridSpec<S> {
    pub fn new(d: usize, q: usize) -> Self {
        GridSpec { d, q, alpha: vec![S::one(); d], cap: DEFAULT_GRID_CAP }
    }

    pub fn level(&self, j: usize) -> S {
        S::from_ratio(j as i64, self.q as i64) - S::half()
    }

    /// `(q+1)^d`.
    pub fn grid_size(&self) -> Option<usize> {
        (self.q + 1).checked_pow(self.d as u32)
    }

    fn validate(&self) -> Result<()> {
        if self.d == 0 || self.q == 0 {
            return Err(Error::Malformed("grid needs d ≥ 1 and q ≥ 1".into()));
        }
        if self.alpha.len() != self.d || self.alpha.iter().any(|a| !a.is_pos_tol()) {
            return Err(Error::Malformed("one positive scale factor per axis is required".into()));
        }
        match self.grid_size() {
            Some(n) if n <= self.cap => Ok(()),
            n => Err(Error::Capacity { what: "grid points", needed: n.unwrap_or(usize::MAX), cap: self.cap }),
        }
    }

    /// Lexicographic index of a level tuple, first axis slowest.
    fn tuple_index(&self, tuple: &[usize]) -> usize {
        tuple.iter().fold(0, |acc, &j| acc * (self.q + 1) + j)
    }

    fn tuples(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let n = self.grid_size().expect("validated");
        (0..n).map(move |mut idx| {
            let mut t = vec![0; self.d];
            for slot in t.iter_mut().rev() {
                *slot = idx % (self.q + 1);
                idx /= self.q + 1;
            }
            t
        })
    }
}

/// Grid points `(α_k t_k)_k` in lexicographic order, plus the origin as base
/// when `q` is odd (for even `q` the origin is already a grid point).
pub fn build_cube_space<S: Scalar>(spec: &GridSpec<S>, norm: &PolyhedralNorm<S>) -> Result<Space<S>> {
    spec.validate()?;
    if norm.dim() != spec.d {
        return Err(Error::Malformed(format!("norm has dimension {}, grid has {}", norm.dim(), spec.d)));
    }
    if !norm.is_sign_invariant()? {
        return Err(Error::InvalidNorm("norm is not invariant under coordinate sign changes".into()));
    }
    let mut points: Vec<Vec<S>> = spec
        .tuples()
        .map(|t| t.iter().zip(&spec.alpha).map(|(&j, a)| spec.level(j) * a.clone()).collect())
        .collect();
    let base = if spec.q % 2 == 0 {
        spec.tuple_index(&vec![spec.q / 2; spec.d])
    } else {
        points.push(vec![S::zero(); spec.d]);
        points.len() - 1
    };
    Ok(Arc::new(PointedMetricSpace::induced(norm, points, base, None)?))
}

/// Average over level tuples on the other axes of
/// `δ(½α_n e_n + S_n(t)) - δ(-½α_n e_n + S_n(t))`, divided by `α_n`.
pub fn phi_n<S: Scalar>(n: usize, spec: &GridSpec<S>, space: &Space<S>) -> Result<FreeVector<S>> {
    if n >= spec.d {
        return Err(Error::Malformed(format!("axis {n} out of range for d = {}", spec.d)));
    }
    let others = spec.grid_size().expect("validated") / (spec.q + 1);
    let weight = S::one() / (S::from_i64(others as i64) * spec.alpha[n].clone());
    let mut entries = Vec::with_capacity(2 * others);
    for t in spec.tuples().filter(|t| t[n] == 0) {
        let mut hi = t.clone();
        hi[n] = spec.q;
        entries.push((spec.tuple_index(&hi), weight.clone()));
        entries.push((spec.tuple_index(&t), -weight.clone()));
    }
    Ok(FreeVector::from_coeffs(space, entries))
}

/// Permutation of the points induced by the diagonal sign matrix `signs`.
fn sign_perm<S: Scalar>(spec: &GridSpec<S>, space: &Space<S>, signs: &[bool]) -> Vec<usize> {
    let mut perm: Vec<usize> = spec
        .tuples()
        .map(|t| {
            let flipped: Vec<usize> =
                t.iter().zip(signs).map(|(&j, &neg)| if neg { spec.q - j } else { j }).collect();
            spec.tuple_index(&flipped)
        })
        .collect();
    if perm.len() < space.len() {
        perm.push(space.base());
    }
    perm
}

#[derive(Debug, Clone)]
pub struct CubeOptions<S: Scalar> {
    pub tol_grid: S,
    pub compute_op_norm: bool,
}

impl<S: Scalar> Default for CubeOptions<S> {
    fn default() -> Self {
        CubeOptions { tol_grid: S::from_ratio(1, 10), compute_op_norm: true }
    }
}

#[derive(Debug, Clone)]
pub struct CubeLifting<S: Scalar> {
    pub space: Space<S>,
    pub t: LinearMap<S>,
    pub phi: Vec<FreeVector<S>>,
    /// `β(φ_n) = e_n` per axis.
    pub beta_axis: Vec<bool>,
    pub beta_identity: bool,
    pub signs_checked: usize,
    pub signs_enumerated: bool,
    pub max_sign_deviation: S,
    pub phi_norms: Vec<S>,
    /// `1 ≤ ‖φ_n‖ ≤ 1 + tol_grid` for every axis.
    pub phi_norms_within: bool,
    pub op_norm: Option<S>,
    pub op_norm_within: Option<bool>,
}

impl<S: Scalar> CubeLifting<S> {
    pub fn all_pass(&self) -> bool {
        self.beta_identity
            && self.max_sign_deviation.is_zero_tol()
            && self.phi_norms_within
            && self.op_norm_within != Some(false)
    }
}

/// `T(e_n) = φ_n` with its lifting, sign-equivariance and norm checks.
pub fn cube_lifting<S: Scalar>(
    spec: &GridSpec<S>,
    norm: &Arc<PolyhedralNorm<S>>,
    options: &CubeOptions<S>,
) -> Result<CubeLifting<S>> {
    let space = build_cube_space(spec, norm)?;
    let phi: Vec<FreeVector<S>> = (0..spec.d).map(|n| phi_n(n, spec, &space)).collect::<Result<_>>()?;
    let cols: Vec<Vec<S>> = phi.iter().map(FreeVector::to_dense).collect();
    let t = LinearMap::new(
        SpaceDescriptor::Normed(norm.clone()),
        SpaceDescriptor::Free(space.clone()),
        Matrix::from_columns(space.free_dim(), &cols).expect("dense"),
    )?;
    let beta = barycenter(&space, norm)?;
    let beta_axis: Vec<bool> = (0..spec.d)
        .map(|n| {
            let image = beta.apply(&cols[n]).expect("shape");
            image.iter().enumerate().all(|(i, v)| v.approx_eq(&if i == n { S::one() } else { S::zero() }))
        })
        .collect();
    let beta_identity = beta_axis.iter().all(|&b| b);

    let signs: Vec<Vec<bool>> = if spec.d <= MAX_ENUMERATED_SIGN_DIM {
        (0..1usize << spec.d).map(|mask| (0..spec.d).map(|i| mask >> i & 1 == 1).collect()).collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5157);
        (0..SIGN_SAMPLE_SIZE).map(|_| (0..spec.d).map(|_| rng.gen_bool(0.5)).collect()).collect()
    };
    let deviations: Vec<S> = signs
        .par_iter()
        .map(|g| {
            let perm = sign_perm(spec, &space, g);
            let mut worst = S::zero();
            for (n, f) in phi.iter().enumerate() {
                let moved = FreeVector::from_coeffs(&space, f.iter().map(|(p, c)| (perm[p], c.clone())));
                let expected = if g[n] { f.scale(&-S::one()) } else { f.clone() };
                let diff = moved.sub(&expected).expect("same space");
                for (_, c) in diff.iter() {
                    worst = S::max_of(worst, c.abs());
                }
            }
            worst
        })
        .collect();
    let max_sign_deviation = deviations.into_iter().fold(S::zero(), S::max_of);

    let phi_norms: Vec<S> = phi.par_iter().map(|f| free_norm(f).map(|r| r.value)).collect::<Result<_>>()?;
    let upper = S::one() + options.tol_grid.clone();
    let phi_norms_within = phi_norms.iter().all(|v| v.ge_tol(&S::one()) && v.le_tol(&upper));
    let op = if options.compute_op_norm { Some(op_norm(&t)?.value) } else { None };
    let op_norm_within = op.as_ref().map(|v| v.le_tol(&upper));
    Ok(CubeLifting {
        space,
        t,
        phi,
        beta_axis,
        beta_identity,
        signs_checked: signs.len(),
        signs_enumerated: spec.d <= MAX_ENUMERATED_SIGN_DIM,
        max_sign_deviation,
        phi_norms,
        phi_norms_within,
        op_norm: op,
        op_norm_within,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use lipfree_lp::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    #[test]
    fn one_dimensional_grid() {
        let spec = GridSpec::<Rational>::new(1, 1);
        let n = Arc::new(PolyhedralNorm::l1(1));
        let s = build_cube_space(&spec, &n).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.base(), 2);
        let phi = phi_n(0, &spec, &s).unwrap();
        assert_eq!(phi, crate::free_space::molecule(&s, 1, 0).unwrap());
        let r = cube_lifting(&spec, &n, &CubeOptions::default()).unwrap();
        assert!(r.all_pass());
        assert_eq!(r.op_norm, Some(q(1)));
    }

    #[test]
    fn square_grid_counts() {
        let spec = GridSpec::<Rational>::new(2, 2);
        let s = build_cube_space(&spec, &PolyhedralNorm::linf(2)).unwrap();
        assert_eq!(s.len(), 9);
        assert_eq!(s.coords().unwrap()[s.base()], vec![q(0), q(0)]);
    }

    #[test]
    fn phi_for_coarse_square() {
        let spec = GridSpec::<Rational>::new(2, 1);
        let s = build_cube_space(&spec, &PolyhedralNorm::l1(2)).unwrap();
        let phi = phi_n(0, &spec, &s).unwrap();
        let h = Rational::from_ratio(1, 2);
        let at = |x: Rational, y: Rational| s.locate(&[x, y]).unwrap().unwrap();
        let expected = FreeVector::from_coeffs(
            &s,
            [
                (at(h.clone(), -h.clone()), h.clone()),
                (at(-h.clone(), -h.clone()), -h.clone()),
                (at(h.clone(), h.clone()), h.clone()),
                (at(-h.clone(), h.clone()), -h.clone()),
            ],
        );
        assert_eq!(phi, expected);
    }

    #[test]
    fn unconditionality_is_required() {
        let lopsided = PolyhedralNorm::polytope(vec![
            vec![q(1), q(1)],
            vec![q(-1), q(-1)],
            vec![q(1), q(0)],
            vec![q(-1), q(0)],
            vec![q(0), q(1)],
            vec![q(0), q(-1)],
        ])
        .unwrap();
        assert!(matches!(build_cube_space(&GridSpec::new(2, 1), &lopsided), Err(Error::InvalidNorm(_))));
        let mut big = GridSpec::<Rational>::new(3, 30);
        big.cap = 1000;
        assert!(matches!(build_cube_space(&big, &PolyhedralNorm::l1(3)), Err(Error::Capacity { .. })));
    }

    #[test]
    fn equivariance_on_small_grids() {
        for (d, qq) in [(2, 2), (3, 1)] {
            let spec = GridSpec::<Rational>::new(d, qq);
            let n = Arc::new(PolyhedralNorm::linf(d));
            let r = cube_lifting(&spec, &n, &CubeOptions { compute_op_norm: false, ..Default::default() }).unwrap();
            assert!(r.beta_identity);
            assert_eq!(r.max_sign_deviation, q(0));
            assert_eq!(r.signs_checked, 1 << d);
            assert!(r.phi_norms.iter().all(|v| *v == q(1)));
        }
    }
}
