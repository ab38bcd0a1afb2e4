//! Discrete complexification: a cyclic rotation group of order `k`
//! generated by `cos(2π/k)·Id + sin(2π/k)·J`, the relation vectors it
//! produces, the averaging projection `Q`, and the complex structure on
//! its range.

use std::sync::Arc;

use lipfree_lp::{solve, Bound, LpProblem, Matrix, Mode, Relation, Scalar, Sense, Status};
use rayon::prelude::*;

use crate::equivariance::{
    average_lifting, basis_lifting, check_equivariant, close_group, induced_free_action, min_norm_lifting,
    FiniteGroupAction, DEFAULT_GROUP_CAP,
};
use crate::error::{Error, Result};
use crate::free_space::{lip_constant, pair, within_gap, FreeVector, LipFunction, Space};
use crate::normed::PolyhedralNorm;
use crate::operators::{barycenter, op_norm, LinearMap, SpaceDescriptor};

#[derive(Debug, Clone)]
pub struct CircleModel<S: Scalar> {
    space: Space<S>,
    norm: Arc<PolyhedralNorm<S>>,
    j: Matrix<S>,
    k: usize,
    cos: Vec<S>,
    sin: Vec<S>,
    rotations: Vec<Matrix<S>>,
    action: FiniteGroupAction<S>,
    /// Group element index of each rotation `R_j`.
    rotation_index: Vec<usize>,
}

/// `cos(2πj/k)` and `sin(2πj/k)`: exact at quarter turns, otherwise a
/// float that exact mode refuses.
fn trig<S: Scalar>(j: usize, k: usize) -> Result<(S, S)> {
    if (4 * j) % k == 0 {
        let quarter = (4 * j / k) % 4;
        let (c, s) = [(1, 0), (0, 1), (-1, 0), (0, -1)][quarter];
        return Ok((S::from_i64(c), S::from_i64(s)));
    }
    let theta = 2.0 * std::f64::consts::PI * j as f64 / k as f64;
    let mode_err = |_| {
        Error::Mode(format!("rotation by 2π·{j}/{k} has irrational entries; use float mode for k > 4"))
    };
    Ok((S::from_real(theta.cos()).map_err(mode_err)?, S::from_real(theta.sin()).map_err(mode_err)?))
}

impl<S: Scalar> CircleModel<S> {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn j(&self) -> &Matrix<S> {
        &self.j
    }

    pub fn space(&self) -> &Space<S> {
        &self.space
    }

    pub fn norm(&self) -> &Arc<PolyhedralNorm<S>> {
        &self.norm
    }

    pub fn action(&self) -> &FiniteGroupAction<S> {
        &self.action
    }

    pub fn rotation(&self, j: usize) -> &Matrix<S> {
        &self.rotations[j % self.k]
    }

    pub fn cos(&self, j: usize) -> &S {
        &self.cos[j % self.k]
    }

    pub fn sin(&self, j: usize) -> &S {
        &self.sin[j % self.k]
    }

    /// Index of `R_j m`.
    pub fn rotate_point(&self, j: usize, m: usize) -> usize {
        self.action.perm(self.rotation_index[j % self.k])[m]
    }

    /// Induced free-space map of `R_j`.
    pub fn rotation_tilde(&self, j: usize) -> LinearMap<S> {
        induced_free_action(&self.action, self.rotation_index[j % self.k])
    }
}

/// Validates `J² = -Id`, `4 | k`, and invariance of `M` under the rotations.
pub fn build_circle_model<S: Scalar>(
    space: &Space<S>,
    norm: &Arc<PolyhedralNorm<S>>,
    j: Matrix<S>,
    k: usize,
) -> Result<CircleModel<S>> {
    let d = norm.dim();
    if k < 4 || k % 4 != 0 {
        return Err(Error::Malformed(format!("circle order k = {k} must be a positive multiple of 4")));
    }
    if j.shape() != (d, d) {
        return Err(Error::Malformed(format!("J must be {d}x{d}")));
    }
    if !j.mul(&j).expect("square").approx_eq(&Matrix::identity(d).neg()) {
        return Err(Error::Action("J does not square to -Id".into()));
    }
    let mut cos = Vec::with_capacity(k);
    let mut sin = Vec::with_capacity(k);
    let mut rotations = Vec::with_capacity(k);
    for step in 0..k {
        let (c, s) = trig::<S>(step, k)?;
        rotations.push(Matrix::identity(d).scale(&c).add(&j.scale(&s)).expect("square"));
        cos.push(c);
        sin.push(s);
    }
    let action = close_group(&[rotations[1 % k].clone()], space, norm, DEFAULT_GROUP_CAP.max(k))?;
    if action.order() != k {
        return Err(Error::Consistency(format!("rotation group has order {}, expected {k}", action.order())));
    }
    let rotation_index = rotations
        .iter()
        .map(|r| {
            action
                .elements()
                .iter()
                .position(|g| g.approx_eq(r))
                .ok_or_else(|| Error::Consistency("rotation missing from the generated group".into()))
        })
        .collect::<Result<Vec<usize>>>()?;
    Ok(CircleModel { space: space.clone(), norm: norm.clone(), j, k, cos, sin, rotations, action, rotation_index })
}

/// `δ(R_j m) - cos θ_j δ(m) - sin θ_j δ(Jm)` over non-base `m` and all `j`,
/// zero vectors and duplicates removed.
pub fn y_generators<S: Scalar>(model: &CircleModel<S>) -> Vec<FreeVector<S>> {
    let space = &model.space;
    let quarter = model.k / 4;
    let mut out: Vec<FreeVector<S>> = Vec::new();
    for m in space.non_base_points() {
        for step in 0..model.k {
            let v = FreeVector::from_coeffs(
                space,
                [
                    (model.rotate_point(step, m), S::one()),
                    (m, -model.cos[step].clone()),
                    (model.rotate_point(quarter, m), -model.sin[step].clone()),
                ],
            );
            if !v.is_zero() && !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}

fn columns_of<S: Scalar>(nf: usize, vs: &[FreeVector<S>]) -> Matrix<S> {
    Matrix::from_columns(nf, &vs.iter().map(FreeVector::to_dense).collect::<Vec<_>>()).expect("dense")
}

#[derive(Debug, Clone)]
pub struct QReport<S: Scalar> {
    pub q: LinearMap<S>,
    pub idempotent: bool,
    pub qp_zero: bool,
    pub range_p_in_span_y: bool,
    pub y_in_ker_q: bool,
    pub ker_q_is_span_y: bool,
    pub beta_kills_y: bool,
    pub rank_q: usize,
    pub rank_p: usize,
    pub rank_sum_ok: bool,
    pub op_norm: S,
    /// `‖Q‖ ≤ √2`, decided by `‖Q‖² ≤ 2` (exact) or with tolerance (float).
    pub op_norm_ok: bool,
    /// Largest entry of `Q² - Q`.
    pub idempotence_residual: S,
}

impl<S: Scalar> QReport<S> {
    pub fn all_pass(&self) -> bool {
        self.idempotent
            && self.qp_zero
            && self.range_p_in_span_y
            && self.y_in_ker_q
            && self.ker_q_is_span_y
            && self.beta_kills_y
            && self.rank_sum_ok
            && self.op_norm_ok
    }
}

/// `Q δ(m) = (1/k) Σ_j [cos θ_j δ(R_{-j} m) + sin θ_j δ(J R_{-j} m)]`.
pub fn q_matrix<S: Scalar>(model: &CircleModel<S>) -> LinearMap<S> {
    let space = &model.space;
    let nf = space.free_dim();
    let k = model.k;
    let quarter = k / 4;
    let inv_k = S::one() / S::from_i64(k as i64);
    let mut q: Matrix<S> = Matrix::zeros(nf, nf);
    for m in space.non_base_points() {
        let col = space.free_index(m).expect("non-base");
        for step in 0..k {
            let back = (k - step) % k;
            let terms = [
                (model.rotate_point(back, m), &model.cos[step]),
                (model.rotate_point((back + quarter) % k, m), &model.sin[step]),
            ];
            for (p, w) in terms {
                if let Some(row) = space.free_index(p) {
                    let cur = q[(row, col)].clone();
                    q[(row, col)] = cur + w.clone() * inv_k.clone();
                }
            }
        }
    }
    LinearMap { domain: SpaceDescriptor::Free(space.clone()), codomain: SpaceDescriptor::Free(space.clone()), matrix: q }
}

fn leq_sqrt2<S: Scalar>(v: &S) -> bool {
    match S::MODE {
        Mode::Exact => (v.clone() * v.clone()) <= S::from_i64(2),
        Mode::Float => v.to_f64() <= std::f64::consts::SQRT_2 + lipfree_lp::float_tolerance() * 2.5,
    }
}

/// Builds `Q` and checks every identity it should satisfy.
pub fn q_operator<S: Scalar>(model: &CircleModel<S>) -> Result<QReport<S>> {
    let space = &model.space;
    let nf = space.free_dim();
    let q = q_matrix(model);
    let id = Matrix::identity(nf);
    let p = id.sub(&q.matrix).expect("square");
    let q2 = q.matrix.mul(&q.matrix).expect("square");
    let idempotence_residual = q2.max_abs_diff(&q.matrix).expect("square");
    let idempotent = q2.approx_eq(&q.matrix);
    let qp_zero = q.matrix.mul(&p).expect("square").is_zero_tol();
    let gens = y_generators(model);
    let y = columns_of(nf, &gens);
    let rank_y = y.rank();
    let range_p_in_span_y = y.hcat(&p).expect("rows").rank() == rank_y;
    let y_in_ker_q = gens.is_empty() || q.matrix.mul(&y).expect("shape").is_zero_tol();
    let rank_q = q.matrix.rank();
    let rank_p = p.rank();
    let ker_q_is_span_y = y_in_ker_q && rank_y == nf - rank_q;
    let beta_kills_y = match barycenter(space, &model.norm) {
        Ok(beta) => gens.is_empty() || beta.matrix.mul(&y).expect("shape").is_zero_tol(),
        Err(_) => false,
    };
    let value = op_norm(&q)?.value;
    Ok(QReport {
        op_norm_ok: leq_sqrt2(&value),
        op_norm: value,
        q,
        idempotent,
        qp_zero,
        range_p_in_span_y,
        y_in_ker_q,
        ker_q_is_span_y,
        beta_kills_y,
        rank_q,
        rank_p,
        rank_sum_ok: rank_q + rank_p == nf,
        idempotence_residual,
    })
}

#[derive(Debug, Clone)]
pub struct QuotientNorm<S: Scalar> {
    pub value: S,
    /// 1-Lipschitz function annihilating every relation vector.
    pub witness_f: LipFunction<S>,
    /// `|⟨f, μ⟩ - value|`.
    pub gap: S,
    /// Witness is 1-Lipschitz, annihilates `Y`, and closes the gap.
    pub certified: bool,
}

/// Norm of `μ + span Y` in `𝓕(M)/span Y`: the flow LP on ordered pairs
/// with free multiples of a basis of `Y` added to the node balance.
pub fn quotient_norm<S: Scalar>(mu: &FreeVector<S>, y: &[FreeVector<S>]) -> Result<QuotientNorm<S>> {
    let space = mu.space().clone();
    let n = space.len();
    let nf = space.free_dim();
    let basis: Vec<Vec<S>> = if y.is_empty() {
        Vec::new()
    } else {
        let ym = columns_of(nf, y);
        ym.independent_columns().into_iter().map(|c| ym.column(c)).collect()
    };
    let arcs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b))).collect();
    let na = arcs.len();
    let mut obj: Vec<S> = arcs.iter().map(|&(a, b)| space.dist(a, b).clone()).collect();
    obj.extend(std::iter::repeat_with(S::zero).take(basis.len()));
    let mut lp = LpProblem::new(Sense::Minimize, obj);
    for c in 0..basis.len() {
        lp.set_bound(na + c, Bound::free());
    }
    for x in space.non_base_points() {
        let k = space.free_index(x).expect("non-base");
        let mut row: Vec<S> = arcs
            .iter()
            .map(|&(a, b)| {
                if a == x {
                    S::one()
                } else if b == x {
                    -S::one()
                } else {
                    S::zero()
                }
            })
            .collect();
        row.extend(basis.iter().map(|b| -b[k].clone()));
        lp.add_constraint(row, Relation::Eq, mu.coeff(x));
    }
    let sol = solve(&lp)?;
    if sol.status != Status::Optimal {
        return Err(Error::Consistency(format!("quotient LP reported {:?}", sol.status)));
    }
    let witness_f = LipFunction::from_free_coords(&space, &sol.dual)?;
    let dual_value = pair(&witness_f, mu)?;
    let gap = (dual_value - sol.objective_value.clone()).abs();
    let annihilates = y.iter().map(|v| pair(&witness_f, v)).collect::<Result<Vec<S>>>()?.iter().all(|p| p.is_zero_tol());
    let certified = annihilates && lip_constant(&witness_f).le_tol(&S::one()) && within_gap(&gap, &sol.objective_value);
    Ok(QuotientNorm { value: sol.objective_value, witness_f, gap, certified })
}

#[derive(Debug, Clone)]
pub struct PairDeviation<S: Scalar> {
    pub a: usize,
    pub b: usize,
    pub quotient: S,
    pub distance: S,
    pub deviation: S,
}

#[derive(Debug, Clone)]
pub struct DeltaCReport<S: Scalar> {
    pub applicable: bool,
    pub status: String,
    pub pairs: Vec<PairDeviation<S>>,
    pub max_deviation: S,
    pub pass: bool,
}

/// Compares `‖δ(m) - δ(n) + Y‖` with `d(m, n)` over all pairs.
pub fn delta_c_check<S: Scalar>(model: &CircleModel<S>) -> Result<DeltaCReport<S>> {
    let space = &model.space;
    let skipped = |status: &str| DeltaCReport {
        applicable: false,
        status: status.to_string(),
        pairs: Vec::new(),
        max_deviation: S::zero(),
        pass: true,
    };
    match space.norm() {
        Some(n) if n == model.norm.as_ref() => {}
        _ => return Ok(skipped("skipped: metric is not induced by the norm of X")),
    }
    if !model.action.is_isometric()? {
        return Ok(skipped("skipped: norm is not invariant under the rotation group"));
    }
    let y = y_generators(model);
    let n = space.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
    let results = pairs
        .par_iter()
        .map(|&(a, b)| {
            let mu = crate::free_space::molecule(space, a, b)?;
            let qn = quotient_norm(&mu, &y)?;
            let distance = space.dist(a, b).clone();
            let deviation = (qn.value.clone() - distance.clone()).abs();
            Ok(PairDeviation { a, b, quotient: qn.value, distance, deviation })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_deviation = results.iter().fold(S::zero(), |acc, p| S::max_of(acc, p.deviation.clone()));
    let pass = results.iter().all(|p| within_gap(&p.deviation, &p.distance));
    Ok(DeltaCReport { applicable: true, status: "checked".into(), pairs: results, max_deviation, pass })
}

#[derive(Debug, Clone)]
pub struct ComplexStructure<S: Scalar> {
    /// `Q J̃ Q`, acting as the complex structure on `Z = range Q`.
    pub j_f: LinearMap<S>,
    /// Basis of `Z`, as columns.
    pub z_basis: Matrix<S>,
    pub well_defined: bool,
    pub squares_to_minus_id: bool,
    pub commutes_with_rotation: bool,
}

impl<S: Scalar> ComplexStructure<S> {
    pub fn all_pass(&self) -> bool {
        self.well_defined && self.squares_to_minus_id && self.commutes_with_rotation
    }
}

/// `J_F(Qδ(m)) = Qδ(Jm)`, checked for consistency on `Z`.
pub fn complex_structure<S: Scalar>(model: &CircleModel<S>, q: &LinearMap<S>) -> Result<ComplexStructure<S>> {
    let nf = model.space.free_dim();
    let qm = &q.matrix;
    let id = Matrix::identity(nf);
    let j_tilde = model.rotation_tilde(model.k / 4).matrix;
    let qj = qm.mul(&j_tilde).expect("square");
    let well_defined = qj.mul(&id.sub(qm).expect("square")).expect("square").is_zero_tol();
    let j_f = qj.mul(qm).expect("square");
    let z_cols = qm.independent_columns();
    let z_basis = qm.select_columns(&z_cols);
    let jj = j_f.mul(&j_f).expect("square").mul(&z_basis).expect("shape");
    let squares_to_minus_id = jj.approx_eq(&z_basis.neg());
    let r1 = model.rotation_tilde(1).matrix;
    let r1_z = r1.mul(&z_basis).expect("shape");
    let stays_in_z = z_basis.hcat(&r1_z).expect("rows").rank() == z_basis.cols();
    let lhs = j_f.mul(&r1_z).expect("shape");
    let rhs = r1.mul(&j_f).expect("square").mul(&z_basis).expect("shape");
    let commutes_with_rotation = stays_in_z && lhs.approx_eq(&rhs);
    Ok(ComplexStructure {
        j_f: q.with_matrix(j_f)?,
        z_basis,
        well_defined,
        squares_to_minus_id,
        commutes_with_rotation,
    })
}

#[derive(Debug, Clone)]
pub struct ExtremeValue<S: Scalar> {
    pub point: Vec<S>,
    /// Free norm of `T_C v` inside `𝓕(M)`.
    pub z_norm: S,
    /// Norm of the coset `T_C v + span Y`.
    pub quotient_norm: S,
}

#[derive(Debug, Clone)]
pub struct ComplexLifting<S: Scalar> {
    /// Averaged lifting `T: X → 𝓕(M)`.
    pub t: LinearMap<S>,
    /// `Q ∘ T`.
    pub t_c: LinearMap<S>,
    pub op_norm_t: S,
    pub beta_identity: bool,
    pub complex_linear: bool,
    pub equivariant_deviation: S,
    pub projection_idempotent: bool,
    pub extreme_values: Vec<ExtremeValue<S>>,
    /// Minimum norm of an equivariant lifting, when computed.
    pub min_equivariant_norm: Option<S>,
    /// `Some(true)` when a norm-one equivariant lifting exists and its
    /// image under `Q` has quotient norm 1 at every extreme point.
    pub one_complemented: Option<bool>,
}

impl<S: Scalar> ComplexLifting<S> {
    pub fn all_pass(&self) -> bool {
        self.beta_identity
            && self.complex_linear
            && self.equivariant_deviation.is_zero_tol()
            && self.projection_idempotent
            && self.one_complemented != Some(false)
    }
}

/// `T_C = Q ∘ Ave(T₀)` with its ℂ-linearity and lifting checks.
pub fn complex_lifting<S: Scalar>(
    model: &CircleModel<S>,
    q: &LinearMap<S>,
    j_f: &LinearMap<S>,
    with_min_norm: bool,
) -> Result<ComplexLifting<S>> {
    let space = &model.space;
    let norm = &model.norm;
    let beta = barycenter(space, norm)?;
    let t0 = basis_lifting(space, norm)?;
    let t = average_lifting(&t0, &model.action)?;
    let t_c = q.compose(&t)?;
    let d = norm.dim();
    let beta_identity = beta.matrix.mul(&t_c.matrix).expect("shape").approx_eq(&Matrix::identity(d));
    let complex_linear = t_c.matrix.mul(&model.j).expect("shape").approx_eq(&j_f.matrix.mul(&t_c.matrix).expect("shape"));
    let equivariant_deviation = check_equivariant(&t_c, &model.action)?.max_deviation;
    let proj = t_c.matrix.mul(&beta.matrix).expect("shape");
    let projection_idempotent = proj.mul(&proj).expect("square").approx_eq(&proj);
    let op_norm_t = op_norm(&t)?.value;
    let y = y_generators(model);
    let extreme_values = norm
        .extreme_points_mod_sign()?
        .par_iter()
        .map(|v| {
            let image = FreeVector::from_dense(space, &t_c.apply(v)?)?;
            Ok(ExtremeValue {
                point: v.clone(),
                z_norm: crate::free_space::free_norm(&image)?.value,
                quotient_norm: quotient_norm(&image, &y)?.value,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let (min_equivariant_norm, one_complemented) = if with_min_norm {
        let best = min_norm_lifting(space, norm, Some(&model.action), None)?;
        let one = if best.value.approx_eq(&S::one()) {
            let tc = q.compose(&best.lifting)?;
            let mut ok = beta.matrix.mul(&tc.matrix).expect("shape").approx_eq(&Matrix::identity(d));
            for v in norm.extreme_points_mod_sign()? {
                let image = FreeVector::from_dense(space, &tc.apply(&v)?)?;
                ok &= quotient_norm(&image, &y)?.value.approx_eq(&S::one());
            }
            Some(ok)
        } else {
            None
        };
        (Some(best.value), one)
    } else {
        (None, None)
    };

    Ok(ComplexLifting {
        t,
        t_c,
        op_norm_t,
        beta_identity,
        complex_linear,
        equivariant_deviation,
        projection_idempotent,
        extreme_values,
        min_equivariant_norm,
        one_complemented,
    })
}
