//! Finite group actions on a point set in a normed space, the induced
//! permutation action on the free space, and equivariant liftings.

use std::collections::HashMap;
use std::sync::Arc;

use lipfree_lp::{solve, Bound, LpProblem, Matrix, Relation, Scalar, Sense, Status};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::free_space::Space;
use crate::normed::PolyhedralNorm;
use crate::operators::{barycenter, check_lifting, op_norm, LinearMap, SpaceDescriptor};

pub const DEFAULT_GROUP_CAP: usize = 10_000;

/// A finite matrix group acting on `X` that maps the point set `M` onto
/// itself. Element 0 is the identity.
#[derive(Debug, Clone)]
pub struct FiniteGroupAction<S: Scalar> {
    space: Space<S>,
    norm: Arc<PolyhedralNorm<S>>,
    elements: Vec<Matrix<S>>,
    perms: Vec<Vec<usize>>,
    cayley: Vec<Vec<usize>>,
    inverses: Vec<usize>,
    generators: Vec<usize>,
}

impl<S: Scalar> FiniteGroupAction<S> {
    pub fn trivial(space: &Space<S>, norm: &Arc<PolyhedralNorm<S>>) -> Result<Self> {
        close_group(&[], space, norm, 1)
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn space(&self) -> &Space<S> {
        &self.space
    }

    pub fn norm(&self) -> &Arc<PolyhedralNorm<S>> {
        &self.norm
    }

    pub fn element(&self, g: usize) -> &Matrix<S> {
        &self.elements[g]
    }

    pub fn elements(&self) -> &[Matrix<S>] {
        &self.elements
    }

    /// `perm(g)[x]` is the index of `g·x`.
    pub fn perm(&self, g: usize) -> &[usize] {
        &self.perms[g]
    }

    /// `cayley()[a][b]` is the index of `g_a g_b`.
    pub fn cayley(&self) -> &[Vec<usize>] {
        &self.cayley
    }

    pub fn inverse(&self, g: usize) -> usize {
        self.inverses[g]
    }

    /// Indices of the elements the group was generated from.
    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    /// `max_g ‖g‖` on `X`.
    pub fn max_operator_norm(&self) -> Result<S> {
        let norms: Vec<S> =
            self.elements.par_iter().map(|g| self.norm.operator_norm(g)).collect::<Result<Vec<S>>>()?;
        Ok(norms.into_iter().fold(S::zero(), S::max_of))
    }

    /// True when every element is an isometry of `X`.
    pub fn is_isometric(&self) -> Result<bool> {
        Ok(self.max_operator_norm()?.le_tol(&S::one()))
    }
}

fn point_perm<S: Scalar>(g: &Matrix<S>, space: &Space<S>) -> Result<Vec<usize>> {
    let coords = space.coords().ok_or_else(|| Error::Precondition("group actions need point coordinates".into()))?;
    let mut perm = Vec::with_capacity(coords.len());
    let mut hit = vec![false; coords.len()];
    for (i, x) in coords.iter().enumerate() {
        let gx = g.mul_vec(x).ok_or_else(|| Error::Malformed("generator shape does not match the points".into()))?;
        let j = space.locate(&gx)?.ok_or_else(|| {
            Error::Action(format!(
                "image of `{}` is ({}), which is not in M",
                space.label(i),
                crate::normed::fmt_vec(&gx)
            ))
        })?;
        if hit[j] {
            return Err(Error::Action("generator is not injective on M".into()));
        }
        hit[j] = true;
        perm.push(j);
    }
    if perm[space.base()] != space.base() {
        return Err(Error::Action("generator moves the base point".into()));
    }
    Ok(perm)
}

/// Generates the group from `generators`, failing past `cap` elements.
pub fn close_group<S: Scalar>(
    generators: &[Matrix<S>],
    space: &Space<S>,
    norm: &Arc<PolyhedralNorm<S>>,
    cap: usize,
) -> Result<FiniteGroupAction<S>> {
    let d = norm.dim();
    let mut gen_perms = Vec::with_capacity(generators.len());
    for g in generators {
        if g.shape() != (d, d) {
            return Err(Error::Malformed(format!("generator is {}x{}, expected {d}x{d}", g.rows(), g.cols())));
        }
        if g.inverse().is_none() {
            return Err(Error::Action("generator is not invertible".into()));
        }
        gen_perms.push(point_perm(g, space)?);
    }

    let mut elements = vec![Matrix::identity(d)];
    let mut perms = vec![(0..space.len()).collect::<Vec<usize>>()];
    let mut by_perm: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    by_perm.insert(perms[0].clone(), vec![0]);
    let find = |elements: &[Matrix<S>], by_perm: &HashMap<Vec<usize>, Vec<usize>>, m: &Matrix<S>, p: &Vec<usize>| {
        by_perm.get(p).and_then(|c| c.iter().copied().find(|&i| elements[i].approx_eq(m)))
    };
    let mut generator_idx = Vec::with_capacity(generators.len());
    let mut frontier = 0;
    while frontier < elements.len() {
        for (g, gp) in generators.iter().zip(&gen_perms) {
            let m = g.mul(&elements[frontier]).expect("square");
            let p: Vec<usize> = perms[frontier].iter().map(|&x| gp[x]).collect();
            if find(&elements, &by_perm, &m, &p).is_none() {
                if elements.len() >= cap {
                    return Err(Error::Capacity { what: "group order", needed: elements.len() + 1, cap });
                }
                by_perm.entry(p.clone()).or_default().push(elements.len());
                elements.push(m);
                perms.push(p);
            }
        }
        frontier += 1;
    }
    for (g, gp) in generators.iter().zip(&gen_perms) {
        generator_idx.push(find(&elements, &by_perm, g, gp).expect("generator is in the closure"));
    }

    let n = elements.len();
    let cayley: Vec<Vec<usize>> = (0..n)
        .into_par_iter()
        .map(|a| {
            (0..n)
                .map(|b| {
                    let p: Vec<usize> = perms[b].iter().map(|&x| perms[a][x]).collect();
                    let cands = &by_perm[&p];
                    if cands.len() == 1 {
                        cands[0]
                    } else {
                        let m = elements[a].mul(&elements[b]).expect("square");
                        cands.iter().copied().find(|&i| elements[i].approx_eq(&m)).expect("closed")
                    }
                })
                .collect()
        })
        .collect();
    let inverses = (0..n).map(|a| cayley[a].iter().position(|&c| c == 0).expect("group")).collect();
    Ok(FiniteGroupAction {
        space: space.clone(),
        norm: norm.clone(),
        elements,
        perms,
        cayley,
        inverses,
        generators: generator_idx,
    })
}

/// Permutation matrix `g̃` with `g̃ δ(x) = δ(g x)`.
pub fn induced_free_action<S: Scalar>(group: &FiniteGroupAction<S>, g: usize) -> LinearMap<S> {
    let m = &group.space;
    let mut a = Matrix::zeros(m.free_dim(), m.free_dim());
    for x in m.non_base_points() {
        a[(m.free_index(group.perms[g][x]).expect("base fixed"), m.free_index(x).expect("non-base"))] = S::one();
    }
    LinearMap { domain: SpaceDescriptor::Free(m.clone()), codomain: SpaceDescriptor::Free(m.clone()), matrix: a }
}

/// `g̃ A` computed by permuting rows.
fn permute_rows<S: Scalar>(group: &FiniteGroupAction<S>, g: usize, a: &Matrix<S>) -> Matrix<S> {
    let m = &group.space;
    let mut out = Matrix::zeros(a.rows(), a.cols());
    for x in m.non_base_points() {
        let src = m.free_index(x).expect("non-base");
        let dst = m.free_index(group.perms[g][x]).expect("base fixed");
        for c in 0..a.cols() {
            out[(dst, c)] = a[(src, c)].clone();
        }
    }
    out
}

/// `T₀(x) = Σ cᵢ δ(bᵢ)` where `b` is the first basis of `X` found among the
/// non-base points in label order.
pub fn basis_lifting<S: Scalar>(space: &Space<S>, norm: &Arc<PolyhedralNorm<S>>) -> Result<LinearMap<S>> {
    let beta = barycenter(space, norm)?;
    let d = norm.dim();
    let picked = beta.matrix.independent_columns();
    if picked.len() < d {
        return Err(Error::Span(format!("points of M span only a {}-dimensional subspace of X", picked.len())));
    }
    let b = beta.matrix.select_columns(&picked);
    let b_inv = b.inverse().expect("basis");
    let mut t = Matrix::zeros(space.free_dim(), d);
    for (i, &col) in picked.iter().enumerate() {
        for j in 0..d {
            t[(col, j)] = b_inv[(i, j)].clone();
        }
    }
    LinearMap::new(SpaceDescriptor::Normed(norm.clone()), SpaceDescriptor::Free(space.clone()), t)
}

/// `(1/|G|) Σ_g g̃ T₀ g⁻¹`.
pub fn average_lifting<S: Scalar>(t0: &LinearMap<S>, group: &FiniteGroupAction<S>) -> Result<LinearMap<S>> {
    let beta = barycenter(&group.space, &group.norm)?;
    check_lifting(t0, &beta)?;
    Ok(average_over(t0, group))
}

/// Group average of any map `X → 𝓕(M)`.
pub fn average_over<S: Scalar>(t: &LinearMap<S>, group: &FiniteGroupAction<S>) -> LinearMap<S> {
    let terms: Vec<Matrix<S>> = (0..group.order())
        .into_par_iter()
        .map(|g| {
            let tg = t.matrix.mul(&group.elements[group.inverses[g]]).expect("shape");
            permute_rows(group, g, &tg)
        })
        .collect();
    let mut sum = Matrix::zeros(t.matrix.rows(), t.matrix.cols());
    for m in &terms {
        sum = sum.add(m).expect("shape");
    }
    let scale = S::one() / S::from_i64(group.order() as i64);
    LinearMap { domain: t.domain.clone(), codomain: t.codomain.clone(), matrix: sum.scale(&scale) }
}

#[derive(Debug, Clone)]
pub struct Deviation<S: Scalar> {
    pub max_deviation: S,
    /// Element attaining the maximum.
    pub witness: usize,
}

/// `max_g max_entries |g̃T - Tg|`.
pub fn check_equivariant<S: Scalar>(t: &LinearMap<S>, group: &FiniteGroupAction<S>) -> Result<Deviation<S>> {
    if t.matrix.shape() != (group.space.free_dim(), group.norm.dim()) {
        return Err(Error::Malformed("map shape does not match the group action".into()));
    }
    let devs: Vec<S> = (0..group.order())
        .into_par_iter()
        .map(|g| {
            let left = permute_rows(group, g, &t.matrix);
            let right = t.matrix.mul(&group.elements[g]).expect("shape");
            left.max_abs_diff(&right).expect("shape")
        })
        .collect();
    let mut best = Deviation { max_deviation: S::zero(), witness: 0 };
    for (g, d) in devs.into_iter().enumerate() {
        if d > best.max_deviation {
            best = Deviation { max_deviation: d, witness: g };
        }
    }
    Ok(best)
}

#[derive(Debug, Clone)]
pub struct MinNormLifting<S: Scalar> {
    pub value: S,
    pub lifting: LinearMap<S>,
    /// Operator norm of `lifting` recomputed from free norms.
    pub recomputed_norm: S,
}

/// One LP for `min ‖T‖` over liftings of `β` (equivariant when a group is
/// given): `T` entries are free variables, `t` bounds every flow cost, and
/// for each extreme point `v` of `B_X` a flow on ordered pairs has node
/// balance `Tv`.
pub fn min_norm_lifting<S: Scalar>(
    space: &Space<S>,
    norm: &Arc<PolyhedralNorm<S>>,
    group: Option<&FiniteGroupAction<S>>,
    bound: Option<&S>,
) -> Result<MinNormLifting<S>> {
    let beta = barycenter(space, norm)?;
    let d = norm.dim();
    let nf = space.free_dim();
    if beta.matrix.rank() < d {
        return Err(Error::Span("M does not span X".into()));
    }
    let ext = norm.extreme_points_mod_sign()?;
    let n = space.len();
    let arcs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b))).collect();

    let t_var = |k: usize, j: usize| k * d + j;
    let t_idx = nf * d;
    let flow_var = |e: usize, a: usize| nf * d + 1 + e * arcs.len() + a;
    let nvars = nf * d + 1 + ext.len() * arcs.len();

    let mut obj = vec![S::zero(); nvars];
    obj[t_idx] = S::one();
    let mut lp = LpProblem::new(Sense::Minimize, obj);
    for k in 0..nf * d {
        lp.set_bound(k, Bound::free());
    }
    if let Some(c) = bound {
        lp.set_bound(t_idx, Bound::between(S::zero(), c.clone()));
    }

    // βT = Id.
    for i in 0..d {
        for j in 0..d {
            let mut row = vec![S::zero(); nvars];
            for k in 0..nf {
                row[t_var(k, j)] = beta.matrix[(i, k)].clone();
            }
            lp.add_constraint(row, Relation::Eq, if i == j { S::one() } else { S::zero() });
        }
    }
    // g̃T = Tg for generators.
    if let Some(group) = group {
        for &g in &group.generators {
            let gm = &group.elements[g];
            let tilde = induced_free_action(group, g).matrix;
            for r in 0..nf {
                for j in 0..d {
                    let mut row = vec![S::zero(); nvars];
                    for k in 0..nf {
                        row[t_var(k, j)] = row[t_var(k, j)].clone() + tilde[(r, k)].clone();
                    }
                    for l in 0..d {
                        row[t_var(r, l)] = row[t_var(r, l)].clone() - gm[(l, j)].clone();
                    }
                    if row.iter().any(|c| !c.is_zero()) {
                        lp.add_constraint(row, Relation::Eq, S::zero());
                    }
                }
            }
        }
    }
    // Flow balance and cost per extreme point.
    for (e, v) in ext.iter().enumerate() {
        for x in space.non_base_points() {
            let k = space.free_index(x).expect("non-base");
            let mut row = vec![S::zero(); nvars];
            for (a, &(from, to)) in arcs.iter().enumerate() {
                if from == x {
                    row[flow_var(e, a)] = S::one();
                } else if to == x {
                    row[flow_var(e, a)] = -S::one();
                }
            }
            for (j, vj) in v.iter().enumerate() {
                row[t_var(k, j)] = -vj.clone();
            }
            lp.add_constraint(row, Relation::Eq, S::zero());
        }
        let mut row = vec![S::zero(); nvars];
        for (a, &(from, to)) in arcs.iter().enumerate() {
            row[flow_var(e, a)] = space.dist(from, to).clone();
        }
        row[t_idx] = -S::one();
        lp.add_constraint(row, Relation::Le, S::zero());
    }

    let sol = solve(&lp)?;
    match sol.status {
        Status::Optimal => {}
        Status::Infeasible => {
            return Err(Error::Infeasible(match (group, bound) {
                (Some(_), Some(c)) => format!("no G-equivariant lifting of norm at most {c} over this M"),
                (Some(_), None) => "no G-equivariant lifting over this M".into(),
                (None, Some(c)) => format!("no lifting of norm at most {c} over this M"),
                (None, None) => "no lifting over this M".into(),
            }))
        }
        Status::Unbounded => return Err(Error::Consistency("lifting LP is unbounded".into())),
    }
    let mut t = Matrix::zeros(nf, d);
    for k in 0..nf {
        for j in 0..d {
            t[(k, j)] = sol.primal[t_var(k, j)].clone();
        }
    }
    let lifting = LinearMap::new(SpaceDescriptor::Normed(norm.clone()), SpaceDescriptor::Free(space.clone()), t)?;
    let recomputed_norm = op_norm(&lifting)?.value;
    Ok(MinNormLifting { value: sol.objective_value, lifting, recomputed_norm })
}

#[derive(Debug, Clone)]
pub enum SplittingInput<S: Scalar> {
    /// A lifting `T: X → 𝓕(M)`.
    Lifting(LinearMap<S>),
    /// Basis of a complement `W` of `Ker β`, as columns in free coordinates.
    Complement(Matrix<S>),
    /// A projection onto `Ker β`.
    Projection(Matrix<S>),
}

#[derive(Debug, Clone)]
pub struct SplittingReport<S: Scalar> {
    pub lifting: LinearMap<S>,
    pub complement: Matrix<S>,
    /// Projection onto `Ker β` along `W`.
    pub projection: Matrix<S>,
    pub direct_sum: bool,
    pub complement_invariant: bool,
    pub projection_equivariant: bool,
    pub lifting_is_right_inverse: bool,
    pub lifting_equivariant: bool,
    /// `Tβ` commutes with every generator's `g̃`.
    pub t_beta_commutes: bool,
    /// `T → W → p → T'` reproduces `T`.
    pub round_trip: bool,
    /// `(Id - p)x̃` does not depend on the preimage `x̃`.
    pub preimage_independent: bool,
}

impl<S: Scalar> SplittingReport<S> {
    pub fn all_pass(&self) -> bool {
        self.direct_sum
            && self.complement_invariant
            && self.projection_equivariant
            && self.lifting_is_right_inverse
            && self.lifting_equivariant
            && self.t_beta_commutes
            && self.round_trip
            && self.preimage_independent
    }
}

fn generator_tildes<S: Scalar>(group: Option<&FiniteGroupAction<S>>) -> Vec<Matrix<S>> {
    group.map_or_else(Vec::new, |g| g.generators.iter().map(|&e| induced_free_action(g, e).matrix).collect())
}

fn complement_of_lifting<S: Scalar>(t: &LinearMap<S>) -> Matrix<S> {
    t.matrix.clone()
}

fn projection_from_complement<S: Scalar>(kernel: &Matrix<S>, w: &Matrix<S>) -> Result<Matrix<S>> {
    let z = kernel.hcat(w).ok_or_else(|| Error::Malformed("complement has the wrong number of rows".into()))?;
    let z_inv = z
        .inverse()
        .ok_or_else(|| Error::Precondition("W is not a complement of Ker β: Ker β ⊕ W is not the whole space".into()))?;
    let mut diag = Matrix::zeros(z.cols(), z.cols());
    for i in 0..kernel.cols() {
        diag[(i, i)] = S::one();
    }
    Ok(z.mul(&diag).expect("square").mul(&z_inv).expect("square"))
}

fn span_contains<S: Scalar>(span: &Matrix<S>, other: &Matrix<S>) -> bool {
    span.hcat(other).map_or(false, |m| m.rank() == span.rank())
}

/// Converts between the three forms of a (G-)splitting of
/// `0 → Ker β → 𝓕(M) → X → 0` and checks each defining property.
pub fn splitting_equivalences<S: Scalar>(
    input: &SplittingInput<S>,
    space: &Space<S>,
    norm: &Arc<PolyhedralNorm<S>>,
    group: Option<&FiniteGroupAction<S>>,
) -> Result<SplittingReport<S>> {
    let beta = barycenter(space, norm)?;
    let kernel = beta.matrix.kernel();
    let nf = space.free_dim();
    let id = Matrix::<S>::identity(nf);
    let tildes = generator_tildes(group);
    let t0 = basis_lifting(space, norm)?;

    let lifting_from_projection = |p: &Matrix<S>, preimage: &Matrix<S>| -> Result<LinearMap<S>> {
        t0.with_matrix(id.sub(p).expect("square").mul(preimage).expect("shape"))
    };

    let (lifting, complement, projection) = match input {
        SplittingInput::Lifting(t) => {
            check_lifting(t, &beta)?;
            if let Some(g) = group {
                let dev = check_equivariant(t, g)?;
                if !dev.max_deviation.is_zero_tol() {
                    return Err(Error::Precondition(format!(
                        "lifting is not equivariant: deviation {} at element {}",
                        dev.max_deviation, dev.witness
                    )));
                }
            }
            let w = complement_of_lifting(t);
            let p = projection_from_complement(&kernel, &w)?;
            (t.clone(), w, p)
        }
        SplittingInput::Complement(w) => {
            if w.rows() != nf || w.cols() != norm.dim() || w.rank() != norm.dim() {
                return Err(Error::Precondition("W must have dimension dim X".into()));
            }
            for (i, gt) in tildes.iter().enumerate() {
                if !span_contains(w, &gt.mul(w).expect("shape")) {
                    return Err(Error::Precondition(format!("W is not invariant under generator {i}")));
                }
            }
            let p = projection_from_complement(&kernel, w)?;
            let t = lifting_from_projection(&p, &t0.matrix)?;
            (t, w.clone(), p)
        }
        SplittingInput::Projection(p) => {
            if p.shape() != (nf, nf) {
                return Err(Error::Malformed("projection must be square on the free space".into()));
            }
            if !p.mul(p).expect("square").approx_eq(p) {
                return Err(Error::Precondition("p is not idempotent".into()));
            }
            if p.rank() != kernel.cols() || !span_contains(&kernel, p) {
                return Err(Error::Precondition("range of p is not Ker β".into()));
            }
            for (i, gt) in tildes.iter().enumerate() {
                if !p.mul(gt).expect("square").approx_eq(&gt.mul(p).expect("square")) {
                    return Err(Error::Precondition(format!("p does not commute with generator {i}")));
                }
            }
            let t = lifting_from_projection(p, &t0.matrix)?;
            (t.clone(), complement_of_lifting(&t), p.clone())
        }
    };

    let z = kernel.hcat(&complement).expect("rows");
    let direct_sum = z.cols() == nf && z.rank() == nf;
    let complement_invariant = tildes.iter().all(|gt| span_contains(&complement, &gt.mul(&complement).expect("shape")));
    let projection_equivariant = tildes
        .iter()
        .all(|gt| projection.mul(gt).expect("square").approx_eq(&gt.mul(&projection).expect("square")));
    let lifting_is_right_inverse = check_lifting(&lifting, &beta).is_ok();
    let lifting_equivariant = match group {
        Some(g) => check_equivariant(&lifting, g)?.max_deviation.is_zero_tol(),
        None => true,
    };
    let t_beta = lifting.matrix.mul(&beta.matrix).expect("shape");
    let t_beta_commutes =
        tildes.iter().all(|gt| t_beta.mul(gt).expect("square").approx_eq(&gt.mul(&t_beta).expect("square")));

    // Round trip through the other two forms.
    let w2 = complement_of_lifting(&lifting);
    let p2 = projection_from_complement(&kernel, &w2)?;
    let t2 = lifting_from_projection(&p2, &t0.matrix)?;
    let round_trip = t2.approx_eq(&lifting) && p2.approx_eq(&projection);

    // A different preimage: shift T₀ by a kernel element in every column.
    let shift = if kernel.cols() > 0 {
        let ones = Matrix::from_rows(vec![vec![S::one(); norm.dim()]; kernel.cols()]).expect("rect");
        kernel.mul(&ones).expect("shape")
    } else {
        Matrix::zeros(nf, norm.dim())
    };
    let other = t0.matrix.add(&shift).expect("shape");
    let preimage_independent = lifting_from_projection(&projection, &other)?.approx_eq(&lifting_from_projection(&projection, &t0.matrix)?);

    Ok(SplittingReport {
        lifting,
        complement,
        projection,
        direct_sum,
        complement_invariant,
        projection_equivariant,
        lifting_is_right_inverse,
        lifting_equivariant,
        t_beta_commutes,
        round_trip,
        preimage_independent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::PointedMetricSpace;
    use lipfree_lp::Rational;

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn line() -> (Space<Rational>, Arc<PolyhedralNorm<Rational>>) {
        let n = Arc::new(PolyhedralNorm::l1(1));
        let m = PointedMetricSpace::induced(&n, vec![vec![q(0)], vec![q(1)], vec![q(-1)]], 0, None).unwrap();
        (Arc::new(m), n)
    }

    fn minus_id() -> Matrix<Rational> {
        Matrix::from_rows(vec![vec![q(-1)]]).unwrap()
    }

    #[test]
    fn sign_group_on_the_line() {
        let (m, n) = line();
        let g = close_group(&[minus_id()], &m, &n, DEFAULT_GROUP_CAP).unwrap();
        assert_eq!(g.order(), 2);
        assert_eq!(g.perm(1), &[0, 2, 1]);
        assert_eq!(g.inverse(1), 1);
        assert_eq!(FiniteGroupAction::trivial(&m, &n).unwrap().order(), 1);
        let swap = induced_free_action(&g, 1).matrix;
        assert_eq!(swap, Matrix::from_rows(vec![vec![q(0), q(1)], vec![q(1), q(0)]]).unwrap());
    }

    #[test]
    fn averaging_the_basis_lifting() {
        let (m, n) = line();
        let g = close_group(&[minus_id()], &m, &n, DEFAULT_GROUP_CAP).unwrap();
        let t0 = basis_lifting(&m, &n).unwrap();
        assert_eq!(t0.matrix, Matrix::from_rows(vec![vec![q(1)], vec![q(0)]]).unwrap());
        let dev = check_equivariant(&t0, &g).unwrap();
        assert_eq!(dev.max_deviation, q(1));
        assert_eq!(dev.witness, 1);
        let u = average_lifting(&t0, &g).unwrap();
        let h = Rational::from_ratio(1, 2);
        assert_eq!(u.matrix, Matrix::from_rows(vec![vec![h.clone()], vec![-h]]).unwrap());
        assert_eq!(check_equivariant(&u, &g).unwrap().max_deviation, q(0));
        assert_eq!(op_norm(&u).unwrap().value, q(1));
        assert_eq!(average_lifting(&u, &g).unwrap(), u);
    }

    #[test]
    fn min_norm_lifting_on_the_line() {
        let (m, n) = line();
        let g = close_group(&[minus_id()], &m, &n, DEFAULT_GROUP_CAP).unwrap();
        let r = min_norm_lifting(&m, &n, Some(&g), None).unwrap();
        assert_eq!(r.value, q(1));
        assert_eq!(r.recomputed_norm, q(1));
        let h = Rational::from_ratio(1, 2);
        assert_eq!(r.lifting.matrix, Matrix::from_rows(vec![vec![h.clone()], vec![-h]]).unwrap());
        let half = Rational::from_ratio(1, 2);
        assert!(matches!(min_norm_lifting(&m, &n, Some(&g), Some(&half)), Err(Error::Infeasible(_))));
    }

    #[test]
    fn splitting_round_trip_on_the_line() {
        let (m, n) = line();
        let g = close_group(&[minus_id()], &m, &n, DEFAULT_GROUP_CAP).unwrap();
        let u = average_lifting(&basis_lifting(&m, &n).unwrap(), &g).unwrap();
        let r = splitting_equivalences(&SplittingInput::Lifting(u.clone()), &m, &n, Some(&g)).unwrap();
        assert!(r.all_pass(), "{r:?}");
        // p projects onto span{δ(1) + δ(-1)} along span{δ(1) - δ(-1)}.
        let h = Rational::from_ratio(1, 2);
        assert_eq!(r.projection, Matrix::from_rows(vec![vec![h.clone(), h.clone()], vec![h.clone(), h.clone()]]).unwrap());
        let back = splitting_equivalences(&SplittingInput::Projection(r.projection.clone()), &m, &n, Some(&g)).unwrap();
        assert_eq!(back.lifting, u);
        let t0 = basis_lifting(&m, &n).unwrap();
        assert!(matches!(
            splitting_equivalences(&SplittingInput::Lifting(t0), &m, &n, Some(&g)),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn rotation_of_the_square() {
        let n = Arc::new(PolyhedralNorm::l1(2));
        let pts = vec![vec![q(0), q(0)], vec![q(1), q(0)], vec![q(0), q(1)], vec![q(-1), q(0)], vec![q(0), q(-1)]];
        let m = Arc::new(PointedMetricSpace::induced(&n, pts, 0, None).unwrap());
        let rot = Matrix::from_rows(vec![vec![q(0), q(-1)], vec![q(1), q(0)]]).unwrap();
        let g = close_group(&[rot], &m, &n, DEFAULT_GROUP_CAP).unwrap();
        assert_eq!(g.order(), 4);
        for a in 0..4 {
            for b in 0..4 {
                let lhs = induced_free_action(&g, a).compose(&induced_free_action(&g, b)).unwrap();
                assert_eq!(lhs, induced_free_action(&g, g.cayley()[a][b]));
            }
        }
        assert!(g.is_isometric().unwrap());
        let two = Matrix::identity(2).scale(&q(2));
        assert!(matches!(close_group(&[two], &m, &n, 10), Err(Error::Action(_))));
    }
}
