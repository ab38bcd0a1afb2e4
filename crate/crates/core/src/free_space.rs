//! Elements of the free space over a finite pointed metric space, Lipschitz
//! functions vanishing at the base point, and the free norm.

use std::collections::BTreeMap;
use std::sync::Arc;

use lipfree_lp::{float_tolerance, solve, Bound, LpProblem, Mode, Relation, Scalar, Sense, Status};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::metric::PointedMetricSpace;

pub type Space<S> = Arc<PointedMetricSpace<S>>;

pub(crate) fn same_space<S: Scalar>(a: &Space<S>, b: &Space<S>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

/// Finitely supported combination of Dirac elements. The base point has
/// no coefficient since its Dirac element is zero.
#[derive(Debug, Clone)]
pub struct FreeVector<S: Scalar> {
    space: Space<S>,
    coeffs: BTreeMap<usize, S>,
}

impl<S: Scalar> PartialEq for FreeVector<S> {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.coeffs == other.coeffs
    }
}

impl<S: Scalar> FreeVector<S> {
    pub fn zero(space: &Space<S>) -> Self {
        FreeVector { space: space.clone(), coeffs: BTreeMap::new() }
    }

    pub fn delta(space: &Space<S>, point: usize) -> Self {
        Self::from_coeffs(space, [(point, S::one())])
    }

    /// Sums repeated points; drops the base point and zero coefficients.
    pub fn from_coeffs(space: &Space<S>, entries: impl IntoIterator<Item = (usize, S)>) -> Self {
        let mut v = Self::zero(space);
        for (p, c) in entries {
            assert!(p < space.len(), "point index out of range");
            v.add_at(p, c);
        }
        v
    }

    /// From coordinates indexed by non-base points in label order.
    pub fn from_dense(space: &Space<S>, coords: &[S]) -> Result<Self> {
        if coords.len() != space.free_dim() {
            return Err(Error::Malformed(format!(
                "free vector of length {} for a space of dimension {}",
                coords.len(),
                space.free_dim()
            )));
        }
        Ok(Self::from_coeffs(
            space,
            coords.iter().enumerate().map(|(k, c)| (space.point_of_free_index(k), c.clone())),
        ))
    }

    pub fn to_dense(&self) -> Vec<S> {
        let mut out = vec![S::zero(); self.space.free_dim()];
        for (&p, c) in &self.coeffs {
            out[self.space.free_index(p).expect("base never stored")] = c.clone();
        }
        out
    }

    fn add_at(&mut self, p: usize, c: S) {
        if p == self.space.base() || c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(p).or_insert_with(S::zero);
        *entry = entry.clone() + c;
        if entry.is_zero_tol() {
            self.coeffs.remove(&p);
        }
    }

    pub fn space(&self) -> &Space<S> {
        &self.space
    }

    pub fn coeff(&self, p: usize) -> S {
        self.coeffs.get(&p).cloned().unwrap_or_else(S::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, &S)> {
        self.coeffs.iter().map(|(&p, c)| (p, c))
    }

    pub fn support(&self) -> Vec<usize> {
        self.coeffs.keys().copied().collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if !same_space(&self.space, &other.space) {
            return Err(Error::SpaceMismatch);
        }
        let mut out = self.clone();
        for (&p, c) in &other.coeffs {
            out.add_at(p, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(&-S::one()))
    }

    pub fn scale(&self, k: &S) -> Self {
        Self::from_coeffs(&self.space, self.coeffs.iter().map(|(&p, c)| (p, c.clone() * k.clone())))
    }
}

/// `δ(x) - δ(y)`.
pub fn molecule<S: Scalar>(space: &Space<S>, x: usize, y: usize) -> Result<FreeVector<S>> {
    if x == y {
        return Err(Error::Malformed(format!("molecule needs distinct points, got `{}` twice", space.label(x))));
    }
    if x >= space.len() || y >= space.len() {
        return Err(Error::Malformed("point index out of range".into()));
    }
    Ok(FreeVector::from_coeffs(space, [(x, S::one()), (y, -S::one())]))
}

/// Real function on the points, zero at the base point.
#[derive(Debug, Clone)]
pub struct LipFunction<S: Scalar> {
    space: Space<S>,
    values: Vec<S>,
}

impl<S: Scalar> PartialEq for LipFunction<S> {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.space, &other.space) && self.values == other.values
    }
}

impl<S: Scalar> LipFunction<S> {
    /// `values[i]` is the value at point `i`; the base value must be zero.
    pub fn new(space: &Space<S>, values: Vec<S>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::Malformed("one value per point is required".into()));
        }
        if !values[space.base()].is_zero_tol() {
            return Err(Error::Malformed("a Lip0 function must vanish at the base point".into()));
        }
        let mut values = values;
        values[space.base()] = S::zero();
        Ok(LipFunction { space: space.clone(), values })
    }

    pub fn zero(space: &Space<S>) -> Self {
        LipFunction { space: space.clone(), values: vec![S::zero(); space.len()] }
    }

    /// From values on non-base points in label order.
    pub fn from_free_coords(space: &Space<S>, coords: &[S]) -> Result<Self> {
        if coords.len() != space.free_dim() {
            return Err(Error::Malformed("one value per non-base point is required".into()));
        }
        let mut values = vec![S::zero(); space.len()];
        for (k, c) in coords.iter().enumerate() {
            values[space.point_of_free_index(k)] = c.clone();
        }
        Ok(LipFunction { space: space.clone(), values })
    }

    pub fn to_free_coords(&self) -> Vec<S> {
        self.space.non_base_points().map(|p| self.values[p].clone()).collect()
    }

    pub fn space(&self) -> &Space<S> {
        &self.space
    }

    pub fn value(&self, p: usize) -> &S {
        &self.values[p]
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }
}

/// Least Lipschitz constant: the largest slope over unordered pairs.
pub fn lip_constant<S: Scalar>(f: &LipFunction<S>) -> S {
    let n = f.space.len();
    let mut best = S::zero();
    for i in 0..n {
        for j in i + 1..n {
            let slope = (f.values[i].clone() - f.values[j].clone()).abs() / f.space.dist(i, j).clone();
            best = S::max_of(best, slope);
        }
    }
    best
}

/// `⟨f, μ⟩ = Σ μ(x) f(x)`.
pub fn pair<S: Scalar>(f: &LipFunction<S>, mu: &FreeVector<S>) -> Result<S> {
    if !same_space(&f.space, &mu.space) {
        return Err(Error::SpaceMismatch);
    }
    let mut total = S::zero();
    for (p, c) in mu.iter() {
        total.add_mul_assign(c, &f.values[p]);
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transport<S> {
    pub from: usize,
    pub to: usize,
    pub weight: S,
}

#[derive(Debug, Clone)]
pub struct FreeNorm<S: Scalar> {
    pub value: S,
    /// A 1-Lipschitz function attaining the value.
    pub witness_f: LipFunction<S>,
    /// Nonnegative flow of cost `value` whose node balance is `μ` off the base.
    pub witness_flow: Vec<Transport<S>>,
    /// `|⟨witness_f, μ⟩ - value|`.
    pub gap: S,
}

impl<S: Scalar> FreeNorm<S> {
    /// Gap is zero in exact mode, within `ε_f·(1 + value)` in float mode.
    pub fn gap_closed(&self) -> bool {
        within_gap(&self.gap, &self.value)
    }
}

/// Zero in exact mode; at most `ε_f·(1 + |value|)` in float mode.
pub fn within_gap<S: Scalar>(gap: &S, value: &S) -> bool {
    match S::MODE {
        Mode::Exact => gap.is_zero(),
        Mode::Float => gap.to_f64().abs() <= float_tolerance() * (1.0 + value.to_f64().abs()),
    }
}

/// Free norm by the transport formulation restricted to the support: mass
/// leaves positive coefficients and reaches negative coefficients, with the
/// base point as a free source or sink. By the triangle inequality no other
/// arcs are needed. The optimal potentials are extended from the sinks to a
/// 1-Lipschitz function on all of `M`, whose pairing with `μ` is the
/// returned dual value.
pub fn free_norm<S: Scalar>(mu: &FreeVector<S>) -> Result<FreeNorm<S>> {
    let space = &mu.space;
    let base = space.base();
    if mu.is_zero() {
        return Ok(FreeNorm {
            value: S::zero(),
            witness_f: LipFunction::zero(space),
            witness_flow: Vec::new(),
            gap: S::zero(),
        });
    }
    let pos: Vec<(usize, S)> = mu.iter().filter(|(_, c)| **c > S::zero()).map(|(p, c)| (p, c.clone())).collect();
    let neg: Vec<(usize, S)> = mu.iter().filter(|(_, c)| **c < S::zero()).map(|(p, c)| (p, -c.clone())).collect();

    // Arcs: pos×neg, pos→base, base→neg.
    let mut arcs: Vec<(usize, usize)> = Vec::with_capacity(pos.len() * neg.len() + pos.len() + neg.len());
    for (p, _) in &pos {
        for (n, _) in &neg {
            arcs.push((*p, *n));
        }
        arcs.push((*p, base));
    }
    for (n, _) in &neg {
        arcs.push((base, *n));
    }
    let cost: Vec<S> = arcs.iter().map(|&(a, b)| space.dist(a, b).clone()).collect();
    let mut lp = LpProblem::new(Sense::Minimize, cost);
    let row_of = |p: usize| -> Vec<S> {
        arcs.iter().map(|&(a, b)| if a == p || b == p { S::one() } else { S::zero() }).collect()
    };
    for (p, m) in pos.iter().chain(&neg) {
        lp.add_constraint(row_of(*p), Relation::Eq, m.clone());
    }
    let sol = solve(&lp)?;
    if sol.status != Status::Optimal {
        return Err(Error::Consistency(format!("transport LP reported {:?}", sol.status)));
    }

    let witness_flow = arcs
        .iter()
        .zip(&sol.primal)
        .filter(|(_, w)| !w.is_zero_tol())
        .map(|(&(from, to), w)| Transport { from, to, weight: w.clone() })
        .collect();

    // Potentials on sinks: f(n) = -y_n, f(base) = 0.
    let sinks: Vec<(usize, S)> = neg
        .iter()
        .enumerate()
        .map(|(k, (n, _))| (*n, -sol.dual[pos.len() + k].clone()))
        .chain(std::iter::once((base, S::zero())))
        .collect();
    let witness_f = mcshane_from(space, &sinks);
    let dual_value = pair(&witness_f, mu)?;
    let gap = (dual_value - sol.objective_value.clone()).abs();
    Ok(FreeNorm { value: sol.objective_value, witness_f, witness_flow, gap })
}

/// `g(x) = min_y (f(y) + d(x, y))` over the given anchors; 1-Lipschitz, and
/// zero at the base when the base is an anchor with `f(y) + d(base, y) ≥ 0`.
fn mcshane_from<S: Scalar>(space: &Space<S>, anchors: &[(usize, S)]) -> LipFunction<S> {
    let base = space.base();
    let mut values: Vec<S> = (0..space.len())
        .map(|x| {
            anchors
                .iter()
                .map(|(y, fy)| fy.clone() + space.dist(x, *y).clone())
                .reduce(|a, b| if b < a { b } else { a })
                .expect("base is always an anchor")
        })
        .collect();
    values[base] = S::zero();
    LipFunction { space: space.clone(), values }
}

/// Free norms of many vectors, in parallel.
pub fn free_norms<S: Scalar>(vectors: &[FreeVector<S>]) -> Result<Vec<FreeNorm<S>>> {
    vectors.par_iter().map(free_norm).collect()
}

/// The Lipschitz-ball LP `max ⟨f, μ⟩ s.t. ±(f(x) - f(y)) ≤ d(x, y)` over
/// all pairs, base pairs included, with one free variable per non-base point.
pub fn lip_ball_lp<S: Scalar>(mu: &FreeVector<S>) -> LpProblem<S> {
    let space = &mu.space;
    let n = space.free_dim();
    let mut lp = LpProblem::new(Sense::Maximize, mu.to_dense());
    for j in 0..n {
        lp.set_bound(j, Bound::free());
    }
    for a in 0..space.len() {
        for b in a + 1..space.len() {
            let mut row = vec![S::zero(); n];
            if let Some(i) = space.free_index(a) {
                row[i] = S::one();
            }
            if let Some(i) = space.free_index(b) {
                row[i] = -S::one();
            }
            let neg: Vec<S> = row.iter().map(|x| -x.clone()).collect();
            lp.add_constraint(row, Relation::Le, space.dist(a, b).clone());
            lp.add_constraint(neg, Relation::Le, space.dist(a, b).clone());
        }
    }
    lp
}

/// The flow LP with one nonnegative variable per ordered pair of points.
pub fn all_pairs_flow_lp<S: Scalar>(mu: &FreeVector<S>) -> LpProblem<S> {
    let space = &mu.space;
    let n = space.len();
    let arcs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).filter(move |&b| b != a).map(move |b| (a, b))).collect();
    let mut lp = LpProblem::new(Sense::Minimize, arcs.iter().map(|&(a, b)| space.dist(a, b).clone()).collect());
    for x in space.non_base_points() {
        let row = arcs
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
        lp.add_constraint(row, Relation::Eq, mu.coeff(x));
    }
    lp
}

/// Free norm through the two unrestricted LPs; returns `(dual value, primal value)`.
pub fn free_norm_full<S: Scalar>(mu: &FreeVector<S>) -> Result<(S, S)> {
    let d = solve(&lip_ball_lp(mu))?;
    let p = solve(&all_pairs_flow_lp(mu))?;
    if d.status != Status::Optimal || p.status != Status::Optimal {
        return Err(Error::Consistency("free norm LP not optimal".into()));
    }
    Ok((d.objective_value, p.objective_value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use lipfree_lp::{Matrix, Rational};

    fn q(n: i64) -> Rational {
        Rational::from_i64(n)
    }

    fn line() -> Space<Rational> {
        let n = crate::normed::PolyhedralNorm::l1(1);
        Arc::new(PointedMetricSpace::induced(&n, vec![vec![q(0)], vec![q(1)], vec![q(-1)]], 0, None).unwrap())
    }

    fn equilateral() -> Space<Rational> {
        let d = Matrix::from_rows(vec![vec![q(0), q(1), q(1)], vec![q(1), q(0), q(1)], vec![q(1), q(1), q(0)]]).unwrap();
        Arc::new(PointedMetricSpace::new(vec!["0".into(), "A".into(), "B".into()], 0, d).unwrap())
    }

    #[test]
    fn lip_constants() {
        let s = line();
        let id = LipFunction::new(&s, vec![q(0), q(1), q(-1)]).unwrap();
        assert_eq!(lip_constant(&id), q(1));
        assert_eq!(lip_constant(&LipFunction::zero(&s)), q(0));
        let e = equilateral();
        assert_eq!(lip_constant(&LipFunction::new(&e, vec![q(0), q(1), q(1)]).unwrap()), q(1));
        assert!(LipFunction::new(&s, vec![q(1), q(1), q(-1)]).is_err());
    }

    #[test]
    fn pairing() {
        let s = line();
        let f = LipFunction::new(&s, vec![q(0), q(3), q(5)]).unwrap();
        assert_eq!(pair(&f, &FreeVector::delta(&s, 1)).unwrap(), q(3));
        assert_eq!(pair(&f, &molecule(&s, 1, 2).unwrap()).unwrap(), q(-2));
        assert_eq!(pair(&LipFunction::zero(&s), &molecule(&s, 1, 2).unwrap()).unwrap(), q(0));
        assert_eq!(pair(&f, &FreeVector::zero(&equilateral())), Err(Error::SpaceMismatch));
    }

    #[test]
    fn molecules() {
        let s = line();
        assert_eq!(molecule(&s, 1, 0).unwrap(), FreeVector::delta(&s, 1));
        let sum = molecule(&s, 1, 2).unwrap().add(&molecule(&s, 2, 1).unwrap()).unwrap();
        assert!(sum.is_zero());
        assert!(molecule(&s, 1, 1).is_err());
    }

    #[test]
    fn norms_of_small_elements() {
        let s = line();
        let r = free_norm(&FreeVector::delta(&s, 2)).unwrap();
        assert_eq!(r.value, q(1));
        assert_eq!(r.gap, q(0));
        let r = free_norm(&molecule(&s, 1, 2).unwrap()).unwrap();
        assert_eq!(r.value, q(2));
        assert_eq!(lip_constant(&r.witness_f), q(1));
        let e = equilateral();
        let mu = FreeVector::from_coeffs(&e, [(1, q(1)), (2, q(1))]);
        let r = free_norm(&mu).unwrap();
        assert_eq!(r.value, q(2));
        assert_eq!(r.gap, q(0));
        assert_eq!(free_norm_full(&mu).unwrap(), (q(2), q(2)));
    }

    #[test]
    fn witness_flow_balances() {
        let e = equilateral();
        let mu = FreeVector::from_coeffs(&e, [(1, q(2)), (2, q(-1))]);
        let r = free_norm(&mu).unwrap();
        let mut balance = vec![q(0); 3];
        let mut cost = q(0);
        for t in &r.witness_flow {
            assert!(t.weight > q(0));
            balance[t.from] += t.weight.clone();
            balance[t.to] -= t.weight.clone();
            cost += t.weight.clone() * e.dist(t.from, t.to).clone();
        }
        assert_eq!(balance[1], q(2));
        assert_eq!(balance[2], q(-1));
        assert_eq!(cost, r.value);
        assert_eq!(r.value, q(2));
    }

    #[test]
    fn dense_round_trip() {
        let s = line();
        let v = FreeVector::from_dense(&s, &[q(2), q(-3)]).unwrap();
        assert_eq!(v.to_dense(), vec![q(2), q(-3)]);
        assert_eq!(v.coeff(2), q(-3));
        assert_eq!(v.scale(&q(0)), FreeVector::zero(&s));
    }
}
