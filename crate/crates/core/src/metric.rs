//! Finite pointed metric spaces.

use std::fmt;

use lipfree_lp::{Matrix, Scalar};

use crate::error::{Error, Result};
use crate::normed::PolyhedralNorm;

#[derive(Debug, Clone, PartialEq)]
pub enum MetricViolation {
    NonzeroDiagonal { point: String },
    Asymmetric { a: String, b: String },
    NonPositive { a: String, b: String },
    /// `d(a, b) > d(a, via) + d(via, b)`.
    Triangle { a: String, via: String, b: String },
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricViolation::NonzeroDiagonal { point } => write!(f, "d({point},{point}) is not zero"),
            MetricViolation::Asymmetric { a, b } => write!(f, "d({a},{b}) differs from d({b},{a})"),
            MetricViolation::NonPositive { a, b } => write!(f, "d({a},{b}) is not positive"),
            MetricViolation::Triangle { a, via, b } => {
                write!(f, "triangle inequality fails for ({a},{via},{b}): d({a},{b}) > d({a},{via}) + d({via},{b})")
            }
        }
    }
}

/// A finite set of labeled points with a base point and distance matrix,
/// optionally embedded in a polyhedral normed space.
#[derive(Debug, Clone, PartialEq)]
pub struct PointedMetricSpace<S: Scalar> {
    labels: Vec<String>,
    base: usize,
    dist: Matrix<S>,
    coords: Option<Vec<Vec<S>>>,
    norm: Option<PolyhedralNorm<S>>,
}

impl<S: Scalar> PointedMetricSpace<S> {
    /// Checks shape and labels only; call [`Self::validate`] for the axioms.
    pub fn from_distances(labels: Vec<String>, base: usize, dist: Matrix<S>) -> Result<Self> {
        let n = labels.len();
        if dist.shape() != (n, n) {
            return Err(Error::Malformed(format!(
                "distance matrix is {}x{} for {} labels",
                dist.rows(),
                dist.cols(),
                n
            )));
        }
        if n < 2 {
            return Err(Error::Malformed("a pointed metric space needs at least two points".into()));
        }
        if base >= n {
            return Err(Error::Malformed(format!("base index {base} out of range")));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Malformed(format!("duplicate label `{l}`")));
            }
        }
        Ok(PointedMetricSpace { labels, base, dist, coords: None, norm: None })
    }

    /// Like [`Self::from_distances`] but rejects spaces violating any axiom.
    pub fn new(labels: Vec<String>, base: usize, dist: Matrix<S>) -> Result<Self> {
        let space = Self::from_distances(labels, base, dist)?;
        space.ensure_valid()?;
        Ok(space)
    }

    /// Metric induced by `norm` on `points`; labels default to coordinates.
    pub fn induced(
        norm: &PolyhedralNorm<S>,
        points: Vec<Vec<S>>,
        base: usize,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let n = points.len();
        if let Some(p) = points.iter().find(|p| p.len() != norm.dim()) {
            return Err(Error::Malformed(format!(
                "point ({}) has dimension {}, norm has {}",
                crate::normed::fmt_vec(p),
                p.len(),
                norm.dim()
            )));
        }
        let labels = labels.unwrap_or_else(|| points.iter().map(|p| coord_label(p)).collect());
        if labels.len() != n {
            return Err(Error::Malformed("label count differs from point count".into()));
        }
        let mut dist = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let diff: Vec<S> = points[i].iter().zip(&points[j]).map(|(a, b)| a.clone() - b.clone()).collect();
                let d = norm.eval(&diff)?;
                if d.is_zero_tol() {
                    return Err(Error::Malformed(format!("duplicate points `{}` and `{}`", labels[i], labels[j])));
                }
                dist[(i, j)] = d.clone();
                dist[(j, i)] = d;
            }
        }
        let mut space = Self::from_distances(labels, base, dist)?;
        space.coords = Some(points);
        space.norm = Some(norm.clone());
        Ok(space)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn dist(&self, i: usize, j: usize) -> &S {
        &self.dist[(i, j)]
    }

    pub fn distances(&self) -> &Matrix<S> {
        &self.dist
    }

    pub fn coords(&self) -> Option<&[Vec<S>]> {
        self.coords.as_deref()
    }

    /// The norm that induced the metric, when there is one.
    pub fn norm(&self) -> Option<&PolyhedralNorm<S>> {
        self.norm.as_ref()
    }

    /// Dimension of the free space, `|M| - 1`.
    pub fn free_dim(&self) -> usize {
        self.len() - 1
    }

    /// Free-space coordinate of point `i`, `None` for the base point.
    pub fn free_index(&self, i: usize) -> Option<usize> {
        match i.cmp(&self.base) {
            std::cmp::Ordering::Less => Some(i),
            std::cmp::Ordering::Equal => None,
            std::cmp::Ordering::Greater => Some(i - 1),
        }
    }

    /// Point carrying free-space coordinate `k`.
    pub fn point_of_free_index(&self, k: usize) -> usize {
        if k < self.base {
            k
        } else {
            k + 1
        }
    }

    /// Non-base points in label order.
    pub fn non_base_points(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len()).filter(move |&i| i != self.base)
    }

    /// Every violated axiom with a witness; empty iff the matrix is a metric.
    pub fn validate(&self) -> Vec<MetricViolation> {
        let n = self.len();
        let l = |i: usize| self.labels[i].clone();
        let mut out = Vec::new();
        for i in 0..n {
            if !self.dist[(i, i)].is_zero_tol() {
                out.push(MetricViolation::NonzeroDiagonal { point: l(i) });
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                if !self.dist[(i, j)].approx_eq(&self.dist[(j, i)]) {
                    out.push(MetricViolation::Asymmetric { a: l(i), b: l(j) });
                }
                if !self.dist[(i, j)].is_pos_tol() || !self.dist[(j, i)].is_pos_tol() {
                    out.push(MetricViolation::NonPositive { a: l(i), b: l(j) });
                }
            }
        }
        for a in 0..n {
            for b in a + 1..n {
                for via in 0..n {
                    if via == a || via == b {
                        continue;
                    }
                    let through = self.dist[(a, via)].clone() + self.dist[(via, b)].clone();
                    if !self.dist[(a, b)].le_tol(&through) {
                        out.push(MetricViolation::Triangle { a: l(a), via: l(via), b: l(b) });
                    }
                }
            }
        }
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        match self.validate().first() {
            None => Ok(()),
            Some(v) => Err(Error::InvalidMetric(v.to_string())),
        }
    }

    /// Index of the point with coordinates `x`: exact equality in exact
    /// mode, coordinatewise tolerance in float mode. Two matches is an error.
    pub fn locate(&self, x: &[S]) -> Result<Option<usize>> {
        let coords = self.coords.as_ref().ok_or_else(|| Error::Precondition("space has no coordinates".into()))?;
        let mut found = None;
        for (i, c) in coords.iter().enumerate() {
            if crate::normed::approx_vec_eq(c, x) {
                if let Some(j) = found {
                    return Err(Error::Action(format!(
                        "point ({}) matches both `{}` and `{}`",
                        crate::normed::fmt_vec(x),
                        self.labels[j],
                        self.labels[i]
                    )));
                }
                found = Some(i);
            }
        }
        Ok(found)
    }

    /// Same space with points reordered: new point `i` is old point `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.len();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::Malformed("not a permutation".into()));
        }
        let mut dist = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                dist[(i, j)] = self.dist[(perm[i], perm[j])].clone();
            }
        }
        let base = perm.iter().position(|&p| p == self.base).expect("permutation");
        Ok(PointedMetricSpace {
            labels: perm.iter().map(|&p| self.labels[p].clone()).collect(),
            base,
            dist,
            coords: self.coords.as_ref().map(|c| perm.iter().map(|&p| c[p].clone()).collect()),
            norm: self.norm.clone(),
        })
    }
}

pub(crate) fn coord_label<S: Scalar>(p: &[S]) -> String {
    format!("({})", p.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
}
