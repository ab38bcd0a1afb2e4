//! Linear program data model: problems, solutions and certificates.

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint<S> {
    pub coeffs: Vec<S>,
    pub relation: Relation,
    pub rhs: S,
}

/// Per-variable bounds; `None` is an infinite bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Bound<S> {
    pub lower: Option<S>,
    pub upper: Option<S>,
}

impl<S: Scalar> Bound<S> {
    pub fn free() -> Self {
        Bound { lower: None, upper: None }
    }

    pub fn non_negative() -> Self {
        Bound { lower: Some(S::zero()), upper: None }
    }

    pub fn between(lower: S, upper: S) -> Self {
        Bound { lower: Some(lower), upper: Some(upper) }
    }
}

/// `optimize objective · x` subject to the constraints and bounds.
///
/// Duals follow the Lagrangian convention: at an optimum
/// `objective = Aᵀ·dual + reduced_costs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpProblem<S> {
    pub sense: Sense,
    pub objective: Vec<S>,
    pub constraints: Vec<Constraint<S>>,
    pub bounds: Vec<Bound<S>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Independently checkable optimality data.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate<S> {
    /// `rhs_i - a_i · x` for every constraint.
    pub slacks: Vec<S>,
    /// `objective - Aᵀ · dual`, one entry per variable.
    pub reduced_costs: Vec<S>,
    /// Value of the dual objective at `dual`.
    pub dual_objective: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<S> {
    pub status: Status,
    pub primal: Vec<S>,
    pub dual: Vec<S>,
    pub objective_value: S,
    pub certificate: Option<Certificate<S>>,
    pub iterations: usize,
}

impl<S: Scalar> LpSolution<S> {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("malformed LP: {0}")]
    Malformed(String),
    #[error("iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("numerical breakdown: {0}")]
    Numerical(String),
}

impl<S: Scalar> LpProblem<S> {
    /// An LP over `n` non-negative variables with no constraints yet.
    pub fn new(sense: Sense, objective: Vec<S>) -> Self {
        let n = objective.len();
        LpProblem { sense, objective, constraints: Vec::new(), bounds: vec![Bound::non_negative(); n] }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_constraint(&mut self, coeffs: Vec<S>, relation: Relation, rhs: S) -> &mut Self {
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self
    }

    pub fn set_bound(&mut self, var: usize, bound: Bound<S>) -> &mut Self {
        self.bounds[var] = bound;
        self
    }

    /// Checks dimensions and bound consistency.
    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.objective.len();
        if n == 0 {
            return Err(LpError::Malformed("at least one variable required".into()));
        }
        if self.bounds.len() != n {
            return Err(LpError::Malformed(format!(
                "{} bounds for {} variables",
                self.bounds.len(),
                n
            )));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(LpError::Malformed(format!(
                    "constraint {i} has {} coefficients, expected {n}",
                    c.coeffs.len()
                )));
            }
        }
        Ok(())
    }

    /// Sign used to turn the problem into a minimization.
    pub(crate) fn sigma(&self) -> S {
        match self.sense {
            Sense::Minimize => S::one(),
            Sense::Maximize => -S::one(),
        }
    }

    /// The explicit Lagrangian dual program.
    ///
    /// Variables are the constraint multipliers followed by one multiplier
    /// per finite lower bound and one per finite upper bound. Its optimal
    /// value equals the primal optimum whenever both are feasible.
    pub fn dual_problem(&self) -> LpProblem<S> {
        let sigma = self.sigma();
        let n = self.num_vars();
        let m = self.constraints.len();
        let lowers: Vec<usize> = (0..n).filter(|&j| self.bounds[j].lower.is_some()).collect();
        let uppers: Vec<usize> = (0..n).filter(|&j| self.bounds[j].upper.is_some()).collect();
        let nd = m + lowers.len() + uppers.len();

        // Work with the minimization min σc·x; its dual is
        // max b·y + l·zl - u·zu, s.t. Aᵀy + zl - zu = σc.
        let mut objective = Vec::with_capacity(nd);
        let mut bounds = Vec::with_capacity(nd);
        for c in &self.constraints {
            objective.push(c.rhs.clone());
            bounds.push(match c.relation {
                Relation::Ge => Bound::non_negative(),
                Relation::Le => Bound { lower: None, upper: Some(S::zero()) },
                Relation::Eq => Bound::free(),
            });
        }
        for &j in &lowers {
            objective.push(self.bounds[j].lower.clone().unwrap());
            bounds.push(Bound::non_negative());
        }
        for &j in &uppers {
            objective.push(-self.bounds[j].upper.clone().unwrap());
            bounds.push(Bound::non_negative());
        }
        // Dual objective is reported in the primal's sense: σ · (b·y + ...).
        let objective: Vec<S> = objective.into_iter().map(|v| v * sigma.clone()).collect();
        let sense = match self.sense {
            Sense::Minimize => Sense::Maximize,
            Sense::Maximize => Sense::Minimize,
        };
        let mut dual = LpProblem { sense, objective, constraints: Vec::with_capacity(n), bounds };
        for j in 0..n {
            let mut row = vec![S::zero(); nd];
            for (i, c) in self.constraints.iter().enumerate() {
                row[i] = c.coeffs[j].clone();
            }
            if let Some(p) = lowers.iter().position(|&v| v == j) {
                row[m + p] = S::one();
            }
            if let Some(p) = uppers.iter().position(|&v| v == j) {
                row[m + lowers.len() + p] = -S::one();
            }
            dual.add_constraint(row, Relation::Eq, sigma.clone() * self.objective[j].clone());
        }
        dual
    }
}
