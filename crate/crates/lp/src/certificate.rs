//! Optimality certificates and their path-independent verification.

use crate::matrix::dot;
use crate::problem::{Certificate, LpProblem, LpSolution, Relation, Status};
use crate::scalar::Scalar;

/// Outcome of [`check_certificate`]: every individual condition, so callers
/// can report which one failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificateCheck {
    pub dimensions: bool,
    pub primal_feasible: bool,
    pub dual_feasible: bool,
    pub objective_matches: bool,
    pub strong_duality: bool,
}

impl CertificateCheck {
    pub fn holds(&self) -> bool {
        self.dimensions
            && self.primal_feasible
            && self.dual_feasible
            && self.objective_matches
            && self.strong_duality
    }
}

pub(crate) fn build_certificate<S: Scalar>(problem: &LpProblem<S>, primal: &[S], dual: &[S]) -> Certificate<S> {
    let slacks = problem
        .constraints
        .iter()
        .map(|c| c.rhs.clone() - dot(&c.coeffs, primal))
        .collect();
    let reduced_costs = reduced_costs(problem, dual);
    let dual_objective = dual_objective(problem, dual, &reduced_costs).unwrap_or_else(S::zero);
    Certificate { slacks, reduced_costs, dual_objective }
}

fn reduced_costs<S: Scalar>(problem: &LpProblem<S>, dual: &[S]) -> Vec<S> {
    let mut r = problem.objective.clone();
    for (c, y) in problem.constraints.iter().zip(dual) {
        if y.is_zero() {
            continue;
        }
        for (rj, a) in r.iter_mut().zip(&c.coeffs) {
            rj.sub_mul_assign(y, a);
        }
    }
    r
}

/// Dual objective `σ·(b·ỹ + Σ l_j·max(r̃_j,0) + Σ u_j·min(r̃_j,0))` in the
/// primal's sense; `None` when a reduced cost pushes against an infinite bound.
fn dual_objective<S: Scalar>(problem: &LpProblem<S>, dual: &[S], reduced: &[S]) -> Option<S> {
    let sigma = problem.sigma();
    let mut total = S::zero();
    for (c, y) in problem.constraints.iter().zip(dual) {
        total.add_mul_assign(&c.rhs, y);
    }
    total = total * sigma.clone();
    for (r, b) in reduced.iter().zip(&problem.bounds) {
        let rt = r.clone() * sigma.clone();
        if rt.is_pos_tol() {
            total.add_mul_assign(&rt, b.lower.as_ref()?);
        } else if rt.is_neg_tol() {
            total.add_mul_assign(&rt, b.upper.as_ref()?);
        }
    }
    Some(total * sigma)
}

/// Re-checks an optimal solution from the raw problem data.
pub fn verify_certificate<S: Scalar>(problem: &LpProblem<S>, solution: &LpSolution<S>) -> bool {
    check_certificate(problem, solution).holds()
}

pub fn check_certificate<S: Scalar>(problem: &LpProblem<S>, solution: &LpSolution<S>) -> CertificateCheck {
    let mut check = CertificateCheck {
        dimensions: false,
        primal_feasible: false,
        dual_feasible: false,
        objective_matches: false,
        strong_duality: false,
    };
    let n = problem.num_vars();
    if solution.status != Status::Optimal
        || problem.validate().is_err()
        || solution.primal.len() != n
        || solution.dual.len() != problem.constraints.len()
    {
        return check;
    }
    check.dimensions = true;
    let x = &solution.primal;
    let y = &solution.dual;

    check.primal_feasible = problem.constraints.iter().all(|c| {
        let lhs = dot(&c.coeffs, x);
        match c.relation {
            Relation::Le => lhs.le_tol(&c.rhs),
            Relation::Ge => lhs.ge_tol(&c.rhs),
            Relation::Eq => lhs.approx_eq(&c.rhs),
        }
    }) && problem.bounds.iter().zip(x).all(|(b, v)| {
        b.lower.as_ref().map_or(true, |l| v.ge_tol(l)) && b.upper.as_ref().map_or(true, |u| v.le_tol(u))
    });

    // Dual feasibility in the minimization convention ỹ = σ y.
    let sigma = problem.sigma();
    let signs_ok = problem.constraints.iter().zip(y).all(|(c, yi)| {
        let yt = yi.clone() * sigma.clone();
        match c.relation {
            Relation::Ge => !yt.is_neg_tol(),
            Relation::Le => !yt.is_pos_tol(),
            Relation::Eq => true,
        }
    });
    let reduced = reduced_costs(problem, y);
    let dual_obj = dual_objective(problem, y, &reduced);
    check.dual_feasible = signs_ok && dual_obj.is_some();

    let primal_obj = dot(&problem.objective, x);
    check.objective_matches = primal_obj.approx_eq(&solution.objective_value);
    if let Some(cert) = &solution.certificate {
        let stored_ok = cert.reduced_costs.len() == n
            && cert.reduced_costs.iter().zip(&reduced).all(|(a, b)| a.approx_eq(b))
            && cert.slacks.len() == problem.constraints.len()
            && cert
                .slacks
                .iter()
                .zip(&problem.constraints)
                .all(|(s, c)| s.approx_eq(&(c.rhs.clone() - dot(&c.coeffs, x))));
        check.objective_matches &= stored_ok;
    }
    check.strong_duality = match dual_obj {
        Some(d) => d.approx_eq(&primal_obj),
        None => false,
    };
    check
}
