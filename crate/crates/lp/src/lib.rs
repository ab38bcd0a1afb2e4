//! Exact-or-float linear programming with checkable certificates.
//!
//! ```
//! use lipfree_lp::{solve, verify_certificate, LpProblem, Rational, Relation, Scalar, Sense};
//!
//! let q = Rational::from_i64;
//! let mut lp = LpProblem::new(Sense::Maximize, vec![q(1)]);
//! lp.add_constraint(vec![q(1)], Relation::Le, q(3));
//! let sol = solve(&lp).unwrap();
//! assert_eq!(sol.objective_value, q(3));
//! assert!(verify_certificate(&lp, &sol));
//! ```

mod certificate;
pub mod matrix;
mod problem;
pub mod scalar;
mod simplex;

pub use certificate::{check_certificate, verify_certificate, CertificateCheck};
pub use matrix::{dot, Matrix};
pub use problem::{Bound, Certificate, Constraint, LpError, LpProblem, LpSolution, Relation, Sense, Status};
pub use scalar::{float_tolerance, set_float_tolerance, Mode, Rational, Scalar, ScalarError, DEFAULT_FLOAT_TOLERANCE};
pub use simplex::{solve, solve_with, PivotRule, SolverOptions};
