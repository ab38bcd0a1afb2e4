//! Two-phase dense tableau simplex.
//!
//! The problem is brought to standard form `min c·x, A x = b, x ≥ 0, b ≥ 0`
//! by shifting, mirroring or splitting variables and adding slacks. Phase 1
//! minimizes the sum of artificials; phase 2 the real objective. In exact
//! mode a floating-point solve supplies the starting basis when it can.
//! Duals are recovered at the end by solving `Bᵀ y = c_B` against the
//! untouched standard-form matrix, then mapped back to the original
//! constraints.

use std::cmp::Ordering;

use crate::matrix::Matrix;
use crate::problem::{Bound, Certificate, Constraint, LpError, LpProblem, LpSolution, Relation, Status};
use crate::scalar::{Mode, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PivotRule {
    /// Bland in exact mode, Dantzig (with a Bland fallback) in float mode.
    Auto,
    /// Lowest-index entering and leaving variable; never cycles.
    Bland,
    /// Most negative reduced cost.
    Dantzig,
}

#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    pub pivot_rule: PivotRule,
    pub max_iterations: usize,
    /// In exact mode, first solve in floating point and start the exact
    /// phase from that basis when it is feasible.
    pub float_warm_start: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { pivot_rule: PivotRule::Auto, max_iterations: 1_000_000, float_warm_start: true }
    }
}

/// Solves the LP in the arithmetic mode of `S`.
pub fn solve<S: Scalar>(problem: &LpProblem<S>) -> Result<LpSolution<S>, LpError> {
    solve_with(problem, &SolverOptions::default())
}

pub fn solve_with<S: Scalar>(
    problem: &LpProblem<S>,
    options: &SolverOptions,
) -> Result<LpSolution<S>, LpError> {
    problem.validate()?;
    let std = StandardForm::build(problem);
    let mut tab = Tableau::new(&std);
    let rule = match options.pivot_rule {
        PivotRule::Auto => match S::MODE {
            Mode::Exact => PivotRule::Bland,
            Mode::Float => PivotRule::Dantzig,
        },
        r => r,
    };
    let mut iterations = 0;

    let warm = S::MODE == Mode::Exact && options.float_warm_start && tab.has_artificials();
    let start = if warm { float_start(problem, options) } else { None };
    let entered = match &start {
        Some(FloatStart::Feasible(b)) => tab.enter_basis(b, false),
        Some(FloatStart::Infeasible(b)) => tab.enter_basis(b, true),
        None => true,
    };
    if !entered {
        tab = Tableau::new(&std);
    }
    let feasible_start = entered && matches!(start, Some(FloatStart::Feasible(_)));
    if tab.has_artificials() && !feasible_start {
        let phase_one_costs: Vec<S> =
            (0..tab.ncols).map(|j| if j >= tab.first_artificial { S::one() } else { S::zero() }).collect();
        tab.load_objective(&phase_one_costs);
        match tab.run(rule, options.max_iterations, &mut iterations)? {
            Outcome::Optimal => {}
            Outcome::Unbounded => {
                return Err(LpError::Numerical("phase one reported unbounded".into()));
            }
        }
        if tab.objective_value().is_pos_tol() {
            return Ok(non_optimal(problem, Status::Infeasible, iterations));
        }
        tab.drive_out_artificials();
    }
    tab.drop_artificials();
    tab.load_objective(&std.costs);
    if let Outcome::Unbounded = tab.run(rule, options.max_iterations, &mut iterations)? {
        return Ok(non_optimal(problem, Status::Unbounded, iterations));
    }

    let std_values = tab.values();
    let primal = std.recover_primal(&std_values);
    let dual = std.recover_dual(&tab.basis)?;
    let sigma = problem.sigma();
    let dual: Vec<S> = dual.into_iter().map(|y| y * sigma.clone()).collect();
    let objective_value = crate::matrix::dot(&problem.objective, &primal);
    let certificate = crate::certificate::build_certificate(problem, &primal, &dual);
    Ok(LpSolution {
        status: Status::Optimal,
        primal,
        dual,
        objective_value,
        certificate: Some(certificate),
        iterations,
    })
}

enum FloatStart {
    /// Optimal basis over structural and slack columns.
    Feasible(Vec<usize>),
    /// Final phase-one basis, artificials included.
    Infeasible(Vec<usize>),
}

/// Solves a floating-point copy of the problem for its final basis.
fn float_start<S: Scalar>(problem: &LpProblem<S>, options: &SolverOptions) -> Option<FloatStart> {
    let float = LpProblem::<f64> {
        sense: problem.sense,
        objective: problem.objective.iter().map(Scalar::to_f64).collect(),
        constraints: problem
            .constraints
            .iter()
            .map(|c| Constraint {
                coeffs: c.coeffs.iter().map(Scalar::to_f64).collect(),
                relation: c.relation,
                rhs: c.rhs.to_f64(),
            })
            .collect(),
        bounds: problem
            .bounds
            .iter()
            .map(|b| Bound { lower: b.lower.as_ref().map(Scalar::to_f64), upper: b.upper.as_ref().map(Scalar::to_f64) })
            .collect(),
    };
    let std = StandardForm::build(&float);
    let mut tab = Tableau::new(&std);
    let mut iterations = 0;
    let limit = options.max_iterations;
    if tab.has_artificials() {
        tab.load_phase_one_objective();
        if !matches!(tab.run(PivotRule::Dantzig, limit, &mut iterations).ok()?, Outcome::Optimal) {
            return None;
        }
        if tab.objective_value().is_pos_tol() {
            return Some(FloatStart::Infeasible(tab.basis));
        }
        tab.drive_out_artificials();
    }
    tab.drop_artificials();
    tab.load_objective(&std.costs);
    match tab.run(PivotRule::Dantzig, limit, &mut iterations).ok()? {
        Outcome::Optimal => Some(FloatStart::Feasible(tab.basis)),
        Outcome::Unbounded => None,
    }
}

fn non_optimal<S: Scalar>(problem: &LpProblem<S>, status: Status, iterations: usize) -> LpSolution<S> {
    LpSolution {
        status,
        primal: vec![S::zero(); problem.num_vars()],
        dual: vec![S::zero(); problem.constraints.len()],
        objective_value: S::zero(),
        certificate: None::<Certificate<S>>,
        iterations,
    }
}

#[derive(Debug, Clone)]
enum VarMap<S> {
    /// `x = offset + x'`
    Shifted { col: usize, offset: S },
    /// `x = offset - x'`
    Mirrored { col: usize, offset: S },
    /// `x = x⁺ - x⁻`
    Split { pos: usize, neg: usize },
}

/// Standard-form copy of the problem (rows already sign-normalized).
struct StandardForm<S> {
    rows: Vec<Vec<S>>,
    rhs: Vec<S>,
    costs: Vec<S>,
    /// Column of the slack usable as an initial basic variable, per row.
    unit_slack: Vec<Option<usize>>,
    /// For each row, the original constraint it came from (`None` for bound rows)
    /// and the sign applied during normalization.
    origin: Vec<(Option<usize>, bool)>,
    vars: Vec<VarMap<S>>,
    num_constraints: usize,
}

impl<S: Scalar> StandardForm<S> {
    fn build(p: &LpProblem<S>) -> Self {
        let sigma = p.sigma();
        let mut vars = Vec::with_capacity(p.num_vars());
        let mut ncols = 0;
        let mut upper_rows: Vec<(usize, S)> = Vec::new();
        for b in &p.bounds {
            match (&b.lower, &b.upper) {
                (Some(l), u) => {
                    if let Some(u) = u {
                        upper_rows.push((ncols, u.clone() - l.clone()));
                    }
                    vars.push(VarMap::Shifted { col: ncols, offset: l.clone() });
                    ncols += 1;
                }
                (None, Some(u)) => {
                    vars.push(VarMap::Mirrored { col: ncols, offset: u.clone() });
                    ncols += 1;
                }
                (None, None) => {
                    vars.push(VarMap::Split { pos: ncols, neg: ncols + 1 });
                    ncols += 2;
                }
            }
        }
        let structural = ncols;

        let mut rows: Vec<Vec<S>> = Vec::new();
        let mut rhs = Vec::new();
        let mut rels = Vec::new();
        let mut origin = Vec::new();
        for (i, c) in p.constraints.iter().enumerate() {
            let mut row = vec![S::zero(); structural];
            let mut b = c.rhs.clone();
            for (j, a) in c.coeffs.iter().enumerate() {
                if a.is_zero() {
                    continue;
                }
                match &vars[j] {
                    VarMap::Shifted { col, offset } => {
                        row[*col] = a.clone();
                        b.sub_mul_assign(a, offset);
                    }
                    VarMap::Mirrored { col, offset } => {
                        row[*col] = -a.clone();
                        b.sub_mul_assign(a, offset);
                    }
                    VarMap::Split { pos, neg } => {
                        row[*pos] = a.clone();
                        row[*neg] = -a.clone();
                    }
                }
            }
            rows.push(row);
            rhs.push(b);
            rels.push(c.relation);
            origin.push(Some(i));
        }
        for (col, width) in upper_rows {
            let mut row = vec![S::zero(); structural];
            row[col] = S::one();
            rows.push(row);
            rhs.push(width);
            rels.push(Relation::Le);
            origin.push(None);
        }

        let num_slacks = rels.iter().filter(|r| **r != Relation::Eq).count();
        let total = structural + num_slacks;
        let mut unit_slack = Vec::with_capacity(rows.len());
        let mut next_slack = structural;
        let mut signed_origin = Vec::with_capacity(rows.len());
        for (i, row) in rows.iter_mut().enumerate() {
            row.resize(total, S::zero());
            let slack = match rels[i] {
                Relation::Le => {
                    row[next_slack] = S::one();
                    next_slack += 1;
                    Some(next_slack - 1)
                }
                Relation::Ge => {
                    row[next_slack] = -S::one();
                    next_slack += 1;
                    Some(next_slack - 1)
                }
                Relation::Eq => None,
            };
            let flip = rhs[i] < S::zero();
            if flip {
                for v in row.iter_mut() {
                    if !v.is_zero() {
                        *v = -v.clone();
                    }
                }
                rhs[i] = -rhs[i].clone();
            }
            unit_slack.push(slack.filter(|&s| row[s] == S::one()));
            signed_origin.push((origin[i], flip));
        }

        let mut costs = vec![S::zero(); total];
        for (j, c) in p.objective.iter().enumerate() {
            let c = c.clone() * sigma.clone();
            match &vars[j] {
                VarMap::Shifted { col, .. } => costs[*col] = c,
                VarMap::Mirrored { col, .. } => costs[*col] = -c,
                VarMap::Split { pos, neg } => {
                    costs[*pos] = c.clone();
                    costs[*neg] = -c;
                }
            }
        }

        StandardForm {
            rows,
            rhs,
            costs,
            unit_slack,
            origin: signed_origin,
            vars,
            num_constraints: p.constraints.len(),
        }
    }

    fn recover_primal(&self, std_values: &[S]) -> Vec<S> {
        self.vars
            .iter()
            .map(|v| match v {
                VarMap::Shifted { col, offset } => offset.clone() + std_values[*col].clone(),
                VarMap::Mirrored { col, offset } => offset.clone() - std_values[*col].clone(),
                VarMap::Split { pos, neg } => std_values[*pos].clone() - std_values[*neg].clone(),
            })
            .collect()
    }

    /// Multipliers of the minimization form, one per original constraint.
    fn recover_dual(&self, basis: &[usize]) -> Result<Vec<S>, LpError> {
        let m = basis.len();
        let mut dual = vec![S::zero(); self.num_constraints];
        if m == 0 {
            return Ok(dual);
        }
        // Bᵀ y = c_B restricted to a maximal independent set of rows; the
        // remaining rows are redundant and get multiplier zero.
        let mut full = Matrix::zeros(m, self.rows.len());
        for (k, &col) in basis.iter().enumerate() {
            for (r, row) in self.rows.iter().enumerate() {
                full[(k, r)] = row[col].clone();
            }
        }
        let kept = full.independent_columns();
        if kept.len() != m {
            return Err(LpError::Numerical("singular final basis".into()));
        }
        let bt = full.select_columns(&kept);
        let cb: Vec<S> = basis.iter().map(|&c| self.costs[c].clone()).collect();
        let y = bt
            .solve(&cb)
            .ok_or_else(|| LpError::Numerical("singular final basis".into()))?;
        for (i, &r) in kept.iter().enumerate() {
            if let (Some(orig), flip) = self.origin[r] {
                dual[orig] = if flip { -y[i].clone() } else { y[i].clone() };
            }
        }
        Ok(dual)
    }
}

enum Outcome {
    Optimal,
    Unbounded,
}

struct Tableau<S> {
    /// Each row holds coefficients followed by the right-hand side.
    rows: Vec<Vec<S>>,
    /// Reduced costs followed by `-objective`.
    obj: Vec<S>,
    basis: Vec<usize>,
    /// Columns `>= first_artificial` are artificial.
    first_artificial: usize,
    ncols: usize,
}

impl<S: Scalar> Tableau<S> {
    fn new(std: &StandardForm<S>) -> Self {
        let base_cols = std.costs.len();
        let needs_art: Vec<usize> =
            (0..std.rows.len()).filter(|&i| std.unit_slack[i].is_none()).collect();
        let ncols = base_cols + needs_art.len();
        let mut rows = Vec::with_capacity(std.rows.len());
        let mut basis = Vec::with_capacity(std.rows.len());
        let mut art = base_cols;
        for (i, r) in std.rows.iter().enumerate() {
            let mut row = r.clone();
            row.resize(ncols, S::zero());
            match std.unit_slack[i] {
                Some(s) => basis.push(s),
                None => {
                    row[art] = S::one();
                    basis.push(art);
                    art += 1;
                }
            }
            row.push(std.rhs[i].clone());
            rows.push(row);
        }
        Tableau {
            rows,
            obj: vec![S::zero(); ncols + 1],
            basis,
            first_artificial: base_cols,
            ncols,
        }
    }

    fn has_artificials(&self) -> bool {
        self.ncols > self.first_artificial
    }

    fn objective_value(&self) -> S {
        -self.obj[self.ncols].clone()
    }

    fn load_phase_one_objective(&mut self) {
        let mut obj = vec![S::zero(); self.ncols + 1];
        for (i, row) in self.rows.iter().enumerate() {
            if self.basis[i] >= self.first_artificial {
                for (j, v) in row.iter().enumerate() {
                    if j < self.first_artificial || j == self.ncols {
                        if !v.is_zero() {
                            obj[j] = obj[j].clone() - v.clone();
                        }
                    }
                }
            }
        }
        self.obj = obj;
    }

    fn load_objective(&mut self, costs: &[S]) {
        let mut obj: Vec<S> = costs[..self.ncols].to_vec();
        obj.push(S::zero());
        for (i, row) in self.rows.iter().enumerate() {
            let cb = &costs[self.basis[i]];
            if cb.is_zero() {
                continue;
            }
            for (j, v) in row.iter().enumerate() {
                obj[j].sub_mul_assign(cb, v);
            }
        }
        // Basic columns have exactly zero reduced cost.
        for &b in &self.basis {
            obj[b] = S::zero();
        }
        self.obj = obj;
    }

    /// Pivots the given columns into the basis of a fresh tableau. Succeeds
    /// when they are independent and the resulting point is feasible. Unless
    /// `keep_artificials`, the artificials still basic afterwards must sit at
    /// zero and are driven out.
    fn enter_basis(&mut self, columns: &[usize], keep_artificials: bool) -> bool {
        let mut locked = vec![false; self.rows.len()];
        for &c in columns {
            if c >= self.first_artificial && !keep_artificials {
                return false;
            }
            let Some(r) = (0..self.rows.len()).find(|&i| !locked[i] && !self.rows[i][c].is_zero()) else {
                return false;
            };
            self.pivot(r, c);
            locked[r] = true;
        }
        let rhs = self.ncols;
        if self.rows.iter().any(|row| row[rhs] < S::zero()) {
            return false;
        }
        if keep_artificials {
            return true;
        }
        let stuck = (0..self.rows.len()).any(|i| self.basis[i] >= self.first_artificial && !self.rows[i][rhs].is_zero());
        if stuck {
            return false;
        }
        self.drive_out_artificials();
        true
    }

    fn drive_out_artificials(&mut self) {
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.first_artificial {
                let col = (0..self.first_artificial).find(|&j| !self.rows[i][j].is_zero_tol());
                match col {
                    Some(j) => {
                        self.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        // Redundant row.
                        self.rows.remove(i);
                        self.basis.remove(i);
                    }
                }
            } else {
                i += 1;
            }
        }
    }

    fn drop_artificials(&mut self) {
        let keep = self.first_artificial;
        if keep == self.ncols {
            return;
        }
        for row in self.rows.iter_mut() {
            let rhs = row[self.ncols].clone();
            row.truncate(keep);
            row.push(rhs);
        }
        self.ncols = keep;
        self.obj = vec![S::zero(); keep + 1];
    }

    fn values(&self) -> Vec<S> {
        let mut v = vec![S::zero(); self.ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            v[b] = self.rows[i][self.ncols].clone();
        }
        v
    }

    fn run(&mut self, rule: PivotRule, max_iter: usize, iterations: &mut usize) -> Result<Outcome, LpError> {
        let mut degenerate_streak = 0usize;
        loop {
            let use_bland = rule == PivotRule::Bland || degenerate_streak > 64;
            let Some(col) = self.entering(use_bland) else {
                return Ok(Outcome::Optimal);
            };
            let Some(row) = self.leaving(col, use_bland) else {
                return Ok(Outcome::Unbounded);
            };
            if self.rows[row][self.ncols].is_zero_tol() {
                degenerate_streak += 1;
            } else {
                degenerate_streak = 0;
            }
            self.pivot(row, col);
            *iterations += 1;
            if *iterations >= max_iter {
                return Err(LpError::IterationLimit(max_iter));
            }
        }
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let candidates = (0..self.ncols).filter(|&j| self.obj[j].is_neg_tol());
        if bland {
            candidates.into_iter().next()
        } else {
            candidates.min_by(|&a, &b| self.obj[a].partial_cmp(&self.obj[b]).unwrap_or(Ordering::Equal))
        }
    }

    /// Ratio test; ties go to the lowest basic index under Bland's rule and
    /// to the largest pivot element otherwise.
    fn leaving(&self, col: usize, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, S)> = None;
        for (i, row) in self.rows.iter().enumerate() {
            let a = &row[col];
            if !a.is_pos_tol() {
                continue;
            }
            let ratio = row[self.ncols].clone() / a.clone();
            best = match best {
                None => Some((i, ratio)),
                Some((bi, br)) => match ratio.tol_cmp(&br) {
                    Ordering::Less => Some((i, ratio)),
                    Ordering::Equal if bland && self.basis[i] < self.basis[bi] => Some((i, ratio)),
                    Ordering::Equal if !bland && self.rows[bi][col] < *a => Some((i, ratio)),
                    _ => Some((bi, br)),
                },
            };
        }
        best.map(|(i, _)| i)
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.ncols + 1;
        let inv = S::one() / self.rows[r][c].clone();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v = v.clone() * inv.clone();
            }
        }
        self.rows[r][c] = S::one();
        let prow = self.rows[r].clone();
        let nz: Vec<usize> = (0..width).filter(|&j| !prow[j].is_zero()).collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c].clone();
            if f.is_zero() {
                continue;
            }
            for &j in &nz {
                row[j].sub_mul_assign(&f, &prow[j]);
            }
            row[c] = S::zero();
            if S::MODE == Mode::Float {
                // Keep the basic feasible solution feasible against round-off.
                if row[width - 1] < S::zero() && row[width - 1].is_zero_tol() {
                    row[width - 1] = S::zero();
                }
            }
        }
        let f = self.obj[c].clone();
        if !f.is_zero() {
            for &j in &nz {
                self.obj[j].sub_mul_assign(&f, &prow[j]);
            }
            self.obj[c] = S::zero();
        }
        self.basis[r] = c;
    }
}
