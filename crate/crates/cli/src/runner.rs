//! Executes scenario tasks in order and collects their reports.

use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use lipfree::complexify::{build_circle_model, complex_lifting, complex_structure, delta_c_check, q_operator, y_generators};
use lipfree::cube::{cube_lifting, CubeOptions, GridSpec};
use lipfree::equivariance::{
    average_lifting, basis_lifting, check_equivariant, close_group, min_norm_lifting, splitting_equivalences,
    FiniteGroupAction, SplittingInput, DEFAULT_GROUP_CAP,
};
use lipfree::free_space::{free_norms, molecule, within_gap};
use lipfree::operators::{barycenter, dual_projection_from_lifting, op_norm};
use lipfree::{
    Error, FreeVector, LinearMap, LipFunction, Matrix, MetricViolation, Mode, PointedMetricSpace, PolyhedralNorm, Rational, Scalar,
    Space,
};
use serde_json::{json, Value};

use crate::report::{self, num, Report, TaskReport};
use crate::scenario::{self, Literal, NormSpec, ParseError, PointRef, Scenario, SparseSpec, TaskSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_CAPACITY: i32 = 4;
pub const EXIT_INVARIANT: i32 = 5;

/// Command-line overrides.
#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub mode: Option<Mode>,
    pub tolerance: Option<f64>,
    pub group_cap: Option<usize>,
    pub grid_cap: Option<usize>,
    /// Run only tasks of this kind (a default one when the scenario has none).
    pub only: Option<String>,
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capacity { .. } => EXIT_CAPACITY,
        Error::Infeasible(_) | Error::Consistency(_) | Error::Lp(_) => EXIT_INVARIANT,
        _ => EXIT_VALIDATION,
    }
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
    witness: Value,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure { code, message: message.into(), witness: Value::Null }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::new(exit_code(&e), e.to_string())
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        Failure::new(EXIT_PARSE, e.0)
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn now() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

/// Runs a parsed scenario in the mode chosen by the flags or the scenario.
pub fn run_scenario(scenario: &Scenario, flags: &Flags) -> Report {
    let mode = flags.mode.or(scenario.mode.map(|m| m.mode())).unwrap_or(Mode::Exact);
    let tolerance = match mode {
        Mode::Float => float_tolerance(scenario, flags),
        Mode::Exact => Ok(None),
    };
    let tolerance = match tolerance {
        Ok(t) => t,
        Err(f) => return failed_setup(scenario, mode, f),
    };
    if let Some(t) = tolerance {
        lipfree_lp::set_float_tolerance(t);
    }
    let mut report = match mode {
        Mode::Exact => Runner::<Rational>::new(scenario, flags).run(),
        Mode::Float => Runner::<f64>::new(scenario, flags).run(),
    };
    report.tolerance = Some(tolerance.unwrap_or_else(lipfree_lp::float_tolerance));
    report
}

/// Reads and runs a scenario file; unreadable or malformed files give a
/// report with exit code 2.
pub fn run_path(path: &std::path::Path, flags: &Flags) -> Report {
    match Scenario::from_path(path) {
        Ok(s) => run_scenario(&s, flags),
        Err(e) => Report {
            scenario: path.display().to_string(),
            mode: flags.mode.unwrap_or(Mode::Exact),
            tolerance: None,
            generated_at: now(),
            space: None,
            tasks: Vec::new(),
            setup_error: Some((EXIT_PARSE, e.0, Value::Null)),
        },
    }
}

fn float_tolerance(scenario: &Scenario, flags: &Flags) -> Outcome<Option<f64>> {
    if let Some(t) = flags.tolerance {
        return Ok(Some(t));
    }
    match scenario.tolerances.as_ref().and_then(|t| t.float.as_ref()) {
        Some(lit) => Ok(Some(scenario::scalar::<f64>(lit, "tolerances.float")?)),
        None => Ok(None),
    }
}

fn failed_setup(scenario: &Scenario, mode: Mode, f: Failure) -> Report {
    Report {
        scenario: scenario.name.clone().unwrap_or_default(),
        mode,
        tolerance: None,
        generated_at: now(),
        space: None,
        tasks: Vec::new(),
        setup_error: Some((f.code, f.message, f.witness)),
    }
}

fn parse_norm<S: Scalar>(spec: &NormSpec, dim: usize, context: &str) -> Outcome<PolyhedralNorm<S>> {
    let (kind, explicit_dim, vertices) = match spec {
        NormSpec::Name(n) => (n.as_str(), None, None),
        NormSpec::Full { kind, dim, vertices } => (kind.as_str(), *dim, vertices.as_ref()),
    };
    let dim = explicit_dim.unwrap_or(dim);
    match kind {
        "l1" => Ok(PolyhedralNorm::l1(dim)),
        "linf" => Ok(PolyhedralNorm::linf(dim)),
        "polytope" => {
            let v = vertices.ok_or_else(|| Failure::new(EXIT_PARSE, format!("{context}: polytope needs vertices")))?;
            let rows: Vec<Vec<S>> =
                v.iter().map(|r| scenario::vector(r, context)).collect::<Result<_, _>>()?;
            Ok(PolyhedralNorm::polytope(rows)?)
        }
        other => Err(Failure::new(
            EXIT_PARSE,
            format!("{context}: unknown norm \"{other}\"; expected l1, linf or polytope"),
        )),
    }
}

struct Runner<'a, S: Scalar> {
    scenario: &'a Scenario,
    flags: &'a Flags,
    space: Option<Space<S>>,
    norm: Option<Arc<PolyhedralNorm<S>>>,
    group: Option<FiniteGroupAction<S>>,
    liftings: Vec<(String, LinearMap<S>)>,
    reports: Vec<TaskReport>,
}

impl<'a, S: Scalar> Runner<'a, S> {
    fn new(scenario: &'a Scenario, flags: &'a Flags) -> Self {
        Runner { scenario, flags, space: None, norm: None, group: None, liftings: Vec::new(), reports: Vec::new() }
    }

    fn run(mut self) -> Report {
        let mut report = Report {
            scenario: self.scenario.name.clone().unwrap_or_default(),
            mode: S::MODE,
            tolerance: None,
            generated_at: now(),
            space: None,
            tasks: Vec::new(),
            setup_error: None,
        };
        if let Err(f) = self.setup() {
            report.space = self.space.as_ref().map(|s| self.space_json(s));
            report.setup_error = Some((f.code, f.message, f.witness));
            return report;
        }
        report.space = self.space.as_ref().map(|s| self.space_json(s));
        let tasks = match self.task_list() {
            Ok(t) => t,
            Err(f) => {
                report.setup_error = Some((f.code, f.message, f.witness));
                return report;
            }
        };
        for (index, task) in tasks.iter().enumerate() {
            let mut tr = TaskReport::new(index, task.kind());
            if S::MODE == Mode::Float {
                tr.certification = "tolerance-recomputation";
            }
            if let Err(f) = self.run_task(task, &mut tr) {
                tr.error = Some(f.message);
                tr.exit_code = f.code;
                if !f.witness.is_null() {
                    tr.put("witness", f.witness);
                }
                self.reports.push(tr);
                break;
            }
            self.reports.push(tr);
        }
        report.tasks = self.reports;
        report
    }

    fn task_list(&self) -> Outcome<Vec<TaskSpec>> {
        let Some(kind) = &self.flags.only else {
            return Ok(self.scenario.tasks.clone());
        };
        let matching: Vec<TaskSpec> = self.scenario.tasks.iter().filter(|t| t.kind() == kind).cloned().collect();
        if !matching.is_empty() {
            return Ok(matching);
        }
        TaskSpec::default_for(kind).map(|t| vec![t]).ok_or_else(|| {
            Failure::new(EXIT_VALIDATION, format!("the scenario has no {kind} task and {kind} has no defaults"))
        })
    }

    fn setup(&mut self) -> Outcome<()> {
        if let Some(spec) = &self.scenario.space {
            let (space, norm) = self.build_space(spec)?;
            let violations = space.validate();
            if !violations.is_empty() {
                self.space = Some(Arc::new(space));
                return Err(Failure {
                    code: EXIT_VALIDATION,
                    message: format!("space: invalid metric: {}", violations[0]),
                    witness: Value::Array(violations.iter().map(violation_json).collect()),
                });
            }
            self.space = Some(Arc::new(space));
            self.norm = norm.map(Arc::new);
        }
        if let Some(g) = &self.scenario.group {
            let (space, norm) = self.normed_space("group")?;
            let gens: Vec<Matrix<S>> =
                g.generators.iter().map(|m| scenario::matrix(m, "group.generators")).collect::<Result<_, _>>()?;
            let cap = self.flags.group_cap.unwrap_or(DEFAULT_GROUP_CAP);
            let group = close_group(&gens, &space, &norm, cap)?;
            if let Some(flag) = g.isometric {
                if group.is_isometric()? != flag {
                    return Err(Failure::new(
                        EXIT_VALIDATION,
                        format!("group: declared isometric = {flag}, but the action is {}", if flag { "not isometric" } else { "isometric" }),
                    ));
                }
            }
            self.group = Some(group);
        }
        Ok(())
    }

    fn build_space(
        &self,
        spec: &scenario::SpaceSpec,
    ) -> Outcome<(PointedMetricSpace<S>, Option<PolyhedralNorm<S>>)> {
        match (&spec.points, &spec.distances) {
            (Some(points), None) => {
                let coords: Vec<Vec<S>> =
                    points.iter().map(|p| scenario::vector(p, "space.points")).collect::<Result<_, _>>()?;
                let dim = coords.first().map_or(0, Vec::len);
                let norm_spec = spec
                    .norm
                    .as_ref()
                    .ok_or_else(|| Failure::new(EXIT_PARSE, "space: points need a norm"))?;
                let norm = parse_norm::<S>(norm_spec, dim, "space.norm")?;
                let origin = coords.iter().position(|p| p.iter().all(|x| x.is_zero()));
                let provisional = PointedMetricSpace::induced(&norm, coords.clone(), 0, spec.labels.clone())?;
                let base = match &spec.base {
                    Some(r) => resolve_point(&provisional, r, "space.base")?,
                    None => origin.unwrap_or(0),
                };
                let space = PointedMetricSpace::induced(&norm, coords, base, spec.labels.clone())?;
                Ok((space, Some(norm)))
            }
            (None, Some(rows)) => {
                let dist = scenario::matrix::<S>(rows, "space.distances")?;
                let n = dist.rows();
                let labels = spec.labels.clone().unwrap_or_else(|| (0..n).map(|i| format!("p{i}")).collect());
                let provisional = PointedMetricSpace::from_distances(labels.clone(), 0, dist.clone())?;
                let base = match &spec.base {
                    Some(r) => resolve_point(&provisional, r, "space.base")?,
                    None => 0,
                };
                Ok((PointedMetricSpace::from_distances(labels, base, dist)?, None))
            }
            _ => Err(Failure::new(EXIT_PARSE, "space: give exactly one of points or distances")),
        }
    }

    fn space_json(&self, space: &Space<S>) -> Value {
        let mut v = json!({
            "points": space.len(),
            "labels": space.labels(),
            "base": space.label(space.base()),
            "free_coordinates": space.non_base_points().map(|p| space.label(p)).collect::<Vec<_>>(),
            "distances": report::matrix(space.distances()),
        });
        if let Some(c) = space.coords() {
            v["coordinates"] = Value::Array(c.iter().map(|p| report::nums(p)).collect());
        }
        if let Some(n) = &self.norm {
            v["norm"] = norm_json(n);
        }
        if let Some(g) = &self.group {
            v["group"] = json!({ "order": g.order(), "cayley_table_size": g.cayley().len() * g.cayley().len() });
        }
        v
    }

    fn need_space(&self, task: &str) -> Outcome<Space<S>> {
        self.space.clone().ok_or_else(|| Failure::new(EXIT_VALIDATION, format!("{task}: the scenario has no space")))
    }

    fn normed_space(&self, task: &str) -> Outcome<(Space<S>, Arc<PolyhedralNorm<S>>)> {
        let space = self.need_space(task)?;
        let norm = self.norm.clone().ok_or_else(|| {
            Failure::new(EXIT_VALIDATION, format!("{task}: the space must be given by points in a normed space"))
        })?;
        Ok((space, norm))
    }

    fn need_group(&self, task: &str) -> Outcome<&FiniteGroupAction<S>> {
        self.group.as_ref().ok_or_else(|| Failure::new(EXIT_VALIDATION, format!("{task}: the scenario has no group")))
    }

    fn lifting(&self, name: &str) -> Outcome<LinearMap<S>> {
        self.liftings
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t.clone())
            .ok_or_else(|| Failure::new(EXIT_VALIDATION, format!("no lifting named \"{name}\"")))
    }

    /// Named lifting, or the most recent one, or the basis lifting.
    fn lifting_or_default(&self, from: &Option<String>) -> Outcome<(String, LinearMap<S>)> {
        if let Some(n) = from {
            return Ok((n.clone(), self.lifting(n)?));
        }
        if let Some((n, t)) = self.liftings.last() {
            return Ok((n.clone(), t.clone()));
        }
        let (space, norm) = self.normed_space("lifting")?;
        Ok(("basis".into(), basis_lifting(&space, &norm)?))
    }

    fn store(&mut self, name: String, t: LinearMap<S>) {
        self.liftings.push((name, t));
    }

    fn sparse_vector(&self, space: &Space<S>, spec: &SparseSpec, context: &str) -> Outcome<FreeVector<S>> {
        let mut entries = Vec::with_capacity(spec.len());
        for (label, lit) in spec {
            let p = space
                .index_of(label)
                .ok_or_else(|| Failure::new(EXIT_VALIDATION, format!("{context}: unknown point \"{label}\"")))?;
            entries.push((p, scenario::scalar::<S>(lit, context)?));
        }
        let mut mu = FreeVector::zero(space);
        for (p, c) in entries {
            mu = mu.add(&FreeVector::delta(space, p).scale(&c))?;
        }
        Ok(mu)
    }

    fn run_task(&mut self, task: &TaskSpec, tr: &mut TaskReport) -> Outcome<()> {
        match task {
            TaskSpec::Validate => self.validate(tr),
            TaskSpec::FreeNorm { vectors, molecules } => self.free_norm(tr, vectors, *molecules),
            TaskSpec::Lift { name, min_norm } => self.lift(tr, name, *min_norm),
            TaskSpec::Average { name, from } => self.average(tr, name, from),
            TaskSpec::EquivariantLift { name, bound } => self.equivariant_lift(tr, name, bound),
            TaskSpec::Split { from, complement, projection } => self.split(tr, from, complement, projection),
            TaskSpec::Dualize { from, function } => self.dualize(tr, from, function),
            TaskSpec::Complexify { min_norm } => self.complexify(tr, min_norm.unwrap_or(true)),
            TaskSpec::CubeLift { d, q, norm, tol_grid, alpha, op_norm } => {
                self.cube_lift(tr, *d, *q, norm, tol_grid, alpha, op_norm.unwrap_or(true))
            }
            TaskSpec::Report => {
                let list: Vec<Value> = self
                    .reports
                    .iter()
                    .map(|t| json!({ "index": t.index, "task": t.task, "pass": t.pass(), "failed": t.failed_checks() }))
                    .collect();
                tr.check("previous_tasks_pass", self.reports.iter().all(TaskReport::pass));
                tr.put("tasks", Value::Array(list));
                Ok(())
            }
        }
    }

    fn validate(&mut self, tr: &mut TaskReport) -> Outcome<()> {
        let space = self.need_space("validate")?;
        let violations: Vec<Value> = space.validate().iter().map(violation_json).collect();
        tr.check("metric_axioms", violations.is_empty());
        tr.put("points", json!(space.len()));
        tr.put("base", json!(space.label(space.base())));
        tr.put("violations", json!(violations));
        if let Some(norm) = &self.norm {
            tr.put("norm", norm_json(norm));
            tr.put("extreme_points", json!(norm.extreme_points()?.len()));
            tr.check("points_span_space", barycenter(&space, norm)?.matrix.rank() == norm.dim());
        }
        if let Some(g) = &self.group {
            tr.put("group_order", json!(g.order()));
            tr.put("isometric", json!(g.is_isometric()?));
            tr.put("max_operator_norm", num(&g.max_operator_norm()?));
        }
        Ok(())
    }

    fn free_norm(&mut self, tr: &mut TaskReport, vectors: &[SparseSpec], molecules: bool) -> Outcome<()> {
        let space = self.need_space("free-norm")?;
        tr.certification = "lp-certificate";
        let mut inputs: Vec<FreeVector<S>> = Vec::new();
        for (i, v) in vectors.iter().enumerate() {
            inputs.push(self.sparse_vector(&space, v, &format!("free-norm vector {i}"))?);
        }
        let given = inputs.len();
        let mut pairs = Vec::new();
        if molecules {
            for x in 0..space.len() {
                for y in x + 1..space.len() {
                    pairs.push((x, y));
                    inputs.push(molecule(&space, x, y)?);
                }
            }
        }
        let norms = free_norms(&inputs)?;
        let mut gaps_closed = true;
        let mut isometric = true;
        let mut out = Vec::new();
        for (i, (mu, res)) in inputs.iter().zip(&norms).enumerate() {
            gaps_closed &= within_gap(&res.gap, &res.value);
            let mut entry = json!({
                "vector": report::free_vector(mu),
                "value": num(&res.value),
                "gap": num(&res.gap),
                "witness_f": report::lip_function(&res.witness_f),
                "witness_flow": res.witness_flow.iter().map(|t| json!([space.label(t.from), space.label(t.to), num(&t.weight)])).collect::<Vec<_>>(),
            });
            if i >= given {
                let (x, y) = pairs[i - given];
                let d = space.dist(x, y);
                isometric &= res.value.approx_eq(d);
                entry["distance"] = num(d);
            }
            out.push(entry);
        }
        tr.check("gaps_closed", gaps_closed);
        if molecules {
            tr.check("molecules_isometric", isometric);
        }
        tr.put("norms", Value::Array(out));
        Ok(())
    }

    fn lift(&mut self, tr: &mut TaskReport, name: &Option<String>, min_norm: bool) -> Outcome<()> {
        let (space, norm) = self.normed_space("lift")?;
        let t0 = basis_lifting(&space, &norm)?;
        let beta = barycenter(&space, &norm)?;
        let n = op_norm(&t0)?;
        let name = name.clone().unwrap_or_else(|| "T0".into());
        tr.check("beta_identity", beta.compose(&t0)?.matrix.approx_eq(&Matrix::identity(norm.dim())));
        tr.put("name", json!(name));
        tr.put("lifting", report::linear_map(&t0));
        tr.put("op_norm", num(&n.value));
        tr.put("op_norm_argmax", report::nums(&n.argmax));
        if min_norm {
            let best = min_norm_lifting(&space, &norm, None, None)?;
            tr.check("min_norm_recomputed", best.recomputed_norm.approx_eq(&best.value));
            tr.put("min_norm", num(&best.value));
            tr.put("min_norm_lifting", report::linear_map(&best.lifting));
        }
        self.store(name, t0);
        Ok(())
    }

    fn average(&mut self, tr: &mut TaskReport, name: &Option<String>, from: &Option<String>) -> Outcome<()> {
        let (space, norm) = self.normed_space("average")?;
        let group = self.need_group("average")?.clone();
        let (source, t0) = self.lifting_or_default(from)?;
        let beta = barycenter(&space, &norm)?;
        let before = check_equivariant(&t0, &group)?;
        let t = average_lifting(&t0, &group)?;
        let after = check_equivariant(&t, &group)?;
        let n0 = op_norm(&t0)?.value;
        let n = op_norm(&t)?.value;
        let c = group.max_operator_norm()?;
        let bound = c.clone() * c.clone() * n0.clone();
        let isometric = group.is_isometric()?;
        tr.check("beta_identity", beta.compose(&t)?.matrix.approx_eq(&Matrix::identity(norm.dim())));
        tr.check("equivariant", after.max_deviation.is_zero_tol());
        tr.check("norm_bound", n.le_tol(&bound));
        if isometric && n0.approx_eq(&S::one()) {
            tr.check("norm_one_preserved", n.le_tol(&S::one()));
        }
        let name = name.clone().unwrap_or_else(|| "T".into());
        tr.put("name", json!(name));
        tr.put("from", json!(source));
        tr.put("group_order", json!(group.order()));
        tr.put("isometric", json!(isometric));
        tr.put("max_operator_norm", num(&c));
        tr.put(
            "deviation_before",
            json!({ "max_deviation": num(&before.max_deviation), "witness": report::matrix(group.element(before.witness)) }),
        );
        tr.put("deviation_after", num(&after.max_deviation));
        tr.put("op_norm_before", num(&n0));
        tr.put("op_norm", num(&n));
        tr.put("norm_bound", num(&bound));
        tr.put("lifting", report::linear_map(&t));
        self.store(name, t);
        Ok(())
    }

    fn equivariant_lift(&mut self, tr: &mut TaskReport, name: &Option<String>, bound: &Option<Literal>) -> Outcome<()> {
        let (space, norm) = self.normed_space("equivariant-lift")?;
        tr.certification = "lp-certificate";
        let bound: Option<S> = bound.as_ref().map(|b| scenario::scalar(b, "equivariant-lift.bound")).transpose()?;
        let group = self.group.clone();
        tr.put("group_order", json!(group.as_ref().map_or(1, FiniteGroupAction::order)));
        if let Some(b) = &bound {
            tr.put("bound", num(b));
        }
        match min_norm_lifting(&space, &norm, group.as_ref(), bound.as_ref()) {
            Ok(best) => {
                tr.check("feasible", true);
                tr.check("recomputed_norm_matches", best.recomputed_norm.approx_eq(&best.value));
                if let Some(g) = &group {
                    tr.check("equivariant", check_equivariant(&best.lifting, g)?.max_deviation.is_zero_tol());
                }
                let beta = barycenter(&space, &norm)?;
                tr.check("beta_identity", beta.compose(&best.lifting)?.matrix.approx_eq(&Matrix::identity(norm.dim())));
                let name = name.clone().unwrap_or_else(|| "T_min".into());
                tr.put("name", json!(name));
                tr.put("value", num(&best.value));
                tr.put("recomputed_norm", num(&best.recomputed_norm));
                tr.put("lifting", report::linear_map(&best.lifting));
                self.store(name, best.lifting);
                Ok(())
            }
            Err(Error::Infeasible(_)) => {
                tr.check("feasible", false);
                tr.put("message", json!("no G-equivariant lifting over this M within the bound"));
                Ok(())
            }
            Err(e) => Err(e.into()),
        }
    }

    fn split(
        &mut self,
        tr: &mut TaskReport,
        from: &Option<String>,
        complement: &Option<Vec<Vec<Literal>>>,
        projection: &Option<Vec<Vec<Literal>>>,
    ) -> Outcome<()> {
        let (space, norm) = self.normed_space("split")?;
        let input = match (complement, projection) {
            (Some(w), None) => {
                tr.put("input", json!("complement"));
                SplittingInput::Complement(scenario::matrix(w, "split.complement")?)
            }
            (None, Some(p)) => {
                tr.put("input", json!("projection"));
                SplittingInput::Projection(scenario::matrix(p, "split.projection")?)
            }
            (None, None) => {
                let (source, t) = self.lifting_or_default(from)?;
                tr.put("input", json!("lifting"));
                tr.put("from", json!(source));
                SplittingInput::Lifting(t)
            }
            _ => return Err(Failure::new(EXIT_PARSE, "split: give at most one of complement and projection")),
        };
        let r = splitting_equivalences(&input, &space, &norm, self.group.as_ref())?;
        tr.check("direct_sum", r.direct_sum);
        tr.check("complement_invariant", r.complement_invariant);
        tr.check("projection_equivariant", r.projection_equivariant);
        tr.check("lifting_is_right_inverse", r.lifting_is_right_inverse);
        tr.check("lifting_equivariant", r.lifting_equivariant);
        tr.check("t_beta_commutes", r.t_beta_commutes);
        tr.check("round_trip", r.round_trip);
        tr.check("preimage_independent", r.preimage_independent);
        tr.put("lifting", report::linear_map(&r.lifting));
        tr.put("complement", report::matrix(&r.complement));
        tr.put("projection", report::matrix(&r.projection));
        Ok(())
    }

    fn dualize(&mut self, tr: &mut TaskReport, from: &Option<String>, function: &Option<SparseSpec>) -> Outcome<()> {
        let (space, norm) = self.normed_space("dualize")?;
        let (source, t) = self.lifting_or_default(from)?;
        let beta = barycenter(&space, &norm)?;
        let p = dual_projection_from_lifting(&t, &beta)?;
        tr.put("from", json!(source));
        tr.check("idempotent", p.compose(&p)?.matrix.approx_eq(&p.matrix));
        let rank = p.matrix.rank();
        tr.check("range_dimension", rank == norm.dim());
        tr.put("range_dimension", json!(rank));
        tr.put("projection", report::linear_map(&p));
        match op_norm(&p) {
            Ok(n) => {
                tr.put("op_norm", num(&n.value));
                tr.put("norm_one", json!(n.value.approx_eq(&S::one())));
            }
            Err(Error::Capacity { what, needed, cap }) => {
                tr.put("op_norm", Value::Null);
                tr.put("op_norm_skipped", json!(format!("{what}: {needed} exceeds capacity {cap}")));
            }
            Err(e) => return Err(e.into()),
        }
        if let Some(spec) = function {
            let mut values = vec![S::zero(); space.len()];
            for (label, lit) in spec {
                let i = space
                    .index_of(label)
                    .ok_or_else(|| Failure::new(EXIT_VALIDATION, format!("dualize.function: unknown point \"{label}\"")))?;
                values[i] = scenario::scalar(lit, "dualize.function")?;
            }
            let f = LipFunction::new(&space, values)?;
            let image = p.apply(&f.to_free_coords())?;
            tr.put("function", report::lip_function(&f));
            tr.put("image", report::lip_function(&LipFunction::from_free_coords(&space, &image)?));
        }
        Ok(())
    }

    fn complexify(&mut self, tr: &mut TaskReport, with_min_norm: bool) -> Outcome<()> {
        let (space, norm) = self.normed_space("complexify")?;
        let circle = self
            .scenario
            .circle
            .as_ref()
            .ok_or_else(|| Failure::new(EXIT_VALIDATION, "complexify: the scenario has no circle"))?;
        let j: Matrix<S> = scenario::matrix(&circle.j, "circle.J")?;
        let model = build_circle_model(&space, &norm, j.clone(), circle.k)?;
        let q = q_operator(&model)?;
        tr.put("k", json!(circle.k));
        tr.put("group_order", json!(model.action().order()));
        tr.put("y_generators", json!(y_generators(&model).len()));
        tr.check("q_idempotent", q.idempotent);
        tr.check("qp_zero", q.qp_zero);
        tr.check("range_p_in_span_y", q.range_p_in_span_y);
        tr.check("y_in_ker_q", q.y_in_ker_q);
        tr.check("ker_q_is_span_y", q.ker_q_is_span_y);
        tr.check("beta_kills_y", q.beta_kills_y);
        tr.check("rank_sum", q.rank_sum_ok);
        tr.check("q_norm_at_most_sqrt2", q.op_norm_ok);
        if circle.k == 4 {
            tr.check("rank_q_half", q.rank_q * 2 == space.len() - 1);
        }
        tr.put("q", report::matrix(&q.q.matrix));
        tr.put("rank_q", json!(q.rank_q));
        tr.put("rank_p", json!(q.rank_p));
        tr.put("q_op_norm", num(&q.op_norm));
        tr.put("idempotence_residual", num(&q.idempotence_residual));

        let dc = delta_c_check(&model)?;
        if dc.applicable {
            tr.check("delta_c_isometric", dc.pass);
        }
        tr.put(
            "delta_c",
            json!({
                "applicable": dc.applicable,
                "status": dc.status,
                "max_deviation": num(&dc.max_deviation),
                "pairs": dc.pairs.iter().map(|p| json!({
                    "a": space.label(p.a),
                    "b": space.label(p.b),
                    "quotient_norm": num(&p.quotient),
                    "distance": num(&p.distance),
                    "deviation": num(&p.deviation),
                })).collect::<Vec<_>>(),
            }),
        );

        let cs = complex_structure(&model, &q.q)?;
        tr.check("j_f_well_defined", cs.well_defined);
        tr.check("j_f_squares_to_minus_id", cs.squares_to_minus_id);
        tr.check("j_f_commutes_with_rotation", cs.commutes_with_rotation);
        tr.put("j_f", report::matrix(&cs.j_f.matrix));

        let cl = complex_lifting(&model, &q.q, &cs.j_f, with_min_norm)?;
        tr.check("t_c_beta_identity", cl.beta_identity);
        tr.check("t_c_complex_linear", cl.complex_linear);
        tr.check("t_equivariant", cl.equivariant_deviation.is_zero_tol());
        tr.check("t_c_beta_idempotent", cl.projection_idempotent);
        if let Some(one) = cl.one_complemented {
            tr.check("one_complemented", one);
        }
        tr.put("t", report::linear_map(&cl.t));
        tr.put("t_c", report::linear_map(&cl.t_c));
        tr.put("op_norm_t", num(&cl.op_norm_t));
        tr.put(
            "extreme_values",
            Value::Array(
                cl.extreme_values
                    .iter()
                    .map(|e| json!({ "point": report::nums(&e.point), "z_norm": num(&e.z_norm), "quotient_norm": num(&e.quotient_norm) }))
                    .collect(),
            ),
        );
        tr.put("min_equivariant_norm", cl.min_equivariant_norm.as_ref().map_or(Value::Null, num));
        tr.put("one_complemented", cl.one_complemented.map_or(Value::Null, Value::Bool));
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn cube_lift(
        &mut self,
        tr: &mut TaskReport,
        d: usize,
        q: usize,
        norm_spec: &NormSpec,
        tol_grid: &Option<Literal>,
        alpha: &Option<Vec<Literal>>,
        with_op_norm: bool,
    ) -> Outcome<()> {
        if d == 0 || q == 0 {
            return Err(Failure::new(EXIT_VALIDATION, "cube-lift: d and q must be positive"));
        }
        let norm = Arc::new(parse_norm::<S>(norm_spec, d, "cube-lift.norm")?);
        if norm.dim() != d {
            return Err(Failure::new(EXIT_VALIDATION, "cube-lift: norm dimension differs from d"));
        }
        let mut spec = GridSpec::<S>::new(d, q);
        if let Some(a) = alpha {
            spec.alpha = scenario::vector(a, "cube-lift.alpha")?;
            if spec.alpha.len() != d || spec.alpha.iter().any(|x| !x.is_pos_tol()) {
                return Err(Failure::new(EXIT_VALIDATION, "cube-lift: alpha needs d positive entries"));
            }
        }
        if let Some(cap) = self.flags.grid_cap {
            spec.cap = cap;
        }
        let mut options = CubeOptions::<S> { compute_op_norm: with_op_norm, ..CubeOptions::default() };
        let tol = tol_grid.as_ref().or_else(|| self.scenario.tolerances.as_ref().and_then(|t| t.grid.as_ref()));
        if let Some(t) = tol {
            options.tol_grid = scenario::scalar(t, "cube-lift.tol_grid")?;
        }
        let res = cube_lifting(&spec, &norm, &options)?;
        tr.check("beta_identity", res.beta_identity);
        tr.check("sign_equivariant", res.max_sign_deviation.is_zero_tol());
        tr.check("phi_norms_within", res.phi_norms_within);
        if let Some(ok) = res.op_norm_within {
            tr.check("op_norm_within", ok);
        }
        tr.put("d", json!(d));
        tr.put("q", json!(q));
        tr.put("norm", norm_json(&norm));
        tr.put("tol_grid", num(&options.tol_grid));
        tr.put("points", json!(res.space.len()));
        tr.put("signs_checked", json!(res.signs_checked));
        tr.put("signs_enumerated", json!(res.signs_enumerated));
        tr.put("max_sign_deviation", num(&res.max_sign_deviation));
        tr.put("phi_norms", report::nums(&res.phi_norms));
        tr.put("phi", Value::Array(res.phi.iter().map(report::free_vector).collect()));
        tr.put("op_norm", res.op_norm.as_ref().map_or(Value::Null, num));
        Ok(())
    }
}

fn resolve_point<S: Scalar>(space: &PointedMetricSpace<S>, r: &PointRef, context: &str) -> Outcome<usize> {
    match r {
        PointRef::Index(i) if *i < space.len() => Ok(*i),
        PointRef::Index(i) => Err(Failure::new(EXIT_VALIDATION, format!("{context}: point index {i} out of range"))),
        PointRef::Label(l) => space
            .index_of(l)
            .ok_or_else(|| Failure::new(EXIT_VALIDATION, format!("{context}: unknown point \"{l}\""))),
    }
}

fn violation_json(v: &MetricViolation) -> Value {
    let (kind, points) = match v {
        MetricViolation::NonzeroDiagonal { point } => ("nonzero-diagonal", vec![point.clone()]),
        MetricViolation::Asymmetric { a, b } => ("asymmetric", vec![a.clone(), b.clone()]),
        MetricViolation::NonPositive { a, b } => ("non-positive", vec![a.clone(), b.clone()]),
        MetricViolation::Triangle { a, via, b } => ("triangle", vec![a.clone(), via.clone(), b.clone()]),
    };
    json!({ "kind": kind, "points": points, "message": v.to_string() })
}

fn norm_json<S: Scalar>(norm: &PolyhedralNorm<S>) -> Value {
    match norm.shape() {
        lipfree::NormShape::L1 => json!({ "kind": "l1", "dim": norm.dim() }),
        lipfree::NormShape::LInf => json!({ "kind": "linf", "dim": norm.dim() }),
        lipfree::NormShape::Polytope(v) => json!({
            "kind": "polytope",
            "dim": norm.dim(),
            "vertices": v.iter().map(|p| report::nums(p)).collect::<Vec<_>>(),
        }),
    }
}
