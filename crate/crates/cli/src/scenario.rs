//! Scenario documents: parsing and conversion of literals into scalars.

use std::path::Path;

use lipfree::{Matrix, Mode, Scalar};
use serde::Deserialize;

/// A numeric literal as written: JSON integer, JSON float, or a string such
/// as `"3/4"`.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Literal {
    Int(i64),
    Float(f64),
    Text(String),
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    Exact,
    Float,
}

impl ModeName {
    pub fn mode(self) -> Mode {
        match self {
            ModeName::Exact => Mode::Exact,
            ModeName::Float => Mode::Float,
        }
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum NormSpec {
    /// `"l1"` or `"linf"`, dimension taken from context.
    Name(String),
    Full {
        kind: String,
        #[serde(default)]
        dim: Option<usize>,
        #[serde(default)]
        vertices: Option<Vec<Vec<Literal>>>,
    },
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum PointRef {
    Index(usize),
    Label(String),
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpaceSpec {
    #[serde(default)]
    pub norm: Option<NormSpec>,
    #[serde(default)]
    pub points: Option<Vec<Vec<Literal>>>,
    #[serde(default)]
    pub distances: Option<Vec<Vec<Literal>>>,
    #[serde(default)]
    pub labels: Option<Vec<String>>,
    #[serde(default)]
    pub base: Option<PointRef>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub generators: Vec<Vec<Vec<Literal>>>,
    #[serde(default)]
    pub isometric: Option<bool>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct CircleSpec {
    #[serde(rename = "J")]
    pub j: Vec<Vec<Literal>>,
    pub k: usize,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Float-mode comparison tolerance.
    #[serde(default)]
    pub float: Option<Literal>,
    /// Default discretization allowance for cube liftings.
    #[serde(default)]
    pub grid: Option<Literal>,
}

/// `[label, coefficient]` pairs.
pub type SparseSpec = Vec<(String, Literal)>;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(tag = "task", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskSpec {
    Validate,
    FreeNorm {
        #[serde(default)]
        vectors: Vec<SparseSpec>,
        /// Also compute every molecule `δ(x) - δ(y)`.
        #[serde(default)]
        molecules: bool,
    },
    Lift {
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        min_norm: bool,
    },
    Average {
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        from: Option<String>,
    },
    EquivariantLift {
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        bound: Option<Literal>,
    },
    Split {
        #[serde(default)]
        from: Option<String>,
        #[serde(default)]
        complement: Option<Vec<Vec<Literal>>>,
        #[serde(default)]
        projection: Option<Vec<Vec<Literal>>>,
    },
    Dualize {
        #[serde(default)]
        from: Option<String>,
        #[serde(default)]
        function: Option<SparseSpec>,
    },
    Complexify {
        #[serde(default)]
        min_norm: Option<bool>,
    },
    CubeLift {
        d: usize,
        q: usize,
        norm: NormSpec,
        #[serde(default)]
        tol_grid: Option<Literal>,
        #[serde(default)]
        alpha: Option<Vec<Literal>>,
        #[serde(default)]
        op_norm: Option<bool>,
    },
    Report,
}

impl TaskSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            TaskSpec::Validate => "validate",
            TaskSpec::FreeNorm { .. } => "free-norm",
            TaskSpec::Lift { .. } => "lift",
            TaskSpec::Average { .. } => "average",
            TaskSpec::EquivariantLift { .. } => "equivariant-lift",
            TaskSpec::Split { .. } => "split",
            TaskSpec::Dualize { .. } => "dualize",
            TaskSpec::Complexify { .. } => "complexify",
            TaskSpec::CubeLift { .. } => "cube-lift",
            TaskSpec::Report => "report",
        }
    }

    /// The task with default parameters, for commands run without a matching
    /// task record.
    pub fn default_for(kind: &str) -> Option<TaskSpec> {
        Some(match kind {
            "validate" => TaskSpec::Validate,
            "free-norm" => TaskSpec::FreeNorm { vectors: Vec::new(), molecules: true },
            "lift" => TaskSpec::Lift { name: None, min_norm: false },
            "average" => TaskSpec::Average { name: None, from: None },
            "equivariant-lift" => TaskSpec::EquivariantLift { name: None, bound: None },
            "split" => TaskSpec::Split { from: None, complement: None, projection: None },
            "dualize" => TaskSpec::Dualize { from: None, function: None },
            "complexify" => TaskSpec::Complexify { min_norm: None },
            "report" => TaskSpec::Report,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(default)]
    pub description: Option<String>,
    #[serde(default)]
    pub mode: Option<ModeName>,
    #[serde(default)]
    pub space: Option<SpaceSpec>,
    #[serde(default)]
    pub group: Option<GroupSpec>,
    #[serde(default)]
    pub circle: Option<CircleSpec>,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
    #[serde(default)]
    pub tolerances: Option<Tolerances>,
}

#[derive(Debug)]
pub struct ParseError(pub String);

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl Scenario {
    pub fn from_str(text: &str) -> Result<Self, ParseError> {
        serde_json::from_str(text).map_err(|e| ParseError(format!("scenario: {e}")))
    }

    pub fn from_path(path: &Path) -> Result<Self, ParseError> {
        let text = std::fs::read_to_string(path).map_err(|e| ParseError(format!("{}: {e}", path.display())))?;
        Self::from_str(&text)
    }
}

/// Converts a literal; exact mode refuses JSON floats.
pub fn scalar<S: Scalar>(lit: &Literal, context: &str) -> Result<S, ParseError> {
    match lit {
        Literal::Int(v) => Ok(S::from_i64(*v)),
        Literal::Float(v) => match S::MODE {
            Mode::Exact => Err(ParseError(format!(
                "{context}: floating-point literal {v} in exact mode; write it as an integer or \"p/q\""
            ))),
            Mode::Float => S::from_real(*v).map_err(|e| ParseError(format!("{context}: {e}"))),
        },
        Literal::Text(s) => S::parse_literal(s).map_err(|e| ParseError(format!("{context}: {e}"))),
    }
}

pub fn vector<S: Scalar>(lits: &[Literal], context: &str) -> Result<Vec<S>, ParseError> {
    lits.iter().map(|l| scalar(l, context)).collect()
}

pub fn matrix<S: Scalar>(rows: &[Vec<Literal>], context: &str) -> Result<Matrix<S>, ParseError> {
    let rows: Vec<Vec<S>> = rows.iter().map(|r| vector(r, context)).collect::<Result<_, _>>()?;
    if rows.is_empty() {
        return Err(ParseError(format!("{context}: empty matrix")));
    }
    Matrix::from_rows(rows).ok_or_else(|| ParseError(format!("{context}: rows of unequal length")))
}
