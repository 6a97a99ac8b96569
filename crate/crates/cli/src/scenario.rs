//! Scenario files: JSON descriptions of a group, a model space, input data,
//! a command and its numeric parameters.

use std::path::Path;

use num_complex::Complex64;
use realgit::flows::DEFAULT_T_MAX;
use realgit::linalg::{hermitian_defect, CMat, CVec};
use realgit::{Direction, Field, GroupElement, GroupKind, ModelKind, ModelPoint, ModelSpace, ReductiveSetup};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Largest accepted `|X - X*|` for a direction after parsing.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// A real number or `{"re": .., "im": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Real(f64),
    Complex { re: f64, im: f64 },
}

impl Scalar {
    pub fn value(self) -> Complex64 {
        match self {
            Scalar::Real(re) => Complex64::new(re, 0.0),
            Scalar::Complex { re, im } => Complex64::new(re, im),
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        if z.im == 0.0 {
            Scalar::Real(z.re)
        } else {
            Scalar::Complex { re: z.re, im: z.im }
        }
    }
}

/// One vector, or one vector per factor of a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointData {
    Single(Vec<Scalar>),
    Multi(Vec<Vec<Scalar>>),
}

impl PointData {
    fn vectors(&self) -> Vec<&[Scalar]> {
        match self {
            PointData::Single(v) => vec![v.as_slice()],
            PointData::Multi(vs) => vs.iter().map(Vec::as_slice).collect(),
        }
    }
}

pub type MatrixData = Vec<Vec<Scalar>>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupSpec {
    pub kind: GroupKind,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelName {
    Linear,
    Projective,
    Configuration,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub kind: ModelName,
    pub field: Field,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Classify,
    MaxWeight,
    Flow,
    KempfNess,
    Stratify,
    Verify,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
}

/// Parameters after defaults and command-line overrides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveParams {
    pub tol: f64,
    pub t_max: f64,
    pub budget: usize,
    pub seed: u64,
    pub sweep: usize,
    pub steps: usize,
}

impl Default for EffectiveParams {
    fn default() -> Self {
        Self { tol: 1e-8, t_max: DEFAULT_T_MAX, budget: 20_000, seed: 0, sweep: 64, steps: 200 }
    }
}

impl EffectiveParams {
    /// Later layers win: defaults, then `layers` in order.
    pub fn resolve(layers: &[Params]) -> CliResult<Self> {
        let mut out = Self::default();
        for p in layers {
            out.tol = p.tol.unwrap_or(out.tol);
            out.t_max = p.t_max.unwrap_or(out.t_max);
            out.budget = p.budget.unwrap_or(out.budget);
            out.seed = p.seed.unwrap_or(out.seed);
            out.sweep = p.sweep.unwrap_or(out.sweep);
            out.steps = p.steps.unwrap_or(out.steps);
        }
        if !(out.tol > 0.0 && out.tol.is_finite()) {
            return Err(CliError::Malformed(format!("tol must be positive, got {}", out.tol)));
        }
        if !(out.t_max > 0.0 && out.t_max.is_finite()) {
            return Err(CliError::Malformed(format!("t_max must be positive, got {}", out.t_max)));
        }
        if out.budget == 0 || out.steps == 0 {
            return Err(CliError::Malformed("budget and steps must be positive".into()));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub group: GroupSpec,
    pub model: ModelSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub point: Option<PointData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<MatrixData>,
    /// Group element used by `max-weight` (transport) and `kempf-ness`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub element: Option<MatrixData>,
    /// Points for `stratify`; a sweep of the real sphere is used otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<PointData>>,
    pub command: Command,
    #[serde(default)]
    pub params: Params,
}

/// A scenario with every piece of data checked and converted.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub space: ModelSpace,
    pub point: Option<ModelPoint>,
    pub direction: Option<Direction>,
    pub element: Option<GroupElement>,
    pub grid: Option<Vec<ModelPoint>>,
}

pub fn parse_scenario(text: &str) -> CliResult<Scenario> {
    serde_json::from_str(text).map_err(|e| CliError::Malformed(format!("scenario does not parse: {e}")))
}

pub fn load_scenario(path: &Path) -> CliResult<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Malformed(format!("cannot read {}: {e}", path.display())))?;
    parse_scenario(&text)
}

fn malformed(what: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Malformed(format!("{what}: {e}"))
}

fn matrix(data: &MatrixData, n: usize, what: &str) -> CliResult<CMat> {
    if data.len() != n || data.iter().any(|row| row.len() != n) {
        return Err(CliError::Malformed(format!("{what} must be a {n}x{n} matrix")));
    }
    Ok(CMat::from_fn(n, n, |i, j| data[i][j].value()))
}

fn parse_point(space: &ModelSpace, data: &PointData, what: &str) -> CliResult<ModelPoint> {
    let vectors = data.vectors();
    if vectors.len() != space.factors() {
        return Err(CliError::Malformed(format!("{what} needs {} vector(s), got {}", space.factors(), vectors.len())));
    }
    let mut reps = Vec::with_capacity(vectors.len());
    for v in vectors {
        if v.len() != space.n {
            return Err(CliError::Malformed(format!("{what}: vectors must have length {}, got {}", space.n, v.len())));
        }
        reps.push(CVec::from_iterator(space.n, v.iter().map(|s| s.value())));
    }
    space.point(reps).map_err(|e| malformed(what, e))
}

impl Scenario {
    pub fn model_space(&self) -> CliResult<ModelSpace> {
        let setup = ReductiveSetup::new(self.group.kind, self.group.n).map_err(|e| malformed("group", e))?;
        let (kind, weights) = match self.model.kind {
            ModelName::Linear | ModelName::Projective if self.model.weights.is_some() => {
                return Err(CliError::Malformed("weights are only accepted for configuration models".into()));
            }
            ModelName::Linear => (ModelKind::Linear, Vec::new()),
            ModelName::Projective => (ModelKind::Projective, Vec::new()),
            ModelName::Configuration => {
                let weights = match (&self.model.weights, &self.point) {
                    (Some(w), _) => w.clone(),
                    (None, Some(p)) => vec![1.0; p.vectors().len()],
                    (None, None) => return Err(CliError::Malformed("configuration models need weights or a point".into())),
                };
                (ModelKind::Configuration, weights)
            }
        };
        if matches!(kind, ModelKind::Configuration) && weights.is_empty() {
            return Err(CliError::Malformed("configuration models need at least one factor".into()));
        }
        ModelSpace::new(kind, self.model.field, setup, weights).map_err(|e| malformed("model", e))
    }

    /// Check shapes and membership, converting every piece of data.
    pub fn prepare(&self) -> CliResult<Prepared> {
        let space = self.model_space()?;
        let n = space.n;
        let point = self.point.as_ref().map(|p| parse_point(&space, p, "point")).transpose()?;
        let direction = match &self.direction {
            Some(d) => {
                let m = matrix(d, n, "direction")?;
                let defect = hermitian_defect(&m);
                if defect > HERMITIAN_TOL {
                    return Err(CliError::Malformed(format!("direction is not Hermitian (defect {defect:.3e})")));
                }
                Some(space.setup.direction(&m).map_err(|e| malformed("direction", e))?)
            }
            None => None,
        };
        let element = match &self.element {
            Some(g) => Some(space.setup.element(matrix(g, n, "element")?).map_err(|e| malformed("element", e))?),
            None => None,
        };
        let grid = match &self.grid {
            Some(g) => Some(g.iter().enumerate().map(|(i, p)| parse_point(&space, p, &format!("grid[{i}]"))).collect::<CliResult<Vec<_>>>()?),
            None => None,
        };
        let needs_point = matches!(self.command, Command::Classify | Command::MaxWeight | Command::Flow | Command::KempfNess);
        if needs_point && point.is_none() {
            return Err(CliError::Malformed(format!("command {:?} needs a point", self.command)));
        }
        if matches!(self.command, Command::MaxWeight | Command::Flow) && direction.is_none() {
            return Err(CliError::Malformed(format!("command {:?} needs a direction", self.command)));
        }
        Ok(Prepared { space, point, direction, element, grid })
    }
}
