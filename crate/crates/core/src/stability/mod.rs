//! Classification of points with certificates, the centralizer reduction,
//! commuting fields, stratification and triple transport.

mod commuting;
mod oracle;
mod reduction;
mod strata;

pub use commuting::{commuting_delta, commuting_limit_check, tecnico_check, CommutingOptions, CommutingReport, LimitCheck};
pub use oracle::{in_cone, min_norm_point, multiplicity_oracle, torus_oracle, zero_in_hull, zero_in_relative_interior, TorusVerdict};
pub use reduction::{centralizer_reduction, ReductionChain, ReductionOptions, ReductionStep};
pub use strata::{stratify, StratumEntry, StratumReport, TripleTransport};

use std::fmt;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::kempfness::{kn_descend, DescentOptions, DescentResult, DescentStatus};
use crate::liealg::{Direction, GroupElement};
use crate::linalg::{c, fro_norm, real_null_space, CMat};
use crate::spaces::{ModelPoint, ModelSpace};
use crate::weights::{snap_direction, weight_value};
use crate::flows::SUPPORT_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum StabilityClass {
    Stable,
    Polystable,
    StrictlySemistable,
    Unstable,
}

impl StabilityClass {
    pub fn is_semistable(self) -> bool {
        self != StabilityClass::Unstable
    }

    pub fn is_polystable(self) -> bool {
        matches!(self, StabilityClass::Stable | StabilityClass::Polystable)
    }
}

impl fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StabilityClass::Stable => "Stable",
            StabilityClass::Polystable => "Polystable",
            StabilityClass::StrictlySemistable => "StrictlySemistable",
            StabilityClass::Unstable => "Unstable",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone)]
pub enum Certificate {
    /// `lambda(x, beta) < 0` in closed form, `beta` of unit norm.
    DestabilizingDirection { beta: CMat, lambda: f64 },
    /// `g x` is a zero of the gradient map up to `grad_norm`; `dim_px` is
    /// the dimension of `p_{gx}`.
    Minimizer { g: GroupElement, point: ModelPoint, grad_norm: f64, dim_px: usize },
    ReductionChain(ReductionChain),
}

#[derive(Debug, Clone)]
pub struct StabilityVerdict {
    pub class: StabilityClass,
    pub certificate: Certificate,
    pub tol: f64,
    pub budget: usize,
    pub iterations: usize,
    pub infimum_grad_norm: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ClassifyOptions {
    pub tol: f64,
    pub budget: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { tol: 1e-8, budget: 20_000 }
    }
}

/// Singular values below this count towards the stabilizer.
pub const STABILIZER_TOL: f64 = 1e-8;

/// Elements of `span(basis)` (orthonormal) whose fundamental field vanishes at `x`.
pub fn stabilizer_basis(space: &ModelSpace, x: &ModelPoint, basis: &[CMat]) -> Result<Vec<CMat>> {
    if basis.is_empty() {
        return Ok(Vec::new());
    }
    let tangent = space.tangent_basis(x)?;
    let mut m = DMatrix::<f64>::zeros(tangent.len().max(1), basis.len());
    for (j, b) in basis.iter().enumerate() {
        let field = space.fundamental_field(b, x)?;
        for (i, e) in tangent.iter().enumerate() {
            m[(i, j)] = space.metric(x, e, &field);
        }
    }
    Ok(real_null_space(&m, STABILIZER_TOL)
        .into_iter()
        .map(|v| basis.iter().zip(v.iter()).fold(CMat::zeros(space.n, space.n), |acc, (b, &t)| acc + b * c(t)))
        .collect())
}

/// Candidate directions for an exact certificate: the raw direction and its
/// snapped versions at increasing thresholds, all of unit norm.
pub(crate) fn certificate_candidates(space: &ModelSpace, x: &ModelPoint, raw: &CMat) -> Result<Vec<Direction>> {
    let nrm = fro_norm(raw);
    if nrm == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let base = Direction::new(&(raw * c(1.0 / nrm)))?;
    let mut out = vec![base.clone()];
    if !space.group_kind().is_torus() {
        for tau in [1e-8, 1e-6, 1e-4, 1e-3, 1e-2, 5e-2, 0.1, 0.2] {
            if let Ok(d) = snap_direction(space, x, &base, tau) {
                if let Ok(u) = d.unit() {
                    out.push(u);
                }
            }
        }
    }
    Ok(out)
}

/// The most negative closed-form weight among the candidates of `raw`.
pub fn certify_unstable(space: &ModelSpace, x: &ModelPoint, raw: &CMat) -> Result<Option<(CMat, f64)>> {
    let mut best: Option<(CMat, f64)> = None;
    for d in certificate_candidates(space, x, raw)? {
        if let ExtReal::Finite(l) = weight_value(space, x, &d, SUPPORT_TOL) {
            if l < 0.0 && best.as_ref().map_or(true, |(_, b)| l < *b) {
                best = Some((d.matrix, l));
            }
        }
    }
    Ok(best)
}

fn undecided(budget: usize, reason: impl Into<String>) -> Error {
    Error::Undecided { budget, reason: reason.into() }
}

/// Iterations before a sublinearly decaying descent hands over to the
/// reduction chain.
pub const DRIFT_EXIT: usize = 400;

/// Dimension of the stabilizer of `x` in `g = k + p`.
pub fn stabilizer_dimension(space: &ModelSpace, x: &ModelPoint) -> Result<usize> {
    let mut basis = space.setup.k_basis.clone();
    basis.extend(space.setup.p_basis.iter().cloned());
    Ok(stabilizer_basis(space, x, &basis)?.len())
}

fn descend(space: &ModelSpace, x: &ModelPoint, opts: &ClassifyOptions, drift_exit: Option<usize>) -> Result<DescentResult> {
    let descent = DescentOptions { tol: opts.tol, budget: opts.budget, drift_exit, ..DescentOptions::default() };
    match kn_descend(space, x, &descent) {
        Err(Error::BudgetExceeded { budget }) => Err(undecided(budget, "descent neither converged nor settled on a ray")),
        other => other,
    }
}

/// Classify `x` by geodesic descent of the Kempf-Ness function, attaching a
/// checkable certificate to the verdict.
///
/// When the minimizing sequence drifts off, the point is reduced along
/// zero-weight directions to a zero of the gradient map; `x` is polystable
/// exactly when that zero has a stabilizer of the same dimension.
pub fn classify(space: &ModelSpace, x: &ModelPoint, opts: &ClassifyOptions) -> Result<StabilityVerdict> {
    let r = descend(space, x, opts, Some(DRIFT_EXIT))?;
    let verdict = |r: &DescentResult, class, certificate| StabilityVerdict {
        class,
        certificate,
        tol: opts.tol,
        budget: opts.budget,
        iterations: r.iterations,
        infimum_grad_norm: r.infimum_grad_norm,
    };
    let minimizer = |r: &DescentResult| -> Result<StabilityVerdict> {
        let dim_px = stabilizer_basis(space, &r.point, &space.setup.p_basis)?.len();
        let class = if dim_px == 0 { StabilityClass::Stable } else { StabilityClass::Polystable };
        let certificate = Certificate::Minimizer { g: r.minimizer.clone(), point: r.point.clone(), grad_norm: r.final_grad_norm, dim_px };
        Ok(verdict(r, class, certificate))
    };
    let unstable = |r: &DescentResult, raw: &CMat| -> Result<StabilityVerdict> {
        match certify_unstable(space, x, raw)? {
            Some((beta, lambda)) => Ok(verdict(r, StabilityClass::Unstable, Certificate::DestabilizingDirection { beta, lambda })),
            None => Err(undecided(opts.budget, "ray direction did not certify a negative weight")),
        }
    };
    let patient = |r: &DescentResult| -> Result<StabilityVerdict> {
        let again = descend(space, x, opts, None)?;
        let mut total = again.clone();
        total.iterations += r.iterations;
        match &again.status {
            DescentStatus::Converged => minimizer(&total),
            DescentStatus::DivergentRay(raw) if again.infimum_grad_norm >= opts.tol => unstable(&total, raw),
            _ => Err(undecided(opts.budget, "descent neither converged nor certified a ray")),
        }
    };
    match &r.status {
        DescentStatus::Converged => minimizer(&r),
        DescentStatus::DivergentRay(raw) if r.infimum_grad_norm >= opts.tol => unstable(&r, raw),
        DescentStatus::DivergentRay(raw) | DescentStatus::Drifting(raw) => {
            if certify_unstable(space, x, raw)?.is_some() {
                return unstable(&r, raw);
            }
            let ropts = ReductionOptions { budget: opts.budget, ..ReductionOptions::default() };
            match centralizer_reduction(space, x, &ropts) {
                Ok(chain) => {
                    if stabilizer_dimension(space, &chain.terminal)? > stabilizer_dimension(space, x)? {
                        Ok(verdict(&r, StabilityClass::StrictlySemistable, Certificate::ReductionChain(chain)))
                    } else {
                        patient(&r)
                    }
                }
                Err(Error::NotSemistable { .. }) => patient(&r),
                Err(e) => Err(undecided(opts.budget, format!("no reduction chain: {e}"))),
            }
        }
        DescentStatus::Stalled => Err(undecided(opts.budget, "descent stalled")),
    }
}
