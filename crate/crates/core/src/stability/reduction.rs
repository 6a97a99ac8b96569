//! Centralizer reduction: a chain of zero-weight directions `beta_i`, each
//! orthogonal to the previous ones and commuting with them, whose flow
//! limits end at a zero of the gradient map.

use nalgebra::DMatrix;

use super::{certificate_candidates, certify_unstable, stabilizer_basis, DRIFT_EXIT};
use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::flows::{flow_limit, SUPPORT_TOL};
use crate::kempfness::{kn_descend, DescentOptions, DescentStatus};
use crate::liealg::Direction;
use crate::linalg::{c, commutator, fro_norm, inner, real_null_space, CMat};
use crate::spaces::{ModelPoint, ModelSpace};
use crate::weights::weight_value;

#[derive(Debug, Clone)]
pub struct ReductionStep {
    pub beta: CMat,
    pub lambda: f64,
    pub limit: ModelPoint,
}

#[derive(Debug, Clone)]
pub struct ReductionChain {
    pub steps: Vec<ReductionStep>,
    /// Zero of the gradient map reached at the end (possibly after a final
    /// descent inside the remaining centralizer).
    pub terminal: ModelPoint,
    pub terminal_grad_norm: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct ReductionOptions {
    /// Required `|mu_p|` at the terminal point.
    pub tol: f64,
    /// Accepted range `[-weight_tol, weight_tol]` for each `lambda(y, beta_i)`.
    pub weight_tol: f64,
    pub descent_tol: f64,
    pub budget: usize,
}

impl Default for ReductionOptions {
    fn default() -> Self {
        Self { tol: 1e-6, weight_tol: 1e-7, descent_tol: 1e-8, budget: 20_000 }
    }
}

fn project_onto(basis: &[CMat], m: &CMat) -> CMat {
    basis.iter().fold(CMat::zeros(m.nrows(), m.ncols()), |acc, b| acc + b * c(inner(m, b)))
}

/// Orthonormal basis of `{X in span(basis) : [X, beta] = 0, <X, beta> = 0}`.
fn shrink(basis: &[CMat], beta: &CMat) -> Vec<CMat> {
    if basis.is_empty() {
        return Vec::new();
    }
    let n = beta.nrows();
    let rows = 2 * n * n + 1;
    let mut m = DMatrix::<f64>::zeros(rows, basis.len());
    for (j, b) in basis.iter().enumerate() {
        let comm = commutator(b, beta);
        for (k, z) in comm.iter().enumerate() {
            m[(2 * k, j)] = z.re;
            m[(2 * k + 1, j)] = z.im;
        }
        m[(rows - 1, j)] = inner(b, beta);
    }
    real_null_space(&m, 1e-10)
        .into_iter()
        .map(|v| basis.iter().zip(v.iter()).fold(CMat::zeros(n, n), |acc, (b, &t)| acc + b * c(t)))
        .collect()
}

fn exact_weight(space: &ModelSpace, y: &ModelPoint, beta: &Direction) -> Option<f64> {
    match weight_value(space, y, beta, SUPPORT_TOL) {
        ExtReal::Finite(v) => Some(v),
        ExtReal::PosInfinity => None,
    }
}

/// Pick a zero-weight direction from the candidates of `raw` within `V`.
fn zero_weight_direction(space: &ModelSpace, y: &ModelPoint, raw: &CMat, v: &[CMat], opts: &ReductionOptions) -> Result<(Direction, f64)> {
    let mut most_negative: Option<f64> = None;
    for cand in certificate_candidates(space, y, raw)? {
        let inside = project_onto(v, &cand.matrix);
        if fro_norm(&inside) < 0.5 {
            continue;
        }
        let d = Direction::new(&(&inside * c(1.0 / fro_norm(&inside))))?;
        let Some(l) = exact_weight(space, y, &d) else { continue };
        if l.abs() <= opts.weight_tol {
            return Ok((d, l));
        }
        if l < -opts.weight_tol {
            most_negative = Some(most_negative.map_or(l, |m: f64| m.min(l)));
        }
    }
    match most_negative {
        Some(lambda) => Err(Error::NotSemistable { lambda }),
        None => Err(Error::Undecided { budget: opts.budget, reason: "no zero-weight direction along the ray".into() }),
    }
}

/// Build the reduction chain of a semistable point.
pub fn centralizer_reduction(space: &ModelSpace, x: &ModelPoint, opts: &ReductionOptions) -> Result<ReductionChain> {
    let mut v: Vec<CMat> = space.setup.p_basis.clone();
    let mut y = x.clone();
    let mut steps: Vec<ReductionStep> = Vec::new();
    let max_steps = space.setup.dim_a();
    let mut patient = false;
    loop {
        let norm = space.gradient_map(&y)?.norm;
        if norm < opts.tol {
            return Ok(ReductionChain { steps, terminal: y, terminal_grad_norm: norm });
        }
        if steps.len() >= max_steps || v.is_empty() {
            return Err(Error::Undecided { budget: opts.budget, reason: format!("reduction chain exhausted after {} steps", steps.len()) });
        }
        let descent = DescentOptions {
            tol: opts.descent_tol,
            budget: opts.budget, subspace: Some(v.clone()),
            drift_exit: (!patient).then_some(DRIFT_EXIT),
            ..DescentOptions::default()
        };
        let r = kn_descend(space, &y, &descent)?;
        let (beta, lambda) = match &r.status {
            DescentStatus::Converged => {
                let stab = stabilizer_basis(space, &r.point, &v)?;
                let Some(xi) = stab.first() else {
                    let terminal_grad_norm = space.gradient_map(&r.point)?.norm;
                    return Ok(ReductionChain { steps, terminal: r.point, terminal_grad_norm });
                };
                let xi = Direction::new(&(xi * c(1.0 / fro_norm(xi))))?;
                let (k, _) = space.setup.parabolic_split(&r.minimizer_inverse, &xi)?;
                let raw = k.adjoint_action(&xi.matrix)?;
                match zero_weight_direction(space, &y, &crate::linalg::hermitian_part(&raw), &v, opts) {
                    Ok(found) => found,
                    Err(_) => {
                        let terminal_grad_norm = space.gradient_map(&r.point)?.norm;
                        return Ok(ReductionChain { steps, terminal: r.point, terminal_grad_norm });
                    }
                }
            }
            DescentStatus::DivergentRay(raw) if r.infimum_grad_norm >= opts.descent_tol => {
                let lambda = certify_unstable(space, &y, raw)?.map_or(-r.infimum_grad_norm, |(_, l)| l);
                return Err(Error::NotSemistable { lambda });
            }
            DescentStatus::DivergentRay(raw) | DescentStatus::Drifting(raw) => match zero_weight_direction(space, &y, raw, &v, opts) {
                Ok(found) => found,
                Err(Error::Undecided { .. }) if !patient => {
                    patient = true;
                    continue;
                }
                Err(e) => return Err(e),
            },
            DescentStatus::Stalled => return Err(Error::Undecided { budget: opts.budget, reason: "restricted descent stalled".into() }),
        };
        patient = false;
        let limit = flow_limit(space, &y, &beta, 1e-8)?;
        v = shrink(&v, &beta.matrix);
        steps.push(ReductionStep { beta: beta.matrix, lambda, limit: limit.clone() });
        y = limit;
    }
}
