//! The Kempf-Ness function `Phi(x, g)`, its axioms, and geodesic descent on
//! `G/K` towards zeros of the gradient map.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::liealg::{Direction, GroupElement};
use crate::linalg::{c, exp_hermitian, fro_norm, inner, orthonormalize_columns, CMat};
use crate::spaces::{ModelPoint, ModelSpace};

/// `Phi(x, g)`: `¼(|gv|^2 - |v|^2)` on linear models, `½ log(|gv|^2/|v|^2)`
/// on projective factors, weighted sums on configurations.
pub fn kn_value(space: &ModelSpace, x: &ModelPoint, g: &CMat) -> Result<f64> {
    let mut acc = 0.0;
    for (v, &w) in x.reps.iter().zip(&space.weights) {
        let gv = g * v;
        let (a, b) = (gv.norm_squared(), v.norm_squared());
        if space.is_linear() {
            acc += 0.25 * w * (a - b);
        } else {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::NumericFailure("group element collapsed a representative".into()));
            }
            acc += 0.5 * w * (a / b).ln();
        }
    }
    Ok(acc)
}

/// `|Phi(x, hg) - Phi(x, g) - Phi(gx, h)|`.
pub fn kn_cocycle_defect(space: &ModelSpace, x: &ModelPoint, g: &CMat, h: &CMat) -> Result<f64> {
    let gx = space.act(g, x)?;
    let lhs = kn_value(space, x, &(h * g))?;
    Ok((lhs - kn_value(space, x, g)? - kn_value(space, &gx, h)?).abs())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConvexityScan {
    pub min_second_difference: f64,
    /// Every second difference is below `1e-12` in absolute value.
    pub flat_direction: bool,
}

/// Central second differences of `t ↦ Phi(x, exp(t v))` on a uniform grid.
pub fn kn_convexity_scan(space: &ModelSpace, x: &ModelPoint, v: &CMat, grid: &[f64]) -> Result<ConvexityScan> {
    if grid.len() < 3 {
        return Err(Error::InvalidInput("convexity scan needs at least three grid points".into()));
    }
    let h = grid[1] - grid[0];
    let values = grid
        .iter()
        .map(|&t| kn_value(space, x, &exp_hermitian(&(v * c(t)))?))
        .collect::<Result<Vec<f64>>>()?;
    let seconds: Vec<f64> = values.windows(3).map(|w| (w[2] - 2.0 * w[1] + w[0]) / (h * h)).collect();
    Ok(ConvexityScan {
        min_second_difference: seconds.iter().copied().fold(f64::INFINITY, f64::min),
        flat_direction: seconds.iter().all(|s| s.abs() < 1e-12),
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct KempfNessReport {
    pub value: f64,
    pub cocycle_defect: f64,
    pub k_invariance_defect: f64,
    pub min_second_difference: f64,
}

/// Evaluate `Phi(x, g)` together with its axiom defects for the given
/// auxiliary `h`, `k` in `K` and geodesic direction `v`.
pub fn kn_report(space: &ModelSpace, x: &ModelPoint, g: &CMat, h: &CMat, k: &CMat, v: &CMat, grid: &[f64]) -> Result<KempfNessReport> {
    let value = kn_value(space, x, g)?;
    Ok(KempfNessReport {
        value,
        cocycle_defect: kn_cocycle_defect(space, x, g, h)?,
        k_invariance_defect: (kn_value(space, x, &(k * g))? - value).abs(),
        min_second_difference: kn_convexity_scan(space, x, v, grid)?.min_second_difference,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    /// Backtracking by halving from `initial`, Armijo constant `armijo`.
    Backtracking { initial: f64, armijo: f64 },
    /// Backtracking whose first trial is `min(2 s_prev, 1/|mu|)`.
    Expanding { armijo: f64 },
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule::Expanding { armijo: 1e-4 }
    }
}

#[derive(Debug, Clone)]
pub struct DescentOptions {
    pub step_rule: StepRule,
    pub tol: f64,
    pub budget: usize,
    /// `|xi|` beyond which a stabilized gradient is reported as a ray.
    pub ray_threshold: f64,
    /// Orthonormal basis of a subspace `V` of `p`; the descent then only
    /// moves along `exp(V)`.
    pub subspace: Option<Vec<CMat>>,
    /// Stop with [`DescentStatus::Drifting`] after at least this many
    /// iterations once the gradient norm decays sublinearly: it has not
    /// dropped by a factor 4 since half as many iterations.
    pub drift_exit: Option<usize>,
}

impl Default for DescentOptions {
    fn default() -> Self {
        Self { step_rule: StepRule::default(), tol: 1e-8, budget: 20_000, ray_threshold: 5.0, subspace: None, drift_exit: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DescentStatus {
    Converged,
    Stalled,
    DivergentRay(CMat),
    /// The gradient norm decays sublinearly; carries the pulled-back
    /// direction at exit.
    Drifting(CMat),
}

/// Result of a descent; the iterate is `g x` and gradients are evaluated there.
#[derive(Debug, Clone)]
pub struct DescentResult {
    pub minimizer: GroupElement,
    pub minimizer_inverse: GroupElement,
    pub point: ModelPoint,
    pub final_grad_norm: f64,
    pub infimum_grad_norm: f64,
    pub phi_value: f64,
    pub xi_norm: f64,
    pub iterations: usize,
    pub status: DescentStatus,
}

/// `|xi|` for `g = k exp(xi)`, from the log singular values of `g` and `g^{-1}`.
pub fn xi_norm(g: &CMat, g_inv: &CMat) -> f64 {
    let logs = |m: &CMat| -> Vec<f64> { m.clone().singular_values().iter().map(|s| s.ln()).filter(|l| *l > 0.0).collect() };
    logs(g).into_iter().chain(logs(g_inv)).map(|l| l * l).sum::<f64>().sqrt()
}

fn project_onto(basis: &[CMat], m: &CMat) -> CMat {
    basis.iter().fold(CMat::zeros(m.nrows(), m.ncols()), |acc, b| acc + b * c(inner(m, b)))
}

fn gradient(space: &ModelSpace, x: &ModelPoint, subspace: Option<&[CMat]>) -> Result<CMat> {
    let mu = space.gradient_map(x)?.matrix;
    Ok(match subspace {
        Some(basis) => project_onto(basis, &mu),
        None => mu,
    })
}

/// Iterations over which a ray must keep its gradient norm to 1e-6.
pub const RAY_WINDOW: usize = 25;

/// Geodesic descent of `Phi(x, ·)`: `g ← exp(-s grad) g` with the gradient
/// evaluated at the current iterate `g x`.
///
/// `Converged` is only reported once `|mu|` has dropped three more orders of
/// magnitude below `tol` while `|xi|` moved by less than `0.5`; a small
/// gradient with a drifting minimizer is reported as a ray.
pub fn kn_descend(space: &ModelSpace, x: &ModelPoint, opts: &DescentOptions) -> Result<DescentResult> {
    let n = space.n;
    let subspace = opts.subspace.as_deref();
    let mut g = CMat::identity(n, n);
    let mut g_inv = CMat::identity(n, n);
    let mut cur = x.clone();
    let mut phi = 0.0;
    let mut grad = gradient(space, &cur, subspace)?;
    let mut norm = fro_norm(&grad);
    let mut infimum = norm;
    let mut prev_step: Option<f64> = None;
    let mut history: Vec<f64> = vec![norm];
    let mut xi_at_tol: Option<f64> = None;
    let deep_tol = (opts.tol * 1e-3).max(1e-14);
    // on compact models Phi has second derivative at most sum(weights) along unit directions
    let step_cap = if space.is_linear() { f64::INFINITY } else { 1.0 / space.weights.iter().sum::<f64>() };

    let finish = |g: CMat, g_inv: CMat, cur: ModelPoint, norm: f64, infimum: f64, phi: f64, iterations: usize, status: DescentStatus| -> DescentResult {
        DescentResult {
            xi_norm: xi_norm(&g, &g_inv),
            minimizer: GroupElement { matrix: g },
            minimizer_inverse: GroupElement { matrix: g_inv },
            point: cur,
            final_grad_norm: norm,
            infimum_grad_norm: infimum,
            phi_value: phi,
            iterations,
            status,
        }
    };

    if norm < opts.tol {
        return Ok(finish(g, g_inv, cur, norm, infimum, phi, 0, DescentStatus::Converged));
    }

    for iter in 1..=opts.budget {
        // step selection
        let mut s = match (opts.step_rule, prev_step) {
            (StepRule::Backtracking { initial, .. }, _) => initial,
            (StepRule::Expanding { .. }, None) => 0.5,
            (StepRule::Expanding { .. }, Some(p)) => 2.0 * p,
        };
        if matches!(opts.step_rule, StepRule::Expanding { .. }) {
            s = s.min(1.0 / norm).min(step_cap);
        }
        let armijo = match opts.step_rule {
            StepRule::Backtracking { armijo, .. } | StepRule::Expanding { armijo } => armijo,
        };
        let accepted = loop {
            let e = exp_hermitian(&(&grad * c(-s)))?;
            let delta = kn_value(space, &cur, &e)?;
            if delta <= -armijo * s * norm * norm {
                break Some((e, delta));
            }
            // below the resolution of Phi, accept on decrease of the gradient norm
            if s * norm * norm < 1e-13 * (1.0 + phi.abs()) {
                let trial = space.act(&e, &cur)?;
                if fro_norm(&gradient(space, &trial, subspace)?) < norm {
                    break Some((e, delta.min(0.0)));
                }
            }
            s *= 0.5;
            if s * norm < 1e-16 {
                break None;
            }
        };
        let Some((e, delta)) = accepted else {
            let status = if norm < opts.tol { DescentStatus::Converged } else { DescentStatus::Stalled };
            return Ok(finish(g, g_inv, cur, norm, infimum, phi, iter, status));
        };
        prev_step = Some(s);
        let e_inv = exp_hermitian(&(&grad * c(s)))?;
        g = &e * &g;
        g_inv = &g_inv * &e_inv;
        phi += delta;
        cur = space.act(&e, &cur)?;
        grad = gradient(space, &cur, subspace)?;
        norm = fro_norm(&grad);
        infimum = infimum.min(norm);
        history.push(norm);
        let xi = xi_norm(&g, &g_inv);

        if norm < opts.tol && xi_at_tol.is_none() {
            xi_at_tol = Some(xi);
        }
        if norm < deep_tol || norm == 0.0 {
            let drift = xi - xi_at_tol.unwrap_or(xi);
            if drift < 0.5 {
                return Ok(finish(g, g_inv, cur, norm, infimum, phi, iter, DescentStatus::Converged));
            }
            let beta = ray_direction(space, &g_inv, &cur, subspace)?;
            return Ok(finish(g, g_inv, cur, norm, infimum, phi, iter, DescentStatus::DivergentRay(beta)));
        }
        if xi > opts.ray_threshold && history.len() > RAY_WINDOW {
            let old = history[history.len() - 1 - RAY_WINDOW];
            if (old - norm).abs() <= 1e-6 * norm {
                let beta = ray_direction(space, &g_inv, &cur, subspace)?;
                return Ok(finish(g, g_inv, cur, norm, infimum, phi, iter, DescentStatus::DivergentRay(beta)));
            }
        }
        if opts.drift_exit.is_some_and(|w| iter >= w && iter % 50 == 0 && norm > 0.25 * history[iter / 2]) {
            let beta = ray_direction(space, &g_inv, &cur, subspace)?;
            return Ok(finish(g, g_inv, cur, norm, infimum, phi, iter, DescentStatus::Drifting(beta)));
        }
        if xi > 600.0 {
            return Err(Error::NumericFailure("descent left the representable range".into()));
        }
    }
    Err(Error::BudgetExceeded { budget: opts.budget })
}

/// Direction at the original point whose eigenflag is the pullback by
/// `g^{-1}` of the ascending eigenflag of `-mu` at the iterate.
pub fn ray_direction(space: &ModelSpace, g_inv: &CMat, cur: &ModelPoint, subspace: Option<&[CMat]>) -> Result<CMat> {
    let eta = gradient(space, cur, subspace)? * c(-1.0);
    let nrm = fro_norm(&eta);
    if nrm == 0.0 {
        return Err(Error::ZeroDirection);
    }
    let dir = Direction::new(&(&eta * c(1.0 / nrm)))?;
    let n = space.n;
    let mut u_asc = CMat::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for k in 0..n {
        let i = n - 1 - k;
        u_asc.set_column(k, &dir.eig.vectors.column(i));
        vals.push(dir.eig.values[i]);
    }
    let q = orthonormalize_columns(&(g_inv * u_asc))?;
    let mut scaled = q.clone();
    for j in 0..n {
        for i in 0..n {
            scaled[(i, j)] *= c(vals[j]);
        }
    }
    let beta = space.setup.project_p(&crate::linalg::hermitian_part(&(&scaled * q.adjoint())));
    Ok(match subspace {
        Some(basis) => project_onto(basis, &beta),
        None => beta,
    })
}
