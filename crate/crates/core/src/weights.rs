//! The maximal weight `lambda(x, beta)`: finite-time values, closed-form and
//! numeric limits, transport along the group, moment-weight margins and
//! properness estimates.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::flows::{energy, flow_at, flow_limit, support_top, SUPPORT_TOL};
use crate::kempfness::kn_value;
use crate::liealg::{Direction, GroupElement};
use crate::linalg::{c, CMat, CVec, EIGEN_CLUSTER_TOL};
use crate::sampling::sphere_sweep;
use crate::spaces::{ModelPoint, ModelSpace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum WeightMethod {
    ClosedForm,
    NumericFlow,
}

#[derive(Debug, Clone)]
pub struct MaximalWeight {
    pub value: ExtReal,
    pub method: WeightMethod,
    pub limit_point: Option<ModelPoint>,
    pub energy_value: ExtReal,
    /// `+∞` for closed-form values.
    pub t_reached: f64,
}

/// `lambda(x, beta, t) = <mu_p(exp(t beta) x), beta>`.
pub fn lambda_t(space: &ModelSpace, x: &ModelPoint, beta: &Direction, t: f64) -> Result<f64> {
    space.mu_beta(&flow_at(space, x, beta, t)?, &beta.matrix)
}

/// Closed-form maximal weight of a single factor.
fn factor_weight(space: &ModelSpace, beta: &Direction, v: &CVec, threshold: f64) -> ExtReal {
    let (_, top) = support_top(beta, v, threshold);
    let scale = beta.eig.values.iter().fold(1.0f64, |m, a| m.max(a.abs()));
    if space.is_linear() {
        match top {
            Some(top) if top > EIGEN_CLUSTER_TOL * scale => ExtReal::PosInfinity,
            _ => ExtReal::Finite(0.0),
        }
    } else {
        ExtReal::Finite(top.expect("projective representatives are nonzero"))
    }
}

/// Closed-form value with a custom support threshold.
pub fn weight_value(space: &ModelSpace, x: &ModelPoint, beta: &Direction, threshold: f64) -> ExtReal {
    x.reps
        .iter()
        .zip(&space.weights)
        .fold(ExtReal::Finite(0.0), |acc, (v, &w)| acc.add(factor_weight(space, beta, v, threshold).scale(w)))
}

/// Upper bound on `lambda(x, beta) - lambda(x, beta, t)` from the
/// eigen-expansion of the flow; `+∞` for infinite weights.
pub fn weight_tail_bound(space: &ModelSpace, x: &ModelPoint, beta: &Direction, t: f64) -> f64 {
    let vals = &beta.eig.values;
    let scale = vals.iter().fold(1.0f64, |m, a| m.max(a.abs()));
    let mut bound = 0.0;
    for (v, &w) in x.reps.iter().zip(&space.weights) {
        let coef = beta.eig.coefficients(v);
        let (_, top) = support_top(beta, v, SUPPORT_TOL);
        let Some(top) = top else { continue };
        if space.is_linear() {
            if top > EIGEN_CLUSTER_TOL * scale {
                return f64::INFINITY;
            }
            bound += w * (0..vals.len()).filter(|&i| vals[i] < 0.0).map(|i| 0.5 * -vals[i] * coef[i].norm_sqr() * (2.0 * vals[i] * t).exp()).sum::<f64>();
        } else {
            let tol = EIGEN_CLUSTER_TOL * scale;
            let s_top: f64 = (0..vals.len()).filter(|&i| (vals[i] - top).abs() <= tol).map(|i| coef[i].norm_sqr()).sum();
            bound += w * (0..vals.len())
                .filter(|&i| vals[i] < top - tol)
                .map(|i| {
                    let gap = top - vals[i];
                    gap * coef[i].norm_sqr() / s_top * (-2.0 * gap * t).exp()
                })
                .sum::<f64>();
        }
    }
    bound
}

pub fn max_weight(space: &ModelSpace, x: &ModelPoint, beta: &Direction) -> MaximalWeight {
    let value = weight_value(space, x, beta, SUPPORT_TOL);
    let limit_point = if value.is_finite() { flow_limit(space, x, beta, 1e-8).ok() } else { None };
    MaximalWeight {
        value,
        method: WeightMethod::ClosedForm,
        limit_point,
        energy_value: energy(space, x, beta),
        t_reached: f64::INFINITY,
    }
}

/// `lambda(x, beta, t_max)`, or `+∞` when a linear flow blows up.
pub fn max_weight_numeric(space: &ModelSpace, x: &ModelPoint, beta: &Direction, t_max: f64) -> Result<MaximalWeight> {
    let lambda0 = space.mu_beta(x, &beta.matrix)?;
    let infinite = MaximalWeight {
        value: ExtReal::PosInfinity,
        method: WeightMethod::NumericFlow,
        limit_point: None,
        energy_value: ExtReal::PosInfinity,
        t_reached: t_max,
    };
    let y = match flow_at(space, x, beta, t_max) {
        Ok(y) => y,
        Err(Error::Overflow { .. }) => return Ok(infinite),
        Err(e) => return Err(e),
    };
    let value = space.mu_beta(&y, &beta.matrix)?;
    // on linear models lambda(t) <= 0 unless a positive weight is present
    if space.is_linear() && value > 1e-9 {
        return Ok(infinite);
    }
    let speed = space.tangent_norm(&y, &space.fundamental_field(&beta.matrix, &y)?);
    Ok(MaximalWeight {
        value: ExtReal::Finite(value),
        method: WeightMethod::NumericFlow,
        limit_point: (speed < 1e-6).then_some(y),
        energy_value: ExtReal::Finite(value - lambda0),
        t_reached: t_max,
    })
}

/// `lambda(g x, beta)` computed on `x`: with `g^{-1} = k h`, `h` in the
/// parabolic bounded as `t → +∞`, one has `lambda(g x, beta) = lambda(x, Ad(k) beta)`.
pub fn transport_weight(space: &ModelSpace, x: &ModelPoint, g: &GroupElement, beta: &Direction) -> Result<MaximalWeight> {
    let (k, _) = space.setup.parabolic_split(&g.inverse()?, beta)?;
    let moved = Direction::new(&k.adjoint_action(&beta.matrix)?)?;
    Ok(max_weight(space, x, &moved))
}

/// `(-lambda(x, beta)/|beta|, min_g |mu_p(g x)|)`; the left side is `-∞`
/// when the weight is infinite.
pub fn moment_weight_margin(space: &ModelSpace, x: &ModelPoint, beta: &Direction, g_samples: &[GroupElement]) -> Result<(f64, f64)> {
    if beta.is_zero() {
        return Err(Error::ZeroDirection);
    }
    let lhs = match max_weight(space, x, beta).value {
        ExtReal::Finite(v) => -v / beta.norm(),
        ExtReal::PosInfinity => f64::NEG_INFINITY,
    };
    let mut min_rhs = f64::INFINITY;
    for g in g_samples {
        let gx = space.act(&g.matrix, x)?;
        min_rhs = min_rhs.min(space.gradient_map(&gx)?.norm);
    }
    Ok((lhs, min_rhs))
}

#[derive(Debug, Clone)]
pub enum Properness {
    /// `|v| <= c1 Phi(x, exp v) + c2` on every probe.
    Proper { c1: f64, c2: f64, min_weight: f64 },
    NotProper { witness: CMat, weight: ExtReal },
}

/// Linear properness of `Phi(x, exp(·))` on the span of an orthonormal
/// subset of `p`, decided from a sphere sweep of maximal weights.
pub fn properness_estimate(space: &ModelSpace, x: &ModelPoint, subspace: &[CMat], probe_radii: &[f64], sweep: usize) -> Result<Properness> {
    let n = space.n;
    let dirs: Vec<CMat> = sphere_sweep(subspace.len(), sweep)
        .into_iter()
        .map(|coords| subspace.iter().zip(&coords).fold(CMat::zeros(n, n), |acc, (b, &t)| acc + b * c(t)))
        .collect();
    if dirs.is_empty() {
        return Ok(Properness::Proper { c1: 0.0, c2: 0.0, min_weight: f64::INFINITY });
    }
    let mut worst: Option<(CMat, ExtReal)> = None;
    for d in &dirs {
        let beta = Direction::new(d)?;
        let w = max_weight(space, x, &beta).value;
        let lower = match (&worst, w) {
            (None, _) => true,
            (Some((_, ExtReal::Finite(a))), ExtReal::Finite(b)) => b < *a,
            (Some((_, ExtReal::PosInfinity)), ExtReal::Finite(_)) => true,
            _ => false,
        };
        if lower {
            worst = Some((d.clone(), w));
        }
    }
    let (witness, weight) = worst.expect("non-empty sweep");
    let m = match weight {
        ExtReal::Finite(m) if m <= 0.0 => return Ok(Properness::NotProper { witness, weight }),
        ExtReal::Finite(m) => m,
        ExtReal::PosInfinity => 1.0,
    };
    let c1 = 2.0 / m;
    let mut c2 = 0.0f64;
    for d in &dirs {
        let beta = Direction::new(d)?;
        for &r in probe_radii {
            let g = space.setup.exp_p(&(&beta.matrix * c(r)))?;
            c2 = c2.max(r - c1 * kn_value(space, x, &g.matrix)?);
        }
    }
    Ok(Properness::Proper { c1, c2, min_weight: m })
}

/// Rotate the eigenflag of `beta` (keeping its eigenvalues) so that each
/// factor of `x` has exactly zero coefficients above its leading index at
/// threshold `tau`. Used to turn nearly destabilizing numerical directions
/// into exact ones.
pub fn snap_direction(space: &ModelSpace, x: &ModelPoint, beta: &Direction, tau: f64) -> Result<Direction> {
    let n = space.n;
    let u = &beta.eig.vectors;
    let mut leading: Vec<Option<usize>> = vec![None; n];
    for (j, v) in x.reps.iter().enumerate() {
        let nv = v.norm();
        if nv == 0.0 {
            continue;
        }
        let coef = beta.eig.coefficients(v);
        if let Some(m) = (0..n).find(|&i| coef[i].norm() > tau * nv) {
            if leading[m].is_none() {
                leading[m] = Some(j);
            }
        }
    }
    let mut chosen: Vec<Option<CVec>> = vec![None; n];
    let mut used_old = vec![false; n];
    let residual = |w: &CVec, chosen: &[Option<CVec>]| {
        let mut r = w.clone();
        for _ in 0..2 {
            for q in chosen.iter().flatten() {
                let coef = q.dotc(&r);
                r -= q * coef;
            }
        }
        r
    };
    for i in (0..n).rev() {
        let mut pick = leading[i].map(|j| residual(&x.reps[j], &chosen)).filter(|r| r.norm() > 1e-8 * x.reps[leading[i].unwrap()].norm());
        if pick.is_none() {
            let own = residual(&u.column(i).into_owned(), &chosen);
            if own.norm() > 0.5 {
                used_old[i] = true;
                pick = Some(own);
            } else {
                let best = (0..=i)
                    .filter(|&k| !used_old[k])
                    .map(|k| (k, residual(&u.column(k).into_owned(), &chosen)))
                    .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()));
                if let Some((k, r)) = best {
                    used_old[k] = true;
                    pick = Some(r);
                }
            }
        }
        let r = pick.ok_or_else(|| Error::NumericFailure("flag rebuild degenerated".into()))?;
        let nr = r.norm();
        if nr < 1e-12 {
            return Err(Error::NumericFailure("flag rebuild degenerated".into()));
        }
        chosen[i] = Some(r / c(nr));
    }
    let mut new_u = CMat::zeros(n, n);
    for (i, col) in chosen.into_iter().enumerate() {
        new_u.set_column(i, &col.expect("filled"));
    }
    let mut scaled = new_u.clone();
    for j in 0..n {
        let a = c(beta.eig.values[j]);
        for i in 0..n {
            scaled[(i, j)] *= a;
        }
    }
    let m = &scaled * new_u.adjoint();
    Direction::new(&space.setup.project_p(&crate::linalg::hermitian_part(&m)))
}
