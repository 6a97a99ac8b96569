//! One-parameter flows `exp(t beta) x`, their limits and energies, Hessians
//! at fixed points, and the negative gradient flow of `f = ½|mu_p|^2`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extended::ExtReal;
use crate::liealg::{Direction, GroupKind};
use crate::linalg::{c, CMat, CVec, EIGEN_CLUSTER_TOL};
use crate::spaces::{ModelPoint, ModelSpace, Tangent};

/// Coefficients below this fraction of the representative norm are treated
/// as zero when deciding the support of a point in an eigenbasis.
pub const SUPPORT_TOL: f64 = 1e-12;
/// Linear-model entries beyond this magnitude count as overflow.
pub const OVERFLOW_CAP: f64 = 1e150;
/// Rounding scale for stratum keys.
pub const STRATUM_CLUSTER_TOL: f64 = 1e-6;
/// Horizon cap for numeric limit detection.
pub const DEFAULT_T_MAX: f64 = 60.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceSample {
    pub t: f64,
    pub lambda: f64,
    pub speed2: f64,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FlowStatus {
    Converged(ModelPoint),
    Diverged,
    BudgetExceeded,
}

/// A sampled flow. For `beta`-flows `lambda` is `lambda(x, beta, t)` and
/// `speed2 = |beta_X|^2`; for the norm-square flow `lambda` is
/// `<mu_p, mu_p>` and `speed2 = |grad f|^2`.
#[derive(Debug, Clone)]
pub struct FlowTrajectory {
    pub samples: Vec<TraceSample>,
    pub points: Vec<ModelPoint>,
    pub status: FlowStatus,
}

fn scale_of(values: &[f64]) -> f64 {
    values.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

/// `exp(t beta) x` via the eigendecomposition of `beta`.
pub fn flow_at(space: &ModelSpace, x: &ModelPoint, beta: &Direction, t: f64) -> Result<ModelPoint> {
    let eig = &beta.eig;
    let mut reps = Vec::with_capacity(x.factors());
    for v in &x.reps {
        let coef = eig.coefficients(v);
        let exps: Vec<f64> = eig.values.iter().map(|a| t * a).collect();
        let scaled: CVec = if space.is_linear() {
            let out = CVec::from_iterator(coef.len(), coef.iter().zip(&exps).map(|(z, e)| z * c(e.exp())));
            if out.iter().any(|z| !(z.norm() <= OVERFLOW_CAP)) {
                return Err(Error::Overflow { t });
            }
            out
        } else {
            let shift = coef
                .iter()
                .zip(&exps)
                .filter(|(z, _)| z.norm() > 0.0)
                .map(|(_, &e)| e)
                .fold(f64::NEG_INFINITY, f64::max);
            CVec::from_iterator(coef.len(), coef.iter().zip(&exps).map(|(z, e)| z * c((e - shift).exp())))
        };
        reps.push(&eig.vectors * scaled);
    }
    space.point(reps)
}

/// Indices in the support of `v`, and the largest eigenvalue among them.
pub(crate) fn support_top(beta: &Direction, v: &CVec, threshold: f64) -> (Vec<usize>, Option<f64>) {
    let coef = beta.eig.coefficients(v);
    let nv = v.norm();
    let support: Vec<usize> = (0..coef.len()).filter(|&i| coef[i].norm() > threshold * nv).collect();
    let top = support.iter().map(|&i| beta.eig.values[i]).fold(None, |m: Option<f64>, a| Some(m.map_or(a, |m| m.max(a))));
    (support, top)
}

/// Closed-form limit of one factor, `None` when a linear flow diverges.
fn factor_limit(space: &ModelSpace, beta: &Direction, v: &CVec) -> Option<CVec> {
    let eig = &beta.eig;
    let scale = scale_of(&eig.values);
    let coef = eig.coefficients(v);
    let (_, top) = support_top(beta, v, SUPPORT_TOL);
    let target = match (space.is_linear(), top) {
        (true, None) => return Some(CVec::zeros(v.len())),
        (true, Some(top)) => {
            if top > EIGEN_CLUSTER_TOL * scale {
                return None;
            }
            0.0
        }
        (false, Some(top)) => top,
        (false, None) => unreachable!("projective representatives are nonzero"),
    };
    let mut out = CVec::zeros(v.len());
    for (i, &a) in eig.values.iter().enumerate() {
        if (a - target).abs() <= EIGEN_CLUSTER_TOL * scale {
            out += eig.vectors.column(i) * coef[i];
        }
    }
    Some(out)
}

/// `lim_{t→∞} exp(t beta) x` in closed form, checked to be a zero of `beta_X`.
pub fn flow_limit(space: &ModelSpace, x: &ModelPoint, beta: &Direction, tol: f64) -> Result<ModelPoint> {
    let mut reps = Vec::with_capacity(x.factors());
    for v in &x.reps {
        match factor_limit(space, beta, v) {
            Some(y) => reps.push(y),
            None => return Err(Error::Diverged("positive weight on the support of a linear point".into())),
        }
    }
    let y = space.point(reps)?;
    let speed = space.tangent_norm(&y, &space.fundamental_field(&beta.matrix, &y)?);
    if !(speed < tol) {
        return Err(Error::NumericFailure(format!("closed-form limit is not fixed (|beta_X| = {speed:.2e})")));
    }
    Ok(y)
}

/// Numeric limit detection: doubling horizon until `|beta_X| < tol` or `t_max`.
pub fn flow_limit_numeric(space: &ModelSpace, x: &ModelPoint, beta: &Direction, tol: f64, t_max: f64) -> FlowStatus {
    let mut t = 1.0;
    loop {
        let y = match flow_at(space, x, beta, t) {
            Ok(y) => y,
            Err(_) => return FlowStatus::Diverged,
        };
        let speed = match space.fundamental_field(&beta.matrix, &y) {
            Ok(f) => space.tangent_norm(&y, &f),
            Err(_) => return FlowStatus::Diverged,
        };
        if speed < tol {
            return FlowStatus::Converged(y);
        }
        if t >= t_max {
            if space.is_linear() && y.reps[0].norm() > x.reps[0].norm().max(1.0) * 1e3 {
                return FlowStatus::Diverged;
            }
            return FlowStatus::BudgetExceeded;
        }
        t = (2.0 * t).min(t_max);
    }
}

/// Sample `exp(t beta) x` on a uniform grid of `steps + 1` times in `[0, t_max]`.
pub fn sample_flow(space: &ModelSpace, x: &ModelPoint, beta: &Direction, t_max: f64, steps: usize, tol: f64) -> Result<FlowTrajectory> {
    let steps = steps.max(1);
    let mut samples = Vec::with_capacity(steps + 1);
    let mut points = Vec::with_capacity(steps + 1);
    let mut status = FlowStatus::BudgetExceeded;
    for i in 0..=steps {
        let t = t_max * i as f64 / steps as f64;
        let y = match flow_at(space, x, beta, t) {
            Ok(y) => y,
            Err(Error::Overflow { .. }) => {
                status = FlowStatus::Diverged;
                break;
            }
            Err(e) => return Err(e),
        };
        let field = space.fundamental_field(&beta.matrix, &y)?;
        let speed2 = space.metric(&y, &field, &field);
        samples.push(TraceSample { t, lambda: space.mu_beta(&y, &beta.matrix)?, speed2, f: space.norm_square(&y)? });
        if i == steps && speed2.sqrt() < tol {
            status = FlowStatus::Converged(y.clone());
        }
        points.push(y);
    }
    if status == FlowStatus::BudgetExceeded && space.is_linear() {
        if let (Some(first), Some(last)) = (points.first(), points.last()) {
            if last.reps[0].norm() > 1e3 * first.reps[0].norm().max(1.0) {
                status = FlowStatus::Diverged;
            }
        }
    }
    Ok(FlowTrajectory { samples, points, status })
}

/// Energy `E = ∫_0^∞ |beta_X(exp(t beta) x)|^2 dt` in closed form.
pub fn energy(space: &ModelSpace, x: &ModelPoint, beta: &Direction) -> ExtReal {
    let eig = &beta.eig;
    let scale = scale_of(&eig.values);
    let mut total = ExtReal::Finite(0.0);
    for (v, &w) in x.reps.iter().zip(&space.weights) {
        let coef = eig.coefficients(v);
        let (_, top) = support_top(beta, v, SUPPORT_TOL);
        let part = if space.is_linear() {
            match top {
                Some(top) if top > EIGEN_CLUSTER_TOL * scale => ExtReal::PosInfinity,
                _ => ExtReal::Finite(
                    eig.values
                        .iter()
                        .zip(coef.iter())
                        .filter(|(&a, _)| a < 0.0)
                        .map(|(&a, z)| 0.5 * a.abs() * z.norm_sqr())
                        .sum(),
                ),
            }
        } else {
            let nv2 = v.norm_squared();
            let start: f64 = eig.values.iter().zip(coef.iter()).map(|(&a, z)| a * z.norm_sqr()).sum::<f64>() / nv2;
            ExtReal::Finite((top.unwrap_or(start) - start).max(0.0))
        };
        total = total.add(part.scale(w));
    }
    total
}

fn simpson(f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, eps: f64, depth: u32) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * eps {
        return Ok(left + right + delta / 15.0);
    }
    Ok(simpson(f, a, m, fa, flm, fm, left, eps / 2.0, depth - 1)? + simpson(f, m, b, fm, frm, fb, right, eps / 2.0, depth - 1)?)
}

/// Energy by adaptive Simpson quadrature on doubling windows, to relative
/// accuracy `rel_tol`; `+∞` when the integrand blows up.
pub fn energy_quadrature(space: &ModelSpace, x: &ModelPoint, beta: &Direction, rel_tol: f64, t_cap: f64) -> Result<ExtReal> {
    let speed2 = |t: f64| -> Result<f64> {
        let y = flow_at(space, x, beta, t)?;
        let f = space.fundamental_field(&beta.matrix, &y)?;
        Ok(space.metric(&y, &f, &f))
    };
    let mut total = 0.0f64;
    let mut a = 0.0f64;
    let mut width = 0.5f64;
    loop {
        let b = (a + width).min(t_cap);
        let (fa, fb) = match (speed2(a), speed2(b)) {
            (Ok(fa), Ok(fb)) => (fa, fb),
            (Err(Error::Overflow { .. }), _) | (_, Err(Error::Overflow { .. })) => return Ok(ExtReal::PosInfinity),
            (Err(e), _) | (_, Err(e)) => return Err(e),
        };
        if fb > 1e100 {
            return Ok(ExtReal::PosInfinity);
        }
        let fm = speed2(0.5 * (a + b))?;
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        let eps = (rel_tol * 1e-2 * (total + whole.abs())).max(1e-15);
        let piece = simpson(&speed2, a, b, fa, fm, fb, whole, eps, 24)?;
        total += piece;
        a = b;
        if fb <= 1e-18 * total.max(1e-300) || fb < 1e-30 {
            return Ok(ExtReal::Finite(total));
        }
        if a >= t_cap {
            if space.is_linear() && fb > fa {
                return Ok(ExtReal::PosInfinity);
            }
            return Ok(ExtReal::Finite(total));
        }
        width = (2.0 * width).min(8.0);
    }
}

/// Hessian of `mu^beta` at a fixed point, represented as the differential
/// of `beta_X` in metric-orthonormal tangent coordinates.
#[derive(Debug, Clone)]
pub struct HessianData {
    pub operator_matrix: DMatrix<f64>,
    /// `(dim V_-, dim V_0, dim V_+)`.
    pub signature: (usize, usize, usize),
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<f64>,
    pub basis: Vec<Tangent>,
    pub symmetry_residual: f64,
}

/// Eigenvalues with absolute value below this are counted in `V_0`.
pub const HESSIAN_ZERO_TOL: f64 = 1e-6;

pub fn hessian_fixed_point(space: &ModelSpace, x: &ModelPoint, beta: &Direction) -> Result<HessianData> {
    let speed = space.tangent_norm(x, &space.fundamental_field(&beta.matrix, x)?);
    if !(speed < 1e-10) {
        return Err(Error::NotFixed(speed));
    }
    let basis = space.tangent_basis(x)?;
    let d = basis.len();
    let h = 1e-5;
    let mut m = DMatrix::<f64>::zeros(d, d);
    for (j, e) in basis.iter().enumerate() {
        let plus = space.retract(x, &e.scale(h))?;
        let minus = space.retract(x, &e.scale(-h))?;
        let fp = space.fundamental_field(&beta.matrix, &plus)?;
        let fm = space.fundamental_field(&beta.matrix, &minus)?;
        let diff = space.project_tangent(x, &fp.sub(&fm).scale(0.5 / h));
        for (i, ei) in basis.iter().enumerate() {
            m[(i, j)] = space.metric(x, ei, &diff);
        }
    }
    let symmetry_residual = (&m - m.transpose()).abs().max();
    let sym = (&m + m.transpose()) * 0.5;
    let (eigenvalues, eigenvectors) = sorted_symmetric_eigen(&sym);
    let signature = signature_of(&eigenvalues);
    Ok(HessianData { operator_matrix: sym, signature, eigenvalues, eigenvectors, basis, symmetry_residual })
}

/// Finite-difference Hessian of `mu^beta` in the same tangent coordinates.
pub fn hessian_mu_fd(space: &ModelSpace, x: &ModelPoint, beta: &Direction, basis: &[Tangent], h: f64) -> Result<DMatrix<f64>> {
    let d = basis.len();
    let mut out = DMatrix::<f64>::zeros(d, d);
    let mu_at = |u: &Tangent| -> Result<f64> { space.mu_beta(&space.retract(x, u)?, &beta.matrix) };
    for i in 0..d {
        for j in i..d {
            let ei = &basis[i];
            let ej = &basis[j];
            let pp = mu_at(&ei.scale(h).add(&ej.scale(h)))?;
            let pm = mu_at(&ei.scale(h).add(&ej.scale(-h)))?;
            let mp = mu_at(&ei.scale(-h).add(&ej.scale(h)))?;
            let mm = mu_at(&ei.scale(-h).add(&ej.scale(-h)))?;
            let v = (pp - pm - mp + mm) / (4.0 * h * h);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    Ok(out)
}

pub(crate) fn sorted_symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let d = m.nrows();
    if d == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let eig = m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::<f64>::zeros(d, d);
    for (k, &i) in order.iter().enumerate() {
        vectors.set_column(k, &eig.eigenvectors.column(i));
    }
    (values, vectors)
}

fn signature_of(values: &[f64]) -> (usize, usize, usize) {
    let neg = values.iter().filter(|&&v| v < -HESSIAN_ZERO_TOL).count();
    let pos = values.iter().filter(|&&v| v > HESSIAN_ZERO_TOL).count();
    (neg, values.len() - neg - pos, pos)
}

/// Canonical key of the `K`-orbit of a critical value `beta`: the sorted
/// eigenvalues for the full kinds, the diagonal itself for the tori (whose
/// `K` acts trivially on `p`), rounded at [`STRATUM_CLUSTER_TOL`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct OrbitKey(pub Vec<i64>);

impl OrbitKey {
    pub fn of(kind: GroupKind, beta: &CMat) -> Result<Self> {
        let round = |v: f64| (v / STRATUM_CLUSTER_TOL).round() as i64;
        if kind.is_torus() {
            return Ok(OrbitKey((0..beta.nrows()).map(|i| round(beta[(i, i)].re)).collect()));
        }
        let mut vals: Vec<f64> = if crate::linalg::hermitian_defect(beta) <= 1e-12 * crate::linalg::fro_norm(beta).max(1.0) {
            crate::linalg::HermEigen::new(beta)?.values
        } else {
            // similar to a Hermitian matrix, so the spectrum is real
            let schur = nalgebra::linalg::Schur::new(beta.clone());
            schur
                .eigenvalues()
                .ok_or_else(|| Error::NumericFailure("Schur form did not converge".into()))?
                .iter()
                .map(|z| z.re)
                .collect()
        };
        vals.sort_by(|a, b| b.total_cmp(a));
        Ok(OrbitKey(vals.into_iter().map(round).collect()))
    }

    pub fn values(&self) -> Vec<f64> {
        self.0.iter().map(|&k| k as f64 * STRATUM_CLUSTER_TOL).collect()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StratumLabel {
    #[serde(skip)]
    pub critical_beta: CMat,
    pub f_value: f64,
    pub orbit_key: OrbitKey,
}

impl StratumLabel {
    pub fn new(kind: GroupKind, critical_beta: CMat) -> Result<Self> {
        let f_value = 0.5 * crate::liealg::bform(&critical_beta, &critical_beta);
        let orbit_key = OrbitKey::of(kind, &critical_beta)?;
        Ok(Self { critical_beta, f_value, orbit_key })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct NormSquareFlowOptions {
    /// Stop once `|grad f| < tol`.
    pub tol: f64,
    /// Maximum number of accepted plus rejected steps.
    pub budget: usize,
    pub initial_step: f64,
    /// Local error tolerance of the embedded pair.
    pub step_tol: f64,
    /// Record every `record_every`-th accepted step.
    pub record_every: usize,
}

impl Default for NormSquareFlowOptions {
    fn default() -> Self {
        Self { tol: 1e-8, budget: 200_000, initial_step: 0.05, step_tol: 1e-10, record_every: 1 }
    }
}

#[derive(Debug, Clone)]
pub struct NormSquareFlow {
    pub trajectory: FlowTrajectory,
    pub limit: ModelPoint,
    pub label: StratumLabel,
    pub steps: usize,
}

/// `-grad f(x) = -(mu_p(x))_X(x)`.
pub fn norm_square_velocity(space: &ModelSpace, x: &ModelPoint) -> Result<Tangent> {
    let mu = space.gradient_map(x)?;
    Ok(space.fundamental_field(&mu.matrix, x)?.scale(-1.0))
}

fn norm_square_sample(space: &ModelSpace, x: &ModelPoint, t: f64) -> Result<(TraceSample, Tangent)> {
    let mu = space.gradient_map(x)?;
    let v = space.fundamental_field(&mu.matrix, x)?.scale(-1.0);
    let speed2 = space.metric(x, &v, &v);
    Ok((TraceSample { t, lambda: mu.norm * mu.norm, speed2, f: 0.5 * mu.norm * mu.norm }, v))
}

// Dormand-Prince 5(4) tableau
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

fn combine(x: &ModelPoint, ks: &[Tangent], coefs: &[f64], h: f64) -> Vec<CVec> {
    x.reps
        .iter()
        .enumerate()
        .map(|(j, v)| {
            let mut out = v.clone();
            for (k, &a) in ks.iter().zip(coefs) {
                if a != 0.0 {
                    out += &k.0[j] * c(h * a);
                }
            }
            out
        })
        .collect()
}

/// Integrate `x' = -grad f` with an adaptive Dormand-Prince pair, rejecting
/// steps that increase `f`, until `|grad f| < tol`.
pub fn neg_flow_normsq(space: &ModelSpace, x: &ModelPoint, opts: &NormSquareFlowOptions) -> Result<NormSquareFlow> {
    let mut cur = x.clone();
    let mut t = 0.0;
    let mut h = opts.initial_step;
    let (mut sample, mut k1) = norm_square_sample(space, &cur, t)?;
    let mut samples = vec![sample];
    let mut points = vec![cur.clone()];
    let mut steps = 0usize;
    let mut accepted = 0usize;
    while sample.speed2.sqrt() >= opts.tol {
        if steps >= opts.budget {
            return Err(Error::BudgetExceeded { budget: opts.budget });
        }
        steps += 1;
        let mut ks: Vec<Tangent> = vec![k1.clone()];
        for s in 1..7 {
            let stage = space.point(combine(&cur, &ks, &DP_A[s][..s], h))?;
            ks.push(norm_square_velocity(space, &stage)?);
        }
        let y5 = space.point(combine(&cur, &ks, &DP_B5, h))?;
        let y4 = combine(&cur, &ks, &DP_B4, h);
        let y5raw = combine(&cur, &ks, &DP_B5, h);
        let err = y5raw.iter().zip(&y4).map(|(a, b)| (a - b).norm_squared()).sum::<f64>().sqrt();
        let (next_sample, next_k1) = norm_square_sample(space, &y5, t + h)?;
        let f_ok = next_sample.f <= sample.f + 1e-12;
        if err <= opts.step_tol && f_ok {
            t += h;
            cur = y5;
            sample = next_sample;
            k1 = next_k1;
            accepted += 1;
            if accepted % opts.record_every.max(1) == 0 || sample.speed2.sqrt() < opts.tol {
                samples.push(sample);
                points.push(cur.clone());
            }
            let grow = if err > 0.0 { 0.9 * (opts.step_tol / err).powf(0.2) } else { 5.0 };
            h *= grow.clamp(0.2, 5.0);
        } else {
            let shrink = if err > opts.step_tol { 0.9 * (opts.step_tol / err).powf(0.2) } else { 0.5 };
            h *= shrink.clamp(0.1, 0.5);
            if h < 1e-14 {
                return Err(Error::NumericFailure("norm-square flow step size underflow".into()));
            }
        }
    }
    let mu = space.gradient_map(&cur)?;
    let label = StratumLabel::new(space.group_kind(), mu.matrix)?;
    Ok(NormSquareFlow {
        trajectory: FlowTrajectory { samples, points, status: FlowStatus::Converged(cur.clone()) },
        limit: cur,
        label,
        steps,
    })
}

/// Critical value `mu^beta` of the flow limit and its cluster key.
pub fn unstable_label(space: &ModelSpace, x: &ModelPoint, beta: &Direction) -> Result<(f64, i64)> {
    let y = flow_limit(space, x, beta, 1e-8)?;
    let value = space.mu_beta(&y, &beta.matrix)?;
    Ok((value, (value / STRATUM_CLUSTER_TOL).round() as i64))
}
