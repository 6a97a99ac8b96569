//! Model spaces `X` with gradient maps, fundamental fields and metrics.
//!
//! Normalization: `mu^beta([v]) = <beta v, v>/<v, v>` on projective factors
//! and `mu^beta(v) = ½<beta v, v>` on linear models. The metric is fixed by
//! requiring `grad mu^beta = beta_X`, which gives `Re<u, w>` on linear models
//! and `2 Re<u, w>/<v, v>` on projective factors (configurations weight each
//! factor by `w_j`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liealg::{bform, GroupKind, ReductiveSetup};
use crate::linalg::{c, fro_norm, zeros, CMat, CVec, C64};

/// Threshold on normal components when checking tangency.
pub const TANGENCY_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModelKind {
    Linear,
    Projective,
    Configuration,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Real,
    Complex,
}

/// A catalog model space acted on by a reductive setup.
#[derive(Debug, Clone)]
pub struct ModelSpace {
    pub kind: ModelKind,
    pub n: usize,
    pub field: Field,
    pub setup: ReductiveSetup,
    /// One positive weight per factor (a single `1.0` for linear and
    /// projective models).
    pub weights: Vec<f64>,
}

/// A point of a model space: one representative per factor.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPoint {
    pub reps: Vec<CVec>,
}

/// A tangent vector, stored in the same per-factor layout as points.
#[derive(Debug, Clone, PartialEq)]
pub struct Tangent(pub Vec<CVec>);

impl Tangent {
    pub fn scale(&self, s: f64) -> Tangent {
        Tangent(self.0.iter().map(|v| v * c(s)).collect())
    }

    pub fn add(&self, other: &Tangent) -> Tangent {
        Tangent(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Tangent) -> Tangent {
        Tangent(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }
}

/// Value of the gradient map, an element of `p`.
#[derive(Debug, Clone)]
pub struct GradientValue {
    pub matrix: CMat,
    pub norm: f64,
}

impl ModelPoint {
    pub fn single(v: CVec) -> Self {
        Self { reps: vec![v] }
    }

    pub fn factors(&self) -> usize {
        self.reps.len()
    }
}

impl ModelSpace {
    pub fn new(kind: ModelKind, field: Field, setup: ReductiveSetup, weights: Vec<f64>) -> Result<Self> {
        if field == Field::Real && !setup.kind.is_real() {
            return Err(Error::InvalidInput(format!("{} does not preserve a real model", setup.kind)));
        }
        let weights = match kind {
            ModelKind::Linear | ModelKind::Projective => {
                if !(weights.is_empty() || weights == [1.0]) {
                    return Err(Error::InvalidInput("weights apply to configuration models only".into()));
                }
                vec![1.0]
            }
            ModelKind::Configuration => {
                if weights.is_empty() {
                    return Err(Error::InvalidInput("configuration needs at least one weight".into()));
                }
                weights
            }
        };
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidInput("weights must be strictly positive".into()));
        }
        Ok(Self { kind, n: setup.n, field, setup, weights })
    }

    pub fn linear(setup: ReductiveSetup, field: Field) -> Result<Self> {
        Self::new(ModelKind::Linear, field, setup, Vec::new())
    }

    pub fn projective(setup: ReductiveSetup, field: Field) -> Result<Self> {
        Self::new(ModelKind::Projective, field, setup, Vec::new())
    }

    pub fn configuration(setup: ReductiveSetup, field: Field, weights: Vec<f64>) -> Result<Self> {
        Self::new(ModelKind::Configuration, field, setup, weights)
    }

    pub fn is_linear(&self) -> bool {
        self.kind == ModelKind::Linear
    }

    pub fn factors(&self) -> usize {
        self.weights.len()
    }

    pub fn group_kind(&self) -> GroupKind {
        self.setup.kind
    }

    /// Validate representatives; projective ones are stored unit-norm.
    pub fn point(&self, reps: Vec<CVec>) -> Result<ModelPoint> {
        if reps.len() != self.factors() {
            return Err(Error::InvalidPoint(format!("expected {} factors, got {}", self.factors(), reps.len())));
        }
        let mut out = Vec::with_capacity(reps.len());
        for mut v in reps {
            if v.len() != self.n {
                return Err(Error::InvalidPoint(format!("vector length {} != {}", v.len(), self.n)));
            }
            if v.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidPoint("non-finite coordinate".into()));
            }
            if self.field == Field::Real {
                let scale = v.norm().max(1.0);
                if v.iter().any(|z| z.im.abs() > 1e-14 * scale) {
                    return Err(Error::InvalidPoint("real model needs real coordinates".into()));
                }
                v.iter_mut().for_each(|z| z.im = 0.0);
            }
            if !self.is_linear() {
                let nv = v.norm();
                if nv == 0.0 {
                    return Err(Error::InvalidPoint("zero projective representative".into()));
                }
                v /= c(nv);
            }
            out.push(v);
        }
        Ok(ModelPoint { reps: out })
    }

    pub fn point_real(&self, coords: &[f64]) -> Result<ModelPoint> {
        self.point(vec![crate::linalg::cvec_real(coords)])
    }

    fn check(&self, x: &ModelPoint) -> Result<()> {
        if x.reps.len() != self.factors() || x.reps.iter().any(|v| v.len() != self.n) {
            return Err(Error::InvalidPoint("point does not match model shape".into()));
        }
        if !self.is_linear() && x.reps.iter().any(|v| v.norm() == 0.0) {
            return Err(Error::InvalidPoint("zero projective representative".into()));
        }
        Ok(())
    }

    /// The ambient Hermitian moment matrix before projection onto `p`.
    pub fn ambient_moment(&self, x: &ModelPoint) -> Result<CMat> {
        self.check(x)?;
        let mut m = zeros(self.n);
        for (v, &w) in x.reps.iter().zip(&self.weights) {
            let outer = v * v.adjoint();
            if self.is_linear() {
                m += outer * c(0.5 * w);
            } else {
                m += outer * c(w / v.norm_squared());
            }
        }
        Ok(m)
    }

    /// `mu_p(x)`.
    pub fn gradient_map(&self, x: &ModelPoint) -> Result<GradientValue> {
        let matrix = self.setup.project_p(&self.ambient_moment(x)?);
        let norm = bform(&matrix, &matrix).max(0.0).sqrt();
        Ok(GradientValue { matrix, norm })
    }

    /// `mu^beta(x) = <mu_p(x), beta>` for `beta` in `p`.
    pub fn mu_beta(&self, x: &ModelPoint, beta: &CMat) -> Result<f64> {
        self.check(x)?;
        let mut acc = 0.0;
        for (v, &w) in x.reps.iter().zip(&self.weights) {
            let q = v.dotc(&(beta * v)).re;
            acc += if self.is_linear() { 0.5 * w * q } else { w * q / v.norm_squared() };
        }
        Ok(acc)
    }

    /// Fundamental vector field `xi_X(x)` for `xi` in `g`.
    pub fn fundamental_field(&self, xi: &CMat, x: &ModelPoint) -> Result<Tangent> {
        self.check(x)?;
        let comps = x
            .reps
            .iter()
            .map(|v| {
                let xv = xi * v;
                if self.is_linear() {
                    xv
                } else {
                    let coef = v.dotc(&xv) / c(v.norm_squared());
                    xv - v * coef
                }
            })
            .collect();
        Ok(Tangent(comps))
    }

    /// Riemannian metric, rejecting non-tangent projective vectors.
    pub fn metric_eval(&self, x: &ModelPoint, u: &Tangent, w: &Tangent) -> Result<f64> {
        self.check(x)?;
        if !self.is_linear() {
            for t in [u, w] {
                for (v, comp) in x.reps.iter().zip(&t.0) {
                    let normal = v.dotc(comp).norm() / v.norm();
                    if normal > TANGENCY_TOL * comp.norm().max(1.0) {
                        return Err(Error::NotTangent(normal));
                    }
                }
            }
        }
        Ok(self.metric(x, u, w))
    }

    /// Metric without the tangency check.
    pub fn metric(&self, x: &ModelPoint, u: &Tangent, w: &Tangent) -> f64 {
        x.reps
            .iter()
            .zip(&self.weights)
            .zip(u.0.iter().zip(&w.0))
            .map(|((v, &wt), (a, b))| {
                let re = b.dotc(a).re;
                if self.is_linear() {
                    wt * re
                } else {
                    2.0 * wt * re / v.norm_squared()
                }
            })
            .sum()
    }

    pub fn tangent_norm(&self, x: &ModelPoint, u: &Tangent) -> f64 {
        self.metric(x, u, u).max(0.0).sqrt()
    }

    /// Remove normal components (projective factors) from an ambient vector.
    pub fn project_tangent(&self, x: &ModelPoint, u: &Tangent) -> Tangent {
        if self.is_linear() {
            return u.clone();
        }
        Tangent(
            x.reps
                .iter()
                .zip(&u.0)
                .map(|(v, a)| {
                    let coef = v.dotc(a) / c(v.norm_squared());
                    let mut t = a - v * coef;
                    if self.field == Field::Real {
                        t.iter_mut().for_each(|z| z.im = 0.0);
                    }
                    t
                })
                .collect(),
        )
    }

    /// Real dimension of the tangent space.
    pub fn tangent_dim(&self) -> usize {
        let per = match (self.is_linear(), self.field) {
            (true, Field::Real) => self.n,
            (true, Field::Complex) => 2 * self.n,
            (false, Field::Real) => self.n - 1,
            (false, Field::Complex) => 2 * (self.n - 1),
        };
        per * self.factors()
    }

    /// Metric-orthonormal basis of the tangent space at `x`.
    pub fn tangent_basis(&self, x: &ModelPoint) -> Result<Vec<Tangent>> {
        self.check(x)?;
        let mut out = Vec::with_capacity(self.tangent_dim());
        let zero = CVec::zeros(self.n);
        for (j, (v, &wt)) in x.reps.iter().zip(&self.weights).enumerate() {
            let dirs: Vec<CVec> = if self.is_linear() {
                (0..self.n)
                    .map(|i| {
                        let mut e = CVec::zeros(self.n);
                        e[i] = c(1.0);
                        e
                    })
                    .collect()
            } else {
                complement_basis(v)?
            };
            let scale = if self.is_linear() { 1.0 / wt.sqrt() } else { v.norm() / (2.0 * wt).sqrt() };
            let phases: &[C64] = match self.field {
                Field::Real => &[C64::new(1.0, 0.0)],
                Field::Complex => &[C64::new(1.0, 0.0), C64::new(0.0, 1.0)],
            };
            for d in &dirs {
                for &ph in phases {
                    let mut comps = vec![zero.clone(); self.factors()];
                    comps[j] = d * (ph * c(scale));
                    out.push(Tangent(comps));
                }
            }
        }
        Ok(out)
    }

    pub fn zero_tangent(&self) -> Tangent {
        Tangent(vec![CVec::zeros(self.n); self.factors()])
    }

    /// First-order retraction: `v + u` (normalized on projective factors).
    pub fn retract(&self, x: &ModelPoint, u: &Tangent) -> Result<ModelPoint> {
        let reps = x.reps.iter().zip(&u.0).map(|(v, a)| v + a).collect();
        self.point(reps)
    }

    /// Group action of an invertible matrix.
    pub fn act(&self, g: &CMat, x: &ModelPoint) -> Result<ModelPoint> {
        self.check(x)?;
        let reps = x.reps.iter().map(|v| g * v).collect();
        self.point(reps)
    }

    /// Distance used for residuals: Euclidean on linear models, chordal
    /// `sqrt(1 - |<v, w>|^2)` on projective factors.
    pub fn distance(&self, x: &ModelPoint, y: &ModelPoint) -> f64 {
        x.reps
            .iter()
            .zip(&y.reps)
            .map(|(a, b)| {
                if self.is_linear() {
                    (a - b).norm_squared()
                } else {
                    let ua = a / c(a.norm());
                    let ub = b / c(b.norm());
                    let rest = &ub - &ua * ua.dotc(&ub);
                    rest.norm_squared().min(1.0)
                }
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Finite-difference derivative of `mu^beta` along `u` (central, step `h`).
    pub fn mu_beta_derivative_fd(&self, x: &ModelPoint, beta: &CMat, u: &Tangent, h: f64) -> Result<f64> {
        let plus = self.retract(x, &u.scale(h))?;
        let minus = self.retract(x, &u.scale(-h))?;
        Ok((self.mu_beta(&plus, beta)? - self.mu_beta(&minus, beta)?) / (2.0 * h))
    }

    /// `f(x) = ½ B(mu_p(x), mu_p(x))`.
    pub fn norm_square(&self, x: &ModelPoint) -> Result<f64> {
        let g = self.gradient_map(x)?;
        Ok(0.5 * g.norm * g.norm)
    }

    /// Frobenius distance between two gradient values.
    pub fn gradient_gap(a: &GradientValue, b: &GradientValue) -> f64 {
        fro_norm(&(&a.matrix - &b.matrix))
    }
}

/// Orthonormal basis of the complex orthogonal complement of `v`.
fn complement_basis(v: &CVec) -> Result<Vec<CVec>> {
    let n = v.len();
    let u = v / c(v.norm());
    let mut basis: Vec<CVec> = vec![u];
    // add coordinate vectors in order of smallest overlap with v
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| basis[0][a].norm().total_cmp(&basis[0][b].norm()));
    for i in order {
        if basis.len() == n {
            break;
        }
        let mut e = CVec::zeros(n);
        e[i] = c(1.0);
        for _ in 0..2 {
            for b in &basis {
                let coef = b.dotc(&e);
                e -= b * coef;
            }
        }
        let ne = e.norm();
        if ne > 1e-6 {
            basis.push(e / c(ne));
        }
    }
    if basis.len() != n {
        return Err(Error::NumericFailure("tangent basis construction failed".into()));
    }
    basis.remove(0);
    Ok(basis)
}
