//! The invariant suite run by the `verify` command: seeded samples of the
//! gradient identity, weight agreement, the moment-weight inequality, the
//! Kempf-Ness axioms, equivariance of weights and triple invariance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use realgit::kempfness::{kn_cocycle_defect, kn_convexity_scan, kn_value};
use realgit::sampling::{random_group_element, random_k_element, random_point, random_unit_p};
use realgit::stability::TripleTransport;
use realgit::weights::{max_weight, max_weight_numeric, moment_weight_margin, transport_weight, weight_tail_bound};
use realgit::{Direction, ExtReal, ModelSpace, Result, Tangent};
use serde::Serialize;

use crate::commands::{kn_derivative_defect, Residuals};
use crate::scenario::EffectiveParams;

pub const SAMPLES: usize = 20;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub samples: usize,
    pub max_residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &'static str, residuals: &[f64], tolerance: f64) -> Self {
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        let passed = residuals.iter().all(|r| r.is_finite() && *r <= tolerance);
        Self { name, samples: residuals.len(), max_residual, tolerance, passed }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Suite {
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl Suite {
    pub fn failure(&self) -> Option<String> {
        let failed: Vec<&str> = self.checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        (!failed.is_empty()).then(|| failed.join(", "))
    }

    pub fn residuals(&self) -> Residuals {
        self.checks.iter().map(|c| (c.name.to_string(), c.max_residual)).collect()
    }
}

fn random_tangent(space: &ModelSpace, x: &realgit::ModelPoint, rng: &mut ChaCha8Rng) -> Result<Tangent> {
    let basis = space.tangent_basis(x)?;
    let mut u = space.zero_tangent();
    for b in &basis {
        let t: f64 = rng.sample(StandardNormal);
        u = u.add(&b.scale(t));
    }
    let nu = space.tangent_norm(x, &u);
    Ok(if nu > 0.0 { u.scale(1.0 / nu) } else { u })
}

fn direction(space: &ModelSpace, rng: &mut ChaCha8Rng) -> Result<Direction> {
    Direction::new(&random_unit_p(&space.setup, rng))
}

/// `|fd - pairing| / max(1, |pairing|)` for `d mu_p^beta (u)` against `<beta_X, u>`.
fn gradient_identity(space: &ModelSpace, rng: &mut ChaCha8Rng) -> Result<f64> {
    let x = random_point(space, rng)?;
    let beta = direction(space, rng)?;
    let u = random_tangent(space, &x, rng)?;
    let fd = space.mu_beta_derivative_fd(&x, &beta.matrix, &u, 1e-6)?;
    let pairing = space.metric(&x, &space.fundamental_field(&beta.matrix, &x)?, &u);
    Ok((fd - pairing).abs() / pairing.abs().max(1.0))
}

/// Gap between the closed form and the flow at `t_max`, beyond the
/// eigen-expansion tail bound.
fn weight_agreement(space: &ModelSpace, t_max: f64, rng: &mut ChaCha8Rng) -> Result<Option<f64>> {
    let x = random_point(space, rng)?;
    let beta = direction(space, rng)?;
    let closed = max_weight(space, &x, &beta).value;
    let numeric = max_weight_numeric(space, &x, &beta, t_max)?.value;
    Ok(match (closed, numeric) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) => Some(((a - b).abs() - weight_tail_bound(space, &x, &beta, t_max)).max(0.0)),
        (ExtReal::PosInfinity, ExtReal::PosInfinity) => None,
        _ => Some(f64::INFINITY),
    })
}

fn moment_weight(space: &ModelSpace, rng: &mut ChaCha8Rng) -> Result<f64> {
    let x = random_point(space, rng)?;
    let beta = direction(space, rng)?;
    let gs = (0..SAMPLES).map(|_| random_group_element(&space.setup, 1.0, rng)).collect::<Result<Vec<_>>>()?;
    let (lhs, rhs) = moment_weight_margin(space, &x, &beta, &gs)?;
    Ok((lhs - rhs).max(0.0))
}

struct Axioms {
    cocycle: f64,
    k_invariance: f64,
    convexity: f64,
    derivative: f64,
}

fn kempf_ness(space: &ModelSpace, rng: &mut ChaCha8Rng) -> Result<Axioms> {
    let setup = &space.setup;
    let x = random_point(space, rng)?;
    let g = random_group_element(setup, 0.5, rng)?;
    let h = random_group_element(setup, 0.5, rng)?;
    let k = random_k_element(setup, rng)?;
    let v = random_unit_p(setup, rng);
    let grid: Vec<f64> = (0..=40).map(|i| -2.0 + 0.1 * i as f64).collect();
    let scan = kn_convexity_scan(space, &x, &v, &grid)?;
    let value = kn_value(space, &x, &g.matrix)?;
    Ok(Axioms {
        cocycle: kn_cocycle_defect(space, &x, &g.matrix, &h.matrix)?,
        k_invariance: (kn_value(space, &x, &(&k.matrix * &g.matrix))? - value).abs(),
        convexity: (-scan.min_second_difference).max(0.0),
        derivative: kn_derivative_defect(space, &x, &v)?,
    })
}

fn equivariance(space: &ModelSpace, rng: &mut ChaCha8Rng) -> Result<Option<f64>> {
    let x = random_point(space, rng)?;
    let beta = direction(space, rng)?;
    let g = random_group_element(&space.setup, 1.0, rng)?;
    let moved = transport_weight(space, &x, &g, &beta)?.value;
    let direct = max_weight(space, &space.act(&g.matrix, &x)?, &beta).value;
    Ok(match (moved, direct) {
        (ExtReal::Finite(a), ExtReal::Finite(b)) => Some((a - b).abs()),
        (ExtReal::PosInfinity, ExtReal::PosInfinity) => None,
        _ => Some(f64::INFINITY),
    })
}

fn triple_invariance(space: &ModelSpace, rng: &mut ChaCha8Rng) -> Result<f64> {
    let g = random_group_element(&space.setup, 0.5, rng)?;
    let t = TripleTransport::new(space, &g)?;
    let x = random_point(space, rng)?;
    let back = t.pull_back(space, &x)?;
    let f = space.norm_square(&back)?;
    Ok((t.f_prime(space, &x)? - f).abs() / f.max(1.0))
}

pub fn verify_suite(space: &ModelSpace, params: &EffectiveParams) -> Result<Suite> {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut gradient = Vec::new();
    let mut weights = Vec::new();
    let mut margin = Vec::new();
    let (mut cocycle, mut kinv, mut convex, mut deriv) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let mut equi = Vec::new();
    let mut triple = Vec::new();
    for _ in 0..SAMPLES {
        gradient.push(gradient_identity(space, &mut rng)?);
        if let Some(r) = weight_agreement(space, params.t_max, &mut rng)? {
            weights.push(r);
        }
        margin.push(moment_weight(space, &mut rng)?);
        let a = kempf_ness(space, &mut rng)?;
        cocycle.push(a.cocycle);
        kinv.push(a.k_invariance);
        convex.push(a.convexity);
        deriv.push(a.derivative);
        if let Some(r) = equivariance(space, &mut rng)? {
            equi.push(r);
        }
        triple.push(triple_invariance(space, &mut rng)?);
    }
    let checks = vec![
        Check::new("gradient_identity", &gradient, 1e-5),
        Check::new("weight_agreement", &weights, 1e-6),
        Check::new("moment_weight_inequality", &margin, 1e-9),
        Check::new("kn_cocycle", &cocycle, 1e-9),
        Check::new("kn_k_invariance", &kinv, 1e-10),
        Check::new("kn_convexity", &convex, 1e-8),
        Check::new("kn_derivative", &deriv, 1e-7),
        Check::new("weight_equivariance", &equi, 1e-6),
        Check::new("triple_invariance", &triple, 1e-12),
    ];
    let passed = checks.iter().all(|c| c.passed);
    Ok(Suite { seed: params.seed, checks, passed })
}
