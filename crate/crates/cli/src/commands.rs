//! Command dispatch: one function per scenario command, each producing the
//! `result` value and the `residuals` of a report.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use realgit::flows::{flow_limit, sample_flow, FlowStatus, NormSquareFlowOptions, TraceSample};
use realgit::kempfness::{kn_descend, kn_report, kn_value, DescentOptions, DescentResult, DescentStatus};
use realgit::linalg::{c, exp_hermitian, CMat, CVec};
use realgit::sampling::{random_group_element, random_k_element, random_p, sphere_sweep};
use realgit::stability::{classify, stratify, Certificate, ClassifyOptions, StabilityVerdict};
use realgit::weights::{max_weight, max_weight_numeric, transport_weight, MaximalWeight};
use realgit::{ExtReal, Field, ModelKind, ModelPoint};
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::report::{matrix_json, number, object, point_json, Report};
use crate::scenario::{Command, EffectiveParams, Params, Prepared, Scenario};
use crate::verify::verify_suite;

pub type Residuals = BTreeMap<String, f64>;

/// A finished run: the report, the sampled `beta`-flow when a point and a
/// direction were given, and a failure message for a failed verify suite.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub trace: Option<Vec<TraceSample>>,
    pub failure: Option<String>,
}

pub fn run(scenario: &Scenario, overrides: &Params) -> CliResult<Outcome> {
    let params = EffectiveParams::resolve(&[scenario.params, *overrides])?;
    let prepared = scenario.prepare()?;
    let mut failure = None;
    let (result, residuals) = match scenario.command {
        Command::Classify => classify_command(&prepared, &params)?,
        Command::MaxWeight => max_weight_command(&prepared, &params)?,
        Command::Flow => flow_command(&prepared, &params)?,
        Command::KempfNess => kempf_ness_command(&prepared, &params)?,
        Command::Stratify => stratify_command(&prepared, &params)?,
        Command::Verify => {
            let suite = verify_suite(&prepared.space, &params)?;
            failure = suite.failure();
            (serde_json::to_value(&suite).expect("suite serializes"), suite.residuals())
        }
    };
    let trace = match (&prepared.point, &prepared.direction) {
        (Some(x), Some(beta)) => Some(sample_flow(&prepared.space, x, beta, params.t_max, params.steps, params.tol)?.samples),
        _ => None,
    };
    Ok(Outcome { report: Report::new(scenario, params, result, residuals), trace, failure })
}

fn point(p: &Prepared) -> &ModelPoint {
    p.point.as_ref().expect("checked by prepare")
}

fn ext(v: ExtReal) -> Value {
    serde_json::to_value(v).expect("extended reals serialize")
}

pub fn certificate_json(cert: &Certificate) -> Value {
    match cert {
        Certificate::DestabilizingDirection { beta, lambda } => {
            object([("kind", json!("destabilizing-direction")), ("beta", matrix_json(beta)), ("lambda", number(*lambda))])
        }
        Certificate::Minimizer { g, point, grad_norm, dim_px } => object([
            ("kind", json!("minimizer")),
            ("g", matrix_json(&g.matrix)),
            ("point", point_json(point)),
            ("grad_norm", number(*grad_norm)),
            ("dim_px", json!(dim_px)),
        ]),
        Certificate::ReductionChain(chain) => object([
            ("kind", json!("reduction-chain")),
            (
                "steps",
                Value::Array(
                    chain
                        .steps
                        .iter()
                        .map(|s| object([("beta", matrix_json(&s.beta)), ("lambda", number(s.lambda)), ("limit", point_json(&s.limit))]))
                        .collect(),
                ),
            ),
            ("terminal", point_json(&chain.terminal)),
            ("terminal_grad_norm", number(chain.terminal_grad_norm)),
        ]),
    }
}

pub fn verdict_json(v: &StabilityVerdict) -> Value {
    object([
        ("klass", json!(v.class.to_string())),
        ("certificate", certificate_json(&v.certificate)),
        ("iterations", json!(v.iterations)),
        ("infimum_grad_norm", number(v.infimum_grad_norm)),
        ("tol", number(v.tol)),
        ("budget", json!(v.budget)),
    ])
}

fn classify_command(p: &Prepared, params: &EffectiveParams) -> CliResult<(Value, Residuals)> {
    let x = point(p);
    let v = classify(&p.space, x, &ClassifyOptions { tol: params.tol, budget: params.budget })?;
    let mut residuals = Residuals::new();
    match &v.certificate {
        Certificate::DestabilizingDirection { beta, lambda } => {
            let d = p.space.setup.direction(beta)?;
            let again = max_weight(&p.space, x, &d).value.finite().unwrap_or(f64::INFINITY);
            residuals.insert("lambda_recheck".into(), (again - lambda).abs());
        }
        Certificate::Minimizer { grad_norm, .. } => {
            residuals.insert("grad_norm".into(), *grad_norm);
        }
        Certificate::ReductionChain(chain) => {
            residuals.insert("terminal_grad_norm".into(), chain.terminal_grad_norm);
        }
    }
    Ok((verdict_json(&v), residuals))
}

fn weight_json(w: &MaximalWeight) -> Value {
    object([
        ("value", ext(w.value)),
        ("method", serde_json::to_value(w.method).expect("methods serialize")),
        ("limit_point", w.limit_point.as_ref().map_or(Value::Null, point_json)),
        ("energy", ext(w.energy_value)),
        ("t_reached", number(w.t_reached)),
    ])
}

fn max_weight_command(p: &Prepared, params: &EffectiveParams) -> CliResult<(Value, Residuals)> {
    let (x, beta) = (point(p), p.direction.as_ref().expect("checked by prepare"));
    let closed = max_weight(&p.space, x, beta);
    let numeric = max_weight_numeric(&p.space, x, beta, params.t_max)?;
    let mut residuals = Residuals::new();
    if let (ExtReal::Finite(a), ExtReal::Finite(b)) = (closed.value, numeric.value) {
        residuals.insert("numeric_gap".into(), (a - b).abs());
    }
    let mut entries = vec![("closed_form", weight_json(&closed)), ("numeric", weight_json(&numeric))];
    if let Some(g) = &p.element {
        let moved = transport_weight(&p.space, x, g, beta)?;
        let direct = max_weight(&p.space, &p.space.act(&g.matrix, x)?, beta);
        if let (ExtReal::Finite(a), ExtReal::Finite(b)) = (moved.value, direct.value) {
            residuals.insert("transport_gap".into(), (a - b).abs());
        }
        entries.push(("transport", object([("transported", ext(moved.value)), ("direct", ext(direct.value))])));
    }
    entries.push(("value", ext(closed.value)));
    Ok((object(entries), residuals))
}

fn flow_command(p: &Prepared, params: &EffectiveParams) -> CliResult<(Value, Residuals)> {
    let (x, beta) = (point(p), p.direction.as_ref().expect("checked by prepare"));
    let traj = sample_flow(&p.space, x, beta, params.t_max, params.steps, params.tol)?;
    let (status, limit) = match &traj.status {
        FlowStatus::Converged(y) => ("converged", point_json(y)),
        FlowStatus::Diverged => ("diverged", Value::Null),
        FlowStatus::BudgetExceeded => ("undetermined", Value::Null),
    };
    let closed = match flow_limit(&p.space, x, beta, params.tol) {
        Ok(y) => point_json(&y),
        Err(realgit::Error::Diverged(_)) => json!("diverges"),
        Err(e) => return Err(e.into()),
    };
    let last = traj.samples.last().copied();
    let mut residuals = Residuals::new();
    if let Some(s) = last {
        residuals.insert("final_speed".into(), s.speed2.sqrt());
    }
    let result = object([
        ("status", json!(status)),
        ("limit", limit),
        ("closed_form_limit", closed),
        ("samples", json!(traj.samples.len())),
        ("final", last.map_or(Value::Null, |s| serde_json::to_value(s).expect("samples serialize"))),
    ]);
    Ok((result, residuals))
}

fn descent_json(r: &DescentResult) -> Value {
    let (status, ray) = match &r.status {
        DescentStatus::Converged => ("converged", Value::Null),
        DescentStatus::Stalled => ("stalled", Value::Null),
        DescentStatus::DivergentRay(b) => ("divergent-ray", matrix_json(b)),
        DescentStatus::Drifting(b) => ("drifting", matrix_json(b)),
    };
    object([
        ("status", json!(status)),
        ("ray", ray),
        ("iterations", json!(r.iterations)),
        ("final_grad_norm", number(r.final_grad_norm)),
        ("infimum_grad_norm", number(r.infimum_grad_norm)),
        ("phi_value", number(r.phi_value)),
        ("xi_norm", number(r.xi_norm)),
        ("minimizer", matrix_json(&r.minimizer.matrix)),
        ("point", point_json(&r.point)),
    ])
}

/// `|d/dt Phi(x, exp(t v))|_{t=0} - mu_p^v(x)|` by central differences.
pub fn kn_derivative_defect(space: &realgit::ModelSpace, x: &ModelPoint, v: &CMat) -> realgit::Result<f64> {
    let h = 1e-4;
    let fd = (kn_value(space, x, &exp_hermitian(&(v * c(h)))?)? - kn_value(space, x, &exp_hermitian(&(v * c(-h)))?)?) / (2.0 * h);
    Ok((fd - space.mu_beta(x, v)?).abs())
}

fn kempf_ness_command(p: &Prepared, params: &EffectiveParams) -> CliResult<(Value, Residuals)> {
    let x = point(p);
    let setup = &p.space.setup;
    let r = kn_descend(&p.space, x, &DescentOptions { tol: params.tol, budget: params.budget, ..DescentOptions::default() })?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let g = match &p.element {
        Some(g) => g.clone(),
        None => random_group_element(setup, 0.5, &mut rng)?,
    };
    let h = random_group_element(setup, 0.5, &mut rng)?;
    let k = random_k_element(setup, &mut rng)?;
    let v = random_p(setup, 0.5, &mut rng);
    let grid: Vec<f64> = (0..=40).map(|i| -2.0 + 0.1 * i as f64).collect();
    let axioms = kn_report(&p.space, x, &g.matrix, &h.matrix, &k.matrix, &v, &grid)?;
    let derivative_defect = kn_derivative_defect(&p.space, x, &v)?;
    let residuals = Residuals::from([
        ("cocycle_defect".to_string(), axioms.cocycle_defect),
        ("k_invariance_defect".to_string(), axioms.k_invariance_defect),
        ("convexity_deficit".to_string(), (-axioms.min_second_difference).max(0.0)),
        ("derivative_defect".to_string(), derivative_defect),
    ]);
    let result = object([
        ("descent", descent_json(&r)),
        ("element", matrix_json(&g.matrix)),
        ("axioms", serde_json::to_value(axioms).expect("axioms serialize")),
        ("derivative_defect", number(derivative_defect)),
    ]);
    Ok((result, residuals))
}

/// Real sphere sweep of the first factor: `n` real or `2n` real coordinates.
fn sweep_points(p: &Prepared, count: usize) -> CliResult<Vec<ModelPoint>> {
    if p.space.kind == ModelKind::Configuration {
        return Err(CliError::Malformed("stratify on configuration models needs an explicit grid".into()));
    }
    let n = p.space.n;
    let complex = p.space.field == Field::Complex;
    let dim = if complex { 2 * n } else { n };
    sphere_sweep(dim, count)
        .into_iter()
        .map(|coords| {
            let v = if complex {
                CVec::from_fn(n, |i, _| num_complex::Complex64::new(coords[2 * i], coords[2 * i + 1]))
            } else {
                CVec::from_fn(n, |i, _| c(coords[i]))
            };
            Ok(p.space.point(vec![v])?)
        })
        .collect()
}

fn stratify_command(p: &Prepared, params: &EffectiveParams) -> CliResult<(Value, Residuals)> {
    let points = match &p.grid {
        Some(g) => g.clone(),
        None => sweep_points(p, params.sweep)?,
    };
    let report = stratify(&p.space, &points, &NormSquareFlowOptions { tol: params.tol, budget: params.budget, ..NormSquareFlowOptions::default() })?;
    let strata = report
        .strata
        .iter()
        .map(|(key, count)| object([("orbit_key", json!(key.0)), ("values", json!(key.values())), ("count", json!(count))]))
        .collect();
    let entries = report
        .entries
        .iter()
        .map(|e| match (&e.label, &e.error) {
            (Some(l), _) => object([("index", json!(e.index)), ("f_value", number(l.f_value)), ("orbit_key", json!(l.orbit_key.0))]),
            (None, err) => object([("index", json!(e.index)), ("error", json!(err.clone().unwrap_or_default()))]),
        })
        .collect();
    let failed = report.entries.iter().filter(|e| e.label.is_none()).count();
    let result = object([("points", json!(points.len())), ("strata", Value::Array(strata)), ("entries", Value::Array(entries))]);
    Ok((result, Residuals::from([("failed_points".to_string(), failed as f64)])))
}
