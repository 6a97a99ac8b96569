//! Acceptance criteria for the library and the scenario runner. Each
//! criterion prints one PASS/FAIL line; the process fails if any does.

use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use realgit::flows::{energy_quadrature, flow_at, hessian_fixed_point, hessian_mu_fd};
use realgit::kempfness::{kn_cocycle_defect, kn_convexity_scan, kn_descend, kn_value, DescentOptions, DescentStatus};
use realgit::linalg::{real_diag, CVec, C64};
use realgit::sampling::{random_group_element, random_k_element, random_point, random_unit_p};
use realgit::stability::{
    centralizer_reduction, classify, commuting_delta, commuting_limit_check, multiplicity_oracle, stratify, Certificate, ClassifyOptions, CommutingOptions,
    ReductionOptions, StabilityClass, TripleTransport,
};
use realgit::weights::{max_weight, max_weight_numeric, moment_weight_margin, transport_weight, weight_tail_bound};
use realgit::flows::NormSquareFlowOptions;
use realgit::{Direction, Error, ExtReal, Field, GroupKind, ModelPoint, ModelSpace, ReductiveSetup, Tangent};
use realgit_cli::commands::kn_derivative_defect;
use realgit_cli::{parse_scenario, run, Params, ReportFormat};

type Outcome = Result<String, String>;
type Criterion = (usize, &'static str, fn() -> Outcome);

fn ok_if(pass: bool, detail: String) -> Outcome {
    if pass {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lift<T>(r: realgit::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn projective(kind: GroupKind, n: usize, field: Field) -> ModelSpace {
    ModelSpace::projective(ReductiveSetup::new(kind, n).unwrap(), field).unwrap()
}

fn linear(kind: GroupKind, n: usize) -> ModelSpace {
    ModelSpace::linear(ReductiveSetup::new(kind, n).unwrap(), Field::Real).unwrap()
}

fn direction(space: &ModelSpace, rng: &mut ChaCha8Rng) -> Result<Direction, String> {
    lift(Direction::new(&random_unit_p(&space.setup, rng)))
}

fn diag_direction(d: &[f64]) -> Direction {
    Direction::new(&real_diag(d)).unwrap()
}

fn random_tangent(space: &ModelSpace, x: &ModelPoint, rng: &mut ChaCha8Rng) -> Result<Tangent, String> {
    let mut u = space.zero_tangent();
    for b in lift(space.tangent_basis(x))? {
        let t: f64 = rng.sample(StandardNormal);
        u = u.add(&b.scale(t));
    }
    Ok(u.scale(1.0 / space.tangent_norm(x, &u)))
}

fn finite(v: ExtReal) -> Result<f64, String> {
    v.finite().ok_or_else(|| format!("expected a finite weight, got {v:?}"))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let space = projective(GroupKind::SlR, 4, Field::Real);
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x = lift(random_point(&space, &mut rng))?;
        let beta = direction(&space, &mut rng)?;
        let u = random_tangent(&space, &x, &mut rng)?;
        let h = 1e-6;
        let up = lift(space.mu_beta(&lift(space.retract(&x, &u.scale(h)))?, &beta.matrix))?;
        let down = lift(space.mu_beta(&lift(space.retract(&x, &u.scale(-h)))?, &beta.matrix))?;
        let fd = (up - down) / (2.0 * h);
        let pairing = space.metric(&x, &lift(space.fundamental_field(&beta.matrix, &x))?, &u);
        worst = worst.max((fd - pairing).abs() / pairing.abs());
    }
    let secs = start.elapsed().as_secs_f64();
    ok_if(worst <= 1e-5 && secs < 1.0, format!("max relative error {worst:.2e}, {secs:.3} s"))
}

fn criterion_2() -> Outcome {
    let space = projective(GroupKind::SlR, 3, Field::Real);
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (mut gap, mut identity, mut beyond_tail): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut worst_spacing = f64::NAN;
    for _ in 0..50 {
        let x = lift(random_point(&space, &mut rng))?;
        let beta = direction(&space, &mut rng)?;
        let closed = finite(max_weight(&space, &x, &beta).value)?;
        let numeric = finite(lift(max_weight_numeric(&space, &x, &beta, 40.0))?.value)?;
        let diff = (closed - numeric).abs();
        if diff > gap {
            gap = diff;
            worst_spacing = beta.eigenvalues().windows(2).map(|w| (w[1] - w[0]).abs()).fold(f64::INFINITY, f64::min);
        }
        beyond_tail = beyond_tail.max(diff - weight_tail_bound(&space, &x, &beta, 40.0));
        let lambda0 = lift(space.mu_beta(&x, &beta.matrix))?;
        let e = finite(lift(energy_quadrature(&space, &x, &beta, 1e-12, 2000.0))?)?;
        identity = identity.max((closed - lambda0 - e).abs());
    }
    ok_if(
        gap <= 1e-6 && identity <= 1e-7,
        format!(
            "flow gap at t = 40 {gap:.2e} (smallest eigenvalue spacing of that beta {worst_spacing:.3}, gap beyond the spectral tail bound {beyond_tail:.2e}), energy identity {identity:.2e}"
        ),
    )
}

fn criterion_3() -> Outcome {
    let space = projective(GroupKind::SlR, 3, Field::Real);
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut excess = f64::NEG_INFINITY;
    for _ in 0..100 {
        let x = lift(random_point(&space, &mut rng))?;
        let beta = direction(&space, &mut rng)?;
        let gs = (0..100).map(|_| random_group_element(&space.setup, 1.0, &mut rng)).collect::<realgit::Result<Vec<_>>>();
        let (lhs, rhs) = lift(moment_weight_margin(&space, &x, &beta, &lift(gs)?))?;
        excess = excess.max(lhs - rhs);
    }
    let line = projective(GroupKind::SlR, 2, Field::Real);
    let x = lift(line.point_real(&[0.0, 1.0]))?;
    let beta = diag_direction(&[1.0, -1.0]);
    let (lhs, rhs) = lift(moment_weight_margin(&line, &x, &beta, &[line.setup.identity()]))?;
    // lambda = -1, |beta| = sqrt 2, mu_p([0:1]) = diag(-1/2, 1/2)
    let expected = 1.0 / 2f64.sqrt();
    let sharp = (lhs - rhs).abs().max((lhs - expected).abs());
    ok_if(excess <= 1e-9 && sharp <= 1e-9, format!("max excess {excess:.2e}, sharp case defect {sharp:.2e}"))
}

fn criterion_4() -> Outcome {
    let space = projective(GroupKind::SlR, 3, Field::Real);
    let setup = &space.setup;
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let (mut cocycle, mut kinv, mut deriv): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..100 {
        let x = lift(random_point(&space, &mut rng))?;
        let g = lift(random_group_element(setup, 0.5, &mut rng))?;
        let h = lift(random_group_element(setup, 0.5, &mut rng))?;
        let k = lift(random_k_element(setup, &mut rng))?;
        cocycle = cocycle.max(lift(kn_cocycle_defect(&space, &x, &g.matrix, &h.matrix))?);
        let value = lift(kn_value(&space, &x, &g.matrix))?;
        kinv = kinv.max((lift(kn_value(&space, &x, &(&k.matrix * &g.matrix)))? - value).abs());
        deriv = deriv.max(lift(kn_derivative_defect(&space, &x, &random_unit_p(setup, &mut rng)))?);
    }
    let grid: Vec<f64> = (0..=40).map(|i| -2.0 + 0.1 * i as f64).collect();
    let mut convex = f64::INFINITY;
    for _ in 0..50 {
        let x = lift(random_point(&space, &mut rng))?;
        let v = random_unit_p(setup, &mut rng);
        convex = convex.min(lift(kn_convexity_scan(&space, &x, &v, &grid))?.min_second_difference);
    }
    ok_if(
        cocycle < 1e-9 && kinv < 1e-10 && convex >= -1e-8 && deriv <= 1e-7,
        format!("cocycle {cocycle:.2e}, K-invariance {kinv:.2e}, min second difference {convex:.2e}, derivative {deriv:.2e}"),
    )
}

fn criterion_5() -> Outcome {
    let space = linear(GroupKind::SlR, 2);
    let opts = ClassifyOptions::default();
    let e2 = lift(space.point_real(&[0.0, 1.0]))?;
    let origin = lift(space.point_real(&[0.0, 0.0]))?;
    // the orbit of (0,1) is R^2 minus the origin, whose closure contains the fixed point 0
    let squeezed = lift(space.act(&real_diag(&[20f64.exp(), (-20f64).exp()]), &e2))?;
    let closure_hits_zero = squeezed.reps[0].norm() < 1e-8;
    let v1 = lift(classify(&space, &e2, &opts))?;
    let v0 = lift(classify(&space, &origin, &opts))?;
    let dim_px = match &v0.certificate {
        Certificate::Minimizer { dim_px, .. } => *dim_px,
        _ => 0,
    };
    let descent = lift(kn_descend(&space, &e2, &DescentOptions::default()))?;
    let not_converged = descent.status != DescentStatus::Converged;
    let status = match descent.status {
        DescentStatus::Converged => "converged",
        DescentStatus::Stalled => "stalled",
        DescentStatus::DivergentRay(_) => "divergent ray",
        DescentStatus::Drifting(_) => "drifting",
    };
    ok_if(
        closure_hits_zero
            && v1.class == StabilityClass::StrictlySemistable
            && v0.class == StabilityClass::Polystable
            && dim_px > 0
            && descent.infimum_grad_norm < 1e-6
            && not_converged,
        format!(
            "(0,1) {}, 0 {} with dim p_x {dim_px}, descent infimum {:.2e} status {status}",
            v1.class, v0.class, descent.infimum_grad_norm
        ),
    )
}

fn partitions(m: usize, max: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in (1..=m.min(max)).rev() {
        for mut rest in partitions(m - first, first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

fn sphere_points() -> Vec<CVec> {
    [(1.0, 0.0, 0.0, 0.0), (0.0, 0.0, 1.0, 0.0), (1.0, 0.0, 1.0, 0.0), (1.0, 0.0, 0.3, -1.2), (1.0, 0.0, -2.0, 0.5)]
        .iter()
        .map(|&(a, b, p, q)| CVec::from_vec(vec![C64::new(a, b), C64::new(p, q)]))
        .collect()
}

fn configuration(pattern: &[usize]) -> (ModelSpace, ModelPoint, Vec<CVec>) {
    let m: usize = pattern.iter().sum();
    let space = ModelSpace::configuration(ReductiveSetup::new(GroupKind::SlC, 2).unwrap(), Field::Complex, vec![1.0; m]).unwrap();
    let pts = sphere_points();
    let reps: Vec<CVec> = pattern.iter().enumerate().flat_map(|(i, &k)| std::iter::repeat_n(pts[i].clone(), k)).collect();
    let x = space.point(reps.clone()).unwrap();
    (space, x, reps)
}

fn multiplicity_rule(pattern: &[usize]) -> StabilityClass {
    let m: usize = pattern.iter().sum();
    let max = *pattern.iter().max().unwrap();
    if 2 * max > m {
        StabilityClass::Unstable
    } else if 2 * max < m {
        StabilityClass::Stable
    } else if pattern.len() == 2 {
        StabilityClass::Polystable
    } else {
        StabilityClass::StrictlySemistable
    }
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    let mut count = 0;
    for m in 1..=5 {
        for pattern in partitions(m, m) {
            let (space, x, reps) = configuration(&pattern);
            let expected = multiplicity_rule(&pattern);
            let oracle = multiplicity_oracle(&reps, &vec![1.0; m]);
            let got = lift(classify(&space, &x, &ClassifyOptions::default()))?.class;
            count += 1;
            if got != expected || oracle != expected {
                mismatches.push(format!("{pattern:?}: classifier {got}, oracle {oracle}, rule {expected}"));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ok_if(mismatches.is_empty() && secs < 30.0, format!("{count} patterns, {} mismatches {mismatches:?}, {secs:.2} s", mismatches.len()))
}

fn criterion_7() -> Outcome {
    let space = projective(GroupKind::SlR, 3, Field::Real);
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut worst: f64 = 0.0;
    let mut nontrivial = 0;
    for _ in 0..50 {
        let g = lift(random_group_element(&space.setup, 1.0, &mut rng))?;
        let x = lift(random_point(&space, &mut rng))?;
        let beta = direction(&space, &mut rng)?;
        let moved = finite(lift(transport_weight(&space, &x, &g, &beta))?.value)?;
        let direct = finite(max_weight(&space, &lift(space.act(&g.matrix, &x))?, &beta).value)?;
        worst = worst.max((moved - direct).abs());
        let (_, p) = lift(space.setup.parabolic_split(&g, &beta))?;
        let unitary_defect = (&p.matrix * p.matrix.adjoint() - realgit::linalg::identity(3)).norm();
        if unitary_defect > 1e-3 {
            nontrivial += 1;
        }
    }
    ok_if(worst <= 1e-6 && nontrivial >= 25, format!("max gap {worst:.2e}, {nontrivial}/50 with a non-compact parabolic factor"))
}

fn criterion_8() -> Outcome {
    let opts = ReductionOptions::default();
    let mut semistable: Vec<(String, ModelSpace, ModelPoint)> = Vec::new();
    let sl2 = linear(GroupKind::SlR, 2);
    for v in [[0.0, 1.0], [1.0, 1.0], [0.0, 0.0]] {
        semistable.push((format!("SL_R(2) on R^2 {v:?}"), sl2.clone(), sl2.point_real(&v).unwrap()));
    }
    let torus_lin = linear(GroupKind::DiagTorusR, 3);
    for v in [[1.0, 1.0, 1.0], [1.0, 2.0, 0.0]] {
        semistable.push((format!("torus on R^3 {v:?}"), torus_lin.clone(), torus_lin.point_real(&v).unwrap()));
    }
    let torus_proj = projective(GroupKind::DiagTorusR, 3, Field::Real);
    for v in [[1.0, 1.0, 1.0], [1.0, 2.0, 3.0]] {
        semistable.push((format!("torus on RP^2 {v:?}"), torus_proj.clone(), torus_proj.point_real(&v).unwrap()));
    }
    for pattern in [vec![1, 1], vec![1, 1, 1], vec![2, 2], vec![2, 1, 1], vec![1, 1, 1, 1], vec![2, 2, 1], vec![2, 1, 1, 1], vec![1, 1, 1, 1, 1]] {
        let (space, x, _) = configuration(&pattern);
        semistable.push((format!("configuration {pattern:?}"), space, x));
    }
    let mut failures = Vec::new();
    let mut max_terminal: f64 = 0.0;
    for (name, space, x) in &semistable {
        match centralizer_reduction(space, x, &opts) {
            Ok(chain) => {
                max_terminal = max_terminal.max(chain.terminal_grad_norm);
                if chain.steps.len() > space.setup.dim_a() || chain.terminal_grad_norm.is_nan() || chain.terminal_grad_norm >= 1e-6 {
                    failures.push(format!("{name}: {} steps, terminal {:.2e}", chain.steps.len(), chain.terminal_grad_norm));
                }
            }
            Err(e) => failures.push(format!("{name}: {e}")),
        }
    }
    let mut unstable: Vec<(String, ModelSpace, ModelPoint)> = Vec::new();
    let line = projective(GroupKind::SlR, 2, Field::Real);
    unstable.push(("SL_R(2) on RP^1 [1:0]".into(), line.clone(), line.point_real(&[1.0, 0.0]).unwrap()));
    let plane = projective(GroupKind::SlR, 3, Field::Real);
    unstable.push(("SL_R(3) on RP^2 [1:2:3]".into(), plane.clone(), plane.point_real(&[1.0, 2.0, 3.0]).unwrap()));
    unstable.push(("torus on RP^2 [1:0:0]".into(), torus_proj.clone(), torus_proj.point_real(&[1.0, 0.0, 0.0]).unwrap()));
    for pattern in [vec![2, 1], vec![3, 1, 1], vec![3, 2], vec![1]] {
        let (space, x, _) = configuration(&pattern);
        unstable.push((format!("configuration {pattern:?}"), space, x));
    }
    for (name, space, x) in &unstable {
        match centralizer_reduction(space, x, &opts) {
            Err(Error::NotSemistable { .. }) => {}
            Err(e) => failures.push(format!("{name}: unexpected error {e}")),
            Ok(_) => failures.push(format!("{name}: reduction succeeded on an unstable point")),
        }
    }
    ok_if(
        failures.is_empty(),
        format!("{} semistable inputs (max terminal {max_terminal:.2e}), {} unstable inputs, failures {failures:?}", semistable.len(), unstable.len()),
    )
}

/// `min |a_i| / |b_i|` over the joint spectrum of two commuting symmetric
/// matrices, read off the eigenvectors of a generic combination.
fn joint_delta(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let eig = (a + b * 0.371).symmetric_eigen();
    let mut delta = f64::INFINITY;
    for v in eig.eigenvectors.column_iter() {
        let ai = (v.transpose() * a * v)[(0, 0)];
        let bi = (v.transpose() * b * v)[(0, 0)];
        if ai.abs() > 1e-6 && bi.abs() > 1e-6 {
            delta = delta.min(ai.abs() / bi.abs());
        }
    }
    delta
}

fn criterion_9() -> Outcome {
    let space = projective(GroupKind::SlR, 4, Field::Real);
    let beta = diag_direction(&[1.0, 1.0, -1.0, -1.0]);
    let alpha = diag_direction(&[1.0, -1.0, 1.0, -1.0]);
    let e1 = lift(space.point_real(&[1.0, 0.0, 0.0, 0.0]))?;
    let report = lift(commuting_delta(&space, &alpha, &beta, std::slice::from_ref(&e1), &CommutingOptions::default()))?;
    let basis = lift(space.tangent_basis(&e1))?;
    let ha = lift(hessian_mu_fd(&space, &e1, &beta, &basis, 1e-4))?;
    let hb = lift(hessian_mu_fd(&space, &e1, &alpha, &basis, 1e-4))?;
    let fd_delta = joint_delta(&ha, &hb);
    let delta_ok = (report.delta - 1.0).abs() <= 1e-6 && (report.delta - fd_delta).abs() <= 1e-6;
    let probes_ok = report.fixed_set_equal && report.probes_checked == 10_000 && (report.epsilon_used - report.delta / 2.0).abs() < 1e-15;
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut residual: f64 = 0.0;
    for _ in 0..20 {
        let x = lift(random_point(&space, &mut rng))?;
        residual = residual.max(lift(commuting_limit_check(&space, &x, &alpha, &beta, report.epsilon_used))?.residual);
    }
    ok_if(
        delta_ok && probes_ok && residual < 1e-6,
        format!(
            "delta {:.9}, finite-difference delta {fd_delta:.9}, fixed sets equal on {} probes: {}, double-limit residual {residual:.2e}",
            report.delta, report.probes_checked, report.fixed_set_equal
        ),
    )
}

fn fixed_points() -> Vec<(String, ModelSpace, ModelPoint, Direction)> {
    let mut out = Vec::new();
    let plane = projective(GroupKind::SlR, 3, Field::Real);
    let b3 = diag_direction(&[1.0, 0.0, -1.0]);
    for i in 0..3 {
        let mut v = vec![0.0; 3];
        v[i] = 1.0;
        out.push((format!("RP^2 e{}", i + 1), plane.clone(), plane.point_real(&v).unwrap(), b3.clone()));
    }
    let line = projective(GroupKind::SlR, 2, Field::Real);
    let b2 = diag_direction(&[1.0, -1.0]);
    for v in [[1.0, 0.0], [0.0, 1.0]] {
        out.push((format!("RP^1 {v:?}"), line.clone(), line.point_real(&v).unwrap(), b2.clone()));
    }
    let space = projective(GroupKind::SlR, 4, Field::Real);
    let b4 = diag_direction(&[1.0, 1.0, -1.0, -1.0]);
    for v in [[1.0, 0.0, 0.0, 0.0], [1.0, 1.0, 0.0, 0.0], [0.0, 0.0, 1.0, -2.0], [0.0, 0.0, 0.0, 1.0]] {
        out.push((format!("RP^3 {v:?}"), space.clone(), space.point_real(&v).unwrap(), b4.clone()));
    }
    let lin = linear(GroupKind::SlR, 2);
    out.push(("R^2 origin".into(), lin.clone(), lin.point_real(&[0.0, 0.0]).unwrap(), b2));
    out
}

/// Counts of Hessian eigendirections that the flow contracts, keeps and
/// expands, from a small displacement flowed for unit time.
fn probe_signature(space: &ModelSpace, x: &ModelPoint, beta: &Direction, basis: &[Tangent], vectors: &DMatrix<f64>) -> Result<(usize, usize, usize), String> {
    let eps = 1e-5;
    let mut counts = (0, 0, 0);
    for col in vectors.column_iter() {
        let u = basis.iter().zip(col.iter()).fold(space.zero_tangent(), |acc, (b, &t)| acc.add(&b.scale(t)));
        let start = lift(space.retract(x, &u.scale(eps)))?;
        let moved = lift(flow_at(space, &start, beta, 1.0))?;
        let ratio = space.distance(&moved, x) / space.distance(&start, x);
        if ratio < 0.8 {
            counts.0 += 1;
        } else if ratio > 1.25 {
            counts.2 += 1;
        } else {
            counts.1 += 1;
        }
    }
    Ok(counts)
}

fn criterion_10() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut mismatches = Vec::new();
    let points = fixed_points();
    for (name, space, x, beta) in &points {
        let data = lift(hessian_fixed_point(space, x, beta))?;
        let second = lift(hessian_mu_fd(space, x, beta, &data.basis, 1e-4))?;
        worst = worst.max((&second - &data.operator_matrix).abs().max());
        let probes = probe_signature(space, x, beta, &data.basis, &data.eigenvectors)?;
        if probes != data.signature {
            mismatches.push(format!("{name}: Hessian {:?}, probes {probes:?}", data.signature));
        }
    }
    ok_if(worst <= 1e-4 && mismatches.is_empty(), format!("{} fixed points, max entry gap {worst:.2e}, signature mismatches {mismatches:?}", points.len()))
}

fn circle_grid(space: &ModelSpace, m: usize) -> Vec<ModelPoint> {
    (0..m)
        .map(|i| {
            let th = std::f64::consts::PI * i as f64 / m as f64;
            space.point_real(&[th.cos(), th.sin()]).unwrap()
        })
        .collect()
}

fn criterion_11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1111);
    let plane = projective(GroupKind::SlR, 3, Field::Real);
    let mut f_gap: f64 = 0.0;
    for _ in 0..10 {
        let g = lift(random_group_element(&plane.setup, 0.5, &mut rng))?;
        let t = lift(TripleTransport::new(&plane, &g))?;
        for _ in 0..100 {
            let x = lift(random_point(&plane, &mut rng))?;
            let f = lift(plane.norm_square(&lift(t.pull_back(&plane, &x))?))?;
            f_gap = f_gap.max((lift(t.f_prime(&plane, &x))? - f).abs() / f.max(1.0));
        }
    }

    let torus = projective(GroupKind::DiagTorusR, 2, Field::Real);
    let grid = circle_grid(&torus, 100);
    let opts = NormSquareFlowOptions::default();
    let base = lift(stratify(&torus, &grid, &opts))?;
    let mut strata_same = base.entries.iter().all(|e| e.error.is_none());
    for _ in 0..10 {
        let g = lift(random_group_element(&torus.setup, 0.5, &mut rng))?;
        let t = lift(TripleTransport::new(&torus, &g))?;
        let moved: Vec<ModelPoint> = lift(grid.iter().map(|x| torus.act(&g.matrix, x)).collect())?;
        let report = lift(t.stratify(&torus, &moved, &opts))?;
        strata_same &= report.strata == base.strata;
    }

    let sl2 = linear(GroupKind::SlR, 2);
    let cases: Vec<(ModelSpace, ModelPoint)> = vec![
        (sl2.clone(), sl2.point_real(&[0.0, 1.0]).unwrap()),
        (sl2.clone(), sl2.point_real(&[0.0, 0.0]).unwrap()),
        (torus.clone(), torus.point_real(&[1.0, 1.0]).unwrap()),
        (torus.clone(), torus.point_real(&[1.0, 0.0]).unwrap()),
        (torus.clone(), torus.point_real(&[1.0, 2.0]).unwrap()),
    ];
    let copts = ClassifyOptions::default();
    let mut verdicts_same = true;
    for (space, x) in &cases {
        let reference = lift(classify(space, x, &copts))?.class;
        for _ in 0..10 {
            let g = lift(random_group_element(&space.setup, 0.5, &mut rng))?;
            let t = lift(TripleTransport::new(space, &g))?;
            let gx = lift(space.act(&g.matrix, x))?;
            verdicts_same &= lift(t.classify(space, &gx, &copts))?.class == reference;
        }
    }
    ok_if(
        f_gap <= 1e-12 && strata_same && verdicts_same,
        format!("f' gap {f_gap:.2e}, strata {:?} unchanged: {strata_same}, verdicts unchanged: {verdicts_same}", base.strata.values().collect::<Vec<_>>()),
    )
}

const VERIFY_SCENARIO: &str = r#"{
  "group": {"kind": "SL_R", "n": 3},
  "model": {"kind": "projective", "field": "real"},
  "command": "verify",
  "params": {"seed": 12}
}"#;

fn criterion_12() -> Outcome {
    let scenario = parse_scenario(VERIFY_SCENARIO).map_err(|e| e.to_string())?;
    let render = || -> Result<String, String> { Ok(run(&scenario, &Params::default()).map_err(|e| e.to_string())?.report.render(ReportFormat::Json)) };
    let first = render()?;
    let second = render()?;
    let dir = std::env::temp_dir().join(format!("realgit-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let path = dir.join("verify.json");
    std::fs::write(&path, VERIFY_SCENARIO).map_err(|e| e.to_string())?;
    let invoke = || -> Result<Vec<u8>, String> {
        let out = std::process::Command::new(env!("CARGO_BIN_EXE_realgit")).arg(&path).output().map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("binary exited with {:?}", out.status.code()));
        }
        Ok(out.stdout)
    };
    let a = invoke()?;
    let b = invoke()?;
    let _ = std::fs::remove_dir_all(&dir);
    ok_if(
        first == second && a == b && a == first.as_bytes(),
        format!("library reports identical: {}, binary reports identical: {}, {} bytes", first == second, a == b, a.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        (1, "gradient identity", criterion_1),
        (2, "maximal-weight agreement", criterion_2),
        (3, "moment-weight inequality", criterion_3),
        (4, "Kempf-Ness axioms", criterion_4),
        (5, "SL(2,R) on R^2", criterion_5),
        (6, "configuration oracle equivalence", criterion_6),
        (7, "equivariance of lambda", criterion_7),
        (8, "centralizer reduction", criterion_8),
        (9, "commuting fields", criterion_9),
        (10, "Hessian identity", criterion_10),
        (11, "triple invariance", criterion_11),
        (12, "determinism", criterion_12),
    ];
    let mut failed = 0;
    for (n, name, f) in criteria {
        match f() {
            Ok(detail) => println!("criterion {n}: PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("criterion {n}: FAIL {name}: {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
