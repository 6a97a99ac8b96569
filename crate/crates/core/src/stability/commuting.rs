//! Commuting directions: the admissible range `0 < eps < delta` for which
//! the zeros of `(beta + eps alpha)_X` are the common zeros, the double-limit
//! check, and the pairing identity at fixed points.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::flows::{flow_limit, hessian_fixed_point, sorted_symmetric_eigen};
use crate::liealg::{Direction, GroupElement};
use crate::linalg::{c, commutator, fro_norm, CMat, CVec, C64};
use crate::spaces::{Field, ModelPoint, ModelSpace};

#[derive(Debug, Clone)]
pub struct CommutingOptions {
    pub probes: usize,
    pub seed: u64,
    /// Threshold on `|xi_X|` for a probe to count as a zero.
    pub zero_tol: f64,
}

impl Default for CommutingOptions {
    fn default() -> Self {
        Self { probes: 10_000, seed: 0, zero_tol: 1e-9 }
    }
}

#[derive(Debug, Clone)]
pub struct CommutingReport {
    pub alpha: CMat,
    pub beta: CMat,
    pub delta: f64,
    /// `(delta(x), [(a_i, b_i)])` per fixed-point sample.
    pub per_sample: Vec<(f64, Vec<(f64, f64)>)>,
    pub epsilon_used: f64,
    pub fixed_set_equal: bool,
    pub offending_probe: Option<ModelPoint>,
    pub probes_checked: usize,
    pub y_point: ModelPoint,
    pub z_point: ModelPoint,
    pub double_limit_residual: f64,
}

/// Joint eigenvalues `(a_i, b_i)` of two commuting symmetric matrices.
fn joint_spectrum(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Vec<(f64, f64)> {
    let (vals, vecs) = sorted_symmetric_eigen(a);
    let d = vals.len();
    let mut out = Vec::with_capacity(d);
    let mut start = 0;
    while start < d {
        let mut end = start + 1;
        while end < d && (vals[end] - vals[end - 1]).abs() < 1e-6 {
            end += 1;
        }
        let block = vecs.columns(start, end - start).into_owned();
        let restricted = block.transpose() * b * &block;
        let (bv, _) = sorted_symmetric_eigen(&((&restricted + restricted.transpose()) * 0.5));
        let mean = vals[start..end].iter().sum::<f64>() / (end - start) as f64;
        out.extend(bv.into_iter().map(|bi| (mean, bi)));
        start = end;
    }
    out
}

fn is_zero_of(space: &ModelSpace, x: &ModelPoint, xi: &CMat, tol: f64) -> Result<bool> {
    Ok(space.tangent_norm(x, &space.fundamental_field(xi, x)?) < tol)
}

fn random_in_columns(cols: &[CVec], field: Field, rng: &mut ChaCha8Rng) -> CVec {
    let n = cols[0].len();
    let mut v = CVec::zeros(n);
    for col in cols {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = if field == Field::Complex { StandardNormal.sample(rng) } else { 0.0 };
        v += col * C64::new(re, im);
    }
    v
}

fn eigenspaces(d: &Direction) -> Vec<Vec<CVec>> {
    d.eig
        .clusters()
        .into_iter()
        .map(|r| r.map(|i| d.eig.vectors.column(i).into_owned()).collect())
        .collect()
}

/// Common eigenspaces of two commuting Hermitian matrices.
fn common_eigenspaces(beta: &Direction, alpha: &CMat) -> Result<Vec<Vec<CVec>>> {
    let mut out = Vec::new();
    for space in eigenspaces(beta) {
        let basis = CMat::from_columns(&space);
        let restricted = basis.adjoint() * alpha * &basis;
        let inner = Direction::new(&crate::linalg::hermitian_part(&restricted))?;
        for sub in eigenspaces(&inner) {
            out.push(sub.iter().map(|w| &basis * w).collect());
        }
    }
    Ok(out)
}

/// `delta = min |a_i|/|b_i|` over the joint Hessian spectra at the samples,
/// then a probe-grid check of `X^{beta + eps alpha} = X^beta ∩ X^alpha` at
/// `eps = delta/2`, and a double-limit residual from a generic start.
pub fn commuting_delta(space: &ModelSpace, alpha: &Direction, beta: &Direction, samples: &[ModelPoint], opts: &CommutingOptions) -> Result<CommutingReport> {
    let comm = fro_norm(&commutator(&alpha.matrix, &beta.matrix));
    if comm > 1e-12 {
        return Err(Error::NotCommuting(comm));
    }
    for x in samples {
        for d in [alpha, beta] {
            let speed = space.tangent_norm(x, &space.fundamental_field(&d.matrix, x)?);
            if speed > 1e-10 {
                return Err(Error::NotFixed(speed));
            }
        }
    }
    let mut delta = f64::INFINITY;
    let mut per_sample = Vec::with_capacity(samples.len());
    for x in samples {
        let a = hessian_fixed_point(space, x, beta)?;
        let b = hessian_fixed_point(space, x, alpha)?;
        let pairs = joint_spectrum(&a.operator_matrix, &b.operator_matrix);
        let local = pairs
            .iter()
            .filter(|(ai, bi)| ai.abs() > 1e-9 && bi.abs() > 1e-9)
            .map(|(ai, bi)| ai.abs() / bi.abs())
            .fold(f64::INFINITY, f64::min);
        delta = delta.min(local);
        per_sample.push((local, pairs));
    }
    if !delta.is_finite() {
        return Err(Error::EmptyIndexSet);
    }
    let epsilon = delta / 2.0;
    let combined = Direction::new(&(&beta.matrix + &alpha.matrix * c(epsilon)))?;

    // probes: eigenspaces of the combined direction, of beta, of alpha, common ones, and generic points
    let mut families: Vec<Vec<CVec>> = Vec::new();
    families.extend(eigenspaces(&combined));
    families.extend(eigenspaces(beta));
    families.extend(eigenspaces(alpha));
    families.extend(common_eigenspaces(beta, &alpha.matrix)?);
    families.push((0..space.n).map(|i| CVec::from_fn(space.n, |r, _| if r == i { c(1.0) } else { c(0.0) })).collect());
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut fixed_set_equal = true;
    let mut offending = None;
    let mut checked = 0;
    for i in 0..opts.probes {
        let reps: Vec<CVec> = (0..space.factors())
            .map(|_| {
                let fam = &families[i % families.len()];
                let mut v = random_in_columns(fam, space.field, &mut rng);
                if v.norm() == 0.0 {
                    v = fam[0].clone();
                }
                v
            })
            .collect();
        let p = space.point(reps)?;
        checked += 1;
        let left = is_zero_of(space, &p, &combined.matrix, opts.zero_tol)?;
        let right = is_zero_of(space, &p, &beta.matrix, opts.zero_tol)? && is_zero_of(space, &p, &alpha.matrix, opts.zero_tol)?;
        if left != right {
            fixed_set_equal = false;
            offending = Some(p);
            break;
        }
    }

    let generic_reps: Vec<CVec> = (0..space.factors())
        .map(|_| {
            let cols: Vec<CVec> = (0..space.n).map(|i| CVec::from_fn(space.n, |r, _| if r == i { c(1.0) } else { c(0.0) })).collect();
            random_in_columns(&cols, space.field, &mut rng)
        })
        .collect();
    let generic = space.point(generic_reps)?;
    let check = commuting_limit_check(space, &generic, alpha, beta, epsilon)?;
    Ok(CommutingReport {
        alpha: alpha.matrix.clone(),
        beta: beta.matrix.clone(),
        delta,
        per_sample,
        epsilon_used: epsilon,
        fixed_set_equal,
        offending_probe: offending,
        probes_checked: checked,
        y_point: check.y,
        z_point: check.z,
        double_limit_residual: check.residual,
    })
}

#[derive(Debug, Clone)]
pub struct LimitCheck {
    pub y: ModelPoint,
    pub z: ModelPoint,
    pub w: ModelPoint,
    pub residual: f64,
}

/// `y = lim exp(t beta) x`, `z = lim exp(t alpha) y`,
/// `w = lim exp(t(beta + eps alpha)) x`, residual `d(w, z)`.
pub fn commuting_limit_check(space: &ModelSpace, x: &ModelPoint, alpha: &Direction, beta: &Direction, epsilon: f64) -> Result<LimitCheck> {
    let comm = fro_norm(&commutator(&alpha.matrix, &beta.matrix));
    if comm > 1e-12 {
        return Err(Error::NotCommuting(comm));
    }
    let y = flow_limit(space, x, beta, 1e-8)?;
    let z = flow_limit(space, &y, alpha, 1e-8)?;
    let combined = Direction::new(&(&beta.matrix + &alpha.matrix * c(epsilon)))?;
    let w = flow_limit(space, x, &combined, 1e-8)?;
    let residual = space.distance(&w, &z);
    Ok(LimitCheck { y, z, w, residual })
}

/// `max_g |<mu_p(x), beta> - <mu_p(g x), (Ad(g) beta)_p>|` at a fixed point of `beta`.
pub fn tecnico_check(space: &ModelSpace, x: &ModelPoint, beta: &Direction, g_samples: &[GroupElement]) -> Result<f64> {
    let speed = space.tangent_norm(x, &space.fundamental_field(&beta.matrix, x)?);
    if speed > 1e-10 {
        return Err(Error::NotFixed(speed));
    }
    let base = space.mu_beta(x, &beta.matrix)?;
    let mut worst = 0.0f64;
    for g in g_samples {
        let gx = space.act(&g.matrix, x)?;
        let moved = space.setup.project_p(&g.adjoint_action(&beta.matrix)?);
        worst = worst.max((base - space.mu_beta(&gx, &moved)?).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::{GroupKind, ReductiveSetup};
    use crate::linalg::real_diag;
    use crate::sampling::{random_group_element, random_k_element};

    fn cp3() -> ModelSpace {
        ModelSpace::projective(ReductiveSetup::new(GroupKind::SlR, 4).unwrap(), Field::Real).unwrap()
    }

    fn dirs() -> (Direction, Direction) {
        (Direction::new(&real_diag(&[1.0, -1.0, 1.0, -1.0])).unwrap(), Direction::new(&real_diag(&[1.0, 1.0, -1.0, -1.0])).unwrap())
    }

    #[test]
    fn cp3_delta_is_one() {
        let x = cp3();
        let (alpha, beta) = dirs();
        let e1 = x.point_real(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let opts = CommutingOptions { probes: 2000, ..CommutingOptions::default() };
        let r = commuting_delta(&x, &alpha, &beta, &[e1], &opts).unwrap();
        assert!((r.delta - 1.0).abs() < 1e-6, "{}", r.delta);
        let mut pairs: Vec<(i64, i64)> = r.per_sample[0].1.iter().map(|(a, b)| (a.round() as i64, b.round() as i64)).collect();
        pairs.sort();
        assert_eq!(pairs, vec![(-2, -2), (-2, 0), (0, -2)]);
        assert!(r.fixed_set_equal);
        assert!(r.double_limit_residual < 1e-6);
    }

    #[test]
    fn identical_and_nested_directions() {
        let x = cp3();
        let (_, beta) = dirs();
        let e1 = x.point_real(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let opts = CommutingOptions { probes: 200, ..CommutingOptions::default() };
        let r = commuting_delta(&x, &beta, &beta, &[e1.clone()], &opts).unwrap();
        assert!((r.delta - 1.0).abs() < 1e-6);
        // alpha vanishes on every Hessian direction where beta does not
        let alpha = Direction::new(&real_diag(&[1.0, 1.0, 1.0, -3.0])).unwrap();
        let e3 = x.point_real(&[0.0, 0.0, 1.0, 0.0]).unwrap();
        assert!(matches!(commuting_delta(&x, &alpha, &beta, &[e3], &opts), Err(Error::EmptyIndexSet)));
        let bad = Direction::new(&crate::linalg::from_real_rows(&[&[0.0, 1.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 0.0, 0.0]])).unwrap();
        assert!(matches!(commuting_delta(&x, &bad, &Direction::new(&real_diag(&[1.0, -1.0, 0.0, 0.0])).unwrap(), &[], &opts), Err(Error::NotCommuting(_))));
    }

    #[test]
    fn double_limits() {
        let x = cp3();
        let (alpha, beta) = dirs();
        let fixed = x.point_real(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let r = commuting_limit_check(&x, &fixed, &alpha, &beta, 0.5).unwrap();
        assert_eq!(r.residual, 0.0);
        let generic = x.point_real(&[0.3, -0.4, 1.1, 0.2]).unwrap();
        assert!(commuting_limit_check(&x, &generic, &alpha, &beta, 0.5).unwrap().residual < 1e-6);
        // beyond delta the combined flow can pick a different limit
        let mut failed = false;
        for (i, j) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
            let mut v = [0.0; 4];
            v[i] = 1.0;
            v[j] = 1.0;
            let p = x.point_real(&v).unwrap();
            if commuting_limit_check(&x, &p, &alpha, &beta, 2.0).unwrap().residual > 1e-6 {
                failed = true;
            }
        }
        assert!(failed);
    }

    #[test]
    fn tecnico_examples() {
        let s = ReductiveSetup::new(GroupKind::SlR, 2).unwrap();
        let x = ModelSpace::projective(s.clone(), Field::Real).unwrap();
        let e2 = x.point_real(&[0.0, 1.0]).unwrap();
        let beta = Direction::new(&real_diag(&[1.0, -1.0])).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let ks: Vec<GroupElement> = (0..10).map(|_| random_k_element(&s, &mut rng).unwrap()).collect();
        assert!(tecnico_check(&x, &e2, &beta, &ks).unwrap() < 1e-10);
        assert_eq!(tecnico_check(&x, &e2, &beta, &[s.identity()]).unwrap(), 0.0);
        let gs: Vec<GroupElement> = (0..10).map(|_| random_group_element(&s, 0.7, &mut rng).unwrap()).collect();
        assert!(tecnico_check(&x, &e2, &beta, &gs).unwrap() < 1e-7);
        assert!(matches!(tecnico_check(&x, &x.point_real(&[1.0, 1.0]).unwrap(), &beta, &gs), Err(Error::NotFixed(_))));
    }
}
