//! Seeded random sampling of algebra and group elements, and deterministic
//! direction sweeps over unit spheres.

use rand::Rng;
use rand_distr::StandardNormal;

use num_complex::Complex64;

use crate::error::Result;
use crate::liealg::{GroupElement, ReductiveSetup};
use crate::linalg::{c, fro_norm, zeros, CMat, CVec};
use crate::spaces::{Field, ModelPoint, ModelSpace};

/// Random element of `span(basis)` with i.i.d. normal coordinates times `scale`.
pub fn random_in_span<R: Rng>(basis: &[CMat], n: usize, scale: f64, rng: &mut R) -> CMat {
    basis.iter().fold(zeros(n), |acc, b| {
        let t: f64 = rng.sample(StandardNormal);
        acc + b * c(scale * t)
    })
}

pub fn random_p<R: Rng>(setup: &ReductiveSetup, scale: f64, rng: &mut R) -> CMat {
    random_in_span(&setup.p_basis, setup.n, scale, rng)
}

pub fn random_unit_p<R: Rng>(setup: &ReductiveSetup, rng: &mut R) -> CMat {
    loop {
        let x = random_p(setup, 1.0, rng);
        let nx = fro_norm(&x);
        if nx > 1e-3 {
            return x * c(1.0 / nx);
        }
    }
}

pub fn random_k_element<R: Rng>(setup: &ReductiveSetup, rng: &mut R) -> Result<GroupElement> {
    if setup.k_basis.is_empty() {
        return Ok(setup.identity());
    }
    let x = random_in_span(&setup.k_basis, setup.n, 1.5, rng);
    setup.exp_k(&x)
}

/// `k exp(xi)` with random `k` and `xi` of coordinate scale `scale`.
pub fn random_group_element<R: Rng>(setup: &ReductiveSetup, scale: f64, rng: &mut R) -> Result<GroupElement> {
    let k = random_k_element(setup, rng)?;
    let p = setup.exp_p(&random_p(setup, scale, rng))?;
    setup.element(&k.matrix * &p.matrix)
}

/// Random point with i.i.d. normal coordinates in every factor.
pub fn random_point<R: Rng>(space: &ModelSpace, rng: &mut R) -> Result<ModelPoint> {
    let reps = (0..space.factors())
        .map(|_| {
            CVec::from_fn(space.n, |_, _| {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = if space.field == Field::Complex { rng.sample(StandardNormal) } else { 0.0 };
                Complex64::new(re, im)
            })
        })
        .collect();
    space.point(reps)
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Deterministic, nearly uniform unit vectors in `R^dim`.
///
/// `dim == 1` gives `±1`; `dim == 2` gives `count` equally spaced angles;
/// higher dimensions use a Halton sequence pushed through Box-Muller, plus
/// the signed coordinate axes.
pub fn sphere_sweep(dim: usize, count: usize) -> Vec<Vec<f64>> {
    match dim {
        0 => Vec::new(),
        1 => vec![vec![1.0], vec![-1.0]],
        2 => {
            let m = count.max(4);
            (0..m)
                .map(|i| {
                    let th = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
                    vec![th.cos(), th.sin()]
                })
                .collect()
        }
        _ => {
            let mut out = Vec::with_capacity(count + 2 * dim);
            for axis in 0..dim {
                for s in [1.0, -1.0] {
                    let mut v = vec![0.0; dim];
                    v[axis] = s;
                    out.push(v);
                }
            }
            let pairs = dim.div_ceil(2);
            let mut i = 1u64;
            while out.len() < count.max(2 * dim + 1) {
                let mut v = Vec::with_capacity(2 * pairs);
                for p in 0..pairs {
                    let u1 = radical_inverse(i, PRIMES[(2 * p) % PRIMES.len()]).max(1e-12);
                    let u2 = radical_inverse(i, PRIMES[(2 * p + 1) % PRIMES.len()]);
                    let r = (-2.0 * u1.ln()).sqrt();
                    let th = 2.0 * std::f64::consts::PI * u2;
                    v.push(r * th.cos());
                    v.push(r * th.sin());
                }
                v.truncate(dim);
                let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                if nv > 1e-9 {
                    out.push(v.into_iter().map(|x| x / nv).collect());
                }
                i += 1;
            }
            out
        }
    }
}

/// Map sphere sweep coordinates onto unit matrices in `span(basis)`.
pub fn sweep_matrices(basis: &[CMat], n: usize, count: usize) -> Vec<CMat> {
    sphere_sweep(basis.len(), count)
        .into_iter()
        .map(|coords| basis.iter().zip(&coords).fold(zeros(n), |acc, (b, &t)| acc + b * c(t)))
        .collect()
}
