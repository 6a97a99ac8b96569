//! Brute-force oracles: convex-hull tests on torus weights (exact rational
//! arithmetic for integer data) and the multiplicity rule for point
//! configurations on the Riemann sphere.

use std::fmt::Debug;

use num_rational::Ratio;
use num_traits::{Num, Signed, ToPrimitive, Zero};

use super::StabilityClass;
use crate::linalg::{c, real_diag, CMat, CVec};
use crate::spaces::{ModelPoint, ModelSpace};

/// Relative threshold for a coordinate to count as support.
pub const ORACLE_SUPPORT_TOL: f64 = 1e-12;

pub trait OracleScalar: Clone + Debug + PartialOrd + Num + Signed {
    fn from_f64(v: f64) -> Self;
    fn to_f64(&self) -> f64;
    fn is_negligible(&self) -> bool;
}

impl OracleScalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn is_negligible(&self) -> bool {
        self.abs() < 1e-10
    }
}

impl OracleScalar for Ratio<i128> {
    fn from_f64(v: f64) -> Self {
        Ratio::from_integer(v.round() as i128)
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn is_negligible(&self) -> bool {
        self.is_zero()
    }
}

/// Reduce `[m | rhs]` and return the unique solution if the columns of `m`
/// are independent and the system is consistent.
fn solve_unique<S: OracleScalar>(cols: &[&Vec<S>], rhs: &[S]) -> Option<Vec<S>> {
    let rows = rhs.len();
    let k = cols.len();
    let mut a: Vec<Vec<S>> = (0..rows)
        .map(|i| {
            let mut r: Vec<S> = cols.iter().map(|col| col[i].clone()).collect();
            r.push(rhs[i].clone());
            r
        })
        .collect();
    let mut row = 0;
    for col in 0..k {
        let pivot = (row..rows)
            .filter(|&r| !a[r][col].is_negligible())
            .max_by(|&x, &y| a[x][col].abs().partial_cmp(&a[y][col].abs()).unwrap_or(std::cmp::Ordering::Equal))?;
        a.swap(row, pivot);
        let p = a[row][col].clone();
        for j in col..=k {
            a[row][j] = a[row][j].clone() / p.clone();
        }
        for r in 0..rows {
            if r != row && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for j in col..=k {
                    let sub = f.clone() * a[row][j].clone();
                    a[r][j] = a[r][j].clone() - sub;
                }
            }
        }
        row += 1;
    }
    if (row..rows).any(|r| !a[r][k].is_negligible()) {
        return None;
    }
    Some((0..k).map(|i| a[i][k].clone()).collect())
}

fn rank<S: OracleScalar>(vectors: &[Vec<S>]) -> usize {
    let Some(dim) = vectors.first().map(|v| v.len()) else { return 0 };
    let mut m: Vec<Vec<S>> = vectors.to_vec();
    let mut r = 0;
    for col in 0..dim {
        let Some(p) = (r..m.len())
            .filter(|&i| !m[i][col].is_negligible())
            .max_by(|&x, &y| m[x][col].abs().partial_cmp(&m[y][col].abs()).unwrap_or(std::cmp::Ordering::Equal))
        else {
            continue;
        };
        m.swap(r, p);
        let pv = m[r][col].clone();
        for i in 0..m.len() {
            if i != r && !m[i][col].is_zero() {
                let f = m[i][col].clone() / pv.clone();
                for j in col..dim {
                    let sub = f.clone() * m[r][j].clone();
                    m[i][j] = m[i][j].clone() - sub;
                }
            }
        }
        r += 1;
    }
    r
}

fn subsets(n: usize, k: usize, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, f: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if cur.len() == k {
            return f(cur);
        }
        for i in start..n {
            cur.push(i);
            if rec(i + 1, n, k, cur, f) {
                return true;
            }
            cur.pop();
        }
        false
    }
    rec(0, n, k, &mut Vec::with_capacity(k), f)
}

/// `target ∈ cone(gens)`, by Caratheodory enumeration of independent subsets.
pub fn in_cone<S: OracleScalar>(target: &[S], gens: &[Vec<S>]) -> bool {
    if target.iter().all(|t| t.is_negligible()) {
        return true;
    }
    let dim = target.len();
    for k in 1..=dim.min(gens.len()) {
        let found = subsets(gens.len(), k, &mut |idx| {
            let cols: Vec<&Vec<S>> = idx.iter().map(|&i| &gens[i]).collect();
            match solve_unique(&cols, target) {
                Some(coef) => coef.iter().all(|c| *c >= S::zero() || c.is_negligible()),
                None => false,
            }
        });
        if found {
            return true;
        }
    }
    false
}

/// `0 ∈ conv(points)`.
pub fn zero_in_hull<S: OracleScalar>(points: &[Vec<S>]) -> bool {
    let Some(dim) = points.first().map(|p| p.len()) else { return false };
    let lifted: Vec<Vec<S>> = points
        .iter()
        .map(|p| {
            let mut q = p.clone();
            q.push(S::one());
            q
        })
        .collect();
    let mut target = vec![S::zero(); dim];
    target.push(S::one());
    in_cone(&target, &lifted)
}

/// `0` in the relative interior of `conv(points)`.
pub fn zero_in_relative_interior<S: OracleScalar>(points: &[Vec<S>]) -> bool {
    !points.is_empty()
        && points.iter().all(|s| {
            let neg: Vec<S> = s.iter().map(|v| -v.clone()).collect();
            in_cone(&neg, points)
        })
}

/// Minimum-norm point of `conv(points)` (floating point, by enumerating
/// affinely independent supports).
pub fn min_norm_point(points: &[Vec<f64>]) -> Vec<f64> {
    let dim = points[0].len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for k in 1..=(dim + 1).min(points.len()) {
        subsets(points.len(), k, &mut |idx| {
            // minimize |sum l_i p_i|^2 subject to sum l_i = 1 (KKT system)
            let m = idx.len();
            let mut cols: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
            for &i in idx {
                let mut col: Vec<f64> = idx.iter().map(|&j| dot(&points[i], &points[j])).collect();
                col.push(1.0);
                cols.push(col);
            }
            let mut last = vec![1.0; m];
            last.push(0.0);
            cols.push(last);
            let mut rhs = vec![0.0; m];
            rhs.push(1.0);
            let refs: Vec<&Vec<f64>> = cols.iter().collect();
            if let Some(sol) = solve_unique(&refs, &rhs) {
                if sol[..m].iter().all(|&l| l >= -1e-12) {
                    let mut p = vec![0.0; dim];
                    for (l, &i) in sol[..m].iter().zip(idx) {
                        for d in 0..dim {
                            p[d] += l * points[i][d];
                        }
                    }
                    let nrm = dot(&p, &p);
                    if best.as_ref().map_or(true, |(b, _)| nrm < *b - 1e-15) {
                        best = Some((nrm, p));
                    }
                }
            }
            false
        });
    }
    best.map(|(_, p)| p).unwrap_or_else(|| vec![0.0; dim])
}

#[derive(Debug, Clone)]
pub struct TorusVerdict {
    pub class: StabilityClass,
    /// A unit diagonal destabilizing direction for unstable points.
    pub beta: Option<CMat>,
    pub weights: Vec<Vec<f64>>,
    pub exact: bool,
}

fn support(v: &CVec) -> Vec<usize> {
    let nv = v.norm();
    (0..v.len()).filter(|&i| v[i].norm() > ORACLE_SUPPORT_TOL * nv).collect()
}

/// Weights of the diagonal torus on the support of `x`, in diagonal-entry
/// coordinates scaled by `n` (so that they are integers for integer
/// configuration weights).
fn torus_weights(space: &ModelSpace, x: &ModelPoint) -> Vec<Vec<f64>> {
    let n = space.n;
    let special = space.group_kind().is_special();
    let unit = |i: usize| -> Vec<f64> {
        (0..n)
            .map(|k| {
                let e = if k == i { n as f64 } else { 0.0 };
                if special {
                    e - 1.0
                } else {
                    e
                }
            })
            .collect()
    };
    let mut combos: Vec<Vec<f64>> = vec![vec![0.0; n]];
    for (v, &w) in x.reps.iter().zip(&space.weights) {
        let mut next = Vec::new();
        for base in &combos {
            for i in support(v) {
                let u = unit(i);
                next.push(base.iter().zip(&u).map(|(b, e)| b + w * e).collect());
            }
        }
        next.sort_by(|a: &Vec<f64>, b: &Vec<f64>| a.partial_cmp(b).unwrap());
        next.dedup();
        combos = next;
    }
    combos
}

fn classify_weights<S: OracleScalar>(points: &[Vec<S>], dim_a: usize, linear: bool) -> StabilityClass {
    if zero_in_relative_interior(points) {
        if rank(points) == dim_a {
            StabilityClass::Stable
        } else {
            StabilityClass::Polystable
        }
    } else if linear || zero_in_hull(points) {
        StabilityClass::StrictlySemistable
    } else {
        StabilityClass::Unstable
    }
}

/// Stability of `x` for the diagonal torus `exp(a)` of the setup, decided
/// from the convex hull of its support weights.
pub fn torus_oracle(space: &ModelSpace, x: &ModelPoint) -> TorusVerdict {
    let linear = space.is_linear();
    if linear && x.reps[0].norm() == 0.0 {
        return TorusVerdict { class: StabilityClass::Polystable, beta: None, weights: Vec::new(), exact: true };
    }
    let weights = torus_weights(space, x);
    let dim_a = space.setup.dim_a();
    let integral = space.weights.iter().all(|w| w.fract() == 0.0 && w.abs() < 1e6);
    let class = if integral {
        let exact: Vec<Vec<Ratio<i128>>> = weights.iter().map(|w| w.iter().map(|&v| Ratio::from_f64(v)).collect()).collect();
        classify_weights(&exact, dim_a, linear)
    } else {
        classify_weights(&weights, dim_a, linear)
    };
    let beta = (class == StabilityClass::Unstable).then(|| {
        let p = min_norm_point(&weights);
        let np = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        real_diag(&p.iter().map(|v| -v / np).collect::<Vec<_>>())
    });
    TorusVerdict { class, beta, weights, exact: integral }
}

/// Multiplicity rule for weighted points on the Riemann sphere under
/// `SL(2, C)`: semistable iff no point carries more than half the total
/// weight, stable iff every point carries strictly less, polystable iff
/// exactly two points carry half each.
pub fn multiplicity_oracle(points: &[CVec], weights: &[f64]) -> StabilityClass {
    let mut clusters: Vec<(CVec, f64)> = Vec::new();
    for (v, &w) in points.iter().zip(weights) {
        let u = v / c(v.norm());
        match clusters.iter_mut().find(|(r, _)| (1.0 - r.dotc(&u).norm()).abs() < 1e-9) {
            Some((_, m)) => *m += w,
            None => clusters.push((u, w)),
        }
    }
    let total: f64 = weights.iter().sum();
    let half = total / 2.0;
    let max = clusters.iter().map(|(_, m)| *m).fold(0.0, f64::max);
    let eps = 1e-9 * total;
    if max > half + eps {
        StabilityClass::Unstable
    } else if max < half - eps {
        StabilityClass::Stable
    } else if clusters.len() == 2 {
        StabilityClass::Polystable
    } else {
        StabilityClass::StrictlySemistable
    }
}
