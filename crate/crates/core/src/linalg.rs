//! Dense complex matrix helpers shared by every module.
//!
//! All matrices are stored as `DMatrix<Complex64>`; real groups simply keep
//! zero imaginary parts. The ambient inner product is `Re tr(X Y*)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Relative gap below which two eigenvalues are treated as one cluster.
pub const EIGEN_CLUSTER_TOL: f64 = 1e-9;

pub fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn zeros(n: usize) -> CMat {
    CMat::zeros(n, n)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn real_diag(d: &[f64]) -> CMat {
    let n = d.len();
    let mut m = zeros(n);
    for (i, &v) in d.iter().enumerate() {
        m[(i, i)] = c(v);
    }
    m
}

pub fn from_real_rows(rows: &[&[f64]]) -> CMat {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    CMat::from_fn(n, m, |i, j| c(rows[i][j]))
}

pub fn cvec_real(v: &[f64]) -> CVec {
    CVec::from_iterator(v.len(), v.iter().map(|&x| c(x)))
}

/// `Re tr(X Y*)`.
pub fn inner(x: &CMat, y: &CMat) -> f64 {
    x.iter().zip(y.iter()).map(|(a, b)| (a * b.conj()).re).sum()
}

pub fn fro_norm(x: &CMat) -> f64 {
    x.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub fn commutator(x: &CMat, y: &CMat) -> CMat {
    x * y - y * x
}

pub fn hermitian_part(x: &CMat) -> CMat {
    (x + x.adjoint()) * c(0.5)
}

pub fn antihermitian_part(x: &CMat) -> CMat {
    (x - x.adjoint()) * c(0.5)
}

pub fn is_real(x: &CMat, tol: f64) -> bool {
    x.iter().all(|a| a.im.abs() <= tol)
}

pub fn hermitian_defect(x: &CMat) -> f64 {
    fro_norm(&(x - x.adjoint()))
}

/// `Re <v, w>` with the convention `<v, w> = w* v`.
pub fn vdot(v: &CVec, w: &CVec) -> C64 {
    w.dotc(v)
}

pub fn vnorm(v: &CVec) -> f64 {
    v.norm()
}

pub fn normalized(v: &CVec) -> Option<CVec> {
    let n = v.norm();
    if n == 0.0 || !n.is_finite() {
        None
    } else {
        Some(v / c(n))
    }
}

/// Hermitian eigendecomposition with descending eigenvalues and a
/// deterministic eigenbasis.
///
/// Within each eigenvalue cluster the basis is rebuilt from the columns of
/// the cluster projector by pivoted Gram-Schmidt (largest residual first,
/// lowest index on ties), so the pivot entry of every eigenvector is real and
/// positive. Diagonal input therefore yields coordinate vectors.
#[derive(Debug, Clone)]
pub struct HermEigen {
    pub values: Vec<f64>,
    pub vectors: CMat,
}

impl HermEigen {
    pub fn new(h: &CMat) -> Result<Self> {
        let n = h.nrows();
        if n != h.ncols() {
            return Err(Error::InvalidInput("matrix is not square".into()));
        }
        if h.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NumericFailure("non-finite matrix entry".into()));
        }
        let sym = hermitian_part(h);
        let eig = sym.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let raw: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let scale = raw.iter().fold(1.0f64, |m, v| m.max(v.abs()));

        let mut values = Vec::with_capacity(n);
        let mut vectors = zeros(n);
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && (raw[end - 1] - raw[end]).abs() <= EIGEN_CLUSTER_TOL * scale {
                end += 1;
            }
            let mean = raw[start..end].iter().sum::<f64>() / (end - start) as f64;
            let mut proj = zeros(n);
            for &col in &order[start..end] {
                let v = eig.eigenvectors.column(col).into_owned();
                proj += &v * v.adjoint();
            }
            let basis = pivoted_basis(&proj, end - start);
            if basis.len() != end - start {
                return Err(Error::NumericFailure("eigenspace basis degenerated".into()));
            }
            for (k, v) in basis.into_iter().enumerate() {
                vectors.set_column(start + k, &v);
                values.push(mean);
            }
            start = end;
        }
        Ok(Self { values, vectors })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Rebuild `U f(D) U*`.
    pub fn map(&self, f: impl Fn(f64) -> C64) -> CMat {
        let n = self.dim();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMat {
        self.map(c)
    }

    /// Coefficients of `v` in the eigenbasis.
    pub fn coefficients(&self, v: &CVec) -> CVec {
        self.vectors.adjoint() * v
    }

    /// Index ranges of eigenvalue clusters, in descending order.
    pub fn clusters(&self) -> Vec<std::ops::Range<usize>> {
        let scale = self.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let mut out = Vec::new();
        let mut start = 0;
        let n = self.dim();
        while start < n {
            let mut end = start + 1;
            while end < n && (self.values[end - 1] - self.values[end]).abs() <= EIGEN_CLUSTER_TOL * scale {
                end += 1;
            }
            out.push(start..end);
            start = end;
        }
        out
    }
}

/// Orthonormal basis of the range of a projector, pivoting on the largest
/// residual column.
fn pivoted_basis(proj: &CMat, rank: usize) -> Vec<CVec> {
    let n = proj.nrows();
    let mut basis: Vec<CVec> = Vec::with_capacity(rank);
    let mut used = vec![false; n];
    for _ in 0..rank {
        let mut best: Option<(usize, CVec, f64)> = None;
        for j in 0..n {
            if used[j] {
                continue;
            }
            let mut r = proj.column(j).into_owned();
            for b in &basis {
                let coef = b.dotc(&r);
                r -= b * coef;
            }
            let nr = r.norm();
            if best.as_ref().map_or(true, |(_, _, bn)| nr > *bn * (1.0 + 1e-12)) {
                best = Some((j, r, nr));
            }
        }
        let Some((j, r, nr)) = best else { break };
        if nr < 1e-12 {
            break;
        }
        used[j] = true;
        let mut v = r / c(nr);
        let pivot = v[j];
        if pivot.norm() > 0.0 {
            let phase = pivot.conj() / c(pivot.norm());
            v *= phase;
        }
        basis.push(v);
    }
    basis
}

/// Matrix exponential of a Hermitian matrix.
pub fn exp_hermitian(h: &CMat) -> Result<CMat> {
    Ok(HermEigen::new(h)?.map(|a| c(a.exp())))
}

/// Matrix exponential of an anti-Hermitian matrix (a unitary).
pub fn exp_antihermitian(x: &CMat) -> Result<CMat> {
    let h = x * C64::new(0.0, -1.0);
    Ok(HermEigen::new(&h)?.map(|a| C64::new(0.0, a).exp()))
}

/// Exponential of `X = A + H` with `A` anti-Hermitian and `H` Hermitian parts,
/// using the general Padé exponential.
pub fn exp_general(x: &CMat) -> CMat {
    x.clone().exp()
}

pub fn conj_by(g: &CMat, x: &CMat, g_inv: &CMat) -> CMat {
    g * x * g_inv
}

pub fn inverse(g: &CMat) -> Result<CMat> {
    g.clone()
        .try_inverse()
        .ok_or_else(|| Error::NumericFailure("matrix is singular".into()))
}

/// Orthonormalize columns left to right (modified Gram-Schmidt, two passes).
pub fn orthonormalize_columns(m: &CMat) -> Result<CMat> {
    let (rows, cols) = m.shape();
    let mut out = CMat::zeros(rows, cols);
    for j in 0..cols {
        let mut v = m.column(j).into_owned();
        for _ in 0..2 {
            for k in 0..j {
                let q = out.column(k).into_owned();
                let coef = q.dotc(&v);
                v -= q * coef;
            }
        }
        let nv = v.norm();
        if nv < 1e-300 || !nv.is_finite() {
            return Err(Error::NumericFailure("Gram-Schmidt degenerated".into()));
        }
        out.set_column(j, &(v / c(nv)));
    }
    Ok(out)
}

/// Null space of a real matrix (columns are the returned vectors), singular
/// values below `tol * max(1, s_max)` are treated as zero.
pub fn real_null_space(m: &DMatrix<f64>, tol: f64) -> Vec<DVector<f64>> {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Vec::new();
    }
    // pad so that the SVD returns a full right basis
    let padded = if rows < cols {
        let mut p = DMatrix::<f64>::zeros(cols, cols);
        p.view_mut((0, 0), (rows, cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let thresh = tol * smax.max(1.0);
    let mut out = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= thresh {
            out.push(vt.row(i).transpose());
        }
    }
    out
}

pub fn real_singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.ncols() == 0 || m.nrows() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_input_gives_coordinate_eigenvectors() {
        let h = real_diag(&[1.0, 3.0, 1.0]);
        let e = HermEigen::new(&h).unwrap();
        assert_eq!(e.values, vec![3.0, 1.0, 1.0]);
        assert!((e.vectors[(1, 0)].re - 1.0).abs() < 1e-14);
        assert!((e.vectors[(0, 1)].re - 1.0).abs() < 1e-14);
        assert!((e.vectors[(2, 2)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn reconstruction_and_exponentials() {
        let h = from_real_rows(&[&[2.0, 1.0], &[1.0, -1.0]]);
        let e = HermEigen::new(&h).unwrap();
        assert!(fro_norm(&(e.reconstruct() - &h)) < 1e-12);
        let x = h.clone() * C64::new(0.0, 1.0);
        let u = exp_antihermitian(&x).unwrap();
        assert!(fro_norm(&(&u * u.adjoint() - identity(2))) < 1e-12);
        assert!(fro_norm(&(exp_hermitian(&h).unwrap() - exp_general(&h))) < 1e-10);
    }

    #[test]
    fn null_space_of_rank_one() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let ns = real_null_space(&m, 1e-10);
        assert_eq!(ns.len(), 2);
    }
}
