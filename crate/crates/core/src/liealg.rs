//! Compatible matrix groups `G = K exp(p)` and their Cartan data.
//!
//! The catalog is closed: six kinds of subgroups of `GL(n, C)` whose maximal
//! compact subgroup, Cartan complement `p`, maximal abelian `a` and parabolic
//! subgroups all have closed forms. The ambient inner product is
//! `<X, Y> = Re tr(X Y*)`; the invariant bilinear form is `B(X, Y) = Re tr(X Y)`.

use std::fmt;
use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    antihermitian_part, c, commutator, fro_norm, hermitian_defect, hermitian_part, identity, inner, inverse,
    is_real, real_null_space, zeros, CMat, HermEigen, C64,
};

/// Tolerance on `|det - 1|` for the special kinds.
pub const DET_TOL: f64 = 1e-10;
/// Growth cap used to decide parabolic membership.
pub const PARABOLIC_GROWTH_CAP: f64 = 1e8;
/// Conjugation time at which parabolic membership is sampled.
pub const PARABOLIC_SAMPLE_T: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GroupKind {
    #[serde(rename = "GL_C")]
    GlC,
    #[serde(rename = "SL_C")]
    SlC,
    #[serde(rename = "GL_R")]
    GlR,
    #[serde(rename = "SL_R")]
    SlR,
    /// Real diagonal matrices of determinant one.
    #[serde(rename = "DIAG_TORUS_R")]
    DiagTorusR,
    /// Complex diagonal matrices of determinant one.
    #[serde(rename = "DIAG_TORUS_C")]
    DiagTorusC,
}

impl GroupKind {
    pub fn is_real(self) -> bool {
        matches!(self, GroupKind::GlR | GroupKind::SlR | GroupKind::DiagTorusR)
    }

    pub fn is_special(self) -> bool {
        !matches!(self, GroupKind::GlC | GroupKind::GlR)
    }

    pub fn is_torus(self) -> bool {
        matches!(self, GroupKind::DiagTorusR | GroupKind::DiagTorusC)
    }

    pub fn name(self) -> &'static str {
        match self {
            GroupKind::GlC => "GL_C",
            GroupKind::SlC => "SL_C",
            GroupKind::GlR => "GL_R",
            GroupKind::SlR => "SL_R",
            GroupKind::DiagTorusR => "DIAG_TORUS_R",
            GroupKind::DiagTorusC => "DIAG_TORUS_C",
        }
    }
}

impl fmt::Display for GroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sign {
    Plus,
    Minus,
}

/// The ambient group, its Cartan decomposition and a maximal abelian `a`.
#[derive(Debug, Clone)]
pub struct ReductiveSetup {
    pub n: usize,
    pub kind: GroupKind,
    pub k_basis: Vec<CMat>,
    pub p_basis: Vec<CMat>,
    pub a_basis: Vec<CMat>,
}

fn unit(n: usize, i: usize, j: usize) -> CMat {
    let mut m = zeros(n);
    m[(i, j)] = c(1.0);
    m
}

/// Orthonormal basis of the traceless real diagonal matrices.
fn traceless_diagonal(n: usize) -> Vec<CMat> {
    (1..n)
        .map(|k| {
            let norm = ((k * (k + 1)) as f64).sqrt();
            let mut m = zeros(n);
            for i in 0..k {
                m[(i, i)] = c(1.0 / norm);
            }
            m[(k, k)] = c(-(k as f64) / norm);
            m
        })
        .collect()
}

fn full_diagonal(n: usize) -> Vec<CMat> {
    (0..n).map(|i| unit(n, i, i)).collect()
}

fn symmetric_offdiag(n: usize) -> Vec<CMat> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            out.push((unit(n, i, j) + unit(n, j, i)) * c(s));
        }
    }
    out
}

fn antisymmetric_offdiag(n: usize) -> Vec<CMat> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            out.push((unit(n, i, j) - unit(n, j, i)) * c(s));
        }
    }
    out
}

fn times_i(v: Vec<CMat>) -> Vec<CMat> {
    v.into_iter().map(|m| m * C64::new(0.0, 1.0)).collect()
}

impl ReductiveSetup {
    pub fn new(kind: GroupKind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("matrix size must be positive".into()));
        }
        if kind.is_special() && n < 2 {
            return Err(Error::InvalidInput(format!("{kind} needs n >= 2")));
        }
        let diag = if kind.is_special() { traceless_diagonal(n) } else { full_diagonal(n) };
        let (k_basis, p_basis) = match kind {
            GroupKind::GlC | GroupKind::SlC => {
                let mut p = diag.clone();
                p.extend(symmetric_offdiag(n));
                p.extend(times_i(antisymmetric_offdiag(n)));
                (times_i(p.clone()), p)
            }
            GroupKind::GlR | GroupKind::SlR => {
                let mut p = diag.clone();
                p.extend(symmetric_offdiag(n));
                (antisymmetric_offdiag(n), p)
            }
            GroupKind::DiagTorusR => (Vec::new(), diag.clone()),
            GroupKind::DiagTorusC => (times_i(diag.clone()), diag.clone()),
        };
        Ok(Self { n, kind, k_basis, p_basis, a_basis: diag })
    }

    pub fn dim_p(&self) -> usize {
        self.p_basis.len()
    }

    pub fn dim_k(&self) -> usize {
        self.k_basis.len()
    }

    pub fn dim_a(&self) -> usize {
        self.a_basis.len()
    }

    /// Orthogonal projection onto `p`, closed form per kind.
    pub fn project_p(&self, x: &CMat) -> CMat {
        let mut h = hermitian_part(x);
        if self.kind.is_real() {
            h.iter_mut().for_each(|a| a.im = 0.0);
        }
        if self.kind.is_torus() {
            for i in 0..self.n {
                for j in 0..self.n {
                    if i != j {
                        h[(i, j)] = c(0.0);
                    }
                }
                h[(i, i)].im = 0.0;
            }
        }
        if self.kind.is_special() {
            let tr = h.trace().re / self.n as f64;
            for i in 0..self.n {
                h[(i, i)] -= c(tr);
            }
        }
        h
    }

    /// Orthogonal projection onto `k`, closed form per kind.
    pub fn project_k(&self, x: &CMat) -> CMat {
        match self.kind {
            GroupKind::DiagTorusR => zeros(self.n),
            _ => {
                let mut a = antihermitian_part(x);
                if self.kind.is_real() {
                    a.iter_mut().for_each(|z| z.im = 0.0);
                }
                if self.kind.is_torus() {
                    for i in 0..self.n {
                        for j in 0..self.n {
                            if i != j {
                                a[(i, j)] = c(0.0);
                            }
                        }
                    }
                }
                if self.kind.is_special() {
                    let tr = a.trace().im / self.n as f64;
                    for i in 0..self.n {
                        a[(i, i)] -= C64::new(0.0, tr);
                    }
                }
                a
            }
        }
    }

    /// `sum <x, b> b` over the `p` basis.
    pub fn project_p_by_basis(&self, x: &CMat) -> CMat {
        self.p_basis.iter().fold(zeros(self.n), |acc, b| acc + b * c(inner(x, b)))
    }

    pub fn p_coordinates(&self, x: &CMat) -> Vec<f64> {
        self.p_basis.iter().map(|b| inner(x, b)).collect()
    }

    pub fn from_p_coordinates(&self, coords: &[f64]) -> CMat {
        self.p_basis.iter().zip(coords).fold(zeros(self.n), |acc, (b, &t)| acc + b * c(t))
    }

    /// Check that a matrix lies in `G` for this kind.
    pub fn check_member(&self, m: &CMat) -> Result<()> {
        let fail = |reason: &str| Err(Error::NonMember { kind: self.kind.to_string(), reason: reason.into() });
        if m.nrows() != self.n || m.ncols() != self.n {
            return fail("wrong shape");
        }
        if m.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return fail("non-finite entries");
        }
        let scale = fro_norm(m).max(1.0);
        if self.kind.is_real() && !is_real(m, 1e-12 * scale) {
            return fail("entries must be real");
        }
        if self.kind.is_torus() {
            for i in 0..self.n {
                for j in 0..self.n {
                    if i != j && m[(i, j)].norm() > 1e-12 * scale {
                        return fail("torus elements are diagonal");
                    }
                }
            }
        }
        let det = m.determinant();
        if self.kind.is_special() {
            if (det - c(1.0)).norm() > DET_TOL {
                return fail("determinant must be 1");
            }
        } else if det.norm() < 1e-14 {
            return fail("matrix is singular");
        }
        Ok(())
    }

    pub fn element(&self, m: CMat) -> Result<GroupElement> {
        self.check_member(&m)?;
        let mut m = m;
        if self.kind.is_real() {
            m.iter_mut().for_each(|a| a.im = 0.0);
        }
        Ok(GroupElement { matrix: m })
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { matrix: identity(self.n) }
    }

    /// Check that `k` lies in `K = G ∩ U`.
    pub fn check_in_k(&self, k: &CMat) -> Result<()> {
        self.check_member(k)?;
        let defect = fro_norm(&(k * k.adjoint() - identity(self.n)));
        if defect > 1e-9 {
            return Err(Error::NonMember { kind: format!("K of {}", self.kind), reason: format!("not unitary ({defect:.2e})") });
        }
        Ok(())
    }

    /// Validate and build a direction in `p`.
    pub fn direction(&self, m: &CMat) -> Result<Direction> {
        let d = Direction::new(m)?;
        let defect = fro_norm(&(self.project_p(&d.matrix) - &d.matrix));
        if defect > 1e-10 * fro_norm(&d.matrix).max(1.0) {
            return Err(Error::InvalidInput(format!("direction is not in p for {} (defect {defect:.2e})", self.kind)));
        }
        Ok(d)
    }

    /// `exp(xi)` for `xi` in `p`.
    pub fn exp_p(&self, xi: &CMat) -> Result<GroupElement> {
        let m = crate::linalg::exp_hermitian(xi)?;
        self.element(m)
    }

    /// `exp(x)` for `x` in `k`.
    pub fn exp_k(&self, x: &CMat) -> Result<GroupElement> {
        let m = crate::linalg::exp_antihermitian(x)?;
        self.element(m)
    }

    /// Polar factorization `g = k exp(xi)` with `k` in `K` and `xi` in `p`.
    pub fn cartan_decompose(&self, g: &GroupElement) -> Result<(GroupElement, CMat)> {
        self.check_member(&g.matrix)?;
        let gram = g.matrix.adjoint() * &g.matrix;
        let eig = HermEigen::new(&gram)?;
        if eig.values.iter().any(|&v| v <= 0.0) {
            return Err(Error::NumericFailure("polar factorization: Gram matrix not positive".into()));
        }
        let xi = self.project_p(&eig.map(|v| c(0.5 * v.ln())));
        let k = &g.matrix * eig.map(|v| c(v.powf(-0.5)));
        let residual = fro_norm(&(&k * crate::linalg::exp_hermitian(&xi)? - &g.matrix));
        if !(residual <= 1e-10 * fro_norm(&g.matrix).max(1.0)) {
            return Err(Error::NumericFailure(format!("polar factorization residual {residual:.2e}")));
        }
        let mut k = k;
        if self.kind.is_real() {
            k.iter_mut().for_each(|a| a.im = 0.0);
        }
        self.check_in_k(&k)?;
        Ok((GroupElement { matrix: k }, xi))
    }

    /// Orthonormal bases of `p^beta` and `k^beta`.
    pub fn centralizer_basis(&self, beta: &Direction) -> (Vec<CMat>, Vec<CMat>) {
        (
            commutant_in(&self.p_basis, &beta.matrix),
            commutant_in(&self.k_basis, &beta.matrix),
        )
    }

    /// `g = k h` with `k` in `K` and `h` in `G^{beta-}` (block lower triangular
    /// with respect to the descending eigenflag of `beta`).
    pub fn parabolic_split(&self, g: &GroupElement, beta: &Direction) -> Result<(GroupElement, GroupElement)> {
        self.check_member(&g.matrix)?;
        let n = self.n;
        let u = &beta.eig.vectors;
        let gt = u.adjoint() * &g.matrix * u;
        let rev = reversal(n);
        let m = &gt * &rev;
        let qr = m.qr();
        let mut q = qr.q();
        let mut r = qr.r();
        for i in 0..n {
            let d = r[(i, i)];
            if d.norm() < 1e-300 {
                return Err(Error::NumericFailure("parabolic split: rank deficient".into()));
            }
            let phase = d / c(d.norm());
            for j in 0..n {
                q[(j, i)] *= phase;
                r[(i, j)] *= phase.conj();
            }
        }
        let kt = &q * &rev;
        let ht = &rev * &r * &rev;
        let mut k = u * kt * u.adjoint();
        let mut h = u * ht * u.adjoint();
        if self.kind.is_real() {
            k.iter_mut().for_each(|a| a.im = 0.0);
            h.iter_mut().for_each(|a| a.im = 0.0);
        }
        let residual = fro_norm(&(&k * &h - &g.matrix));
        if residual > 1e-10 * fro_norm(&g.matrix).max(1.0) {
            return Err(Error::NumericFailure(format!("parabolic split residual {residual:.2e}")));
        }
        self.check_in_k(&k)?;
        Ok((GroupElement { matrix: k }, GroupElement { matrix: h }))
    }

    /// Levi projection `pi^{beta±}`: the block-diagonal part of `g`, equal to
    /// `lim exp(t beta) g exp(-t beta)` as `t -> ∓∞`.
    pub fn pi_beta(&self, g: &GroupElement, beta: &Direction, sign: Sign) -> Result<GroupElement> {
        let t = match sign {
            Sign::Plus => -PARABOLIC_SAMPLE_T,
            Sign::Minus => PARABOLIC_SAMPLE_T,
        };
        let u = &beta.eig.vectors;
        let a = &beta.eig.values;
        let gt = u.adjoint() * &g.matrix * u;
        let blocks = beta.eig.clusters();
        let block_of = block_index(&blocks, self.n);
        let mut growth = 0.0f64;
        let mut levi = zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                let e = gt[(i, j)].norm() * (t * (a[i] - a[j])).exp();
                growth = growth.max(e);
                if block_of[i] == block_of[j] {
                    levi[(i, j)] = gt[(i, j)];
                }
            }
        }
        if !(growth <= PARABOLIC_GROWTH_CAP) {
            return Err(Error::NotInParabolic { growth });
        }
        let mut m = u * levi * u.adjoint();
        if self.kind.is_real() {
            m.iter_mut().for_each(|z| z.im = 0.0);
        }
        Ok(GroupElement { matrix: m })
    }

    pub fn parabolic_data(&self, beta: &Direction) -> ParabolicData {
        ParabolicData::new(beta.clone())
    }
}

/// `B(X, Y) = Re tr(X Y)`: negative definite on `u`, positive definite on `iu`.
pub fn bform(x: &CMat, y: &CMat) -> f64 {
    let n = x.nrows();
    let mut acc = 0.0;
    for i in 0..n {
        for k in 0..n {
            acc += (x[(i, k)] * y[(k, i)]).re;
        }
    }
    acc
}

/// `Ad(g) X = g X g^{-1}`.
pub fn adjoint_action(g: &CMat, x: &CMat) -> Result<CMat> {
    Ok(g * x * inverse(g)?)
}

/// `exp(t beta) g exp(-t beta)`.
pub fn conjugation_trajectory(g: &CMat, beta: &Direction, t: f64) -> CMat {
    let e = beta.eig.map(|a| c((t * a).exp()));
    let ei = beta.eig.map(|a| c((-t * a).exp()));
    e * g * ei
}

fn reversal(n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| if i + j == n - 1 { c(1.0) } else { c(0.0) })
}

fn block_index(blocks: &[Range<usize>], n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for (b, r) in blocks.iter().enumerate() {
        for i in r.clone() {
            out[i] = b;
        }
    }
    out
}

/// Orthonormal basis of `{x in span(basis) : [x, m] = 0}`.
fn commutant_in(basis: &[CMat], m: &CMat) -> Vec<CMat> {
    if basis.is_empty() {
        return Vec::new();
    }
    let n = m.nrows();
    let rows = 2 * n * n;
    let mut a = DMatrix::<f64>::zeros(rows, basis.len());
    for (col, b) in basis.iter().enumerate() {
        let comm = commutator(m, b);
        for (idx, z) in comm.iter().enumerate() {
            a[(2 * idx, col)] = z.re;
            a[(2 * idx + 1, col)] = z.im;
        }
    }
    real_null_space(&a, 1e-10)
        .into_iter()
        .map(|v: DVector<f64>| basis.iter().zip(v.iter()).fold(zeros(n), |acc, (b, &t)| acc + b * c(t)))
        .collect()
}

/// An element of `G`.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub matrix: CMat,
}

impl GroupElement {
    pub fn inverse(&self) -> Result<GroupElement> {
        Ok(GroupElement { matrix: inverse(&self.matrix)? })
    }

    pub fn compose(&self, other: &GroupElement) -> GroupElement {
        GroupElement { matrix: &self.matrix * &other.matrix }
    }

    pub fn adjoint_action(&self, x: &CMat) -> Result<CMat> {
        adjoint_action(&self.matrix, x)
    }
}

/// A Hermitian direction in `p` with cached, deterministic eigendata.
#[derive(Debug, Clone)]
pub struct Direction {
    pub matrix: CMat,
    pub eig: HermEigen,
}

impl Direction {
    pub fn new(m: &CMat) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::InvalidInput("direction must be square".into()));
        }
        let defect = hermitian_defect(m);
        if defect > 1e-12 * fro_norm(m).max(1.0) {
            return Err(Error::InvalidInput(format!("direction is not Hermitian (defect {defect:.2e})")));
        }
        let matrix = hermitian_part(m);
        let eig = HermEigen::new(&matrix)?;
        Ok(Self { matrix, eig })
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eig.values
    }

    pub fn eigenvectors(&self) -> &CMat {
        &self.eig.vectors
    }

    /// Frobenius norm, equal to `sqrt(B(beta, beta))` on `p`.
    pub fn norm(&self) -> f64 {
        fro_norm(&self.matrix)
    }

    pub fn is_zero(&self) -> bool {
        self.norm() == 0.0
    }

    pub fn scaled(&self, s: f64) -> Result<Direction> {
        Direction::new(&(&self.matrix * c(s)))
    }

    pub fn unit(&self) -> Result<Direction> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroDirection);
        }
        self.scaled(1.0 / n)
    }
}

/// Block structure of the parabolic subgroups attached to a direction.
///
/// Masks are expressed in the eigen-coordinates of the direction (columns of
/// `direction.eigenvectors()` in descending eigenvalue order).
#[derive(Debug, Clone)]
pub struct ParabolicData {
    pub direction: Direction,
    /// Distinct eigenvalues, descending, with multiplicities.
    pub block_order: Vec<(f64, usize)>,
    /// Dimensions of the nested flag `V_1 ⊂ V_1 ⊕ V_2 ⊂ ...`.
    pub flag: Vec<usize>,
    pub levi_mask: Vec<Vec<bool>>,
    /// Strictly block upper triangular: the Lie algebra of `R^{beta+}`.
    pub unipotent_plus_mask: Vec<Vec<bool>>,
    /// Strictly block lower triangular: the Lie algebra of `R^{beta-}`.
    pub unipotent_minus_mask: Vec<Vec<bool>>,
}

impl ParabolicData {
    pub fn new(direction: Direction) -> Self {
        let blocks = direction.eig.clusters();
        let n = direction.eig.dim();
        let block_of = block_index(&blocks, n);
        let block_order = blocks.iter().map(|r| (direction.eig.values[r.start], r.len())).collect();
        let flag = blocks.iter().map(|r| r.end).collect();
        let mask = |f: &dyn Fn(usize, usize) -> bool| -> Vec<Vec<bool>> {
            (0..n).map(|i| (0..n).map(|j| f(block_of[i], block_of[j])).collect()).collect()
        };
        Self {
            levi_mask: mask(&|a, b| a == b),
            unipotent_plus_mask: mask(&|a, b| a < b),
            unipotent_minus_mask: mask(&|a, b| a > b),
            block_order,
            flag,
            direction,
        }
    }

    /// Block-diagonal part of `g` in eigen-coordinates, mapped back.
    pub fn levi_part(&self, g: &CMat) -> CMat {
        let u = self.direction.eigenvectors();
        let mut gt = u.adjoint() * g * u;
        for (i, row) in self.levi_mask.iter().enumerate() {
            for (j, &keep) in row.iter().enumerate() {
                if !keep {
                    gt[(i, j)] = c(0.0);
                }
            }
        }
        u * gt * u.adjoint()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_real_rows, real_diag};

    fn sl2r() -> ReductiveSetup {
        ReductiveSetup::new(GroupKind::SlR, 2).unwrap()
    }

    #[test]
    fn bases_are_orthonormal_and_typed() {
        for kind in [GroupKind::GlC, GroupKind::SlC, GroupKind::GlR, GroupKind::SlR, GroupKind::DiagTorusR, GroupKind::DiagTorusC] {
            let s = ReductiveSetup::new(kind, 3).unwrap();
            for basis in [&s.k_basis, &s.p_basis] {
                for (i, x) in basis.iter().enumerate() {
                    for (j, y) in basis.iter().enumerate() {
                        let expected = if i == j { 1.0 } else { 0.0 };
                        assert!((inner(x, y) - expected).abs() < 1e-14, "{kind}");
                    }
                }
            }
            for x in &s.k_basis {
                assert!(fro_norm(&(x + x.adjoint())) < 1e-14);
            }
            for x in &s.p_basis {
                assert!(hermitian_defect(x) < 1e-14);
                assert!(fro_norm(&(s.project_p(x) - x)) < 1e-14);
            }
        }
    }

    #[test]
    fn dimensions() {
        let dims = |k, n| {
            let s = ReductiveSetup::new(k, n).unwrap();
            (s.dim_k(), s.dim_p(), s.dim_a())
        };
        assert_eq!(dims(GroupKind::SlR, 2), (1, 2, 1));
        assert_eq!(dims(GroupKind::SlC, 2), (3, 3, 1));
        assert_eq!(dims(GroupKind::GlR, 3), (3, 6, 3));
        assert_eq!(dims(GroupKind::DiagTorusR, 4), (0, 3, 3));
    }

    #[test]
    fn bform_examples() {
        let i2 = identity(2) * C64::new(0.0, 1.0);
        assert!((bform(&i2, &i2) + 2.0).abs() < 1e-15);
        let h = real_diag(&[1.0, -1.0]);
        assert!((bform(&h, &h) - 2.0).abs() < 1e-15);
        let s = ReductiveSetup::new(GroupKind::GlC, 2).unwrap();
        for x in &s.k_basis {
            for y in &s.p_basis {
                assert!(bform(x, y).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn project_p_examples() {
        let s = sl2r();
        let h = real_diag(&[1.0, -1.0]);
        assert!(fro_norm(&(s.project_p(&h) - &h)) < 1e-15);
        let skew = from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        assert!(fro_norm(&s.project_p(&skew)) < 1e-15);
        let id = identity(2);
        assert!(fro_norm(&s.project_p(&id)) < 1e-15);
        assert!(fro_norm(&s.project_p_by_basis(&id)) < 1e-15);
    }

    #[test]
    fn cartan_examples() {
        let s = sl2r();
        let g = s.element(real_diag(&[2.0, 0.5])).unwrap();
        let (k, xi) = s.cartan_decompose(&g).unwrap();
        assert!(fro_norm(&(k.matrix - identity(2))) < 1e-12);
        assert!(fro_norm(&(xi - real_diag(&[2f64.ln(), -(2f64.ln())]))) < 1e-12);

        let r = std::f64::consts::FRAC_1_SQRT_2;
        let rot = from_real_rows(&[&[r, -r], &[r, r]]);
        let (k, xi) = s.cartan_decompose(&s.element(rot.clone()).unwrap()).unwrap();
        assert!(fro_norm(&(k.matrix - rot)) < 1e-12);
        assert!(fro_norm(&xi) < 1e-12);
    }

    #[test]
    fn cartan_shear_matches_svd_oracle() {
        let s = sl2r();
        let shear = from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let (k, xi) = s.cartan_decompose(&s.element(shear.clone()).unwrap()).unwrap();
        let recon = &k.matrix * crate::linalg::exp_hermitian(&xi).unwrap();
        assert!(fro_norm(&(recon - &shear)) < 1e-10);
        // singular values of the shear are the golden ratio and its inverse
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let eig = HermEigen::new(&xi).unwrap();
        assert!((eig.values[0] - phi.ln()).abs() < 1e-12);
        assert!((eig.values[1] + phi.ln()).abs() < 1e-12);
    }

    #[test]
    fn non_member_rejected() {
        let s = sl2r();
        assert!(matches!(s.element(real_diag(&[2.0, 1.0])), Err(Error::NonMember { .. })));
        let mut m = identity(2);
        m[(0, 1)] = C64::new(0.0, 1.0);
        assert!(matches!(s.element(m), Err(Error::NonMember { .. })));
    }

    #[test]
    fn centralizer_examples() {
        let s = sl2r();
        let beta = s.direction(&real_diag(&[1.0, -1.0])).unwrap();
        let (p, k) = s.centralizer_basis(&beta);
        assert_eq!((p.len(), k.len()), (1, 0));
        assert!(fro_norm(&commutator(&p[0], &beta.matrix)) < 1e-10);

        let zero = s.direction(&zeros(2)).unwrap();
        let (p, k) = s.centralizer_basis(&zero);
        assert_eq!((p.len(), k.len()), (2, 1));

        let s3 = ReductiveSetup::new(GroupKind::SlR, 3).unwrap();
        let beta = s3.direction(&real_diag(&[1.0, 1.0, -2.0])).unwrap();
        let (p, k) = s3.centralizer_basis(&beta);
        // block diag(S, c): symmetric 2x2 block plus a scalar, traceless
        assert_eq!(p.len(), 3);
        assert_eq!(k.len(), 1);
    }

    #[test]
    fn parabolic_split_examples() {
        let s = sl2r();
        let beta = s.direction(&real_diag(&[1.0, -1.0])).unwrap();
        let lower = s.element(from_real_rows(&[&[1.0, 0.0], &[3.0, 1.0]])).unwrap();
        let (k, h) = s.parabolic_split(&lower, &beta).unwrap();
        assert!(fro_norm(&(k.matrix - identity(2))) < 1e-12);
        assert!(fro_norm(&(h.matrix - &lower.matrix)) < 1e-12);

        let r = std::f64::consts::FRAC_1_SQRT_2;
        let rot = s.element(from_real_rows(&[&[r, -r], &[r, r]])).unwrap();
        let (k, h) = s.parabolic_split(&rot, &beta).unwrap();
        assert!(fro_norm(&(k.matrix - &rot.matrix)) < 1e-12);
        assert!(fro_norm(&(h.matrix - identity(2))) < 1e-12);

        let shear = s.element(from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]])).unwrap();
        let (k, h) = s.parabolic_split(&shear, &beta).unwrap();
        assert!(fro_norm(&(&k.matrix * &h.matrix - &shear.matrix)) < 1e-10);
        assert!(h.matrix[(0, 1)].norm() < 1e-12);
        // flag-ordered Gram-Schmidt oracle: the second column of k is the
        // normalized second column of g
        let col = shear.matrix.column(1).into_owned();
        let q2 = &col / c(col.norm());
        assert!((k.matrix.column(1) - q2).norm() < 1e-12);
    }

    #[test]
    fn pi_beta_examples() {
        let s = sl2r();
        let beta = s.direction(&real_diag(&[1.0, -1.0])).unwrap();
        let upper = s.element(from_real_rows(&[&[1.0, 1.0], &[0.0, 1.0]])).unwrap();
        let p = s.pi_beta(&upper, &beta, Sign::Plus).unwrap();
        assert!(fro_norm(&(p.matrix - identity(2))) < 1e-12);
        let traj = conjugation_trajectory(&upper.matrix, &beta, -20.0);
        assert!(fro_norm(&(traj - identity(2))) < 1e-15);

        let block = s.element(real_diag(&[3.0, 1.0 / 3.0])).unwrap();
        let p = s.pi_beta(&block, &beta, Sign::Plus).unwrap();
        assert!(fro_norm(&(p.matrix - &block.matrix)) < 1e-14);

        let lower = s.element(from_real_rows(&[&[1.0, 0.0], &[1.0, 1.0]])).unwrap();
        assert!(matches!(s.pi_beta(&lower, &beta, Sign::Plus), Err(Error::NotInParabolic { .. })));
        assert!(s.pi_beta(&lower, &beta, Sign::Minus).is_ok());
    }

    #[test]
    fn theta_swaps_unipotent_masks() {
        let beta = Direction::new(&real_diag(&[2.0, 0.0, 0.0, -1.0])).unwrap();
        let data = ParabolicData::new(beta);
        assert_eq!(data.block_order, vec![(2.0, 1), (0.0, 2), (-1.0, 1)]);
        assert_eq!(data.flag, vec![1, 3, 4]);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(data.unipotent_plus_mask[i][j], data.unipotent_minus_mask[j][i]);
                let count = [data.levi_mask[i][j], data.unipotent_plus_mask[i][j], data.unipotent_minus_mask[i][j]]
                    .iter()
                    .filter(|&&b| b)
                    .count();
                assert_eq!(count, 1);
            }
        }
    }
}
