//! Small dense complex matrices.
//!
//! Everything in this crate lives in dimension 2 or 4, so a flat row-major
//! `Vec` is all the storage we need. The exponential is exact in closed form
//! for 2x2 generators and goes through a Hermitian eigendecomposition
//! otherwise.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use thiserror::Error;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance used when an operation requires a Hermitian argument.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("expected {expected} entries, found {found}")]
    InvalidLength { expected: usize, found: usize },
    #[error("matrix is not Hermitian (max |H - H^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix is not unitary (||U^dagger U - I||_F = {deviation:e})")]
    NotUnitary { deviation: f64 },
}

/// Dense square complex matrix, row-major.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix({}x{}) [", self.dim, self.dim)?;
        for r in 0..self.dim {
            write!(f, "  ")?;
            for c in 0..self.dim {
                let z = self[(r, c)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        CMatrix {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for k in 0..dim {
            m[(k, k)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries; `data.len()` must be a
    /// nonzero perfect square.
    pub fn from_vec(data: Vec<Complex64>) -> Result<Self, LinalgError> {
        let dim = isqrt(data.len());
        if dim == 0 || dim * dim != data.len() {
            return Err(LinalgError::InvalidLength {
                expected: dim.max(1) * dim.max(1),
                found: data.len(),
            });
        }
        Ok(CMatrix { dim, data })
    }

    pub fn from_rows<const N: usize>(rows: [[Complex64; N]; N]) -> Self {
        let mut m = Self::zeros(N);
        for (r, row) in rows.iter().enumerate() {
            for (c, z) in row.iter().enumerate() {
                m[(r, c)] = *z;
            }
        }
        m
    }

    /// Real-valued convenience constructor.
    pub fn from_real<const N: usize>(rows: [[f64; N]; N]) -> Self {
        let mut m = Self::zeros(N);
        for (r, row) in rows.iter().enumerate() {
            for (c, x) in row.iter().enumerate() {
                m[(r, c)] = Complex64::new(*x, 0.0);
            }
        }
        m
    }

    pub fn diag(entries: &[Complex64]) -> Self {
        let mut m = Self::zeros(entries.len());
        for (k, z) in entries.iter().enumerate() {
            m[(k, k)] = *z;
        }
        m
    }

    /// `|ket><bra|`.
    pub fn outer(ket: &[Complex64], bra: &[Complex64]) -> Self {
        assert_eq!(ket.len(), bra.len(), "outer product of unequal lengths");
        let mut m = Self::zeros(ket.len());
        for (r, a) in ket.iter().enumerate() {
            for (c, b) in bra.iter().enumerate() {
                m[(r, c)] = a * b.conj();
            }
        }
        m
    }

    pub fn sigma_x() -> Self {
        Self::from_real([[0.0, 1.0], [1.0, 0.0]])
    }

    pub fn sigma_y() -> Self {
        Self::from_rows([[ZERO, -I], [I, ZERO]])
    }

    pub fn sigma_z() -> Self {
        Self::from_real([[1.0, 0.0], [0.0, -1.0]])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Exact matrix product; errors when the dimensions differ.
    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix, LinalgError> {
        self.check_dim(other)?;
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.data[r * n + k];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    out.data[r * n + c] += a * other.data[k * n + c];
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product with `self` as the slow index.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let (n, m) = (self.dim, other.dim);
        let mut out = CMatrix::zeros(n * m);
        for r1 in 0..n {
            for c1 in 0..n {
                let a = self[(r1, c1)];
                for r2 in 0..m {
                    for c2 in 0..m {
                        out[(r1 * m + r2, c1 * m + c2)] = a * other[(r2, c2)];
                    }
                }
            }
        }
        out
    }

    pub fn adjoint(&self) -> CMatrix {
        let n = self.dim;
        let mut out = CMatrix::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.data[c * n + r] = self.data[r * n + c].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: Complex64) -> CMatrix {
        CMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|k| self[(k, k)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum::<f64>())
    }

    /// Maximum absolute row sum. Bounds the spectral norm of a Hermitian
    /// matrix from above.
    pub fn inf_norm(&self) -> f64 {
        let n = self.dim;
        (0..n)
            .map(|r| self.data[r * n..(r + 1) * n].iter().map(|z| z.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `||self - other||_F`.
    pub fn distance(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "distance dimension mismatch");
        libm::sqrt(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>(),
        )
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `||U^dagger U - I||_F`.
    pub fn unitarity_defect(&self) -> f64 {
        (&self.adjoint() * self).distance(&CMatrix::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    pub fn ensure_unitary(&self, tol: f64) -> Result<(), LinalgError> {
        let deviation = self.unitarity_defect();
        if deviation <= tol {
            Ok(())
        } else {
            Err(LinalgError::NotUnitary { deviation })
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim, "apply dimension mismatch");
        let n = self.dim;
        (0..n)
            .map(|r| {
                self.data[r * n..(r + 1) * n]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `<u| self |v>`.
    pub fn sandwich(&self, u: &[Complex64], v: &[Complex64]) -> Complex64 {
        inner(u, &self.apply(v))
    }

    pub fn commutator(&self, other: &CMatrix) -> CMatrix {
        &(self * other) - &(other * self)
    }

    /// Determinant by LU decomposition with partial pivoting.
    pub fn determinant(&self) -> Complex64 {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut det = ONE;
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&i, &j| {
                    a[i * n + col]
                        .norm()
                        .partial_cmp(&a[j * n + col].norm())
                        .unwrap_or(core::cmp::Ordering::Equal)
                })
                .unwrap_or(col);
            if a[pivot * n + col] == ZERO {
                return ZERO;
            }
            if pivot != col {
                for k in 0..n {
                    a.swap(pivot * n + k, col * n + k);
                }
                det = -det;
            }
            let p = a[col * n + col];
            det *= p;
            for r in col + 1..n {
                let f = a[r * n + col] / p;
                if f == ZERO {
                    continue;
                }
                for k in col..n {
                    let v = a[col * n + k];
                    a[r * n + k] -= f * v;
                }
            }
        }
        det
    }

    fn check_dim(&self, other: &CMatrix) -> Result<(), LinalgError> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(LinalgError::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            })
        }
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.dim + c]
    }
}

/// Panics on a dimension mismatch; use [`CMatrix::matmul`] for a checked product.
impl Mul for &CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs).expect("matrix product dimension mismatch")
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix sum dimension mismatch");
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix difference dimension mismatch");
        CMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;

    fn neg(self) -> CMatrix {
        self.scale(-ONE)
    }
}

/// `<u|v>`, conjugate-linear in the first argument.
pub fn inner(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    assert_eq!(u.len(), v.len(), "inner product of unequal lengths");
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

/// `exp(scale * h)` for Hermitian `h`.
///
/// 2x2 generators use the closed form `cosh(s k) I + sinh(s k)/k (a . sigma)`
/// after splitting off the trace; larger ones go through the eigenbasis.
pub fn expm(h: &CMatrix, scale: Complex64) -> Result<CMatrix, LinalgError> {
    let deviation = h.hermiticity_defect();
    if deviation > HERMITIAN_TOL {
        return Err(LinalgError::NotHermitian { deviation });
    }
    if h.dim() == 2 {
        Ok(expm_2x2(h, scale))
    } else {
        Ok(expm_eigen(h, scale))
    }
}

fn expm_2x2(h: &CMatrix, s: Complex64) -> CMatrix {
    let a0 = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
    let ax = h[(0, 1)].re;
    let ay = -h[(0, 1)].im;
    let az = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
    let kappa = libm::sqrt(ax * ax + ay * ay + az * az);
    let sk = s * kappa;
    let cosh = sk.cosh();
    // sinh(s k) / k, continuous at k = 0
    let sinhc = if kappa > 0.0 { sk.sinh() / kappa } else { s };
    let prefactor = (s * a0).exp();
    let xy = Complex64::new(ax, -ay);
    CMatrix::from_rows([
        [prefactor * (cosh + sinhc * az), prefactor * sinhc * xy],
        [prefactor * sinhc * xy.conj(), prefactor * (cosh - sinhc * az)],
    ])
}

fn expm_eigen(h: &CMatrix, s: Complex64) -> CMatrix {
    let n = h.dim();
    let (vals, vecs) = symmetric_eigen(&real_embedding(h), 2 * n);
    // exp(sH) = g1(H) + i g2(H) with g1 = e^{a x} cos(b x), g2 = e^{a x} sin(b x);
    // real functions of H embed as [[Re, -Im], [Im, Re]].
    let g1: Vec<f64> = vals
        .iter()
        .map(|&x| libm::exp(s.re * x) * libm::cos(s.im * x))
        .collect();
    let g2: Vec<f64> = vals
        .iter()
        .map(|&x| libm::exp(s.re * x) * libm::sin(s.im * x))
        .collect();
    let m = 2 * n;
    let mut out = CMatrix::zeros(n);
    for r in 0..n {
        for c in 0..n {
            let (mut re1, mut im1, mut re2, mut im2) = (0.0, 0.0, 0.0, 0.0);
            for k in 0..m {
                let top = vecs[r * m + k] * vecs[c * m + k];
                let bottom = vecs[(r + n) * m + k] * vecs[c * m + k];
                re1 += top * g1[k];
                im1 += bottom * g1[k];
                re2 += top * g2[k];
                im2 += bottom * g2[k];
            }
            out[(r, c)] = Complex64::new(re1, im1) + I * Complex64::new(re2, im2);
        }
    }
    out
}

/// Eigenvalues of a Hermitian matrix in ascending order.
pub fn hermitian_eigenvalues(h: &CMatrix) -> Result<Vec<f64>, LinalgError> {
    let deviation = h.hermiticity_defect();
    if deviation > HERMITIAN_TOL * h.inf_norm().max(1.0) {
        return Err(LinalgError::NotHermitian { deviation });
    }
    let n = h.dim();
    let (mut vals, _) = symmetric_eigen(&real_embedding(h), 2 * n);
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap_or(core::cmp::Ordering::Equal));
    // every eigenvalue of H appears twice in the embedding
    Ok(vals.into_iter().step_by(2).collect())
}

/// `[[Re H, -Im H], [Im H, Re H]]`, real symmetric when `H` is Hermitian.
fn real_embedding(h: &CMatrix) -> Vec<f64> {
    let n = h.dim();
    let m = 2 * n;
    let mut out = vec![0.0; m * m];
    for r in 0..n {
        for c in 0..n {
            let z = h[(r, c)];
            out[r * m + c] = z.re;
            out[(r + n) * m + (c + n)] = z.re;
            out[r * m + (c + n)] = -z.im;
            out[(r + n) * m + c] = z.im;
        }
    }
    out
}

/// Cyclic Jacobi eigensolver for a real symmetric `n x n` matrix.
/// Returns eigenvalues and the column-eigenvector matrix (row-major).
fn symmetric_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = a.to_vec();
    let mut v = vec![0.0; n * n];
    for k in 0..n {
        v[k * n + k] = 1.0;
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>();
    for _sweep in 0..64 {
        let off: f64 = (0..n)
            .flat_map(|r| (0..n).filter(move |&c| c != r).map(move |c| (r, c)))
            .map(|(r, c)| a[r * n + c] * a[r * n + c])
            .sum();
        if off <= 1e-32 * scale || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = libm::copysign(1.0, theta) / (libm::fabs(theta) + libm::sqrt(theta * theta + 1.0));
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let vals = (0..n).map(|k| a[k * n + k]).collect();
    (vals, v)
}

fn isqrt(n: usize) -> usize {
    let mut r = libm::sqrt(n as f64) as usize;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn matmul_examples() {
        let x = CMatrix::sigma_x();
        let id = CMatrix::identity(2);
        assert_eq!(id.matmul(&x).unwrap(), x);
        assert_eq!(x.matmul(&x).unwrap(), id);
        let isz = CMatrix::sigma_z().scale(I);
        assert_eq!(isz.matmul(&isz).unwrap(), id.scale(c(-1.0, 0.0)));
    }

    #[test]
    fn matmul_rejects_mismatched_dims() {
        let err = CMatrix::identity(2).matmul(&CMatrix::identity(4)).unwrap_err();
        assert_eq!(err, LinalgError::DimensionMismatch { left: 2, right: 4 });
    }

    #[test]
    fn kron_basis_ordering() {
        let z = CMatrix::sigma_z();
        let id = CMatrix::identity(2);
        let d = |v: [f64; 4]| CMatrix::diag(&v.map(|x| c(x, 0.0)));
        assert_eq!(z.kron(&id), d([1.0, 1.0, -1.0, -1.0]));
        assert_eq!(id.kron(&z), d([1.0, -1.0, 1.0, -1.0]));
        let rr = CMatrix::from_real([[0.0, 0.0], [0.0, 1.0]]);
        assert_eq!(rr.kron(&rr), d([0.0, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn expm_examples() {
        let u = expm(&CMatrix::sigma_x(), c(0.0, PI / 2.0)).unwrap();
        assert!(u.max_abs_diff(&CMatrix::sigma_x().scale(I)) < 1e-15);

        let g = 0.731;
        let u = expm(&CMatrix::sigma_z(), c(0.0, g)).unwrap();
        let want = CMatrix::diag(&[c(0.0, g).exp(), c(0.0, -g).exp()]);
        assert!(u.max_abs_diff(&want) < 1e-15);

        let h4 = CMatrix::sigma_x().kron(&CMatrix::sigma_y());
        let u = expm(&h4, c(0.0, 0.0)).unwrap();
        assert!(u.max_abs_diff(&CMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn expm_4x4_matches_kron_of_closed_forms() {
        // exp(i t (A x I + I x B)) = exp(i t A) x exp(i t B)
        let a = &CMatrix::sigma_x().scale(c(0.7, 0.0)) + &CMatrix::sigma_z().scale(c(-0.2, 0.0));
        let b = CMatrix::sigma_y().scale(c(1.3, 0.0));
        let id = CMatrix::identity(2);
        let h = &a.kron(&id) + &id.kron(&b);
        let t = 2.37;
        let lhs = expm(&h, c(0.0, t)).unwrap();
        let rhs = expm(&a, c(0.0, t)).unwrap().kron(&expm(&b, c(0.0, t)).unwrap());
        assert!(lhs.max_abs_diff(&rhs) < 1e-13, "{}", lhs.max_abs_diff(&rhs));
    }

    #[test]
    fn expm_rejects_non_hermitian() {
        let m = CMatrix::from_real([[0.0, 1.0], [0.0, 0.0]]);
        assert!(matches!(
            expm(&m, c(0.0, 1.0)),
            Err(LinalgError::NotHermitian { .. })
        ));
    }

    #[test]
    fn determinant_and_eigenvalues() {
        let m = CMatrix::sigma_x().kron(&CMatrix::sigma_z());
        assert!((m.determinant() - ONE).norm() < 1e-15);
        let vals = hermitian_eigenvalues(&m).unwrap();
        let want = [-1.0, -1.0, 1.0, 1.0];
        for (v, w) in vals.iter().zip(want) {
            assert!((v - w).abs() < 1e-14);
        }
    }

    #[test]
    fn from_vec_rejects_non_square_lengths() {
        assert!(CMatrix::from_vec(vec![ONE; 3]).is_err());
        assert!(CMatrix::from_vec(Vec::new()).is_err());
        assert_eq!(CMatrix::from_vec(vec![ONE; 9]).unwrap().dim(), 3);
    }
}
