//! Small dense complex matrices and the Hermitian eigensolver built on them.
//!
//! Everything here works for arbitrary (small) square dimensions; the rest of
//! the crate only ever uses 2, 3 and 4.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> Matrix<T> {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![Complex::new(T::zero(), T::zero()); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| {
            if i == j {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    /// Builds a matrix from row-major entries; fails unless `entries` is a perfect square.
    pub fn from_vec(entries: Vec<Complex<T>>) -> Result<Self> {
        let dim = (entries.len() as f64).sqrt().round() as usize;
        if dim * dim != entries.len() || dim == 0 {
            return invalid(format!("{} entries do not form a square matrix", entries.len()));
        }
        Ok(Self { dim, data: entries })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let dim = rows.len();
        Self::from_fn(dim, |i, j| Complex::new(T::lit(rows[i][j]), T::zero()))
    }

    pub fn diag(values: &[T]) -> Self {
        Self::from_fn(values.len(), |i, j| {
            if i == j {
                Complex::new(values[i], T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
    }

    pub fn diag_complex(values: &[Complex<T>]) -> Self {
        Self::from_fn(values.len(), |i, j| {
            if i == j {
                values[i]
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
    }

    /// `u v†`.
    pub fn outer(u: &[Complex<T>], v: &[Complex<T>]) -> Self {
        assert_eq!(u.len(), v.len(), "outer product of unequal lengths");
        Self::from_fn(u.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(i, j)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim)
            .map(|i| self[(i, i)])
            .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
    }

    pub fn scale(&self, factor: T) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn scale_complex(&self, factor: Complex<T>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * factor).collect(),
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (m, n) = (self.dim, other.dim);
        Self::from_fn(m * n, |i, j| self[(i / n, j / n)] * other[(i % n, j % n)])
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(v.len(), self.dim, "matrix-vector dimension mismatch");
        (0..self.dim)
            .map(|i| {
                (0..self.dim)
                    .map(|j| self[(i, j)] * v[j])
                    .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
            })
            .collect()
    }

    /// `Tr[self · other]` without forming the product.
    pub fn trace_product(&self, other: &Self) -> Complex<T> {
        assert_eq!(self.dim, other.dim);
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..self.dim {
            for k in 0..self.dim {
                acc = acc + self[(i, k)] * other[(k, i)];
            }
        }
        acc
    }

    /// Largest entry-wise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    /// Largest entry of `|M − M†|`.
    pub fn hermitian_deviation(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * half)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = Complex<T>;

    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<T: Real> Mul for &Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.dim, rhs.dim, "matrix product dimension mismatch");
        let n = self.dim;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + a * rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl<T: Real> Mul for Matrix<T> {
    type Output = Matrix<T>;

    fn mul(self, rhs: Matrix<T>) -> Matrix<T> {
        &self * &rhs
    }
}

impl<T: Real> Add for &Matrix<T> {
    type Output = Matrix<T>;

    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.dim, rhs.dim);
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &Matrix<T> {
    type Output = Matrix<T>;

    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        assert_eq!(self.dim, rhs.dim);
        Matrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Real> Neg for &Matrix<T> {
    type Output = Matrix<T>;

    fn neg(self) -> Matrix<T> {
        Matrix {
            dim: self.dim,
            data: self.data.iter().map(|z| -z).collect(),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[Complex<T>]> = self.data.chunks(self.dim.max(1)).collect();
        f.debug_struct("Matrix").field("dim", &self.dim).field("rows", &rows).finish()
    }
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted descending.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T> {
    pub values: Vec<T>,
    /// Orthonormal eigenvectors; `vectors[k]` belongs to `values[k]`.
    pub vectors: Vec<Vec<Complex<T>>>,
}

impl<T: Real> HermitianEigen<T> {
    /// `Σ f(λᵢ) vᵢvᵢ†`.
    pub fn reconstruct_with(&self, mut f: impl FnMut(T) -> T) -> Matrix<T> {
        let n = self.values.len();
        let mut out = Matrix::zeros(n);
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            let w = f(*lambda);
            if w == T::zero() {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] = out[(i, j)] + v[i] * v[j].conj() * w;
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> Matrix<T> {
        self.reconstruct_with(|l| l)
    }

    pub fn min_value(&self) -> T {
        *self.values.last().expect("non-empty spectrum")
    }
}

const MAX_SWEEPS: usize = 100;

/// Hermitian eigensolver: analytic for 2×2, cyclic complex Jacobi otherwise.
pub fn eigen_hermitian<T: Real>(m: &Matrix<T>) -> Result<HermitianEigen<T>> {
    let scale = T::one().max(m.max_abs());
    if !m.is_finite() {
        return invalid("matrix has non-finite entries");
    }
    let deviation = m.hermitian_deviation();
    if deviation > T::tol(1e-8) * scale {
        return invalid(format!(
            "matrix is not Hermitian (deviation {:e})",
            deviation.as_f64()
        ));
    }
    let n = m.dim();
    let mut a = m.hermitian_part();
    let mut v = Matrix::identity(n);

    if n == 2 {
        rotate(&mut a, &mut v, 0, 1);
    } else if n > 2 {
        let threshold = T::tol(1e-12) * T::one().max(a.frobenius_norm());
        let mut converged = false;
        for _ in 0..MAX_SWEEPS {
            if off_diagonal_norm(&a) <= threshold {
                converged = true;
                break;
            }
            for p in 0..n - 1 {
                for q in p + 1..n {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
        if !converged && off_diagonal_norm(&a) > threshold {
            return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].re.partial_cmp(&a[(i, i)].re).expect("finite"));
    Ok(HermitianEigen {
        values: order.iter().map(|&i| a[(i, i)].re).collect(),
        vectors: order.iter().map(|&i| v.column(i)).collect(),
    })
}

fn off_diagonal_norm<T: Real>(a: &Matrix<T>) -> T {
    let mut acc = T::zero();
    for i in 0..a.dim() {
        for j in 0..a.dim() {
            if i != j {
                acc = acc + a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// One Jacobi rotation annihilating `a[p][q]`; accumulates the rotation into `v`.
fn rotate<T: Real>(a: &mut Matrix<T>, v: &mut Matrix<T>, p: usize, q: usize) {
    let b = a[(p, q)];
    let magnitude = b.norm();
    if magnitude == T::zero() {
        return;
    }
    let two = T::lit(2.0);
    let (app, aqq) = (a[(p, p)].re, a[(q, q)].re);
    let theta = (two * magnitude).atan2(app - aqq) / two;
    let (s, c) = theta.sin_cos();
    // e^{-iφ} with φ = arg(b)
    let phase = b.conj() / magnitude;
    let zero = T::zero();
    let g_pp = Complex::new(c, zero);
    let g_pq = Complex::new(-s, zero);
    let g_qp = phase * s;
    let g_qq = phase * c;

    let n = a.dim();
    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = Complex::new(zero, zero);
    a[(q, p)] = Complex::new(zero, zero);
    a[(p, p)] = Complex::new(a[(p, p)].re, zero);
    a[(q, q)] = Complex::new(a[(q, q)].re, zero);
}

/// Eigenvalues in `[-PSD_FLOOR, 0)` are treated as roundoff and clipped.
pub const PSD_FLOOR: f64 = 1e-9;
/// Eigenvalues below `-PSD_ERROR` indicate a genuinely non-physical matrix.
pub const PSD_ERROR: f64 = 1e-6;

/// Principal square root of a positive-semidefinite Hermitian matrix.
pub fn sqrt_psd<T: Real>(m: &Matrix<T>) -> Result<Matrix<T>> {
    let eig = eigen_hermitian(m)?;
    check_psd(&eig)?;
    Ok(eig.reconstruct_with(|l| l.max(T::zero()).sqrt()))
}

pub(crate) fn check_psd<T: Real>(eig: &HermitianEigen<T>) -> Result<()> {
    let min = eig.min_value();
    if min < -T::lit(PSD_ERROR) {
        return Err(Error::NotPsd {
            min_eigenvalue: min.as_f64(),
        });
    }
    Ok(())
}

/// Least-squares solution of the real system `A x ≈ b` via the normal equations.
///
/// Returns `None` when `AᵀA` is numerically singular.
pub(crate) fn least_squares<T: Real>(rows: &[Vec<T>], rhs: &[T]) -> Option<Vec<T>> {
    let n = rows.first()?.len();
    let mut normal = vec![vec![T::zero(); n + 1]; n];
    for (row, &b) in rows.iter().zip(rhs) {
        for i in 0..n {
            if row[i] == T::zero() {
                continue;
            }
            for j in 0..n {
                normal[i][j] = normal[i][j] + row[i] * row[j];
            }
            normal[i][n] = normal[i][n] + row[i] * b;
        }
    }
    let scale = (0..n).map(|i| normal[i][i]).fold(T::zero(), T::max);
    let threshold = T::tol(1e-10) * scale.max(T::min_positive_value());

    // Gauss-Jordan with partial pivoting on the augmented system.
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| {
            normal[a][col]
                .abs()
                .partial_cmp(&normal[b][col].abs())
                .expect("finite")
        })?;
        if normal[pivot][col].abs() <= threshold {
            return None;
        }
        normal.swap(col, pivot);
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = normal[r][col] / normal[col][col];
            if factor == T::zero() {
                continue;
            }
            for c in col..=n {
                normal[r][c] = normal[r][c] - factor * normal[col][c];
            }
        }
    }
    Some((0..n).map(|i| normal[i][n] / normal[i][i]).collect())
}
