//! Entanglement and distance measures: concurrence, Uhlmann fidelity and CHSH.

use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::linalg::{eigen_hermitian, HermitianEigen, Matrix, PSD_FLOOR};
use crate::scalar::Real;
use crate::state::{DensityMatrix, Pauli};

/// Largest eigenvalue above which a unit-trace input is treated as pure.
const PURE_THRESHOLD: f64 = 1e-10;

/// Eigenvalues at or below this are treated as outside the support.
const SUPPORT_FLOOR: f64 = 1e-14;

fn unit_trace<T: Real>(m: &Matrix<T>) -> Result<Matrix<T>> {
    let tr = m.trace().re;
    if tr <= T::min_positive_value() {
        return invalid("operator has zero trace");
    }
    Ok(m.scale(T::one() / tr))
}

fn checked_eigen<T: Real>(m: &Matrix<T>) -> Result<HermitianEigen<T>> {
    let eig = eigen_hermitian(m)?;
    if eig.min_value() < -T::tol(PSD_FLOOR) {
        return invalid(format!(
            "input is not positive semidefinite (eigenvalue {:e})",
            eig.min_value().as_f64()
        ));
    }
    Ok(eig)
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    if rho.dim() != 4 {
        return invalid("concurrence needs a two-qubit state");
    }
    let m = unit_trace(rho.matrix())?;
    let eig = checked_eigen(&m)?;

    if eig.values[0] >= T::one() - T::tol(PURE_THRESHOLD) {
        // |ψ⟩ = a|HH⟩ + b|HV⟩ + c|VH⟩ + d|VV⟩  ⇒  C = 2|ad − bc|
        let v = &eig.vectors[0];
        let c = (v[0] * v[3] - v[1] * v[2]).norm() * T::lit(2.0);
        return Ok(c.min(T::one()));
    }

    // ρ = Σ wᵢwᵢ† over the support; λ are the singular values of τᵢⱼ = wᵢᵀ(Y⊗Y)wⱼ
    let w = support_factors(&eig);
    let yy = Pauli::Y.matrix::<T>().kron(&Pauli::Y.matrix());
    let yw: Vec<Vec<Complex<T>>> = w.iter().map(|v| yy.mul_vec(v)).collect();
    let tau: Vec<Vec<Complex<T>>> = w
        .iter()
        .map(|wi| yw.iter().map(|ywj| transpose_product(wi, ywj)).collect())
        .collect();
    let lambdas = singular_values(&tau)?;
    let c = lambdas[0] - lambdas[1..].iter().copied().sum::<T>();
    Ok(c.max(T::zero()).min(T::one()))
}

/// Eigenvectors scaled by `√λ`, dropping the numerically null part of the spectrum.
fn support_factors<T: Real>(eig: &HermitianEigen<T>) -> Vec<Vec<Complex<T>>> {
    let floor = T::tol(SUPPORT_FLOOR);
    let mut out: Vec<Vec<Complex<T>>> = eig
        .values
        .iter()
        .zip(&eig.vectors)
        .filter(|(l, _)| **l > floor)
        .map(|(l, v)| v.iter().map(|x| *x * l.sqrt()).collect())
        .collect();
    if out.is_empty() {
        out.push(eig.vectors[0].clone());
    }
    out
}

fn transpose_product<T: Real>(u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
    u.iter().zip(v).fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + *a * *b)
}

fn sesquilinear<T: Real>(u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
    u.iter().zip(v).fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * *b)
}

/// Singular values of a rectangular matrix, descending. For square input the
/// smallest one comes from `|det|` so that it keeps full absolute accuracy.
fn singular_values<T: Real>(rows: &[Vec<Complex<T>>]) -> Result<Vec<T>> {
    let (r, s) = (rows.len(), rows[0].len());
    let k: Vec<Vec<Complex<T>>> = if r <= s {
        rows.to_vec()
    } else {
        (0..s).map(|j| (0..r).map(|i| rows[i][j].conj()).collect()).collect()
    };
    let n = k.len();
    let gram = Matrix::from_fn(n, |i, j| sesquilinear(&k[j], &k[i]));
    let eig = eigen_hermitian(&gram.hermitian_part())?;
    let mut sv: Vec<T> = eig.values.iter().map(|&mu| mu.max(T::zero()).sqrt()).collect();
    if r == s && n > 1 {
        let others: T = sv[..n - 1].iter().copied().fold(T::one(), |a, b| a * b);
        if others > T::zero() {
            sv[n - 1] = (determinant(k).norm() / others).min(sv[n - 2]);
        }
    }
    Ok(sv)
}

/// Gaussian elimination with partial pivoting.
fn determinant<T: Real>(mut a: Vec<Vec<Complex<T>>>) -> Complex<T> {
    let n = a.len();
    let mut det = Complex::new(T::one(), T::zero());
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| a[x][col].norm().partial_cmp(&a[y][col].norm()).unwrap_or(std::cmp::Ordering::Equal))
            .unwrap_or(col);
        if a[pivot][col].norm() == T::zero() {
            return Complex::new(T::zero(), T::zero());
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det = det * a[col][col];
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for j in col..n {
                let v = a[col][j];
                a[row][j] = a[row][j] - f * v;
            }
        }
    }
    det
}

/// Uhlmann fidelity `(Tr √(√a b √a))²` of two unit-trace-normalized matrices.
pub(crate) fn fidelity_matrices<T: Real>(a: &Matrix<T>, b: &Matrix<T>) -> Result<T> {
    if a.dim() != b.dim() {
        return invalid(format!("fidelity of {}- and {}-dimensional states", a.dim(), b.dim()));
    }
    let a = unit_trace(a)?;
    let b = unit_trace(b)?;
    let eig_a = checked_eigen(&a)?;
    let pure = T::one() - T::tol(PURE_THRESHOLD);
    let value = if eig_a.values[0] >= pure {
        let psi = &eig_a.vectors[0];
        expectation(psi, &b)
    } else {
        let eig_b = checked_eigen(&b)?;
        if eig_b.values[0] >= pure {
            expectation(&eig_b.vectors[0], &a)
        } else {
            // √a√b restricted to both supports; F is the squared sum of its singular values
            let wa = support_factors(&eig_a);
            let wb = support_factors(&eig_b);
            let k: Vec<Vec<Complex<T>>> = wa
                .iter()
                .map(|u| wb.iter().map(|v| sesquilinear(u, v)).collect())
                .collect();
            let t: T = singular_values(&k)?.into_iter().sum();
            t * t
        }
    };
    Ok(value.max(T::zero()).min(T::one()))
}

fn expectation<T: Real>(psi: &[Complex<T>], m: &Matrix<T>) -> T {
    let mpsi = m.mul_vec(psi);
    psi.iter()
        .zip(&mpsi)
        .map(|(a, b)| (a.conj() * b).re)
        .sum()
}

/// Uhlmann state fidelity, in `[0, 1]`.
pub fn state_fidelity<T: Real>(rho: &DensityMatrix<T>, sigma: &DensityMatrix<T>) -> Result<T> {
    fidelity_matrices(rho.matrix(), sigma.matrix())
}

/// Analyzer orientations in degrees for the two settings on each side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyzerAngles<T> {
    pub theta1: T,
    pub theta1p: T,
    pub theta2: T,
    pub theta2p: T,
}

/// Maps an angle in degrees into `(−90, 90]`.
pub fn canonical_angle<T: Real>(deg: T) -> T {
    let period = T::lit(180.0);
    let half = T::lit(90.0);
    let mut a = deg % period;
    if a > half {
        a = a - period;
    } else if a <= -half {
        a = a + period;
    }
    a
}

impl<T: Real> AnalyzerAngles<T> {
    pub fn new(theta1: T, theta1p: T, theta2: T, theta2p: T) -> Result<Self> {
        if ![theta1, theta1p, theta2, theta2p].iter().all(|a| a.is_finite()) {
            return invalid("analyzer angles must be finite");
        }
        Ok(Self {
            theta1: canonical_angle(theta1),
            theta1p: canonical_angle(theta1p),
            theta2: canonical_angle(theta2),
            theta2p: canonical_angle(theta2p),
        })
    }

    pub fn from_degrees(angles: [f64; 4]) -> Result<Self> {
        Self::new(
            T::lit(angles[0]),
            T::lit(angles[1]),
            T::lit(angles[2]),
            T::lit(angles[3]),
        )
    }

    pub fn as_array(&self) -> [T; 4] {
        [self.theta1, self.theta1p, self.theta2, self.theta2p]
    }
}

/// Pauli correlation matrix `tᵢⱼ = Tr[ρ (σᵢ ⊗ σⱼ)]`, indices in X, Y, Z order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CorrelationMatrix<T> {
    pub t: [[T; 3]; 3],
}

const XYZ: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

pub fn correlation_matrix<T: Real>(rho: &DensityMatrix<T>) -> Result<CorrelationMatrix<T>> {
    if rho.dim() != 4 {
        return invalid("correlation matrix needs a two-qubit state");
    }
    let m = unit_trace(rho.matrix())?;
    let mut t = [[T::zero(); 3]; 3];
    for (i, pi) in XYZ.iter().enumerate() {
        for (j, pj) in XYZ.iter().enumerate() {
            let obs = pi.matrix::<T>().kron(&pj.matrix());
            t[i][j] = m.trace_product(&obs).re;
        }
    }
    Ok(CorrelationMatrix { t })
}

/// Analyzer observable `A(θ) = cos(2θ) Z + sin(2θ) X`, θ in degrees.
pub fn analyzer_observable<T: Real>(theta_deg: T) -> Matrix<T> {
    let (s, c) = (theta_deg.to_radians() * T::lit(2.0)).sin_cos();
    &Pauli::Z.matrix::<T>().scale(c) + &Pauli::X.matrix::<T>().scale(s)
}

/// `(cos 2θ, sin 2θ)`: the analyzer's direction in the Z–X plane.
fn plane_vector<T: Real>(theta_deg: T) -> [T; 2] {
    let (s, c) = (theta_deg.to_radians() * T::lit(2.0)).sin_cos();
    [c, s]
}

/// Restriction of the correlation matrix to the Z–X plane, rows/columns ordered (Z, X).
fn plane_block<T: Real>(corr: &CorrelationMatrix<T>) -> [[T; 2]; 2] {
    let t = &corr.t;
    [[t[2][2], t[2][0]], [t[0][2], t[0][0]]]
}

fn bilinear<T: Real>(m: &[[T; 2]; 2], u: [T; 2], v: [T; 2]) -> T {
    u[0] * (m[0][0] * v[0] + m[0][1] * v[1]) + u[1] * (m[1][0] * v[0] + m[1][1] * v[1])
}

/// Correlation `E(a, b) = Tr[ρ A(a) ⊗ A(b)]`.
pub fn correlation<T: Real>(rho: &DensityMatrix<T>, a_deg: T, b_deg: T) -> Result<T> {
    if rho.dim() != 4 {
        return invalid("correlation needs a two-qubit state");
    }
    let obs = analyzer_observable(a_deg).kron(&analyzer_observable(b_deg));
    Ok(unit_trace(rho.matrix())?.trace_product(&obs).re)
}

fn chsh_from_block<T: Real>(m: &[[T; 2]; 2], angles: &[T; 4]) -> T {
    let [a, ap, b, bp] = angles.map(plane_vector);
    bilinear(m, a, b) - bilinear(m, a, bp) + bilinear(m, ap, b) + bilinear(m, ap, bp)
}

/// `S = E(θ₁,θ₂) − E(θ₁,θ₂′) + E(θ₁′,θ₂) + E(θ₁′,θ₂′)`.
pub fn chsh_value<T: Real>(rho: &DensityMatrix<T>, angles: &AnalyzerAngles<T>) -> Result<T> {
    let corr = correlation_matrix(rho)?;
    Ok(chsh_from_block(&plane_block(&corr), &angles.as_array()))
}

const GRID_STEP_DEG: f64 = 5.0;
const ANGLE_TOL_DEG: f64 = 1e-7;
const MAX_ASCENT_SWEEPS: usize = 100_000;

/// Maximizes `chsh_value` over Z–X-plane analyzers: 5° grid search, then
/// coordinate ascent where each single-angle update is solved exactly.
pub fn chsh_optimize<T: Real>(rho: &DensityMatrix<T>) -> Result<(T, AnalyzerAngles<T>)> {
    let corr = correlation_matrix(rho)?;
    let m = plane_block(&corr);

    let steps = (180.0 / GRID_STEP_DEG) as usize;
    let grid: Vec<T> = (0..steps)
        .map(|k| T::lit(-90.0 + GRID_STEP_DEG * (k as f64 + 1.0)))
        .collect();
    let dirs: Vec<[T; 2]> = grid.iter().map(|&g| plane_vector(g)).collect();
    let table: Vec<Vec<T>> = dirs
        .iter()
        .map(|&u| dirs.iter().map(|&v| bilinear(&m, u, v)).collect())
        .collect();

    let mut best = (T::neg_infinity(), [0usize; 4]);
    for a in 0..steps {
        for ap in 0..steps {
            for b in 0..steps {
                let partial = table[a][b] + table[ap][b];
                for bp in 0..steps {
                    let s = partial - table[a][bp] + table[ap][bp];
                    if s > best.0 {
                        best = (s, [a, ap, b, bp]);
                    }
                }
            }
        }
    }
    let mut angles = best.1.map(|k| grid[k]);

    let mt = [[m[0][0], m[1][0]], [m[0][1], m[1][1]]];
    let apply = |mat: &[[T; 2]; 2], v: [T; 2]| {
        [
            mat[0][0] * v[0] + mat[0][1] * v[1],
            mat[1][0] * v[0] + mat[1][1] * v[1],
        ]
    };
    let argmax = |w: [T; 2], current: T| {
        if w[0] == T::zero() && w[1] == T::zero() {
            current
        } else {
            // maximize cos2θ·w_z + sin2θ·w_x
            w[1].atan2(w[0]).to_degrees() / T::lit(2.0)
        }
    };
    let tol = T::lit(ANGLE_TOL_DEG);
    for _ in 0..MAX_ASCENT_SWEEPS {
        let before = angles;
        let b = plane_vector(angles[2]);
        let bp = plane_vector(angles[3]);
        angles[0] = argmax(apply(&m, [b[0] - bp[0], b[1] - bp[1]]), angles[0]);
        angles[1] = argmax(apply(&m, [b[0] + bp[0], b[1] + bp[1]]), angles[1]);
        let a = plane_vector(angles[0]);
        let ap = plane_vector(angles[1]);
        angles[2] = argmax(apply(&mt, [a[0] + ap[0], a[1] + ap[1]]), angles[2]);
        angles[3] = argmax(apply(&mt, [ap[0] - a[0], ap[1] - a[1]]), angles[3]);
        let moved = angles
            .iter()
            .zip(&before)
            .map(|(x, y)| canonical_angle(*x - *y).abs())
            .fold(T::zero(), T::max);
        if moved <= tol {
            break;
        }
    }
    let angles = AnalyzerAngles::new(angles[0], angles[1], angles[2], angles[3])?;
    let s = chsh_from_block(&m, &angles.as_array());
    Ok((s, angles))
}

/// Maximal CHSH value over all projective analyzers: `2√(u₁ + u₂)` from the
/// two largest eigenvalues of `TᵀT`.
pub fn horodecki_smax<T: Real>(rho: &DensityMatrix<T>) -> Result<T> {
    let corr = correlation_matrix(rho)?;
    let t = &corr.t;
    let gram = Matrix::from_fn(3, |i, j| {
        let v: T = (0..3).map(|k| t[k][i] * t[k][j]).sum();
        Complex::new(v, T::zero())
    });
    let eig = eigen_hermitian(&gram)?;
    let u = eig.values[0].max(T::zero()) + eig.values[1].max(T::zero());
    Ok(T::lit(2.0) * u.sqrt())
}
