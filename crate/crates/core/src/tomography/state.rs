//! Density-matrix reconstruction: linear inversion, physical projection and
//! maximum likelihood.

use num_complex::Complex;

use super::{CountRecord, TomographyDatum};
use crate::error::{invalid, Error, Result};
use crate::linalg::{eigen_hermitian, least_squares, Matrix};
use crate::scalar::Real;
use crate::state::{DensityMatrix, Pauli};

pub const MAX_MLE_ITERATIONS: usize = 5000;
const RELATIVE_TOLERANCE: f64 = 1e-10;
/// White-noise admixture of the second, full-rank starting point.
const FULL_RANK_MIX: f64 = 0.01;

/// Pauli products for `n` qubits, qubit A leftmost.
fn pauli_basis<T: Real>(num_qubits: usize) -> Vec<Matrix<T>> {
    match num_qubits {
        1 => Pauli::ALL.iter().map(|p| p.matrix()).collect(),
        _ => Pauli::ALL
            .iter()
            .flat_map(|a| Pauli::ALL.iter().map(move |b| a.matrix::<T>().kron(&b.matrix())))
            .collect(),
    }
}

fn check_data<T: Real>(data: &[TomographyDatum<T>], dim: usize) -> Result<()> {
    if dim != 2 && dim != 4 {
        return invalid(format!("tomography dimension {dim} is not 2 or 4"));
    }
    if data.is_empty() {
        return Err(Error::IncompleteData("no records".into()));
    }
    for d in data {
        if d.setting.dim() != dim {
            return invalid(format!("setting {} does not match dimension {dim}", d.setting));
        }
        if !(d.trials > T::zero()) || d.successes < T::zero() || d.successes > d.trials {
            return invalid(format!("setting {} has inconsistent counts", d.setting));
        }
    }
    Ok(())
}

fn quadratic_form<T: Real>(psi: &[Complex<T>], m: &Matrix<T>) -> T {
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..psi.len() {
        let mut row = Complex::new(T::zero(), T::zero());
        for j in 0..psi.len() {
            row = row + m[(i, j)] * psi[j];
        }
        acc = acc + psi[i].conj() * row;
    }
    acc.re
}

/// Least-squares Pauli expectations and the (possibly unphysical) matrix they define.
#[derive(Clone, Debug)]
pub struct LinearInversion<T> {
    /// `Tr[ρ P]` for `P` in the Pauli-product basis (I first), normalized so the identity term is 1.
    pub pauli_expectations: Vec<T>,
    pub raw: Matrix<T>,
}

impl<T: Real> LinearInversion<T> {
    /// `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)` for single-qubit data.
    pub fn bloch_vector(&self) -> Option<[T; 3]> {
        (self.pauli_expectations.len() == 4).then(|| {
            [
                self.pauli_expectations[1],
                self.pauli_expectations[2],
                self.pauli_expectations[3],
            ]
        })
    }
}

pub fn linear_inversion<T: Real>(data: &[TomographyDatum<T>], dim: usize) -> Result<LinearInversion<T>> {
    check_data(data, dim)?;
    let num_qubits = if dim == 2 { 1 } else { 2 };
    let basis = pauli_basis::<T>(num_qubits);
    let norm = T::lit(dim as f64);
    let rows: Vec<Vec<T>> = data
        .iter()
        .map(|d| {
            let psi = d.setting.projector_vector::<T>();
            basis.iter().map(|p| quadratic_form(&psi, p) / norm).collect()
        })
        .collect();
    let rhs: Vec<T> = data.iter().map(|d| d.frequency()).collect();
    let coeffs = least_squares(&rows, &rhs).ok_or_else(|| {
        Error::IncompleteData(format!(
            "{} settings do not determine a {dim}-dimensional state",
            data.len()
        ))
    })?;
    let identity_weight = coeffs[0];
    if !(identity_weight > T::zero()) {
        return Err(Error::IncompleteData("estimated trace is not positive".into()));
    }
    let mut raw = Matrix::zeros(dim);
    for (c, p) in coeffs.iter().zip(&basis) {
        raw = &raw + &p.scale(*c / norm);
    }
    Ok(LinearInversion {
        pauli_expectations: coeffs.iter().map(|&c| c / identity_weight).collect(),
        raw,
    })
}

/// Linear-inversion estimate followed by projection onto physical states.
pub fn linear_inversion_state<T: Real>(records: &[CountRecord], dim: usize) -> Result<DensityMatrix<T>> {
    let data: Vec<TomographyDatum<T>> = records.iter().map(Into::into).collect();
    project_to_physical(&linear_inversion(&data, dim)?.raw)
}

/// Euclidean projection of a real vector onto the probability simplex.
fn project_to_simplex<T: Real>(values: &[T]) -> Vec<T> {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    let mut cumulative = T::zero();
    let mut shift = T::zero();
    for (k, &u) in sorted.iter().enumerate() {
        cumulative = cumulative + u;
        let candidate = (cumulative - T::one()) / T::lit((k + 1) as f64);
        if u - candidate > T::zero() {
            shift = candidate;
        }
    }
    values.iter().map(|&v| (v - shift).max(T::zero())).collect()
}

/// Nearest (Frobenius) unit-trace positive-semidefinite matrix.
pub fn project_to_physical<T: Real>(m: &Matrix<T>) -> Result<DensityMatrix<T>> {
    if m.dim() != 2 && m.dim() != 4 {
        return invalid("projection needs a 2x2 or 4x4 matrix");
    }
    let eig = eigen_hermitian(m)?;
    let clipped = project_to_simplex(&eig.values);
    let mut i = 0;
    let out = eig.reconstruct_with(|_| {
        let v = clipped[i];
        i += 1;
        v
    });
    Ok(DensityMatrix::from_matrix_unchecked(out.hermitian_part()))
}

/// Maximum-likelihood reconstruction with its convergence record.
#[derive(Clone, Debug)]
pub struct MleEstimate<T> {
    pub state: DensityMatrix<T>,
    pub log_likelihood: T,
    pub iterations: usize,
    pub converged: bool,
    /// Log-likelihood after every accepted iterate, starting from the initial point.
    pub history: Vec<T>,
}

struct Problem<T> {
    projectors: Vec<Vec<Complex<T>>>,
    successes: Vec<T>,
    failures: Vec<T>,
    dim: usize,
}

impl<T: Real> Problem<T> {
    fn new(data: &[TomographyDatum<T>], dim: usize) -> Self {
        Self {
            projectors: data.iter().map(|d| d.setting.projector_vector()).collect(),
            successes: data.iter().map(|d| d.successes).collect(),
            failures: data.iter().map(|d| d.trials - d.successes).collect(),
            dim,
        }
    }

    /// `ρ = T†T / Tr(T†T)`.
    fn state(&self, t: &Matrix<T>) -> Matrix<T> {
        let gram = &t.adjoint() * t;
        let tr = gram.trace().re;
        gram.scale(T::one() / tr)
    }

    fn probabilities(&self, rho: &Matrix<T>) -> Vec<T> {
        self.projectors.iter().map(|psi| quadratic_form(psi, rho)).collect()
    }

    fn log_likelihood(&self, probs: &[T]) -> T {
        let mut ll = T::zero();
        for ((&p, &s), &f) in probs.iter().zip(&self.successes).zip(&self.failures) {
            if s > T::zero() {
                if p <= T::zero() {
                    return T::neg_infinity();
                }
                ll = ll + s * p.ln();
            }
            if f > T::zero() {
                let q = T::one() - p;
                if q <= T::zero() {
                    return T::neg_infinity();
                }
                ll = ll + f * q.ln();
            }
        }
        ll
    }

    /// Gradient of the log-likelihood with respect to the lower-triangular factor.
    fn gradient(&self, t: &Matrix<T>, rho: &Matrix<T>, probs: &[T]) -> Matrix<T> {
        let n = self.dim;
        let mut g = Matrix::zeros(n);
        for (k, psi) in self.projectors.iter().enumerate() {
            let p = probs[k];
            let mut w = T::zero();
            if self.successes[k] > T::zero() {
                w = w + self.successes[k] / p;
            }
            if self.failures[k] > T::zero() {
                w = w - self.failures[k] / (T::one() - p);
            }
            if w == T::zero() {
                continue;
            }
            g = &g + &Matrix::outer(psi, psi).scale(w);
        }
        let centered = &g - &Matrix::identity(n).scale(g.trace_product(rho).re);
        let tr = (&t.adjoint() * t).trace().re;
        let mut grad = (t * &centered).scale(T::lit(2.0) / tr);
        for i in 0..n {
            for j in 0..n {
                if j > i {
                    grad[(i, j)] = Complex::new(T::zero(), T::zero());
                } else if i == j {
                    grad[(i, j)] = Complex::new(grad[(i, j)].re, T::zero());
                }
            }
        }
        grad
    }
}

/// Lower-triangular `T` with `T†T = ρ`, allowing rank deficiency.
fn triangular_factor<T: Real>(rho: &Matrix<T>) -> Matrix<T> {
    let n = rho.dim();
    // Cholesky of the index-reversed matrix: JρJ = LL†, then T = J L† J.
    let rev = Matrix::from_fn(n, |i, j| rho[(n - 1 - i, n - 1 - j)]);
    let mut l = Matrix::<T>::zeros(n);
    let floor = T::tol(1e-14);
    for j in 0..n {
        let mut d = rev[(j, j)].re;
        for k in 0..j {
            d = d - l[(j, k)].norm_sqr();
        }
        if d <= floor {
            continue;
        }
        let ljj = d.sqrt();
        l[(j, j)] = Complex::new(ljj, T::zero());
        for i in j + 1..n {
            let mut s = rev[(i, j)];
            for k in 0..j {
                s = s - l[(i, k)] * l[(j, k)].conj();
            }
            l[(i, j)] = s / ljj;
        }
    }
    Matrix::from_fn(n, |i, j| l[(n - 1 - j, n - 1 - i)].conj())
}

struct Ascent<T> {
    t: Matrix<T>,
    log_likelihood: T,
    iterations: usize,
    converged: bool,
    history: Vec<T>,
}

fn ascend<T: Real>(problem: &Problem<T>, start: &Matrix<T>) -> Ascent<T> {
    let mut t = triangular_factor(start);
    let mut rho = problem.state(&t);
    let mut probs = problem.probabilities(&rho);
    let mut ll = problem.log_likelihood(&probs);
    let mut history = vec![ll];
    let mut step = T::lit(0.1);
    let mut converged = false;
    let mut iterations = 0;
    let tol = T::tol(RELATIVE_TOLERANCE);

    while iterations < MAX_MLE_ITERATIONS {
        iterations += 1;
        let grad = problem.gradient(&t, &rho, &probs);
        let gnorm = grad.frobenius_norm();
        if !(gnorm > T::zero()) || !gnorm.is_finite() {
            converged = true;
            break;
        }
        let direction = grad.scale(T::one() / gnorm);
        let mut accepted = None;
        for _ in 0..60 {
            let candidate = &t + &direction.scale(step);
            let norm = candidate.frobenius_norm();
            let candidate = candidate.scale(T::one() / norm);
            let cand_rho = problem.state(&candidate);
            let cand_probs = problem.probabilities(&cand_rho);
            let cand_ll = problem.log_likelihood(&cand_probs);
            if cand_ll > ll {
                accepted = Some((candidate, cand_rho, cand_probs, cand_ll));
                break;
            }
            step = step / T::lit(2.0);
        }
        let Some((nt, nrho, nprobs, nll)) = accepted else {
            converged = true;
            break;
        };
        let change = (nll - ll).abs() / ll.abs().max(T::min_positive_value());
        t = nt;
        rho = nrho;
        probs = nprobs;
        ll = nll;
        history.push(ll);
        step = (step * T::lit(2.0)).min(T::one());
        if change <= tol {
            converged = true;
            break;
        }
    }
    Ascent {
        t,
        log_likelihood: ll,
        iterations,
        converged,
        history,
    }
}

/// Binomial maximum-likelihood reconstruction over `ρ = T†T/Tr(T†T)`.
///
/// Ascent runs from the projected linear-inversion estimate and from a
/// slightly depolarized copy of it; the better optimum is kept.
pub fn mle_state_from<T: Real>(data: &[TomographyDatum<T>], dim: usize) -> Result<MleEstimate<T>> {
    let initial = project_to_physical(&linear_inversion(data, dim)?.raw)?;
    let problem = Problem::new(data, dim);

    let mixed = &initial.matrix().scale(T::one() - T::lit(FULL_RANK_MIX))
        + &Matrix::identity(dim).scale(T::lit(FULL_RANK_MIX) / T::lit(dim as f64));
    let mut starts = vec![mixed];
    if problem.log_likelihood(&problem.probabilities(initial.matrix())).is_finite() {
        starts.insert(0, initial.matrix().clone());
    }
    let best = starts
        .iter()
        .map(|s| ascend(&problem, s))
        .max_by(|a, b| {
            a.log_likelihood
                .partial_cmp(&b.log_likelihood)
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("at least one start");
    let state = DensityMatrix::from_matrix_unchecked(problem.state(&best.t).hermitian_part());
    Ok(MleEstimate {
        state,
        log_likelihood: best.log_likelihood,
        iterations: best.iterations,
        converged: best.converged,
        history: best.history,
    })
}

pub fn mle_state<T: Real>(records: &[CountRecord], dim: usize) -> Result<MleEstimate<T>> {
    let data: Vec<TomographyDatum<T>> = records.iter().map(Into::into).collect();
    mle_state_from(&data, dim)
}
