//! Single-qubit process tomography in the Pauli operator basis.

use num_complex::Complex;

use super::{derive_seed, mle_state, sample_counts, single_qubit_settings};
use crate::error::{invalid, Error, Result};
use crate::linalg::{eigen_hermitian, Matrix, PSD_FLOOR};
use crate::measurement::{CollapseStrength, Outcome};
use crate::metrics::fidelity_matrices;
use crate::scalar::Real;
use crate::state::{ket, DensityMatrix, KetLabel, Pauli};

/// Probe states fed through the channel, in this order.
pub const PROBES: [KetLabel; 4] = [KetLabel::H, KetLabel::V, KetLabel::D, KetLabel::R];

/// Process matrix in the (I, X, Y, Z) operator basis.
///
/// The trace is the probe-averaged success probability, so it equals 1 only
/// for trace-preserving processes.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiMatrix<T> {
    matrix: Matrix<T>,
}

impl<T: Real> ChiMatrix<T> {
    pub fn new(matrix: Matrix<T>) -> Result<Self> {
        if matrix.dim() != 4 {
            return invalid("chi matrix must be 4x4");
        }
        if matrix.hermitian_deviation() > T::tol(1e-10) {
            return invalid("chi matrix is not Hermitian");
        }
        let eig = eigen_hermitian(&matrix)?;
        if eig.min_value() < -T::tol(PSD_FLOOR) {
            return Err(Error::NotPsd {
                min_eigenvalue: eig.min_value().as_f64(),
            });
        }
        let tr = matrix.trace().re;
        if tr > T::one() + T::tol(1e-9) || !(tr > T::zero()) {
            return invalid(format!("chi trace {tr} outside (0, 1]"));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn entry(&self, row: Pauli, col: Pauli) -> Complex<T> {
        self.matrix[(pauli_index(row), pauli_index(col))]
    }

    pub fn trace(&self) -> T {
        self.matrix.trace().re
    }

    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if !(tr > T::zero()) {
            return invalid("chi matrix has zero trace");
        }
        Ok(Self {
            matrix: self.matrix.scale(T::one() / tr),
        })
    }

    /// `Σ χₘₙ Eₘ ρ Eₙ†`.
    pub fn apply(&self, rho: &Matrix<T>) -> Matrix<T> {
        let mut out = Matrix::zeros(2);
        for (m, pm) in Pauli::ALL.iter().enumerate() {
            for (n, pn) in Pauli::ALL.iter().enumerate() {
                let c = self.matrix[(m, n)];
                if c.norm() == T::zero() {
                    continue;
                }
                let term = &(&pm.matrix::<T>() * rho) * &pn.matrix::<T>().adjoint();
                out = &out + &term.scale_complex(c);
            }
        }
        out
    }
}

fn pauli_index(p: Pauli) -> usize {
    match p {
        Pauli::I => 0,
        Pauli::X => 1,
        Pauli::Y => 2,
        Pauli::Z => 3,
    }
}

fn rank_one_chi<T: Real>(coeffs: [T; 4]) -> ChiMatrix<T> {
    let v: Vec<Complex<T>> = coeffs.iter().map(|&c| Complex::new(c, T::zero())).collect();
    ChiMatrix {
        matrix: Matrix::outer(&v, &v),
    }
}

/// χ of the identity process, `e_I e_I†`.
pub fn chi_identity<T: Real>() -> ChiMatrix<T> {
    chi_pauli(Pauli::I)
}

/// χ of the unitary Pauli process `ρ → PρP`.
pub fn chi_pauli<T: Real>(p: Pauli) -> ChiMatrix<T> {
    let mut coeffs = [T::zero(); 4];
    coeffs[pauli_index(p)] = T::one();
    rank_one_chi(coeffs)
}

/// χ of the no-click branch: `P_M = a·I + b·Z` with `a, b = (1 ± √(1−p))/2`.
pub fn chi_analytic_pm<T: Real>(p: CollapseStrength<T>) -> ChiMatrix<T> {
    let half = T::lit(0.5);
    let s = p.transmission();
    let a = (T::one() + s) * half;
    let b = (T::one() - s) * half;
    rank_one_chi([a, T::zero(), T::zero(), b])
}

/// Reversal (process) fidelity `(Tr √(√χ_ideal χ_exp √χ_ideal))²` of unit-trace-normalized inputs.
pub fn process_fidelity<T: Real>(chi_exp: &ChiMatrix<T>, chi_ideal: &ChiMatrix<T>) -> Result<T> {
    let exp = chi_exp.normalized()?;
    let ideal = chi_ideal.normalized()?;
    fidelity_matrices(ideal.matrix(), exp.matrix())
}

/// Reconstructed process with the channel's success probability on each probe.
#[derive(Clone, Debug)]
pub struct ProcessEstimate<T> {
    pub chi: ChiMatrix<T>,
    pub probe_success: Vec<(KetLabel, T)>,
}

/// Process tomography of a single-qubit, possibly trace-decreasing channel.
///
/// Each probe in [`PROBES`] is sent through `channel`; the conditional
/// output is reconstructed (exactly when `shots == 0`, otherwise by
/// maximum likelihood on binomial counts) and weighted by the success
/// probability before χ is solved for.
pub fn qpt_single_qubit<T, F>(channel: F, shots: u64, seed: u64) -> Result<ProcessEstimate<T>>
where
    T: Real,
    F: Fn(&DensityMatrix<T>) -> Result<Outcome<DensityMatrix<T>, T>>,
{
    let settings = single_qubit_settings();
    let mut outputs = Vec::with_capacity(PROBES.len());
    let mut probe_success = Vec::with_capacity(PROBES.len());
    for (index, label) in PROBES.iter().enumerate() {
        let probe = ket::<T>(*label).density();
        let Some((posterior, probability)) = channel(&probe)?.into_parts() else {
            return Err(Error::DegenerateChannel(label.to_string()));
        };
        let estimate = if shots == 0 {
            posterior
        } else {
            let records = sample_counts(&posterior, &settings, shots, derive_seed(seed, index as u64))?;
            mle_state::<T>(&records, 2)?.state
        };
        outputs.push(estimate.matrix().scale(probability));
        probe_success.push((*label, probability));
    }
    let chi = chi_from_probe_outputs(&outputs)?;
    Ok(ProcessEstimate { chi, probe_success })
}

/// Solves for χ from channel outputs on `|H⟩, |V⟩, |D⟩, |R⟩` via the Choi matrix.
fn chi_from_probe_outputs<T: Real>(outputs: &[Matrix<T>]) -> Result<ChiMatrix<T>> {
    let [eh, ev, ed, er] = outputs else {
        return invalid("process tomography needs four probe outputs");
    };
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    let i = Complex::new(T::zero(), T::one());
    // |0⟩⟨1| + |1⟩⟨0| = 2|D⟩⟨D| − |H⟩⟨H| − |V⟩⟨V|, i(|0⟩⟨1| − |1⟩⟨0|) = 2|R⟩⟨R| − |H⟩⟨H| − |V⟩⟨V|
    let diag_sum = eh + ev;
    let sym = &ed.scale(two) - &diag_sum;
    let anti = &er.scale(two) - &diag_sum;
    let e01 = (&sym - &anti.scale_complex(i)).scale(half);
    let e10 = (&sym + &anti.scale_complex(i)).scale(half);
    let blocks = [[eh.clone(), e01], [e10, ev.clone()]];

    // Choi matrix C[(2i+k),(2j+l)] = ε(|i⟩⟨j|)ₖₗ
    let choi = Matrix::from_fn(4, |r, c| blocks[r / 2][c / 2][(r % 2, c % 2)]);
    // χₘₙ = vₘ† C vₙ / 4 with vₘ[2i+k] = (Eₘ)ₖᵢ
    let vectors: Vec<Vec<Complex<T>>> = Pauli::ALL
        .iter()
        .map(|p| {
            let m = p.matrix::<T>();
            (0..4).map(|idx| m[(idx % 2, idx / 2)]).collect()
        })
        .collect();
    let quarter = T::lit(0.25);
    let raw = Matrix::from_fn(4, |m, n| {
        let cv = choi.mul_vec(&vectors[n]);
        vectors[m]
            .iter()
            .zip(&cv)
            .map(|(a, b)| a.conj() * b)
            .fold(Complex::new(T::zero(), T::zero()), |x, y| x + y)
            * quarter
    });
    let eig = eigen_hermitian(&raw.hermitian_part())?;
    let psd = eig.reconstruct_with(|l| l.max(T::zero())).hermitian_part();
    // clipping raises the trace; restore the measured success probability
    let target = raw.trace().re;
    let clipped = psd.trace().re;
    if !(target > T::zero()) || !(clipped > T::zero()) {
        return Err(Error::DegenerateChannel("chi matrix has zero trace".into()));
    }
    ChiMatrix::new(psd.scale(target / clipped))
}
