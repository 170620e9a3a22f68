#![allow(dead_code)]

use num_complex::Complex64;
use pcollapse_core::linalg::Matrix;
use pcollapse_core::state::{DensityMatrix, StateVector};
use proptest::prelude::*;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Random mixed state `GG†/Tr` with `G` of size `dim × rank`.
pub fn ginibre(dim: usize, rank: usize, raw: &[f64]) -> DensityMatrix<f64> {
    let g = Matrix::from_fn(dim, |i, j| {
        if j < rank {
            let k = 2 * (i * dim + j);
            c(raw[k], raw[k + 1])
        } else {
            c(0.0, 0.0)
        }
    });
    let m = &g * &g.adjoint();
    let tr = m.trace().re.max(1e-300);
    DensityMatrix::new(m.scale(1.0 / tr).hermitian_part()).unwrap()
}

pub fn random_state(dim: usize) -> impl Strategy<Value = DensityMatrix<f64>> {
    (1..=dim, prop::collection::vec(-1.0f64..1.0, 2 * dim * dim))
        .prop_filter("non-degenerate", |(_, raw)| raw.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(move |(rank, raw)| ginibre(dim, rank, &raw))
        .prop_filter("full weight", |rho| rho.trace() > 0.5)
}

pub fn random_ket(dim: usize) -> impl Strategy<Value = StateVector<f64>> {
    prop::collection::vec(-1.0f64..1.0, 2 * dim)
        .prop_filter("non-zero", |raw| raw.iter().map(|x| x * x).sum::<f64>() > 1e-3)
        .prop_map(|raw| {
            let amps = raw.chunks(2).map(|p| c(p[0], p[1])).collect();
            StateVector::new(amps).unwrap().normalized().unwrap()
        })
}

/// `e^{iα} Rz(β) Ry(γ) Rz(δ)`.
pub fn unitary_2x2(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Matrix<f64> {
    let rz = |t: f64| Matrix::diag_complex(&[Complex64::from_polar(1.0, -t / 2.0), Complex64::from_polar(1.0, t / 2.0)]);
    let (s, co) = (gamma / 2.0).sin_cos();
    let ry = Matrix::from_real_rows(&[&[co, -s], &[s, co]]);
    (&(&rz(beta) * &ry) * &rz(delta)).scale_complex(Complex64::from_polar(1.0, alpha))
}

pub fn random_unitary() -> impl Strategy<Value = Matrix<f64>> {
    let angle = -std::f64::consts::PI..std::f64::consts::PI;
    (angle.clone(), angle.clone(), angle.clone(), angle).prop_map(|(a, b, g, d)| unitary_2x2(a, b, g, d))
}

pub fn bell_density() -> DensityMatrix<f64> {
    pcollapse_core::state::bell_phi_plus::<f64>().density()
}

pub fn p_grid(step: f64, max: f64) -> Vec<f64> {
    let n = (max / step).round() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}
