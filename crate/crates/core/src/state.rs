//! Polarization states and operators on one or two qubits.
//!
//! Basis order is fixed everywhere: `|H⟩, |V⟩` for one qubit and
//! `|HH⟩, |HV⟩, |VH⟩, |VV⟩` for two, with qubit A the left tensor factor.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::linalg::{eigen_hermitian, Matrix, PSD_FLOOR};
use crate::scalar::Real;

fn cplx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

/// Labels of the six polarization states used for preparation and analysis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum KetLabel {
    H,
    V,
    D,
    A,
    R,
    L,
}

impl KetLabel {
    pub const ALL: [KetLabel; 6] = [
        KetLabel::H,
        KetLabel::V,
        KetLabel::D,
        KetLabel::A,
        KetLabel::R,
        KetLabel::L,
    ];

    pub fn from_char(c: char) -> Result<Self> {
        match c {
            'H' => Ok(KetLabel::H),
            'V' => Ok(KetLabel::V),
            'D' => Ok(KetLabel::D),
            'A' => Ok(KetLabel::A),
            'R' => Ok(KetLabel::R),
            'L' => Ok(KetLabel::L),
            other => invalid(format!("unknown polarization label '{other}'")),
        }
    }

    pub fn as_char(self) -> char {
        match self {
            KetLabel::H => 'H',
            KetLabel::V => 'V',
            KetLabel::D => 'D',
            KetLabel::A => 'A',
            KetLabel::R => 'R',
            KetLabel::L => 'L',
        }
    }
}

impl FromStr for KetLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut chars = s.chars();
        match (chars.next(), chars.next()) {
            (Some(c), None) => KetLabel::from_char(c),
            _ => invalid(format!("unknown polarization label '{s}'")),
        }
    }
}

impl fmt::Display for KetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// One of the two qubits of a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Qubit {
    A,
    B,
}

/// Where a single-qubit operator acts.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    /// The state is itself a single qubit.
    Single,
    Qubit(Qubit),
}

impl Target {
    pub const A: Target = Target::Qubit(Qubit::A);
    pub const B: Target = Target::Qubit(Qubit::B);

    /// Embeds a 2×2 operator into the state space this target addresses.
    pub fn lift<T: Real>(self, op: &Matrix<T>, state_dim: usize) -> Result<Matrix<T>> {
        if op.dim() != 2 {
            return invalid("single-qubit operator must be 2x2");
        }
        match (self, state_dim) {
            (Target::Single, 2) => Ok(op.clone()),
            (Target::Qubit(Qubit::A), 4) => Ok(op.kron(&Matrix::identity(2))),
            (Target::Qubit(Qubit::B), 4) => Ok(Matrix::identity(2).kron(op)),
            (t, d) => invalid(format!("target {t:?} does not address a {d}-dimensional state")),
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 4 {
        Ok(())
    } else {
        invalid(format!("dimension {dim} is neither one nor two qubits"))
    }
}

/// Pure, possibly sub-normalized state of one or two qubits.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T> {
    amplitudes: Vec<Complex<T>>,
    norm: T,
}

impl<T: Real> StateVector<T> {
    pub fn new(amplitudes: Vec<Complex<T>>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        if amplitudes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return invalid("state has non-finite amplitudes");
        }
        let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        Ok(Self { amplitudes, norm })
    }

    pub fn from_real(amplitudes: &[f64]) -> Result<Self> {
        Self::new(amplitudes.iter().map(|&a| cplx(T::lit(a), T::zero())).collect())
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn num_qubits(&self) -> usize {
        if self.dim() == 2 {
            1
        } else {
            2
        }
    }

    pub fn norm(&self) -> T {
        self.norm
    }

    pub fn norm_sqr(&self) -> T {
        self.norm * self.norm
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm - T::one()).abs() <= T::tol(1e-12)
    }

    /// Rescales to unit norm; fails on the zero vector.
    pub fn normalized(&self) -> Result<Self> {
        if self.norm <= T::min_positive_value() {
            return invalid("cannot normalize the zero vector");
        }
        let inv = T::one() / self.norm;
        Self::new(self.amplitudes.iter().map(|z| z * inv).collect())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Complex<T> {
        assert_eq!(self.dim(), other.dim(), "inner product dimension mismatch");
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .fold(cplx(T::zero(), T::zero()), |x, y| x + y)
    }

    /// `|ψ⟩⟨ψ|`, trace equal to the squared norm.
    pub fn density(&self) -> DensityMatrix<T> {
        DensityMatrix {
            matrix: Matrix::outer(&self.amplitudes, &self.amplitudes),
        }
    }

    pub fn apply(&self, op: &Matrix<T>) -> Result<Self> {
        if op.dim() != self.dim() {
            return invalid("operator and state dimensions differ");
        }
        Self::new(op.mul_vec(&self.amplitudes))
    }
}

/// Free-function spelling of [`StateVector::density`].
pub fn density_from_pure<T: Real>(psi: &StateVector<T>) -> DensityMatrix<T> {
    psi.density()
}

/// Hermitian PSD operator with trace at most one (one for normalized states).
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix<T> {
    matrix: Matrix<T>,
}

/// Hermiticity tolerance for accepted density matrices.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Trace tolerance for accepted density matrices.
pub const TRACE_TOL: f64 = 1e-10;

impl<T: Real> DensityMatrix<T> {
    /// Validates Hermiticity, positivity and `0 < Tr ≤ 1`.
    pub fn new(matrix: Matrix<T>) -> Result<Self> {
        check_dim(matrix.dim())?;
        let rho = Self { matrix };
        rho.check_physical()?;
        Ok(rho)
    }

    /// Skips validation; callers guarantee the invariants by construction.
    pub(crate) fn from_matrix_unchecked(matrix: Matrix<T>) -> Self {
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self {
            matrix: Matrix::identity(dim).scale(T::one() / T::lit(dim as f64)),
        })
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> Matrix<T> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn num_qubits(&self) -> usize {
        if self.dim() == 2 {
            1
        } else {
            2
        }
    }

    pub fn trace(&self) -> T {
        self.matrix.trace().re
    }

    pub fn is_normalized(&self) -> bool {
        (self.trace() - T::one()).abs() <= T::tol(TRACE_TOL)
    }

    /// Unit-trace copy; fails for a zero-trace operator.
    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if tr <= T::min_positive_value() {
            return invalid("cannot normalize a zero-trace density matrix");
        }
        Ok(Self {
            matrix: self.matrix.scale(T::one() / tr),
        })
    }

    /// Checks the physicality invariants, reporting the first violation.
    pub fn check_physical(&self) -> Result<()> {
        let m = &self.matrix;
        if !m.is_finite() {
            return invalid("density matrix has non-finite entries");
        }
        let dev = m.hermitian_deviation();
        if dev > T::tol(HERMITIAN_TOL) {
            return invalid(format!("density matrix not Hermitian (deviation {:e})", dev.as_f64()));
        }
        let tr = m.trace();
        if tr.re > T::one() + T::tol(TRACE_TOL) || tr.re < -T::tol(TRACE_TOL) {
            return invalid(format!("density matrix trace {} outside [0, 1]", tr.re));
        }
        let eig = eigen_hermitian(m)?;
        if eig.min_value() < -T::tol(PSD_FLOOR) {
            return Err(Error::NotPsd {
                min_eigenvalue: eig.min_value().as_f64(),
            });
        }
        Ok(())
    }

    /// `K ρ K†` for an operator of matching dimension (no renormalization).
    pub fn conjugate_by(&self, op: &Matrix<T>) -> Result<Self> {
        if op.dim() != self.dim() {
            return invalid("operator and density matrix dimensions differ");
        }
        let out = &(op * &self.matrix) * &op.adjoint();
        Ok(Self {
            matrix: out.hermitian_part(),
        })
    }

    /// Expectation value `Tr[ρ O]` (real part).
    pub fn expectation(&self, observable: &Matrix<T>) -> T {
        self.matrix.trace_product(observable).re
    }

    /// Bloch vector `(⟨X⟩, ⟨Y⟩, ⟨Z⟩)` of a single-qubit state, normalized by the trace.
    pub fn bloch_vector(&self) -> Result<[T; 3]> {
        if self.dim() != 2 {
            return invalid("Bloch vector needs a single-qubit state");
        }
        let tr = self.trace();
        if tr <= T::min_positive_value() {
            return invalid("zero-trace state has no Bloch vector");
        }
        Ok([Pauli::X, Pauli::Y, Pauli::Z].map(|p| self.expectation(&p.matrix()) / tr))
    }

    /// Weighted mixture `Σ wᵢ ρᵢ`; weights must be non-negative.
    pub fn mix(parts: &[(T, &DensityMatrix<T>)]) -> Result<Self> {
        let dim = parts.first().map(|(_, r)| r.dim()).unwrap_or(0);
        check_dim(dim)?;
        let mut acc = Matrix::zeros(dim);
        for (w, rho) in parts {
            if *w < T::zero() || rho.dim() != dim {
                return invalid("mixture needs non-negative weights and equal dimensions");
            }
            acc = &acc + &rho.matrix.scale(*w);
        }
        Self::new(acc)
    }
}

/// Pauli operators in the order used for χ matrices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix<T: Real>(self) -> Matrix<T> {
        let (o, z) = (T::one(), T::zero());
        let e = |re: T, im: T| cplx(re, im);
        let entries = match self {
            Pauli::I => vec![e(o, z), e(z, z), e(z, z), e(o, z)],
            Pauli::X => vec![e(z, z), e(o, z), e(o, z), e(z, z)],
            Pauli::Y => vec![e(z, z), e(z, -o), e(z, o), e(z, z)],
            Pauli::Z => vec![e(o, z), e(z, z), e(z, z), e(-o, z)],
        };
        Matrix::from_vec(entries).expect("2x2")
    }

    pub fn operator<T: Real>(self) -> Operator<T> {
        Operator {
            matrix: self.matrix(),
            kind: OperatorKind::Unitary,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OperatorKind {
    Unitary,
    Kraus,
    Observable,
    General,
}

/// Operator on one or two qubits tagged with the property it is known to satisfy.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator<T> {
    matrix: Matrix<T>,
    kind: OperatorKind,
}

impl<T: Real> Operator<T> {
    pub fn new(matrix: Matrix<T>, kind: OperatorKind) -> Result<Self> {
        check_dim(matrix.dim())?;
        if !matrix.is_finite() {
            return invalid("operator has non-finite entries");
        }
        match kind {
            OperatorKind::Unitary => {
                let err = (&matrix.adjoint() * &matrix).max_abs_diff(&Matrix::identity(matrix.dim()));
                if err > T::tol(1e-10) {
                    return invalid(format!("operator is not unitary (error {:e})", err.as_f64()));
                }
            }
            OperatorKind::Kraus => check_contraction(&matrix)?,
            OperatorKind::Observable => {
                if matrix.hermitian_deviation() > T::tol(1e-10) {
                    return invalid("observable is not Hermitian");
                }
            }
            OperatorKind::General => {}
        }
        Ok(Self { matrix, kind })
    }

    pub fn matrix(&self) -> &Matrix<T> {
        &self.matrix
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// Largest singular value of `m`.
pub fn operator_norm<T: Real>(m: &Matrix<T>) -> Result<T> {
    let gram = &m.adjoint() * m;
    let eig = eigen_hermitian(&gram.hermitian_part())?;
    Ok(eig.values[0].max(T::zero()).sqrt())
}

fn check_contraction<T: Real>(m: &Matrix<T>) -> Result<()> {
    let sigma = operator_norm(m)?;
    if sigma > T::one() + T::tol(1e-10) {
        return invalid(format!("operator is not a contraction (norm {})", sigma));
    }
    Ok(())
}

/// Single-qubit contraction representing one measurement outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausOperator<T>(Operator<T>);

impl<T: Real> KrausOperator<T> {
    pub fn new(matrix: Matrix<T>) -> Result<Self> {
        if matrix.dim() != 2 {
            return invalid("Kraus operators act on a single qubit");
        }
        Ok(Self(Operator::new(matrix, OperatorKind::Kraus)?))
    }

    pub fn diag(h: T, v: T) -> Result<Self> {
        Self::new(Matrix::diag(&[h, v]))
    }

    pub fn matrix(&self) -> &Matrix<T> {
        self.0.matrix()
    }

    pub fn as_operator(&self) -> &Operator<T> {
        &self.0
    }
}

/// Normalized single-qubit polarization state.
pub fn ket<T: Real>(label: KetLabel) -> StateVector<T> {
    let (o, z) = (T::one(), T::zero());
    let h = T::FRAC_1_SQRT_2();
    let amps = match label {
        KetLabel::H => [cplx(o, z), cplx(z, z)],
        KetLabel::V => [cplx(z, z), cplx(o, z)],
        KetLabel::D => [cplx(h, z), cplx(h, z)],
        KetLabel::A => [cplx(h, z), cplx(-h, z)],
        KetLabel::R => [cplx(h, z), cplx(z, -h)],
        KetLabel::L => [cplx(h, z), cplx(z, h)],
    };
    StateVector::new(amps.to_vec()).expect("valid ket")
}

/// `(|HH⟩ + |VV⟩)/√2`.
pub fn bell_phi_plus<T: Real>() -> StateVector<T> {
    let h = T::FRAC_1_SQRT_2();
    let z = T::zero();
    StateVector::new(vec![cplx(h, z), cplx(z, z), cplx(z, z), cplx(h, z)]).expect("valid Bell state")
}

/// Kronecker product of two single-qubit objects.
pub trait Tensor: Sized {
    fn tensor(&self, other: &Self) -> Result<Self>;
}

/// `a ⊗ b` in the `|HH⟩,|HV⟩,|VH⟩,|VV⟩` order.
pub fn tensor<K: Tensor>(a: &K, b: &K) -> Result<K> {
    a.tensor(b)
}

impl<T: Real> Tensor for StateVector<T> {
    fn tensor(&self, other: &Self) -> Result<Self> {
        if self.dim() != 2 || other.dim() != 2 {
            return invalid("tensor product needs two single-qubit states");
        }
        let amps = self
            .amplitudes
            .iter()
            .flat_map(|a| other.amplitudes.iter().map(move |b| a * b))
            .collect();
        Self::new(amps)
    }
}

impl<T: Real> Tensor for Operator<T> {
    fn tensor(&self, other: &Self) -> Result<Self> {
        if self.dim() != 2 || other.dim() != 2 {
            return invalid("tensor product needs two single-qubit operators");
        }
        let kind = if self.kind == other.kind {
            self.kind
        } else {
            OperatorKind::General
        };
        Ok(Self {
            matrix: self.matrix.kron(&other.matrix),
            kind,
        })
    }
}

impl<T: Real> Tensor for DensityMatrix<T> {
    fn tensor(&self, other: &Self) -> Result<Self> {
        if self.dim() != 2 || other.dim() != 2 {
            return invalid("tensor product needs two single-qubit states");
        }
        Ok(Self {
            matrix: self.matrix.kron(&other.matrix),
        })
    }
}

/// Reduced state of the kept qubit of a two-qubit density matrix.
pub fn partial_trace<T: Real>(rho: &DensityMatrix<T>, keep: Qubit) -> Result<DensityMatrix<T>> {
    if rho.dim() != 4 {
        return invalid("partial trace needs a two-qubit state");
    }
    let m = rho.matrix();
    let reduced = Matrix::from_fn(2, |i, j| match keep {
        Qubit::A => m[(2 * i, 2 * j)] + m[(2 * i + 1, 2 * j + 1)],
        Qubit::B => m[(i, j)] + m[(2 + i, 2 + j)],
    });
    Ok(DensityMatrix { matrix: reduced })
}
