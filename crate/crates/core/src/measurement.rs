//! Partial-collapse measurement and its probabilistic reversal.
//!
//! The no-click branch of the measurement is `P_M = diag(1, √(1−p))`. Its
//! inverse `diag(1, 1/√(1−p))` is not a contraction, so it is only ever
//! realized physically as `P_M′ = diag(√(1−p), 1)`, a partial measurement of
//! the same strength in the orthogonal basis; the factor `1/√(1−p)` enters
//! through renormalization of the conditional state.

use crate::error::{invalid, Error, Result};
use crate::linalg::Matrix;
use crate::state::{bell_phi_plus, DensityMatrix, KrausOperator, StateVector, Target};
use crate::scalar::Real;

/// Partial-collapse strength `p ∈ [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct CollapseStrength<T>(T);

impl<T: Real> CollapseStrength<T> {
    pub fn new(p: T) -> Result<Self> {
        if !p.is_finite() || p < T::zero() || p > T::one() {
            return invalid(format!("collapse strength {p} outside [0, 1]"));
        }
        Ok(Self(p))
    }

    pub fn value(self) -> T {
        self.0
    }

    /// `√(1−p)`, the amplitude kept on `|V⟩` by the no-click branch.
    pub fn transmission(self) -> T {
        (T::one() - self.0).sqrt()
    }

    pub fn is_reversible(self) -> bool {
        self.0 < T::one()
    }
}

/// Both outcomes of a partial-collapse measurement.
#[derive(Clone, Debug, PartialEq)]
pub struct PartialMeasurement<T> {
    pub no_click: KrausOperator<T>,
    pub click: KrausOperator<T>,
    pub strength: CollapseStrength<T>,
}

pub fn pm_operator<T: Real>(p: CollapseStrength<T>) -> PartialMeasurement<T> {
    PartialMeasurement {
        no_click: KrausOperator::diag(T::one(), p.transmission()).expect("contraction"),
        click: KrausOperator::diag(T::zero(), p.value().sqrt()).expect("contraction"),
        strength: p,
    }
}

/// Reversal of a partial measurement: the physical Kraus `P_M′` and the
/// renormalization that turns it into the exact inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct ReversalOp<T> {
    pub physical: KrausOperator<T>,
    pub renormalization: T,
    pub strength: CollapseStrength<T>,
}

impl<T: Real> ReversalOp<T> {
    /// `renormalization · physical`, the mathematical inverse of `P_M`.
    pub fn inverse_matrix(&self) -> Matrix<T> {
        self.physical.matrix().scale(self.renormalization)
    }
}

pub fn rm_operator<T: Real>(p: CollapseStrength<T>) -> Result<ReversalOp<T>> {
    if !p.is_reversible() {
        return Err(Error::SingularReversal);
    }
    let t = p.transmission();
    Ok(ReversalOp {
        physical: KrausOperator::diag(t, T::one())?,
        renormalization: T::one() / t,
        strength: p,
    })
}

/// Collapse strength produced by a half-wave plate at `theta_deg` degrees: `p = sin²θ`.
pub fn hwp_angle_to_strength<T: Real>(theta_deg: T) -> Result<CollapseStrength<T>> {
    if !theta_deg.is_finite() || theta_deg < T::zero() || theta_deg > T::lit(90.0) {
        return invalid(format!("wave-plate angle {theta_deg}° outside [0, 90]"));
    }
    let s = theta_deg.to_radians().sin();
    CollapseStrength::new((s * s).min(T::one()))
}

/// Result of applying one measurement branch.
#[derive(Clone, Debug, PartialEq)]
pub enum Outcome<S, T> {
    /// The branch fired; `posterior` is the normalized conditional state.
    Occurred { posterior: S, probability: T },
    /// The branch has probability zero and no conditional state exists.
    Null,
}

impl<S, T: Real> Outcome<S, T> {
    pub fn probability(&self) -> T {
        match self {
            Outcome::Occurred { probability, .. } => *probability,
            Outcome::Null => T::zero(),
        }
    }

    pub fn posterior(&self) -> Option<&S> {
        match self {
            Outcome::Occurred { posterior, .. } => Some(posterior),
            Outcome::Null => None,
        }
    }

    pub fn into_parts(self) -> Option<(S, T)> {
        match self {
            Outcome::Occurred {
                posterior,
                probability,
            } => Some((posterior, probability)),
            Outcome::Null => None,
        }
    }
}

/// States a single-qubit Kraus operator can act on.
pub trait Measurable<T: Real>: Sized {
    fn state_dim(&self) -> usize;
    fn is_normalized(&self) -> bool;
    /// Applies a full-space operator, returning the normalized posterior and its probability.
    fn branch(&self, op: &Matrix<T>) -> Result<Outcome<Self, T>>;
}

fn null_threshold<T: Real>() -> T {
    T::epsilon() * T::epsilon()
}

impl<T: Real> Measurable<T> for StateVector<T> {
    fn state_dim(&self) -> usize {
        self.dim()
    }

    fn is_normalized(&self) -> bool {
        StateVector::is_normalized(self)
    }

    fn branch(&self, op: &Matrix<T>) -> Result<Outcome<Self, T>> {
        let out = self.apply(op)?;
        let probability = out.norm_sqr();
        if probability <= null_threshold() {
            return Ok(Outcome::Null);
        }
        Ok(Outcome::Occurred {
            posterior: out.normalized()?,
            probability: probability.min(T::one()),
        })
    }
}

impl<T: Real> Measurable<T> for DensityMatrix<T> {
    fn state_dim(&self) -> usize {
        self.dim()
    }

    fn is_normalized(&self) -> bool {
        DensityMatrix::is_normalized(self)
    }

    fn branch(&self, op: &Matrix<T>) -> Result<Outcome<Self, T>> {
        let out = self.conjugate_by(op)?;
        let probability = out.trace();
        if probability <= null_threshold() {
            return Ok(Outcome::Null);
        }
        Ok(Outcome::Occurred {
            posterior: out.normalized()?,
            probability: probability.min(T::one()),
        })
    }
}

/// Applies a single-qubit Kraus operator to the targeted qubit of a normalized state.
pub fn apply_on_qubit<T: Real, S: Measurable<T>>(
    k: &KrausOperator<T>,
    target: Target,
    state: &S,
) -> Result<Outcome<S, T>> {
    if !state.is_normalized() {
        return invalid("measurement input must be a normalized state");
    }
    let lifted = target.lift(k.matrix(), state.state_dim())?;
    state.branch(&lifted)
}

/// `(P_M ⊗ I)|Φ⁺⟩` conditioned on no click: `(|HH⟩ + √(1−p)|VV⟩)/√(2−p)` with probability `(2−p)/2`.
pub fn evolve_pm_on_bell<T: Real>(p: CollapseStrength<T>) -> (StateVector<T>, T) {
    let pm = pm_operator(p);
    apply_on_qubit(&pm.no_click, Target::A, &bell_phi_plus())
        .expect("Bell state is normalized")
        .into_parts()
        .expect("no-click branch has probability at least 1/2")
}

/// Which qubit carries the reversal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReversalMode {
    /// Reverse on the measured qubit A.
    Local,
    /// Reverse on the partner qubit B.
    Nonlocal,
}

impl ReversalMode {
    pub fn target(self, state_dim: usize) -> Result<Target> {
        match (self, state_dim) {
            (ReversalMode::Local, 2) => Ok(Target::Single),
            (ReversalMode::Local, 4) => Ok(Target::A),
            (ReversalMode::Nonlocal, 4) => Ok(Target::B),
            (mode, d) => invalid(format!("{mode:?} reversal is undefined for dimension {d}")),
        }
    }
}

/// No-click `P_M` on the measured qubit (A, or the only qubit), then `P_M′`
/// on the qubit chosen by `mode`. The outcome probability is the joint
/// success probability of both branches.
pub fn reversal_sequence_on<T: Real, S: Measurable<T>>(
    state: &S,
    p: CollapseStrength<T>,
    mode: ReversalMode,
) -> Result<Outcome<S, T>> {
    let reversal = rm_operator(p)?;
    let measured = match state.state_dim() {
        2 => Target::Single,
        _ => Target::A,
    };
    let reversed_on = mode.target(state.state_dim())?;
    let pm = pm_operator(p);
    let Some((mid, p1)) = apply_on_qubit(&pm.no_click, measured, state)?.into_parts() else {
        return Ok(Outcome::Null);
    };
    let Some((last, p2)) = apply_on_qubit(&reversal.physical, reversed_on, &mid)?.into_parts() else {
        return Ok(Outcome::Null);
    };
    Ok(Outcome::Occurred {
        posterior: last,
        probability: p1 * p2,
    })
}

/// Measure-then-reverse on `|Φ⁺⟩`; returns the final state and the total success probability `1 − p`.
pub fn reversal_sequence<T: Real>(p: CollapseStrength<T>, mode: ReversalMode) -> Result<(StateVector<T>, T)> {
    reversal_sequence_on(&bell_phi_plus(), p, mode)?
        .into_parts()
        .ok_or_else(|| Error::InvalidArgument("reversal sequence has zero probability".into()))
}
