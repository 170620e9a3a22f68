//! Imperfection models: impure initial state, interferometer visibility and
//! wave-plate phase error.

use std::fmt::Write as _;

use num_complex::Complex;

use crate::error::{invalid, Result};
use crate::linalg::Matrix;
use crate::measurement::{apply_on_qubit, pm_operator, rm_operator, CollapseStrength, Outcome};
use crate::scalar::Real;
use crate::state::{bell_phi_plus, DensityMatrix, KrausOperator, Pauli, Target};

/// Parameters of the calibrated noise model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseConfig<T> {
    /// Werner weight of the prepared Bell state.
    pub initial_visibility: T,
    /// Fringe visibility of one interferometer.
    pub visibility_single: T,
    /// End-to-end visibility when two interferometers are in the path.
    pub visibility_double: T,
    /// Residual wave-plate phase, radians.
    pub phase_error: T,
    pub shots: u64,
}

pub const DEFAULT_SHOTS: u64 = 10_000;

impl<T: Real> NoiseConfig<T> {
    pub fn ideal() -> Self {
        Self {
            initial_visibility: T::one(),
            visibility_single: T::one(),
            visibility_double: T::one(),
            phase_error: T::zero(),
            shots: DEFAULT_SHOTS,
        }
    }

    /// Initial concurrence 0.95, visibilities 0.96 and 0.91, no phase error.
    pub fn calibrated() -> Self {
        Self {
            initial_visibility: calibrate_initial_visibility(T::lit(0.95)).expect("in range"),
            visibility_single: T::lit(0.96),
            visibility_double: T::lit(0.91),
            phase_error: T::zero(),
            shots: DEFAULT_SHOTS,
        }
    }

    pub fn is_ideal(&self) -> bool {
        self.initial_visibility == T::one()
            && self.visibility_single == T::one()
            && self.visibility_double == T::one()
            && self.phase_error == T::zero()
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("initial_visibility", self.initial_visibility),
            ("visibility_single", self.visibility_single),
            ("visibility_double", self.visibility_double),
        ] {
            if !(v >= T::zero() && v <= T::one()) {
                return invalid(format!("{name} = {v} outside [0, 1]"));
            }
        }
        if !self.phase_error.is_finite() {
            return invalid("phase_error must be finite");
        }
        if self.shots == 0 {
            return invalid("shots must be positive");
        }
        Ok(())
    }

    /// Extra coherence factor applied by the second interferometer.
    pub fn second_interferometer_visibility(&self) -> T {
        if self.visibility_single <= T::zero() {
            return T::zero();
        }
        (self.visibility_double / self.visibility_single)
            .max(T::zero())
            .min(T::one())
    }

    /// Flat `key = value` document.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "initial_visibility = {}", self.initial_visibility);
        let _ = writeln!(out, "visibility_single = {}", self.visibility_single);
        let _ = writeln!(out, "visibility_double = {}", self.visibility_double);
        let _ = writeln!(out, "phase_error = {}", self.phase_error);
        let _ = writeln!(out, "shots = {}", self.shots);
        out
    }

    /// Parses a `key = value` document; missing keys keep their ideal values.
    /// Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::ideal();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return invalid(format!("line {}: expected 'key = value'", n + 1));
            };
            let (key, value) = (key.trim(), value.trim());
            let real = || {
                value
                    .parse::<f64>()
                    .map(T::lit)
                    .or_else(|_| invalid(format!("line {}: bad number '{value}'", n + 1)))
            };
            match key {
                "initial_visibility" => cfg.initial_visibility = real()?,
                "visibility_single" => cfg.visibility_single = real()?,
                "visibility_double" => cfg.visibility_double = real()?,
                "phase_error" => cfg.phase_error = real()?,
                "shots" => {
                    cfg.shots = value
                        .parse()
                        .or_else(|_| invalid(format!("line {}: bad integer '{value}'", n + 1)))?
                }
                other => return invalid(format!("line {}: unknown key '{other}'", n + 1)),
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

/// `v|Φ⁺⟩⟨Φ⁺| + (1−v) I/4`.
pub fn werner<T: Real>(v: T) -> Result<DensityMatrix<T>> {
    if !(v >= T::zero() && v <= T::one()) {
        return invalid(format!("Werner weight {v} outside [0, 1]"));
    }
    let bell = bell_phi_plus::<T>().density();
    let m = &bell.matrix().scale(v) + &Matrix::identity(4).scale((T::one() - v) / T::lit(4.0));
    DensityMatrix::new(m)
}

/// Werner weight with the requested concurrence: `v = (2C + 1)/3`.
pub fn calibrate_initial_visibility<T: Real>(target_concurrence: T) -> Result<T> {
    if !(target_concurrence >= T::zero() && target_concurrence <= T::one()) {
        return invalid(format!("target concurrence {target_concurrence} outside [0, 1]"));
    }
    Ok((T::lit(2.0) * target_concurrence + T::one()) / T::lit(3.0))
}

/// Scales the H/V coherences of the targeted qubit by `v`:
/// `ρ → (1+v)/2 ρ + (1−v)/2 ZρZ`.
pub fn dephase<T: Real>(rho: &DensityMatrix<T>, target: Target, v: T) -> Result<DensityMatrix<T>> {
    if !(v >= T::zero() && v <= T::one()) {
        return invalid(format!("visibility {v} outside [0, 1]"));
    }
    let z = target.lift(&Pauli::Z.matrix(), rho.dim())?;
    let half = T::lit(0.5);
    let flipped = rho.conjugate_by(&z)?;
    let m = &rho.matrix().scale((T::one() + v) * half) + &flipped.matrix().scale((T::one() - v) * half);
    Ok(DensityMatrix::from_matrix_unchecked(m.hermitian_part()))
}

/// `diag(1, e^{iδ}) · K`.
pub fn phase_perturb<T: Real>(op: &KrausOperator<T>, delta: T) -> Result<KrausOperator<T>> {
    let (s, c) = delta.sin_cos();
    let phase = Matrix::diag_complex(&[Complex::new(T::one(), T::zero()), Complex::new(c, s)]);
    KrausOperator::new(&phase * op.matrix())
}

/// Which part of the protocol is run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ProtocolMode {
    PmOnly,
    Local,
    Nonlocal,
}

impl ProtocolMode {
    pub const ALL: [ProtocolMode; 3] = [ProtocolMode::PmOnly, ProtocolMode::Local, ProtocolMode::Nonlocal];

    pub fn name(self) -> &'static str {
        match self {
            ProtocolMode::PmOnly => "pm_only",
            ProtocolMode::Local => "local",
            ProtocolMode::Nonlocal => "nonlocal",
        }
    }
}

/// Normalized conditional state with the joint success probability of all branches.
#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolOutput<T> {
    pub state: DensityMatrix<T>,
    pub probability: T,
}

fn require<T: Real>(outcome: Outcome<DensityMatrix<T>, T>) -> Result<(DensityMatrix<T>, T)> {
    outcome
        .into_parts()
        .ok_or_else(|| crate::error::Error::InvalidArgument("protocol branch has zero probability".into()))
}

/// Werner-mixed Bell state → visibility loss on A → phase-perturbed `P_M` on
/// A → optional `P_M′` on A (local) or B (nonlocal, with the second
/// interferometer's extra visibility loss on B).
pub fn noisy_protocol<T: Real>(
    p: CollapseStrength<T>,
    mode: ProtocolMode,
    cfg: &NoiseConfig<T>,
) -> Result<ProtocolOutput<T>> {
    cfg.validate()?;
    let initial = werner(cfg.initial_visibility)?;
    let rho = dephase(&initial, Target::A, cfg.visibility_single)?;
    let pm = phase_perturb(&pm_operator(p).no_click, cfg.phase_error)?;
    let (mut state, mut probability) = require(apply_on_qubit(&pm, Target::A, &rho)?)?;
    match mode {
        ProtocolMode::PmOnly => {}
        ProtocolMode::Local => {
            let rm = rm_operator(p)?;
            let (s, q) = require(apply_on_qubit(&rm.physical, Target::A, &state)?)?;
            state = s;
            probability = probability * q;
        }
        ProtocolMode::Nonlocal => {
            let rm = rm_operator(p)?;
            let (s, q) = require(apply_on_qubit(&rm.physical, Target::B, &state)?)?;
            state = dephase(&s, Target::B, cfg.second_interferometer_visibility())?;
            probability = probability * q;
        }
    }
    Ok(ProtocolOutput { state, probability })
}

/// Single-photon version of the protocol used for state-evolution and
/// process tomography: visibility loss, phase-perturbed `P_M`, then `P_M′`
/// in the same interferometer when `reverse` is set.
pub fn noisy_single_qubit<T: Real>(
    probe: &DensityMatrix<T>,
    p: CollapseStrength<T>,
    reverse: bool,
    cfg: &NoiseConfig<T>,
) -> Result<Outcome<DensityMatrix<T>, T>> {
    let rho = dephase(probe, Target::Single, cfg.visibility_single)?;
    let pm = phase_perturb(&pm_operator(p).no_click, cfg.phase_error)?;
    let first = apply_on_qubit(&pm, Target::Single, &rho)?;
    if !reverse {
        return Ok(first);
    }
    let Some((mid, p1)) = first.into_parts() else {
        return Ok(Outcome::Null);
    };
    let rm = rm_operator(p)?;
    Ok(match apply_on_qubit(&rm.physical, Target::Single, &mid)?.into_parts() {
        Some((posterior, p2)) => Outcome::Occurred {
            posterior,
            probability: p1 * p2,
        },
        None => Outcome::Null,
    })
}
