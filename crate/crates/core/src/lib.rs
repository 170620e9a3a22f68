//! Simulation of partial-collapse polarization measurements and their
//! local and nonlocal reversal on one- and two-qubit states.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`). The crate root
//! re-exports double-precision aliases of the main types; the generic
//! versions live in their modules.

pub mod error;
pub mod linalg;
pub mod measurement;
pub mod metrics;
pub mod noise;
pub mod scalar;
pub mod state;
pub mod tomography;

pub use error::{Error, Result};
pub use scalar::Real;

pub use measurement::{ReversalMode, Outcome};
pub use noise::ProtocolMode;
pub use state::{KetLabel, OperatorKind, Pauli, Qubit, Target};
pub use tomography::{CountRecord, MeasurementSetting, SettingScheme};

pub type Matrix = linalg::Matrix<f64>;
pub type StateVector = state::StateVector<f64>;
pub type DensityMatrix = state::DensityMatrix<f64>;
pub type Operator = state::Operator<f64>;
pub type KrausOperator = state::KrausOperator<f64>;
pub type CollapseStrength = measurement::CollapseStrength<f64>;
pub type PartialMeasurement = measurement::PartialMeasurement<f64>;
pub type ReversalOp = measurement::ReversalOp<f64>;
pub type AnalyzerAngles = metrics::AnalyzerAngles<f64>;
pub type CorrelationMatrix = metrics::CorrelationMatrix<f64>;
pub type ChiMatrix = tomography::ChiMatrix<f64>;
pub type NoiseConfig = noise::NoiseConfig<f64>;

pub type StateVector32 = state::StateVector<f32>;
pub type DensityMatrix32 = state::DensityMatrix<f32>;
pub type CollapseStrength32 = measurement::CollapseStrength<f32>;
