//! State and process tomography from simulated photon counts.

mod process;
mod sampling;
mod state;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{invalid, Error, Result};
use crate::scalar::Real;
use crate::state::{ket, DensityMatrix, KetLabel};

pub use process::{
    chi_analytic_pm, chi_identity, chi_pauli, process_fidelity, qpt_single_qubit, ChiMatrix,
    ProcessEstimate, PROBES,
};
pub use sampling::{derive_seed, exact_data, parse_records, sample_counts, write_records};
pub use state::{
    linear_inversion, linear_inversion_state, mle_state, mle_state_from, project_to_physical,
    LinearInversion, MleEstimate, MAX_MLE_ITERATIONS,
};

/// One analyzer projector per qubit.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MeasurementSetting {
    labels: Vec<KetLabel>,
}

impl MeasurementSetting {
    pub fn new(labels: Vec<KetLabel>) -> Result<Self> {
        if labels.is_empty() || labels.len() > 2 {
            return invalid(format!("setting needs one or two labels, got {}", labels.len()));
        }
        Ok(Self { labels })
    }

    pub fn single(label: KetLabel) -> Self {
        Self {
            labels: vec![label],
        }
    }

    pub fn pair(a: KetLabel, b: KetLabel) -> Self {
        Self { labels: vec![a, b] }
    }

    pub fn labels(&self) -> &[KetLabel] {
        &self.labels
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn dim(&self) -> usize {
        1 << self.labels.len()
    }

    /// The product state `|l₁⟩ ⊗ |l₂⟩` whose projector this setting measures.
    pub fn projector_vector<T: Real>(&self) -> Vec<Complex<T>> {
        self.labels.iter().fold(vec![Complex::new(T::one(), T::zero())], |acc, &l| {
            let k = ket::<T>(l);
            acc.iter()
                .flat_map(|a| k.amplitudes().iter().map(move |b| a * b))
                .collect()
        })
    }
}

impl fmt::Display for MeasurementSetting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.labels {
            write!(f, "{l}")?;
        }
        Ok(())
    }
}

impl FromStr for MeasurementSetting {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let labels = s.chars().map(KetLabel::from_char).collect::<Result<Vec<_>>>()?;
        Self::new(labels)
    }
}

/// All six single-qubit analyzer settings.
pub fn single_qubit_settings() -> Vec<MeasurementSetting> {
    KetLabel::ALL.iter().map(|&l| MeasurementSetting::single(l)).collect()
}

/// Two-qubit setting families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SettingScheme {
    /// Every pair of the six labels.
    Full36,
    /// The minimal sixteen-setting subset.
    James16,
}

pub fn two_qubit_settings(scheme: SettingScheme) -> Vec<MeasurementSetting> {
    match scheme {
        SettingScheme::Full36 => KetLabel::ALL
            .iter()
            .flat_map(|&a| KetLabel::ALL.iter().map(move |&b| MeasurementSetting::pair(a, b)))
            .collect(),
        SettingScheme::James16 => [
            "HH", "HV", "VH", "VV", "DH", "DV", "RH", "RV", "DD", "DR", "RD", "RR", "HD", "VD",
            "HR", "VR",
        ]
        .iter()
        .map(|s| s.parse().expect("valid setting"))
        .collect(),
    }
}

/// Observed coincidences for one setting.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CountRecord {
    pub setting: MeasurementSetting,
    pub count: u64,
    pub shots: u64,
}

impl CountRecord {
    pub fn new(setting: MeasurementSetting, count: u64, shots: u64) -> Result<Self> {
        if shots == 0 || count > shots {
            return invalid(format!("count {count} with {shots} shots"));
        }
        Ok(Self {
            setting,
            count,
            shots,
        })
    }
}

/// Tomography input with a real-valued success weight, so that exact
/// probabilities and finite counts share one code path.
#[derive(Clone, Debug, PartialEq)]
pub struct TomographyDatum<T> {
    pub setting: MeasurementSetting,
    pub successes: T,
    pub trials: T,
}

impl<T: Real> TomographyDatum<T> {
    pub fn frequency(&self) -> T {
        self.successes / self.trials
    }
}

impl<T: Real> From<&CountRecord> for TomographyDatum<T> {
    fn from(r: &CountRecord) -> Self {
        Self {
            setting: r.setting.clone(),
            successes: T::lit(r.count as f64),
            trials: T::lit(r.shots as f64),
        }
    }
}

/// Born-rule probability `Tr[ρ Π]` of a setting's projector.
pub fn born_probability<T: Real>(rho: &DensityMatrix<T>, setting: &MeasurementSetting) -> Result<T> {
    if setting.dim() != rho.dim() {
        return invalid(format!(
            "setting {setting} does not match a {}-dimensional state",
            rho.dim()
        ));
    }
    let psi = setting.projector_vector::<T>();
    let m = rho.matrix();
    let mut acc = Complex::new(T::zero(), T::zero());
    for i in 0..psi.len() {
        for j in 0..psi.len() {
            acc = acc + psi[i].conj() * m[(i, j)] * psi[j];
        }
    }
    Ok(acc.re.max(T::zero()).min(T::one()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::bell_phi_plus;

    #[test]
    fn born_probabilities() {
        let bell = bell_phi_plus::<f64>().density();
        let hh = born_probability(&bell, &"HH".parse().unwrap()).unwrap();
        assert!((hh - 0.5).abs() < 1e-12);
        let hv = born_probability(&bell, &"HV".parse().unwrap()).unwrap();
        assert!(hv.abs() < 1e-12);
        let h = ket::<f64>(KetLabel::H).density();
        let d = born_probability(&h, &"D".parse().unwrap()).unwrap();
        assert!((d - 0.5).abs() < 1e-12);
        assert!(born_probability(&h, &"HH".parse().unwrap()).is_err());
    }

    #[test]
    fn setting_parsing() {
        let s: MeasurementSetting = "RL".parse().unwrap();
        assert_eq!(s.labels(), &[KetLabel::R, KetLabel::L]);
        assert_eq!(s.to_string(), "RL");
        assert!("".parse::<MeasurementSetting>().is_err());
        assert!("HVH".parse::<MeasurementSetting>().is_err());
        assert!("HX".parse::<MeasurementSetting>().is_err());
    }

    #[test]
    fn setting_families() {
        assert_eq!(two_qubit_settings(SettingScheme::Full36).len(), 36);
        let james = two_qubit_settings(SettingScheme::James16);
        assert_eq!(james.len(), 16);
        assert_eq!(single_qubit_settings().len(), 6);
    }

    #[test]
    fn count_record_validation() {
        let s = MeasurementSetting::single(KetLabel::H);
        assert!(CountRecord::new(s.clone(), 5, 4).is_err());
        assert!(CountRecord::new(s.clone(), 0, 0).is_err());
        assert!(CountRecord::new(s, 4, 4).is_ok());
    }
}
