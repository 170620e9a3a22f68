use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use super::{born_probability, CountRecord, MeasurementSetting, TomographyDatum};
use crate::error::{invalid, Result};
use crate::scalar::Real;
use crate::state::DensityMatrix;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent per-run seed from a base seed and a run index.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index))
}

/// Binomial photon counts for each setting, deterministic in `seed`.
pub fn sample_counts<T: Real>(
    rho: &DensityMatrix<T>,
    settings: &[MeasurementSetting],
    shots: u64,
    seed: u64,
) -> Result<Vec<CountRecord>> {
    if shots == 0 {
        return invalid("sampling needs at least one shot per setting");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    settings
        .iter()
        .map(|s| {
            let p = born_probability(rho, s)?.as_f64().clamp(0.0, 1.0);
            let dist = Binomial::new(shots, p)
                .map_err(|e| crate::error::Error::InvalidArgument(e.to_string()))?;
            CountRecord::new(s.clone(), dist.sample(&mut rng), shots)
        })
        .collect()
}

/// Infinite-statistics data: each datum carries the exact Born probability.
pub fn exact_data<T: Real>(
    rho: &DensityMatrix<T>,
    settings: &[MeasurementSetting],
) -> Result<Vec<TomographyDatum<T>>> {
    settings
        .iter()
        .map(|s| {
            Ok(TomographyDatum {
                setting: s.clone(),
                successes: born_probability(rho, s)?,
                trials: T::one(),
            })
        })
        .collect()
}

/// `setting<TAB>count<TAB>shots`, one record per line.
pub fn write_records(records: &[CountRecord]) -> String {
    records
        .iter()
        .map(|r| format!("{}\t{}\t{}\n", r.setting, r.count, r.shots))
        .collect()
}

pub fn parse_records(text: &str) -> Result<Vec<CountRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(n, line)| {
            let fields: Vec<&str> = line.split('\t').collect();
            let [setting, count, shots] = fields.as_slice() else {
                return invalid(format!("line {}: expected 3 tab-separated fields", n + 1));
            };
            let parse = |s: &str| {
                s.trim()
                    .parse::<u64>()
                    .or_else(|_| invalid(format!("line {}: bad integer '{s}'", n + 1)))
            };
            CountRecord::new(setting.trim().parse()?, parse(count)?, parse(shots)?)
        })
        .collect()
}
