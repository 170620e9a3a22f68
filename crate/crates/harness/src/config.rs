use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use pcollapse_core::noise::DEFAULT_SHOTS;
use pcollapse_core::{CollapseStrength, NoiseConfig, SettingScheme};
use serde_json::{json, Value};

use crate::error::{HarnessError, Result};
use crate::report::num;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scenario {
    Fig2,
    Fig3,
    Fig4,
    Chsh,
    All,
}

impl Scenario {
    /// Concrete scenarios in run order.
    pub const EACH: [Scenario; 4] = [Scenario::Fig2, Scenario::Fig3, Scenario::Fig4, Scenario::Chsh];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig2 => "fig2",
            Scenario::Fig3 => "fig3",
            Scenario::Fig4 => "fig4",
            Scenario::Chsh => "chsh",
            Scenario::All => "all",
        }
    }

    pub fn expand(self) -> Vec<Scenario> {
        match self {
            Scenario::All => Self::EACH.to_vec(),
            s => vec![s],
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig2" => Ok(Scenario::Fig2),
            "fig3" => Ok(Scenario::Fig3),
            "fig4" => Ok(Scenario::Fig4),
            "chsh" => Ok(Scenario::Chsh),
            "all" => Ok(Scenario::All),
            other => Err(HarnessError::Config(format!(
                "unknown scenario '{other}' (expected fig2, fig3, fig4, chsh or all)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Json => "json",
            OutputFormat::Csv => "csv",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(HarnessError::Config(format!("unknown format '{other}' (expected json or csv)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NoiseSpec {
    Ideal,
    /// Calibrated model; `source` is `defaults` or `file`.
    Model { config: NoiseConfig, source: &'static str },
}

impl NoiseSpec {
    pub fn defaults() -> Self {
        NoiseSpec::Model {
            config: NoiseConfig::calibrated(),
            source: "defaults",
        }
    }

    /// `ideal`, `defaults`, or a path to a `key = value` noise file.
    pub fn resolve(arg: &str) -> Result<Self> {
        match arg {
            "ideal" => Ok(NoiseSpec::Ideal),
            "defaults" => Ok(Self::defaults()),
            path => {
                let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
                let config = NoiseConfig::parse(&text)
                    .map_err(|e| HarnessError::Config(format!("noise file {path}: {e}")))?;
                Ok(NoiseSpec::Model { config, source: "file" })
            }
        }
    }

    pub fn is_ideal(&self) -> bool {
        match self {
            NoiseSpec::Ideal => true,
            NoiseSpec::Model { config, .. } => config.is_ideal(),
        }
    }

    /// Parameters fed to the noise model; all-ideal for `Ideal`.
    pub fn config(&self) -> NoiseConfig {
        match self {
            NoiseSpec::Ideal => NoiseConfig::ideal(),
            NoiseSpec::Model { config, .. } => *config,
        }
    }

    fn to_json(&self) -> Value {
        match self {
            NoiseSpec::Ideal => json!("ideal"),
            NoiseSpec::Model { config, source } => json!({
                "source": source,
                "initial_visibility": num(config.initial_visibility),
                "visibility_single": num(config.visibility_single),
                "visibility_double": num(config.visibility_double),
                "phase_error": num(config.phase_error),
            }),
        }
    }
}

pub const DEFAULT_SEED: u64 = 1;
pub const SEED_ENV: &str = "PCOLLAPSE_SEED";
pub const DEFAULT_SNAPSHOTS: [f64; 3] = [0.1, 0.5, 0.9];
pub const DEFAULT_CHSH_REPETITIONS: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub p_grid: Vec<f64>,
    /// Strengths at which fig4 emits full density matrices.
    pub snapshots: Vec<f64>,
    /// Shots per measurement setting; 0 selects exact probabilities.
    pub shots: u64,
    pub seed: u64,
    pub noise: NoiseSpec,
    pub settings: SettingScheme,
    pub output_dir: PathBuf,
    pub format: OutputFormat,
    pub strict: bool,
    pub chsh_repetitions: usize,
}

impl ScenarioConfig {
    pub fn new(scenario: Scenario) -> Self {
        Self {
            scenario,
            p_grid: default_p_grid(),
            snapshots: DEFAULT_SNAPSHOTS.to_vec(),
            shots: DEFAULT_SHOTS,
            seed: DEFAULT_SEED,
            noise: NoiseSpec::Ideal,
            settings: SettingScheme::Full36,
            output_dir: PathBuf::from("."),
            format: OutputFormat::Json,
            strict: false,
            chsh_repetitions: DEFAULT_CHSH_REPETITIONS,
        }
    }

    /// Exact-probability configuration without noise.
    pub fn ideal_exact(scenario: Scenario) -> Self {
        Self {
            shots: 0,
            noise: NoiseSpec::Ideal,
            ..Self::new(scenario)
        }
    }

    pub fn validate(&self) -> Result<()> {
        validate_grid(&self.p_grid)?;
        validate_grid(&self.snapshots)?;
        if self.chsh_repetitions < 2 {
            return Err(HarnessError::Config("at least two CHSH repetitions are needed".into()));
        }
        if let NoiseSpec::Model { config, .. } = &self.noise {
            config.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn is_exact(&self) -> bool {
        self.shots == 0
    }

    pub fn strengths(&self) -> Vec<CollapseStrength> {
        self.p_grid.iter().map(|&p| strength(p)).collect()
    }

    pub fn output_path(&self, scenario: Scenario, suffix: &str, ext: &str) -> PathBuf {
        self.output_dir.join(format!("{}{suffix}.{ext}", scenario.name()))
    }

    /// Echo written into every report; excludes the output location so that
    /// reports from different directories compare equal.
    pub fn to_json(&self) -> Value {
        json!({
            "p_grid": self.p_grid.iter().map(|&p| num(p)).collect::<Vec<_>>(),
            "snapshots": self.snapshots.iter().map(|&p| num(p)).collect::<Vec<_>>(),
            "shots": self.shots,
            "seed": self.seed,
            "noise": self.noise.to_json(),
            "settings": settings_count(self.settings),
            "chsh_repetitions": self.chsh_repetitions,
        })
    }
}

pub(crate) fn strength(p: f64) -> CollapseStrength {
    CollapseStrength::new(p).expect("grid values are validated")
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(HarnessError::Config("p grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|p| !(0.0..1.0).contains(*p)) {
        return Err(HarnessError::Config(format!("collapse strength {bad} outside [0, 1)")));
    }
    Ok(())
}

pub fn default_p_grid() -> Vec<f64> {
    (0..10).map(|i| i as f64 / 10.0).collect()
}

pub fn settings_count(scheme: SettingScheme) -> u32 {
    match scheme {
        SettingScheme::Full36 => 36,
        SettingScheme::James16 => 16,
    }
}

pub fn parse_settings(s: &str) -> Result<SettingScheme> {
    match s {
        "36" => Ok(SettingScheme::Full36),
        "16" => Ok(SettingScheme::James16),
        other => Err(HarnessError::Config(format!("--settings must be 16 or 36, got '{other}'"))),
    }
}

fn parse_real(s: &str) -> Result<f64> {
    let v: f64 = s
        .trim()
        .parse()
        .map_err(|_| HarnessError::Config(format!("bad number '{s}'")))?;
    if !v.is_finite() {
        return Err(HarnessError::Config(format!("bad number '{s}'")));
    }
    Ok(v)
}

/// `a:b:step`, inclusive of `b` up to rounding.
pub fn parse_p_grid(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, step] = parts.as_slice() else {
        return Err(HarnessError::Config(format!("--p-grid expects a:b:step, got '{s}'")));
    };
    let (a, b, step) = (parse_real(a)?, parse_real(b)?, parse_real(step)?);
    if step <= 0.0 || b < a {
        return Err(HarnessError::Config(format!("--p-grid '{s}' is empty or has a non-positive step")));
    }
    let n = ((b - a) / step + 1e-9).floor() as usize;
    if n > 100_000 {
        return Err(HarnessError::Config(format!("--p-grid '{s}' has too many points")));
    }
    // round to 12 decimals so 0.1 steps land on the usual decimal values
    let grid: Vec<f64> = (0..=n)
        .map(|i| ((a + i as f64 * step) * 1e12).round() / 1e12)
        .collect();
    validate_grid(&grid)?;
    Ok(grid)
}

pub fn parse_p_list(s: &str) -> Result<Vec<f64>> {
    let grid = s.split(',').map(parse_real).collect::<Result<Vec<_>>>()?;
    validate_grid(&grid)?;
    Ok(grid)
}

/// Seed from `PCOLLAPSE_SEED` when set, otherwise the built-in default.
pub fn default_seed(env: Option<&str>) -> Result<u64> {
    match env {
        None => Ok(DEFAULT_SEED),
        Some(s) => s
            .trim()
            .parse()
            .map_err(|_| HarnessError::Config(format!("{SEED_ENV}='{s}' is not an unsigned integer"))),
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_p_grid("0:0.9:0.1").unwrap(), default_p_grid());
        assert_eq!(parse_p_grid("0.5:0.5:0.1").unwrap(), vec![0.5]);
        assert_eq!(parse_p_list("0.1, 0.5,0.9").unwrap(), vec![0.1, 0.5, 0.9]);
        assert!(parse_p_grid("0:1:0.1").is_err());
        assert!(parse_p_grid("0:0.5").is_err());
        assert!(parse_p_grid("0.5:0.1:0.1").is_err());
        assert!(parse_p_grid("0:0.5:0").is_err());
        assert!(parse_p_list("").is_err());
        assert!(parse_p_list("0.2,nan").is_err());
        assert!(parse_p_list("-0.1").is_err());
    }

    #[test]
    fn seed_from_environment() {
        assert_eq!(default_seed(None).unwrap(), 1);
        assert_eq!(default_seed(Some("42")).unwrap(), 42);
        assert!(default_seed(Some("x")).is_err());
    }

    #[test]
    fn noise_resolution() {
        assert_eq!(NoiseSpec::resolve("ideal").unwrap(), NoiseSpec::Ideal);
        assert!(!NoiseSpec::resolve("defaults").unwrap().is_ideal());
        let err = NoiseSpec::resolve("/nonexistent/noise.txt").unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }

    #[test]
    fn config_echo_omits_output_dir() {
        let mut a = ScenarioConfig::new(Scenario::Fig2);
        let mut b = a.clone();
        a.output_dir = "x".into();
        b.output_dir = "y".into();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.to_json()["settings"], 36);
    }

    #[test]
    fn scenario_names() {
        for s in Scenario::EACH {
            assert_eq!(s.name().parse::<Scenario>().unwrap(), s);
        }
        assert_eq!(Scenario::All.expand(), Scenario::EACH.to_vec());
        assert!("fig5".parse::<Scenario>().is_err());
    }
}
