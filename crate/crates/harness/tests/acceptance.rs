//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the lines are always printed. Hard
//! criteria exit non-zero on failure. Criterion 8 compares a noise model
//! against experimental numbers and is soft: band misses are printed as FAIL
//! but only fail the process when `PCOLLAPSE_STRICT=1`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use pcollapse_core::linalg::eigen_hermitian;
use pcollapse_core::measurement::{
    evolve_pm_on_bell, pm_operator, reversal_sequence, reversal_sequence_on,
};
use pcollapse_core::metrics::{chsh_optimize, concurrence, horodecki_smax, state_fidelity};
use pcollapse_core::noise::{dephase, noisy_protocol, phase_perturb, werner};
use pcollapse_core::state::{bell_phi_plus, partial_trace};
use pcollapse_core::tomography::{
    chi_analytic_pm, chi_identity, derive_seed, mle_state, process_fidelity, qpt_single_qubit, sample_counts,
    single_qubit_settings, two_qubit_settings,
};
use pcollapse_core::{CollapseStrength, DensityMatrix, Matrix, NoiseConfig, ProtocolMode, Qubit, ReversalMode, SettingScheme, Target};
use pcollapse_harness::{run_chsh, run_fig3, run_fig4, NoiseSpec, Scenario, ScenarioConfig, SoftCheck};
use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EQ3_TOL: f64 = 1e-10;
const REVERSAL_FIDELITY_TOL: f64 = 1e-10;
const REVERSAL_PROBABILITY_TOL: f64 = 1e-12;
const EQUIVALENCE_TOL: f64 = 1e-12;
const CHI_ZERO_TOL: f64 = 1e-15;
const CHI_LIMIT_TOL: f64 = 1e-5;
const CHI_LIMIT_P: f64 = 1.0 - 1e-12;
const QPT_EXACT_TOL: f64 = 1e-6;
const PROCESS_SELF_TOL: f64 = 1e-12;
const REVERSAL_PROCESS_TOL: f64 = 1e-6;
const TSIRELSON_TOL: f64 = 1e-6;
const HORODECKI_BELOW_TOL: f64 = 1e-4;
const HORODECKI_ABOVE_TOL: f64 = 1e-6;
const HORODECKI_FAMILY: usize = 20;
const TOMO_SHOTS: u64 = 10_000;
const TOMO_SEEDS: u64 = 50;
const TOMO_MIN_GOOD: usize = 48;
const TOMO_FIDELITY: f64 = 0.99;
const TOMO_SHOT_LADDER: [u64; 4] = [100, 1_000, 10_000, 100_000];
const LOCAL_BAND: (f64, f64) = (0.87, 0.97);
const NONLOCAL_BAND: (f64, f64) = (0.85, 0.95);
const PROCESS_FIDELITY_FLOOR: f64 = 0.90;
const CHSH_CLASSICAL: f64 = 2.0;
const PROPERTY_CASES: u32 = 128;
const LU_TOL: f64 = 1e-9;
const FIDELITY_SYMMETRY_TOL: f64 = 1e-9;
const FIDELITY_RANGE_TOL: f64 = 1e-10;
const POVM_TOL: f64 = 1e-12;
const PHYSICAL_TOL: f64 = 1e-10;
const EXACT_BUDGET: Duration = Duration::from_secs(1);
const STATISTICAL_BUDGET: Duration = Duration::from_secs(60);

struct Verdict {
    passed: bool,
    detail: String,
}

impl Verdict {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

fn strength(p: f64) -> CollapseStrength {
    CollapseStrength::new(p).unwrap()
}

fn grid(step: f64, max: f64) -> Vec<f64> {
    let n = (max / step).round() as usize;
    (0..=n).map(|i| i as f64 * step).collect()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn bell() -> DensityMatrix {
    bell_phi_plus::<f64>().density()
}

// ---------------------------------------------------------------- criteria 1-6

fn criterion_1() -> Verdict {
    let mut worst = 0.0f64;
    for p in grid(0.05, 0.95) {
        let (psi, _) = evolve_pm_on_bell(strength(p));
        let oracle = 2.0 * (1.0 - p).sqrt() / (2.0 - p);
        worst = worst.max((concurrence(&psi.density()).unwrap() - oracle).abs());
    }
    Verdict::new(worst <= EQ3_TOL, format!("max |C - 2sqrt(1-p)/(2-p)| = {worst:.2e} over 20 points"))
}

fn criterion_2() -> Verdict {
    let mut worst_f = 1.0f64;
    let mut worst_p = 0.0f64;
    for p in [0.1, 0.5, 0.9] {
        for mode in [ReversalMode::Local, ReversalMode::Nonlocal] {
            let (psi, prob) = reversal_sequence(strength(p), mode).unwrap();
            worst_f = worst_f.min(state_fidelity(&psi.density(), &bell()).unwrap());
            worst_p = worst_p.max((prob - (1.0 - p)).abs());
        }
    }
    Verdict::new(
        worst_f >= 1.0 - REVERSAL_FIDELITY_TOL && worst_p <= REVERSAL_PROBABILITY_TOL,
        format!("min F(Bell) = 1 - {:.1e}, max |P - (1-p)| = {worst_p:.1e}", 1.0 - worst_f),
    )
}

fn criterion_3() -> Verdict {
    let mut worst_f = 1.0f64;
    let mut worst_p = 0.0f64;
    for p in grid(0.05, 0.95) {
        let (local, pl) = reversal_sequence(strength(p), ReversalMode::Local).unwrap();
        let (nonlocal, pn) = reversal_sequence(strength(p), ReversalMode::Nonlocal).unwrap();
        worst_f = worst_f.min(state_fidelity(&local.density(), &nonlocal.density()).unwrap());
        worst_p = worst_p.max((pl - pn).abs());
    }
    Verdict::new(
        worst_f >= 1.0 - EQUIVALENCE_TOL && worst_p <= EQUIVALENCE_TOL,
        format!("min F(local, nonlocal) = 1 - {:.1e}, max |dP| = {worst_p:.1e}", 1.0 - worst_f),
    )
}

/// No-click χ computed by hand: `P_M = a·I + b·Z`, `a, b = (1 ± √(1−p))/2`.
fn chi_oracle(p: f64) -> Matrix {
    let a = (1.0 + (1.0 - p).sqrt()) / 2.0;
    let b = (1.0 - (1.0 - p).sqrt()) / 2.0;
    let v = [a, 0.0, 0.0, b];
    Matrix::from_fn(4, |i, j| c(v[i] * v[j], 0.0))
}

fn criterion_4() -> Verdict {
    let mut e_i = Matrix::zeros(4);
    e_i[(0, 0)] = c(1.0, 0.0);
    let zero_dev = chi_analytic_pm(strength(0.0)).matrix().max_abs_diff(&e_i);
    let limit = chi_analytic_pm(strength(CHI_LIMIT_P));
    let block_dev = [(0, 0), (0, 3), (3, 0), (3, 3)]
        .iter()
        .map(|&(i, j)| (limit.matrix()[(i, j)] - c(0.25, 0.0)).norm())
        .fold(0.0, f64::max);
    let mut qpt_dev = 0.0f64;
    for p in grid(0.1, 0.9) {
        let k = pm_operator(strength(p)).no_click;
        let est = qpt_single_qubit(
            |rho| pcollapse_core::measurement::apply_on_qubit(&k, Target::Single, rho),
            0,
            0,
        )
        .unwrap();
        qpt_dev = qpt_dev.max(est.chi.matrix().max_abs_diff(&chi_oracle(p)));
        qpt_dev = qpt_dev.max(chi_analytic_pm(strength(p)).matrix().max_abs_diff(&chi_oracle(p)));
    }
    Verdict::new(
        zero_dev <= CHI_ZERO_TOL && block_dev <= CHI_LIMIT_TOL && qpt_dev <= QPT_EXACT_TOL,
        format!("chi(0) dev {zero_dev:.1e}, I/Z block dev at p->1 {block_dev:.1e}, QPT vs analytic {qpt_dev:.1e}"),
    )
}

fn criterion_5() -> Verdict {
    let self_f = process_fidelity(&chi_identity::<f64>(), &chi_identity()).unwrap();
    let mut worst = 1.0f64;
    for p in grid(0.05, 0.9) {
        let est = qpt_single_qubit(|rho| reversal_sequence_on(rho, strength(p), ReversalMode::Local), 0, 0).unwrap();
        worst = worst.min(process_fidelity(&est.chi, &chi_identity()).unwrap());
    }
    // the harness fig3 report in exact ideal mode must agree
    let report = run_fig3(&ScenarioConfig::ideal_exact(Scenario::Fig3)).unwrap();
    for r in report.records.iter().filter(|r| r["channel"] == "reversal") {
        worst = worst.min(r["process_fidelity"].as_f64().unwrap());
    }
    Verdict::new(
        (self_f - 1.0).abs() <= PROCESS_SELF_TOL && worst >= 1.0 - REVERSAL_PROCESS_TOL,
        format!("F(chi_I, chi_I) = 1 - {:.1e}, min reversal F = 1 - {:.1e}", 1.0 - self_f, 1.0 - worst),
    )
}

/// `(I + Σ tᵢ σᵢ⊗σᵢ)/4` rotated about Y on each side, keeping the optimal plane at Z–X.
fn zx_plane_state(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let t = loop {
        let t: [f64; 3] = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let ok = [
            1.0 - t[0] - t[1] - t[2],
            1.0 - t[0] + t[1] + t[2],
            1.0 + t[0] - t[1] + t[2],
            1.0 + t[0] + t[1] - t[2],
        ]
        .iter()
        .all(|w| *w >= 0.0);
        if ok && t[1].abs() <= t[0].abs().min(t[2].abs()) {
            break t;
        }
    };
    let x = Matrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
    let y = Matrix::from_fn(2, |i, j| match (i, j) {
        (0, 1) => c(0.0, -1.0),
        (1, 0) => c(0.0, 1.0),
        _ => c(0.0, 0.0),
    });
    let z = Matrix::diag(&[1.0, -1.0]);
    let m = &(&(&Matrix::identity(4) + &x.kron(&x).scale(t[0])) + &y.kron(&y).scale(t[1])) + &z.kron(&z).scale(t[2]);
    let ry = |a: f64| {
        let (s, co) = (a / 2.0).sin_cos();
        Matrix::from_real_rows(&[&[co, -s], &[s, co]])
    };
    let (a, b) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
    DensityMatrix::new(m.scale(0.25)).unwrap().conjugate_by(&ry(a).kron(&ry(b))).unwrap()
}

fn criterion_6() -> Verdict {
    let report = run_chsh(&ScenarioConfig::ideal_exact(Scenario::Chsh)).unwrap();
    let s = report.records[0]["s"].as_f64().unwrap();
    let tsirelson = 2.0 * 2f64.sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst_below = 0.0f64;
    let mut worst_above = 0.0f64;
    for _ in 0..HORODECKI_FAMILY {
        let rho = zx_plane_state(&mut rng);
        let (opt, _) = chsh_optimize(&rho).unwrap();
        let bound = horodecki_smax(&rho).unwrap();
        worst_below = worst_below.max(bound - opt);
        worst_above = worst_above.max(opt - bound);
    }
    Verdict::new(
        (s - tsirelson).abs() <= TSIRELSON_TOL && worst_below <= HORODECKI_BELOW_TOL && worst_above <= HORODECKI_ABOVE_TOL,
        format!(
            "S(recovered, p=0.5) = {s:.8}, optimizer vs Horodecki on {HORODECKI_FAMILY} Z-X states: below {worst_below:.1e}, above {worst_above:.1e}"
        ),
    )
}

// ---------------------------------------------------------------- criteria 7-9

fn bell_fidelities(shots: u64) -> Vec<f64> {
    let settings = two_qubit_settings(SettingScheme::Full36);
    (0..TOMO_SEEDS)
        .map(|i| {
            let records = sample_counts(&bell(), &settings, shots, derive_seed(shots, i)).unwrap();
            state_fidelity(&mle_state::<f64>(&records, 4).unwrap().state, &bell()).unwrap()
        })
        .collect()
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len();
    (xs[(n - 1) / 2] + xs[n / 2]) / 2.0
}

fn criterion_7() -> Verdict {
    let good = bell_fidelities(TOMO_SHOTS).into_iter().filter(|f| *f >= TOMO_FIDELITY).count();
    let medians: Vec<f64> = TOMO_SHOT_LADDER.iter().map(|&n| median(bell_fidelities(n))).collect();
    let monotone = medians.windows(2).all(|w| w[1] >= w[0]);
    Verdict::new(
        good >= TOMO_MIN_GOOD && monotone,
        format!(
            "{good}/{TOMO_SEEDS} seeds with F >= {TOMO_FIDELITY} at 1e4 shots; medians {}",
            medians.iter().map(|m| format!("{m:.5}")).collect::<Vec<_>>().join(" <= ")
        ),
    )
}

fn band_line(check: &SoftCheck) {
    println!(
        "    band {:<34} {:.4} in [{}, {}] {}  ({})",
        check.name,
        check.value,
        check.low,
        check.high,
        if check.passed() { "PASS" } else { "FAIL" },
        check.reference
    );
}

fn criterion_8() -> Verdict {
    let cfg = ScenarioConfig { noise: NoiseSpec::defaults(), ..ScenarioConfig::new(Scenario::All) };
    let calibrated = NoiseConfig::calibrated();
    assert!((calibrated.initial_visibility - (2.0 * 0.95 + 1.0) / 3.0).abs() < 1e-12);
    assert_eq!((calibrated.visibility_single, calibrated.visibility_double), (0.96, 0.91));
    let fig3 = run_fig3(&ScenarioConfig { scenario: Scenario::Fig3, ..cfg.clone() }).unwrap();
    let fig4 = run_fig4(&ScenarioConfig { scenario: Scenario::Fig4, ..cfg.clone() }).unwrap();
    let chsh = run_chsh(&ScenarioConfig { scenario: Scenario::Chsh, ..cfg.clone() }).unwrap();
    let find = |checks: &[SoftCheck], name: &str| checks.iter().find(|c| c.name == name).cloned().unwrap();
    let local = find(&fig4.soft_checks, "local_concurrence_worst");
    let nonlocal = find(&fig4.soft_checks, "nonlocal_concurrence_worst");
    let process = find(&fig3.soft_checks, "reversal_process_fidelity_worst");
    let bell_test = find(&chsh.soft_checks, "noisy_chsh_above_2");
    assert_eq!((local.low, local.high), LOCAL_BAND);
    assert_eq!((nonlocal.low, nonlocal.high), NONLOCAL_BAND);
    assert_eq!(process.low, PROCESS_FIDELITY_FLOOR);
    assert_eq!(bell_test.low, CHSH_CLASSICAL);
    let bands = [local, nonlocal, process, bell_test];
    for b in &bands {
        band_line(b);
    }

    // the same quantities in the noise model without sampling
    let worst_model = |mode: ProtocolMode| {
        grid(0.1, 0.9)
            .into_iter()
            .map(|p| concurrence(&noisy_protocol(strength(p), mode, &calibrated).unwrap().state).unwrap())
            .fold(f64::INFINITY, f64::min)
    };
    println!(
        "    model (exact) worst concurrence: local {:.4}, nonlocal {:.4}",
        worst_model(ProtocolMode::Local),
        worst_model(ProtocolMode::Nonlocal)
    );

    let misses: Vec<&str> = bands.iter().filter(|b| !b.passed()).map(|b| b.name.as_str()).collect();

    // misses only change the exit code under --strict
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let lenient = run_binary(&["run", "fig4", "--seed", "1", "--noise", "defaults", "--out", out]).status.code();
    let strict = run_binary(&["run", "fig4", "--seed", "1", "--noise", "defaults", "--out", out, "--strict"]).status.code();
    let expected_strict = if fig4.soft_failures() > 0 { 4 } else { 0 };
    println!("    exit codes: default {lenient:?}, --strict {strict:?}");
    assert_eq!(lenient, Some(0));
    assert_eq!(strict, Some(expected_strict));

    Verdict::new(
        misses.is_empty(),
        if misses.is_empty() {
            "all bands in range".to_string()
        } else {
            format!("{}/{} bands in range; outside: {}", bands.len() - misses.len(), bands.len(), misses.join(", "))
        },
    )
}

fn read_dir_sorted(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let path = e.unwrap().path();
            (path.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&path).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn run_binary(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_pcollapse"))
        .args(args)
        .env_remove("PCOLLAPSE_SEED")
        .output()
        .unwrap()
}

fn criterion_9() -> Verdict {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let out_a = run_binary(&["run", "all", "--seed", "7", "--out", a.path().to_str().unwrap()]);
    let out_b = run_binary(&["run", "all", "--seed", "7", "--out", b.path().to_str().unwrap()]);
    let files_a = read_dir_sorted(a.path());
    let files_b = read_dir_sorted(b.path());
    let identical = out_a.status.success() && out_b.status.success() && files_a == files_b;
    let names: Vec<&str> = files_a.iter().map(|(n, _)| n.as_str()).collect();
    let bytes: usize = files_a.iter().map(|(_, d)| d.len()).sum();
    Verdict::new(
        identical && files_a.len() == 4,
        format!("{} files ({}), {bytes} bytes, byte-identical: {identical}", files_a.len(), names.join(", ")),
    )
}

// ---------------------------------------------------------------- criterion 10

fn ginibre(dim: usize, rank: usize, raw: &[f64]) -> DensityMatrix {
    let g = Matrix::from_fn(dim, |i, j| {
        if j < rank {
            c(raw[2 * (i * dim + j)], raw[2 * (i * dim + j) + 1])
        } else {
            c(0.0, 0.0)
        }
    });
    let m = &g * &g.adjoint();
    DensityMatrix::new(m.scale(1.0 / m.trace().re).hermitian_part()).unwrap()
}

fn state_strategy(dim: usize) -> impl Strategy<Value = DensityMatrix> {
    (1..=dim, prop::collection::vec(-1.0f64..1.0, 2 * dim * dim))
        .prop_filter("non-degenerate", |(_, raw)| raw.iter().map(|x| x * x).sum::<f64>() > 1e-2)
        .prop_map(move |(rank, raw)| ginibre(dim, rank, &raw))
}

fn unitary(alpha: f64, beta: f64, gamma: f64) -> Matrix {
    let rz = |t: f64| Matrix::diag_complex(&[Complex64::from_polar(1.0, -t / 2.0), Complex64::from_polar(1.0, t / 2.0)]);
    let (s, co) = (gamma / 2.0).sin_cos();
    &(&rz(alpha) * &Matrix::from_real_rows(&[&[co, -s], &[s, co]])) * &rz(beta)
}

fn unitary_strategy() -> impl Strategy<Value = Matrix> {
    let a = -std::f64::consts::PI..std::f64::consts::PI;
    (a.clone(), a.clone(), a).prop_map(|(x, y, z)| unitary(x, y, z))
}

fn physical(rho: &DensityMatrix) -> std::result::Result<(), TestCaseError> {
    prop_assert!((rho.trace() - 1.0).abs() <= PHYSICAL_TOL);
    prop_assert!(rho.matrix().hermitian_deviation() <= PHYSICAL_TOL);
    prop_assert!(eigen_hermitian(rho.matrix()).unwrap().min_value() >= -PHYSICAL_TOL);
    Ok(())
}

fn property<S: Strategy>(
    name: &str,
    strategy: S,
    test: impl Fn(S::Value) -> std::result::Result<(), TestCaseError>,
) -> bool {
    let mut runner = TestRunner::new(PropConfig {
        cases: PROPERTY_CASES,
        failure_persistence: None,
        ..PropConfig::default()
    });
    let result = runner.run(&strategy, test);
    let ok = result.is_ok();
    println!(
        "    property {name:<40} {} ({PROPERTY_CASES} cases){}",
        if ok { "PASS" } else { "FAIL" },
        result.err().map(|e| format!(": {e}")).unwrap_or_default()
    );
    ok
}

fn criterion_10() -> Verdict {
    let results = [
        property("POVM completeness", 0.0f64..=1.0, |p| {
            let pm = pm_operator(strength(p));
            let (n, k) = (pm.no_click.matrix(), pm.click.matrix());
            let sum = &(&n.adjoint() * n) + &(&k.adjoint() * k);
            prop_assert!(sum.max_abs_diff(&Matrix::identity(2)) <= POVM_TOL);
            Ok(())
        }),
        property(
            "physicality after every operation",
            (state_strategy(4), 0.0f64..0.99, 0.0f64..=1.0, -0.5f64..0.5),
            |(rho, p, v, delta)| {
                let pm = pm_operator(strength(p));
                for target in [Target::A, Target::B] {
                    let post = pcollapse_core::measurement::apply_on_qubit(&pm.no_click, target, &rho).unwrap();
                    physical(post.posterior().unwrap())?;
                    physical(&dephase(&rho, target, v).unwrap())?;
                }
                let k = phase_perturb(&pm.no_click, delta).unwrap();
                let post = pcollapse_core::measurement::apply_on_qubit(&k, Target::A, &rho).unwrap();
                physical(post.posterior().unwrap())?;
                for mode in [ReversalMode::Local, ReversalMode::Nonlocal] {
                    if let Some(post) = reversal_sequence_on(&rho, strength(p), mode).unwrap().posterior() {
                        physical(post)?;
                    }
                }
                physical(&partial_trace(&rho, Qubit::A).unwrap())?;
                physical(&werner(v).unwrap())?;
                let cfg = NoiseConfig { phase_error: delta, ..NoiseConfig::calibrated() };
                for mode in ProtocolMode::ALL {
                    physical(&noisy_protocol(strength(p), mode, &cfg).unwrap().state)?;
                }
                Ok(())
            },
        ),
        property(
            "concurrence local-unitary invariance",
            (state_strategy(4), unitary_strategy(), unitary_strategy()),
            |(rho, u, w)| {
                let rotated = rho.conjugate_by(&u.kron(&w)).unwrap();
                let (a, b) = (concurrence(&rho).unwrap(), concurrence(&rotated).unwrap());
                prop_assert!((a - b).abs() <= LU_TOL, "{} vs {}", a, b);
                Ok(())
            },
        ),
        property(
            "fidelity symmetry and range",
            (state_strategy(4), state_strategy(4)),
            |(a, b)| {
                let (ab, ba) = (state_fidelity(&a, &b).unwrap(), state_fidelity(&b, &a).unwrap());
                prop_assert!((ab - ba).abs() <= FIDELITY_SYMMETRY_TOL, "{} vs {}", ab, ba);
                prop_assert!((0.0..=1.0 + FIDELITY_RANGE_TOL).contains(&ab));
                Ok(())
            },
        ),
        property(
            "MLE log-likelihood monotone",
            (state_strategy(4), 10u64..5_000, any::<u64>(), any::<bool>()),
            |(rho, shots, seed, two_qubit)| {
                let (records, dim) = if two_qubit {
                    (sample_counts(&rho, &two_qubit_settings(SettingScheme::Full36), shots, seed).unwrap(), 4)
                } else {
                    let marginal = partial_trace(&rho, Qubit::A).unwrap();
                    (sample_counts(&marginal, &single_qubit_settings(), shots, seed).unwrap(), 2)
                };
                let est = mle_state::<f64>(&records, dim).unwrap();
                physical(&est.state)?;
                for pair in est.history.windows(2) {
                    prop_assert!(pair[1] >= pair[0] - 1e-12 * pair[0].abs().max(1.0), "{} -> {}", pair[0], pair[1]);
                }
                Ok(())
            },
        ),
    ];
    let passed = results.iter().filter(|r| **r).count();
    Verdict::new(passed == results.len(), format!("{passed}/{} property suites", results.len()))
}

// ---------------------------------------------------------------- driver

struct Criterion {
    id: u32,
    title: &'static str,
    run: fn() -> Verdict,
    budget: Duration,
    soft: bool,
}

fn main() {
    let criteria = [
        Criterion { id: 1, title: "post-measurement concurrence", run: criterion_1, budget: EXACT_BUDGET, soft: false },
        Criterion { id: 2, title: "reversal returns the Bell state", run: criterion_2, budget: EXACT_BUDGET, soft: false },
        Criterion { id: 3, title: "local/nonlocal equivalence", run: criterion_3, budget: EXACT_BUDGET, soft: false },
        Criterion { id: 4, title: "chi limits and exact QPT", run: criterion_4, budget: EXACT_BUDGET, soft: false },
        Criterion { id: 5, title: "process fidelity of reversal", run: criterion_5, budget: EXACT_BUDGET, soft: false },
        Criterion { id: 6, title: "CHSH and Horodecki", run: criterion_6, budget: EXACT_BUDGET, soft: false },
        Criterion { id: 7, title: "tomography consistency", run: criterion_7, budget: STATISTICAL_BUDGET, soft: false },
        Criterion { id: 8, title: "noise-calibrated bands (soft)", run: criterion_8, budget: STATISTICAL_BUDGET, soft: true },
        Criterion { id: 9, title: "determinism of run all", run: criterion_9, budget: STATISTICAL_BUDGET, soft: false },
        Criterion { id: 10, title: "property suites", run: criterion_10, budget: STATISTICAL_BUDGET, soft: false },
    ];
    let strict = std::env::var("PCOLLAPSE_STRICT").is_ok_and(|v| v == "1");
    let mut hard_failures = 0;
    for criterion in &criteria {
        let start = Instant::now();
        let verdict = catch_unwind(AssertUnwindSafe(criterion.run))
            .unwrap_or_else(|_| Verdict::new(false, "panicked"));
        let elapsed = start.elapsed();
        let in_time = elapsed <= criterion.budget;
        let passed = verdict.passed && in_time;
        println!(
            "criterion {:>2} {} {}: {} [{:.3} s / {} s budget]{}",
            criterion.id,
            if passed { "PASS" } else { "FAIL" },
            criterion.title,
            verdict.detail,
            elapsed.as_secs_f64(),
            criterion.budget.as_secs(),
            if !passed && criterion.soft && !strict { " (soft, not counted)" } else { "" }
        );
        if !passed && (!criterion.soft || strict) {
            hard_failures += 1;
        }
    }
    if hard_failures > 0 {
        eprintln!("{hard_failures} criterion/criteria failed");
        std::process::exit(1);
    }
}
