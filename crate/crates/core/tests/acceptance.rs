//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

use std::f64::consts::{PI, TAU};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use ris_squint::channel::{
    build_frequency_grid, gen_channels, sample_path_set, spatial_angle, GainMode, PathSet, Scenario,
};
use ris_squint::experiments::{paired_trials, ScenarioConfig, Scheme, SweepVariable};
use ris_squint::phase_design::{design_central, design_ideal, design_mccm, design_random};
use ris_squint::rate_eval::{
    effective_channel, ideal_rate, rate_upper_bound, subcarrier_rate, sum_rate, z_factor, LinkBudget,
};

struct Outcome {
    passed: bool,
    detail: String,
}

impl Outcome {
    fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self {
            passed,
            detail: detail.into(),
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn instance_rng(base: u64, i: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base);
    rng.set_stream(i as u64);
    rng
}

fn los_unit(rng: &mut ChaCha8Rng) -> PathSet {
    sample_path_set(rng, Scenario::Los, 1, GainMode::Unit).unwrap()
}

/// Mean and standard error of paired differences `a - b`.
fn paired(a: &[f64], b: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn column(trials: &[Vec<f64>], i: usize) -> Vec<f64> {
    trials.iter().map(|r| r[i]).collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

// 1. |z_k| = M and the closed-form rate for the per-subcarrier optimum.
fn alignment_exactness() -> Outcome {
    let start = Instant::now();
    let (n, m, k) = (64usize, 64usize, 128usize);
    let grid = build_frequency_grid(28e9, 2e9, k).unwrap();
    let budget = LinkBudget::from_snr_db(10.0);
    let closed = (1.0 + budget.snr_linear() * n as f64 * (m * m) as f64).log2();
    let (z_err, rate_err) = (0..1000)
        .into_par_iter()
        .map(|i| {
            let paths = los_unit(&mut instance_rng(101, i));
            let ch = gen_channels(&paths, &grid, n, m).unwrap();
            let mut z_err: f64 = 0.0;
            let mut rate_err: f64 = 0.0;
            for kk in 0..k {
                let p = design_ideal(&paths, &grid, m, kk).unwrap();
                let z = z_factor(&paths, &p, &grid, kk).unwrap();
                z_err = z_err.max((z.norm() - m as f64).abs());
                let g = effective_channel(&ch.ris_user()[kk], &p, &ch.bs_ris()[kk]).unwrap();
                rate_err = rate_err.max(rel(subcarrier_rate(&g, &budget), closed));
            }
            (z_err, rate_err)
        })
        .reduce(|| (0.0, 0.0), |a, b| (a.0.max(b.0), a.1.max(b.1)));
    let elapsed = start.elapsed();
    Outcome::new(
        z_err < 1e-9 && rate_err < 1e-9 && elapsed < Duration::from_secs(10),
        format!("max ||z|-M| = {z_err:.2e}, max rate rel err = {rate_err:.2e}, {elapsed:.2?}"),
    )
}

// 2. R_sum <= R_ub on random unit-gain LoS instances and random profiles.
fn jensen_bound() -> Outcome {
    let (n, m, k) = (64usize, 64usize, 128usize);
    let grid = build_frequency_grid(28e9, 2e9, k).unwrap();
    let results: Vec<(f64, f64)> = (0..1000)
        .into_par_iter()
        .map(|i| {
            let mut rng = instance_rng(202, i);
            let paths = los_unit(&mut rng);
            let snr_db = rng.random_range(-10.0..20.0);
            let budget = LinkBudget::from_snr_db(snr_db);
            let ch = gen_channels(&paths, &grid, n, m).unwrap();
            let p = design_random(&mut rng, m);
            let r = sum_rate(&ch, &p, &budget).unwrap().sum_rate_bits;
            let ub = rate_upper_bound(&paths, &p, &grid, n, &budget).unwrap();
            (r, ub)
        })
        .collect();
    let violations = results.iter().filter(|(r, ub)| *r > ub + 1e-12).count();
    let min_slack = results.iter().map(|(r, ub)| ub - r).fold(f64::INFINITY, f64::min);
    Outcome::new(
        violations == 0,
        format!("{violations} violations over 1000 instances, min slack {min_slack:.3e}"),
    )
}

// 3. Single subcarrier / zero bandwidth: central = ideal; MCCM = ideal.
fn degenerate_collapse() -> Outcome {
    let (n, m) = (64usize, 64usize);
    let budget = LinkBudget::from_snr_db(10.0);
    let single = build_frequency_grid(28e9, 2e9, 1).unwrap();
    let flat = build_frequency_grid(28e9, 0.0, 128).unwrap();
    let mut central_err: f64 = 0.0;
    let mut flat_err: f64 = 0.0;
    let mut mccm_err: f64 = 0.0;
    for i in 0..100 {
        let paths = los_unit(&mut instance_rng(303, i));
        let ch = gen_channels(&paths, &single, n, m).unwrap();
        let ideal = ideal_rate(&ch, &budget).unwrap().sum_rate_bits;
        let central = sum_rate(&ch, &design_central(&paths, m).unwrap(), &budget).unwrap();
        central_err = central_err.max(rel(central.sum_rate_bits, ideal));
        let mccm = design_mccm(&ch, &budget).unwrap().profile;
        let mccm_rate = sum_rate(&ch, &mccm, &budget).unwrap().sum_rate_bits;
        let ideal_k0 = sum_rate(&ch, &design_ideal(&paths, &single, m, 0).unwrap(), &budget)
            .unwrap()
            .sum_rate_bits;
        mccm_err = mccm_err.max(rel(mccm_rate, ideal_k0));

        if i < 20 {
            let ch = gen_channels(&paths, &flat, n, m).unwrap();
            let ideal = ideal_rate(&ch, &budget).unwrap().sum_rate_bits;
            let central = sum_rate(&ch, &design_central(&paths, m).unwrap(), &budget).unwrap();
            flat_err = flat_err.max(rel(central.sum_rate_bits, ideal));
        }
    }
    Outcome::new(
        central_err < 1e-9 && flat_err < 1e-9 && mccm_err < 1e-6,
        format!(
            "K=1 central rel {central_err:.2e}, B=0 central rel {flat_err:.2e}, K=1 mccm rel {mccm_err:.2e}"
        ),
    )
}

/// Array factor computed straight from the path angles at the carrier.
fn direct_array_factor(aoa: f64, ru: f64, phases: &[f64]) -> f64 {
    let step = 0.5 * aoa.sin() - 0.5 * ru.sin();
    let (mut re, mut im) = (0.0, 0.0);
    for (m, p) in phases.iter().enumerate() {
        let arg = TAU * m as f64 * step + p;
        re += arg.cos();
        im += arg.sin();
    }
    re.hypot(im)
}

// 4. Exhaustive search over 16-level quantized profiles for tiny arrays.
fn small_instance_oracle() -> Outcome {
    let start = Instant::now();
    let levels: Vec<f64> = (0..16).map(|q| TAU * q as f64 / 16.0).collect();
    let grid = build_frequency_grid(28e9, 2e9, 1).unwrap();
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_gap: f64 = 0.0;
    let mut ok = true;
    for m in [2usize, 3, 4] {
        let bound = m as f64 * (1.0 - (PI / 16.0).cos());
        for i in 0..100 {
            let paths = los_unit(&mut instance_rng(404 + m as u64, i));
            let aoa = paths.bs_ris().aoa_rad;
            let ru = paths.ris_user()[0].angle_rad;
            let ideal = design_ideal(&paths, &grid, m, 0).unwrap();
            let z_ideal = direct_array_factor(aoa, ru, ideal.phases());

            let mut best: f64 = 0.0;
            let mut phases = vec![0.0; m];
            for code in 0..16usize.pow(m as u32) {
                let mut c = code;
                for p in phases.iter_mut() {
                    *p = levels[c % 16];
                    c /= 16;
                }
                best = best.max(direct_array_factor(aoa, ru, &phases));
            }
            worst_excess = worst_excess.max(best - z_ideal);
            worst_gap = worst_gap.max(z_ideal - best);
            ok &= best <= z_ideal + bound && z_ideal - best <= bound && best <= z_ideal + 1e-9;
        }
    }
    let elapsed = start.elapsed();
    Outcome::new(
        ok && elapsed < Duration::from_secs(60),
        format!(
            "max(exhaustive - ideal) = {worst_excess:.2e}, max(ideal - exhaustive) = {worst_gap:.3e} (bound at M=2: {:.3e}), {elapsed:.2?}",
            2.0 * (1.0 - (PI / 16.0).cos())
        ),
    )
}

fn ordering(pairs: &[(&str, Vec<f64>, Vec<f64>)]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (label, a, b) in pairs {
        let (d, se) = paired(a, b);
        ok &= d > 3.0 * se;
        parts.push(format!("{label}: {d:.3} ({:.1} se)", d / se));
    }
    Outcome::new(ok, parts.join(", "))
}

// 5. LoS ordering at defaults.
fn los_ordering() -> Outcome {
    use Scheme::*;
    let config = ScenarioConfig {
        trials: 200,
        seed: 505,
        ..ScenarioConfig::default()
    };
    let schemes = [Ideal, Central, RandomIndex, SideIndex, Random];
    let t = paired_trials(&config, &schemes).unwrap();
    let [ideal, central, rindex, side, random] = [0, 1, 2, 3, 4].map(|i| column(&t, i));
    ordering(&[
        ("ideal-central", ideal, central.clone()),
        ("central-random_index", central.clone(), rindex),
        ("central-side_index", central, side.clone()),
        ("side_index-random", side, random),
    ])
}

// 6. NLoS ordering at defaults.
fn nlos_ordering() -> Outcome {
    use Scheme::*;
    let config = ScenarioConfig {
        trials: 200,
        seed: 606,
        ..ScenarioConfig::nlos()
    };
    let schemes = [Mccm, Central, RandomIndex, SideIndex];
    let t = paired_trials(&config, &schemes).unwrap();
    let [mccm, central, rindex, side] = [0, 1, 2, 3].map(|i| column(&t, i));
    ordering(&[
        ("mccm-central", mccm.clone(), central),
        ("mccm-random_index", mccm.clone(), rindex),
        ("mccm-side_index", mccm, side),
    ])
}

fn squint_gaps(config: &ScenarioConfig) -> Vec<f64> {
    paired_trials(config, &[Scheme::Ideal, Scheme::Central])
        .unwrap()
        .iter()
        .map(|r| r[0] - r[1])
        .collect()
}

fn nondecreasing(label: &str, gaps: &[Vec<f64>], values: &[f64]) -> (bool, String) {
    let mut ok = true;
    let means: Vec<String> = gaps.iter().map(|g| format!("{:.3}", mean(g))).collect();
    for w in gaps.windows(2) {
        let (d, se) = paired(&w[1], &w[0]);
        ok &= d >= -3.0 * se;
    }
    (ok, format!("{label} {values:?} gaps [{}]", means.join(", ")))
}

// 7. Beam-squint loss of the central design.
fn squint_severity() -> Outcome {
    let base = ScenarioConfig {
        trials: 200,
        seed: 707,
        gain_mode: GainMode::Unit,
        ..ScenarioConfig::default()
    };
    let bw_values = [0.5e9, 1e9, 2e9, 4e9];
    let bw_gaps: Vec<Vec<f64>> = bw_values
        .iter()
        .map(|&b| squint_gaps(&base.at(SweepVariable::BandwidthHz, b).unwrap()))
        .collect();
    let m_values = [16.0, 64.0, 256.0];
    let m_gaps: Vec<Vec<f64>> = m_values
        .iter()
        .map(|&m| squint_gaps(&base.at(SweepVariable::RisElements, m).unwrap()))
        .collect();

    let wide = mean(&bw_gaps[3]);
    let large = mean(&m_gaps[2]);
    let severe = wide > 3.0 || large > 3.0;
    let (bw_ok, bw_text) = nondecreasing("bandwidth", &bw_gaps, &bw_values.map(|b| b / 1e9));
    let (m_ok, m_text) = nondecreasing("M", &m_gaps, &m_values);
    Outcome::new(
        severe && bw_ok && m_ok,
        format!("gap(4 GHz, M=64) = {wide:.3}, gap(2 GHz, M=256) = {large:.3}; {bw_text}; {m_text}"),
    )
}

// 8. NLoS losses at 500 MHz.
fn nlos_narrowband_deltas() -> Outcome {
    use Scheme::*;
    let config = ScenarioConfig {
        trials: 500,
        seed: 808,
        bandwidth_hz: 0.5e9,
        ..ScenarioConfig::nlos()
    };
    let t = paired_trials(&config, &[Ideal, Mccm, Central]).unwrap();
    let [ideal, mccm, central] = [0, 1, 2].map(|i| column(&t, i));
    let mccm_loss = mean(&ideal) - mean(&mccm);
    let central_loss = mean(&ideal) - mean(&central);
    Outcome::new(
        (0.5..=1.6).contains(&mccm_loss) && central_loss > mccm_loss,
        format!("ideal-mccm = {mccm_loss:.3}, ideal-central = {central_loss:.3}"),
    )
}

// 9. The CLI writes byte-identical CSV for a fixed seed.
fn cli_reproducibility() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let start = Instant::now();
    let mut outputs = Vec::new();
    for i in 0..2 {
        let path = dir.path().join(format!("fig2_{i}.csv"));
        let status = Command::new(env!("CARGO_BIN_EXE_ris-squint"))
            .args(["figure", "--id", "2", "--trials", "50", "--seed", "7", "--out"])
            .arg(&path)
            .stderr(std::process::Stdio::null())
            .status()
            .unwrap();
        if !status.success() {
            return Outcome::new(false, format!("run {i} exited with {status}"));
        }
        outputs.push(std::fs::read(&path).unwrap());
    }
    let elapsed = start.elapsed();
    let rows = String::from_utf8_lossy(&outputs[0]).lines().count() - 1;
    Outcome::new(
        outputs[0] == outputs[1] && rows == 35 && elapsed < Duration::from_secs(120),
        format!(
            "identical = {}, {rows} rows, {} bytes, two runs in {elapsed:.2?}",
            outputs[0] == outputs[1],
            outputs[0].len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("per-subcarrier alignment exactness", alignment_exactness),
        ("jensen upper bound", jensen_bound),
        ("degenerate collapse", degenerate_collapse),
        ("small-instance exhaustive oracle", small_instance_oracle),
        ("scheme ordering, LoS", los_ordering),
        ("scheme ordering, NLoS", nlos_ordering),
        ("beam-squint severity", squint_severity),
        ("NLoS 500 MHz deltas", nlos_narrowband_deltas),
        ("CLI reproducibility", cli_reproducibility),
    ];
    // Sanity check on the oracle itself: carrier spatial angle is sin/2.
    assert!((spatial_angle(28e9, 1.0, 28e9) - 0.5 * 1.0f64.sin()).abs() < 1e-15);

    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = run();
        if !outcome.passed {
            failed += 1;
        }
        println!(
            "[{}] {}. {name}: {}",
            if outcome.passed { "PASS" } else { "FAIL" },
            i + 1,
            outcome.detail
        );
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
