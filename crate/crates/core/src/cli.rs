//! Command-line front end: argument parsing, CSV output and the self-test.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{build_frequency_grid, gen_channels, sample_path_set, GainMode, Scenario};
use crate::experiments::{
    Scheme, ScenarioConfig, SweepResult, SweepVariable, DEFAULT_BANDWIDTH_HZ, DEFAULT_BS_ANTENNAS,
    DEFAULT_CARRIER_HZ, DEFAULT_NLOS_PATHS, DEFAULT_RIS_ELEMENTS, DEFAULT_SEED, DEFAULT_SNR_DB,
    DEFAULT_SUBCARRIERS, DEFAULT_TRIALS, SNR_GRID_DB,
};
use crate::phase_design::{
    design_central, design_ideal, design_mccm, design_random, mean_channel_covariance, principal_direction,
};
use crate::rate_eval::{
    effective_channel, ideal_rate, mrt_beamformer, rate_upper_bound, subcarrier_rate, sum_rate, z_factor,
    LinkBudget,
};

/// Environment variable overriding the trial pool's thread count.
pub const THREADS_ENV: &str = "RIS_SQUINT_THREADS";

pub const CSV_HEADER: [&str; 8] = [
    "scenario",
    "scheme",
    "sweep_variable",
    "sweep_value",
    "mean_rate_bits",
    "std_error_bits",
    "trials",
    "seed",
];

#[derive(Debug, Parser)]
#[command(
    name = "ris-squint",
    version,
    about = "Beam-squint aware RIS phase design: Monte Carlo achievable-rate sweeps",
    after_help = "Examples:\n  ris-squint figure --id 2 --trials 200 --seed 7\n  ris-squint sweep --scenario nlos --schemes mccm,central --var snr_db --values 0,10,20\n  ris-squint selftest\n\nSet RIS_SQUINT_THREADS to bound the number of worker threads."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Reproduce one of the preset comparisons (2-4: LoS, 5-6: NLoS).
    Figure(FigureArgs),
    /// Run a custom sweep.
    Sweep(SweepArgs),
    /// Run the built-in closed-form and invariant checks.
    Selftest,
}

#[derive(Debug, Args)]
struct FigureArgs {
    /// Figure preset: 2 (LoS vs SNR), 3 (LoS vs bandwidth), 4 (LoS vs M), 5 (NLoS vs SNR), 6 (NLoS vs bandwidth)
    #[arg(long)]
    id: u32,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// CSV destination; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Los,
    Nlos,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GainArg {
    Unit,
    Random,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value = "los")]
    scenario: ScenarioArg,
    /// Comma-separated: ideal, central, random-index, side-index, random, mccm
    /// [default: every scheme except mccm for los, all six for nlos]
    #[arg(long, value_delimiter = ',')]
    schemes: Vec<String>,
    /// Swept variable: snr_db, bandwidth_hz or m
    #[arg(long = "var", default_value = "snr_db")]
    variable: String,
    /// Comma-separated sweep values [default: -10,-5,0,5,10,15,20 for snr_db]
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    values: Vec<f64>,
    #[arg(long, default_value_t = DEFAULT_CARRIER_HZ)]
    carrier_hz: f64,
    #[arg(long, default_value_t = DEFAULT_BANDWIDTH_HZ)]
    bandwidth_hz: f64,
    /// Number of OFDM subcarriers K
    #[arg(long, default_value_t = DEFAULT_SUBCARRIERS)]
    subcarriers: usize,
    /// BS antennas N
    #[arg(long, default_value_t = DEFAULT_BS_ANTENNAS)]
    bs_antennas: usize,
    /// RIS elements M
    #[arg(long, default_value_t = DEFAULT_RIS_ELEMENTS)]
    ris_elements: usize,
    /// RIS-user paths L (nlos only)
    #[arg(long, default_value_t = DEFAULT_NLOS_PATHS)]
    paths: usize,
    /// Operating SNR when it is not the swept variable
    #[arg(long, default_value_t = DEFAULT_SNR_DB, allow_negative_numbers = true)]
    snr_db: f64,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    trials: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, value_enum, default_value = "random")]
    gain_mode: GainArg,
    /// CSV destination; stdout when omitted
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Validated command line.
#[derive(Debug, Clone, PartialEq)]
pub enum CliConfig {
    Figure {
        id: u32,
        trials: usize,
        seed: u64,
        output: Option<PathBuf>,
    },
    Sweep {
        config: ScenarioConfig,
        schemes: Vec<Scheme>,
        variable: SweepVariable,
        values: Vec<f64>,
        output: Option<PathBuf>,
    },
    Selftest,
}

fn usage_error(message: String) -> clap::Error {
    Cli::command().error(ErrorKind::ValueValidation, message)
}

/// Parses arguments, excluding the program name.
///
/// Help and version requests come back as errors of kind
/// [`ErrorKind::DisplayHelp`] / [`ErrorKind::DisplayVersion`].
pub fn parse_args<I, S>(argv: I) -> Result<CliConfig, clap::Error>
where
    I: IntoIterator<Item = S>,
    S: Into<String>,
{
    let args = std::iter::once("ris-squint".to_string()).chain(argv.into_iter().map(Into::into));
    let cli = Cli::try_parse_from(args)?;
    match cli.command {
        Command::Selftest => Ok(CliConfig::Selftest),
        Command::Figure(a) => {
            if !(2..=6).contains(&a.id) {
                return Err(usage_error(format!("--id: unknown figure {}; expected 2..=6", a.id)));
            }
            if a.trials == 0 {
                return Err(usage_error("--trials: must be at least 1".into()));
            }
            Ok(CliConfig::Figure {
                id: a.id,
                trials: a.trials,
                seed: a.seed,
                output: a.out,
            })
        }
        Command::Sweep(a) => sweep_config(a),
    }
}

fn sweep_config(a: SweepArgs) -> Result<CliConfig, clap::Error> {
    let scenario = match a.scenario {
        ScenarioArg::Los => Scenario::Los,
        ScenarioArg::Nlos => Scenario::Nlos,
    };
    let schemes = if a.schemes.is_empty() {
        match scenario {
            Scenario::Los => Scheme::ALL.iter().copied().filter(|&s| s != Scheme::Mccm).collect(),
            Scenario::Nlos => Scheme::ALL.to_vec(),
        }
    } else {
        a.schemes
            .iter()
            .map(|s| s.parse::<Scheme>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| usage_error(format!("--schemes: {e}")))?
    };
    let variable: SweepVariable = a
        .variable
        .parse()
        .map_err(|e| usage_error(format!("--var: {e}; expected snr_db, bandwidth_hz or m")))?;
    let values = if a.values.is_empty() {
        match variable {
            SweepVariable::SnrDb => SNR_GRID_DB.to_vec(),
            _ => return Err(usage_error(format!("--values: required when --var is {variable}"))),
        }
    } else {
        a.values
    };
    let config = ScenarioConfig {
        carrier_hz: a.carrier_hz,
        bandwidth_hz: a.bandwidth_hz,
        num_subcarriers: a.subcarriers,
        bs_antennas: a.bs_antennas,
        ris_elements: a.ris_elements,
        num_paths: a.paths,
        scenario,
        snr_db: a.snr_db,
        trials: a.trials,
        seed: a.seed,
        gain_mode: match a.gain_mode {
            GainArg::Unit => GainMode::Unit,
            GainArg::Random => GainMode::Random,
        },
    };
    config
        .validate()
        .map_err(|e| usage_error(format!("invalid configuration: {e}")))?;
    for &v in &values {
        config
            .at(variable, v)
            .map_err(|e| usage_error(format!("--values: {e}")))?;
    }
    Ok(CliConfig::Sweep {
        config,
        schemes,
        variable,
        values,
        output: a.out,
    })
}

/// Fixed-point rendering with `digits` significant digits.
pub fn format_significant(x: f64, digits: usize) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return format!("{:.*}", digits.saturating_sub(1), 0.0);
    }
    let magnitude = x.abs().log10().floor() as i64;
    let decimals = (digits as i64 - 1 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

pub fn write_csv<W: Write>(result: &SweepResult, out: W) -> io::Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &result.rows {
        w.write_record([
            r.scenario.name().to_string(),
            r.scheme.name().to_string(),
            r.sweep_variable.name().to_string(),
            format_significant(r.sweep_value, 10),
            format_significant(r.mean_rate_bits, 10),
            format_significant(r.std_error_bits, 10),
            r.trials.to_string(),
            r.seed.to_string(),
        ])?;
    }
    w.flush()
}

/// Writes the CSV to `path`, or to stdout when `path` is `None`.
pub fn emit_csv(result: &SweepResult, path: Option<&Path>) -> io::Result<()> {
    match path {
        Some(p) => {
            let file = File::create(p)?;
            let mut buf = BufWriter::new(file);
            write_csv(result, &mut buf)?;
            buf.flush()
        }
        None => write_csv(result, io::stdout().lock()),
    }
}

/// Human-readable table of a sweep.
pub fn summary(result: &SweepResult) -> String {
    let mut s = String::new();
    for r in &result.rows {
        s.push_str(&format!(
            "{:<5} {:<13} {}={:<12} mean rate {:>9.4} bits/s/Hz  ±{:.4}\n",
            r.scenario.name(),
            r.scheme.name(),
            r.sweep_variable.name(),
            format_significant(r.sweep_value, 6),
            r.mean_rate_bits,
            r.std_error_bits,
        ));
    }
    s
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub measured: f64,
    pub threshold: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SelftestReport {
    pub checks: Vec<CheckOutcome>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    fn record(&mut self, name: &'static str, measured: f64, threshold: f64) {
        self.checks.push(CheckOutcome {
            name,
            measured,
            threshold,
            passed: measured <= threshold,
        });
    }
}

impl std::fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<34} measured {:.3e} (limit {:.1e})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.threshold
            )?;
        }
        Ok(())
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// Small-size closed-form and invariant checks (`M ≤ 8`, `K ≤ 8`).
pub fn selftest() -> crate::Result<SelftestReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut report = SelftestReport::default();
    let budget = LinkBudget::from_snr_db(10.0);
    let (n, m, k) = (4usize, 8usize, 8usize);
    let grid = build_frequency_grid(28e9, 2e9, k)?;
    let single = build_frequency_grid(28e9, 2e9, 1)?;

    let mut z_err: f64 = 0.0;
    let mut rate_err: f64 = 0.0;
    let mut jensen_violations = 0usize;
    let mut central_err: f64 = 0.0;
    let mut mccm_err: f64 = 0.0;
    let mut mrt_err: f64 = 0.0;
    let mut mean_err: f64 = 0.0;
    let closed_form = (1.0 + budget.snr_linear() * n as f64 * (m * m) as f64).log2();

    for _ in 0..1000 {
        let paths = sample_path_set(&mut rng, Scenario::Los, 1, GainMode::Unit)?;
        let ch = gen_channels(&paths, &grid, n, m)?;

        let profile = design_random(&mut rng, m);
        let report = sum_rate(&ch, &profile, &budget)?;
        let ub = rate_upper_bound(&paths, &profile, &grid, n, &budget)?;
        if report.sum_rate_bits > ub + 1e-12 {
            jensen_violations += 1;
        }

        let kk = rand::Rng::random_range(&mut rng, 0..k);
        let ideal = design_ideal(&paths, &grid, m, kk)?;
        z_err = z_err.max((z_factor(&paths, &ideal, &grid, kk)?.norm() - m as f64).abs());
        let g = effective_channel(&ch.ris_user()[kk], &ideal, &ch.bs_ris()[kk])?;
        rate_err = rate_err.max(rel_err(subcarrier_rate(&g, &budget), closed_form));

        let f = mrt_beamformer(&g, budget.transmit_power());
        let explicit = (1.0 + (&g * &f)[0].norm_sqr() / budget.noise_power()).log2();
        mrt_err = mrt_err.max((explicit - subcarrier_rate(&g, &budget)).abs());

        let central = design_central(&paths, m)?;
        let mut mean = vec![0.0; m];
        for kk in 0..k {
            for (acc, x) in mean.iter_mut().zip(design_ideal(&paths, &grid, m, kk)?.phases()) {
                *acc += x / k as f64;
            }
        }
        for (a, b) in central.phases().iter().zip(&mean) {
            mean_err = mean_err.max((a - b).abs());
        }
    }

    for _ in 0..100 {
        let paths = sample_path_set(&mut rng, Scenario::Los, 1, GainMode::Unit)?;
        let ch = gen_channels(&paths, &single, n, m)?;
        let ideal = ideal_rate(&ch, &budget)?.sum_rate_bits;
        let central = sum_rate(&ch, &design_central(&paths, m)?, &budget)?.sum_rate_bits;
        central_err = central_err.max(rel_err(central, ideal));
        let mccm = sum_rate(&ch, &design_mccm(&ch, &budget)?.profile, &budget)?.sum_rate_bits;
        mccm_err = mccm_err.max(rel_err(mccm, ideal));
    }

    let mut residual: f64 = 0.0;
    for _ in 0..50 {
        let paths = sample_path_set(&mut rng, Scenario::Nlos, 5, GainMode::Random)?;
        let ch = gen_channels(&paths, &grid, n, m)?;
        let cov = mean_channel_covariance(ch.ris_user())?;
        let pd = principal_direction(&cov);
        let r = cov.matrix() * &pd.vector - &pd.vector * crate::channel::C64::new(pd.eigenvalue, 0.0);
        residual = residual.max(r.norm() / pd.eigenvalue);
    }

    report.record("alignment |z_k| - M", z_err, 1e-9);
    report.record("ideal rate vs closed form (rel)", rate_err, 1e-9);
    report.record("jensen bound violations", jensen_violations as f64, 0.0);
    report.record("mrt snr consistency", mrt_err, 1e-10);
    report.record("central = mean of ideal phases", mean_err, 1e-9);
    report.record("K=1 central vs ideal (rel)", central_err, 1e-9);
    report.record("K=1 mccm vs ideal (rel)", mccm_err, 1e-6);
    report.record("mccm eigen residual (rel)", residual, 1e-8);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_significant(21.321928094887362, 10), "21.32192809");
        assert_eq!(format_significant(2e9, 10), "2000000000");
        assert_eq!(format_significant(0.25e9, 10), "250000000.0");
        assert_eq!(format_significant(-10.0, 10), "-10.00000000");
        assert_eq!(format_significant(0.0, 10), "0.000000000");
        assert_eq!(format_significant(0.001234, 4), "0.001234");
    }

    #[test]
    fn figure_args() {
        let c = parse_args(["figure", "--id", "2", "--trials", "200", "--seed", "7"]).unwrap();
        assert_eq!(
            c,
            CliConfig::Figure {
                id: 2,
                trials: 200,
                seed: 7,
                output: None
            }
        );
        assert!(parse_args(["figure", "--id", "9"]).is_err());
        assert!(parse_args(["figure", "--id", "2", "--trials", "0"]).is_err());
    }
}
