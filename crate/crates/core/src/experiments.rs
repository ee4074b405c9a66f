//! Seeded Monte Carlo sweeps over SNR, bandwidth and RIS size.
//!
//! Trial `t` draws its path set from a ChaCha stream keyed by `(seed, t)`.
//! Every scheme at every sweep point sees the same path set for a given
//! trial (common random numbers), and scheme-internal randomness (random
//! phases, random subcarrier index) comes from its own per-scheme stream, so
//! adding or removing a scheme never perturbs the others. Trials may run in
//! parallel; means are always reduced in ascending trial order.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{
    build_frequency_grid, gen_channels, sample_path_set, ChannelRealization, GainMode, Scenario,
};
use crate::error::{Error, Result};
use crate::phase_design::{
    design_central, design_covariance_at, design_indexed, design_mccm, design_random, CovarianceSource,
};
use crate::rate_eval::{ideal_rate, sum_rate, LinkBudget};

/// Phase-design scheme compared in a sweep.
///
/// `Central`, `RandomIndex` and `SideIndex` follow the scenario: with a
/// line-of-sight RIS -> user link they use the angle-based designs, with
/// scattered paths they use the covariance of a single frequency (the
/// carrier, a random subcarrier, or the lowest subcarrier).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Ideal,
    Central,
    RandomIndex,
    SideIndex,
    Random,
    Mccm,
}

impl Scheme {
    pub const ALL: [Scheme; 6] = [
        Scheme::Ideal,
        Scheme::Central,
        Scheme::RandomIndex,
        Scheme::SideIndex,
        Scheme::Random,
        Scheme::Mccm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Ideal => "ideal",
            Scheme::Central => "central",
            Scheme::RandomIndex => "random-index",
            Scheme::SideIndex => "side-index",
            Scheme::Random => "random",
            Scheme::Mccm => "mccm",
        }
    }

    fn stream_id(self) -> u64 {
        match self {
            Scheme::Ideal => 1,
            Scheme::Central => 2,
            Scheme::RandomIndex => 3,
            Scheme::SideIndex => 4,
            Scheme::Random => 5,
            Scheme::Mccm => 6,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownName(pub String);

impl fmt::Display for UnknownName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown name `{}`", self.0)
    }
}

impl std::error::Error for UnknownName {}

impl FromStr for Scheme {
    type Err = UnknownName;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| UnknownName(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepVariable {
    SnrDb,
    BandwidthHz,
    RisElements,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            SweepVariable::SnrDb => "snr_db",
            SweepVariable::BandwidthHz => "bandwidth_hz",
            SweepVariable::RisElements => "m",
        }
    }
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVariable {
    type Err = UnknownName;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "snr_db" | "snr" => Ok(SweepVariable::SnrDb),
            "bandwidth_hz" | "bandwidth" => Ok(SweepVariable::BandwidthHz),
            "m" | "ris_elements" => Ok(SweepVariable::RisElements),
            _ => Err(UnknownName(s.to_string())),
        }
    }
}

pub const DEFAULT_CARRIER_HZ: f64 = 28e9;
pub const DEFAULT_BANDWIDTH_HZ: f64 = 2e9;
pub const DEFAULT_SUBCARRIERS: usize = 128;
pub const DEFAULT_BS_ANTENNAS: usize = 64;
pub const DEFAULT_RIS_ELEMENTS: usize = 64;
pub const DEFAULT_NLOS_PATHS: usize = 5;
pub const DEFAULT_SNR_DB: f64 = 10.0;
pub const DEFAULT_TRIALS: usize = 500;
pub const DEFAULT_SEED: u64 = 1;

pub const SNR_GRID_DB: [f64; 7] = [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0];
pub const BANDWIDTH_GRID_HZ: [f64; 5] = [0.25e9, 0.5e9, 1e9, 2e9, 4e9];
pub const RIS_SIZE_GRID: [usize; 5] = [16, 32, 64, 128, 256];

/// One simulation setup. `snr_db`, `bandwidth_hz` and `ris_elements` are the
/// operating point used when they are not the swept variable.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    pub num_subcarriers: usize,
    pub bs_antennas: usize,
    pub ris_elements: usize,
    /// RIS -> user path count; ignored for line-of-sight.
    pub num_paths: usize,
    pub scenario: Scenario,
    pub snr_db: f64,
    pub trials: usize,
    pub seed: u64,
    pub gain_mode: GainMode,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            carrier_hz: DEFAULT_CARRIER_HZ,
            bandwidth_hz: DEFAULT_BANDWIDTH_HZ,
            num_subcarriers: DEFAULT_SUBCARRIERS,
            bs_antennas: DEFAULT_BS_ANTENNAS,
            ris_elements: DEFAULT_RIS_ELEMENTS,
            num_paths: DEFAULT_NLOS_PATHS,
            scenario: Scenario::Los,
            snr_db: DEFAULT_SNR_DB,
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            gain_mode: GainMode::Random,
        }
    }
}

impl ScenarioConfig {
    pub fn nlos() -> Self {
        Self {
            scenario: Scenario::Nlos,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::NoTrials);
        }
        if self.bs_antennas == 0 {
            return Err(Error::EmptyDimension("BS antenna count"));
        }
        if self.ris_elements == 0 {
            return Err(Error::EmptyDimension("RIS element count"));
        }
        if self.num_paths == 0 {
            return Err(Error::NoPaths);
        }
        if !self.snr_db.is_finite() {
            return Err(Error::InvalidSweepValue {
                variable: "snr_db",
                value: self.snr_db,
            });
        }
        build_frequency_grid(self.carrier_hz, self.bandwidth_hz, self.num_subcarriers)?;
        Ok(())
    }

    /// Copy with `variable` set to `value`.
    pub fn at(&self, variable: SweepVariable, value: f64) -> Result<Self> {
        let mut out = self.clone();
        let bad = || Error::InvalidSweepValue {
            variable: variable.name(),
            value,
        };
        match variable {
            SweepVariable::SnrDb => out.snr_db = value,
            SweepVariable::BandwidthHz => out.bandwidth_hz = value,
            SweepVariable::RisElements => {
                if !(value >= 1.0 && value.fract() == 0.0 && value <= u32::MAX as f64) {
                    return Err(bad());
                }
                out.ris_elements = value as usize;
            }
        }
        out.validate().map_err(|e| match e {
            Error::InvalidSweepValue { .. } | Error::InvalidBandwidth { .. } => bad(),
            other => other,
        })?;
        Ok(out)
    }
}

/// Mean and standard error over trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointEstimate {
    pub mean_rate_bits: f64,
    pub std_error_bits: f64,
    pub trials: usize,
}

/// Sample mean and `sd / sqrt(n)`, with `n - 1` in the variance. One sample
/// gives a zero standard error.
pub fn summarize(samples: &[f64]) -> PointEstimate {
    let n = samples.len();
    let mean = samples.iter().sum::<f64>() / n as f64;
    let std_error = if n < 2 {
        0.0
    } else {
        let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    };
    PointEstimate {
        mean_rate_bits: mean,
        std_error_bits: std_error,
        trials: n,
    }
}

fn trial_rng(seed: u64, trial: usize, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((trial as u64) << 4) | stream);
    rng
}

/// Channel realization of trial `trial` under `config`.
pub fn trial_channels(config: &ScenarioConfig, trial: usize) -> Result<ChannelRealization> {
    let mut rng = trial_rng(config.seed, trial, 0);
    let paths = sample_path_set(&mut rng, config.scenario, config.num_paths, config.gain_mode)?;
    let grid = build_frequency_grid(config.carrier_hz, config.bandwidth_hz, config.num_subcarriers)?;
    gen_channels(&paths, &grid, config.bs_antennas, config.ris_elements)
}

/// Mean rate of `scheme` on one realization.
pub fn scheme_rate<R: Rng + ?Sized>(
    scheme: Scheme,
    channels: &ChannelRealization,
    budget: &LinkBudget,
    rng: &mut R,
) -> Result<f64> {
    let paths = channels.paths();
    let grid = channels.grid();
    let m = channels.ris_elements();
    let los = paths.scenario() == Scenario::Los;
    let indexed = |k: usize| {
        if los {
            design_indexed(paths, grid, m, k)
        } else {
            design_covariance_at(channels, CovarianceSource::Subcarrier(k), budget)
        }
    };
    let profile = match scheme {
        Scheme::Ideal => return Ok(ideal_rate(channels, budget)?.sum_rate_bits),
        Scheme::Central if los => design_central(paths, m)?,
        Scheme::Central => design_covariance_at(channels, CovarianceSource::Carrier, budget)?,
        Scheme::RandomIndex => indexed(rng.random_range(0..grid.num_subcarriers()))?,
        Scheme::SideIndex => indexed(0)?,
        Scheme::Random => design_random(rng, m),
        Scheme::Mccm => design_mccm(channels, budget)?.profile,
    };
    Ok(sum_rate(channels, &profile, budget)?.sum_rate_bits)
}

/// Per-trial rates, `result[t][i]` for trial `t` and `schemes[i]`.
pub fn paired_trials(config: &ScenarioConfig, schemes: &[Scheme]) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    let budget = LinkBudget::from_snr_db(config.snr_db);
    (0..config.trials)
        .into_par_iter()
        .map(|t| {
            let channels = trial_channels(config, t)?;
            schemes
                .iter()
                .map(|&s| {
                    let mut rng = trial_rng(config.seed, t, s.stream_id());
                    scheme_rate(s, &channels, &budget, &mut rng)
                })
                .collect()
        })
        .collect()
}

/// Mean rate and standard error of one scheme at the config's operating point.
pub fn run_point(config: &ScenarioConfig, scheme: Scheme) -> Result<PointEstimate> {
    let rates: Vec<f64> = paired_trials(config, &[scheme])?
        .into_iter()
        .map(|r| r[0])
        .collect();
    Ok(summarize(&rates))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub scenario: Scenario,
    pub scheme: Scheme,
    pub sweep_variable: SweepVariable,
    pub sweep_value: f64,
    pub mean_rate_bits: f64,
    pub std_error_bits: f64,
    pub trials: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
}

impl SweepResult {
    pub fn find(&self, scheme: Scheme, sweep_value: f64) -> Option<&SweepRow> {
        self.rows
            .iter()
            .find(|r| r.scheme == scheme && r.sweep_value == sweep_value)
    }
}

/// Evaluates every scheme at every value of `variable`. Rows are grouped by
/// scheme, in the order given, then by value.
pub fn run_sweep(
    config: &ScenarioConfig,
    schemes: &[Scheme],
    variable: SweepVariable,
    values: &[f64],
) -> Result<SweepResult> {
    if schemes.is_empty() {
        return Err(Error::EmptyList("scheme list"));
    }
    if values.is_empty() {
        return Err(Error::EmptyList("sweep values"));
    }
    let points = values
        .iter()
        .map(|&v| config.at(variable, v))
        .collect::<Result<Vec<_>>>()?;
    let mut per_point = Vec::with_capacity(points.len());
    for point in &points {
        log::info!("{} = {}: {} trials", variable, value_of(point, variable), point.trials);
        per_point.push(paired_trials(point, schemes)?);
    }
    let mut rows = Vec::with_capacity(schemes.len() * values.len());
    for (i, &scheme) in schemes.iter().enumerate() {
        for (&value, trials) in values.iter().zip(&per_point) {
            let rates: Vec<f64> = trials.iter().map(|r| r[i]).collect();
            let est = summarize(&rates);
            rows.push(SweepRow {
                scenario: config.scenario,
                scheme,
                sweep_variable: variable,
                sweep_value: value,
                mean_rate_bits: est.mean_rate_bits,
                std_error_bits: est.std_error_bits,
                trials: est.trials,
                seed: config.seed,
            });
        }
    }
    Ok(SweepResult { rows })
}

fn value_of(config: &ScenarioConfig, variable: SweepVariable) -> f64 {
    match variable {
        SweepVariable::SnrDb => config.snr_db,
        SweepVariable::BandwidthHz => config.bandwidth_hz,
        SweepVariable::RisElements => config.ris_elements as f64,
    }
}

/// A canned sweep reproducing one figure's comparison.
#[derive(Debug, Clone, PartialEq)]
pub struct FigurePreset {
    pub id: u32,
    pub title: &'static str,
    pub config: ScenarioConfig,
    pub schemes: Vec<Scheme>,
    pub variable: SweepVariable,
    pub values: Vec<f64>,
}

pub fn figure_preset(id: u32) -> Result<FigurePreset> {
    use Scheme::*;
    let los_schemes = vec![Ideal, Central, RandomIndex, SideIndex, Random];
    let nlos_schemes = vec![Ideal, Mccm, Central, RandomIndex, SideIndex, Random];
    let snr = SNR_GRID_DB.to_vec();
    let bw = BANDWIDTH_GRID_HZ.to_vec();
    let (title, config, schemes, variable, values) = match id {
        2 => ("rate vs SNR, LoS", ScenarioConfig::default(), los_schemes, SweepVariable::SnrDb, snr),
        3 => ("rate vs bandwidth, LoS", ScenarioConfig::default(), los_schemes, SweepVariable::BandwidthHz, bw),
        4 => (
            "rate vs RIS elements, LoS",
            ScenarioConfig::default(),
            los_schemes,
            SweepVariable::RisElements,
            RIS_SIZE_GRID.iter().map(|&m| m as f64).collect(),
        ),
        5 => ("rate vs SNR, NLoS", ScenarioConfig::nlos(), nlos_schemes, SweepVariable::SnrDb, snr),
        6 => ("rate vs bandwidth, NLoS", ScenarioConfig::nlos(), nlos_schemes, SweepVariable::BandwidthHz, bw),
        other => return Err(Error::UnknownFigure(other)),
    };
    Ok(FigurePreset {
        id,
        title,
        config,
        schemes,
        variable,
        values,
    })
}

pub fn reproduce_figure(id: u32, trials: usize, seed: u64) -> Result<SweepResult> {
    let preset = figure_preset(id)?;
    let config = ScenarioConfig {
        trials,
        seed,
        ..preset.config
    };
    run_sweep(&config, &preset.schemes, preset.variable, &preset.values)
}
