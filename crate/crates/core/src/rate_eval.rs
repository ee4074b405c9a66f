//! Achievable-rate evaluation with MRT beamforming at the BS.
//!
//! With `f_k = sqrt(P) gᴴ / ‖g‖` for the effective channel
//! `g = h_Ru,k Φ H_BR,k`, the received SNR on subcarrier `k` is
//! `(P / σ²) ‖g‖²`. Rates are averaged (not summed) over subcarriers.

use std::f64::consts::{LN_2, TAU};

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::channel::{ChannelRealization, FrequencyGrid, PathSet, Scenario, C64};
use crate::error::{Error, Result};
use crate::phase_design::{design_covariance_for_subcarrier, design_ideal, PhaseProfile};

/// Transmit and noise power, both linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    transmit_power: f64,
    noise_power: f64,
}

impl LinkBudget {
    pub fn new(transmit_power: f64, noise_power: f64) -> Result<Self> {
        for p in [transmit_power, noise_power] {
            if !(p.is_finite() && p > 0.0) {
                return Err(Error::InvalidPower(p));
            }
        }
        Ok(Self {
            transmit_power,
            noise_power,
        })
    }

    /// Unit noise power and `P = 10^(snr_db / 10)`.
    pub fn from_snr_db(snr_db: f64) -> Self {
        Self {
            transmit_power: 10f64.powf(snr_db / 10.0),
            noise_power: 1.0,
        }
    }

    pub fn transmit_power(&self) -> f64 {
        self.transmit_power
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn snr_linear(&self) -> f64 {
        self.transmit_power / self.noise_power
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateReport {
    /// bits/s/Hz on each subcarrier.
    pub per_subcarrier_bits: Vec<f64>,
    /// Mean of `per_subcarrier_bits`.
    pub sum_rate_bits: f64,
    /// Jensen upper bound, only for unit-gain line-of-sight realizations.
    pub upper_bound_bits: Option<f64>,
}

impl RateReport {
    fn from_rates(per_subcarrier_bits: Vec<f64>) -> Self {
        let sum_rate_bits = mean(&per_subcarrier_bits);
        Self {
            per_subcarrier_bits,
            sum_rate_bits,
            upper_bound_bits: None,
        }
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// `h_ru · diag(exp(j·phases)) · h_br`.
pub fn effective_channel(
    h_ru: &RowDVector<C64>,
    profile: &PhaseProfile,
    h_br: &DMatrix<C64>,
) -> Result<RowDVector<C64>> {
    let m = h_ru.len();
    if profile.len() != m {
        return Err(Error::DimensionMismatch {
            context: "phase profile vs RIS-user channel",
            expected: m,
            actual: profile.len(),
        });
    }
    if h_br.nrows() != m {
        return Err(Error::DimensionMismatch {
            context: "BS-RIS rows vs RIS-user channel",
            expected: m,
            actual: h_br.nrows(),
        });
    }
    let reflected = RowDVector::from_iterator(
        m,
        h_ru.iter()
            .zip(profile.phases())
            .map(|(h, &p)| h * C64::from_polar(1.0, p)),
    );
    Ok(reflected * h_br)
}

/// MRT precoder `sqrt(P) gᴴ / ‖g‖`; the zero vector when `g = 0`.
pub fn mrt_beamformer(effective: &RowDVector<C64>, power: f64) -> DVector<C64> {
    let norm = effective.norm();
    if norm == 0.0 {
        return DVector::zeros(effective.len());
    }
    effective.adjoint() * C64::new(power.sqrt() / norm, 0.0)
}

/// `log2(1 + snr ‖g‖²)`.
pub fn subcarrier_rate(effective: &RowDVector<C64>, budget: &LinkBudget) -> f64 {
    (budget.snr_linear() * effective.norm_squared()).ln_1p() / LN_2
}

/// Rate of one common profile over every subcarrier of `channels`.
pub fn sum_rate(
    channels: &ChannelRealization,
    profile: &PhaseProfile,
    budget: &LinkBudget,
) -> Result<RateReport> {
    let rates = channels
        .ris_user()
        .iter()
        .zip(channels.bs_ris())
        .map(|(h_ru, h_br)| effective_channel(h_ru, profile, h_br).map(|g| subcarrier_rate(&g, budget)))
        .collect::<Result<Vec<_>>>()?;
    let mut report = RateReport::from_rates(rates);
    let paths = channels.paths();
    if paths.scenario() == Scenario::Los && paths.has_unit_gains() {
        report.upper_bound_bits = Some(rate_upper_bound(
            paths,
            profile,
            channels.grid(),
            channels.bs_antennas(),
            budget,
        )?);
    }
    Ok(report)
}

/// Rate when every subcarrier gets its own profile.
///
/// Line-of-sight uses the per-subcarrier optimum of [`design_ideal`]. With
/// several RIS -> user paths each subcarrier gets a receive part aligned to
/// the BS -> RIS angle at that frequency and a forward part from the phases
/// of `h_kᴴ`, with the conjugation that scores higher on that subcarrier.
pub fn ideal_rate(channels: &ChannelRealization, budget: &LinkBudget) -> Result<RateReport> {
    let paths = channels.paths();
    let m = channels.ris_elements();
    let rates = (0..channels.num_subcarriers())
        .map(|k| {
            let profile = match paths.scenario() {
                Scenario::Los => design_ideal(paths, channels.grid(), m, k)?,
                Scenario::Nlos => design_covariance_for_subcarrier(channels, k, budget)?,
            };
            let g = effective_channel(&channels.ris_user()[k], &profile, &channels.bs_ris()[k])?;
            Ok(subcarrier_rate(&g, budget))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateReport::from_rates(rates))
}

/// `z_k = Σ_m exp(j 2π m (φ_BR,k − φ_Ru,k) + j φ_m)` for a line-of-sight set.
pub fn z_factor(paths: &PathSet, profile: &PhaseProfile, grid: &FrequencyGrid, k: usize) -> Result<C64> {
    let ru = paths.los_path("z-factor")?;
    let f = grid.frequency(k)?;
    let fc = grid.carrier_hz();
    let step = paths.bs_ris_spatial_angle(f, fc) - crate::channel::spatial_angle(f, ru.angle_rad, fc);
    Ok(profile
        .phases()
        .iter()
        .enumerate()
        .map(|(m, &p)| C64::from_polar(1.0, TAU * m as f64 * step + p))
        .sum())
}

/// `log2(1 + (P N / σ² K) Σ_k |z_k|²)`, with unit path gains.
pub fn rate_upper_bound(
    paths: &PathSet,
    profile: &PhaseProfile,
    grid: &FrequencyGrid,
    bs_antennas: usize,
    budget: &LinkBudget,
) -> Result<f64> {
    let k_count = grid.num_subcarriers();
    let mut acc = 0.0;
    for k in 0..k_count {
        acc += z_factor(paths, profile, grid, k)?.norm_sqr();
    }
    let snr = budget.snr_linear() * bs_antennas as f64 / k_count as f64;
    Ok((snr * acc).ln_1p() / LN_2)
}
