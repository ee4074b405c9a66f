//! Frequency-dependent channel model for the BS -> RIS -> user link.
//!
//! Every path is described by a physical angle. At subcarrier frequency
//! `f_k` the array sees the spatial angle `(f_k / c) * d * sin(theta)`, with
//! the element spacing `d` fixed to half a wavelength at the carrier. Away
//! from the carrier the spatial angle drifts, which is the beam squint that a
//! frequency-flat RIS profile cannot follow.
//!
//! The BS -> RIS link is a single line-of-sight path and produces rank-one
//! `M x N` matrices. The RIS -> user link is either one line-of-sight path or
//! a sum of `L` scattered paths, each with its own angle, gain and delay.

use std::f64::consts::TAU;
use std::fmt;

use nalgebra::{Complex, DMatrix, DVector, RowDVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Upper edge of the path-delay support, in seconds.
pub const MAX_DELAY_S: f64 = 20e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    Los,
    Nlos,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Los => "los",
            Scenario::Nlos => "nlos",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How complex path gains are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum GainMode {
    /// Every gain is exactly `1`.
    Unit,
    /// Circularly-symmetric complex standard normal, `CN(0, 1)`.
    #[default]
    Random,
}

impl GainMode {
    pub fn name(self) -> &'static str {
        match self {
            GainMode::Unit => "unit",
            GainMode::Random => "random",
        }
    }
}

/// OFDM subcarrier frequencies, symmetric about the carrier.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    carrier_hz: f64,
    bandwidth_hz: f64,
    frequencies: Vec<f64>,
}

impl FrequencyGrid {
    pub fn carrier_hz(&self) -> f64 {
        self.carrier_hz
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz
    }

    pub fn num_subcarriers(&self) -> usize {
        self.frequencies.len()
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.frequencies
    }

    pub fn frequency(&self, k: usize) -> Result<f64> {
        self.frequencies
            .get(k)
            .copied()
            .ok_or(Error::SubcarrierOutOfRange {
                index: k,
                count: self.frequencies.len(),
            })
    }

    /// Index of the subcarrier sitting exactly on the carrier, if `K` is odd.
    pub fn carrier_index(&self) -> Option<usize> {
        let k = self.frequencies.len();
        (k % 2 == 1).then_some(k / 2)
    }
}

/// Builds the `K`-point grid `f_k = f_c + (B / K) * (k - (K - 1) / 2)`.
pub fn build_frequency_grid(
    carrier_hz: f64,
    bandwidth_hz: f64,
    num_subcarriers: usize,
) -> Result<FrequencyGrid> {
    if num_subcarriers == 0 {
        return Err(Error::NoSubcarriers);
    }
    if !(carrier_hz.is_finite() && carrier_hz > 0.0) {
        return Err(Error::InvalidCarrier(carrier_hz));
    }
    if !(bandwidth_hz.is_finite() && bandwidth_hz >= 0.0 && bandwidth_hz < 2.0 * carrier_hz) {
        return Err(Error::InvalidBandwidth {
            carrier_hz,
            bandwidth_hz,
        });
    }
    let spacing = bandwidth_hz / num_subcarriers as f64;
    let center = (num_subcarriers as f64 - 1.0) / 2.0;
    let frequencies = (0..num_subcarriers)
        .map(|k| carrier_hz + spacing * (k as f64 - center))
        .collect();
    Ok(FrequencyGrid {
        carrier_hz,
        bandwidth_hz,
        frequencies,
    })
}

/// Spatial angle seen by a half-wavelength (at `carrier_hz`) ULA at frequency `f_hz`.
#[inline]
pub fn spatial_angle(f_hz: f64, theta_rad: f64, carrier_hz: f64) -> f64 {
    f_hz / (2.0 * carrier_hz) * theta_rad.sin()
}

/// Unit-norm ULA response `(1/sqrt(n)) * [1, e^{j2πφ}, ..., e^{j(n-1)2πφ}]^T`.
pub fn array_response(n_elements: usize, phi: f64) -> Result<DVector<C64>> {
    if n_elements == 0 {
        return Err(Error::EmptyDimension("array size"));
    }
    Ok(steering(n_elements, phi))
}

pub(crate) fn steering(n: usize, phi: f64) -> DVector<C64> {
    let scale = 1.0 / (n as f64).sqrt();
    DVector::from_iterator(
        n,
        (0..n).map(|m| C64::from_polar(scale, TAU * m as f64 * phi)),
    )
}

/// The single line-of-sight BS -> RIS path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BsRisPath {
    /// Arrival angle at the RIS.
    pub aoa_rad: f64,
    /// Departure angle at the BS.
    pub aod_rad: f64,
    pub gain: C64,
    pub delay_s: f64,
}

/// One RIS -> user path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RisUserPath {
    /// Departure angle at the RIS.
    pub angle_rad: f64,
    pub gain: C64,
    pub delay_s: f64,
}

/// Geometry and gains of one channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    bs_ris: BsRisPath,
    ris_user: Vec<RisUserPath>,
    scenario: Scenario,
}

fn check_delay(delay_s: f64) -> Result<()> {
    if delay_s.is_finite() && delay_s >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDelay(delay_s))
    }
}

impl PathSet {
    pub fn los(bs_ris: BsRisPath, ris_user: RisUserPath) -> Result<Self> {
        Self::new(Scenario::Los, bs_ris, vec![ris_user])
    }

    pub fn nlos(bs_ris: BsRisPath, ris_user: Vec<RisUserPath>) -> Result<Self> {
        Self::new(Scenario::Nlos, bs_ris, ris_user)
    }

    pub fn new(scenario: Scenario, bs_ris: BsRisPath, ris_user: Vec<RisUserPath>) -> Result<Self> {
        if ris_user.is_empty() {
            return Err(Error::NoPaths);
        }
        if scenario == Scenario::Los && ris_user.len() != 1 {
            return Err(Error::LosPathCount(ris_user.len()));
        }
        check_delay(bs_ris.delay_s)?;
        for p in &ris_user {
            check_delay(p.delay_s)?;
        }
        Ok(Self {
            bs_ris,
            ris_user,
            scenario,
        })
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn bs_ris(&self) -> &BsRisPath {
        &self.bs_ris
    }

    pub fn ris_user(&self) -> &[RisUserPath] {
        &self.ris_user
    }

    pub fn num_paths(&self) -> usize {
        self.ris_user.len()
    }

    /// The RIS -> user path of a line-of-sight set.
    pub fn los_path(&self, operation: &'static str) -> Result<&RisUserPath> {
        match self.scenario {
            Scenario::Los => Ok(&self.ris_user[0]),
            scenario => Err(Error::RequiresLos {
                operation,
                scenario,
            }),
        }
    }

    /// Same geometry and delays with every gain set to `1`.
    pub fn with_unit_gains(&self) -> Self {
        let mut out = self.clone();
        out.bs_ris.gain = C64::new(1.0, 0.0);
        for p in &mut out.ris_user {
            p.gain = C64::new(1.0, 0.0);
        }
        out
    }

    /// Multiplies every gain by `factor`.
    pub fn scale_gains(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.bs_ris.gain *= factor;
        for p in &mut out.ris_user {
            p.gain *= factor;
        }
        out
    }

    pub fn has_unit_gains(&self) -> bool {
        let one = C64::new(1.0, 0.0);
        self.bs_ris.gain == one && self.ris_user.iter().all(|p| p.gain == one)
    }

    /// RIS-side BS -> RIS spatial angle at `f_hz`.
    pub fn bs_ris_spatial_angle(&self, f_hz: f64, carrier_hz: f64) -> f64 {
        spatial_angle(f_hz, self.bs_ris.aoa_rad, carrier_hz)
    }

    /// The `1 x M` RIS -> user channel at an arbitrary frequency.
    pub fn ris_user_channel_at(&self, f_hz: f64, carrier_hz: f64, m: usize) -> RowDVector<C64> {
        let l = self.ris_user.len() as f64;
        let norm = match self.scenario {
            Scenario::Los => (m as f64).sqrt(),
            Scenario::Nlos => (m as f64 / l).sqrt(),
        };
        let mut h = RowDVector::<C64>::zeros(m);
        for p in &self.ris_user {
            let coef = norm * p.gain * delay_factor(p.delay_s, f_hz);
            let a = steering(m, spatial_angle(f_hz, p.angle_rad, carrier_hz));
            for (hm, am) in h.iter_mut().zip(a.iter()) {
                *hm += coef * am.conj();
            }
        }
        h
    }

    /// The `M x N` BS -> RIS channel at an arbitrary frequency.
    pub fn bs_ris_channel_at(&self, f_hz: f64, carrier_hz: f64, m: usize, n: usize) -> DMatrix<C64> {
        let coef = ((m * n) as f64).sqrt() * self.bs_ris.gain * delay_factor(self.bs_ris.delay_s, f_hz);
        let a_ris = steering(m, spatial_angle(f_hz, self.bs_ris.aoa_rad, carrier_hz));
        let a_bs = steering(n, spatial_angle(f_hz, self.bs_ris.aod_rad, carrier_hz));
        (a_ris * coef) * a_bs.adjoint()
    }
}

#[inline]
fn delay_factor(delay_s: f64, f_hz: f64) -> C64 {
    C64::from_polar(1.0, -TAU * delay_s * f_hz)
}

fn sample_angle<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    // (0, 2π]
    TAU * (1.0 - rng.random::<f64>())
}

fn sample_delay<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    MAX_DELAY_S * (1.0 - rng.random::<f64>())
}

fn sample_gain<R: Rng + ?Sized>(rng: &mut R, mode: GainMode) -> C64 {
    match mode {
        GainMode::Unit => C64::new(1.0, 0.0),
        GainMode::Random => {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        }
    }
}

/// Draws one realization. Line-of-sight always gets a single RIS -> user path.
pub fn sample_path_set<R: Rng + ?Sized>(
    rng: &mut R,
    scenario: Scenario,
    num_paths: usize,
    gain_mode: GainMode,
) -> Result<PathSet> {
    if num_paths == 0 {
        return Err(Error::NoPaths);
    }
    let count = match scenario {
        Scenario::Los => 1,
        Scenario::Nlos => num_paths,
    };
    let bs_ris = BsRisPath {
        aoa_rad: sample_angle(rng),
        aod_rad: sample_angle(rng),
        gain: sample_gain(rng, gain_mode),
        delay_s: sample_delay(rng),
    };
    let ris_user = (0..count)
        .map(|_| RisUserPath {
            angle_rad: sample_angle(rng),
            gain: sample_gain(rng, gain_mode),
            delay_s: sample_delay(rng),
        })
        .collect();
    PathSet::new(scenario, bs_ris, ris_user)
}

/// Per-subcarrier channels of one realization.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    bs_ris: Vec<DMatrix<C64>>,
    ris_user: Vec<RowDVector<C64>>,
    grid: FrequencyGrid,
    paths: PathSet,
    bs_antennas: usize,
    ris_elements: usize,
}

impl ChannelRealization {
    /// `H_BR,k`, one `M x N` matrix per subcarrier.
    pub fn bs_ris(&self) -> &[DMatrix<C64>] {
        &self.bs_ris
    }

    /// `h_Ru,k`, one `1 x M` row per subcarrier.
    pub fn ris_user(&self) -> &[RowDVector<C64>] {
        &self.ris_user
    }

    pub fn grid(&self) -> &FrequencyGrid {
        &self.grid
    }

    pub fn paths(&self) -> &PathSet {
        &self.paths
    }

    pub fn bs_antennas(&self) -> usize {
        self.bs_antennas
    }

    pub fn ris_elements(&self) -> usize {
        self.ris_elements
    }

    pub fn num_subcarriers(&self) -> usize {
        self.ris_user.len()
    }
}

/// Evaluates the path set on every subcarrier of `grid`.
pub fn gen_channels(
    paths: &PathSet,
    grid: &FrequencyGrid,
    bs_antennas: usize,
    ris_elements: usize,
) -> Result<ChannelRealization> {
    if bs_antennas == 0 {
        return Err(Error::EmptyDimension("BS antenna count"));
    }
    if ris_elements == 0 {
        return Err(Error::EmptyDimension("RIS element count"));
    }
    let fc = grid.carrier_hz();
    let bs_ris = grid
        .frequencies()
        .iter()
        .map(|&f| paths.bs_ris_channel_at(f, fc, ris_elements, bs_antennas))
        .collect();
    let ris_user = grid
        .frequencies()
        .iter()
        .map(|&f| paths.ris_user_channel_at(f, fc, ris_elements))
        .collect();
    Ok(ChannelRealization {
        bs_ris,
        ris_user,
        grid: grid.clone(),
        paths: paths.clone(),
        bs_antennas,
        ris_elements,
    })
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Smallest absolute distance between two angles on the circle.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    let d = wrap_phase(a - b);
    d.min(TAU - d)
}
