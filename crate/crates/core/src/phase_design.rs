//! RIS phase-profile designers.
//!
//! A passive RIS applies one phase per element to every subcarrier, so each
//! designer produces a single [`PhaseProfile`]:
//!
//! * [`design_ideal`] aligns every element for one subcarrier and is optimal
//!   there (line-of-sight only).
//! * [`design_central`] aligns for the carrier frequency using only the
//!   physical angles. It is also the mean of the per-subcarrier ideal phases.
//! * [`design_indexed`] aligns for one chosen subcarrier and reuses it
//!   everywhere.
//! * [`design_random`] draws i.i.d. uniform phases.
//! * [`design_mccm`] splits the profile into a receive part, which makes the
//!   BS -> RIS response flat at the carrier, and a forward part taken from the
//!   principal eigenvector of the subcarrier-averaged RIS -> user covariance.

use std::f64::consts::{PI, TAU};
use std::fmt;

use nalgebra::{DMatrix, DVector, RowDVector, SymmetricEigen};
use rand::Rng;

use crate::channel::{circular_distance, ChannelRealization, FrequencyGrid, PathSet, C64};
use crate::error::{Error, Result};
use crate::rate_eval::{subcarrier_rate, sum_rate, LinkBudget};

/// Which designer produced a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeTag {
    Ideal(usize),
    Central,
    Random,
    Indexed(usize),
    Mccm,
}

impl fmt::Display for SchemeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeTag::Ideal(k) => write!(f, "ideal(k={k})"),
            SchemeTag::Central => f.write_str("central"),
            SchemeTag::Random => f.write_str("random"),
            SchemeTag::Indexed(k) => write!(f, "indexed(k={k})"),
            SchemeTag::Mccm => f.write_str("mccm"),
        }
    }
}

/// Per-element RIS phases in radians.
///
/// Element `m` multiplies the incident signal by `exp(j * phases[m])`, so the
/// reflection matrix is unit-modulus on its diagonal by construction. Phases
/// are kept unwrapped; compare profiles with [`PhaseProfile::approx_eq_mod_2pi`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    phases_rad: Vec<f64>,
    scheme: SchemeTag,
}

impl PhaseProfile {
    pub fn new(phases_rad: Vec<f64>, scheme: SchemeTag) -> Self {
        Self { phases_rad, scheme }
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases_rad
    }

    pub fn scheme(&self) -> SchemeTag {
        self.scheme
    }

    pub fn len(&self) -> usize {
        self.phases_rad.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases_rad.is_empty()
    }

    /// Diagonal entries `exp(j * phase)`.
    pub fn coefficients(&self) -> DVector<C64> {
        DVector::from_iterator(
            self.len(),
            self.phases_rad.iter().map(|&p| C64::from_polar(1.0, p)),
        )
    }

    /// The full `M x M` reflection matrix.
    pub fn reflection_matrix(&self) -> DMatrix<C64> {
        DMatrix::from_diagonal(&self.coefficients())
    }

    /// Adds `offset` to every phase.
    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            phases_rad: self.phases_rad.iter().map(|p| p + offset).collect(),
            scheme: self.scheme,
        }
    }

    pub fn approx_eq_mod_2pi(&self, other: &Self, tol: f64) -> bool {
        self.len() == other.len()
            && self
                .phases_rad
                .iter()
                .zip(&other.phases_rad)
                .all(|(a, b)| circular_distance(*a, *b) <= tol)
    }
}

fn check_elements(m: usize) -> Result<()> {
    if m == 0 {
        Err(Error::EmptyDimension("RIS element count"))
    } else {
        Ok(())
    }
}

fn aligned_phases(m: usize, phase_step: f64) -> Vec<f64> {
    (0..m).map(|i| TAU * i as f64 * phase_step).collect()
}

/// Per-subcarrier optimum: `phases[m] = 2π m (φ_Ru,k - φ_BR,k)`.
pub fn design_ideal(paths: &PathSet, grid: &FrequencyGrid, m: usize, k: usize) -> Result<PhaseProfile> {
    let phases = ideal_phases(paths, grid, m, k, "ideal design")?;
    Ok(PhaseProfile::new(phases, SchemeTag::Ideal(k)))
}

fn ideal_phases(
    paths: &PathSet,
    grid: &FrequencyGrid,
    m: usize,
    k: usize,
    operation: &'static str,
) -> Result<Vec<f64>> {
    check_elements(m)?;
    let ru = paths.los_path(operation)?;
    let f = grid.frequency(k)?;
    let fc = grid.carrier_hz();
    let step = crate::channel::spatial_angle(f, ru.angle_rad, fc) - paths.bs_ris_spatial_angle(f, fc);
    Ok(aligned_phases(m, step))
}

/// Carrier-frequency alignment from physical angles only:
/// `phases[m] = π m (sin ϑ_Ru - sin θ_BR)`.
pub fn design_central(paths: &PathSet, m: usize) -> Result<PhaseProfile> {
    check_elements(m)?;
    let ru = paths.los_path("central design")?;
    let diff = ru.angle_rad.sin() - paths.bs_ris().aoa_rad.sin();
    let phases = (0..m).map(|i| PI * i as f64 * diff).collect();
    Ok(PhaseProfile::new(phases, SchemeTag::Central))
}

/// Ideal profile of subcarrier `k`, applied to all subcarriers.
pub fn design_indexed(paths: &PathSet, grid: &FrequencyGrid, m: usize, k: usize) -> Result<PhaseProfile> {
    let phases = ideal_phases(paths, grid, m, k, "indexed design")?;
    Ok(PhaseProfile::new(phases, SchemeTag::Indexed(k)))
}

pub fn design_random<R: Rng + ?Sized>(rng: &mut R, m: usize) -> PhaseProfile {
    let phases = (0..m).map(|_| TAU * rng.random::<f64>()).collect();
    PhaseProfile::new(phases, SchemeTag::Random)
}

/// Mean channel covariance `(1/K) Σ_k h_kᴴ h_k` of the RIS -> user rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Mccm {
    matrix: DMatrix<C64>,
}

impl Mccm {
    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Largest elementwise `|A - Aᴴ|`.
    pub fn hermitian_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint())
            .iter()
            .map(|x| x.norm())
            .fold(0.0, f64::max)
    }
}

pub fn mean_channel_covariance(rows: &[RowDVector<C64>]) -> Result<Mccm> {
    let first = rows.first().ok_or(Error::EmptyCovariance)?;
    let m = first.len();
    check_elements(m)?;
    let mut acc = DMatrix::<C64>::zeros(m, m);
    for h in rows {
        if h.len() != m {
            return Err(Error::DimensionMismatch {
                context: "covariance rows",
                expected: m,
                actual: h.len(),
            });
        }
        acc += h.adjoint() * h;
    }
    acc /= C64::new(rows.len() as f64, 0.0);
    Ok(Mccm { matrix: acc })
}

/// Unit-norm eigenvector for the largest eigenvalue of an [`Mccm`].
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalDirection {
    pub vector: DVector<C64>,
    pub eigenvalue: f64,
    /// Set when the top eigenvalue is repeated (relative gap below `1e-9`);
    /// `vector` is then just one member of the top eigenspace.
    pub degenerate: bool,
}

const DEGENERACY_RTOL: f64 = 1e-9;

pub fn principal_direction(mccm: &Mccm) -> PrincipalDirection {
    let eig = SymmetricEigen::new(mccm.matrix.clone());
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = order[0];
    let eigenvalue = eig.eigenvalues[top];
    let degenerate = order
        .get(1)
        .is_some_and(|&i| eigenvalue - eig.eigenvalues[i] <= DEGENERACY_RTOL * eigenvalue.abs());

    let mut vector: DVector<C64> = eig.eigenvectors.column(top).into_owned();
    // Fix the global phase: the largest-magnitude entry becomes real positive.
    if let Some(pivot) = vector.iter().copied().max_by(|a, b| a.norm().total_cmp(&b.norm())) {
        if pivot.norm() > 0.0 {
            let rot = pivot.conj() / pivot.norm();
            vector *= rot;
        }
    }
    let norm = vector.norm();
    if norm > 0.0 {
        vector /= C64::new(norm, 0.0);
    }
    PrincipalDirection {
        vector,
        eigenvalue,
        degenerate,
    }
}

/// Keeps only the argument of each entry. Exactly-zero entries get phase 0.
pub fn phase_extraction(v: &DVector<C64>) -> Vec<f64> {
    v.iter()
        .enumerate()
        .map(|(m, x)| {
            if *x == C64::new(0.0, 0.0) {
                log::debug!("phase extraction: entry {m} is zero, using phase 0");
                0.0
            } else {
                x.arg()
            }
        })
        .collect()
}

/// Builds `Φ = Φ₂ Φ₁`.
///
/// `Φ₁` has phases `-2π m φ_BR`, turning the BS -> RIS response at spatial
/// angle `bs_ris_phi` into a flat vector. `Φ₂` is the phase of `direction` or
/// of its conjugate, whichever `score` prefers.
pub(crate) fn compose_with_receive(
    bs_ris_phi: f64,
    direction: &DVector<C64>,
    scheme: SchemeTag,
    mut score: impl FnMut(&PhaseProfile) -> Result<f64>,
) -> Result<PhaseProfile> {
    let forward = phase_extraction(direction);
    let receive = aligned_phases(forward.len(), -bs_ris_phi);
    let build = |sign: f64| {
        PhaseProfile::new(
            receive.iter().zip(&forward).map(|(r, f)| r + sign * f).collect(),
            scheme,
        )
    };
    let plain = build(1.0);
    let conjugated = build(-1.0);
    if score(&conjugated)? > score(&plain)? {
        Ok(conjugated)
    } else {
        Ok(plain)
    }
}

/// Result of [`design_mccm`].
#[derive(Debug, Clone, PartialEq)]
pub struct MccmDesign {
    pub profile: PhaseProfile,
    pub direction: PrincipalDirection,
}

/// Covariance-based common profile for any RIS -> user scenario.
pub fn design_mccm(channels: &ChannelRealization, budget: &LinkBudget) -> Result<MccmDesign> {
    let mccm = mean_channel_covariance(channels.ris_user())?;
    let direction = principal_direction(&mccm);
    let fc = channels.grid().carrier_hz();
    let phi = channels.paths().bs_ris_spatial_angle(fc, fc);
    let profile = compose_with_receive(phi, &direction.vector, SchemeTag::Mccm, |p| {
        Ok(sum_rate(channels, p, budget)?.sum_rate_bits)
    })?;
    Ok(MccmDesign { profile, direction })
}

/// Where a single-subcarrier covariance design takes its channel from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceSource {
    /// The RIS -> user channel evaluated at the carrier itself.
    Carrier,
    Subcarrier(usize),
}

/// Covariance design from one frequency's channel, applied to all subcarriers.
///
/// The single-frequency covariance `hᴴh` is rank one with principal
/// direction `hᴴ / ‖h‖`, so no eigen-decomposition is needed. `Φ₁` uses the
/// BS -> RIS spatial angle at the same frequency.
pub fn design_covariance_at(
    channels: &ChannelRealization,
    source: CovarianceSource,
    budget: &LinkBudget,
) -> Result<PhaseProfile> {
    let grid = channels.grid();
    let fc = grid.carrier_hz();
    let paths = channels.paths();
    let (f, h, scheme) = match source {
        CovarianceSource::Carrier => (
            fc,
            paths.ris_user_channel_at(fc, fc, channels.ris_elements()),
            SchemeTag::Central,
        ),
        CovarianceSource::Subcarrier(k) => (
            grid.frequency(k)?,
            channels.ris_user()[k].clone(),
            SchemeTag::Indexed(k),
        ),
    };
    let direction = h.adjoint();
    compose_with_receive(paths.bs_ris_spatial_angle(f, fc), &direction, scheme, |p| {
        Ok(sum_rate(channels, p, budget)?.sum_rate_bits)
    })
}

/// Per-subcarrier covariance design, scored on subcarrier `k` alone.
pub(crate) fn design_covariance_for_subcarrier(
    channels: &ChannelRealization,
    k: usize,
    budget: &LinkBudget,
) -> Result<PhaseProfile> {
    let grid = channels.grid();
    let fc = grid.carrier_hz();
    let f = grid.frequency(k)?;
    let h_ru = &channels.ris_user()[k];
    let h_br = &channels.bs_ris()[k];
    compose_with_receive(
        channels.paths().bs_ris_spatial_angle(f, fc),
        &h_ru.adjoint(),
        SchemeTag::Ideal(k),
        |p| {
            let eff = crate::rate_eval::effective_channel(h_ru, p, h_br)?;
            Ok(subcarrier_rate(&eff, budget))
        },
    )
}
