//! Beam-squint aware phase-shift design for RIS-aided wideband mmWave OFDM.
//!
//! A reconfigurable intelligent surface applies one phase per element to the
//! whole band, while the spatial angle of every path drifts with frequency.
//! This crate models that mismatch and evaluates common-profile designs
//! against per-subcarrier alignment:
//!
//! * [`channel`]: frequency grid, ULA responses and per-subcarrier channels.
//! * [`phase_design`]: ideal, central, index-based, random and
//!   covariance-based (MCCM) profiles.
//! * [`rate_eval`]: MRT effective channels, achievable rates, the `z_k`
//!   array factor and the Jensen upper bound.
//! * [`experiments`]: seeded, paired Monte Carlo sweeps.
//! * [`cli`]: argument parsing, CSV output and the self-test.
//!
//! ```
//! use ris_squint::channel::{build_frequency_grid, gen_channels, sample_path_set, GainMode, Scenario};
//! use ris_squint::phase_design::design_central;
//! use ris_squint::rate_eval::{ideal_rate, sum_rate, LinkBudget};
//! use rand::SeedableRng;
//!
//! let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
//! let paths = sample_path_set(&mut rng, Scenario::Los, 1, GainMode::Unit)?;
//! let grid = build_frequency_grid(28e9, 2e9, 128)?;
//! let channels = gen_channels(&paths, &grid, 64, 64)?;
//! let budget = LinkBudget::from_snr_db(10.0);
//!
//! let central = sum_rate(&channels, &design_central(&paths, 64)?, &budget)?;
//! let ideal = ideal_rate(&channels, &budget)?;
//! assert!(central.sum_rate_bits <= ideal.sum_rate_bits);
//! assert!(central.sum_rate_bits <= central.upper_bound_bits.unwrap());
//! # Ok::<(), ris_squint::Error>(())
//! ```

pub mod channel;
pub mod cli;
mod error;
pub mod experiments;
pub mod phase_design;
pub mod rate_eval;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/channel.md")]
    mod channel {}
    #[doc = include_str!("../../../book/src/los_design.md")]
    mod los_design {}
    #[doc = include_str!("../../../book/src/mccm.md")]
    mod mccm {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
