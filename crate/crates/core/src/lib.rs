//! Link-level design toolkit for dimmable indoor visible-light communication.
//!
//! The crate models an office-room VLC downlink built on overlapping pulse
//! position modulation (OPPM), where dimming is controlled by the code weight
//! of the symbols rather than by the LED drive level. It covers the full
//! design flow for such a system:
//!
//! - **scenario** - room, LED fixtures, photodetector and wall reflectors,
//!   with the built-in office preset used throughout the crate.
//! - **photometry** - horizontal illuminance under dimming, room illuminance
//!   maps, and the dimming interval compatible with office lighting standards
//!   (200–800 lux).
//! - **channel** - line-of-sight DC gain, first-reflection impulse response,
//!   RMS delay spread and the ISI-free bit-rate bound `1/(10D)`.
//! - **noise** - shot / thermal / multipath-ISI noise budget and electrical
//!   SNR as a function of dimming.
//! - **modem** - OPPM symbol tables, weight-based dimming, encoder/decoder,
//!   bandwidth/rate/spectral-efficiency formulas, and analytic BER.
//! - **tcm** - set partitioning of OPPM alphabets and the coding gain of
//!   trellis-coded 2L-OPPM.
//! - **mc** - deterministic, seedable Monte Carlo BER engine and the
//!   minimum-code-length selection against a FEC threshold.
//! - **report** - one-shot design report combining all of the above.
//!
//! The `oppm-vlc` binary exposes each step as a subcommand emitting
//! plot-ready CSV and machine-readable JSON.

pub mod channel;
pub mod geometry;
pub mod math;
pub mod mc;
pub mod modem;
pub mod noise;
pub mod photometry;
pub mod report;
pub mod scenario;
pub mod tcm;

pub use channel::{delay_spread, impulse_response, lambertian_mode, DelaySpreadResult, ImpulseResponse};
pub use geometry::Vec3;
pub use mc::{ber_sweep, min_code_length, simulate_ber, BerCurve, CodeLengthDecision, McConfig};
pub use modem::{make_scheme, weight_for_dimming, OppmScheme};
pub use noise::{noise_budget, snr_db, NoiseBudget, NoiseParams};
pub use photometry::{dimming_interval, illuminance_at, illuminance_map, DimmingLevel};
pub use scenario::{office_scenario, Fixture, Receiver, Room, ScenarioConfig};
pub use tcm::{coded_scheme, coding_gain_db, set_partition, TcmScheme};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Elementary charge, coulombs.
pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;

/// Errors produced by the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A weight of 0 or n leaves the LED constantly off/on; no symbols exist.
    #[error("no data can be transmitted: {0}")]
    NoData(String),
    /// A scenario file could not be parsed.
    #[error("scenario parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(message: impl Into<String>) -> Self {
        Error::Domain(message.into())
    }
}
