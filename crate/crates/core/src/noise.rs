//! Noise budget and electrical SNR.
//!
//! The total noise at the decision point is composed of three terms:
//!
//! ```text
//! sigma2 = sigma2_shot + sigma2_thermal + (R P_isi)^2
//! ```
//!
//! with `sigma2_shot = 2 q (R P_r + I_bg) B` driven by the received optical
//! power and the ambient-light photocurrent, a flat thermal PSD integrated
//! over the same bandwidth, and the first-reflection power `P_isi` entering
//! as a squared interference current. The equivalent noise PSD is
//! `N0 = sigma2 / B` and the electrical SNR
//!
//! ```text
//! SNR = (R H_los(0) P_t delta)^2 / (N0 B_oppm)
//! ```
//!
//! counts only the LOS gain in the numerator. `B_oppm` is the scheme's
//! bandwidth requirement at its maximum achievable bit rate under the
//! scenario's modulation bandwidth, which by the rate algebra equals that
//! modulation bandwidth for every `(n, w)`; dimming therefore moves the SNR
//! only through the transmitted power.
//!
//! The effective thermal PSD of the office preset is calibrated once at the
//! 50% perceived-brightness point and committed with the preset; the SNR
//! values at the other dimming levels then follow with no remaining freedom.

use crate::channel::ImpulseResponse;
use crate::math::linear_to_db;
use crate::modem::{bandwidth, max_bit_rate, OppmScheme};
use crate::photometry::DimmingLevel;
use crate::scenario::ScenarioConfig;
use crate::{Error, Result, ELECTRON_CHARGE};
use serde::{Deserialize, Serialize};

/// Boltzmann constant, J/K.
const BOLTZMANN: f64 = 1.380_649e-23;

/// Receiver noise parameters.
///
/// When `thermal_psd_override` is unset, the thermal PSD comes from the flat
/// effective model `4 k T G F` (temperature, effective load/feedback
/// conductance, excess-noise factor).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Elementary charge, coulombs.
    pub electron_charge: f64,
    /// Thermal noise PSD, A^2/Hz; overrides the sub-model when set.
    pub thermal_psd_override: Option<f64>,
    /// Absolute temperature for the thermal sub-model, kelvin.
    pub temperature: f64,
    /// Effective load/feedback conductance, siemens.
    pub effective_conductance: f64,
    /// Excess-noise factor of the front end.
    pub noise_factor: f64,
}

impl Default for NoiseParams {
    fn default() -> Self {
        NoiseParams {
            electron_charge: ELECTRON_CHARGE,
            thermal_psd_override: None,
            temperature: 295.0,
            effective_conductance: 0.02,
            noise_factor: 1.0,
        }
    }
}

impl NoiseParams {
    /// Thermal PSD in A^2/Hz from the override or the sub-model.
    pub fn thermal_psd(&self) -> f64 {
        self.thermal_psd_override
            .unwrap_or(4.0 * BOLTZMANN * self.temperature * self.effective_conductance * self.noise_factor)
    }

    pub(crate) fn validate(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.electron_charge <= 0.0 {
            v.push("electron charge must be positive".to_string());
        }
        if self.temperature < 0.0
            || self.effective_conductance < 0.0
            || self.noise_factor < 0.0
            || self.thermal_psd_override.is_some_and(|p| p < 0.0)
        {
            v.push("thermal noise parameters must be nonnegative".to_string());
        }
        v
    }
}

/// Composition of the total noise at one operating point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct NoiseBudget {
    /// Shot-noise variance `2 q (R P_r + I_bg) B`, A^2.
    pub sigma2_shot: f64,
    /// Thermal variance `S_th B`, A^2.
    pub sigma2_thermal: f64,
    /// Multipath interference term `(R P_isi)^2`, A^2.
    pub isi_term: f64,
    /// Equivalent PSD `(shot + thermal + isi) / B`, A^2/Hz.
    pub n0: f64,
    /// Bandwidth the variances are integrated over, Hz.
    pub bandwidth: f64,
    /// Received LOS optical power at this dimming level, W.
    pub pr_los: f64,
    /// Received first-reflection optical power at this dimming level, W.
    pub pr_isi: f64,
}

impl NoiseBudget {
    /// Total noise variance, A^2.
    pub fn sigma2_total(&self) -> f64 {
        self.sigma2_shot + self.sigma2_thermal + self.isi_term
    }
}

/// Bandwidth the noise integrates over: the scheme's requirement at its
/// maximum rate under the scenario's modulation bandwidth.
pub fn operating_bandwidth(config: &ScenarioConfig, scheme: &OppmScheme) -> f64 {
    bandwidth(scheme, max_bit_rate(scheme, config.modulation_bandwidth))
}

/// Composes the three-term noise budget at a dimming level.
///
/// Received powers scale with the duty cycle (average transmitted power
/// under weight-based dimming); the ISI term uses the first-reflection DC
/// power with no temporal weighting.
pub fn noise_budget(
    config: &ScenarioConfig,
    dimming: DimmingLevel,
    scheme: &OppmScheme,
    h: &ImpulseResponse,
) -> NoiseBudget {
    let b = operating_bandwidth(config, scheme);
    let delta = dimming.duty_cycle();
    let r = config.receiver.responsivity;
    let pr_los = h.pr_los_full_on * delta;
    let pr_isi = h.pr_nlos_full_on * delta;
    let q = config.noise.electron_charge;

    let sigma2_shot = 2.0 * q * (r * (pr_los + pr_isi) + config.receiver.ambient_light_current) * b;
    let sigma2_thermal = config.noise.thermal_psd() * b;
    let isi_term = (r * pr_isi).powi(2);
    NoiseBudget {
        sigma2_shot,
        sigma2_thermal,
        isi_term,
        n0: (sigma2_shot + sigma2_thermal + isi_term) / b,
        bandwidth: b,
        pr_los,
        pr_isi,
    }
}

/// Electrical SNR in dB at a dimming level.
///
/// `(R P_los)^2 / (N0 B)` with the LOS-only received power in the numerator.
/// Returns negative infinity when no LOS path reaches the receiver.
pub fn snr_db(
    config: &ScenarioConfig,
    dimming: DimmingLevel,
    scheme: &OppmScheme,
    h: &ImpulseResponse,
) -> f64 {
    let budget = noise_budget(config, dimming, scheme, h);
    let num = (config.receiver.responsivity * budget.pr_los).powi(2);
    if num == 0.0 {
        return f64::NEG_INFINITY;
    }
    linear_to_db(num / (budget.n0 * budget.bandwidth))
}

/// One point of the SNR-versus-dimming sweep.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SnrPoint {
    pub perceived_percent: f64,
    pub duty_cycle: f64,
    pub snr_db: f64,
}

/// Sweeps the electrical SNR over perceived brightness for a code length.
pub fn snr_sweep(
    config: &ScenarioConfig,
    h: &ImpulseResponse,
    code_length: usize,
    perceived_percents: &[f64],
) -> Result<Vec<SnrPoint>> {
    perceived_percents
        .iter()
        .map(|&p| {
            let w = crate::modem::weight_for_dimming(code_length, p)?;
            let scheme = crate::modem::make_scheme(code_length, w)?;
            let dimming = DimmingLevel::from_perceived_percent(p)?;
            Ok(SnrPoint {
                perceived_percent: p,
                duty_cycle: dimming.duty_cycle(),
                snr_db: snr_db(config, dimming, &scheme, h),
            })
        })
        .collect()
}

/// Solves the thermal PSD that puts the SNR at `target_db` for the given
/// dimming level (the one-time calibration the preset value comes from).
///
/// Errors when shot and ISI noise alone already push the SNR below the
/// target, which would require a negative thermal PSD.
pub fn calibrate_thermal_psd(
    config: &ScenarioConfig,
    dimming: DimmingLevel,
    scheme: &OppmScheme,
    h: &ImpulseResponse,
    target_db: f64,
) -> Result<f64> {
    let budget = noise_budget(config, dimming, scheme, h);
    let num = (config.receiver.responsivity * budget.pr_los).powi(2);
    if num == 0.0 {
        return Err(Error::domain("no LOS power; cannot calibrate"));
    }
    let needed_total = num / crate::math::db_to_linear(target_db);
    let thermal = needed_total - budget.sigma2_shot - budget.isi_term;
    if thermal < 0.0 {
        return Err(Error::domain(format!(
            "target {target_db} dB unreachable: shot + ISI noise already exceeds the budget"
        )));
    }
    Ok(thermal / budget.bandwidth)
}
