//! One-shot design report: the three design steps applied to a scenario.
//!
//! Step 1 bounds the dimming interval by the illuminance standard, step 2
//! bounds the bit rate by the channel delay spread, step 3 selects the
//! minimum code length per dimming level from the Monte Carlo engine at the
//! internally computed channel SNR, and the TCM section reports the coding
//! gains available on top.

use crate::channel::{delay_spread, impulse_response};
use crate::mc::{min_code_length, CodeLengthDecision, McConfig};
use crate::modem::{make_scheme, max_bit_rate, weight_for_dimming};
use crate::noise::snr_db;
use crate::photometry::{dimming_interval, DimmingInterval, DimmingLevel};
use crate::scenario::ScenarioConfig;
use crate::tcm::{coded_scheme, coding_gain_db};
use crate::Result;
use serde::Serialize;

/// Illuminance band of the office lighting standard, lux.
pub const STANDARD_LUX_MIN: f64 = 200.0;
pub const STANDARD_LUX_MAX: f64 = 800.0;

/// Pre-FEC BER threshold used by the code-length selection.
pub const FEC_BER_THRESHOLD: f64 = 3e-3;

/// Default candidate code lengths.
pub const DEFAULT_CANDIDATES: [usize; 5] = [8, 16, 32, 64, 128];

#[derive(Debug, Clone, Serialize)]
pub struct ChannelSection {
    pub h_los0: f64,
    pub h_nlos0: f64,
    pub h0: f64,
    pub mean_delay_s: f64,
    pub rms_delay_spread_s: f64,
    pub max_isi_free_rate_bps: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DimmingPlan {
    pub perceived_percent: f64,
    pub channel_snr_db: f64,
    pub oppm_max_bit_rate_bps: f64,
    pub decision: CodeLengthDecision,
}

#[derive(Debug, Clone, Serialize)]
pub struct TcmSection {
    /// Base alphabet size the recommendation is computed for.
    pub base_l: usize,
    pub states: usize,
    pub d_c: u32,
    pub coding_gain_db_exact: f64,
    pub coding_gain_db_approx: f64,
}

/// The complete design summary.
#[derive(Debug, Clone, Serialize)]
pub struct DesignReport {
    pub dimming_interval: DimmingInterval,
    pub channel: ChannelSection,
    pub plans: Vec<DimmingPlan>,
    pub tcm: TcmSection,
    pub rng_seed: u64,
}

/// Runs the full design flow on a scenario.
///
/// `perceived_levels` defaults to the four studied dimming levels when
/// empty. The code-length selection uses the noise module's channel SNR at
/// each level.
pub fn design_report(
    config: &ScenarioConfig,
    perceived_levels: &[f64],
    mc: &McConfig,
) -> Result<DesignReport> {
    let levels: Vec<f64> = if perceived_levels.is_empty() {
        vec![35.0, 50.0, 75.0, 86.0]
    } else {
        perceived_levels.to_vec()
    };

    let interval = dimming_interval(
        config,
        config.receiver.position,
        STANDARD_LUX_MIN,
        STANDARD_LUX_MAX,
    )?;

    let h = impulse_response(config);
    let ds = delay_spread(&h)?;
    let channel = ChannelSection {
        h_los0: h.h_los0,
        h_nlos0: h.h_nlos0,
        h0: h.h0(),
        mean_delay_s: ds.mean_delay,
        rms_delay_spread_s: ds.rms_spread,
        max_isi_free_rate_bps: ds.max_isi_free_rate,
    };

    let mut plans = Vec::with_capacity(levels.len());
    for &p in &levels {
        let dimming = DimmingLevel::from_perceived_percent(p)?;
        // Representative scheme at this level for the SNR bandwidth contract.
        let w32 = weight_for_dimming(32, p)?;
        let scheme = make_scheme(32, w32)?;
        let snr = snr_db(config, dimming, &scheme, &h);
        let decision =
            min_code_length(p, &DEFAULT_CANDIDATES, snr, FEC_BER_THRESHOLD, mc)?;
        let rate_scheme = decision
            .chosen_n
            .map(|n| -> Result<f64> {
                let w = weight_for_dimming(n, p)?;
                Ok(max_bit_rate(&make_scheme(n, w)?, config.modulation_bandwidth))
            })
            .transpose()?
            .unwrap_or(0.0);
        plans.push(DimmingPlan {
            perceived_percent: p,
            channel_snr_db: snr,
            oppm_max_bit_rate_bps: rate_scheme,
            decision,
        });
    }

    // TCM recommendation at the half-duty operating point: deepest of the
    // studied partitions of the 2L alphabet.
    let base = make_scheme(16, 8)?;
    let coded = coded_scheme(&base, 8)?;
    let tcm = TcmSection {
        base_l: base.l,
        states: coded.states,
        d_c: coded.d_c,
        coding_gain_db_exact: coding_gain_db(base.l, coded.d_c, true)?,
        coding_gain_db_approx: coding_gain_db(base.l, coded.d_c, false)?,
    };

    Ok(DesignReport {
        dimming_interval: interval,
        channel,
        plans,
        tcm,
        rng_seed: mc.rng_seed,
    })
}
