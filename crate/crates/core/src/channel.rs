//! Optical channel model: line-of-sight DC gain, first-reflection response,
//! RMS delay spread and the ISI-free bit-rate bound.
//!
//! The LOS link of each LED contributes a single delta tap with the
//! generalised-Lambertian DC gain
//!
//! ```text
//! H_los(0) = A_r (m + 1) / (2 pi d^2) cos^m(phi) T_s g cos(psi),  psi <= FOV
//! ```
//!
//! First reflections are summed over square wall elements. Each
//! (LED, element) pair is a delta tap at delay `(d_s + d_rx)/c` with gain
//!
//! ```text
//! (m + 1) rho A_r dA / (2 pi^2 d_s^2 d_rx^2)
//!     cos^m(phi_s) cos(psi_s) T_s g cos(phi_rx) cos(psi_rx)
//! ```
//!
//! where the element re-emits as an ideal first-order Lambertian surface
//! (the 1/pi re-emission factor; the transmitter-side exponent `m` applies
//! only at the LED). Delay statistics are evaluated on the exact discrete
//! taps; no time binning enters the DC gain or delay-spread numbers. Binned
//! taps are produced separately for waveform export only.

use crate::geometry::Vec3;
use crate::scenario::{led_sources, wall_mesh, ScenarioConfig, SurfaceElement};
use crate::{Error, Result, SPEED_OF_LIGHT};
use rayon::prelude::*;
use serde::Serialize;

/// Bin width used when materialising NLOS taps for export, seconds.
pub const EXPORT_BIN_SECONDS: f64 = 1e-10;

/// One delta tap of the impulse response.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Tap {
    /// Propagation delay, seconds.
    pub delay: f64,
    /// DC-gain contribution, dimensionless.
    pub gain: f64,
}

/// Exact second-order statistics of a set of delta taps.
///
/// Sufficient for the delay-spread formulas without materialising the taps;
/// accumulated and merged in a fixed order so results are bit-reproducible
/// across worker counts.
#[derive(Debug, Clone, Copy, Default)]
pub struct TapMoments {
    pub sum_gain: f64,
    pub sum_g2: f64,
    pub sum_tg2: f64,
    pub sum_t2g2: f64,
}

impl TapMoments {
    fn add_tap(&mut self, delay: f64, gain: f64) {
        self.sum_gain += gain;
        let g2 = gain * gain;
        self.sum_g2 += g2;
        self.sum_tg2 += delay * g2;
        self.sum_t2g2 += delay * delay * g2;
    }

    fn merge(&mut self, other: &TapMoments) {
        self.sum_gain += other.sum_gain;
        self.sum_g2 += other.sum_g2;
        self.sum_tg2 += other.sum_tg2;
        self.sum_t2g2 += other.sum_t2g2;
    }
}

/// Assembled impulse response at a receiver position.
#[derive(Debug, Clone)]
pub struct ImpulseResponse {
    /// One tap per LED within the field of view.
    pub los_taps: Vec<Tap>,
    /// First-reflection taps binned to [`EXPORT_BIN_SECONDS`] for export.
    /// DC gains and delay statistics never use these.
    pub nlos_taps_binned: Vec<Tap>,
    /// LOS part of the channel DC gain.
    pub h_los0: f64,
    /// First-reflection part of the channel DC gain.
    pub h_nlos0: f64,
    /// Received optical power over the LOS paths at full brightness, watts
    /// (per-LED gains weighted by their LED's transmit power).
    pub pr_los_full_on: f64,
    /// Received optical power over first reflections at full brightness, W.
    pub pr_nlos_full_on: f64,
    /// Exact tap statistics over LOS plus unbinned NLOS taps.
    pub moments: TapMoments,
}

impl ImpulseResponse {
    /// Total channel DC gain `H(0) = H_los(0) + H_nlos(0)`.
    pub fn h0(&self) -> f64 {
        self.h_los0 + self.h_nlos0
    }
}

/// Mean delay, RMS delay spread and the ISI-free rate bound.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DelaySpreadResult {
    /// Mean delay of the squared response, seconds.
    pub mean_delay: f64,
    /// RMS delay spread, seconds.
    pub rms_spread: f64,
    /// `1/(10 D)`; `None` when the spread is zero (single tap).
    pub max_isi_free_rate: Option<f64>,
}

/// Lambert mode number `m = -1 / log2(cos(phi_half))` for a half-power
/// semi-angle in degrees.
pub fn lambertian_mode(phi_half_deg: f64) -> Result<f64> {
    if !(phi_half_deg > 0.0 && phi_half_deg < 90.0) {
        return Err(Error::domain(format!(
            "semi-angle at half power must lie in (0, 90) degrees, got {phi_half_deg}"
        )));
    }
    Ok(-1.0 / phi_half_deg.to_radians().cos().log2())
}

/// Receiver-side optics needed by the gain formulas.
#[derive(Debug, Clone, Copy)]
pub struct ReceiverOptics {
    pub position: Vec3,
    pub area: f64,
    pub cos_fov: f64,
    pub filter_gain: f64,
    pub concentrator_gain: f64,
}

impl ReceiverOptics {
    pub fn from_config(config: &ScenarioConfig) -> Self {
        Self::at_position(config, config.receiver.position)
    }

    pub fn at_position(config: &ScenarioConfig, position: Vec3) -> Self {
        ReceiverOptics {
            position,
            area: config.receiver.area,
            cos_fov: config.receiver.fov.to_radians().cos(),
            filter_gain: config.receiver.optical_filter_gain,
            concentrator_gain: config.receiver.concentrator_gain,
        }
    }
}

/// LOS DC gain of a single downward-facing LED at `source` with Lambert mode
/// `m`, into an upward-facing receiver. Zero outside the field of view.
pub fn los_gain(source: Vec3, lambertian_mode: f64, rx: &ReceiverOptics) -> f64 {
    let v = source - rx.position;
    let d = v.norm();
    if d == 0.0 {
        return 0.0;
    }
    let cos_phi = v.z / d; // irradiance angle at the LED (normal = -z)
    let cos_psi = v.z / d; // incidence angle at the receiver (normal = +z)
    if cos_phi <= 0.0 || cos_psi + 1e-15 < rx.cos_fov {
        return 0.0;
    }
    rx.area * (lambertian_mode + 1.0) / (2.0 * std::f64::consts::PI * d * d)
        * cos_phi.powf(lambertian_mode)
        * rx.filter_gain
        * rx.concentrator_gain
        * cos_psi
}

/// Per-LED LOS taps within the field of view plus the power-weighted sum.
fn los_taps(config: &ScenarioConfig, rx: &ReceiverOptics) -> (Vec<Tap>, f64) {
    let mut power = 0.0;
    let taps = led_sources(config)
        .iter()
        .filter_map(|led| {
            let g = los_gain(led.position, led.lambertian_mode, rx);
            if g > 0.0 {
                power += g * led.power;
                let d = (led.position - rx.position).norm();
                Some(Tap {
                    delay: d / SPEED_OF_LIGHT,
                    gain: g,
                })
            } else {
                None
            }
        })
        .collect();
    (taps, power)
}

/// First-reflection contribution of one (LED, element) pair; `None` when any
/// gate (orientation or field of view) zeroes it.
fn nlos_pair_gain(
    led_pos: Vec3,
    m: f64,
    el: &SurfaceElement,
    rx: &ReceiverOptics,
) -> Option<(f64, f64)> {
    let v1 = el.position - led_pos;
    let d1 = v1.norm();
    let cos_phi_s = -v1.z / d1;
    if cos_phi_s <= 0.0 {
        return None;
    }
    let cos_psi_s = -v1.dot(el.normal) / d1;
    if cos_psi_s <= 0.0 {
        return None;
    }
    let v2 = rx.position - el.position;
    let d2 = v2.norm();
    let cos_phi_r = v2.dot(el.normal) / d2;
    if cos_phi_r <= 0.0 {
        return None;
    }
    let cos_psi_r = -v2.z / d2;
    if cos_psi_r <= 0.0 || cos_psi_r + 1e-15 < rx.cos_fov {
        return None;
    }
    let pi = std::f64::consts::PI;
    let gain = (m + 1.0) * el.reflectance * rx.area * el.area
        / (2.0 * pi * pi * d1 * d1 * d2 * d2)
        * cos_phi_s.powf(m)
        * cos_psi_s
        * rx.filter_gain
        * rx.concentrator_gain
        * cos_phi_r
        * cos_psi_r;
    Some(((d1 + d2) / SPEED_OF_LIGHT, gain))
}

struct NlosChunk {
    moments: TapMoments,
    power: f64,
    bins: Vec<(i64, f64)>, // sorted by bin index
}

/// Streams every (LED, wall element) pair, returning exact moments, the
/// power-weighted gain sum and export bins. Parallel over element chunks;
/// chunk results are merged in chunk order so the outcome does not depend on
/// the worker count.
fn nlos_scan(config: &ScenarioConfig, rx: &ReceiverOptics) -> (TapMoments, f64, Vec<Tap>) {
    let leds = led_sources(config);
    let elements = wall_mesh(&config.room);

    let chunks: Vec<NlosChunk> = elements
        .par_chunks(256)
        .map(|els| {
            let mut moments = TapMoments::default();
            let mut power = 0.0;
            let mut bins = std::collections::BTreeMap::<i64, f64>::new();
            for el in els {
                // Receiver-side factors do not depend on the LED; gate the
                // whole element early.
                let v2 = rx.position - el.position;
                let d2 = v2.norm();
                let cos_phi_r = v2.dot(el.normal) / d2;
                let cos_psi_r = -v2.z / d2;
                if cos_phi_r <= 0.0 || cos_psi_r <= 0.0 || cos_psi_r + 1e-15 < rx.cos_fov {
                    continue;
                }
                for led in &leds {
                    if let Some((delay, gain)) =
                        nlos_pair_gain(led.position, led.lambertian_mode, el, rx)
                    {
                        moments.add_tap(delay, gain);
                        power += gain * led.power;
                        let bin = (delay / EXPORT_BIN_SECONDS).round() as i64;
                        *bins.entry(bin).or_insert(0.0) += gain;
                    }
                }
            }
            NlosChunk {
                moments,
                power,
                bins: bins.into_iter().collect(),
            }
        })
        .collect();

    let mut moments = TapMoments::default();
    let mut power = 0.0;
    let mut merged = std::collections::BTreeMap::<i64, f64>::new();
    for c in &chunks {
        moments.merge(&c.moments);
        power += c.power;
        for &(bin, g) in &c.bins {
            *merged.entry(bin).or_insert(0.0) += g;
        }
    }
    let taps = merged
        .into_iter()
        .map(|(bin, gain)| Tap {
            delay: bin as f64 * EXPORT_BIN_SECONDS,
            gain,
        })
        .collect();
    (moments, power, taps)
}

/// Materialises the unbinned NLOS taps, one per (LED, element) pair.
///
/// Intended for small configurations; the assembled response and the delay
/// statistics never need this.
pub fn nlos_taps_dense(config: &ScenarioConfig) -> Vec<Tap> {
    let rx = ReceiverOptics::from_config(config);
    let leds = led_sources(config);
    let mut out = Vec::new();
    for el in wall_mesh(&config.room) {
        for led in &leds {
            if let Some((delay, gain)) = nlos_pair_gain(led.position, led.lambertian_mode, &el, &rx)
            {
                out.push(Tap { delay, gain });
            }
        }
    }
    out
}

/// Assembles the impulse response at the configured receiver position.
pub fn impulse_response(config: &ScenarioConfig) -> ImpulseResponse {
    impulse_response_at(config, config.receiver.position)
}

/// Assembles the impulse response with the receiver moved to `position`
/// (used by the spatial maps).
pub fn impulse_response_at(config: &ScenarioConfig, position: Vec3) -> ImpulseResponse {
    let rx = ReceiverOptics::at_position(config, position);
    let (los, pr_los) = los_taps(config, &rx);
    let (nlos_moments, pr_nlos, nlos_binned) = nlos_scan(config, &rx);

    let mut moments = TapMoments::default();
    for t in &los {
        moments.add_tap(t.delay, t.gain);
    }
    let h_los0 = moments.sum_gain;
    moments.merge(&nlos_moments);

    ImpulseResponse {
        los_taps: los,
        nlos_taps_binned: nlos_binned,
        h_los0,
        h_nlos0: nlos_moments.sum_gain,
        pr_los_full_on: pr_los,
        pr_nlos_full_on: pr_nlos,
        moments,
    }
}

/// RMS delay spread of an assembled response (exact discrete taps).
pub fn delay_spread(h: &ImpulseResponse) -> Result<DelaySpreadResult> {
    delay_spread_from_moments(&h.moments)
}

/// RMS delay spread of an explicit tap list.
pub fn delay_spread_taps(taps: &[Tap]) -> Result<DelaySpreadResult> {
    let mut m = TapMoments::default();
    for t in taps {
        m.add_tap(t.delay, t.gain);
    }
    delay_spread_from_moments(&m)
}

fn delay_spread_from_moments(m: &TapMoments) -> Result<DelaySpreadResult> {
    if m.sum_g2 <= 0.0 {
        return Err(Error::domain(
            "delay spread undefined: impulse response has no tap with positive gain",
        ));
    }
    let mean = m.sum_tg2 / m.sum_g2;
    let var = (m.sum_t2g2 / m.sum_g2 - mean * mean).max(0.0);
    let d = var.sqrt();
    let rate = if d > 0.0 { Some(1.0 / (10.0 * d)) } else { None };
    Ok(DelaySpreadResult {
        mean_delay: mean,
        rms_spread: d,
        max_isi_free_rate: rate,
    })
}

/// One cell of a delay-spread map.
#[derive(Debug, Clone, Serialize)]
pub struct DelaySpreadCell {
    pub x: f64,
    pub y: f64,
    pub rms_spread: f64,
}

/// RMS delay spread over a horizontal grid at `plane_height`.
///
/// Grid points start half a step inside the floor plan so each cell is
/// centred on its sample. Positions with no visible tap are reported with a
/// spread of zero.
pub fn delay_spread_map(
    config: &ScenarioConfig,
    plane_height: f64,
    grid_step: f64,
) -> Result<Vec<DelaySpreadCell>> {
    if !(plane_height > 0.0 && plane_height < config.room.height) {
        return Err(Error::domain(format!(
            "plane height {plane_height} outside room (0, {})",
            config.room.height
        )));
    }
    if grid_step <= 0.0 {
        return Err(Error::domain("grid step must be positive"));
    }
    let points = grid_points(config.room.width, config.room.depth, grid_step);
    let cells: Vec<DelaySpreadCell> = points
        .par_iter()
        .map(|&(x, y)| {
            let h = impulse_response_at(config, Vec3::new(x, y, plane_height));
            let d = delay_spread(&h).map(|r| r.rms_spread).unwrap_or(0.0);
            DelaySpreadCell {
                x,
                y,
                rms_spread: d,
            }
        })
        .collect();
    Ok(cells)
}

pub(crate) fn grid_points(width: f64, depth: f64, step: f64) -> Vec<(f64, f64)> {
    let nx = ((width / step).round() as usize).max(1);
    let ny = ((depth / step).round() as usize).max(1);
    let dx = width / nx as f64;
    let dy = depth / ny as f64;
    let mut out = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            out.push(((ix as f64 + 0.5) * dx, (iy as f64 + 0.5) * dy));
        }
    }
    out
}
