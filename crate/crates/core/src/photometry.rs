//! Horizontal illuminance under weight-based dimming and the
//! standards-compliant dimming interval.
//!
//! Each LED contributes `(w/n) I_0 cos^m(phi) cos(psi) / d^2` lux on a
//! horizontal surface; the field of view plays no role here because
//! illuminance is a property of the surface, not of the receiver optics.
//! Illuminance is linear in the duty cycle, so the dimming interval against
//! a lux band is solved analytically from the full-on value instead of by
//! sweeping.

use crate::geometry::Vec3;
use crate::scenario::{led_sources, ScenarioConfig};
use crate::{Error, Result};
use rayon::prelude::*;
use serde::Serialize;

/// Duty cycle of the OPPM dimming scheme (`delta = w/n`).
///
/// The perceived brightness follows the eye's square-root response:
/// `100 sqrt(delta)` percent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimmingLevel {
    duty_cycle: f64,
}

impl DimmingLevel {
    /// Builds a level from a duty cycle in `[0, 1]`.
    pub fn from_duty_cycle(duty_cycle: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&duty_cycle) {
            return Err(Error::domain(format!(
                "duty cycle must lie in [0, 1], got {duty_cycle}"
            )));
        }
        Ok(DimmingLevel { duty_cycle })
    }

    /// Builds a level from a perceived-brightness percentage in `[0, 100]`.
    pub fn from_perceived_percent(percent: f64) -> Result<Self> {
        if !(0.0..=100.0).contains(&percent) {
            return Err(Error::domain(format!(
                "perceived brightness must lie in [0, 100] percent, got {percent}"
            )));
        }
        Ok(DimmingLevel {
            duty_cycle: (percent / 100.0).powi(2),
        })
    }

    pub fn duty_cycle(&self) -> f64 {
        self.duty_cycle
    }

    /// `100 sqrt(delta)` percent.
    pub fn perceived_percent(&self) -> f64 {
        100.0 * self.duty_cycle.sqrt()
    }
}

/// Horizontal illuminance in lux at `point` under the given dimming level.
///
/// LEDs behind the horizontal plane of the point contribute nothing. Errors
/// when the point lies outside the room.
pub fn illuminance_at(
    config: &ScenarioConfig,
    point: Vec3,
    dimming: DimmingLevel,
) -> Result<f64> {
    let room = &config.room;
    if !(0.0..=room.width).contains(&point.x)
        || !(0.0..=room.depth).contains(&point.y)
        || !(0.0..=room.height).contains(&point.z)
    {
        return Err(Error::domain(format!(
            "point ({}, {}, {}) outside room",
            point.x, point.y, point.z
        )));
    }
    let mut sum = 0.0;
    for led in led_sources(config) {
        let v = led.position - point;
        let d = v.norm();
        if d == 0.0 {
            continue;
        }
        let cos_phi = v.z / d;
        if cos_phi <= 0.0 {
            continue;
        }
        // cos(psi) on a horizontal surface equals cos(phi) for vertical optics.
        sum += led.luminous_intensity * cos_phi.powf(led.lambertian_mode) * cos_phi / (d * d);
    }
    Ok(dimming.duty_cycle() * sum)
}

/// One sample of an illuminance map.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct IlluminanceSample {
    pub x: f64,
    pub y: f64,
    pub lux: f64,
}

/// Illuminance sampled on a horizontal grid over the room footprint.
#[derive(Debug, Clone, Serialize)]
pub struct IlluminanceMap {
    pub plane_height: f64,
    pub dimming: DimmingLevel,
    pub samples: Vec<IlluminanceSample>,
}

impl IlluminanceMap {
    pub fn min_lux(&self) -> f64 {
        self.samples.iter().map(|s| s.lux).fold(f64::INFINITY, f64::min)
    }

    pub fn max_lux(&self) -> f64 {
        self.samples.iter().map(|s| s.lux).fold(0.0, f64::max)
    }

    /// Location of the brightest sample.
    pub fn argmax(&self) -> (f64, f64) {
        let mut best = (0.0, 0.0, -1.0);
        for s in &self.samples {
            if s.lux > best.2 {
                best = (s.x, s.y, s.lux);
            }
        }
        (best.0, best.1)
    }

    /// Fraction of grid samples whose illuminance lies within `[lo, hi]` lux.
    pub fn compliant_fraction(&self, lo: f64, hi: f64) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let n = self
            .samples
            .iter()
            .filter(|s| s.lux >= lo && s.lux <= hi)
            .count();
        n as f64 / self.samples.len() as f64
    }
}

/// Samples the illuminance over the room footprint at `plane_height`.
pub fn illuminance_map(
    config: &ScenarioConfig,
    plane_height: f64,
    dimming: DimmingLevel,
    grid_step: f64,
) -> Result<IlluminanceMap> {
    if !(plane_height > 0.0 && plane_height < config.room.height) {
        return Err(Error::domain(format!(
            "plane height {plane_height} outside room (0, {})",
            config.room.height
        )));
    }
    if grid_step <= 0.0 {
        return Err(Error::domain("grid step must be positive"));
    }
    let points = crate::channel::grid_points(config.room.width, config.room.depth, grid_step);
    let samples: Vec<IlluminanceSample> = points
        .par_iter()
        .map(|&(x, y)| {
            let lux = illuminance_at(config, Vec3::new(x, y, plane_height), dimming)
                .expect("grid points lie inside the room");
            IlluminanceSample { x, y, lux }
        })
        .collect();
    Ok(IlluminanceMap {
        plane_height,
        dimming,
        samples,
    })
}

/// Perceived-brightness interval meeting a lux band at one point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DimmingInterval {
    /// Full-on illuminance at the evaluation point, lux.
    pub full_on_lux: f64,
    pub lux_min: f64,
    pub lux_max: f64,
    /// Endpoints in perceived-brightness percent, rounded to 0.1; `None`
    /// when even full brightness cannot reach `lux_min`.
    pub perceived_low: Option<f64>,
    pub perceived_high: Option<f64>,
}

impl DimmingInterval {
    pub fn is_empty(&self) -> bool {
        self.perceived_low.is_none()
    }
}

/// Solves the dimming interval `[100 sqrt(lux_min/E1), 100 sqrt(lux_max/E1)]`
/// (capped at 100%) from the full-on illuminance `E1` at `point`.
///
/// Illuminance is linear in the duty cycle, so the solve is exact; no sweep.
pub fn dimming_interval(
    config: &ScenarioConfig,
    point: Vec3,
    lux_min: f64,
    lux_max: f64,
) -> Result<DimmingInterval> {
    if !(lux_min > 0.0 && lux_min < lux_max) {
        return Err(Error::domain(format!(
            "lux bounds must satisfy 0 < min < max, got [{lux_min}, {lux_max}]"
        )));
    }
    let full = DimmingLevel::from_duty_cycle(1.0).expect("1.0 is a valid duty cycle");
    let e1 = illuminance_at(config, point, full)?;
    let round1 = |x: f64| (x * 10.0).round() / 10.0;
    if e1 < lux_min {
        return Ok(DimmingInterval {
            full_on_lux: e1,
            lux_min,
            lux_max,
            perceived_low: None,
            perceived_high: None,
        });
    }
    let low = 100.0 * (lux_min / e1).sqrt();
    let high = (100.0 * (lux_max / e1).sqrt()).min(100.0);
    Ok(DimmingInterval {
        full_on_lux: e1,
        lux_min,
        lux_max,
        perceived_low: Some(round1(low)),
        perceived_high: Some(round1(high)),
    })
}
