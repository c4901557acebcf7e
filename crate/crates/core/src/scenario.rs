//! Physical scenario: room geometry, LED fixtures, receiver and wall
//! reflectors, plus the built-in office preset.
//!
//! All quantities are SI (metres, watts, amperes, hertz) with angles in
//! degrees. The coordinate frame puts the floor at `z = 0` with the room
//! spanning `[0, width] x [0, depth] x [0, height]`; fixtures hang from the
//! ceiling facing down and the receiver faces up.

use crate::geometry::Vec3;
use crate::noise::NoiseParams;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::Path;

/// Rectangular room with diffusely reflecting walls.
///
/// `wall_reflectance` is indexed by wall: `[x=0, x=width, y=0, y=depth]`.
/// `mesh_resolution` is the target side length of the square wall elements
/// used for the first-reflection sums.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Room {
    pub width: f64,
    pub depth: f64,
    pub height: f64,
    pub wall_reflectance: [f64; 4],
    pub mesh_resolution: f64,
}

/// A ceiling-mounted square LED array.
///
/// The array is a `grid_count x grid_count` lattice of identical LEDs spaced
/// `led_spacing` apart and centred on `center`, all facing straight down.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fixture {
    pub center: Vec3,
    pub side: f64,
    pub grid_count: usize,
    pub led_spacing: f64,
    /// Optical power per LED, watts.
    pub led_power: f64,
    /// Semi-angle at half power of each LED, degrees.
    pub semi_angle_half_power: f64,
    /// Center luminous intensity per LED, candela.
    pub center_luminous_intensity: f64,
}

impl Fixture {
    /// Total number of LEDs in the fixture.
    pub fn led_count(&self) -> usize {
        self.grid_count * self.grid_count
    }
}

/// Upward-facing photodetector.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Receiver {
    pub position: Vec3,
    /// Active area, m^2.
    pub area: f64,
    /// Field of view (half angle), degrees.
    pub fov: f64,
    /// Responsivity, A/W.
    pub responsivity: f64,
    /// Optical band-pass filter transmission (constant within FOV).
    pub optical_filter_gain: f64,
    /// Non-imaging concentrator gain (constant within FOV).
    pub concentrator_gain: f64,
    /// Ambient-light-induced photocurrent, amperes.
    pub ambient_light_current: f64,
}

/// Complete scenario description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub room: Room,
    pub fixtures: Vec<Fixture>,
    pub receiver: Receiver,
    /// LED modulation bandwidth, Hz.
    pub modulation_bandwidth: f64,
    pub noise: NoiseParams,
}

/// One square wall element used in the first-reflection sums.
#[derive(Debug, Clone, Copy)]
pub struct SurfaceElement {
    pub position: Vec3,
    /// Inward-facing unit normal.
    pub normal: Vec3,
    /// Element area, m^2.
    pub area: f64,
    pub reflectance: f64,
}

/// A single invariant violation found by [`validate`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Violation {
    pub field: String,
    pub message: String,
}

/// Result of validating a [`ScenarioConfig`]; empty means valid.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, field: &str, message: impl Into<String>) {
        self.violations.push(Violation {
            field: field.to_string(),
            message: message.into(),
        });
    }
}

/// Effective thermal-noise PSD of the office preset, A^2/Hz.
///
/// Calibrated once so that the electrical SNR of the preset at 50% perceived
/// brightness equals -0.5 dB (see the noise module); committed here so the
/// preset is self-contained and reproducible.
pub const PRESET_THERMAL_PSD: f64 = 7.80775e-18;

/// The hypothetical office used throughout: a 5 x 5 x 3 m room with four
/// 324-LED fixtures and a photodetector on a 0.85 m table under one of them.
///
/// Fixture centres are spaced 2.5 m apart with one fixture directly above
/// the receiver at (1, 1); the layout is configurable through the scenario
/// file for other rooms.
pub fn office_scenario() -> ScenarioConfig {
    let fixture = |x: f64, y: f64| Fixture {
        center: Vec3::new(x, y, 3.0),
        side: 0.5,
        grid_count: 18,
        led_spacing: 0.028,
        led_power: 0.063,
        semi_angle_half_power: 70.0,
        center_luminous_intensity: 9.5,
    };
    ScenarioConfig {
        room: Room {
            width: 5.0,
            depth: 5.0,
            height: 3.0,
            wall_reflectance: [0.8; 4],
            mesh_resolution: 0.1,
        },
        fixtures: vec![
            fixture(1.0, 1.0),
            fixture(1.0, 3.5),
            fixture(3.5, 1.0),
            fixture(3.5, 3.5),
        ],
        receiver: Receiver {
            position: Vec3::new(1.0, 1.0, 0.85),
            area: 1e-4,
            fov: 60.0,
            responsivity: 0.28,
            optical_filter_gain: 1.0,
            concentrator_gain: 1.0,
            ambient_light_current: 27e-3,
        },
        modulation_bandwidth: 20e6,
        noise: NoiseParams {
            thermal_psd_override: Some(PRESET_THERMAL_PSD),
            ..NoiseParams::default()
        },
    }
}

/// Checks every scenario invariant and returns the violations found.
///
/// Violations are data, not failures: an invalid config is reported, never
/// rejected with an error, and the input is not modified.
pub fn validate(config: &ScenarioConfig) -> ValidationReport {
    let mut report = ValidationReport::default();
    let room = &config.room;

    if room.width <= 0.0 || room.depth <= 0.0 || room.height <= 0.0 {
        report.push("room", "all room dimensions must be positive");
    }
    for (i, &rho) in room.wall_reflectance.iter().enumerate() {
        if !(0.0..=1.0).contains(&rho) {
            report.push(
                "room.wall_reflectance",
                format!("reflectance out of range on wall {i}: {rho}"),
            );
        }
    }
    let min_dim = room.width.min(room.depth).min(room.height);
    if room.mesh_resolution <= 0.0 || room.mesh_resolution > min_dim {
        report.push(
            "room.mesh_resolution",
            format!(
                "mesh resolution {} must be positive and at most the smallest room dimension {}",
                room.mesh_resolution, min_dim
            ),
        );
    }

    let inside = |p: Vec3| {
        p.x >= 0.0
            && p.x <= room.width
            && p.y >= 0.0
            && p.y <= room.depth
            && p.z >= 0.0
            && p.z <= room.height
    };

    for (i, f) in config.fixtures.iter().enumerate() {
        let field = format!("fixtures[{i}]");
        if !inside(f.center) {
            report.push(&field, "fixture center outside room");
        }
        if f.grid_count == 0 {
            report.push(&field, "fixture must contain at least one LED");
        }
        if f.grid_count > 1 && (f.grid_count as f64 - 1.0) * f.led_spacing > f.side + 1e-12 {
            report.push(&field, "LED lattice does not fit within the fixture side");
        }
        if !(0.0..90.0).contains(&f.semi_angle_half_power) || f.semi_angle_half_power == 0.0 {
            report.push(&field, "semi-angle at half power must lie in (0, 90) degrees");
        }
        if f.led_power < 0.0 || f.center_luminous_intensity < 0.0 {
            report.push(&field, "LED power and luminous intensity must be nonnegative");
        }
    }
    if config.fixtures.is_empty() {
        report.push("fixtures", "at least one fixture is required");
    }

    let rx = &config.receiver;
    if !inside(rx.position) {
        report.push("receiver.position", "receiver outside room");
    }
    if rx.area <= 0.0 {
        report.push("receiver.area", "receiver area must be positive");
    }
    if !(rx.fov > 0.0 && rx.fov <= 90.0) {
        report.push("receiver.fov", "field of view must lie in (0, 90] degrees");
    }
    if rx.responsivity <= 0.0 {
        report.push("receiver.responsivity", "responsivity must be positive");
    }
    if rx.optical_filter_gain <= 0.0 || rx.concentrator_gain <= 0.0 {
        report.push("receiver", "optical filter and concentrator gains must be positive");
    }
    if rx.ambient_light_current < 0.0 {
        report.push("receiver.ambient_light_current", "ambient current must be nonnegative");
    }
    if config.modulation_bandwidth <= 0.0 {
        report.push("modulation_bandwidth", "modulation bandwidth must be positive");
    }
    for v in config.noise.validate() {
        report.push("noise", v);
    }
    report
}

/// Positions of every LED in a fixture: a centred `grid x grid` lattice.
pub fn led_positions(fixture: &Fixture) -> Vec<Vec3> {
    let g = fixture.grid_count;
    let half = (g as f64 - 1.0) / 2.0;
    let mut out = Vec::with_capacity(g * g);
    for iy in 0..g {
        for ix in 0..g {
            let dx = (ix as f64 - half) * fixture.led_spacing;
            let dy = (iy as f64 - half) * fixture.led_spacing;
            out.push(Vec3::new(
                fixture.center.x + dx,
                fixture.center.y + dy,
                fixture.center.z,
            ));
        }
    }
    out
}

/// All LED positions of the scenario, paired with the Lambertian mode and
/// per-LED optical power / luminous intensity of their fixture.
pub(crate) struct LedSource {
    pub position: Vec3,
    pub lambertian_mode: f64,
    pub power: f64,
    pub luminous_intensity: f64,
}

pub(crate) fn led_sources(config: &ScenarioConfig) -> Vec<LedSource> {
    let mut out = Vec::new();
    for f in &config.fixtures {
        let m = crate::channel::lambertian_mode(f.semi_angle_half_power)
            .expect("validated fixture has a semi-angle in (0, 90)");
        for p in led_positions(f) {
            out.push(LedSource {
                position: p,
                lambertian_mode: m,
                power: f.led_power,
                luminous_intensity: f.center_luminous_intensity,
            });
        }
    }
    out
}

/// Tessellates the four walls into square elements with inward normals.
///
/// Element side lengths are chosen per axis as `len / round(len / resolution)`
/// so the elements tile each wall exactly; the summed element area equals the
/// wall area to machine precision. Floor and ceiling are not meshed.
pub fn wall_mesh(room: &Room) -> Vec<SurfaceElement> {
    let res = room.mesh_resolution;
    let counts = |len: f64| -> usize { ((len / res).round() as usize).max(1) };

    let nz = counts(room.height);
    let dz = room.height / nz as f64;

    let mut out = Vec::new();
    // Walls at x = 0 and x = width span the y axis.
    let ny = counts(room.depth);
    let dy = room.depth / ny as f64;
    for (x0, nx_dir, rho) in [
        (0.0, 1.0, room.wall_reflectance[0]),
        (room.width, -1.0, room.wall_reflectance[1]),
    ] {
        for iy in 0..ny {
            for iz in 0..nz {
                out.push(SurfaceElement {
                    position: Vec3::new(x0, (iy as f64 + 0.5) * dy, (iz as f64 + 0.5) * dz),
                    normal: Vec3::new(nx_dir, 0.0, 0.0),
                    area: dy * dz,
                    reflectance: rho,
                });
            }
        }
    }
    // Walls at y = 0 and y = depth span the x axis.
    let nx = counts(room.width);
    let dx = room.width / nx as f64;
    for (y0, ny_dir, rho) in [
        (0.0, 1.0, room.wall_reflectance[2]),
        (room.depth, -1.0, room.wall_reflectance[3]),
    ] {
        for ix in 0..nx {
            for iz in 0..nz {
                out.push(SurfaceElement {
                    position: Vec3::new((ix as f64 + 0.5) * dx, y0, (iz as f64 + 0.5) * dz),
                    normal: Vec3::new(0.0, ny_dir, 0.0),
                    area: dx * dz,
                    reflectance: rho,
                });
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Scenario file format
// ---------------------------------------------------------------------------
//
// Key/value sections mirroring the config fields, SI units:
//
//   [room]
//   width_m = 5.0
//   ...
//   [[fixture]]        # one block per fixture
//   center_m = 1.0 1.0 3.0
//   ...
//   [receiver]
//   [modulation]
//   [noise]

/// Serialises a scenario to the text format accepted by [`parse_scenario`].
pub fn scenario_to_string(config: &ScenarioConfig) -> String {
    let mut s = String::new();
    let r = &config.room;
    let _ = writeln!(s, "# oppm-vlc scenario");
    let _ = writeln!(s, "[room]");
    let _ = writeln!(s, "width_m = {}", r.width);
    let _ = writeln!(s, "depth_m = {}", r.depth);
    let _ = writeln!(s, "height_m = {}", r.height);
    let _ = writeln!(
        s,
        "wall_reflectance = {} {} {} {}",
        r.wall_reflectance[0], r.wall_reflectance[1], r.wall_reflectance[2], r.wall_reflectance[3]
    );
    let _ = writeln!(s, "mesh_resolution_m = {}", r.mesh_resolution);
    for f in &config.fixtures {
        let _ = writeln!(s, "\n[[fixture]]");
        let _ = writeln!(s, "center_m = {} {} {}", f.center.x, f.center.y, f.center.z);
        let _ = writeln!(s, "side_m = {}", f.side);
        let _ = writeln!(s, "grid = {}", f.grid_count);
        let _ = writeln!(s, "led_spacing_m = {}", f.led_spacing);
        let _ = writeln!(s, "led_power_w = {}", f.led_power);
        let _ = writeln!(s, "semi_angle_half_power_deg = {}", f.semi_angle_half_power);
        let _ = writeln!(s, "center_luminous_intensity_cd = {}", f.center_luminous_intensity);
    }
    let rx = &config.receiver;
    let _ = writeln!(s, "\n[receiver]");
    let _ = writeln!(s, "position_m = {} {} {}", rx.position.x, rx.position.y, rx.position.z);
    let _ = writeln!(s, "area_m2 = {}", rx.area);
    let _ = writeln!(s, "fov_deg = {}", rx.fov);
    let _ = writeln!(s, "responsivity_a_per_w = {}", rx.responsivity);
    let _ = writeln!(s, "optical_filter_gain = {}", rx.optical_filter_gain);
    let _ = writeln!(s, "concentrator_gain = {}", rx.concentrator_gain);
    let _ = writeln!(s, "ambient_light_current_a = {}", rx.ambient_light_current);
    let _ = writeln!(s, "\n[modulation]");
    let _ = writeln!(s, "bandwidth_hz = {}", config.modulation_bandwidth);
    let n = &config.noise;
    let _ = writeln!(s, "\n[noise]");
    let _ = writeln!(s, "electron_charge_c = {}", n.electron_charge);
    if let Some(psd) = n.thermal_psd_override {
        let _ = writeln!(s, "thermal_psd_a2_per_hz = {}", psd);
    }
    let _ = writeln!(s, "temperature_k = {}", n.temperature);
    let _ = writeln!(s, "effective_conductance_s = {}", n.effective_conductance);
    let _ = writeln!(s, "noise_factor = {}", n.noise_factor);
    s
}

/// Parses the scenario text format. Unknown keys are rejected so typos do
/// not silently fall back to defaults.
pub fn parse_scenario(text: &str) -> Result<ScenarioConfig> {
    #[derive(PartialEq)]
    enum Section {
        None,
        Room,
        Fixture,
        Receiver,
        Modulation,
        Noise,
    }

    let mut config = office_scenario();
    config.fixtures.clear();
    config.noise = NoiseParams::default();
    let mut section = Section::None;

    let err = |line: usize, message: &str| Error::Parse {
        line,
        message: message.to_string(),
    };

    let parse_f64 = |line: usize, v: &str| -> Result<f64> {
        v.trim()
            .parse::<f64>()
            .map_err(|_| err(line, &format!("expected a number, got '{v}'")))
    };
    let parse_floats = |line: usize, v: &str, n: usize| -> Result<Vec<f64>> {
        let parts: Vec<f64> = v
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| err(line, &format!("expected {n} numbers, got '{v}'")))?;
        if parts.len() != n {
            return Err(err(line, &format!("expected {n} numbers, got {}", parts.len())));
        }
        Ok(parts)
    };

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        if line == "[[fixture]]" {
            section = Section::Fixture;
            // Placeholder values; every field must be set explicitly.
            config.fixtures.push(Fixture {
                center: Vec3::new(0.0, 0.0, 0.0),
                side: 0.0,
                grid_count: 1,
                led_spacing: 0.0,
                led_power: 0.0,
                semi_angle_half_power: 60.0,
                center_luminous_intensity: 0.0,
            });
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = match name {
                "room" => Section::Room,
                "receiver" => Section::Receiver,
                "modulation" => Section::Modulation,
                "noise" => Section::Noise,
                other => return Err(err(lineno, &format!("unknown section [{other}]"))),
            };
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(lineno, "expected 'key = value'"))?;
        let key = key.trim();
        let value = value.trim();

        match section {
            Section::None => return Err(err(lineno, "key/value before any section header")),
            Section::Room => match key {
                "width_m" => config.room.width = parse_f64(lineno, value)?,
                "depth_m" => config.room.depth = parse_f64(lineno, value)?,
                "height_m" => config.room.height = parse_f64(lineno, value)?,
                "wall_reflectance" => {
                    let vals = value.split_whitespace().count();
                    let parsed = parse_floats(lineno, value, vals.clamp(1, 4))?;
                    config.room.wall_reflectance = match parsed.len() {
                        1 => [parsed[0]; 4],
                        4 => [parsed[0], parsed[1], parsed[2], parsed[3]],
                        _ => return Err(err(lineno, "wall_reflectance takes 1 or 4 values")),
                    };
                }
                "mesh_resolution_m" => config.room.mesh_resolution = parse_f64(lineno, value)?,
                other => return Err(err(lineno, &format!("unknown room key '{other}'"))),
            },
            Section::Fixture => {
                let f = config
                    .fixtures
                    .last_mut()
                    .ok_or_else(|| err(lineno, "fixture key outside a [[fixture]] block"))?;
                match key {
                    "center_m" => {
                        let v = parse_floats(lineno, value, 3)?;
                        f.center = Vec3::new(v[0], v[1], v[2]);
                    }
                    "side_m" => f.side = parse_f64(lineno, value)?,
                    "grid" => {
                        f.grid_count = value
                            .parse::<usize>()
                            .map_err(|_| err(lineno, "grid must be a positive integer"))?
                    }
                    "led_spacing_m" => f.led_spacing = parse_f64(lineno, value)?,
                    "led_power_w" => f.led_power = parse_f64(lineno, value)?,
                    "semi_angle_half_power_deg" => {
                        f.semi_angle_half_power = parse_f64(lineno, value)?
                    }
                    "center_luminous_intensity_cd" => {
                        f.center_luminous_intensity = parse_f64(lineno, value)?
                    }
                    other => return Err(err(lineno, &format!("unknown fixture key '{other}'"))),
                }
            }
            Section::Receiver => match key {
                "position_m" => {
                    let v = parse_floats(lineno, value, 3)?;
                    config.receiver.position = Vec3::new(v[0], v[1], v[2]);
                }
                "area_m2" => config.receiver.area = parse_f64(lineno, value)?,
                "fov_deg" => config.receiver.fov = parse_f64(lineno, value)?,
                "responsivity_a_per_w" => config.receiver.responsivity = parse_f64(lineno, value)?,
                "optical_filter_gain" => {
                    config.receiver.optical_filter_gain = parse_f64(lineno, value)?
                }
                "concentrator_gain" => {
                    config.receiver.concentrator_gain = parse_f64(lineno, value)?
                }
                "ambient_light_current_a" => {
                    config.receiver.ambient_light_current = parse_f64(lineno, value)?
                }
                other => return Err(err(lineno, &format!("unknown receiver key '{other}'"))),
            },
            Section::Modulation => match key {
                "bandwidth_hz" => config.modulation_bandwidth = parse_f64(lineno, value)?,
                other => return Err(err(lineno, &format!("unknown modulation key '{other}'"))),
            },
            Section::Noise => match key {
                "electron_charge_c" => config.noise.electron_charge = parse_f64(lineno, value)?,
                "thermal_psd_a2_per_hz" => {
                    config.noise.thermal_psd_override = Some(parse_f64(lineno, value)?)
                }
                "temperature_k" => config.noise.temperature = parse_f64(lineno, value)?,
                "effective_conductance_s" => {
                    config.noise.effective_conductance = parse_f64(lineno, value)?
                }
                "noise_factor" => config.noise.noise_factor = parse_f64(lineno, value)?,
                other => return Err(err(lineno, &format!("unknown noise key '{other}'"))),
            },
        }
    }
    if config.fixtures.is_empty() {
        return Err(Error::Parse {
            line: 0,
            message: "scenario defines no [[fixture]] block".to_string(),
        });
    }
    Ok(config)
}

/// Reads a scenario file, or returns the embedded office preset when `path`
/// is `-`.
pub fn load_scenario(path: &str) -> Result<ScenarioConfig> {
    if path == "-" {
        return Ok(office_scenario());
    }
    let text = std::fs::read_to_string(Path::new(path))?;
    parse_scenario(&text)
}
