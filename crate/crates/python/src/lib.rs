//! Python bindings for the OPPM VLC design toolkit.
//!
//! Exposes the scenario preset, photometry, channel, noise, modem, TCM and
//! Monte Carlo operations as plain functions and two small classes.
//! Structured results come back as ordinary dicts.

use oppm_vlc::channel;
use oppm_vlc::geometry::Vec3;
use oppm_vlc::math;
use oppm_vlc::mc;
use oppm_vlc::modem;
use oppm_vlc::noise;
use oppm_vlc::photometry;
use oppm_vlc::scenario;
use oppm_vlc::tcm;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::{PyDict, PyList};
use pyo3::IntoPyObjectExt;

fn err(e: oppm_vlc::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py<T: serde::Serialize>(py: Python<'_>, value: &T) -> PyResult<Py<PyAny>> {
    let v = serde_json::to_value(value)
        .map_err(|e| PyValueError::new_err(format!("serialisation failed: {e}")))?;
    json_to_py(py, &v)
}

fn json_to_py(py: Python<'_>, v: &serde_json::Value) -> PyResult<Py<PyAny>> {
    use serde_json::Value;
    match v {
        Value::Null => Ok(py.None()),
        Value::Bool(b) => b.into_py_any(py),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                i.into_py_any(py)
            } else if let Some(u) = n.as_u64() {
                u.into_py_any(py)
            } else {
                n.as_f64().unwrap_or(f64::NAN).into_py_any(py)
            }
        }
        Value::String(s) => s.into_py_any(py),
        Value::Array(items) => {
            let list = PyList::empty(py);
            for item in items {
                list.append(json_to_py(py, item)?)?;
            }
            list.into_py_any(py)
        }
        Value::Object(map) => {
            let dict = PyDict::new(py);
            for (k, val) in map {
                dict.set_item(k, json_to_py(py, val)?)?;
            }
            dict.into_py_any(py)
        }
    }
}

/// Physical scenario: room, fixtures, receiver and noise parameters.
#[pyclass(name = "Scenario", module = "oppm_vlc_py", from_py_object)]
#[derive(Clone)]
struct PyScenario {
    inner: scenario::ScenarioConfig,
}

#[pymethods]
impl PyScenario {
    /// The built-in 5 x 5 x 3 m office preset.
    #[staticmethod]
    fn office() -> Self {
        PyScenario {
            inner: scenario::office_scenario(),
        }
    }

    #[staticmethod]
    fn from_file(path: &str) -> PyResult<Self> {
        Ok(PyScenario {
            inner: scenario::load_scenario(path).map_err(err)?,
        })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyScenario {
            inner: scenario::parse_scenario(text).map_err(err)?,
        })
    }

    fn to_text(&self) -> String {
        scenario::scenario_to_string(&self.inner)
    }

    fn to_file(&self, path: &str) -> PyResult<()> {
        std::fs::write(path, self.to_text())
            .map_err(|e| PyValueError::new_err(format!("cannot write {path}: {e}")))
    }

    /// Invariant violations as strings; empty means valid.
    fn validate(&self) -> Vec<String> {
        scenario::validate(&self.inner)
            .violations
            .iter()
            .map(|v| format!("{}: {}", v.field, v.message))
            .collect()
    }

    #[getter]
    fn receiver_position(&self) -> (f64, f64, f64) {
        let p = self.inner.receiver.position;
        (p.x, p.y, p.z)
    }

    #[getter]
    fn modulation_bandwidth_hz(&self) -> f64 {
        self.inner.modulation_bandwidth
    }

    #[getter]
    fn fixture_count(&self) -> usize {
        self.inner.fixtures.len()
    }

    fn __repr__(&self) -> String {
        let r = &self.inner.room;
        format!(
            "Scenario({}x{}x{} m, {} fixtures, receiver at {:?})",
            r.width,
            r.depth,
            r.height,
            self.inner.fixtures.len(),
            self.receiver_position()
        )
    }
}

/// An (n, w) OPPM scheme with its symbol table and Gray labels.
#[pyclass(name = "OppmScheme", module = "oppm_vlc_py")]
struct PyScheme {
    inner: modem::OppmScheme,
}

#[pymethods]
impl PyScheme {
    #[new]
    fn new(n: usize, w: usize) -> PyResult<Self> {
        Ok(PyScheme {
            inner: modem::make_scheme(n, w).map_err(err)?,
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    #[getter]
    fn w(&self) -> usize {
        self.inner.w
    }

    #[getter]
    fn l(&self) -> usize {
        self.inner.l
    }

    #[getter]
    fn duty_cycle(&self) -> f64 {
        self.inner.duty_cycle()
    }

    #[getter]
    fn perceived_percent(&self) -> f64 {
        self.inner.perceived_percent()
    }

    #[getter]
    fn bits_per_symbol(&self) -> usize {
        self.inner.bits_per_symbol
    }

    /// The L symbols as chip strings, e.g. ["1100", "0110", "0011"].
    fn symbol_table(&self) -> Vec<String> {
        (0..self.inner.l).map(|i| self.inner.pattern_string(i)).collect()
    }

    fn encode(&self, bits: Vec<bool>) -> PyResult<Vec<usize>> {
        modem::encode(&self.inner, &bits).map_err(err)
    }

    fn decode_hard(&self, chip_samples: Vec<f64>) -> PyResult<usize> {
        modem::decode_hard(&self.inner, &chip_samples).map_err(err)
    }

    fn symbols_to_bits(&self, indices: Vec<usize>) -> Vec<bool> {
        modem::symbols_to_bits(&self.inner, &indices)
    }

    fn bandwidth(&self, bit_rate: f64) -> f64 {
        modem::bandwidth(&self.inner, bit_rate)
    }

    fn max_bit_rate(&self, modulation_bandwidth: f64) -> f64 {
        modem::max_bit_rate(&self.inner, modulation_bandwidth)
    }

    fn spectral_efficiency(&self) -> f64 {
        modem::spectral_efficiency(&self.inner)
    }

    fn analytic_ber(&self, power: f64, bit_rate: f64, n0: f64) -> PyResult<f64> {
        modem::analytic_ber(&self.inner, power, bit_rate, n0).map_err(err)
    }

    fn required_power_uncoded(&self, n0: f64, symbol_period: f64, ber_target: f64) -> PyResult<f64> {
        modem::required_power_uncoded(&self.inner, n0, symbol_period, ber_target).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!(
            "OppmScheme(n={}, w={}, L={}, duty={:.4})",
            self.inner.n,
            self.inner.w,
            self.inner.l,
            self.inner.duty_cycle()
        )
    }
}

/// Lambert mode number for a half-power semi-angle in degrees.
#[pyfunction]
fn lambertian_mode(phi_half_deg: f64) -> PyResult<f64> {
    channel::lambertian_mode(phi_half_deg).map_err(err)
}

/// Weight achieving a perceived brightness at code length n.
#[pyfunction]
fn weight_for_dimming(n: usize, perceived_percent: f64) -> PyResult<usize> {
    modem::weight_for_dimming(n, perceived_percent).map_err(err)
}

/// Horizontal illuminance in lux at a point, at a perceived brightness.
#[pyfunction]
fn illuminance_at(
    scenario: &PyScenario,
    point: (f64, f64, f64),
    perceived_percent: f64,
) -> PyResult<f64> {
    let dimming =
        photometry::DimmingLevel::from_perceived_percent(perceived_percent).map_err(err)?;
    photometry::illuminance_at(
        &scenario.inner,
        Vec3::new(point.0, point.1, point.2),
        dimming,
    )
    .map_err(err)
}

/// Perceived-brightness interval meeting a lux band at the receiver.
#[pyfunction]
#[pyo3(signature = (scenario, lux_min=200.0, lux_max=800.0))]
fn dimming_interval(
    py: Python<'_>,
    scenario: &PyScenario,
    lux_min: f64,
    lux_max: f64,
) -> PyResult<Py<PyAny>> {
    let interval = photometry::dimming_interval(
        &scenario.inner,
        scenario.inner.receiver.position,
        lux_min,
        lux_max,
    )
    .map_err(err)?;
    to_py(py, &interval)
}

/// Channel DC gains, mean delay, RMS delay spread and the 1/(10D) bound at
/// the receiver.
#[pyfunction]
fn delay_spread(py: Python<'_>, scenario: &PyScenario) -> PyResult<Py<PyAny>> {
    let h = channel::impulse_response(&scenario.inner);
    let ds = channel::delay_spread(&h).map_err(err)?;
    let out = serde_json::json!({
        "h_los0": h.h_los0,
        "h_nlos0": h.h_nlos0,
        "h0": h.h0(),
        "mean_delay_s": ds.mean_delay,
        "rms_delay_spread_s": ds.rms_spread,
        "max_isi_free_rate_bps": ds.max_isi_free_rate,
    });
    json_to_py(py, &out)
}

/// Electrical SNR in dB at a perceived brightness.
#[pyfunction]
#[pyo3(signature = (scenario, perceived_percent, n=32))]
fn snr_db(scenario: &PyScenario, perceived_percent: f64, n: usize) -> PyResult<f64> {
    let w = modem::weight_for_dimming(n, perceived_percent).map_err(err)?;
    let scheme = modem::make_scheme(n, w).map_err(err)?;
    let dimming =
        photometry::DimmingLevel::from_perceived_percent(perceived_percent).map_err(err)?;
    let h = channel::impulse_response(&scenario.inner);
    Ok(noise::snr_db(&scenario.inner, dimming, &scheme, &h))
}

/// Analytic BER at a channel SNR under the engine's normalisation contract.
#[pyfunction]
fn analytic_ber_at_snr(n: usize, w: usize, snr_db: f64) -> PyResult<f64> {
    let scheme = modem::make_scheme(n, w).map_err(err)?;
    Ok(mc::analytic_ber_at_snr(&scheme, snr_db))
}

/// Monte Carlo BER estimate of one (scheme, SNR) cell.
#[pyfunction]
#[pyo3(signature = (n, w, snr_db, seed=mc::DEFAULT_SEED, max_symbols=10_000_000, target_errors=100))]
fn simulate_ber(
    py: Python<'_>,
    n: usize,
    w: usize,
    snr_db: f64,
    seed: u64,
    max_symbols: u64,
    target_errors: u64,
) -> PyResult<Py<PyAny>> {
    let scheme = modem::make_scheme(n, w).map_err(err)?;
    let mc_config = mc::McConfig {
        rng_seed: seed,
        max_symbols,
        target_errors,
        ..mc::McConfig::default()
    };
    let point = py
        .detach(|| mc::simulate_ber(&scheme, snr_db, &mc_config))
        .map_err(err)?;
    to_py(py, &point)
}

/// Smallest code length meeting the FEC threshold at a channel SNR.
#[pyfunction]
#[pyo3(signature = (perceived_percent, channel_snr_db, threshold=3e-3, candidates=vec![8, 16, 32, 64, 128], seed=mc::DEFAULT_SEED))]
fn min_code_length(
    py: Python<'_>,
    perceived_percent: f64,
    channel_snr_db: f64,
    threshold: f64,
    candidates: Vec<usize>,
    seed: u64,
) -> PyResult<Py<PyAny>> {
    let mc_config = mc::McConfig::with_seed(seed);
    let decision = py
        .detach(|| {
            mc::min_code_length(
                perceived_percent,
                &candidates,
                channel_snr_db,
                threshold,
                &mc_config,
            )
        })
        .map_err(err)?;
    to_py(py, &decision)
}

/// Set partitioning of an (n, w) alphabet down to `depth` levels.
#[pyfunction]
fn set_partition(py: Python<'_>, n: usize, w: usize, depth: usize) -> PyResult<Py<PyAny>> {
    let scheme = modem::make_scheme(n, w).map_err(err)?;
    let tree = tcm::set_partition(&scheme, depth).map_err(err)?;
    to_py(py, &tree)
}

/// TCM 2L-OPPM parameters for a base scheme and a trellis state count.
#[pyfunction]
fn coded_scheme(py: Python<'_>, n: usize, w: usize, states: usize) -> PyResult<Py<PyAny>> {
    let scheme = modem::make_scheme(n, w).map_err(err)?;
    let coded = tcm::coded_scheme(&scheme, states).map_err(err)?;
    to_py(py, &coded)
}

/// Coding gain of TCM 2L-OPPM over uncoded OPPM, dB.
#[pyfunction]
#[pyo3(signature = (l, d_c, exact=false))]
fn coding_gain_db(l: usize, d_c: u32, exact: bool) -> PyResult<f64> {
    tcm::coding_gain_db(l, d_c, exact).map_err(err)
}

/// Standard normal tail probability.
#[pyfunction]
fn q(x: f64) -> f64 {
    math::q(x)
}

/// Inverse standard normal tail probability.
#[pyfunction]
fn q_inv(p: f64) -> PyResult<f64> {
    if !(0.0 < p && p < 1.0) {
        return Err(PyValueError::new_err("q_inv argument must be in (0, 1)"));
    }
    Ok(math::q_inv(p))
}

#[pymodule]
fn oppm_vlc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyScenario>()?;
    m.add_class::<PyScheme>()?;
    m.add_function(wrap_pyfunction!(lambertian_mode, m)?)?;
    m.add_function(wrap_pyfunction!(weight_for_dimming, m)?)?;
    m.add_function(wrap_pyfunction!(illuminance_at, m)?)?;
    m.add_function(wrap_pyfunction!(dimming_interval, m)?)?;
    m.add_function(wrap_pyfunction!(delay_spread, m)?)?;
    m.add_function(wrap_pyfunction!(snr_db, m)?)?;
    m.add_function(wrap_pyfunction!(analytic_ber_at_snr, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_ber, m)?)?;
    m.add_function(wrap_pyfunction!(min_code_length, m)?)?;
    m.add_function(wrap_pyfunction!(set_partition, m)?)?;
    m.add_function(wrap_pyfunction!(coded_scheme, m)?)?;
    m.add_function(wrap_pyfunction!(coding_gain_db, m)?)?;
    m.add_function(wrap_pyfunction!(q, m)?)?;
    m.add_function(wrap_pyfunction!(q_inv, m)?)?;
    m.add("DEFAULT_SEED", mc::DEFAULT_SEED)?;
    Ok(())
}
