//! Overlapping PPM: symbol tables, weight-based dimming, rate formulas,
//! encoder/decoder and the analytic BER.
//!
//! An `(n, w)` OPPM symbol is a binary n-tuple whose `w` ones are
//! consecutive; sliding the run gives `L = n - w + 1` symbols. Dimming keeps
//! `n` fixed and changes the weight, so the duty cycle is `delta = w/n` and
//! the perceived brightness `100 sqrt(delta)` percent.
//!
//! Two power conventions coexist and both are explicit here:
//!
//! - Inside the rate/BER formulas the waveform is normalised so every symbol
//!   carries average optical power `P` (chip amplitude `P n / w`), matching
//!   the average-power constraint the analytic BER is derived under.
//! - Physically the LED chip amplitude stays at the full-on level and the
//!   emitted average power scales with the duty cycle; the photometry and
//!   noise modules consume the duty cycle directly.

use crate::math::{q, q_inv};
use crate::{Error, Result};
use serde::Serialize;

/// Maximum supported code length (symbols are stored as 128-bit masks).
pub const MAX_CODE_LENGTH: usize = 128;

/// An `(n, w)` OPPM scheme with its symbol table and Gray bit labels.
///
/// Chip `k` of symbol `i` is bit `k` of `symbols[i]`; symbol `i` has ones at
/// positions `i..i+w`. The first `2^b` symbols carry `b = floor(log2 L)`-bit
/// Gray labels so the dominant adjacent-symbol confusions flip single bits.
#[derive(Debug, Clone, Serialize)]
pub struct OppmScheme {
    pub n: usize,
    pub w: usize,
    /// Alphabet size `L = n - w + 1`.
    pub l: usize,
    /// Bits carried per symbol, `floor(log2 L)`.
    pub bits_per_symbol: usize,
    /// Symbol chip masks, bit `k` = chip `k`.
    #[serde(skip)]
    pub symbols: Vec<u128>,
}

impl OppmScheme {
    /// Duty cycle `w / n`.
    pub fn duty_cycle(&self) -> f64 {
        self.w as f64 / self.n as f64
    }

    /// Perceived brightness, `100 sqrt(delta)` percent.
    pub fn perceived_percent(&self) -> f64 {
        100.0 * self.duty_cycle().sqrt()
    }

    /// `log2` of the full alphabet size (not the integer bit count).
    pub fn log2_l(&self) -> f64 {
        (self.l as f64).log2()
    }

    /// Number of labelled symbols, `2^bits_per_symbol`.
    pub fn labelled_symbols(&self) -> usize {
        1 << self.bits_per_symbol
    }

    /// Gray label of a labelled symbol, `None` beyond the labelled range.
    pub fn gray_label(&self, index: usize) -> Option<u64> {
        if index < self.labelled_symbols() {
            let i = index as u64;
            Some(i ^ (i >> 1))
        } else {
            None
        }
    }

    /// Chip pattern of a symbol as booleans, chip 0 first.
    pub fn chip_pattern(&self, index: usize) -> Vec<bool> {
        (0..self.n).map(|k| self.symbols[index] >> k & 1 == 1).collect()
    }

    /// Text form of a symbol, e.g. `1100` for symbol 0 of (4, 2).
    pub fn pattern_string(&self, index: usize) -> String {
        self.chip_pattern(index)
            .iter()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }

    /// Hamming distance between two symbols' chip patterns.
    pub fn chip_distance(&self, i: usize, j: usize) -> u32 {
        (self.symbols[i] ^ self.symbols[j]).count_ones()
    }
}

/// Builds the `(n, w)` scheme.
///
/// `w = 0` and `w = n` are constant light (full darkness/brightness) and
/// carry no data; they are rejected with a dedicated error.
pub fn make_scheme(n: usize, w: usize) -> Result<OppmScheme> {
    if n == 0 || n > MAX_CODE_LENGTH {
        return Err(Error::domain(format!(
            "code length must lie in [1, {MAX_CODE_LENGTH}], got {n}"
        )));
    }
    if w > n {
        return Err(Error::domain(format!("weight {w} exceeds code length {n}")));
    }
    if w == 0 || w == n {
        return Err(Error::NoData(format!(
            "weight {w} of {n} chips is constant light; no symbols exist"
        )));
    }
    let l = n - w + 1;
    let run: u128 = if w == 128 { u128::MAX } else { (1u128 << w) - 1 };
    let symbols: Vec<u128> = (0..l).map(|i| run << i).collect();
    let bits_per_symbol = (l as f64).log2().floor() as usize;
    Ok(OppmScheme {
        n,
        w,
        l,
        bits_per_symbol,
        symbols,
    })
}

/// Weight achieving a perceived brightness at code length `n`:
/// `round(n (p/100)^2)` clamped to the data-carrying range `[1, n-1]`.
pub fn weight_for_dimming(n: usize, perceived_percent: f64) -> Result<usize> {
    if !(perceived_percent > 0.0 && perceived_percent < 100.0) {
        return Err(Error::domain(format!(
            "perceived brightness must lie in (0, 100) percent, got {perceived_percent}"
        )));
    }
    let delta = (perceived_percent / 100.0).powi(2);
    let w = (n as f64 * delta).round() as usize;
    Ok(w.clamp(1, n - 1))
}

/// Chip-level waveform parameters under the per-symbol average-power
/// normalisation: every symbol of every `(n, w)` averages exactly `P`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ChipWaveformParams {
    /// Average optical power per symbol, watts.
    pub average_power: f64,
    /// Symbol period, seconds.
    pub symbol_period: f64,
    /// Chip amplitude `P n / w`, watts.
    pub chip_amplitude: f64,
    /// Chip duration `T / n`, seconds.
    pub chip_duration: f64,
}

impl ChipWaveformParams {
    pub fn new(scheme: &OppmScheme, average_power: f64, symbol_period: f64) -> Self {
        ChipWaveformParams {
            average_power,
            symbol_period,
            chip_amplitude: average_power * scheme.n as f64 / scheme.w as f64,
            chip_duration: symbol_period / scheme.n as f64,
        }
    }
}

// ---------------------------------------------------------------------------
// Rate and bandwidth
// ---------------------------------------------------------------------------

/// Bandwidth requirement `(n/w) Rb / log2 L` at bit rate `Rb`.
pub fn bandwidth(scheme: &OppmScheme, bit_rate: f64) -> f64 {
    (scheme.n as f64 / scheme.w as f64) * bit_rate / scheme.log2_l()
}

/// Maximum achievable bit rate `B delta log2 L` under modulation bandwidth
/// `B` (the strict upper bound of the rate inequality).
pub fn max_bit_rate(scheme: &OppmScheme, modulation_bandwidth: f64) -> f64 {
    modulation_bandwidth * scheme.duty_cycle() * scheme.log2_l()
}

/// Spectral efficiency `Rb_max / B = delta log2 L`, bit/s/Hz.
///
/// This is the bandwidth-formula-consistent value. The reciprocal form
/// `(1/delta) log2 L` that sometimes appears alongside it is not the ratio
/// of the maximum bit rate to the bandwidth requirement and is not used.
pub fn spectral_efficiency(scheme: &OppmScheme) -> f64 {
    scheme.duty_cycle() * scheme.log2_l()
}

// ---------------------------------------------------------------------------
// Encode / decode
// ---------------------------------------------------------------------------

/// Maps bit groups to Gray-labelled symbol indices.
///
/// The bit length must be a multiple of the scheme's bits per symbol; bits
/// are consumed MSB-first within each group.
pub fn encode(scheme: &OppmScheme, bits: &[bool]) -> Result<Vec<usize>> {
    let b = scheme.bits_per_symbol;
    if !bits.len().is_multiple_of(b) {
        return Err(Error::domain(format!(
            "bit length {} is not a multiple of {b} bits per symbol",
            bits.len()
        )));
    }
    let mut out = Vec::with_capacity(bits.len() / b);
    for group in bits.chunks(b) {
        let mut v: u64 = 0;
        for &bit in group {
            v = v << 1 | bit as u64;
        }
        out.push(gray_to_index(v) as usize);
    }
    Ok(out)
}

/// Recovers the bit groups of Gray-labelled symbol indices.
///
/// Indices beyond the labelled range (possible decoder outputs) are clamped
/// to the nearest labelled symbol.
pub fn symbols_to_bits(scheme: &OppmScheme, indices: &[usize]) -> Vec<bool> {
    let b = scheme.bits_per_symbol;
    let top = scheme.labelled_symbols() - 1;
    let mut out = Vec::with_capacity(indices.len() * b);
    for &ix in indices {
        let label = scheme
            .gray_label(ix.min(top))
            .expect("clamped index is labelled");
        for k in (0..b).rev() {
            out.push(label >> k & 1 == 1);
        }
    }
    out
}

/// Hard ML decision from `n` chip-rate matched-filter samples.
///
/// For equal-energy consecutive-ones symbols the ML rule reduces to the
/// largest windowed sum over the `L` candidate runs; ties break toward the
/// lowest index.
pub fn decode_hard(scheme: &OppmScheme, chip_samples: &[f64]) -> Result<usize> {
    if chip_samples.len() != scheme.n {
        return Err(Error::domain(format!(
            "expected {} chip samples, got {}",
            scheme.n,
            chip_samples.len()
        )));
    }
    Ok(decode_windowed(scheme.w, scheme.l, chip_samples))
}

/// Windowed-sum argmax used by both the decoder and the Monte Carlo engine.
pub(crate) fn decode_windowed(w: usize, l: usize, samples: &[f64]) -> usize {
    let mut window: f64 = samples[..w].iter().sum();
    let mut best = window;
    let mut best_ix = 0usize;
    for i in 1..l {
        window += samples[i + w - 1] - samples[i - 1];
        if window > best {
            best = window;
            best_ix = i;
        }
    }
    best_ix
}

fn gray_to_index(mut g: u64) -> u64 {
    let mut i = g;
    while g > 0 {
        g >>= 1;
        i ^= g;
    }
    i
}

// ---------------------------------------------------------------------------
// Analytic BER and power requirement
// ---------------------------------------------------------------------------

/// Nearest-neighbour BER of uncoded OPPM at average power `P`, bit rate
/// `Rb` and noise level `N0`:
///
/// ```text
/// BER = Q( (P/w) sqrt( n log2 L / (2 Rb N0) ) )
/// ```
///
/// (minimum-distance argument with `d = 2` differing chips between adjacent
/// symbols and symbol period `T = log2 L / Rb`).
pub fn analytic_ber(scheme: &OppmScheme, power: f64, bit_rate: f64, n0: f64) -> Result<f64> {
    if bit_rate <= 0.0 || n0 <= 0.0 || power < 0.0 {
        return Err(Error::domain(
            "analytic BER needs positive bit rate and noise level and nonnegative power",
        ));
    }
    let arg = power / scheme.w as f64
        * (scheme.n as f64 * scheme.log2_l() / (2.0 * bit_rate * n0)).sqrt();
    Ok(q(arg))
}

/// Average optical power of uncoded OPPM reaching `ber_target` with symbol
/// period `T`: `P = 2 w sqrt(N0 / (2 n T)) Qinv(BER)`.
pub fn required_power_uncoded(
    scheme: &OppmScheme,
    n0: f64,
    symbol_period: f64,
    ber_target: f64,
) -> Result<f64> {
    if !(ber_target > 0.0 && ber_target < 0.5) {
        return Err(Error::domain(format!(
            "BER target must lie in (0, 0.5), got {ber_target}"
        )));
    }
    if n0 <= 0.0 || symbol_period <= 0.0 {
        return Err(Error::domain("noise level and symbol period must be positive"));
    }
    Ok(2.0 * scheme.w as f64 * (n0 / (2.0 * scheme.n as f64 * symbol_period)).sqrt()
        * q_inv(ber_target))
}
