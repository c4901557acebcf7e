//! Trellis-coded OPPM: set partitioning, coded-scheme parameters, power
//! requirement and coding gain.
//!
//! Doubling the alphabet at a fixed duty cycle keeps the bandwidth
//! requirement unchanged; the coded 2L-OPPM scheme has
//!
//! ```text
//! n_c = (2L - 1) / (1 - delta),   w_c = delta n_c
//! ```
//!
//! chips and weight. Set partitioning splits the alphabet by index parity at
//! each level, which doubles the intra-subset minimum chip distance per
//! level for consecutive-ones alphabets (subset gap `2^s` gives distance
//! `2 min(2^s, w)`). The average optical power reaching a BER target is the
//! uncoded formula with `(n, w, d) -> (n_c, w_c, d_c)`:
//!
//! ```text
//! P = 2 w_c sqrt( N0 / (d_c n_c T) ) Qinv(BER)
//! ```
//!
//! and the resulting coding gain over uncoded OPPM is
//!
//! ```text
//! gain = 10 log10( (L-1)/(2L-1) sqrt( (d_c/2) (2L-1)/(L-1) ) )
//!      ~ 10 log10( sqrt(d_c / 4) )
//! ```
//!
//! (exact and large-L forms). The `d_c = 4` partition costs the same power
//! as uncoded OPPM; gains appear from `d_c = 8` upward.

use crate::math::q_inv;
use crate::modem::{required_power_uncoded, OppmScheme};
use crate::{Error, Result};
use serde::Serialize;

/// One level of a partition tree.
#[derive(Debug, Clone, Serialize)]
pub struct PartitionLevel {
    /// Partition depth; level `s` has `2^s` subsets.
    pub level: usize,
    /// Symbol indices per subset (`index mod 2^s` rule).
    pub subsets: Vec<Vec<usize>>,
    /// Minimum intra-subset chip distance over subsets with at least two
    /// symbols; `None` when every subset is a singleton.
    pub min_distance: Option<u32>,
}

/// Set-partitioning tree of an OPPM alphabet.
#[derive(Debug, Clone, Serialize)]
pub struct PartitionTree {
    pub n: usize,
    pub w: usize,
    pub levels: Vec<PartitionLevel>,
}

/// Partitions `scheme`'s alphabet down to `depth` levels.
///
/// Subset `k` at level `s` collects the symbols with `index = k (mod 2^s)`,
/// so each split doubles the subset count and the index gap inside a subset.
pub fn set_partition(scheme: &OppmScheme, depth: usize) -> Result<PartitionTree> {
    if depth < 1 {
        return Err(Error::domain("partition depth must be at least 1"));
    }
    if 1usize << depth > scheme.l {
        return Err(Error::domain(format!(
            "partition depth {depth} too deep for {} symbols",
            scheme.l
        )));
    }
    let mut levels = Vec::with_capacity(depth + 1);
    for s in 0..=depth {
        let groups = 1usize << s;
        let mut subsets: Vec<Vec<usize>> = vec![Vec::new(); groups];
        for i in 0..scheme.l {
            subsets[i % groups].push(i);
        }
        let mut min_d: Option<u32> = None;
        for subset in &subsets {
            for pair in subset.windows(2) {
                let d = scheme.chip_distance(pair[0], pair[1]);
                min_d = Some(min_d.map_or(d, |m| m.min(d)));
            }
        }
        levels.push(PartitionLevel {
            level: s,
            subsets,
            min_distance: min_d,
        });
    }
    Ok(PartitionTree {
        n: scheme.n,
        w: scheme.w,
        levels,
    })
}

/// Parameters of a trellis-coded 2L-OPPM scheme.
#[derive(Debug, Clone, Serialize)]
pub struct TcmScheme {
    /// Alphabet size of the base (uncoded) scheme.
    pub base_l: usize,
    pub duty_cycle: f64,
    /// Coded alphabet size, `2 L`.
    pub coded_alphabet: usize,
    /// Coded chip count `(2L - 1) / (1 - delta)`, rounded if necessary.
    pub n_c: usize,
    /// Coded weight `delta n_c`.
    pub w_c: usize,
    /// Number of trellis states (`2^depth` of the partition).
    pub states: usize,
    /// Intra-subset minimum chip distance at that depth.
    pub d_c: u32,
    /// Present when the chip-count formula was not integral and had to be
    /// rounded; carries the exact rational value.
    pub rounding_warning: Option<String>,
}

/// Derives the TCM 2L-OPPM parameters for a base scheme and a state count.
///
/// `states` must be a power of two; depth `log2(states)` of the coded
/// alphabet's partition supplies `d_c`.
pub fn coded_scheme(scheme: &OppmScheme, states: usize) -> Result<TcmScheme> {
    if states == 0 || !states.is_power_of_two() {
        return Err(Error::domain(format!(
            "state count must be a power of two, got {states}"
        )));
    }
    let depth = states.trailing_zeros() as usize;
    let l = scheme.l;
    let coded_alphabet = 2 * l;
    if 1usize << depth > coded_alphabet {
        return Err(Error::domain(format!(
            "{states} states partition deeper than the {coded_alphabet}-symbol coded alphabet"
        )));
    }
    let delta = scheme.duty_cycle();
    let n_c_exact = (2.0 * l as f64 - 1.0) / (1.0 - delta);
    let n_c = n_c_exact.round();
    let rounding_warning = if (n_c_exact - n_c).abs() > 1e-9 {
        Some(format!(
            "coded chip count (2L-1)/(1-delta) = {n_c_exact:.6} is not integral; rounded to {n_c}"
        ))
    } else {
        None
    };
    let n_c = n_c as usize;
    let w_c = (delta * n_c as f64).round() as usize;
    // Subset index gap 2^depth in the coded alphabet gives the distance
    // 2 min(2^depth, w_c).
    let d_c = 2 * (1u32 << depth).min(w_c as u32);
    Ok(TcmScheme {
        base_l: l,
        duty_cycle: delta,
        coded_alphabet,
        n_c,
        w_c,
        states,
        d_c,
        rounding_warning,
    })
}

/// Average optical power of the TCM 2L-OPPM scheme reaching `ber_target`
/// with symbol period `T`.
pub fn required_power_tcm(tcm: &TcmScheme, n0: f64, symbol_period: f64, ber_target: f64) -> Result<f64> {
    if !(ber_target > 0.0 && ber_target < 0.5) {
        return Err(Error::domain(format!(
            "BER target must lie in (0, 0.5), got {ber_target}"
        )));
    }
    if n0 <= 0.0 || symbol_period <= 0.0 {
        return Err(Error::domain("noise level and symbol period must be positive"));
    }
    if tcm.d_c < 2 {
        return Err(Error::domain("coded minimum distance must be at least 2"));
    }
    Ok(2.0 * tcm.w_c as f64
        * (n0 / (tcm.d_c as f64 * tcm.n_c as f64 * symbol_period)).sqrt()
        * q_inv(ber_target))
}

/// Coding gain of TCM 2L-OPPM over uncoded OPPM, in dB.
///
/// `exact` selects the full form; otherwise the large-L approximation
/// `10 log10(sqrt(d_c/4))`.
pub fn coding_gain_db(l: usize, d_c: u32, exact: bool) -> Result<f64> {
    if l < 2 {
        return Err(Error::domain("alphabet size must be at least 2"));
    }
    if d_c < 2 {
        return Err(Error::domain("coded minimum distance must be at least 2"));
    }
    let dc = d_c as f64;
    let gain = if exact {
        let lf = l as f64;
        (lf - 1.0) / (2.0 * lf - 1.0) * (dc / 2.0 * (2.0 * lf - 1.0) / (lf - 1.0)).sqrt()
    } else {
        (dc / 4.0).sqrt()
    };
    Ok(10.0 * gain.log10())
}

/// One row of the power-versus-dimming comparison.
#[derive(Debug, Clone, Serialize)]
pub struct PowerCurvePoint {
    pub perceived_percent: f64,
    pub n: usize,
    pub w: usize,
    /// Uncoded requirement, dBm.
    pub p_uncoded_dbm: f64,
    /// TCM requirement per requested `d_c`, dBm; `None` when the partition
    /// of the coded alphabet cannot reach that distance.
    pub p_tcm_dbm: Vec<(u32, Option<f64>)>,
}

/// Average-power requirement of uncoded and TCM OPPM across a dimming sweep,
/// at a BER target, code length `n` and symbol period `T`.
pub fn power_vs_dimming_curve(
    code_length: usize,
    perceived_percents: &[f64],
    n0: f64,
    symbol_period: f64,
    ber_target: f64,
    d_c_list: &[u32],
) -> Result<Vec<PowerCurvePoint>> {
    let dbm = |watts: f64| 10.0 * (watts / 1e-3).log10();
    perceived_percents
        .iter()
        .map(|&p| {
            let w = crate::modem::weight_for_dimming(code_length, p)?;
            let scheme = crate::modem::make_scheme(code_length, w)?;
            let p_uc = required_power_uncoded(&scheme, n0, symbol_period, ber_target)?;
            let mut p_tcm = Vec::with_capacity(d_c_list.len());
            for &dc in d_c_list {
                if dc < 4 || !(dc / 2).is_power_of_two() {
                    p_tcm.push((dc, None));
                    continue;
                }
                let states = (dc / 2) as usize;
                let coded = coded_scheme(&scheme, states)?;
                if coded.d_c == dc {
                    let pw = required_power_tcm(&coded, n0, symbol_period, ber_target)?;
                    p_tcm.push((dc, Some(dbm(pw))));
                } else {
                    // Weight too small for this distance at this dimming level.
                    p_tcm.push((dc, None));
                }
            }
            Ok(PowerCurvePoint {
                perceived_percent: p,
                n: code_length,
                w,
                p_uncoded_dbm: dbm(p_uc),
                p_tcm_dbm: p_tcm,
            })
        })
        .collect()
}
