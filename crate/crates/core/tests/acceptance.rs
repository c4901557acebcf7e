//! Acceptance suite: one test per design-flow requirement, each printing a
//! PASS line (run with `cargo test --test acceptance -- --nocapture` to see
//! them). Tolerances are pinned here, not configurable.

use oppm_vlc::channel::{delay_spread, impulse_response, nlos_taps_dense};
use oppm_vlc::math::{q, q_inv};
use oppm_vlc::mc::{
    ber_sweep, min_code_length, snr_for_analytic_ber, snr_equivalent_power, McConfig,
};
use oppm_vlc::modem::{
    analytic_ber, bandwidth, decode_hard, make_scheme, max_bit_rate, required_power_uncoded,
    spectral_efficiency,
};
use oppm_vlc::noise::snr_db;
use oppm_vlc::photometry::{dimming_interval, illuminance_at, DimmingLevel};
use oppm_vlc::scenario::office_scenario;
use oppm_vlc::tcm::{coded_scheme, coding_gain_db, required_power_tcm, set_partition};
use oppm_vlc::Vec3;
use std::time::Instant;

/// 1. Dimming interval at the receiver against the 200-800 lux standard:
///    within 3 percentage points of (44, 90), in under 5 seconds.
#[test]
fn criterion_1_dimming_interval() {
    let start = Instant::now();
    let config = office_scenario();
    let interval = dimming_interval(&config, config.receiver.position, 200.0, 800.0).unwrap();
    let low = interval.perceived_low.expect("interval must not be empty");
    let high = interval.perceived_high.expect("interval must not be empty");
    let elapsed = start.elapsed();

    assert!(
        (low - 44.0).abs() <= 3.0,
        "low endpoint {low}% departs from 44% by more than 3 points"
    );
    assert!(
        (high - 90.0).abs() <= 3.0,
        "high endpoint {high}% departs from 90% by more than 3 points"
    );
    assert!(elapsed.as_secs_f64() < 5.0, "took {elapsed:?}");
    println!(
        "criterion 1 PASS: dimming interval ({low:.1}, {high:.1})% vs (44, 90)% target, {:.2} s",
        elapsed.as_secs_f64()
    );
}

/// 2. RMS delay spread at the receiver: within 15% of 1.28 ns at the 0.1 m
///    mesh, with < 2% movement when the mesh halves, and the 1/(10D) rate
///    bound within the same 15% of 78 Mbps. Under 60 seconds including the
///    0.05 m mesh.
#[test]
fn criterion_2_delay_spread_and_convergence() {
    let start = Instant::now();
    let config = office_scenario();
    assert_eq!(config.room.mesh_resolution, 0.1);
    let h_coarse = impulse_response(&config);
    let d_coarse = delay_spread(&h_coarse).unwrap();

    let mut fine = config.clone();
    fine.room.mesh_resolution = 0.05;
    let h_fine = impulse_response(&fine);
    let d_fine = delay_spread(&h_fine).unwrap();
    let elapsed = start.elapsed();

    let d_ns = d_coarse.rms_spread * 1e9;
    assert!(
        (d_ns - 1.28).abs() / 1.28 <= 0.15,
        "D = {d_ns:.3} ns departs from 1.28 ns by more than 15%"
    );
    let d_drift = (d_fine.rms_spread - d_coarse.rms_spread).abs() / d_coarse.rms_spread;
    assert!(d_drift < 0.02, "D moved {:.3}% on mesh halving", d_drift * 100.0);
    let h_drift = (h_fine.h_nlos0 - h_coarse.h_nlos0).abs() / h_coarse.h_nlos0;
    assert!(
        h_drift < 0.02,
        "H_nlos(0) moved {:.3}% on mesh halving",
        h_drift * 100.0
    );
    let bound = d_coarse.max_isi_free_rate.unwrap();
    assert!(
        (bound - 78e6).abs() / 78e6 <= 0.15,
        "rate bound {:.1} Mbps departs from 78 Mbps by more than 15%",
        bound / 1e6
    );
    // Arithmetic identity between the two reported numbers.
    assert!((bound - 1.0 / (10.0 * d_coarse.rms_spread)).abs() / bound < 1e-12);
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    println!(
        "criterion 2 PASS: D = {d_ns:.3} ns (1.28 ns +/- 15%), mesh drift {:.2}%/{:.2}%, bound {:.1} Mbps, {:.1} s",
        d_drift * 100.0,
        h_drift * 100.0,
        bound / 1e6,
        elapsed.as_secs_f64()
    );
}

/// 3. OPPM rate formulas against hand-computed values to 6 significant
///    digits, with exact round-trip identities.
#[test]
fn criterion_3_rate_formulas() {
    let s = make_scheme(16, 8).unwrap();
    // 20 MHz * 0.5 * log2(9)
    let rb = max_bit_rate(&s, 20e6);
    let expect = 20e6 * 0.5 * 9f64.log2();
    assert!((rb - expect).abs() / expect < 1e-12);
    assert!((rb - 31.699_250e6).abs() / rb < 1e-6, "rb = {rb}");

    // 10 Mbps needs (16/8) * 10e6 / log2(9) Hz.
    let b = bandwidth(&s, 10e6);
    let expect_b = 2.0 * 10e6 / 9f64.log2();
    assert!((b - expect_b).abs() / expect_b < 1e-12);
    assert!((b - 6_309_297.5e0).abs() / b < 1e-6, "b = {b}");

    let se = spectral_efficiency(&s);
    assert!((se - 0.5 * 9f64.log2()).abs() < 1e-12);
    assert!((se - 1.584_963).abs() / se < 1e-6);

    // Round trips are algebraic inverses (to double precision).
    for (n, w) in [(8usize, 2usize), (16, 8), (32, 8), (128, 16)] {
        let s = make_scheme(n, w).unwrap();
        for rb in [1e6, 10e6, 31.7e6] {
            let round = max_bit_rate(&s, bandwidth(&s, rb));
            assert!((round - rb).abs() / rb < 1e-12);
        }
        for b in [2e6, 20e6] {
            let round = bandwidth(&s, max_bit_rate(&s, b));
            assert!((round - b).abs() / b < 1e-12);
        }
        assert!(
            (spectral_efficiency(&s) - max_bit_rate(&s, 1.0)).abs() < 1e-12,
            "SE is the max rate per unit bandwidth"
        );
    }
    println!("criterion 3 PASS: rate formulas to 6 significant digits, round trips exact");
}

/// 4. Monte Carlo versus the analytic BER for (8,2), (16,8), (32,8) over a
///    10-point SNR grid: every point within 3 sigma with at least 100
///    collected errors, in under 10 minutes, parallel.
#[test]
fn criterion_4_mc_analytic_oracle_equivalence() {
    let start = Instant::now();
    // Grid per scheme: SNRs where the analytic BER spans 0.3 down to 1e-4.
    let ber_targets = [0.3, 0.2, 0.1, 0.05, 0.02, 0.01, 3e-3, 1e-3, 3e-4, 1e-4];
    for (n, w) in [(8usize, 2usize), (16, 8), (32, 8)] {
        let scheme = make_scheme(n, w).unwrap();
        let grid: Vec<f64> = ber_targets
            .iter()
            .map(|&t| snr_for_analytic_ber(&scheme, t))
            .collect();
        let mc = McConfig {
            snr_grid_db: grid.clone(),
            schemes: vec![(n, w)],
            max_symbols: 20_000_000,
            target_errors: 150,
            ..McConfig::default()
        };
        let curves = ber_sweep(&mc).unwrap();
        for (point, &target) in curves[0].points.iter().zip(&ber_targets) {
            assert!(
                point.errors >= 100,
                "({n},{w}) at {:.2} dB collected only {} errors",
                point.snr_db,
                point.errors
            );
            let sigma = (target * (1.0 - target) / point.trials as f64).sqrt();
            assert!(
                (point.ber - target).abs() <= 3.0 * sigma,
                "({n},{w}) at {:.2} dB: sim {} vs analytic {} (3 sigma {})",
                point.snr_db,
                point.ber,
                target,
                3.0 * sigma
            );
            // The power-domain formula agrees with the contract at these
            // coordinates.
            let rb = 31.7e6;
            let n0 = 4.2e-15;
            let p = snr_equivalent_power(&scheme, point.snr_db, rb, n0);
            let via_power = analytic_ber(&scheme, p, rb, n0).unwrap();
            assert!((via_power - target).abs() / target < 1e-9);
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 600.0, "took {elapsed:?}");
    println!(
        "criterion 4 PASS: 30 MC points within 3 sigma of the analytic BER, {:.1} s",
        elapsed.as_secs_f64()
    );
}

/// 5. Code-length table reproduction with the reference channel SNRs
///    injected directly: minimum n = 128, 32, 8, 8 exactly.
#[test]
fn criterion_5_code_length_table() {
    let rows = [
        (35.0, -6.2, 128usize),
        (50.0, -0.5, 32),
        (75.0, 6.5, 8),
        (86.0, 8.5, 8),
    ];
    let candidates = [8usize, 16, 32, 64, 128];
    let mc = McConfig {
        max_symbols: 20_000_000,
        target_errors: 200,
        ..McConfig::default()
    };
    for (percent, snr, expect) in rows {
        let decision = min_code_length(percent, &candidates, snr, 3e-3, &mc).unwrap();
        assert_eq!(
            decision.chosen_n,
            Some(expect),
            "at {percent}% / {snr} dB expected n = {expect}, got {:?} ({:?})",
            decision.chosen_n,
            decision.evaluated
        );
    }
    println!("criterion 5 PASS: minimum code lengths (128, 32, 8, 8) at the reference SNRs");
}

/// 6. Noise-model anchor: with the committed thermal calibration (set once
///    at the 50% point), the SNR at 35/75/86% perceived brightness lands
///    within 1 dB of the reference -6.2/6.5/8.5 dB.
#[test]
fn criterion_6_snr_anchors_after_calibration() {
    let config = office_scenario();
    let h = impulse_response(&config);
    let scheme = make_scheme(32, 8).unwrap();

    // The calibration point itself.
    let d50 = DimmingLevel::from_perceived_percent(50.0).unwrap();
    let at50 = snr_db(&config, d50, &scheme, &h);
    assert!(
        (at50 - (-0.5)).abs() < 0.05,
        "calibrated 50% point drifted: {at50} dB"
    );

    let anchors = [(35.0, -6.2), (75.0, 6.5), (86.0, 8.5)];
    let mut report = String::new();
    for (percent, expect) in anchors {
        let d = DimmingLevel::from_perceived_percent(percent).unwrap();
        let got = snr_db(&config, d, &scheme, &h);
        assert!(
            (got - expect).abs() <= 1.0,
            "snr({percent}%) = {got:.2} dB departs from {expect} dB by more than 1 dB"
        );
        report.push_str(&format!("{percent}%: {got:+.2} dB (target {expect:+.1}); "));
    }
    println!("criterion 6 PASS: {report}calibrated once at 50% = {at50:+.2} dB");
}

/// 7. TCM identities: coded-scheme parameters, coding-gain forms and the
///    power-ratio identity. The quoted 2.55 dB gain for d_c = 8 is not
///    derivable from the printed gain forms (both give ~1.4 dB at L = 9);
///    the property-based substitutes below stand in for it.
#[test]
fn criterion_7_tcm_identities() {
    let base = make_scheme(16, 8).unwrap(); // L = 9, delta = 0.5
    let coded = coded_scheme(&base, 8).unwrap();
    assert_eq!((coded.n_c, coded.w_c), (34, 17));
    assert_eq!(coded.coded_alphabet, 18);
    assert!(coded.rounding_warning.is_none());

    // Approximate gain at d_c = 16: 10 log10(2) = 3.01 dB.
    let approx = coding_gain_db(9, 16, false).unwrap();
    assert!((approx - 3.01).abs() <= 0.01, "approx gain {approx}");
    // Exact and approximate forms agree within 0.15 dB at L = 9.
    let exact = coding_gain_db(9, 16, true).unwrap();
    assert!((exact - approx).abs() <= 0.15, "exact {exact} vs approx {approx}");

    // Power-ratio identity: uncoded/TCM equals the exact-form gain to 1e-9.
    let n0 = 4.2e-15;
    let t = 1e-6;
    let ber = 1e-6;
    let p_uc = required_power_uncoded(&base, n0, t, ber).unwrap();
    for states in [2usize, 4, 8] {
        let c = coded_scheme(&base, states).unwrap();
        let p_tcm = required_power_tcm(&c, n0, t, ber).unwrap();
        let ratio_db = 10.0 * (p_uc / p_tcm).log10();
        let gain_db = coding_gain_db(base.l, c.d_c, true).unwrap();
        let rel = ((10f64.powf(ratio_db / 10.0) - 10f64.powf(gain_db / 10.0))
            / 10f64.powf(gain_db / 10.0))
        .abs();
        assert!(rel < 1e-9, "states {states}: ratio {ratio_db} vs gain {gain_db}");
    }

    // d_c = 4 costs the same power as uncoded within 0.3 dB.
    let c4 = coded_scheme(&base, 2).unwrap();
    assert_eq!(c4.d_c, 4);
    let p4 = required_power_tcm(&c4, n0, t, ber).unwrap();
    assert!((10.0 * (p_uc / p4).log10()).abs() < 0.3);

    // Substitutes for the non-reproducible 2.55 dB figure: gain is monotone
    // in d_c and the exact form at d_c = 8, L = 9 evaluates near 1.37 dB.
    let g8 = coding_gain_db(9, 8, true).unwrap();
    assert!((g8 - 1.374).abs() < 0.01, "exact d_c=8 gain {g8}");
    let gains: Vec<f64> = [4u32, 8, 16]
        .iter()
        .map(|&d| coding_gain_db(9, d, true).unwrap())
        .collect();
    assert!(gains.windows(2).all(|p| p[1] > p[0]));
    println!(
        "criterion 7 PASS: (n_c, w_c) = (34, 17); approx {approx:.3} dB, exact {exact:.3} dB; power ratio = exact gain to 1e-9"
    );
}

/// 8. Property suites: photometry linearity and superposition, channel
///    scale laws, the partition distance law by brute force to n = 64,
///    decoder equivalence with brute-force ML to n = 16, and seed
///    determinism across worker counts. (Randomised variants also run in
///    the `properties` test target.)
#[test]
fn criterion_8_property_suites() {
    // Photometry linearity and superposition.
    let config = office_scenario();
    let p = Vec3::new(1.9, 2.3, 0.85);
    let e1 = illuminance_at(&config, p, DimmingLevel::from_duty_cycle(1.0).unwrap()).unwrap();
    for k in 1..=4 {
        let delta = k as f64 / 4.0;
        let e = illuminance_at(&config, p, DimmingLevel::from_duty_cycle(delta).unwrap()).unwrap();
        assert!((e - delta * e1).abs() <= 1e-12 * e1);
    }
    let mut sum = 0.0;
    for i in 0..config.fixtures.len() {
        let mut one = config.clone();
        let f = one.fixtures[i].clone();
        one.fixtures = vec![f];
        sum += illuminance_at(&one, p, DimmingLevel::from_duty_cycle(1.0).unwrap()).unwrap();
    }
    assert!((sum - e1).abs() < 1e-9 * e1);

    // Channel scale law on a reduced scenario.
    let mut base = office_scenario();
    base.room.mesh_resolution = 0.5;
    base.fixtures.truncate(2);
    for f in &mut base.fixtures {
        f.grid_count = 3;
    }
    let s = 2.0;
    let mut scaled = base.clone();
    scaled.room.width *= s;
    scaled.room.depth *= s;
    scaled.room.height *= s;
    scaled.room.mesh_resolution *= s;
    for f in &mut scaled.fixtures {
        f.center = Vec3::new(f.center.x * s, f.center.y * s, f.center.z * s);
        f.led_spacing *= s;
        f.side *= s;
    }
    scaled.receiver.position = Vec3::new(
        base.receiver.position.x * s,
        base.receiver.position.y * s,
        base.receiver.position.z * s,
    );
    let (h1, h2) = (impulse_response(&base), impulse_response(&scaled));
    assert!((h2.h_los0 * s * s / h1.h_los0 - 1.0).abs() < 1e-9);
    assert!((h2.h_nlos0 * s * s / h1.h_nlos0 - 1.0).abs() < 1e-9);
    let (d1, d2) = (delay_spread(&h1).unwrap(), delay_spread(&h2).unwrap());
    assert!((d2.rms_spread / d1.rms_spread - s).abs() < 1e-6);
    // NLOS taps always arrive after the LOS tap of their LED.
    let min_los = h1
        .los_taps
        .iter()
        .map(|t| t.delay)
        .fold(f64::INFINITY, f64::min);
    assert!(nlos_taps_dense(&base).iter().all(|t| t.delay > min_los));

    // Partition distance law, exhaustively to n = 64.
    for n in [4usize, 8, 12, 16, 24, 32, 48, 64] {
        for w in 1..n {
            let scheme = make_scheme(n, w).unwrap();
            let max_depth = (scheme.l as f64).log2().floor() as usize;
            if max_depth < 1 {
                continue;
            }
            let tree = set_partition(&scheme, max_depth).unwrap();
            for level in &tree.levels {
                let mut brute: Option<u32> = None;
                for subset in &level.subsets {
                    for i in 0..subset.len() {
                        for j in i + 1..subset.len() {
                            let d = scheme.chip_distance(subset[i], subset[j]);
                            brute = Some(brute.map_or(d, |m| m.min(d)));
                        }
                    }
                }
                assert_eq!(level.min_distance, brute);
                if let Some(d) = brute {
                    assert_eq!(d, 2 * (1u32 << level.level).min(w as u32));
                }
            }
        }
    }

    // Decoder equals brute-force correlation ML for n <= 16.
    use rand::prelude::*;
    let mut rng = rand::rngs::StdRng::seed_from_u64(2024);
    for n in [4usize, 8, 12, 16] {
        for w in 1..n {
            let scheme = make_scheme(n, w).unwrap();
            for _ in 0..50 {
                let samples: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.4).collect();
                let fast = decode_hard(&scheme, &samples).unwrap();
                let mut best = f64::NEG_INFINITY;
                let mut best_ix = 0;
                for i in 0..scheme.l {
                    let corr: f64 = scheme
                        .chip_pattern(i)
                        .iter()
                        .zip(&samples)
                        .map(|(&c, &y)| if c { y } else { 0.0 })
                        .sum();
                    if corr > best {
                        best = corr;
                        best_ix = i;
                    }
                }
                assert_eq!(fast, best_ix, "(n={n}, w={w})");
            }
        }
    }

    // Determinism across worker counts.
    let mc = McConfig {
        snr_grid_db: vec![-3.0, 0.0, 3.0],
        schemes: vec![(8, 2), (32, 8)],
        max_symbols: 100_000,
        target_errors: 150,
        ..McConfig::with_seed(99)
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| ber_sweep(&mc).unwrap())
    };
    let (a, b) = (run(1), run(8));
    for (ca, cb) in a.iter().zip(&b) {
        for (pa, pb) in ca.points.iter().zip(&cb.points) {
            assert_eq!((pa.errors, pa.trials), (pb.errors, pb.trials));
        }
    }

    // Q / Qinv consistency backing every analytic formula above.
    for &x in &[0.5, 1.5, 3.0, 4.75] {
        assert!((q_inv(q(x)) - x).abs() < 1e-10 * (1.0 + x));
    }
    println!("criterion 8 PASS: property suites (photometry, channel scaling, partitions, decoder ML, determinism)");
}
