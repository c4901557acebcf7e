//! Command-line front end for the OPPM VLC design toolkit.
//!
//! Each subcommand wraps one step of the design flow and emits plot-ready
//! CSV on stdout or machine-readable JSON (see the README for the schemas).
//! Errors are reported as JSON on stderr with distinct exit codes:
//! 2 usage, 3 scenario file problems, 4 invalid scenario, 5 domain errors.

use clap::{Args, Parser, Subcommand};
use oppm_vlc::channel::{delay_spread, delay_spread_map, impulse_response};
use oppm_vlc::mc::{ber_sweep, min_code_length, McConfig, DEFAULT_SEED};
use oppm_vlc::modem::{make_scheme, max_bit_rate, weight_for_dimming};
use oppm_vlc::noise::{noise_budget, snr_sweep};
use oppm_vlc::photometry::{dimming_interval, illuminance_map, DimmingLevel};
use oppm_vlc::report::{design_report, DEFAULT_CANDIDATES, FEC_BER_THRESHOLD};
use oppm_vlc::scenario::{load_scenario, scenario_to_string, validate, ScenarioConfig};
use oppm_vlc::tcm::{coding_gain_db, power_vs_dimming_curve};
use std::io::Write;

#[derive(Parser)]
#[command(
    name = "oppm-vlc",
    about = "Design toolkit for dimmable OPPM visible-light communication",
    version
)]
struct Cli {
    /// Cap on worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArg {
    /// Scenario file; `-` selects the embedded office preset.
    #[arg(long, default_value = "-")]
    scenario: String,
}

#[derive(Subcommand)]
enum Command {
    /// Illuminance over the room footprint: CSV (x_m, y_m, lux) plus a JSON
    /// summary line on stderr.
    IlluminanceMap {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Perceived brightness, percent.
        #[arg(long, default_value_t = 80.0)]
        dimming: f64,
        /// Observation plane height, metres.
        #[arg(long, default_value_t = 0.85)]
        height: f64,
        /// Grid step, metres.
        #[arg(long, default_value_t = 0.1)]
        step: f64,
    },
    /// Perceived-brightness interval meeting a lux band at the receiver.
    DimmingInterval {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long, default_value_t = 200.0)]
        lux_min: f64,
        #[arg(long, default_value_t = 800.0)]
        lux_max: f64,
    },
    /// Delay spread at the receiver (JSON) or over the room (--map, CSV).
    DelaySpread {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Emit a CSV map over the room instead of the receiver-point JSON.
        #[arg(long)]
        map: bool,
        #[arg(long, default_value_t = 0.85)]
        height: f64,
        #[arg(long, default_value_t = 0.25)]
        step: f64,
    },
    /// Maximum OPPM bit rate versus perceived brightness (CSV).
    RateCurve {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Modulation bandwidth override, Hz.
        #[arg(long)]
        bandwidth: Option<f64>,
        /// Code length.
        #[arg(long, default_value_t = 32)]
        n: usize,
        #[arg(long, default_value_t = 44.0)]
        from: f64,
        #[arg(long, default_value_t = 90.0)]
        to: f64,
        #[arg(long, default_value_t = 1.0)]
        step_percent: f64,
    },
    /// Electrical SNR versus perceived brightness (CSV).
    SnrCurve {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Scheme as n,w (sets the bandwidth contract of the SNR).
        #[arg(long, default_value = "32,8", value_parser = parse_scheme)]
        scheme: (usize, usize),
        #[arg(long, default_value_t = 10.0)]
        from: f64,
        #[arg(long, default_value_t = 99.0)]
        to: f64,
        #[arg(long, default_value_t = 1.0)]
        step_percent: f64,
    },
    /// Monte Carlo BER curves (CSV).
    BerSweep {
        /// Schemes as n,w pairs, e.g. 8,2 16,8 32,8.
        #[arg(long, num_args = 1.., required = true, value_parser = parse_scheme)]
        schemes: Vec<(usize, usize)>,
        /// SNR grid as start:stop:step in dB.
        #[arg(long, value_parser = parse_range, allow_hyphen_values = true)]
        snr: (f64, f64, f64),
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        target_errors: u64,
        #[arg(long, default_value_t = 10_000_000)]
        max_symbols: u64,
    },
    /// Minimum code length against the FEC threshold (JSON).
    MinCodeLength {
        /// Perceived brightness, percent.
        #[arg(long)]
        dimming: f64,
        /// Channel SNR, dB.
        #[arg(long, allow_negative_numbers = true)]
        snr: f64,
        #[arg(long, default_value_t = FEC_BER_THRESHOLD)]
        threshold: f64,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_CANDIDATES)]
        candidates: Vec<usize>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// TCM coding gains for an alphabet size (JSON).
    TcmGain {
        /// Base alphabet size L.
        #[arg(long, default_value_t = 9)]
        l: usize,
        /// Intra-subset minimum distances.
        #[arg(long, value_delimiter = ',', default_values_t = vec![4u32, 8, 16])]
        dc: Vec<u32>,
        /// Report the exact form instead of the large-L approximation.
        #[arg(long)]
        exact: bool,
    },
    /// Average-power requirement of uncoded and TCM OPPM across dimming (CSV).
    PowerCurve {
        #[command(flatten)]
        scenario: ScenarioArg,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 1e-6)]
        ber: f64,
        #[arg(long, default_value_t = 44.0)]
        from: f64,
        #[arg(long, default_value_t = 90.0)]
        to: f64,
        #[arg(long, default_value_t = 1.0)]
        step_percent: f64,
    },
    /// Full design flow on one scenario (JSON).
    DesignReport {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Perceived-brightness levels to plan for, percent.
        #[arg(long, value_delimiter = ',', default_values_t = vec![35.0, 50.0, 75.0, 86.0])]
        levels: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Impulse-response taps at the receiver (CSV: delay_s, gain, kind).
    ImpulseResponse {
        #[command(flatten)]
        scenario: ScenarioArg,
    },
    /// Noise budget at one operating point (JSON).
    NoiseBudget {
        #[command(flatten)]
        scenario: ScenarioArg,
        /// Perceived brightness, percent.
        #[arg(long, default_value_t = 50.0)]
        dimming: f64,
        /// Scheme as n,w.
        #[arg(long, default_value = "32,8", value_parser = parse_scheme)]
        scheme: (usize, usize),
    },
    /// Symbol table of an (n, w) scheme, one n-tuple per line.
    SymbolTable {
        #[arg(long, value_parser = parse_scheme)]
        scheme: (usize, usize),
    },
    /// Analytic BER of a scheme (JSON), from a channel SNR or from
    /// explicit power / bit-rate / noise-level coordinates.
    BerAnalytic {
        #[arg(long, value_parser = parse_scheme)]
        scheme: (usize, usize),
        /// Channel SNR, dB (uses the engine's normalisation contract).
        #[arg(long, allow_negative_numbers = true, conflicts_with_all = ["power", "bit_rate", "n0"])]
        snr: Option<f64>,
        /// Average optical power, W (with --bit-rate and --n0).
        #[arg(long, requires_all = ["bit_rate", "n0"])]
        power: Option<f64>,
        /// Bit rate, bit/s.
        #[arg(long)]
        bit_rate: Option<f64>,
        /// Noise level N0.
        #[arg(long)]
        n0: Option<f64>,
    },
    /// Set-partitioning tree of an (n, w) alphabet (JSON).
    SetPartition {
        #[arg(long, value_parser = parse_scheme)]
        scheme: (usize, usize),
        #[arg(long)]
        depth: usize,
    },
    /// Write the embedded office preset as a scenario file.
    ExportScenario {
        /// Output path; stdout when omitted.
        #[arg(long)]
        out: Option<String>,
    },
}

fn parse_scheme(s: &str) -> Result<(usize, usize), String> {
    let (n, w) = s
        .split_once(',')
        .ok_or_else(|| format!("expected n,w - got '{s}'"))?;
    Ok((
        n.trim().parse().map_err(|_| format!("bad code length '{n}'"))?,
        w.trim().parse().map_err(|_| format!("bad weight '{w}'"))?,
    ))
}

fn parse_range(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(format!("expected start:stop:step - got '{s}'"));
    }
    let nums: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| format!("bad number '{p}'")))
        .collect::<Result<_, _>>()?;
    if nums[2] <= 0.0 || nums[1] < nums[0] {
        return Err("range must be ascending with a positive step".to_string());
    }
    Ok((nums[0], nums[1], nums[2]))
}

fn percent_range(from: f64, to: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut p = from;
    while p <= to + 1e-9 {
        out.push((p * 1000.0).round() / 1000.0);
        p += step;
    }
    out
}

const EXIT_SCENARIO_IO: i32 = 3;
const EXIT_VALIDATION: i32 = 4;
const EXIT_DOMAIN: i32 = 5;

fn fail(code: i32, message: &str) -> ! {
    let payload = serde_json::json!({ "error": message, "exit_code": code });
    let _ = writeln!(std::io::stderr(), "{payload}");
    std::process::exit(code);
}

fn load_and_validate(path: &str) -> ScenarioConfig {
    let config = match load_scenario(path) {
        Ok(c) => c,
        Err(e) => fail(EXIT_SCENARIO_IO, &format!("cannot load scenario '{path}': {e}")),
    };
    let report = validate(&config);
    if !report.is_valid() {
        let details: Vec<String> = report
            .violations
            .iter()
            .map(|v| format!("{}: {}", v.field, v.message))
            .collect();
        fail(
            EXIT_VALIDATION,
            &format!("scenario invalid: {}", details.join("; ")),
        );
    }
    config
}

fn domain<T>(r: oppm_vlc::Result<T>) -> T {
    match r {
        Ok(v) => v,
        Err(e) => fail(EXIT_DOMAIN, &e.to_string()),
    }
}

fn json_out<T: serde::Serialize>(value: &T) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report types serialise")
    );
}

fn main() {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    match cli.command {
        Command::IlluminanceMap {
            scenario,
            dimming,
            height,
            step,
        } => {
            let config = load_and_validate(&scenario.scenario);
            let level = domain(DimmingLevel::from_perceived_percent(dimming));
            let map = domain(illuminance_map(&config, height, level, step));
            println!("x_m,y_m,lux");
            for s in &map.samples {
                println!("{},{},{}", s.x, s.y, s.lux);
            }
            let (ax, ay) = map.argmax();
            let summary = serde_json::json!({
                "plane_height_m": map.plane_height,
                "perceived_percent": dimming,
                "duty_cycle": level.duty_cycle(),
                "min_lux": map.min_lux(),
                "max_lux": map.max_lux(),
                "argmax_m": [ax, ay],
                "compliant_fraction_200_800": map.compliant_fraction(200.0, 800.0),
            });
            let _ = writeln!(std::io::stderr(), "{summary}");
        }
        Command::DimmingInterval {
            scenario,
            lux_min,
            lux_max,
        } => {
            let config = load_and_validate(&scenario.scenario);
            let interval = domain(dimming_interval(
                &config,
                config.receiver.position,
                lux_min,
                lux_max,
            ));
            json_out(&interval);
        }
        Command::DelaySpread {
            scenario,
            map,
            height,
            step,
        } => {
            let config = load_and_validate(&scenario.scenario);
            if map {
                let cells = domain(delay_spread_map(&config, height, step));
                println!("x_m,y_m,rms_delay_spread_s");
                for c in &cells {
                    println!("{},{},{}", c.x, c.y, c.rms_spread);
                }
            } else {
                let h = impulse_response(&config);
                let ds = domain(delay_spread(&h));
                let out = serde_json::json!({
                    "h_los0": h.h_los0,
                    "h_nlos0": h.h_nlos0,
                    "h0": h.h0(),
                    "mean_delay_s": ds.mean_delay,
                    "rms_delay_spread_s": ds.rms_spread,
                    "max_isi_free_rate_bps": ds.max_isi_free_rate,
                });
                json_out(&out);
            }
        }
        Command::RateCurve {
            scenario,
            bandwidth,
            n,
            from,
            to,
            step_percent,
        } => {
            let config = load_and_validate(&scenario.scenario);
            let b = bandwidth.unwrap_or(config.modulation_bandwidth);
            println!("perceived_percent,duty_cycle,n,w,l,max_bit_rate_bps");
            for p in percent_range(from, to, step_percent) {
                let w = domain(weight_for_dimming(n, p));
                let scheme = domain(make_scheme(n, w));
                println!(
                    "{},{},{},{},{},{}",
                    p,
                    scheme.duty_cycle(),
                    n,
                    w,
                    scheme.l,
                    max_bit_rate(&scheme, b)
                );
            }
        }
        Command::SnrCurve {
            scenario,
            scheme,
            from,
            to,
            step_percent,
        } => {
            let config = load_and_validate(&scenario.scenario);
            let h = impulse_response(&config);
            let percents = percent_range(from, to, step_percent);
            let _ = domain(make_scheme(scheme.0, scheme.1));
            let points = domain(snr_sweep(&config, &h, scheme.0, &percents));
            println!("perceived_percent,duty_cycle,snr_db");
            for pt in points {
                println!("{},{},{}", pt.perceived_percent, pt.duty_cycle, pt.snr_db);
            }
        }
        Command::BerSweep {
            schemes,
            snr,
            seed,
            target_errors,
            max_symbols,
        } => {
            let mut grid = Vec::new();
            let mut s = snr.0;
            while s <= snr.1 + 1e-9 {
                grid.push(s);
                s += snr.2;
            }
            let mc = McConfig {
                rng_seed: seed,
                max_symbols,
                target_errors,
                snr_grid_db: grid,
                schemes,
            };
            let curves = domain(ber_sweep(&mc));
            println!(
                "n,w,snr_db,ber,ci_low,ci_high,trials,errors,symbols,symbol_errors,bits,bit_errors,seed,config_hash"
            );
            for c in &curves {
                for p in &c.points {
                    println!(
                        "{},{},{},{},{},{},{},{},{},{},{},{},{},{:016x}",
                        p.n,
                        p.w,
                        p.snr_db,
                        p.ber,
                        p.ci_low,
                        p.ci_high,
                        p.trials,
                        p.errors,
                        p.symbols,
                        p.symbol_errors,
                        p.bits,
                        p.bit_errors,
                        c.rng_seed,
                        c.config_hash
                    );
                }
            }
        }
        Command::MinCodeLength {
            dimming,
            snr,
            threshold,
            candidates,
            seed,
        } => {
            let mc = McConfig::with_seed(seed);
            let decision = domain(min_code_length(dimming, &candidates, snr, threshold, &mc));
            json_out(&decision);
        }
        Command::TcmGain { l, dc, exact } => {
            let entries: Vec<serde_json::Value> = dc
                .iter()
                .map(|&d| {
                    let gain = domain(coding_gain_db(l, d, exact));
                    serde_json::json!({ "d_c": d, "gain_db": gain })
                })
                .collect();
            json_out(&serde_json::json!({
                "l": l,
                "form": if exact { "exact" } else { "approx" },
                "gains": entries,
            }));
        }
        Command::PowerCurve {
            scenario,
            n,
            ber,
            from,
            to,
            step_percent,
        } => {
            let config = load_and_validate(&scenario.scenario);
            let h = impulse_response(&config);
            let percents = percent_range(from, to, step_percent);
            // Noise level and symbol period at the first operating point:
            // the scheme's maximum rate under the scenario bandwidth.
            let w = domain(weight_for_dimming(n, percents[0]));
            let scheme = domain(make_scheme(n, w));
            let dim = domain(DimmingLevel::from_perceived_percent(percents[0]));
            let budget = noise_budget(&config, dim, &scheme, &h);
            let rb = max_bit_rate(&scheme, config.modulation_bandwidth);
            let t = scheme.log2_l() / rb;
            let rows = domain(power_vs_dimming_curve(n, &percents, budget.n0, t, ber, &[4, 8, 16]));
            println!(
                "perceived_percent,n,w,p_uncoded_dbm,p_tcm_dc4_dbm,p_tcm_dc8_dbm,p_tcm_dc16_dbm"
            );
            for r in rows {
                let cell = |v: &Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
                println!(
                    "{},{},{},{},{},{},{}",
                    r.perceived_percent,
                    r.n,
                    r.w,
                    r.p_uncoded_dbm,
                    cell(&r.p_tcm_dbm[0].1),
                    cell(&r.p_tcm_dbm[1].1),
                    cell(&r.p_tcm_dbm[2].1)
                );
            }
        }
        Command::DesignReport {
            scenario,
            levels,
            seed,
        } => {
            let config = load_and_validate(&scenario.scenario);
            let mc = McConfig::with_seed(seed);
            let report = domain(design_report(&config, &levels, &mc));
            json_out(&report);
        }
        Command::ImpulseResponse { scenario } => {
            let config = load_and_validate(&scenario.scenario);
            let h = impulse_response(&config);
            println!("delay_s,gain,kind");
            for t in &h.los_taps {
                println!("{},{},los", t.delay, t.gain);
            }
            for t in &h.nlos_taps_binned {
                println!("{},{},nlos", t.delay, t.gain);
            }
        }
        Command::NoiseBudget {
            scenario,
            dimming,
            scheme,
        } => {
            let config = load_and_validate(&scenario.scenario);
            let level = domain(DimmingLevel::from_perceived_percent(dimming));
            let s = domain(make_scheme(scheme.0, scheme.1));
            let h = impulse_response(&config);
            let budget = noise_budget(&config, level, &s, &h);
            let snr = oppm_vlc::noise::snr_db(&config, level, &s, &h);
            let out = serde_json::json!({
                "perceived_percent": dimming,
                "duty_cycle": level.duty_cycle(),
                "budget": budget,
                "snr_db": snr,
            });
            json_out(&out);
        }
        Command::SymbolTable { scheme } => {
            let s = domain(make_scheme(scheme.0, scheme.1));
            for i in 0..s.l {
                println!("{}", s.pattern_string(i));
            }
        }
        Command::BerAnalytic {
            scheme,
            snr,
            power,
            bit_rate,
            n0,
        } => {
            let s = domain(make_scheme(scheme.0, scheme.1));
            let out = match (snr, power, bit_rate, n0) {
                (Some(snr_db_val), None, None, None) => {
                    let ber = oppm_vlc::mc::analytic_ber_at_snr(&s, snr_db_val);
                    serde_json::json!({
                        "n": s.n, "w": s.w, "snr_db": snr_db_val, "ber": ber,
                    })
                }
                (None, Some(p), Some(rb), Some(n0v)) => {
                    let ber = domain(oppm_vlc::modem::analytic_ber(&s, p, rb, n0v));
                    serde_json::json!({
                        "n": s.n, "w": s.w, "power_w": p, "bit_rate_bps": rb,
                        "n0": n0v, "ber": ber,
                    })
                }
                _ => fail(
                    EXIT_DOMAIN,
                    "ber-analytic needs either --snr or all of --power --bit-rate --n0",
                ),
            };
            json_out(&out);
        }
        Command::SetPartition { scheme, depth } => {
            let s = domain(make_scheme(scheme.0, scheme.1));
            let tree = domain(oppm_vlc::tcm::set_partition(&s, depth));
            json_out(&tree);
        }
        Command::ExportScenario { out } => {
            let text = scenario_to_string(&oppm_vlc::scenario::office_scenario());
            match out {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, text) {
                        fail(EXIT_SCENARIO_IO, &format!("cannot write '{path}': {e}"));
                    }
                }
                None => print!("{text}"),
            }
        }
    }
}
