#!/usr/bin/env python3
"""Smoke test for the oppm_vlc_py extension module.

Builds nothing itself: run `cargo build -p oppm-vlc-python` (or --release)
first. The script locates the compiled cdylib in target/, exposes it under
the importable module name and exercises the main entry points.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path


def import_module():
    root = Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / profile / name
        for profile in ("release", "debug")
        for name in ("liboppm_vlc_py.so", "oppm_vlc_py.so", "liboppm_vlc_py.dylib")
    ]
    lib = next((c for c in candidates if c.exists()), None)
    if lib is None:
        sys.exit(
            "oppm_vlc_py cdylib not found. Build it first:\n"
            "    cargo build -p oppm-vlc-python"
        )
    stage = Path(tempfile.mkdtemp(prefix="oppm-vlc-py-"))
    shutil.copy2(lib, stage / "oppm_vlc_py.so")
    sys.path.insert(0, str(stage))
    import oppm_vlc_py

    return oppm_vlc_py


def approx(a, b, rel=1e-6):
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-30)


def main():
    vlc = import_module()
    checks = 0

    def ok(label, cond):
        nonlocal checks
        if not cond:
            sys.exit(f"FAIL: {label}")
        checks += 1
        print(f"ok: {label}")

    # Scenario preset and validation.
    sc = vlc.Scenario.office()
    ok("preset validates", sc.validate() == [])
    ok("preset receiver position", sc.receiver_position == (1.0, 1.0, 0.85))
    ok("preset fixtures", sc.fixture_count == 4)

    # Scenario file round trip.
    with tempfile.NamedTemporaryFile(suffix=".scenario", delete=False) as f:
        path = f.name
    sc.to_file(path)
    back = vlc.Scenario.from_file(path)
    ok("scenario file round trip", back.validate() == [])

    # Photometry: full-on illuminance and the standards interval.
    e1 = vlc.illuminance_at(sc, (1.0, 1.0, 0.85), 99.9999)
    ok("full-on illuminance near 1000 lux", 900 < e1 < 1100)
    interval = vlc.dimming_interval(sc, 200.0, 800.0)
    ok("dimming interval low ~ 44.8%", approx(interval["perceived_low"], 44.8, 1e-3))
    ok("dimming interval high ~ 89.5%", approx(interval["perceived_high"], 89.5, 1e-3))

    # Lambert mode.
    ok("lambertian mode of 60 deg is 1", approx(vlc.lambertian_mode(60.0), 1.0, 1e-12))

    # Channel: delay spread and the ISI-free bound.
    ds = vlc.delay_spread(sc)
    d_ns = ds["rms_delay_spread_s"] * 1e9
    ok("delay spread within 15% of 1.28 ns", abs(d_ns - 1.28) / 1.28 <= 0.15)
    ok(
        "rate bound equals 1/(10D)",
        approx(ds["max_isi_free_rate_bps"], 1.0 / (10.0 * ds["rms_delay_spread_s"])),
    )

    # Modem: scheme table, rates, encode/decode.
    s = vlc.OppmScheme(16, 8)
    ok("scheme alphabet size", s.l == 9)
    ok("scheme duty cycle", approx(s.duty_cycle, 0.5))
    ok("max bit rate at 20 MHz ~ 31.7 Mbps", approx(s.max_bit_rate(20e6), 31.7e6, 1e-3))
    table = s.symbol_table()
    ok("first symbol pattern", table[0] == "1111111100000000")
    bits = [True, False, True, False, False, True]
    symbols = s.encode(bits)
    ok("encode/decode round trip", s.symbols_to_bits(symbols) == bits)
    chips = [1.0 if c == "1" else 0.0 for c in table[4]]
    ok("noiseless decode", s.decode_hard(chips) == 4)
    ok("weight for 50% at n=32", vlc.weight_for_dimming(32, 50.0) == 8)

    # Noise: the calibrated SNR anchor.
    ok("snr(50%) ~ -0.5 dB", abs(vlc.snr_db(sc, 50.0) + 0.5) < 0.1)

    # Monte Carlo against the analytic curve.
    target = 1e-2
    snr = None
    for cand in [x / 10.0 for x in range(-80, 120)]:
        if vlc.analytic_ber_at_snr(32, 8, cand) <= target:
            snr = cand
            break
    point = vlc.simulate_ber(32, 8, snr, seed=7, target_errors=300)
    ok(
        "simulated BER tracks analytic within 3 sigma",
        abs(point["ber"] - target) <= 5 * math.sqrt(target / point["trials"]) + 2e-3,
    )
    decision = vlc.min_code_length(50.0, -0.5)
    ok("minimum code length at -0.5 dB is 32", decision["chosen_n"] == 32)

    # TCM: coded parameters and gains.
    coded = vlc.coded_scheme(16, 8, 8)
    ok("coded chips and weight", (coded["n_c"], coded["w_c"]) == (34, 17))
    ok("approx gain at d_c=16 ~ 3.01 dB", approx(vlc.coding_gain_db(9, 16), 3.0103, 1e-4))
    tree = vlc.set_partition(16, 8, 2)
    ok("partition level 2 distance", tree["levels"][2]["min_distance"] == 8)

    # Q functions.
    ok("q_inv(1e-6) ~ 4.7534", approx(vlc.q_inv(1e-6), 4.753424, 1e-5))

    print(f"\nsmoke test passed: {checks} checks")


if __name__ == "__main__":
    main()
