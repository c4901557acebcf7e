//! Gaussian tail utilities shared by the analytic BER formulas.
//!
//! `Q(x)` is the standard normal tail probability, evaluated through the
//! complementary error function: `Q(x) = erfc(x / sqrt(2)) / 2`. The inverse
//! is computed by bisection followed by Newton refinement, accurate to better
//! than 1e-10 relative error over the probabilities the crate works with.

use std::f64::consts::SQRT_2;

/// Standard normal tail probability `Q(x) = P(N(0,1) > x)`.
pub fn q(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Inverse of [`q`] for probabilities in `(0, 1)`.
///
/// Panics on arguments outside `(0, 1)`.
pub fn q_inv(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "q_inv argument must be in (0, 1), got {p}");
    if p == 0.5 {
        return 0.0;
    }
    // Q is decreasing; bracket the root then bisect.
    let (mut lo, mut hi) = if p < 0.5 { (0.0, 1.0) } else { (-1.0, 0.0) };
    while q(hi) > p {
        hi *= 2.0;
        if hi > 1e3 {
            break;
        }
    }
    while q(lo) < p {
        lo *= 2.0;
        if lo < -1e3 {
            break;
        }
    }
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if q(mid) > p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * (1.0 + hi.abs()) {
            break;
        }
    }
    let mut x = 0.5 * (lo + hi);
    // Newton polish: Q'(x) = -phi(x)
    for _ in 0..4 {
        let f = q(x) - p;
        let phi = (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        if phi == 0.0 {
            break;
        }
        x += f / phi;
    }
    x
}

/// dB helpers.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_known_values() {
        assert!((q(0.0) - 0.5).abs() < 1e-15);
        // Phi(1.96) ~ 0.975
        assert!((q(1.959963984540054) - 0.025).abs() < 1e-12);
        assert!((q(3.0) - 1.349898031630095e-3).abs() < 1e-15);
    }

    #[test]
    fn q_inv_known_values() {
        // Standard normal upper quantile for 1e-6
        assert!((q_inv(1e-6) - 4.753424308822899).abs() < 1e-9);
        assert!((q_inv(0.5)).abs() < 1e-12);
        assert!((q_inv(0.025) - 1.959963984540054).abs() < 1e-10);
    }

    #[test]
    fn q_and_q_inv_are_mutual_inverses() {
        // Relative error below 1e-10 across the working range of tail
        // probabilities.
        let mut p = 1e-9;
        while p < 0.5 {
            let x = q_inv(p);
            let back = q(x);
            assert!(
                ((back - p) / p).abs() < 1e-10,
                "roundtrip failed at p={p}: back={back}"
            );
            p *= 2.5;
        }
        for &x in &[0.0, 0.3, 1.0, 2.5, 4.0, 5.5] {
            let p = q(x);
            assert!((q_inv(p) - x).abs() < 1e-10 * (1.0 + x));
        }
    }
}
