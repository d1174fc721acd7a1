//! Principal branch of the Lambert W function on `[0, inf)`.

use crate::error::{Error, Result};

const MAX_ITERS: usize = 64;

/// `W0(x)`: the unique `w >= 0` with `w e^w = x`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::domain("x", format!("W0 is only provided for x >= 0, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x.is_infinite() {
        return Ok(f64::INFINITY);
    }
    Ok(if x <= 10.0 { halley(x) } else { newton_log(x) })
}

/// Halley iteration on `w e^w - x`, started from `ln(1 + x)` scaled toward
/// the small-argument series.
fn halley(x: f64) -> f64 {
    let mut w = if x < 0.5 { x * (1.0 - x) } else { x.ln_1p() * 0.75 };
    for _ in 0..MAX_ITERS {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        let step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w.abs() {
            break;
        }
    }
    w
}

/// Newton iteration on `w + ln w - ln x`, which never forms `e^w`.
fn newton_log(x: f64) -> f64 {
    let lx = x.ln();
    let llx = lx.ln();
    let mut w = lx - llx + llx / lx;
    for _ in 0..MAX_ITERS {
        let step = (w + w.ln() - lx) * w / (w + 1.0);
        w -= step;
        if step.abs() <= 4.0 * f64::EPSILON * w {
            break;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent reference: plain Newton on `w e^w - x` from a crude start.
    fn newton_oracle(x: f64) -> f64 {
        let mut w = if x > 1.0 { x.ln() } else { x };
        for _ in 0..200 {
            let ew = w.exp();
            w -= (w * ew - x) / (ew * (w + 1.0));
        }
        w
    }

    #[test]
    fn known_values() {
        assert_eq!(lambert_w0(0.0).unwrap(), 0.0);
        assert!((lambert_w0(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        // Omega constant.
        assert!((lambert_w0(1.0).unwrap() - 0.567_143_290_409_783_8).abs() < 1e-15);
        assert!((newton_oracle(1.0) - 0.567_143_290_4).abs() < 1e-10);
        assert!(lambert_w0(-0.1).is_err());
        assert!(lambert_w0(f64::NAN).is_err());
    }

    #[test]
    fn residual_across_scales() {
        let mut x = 1e-300;
        while x < 1e300 {
            let w = lambert_w0(x).unwrap();
            if x < 1e200 {
                let r = (w * w.exp() - x).abs() / x;
                assert!(r <= 1e-12, "x={x} w={w} r={r}");
            } else {
                let r = (w + w.ln() - x.ln()).abs() / x.ln();
                assert!(r <= 1e-14, "x={x}");
            }
            x *= 7.3;
        }
    }

    #[test]
    fn matches_newton_oracle() {
        for &x in &[1e-6, 0.01, 0.3, 1.0, 2.0, 9.99, 10.01, 55.0, 1e6] {
            let w = lambert_w0(x).unwrap();
            let o = newton_oracle(x);
            assert!((w - o).abs() <= 1e-13 * o.max(1e-300), "x={x}: {w} vs {o}");
        }
    }
}
