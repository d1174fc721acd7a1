//! Per-subcarrier rates and transmission delays for bit-level and semantic
//! transmission.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Delay reported for a subcarrier that must send data at zero rate.
pub const UNUSABLE_DELAY: f64 = f64::MAX;

/// Transmission mode of one subcarrier. Exactly one mode is active, which is
/// the `a_l + ã_l = 1` constraint by construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Shannon,
    Semantic,
}

impl Mode {
    pub fn is_semantic(self) -> bool {
        self == Mode::Semantic
    }
}

/// SNR gap for uncoded M-QAM at a target bit error rate:
/// `Gamma = -ln(5 BER) / 1.5`. Rejects rates whose gap would fall below 1.
pub fn gamma_from_ber(ber: f64) -> Result<f64> {
    if !(ber > 0.0 && ber < 0.2) {
        return Err(Error::domain("ber", format!("{ber} outside (0, 0.2)")));
    }
    let gap = -(5.0 * ber).ln() / 1.5;
    // Tolerate the rounding of the exact boundary BER = exp(-1.5)/5.
    if gap < 1.0 - 1e-12 {
        return Err(Error::domain("ber", format!("{ber} gives SNR gap {gap} < 1")));
    }
    Ok(gap.max(1.0))
}

/// Gap-adjusted rate `W log2(1 + P / (c Gamma))` in bit/s.
pub fn shannon_rate(power: f64, noise_over_gain: f64, gap: f64, bandwidth_hz: f64) -> f64 {
    bandwidth_hz * (power / (noise_over_gain * gap)).ln_1p() / LN_2
}

/// Time to push `bits` at `rate`. A positive payload at zero rate saturates
/// to [`UNUSABLE_DELAY`].
pub fn shannon_delay(bits: f64, rate: f64) -> f64 {
    if bits == 0.0 {
        0.0
    } else if rate > 0.0 {
        (bits / rate).min(UNUSABLE_DELAY)
    } else {
        UNUSABLE_DELAY
    }
}

/// Semantic transmission sends one analog symbol per channel use, so the
/// rate equals the bandwidth and the delay is independent of power.
pub fn semantic_delay(words: u64, symbols_per_word: u32, bandwidth_hz: f64) -> f64 {
    (symbols_per_word as u64 * words) as f64 / bandwidth_hz
}

/// Solver output for one subcarrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubcarrierAllocation {
    pub power: f64,
    pub mode: Mode,
    pub delay: f64,
}
