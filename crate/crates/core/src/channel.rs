//! Rayleigh-faded per-subcarrier channel gains with free-space path loss.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

pub const SPEED_OF_LIGHT: f64 = 3.0e8;

/// Smallest admissible power gain; guards against underflow of `|h|^2`.
pub const GAIN_FLOOR: f64 = 1e-30;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Converts a power spectral density in dBm/Hz to W/Hz.
pub fn dbm_per_hz_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm) * 1e-3
}

/// Free-space path loss factor `(lambda / (4 pi R))^nu` for carrier `fc_hz`.
pub fn path_loss(fc_hz: f64, distance_m: f64, exponent: f64) -> Result<f64> {
    if !(fc_hz > 0.0) {
        return Err(Error::domain("fc_hz", "carrier frequency must be positive"));
    }
    if !(distance_m > 0.0) {
        return Err(Error::domain("distance_m", "distance must be positive"));
    }
    if !(exponent >= 1.0) {
        return Err(Error::domain("exponent", "path loss exponent must be >= 1"));
    }
    let wavelength = SPEED_OF_LIGHT / fc_hz;
    Ok((wavelength / (4.0 * std::f64::consts::PI * distance_m)).powf(exponent))
}

/// Draws `count` power gains `|h|^2` with `h ~ CN(0, mean_gain)`.
pub fn sample_gains(count: usize, mean_gain: f64, seed: u64) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::domain("count", "at least one subcarrier is required"));
    }
    if !(mean_gain > 0.0 && mean_gain.is_finite()) {
        return Err(Error::domain("mean_gain", "must be positive and finite"));
    }
    let mut rng = seed::rng(seed);
    let sigma2 = mean_gain / 2.0;
    Ok((0..count)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            (sigma2 * (re * re + im * im)).max(GAIN_FLOOR)
        })
        .collect())
}

/// Total average received SNR (linear): `P_tot E[|h|^2] / (N0 W)`.
pub fn average_received_snr(total_power: f64, mean_gain: f64, noise_psd: f64, bandwidth_hz: f64) -> f64 {
    total_power * mean_gain / (noise_psd * bandwidth_hz)
}

/// Total power giving the requested average received SNR in dB.
pub fn power_for_snr_db(snr_db: f64, mean_gain: f64, noise_psd: f64, bandwidth_hz: f64) -> f64 {
    db_to_linear(snr_db) * noise_psd * bandwidth_hz / mean_gain
}

/// One channel realization over `L` subcarriers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    gains: Vec<f64>,
    /// Per-subcarrier bandwidth in Hz.
    pub bandwidth_hz: f64,
    /// Noise power spectral density in W/Hz.
    pub noise_psd: f64,
}

impl ChannelRealization {
    pub fn new(gains: Vec<f64>, bandwidth_hz: f64, noise_psd: f64) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::domain("gains", "at least one subcarrier is required"));
        }
        if let Some(i) = gains.iter().position(|g| !(*g > 0.0 && g.is_finite())) {
            return Err(Error::domain("gains", format!("gain {i} is not strictly positive")));
        }
        if !(bandwidth_hz > 0.0) || !(noise_psd > 0.0) {
            return Err(Error::domain("bandwidth_hz", "bandwidth and noise PSD must be positive"));
        }
        Ok(ChannelRealization {
            gains,
            bandwidth_hz,
            noise_psd,
        })
    }

    pub fn sample(count: usize, mean_gain: f64, bandwidth_hz: f64, noise_psd: f64, seed: u64) -> Result<Self> {
        Self::new(sample_gains(count, mean_gain, seed)?, bandwidth_hz, noise_psd)
    }

    pub fn len(&self) -> usize {
        self.gains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gains.is_empty()
    }

    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_psd * self.bandwidth_hz
    }

    /// `c_l = N0 W / |h_l|^2`: the power that yields unit received SNR.
    pub fn noise_over_gain(&self, l: usize) -> f64 {
        self.noise_power() / self.gains[l]
    }

    pub fn noise_over_gains(&self) -> Vec<f64> {
        (0..self.len()).map(|l| self.noise_over_gain(l)).collect()
    }

    /// Subcarrier indices sorted by ascending gain, ties by index.
    pub fn ascending_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| self.gains[a].total_cmp(&self.gains[b]).then(a.cmp(&b)));
        idx
    }
}

/// Writes one JSON record per realization (trial index plus gains).
pub fn write_channel_dump(path: &Path, trials: &[(usize, ChannelRealization)]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for (trial, ch) in trials {
        let rec = serde_json::json!({ "trial": trial, "channel": ch });
        writeln!(w, "{rec}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_channel_dump(path: &Path) -> Result<Vec<(usize, ChannelRealization)>> {
    #[derive(Deserialize)]
    struct Rec {
        trial: usize,
        channel: ChannelRealization,
    }
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: Rec = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            reason: e.to_string(),
        })?;
        let ch = ChannelRealization::new(rec.channel.gains, rec.channel.bandwidth_hz, rec.channel.noise_psd)?;
        out.push((rec.trial, ch));
    }
    Ok(out)
}
