//! A solved-for problem: per-subcarrier payloads, noise-over-gain factors and
//! semantic requirements under one channel realization and one association.

use crate::association::Assignment;
use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::link::{self, Mode, SubcarrierAllocation};
use crate::similarity::{subcarrier_threshold, SimilarityCurve};
use crate::text::TextPartition;

#[derive(Debug, Clone, PartialEq)]
pub struct Subcarrier {
    /// `c_l = N0 W / |h_l|^2` in W.
    pub noise_over_gain: f64,
    /// Payload `U_l` in bits.
    pub bits: f64,
    pub words: u64,
    /// Largest similarity threshold among the carried sentences.
    pub max_threshold: f64,
    /// Linear SNR needed for semantic transmission, `None` if unreachable.
    pub required_snr: Option<f64>,
}

impl Subcarrier {
    pub fn shannon_only(noise_over_gain: f64, bits: f64) -> Self {
        Subcarrier {
            noise_over_gain,
            bits,
            words: 0,
            max_threshold: 1.0,
            required_snr: None,
        }
    }

    /// Power pinning the received SNR at the semantic requirement.
    pub fn semantic_power(&self) -> Option<f64> {
        self.required_snr.map(|g| g * self.noise_over_gain)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub subcarriers: Vec<Subcarrier>,
    pub bandwidth_hz: f64,
    /// SNR gap, 1 for capacity-achieving coding.
    pub gap: f64,
    pub symbols_per_word: u32,
    pub total_power: f64,
}

impl Instance {
    pub fn new(
        subcarriers: Vec<Subcarrier>,
        bandwidth_hz: f64,
        gap: f64,
        symbols_per_word: u32,
        total_power: f64,
    ) -> Result<Self> {
        if subcarriers.is_empty() {
            return Err(Error::domain("subcarriers", "at least one subcarrier is required"));
        }
        if !(bandwidth_hz > 0.0 && bandwidth_hz.is_finite()) {
            return Err(Error::domain("bandwidth_hz", "must be positive"));
        }
        if !(gap >= 1.0 && gap.is_finite()) {
            return Err(Error::domain("gap", "SNR gap must be >= 1"));
        }
        if !(total_power > 0.0 && total_power.is_finite()) {
            return Err(Error::domain("total_power", "must be positive"));
        }
        for (l, s) in subcarriers.iter().enumerate() {
            if !(s.noise_over_gain > 0.0 && s.noise_over_gain.is_finite()) || !(s.bits >= 0.0) {
                return Err(Error::domain(
                    "subcarriers",
                    format!("subcarrier {l} has a non-positive noise factor or negative payload"),
                ));
            }
            if matches!(s.required_snr, Some(g) if !(g > 0.0 && g.is_finite())) {
                return Err(Error::domain("subcarriers", format!("subcarrier {l} has an invalid SNR requirement")));
            }
        }
        Ok(Instance {
            subcarriers,
            bandwidth_hz,
            gap,
            symbols_per_word,
            total_power,
        })
    }

    /// Assembles the instance for `assignment` of `partition` over `channels`.
    pub fn build(
        partition: &TextPartition,
        assignment: &Assignment,
        channels: &ChannelRealization,
        curve: &SimilarityCurve,
        gap: f64,
        total_power: f64,
    ) -> Result<Self> {
        if assignment.subcarriers() != channels.len() {
            return Err(Error::domain(
                "assignment",
                format!("{} blocks for {} channels", assignment.subcarriers(), channels.len()),
            ));
        }
        let subcarriers = assignment
            .blocks()
            .iter()
            .enumerate()
            .map(|(l, block)| {
                let sentences: Vec<_> = block.iter().map(|&j| partition.sentence(j)).collect();
                let threshold = subcarrier_threshold(sentences.iter().copied(), curve)?;
                Ok(Subcarrier {
                    noise_over_gain: channels.noise_over_gain(l),
                    bits: sentences.iter().map(|s| s.bits()).sum::<u64>() as f64,
                    words: sentences.iter().map(|s| s.words as u64).sum(),
                    max_threshold: threshold.max_threshold,
                    required_snr: threshold.required_snr,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Instance::new(subcarriers, channels.bandwidth_hz, gap, curve.k, total_power)
    }

    pub fn len(&self) -> usize {
        self.subcarriers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subcarriers.is_empty()
    }

    /// Copy with every semantic option removed.
    pub fn without_semantic(&self) -> Instance {
        let mut out = self.clone();
        for s in &mut out.subcarriers {
            s.required_snr = None;
        }
        out
    }

    pub fn shannon_rate(&self, l: usize, power: f64) -> f64 {
        link::shannon_rate(power, self.subcarriers[l].noise_over_gain, self.gap, self.bandwidth_hz)
    }

    pub fn shannon_delay(&self, l: usize, power: f64) -> f64 {
        link::shannon_delay(self.subcarriers[l].bits, self.shannon_rate(l, power))
    }

    pub fn semantic_delay(&self, l: usize) -> f64 {
        link::semantic_delay(self.subcarriers[l].words, self.symbols_per_word, self.bandwidth_hz)
    }

    /// Whether subcarrier `l` may transmit semantically at `power`.
    pub fn semantic_allowed(&self, l: usize, power: f64) -> bool {
        matches!(self.subcarriers[l].semantic_power(), Some(p) if power >= p)
    }

    pub fn delay(&self, l: usize, mode: Mode, power: f64) -> f64 {
        match mode {
            Mode::Shannon => self.shannon_delay(l, power),
            Mode::Semantic => self.semantic_delay(l),
        }
    }

    pub fn allocation(&self, modes: &[Mode], powers: &[f64]) -> Vec<SubcarrierAllocation> {
        modes
            .iter()
            .zip(powers)
            .enumerate()
            .map(|(l, (&mode, &power))| SubcarrierAllocation {
                power,
                mode,
                delay: self.delay(l, mode, power),
            })
            .collect()
    }

    pub fn sum_delay(&self, modes: &[Mode], powers: &[f64]) -> f64 {
        (0..self.len()).map(|l| self.delay(l, modes[l], powers[l])).sum()
    }

    pub fn max_delay(&self, modes: &[Mode], powers: &[f64]) -> f64 {
        (0..self.len())
            .map(|l| self.delay(l, modes[l], powers[l]))
            .fold(0.0, f64::max)
    }

    /// Power pinned by the semantic subcarriers of `modes`. Errors when a
    /// semantic subcarrier has no reachable SNR requirement.
    pub fn pinned_power(&self, modes: &[Mode]) -> Result<f64> {
        let mut pinned = 0.0;
        for (l, &m) in modes.iter().enumerate() {
            if m.is_semantic() {
                pinned += self.subcarriers[l].semantic_power().ok_or_else(|| {
                    Error::domain("modes", format!("subcarrier {l} cannot meet its similarity threshold"))
                })?;
            }
        }
        Ok(pinned)
    }
}

/// Splits power left over after pinning across an all-semantic selection.
/// The delays do not depend on it; the budget must still be spent exactly.
pub(crate) fn settle_all_semantic(instance: &Instance, leftover: f64) -> Vec<f64> {
    let share = leftover / instance.len() as f64;
    instance
        .subcarriers
        .iter()
        .map(|s| s.semantic_power().expect("semantic subcarrier has a requirement") + share)
        .collect()
}
