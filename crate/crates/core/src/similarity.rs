//! Semantic similarity as a monotone function of received SNR.
//!
//! The semantic transceiver is abstracted by a knot table per `k` (symbols per
//! word). Similarity between knots is linearly interpolated and clamped
//! outside the table. The largest similarity in the table is the saturation
//! bound: thresholds above it can never be met semantically.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::db_to_linear;
use crate::error::{Error, Result};
use crate::text::Sentence;

/// Resolution of the SNR inversion, in dB.
pub const INVERSION_TOL_DB: f64 = 1e-6;

/// Default saturation similarity.
pub const DEFAULT_SATURATION: f64 = 0.98;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimilarityCurve {
    pub k: u32,
    /// `(snr_db, similarity)` knots, strictly ascending in SNR.
    pub points: Vec<(f64, f64)>,
}

impl SimilarityCurve {
    /// Validates and builds a curve; the diagnostic names the first bad knot.
    pub fn new(k: u32, points: Vec<(f64, f64)>) -> Result<Self> {
        if k == 0 {
            return Err(Error::Curve {
                knot: 0,
                reason: "k must be a positive integer".into(),
            });
        }
        if points.is_empty() {
            return Err(Error::Curve {
                knot: 0,
                reason: "curve has no knots".into(),
            });
        }
        for (i, &(snr, sim)) in points.iter().enumerate() {
            if !snr.is_finite() {
                return Err(Error::Curve {
                    knot: i,
                    reason: format!("SNR {snr} is not finite"),
                });
            }
            if !(sim > 0.0 && sim <= 1.0) {
                return Err(Error::Curve {
                    knot: i,
                    reason: format!("similarity {sim} outside (0, 1]"),
                });
            }
            if i > 0 {
                let (prev_snr, prev_sim) = points[i - 1];
                if snr <= prev_snr {
                    return Err(Error::Curve {
                        knot: i,
                        reason: format!("SNR {snr} dB does not increase past {prev_snr} dB"),
                    });
                }
                if sim < prev_sim {
                    return Err(Error::Curve {
                        knot: i,
                        reason: format!("similarity {sim} decreases from {prev_sim}"),
                    });
                }
            }
        }
        Ok(SimilarityCurve { k, points })
    }

    /// Synthetic saturating curve `M_sat (1 - exp(-(g - g0)/tau))`, rescaled so
    /// the last knot equals `saturation` exactly.
    ///
    /// Larger `k` shifts the curve to lower SNR and steepens it. The knots are
    /// not measured data from a trained transceiver.
    pub fn synthetic(k: u32, saturation: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::domain("k", "must be a positive integer"));
        }
        if !(saturation > 0.0 && saturation <= 1.0) {
            return Err(Error::domain("saturation", "must lie in (0, 1]"));
        }
        let kf = k as f64;
        let onset = SYNTH_ONSET_DB - SYNTH_ONSET_SLOPE_DB * (kf - 16.0);
        let tau = SYNTH_TAU_DB * (16.0 / kf).sqrt();
        let span = SYNTH_SPAN * tau;
        let norm = -(-span / tau).exp_m1();
        let knots = (span / SYNTH_STEP_DB).ceil() as usize;
        let points = (1..=knots)
            .map(|i| {
                let d = (i as f64 * SYNTH_STEP_DB).min(span);
                let sim = if i == knots {
                    saturation
                } else {
                    saturation * -(-d / tau).exp_m1() / norm
                };
                (onset + d, sim)
            })
            .collect();
        Self::new(k, points)
    }

    /// Saturation similarity: the largest value on the curve.
    pub fn saturation(&self) -> f64 {
        self.points.last().map(|p| p.1).unwrap_or(0.0)
    }

    pub fn snr_range_db(&self) -> (f64, f64) {
        (self.points[0].0, self.points[self.points.len() - 1].0)
    }

    pub fn similarity_at(&self, snr_db: f64) -> f64 {
        let pts = &self.points;
        if snr_db <= pts[0].0 {
            return pts[0].1;
        }
        if snr_db >= pts[pts.len() - 1].0 {
            return pts[pts.len() - 1].1;
        }
        // First knot strictly above snr_db; guaranteed in 1..len.
        let hi = pts.partition_point(|p| p.0 <= snr_db);
        let (x0, y0) = pts[hi - 1];
        let (x1, y1) = pts[hi];
        y0 + (y1 - y0) * (snr_db - x0) / (x1 - x0)
    }

    /// Smallest SNR (dB) whose similarity reaches `threshold`, or `None` when
    /// the threshold exceeds the saturation bound.
    pub fn required_snr_db(&self, threshold: f64) -> Result<Option<f64>> {
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(Error::domain("threshold", format!("{threshold} outside (0, 1]")));
        }
        if threshold > self.saturation() {
            return Ok(None);
        }
        let (mut lo, mut hi) = self.snr_range_db();
        if self.similarity_at(lo) >= threshold {
            return Ok(Some(lo));
        }
        // Invariant: similarity(lo) < threshold <= similarity(hi).
        while hi - lo > INVERSION_TOL_DB {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.similarity_at(mid) >= threshold {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(Some(hi))
    }
}

const SYNTH_ONSET_DB: f64 = 2.0;
const SYNTH_ONSET_SLOPE_DB: f64 = 0.25;
const SYNTH_TAU_DB: f64 = 2.0;
const SYNTH_SPAN: f64 = 4.0;
const SYNTH_STEP_DB: f64 = 0.5;

/// The per-subcarrier semantic requirement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubcarrierThreshold {
    /// Largest similarity threshold among the subcarrier's sentences.
    pub max_threshold: f64,
    /// Linear received SNR needed to meet `max_threshold`; `None` when the
    /// subcarrier cannot use semantic transmission.
    pub required_snr: Option<f64>,
}

impl SubcarrierThreshold {
    pub fn is_semantic_capable(&self) -> bool {
        self.required_snr.is_some()
    }
}

/// Binding semantic requirement for the sentences sharing one subcarrier.
/// A subcarrier carrying only padding has nothing to send semantically.
pub fn subcarrier_threshold<'a>(
    sentences: impl IntoIterator<Item = &'a Sentence>,
    curve: &SimilarityCurve,
) -> Result<SubcarrierThreshold> {
    let max_threshold = sentences
        .into_iter()
        .filter(|s| !s.is_padding())
        .map(|s| s.threshold)
        .fold(f64::NEG_INFINITY, f64::max);
    if max_threshold == f64::NEG_INFINITY {
        return Ok(SubcarrierThreshold {
            max_threshold: 0.0,
            required_snr: None,
        });
    }
    let required_snr = curve.required_snr_db(max_threshold)?.map(db_to_linear);
    Ok(SubcarrierThreshold {
        max_threshold,
        required_snr,
    })
}

/// A set of curves keyed by `k`, as stored in a curve file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSet {
    #[serde(rename = "curve")]
    pub curves: Vec<SimilarityCurve>,
}

impl CurveSet {
    pub fn get(&self, k: u32) -> Option<&SimilarityCurve> {
        self.curves.iter().find(|c| c.k == k)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: CurveSet = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let curves = raw
            .curves
            .into_iter()
            .map(|c| SimilarityCurve::new(c.k, c.points))
            .collect::<Result<Vec<_>>>()?;
        Ok(CurveSet { curves })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("curve set serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }
}
