//! Monte-Carlo sweeps over total received SNR.
//!
//! For every SNR point, channel realization and QoS draw, the configured
//! scheme is solved next to an all-bit-level baseline with serial association
//! on the same randomness. Channel and QoS draws are keyed by trial only, so
//! every SNR point sees the same realizations and the curves differ only
//! through the power budget.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::association::{assign_ost, assign_sst};
use crate::channel::{dbm_per_hz_to_watts, path_loss, power_for_snr_db, ChannelRealization};
use crate::error::{Error, Result};
use crate::instance::Instance;
use crate::link::gamma_from_ber;
use crate::minmax::{equal_delay_allocation, minmax_heuristic, CandidateOrder};
use crate::seed::{self, Stream};
use crate::similarity::{CurveSet, SimilarityCurve};
use crate::sum_delay::{alternate_optimize, solve_p2};
use crate::text::{generate_text, qos_sample, qos_sample_by_subcarrier, read_corpus, Sentence, TextPartition, WordRange};
use crate::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Sum,
    MinMax,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Association {
    Sst,
    Ost,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    Hybrid,
    ShannonOnly,
}

/// How similarity thresholds are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QosGranularity {
    /// One draw per sentence.
    Sentence,
    /// One draw per serial residue class, shared by its sentences.
    Subcarrier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    pub noise_psd_dbm_hz: f64,
    pub total_bandwidth_hz: f64,
    pub carrier_hz: f64,
    pub distance_m: f64,
    pub path_loss_exponent: f64,
    pub saturation: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        PhysicalParams {
            noise_psd_dbm_hz: -174.0,
            total_bandwidth_hz: 20e6,
            carrier_hz: 2.4e9,
            distance_m: 100.0,
            path_loss_exponent: 2.0,
            saturation: 0.98,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TextParams {
    pub sentences: usize,
    pub words_min: u32,
    pub words_max: u32,
    pub chars_per_word: u32,
    pub threshold_min: f64,
    pub threshold_max: f64,
    pub qos_granularity: QosGranularity,
    /// JSON-lines corpus used instead of generated text.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corpus: Option<PathBuf>,
}

impl Default for TextParams {
    fn default() -> Self {
        TextParams {
            sentences: 7296,
            words_min: 4,
            words_max: 32,
            chars_per_word: 5,
            threshold_min: 0.6,
            threshold_max: 1.0,
            qos_granularity: QosGranularity::Subcarrier,
            corpus: None,
        }
    }
}

pub const DEFAULT_TRIALS: usize = 50;
pub const DEFAULT_QOS_TRIALS: usize = 5;
pub const FULL_TRIALS: usize = 500;
pub const FULL_QOS_TRIALS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub problem: Problem,
    pub subcarriers: usize,
    pub symbols_per_word: u32,
    pub association: Association,
    pub scheme: Scheme,
    pub snr_points_db: Vec<f64>,
    pub trials: usize,
    pub qos_trials: usize,
    /// Target bit error rate of uncoded M-QAM; capacity when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ber: Option<f64>,
    pub max_iters: usize,
    pub candidate_order: CandidateOrder,
    pub seed: u64,
    /// Curve file holding a curve for `symbols_per_word`; synthetic otherwise.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<PathBuf>,
    pub physical: PhysicalParams,
    pub text: TextParams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            problem: Problem::Sum,
            subcarriers: 64,
            symbols_per_word: 16,
            association: Association::Sst,
            scheme: Scheme::Hybrid,
            snr_points_db: snr_grid(10.0, 2.5, 35.0).expect("valid grid"),
            trials: DEFAULT_TRIALS,
            qos_trials: DEFAULT_QOS_TRIALS,
            ber: None,
            max_iters: 50,
            candidate_order: CandidateOrder::Ascending,
            seed: 1,
            curve: None,
            physical: PhysicalParams::default(),
            text: TextParams::default(),
        }
    }
}

/// Inclusive grid `lo, lo + step, ...` up to `hi`.
pub fn snr_grid(lo: f64, step: f64, hi: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && step > 0.0 && step.is_finite() && lo <= hi) {
        return Err(Error::Config(format!("invalid SNR grid {lo}:{step}:{hi}")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.subcarriers == 0 || self.symbols_per_word == 0 || self.trials == 0 || self.qos_trials == 0 {
            return fail("subcarriers, symbols_per_word, trials and qos_trials must be >= 1");
        }
        if self.snr_points_db.iter().any(|s| !s.is_finite()) {
            return fail("SNR points must be finite");
        }
        if let Some(ber) = self.ber {
            gamma_from_ber(ber).map_err(|e| Error::Config(e.to_string()))?;
        }
        let p = &self.physical;
        if ![p.noise_psd_dbm_hz, p.total_bandwidth_hz, p.carrier_hz, p.distance_m, p.path_loss_exponent]
            .iter()
            .all(|v| v.is_finite())
            || p.total_bandwidth_hz <= 0.0
        {
            return fail("physical parameters must be finite with positive bandwidth");
        }
        if self.text.corpus.is_none() && self.text.sentences == 0 {
            return fail("text.sentences must be >= 1");
        }
        Ok(())
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn gap(&self) -> Result<f64> {
        self.ber.map_or(Ok(1.0), gamma_from_ber)
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.physical.total_bandwidth_hz / self.subcarriers as f64
    }

    pub fn noise_psd(&self) -> f64 {
        dbm_per_hz_to_watts(self.physical.noise_psd_dbm_hz)
    }

    pub fn mean_gain(&self) -> Result<f64> {
        let p = &self.physical;
        path_loss(p.carrier_hz, p.distance_m, p.path_loss_exponent)
    }

    pub fn load_curve(&self) -> Result<SimilarityCurve> {
        match &self.curve {
            Some(path) => CurveSet::load(path)?
                .get(self.symbols_per_word)
                .cloned()
                .ok_or_else(|| Error::Config(format!("{} has no curve for k = {}", path.display(), self.symbols_per_word))),
            None => SimilarityCurve::synthetic(self.symbols_per_word, self.physical.saturation),
        }
    }

    pub fn load_text(&self) -> Result<Vec<Sentence>> {
        let t = &self.text;
        match &t.corpus {
            Some(path) => read_corpus(path),
            None => generate_text(
                t.sentences,
                WordRange {
                    min: t.words_min,
                    max: t.words_max,
                },
                t.chars_per_word,
                seed::derive(self.seed, Stream::Corpus, 0, 0),
            ),
        }
    }
}

/// Averages at one SNR point over the trials that solved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointMetrics {
    pub snr_db: f64,
    pub utilization_pct: f64,
    pub improvement_pct: f64,
    pub mean_delay_s: f64,
    pub trials_ok: usize,
    pub trials_infeasible: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RunMetrics {
    pub points: Vec<PointMetrics>,
}

/// Outcome of one (SNR, channel, QoS) trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub objective: f64,
    pub baseline: f64,
    pub semantic: usize,
    pub subcarriers: usize,
}

impl TrialOutcome {
    pub fn utilization_pct(&self) -> f64 {
        100.0 * self.semantic as f64 / self.subcarriers as f64
    }

    pub fn improvement_pct(&self) -> f64 {
        100.0 * (self.baseline - self.objective) / self.baseline
    }
}

/// Everything shared by the trials of one sweep.
pub struct Sweep {
    pub config: ExperimentConfig,
    partition: TextPartition,
    curve: SimilarityCurve,
    gap: f64,
    mean_gain: f64,
}

impl Sweep {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let partition = TextPartition::new(config.load_text()?, config.subcarriers)?;
        Ok(Sweep {
            curve: config.load_curve()?,
            gap: config.gap()?,
            mean_gain: config.mean_gain()?,
            partition,
            config,
        })
    }

    pub fn total_power(&self, snr_db: f64) -> f64 {
        power_for_snr_db(snr_db, self.mean_gain, self.config.noise_psd(), self.config.bandwidth_hz())
    }

    pub fn channels(&self, trial: usize) -> Result<ChannelRealization> {
        ChannelRealization::sample(
            self.config.subcarriers,
            self.mean_gain,
            self.config.bandwidth_hz(),
            self.config.noise_psd(),
            seed::derive(self.config.seed, Stream::Channel, trial as u64, 0),
        )
    }

    pub fn partition(&self, trial: usize, qos: usize) -> Result<TextPartition> {
        let t = &self.config.text;
        let s = seed::derive(self.config.seed, Stream::Qos, trial as u64, qos as u64);
        match t.qos_granularity {
            QosGranularity::Sentence => qos_sample(&self.partition, t.threshold_min, t.threshold_max, s),
            QosGranularity::Subcarrier => qos_sample_by_subcarrier(&self.partition, t.threshold_min, t.threshold_max, s),
        }
    }

    /// Instances of the configured scheme and of the serial bit-level
    /// baseline for one trial.
    pub fn instances(&self, snr_db: f64, trial: usize, qos: usize) -> Result<(Instance, Instance)> {
        let channels = self.channels(trial)?;
        let partition = self.partition(trial, qos)?;
        let power = self.total_power(snr_db);
        let sst = assign_sst(&partition);
        let baseline = Instance::build(&partition, &sst, &channels, &self.curve, self.gap, power)?.without_semantic();
        let assignment = match self.config.association {
            Association::Sst => sst,
            Association::Ost => assign_ost(&partition, &channels)?,
        };
        let mut scheme = Instance::build(&partition, &assignment, &channels, &self.curve, self.gap, power)?;
        if self.config.scheme == Scheme::ShannonOnly {
            scheme = scheme.without_semantic();
        }
        Ok((scheme, baseline))
    }

    pub fn run_trial(&self, snr_db: f64, trial: usize, qos: usize) -> Result<TrialOutcome> {
        let (scheme, baseline) = self.instances(snr_db, trial, qos)?;
        let base = self.solve_shannon(&baseline)?;
        let (objective, semantic) = match self.config.problem {
            Problem::Sum => {
                let st = alternate_optimize(&scheme, self.config.max_iters)?;
                (st.objective, st.semantic_count())
            }
            Problem::MinMax => {
                let st = minmax_heuristic(&scheme, self.config.candidate_order)?;
                (st.objective, st.semantic_count())
            }
        };
        Ok(TrialOutcome {
            objective,
            baseline: base,
            semantic,
            subcarriers: scheme.len(),
        })
    }

    fn solve_shannon(&self, instance: &Instance) -> Result<f64> {
        let modes = vec![Mode::Shannon; instance.len()];
        let powers = match self.config.problem {
            Problem::Sum => solve_p2(instance, &modes)?.powers,
            Problem::MinMax => {
                let all: Vec<usize> = (0..instance.len()).collect();
                equal_delay_allocation(instance, &all, instance.total_power)?.powers
            }
        };
        Ok(match self.config.problem {
            Problem::Sum => instance.sum_delay(&modes, &powers),
            Problem::MinMax => instance.max_delay(&modes, &powers),
        })
    }

    /// Runs every trial in parallel and averages in a fixed order.
    pub fn run(&self) -> Result<RunMetrics> {
        let cfg = &self.config;
        let jobs: Vec<(usize, usize, usize)> = (0..cfg.snr_points_db.len())
            .flat_map(|p| (0..cfg.trials).flat_map(move |t| (0..cfg.qos_trials).map(move |q| (p, t, q))))
            .collect();
        let outcomes: Vec<Result<TrialOutcome>> = jobs
            .par_iter()
            .map(|&(p, t, q)| self.run_trial(cfg.snr_points_db[p], t, q))
            .collect();

        let per_point = cfg.trials * cfg.qos_trials;
        let mut points = Vec::with_capacity(cfg.snr_points_db.len());
        for (p, chunk) in outcomes.chunks(per_point.max(1)).enumerate() {
            let (mut util, mut imp, mut delay, mut ok, mut bad) = (0.0, 0.0, 0.0, 0usize, 0usize);
            for outcome in chunk {
                match outcome {
                    Ok(o) => {
                        util += o.utilization_pct();
                        imp += o.improvement_pct();
                        delay += o.objective;
                        ok += 1;
                    }
                    Err(Error::InfeasibleSelection { .. }) => bad += 1,
                    Err(e) => return Err(Error::Config(format!("trial failed: {e}"))),
                }
            }
            let mean = |x: f64| if ok == 0 { f64::NAN } else { x / ok as f64 };
            points.push(PointMetrics {
                snr_db: cfg.snr_points_db[p],
                utilization_pct: mean(util),
                improvement_pct: mean(imp),
                mean_delay_s: mean(delay),
                trials_ok: ok,
                trials_infeasible: bad,
            });
        }
        Ok(RunMetrics { points })
    }
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<RunMetrics> {
    Sweep::new(config.clone())?.run()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Text,
}

pub const COLUMNS: [&str; 6] = [
    "snr_db",
    "utilization_pct",
    "improvement_pct",
    "mean_delay_s",
    "trials_ok",
    "trials_infeasible",
];

/// Nine significant digits.
fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

fn round9(x: f64) -> f64 {
    sig9(x).parse().expect("formatted float parses")
}

/// Metrics as written: every real rounded to nine significant digits.
pub fn rounded(metrics: &RunMetrics) -> RunMetrics {
    RunMetrics {
        points: metrics
            .points
            .iter()
            .map(|p| PointMetrics {
                snr_db: round9(p.snr_db),
                utilization_pct: round9(p.utilization_pct),
                improvement_pct: round9(p.improvement_pct),
                mean_delay_s: round9(p.mean_delay_s),
                ..p.clone()
            })
            .collect(),
    }
}

pub fn format_results(metrics: &RunMetrics, format: OutputFormat) -> Result<String> {
    match format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Config(format!("csv: {e}"));
            w.write_record(COLUMNS).map_err(io)?;
            for p in &metrics.points {
                w.write_record([
                    sig9(p.snr_db),
                    sig9(p.utilization_pct),
                    sig9(p.improvement_pct),
                    sig9(p.mean_delay_s),
                    p.trials_ok.to_string(),
                    p.trials_infeasible.to_string(),
                ])
                .map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
            Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
        }
        OutputFormat::Text => {
            let mut out = String::new();
            let header = serde_json::to_string(&COLUMNS).expect("serializes");
            writeln!(out, "{{\"columns\":{header},\"rows\":[").unwrap();
            let rows: Vec<String> = rounded(metrics)
                .points
                .iter()
                .map(|p| format!("  {}", serde_json::to_string(p).expect("serializes")))
                .collect();
            if !rows.is_empty() {
                writeln!(out, "{}", rows.join(",\n")).unwrap();
            }
            out.push_str("]}\n");
            Ok(out)
        }
    }
}

pub fn emit_results(metrics: &RunMetrics, path: &Path, format: OutputFormat) -> Result<()> {
    std::fs::write(path, format_results(metrics, format)?).map_err(|e| Error::io(path, e))
}

pub fn parse_results(text: &str, format: OutputFormat, path: &Path) -> Result<RunMetrics> {
    let parse_err = |line: usize, reason: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        reason,
    };
    match format {
        OutputFormat::Csv => {
            let mut r = csv::Reader::from_reader(text.as_bytes());
            let header = r.headers().map_err(|e| parse_err(1, e.to_string()))?;
            if header.iter().ne(COLUMNS) {
                return Err(parse_err(1, format!("unexpected header {header:?}")));
            }
            let mut points = Vec::new();
            for (i, rec) in r.deserialize::<PointMetrics>().enumerate() {
                points.push(rec.map_err(|e| parse_err(i + 2, e.to_string()))?);
            }
            Ok(RunMetrics { points })
        }
        OutputFormat::Text => {
            #[derive(Deserialize)]
            struct Doc {
                columns: Vec<String>,
                rows: Vec<PointMetrics>,
            }
            let doc: Doc = serde_json::from_str(text).map_err(|e| parse_err(e.line(), e.to_string()))?;
            if doc.columns.iter().ne(COLUMNS) {
                return Err(parse_err(1, format!("unexpected columns {:?}", doc.columns)));
            }
            Ok(RunMetrics { points: doc.rows })
        }
    }
}

pub fn read_results(path: &Path, format: OutputFormat) -> Result<RunMetrics> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_results(&text, format, path)
}
