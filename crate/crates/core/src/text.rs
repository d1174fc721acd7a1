//! Text task model: sentences, synthetic corpora, QoS thresholds and the
//! serial-to-parallel index mapping.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

/// Bits per character (8-bit ASCII).
pub const BITS_PER_CHAR: u64 = 8;

/// One sentence of the text task.
///
/// Padding sentinels (see [`TextPartition::new`]) have zero words and zero
/// characters and never contribute to delays or similarity maxima.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sentence {
    /// 1-based position in the serial text.
    #[serde(rename = "j")]
    pub serial: usize,
    pub words: u32,
    pub chars: u32,
    /// Required similarity level.
    pub threshold: f64,
}

impl Sentence {
    pub fn bits(&self) -> u64 {
        BITS_PER_CHAR * self.chars as u64
    }

    /// Semantic symbols needed with `k` outputs per word.
    pub fn symbols(&self, k: u32) -> u64 {
        k as u64 * self.words as u64
    }

    pub fn is_padding(&self) -> bool {
        self.words == 0
    }
}

/// Maps a 1-based serial index to its `(n, l)` grid position for `subcarriers`
/// parallel streams, i.e. the unique pair with `j = (n - 1) L + l`.
pub fn serial_to_grid(j: usize, subcarriers: usize) -> Result<(usize, usize)> {
    if j == 0 {
        return Err(Error::domain("j", "serial index is 1-based"));
    }
    if subcarriers == 0 {
        return Err(Error::domain("subcarriers", "must be at least 1"));
    }
    Ok(((j - 1) / subcarriers + 1, (j - 1) % subcarriers + 1))
}

pub fn grid_to_serial(n: usize, l: usize, subcarriers: usize) -> usize {
    (n - 1) * subcarriers + l
}

/// Inclusive word-count range for generated sentences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordRange {
    pub min: u32,
    pub max: u32,
}

impl Default for WordRange {
    fn default() -> Self {
        WordRange { min: 4, max: 32 }
    }
}

/// Generates `count` synthetic sentences with word counts uniform on `words`
/// and `chars_per_word` characters per word plus single spaces between words.
/// Thresholds are left at zero; see [`qos_sample`].
pub fn generate_text(
    count: usize,
    words: WordRange,
    chars_per_word: u32,
    seed: u64,
) -> Result<Vec<Sentence>> {
    if count == 0 {
        return Err(Error::Config("sentence count must be at least 1".into()));
    }
    if words.min == 0 || words.min > words.max {
        return Err(Error::Config(format!(
            "empty word range [{}, {}]",
            words.min, words.max
        )));
    }
    if chars_per_word == 0 {
        return Err(Error::Config("chars_per_word must be at least 1".into()));
    }
    let mut rng = seed::rng(seed);
    Ok((1..=count)
        .map(|serial| {
            let o = rng.random_range(words.min..=words.max);
            Sentence {
                serial,
                words: o,
                chars: chars_per_word * o + (o - 1),
                threshold: 0.0,
            }
        })
        .collect())
}

/// Sentences split over `L` subcarriers with `N` sentences each.
#[derive(Debug, Clone, PartialEq)]
pub struct TextPartition {
    sentences: Vec<Sentence>,
    subcarriers: usize,
    per_subcarrier: usize,
    real: usize,
}

impl TextPartition {
    /// Builds a partition. When the sentence count is not a multiple of
    /// `subcarriers`, zero-length padding sentinels are appended.
    pub fn new(mut sentences: Vec<Sentence>, subcarriers: usize) -> Result<Self> {
        if subcarriers == 0 {
            return Err(Error::domain("subcarriers", "must be at least 1"));
        }
        if sentences.is_empty() {
            return Err(Error::domain("sentences", "text is empty"));
        }
        for (i, s) in sentences.iter().enumerate() {
            if s.serial != i + 1 {
                return Err(Error::domain(
                    "sentences",
                    format!("sentence at position {} has serial index {}", i + 1, s.serial),
                ));
            }
        }
        let real = sentences.len();
        let per_subcarrier = real.div_ceil(subcarriers);
        for serial in real + 1..=per_subcarrier * subcarriers {
            sentences.push(Sentence {
                serial,
                words: 0,
                chars: 0,
                threshold: 0.0,
            });
        }
        Ok(TextPartition {
            sentences,
            subcarriers,
            per_subcarrier,
            real,
        })
    }

    /// All sentences including padding, in serial order.
    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn sentence(&self, serial: usize) -> &Sentence {
        &self.sentences[serial - 1]
    }

    pub fn subcarriers(&self) -> usize {
        self.subcarriers
    }

    pub fn per_subcarrier(&self) -> usize {
        self.per_subcarrier
    }

    /// Number of non-padding sentences.
    pub fn real_len(&self) -> usize {
        self.real
    }

    pub fn total_bits(&self) -> u64 {
        self.sentences.iter().map(Sentence::bits).sum()
    }

    fn with_thresholds(&self, mut f: impl FnMut(&Sentence) -> f64) -> TextPartition {
        let mut out = self.clone();
        for s in out.sentences.iter_mut().filter(|s| !s.is_padding()) {
            s.threshold = f(s);
        }
        out
    }
}

fn check_qos_range(lo: f64, hi: f64) -> Result<()> {
    if !(lo > 0.0 && lo <= hi && hi <= 1.0) {
        return Err(Error::Config(format!(
            "similarity threshold range [{lo}, {hi}] must satisfy 0 < lo <= hi <= 1"
        )));
    }
    Ok(())
}

/// Draws an independent uniform threshold in `[lo, hi]` for every sentence.
pub fn qos_sample(partition: &TextPartition, lo: f64, hi: f64, seed: u64) -> Result<TextPartition> {
    check_qos_range(lo, hi)?;
    let mut rng = seed::rng(seed);
    Ok(partition.with_thresholds(|_| lo + (hi - lo) * rng.random::<f64>()))
}

/// Draws one uniform threshold per serial residue class `j mod L` and shares
/// it among all sentences of that class.
pub fn qos_sample_by_subcarrier(
    partition: &TextPartition,
    lo: f64,
    hi: f64,
    seed: u64,
) -> Result<TextPartition> {
    check_qos_range(lo, hi)?;
    let mut rng = seed::rng(seed);
    let draws: Vec<f64> = (0..partition.subcarriers)
        .map(|_| lo + (hi - lo) * rng.random::<f64>())
        .collect();
    let l = partition.subcarriers;
    Ok(partition.with_thresholds(|s| draws[(s.serial - 1) % l]))
}

/// Writes one JSON record per non-padding sentence.
pub fn write_corpus(path: &Path, sentences: &[Sentence]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for s in sentences.iter().filter(|s| !s.is_padding()) {
        let line = serde_json::to_string(s).expect("sentence serializes");
        writeln!(w, "{line}").map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_corpus(path: &Path) -> Result<Vec<Sentence>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |reason: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            reason,
        };
        let s: Sentence = serde_json::from_str(&line).map_err(|e| parse_err(e.to_string()))?;
        if s.words == 0 || s.chars == 0 {
            return Err(parse_err("sentence must have at least one word and one character".into()));
        }
        if !(0.0..=1.0).contains(&s.threshold) {
            return Err(parse_err(format!("threshold {} outside [0, 1]", s.threshold)));
        }
        out.push(s);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_examples() {
        assert_eq!(serial_to_grid(25, 16).unwrap(), (2, 9));
        assert_eq!(serial_to_grid(1, 64).unwrap(), (1, 1));
        assert_eq!(serial_to_grid(64, 64).unwrap(), (1, 64));
        assert_eq!(serial_to_grid(65, 64).unwrap(), (2, 1));
        assert!(serial_to_grid(0, 4).is_err());
        assert!(serial_to_grid(3, 0).is_err());
    }

    #[test]
    fn grid_enumeration_is_bijective() {
        let l = 64;
        let mut seen = std::collections::HashSet::new();
        for j in 1..=128 {
            let (n, c) = serial_to_grid(j, l).unwrap();
            assert!((1..=l).contains(&c));
            assert_eq!(grid_to_serial(n, c, l), j);
            assert!(seen.insert((n, c)));
        }
    }

    #[test]
    fn single_forced_sentence() {
        let s = generate_text(1, WordRange { min: 4, max: 4 }, 5, 0).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].words, 4);
        assert_eq!(s[0].chars, 23);
        assert_eq!(s[0].bits(), 184);
        assert_eq!(s[0].symbols(16), 64);
    }

    #[test]
    fn table_sized_corpus_in_range() {
        let s = generate_text(7296, WordRange::default(), 5, 1).unwrap();
        assert_eq!(s.len(), 7296);
        assert!(s.iter().all(|s| (4..=32).contains(&s.words)));
        assert_eq!(s, generate_text(7296, WordRange::default(), 5, 1).unwrap());
        assert_ne!(s, generate_text(7296, WordRange::default(), 5, 2).unwrap());
    }

    #[test]
    fn generation_rejects_bad_config() {
        assert!(generate_text(10, WordRange { min: 5, max: 4 }, 5, 0).is_err());
        assert!(generate_text(10, WordRange { min: 0, max: 4 }, 5, 0).is_err());
        assert!(generate_text(0, WordRange::default(), 5, 0).is_err());
        assert!(generate_text(10, WordRange::default(), 0, 0).is_err());
    }

    #[test]
    fn padding_when_not_divisible() {
        let s = generate_text(10, WordRange::default(), 5, 3).unwrap();
        let bits: u64 = s.iter().map(Sentence::bits).sum();
        let p = TextPartition::new(s, 4).unwrap();
        assert_eq!(p.per_subcarrier(), 3);
        assert_eq!(p.sentences().len(), 12);
        assert_eq!(p.real_len(), 10);
        assert!(p.sentences()[10..].iter().all(Sentence::is_padding));
        assert_eq!(p.total_bits(), bits);
    }

    #[test]
    fn qos_ranges() {
        let s = generate_text(7296, WordRange::default(), 5, 1).unwrap();
        let p = TextPartition::new(s, 64).unwrap();
        let q = qos_sample(&p, 0.6, 1.0, 11).unwrap();
        assert!(q.sentences().iter().all(|s| (0.6..=1.0).contains(&s.threshold)));
        let mean = q.sentences().iter().map(|s| s.threshold).sum::<f64>() / 7296.0;
        assert!((mean - 0.8).abs() < 0.01, "mean {mean}");
        assert_eq!(q, qos_sample(&p, 0.6, 1.0, 11).unwrap());

        let fixed = qos_sample(&p, 0.9, 0.9, 5).unwrap();
        assert!(fixed.sentences().iter().all(|s| s.threshold == 0.9));

        assert!(qos_sample(&p, 0.0, 0.5, 1).is_err());
        assert!(qos_sample(&p, 0.7, 0.6, 1).is_err());
        assert!(qos_sample(&p, 0.7, 1.1, 1).is_err());
    }

    #[test]
    fn qos_by_subcarrier_shares_draws_within_residue_class() {
        let s = generate_text(256, WordRange::default(), 5, 1).unwrap();
        let p = TextPartition::new(s, 16).unwrap();
        let q = qos_sample_by_subcarrier(&p, 0.6, 1.0, 4).unwrap();
        for s in q.sentences() {
            let first = q.sentence((s.serial - 1) % 16 + 1);
            assert_eq!(s.threshold, first.threshold);
        }
    }

    #[test]
    fn corpus_file_round_trip() {
        let s = generate_text(50, WordRange::default(), 5, 9).unwrap();
        let p = qos_sample(&TextPartition::new(s, 7).unwrap(), 0.6, 1.0, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.jsonl");
        write_corpus(&path, p.sentences()).unwrap();
        let back = read_corpus(&path).unwrap();
        assert_eq!(back.as_slice(), &p.sentences()[..50]);
    }

    #[test]
    fn corpus_reader_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        std::fs::write(
            &path,
            "{\"j\":1,\"words\":4,\"chars\":23,\"threshold\":0.7}\n{\"j\":2,\"words\":0,\"chars\":1,\"threshold\":0.7}\n",
        )
        .unwrap();
        match read_corpus(&path) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
