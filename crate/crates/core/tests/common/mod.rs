//! Reference solvers built without the closed forms, and random instances.
#![allow(dead_code)]

use hybrid_alloc::association::Assignment;
use hybrid_alloc::channel::ChannelRealization;
use hybrid_alloc::instance::{Instance, Subcarrier};
use hybrid_alloc::seed;
use hybrid_alloc::text::{Sentence, TextPartition};
use hybrid_alloc::Mode;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(s: u64) -> ChaCha8Rng {
    seed::rng(s)
}

pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * rng.random::<f64>()).exp()
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

/// `U / (W log2(1 + P / a))` written out directly.
pub fn delay(bits: f64, a: f64, bandwidth: f64, p: f64) -> f64 {
    if p <= 0.0 {
        return f64::INFINITY;
    }
    bits / (bandwidth * (1.0 + p / a).log2())
}

pub fn golden(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, iters: usize) -> f64 {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - r * (hi - lo);
    let mut x2 = lo + r * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..iters {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - r * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + r * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Minimum of `sum_l U_l / (W log2(1 + P_l / a_l))` with `sum P = budget`
/// by pairwise exchange: every pair re-splits its combined power by golden
/// section until a full sweep stops improving.
pub fn pairwise_sum_oracle(a: &[f64], bits: &[f64], bandwidth: f64, budget: f64) -> (Vec<f64>, f64) {
    let n = a.len();
    let mut p = vec![budget / n as f64; n];
    let total = |p: &[f64]| (0..n).map(|l| delay(bits[l], a[l], bandwidth, p[l])).sum::<f64>();
    let mut obj = total(&p);
    for _ in 0..5000 {
        for i in 0..n {
            for j in i + 1..n {
                let s = p[i] + p[j];
                let f = |t: f64| delay(bits[i], a[i], bandwidth, t) + delay(bits[j], a[j], bandwidth, s - t);
                let t = golden(f, 0.0, s, 90);
                if f(t) < f(p[i]) {
                    p[i] = t;
                    p[j] = s - t;
                }
            }
        }
        let next = total(&p);
        let done = obj - next <= 1e-15 * obj;
        obj = next.min(obj);
        if done {
            break;
        }
    }
    (p, obj)
}

/// Minimum of the largest delay by nested ternary search on the simplex.
pub fn ternary_minmax_oracle(a: &[f64], bits: &[f64], bandwidth: f64, budget: f64) -> f64 {
    if a.len() == 1 {
        return delay(bits[0], a[0], bandwidth, budget);
    }
    let g = |p: f64| delay(bits[0], a[0], bandwidth, p).max(ternary_minmax_oracle(&a[1..], &bits[1..], bandwidth, budget - p));
    let (mut lo, mut hi) = (0.0, budget);
    for _ in 0..120 {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if g(m1) <= g(m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    g(0.5 * (lo + hi))
}

/// Best sum of delays over every feasible mode vector at fixed powers.
pub fn brute_force_modes(inst: &Instance, powers: &[f64]) -> f64 {
    let n = inst.len();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        let modes: Vec<Mode> = (0..n)
            .map(|l| if mask >> l & 1 == 1 { Mode::Semantic } else { Mode::Shannon })
            .collect();
        if (0..n).any(|l| modes[l].is_semantic() && !inst.semantic_allowed(l, powers[l])) {
            continue;
        }
        best = best.min(inst.sum_delay(&modes, powers));
    }
    best
}

pub fn random_shannon_instance(rng: &mut ChaCha8Rng, n: usize) -> Instance {
    let subs = (0..n)
        .map(|_| Subcarrier::shannon_only(log_uniform(rng, 1e-3, 10.0), 8.0 * rng.random_range(20..2000) as f64))
        .collect();
    let gap = if rng.random::<bool>() { 1.0 } else { rng.random_range(1.0..7.0) };
    Instance::new(subs, log_uniform(rng, 1e4, 1e6), gap, 16, log_uniform(rng, 1e-2, 1e2)).unwrap()
}

/// Subcarriers carrying a few sentences each, most with a semantic option.
pub fn random_hybrid_instance(rng: &mut ChaCha8Rng, n: usize) -> Instance {
    let subs: Vec<Subcarrier> = (0..n)
        .map(|_| {
            let sentences = rng.random_range(1..=6u64);
            let words: u64 = (0..sentences).map(|_| rng.random_range(4..=32u64)).sum();
            let bits = 8.0 * (6 * words - sentences) as f64;
            let required_snr = rng.random_bool(0.8).then(|| 10f64.powf(rng.random_range(-1.0..1.2)));
            Subcarrier {
                noise_over_gain: log_uniform(rng, 1e-3, 1.0),
                bits,
                words,
                max_threshold: 0.8,
                required_snr,
            }
        })
        .collect();
    let gap = if rng.random::<bool>() { 1.0 } else { rng.random_range(1.0..7.0) };
    let mean_c = subs.iter().map(|s| s.noise_over_gain).sum::<f64>();
    let power = mean_c * log_uniform(rng, 0.1, 100.0);
    Instance::new(subs, 312_500.0, gap, 16, power).unwrap()
}

/// Partition of `chars.len()` one-word sentences over `l` subcarriers.
pub fn partition_from_chars(chars: &[u32], l: usize) -> TextPartition {
    let s = chars
        .iter()
        .enumerate()
        .map(|(i, &c)| Sentence {
            serial: i + 1,
            words: 1,
            chars: c,
            threshold: 0.8,
        })
        .collect();
    TextPartition::new(s, l).unwrap()
}

/// Bit-level instance for an association.
pub fn shannon_instance_for(
    partition: &TextPartition,
    assignment: &Assignment,
    channels: &ChannelRealization,
    total_power: f64,
) -> Instance {
    let subs = assignment
        .bits(partition)
        .iter()
        .enumerate()
        .map(|(l, &b)| Subcarrier::shannon_only(channels.noise_over_gain(l), b as f64))
        .collect();
    Instance::new(subs, channels.bandwidth_hz, 1.0, 16, total_power).unwrap()
}
