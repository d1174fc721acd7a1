//! Sentence-to-subcarrier association rules and the exchange arguments behind
//! the optimality of ordered association.
//!
//! * Serial association (SST) deals sentences round-robin: sentence `j` goes
//!   to subcarrier `j mod L`.
//! * Ordered association (OST) sorts sentences by length and subcarriers by
//!   gain, then hands the `t`-th block of `N` shortest-to-longest sentences to
//!   the `t`-th weakest-to-strongest subcarrier.

use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelRealization;
use crate::error::{Error, Result};
use crate::seed;
use crate::text::TextPartition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Sst,
    Ost,
    Custom,
}

/// Subcarrier `l` carries the serial indices in `blocks[l]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub policy: Policy,
    blocks: Vec<Vec<usize>>,
}

impl Assignment {
    /// Checks that `blocks` covers `1..=partition.sentences().len()` exactly
    /// once with `N` sentences per subcarrier.
    pub fn from_blocks(policy: Policy, blocks: Vec<Vec<usize>>, partition: &TextPartition) -> Result<Self> {
        if blocks.len() != partition.subcarriers() {
            return Err(Error::domain(
                "blocks",
                format!("{} blocks for {} subcarriers", blocks.len(), partition.subcarriers()),
            ));
        }
        let total = partition.sentences().len();
        let mut seen = vec![false; total + 1];
        for (l, b) in blocks.iter().enumerate() {
            if b.len() != partition.per_subcarrier() {
                return Err(Error::domain(
                    "blocks",
                    format!("subcarrier {l} holds {} sentences, expected {}", b.len(), partition.per_subcarrier()),
                ));
            }
            for &j in b {
                if j == 0 || j > total || std::mem::replace(&mut seen[j], true) {
                    return Err(Error::domain("blocks", format!("sentence {j} missing, repeated or out of range")));
                }
            }
        }
        Ok(Assignment { policy, blocks })
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn subcarriers(&self) -> usize {
        self.blocks.len()
    }

    /// Bits carried by each subcarrier.
    pub fn bits(&self, partition: &TextPartition) -> Vec<u64> {
        self.blocks
            .iter()
            .map(|b| b.iter().map(|&j| partition.sentence(j).bits()).sum())
            .collect()
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self).expect("assignment serializes");
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path, partition: &TextPartition) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let raw: Assignment = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            reason: e.to_string(),
        })?;
        Self::from_blocks(raw.policy, raw.blocks, partition)
    }
}

pub fn assign_sst(partition: &TextPartition) -> Assignment {
    let l = partition.subcarriers();
    let mut blocks = vec![Vec::with_capacity(partition.per_subcarrier()); l];
    for s in partition.sentences() {
        blocks[(s.serial - 1) % l].push(s.serial);
    }
    Assignment {
        policy: Policy::Sst,
        blocks,
    }
}

pub fn assign_ost(partition: &TextPartition, channels: &ChannelRealization) -> Result<Assignment> {
    let l = partition.subcarriers();
    if channels.len() != l {
        return Err(Error::domain(
            "channels",
            format!("{} gains for {} subcarriers", channels.len(), l),
        ));
    }
    let n = partition.per_subcarrier();
    let mut by_length: Vec<_> = partition.sentences().iter().map(|s| (s.chars, s.serial)).collect();
    by_length.sort_unstable();
    let mut blocks = vec![Vec::new(); l];
    for (t, &sub) in channels.ascending_order().iter().enumerate() {
        blocks[sub] = by_length[t * n..(t + 1) * n].iter().map(|&(_, j)| j).collect();
    }
    Ok(Assignment {
        policy: Policy::Ost,
        blocks,
    })
}

/// Uniformly random association, for comparisons against the ordered rule.
pub fn assign_random(partition: &TextPartition, seed: u64) -> Assignment {
    let mut serials: Vec<usize> = (1..=partition.sentences().len()).collect();
    serials.shuffle(&mut seed::rng(seed));
    let blocks = serials
        .chunks(partition.per_subcarrier())
        .map(<[usize]>::to_vec)
        .collect();
    Assignment {
        policy: Policy::Custom,
        blocks,
    }
}

/// Result of re-pairing received-power levels with channels.
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityRepair {
    pub powers: Vec<f64>,
    /// Total power before minus total power after; never negative.
    pub saving: f64,
    pub swaps: usize,
}

/// Reassigns the received-power levels `Q_i = P_i |h_i|^2` so that they rise
/// with channel gain, one swap at a time.
///
/// Each swap moves the larger `Q` onto the stronger channel, which keeps the
/// multiset of capacities while spending `(Q_hi - Q_lo)(1/g_weak - 1/g_strong)`
/// less power. At most `L - 1` swaps are needed.
pub fn capacity_order_repair(powers: &[f64], gains: &[f64]) -> Result<CapacityRepair> {
    if powers.len() != gains.len() || powers.is_empty() {
        return Err(Error::domain("powers", "powers and gains must be non-empty and of equal length"));
    }
    if gains.iter().any(|&g| !(g > 0.0)) || powers.iter().any(|&p| !(p >= 0.0)) {
        return Err(Error::domain("gains", "gains must be positive and powers non-negative"));
    }
    let mut order: Vec<usize> = (0..gains.len()).collect();
    order.sort_by(|&a, &b| gains[a].total_cmp(&gains[b]).then(a.cmp(&b)));
    let mut q: Vec<f64> = powers.iter().zip(gains).map(|(p, g)| p * g).collect();

    let mut swaps = 0;
    for t in (1..order.len()).rev() {
        let target = order[t];
        let mut best = target;
        for &i in &order[..t] {
            if q[i] > q[best] {
                best = i;
            }
        }
        if best != target {
            q.swap(best, target);
            swaps += 1;
        }
    }
    let repaired: Vec<f64> = q.iter().zip(gains).map(|(q, g)| q / g).collect();
    let saving = powers.iter().sum::<f64>() - repaired.iter().sum::<f64>();
    Ok(CapacityRepair {
        powers: repaired,
        saving: saving.max(0.0),
        swaps,
    })
}

/// Outcome of checking the rearrangement bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RearrangementCheck {
    /// Sizes ascending paired with inverse rates descending.
    pub ost_sum: f64,
    /// Smallest pairing cost among the permutations examined.
    pub best_sum: f64,
    /// Largest pairing cost among the permutations examined.
    pub worst_sum: f64,
    pub permutations: usize,
    pub ok: bool,
}

/// Largest slot count checked exhaustively.
pub const EXHAUSTIVE_LIMIT: usize = 8;

/// Verifies that pairing ascending sizes with descending inverse rates is the
/// cheapest of all pairings `sum size * (1 / rate)`.
///
/// Up to [`EXHAUSTIVE_LIMIT`] slots every permutation is tried; beyond that
/// `samples` random permutations drawn from `seed`.
pub fn rearrangement_bound_check(rates: &[f64], sizes: &[f64], samples: usize, seed: u64) -> Result<RearrangementCheck> {
    if rates.len() != sizes.len() || rates.is_empty() {
        return Err(Error::domain("rates", "rates and sizes must be non-empty and of equal length"));
    }
    if rates.iter().any(|&r| !(r > 0.0)) {
        return Err(Error::domain("rates", "rates must be positive"));
    }
    let mut inv: Vec<f64> = rates.iter().map(|r| 1.0 / r).collect();
    inv.sort_by(|a, b| b.total_cmp(a));
    let mut sorted = sizes.to_vec();
    sorted.sort_by(f64::total_cmp);
    let cost = |perm: &[f64]| perm.iter().zip(&inv).map(|(s, v)| s * v).sum::<f64>();
    let ost_sum = cost(&sorted);

    let (mut best, mut worst, mut count) = (f64::INFINITY, f64::NEG_INFINITY, 0usize);
    let mut visit = |perm: &[f64]| {
        let c = cost(perm);
        best = best.min(c);
        worst = worst.max(c);
        count += 1;
    };
    let mut perm = sizes.to_vec();
    if perm.len() <= EXHAUSTIVE_LIMIT {
        heap_permutations(&mut perm, &mut visit);
    } else {
        let mut rng = seed::rng(seed);
        for _ in 0..samples.max(1) {
            perm.shuffle(&mut rng);
            visit(&perm);
        }
    }
    let tol = 1e-12 * ost_sum.abs().max(f64::MIN_POSITIVE);
    Ok(RearrangementCheck {
        ost_sum,
        best_sum: best,
        worst_sum: worst,
        permutations: count,
        ok: ost_sum <= best + tol,
    })
}

/// Heap's algorithm; calls `visit` once per permutation of `items`.
pub fn heap_permutations<T>(items: &mut [T], visit: &mut impl FnMut(&[T])) {
    let n = items.len();
    let mut c = vec![0usize; n];
    visit(items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            visit(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::{generate_text, Sentence, WordRange};

    fn partition(chars: &[u32], l: usize) -> TextPartition {
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

    #[test]
    fn sst_examples() {
        let s = generate_text(16 * 6, WordRange::default(), 5, 0).unwrap();
        let p = TextPartition::new(s, 16).unwrap();
        let a = assign_sst(&p);
        let home = |j: usize| a.blocks().iter().position(|b| b.contains(&j)).unwrap() + 1;
        assert_eq!((home(1), home(23), home(75)), (1, 7, 11));
        assert!(a.blocks().iter().all(|b| b.len() == 6));
        for (l, b) in a.blocks().iter().enumerate() {
            assert!(b.iter().all(|j| (j - 1) % 16 == l));
        }

        let one = assign_sst(&TextPartition::new(generate_text(5, WordRange::default(), 5, 0).unwrap(), 1).unwrap());
        assert_eq!(one.blocks(), &[vec![1, 2, 3, 4, 5]]);
    }

    #[test]
    fn ost_two_subcarriers() {
        let p = partition(&[20, 10], 2);
        let ch = ChannelRealization::new(vec![1.0, 4.0], 1.0, 1.0).unwrap();
        let a = assign_ost(&p, &ch).unwrap();
        assert_eq!(a.blocks(), &[vec![2], vec![1]]);
    }

    #[test]
    fn ost_equal_lengths_gives_serial_blocks() {
        let p = partition(&[7; 6], 3);
        let ch = ChannelRealization::new(vec![1.0, 2.0, 3.0], 1.0, 1.0).unwrap();
        let a = assign_ost(&p, &ch).unwrap();
        assert_eq!(a.blocks(), &[vec![1, 2], vec![3, 4], vec![5, 6]]);
    }

    #[test]
    fn ost_and_sst_carry_the_same_total() {
        let s = generate_text(64 * 5, WordRange::default(), 5, 8).unwrap();
        let p = TextPartition::new(s, 64).unwrap();
        let ch = ChannelRealization::sample(64, 1.0, 1.0, 1.0, 2).unwrap();
        let ost = assign_ost(&p, &ch).unwrap();
        let sst = assign_sst(&p);
        assert_eq!(ost.bits(&p).iter().sum::<u64>(), sst.bits(&p).iter().sum::<u64>());
        assert_eq!(ost.bits(&p).iter().sum::<u64>(), p.total_bits());
        // Block sizes rise with channel gain.
        let bits = ost.bits(&p);
        for w in ch.ascending_order().windows(2) {
            assert!(bits[w[0]] <= bits[w[1]]);
        }
        Assignment::from_blocks(Policy::Ost, ost.blocks().to_vec(), &p).unwrap();
    }

    #[test]
    fn from_blocks_rejects_duplicates() {
        let p = partition(&[1, 2, 3, 4], 2);
        assert!(Assignment::from_blocks(Policy::Custom, vec![vec![1, 2], vec![2, 4]], &p).is_err());
        assert!(Assignment::from_blocks(Policy::Custom, vec![vec![1, 2, 3], vec![4]], &p).is_err());
        assert!(Assignment::from_blocks(Policy::Custom, vec![vec![1, 2], vec![3, 5]], &p).is_err());
    }

    #[test]
    fn assignment_dump_round_trip() {
        let p = partition(&[5, 9, 2, 7, 1, 3], 3);
        let a = assign_random(&p, 4);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.json");
        a.write(&path).unwrap();
        assert_eq!(Assignment::read(&path, &p).unwrap(), a);
    }

    #[test]
    fn repair_examples() {
        let ordered = capacity_order_repair(&[1.0, 1.0], &[1.0, 4.0]).unwrap();
        assert_eq!(ordered.swaps, 0);
        assert_eq!(ordered.saving, 0.0);

        // Q = {8, 2} on gains {1, 4}: saving (8 - 2)(1/1 - 1/4) = 4.5.
        let r = capacity_order_repair(&[8.0, 0.5], &[1.0, 4.0]).unwrap();
        assert_eq!(r.swaps, 1);
        assert!((r.saving - 4.5).abs() < 1e-12);
        assert_eq!(r.powers, vec![2.0, 2.0]);
    }

    #[test]
    fn rearrangement_examples() {
        let r = rearrangement_bound_check(&[1.0, 2.0], &[10.0, 20.0], 0, 0).unwrap();
        assert_eq!(r.ost_sum, 20.0);
        assert_eq!(r.worst_sum, 25.0);
        assert_eq!(r.permutations, 2);
        assert!(r.ok);

        let r = rearrangement_bound_check(&[1.0, 3.0, 2.0], &[5.0; 3], 0, 0).unwrap();
        assert_eq!(r.best_sum, r.worst_sum);
        assert!(r.ok);

        let r = rearrangement_bound_check(&[1.0; 10], &[1.0; 10], 50, 3).unwrap();
        assert_eq!(r.permutations, 50);
    }

    #[test]
    fn heap_visits_every_permutation_once() {
        let mut items = [0, 1, 2, 3, 4];
        let mut seen = std::collections::HashSet::new();
        heap_permutations(&mut items, &mut |p| {
            assert!(seen.insert(p.to_vec()));
        });
        assert_eq!(seen.len(), 120);
    }
}
