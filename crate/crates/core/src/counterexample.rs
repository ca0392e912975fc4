//! A 0/1 sequence that is generic for the point mass at the zero sequence,
//! yet whose averages along `Omega(n)` oscillate.
//!
//! The canonical sequence is 1 exactly on the blocks `[3^k - 2^k, 3^k + 2^k]`.
//! Its density of ones tends to 0, but the Gaussian weights at virtual
//! `log log N = 3^k` sit almost entirely inside the `k`-th block, while at
//! `log log N = 2(3^k - 2^{k-1})` they fall mostly into the gap after it.
//! No sieve reaches those `N`, so the oscillation is evaluated through
//! [`extrapolated_average`].

use num_complex::Complex64;
use serde::Serialize;

use crate::numeric::{first_loglog_above, first_loglog_at_least, weighted_sum};
use crate::sieve::OmegaProfile;
use crate::weights::{extrapolated_average, gaussian_weights, GaussianWindowSpec};
use crate::{Error, Result};

/// A sorted list of disjoint integer blocks `[lo, hi]`; `a(k) = 1` on the
/// blocks and 0 elsewhere.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct BlockSequence {
    blocks: Vec<(u64, u64)>,
}

impl BlockSequence {
    /// Sorts the blocks and merges any that overlap or touch.
    pub fn new(mut blocks: Vec<(u64, u64)>) -> Result<Self> {
        if let Some(&(lo, hi)) = blocks.iter().find(|(lo, hi)| hi < lo) {
            return Err(Error::InvalidArgument(format!(
                "block [{lo}, {hi}] is reversed"
            )));
        }
        blocks.sort_unstable();
        let mut merged: Vec<(u64, u64)> = Vec::with_capacity(blocks.len());
        for (lo, hi) in blocks {
            match merged.last_mut() {
                Some(last) if lo <= last.1.saturating_add(1) => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        Ok(Self { blocks: merged })
    }

    /// Parses a JSON array of `[lo, hi]` pairs.
    pub fn from_json(text: &str) -> Result<Self> {
        let blocks: Vec<(u64, u64)> = serde_json::from_str(text)
            .map_err(|e| Error::InvalidArgument(format!("block list: {e}")))?;
        Self::new(blocks)
    }

    /// The sequence that is 1 everywhere.
    pub fn full() -> Self {
        Self {
            blocks: vec![(0, u64::MAX)],
        }
    }

    pub fn blocks(&self) -> &[(u64, u64)] {
        &self.blocks
    }

    pub fn contains(&self, k: u64) -> bool {
        let i = self.blocks.partition_point(|&(_, hi)| hi < k);
        i < self.blocks.len() && self.blocks[i].0 <= k
    }

    /// `a(k)` as a complex number, for the weighted-sum engines.
    pub fn value(&self, k: u64) -> Complex64 {
        Complex64::new(f64::from(u8::from(self.contains(k))), 0.0)
    }

    /// `#{1 <= n <= N : a(n) = 1}`.
    pub fn count_up_to(&self, n: u64) -> u64 {
        self.blocks
            .iter()
            .take_while(|&&(lo, _)| lo <= n)
            .map(|&(lo, hi)| {
                let (lo, hi) = (lo.max(1), hi.min(n));
                if hi >= lo {
                    hi - lo + 1
                } else {
                    0
                }
            })
            .sum()
    }
}

/// The blocks `[3^k - 2^k, 3^k + 2^k]` for `k = 1..=k_max`, merged where they
/// touch.
pub fn erdos_blocks(k_max: u32) -> Result<BlockSequence> {
    if k_max < 1 {
        return Err(Error::InvalidArgument("k_max must be >= 1".into()));
    }
    let blocks = (1..=k_max)
        .map(|k| {
            let three = 3u64.checked_pow(k);
            let two = 2u64.checked_pow(k);
            match (three, two) {
                (Some(t), Some(w)) => t
                    .checked_add(w)
                    .map(|hi| (t - w, hi))
                    .ok_or_else(|| Error::Overflow(format!("3^{k} + 2^{k}"))),
                _ => Err(Error::Overflow(format!("3^{k}"))),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    BlockSequence::new(blocks)
}

/// Virtual checkpoints of the oscillation: `log log N_k = 3^k` (inside the
/// `k`-th block) and `log log M_k = 2(3^k - 2^{k-1})` (past it).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Checkpoints {
    pub k: u32,
    pub loglog_peak: f64,
    pub loglog_trough: f64,
}

impl Checkpoints {
    pub fn new(k: u32) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidArgument(
                "checkpoint index must be >= 1".into(),
            ));
        }
        let three = 3f64.powi(k as i32);
        let two = 2f64.powi(k as i32 - 1);
        Ok(Self {
            k,
            loglog_peak: three,
            loglog_trough: 2.0 * (three - two),
        })
    }

    pub fn up_to(k_max: u32) -> Result<Vec<Self>> {
        (1..=k_max).map(Self::new).collect()
    }
}

/// `(1/N) sum_{n <= N} a(n)`: the Birkhoff average of the cylinder function
/// `x -> x(0)` along the shift orbit of `a`.
pub fn genericity_defect(seq: &BlockSequence, n: u64) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidArgument("N must be >= 1".into()));
    }
    Ok(seq.count_up_to(n) as f64 / n as f64)
}

/// `#{3 <= n <= N : lo <= log log n <= hi}`, found by locating the two
/// boundary integers instead of scanning.
pub fn loglog_interval_count(n: u64, lo: f64, hi: f64) -> Result<u64> {
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::InvalidInterval { lo, hi });
    }
    if n < 3 {
        return Err(Error::InvalidArgument(format!("N must be >= 3, got {n}")));
    }
    let first = first_loglog_at_least(lo, n);
    let last = first_loglog_above(hi, n) - 1;
    Ok(if last >= first { last - first + 1 } else { 0 })
}

/// `(1/N) sum_{n <= N} a(Omega(n))` from the `pi_k` histogram.
pub fn average_along_omega_blocks(profile: &OmegaProfile, seq: &BlockSequence) -> f64 {
    weighted_sum(&profile.histogram().weights(), 0, |k| seq.value(k)).re
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckpointKind {
    Peak,
    Trough,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillationPoint {
    pub k: u32,
    pub kind: CheckpointKind,
    pub loglog_n: f64,
    /// Gaussian-weighted average of `a` at the checkpoint.
    pub value: f64,
    /// Total Gaussian weight in the window, the value `a = 1` would give.
    pub window_mass: f64,
}

/// Extrapolated averages of `a(Omega(n))` at each peak and trough.
pub fn oscillation_profile(
    seq: &BlockSequence,
    checkpoints: &[Checkpoints],
    c: f64,
) -> Result<Vec<OscillationPoint>> {
    let mut out = Vec::with_capacity(2 * checkpoints.len());
    for cp in checkpoints {
        for (kind, loglog_n) in [
            (CheckpointKind::Peak, cp.loglog_peak),
            (CheckpointKind::Trough, cp.loglog_trough),
        ] {
            let window = GaussianWindowSpec::new(loglog_n, c)?;
            out.push(OscillationPoint {
                k: cp.k,
                kind,
                loglog_n,
                value: extrapolated_average(|k| seq.value(k), &window).re,
                window_mass: gaussian_weights(&window).total(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::loglog;

    #[test]
    fn canonical_blocks() {
        let b = erdos_blocks(2).unwrap();
        assert_eq!(b.blocks(), &[(1, 13)]);
        let b = erdos_blocks(4).unwrap();
        assert_eq!(b.blocks(), &[(1, 13), (19, 35), (65, 97)]);
        assert!(!b.contains(14));
        assert!(b.contains(27));
        assert!(!b.contains(0));
        assert!(erdos_blocks(0).is_err());
        assert!(erdos_blocks(40).is_ok());
        assert!(matches!(erdos_blocks(41), Err(Error::Overflow(_))));
    }

    #[test]
    fn block_parsing() {
        let b = BlockSequence::from_json("[[5, 9], [1, 3], [4, 4], [20, 30]]").unwrap();
        assert_eq!(b.blocks(), &[(1, 9), (20, 30)]);
        assert!(BlockSequence::from_json("[[3, 1]]").is_err());
        assert!(BlockSequence::from_json("[1, 2]").is_err());
    }

    #[test]
    fn counting_and_defect() {
        let b = erdos_blocks(5).unwrap();
        assert_eq!(genericity_defect(&b, 13).unwrap(), 1.0);
        assert_eq!(b.count_up_to(20), 15);
        let brute = (1..=1000).filter(|&k| b.contains(k)).count() as u64;
        assert_eq!(b.count_up_to(1000), brute);
        let empty = BlockSequence::default();
        assert_eq!(genericity_defect(&empty, 1_000_000).unwrap(), 0.0);
        assert_eq!(BlockSequence::full().count_up_to(77), 77);
    }

    #[test]
    fn interval_counts() {
        let n = 100_000_000;
        assert_eq!(loglog_interval_count(n, 1.0, 5.0).unwrap(), n - 15);
        assert_eq!(loglog_interval_count(n, 0.0, 10.0).unwrap(), n - 2);
        assert_eq!(loglog_interval_count(n, 3.0, 4.0).unwrap(), 0);
        assert!(loglog_interval_count(n, 2.0, 2.0).is_err());
        // moving hi across log log 16 adds exactly n = 16
        let l16 = loglog(16);
        let below = loglog_interval_count(1000, 0.5, l16 - 1e-12).unwrap();
        let at = loglog_interval_count(1000, 0.5, l16).unwrap();
        assert_eq!(at, below + 1);
        // brute force
        for &(lo, hi) in &[(0.2, 1.1), (1.0, 1.5), (-3.0, 0.9)] {
            let brute = (3..=5000u64)
                .filter(|&m| (lo..=hi).contains(&loglog(m)))
                .count() as u64;
            assert_eq!(loglog_interval_count(5000, lo, hi).unwrap(), brute);
        }
    }

    #[test]
    fn oscillation() {
        let b = erdos_blocks(6).unwrap();
        let cps = Checkpoints::up_to(5).unwrap();
        let prof = oscillation_profile(&b, &cps, 3.0).unwrap();
        let peak3 = prof
            .iter()
            .find(|p| p.k == 3 && p.kind == CheckpointKind::Peak)
            .unwrap();
        let trough3 = prof
            .iter()
            .find(|p| p.k == 3 && p.kind == CheckpointKind::Trough)
            .unwrap();
        assert_eq!(peak3.loglog_n, 27.0);
        assert_eq!(trough3.loglog_n, 46.0);
        assert!(peak3.value >= 0.9, "{}", peak3.value);
        assert!(trough3.value <= 0.1, "{}", trough3.value);
        for k in 3..=5 {
            let p = prof
                .iter()
                .find(|p| p.k == k && p.kind == CheckpointKind::Peak)
                .unwrap();
            let t = prof
                .iter()
                .find(|p| p.k == k && p.kind == CheckpointKind::Trough)
                .unwrap();
            assert!(p.value > t.value);
        }
        let full = oscillation_profile(&BlockSequence::full(), &cps[2..3], 3.0).unwrap();
        assert!((full[0].value - full[0].window_mass).abs() < 1e-15);
        assert!(full[0].value > 0.99);
    }

    #[test]
    fn checkpoints() {
        let c = Checkpoints::new(3).unwrap();
        assert_eq!((c.loglog_peak, c.loglog_trough), (27.0, 46.0));
        for k in 1..10 {
            let c = Checkpoints::new(k).unwrap();
            assert!(c.loglog_trough > c.loglog_peak);
        }
    }
}
