//! Segmented sieve for `Omega(n)`, the number of prime factors of `n` counted
//! with multiplicity, and the reductions built on it.
//!
//! Each segment `[lo, hi)` is sieved by every prime power `p^e < hi` with
//! `p <= sqrt(hi - 1)`: every hit bumps the count and multiplies a running
//! cofactor by `p`. Whatever is left over afterwards is a single prime larger
//! than `sqrt(hi - 1)`, detected by comparing the cofactor with `n`.
//!
//! Segments are independent. Reductions map every segment to a small partial
//! result and merge the partials in segment order, so results do not depend on
//! the number of workers.

pub mod cache;

use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use rayon::prelude::*;

pub use cache::{read_segment, write_segment, SegmentCache, HEADER_LEN, MAGIC};

use crate::numeric::{first_loglog_above, first_loglog_at_least, loglog, CompensatedSum};
use crate::{Error, Result};

pub const DEFAULT_SEGMENT_LEN: usize = 1 << 22;
/// Largest `N` the sieve will accept.
pub const HARD_CAP: u64 = 10_000_000_000;
/// Bytes of transient memory one sieve segment may use.
pub const DEFAULT_MEMORY_BUDGET: u64 = 1 << 30;
/// Omega(n) < 64 for every n representable in a u64.
pub const MAX_OMEGA: usize = 64;

pub type ProgressFn = Arc<dyn Fn(u64, u64) + Send + Sync>;

/// A contiguous block of Omega values: `counts[i] = Omega(lo + i)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorCountSegment {
    lo: u64,
    hi: u64,
    counts: Vec<u8>,
}

impl FactorCountSegment {
    /// Builds a segment from raw parts, checking the structural invariants.
    pub fn from_parts(lo: u64, hi: u64, counts: Vec<u8>) -> Result<Self> {
        if lo == 0 || hi <= lo {
            return Err(Error::InvalidRange { lo, hi });
        }
        if counts.len() as u64 != hi - lo {
            return Err(Error::InvalidArgument(format!(
                "segment [{lo}, {hi}) needs {} counts, got {}",
                hi - lo,
                counts.len()
            )));
        }
        if lo == 1 && counts[0] != 0 {
            return Err(Error::InvalidArgument("Omega(1) must be 0".into()));
        }
        for (i, &c) in counts.iter().enumerate() {
            let n = lo + i as u64;
            // Omega(n) <= log2(n) <=> 2^Omega(n) <= n
            if c >= 64 || (1u64 << c) > n {
                return Err(Error::InvalidArgument(format!(
                    "Omega({n}) = {c} exceeds log2({n})"
                )));
            }
        }
        Ok(Self { lo, hi, counts })
    }

    pub fn lo(&self) -> u64 {
        self.lo
    }

    pub fn hi(&self) -> u64 {
        self.hi
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn counts(&self) -> &[u8] {
        &self.counts
    }

    pub fn omega(&self, n: u64) -> Option<u8> {
        if n < self.lo || n >= self.hi {
            return None;
        }
        Some(self.counts[(n - self.lo) as usize])
    }

    /// `(n, Omega(n))` pairs in increasing `n`.
    pub fn iter(&self) -> impl Iterator<Item = (u64, u8)> + '_ {
        let lo = self.lo;
        self.counts
            .iter()
            .enumerate()
            .map(move |(i, &c)| (lo + i as u64, c))
    }
}

/// `pi_k(N)`: how many `n <= N` have exactly `k` prime factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiKHistogram {
    n: u64,
    counts: Vec<u64>,
}

impl PiKHistogram {
    fn from_tally(n: u64, counts: &[u64; MAX_OMEGA]) -> Self {
        let used = counts.iter().rposition(|&c| c != 0).map_or(1, |k| k + 1);
        let hist = Self {
            n,
            counts: counts[..used].to_vec(),
        };
        debug_assert_eq!(hist.total(), n, "partition identity");
        hist
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `pi_k(N)`, zero beyond the largest realized k.
    pub fn get(&self, k: usize) -> u64 {
        self.counts.get(k).copied().unwrap_or(0)
    }

    /// Counts for `k = 0..=k_max`.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn k_max(&self) -> usize {
        self.counts.len() - 1
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// `pi_k(N) / N` for `k = 0..=k_max`.
    pub fn weights(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    /// Counts with `n = 1` and `n = 2` removed, for statistics normalized by
    /// `log log N` (which is undefined or negative there).
    pub fn counts_from_three(&self) -> Vec<u64> {
        let mut c = self.counts.clone();
        c[0] -= 1; // n = 1
        if self.n >= 2 {
            c[1] -= 1; // n = 2
        }
        c
    }
}

/// Everything the averaging engines need from one sieve pass over `[1, N]`:
/// the `pi_k` histogram and, per `k`, the reciprocal sums `sum_{Omega(n)=k} 1/n`
/// used by logarithmic averages.
#[derive(Debug, Clone, PartialEq)]
pub struct OmegaProfile {
    histogram: PiKHistogram,
    reciprocal: Vec<f64>,
}

impl OmegaProfile {
    pub fn n(&self) -> u64 {
        self.histogram.n
    }

    pub fn histogram(&self) -> &PiKHistogram {
        &self.histogram
    }

    /// `sum_{n <= N, Omega(n) = k} 1/n` for `k = 0..=k_max`.
    pub fn reciprocal_sums(&self) -> &[f64] {
        &self.reciprocal
    }

    /// `A_N = sum_{n <= N} 1/n`.
    pub fn harmonic_total(&self) -> f64 {
        self.reciprocal
            .iter()
            .copied()
            .collect::<CompensatedSum>()
            .value()
    }
}

#[derive(Clone)]
struct SegmentTally {
    counts: [u64; MAX_OMEGA],
    reciprocal: [CompensatedSum; MAX_OMEGA],
}

impl SegmentTally {
    fn zero() -> Self {
        Self {
            counts: [0; MAX_OMEGA],
            reciprocal: [CompensatedSum::new(); MAX_OMEGA],
        }
    }

    fn of(segment: &FactorCountSegment) -> Self {
        let mut t = Self::zero();
        for (n, k) in segment.iter() {
            t.counts[k as usize] += 1;
            t.reciprocal[k as usize].add(1.0 / n as f64);
        }
        t
    }

    fn merge(&mut self, other: &SegmentTally) {
        for k in 0..MAX_OMEGA {
            self.counts[k] += other.counts[k];
            self.reciprocal[k].merge(&other.reciprocal[k]);
        }
    }

    fn profile(&self, n: u64) -> OmegaProfile {
        let histogram = PiKHistogram::from_tally(n, &self.counts);
        let reciprocal = self.reciprocal[..histogram.counts.len()]
            .iter()
            .map(CompensatedSum::value)
            .collect();
        OmegaProfile {
            histogram,
            reciprocal,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SieveConfig {
    /// Largest integer any query may touch.
    pub limit: u64,
    pub segment_len: usize,
    /// Worker threads; results are identical for every value.
    pub workers: usize,
    /// Transient bytes a single segment may use.
    pub memory_budget: u64,
    pub cache_dir: Option<PathBuf>,
}

impl Default for SieveConfig {
    fn default() -> Self {
        Self {
            limit: HARD_CAP,
            segment_len: DEFAULT_SEGMENT_LEN,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            memory_budget: DEFAULT_MEMORY_BUDGET,
            cache_dir: None,
        }
    }
}

impl SieveConfig {
    pub fn with_limit(limit: u64) -> Self {
        Self {
            limit,
            ..Self::default()
        }
    }

    pub fn workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn segment_len(mut self, len: usize) -> Self {
        self.segment_len = len;
        self
    }

    pub fn cache_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.cache_dir = Some(dir.into());
        self
    }
}

/// The sieve engine: base primes up to `sqrt(limit)`, a worker pool, and an
/// optional segment cache.
pub struct Sieve {
    config: SieveConfig,
    base_primes: Vec<u32>,
    pool: rayon::ThreadPool,
    cache: Option<SegmentCache>,
    progress: Option<ProgressFn>,
}

impl std::fmt::Debug for Sieve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Sieve")
            .field("config", &self.config)
            .field("base_primes", &self.base_primes.len())
            .finish()
    }
}

fn bytes_per_integer(hi: u64) -> u64 {
    if hi <= 1 << 32 {
        5
    } else {
        9
    }
}

impl Sieve {
    pub fn new(config: SieveConfig) -> Result<Self> {
        if config.limit < 1 {
            return Err(Error::InvalidArgument("limit must be >= 1".into()));
        }
        if config.limit > HARD_CAP {
            return Err(Error::RangeTooLarge {
                what: "limit",
                requested: config.limit,
                budget: HARD_CAP,
            });
        }
        if config.workers == 0 {
            return Err(Error::InvalidArgument("workers must be >= 1".into()));
        }
        if config.segment_len == 0 {
            return Err(Error::InvalidArgument("segment length must be >= 1".into()));
        }
        let seg_bytes = config.segment_len as u64 * bytes_per_integer(config.limit + 1);
        if seg_bytes > config.memory_budget {
            return Err(Error::RangeTooLarge {
                what: "segment bytes",
                requested: seg_bytes,
                budget: config.memory_budget,
            });
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.workers)
            .thread_name(|i| format!("omega-sieve-{i}"))
            .build()
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
        let cache = config
            .cache_dir
            .as_ref()
            .map(SegmentCache::new)
            .transpose()?;
        let base_primes = primes_up_to(config.limit.isqrt());
        Ok(Self {
            config,
            base_primes,
            pool,
            cache,
            progress: None,
        })
    }

    /// A sieve for queries up to `limit` with default settings.
    pub fn with_limit(limit: u64) -> Result<Self> {
        Self::new(SieveConfig::with_limit(limit))
    }

    /// Reports `(segments done, segments total)` after every segment.
    pub fn set_progress(&mut self, progress: Option<ProgressFn>) {
        self.progress = progress;
    }

    pub fn config(&self) -> &SieveConfig {
        &self.config
    }

    pub fn limit(&self) -> u64 {
        self.config.limit
    }

    pub fn workers(&self) -> usize {
        self.config.workers
    }

    pub fn base_primes(&self) -> &[u32] {
        &self.base_primes
    }

    fn check_n(&self, n: u64) -> Result<()> {
        if n < 1 {
            return Err(Error::InvalidArgument("N must be >= 1".into()));
        }
        if n > self.config.limit {
            return Err(Error::RangeTooLarge {
                what: "N",
                requested: n,
                budget: self.config.limit,
            });
        }
        Ok(())
    }

    /// `Omega(n)` for `lo <= n < hi`.
    pub fn sieve_segment(&self, lo: u64, hi: u64) -> Result<FactorCountSegment> {
        if lo < 1 || lo >= hi {
            return Err(Error::InvalidRange { lo, hi });
        }
        if hi - 1 > self.config.limit {
            return Err(Error::RangeTooLarge {
                what: "hi - 1",
                requested: hi - 1,
                budget: self.config.limit,
            });
        }
        let bytes = (hi - lo).saturating_mul(bytes_per_integer(hi));
        if bytes > self.config.memory_budget {
            return Err(Error::RangeTooLarge {
                what: "segment bytes",
                requested: bytes,
                budget: self.config.memory_budget,
            });
        }
        if let Some(cache) = &self.cache {
            if let Some(seg) = cache.load(lo, hi)? {
                return Ok(seg);
            }
            let seg = self.compute_segment(lo, hi);
            cache.store(&seg)?;
            return Ok(seg);
        }
        Ok(self.compute_segment(lo, hi))
    }

    fn compute_segment(&self, lo: u64, hi: u64) -> FactorCountSegment {
        let counts = if hi <= 1 << 32 {
            sieve_counts::<u32>(&self.base_primes, lo, hi)
        } else {
            sieve_counts::<u64>(&self.base_primes, lo, hi)
        };
        FactorCountSegment { lo, hi, counts }
    }

    /// Half-open ranges covering `[1, n]`, cut at every `checkpoint + 1` so
    /// prefix results can be read off at each checkpoint.
    fn ranges(&self, n: u64, checkpoints: &[u64]) -> Vec<(u64, u64)> {
        let seg = self.config.segment_len as u64;
        let mut cuts: Vec<u64> = checkpoints.iter().map(|&c| c + 1).collect();
        cuts.push(n + 1);
        cuts.sort_unstable();
        cuts.dedup();
        let mut out = Vec::new();
        let mut lo = 1u64;
        for cut in cuts {
            while lo < cut {
                let hi = (lo + seg).min(cut);
                out.push((lo, hi));
                lo = hi;
            }
        }
        out
    }

    fn run_ranges<T, F>(&self, ranges: &[(u64, u64)], f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64, u64) -> Result<T> + Sync,
    {
        let total = ranges.len() as u64;
        let done = AtomicU64::new(0);
        let progress = self.progress.clone();
        self.pool.install(|| {
            ranges
                .par_iter()
                .map(|&(lo, hi)| {
                    let out = f(lo, hi)?;
                    let d = done.fetch_add(1, Ordering::Relaxed) + 1;
                    if let Some(p) = &progress {
                        p(d, total);
                    }
                    Ok(out)
                })
                .collect()
        })
    }

    /// Maps every sieve segment of `[1, n]` through `f` in parallel; the
    /// results come back in segment order.
    pub fn fold_segments<T, F>(&self, n: u64, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&FactorCountSegment) -> T + Sync,
    {
        self.check_n(n)?;
        let ranges = self.ranges(n, &[]);
        self.run_ranges(&ranges, |lo, hi| Ok(f(&self.sieve_segment(lo, hi)?)))
    }

    /// Parallel map over the segment ranges of `[1, n]` without sieving, for
    /// reductions that only need the integers themselves.
    pub fn map_ranges<T, F>(&self, n: u64, f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(u64, u64) -> T + Sync,
    {
        self.check_n(n)?;
        let ranges = self.ranges(n, &[]);
        self.run_ranges(&ranges, |lo, hi| Ok(f(lo, hi)))
    }

    /// Profiles at several `N` from a single pass over `[1, max N]`; the
    /// output follows the order of `ns`.
    pub fn profiles(&self, ns: &[u64]) -> Result<Vec<OmegaProfile>> {
        let Some(&max_n) = ns.iter().max() else {
            return Ok(Vec::new());
        };
        for &n in ns {
            self.check_n(n)?;
        }
        let ranges = self.ranges(max_n, ns);
        let tallies = self.run_ranges(&ranges, |lo, hi| {
            Ok(SegmentTally::of(&self.sieve_segment(lo, hi)?))
        })?;

        let mut sorted: Vec<u64> = ns.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let mut snapshots = Vec::with_capacity(sorted.len());
        let mut running = SegmentTally::zero();
        let mut next = sorted.iter().peekable();
        for (&(_, hi), tally) in ranges.iter().zip(&tallies) {
            running.merge(tally);
            while let Some(&&c) = next.peek() {
                if c + 1 == hi {
                    snapshots.push((c, running.profile(c)));
                    next.next();
                } else {
                    break;
                }
            }
        }
        Ok(ns
            .iter()
            .map(|n| {
                snapshots
                    .iter()
                    .find(|(c, _)| c == n)
                    .map(|(_, p)| p.clone())
                    .expect("every checkpoint ends a range")
            })
            .collect())
    }

    pub fn profile(&self, n: u64) -> Result<OmegaProfile> {
        Ok(self.profiles(&[n])?.pop().expect("one profile"))
    }

    /// Exact `pi_k(N)` for all `k`.
    pub fn pi_k_histogram(&self, n: u64) -> Result<PiKHistogram> {
        Ok(self.profile(n)?.histogram)
    }

    /// `g_C(N) / N`: the share of `n <= N` with
    /// `|Omega(n) - log log n| > C sqrt(log log N)`. `n = 1, 2` never count.
    pub fn hardy_ramanujan_tail(&self, n: u64, c: f64) -> Result<f64> {
        if n < 3 {
            return Err(Error::InvalidArgument("N must be >= 3".into()));
        }
        if c.is_nan() || c < 0.0 {
            return Err(Error::InvalidArgument(format!("C must be >= 0, got {c}")));
        }
        let t = c * loglog(n).sqrt();
        // For each k the non-tail n form one interval [first[k], last[k]].
        let windows: Vec<(u64, u64)> = (0..MAX_OMEGA)
            .map(|k| {
                let k = k as f64;
                let first = first_loglog_at_least(k - t, n);
                let last = first_loglog_above(k + t, n) - 1;
                (first, last)
            })
            .collect();
        let inside: u64 = self
            .fold_segments(n, |seg| {
                seg.iter()
                    .filter(|&(m, k)| {
                        let (first, last) = windows[k as usize];
                        m >= 3 && m >= first && m <= last
                    })
                    .count() as u64
            })?
            .into_iter()
            .sum();
        Ok((n - 2 - inside) as f64 / n as f64)
    }
}

/// `|{n <= N : Omega(n) = r mod m}| / N`.
pub fn residue_class_density(hist: &PiKHistogram, m: u64, r: u64) -> Result<f64> {
    if m == 0 || r >= m {
        return Err(Error::InvalidResidue { m, r });
    }
    let count: u64 = hist
        .counts()
        .iter()
        .enumerate()
        .filter(|(k, _)| *k as u64 % m == r)
        .map(|(_, &c)| c)
        .sum();
    Ok(count as f64 / hist.n() as f64)
}

/// Omega(n) by trial division. Independent of the sieve; meant for tests and
/// one-off queries.
pub fn omega_oracle(n: u64) -> u32 {
    assert!(n >= 1, "Omega is defined for n >= 1");
    let mut n = n;
    let mut count = 0;
    while n.is_multiple_of(2) {
        n /= 2;
        count += 1;
    }
    let mut d = 3u64;
    while d * d <= n {
        while n.is_multiple_of(d) {
            n /= d;
            count += 1;
        }
        d += 2;
    }
    if n > 1 {
        count += 1;
    }
    count
}

/// The Liouville function as a function of `Omega(n)`: `(-1)^omega`.
pub fn liouville(omega: u32) -> i32 {
    if omega.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Primes `<= n` by a plain sieve of Eratosthenes.
pub fn primes_up_to(n: u64) -> Vec<u32> {
    let n = n as usize;
    if n < 2 {
        return Vec::new();
    }
    let mut composite = vec![false; n + 1];
    let mut i = 2;
    while i * i <= n {
        if !composite[i] {
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
        i += 1;
    }
    (2..=n)
        .filter(|&i| !composite[i])
        .map(|i| i as u32)
        .collect()
}

/// Product of the prime powers found so far for one integer.
trait Cofactor: Copy {
    const ONE: Self;
    fn times(self, p: u32) -> Self;
    fn is(self, n: u64) -> bool;
}

impl Cofactor for u32 {
    const ONE: Self = 1;
    #[inline(always)]
    fn times(self, p: u32) -> Self {
        // never exceeds n < 2^32
        self.wrapping_mul(p)
    }
    #[inline(always)]
    fn is(self, n: u64) -> bool {
        u64::from(self) == n
    }
}

impl Cofactor for u64 {
    const ONE: Self = 1;
    #[inline(always)]
    fn times(self, p: u32) -> Self {
        self.wrapping_mul(u64::from(p))
    }
    #[inline(always)]
    fn is(self, n: u64) -> bool {
        self == n
    }
}

fn sieve_counts<C: Cofactor>(base_primes: &[u32], lo: u64, hi: u64) -> Vec<u8> {
    let len = (hi - lo) as usize;
    let mut counts = vec![0u8; len];
    let mut cofactor = vec![C::ONE; len];
    let root = (hi - 1).isqrt();
    for &p in base_primes {
        let p64 = u64::from(p);
        if p64 > root {
            break;
        }
        let mut pk = p64;
        loop {
            let first = lo.div_ceil(pk) * pk;
            let step = pk as usize;
            let mut i = (first - lo) as usize;
            let counts = &mut counts[..];
            let cofactor = &mut cofactor[..counts.len()];
            while i < counts.len() {
                counts[i] += 1;
                cofactor[i] = cofactor[i].times(p);
                i += step;
            }
            match pk.checked_mul(p64) {
                Some(next) if next < hi => pk = next,
                _ => break,
            }
        }
    }
    for (i, (c, f)) in counts.iter_mut().zip(&cofactor).enumerate() {
        if !f.is(lo + i as u64) {
            *c += 1;
        }
    }
    counts
}
