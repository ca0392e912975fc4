//! Primes against 2-almost primes: the coupling `Phi(m, n) = gcd(m, n) - 1`
//! and its double logarithmic average, matched prime / semiprime sets with
//! equal counts on every `rho`-adic interval, and Turán–Kubilius style
//! discrepancies.

use std::collections::BTreeMap;

use num_integer::Integer;
use rayon::prelude::*;
use serde::Serialize;

use crate::averages::{AverageScheme, EkNormalizer};
use crate::numeric::CompensatedSum;
use crate::sieve::{omega_oracle, Sieve};
use crate::{Error, Result};

pub use crate::averages::invariance_gap;

/// Largest set `construct_pair` will build on either side.
pub const MAX_SET_SIZE: usize = 50_000;

/// `gcd(m, n) - 1`.
pub fn phi(m: u64, n: u64) -> u64 {
    m.gcd(&n) - 1
}

fn check_set(b: &[u64]) -> Result<Vec<u64>> {
    if b.is_empty() {
        return Err(Error::EmptySet);
    }
    if b.contains(&0) {
        return Err(Error::InvalidArgument("set elements must be >= 1".into()));
    }
    let mut v = b.to_vec();
    v.sort_unstable();
    v.dedup();
    Ok(v)
}

fn reciprocal_total(b: &[u64]) -> f64 {
    b.iter()
        .map(|&m| 1.0 / m as f64)
        .collect::<CompensatedSum>()
        .value()
}

/// `E^log_{m in B} E^log_{n in B} Phi(m, n)`, summed pair by pair.
pub fn coupling(b: &[u64]) -> Result<f64> {
    let b = check_set(b)?;
    let rows: Vec<CompensatedSum> = b
        .par_iter()
        .map(|&m| {
            b.iter()
                .map(|&n| phi(m, n) as f64 / (m as f64 * n as f64))
                .collect()
        })
        .collect();
    let mut total = CompensatedSum::new();
    for r in &rows {
        total.merge(r);
    }
    let l = reciprocal_total(&b);
    Ok(total.value() / (l * l))
}

/// Prime factorization by trial division, as `(p, e)` pairs.
fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            let mut e = 0;
            while n.is_multiple_of(d) {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Divisors `d >= 2` of `n` with Euler's totient `phi(d)`.
fn divisors_with_totient(n: u64) -> Vec<(u64, u64)> {
    let mut divs = vec![(1u64, 1u64)];
    for (p, e) in factorize(n) {
        let len = divs.len();
        let mut pk = 1u64;
        for _ in 0..e {
            pk *= p;
            let tot = pk - pk / p;
            for j in 0..len {
                let (d, t) = divs[j];
                divs.push((d * pk, t * tot));
            }
        }
    }
    divs.retain(|&(d, _)| d >= 2);
    divs
}

/// Running state of the gcd-grouped coupling: since
/// `gcd(m, n) - 1 = sum_{d | gcd(m, n), d >= 2} phi(d)`, the double sum equals
/// `sum_{d >= 2} phi(d) S_d^2` with `S_d = sum_{m in B, d | m} 1/m`.
#[derive(Debug, Clone, Default)]
struct GroupedCoupling {
    by_divisor: BTreeMap<u64, (u64, f64)>,
    reciprocal: CompensatedSum,
}

impl GroupedCoupling {
    fn insert(&mut self, m: u64) {
        let w = 1.0 / m as f64;
        self.reciprocal.add(w);
        for (d, tot) in divisors_with_totient(m) {
            let e = self.by_divisor.entry(d).or_insert((tot, 0.0));
            e.1 += w;
        }
    }

    fn value(&self) -> f64 {
        let num: CompensatedSum = self
            .by_divisor
            .values()
            .map(|&(tot, s)| tot as f64 * s * s)
            .collect();
        let l = self.reciprocal.value();
        num.value() / (l * l)
    }
}

/// The same coupling through the divisor-grouped rewrite.
pub fn coupling_grouped(b: &[u64]) -> Result<f64> {
    let b = check_set(b)?;
    let mut g = GroupedCoupling::default();
    for &m in &b {
        g.insert(m);
    }
    Ok(g.value())
}

/// Primes `B1` and 2-almost primes `B2` with the same number of elements in
/// every interval `(rho^j, rho^{j+1}]`, `j >= 0`.
#[derive(Clone, PartialEq, Serialize)]
pub struct PrimeSetPair {
    pub b1: Vec<u64>,
    pub b2: Vec<u64>,
    pub rho: f64,
    pub epsilon: f64,
    pub coupling_b1: f64,
    pub coupling_b2: f64,
}

// Sets can hold tens of thousands of elements; keep debug output short.
impl std::fmt::Debug for PrimeSetPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let head = |v: &[u64]| format!("{:?}.. ({} elements)", &v[..v.len().min(5)], v.len());
        f.debug_struct("PrimeSetPair")
            .field("b1", &head(&self.b1))
            .field("b2", &head(&self.b2))
            .field("rho", &self.rho)
            .field("epsilon", &self.epsilon)
            .field("coupling_b1", &self.coupling_b1)
            .field("coupling_b2", &self.coupling_b2)
            .finish()
    }
}

/// The `j` with `rho^j < n <= rho^{j+1}`.
pub fn rho_interval(n: u64, rho: f64) -> u64 {
    assert!(n >= 2 && rho > 1.0);
    let x = n as f64;
    let mut j = ((x.ln() / rho.ln()).ceil() as i64 - 1).max(0);
    // settle against the same powers the membership test uses
    while j > 0 && rho.powi(j as i32) >= x {
        j -= 1;
    }
    while rho.powi(j as i32 + 1) < x {
        j += 1;
    }
    j as u64
}

impl PrimeSetPair {
    /// Checks membership (`Omega = 1` in `B1`, `Omega = 2` in `B2`) and the
    /// per-interval counts against independent trial division.
    pub fn verify(&self) -> Result<()> {
        if self.b1.is_empty() || self.b2.is_empty() {
            return Err(Error::EmptySet);
        }
        let mut counts: BTreeMap<u64, (usize, usize)> = BTreeMap::new();
        for &p in &self.b1 {
            if omega_oracle(p) != 1 {
                return Err(Error::InvalidArgument(format!("{p} in B1 is not prime")));
            }
            counts.entry(rho_interval(p, self.rho)).or_default().0 += 1;
        }
        for &q in &self.b2 {
            if omega_oracle(q) != 2 {
                return Err(Error::InvalidArgument(format!(
                    "{q} in B2 is not a 2-almost prime"
                )));
            }
            counts.entry(rho_interval(q, self.rho)).or_default().1 += 1;
        }
        if let Some((j, (a, b))) = counts.iter().find(|(_, (a, b))| a != b) {
            return Err(Error::InvalidArgument(format!(
                "interval {j} holds {a} primes but {b} 2-almost primes"
            )));
        }
        Ok(())
    }
}

/// Builds matched sets by scanning `rho`-adic intervals upward from `j = 0`.
/// In each interval the side with more candidates is trimmed to its smallest
/// elements. The scan stops as soon as both couplings are at most `epsilon`.
///
/// Only intervals lying entirely below `search_limit` are used. If the limit
/// or the set-size cap is reached first, the error carries the pair built so
/// far.
pub fn construct_pair(
    sieve: &Sieve,
    epsilon: f64,
    rho: f64,
    search_limit: u64,
) -> Result<PrimeSetPair> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    if !(rho > 1.0 && rho <= 1.0 + epsilon) {
        return Err(Error::InvalidArgument(format!(
            "rho must lie in (1, 1 + epsilon], got {rho}"
        )));
    }
    let candidates: Vec<(Vec<u64>, Vec<u64>)> = sieve.fold_segments(search_limit, |seg| {
        let mut primes = Vec::new();
        let mut semis = Vec::new();
        for (n, k) in seg.iter() {
            match k {
                1 => primes.push(n),
                2 => semis.push(n),
                _ => {}
            }
        }
        (primes, semis)
    })?;
    let primes: Vec<u64> = candidates
        .iter()
        .flat_map(|c| c.0.iter().copied())
        .collect();
    let semis: Vec<u64> = candidates
        .iter()
        .flat_map(|c| c.1.iter().copied())
        .collect();
    scan_intervals(&primes, &semis, rho, epsilon, epsilon, search_limit)
}

/// The interval scan of [`construct_pair`], stopping once both couplings are
/// at most `target`.
fn scan_intervals(
    primes: &[u64],
    semis: &[u64],
    rho: f64,
    epsilon: f64,
    target: f64,
    search_limit: u64,
) -> Result<PrimeSetPair> {
    let mut pair = PrimeSetPair {
        b1: Vec::new(),
        b2: Vec::new(),
        rho,
        epsilon,
        coupling_b1: f64::INFINITY,
        coupling_b2: f64::INFINITY,
    };
    let mut g1 = GroupedCoupling::default();
    let mut g2 = GroupedCoupling::default();
    let (mut ip, mut is) = (0usize, 0usize);
    let mut j = 0i32;
    let exhausted = |pair: PrimeSetPair, reason: String| Error::SearchExhausted {
        reason,
        best: Box::new(pair),
    };
    loop {
        let lo = rho.powi(j);
        let hi = rho.powi(j + 1);
        if hi >= search_limit as f64 + 1.0 {
            return Err(exhausted(
                pair,
                format!("no complete interval left below {search_limit}"),
            ));
        }
        let take = |v: &[u64], i: &mut usize| {
            while *i < v.len() && v[*i] as f64 <= lo {
                *i += 1;
            }
            let start = *i;
            while *i < v.len() && v[*i] as f64 <= hi {
                *i += 1;
            }
            start..*i
        };
        let rp = take(primes, &mut ip);
        let rs = take(semis, &mut is);
        let keep = rp.len().min(rs.len());
        if keep > 0 {
            if pair.b1.len() + keep > MAX_SET_SIZE {
                return Err(exhausted(
                    pair,
                    format!("set size cap {MAX_SET_SIZE} reached"),
                ));
            }
            for &p in &primes[rp.start..rp.start + keep] {
                pair.b1.push(p);
                g1.insert(p);
            }
            for &q in &semis[rs.start..rs.start + keep] {
                pair.b2.push(q);
                g2.insert(q);
            }
            pair.coupling_b1 = g1.value();
            pair.coupling_b2 = g2.value();
            if pair.coupling_b1 <= target && pair.coupling_b2 <= target {
                return Ok(pair);
            }
        }
        j += 1;
    }
}

/// `E_{n in [N]} | E^log_{m in B} (1 - m 1_{m | n}) |` under `scheme`.
///
/// The inner average is `1 - d_B(n) / sum_{m in B} 1/m` where `d_B(n)` counts
/// the divisors of `n` in `B`, so the sum is a divisor-count sieve.
pub fn tk_discrepancy(sieve: &Sieve, b: &[u64], n: u64, scheme: AverageScheme) -> Result<f64> {
    let b = check_set(b)?;
    let l = reciprocal_total(&b);
    let parts = sieve.map_ranges(n, |lo, hi| {
        let mut hits = vec![0u32; (hi - lo) as usize];
        for &m in &b {
            if m >= hi {
                break;
            }
            let mut x = lo.div_ceil(m) * m;
            while x < hi {
                hits[(x - lo) as usize] += 1;
                x += m;
            }
        }
        let mut num = CompensatedSum::new();
        let mut den = CompensatedSum::new();
        for (i, &h) in hits.iter().enumerate() {
            let v = (1.0 - f64::from(h) / l).abs();
            match scheme {
                AverageScheme::Cesaro => num.add(v),
                AverageScheme::Logarithmic => {
                    let w = 1.0 / (lo + i as u64) as f64;
                    num.add(v * w);
                    den.add(w);
                }
            }
        }
        (num, den)
    })?;
    let mut num = CompensatedSum::new();
    let mut den = CompensatedSum::new();
    for (a, d) in &parts {
        num.merge(a);
        den.merge(d);
    }
    Ok(match scheme {
        AverageScheme::Cesaro => num.value() / n as f64,
        AverageScheme::Logarithmic => num.value() / den.value(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DilationReport {
    pub p: u64,
    /// How many `n` were compared.
    pub sampled: u64,
    /// `max |phi(pn) - phi(n)|` over the sample.
    pub phi_shift: f64,
    /// `Omega(pn) - Omega(n)`, the same for every sampled `n`.
    pub omega_shift: u64,
}

/// Compares `Omega(pn)` with `Omega(n)` for `n <= count` on sieved data and
/// reports the induced shift of `phi` under `normalizer`.
pub fn dilation_sensitivity(
    sieve: &Sieve,
    p: u64,
    count: u64,
    normalizer: &EkNormalizer,
) -> Result<DilationReport> {
    if p < 2 || omega_oracle(p) != 1 {
        return Err(Error::InvalidP(p));
    }
    if count < 1 {
        return Err(Error::InvalidArgument("need at least one sample".into()));
    }
    let top = count
        .checked_mul(p)
        .ok_or_else(|| Error::Overflow(format!("{count} * {p}")))?;
    if top > sieve.limit() {
        return Err(Error::RangeTooLarge {
            what: "p * count",
            requested: top,
            budget: sieve.limit(),
        });
    }
    let shifts = sieve.map_ranges(count, |lo, hi| -> Result<(u8, u8)> {
        let base = sieve.sieve_segment(lo, hi)?;
        let dilated = sieve.sieve_segment(p * lo, p * (hi - 1) + 1)?;
        let mut min = u8::MAX;
        let mut max = 0u8;
        for (i, &k) in base.counts().iter().enumerate() {
            let kp = dilated.counts()[i * p as usize];
            let d = kp - k;
            min = min.min(d);
            max = max.max(d);
        }
        Ok((min, max))
    })?;
    let mut min = u8::MAX;
    let mut max = 0u8;
    for s in shifts {
        let (a, b) = s?;
        min = min.min(a);
        max = max.max(b);
    }
    if min != max {
        return Err(Error::InvalidArgument(format!(
            "Omega(pn) - Omega(n) ranged over [{min}, {max}]"
        )));
    }
    let omega_shift = u64::from(max);
    Ok(DilationReport {
        p,
        sampled: count,
        phi_shift: omega_shift as f64 / normalizer.sd(),
        omega_shift,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sieve::SieveConfig;

    fn sieve(limit: u64) -> Sieve {
        Sieve::new(
            SieveConfig::with_limit(limit)
                .workers(2)
                .segment_len(1 << 16),
        )
        .unwrap()
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(2, 3), 0);
        assert_eq!(phi(4, 6), 1);
        assert_eq!(phi(97, 97), 96);
        assert_eq!(phi(12, 18), phi(18, 12));
    }

    #[test]
    fn coupling_examples() {
        assert!((coupling(&[2, 3]).unwrap() - 0.68).abs() < 1e-15);
        assert!((coupling(&[101]).unwrap() - 100.0).abs() < 1e-12);
        assert!(matches!(coupling(&[]), Err(Error::EmptySet)));
        let primes: Vec<u64> = crate::sieve::primes_up_to(1000)
            .iter()
            .map(|&p| u64::from(p))
            .collect();
        let c = coupling(&primes).unwrap();
        assert!(c <= 1.0 / reciprocal_total(&primes));
    }

    #[test]
    fn coupling_two_paths() {
        let sets: [Vec<u64>; 3] = [
            vec![2, 3],
            (2..400).collect(),
            vec![4, 6, 9, 10, 14, 15, 21, 22, 25, 26, 33, 35, 49, 77, 121],
        ];
        for b in &sets {
            let a = coupling(b).unwrap();
            let g = coupling_grouped(b).unwrap();
            assert!((a - g).abs() < 1e-12 * a.max(1.0), "{a} vs {g}");
        }
    }

    #[test]
    fn totients() {
        let d = divisors_with_totient(12);
        let mut d: Vec<_> = d.into_iter().collect();
        d.sort();
        assert_eq!(d, vec![(2, 1), (3, 2), (4, 2), (6, 2), (12, 4)]);
    }

    #[test]
    fn intervals() {
        assert_eq!(rho_interval(2, 1.5), 1);
        assert_eq!(rho_interval(3, 1.5), 2);
        assert_eq!(rho_interval(4, 2.0), 1);
        assert_eq!(rho_interval(5, 2.0), 2);
        assert_eq!(rho_interval(8, 2.0), 2);
        assert_eq!(rho_interval(9, 2.0), 3);
    }

    #[test]
    fn interval_scan_mechanics() {
        let s = sieve(100_000);
        let lists = s
            .fold_segments(100_000, |seg| {
                let p: Vec<u64> = seg.iter().filter(|x| x.1 == 1).map(|x| x.0).collect();
                let q: Vec<u64> = seg.iter().filter(|x| x.1 == 2).map(|x| x.0).collect();
                (p, q)
            })
            .unwrap();
        let primes: Vec<u64> = lists.iter().flat_map(|l| l.0.clone()).collect();
        let semis: Vec<u64> = lists.iter().flat_map(|l| l.1.clone()).collect();
        // a target above every achievable coupling stops at the first
        // interval holding both kinds: (3.375, 5.0625] with 5 and 4
        let pair = scan_intervals(&primes, &semis, 1.5, 0.5, 10.0, 100_000).unwrap();
        assert_eq!((pair.b1.clone(), pair.b2.clone()), (vec![5], vec![4]));
        let pair = scan_intervals(&primes, &semis, 1.5, 0.5, 1.5, 100_000).unwrap();
        pair.verify().unwrap();
        assert!(pair.coupling_b1 <= 1.5 && pair.coupling_b2 <= 1.5);
        assert!((coupling(&pair.b1).unwrap() - pair.coupling_b1).abs() < 1e-12);
        assert!((coupling(&pair.b2).unwrap() - pair.coupling_b2).abs() < 1e-12);
        assert!(pair.b1.len() > 1);
    }

    #[test]
    fn exhausted_pair_reports_best() {
        let s = sieve(10_000);
        match construct_pair(&s, 0.1, 1.05, 10_000) {
            Err(Error::SearchExhausted { best, .. }) => {
                best.verify().unwrap();
                assert!(best.coupling_b1 > 0.1);
            }
            other => panic!("expected exhaustion, got {other:?}"),
        }
        assert!(construct_pair(&s, 0.5, 1.6, 1000).is_err());
        assert!(construct_pair(&s, 1.5, 1.1, 1000).is_err());
    }

    #[test]
    fn tk_examples() {
        let s = sieve(100_000);
        for n in [1, 10, 1000] {
            assert_eq!(
                tk_discrepancy(&s, &[1], n, AverageScheme::Cesaro).unwrap(),
                0.0
            );
        }
        assert_eq!(
            tk_discrepancy(&s, &[2], 4, AverageScheme::Cesaro).unwrap(),
            1.0
        );
        assert!(matches!(
            tk_discrepancy(&s, &[], 4, AverageScheme::Cesaro),
            Err(Error::EmptySet)
        ));
        // brute force against the defining double average
        let b = [2u64, 3, 5, 7, 11];
        let l = reciprocal_total(&b);
        let n = 3000u64;
        for scheme in [AverageScheme::Cesaro, AverageScheme::Logarithmic] {
            let vals: Vec<f64> = (1..=n)
                .map(|m| {
                    let inner: f64 = b
                        .iter()
                        .map(|&d| (1.0 - if m % d == 0 { d as f64 } else { 0.0 }) / d as f64)
                        .sum::<f64>()
                        / l;
                    inner.abs()
                })
                .collect();
            let brute = match scheme {
                AverageScheme::Cesaro => vals.iter().sum::<f64>() / n as f64,
                AverageScheme::Logarithmic => {
                    vals.iter()
                        .enumerate()
                        .map(|(i, v)| v / (i + 1) as f64)
                        .sum::<f64>()
                        / (1..=n).map(|m| 1.0 / m as f64).sum::<f64>()
                }
            };
            let got = tk_discrepancy(&s, &b, n, scheme).unwrap();
            assert!((got - brute).abs() < 1e-12, "{scheme:?}: {got} vs {brute}");
        }
    }

    #[test]
    fn dilation() {
        let s = sieve(100_000);
        let z = EkNormalizer::from_loglog(4.0).unwrap();
        let r = dilation_sensitivity(&s, 7, 10_000, &z).unwrap();
        assert_eq!(r.omega_shift, 1);
        assert_eq!(r.phi_shift, 0.5);
        let z1 = EkNormalizer::from_n(1000).unwrap();
        let z2 = EkNormalizer::from_n(100_000).unwrap();
        let a = dilation_sensitivity(&s, 3, 1000, &z1).unwrap().phi_shift;
        let b = dilation_sensitivity(&s, 3, 1000, &z2).unwrap().phi_shift;
        assert!(b < a);
        assert!(matches!(
            dilation_sensitivity(&s, 9, 10, &z),
            Err(Error::InvalidP(9))
        ));
        assert!(dilation_sensitivity(&s, 2, 60_000, &z).is_err());
    }
}
