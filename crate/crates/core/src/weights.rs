//! Weights `w_k` with `(1/N) sum_{n <= N} a(Omega(n)) = sum_k w_k a(k)`:
//! the exact `pi_k(N)/N`, the product-form estimate
//! `(1/log N) (log log N)^{k-1} / (k-1)!`, and the Gaussian
//! `(2 pi L)^{-1/2} exp(-(k - L)^2 / (2L))` with `L = log log N`.
//!
//! Gaussian weights need only `L`, so they can stand in for `N` far beyond any
//! sieve.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::numeric::{loglog, weighted_sum, CompensatedSum};
use crate::sieve::PiKHistogram;
use crate::{Error, Result};

/// Default half-width multiplier of the Gaussian window.
pub const DEFAULT_C: f64 = 3.0;

/// Largest `log log N` accepted for virtual windows.
pub const MAX_VIRTUAL_LOGLOG: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WeightKind {
    Exact,
    Erdos,
    Gaussian,
}

/// Weights over the inclusive window `k_lo..=k_hi`. An empty window has
/// `k_hi < k_lo` and no weights.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    pub k_lo: u64,
    pub k_hi: u64,
    pub weights: Vec<f64>,
    pub kind: WeightKind,
}

impl WeightVector {
    fn empty(kind: WeightKind) -> Self {
        Self {
            k_lo: 1,
            k_hi: 0,
            weights: Vec::new(),
            kind,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `w_k`, zero outside the window.
    pub fn get(&self, k: u64) -> f64 {
        if k < self.k_lo || k > self.k_hi {
            return 0.0;
        }
        self.weights[(k - self.k_lo) as usize]
    }

    pub fn ks(&self) -> impl Iterator<Item = u64> + '_ {
        (0..self.weights.len() as u64).map(move |i| self.k_lo + i)
    }

    pub fn total(&self) -> f64 {
        self.weights
            .iter()
            .copied()
            .collect::<CompensatedSum>()
            .value()
    }

    /// `sum_k w_k a(k)`.
    pub fn apply<A: FnMut(u64) -> Complex64>(&self, a: A) -> Complex64 {
        weighted_sum(&self.weights, self.k_lo, a)
    }

    /// The same weights scaled to sum to 1 (unchanged if they sum to 0).
    pub fn renormalized(&self) -> Self {
        let total = self.total();
        let mut out = self.clone();
        if total > 0.0 {
            out.weights.iter_mut().for_each(|w| *w /= total);
        }
        out
    }
}

/// The window `[ceil(L - C sqrt L), floor(L + C sqrt L)]`, clipped to `k >= 0`,
/// for a possibly virtual `L = log log N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianWindowSpec {
    loglog_n: f64,
    c: f64,
}

impl GaussianWindowSpec {
    pub fn new(loglog_n: f64, c: f64) -> Result<Self> {
        if !(loglog_n > 1.0 && loglog_n <= MAX_VIRTUAL_LOGLOG) {
            return Err(Error::WindowOutOfRange(format!(
                "log log N = {loglog_n} outside (1, {MAX_VIRTUAL_LOGLOG:e}]"
            )));
        }
        if !(c > 0.0 && c.is_finite()) {
            return Err(Error::WindowOutOfRange(format!("C = {c} must be > 0")));
        }
        Ok(Self { loglog_n, c })
    }

    /// The window of an actual `N >= 16`.
    pub fn for_n(n: u64, c: f64) -> Result<Self> {
        if n < 16 {
            return Err(Error::WindowOutOfRange(format!(
                "N = {n} < 16 has log log N <= 1"
            )));
        }
        Self::new(loglog(n), c)
    }

    pub fn loglog_n(&self) -> f64 {
        self.loglog_n
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    /// `(k_lo, k_hi)`; `k_hi < k_lo` if no integer lies in the window.
    pub fn bounds(&self) -> (u64, u64) {
        let half = self.c * self.loglog_n.sqrt();
        let lo = (self.loglog_n - half).ceil().max(0.0);
        let hi = (self.loglog_n + half).floor();
        if hi < lo {
            return (1, 0);
        }
        (lo as u64, hi as u64)
    }
}

/// `pi_k(N)/N` over `k = 0..=k_max`.
pub fn exact_weights(hist: &PiKHistogram) -> WeightVector {
    WeightVector {
        k_lo: 0,
        k_hi: hist.k_max() as u64,
        weights: hist.weights(),
        kind: WeightKind::Exact,
    }
}

/// `ln((k-1)!)` for `k >= 1`.
fn ln_factorial(m: u64) -> f64 {
    (2..=m)
        .map(|j| (j as f64).ln())
        .collect::<CompensatedSum>()
        .value()
}

/// The product-form estimate of `pi_k(N)/N` on the window. `k = 0` has no
/// such estimate and is dropped from the window.
pub fn erdos_weights(n: u64, window: &GaussianWindowSpec) -> Result<WeightVector> {
    if n < 16 {
        return Err(Error::WindowOutOfRange(format!("N = {n} < 16")));
    }
    let l = loglog(n);
    if (window.loglog_n - l).abs() > 1e-12 * l {
        return Err(Error::WindowOutOfRange(format!(
            "window built for log log N = {}, but log log {n} = {l}",
            window.loglog_n
        )));
    }
    let (lo, hi) = window.bounds();
    let lo = lo.max(1);
    if hi < lo {
        return Ok(WeightVector::empty(WeightKind::Erdos));
    }
    let ln_l = l.ln();
    // log w_k = -log log N + (k-1) log L - log (k-1)!, and log log N = L
    let mut ln_fact = ln_factorial(lo - 1);
    let mut weights = Vec::with_capacity((hi - lo + 1) as usize);
    for k in lo..=hi {
        if k > lo {
            ln_fact += ((k - 1) as f64).ln();
        }
        weights.push((-l + (k - 1) as f64 * ln_l - ln_fact).exp());
    }
    Ok(WeightVector {
        k_lo: lo,
        k_hi: hi,
        weights,
        kind: WeightKind::Erdos,
    })
}

/// Gaussian weights on the window, not renormalized.
pub fn gaussian_weights(window: &GaussianWindowSpec) -> WeightVector {
    let (lo, hi) = window.bounds();
    if hi < lo {
        return WeightVector::empty(WeightKind::Gaussian);
    }
    let l = window.loglog_n;
    let ln_norm = -0.5 * (2.0 * PI * l).ln();
    let weights = (lo..=hi)
        .map(|k| {
            let d = k as f64 - l;
            (ln_norm - d * d / (2.0 * l)).exp()
        })
        .collect();
    WeightVector {
        k_lo: lo,
        k_hi: hi,
        weights,
        kind: WeightKind::Gaussian,
    }
}

/// `sum_{k in window} w_k 1_A(T^k x)` with Gaussian `w_k`, where
/// `indicator(k)` stands for `1_A(T^k x)`.
pub fn tn_operator<I>(indicator: I, window: &GaussianWindowSpec) -> f64
where
    I: Fn(u64) -> bool,
{
    let w = gaussian_weights(window);
    w.ks()
        .zip(&w.weights)
        .filter(|(k, _)| indicator(*k))
        .map(|(_, &x)| x)
        .collect::<CompensatedSum>()
        .value()
}

/// `sum_{k in window} w_k a(k)` with Gaussian weights: the approximate value of
/// `(1/N) sum_{n <= N} a(Omega(n))` at the virtual `N` of the window.
pub fn extrapolated_average<A>(a: A, window: &GaussianWindowSpec) -> Complex64
where
    A: FnMut(u64) -> Complex64,
{
    gaussian_weights(window).apply(a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproximationReport {
    pub n: u64,
    pub k_lo: u64,
    pub k_hi: u64,
    /// `sum_{k in window} |pi_k(N)/N - gaussian_k|`.
    pub tv_distance: f64,
    /// `max_{k in window} |pi_k(N)/N / gaussian_k - 1|`.
    pub max_rel_err_in_window: f64,
}

/// How far the exact weights are from the Gaussian ones on the window.
pub fn approximation_report(hist: &PiKHistogram, c: f64) -> Result<ApproximationReport> {
    let window = GaussianWindowSpec::for_n(hist.n(), c)?;
    let exact = exact_weights(hist);
    let gauss = gaussian_weights(&window);
    let mut tv = CompensatedSum::new();
    let mut max_rel = 0.0f64;
    for (k, &g) in gauss.ks().zip(&gauss.weights) {
        let e = exact.get(k);
        tv.add((e - g).abs());
        max_rel = max_rel.max((e / g - 1.0).abs());
    }
    Ok(ApproximationReport {
        n: hist.n(),
        k_lo: gauss.k_lo,
        k_hi: gauss.k_hi,
        tv_distance: tv.value(),
        max_rel_err_in_window: max_rel,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::erf;
    use crate::sieve::{Sieve, SieveConfig};

    #[test]
    fn exact_examples() {
        let s = Sieve::new(SieveConfig::with_limit(100_000).workers(1)).unwrap();
        let w = exact_weights(&s.pi_k_histogram(10).unwrap());
        assert_eq!((w.k_lo, w.k_hi), (0, 3));
        assert_eq!(w.weights, vec![0.1, 0.4, 0.4, 0.1]);
        let w = exact_weights(&s.pi_k_histogram(1).unwrap());
        assert_eq!(w.weights, vec![1.0]);
        let w = exact_weights(&s.pi_k_histogram(99_999).unwrap());
        assert!((w.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn window_bounds() {
        let w = GaussianWindowSpec::for_n(100_000_000, 3.0).unwrap();
        assert_eq!(w.bounds(), (0, 8));
        let w = GaussianWindowSpec::new(9.0, 3.0).unwrap();
        assert_eq!(w.bounds(), (0, 18));
        let w = GaussianWindowSpec::new(27.0, 3.0).unwrap();
        assert_eq!(w.bounds(), (12, 42));
        assert!(GaussianWindowSpec::new(1.0, 3.0).is_err());
        assert!(GaussianWindowSpec::new(5.0, 0.0).is_err());
        assert!(GaussianWindowSpec::for_n(15, 3.0).is_err());
    }

    #[test]
    fn erdos_recurrence() {
        let n = 100_000_000;
        let window = GaussianWindowSpec::for_n(n, 3.0).unwrap();
        let w = erdos_weights(n, &window).unwrap();
        assert_eq!(w.k_lo, 1);
        assert!(w.weights.iter().all(|&x| x > 0.0));
        let l = loglog(n);
        for (k, pair) in w.ks().zip(w.weights.windows(2)) {
            let ratio = pair[1] / pair[0];
            assert!((ratio - l / k as f64).abs() < 1e-13 * ratio, "k = {k}");
        }
        // k = 1 is 1/log N
        assert!((w.get(1) - 1.0 / (n as f64).ln()).abs() < 1e-16);
        let other = GaussianWindowSpec::for_n(n / 10, 3.0).unwrap();
        assert!(matches!(
            erdos_weights(n, &other),
            Err(Error::WindowOutOfRange(_))
        ));
    }

    #[test]
    fn gaussian_examples() {
        let window = GaussianWindowSpec::new(9.0, 3.0).unwrap();
        let w = gaussian_weights(&window);
        let peak = (2.0 * PI * 9.0).powf(-0.5);
        assert!((w.get(9) - peak).abs() < 1e-16);
        for j in 0..=9 {
            assert_eq!(w.get(9 + j), w.get(9 - j));
        }
        let mass = w.total();
        assert!((0.95..=1.0).contains(&mass), "{mass}");
        let floor = erf(3.0 / 2f64.sqrt()) - 2.0 / (2.0 * PI * 9.0).sqrt();
        assert!(mass >= floor);
        let big = GaussianWindowSpec::new(1e6, 3.0).unwrap();
        let m = gaussian_weights(&big).total();
        assert!((m - erf(3.0 / 2f64.sqrt())).abs() < 1e-3);
    }

    #[test]
    fn operator_and_extrapolation() {
        let window = GaussianWindowSpec::new(9.0, 3.0).unwrap();
        let mass = gaussian_weights(&window).total();
        assert_eq!(tn_operator(|_| true, &window), mass);
        assert_eq!(tn_operator(|_| false, &window), 0.0);
        let upper = tn_operator(|k| k > 9, &window);
        let slot = gaussian_weights(&window).get(9);
        assert!((upper - (mass - slot) / 2.0).abs() < 1e-15);
        let v = extrapolated_average(|_| Complex64::new(2.0, 0.0), &window);
        assert!((v.re - 2.0 * mass).abs() < 1e-14);
        let alt = extrapolated_average(
            |k| Complex64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0),
            &window,
        );
        assert!(alt.norm() <= 0.02, "{alt}");
    }

    #[test]
    fn approximation_small() {
        let s = Sieve::new(SieveConfig::with_limit(100_000).workers(1)).unwrap();
        let r = approximation_report(&s.pi_k_histogram(10_000).unwrap(), 3.0).unwrap();
        assert!(r.tv_distance >= 0.0);
        assert!(r.max_rel_err_in_window >= 0.0);
        assert!(approximation_report(&s.pi_k_histogram(10).unwrap(), 3.0).is_err());
    }
}
