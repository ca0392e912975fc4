//! Cesàro and logarithmic averages, ergodic averages along `Omega(n)`, Weyl
//! sums, and the Erdős–Kac style statistics of `phi(n)`.
//!
//! Whenever the summand depends on `n` only through `Omega(n)` (and the outer
//! `N`), the sum over `n <= N` collapses to a sum over `k` against the
//! `pi_k(N)` histogram or the per-`k` reciprocal sums of an [`OmegaProfile`].

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::dynamics::ObservableOrbit;
use crate::numeric::{
    loglog, normal_cdf, normal_mass, normal_pdf, weighted_sum, CompensatedSum, ComplexSum,
};
use crate::sieve::{OmegaProfile, Sieve};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AverageScheme {
    /// Plain mean over the set.
    Cesaro,
    /// Mean with weights `1/n`, normalized by `sum 1/n`.
    Logarithmic,
}

impl std::str::FromStr for AverageScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cesaro" => Ok(Self::Cesaro),
            "log" | "logarithmic" => Ok(Self::Logarithmic),
            _ => Err(Error::InvalidArgument(format!("unknown scheme {s:?}"))),
        }
    }
}

/// Average of `f` over the finite set `b` (duplicates count once per
/// occurrence).
pub fn average<F>(f: F, b: &[u64], scheme: AverageScheme) -> Result<Complex64>
where
    F: Fn(u64) -> Complex64,
{
    if b.is_empty() {
        return Err(Error::EmptySet);
    }
    match scheme {
        AverageScheme::Cesaro => {
            Ok(b.iter().map(|&n| f(n)).collect::<ComplexSum>().value() / b.len() as f64)
        }
        AverageScheme::Logarithmic => {
            if b.contains(&0) {
                return Err(Error::InvalidArgument(
                    "logarithmic average over n = 0".into(),
                ));
            }
            let num = b.iter().map(|&n| f(n) / n as f64).collect::<ComplexSum>();
            let den: f64 = b
                .iter()
                .map(|&n| 1.0 / n as f64)
                .collect::<CompensatedSum>()
                .value();
            Ok(num.value() / den)
        }
    }
}

/// The average of `n -> g(T^{Omega(n)} x)` over `[1, N]`.
pub fn average_along_omega(
    profile: &OmegaProfile,
    orbit: &ObservableOrbit,
    scheme: AverageScheme,
) -> Complex64 {
    average_of_omega(profile, |k| orbit.value_at(k), scheme)
}

/// The average of `n -> a(Omega(n))` over `[1, N]`.
pub fn average_of_omega<A>(profile: &OmegaProfile, a: A, scheme: AverageScheme) -> Complex64
where
    A: Fn(u64) -> Complex64,
{
    match scheme {
        AverageScheme::Cesaro => weighted_sum(&profile.histogram().weights(), 0, a),
        AverageScheme::Logarithmic => {
            weighted_sum(profile.reciprocal_sums(), 0, a) / profile.harmonic_total()
        }
    }
}

/// The same average computed term by term over the sieved integers, for
/// summands that depend on `n` itself. Used to cross-check the histogram path.
pub fn streamed_average<F>(sieve: &Sieve, n: u64, f: F, scheme: AverageScheme) -> Result<Complex64>
where
    F: Fn(u64, u8) -> Complex64 + Sync,
{
    let parts = sieve.fold_segments(n, |seg| {
        let mut num = ComplexSum::new();
        let mut den = CompensatedSum::new();
        for (m, k) in seg.iter() {
            match scheme {
                AverageScheme::Cesaro => num.add(f(m, k)),
                AverageScheme::Logarithmic => {
                    let w = 1.0 / m as f64;
                    num.add(f(m, k) * w);
                    den.add(w);
                }
            }
        }
        (num, den)
    })?;
    let mut num = ComplexSum::new();
    let mut den = CompensatedSum::new();
    for (a, b) in &parts {
        num.merge(a);
        den.merge(b);
    }
    Ok(match scheme {
        AverageScheme::Cesaro => num.value() / n as f64,
        AverageScheme::Logarithmic => num.value() / den.value(),
    })
}

/// `(1/N) sum_{n <= N} e^{2 pi i beta Omega(n)}`.
pub fn weyl_sum(profile: &OmegaProfile, beta: f64) -> Complex64 {
    average_along_omega(
        profile,
        &crate::dynamics::exponential_orbit(beta),
        AverageScheme::Cesaro,
    )
}

/// `phi(n) = (Omega(n) - log log N) / sqrt(log log N)` for a fixed outer `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EkNormalizer {
    mean: f64,
    sd: f64,
}

impl EkNormalizer {
    pub fn from_n(n: u64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("N must be >= 3, got {n}")));
        }
        Self::from_loglog(loglog(n))
    }

    /// A normalizer for a virtual `N` given only through `log log N`.
    pub fn from_loglog(loglog_n: f64) -> Result<Self> {
        if !(loglog_n > 0.0 && loglog_n.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "log log N must be positive and finite, got {loglog_n}"
            )));
        }
        Ok(Self {
            mean: loglog_n,
            sd: loglog_n.sqrt(),
        })
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sd(&self) -> f64 {
        self.sd
    }

    #[inline]
    pub fn normalize(&self, omega: u64) -> f64 {
        (omega as f64 - self.mean) / self.sd
    }
}

#[derive(Clone)]
enum Shape {
    Indicator { a: f64, b: f64 },
    Ramp { a: f64, b: f64, width: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

/// A compactly supported test function `F: R -> R`.
#[derive(Clone)]
pub struct RealTestFunction {
    shape: Shape,
    support_lo: f64,
    support_hi: f64,
    bound: f64,
}

impl fmt::Debug for RealTestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.shape {
            Shape::Indicator { a, b } => format!("indicator[{a}, {b}]"),
            Shape::Ramp { a, b, width } => format!("ramp[{a}, {b}] width {width}"),
            Shape::Custom(_) => "custom".to_string(),
        };
        f.debug_struct("RealTestFunction")
            .field("kind", &kind)
            .field("support", &(self.support_lo, self.support_hi))
            .field("bound", &self.bound)
            .finish()
    }
}

/// Width of the linear ramps of [`RealTestFunction::smoothed_indicator`] when
/// none is given. One unit of `phi` is at least the spacing
/// `1/sqrt(log log N)` of the values `phi` takes once `log log N >= 1`, so the
/// ramp always spans a full step of the `Omega` lattice.
pub const DEFAULT_RAMP_WIDTH: f64 = 1.0;

fn check_interval(a: f64, b: f64) -> Result<()> {
    if a.is_nan() || b.is_nan() || a >= b {
        return Err(Error::InvalidInterval { lo: a, hi: b });
    }
    Ok(())
}

impl RealTestFunction {
    /// `1_{[a, b]}`, closed at both ends. Infinite endpoints are allowed.
    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        check_interval(a, b)?;
        Ok(Self {
            shape: Shape::Indicator { a, b },
            support_lo: a,
            support_hi: b,
            bound: 1.0,
        })
    }

    /// Continuous version of `1_{[a, b]}`: 1 on `[a, b]`, 0 outside
    /// `[a - width, b + width]`, linear in between.
    pub fn smoothed_indicator(a: f64, b: f64, width: f64) -> Result<Self> {
        check_interval(a, b)?;
        if !(width > 0.0 && width.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "ramp width must be > 0, got {width}"
            )));
        }
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidInterval { lo: a, hi: b });
        }
        Ok(Self {
            shape: Shape::Ramp { a, b, width },
            support_lo: a - width,
            support_hi: b + width,
            bound: 1.0,
        })
    }

    /// An arbitrary function, trusted to vanish outside `[lo, hi]` and to be
    /// bounded by `bound` in modulus. Values outside the support are forced
    /// to 0.
    pub fn custom<F>(f: F, lo: f64, hi: f64, bound: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        check_interval(lo, hi)?;
        Ok(Self {
            shape: Shape::Custom(Arc::new(f)),
            support_lo: lo,
            support_hi: hi,
            bound,
        })
    }

    /// `F = 0`.
    pub fn zero() -> Self {
        Self::custom(|_| 0.0, -1.0, 1.0, 0.0).expect("valid interval")
    }

    pub fn support(&self) -> (f64, f64) {
        (self.support_lo, self.support_hi)
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x < self.support_lo || x > self.support_hi {
            return 0.0;
        }
        match &self.shape {
            Shape::Indicator { .. } => 1.0,
            Shape::Ramp { a, b, width } => {
                if x < *a {
                    (x - (a - width)) / width
                } else if x > *b {
                    ((b + width) - x) / width
                } else {
                    1.0
                }
            }
            Shape::Custom(f) => f(x),
        }
    }

    /// `int F dGauss` in closed form for the built-in shapes.
    pub fn gaussian_expectation(&self) -> Option<f64> {
        match self.shape {
            Shape::Indicator { a, b } => Some(normal_mass(a, b)),
            Shape::Ramp { a, b, width } => {
                // int_{c}^{d} (x - c) dGauss = -(pdf(d) - pdf(c)) - c (cdf(d) - cdf(c))
                let rising = |c: f64, d: f64| {
                    (normal_pdf(c) - normal_pdf(d) - c * normal_mass(c, d)) / width
                };
                let falling = |c: f64, d: f64| {
                    (d * normal_mass(c, d) - (normal_pdf(c) - normal_pdf(d))) / width
                };
                Some(rising(a - width, a) + normal_mass(a, b) + falling(b, b + width))
            }
            Shape::Custom(_) => None,
        }
    }
}

/// Counts of `n in [3, N]` per `k`, and the `phi` value of each `k`.
fn phi_table(profile: &OmegaProfile) -> Result<(Vec<u64>, EkNormalizer)> {
    let norm = EkNormalizer::from_n(profile.n())?;
    Ok((profile.histogram().counts_from_three(), norm))
}

/// `(1/N) sum_{3 <= n <= N} F(phi(n)) a(Omega(n))`.
fn phi_weighted<A>(profile: &OmegaProfile, f: &RealTestFunction, a: A) -> Result<Complex64>
where
    A: Fn(u64) -> Complex64,
{
    let (counts, norm) = phi_table(profile)?;
    let n = profile.n() as f64;
    let weights: Vec<f64> = counts
        .iter()
        .enumerate()
        .map(|(k, &c)| c as f64 / n * f.eval(norm.normalize(k as u64)))
        .collect();
    Ok(weighted_sum(&weights, 0, a))
}

/// `(1/N) sum_{n <= N} F(phi(n))`, skipping `n = 1, 2`.
pub fn ek_weighted_average(profile: &OmegaProfile, f: &RealTestFunction) -> Result<f64> {
    Ok(phi_weighted(profile, f, |_| Complex64::new(1.0, 0.0))?.re)
}

/// `(1/N) sum_{n <= N} F(phi(n)) g(T^{Omega(n)} x)`, skipping `n = 1, 2`.
pub fn correlation_sum(
    profile: &OmegaProfile,
    f: &RealTestFunction,
    orbit: &ObservableOrbit,
) -> Result<Complex64> {
    phi_weighted(profile, f, |k| orbit.value_at(k))
}

/// `(1/N) sum_{n <= N} a(Omega(n) + shift)`.
pub fn shifted_omega_average<A>(profile: &OmegaProfile, a: A, shift: u64) -> Complex64
where
    A: Fn(u64) -> Complex64,
{
    average_of_omega(profile, |k| a(k + shift), AverageScheme::Cesaro)
}

/// `invariance gap`: how much `F(phi(n)) a(Omega(n))` moves on average when
/// `Omega(n)` is replaced by `Omega(n) + 1`.
pub fn invariance_gap<A>(profile: &OmegaProfile, f: &RealTestFunction, a: A) -> Result<f64>
where
    A: Fn(u64) -> Complex64,
{
    let here = phi_weighted(profile, f, &a)?;
    let next = phi_weighted(profile, f, |k| a(k + 1))?;
    Ok((here - next).norm())
}

/// One `(A, B)` cell of an Erdős–Kac report.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct EkCell {
    pub a: f64,
    pub b: f64,
    /// `K_N(A, B) / N`.
    pub empirical: f64,
    /// Standard normal mass of `[A, B]`.
    pub gaussian: f64,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct EkReport {
    pub n: u64,
    pub cells: Vec<EkCell>,
    pub sup_discrepancy: f64,
}

/// The `(A, B)` pairs of an Erdős–Kac report.
#[derive(Debug, Clone, PartialEq)]
pub struct EkGrid {
    pairs: Vec<(f64, f64)>,
}

impl EkGrid {
    /// All pairs `A < B` drawn from the points `lo, lo + step, ..., hi`.
    pub fn arithmetic(lo: f64, hi: f64, step: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && step.is_finite()) || step <= 0.0 || hi <= lo {
            return Err(Error::DegenerateGrid(format!("{lo}:{hi}:{step}")));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        if count < 2 {
            return Err(Error::DegenerateGrid(format!(
                "{lo}:{hi}:{step} has one point"
            )));
        }
        if count > 10_000 {
            return Err(Error::DegenerateGrid(format!(
                "{lo}:{hi}:{step} has {count} points"
            )));
        }
        let points: Vec<f64> = (0..count).map(|i| lo + i as f64 * step).collect();
        let mut pairs = Vec::with_capacity(count * (count - 1) / 2);
        for (i, &a) in points.iter().enumerate() {
            for &b in &points[i + 1..] {
                pairs.push((a, b));
            }
        }
        Ok(Self { pairs })
    }

    pub fn from_pairs(pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::DegenerateGrid("no pairs".into()));
        }
        if let Some(&(a, b)) = pairs
            .iter()
            .find(|(a, b)| a.is_nan() || b.is_nan() || a > b)
        {
            return Err(Error::DegenerateGrid(format!("pair ({a}, {b}) has A > B")));
        }
        Ok(Self { pairs })
    }

    /// Parses `lo:hi:step`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || Error::DegenerateGrid(format!("expected lo:hi:step, got {spec:?}"));
        if parts.len() != 3 {
            return Err(bad());
        }
        let v: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        Self::arithmetic(v[0], v[1], v[2])
    }

    pub fn pairs(&self) -> &[(f64, f64)] {
        &self.pairs
    }
}

/// Empirical vs. Gaussian mass of `A <= phi(n) <= B` over `n <= N`.
pub fn ek_report(profile: &OmegaProfile, grid: &EkGrid) -> Result<EkReport> {
    let (counts, norm) = phi_table(profile)?;
    let n = profile.n() as f64;
    let phis: Vec<f64> = (0..counts.len())
        .map(|k| norm.normalize(k as u64))
        .collect();
    let cells: Vec<EkCell> = grid
        .pairs
        .iter()
        .map(|&(a, b)| {
            let hits: u64 = counts
                .iter()
                .zip(&phis)
                .filter(|(_, &x)| a <= x && x <= b)
                .map(|(&c, _)| c)
                .sum();
            EkCell {
                a,
                b,
                empirical: hits as f64 / n,
                gaussian: normal_mass(a, b),
            }
        })
        .collect();
    let sup_discrepancy = cells
        .iter()
        .map(|c| (c.empirical - c.gaussian).abs())
        .fold(0.0, f64::max);
    Ok(EkReport {
        n: profile.n(),
        cells,
        sup_discrepancy,
    })
}

/// Standard normal CDF, re-exported for report consumers.
pub fn gaussian_cdf(x: f64) -> f64 {
    normal_cdf(x)
}

/// Both sides of the comparison between logarithmic averages over `[N/p]`
/// and over `[N]`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LogTrickReport {
    /// `|E^log_{[N/p]} f - E^log_{[N]} f|`.
    pub value: f64,
    /// `A_{N/p} = sum_{n <= N/p} 1/n`.
    pub harmonic_short: f64,
    /// `A_N`.
    pub harmonic_full: f64,
}

impl LogTrickReport {
    /// `2M (1 - A_{N/p} / A_N)` for `|f| <= M`.
    pub fn bound(&self, m: f64) -> f64 {
        2.0 * m * (1.0 - self.harmonic_short / self.harmonic_full)
    }
}

fn check_p(n: u64, p: u64) -> Result<()> {
    if p < 2 || n < p {
        return Err(Error::InvalidP(p));
    }
    Ok(())
}

/// Log-average discrepancy between `[N/p]` and `[N]` for `f(n, Omega(n))`,
/// summed term by term.
pub fn log_trick_discrepancy<F>(sieve: &Sieve, f: F, n: u64, p: u64) -> Result<LogTrickReport>
where
    F: Fn(u64, u8) -> Complex64 + Sync,
{
    check_p(n, p)?;
    let short = n / p;
    let parts = sieve.fold_segments(n, |seg| {
        let mut sums = [ComplexSum::new(); 2];
        let mut harm = [CompensatedSum::new(); 2];
        for (m, k) in seg.iter() {
            let w = 1.0 / m as f64;
            let v = f(m, k) * w;
            let i = usize::from(m > short);
            sums[i].add(v);
            harm[i].add(w);
        }
        (sums, harm)
    })?;
    let mut sums = [ComplexSum::new(); 2];
    let mut harm = [CompensatedSum::new(); 2];
    for (s, h) in &parts {
        for i in 0..2 {
            sums[i].merge(&s[i]);
            harm[i].merge(&h[i]);
        }
    }
    let short_avg = sums[0].value() / harm[0].value();
    let mut all = sums[0];
    all.merge(&sums[1]);
    let mut all_h = harm[0];
    all_h.merge(&harm[1]);
    Ok(LogTrickReport {
        value: (short_avg - all.value() / all_h.value()).norm(),
        harmonic_short: harm[0].value(),
        harmonic_full: all_h.value(),
    })
}

/// [`log_trick_discrepancy`] for `f(n) = a(Omega(n))`, from profiles at
/// `N/p` and `N` (see [`Sieve::profiles`]).
pub fn log_trick_along_omega<A>(
    short: &OmegaProfile,
    full: &OmegaProfile,
    p: u64,
    a: A,
) -> Result<LogTrickReport>
where
    A: Fn(u64) -> Complex64,
{
    check_p(full.n(), p)?;
    if short.n() != full.n() / p {
        return Err(Error::InvalidArgument(format!(
            "profiles at {} and {} do not differ by a factor {p}",
            short.n(),
            full.n()
        )));
    }
    let s = average_of_omega(short, &a, AverageScheme::Logarithmic);
    let f = average_of_omega(full, &a, AverageScheme::Logarithmic);
    Ok(LogTrickReport {
        value: (s - f).norm(),
        harmonic_short: short.harmonic_total(),
        harmonic_full: full.harmonic_total(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{
        exponential_orbit, residue_indicator_orbit, rotation_two_points_liouville,
    };
    use crate::numeric::harmonic;
    use crate::sieve::{residue_class_density, SieveConfig};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn sieve() -> Sieve {
        Sieve::new(
            SieveConfig::with_limit(1_000_000)
                .workers(2)
                .segment_len(4096),
        )
        .unwrap()
    }

    #[test]
    fn plain_averages() {
        let b = [1, 2, 3];
        let id = |n: u64| c(n as f64);
        assert_eq!(average(id, &b, AverageScheme::Cesaro).unwrap(), c(2.0));
        let log = average(id, &b, AverageScheme::Logarithmic).unwrap();
        assert!((log.re - 18.0 / 11.0).abs() < 1e-15);
        let all: Vec<u64> = (1..=1000).collect();
        for scheme in [AverageScheme::Cesaro, AverageScheme::Logarithmic] {
            assert!((average(|_| c(1.0), &all, scheme).unwrap() - c(1.0)).norm() < 1e-15);
        }
        assert!(matches!(
            average(id, &[], AverageScheme::Cesaro),
            Err(Error::EmptySet)
        ));
    }

    #[test]
    fn liouville_at_ten() {
        let s = sieve();
        let p = s.profile(10).unwrap();
        let lv = rotation_two_points_liouville();
        // lambda(1..=10) = +1 -1 -1 +1 -1 +1 -1 -1 +1 +1
        assert_eq!(average_along_omega(&p, &lv, AverageScheme::Cesaro), c(0.0));
        assert_eq!(weyl_sum(&p, 0.5), c(0.0));
        let p100 = s.profile(100).unwrap();
        let brute: i32 = (1..=100)
            .map(|n| crate::sieve::liouville(crate::sieve::omega_oracle(n)))
            .sum();
        assert!((weyl_sum(&p100, 0.5) - c(f64::from(brute) / 100.0)).norm() < 1e-15);
        assert!((weyl_sum(&p, 0.0) - c(1.0)).norm() < 1e-15);
        let a = |k: u64| c(if k.is_multiple_of(2) { 1.0 } else { -1.0 });
        assert_eq!(shifted_omega_average(&p, a, 0), c(0.0));
        let konst = crate::dynamics::ObservableOrbit::constant(Complex64::new(0.3, -2.0));
        let v = average_along_omega(&p, &konst, AverageScheme::Logarithmic);
        assert!((v - Complex64::new(0.3, -2.0)).norm() < 1e-15);
    }

    #[test]
    fn histogram_path_matches_streamed_path() {
        let s = sieve();
        let n = 200_000;
        let p = s.profile(n).unwrap();
        let lv = rotation_two_points_liouville();
        for scheme in [AverageScheme::Cesaro, AverageScheme::Logarithmic] {
            let fast = average_along_omega(&p, &lv, scheme);
            let slow = streamed_average(&s, n, |_, k| lv.value_at(u64::from(k)), scheme).unwrap();
            assert!((fast - slow).norm() < 1e-13, "{scheme:?}: {fast} vs {slow}");
        }
    }

    #[test]
    fn weyl_rational_identity() {
        let s = sieve();
        let p = s.profile(100_000).unwrap();
        let w = weyl_sum(&p, 1.0 / 3.0);
        let mut via_residues = Complex64::new(0.0, 0.0);
        for r in 0..3 {
            let d = residue_class_density(p.histogram(), 3, r).unwrap();
            via_residues += Complex64::from_polar(1.0, std::f64::consts::TAU * r as f64 / 3.0) * d;
        }
        assert!((w - via_residues).norm() < 1e-12);
    }

    #[test]
    fn ek_cells() {
        let s = sieve();
        let n = 100_000;
        let p = s.profile(n).unwrap();
        let grid = EkGrid::from_pairs(vec![(-1e9, 1e9), (-1.96, 1.96)]).unwrap();
        let r = ek_report(&p, &grid).unwrap();
        assert_eq!(r.cells[0].empirical, (n - 2) as f64 / n as f64);
        assert!((r.cells[0].gaussian - 1.0).abs() < 1e-15);
        assert!((r.cells[1].gaussian - 0.95).abs() < 1e-4);
        assert!(EkGrid::parse("-3:3:0").is_err());
        assert!(EkGrid::parse("1:1:0.5").is_err());
        assert!(EkGrid::parse("0:0.3:0.5").is_err());
        assert_eq!(
            EkGrid::parse("-3:3:0.5").unwrap().pairs().len(),
            13 * 12 / 2
        );
    }

    #[test]
    fn ek_report_is_monotone_in_b() {
        let s = sieve();
        let p = s.profile(50_000).unwrap();
        let r = ek_report(&p, &EkGrid::parse("-3:3:0.25").unwrap()).unwrap();
        for w in r.cells.windows(2) {
            if w[0].a == w[1].a {
                assert!(w[1].empirical >= w[0].empirical);
            }
            assert!((0.0..=1.0).contains(&w[0].empirical));
        }
    }

    #[test]
    fn test_functions() {
        let s = sieve();
        let p = s.profile(10_000).unwrap();
        assert_eq!(
            ek_weighted_average(&p, &RealTestFunction::zero()).unwrap(),
            0.0
        );
        let everything = RealTestFunction::indicator(-1e6, 1e6).unwrap();
        assert_eq!(
            ek_weighted_average(&p, &everything).unwrap(),
            9998.0 / 10_000.0
        );

        let ramp = RealTestFunction::smoothed_indicator(-1.0, 1.0, 0.5).unwrap();
        assert_eq!(ramp.eval(-1.25), 0.5);
        assert_eq!(ramp.eval(0.3), 1.0);
        assert_eq!(ramp.eval(1.5), 0.0);
        assert_eq!(ramp.eval(1.4), ((1.5 - 1.4) / 0.5));

        // closed form against midpoint quadrature
        let exact = ramp.gaussian_expectation().unwrap();
        let steps = 200_000;
        let (lo, hi) = ramp.support();
        let h = (hi - lo) / steps as f64;
        let quad: f64 = (0..steps)
            .map(|i| {
                let x = lo + (i as f64 + 0.5) * h;
                ramp.eval(x) * normal_pdf(x) * h
            })
            .sum();
        assert!((exact - quad).abs() < 1e-9, "{exact} vs {quad}");
        assert!(RealTestFunction::indicator(1.0, 1.0).is_err());
        assert!(RealTestFunction::smoothed_indicator(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn correlation_degenerate_cases() {
        let s = sieve();
        let p = s.profile(10_000).unwrap();
        let lv = rotation_two_points_liouville();
        assert_eq!(
            correlation_sum(&p, &RealTestFunction::zero(), &lv).unwrap(),
            c(0.0)
        );
        let all = RealTestFunction::indicator(-1e6, 1e6).unwrap();
        let orbit = residue_indicator_orbit(3, 1).unwrap();
        let corr = correlation_sum(&p, &all, &orbit).unwrap();
        let plain = average_along_omega(&p, &orbit, AverageScheme::Cesaro);
        // n = 2 has Omega = 1 = 1 mod 3 and is skipped by the phi sums
        assert!((corr - (plain - c(1e-4))).norm() < 1e-15);
    }

    #[test]
    fn invariance_and_shift() {
        let s = sieve();
        let p = s.profile(10_000).unwrap();
        let f = RealTestFunction::smoothed_indicator(-2.0, 2.0, 1.0).unwrap();
        assert_eq!(invariance_gap(&p, &f, |_| c(0.7)).unwrap(), 0.0);
        assert_eq!(
            invariance_gap(&p, &RealTestFunction::zero(), |k| c(k as f64)).unwrap(),
            0.0
        );
        let sign = |k: u64| c(if k.is_multiple_of(2) { 1.0 } else { -1.0 });
        assert_eq!(
            shifted_omega_average(&p, sign, 1),
            -shifted_omega_average(&p, sign, 0)
        );
        assert_eq!(shifted_omega_average(&p, |_| c(1.0), 5), c(1.0));
    }

    #[test]
    fn log_trick() {
        let s = sieve();
        let lv = |_: u64, k: u8| c(if k.is_multiple_of(2) { 1.0 } else { -1.0 });
        let r = log_trick_discrepancy(&s, |_, _| c(2.5), 10_000, 3).unwrap();
        assert!(r.value < 1e-14);
        let r = log_trick_discrepancy(&s, lv, 100_000, 3).unwrap();
        assert!(r.value <= r.bound(1.0));
        assert!((r.harmonic_full - harmonic(100_000)).abs() < 1e-12);
        assert!((r.harmonic_short - harmonic(33_333)).abs() < 1e-12);

        let ps = s.profiles(&[33_333, 100_000]).unwrap();
        let r2 = log_trick_along_omega(&ps[0], &ps[1], 3, |k| {
            c(if k % 2 == 0 { 1.0 } else { -1.0 })
        })
        .unwrap();
        assert!((r.value - r2.value).abs() < 1e-12);
        assert!(matches!(
            log_trick_discrepancy(&s, lv, 100, 1),
            Err(Error::InvalidP(1))
        ));
        assert!(matches!(
            log_trick_discrepancy(&s, lv, 2, 3),
            Err(Error::InvalidP(3))
        ));
    }

    #[test]
    fn normalizer() {
        assert!(EkNormalizer::from_n(2).is_err());
        let z = EkNormalizer::from_loglog(4.0).unwrap();
        assert_eq!(z.normalize(6), 1.0);
        assert_eq!(exponential_orbit(0.25).bound(), 1.0);
    }
}
