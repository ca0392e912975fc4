//! Floating-point building blocks shared by the averaging engines: compensated
//! summation, the complementary error function and Gaussian masses, and exact
//! resolution of `log log n` boundaries on the integers.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::ops::AddAssign;

use num_complex::Complex64;

/// Neumaier's variant of Kahan summation.
///
/// Partial sums from independent blocks can be combined with [`merge`], which
/// keeps the result independent of how the blocks were scheduled as long as
/// they are merged in a fixed order.
///
/// [`merge`]: CompensatedSum::merge
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub const fn new() -> Self {
        Self {
            sum: 0.0,
            comp: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: &CompensatedSum) {
        self.add(other.sum);
        self.add(other.comp);
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl AddAssign<f64> for CompensatedSum {
    fn add_assign(&mut self, x: f64) {
        self.add(x);
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = CompensatedSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated sum of complex values (real and imaginary parts kept apart).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ComplexSum {
    re: CompensatedSum,
    im: CompensatedSum,
}

impl ComplexSum {
    pub const fn new() -> Self {
        Self {
            re: CompensatedSum::new(),
            im: CompensatedSum::new(),
        }
    }

    #[inline]
    pub fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn merge(&mut self, other: &ComplexSum) {
        self.re.merge(&other.re);
        self.im.merge(&other.im);
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

impl FromIterator<Complex64> for ComplexSum {
    fn from_iter<I: IntoIterator<Item = Complex64>>(iter: I) -> Self {
        let mut s = ComplexSum::new();
        for z in iter {
            s.add(z);
        }
        s
    }
}

/// `sum_k weights[k] * values(k)` with compensated accumulation.
pub fn weighted_sum<F>(weights: &[f64], first_k: u64, mut values: F) -> Complex64
where
    F: FnMut(u64) -> Complex64,
{
    weights
        .iter()
        .enumerate()
        .map(|(i, &w)| values(first_k + i as u64) * w)
        .collect::<ComplexSum>()
        .value()
}

/// Harmonic number `A_n = sum_{j <= n} 1/j`, summed exactly in compensated
/// arithmetic (no asymptotic expansion).
pub fn harmonic(n: u64) -> f64 {
    (1..=n)
        .rev()
        .map(|j| 1.0 / j as f64)
        .collect::<CompensatedSum>()
        .value()
}

// Rational approximations for erfc (W. J. Cody, 1969): 0.5 <= y <= 4 and y > 4.
const ERFC_C: [f64; 9] = [
    0.564_188_496_988_670_1,
    8.883_149_794_388_376,
    66.119_190_637_141_63,
    298.635_138_197_400_1,
    881.952_221_241_769,
    1_712.047_612_634_070_6,
    2_051.078_377_826_071_5,
    1_230.339_354_797_997_2,
    2.153_115_354_744_038_5e-8,
];
const ERFC_D: [f64; 8] = [
    15.744_926_110_709_835,
    117.693_950_891_312_5,
    537.181_101_862_009_9,
    1_621.389_574_566_690_2,
    3_290.799_235_733_459_6,
    4_362.619_090_143_247,
    3_439.367_674_143_721_6,
    1_230.339_354_803_749_4,
];
const ERFC_P: [f64; 6] = [
    0.305_326_634_961_232_36,
    0.360_344_899_949_804_45,
    0.125_781_726_111_229_25,
    0.016_083_785_148_742_275,
    6.587_491_615_298_378e-4,
    0.016_315_387_137_302_097,
];
const ERFC_Q: [f64; 5] = [
    2.568_520_192_289_822,
    1.872_952_849_923_460_4,
    0.527_905_102_951_428_4,
    0.060_518_341_312_441_32,
    0.002_335_204_976_268_691_8,
];
const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const SERIES_CUTOFF: f64 = 0.5;
const ERFC_ZERO_BEYOND: f64 = 26.543;

/// Maclaurin series of erf; used for |x| < 0.5 where it converges in a
/// handful of terms.
fn erf_series(x: f64) -> f64 {
    if x == 0.0 {
        return x;
    }
    let x2 = x * x;
    let mut term = x;
    let mut sum = CompensatedSum::new();
    sum.add(x);
    let mut n = 0u32;
    loop {
        n += 1;
        term *= -x2 / f64::from(n);
        let contrib = term / f64::from(2 * n + 1);
        sum.add(contrib);
        if contrib.abs() <= 1e-18 * x.abs() {
            break;
        }
    }
    2.0 * FRAC_1_SQRT_PI * sum.value()
}

/// `exp(-y^2)` with the square split so the large part is exact.
fn exp_neg_square(y: f64) -> f64 {
    let head = (y * 16.0).trunc() / 16.0;
    (-head * head).exp() * (-(y - head) * (y + head)).exp()
}

/// erfc(y) for y >= SERIES_CUTOFF.
fn erfc_tail(y: f64) -> f64 {
    if y >= ERFC_ZERO_BEYOND {
        return 0.0;
    }
    if y <= 4.0 {
        let mut num = ERFC_C[8] * y;
        for &c in &ERFC_C[..7] {
            num = (num + c) * y;
        }
        num += ERFC_C[7];
        let mut den = y;
        for &d in &ERFC_D[..7] {
            den = (den + d) * y;
        }
        den += ERFC_D[7];
        num / den * exp_neg_square(y)
    } else {
        let z = 1.0 / (y * y);
        let mut num = ERFC_P[5] * z;
        for &p in &ERFC_P[..4] {
            num = (num + p) * z;
        }
        num += ERFC_P[4];
        let mut den = z;
        for &q in &ERFC_Q[..4] {
            den = (den + q) * z;
        }
        den += ERFC_Q[4];
        (FRAC_1_SQRT_PI - z * num / den) / y * exp_neg_square(y)
    }
}

/// Complementary error function, absolute error below 1e-15 on the real line.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    let y = x.abs();
    if y < SERIES_CUTOFF {
        return 1.0 - erf_series(x);
    }
    let tail = erfc_tail(y);
    if x < 0.0 {
        2.0 - tail
    } else {
        tail
    }
}

pub fn erf(x: f64) -> f64 {
    if x.abs() < SERIES_CUTOFF {
        erf_series(x)
    } else {
        1.0 - erfc(x)
    }
}

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal mass of `[a, b]`; tails are differenced on the side where
/// erfc is small so no precision is lost to cancellation.
pub fn normal_mass(a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    if a >= 0.0 {
        0.5 * (erfc(a * FRAC_1_SQRT_2) - erfc(b * FRAC_1_SQRT_2))
    } else if b <= 0.0 {
        0.5 * (erfc(-b * FRAC_1_SQRT_2) - erfc(-a * FRAC_1_SQRT_2))
    } else {
        normal_cdf(b) - normal_cdf(a)
    }
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// `log log n` in natural logarithms; `-inf` for n = 1 and negative for n = 2.
#[inline]
pub fn loglog(n: u64) -> f64 {
    (n as f64).ln().ln()
}

/// Smallest integer `n >= 3` with `log log n >= x`, or `cap + 1` if no such
/// `n <= cap` exists.
///
/// The analytic inverse `e^{e^x}` only seeds the search; the answer is settled
/// by comparing `loglog` at neighbouring integers, so rounding in the double
/// exponential cannot move it.
pub fn first_loglog_at_least(x: f64, cap: u64) -> u64 {
    first_satisfying(cap, |n| loglog(n) >= x, x)
}

/// Smallest integer `n >= 3` with `log log n > x`, or `cap + 1`.
pub fn first_loglog_above(x: f64, cap: u64) -> u64 {
    first_satisfying(cap, |n| loglog(n) > x, x)
}

fn first_satisfying<P: Fn(u64) -> bool>(cap: u64, pred: P, x: f64) -> u64 {
    let past = cap.saturating_add(1);
    if cap < 3 || x.is_nan() {
        return past.max(3);
    }
    if pred(3) {
        return 3;
    }
    if !pred(cap) {
        return past;
    }
    // pred is monotone, false at 3 and true at cap: bracket around the seed
    // by galloping, then bisect.
    let seed = x.exp().exp();
    let c = if seed.is_finite() && seed < cap as f64 {
        (seed.ceil() as u64).clamp(3, cap)
    } else {
        cap
    };
    let (mut lo, mut hi);
    let mut step = 1u64;
    if pred(c) {
        hi = c;
        loop {
            let cand = c.saturating_sub(step).max(3);
            if !pred(cand) {
                lo = cand;
                break;
            }
            hi = cand;
            step = step.saturating_mul(2);
        }
    } else {
        lo = c;
        loop {
            let cand = c.saturating_add(step).min(cap);
            if pred(cand) {
                hi = cand;
                break;
            }
            lo = cand;
            step = step.saturating_mul(2);
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Composite Simpson on exp(-t^2) with a fine grid, independent of the
    /// rational fits.
    fn erf_by_quadrature(x: f64) -> f64 {
        let n = 200_000usize;
        let h = x / n as f64;
        let f = |t: f64| (-t * t).exp();
        let mut s = CompensatedSum::new();
        s.add(f(0.0));
        s.add(f(x));
        for i in 1..n {
            let t = i as f64 * h;
            s.add(if i % 2 == 1 { 4.0 * f(t) } else { 2.0 * f(t) });
        }
        2.0 / PI.sqrt() * s.value() * h / 3.0
    }

    #[test]
    fn erf_matches_quadrature() {
        for i in -60..=60 {
            let x = i as f64 * 0.1;
            let reference = erf_by_quadrature(x);
            assert!(
                (erf(x) - reference).abs() < 1e-13,
                "x = {x}: {} vs {reference}",
                erf(x)
            );
            assert!((erfc(x) - (1.0 - reference)).abs() < 1e-13);
        }
    }

    #[test]
    fn erfc_far_tail_relative_accuracy() {
        // erfc(5) and erfc(10) reference values to 16 digits.
        let e5 = 1.537_459_794_428_034_8e-12;
        let e10 = 2.088_487_583_762_545e-45;
        assert!((erfc(5.0) / e5 - 1.0).abs() < 1e-13);
        assert!((erfc(10.0) / e10 - 1.0).abs() < 1e-13);
        assert_eq!(erfc(30.0), 0.0);
        assert_eq!(erfc(-30.0), 2.0);
    }

    #[test]
    fn normal_mass_95() {
        let m = normal_mass(-1.96, 1.96);
        assert!((m - 0.950_004_209_703_558_7).abs() < 1e-12);
        assert_eq!(normal_mass(1.0, 1.0), 0.0);
        assert_eq!(normal_cdf(f64::INFINITY), 1.0);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }

    #[test]
    fn harmonic_small() {
        assert_eq!(harmonic(0), 0.0);
        assert!((harmonic(3) - 11.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn loglog_boundaries_near_16() {
        // loglog 15 < 1 <= loglog 16
        assert!(loglog(15) < 1.0 && loglog(16) >= 1.0);
        assert_eq!(first_loglog_at_least(1.0, 1_000), 16);
        assert_eq!(first_loglog_above(1.0, 1_000), 16);
        assert_eq!(first_loglog_at_least(loglog(16), 1_000), 16);
        assert_eq!(first_loglog_above(loglog(16), 1_000), 17);
        assert_eq!(first_loglog_at_least(0.0, 1_000), 3);
        assert_eq!(first_loglog_at_least(5.0, 1_000), 1_001);
        assert_eq!(first_loglog_at_least(f64::NEG_INFINITY, 10), 3);
        assert_eq!(first_loglog_at_least(f64::INFINITY, 10), 11);
    }

    #[test]
    fn loglog_boundaries_brute_force() {
        let cap = 200_000u64;
        for &x in &[0.5, 1.3, 1.7, 2.0, 2.2, 2.4, 2.5] {
            let brute = (3..=cap).find(|&n| loglog(n) >= x).unwrap_or(cap + 1);
            assert_eq!(first_loglog_at_least(x, cap), brute, "x = {x}");
            let brute = (3..=cap).find(|&n| loglog(n) > x).unwrap_or(cap + 1);
            assert_eq!(first_loglog_above(x, cap), brute, "x = {x}");
        }
    }
}
