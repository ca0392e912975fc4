//! Concrete topological systems, seen only through orbit samples
//! `k -> g(T^k x)` and a declared space mean `int g dmu`.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::counterexample::BlockSequence;
use crate::{Error, Result};

type ValueFn = Arc<dyn Fn(u64) -> Complex64 + Send + Sync>;

/// Sampled orbit observable of a dynamical system.
///
/// Evaluation is pure, so one orbit may be shared between worker threads.
#[derive(Clone)]
pub struct ObservableOrbit {
    label: String,
    value: ValueFn,
    space_mean: Complex64,
    bound: f64,
    period: Option<u64>,
}

impl fmt::Debug for ObservableOrbit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObservableOrbit")
            .field("label", &self.label)
            .field("space_mean", &self.space_mean)
            .field("bound", &self.bound)
            .field("period", &self.period)
            .finish()
    }
}

impl ObservableOrbit {
    /// An orbit from an arbitrary sampler. `bound` must dominate every sample.
    pub fn new<F>(label: impl Into<String>, value: F, space_mean: Complex64, bound: f64) -> Self
    where
        F: Fn(u64) -> Complex64 + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            value: Arc::new(value),
            space_mean,
            bound,
            period: None,
        }
    }

    /// The constant observable `g = c` (on any system).
    pub fn constant(c: Complex64) -> Self {
        Self::new(format!("const:{c}"), move |_| c, c, c.norm())
    }

    #[inline]
    pub fn value_at(&self, k: u64) -> Complex64 {
        (self.value)(k)
    }

    pub fn space_mean(&self) -> Complex64 {
        self.space_mean
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn period(&self) -> Option<u64> {
        self.period
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `value_at(k)` for `k = 0..len`.
    pub fn table(&self, len: usize) -> Vec<Complex64> {
        (0..len as u64).map(|k| self.value_at(k)).collect()
    }
}

/// Rotation `x -> x + 1` on `Z/mZ`, observed through `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteRotation {
    pub start: u64,
    pub g_values: Vec<Complex64>,
}

impl FiniteRotation {
    pub fn new(start: u64, g_values: Vec<Complex64>) -> Result<Self> {
        if g_values.is_empty() {
            return Err(Error::InvalidArgument(
                "rotation needs m >= 1 points".into(),
            ));
        }
        if start >= g_values.len() as u64 {
            return Err(Error::InvalidArgument(format!(
                "start {start} outside [0, {})",
                g_values.len()
            )));
        }
        Ok(Self { start, g_values })
    }

    pub fn m(&self) -> u64 {
        self.g_values.len() as u64
    }

    pub fn space_mean(&self) -> Complex64 {
        let sum: Complex64 = self.g_values.iter().sum();
        sum / self.m() as f64
    }

    pub fn orbit(&self, label: impl Into<String>) -> ObservableOrbit {
        let m = self.m();
        let start = self.start;
        let g = self.g_values.clone();
        let bound = g.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut orbit = ObservableOrbit::new(
            label,
            move |k| g[((start + k % m) % m) as usize],
            self.space_mean(),
            bound,
        );
        orbit.period = Some(m);
        orbit
    }
}

/// Rotation `x -> x + alpha` on the circle `[0, 1)`.
///
/// The space mean of `g` is supplied by the caller.
#[derive(Clone)]
pub struct CircleRotation {
    pub alpha: f64,
    pub start: f64,
    pub g: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
    pub g_mean: Complex64,
    pub g_bound: f64,
    /// Modulus of continuity: `|g(x) - g(y)| <= g_lipschitz * dist(x, y)`.
    pub g_lipschitz: f64,
}

impl fmt::Debug for CircleRotation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CircleRotation")
            .field("alpha", &self.alpha)
            .field("start", &self.start)
            .field("g_mean", &self.g_mean)
            .finish()
    }
}

impl CircleRotation {
    /// Rotation by `alpha` observed through `g(x) = e^{2 pi i x}`.
    pub fn character(alpha: f64, start: f64) -> Result<Self> {
        if !alpha.is_finite() || !(0.0..1.0).contains(&start) {
            return Err(Error::InvalidArgument(format!(
                "circle rotation needs finite alpha and start in [0, 1), got {alpha}, {start}"
            )));
        }
        Ok(Self {
            alpha,
            start,
            g: Arc::new(|x| Complex64::from_polar(1.0, TAU * x)),
            g_mean: Complex64::new(0.0, 0.0),
            g_bound: 1.0,
            g_lipschitz: TAU,
        })
    }

    pub fn point(&self, k: u64) -> f64 {
        // k * alpha loses absolute precision for huge k; the orbit is only ever
        // sampled at k = Omega(n) < 64.
        (self.start + k as f64 * self.alpha).rem_euclid(1.0)
    }

    pub fn orbit(&self) -> ObservableOrbit {
        let rot = self.clone();
        ObservableOrbit::new(
            format!("circle:alpha={},start={}", self.alpha, self.start),
            move |k| (rot.g)(rot.point(k)),
            self.g_mean,
            self.g_bound,
        )
    }
}

/// Shift orbit of a 0/1 sequence, observed through the cylinder function
/// `F(x) = x(0)`, so the `k`-th sample is `a(k)`.
#[derive(Debug, Clone)]
pub struct SymbolicOrbit {
    pub sequence: BlockSequence,
}

impl SymbolicOrbit {
    pub fn a(&self, k: u64) -> u8 {
        u8::from(self.sequence.contains(k))
    }

    /// The orbit of `a`. Its declared mean is 0, the mean under the point mass
    /// at the all-zero sequence, which `a` is generic for.
    pub fn orbit(&self) -> ObservableOrbit {
        let seq = self.sequence.clone();
        ObservableOrbit::new(
            "blocks",
            move |k| Complex64::new(f64::from(u8::from(seq.contains(k))), 0.0),
            Complex64::new(0.0, 0.0),
            1.0,
        )
    }
}

/// `lambda(n) = F(T^{Omega(n)} 0)` on the two-point rotation with
/// `F(0) = 1`, `F(1) = -1`.
pub fn rotation_two_points_liouville() -> ObservableOrbit {
    FiniteRotation::new(0, vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)])
        .expect("two points")
        .orbit("liouville")
}

/// Indicator of `k = r (mod m)` on the `m`-point rotation started at 0.
pub fn residue_indicator_orbit(m: u64, r: u64) -> Result<ObservableOrbit> {
    if m == 0 || r >= m {
        return Err(Error::InvalidResidue { m, r });
    }
    let len = usize::try_from(m).map_err(|_| Error::InvalidResidue { m, r })?;
    let g = (0..len)
        .map(|i| Complex64::new(f64::from(u8::from(i as u64 == r)), 0.0))
        .collect();
    Ok(FiniteRotation::new(0, g)?.orbit(format!("rot:m={m},r={r}")))
}

/// `k -> e^{2 pi i beta k}`, the rotation by `beta` observed through the
/// character. Its mean is 1 for integer `beta` and 0 otherwise.
pub fn exponential_orbit(beta: f64) -> ObservableOrbit {
    let mean = if beta.fract() == 0.0 { 1.0 } else { 0.0 };
    let frac = beta.rem_euclid(1.0);
    ObservableOrbit::new(
        format!("exp:beta={beta}"),
        move |k| {
            if frac == 0.0 {
                Complex64::new(1.0, 0.0)
            } else if frac == 0.5 {
                // exactly the Liouville signs, no rounding in sin/cos
                Complex64::new(if k % 2 == 0 { 1.0 } else { -1.0 }, 0.0)
            } else {
                Complex64::from_polar(1.0, TAU * (k as f64 * frac).rem_euclid(1.0))
            }
        },
        Complex64::new(mean, 0.0),
        1.0,
    )
}

/// Parses the textual orbit specs accepted by the command line:
/// `liouville`, `rot:m=M,r=R`, `exp:beta=B`, `circle:alpha=A[,start=S]`.
pub fn parse_orbit(spec: &str) -> Result<ObservableOrbit> {
    let (name, rest) = spec.split_once(':').unwrap_or((spec, ""));
    let mut params = std::collections::BTreeMap::new();
    for part in rest.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("bad orbit parameter {part:?}")))?;
        params.insert(k.trim(), v.trim());
    }
    let num = |key: &str| -> Result<f64> {
        let v = params
            .get(key)
            .ok_or_else(|| Error::InvalidArgument(format!("orbit {name:?} needs {key}=")))?;
        v.parse::<f64>()
            .map_err(|_| Error::InvalidArgument(format!("bad number for {key}: {v:?}")))
    };
    let int = |key: &str| -> Result<u64> {
        let v = params
            .get(key)
            .ok_or_else(|| Error::InvalidArgument(format!("orbit {name:?} needs {key}=")))?;
        v.parse::<u64>()
            .map_err(|_| Error::InvalidArgument(format!("bad integer for {key}: {v:?}")))
    };
    let allow = |keys: &[&str]| -> Result<()> {
        match params.keys().find(|k| !keys.contains(k)) {
            Some(k) => Err(Error::InvalidArgument(format!(
                "unknown parameter {k:?} for orbit {name:?}"
            ))),
            None => Ok(()),
        }
    };
    match name {
        "liouville" => {
            allow(&[])?;
            Ok(rotation_two_points_liouville())
        }
        "rot" => {
            allow(&["m", "r"])?;
            residue_indicator_orbit(int("m")?, int("r")?)
        }
        "exp" => {
            allow(&["beta"])?;
            Ok(exponential_orbit(num("beta")?))
        }
        "circle" => {
            allow(&["alpha", "start"])?;
            let start = if params.contains_key("start") {
                num("start")?
            } else {
                0.0
            };
            Ok(CircleRotation::character(num("alpha")?, start)?.orbit())
        }
        _ => Err(Error::InvalidArgument(format!("unknown orbit {spec:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn liouville_rotation() {
        let o = rotation_two_points_liouville();
        assert_eq!(o.value_at(0), c(1.0));
        assert_eq!(o.value_at(3), c(-1.0));
        assert_eq!(o.space_mean(), c(0.0));
        assert_eq!(o.period(), Some(2));
    }

    #[test]
    fn residue_indicator() {
        assert_eq!(residue_indicator_orbit(2, 0).unwrap().value_at(4), c(1.0));
        let o = residue_indicator_orbit(3, 1).unwrap();
        assert_eq!(o.value_at(0), c(0.0));
        assert_eq!(o.value_at(7), c(1.0));
        assert!((o.space_mean() - c(1.0 / 3.0)).norm() < 1e-15);
        assert!(matches!(
            residue_indicator_orbit(3, 3),
            Err(Error::InvalidResidue { m: 3, r: 3 })
        ));
        assert!(residue_indicator_orbit(0, 0).is_err());
    }

    #[test]
    fn exponential() {
        let half = exponential_orbit(0.5);
        let lv = rotation_two_points_liouville();
        for k in 0..1_000_000u64 {
            assert_eq!(half.value_at(k), lv.value_at(k));
        }
        let one = exponential_orbit(1.0);
        assert_eq!(one.space_mean(), c(1.0));
        for k in [0, 1, 17, 1 << 40] {
            assert!((one.value_at(k) - c(1.0)).norm() < 1e-15);
        }
        let third = exponential_orbit(1.0 / 3.0);
        let w = Complex64::from_polar(1.0, TAU / 3.0);
        assert!((third.value_at(1) - w).norm() < 1e-15);
        assert_eq!(third.space_mean(), c(0.0));
    }

    #[test]
    fn finite_rotation_averages_converge() {
        let rot = FiniteRotation::new(2, vec![c(3.0), c(-1.0), c(0.5), c(2.0), c(0.0)]).unwrap();
        let o = rot.orbit("r5");
        let k_max = 1_000_000u64;
        let avg: Complex64 = (0..k_max).map(|k| o.value_at(k)).sum::<Complex64>() / k_max as f64;
        assert!((avg - o.space_mean()).norm() <= 5.0 / k_max as f64 * o.bound());
        for k in 0..20 {
            assert_eq!(o.value_at(k), o.value_at(k + 5));
        }
    }

    #[test]
    fn circle() {
        let rot = CircleRotation::character(0.25, 0.5).unwrap();
        let o = rot.orbit();
        assert!((o.value_at(0) - c(-1.0)).norm() < 1e-15);
        assert!((o.value_at(2) - c(1.0)).norm() < 1e-15);
        assert!(CircleRotation::character(0.1, 1.0).is_err());
    }

    #[test]
    fn parse_specs() {
        assert_eq!(parse_orbit("liouville").unwrap().value_at(1), c(-1.0));
        let o = parse_orbit("rot:m=3,r=1").unwrap();
        assert_eq!(o.value_at(4), c(1.0));
        let o = parse_orbit("exp:beta=0.5").unwrap();
        assert_eq!(o.value_at(3), c(-1.0));
        let o = parse_orbit("circle:alpha=0.6180339887").unwrap();
        assert!((o.value_at(0) - c(1.0)).norm() < 1e-15);
        assert!(parse_orbit("rot:m=3").is_err());
        assert!(parse_orbit("rot:m=3,r=1,x=2").is_err());
        assert!(parse_orbit("exp:beta=abc").is_err());
        assert!(parse_orbit("torus").is_err());
    }
}
