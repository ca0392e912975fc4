//! The `omegalab` command line: one subcommand per experiment, each writing a
//! single table as CSV (header row first) or as JSON
//! `{"meta": {...}, "rows": [...]}`.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid arguments, 3 resource
//! limit (range too large, search exhausted).

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::averages::{
    average_along_omega, correlation_sum, ek_report, ek_weighted_average, invariance_gap,
    log_trick_along_omega, shifted_omega_average, weyl_sum, AverageScheme, EkGrid,
    RealTestFunction, DEFAULT_RAMP_WIDTH,
};
use crate::counterexample::{
    average_along_omega_blocks, erdos_blocks, genericity_defect, oscillation_profile,
    BlockSequence, Checkpoints,
};
use crate::dynamics::{parse_orbit, rotation_two_points_liouville, ObservableOrbit};
use crate::sieve::{residue_class_density, Sieve, SieveConfig, DEFAULT_SEGMENT_LEN};
use crate::twosets::{construct_pair, rho_interval};
use crate::weights::{
    erdos_weights, exact_weights, extrapolated_average, gaussian_weights, GaussianWindowSpec,
    DEFAULT_C,
};
use crate::{Error, Result};

/// Environment variable naming a directory for cached sieve segments.
pub const CACHE_ENV: &str = "OMEGALAB_CACHE";

const EXIT_IO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_RESOURCE: u8 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "omegalab",
    version,
    about = "Experiments with Omega(n), the number of prime factors with multiplicity"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Largest N to sieve (accepts 1000000, 1e6 or 10^6)
    #[arg(long, global = true, default_value = "1000000", value_parser = parse_count)]
    limit: u64,
    /// Worker threads; output does not depend on it
    #[arg(long, global = true, value_parser = parse_count)]
    workers: Option<u64>,
    /// Integers per sieve segment
    #[arg(long, global = true, default_value_t = DEFAULT_SEGMENT_LEN as u64, value_parser = parse_count)]
    segment_length: u64,
    /// Emit JSON instead of CSV
    #[arg(long, global = true)]
    json: bool,
    /// Write the table to a file instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Significant digits for floating-point output
    #[arg(long, global = true, default_value_t = 12, value_parser = clap::value_parser!(u8).range(1..=17))]
    precision: u8,
    /// No progress output
    #[arg(long, global = true)]
    quiet: bool,
    /// Segment cache directory (overrides $OMEGALAB_CACHE)
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Mode {
    Extrapolate,
    Sieve,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Omega(n) and lambda(n) for lo <= n < hi
    Sieve {
        #[arg(long, default_value = "1", value_parser = parse_count)]
        lo: u64,
        /// Exclusive upper end [default: limit + 1]
        #[arg(long, value_parser = parse_count)]
        hi: Option<u64>,
    },
    /// pi_k(N) for every k at N = limit
    Pik,
    /// Cesaro and logarithmic Liouville averages at checkpoints up to limit
    Pnt {
        /// `decade` or a fixed step
        #[arg(long, default_value = "decade")]
        stride: String,
    },
    /// Logarithmic Liouville averages and the [N/p] vs [N] discrepancy
    Logpnt {
        #[arg(long, default_value = "decade")]
        stride: String,
        #[arg(long, default_value_t = 3)]
        p: u64,
    },
    /// (1/N) sum e^{2 pi i beta Omega(n)}
    Weyl {
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
    },
    /// Empirical vs Gaussian mass of A <= phi(n) <= B
    ErdosKac {
        /// lo:hi:step; all pairs A < B of grid points are reported
        #[arg(long, default_value = "-3:3:0.25", allow_hyphen_values = true)]
        grid: String,
    },
    /// (1/N) sum F(phi(n)) g(T^{Omega(n)} x) for a smoothed interval indicator F
    Correlate {
        /// liouville | rot:m=M,r=R | exp:beta=B | circle:alpha=A[,start=S]
        #[arg(long, default_value = "liouville")]
        system: String,
        #[arg(long, default_value = "-1,1", allow_hyphen_values = true)]
        bump: String,
        /// Ramp width; 0 gives the sharp indicator
        #[arg(long, default_value_t = DEFAULT_RAMP_WIDTH)]
        ramp: f64,
    },
    /// Per-k weights: exact, and with --compare the product-form and Gaussian ones
    Weights {
        #[arg(long = "C", default_value_t = DEFAULT_C)]
        c: f64,
        #[arg(long)]
        compare: bool,
        /// Scale the Gaussian weights to sum to 1
        #[arg(long)]
        renormalize: bool,
    },
    /// Gaussian-weighted average of a block sequence at a virtual log log N
    Extrapolate {
        #[arg(long)]
        loglogn: f64,
        #[arg(long = "C", default_value_t = DEFAULT_C)]
        c: f64,
        /// JSON file with [[lo, hi], ...]; default: the canonical blocks
        #[arg(long)]
        blocks: Option<PathBuf>,
    },
    /// Matched prime / 2-almost-prime sets on rho-adic intervals up to limit
    Twosets {
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.05)]
        rho: f64,
    },
    /// |E F(phi(n)) a(Omega(n)) - E F(phi(n)) a(Omega(n)+1)|
    Invariance {
        /// parity | one | any --system spec
        #[arg(long, default_value = "parity")]
        a: String,
        #[arg(long, default_value = "-2,2", allow_hyphen_values = true)]
        bump: String,
        #[arg(long, default_value_t = DEFAULT_RAMP_WIDTH)]
        ramp: f64,
        /// `decade`, a fixed step, or `none` for N = limit only
        #[arg(long, default_value = "none")]
        stride: String,
    },
    /// Oscillation of block-sequence averages along Omega(n)
    Counterexample {
        #[arg(long, default_value_t = 5)]
        kmax: u32,
        #[arg(long = "C", default_value_t = DEFAULT_C)]
        c: f64,
        #[arg(long, value_enum, default_value_t = Mode::Extrapolate)]
        mode: Mode,
        #[arg(long)]
        blocks: Option<PathBuf>,
    },
    /// (1/N) sum a(Omega(n) + shift)
    Shifted {
        #[arg(long, default_value = "parity")]
        a: String,
        /// Comma-separated shifts
        #[arg(long, default_value = "0,1")]
        shift: String,
    },
    /// Density of Omega(n) = r mod m for every r
    Residues {
        #[arg(long, default_value_t = 3)]
        m: u64,
    },
    /// Share of n <= N with |Omega(n) - log log n| > C sqrt(log log N)
    Tail {
        #[arg(long = "C", default_value_t = DEFAULT_C)]
        c: f64,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Sieve { .. } => "sieve",
            Command::Pik => "pik",
            Command::Pnt { .. } => "pnt",
            Command::Logpnt { .. } => "logpnt",
            Command::Weyl { .. } => "weyl",
            Command::ErdosKac { .. } => "erdos-kac",
            Command::Correlate { .. } => "correlate",
            Command::Weights { .. } => "weights",
            Command::Extrapolate { .. } => "extrapolate",
            Command::Twosets { .. } => "twosets",
            Command::Invariance { .. } => "invariance",
            Command::Counterexample { .. } => "counterexample",
            Command::Shifted { .. } => "shifted",
            Command::Residues { .. } => "residues",
            Command::Tail { .. } => "tail",
        }
    }
}

/// Parses `1000000`, `1e6`, `1E6` or `10^6` into an exact integer.
fn parse_count(s: &str) -> std::result::Result<u64, String> {
    let s = s.trim().replace('_', "");
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let (mant, exp) = if let Some((b, e)) = s.split_once('^') {
        if b != "10" {
            return Err(format!("only powers of 10 are accepted, got {s:?}"));
        }
        ("1", e)
    } else if let Some((m, e)) = s.split_once(['e', 'E']) {
        (m, e)
    } else {
        return Err(format!("not a non-negative integer: {s:?}"));
    };
    let mant: u64 = mant
        .parse()
        .map_err(|_| format!("not an integer mantissa: {s:?}"))?;
    let exp: u32 = exp
        .parse()
        .map_err(|_| format!("not an integer exponent: {s:?}"))?;
    10u64
        .checked_pow(exp)
        .and_then(|p| p.checked_mul(mant))
        .ok_or_else(|| format!("{s} does not fit in 64 bits"))
}

/// One output cell.
#[derive(Debug, Clone, PartialEq)]
enum Cell {
    Int(i128),
    Float(f64),
    Text(String),
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v.into())
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v.into())
    }
}

impl From<u32> for Cell {
    fn from(v: u32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

#[derive(Debug, Default)]
struct Table {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Cell>>,
    /// Extra top-level JSON fields (ignored in CSV).
    summary: Map<String, Value>,
    /// JSON rows that are not flat records (overrides `rows` in JSON).
    json_rows: Option<Vec<Value>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            ..Self::default()
        }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// `x` with `digits` significant digits: fixed notation for moderate
/// exponents, scientific otherwise, trailing zeros removed.
pub fn format_float(x: f64, digits: u8) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return "0".into();
    }
    let digits = usize::from(digits.max(1));
    let sci = format!("{:.*e}", digits - 1, x);
    let (mant, exp) = sci.split_once('e').expect("scientific notation");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..digits as i32).contains(&exp) {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}", trim_zeros(mant.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if !s.contains('.') {
        return s;
    }
    let t = s.trim_end_matches('0').trim_end_matches('.');
    t.to_string()
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn cell_text(c: &Cell, digits: u8) -> String {
    match c {
        Cell::Int(v) => v.to_string(),
        Cell::Float(v) => format_float(*v, digits),
        Cell::Text(s) => s.clone(),
    }
}

fn cell_json(c: &Cell, digits: u8) -> Value {
    match c {
        Cell::Int(v) => match i64::try_from(*v) {
            Ok(i) => json!(i),
            Err(_) => json!(v.to_string()),
        },
        Cell::Float(v) if v.is_finite() => format_float(*v, digits)
            .parse::<f64>()
            .ok()
            .and_then(serde_json::Number::from_f64)
            .map_or(Value::Null, Value::Number),
        Cell::Float(_) => Value::Null,
        Cell::Text(s) => json!(s),
    }
}

fn round_json(v: Value, digits: u8) -> Value {
    match v {
        Value::Number(n) if n.is_f64() => cell_json(&Cell::Float(n.as_f64().expect("f64")), digits),
        Value::Array(a) => Value::Array(a.into_iter().map(|x| round_json(x, digits)).collect()),
        Value::Object(o) => Value::Object(
            o.into_iter()
                .map(|(k, x)| (k, round_json(x, digits)))
                .collect(),
        ),
        other => other,
    }
}

fn write_table(
    out: &mut dyn Write,
    table: &Table,
    g: &GlobalArgs,
    subcommand: &str,
) -> io::Result<()> {
    let digits = g.precision;
    if g.json {
        let rows: Vec<Value> = match &table.json_rows {
            Some(rows) => rows.iter().map(|r| round_json(r.clone(), digits)).collect(),
            None => table
                .rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> = table
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(k, c)| (k.to_string(), cell_json(c, digits)))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        };
        let mut doc = Map::new();
        doc.insert(
            "meta".into(),
            json!({
                "subcommand": subcommand,
                "limit": g.limit,
                "version": env!("CARGO_PKG_VERSION"),
            }),
        );
        doc.insert("rows".into(), Value::Array(rows));
        if !table.summary.is_empty() {
            doc.insert(
                "summary".into(),
                round_json(Value::Object(table.summary.clone()), digits),
            );
        }
        serde_json::to_writer_pretty(&mut *out, &Value::Object(doc))?;
        writeln!(out)?;
    } else {
        writeln!(
            out,
            "{}",
            table
                .columns
                .iter()
                .map(|c| csv_field(c))
                .collect::<Vec<_>>()
                .join(",")
        )?;
        for row in &table.rows {
            let line: Vec<String> = row
                .iter()
                .map(|c| csv_field(&cell_text(c, digits)))
                .collect();
            writeln!(out, "{}", line.join(","))?;
        }
    }
    out.flush()
}

fn build_sieve(g: &GlobalArgs) -> Result<Sieve> {
    let workers = match g.workers {
        Some(0) => return Err(Error::InvalidArgument("--workers must be >= 1".into())),
        Some(w) => {
            usize::try_from(w).map_err(|_| Error::InvalidArgument("--workers too large".into()))?
        }
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let segment_len = usize::try_from(g.segment_length)
        .map_err(|_| Error::InvalidArgument("--segment-length too large".into()))?;
    let cache_dir = g.cache_dir.clone().or_else(|| {
        std::env::var_os(CACHE_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    });
    let config = SieveConfig {
        limit: g.limit,
        segment_len,
        workers,
        cache_dir,
        ..SieveConfig::default()
    };
    let mut sieve = Sieve::new(config)?;
    if !g.quiet {
        sieve.set_progress(Some(Arc::new(|done: u64, total: u64| {
            // at most ~100 updates per pass
            if done == total || done * 100 / total != (done - 1) * 100 / total {
                let mut err = io::stderr().lock();
                let _ = write!(err, "\rsieving: {done}/{total} segments");
                if done == total {
                    let _ = writeln!(err);
                }
            }
        })));
    }
    Ok(sieve)
}

fn checkpoints(stride: &str, limit: u64) -> Result<Vec<u64>> {
    let mut out = Vec::new();
    match stride {
        "none" => out.push(limit),
        "decade" => {
            let mut n = 10u64;
            while n <= limit {
                out.push(n);
                match n.checked_mul(10) {
                    Some(next) => n = next,
                    None => break,
                }
            }
            if out.last() != Some(&limit) {
                out.push(limit);
            }
        }
        step => {
            let step = parse_count(step).map_err(Error::InvalidArgument)?;
            if step == 0 {
                return Err(Error::InvalidArgument("--stride must be >= 1".into()));
            }
            if limit / step > 100_000 {
                return Err(Error::InvalidArgument(format!(
                    "--stride {step} gives more than 100000 checkpoints"
                )));
            }
            let mut n = step;
            while n <= limit {
                out.push(n);
                n += step;
            }
            if out.last() != Some(&limit) {
                out.push(limit);
            }
        }
    }
    Ok(out)
}

fn parse_bump(bump: &str, ramp: f64) -> Result<RealTestFunction> {
    let (a, b) = bump
        .split_once(',')
        .ok_or_else(|| Error::InvalidArgument(format!("--bump expects A,B, got {bump:?}")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::InvalidArgument(format!("bad number in --bump: {s:?}")))
    };
    let (a, b) = (parse(a)?, parse(b)?);
    if ramp == 0.0 {
        RealTestFunction::indicator(a, b)
    } else {
        RealTestFunction::smoothed_indicator(a, b, ramp)
    }
}

/// `parity` is `(-1)^k`, `one` the constant 1; anything else is an orbit spec.
fn parse_sequence(spec: &str) -> Result<ObservableOrbit> {
    match spec {
        "parity" => Ok(rotation_two_points_liouville()),
        "one" => Ok(ObservableOrbit::constant(Complex64::new(1.0, 0.0))),
        other => parse_orbit(other),
    }
}

fn load_blocks(
    path: Option<&PathBuf>,
    default: impl FnOnce() -> Result<BlockSequence>,
) -> Result<BlockSequence> {
    match path {
        Some(p) => BlockSequence::from_json(&std::fs::read_to_string(p)?),
        None => default(),
    }
}

fn complex_cells(z: Complex64) -> [Cell; 3] {
    [z.re.into(), z.im.into(), z.norm().into()]
}

fn execute(command: &Command, g: &GlobalArgs) -> Result<Table> {
    let limit = g.limit;
    match command {
        Command::Sieve { lo, hi } => {
            let hi = hi.unwrap_or(limit.saturating_add(1));
            let sieve = build_sieve(g)?;
            let seg = sieve.sieve_segment(*lo, hi)?;
            let mut t = Table::new(&["n", "omega", "liouville"]);
            for (n, k) in seg.iter() {
                let k = u32::from(k);
                t.push(vec![
                    n.into(),
                    k.into(),
                    i64::from(crate::sieve::liouville(k)).into(),
                ]);
            }
            Ok(t)
        }
        Command::Pik => {
            let hist = build_sieve(g)?.pi_k_histogram(limit)?;
            let mut t = Table::new(&["k", "pi_k", "weight"]);
            for (k, (&c, w)) in hist.counts().iter().zip(hist.weights()).enumerate() {
                t.push(vec![(k as u64).into(), c.into(), w.into()]);
            }
            Ok(t)
        }
        Command::Pnt { stride } => {
            let ns = checkpoints(stride, limit)?;
            let profiles = build_sieve(g)?.profiles(&ns)?;
            let lv = rotation_two_points_liouville();
            let mut t = Table::new(&["N", "cesaro_liouville", "log_liouville"]);
            for p in &profiles {
                t.push(vec![
                    p.n().into(),
                    average_along_omega(p, &lv, AverageScheme::Cesaro).re.into(),
                    average_along_omega(p, &lv, AverageScheme::Logarithmic)
                        .re
                        .into(),
                ]);
            }
            Ok(t)
        }
        Command::Logpnt { stride, p } => {
            let ns: Vec<u64> = checkpoints(stride, limit)?
                .into_iter()
                .filter(|&n| n >= *p)
                .collect();
            if *p < 2 || ns.is_empty() {
                return Err(Error::InvalidP(*p));
            }
            let mut all: Vec<u64> = ns.iter().flat_map(|&n| [n / p, n]).collect();
            all.sort_unstable();
            all.dedup();
            let profiles = build_sieve(g)?.profiles(&all)?;
            let find = |n: u64| &profiles[all.binary_search(&n).expect("checkpoint")];
            let lv = rotation_two_points_liouville();
            let mut t = Table::new(&[
                "N",
                "log_liouville",
                "log_trick_discrepancy",
                "log_trick_bound",
            ]);
            for &n in &ns {
                let full = find(n);
                let r = log_trick_along_omega(find(n / p), full, *p, |k| lv.value_at(k))?;
                t.push(vec![
                    n.into(),
                    average_along_omega(full, &lv, AverageScheme::Logarithmic)
                        .re
                        .into(),
                    r.value.into(),
                    r.bound(1.0).into(),
                ]);
            }
            Ok(t)
        }
        Command::Weyl { beta } => {
            if !beta.is_finite() {
                return Err(Error::InvalidArgument("--beta must be finite".into()));
            }
            let profile = build_sieve(g)?.profile(limit)?;
            let mut t = Table::new(&["N", "beta", "re", "im", "abs"]);
            let mut row = vec![limit.into(), (*beta).into()];
            row.extend(complex_cells(weyl_sum(&profile, *beta)));
            t.push(row);
            Ok(t)
        }
        Command::ErdosKac { grid } => {
            let grid = EkGrid::parse(grid)?;
            let profile = build_sieve(g)?.profile(limit)?;
            let report = ek_report(&profile, &grid)?;
            let mut t = Table::new(&["A", "B", "empirical", "gaussian", "abs_diff"]);
            for c in &report.cells {
                t.push(vec![
                    c.a.into(),
                    c.b.into(),
                    c.empirical.into(),
                    c.gaussian.into(),
                    (c.empirical - c.gaussian).abs().into(),
                ]);
            }
            t.summary.insert("N".into(), json!(report.n));
            t.summary
                .insert("sup_discrepancy".into(), json!(report.sup_discrepancy));
            Ok(t)
        }
        Command::Correlate { system, bump, ramp } => {
            let orbit = parse_orbit(system)?;
            let f = parse_bump(bump, *ramp)?;
            let profile = build_sieve(g)?.profile(limit)?;
            let corr = correlation_sum(&profile, &f, &orbit)?;
            let ek = ek_weighted_average(&profile, &f)?;
            let gauss = f.gaussian_expectation().unwrap_or(f64::NAN);
            let target = orbit.space_mean() * gauss;
            let mut t = Table::new(&[
                "N",
                "re",
                "im",
                "abs",
                "ek_average",
                "gaussian_mass",
                "target_re",
                "target_im",
            ]);
            let mut row = vec![limit.into()];
            row.extend(complex_cells(corr));
            row.extend([ek.into(), gauss.into(), target.re.into(), target.im.into()]);
            t.push(row);
            Ok(t)
        }
        Command::Weights {
            c,
            compare,
            renormalize,
        } => {
            let hist = build_sieve(g)?.pi_k_histogram(limit)?;
            let exact = exact_weights(&hist);
            if !compare {
                let mut t = Table::new(&["k", "exact"]);
                for (k, &w) in exact.ks().zip(&exact.weights) {
                    t.push(vec![k.into(), w.into()]);
                }
                return Ok(t);
            }
            let window = GaussianWindowSpec::for_n(limit, *c)?;
            let erdos = erdos_weights(limit, &window)?;
            let mut gauss = gaussian_weights(&window);
            if *renormalize {
                gauss = gauss.renormalized();
            }
            let k_hi = exact.k_hi.max(gauss.k_hi);
            let mut t = Table::new(&["k", "exact", "erdos", "gaussian"]);
            for k in 0..=k_hi {
                t.push(vec![
                    k.into(),
                    exact.get(k).into(),
                    erdos.get(k).into(),
                    gauss.get(k).into(),
                ]);
            }
            Ok(t)
        }
        Command::Extrapolate { loglogn, c, blocks } => {
            let window = GaussianWindowSpec::new(*loglogn, *c)?;
            let (_, k_hi) = window.bounds();
            let seq = load_blocks(blocks.as_ref(), || erdos_blocks(blocks_needed(k_hi)))?;
            let value = extrapolated_average(|k| seq.value(k), &window);
            let w = gaussian_weights(&window);
            let mut t = Table::new(&["loglogN", "C", "k_lo", "k_hi", "value", "window_mass"]);
            t.push(vec![
                (*loglogn).into(),
                (*c).into(),
                w.k_lo.into(),
                w.k_hi.into(),
                value.re.into(),
                w.total().into(),
            ]);
            Ok(t)
        }
        Command::Twosets { epsilon, rho } => {
            let sieve = build_sieve(g)?;
            let pair = construct_pair(&sieve, *epsilon, *rho, limit)?;
            let mut t = Table::new(&["set", "n", "interval"]);
            for (name, set) in [("B1", &pair.b1), ("B2", &pair.b2)] {
                for &n in set {
                    t.push(vec![
                        name.into(),
                        n.into(),
                        rho_interval(n, pair.rho).into(),
                    ]);
                }
            }
            t.json_rows = Some(vec![serde_json::to_value(&pair).expect("serializable")]);
            t.summary
                .insert("coupling_b1".into(), json!(pair.coupling_b1));
            t.summary
                .insert("coupling_b2".into(), json!(pair.coupling_b2));
            Ok(t)
        }
        Command::Invariance {
            a,
            bump,
            ramp,
            stride,
        } => {
            let seq = parse_sequence(a)?;
            let f = parse_bump(bump, *ramp)?;
            let ns: Vec<u64> = checkpoints(stride, limit)?
                .into_iter()
                .filter(|&n| n >= 3)
                .collect();
            let profiles = build_sieve(g)?.profiles(&ns)?;
            let mut t = Table::new(&["N", "gap"]);
            for p in &profiles {
                t.push(vec![
                    p.n().into(),
                    invariance_gap(p, &f, |k| seq.value_at(k))?.into(),
                ]);
            }
            Ok(t)
        }
        Command::Counterexample {
            kmax,
            c,
            mode,
            blocks,
        } => {
            let seq = load_blocks(blocks.as_ref(), || erdos_blocks((*kmax + 1).min(40)))?;
            match mode {
                Mode::Extrapolate => {
                    let cps = Checkpoints::up_to(*kmax)?;
                    let mut t = Table::new(&["k", "checkpoint", "loglogN", "value", "window_mass"]);
                    for pt in oscillation_profile(&seq, &cps, *c)? {
                        let kind = match pt.kind {
                            crate::counterexample::CheckpointKind::Peak => "peak",
                            crate::counterexample::CheckpointKind::Trough => "trough",
                        };
                        t.push(vec![
                            pt.k.into(),
                            kind.into(),
                            pt.loglog_n.into(),
                            pt.value.into(),
                            pt.window_mass.into(),
                        ]);
                    }
                    Ok(t)
                }
                Mode::Sieve => {
                    let ns = checkpoints("decade", limit)?;
                    let profiles = build_sieve(g)?.profiles(&ns)?;
                    let mut t = Table::new(&["N", "average_along_omega", "genericity_defect"]);
                    for p in &profiles {
                        t.push(vec![
                            p.n().into(),
                            average_along_omega_blocks(p, &seq).into(),
                            genericity_defect(&seq, p.n())?.into(),
                        ]);
                    }
                    Ok(t)
                }
            }
        }
        Command::Shifted { a, shift } => {
            let seq = parse_sequence(a)?;
            let shifts: Vec<u64> = shift
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<u64>()
                        .map_err(|_| Error::InvalidArgument(format!("bad shift {s:?}")))
                })
                .collect::<Result<_>>()?;
            let profile = build_sieve(g)?.profile(limit)?;
            let mut t = Table::new(&["N", "shift", "re", "im", "abs"]);
            for &s in &shifts {
                let mut row = vec![limit.into(), s.into()];
                row.extend(complex_cells(shifted_omega_average(
                    &profile,
                    |k| seq.value_at(k),
                    s,
                )));
                t.push(row);
            }
            Ok(t)
        }
        Command::Residues { m } => {
            if *m == 0 || *m > 64 {
                return Err(Error::InvalidResidue { m: *m, r: 0 });
            }
            let hist = build_sieve(g)?.pi_k_histogram(limit)?;
            let mut t = Table::new(&["N", "m", "r", "density", "deviation"]);
            for r in 0..*m {
                let d = residue_class_density(&hist, *m, r)?;
                t.push(vec![
                    limit.into(),
                    (*m).into(),
                    r.into(),
                    d.into(),
                    (d - 1.0 / *m as f64).into(),
                ]);
            }
            Ok(t)
        }
        Command::Tail { c } => {
            let v = build_sieve(g)?.hardy_ramanujan_tail(limit, *c)?;
            let mut t = Table::new(&["N", "C", "tail"]);
            t.push(vec![limit.into(), (*c).into(), v.into()]);
            Ok(t)
        }
    }
}

/// Smallest number of canonical blocks whose last block ends past `k`.
fn blocks_needed(k: u64) -> u32 {
    (1..=40u32)
        .find(|&j| 3u64.pow(j) + 2u64.pow(j) > k)
        .unwrap_or(40)
}

fn exit_code(e: &Error) -> u8 {
    if e.is_resource_limit() {
        EXIT_RESOURCE
    } else if matches!(e, Error::Io(_)) {
        EXIT_IO
    } else {
        EXIT_USAGE
    }
}

/// Runs the command line `argv` (program name first) and returns the exit
/// code. Tables go to `stdout` (or `--out`), diagnostics to `stderr`.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{text}");
                    0
                }
                _ => {
                    let _ = write!(stderr, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    let name = cli.command.name();
    let table = match execute(&cli.command, &cli.global) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(stderr, "omegalab {name}: {e}");
            return exit_code(&e);
        }
    };
    let written = match &cli.global.out {
        Some(path) => File::create(path).and_then(|f| {
            let mut w = BufWriter::new(f);
            write_table(&mut w, &table, &cli.global, name)
        }),
        None => write_table(stdout, &table, &cli.global, name),
    };
    if let Err(e) = written {
        if e.kind() == io::ErrorKind::BrokenPipe {
            return 0;
        }
        let _ = writeln!(stderr, "omegalab {name}: {e}");
        return EXIT_IO;
    }
    0
}
