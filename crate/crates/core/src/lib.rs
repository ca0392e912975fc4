//! Sieved prime-factor counts `Omega(n)` and the averages built on them:
//! Cesàro and logarithmic means, ergodic averages `g(T^{Omega(n)} x)` over
//! concrete systems, Erdős–Kac statistics, the weighted-sum form
//! `sum_k pi_k(N)/N a(k)` with its Gaussian approximation, matched prime /
//! semiprime sets, and a block sequence whose averages along `Omega(n)`
//! oscillate.

pub mod averages;
pub mod cli;
pub mod counterexample;
pub mod dynamics;
mod error;
pub mod numeric;
pub mod sieve;
pub mod twosets;
pub mod weights;

pub use error::{Error, Result};
pub use num_complex::Complex64;
