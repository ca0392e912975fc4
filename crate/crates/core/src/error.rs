use std::io;

use thiserror::Error;

use crate::twosets::PrimeSetPair;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid range [{lo}, {hi}): need 1 <= lo < hi")]
    InvalidRange { lo: u64, hi: u64 },

    #[error("range too large: {what} = {requested} exceeds {budget}")]
    RangeTooLarge {
        what: &'static str,
        requested: u64,
        budget: u64,
    },

    #[error("invalid residue class {r} mod {m}: need m >= 1 and 0 <= r < m")]
    InvalidResidue { m: u64, r: u64 },

    #[error("averaging set is empty")]
    EmptySet,

    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),

    #[error("invalid p = {0}")]
    InvalidP(u64),

    #[error("window out of range: {0}")]
    WindowOutOfRange(String),

    #[error("invalid interval [{lo}, {hi}]")]
    InvalidInterval { lo: f64, hi: f64 },

    #[error("integer overflow: {0}")]
    Overflow(String),

    #[error(
        "search exhausted ({reason}); best couplings B1 = {:.6}, B2 = {:.6}",
        best.coupling_b1,
        best.coupling_b2
    )]
    SearchExhausted {
        reason: String,
        best: Box<PrimeSetPair>,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("bad segment cache file: {0}")]
    CacheFormat(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    /// Resource-limit errors are the ones a caller can fix by raising a limit.
    pub fn is_resource_limit(&self) -> bool {
        matches!(
            self,
            Error::RangeTooLarge { .. } | Error::SearchExhausted { .. }
        )
    }
}
