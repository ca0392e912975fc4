//! On-disk segment cache.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       4     magic "OMG1"
//! 4       8     lo  (u64, inclusive)
//! 12      8     hi  (u64, exclusive)
//! 20      hi-lo Omega(lo + i), one unsigned byte per integer
//! ```

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, ErrorKind, Read, Write};
use std::path::{Path, PathBuf};

use super::FactorCountSegment;
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"OMG1";
pub const HEADER_LEN: usize = 20;

pub fn write_segment<W: Write>(mut w: W, segment: &FactorCountSegment) -> Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&segment.lo().to_le_bytes())?;
    w.write_all(&segment.hi().to_le_bytes())?;
    w.write_all(segment.counts())?;
    w.flush()?;
    Ok(())
}

pub fn read_segment<R: Read>(mut r: R) -> Result<FactorCountSegment> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)?;
    if header[..4] != MAGIC {
        return Err(Error::CacheFormat("bad magic".into()));
    }
    let lo = u64::from_le_bytes(header[4..12].try_into().expect("8 bytes"));
    let hi = u64::from_le_bytes(header[12..20].try_into().expect("8 bytes"));
    if lo == 0 || hi <= lo {
        return Err(Error::CacheFormat(format!("bad range [{lo}, {hi})")));
    }
    let len = usize::try_from(hi - lo)
        .map_err(|_| Error::CacheFormat("segment does not fit in memory".into()))?;
    let mut counts = vec![0u8; len];
    r.read_exact(&mut counts)?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::CacheFormat("trailing bytes".into()));
    }
    FactorCountSegment::from_parts(lo, hi, counts).map_err(|e| Error::CacheFormat(e.to_string()))
}

/// A directory of cached segments, one file per `[lo, hi)`.
#[derive(Debug, Clone)]
pub struct SegmentCache {
    dir: PathBuf,
}

impl SegmentCache {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        fs::create_dir_all(&dir)?;
        Ok(Self { dir })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path_for(&self, lo: u64, hi: u64) -> PathBuf {
        self.dir.join(format!("omega_{lo}_{hi}.omg"))
    }

    pub fn load(&self, lo: u64, hi: u64) -> Result<Option<FactorCountSegment>> {
        let path = self.path_for(lo, hi);
        let file = match File::open(&path) {
            Ok(f) => f,
            Err(e) if e.kind() == ErrorKind::NotFound => return Ok(None),
            Err(e) => return Err(e.into()),
        };
        let segment = read_segment(BufReader::new(file))?;
        if segment.lo() != lo || segment.hi() != hi {
            return Err(Error::CacheFormat(format!(
                "{} holds [{}, {})",
                path.display(),
                segment.lo(),
                segment.hi()
            )));
        }
        Ok(Some(segment))
    }

    /// Writes through a temporary file and renames, so concurrent readers never
    /// see a partial segment.
    pub fn store(&self, segment: &FactorCountSegment) -> Result<()> {
        let path = self.path_for(segment.lo(), segment.hi());
        let tmp = path.with_extension(format!("tmp{}", std::process::id()));
        {
            let file = File::create(&tmp)?;
            write_segment(BufWriter::new(file), segment)?;
        }
        fs::rename(&tmp, &path)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout_is_little_endian() {
        let seg = FactorCountSegment::from_parts(1, 4, vec![0, 1, 1]).unwrap();
        let mut buf = Vec::new();
        write_segment(&mut buf, &seg).unwrap();
        assert_eq!(&buf[..4], b"OMG1");
        assert_eq!(&buf[4..12], &[1, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(&buf[12..20], &[4, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(&buf[20..], &[0, 1, 1]);
        let back = read_segment(&buf[..]).unwrap();
        assert_eq!(back, seg);
    }

    #[test]
    fn rejects_corrupt_files() {
        let mut buf = b"OMG2".to_vec();
        buf.extend_from_slice(&[0; 16]);
        assert!(matches!(read_segment(&buf[..]), Err(Error::CacheFormat(_))));

        let seg = FactorCountSegment::from_parts(10, 12, vec![2, 1]).unwrap();
        let mut buf = Vec::new();
        write_segment(&mut buf, &seg).unwrap();
        buf.push(7);
        assert!(matches!(read_segment(&buf[..]), Err(Error::CacheFormat(_))));
        buf.truncate(buf.len() - 2);
        assert!(read_segment(&buf[..]).is_err());
    }
}
