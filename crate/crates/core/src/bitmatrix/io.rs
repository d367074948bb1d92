//! BMM1 binary format: magic `BMM1`, rows and cols as little-endian u64,
//! then the row-major words, little-endian.

use super::BitMatrix;
use crate::error::{BmmError, Result};
use std::io::{Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"BMM1";

pub fn write_bmm1<W: Write>(mut w: W, m: &BitMatrix) -> Result<()> {
    let mut buf = Vec::with_capacity(20 + m.words().len() * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(m.rows() as u64).to_le_bytes());
    buf.extend_from_slice(&(m.cols() as u64).to_le_bytes());
    for word in m.words() {
        buf.extend_from_slice(&word.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_bmm1<R: Read>(mut r: R) -> Result<BitMatrix> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 20 || &bytes[..4] != MAGIC {
        return Err(BmmError::Format("missing BMM1 header".into()));
    }
    let field = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let (rows, cols) = (field(4), field(12));
    let rows = usize::try_from(rows).map_err(|_| BmmError::Format("row count too large".into()))?;
    let cols = usize::try_from(cols).map_err(|_| BmmError::Format("column count too large".into()))?;
    if rows == 0 || cols == 0 {
        return Err(BmmError::Format(format!("empty matrix {rows}x{cols}")));
    }
    let expected = rows
        .checked_mul(super::words_for(cols))
        .and_then(|w| w.checked_mul(8))
        .ok_or_else(|| BmmError::Format("dimensions overflow".into()))?;
    let body = &bytes[20..];
    if body.len() != expected {
        return Err(BmmError::Format(format!("expected {expected} payload bytes, found {}", body.len())));
    }
    let words = body.chunks_exact(8).map(|c| u64::from_le_bytes(c.try_into().unwrap())).collect();
    BitMatrix::from_words(rows, cols, words)
}

pub fn save(path: impl AsRef<Path>, m: &BitMatrix) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_bmm1(std::io::BufWriter::new(f), m)
}

pub fn load(path: impl AsRef<Path>) -> Result<BitMatrix> {
    let f = std::fs::File::open(path)?;
    read_bmm1(std::io::BufReader::new(f))
}
