//! Binary matrix files and `key = value` side files.
//!
//! Matrix layout: magic `CSDM`, little-endian `u32` rows and cols, a `u8`
//! complex flag, then row-major `f64` values (re, im interleaved when the
//! flag is 1). Vectors are stored as `1 × n` matrices.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex;

use crate::ensemble::KeyValues;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scalar::Real;

pub const MAGIC: &[u8; 4] = b"CSDM";

/// Writes `m`; the complex flag is set unless every entry is real.
pub fn write_matrix<T: Real, W: Write>(m: &CMatrix<T>, mut out: W) -> Result<()> {
    let rows = u32::try_from(m.rows()).map_err(|_| Error::Format("too many rows".into()))?;
    let cols = u32::try_from(m.cols()).map_err(|_| Error::Format("too many columns".into()))?;
    let complex = !m.is_real();
    let mut buf = Vec::with_capacity(13 + m.data().len() * if complex { 16 } else { 8 });
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&rows.to_le_bytes());
    buf.extend_from_slice(&cols.to_le_bytes());
    buf.push(u8::from(complex));
    for z in m.data() {
        buf.extend_from_slice(&z.re.to_f64_lossy().to_le_bytes());
        if complex {
            buf.extend_from_slice(&z.im.to_f64_lossy().to_le_bytes());
        }
    }
    out.write_all(&buf)?;
    out.flush()?;
    Ok(())
}

pub fn read_matrix<T: Real, R: Read>(mut input: R) -> Result<CMatrix<T>> {
    let mut header = [0u8; 13];
    input
        .read_exact(&mut header)
        .map_err(|_| Error::Format("truncated matrix header".into()))?;
    if &header[..4] != MAGIC {
        return Err(Error::Format("bad magic, expected CSDM".into()));
    }
    let rows = u32::from_le_bytes(header[4..8].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    let complex = match header[12] {
        0 => false,
        1 => true,
        f => return Err(Error::Format(format!("bad complex flag {f}"))),
    };
    let count = rows
        .checked_mul(cols)
        .and_then(|c| c.checked_mul(if complex { 16 } else { 8 }))
        .ok_or_else(|| Error::Format("matrix size overflows".into()))?;
    let mut body = Vec::new();
    input.read_to_end(&mut body)?;
    if body.len() != count {
        return Err(Error::Format(format!("{} payload bytes, expected {count}", body.len())));
    }
    let vals: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let data: Vec<Complex<T>> = if complex {
        vals.chunks_exact(2).map(|p| Complex::new(T::of(p[0]), T::of(p[1]))).collect()
    } else {
        vals.iter().map(|&v| Complex::new(T::of(v), T::zero())).collect()
    };
    Ok(CMatrix::from_vec(rows, cols, data))
}

pub fn save_matrix<T: Real>(m: &CMatrix<T>, path: &Path) -> Result<()> {
    write_matrix(m, fs::File::create(path)?)
}

pub fn load_matrix<T: Real>(path: &Path) -> Result<CMatrix<T>> {
    read_matrix(BufReader::new(fs::File::open(path)?))
}

pub fn save_vector<T: Real>(v: &[Complex<T>], path: &Path) -> Result<()> {
    save_matrix(&CMatrix::from_vec(1, v.len(), v.to_vec()), path)
}

/// Reads a vector stored as a `1 × n` (or `n × 1`) matrix.
pub fn load_vector<T: Real>(path: &Path) -> Result<Vec<Complex<T>>> {
    let m = load_matrix::<T>(path)?;
    if m.rows() != 1 && m.cols() != 1 {
        return Err(Error::Format(format!("{}×{} matrix is not a vector", m.rows(), m.cols())));
    }
    Ok(m.data().to_vec())
}

/// `<path>.meta`.
pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta");
    PathBuf::from(s)
}

pub fn write_key_values(kv: &KeyValues, path: &Path) -> Result<()> {
    fs::write(path, kv.to_string())?;
    Ok(())
}

/// Parses `key = value` lines; `#` lines and blanks are skipped.
pub fn parse_key_values<R: BufRead>(input: R) -> Result<KeyValues> {
    let mut kv = KeyValues::default();
    for (no, line) in input.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let (k, v) = t
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("line {}: expected `key = value`", no + 1)))?;
        kv.push(k.trim(), v.trim());
    }
    Ok(kv)
}

pub fn read_key_values(path: &Path) -> Result<KeyValues> {
    parse_key_values(BufReader::new(fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    type C = Complex<f64>;

    #[test]
    fn round_trip_real_and_complex() {
        for m in [
            CMatrix::from_real(2, 3, &[1.0, -2.5, 0.0, 3.25, 1e-300, -0.0]),
            CMatrix::from_rows(&[vec![C::new(0.1, -0.2), C::new(3.0, 0.0)]]),
        ] {
            let mut buf = Vec::new();
            write_matrix(&m, &mut buf).unwrap();
            assert_eq!(&buf[..4], b"CSDM");
            assert_eq!(buf[12], u8::from(!m.is_real()));
            let back: CMatrix<f64> = read_matrix(buf.as_slice()).unwrap();
            assert_eq!(back, m);
        }
    }

    #[test]
    fn header_layout() {
        let m = CMatrix::from_real(1, 2, &[1.0, 2.0]);
        let mut buf = Vec::new();
        write_matrix(&m, &mut buf).unwrap();
        assert_eq!(buf.len(), 13 + 16);
        assert_eq!(&buf[4..8], &1u32.to_le_bytes());
        assert_eq!(&buf[8..12], &2u32.to_le_bytes());
        assert_eq!(&buf[13..21], &1.0f64.to_le_bytes());
    }

    #[test]
    fn rejects_malformed() {
        assert!(read_matrix::<f64, _>(&b"CSD"[..]).is_err());
        assert!(read_matrix::<f64, _>(&b"XXXX\x01\0\0\0\x01\0\0\0\0\0\0\0\0\0\0\0\0"[..]).is_err());
        assert!(read_matrix::<f64, _>(&b"CSDM\x01\0\0\0\x01\0\0\0\x02\0\0\0\0\0\0\0\0"[..]).is_err());
        assert!(read_matrix::<f64, _>(&b"CSDM\x01\0\0\0\x01\0\0\0\0\0\0"[..]).is_err());
    }

    #[test]
    fn key_values_parse() {
        let kv = parse_key_values("# c\nconstruction = alltop\n\nn = 5\n".as_bytes()).unwrap();
        assert_eq!(kv.get("construction"), Some("alltop"));
        assert_eq!(kv.get("n"), Some("5"));
        assert!(parse_key_values("oops\n".as_bytes()).is_err());
        assert_eq!(meta_path(Path::new("a/b.csdm")), PathBuf::from("a/b.csdm.meta"));
    }
}
