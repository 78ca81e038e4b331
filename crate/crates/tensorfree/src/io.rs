//! Matrix files.
//!
//! Binary layout, all little-endian:
//!
//! | offset | size | content |
//! |---|---|---|
//! | 0 | 4 | magic `TFMM` |
//! | 4 | 4 | format version, `u32` = 1 |
//! | 8 | 4 | number of legs `r`, `u32` |
//! | 12 | 8·r | leg dimensions, `u64` each |
//! | 12 + 8r | 16·D² | entries row-major, each `f64` real part then `f64` imaginary part |
//!
//! with `D = d_1⋯d_r`. The CSV form starts with the line `# dims: d_1 … d_r`
//! and then has one line per row holding `2D` comma-separated numbers
//! `re_1,im_1,re_2,im_2,…`.

use std::io::{Read, Write};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::CMat;
use crate::tensors::MultipartiteMatrix;

pub const MAGIC: [u8; 4] = *b"TFMM";
pub const VERSION: u32 = 1;
/// Refuse headers describing more than this many entries.
pub const MAX_ENTRIES: usize = 1 << 28;

pub fn write_binary<W: Write>(x: &MultipartiteMatrix, mut w: W) -> Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(x.r() as u32).to_le_bytes())?;
    for &d in x.dims() {
        w.write_all(&(d as u64).to_le_bytes())?;
    }
    let n = x.dim();
    let mut buf = Vec::with_capacity(16 * n);
    for i in 0..n {
        buf.clear();
        for j in 0..n {
            let z = x.get(i, j);
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut b = [0u8; N];
    r.read_exact(&mut b)?;
    Ok(b)
}

pub fn read_binary<R: Read>(mut r: R) -> Result<MultipartiteMatrix> {
    if read_array::<4, _>(&mut r)? != MAGIC {
        return Err(Error::Parse("not a TFMM matrix file".into()));
    }
    let version = u32::from_le_bytes(read_array(&mut r)?);
    if version != VERSION {
        return Err(Error::Parse(format!("unsupported format version {version}")));
    }
    let legs = u32::from_le_bytes(read_array(&mut r)?) as usize;
    if legs == 0 || legs > 64 {
        return Err(Error::Parse(format!("implausible leg count {legs}")));
    }
    let mut dims = Vec::with_capacity(legs);
    let mut n: usize = 1;
    for _ in 0..legs {
        let d = u64::from_le_bytes(read_array(&mut r)?) as usize;
        n = n.checked_mul(d).ok_or(Error::Overflow("matrix dimension"))?;
        dims.push(d);
    }
    if n.checked_mul(n).is_none_or(|e| e > MAX_ENTRIES) {
        return Err(Error::Resource(format!("matrix of dimension {n} is too large to load")));
    }
    let mut m = CMat::zeros(n, n);
    let mut row = vec![0u8; 16 * n];
    for i in 0..n {
        r.read_exact(&mut row)?;
        for j in 0..n {
            let re = f64::from_le_bytes(row[16 * j..16 * j + 8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(row[16 * j + 8..16 * j + 16].try_into().expect("8 bytes"));
            m[(i, j)] = C64::new(re, im);
        }
    }
    MultipartiteMatrix::new(dims, m)
}

pub fn write_csv<W: Write>(x: &MultipartiteMatrix, mut w: W) -> Result<()> {
    let dims: Vec<String> = x.dims().iter().map(|d| d.to_string()).collect();
    writeln!(w, "# dims: {}", dims.join(" "))?;
    let n = x.dim();
    for i in 0..n {
        let fields: Vec<String> = (0..n)
            .map(|j| {
                let z = x.get(i, j);
                format!("{:e},{:e}", z.re, z.im)
            })
            .collect();
        writeln!(w, "{}", fields.join(","))?;
    }
    Ok(())
}

pub fn read_csv<R: Read>(mut r: R) -> Result<MultipartiteMatrix> {
    let mut text = String::new();
    r.read_to_string(&mut text)?;
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
    let dims = header
        .strip_prefix("# dims:")
        .ok_or_else(|| Error::Parse("CSV must start with '# dims:'".into()))?
        .split_whitespace()
        .map(|t| t.parse::<usize>().map_err(|e| Error::Parse(format!("bad dimension {t:?}: {e}"))))
        .collect::<Result<Vec<_>>>()?;
    let n: usize = dims.iter().product();
    let mut m = CMat::zeros(n, n);
    let mut rows = 0;
    for (i, line) in lines.enumerate() {
        if i >= n {
            return Err(Error::Parse(format!("more than {n} rows")));
        }
        let vals = line
            .split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|e| Error::Parse(format!("row {}: {t:?}: {e}", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        if vals.len() != 2 * n {
            return Err(Error::Parse(format!("row {} has {} numbers, expected {}", i + 1, vals.len(), 2 * n)));
        }
        for j in 0..n {
            m[(i, j)] = C64::new(vals[2 * j], vals[2 * j + 1]);
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::Parse(format!("{rows} rows, expected {n}")));
    }
    MultipartiteMatrix::new(dims, m)
}

pub fn save(x: &MultipartiteMatrix, path: &std::path::Path) -> Result<()> {
    let f = std::io::BufWriter::new(std::fs::File::create(path)?);
    if path.extension().is_some_and(|e| e == "csv") {
        write_csv(x, f)
    } else {
        write_binary(x, f)
    }
}

pub fn load(path: &std::path::Path) -> Result<MultipartiteMatrix> {
    let f = std::io::BufReader::new(std::fs::File::open(path)?);
    if path.extension().is_some_and(|e| e == "csv") {
        read_csv(f)
    } else {
        read_binary(f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> MultipartiteMatrix {
        let e: Vec<C64> = (0..36).map(|k| C64::new(k as f64 * 0.25 - 3.0, 1.0 / (k as f64 + 1.0))).collect();
        MultipartiteMatrix::from_row_major(vec![2, 3], &e).unwrap()
    }

    #[test]
    fn binary_round_trip() {
        let x = sample();
        let mut buf = Vec::new();
        write_binary(&x, &mut buf).unwrap();
        assert_eq!(buf.len(), 12 + 16 + 16 * 36);
        assert_eq!(&buf[..4], b"TFMM");
        let y = read_binary(&buf[..]).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn csv_round_trip() {
        let x = sample();
        let mut buf = Vec::new();
        write_csv(&x, &mut buf).unwrap();
        let y = read_csv(&buf[..]).unwrap();
        assert_eq!(x, y);
    }

    #[test]
    fn truncated_binary_is_an_error() {
        let mut buf = Vec::new();
        write_binary(&sample(), &mut buf).unwrap();
        buf.truncate(buf.len() - 5);
        assert!(read_binary(&buf[..]).is_err());
    }
}
