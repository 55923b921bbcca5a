//! Binary field snapshots.
//!
//! Layout: a 64-byte ASCII header
//! `FLD1 nx ny nz x0 x1 y0 y1 z0 z1`, space padded and terminated by `\n`,
//! followed by `dof` little-endian `f64` values in x-fastest order.
//! Extents are written with the shortest exact representation when it fits
//! and with progressively fewer significant digits otherwise.

use std::io::{Read, Write};

use super::{Field, Grid};
use crate::error::{Error, Result};

pub const HEADER_LEN: usize = 64;
const MAGIC: &str = "FLD1";

fn header_for(grid: &Grid) -> String {
    let p = grid.points();
    let e = grid.extents();
    let flat = [e[0].0, e[0].1, e[1].0, e[1].1, e[2].0, e[2].1];
    let head = format!("{MAGIC} {} {} {}", p[0], p[1], p[2]);
    let exact = format!(
        "{head} {}",
        flat.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(" ")
    );
    if exact.len() < HEADER_LEN {
        return exact;
    }
    // round to fewer significant digits until it fits; zeros and short
    // values keep their exact spelling
    for digits in (1..=16).rev() {
        let s = format!(
            "{head} {}",
            flat.iter()
                .map(|v| {
                    let r: f64 = format!("{v:.digits$e}").parse().unwrap_or(*v);
                    format!("{r:?}")
                })
                .collect::<Vec<_>>()
                .join(" ")
        );
        if s.len() < HEADER_LEN {
            return s;
        }
    }
    // unreachable for dof that fit in memory
    head
}

pub fn write_field(w: &mut impl Write, field: &Field) -> Result<()> {
    let mut header = header_for(field.grid()).into_bytes();
    header.resize(HEADER_LEN - 1, b' ');
    header.push(b'\n');
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(8 * field.values().len());
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_field(r: &mut impl Read) -> Result<Field> {
    let mut header = [0u8; HEADER_LEN];
    r.read_exact(&mut header)
        .map_err(|e| Error::Format(format!("short header: {e}")))?;
    if header[HEADER_LEN - 1] != b'\n' {
        return Err(Error::Format("header does not end in a newline".into()));
    }
    let text = std::str::from_utf8(&header)
        .map_err(|_| Error::Format("header is not ASCII".into()))?;
    let tok: Vec<&str> = text.split_whitespace().collect();
    if tok.len() != 10 || tok[0] != MAGIC {
        return Err(Error::Format(format!("unrecognized header `{}`", text.trim_end())));
    }
    let mut points = [0usize; 3];
    for a in 0..3 {
        points[a] = tok[1 + a]
            .parse()
            .map_err(|_| Error::Format(format!("bad point count `{}`", tok[1 + a])))?;
    }
    let mut flat = [0.0f64; 6];
    for (i, slot) in flat.iter_mut().enumerate() {
        *slot = tok[4 + i]
            .parse()
            .map_err(|_| Error::Format(format!("bad extent `{}`", tok[4 + i])))?;
    }
    let grid = Grid::new(
        [(flat[0], flat[1]), (flat[2], flat[3]), (flat[4], flat[5])],
        points,
    )?;
    let mut bytes = vec![0u8; 8 * grid.dof()];
    r.read_exact(&mut bytes)
        .map_err(|e| Error::Format(format!("payload shorter than {} values: {e}", grid.dof())))?;
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Field::new(grid, values)
}

pub fn save_field(path: impl AsRef<std::path::Path>, field: &Field) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_field(&mut f, field)?;
    f.flush()?;
    Ok(())
}

pub fn load_field(path: impl AsRef<std::path::Path>) -> Result<Field> {
    let mut f = std::io::BufReader::new(std::fs::File::open(path)?);
    read_field(&mut f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_exact_for_short_extents() {
        let g = Grid::new([(0.0, 1.0), (0.0, 2.0), (-1.0, 3.0)], [3, 4, 5]).unwrap();
        let u = Field::from_fn(g, |x| x[0] * x[1] - x[2].sin());
        let mut buf = Vec::new();
        write_field(&mut buf, &u).unwrap();
        assert_eq!(buf.len(), HEADER_LEN + 8 * g.dof());
        let back = read_field(&mut buf.as_slice()).unwrap();
        assert_eq!(back, u);
    }

    #[test]
    fn long_extents_fit_approximately() {
        let pi = std::f64::consts::PI;
        let g = Grid::new([(0.0, pi), (-pi, pi), (0.1, pi.exp())], [4, 4, 4]).unwrap();
        let u = Field::constant(g, 1.5);
        let mut buf = Vec::new();
        write_field(&mut buf, &u).unwrap();
        let back = read_field(&mut buf.as_slice()).unwrap();
        assert!(back.grid().compatible(&g, 1e-3));
        assert_eq!(back.values(), u.values());
    }

    #[test]
    fn truncated_payload_is_rejected() {
        let g = Grid::unit_cube(3).unwrap();
        let mut buf = Vec::new();
        write_field(&mut buf, &Field::zeros(g)).unwrap();
        buf.truncate(buf.len() - 1);
        assert!(matches!(read_field(&mut buf.as_slice()), Err(Error::Format(_))));
    }

    #[test]
    fn bad_magic_is_rejected() {
        let mut buf = vec![b' '; HEADER_LEN];
        buf[..4].copy_from_slice(b"NOPE");
        buf[HEADER_LEN - 1] = b'\n';
        assert!(matches!(read_field(&mut buf.as_slice()), Err(Error::Format(_))));
    }
}
