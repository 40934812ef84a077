//! Reading and writing grids and sinograms.
//!
//! | format       | contents                                                         |
//! |--------------|------------------------------------------------------------------|
//! | `csv` grid   | optional `# n=<n> L=<half_width>` header, `n` rows of `n` fields |
//! | `rsg` grid   | `RSG1`, u32 LE `n`, f64 LE half-width, `n²` f64 LE row-major     |
//! | `pgm` grid   | binary P5, 16-bit, `[min, max]` mapped onto `[0, 65535]`          |
//! | `rss` 2D DRT | `RSS1`, u32 LE `n`, quadrants a..d as `(2n−1)×n` f64 LE          |
//! | `csv` 2D DRT | `# n=<n>` then per quadrant `# quadrant=<q>` and `2n−1` rows      |
//! | `rs3` 3D DRT | `RS31`, u32 LE `n`, sixteen `(3n−2)×n×n` f64 LE blocks           |
//! | `rsg3` grid  | `RSG3`, u32 LE `n`, f64 LE half-width, `n³` f64 LE               |
//!
//! Rows of sinogram blocks are heights from lowest to highest. Decimal output
//! uses the shortest representation that parses back to the same `f64`, so
//! CSV round trips are exact. PGM images put row `n − 1` at the top.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Location, Result};
use crate::grid::{Grid2D, Grid3D};
use crate::sinogram::{Hexadecant, Hexadecant3D, Quadrant, Quadrant2D, Sinogram2D, Sinogram3D};

/// Half-width assumed when a CSV grid has no header.
pub const DEFAULT_HALF_WIDTH: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridFormat {
    Csv,
    RsgBinary,
    Pgm,
}

impl GridFormat {
    /// Guesses the format from the file extension (`csv`, `rsg`, `pgm`).
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "csv" => Some(Self::Csv),
            "rsg" | "bin" => Some(Self::RsgBinary),
            "pgm" => Some(Self::Pgm),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SinogramFormat {
    Csv,
    Binary,
}

impl SinogramFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "csv" => Some(Self::Csv),
            "rss" | "bin" => Some(Self::Binary),
            _ => None,
        }
    }
}

fn parse_err(location: Location, message: impl Into<String>) -> Error {
    Error::Parse {
        location,
        message: message.into(),
    }
}

fn with_path(e: std::io::Error, path: &Path) -> Error {
    Error::Io(std::io::Error::new(
        e.kind(),
        format!("{}: {e}", path.display()),
    ))
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| with_path(e, path))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| with_path(e, path))
}

// ---------------------------------------------------------------------------
// Text helpers

fn write_row(out: &mut String, row: &[f64]) {
    use std::fmt::Write as _;
    for (k, v) in row.iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        write!(out, "{v:?}").unwrap();
    }
    out.push('\n');
}

fn parse_row(line: &str, lineno: usize, expected: Option<usize>) -> Result<Vec<f64>> {
    let row = line
        .split(',')
        .enumerate()
        .map(|(k, f)| {
            f.trim().parse::<f64>().map_err(|_| {
                parse_err(
                    Location::Line(lineno),
                    format!("field {} is not a number: {:?}", k + 1, f.trim()),
                )
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    if let Some(m) = expected {
        if row.len() != m {
            return Err(parse_err(
                Location::Line(lineno),
                format!("row has {} fields, expected {m}", row.len()),
            ));
        }
    }
    Ok(row)
}

/// Parses `key=value` pairs from a `#` comment line.
fn header_fields(line: &str) -> Vec<(&str, &str)> {
    line.trim_start_matches('#')
        .split_whitespace()
        .filter_map(|kv| kv.split_once('='))
        .collect()
}

fn header_value<T: std::str::FromStr>(line: &str, key: &str, lineno: usize) -> Result<Option<T>> {
    match header_fields(line).into_iter().find(|(k, _)| *k == key) {
        None => Ok(None),
        Some((_, v)) => v.parse().map(Some).map_err(|_| {
            parse_err(
                Location::Line(lineno),
                format!("bad header value {key}={v}"),
            )
        }),
    }
}

// ---------------------------------------------------------------------------
// Grids

pub fn grid_to_csv(g: &Grid2D) -> String {
    let n = g.n();
    let mut out = format!("# n={} L={:?}\n", n, g.half_width());
    for i in 0..n {
        write_row(&mut out, &g.data()[i * n..(i + 1) * n]);
    }
    out
}

pub fn grid_from_csv(text: &str) -> Result<Grid2D> {
    let mut n_hdr: Option<usize> = None;
    let mut half_width = DEFAULT_HALF_WIDTH;
    let mut data = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if rows == 0 {
                n_hdr = header_value(line, "n", lineno)?.or(n_hdr);
                half_width = header_value(line, "L", lineno)?.unwrap_or(half_width);
            }
            continue;
        }
        let row = parse_row(line, lineno, width.or(n_hdr))?;
        width.get_or_insert(row.len());
        data.extend(row);
        rows += 1;
    }
    let n = width.ok_or_else(|| parse_err(Location::Line(1), "no data rows"))?;
    if rows != n {
        return Err(parse_err(
            Location::Line(text.lines().count()),
            format!("found {rows} rows, expected {n}"),
        ));
    }
    Grid2D::new(n, half_width, data)
}

pub fn grid_to_rsg(g: &Grid2D) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * g.data().len());
    out.extend_from_slice(b"RSG1");
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    out.extend_from_slice(&g.half_width().to_le_bytes());
    for v in g.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn new(bytes: &'a [u8]) -> Self {
        Self { bytes, pos: 0 }
    }

    fn take(&mut self, len: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < len {
            return Err(parse_err(
                Location::Offset(self.bytes.len()),
                format!("unexpected end of data, needed {len} more bytes"),
            ));
        }
        let s = &self.bytes[self.pos..self.pos + len];
        self.pos += len;
        Ok(s)
    }

    fn magic(&mut self, expect: &[u8; 4]) -> Result<()> {
        let m = self.take(4)?;
        if m != expect {
            return Err(parse_err(
                Location::Offset(0),
                format!(
                    "bad magic {:?}, expected {:?}",
                    String::from_utf8_lossy(m),
                    String::from_utf8_lossy(expect)
                ),
            ));
        }
        Ok(())
    }

    fn u32(&mut self) -> Result<usize> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()) as usize)
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64s(&mut self, count: usize) -> Result<Vec<f64>> {
        let bytes = self.take(
            count
                .checked_mul(8)
                .ok_or_else(|| parse_err(Location::Offset(self.pos), "size overflow"))?,
        )?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(parse_err(
                Location::Offset(self.pos),
                format!("{} trailing bytes", self.bytes.len() - self.pos),
            ));
        }
        Ok(())
    }
}

pub fn grid_from_rsg(bytes: &[u8]) -> Result<Grid2D> {
    let mut r = Reader::new(bytes);
    r.magic(b"RSG1")?;
    let n = r.u32()?;
    let half_width = r.f64()?;
    let data = r.f64s(n * n)?;
    r.finish()?;
    Grid2D::new(n, half_width, data)
}

/// 16-bit binary PGM with a linear map of `[min, max]` onto `[0, 65535]`.
/// A constant grid maps to zero.
pub fn grid_to_pgm(g: &Grid2D) -> Vec<u8> {
    let n = g.n();
    let (lo, hi) = g
        .data()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let span = hi - lo;
    let mut out = format!("P5\n{n} {n}\n65535\n").into_bytes();
    for i in (0..n).rev() {
        for &v in &g.data()[i * n..(i + 1) * n] {
            let level = if span > 0.0 {
                ((v - lo) / span * 65535.0).round() as u16
            } else {
                0
            };
            out.extend_from_slice(&level.to_be_bytes());
        }
    }
    out
}

pub fn save_grid(g: &Grid2D, path: &Path, format: GridFormat) -> Result<()> {
    let bytes = match format {
        GridFormat::Csv => grid_to_csv(g).into_bytes(),
        GridFormat::RsgBinary => grid_to_rsg(g),
        GridFormat::Pgm => grid_to_pgm(g),
    };
    write_file(path, &bytes)
}

pub fn load_grid(path: &Path, format: GridFormat) -> Result<Grid2D> {
    let bytes = read_file(path)?;
    match format {
        GridFormat::Csv => {
            let text = String::from_utf8(bytes).map_err(|e| {
                parse_err(Location::Offset(e.utf8_error().valid_up_to()), "not UTF-8")
            })?;
            grid_from_csv(&text)
        }
        GridFormat::RsgBinary => grid_from_rsg(&bytes),
        GridFormat::Pgm => Err(Error::InvalidArgument(
            "PGM is an output-only format".into(),
        )),
    }
}

pub fn grid3_to_bytes(g: &Grid3D) -> Vec<u8> {
    let mut out = Vec::with_capacity(16 + 8 * g.data().len());
    out.extend_from_slice(b"RSG3");
    out.extend_from_slice(&(g.n() as u32).to_le_bytes());
    out.extend_from_slice(&g.half_width().to_le_bytes());
    for v in g.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn grid3_from_bytes(bytes: &[u8]) -> Result<Grid3D> {
    let mut r = Reader::new(bytes);
    r.magic(b"RSG3")?;
    let n = r.u32()?;
    let half_width = r.f64()?;
    let data = r.f64s(n * n * n)?;
    r.finish()?;
    Grid3D::new(n, half_width, data)
}

pub fn save_grid3(g: &Grid3D, path: &Path) -> Result<()> {
    write_file(path, &grid3_to_bytes(g))
}

pub fn load_grid3(path: &Path) -> Result<Grid3D> {
    grid3_from_bytes(&read_file(path)?)
}

// ---------------------------------------------------------------------------
// Sinograms

pub fn sinogram_to_bytes(sino: &Sinogram2D) -> Vec<u8> {
    let n = sino.n();
    let mut out = Vec::with_capacity(8 + 32 * (2 * n - 1) * n);
    out.extend_from_slice(b"RSS1");
    out.extend_from_slice(&(n as u32).to_le_bytes());
    for q in sino.quadrants() {
        for v in q.to_row_major() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn sinogram_from_bytes(bytes: &[u8]) -> Result<Sinogram2D> {
    let mut r = Reader::new(bytes);
    r.magic(b"RSS1")?;
    let n = r.u32()?;
    if n == 0 {
        return Err(parse_err(Location::Offset(4), "n must be positive"));
    }
    let mut quads = Vec::with_capacity(4);
    for q in Quadrant::ALL {
        let block = r.f64s((2 * n - 1) * n)?;
        quads.push(Quadrant2D::from_row_major(n, q, &block)?);
    }
    r.finish()?;
    Sinogram2D::new(quads.try_into().expect("four quadrants"))
}

pub fn sinogram_to_csv(sino: &Sinogram2D) -> String {
    let n = sino.n();
    let mut out = format!("# n={n}\n");
    for q in sino.quadrants() {
        out.push_str(&format!("# quadrant={}\n", q.label()));
        let rm = q.to_row_major();
        for row in rm.chunks(n) {
            write_row(&mut out, row);
        }
    }
    out
}

pub fn sinogram_from_csv(text: &str) -> Result<Sinogram2D> {
    let mut blocks: Vec<(Quadrant, usize, Vec<f64>)> = Vec::new();
    let mut width: Option<usize> = None;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('#') {
            if let Some(n) = header_value::<usize>(line, "n", lineno)? {
                width = Some(n);
            }
            if let Some(q) = header_value::<char>(line, "quadrant", lineno)? {
                let q = Quadrant::from_char(q).ok_or_else(|| {
                    parse_err(Location::Line(lineno), format!("unknown quadrant {q:?}"))
                })?;
                blocks.push((q, lineno, Vec::new()));
            }
            continue;
        }
        let row = parse_row(line, lineno, width)?;
        width.get_or_insert(row.len());
        match blocks.last_mut() {
            Some(b) => b.2.extend(row),
            None => {
                return Err(parse_err(
                    Location::Line(lineno),
                    "data before any quadrant header",
                ))
            }
        }
    }
    let n = width.ok_or_else(|| parse_err(Location::Line(1), "no data rows"))?;
    if blocks.len() != 4 {
        return Err(parse_err(
            Location::Line(text.lines().count()),
            format!("found {} quadrants, expected 4", blocks.len()),
        ));
    }
    let mut quads = Vec::with_capacity(4);
    for ((q, lineno, data), want) in blocks.into_iter().zip(Quadrant::ALL) {
        if q != want {
            return Err(parse_err(
                Location::Line(lineno),
                format!("quadrant {q} out of order, expected {want}"),
            ));
        }
        if data.len() != (2 * n - 1) * n {
            return Err(parse_err(
                Location::Line(lineno),
                format!(
                    "quadrant {q} has {} rows, expected {}",
                    data.len() / n,
                    2 * n - 1
                ),
            ));
        }
        quads.push(Quadrant2D::from_row_major(n, q, &data)?);
    }
    Sinogram2D::new(quads.try_into().expect("four quadrants"))
}

pub fn save_sinogram(sino: &Sinogram2D, path: &Path, format: SinogramFormat) -> Result<()> {
    match format {
        SinogramFormat::Binary => write_file(path, &sinogram_to_bytes(sino)),
        SinogramFormat::Csv => write_file(path, sinogram_to_csv(sino).as_bytes()),
    }
}

pub fn load_sinogram(path: &Path, format: SinogramFormat) -> Result<Sinogram2D> {
    let bytes = read_file(path)?;
    match format {
        SinogramFormat::Binary => sinogram_from_bytes(&bytes),
        SinogramFormat::Csv => {
            let text = String::from_utf8(bytes).map_err(|e| {
                parse_err(Location::Offset(e.utf8_error().valid_up_to()), "not UTF-8")
            })?;
            sinogram_from_csv(&text)
        }
    }
}

pub fn sinogram3_to_bytes(sino: &Sinogram3D) -> Vec<u8> {
    let n = sino.n();
    let mut out = Vec::with_capacity(8 + 128 * (3 * n - 2) * n * n);
    out.extend_from_slice(b"RS31");
    out.extend_from_slice(&(n as u32).to_le_bytes());
    for h in sino.hexadecants() {
        for v in h.to_row_major() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn sinogram3_from_bytes(bytes: &[u8]) -> Result<Sinogram3D> {
    let mut r = Reader::new(bytes);
    r.magic(b"RS31")?;
    let n = r.u32()?;
    if n == 0 {
        return Err(parse_err(Location::Offset(4), "n must be positive"));
    }
    let mut hexes = Vec::with_capacity(16);
    for label in Hexadecant::all() {
        let block = r.f64s((3 * n - 2) * n * n)?;
        hexes.push(Hexadecant3D::from_row_major(n, label, &block)?);
    }
    r.finish()?;
    Sinogram3D::new(hexes)
}

pub fn save_sinogram3(sino: &Sinogram3D, path: &Path) -> Result<()> {
    write_file(path, &sinogram3_to_bytes(sino))
}

pub fn load_sinogram3(path: &Path) -> Result<Sinogram3D> {
    sinogram3_from_bytes(&read_file(path)?)
}

/// Writes rows of a CSV table with a header line.
pub fn write_csv_table<W: Write>(
    mut w: W,
    header: &[&str],
    rows: &[Vec<String>],
) -> std::io::Result<()> {
    writeln!(w, "{}", header.join(","))?;
    for row in rows {
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
