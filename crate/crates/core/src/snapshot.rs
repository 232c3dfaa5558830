//! Binary field snapshots.
//!
//! A text header
//!
//! ```text
//! GAUGEFLOW v1
//! m=<int>
//! N=<int>
//! k=<int>
//! degree=<int>
//! group=1          (gauge fields only)
//!
//! ```
//!
//! is followed by little-endian `f64` pairs `(re, im)` in storage order:
//! sites row-major, multi-indices lexicographic, matrix entries row-major.

use std::fs;
use std::path::Path;

use num_complex::Complex64 as C64;

use crate::connection::{Connection, GaugeField};
use crate::error::{GaugeError, Result};
use crate::forms::FormField;
use crate::grid::GridSpec;
use crate::multiindex::binomial;

pub const MAGIC: &str = "GAUGEFLOW v1";

/// Decoded contents of a snapshot file.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub grid: GridSpec,
    pub degree: usize,
    pub group: bool,
    pub data: Vec<C64>,
}

fn err(msg: String) -> GaugeError {
    GaugeError::Snapshot(msg)
}

/// Smallest admissible functional order for dimension `m`; snapshots do not
/// record it.
fn default_order(m: usize) -> usize {
    m.div_ceil(2).max(2)
}

impl Snapshot {
    pub fn from_form(f: &FormField) -> Self {
        Self { grid: *f.grid(), degree: f.degree(), group: false, data: f.data().to_vec() }
    }

    pub fn from_gauge(u: &GaugeField) -> Self {
        Self { grid: *u.grid(), degree: 0, group: true, data: u.data().to_vec() }
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut header = format!(
            "{MAGIC}\nm={}\nN={}\nk={}\ndegree={}\n",
            self.grid.m(),
            self.grid.n_points(),
            self.grid.k(),
            self.degree
        );
        if self.group {
            header.push_str("group=1\n");
        }
        header.push('\n');
        let mut out = header.into_bytes();
        out.reserve(self.data.len() * 16);
        for z in &self.data {
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        let mut offset = 0;
        let next_line = |offset: &mut usize| -> Result<(usize, String)> {
            let start = *offset;
            let rel = bytes[start..]
                .iter()
                .position(|&b| b == b'\n')
                .ok_or_else(|| err(format!("unterminated header line at byte offset {start}")))?;
            *offset = start + rel + 1;
            let line = std::str::from_utf8(&bytes[start..start + rel])
                .map_err(|_| err(format!("header line at byte offset {start} is not UTF-8")))?;
            Ok((start, line.to_string()))
        };
        let (at, magic) = next_line(&mut offset)?;
        if magic != MAGIC {
            return Err(err(format!("bad magic {magic:?} at byte offset {at}, expected {MAGIC:?}")));
        }
        let (mut m, mut n, mut k, mut degree, mut group) = (None, None, None, None, false);
        loop {
            let (at, line) = next_line(&mut offset)?;
            if line.is_empty() {
                break;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("malformed header line {line:?} at byte offset {at}")))?;
            let parsed: usize = value
                .parse()
                .map_err(|_| err(format!("non-integer value {value:?} for {key} at byte offset {at}")))?;
            match key {
                "m" => m = Some(parsed),
                "N" => n = Some(parsed),
                "k" => k = Some(parsed),
                "degree" => degree = Some(parsed),
                "group" => group = parsed == 1,
                _ => return Err(err(format!("unknown header key {key:?} at byte offset {at}"))),
            }
        }
        let missing = |name: &str| err(format!("header is missing {name}"));
        let m = m.ok_or_else(|| missing("m"))?;
        let n = n.ok_or_else(|| missing("N"))?;
        let k = k.ok_or_else(|| missing("k"))?;
        let degree = degree.ok_or_else(|| missing("degree"))?;
        let grid = GridSpec::new(m, n, k, default_order(m)).map_err(|e| err(format!("bad header: {e}")))?;
        if degree > m {
            return Err(err(format!("degree {degree} exceeds dimension {m}")));
        }
        if group && degree != 0 {
            return Err(err("gauge field snapshot must have degree 0".into()));
        }
        let count = grid.num_sites() * binomial(m, degree) * grid.block();
        let body = &bytes[offset..];
        let expected = count * 16;
        if body.len() < expected {
            let whole = body.len() / 16;
            return Err(err(format!(
                "truncated body: value {whole} of {count} is incomplete at byte offset {}",
                offset + whole * 16
            )));
        }
        if body.len() > expected {
            return Err(err(format!("{} trailing bytes at byte offset {}", body.len() - expected, offset + expected)));
        }
        let data = body
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
                let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
                C64::new(re, im)
            })
            .collect();
        Ok(Self { grid, degree, group, data })
    }

    pub fn into_form(self) -> Result<FormField> {
        if self.group {
            return Err(err("snapshot holds a gauge field, not a form".into()));
        }
        FormField::from_data(self.grid, self.degree, self.data)
    }

    pub fn into_connection(self) -> Result<Connection> {
        if self.degree != 1 {
            return Err(err(format!("connection snapshot must have degree 1, found {}", self.degree)));
        }
        Connection::new(self.into_form()?)
    }

    pub fn into_gauge(self) -> Result<GaugeField> {
        if !self.group {
            return Err(err("snapshot lacks the group=1 flag".into()));
        }
        GaugeField::from_data(self.grid, self.data)
    }
}

pub fn read(path: &Path) -> Result<Snapshot> {
    let bytes = fs::read(path)?;
    Snapshot::decode(&bytes).map_err(|e| match e {
        GaugeError::Snapshot(msg) => err(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn write_form(path: &Path, f: &FormField) -> Result<()> {
    Ok(fs::write(path, Snapshot::from_form(f).encode())?)
}

pub fn read_form(path: &Path) -> Result<FormField> {
    read(path)?.into_form()
}

pub fn read_connection(path: &Path) -> Result<Connection> {
    read(path)?.into_connection()
}

pub fn write_gauge(path: &Path, u: &GaugeField) -> Result<()> {
    Ok(fs::write(path, Snapshot::from_gauge(u).encode())?)
}

pub fn read_gauge(path: &Path) -> Result<GaugeField> {
    read(path)?.into_gauge()
}
