//! Output formats: CSV time series with a config echo, and binary snapshots.

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::evolve::State;
use crate::grid::{Field, Grid, Shape, Symmetry};

/// Magic string opening every snapshot.
pub const SNAPSHOT_MAGIC: &str = "HYPW1";
/// Length of the ASCII snapshot header in bytes.
pub const SNAPSHOT_HEADER_LEN: usize = 64;

/// Floats with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// The rendered config as `# `-prefixed lines.
pub fn config_echo(cfg: &RunConfig) -> String {
    cfg.render().lines().map(|l| format!("# {l}\n")).collect()
}

/// Column-named numeric table written as CSV.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CsvTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn new(columns: Vec<String>) -> Self {
        Self { columns, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Shape {
                expected: self.columns.len(),
                got: row.len(),
            });
        }
        self.rows.push(row);
        Ok(())
    }

    /// `comments` lines (each prefixed `# `) followed by the header row and data.
    pub fn render(&self, comments: &str) -> String {
        let mut s = String::from(comments);
        s.push_str(&self.columns.join(","));
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| fmt_f64(v)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: &Path, comments: &str) -> Result<()> {
        fs::write(path, self.render(comments))?;
        Ok(())
    }

    /// Reads a table written by [`CsvTable::render`], skipping `#` lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.starts_with('#') && !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            msg: "missing header row".into(),
        })?;
        let mut t = Self::new(header.split(',').map(str::to_string).collect());
        for (no, line) in lines {
            let row = line
                .split(',')
                .map(|c| {
                    c.trim().parse::<f64>().map_err(|_| Error::Parse {
                        line: no + 1,
                        msg: format!("invalid number '{c}'"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            t.push(row).map_err(|e| Error::Parse {
                line: no + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(t)
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.columns.iter().position(|n| n == name)?;
        Some(self.rows.iter().map(|r| r[c]).collect())
    }
}

/// Header of a snapshot file.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SnapshotHeader {
    pub n: usize,
    pub symmetry: Symmetry,
    pub shape: Shape,
    pub time: f64,
}

impl SnapshotHeader {
    pub fn for_grid(grid: &Grid, time: f64) -> Self {
        Self {
            n: grid.n(),
            symmetry: grid.symmetry(),
            shape: grid.shape(),
            time,
        }
    }

    fn encode(&self) -> Result<[u8; SNAPSHOT_HEADER_LEN]> {
        let mut s = String::new();
        let _ = write!(
            s,
            "{SNAPSHOT_MAGIC} {} {} {} {} {} {}",
            self.n,
            self.symmetry,
            self.shape.nr,
            self.shape.ntheta,
            self.shape.nphi,
            fmt_f64(self.time)
        );
        if s.len() >= SNAPSHOT_HEADER_LEN {
            return Err(Error::config(format!("snapshot header '{s}' exceeds {SNAPSHOT_HEADER_LEN} bytes")));
        }
        let mut out = [b' '; SNAPSHOT_HEADER_LEN];
        out[..s.len()].copy_from_slice(s.as_bytes());
        out[SNAPSHOT_HEADER_LEN - 1] = b'\n';
        Ok(out)
    }

    fn decode(bytes: &[u8]) -> Result<Self> {
        let bad = |msg: String| Error::Parse { line: 1, msg };
        let text = std::str::from_utf8(bytes).map_err(|_| bad("snapshot header is not ASCII".into()))?;
        let parts: Vec<&str> = text.split_whitespace().collect();
        if parts.len() != 7 || parts[0] != SNAPSHOT_MAGIC {
            return Err(bad(format!("not a {SNAPSHOT_MAGIC} snapshot header: '{}'", text.trim_end())));
        }
        let num = |i: usize| parts[i].parse::<usize>().map_err(|_| bad(format!("invalid header field '{}'", parts[i])));
        Ok(Self {
            n: num(1)?,
            symmetry: parts[2].parse().map_err(|e: Error| bad(e.to_string()))?,
            shape: Shape {
                nr: num(3)?,
                ntheta: num(4)?,
                nphi: num(5)?,
            },
            time: parts[6].parse().map_err(|_| bad(format!("invalid time '{}'", parts[6])))?,
        })
    }
}

/// Header, then `Phi~` and `Pi~` as little-endian `f64` in `(i, j, k)` order.
pub fn encode_snapshot(grid: &Grid, state: &State) -> Result<Vec<u8>> {
    let shape = grid.shape();
    for f in [&state.phi, &state.pi] {
        if f.shape() != shape {
            return Err(Error::Shape {
                expected: shape.len(),
                got: f.shape().len(),
            });
        }
    }
    let mut out = Vec::with_capacity(SNAPSHOT_HEADER_LEN + 16 * shape.len());
    out.extend_from_slice(&SnapshotHeader::for_grid(grid, state.time).encode()?);
    for v in state.phi.as_slice().iter().chain(state.pi.as_slice()) {
        out.extend_from_slice(&v.to_le_bytes());
    }
    Ok(out)
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<(SnapshotHeader, State)> {
    if bytes.len() < SNAPSHOT_HEADER_LEN {
        return Err(Error::Shape {
            expected: SNAPSHOT_HEADER_LEN,
            got: bytes.len(),
        });
    }
    let header = SnapshotHeader::decode(&bytes[..SNAPSHOT_HEADER_LEN])?;
    let len = header.shape.len();
    let body = &bytes[SNAPSHOT_HEADER_LEN..];
    if body.len() != 16 * len {
        return Err(Error::Shape {
            expected: 2 * len,
            got: body.len() / 8,
        });
    }
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let (phi, pi) = values.split_at(len);
    let state = State {
        phi: Field::from_vec(header.shape, phi.to_vec())?,
        pi: Field::from_vec(header.shape, pi.to_vec())?,
        time: header.time,
    };
    Ok((header, state))
}

pub fn write_snapshot(path: &Path, grid: &Grid, state: &State) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(&encode_snapshot(grid, state)?)?;
    Ok(())
}

pub fn read_snapshot(path: &Path) -> Result<(SnapshotHeader, State)> {
    decode_snapshot(&fs::read(path)?)
}
