//! On-disk formats. Every file carries the config hash of the run that
//! produced it.
//!
//! * CSV: a `# wavegauge-csv/1 config_sha256=<hex>` line, a header row and
//!   one row per sample. Numbers use 17 significant digits; an empty field
//!   means the quantity was not available at that sample.
//! * JSON: an object with `schema`, `config_sha256` and command-specific
//!   fields.
//! * Grid files: see [`GridSnapshot`].

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde_json::{json, Value};
use wavegauge_core::evolution::{EvolutionState, PSI};
use wavegauge_core::grid::{Grid3, Symmetry};
use wavegauge_core::initdata::FullSlice;
use wavegauge_core::tensor::SYM_PAIRS;

use crate::error::{LabError, LabResult};

pub const CSV_SCHEMA: &str = "wavegauge-csv/1";
pub const JSON_SCHEMA: &str = "wavegauge-summary/1";
pub const GRID_MAGIC: &str = "wavegauge-grid 1";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn fmt_err(path: &Path, e: impl std::fmt::Display) -> LabError {
    LabError::Format {
        path: path.to_path_buf(),
        msg: e.to_string(),
    }
}

/// Column-oriented table with optional cells.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Option<f64>>) {
        assert_eq!(row.len(), self.header.len(), "row width");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let c = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[c]).collect())
    }
}

pub fn write_csv(path: &Path, table: &Table, hash: &str) -> LabResult<()> {
    let f = File::create(path).map_err(|e| LabError::io(path, e))?;
    let mut w = BufWriter::new(f);
    writeln!(w, "# {CSV_SCHEMA} config_sha256={hash}").map_err(|e| LabError::io(path, e))?;
    let mut c = csv::Writer::from_writer(w);
    c.write_record(&table.header)
        .map_err(|e| fmt_err(path, e))?;
    for row in &table.rows {
        c.write_record(row.iter().map(|v| v.map(fmt17).unwrap_or_default()))
            .map_err(|e| fmt_err(path, e))?;
    }
    c.flush().map_err(|e| LabError::io(path, e))
}

/// Returns the table and the embedded config hash.
pub fn read_csv(path: &Path) -> LabResult<(Table, String)> {
    let f = File::open(path).map_err(|e| LabError::io(path, e))?;
    let mut r = BufReader::new(f);
    let mut first = String::new();
    r.read_line(&mut first).map_err(|e| LabError::io(path, e))?;
    let hash = first
        .trim()
        .strip_prefix(&format!("# {CSV_SCHEMA} config_sha256="))
        .ok_or_else(|| fmt_err(path, "missing schema line"))?
        .to_string();
    let mut c = csv::Reader::from_reader(r);
    let header: Vec<String> = c
        .headers()
        .map_err(|e| fmt_err(path, e))?
        .iter()
        .map(String::from)
        .collect();
    let mut table = Table::new(header);
    for rec in c.records() {
        let rec = rec.map_err(|e| fmt_err(path, e))?;
        let row = rec
            .iter()
            .map(|s| {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse::<f64>().map(Some).map_err(|e| fmt_err(path, e))
                }
            })
            .collect::<LabResult<Vec<_>>>()?;
        table.push(row);
    }
    Ok((table, hash))
}

/// Adds `schema` and `config_sha256` to `body` (an object) and writes it.
pub fn write_json(path: &Path, body: Value, hash: &str) -> LabResult<()> {
    let mut obj = json!({ "schema": JSON_SCHEMA, "config_sha256": hash });
    if let (Value::Object(o), Value::Object(b)) = (&mut obj, body) {
        o.extend(b);
    }
    let text = serde_json::to_string_pretty(&obj).map_err(|e| fmt_err(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| LabError::io(path, e))
}

/// JSON number, or `null` for non-finite values.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

/// A spatial slice of the evolved fields.
///
/// Text layout:
///
/// ```text
/// wavegauge-grid 1
/// config_sha256 <hex>
/// cells <nx> <ny> <nz>
/// lo <x> <y> <z>
/// dx <dx>
/// symmetry full|octant
/// t <t>
/// mass <M>
/// epsilon <eps>
/// fields 22 g00 g01 .. g33 dtg00 .. dtg33 psi dtpsi
/// data
/// <one line per point, x fastest, 22 values>
/// ```
///
/// Metric components are listed row-major over `mu <= nu`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSnapshot {
    pub grid: Grid3,
    pub symmetry: Symmetry,
    pub t: f64,
    pub mass: f64,
    pub epsilon: f64,
    /// `NFIELDS_OUT` arrays of `grid.len()` values.
    pub fields: Vec<Vec<f64>>,
}

pub const NFIELDS_OUT: usize = 22;

pub fn field_names() -> Vec<String> {
    let mut v: Vec<String> = SYM_PAIRS.iter().map(|(a, b)| format!("g{a}{b}")).collect();
    v.extend(SYM_PAIRS.iter().map(|(a, b)| format!("dtg{a}{b}")));
    v.push("psi".into());
    v.push("dtpsi".into());
    v
}

impl GridSnapshot {
    pub fn from_slice(s: &FullSlice) -> Self {
        let mut fields: Vec<Vec<f64>> = (0..10)
            .map(|c| s.g.iter().map(|g| g.c[c]).collect())
            .collect();
        fields.extend((0..10).map(|c| s.dtg.iter().map(|g| g.c[c]).collect()));
        fields.push(s.psi.clone());
        fields.push(s.dtpsi.clone());
        Self {
            grid: s.grid,
            symmetry: s.symmetry,
            t: 0.0,
            mass: s.mass,
            epsilon: s.epsilon,
            fields,
        }
    }

    pub fn from_state(s: &EvolutionState, mass: f64, epsilon: f64) -> Self {
        let mut fields: Vec<Vec<f64>> = s.u[..PSI].to_vec();
        fields.extend(s.v[..PSI].iter().cloned());
        fields.push(s.u[PSI].clone());
        fields.push(s.v[PSI].clone());
        Self {
            grid: s.grid,
            symmetry: s.symmetry,
            t: s.t,
            mass,
            epsilon,
            fields,
        }
    }

    pub fn write(&self, path: &Path, hash: &str) -> LabResult<()> {
        let io = |e| LabError::io(path, e);
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        let g = &self.grid;
        let sym = match self.symmetry {
            Symmetry::Full => "full",
            Symmetry::Octant => "octant",
        };
        let head = format!(
            "{GRID_MAGIC}\nconfig_sha256 {hash}\ncells {} {} {}\nlo {} {} {}\ndx {}\nsymmetry {sym}\nt {}\nmass {}\nepsilon {}\nfields {NFIELDS_OUT} {}\ndata\n",
            g.n[0],
            g.n[1],
            g.n[2],
            fmt17(g.lo[0]),
            fmt17(g.lo[1]),
            fmt17(g.lo[2]),
            fmt17(g.dx),
            fmt17(self.t),
            fmt17(self.mass),
            fmt17(self.epsilon),
            field_names().join(" ")
        );
        w.write_all(head.as_bytes()).map_err(io)?;
        let mut line = String::new();
        for q in 0..g.len() {
            line.clear();
            for (k, f) in self.fields.iter().enumerate() {
                if k > 0 {
                    line.push(' ');
                }
                line.push_str(&fmt17(f[q]));
            }
            line.push('\n');
            w.write_all(line.as_bytes()).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    /// Returns the snapshot and the embedded config hash.
    pub fn read(path: &Path) -> LabResult<(Self, String)> {
        let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path, e))?;
        let bad = |m: &str| fmt_err(path, m);
        let mut lines = text.lines();
        if lines.next() != Some(GRID_MAGIC) {
            return Err(bad("not a grid file"));
        }
        let mut field = |key: &str| -> LabResult<Vec<String>> {
            let l = lines.next().ok_or_else(|| bad("truncated header"))?;
            let mut w = l.split_whitespace();
            if w.next() != Some(key) {
                return Err(fmt_err(path, format!("expected `{key}`")));
            }
            Ok(w.map(String::from).collect())
        };
        let f64s = |v: Vec<String>| -> LabResult<Vec<f64>> {
            v.iter()
                .map(|s| s.parse::<f64>().map_err(|e| fmt_err(path, e)))
                .collect()
        };
        let hash = field("config_sha256")?.join("");
        let cells: Vec<usize> = field("cells")?
            .iter()
            .map(|s| s.parse().map_err(|e| fmt_err(path, e)))
            .collect::<LabResult<_>>()?;
        let lo = f64s(field("lo")?)?;
        let dx = f64s(field("dx")?)?;
        let symmetry = match field("symmetry")?.first().map(String::as_str) {
            Some("full") => Symmetry::Full,
            Some("octant") => Symmetry::Octant,
            _ => return Err(bad("bad symmetry")),
        };
        let t = f64s(field("t")?)?;
        let mass = f64s(field("mass")?)?;
        let eps = f64s(field("epsilon")?)?;
        let names = field("fields")?;
        field("data")?;
        if cells.len() != 3 || lo.len() != 3 || dx.len() != 1 || t.len() != 1 {
            return Err(bad("malformed header"));
        }
        if names.first().map(String::as_str) != Some("22") || names[1..] != field_names()[..] {
            return Err(bad("unexpected field list"));
        }
        let grid = Grid3::new([cells[0], cells[1], cells[2]], [lo[0], lo[1], lo[2]], dx[0]);
        let mut fields: Vec<Vec<f64>> = (0..NFIELDS_OUT)
            .map(|_| Vec::with_capacity(grid.len()))
            .collect();
        let mut rows = 0;
        for l in lines {
            let v = f64s(l.split_whitespace().map(String::from).collect())?;
            if v.len() != NFIELDS_OUT {
                return Err(bad("row width"));
            }
            for (f, x) in fields.iter_mut().zip(v) {
                f.push(x);
            }
            rows += 1;
        }
        if rows != grid.len() {
            return Err(bad("row count does not match the grid"));
        }
        Ok((
            Self {
                grid,
                symmetry,
                t: t[0],
                mass: mass[0],
                epsilon: eps[0],
                fields,
            },
            hash,
        ))
    }
}
