//! Binary field snapshots, state sidecars, CSV tables and JSON reports.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use mhd25_core::diagnostics::DiagnosticSeries;
use mhd25_core::state::{MhdState, Params};
use mhd25_core::symbol::SymbolSpectrum;
use mhd25_core::{Grid, SpectralField};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::{CliError, Result};

pub const FIELD_MAGIC: &[u8; 8] = b"MHD25FLD";
const HEADER_LEN: usize = 16;

/// Encodes `fields` (each `n * n`, row-major) in the snapshot layout.
pub fn encode_fields(n: usize, fields: &[&[f64]]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + fields.len() * n * n * 8);
    out.extend_from_slice(FIELD_MAGIC);
    out.extend_from_slice(&(n as u32).to_le_bytes());
    out.extend_from_slice(&(fields.len() as u32).to_le_bytes());
    for f in fields {
        assert_eq!(f.len(), n * n, "field length must be n^2");
        for v in f.iter() {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn decode_fields(bytes: &[u8]) -> std::result::Result<(usize, Vec<Vec<f64>>), String> {
    if bytes.len() < HEADER_LEN || &bytes[..8] != FIELD_MAGIC {
        return Err("not a field snapshot (bad magic)".into());
    }
    let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let (n, count) = (word(8), word(12));
    let want = n
        .checked_mul(n)
        .and_then(|m| m.checked_mul(count))
        .and_then(|m| m.checked_mul(8))
        .and_then(|m| m.checked_add(HEADER_LEN))
        .ok_or("header sizes overflow")?;
    if bytes.len() != want {
        return Err(format!("expected {want} bytes for n = {n}, count = {count}, found {}", bytes.len()));
    }
    let fields = bytes[HEADER_LEN..]
        .chunks_exact(n * n * 8)
        .map(|chunk| {
            chunk
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect()
        })
        .collect();
    Ok((n, fields))
}

pub fn write_fields(path: &Path, n: usize, fields: &[&[f64]]) -> Result<()> {
    std::fs::write(path, encode_fields(n, fields)).map_err(CliError::io(path))
}

pub fn read_fields(path: &Path) -> Result<(usize, Vec<Vec<f64>>)> {
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|f| BufReader::new(f).read_to_end(&mut bytes))
        .map_err(CliError::io(path))?;
    decode_fields(&bytes).map_err(|m| CliError::format(path, m))
}

/// JSON written next to a state's `.fld` file.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateSidecar {
    pub time: f64,
    pub params: Params,
    pub box_length: f64,
}

pub fn sidecar_path(fld: &Path) -> PathBuf {
    fld.with_extension("json")
}

/// Writes `(a, u1, u2, theta, b)` to `path` and the sidecar beside it.
pub fn write_state(path: &Path, state: &MhdState, params: &Params) -> Result<()> {
    let fields = state.fields().map(|f| f.values());
    write_fields(path, state.grid().n(), &fields)?;
    let sidecar = StateSidecar {
        time: state.time,
        params: *params,
        box_length: state.grid().box_length(),
    };
    write_json(&sidecar_path(path), &sidecar)
}

pub fn read_state(path: &Path) -> Result<(MhdState, Params)> {
    let (n, fields) = read_fields(path)?;
    let side: StateSidecar = read_json(&sidecar_path(path))?;
    let fields: [Vec<f64>; 5] = fields
        .try_into()
        .map_err(|v: Vec<Vec<f64>>| CliError::format(path, format!("a state holds 5 fields, found {}", v.len())))?;
    let grid = Grid::new(n, side.box_length)?;
    let fields = fields.map(|v| SpectralField::from_values(&grid, v));
    let [a, u1, u2, t, b] = fields;
    let state = MhdState::new(a?, [u1?, u2?], t?, b?, side.time)?;
    Ok((state, side.params))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).map_err(CliError::io(path))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::format(path, e.to_string()))
}

/// Shortest round-trip text for a float.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:e}")
}

/// A CSV table of floats read back by column name.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.headers.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn write<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.headers)?;
        for r in &self.rows {
            out.write_record(r.iter().map(|v| fmt_f64(*v)))?;
        }
        out.flush().map_err(|e| CliError::Csv(e.into()))?;
        Ok(())
    }

    pub fn read<R: Read>(r: R) -> std::result::Result<Self, String> {
        let mut input = csv::Reader::from_reader(r);
        let headers: Vec<String> = input
            .headers()
            .map_err(|e| e.to_string())?
            .iter()
            .map(str::to_owned)
            .collect();
        let mut rows = Vec::new();
        for (line, rec) in input.records().enumerate() {
            let rec = rec.map_err(|e| e.to_string())?;
            let row = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| format!("row {}: {e}", line + 1))?;
            rows.push(row);
        }
        Ok(Self { headers, rows })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = File::create(path).map_err(CliError::io(path))?;
        self.write(BufWriter::new(f))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(CliError::io(path))?;
        Self::read(BufReader::new(f)).map_err(|m| CliError::format(path, m))
    }
}

pub fn eigen_table(sweep: &[SymbolSpectrum]) -> Table {
    let headers = ["r", "re1", "im1", "re2", "im2", "re3", "im3", "abscissa"];
    let rows = sweep
        .iter()
        .map(|s| {
            let e = s.eigenvalues;
            vec![s.r, e[0].re, e[0].im, e[1].re, e[1].im, e[2].re, e[2].im, s.abscissa()]
        })
        .collect();
    Table {
        headers: headers.iter().map(|h| h.to_string()).collect(),
        rows,
    }
}

/// Leading columns in their fixed order; extras follow.
pub const DIAGNOSTIC_EXTRAS: [&str; 3] = ["X", "max_abs_a", "lowest_shell_fraction"];

pub fn diagnostics_table(series: &DiagnosticSeries) -> Table {
    let mut headers: Vec<String> = ["t", "E", "D", "X0_ref", "Y_sigma"].map(String::from).to_vec();
    headers.extend((0..series.gammas.len()).map(|i| format!("lam_gamma_norm[{i}]")));
    headers.extend(["mass_a", "mass_b", "total_energy", "lyapunov_value"].map(String::from));
    headers.extend(DIAGNOSTIC_EXTRAS.map(String::from));
    let cols: Vec<Vec<f64>> = headers
        .iter()
        .map(|h| series.column(h).expect("every header is a series column"))
        .collect();
    let rows = (0..series.records.len())
        .map(|i| cols.iter().map(|c| c[i]).collect())
        .collect();
    Table { headers, rows }
}

/// `(t, value)` pairs as a two-column table.
pub fn pairs_table(names: [&str; 2], pairs: &[(f64, f64)]) -> Table {
    Table {
        headers: names.map(String::from).to_vec(),
        rows: pairs.iter().map(|&(a, b)| vec![a, b]).collect(),
    }
}
