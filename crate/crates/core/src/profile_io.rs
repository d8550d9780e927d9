//! Columnar CSV profiles with a JSON side-car header.
//!
//! A profile stored under the base path `p` lives in `p.csv` and `p.json`.
//! Diagonal columns are `t, h1…hm, dh1…dhm, ddh1…ddhm, f, df, ddf`
//! (`m = n − 1`); warped columns are `t, F, dF, ddF, f, df, ddf`. Values are
//! written in shortest round-trip form, so reading back is exact.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::curvature::{DiagonalProfile, WarpedProfile};
use crate::error::{Error, Result};
use crate::flat::CoefficientConvention;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProfileKind {
    Diagonal,
    Warped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ProfileHeader {
    pub schema_version: u32,
    pub kind: ProfileKind,
    pub n: usize,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention: Option<CoefficientConvention>,
    pub provenance: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    Diagonal(DiagonalProfile),
    Warped(WarpedProfile),
}

/// `base.csv` and `base.json`, ignoring an extension already present on `base`.
pub fn profile_paths(base: &Path) -> (PathBuf, PathBuf) {
    let stem = match base.extension().and_then(|e| e.to_str()) {
        Some("csv") | Some("json") => base.with_extension(""),
        _ => base.to_path_buf(),
    };
    let mut csv = stem.clone().into_os_string();
    csv.push(".csv");
    let mut json = stem.into_os_string();
    json.push(".json");
    (csv.into(), json.into())
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn diagonal_columns(m: usize) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=m).map(|i| format!("h{i}")));
    cols.extend((1..=m).map(|i| format!("dh{i}")));
    cols.extend((1..=m).map(|i| format!("ddh{i}")));
    cols.extend(["f", "df", "ddf"].map(String::from));
    cols
}

const WARPED_COLUMNS: [&str; 7] = ["t", "F", "dF", "ddF", "f", "df", "ddf"];

pub fn encode_diagonal(profile: &DiagonalProfile) -> Result<(Vec<u8>, Vec<u8>)> {
    profile.validate()?;
    let m = profile.n - 1;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(diagonal_columns(m))?;
    for i in 0..profile.len() {
        let mut row = Vec::with_capacity(3 * m + 4);
        row.push(fmt_f64(profile.grid[i]));
        for rows in [&profile.h, &profile.h_prime, &profile.h_double_prime] {
            row.extend(rows[i].iter().map(|v| fmt_f64(*v)));
        }
        row.push(fmt_f64(profile.f[i]));
        row.push(fmt_f64(profile.f_prime[i]));
        row.push(fmt_f64(profile.f_double_prime[i]));
        w.write_record(&row)?;
    }
    let csv = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let header = ProfileHeader {
        schema_version: SCHEMA_VERSION,
        kind: ProfileKind::Diagonal,
        n: profile.n,
        lambda: profile.lambda,
        mu: None,
        convention: profile.convention,
        provenance: profile.provenance.clone(),
    };
    Ok((csv, json_bytes(&header)?))
}

pub fn encode_warped(profile: &WarpedProfile) -> Result<(Vec<u8>, Vec<u8>)> {
    profile.validate()?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(WARPED_COLUMNS)?;
    for i in 0..profile.len() {
        w.write_record([
            profile.grid[i],
            profile.warp[i],
            profile.warp_prime[i],
            profile.warp_double_prime[i],
            profile.f[i],
            profile.f_prime[i],
            profile.f_double_prime[i],
        ]
        .map(fmt_f64))?;
    }
    let csv = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    let header = ProfileHeader {
        schema_version: SCHEMA_VERSION,
        kind: ProfileKind::Warped,
        n: profile.n,
        lambda: profile.lambda,
        mu: Some(profile.mu),
        convention: None,
        provenance: profile.provenance.clone(),
    };
    Ok((csv, json_bytes(&header)?))
}

fn json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(&serde_json::to_value(value)?)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn encode(profile: &Profile) -> Result<(Vec<u8>, Vec<u8>)> {
    match profile {
        Profile::Diagonal(p) => encode_diagonal(p),
        Profile::Warped(p) => encode_warped(p),
    }
}

pub fn decode(csv_bytes: &[u8], header_bytes: &[u8]) -> Result<Profile> {
    let header: ProfileHeader = serde_json::from_slice(header_bytes)?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(Error::Profile(format!(
            "unsupported schemaVersion {}",
            header.schema_version
        )));
    }
    if header.n < 3 {
        return Err(Error::Profile(format!("n = {} in header", header.n)));
    }
    let mut reader = csv::Reader::from_reader(csv_bytes);
    let columns: Vec<String> = reader.headers()?.iter().map(String::from).collect();
    let expected: Vec<String> = match header.kind {
        ProfileKind::Diagonal => diagonal_columns(header.n - 1),
        ProfileKind::Warped => WARPED_COLUMNS.map(String::from).to_vec(),
    };
    if columns != expected {
        return Err(Error::Profile(format!(
            "CSV columns {columns:?} do not match header (expected {expected:?})"
        )));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .map(|v| {
                v.trim().parse::<f64>().map_err(|e| {
                    Error::Profile(format!("row {}: cannot parse {v:?}: {e}", line + 1))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    let col = |k: usize| rows.iter().map(|r| r[k]).collect::<Vec<f64>>();
    match header.kind {
        ProfileKind::Diagonal => {
            let m = header.n - 1;
            let block = |offset: usize| {
                rows.iter()
                    .map(|r| r[offset..offset + m].to_vec())
                    .collect::<Vec<_>>()
            };
            let profile = DiagonalProfile {
                n: header.n,
                lambda: header.lambda,
                grid: col(0),
                h: block(1),
                h_prime: block(1 + m),
                h_double_prime: block(1 + 2 * m),
                f: col(1 + 3 * m),
                f_prime: col(2 + 3 * m),
                f_double_prime: col(3 + 3 * m),
                convention: header.convention,
                provenance: header.provenance,
            };
            profile.validate()?;
            Ok(Profile::Diagonal(profile))
        }
        ProfileKind::Warped => {
            let mu = header
                .mu
                .ok_or_else(|| Error::Profile("warped profile header lacks mu".into()))?;
            let profile = WarpedProfile {
                n: header.n,
                mu,
                lambda: header.lambda,
                grid: col(0),
                warp: col(1),
                warp_prime: col(2),
                warp_double_prime: col(3),
                f: col(4),
                f_prime: col(5),
                f_double_prime: col(6),
                provenance: header.provenance,
            };
            profile.validate()?;
            Ok(Profile::Warped(profile))
        }
    }
}

pub fn read_profile(base: &Path) -> Result<Profile> {
    let (csv_path, json_path) = profile_paths(base);
    let csv = std::fs::read(&csv_path)?;
    let header = std::fs::read(&json_path)?;
    decode(&csv, &header)
}

/// Writes every `(path, bytes)` pair to a temporary sibling first and renames
/// only after all writes succeeded, so a failure leaves no partial outputs.
pub fn write_all_atomic(outputs: &[(PathBuf, Vec<u8>)]) -> Result<()> {
    use std::io::Write;

    let mut staged = Vec::with_capacity(outputs.len());
    for (path, bytes) in outputs {
        let dir = match path.parent() {
            Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
            _ => PathBuf::from("."),
        };
        let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        staged.push((tmp, path));
    }
    for (tmp, path) in staged {
        tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    }
    Ok(())
}

pub fn write_profile(base: &Path, profile: &Profile) -> Result<()> {
    let (csv_path, json_path) = profile_paths(base);
    let (csv, header) = encode(profile)?;
    write_all_atomic(&[(csv_path, csv), (json_path, header)])
}
