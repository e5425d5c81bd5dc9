//! HMIO container for channel realizations, plus a JSON sidecar.
//!
//! Layout: `b"HMIO"`, u16 version, u32 rows, u32 cols, then `rows·cols`
//! entries in row-major order as little-endian `(re, im)` f64 pairs.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use faer::{c64, Mat};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::angular::AngularSpectrum;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"HMIO";
pub const VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 4 + 4;

pub fn encode_hmio(m: &Mat<c64>) -> Result<Vec<u8>> {
    let rows =
        u32::try_from(m.nrows()).map_err(|_| Error::Contract("too many rows for HMIO".into()))?;
    let cols = u32::try_from(m.ncols())
        .map_err(|_| Error::Contract("too many columns for HMIO".into()))?;
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * m.nrows() * m.ncols());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let z = m[(i, j)];
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_hmio(bytes: &[u8]) -> Result<Mat<c64>> {
    let bad = |reason: String| Error::parse("hmio", reason);
    if bytes.len() < HEADER_LEN || &bytes[..4] != MAGIC {
        return Err(bad("missing HMIO header".into()));
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != VERSION {
        return Err(bad(format!("unsupported version {version}")));
    }
    let word = |k: usize| u32::from_le_bytes(bytes[k..k + 4].try_into().unwrap()) as usize;
    let (rows, cols) = (word(6), word(10));
    let expected = rows
        .checked_mul(cols)
        .and_then(|n| n.checked_mul(16))
        .and_then(|n| n.checked_add(HEADER_LEN));
    if expected != Some(bytes.len()) {
        return Err(bad(format!(
            "{rows}×{cols} payload does not match {} bytes",
            bytes.len()
        )));
    }
    let f = |k: usize| f64::from_le_bytes(bytes[k..k + 8].try_into().unwrap());
    Ok(Mat::from_fn(rows, cols, |i, j| {
        let k = HEADER_LEN + 16 * (i * cols + j);
        c64::new(f(k), f(k + 8))
    }))
}

pub fn write_hmio(path: &Path, m: &Mat<c64>) -> Result<()> {
    let bytes = encode_hmio(m)?;
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&bytes).map_err(|e| Error::io(path, e))
}

pub fn read_hmio(path: &Path) -> Result<Mat<c64>> {
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode_hmio(&bytes)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Checksum of the variances as little-endian f64 bytes.
pub fn spectrum_checksum(s: &AngularSpectrum) -> String {
    let bytes: Vec<u8> = s.variances().iter().flat_map(|v| v.to_le_bytes()).collect();
    sha256_hex(&bytes)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format: String,
    pub version: u16,
    /// `angular` (H_a) or `spatial` (H).
    pub domain: String,
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
    pub config: serde_json::Value,
    pub rx_spectrum_sha256: String,
    pub tx_spectrum_sha256: String,
    pub data_sha256: String,
}

pub fn sidecar_path(data_path: &Path) -> PathBuf {
    let mut name = data_path.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

/// Writes `path` and `path.json`.
pub fn export_realization(
    path: &Path,
    m: &Mat<c64>,
    domain: &str,
    seed: u64,
    config: serde_json::Value,
    rx: &AngularSpectrum,
    tx: &AngularSpectrum,
) -> Result<Sidecar> {
    let bytes = encode_hmio(m)?;
    fs::write(path, &bytes).map_err(|e| Error::io(path, e))?;
    let sidecar = Sidecar {
        format: "HMIO".into(),
        version: VERSION,
        domain: domain.into(),
        rows: m.nrows(),
        cols: m.ncols(),
        seed,
        config,
        rx_spectrum_sha256: spectrum_checksum(rx),
        tx_spectrum_sha256: spectrum_checksum(tx),
        data_sha256: sha256_hex(&bytes),
    };
    let side = sidecar_path(path);
    let text = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
    fs::write(&side, text + "\n").map_err(|e| Error::io(&side, e))?;
    Ok(sidecar)
}
