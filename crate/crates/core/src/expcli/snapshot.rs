//! Binary state snapshots.
//!
//! Layout (little-endian):
//!
//! | bytes | content |
//! |---|---|
//! | 4 | magic `ANLQ` |
//! | 2 | format version (u16) |
//! | 12 | grid dims `n₁ n₂ n₃` (u32) |
//! | 8 | box length (f64) |
//! | 1 | dealias rule code |
//! | 64 | `a b c c_star kappa lambda mu gamma` (f64) |
//! | 8 | time `t` (f64) |
//! | 4 | CRC-32 of the bytes above |
//! | 16·8·n³ | `Q̂` then `û`, component-major, `re im` interleaved (f64) |
//! | 4 | CRC-32 of the payload |

use std::io::{Read, Write};
use std::path::Path;

use rustfft::num_complex::Complex64;
use thiserror::Error;

use crate::grid::{DealiasRule, GridSpec, SpectralField, SpectralState};
use crate::qtensor::PhysParams;

pub const MAGIC: &[u8; 4] = b"ANLQ";
pub const FORMAT_VERSION: u16 = 1;
const HEADER_LEN: usize = 4 + 2 + 12 + 8 + 1 + 64 + 8;

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("not a snapshot file (bad magic)")]
    BadMagic,

    #[error("snapshot format version {found} is not supported (expected {expected})")]
    Version { found: u16, expected: u16 },

    #[error("snapshot checksum failure: {0}")]
    Checksum(String),

    #[error("invalid snapshot contents: {0}")]
    Invalid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn encode_header(state: &SpectralState, p: &PhysParams) -> Vec<u8> {
    let g = &state.grid;
    let mut h = Vec::with_capacity(HEADER_LEN + 4);
    h.extend_from_slice(MAGIC);
    h.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    for _ in 0..3 {
        h.extend_from_slice(&(g.n as u32).to_le_bytes());
    }
    h.extend_from_slice(&g.box_length.to_le_bytes());
    h.push(g.dealias.code());
    for v in [p.a, p.b, p.c, p.c_star, p.kappa, p.lambda, p.mu, p.gamma, state.t] {
        h.extend_from_slice(&v.to_le_bytes());
    }
    h
}

/// Serialize `state` and its parameters.
pub fn encode_snapshot(state: &SpectralState, p: &PhysParams) -> Vec<u8> {
    let mut out = encode_header(state, p);
    let hcrc = crc32fast::hash(&out);
    out.extend_from_slice(&hcrc.to_le_bytes());
    let start = out.len();
    for v in state.qhat.data().iter().chain(state.uhat.data()) {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    let pcrc = crc32fast::hash(&out[start..]);
    out.extend_from_slice(&pcrc.to_le_bytes());
    out
}

fn f64_at(b: &[u8], off: usize) -> f64 {
    f64::from_le_bytes(b[off..off + 8].try_into().expect("8 bytes"))
}

fn u32_at(b: &[u8], off: usize) -> u32 {
    u32::from_le_bytes(b[off..off + 4].try_into().expect("4 bytes"))
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<(SpectralState, PhysParams), SnapshotError> {
    if bytes.len() < 6 || &bytes[..4] != MAGIC {
        return Err(SnapshotError::BadMagic);
    }
    let version = u16::from_le_bytes([bytes[4], bytes[5]]);
    if version != FORMAT_VERSION {
        return Err(SnapshotError::Version { found: version, expected: FORMAT_VERSION });
    }
    if bytes.len() < HEADER_LEN + 4 {
        return Err(SnapshotError::Checksum(format!("truncated header ({} bytes)", bytes.len())));
    }
    if crc32fast::hash(&bytes[..HEADER_LEN]) != u32_at(bytes, HEADER_LEN) {
        return Err(SnapshotError::Checksum("header CRC mismatch".into()));
    }
    let dims = [u32_at(bytes, 6), u32_at(bytes, 10), u32_at(bytes, 14)];
    if dims[0] != dims[1] || dims[1] != dims[2] {
        return Err(SnapshotError::Invalid(format!("non-cubic grid {dims:?}")));
    }
    let n = dims[0] as usize;
    let rule = DealiasRule::from_code(bytes[26]).ok_or_else(|| SnapshotError::Invalid(format!("dealias code {}", bytes[26])))?;
    let grid = GridSpec::new(n, f64_at(bytes, 18), rule).map_err(|e| SnapshotError::Invalid(e.to_string()))?;
    let v: Vec<f64> = (0..9).map(|i| f64_at(bytes, 27 + 8 * i)).collect();
    let params = PhysParams { a: v[0], b: v[1], c: v[2], c_star: v[3], kappa: v[4], lambda: v[5], mu: v[6], gamma: v[7] };
    let t = v[8];

    let start = HEADER_LEN + 4;
    let ncoef = 8 * n * n * n;
    let payload_len = 16 * ncoef;
    if bytes.len() != start + payload_len + 4 {
        return Err(SnapshotError::Checksum(format!(
            "payload length {} does not match the header (expected {})",
            bytes.len().saturating_sub(start + 4),
            payload_len
        )));
    }
    let payload = &bytes[start..start + payload_len];
    if crc32fast::hash(payload) != u32_at(bytes, start + payload_len) {
        return Err(SnapshotError::Checksum("payload CRC mismatch".into()));
    }
    let coefs: Vec<Complex64> =
        payload.chunks_exact(16).map(|c| Complex64::new(f64_at(c, 0), f64_at(c, 8))).collect();
    let split = 5 * n * n * n;
    let qhat = SpectralField::from_vec(n, 5, coefs[..split].to_vec()).map_err(|e| SnapshotError::Invalid(e.to_string()))?;
    let uhat = SpectralField::from_vec(n, 3, coefs[split..].to_vec()).map_err(|e| SnapshotError::Invalid(e.to_string()))?;
    Ok((SpectralState { grid, qhat, uhat, t }, params))
}

pub fn save_snapshot(state: &SpectralState, p: &PhysParams, path: &Path) -> Result<(), SnapshotError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    f.write_all(&encode_snapshot(state, p))?;
    f.flush()?;
    Ok(())
}

pub fn load_snapshot(path: &Path) -> Result<(SpectralState, PhysParams), SnapshotError> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    decode_snapshot(&bytes)
}
