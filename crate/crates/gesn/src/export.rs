//! Serialization of embeddings and readouts.
//!
//! Embeddings export to a flat binary file — a 16-byte header (8-byte magic
//! `GESNEMB1`, little-endian u32 node count, little-endian u32 hidden width)
//! followed by row-major little-endian f64 states — and to CSV for
//! inspection. Readouts round-trip through the CSV layout defined on
//! [`RidgeReadout`].

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::readout::RidgeReadout;
use crate::reservoir::Embeddings;

/// Magic bytes opening the binary embedding format.
pub const EMBEDDING_MAGIC: &[u8; 8] = b"GESNEMB1";

/// Binary embedding encoding (header + row-major little-endian doubles).
pub fn embeddings_to_bytes(embeddings: &Embeddings) -> Vec<u8> {
    let states = embeddings.states();
    let mut out = Vec::with_capacity(16 + states.data().len() * 8);
    out.extend_from_slice(EMBEDDING_MAGIC);
    out.extend_from_slice(&(states.rows() as u32).to_le_bytes());
    out.extend_from_slice(&(states.cols() as u32).to_le_bytes());
    for v in states.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Parses the binary embedding format, validating magic and length. The
/// iteration count is not part of the format; loaded embeddings report 0.
pub fn embeddings_from_bytes(bytes: &[u8]) -> Result<Embeddings> {
    if bytes.len() < 16 {
        return Err(Error::Parse(
            "embedding file shorter than its header".into(),
        ));
    }
    if &bytes[..8] != EMBEDDING_MAGIC {
        return Err(Error::Parse("bad embedding magic".into()));
    }
    let rows = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let cols = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let expected = 16 + rows * cols * 8;
    if bytes.len() != expected {
        return Err(Error::Parse(format!(
            "embedding file length {} does not match header ({expected} expected)",
            bytes.len()
        )));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for chunk in bytes[16..].chunks_exact(8) {
        data.push(f64::from_le_bytes(chunk.try_into().unwrap()));
    }
    Ok(Embeddings::new(Matrix::from_vec(rows, cols, data), 0))
}

pub fn write_embeddings_binary(
    path: impl AsRef<Path>,
    embeddings: &Embeddings,
) -> std::io::Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(&embeddings_to_bytes(embeddings))
}

pub fn read_embeddings_binary(path: impl AsRef<Path>) -> Result<Embeddings> {
    let mut bytes = Vec::new();
    fs::File::open(path.as_ref())
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::Parse(format!("{}: {e}", path.as_ref().display())))?;
    embeddings_from_bytes(&bytes)
}

/// CSV embedding dump: header `node,h0,...`, one row per node, round-trip
/// precision.
pub fn embeddings_to_csv(embeddings: &Embeddings) -> String {
    let states = embeddings.states();
    let mut out = String::from("node");
    for j in 0..states.cols() {
        out.push_str(&format!(",h{j}"));
    }
    out.push('\n');
    for i in 0..states.rows() {
        out.push_str(&i.to_string());
        for v in states.row(i) {
            out.push_str(&format!(",{v}"));
        }
        out.push('\n');
    }
    out
}

pub fn write_embeddings_csv(
    path: impl AsRef<Path>,
    embeddings: &Embeddings,
) -> std::io::Result<()> {
    fs::write(path, embeddings_to_csv(embeddings))
}

pub fn write_readout_csv(path: impl AsRef<Path>, readout: &RidgeReadout) -> std::io::Result<()> {
    fs::write(path, readout.to_csv())
}

pub fn read_readout_csv(path: impl AsRef<Path>) -> Result<RidgeReadout> {
    let text = fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Parse(format!("{}: {e}", path.as_ref().display())))?;
    RidgeReadout::from_csv(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip_is_exact() {
        let states = Matrix::from_fn(5, 3, |i, j| (i as f64 - 2.0) * 0.37 + j as f64 * 1e-9);
        let emb = Embeddings::new(states, 4);
        let bytes = embeddings_to_bytes(&emb);
        assert_eq!(&bytes[..8], EMBEDDING_MAGIC);
        assert_eq!(bytes.len(), 16 + 5 * 3 * 8);
        let back = embeddings_from_bytes(&bytes).unwrap();
        assert_eq!(back.states(), emb.states());
    }

    #[test]
    fn corrupt_headers_are_rejected() {
        let emb = Embeddings::new(Matrix::zeros(2, 2), 1);
        let mut bytes = embeddings_to_bytes(&emb);
        bytes[0] = b'X';
        assert!(embeddings_from_bytes(&bytes).is_err());
        let bytes = embeddings_to_bytes(&emb);
        assert!(embeddings_from_bytes(&bytes[..20]).is_err());
        assert!(embeddings_from_bytes(&[0u8; 3]).is_err());
    }

    #[test]
    fn csv_dump_has_one_row_per_node() {
        let emb = Embeddings::new(Matrix::from_fn(3, 2, |i, j| (i * 2 + j) as f64 / 7.0), 1);
        let csv = embeddings_to_csv(&emb);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "node,h0,h1");
        let field: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(field, 0.0);
        let field: f64 = lines[3].split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(field, 5.0 / 7.0);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let emb = Embeddings::new(Matrix::from_fn(4, 2, |i, j| (i + j) as f64 * 0.1), 2);
        let path = dir.path().join("emb.bin");
        write_embeddings_binary(&path, &emb).unwrap();
        let back = read_embeddings_binary(&path).unwrap();
        assert_eq!(back.states(), emb.states());
    }
}
