//! Artifact writers. Every artifact carries the config hash and seed.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use overtwist_core::linalg::Csr;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactMeta {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub seed: u64,
}

impl ArtifactMeta {
    pub fn new(command: &str, config_hash: &str, seed: u64) -> Self {
        ArtifactMeta {
            tool: "overtwist".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config_hash: config_hash.into(),
            seed,
        }
    }

    pub fn header_line(&self) -> String {
        format!("{} {} config_hash={} seed={}", self.tool, self.command, self.config_hash, self.seed)
    }
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    meta: &'a ArtifactMeta,
    #[serde(flatten)]
    body: &'a T,
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

pub fn to_json<T: Serialize>(meta: &ArtifactMeta, body: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope { meta, body })?;
    s.push('\n');
    Ok(s)
}

pub fn write_json<T: Serialize>(path: &Path, meta: &ArtifactMeta, body: &T) -> Result<()> {
    write_text(path, &to_json(meta, body)?)
}

/// CSV with a leading `# ...` provenance line.
pub fn to_csv<R: Serialize>(meta: &ArtifactMeta, rows: &[R]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let body = String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?;
    Ok(format!("# {}\n{body}", meta.header_line()))
}

pub fn write_csv<R: Serialize>(path: &Path, meta: &ArtifactMeta, rows: &[R]) -> Result<()> {
    write_text(path, &to_csv(meta, rows)?)
}

/// Read a CSV written by `write_csv`, skipping the provenance line.
pub fn read_csv<R: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<R>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Matrix Market coordinate format, general real.
pub fn to_matrix_market(meta: &ArtifactMeta, name: &str, a: &Csr) -> String {
    let trip = a.triplets();
    let mut s = String::from("%%MatrixMarket matrix coordinate real general\n");
    s.push_str(&format!("% {} matrix={name}\n", meta.header_line()));
    s.push_str(&format!("{} {} {}\n", a.rows, a.cols, trip.len()));
    for (r, c, v) in trip {
        s.push_str(&format!("{} {} {:e}\n", r + 1, c + 1, v));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Row {
        index: usize,
        eigenvalue: f64,
    }

    #[test]
    fn csv_round_trip_keeps_provenance() {
        let meta = ArtifactMeta::new("spectrum", "abc", 3);
        let rows = vec![Row { index: 1, eigenvalue: 0.5 }, Row { index: 2, eigenvalue: 1.25 }];
        let text = to_csv(&meta, &rows).unwrap();
        assert!(text.starts_with("# overtwist spectrum config_hash=abc seed=3\n"));
        assert_eq!(read_csv::<Row>(&text).unwrap(), rows);
    }

    #[test]
    fn matrix_market_header() {
        let a = Csr::from_triplets(2, 2, &[(0, 0, 1.0), (1, 0, -2.0)]);
        let s = to_matrix_market(&ArtifactMeta::new("spectrum", "h", 0), "d0", &a);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[2], "2 2 2");
        assert_eq!(lines[3], "1 1 1e0");
        assert_eq!(lines[4], "2 1 -2e0");
    }

    #[test]
    fn json_envelope_flattens() {
        #[derive(Serialize)]
        struct B {
            x: u8,
        }
        let s = to_json(&ArtifactMeta::new("c", "h", 1), &B { x: 4 }).unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["x"], 4);
        assert_eq!(v["meta"]["config_hash"], "h");
    }
}
