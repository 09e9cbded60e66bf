//! Report envelope and file I/O shared by all commands.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use nevl_core::report::sha256_hex;
use serde::Serialize;

pub const TOOL: &str = "nevl";

/// A file read by a command, identified by its content digest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Every JSON report: what ran, with which resolved settings, on which bytes.
#[derive(Debug, Serialize)]
pub struct Envelope<C: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub config: C,
    pub inputs: Vec<InputDigest>,
    pub result: R,
}

impl<C: Serialize, R: Serialize> Envelope<C, R> {
    pub fn new(command: &str, config: C, inputs: Vec<InputDigest>, result: R) -> Self {
        Envelope { tool: TOOL, version: env!("CARGO_PKG_VERSION"), command: command.to_owned(), config, inputs, result }
    }
}

/// Reads a whole file, or stdin for `-`, and records its digest.
pub fn read_input(path: &Path) -> Result<(Vec<u8>, InputDigest)> {
    let bytes = if path == Path::new("-") {
        let mut buf = Vec::new();
        std::io::stdin().read_to_end(&mut buf).context("reading stdin")?;
        buf
    } else {
        std::fs::read(path).with_context(|| format!("reading {}", path.display()))?
    };
    let digest = InputDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) };
    Ok((bytes, digest))
}

/// Writes to `path`, or stdout when absent.
pub fn write_output(path: Option<&PathBuf>, bytes: &[u8]) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, bytes).with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(bytes).and_then(|_| out.flush()).context("writing stdout")
        }
    }
}

/// Pretty JSON with a trailing newline; key order follows the types, so
/// identical inputs give identical bytes.
pub fn write_json<T: Serialize>(path: Option<&PathBuf>, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).context("serializing report")?;
    bytes.push(b'\n');
    write_output(path, &bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_shape() {
        let e = Envelope::new("corpus stats", serde_json::json!({"a": 1}), vec![InputDigest { path: "x".into(), sha256: sha256_hex(b"") }], 5);
        let v = serde_json::to_value(&e).unwrap();
        assert_eq!(v["tool"], "nevl");
        assert_eq!(v["command"], "corpus stats");
        assert_eq!(v["inputs"][0]["sha256"], "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
        assert_eq!(v["result"], 5);
    }

    #[test]
    fn digest_of_read_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f");
        std::fs::write(&p, b"abc").unwrap();
        let (bytes, d) = read_input(&p).unwrap();
        assert_eq!(bytes, b"abc");
        assert_eq!(d.sha256, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
        assert!(read_input(&dir.path().join("missing")).is_err());
    }
}
