//! Run manifests: `key=value` lines echoing the parameters, one
//! `sha256.<artifact>` line per output file, and the wall-clock time.

use sha2::{Digest, Sha256};
use std::fmt::Write;
use std::path::Path;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

pub fn render(command: &str, params: &[(String, String)], artifacts: &[(String, Vec<u8>)], wall_clock: f64) -> String {
    let mut s = format!("command={command}\n");
    for (k, v) in params {
        let _ = writeln!(s, "{k}={v}");
    }
    for (name, bytes) in artifacts {
        let _ = writeln!(s, "artifact={name}");
        let _ = writeln!(s, "sha256.{name}={}", sha256_hex(bytes));
    }
    let _ = writeln!(s, "wall_clock_seconds={wall_clock:.6}");
    s
}

fn recorded<'a>(manifest: &'a str, name: &str) -> Option<&'a str> {
    let key = format!("sha256.{name}=");
    manifest.lines().find_map(|l| l.strip_prefix(key.as_str()))
}

/// Compares freshly computed artifacts with the manifest and with the files on
/// disk. Returns one message per mismatch.
pub fn check(manifest: &str, dir: &Path, artifacts: &[(String, Vec<u8>)]) -> Vec<String> {
    let mut problems = Vec::new();
    for (name, bytes) in artifacts {
        let fresh = sha256_hex(bytes);
        match recorded(manifest, name) {
            None => problems.push(format!("{name}: not listed in the manifest")),
            Some(h) if h != fresh => problems.push(format!("{name}: recomputed checksum {fresh} differs from recorded {h}")),
            Some(h) => match std::fs::read(dir.join(name)) {
                Err(e) => problems.push(format!("{name}: {e}")),
                Ok(disk) if sha256_hex(&disk) != h => problems.push(format!("{name}: file on disk does not match the manifest")),
                Ok(_) => {}
            },
        }
    }
    problems
}
