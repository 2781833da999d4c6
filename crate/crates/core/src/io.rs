//! Plain-text persistence: profile snapshots, time-series CSV, atomic writes.

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{Error, Result};
use crate::grid::build_grid;
use crate::params::ModelParams;
use crate::profile::Profile;
use std::fmt::Write as _;
use std::path::Path;

/// Parsed snapshot: ordered metadata and the profile on its rebuilt grid.
#[derive(Debug, Clone)]
pub struct Snapshot {
    pub metadata: Vec<(String, String)>,
    pub profile: Profile,
}

impl Snapshot {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        let v = self.get(key).ok_or_else(|| Error::Parse(format!("missing metadata `{key}`")))?;
        v.parse().map_err(|_| Error::Parse(format!("bad number for `{key}`: {v}")))
    }
}

/// Formats a profile snapshot. `extra` entries follow the standard keys.
pub fn format_snapshot(u: &Profile, params: Option<&ModelParams>, t: f64, extra: &[(&str, String)]) -> String {
    let g = u.grid();
    let mut s = String::new();
    let _ = writeln!(s, "# N={}", g.dim());
    if let Some(p) = params {
        let _ = writeln!(s, "# lambda={:.17e}", p.lambda());
        let _ = writeln!(s, "# q={:.17e}", p.q());
        let _ = writeln!(s, "# variant={}", p.variant());
    }
    let _ = writeln!(s, "# R={:.17e}", g.radius());
    let _ = writeln!(s, "# M={}", g.cells());
    let _ = writeln!(s, "# t={t:.17e}");
    for (k, v) in extra {
        let _ = writeln!(s, "# {k}={v}");
    }
    for (i, (r, d)) in g.centers().iter().zip(u.density()).enumerate() {
        match u.mode1() {
            Some(m1) => {
                let _ = writeln!(s, "{r:.17e},{d:.17e},{:.17e}", m1[i]);
            }
            None => {
                let _ = writeln!(s, "{r:.17e},{d:.17e}");
            }
        }
    }
    s
}

/// Parses a snapshot; the grid is rebuilt from `N`, `R`, `M` and checked against the `r` column.
pub fn parse_snapshot(text: &str) -> Result<Snapshot> {
    let mut metadata = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                metadata.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        let row = line
            .split(',')
            .map(|x| x.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse(format!("line {}: {e}", no + 1)))?;
        if row.len() < 2 || row.len() > 3 || rows.first().is_some_and(|f| f.len() != row.len()) {
            return Err(Error::Parse(format!("line {}: expected r,density[,mode1]", no + 1)));
        }
        rows.push(row);
    }
    let meta = |k: &str| -> Result<&str> {
        metadata.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str()).ok_or_else(|| Error::Parse(format!("missing metadata `{k}`")))
    };
    let dim: usize = meta("N")?.parse().map_err(|_| Error::Parse("bad N".into()))?;
    let radius: f64 = meta("R")?.parse().map_err(|_| Error::Parse("bad R".into()))?;
    let cells: usize = meta("M")?.parse().map_err(|_| Error::Parse("bad M".into()))?;
    if rows.len() != cells {
        return Err(Error::Parse(format!("expected {cells} rows, found {}", rows.len())));
    }
    let grid = build_grid(dim, radius, cells)?;
    for (row, r) in rows.iter().zip(grid.centers()) {
        if (row[0] - r).abs() > 1e-12 * radius {
            return Err(Error::GridMismatch);
        }
    }
    let density = rows.iter().map(|r| r[1]).collect();
    let mut profile = Profile::new(grid, density)?;
    if rows.first().is_some_and(|r| r.len() == 3) {
        profile = profile.with_mode1(rows.iter().map(|r| r[2]).collect())?;
    }
    Ok(Snapshot { metadata, profile })
}

/// Column-oriented CSV with a header line.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<&[f64]> {
        self.header
            .iter()
            .position(|h| h == name)
            .map(|i| self.columns[i].as_slice())
            .ok_or_else(|| Error::Parse(format!("missing column `{name}`")))
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }
}

pub fn parse_table(text: &str) -> Result<Table> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
    let header: Vec<String> =
        lines.next().ok_or_else(|| Error::Parse("empty table".into()))?.split(',').map(|s| s.trim().to_string()).collect();
    let mut columns = vec![Vec::new(); header.len()];
    for (no, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != header.len() {
            return Err(Error::Parse(format!("row {}: {} fields, header has {}", no + 1, fields.len(), header.len())));
        }
        for (col, f) in columns.iter_mut().zip(fields) {
            col.push(f.trim().parse().map_err(|e| Error::Parse(format!("row {}: {e}", no + 1)))?);
        }
    }
    Ok(Table { header, columns })
}

/// Reads a diagnostics time series (extra columns are ignored).
pub fn parse_series(text: &str) -> Result<Vec<DiagnosticsRecord>> {
    let t = parse_table(text)?;
    let c = |n| t.column(n);
    let (tt, mass, fe, fi, re, wl, sm) =
        (c("t")?, c("mass")?, c("free_energy")?, c("fisher")?, c("rel_entropy")?, c("weighted_l2")?, c("second_moment")?);
    Ok((0..t.rows())
        .map(|i| DiagnosticsRecord {
            t: tt[i],
            mass: mass[i],
            free_energy: fe[i],
            fisher: fi[i],
            rel_entropy: re[i],
            weighted_l2: wl[i],
            second_moment: sm[i],
        })
        .collect())
}

/// Writes `bytes` to a sibling temp file, syncs, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    use std::io::Write;
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| Error::Parse(format!("not a file path: {}", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result.map_err(Error::from)
}
