//! File formats and the output directory.

use crate::config::ConfigError;
use qwall::dynamics::fmt_sig;
use qwall::tensor::{c, CMat, CVec};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Dense complex matrix: first line `n`, then `n²` lines `row col re im` (0-based).
pub fn parse_matrix(text: &str) -> Result<CMat, ConfigError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let n: usize = lines
        .next()
        .ok_or_else(|| ConfigError("empty matrix file".into()))?
        .parse()
        .map_err(|e| ConfigError(format!("matrix dimension: {e}")))?;
    if n == 0 {
        return Err(ConfigError("matrix dimension must be positive".into()));
    }
    let mut m = CMat::zeros(n, n);
    let mut seen = vec![false; n * n];
    for (k, line) in lines.enumerate() {
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 4 {
            return Err(ConfigError(format!("entry {}: expected `row col re im`, got `{line}`", k + 1)));
        }
        let idx = |s: &str| s.parse::<usize>().map_err(|e| ConfigError(format!("entry {}: {e}", k + 1)));
        let num = |s: &str| s.parse::<f64>().map_err(|e| ConfigError(format!("entry {}: {e}", k + 1)));
        let (r, col) = (idx(f[0])?, idx(f[1])?);
        if r >= n || col >= n {
            return Err(ConfigError(format!("entry {}: index ({r}, {col}) out of range for n = {n}", k + 1)));
        }
        if std::mem::replace(&mut seen[r * n + col], true) {
            return Err(ConfigError(format!("entry ({r}, {col}) given twice")));
        }
        m[(r, col)] = c(num(f[2])?, num(f[3])?);
    }
    let count = seen.iter().filter(|s| **s).count();
    if count != n * n {
        return Err(ConfigError(format!("expected {} entries, found {count}", n * n)));
    }
    Ok(m)
}

pub fn format_matrix(m: &CMat) -> String {
    let mut s = format!("{}\n", m.nrows());
    for r in 0..m.nrows() {
        for col in 0..m.ncols() {
            let z = m[(r, col)];
            let _ = writeln!(s, "{r} {col} {} {}", fmt_sig(z.re), fmt_sig(z.im));
        }
    }
    s
}

pub fn parse_vector(v: &[[f64; 2]], n: usize, what: &str) -> Result<CVec, ConfigError> {
    if v.len() != n {
        return Err(ConfigError(format!("{what}: expected {n} amplitudes, got {}", v.len())));
    }
    let x = CVec::from_iterator(n, v.iter().map(|p| c(p[0], p[1])));
    if x.norm() < 1e-12 {
        return Err(ConfigError(format!("{what}: zero vector")));
    }
    Ok(x.unscale(x.norm()))
}

/// Output directory plus stage timings, summarized by [`Output::finish`].
pub struct Output {
    pub dir: PathBuf,
    pub plots: bool,
    timings: Vec<(String, f64)>,
}

#[derive(Serialize)]
struct Artifact {
    path: String,
    sha256: String,
    bytes: u64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    config: String,
    artifacts: Vec<Artifact>,
    timings: toml::Table,
}

pub const MANIFEST: &str = "manifest.toml";

impl Output {
    pub fn create(dir: &Path, plots: bool) -> std::io::Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Self { dir: dir.to_path_buf(), plots, timings: Vec::new() })
    }

    pub fn write(&self, name: &str, contents: &str) -> std::io::Result<()> {
        std::fs::write(self.dir.join(name), contents)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn time<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let out = f();
        self.timings.push((stage.to_string(), t.elapsed().as_secs_f64()));
        out
    }

    /// Hash every file in the directory (except the manifest) and write the manifest.
    pub fn finish(&self, command: &str, seed: u64, config: &str) -> std::io::Result<()> {
        let mut names: Vec<String> = std::fs::read_dir(&self.dir)?
            .filter_map(|e| e.ok())
            .filter(|e| e.file_type().map(|t| t.is_file()).unwrap_or(false))
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .filter(|n| n != MANIFEST)
            .collect();
        names.sort();
        let mut artifacts = Vec::with_capacity(names.len());
        for name in names {
            let bytes = std::fs::read(self.dir.join(&name))?;
            let digest = Sha256::digest(&bytes);
            let sha256 = digest.iter().fold(String::with_capacity(64), |mut s, b| {
                let _ = write!(s, "{b:02x}");
                s
            });
            artifacts.push(Artifact { path: name, sha256, bytes: bytes.len() as u64 });
        }
        let mut timings = toml::Table::new();
        for (k, v) in &self.timings {
            timings.insert(k.clone(), toml::Value::Float(*v));
        }
        let m = Manifest { command, version: env!("CARGO_PKG_VERSION"), seed, config: config.to_string(), artifacts, timings };
        let text = toml::to_string(&m).map_err(std::io::Error::other)?;
        self.write(MANIFEST, &text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_round_trip() {
        let m = CMat::from_fn(3, 3, |r, col| c(r as f64 - 0.25 * col as f64, (r * col) as f64 / 7.0));
        let back = parse_matrix(&format_matrix(&m)).unwrap();
        assert!((back - m).norm() < 1e-11);
    }

    #[test]
    fn matrix_errors() {
        assert!(parse_matrix("").is_err());
        assert!(parse_matrix("2\n0 0 1 0\n").is_err());
        assert!(parse_matrix("1\n0 0 1 0\n0 0 1 0\n").is_err());
        assert!(parse_matrix("1\n1 0 1 0\n").is_err());
        assert!(parse_matrix("1\n0 0 x 0\n").is_err());
    }
}
