use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{CodeChoice, SimConfig};
use super::engine::BerRecord;
use crate::cda_stbc::{CodeSpec, Variant};
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "snr_db,frames,bits,bit_errors,ber,wall_time_s";

/// `<crate version> (<git revision>)`.
pub fn version_string() -> String {
    format!(
        "{} ({})",
        env!("CARGO_PKG_VERSION"),
        env!("STBC_BP_GIT_REV")
    )
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Incremental CSV writer: header on creation, one flushed row per record.
pub struct CsvWriter {
    path: PathBuf,
    out: BufWriter<File>,
}

impl CsvWriter {
    pub fn create(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let file = File::create(&path).map_err(io_err(&path))?;
        let mut w = Self {
            out: BufWriter::new(file),
            path,
        };
        writeln!(w.out, "{CSV_HEADER}").map_err(io_err(&w.path))?;
        w.out.flush().map_err(io_err(&w.path))?;
        Ok(w)
    }

    pub fn append(&mut self, r: &BerRecord) -> Result<()> {
        writeln!(
            self.out,
            "{},{},{},{},{:e},{:.6}",
            r.snr_db, r.frames, r.bits, r.bit_errors, r.ber, r.wall_time_s
        )
        .and_then(|_| self.out.flush())
        .map_err(io_err(&self.path))
    }
}

/// Code parameters recorded next to the results.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeParams {
    pub n: usize,
    pub k: usize,
    pub variant: Variant,
    /// `[re, im]`.
    pub delta: [f64; 2],
    pub t: [f64; 2],
    pub omega: [f64; 2],
    pub symbol_index: String,
}

impl CodeParams {
    fn from_code(code: &CodeSpec<f64>) -> Self {
        let pair = |z: num_complex::Complex<f64>| [z.re, z.im];
        Self {
            n: code.n(),
            k: code.k(),
            variant: code.variant(),
            delta: pair(code.delta()),
            t: pair(code.t()),
            omega: pair(code.omega()),
            symbol_index: "i = u*n + v".into(),
        }
    }
}

/// Run manifest written alongside the CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub config: SimConfig,
    pub code: Option<CodeParams>,
}

/// `<csv stem>.manifest.toml` next to the CSV.
pub fn manifest_path(csv: &Path) -> PathBuf {
    csv.with_extension("manifest.toml")
}

pub fn write_manifest(cfg: &SimConfig) -> Result<PathBuf> {
    let code = match cfg.code {
        CodeChoice::Cda { n, variant } => Some(CodeParams::from_code(&CodeSpec::new(n, variant)?)),
        CodeChoice::Vblast { .. } => None,
    };
    let manifest = Manifest {
        version: version_string(),
        config: cfg.clone(),
        code,
    };
    let text =
        toml::to_string(&manifest).map_err(|e| Error::Config(format!("manifest encoding: {e}")))?;
    let path = manifest_path(&cfg.output);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(&path, text).map_err(io_err(&path))?;
    Ok(path)
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

/// Write `cfg.output` (CSV) and its manifest; returns both paths.
pub fn emit_results(records: &[BerRecord], cfg: &SimConfig) -> Result<(PathBuf, PathBuf)> {
    let mut w = CsvWriter::create(&cfg.output)?;
    for r in records {
        w.append(r)?;
    }
    Ok((cfg.output.clone(), write_manifest(cfg)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record() -> BerRecord {
        BerRecord {
            snr_db: 6.0,
            frames: 1234,
            bits: 19744,
            bit_errors: 400,
            ber: 400.0 / 19744.0,
            wall_time_s: 1.25,
        }
    }

    #[test]
    fn one_record_gives_two_lines() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = SimConfig::new(CodeChoice::Cda {
            n: 4,
            variant: Variant::FdIll,
        });
        cfg.output = dir.path().join("sub/out.csv");
        let (csv, manifest) = emit_results(&[record()], &cfg).unwrap();
        let text = fs::read_to_string(&csv).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER);
        assert!(
            lines[1].starts_with("6,1234,19744,400,2.025"),
            "{}",
            lines[1]
        );
        assert!(lines[1].ends_with(",1.250000"));
        let m = load_manifest(&manifest).unwrap();
        assert_eq!(m.config, cfg);
        assert_eq!(m.code.unwrap().k, 16);
    }

    #[test]
    fn io_errors_carry_path() {
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        let err = CsvWriter::create(blocker.join("out.csv")).err().unwrap();
        assert!(err.to_string().contains("file"));
        assert!(load_manifest(dir.path().join("missing.toml")).is_err());
    }
}
