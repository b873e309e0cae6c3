use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use crate::CliError;

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v == f64::INFINITY {
        "inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v:.16e}")
    }
}

/// Shortest text that parses back to `v`; used in the manifest.
pub fn fmt_exact(v: f64) -> String {
    format!("{v:?}")
}

pub fn join_exact(values: &[f64]) -> String {
    values.iter().map(|v| fmt_exact(*v)).collect::<Vec<_>>().join(",")
}

pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    pub fn new(header: &[String]) -> Result<Self, CliError> {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(header)?;
        Ok(Self { writer })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<(), CliError> {
        self.writer.write_record(fields)?;
        Ok(())
    }

    pub fn into_bytes(self) -> Result<Vec<u8>, CliError> {
        self.writer.into_inner().map_err(|e| CliError::Io(e.into_error()))
    }
}

/// `key=value` lines describing everything needed to rerun a command.
pub struct Manifest {
    lines: Vec<(String, String)>,
}

impl Manifest {
    pub fn new(command: &str) -> Self {
        let mut m = Self { lines: Vec::new() };
        m.set("tool", "chaosdeg");
        m.set("version", env!("CARGO_PKG_VERSION"));
        m.set("command", command);
        m
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.lines.push((key.to_string(), value.into()));
    }

    fn render(&self, timestamp: u64) -> String {
        let mut out = String::new();
        for (k, v) in &self.lines {
            out.push_str(&format!("{k}={v}\n"));
        }
        out.push_str(&format!("timestamp_unix={timestamp}\n"));
        out
    }
}

pub fn manifest_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("manifest")
}

/// Sends the table to `--out` (with its manifest) or to `stdout`.
pub fn emit(table: Table, manifest: &Manifest, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    let bytes = table.into_bytes()?;
    match out {
        Some(path) => {
            std::fs::write(path, &bytes)?;
            let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
            std::fs::write(manifest_path(path), manifest.render(now))?;
        }
        None => stdout.write_all(&bytes)?,
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for v in [std::f64::consts::LN_2, 0.1, -1.0 / 3.0, 5e-324, 1e300, 0.0] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_f64(f64::NEG_INFINITY), "-inf");
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn rows_end_with_line_feed() {
        let mut t = Table::new(&["a".into(), "b".into()]).unwrap();
        t.row(&["1".into(), String::new()]).unwrap();
        assert_eq!(t.into_bytes().unwrap(), b"a,b\n1,\n");
    }

    #[test]
    fn sidecar_replaces_extension() {
        assert_eq!(
            manifest_path(Path::new("/tmp/run.csv")),
            PathBuf::from("/tmp/run.manifest")
        );
        assert_eq!(manifest_path(Path::new("run")), PathBuf::from("run.manifest"));
    }
}
