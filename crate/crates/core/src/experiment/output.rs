use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Scientific notation with 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Minimal comma-separated writer with a fixed column count.
pub struct CsvWriter {
    path: PathBuf,
    inner: BufWriter<File>,
    columns: usize,
}

impl CsvWriter {
    pub fn create(path: &Path, header: &[&str]) -> Result<Self> {
        let file = File::create(path).map_err(|e| Self::io(path, e))?;
        let mut w = Self {
            path: path.to_path_buf(),
            inner: BufWriter::new(file),
            columns: header.len(),
        };
        w.write_line(&header.join(","))?;
        Ok(w)
    }

    fn io(path: &Path, e: std::io::Error) -> Error {
        Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        }
    }

    fn write_line(&mut self, line: &str) -> Result<()> {
        writeln!(self.inner, "{line}").map_err(|e| Self::io(&self.path, e))
    }

    pub fn row(&mut self, fields: &[String]) -> Result<()> {
        if fields.len() != self.columns {
            return Err(Error::LengthMismatch {
                expected: self.columns,
                found: fields.len(),
            });
        }
        self.write_line(&fields.join(","))
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush().map_err(|e| Self::io(&self.path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format_round_trips() {
        for v in [0.0, 1.0, -2.5e-300, std::f64::consts::PI, 1e300] {
            assert_eq!(fmt_num(v).parse::<f64>().unwrap(), v);
        }
        assert_eq!(fmt_num(1.0), "1.0000000000000000e0");
    }

    #[test]
    fn row_width_checked() {
        let dir = tempfile::tempdir().unwrap();
        let mut w = CsvWriter::create(&dir.path().join("a.csv"), &["a", "b"]).unwrap();
        assert!(w.row(&["1".into()]).is_err());
        w.row(&["1".into(), "2".into()]).unwrap();
        w.finish().unwrap();
        assert_eq!(std::fs::read_to_string(dir.path().join("a.csv")).unwrap(), "a,b\n1,2\n");
    }
}
