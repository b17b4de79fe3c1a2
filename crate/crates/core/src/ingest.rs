//! Reading observation files.
//!
//! Accepted layouts: one number per line (blank lines and `#` comments
//! skipped, an optional non-numeric header on the first data line), or a CSV
//! file with a named column.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::null_model::z_from_t_flagged;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    Z,
    P,
    T,
}

impl fmt::Display for SampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SampleKind::Z => "z",
            SampleKind::P => "p",
            SampleKind::T => "t",
        })
    }
}

impl FromStr for SampleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "z" | "Z" => Ok(SampleKind::Z),
            "p" | "P" => Ok(SampleKind::P),
            "t" | "T" => Ok(SampleKind::T),
            other => Err(Error::InvalidArgument(format!(
                "unknown sample kind {other:?} (expected z, p or t)"
            ))),
        }
    }
}

/// Ingested observations. t statistics are converted to z-scores on the way
/// in, so `kind` is never `T` after [`ingest`]; `converted_from_t` records it.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub values: Vec<f64>,
    pub kind: SampleKind,
    pub df: Option<f64>,
    pub source: PathBuf,
    pub converted_from_t: bool,
    /// Number of t statistics whose tail probability had to be clamped.
    pub clamped: usize,
}

impl Sample {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Builds a sample from in-memory values with the same validation and t
    /// conversion as [`ingest`].
    pub fn from_values(values: Vec<f64>, kind: SampleKind, df: Option<f64>) -> Result<Self> {
        finish(values, kind, df, PathBuf::from("<memory>"))
    }

    /// `count`, `min`, `median`, `max` for the ingestion echo.
    pub fn summary(&self) -> String {
        let mut sorted = self.values.clone();
        sorted.sort_unstable_by(f64::total_cmp);
        let n = sorted.len();
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
        };
        format!(
            "{}: {} {}-values (min {:.4}, median {:.4}, max {:.4})",
            self.source.display(),
            n,
            self.kind,
            sorted[0],
            median,
            sorted[n - 1]
        )
    }
}

/// Reads a sample from `path`. `column` selects a named CSV column.
pub fn ingest(
    path: impl AsRef<Path>,
    kind: SampleKind,
    df: Option<f64>,
    column: Option<&str>,
) -> Result<Sample> {
    let path = path.as_ref();
    let values = match column {
        Some(name) => read_csv_column(path, name)?,
        None => read_lines(path)?,
    };
    finish(values, kind, df, path.to_path_buf())
}

fn finish(values: Vec<f64>, kind: SampleKind, df: Option<f64>, source: PathBuf) -> Result<Sample> {
    if values.is_empty() {
        return Err(Error::Input {
            path: source,
            reason: "no observations".into(),
        });
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Input {
            path: source,
            reason: format!("non-finite value {v}"),
        });
    }
    match kind {
        SampleKind::P => {
            if let Some(p) = values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
                return Err(Error::Input {
                    path: source,
                    reason: format!("p-value {p} outside [0, 1]"),
                });
            }
            Ok(Sample {
                values,
                kind,
                df: None,
                source,
                converted_from_t: false,
                clamped: 0,
            })
        }
        SampleKind::Z => Ok(Sample {
            values,
            kind,
            df: None,
            source,
            converted_from_t: false,
            clamped: 0,
        }),
        SampleKind::T => {
            let df = df.ok_or_else(|| Error::Input {
                path: source.clone(),
                reason: "t statistics need degrees of freedom (--df)".into(),
            })?;
            let mut clamped = 0;
            let z = values
                .iter()
                .map(|&t| {
                    let (z, flag) = z_from_t_flagged(t, df)?;
                    clamped += flag as usize;
                    Ok(z)
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(Sample {
                values: z,
                kind: SampleKind::Z,
                df: Some(df),
                source,
                converted_from_t: true,
                clamped,
            })
        }
    }
}

fn read_lines(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Input {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    let mut values = Vec::new();
    let mut first_data_line = true;
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        // single-column CSV may carry a trailing comma or quotes
        let field = trimmed.trim_end_matches(',').trim_matches('"').trim();
        match field.parse::<f64>() {
            Ok(v) => values.push(v),
            Err(_) if first_data_line => {}
            Err(_) => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: i + 1,
                    content: trimmed.to_string(),
                })
            }
        }
        first_data_line = false;
    }
    Ok(values)
}

fn read_csv_column(path: &Path, name: &str) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Input {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
    let headers = reader.headers()?.clone();
    let col = headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::Input {
            path: path.to_path_buf(),
            reason: format!("no column named {name:?}"),
        })?;
    let mut values = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = record.get(col).unwrap_or("");
        let v = field.parse::<f64>().map_err(|_| Error::Parse {
            path: path.to_path_buf(),
            line,
            content: field.to_string(),
        })?;
        values.push(v);
    }
    Ok(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(contents: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        f
    }

    #[test]
    fn reads_plain_lines() {
        let f = write_tmp("0.1\n0.2\n0.3\n");
        let s = ingest(f.path(), SampleKind::P, None, None).unwrap();
        assert_eq!(s.values, vec![0.1, 0.2, 0.3]);
        assert_eq!(s.kind, SampleKind::P);
    }

    #[test]
    fn skips_header_and_comments() {
        let f = write_tmp("# prostate\nz\n1.5\n\n-0.2\n");
        let s = ingest(f.path(), SampleKind::Z, None, None).unwrap();
        assert_eq!(s.values, vec![1.5, -0.2]);
    }

    #[test]
    fn converts_t_statistics() {
        let f = write_tmp("0\n");
        let s = ingest(f.path(), SampleKind::T, Some(100.0), None).unwrap();
        assert_eq!(s.values, vec![0.0]);
        assert!(s.converted_from_t);
        assert!(ingest(f.path(), SampleKind::T, None, None).is_err());
    }

    #[test]
    fn reports_bad_line_number() {
        let f = write_tmp("0.1\nabc\n0.3\n");
        match ingest(f.path(), SampleKind::P, None, None) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_and_out_of_range() {
        let f = write_tmp("# nothing\n");
        assert!(ingest(f.path(), SampleKind::Z, None, None).is_err());
        let f = write_tmp("0.5\n1.5\n");
        assert!(ingest(f.path(), SampleKind::P, None, None).is_err());
    }

    #[test]
    fn reads_named_column() {
        let f = write_tmp("gene,t,p\ng1,1.0,0.3\ng2,-2.0,0.04\n");
        let s = ingest(f.path(), SampleKind::P, None, Some("p")).unwrap();
        assert_eq!(s.values, vec![0.3, 0.04]);
        assert!(ingest(f.path(), SampleKind::P, None, Some("q")).is_err());
        let f = write_tmp("gene,p\ng1,0.3\ng2,oops\n");
        match ingest(f.path(), SampleKind::P, None, Some("p")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
    }
}
