//! Delimited-text export of sample or feature matrices.
//!
//! Floats are written with the shortest representation that parses back to
//! the same bits, so exporting and reloading through [`crate::data::load_csv`]
//! is lossless. Comment lines start with `#`, an optional header names the
//! columns `f0..f{d-1}` plus `label`, and labels (when present) occupy the
//! last column.

use std::fmt;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    Tsv,
}

impl ExportFormat {
    pub fn delimiter(self) -> char {
        match self {
            ExportFormat::Csv => ',',
            ExportFormat::Tsv => '\t',
        }
    }
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExportFormat::Csv => "csv",
            ExportFormat::Tsv => "tsv",
        })
    }
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ExportFormat::Csv),
            "tsv" => Ok(ExportFormat::Tsv),
            other => Err(Error::InvalidInput(format!(
                "unknown export format `{other}`, expected csv or tsv"
            ))),
        }
    }
}

/// Write a matrix (one sample per line) with optional labels, leading `#`
/// comment lines, and an optional column-name header.
pub fn export_matrix(
    path: &Path,
    format: ExportFormat,
    matrix: &DMatrix<f64>,
    labels: Option<&[u32]>,
    comments: &[String],
    header: bool,
) -> Result<()> {
    if let Some(l) = labels {
        if l.len() != matrix.nrows() {
            return Err(Error::LabelCountMismatch {
                labels: l.len(),
                samples: matrix.nrows(),
            });
        }
    }
    if matrix.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "export matrix",
        });
    }

    let io_err = |e| Error::io(path.display().to_string(), e);
    let file = std::fs::File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    let delim = format.delimiter();
    let mut write = || -> std::io::Result<()> {
        for comment in comments {
            writeln!(w, "# {comment}")?;
        }
        if header {
            for j in 0..matrix.ncols() {
                if j > 0 {
                    write!(w, "{delim}")?;
                }
                write!(w, "f{j}")?;
            }
            if labels.is_some() {
                write!(w, "{delim}label")?;
            }
            writeln!(w)?;
        }
        for i in 0..matrix.nrows() {
            for j in 0..matrix.ncols() {
                if j > 0 {
                    write!(w, "{delim}")?;
                }
                write!(w, "{}", matrix[(i, j)])?;
            }
            if let Some(l) = labels {
                write!(w, "{delim}{}", l[i])?;
            }
            writeln!(w)?;
        }
        w.flush()
    };
    write().map_err(io_err)
}
