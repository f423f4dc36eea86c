//! Line-oriented text I/O for model archives.
//!
//! Archives are plain UTF-8 text. Floats are written with Rust's default
//! float formatting, which emits the shortest decimal string that parses back
//! to the identical bit pattern, so a save/load round trip is exact. Lines
//! starting with `#` are comments; the reader skips them anywhere after the
//! magic line, which always comes first.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

pub(crate) struct ArchiveWriter {
    writer: BufWriter<File>,
    path: String,
}

impl ArchiveWriter {
    pub fn create(path: &Path) -> Result<Self> {
        let file = File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Ok(ArchiveWriter {
            writer: BufWriter::new(file),
            path: path.display().to_string(),
        })
    }

    fn io_err(&self, e: std::io::Error) -> Error {
        Error::io(self.path.clone(), e)
    }

    pub fn line(&mut self, text: &str) -> Result<()> {
        writeln!(self.writer, "{text}").map_err(|e| self.io_err(e))
    }

    pub fn comment(&mut self, text: &str) -> Result<()> {
        writeln!(self.writer, "# {text}").map_err(|e| self.io_err(e))
    }

    /// One line of space-separated floats.
    pub fn floats(&mut self, values: impl IntoIterator<Item = f64>) -> Result<()> {
        let mut first = true;
        for v in values {
            if !first {
                write!(self.writer, " ").map_err(|e| self.io_err(e))?;
            }
            write!(self.writer, "{v}").map_err(|e| self.io_err(e))?;
            first = false;
        }
        writeln!(self.writer).map_err(|e| self.io_err(e))
    }

    /// Matrix as one line per row.
    pub fn matrix_rows(&mut self, m: &DMatrix<f64>) -> Result<()> {
        for i in 0..m.nrows() {
            self.floats((0..m.ncols()).map(|j| m[(i, j)]))?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.writer.flush().map_err(|e| Error::io(self.path, e))
    }
}

pub(crate) struct ArchiveReader<'a> {
    path: String,
    lines: std::str::Lines<'a>,
    line: usize,
}

impl<'a> ArchiveReader<'a> {
    pub fn new(path: impl Into<String>, content: &'a str) -> Self {
        ArchiveReader {
            path: path.into(),
            lines: content.lines(),
            line: 0,
        }
    }

    pub fn error(&self, reason: impl Into<String>) -> Error {
        Error::ParseFile {
            path: self.path.clone(),
            line: self.line,
            reason: reason.into(),
        }
    }

    pub fn next_line(&mut self) -> Result<&'a str> {
        loop {
            self.line += 1;
            let line = self
                .lines
                .next()
                .ok_or_else(|| self.error("unexpected end of file"))?;
            if !line.starts_with('#') {
                return Ok(line);
            }
        }
    }

    /// First line must equal the archive magic exactly.
    pub fn expect_magic(&mut self, magic: &'static str) -> Result<()> {
        let line = self.next_line().map_err(|_| Error::ArchiveMagic {
            expected: magic,
            found: "<empty file>".into(),
        })?;
        if line != magic {
            return Err(Error::ArchiveMagic {
                expected: magic,
                found: line.to_string(),
            });
        }
        Ok(())
    }

    /// Line of the form `<tag> <rest>`; returns the rest.
    pub fn tagged(&mut self, tag: &str) -> Result<&'a str> {
        let line = self.next_line()?;
        match line.split_once(' ') {
            Some((head, rest)) if head == tag => Ok(rest),
            _ => Err(self.error(format!("expected `{tag} ...`, found `{line}`"))),
        }
    }

    /// Parse the rest of a tagged line as a single value.
    pub fn tagged_value<T: FromStr>(&mut self, tag: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let rest = self.tagged(tag)?;
        rest.trim()
            .parse::<T>()
            .map_err(|e| self.error(format!("{tag}: cannot parse `{rest}`: {e}")))
    }

    /// Parse the rest of a tagged line as whitespace-separated values.
    pub fn tagged_values<T: FromStr>(&mut self, tag: &str) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        let rest = self.tagged(tag)?;
        rest.split_whitespace()
            .map(|tok| {
                tok.parse::<T>()
                    .map_err(|e| self.error(format!("{tag}: cannot parse `{tok}`: {e}")))
            })
            .collect()
    }

    /// One line holding exactly `expected` floats.
    pub fn floats_line(&mut self, expected: usize) -> Result<Vec<f64>> {
        let line = self.next_line()?;
        let values: Vec<f64> = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|e| self.error(format!("cannot parse float `{tok}`: {e}")))
            })
            .collect::<Result<_>>()?;
        if values.len() != expected {
            return Err(self.error(format!("expected {expected} values, found {}", values.len())));
        }
        Ok(values)
    }

    pub fn matrix(&mut self, rows: usize, cols: usize) -> Result<DMatrix<f64>> {
        let mut data = Vec::with_capacity(rows * cols);
        for _ in 0..rows {
            data.extend(self.floats_line(cols)?);
        }
        Ok(DMatrix::from_row_slice(rows, cols, &data))
    }

    /// Nothing but empty lines and comments may remain.
    pub fn end(&mut self) -> Result<()> {
        for line in self.lines.by_ref() {
            self.line += 1;
            if !line.trim().is_empty() && !line.starts_with('#') {
                return Err(self.error(format!("unexpected trailing content `{line}`")));
            }
        }
        Ok(())
    }
}

pub(crate) fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_survive_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.txt");
        let values = [
            0.1,
            -0.0,
            1.0 / 3.0,
            f64::MIN_POSITIVE,
            1.7976931348623157e308,
            5e-324,
        ];
        let mut w = ArchiveWriter::create(&path).unwrap();
        w.floats(values.iter().copied()).unwrap();
        w.finish().unwrap();

        let content = read_to_string(&path).unwrap();
        let mut r = ArchiveReader::new(path.display().to_string(), &content);
        let parsed = r.floats_line(values.len()).unwrap();
        for (orig, back) in values.iter().zip(&parsed) {
            assert_eq!(orig.to_bits(), back.to_bits());
        }
    }

    #[test]
    fn reader_reports_line_numbers() {
        let mut r = ArchiveReader::new("mem", "MAGIC\nbad line");
        r.expect_magic("MAGIC").unwrap();
        let err = r.tagged("tag").unwrap_err();
        match err {
            Error::ParseFile { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn comments_are_skipped_but_counted() {
        let mut r = ArchiveReader::new("mem", "MAGIC\n# note\n# more\ntag value\n# tail\n");
        r.expect_magic("MAGIC").unwrap();
        assert_eq!(r.tagged("tag").unwrap(), "value");
        assert_eq!(r.line, 4);
        r.end().unwrap();
    }

    #[test]
    fn magic_mismatch_is_reported() {
        let mut r = ArchiveReader::new("mem", "OTHER1\n");
        assert!(matches!(
            r.expect_magic("MAGIC1").unwrap_err(),
            Error::ArchiveMagic { .. }
        ));
    }

    #[test]
    fn trailing_content_is_rejected() {
        let mut r = ArchiveReader::new("mem", "MAGIC\n\n\nstray");
        r.expect_magic("MAGIC").unwrap();
        assert!(r.end().is_err());
    }
}
