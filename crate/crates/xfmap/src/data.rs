//! Labeled sample matrices: IDX and CSV loading, pixel scaling, and
//! deterministic per-class subsetting.
//!
//! IDX is the binary layout used by the classic handwritten-digit archives:
//! big-endian `u32` header words followed by raw `u8` payload. Image files
//! carry magic `0x00000803` and three dimension words (count, rows, cols);
//! label files carry magic `0x00000801` and one count word. Pixels load as
//! raw `0..=255` values; apply [`Dataset::scale_unit`] before handing them to
//! the digit kernels, which insist on `[0, 1]` inputs.

use std::io::Cursor;
use std::path::Path;

use byteorder::{BigEndian, ReadBytesExt};
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

/// A sample matrix (one row per sample) with optional labels.
#[derive(Debug, Clone)]
pub struct Dataset {
    samples: DMatrix<f64>,
    labels: Option<Vec<u32>>,
    source: String,
}

impl Dataset {
    pub fn new(samples: DMatrix<f64>, labels: Option<Vec<u32>>, source: String) -> Result<Self> {
        if let Some(ref l) = labels {
            if l.len() != samples.nrows() {
                return Err(Error::LabelCountMismatch {
                    labels: l.len(),
                    samples: samples.nrows(),
                });
            }
        }
        Ok(Dataset {
            samples,
            labels,
            source,
        })
    }

    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    /// Labels, or [`Error::MissingLabels`] when the dataset has none.
    pub fn labels_required(&self) -> Result<&[u32]> {
        self.labels.as_deref().ok_or(Error::MissingLabels)
    }

    pub fn n(&self) -> usize {
        self.samples.nrows()
    }

    pub fn dim(&self) -> usize {
        self.samples.ncols()
    }

    /// Short description of where the samples came from.
    pub fn source(&self) -> &str {
        &self.source
    }

    /// One sample as a contiguous vector.
    pub fn row(&self, i: usize) -> Vec<f64> {
        (0..self.dim()).map(|j| self.samples[(i, j)]).collect()
    }

    /// Map raw `0..=255` pixel values to `[0, 1]`.
    pub fn scale_unit(&self) -> Dataset {
        Dataset {
            samples: self.samples.map(|v| v / 255.0),
            labels: self.labels.clone(),
            source: self.source.clone(),
        }
    }

    /// Map `[0, 1]` values to `[-1, 1]` via `2x - 1`.
    pub fn scale_signed(&self) -> Dataset {
        Dataset {
            samples: self.samples.map(|v| 2.0 * v - 1.0),
            labels: self.labels.clone(),
            source: self.source.clone(),
        }
    }

    /// The same samples with labels attached (replacing any existing ones).
    pub fn with_labels(&self, labels: Vec<u32>) -> Result<Dataset> {
        Dataset::new(self.samples.clone(), Some(labels), self.source.clone())
    }

    /// Every sample of the listed classes, class-major, file order within
    /// each class.
    pub fn take_classes(&self, classes: &[u32]) -> Result<Dataset> {
        let labels = self.labels_required()?;
        if classes.is_empty() {
            return Err(Error::InvalidInput("class list is empty".into()));
        }
        let d = self.dim();
        let mut rows: Vec<usize> = Vec::new();
        let mut out_labels: Vec<u32> = Vec::new();
        for &class in classes {
            for (i, &l) in labels.iter().enumerate() {
                if l == class {
                    rows.push(i);
                    out_labels.push(class);
                }
            }
        }
        let mut samples = DMatrix::zeros(rows.len(), d);
        for (dst, &src) in rows.iter().enumerate() {
            for j in 0..d {
                samples[(dst, j)] = self.samples[(src, j)];
            }
        }
        Ok(Dataset {
            samples,
            labels: Some(out_labels),
            source: self.source.clone(),
        })
    }

    /// Select `per_class` samples for each listed class.
    ///
    /// Selection is deterministic: seed 0 takes the first `per_class`
    /// occurrences in file order, any other seed draws without replacement
    /// using a seeded generator. Chosen rows are emitted class-major in the
    /// order `classes` lists them, ascending by original index within each
    /// class.
    pub fn subset_by_classes(&self, classes: &[u32], per_class: usize, seed: u64) -> Result<Dataset> {
        let labels = self.labels_required()?;
        if classes.is_empty() {
            return Err(Error::InvalidInput("class list is empty".into()));
        }
        for (i, c) in classes.iter().enumerate() {
            if classes[..i].contains(c) {
                return Err(Error::InvalidInput(format!("class {c} listed twice")));
            }
        }
        if per_class == 0 {
            return Err(Error::InvalidInput("per_class must be at least 1".into()));
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut chosen_rows: Vec<usize> = Vec::with_capacity(classes.len() * per_class);
        let mut chosen_labels: Vec<u32> = Vec::with_capacity(classes.len() * per_class);
        for &class in classes {
            let mut indices: Vec<usize> = labels
                .iter()
                .enumerate()
                .filter(|(_, &l)| l == class)
                .map(|(i, _)| i)
                .collect();
            if indices.len() < per_class {
                return Err(Error::InsufficientClassSamples {
                    label: class,
                    available: indices.len(),
                    needed: per_class,
                });
            }
            if seed != 0 {
                indices.shuffle(&mut rng);
                indices.truncate(per_class);
                indices.sort_unstable();
            } else {
                indices.truncate(per_class);
            }
            log::debug!("class {class}: rows {indices:?}");
            chosen_labels.extend(std::iter::repeat_n(class, per_class));
            chosen_rows.extend(indices);
        }

        let d = self.dim();
        let mut samples = DMatrix::zeros(chosen_rows.len(), d);
        for (dst, &src) in chosen_rows.iter().enumerate() {
            for j in 0..d {
                samples[(dst, j)] = self.samples[(src, j)];
            }
        }
        Ok(Dataset {
            samples,
            labels: Some(chosen_labels),
            source: format!("{} [subset seed={seed}]", self.source),
        })
    }
}

fn read_u32(cursor: &mut Cursor<&[u8]>, path: &Path) -> Result<u32> {
    cursor
        .read_u32::<BigEndian>()
        .map_err(|_| Error::IdxTruncated {
            path: path.display().to_string(),
        })
}

/// Load an IDX image file, optionally paired with an IDX label file.
pub fn load_idx(images_path: &Path, labels_path: Option<&Path>) -> Result<Dataset> {
    let bytes = std::fs::read(images_path)
        .map_err(|e| Error::io(images_path.display().to_string(), e))?;
    let mut cursor = Cursor::new(bytes.as_slice());
    let magic = read_u32(&mut cursor, images_path)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(Error::IdxBadMagic {
            path: images_path.display().to_string(),
            expected: IDX_IMAGES_MAGIC,
            found: magic,
        });
    }
    let count = read_u32(&mut cursor, images_path)? as usize;
    let rows = read_u32(&mut cursor, images_path)? as usize;
    let cols = read_u32(&mut cursor, images_path)? as usize;
    let d = rows * cols;
    let payload = &bytes[cursor.position() as usize..];
    if payload.len() < count * d {
        return Err(Error::IdxTruncated {
            path: images_path.display().to_string(),
        });
    }
    if payload.len() > count * d {
        return Err(Error::InvalidInput(format!(
            "{}: {} trailing bytes after {count} images",
            images_path.display(),
            payload.len() - count * d
        )));
    }
    let samples = DMatrix::from_row_iterator(count, d, payload.iter().map(|&b| b as f64));

    let labels = match labels_path {
        None => None,
        Some(lp) => {
            let lbytes =
                std::fs::read(lp).map_err(|e| Error::io(lp.display().to_string(), e))?;
            let mut lc = Cursor::new(lbytes.as_slice());
            let lmagic = read_u32(&mut lc, lp)?;
            if lmagic != IDX_LABELS_MAGIC {
                return Err(Error::IdxBadMagic {
                    path: lp.display().to_string(),
                    expected: IDX_LABELS_MAGIC,
                    found: lmagic,
                });
            }
            let lcount = read_u32(&mut lc, lp)? as usize;
            let lpayload = &lbytes[lc.position() as usize..];
            if lpayload.len() < lcount {
                return Err(Error::IdxTruncated {
                    path: lp.display().to_string(),
                });
            }
            if lcount != count {
                return Err(Error::IdxCountMismatch {
                    images: count,
                    labels: lcount,
                });
            }
            Some(lpayload[..lcount].iter().map(|&b| b as u32).collect())
        }
    };

    Dataset::new(samples, labels, images_path.display().to_string())
}

/// Load a delimited text file into a dataset.
///
/// Lines starting with `#` and blank lines are skipped. The delimiter is
/// auto-detected (tab if the first data line contains one, comma otherwise),
/// and a single leading header line is recognized by its fields failing to
/// parse as numbers. With `labeled`, the last column holds integer class
/// labels and the rest are features.
pub fn load_csv(path: &Path, labeled: bool) -> Result<Dataset> {
    let text =
        std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let parse_err = |line: usize, reason: String| Error::ParseFile {
        path: path.display().to_string(),
        line,
        reason,
    };

    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<u32> = Vec::new();
    let mut delimiter: Option<char> = None;
    let mut width: Option<usize> = None;
    let mut saw_data_line = false;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let delim = *delimiter.get_or_insert(if line.contains('\t') { '\t' } else { ',' });
        let fields: Vec<&str> = line.split(delim).map(str::trim).collect();

        // Header detection: the first data-ish line may be column names.
        if !saw_data_line && fields.iter().any(|f| f.parse::<f64>().is_err()) {
            saw_data_line = true;
            continue;
        }
        saw_data_line = true;

        let expected = *width.get_or_insert(fields.len());
        if fields.len() != expected {
            return Err(parse_err(
                line_no,
                format!("expected {expected} fields, found {}", fields.len()),
            ));
        }
        let feature_fields = if labeled {
            if fields.len() < 2 {
                return Err(parse_err(
                    line_no,
                    "labeled data needs at least one feature column and one label column".into(),
                ));
            }
            let label_field = fields[fields.len() - 1];
            let label: u32 = label_field
                .parse()
                .map_err(|_| parse_err(line_no, format!("cannot parse label `{label_field}`")))?;
            labels.push(label);
            &fields[..fields.len() - 1]
        } else {
            &fields[..]
        };
        let mut row = Vec::with_capacity(feature_fields.len());
        for f in feature_fields {
            let v: f64 = f
                .parse()
                .map_err(|_| parse_err(line_no, format!("cannot parse number `{f}`")))?;
            row.push(v);
        }
        rows.push(row);
    }

    if rows.is_empty() {
        return Err(Error::InvalidInput(format!(
            "{}: no data rows",
            path.display()
        )));
    }
    let d = rows[0].len();
    let samples = DMatrix::from_row_iterator(rows.len(), d, rows.iter().flatten().copied());
    Dataset::new(
        samples,
        if labeled { Some(labels) } else { None },
        path.display().to_string(),
    )
}

/// Load labels from either an IDX label file or a text file with one integer
/// per line (`#` comments and blank lines skipped). The format is sniffed
/// from the leading bytes.
pub fn load_labels(path: &Path) -> Result<Vec<u32>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    if bytes.len() >= 4 && bytes[..4] == IDX_LABELS_MAGIC.to_be_bytes() {
        let mut cursor = Cursor::new(bytes.as_slice());
        let _ = read_u32(&mut cursor, path)?;
        let count = read_u32(&mut cursor, path)? as usize;
        let payload = &bytes[cursor.position() as usize..];
        if payload.len() < count {
            return Err(Error::IdxTruncated {
                path: path.display().to_string(),
            });
        }
        return Ok(payload[..count].iter().map(|&b| b as u32).collect());
    }
    let text = String::from_utf8(bytes).map_err(|_| Error::ParseFile {
        path: path.display().to_string(),
        line: 0,
        reason: "label file is neither IDX nor UTF-8 text".into(),
    })?;
    let mut labels = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let label: u32 = line.parse().map_err(|_| Error::ParseFile {
            path: path.display().to_string(),
            line: idx + 1,
            reason: format!("cannot parse label `{line}`"),
        })?;
        labels.push(label);
    }
    Ok(labels)
}

/// Load a dataset from either an IDX image file or a delimited text file,
/// sniffing the format from the leading bytes.
///
/// A separate `labels` file (IDX or one-per-line text) always wins; without
/// one, `labeled_csv` reads the last CSV column as labels. IDX inputs carry
/// labels only through the separate file.
pub fn load_auto(path: &Path, labels: Option<&Path>, labeled_csv: bool) -> Result<Dataset> {
    let mut head = [0u8; 4];
    {
        use std::io::Read;
        let mut f =
            std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        let n = f
            .read(&mut head)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        if n < 4 {
            head = [0; 4];
        }
    }
    if head == IDX_IMAGES_MAGIC.to_be_bytes() {
        return load_idx(path, labels);
    }
    let ds = load_csv(path, labeled_csv && labels.is_none())?;
    match labels {
        Some(lp) => ds.with_labels(load_labels(lp)?),
        None => Ok(ds),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(dir: &tempfile::TempDir, name: &str, bytes: &[u8]) -> std::path::PathBuf {
        let path = dir.path().join(name);
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(bytes).unwrap();
        path
    }

    fn idx_images(count: u32, rows: u32, cols: u32, pixels: &[u8]) -> Vec<u8> {
        let mut b = Vec::new();
        for word in [IDX_IMAGES_MAGIC, count, rows, cols] {
            b.extend_from_slice(&word.to_be_bytes());
        }
        b.extend_from_slice(pixels);
        b
    }

    fn idx_labels(labels: &[u8]) -> Vec<u8> {
        let mut b = Vec::new();
        b.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
        b.extend_from_slice(&(labels.len() as u32).to_be_bytes());
        b.extend_from_slice(labels);
        b
    }

    #[test]
    fn idx_round_trip_against_hand_built_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let images = write_file(
            &dir,
            "img.idx",
            &idx_images(2, 2, 2, &[0, 1, 2, 3, 4, 5, 6, 255]),
        );
        let labels = write_file(&dir, "lbl.idx", &idx_labels(&[7, 9]));
        let ds = load_idx(&images, Some(&labels)).unwrap();
        assert_eq!(ds.n(), 2);
        assert_eq!(ds.dim(), 4);
        assert_eq!(ds.row(0), vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(ds.row(1), vec![4.0, 5.0, 6.0, 255.0]);
        assert_eq!(ds.labels(), Some(&[7u32, 9][..]));
        assert_eq!(ds.source(), images.display().to_string());
    }

    #[test]
    fn idx_without_labels() {
        let dir = tempfile::tempdir().unwrap();
        let images = write_file(&dir, "img.idx", &idx_images(1, 1, 3, &[10, 20, 30]));
        let ds = load_idx(&images, None).unwrap();
        assert!(ds.labels().is_none());
        assert!(matches!(ds.labels_required(), Err(Error::MissingLabels)));
    }

    #[test]
    fn idx_rejects_bad_magic() {
        let dir = tempfile::tempdir().unwrap();
        let mut bytes = idx_images(1, 1, 1, &[0]);
        bytes[3] = 0x05;
        let path = write_file(&dir, "bad.idx", &bytes);
        assert!(matches!(
            load_idx(&path, None).unwrap_err(),
            Error::IdxBadMagic { found: 0x0000_0805, .. }
        ));
    }

    #[test]
    fn idx_rejects_truncation_and_trailing_bytes() {
        let dir = tempfile::tempdir().unwrap();
        let short = write_file(&dir, "short.idx", &idx_images(2, 1, 2, &[1, 2, 3]));
        assert!(matches!(
            load_idx(&short, None).unwrap_err(),
            Error::IdxTruncated { .. }
        ));
        let header_only = write_file(&dir, "hdr.idx", &IDX_IMAGES_MAGIC.to_be_bytes());
        assert!(matches!(
            load_idx(&header_only, None).unwrap_err(),
            Error::IdxTruncated { .. }
        ));
        let long = write_file(&dir, "long.idx", &idx_images(1, 1, 2, &[1, 2, 3]));
        assert!(matches!(
            load_idx(&long, None).unwrap_err(),
            Error::InvalidInput(_)
        ));
    }

    #[test]
    fn idx_rejects_label_count_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let images = write_file(&dir, "img.idx", &idx_images(2, 1, 1, &[1, 2]));
        let labels = write_file(&dir, "lbl.idx", &idx_labels(&[1, 2, 3]));
        assert!(matches!(
            load_idx(&images, Some(&labels)).unwrap_err(),
            Error::IdxCountMismatch {
                images: 2,
                labels: 3
            }
        ));
    }

    #[test]
    fn idx_accepts_empty_files() {
        let dir = tempfile::tempdir().unwrap();
        let images = write_file(&dir, "img.idx", &idx_images(0, 28, 28, &[]));
        let labels = write_file(&dir, "lbl.idx", &idx_labels(&[]));
        let ds = load_idx(&images, Some(&labels)).unwrap();
        assert_eq!(ds.n(), 0);
        assert_eq!(ds.dim(), 784);
    }

    #[test]
    fn scaling_maps_endpoints() {
        let ds = Dataset::new(
            DMatrix::from_row_slice(1, 3, &[0.0, 127.5, 255.0]),
            None,
            "test".into(),
        )
        .unwrap();
        let unit = ds.scale_unit();
        assert_eq!(unit.row(0), vec![0.0, 0.5, 1.0]);
        let signed = unit.scale_signed();
        assert_eq!(signed.row(0), vec![-1.0, 0.0, 1.0]);
    }

    fn labeled_dataset() -> Dataset {
        // Labels: 0 at rows 0..10, 1 at rows 10..40, 2 at rows 40..41.
        let n = 41;
        let samples = DMatrix::from_row_iterator(n, 2, (0..n).flat_map(|i| [i as f64, 0.0]));
        let mut labels = vec![0u32; 10];
        labels.extend(vec![1u32; 30]);
        labels.push(2);
        Dataset::new(samples, Some(labels), "synthetic".into()).unwrap()
    }

    #[test]
    fn subset_seed_zero_takes_file_order() {
        let ds = labeled_dataset();
        let sub = ds.subset_by_classes(&[1, 0], 3, 0).unwrap();
        assert_eq!(sub.labels(), Some(&[1, 1, 1, 0, 0, 0][..]));
        // Class-major in the requested order, file order within class.
        let firsts: Vec<f64> = (0..6).map(|i| sub.samples()[(i, 0)]).collect();
        assert_eq!(firsts, vec![10.0, 11.0, 12.0, 0.0, 1.0, 2.0]);
    }

    #[test]
    fn subset_is_deterministic_and_sorted_per_class() {
        let ds = labeled_dataset();
        let a = ds.subset_by_classes(&[0, 1], 5, 42).unwrap();
        let b = ds.subset_by_classes(&[0, 1], 5, 42).unwrap();
        for i in 0..a.n() {
            assert_eq!(a.samples()[(i, 0)].to_bits(), b.samples()[(i, 0)].to_bits());
        }
        assert_eq!(a.labels(), b.labels());
        // Ascending original order within each class block.
        for block in [0..5, 5..10] {
            let vals: Vec<f64> = block.map(|i| a.samples()[(i, 0)]).collect();
            let mut sorted = vals.clone();
            sorted.sort_by(|x, y| x.partial_cmp(y).unwrap());
            assert_eq!(vals, sorted);
        }
        let c = ds.subset_by_classes(&[0, 1], 5, 43).unwrap();
        let same = (0..a.n()).all(|i| a.samples()[(i, 0)] == c.samples()[(i, 0)]);
        assert!(!same, "different seeds picked identical subsets");
    }

    #[test]
    fn take_classes_keeps_every_member() {
        let ds = labeled_dataset();
        let sub = ds.take_classes(&[2, 0]).unwrap();
        assert_eq!(sub.n(), 11);
        assert_eq!(sub.labels().unwrap()[0], 2);
        assert_eq!(sub.samples()[(0, 0)], 40.0);
        assert_eq!(&sub.labels().unwrap()[1..], &[0; 10]);
        assert!(ds.take_classes(&[]).is_err());
    }

    #[test]
    fn subset_rejects_bad_requests() {
        let ds = labeled_dataset();
        assert!(matches!(
            ds.subset_by_classes(&[2], 2, 1).unwrap_err(),
            Error::InsufficientClassSamples {
                label: 2,
                available: 1,
                needed: 2
            }
        ));
        assert!(matches!(
            ds.subset_by_classes(&[], 1, 1).unwrap_err(),
            Error::InvalidInput(_)
        ));
        assert!(matches!(
            ds.subset_by_classes(&[0, 0], 1, 1).unwrap_err(),
            Error::InvalidInput(_)
        ));
        assert!(matches!(
            ds.subset_by_classes(&[0], 0, 1).unwrap_err(),
            Error::InvalidInput(_)
        ));
        let unlabeled = Dataset::new(DMatrix::zeros(2, 2), None, "x".into()).unwrap();
        assert!(matches!(
            unlabeled.subset_by_classes(&[0], 1, 1).unwrap_err(),
            Error::MissingLabels
        ));
    }

    #[test]
    fn load_auto_sniffs_idx_and_csv() {
        let dir = tempfile::tempdir().unwrap();
        let idx = write_file(&dir, "img.idx", &idx_images(1, 1, 2, &[3, 4]));
        let ds = load_auto(&idx, None, false).unwrap();
        assert_eq!(ds.row(0), vec![3.0, 4.0]);

        let csv = write_file(&dir, "d.csv", b"1,2,9\n");
        let labeled = load_auto(&csv, None, true).unwrap();
        assert_eq!(labeled.labels(), Some(&[9u32][..]));
        let unlabeled = load_auto(&csv, None, false).unwrap();
        assert_eq!(unlabeled.dim(), 3);
        assert!(unlabeled.labels().is_none());
    }

    #[test]
    fn separate_label_files_win() {
        let dir = tempfile::tempdir().unwrap();
        let csv = write_file(&dir, "d.csv", b"1,2\n3,4\n");
        let text_labels = write_file(&dir, "l.txt", b"# two labels\n5\n6\n");
        let ds = load_auto(&csv, Some(&text_labels), true).unwrap();
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.labels(), Some(&[5u32, 6][..]));

        let idx_labels_file = write_file(&dir, "l.idx", &idx_labels(&[8, 9]));
        assert_eq!(load_labels(&idx_labels_file).unwrap(), vec![8, 9]);

        let mismatched = write_file(&dir, "l3.txt", b"1\n2\n3\n");
        assert!(matches!(
            load_auto(&csv, Some(&mismatched), false).unwrap_err(),
            Error::LabelCountMismatch { .. }
        ));
        let bad = write_file(&dir, "bad.txt", b"5\nx\n");
        match load_labels(&bad).unwrap_err() {
            Error::ParseFile { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn csv_with_header_and_labels() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            &dir,
            "data.csv",
            b"# produced by a test\nf0,f1,label\n0.5,1.5,2\n-1,2.25,4\n",
        );
        let ds = load_csv(&path, true).unwrap();
        assert_eq!(ds.n(), 2);
        assert_eq!(ds.dim(), 2);
        assert_eq!(ds.row(0), vec![0.5, 1.5]);
        assert_eq!(ds.row(1), vec![-1.0, 2.25]);
        assert_eq!(ds.labels(), Some(&[2u32, 4][..]));
    }

    #[test]
    fn csv_without_header_tab_delimited() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "data.tsv", b"1\t2\t3\n4\t5\t6\n");
        let ds = load_csv(&path, false).unwrap();
        assert_eq!(ds.n(), 2);
        assert_eq!(ds.dim(), 3);
        assert!(ds.labels().is_none());
        assert_eq!(ds.row(1), vec![4.0, 5.0, 6.0]);
    }

    #[test]
    fn csv_reports_line_numbers_on_errors() {
        let dir = tempfile::tempdir().unwrap();
        let ragged = write_file(&dir, "ragged.csv", b"1,2\n3\n");
        match load_csv(&ragged, false).unwrap_err() {
            Error::ParseFile { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
        let bad_label = write_file(&dir, "bad.csv", b"1,2\n3,x\n");
        match load_csv(&bad_label, true).unwrap_err() {
            Error::ParseFile { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected error {other:?}"),
        }
        let empty = write_file(&dir, "empty.csv", b"# nothing\n");
        assert!(matches!(
            load_csv(&empty, false).unwrap_err(),
            Error::InvalidInput(_)
        ));
    }

    #[test]
    fn csv_bad_number_names_the_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(&dir, "bad.csv", b"a,b\n1,2\nx,4\n");
        match load_csv(&path, false).unwrap_err() {
            Error::ParseFile { line, reason, .. } => {
                assert_eq!(line, 3);
                assert!(reason.contains('x'));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }
}
