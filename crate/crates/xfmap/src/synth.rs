//! Synthetic 28x28 digit images for tests and demos.
//!
//! Each class is a fixed stroke pattern (bars and diagonals on the 28x28
//! grid); samples vary by a per-image intensity draw, per-pixel jitter on the
//! strokes, and sparse background speckle. Classes 2, 4 and 7 get shapes
//! loosely resembling those digits; any other label falls back to a vertical
//! bar whose position depends on the label. Pixels are returned as whole
//! numbers in `0..=255`, matching what an IDX file would hold.
//!
//! Generation is class-major from a single seeded generator, so a given
//! `(classes, per_class, seed)` triple always produces bit-identical data.

use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::{Dataset, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC};
use crate::error::{Error, Result};

const SIDE: usize = 28;
const DIM: usize = SIDE * SIDE;

/// Stroke pixels for one class, as a boolean image.
fn stroke_mask(label: u32) -> [bool; DIM] {
    let mut img = [false; DIM];
    let mut fill = |r0: usize, r1: usize, c0: usize, c1: usize| {
        for r in r0..r1 {
            for c in c0..c1 {
                img[r * SIDE + c] = true;
            }
        }
    };
    match label {
        2 => {
            fill(5, 8, 6, 22);
            for i in 0..14 {
                let r = 8 + i;
                let c = 20 - i;
                fill(r, r + 1, c - 1, c + 2);
            }
            fill(21, 24, 6, 22);
        }
        4 => {
            fill(4, 16, 7, 10);
            fill(4, 24, 17, 20);
            fill(13, 16, 7, 20);
        }
        7 => {
            fill(4, 7, 6, 22);
            for i in 0..17 {
                let r = 7 + i;
                let c = 19 - (i * 10) / 17;
                fill(r, r + 1, c - 1, c + 2);
            }
        }
        other => {
            let c = 3 + (other as usize * 2) % 20;
            fill(5, 23, c, c + 3);
        }
    }
    img
}

/// Generate `per_class` images for each listed class, class-major.
pub fn digits(classes: &[u32], per_class: usize, seed: u64) -> Result<Dataset> {
    let n = classes.len() * per_class;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = DMatrix::zeros(n, DIM);
    let mut labels = Vec::with_capacity(n);
    let mut row = 0;
    for &class in classes {
        let mask = stroke_mask(class);
        for _ in 0..per_class {
            let intensity: f64 = rng.random_range(0.35..1.0);
            let mut pix = [0.0f64; DIM];
            for (p, pv) in pix.iter_mut().enumerate() {
                if mask[p] {
                    let jitter: f64 = rng.random_range(-0.15..0.15);
                    *pv = (intensity + jitter).clamp(0.0, 1.0);
                }
            }
            for (p, pv) in pix.iter_mut().enumerate() {
                if !mask[p] && rng.random_bool(0.02) {
                    *pv = rng.random_range(0.2..0.9);
                }
            }
            for (j, &v) in pix.iter().enumerate() {
                samples[(row, j)] = (v * 255.0).round();
            }
            labels.push(class);
            row += 1;
        }
    }
    Dataset::new(
        samples,
        Some(labels),
        format!("synthetic digits seed={seed}"),
    )
}

/// Write a dataset as IDX image and (optionally) label files.
///
/// Values must be whole numbers in `0..=255` and the sample dimension must
/// equal `rows * cols`.
pub fn write_idx(
    dataset: &Dataset,
    images_path: &Path,
    labels_path: Option<&Path>,
    rows: usize,
    cols: usize,
) -> Result<()> {
    if rows * cols != dataset.dim() {
        return Err(Error::DimensionMismatch {
            context: "idx image shape",
            expected: dataset.dim(),
            got: rows * cols,
        });
    }
    let labels = match labels_path {
        Some(_) => Some(dataset.labels_required()?),
        None => None,
    };

    let io_err = |path: &Path, e| Error::io(path.display().to_string(), e);
    let file = std::fs::File::create(images_path).map_err(|e| io_err(images_path, e))?;
    let mut w = BufWriter::new(file);
    let mut header = Vec::with_capacity(16);
    for word in [
        IDX_IMAGES_MAGIC,
        dataset.n() as u32,
        rows as u32,
        cols as u32,
    ] {
        header.extend_from_slice(&word.to_be_bytes());
    }
    w.write_all(&header).map_err(|e| io_err(images_path, e))?;
    for i in 0..dataset.n() {
        let mut bytes = Vec::with_capacity(dataset.dim());
        for j in 0..dataset.dim() {
            let v = dataset.samples()[(i, j)];
            if !(0.0..=255.0).contains(&v) || v.fract() != 0.0 {
                return Err(Error::InvalidInput(format!(
                    "sample {i} pixel {j} is {v}, expected a whole number in 0..=255"
                )));
            }
            bytes.push(v as u8);
        }
        w.write_all(&bytes).map_err(|e| io_err(images_path, e))?;
    }
    w.flush().map_err(|e| io_err(images_path, e))?;

    if let (Some(lp), Some(labels)) = (labels_path, labels) {
        let file = std::fs::File::create(lp).map_err(|e| io_err(lp, e))?;
        let mut w = BufWriter::new(file);
        let mut out = Vec::with_capacity(8 + labels.len());
        out.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
        out.extend_from_slice(&(labels.len() as u32).to_be_bytes());
        for (i, &l) in labels.iter().enumerate() {
            if l > 255 {
                return Err(Error::InvalidInput(format!(
                    "label {l} at sample {i} does not fit in one byte"
                )));
            }
            out.push(l as u8);
        }
        w.write_all(&out).map_err(|e| io_err(lp, e))?;
        w.flush().map_err(|e| io_err(lp, e))?;
    }
    Ok(())
}
