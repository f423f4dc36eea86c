//! Multi-class Fisher discriminant analysis on explicit feature vectors.
//!
//! Scatter matrices over a labeled feature matrix (one sample per row):
//!
//! ```text
//! S_W = sum_c sum_{i in c} (x_i - m_c)(x_i - m_c)^T      within-class
//! S_B = sum_c n_c (m_c - m)(m_c - m)^T                    between-class
//! ```
//!
//! Directions maximizing `w^T S_B w / w^T (S_W + gamma I) w` are found by
//! whitening: with `W = (S_W + gamma I)^(-1/2)` the problem becomes an
//! ordinary symmetric eigenproblem for `W S_B W`, and each eigenvector `y`
//! yields a direction `w = W y`. At most `k - 1` discriminants carry
//! information for `k` classes.
//!
//! When the features come from an explicit kernel feature map, their
//! dimension equals the number of training points, and `S_W` is always
//! singular; the ridge `gamma` (default `1e-6 trace(S_W) / n`) and the
//! pseudo-inverse semantics of the spectral layer keep the whitening defined.
//! An explicit `gamma = 0` on singular scatter is refused.
//!
//! Samples are accumulated in an order canonicalized by class label and row
//! content, never in input order, so permuting the samples yields
//! bit-identical directions.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::spectral::{sym_eigen, SpectralFn};
use crate::textio::{read_to_string, ArchiveReader, ArchiveWriter};

const MAGIC: &str = "FDA1";

/// Ridge factor for the default regularization.
pub const DEFAULT_REG_SCALE: f64 = 1e-6;

/// A fitted Fisher discriminant model with a nearest-class-mean classifier.
#[derive(Debug, Clone)]
pub struct FisherModel {
    /// One column per discriminant direction, `d x q`.
    directions: DMatrix<f64>,
    /// Discriminant ratios of the solved eigenproblem, descending.
    eigenvalues: Vec<f64>,
    /// Class labels, ascending.
    class_labels: Vec<u32>,
    /// Projected class means, one row per class, `k x q`.
    class_means: DMatrix<f64>,
    reg_gamma: f64,
}

/// Prediction tallies from [`FisherModel::report`].
#[derive(Debug, Clone)]
pub struct ClassificationReport {
    pub total: usize,
    pub correct: usize,
    /// `(label, samples, correct)` sorted by label.
    pub per_class: Vec<(u32, usize, usize)>,
}

impl ClassificationReport {
    pub fn accuracy(&self) -> f64 {
        if self.total == 0 {
            return 0.0;
        }
        self.correct as f64 / self.total as f64
    }
}

/// The default ridge `1e-6 trace(S_W) / n`.
pub fn default_reg_gamma(features: &DMatrix<f64>, labels: &[u32]) -> Result<f64> {
    let groups = class_groups(features, labels)?;
    let n = features.nrows();
    let d = features.ncols();
    let mut trace = 0.0;
    for indices in groups.values() {
        let mean = class_mean(features, indices);
        for &i in indices {
            for j in 0..d {
                let diff = features[(i, j)] - mean[j];
                trace += diff * diff;
            }
        }
    }
    Ok(DEFAULT_REG_SCALE * trace / n as f64)
}

/// Sorted label -> canonically ordered row indices. Within a class, rows are
/// sorted by content (ties by original index), which fixes every later
/// accumulation order independently of input order.
fn class_groups(features: &DMatrix<f64>, labels: &[u32]) -> Result<BTreeMap<u32, Vec<usize>>> {
    let n = features.nrows();
    if labels.len() != n {
        return Err(Error::LabelCountMismatch {
            labels: labels.len(),
            samples: n,
        });
    }
    if n == 0 {
        return Err(Error::InvalidInput("empty feature matrix".into()));
    }
    if features.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "fisher feature matrix",
        });
    }
    let mut groups: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for (i, &label) in labels.iter().enumerate() {
        groups.entry(label).or_default().push(i);
    }
    let d = features.ncols();
    let compare_rows = |&a: &usize, &b: &usize| -> Ordering {
        for j in 0..d {
            match features[(a, j)].partial_cmp(&features[(b, j)]) {
                Some(Ordering::Equal) | None => continue,
                Some(other) => return other,
            }
        }
        Ordering::Equal
    };
    for indices in groups.values_mut() {
        indices.sort_by(compare_rows);
    }
    Ok(groups)
}

fn class_mean(features: &DMatrix<f64>, indices: &[usize]) -> DVector<f64> {
    let d = features.ncols();
    let mut sum = DVector::zeros(d);
    for &i in indices {
        for j in 0..d {
            sum[j] += features[(i, j)];
        }
    }
    sum / indices.len() as f64
}

impl FisherModel {
    /// Fit `q` discriminant directions. `reg_gamma` of `None` selects the
    /// default ridge; an explicit `Some(0.0)` demands exactly invertible
    /// within-class scatter and fails otherwise.
    pub fn fit(
        features: &DMatrix<f64>,
        labels: &[u32],
        q: usize,
        reg_gamma: Option<f64>,
    ) -> Result<Self> {
        let groups = class_groups(features, labels)?;
        let k = groups.len();
        if k < 2 {
            return Err(Error::SingleClass { found: k });
        }
        if q == 0 {
            return Err(Error::InvalidInput(
                "number of discriminants must be at least 1".into(),
            ));
        }
        if q > k - 1 {
            return Err(Error::TooManyComponents {
                requested: q,
                available: k - 1,
            });
        }
        let gamma = match reg_gamma {
            Some(g) if g >= 0.0 && g.is_finite() => g,
            Some(g) => {
                return Err(Error::InvalidInput(format!(
                    "reg_gamma must be finite and non-negative, got {g}"
                )))
            }
            None => default_reg_gamma(features, labels)?,
        };

        let n = features.nrows();
        let d = features.ncols();

        // Class means and the global mean, accumulated in canonical order.
        let mut class_means_full: Vec<(u32, DVector<f64>, usize)> = Vec::with_capacity(k);
        let mut global_sum = DVector::zeros(d);
        for (&label, indices) in &groups {
            let mean = class_mean(features, indices);
            global_sum += &mean * indices.len() as f64;
            class_means_full.push((label, mean, indices.len()));
        }
        let global_mean = global_sum / n as f64;

        // S_W as a sum of per-class Gram products of centered rows.
        let mut s_w = DMatrix::<f64>::zeros(d, d);
        for (&_label, indices) in &groups {
            let mean = class_mean(features, indices);
            let mut centered = DMatrix::zeros(indices.len(), d);
            for (r, &i) in indices.iter().enumerate() {
                for j in 0..d {
                    centered[(r, j)] = features[(i, j)] - mean[j];
                }
            }
            s_w += centered.transpose() * &centered;
        }

        // S_B through scaled mean deviations: rows sqrt(n_c) (m_c - m).
        let mut deviations = DMatrix::zeros(k, d);
        for (c, (_, mean, count)) in class_means_full.iter().enumerate() {
            let scale = (*count as f64).sqrt();
            for j in 0..d {
                deviations[(c, j)] = scale * (mean[j] - global_mean[j]);
            }
        }
        let s_b = deviations.transpose() * &deviations;

        let mut regularized = s_w.clone();
        for i in 0..d {
            regularized[(i, i)] += gamma;
        }
        let decomp_a = sym_eigen(&regularized)?;
        if gamma == 0.0 && decomp_a.effective_rank() < d {
            return Err(Error::SingularScatter);
        }
        let whitener = decomp_a.apply(SpectralFn::InvSqrt, true)?;
        let whitened_between = &whitener * &s_b * &whitener;
        let decomp_m = sym_eigen(&whitened_between)?;

        let mut directions = DMatrix::zeros(d, q);
        let mut eigenvalues = Vec::with_capacity(q);
        for j in 0..q {
            eigenvalues.push(decomp_m.eigenvalues()[j]);
            let y = decomp_m.eigenvectors().column(j);
            directions.set_column(j, &(&whitener * y));
        }

        let mut class_labels = Vec::with_capacity(k);
        let mut class_means = DMatrix::zeros(k, q);
        for (c, (label, mean, _)) in class_means_full.iter().enumerate() {
            class_labels.push(*label);
            for j in 0..q {
                class_means[(c, j)] = directions.column(j).dot(mean);
            }
        }

        Ok(FisherModel {
            directions,
            eigenvalues,
            class_labels,
            class_means,
            reg_gamma: gamma,
        })
    }

    /// Feature dimension the model expects.
    pub fn feature_dim(&self) -> usize {
        self.directions.nrows()
    }

    /// Number of discriminant directions.
    pub fn components(&self) -> usize {
        self.directions.ncols()
    }

    pub fn directions(&self) -> &DMatrix<f64> {
        &self.directions
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn class_labels(&self) -> &[u32] {
        &self.class_labels
    }

    /// Projected class means, aligned with [`Self::class_labels`].
    pub fn class_means(&self) -> &DMatrix<f64> {
        &self.class_means
    }

    pub fn reg_gamma(&self) -> f64 {
        self.reg_gamma
    }

    /// Project one feature vector into discriminant coordinates.
    pub fn transform(&self, features_row: &[f64]) -> Result<DVector<f64>> {
        let d = self.feature_dim();
        if features_row.len() != d {
            return Err(Error::DimensionMismatch {
                context: "fisher transform",
                expected: d,
                got: features_row.len(),
            });
        }
        let q = self.components();
        Ok(DVector::from_iterator(
            q,
            (0..q).map(|j| {
                let mut acc = 0.0;
                for (i, &v) in features_row.iter().enumerate() {
                    acc += self.directions[(i, j)] * v;
                }
                acc
            }),
        ))
    }

    /// Project every row of a feature matrix.
    pub fn transform_matrix(&self, features: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let q = self.components();
        let mut out = DMatrix::zeros(features.nrows(), q);
        let mut row = vec![0.0; features.ncols()];
        for i in 0..features.nrows() {
            for j in 0..features.ncols() {
                row[j] = features[(i, j)];
            }
            let t = self.transform(&row)?;
            for j in 0..q {
                out[(i, j)] = t[j];
            }
        }
        Ok(out)
    }

    /// Classify by the nearest projected class mean. Distance ties resolve
    /// to the smallest label (class labels are kept sorted).
    pub fn nearest_class_mean(&self, features_row: &[f64]) -> Result<u32> {
        let projected = self.transform(features_row)?;
        let q = self.components();
        let mut best_label = self.class_labels[0];
        let mut best_dist = f64::INFINITY;
        for (c, &label) in self.class_labels.iter().enumerate() {
            let mut dist = 0.0;
            for j in 0..q {
                let diff = projected[j] - self.class_means[(c, j)];
                dist += diff * diff;
            }
            if dist < best_dist {
                best_dist = dist;
                best_label = label;
            }
        }
        Ok(best_label)
    }

    /// Classify every row and tally against the given true labels.
    pub fn report(&self, features: &DMatrix<f64>, labels: &[u32]) -> Result<ClassificationReport> {
        let n = features.nrows();
        if labels.len() != n {
            return Err(Error::LabelCountMismatch {
                labels: labels.len(),
                samples: n,
            });
        }
        let mut tallies: BTreeMap<u32, (usize, usize)> = BTreeMap::new();
        let mut correct = 0;
        let mut row = vec![0.0; features.ncols()];
        for i in 0..n {
            for j in 0..features.ncols() {
                row[j] = features[(i, j)];
            }
            let predicted = self.nearest_class_mean(&row)?;
            let entry = tallies.entry(labels[i]).or_insert((0, 0));
            entry.0 += 1;
            if predicted == labels[i] {
                entry.1 += 1;
                correct += 1;
            }
        }
        Ok(ClassificationReport {
            total: n,
            correct,
            per_class: tallies
                .into_iter()
                .map(|(label, (total, correct))| (label, total, correct))
                .collect(),
        })
    }

    /// Fraction of rows classified correctly.
    pub fn accuracy(&self, features: &DMatrix<f64>, labels: &[u32]) -> Result<f64> {
        Ok(self.report(features, labels)?.accuracy())
    }

    /// Write the model to a text archive.
    pub fn save(&self, path: &Path) -> Result<()> {
        self.save_with_comments(path, &[])
    }

    /// Write the model with extra provenance comment lines (for example the
    /// kernel and data fingerprint of the features it was fitted on).
    pub fn save_with_comments(&self, path: &Path, extra_comments: &[String]) -> Result<()> {
        let d = self.feature_dim();
        let q = self.components();
        let k = self.class_labels.len();
        let mut w = ArchiveWriter::create(path)?;
        w.line(MAGIC)?;
        w.comment(&format!("xfmap {}", crate::VERSION))?;
        for comment in extra_comments {
            w.comment(comment)?;
        }
        w.line(&format!("reg_gamma {}", self.reg_gamma))?;
        w.line(&format!("feature_dim {d}"))?;
        w.line(&format!("components {q}"))?;
        w.line(&format!("eigenvalues {q}"))?;
        w.floats(self.eigenvalues.iter().copied())?;
        w.line(&format!(
            "labels {}",
            self.class_labels
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(" ")
        ))?;
        w.line(&format!("directions {q} {d}"))?;
        w.matrix_rows(&self.directions.transpose())?;
        w.line(&format!("class_means {k} {q}"))?;
        w.matrix_rows(&self.class_means)?;
        w.finish()
    }

    /// Load a model saved by [`FisherModel::save`].
    pub fn load(path: &Path) -> Result<Self> {
        let content = read_to_string(path)?;
        let mut r = ArchiveReader::new(path.display().to_string(), &content);
        r.expect_magic(MAGIC)?;
        let reg_gamma: f64 = r.tagged_value("reg_gamma")?;
        let d: usize = r.tagged_value("feature_dim")?;
        let q: usize = r.tagged_value("components")?;
        let q_eig: usize = r.tagged_value("eigenvalues")?;
        if q_eig != q {
            return Err(r.error(format!("eigenvalue count {q_eig} does not match q={q}")));
        }
        let eigenvalues = r.floats_line(q)?;
        let class_labels: Vec<u32> = r.tagged_values("labels")?;
        if class_labels.windows(2).any(|w| w[0] >= w[1]) {
            return Err(r.error("class labels must be strictly ascending"));
        }
        let dims: Vec<usize> = r.tagged_values("directions")?;
        if dims != [q, d] {
            return Err(r.error("directions header must carry q and feature_dim"));
        }
        let directions_t = r.matrix(q, d)?;
        let dims: Vec<usize> = r.tagged_values("class_means")?;
        if dims != [class_labels.len(), q] {
            return Err(r.error("class_means header must carry k and q"));
        }
        let class_means = r.matrix(class_labels.len(), q)?;
        r.end()?;
        Ok(FisherModel {
            directions: directions_t.transpose(),
            eigenvalues,
            class_labels,
            class_means,
            reg_gamma,
        })
    }
}
