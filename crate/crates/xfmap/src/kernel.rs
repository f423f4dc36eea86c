//! Kernel functions and Gram matrices.
//!
//! A kernel is described by a [`KernelSpec`], a small value object that can be
//! parsed from and rendered to a `key=value` text form (used on the command
//! line and inside model archives). Evaluation is symmetric by construction:
//! the two arguments are put into lexicographic order before any arithmetic,
//! so `eval(x, z)` and `eval(z, x)` return bit-identical results and Gram
//! matrices are exactly symmetric.
//!
//! Two kernels are specific to 28x28 grayscale digit data scaled to `[0, 1]`
//! (784 inputs). `mnist_k1` is a ninth-degree polynomial in the mean-scaled
//! dot product. `mnist_k2` first maps pixels to `[-1, 1]` and applies an
//! inhomogeneous ninth-degree polynomial, scaled so that the similarity of a
//! binary image with itself is exactly 1 and with its complement exactly 0.
//! Both reject inputs outside `[0, 1]` rather than clamping them.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fingerprint::matrix_fingerprint;

/// Input dimension required by the digit-image kernels.
pub const MNIST_DIM: usize = 784;

/// A fully parameterized kernel function.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    /// `k(x, z) = <x, z>`
    Linear,
    /// `k(x, z) = (scale * <x, z> + offset)^degree`
    Polynomial { scale: f64, offset: f64, degree: u32 },
    /// `k(x, z) = exp(-|x - z|^2 / (2 sigma^2))`
    Gaussian { sigma: f64 },
    /// `k(x, z) = exp(-gamma * |x - z|_1)` (L1 distance)
    Laplacian { gamma: f64 },
    /// `k(x, z) = (<x, z> / 784)^9` on `[0, 1]` pixel vectors.
    MnistK1,
    /// `k(x, z) = (<2x - 1, 2z - 1> + 1)^9 / 512` with the mean-scaled dot
    /// product `<a, b> = (1/784) sum a_i b_i`, on `[0, 1]` pixel vectors.
    MnistK2,
}

impl KernelSpec {
    /// Short machine name of the kernel kind.
    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::Linear => "linear",
            KernelSpec::Polynomial { .. } => "polynomial",
            KernelSpec::Gaussian { .. } => "gaussian",
            KernelSpec::Laplacian { .. } => "laplacian",
            KernelSpec::MnistK1 => "mnist_k1",
            KernelSpec::MnistK2 => "mnist_k2",
        }
    }

    /// Check parameter ranges.
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Polynomial {
                scale,
                offset,
                degree,
            } => {
                if !scale.is_finite() || !offset.is_finite() {
                    return Err(Error::InvalidKernel(
                        "polynomial scale and offset must be finite".into(),
                    ));
                }
                if degree < 1 {
                    return Err(Error::InvalidKernel(
                        "polynomial degree must be at least 1".into(),
                    ));
                }
            }
            KernelSpec::Gaussian { sigma } => {
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(Error::InvalidKernel("gaussian sigma must be positive".into()));
                }
            }
            KernelSpec::Laplacian { gamma } => {
                if !(gamma.is_finite() && gamma > 0.0) {
                    return Err(Error::InvalidKernel(
                        "laplacian gamma must be positive".into(),
                    ));
                }
            }
            KernelSpec::Linear | KernelSpec::MnistK1 | KernelSpec::MnistK2 => {}
        }
        Ok(())
    }

    /// Check one sample against the kernel's input contract.
    ///
    /// The digit kernels require exactly [`MNIST_DIM`] entries, all inside
    /// `[0, 1]`; out-of-range values are an error, never clamped. Other
    /// kernels accept any dimension.
    pub fn validate_sample(&self, x: &[f64]) -> Result<()> {
        match self {
            KernelSpec::MnistK1 | KernelSpec::MnistK2 => {
                if x.len() != MNIST_DIM {
                    return Err(Error::DimensionMismatch {
                        context: "digit kernel input",
                        expected: MNIST_DIM,
                        got: x.len(),
                    });
                }
                for (index, &value) in x.iter().enumerate() {
                    if !(0.0..=1.0).contains(&value) {
                        return Err(Error::PixelRange { index, value });
                    }
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Evaluate the kernel on a pair of points.
    pub fn eval(&self, x: &[f64], z: &[f64]) -> Result<f64> {
        if x.len() != z.len() {
            return Err(Error::DimensionMismatch {
                context: "kernel eval",
                expected: x.len(),
                got: z.len(),
            });
        }
        self.validate_sample(x)?;
        self.validate_sample(z)?;
        Ok(self.eval_unchecked(x, z))
    }

    /// Evaluation without input validation; callers must have validated both
    /// points. Arguments are order-normalized first, which makes the result
    /// invariant to argument order down to the last bit.
    pub(crate) fn eval_unchecked(&self, x: &[f64], z: &[f64]) -> f64 {
        let (a, b) = ordered(x, z);
        match *self {
            KernelSpec::Linear => dot(a, b),
            KernelSpec::Polynomial {
                scale,
                offset,
                degree,
            } => (scale * dot(a, b) + offset).powi(degree as i32),
            KernelSpec::Gaussian { sigma } => (-sq_dist(a, b) / (2.0 * sigma * sigma)).exp(),
            KernelSpec::Laplacian { gamma } => (-gamma * l1_dist(a, b)).exp(),
            KernelSpec::MnistK1 => (dot(a, b) / MNIST_DIM as f64).powi(9),
            KernelSpec::MnistK2 => {
                let mut acc = 0.0;
                for (p, q) in a.iter().zip(b) {
                    acc += (2.0 * p - 1.0) * (2.0 * q - 1.0);
                }
                ((acc / MNIST_DIM as f64 + 1.0).powi(9)) / 512.0
            }
        }
    }

    /// Vector of similarities `[k(x_1, z), ..., k(x_n, z)]` against the rows
    /// of `train`.
    pub fn kernel_vector(&self, train: &DMatrix<f64>, z: &[f64]) -> Result<DVector<f64>> {
        let rows = SampleRows::from_matrix(train);
        self.validate_rows(&rows)?;
        self.kernel_vector_rows(&rows, z)
    }

    /// As [`KernelSpec::kernel_vector`] but over pre-validated rows.
    pub(crate) fn kernel_vector_rows(&self, rows: &SampleRows, z: &[f64]) -> Result<DVector<f64>> {
        if z.len() != rows.dim() {
            return Err(Error::DimensionMismatch {
                context: "kernel vector probe",
                expected: rows.dim(),
                got: z.len(),
            });
        }
        self.validate_sample(z)?;
        Ok(DVector::from_iterator(
            rows.len(),
            (0..rows.len()).map(|i| self.eval_unchecked(rows.row(i), z)),
        ))
    }

    /// Gram matrix of the rows of `train`.
    ///
    /// Only the upper triangle is evaluated; the lower triangle is mirrored,
    /// so the result is exactly symmetric. Rows are processed in parallel but
    /// every entry comes from the same scalar evaluation, so the output is
    /// identical run to run.
    pub fn gram(&self, train: &DMatrix<f64>) -> Result<GramMatrix> {
        if train.nrows() == 0 {
            return Err(Error::InvalidInput("gram of an empty training set".into()));
        }
        let rows = SampleRows::from_matrix(train);
        self.validate_rows(&rows)?;
        let n = rows.len();
        let upper: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| {
                let xi = rows.row(i);
                (i..n).map(|j| self.eval_unchecked(xi, rows.row(j))).collect()
            })
            .collect();
        let mut values = DMatrix::zeros(n, n);
        for (i, row) in upper.iter().enumerate() {
            for (offset, &v) in row.iter().enumerate() {
                let j = i + offset;
                values[(i, j)] = v;
                values[(j, i)] = v;
            }
        }
        Ok(GramMatrix {
            values,
            kernel: self.clone(),
            dataset_fingerprint: matrix_fingerprint(train),
        })
    }

    /// Squared distance between the images of `x` and `z` in the kernel's
    /// feature space: `k(x,x) + k(z,z) - 2 k(x,z)`, floored at zero to absorb
    /// round-off.
    pub fn feature_distance(&self, x: &[f64], z: &[f64]) -> Result<f64> {
        let kxx = self.eval(x, x)?;
        let kzz = self.eval(z, z)?;
        let kxz = self.eval(x, z)?;
        Ok((kxx + kzz - 2.0 * kxz).max(0.0))
    }

    fn validate_rows(&self, rows: &SampleRows) -> Result<()> {
        for i in 0..rows.len() {
            let row = rows.row(i);
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite {
                    context: "kernel input matrix",
                });
            }
            self.validate_sample(row)?;
        }
        Ok(())
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            KernelSpec::Linear => write!(f, "kind=linear"),
            KernelSpec::Polynomial {
                scale,
                offset,
                degree,
            } => write!(f, "kind=polynomial scale={scale} offset={offset} degree={degree}"),
            KernelSpec::Gaussian { sigma } => write!(f, "kind=gaussian sigma={sigma}"),
            KernelSpec::Laplacian { gamma } => write!(f, "kind=laplacian gamma={gamma}"),
            KernelSpec::MnistK1 => write!(f, "kind=mnist_k1"),
            KernelSpec::MnistK2 => write!(f, "kind=mnist_k2"),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = Error;

    fn from_str(input: &str) -> Result<Self> {
        let parse_err = |reason: String| Error::KernelParse {
            input: input.to_string(),
            reason,
        };
        let mut kind: Option<&str> = None;
        let mut params: Vec<(&str, &str)> = Vec::new();
        for token in input.split_whitespace() {
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| parse_err(format!("token `{token}` is not key=value")))?;
            if key == "kind" {
                if kind.replace(value).is_some() {
                    return Err(parse_err("duplicate kind".into()));
                }
            } else {
                if params.iter().any(|(k, _)| *k == key) {
                    return Err(parse_err(format!("duplicate parameter `{key}`")));
                }
                params.push((key, value));
            }
        }
        let kind = kind.ok_or_else(|| parse_err("missing kind".into()))?;

        let mut take = |name: &str| -> Result<&str> {
            match params.iter().position(|(k, _)| *k == name) {
                Some(pos) => Ok(params.remove(pos).1),
                None => Err(parse_err(format!("missing parameter `{name}`"))),
            }
        };
        let spec = match kind {
            "linear" => KernelSpec::Linear,
            "polynomial" => {
                let scale = parse_f64(take("scale")?, input)?;
                let offset = parse_f64(take("offset")?, input)?;
                let degree = take("degree")?
                    .parse::<u32>()
                    .map_err(|e| parse_err(format!("degree: {e}")))?;
                KernelSpec::Polynomial {
                    scale,
                    offset,
                    degree,
                }
            }
            "gaussian" => KernelSpec::Gaussian {
                sigma: parse_f64(take("sigma")?, input)?,
            },
            "laplacian" => KernelSpec::Laplacian {
                gamma: parse_f64(take("gamma")?, input)?,
            },
            "mnist_k1" => KernelSpec::MnistK1,
            "mnist_k2" => KernelSpec::MnistK2,
            other => return Err(parse_err(format!("unknown kind `{other}`"))),
        };
        if let Some((key, _)) = params.first() {
            return Err(parse_err(format!("unknown parameter `{key}`")));
        }
        spec.validate()?;
        Ok(spec)
    }
}

fn parse_f64(value: &str, input: &str) -> Result<f64> {
    value.parse::<f64>().map_err(|e| Error::KernelParse {
        input: input.to_string(),
        reason: format!("`{value}`: {e}"),
    })
}

/// Lexicographic order normalization: returns the pair in a canonical order
/// so symmetric evaluation is bit-exact.
fn ordered<'a>(x: &'a [f64], z: &'a [f64]) -> (&'a [f64], &'a [f64]) {
    for (a, b) in x.iter().zip(z) {
        if a < b {
            return (x, z);
        }
        if a > b {
            return (z, x);
        }
    }
    (x, z)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(p, q)| {
            let d = p - q;
            d * d
        })
        .sum()
}

fn l1_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).sum()
}

/// A Gram matrix together with the kernel and data identity that produced it.
#[derive(Debug, Clone)]
pub struct GramMatrix {
    values: DMatrix<f64>,
    kernel: KernelSpec,
    dataset_fingerprint: String,
}

impl GramMatrix {
    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn dataset_fingerprint(&self) -> &str {
        &self.dataset_fingerprint
    }
}

/// Row-major copy of a sample matrix so each sample is a contiguous slice.
/// Column-major matrix storage makes row access strided, which is exactly
/// wrong for kernels evaluated per sample pair.
#[derive(Debug, Clone)]
pub(crate) struct SampleRows {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl SampleRows {
    pub fn from_matrix(m: &DMatrix<f64>) -> Self {
        let (n, d) = (m.nrows(), m.ncols());
        let mut data = Vec::with_capacity(n * d);
        for i in 0..n {
            for j in 0..d {
                data.push(m[(i, j)]);
            }
        }
        SampleRows { data, n, d }
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.d
    }
}
