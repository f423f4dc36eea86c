//! Symmetric eigendecomposition and spectral matrix functions.
//!
//! Everything downstream (feature maps, kernel PCA, Fisher analysis) is built
//! on one primitive: decompose a symmetric matrix, then rebuild it with a
//! function applied to the spectrum. Rank deficiency is handled with
//! pseudo-inverse semantics: eigenvalues at or below a cutoff are treated as
//! exactly zero and contribute nothing, whatever the function.
//!
//! Determinism contract: the same input matrix always yields bit-identical
//! eigenvalues and eigenvectors. Eigenpairs are sorted by eigenvalue in
//! descending order with a stable sort, and each eigenvector's sign is fixed
//! by requiring its largest-magnitude entry (lowest index on ties) to be
//! positive.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Relative tolerance for accepting a matrix as symmetric.
pub const SYMMETRY_TOL_REL: f64 = 1e-8;
/// Relative tolerance below which negative eigenvalues count as round-off.
pub const PSD_TOL_REL: f64 = 1e-8;
/// Relative factor for the default rank cutoff.
pub const DEFAULT_CUTOFF_REL: f64 = 1e-10;

/// Function applied to each retained eigenvalue when rebuilding a matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectralFn {
    /// `sqrt(lambda)`: matrix square root.
    Sqrt,
    /// `1 / sqrt(lambda)`: inverse square root.
    InvSqrt,
    /// `1 / lambda`: (pseudo-)inverse.
    Inv,
}

impl SpectralFn {
    fn apply(self, lambda: f64) -> f64 {
        match self {
            SpectralFn::Sqrt => lambda.sqrt(),
            SpectralFn::InvSqrt => 1.0 / lambda.sqrt(),
            SpectralFn::Inv => 1.0 / lambda,
        }
    }
}

/// Eigendecomposition of a symmetric matrix, sorted and sign-normalized.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<f64>,
    cutoff: f64,
}

/// Decompose with the default rank cutoff `1e-10 * max(1, lambda_max)`.
pub fn sym_eigen(s: &DMatrix<f64>) -> Result<SpectralDecomposition> {
    sym_eigen_with_cutoff(s, None)
}

/// Decompose a symmetric matrix.
///
/// The input must be square, finite, and symmetric within `1e-8` relative to
/// its largest entry; it is symmetrized as `(S + S^T) / 2` before the solve so
/// harmless round-off asymmetry cannot leak into the result. A convergence
/// failure of the iterative solver is reported as an error, never as a
/// partial result.
pub fn sym_eigen_with_cutoff(
    s: &DMatrix<f64>,
    cutoff: Option<f64>,
) -> Result<SpectralDecomposition> {
    let n = s.nrows();
    if n != s.ncols() {
        return Err(Error::NotSquare {
            rows: s.nrows(),
            cols: s.ncols(),
        });
    }
    if n == 0 {
        return Err(Error::InvalidInput("eigendecomposition of a 0x0 matrix".into()));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite {
            context: "symmetric eigendecomposition input",
        });
    }

    let mut scale: f64 = 0.0;
    let mut deviation: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            scale = scale.max(s[(i, j)].abs());
            deviation = deviation.max((s[(i, j)] - s[(j, i)]).abs());
        }
    }
    if deviation > SYMMETRY_TOL_REL * scale.max(1.0) {
        return Err(Error::NotSymmetric { deviation });
    }
    let symmetrized = DMatrix::from_fn(n, n, |i, j| 0.5 * (s[(i, j)] + s[(j, i)]));

    let max_iterations = 100 * n.max(10);
    let eigen = SymmetricEigen::try_new(symmetrized, f64::EPSILON, max_iterations)
        .ok_or(Error::EigenConvergence { max_iterations })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eigen.eigenvalues[b]
            .partial_cmp(&eigen.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let eigenvalues: Vec<f64> = order.iter().map(|&i| eigen.eigenvalues[i]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let column = eigen.eigenvectors.column(src);
        let mut best_abs = -1.0;
        let mut best_index = 0;
        for (i, &v) in column.iter().enumerate() {
            if v.abs() > best_abs {
                best_abs = v.abs();
                best_index = i;
            }
        }
        let flip = if column[best_index] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            eigenvectors[(i, dst)] = flip * column[i];
        }
    }

    let lambda_max = eigenvalues[0];
    let cutoff = cutoff.unwrap_or(DEFAULT_CUTOFF_REL * lambda_max.max(1.0));
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        cutoff,
    })
}

impl SpectralDecomposition {
    /// Reassemble a decomposition from stored parts (archive loading). The
    /// parts must come from a previous [`sym_eigen_with_cutoff`] call.
    pub(crate) fn from_parts(
        eigenvalues: Vec<f64>,
        eigenvectors: DMatrix<f64>,
        cutoff: f64,
    ) -> SpectralDecomposition {
        SpectralDecomposition {
            eigenvalues,
            eigenvectors,
            cutoff,
        }
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Orthonormal eigenvectors, columns aligned with [`Self::eigenvalues`].
    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    /// Rank cutoff in effect for this decomposition.
    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Number of eigenvalues strictly above the cutoff.
    pub fn effective_rank(&self) -> usize {
        self.eigenvalues.iter().filter(|&&l| l > self.cutoff).count()
    }

    /// Rebuild `V f(L) V^T` with `f` applied only to eigenvalues above the
    /// cutoff; the rest contribute zero.
    ///
    /// Eigenvalues below `-1e-8 * max(1, lambda_max)` mean the matrix is not
    /// positive semidefinite and are always an error. Negative eigenvalues
    /// inside that tolerance are treated as round-off: clipped to zero when
    /// `clip_negative` is set, an error otherwise.
    pub fn apply(&self, f: SpectralFn, clip_negative: bool) -> Result<DMatrix<f64>> {
        let lambda_max = self.eigenvalues[0];
        let psd_tol = PSD_TOL_REL * lambda_max.max(1.0);
        let mut weights = Vec::with_capacity(self.eigenvalues.len());
        for &lambda in &self.eigenvalues {
            if lambda < -psd_tol || (lambda < 0.0 && !clip_negative) {
                return Err(Error::NotPsd {
                    eigenvalue: lambda,
                    tolerance: psd_tol,
                });
            }
            weights.push(if lambda > self.cutoff { f.apply(lambda) } else { 0.0 });
        }
        Ok(weighted_outer_sum(&self.eigenvectors, &weights))
    }

    /// `V L V^T` over the full spectrum, cutoff and sign included. This is the
    /// reconstruction of the decomposed matrix, used to bound round-off.
    pub fn reconstruct(&self) -> DMatrix<f64> {
        weighted_outer_sum(&self.eigenvectors, &self.eigenvalues)
    }

    /// Apply the pseudo-inverse to a vector without materializing the matrix:
    /// sum of `(v_k . x) / lambda_k * v_k` over eigenvalues above the cutoff.
    pub fn pinv_apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let n = self.eigenvalues.len();
        let mut out = DVector::zeros(n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            if lambda > self.cutoff {
                let column = self.eigenvectors.column(k);
                let coeff = column.dot(x) / lambda;
                out.axpy(coeff, &column, 1.0);
            }
        }
        out
    }
}

/// `V diag(w) V^T`, computed entry by entry on the upper triangle and
/// mirrored, so the result is exactly symmetric and identical run to run.
fn weighted_outer_sum(eigenvectors: &DMatrix<f64>, weights: &[f64]) -> DMatrix<f64> {
    let n = eigenvectors.nrows();
    // Rows of V become contiguous columns of the transpose; the inner loops
    // then stream over adjacent memory.
    let vt = eigenvectors.transpose();
    let data = vt.as_slice();
    let active: Vec<(usize, f64)> = weights
        .iter()
        .enumerate()
        .filter(|(_, w)| **w != 0.0)
        .map(|(k, w)| (k, *w))
        .collect();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let vi = &data[i * n..(i + 1) * n];
            (i..n)
                .map(|j| {
                    let vj = &data[j * n..(j + 1) * n];
                    let mut acc = 0.0;
                    for &(k, w) in &active {
                        acc += (vi[k] * vj[k]) * w;
                    }
                    acc
                })
                .collect()
        })
        .collect();
    let mut out = DMatrix::zeros(n, n);
    for (i, row) in upper.iter().enumerate() {
        for (offset, &v) in row.iter().enumerate() {
            let j = i + offset;
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// The centering operator `C = I - (1/n) * ones * ones^T`.
///
/// `C` is symmetric and idempotent; `C v` subtracts the mean of `v` from each
/// entry, and `C ones = 0`.
#[derive(Debug, Clone)]
pub struct CenteringOperator {
    matrix: DMatrix<f64>,
}

/// Build the order-`n` centering operator. `n` must be at least 1.
pub fn centering(n: usize) -> Result<CenteringOperator> {
    if n == 0 {
        return Err(Error::InvalidInput("centering operator of size 0".into()));
    }
    let inv = 1.0 / n as f64;
    let matrix = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 - inv } else { -inv });
    Ok(CenteringOperator { matrix })
}

impl CenteringOperator {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    /// `C v`: v minus its mean in every entry.
    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.matrix * v
    }
}

/// The uniform mean-weight vector with every entry `1/n`.
pub fn mean_weight_vector(n: usize) -> DVector<f64> {
    debug_assert!(n > 0);
    DVector::from_element(n, 1.0 / n as f64)
}

/// The `i`-th standard basis vector of dimension `n`.
pub fn unit_vector(n: usize, i: usize) -> DVector<f64> {
    assert!(i < n, "unit vector index {i} out of range for dimension {n}");
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}
