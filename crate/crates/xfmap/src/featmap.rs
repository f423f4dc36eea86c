//! The exact finite-dimensional explicit feature map.
//!
//! Given training points `x_1 .. x_N` and a positive semidefinite kernel `k`
//! with Gram matrix `K`, the map sends any point `z` to
//!
//! ```text
//! phi(z) = K^(-1/2) * k_z,    k_z = [k(x_1, z), ..., k(x_N, z)]^T
//! ```
//!
//! an `N`-dimensional vector. The map is exact in the following sense: for a
//! training point `x_n` and any `z`, the plain dot product reproduces the
//! kernel, `<phi(x_n), phi(z)> = k(x_n, z)`. Between two off-train points no
//! such guarantee exists (see the `off_train_pairs_are_not_reproduced` test).
//!
//! The mean of the mapped training points is `M = K^(1/2) e`, where `e` is
//! the uniform weight vector with entries `1/N`. The centered map is
//! `psi(z) = phi(z) - M`, and on training points it collapses to the closed
//! form `psi(x_n) = K^(1/2) (e_n - e)`.
//!
//! Rank-deficient Gram matrices (duplicated training points, degenerate
//! kernels) are handled by pseudo-inverse semantics in the spectral layer:
//! eigenvalues at or below the cutoff contribute nothing to either `K^(1/2)`
//! or `K^(-1/2)`, which keeps both operators consistent on the retained
//! subspace and preserves the reproducing property.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{GramMatrix, KernelSpec, SampleRows};
use crate::spectral::{
    mean_weight_vector, sym_eigen_with_cutoff, SpectralDecomposition, SpectralFn,
};
use crate::textio::{read_to_string, ArchiveReader, ArchiveWriter};

const MAGIC: &str = "XFMAP1";

/// A fitted explicit feature map. Immutable once constructed.
#[derive(Debug, Clone)]
pub struct ExplicitFeatureMap {
    kernel: KernelSpec,
    train: DMatrix<f64>,
    rows: SampleRows,
    gram: GramMatrix,
    decomposition: SpectralDecomposition,
    k_sqrt: DMatrix<f64>,
    k_inv_sqrt: DMatrix<f64>,
    mean: DVector<f64>,
}

impl ExplicitFeatureMap {
    /// Fit the map on the rows of `train` with the default rank cutoff.
    pub fn fit(kernel: KernelSpec, train: &DMatrix<f64>) -> Result<Self> {
        Self::fit_with_cutoff(kernel, train, None)
    }

    /// Fit with an explicit rank cutoff for the Gram eigenvalues.
    pub fn fit_with_cutoff(
        kernel: KernelSpec,
        train: &DMatrix<f64>,
        cutoff: Option<f64>,
    ) -> Result<Self> {
        kernel.validate()?;
        let gram = kernel.gram(train)?;
        let decomposition = sym_eigen_with_cutoff(gram.values(), cutoff)?;
        Self::assemble(kernel, train.clone(), gram, decomposition)
    }

    fn assemble(
        kernel: KernelSpec,
        train: DMatrix<f64>,
        gram: GramMatrix,
        decomposition: SpectralDecomposition,
    ) -> Result<Self> {
        let k_sqrt = decomposition.apply(SpectralFn::Sqrt, true)?;
        let k_inv_sqrt = decomposition.apply(SpectralFn::InvSqrt, true)?;
        let mean = &k_sqrt * mean_weight_vector(train.nrows());
        let rows = SampleRows::from_matrix(&train);
        Ok(ExplicitFeatureMap {
            kernel,
            train,
            rows,
            gram,
            decomposition,
            k_sqrt,
            k_inv_sqrt,
            mean,
        })
    }

    /// Number of training points, which is also the feature dimension.
    pub fn feature_dim(&self) -> usize {
        self.train.nrows()
    }

    /// Dimension of the input points.
    pub fn input_dim(&self) -> usize {
        self.train.ncols()
    }

    /// Number of Gram eigenvalues above the cutoff.
    pub fn effective_rank(&self) -> usize {
        self.decomposition.effective_rank()
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn train(&self) -> &DMatrix<f64> {
        &self.train
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    pub fn decomposition(&self) -> &SpectralDecomposition {
        &self.decomposition
    }

    pub fn k_sqrt(&self) -> &DMatrix<f64> {
        &self.k_sqrt
    }

    pub fn k_inv_sqrt(&self) -> &DMatrix<f64> {
        &self.k_inv_sqrt
    }

    /// Mean of the mapped training points, `M = K^(1/2) e`.
    pub fn train_mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// Kernel similarities of `z` against every training point.
    pub fn kernel_vector(&self, z: &[f64]) -> Result<DVector<f64>> {
        self.kernel.kernel_vector_rows(&self.rows, z)
    }

    /// `phi(z) = K^(-1/2) k_z`.
    pub fn map_point(&self, z: &[f64]) -> Result<DVector<f64>> {
        let kz = self.kernel_vector(z)?;
        Ok(&self.k_inv_sqrt * kz)
    }

    /// `psi(z) = phi(z) - M`.
    pub fn map_centered(&self, z: &[f64]) -> Result<DVector<f64>> {
        Ok(self.map_point(z)? - &self.mean)
    }

    /// Map every row of `data`; returns one mapped point per row. Rows are
    /// processed in parallel; the output does not depend on scheduling.
    pub fn map_dataset(&self, data: &DMatrix<f64>, centered: bool) -> Result<DMatrix<f64>> {
        let probes = SampleRows::from_matrix(data);
        let mapped: Vec<DVector<f64>> = (0..probes.len())
            .into_par_iter()
            .map(|i| {
                if centered {
                    self.map_centered(probes.row(i))
                } else {
                    self.map_point(probes.row(i))
                }
            })
            .collect::<Result<_>>()?;
        let n = self.feature_dim();
        let mut out = DMatrix::zeros(data.nrows(), n);
        for (i, v) in mapped.iter().enumerate() {
            for j in 0..n {
                out[(i, j)] = v[j];
            }
        }
        Ok(out)
    }

    /// Write the fitted map to a text archive.
    ///
    /// The archive stores the kernel spec, the training matrix, and the Gram
    /// eigendecomposition. Loading restores bit-identical behavior without
    /// redoing the eigensolve.
    pub fn save(&self, path: &Path) -> Result<()> {
        let n = self.feature_dim();
        let mut w = ArchiveWriter::create(path)?;
        w.line(MAGIC)?;
        w.comment(&format!("xfmap {}", crate::VERSION))?;
        w.comment(&format!("kernel {}", self.kernel))?;
        w.comment(&format!(
            "train fingerprint {}",
            self.gram.dataset_fingerprint()
        ))?;
        w.line(&format!("kernel {}", self.kernel))?;
        w.line(&format!("cutoff {}", self.decomposition.cutoff()))?;
        w.line(&format!("train {} {}", n, self.train.ncols()))?;
        w.matrix_rows(&self.train)?;
        w.line(&format!("eigenvalues {n}"))?;
        w.floats(self.decomposition.eigenvalues().iter().copied())?;
        w.line(&format!("eigenvectors {n}"))?;
        w.matrix_rows(self.decomposition.eigenvectors())?;
        w.finish()
    }

    /// Load a map saved by [`ExplicitFeatureMap::save`].
    ///
    /// The Gram matrix is recomputed from the stored kernel and training
    /// points (cheap next to the eigensolve, which is reused from the
    /// archive), and the stored decomposition is checked against it through
    /// the top eigenpair's residual, so a tampered or mismatched archive is
    /// rejected.
    pub fn load(path: &Path) -> Result<Self> {
        let content = read_to_string(path)?;
        let mut r = ArchiveReader::new(path.display().to_string(), &content);
        r.expect_magic(MAGIC)?;
        let kernel: KernelSpec = r.tagged("kernel")?.parse()?;
        let cutoff: f64 = r.tagged_value("cutoff")?;
        let dims: Vec<usize> = r.tagged_values("train")?;
        if dims.len() != 2 {
            return Err(r.error("train header must carry rows and cols"));
        }
        let (n, d) = (dims[0], dims[1]);
        let train = r.matrix(n, d)?;
        let n_eig: usize = r.tagged_value("eigenvalues")?;
        if n_eig != n {
            return Err(r.error(format!("eigenvalue count {n_eig} does not match n={n}")));
        }
        let eigenvalues = r.floats_line(n)?;
        let n_vec: usize = r.tagged_value("eigenvectors")?;
        if n_vec != n {
            return Err(r.error(format!("eigenvector count {n_vec} does not match n={n}")));
        }
        let eigenvectors = r.matrix(n, n)?;
        r.end()?;

        let gram = kernel.gram(&train)?;
        let decomposition = SpectralDecomposition::from_parts(eigenvalues, eigenvectors, cutoff);

        // Integrity: the stored top eigenpair must still be an eigenpair of
        // the recomputed Gram matrix.
        let lambda0 = decomposition.eigenvalues()[0];
        let v0 = decomposition.eigenvectors().column(0).clone_owned();
        let residual = (gram.values() * &v0 - lambda0 * &v0).norm();
        let bound = 1e-6 * lambda0.abs().max(1.0);
        if residual > bound {
            return Err(Error::ResidualCheck {
                what: "stored eigendecomposition vs recomputed gram",
                residual,
                bound,
            });
        }

        Self::assemble(kernel, train, gram, decomposition)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{centering, unit_vector};
    use approx::assert_relative_eq;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_train(n: usize, d: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DMatrix::from_fn(n, d, |_, _| rng.random_range(-1.5..1.5))
    }

    fn row(m: &DMatrix<f64>, i: usize) -> Vec<f64> {
        (0..m.ncols()).map(|j| m[(i, j)]).collect()
    }

    #[test]
    fn single_point_map_is_self_norm() {
        let train = DMatrix::from_row_slice(1, 2, &[3.0, 4.0]);
        let map = ExplicitFeatureMap::fit(KernelSpec::Linear, &train).unwrap();
        // K = [25], phi(x_1) = 25 / sqrt(25) = 5 = sqrt(k(x_1, x_1)).
        let phi = map.map_point(&[3.0, 4.0]).unwrap();
        assert_relative_eq!(phi[0], 5.0, max_relative = 1e-12);
    }

    #[test]
    fn orthonormal_train_maps_to_unit_vectors() {
        let train = DMatrix::from_row_slice(3, 3, &[1., 0., 0., 0., 1., 0., 0., 0., 1.]);
        let map = ExplicitFeatureMap::fit(KernelSpec::Linear, &train).unwrap();
        for i in 0..3 {
            let phi = map.map_point(&row(&train, i)).unwrap();
            for j in 0..3 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert_relative_eq!(phi[j], expected, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn reproducing_property_on_train_points() {
        let train = random_train(12, 3, 5);
        let kernel = KernelSpec::Gaussian { sigma: 1.2 };
        let map = ExplicitFeatureMap::fit(kernel.clone(), &train).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..5 {
            let z: Vec<f64> = (0..3).map(|_| rng.random_range(-1.5..1.5)).collect();
            let phi_z = map.map_point(&z).unwrap();
            for n in 0..12 {
                let xn = row(&train, n);
                let phi_n = map.map_point(&xn).unwrap();
                let got = phi_n.dot(&phi_z);
                let want = kernel.eval(&xn, &z).unwrap();
                assert!(
                    (got - want).abs() <= 1e-8,
                    "pair ({n}): {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn reproducing_property_survives_duplicated_rows() {
        let mut train = random_train(8, 2, 9);
        for j in 0..2 {
            train[(7, j)] = train[(2, j)];
        }
        let kernel = KernelSpec::Gaussian { sigma: 0.9 };
        let map = ExplicitFeatureMap::fit(kernel.clone(), &train).unwrap();
        assert_eq!(map.effective_rank(), 7);
        let z = [0.4, -0.2];
        let phi_z = map.map_point(&z).unwrap();
        for n in 0..8 {
            let xn = row(&train, n);
            let phi_n = map.map_point(&xn).unwrap();
            let want = kernel.eval(&xn, &z).unwrap();
            assert!((phi_n.dot(&phi_z) - want).abs() <= 1e-8);
        }
    }

    #[test]
    fn off_train_pairs_are_not_reproduced() {
        // No reproducing guarantee when both points are off-train: with all
        // training mass near the origin, a faraway z maps to nearly zero, yet
        // k(z, z) = 1. The gap is macroscopic, not round-off.
        let train = DMatrix::from_row_slice(3, 1, &[0.0, 0.1, -0.1]);
        let kernel = KernelSpec::Gaussian { sigma: 0.3 };
        let map = ExplicitFeatureMap::fit(kernel.clone(), &train).unwrap();
        let z = [50.0];
        let phi_z = map.map_point(&z).unwrap();
        let inner = phi_z.dot(&phi_z);
        let exact = kernel.eval(&z, &z).unwrap();
        assert!((inner - exact).abs() > 0.5);
    }

    #[test]
    fn train_mean_matches_average_of_mapped_points() {
        let train = random_train(10, 2, 21);
        let map = ExplicitFeatureMap::fit(KernelSpec::Gaussian { sigma: 1.0 }, &train).unwrap();
        let mut avg = DVector::zeros(10);
        for n in 0..10 {
            avg += map.map_point(&row(&train, n)).unwrap();
        }
        avg /= 10.0;
        for i in 0..10 {
            assert_relative_eq!(map.train_mean()[i], avg[i], epsilon = 1e-9);
        }
    }

    #[test]
    fn centered_train_point_has_closed_form() {
        // psi(x_n) = K^(1/2) (e_n - e)
        let train = random_train(9, 3, 33);
        let map = ExplicitFeatureMap::fit(KernelSpec::Gaussian { sigma: 1.4 }, &train).unwrap();
        let e = mean_weight_vector(9);
        for n in 0..9 {
            let psi = map.map_centered(&row(&train, n)).unwrap();
            let closed = map.k_sqrt() * (unit_vector(9, n) - &e);
            for i in 0..9 {
                assert_relative_eq!(psi[i], closed[i], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn centered_train_features_have_zero_mean() {
        let train = random_train(14, 2, 8);
        let map = ExplicitFeatureMap::fit(KernelSpec::Laplacian { gamma: 0.8 }, &train).unwrap();
        let features = map.map_dataset(&train, true).unwrap();
        for j in 0..map.feature_dim() {
            let mean: f64 = (0..14).map(|i| features[(i, j)]).sum::<f64>() / 14.0;
            assert!(mean.abs() < 1e-8, "column {j} mean {mean}");
        }
    }

    #[test]
    fn map_dataset_matches_map_point() {
        let train = random_train(7, 2, 41);
        let map = ExplicitFeatureMap::fit(KernelSpec::Gaussian { sigma: 1.1 }, &train).unwrap();
        let probes = random_train(5, 2, 42);
        let batch = map.map_dataset(&probes, false).unwrap();
        for i in 0..5 {
            let single = map.map_point(&row(&probes, i)).unwrap();
            for j in 0..7 {
                assert_eq!(batch[(i, j)].to_bits(), single[j].to_bits());
            }
        }
    }

    #[test]
    fn map_point_checks_dimension() {
        let train = random_train(4, 3, 2);
        let map = ExplicitFeatureMap::fit(KernelSpec::Linear, &train).unwrap();
        assert!(matches!(
            map.map_point(&[1.0, 2.0]).unwrap_err(),
            Error::DimensionMismatch { .. }
        ));
    }

    #[test]
    fn empirical_feature_covariance_identity() {
        // (1/N) sum psi psi^T = (1/N) K^(1/2) C K^(1/2)
        let n = 11;
        let train = random_train(n, 3, 55);
        let map = ExplicitFeatureMap::fit(KernelSpec::Gaussian { sigma: 1.3 }, &train).unwrap();
        let mut empirical = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let psi = map.map_centered(&row(&train, i)).unwrap();
            empirical += &psi * psi.transpose();
        }
        empirical /= n as f64;
        let c = centering(n).unwrap();
        let closed = map.k_sqrt() * c.matrix() * map.k_sqrt() / n as f64;
        let max_diff = (&empirical - &closed)
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        assert!(max_diff < 1e-9, "max diff {max_diff}");
    }

    #[test]
    fn save_load_round_trip_is_bit_exact() {
        let train = random_train(10, 3, 70);
        let kernel = KernelSpec::Polynomial {
            scale: 0.5,
            offset: 1.0,
            degree: 3,
        };
        let map = ExplicitFeatureMap::fit(kernel, &train).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.xfm");
        map.save(&path).unwrap();
        let loaded = ExplicitFeatureMap::load(&path).unwrap();

        assert_eq!(loaded.kernel(), map.kernel());
        assert_eq!(
            loaded.decomposition().cutoff().to_bits(),
            map.decomposition().cutoff().to_bits()
        );
        for (a, b) in loaded.train().iter().zip(map.train().iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        let probe = [0.3, -0.8, 1.1];
        let before = map.map_point(&probe).unwrap();
        let after = loaded.map_point(&probe).unwrap();
        for i in 0..10 {
            assert_eq!(before[i].to_bits(), after[i].to_bits());
        }
    }

    #[test]
    fn load_rejects_tampered_train_data() {
        let train = random_train(6, 2, 80);
        let map = ExplicitFeatureMap::fit(KernelSpec::Gaussian { sigma: 1.0 }, &train).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.xfm");
        map.save(&path).unwrap();

        let content = std::fs::read_to_string(&path).unwrap();
        let mut lines: Vec<String> = content.lines().map(String::from).collect();
        // Line 8 (after magic, three comments, kernel, cutoff, and the train
        // header) is the first training row; perturb it hard.
        lines[7] = "9 9".to_string();
        std::fs::write(&path, lines.join("\n")).unwrap();

        assert!(matches!(
            ExplicitFeatureMap::load(&path).unwrap_err(),
            Error::ResidualCheck { .. }
        ));
    }

    #[test]
    fn load_rejects_wrong_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.xfm");
        std::fs::write(&path, "NOTMAP1\n").unwrap();
        assert!(matches!(
            ExplicitFeatureMap::load(&path).unwrap_err(),
            Error::ArchiveMagic { .. }
        ));
    }
}
