//! Kernel principal component analysis through the explicit feature map.
//!
//! The principal directions of the mapped training data can be computed by
//! three equivalent solvers plus one projection shortcut:
//!
//! * **primal**: eigenvectors of the symmetric matrix
//!   `K^(1/2) C K^(1/2) v = (N lambda) v` in explicit feature coordinates,
//!   where `C = I - (1/N) ones ones^T` is the centering operator. With
//!   `u = K^(1/2) v`, the projection of a point `z` onto component `j` is
//!   `k_z . K^(-1) u_j - e^T u_j`.
//! * **dual**: the non-symmetric problem `K C alpha = (N lambda) alpha`,
//!   solved through the symmetric surrogate `C K C beta = (N lambda) beta`
//!   and the recovery `alpha = beta + (I - C) K C beta / (N lambda)`, which
//!   restores the component of `alpha` along the all-ones direction that the
//!   surrogate cannot see. Projection: `k_z . C alpha_j - e^T K C alpha_j`.
//! * **classical**: the textbook double-centered Gram matrix (row means,
//!   column means, and total mean subtracted), kept as an independent oracle.
//!   Its centered eigenvector is exactly `C alpha`; the projection formula
//!   carries the (numerically tiny) recentering terms of the textbook
//!   derivation.
//! * **combined**: a projection formula using `alpha` directly,
//!   `k_z . (alpha - (N e^T alpha) e) - N lambda e^T alpha`, which avoids
//!   both `K^(-1)` and the centered kernel vector.
//!
//! Whatever the solver, the stored model contents agree up to round-off:
//! `u_j = N lambda_j alpha_j`, `u_j^T K^(-1) u_j = 1`, and
//! `alpha_j^T (C K C) alpha_j = 1`. The eigenvalue `N lambda_j` divided by
//! `N` is the variance captured by component `j`.

use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::featmap::ExplicitFeatureMap;
use crate::kernel::SampleRows;
use crate::spectral::{centering, mean_weight_vector, sym_eigen};
use crate::textio::{read_to_string, ArchiveReader, ArchiveWriter};

const MAGIC: &str = "KPCA1";
const RESIDUAL_TOL_REL: f64 = 1e-6;

/// Which eigensolver produced a model. Provenance only: the fitted contents
/// agree across routes up to round-off and sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KpcaRoute {
    Primal,
    Dual,
    Classical,
}

impl std::fmt::Display for KpcaRoute {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KpcaRoute::Primal => "primal",
            KpcaRoute::Dual => "dual",
            KpcaRoute::Classical => "classical",
        })
    }
}

impl FromStr for KpcaRoute {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "primal" => Ok(KpcaRoute::Primal),
            "dual" => Ok(KpcaRoute::Dual),
            "classical" => Ok(KpcaRoute::Classical),
            other => Err(Error::InvalidInput(format!(
                "unknown kpca fit route `{other}` (expected primal, dual, or classical)"
            ))),
        }
    }
}

/// Which projection formula to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionRoute {
    Primal,
    Dual,
    Combined,
    Classical,
}

impl std::fmt::Display for ProjectionRoute {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ProjectionRoute::Primal => "primal",
            ProjectionRoute::Dual => "dual",
            ProjectionRoute::Combined => "combined",
            ProjectionRoute::Classical => "classical",
        })
    }
}

impl FromStr for ProjectionRoute {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "primal" => Ok(ProjectionRoute::Primal),
            "dual" => Ok(ProjectionRoute::Dual),
            "combined" => Ok(ProjectionRoute::Combined),
            "classical" => Ok(ProjectionRoute::Classical),
            other => Err(Error::InvalidInput(format!(
                "unknown projection route `{other}` (expected primal, dual, combined, or classical)"
            ))),
        }
    }
}

/// The feature covariance of the mapped training points,
/// `(1/N) K^(1/2) C K^(1/2)`, symmetrized against round-off.
pub fn feature_covariance(map: &ExplicitFeatureMap) -> Result<DMatrix<f64>> {
    let n = map.feature_dim();
    let c = centering(n)?;
    let b = map.k_sqrt() * c.matrix() * map.k_sqrt();
    let inv_n = 1.0 / n as f64;
    Ok(DMatrix::from_fn(n, n, |i, j| {
        0.5 * (b[(i, j)] + b[(j, i)]) * inv_n
    }))
}

/// Number of principal components available above the rank cutoff.
pub fn available_components(map: &ExplicitFeatureMap) -> Result<usize> {
    let n = map.feature_dim();
    let c = centering(n)?;
    let b = map.k_sqrt() * c.matrix() * map.k_sqrt();
    Ok(sym_eigen(&b)?.effective_rank())
}

struct Component {
    nlam: f64,
    alpha: DVector<f64>,
    u: DVector<f64>,
}

/// A fitted kernel PCA model over an [`ExplicitFeatureMap`].
#[derive(Debug, Clone)]
pub struct KpcaModel {
    map: Arc<ExplicitFeatureMap>,
    route: KpcaRoute,
    /// Solved eigenvalues `N lambda_j`, descending.
    eigenvalues: Vec<f64>,
    /// Columns are `alpha_j`.
    alphas: DMatrix<f64>,
    /// Columns are `u_j = N lambda_j alpha_j`.
    us: DMatrix<f64>,
    // Projection caches, all derived from the fields above.
    pinv_us: DMatrix<f64>,
    centered_alphas: DMatrix<f64>,
    combined_weights: DMatrix<f64>,
    classical_weights: DMatrix<f64>,
    e_dot_alphas: Vec<f64>,
    e_dot_us: Vec<f64>,
    dual_offsets: Vec<f64>,
    alpha_means: Vec<f64>,
    e_k_e: f64,
}

/// `v` minus its mean in every entry: the centering operator applied without
/// materializing the matrix.
fn center_vec(v: &DVector<f64>) -> DVector<f64> {
    let mean = v.sum() / v.len() as f64;
    v.map(|x| x - mean)
}

impl KpcaModel {
    /// Fit `p` components with the requested solver route.
    pub fn fit(map: Arc<ExplicitFeatureMap>, p: usize, route: KpcaRoute) -> Result<Self> {
        match route {
            KpcaRoute::Primal => Self::fit_primal(map, p),
            KpcaRoute::Dual => Self::fit_dual(map, p),
            KpcaRoute::Classical => Self::fit_classical(map, p),
        }
    }

    /// Solve the symmetric primal problem `K^(1/2) C K^(1/2) v = N lambda v`.
    pub fn fit_primal(map: Arc<ExplicitFeatureMap>, p: usize) -> Result<Self> {
        let n = check_p(&map, p)?;
        let c = centering(n)?;
        let b = map.k_sqrt() * c.matrix() * map.k_sqrt();
        let decomp = sym_eigen(&b)?;
        let available = decomp.effective_rank();
        if p > available {
            return Err(Error::TooManyComponents {
                requested: p,
                available,
            });
        }
        let mut comps = Vec::with_capacity(p);
        for j in 0..p {
            let nlam = decomp.eigenvalues()[j];
            let v = decomp.eigenvectors().column(j).clone_owned();
            check_residual("primal eigenpair", &(&b * &v), nlam, &v)?;
            let u = map.k_sqrt() * &v;
            let alpha = &u / nlam;
            comps.push(Component { nlam, alpha, u });
        }
        Self::assemble(map, KpcaRoute::Primal, comps)
    }

    /// Solve the dual problem `K C alpha = N lambda alpha` via the symmetric
    /// surrogate `C K C`.
    pub fn fit_dual(map: Arc<ExplicitFeatureMap>, p: usize) -> Result<Self> {
        let n = check_p(&map, p)?;
        let k = map.gram().values();
        let c = centering(n)?;
        let ckc = c.matrix() * k * c.matrix();
        let decomp = sym_eigen(&ckc)?;
        let available = decomp.effective_rank();
        if p > available {
            return Err(Error::TooManyComponents {
                requested: p,
                available,
            });
        }
        let mut comps = Vec::with_capacity(p);
        for j in 0..p {
            let nlam = decomp.eigenvalues()[j];
            let beta = decomp.eigenvectors().column(j).clone_owned();
            let comp = recover_dual_component(k, nlam, &beta)?;
            // The recovered alpha must solve the non-symmetric problem.
            let kca = k * center_vec(&comp.alpha);
            check_residual("dual eigenpair", &kca, nlam, &comp.alpha)?;
            comps.push(comp);
        }
        Self::assemble(map, KpcaRoute::Dual, comps)
    }

    /// Solve the textbook double-centered problem. The centered matrix is
    /// built literally from row, column, and total means of the Gram matrix.
    pub fn fit_classical(map: Arc<ExplicitFeatureMap>, p: usize) -> Result<Self> {
        let n = check_p(&map, p)?;
        let k = map.gram().values();
        let row_means: Vec<f64> = (0..n).map(|i| k.row(i).sum() / n as f64).collect();
        let total_mean = row_means.iter().sum::<f64>() / n as f64;
        let mut kbar = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = ((k[(i, j)] - row_means[i]) - row_means[j]) + total_mean;
                kbar[(i, j)] = v;
                kbar[(j, i)] = v;
            }
        }
        let decomp = sym_eigen(&kbar)?;
        let available = decomp.effective_rank();
        if p > available {
            return Err(Error::TooManyComponents {
                requested: p,
                available,
            });
        }
        let mut comps = Vec::with_capacity(p);
        for j in 0..p {
            let nlam = decomp.eigenvalues()[j];
            let beta = decomp.eigenvectors().column(j).clone_owned();
            check_residual("classical eigenpair", &(&kbar * &beta), nlam, &beta)?;
            // Same recovery as the dual route, so model contents stay
            // route-independent.
            comps.push(recover_dual_component(k, nlam, &beta)?);
        }
        Self::assemble(map, KpcaRoute::Classical, comps)
    }

    fn assemble(
        map: Arc<ExplicitFeatureMap>,
        route: KpcaRoute,
        comps: Vec<Component>,
    ) -> Result<Self> {
        let n = map.feature_dim();
        let p = comps.len();
        let e = mean_weight_vector(n);
        let ke = map.gram().values() * &e;
        let e_k_e = e.dot(&ke);

        let mut eigenvalues = Vec::with_capacity(p);
        let mut alphas = DMatrix::zeros(n, p);
        let mut us = DMatrix::zeros(n, p);
        let mut pinv_us = DMatrix::zeros(n, p);
        let mut centered_alphas = DMatrix::zeros(n, p);
        let mut combined_weights = DMatrix::zeros(n, p);
        let mut classical_weights = DMatrix::zeros(n, p);
        let mut e_dot_alphas = Vec::with_capacity(p);
        let mut e_dot_us = Vec::with_capacity(p);
        let mut dual_offsets = Vec::with_capacity(p);
        let mut alpha_means = Vec::with_capacity(p);

        for (j, comp) in comps.iter().enumerate() {
            eigenvalues.push(comp.nlam);
            alphas.set_column(j, &comp.alpha);
            us.set_column(j, &comp.u);
            pinv_us.set_column(j, &map.decomposition().pinv_apply(&comp.u));
            let ca = center_vec(&comp.alpha);
            dual_offsets.push(ke.dot(&ca));
            let ca_mean = ca.sum() / n as f64;
            alpha_means.push(ca_mean);
            classical_weights.set_column(j, &ca.map(|v| v - ca_mean));
            centered_alphas.set_column(j, &ca);
            let e_dot_alpha = e.dot(&comp.alpha);
            e_dot_alphas.push(e_dot_alpha);
            e_dot_us.push(e.dot(&comp.u));
            combined_weights.set_column(j, &comp.alpha.map(|v| v - e_dot_alpha));
        }

        Ok(KpcaModel {
            map,
            route,
            eigenvalues,
            alphas,
            us,
            pinv_us,
            centered_alphas,
            combined_weights,
            classical_weights,
            e_dot_alphas,
            e_dot_us,
            dual_offsets,
            alpha_means,
            e_k_e,
        })
    }

    pub fn map(&self) -> &Arc<ExplicitFeatureMap> {
        &self.map
    }

    pub fn route(&self) -> KpcaRoute {
        self.route
    }

    /// Number of fitted components.
    pub fn components(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Solved eigenvalues `N lambda_j` in descending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Variances `lambda_j` captured by each component.
    pub fn lambdas(&self) -> Vec<f64> {
        let n = self.map.feature_dim() as f64;
        self.eigenvalues.iter().map(|v| v / n).collect()
    }

    /// Dual coefficient vectors, one column per component.
    pub fn alphas(&self) -> &DMatrix<f64> {
        &self.alphas
    }

    /// Primal component vectors `u_j = N lambda_j alpha_j`, one column each.
    pub fn us(&self) -> &DMatrix<f64> {
        &self.us
    }

    fn check_component(&self, j: usize) -> Result<()> {
        if j >= self.components() {
            return Err(Error::InvalidInput(format!(
                "component index {j} out of range for {} fitted components",
                self.components()
            )));
        }
        Ok(())
    }

    /// Project `z` onto component `j` with the chosen formula.
    pub fn project(&self, z: &[f64], j: usize, route: ProjectionRoute) -> Result<f64> {
        self.check_component(j)?;
        let kz = self.map.kernel_vector(z)?;
        Ok(self.project_kz(&kz, j, route))
    }

    /// `k_z . K^(-1) u_j - e^T u_j`.
    pub fn project_primal(&self, z: &[f64], j: usize) -> Result<f64> {
        self.project(z, j, ProjectionRoute::Primal)
    }

    /// `k_z . C alpha_j - e^T K C alpha_j`.
    pub fn project_dual(&self, z: &[f64], j: usize) -> Result<f64> {
        self.project(z, j, ProjectionRoute::Dual)
    }

    /// `k_z . (alpha_j - (N e^T alpha_j) e) - N lambda_j e^T alpha_j`.
    pub fn project_combined(&self, z: &[f64], j: usize) -> Result<f64> {
        self.project(z, j, ProjectionRoute::Combined)
    }

    /// The textbook projection with explicit recentering terms.
    pub fn project_classical(&self, z: &[f64], j: usize) -> Result<f64> {
        self.project(z, j, ProjectionRoute::Classical)
    }

    /// All components at once; the kernel vector is evaluated once.
    pub fn project_point(&self, z: &[f64], route: ProjectionRoute) -> Result<DVector<f64>> {
        let kz = self.map.kernel_vector(z)?;
        Ok(DVector::from_iterator(
            self.components(),
            (0..self.components()).map(|j| self.project_kz(&kz, j, route)),
        ))
    }

    /// Project every row of `data`; returns a row per point, a column per
    /// component. Rows are processed in parallel, output is deterministic.
    pub fn project_dataset(
        &self,
        data: &DMatrix<f64>,
        route: ProjectionRoute,
    ) -> Result<DMatrix<f64>> {
        let probes = SampleRows::from_matrix(data);
        let projected: Vec<DVector<f64>> = (0..probes.len())
            .into_par_iter()
            .map(|i| self.project_point(probes.row(i), route))
            .collect::<Result<_>>()?;
        let p = self.components();
        let mut out = DMatrix::zeros(data.nrows(), p);
        for (i, v) in projected.iter().enumerate() {
            for j in 0..p {
                out[(i, j)] = v[j];
            }
        }
        Ok(out)
    }

    fn project_kz(&self, kz: &DVector<f64>, j: usize, route: ProjectionRoute) -> f64 {
        match route {
            ProjectionRoute::Primal => kz.dot(&self.pinv_us.column(j)) - self.e_dot_us[j],
            ProjectionRoute::Dual => kz.dot(&self.centered_alphas.column(j)) - self.dual_offsets[j],
            ProjectionRoute::Combined => {
                kz.dot(&self.combined_weights.column(j)) - self.eigenvalues[j] * self.e_dot_alphas[j]
            }
            ProjectionRoute::Classical => {
                kz.dot(&self.classical_weights.column(j)) - self.dual_offsets[j]
                    + self.e_k_e * self.alpha_means[j]
            }
        }
    }

    /// Write the model to a text archive. `featmap_ref` is the path to the
    /// feature-map archive this model was fitted on; it is stored verbatim
    /// and resolved relative to the model file on load.
    pub fn save(&self, path: &Path, featmap_ref: &Path) -> Result<()> {
        let n = self.map.feature_dim();
        let p = self.components();
        let mut w = ArchiveWriter::create(path)?;
        w.line(MAGIC)?;
        w.comment(&format!("xfmap {}", crate::VERSION))?;
        w.comment(&format!("kernel {}", self.map.kernel()))?;
        w.comment(&format!(
            "train fingerprint {}",
            self.map.gram().dataset_fingerprint()
        ))?;
        w.line(&format!("featmap {}", featmap_ref.display()))?;
        w.line(&format!(
            "fingerprint {}",
            self.map.gram().dataset_fingerprint()
        ))?;
        w.line(&format!("route {}", self.route))?;
        w.line(&format!("components {p}"))?;
        w.line(&format!("eigenvalues {p}"))?;
        w.floats(self.eigenvalues.iter().copied())?;
        w.line(&format!("alphas {p} {n}"))?;
        w.matrix_rows(&self.alphas.transpose())?;
        w.finish()
    }

    /// Load a model saved by [`KpcaModel::save`], reloading the referenced
    /// feature map and checking its data fingerprint.
    pub fn load(path: &Path) -> Result<Self> {
        let content = read_to_string(path)?;
        let mut r = ArchiveReader::new(path.display().to_string(), &content);
        r.expect_magic(MAGIC)?;
        let featmap_ref = PathBuf::from(r.tagged("featmap")?);
        let fingerprint = r.tagged("fingerprint")?.to_string();
        let route: KpcaRoute = r.tagged("route")?.parse()?;
        let p: usize = r.tagged_value("components")?;
        let p_eig: usize = r.tagged_value("eigenvalues")?;
        if p_eig != p {
            return Err(r.error(format!("eigenvalue count {p_eig} does not match p={p}")));
        }
        let eigenvalues = r.floats_line(p)?;
        let dims: Vec<usize> = r.tagged_values("alphas")?;
        if dims.len() != 2 || dims[0] != p {
            return Err(r.error("alphas header must carry p and n"));
        }
        let n = dims[1];
        let alphas_t = r.matrix(p, n)?;
        r.end()?;

        let resolved = if featmap_ref.is_relative() {
            match path.parent() {
                Some(parent) => parent.join(&featmap_ref),
                None => featmap_ref.clone(),
            }
        } else {
            featmap_ref.clone()
        };
        let map = Arc::new(ExplicitFeatureMap::load(&resolved)?);
        if map.feature_dim() != n {
            return Err(Error::DimensionMismatch {
                context: "kpca archive vs feature map",
                expected: n,
                got: map.feature_dim(),
            });
        }
        if map.gram().dataset_fingerprint() != fingerprint {
            return Err(Error::FingerprintMismatch {
                expected: fingerprint,
                found: map.gram().dataset_fingerprint().to_string(),
            });
        }

        let comps = (0..p)
            .map(|j| {
                let nlam = eigenvalues[j];
                let alpha = alphas_t.row(j).transpose();
                let u = &alpha * nlam;
                Component { nlam, alpha, u }
            })
            .collect();
        Self::assemble(map, route, comps)
    }
}

fn check_p(map: &ExplicitFeatureMap, p: usize) -> Result<usize> {
    if p == 0 {
        return Err(Error::InvalidInput(
            "number of components must be at least 1".into(),
        ));
    }
    Ok(map.feature_dim())
}

/// Relative residual check `|m v - nlam v| <= 1e-6 nlam |v|` for a solved
/// eigenpair; `mv` is the already-computed product.
fn check_residual(what: &'static str, mv: &DVector<f64>, nlam: f64, v: &DVector<f64>) -> Result<()> {
    let residual = (mv - v * nlam).norm();
    let bound = RESIDUAL_TOL_REL * nlam * v.norm();
    if residual > bound {
        return Err(Error::ResidualCheck {
            what,
            residual,
            bound,
        });
    }
    Ok(())
}

/// From a centered surrogate eigenvector `beta` (with `C K C beta =
/// nlam beta`), rebuild the dual eigenvector `alpha = beta +
/// (I - C) K C beta / nlam` and normalize it so `alpha^T C K C alpha = 1`.
fn recover_dual_component(k: &DMatrix<f64>, nlam: f64, beta: &DVector<f64>) -> Result<Component> {
    let n = beta.len();
    let cbeta = center_vec(beta);
    let t = k * &cbeta;
    let mean_t = t.sum() / n as f64;
    let alpha_raw = beta + DVector::from_element(n, mean_t / nlam);
    let ca = center_vec(&alpha_raw);
    let s2 = ca.dot(&(k * &ca));
    if !(s2.is_finite() && s2 > 0.0) {
        return Err(Error::ResidualCheck {
            what: "dual normalization",
            residual: s2,
            bound: 0.0,
        });
    }
    let alpha = alpha_raw / s2.sqrt();
    let u = &alpha * nlam;
    Ok(Component { nlam, alpha, u })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelSpec;
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

    fn gaussian_map(n: usize, d: usize, seed: u64) -> Arc<ExplicitFeatureMap> {
        let train = random_train(n, d, seed);
        Arc::new(ExplicitFeatureMap::fit(KernelSpec::Gaussian { sigma: 1.5 }, &train).unwrap())
    }

    const ALL_PROJECTIONS: [ProjectionRoute; 4] = [
        ProjectionRoute::Primal,
        ProjectionRoute::Dual,
        ProjectionRoute::Combined,
        ProjectionRoute::Classical,
    ];

    #[test]
    fn identity_gram_closed_form() {
        // Orthonormal rows with the linear kernel: K = I, C has eigenvalue 1
        // on [1, -1]/sqrt(2), so the single component projects z onto
        // (z_1 - z_2)/sqrt(2).
        let train = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let map = Arc::new(ExplicitFeatureMap::fit(KernelSpec::Linear, &train).unwrap());
        assert_eq!(available_components(&map).unwrap(), 1);
        for route in [KpcaRoute::Primal, KpcaRoute::Dual, KpcaRoute::Classical] {
            let model = KpcaModel::fit(map.clone(), 1, route).unwrap();
            assert_relative_eq!(model.eigenvalues()[0], 1.0, max_relative = 1e-10);
            assert_relative_eq!(model.lambdas()[0], 0.5, max_relative = 1e-10);
            let z = [0.7, -0.2];
            let expected = (z[0] - z[1]) / 2.0f64.sqrt();
            for proj in ALL_PROJECTIONS {
                let got = model.project(&z, 0, proj).unwrap();
                assert_relative_eq!(got.abs(), expected.abs(), max_relative = 1e-10);
            }
            // u = N lambda alpha and both normalizations hold exactly here.
            let u = model.us().column(0);
            let alpha = model.alphas().column(0);
            for i in 0..2 {
                assert_relative_eq!(u[i], model.eigenvalues()[0] * alpha[i], epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn linear_kernel_reduces_to_standard_pca() {
        let n = 30;
        let train = random_train(n, 2, 3);
        let map = Arc::new(ExplicitFeatureMap::fit(KernelSpec::Linear, &train).unwrap());
        let model = KpcaModel::fit_primal(map, 2).unwrap();

        // Oracle: plain PCA on the 2x2 covariance of column-centered data.
        let mut centered = train.clone();
        for j in 0..2 {
            let mean: f64 = (0..n).map(|i| train[(i, j)]).sum::<f64>() / n as f64;
            for i in 0..n {
                centered[(i, j)] -= mean;
            }
        }
        let cov = centered.transpose() * &centered / n as f64;
        let decomp = sym_eigen(&cov).unwrap();

        for j in 0..2 {
            assert_relative_eq!(
                model.lambdas()[j],
                decomp.eigenvalues()[j],
                max_relative = 1e-8
            );
        }
        // Projections agree up to a per-component sign.
        let w0 = decomp.eigenvectors().column(0);
        let probe_rows = random_train(6, 2, 4);
        let mut ratios = Vec::new();
        for i in 0..6 {
            let z = row(&probe_rows, i);
            let col_means: Vec<f64> =
                (0..2).map(|c| (0..n).map(|r| train[(r, c)]).sum::<f64>() / n as f64).collect();
            let oracle = (z[0] - col_means[0]) * w0[0] + (z[1] - col_means[1]) * w0[1];
            let got = model.project_primal(&z, 0).unwrap();
            ratios.push(got / oracle);
        }
        let sign = ratios[0].signum();
        for r in ratios {
            assert_relative_eq!(r, sign, max_relative = 1e-6);
        }
    }

    #[test]
    fn all_routes_agree_on_projections_and_spectra() {
        let map = gaussian_map(40, 3, 11);
        let p = available_components(&map).unwrap().min(8);
        let primal = KpcaModel::fit_primal(map.clone(), p).unwrap();
        let dual = KpcaModel::fit_dual(map.clone(), p).unwrap();
        let classical = KpcaModel::fit_classical(map.clone(), p).unwrap();

        // Guard for component-wise comparison: the spectrum must be simple at
        // the comparison tolerance. Random data gives that almost surely.
        let top = primal.eigenvalues()[0];
        for w in primal.eigenvalues().windows(2) {
            assert!(w[0] - w[1] > 1e-8 * top, "degenerate test spectrum");
        }

        for j in 0..p {
            assert_relative_eq!(
                primal.eigenvalues()[j],
                dual.eigenvalues()[j],
                max_relative = 1e-8
            );
            assert_relative_eq!(
                primal.eigenvalues()[j],
                classical.eigenvalues()[j],
                max_relative = 1e-8
            );
        }

        let train = map.train().clone();
        let probes = random_train(10, 3, 12);
        let mut points: Vec<Vec<f64>> = Vec::new();
        for i in 0..train.nrows() {
            points.push(row(&train, i));
        }
        for i in 0..probes.nrows() {
            points.push(row(&probes, i));
        }

        let models = [&primal, &dual, &classical];
        for j in 0..p {
            let reference: Vec<f64> = points
                .iter()
                .map(|z| primal.project_primal(z, j).unwrap())
                .collect();
            // Scale for relative comparison: the largest projection magnitude
            // over all probes; the same point anchors the sign alignment.
            let (anchor, scale) = reference
                .iter()
                .map(|v| v.abs())
                .enumerate()
                .fold((0, 0.0), |acc, (i, v)| if v > acc.1 { (i, v) } else { acc });
            for model in models {
                for proj in ALL_PROJECTIONS {
                    let values: Vec<f64> = points
                        .iter()
                        .map(|z| model.project(z, j, proj).unwrap())
                        .collect();
                    // Eigenvector sign is solver-dependent (the deterministic
                    // sign convention acts on different matrices per route);
                    // one global flip per route must reconcile everything.
                    let sign = if values[anchor] * reference[anchor] < 0.0 {
                        -1.0
                    } else {
                        1.0
                    };
                    for (v, r) in values.iter().zip(&reference) {
                        assert!(
                            (sign * v - r).abs() <= 1e-6 * scale,
                            "fit {:?} proj {proj:?} component {j}: {v} vs {r} (scale {scale})",
                            model.route()
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn normalization_invariants_hold_on_every_route() {
        let map = gaussian_map(25, 2, 31);
        let k = map.gram().values().clone();
        let p = 5;
        for route in [KpcaRoute::Primal, KpcaRoute::Dual, KpcaRoute::Classical] {
            let model = KpcaModel::fit(map.clone(), p, route).unwrap();
            for j in 0..p {
                let u = model.us().column(j).clone_owned();
                let alpha = model.alphas().column(j).clone_owned();
                // u = N lambda alpha
                let nlam = model.eigenvalues()[j];
                for i in 0..u.len() {
                    assert!(
                        (u[i] - nlam * alpha[i]).abs() <= 1e-8 * nlam.abs().max(1.0),
                        "route {route}, component {j}"
                    );
                }
                // u^T K^(-1) u = 1
                let pinv_u = map.decomposition().pinv_apply(&u);
                assert_relative_eq!(u.dot(&pinv_u), 1.0, max_relative = 1e-6);
                // alpha^T (C K C) alpha = 1
                let ca = center_vec(&alpha);
                assert_relative_eq!(ca.dot(&(&k * &ca)), 1.0, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn train_projection_variance_matches_eigenvalue() {
        let map = gaussian_map(30, 2, 41);
        let p = 6;
        let model = KpcaModel::fit_dual(map.clone(), p).unwrap();
        let projections = model
            .project_dataset(map.train(), ProjectionRoute::Dual)
            .unwrap();
        let n = map.feature_dim() as f64;
        for j in 0..p {
            let mean: f64 = (0..map.feature_dim()).map(|i| projections[(i, j)]).sum::<f64>() / n;
            assert!(mean.abs() < 1e-8, "projections of train are centered");
            let var: f64 = (0..map.feature_dim())
                .map(|i| projections[(i, j)] * projections[(i, j)])
                .sum::<f64>()
                / n;
            assert_relative_eq!(var, model.lambdas()[j], max_relative = 1e-7);
        }
    }

    #[test]
    fn total_variance_is_recovered() {
        let map = gaussian_map(20, 2, 51);
        let p = available_components(&map).unwrap();
        let model = KpcaModel::fit_primal(map.clone(), p).unwrap();
        let total: f64 = model.lambdas().iter().sum();
        let mut empirical = 0.0;
        for i in 0..map.feature_dim() {
            let psi = map.map_centered(&row(map.train(), i)).unwrap();
            empirical += psi.dot(&psi);
        }
        empirical /= map.feature_dim() as f64;
        assert_relative_eq!(total, empirical, max_relative = 1e-8);
    }

    #[test]
    fn mean_kernel_vector_projects_to_zero() {
        // A probe whose kernel vector equals K e sits at the feature mean, so
        // every centered projection vanishes. Verified on the formula level:
        // (K e) . K^(-1) u = e^T u and (K e) . C alpha = e^T K C alpha.
        let map = gaussian_map(18, 2, 61);
        let model = KpcaModel::fit_dual(map.clone(), 4).unwrap();
        let e = mean_weight_vector(18);
        let ke = map.gram().values() * &e;
        for j in 0..4 {
            for route in ALL_PROJECTIONS {
                let value = model.project_kz(&ke, j, route);
                assert!(
                    value.abs() <= 1e-8 * model.eigenvalues()[0].max(1.0),
                    "route {route:?} component {j}: {value}"
                );
            }
        }
    }

    #[test]
    fn too_many_components_is_an_error() {
        let map = gaussian_map(10, 2, 71);
        let available = available_components(&map).unwrap();
        let err = KpcaModel::fit_primal(map.clone(), available + 1).unwrap_err();
        assert!(matches!(err, Error::TooManyComponents { .. }));
        assert!(matches!(
            KpcaModel::fit_dual(map.clone(), 0).unwrap_err(),
            Error::InvalidInput(_)
        ));
    }

    #[test]
    fn single_point_has_no_components() {
        let train = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        let map =
            Arc::new(ExplicitFeatureMap::fit(KernelSpec::Gaussian { sigma: 1.0 }, &train).unwrap());
        assert_eq!(available_components(&map).unwrap(), 0);
        assert!(matches!(
            KpcaModel::fit_primal(map, 1).unwrap_err(),
            Error::TooManyComponents { .. }
        ));
    }

    #[test]
    fn feature_covariance_matches_empirical() {
        let map = gaussian_map(12, 3, 81);
        let cov = feature_covariance(&map).unwrap();
        let n = map.feature_dim();
        let mut empirical = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            let psi = map.map_centered(&row(map.train(), i)).unwrap();
            empirical += &psi * psi.transpose();
        }
        empirical /= n as f64;
        let max_diff = (&cov - &empirical)
            .iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs()));
        assert!(max_diff < 1e-9, "max diff {max_diff}");
    }

    #[test]
    fn double_centered_matrix_has_zero_row_sums() {
        let map = gaussian_map(15, 2, 91);
        let k = map.gram().values();
        let n = 15;
        let row_means: Vec<f64> = (0..n).map(|i| k.row(i).sum() / n as f64).collect();
        let total: f64 = row_means.iter().sum::<f64>() / n as f64;
        for i in 0..n {
            let mut row_sum = 0.0;
            for j in 0..n {
                row_sum += ((k[(i, j)] - row_means[i]) - row_means[j]) + total;
            }
            assert!(row_sum.abs() <= 1e-9 * n as f64, "row {i} sum {row_sum}");
        }
    }

    #[test]
    fn save_load_round_trip_preserves_projections() {
        let dir = tempfile::tempdir().unwrap();
        let map_path = dir.path().join("map.xfm");
        let model_path = dir.path().join("model.kpca");

        let map = gaussian_map(16, 2, 101);
        map.save(&map_path).unwrap();
        let model = KpcaModel::fit_classical(map.clone(), 3).unwrap();
        model.save(&model_path, &map_path).unwrap();

        let loaded = KpcaModel::load(&model_path).unwrap();
        assert_eq!(loaded.route(), KpcaRoute::Classical);
        assert_eq!(loaded.components(), 3);

        let probes = random_train(5, 2, 102);
        for i in 0..5 {
            let z = row(&probes, i);
            for route in ALL_PROJECTIONS {
                for j in 0..3 {
                    let a = model.project(&z, j, route).unwrap();
                    let b = loaded.project(&z, j, route).unwrap();
                    assert_relative_eq!(a, b, epsilon = 1e-10, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn load_rejects_mismatched_feature_map() {
        let dir = tempfile::tempdir().unwrap();
        let right_path = dir.path().join("right.xfm");
        let wrong_path = dir.path().join("wrong.xfm");
        let model_path = dir.path().join("model.kpca");

        let map = gaussian_map(10, 2, 111);
        map.save(&right_path).unwrap();
        let other = gaussian_map(10, 2, 112);
        other.save(&wrong_path).unwrap();

        let model = KpcaModel::fit_dual(map, 2).unwrap();
        // Reference the wrong feature map on purpose.
        model.save(&model_path, &wrong_path).unwrap();
        assert!(matches!(
            KpcaModel::load(&model_path).unwrap_err(),
            Error::FingerprintMismatch { .. }
        ));
    }

    #[test]
    fn relative_featmap_reference_resolves_against_model_dir() {
        let dir = tempfile::tempdir().unwrap();
        let map_path = dir.path().join("map.xfm");
        let model_path = dir.path().join("model.kpca");
        let map = gaussian_map(8, 2, 121);
        map.save(&map_path).unwrap();
        let model = KpcaModel::fit_primal(map, 2).unwrap();
        model.save(&model_path, Path::new("map.xfm")).unwrap();
        assert!(KpcaModel::load(&model_path).is_ok());
    }
}
