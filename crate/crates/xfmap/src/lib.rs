//! Exact finite-dimensional explicit feature maps for kernel functions.
//!
//! For training points `x_1 .. x_N` and a positive semidefinite kernel `k`,
//! the map `phi(z) = K^(-1/2) k_z` sends any input to an `N`-dimensional
//! vector whose dot products against mapped training points reproduce the
//! kernel exactly: `<phi(x_n), phi(z)> = k(x_n, z)`. That turns kernel
//! methods into plain linear algebra on explicit vectors; this crate builds
//! kernel PCA (four computation routes that agree to round-off) and
//! multi-class Fisher discriminant analysis on top of the map, plus dataset
//! plumbing and a CLI for the digit-classification experiment.
//!
//! ```
//! use nalgebra::DMatrix;
//! use xfmap::{ExplicitFeatureMap, KernelSpec};
//!
//! let train = DMatrix::from_row_slice(3, 2, &[0.0, 0.1, 1.0, -0.2, 0.3, 0.8]);
//! let kernel = KernelSpec::Gaussian { sigma: 1.0 };
//! let map = ExplicitFeatureMap::fit(kernel.clone(), &train).unwrap();
//!
//! // Mapped training point against any mapped point: exact kernel value.
//! let z = [0.5, 0.5];
//! let lhs = map.map_point(&[0.0, 0.1]).unwrap().dot(&map.map_point(&z).unwrap());
//! let rhs = kernel.eval(&[0.0, 0.1], &z).unwrap();
//! assert!((lhs - rhs).abs() < 1e-10);
//! ```
//!
//! Everything is deterministic: kernel evaluations are order-normalized so
//! Gram matrices are bit-exactly symmetric, eigensolutions follow a fixed
//! sign convention, parallel batch operations reduce in a fixed order, and
//! archives store floats in shortest round-trip decimal form.

pub mod cli;
pub mod data;
pub mod error;
pub mod export;
pub mod featmap;
pub mod fingerprint;
pub mod fisher;
pub mod kernel;
pub mod kpca;
pub mod pipeline;
pub mod spectral;
pub mod synth;
mod textio;

pub use data::Dataset;
pub use error::{Error, Result};
pub use featmap::ExplicitFeatureMap;
pub use fisher::FisherModel;
pub use kernel::KernelSpec;
pub use kpca::{KpcaModel, KpcaRoute, ProjectionRoute};

/// Crate version, embedded in output file headers.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
