//! The defining property of the explicit feature map: dot products of mapped
//! vectors reproduce kernel values exactly whenever one side is a training
//! point, even when the Gram matrix is rank-deficient. Off-train pairs get no
//! such guarantee, and this example shows the gap.
//!
//! Run with: cargo run --release -p xfmap --example reproducing_property

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xfmap::{ExplicitFeatureMap, KernelSpec};

fn random_matrix(n: usize, d: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0))
}

fn row(m: &DMatrix<f64>, i: usize) -> Vec<f64> {
    (0..m.ncols()).map(|j| m[(i, j)]).collect()
}

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let train = random_matrix(40, 3, &mut rng);
    let kernel = KernelSpec::Gaussian { sigma: 1.0 };
    let map = ExplicitFeatureMap::fit(kernel.clone(), &train).unwrap();
    println!(
        "fitted {} on {} points: feature dim {}, effective rank {}",
        kernel,
        train.nrows(),
        map.feature_dim(),
        map.effective_rank()
    );

    // Train point against arbitrary probes: exact reproduction.
    let probes = random_matrix(20, 3, &mut rng);
    let mut worst: f64 = 0.0;
    for n in 0..train.nrows() {
        let phi_n = map.map_point(&row(&train, n)).unwrap();
        for p in 0..probes.nrows() {
            let z = row(&probes, p);
            let phi_z = map.map_point(&z).unwrap();
            let got = phi_n.dot(&phi_z);
            let want = kernel.eval(&row(&train, n), &z).unwrap();
            worst = worst.max((got - want).abs());
        }
    }
    println!("max |<phi(x_n), phi(z)> - k(x_n, z)| over 40x20 pairs: {worst:.3e}");

    // Duplicate a training row: the Gram matrix drops rank, the pseudo-inverse
    // handles it, and the property survives.
    let mut with_dup = train.clone();
    for j in 0..3 {
        with_dup[(39, j)] = with_dup[(5, j)];
    }
    let deficient = ExplicitFeatureMap::fit(kernel.clone(), &with_dup).unwrap();
    let mut worst_dup: f64 = 0.0;
    for n in 0..with_dup.nrows() {
        let phi_n = deficient.map_point(&row(&with_dup, n)).unwrap();
        for p in 0..probes.nrows() {
            let z = row(&probes, p);
            let phi_z = deficient.map_point(&z).unwrap();
            let got = phi_n.dot(&phi_z);
            let want = kernel.eval(&row(&with_dup, n), &z).unwrap();
            worst_dup = worst_dup.max((got - want).abs());
        }
    }
    println!(
        "with a duplicated row: effective rank {} of {}, max error {worst_dup:.3e}",
        deficient.effective_rank(),
        deficient.feature_dim()
    );

    // Two off-train points: no guarantee. Far from the training cloud the
    // mapped vector shrinks toward zero while k(z, z) stays 1.
    let z_far = [8.0, 8.0, 8.0];
    let phi_far = map.map_point(&z_far).unwrap();
    let self_inner = phi_far.dot(&phi_far);
    let self_kernel = kernel.eval(&z_far, &z_far).unwrap();
    println!(
        "off-train self similarity: <phi(z), phi(z)> = {self_inner:.6} vs k(z, z) = {self_kernel:.6}"
    );
    println!("(the mismatch is expected: the guarantee covers training points only)");
}
