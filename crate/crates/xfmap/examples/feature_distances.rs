//! Distances between mapped training points come straight from kernel values:
//! ||phi(x_i) - phi(x_j)||^2 = k(x_i, x_i) + k(x_j, x_j) - 2 k(x_i, x_j).
//! No feature vectors needed. This example checks the identity against
//! explicitly mapped vectors and then prints a small distance table for the
//! two digit kernels on synthetic digit images.
//!
//! Run with: cargo run --release -p xfmap --example feature_distances

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xfmap::{synth, ExplicitFeatureMap, KernelSpec};

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let train = DMatrix::from_fn(30, 4, |_, _| rng.random_range(-2.0..2.0));
    let kernel = KernelSpec::Laplacian { gamma: 0.7 };
    let map = ExplicitFeatureMap::fit(kernel.clone(), &train).unwrap();
    let features = map.map_dataset(&train, false).unwrap();

    let mut worst: f64 = 0.0;
    for i in 0..train.nrows() {
        for j in 0..train.nrows() {
            let xi: Vec<f64> = (0..4).map(|c| train[(i, c)]).collect();
            let xj: Vec<f64> = (0..4).map(|c| train[(j, c)]).collect();
            let from_kernel = kernel.feature_distance(&xi, &xj).unwrap();
            let from_features = (features.row(i) - features.row(j)).norm_squared();
            worst = worst.max((from_kernel - from_features).abs());
        }
    }
    println!("kernel {kernel}");
    println!("max |kernel-side - feature-side| over all train pairs (squared): {worst:.3e}");

    // Digit kernels on synthetic 28x28 images: distances separate the classes.
    let digits = synth::digits(&[2, 4, 7], 2, 42).unwrap();
    let unit = digits.scale_unit();
    for kernel in [KernelSpec::MnistK1, KernelSpec::MnistK2] {
        println!("\npairwise feature distances under {kernel}:");
        let labels = unit.labels().unwrap();
        print!("{:>10}", "");
        for l in labels {
            print!("{l:>10}");
        }
        println!();
        for (i, label) in labels.iter().enumerate() {
            print!("{label:>10}");
            for j in 0..unit.n() {
                let d2 = kernel
                    .feature_distance(unit.row(i).as_slice(), unit.row(j).as_slice())
                    .unwrap();
                print!("{:>10.4}", d2.sqrt());
            }
            println!();
        }
    }
    println!("\nsame-class entries sit near the diagonal; cross-class entries are larger");
}
