//! Models persist as plain-text archives: a magic line, comment lines with
//! the tool version, kernel and a dataset fingerprint, then the numbers in
//! full round-trip precision. Reloading is bit-exact. A projection model
//! references its feature map file and refuses to load against the wrong one.
//!
//! Run with: cargo run --release -p xfmap --example model_archives

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use xfmap::{ExplicitFeatureMap, KernelSpec, KpcaModel, KpcaRoute};

fn main() {
    let dir = std::env::temp_dir().join("xfmap_archive_example");
    std::fs::create_dir_all(&dir).unwrap();
    let map_path = dir.join("digits.xfmap");
    let model_path = dir.join("digits.kpca");

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let train = DMatrix::from_fn(25, 4, |_, _| rng.random_range(0.0..1.0));
    let kernel = KernelSpec::Polynomial { scale: 0.5, offset: 1.0, degree: 2 };

    let map = Arc::new(ExplicitFeatureMap::fit(kernel, &train).unwrap());
    map.save(&map_path).unwrap();
    let model = KpcaModel::fit(map.clone(), 3, KpcaRoute::Primal).unwrap();
    model.save(&model_path, &map_path).unwrap();

    // The head of the archive is human-readable provenance.
    let text = std::fs::read_to_string(&map_path).unwrap();
    println!("head of {}:", map_path.display());
    for line in text.lines().take(6) {
        println!("  {line}");
    }

    // Round trips are bit-exact: same bytes after save(load(save(...))).
    let reloaded = ExplicitFeatureMap::load(&map_path).unwrap();
    let again = dir.join("digits_again.xfmap");
    reloaded.save(&again).unwrap();
    let identical = std::fs::read(&map_path).unwrap() == std::fs::read(&again).unwrap();
    println!("\nfeature map round trip bit-exact: {identical}");

    let model_back = KpcaModel::load(&model_path).unwrap();
    println!(
        "projection model round trip: {} components, eigenvalues {:?}",
        model_back.components(),
        model_back.eigenvalues()
    );

    // Pointing the model at a map fitted on different data must fail loudly:
    // the stored fingerprint no longer matches.
    let other = DMatrix::from_fn(25, 4, |_, _| rng.random_range(0.0..1.0));
    let other_map = ExplicitFeatureMap::fit(
        KernelSpec::Polynomial { scale: 0.5, offset: 1.0, degree: 2 },
        &other,
    )
    .unwrap();
    other_map.save(&map_path).unwrap();
    match KpcaModel::load(&model_path) {
        Err(e) => println!("swapped training data detected: {e}"),
        Ok(_) => println!("BUG: fingerprint mismatch went unnoticed"),
    }
}
