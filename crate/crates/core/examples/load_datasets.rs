//! Loads the bundled datasets, generates the synthetic task, and shows the
//! stratified split and train-fitted standardization.
//!
//! `cargo run --release --example load_datasets`

use hybridact::data::{
    fit_standardizer, generate_synthetic_binary, load_boston, load_iris, load_mnist_limited, resolve_data_dir,
    stratified_split, CsvOptions, SplitSpec, SyntheticSpec,
};

fn main() -> hybridact::Result<()> {
    let dir = resolve_data_dir(None);

    let iris = load_iris(&dir.join("iris.csv"), CsvOptions::default())?;
    println!("iris: {} rows, {} features, class counts {:?}", iris.len(), iris.num_features(), iris.class_counts());
    let (train, test) = stratified_split(&iris, &SplitSpec::new(0.8, 7, true))?;
    println!("  stratified 80/20 split: train {:?}, test {:?}", train.class_counts(), test.class_counts());

    let boston = load_boston(&dir.join("boston_housing.csv"), CsvOptions::default())?;
    let std = fit_standardizer(&boston, true);
    let z = std.apply(&boston);
    println!("boston: {} rows, {} features; first standardized row {:?}", z.len(), z.num_features(), &z.features.row(0)[..4]);

    let synth = generate_synthetic_binary(&SyntheticSpec::default())?;
    println!("synthetic: {} rows, {} features, class counts {:?}", synth.len(), synth.num_features(), synth.class_counts());

    let mnist = dir.join("mnist");
    match load_mnist_limited(
        &mnist.join("t10k-images-idx3-ubyte.gz"),
        &mnist.join("t10k-labels-idx1-ubyte.gz"),
        Some(1000),
    ) {
        Ok(m) => println!("mnist test (first 1000): {} rows, {} pixels, class counts {:?}", m.len(), m.num_features(), m.class_counts()),
        Err(e) => println!("mnist unavailable: {e}"),
    }
    Ok(())
}
