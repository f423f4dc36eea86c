//! Command-line frontend.
//!
//! Every subcommand is deterministic given identical inputs, flags, and
//! seeds: output files embed no timestamps, floats are written in shortest
//! round-trip form, and all randomness is seeded. Data inputs (`--in`) may be
//! IDX image files or delimited text; the format is sniffed from the leading
//! bytes. Labels come from a separate `--labels` file (IDX or one integer per
//! line) or, for commands that need them, from the last CSV column.
//!
//! Exit codes: 0 success, 1 runtime failure (one `error: <category>: ...`
//! line on stderr), 2 usage errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;

use crate::data::{load_auto, Dataset};
use crate::error::{Error, Result};
use crate::export::{export_matrix, ExportFormat};
use crate::featmap::ExplicitFeatureMap;
use crate::fingerprint::matrix_fingerprint;
use crate::fisher::{ClassificationReport, FisherModel};
use crate::kernel::KernelSpec;
use crate::kpca::{KpcaModel, KpcaRoute, ProjectionRoute};
use crate::pipeline::{run_digits_experiment, PipelineConfig};

#[derive(Parser)]
#[command(
    name = "xfmap",
    version,
    about = "Exact explicit feature maps for kernels, with kernel PCA and Fisher analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Kernel Gram matrix of a dataset.
    Gram(GramArgs),
    /// Fit an explicit feature map and save it as an archive.
    FitMap(FitMapArgs),
    /// Map a dataset through a saved feature map.
    Map(MapArgs),
    /// Fit kernel PCA components on a saved feature map.
    KpcaFit(KpcaFitArgs),
    /// Project a dataset onto saved kernel PCA components.
    KpcaProject(KpcaProjectArgs),
    /// Fit Fisher discriminant directions on labeled features.
    FisherFit(FisherFitArgs),
    /// Evaluate a Fisher model on labeled features.
    FisherEval(FisherEvalArgs),
    /// Pairwise feature-space distances, computed from kernel values alone.
    Dist(DistArgs),
    /// The full digit experiment: subset, map under both digit kernels,
    /// Fisher analysis, feature export, comparison report.
    #[command(name = "mnist-247")]
    Mnist247(MnistArgs),
}

#[derive(Args)]
struct GramArgs {
    /// Kernel spec, e.g. "kind=gaussian sigma=1.5".
    #[arg(long)]
    kernel: String,
    /// Input data: IDX images or delimited text.
    #[arg(long = "in")]
    input: PathBuf,
    /// Separate label file (unused by the Gram matrix itself).
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// Output format: csv or tsv.
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct FitMapArgs {
    #[arg(long)]
    kernel: String,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Gram eigenvalue cutoff (default: 1e-10 relative to the largest).
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MapArgs {
    /// Saved feature-map archive.
    #[arg(long)]
    map: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    /// Label file; labels are carried into the output's last column.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Subtract the training mean in feature space.
    #[arg(long)]
    centered: bool,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: String,
    /// Write a column-name header row.
    #[arg(long)]
    header: bool,
}

#[derive(Args)]
struct KpcaFitArgs {
    /// Saved feature-map archive; its path is stored in the model.
    #[arg(long)]
    map: PathBuf,
    /// Number of principal components.
    #[arg(long)]
    components: usize,
    /// Solver route: primal, dual, or classical.
    #[arg(long, default_value = "primal")]
    route: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct KpcaProjectArgs {
    /// Saved kernel PCA model.
    #[arg(long)]
    model: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Projection formula: primal, dual, combined, or classical.
    #[arg(long, default_value = "combined")]
    route: String,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    header: bool,
}

#[derive(Args)]
struct FisherFitArgs {
    /// Labeled features: last CSV column or a separate --labels file.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Number of discriminant directions (at most classes - 1).
    #[arg(long, default_value_t = 2)]
    components: usize,
    /// Within-class scatter ridge (default: 1e-6 trace(S_W)/n).
    #[arg(long)]
    reg_gamma: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FisherEvalArgs {
    /// Saved Fisher model.
    #[arg(long)]
    model: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Also write the report to a file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DistArgs {
    #[arg(long)]
    kernel: String,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    labels: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "csv")]
    format: String,
}

#[derive(Args)]
struct MnistArgs {
    /// Training images, IDX format.
    #[arg(long)]
    train_images: PathBuf,
    #[arg(long)]
    train_labels: PathBuf,
    #[arg(long)]
    test_images: PathBuf,
    #[arg(long)]
    test_labels: PathBuf,
    /// Digit classes to keep.
    #[arg(long, value_delimiter = ',', default_values_t = vec![2u32, 4, 7])]
    classes: Vec<u32>,
    /// Training samples per class.
    #[arg(long, default_value_t = 500)]
    per_class: usize,
    /// Test samples per class; 0 keeps every test sample of the classes.
    #[arg(long, default_value_t = 0)]
    test_per_class: usize,
    /// Subset selection seed; 0 takes the first samples in file order.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fisher discriminant directions.
    #[arg(long, default_value_t = 2)]
    components: usize,
    #[arg(long)]
    reg_gamma: Option<f64>,
    #[arg(long)]
    cutoff: Option<f64>,
    /// Directory for the feature files and report.
    #[arg(long)]
    out_dir: PathBuf,
}

/// Parse and dispatch; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}: {e}", e.category());
            1
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Gram(args) => cmd_gram(args),
        Command::FitMap(args) => cmd_fit_map(args),
        Command::Map(args) => cmd_map(args),
        Command::KpcaFit(args) => cmd_kpca_fit(args),
        Command::KpcaProject(args) => cmd_kpca_project(args),
        Command::FisherFit(args) => cmd_fisher_fit(args),
        Command::FisherEval(args) => cmd_fisher_eval(args),
        Command::Dist(args) => cmd_dist(args),
        Command::Mnist247(args) => cmd_mnist(args),
    }
}

fn load_data(input: &Path, labels: Option<&PathBuf>, labeled_csv: bool) -> Result<Dataset> {
    load_auto(input, labels.map(|p| p.as_path()), labeled_csv)
}

fn header_comments(kernel: Option<&KernelSpec>, data: &Dataset) -> Vec<String> {
    let mut comments = vec![format!("xfmap {}", crate::VERSION)];
    if let Some(k) = kernel {
        comments.push(format!("kernel {k}"));
    }
    comments.push(format!(
        "input fingerprint {}",
        matrix_fingerprint(data.samples())
    ));
    comments
}

fn report_lines(report: &ClassificationReport) -> String {
    let mut out = format!(
        "accuracy {:.4} ({}/{})\n",
        report.accuracy(),
        report.correct,
        report.total
    );
    for &(label, total, correct) in &report.per_class {
        let acc = if total == 0 {
            0.0
        } else {
            correct as f64 / total as f64
        };
        out.push_str(&format!("  class {label}: {acc:.4} ({correct}/{total})\n"));
    }
    out
}

fn cmd_gram(args: GramArgs) -> Result<()> {
    let kernel = KernelSpec::from_str(&args.kernel)?;
    let format = ExportFormat::from_str(&args.format)?;
    let data = load_data(&args.input, args.labels.as_ref(), false)?;
    let gram = kernel.gram(data.samples())?;
    let comments = header_comments(Some(&kernel), &data);
    export_matrix(&args.out, format, gram.values(), None, &comments, false)?;
    println!(
        "wrote {0}x{0} gram matrix to {1}",
        gram.n(),
        args.out.display()
    );
    Ok(())
}

fn cmd_fit_map(args: FitMapArgs) -> Result<()> {
    let kernel = KernelSpec::from_str(&args.kernel)?;
    let data = load_data(&args.input, args.labels.as_ref(), false)?;
    let map = ExplicitFeatureMap::fit_with_cutoff(kernel, data.samples(), args.cutoff)?;
    map.save(&args.out)?;
    println!(
        "fitted feature map: {} train points, effective rank {}; wrote {}",
        map.feature_dim(),
        map.effective_rank(),
        args.out.display()
    );
    Ok(())
}

fn cmd_map(args: MapArgs) -> Result<()> {
    let format = ExportFormat::from_str(&args.format)?;
    let map = ExplicitFeatureMap::load(&args.map)?;
    let data = load_data(&args.input, args.labels.as_ref(), false)?;
    let features = map.map_dataset(data.samples(), args.centered)?;
    let mut comments = header_comments(Some(map.kernel()), &data);
    comments.push(format!(
        "train fingerprint {}",
        map.gram().dataset_fingerprint()
    ));
    comments.push(format!("centered {}", args.centered));
    export_matrix(
        &args.out,
        format,
        &features,
        data.labels(),
        &comments,
        args.header,
    )?;
    println!(
        "mapped {} points to {} features; wrote {}",
        data.n(),
        map.feature_dim(),
        args.out.display()
    );
    Ok(())
}

fn cmd_kpca_fit(args: KpcaFitArgs) -> Result<()> {
    let route = KpcaRoute::from_str(&args.route)?;
    let map = Arc::new(ExplicitFeatureMap::load(&args.map)?);
    let model = KpcaModel::fit(map, args.components, route)?;
    model.save(&args.out, &args.map)?;
    let eigenvalues = model
        .eigenvalues()
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join(" ");
    println!(
        "fitted {} components (route {route}); eigenvalues: {eigenvalues}; wrote {}",
        model.components(),
        args.out.display()
    );
    Ok(())
}

fn cmd_kpca_project(args: KpcaProjectArgs) -> Result<()> {
    let route = ProjectionRoute::from_str(&args.route)?;
    let format = ExportFormat::from_str(&args.format)?;
    let model = KpcaModel::load(&args.model)?;
    let data = load_data(&args.input, args.labels.as_ref(), false)?;
    let projections = model.project_dataset(data.samples(), route)?;
    let mut comments = header_comments(Some(model.map().kernel()), &data);
    comments.push(format!(
        "train fingerprint {}",
        model.map().gram().dataset_fingerprint()
    ));
    comments.push(format!("route {route}"));
    export_matrix(
        &args.out,
        format,
        &projections,
        data.labels(),
        &comments,
        args.header,
    )?;
    println!(
        "projected {} points onto {} components (route {route}); wrote {}",
        data.n(),
        model.components(),
        args.out.display()
    );
    Ok(())
}

fn cmd_fisher_fit(args: FisherFitArgs) -> Result<()> {
    let data = load_data(&args.input, args.labels.as_ref(), true)?;
    let labels = data.labels_required()?;
    let model = FisherModel::fit(data.samples(), labels, args.components, args.reg_gamma)?;
    let comments = vec![
        format!("input fingerprint {}", matrix_fingerprint(data.samples())),
        format!("source {}", data.source()),
    ];
    model.save_with_comments(&args.out, &comments)?;
    println!(
        "fitted {} discriminants over {} classes (reg gamma {:e}); wrote {}",
        model.components(),
        model.class_labels().len(),
        model.reg_gamma(),
        args.out.display()
    );
    Ok(())
}

fn cmd_fisher_eval(args: FisherEvalArgs) -> Result<()> {
    let model = FisherModel::load(&args.model)?;
    let data = load_data(&args.input, args.labels.as_ref(), true)?;
    let labels = data.labels_required()?;
    let report = model.report(data.samples(), labels)?;
    let text = format!(
        "fisher eval: {} classes, {} discriminants\n{}",
        model.class_labels().len(),
        model.components(),
        report_lines(&report)
    );
    print!("{text}");
    if let Some(out) = &args.out {
        std::fs::write(out, &text).map_err(|e| Error::io(out.display().to_string(), e))?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

fn cmd_dist(args: DistArgs) -> Result<()> {
    let kernel = KernelSpec::from_str(&args.kernel)?;
    let format = ExportFormat::from_str(&args.format)?;
    let data = load_data(&args.input, args.labels.as_ref(), false)?;
    let gram = kernel.gram(data.samples())?;
    let k = gram.values();
    let n = gram.n();
    // ||phi(x_i) - phi(x_j)||^2 = k_ii + k_jj - 2 k_ij, floored against
    // round-off before the square root.
    let mut distances = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = (k[(i, i)] + k[(j, j)] - 2.0 * k[(i, j)]).max(0.0).sqrt();
            distances[(i, j)] = v;
            distances[(j, i)] = v;
        }
    }
    let comments = header_comments(Some(&kernel), &data);
    export_matrix(&args.out, format, &distances, None, &comments, false)?;
    println!(
        "wrote {n}x{n} feature distance matrix to {}",
        args.out.display()
    );
    Ok(())
}

fn cmd_mnist(args: MnistArgs) -> Result<()> {
    let train = crate::data::load_idx(&args.train_images, Some(&args.train_labels))?;
    let test = crate::data::load_idx(&args.test_images, Some(&args.test_labels))?;
    let config = PipelineConfig {
        classes: args.classes,
        per_class_train: args.per_class,
        per_class_test: args.test_per_class,
        seed: args.seed,
        components: args.components,
        reg_gamma: args.reg_gamma,
        cutoff: args.cutoff,
    };
    let report = run_digits_experiment(&train, &test, &config)?;
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| Error::io(args.out_dir.display().to_string(), e))?;
    let feature_files = report.write_features(&args.out_dir)?;
    let text = report.render();
    let report_path = args.out_dir.join("report.txt");
    std::fs::write(&report_path, &text)
        .map_err(|e| Error::io(report_path.display().to_string(), e))?;
    print!("{text}");
    for f in feature_files {
        println!("wrote {}", f.display());
    }
    println!("wrote {}", report_path.display());
    Ok(())
}
