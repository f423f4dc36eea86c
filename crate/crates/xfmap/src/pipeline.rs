//! The end-to-end digit experiment: subset, scale, map under the two digit
//! kernels, run Fisher analysis on the explicit features, and compare
//! nearest-class-mean accuracy.
//!
//! The experiment takes raw-pixel datasets (values `0..=255`, 784 per
//! sample), scales them to `[0, 1]`, selects a per-class training subset,
//! fits the explicit feature map under `mnist_k1` and `mnist_k2`, and fits a
//! Fisher discriminant on the uncentered mapped training features. Feature
//! matrices are exportable for external embedding tools; the report is plain
//! deterministic text, so a rerun with identical inputs is byte-identical.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;

use crate::data::Dataset;
use crate::error::Result;
use crate::export::{export_matrix, ExportFormat};
use crate::featmap::ExplicitFeatureMap;
use crate::fisher::{ClassificationReport, FisherModel};
use crate::kernel::KernelSpec;

/// Knobs of the digit experiment. `Default` reproduces the full-scale setup:
/// classes 2, 4 and 7 with 500 training samples each.
#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub classes: Vec<u32>,
    pub per_class_train: usize,
    /// Test samples per class; 0 keeps every test sample of the classes.
    pub per_class_test: usize,
    pub seed: u64,
    /// Fisher discriminant directions to fit.
    pub components: usize,
    /// Within-class scatter ridge; `None` picks the trace-scaled default.
    pub reg_gamma: Option<f64>,
    /// Gram eigenvalue cutoff; `None` picks the spectral default.
    pub cutoff: Option<f64>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            classes: vec![2, 4, 7],
            per_class_train: 500,
            per_class_test: 0,
            seed: 0,
            components: 2,
            reg_gamma: None,
            cutoff: None,
        }
    }
}

/// Everything measured for one kernel.
#[derive(Debug, Clone)]
pub struct KernelRun {
    pub kernel: KernelSpec,
    pub effective_rank: usize,
    pub reg_gamma: f64,
    pub train_fingerprint: String,
    /// Mapped (uncentered) training features, one row per sample.
    pub train_features: DMatrix<f64>,
    pub train_labels: Vec<u32>,
    pub train_report: ClassificationReport,
    pub test_report: ClassificationReport,
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub classes: Vec<u32>,
    pub seed: u64,
    pub per_class_train: usize,
    pub test_n: usize,
    /// One run per kernel, `mnist_k1` then `mnist_k2`.
    pub runs: Vec<KernelRun>,
}

/// Run the two-kernel digit experiment on raw-pixel train and test datasets.
pub fn run_digits_experiment(
    train: &Dataset,
    test: &Dataset,
    config: &PipelineConfig,
) -> Result<ExperimentReport> {
    let train_sub = train
        .subset_by_classes(&config.classes, config.per_class_train, config.seed)?
        .scale_unit();
    let test_sub = if config.per_class_test == 0 {
        test.take_classes(&config.classes)?
    } else {
        test.subset_by_classes(&config.classes, config.per_class_test, config.seed)?
    }
    .scale_unit();
    let train_labels = train_sub.labels_required()?.to_vec();
    let test_labels = test_sub.labels_required()?.to_vec();

    let mut runs = Vec::with_capacity(2);
    for kernel in [KernelSpec::MnistK1, KernelSpec::MnistK2] {
        log::info!("fitting feature map under {kernel} on {} samples", train_sub.n());
        let map = ExplicitFeatureMap::fit_with_cutoff(
            kernel.clone(),
            train_sub.samples(),
            config.cutoff,
        )?;
        let train_features = map.map_dataset(train_sub.samples(), false)?;
        let test_features = map.map_dataset(test_sub.samples(), false)?;
        let fisher = FisherModel::fit(
            &train_features,
            &train_labels,
            config.components,
            config.reg_gamma,
        )?;
        let train_report = fisher.report(&train_features, &train_labels)?;
        let test_report = fisher.report(&test_features, &test_labels)?;
        log::info!(
            "{kernel}: train accuracy {:.4}, test accuracy {:.4}",
            train_report.accuracy(),
            test_report.accuracy()
        );
        runs.push(KernelRun {
            kernel,
            effective_rank: map.effective_rank(),
            reg_gamma: fisher.reg_gamma(),
            train_fingerprint: map.gram().dataset_fingerprint().to_string(),
            train_features,
            train_labels: train_labels.clone(),
            train_report,
            test_report,
        });
    }

    Ok(ExperimentReport {
        classes: config.classes.clone(),
        seed: config.seed,
        per_class_train: config.per_class_train,
        test_n: test_sub.n(),
        runs,
    })
}

fn class_lines(out: &mut String, report: &ClassificationReport) {
    for &(label, total, correct) in &report.per_class {
        let acc = if total == 0 {
            0.0
        } else {
            correct as f64 / total as f64
        };
        out.push_str(&format!("    class {label}: {acc:.4} ({correct}/{total})\n"));
    }
}

impl ExperimentReport {
    /// Deterministic text report: per-kernel accuracy breakdown plus the
    /// head-to-head test comparison.
    pub fn render(&self) -> String {
        let classes = self
            .classes
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let mut out = format!(
            "digit pipeline: classes {classes}, {} train samples per class (seed {}), {} test samples\n",
            self.per_class_train, self.seed, self.test_n
        );
        for run in &self.runs {
            out.push_str(&format!("\nkernel {}\n", run.kernel));
            out.push_str(&format!(
                "  feature dim {}, effective rank {}, reg gamma {:e}\n",
                run.train_features.ncols(),
                run.effective_rank,
                run.reg_gamma
            ));
            out.push_str(&format!(
                "  train accuracy {:.4} ({}/{})\n",
                run.train_report.accuracy(),
                run.train_report.correct,
                run.train_report.total
            ));
            out.push_str(&format!(
                "  test accuracy {:.4} ({}/{})\n",
                run.test_report.accuracy(),
                run.test_report.correct,
                run.test_report.total
            ));
            class_lines(&mut out, &run.test_report);
        }
        if self.runs.len() == 2 {
            let a = &self.runs[0];
            let b = &self.runs[1];
            let margin = b.test_report.accuracy() - a.test_report.accuracy();
            out.push_str(&format!(
                "\ntest accuracy: {} {:.4} vs {} {:.4} (margin {margin:+.4})\n",
                b.kernel,
                b.test_report.accuracy(),
                a.kernel,
                a.test_report.accuracy()
            ));
        }
        out
    }

    /// Export one labeled feature CSV per kernel into `out_dir`; returns the
    /// written paths.
    pub fn write_features(&self, out_dir: &Path) -> Result<Vec<PathBuf>> {
        let mut written = Vec::with_capacity(self.runs.len());
        for run in &self.runs {
            let path = out_dir.join(format!("features_{}.csv", run.kernel.name()));
            let comments = vec![
                format!("xfmap {}", crate::VERSION),
                format!("kernel {}", run.kernel),
                format!("train fingerprint {}", run.train_fingerprint),
                format!("seed {}", self.seed),
            ];
            export_matrix(
                &path,
                ExportFormat::Csv,
                &run.train_features,
                Some(&run.train_labels),
                &comments,
                true,
            )?;
            written.push(path);
        }
        Ok(written)
    }
}
