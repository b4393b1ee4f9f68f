//! Experiment orchestration: load or synthesize a dataset, evaluate every
//! (regressor, mode) pair under cross-validation, sweep difficulty factors,
//! and produce explanation reports. All file outputs are plain CSV/JSON/text
//! written atomically (temp file, then rename), so a rerun with the same
//! seed is byte-identical.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::explain::{
    consistency, explain_fbr, explain_global, mean_abs_importance, ConsistencyReport, Explanation,
    LimeConfig,
};
use crate::fbr::{cross_validate, fold_seed, train_fbr, train_global, Mode, Partition};
use crate::regressors::RegressorSpec;
use crate::rng::mix;
use crate::synthgen::{generate, GeneratorConfig};
use crate::tabular::{kfold_split, Dataset, MetricsReport};

const TAG_EXPLAIN: u64 = 0xE4B1;

/// Where the rows come from: a CSV on disk or a generator config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DataSource {
    Synthetic {
        synthetic: GeneratorConfig,
    },
    Csv {
        csv: PathBuf,
        target: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        label_column: Option<String>,
    },
}

fn default_folds() -> usize {
    4
}

#[derive(Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

fn one_or_many<'de, D, T>(deserializer: D) -> std::result::Result<Vec<T>, D::Error>
where
    D: serde::Deserializer<'de>,
    T: Deserialize<'de>,
{
    Ok(match OneOrMany::<T>::deserialize(deserializer)? {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(v) => v,
    })
}

/// One experiment: a dataset, the regressors and modes to cross it with,
/// fold count, master seed, and the output directory. `spec`/`specs` and
/// `mode`/`modes` both accept a single entry or a list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DataSource,
    #[serde(alias = "spec", deserialize_with = "one_or_many")]
    pub specs: Vec<RegressorSpec>,
    #[serde(alias = "mode", deserialize_with = "one_or_many")]
    pub modes: Vec<Mode>,
    #[serde(default = "default_folds")]
    pub folds: usize,
    pub seed: u64,
    pub outputs: PathBuf,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.specs.is_empty() {
            return Err(Error::InvalidConfig("at least one regressor spec is required".into()));
        }
        if self.modes.is_empty() {
            return Err(Error::InvalidConfig("at least one mode is required".into()));
        }
        if self.folds < 2 {
            return Err(Error::InvalidConfig("folds must be at least 2".into()));
        }
        for spec in &self.specs {
            spec.validate()?;
        }
        for mode in &self.modes {
            if let Mode::FbrKmeans { k } = mode {
                if *k < 1 {
                    return Err(Error::InvalidConfig("fbr_kmeans k must be at least 1".into()));
                }
            }
        }
        if let DataSource::Synthetic { synthetic } = &self.dataset {
            synthetic.validate()?;
        }
        Ok(())
    }

    /// Replace every seed in the experiment (including a synthetic source's
    /// generator seed) with one master value.
    pub fn override_seed(&mut self, seed: u64) {
        self.seed = seed;
        if let DataSource::Synthetic { synthetic } = &mut self.dataset {
            synthetic.seed = seed;
        }
    }
}

/// The FLEETREG_SEED environment variable, if set and parseable.
pub fn env_seed_override() -> Result<Option<u64>> {
    match std::env::var("FLEETREG_SEED") {
        Err(_) => Ok(None),
        Ok(raw) => raw.trim().parse::<u64>().map(Some).map_err(|_| {
            Error::InvalidConfig(format!("FLEETREG_SEED must be an unsigned integer, got {raw:?}"))
        }),
    }
}

pub fn load_dataset(source: &DataSource) -> Result<Dataset> {
    match source {
        DataSource::Synthetic { synthetic } => Ok(generate(synthetic)?.data),
        DataSource::Csv { csv, target, label_column } => {
            // a missing path is a config mistake, not a runtime failure
            if !csv.exists() {
                return Err(Error::InvalidConfig(format!(
                    "dataset csv not found: {}",
                    csv.display()
                )));
            }
            Dataset::load_csv(csv, target, label_column.as_deref())
        }
    }
}

/// Row label in benchmark tables: the regressor name, prefixed by the
/// partitioning flavor.
pub fn method_label(spec: &RegressorSpec, mode: &Mode) -> String {
    match mode {
        Mode::Global => spec.label().to_string(),
        Mode::FbrKmeans { .. } => format!("FBR-{}", spec.label()),
        Mode::FbrLabels => format!("FBR(e)-{}", spec.label()),
    }
}

fn mode_token(mode: &Mode) -> String {
    match mode {
        Mode::Global => "global".into(),
        Mode::FbrKmeans { k } => format!("fbr_kmeans({k})"),
        Mode::FbrLabels => "fbr_labels".into(),
    }
}

/// Write bytes via a temp file in the same directory plus an atomic rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let io_err = |p: &Path| {
        let p = p.to_path_buf();
        move |source| Error::Io { path: p, source }
    };
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&parent).map_err(io_err(&parent))?;
    let name = path
        .file_name()
        .ok_or_else(|| Error::InvalidConfig(format!("not a file path: {}", path.display())))?;
    let tmp = parent.join(format!(".{}.tmp", name.to_string_lossy()));
    std::fs::write(&tmp, bytes).map_err(io_err(&tmp))?;
    std::fs::rename(&tmp, path).map_err(io_err(path))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkRow {
    pub method: String,
    pub mode: Mode,
    pub spec: RegressorSpec,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkOutput {
    pub rows: Vec<BenchmarkRow>,
}

impl BenchmarkOutput {
    /// Aligned text table, one row per method, metrics as "mean ± std" to
    /// four decimals.
    pub fn table(&self) -> String {
        let headers = ["Method", "MAE", "MSE", "R2", "MAPE"];
        let mut cells: Vec<Vec<String>> = vec![headers.iter().map(|h| h.to_string()).collect()];
        for row in &self.rows {
            let f = |m: &crate::tabular::MeanStd| format!("{:.4} ± {:.4}", m.mean, m.std);
            cells.push(vec![
                row.method.clone(),
                f(&row.report.mae),
                f(&row.report.mse),
                f(&row.report.r2),
                f(&row.report.mape),
            ]);
        }
        let widths: Vec<usize> = (0..headers.len())
            .map(|c| cells.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for row in &cells {
            for (c, cell) in row.iter().enumerate() {
                let pad = widths[c] - cell.chars().count();
                out.push_str(cell);
                if c + 1 < row.len() {
                    out.extend(std::iter::repeat_n(' ', pad + 2));
                }
            }
            out.push('\n');
        }
        out
    }
}

fn predictions_csv(outcome: &crate::fbr::CvOutcome) -> String {
    let mut out = String::from("row_id,fold,cluster,y_true,y_pred\n");
    for p in &outcome.predictions {
        let cluster = p.cluster.map(|c| c.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{},{}", p.row_id, p.fold, cluster, p.y_true, p.y_pred);
    }
    out
}

/// Cross-validate every (mode, spec) pair and write benchmark.json,
/// benchmark.txt, and one predictions CSV per pair into the output
/// directory.
pub fn run_benchmark(cfg: &ExperimentConfig) -> Result<BenchmarkOutput> {
    cfg.validate()?;
    let data = load_dataset(&cfg.dataset)?;
    let mut rows = Vec::new();
    for mode in &cfg.modes {
        for spec in &cfg.specs {
            let outcome = cross_validate(&data, spec, mode, cfg.folds, cfg.seed)?;
            let method = method_label(spec, mode);
            write_atomic(
                &cfg.outputs.join(format!("predictions_{method}.csv")),
                predictions_csv(&outcome).as_bytes(),
            )?;
            rows.push(BenchmarkRow {
                method,
                mode: mode.clone(),
                spec: spec.clone(),
                report: outcome.report,
            });
        }
    }
    let output = BenchmarkOutput { rows };
    write_atomic(
        &cfg.outputs.join("benchmark.json"),
        serde_json::to_string_pretty(&output)?.as_bytes(),
    )?;
    write_atomic(&cfg.outputs.join("benchmark.txt"), output.table().as_bytes())?;
    Ok(output)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub factor: f64,
    pub method: String,
    pub mode: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
}

/// Difficulty sweep over a synthetic source: scale (cluster_spread,
/// sample_noise_std) by each factor, regenerate, benchmark every pair, and
/// write one long-format CSV (factor, method, mode, metric, mean, std).
// the negated comparison on factors also rejects NaN
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn run_sweep(cfg: &ExperimentConfig, factors: &[f64]) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let DataSource::Synthetic { synthetic } = &cfg.dataset else {
        return Err(Error::InvalidConfig(
            "sweep requires a synthetic dataset source to rescale".into(),
        ));
    };
    if factors.len() < 2 {
        return Err(Error::InvalidConfig("sweep needs at least two factors".into()));
    }
    if factors.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("factors must be strictly ascending".into()));
    }
    if factors.iter().any(|f| !(*f > 0.0)) {
        return Err(Error::InvalidConfig("factors must be positive".into()));
    }

    let mut rows = Vec::new();
    for &factor in factors {
        let data = generate(&synthetic.scaled(factor))?.data;
        for mode in &cfg.modes {
            for spec in &cfg.specs {
                let outcome = cross_validate(&data, spec, mode, cfg.folds, cfg.seed)?;
                let method = method_label(spec, mode);
                let mode_s = mode_token(mode);
                let metrics = [
                    ("mae", &outcome.report.mae),
                    ("mse", &outcome.report.mse),
                    ("r2", &outcome.report.r2),
                    ("mape", &outcome.report.mape),
                ];
                for (metric, stat) in metrics {
                    rows.push(SweepRow {
                        factor,
                        method: method.clone(),
                        mode: mode_s.clone(),
                        metric: metric.into(),
                        mean: stat.mean,
                        std: stat.std,
                    });
                }
            }
        }
    }

    let mut csv = String::from("factor,method,mode,metric,mean,std\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{},{},{},{},{}", r.factor, r.method, r.mode, r.metric, r.mean, r.std);
    }
    write_atomic(&cfg.outputs.join("sweep.csv"), csv.as_bytes())?;
    Ok(rows)
}

#[derive(Debug, Clone)]
pub struct ExplainOutput {
    pub global_explanations: Vec<Explanation>,
    pub fbr_explanations: Vec<Explanation>,
    pub global_consistency: ConsistencyReport,
    pub fbr_consistency: ConsistencyReport,
    pub global_mean_abs: Vec<f64>,
    pub fbr_mean_abs: Vec<f64>,
    pub feature_names: Vec<String>,
}

#[derive(Serialize)]
struct ConsistencyBundle<'a> {
    global: &'a ConsistencyReport,
    fbr: &'a ConsistencyReport,
}

fn explanations_csv(explanations: &[Explanation], feature_names: &[String]) -> String {
    let mut out = String::from("sample_id,cluster,surrogate_r2");
    for name in feature_names {
        let _ = write!(out, ",imp_{name}");
    }
    out.push('\n');
    for e in explanations {
        let id = e.sample_id.map(|v| v.to_string()).unwrap_or_default();
        let cluster = e.cluster.map(|v| v.to_string()).unwrap_or_default();
        let _ = write!(out, "{id},{cluster},{}", e.surrogate_r2);
        for v in &e.importances {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

/// Hold out fold 0, train the global model and the fleet model (first spec,
/// first fleet mode) on the rest, explain every held-out row under both, and
/// write the explanation CSVs, the per-feature mean |importance| comparison,
/// the consistency JSON, and one per-sample signed-bar file.
pub fn run_explain(cfg: &ExperimentConfig) -> Result<ExplainOutput> {
    cfg.validate()?;
    let data = load_dataset(&cfg.dataset)?;
    let spec = &cfg.specs[0];
    let fleet_mode = cfg
        .modes
        .iter()
        .find(|m| !matches!(m, Mode::Global))
        .ok_or_else(|| {
            Error::InvalidConfig("explain needs an fbr_kmeans or fbr_labels mode".into())
        })?;

    let plan = kfold_split(data.n(), cfg.folds, cfg.seed)?;
    let train = data.subset(&plan.train_indices(0));
    let test_ids = plan.test_indices(0);
    let test_rows: Vec<Vec<f64>> = test_ids.iter().map(|&r| data.features[r].clone()).collect();

    let seed0 = fold_seed(cfg.seed, 0);
    let global = train_global(&train, spec, seed0)?;
    let partition = match fleet_mode {
        Mode::FbrKmeans { k } => Partition::Kmeans { k: *k },
        Mode::FbrLabels => Partition::ProvidedLabels,
        Mode::Global => unreachable!("filtered above"),
    };
    let fleet = train_fbr(&train, spec, partition, seed0)?;

    let lime = LimeConfig::new(data.k(), mix(cfg.seed, TAG_EXPLAIN));
    let global_explanations = explain_global(&global, &test_rows, &test_ids, &lime, Some(&fleet))?;
    let fbr_explanations = explain_fbr(&fleet, &test_rows, &test_ids, &lime)?;

    let global_consistency = consistency(&global_explanations);
    let fbr_consistency = consistency(&fbr_explanations);
    let global_mean_abs = mean_abs_importance(&global_explanations)?;
    let fbr_mean_abs = mean_abs_importance(&fbr_explanations)?;

    write_atomic(
        &cfg.outputs.join("explanations_global.csv"),
        explanations_csv(&global_explanations, &data.feature_names).as_bytes(),
    )?;
    write_atomic(
        &cfg.outputs.join("explanations_fbr.csv"),
        explanations_csv(&fbr_explanations, &data.feature_names).as_bytes(),
    )?;

    let mut mean_csv = String::from("feature,global,fbr\n");
    for (i, name) in data.feature_names.iter().enumerate() {
        let _ = writeln!(mean_csv, "{name},{},{}", global_mean_abs[i], fbr_mean_abs[i]);
    }
    write_atomic(&cfg.outputs.join("mean_abs_importance.csv"), mean_csv.as_bytes())?;

    let bundle = ConsistencyBundle { global: &global_consistency, fbr: &fbr_consistency };
    write_atomic(
        &cfg.outputs.join("consistency.json"),
        serde_json::to_string_pretty(&bundle)?.as_bytes(),
    )?;

    // signed per-feature bars for the first held-out sample, fleet variant
    let mut sample_csv = String::from("feature,importance\n");
    if let Some(first) = fbr_explanations.first() {
        for (name, v) in data.feature_names.iter().zip(&first.importances) {
            let _ = writeln!(sample_csv, "{name},{v}");
        }
    }
    write_atomic(&cfg.outputs.join("sample_explanation.csv"), sample_csv.as_bytes())?;

    Ok(ExplainOutput {
        global_explanations,
        fbr_explanations,
        global_consistency,
        fbr_consistency,
        global_mean_abs,
        fbr_mean_abs,
        feature_names: data.feature_names.clone(),
    })
}

/// Full desk-scale pipeline under one master seed: write the reference
/// generator config, the dataset and its generating parameters, the
/// benchmark, the difficulty sweep, and the explanation reports into one
/// directory.
pub fn run_repro(outdir: &Path, seed: Option<u64>) -> Result<()> {
    let mut gen_cfg = GeneratorConfig::canonical();
    if let Some(s) = seed {
        gen_cfg.seed = s;
    }
    let master_seed = gen_cfg.seed;

    write_atomic(
        &outdir.join("canonical.json"),
        serde_json::to_string_pretty(&gen_cfg)?.as_bytes(),
    )?;

    let ds = generate(&gen_cfg)?;
    ds.data.save_csv(&outdir.join("data.csv"))?;
    ds.save_truth(&outdir.join("truth.json"))?;

    let cfg = ExperimentConfig {
        dataset: DataSource::Synthetic { synthetic: gen_cfg },
        specs: vec![
            RegressorSpec::random_forest(),
            RegressorSpec::ridge(),
            RegressorSpec::knn(),
        ],
        modes: vec![Mode::Global, Mode::FbrKmeans { k: 5 }],
        folds: 4,
        seed: master_seed,
        outputs: outdir.to_path_buf(),
    };
    run_benchmark(&cfg)?;
    run_sweep(&cfg, &[1.0, 2.0, 4.0, 8.0])?;
    run_explain(&cfg)?;
    Ok(())
}
