//! File-based pipeline: `generate` writes a waveform dataset, `features`
//! extracts and ranks features, `train_eval` grid-searches and
//! cross-validates every classifier. Each stage writes a config snapshot and
//! run metadata next to its outputs.

pub mod archive;
mod tables;

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use archive::{read_scenario, write_scenario, WaveformFormat};
pub use tables::{read_features_csv, read_ranking_csv, write_features_csv, write_ranking_csv, FeatureTable};

use crate::error::{Error, Result};
use crate::features::{is_wavelet_feature, rank_features, Extractor, FeatureConfig, FeatureRanking};
use crate::learn::{fit, grid_search, ClassifierKind, Dataset, HyperGrid};
use crate::metrics::{write_summary_csv, ConfusionCounts, EvalReport};
use crate::scenario::{enumerate_all, read_manifest, stratified_subset, write_manifest, EventType, ScenarioSpec};
use crate::synth::{synthesize, SynthConfig, SynthModels};

pub const MANIFEST_FILE: &str = "manifest.csv";
pub const FEATURES_FILE: &str = "features.csv";
pub const RANKING_FILE: &str = "ranking.csv";
pub const SELECTION_FILE: &str = "selection.json";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_CSV: &str = "report.csv";
pub const CONFIG_FILE: &str = "config.json";
pub const RUN_FILE: &str = "run.json";
pub const MODELS_DIR: &str = "models";

pub const DEFAULT_GLOBAL_SEED: u64 = 20_231_005;
pub const DEFAULT_TOP_K: usize = 24;
pub const DEFAULT_FOLDS: usize = 5;
/// The report states whether a wavelet feature ranks within this many.
pub const WAVELET_CHECK_RANK: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub global_seed: u64,
    pub synth: SynthConfig,
    pub models: SynthModels,
    pub features: FeatureConfig,
    pub top_k: usize,
    /// Grid file (TOML or JSON); replaces `grid` when set.
    pub grid_file: Option<PathBuf>,
    pub grid: HyperGrid,
    pub folds: usize,
    pub out_dir: PathBuf,
    /// Stratified subset size for quick runs.
    pub limit: Option<usize>,
    pub waveform_format: WaveformFormat,
    pub classifiers: Vec<ClassifierKind>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            global_seed: DEFAULT_GLOBAL_SEED,
            synth: SynthConfig::default(),
            models: SynthModels::default(),
            features: FeatureConfig::default(),
            top_k: DEFAULT_TOP_K,
            grid_file: None,
            grid: HyperGrid::default(),
            folds: DEFAULT_FOLDS,
            out_dir: PathBuf::from("out"),
            limit: None,
            waveform_format: WaveformFormat::default(),
            classifiers: ClassifierKind::ALL.to_vec(),
        }
    }
}

impl PipelineConfig {
    /// Reads a TOML (`.toml`) or JSON config; missing fields take defaults.
    /// A relative `grid_file` is resolved against the config's directory.
    pub fn load(path: &Path) -> Result<PipelineConfig> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg: PipelineConfig = if path.extension().is_some_and(|e| e == "toml") {
            toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        } else {
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?
        };
        if let Some(g) = &cfg.grid_file {
            if g.is_relative() {
                cfg.grid_file = Some(path.parent().unwrap_or(Path::new(".")).join(g));
            }
        }
        Ok(cfg)
    }

    /// Loads `grid_file` into `grid` and checks every section.
    pub fn resolve(mut self) -> Result<PipelineConfig> {
        if let Some(g) = &self.grid_file {
            self.grid = HyperGrid::load(g)?;
        }
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        self.synth.validate()?;
        self.grid.validate()?;
        if self.folds < 2 {
            return Err(Error::Config(format!("folds must be >= 2, got {}", self.folds)));
        }
        if self.top_k == 0 {
            return Err(Error::Config("top_k must be positive".into()));
        }
        if self.limit == Some(0) {
            return Err(Error::Config("limit must be positive".into()));
        }
        if self.classifiers.is_empty() {
            return Err(Error::Config("no classifiers selected".into()));
        }
        Ok(())
    }

    /// Scenarios of this run, after `limit`.
    pub fn scenarios(&self) -> Vec<ScenarioSpec> {
        let all = enumerate_all(self.global_seed);
        match self.limit {
            Some(n) if n < all.len() => stratified_subset(&all, n),
            _ => all,
        }
    }
}

/// Provenance written next to every stage's outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub tool: String,
    pub version: String,
    pub stage: String,
    pub global_seed: u64,
    pub input: Option<PathBuf>,
}

/// Tracks files a stage creates and deletes them unless the stage commits.
struct Output {
    created: Vec<PathBuf>,
    created_root: Option<PathBuf>,
    committed: bool,
}

impl Output {
    fn new(dir: &Path) -> Result<Output> {
        let created_root = (!dir.exists()).then(|| dir.to_path_buf());
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Output {
            created: Vec::new(),
            created_root,
            committed: false,
        })
    }

    fn write(&mut self, path: PathBuf, bytes: &[u8]) -> Result<()> {
        self.created.push(path.clone());
        archive::write_file(&path, bytes)
    }

    fn write_json<T: Serialize>(&mut self, path: PathBuf, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::file(&path, e.to_string()))?;
        bytes.push(b'\n');
        self.write(path, &bytes)
    }

    fn snapshot(&mut self, dir: &Path, cfg: &PipelineConfig, stage: &str, input: Option<&Path>) -> Result<()> {
        self.write_json(dir.join(CONFIG_FILE), cfg)?;
        self.write_json(
            dir.join(RUN_FILE),
            &RunInfo {
                tool: "hifdiff".into(),
                version: env!("CARGO_PKG_VERSION").into(),
                stage: stage.into(),
                global_seed: cfg.global_seed,
                input: input.map(Path::to_path_buf),
            },
        )
    }

    fn commit(mut self) {
        self.committed = true;
    }
}

impl Drop for Output {
    fn drop(&mut self) {
        if self.committed {
            return;
        }
        if let Some(root) = &self.created_root {
            let _ = fs::remove_dir_all(root);
            return;
        }
        for p in &self.created {
            let _ = fs::remove_file(p);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GenerateSummary {
    pub dataset_dir: PathBuf,
    pub scenarios: usize,
    pub internal_type1: usize,
    pub hif: usize,
    pub external: usize,
}

/// Synthesizes every scenario into `cfg.out_dir`.
pub fn cmd_generate(cfg: &PipelineConfig) -> Result<GenerateSummary> {
    cfg.validate()?;
    let dir = cfg.out_dir.clone();
    let specs = cfg.scenarios();
    let mut out = Output::new(&dir)?;
    let mut manifest = Vec::new();
    write_manifest(&specs, &mut manifest)?;
    out.write(dir.join(MANIFEST_FILE), &manifest)?;
    out.snapshot(&dir, cfg, "generate", None)?;

    let written: Vec<Result<[PathBuf; 2]>> = specs
        .par_iter()
        .map(|spec| {
            let w = synthesize(spec, &cfg.synth, &cfg.models)?;
            write_scenario(&dir, spec, &w, cfg.waveform_format)
        })
        .collect();
    let mut first_err = None;
    for r in written {
        match r {
            Ok(paths) => out.created.extend(paths),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    if let Some(e) = first_err {
        return Err(e);
    }
    out.commit();
    let count = |t: EventType| specs.iter().filter(|s| s.event_type == t).count();
    Ok(GenerateSummary {
        dataset_dir: dir,
        scenarios: specs.len(),
        internal_type1: count(EventType::Type1Internal),
        hif: count(EventType::Type2Hif),
        external: count(EventType::ExternalCtSat),
    })
}

pub fn load_manifest(dataset: &Path) -> Result<Vec<ScenarioSpec>> {
    let path = dataset.join(MANIFEST_FILE);
    let file = fs::File::open(&path).map_err(|e| Error::file(&path, e.to_string()))?;
    read_manifest(file).map_err(|e| Error::file(&path, e.to_string()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub top_k: usize,
    pub features: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeaturesSummary {
    pub rows: usize,
    pub ranking: FeatureRanking,
    pub selection: Selection,
}

/// Extracts the catalog from every scenario of `dataset` and ranks it; writes
/// the feature table, the ranking and the top-k selection to `cfg.out_dir`.
pub fn cmd_features(dataset: &Path, cfg: &PipelineConfig) -> Result<FeaturesSummary> {
    cfg.validate()?;
    let specs = load_manifest(dataset)?;
    if specs.is_empty() {
        return Err(Error::InvalidData(format!("{}: empty manifest", dataset.display())));
    }
    let extractor = Extractor::<f64>::new(cfg.features.clone(), cfg.synth.sampling_rate_hz)?;
    let vectors = specs
        .par_iter()
        .map(|spec| {
            let w = read_scenario(dataset, spec)?;
            if w.sampling_rate_hz != cfg.synth.sampling_rate_hz {
                return Err(Error::file(
                    archive::sidecar_path(dataset, spec),
                    format!(
                        "sampled at {} Hz, config expects {} Hz",
                        w.sampling_rate_hz, cfg.synth.sampling_rate_hz
                    ),
                ));
            }
            Ok(extractor.extract(&w)?.with_label(spec.class_label))
        })
        .collect::<Result<Vec<_>>>()?;
    let ranking = rank_features(&vectors)?;
    if cfg.top_k > ranking.len() {
        return Err(Error::InvalidParameter(format!(
            "top-k must be in 1..={}, got {}",
            ranking.len(),
            cfg.top_k
        )));
    }
    let selection = Selection {
        top_k: cfg.top_k,
        features: ranking.truncated(cfg.top_k).names(),
    };

    let dir = cfg.out_dir.clone();
    let mut out = Output::new(&dir)?;
    let table = FeatureTable {
        event_types: specs.iter().map(|s| s.event_type).collect(),
        vectors,
    };
    out.write(dir.join(FEATURES_FILE), &write_features_csv(&table)?)?;
    out.write(dir.join(RANKING_FILE), &write_ranking_csv(&ranking)?)?;
    out.write_json(dir.join(SELECTION_FILE), &selection)?;
    out.snapshot(&dir, cfg, "features", Some(dataset))?;
    out.commit();
    Ok(FeaturesSummary {
        rows: table.vectors.len(),
        ranking,
        selection,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainEvalReport {
    pub folds: usize,
    pub global_seed: u64,
    pub selected_features: Vec<String>,
    /// Whether any wavelet feature ranks within the top
    /// [`WAVELET_CHECK_RANK`] of the information-gain ranking.
    pub wavelet_in_top_ranked: bool,
    pub samples: usize,
    pub hif_samples: usize,
    pub reports: Vec<EvalReport>,
}

impl TrainEvalReport {
    pub fn best(&self) -> Option<&EvalReport> {
        self.reports
            .iter()
            .fold(None, |b: Option<&EvalReport>, r| match b {
                Some(b) if b.balanced_accuracy >= r.balanced_accuracy => Some(b),
                _ => Some(r),
            })
    }
}

/// Grid-searches each configured classifier on the top-k features of
/// `features_dir` and reports its cross-validated metrics. The pooled
/// out-of-fold predictions of the winning grid point give the counts; a
/// final model is refit on all rows and saved under `models/`.
pub fn cmd_train_eval(features_dir: &Path, cfg: &PipelineConfig) -> Result<TrainEvalReport> {
    cfg.validate()?;
    let table_path = features_dir.join(FEATURES_FILE);
    let table = read_features_csv(&fs::read(&table_path).map_err(|e| Error::file(&table_path, e.to_string()))?)
        .map_err(|e| Error::file(&table_path, e.to_string()))?;
    let ranking_path = features_dir.join(RANKING_FILE);
    let ranking = read_ranking_csv(&fs::read(&ranking_path).map_err(|e| Error::file(&ranking_path, e.to_string()))?)
        .map_err(|e| Error::file(&ranking_path, e.to_string()))?;
    if cfg.top_k > ranking.len() {
        return Err(Error::InvalidParameter(format!(
            "top-k must be in 1..={}, got {}",
            ranking.len(),
            cfg.top_k
        )));
    }
    let selected = ranking.truncated(cfg.top_k).names();
    let data = Dataset::from_vectors(&table.vectors, &selected)?;
    let hif_rows: Vec<usize> = (0..data.len())
        .filter(|&i| table.event_types[i] == EventType::Type2Hif)
        .collect();

    let mut reports = Vec::new();
    let mut models = Vec::new();
    for &kind in &cfg.classifiers {
        let wrap = |e: Error| match e {
            e @ Error::Classifier { .. } => e,
            e => Error::Classifier {
                kind: e.kind(),
                name: kind.to_string(),
                message: e.to_string(),
            },
        };
        let result = grid_search(kind, &cfg.grid, &data, cfg.folds, cfg.global_seed).map_err(wrap)?;
        let hif_counts = (!hif_rows.is_empty()).then(|| {
            ConfusionCounts::from_predictions(hif_rows.iter().map(|&i| (result.cv.predictions[i], data.labels[i])))
        });
        let hp = serde_json::to_value(&result.best).map_err(|e| Error::InvalidData(e.to_string()))?;
        reports.push(EvalReport::new(kind.as_str(), hp, result.cv.counts, hif_counts, result.score).map_err(wrap)?);
        let model = fit(&result.best, &data, cfg.global_seed).map_err(wrap)?;
        models.push((kind, model.to_json()?));
    }
    let report = TrainEvalReport {
        folds: cfg.folds,
        global_seed: cfg.global_seed,
        selected_features: selected,
        wavelet_in_top_ranked: ranking
            .entries
            .iter()
            .take(WAVELET_CHECK_RANK)
            .any(|e| is_wavelet_feature(&e.feature_name)),
        samples: data.len(),
        hif_samples: hif_rows.len(),
        reports,
    };

    let dir = cfg.out_dir.clone();
    let mut out = Output::new(&dir)?;
    out.write_json(dir.join(REPORT_JSON), &report)?;
    let mut csv = Vec::new();
    write_summary_csv(&report.reports, &mut csv)?;
    out.write(dir.join(REPORT_CSV), &csv)?;
    for (kind, json) in models {
        out.write(dir.join(MODELS_DIR).join(format!("{kind}.json")), json.as_bytes())?;
    }
    out.snapshot(&dir, cfg, "train-eval", Some(features_dir))?;
    out.commit();
    Ok(report)
}
