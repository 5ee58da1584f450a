use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use vqc_spectrum::data_spectrum::{
    damping_factors_with, read_raw_data_path, write_raw_data, DataSpectrumRecord, InversionOptions,
};
use vqc_spectrum::ranker::{shared_grid, Normalization, RankOptions};
use vqc_spectrum::sim::{self, friedman_dataset, loss_curve_csv, AngleData, EpochRecord, LabelMap};
use vqc_spectrum::spectrum::{evaluate_fourier_sum, SpectrumRecord};
use vqc_spectrum::{
    analyze, inverse_nfft, rank_architectures, Error, FeatureMap, Frequency, FrequencyGrid, Model, RankReport,
    RawData, SpectrumReport, TrainConfig, TreeOptions,
};

use crate::output::{self, OutputOptions, Run};
use crate::plot;

pub const TOOL: &str = "vqc-spectrum";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }

    pub fn compute(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure {
            code: if e.is_input_error() { 2 } else { 1 },
            message: e.to_string(),
        }
    }
}

fn with_path(path: &Path) -> impl FnOnce(Error) -> Failure + '_ {
    move |e| {
        let f = Failure::from(e);
        Failure {
            code: f.code,
            message: format!("{}: {}", path.display(), f.message),
        }
    }
}

fn load_model(path: &Path) -> Result<Model, Failure> {
    Model::from_path(path).map_err(with_path(path))
}

fn load_data(path: &Path, header: bool) -> Result<RawData, Failure> {
    let raw = read_raw_data_path(path, header).map_err(with_path(path))?;
    if raw.is_empty() {
        return Err(Failure::input(format!("{}: no data rows", path.display())));
    }
    Ok(raw)
}

/// Envelope shared by every JSON artifact.
#[derive(Serialize, Deserialize)]
pub struct Envelope<C, R> {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub config: C,
    pub result: R,
}

fn envelope<C: Serialize, R: Serialize>(command: &str, seed: u64, config: &C, result: &R) -> String {
    let env = Envelope {
        tool: TOOL.to_string(),
        version: VERSION.to_string(),
        command: command.to_string(),
        seed,
        config,
        result,
    };
    let mut text = serde_json::to_string_pretty(&env).expect("artifact serializes");
    text.push('\n');
    text
}

fn analyze_all(models: &[Model], leaf_cap: usize) -> Result<Vec<SpectrumReport>, Failure> {
    let options = TreeOptions { leaf_cap };
    models
        .par_iter()
        .map(|m| analyze(m, &options).map_err(|e| Failure::from(e).prefixed(&m.id())))
        .collect()
}

impl Failure {
    fn prefixed(self, what: &str) -> Self {
        Failure {
            code: self.code,
            message: format!("{what}: {}", self.message),
        }
    }
}

fn check_unique_ids(models: &[Model]) -> Result<(), Failure> {
    let mut seen = BTreeSet::new();
    for m in models {
        if !seen.insert(m.id()) {
            return Err(Failure::input(format!(
                "two circuits are named '{}'; give them distinct \"name\" fields",
                m.id()
            )));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// spectrum

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub circuits: Vec<PathBuf>,
    pub leaf_cap: usize,
    pub seed: u64,
    pub timing: bool,
}

#[derive(Serialize)]
struct SpectrumResult {
    circuits: Vec<SpectrumRecord>,
}

pub fn run_spectrum(cfg: &SpectrumConfig) -> Result<Run, Failure> {
    let models = cfg.circuits.iter().map(|p| load_model(p)).collect::<Result<Vec<_>, _>>()?;
    let mut reports = analyze_all(&models, cfg.leaf_cap)?;
    if !cfg.timing {
        for r in &mut reports {
            r.elapsed_ms = None;
        }
    }
    let result = SpectrumResult {
        circuits: reports.iter().map(SpectrumRecord::from).collect(),
    };
    let plots = reports
        .iter()
        .enumerate()
        .map(|(i, r)| (format!("spectrum_{i}.svg"), plot::spectrum_heatmap(r)))
        .collect();
    Ok(Run {
        primary: ("spectrum.json".into(), envelope("spectrum", cfg.seed, cfg, &result)),
        table: output::spectrum_table(&result.circuits),
        files: vec![],
        plots,
        passed: None,
    })
}

// ---------------------------------------------------------------------------
// rank

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RankConfig {
    pub circuits: Vec<PathBuf>,
    pub data: PathBuf,
    pub header: bool,
    pub grid: Option<Vec<usize>>,
    pub damping_in: f64,
    pub damping_out: f64,
    pub tikhonov: f64,
    pub subset_size: usize,
    pub seed: u64,
    pub normalization: Normalization,
    pub leaf_cap: usize,
}

#[derive(Serialize)]
struct RankResult {
    feature_map: FeatureMap,
    report: RankReport,
}

pub fn run_rank(cfg: &RankConfig) -> Result<Run, Failure> {
    let models = cfg.circuits.iter().map(|p| load_model(p)).collect::<Result<Vec<_>, _>>()?;
    check_unique_ids(&models)?;
    let raw = load_data(&cfg.data, cfg.header)?;
    let map = FeatureMap::fit(&raw);
    let data = map.apply::<f64>(&raw)?;
    let reports = analyze_all(&models, cfg.leaf_cap)?;
    let options = RankOptions {
        subset_size: cfg.subset_size,
        seed: cfg.seed,
        damping_in: cfg.damping_in,
        damping_out: cfg.damping_out,
        tikhonov: cfg.tikhonov,
        normalization: cfg.normalization,
        grid: cfg.grid.clone(),
        ..RankOptions::default()
    };
    let report = rank_architectures(&reports, &data, &options)?;
    let table = output::rank_table(&report);
    let csv = report.to_csv();
    let plots = vec![("rank.svg".to_string(), plot::score_bars(&report))];
    let result = RankResult {
        feature_map: map,
        report,
    };
    Ok(Run {
        primary: ("rank.json".into(), envelope("rank", cfg.seed, cfg, &result)),
        table,
        files: vec![("rank.csv".into(), csv)],
        plots,
        passed: None,
    })
}

// ---------------------------------------------------------------------------
// verify

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub circuit: PathBuf,
    pub trials: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub leaf_cap: usize,
}

#[derive(Serialize)]
pub struct VerifyResult {
    pub circuit_id: String,
    pub trials: usize,
    pub spectrum_size: usize,
    pub max_deviation: f64,
    pub max_imaginary: f64,
    pub passed: bool,
    pub vacuous: bool,
}

pub fn run_verify(cfg: &VerifyConfig) -> Result<Run, Failure> {
    if !(cfg.tolerance > 0.0) {
        return Err(Failure::input("tolerance must be positive"));
    }
    let model = load_model(&cfg.circuit)?;
    let report = analyze_all(std::slice::from_ref(&model), cfg.leaf_cap)?.remove(0);
    let c = &model.circuit;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let pi = std::f64::consts::PI;
    let mut max_dev = 0.0f64;
    let mut max_im = 0.0f64;
    for _ in 0..cfg.trials {
        let x: Vec<f64> = (0..c.d).map(|_| rng.gen_range(-pi..pi)).collect();
        let theta: Vec<f64> = (0..c.w).map(|_| rng.gen_range(-pi..pi)).collect();
        let fourier = evaluate_fourier_sum(&report.coefficients, &x, &theta)?;
        let exact = sim::expectation(c, &model.observable, &x, &theta)?;
        max_dev = max_dev.max((fourier.re - exact).abs());
        max_im = max_im.max(fourier.im.abs());
    }
    let vacuous = cfg.trials == 0;
    if vacuous {
        log::warn!("zero trials requested; the check passes vacuously");
    }
    let result = VerifyResult {
        circuit_id: model.id(),
        trials: cfg.trials,
        spectrum_size: report.len(),
        max_deviation: max_dev,
        max_imaginary: max_im,
        passed: max_dev < cfg.tolerance && max_im < cfg.tolerance,
        vacuous,
    };
    Ok(Run {
        primary: ("verify.json".into(), envelope("verify", cfg.seed, cfg, &result)),
        table: output::verify_table(&result, cfg.tolerance),
        files: vec![],
        plots: vec![],
        passed: Some(result.passed),
    })
}

// ---------------------------------------------------------------------------
// data-spectrum

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpectrumConfig {
    pub data: PathBuf,
    pub header: bool,
    pub circuits: Vec<PathBuf>,
    pub grid: Option<Vec<usize>>,
    pub damping_in: f64,
    pub damping_out: f64,
    pub tikhonov: f64,
    pub seed: u64,
    pub leaf_cap: usize,
}

#[derive(Serialize)]
struct DataSpectrumResult {
    feature_map: FeatureMap,
    support_size: usize,
    spectrum: DataSpectrumRecord,
}

pub fn run_data_spectrum(cfg: &DataSpectrumConfig) -> Result<Run, Failure> {
    if !(cfg.damping_in > 0.0 && cfg.damping_out > 0.0) {
        return Err(Failure::input("damping factors must be positive"));
    }
    let models = cfg.circuits.iter().map(|p| load_model(p)).collect::<Result<Vec<_>, _>>()?;
    let raw = load_data(&cfg.data, cfg.header)?;
    let map = FeatureMap::fit(&raw);
    let data = map.apply::<f64>(&raw)?;
    let reports = analyze_all(&models, cfg.leaf_cap)?;
    if let Some(r) = reports.iter().find(|r| r.d != data.d()) {
        return Err(Failure::input(format!(
            "{} expects {} features but the data has {}",
            r.circuit_id,
            r.d,
            data.d()
        )));
    }
    let grid = match (&cfg.grid, reports.is_empty()) {
        (Some(sizes), _) => FrequencyGrid::new(sizes.clone())?,
        (None, false) => shared_grid(&reports)?,
        (None, true) => return Err(Failure::input("give --grid or at least one --circuit")),
    };
    if grid.d() != data.d() {
        return Err(Failure::input(format!(
            "grid has {} dimensions but the data has {} features",
            grid.d(),
            data.d()
        )));
    }
    let support: BTreeSet<Frequency> = reports.iter().flat_map(|r| r.spectrum()).collect();
    let support: Vec<Frequency> = support.into_iter().collect();
    let damping = if support.is_empty() {
        vec![1.0; grid.len()]
    } else {
        damping_factors_with(&grid, &support, cfg.damping_in, cfg.damping_out)
    };
    let spec = inverse_nfft(&data, &grid, &damping, &InversionOptions { tikhonov: cfg.tikhonov })?;
    let record = DataSpectrumRecord::from(&spec);
    let table = output::data_spectrum_table(&record);
    let plots = vec![("data_spectrum.svg".to_string(), plot::data_heatmap(&record))];
    let result = DataSpectrumResult {
        feature_map: map,
        support_size: support.len(),
        spectrum: record,
    };
    Ok(Run {
        primary: ("data_spectrum.json".into(), envelope("data-spectrum", cfg.seed, cfg, &result)),
        table,
        files: vec![],
        plots,
        passed: None,
    })
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub circuit: PathBuf,
    pub x: Vec<f64>,
    pub theta: Vec<f64>,
    pub seed: u64,
}

#[derive(Serialize)]
struct SimulateResult {
    circuit_id: String,
    expectation: f64,
}

pub fn run_simulate(cfg: &SimulateConfig) -> Result<Run, Failure> {
    let model = load_model(&cfg.circuit)?;
    let c = &model.circuit;
    if cfg.x.len() != c.d || cfg.theta.len() != c.w {
        return Err(Failure::input(format!(
            "circuit takes {} feature and {} trainable angles, got {} and {}",
            c.d,
            c.w,
            cfg.x.len(),
            cfg.theta.len()
        )));
    }
    let value = sim::expectation(c, &model.observable, &cfg.x, &cfg.theta)?;
    let result = SimulateResult {
        circuit_id: model.id(),
        expectation: value,
    };
    Ok(Run {
        primary: ("simulate.json".into(), envelope("simulate", cfg.seed, cfg, &result)),
        table: format!("{}: <O> = {value:.12}\n", result.circuit_id),
        files: vec![],
        plots: vec![],
        passed: None,
    })
}

// ---------------------------------------------------------------------------
// train

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainRunConfig {
    pub circuit: PathBuf,
    pub data: PathBuf,
    pub header: bool,
    pub test_data: Option<PathBuf>,
    pub lr: f64,
    pub batch: usize,
    pub epochs: usize,
    pub seed: u64,
    pub standardize: bool,
}

#[derive(Serialize)]
struct TrainOutput {
    circuit_id: String,
    feature_map: FeatureMap,
    label_map: Option<LabelMap>,
    initial_theta: Vec<f64>,
    theta: Vec<f64>,
    final_train_mse: Option<f64>,
    final_test_mse: Option<f64>,
    min_test_mse: Option<f64>,
    history: Vec<EpochRecord>,
}

fn angle_data(map: &FeatureMap, labels: Option<&LabelMap>, raw: &RawData) -> Result<AngleData<f64>, Failure> {
    if raw.d() != map.d() {
        return Err(Failure::input(format!(
            "test data has {} feature columns, training data {}",
            raw.d(),
            map.d()
        )));
    }
    Ok(AngleData {
        x: raw.features.iter().map(|r| map.to_angles(r)).collect(),
        y: raw
            .labels
            .iter()
            .map(|&y| labels.map_or(y, |l| l.apply(y)))
            .collect(),
    })
}

pub fn run_train(cfg: &TrainRunConfig) -> Result<Run, Failure> {
    let model = load_model(&cfg.circuit)?;
    let raw = load_data(&cfg.data, cfg.header)?;
    if raw.d() != model.circuit.d {
        return Err(Failure::input(format!(
            "circuit takes {} features but the data has {}",
            model.circuit.d,
            raw.d()
        )));
    }
    let map = FeatureMap::fit(&raw);
    let labels = cfg.standardize.then(|| LabelMap::standardizing(&raw.labels));
    let train = angle_data(&map, labels.as_ref(), &raw)?;
    let test = match &cfg.test_data {
        Some(p) => Some(angle_data(&map, labels.as_ref(), &load_data(p, cfg.header)?)?),
        None => None,
    };
    let tc = TrainConfig {
        lr: cfg.lr,
        batch: cfg.batch,
        epochs: cfg.epochs,
        seed: cfg.seed,
        initial_theta: None,
    };
    let r = sim::train(&model.circuit, &model.observable, &train, test.as_ref(), &tc)?;
    let last = r.history.last();
    let out = TrainOutput {
        circuit_id: model.id(),
        feature_map: map,
        label_map: labels,
        initial_theta: r.initial_theta,
        theta: r.theta,
        final_train_mse: last.map(|h| h.train_mse),
        final_test_mse: last.and_then(|h| h.test_mse),
        min_test_mse: r.min_test_mse,
        history: r.history,
    };
    let curve = loss_curve_csv(&out.history);
    let plots = vec![("loss.svg".to_string(), plot::loss_curve(&out.history))];
    Ok(Run {
        primary: ("train.json".into(), envelope("train", cfg.seed, cfg, &out)),
        table: output::train_table(&out.circuit_id, &out.history, &out.theta),
        files: vec![("loss.csv".into(), curve)],
        plots,
        passed: None,
    })
}

// ---------------------------------------------------------------------------
// friedman

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FriedmanConfig {
    pub samples: usize,
    pub seed: u64,
    pub noise: f64,
}

const FRIEDMAN_MARK: &str = "# vqc-spectrum";

pub fn run_friedman(cfg: &FriedmanConfig) -> Result<Run, Failure> {
    if cfg.samples == 0 {
        return Err(Failure::input("sample count must be positive"));
    }
    let raw = friedman_dataset(cfg.samples, cfg.seed, cfg.noise)?;
    let mut text = format!(
        "{FRIEDMAN_MARK} {VERSION} friedman seed={}\n# config {}\n",
        cfg.seed,
        serde_json::to_string(cfg).expect("config serializes")
    );
    let mut body = Vec::new();
    write_raw_data(&mut body, &raw)?;
    text.push_str(&String::from_utf8(body).expect("csv is utf-8"));
    Ok(Run {
        table: text.clone(),
        primary: ("friedman.csv".into(), text),
        files: vec![],
        plots: vec![],
        passed: None,
    })
}

// ---------------------------------------------------------------------------
// replay

fn config_of<C: DeserializeOwned>(v: Value) -> Result<C, Failure> {
    serde_json::from_value(v).map_err(|e| Failure::input(format!("artifact config: {e}")))
}

fn rerun(command: &str, config: Value) -> Result<Run, Failure> {
    match command {
        "spectrum" => run_spectrum(&config_of(config)?),
        "rank" => run_rank(&config_of(config)?),
        "verify" => run_verify(&config_of(config)?),
        "data-spectrum" => run_data_spectrum(&config_of(config)?),
        "simulate" => run_simulate(&config_of(config)?),
        "train" => run_train(&config_of(config)?),
        "friedman" => run_friedman(&config_of(config)?),
        other => Err(Failure::input(format!("unknown command '{other}' in artifact"))),
    }
}

pub fn replay(path: &Path, check: bool, opts: &OutputOptions) -> Result<(), Failure> {
    opts.validate()?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))?;
    let (command, version, config) = if text.starts_with(FRIEDMAN_MARK) {
        let line = text
            .lines()
            .find_map(|l| l.strip_prefix("# config "))
            .ok_or_else(|| Failure::input("dataset header lacks its config line"))?;
        let version = text.lines().next().and_then(|l| l.split_whitespace().nth(2)).unwrap_or("");
        let config: Value = serde_json::from_str(line).map_err(|e| Failure::input(format!("config line: {e}")))?;
        ("friedman".to_string(), version.to_string(), config)
    } else {
        let env: Envelope<Value, Value> = serde_json::from_str(&text)
            .map_err(|e| Failure::input(format!("{}: not an artifact: {e}", path.display())))?;
        if env.tool != TOOL {
            return Err(Failure::input(format!("artifact was written by '{}'", env.tool)));
        }
        (env.command, env.version, env.config)
    };
    if version != VERSION {
        log::warn!("artifact was written by version {version}, replaying with {VERSION}");
    }
    let run = rerun(&command, config)?;
    output::emit(&run, opts)?;
    if check && run.primary.1 != text {
        return Err(Failure::compute(format!(
            "replay of {} differs from the recorded artifact",
            path.display()
        )));
    }
    run.verdict()
}

pub fn emit(run: &Run, opts: &OutputOptions) -> Result<(), Failure> {
    opts.validate()?;
    output::emit(run, opts)
}
