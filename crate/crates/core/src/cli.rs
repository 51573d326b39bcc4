//! Experiment configs, the built-in presets and the `run` driver behind the
//! `ncs` binary.
//!
//! Configs are TOML. Matrices are written as lists of rows. See
//! `configs/cstr5.toml` for a complete example; `ncs show-config --preset
//! cstr5` prints the same file.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{EstimatorKind, ModePosterior};
use crate::linalg::{self, Matrix, Vector};
use crate::markov::{kron_compose, LinkChain, TransitionMatrix};
use crate::metrics::{self, MetricsSummary, DEFAULT_BIN_WIDTH};
use crate::model::{ArmaModel, AugmentedModel, LossStrategy, ModeSpace, PlantModel};
use crate::sim::{self, EstimatorInit, InitialMode, InputSpec, Scenario, TrialConfig, TrialRecord};

pub const CSV_SCHEMA: &str = "ncs-trial-csv v1";

type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSection {
    pub a: Rows,
    pub b: Rows,
    pub c: Rows,
    /// Defaults to zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Rows>,
    pub r: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArmaSection {
    pub ar: Vec<f64>,
    pub b: Vec<Rows>,
    pub ma: Vec<f64>,
    pub lambda: Rows,
}

/// Either a full `s × s` matrix or one 2×2 chain per link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Rows>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub links: Option<Vec<Rows>>,
}

/// Either per-channel white-noise std or a fixed sequence `u_0, u_1, …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequence: Option<Rows>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ModeSpec {
    /// `"stationary"`
    Named(String),
    /// 1-based mode number
    Number(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub x0: Vec<f64>,
    /// Actuator memory `û_{−1}`; defaults to zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub held: Option<Vec<f64>>,
    #[serde(default = "stationary")]
    pub mode: ModeSpec,
    #[serde(default)]
    pub x0_std: f64,
}

fn stationary() -> ModeSpec {
    ModeSpec::Named("stationary".into())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CovSpec {
    /// Multiple of the identity.
    Scale(f64),
    Matrix(Rows),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EstimatorSection {
    /// Initial plant-state estimate.
    pub xhat0: Vec<f64>,
    /// Initial estimate of the held inputs (hold strategy); defaults to zero.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub held0: Option<Vec<f64>>,
    pub p0: CovSpec,
    /// Defaults to uniform.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode_prior: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default = "default_out")]
    pub dir: String,
    /// Per-step `trial_XXXX.csv` for every trial.
    #[serde(default)]
    pub emit_steps: bool,
    #[serde(default = "yes")]
    pub metrics: bool,
    #[serde(default = "yes")]
    pub histograms: bool,
    /// `series_<estimator>.csv` for the first trial.
    #[serde(default = "yes")]
    pub series: bool,
}

fn default_out() -> String {
    "out".into()
}

fn yes() -> bool {
    true
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: default_out(),
            emit_steps: false,
            metrics: true,
            histograms: true,
            series: true,
        }
    }
}

fn default_bin_width() -> f64 {
    DEFAULT_BIN_WIDTH
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub strategy: LossStrategy,
    pub steps: usize,
    pub trials: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub estimators: Vec<EstimatorKind>,
    #[serde(default = "default_bin_width")]
    pub hist_bin_width: f64,
    pub plant: PlantSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub arma: Option<ArmaSection>,
    pub chain: ChainSection,
    pub input: InputSection,
    pub initial: InitialSection,
    pub estimator: EstimatorSection,
    #[serde(default)]
    pub output: OutputSection,
}

pub const PRESETS: &[&str] = &["cstr5"];

/// Reactor example: two states, two lossy input links, hold strategy.
pub fn cstr5() -> ExperimentConfig {
    let link = vec![vec![0.8, 0.2], vec![0.4, 0.6]];
    ExperimentConfig {
        name: "cstr5".into(),
        strategy: LossStrategy::Hold,
        steps: 100,
        trials: 100,
        seed: None,
        estimators: EstimatorKind::ALL.to_vec(),
        hist_bin_width: DEFAULT_BIN_WIDTH,
        plant: PlantSection {
            a: vec![vec![-0.8882, -0.0097], vec![293.8556, 2.2973]],
            b: vec![vec![0.011, -0.0014], vec![-0.3602, 0.4732]],
            c: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            q: None,
            r: vec![vec![2.5e-3, 0.0], vec![0.0, 2.5e-3]],
        },
        arma: None,
        chain: ChainSection {
            matrix: None,
            links: Some(vec![link.clone(), link]),
        },
        input: InputSection {
            std: Some(vec![10.0, 10.0]),
            sequence: None,
        },
        initial: InitialSection {
            x0: vec![1.0, 1.0],
            held: Some(vec![1.0, 1.0]),
            mode: stationary(),
            x0_std: 0.0,
        },
        estimator: EstimatorSection {
            xhat0: vec![0.0, 0.0],
            held0: Some(vec![0.0, 0.0]),
            p0: CovSpec::Scale(0.1),
            mode_prior: Some(vec![0.25; 4]),
        },
        output: OutputSection::default(),
    }
}

pub fn preset(name: &str) -> Result<ExperimentConfig> {
    match name {
        "cstr5" => Ok(cstr5()),
        other => Err(Error::config(
            "preset",
            format!("unknown preset `{other}`; available: {}", PRESETS.join(", ")),
        )),
    }
}

/// Parses and validates a TOML config.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)?;
    parse_config(&text).map_err(|e| match e {
        Error::Parse(msg) => Error::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Either a preset name or a config path.
pub fn load(preset_name: Option<&str>, path: Option<&Path>) -> Result<ExperimentConfig> {
    match (preset_name, path) {
        (Some(name), None) => preset(name),
        (None, Some(path)) => load_config(path),
        (Some(_), Some(_)) => Err(Error::config("preset", "give either a preset or a config file, not both")),
        (None, None) => Err(Error::config("preset", "a preset or a config file is required")),
    }
}

fn field<T>(name: &str, result: Result<T>) -> Result<T> {
    result.map_err(|e| match e {
        Error::Config { .. } => e,
        other => Error::config(name, other.to_string()),
    })
}

fn rows(name: &str, r: &Rows) -> Result<Matrix> {
    field(name, linalg::from_rows(r))
}

fn vector(xs: &[f64]) -> Vector {
    Vector::from_column_slice(xs)
}

fn expect_len(name: &str, xs: &[f64], len: usize) -> Result<()> {
    if xs.len() != len {
        return Err(Error::config(name, format!("expected {len} entries, got {}", xs.len())));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.trial_config().map(|_| ())
    }

    pub fn plant(&self) -> Result<PlantModel> {
        let p = &self.plant;
        let a = rows("plant.a", &p.a)?;
        let n = a.nrows();
        let q = match &p.q {
            Some(q) => rows("plant.q", q)?,
            None => Matrix::zeros(n, n),
        };
        field(
            "plant",
            PlantModel::new(a, rows("plant.b", &p.b)?, rows("plant.c", &p.c)?, q, rows("plant.r", &p.r)?),
        )
    }

    pub fn chain(&self, space: &ModeSpace) -> Result<TransitionMatrix> {
        match (&self.chain.matrix, &self.chain.links) {
            (Some(m), None) => field("chain.matrix", TransitionMatrix::new(rows("chain.matrix", m)?)),
            (None, Some(links)) => {
                let chains = links
                    .iter()
                    .enumerate()
                    .map(|(i, l)| {
                        let name = format!("chain.links[{}]", i + 1);
                        let m = rows(&name, l)?;
                        if m.shape() != (2, 2) {
                            return Err(Error::config(&name, "each link chain is 2×2"));
                        }
                        field(&name, LinkChain::new([[m[(0, 0)], m[(0, 1)]], [m[(1, 0)], m[(1, 1)]]]))
                    })
                    .collect::<Result<Vec<_>>>()?;
                field("chain.links", kron_compose(&chains, space))
            }
            _ => Err(Error::config("chain", "set exactly one of `matrix` or `links`")),
        }
    }

    pub fn trial_config(&self) -> Result<TrialConfig> {
        if self.steps == 0 {
            return Err(Error::config("steps", "must be at least 1"));
        }
        if self.trials == 0 {
            return Err(Error::config("trials", "must be at least 1"));
        }
        if self.estimators.is_empty() {
            return Err(Error::config("estimators", "select at least one estimator"));
        }
        field("hist_bin_width", metrics::histogram(&[], self.hist_bin_width))?;
        let plant = self.plant()?;
        let (n, r) = (plant.n(), plant.inputs());
        let space = field("plant.b", ModeSpace::new(r))?;
        let chain = self.chain(&space)?;

        let arma = match &self.arma {
            Some(a) => {
                let b = a
                    .b
                    .iter()
                    .enumerate()
                    .map(|(j, bj)| rows(&format!("arma.b[{}]", j + 1), bj))
                    .collect::<Result<Vec<_>>>()?;
                Some(field(
                    "arma",
                    ArmaModel::new(a.ar.clone(), b, a.ma.clone(), rows("arma.lambda", &a.lambda)?),
                )?)
            }
            None => None,
        };

        let input = match (&self.input.std, &self.input.sequence) {
            (Some(std), None) => InputSpec::WhiteNoise { std: std.clone() },
            (None, Some(seq)) => InputSpec::Sequence(seq.iter().map(|u| vector(u)).collect()),
            _ => return Err(Error::config("input", "set exactly one of `std` or `sequence`")),
        };

        let init = &self.initial;
        expect_len("initial.x0", &init.x0, n)?;
        let held0 = match &init.held {
            Some(h) => {
                expect_len("initial.held", h, r)?;
                vector(h)
            }
            None => Vector::zeros(r),
        };
        let initial_mode = match &init.mode {
            ModeSpec::Named(s) if s == "stationary" => InitialMode::Stationary,
            ModeSpec::Named(s) => {
                return Err(Error::config("initial.mode", format!("expected \"stationary\" or a mode number, got `{s}`")))
            }
            ModeSpec::Number(j) => InitialMode::Fixed(field("initial.mode", space.mode(*j))?),
        };

        let est = &self.estimator;
        let aug = AugmentedModel::new(plant.clone(), self.strategy)?;
        let dim = aug.state_dim();
        expect_len("estimator.xhat0", &est.xhat0, n)?;
        let held_est = match &est.held0 {
            Some(h) => {
                expect_len("estimator.held0", h, r)?;
                vector(h)
            }
            None => Vector::zeros(r),
        };
        let mean = aug.compose_state(&vector(&est.xhat0), &held_est)?;
        let cov = match &est.p0 {
            CovSpec::Scale(s) => Matrix::identity(dim, dim) * *s,
            CovSpec::Matrix(m) => {
                let m = rows("estimator.p0", m)?;
                if m.shape() != (dim, dim) {
                    return Err(Error::config(
                        "estimator.p0",
                        format!("expected {dim}×{dim} for the {} strategy", self.strategy),
                    ));
                }
                m
            }
        };
        let prior = match &est.mode_prior {
            Some(p) => field("estimator.mode_prior", ModePosterior::new(vector(p)))?,
            None => ModePosterior::uniform(space.size()),
        };

        let cfg = TrialConfig {
            plant,
            arma,
            strategy: self.strategy,
            chain,
            steps: self.steps,
            input,
            x0: vector(&init.x0),
            held0,
            x0_std: init.x0_std,
            initial_mode,
            init: EstimatorInit { mean, cov, prior },
        };
        let scenario = Scenario::new(cfg.clone())?;
        if self.estimators.contains(&EstimatorKind::Alg1) && scenario.arma().is_none() {
            return Err(Error::config(
                "arma",
                "alg1 needs an input-output model; the plant cannot be converted (C must be square invertible and Q zero), so supply [arma]",
            ));
        }
        Ok(cfg)
    }
}

/// Formats a float with 17 significant digits.
fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn step_csv_header(record: &TrialRecord, kinds: &[EstimatorKind]) -> Vec<String> {
    let n = record.plant_dim;
    let m = record.observations.y0.len();
    let r = record.observations.inputs.first().map_or(0, Vector::len);
    let mut cols = vec!["k".to_string(), "theta_true".to_string()];
    cols.extend(kinds.iter().map(|k| format!("theta_hat_{k}")));
    cols.extend((1..=n).map(|i| format!("x{i}")));
    for k in kinds {
        cols.extend((1..=n).map(|i| format!("xhat{i}_{k}")));
    }
    cols.extend((1..=m).map(|i| format!("y{i}")));
    cols.extend((1..=r).map(|i| format!("u{i}")));
    cols.extend((1..=r).map(|i| format!("uhat{i}")));
    cols.push("fallback_flags".into());
    cols
}

/// Per-step CSV of one trial. Row `k` holds `θ_{k−1}`, its estimates, `x_k`,
/// `x̂_{k|k}`, `y_k`, `u_{k−1}`, `û_{k−1}` and one fallback digit per estimator.
pub fn write_step_csv(out: &mut impl std::io::Write, record: &TrialRecord, kinds: &[EstimatorKind]) -> Result<()> {
    let n = record.plant_dim;
    writeln!(
        out,
        "# {CSV_SCHEMA}; seed={}; row k: theta_true=theta_(k-1), theta_hat_*=estimate of theta_(k-1), x=x_k, xhat=x_(k|k), y=y_k, u=u_(k-1), uhat=applied u_(k-1); modes 1-based",
        record.seed
    )?;
    writeln!(out, "{}", step_csv_header(record, kinds).join(","))?;
    let traces: Vec<_> = kinds.iter().map(|&k| record.trace(k)).collect();
    for idx in 0..record.steps() {
        let mut row = vec![(idx + 1).to_string(), record.truth.modes[idx].to_string()];
        for t in &traces {
            row.push(t.and_then(|t| t.modes.get(idx)).map_or(String::new(), |m| m.to_string()));
        }
        row.extend(record.truth.states[idx].iter().take(n).map(|&x| num(x)));
        for t in &traces {
            match t.and_then(|t| t.states.get(idx)).and_then(Option::as_ref) {
                Some(x) => row.extend(x.iter().take(n).map(|&v| num(v))),
                None => row.extend(std::iter::repeat_n(String::new(), n)),
            }
        }
        row.extend(record.observations.outputs[idx].iter().map(|&v| num(v)));
        row.extend(record.observations.inputs[idx].iter().map(|&v| num(v)));
        row.extend(record.truth.applied[idx].iter().map(|&v| num(v)));
        row.push(
            traces
                .iter()
                .map(|t| match t.and_then(|t| t.diagnostics.get(idx)) {
                    Some(d) if d.fallback => '1',
                    Some(_) => '0',
                    None => '-',
                })
                .collect(),
        );
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Plot series for one estimator: mode trace, states, estimates and errors.
pub fn write_series_csv(out: &mut impl std::io::Write, record: &TrialRecord, kind: EstimatorKind) -> Result<()> {
    let n = record.plant_dim;
    let trace = record.trace(kind);
    writeln!(out, "# {CSV_SCHEMA} series; estimator={kind}; seed={}", record.seed)?;
    let mut cols = vec!["k".to_string(), "theta_true".into(), "theta_hat".into(), "mode_error".into()];
    cols.extend((1..=n).map(|i| format!("x{i}")));
    cols.extend((1..=n).map(|i| format!("xhat{i}")));
    cols.extend((1..=n).map(|i| format!("err{i}")));
    writeln!(out, "{}", cols.join(","))?;
    for idx in 0..record.steps() {
        let truth = record.truth.modes[idx];
        let est = trace.and_then(|t| t.modes.get(idx)).copied();
        let mut row = vec![
            (idx + 1).to_string(),
            truth.to_string(),
            est.map_or(String::new(), |m| m.to_string()),
            est.map_or(String::new(), |m| ((m != truth) as u8).to_string()),
        ];
        let x = &record.truth.states[idx];
        row.extend(x.iter().take(n).map(|&v| num(v)));
        match trace.and_then(|t| t.states.get(idx)).and_then(Option::as_ref) {
            Some(xhat) => {
                row.extend(xhat.iter().take(n).map(|&v| num(v)));
                row.extend((0..n).map(|i| num(x[i] - xhat[i])));
            }
            None => row.extend(std::iter::repeat_n(String::new(), 2 * n)),
        }
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

pub fn write_histogram_csv(out: &mut impl std::io::Write, hist: &metrics::Histogram) -> Result<()> {
    writeln!(out, "bin_lo,bin_hi,count")?;
    for (i, count) in hist.counts.iter().enumerate() {
        writeln!(out, "{},{},{}", hist.edges[i], hist.edges[i + 1], count)?;
    }
    Ok(())
}

/// Run metadata stored next to the metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub name: String,
    pub strategy: LossStrategy,
    pub steps: usize,
    pub trials: usize,
    pub seed: u64,
    pub failed_trials: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsFile {
    pub run: RunInfo,
    #[serde(flatten)]
    pub summary: MetricsSummary,
}

#[derive(Debug)]
pub struct RunReport {
    pub summary: MetricsSummary,
    pub info: RunInfo,
    pub files: Vec<PathBuf>,
}

/// Tracks written files so a failed run leaves nothing behind.
struct Emitter {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Emitter {
    fn write(&mut self, name: &str, body: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = Vec::new();
        body(&mut buf)?;
        let path = self.dir.join(name);
        self.written.push(path.clone());
        fs::File::create(&path)?.write_all(&buf)?;
        Ok(())
    }

    fn discard(&self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
    }
}

/// Runs the Monte Carlo experiment and writes the requested outputs.
pub fn run_experiment(cfg: &ExperimentConfig, seed: u64) -> Result<RunReport> {
    let scenario = Scenario::new(cfg.trial_config()?)?;
    let run = sim::run_monte_carlo(&scenario, &cfg.estimators, cfg.trials, seed)?;
    let summary = metrics::aggregate(&run.records, &cfg.estimators, cfg.hist_bin_width)?;
    let info = RunInfo {
        name: cfg.name.clone(),
        strategy: cfg.strategy,
        steps: cfg.steps,
        trials: cfg.trials,
        seed,
        failed_trials: run.failed_trials,
    };

    let dir = PathBuf::from(&cfg.output.dir);
    fs::create_dir_all(&dir)?;
    let mut emitter = Emitter { dir, written: Vec::new() };
    let result = (|| -> Result<()> {
        if cfg.output.emit_steps {
            for (t, record) in run.records.iter().enumerate() {
                emitter.write(&format!("trial_{t:04}.csv"), |b| write_step_csv(b, record, &cfg.estimators))?;
            }
        }
        if cfg.output.metrics {
            let file = MetricsFile { run: info.clone(), summary: summary.clone() };
            emitter.write("metrics.json", |b| {
                let text = serde_json::to_string_pretty(&file).map_err(|e| Error::Numerical(e.to_string()))?;
                writeln!(b, "{text}")?;
                Ok(())
            })?;
        }
        for est in &summary.estimators {
            if cfg.output.histograms {
                emitter.write(&format!("hist_{}.csv", est.estimator), |b| write_histogram_csv(b, &est.histogram))?;
            }
            if cfg.output.series {
                emitter.write(&format!("series_{}.csv", est.estimator), |b| {
                    write_series_csv(b, &run.records[0], est.estimator)
                })?;
            }
        }
        Ok(())
    })();
    if let Err(e) = result {
        emitter.discard();
        return Err(e);
    }
    Ok(RunReport { summary, info, files: emitter.written })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_matrix_is_composed_chain() {
        let cfg = preset("cstr5").unwrap();
        let space = ModeSpace::new(2).unwrap();
        let p = cfg.chain(&space).unwrap();
        assert!((p.matrix()[(0, 0)] - 0.64).abs() < 1e-15);
        assert!((p.matrix()[(3, 3)] - 0.36).abs() < 1e-15);
        assert!(preset("nope").is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = cstr5();
        let text = cfg.to_toml();
        let back = parse_config(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.to_toml(), text);
    }

    #[test]
    fn bad_row_is_named() {
        let mut cfg = cstr5();
        cfg.chain = ChainSection {
            matrix: Some(vec![
                vec![0.5, 0.2, 0.1, 0.1],
                vec![0.25; 4],
                vec![0.25; 4],
                vec![0.25; 4],
            ]),
            links: None,
        };
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("chain.matrix") && err.contains("row 1"), "{err}");
    }

    #[test]
    fn parse_errors_carry_location() {
        let err = parse_config("name = \"x\"\nsteps = [").unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        let err = parse_config(&cstr5().to_toml().replace("trials = 100", "trials = 100\nbogus = 1"))
            .unwrap_err()
            .to_string();
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn strategy_override_checks_dimensions() {
        let mut cfg = cstr5();
        cfg.strategy = LossStrategy::Zero;
        cfg.validate().unwrap();
        cfg.estimator.p0 = CovSpec::Matrix(vec![vec![0.1, 0.0, 0.0, 0.0]; 4]);
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("estimator.p0"), "{err}");
    }
}
