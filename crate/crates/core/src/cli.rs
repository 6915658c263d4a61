//! Command-line front end: `ingest`, `synthesize`, `train`, `forecast`,
//! `evaluate` and `pv`, sharing one TOML run configuration whose values
//! command-line flags override.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use chrono::NaiveDateTime;
use clap::{error::ErrorKind, Args, Parser, Subcommand};
use serde::Deserialize;

use crate::dataset::{load_csv, synthesize_station, Cadence, DateSpan, IrradiationSeries, SynthesisParams};
use crate::error::{Error, Result};
use crate::forecast::{
    ann_forecast, evaluate_abc, fit_model, forecasts_to_csv, is_in_sample, AnnOptions, ExperimentConfig,
    Forecaster, PersistenceMode,
};
use crate::metrics::{nrmse, render_table, reports_to_csv, rmse, MetricOptions, NrmseDivisor};
use crate::mlp::{self, BatchMode, MlpModel, TrainConfig, TrainReport};
use crate::preprocessing::Preprocessor;
use crate::pv::{pv_energy, pv_to_csv, transpose_forecast, ClearSkyModel, PvPlant, TranspositionOptions};
use crate::solar_geometry::{SolarGeometry, StationMeta};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_SCHEMA: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_TRAINING: i32 = 4;

/// Exit status for an error: 2 for bad or mismatched data, 3 for I/O,
/// 4 for training failures.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Input(_) | Error::Parse { .. } | Error::Schema { .. } | Error::Mismatch(_) | Error::ModelFile(_) => {
            EXIT_SCHEMA
        }
        Error::Io { .. } => EXIT_IO,
        Error::Fit(_) | Error::Training(_) | Error::Diverged { .. } => EXIT_TRAINING,
        Error::Internal(_) => EXIT_INTERNAL,
    }
}

/// Every setting of a run. Omitted keys take the defaults below; unknown
/// keys are rejected.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Global seed: weight init, synthesis, bootstrap. Default 0.
    pub seed: u64,
    /// W/m². Default 1367.
    pub solar_constant: f64,
    /// Hourly points whose hour-midpoint solar elevation is below this are
    /// excluded. Default 5.
    pub elevation_cutoff_deg: f64,
    /// Default 0.01.
    pub learning_rate: f64,
    /// Default 0.9.
    pub momentum: f64,
    /// Default 2000.
    pub max_epochs: usize,
    /// Epochs without validation improvement before stopping. Default 50.
    pub patience: usize,
    /// Chronological share of windows used for training. Default 0.8.
    pub split_fraction: f64,
    /// `mean` or `range`. Default `mean`.
    pub nrmse_divisor: String,
    /// Default 1000.
    pub bootstrap_resamples: usize,
    /// Bound ANN clearness outputs to `[0, k_max]`. Default false.
    pub clamp_output: bool,
    /// Persistence on clearness instead of raw irradiation. Default false.
    pub smart_persistence: bool,
    /// Default 0.13.
    pub pv_efficiency: f64,
    /// m². Default 10.125.
    pub pv_area_m2: f64,
    /// Degrees from horizontal. Default 80.
    pub pv_tilt_deg: f64,
    /// Degrees from south, west positive. Default 0.
    pub pv_azimuth_deg: f64,
    /// Default 0.2.
    pub albedo: f64,
    /// Upper bound on the clear-sky tilt ratio. Default 5.
    pub ratio_cap: f64,
    /// Default 0.6.
    pub synth_mean_clearness: f64,
    /// Lag-1 coefficient of the regional clearness process. Default 0.8.
    pub synth_persistence: f64,
    /// Default 0.1.
    pub synth_innovation_sd: f64,
    /// Default 0.05.
    pub synth_station_noise_sd: f64,
    /// Seeds the station-specific noise. Default 1.
    pub synth_station_seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        let synth = SynthesisParams::default();
        let metrics = MetricOptions::default();
        Self {
            seed: 0,
            solar_constant: crate::solar_geometry::SOLAR_CONSTANT,
            elevation_cutoff_deg: crate::preprocessing::DEFAULT_ELEVATION_CUTOFF_DEG,
            learning_rate: train.learning_rate,
            momentum: train.momentum,
            max_epochs: train.max_epochs,
            patience: train.patience,
            split_fraction: train.split_fraction,
            nrmse_divisor: metrics.divisor.as_str().to_string(),
            bootstrap_resamples: metrics.resamples,
            clamp_output: false,
            smart_persistence: false,
            pv_efficiency: crate::pv::DEFAULT_EFFICIENCY,
            pv_area_m2: crate::pv::DEFAULT_AREA_M2,
            pv_tilt_deg: crate::pv::DEFAULT_TILT_DEG,
            pv_azimuth_deg: crate::pv::DEFAULT_AZIMUTH_DEG,
            albedo: crate::pv::DEFAULT_ALBEDO,
            ratio_cap: crate::pv::DEFAULT_RATIO_CAP,
            synth_mean_clearness: synth.mean_clearness,
            synth_persistence: synth.persistence,
            synth_innovation_sd: synth.innovation_sd,
            synth_station_noise_sd: synth.station_noise_sd,
            synth_station_seed: synth.station_seed,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse {
            line: toml_line(text, &e),
            message: e.message().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| annotate(path, e))
    }

    pub fn geometry(&self) -> Result<SolarGeometry> {
        SolarGeometry::new(self.solar_constant)
    }

    pub fn preprocessor(&self) -> Result<Preprocessor> {
        Preprocessor::new(self.geometry()?, self.elevation_cutoff_deg.to_radians())
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let cfg = TrainConfig {
            learning_rate: self.learning_rate,
            momentum: self.momentum,
            max_epochs: self.max_epochs,
            patience: self.patience,
            batch: BatchMode::Full,
            seed: self.seed,
            split_fraction: self.split_fraction,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn metric_options(&self) -> Result<MetricOptions> {
        Ok(MetricOptions {
            divisor: self.nrmse_divisor.parse::<NrmseDivisor>()?,
            resamples: self.bootstrap_resamples,
        })
    }

    pub fn synthesis_params(&self) -> SynthesisParams {
        SynthesisParams {
            mean_clearness: self.synth_mean_clearness,
            persistence: self.synth_persistence,
            innovation_sd: self.synth_innovation_sd,
            station_noise_sd: self.synth_station_noise_sd,
            station_seed: self.synth_station_seed,
        }
    }

    pub fn plant(&self, station: StationMeta) -> Result<PvPlant> {
        PvPlant::new(
            station,
            self.pv_efficiency,
            self.pv_area_m2,
            self.pv_tilt_deg,
            self.pv_azimuth_deg,
        )
    }

    pub fn transposition(&self) -> Result<TranspositionOptions> {
        Ok(TranspositionOptions {
            clear_sky: ClearSkyModel::new(self.geometry()?, self.albedo)?,
            ratio_cap: self.ratio_cap,
        })
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        Ok(ExperimentConfig {
            train: self.train_config()?,
            preprocessor: self.preprocessor()?,
            metrics: self.metric_options()?,
            clamp_output: self.clamp_output,
            persistence: if self.smart_persistence {
                PersistenceMode::Clearness
            } else {
                PersistenceMode::Raw
            },
            seed: self.seed,
        })
    }
}

fn toml_line(text: &str, err: &toml::de::Error) -> usize {
    err.span()
        .map_or(0, |span| text[..span.start.min(text.len())].matches('\n').count() + 1)
}

fn annotate(path: &Path, err: Error) -> Error {
    match err {
        Error::Parse { line, message } => Error::Parse {
            line,
            message: format!("{}: {message}", path.display()),
        },
        other => other,
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StationFile {
    name: String,
    latitude_deg: f64,
    longitude_deg: f64,
    #[serde(default)]
    altitude_m: f64,
    #[serde(default)]
    utc_offset_h: f64,
}

/// Reads a station description:
/// `name`, `latitude_deg`, `longitude_deg`, `altitude_m` (default 0),
/// `utc_offset_h` (default 0).
pub fn load_station(path: &Path) -> Result<StationMeta> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: StationFile = toml::from_str(&text).map_err(|e| {
        annotate(
            path,
            Error::Parse {
                line: toml_line(&text, &e),
                message: e.message().to_string(),
            },
        )
    })?;
    StationMeta::new(
        file.name,
        file.latitude_deg,
        file.longitude_deg,
        file.altitude_m,
        file.utc_offset_h,
    )
}

#[derive(Debug, Parser)]
#[command(name = "solarcast", version, about = "One-step-ahead solar irradiation forecasting with relocatable MLP models")]
pub struct Cli {
    /// Run configuration (TOML key-value file).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Global seed; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a measurement CSV and write its canonical gap-filled form.
    Ingest(IngestArgs),
    /// Generate a synthetic irradiation series for a station.
    Synthesize(SynthesizeArgs),
    /// Train an MLP on one station's series and write the model file.
    Train(TrainArgs),
    /// Forecast a target series with a trained model.
    Forecast(ForecastArgs),
    /// Compare remote model (A), local model (B) and persistence (C).
    Evaluate(EvaluateArgs),
    /// Forecast PV energy on a tilted plant from an hourly model.
    Pv(PvArgs),
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    /// Irradiation CSV (`timestamp,ghi_wh_m2`).
    #[arg(long)]
    pub series: PathBuf,
    /// Station TOML file.
    #[arg(long)]
    pub station: PathBuf,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub input: SeriesArgs,
    #[arg(long)]
    pub cadence: Cadence,
    /// Canonical series output.
    #[arg(long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct SynthesizeArgs {
    #[arg(long)]
    pub station: PathBuf,
    #[arg(long)]
    pub cadence: Cadence,
    #[arg(long)]
    pub start_year: i32,
    #[arg(long)]
    pub end_year: i32,
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub mean_clearness: Option<f64>,
    #[arg(long)]
    pub station_seed: Option<u64>,
    #[arg(long)]
    pub persistence: Option<f64>,
    #[arg(long)]
    pub innovation_sd: Option<f64>,
    #[arg(long)]
    pub station_noise_sd: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainFlags {
    #[arg(long)]
    pub elevation_cutoff_deg: Option<f64>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub momentum: Option<f64>,
    #[arg(long)]
    pub max_epochs: Option<usize>,
    #[arg(long)]
    pub patience: Option<usize>,
    #[arg(long)]
    pub split_fraction: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[command(flatten)]
    pub input: SeriesArgs,
    #[arg(long)]
    pub cadence: Cadence,
    /// Model file output.
    #[arg(long)]
    pub output: PathBuf,
    #[command(flatten)]
    pub train: TrainFlags,
}

#[derive(Debug, Args)]
pub struct ForecastArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub input: SeriesArgs,
    /// Forecast CSV output.
    #[arg(long)]
    pub output: PathBuf,
    #[arg(long)]
    pub clamp_output: bool,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Model trained at another station (case A).
    #[arg(long)]
    pub model: PathBuf,
    /// Target series to score.
    #[command(flatten)]
    pub target: SeriesArgs,
    /// Earlier series of the target station; trains case B.
    #[arg(long)]
    pub local_series: Option<PathBuf>,
    /// Machine-readable report output.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Per-point forecast CSV output.
    #[arg(long)]
    pub forecasts: Option<PathBuf>,
    #[arg(long)]
    pub nrmse_divisor: Option<NrmseDivisor>,
    #[arg(long)]
    pub bootstrap_resamples: Option<usize>,
    #[arg(long)]
    pub clamp_output: bool,
    #[arg(long)]
    pub smart_persistence: bool,
    #[command(flatten)]
    pub train: TrainFlags,
}

#[derive(Debug, Args)]
pub struct PvArgs {
    /// Hourly model file.
    #[arg(long)]
    pub model: PathBuf,
    /// Hourly target series at the plant's station.
    #[command(flatten)]
    pub target: SeriesArgs,
    /// PV output CSV.
    #[arg(long)]
    pub output: PathBuf,
    /// Measured plant log (`timestamp,e_pv_wh`).
    #[arg(long)]
    pub measured: Option<PathBuf>,
    #[arg(long)]
    pub efficiency: Option<f64>,
    #[arg(long)]
    pub area_m2: Option<f64>,
    #[arg(long)]
    pub tilt_deg: Option<f64>,
    #[arg(long)]
    pub azimuth_deg: Option<f64>,
    #[arg(long)]
    pub albedo: Option<f64>,
    #[arg(long)]
    pub ratio_cap: Option<f64>,
    #[arg(long)]
    pub clamp_output: bool,
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

impl TrainFlags {
    fn apply(&self, cfg: &mut RunConfig) {
        set(&mut cfg.elevation_cutoff_deg, self.elevation_cutoff_deg);
        set(&mut cfg.learning_rate, self.learning_rate);
        set(&mut cfg.momentum, self.momentum);
        set(&mut cfg.max_epochs, self.max_epochs);
        set(&mut cfg.patience, self.patience);
        set(&mut cfg.split_fraction, self.split_fraction);
    }
}

/// Parses `args` (program name first) and runs the command; returns the
/// process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_SCHEMA,
            };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn execute(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    set(&mut cfg.seed, cli.seed);
    match cli.command {
        Command::Ingest(args) => cmd_ingest(&cfg, &args),
        Command::Synthesize(args) => cmd_synthesize(cfg, &args),
        Command::Train(args) => {
            args.train.apply(&mut cfg);
            cmd_train(&cfg, &args)
        }
        Command::Forecast(args) => {
            cfg.clamp_output |= args.clamp_output;
            cmd_forecast(&cfg, &args)
        }
        Command::Evaluate(args) => {
            args.train.apply(&mut cfg);
            set(&mut cfg.nrmse_divisor, args.nrmse_divisor.map(|d| d.as_str().to_string()));
            set(&mut cfg.bootstrap_resamples, args.bootstrap_resamples);
            cfg.clamp_output |= args.clamp_output;
            cfg.smart_persistence |= args.smart_persistence;
            cmd_evaluate(&cfg, &args)
        }
        Command::Pv(args) => {
            set(&mut cfg.pv_efficiency, args.efficiency);
            set(&mut cfg.pv_area_m2, args.area_m2);
            set(&mut cfg.pv_tilt_deg, args.tilt_deg);
            set(&mut cfg.pv_azimuth_deg, args.azimuth_deg);
            set(&mut cfg.albedo, args.albedo);
            set(&mut cfg.ratio_cap, args.ratio_cap);
            cfg.clamp_output |= args.clamp_output;
            cmd_pv(&cfg, &args)
        }
    }
}

fn load_series(cfg: &RunConfig, args: &SeriesArgs, cadence: Cadence) -> Result<IrradiationSeries> {
    let station = load_station(&args.station)?;
    let (series, report) = load_csv(&args.series, station, cadence, &cfg.geometry()?)?;
    log::info!("{}: {report}", args.series.display());
    Ok(series)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn print_train_report(report: &TrainReport, model: &MlpModel) {
    println!("epochs run: {}", report.epochs_run);
    println!("best epoch: {}", report.best_epoch);
    println!("train MSE: {:.6e}", report.final_train_mse);
    println!("validation MSE: {:.6e}", report.final_val_mse);
    println!("seed: {}", model.seed);
    println!("checksum: {}", mlp::checksum(model));
}

pub fn cmd_ingest(cfg: &RunConfig, args: &IngestArgs) -> Result<()> {
    let station = load_station(&args.input.station)?;
    let (series, report) = load_csv(&args.input.series, station, args.cadence, &cfg.geometry()?)?;
    series.write_csv(&args.output)?;
    println!("{report}");
    Ok(())
}

pub fn cmd_synthesize(mut cfg: RunConfig, args: &SynthesizeArgs) -> Result<()> {
    set(&mut cfg.synth_mean_clearness, args.mean_clearness);
    set(&mut cfg.synth_station_seed, args.station_seed);
    set(&mut cfg.synth_persistence, args.persistence);
    set(&mut cfg.synth_innovation_sd, args.innovation_sd);
    set(&mut cfg.synth_station_noise_sd, args.station_noise_sd);
    let station = load_station(&args.station)?;
    let span = DateSpan::years(args.start_year, args.end_year)?;
    let series = synthesize_station(
        cfg.seed,
        &station,
        args.cadence,
        span,
        &cfg.synthesis_params(),
        &cfg.geometry()?,
    )?;
    series.write_csv(&args.output)?;
    println!(
        "{} {} points for {} ({}..{}), seed {}",
        series.len(),
        args.cadence,
        station.name(),
        args.start_year,
        args.end_year,
        cfg.seed
    );
    Ok(())
}

pub fn cmd_train(cfg: &RunConfig, args: &TrainArgs) -> Result<()> {
    let series = load_series(cfg, &args.input, args.cadence)?;
    let (model, report) = fit_model(&series, &cfg.preprocessor()?, &cfg.train_config()?)?;
    mlp::save(&model, &args.output)?;
    print_train_report(&report, &model);
    Ok(())
}

fn ann_label(model: &MlpModel, target: &IrradiationSeries) -> Forecaster {
    if model.train_station == target.station().name() {
        Forecaster::AnnLocal
    } else {
        Forecaster::AnnRemote
    }
}

fn warn_in_sample(what: &str) {
    let msg = format!("WARNING: IN-SAMPLE EVALUATION: {what}; scores are not forecast skill");
    log::warn!("{msg}");
    eprintln!("{msg}");
    println!("{msg}");
}

pub fn cmd_forecast(cfg: &RunConfig, args: &ForecastArgs) -> Result<()> {
    let model = mlp::load(&args.model)?;
    let target = load_series(cfg, &args.input, model.cadence)?;
    let options = AnnOptions {
        geometry: cfg.geometry()?,
        clamp_output: cfg.clamp_output,
        forecaster: ann_label(&model, &target),
    };
    let forecast = ann_forecast(&model, &target, &options)?;
    write_file(&args.output, &forecasts_to_csv(std::slice::from_ref(&forecast)))?;
    println!("{} forecasts written, seed {}", forecast.points.len(), model.seed);
    Ok(())
}

pub fn cmd_evaluate(cfg: &RunConfig, args: &EvaluateArgs) -> Result<()> {
    let model_a = mlp::load(&args.model)?;
    let target = load_series(cfg, &args.target, model_a.cadence)?;
    let experiment = cfg.experiment()?;
    if is_in_sample(&model_a, &target) {
        warn_in_sample("model A was trained on this station over the target period");
    }
    let model_b = match &args.local_series {
        Some(path) => {
            let local = load_series(
                cfg,
                &SeriesArgs {
                    series: path.clone(),
                    station: args.target.station.clone(),
                },
                model_a.cadence,
            )?;
            if local.overlaps(&target) {
                warn_in_sample("the local training series overlaps the target period");
            }
            let (model, report) = fit_model(&local, &experiment.preprocessor, &experiment.train)?;
            println!(
                "model B: {} epochs, validation MSE {:.6e}",
                report.epochs_run, report.final_val_mse
            );
            Some(model)
        }
        None => None,
    };
    let outcome = evaluate_abc(&model_a, model_b.as_ref(), &target, &experiment)?;
    print!("{}", render_table(&outcome.reports));
    println!(
        "target: {}, cadence: {}, nRMSE divisor: {}, seed: {}",
        target.station().name(),
        target.cadence(),
        experiment.metrics.divisor,
        cfg.seed
    );
    if let Some(path) = &args.report {
        write_file(path, &reports_to_csv(&outcome.reports, cfg.seed))?;
    }
    if let Some(path) = &args.forecasts {
        write_file(path, &forecasts_to_csv(&outcome.forecasts))?;
    }
    Ok(())
}

/// Reads a plant log with header `timestamp,e_pv_wh` and hourly timestamps.
pub fn load_pv_log(path: &Path) -> Result<BTreeMap<NaiveDateTime, f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == "timestamp,e_pv_wh" => {}
        _ => {
            return Err(Error::Schema {
                line: 1,
                message: "expected header `timestamp,e_pv_wh`".into(),
            })
        }
    }
    let mut log = BTreeMap::new();
    for (i, line) in lines {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let parse_err = |message: String| Error::Parse { line: line_no, message };
        let (ts, value) = line
            .split_once(',')
            .ok_or_else(|| parse_err("expected two fields".into()))?;
        let ts = Cadence::Hourly.parse_timestamp(ts.trim()).map_err(parse_err)?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| parse_err(format!("invalid energy `{}`", value.trim())))?;
        if !(value.is_finite() && value >= 0.0) {
            return Err(parse_err(format!("energy {value} must be finite and non-negative")));
        }
        if log.insert(ts, value).is_some() {
            return Err(Error::Schema {
                line: line_no,
                message: format!("duplicate timestamp {ts}"),
            });
        }
    }
    Ok(log)
}

pub fn cmd_pv(cfg: &RunConfig, args: &PvArgs) -> Result<()> {
    let model = mlp::load(&args.model)?;
    if model.cadence != Cadence::Hourly {
        return Err(Error::Mismatch(format!(
            "the PV chain needs an hourly model, {} is {}",
            args.model.display(),
            model.cadence
        )));
    }
    let target = load_series(cfg, &args.target, Cadence::Hourly)?;
    let plant = cfg.plant(target.station().clone())?;
    let options = AnnOptions {
        geometry: cfg.geometry()?,
        clamp_output: cfg.clamp_output,
        forecaster: ann_label(&model, &target),
    };
    let horizontal = ann_forecast(&model, &target, &options)?;
    let tilted = transpose_forecast(&horizontal, &plant, &cfg.transposition()?)?;
    let energy = pv_energy(&tilted, &plant);
    let measured = args.measured.as_deref().map(load_pv_log).transpose()?;
    write_file(&args.output, &pv_to_csv(&energy, measured.as_ref()))?;

    let total = energy.iter().fold(0.0, |acc, p| acc + p.energy);
    println!("hours forecast: {}", energy.len());
    println!("total forecast energy: {total:.1} Wh");
    if let Some(log) = &measured {
        let pairs: Vec<(f64, f64)> = energy
            .iter()
            .filter_map(|p| log.get(&p.timestamp).map(|m| (*m, p.energy)))
            .collect();
        if pairs.is_empty() {
            println!("no measured hour matches a forecast hour");
        } else {
            println!(
                "measured comparison over {} h: RMSE {:.1} Wh, nRMSE {:.1} %",
                pairs.len(),
                rmse(&pairs)?,
                nrmse(&pairs, NrmseDivisor::Mean)?
            );
        }
    }
    println!("seed: {}", model.seed);
    Ok(())
}
