//! Lag windows, the ANN forecasting pipeline (stationarize → normalize →
//! MLP → invert), the persistence baseline, and the relocation experiment
//! comparing a remotely trained model (A), a locally trained model (B) and
//! persistence (C) on one target series.

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use chrono::NaiveDateTime;

use crate::dataset::{Cadence, IrradiationSeries};
use crate::error::{Error, Result};
use crate::metrics::{EvaluationReport, MetricOptions};
use crate::mlp::{self, MlpModel, TrainConfig, TrainReport, INPUTS};
use crate::preprocessing::{fit_norm, ClearnessSeries, NormParams, Preprocessor, Stationarization};
use crate::solar_geometry::SolarGeometry;

/// Lags per window; the target is the point right after them.
pub const LAGS: usize = INPUTS;

/// One supervised example. `inputs[0]` is the most recent lag `t`,
/// `inputs[7]` is `t − 7`; `target` is `t + 1`, stamped at `timestamp`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub timestamp: NaiveDateTime,
    pub inputs: [f64; INPUTS],
    pub target: f64,
}

/// Normalized lag windows plus the preprocessing that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct SupervisedSet {
    pub cadence: Cadence,
    pub samples: Vec<Sample>,
    pub norm: NormParams,
    pub stationarization: Stationarization,
    pub elevation_cutoff: f64,
    pub station: String,
}

impl SupervisedSet {
    pub fn span(&self) -> Option<(NaiveDateTime, NaiveDateTime)> {
        Some((self.samples.first()?.timestamp, self.samples.last()?.timestamp))
    }
}

/// Sliding windows over runs of consecutive measured points. Missing
/// points (including hourly points below the elevation cutoff) break runs,
/// so hourly windows never cross a night.
pub fn make_windows(k_series: &ClearnessSeries, norm: &NormParams) -> SupervisedSet {
    let mut samples = Vec::new();
    let mut run = 0usize;
    for (i, p) in k_series.points.iter().enumerate() {
        let Some(target) = p.k else {
            run = 0;
            continue;
        };
        if run >= LAGS {
            let inputs = std::array::from_fn(|j| {
                norm.normalize(k_series.points[i - 1 - j].k.expect("inside a measured run"))
            });
            samples.push(Sample {
                timestamp: p.timestamp,
                inputs,
                target: norm.normalize(target),
            });
        }
        run += 1;
    }
    if samples.is_empty() {
        log::warn!(
            "{}: no run of {} consecutive valid points, window set is empty",
            k_series.station.name(),
            LAGS + 1
        );
    }
    SupervisedSet {
        cadence: k_series.cadence,
        samples,
        norm: norm.clone(),
        stationarization: k_series.stationarization,
        elevation_cutoff: k_series.elevation_cutoff,
        station: k_series.station.name().to_string(),
    }
}

/// Which of the three compared techniques produced a forecast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Forecaster {
    /// Case A: model trained at another station.
    AnnRemote,
    /// Case B: model trained at the target station.
    AnnLocal,
    /// Case C: naive persistence.
    Persistence,
}

impl Forecaster {
    pub fn as_str(self) -> &'static str {
        match self {
            Forecaster::AnnRemote => "ann_remote",
            Forecaster::AnnLocal => "ann_local",
            Forecaster::Persistence => "persistence",
        }
    }

    pub fn case_letter(self) -> char {
        match self {
            Forecaster::AnnRemote => 'A',
            Forecaster::AnnLocal => 'B',
            Forecaster::Persistence => 'C',
        }
    }
}

impl fmt::Display for Forecaster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Forecaster {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ann_remote" => Ok(Forecaster::AnnRemote),
            "ann_local" => Ok(Forecaster::AnnLocal),
            "persistence" => Ok(Forecaster::Persistence),
            other => Err(Error::input(format!("unknown forecaster `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForecastPoint {
    pub timestamp: NaiveDateTime,
    pub predicted: f64,
    pub measured: f64,
}

/// Predictions paired with measurements, Wh/m² (or Wh after PV conversion).
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSeries {
    pub cadence: Cadence,
    pub forecaster: Forecaster,
    pub station: String,
    pub points: Vec<ForecastPoint>,
}

impl ForecastSeries {
    /// `(measured, predicted)` pairs for the metrics module.
    pub fn pairs(&self) -> Vec<(f64, f64)> {
        self.points.iter().map(|p| (p.measured, p.predicted)).collect()
    }

    pub fn timestamps(&self) -> BTreeSet<NaiveDateTime> {
        self.points.iter().map(|p| p.timestamp).collect()
    }

    pub fn restricted_to(&self, keep: &BTreeSet<NaiveDateTime>) -> ForecastSeries {
        ForecastSeries {
            points: self
                .points
                .iter()
                .filter(|p| keep.contains(&p.timestamp))
                .copied()
                .collect(),
            ..self.clone()
        }
    }
}

pub const FORECAST_CSV_HEADER: &str = "timestamp,measured_wh_m2,predicted_wh_m2,forecaster";

/// Rows ordered by timestamp, then by forecaster (A, B, C).
pub fn forecasts_to_csv(series: &[ForecastSeries]) -> String {
    let mut rows: Vec<(NaiveDateTime, Forecaster, Cadence, f64, f64)> = series
        .iter()
        .flat_map(|s| {
            s.points
                .iter()
                .map(move |p| (p.timestamp, s.forecaster, s.cadence, p.measured, p.predicted))
        })
        .collect();
    rows.sort_by_key(|r| (r.0, r.1));
    let mut out = String::from(FORECAST_CSV_HEADER);
    out.push('\n');
    for (ts, f, cadence, measured, predicted) in rows {
        let _ = writeln!(out, "{},{measured},{predicted},{f}", cadence.format_timestamp(ts));
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PersistenceMode {
    /// `ŷ(t+1) = y(t)` on raw irradiation.
    #[default]
    Raw,
    /// Clearness persistence: `ŷ(t+1) = k(t)·ceiling(t+1)`.
    Clearness,
}

/// Persistence over every pair of consecutive measured points; hourly
/// pairs must both be at or above the elevation cutoff.
pub fn persistence_forecast(
    series: &IrradiationSeries,
    prep: &Preprocessor,
    mode: PersistenceMode,
) -> ForecastSeries {
    let station = series.station();
    let cadence = series.cadence();
    let usable = |ts| prep.is_daylight(station, cadence, ts);
    let mut points = Vec::new();
    for pair in series.points().windows(2) {
        let (prev, cur) = (pair[0], pair[1]);
        let (Some(y_prev), Some(y_cur)) = (prev.value, cur.value) else {
            continue;
        };
        if !(usable(prev.timestamp) && usable(cur.timestamp)) {
            continue;
        }
        let predicted = match mode {
            PersistenceMode::Raw => y_prev,
            PersistenceMode::Clearness => {
                let c_prev = prep.ceiling(station, cadence, prev.timestamp);
                if c_prev <= 0.0 {
                    continue;
                }
                y_prev / c_prev * prep.ceiling(station, cadence, cur.timestamp)
            }
        };
        points.push(ForecastPoint {
            timestamp: cur.timestamp,
            predicted,
            measured: y_cur,
        });
    }
    ForecastSeries {
        cadence,
        forecaster: Forecaster::Persistence,
        station: station.name().to_string(),
        points,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnOptions {
    pub geometry: SolarGeometry,
    /// Bound denormalized clearness predictions to `[0, k_max]`.
    pub clamp_output: bool,
    pub forecaster: Forecaster,
}

impl Default for AnnOptions {
    fn default() -> Self {
        Self {
            geometry: SolarGeometry::default(),
            clamp_output: false,
            forecaster: Forecaster::AnnRemote,
        }
    }
}

/// Preprocessing the model was trained with.
pub fn model_preprocessor(model: &MlpModel, geometry: SolarGeometry) -> Preprocessor {
    Preprocessor {
        geometry,
        elevation_cutoff: model.elevation_cutoff,
    }
}

/// Relocated forecast: the target station's geometry for (de)stationarizing,
/// the model's training-site extrema for (de)normalizing.
pub fn ann_forecast(
    model: &MlpModel,
    target: &IrradiationSeries,
    options: &AnnOptions,
) -> Result<ForecastSeries> {
    if model.cadence != target.cadence() {
        return Err(Error::Mismatch(format!(
            "{} model applied to a {} series",
            model.cadence,
            target.cadence()
        )));
    }
    if model.stationarization != Stationarization::for_cadence(target.cadence()) {
        return Err(Error::Mismatch(format!(
            "model stationarization {} does not fit a {} series",
            model.stationarization,
            target.cadence()
        )));
    }
    let prep = model_preprocessor(model, options.geometry);
    let k_series = prep.stationarize(target)?;
    let windows = make_windows(&k_series, &model.norm);
    let station = target.station();
    let mut points = Vec::with_capacity(windows.samples.len());
    for sample in &windows.samples {
        let mut k = model.norm.denormalize(model.predict_normalized(&sample.inputs)?);
        if options.clamp_output {
            k = model.norm.clamp_output(k);
        }
        let ceiling = prep.ceiling(station, target.cadence(), sample.timestamp);
        let measured = target
            .index_of(sample.timestamp)
            .and_then(|i| target.points()[i].value)
            .ok_or_else(|| Error::Internal(format!("window target {} not measured", sample.timestamp)))?;
        points.push(ForecastPoint {
            timestamp: sample.timestamp,
            predicted: k * ceiling,
            measured,
        });
    }
    Ok(ForecastSeries {
        cadence: target.cadence(),
        forecaster: options.forecaster,
        station: station.name().to_string(),
        points,
    })
}

/// Windows for training on one station's series.
pub fn training_set(series: &IrradiationSeries, prep: &Preprocessor) -> Result<SupervisedSet> {
    let k_series = prep.stationarize(series)?;
    let norm = fit_norm(&k_series)?;
    Ok(make_windows(&k_series, &norm))
}

/// Stationarize, fit extrema, window and train.
pub fn fit_model(
    series: &IrradiationSeries,
    prep: &Preprocessor,
    cfg: &TrainConfig,
) -> Result<(MlpModel, TrainReport)> {
    mlp::train(&training_set(series, prep)?, cfg)
}

/// True when the model was trained on this station over a period that
/// overlaps the target series.
pub fn is_in_sample(model: &MlpModel, target: &IrradiationSeries) -> bool {
    let same_station = model.train_station == target.station().name();
    match (model.train_span, target.span()) {
        (Some((a0, a1)), Some((b0, b1))) => same_station && a0 <= b1 && b0 <= a1,
        _ => same_station,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub train: TrainConfig,
    pub preprocessor: Preprocessor,
    pub metrics: MetricOptions,
    pub clamp_output: bool,
    pub persistence: PersistenceMode,
    /// Seeds the bootstrap intervals.
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            preprocessor: Preprocessor::default(),
            metrics: MetricOptions::default(),
            clamp_output: false,
            persistence: PersistenceMode::Raw,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AbcOutcome {
    /// Rows in A, B, C order; B absent when no local model was given.
    pub reports: Vec<EvaluationReport>,
    /// Forecasts restricted to the common evaluable timestamps.
    pub forecasts: Vec<ForecastSeries>,
    pub common_timestamps: BTreeSet<NaiveDateTime>,
    pub train_reports: Vec<(Forecaster, TrainReport)>,
}

/// Scores model A, optional model B and persistence on the same set of
/// evaluable timestamps of `target`.
pub fn evaluate_abc(
    model_a: &MlpModel,
    model_b: Option<&MlpModel>,
    target: &IrradiationSeries,
    cfg: &ExperimentConfig,
) -> Result<AbcOutcome> {
    let ann = |forecaster| AnnOptions {
        geometry: cfg.preprocessor.geometry,
        clamp_output: cfg.clamp_output,
        forecaster,
    };
    let mut forecasts = vec![ann_forecast(model_a, target, &ann(Forecaster::AnnRemote))?];
    if let Some(b) = model_b {
        forecasts.push(ann_forecast(b, target, &ann(Forecaster::AnnLocal))?);
    }
    forecasts.push(persistence_forecast(target, &cfg.preprocessor, cfg.persistence));

    let mut common = forecasts[0].timestamps();
    for f in &forecasts[1..] {
        let ts = f.timestamps();
        common.retain(|t| ts.contains(t));
    }
    if common.is_empty() {
        return Err(Error::input(format!(
            "no timestamp of {} is evaluable by every forecaster",
            target.station().name()
        )));
    }
    let forecasts: Vec<ForecastSeries> = forecasts.iter().map(|f| f.restricted_to(&common)).collect();
    let reports = forecasts
        .iter()
        .map(|f| {
            EvaluationReport::compute(f.forecaster, target.station().name(), &f.pairs(), &cfg.metrics, cfg.seed)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AbcOutcome {
        reports,
        forecasts,
        common_timestamps: common,
        train_reports: Vec::new(),
    })
}

/// Trains A on the remote series and B on the local series (concurrently),
/// then scores A, B and persistence on the target year.
pub fn run_abc_experiment(
    train_remote: &IrradiationSeries,
    train_local: &IrradiationSeries,
    target_year: &IrradiationSeries,
    cfg: &ExperimentConfig,
) -> Result<AbcOutcome> {
    let cadence = target_year.cadence();
    if train_remote.cadence() != cadence || train_local.cadence() != cadence {
        return Err(Error::Mismatch("training and target series differ in cadence".into()));
    }
    for (name, series) in [("remote", train_remote), ("local", train_local)] {
        if series.overlaps(target_year) {
            return Err(Error::input(format!(
                "{name} training series overlaps the target period"
            )));
        }
    }
    let prep = &cfg.preprocessor;
    let (a, b) = std::thread::scope(|scope| {
        let remote = scope.spawn(|| fit_model(train_remote, prep, &cfg.train));
        let local = fit_model(train_local, prep, &cfg.train);
        (remote.join().expect("training thread panicked"), local)
    });
    let (model_a, report_a) = a?;
    let (model_b, report_b) = b?;
    let mut outcome = evaluate_abc(&model_a, Some(&model_b), target_year, cfg)?;
    outcome.train_reports = vec![(Forecaster::AnnRemote, report_a), (Forecaster::AnnLocal, report_b)];
    Ok(outcome)
}
