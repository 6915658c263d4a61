//! The 8-3-1 perceptron: tanh hidden layer, linear output, full-batch
//! gradient descent with momentum and early stopping, and a versioned,
//! checksummed text model file.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chrono::NaiveDateTime;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

use crate::dataset::Cadence;
use crate::error::{Error, ModelFileError, Result};
use crate::forecast::{Sample, SupervisedSet};
use crate::preprocessing::{NormParams, Stationarization};

pub const INPUTS: usize = 8;
pub const HIDDEN: usize = 3;
/// Number of trainable parameters: 3·8 + 3 + 3 + 1.
pub const PARAM_COUNT: usize = HIDDEN * INPUTS + HIDDEN + HIDDEN + 1;
pub const MIN_TRAIN_SAMPLES: usize = 50;

/// Weights and biases of the 8-3-1 network. Also used as the gradient type.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pub w_hidden: [[f64; INPUTS]; HIDDEN],
    pub b_hidden: [f64; HIDDEN],
    pub w_out: [f64; HIDDEN],
    pub b_out: f64,
}

impl Network {
    pub fn zeros() -> Self {
        Self {
            w_hidden: [[0.0; INPUTS]; HIDDEN],
            b_hidden: [0.0; HIDDEN],
            w_out: [0.0; HIDDEN],
            b_out: 0.0,
        }
    }

    /// Uniform `[−1/√fan_in, 1/√fan_in]` per layer from a ChaCha8 stream.
    pub fn init(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r_hidden = 1.0 / (INPUTS as f64).sqrt();
        let r_out = 1.0 / (HIDDEN as f64).sqrt();
        let mut net = Self::zeros();
        for row in &mut net.w_hidden {
            for w in row.iter_mut() {
                *w = rng.random_range(-r_hidden..=r_hidden);
            }
        }
        for b in &mut net.b_hidden {
            *b = rng.random_range(-r_hidden..=r_hidden);
        }
        for w in &mut net.w_out {
            *w = rng.random_range(-r_out..=r_out);
        }
        net.b_out = rng.random_range(-r_out..=r_out);
        net
    }

    #[inline]
    fn hidden(&self, x: &[f64; INPUTS]) -> [f64; HIDDEN] {
        let mut h = [0.0; HIDDEN];
        for (j, hj) in h.iter_mut().enumerate() {
            let z = self.b_hidden[j]
                + self.w_hidden[j]
                    .iter()
                    .zip(x)
                    .map(|(w, xi)| w * xi)
                    .sum::<f64>();
            *hj = z.tanh();
        }
        h
    }

    /// `w_out · tanh(w_hidden · x + b_hidden) + b_out`.
    #[inline]
    pub fn forward(&self, x: &[f64; INPUTS]) -> f64 {
        let h = self.hidden(x);
        self.b_out + self.w_out.iter().zip(&h).map(|(w, hj)| w * hj).sum::<f64>()
    }

    pub fn try_forward(&self, x: &[f64; INPUTS]) -> Result<f64> {
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::input("network input must be finite"));
        }
        Ok(self.forward(x))
    }

    /// Mean squared error over the samples.
    pub fn mse(&self, batch: &[Sample]) -> f64 {
        let sse: f64 = batch
            .iter()
            .map(|s| {
                let e = self.forward(&s.inputs) - s.target;
                e * e
            })
            .sum();
        sse / batch.len() as f64
    }

    /// Mean squared error and its exact gradient by backpropagation.
    pub fn loss_gradient(&self, batch: &[Sample]) -> Result<(f64, Network)> {
        if batch.is_empty() {
            return Err(Error::input("gradient needs a non-empty batch"));
        }
        let scale = 2.0 / batch.len() as f64;
        let mut grad = Network::zeros();
        let mut sse = 0.0;
        for s in batch {
            let h = self.hidden(&s.inputs);
            let y = self.b_out + self.w_out.iter().zip(&h).map(|(w, hj)| w * hj).sum::<f64>();
            let e = y - s.target;
            sse += e * e;
            let dy = scale * e;
            grad.b_out += dy;
            for (j, &hj) in h.iter().enumerate() {
                grad.w_out[j] += dy * hj;
                let dz = dy * self.w_out[j] * (1.0 - hj * hj);
                grad.b_hidden[j] += dz;
                for (g, xi) in grad.w_hidden[j].iter_mut().zip(&s.inputs) {
                    *g += dz * xi;
                }
            }
        }
        Ok((sse / batch.len() as f64, grad))
    }

    /// Row-major hidden weights, hidden biases, output weights, output bias.
    pub fn to_params(&self) -> [f64; PARAM_COUNT] {
        let mut p = [0.0; PARAM_COUNT];
        let mut i = 0;
        for row in &self.w_hidden {
            for w in row {
                p[i] = *w;
                i += 1;
            }
        }
        for v in self.b_hidden.iter().chain(&self.w_out) {
            p[i] = *v;
            i += 1;
        }
        p[i] = self.b_out;
        p
    }

    pub fn from_params(p: &[f64; PARAM_COUNT]) -> Self {
        let mut net = Self::zeros();
        let mut it = p.iter().copied();
        for row in &mut net.w_hidden {
            for w in row.iter_mut() {
                *w = it.next().unwrap();
            }
        }
        for b in &mut net.b_hidden {
            *b = it.next().unwrap();
        }
        for w in &mut net.w_out {
            *w = it.next().unwrap();
        }
        net.b_out = it.next().unwrap();
        net
    }

    pub fn is_finite(&self) -> bool {
        self.to_params().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Tanh,
    Linear,
}

impl Activation {
    pub fn as_str(self) -> &'static str {
        match self {
            Activation::Tanh => "tanh",
            Activation::Linear => "linear",
        }
    }
}

/// A trained forecaster: network plus the preprocessing frozen at training time.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub network: Network,
    pub hidden_activation: Activation,
    pub output_activation: Activation,
    pub norm: NormParams,
    pub stationarization: Stationarization,
    /// Radians; used for hourly models only.
    pub elevation_cutoff: f64,
    pub cadence: Cadence,
    pub train_station: String,
    pub seed: u64,
    /// First and last target timestamps of the training samples.
    pub train_span: Option<(NaiveDateTime, NaiveDateTime)>,
}

impl MlpModel {
    /// Normalized one-step-ahead clearness from 8 normalized lags.
    pub fn predict_normalized(&self, x: &[f64; INPUTS]) -> Result<f64> {
        self.network.try_forward(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BatchMode {
    #[default]
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub momentum: f64,
    pub max_epochs: usize,
    pub patience: usize,
    pub batch: BatchMode,
    pub seed: u64,
    /// Leading fraction of samples used for fitting; the rest drives early stopping.
    pub split_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            momentum: 0.9,
            max_epochs: 2000,
            patience: 50,
            batch: BatchMode::Full,
            seed: 0,
            split_fraction: 0.8,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::input("learning rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::input("momentum must be in [0, 1)"));
        }
        if self.max_epochs == 0 || self.patience == 0 {
            return Err(Error::input("max_epochs and patience must be positive"));
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(Error::input("split fraction must be in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub epochs_run: usize,
    /// Losses of the returned (best-validation) snapshot.
    pub final_train_mse: f64,
    pub final_val_mse: f64,
    pub best_epoch: usize,
    /// `(train_mse, val_mse)` at the start of each epoch.
    pub mse_history: Vec<(f64, f64)>,
}

/// Chronological split, full-batch momentum descent, early stopping on
/// the held-out tail; returns the best-validation snapshot.
pub fn train(data: &SupervisedSet, cfg: &TrainConfig) -> Result<(MlpModel, TrainReport)> {
    cfg.validate()?;
    let n = data.samples.len();
    if n < MIN_TRAIN_SAMPLES {
        return Err(Error::Training(format!(
            "{n} samples available, at least {MIN_TRAIN_SAMPLES} required"
        )));
    }
    let n_train = ((cfg.split_fraction * n as f64).round() as usize).clamp(1, n - 1);
    let (fit, val) = data.samples.split_at(n_train);

    let mut net = Network::init(cfg.seed);
    let mut velocity = [0.0; PARAM_COUNT];
    let mut best = (f64::INFINITY, net.clone(), 0usize);
    let mut stale = 0;
    let mut history = Vec::new();

    for epoch in 1..=cfg.max_epochs {
        let (train_mse, grad) = net.loss_gradient(fit)?;
        let val_mse = net.mse(val);
        if !train_mse.is_finite() || !val_mse.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        history.push((train_mse, val_mse));
        if val_mse < best.0 {
            best = (val_mse, net.clone(), epoch);
            stale = 0;
        } else {
            stale += 1;
            if stale >= cfg.patience {
                break;
            }
        }
        let mut params = net.to_params();
        for ((p, v), g) in params.iter_mut().zip(&mut velocity).zip(grad.to_params()) {
            *v = cfg.momentum * *v - cfg.learning_rate * g;
            *p += *v;
        }
        net = Network::from_params(&params);
    }

    let (final_val_mse, network, best_epoch) = best;
    let report = TrainReport {
        epochs_run: history.len(),
        final_train_mse: network.mse(fit),
        final_val_mse,
        best_epoch,
        mse_history: history,
    };
    let model = MlpModel {
        network,
        hidden_activation: Activation::Tanh,
        output_activation: Activation::Linear,
        norm: data.norm.clone(),
        stationarization: data.stationarization,
        elevation_cutoff: data.elevation_cutoff,
        cadence: data.cadence,
        train_station: data.station.clone(),
        seed: cfg.seed,
        train_span: data.span(),
    };
    Ok((model, report))
}

pub const FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "solarcast-mlp";
const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_list(values: &[f64]) -> String {
    values.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(" ")
}

fn payload(model: &MlpModel) -> String {
    let ts = |t: Option<NaiveDateTime>| t.map_or("NA".to_string(), |t| t.format(TIMESTAMP_FORMAT).to_string());
    let params = model.network.to_params();
    let mut out = String::new();
    let mut line = |key: &str, value: String| {
        let _ = writeln!(out, "{key} {value}");
    };
    line("format", MAGIC.into());
    line("format_version", FORMAT_VERSION.to_string());
    line("architecture", format!("{INPUTS} {HIDDEN} 1"));
    line("hidden_activation", model.hidden_activation.as_str().into());
    line("output_activation", model.output_activation.as_str().into());
    line("cadence", model.cadence.as_str().into());
    line("stationarization", model.stationarization.as_str().into());
    line("elevation_cutoff_rad", fmt_f64(model.elevation_cutoff));
    line("train_station", model.train_station.clone());
    line("train_start", ts(model.train_span.map(|s| s.0)));
    line("train_end", ts(model.train_span.map(|s| s.1)));
    line("seed", model.seed.to_string());
    line("norm_source_station", model.norm.source_station.clone());
    line("norm_k_min", fmt_f64(model.norm.k_min));
    line("norm_k_max", fmt_f64(model.norm.k_max));
    line("w_hidden", fmt_list(&params[..HIDDEN * INPUTS]));
    line("b_hidden", fmt_list(&params[HIDDEN * INPUTS..HIDDEN * INPUTS + HIDDEN]));
    line("w_out", fmt_list(&params[HIDDEN * INPUTS + HIDDEN..PARAM_COUNT - 1]));
    line("b_out", fmt_f64(params[PARAM_COUNT - 1]));
    out
}

fn digest(payload: &str) -> String {
    hex::encode(Sha256::digest(payload.as_bytes()))
}

/// Model file text: payload lines followed by `checksum <sha256 of payload>`.
pub fn to_text(model: &MlpModel) -> String {
    let body = payload(model);
    let sum = digest(&body);
    format!("{body}checksum {sum}\n")
}

/// SHA-256 of the payload, as written in the file's last line.
pub fn checksum(model: &MlpModel) -> String {
    digest(&payload(model))
}

pub fn save(model: &MlpModel, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, to_text(model)).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<MlpModel> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(from_text(&text)?)
}

fn corrupt(msg: impl Into<String>) -> ModelFileError {
    ModelFileError::Corrupt(msg.into())
}

pub fn from_text(text: &str) -> Result<MlpModel, ModelFileError> {
    let mut lines = text.split_inclusive('\n');
    let first = lines.next().ok_or_else(|| corrupt("empty file"))?;
    if first != format!("format {MAGIC}\n") {
        return Err(corrupt("not a model file"));
    }
    let version_line = lines.next().ok_or_else(|| corrupt("missing format_version"))?;
    let found: u32 = version_line
        .strip_prefix("format_version ")
        .and_then(|v| v.trim_end().parse().ok())
        .ok_or_else(|| corrupt("malformed format_version"))?;
    if found != FORMAT_VERSION {
        return Err(ModelFileError::Version {
            found,
            expected: FORMAT_VERSION,
        });
    }

    let checksum_at = text
        .rfind("checksum ")
        .filter(|&i| i == 0 || text.as_bytes()[i - 1] == b'\n')
        .ok_or_else(|| corrupt("missing checksum line"))?;
    let (body, tail) = text.split_at(checksum_at);
    let stored = tail
        .strip_prefix("checksum ")
        .and_then(|s| s.strip_suffix('\n'))
        .filter(|s| s.len() == 64 && s.bytes().all(|b| b.is_ascii_hexdigit()))
        .ok_or_else(|| corrupt("truncated or malformed checksum line"))?;
    let computed = digest(body);
    if stored != computed {
        return Err(ModelFileError::Checksum {
            stored: stored.to_string(),
            computed,
        });
    }

    let mut fields = body.lines().skip(2).map(|l| l.split_once(' ').unwrap_or((l, "")));
    let mut next = |key: &str| -> Result<&str, ModelFileError> {
        match fields.next() {
            Some((k, v)) if k == key => Ok(v),
            Some((k, _)) => Err(corrupt(format!("expected field `{key}`, found `{k}`"))),
            None => Err(corrupt(format!("missing field `{key}`"))),
        }
    };
    let float = |v: &str| v.parse::<f64>().map_err(|_| corrupt(format!("bad number `{v}`")));
    let floats = |v: &str, n: usize| -> Result<Vec<f64>, ModelFileError> {
        let vals = v.split(' ').map(float).collect::<Result<Vec<_>, _>>()?;
        if vals.len() != n {
            return Err(corrupt(format!("expected {n} values, found {}", vals.len())));
        }
        Ok(vals)
    };
    let timestamp = |v: &str| -> Result<Option<NaiveDateTime>, ModelFileError> {
        if v == "NA" {
            return Ok(None);
        }
        NaiveDateTime::parse_from_str(v, TIMESTAMP_FORMAT)
            .map(Some)
            .map_err(|_| corrupt(format!("bad timestamp `{v}`")))
    };

    if next("architecture")? != format!("{INPUTS} {HIDDEN} 1") {
        return Err(corrupt("unsupported architecture"));
    }
    if next("hidden_activation")? != "tanh" {
        return Err(corrupt("unsupported hidden activation"));
    }
    if next("output_activation")? != "linear" {
        return Err(corrupt("unsupported output activation"));
    }
    let cadence: Cadence = next("cadence")?.parse().map_err(|_| corrupt("bad cadence"))?;
    let stationarization: Stationarization = next("stationarization")?
        .parse()
        .map_err(|_| corrupt("bad stationarization"))?;
    let elevation_cutoff = float(next("elevation_cutoff_rad")?)?;
    let train_station = next("train_station")?.to_string();
    let train_start = timestamp(next("train_start")?)?;
    let train_end = timestamp(next("train_end")?)?;
    let seed: u64 = next("seed")?.parse().map_err(|_| corrupt("bad seed"))?;
    let norm_source = next("norm_source_station")?.to_string();
    let k_min = float(next("norm_k_min")?)?;
    let k_max = float(next("norm_k_max")?)?;
    let mut params = floats(next("w_hidden")?, HIDDEN * INPUTS)?;
    params.extend(floats(next("b_hidden")?, HIDDEN)?);
    params.extend(floats(next("w_out")?, HIDDEN)?);
    params.push(float(next("b_out")?)?);
    if fields.next().is_some() {
        return Err(corrupt("unexpected trailing fields"));
    }

    let params: [f64; PARAM_COUNT] = params.try_into().expect("length checked per field");
    let network = Network::from_params(&params);
    if !network.is_finite() {
        return Err(corrupt("non-finite weights"));
    }
    let norm = NormParams::new(k_min, k_max, norm_source).map_err(|e| corrupt(e.to_string()))?;
    if stationarization.cadence() != cadence {
        return Err(corrupt("stationarization does not match cadence"));
    }
    let train_span = match (train_start, train_end) {
        (Some(a), Some(b)) => Some((a, b)),
        (None, None) => None,
        _ => return Err(corrupt("train_start and train_end must both be set or both be NA")),
    };
    Ok(MlpModel {
        network,
        hidden_activation: Activation::Tanh,
        output_activation: Activation::Linear,
        norm,
        stationarization,
        elevation_cutoff,
        cadence,
        train_station,
        seed,
        train_span,
    })
}
