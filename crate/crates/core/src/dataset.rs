//! Irradiation series: CSV ingestion with gap materialization and
//! quality control, canonical CSV emission, and a seeded synthetic
//! station generator.
//!
//! CSV schema: header `timestamp,ghi_wh_m2`, one row per cadence slot,
//! timestamps in ISO-8601 local standard time without zone suffix, values
//! in Wh/m² as a non-negative decimal or `NA`. Hourly rows label the hour
//! that starts at the timestamp; daily rows are dates.

use std::fmt;
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::solar_geometry::{SolarGeometry, StationMeta};

pub const CSV_HEADER: &str = "timestamp,ghi_wh_m2";

/// Measured values above this multiple of the extraterrestrial ceiling are
/// rejected at ingest.
pub const QC_CEILING_FACTOR: f64 = 1.2;

const HOURLY_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";
const DAILY_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cadence {
    Hourly,
    Daily,
}

impl Cadence {
    pub fn step(self) -> Duration {
        match self {
            Cadence::Hourly => Duration::hours(1),
            Cadence::Daily => Duration::days(1),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Cadence::Hourly => "hourly",
            Cadence::Daily => "daily",
        }
    }

    pub fn format_timestamp(self, ts: NaiveDateTime) -> String {
        match self {
            Cadence::Hourly => ts.format(HOURLY_FORMAT).to_string(),
            Cadence::Daily => ts.date().format(DAILY_FORMAT).to_string(),
        }
    }

    pub fn is_on_grid(self, ts: NaiveDateTime) -> bool {
        match self {
            Cadence::Hourly => ts.minute() == 0 && ts.second() == 0 && ts.nanosecond() == 0,
            Cadence::Daily => ts.time() == NaiveTime::MIN,
        }
    }

    /// Parses a timestamp and checks that it sits on this cadence's grid.
    pub fn parse_timestamp(self, text: &str) -> std::result::Result<NaiveDateTime, String> {
        let ts = if let Ok(d) = NaiveDate::parse_from_str(text, DAILY_FORMAT) {
            if self == Cadence::Hourly {
                return Err(format!("hourly series needs a time of day, got `{text}`"));
            }
            d.and_time(NaiveTime::MIN)
        } else {
            NaiveDateTime::parse_from_str(text, HOURLY_FORMAT)
                .or_else(|_| NaiveDateTime::parse_from_str(text, "%Y-%m-%dT%H:%M"))
                .map_err(|_| format!("invalid timestamp `{text}`"))?
        };
        if !self.is_on_grid(ts) {
            return Err(format!("timestamp `{text}` is not on the {} grid", self));
        }
        Ok(ts)
    }
}

impl fmt::Display for Cadence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Cadence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hourly" => Ok(Cadence::Hourly),
            "daily" => Ok(Cadence::Daily),
            other => Err(Error::input(format!("unknown cadence `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quality {
    Measured,
    Missing,
}

/// One cadence slot. `value` is `None` when the slot is missing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub timestamp: NaiveDateTime,
    pub value: Option<f64>,
}

impl Observation {
    pub fn quality(&self) -> Quality {
        if self.value.is_some() {
            Quality::Measured
        } else {
            Quality::Missing
        }
    }
}

/// Uniformly spaced global horizontal irradiation, Wh/m².
#[derive(Debug, Clone, PartialEq)]
pub struct IrradiationSeries {
    station: StationMeta,
    cadence: Cadence,
    points: Vec<Observation>,
}

impl IrradiationSeries {
    /// Validates spacing and value range; does not apply quality control.
    pub fn new(station: StationMeta, cadence: Cadence, points: Vec<Observation>) -> Result<Self> {
        for (i, pair) in points.windows(2).enumerate() {
            if pair[1].timestamp - pair[0].timestamp != cadence.step() {
                return Err(Error::Schema {
                    line: i + 2,
                    message: format!(
                        "points {} and {} are not one {} step apart",
                        pair[0].timestamp, pair[1].timestamp, cadence
                    ),
                });
            }
        }
        for p in &points {
            if let Some(v) = p.value {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::input(format!("invalid value {v} at {}", p.timestamp)));
                }
            }
            if !cadence.is_on_grid(p.timestamp) {
                return Err(Error::input(format!(
                    "{} is not on the {cadence} grid",
                    p.timestamp
                )));
            }
        }
        Ok(Self {
            station,
            cadence,
            points,
        })
    }

    pub fn station(&self) -> &StationMeta {
        &self.station
    }

    pub fn cadence(&self) -> Cadence {
        self.cadence
    }

    pub fn points(&self) -> &[Observation] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn measured_count(&self) -> usize {
        self.points.iter().filter(|p| p.value.is_some()).count()
    }

    /// First and last timestamps, if any.
    pub fn span(&self) -> Option<(NaiveDateTime, NaiveDateTime)> {
        Some((self.points.first()?.timestamp, self.points.last()?.timestamp))
    }

    /// True when the two series cover overlapping time ranges.
    pub fn overlaps(&self, other: &IrradiationSeries) -> bool {
        match (self.span(), other.span()) {
            (Some((a0, a1)), Some((b0, b1))) => a0 <= b1 && b0 <= a1,
            _ => false,
        }
    }

    pub fn index_of(&self, ts: NaiveDateTime) -> Option<usize> {
        let first = self.points.first()?.timestamp;
        let offset = ts - first;
        let step = self.cadence.step().num_seconds();
        let secs = offset.num_seconds();
        if secs < 0 || secs % step != 0 {
            return None;
        }
        let idx = usize::try_from(secs / step).ok()?;
        (idx < self.points.len()).then_some(idx)
    }

    /// Points whose timestamp falls within `[start, end]`.
    pub fn between(&self, start: NaiveDateTime, end: NaiveDateTime) -> IrradiationSeries {
        let points = self
            .points
            .iter()
            .filter(|p| p.timestamp >= start && p.timestamp <= end)
            .copied()
            .collect();
        Self {
            station: self.station.clone(),
            cadence: self.cadence,
            points,
        }
    }

    /// Canonical CSV text (header, LF line endings, shortest round-trip decimals).
    pub fn to_csv_string(&self) -> String {
        let mut out = String::with_capacity(24 * (self.points.len() + 1));
        out.push_str(CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            out.push_str(&self.cadence.format_timestamp(p.timestamp));
            out.push(',');
            match p.value {
                Some(v) => out.push_str(&v.to_string()),
                None => out.push_str("NA"),
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }
}

/// Extraterrestrial ceiling for the slot starting at `ts`, Wh/m².
pub fn extraterrestrial_ceiling(
    geometry: &SolarGeometry,
    station: &StationMeta,
    cadence: Cadence,
    ts: NaiveDateTime,
) -> f64 {
    match cadence {
        Cadence::Hourly => geometry.extraterrestrial_hour(station, ts),
        Cadence::Daily => geometry
            .extraterrestrial_daily(station, ts.ordinal())
            .expect("ordinal is a valid day of year"),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IngestReport {
    pub rows_read: usize,
    pub rows_accepted: usize,
    pub gaps_inserted: usize,
    pub qc_violations: usize,
}

impl fmt::Display for IngestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rows_read      {}", self.rows_read)?;
        writeln!(f, "rows_accepted  {}", self.rows_accepted)?;
        writeln!(f, "gaps_inserted  {}", self.gaps_inserted)?;
        write!(f, "qc_violations  {}", self.qc_violations)
    }
}

pub fn load_csv(
    path: impl AsRef<Path>,
    station: StationMeta,
    cadence: Cadence,
    geometry: &SolarGeometry,
) -> Result<(IrradiationSeries, IngestReport)> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, station, cadence, geometry).map_err(|e| match e {
        Error::Io { source, .. } => Error::io(path, source),
        other => other,
    })
}

/// Parses CSV rows, materializes missing slots and flags values above the
/// quality-control ceiling as missing.
pub fn read_csv(
    reader: impl Read,
    station: StationMeta,
    cadence: Cadence,
    geometry: &SolarGeometry,
) -> Result<(IrradiationSeries, IngestReport)> {
    let mut report = IngestReport::default();
    let mut points: Vec<Observation> = Vec::new();
    let mut lines = BufReader::new(reader).lines();

    let header = lines
        .next()
        .transpose()
        .map_err(|e| Error::io("<input>", e))?
        .ok_or(Error::Parse {
            line: 1,
            message: "empty file".into(),
        })?;
    if header.trim_end_matches('\r') != CSV_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header `{CSV_HEADER}`, got `{header}`"),
        });
    }

    let mut pending_blank: Option<usize> = None;
    for (idx, line) in lines.enumerate() {
        let line_no = idx + 2;
        let line = line.map_err(|e| Error::io("<input>", e))?;
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            pending_blank.get_or_insert(line_no);
            continue;
        }
        if let Some(blank) = pending_blank {
            return Err(Error::Parse {
                line: blank,
                message: "blank line inside data".into(),
            });
        }
        report.rows_read += 1;

        let (ts_text, value_text) = line.split_once(',').ok_or_else(|| Error::Parse {
            line: line_no,
            message: "expected two comma-separated fields".into(),
        })?;
        if value_text.contains(',') {
            return Err(Error::Parse {
                line: line_no,
                message: "too many fields".into(),
            });
        }
        let ts = cadence.parse_timestamp(ts_text).map_err(|message| Error::Parse {
            line: line_no,
            message,
        })?;
        let value = parse_value(value_text).map_err(|message| Error::Parse {
            line: line_no,
            message,
        })?;

        if let Some(last) = points.last() {
            let gap = ts - last.timestamp;
            if gap.is_zero() {
                return Err(Error::Schema {
                    line: line_no,
                    message: format!("duplicate timestamp {ts_text}"),
                });
            }
            if gap < Duration::zero() {
                return Err(Error::Schema {
                    line: line_no,
                    message: format!("timestamp {ts_text} is earlier than the previous row"),
                });
            }
            let step = cadence.step();
            let mut t = last.timestamp + step;
            while t < ts {
                points.push(Observation {
                    timestamp: t,
                    value: None,
                });
                report.gaps_inserted += 1;
                t += step;
            }
        }

        let value = value.filter(|&v| {
            let ceiling = extraterrestrial_ceiling(geometry, &station, cadence, ts);
            let ok = v <= QC_CEILING_FACTOR * ceiling;
            if !ok {
                log::debug!("line {line_no}: {v} exceeds QC ceiling {ceiling}");
                report.qc_violations += 1;
            }
            ok
        });
        points.push(Observation {
            timestamp: ts,
            value,
        });
    }
    report.rows_accepted = report.rows_read - report.qc_violations;

    let series = IrradiationSeries::new(station, cadence, points)?;
    Ok((series, report))
}

fn parse_value(text: &str) -> std::result::Result<Option<f64>, String> {
    if text == "NA" {
        return Ok(None);
    }
    let v: f64 = text
        .parse()
        .map_err(|_| format!("invalid value `{text}`"))?;
    if !v.is_finite() || v < 0.0 || text.starts_with('-') {
        return Err(format!("value `{text}` must be a non-negative decimal or NA"));
    }
    Ok(Some(v))
}

/// Inclusive range of calendar days.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DateSpan {
    pub first: NaiveDate,
    pub last: NaiveDate,
}

impl DateSpan {
    pub fn new(first: NaiveDate, last: NaiveDate) -> Result<Self> {
        if last < first {
            return Err(Error::input(format!("span ends ({last}) before it starts ({first})")));
        }
        Ok(Self { first, last })
    }

    /// Whole calendar years `first_year..=last_year`.
    pub fn years(first_year: i32, last_year: i32) -> Result<Self> {
        let first = NaiveDate::from_ymd_opt(first_year, 1, 1)
            .ok_or_else(|| Error::input(format!("invalid year {first_year}")))?;
        let last = NaiveDate::from_ymd_opt(last_year, 12, 31)
            .ok_or_else(|| Error::input(format!("invalid year {last_year}")))?;
        Self::new(first, last)
    }

    fn timestamps(&self, cadence: Cadence) -> impl Iterator<Item = NaiveDateTime> {
        let start = self.first.and_time(NaiveTime::MIN);
        let end = self.last.and_time(NaiveTime::MIN) + Duration::days(1);
        let step = cadence.step();
        std::iter::successors(Some(start), move |t| Some(*t + step)).take_while(move |t| *t < end)
    }
}

/// Clearness index bounds of the synthetic generator.
pub const SYNTH_CLEARNESS_MIN: f64 = 0.05;
pub const SYNTH_CLEARNESS_MAX: f64 = 1.0;

/// Synthetic spans may not start before 1 January of this year.
pub const SYNTH_EPOCH_YEAR: i32 = 1900;

/// Clearness-index process of a synthetic station.
///
/// `k(t) = clamp(mean_clearness + a(t) + station_noise_sd·η(t), 0.05, 1)`
/// where `a(t) = persistence·a(t−1) + innovation_sd·ε(t)` is the regional
/// anomaly driven by the seed passed to [`synthesize_station`], and `η` is
/// white noise drawn from `station_seed`. Both processes run on a calendar
/// clock starting at [`SYNTH_EPOCH_YEAR`], so stations synthesized with the
/// same seed share the regional anomaly at equal timestamps, and spans of one
/// station agree where they overlap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthesisParams {
    pub mean_clearness: f64,
    pub persistence: f64,
    pub innovation_sd: f64,
    pub station_noise_sd: f64,
    pub station_seed: u64,
}

impl Default for SynthesisParams {
    fn default() -> Self {
        Self {
            mean_clearness: 0.6,
            persistence: 0.8,
            innovation_sd: 0.1,
            station_noise_sd: 0.05,
            station_seed: 1,
        }
    }
}

impl SynthesisParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.persistence.abs() < 1.0) {
            return Err(Error::input(format!(
                "AR persistence {} must satisfy |rho| < 1",
                self.persistence
            )));
        }
        if !(self.innovation_sd >= 0.0 && self.innovation_sd.is_finite()) {
            return Err(Error::input("innovation sd must be finite and >= 0"));
        }
        if !(self.station_noise_sd >= 0.0 && self.station_noise_sd.is_finite()) {
            return Err(Error::input("station noise sd must be finite and >= 0"));
        }
        if !(SYNTH_CLEARNESS_MIN..=SYNTH_CLEARNESS_MAX).contains(&self.mean_clearness) {
            return Err(Error::input(format!(
                "mean clearness {} outside [{SYNTH_CLEARNESS_MIN}, {SYNTH_CLEARNESS_MAX}]",
                self.mean_clearness
            )));
        }
        Ok(())
    }
}

/// Deterministic synthetic series `I(t) = ceiling(t)·k(t)`.
pub fn synthesize_station(
    seed: u64,
    station: &StationMeta,
    cadence: Cadence,
    span: DateSpan,
    params: &SynthesisParams,
    geometry: &SolarGeometry,
) -> Result<IrradiationSeries> {
    params.validate()?;
    let epoch = DateSpan {
        first: NaiveDate::from_ymd_opt(SYNTH_EPOCH_YEAR, 1, 1).expect("valid epoch"),
        last: span.last,
    };
    if span.first < epoch.first {
        return Err(Error::input(format!(
            "synthetic spans start on or after {SYNTH_EPOCH_YEAR}-01-01"
        )));
    }
    let mut regional = ChaCha8Rng::seed_from_u64(seed);
    let mut local = ChaCha8Rng::seed_from_u64(params.station_seed);
    local.set_stream(1);

    let rho = params.persistence;
    let stationary_sd = params.innovation_sd / (1.0 - rho * rho).sqrt();
    let mut anomaly = stationary_sd * regional.sample::<f64, _>(StandardNormal);
    let start = span.first.and_time(NaiveTime::MIN);

    let mut points = Vec::new();
    for (i, ts) in epoch.timestamps(cadence).enumerate() {
        if i > 0 {
            let eps: f64 = regional.sample(StandardNormal);
            anomaly = rho * anomaly + params.innovation_sd * eps;
        }
        let eta: f64 = local.sample(StandardNormal);
        if ts < start {
            continue;
        }
        let k = (params.mean_clearness + anomaly + params.station_noise_sd * eta)
            .clamp(SYNTH_CLEARNESS_MIN, SYNTH_CLEARNESS_MAX);
        let ceiling = extraterrestrial_ceiling(geometry, station, cadence, ts);
        points.push(Observation {
            timestamp: ts,
            value: Some(ceiling * k),
        });
    }
    IrradiationSeries::new(station.clone(), cadence, points)
}
