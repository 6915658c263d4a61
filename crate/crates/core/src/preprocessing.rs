//! Multiplicative stationarization by the extraterrestrial ceiling and
//! min-max normalization against training-site extrema.

use std::fmt;
use std::str::FromStr;

use chrono::NaiveDateTime;

use crate::dataset::{extraterrestrial_ceiling, Cadence, IrradiationSeries, Observation};
use crate::error::{Error, Result};
use crate::solar_geometry::{hour_midpoint, solar_position, SolarGeometry, StationMeta};

pub const DEFAULT_ELEVATION_CUTOFF_DEG: f64 = 5.0;

/// Stationarized values above this are treated as corrupt and dropped.
pub const MAX_CLEARNESS: f64 = 1.3;

/// Which extraterrestrial coefficient a series was divided by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stationarization {
    DailyExtraterrestrial,
    /// Hourly extraterrestrial horizontal irradiation, i.e. `Gsc·E0·sin h`
    /// over the hour: the annual and diurnal components removed jointly.
    HourlyExtraterrestrial,
}

impl Stationarization {
    pub fn for_cadence(cadence: Cadence) -> Self {
        match cadence {
            Cadence::Daily => Stationarization::DailyExtraterrestrial,
            Cadence::Hourly => Stationarization::HourlyExtraterrestrial,
        }
    }

    pub fn cadence(self) -> Cadence {
        match self {
            Stationarization::DailyExtraterrestrial => Cadence::Daily,
            Stationarization::HourlyExtraterrestrial => Cadence::Hourly,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stationarization::DailyExtraterrestrial => "daily_extraterrestrial",
            Stationarization::HourlyExtraterrestrial => "hourly_extraterrestrial",
        }
    }
}

impl fmt::Display for Stationarization {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Stationarization {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "daily_extraterrestrial" => Ok(Stationarization::DailyExtraterrestrial),
            "hourly_extraterrestrial" => Ok(Stationarization::HourlyExtraterrestrial),
            other => Err(Error::input(format!("unknown stationarization `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClearnessPoint {
    pub timestamp: NaiveDateTime,
    /// `None` for missing inputs and points below the elevation cutoff.
    pub k: Option<f64>,
}

/// Clearness-index series produced by [`Preprocessor::stationarize`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClearnessSeries {
    pub station: StationMeta,
    pub cadence: Cadence,
    pub points: Vec<ClearnessPoint>,
    pub stationarization: Stationarization,
    /// Radians; only meaningful for hourly series.
    pub elevation_cutoff: f64,
}

impl ClearnessSeries {
    pub fn measured(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().filter_map(|p| p.k)
    }
}

/// Stationarization settings shared by training and forecasting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preprocessor {
    pub geometry: SolarGeometry,
    /// Hourly points whose mid-hour solar elevation is below this (radians)
    /// are excluded.
    pub elevation_cutoff: f64,
}

impl Default for Preprocessor {
    fn default() -> Self {
        Self {
            geometry: SolarGeometry::default(),
            elevation_cutoff: DEFAULT_ELEVATION_CUTOFF_DEG.to_radians(),
        }
    }
}

impl Preprocessor {
    pub fn new(geometry: SolarGeometry, elevation_cutoff: f64) -> Result<Self> {
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&elevation_cutoff) {
            return Err(Error::input(format!(
                "elevation cutoff {elevation_cutoff} rad outside [0, π/2)"
            )));
        }
        Ok(Self {
            geometry,
            elevation_cutoff,
        })
    }

    /// True when the hour starting at `ts` has its midpoint at or above the
    /// elevation cutoff. Daily slots are always usable.
    pub fn is_daylight(&self, station: &StationMeta, cadence: Cadence, ts: NaiveDateTime) -> bool {
        match cadence {
            Cadence::Daily => true,
            Cadence::Hourly => {
                solar_position(station, hour_midpoint(ts)).elevation >= self.elevation_cutoff
            }
        }
    }

    pub fn ceiling(&self, station: &StationMeta, cadence: Cadence, ts: NaiveDateTime) -> f64 {
        extraterrestrial_ceiling(&self.geometry, station, cadence, ts)
    }

    pub fn stationarize(&self, series: &IrradiationSeries) -> Result<ClearnessSeries> {
        let station = series.station();
        let cadence = series.cadence();
        let mut points = Vec::with_capacity(series.len());
        for obs in series.points() {
            let k = match obs.value {
                Some(value) if self.is_daylight(station, cadence, obs.timestamp) => {
                    let ceiling = self.ceiling(station, cadence, obs.timestamp);
                    if ceiling > 0.0 {
                        let k = value / ceiling;
                        if k <= MAX_CLEARNESS {
                            Some(k)
                        } else {
                            log::warn!("{}: clearness {k:.3} above {MAX_CLEARNESS}, dropped", obs.timestamp);
                            None
                        }
                    } else if cadence == Cadence::Hourly {
                        return Err(Error::Internal(format!(
                            "zero extraterrestrial ceiling above the elevation cutoff at {}",
                            obs.timestamp
                        )));
                    } else {
                        // Polar night: ratio undefined.
                        None
                    }
                }
                _ => None,
            };
            points.push(ClearnessPoint {
                timestamp: obs.timestamp,
                k,
            });
        }
        Ok(ClearnessSeries {
            station: station.clone(),
            cadence,
            points,
            stationarization: Stationarization::for_cadence(cadence),
            elevation_cutoff: self.elevation_cutoff,
        })
    }

    /// Multiplies clearness back by `station`'s ceiling.
    pub fn destationarize(
        &self,
        k_series: &ClearnessSeries,
        station: &StationMeta,
    ) -> Result<IrradiationSeries> {
        self.check_compatible(k_series)?;
        let points = k_series
            .points
            .iter()
            .map(|p| Observation {
                timestamp: p.timestamp,
                value: p
                    .k
                    .map(|k| k * self.ceiling(station, k_series.cadence, p.timestamp)),
            })
            .collect();
        IrradiationSeries::new(station.clone(), k_series.cadence, points)
    }

    pub fn check_compatible(&self, k_series: &ClearnessSeries) -> Result<()> {
        if k_series.stationarization != Stationarization::for_cadence(k_series.cadence) {
            return Err(Error::Mismatch(format!(
                "{} series tagged {}",
                k_series.cadence, k_series.stationarization
            )));
        }
        if k_series.cadence == Cadence::Hourly && k_series.elevation_cutoff != self.elevation_cutoff {
            return Err(Error::Mismatch(format!(
                "elevation cutoff {} rad differs from {} rad",
                k_series.elevation_cutoff, self.elevation_cutoff
            )));
        }
        Ok(())
    }
}

/// Training-site clearness extrema used for min-max scaling to [−1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct NormParams {
    pub k_min: f64,
    pub k_max: f64,
    pub source_station: String,
}

impl NormParams {
    pub fn new(k_min: f64, k_max: f64, source_station: impl Into<String>) -> Result<Self> {
        if !(k_min.is_finite() && k_max.is_finite() && k_min < k_max) {
            return Err(Error::Fit(format!("need k_min < k_max, got {k_min} and {k_max}")));
        }
        Ok(Self {
            k_min,
            k_max,
            source_station: source_station.into(),
        })
    }

    /// Maps `[k_min, k_max]` onto `[−1, 1]`. Values outside the training
    /// range are extrapolated, not clamped.
    pub fn normalize(&self, k: f64) -> f64 {
        2.0 * (k - self.k_min) / (self.k_max - self.k_min) - 1.0
    }

    pub fn denormalize(&self, x: f64) -> f64 {
        (x + 1.0) * 0.5 * (self.k_max - self.k_min) + self.k_min
    }

    /// Operational bound on a denormalized prediction.
    pub fn clamp_output(&self, k: f64) -> f64 {
        k.clamp(0.0, self.k_max)
    }
}

/// Observed extrema of the measured clearness values.
pub fn fit_norm(k_series: &ClearnessSeries) -> Result<NormParams> {
    let (lo, hi) = k_series
        .measured()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), k| (lo.min(k), hi.max(k)));
    if !(lo < hi) {
        return Err(Error::Fit(format!(
            "{} needs at least two distinct measured clearness values",
            k_series.station.name()
        )));
    }
    NormParams::new(lo, hi, k_series.station.name())
}
