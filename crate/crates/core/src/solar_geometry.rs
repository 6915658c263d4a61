//! Low-cost solar geometry: declination (Cooper), orbital eccentricity
//! correction, equation of time (Spencer), solar elevation and
//! extraterrestrial horizontal irradiation at hourly and daily cadence.
//!
//! Clock timestamps are local standard time at the station's fixed UTC
//! offset. No daylight-saving handling and no refraction correction.

use std::f64::consts::{PI, TAU};

use chrono::{Datelike, Duration, NaiveDateTime, Timelike};

use crate::error::{Error, Result};

/// Solar constant in W/m².
pub const SOLAR_CONSTANT: f64 = 1367.0;

/// Geographic identity of a measurement site.
#[derive(Debug, Clone, PartialEq)]
pub struct StationMeta {
    name: String,
    latitude: f64,
    longitude: f64,
    altitude: f64,
    utc_offset: f64,
}

impl StationMeta {
    /// Latitude and longitude in degrees (east positive), altitude in
    /// metres, UTC offset in hours.
    pub fn new(
        name: impl Into<String>,
        latitude: f64,
        longitude: f64,
        altitude: f64,
        utc_offset: f64,
    ) -> Result<Self> {
        let name = name.into();
        if name.trim().is_empty() || name.contains(['\n', '\r']) {
            return Err(Error::input("station name must be a non-empty single line"));
        }
        if !(-90.0..=90.0).contains(&latitude) {
            return Err(Error::input(format!("latitude {latitude} outside [-90, 90]")));
        }
        if !(-180.0..=180.0).contains(&longitude) {
            return Err(Error::input(format!("longitude {longitude} outside [-180, 180]")));
        }
        if !(altitude >= 0.0 && altitude.is_finite()) {
            return Err(Error::input(format!("altitude {altitude} must be >= 0")));
        }
        if !(-12.0..=14.0).contains(&utc_offset) {
            return Err(Error::input(format!("utc offset {utc_offset} outside [-12, 14]")));
        }
        Ok(Self {
            name,
            latitude,
            longitude,
            altitude,
            utc_offset,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Degrees, north positive.
    pub fn latitude(&self) -> f64 {
        self.latitude
    }

    /// Degrees, east positive.
    pub fn longitude(&self) -> f64 {
        self.longitude
    }

    /// Metres above sea level.
    pub fn altitude(&self) -> f64 {
        self.altitude
    }

    /// Hours ahead of UTC of the clock the timestamps are written in.
    pub fn utc_offset(&self) -> f64 {
        self.utc_offset
    }

    pub fn latitude_rad(&self) -> f64 {
        self.latitude.to_radians()
    }
}

/// Sun position relative to a station at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolarPosition {
    /// Solar height above the horizon, radians; negative below.
    pub elevation: f64,
    pub declination: f64,
    /// Zero at true solar noon, positive in the afternoon.
    pub hour_angle: f64,
    pub eccentricity_factor: f64,
}

impl SolarPosition {
    pub fn sin_elevation(&self) -> f64 {
        self.elevation.sin()
    }
}

fn check_day(day_of_year: u32) -> Result<()> {
    if (1..=366).contains(&day_of_year) {
        Ok(())
    } else {
        Err(Error::input(format!("day of year {day_of_year} outside 1..=366")))
    }
}

// Reducing modulo 365 first makes n and n + 365 bit-identical.
fn annual_angle(offset: u32, day_of_year: u32) -> f64 {
    TAU * f64::from((offset + day_of_year) % 365) / 365.0
}

/// Solar declination in radians, Cooper's formula.
pub fn declination(day_of_year: u32) -> Result<f64> {
    check_day(day_of_year)?;
    Ok(23.45_f64.to_radians() * annual_angle(284, day_of_year).sin())
}

/// Ratio of the squared mean to the actual Earth–Sun distance.
pub fn eccentricity_factor(day_of_year: u32) -> Result<f64> {
    check_day(day_of_year)?;
    Ok(1.0 + 0.033 * annual_angle(0, day_of_year).cos())
}

/// Equation of time in minutes (Spencer's Fourier series).
pub fn equation_of_time(day_of_year: u32) -> Result<f64> {
    check_day(day_of_year)?;
    let b = TAU * f64::from(day_of_year - 1) / 365.0;
    Ok(229.18
        * (0.000075 + 0.001868 * b.cos()
            - 0.032077 * b.sin()
            - 0.014615 * (2.0 * b).cos()
            - 0.040890 * (2.0 * b).sin()))
}

/// True solar time, in hours, at a clock timestamp of the station.
pub fn true_solar_hours(station: &StationMeta, timestamp: NaiveDateTime) -> f64 {
    let clock = f64::from(timestamp.hour())
        + f64::from(timestamp.minute()) / 60.0
        + f64::from(timestamp.second()) / 3600.0;
    let day = timestamp.ordinal();
    // `ordinal` is always within 1..=366.
    let eot = equation_of_time(day).unwrap_or(0.0);
    let longitude_correction = 4.0 * (station.longitude - 15.0 * station.utc_offset);
    clock + (longitude_correction + eot) / 60.0
}

/// Sun position for a given day of year and true solar time in hours.
pub fn solar_position_at_solar_time(
    station: &StationMeta,
    day_of_year: u32,
    solar_hours: f64,
) -> Result<SolarPosition> {
    if !solar_hours.is_finite() {
        return Err(Error::input("solar time must be finite"));
    }
    let declination = declination(day_of_year)?;
    let eccentricity_factor = eccentricity_factor(day_of_year)?;
    let hour_angle = (15.0 * (solar_hours - 12.0)).to_radians();
    let sin_h = sin_elevation(station.latitude_rad(), declination, hour_angle);
    Ok(SolarPosition {
        elevation: sin_h.clamp(-1.0, 1.0).asin(),
        declination,
        hour_angle,
        eccentricity_factor,
    })
}

/// Sun position at a civil (local standard) timestamp.
pub fn solar_position(station: &StationMeta, timestamp: NaiveDateTime) -> SolarPosition {
    solar_position_at_solar_time(
        station,
        timestamp.ordinal(),
        true_solar_hours(station, timestamp),
    )
    .expect("ordinal is a valid day of year and solar time is finite")
}

/// `sin h = sin φ sin δ + cos φ cos δ cos ω`.
pub(crate) fn sin_elevation(latitude: f64, declination: f64, hour_angle: f64) -> f64 {
    latitude.sin() * declination.sin() + latitude.cos() * declination.cos() * hour_angle.cos()
}

/// Extraterrestrial irradiance model parameterized by the solar constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolarGeometry {
    pub solar_constant: f64,
}

impl Default for SolarGeometry {
    fn default() -> Self {
        Self {
            solar_constant: SOLAR_CONSTANT,
        }
    }
}

impl SolarGeometry {
    pub fn new(solar_constant: f64) -> Result<Self> {
        if !(solar_constant > 0.0 && solar_constant.is_finite()) {
            return Err(Error::input(format!(
                "solar constant {solar_constant} must be positive"
            )));
        }
        Ok(Self { solar_constant })
    }

    /// Extraterrestrial irradiance on a horizontal plane, W/m², zero when
    /// the sun is below the horizon.
    pub fn horizontal_irradiance(&self, position: &SolarPosition) -> f64 {
        let sin_h = position.sin_elevation();
        if sin_h <= 0.0 {
            0.0
        } else {
            self.solar_constant * position.eccentricity_factor * sin_h
        }
    }

    /// Extraterrestrial horizontal irradiation over `[start, end)`, Wh/m².
    /// The interval must be exactly one hour long.
    pub fn extraterrestrial_hourly(
        &self,
        station: &StationMeta,
        start: NaiveDateTime,
        end: NaiveDateTime,
    ) -> Result<f64> {
        if end - start != Duration::hours(1) {
            return Err(Error::input(format!(
                "extraterrestrial hourly needs a one-hour interval, got {start} .. {end}"
            )));
        }
        Ok(self.extraterrestrial_hour(station, start))
    }

    /// Extraterrestrial irradiation over the hour starting at `start`:
    /// the exact integral of the clamped horizontal irradiance over the
    /// hour, with declination and eccentricity fixed for the civil day.
    pub fn extraterrestrial_hour(&self, station: &StationMeta, start: NaiveDateTime) -> f64 {
        self.solar_hour_integral(station, start.ordinal(), true_solar_hours(station, start))
            .expect("ordinal is a valid day of year")
    }

    /// Same as [`Self::extraterrestrial_hour`] for an hour given in true
    /// solar time, `[solar_hour_start, solar_hour_start + 1)`.
    pub fn extraterrestrial_solar_hour(
        &self,
        station: &StationMeta,
        day_of_year: u32,
        solar_hour_start: f64,
    ) -> Result<f64> {
        if !solar_hour_start.is_finite() {
            return Err(Error::input("solar time must be finite"));
        }
        self.solar_hour_integral(station, day_of_year, solar_hour_start)
    }

    fn solar_hour_integral(
        &self,
        station: &StationMeta,
        day_of_year: u32,
        solar_hour_start: f64,
    ) -> Result<f64> {
        let declination = declination(day_of_year)?;
        let e0 = eccentricity_factor(day_of_year)?;
        let phi = station.latitude_rad();
        let a = phi.sin() * declination.sin();
        let b = phi.cos() * declination.cos();
        let sunset = sunset_hour_angle(phi, declination);

        let w1 = (15.0 * (solar_hour_start - 12.0)).to_radians();
        let w2 = w1 + PI / 12.0;
        // Daylight arcs repeat every 2π; an hour can touch at most two of them.
        let mut integral = 0.0;
        for m in -2..=2 {
            let centre = TAU * f64::from(m);
            let lo = w1.max(centre - sunset);
            let hi = w2.min(centre + sunset);
            if hi > lo {
                integral += a * (hi - lo) + b * ((hi - centre).sin() - (lo - centre).sin());
            }
        }
        // dt = (12/π)·dω hours.
        Ok((12.0 / PI * self.solar_constant * e0 * integral).max(0.0))
    }

    /// Daily extraterrestrial horizontal irradiation, Wh/m², from the exact
    /// sunrise-to-sunset integral.
    pub fn extraterrestrial_daily(&self, station: &StationMeta, day_of_year: u32) -> Result<f64> {
        let declination = declination(day_of_year)?;
        let e0 = eccentricity_factor(day_of_year)?;
        let phi = station.latitude_rad();
        let sunset = sunset_hour_angle(phi, declination);
        let h0 = (24.0 / PI)
            * self.solar_constant
            * e0
            * (phi.cos() * declination.cos() * sunset.sin()
                + sunset * phi.sin() * declination.sin());
        Ok(h0.max(0.0))
    }
}

/// Sunset hour angle in `[0, π]`; 0 for polar night and π for polar day.
pub fn sunset_hour_angle(latitude: f64, declination: f64) -> f64 {
    (-latitude.tan() * declination.tan()).clamp(-1.0, 1.0).acos()
}

pub fn hour_midpoint(start: NaiveDateTime) -> NaiveDateTime {
    start + Duration::minutes(30)
}
