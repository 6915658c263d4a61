//! From forecast horizontal irradiation to PV energy on a tilted plant:
//! Hottel clear-sky beam with a Liu–Jordan diffuse companion, an isotropic
//! sky plus ground-reflection transposition, and constant-efficiency
//! conversion.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use chrono::NaiveDateTime;

use crate::dataset::Cadence;
use crate::error::{Error, Result};
use crate::forecast::{ForecastPoint, ForecastSeries};
use crate::solar_geometry::{hour_midpoint, solar_position, SolarGeometry, SolarPosition, StationMeta};

pub const DEFAULT_EFFICIENCY: f64 = 0.13;
pub const DEFAULT_AREA_M2: f64 = 10.125;
pub const DEFAULT_TILT_DEG: f64 = 80.0;
pub const DEFAULT_AZIMUTH_DEG: f64 = 0.0;
pub const DEFAULT_ALBEDO: f64 = 0.2;
pub const DEFAULT_RATIO_CAP: f64 = 5.0;

/// A fixed plane of modules at a station.
#[derive(Debug, Clone, PartialEq)]
pub struct PvPlant {
    efficiency: f64,
    area: f64,
    tilt: f64,
    azimuth: f64,
    station: StationMeta,
}

impl PvPlant {
    /// `tilt` in degrees from horizontal; `azimuth` in degrees from south,
    /// positive toward west.
    pub fn new(station: StationMeta, efficiency: f64, area: f64, tilt: f64, azimuth: f64) -> Result<Self> {
        if !(efficiency > 0.0 && efficiency < 1.0) {
            return Err(Error::input(format!("efficiency {efficiency} outside (0, 1)")));
        }
        if !(area > 0.0 && area.is_finite()) {
            return Err(Error::input(format!("plant area {area} must be positive")));
        }
        if !(0.0..=90.0).contains(&tilt) {
            return Err(Error::input(format!("tilt {tilt} outside [0, 90] degrees")));
        }
        if !(-180.0..=180.0).contains(&azimuth) {
            return Err(Error::input(format!("azimuth {azimuth} outside [-180, 180] degrees")));
        }
        Ok(Self {
            efficiency,
            area,
            tilt,
            azimuth,
            station,
        })
    }

    /// 13 % efficiency, 10.125 m², 80° tilt, facing south.
    pub fn with_defaults(station: StationMeta) -> Self {
        Self {
            efficiency: DEFAULT_EFFICIENCY,
            area: DEFAULT_AREA_M2,
            tilt: DEFAULT_TILT_DEG,
            azimuth: DEFAULT_AZIMUTH_DEG,
            station,
        }
    }

    pub fn efficiency(&self) -> f64 {
        self.efficiency
    }

    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn tilt(&self) -> f64 {
        self.tilt
    }

    pub fn azimuth(&self) -> f64 {
        self.azimuth
    }

    pub fn station(&self) -> &StationMeta {
        &self.station
    }
}

/// Instantaneous clear-sky irradiance components on the horizontal, W/m².
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClearSkyComponents {
    /// Beam irradiance at normal incidence.
    pub beam_normal: f64,
    pub beam_horizontal: f64,
    pub diffuse_horizontal: f64,
}

impl ClearSkyComponents {
    pub fn global_horizontal(&self) -> f64 {
        self.beam_horizontal + self.diffuse_horizontal
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClearSkyModel {
    pub geometry: SolarGeometry,
    /// Ground reflectance for the reflected component.
    pub albedo: f64,
}

impl Default for ClearSkyModel {
    fn default() -> Self {
        Self {
            geometry: SolarGeometry::default(),
            albedo: DEFAULT_ALBEDO,
        }
    }
}

/// Hottel beam transmittance for the 23 km visibility standard atmosphere,
/// altitude in km.
pub fn hottel_beam_transmittance(sin_elevation: f64, altitude_km: f64) -> f64 {
    if sin_elevation <= 0.0 {
        return 0.0;
    }
    let a = altitude_km.clamp(0.0, 2.5);
    let a0 = 0.4237 - 0.00821 * (6.0 - a).powi(2);
    let a1 = 0.5055 + 0.00595 * (6.5 - a).powi(2);
    let k = 0.2711 + 0.01858 * (2.5 - a).powi(2);
    a0 + a1 * (-k / sin_elevation).exp()
}

/// Diffuse transmittance paired with a beam transmittance (Liu–Jordan).
pub fn liu_jordan_diffuse_transmittance(beam_transmittance: f64) -> f64 {
    (0.271 - 0.294 * beam_transmittance).max(0.0)
}

/// Unit vector toward the sun in (east, north, up) coordinates.
fn sun_vector(station: &StationMeta, pos: &SolarPosition) -> [f64; 3] {
    let phi = station.latitude_rad();
    let (d, w) = (pos.declination, pos.hour_angle);
    [
        -d.cos() * w.sin(),
        d.sin() * phi.cos() - d.cos() * w.cos() * phi.sin(),
        pos.sin_elevation(),
    ]
}

/// Unit normal of the plant's plane in (east, north, up) coordinates.
fn plane_normal(plant: &PvPlant) -> [f64; 3] {
    let (beta, gamma) = (plant.tilt.to_radians(), plant.azimuth.to_radians());
    [-beta.sin() * gamma.sin(), -beta.sin() * gamma.cos(), beta.cos()]
}

impl ClearSkyModel {
    pub fn new(geometry: SolarGeometry, albedo: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&albedo) {
            return Err(Error::input(format!("albedo {albedo} outside [0, 1]")));
        }
        Ok(Self { geometry, albedo })
    }

    pub fn components_at(&self, station: &StationMeta, pos: &SolarPosition) -> ClearSkyComponents {
        let sin_h = pos.sin_elevation();
        if sin_h <= 0.0 {
            return ClearSkyComponents {
                beam_normal: 0.0,
                beam_horizontal: 0.0,
                diffuse_horizontal: 0.0,
            };
        }
        let tau_b = hottel_beam_transmittance(sin_h, station.altitude() / 1000.0);
        let tau_d = liu_jordan_diffuse_transmittance(tau_b);
        let top = self.geometry.solar_constant * pos.eccentricity_factor;
        let beam_normal = top * tau_b;
        ClearSkyComponents {
            beam_normal,
            beam_horizontal: beam_normal * sin_h,
            diffuse_horizontal: top * tau_d * sin_h,
        }
    }

    /// Clear-sky global horizontal irradiance, W/m².
    pub fn clear_sky_horizontal(&self, station: &StationMeta, timestamp: NaiveDateTime) -> f64 {
        let pos = solar_position(station, timestamp);
        self.components_at(station, &pos).global_horizontal()
    }

    /// Clear-sky irradiance on the plant's plane, W/m².
    pub fn clear_sky_tilted(&self, timestamp: NaiveDateTime, plant: &PvPlant) -> f64 {
        let station = plant.station();
        let pos = solar_position(station, timestamp);
        let c = self.components_at(station, &pos);
        if c.global_horizontal() <= 0.0 {
            return 0.0;
        }
        let s = sun_vector(station, &pos);
        let n = plane_normal(plant);
        let cos_incidence = n[0] * s[0] + n[1] * s[1] + n[2] * s[2];
        let cos_beta = plant.tilt.to_radians().cos();
        c.beam_normal * cos_incidence.max(0.0)
            + c.diffuse_horizontal * (1.0 + cos_beta) / 2.0
            + self.albedo * c.global_horizontal() * (1.0 - cos_beta) / 2.0
    }

    /// Tilted over horizontal clear-sky irradiance at the midpoint of the
    /// hour starting at `hour_start`, capped at `cap`; 0 when the clear-sky
    /// horizontal irradiance vanishes.
    pub fn clear_sky_ratio(&self, hour_start: NaiveDateTime, plant: &PvPlant, cap: f64) -> f64 {
        let mid = hour_midpoint(hour_start);
        let horizontal = self.clear_sky_horizontal(plant.station(), mid);
        if horizontal <= 0.0 {
            return 0.0;
        }
        let ratio = self.clear_sky_tilted(mid, plant) / horizontal;
        if ratio > cap {
            log::debug!("clear-sky ratio {ratio:.3} at {hour_start} capped to {cap}");
            cap
        } else {
            ratio
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TranspositionOptions {
    pub clear_sky: ClearSkyModel,
    pub ratio_cap: f64,
}

impl Default for TranspositionOptions {
    fn default() -> Self {
        Self {
            clear_sky: ClearSkyModel::default(),
            ratio_cap: DEFAULT_RATIO_CAP,
        }
    }
}

/// Scales hourly horizontal forecasts (and their measurements) onto the
/// plant's plane with the clear-sky ratio.
pub fn transpose_forecast(
    horizontal: &ForecastSeries,
    plant: &PvPlant,
    options: &TranspositionOptions,
) -> Result<ForecastSeries> {
    if horizontal.cadence != Cadence::Hourly {
        return Err(Error::Mismatch(format!(
            "transposition needs an hourly series, got {}",
            horizontal.cadence
        )));
    }
    if !(options.ratio_cap > 0.0) {
        return Err(Error::input(format!("ratio cap {} must be positive", options.ratio_cap)));
    }
    let points = horizontal
        .points
        .iter()
        .map(|p| {
            let r = options.clear_sky.clear_sky_ratio(p.timestamp, plant, options.ratio_cap);
            ForecastPoint {
                timestamp: p.timestamp,
                predicted: p.predicted * r,
                measured: p.measured * r,
            }
        })
        .collect();
    Ok(ForecastSeries {
        points,
        ..horizontal.clone()
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyPoint {
    pub timestamp: NaiveDateTime,
    /// Forecast tilted irradiation, Wh/m².
    pub i_beta: f64,
    /// Forecast energy, Wh.
    pub energy: f64,
}

/// `E = η · I_β · S` per point.
pub fn pv_energy(tilted: &ForecastSeries, plant: &PvPlant) -> Vec<EnergyPoint> {
    tilted
        .points
        .iter()
        .map(|p| EnergyPoint {
            timestamp: p.timestamp,
            i_beta: p.predicted,
            energy: energy_wh(p.predicted, plant),
        })
        .collect()
}

pub fn energy_wh(i_beta: f64, plant: &PvPlant) -> f64 {
    plant.efficiency * i_beta * plant.area
}

pub const PV_CSV_HEADER: &str = "timestamp,i_beta_wh_m2,e_pv_wh";

/// PV output table; the `measured_e_pv_wh` column is added when a
/// measured log is given, empty where the log has no entry.
pub fn pv_to_csv(energy: &[EnergyPoint], measured: Option<&BTreeMap<NaiveDateTime, f64>>) -> String {
    let mut out = String::from(PV_CSV_HEADER);
    if measured.is_some() {
        out.push_str(",measured_e_pv_wh");
    }
    out.push('\n');
    for p in energy {
        let _ = write!(
            out,
            "{},{},{}",
            Cadence::Hourly.format_timestamp(p.timestamp),
            p.i_beta,
            p.energy
        );
        if let Some(log) = measured {
            out.push(',');
            if let Some(v) = log.get(&p.timestamp) {
                let _ = write!(out, "{v}");
            }
        }
        out.push('\n');
    }
    out
}
