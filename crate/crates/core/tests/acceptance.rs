//! Acceptance suite. Each criterion runs at its stated tolerance and time
//! budget and prints one PASS/FAIL line; the process fails if any does.

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use chrono::{Duration as Span, NaiveDate};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use solarcast::dataset::{synthesize_station, Cadence, DateSpan, IrradiationSeries, Observation, SynthesisParams};
use solarcast::forecast::{
    run_abc_experiment, ExperimentConfig, ForecastPoint, ForecastSeries, Forecaster, Sample, SupervisedSet,
};
use solarcast::metrics::{
    correlation, lag_autocorrelation, nrmse, nrmse_ci95_seeded, rmse, NrmseDivisor, BOOTSTRAP_RESAMPLES,
};
use solarcast::mlp::{self, Network, TrainConfig, INPUTS, PARAM_COUNT};
use solarcast::pv::{energy_wh, pv_energy, transpose_forecast, PvPlant, TranspositionOptions};
use solarcast::preprocessing::{fit_norm, NormParams, Preprocessor, Stationarization};
use solarcast::solar_geometry::{declination, eccentricity_factor, SolarGeometry, StationMeta, SOLAR_CONSTANT};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rel_err(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

fn station(name: &str, lat: f64, lon: f64, alt: f64, utc: f64) -> StationMeta {
    StationMeta::new(name, lat, lon, alt, utc).expect("valid station")
}

fn solar_geometry_oracles() -> Outcome {
    let g = SolarGeometry::default();
    let d172 = declination(172).map_err(|e| e.to_string())?.to_degrees();
    let d355 = declination(355).map_err(|e| e.to_string())?.to_degrees();
    ensure((d172 - 23.45).abs() <= 0.2, || format!("δ(172) = {d172}"))?;
    ensure((d355 + 23.45).abs() <= 0.2, || format!("δ(355) = {d355}"))?;

    let equator = station("Equator", 0.0, 0.0, 0.0, 0.0);
    let h0 = g.extraterrestrial_daily(&equator, 80).map_err(|e| e.to_string())?;
    let closed = 24.0 / std::f64::consts::PI * SOLAR_CONSTANT * eccentricity_factor(80).unwrap();
    ensure(rel_err(h0, closed) < 0.01, || format!("equinox H0 {h0} vs {closed}"))?;

    for (lat, day) in [(80.0, 355), (-80.0, 172), (70.0, 1)] {
        let polar = station("Polar", lat, 0.0, 0.0, 0.0);
        let h = g.extraterrestrial_daily(&polar, day).map_err(|e| e.to_string())?;
        ensure(h == 0.0, || format!("polar night lat {lat} day {day}: H0 = {h}"))?;
    }

    let mut worst: f64 = 0.0;
    for lat in (-60..=60).step_by(5) {
        let site = station("Grid", lat as f64, 9.0, 0.0, 1.0);
        for day in (1..=365).step_by(7) {
            let daily = g.extraterrestrial_daily(&site, day).map_err(|e| e.to_string())?;
            let solar: f64 = (0..24)
                .map(|h| g.extraterrestrial_solar_hour(&site, day, h as f64).unwrap())
                .sum();
            let date = NaiveDate::from_yo_opt(2001, day).unwrap().and_hms_opt(0, 0, 0).unwrap();
            let clock: f64 = (0..24)
                .map(|h| g.extraterrestrial_hour(&site, date + Span::hours(h)))
                .sum();
            for sum in [solar, clock] {
                let e = rel_err(sum, daily);
                worst = worst.max(e);
                ensure(e < 0.02, || format!("lat {lat} day {day}: hourly sum {sum} vs daily {daily}"))?;
            }
        }
    }
    Ok(format!(
        "δ(172) = {d172:.3}°, δ(355) = {d355:.3}°, worst hourly/daily gap {:.2e}",
        worst
    ))
}

fn random_batch(rng: &mut ChaCha8Rng, n: usize) -> Vec<Sample> {
    let t0 = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
    (0..n)
        .map(|i| Sample {
            timestamp: t0 + Span::days(i as i64),
            inputs: std::array::from_fn(|_| rng.random_range(-1.5..1.5)),
            target: rng.random_range(-1.0..1.0),
        })
        .collect()
}

fn gradient_check() -> Outcome {
    const STEP: f64 = 1e-6;
    // Components smaller than this are compared absolutely.
    const FLOOR: f64 = 1e-7;
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let mut params = Network::init(seed).to_params();
        for p in &mut params {
            *p *= 3.0;
        }
        let net = Network::from_params(&params);
        let batch = random_batch(&mut rng, 40);
        let (_, grad) = net.loss_gradient(&batch).map_err(|e| e.to_string())?;
        let analytic = grad.to_params();
        for i in 0..PARAM_COUNT {
            let mut plus = params;
            let mut minus = params;
            plus[i] += STEP;
            minus[i] -= STEP;
            let numeric = (Network::from_params(&plus).mse(&batch) - Network::from_params(&minus).mse(&batch))
                / (2.0 * STEP);
            let err = (analytic[i] - numeric).abs() / analytic[i].abs().max(numeric.abs()).max(FLOOR);
            worst = worst.max(err);
        }
    }
    ensure(worst < 1e-6, || format!("max relative error {worst:.3e}"))?;
    Ok(format!("max relative error {worst:.3e} over 10 (model, batch) pairs"))
}

fn metric_oracles() -> Outcome {
    let close = |a: f64, b: f64| rel_err(a, b) <= 1e-12;
    let err = |e: solarcast::Error| e.to_string();
    ensure(rmse(&[(5.0, 5.0), (7.0, 7.0)]).map_err(err)? == 0.0, || "perfect rmse".into())?;
    ensure(close(rmse(&[(1.0, 11.0), (4.0, 14.0), (-3.0, 7.0)]).map_err(err)?, 10.0), || "offset rmse".into())?;
    let r = rmse(&[(0.0, 3.0), (0.0, 4.0)]).map_err(err)?;
    ensure(close(r, (12.5f64).sqrt()), || format!("rmse {r}"))?;
    let flat: Vec<_> = (0..10).map(|_| (100.0, 110.0)).collect();
    let n = nrmse(&flat, NrmseDivisor::Mean).map_err(err)?;
    ensure(close(n, 10.0), || format!("nrmse {n}"))?;
    ensure(nrmse(&[(50.0, 50.0)], NrmseDivisor::Mean).map_err(err)? == 0.0, || "perfect nrmse".into())?;
    let cc = correlation(&[(1.0, 2.0), (2.0, 1.0), (3.0, 3.0)]).map_err(err)?;
    ensure(close(cc, 0.5), || format!("cc {cc}"))?;
    let ident: Vec<_> = (0..20).map(|i| (i as f64, i as f64)).collect();
    ensure(close(correlation(&ident).map_err(err)?, 1.0), || "cc identity".into())?;
    let anti: Vec<_> = (0..20).map(|i| (i as f64, 40.0 - i as f64)).collect();
    ensure(close(correlation(&anti).map_err(err)?, -1.0), || "cc anti".into())?;

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let pairs: Vec<_> = (0..500)
        .map(|_| {
            let m: f64 = rng.random_range(100.0..900.0);
            (m, m + rng.random_range(-80.0..80.0))
        })
        .collect();
    let a = nrmse_ci95_seeded(&pairs, NrmseDivisor::Mean, BOOTSTRAP_RESAMPLES, 17).map_err(err)?;
    let b = nrmse_ci95_seeded(&pairs, NrmseDivisor::Mean, BOOTSTRAP_RESAMPLES, 17).map_err(err)?;
    ensure(a == b, || format!("bootstrap not deterministic: {a:?} vs {b:?}"))?;
    let point = nrmse(&pairs, NrmseDivisor::Mean).map_err(err)?;
    ensure(a.0 <= point && point <= a.1, || format!("interval {a:?} misses {point}"))?;
    let constant: Vec<_> = (0..60).map(|_| (200.0, 230.0)).collect();
    let (lo, hi) = nrmse_ci95_seeded(&constant, NrmseDivisor::Mean, BOOTSTRAP_RESAMPLES, 3).map_err(err)?;
    let x = nrmse(&constant, NrmseDivisor::Mean).map_err(err)?;
    ensure(lo == hi && close(lo, x), || format!("zero-variance interval ({lo}, {hi}) vs {x}"))?;
    Ok(format!("fixtures exact, CI [{:.3}, {:.3}] deterministic, degenerate ({lo}, {hi})", a.0, a.1))
}

fn noisy_series(seed: u64, site: &StationMeta, cadence: Cadence) -> IrradiationSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prep = Preprocessor::default();
    let span = DateSpan::years(2003, 2003).unwrap();
    let start = span.first.and_hms_opt(0, 0, 0).unwrap();
    let count = match cadence {
        Cadence::Daily => 365,
        Cadence::Hourly => 365 * 24,
    };
    let points = (0..count)
        .map(|i| {
            let ts = start + cadence.step() * i;
            let ceiling = prep.ceiling(site, cadence, ts);
            let value = if rng.random_bool(0.05) {
                None
            } else {
                Some(ceiling * rng.random_range(0.0..1.1))
            };
            Observation { timestamp: ts, value }
        })
        .collect();
    IrradiationSeries::new(site.clone(), cadence, points).unwrap()
}

fn preprocessing_round_trips() -> Outcome {
    let prep = Preprocessor::default();
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    for seed in 0..6u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let site = station(
            "Random",
            rng.random_range(-65.0..65.0),
            rng.random_range(-180.0..180.0),
            rng.random_range(0.0..2000.0),
            rng.random_range(-12..=12) as f64,
        );
        for cadence in [Cadence::Daily, Cadence::Hourly] {
            let series = noisy_series(seed, &site, cadence);
            let k = prep.stationarize(&series).map_err(|e| e.to_string())?;
            let back = prep.destationarize(&k, &site).map_err(|e| e.to_string())?;
            for (a, b) in series.points().iter().zip(back.points()) {
                if let (Some(x), Some(y)) = (a.value, b.value) {
                    let e = rel_err(x, y);
                    worst = worst.max(e);
                    checked += 1;
                    ensure(e < 1e-12, || format!("{cadence} {}: {x} → {y}", a.timestamp))?;
                }
            }
            let norm = fit_norm(&k).map_err(|e| e.to_string())?;
            for v in k.measured() {
                let r = norm.denormalize(norm.normalize(v));
                let e = rel_err(v, r);
                worst = worst.max(e);
                ensure(e < 1e-12, || format!("normalize round trip {v} → {r}"))?;
            }
        }
    }
    let g = SolarGeometry::default();
    let site = station("Ajaccio", 41.92, 8.80, 4.0, 1.0);
    let params = SynthesisParams {
        mean_clearness: 0.7,
        innovation_sd: 0.0,
        station_noise_sd: 0.0,
        ..SynthesisParams::default()
    };
    for cadence in [Cadence::Daily, Cadence::Hourly] {
        let s = synthesize_station(4, &site, cadence, DateSpan::years(2002, 2002).unwrap(), &params, &g)
            .map_err(|e| e.to_string())?;
        let k = prep.stationarize(&s).map_err(|e| e.to_string())?;
        for v in k.measured() {
            ensure((v - 0.7).abs() < 1e-12, || format!("{cadence} noise-free clearness {v}"))?;
        }
    }
    Ok(format!("{checked} round-tripped points, worst relative error {worst:.2e}; noise-free k = 0.7"))
}

fn stationarization_effectiveness() -> Outcome {
    let g = SolarGeometry::default();
    let site = station("Ajaccio", 41.92, 8.80, 4.0, 1.0);
    let s = synthesize_station(
        21,
        &site,
        Cadence::Daily,
        DateSpan::years(1980, 1989).unwrap(),
        &SynthesisParams::default(),
        &g,
    )
    .map_err(|e| e.to_string())?;
    let raw: Vec<_> = s.points().iter().map(|p| p.value).collect();
    let k = Preprocessor::default().stationarize(&s).map_err(|e| e.to_string())?;
    let clear: Vec<_> = k.points.iter().map(|p| p.k).collect();
    let a_raw = lag_autocorrelation(&raw, 365).map_err(|e| e.to_string())?.abs();
    let a_k = lag_autocorrelation(&clear, 365).map_err(|e| e.to_string())?.abs();
    ensure(a_k <= 0.5 * a_raw, || format!("|r365| clearness {a_k:.3} vs raw {a_raw:.3}"))?;
    Ok(format!("|r365| raw {a_raw:.3}, clearness {a_k:.3}"))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Twin stations share the regional clearness process of `seed`; each adds
/// its own white noise, and the local site is somewhat cloudier.
fn twin_stations(seed: u64, cadence: Cadence) -> (IrradiationSeries, IrradiationSeries, IrradiationSeries) {
    let g = SolarGeometry::default();
    let remote = station("Ajaccio", 41.92, 8.80, 4.0, 1.0);
    let local = station("Bastia", 42.55, 9.48, 10.0, 1.0);
    let p_remote = SynthesisParams {
        mean_clearness: 0.62,
        persistence: 0.8,
        station_noise_sd: 0.05,
        station_seed: 11,
        ..SynthesisParams::default()
    };
    let p_local = SynthesisParams {
        mean_clearness: 0.55,
        station_seed: 12,
        ..p_remote
    };
    let (remote_years, local_years) = match cadence {
        Cadence::Daily => ((1972, 1987), (1991, 1995)),
        Cadence::Hourly => ((1980, 1985), (1991, 1993)),
    };
    let synth = |site: &StationMeta, years: (i32, i32), p: &SynthesisParams| {
        synthesize_station(seed, site, cadence, DateSpan::years(years.0, years.1).unwrap(), p, &g).unwrap()
    };
    (
        synth(&remote, remote_years, &p_remote),
        synth(&local, local_years, &p_local),
        synth(&local, (1996, 1996), &p_local),
    )
}

fn relocation_ordering() -> Outcome {
    let cfg = ExperimentConfig::default();
    let mut summary = Vec::new();
    for cadence in [Cadence::Daily, Cadence::Hourly] {
        let (mut a, mut b, mut c) = (Vec::new(), Vec::new(), Vec::new());
        let mut a_beats_c = 0;
        let mut b_close = 0;
        for seed in 0..10u64 {
            let (remote, local, target) = twin_stations(seed, cadence);
            let out = run_abc_experiment(&remote, &local, &target, &cfg).map_err(|e| e.to_string())?;
            let rmse_of = |f: Forecaster| out.reports.iter().find(|r| r.forecaster == f).map(|r| r.rmse);
            let (ra, rb, rc) = (
                rmse_of(Forecaster::AnnRemote).ok_or("missing A")?,
                rmse_of(Forecaster::AnnLocal).ok_or("missing B")?,
                rmse_of(Forecaster::Persistence).ok_or("missing C")?,
            );
            let stamps = out.forecasts[0].timestamps();
            ensure(out.forecasts.iter().all(|f| f.timestamps() == stamps), || {
                "A/B/C scored on different timestamps".into()
            })?;
            a_beats_c += usize::from(ra < rc);
            b_close += usize::from(rb <= 1.05 * ra);
            a.push(ra);
            b.push(rb);
            c.push(rc);
        }
        let (ma, mb) = (median(a), median(b));
        ensure(a_beats_c >= 8, || format!("{cadence}: A < C in only {a_beats_c}/10 seeds"))?;
        ensure(b_close >= 8, || format!("{cadence}: B ≤ 1.05·A in only {b_close}/10 seeds"))?;
        ensure(mb <= ma && ma <= 1.10 * mb, || {
            format!("{cadence}: median A {ma:.2}, median B {mb:.2}")
        })?;
        summary.push(format!(
            "{cadence}: A<C {a_beats_c}/10, median A/B {:.3}, median C {:.1}",
            ma / mb,
            median(c)
        ));
    }
    Ok(summary.join("; "))
}

fn teacher_set(teacher_seed: u64) -> SupervisedSet {
    // Teacher weights come from the same distribution as a fresh model.
    let teacher = Network::init(teacher_seed);
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let t0 = NaiveDate::from_ymd_opt(2000, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
    let samples = (0..600)
        .map(|i| {
            let inputs: [f64; INPUTS] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            Sample {
                timestamp: t0 + Span::days(i),
                target: teacher.forward(&inputs),
                inputs,
            }
        })
        .collect();
    SupervisedSet {
        cadence: Cadence::Daily,
        samples,
        norm: NormParams::new(0.0, 1.0, "teacher").expect("valid extrema"),
        stationarization: Stationarization::DailyExtraterrestrial,
        elevation_cutoff: 0.0,
        station: "teacher".into(),
    }
}

fn realizable_training() -> Outcome {
    let cfg = TrainConfig {
        seed: 3,
        ..TrainConfig::default()
    };
    let mut worst: f64 = 0.0;
    for teacher in [5u64, 6, 99] {
        let set = teacher_set(teacher);
        let (m1, report) = mlp::train(&set, &cfg).map_err(|e| e.to_string())?;
        let (m2, _) = mlp::train(&set, &cfg).map_err(|e| e.to_string())?;
        ensure(report.epochs_run <= 2000, || format!("{} epochs", report.epochs_run))?;
        ensure(report.final_val_mse < 1e-3, || {
            format!("teacher {teacher}: validation MSE {:.3e}", report.final_val_mse)
        })?;
        ensure(mlp::to_text(&m1) == mlp::to_text(&m2), || {
            format!("teacher {teacher}: model files differ between runs")
        })?;
        worst = worst.max(report.final_val_mse);
    }
    Ok(format!("3 teachers, worst validation MSE {worst:.3e}; model files identical"))
}

fn pv_chain() -> Outcome {
    let site = station("Ajaccio", 41.92, 8.80, 4.0, 1.0);
    let g = SolarGeometry::default();
    let series = synthesize_station(8, &site, Cadence::Hourly, DateSpan::years(2001, 2001).unwrap(), &SynthesisParams::default(), &g)
        .map_err(|e| e.to_string())?;
    // Forecasts only exist for hours whose midpoint sun clears the cutoff.
    let prep = Preprocessor::default();
    let horizontal = ForecastSeries {
        cadence: Cadence::Hourly,
        forecaster: Forecaster::AnnRemote,
        station: site.name().into(),
        points: series
            .points()
            .iter()
            .filter(|p| prep.is_daylight(&site, Cadence::Hourly, p.timestamp))
            .filter_map(|p| {
                p.value.map(|v| ForecastPoint {
                    timestamp: p.timestamp,
                    predicted: v,
                    measured: v,
                })
            })
            .collect(),
    };
    let opts = TranspositionOptions::default();
    let flat = PvPlant::new(site.clone(), 0.13, 10.125, 0.0, 0.0).map_err(|e| e.to_string())?;
    let same = transpose_forecast(&horizontal, &flat, &opts).map_err(|e| e.to_string())?;
    ensure(same == horizontal, || "β = 0 transposition changed the series".into())?;
    let sunny = horizontal.points.len();

    let base = PvPlant::with_defaults(site.clone());
    let tilted = transpose_forecast(&horizontal, &base, &opts).map_err(|e| e.to_string())?;
    let e = pv_energy(&tilted, &base);
    let scaled_plant = PvPlant::new(site.clone(), 0.13 * 0.5, 10.125 * 3.0, 80.0, 0.0).map_err(|e| e.to_string())?;
    let mut scaled_input = tilted.clone();
    for p in &mut scaled_input.points {
        p.predicted *= 1.7;
    }
    let e2 = pv_energy(&scaled_input, &scaled_plant);
    for (a, b) in e.iter().zip(&e2) {
        let expected = a.energy * 0.5 * 3.0 * 1.7;
        ensure(rel_err(b.energy, expected) <= 1e-12, || format!("{} vs {expected}", b.energy))?;
    }
    let fixture = energy_wh(1000.0, &base);
    ensure(fixture == 1316.25, || format!("E(1000) = {fixture}"))?;
    Ok(format!("β = 0 identity on {sunny} hours, linearity holds, E(1000 Wh/m²) = {fixture} Wh"))
}

fn run_cli(args: &[&str], dir: &Path) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_solarcast"))
        .args(args)
        .current_dir(dir)
        .output()
        .map_err(|e| e.to_string())?;
    ensure(out.status.success(), || {
        format!("`{}` failed: {}", args.join(" "), String::from_utf8_lossy(&out.stderr))
    })
}

const PIPELINE_CONFIG: &str = "seed = 42\nmax_epochs = 800\nbootstrap_resamples = 300\n";

fn pipeline_once(dir: &Path) -> Result<Vec<(String, Vec<u8>)>, String> {
    fs::write(dir.join("run.toml"), PIPELINE_CONFIG).map_err(|e| e.to_string())?;
    fs::write(
        dir.join("ajaccio.toml"),
        "name = \"Ajaccio\"\nlatitude_deg = 41.92\nlongitude_deg = 8.80\naltitude_m = 4\nutc_offset_h = 1\n",
    )
    .map_err(|e| e.to_string())?;
    fs::write(
        dir.join("bastia.toml"),
        "name = \"Bastia\"\nlatitude_deg = 42.55\nlongitude_deg = 9.48\naltitude_m = 10\nutc_offset_h = 1\n",
    )
    .map_err(|e| e.to_string())?;
    let c = ["--config", "run.toml"];
    let steps: Vec<Vec<&str>> = vec![
        vec!["synthesize", "--station", "ajaccio.toml", "--cadence", "hourly", "--start-year", "1990", "--end-year", "1991", "--output", "remote.csv", "--station-seed", "11"],
        vec!["synthesize", "--station", "bastia.toml", "--cadence", "hourly", "--start-year", "1993", "--end-year", "1993", "--output", "local.csv", "--station-seed", "12", "--mean-clearness", "0.55"],
        vec!["synthesize", "--station", "bastia.toml", "--cadence", "hourly", "--start-year", "1996", "--end-year", "1996", "--output", "target.csv", "--station-seed", "12", "--mean-clearness", "0.55"],
        vec!["train", "--series", "remote.csv", "--station", "ajaccio.toml", "--cadence", "hourly", "--output", "model_a.txt"],
        vec!["evaluate", "--model", "model_a.txt", "--series", "target.csv", "--station", "bastia.toml", "--local-series", "local.csv", "--report", "report.csv", "--forecasts", "forecasts.csv"],
        vec!["pv", "--model", "model_a.txt", "--series", "target.csv", "--station", "bastia.toml", "--output", "pv.csv"],
    ];
    for step in &steps {
        let mut args = c.to_vec();
        args.extend(step);
        run_cli(&args, dir)?;
    }
    ["remote.csv", "local.csv", "target.csv", "model_a.txt", "report.csv", "forecasts.csv", "pv.csv"]
        .iter()
        .map(|name| {
            fs::read(dir.join(name))
                .map(|bytes| (name.to_string(), bytes))
                .map_err(|e| format!("{name}: {e}"))
        })
        .collect()
}

fn cli_determinism() -> Outcome {
    let first = tempfile::tempdir().map_err(|e| e.to_string())?;
    let second = tempfile::tempdir().map_err(|e| e.to_string())?;
    let a = pipeline_once(first.path())?;
    let b = pipeline_once(second.path())?;
    for ((name, x), (_, y)) in a.iter().zip(&b) {
        ensure(!x.is_empty(), || format!("{name} is empty"))?;
        ensure(x == y, || format!("{name} differs between runs"))?;
    }
    let bytes: usize = a.iter().map(|(_, x)| x.len()).sum();
    Ok(format!("{} artifacts ({bytes} bytes) byte-identical across two runs", a.len()))
}

struct Criterion {
    name: &'static str,
    budget: Duration,
    check: fn() -> Outcome,
}

fn main() {
    let criteria = [
        Criterion { name: "solar geometry oracles", budget: Duration::from_secs(1), check: solar_geometry_oracles },
        Criterion { name: "gradient correctness", budget: Duration::from_secs(5), check: gradient_check },
        Criterion { name: "metric oracles", budget: Duration::from_secs(5), check: metric_oracles },
        Criterion { name: "preprocessing round trips", budget: Duration::from_secs(5), check: preprocessing_round_trips },
        Criterion { name: "stationarization effectiveness", budget: Duration::from_secs(5), check: stationarization_effectiveness },
        Criterion { name: "relocation ordering", budget: Duration::from_secs(180), check: relocation_ordering },
        Criterion { name: "realizable-function training", budget: Duration::from_secs(30), check: realizable_training },
        Criterion { name: "PV chain", budget: Duration::from_secs(1), check: pv_chain },
        Criterion { name: "end-to-end CLI determinism", budget: Duration::from_secs(180), check: cli_determinism },
    ];
    let mut failures = 0;
    for (i, c) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = std::panic::catch_unwind(c.check).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = result.and_then(|detail| {
            if elapsed <= c.budget {
                Ok(detail)
            } else {
                Err(format!("took {elapsed:.2?}, budget {:?} ({detail})", c.budget))
            }
        });
        match result {
            Ok(detail) => println!("PASS {}. {} [{elapsed:.2?}]: {detail}", i + 1, c.name),
            Err(why) => {
                failures += 1;
                println!("FAIL {}. {} [{elapsed:.2?}]: {why}", i + 1, c.name);
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
