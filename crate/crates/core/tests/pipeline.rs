use solarcast::dataset::{extraterrestrial_ceiling, synthesize_station, Cadence, DateSpan, IrradiationSeries, SynthesisParams};
use solarcast::forecast::{
    ann_forecast, evaluate_abc, fit_model, persistence_forecast, run_abc_experiment, training_set, AnnOptions,
    ExperimentConfig, Forecaster, PersistenceMode,
};
use solarcast::metrics::rmse;
use solarcast::mlp::TrainConfig;
use solarcast::preprocessing::Preprocessor;
use solarcast::solar_geometry::{SolarGeometry, StationMeta};
use solarcast::Error;

fn ajaccio() -> StationMeta {
    StationMeta::new("Ajaccio", 41.92, 8.80, 4.0, 1.0).unwrap()
}

fn bastia() -> StationMeta {
    StationMeta::new("Bastia", 42.55, 9.48, 10.0, 1.0).unwrap()
}

fn synth(station: &StationMeta, cadence: Cadence, years: (i32, i32), seed: u64) -> IrradiationSeries {
    synthesize_station(
        seed,
        station,
        cadence,
        DateSpan::years(years.0, years.1).unwrap(),
        &SynthesisParams::default(),
        &SolarGeometry::default(),
    )
    .unwrap()
}

fn quick() -> TrainConfig {
    TrainConfig {
        max_epochs: 200,
        ..TrainConfig::default()
    }
}

#[test]
fn persistence_error_matches_ar1_theory() {
    let (mu, rho, sigma) = (0.5, 0.8, 0.1);
    let params = SynthesisParams {
        mean_clearness: mu,
        persistence: rho,
        innovation_sd: sigma,
        station_noise_sd: 0.0,
        station_seed: 0,
    };
    let g = SolarGeometry::default();
    let site = ajaccio();
    let s = synthesize_station(9, &site, Cadence::Daily, DateSpan::years(1960, 1999).unwrap(), &params, &g).unwrap();
    let f = persistence_forecast(&s, &Preprocessor::default(), PersistenceMode::Raw);
    let measured = rmse(&f.pairs()).unwrap();

    // y(t) = S(t)·k(t) with k stationary AR(1): mean μ, variance v, lag-1
    // covariance ρv. Clamping at [0.05, 1] is ignored (> 2.7σ away).
    let v = sigma * sigma / (1.0 - rho * rho);
    let mse: f64 = f
        .points
        .iter()
        .map(|p| {
            let s1 = extraterrestrial_ceiling(&g, &site, Cadence::Daily, p.timestamp);
            let s0 = extraterrestrial_ceiling(&g, &site, Cadence::Daily, p.timestamp - Cadence::Daily.step());
            (s1 * s1 + s0 * s0) * (v + mu * mu) - 2.0 * s0 * s1 * (rho * v + mu * mu)
        })
        .sum::<f64>()
        / f.points.len() as f64;
    let theory = mse.sqrt();
    assert!((measured - theory).abs() < 0.1 * theory, "measured {measured}, theory {theory}");
}

#[test]
fn in_sample_forecast_reproduces_training_predictions() {
    let series = synth(&ajaccio(), Cadence::Daily, (1990, 1993), 4);
    let prep = Preprocessor::default();
    let (model, _) = fit_model(&series, &prep, &quick()).unwrap();
    let set = training_set(&series, &prep).unwrap();
    let f = ann_forecast(&model, &series, &AnnOptions::default()).unwrap();
    assert_eq!(f.points.len(), set.samples.len());
    for (p, s) in f.points.iter().zip(&set.samples) {
        assert_eq!(p.timestamp, s.timestamp);
        let k = model.norm.denormalize(model.network.forward(&s.inputs));
        let expected = k * prep.ceiling(&ajaccio(), Cadence::Daily, s.timestamp);
        assert!((p.predicted - expected).abs() <= 1e-12 * expected.abs());
        let i = series.index_of(p.timestamp).unwrap();
        assert_eq!(Some(p.measured), series.points()[i].value);
    }
}

#[test]
fn experiment_scores_every_forecaster_on_one_timestamp_set() {
    for cadence in [Cadence::Daily, Cadence::Hourly] {
        let years = if cadence == Cadence::Daily { (1985, 1989) } else { (1988, 1988) };
        let remote = synth(&ajaccio(), cadence, years, 2);
        let local = synth(&bastia(), cadence, (1990, 1990), 2);
        let target = synth(&bastia(), cadence, (1992, 1992), 2);
        let cfg = ExperimentConfig {
            train: quick(),
            ..ExperimentConfig::default()
        };
        let out = run_abc_experiment(&remote, &local, &target, &cfg).unwrap();
        let tags: Vec<_> = out.reports.iter().map(|r| r.forecaster).collect();
        assert_eq!(tags, [Forecaster::AnnRemote, Forecaster::AnnLocal, Forecaster::Persistence]);
        let n = out.common_timestamps.len();
        assert!(out.reports.iter().all(|r| r.n == n));
        for f in &out.forecasts {
            assert_eq!(f.timestamps(), out.common_timestamps);
        }
        assert_eq!(out.train_reports.len(), 2);
        for r in &out.reports {
            assert!(r.rmse >= 0.0);
            assert!(r.nrmse_ci95.0 <= r.nrmse && r.nrmse <= r.nrmse_ci95.1);
        }
    }
}

#[test]
fn experiment_without_local_model_has_two_rows() {
    let remote = synth(&ajaccio(), Cadence::Daily, (1985, 1987), 3);
    let target = synth(&bastia(), Cadence::Daily, (1990, 1990), 3);
    let cfg = ExperimentConfig {
        train: quick(),
        ..ExperimentConfig::default()
    };
    let (model, _) = fit_model(&remote, &cfg.preprocessor, &cfg.train).unwrap();
    let out = evaluate_abc(&model, None, &target, &cfg).unwrap();
    let tags: Vec<_> = out.reports.iter().map(|r| r.forecaster).collect();
    assert_eq!(tags, [Forecaster::AnnRemote, Forecaster::Persistence]);
}

#[test]
fn overlapping_target_is_rejected() {
    let remote = synth(&ajaccio(), Cadence::Daily, (1985, 1987), 3);
    let local = synth(&bastia(), Cadence::Daily, (1988, 1990), 3);
    let target = synth(&bastia(), Cadence::Daily, (1990, 1990), 3);
    let err = run_abc_experiment(&remote, &local, &target, &ExperimentConfig::default()).unwrap_err();
    assert!(matches!(err, Error::Input(_)), "{err:?}");

    let hourly = synth(&bastia(), Cadence::Hourly, (1995, 1995), 3);
    let err = run_abc_experiment(&remote, &local, &hourly, &ExperimentConfig::default()).unwrap_err();
    assert!(matches!(err, Error::Mismatch(_)), "{err:?}");
}

#[test]
fn clamped_relocated_forecasts_are_non_negative() {
    let remote = synth(&ajaccio(), Cadence::Hourly, (1988, 1988), 6);
    let (model, _) = fit_model(&remote, &Preprocessor::default(), &quick()).unwrap();
    let target = synth(&bastia(), Cadence::Hourly, (1990, 1990), 6);
    let opts = AnnOptions {
        clamp_output: true,
        ..AnnOptions::default()
    };
    let f = ann_forecast(&model, &target, &opts).unwrap();
    assert!(!f.points.is_empty());
    assert!(f.points.iter().all(|p| p.predicted >= 0.0));
}
