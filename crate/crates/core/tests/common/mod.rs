#![allow(dead_code)]

use gridfreq::device::DeviceParams;
use gridfreq::engine::{simulate, EventKind, TimeSeries};
use gridfreq::metrics::MetricsReport;
use gridfreq::scenario::{initialize_dispatch, Scenario, ScenarioFile};

pub fn load(text: &str) -> Scenario<f64> {
    Scenario::from_toml_str(text).expect("bundled scenario loads").scenario
}

/// Load a bundled scenario with its source file edited first.
pub fn load_edited(text: &str, edit: impl FnOnce(&mut ScenarioFile)) -> Scenario<f64> {
    let mut file = load(text).source().clone();
    edit(&mut file);
    Scenario::from_file(file).expect("edited scenario loads").scenario
}

pub fn run(scenario: &Scenario<f64>) -> TimeSeries<f64> {
    simulate(scenario).expect("simulation succeeds")
}

/// Metric suite on a finished run, using the scenario's first event time.
pub fn report(scenario: &Scenario<f64>, series: &TimeSeries<f64>) -> MetricsReport<f64> {
    let devices = initialized_devices(scenario);
    MetricsReport::from_series(
        &scenario.name,
        series,
        &devices,
        first_event_time(scenario),
        scenario.rocof_window,
    )
    .expect("metrics evaluate")
}

pub fn initialized_devices(scenario: &Scenario<f64>) -> Vec<DeviceParams<f64>> {
    initialize_dispatch(scenario).expect("initialization").devices
}

pub fn first_event_time(scenario: &Scenario<f64>) -> f64 {
    scenario.events.first().map(|e| e.time).unwrap_or(0.0)
}

/// Total system load (pu, system base) in effect at time `t`.
pub fn total_load_at(scenario: &Scenario<f64>, t: f64) -> f64 {
    let base: f64 = scenario.net.base_loads().iter().sum();
    let steps: f64 = scenario
        .events
        .iter()
        .filter(|e| e.time <= t)
        .map(|e| match e.kind {
            EventKind::LoadStep { delta_p, .. } => delta_p,
        })
        .sum();
    base + steps
}

/// Least-squares slope of ln(err) against ln(dt).
pub fn fit_order(dts: &[f64], errs: &[f64]) -> f64 {
    let n = dts.len() as f64;
    let xs: Vec<f64> = dts.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|x| x * x).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx.sqrt() * vy.sqrt())
}
