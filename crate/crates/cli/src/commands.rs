//! Subcommand implementations. Output files land in the chosen directory
//! under names prefixed by the scenario label; the accumulated log text is
//! returned for stdout.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use gridfreq::engine::{simulate, TimeSeries};
use gridfreq::metrics::MetricsReport;
use gridfreq::scenario::{initialize_dispatch, make_substitution_series, Scenario, ScenarioFile};

pub enum CliError {
    /// Bad input: missing files, unparsable or invalid scenarios.
    Usage(String),
    /// The simulation or a solver failed.
    Run(String),
}

/// What a single-scenario command produced. Every path named here exists
/// and is non-empty when the command succeeds.
pub struct RunOutputs {
    pub timeseries: PathBuf,
    pub metrics: Option<PathBuf>,
    pub portrait: Option<PathBuf>,
    pub log: String,
}

impl RunOutputs {
    /// Check the declared files actually landed on disk with content.
    pub fn verify(&self) -> Result<(), CliError> {
        let paths = [Some(&self.timeseries), self.metrics.as_ref(), self.portrait.as_ref()];
        for path in paths.into_iter().flatten() {
            let len = fs::metadata(path)
                .map_err(|e| CliError::Run(format!("missing output {}: {e}", path.display())))?
                .len();
            if len == 0 {
                return Err(CliError::Run(format!("empty output {}", path.display())));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Default)]
pub struct Overrides {
    pub dt: Option<f64>,
    pub duration: Option<f64>,
    pub window: Option<f64>,
}

impl Overrides {
    fn apply(&self, file: &mut ScenarioFile, log: &mut String) {
        if let Some(dt) = self.dt {
            file.sim.dt = dt;
            let _ = writeln!(log, "override: dt = {dt}");
        }
        if let Some(duration) = self.duration {
            file.sim.duration = duration;
            let _ = writeln!(log, "override: duration = {duration}");
        }
        if let Some(window) = self.window {
            file.sim.rocof_window = window;
            let _ = writeln!(log, "override: window = {window}");
        }
    }
}

/// Load a scenario from a file path or a directory holding `scenario.toml`,
/// applying any overrides before validation.
fn load_scenario(
    path: &Path,
    overrides: Overrides,
    log: &mut String,
) -> Result<Scenario<f64>, CliError> {
    let file_path: PathBuf = if path.is_dir() {
        path.join("scenario.toml")
    } else {
        path.to_path_buf()
    };
    let text = fs::read_to_string(&file_path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", file_path.display())))?;
    let mut file = ScenarioFile::from_toml_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", file_path.display())))?;
    overrides.apply(&mut file, log);
    let loaded = Scenario::from_file(file)
        .map_err(|e| CliError::Usage(format!("{}: {e}", file_path.display())))?;
    for w in &loaded.warnings {
        let _ = writeln!(log, "warning: {w}");
    }
    let _ = writeln!(log, "loaded scenario {}", loaded.scenario.name);
    Ok(loaded.scenario)
}

fn ensure_out_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", out.display())))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents)
        .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
}

/// Simulate a loaded scenario and write `<name>_timeseries.csv` and
/// `<name>_metrics.txt`. Returns the output paths and the metrics for
/// table aggregation.
fn run_one(
    scenario: &Scenario<f64>,
    out: &Path,
    log: &mut String,
) -> Result<(RunOutputs, MetricsReport<f64>), CliError> {
    let series = simulate(scenario).map_err(|e| CliError::Run(e.to_string()))?;
    let report = metrics_of(scenario, &series)?;

    let ts_path = out.join(format!("{}_timeseries.csv", scenario.name));
    let mut csv = Vec::new();
    series
        .to_csv(&mut csv)
        .map_err(|e| CliError::Run(e.to_string()))?;
    write_file(&ts_path, &csv)?;

    let metrics_path = out.join(format!("{}_metrics.txt", scenario.name));
    write_file(&metrics_path, report.to_text().as_bytes())?;

    let _ = writeln!(log, "wrote {}", ts_path.display());
    let _ = writeln!(log, "wrote {}", metrics_path.display());
    let _ = writeln!(
        log,
        "{}: rocof = {:.4} Hz/s, nadir = {:.4} Hz, settling = {}",
        scenario.name,
        report.rocof_max_abs,
        report.nadir,
        report
            .settling_f
            .map(|s| format!("{s:.4} Hz"))
            .unwrap_or_else(|| "unsettled".into()),
    );
    let outputs = RunOutputs {
        timeseries: ts_path,
        metrics: Some(metrics_path),
        portrait: None,
        log: String::new(),
    };
    Ok((outputs, report))
}

fn metrics_of(
    scenario: &Scenario<f64>,
    series: &TimeSeries<f64>,
) -> Result<MetricsReport<f64>, CliError> {
    let init = initialize_dispatch(scenario).map_err(|e| CliError::Run(e.to_string()))?;
    let event_time = scenario.events.first().map(|e| e.time).unwrap_or(0.0);
    MetricsReport::from_series(
        &scenario.name,
        series,
        &init.devices,
        event_time,
        scenario.rocof_window,
    )
    .map_err(|e| CliError::Run(e.to_string()))
}

pub fn run(path: &Path, out: &Path, overrides: Overrides) -> Result<RunOutputs, CliError> {
    let mut log = String::new();
    let scenario = load_scenario(path, overrides, &mut log)?;
    ensure_out_dir(out)?;
    let (mut outputs, _) = run_one(&scenario, out, &mut log)?;
    outputs.log = log;
    Ok(outputs)
}

pub fn sweep(
    path: &Path,
    out: &Path,
    overrides: Overrides,
    order: Option<&[&str]>,
) -> Result<String, CliError> {
    let mut log = String::new();
    let scenario = load_scenario(path, overrides, &mut log)?;
    ensure_out_dir(out)?;

    let default_order: Vec<String> = scenario
        .devices
        .iter()
        .filter(|d| d.params.is_sg())
        .map(|d| d.name.clone())
        .collect();
    let order: Vec<&str> = match order {
        Some(names) => names.to_vec(),
        None => default_order.iter().map(String::as_str).collect(),
    };
    let members = make_substitution_series(&scenario, &order)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let _ = writeln!(
        log,
        "sweep: {} scenarios replacing [{}]",
        members.len(),
        order.join(", ")
    );

    // Members are independent; run them in parallel and collect in order.
    let results: Vec<Result<(String, MetricsReport<f64>), CliError>> = members
        .par_iter()
        .map(|member| {
            let mut member_log = String::new();
            let (_, report) = run_one(member, out, &mut member_log)?;
            write_file(
                &out.join(format!("{}_scenario.toml", member.name)),
                member.to_toml_string().as_bytes(),
            )?;
            Ok((member_log, report))
        })
        .collect();

    let mut table = String::from(MetricsReport::<f64>::csv_header());
    table.push('\n');
    let mut completed = 0usize;
    let mut failure: Option<CliError> = None;
    for result in results {
        match result {
            Ok((member_log, report)) => {
                log.push_str(&member_log);
                table.push_str(&report.to_csv_row());
                table.push('\n');
                completed += 1;
            }
            Err(e) => {
                failure = Some(e);
                break;
            }
        }
    }
    let table_path = out.join("sweep.csv");
    write_file(&table_path, table.as_bytes())?;
    let _ = writeln!(log, "wrote {}", table_path.display());
    if let Some(e) = failure {
        let msg = match e {
            CliError::Usage(m) | CliError::Run(m) => m,
        };
        return Err(CliError::Run(format!(
            "sweep aborted after {completed} of {} members (partial results in {}): {msg}",
            members.len(),
            table_path.display()
        )));
    }
    Ok(log)
}

pub fn portrait(path: &Path, out: &Path, overrides: Overrides) -> Result<RunOutputs, CliError> {
    let mut log = String::new();
    let scenario = load_scenario(path, overrides, &mut log)?;
    ensure_out_dir(out)?;
    let series = simulate(&scenario).map_err(|e| CliError::Run(e.to_string()))?;

    let ts_path = out.join(format!("{}_timeseries.csv", scenario.name));
    let mut ts_csv = Vec::new();
    series
        .to_csv(&mut ts_csv)
        .map_err(|e| CliError::Run(e.to_string()))?;
    write_file(&ts_path, &ts_csv)?;
    let _ = writeln!(log, "wrote {}", ts_path.display());

    let mut csv = String::from("t");
    for name in &series.device_names {
        let _ = write!(csv, ",dev:{name}:pm,dev:{name}:f");
    }
    csv.push('\n');
    for i in 0..series.t.len() {
        let _ = write!(csv, "{:.8e}", series.t[i]);
        for k in 0..series.device_names.len() {
            let _ = write!(csv, ",{:.8e},{:.8e}", series.p_m[k][i], series.f[k][i]);
        }
        csv.push('\n');
    }
    let portrait_path = out.join(format!("{}_portrait.csv", scenario.name));
    write_file(&portrait_path, csv.as_bytes())?;
    let _ = writeln!(log, "wrote {}", portrait_path.display());
    Ok(RunOutputs {
        timeseries: ts_path,
        metrics: None,
        portrait: Some(portrait_path),
        log,
    })
}
