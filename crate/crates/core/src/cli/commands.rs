//! Command dispatch: turns a validated `RunConfig` into computations and
//! artifact files. Partial outputs are removed when a command fails.

use crate::cli::config::{
    CommandKind, CorrMethodChoice, DensityMethodChoice, DigitChoice, GradingChoice, RunConfig,
    VariantChoice, WindowChoice,
};
use crate::cli::output::{
    read_table_csv, read_table_json, write_density_csv, write_density_json, write_orbit_csv,
    write_orbit_json, write_summary_json, write_table_csv, write_table_json,
};
use crate::cli::plot::{write_plot, Scale, Series};
use crate::correlation::{
    decay_exponent_fit, monte_carlo_correlation, ulam_correlation, CorrelationSeries, Interval,
};
use crate::error::{LabError, Result};
use crate::experiments::{
    erdos_renyi_window_experiment, runlength_scaling_experiment, sample_mu_typical,
    short_run_probability, BlockSchedule, BlockVariant, ExperimentTable, TrialPlan, WindowMode,
};
use crate::map::{orbit, Digit, OrbitSample, Point};
use crate::measure::{
    birkhoff_measure, cdf_scaling_fit, cylinder_measure, density_prefactor, stationary_density,
    ulam_matrix, DensityEstimate, Grading, Partition,
};
use crate::stats::median;
use serde_json::{json, Map, Value};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

/// Runs one command and returns the artifact files it wrote. On failure
/// every file written so far is removed before the error propagates.
pub fn run_command(config: &RunConfig) -> Result<Vec<PathBuf>> {
    if let Some(threads) = config.threads {
        // Ignore the error: the global pool can only be built once per
        // process, later invocations keep the existing pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let mut sink = Sink {
        dir: config.out.clone(),
        written: Vec::new(),
    };
    match execute(config, &mut sink) {
        Ok(()) => Ok(sink.written),
        Err(e) => {
            for path in &sink.written {
                let _ = std::fs::remove_file(path);
            }
            Err(e)
        }
    }
}

struct Sink {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Sink {
    fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    fn record(&mut self, path: PathBuf) {
        self.written.push(path);
    }
}

fn base_metadata(config: &RunConfig) -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert("command".into(), config.command.as_str().into());
    m.insert("alpha".into(), config.alpha.value().to_string());
    m.insert("seed".into(), config.seed.to_string());
    m.insert("config_hash".into(), config.hash());
    m
}

fn execute(config: &RunConfig, sink: &mut Sink) -> Result<()> {
    let echo = sink.path("config_echo.toml");
    if let Some(parent) = echo.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&echo, config.echo_toml())?;
    sink.record(echo);

    match config.command {
        CommandKind::Orbit => cmd_orbit(config, sink),
        CommandKind::Runlength => cmd_runlength(config, sink),
        CommandKind::Scaling => cmd_scaling(config, sink),
        CommandKind::Density => cmd_density(config, sink),
        CommandKind::Cylinder => cmd_cylinder(config, sink),
        CommandKind::Correlation => cmd_correlation(config, sink),
        CommandKind::Windows => cmd_windows(config, sink),
        CommandKind::Blocks => cmd_blocks(config, sink),
        CommandKind::Report => cmd_report(config, sink),
    }
}

fn write_table(config: &RunConfig, sink: &mut Sink, name: &str, mut table: ExperimentTable) -> Result<ExperimentTable> {
    for (k, v) in base_metadata(config) {
        table.metadata.entry(k).or_insert(v);
    }
    if config.format.csv() {
        let path = sink.path(&format!("{name}.csv"));
        write_table_csv(&path, &table)?;
        sink.record(path);
    }
    if config.format.json() {
        let path = sink.path(&format!("{name}.json"));
        write_table_json(&path, &table)?;
        sink.record(path);
    }
    Ok(table)
}

fn write_summary(config: &RunConfig, sink: &mut Sink, name: &str, body: Value) -> Result<()> {
    let path = sink.path(&format!("{name}.json"));
    write_summary_json(&path, &base_metadata(config), body)?;
    sink.record(path);
    Ok(())
}

fn make_partition(config: &RunConfig) -> Result<Partition> {
    let grading = match config.grading {
        GradingChoice::Uniform => Grading::Uniform,
        GradingChoice::Geometric => Grading::geometric_for(config.alpha),
    };
    Partition::new(config.cells, grading)
}

fn ulam_density(config: &RunConfig) -> Result<(Partition, crate::measure::UlamMatrix, DensityEstimate)> {
    let partition = make_partition(config)?;
    let matrix = ulam_matrix(config.alpha, &partition)?;
    let density = stationary_density(&matrix, &partition)?;
    Ok((partition, matrix, density))
}

fn start_point(config: &RunConfig) -> Result<Point> {
    match config.x0 {
        Some(x0) => Point::new(x0),
        None => Ok(sample_mu_typical(config.alpha, config.seed, config.burn_in)),
    }
}

fn trial_plan(config: &RunConfig) -> Result<TrialPlan> {
    TrialPlan::new(
        config.alpha,
        config.n_grid.clone(),
        config.trials,
        config.seed,
        config.burn_in,
    )
}

fn cmd_orbit(config: &RunConfig, sink: &mut Sink) -> Result<()> {
    let x0 = start_point(config)?;
    let n = config.n_grid[0];
    let samples: Vec<OrbitSample> = orbit(config.alpha, x0, n).collect();
    let metadata = base_metadata(config);
    if config.format.csv() {
        let path = sink.path("orbit.csv");
        write_orbit_csv(&path, &samples, &metadata)?;
        sink.record(path);
    }
    if config.format.json() {
        let path = sink.path("orbit.json");
        write_orbit_json(&path, &samples, &metadata)?;
        sink.record(path);
    }
    if config.plot {
        let path = sink.path("orbit.svg");
        write_plot(
            &path,
            "orbit trace",
            Scale::Linear,
            Scale::Linear,
            &[Series {
                label: "x_k",
                color: "steelblue",
                points: samples
                    .iter()
                    .map(|s| (s.index as f64, s.point.value()))
                    .collect(),
            }],
        )?;
        sink.record(path);
    }
    Ok(())
}

/// Keeps only the raw run-length statistics from the scaling table.
fn cmd_runlength(config: &RunConfig, sink: &mut Sink) -> Result<()> {
    let plan = trial_plan(config)?;
    let mut table = runlength_scaling_experiment(&plan);
    table.rows.retain(|r| r.statistic == "r_n" || r.statistic == "R_n");
    table.insert_metadata("experiment", "runlength".into());
    let table = write_table(config, sink, "runlength", table)?;
    if config.plot {
        plot_medians(
            sink,
            "runlength.svg",
            "median run lengths",
            Scale::Log,
            Scale::Log,
            &table,
            &["r_n", "R_n"],
        )?;
    }
    Ok(())
}

fn cmd_scaling(config: &RunConfig, sink: &mut Sink) -> Result<()> {
    let plan = trial_plan(config)?;
    let table = runlength_scaling_experiment(&plan);
    let table = write_table(config, sink, "scaling", table)?;
    if config.plot {
        plot_medians(
            sink,
            "scaling.svg",
            "run-length scaling ratios",
            Scale::Log,
            Scale::Linear,
            &table,
            &["ratio_r", "ratio_R"],
        )?;
    }
    Ok(())
}

fn cmd_density(config: &RunConfig, sink: &mut Sink) -> Result<()> {
    let density = match config.density_method {
        DensityMethodChoice::Ulam => ulam_density(config)?.2,
        DensityMethodChoice::Birkhoff => {
            let partition = make_partition(config)?;
            let x0 = sample_mu_typical(config.alpha, config.seed, config.burn_in);
            let n = *config.n_grid.last().unwrap();
            birkhoff_measure(config.alpha, x0, n, 0, &partition)?
        }
    };
    let mut metadata = base_metadata(config);
    metadata.insert("method".into(), config.density_method.as_str().into());
    if config.format.csv() {
        let path = sink.path("density.csv");
        write_density_csv(&path, &density, &metadata)?;
        sink.record(path);
    }
    if config.format.json() {
        let path = sink.path("density.json");
        write_density_json(&path, &density, &metadata)?;
        sink.record(path);
    }

    let cdf = cdf_scaling_fit(&density, config.x_lo, config.x_hi)?;
    let prefactor = density_prefactor(&density, config.alpha, config.x_lo, config.x_hi)?;
    write_summary(
        config,
        sink,
        "density_fits",
        json!({
            "cdf_fit": cdf,
            "expected_cdf_exponent": 1.0 - config.alpha.value(),
            "prefactor": prefactor,
        }),
    )?;

    if config.plot {
        let path = sink.path("density.svg");
        let points: Vec<(f64, f64)> = (0..density.partition().len())
            .map(|i| {
                let (lo, hi) = density.partition().cell(i);
                (0.5 * (lo + hi), density.density(i))
            })
            .collect();
        write_plot(
            &path,
            "invariant density (log-log)",
            Scale::Log,
            Scale::Log,
            &[Series {
                label: "h(x)",
                color: "steelblue",
                points,
            }],
        )?;
        sink.record(path);
    }
    Ok(())
}

fn cmd_cylinder(config: &RunConfig, sink: &mut Sink) -> Result<()> {
    let (_, _, density) = ulam_density(config)?;
    let a = config.alpha.value();
    let mut table = ExperimentTable::new();
    table.insert_metadata("experiment", "cylinder_masses".into());
    let digits: &[Digit] = match config.digit {
        DigitChoice::Zero => &[Digit::Zero],
        DigitChoice::One => &[Digit::One],
        DigitChoice::Both => &[Digit::Zero, Digit::One],
    };
    let mut fits = Map::new();
    for &digit in digits {
        let name = match digit {
            Digit::Zero => "zero",
            Digit::One => "one",
        };
        let mut ks = Vec::new();
        let mut masses = Vec::new();
        for k in config.k_min..=config.k_max {
            let mass = cylinder_measure(config.alpha, k, digit, &density)?;
            table.push(a, k as u64, 0, &format!("mass_{name}"), mass.value);
            table.push(
                a,
                k as u64,
                0,
                &format!("subcell_{name}"),
                mass.subcell as u8 as f64,
            );
            if mass.value > 0.0 {
                ks.push(k as f64);
                masses.push(mass.value);
            }
        }
        // One-cylinders decay geometrically in k, zero-cylinders
        // polynomially: fit in the matching coordinates.
        let fit = match digit {
            Digit::One => {
                let xs = ks.clone();
                let ys: Vec<f64> = masses.iter().map(|m| m.log2()).collect();
                crate::stats::linear_fit(&xs, &ys).map(|f| {
                    json!({
                        "slope_log2_per_k": f.slope,
                        "expected": -1.0,
                        "residual_rms": f.residual_rms,
                    })
                })
            }
            Digit::Zero => {
                let xs: Vec<f64> = ks.iter().map(|k| k.ln()).collect();
                let ys: Vec<f64> = masses.iter().map(|m| m.ln()).collect();
                crate::stats::linear_fit(&xs, &ys).map(|f| {
                    json!({
                        "loglog_slope": f.slope,
                        "expected": -(1.0 / a - 1.0),
                        "residual_rms": f.residual_rms,
                    })
                })
            }
        };
        match fit {
            Ok(value) => {
                fits.insert(name.to_string(), value);
            }
            Err(e) => {
                fits.insert(name.to_string(), json!({ "error": e.to_string() }));
            }
        }
    }
    table.finalize();
    write_table(config, sink, "cylinder", table)?;
    write_summary(config, sink, "cylinder_fits", Value::Object(fits))?;
    Ok(())
}

fn correlation_series(config: &RunConfig) -> Result<Vec<(&'static str, CorrelationSeries)>> {
    let set_a = Interval::new(config.set_a.0, config.set_a.1)?;
    let set_b = Interval::new(config.set_b.0, config.set_b.1)?;
    let lags: Vec<u64> = (1..=config.lag_max).collect();
    let mut out = Vec::new();
    if matches!(config.corr_method, CorrMethodChoice::Ulam | CorrMethodChoice::Both) {
        let (_, matrix, density) = ulam_density(config)?;
        out.push((
            "ulam",
            ulam_correlation(config.alpha, set_a, set_b, &lags, &matrix, &density)?,
        ));
    }
    if matches!(
        config.corr_method,
        CorrMethodChoice::Montecarlo | CorrMethodChoice::Both
    ) {
        out.push((
            "montecarlo",
            monte_carlo_correlation(
                config.alpha,
                set_a,
                set_b,
                &lags,
                config.samples,
                config.burn_in,
                config.seed,
            )?,
        ));
    }
    Ok(out)
}

fn cmd_correlation(config: &RunConfig, sink: &mut Sink) -> Result<()> {
    let series = correlation_series(config)?;
    let a = config.alpha.value();
    let mut table = ExperimentTable::new();
    table.insert_metadata("experiment", "correlation_decay".into());
    let mut fits = Map::new();
    for (name, s) in &series {
        table.insert_metadata(&format!("mu_a_{name}"), s.mu_a.to_string());
        table.insert_metadata(&format!("mu_b_{name}"), s.mu_b.to_string());
        table.insert_metadata(&format!("noise_floor_{name}"), s.noise_floor.to_string());
        for (i, &lag) in s.lags.iter().enumerate() {
            table.push(a, lag, 0, &format!("raw_{name}"), s.raw[i]);
            table.push(a, lag, 0, &format!("centered_{name}"), s.centered[i]);
        }
        let entry = match decay_exponent_fit(s, config.fit_lo, config.fit_hi) {
            Ok(fit) => json!({
                "fit": fit,
                "expected_exponent": 1.0 - 1.0 / a,
            }),
            Err(e) => json!({ "error": e.to_string() }),
        };
        fits.insert(name.to_string(), entry);
    }
    table.finalize();
    let table = write_table(config, sink, "correlation", table)?;
    write_summary(config, sink, "correlation_fits", Value::Object(fits))?;

    if config.plot {
        let path = sink.path("correlation.svg");
        let mut plot_series = Vec::new();
        let colors = ["steelblue", "firebrick"];
        for (i, (name, s)) in series.iter().enumerate() {
            plot_series.push(Series {
                label: *name,
                color: colors[i % colors.len()],
                points: s
                    .lags
                    .iter()
                    .zip(&s.centered)
                    .map(|(&lag, &c)| (lag as f64, c.abs()))
                    .collect(),
            });
        }
        write_plot(
            &path,
            "|correlation| vs lag (log-log)",
            Scale::Log,
            Scale::Log,
            &plot_series,
        )?;
        sink.record(path);
        let _ = table;
    }
    Ok(())
}

fn cmd_windows(config: &RunConfig, sink: &mut Sink) -> Result<()> {
    let plan = trial_plan(config)?;
    let mut combined = ExperimentTable::new();
    combined.insert_metadata("experiment", "erdos_renyi_windows".into());
    let modes: Vec<(&str, WindowMode)> = match config.window_mode {
        WindowChoice::Zero => vec![("zero", WindowMode::ZeroDigit { alpha1: config.alpha1 })],
        WindowChoice::One => vec![("one", WindowMode::OneDigit { coeff: config.coeff })],
        WindowChoice::Both => vec![
            ("zero", WindowMode::ZeroDigit { alpha1: config.alpha1 }),
            ("one", WindowMode::OneDigit { coeff: config.coeff }),
        ],
    };
    for (name, mode) in modes {
        let table = erdos_renyi_window_experiment(&plan, mode)?;
        if let Some(desc) = table.metadata.get("mode") {
            combined.insert_metadata(&format!("mode_{name}"), desc.clone());
        }
        for r in table.rows {
            combined.push(
                r.alpha,
                r.n,
                r.trial,
                &format!("{}_{name}", r.statistic),
                r.value,
            );
        }
    }
    combined.finalize();
    write_table(config, sink, "windows", combined)?;
    Ok(())
}

fn cmd_blocks(config: &RunConfig, sink: &mut Sink) -> Result<()> {
    let a = config.alpha.value();
    let mut table = ExperimentTable::new();
    table.insert_metadata("experiment", "block_short_runs".into());
    let variants: Vec<(&str, BlockVariant, f64)> = match config.variant {
        VariantChoice::Zero => vec![("zero", BlockVariant::ZeroRun, config.epsilon.unwrap_or(0.1))],
        VariantChoice::One => vec![("one", BlockVariant::OneRun, config.epsilon.unwrap_or(0.2))],
        VariantChoice::Both => vec![
            ("zero", BlockVariant::ZeroRun, config.epsilon.unwrap_or(0.1)),
            ("one", BlockVariant::OneRun, config.epsilon.unwrap_or(0.2)),
        ],
    };
    for (name, variant, epsilon) in variants {
        let schedule = BlockSchedule::new(variant, config.alpha, epsilon)?;
        table.insert_metadata(&format!("epsilon_{name}"), epsilon.to_string());
        for &n in &config.n_grid {
            let p = short_run_probability(
                config.alpha,
                &schedule,
                n,
                config.trials,
                config.seed,
                config.burn_in,
            )?;
            table.push(a, n, 0, &format!("short_run_{name}"), p);
            table.push(a, n, 0, &format!("threshold_{name}"), schedule.threshold(n) as f64);
            table.push(a, n, 0, &format!("block_len_{name}"), schedule.block_len(n) as f64);
        }
    }
    table.finalize();
    write_table(config, sink, "blocks", table)?;
    Ok(())
}

fn cmd_report(config: &RunConfig, sink: &mut Sink) -> Result<()> {
    let input = config.input.as_ref().expect("validated");
    let table = read_any_table(input)?;
    let mut summary = Map::new();
    for statistic in table.statistics() {
        let mut entries = Vec::new();
        for n in table.horizons(&statistic) {
            let values = table.values(&statistic, n);
            entries.push(json!({
                "n": n,
                "median": median(&values),
                "trials": values.len(),
            }));
        }
        summary.insert(statistic, Value::Array(entries));
    }
    write_summary(config, sink, "report", Value::Object(summary))?;
    Ok(())
}

fn read_any_table(path: &Path) -> Result<ExperimentTable> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => read_table_csv(path),
        Some("json") => read_table_json(path),
        other => Err(LabError::Config(format!(
            "input: expected a .csv or .json table, got extension {other:?}"
        ))),
    }
}

fn plot_medians(
    sink: &mut Sink,
    file: &str,
    title: &str,
    x_scale: Scale,
    y_scale: Scale,
    table: &ExperimentTable,
    statistics: &[&str],
) -> Result<()> {
    let colors = ["steelblue", "firebrick", "seagreen", "darkorange"];
    let point_sets: Vec<Vec<(f64, f64)>> = statistics
        .iter()
        .map(|stat| {
            table
                .horizons(stat)
                .into_iter()
                .map(|n| (n as f64, median(&table.values(stat, n))))
                .collect()
        })
        .collect();
    let series: Vec<Series<'_>> = statistics
        .iter()
        .zip(&point_sets)
        .enumerate()
        .map(|(i, (stat, points))| Series {
            label: stat,
            color: colors[i % colors.len()],
            points: points.clone(),
        })
        .collect();
    let path = sink.path(file);
    write_plot(&path, title, x_scale, y_scale, &series)?;
    sink.record(path);
    Ok(())
}
