//! Cross-module integration: the Ulam route against the Monte Carlo
//! route, the density away from the neutral fixed point, and the CLI
//! end-to-end contract.

use clap::Parser;
use runlength_lab::cli::{config::RunConfig, run_command, Cli};
use runlength_lab::experiments::sample_mu_typical;
use runlength_lab::map::Alpha;
use runlength_lab::measure::{
    birkhoff_measure, stationary_density, ulam_matrix, DensityEstimate, Grading, Partition,
};
use runlength_lab::stats::median;

fn alpha(v: f64) -> Alpha {
    Alpha::new(v).unwrap()
}

fn ulam_density(a: f64, cells: usize) -> DensityEstimate {
    let al = alpha(a);
    let partition = Partition::new(cells, Grading::geometric_for(al)).unwrap();
    let matrix = ulam_matrix(al, &partition).unwrap();
    stationary_density(&matrix, &partition).unwrap()
}

/// The spectral (Ulam) and sampling (Birkhoff) routes to the invariant
/// measure agree: total variation distance at most 0.05 on 256 graded
/// cells with a 10^7-step orbit.
#[test]
fn birkhoff_orbit_matches_stationary_density() {
    let al = alpha(0.5);
    let stationary = ulam_density(0.5, 256);
    let x0 = sample_mu_typical(al, 20_240, 10_000);
    let empirical =
        birkhoff_measure(al, x0, 10_000_000, 0, stationary.partition()).unwrap();
    let tv = stationary.total_variation(&empirical).unwrap();
    assert!(tv <= 0.05, "total variation {tv} too large");
}

/// Away from the neutral fixed point the density is bounded above and
/// below: on [1/2, 1) the max/min cell-density ratio stays within a
/// factor 10 for alpha in {0.4, 0.5, 0.6}.
#[test]
fn density_bounded_on_right_half() {
    for a in [0.4, 0.5, 0.6] {
        let density = ulam_density(a, 256);
        let mut lo = f64::MAX;
        let mut hi = f64::MIN;
        for i in 0..density.partition().len() {
            let (cell_lo, _) = density.partition().cell(i);
            if cell_lo >= 0.5 {
                lo = lo.min(density.density(i));
                hi = hi.max(density.density(i));
            }
        }
        assert!(lo > 0.0, "alpha {a}: vanishing density on [1/2, 1)");
        assert!(hi / lo <= 10.0, "alpha {a}: density ratio {} on [1/2, 1)", hi / lo);
    }
}

fn parse(args: &[&str]) -> RunConfig {
    let mut argv = vec!["runlength-lab"];
    argv.extend_from_slice(args);
    RunConfig::from_cli(Cli::try_parse_from(argv).unwrap()).unwrap()
}

/// The documented orbit example: three steps from 0.75 at alpha = 0.5
/// give (0, 0.75, 1), (1, 0.5, 1), (2, 0, 0).
#[test]
fn cli_orbit_example() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let config = parse(&[
        "orbit", "--x0", "0.75", "--n", "3", "--alpha", "0.5", "--out",
        out.to_str().unwrap(), "--format", "csv",
    ]);
    run_command(&config).unwrap();
    let text = std::fs::read_to_string(out.join("orbit.csv")).unwrap();
    let rows: Vec<&str> = text
        .lines()
        .filter(|l| !l.starts_with('#') && !l.is_empty())
        .collect();
    assert_eq!(rows[0], "index,point,digit");
    assert_eq!(rows[1], "0,0.75,1");
    assert_eq!(rows[2], "1,0.5,1");
    assert_eq!(rows[3], "2,0,0");
    assert_eq!(rows.len(), 4);
}

/// scaling then report: the report medians equal the medians computed
/// directly from the table rows.
#[test]
fn cli_report_aggregates_scaling_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s");
    let config = parse(&[
        "scaling", "--n", "500,5000", "--trials", "7", "--seed", "11", "--out",
        out.to_str().unwrap(),
    ]);
    run_command(&config).unwrap();

    let table =
        runlength_lab::cli::output::read_table_csv(&out.join("scaling.csv")).unwrap();
    let expected = median(&table.values("r_n", 5000));

    let report_out = dir.path().join("r");
    let report_config = parse(&[
        "report", "--input",
        out.join("scaling.csv").to_str().unwrap(),
        "--out", report_out.to_str().unwrap(),
    ]);
    run_command(&report_config).unwrap();
    let doc: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(report_out.join("report.json")).unwrap(),
    )
    .unwrap();
    let entries = doc["summary"]["r_n"].as_array().unwrap();
    let entry = entries.iter().find(|e| e["n"] == 5000).unwrap();
    assert_eq!(entry["median"].as_f64().unwrap(), expected);
    assert_eq!(entry["trials"], 7);
}

/// CSV and JSON encodings of one run parse back to the same table.
#[test]
fn cli_formats_round_trip_to_equal_tables() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    let config = parse(&[
        "runlength", "--n", "200,2000", "--trials", "3", "--seed", "5", "--out",
        out.to_str().unwrap(), "--format", "both",
    ]);
    run_command(&config).unwrap();
    let csv = runlength_lab::cli::output::read_table_csv(&out.join("runlength.csv")).unwrap();
    let json = runlength_lab::cli::output::read_table_json(&out.join("runlength.json")).unwrap();
    assert_eq!(csv, json);
    assert!(!csv.rows.is_empty());
    assert!(csv.metadata.contains_key("config_hash"));
    assert!(csv.metadata.contains_key("seed"));
}

/// A failing command removes its partial outputs (including the config
/// echo) before the error propagates.
#[test]
fn cli_failure_removes_partial_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f");
    // Endpoint 0.3 does not sit on a boundary of the default geometric
    // partition, so the Ulam correlation must refuse it.
    let config = parse(&[
        "correlation", "--a-lo", "0.3", "--a-hi", "0.75", "--cells", "64", "--out",
        out.to_str().unwrap(),
    ]);
    let err = run_command(&config).unwrap_err();
    assert_eq!(err.exit_code(), 2, "unexpected error: {err}");
    if out.exists() {
        let leftovers: Vec<_> = std::fs::read_dir(&out).unwrap().collect();
        assert!(leftovers.is_empty(), "leftover artifacts: {leftovers:?}");
    }
}

/// RUNLENGTH_LAB_OUT overrides --out (checked against the real binary so
/// the environment of this test process stays untouched).
#[test]
fn cli_env_var_overrides_out() {
    let dir = tempfile::tempdir().unwrap();
    let flag_out = dir.path().join("flag");
    let env_out = dir.path().join("env");
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_runlength-lab"))
        .args([
            "orbit", "--x0", "0.75", "--n", "3", "--out",
            flag_out.to_str().unwrap(), "--format", "csv",
        ])
        .env("RUNLENGTH_LAB_OUT", &env_out)
        .status()
        .unwrap();
    assert!(status.success());
    assert!(env_out.join("orbit.csv").exists());
    assert!(!flag_out.exists());
}

/// Config errors surface as process exit code 2.
#[test]
fn cli_config_error_exits_with_code_two() {
    let output = std::process::Command::new(env!("CARGO_BIN_EXE_runlength-lab"))
        .args(["scaling", "--alpha", "1.2"])
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("alpha"), "stderr: {stderr}");
}

/// The plot flag produces an SVG next to the tables.
#[test]
fn cli_plot_flag_writes_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p");
    let config = parse(&[
        "scaling", "--n", "100,1000", "--trials", "3", "--seed", "2", "--plot", "--out",
        out.to_str().unwrap(),
    ]);
    let files = run_command(&config).unwrap();
    assert!(files.iter().any(|f| f.extension().is_some_and(|e| e == "svg")));
    let svg = std::fs::read_to_string(out.join("scaling.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}
