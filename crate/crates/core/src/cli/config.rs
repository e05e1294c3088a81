//! Configuration: command-line flags, optional TOML config file, and the
//! merged, fully validated `RunConfig`. Flags override file values;
//! `RUNLENGTH_LAB_OUT` overrides both for the output directory.

use crate::error::{LabError, Result};
use crate::map::Alpha;
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "runlength-lab",
    version,
    about = "Numerical laboratory for run lengths of the intermittent map family"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<CommandArg>,

    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Map parameter in (0, 1).
    #[arg(long, global = true)]
    pub alpha: Option<f64>,

    /// Horizon grid, comma separated (e.g. 10000,100000,1000000).
    #[arg(long, global = true)]
    pub n: Option<String>,

    /// Independent trials.
    #[arg(long, global = true)]
    pub trials: Option<u32>,

    /// Master seed; per-trial seeds derive from it.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Partition cells for density/correlation work.
    #[arg(long, global = true)]
    pub cells: Option<usize>,

    /// Partition grading.
    #[arg(long, global = true, value_enum)]
    pub grading: Option<GradingChoice>,

    /// Burn-in steps before a seeded start point is considered typical.
    #[arg(long = "burn-in", global = true)]
    pub burn_in: Option<u64>,

    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// Output formats.
    #[arg(long, global = true, value_enum)]
    pub format: Option<FormatChoice>,

    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub plot: bool,

    /// Worker thread cap.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum CommandArg {
    /// Trace one orbit: index, point, digit.
    Orbit {
        /// Start point in [0, 1); a seeded typical draw when omitted.
        #[arg(long)]
        x0: Option<f64>,
    },
    /// Maximal run lengths r_n and R_n per trial and horizon.
    Runlength,
    /// Invariant density estimate with scaling fits.
    Density {
        #[arg(long, value_enum)]
        method: Option<DensityMethodChoice>,
        /// Lower end of the scaling-fit window.
        #[arg(long = "x-lo")]
        x_lo: Option<f64>,
        /// Upper end of the scaling-fit window.
        #[arg(long = "x-hi")]
        x_hi: Option<f64>,
    },
    /// Masses of constant-digit cylinders against their predicted decay.
    Cylinder {
        #[arg(long, value_enum)]
        digit: Option<DigitChoice>,
        #[arg(long = "k-min")]
        k_min: Option<usize>,
        #[arg(long = "k-max")]
        k_max: Option<usize>,
    },
    /// Correlation decay between two indicator sets.
    Correlation {
        #[arg(long, value_enum)]
        method: Option<CorrMethodChoice>,
        #[arg(long = "a-lo")]
        a_lo: Option<f64>,
        #[arg(long = "a-hi")]
        a_hi: Option<f64>,
        #[arg(long = "b-lo")]
        b_lo: Option<f64>,
        #[arg(long = "b-hi")]
        b_hi: Option<f64>,
        /// Orbit samples for the Monte Carlo route.
        #[arg(long)]
        samples: Option<u64>,
        /// Largest lag in the series.
        #[arg(long = "lag-max")]
        lag_max: Option<u64>,
        /// Lag range for the decay-exponent fit.
        #[arg(long = "fit-lo")]
        fit_lo: Option<u64>,
        #[arg(long = "fit-hi")]
        fit_hi: Option<u64>,
    },
    /// Run-length scaling ratios against the limit theorems.
    Scaling,
    /// Maximal windowed digit averages (Erdos-Renyi style).
    Windows {
        #[arg(long, value_enum)]
        mode: Option<WindowChoice>,
        /// Window exponent for the zero-digit mode; must be < alpha.
        #[arg(long)]
        alpha1: Option<f64>,
        /// log2-coefficient for the one-digit mode, in (0, 1].
        #[arg(long)]
        coeff: Option<f64>,
    },
    /// Short-run probabilities under the block-decomposition schedules.
    Blocks {
        #[arg(long, value_enum)]
        variant: Option<VariantChoice>,
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Per-horizon medians of an existing statistic table.
    Report {
        /// Existing table (.csv or .json).
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

macro_rules! choice_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
        #[serde(rename_all = "lowercase")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub fn as_str(self) -> &'static str {
                match self {
                    $(Self::$variant => $text),+
                }
            }
        }
    };
}

choice_enum!(GradingChoice { Uniform => "uniform", Geometric => "geometric" });
choice_enum!(FormatChoice { Csv => "csv", Json => "json", Both => "both" });
choice_enum!(DensityMethodChoice { Ulam => "ulam", Birkhoff => "birkhoff" });
choice_enum!(DigitChoice { Zero => "zero", One => "one", Both => "both" });
choice_enum!(CorrMethodChoice { Ulam => "ulam", Montecarlo => "montecarlo", Both => "both" });
choice_enum!(WindowChoice { Zero => "zero", One => "one", Both => "both" });
choice_enum!(VariantChoice { Zero => "zero", One => "one", Both => "both" });

impl FormatChoice {
    pub fn csv(self) -> bool {
        matches!(self, FormatChoice::Csv | FormatChoice::Both)
    }

    pub fn json(self) -> bool {
        matches!(self, FormatChoice::Json | FormatChoice::Both)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Orbit,
    Runlength,
    Density,
    Cylinder,
    Correlation,
    Scaling,
    Windows,
    Blocks,
    Report,
}

impl CommandKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandKind::Orbit => "orbit",
            CommandKind::Runlength => "runlength",
            CommandKind::Density => "density",
            CommandKind::Cylinder => "cylinder",
            CommandKind::Correlation => "correlation",
            CommandKind::Scaling => "scaling",
            CommandKind::Windows => "windows",
            CommandKind::Blocks => "blocks",
            CommandKind::Report => "report",
        }
    }

    fn from_name(name: &str) -> Result<Self> {
        match name {
            "orbit" => Ok(CommandKind::Orbit),
            "runlength" => Ok(CommandKind::Runlength),
            "density" => Ok(CommandKind::Density),
            "cylinder" => Ok(CommandKind::Cylinder),
            "correlation" => Ok(CommandKind::Correlation),
            "scaling" => Ok(CommandKind::Scaling),
            "windows" => Ok(CommandKind::Windows),
            "blocks" => Ok(CommandKind::Blocks),
            "report" => Ok(CommandKind::Report),
            other => Err(LabError::Config(format!(
                "command: unknown command {other:?}"
            ))),
        }
    }
}

/// Horizon grid in a config file: a single integer or a list.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum NGrid {
    One(u64),
    Many(Vec<u64>),
}

impl NGrid {
    fn into_vec(self) -> Vec<u64> {
        match self {
            NGrid::One(n) => vec![n],
            NGrid::Many(v) => v,
        }
    }
}

/// Raw key-value view of a config file. Unknown keys are rejected with
/// the key named in the error.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<String>,
    alpha: Option<f64>,
    n: Option<NGrid>,
    trials: Option<u32>,
    seed: Option<u64>,
    cells: Option<usize>,
    grading: Option<GradingChoice>,
    burn_in: Option<u64>,
    out: Option<PathBuf>,
    format: Option<FormatChoice>,
    plot: Option<bool>,
    threads: Option<usize>,
    x0: Option<f64>,
    method: Option<String>,
    x_lo: Option<f64>,
    x_hi: Option<f64>,
    digit: Option<DigitChoice>,
    k_min: Option<usize>,
    k_max: Option<usize>,
    a_lo: Option<f64>,
    a_hi: Option<f64>,
    b_lo: Option<f64>,
    b_hi: Option<f64>,
    samples: Option<u64>,
    lag_max: Option<u64>,
    fit_lo: Option<u64>,
    fit_hi: Option<u64>,
    mode: Option<WindowChoice>,
    alpha1: Option<f64>,
    coeff: Option<f64>,
    variant: Option<VariantChoice>,
    epsilon: Option<f64>,
    input: Option<PathBuf>,
}

impl FileConfig {
    fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| LabError::Config(format!("config file: {e}")))
    }
}

/// The merged, validated configuration for one invocation.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: CommandKind,
    pub alpha: Alpha,
    pub n_grid: Vec<u64>,
    pub trials: u32,
    pub seed: u64,
    pub cells: usize,
    pub grading: GradingChoice,
    pub burn_in: u64,
    pub out: PathBuf,
    pub format: FormatChoice,
    pub plot: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    pub density_method: DensityMethodChoice,
    pub x_lo: f64,
    pub x_hi: f64,
    pub digit: DigitChoice,
    pub k_min: usize,
    pub k_max: usize,
    pub corr_method: CorrMethodChoice,
    pub set_a: (f64, f64),
    pub set_b: (f64, f64),
    pub samples: u64,
    pub lag_max: u64,
    pub fit_lo: u64,
    pub fit_hi: u64,
    pub window_mode: WindowChoice,
    pub alpha1: f64,
    pub coeff: f64,
    pub variant: VariantChoice,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
}

fn parse_n_flag(text: &str) -> Result<Vec<u64>> {
    text.split(',')
        .map(|part| {
            part.trim()
                .parse::<u64>()
                .map_err(|_| LabError::Config(format!("n: bad horizon {part:?}")))
        })
        .collect()
}

impl RunConfig {
    /// Merges flags over file values over defaults and validates the result.
    pub fn from_cli(cli: Cli) -> Result<Self> {
        let file = match &cli.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };

        let command = match &cli.command {
            Some(arg) => arg.kind(),
            None => match &file.command {
                Some(name) => CommandKind::from_name(name)?,
                None => {
                    return Err(LabError::Config(
                        "command: missing (give a subcommand or set command= in the config file)"
                            .into(),
                    ))
                }
            },
        };

        let alpha_value = cli.alpha.or(file.alpha).unwrap_or(0.5);
        let alpha = Alpha::new(alpha_value)?;

        let n_grid = match &cli.n {
            Some(text) => parse_n_flag(text)?,
            None => file
                .n
                .clone()
                .map(NGrid::into_vec)
                .unwrap_or_else(|| vec![10_000, 100_000, 1_000_000]),
        };
        if n_grid.is_empty() {
            return Err(LabError::Config("n: empty horizon grid".into()));
        }
        for w in n_grid.windows(2) {
            if w[1] <= w[0] {
                return Err(LabError::Config(format!(
                    "n: grid must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if n_grid[0] == 0 {
            return Err(LabError::Config("n: horizons must be >= 1".into()));
        }

        let trials = cli.trials.or(file.trials).unwrap_or(10);
        if trials == 0 {
            return Err(LabError::Config("trials: must be >= 1".into()));
        }
        let cells = cli.cells.or(file.cells).unwrap_or(4096);
        if cells < 2 {
            return Err(LabError::Config(format!(
                "cells: need at least 2, got {cells}"
            )));
        }

        let out = std::env::var_os("RUNLENGTH_LAB_OUT")
            .map(PathBuf::from)
            .or(cli.out)
            .or(file.out)
            .unwrap_or_else(|| PathBuf::from("out"));

        // Per-command flag values, present only when the subcommand came
        // from the command line.
        let mut config = RunConfig {
            command,
            alpha,
            n_grid,
            trials,
            seed: cli.seed.or(file.seed).unwrap_or(1),
            cells,
            grading: cli
                .grading
                .or(file.grading)
                .unwrap_or(GradingChoice::Geometric),
            burn_in: cli.burn_in.or(file.burn_in).unwrap_or(1000),
            out,
            format: cli.format.or(file.format).unwrap_or(FormatChoice::Both),
            plot: cli.plot || file.plot.unwrap_or(false),
            threads: cli.threads.or(file.threads),
            x0: file.x0,
            density_method: parse_method_name(file.method.as_deref())?
                .unwrap_or(DensityMethodChoice::Ulam),
            x_lo: file.x_lo.unwrap_or(1e-3),
            x_hi: file.x_hi.unwrap_or(1e-1),
            digit: file.digit.unwrap_or(DigitChoice::Both),
            k_min: file.k_min.unwrap_or(2),
            k_max: file.k_max.unwrap_or(12),
            corr_method: parse_corr_name(file.method.as_deref())?
                .unwrap_or(CorrMethodChoice::Ulam),
            set_a: (file.a_lo.unwrap_or(0.5), file.a_hi.unwrap_or(0.75)),
            set_b: (file.b_lo.unwrap_or(0.75), file.b_hi.unwrap_or(1.0)),
            samples: file.samples.unwrap_or(2_000_000),
            lag_max: file.lag_max.unwrap_or(64),
            fit_lo: file.fit_lo.unwrap_or(8),
            fit_hi: file.fit_hi.unwrap_or(64),
            window_mode: file.mode.unwrap_or(WindowChoice::Both),
            alpha1: file.alpha1.unwrap_or(0.3),
            coeff: file.coeff.unwrap_or(0.9),
            variant: file.variant.unwrap_or(VariantChoice::Both),
            epsilon: file.epsilon,
            input: file.input,
        };

        if let Some(arg) = cli.command {
            config.apply_subcommand(arg);
        }
        config.validate()?;
        Ok(config)
    }

    fn apply_subcommand(&mut self, arg: CommandArg) {
        match arg {
            CommandArg::Orbit { x0 } => {
                if x0.is_some() {
                    self.x0 = x0;
                }
            }
            CommandArg::Runlength | CommandArg::Scaling => {}
            CommandArg::Density { method, x_lo, x_hi } => {
                if let Some(m) = method {
                    self.density_method = m;
                }
                if let Some(v) = x_lo {
                    self.x_lo = v;
                }
                if let Some(v) = x_hi {
                    self.x_hi = v;
                }
            }
            CommandArg::Cylinder { digit, k_min, k_max } => {
                if let Some(d) = digit {
                    self.digit = d;
                }
                if let Some(v) = k_min {
                    self.k_min = v;
                }
                if let Some(v) = k_max {
                    self.k_max = v;
                }
            }
            CommandArg::Correlation {
                method,
                a_lo,
                a_hi,
                b_lo,
                b_hi,
                samples,
                lag_max,
                fit_lo,
                fit_hi,
            } => {
                if let Some(m) = method {
                    self.corr_method = m;
                }
                if let Some(v) = a_lo {
                    self.set_a.0 = v;
                }
                if let Some(v) = a_hi {
                    self.set_a.1 = v;
                }
                if let Some(v) = b_lo {
                    self.set_b.0 = v;
                }
                if let Some(v) = b_hi {
                    self.set_b.1 = v;
                }
                if let Some(v) = samples {
                    self.samples = v;
                }
                if let Some(v) = lag_max {
                    self.lag_max = v;
                }
                if let Some(v) = fit_lo {
                    self.fit_lo = v;
                }
                if let Some(v) = fit_hi {
                    self.fit_hi = v;
                }
            }
            CommandArg::Windows { mode, alpha1, coeff } => {
                if let Some(m) = mode {
                    self.window_mode = m;
                }
                if let Some(v) = alpha1 {
                    self.alpha1 = v;
                }
                if let Some(v) = coeff {
                    self.coeff = v;
                }
            }
            CommandArg::Blocks { variant, epsilon } => {
                if let Some(v) = variant {
                    self.variant = v;
                }
                if epsilon.is_some() {
                    self.epsilon = epsilon;
                }
            }
            CommandArg::Report { input } => {
                if input.is_some() {
                    self.input = input;
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self.command {
            CommandKind::Orbit => {
                if let Some(x0) = self.x0 {
                    if !(0.0..1.0).contains(&x0) {
                        return Err(LabError::Config(format!(
                            "x0: must lie in [0, 1), got {x0}"
                        )));
                    }
                }
            }
            CommandKind::Density => {
                if !(0.0 < self.x_lo && self.x_lo < self.x_hi && self.x_hi < 0.5) {
                    return Err(LabError::Config(format!(
                        "x_lo/x_hi: need 0 < x_lo < x_hi < 1/2, got [{}, {}]",
                        self.x_lo, self.x_hi
                    )));
                }
            }
            CommandKind::Cylinder => {
                if self.k_min < 1 || self.k_max < self.k_min {
                    return Err(LabError::Config(format!(
                        "k_min/k_max: need 1 <= k_min <= k_max, got [{}, {}]",
                        self.k_min, self.k_max
                    )));
                }
            }
            CommandKind::Correlation => {
                for (name, (lo, hi)) in [("a", self.set_a), ("b", self.set_b)] {
                    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
                        return Err(LabError::Config(format!(
                            "{name}_lo/{name}_hi: need 0 <= lo < hi <= 1, got [{lo}, {hi}]"
                        )));
                    }
                }
                if self.lag_max == 0 {
                    return Err(LabError::Config("lag_max: must be >= 1".into()));
                }
                if self.fit_lo == 0 || self.fit_hi < self.fit_lo || self.fit_hi > self.lag_max {
                    return Err(LabError::Config(format!(
                        "fit_lo/fit_hi: need 1 <= fit_lo <= fit_hi <= lag_max, got [{}, {}] with lag_max {}",
                        self.fit_lo, self.fit_hi, self.lag_max
                    )));
                }
            }
            CommandKind::Windows => {
                if self.window_mode != WindowChoice::One
                    && !(self.alpha1 > 0.0 && self.alpha1 < self.alpha.value())
                {
                    return Err(LabError::Config(format!(
                        "alpha1: need 0 < alpha1 < alpha, got alpha1 = {}, alpha = {}",
                        self.alpha1,
                        self.alpha.value()
                    )));
                }
                if self.window_mode != WindowChoice::Zero
                    && !(self.coeff > 0.0 && self.coeff <= 1.0)
                {
                    return Err(LabError::Config(format!(
                        "coeff: need 0 < coeff <= 1, got {}",
                        self.coeff
                    )));
                }
            }
            CommandKind::Blocks => {
                if let Some(eps) = self.epsilon {
                    if !(eps > 0.0 && eps < 1.0) {
                        return Err(LabError::Config(format!(
                            "epsilon: must lie in (0, 1), got {eps}"
                        )));
                    }
                }
            }
            CommandKind::Report => {
                if self.input.is_none() {
                    return Err(LabError::Config(
                        "input: report needs an existing table file".into(),
                    ));
                }
            }
            CommandKind::Runlength | CommandKind::Scaling => {}
        }
        Ok(())
    }

    /// Effective config as TOML — the echo written next to the outputs.
    pub fn echo_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    /// Hex SHA-256 of the effective config echo.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.echo_toml().as_bytes());
        let mut hex = String::with_capacity(64);
        for byte in digest {
            hex.push_str(&format!("{byte:02x}"));
        }
        hex
    }
}

impl CommandArg {
    fn kind(&self) -> CommandKind {
        match self {
            CommandArg::Orbit { .. } => CommandKind::Orbit,
            CommandArg::Runlength => CommandKind::Runlength,
            CommandArg::Density { .. } => CommandKind::Density,
            CommandArg::Cylinder { .. } => CommandKind::Cylinder,
            CommandArg::Correlation { .. } => CommandKind::Correlation,
            CommandArg::Scaling => CommandKind::Scaling,
            CommandArg::Windows { .. } => CommandKind::Windows,
            CommandArg::Blocks { .. } => CommandKind::Blocks,
            CommandArg::Report { .. } => CommandKind::Report,
        }
    }
}

/// The `method` file key is shared by density (ulam/birkhoff) and
/// correlation (ulam/montecarlo/both); each command parses only the names
/// it understands.
fn parse_method_name(name: Option<&str>) -> Result<Option<DensityMethodChoice>> {
    Ok(match name {
        Some("ulam") => Some(DensityMethodChoice::Ulam),
        Some("birkhoff") => Some(DensityMethodChoice::Birkhoff),
        _ => None,
    })
}

fn parse_corr_name(name: Option<&str>) -> Result<Option<CorrMethodChoice>> {
    Ok(match name {
        Some("ulam") => Some(CorrMethodChoice::Ulam),
        Some("montecarlo") => Some(CorrMethodChoice::Montecarlo),
        Some("both") => Some(CorrMethodChoice::Both),
        _ => None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn parse(args: &[&str]) -> Result<RunConfig> {
        let mut argv = vec!["runlength-lab"];
        argv.extend_from_slice(args);
        RunConfig::from_cli(Cli::try_parse_from(argv).expect("clap parse"))
    }

    #[test]
    fn minimal_file_config_is_valid() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        let mut f = std::fs::File::create(&path).unwrap();
        writeln!(f, "command = \"orbit\"\nalpha = 0.5\nn = 100\nseed = 1").unwrap();
        let config = parse(&["--config", path.to_str().unwrap()]).unwrap();
        assert_eq!(config.command, CommandKind::Orbit);
        assert_eq!(config.alpha.value(), 0.5);
        assert_eq!(config.n_grid, vec![100]);
        assert_eq!(config.seed, 1);
    }

    #[test]
    fn alpha_out_of_range_names_constraint() {
        let err = parse(&["scaling", "--alpha", "1.2"]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("0 < alpha < 1"), "got: {msg}");
    }

    #[test]
    fn alpha1_must_stay_below_alpha() {
        let err = parse(&["windows", "--alpha", "0.5", "--alpha1", "0.6"]).unwrap_err();
        assert!(err.to_string().contains("alpha1"), "got: {err}");
    }

    #[test]
    fn unknown_file_key_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "command = \"orbit\"\nbogus_key = 3\n").unwrap();
        let err = parse(&["--config", path.to_str().unwrap()]).unwrap_err();
        assert!(err.to_string().contains("bogus_key"), "got: {err}");
    }

    #[test]
    fn flags_override_file_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.toml");
        std::fs::write(&path, "command = \"scaling\"\nalpha = 0.4\ntrials = 3\n").unwrap();
        let config = parse(&["--config", path.to_str().unwrap(), "--alpha", "0.6"]).unwrap();
        assert_eq!(config.alpha.value(), 0.6);
        assert_eq!(config.trials, 3);
    }

    #[test]
    fn n_flag_parses_comma_list() {
        let config = parse(&["scaling", "--n", "10, 100,1000"]).unwrap();
        assert_eq!(config.n_grid, vec![10, 100, 1000]);
    }

    #[test]
    fn decreasing_grid_rejected() {
        let err = parse(&["scaling", "--n", "100,10"]).unwrap_err();
        assert!(err.to_string().contains("increasing"), "got: {err}");
    }

    #[test]
    fn report_requires_input() {
        let err = parse(&["report"]).unwrap_err();
        assert!(err.to_string().contains("input"), "got: {err}");
    }

    #[test]
    fn missing_command_rejected() {
        let err = parse(&[]).unwrap_err();
        assert!(err.to_string().contains("command"), "got: {err}");
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = parse(&["scaling", "--seed", "1"]).unwrap();
        let b = parse(&["scaling", "--seed", "1"]).unwrap();
        let c = parse(&["scaling", "--seed", "2"]).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn config_exit_code_is_two() {
        let err = parse(&["scaling", "--alpha", "1.2"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
