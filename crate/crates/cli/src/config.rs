//! Run configuration: a `key = value` file with `[section]` headers, overridden by flags.
//!
//! ```text
//! seed = 0
//! out = "results"
//!
//! [plant]
//! alpha = 1.5
//! beta = 1.0
//! kappa = 0.8
//!
//! [sweep]
//! e_min = 1
//! e_max = 10
//! param = "both"
//!
//! [solver]
//! horizon = 60
//! theta_points = 512
//! normal_eq_tol = 1e-9
//! convergence_rtol = 1e-8
//!
//! [oracle]
//! theta_points = 512
//! horizon = 240
//! ```

use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use localsyn::model_match::{SolverConfig, Which};
use localsyn::oracle::OracleConfig;
use localsyn::PlantParams;
use log::warn;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ParamChoice {
    Sl,
    Io,
    #[default]
    Both,
}

impl From<ParamChoice> for Which {
    fn from(p: ParamChoice) -> Self {
        match p {
            ParamChoice::Sl => Which::Sl,
            ParamChoice::Io => Which::Io,
            ParamChoice::Both => Which::Both,
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantSection {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub kappa: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub e_min: Option<i64>,
    pub e_max: Option<i64>,
    pub param: Option<ParamChoice>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub horizon: Option<usize>,
    pub theta_points: Option<usize>,
    pub normal_eq_tol: Option<f64>,
    pub convergence_rtol: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub theta_points: Option<usize>,
    pub horizon: Option<usize>,
}

/// Contents of a config file; every key is optional.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub plant: PlantSection,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub oracle: OracleSection,
}

impl FileConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|source| CliError::ParseConfig {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text, path)
    }
}

/// Flags shared by every command. Each one overrides the config key of the same name.
#[derive(Args, Clone, Debug, Default)]
pub struct Overrides {
    /// Config file with `[plant]`, `[sweep]`, `[solver]` and `[oracle]` sections
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub e_min: Option<i64>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub e_max: Option<i64>,
    /// FIR order of the free parameter
    #[arg(long, global = true)]
    pub horizon: Option<usize>,
    /// Spatial-frequency grid size for the oracle and the cost cross-check
    #[arg(long, global = true)]
    pub theta_points: Option<usize>,
    /// Output directory
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub param: Option<ParamChoice>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub plant: PlantParams,
    pub e_range: Vec<usize>,
    pub param: ParamChoice,
    pub solver: SolverConfig,
    pub oracle: OracleConfig,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            plant: PlantParams::default(),
            e_range: (1..=10).collect(),
            param: ParamChoice::Both,
            solver: SolverConfig::default(),
            oracle: OracleConfig::default(),
            output_dir: PathBuf::from("."),
            seed: 0,
        }
    }
}

impl RunConfig {
    /// Reads the config file named in `ov`, if any, and applies the flag overrides.
    pub fn load(ov: &Overrides) -> Result<Self, CliError> {
        let file = match &ov.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Self::resolve(&file, ov)
    }

    pub fn resolve(file: &FileConfig, ov: &Overrides) -> Result<Self, CliError> {
        let d = Self::default();
        let plant = PlantParams::new(
            ov.alpha.or(file.plant.alpha).unwrap_or(d.plant.alpha),
            ov.beta.or(file.plant.beta).unwrap_or(d.plant.beta),
            ov.kappa.or(file.plant.kappa).unwrap_or(d.plant.kappa),
        )?;
        for w in plant.warnings() {
            warn!("{w}");
        }

        let e_min = ov.e_min.or(file.sweep.e_min).unwrap_or(1);
        let e_max = ov.e_max.or(file.sweep.e_max).unwrap_or(10);
        let e_range = extent_range(e_min, e_max)?;

        let ds = d.solver;
        let theta_points = ov.theta_points.or(file.solver.theta_points);
        let solver = SolverConfig {
            horizon: ov.horizon.or(file.solver.horizon).unwrap_or(ds.horizon),
            theta_grid: theta_points.unwrap_or(ds.theta_grid),
            normal_eq_tol: file.solver.normal_eq_tol.unwrap_or(ds.normal_eq_tol),
            convergence_rtol: file.solver.convergence_rtol.unwrap_or(ds.convergence_rtol),
        };
        solver.validate()?;

        let oracle = OracleConfig {
            theta_points: ov
                .theta_points
                .or(file.oracle.theta_points)
                .unwrap_or(d.oracle.theta_points),
            horizon: file
                .oracle
                .horizon
                .unwrap_or_else(|| d.oracle.horizon.max(4 * solver.horizon)),
        };
        oracle.validate_against(&solver)?;

        Ok(Self {
            plant,
            e_range,
            param: ov.param.or(file.sweep.param).unwrap_or_default(),
            solver,
            oracle,
            output_dir: ov.out.clone().or_else(|| file.out.clone()).unwrap_or(d.output_dir),
            seed: ov.seed.or(file.seed).unwrap_or(d.seed),
        })
    }
}

fn extent_range(e_min: i64, e_max: i64) -> Result<Vec<usize>, CliError> {
    if e_min < 0 {
        return Err(CliError::Config(format!("e_min = {e_min} is negative")));
    }
    if e_max < e_min {
        return Err(CliError::Config(format!("extent range {e_min}..={e_max} is empty")));
    }
    Ok((e_min as usize..=e_max as usize).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> FileConfig {
        FileConfig::parse(text, Path::new("test.toml")).unwrap()
    }

    #[test]
    fn defaults_match_reference_run() {
        let cfg = RunConfig::resolve(&FileConfig::default(), &Overrides::default()).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(cfg.e_range.len(), 10);
    }

    #[test]
    fn file_values_and_flag_overrides() {
        let file = parse(
            "seed = 7\n[plant]\nalpha = 0.5\nkappa = 0.1\n[sweep]\ne_min = 0\ne_max = 3\nparam = \"io\"\n[solver]\nhorizon = 30\n",
        );
        let ov = Overrides {
            kappa: Some(-0.2),
            e_max: Some(2),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(&file, &ov).unwrap();
        assert_eq!(cfg.plant, PlantParams::new(0.5, 1.0, -0.2).unwrap());
        assert_eq!(cfg.e_range, vec![0, 1, 2]);
        assert_eq!(cfg.param, ParamChoice::Io);
        assert_eq!(cfg.solver.horizon, 30);
        assert_eq!(cfg.oracle.horizon, 240);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn oracle_horizon_follows_solver_horizon() {
        let ov = Overrides {
            horizon: Some(100),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(&FileConfig::default(), &ov).unwrap();
        assert_eq!(cfg.oracle.horizon, 400);
    }

    #[test]
    fn theta_points_flag_sets_both_grids() {
        let ov = Overrides {
            theta_points: Some(256),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(&FileConfig::default(), &ov).unwrap();
        assert_eq!(cfg.solver.theta_grid, 256);
        assert_eq!(cfg.oracle.theta_points, 256);
    }

    #[test]
    fn empty_or_negative_range_is_rejected() {
        for (lo, hi) in [(3, 2), (-1, 4)] {
            let ov = Overrides {
                e_min: Some(lo),
                e_max: Some(hi),
                ..Default::default()
            };
            let err = RunConfig::resolve(&FileConfig::default(), &ov).unwrap_err();
            assert_eq!(err.exit_code(), 2);
        }
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(FileConfig::parse("[plant]\ngamma = 1\n", Path::new("x")).is_err());
        assert!(FileConfig::parse("[sweep]\nparam = \"both-ish\"\n", Path::new("x")).is_err());
        let file = parse("[oracle]\nhorizon = 100\n");
        assert!(RunConfig::resolve(&file, &Overrides::default()).is_err());
        let file = parse("[plant]\nalpha = nan\n");
        assert!(RunConfig::resolve(&file, &Overrides::default()).is_err());
    }
}
