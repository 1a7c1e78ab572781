use std::fs;
use std::path::{Path, PathBuf};

use localsyn::io_maps::{assemble_io, build_io_blocks};
use localsyn::model_match::{sweep, SweepRow};
use localsyn::oracle::{j_inf_report, OracleReport};
use localsyn::sl_maps::{assemble_sl, build_sl_blocks};
use localsyn::verify::{random_params, run_audit, AuditConfig, Report};
use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{self, dump_pair, MapDump, ParamDump};

/// Number of plant triples drawn by `verify --random-params`.
pub const RANDOM_PARAM_COUNT: usize = 5;

fn prepare_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

#[derive(Clone, Debug)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub j_inf: f64,
    pub csv_path: PathBuf,
}

impl SweepOutcome {
    pub fn failed_solves(&self) -> usize {
        self.rows.iter().map(|r| r.errors().len()).sum()
    }

    pub fn total_solves(&self) -> usize {
        self.rows
            .iter()
            .map(|r| r.sl.is_some() as usize + r.io.is_some() as usize)
            .sum()
    }
}

/// Solves every extent in the configured range and writes `sweep.csv`.
///
/// Per-row solver failures are recorded in the CSV status column rather than
/// returned as errors.
pub fn cmd_sweep(cfg: &RunConfig, emit_gnuplot: bool) -> Result<SweepOutcome, CliError> {
    prepare_dir(&cfg.output_dir)?;
    info!("computing J_inf on {} points", cfg.oracle.theta_points);
    let j_inf = j_inf_report(&cfg.plant, &cfg.oracle)?.j_inf;
    info!("sweeping E = {:?}", cfg.e_range);
    let rows = sweep(&cfg.plant, &cfg.e_range, &cfg.solver, cfg.param.into(), Some(j_inf));

    let csv_path = cfg.output_dir.join("sweep.csv");
    write_file(&csv_path, &output::sweep_csv(&rows, cfg.solver.horizon))?;
    if emit_gnuplot {
        write_file(&cfg.output_dir.join("sweep.gp"), &output::gnuplot_script("sweep.csv", j_inf))?;
    }
    Ok(SweepOutcome { rows, j_inf, csv_path })
}

/// Computes `J∞` and writes its integrand to `oracle.csv`.
pub fn cmd_oracle(cfg: &RunConfig) -> Result<OracleReport, CliError> {
    prepare_dir(&cfg.output_dir)?;
    let report = j_inf_report(&cfg.plant, &cfg.oracle)?;
    write_file(&cfg.output_dir.join("oracle.csv"), &output::oracle_csv(&report))?;
    Ok(report)
}

pub fn audit_config(cfg: &RunConfig, random: bool, inject_fault: bool) -> AuditConfig {
    let params = if random {
        random_params(&mut ChaCha8Rng::seed_from_u64(cfg.seed), RANDOM_PARAM_COUNT)
    } else {
        vec![cfg.plant]
    };
    AuditConfig {
        params,
        seed: cfg.seed,
        inject_fault,
        ..AuditConfig::default()
    }
}

/// Runs the verification battery. The caller decides the exit code from `Report::passed`.
pub fn cmd_verify(cfg: &RunConfig, random: bool, inject_fault: bool) -> Report {
    run_audit(&audit_config(cfg, random, inject_fault))
}

pub fn map_dump(cfg: &RunConfig, e: usize) -> Result<MapDump, CliError> {
    let p = &cfg.plant;
    Ok(MapDump {
        extent: e,
        plant: p.into(),
        sl: ParamDump {
            raw: dump_pair(&build_sl_blocks(p, e)),
            assembled: dump_pair(&assemble_sl(p, e)?),
        },
        io: ParamDump {
            raw: dump_pair(&build_io_blocks(p, e)),
            assembled: dump_pair(&assemble_io(p, e)?),
        },
    })
}

/// Writes `maps_E{e}.json` with the raw and assembled blocks of both parameterizations.
pub fn cmd_dump_maps(cfg: &RunConfig, e: usize) -> Result<PathBuf, CliError> {
    prepare_dir(&cfg.output_dir)?;
    let dump = map_dump(cfg, e)?;
    let json = serde_json::to_string_pretty(&dump).expect("map dump serializes");
    let path = cfg.output_dir.join(format!("maps_E{e}.json"));
    write_file(&path, &(json + "\n"))?;
    Ok(path)
}
