use clap::{Parser, Subcommand};
use log::error;

use crate::commands::{cmd_dump_maps, cmd_oracle, cmd_sweep, cmd_verify};
use crate::config::{Overrides, RunConfig};
use crate::error::CliError;
use crate::output::num;

/// Locality-constrained H2 controller synthesis for a chain of coupled subsystems
#[derive(Parser, Debug)]
#[command(name = "localsyn", version, about, long_about = None)]
pub struct Cli {
    #[command(flatten)]
    pub overrides: Overrides,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Solve the finite-extent problems over the extent range and write sweep.csv
    Sweep {
        /// Also write a gnuplot script sweep.gp next to the CSV
        #[arg(long)]
        emit_gnuplot: bool,
    },
    /// Compute the unconstrained optimal cost and write oracle.csv
    Oracle,
    /// Run the verification battery; exits 1 if any check fails
    Verify {
        /// Audit five plant triples drawn from the seed instead of the configured plant
        #[arg(long)]
        random_params: bool,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Write the affine blocks for one extent to maps_E<E>.json
    DumpMaps {
        #[arg(long)]
        e: usize,
    },
}

/// Runs one command. The error's `exit_code` gives the process status.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let cfg = RunConfig::load(&cli.overrides)?;
    match &cli.command {
        Command::Sweep { emit_gnuplot } => {
            let out = cmd_sweep(&cfg, *emit_gnuplot)?;
            println!("J_inf = {}", num(out.j_inf));
            for row in &out.rows {
                for (q, e) in row.errors() {
                    error!("E={} {q}: {e}", row.extent);
                }
            }
            println!("wrote {}", out.csv_path.display());
            let failed = out.failed_solves();
            if failed > 0 {
                return Err(CliError::SweepFailures {
                    failed,
                    total: out.total_solves(),
                });
            }
        }
        Command::Oracle => {
            let report = cmd_oracle(&cfg)?;
            println!("J_inf = {}", num(report.j_inf));
        }
        Command::Verify {
            random_params,
            inject_fault,
        } => {
            let report = cmd_verify(&cfg, *random_params, *inject_fault);
            print!("{report}");
            let failed = report.failures().count();
            if failed > 0 {
                return Err(CliError::Verification(failed));
            }
        }
        Command::DumpMaps { e } => {
            let path = cmd_dump_maps(&cfg, *e)?;
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn command_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn global_flags_parse_after_subcommand() {
        let cli = Cli::try_parse_from(["localsyn", "sweep", "--alpha", "-0.5", "--e-min", "2", "--param", "io"]).unwrap();
        assert_eq!(cli.overrides.alpha, Some(-0.5));
        assert_eq!(cli.overrides.e_min, Some(2));
        assert!(matches!(cli.command, Command::Sweep { emit_gnuplot: false }));
    }

    #[test]
    fn dump_maps_requires_extent() {
        assert!(Cli::try_parse_from(["localsyn", "dump-maps"]).is_err());
        let cli = Cli::try_parse_from(["localsyn", "dump-maps", "--e", "3"]).unwrap();
        assert!(matches!(cli.command, Command::DumpMaps { e: 3 }));
    }

    #[test]
    fn inject_fault_is_hidden() {
        let help = Cli::command().find_subcommand_mut("verify").unwrap().render_long_help().to_string();
        assert!(help.contains("--random-params"));
        assert!(!help.contains("--inject-fault"));
    }
}
