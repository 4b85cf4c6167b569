use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gauntlet_cli::{cmd_mc, cmd_reactive, cmd_run, resolve_config, CliError};
use gauntlet_core::CaseId;

#[derive(Parser)]
#[command(name = "gauntlet", version, about = "Threat-aware multi-vehicle guidance simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one deterministic case.
    Run {
        #[arg(long)]
        case: CaseId,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override a config key, e.g. `--set v_e=1.2` or `--set threats.0.offset=0.5`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
    },
    /// Monte Carlo ensemble over all three cases.
    Mc {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out_mc")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
    },
    /// Team roster against pure-pursuit threats.
    Reactive {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value = "out_reactive")]
        out: PathBuf,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { case, config, out, sets } => {
            let cfg = resolve_config(config.as_deref(), &sets)?;
            let report = cmd_run(case, &cfg, &out)?;
            println!(
                "{}: {} (S_team {}, J_WEZ {:.4}, m_team {:.4})",
                case.as_str(),
                report.outcome.as_str(),
                report.s_team,
                report.j_wez,
                report.m_team
            );
        }
        Command::Mc {
            config,
            trials,
            seed,
            out,
            threads,
            mut sets,
        } => {
            if let Some(n) = trials {
                sets.push(format!("mc.n_trials={n}"));
            }
            if let Some(s) = seed {
                sets.push(format!("mc.master_seed={s}"));
            }
            let cfg = resolve_config(config.as_deref(), &sets)?;
            let res = cmd_mc(&cfg, &out, threads)?;
            for s in &res.summaries {
                println!(
                    "{:<8} {}/{} = {:.3} +/- {:.3}",
                    s.case_id.as_str(),
                    s.successes,
                    s.trials,
                    s.p_empirical,
                    s.ci_half_width
                );
            }
        }
        Command::Reactive { config, out, sets } => {
            let cfg = resolve_config(config.as_deref(), &sets)?;
            let (rec, report) = cmd_reactive(&cfg, &out)?;
            println!(
                "reactive: {} ({} assignments, {} events)",
                report.outcome.as_str(),
                rec.assignments.len(),
                rec.events.len()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
