use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use lqdim::experiments::{
    exit_code, exit_code_for_error, exit_code_for_report, parse_levels, parse_q_list, run,
    ExperimentConfig, ExperimentKind,
};
use lqdim::{Error, Result};

/// Run an experiment from a JSON config and write report.json and table.csv.
#[derive(Parser, Debug)]
#[command(name = "lqdim", version)]
struct Cli {
    /// improvement, repeated, porous-dual, infty-jump, regularity, sumset or uniformize
    experiment: String,
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: the config's `out`, else the current directory)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Inclusive range `a..b` or a comma list
    #[arg(long)]
    levels: Option<String>,
    /// Comma list of q > 1
    #[arg(long)]
    q: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Work cap for convolutions and sumsets (also LQDIM_MAX_WORK)
    #[arg(long)]
    max_work: Option<u64>,
}

fn configure(cli: &Cli) -> Result<(ExperimentKind, ExperimentConfig)> {
    let kind: ExperimentKind = cli.experiment.parse()?;
    let mut cfg = ExperimentConfig::load(&cli.config)?;
    if let Some(l) = &cli.levels {
        cfg.levels = Some(parse_levels(l)?);
    }
    if let Some(q) = &cli.q {
        cfg.q = parse_q_list(q)?;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if cli.max_work.is_some() {
        cfg.max_work = cli.max_work;
    }
    if cli.out.is_some() {
        cfg.out = cli.out.clone();
    }
    Ok((kind, cfg))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() {
                exit_code::INVALID_CONFIG
            } else {
                exit_code::SUCCESS
            };
            return ExitCode::from(code as u8);
        }
    };
    let code = match configure(&cli).and_then(|(kind, cfg)| Ok((run(kind, &cfg)?, cfg))) {
        Ok((report, cfg)) => {
            let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("."));
            match report.write_to(&dir) {
                Ok(paths) => {
                    for p in &paths {
                        println!("wrote {}", p.display());
                    }
                    for p in report.preconditions.iter().filter(|p| !p.met) {
                        eprintln!("precondition unmet: {}: {}", p.name, p.detail);
                    }
                    exit_code_for_report(&report)
                }
                Err(e) => fail(&e),
            }
        }
        Err(e) => fail(&e),
    };
    ExitCode::from(code as u8)
}

fn fail(e: &Error) -> i32 {
    eprintln!("lqdim: {e}");
    exit_code_for_error(e)
}
