use clap::Parser;
use semsans_cli::output::sha256_hex;
use semsans_cli::{config, parse_config, run_command, CliError, Command, RunOptions};
use std::path::PathBuf;
use std::process::ExitCode;

/// Neutron spin-echo prism-pair simulator.
///
/// Exit status: 0 ok, 2 parse error, 3 invalid configuration, 4 physics error
/// or failed invariant, 5 I/O error.
#[derive(Debug, Parser)]
#[command(name = "semsans", version)]
struct Args {
    /// refract, trace, focus, phase, fringe, solve-fields, texture, oam or validate.
    command: Command,

    /// Configuration file.
    #[arg(value_name = "CONFIG", required_unless_present = "config_flag", conflicts_with = "config_flag")]
    config: Option<PathBuf>,

    #[arg(long = "config", value_name = "PATH")]
    config_flag: Option<PathBuf>,

    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Samples per axis for texture and oam.
    #[arg(long)]
    grid: Option<usize>,

    /// Unit cells on each side of the origin for texture and oam.
    #[arg(long)]
    cells: Option<usize>,

    /// Drop the carrier terms from the OAM density.
    #[arg(long)]
    subtract_carrier: bool,

    /// Seed for the randomized validation suite.
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn run(args: Args) -> Result<Vec<String>, CliError> {
    let path = args.config.or(args.config_flag).expect("clap requires a config");
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    let mut cfg = parse_config(&text)?;
    if let Some(n) = args.grid {
        cfg.texture.grid = n;
    }
    if let Some(k) = args.cells {
        cfg.texture.cells = k;
    }
    cfg.texture.subtract_carrier |= args.subtract_carrier;
    config::validate_texture(&cfg.texture)?;
    let opts = RunOptions { out_dir: args.out, config_sha256: sha256_hex(&text), seed: args.seed };
    let report = run_command(args.command, &cfg, &opts)?;
    let mut lines = report.lines();
    lines.extend(report.files.iter().map(|f| format!("wrote={}", f.display())));
    Ok(lines)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("semsans: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
