//! Command-line entry: `run`, `stimuli`, `validate`, and `wire-dump`.
//!
//! Exit codes: 0 success, 2 usage, 3 configuration error, 4 runtime error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use super::config::ScenarioConfig;
use super::{run_all_stimuli, run_stimulus, ScenarioError, PACKETS_MAGIC};
use crate::wire::parse_packet;

const OUT_DIR_ENV: &str = "AMBIADAPT_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "ambiadapt",
    version,
    about = "Adaptive higher-order Ambisonics streaming over a simulated link"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Override the scene seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the output directory (also: AMBIADAPT_OUT_DIR).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Suppress progress output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the scenario configured in FILE.
    Run { config: PathBuf },
    /// Emit all six stimulus variants of the scene in FILE.
    Stimuli { config: PathBuf },
    /// Check a scenario file without running it.
    Validate { config: PathBuf },
    /// Print a human-readable log of a packets dump.
    WireDump { packets: PathBuf },
}

/// Parse `argv` and run. Never panics; returns the process exit code.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };

    match run_command(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn load_config(cli: &Cli, path: &Path) -> Result<ScenarioConfig, ScenarioError> {
    let mut cfg = ScenarioConfig::from_path(path)?;
    if let Some(seed) = cli.seed {
        cfg.scene.seed = seed;
    }
    if let Some(dir) = &cli.out_dir {
        cfg.output.directory = dir.clone();
    } else if let Some(dir) = std::env::var_os(OUT_DIR_ENV) {
        cfg.output.directory = PathBuf::from(dir);
    }
    let errors = cfg.validate();
    if !errors.is_empty() {
        return Err(ScenarioError::Validation(errors));
    }
    Ok(cfg)
}

fn run_command(cli: &Cli) -> Result<(), ScenarioError> {
    match &cli.command {
        Command::Run { config } => {
            let cfg = load_config(cli, config)?;
            let (result, artifacts) = run_stimulus(&cfg)?;
            if !cli.quiet {
                println!(
                    "{} packets sent, {} concealed, {} clamped samples",
                    result.sent_packets.len(),
                    result.conceal_count,
                    result.clamped_samples
                );
                for path in [
                    &artifacts.ambisonics_wav,
                    &artifacts.loudspeakers_wav,
                    &artifacts.trace_csv,
                    &artifacts.packets_file,
                ]
                .into_iter()
                .flatten()
                {
                    println!("wrote {}", path.display());
                }
            }
            Ok(())
        }
        Command::Stimuli { config } => {
            let cfg = load_config(cli, config)?;
            let results = run_all_stimuli(&cfg)?;
            if !cli.quiet {
                for (result, artifacts) in &results {
                    println!(
                        "{}: {} packets, {} concealed",
                        artifacts
                            .ambisonics_wav
                            .as_ref()
                            .map(|p| p.display().to_string())
                            .unwrap_or_default(),
                        result.sent_packets.len(),
                        result.conceal_count
                    );
                }
            }
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = ScenarioConfig::from_path(config)?;
            let errors = cfg.validate();
            if errors.is_empty() {
                if !cli.quiet {
                    println!("{}: ok", config.display());
                }
                Ok(())
            } else {
                Err(ScenarioError::Validation(errors))
            }
        }
        Command::WireDump { packets } => dump_packets(packets),
    }
}

fn dump_packets(path: &Path) -> Result<(), ScenarioError> {
    let data = std::fs::read(path)?;
    if data.len() < PACKETS_MAGIC.len() || &data[..PACKETS_MAGIC.len()] != PACKETS_MAGIC {
        return Err(ScenarioError::Config(format!(
            "{}: not a packets dump (missing {:?} header)",
            path.display(),
            std::str::from_utf8(PACKETS_MAGIC).unwrap()
        )));
    }
    let stdout = std::io::stdout().lock();
    let mut out = std::io::BufWriter::new(stdout);
    match dump_packets_to(path, &data, &mut out) {
        // a downstream pager closing the pipe is a normal way to stop
        Err(ScenarioError::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => other,
    }
}

fn dump_packets_to<W: std::io::Write>(
    path: &Path,
    data: &[u8],
    out: &mut W,
) -> Result<(), ScenarioError> {
    writeln!(
        out,
        "idx,len,seq,timestamp,order,bit_depth,frame_length,fade_remaining,flags"
    )?;
    let mut off = PACKETS_MAGIC.len();
    let mut idx = 0u64;
    while off < data.len() {
        if off + 4 > data.len() {
            return Err(ScenarioError::Config(format!(
                "{}: truncated length prefix at byte {off}",
                path.display()
            )));
        }
        let len =
            u32::from_be_bytes([data[off], data[off + 1], data[off + 2], data[off + 3]]) as usize;
        off += 4;
        if off + len > data.len() {
            return Err(ScenarioError::Config(format!(
                "{}: truncated packet {idx} (need {len} bytes)",
                path.display()
            )));
        }
        match parse_packet(&data[off..off + len]) {
            Ok(p) => {
                let h = &p.header;
                let mut flags = String::new();
                if h.flags.fade_active {
                    flags.push_str("fade ");
                }
                if h.flags.order_change {
                    flags.push_str("order-change");
                }
                writeln!(
                    out,
                    "{idx},{len},{},{},{},{},{},{},{}",
                    h.sequence,
                    h.timestamp,
                    h.order,
                    h.bit_depth,
                    h.frame_length,
                    h.fade_remaining,
                    flags.trim_end()
                )?;
            }
            Err(e) => writeln!(out, "{idx},{len},malformed: {e}")?,
        }
        off += len;
        idx += 1;
    }
    out.flush()?;
    Ok(())
}
