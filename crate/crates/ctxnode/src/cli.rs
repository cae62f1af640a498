//! The `ctxnode` command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use ctxnode_core::energy;
use ctxnode_core::sim;
use ctxnode_core::voi::VoiParams;

use crate::config::{config_help, RunConfig};
use crate::error::{Error, Result};
use crate::run;
use crate::timeseries::format_timestamp;
use crate::trace::{self, format_sig};

#[derive(Debug, Parser)]
#[command(name = "ctxnode", version, about = "Context-aware duty-cycle controller for energy-harvesting sensor nodes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Receding-horizon hindcast: writes a trace and prints a summary.
    Simulate(SimulateArgs),
    /// Fixed-frequency hindcast: writes a trace and prints a summary.
    Baseline(BaselineArgs),
    /// VoI of a risk-inclined (a) and a risk-averse (b) planner along the
    /// dataset's process levels at fixed frequencies.
    VoiCurve(VoiCurveArgs),
    /// Hours from full charge to the SoC floor at fixed frequencies with no
    /// harvest.
    ProfileShutdown(ShutdownArgs),
    /// One hindcast per value of a numeric config key; prints a summary table.
    Sweep(SweepArgs),
    /// Writes the synthetic dataset as process.csv and irradiance.csv.
    GenScenario(GenScenarioArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Initial State of Energy; replaces the config's initial charge.
    #[arg(long)]
    pub initial_soe: Option<f64>,
    /// Trace CSV; defaults to output.trace.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BaselineArgs {
    #[command(flatten)]
    pub run: SimulateArgs,
    /// Samples per hour.
    #[arg(long)]
    pub fs: f64,
    /// Transmissions per hour.
    #[arg(long)]
    pub ft: f64,
}

#[derive(Debug, Args)]
pub struct VoiCurveArgs {
    /// JSON run configuration; supplies x_c, the window and the levels.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 30.0)]
    pub fs: f64,
    #[arg(long, default_value_t = 30.0)]
    pub ft: f64,
    /// Output CSV; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ShutdownArgs {
    /// JSON run configuration; supplies the battery and profile.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub fs: f64,
    #[arg(long)]
    pub ft: f64,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Dotted numeric config key, e.g. mpc.w_e.
    #[arg(long)]
    pub param: String,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', num_args = 1.., required = true)]
    pub values: Vec<f64>,
    #[arg(long)]
    pub initial_soe: Option<f64>,
    /// Summary table CSV; the table is printed either way.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenScenarioArgs {
    /// JSON run configuration with a synthetic dataset section.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

/// The clap command with the config key reference appended to `--help`.
pub fn command() -> clap::Command {
    Cli::command().after_long_help(config_help())
}

/// Parses `args` and runs the command. Usage errors exit with 2, run
/// errors with 1.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match command().try_get_matches_from(args).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut stdout = std::io::stdout().lock();
    match execute(&cli.command, &mut stdout) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = stdout.flush();
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Usage(_) => 2,
                _ => 1,
            })
        }
    }
}

fn load(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn load_with_soe(path: &Path, soe: Option<f64>) -> Result<RunConfig> {
    let mut c = RunConfig::load(path)?;
    if let Some(s) = soe {
        c.set_initial_soe(s);
    }
    Ok(c)
}

fn trace_path(config: &RunConfig, out: Option<&Path>) -> Result<PathBuf> {
    out.map(Path::to_path_buf)
        .or_else(|| config.output.trace.clone())
        .ok_or_else(|| Error::Usage("no trace path: pass --out or set output.trace".into()))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

/// Runs one command, printing to `out`.
pub fn execute(command: &Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Simulate(a) => {
            let config = load_with_soe(&a.config, a.initial_soe)?;
            let path = trace_path(&config, a.out.as_deref())?;
            let t = run::simulate(&config.prepare()?)?;
            trace::write_trace(&t, &path)?;
            emit(out, &trace::format_summary(&sim::summarize(&t)))
        }
        Command::Baseline(a) => {
            let config = load_with_soe(&a.run.config, a.run.initial_soe)?;
            let path = trace_path(&config, a.run.out.as_deref())?;
            let t = run::baseline(&config.prepare()?, a.fs, a.ft)?;
            trace::write_trace(&t, &path)?;
            emit(out, &trace::format_summary(&sim::summarize(&t)))
        }
        Command::VoiCurve(a) => {
            let config = load(a.config.as_deref())?;
            let p = config.voi_params()?;
            let dataset = config.dataset()?;
            let levels: Vec<(i64, f64)> = dataset
                .process()
                .iter()
                .enumerate()
                .map(|(i, &x)| (dataset.timestamp(i), x))
                .collect();
            let rows = trace::emit_voi_curve(
                &VoiParams::risk_inclined(p.x_c, p.delta),
                &VoiParams::risk_averse(p.x_c, p.delta),
                &levels,
                a.fs,
                a.ft,
            )?;
            let text = trace::format_voi_curve(&rows);
            match &a.out {
                Some(path) => write_text(path, &text),
                None => emit(out, &text),
            }
        }
        Command::ProfileShutdown(a) => {
            let config = load(a.config.as_deref())?;
            let hours = energy::shutdown_time(&config.energy_profile()?, &config.battery_model()?, a.fs, a.ft)
                .map_err(Error::model("profile-shutdown"))?;
            emit(out, &format!("{}\n", format_sig(hours)))
        }
        Command::Sweep(a) => {
            let config = load_with_soe(&a.config, a.initial_soe)?;
            let summaries = run::sweep(&config, &a.param, &a.values)?;
            let mut text = format!("{}\n", trace::SUMMARY_TABLE_HEADER);
            for (v, s) in a.values.iter().zip(&summaries) {
                text.push_str(&trace::format_summary_row(&a.param, *v, s));
                text.push('\n');
            }
            if let Some(path) = &a.out {
                write_text(path, &text)?;
            }
            emit(out, &text)
        }
        Command::GenScenario(a) => {
            let config = load(a.config.as_deref())?;
            let d = config.dataset()?;
            fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
            let mut process = String::from("timestamp,level\n");
            let mut irradiance = String::from("timestamp,irradiance\n");
            for i in 0..d.len() {
                let t = format_timestamp(d.timestamp(i));
                process.push_str(&format!("{t},{}\n", d.process()[i]));
                irradiance.push_str(&format!("{t},{}\n", d.irradiance()[i]));
            }
            let (pp, ip) = (a.out.join("process.csv"), a.out.join("irradiance.csv"));
            write_text(&pp, &process)?;
            write_text(&ip, &irradiance)?;
            emit(out, &format!("{}\n{}\n", pp.display(), ip.display()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_definition_is_consistent() {
        command().debug_assert();
    }

    #[test]
    fn long_help_lists_config_keys() {
        let help = command().render_long_help().to_string();
        assert!(help.contains("battery.capacity_ah"));
        assert!(help.contains("sim.restart_hysteresis"));
    }

    #[test]
    fn shutdown_prints_hours() {
        let mut out = Vec::new();
        let cmd = Command::ProfileShutdown(ShutdownArgs {
            config: None,
            fs: 100.0,
            ft: 100.0,
        });
        execute(&cmd, &mut out).unwrap();
        let hours: f64 = String::from_utf8(out).unwrap().trim().parse().unwrap();
        assert!((hours - 50.98).abs() < 0.01, "{hours}");
    }
}
