//! Command-line runner for the nested-interferometer simulator.
//!
//! Exit codes: 0 when every verdict passes, 2 when any fails, 1 on usage or
//! configuration errors.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use mzi_core::scenario::{
    build_scenario, emit_config, load_scenario, run, spectrum_csv, sweep, timeseries_csv,
    Overrides, ParamPath, RunOutput, SweepMetric, BUILTIN_NAMES,
};
use mzi_core::state::{post_selection_overlap, post_selection_probability, weak_value};
use mzi_core::Mirror;

#[derive(Parser)]
#[command(
    name = "mzi",
    about = "Nested Mach-Zehnder interferometer simulator: weak values, quad-cell spectra, scaling sweeps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in scenarios.
    List,
    /// Print the config document of a built-in scenario.
    Emit {
        #[arg(long)]
        builtin: String,
    },
    /// Run a scenario and write spectrum.csv and report.json.
    Run {
        /// Built-in name or path to a config file.
        #[arg(long)]
        scenario: String,
        /// Output directory (created if missing).
        #[arg(long)]
        out: PathBuf,
        /// Also write timeseries.csv (schema t,q,p).
        #[arg(long)]
        dump_timeseries: bool,
    },
    /// Print the weak values of a scenario's network.
    WeakValues {
        #[arg(long)]
        scenario: String,
    },
    /// Sweep one scalar parameter and fit the log-log slope.
    Sweep {
        #[arg(long)]
        scenario: String,
        /// Parameter path: drives.<A|B|C|E|F>.g0 or leak_eps.
        #[arg(long)]
        param: Option<String>,
        /// Comma-separated positive values spanning at least one decade.
        #[arg(long)]
        values: Option<String>,
        /// Observable per value; defaults to quad-bin for drive sweeps and
        /// mean-power for leak sweeps.
        #[arg(long, value_enum)]
        metric: Option<MetricArg>,
        /// Optional output directory for spectrum.csv and report.json.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MetricArg {
    /// |DFT| of the quad signal at the swept drive frequency.
    QuadBin,
    /// Mean detector power.
    MeanPower,
    /// |DFT| of the detector power at twice the drive frequency.
    PowerBin2f,
    /// Mean power at the inner dark port.
    DarkPortPower,
}

impl From<MetricArg> for SweepMetric {
    fn from(value: MetricArg) -> Self {
        match value {
            MetricArg::QuadBin => SweepMetric::QuadBinAtDriveFreq,
            MetricArg::MeanPower => SweepMetric::MeanDetectorPower,
            MetricArg::PowerBin2f => SweepMetric::PowerBinAtTwiceDriveFreq,
            MetricArg::DarkPortPower => SweepMetric::DarkPortMeanPower,
        }
    }
}

fn write_outputs(out: &PathBuf, output: &RunOutput, dump_timeseries: bool) -> Result<()> {
    std::fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    std::fs::write(out.join("spectrum.csv"), spectrum_csv(&output.spectrum))?;
    std::fs::write(out.join("report.json"), output.report.to_json())?;
    if dump_timeseries {
        std::fs::write(out.join("timeseries.csv"), timeseries_csv(&output.timeseries))?;
    }
    Ok(())
}

fn print_summary(output: &RunOutput) {
    for warning in &output.warnings {
        eprintln!("warning: {warning}");
    }
    for slope in &output.report.slopes {
        println!(
            "slope {}: exponent {:.4} (max relative residual {:.2e})",
            slope.param, slope.exponent, slope.residual
        );
    }
    for verdict in &output.report.verdicts {
        println!(
            "{} {}: {}",
            if verdict.pass { "pass" } else { "FAIL" },
            verdict.claim,
            verdict.measured
        );
    }
}

fn main_inner() -> Result<i32> {
    let cli = Cli::parse();
    match cli.command {
        Command::List => {
            for name in BUILTIN_NAMES {
                println!("{name}");
            }
            Ok(0)
        }
        Command::Emit { builtin } => {
            let scenario = build_scenario(&builtin, &Overrides::default())?;
            print!("{}", emit_config(&scenario));
            Ok(0)
        }
        Command::Run { scenario, out, dump_timeseries } => {
            let scenario = load_scenario(&scenario)?;
            let output = run(&scenario)?;
            write_outputs(&out, &output, dump_timeseries)?;
            print_summary(&output);
            println!(
                "wrote {} and {}",
                out.join("spectrum.csv").display(),
                out.join("report.json").display()
            );
            Ok(if output.report.all_pass() { 0 } else { 2 })
        }
        Command::WeakValues { scenario } => {
            let scenario = load_scenario(&scenario)?;
            let overlap = post_selection_overlap(&scenario.net);
            println!("post-selection overlap: {:+.6e} {:+.6e}i (|.| = {:.6e})",
                overlap.re, overlap.im, overlap.norm());
            println!(
                "post-selection probability: {:.6e}",
                post_selection_probability(&scenario.net)
            );
            for mirror in Mirror::ALL {
                match weak_value(&scenario.net, mirror) {
                    // + 0.0 folds negative zeros
                    Ok(w) => println!("w({mirror}) = {:+.6} {:+.6}i", w.re + 0.0, w.im + 0.0),
                    Err(e) => {
                        println!("w({mirror}): undefined ({e})");
                        return Ok(2);
                    }
                }
            }
            Ok(0)
        }
        Command::Sweep { scenario, param, values, metric, out } => {
            let scenario = load_scenario(&scenario)?;
            // flags win over a sweep block embedded in the config
            let (param, values) = match (param, values) {
                (Some(p), Some(v)) => {
                    let param = ParamPath::from_str(&p)?;
                    let values = v
                        .split(',')
                        .map(|s| s.trim().parse::<f64>().context("parsing sweep value"))
                        .collect::<Result<Vec<f64>>>()?;
                    (param, values)
                }
                (None, None) => scenario
                    .sweep
                    .clone()
                    .context("no --param/--values and the scenario embeds no sweep")?,
                _ => anyhow::bail!("--param and --values must be given together"),
            };
            let output = sweep(&scenario, &param, &values, metric.map(Into::into))?;
            if let Some(out) = out {
                write_outputs(&out, &output, false)?;
            }
            print_summary(&output);
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
