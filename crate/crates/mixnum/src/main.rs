use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mixnum::run::{self, parse_methods, summary_line};
use mixnum::{load_scenario, selftest, std_engine, CliResult};

#[derive(Parser)]
#[command(name = "mixnum", version, about = "Mixed-numerology OFDM PAPR reduction simulator")]
struct Cli {
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override a scenario field, e.g. `--set papr_target_db=7` or `--set bwps.0.num_prbs=24`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate, measure and write ccdf.csv, psd.csv and report.json.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Also write the waveform as interleaved little-endian f64.
        #[arg(long)]
        dump_waveform: bool,
    },
    /// Run every method at every target and write sweep.csv.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Comma-separated PAPR targets in dB.
        #[arg(long, value_delimiter = ',', default_values_t = [5.0, 6.0, 7.0, 8.0, 9.0])]
        targets: Vec<f64>,
        /// Comma-separated methods.
        #[arg(long, default_value = "I_ICEF,E_ICEF_WOLA,FC_ICEF")]
        methods: String,
    },
    /// Check reconstruction, orthogonality, confinement and Parseval properties.
    Selftest {
        /// Output directory for selftest.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Negative control: scale one FC window bin above unity.
        #[arg(long, hide = true)]
        perturb_fc_window: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let engine = std_engine(cli.threads)?;
    match cli.command {
        Command::Run { scenario, dump_waveform } => {
            let loaded = load_scenario(&scenario.scenario, &scenario.overrides)?;
            let mask = loaded.load_mask()?;
            let result = run::run_spec(&engine, &loaded.spec, mask.as_ref())?;
            run::write_run(&scenario.out, &result, dump_waveform)?;
            println!("{}", summary_line(&result));
        }
        Command::Sweep {
            scenario,
            targets,
            methods,
        } => {
            let loaded = load_scenario(&scenario.scenario, &scenario.overrides)?;
            let mask = loaded.load_mask()?;
            let methods = parse_methods(&methods)?;
            let rows = run::sweep(&engine, &loaded.spec, &targets, &methods, mask.as_ref(), |r| {
                println!("{}", summary_line(r))
            })?;
            std::fs::create_dir_all(&scenario.out).map_err(|source| mixnum::CliError::Io {
                path: scenario.out.clone(),
                source,
            })?;
            run::write_sweep_csv(&scenario.out.join("sweep.csv"), &rows)?;
        }
        Command::Selftest { out, perturb_fc_window } => {
            let report = selftest::run_selftest(&engine, perturb_fc_window)?;
            for c in &report.checks {
                println!("{} {} ({})", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            if let Some(dir) = out {
                std::fs::create_dir_all(&dir).map_err(|source| mixnum::CliError::Io { path: dir.clone(), source })?;
                mixnum::io::write_json(&dir.join("selftest.json"), &report)?;
            }
            if let Some(f) = report.checks.iter().find(|c| !c.passed) {
                return Err(mixnum::CliError::SelfTest(f.name.clone()));
            }
        }
    }
    Ok(())
}
