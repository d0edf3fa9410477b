use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use seakeep_core::harness::{self, ControllerVariant, ScenarioConfig};
use seakeep_core::wave::WaveField;
use seakeep_core::Result;

#[derive(Parser)]
#[command(
    name = "seakeep",
    version,
    about = "Wave-disturbed station-keeping simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one scenario; prints the summary and optionally writes run.csv and summary.json.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Feed-forward preview SNR (power ratio); omit for an exact preview.
        #[arg(long)]
        snr: Option<f64>,
        /// Read --snr in decibels.
        #[arg(long, requires = "snr")]
        snr_db: bool,
        #[arg(long, value_enum)]
        controller: Option<Controller>,
        /// Output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run baseline/candidate pairs for each scenario and report percentage changes.
    Compare {
        /// Scenario config files (one pair per file).
        #[arg(long = "config", conflicts_with = "presets")]
        configs: Vec<PathBuf>,
        /// Preset sea states (one pair per preset); defaults to W1, W2 and W3.
        #[arg(long = "preset")]
        presets: Vec<String>,
        #[command(flatten)]
        overrides: Overrides,
        /// Baseline controller (always with an exact preview).
        #[arg(long, value_enum, default_value = "cpd")]
        baseline: Controller,
        /// Preview SNR for the CPD_FF candidate; omit for an exact preview.
        #[arg(long)]
        snr: Option<f64>,
        /// Read --snr in decibels.
        #[arg(long, requires = "snr")]
        snr_db: bool,
        /// Output directory for compare.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the TOML config of a preset sea state.
    PresetDump {
        /// W1, W2 or W3.
        case: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export the wave component table of a scenario.
    WaveDump {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Export the preview field corrupted at this SNR instead of the true sea.
        #[arg(long)]
        snr: Option<f64>,
        /// Read --snr in decibels.
        #[arg(long, requires = "snr")]
        snr_db: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario TOML file.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Preset sea state W1, W2 or W3 (default W1).
    #[arg(long)]
    preset: Option<String>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct Overrides {
    #[arg(long)]
    seed_wave: Option<u64>,
    #[arg(long)]
    seed_sensor: Option<u64>,
    #[arg(long)]
    seed_preview: Option<u64>,
    /// Seconds excluded from the summary metrics.
    #[arg(long)]
    skip: Option<f64>,
    /// Mission duration in seconds.
    #[arg(long)]
    duration: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Controller {
    Cpd,
    CpdFf,
}

impl From<Controller> for ControllerVariant {
    fn from(c: Controller) -> Self {
        match c {
            Controller::Cpd => ControllerVariant::Cpd,
            Controller::CpdFf => ControllerVariant::CpdFf,
        }
    }
}

impl Overrides {
    fn apply(&self, cfg: &mut ScenarioConfig) {
        if let Some(s) = self.seed_wave {
            cfg.set_wave_seed(s);
        }
        if let Some(s) = self.seed_sensor {
            cfg.seeds.sensor = s;
        }
        if let Some(s) = self.seed_preview {
            cfg.seeds.preview_noise = s;
        }
        if let Some(s) = self.skip {
            cfg.skip = s;
        }
        if let Some(d) = self.duration {
            cfg.duration = d;
        }
    }
}

fn load_base(config: Option<&Path>, preset: Option<&str>) -> Result<ScenarioConfig> {
    match (config, preset) {
        (Some(path), _) => ScenarioConfig::load(path),
        (None, Some(id)) => harness::preset(id),
        (None, None) => harness::preset("W1"),
    }
}

impl ScenarioArgs {
    fn resolve(&self) -> Result<ScenarioConfig> {
        let mut cfg = load_base(self.config.as_deref(), self.preset.as_deref())?;
        self.overrides.apply(&mut cfg);
        Ok(cfg)
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            scenario,
            snr,
            snr_db,
            controller,
            out,
        } => {
            let mut cfg = scenario.resolve()?;
            if snr.is_some() {
                cfg.preview_snr = snr;
                cfg.preview_snr_db = snr_db;
            }
            if let Some(c) = controller {
                cfg.controller_variant = c.into();
            }
            let record = harness::run(&cfg)?;
            if let Some(dir) = &out {
                record.write_to_dir(dir)?;
            }
            println!("{}", record.summary_json()?);
        }
        Command::Compare {
            configs,
            presets,
            overrides,
            baseline,
            snr,
            snr_db,
            out,
        } => {
            let mut bases = Vec::new();
            for path in &configs {
                bases.push(ScenarioConfig::load(path)?);
            }
            let ids = if presets.is_empty() && configs.is_empty() {
                harness::PRESETS.iter().map(|p| p.0.to_string()).collect()
            } else {
                presets
            };
            for id in &ids {
                bases.push(harness::preset(id)?);
            }
            let pairs: Vec<_> = bases
                .into_iter()
                .map(|mut base| {
                    overrides.apply(&mut base);
                    let mut b = base.clone();
                    b.controller_variant = baseline.into();
                    b.preview_snr = None;
                    b.preview_snr_db = false;
                    let mut c = base;
                    c.controller_variant = ControllerVariant::CpdFf;
                    c.preview_snr = snr;
                    c.preview_snr_db = snr_db;
                    let unit = if snr_db { "db" } else { "" };
                    c.name = match snr {
                        Some(s) => format!("{}-ff-snr{s}{unit}", b.name),
                        None => format!("{}-ff", b.name),
                    };
                    (b, c)
                })
                .collect();
            let rows = harness::compare(&pairs)?;
            let mut buf = Vec::new();
            harness::write_comparison_csv(&rows, &mut buf)?;
            if let Some(dir) = &out {
                std::fs::create_dir_all(dir)?;
                std::fs::write(dir.join("compare.csv"), &buf)?;
            }
            std::io::stdout().write_all(&buf)?;
            eprintln!(
                "mean rmse change {:.2}%, mean max-error change {:.2}%, mean energy change {:.2}%",
                harness::mean_change(&rows, |r| r.rmse_change_pct),
                harness::mean_change(&rows, |r| r.max_err_change_pct),
                harness::mean_change(&rows, |r| r.energy_change_pct),
            );
        }
        Command::PresetDump { case, out } => {
            emit(&harness::preset(&case)?.to_toml()?, out.as_deref())?;
        }
        Command::WaveDump {
            scenario,
            snr,
            snr_db,
            out,
        } => {
            let mut cfg = scenario.resolve()?;
            if snr.is_some() {
                cfg.preview_snr = snr;
                cfg.preview_snr_db = snr_db;
            }
            cfg.validate()?;
            let sea = WaveField::from_spectrum(&cfg.spectrum)?;
            let field = harness::preview_field(&cfg, &sea)?;
            emit(&field.to_table(), out.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("seakeep: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
