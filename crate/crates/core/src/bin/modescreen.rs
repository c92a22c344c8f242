use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use modescreen::calibration::{dip_test, CriticalValueTable, ADHOC_REPS, DEFAULT_SEED};
use modescreen::data::{read_single_column, Dataset};
use modescreen::density::{BandwidthRule, DensityModel};
use modescreen::experiments::{
    experiment_dip_power, experiment_full_clustering, experiment_mode_consistency, experiment_support_recovery,
    DEFAULT_REPS,
};
use modescreen::modeclust::find_modes_and_assign;
use modescreen::pipeline::{run_pipeline, PipelineConfig};
use modescreen::screening::{screen_features, Correction};
use modescreen::synth::Builtin;

#[derive(Parser)]
#[command(name = "modescreen", version, about = "Dip-test feature screening and mode clustering")]
struct Cli {
    /// Extra critical values (`n,alpha,value,reps,seed`) merged into the bundled table.
    #[arg(long, global = true)]
    table: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dip test of a single-column CSV.
    Dip {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
    },
    /// Marginal dip screening of every feature.
    Screen {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        alpha: f64,
        #[arg(long, default_value = "paper")]
        correction: Correction,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mean-shift clustering on chosen features.
    Cluster {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated 0-based feature indices; all features if omitted.
        #[arg(long, value_delimiter = ',')]
        features: Vec<usize>,
        #[arg(long, default_value = "wand")]
        bandwidth: BandwidthRule,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        modes_out: Option<PathBuf>,
    },
    /// Sample a built-in mixture: bimodal1d, threecomp20 or twocomp:<s>:<d>.
    Synth {
        #[arg(long)]
        spec: Builtin,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Screening followed by clustering on the selected features.
    Pipeline {
        #[arg(long)]
        input: PathBuf,
        /// TOML run configuration; defaults apply to missing keys.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_prefix: PathBuf,
    },
    /// Synthetic studies.
    Experiment {
        kind: ExperimentKind,
        /// CSV path, or an output directory for `full`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Replicates per cell: 1000 for dip-power, 50 for support-recovery,
        /// 20 for consistency.
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_delimiter = ',')]
        n: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        alpha: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',', default_value = "20")]
        d: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "2")]
        s: Vec<usize>,
        /// Pipeline configuration for `full`.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Simulate critical values and write them as a table.
    Calibrate {
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.05,0.1")]
        alpha: Vec<f64>,
        #[arg(long, default_value_t = ADHOC_REPS)]
        reps: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentKind {
    DipPower,
    SupportRecovery,
    Full,
    Consistency,
}

fn output(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(io::stdout().lock()),
    })
}

fn config_or_default(path: Option<&Path>) -> modescreen::Result<PipelineConfig> {
    path.map_or_else(|| Ok(PipelineConfig::default()), PipelineConfig::from_path)
}

fn run(cli: Cli) -> modescreen::Result<()> {
    let table = CriticalValueTable::bundled();
    if let Some(path) = &cli.table {
        table.load_path(path)?;
    }
    match cli.command {
        Command::Dip { input, alpha } => {
            let sample = read_single_column(File::open(input)?)?;
            let test = dip_test(&sample, alpha, &table)?;
            let mut out = io::stdout().lock();
            writeln!(out, "n,dip,critical,alpha,reject")?;
            let critical = test.critical.map(|c| c.to_string()).unwrap_or_default();
            writeln!(out, "{},{},{critical},{alpha},{}", sample.len(), test.dip.statistic, test.reject)?;
        }
        Command::Screen {
            input,
            alpha,
            correction,
            out,
        } => {
            let data = Dataset::from_csv_path(input)?;
            let selection = screen_features(&data, alpha, correction, &table)?;
            selection.write_csv(output(out.as_deref())?)?;
            eprintln!("selected: {:?} (alpha_tilde = {})", selection.selected, selection.alpha_tilde);
        }
        Command::Cluster {
            input,
            features,
            bandwidth,
            seed,
            out,
            modes_out,
        } => {
            let data = Dataset::from_csv_path(input)?;
            let features = if features.is_empty() {
                (0..data.d()).collect()
            } else {
                features
            };
            let points = data.project(&features)?;
            let h = bandwidth.select(points.view(), seed)?;
            let clustering = find_modes_and_assign(&DensityModel::new(points, h)?, &PipelineConfig::default().cluster_params(h))?;
            let names: Vec<String> = features.iter().map(|&j| data.names()[j].clone()).collect();
            clustering.write_labels_csv(output(out.as_deref())?, &names)?;
            if let Some(path) = modes_out {
                clustering.write_modes_csv(output(Some(&path))?, &names)?;
            }
            eprintln!("{} modes, h = {h}", clustering.k());
        }
        Command::Synth { spec, n, seed, out } => {
            if n == 0 {
                return Err(modescreen::Error::Input("n must be at least 1".into()));
            }
            let sample = spec.spec()?.sample(n, seed);
            sample.to_dataset()?.write_csv(output(out.as_deref())?)?;
        }
        Command::Pipeline {
            input,
            config,
            out_prefix,
        } => {
            let data = Dataset::from_csv_path(input)?;
            let config = config_or_default(config.as_deref())?;
            let report = run_pipeline(&data, &config, &table)?;
            report.write_outputs(&out_prefix)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            eprintln!(
                "selected {:?}, {} modes, outputs in {}",
                report.selection.selected,
                report.clustering.k(),
                out_prefix.display()
            );
        }
        Command::Experiment {
            kind,
            out,
            reps,
            seed,
            n,
            alpha,
            d,
            s,
            config,
        } => match kind {
            ExperimentKind::DipPower => {
                let n = n.unwrap_or_else(|| vec![50, 100, 200, 400, 800]);
                let alpha = alpha.unwrap_or_else(|| vec![0.001, 0.01, 0.05, 0.1, 0.5]);
                experiment_dip_power(&n, &alpha, reps.unwrap_or(DEFAULT_REPS), seed, &table)?.write_csv(output(out.as_deref())?)?;
            }
            ExperimentKind::SupportRecovery => {
                let n = n.unwrap_or_else(|| vec![100, 200, 400, 1000]);
                let alpha = match alpha.as_deref() {
                    None => 0.1,
                    Some([a]) => *a,
                    Some(_) => return Err(modescreen::Error::Input("support recovery takes one alpha".into())),
                };
                experiment_support_recovery(&d, &s, &n, alpha, reps.unwrap_or(50), seed, &table)?
                    .write_csv(output(out.as_deref())?)?;
            }
            ExperimentKind::Full => {
                let n = match n.as_deref() {
                    None => 1000,
                    Some([n]) => *n,
                    Some(_) => return Err(modescreen::Error::Input("full takes one n".into())),
                };
                let config = config_or_default(config.as_deref())?;
                let result = experiment_full_clustering(n, &config, seed, &table)?;
                let dir = out.unwrap_or_else(|| PathBuf::from("full"));
                result.write_outputs(&dir)?;
                eprintln!(
                    "selected {:?}, {} modes, outputs in {}",
                    result.report.selection.selected,
                    result.report.clustering.k(),
                    dir.display()
                );
            }
            ExperimentKind::Consistency => {
                let n = n.unwrap_or_else(|| vec![250, 1000, 4000]);
                experiment_mode_consistency(&n, reps.unwrap_or(20), seed)?.write_csv(output(out.as_deref())?)?;
            }
        },
        Command::Calibrate {
            n,
            alpha,
            reps,
            seed,
            out,
        } => {
            if n.is_empty() {
                return Err(modescreen::Error::Input("--n is required".into()));
            }
            let fresh = CriticalValueTable::new(seed).with_reps(reps);
            for &size in &n {
                fresh.prefill(size, &alpha)?;
            }
            fresh.write_csv(output(out.as_deref())?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
