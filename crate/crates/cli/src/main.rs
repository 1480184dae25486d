use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::{info, warn};

use wilt_core::forest::{ForestParams, DEFAULT_TREES};
use wilt_core::pipeline::report::{parse_pairs, predictions_csv, BASELINE_DPI};
use wilt_core::pipeline::table::{load_metrics, save_metrics};
use wilt_core::pipeline::{plot, run_analyze, run_forest, run_stats, with_workers, Manifest};
use wilt_core::synth::{generate, SynthParams};
use wilt_core::WiltError;

const EXIT_VALIDATION: u8 = 1;
const EXIT_PARTIAL: u8 = 2;
const EXIT_INTERNAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "wilt", version, about = "Image-based wilting phenotyping")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Measure every view in a manifest and write the per-plant, per-day metrics table.
    Analyze {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores). Output does not depend on it.
        #[arg(long)]
        jobs: Option<usize>,
        /// Also write one box plot per metric into this directory.
        #[arg(long)]
        plots: Option<PathBuf>,
    },
    /// Welch t-tests between groups on a metric's change, and Kruskal–Wallis
    /// on the color distance across days.
    Stats {
        #[arg(long)]
        metrics: PathBuf,
        #[arg(long, default_value = "cm_hor_dis")]
        metric: String,
        #[arg(long, default_value_t = BASELINE_DPI, allow_negative_numbers = true)]
        from_dpi: i32,
        #[arg(long, default_value_t = 3, allow_negative_numbers = true)]
        to_dpi: i32,
        /// `all` or a comma-separated list such as `inoc_ha-vs-inoc_wv`.
        #[arg(long, default_value = "all")]
        pairs: String,
        /// Report CSV path; printed to stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        plots: Option<PathBuf>,
    },
    /// Train and evaluate the wilted / not-wilted random forest.
    Forest {
        #[arg(long)]
        metrics: PathBuf,
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TREES)]
        trees: usize,
        /// Directory receiving model.json, report.csv and predictions.csv.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Render a synthetic cohort with known ground truth.
    Synth {
        /// JSON parameters; built-in defaults when absent.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
    },
}

enum Failure {
    Validation(String),
    Internal(String),
}

impl From<WiltError> for Failure {
    fn from(e: WiltError) -> Self {
        match e {
            WiltError::Singular(_)
            | WiltError::DegenerateStem(_)
            | WiltError::DegenerateHull { .. }
            | WiltError::EmptyMask => Failure::Internal(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::Validation(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

/// Returns `true` when every view was measured.
fn run(cmd: Command) -> Result<bool, Failure> {
    match cmd {
        Command::Analyze {
            manifest,
            out,
            jobs,
            plots,
        } => {
            let m = Manifest::load(&manifest)?;
            info!("{} plants, {} views", m.plants.len(), m.view_count());
            let outcome = run_analyze(&m, jobs)?;
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| Failure::Validation(format!("{}: {e}", dir.display())))?;
            }
            save_metrics(&outcome.records, &out)?;
            if let Some(dir) = plots {
                plot::metric_plots(&outcome.records, &dir)?;
            }
            if outcome.failed_views > 0 {
                warn!("{} of {} views failed", outcome.failed_views, m.view_count());
            }
            Ok(outcome.failed_views == 0)
        }
        Command::Stats {
            metrics,
            metric,
            from_dpi,
            to_dpi,
            pairs,
            out,
            plots,
        } => {
            let records = load_metrics(&metrics)?;
            let pairs = parse_pairs(&pairs)?;
            let report = run_stats(&records, &pairs, &metric, from_dpi, to_dpi)?;
            let csv = report.to_csv()?;
            match out {
                Some(path) => write_file(&path, &csv)?,
                None => print!("{csv}"),
            }
            if let Some(dir) = plots {
                plot::stats_plots(&report.deltas, &report.bd, &metric, BASELINE_DPI, &dir)?;
            }
            Ok(true)
        }
        Command::Forest {
            metrics,
            manifest,
            seed,
            trees,
            out,
            jobs,
        } => {
            let records = load_metrics(&metrics)?;
            let m = Manifest::load(&manifest)?;
            let params = ForestParams {
                n_trees: trees,
                ..ForestParams::default()
            };
            let outcome = with_workers(jobs, || run_forest(&records, &m, &params, seed))??;
            write_file(&out.join("model.json"), &outcome.model.to_json()?)?;
            write_file(&out.join("report.csv"), &outcome.report.to_csv())?;
            write_file(&out.join("predictions.csv"), &predictions_csv(&outcome.predictions)?)?;
            info!(
                "trained on {} plants, macro F1 {:.2} on {}",
                outcome.n_train,
                outcome.report.macro_f1(),
                outcome.predictions.len()
            );
            Ok(true)
        }
        Command::Synth { params, out, jobs } => {
            let p: SynthParams = match params {
                Some(path) => {
                    let text =
                        fs::read_to_string(&path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
                    SynthParams::from_json(&text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?
                }
                None => SynthParams::default(),
            };
            let generated = with_workers(jobs, || generate(&p, &out))??;
            info!(
                "wrote {} plants to {}",
                generated.manifest.plants.len(),
                generated.manifest_path.display()
            );
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("WILT_LOG", "warn")).init();
    let cli = Cli::parse();
    match std::panic::catch_unwind(|| run(cli.command)) {
        Ok(Ok(true)) => ExitCode::SUCCESS,
        Ok(Ok(false)) => ExitCode::from(EXIT_PARTIAL),
        Ok(Err(Failure::Validation(msg))) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Ok(Err(Failure::Internal(msg))) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(EXIT_INTERNAL)
        }
        Err(_) => ExitCode::from(EXIT_INTERNAL),
    }
}
