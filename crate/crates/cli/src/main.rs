use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use trgc::granger::DecisionRule;
use trgc::io::{
    analyze, model_to_json, parse_experiment_config, parse_model_json, parse_structural_json,
    read_series_csv, write_results_csv, write_series_csv, AnalysisSettings, ExperimentReport,
};
use trgc::scenarios::{run_experiment, InferenceConfig, OrderSelection};
use trgc::time_reversal::reverse_varp;
use trgc::var::simulate_seeded;
use trgc::{Result, TrgcError};

#[derive(Parser)]
#[command(name = "trgc", version, about = "Time-reversed Granger causality for bivariate time series")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a VAR model given as JSON and write the series as CSV.
    Simulate {
        /// Model JSON (`p`, `d`, `A`, `Sigma`).
        #[arg(long)]
        model: PathBuf,
        /// Number of samples.
        #[arg(long, short = 't', default_value_t = 2000)]
        length: usize,
        /// Samples discarded before output; defaults to 10·p.
        #[arg(long)]
        burn_in: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the time-reversed representation of a VAR model.
    Reverse {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a bivariate series (columns `x`, `y`) and apply decision rules.
    Analyze {
        /// Series CSV.
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        inference: InferenceArgs,
        /// Comma-separated decision rules.
        #[arg(long, value_delimiter = ',', default_value = "standard-gc,net-gc,diff-trgc")]
        method: Vec<DecisionRule>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte-Carlo experiment from a TOML configuration.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        order: Option<OrderSelection>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        boot: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        method: Option<Vec<DecisionRule>>,
        #[arg(long)]
        reps: Option<usize>,
        /// Output prefix; writes `<out>.csv` and `<out>.json`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Convert an SVAR or mixture model JSON to a VAR model JSON.
    Convert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct InferenceArgs {
    /// Lag order, or `bic`.
    #[arg(long, default_value = "bic")]
    order: OrderSelection,
    /// Largest order considered by BIC.
    #[arg(long, default_value_t = 10)]
    p_max: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 500)]
    boot: usize,
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| TrgcError::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn check_parent(path: &Path) -> Result<()> {
    match path.parent() {
        Some(dir) if !dir.as_os_str().is_empty() && !dir.is_dir() => Err(TrgcError::InvalidInput(format!(
            "output directory {} does not exist",
            dir.display()
        ))),
        _ => Ok(()),
    }
}

/// Writes `text` to `out`, or stdout when no path is given.
fn emit(out: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write(&mut w)?;
            w.flush()?;
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
        }
    }
    Ok(())
}

fn emit_text(out: Option<&Path>, text: &str) -> Result<()> {
    emit(out, |w| {
        writeln!(w, "{text}")?;
        Ok(())
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate {
            model,
            length,
            burn_in,
            seed,
            out,
        } => {
            if let Some(o) = &out {
                check_parent(o)?;
            }
            let model = parse_model_json(&read_text(&model)?)?;
            let burn_in = burn_in.unwrap_or(10 * model.order());
            let series = simulate_seeded(&model, length, seed, burn_in)?;
            emit(out.as_deref(), |w| write_series_csv(&series, w))
        }
        Command::Reverse { model, out } => {
            if let Some(o) = &out {
                check_parent(o)?;
            }
            let model = parse_model_json(&read_text(&model)?)?;
            emit_text(out.as_deref(), &model_to_json(&reverse_varp(&model)?)?)
        }
        Command::Analyze {
            input,
            inference,
            method,
            seed,
            out,
        } => {
            if let Some(o) = &out {
                check_parent(o)?;
            }
            let series = read_series_csv(BufReader::new(File::open(&input)?))?;
            let settings = AnalysisSettings {
                inference: InferenceConfig {
                    order: inference.order,
                    p_max: inference.p_max,
                    alpha: inference.alpha,
                    n_boot: inference.boot,
                },
                methods: method,
                seed,
            };
            let report = analyze(&series, &settings)?;
            emit_text(out.as_deref(), &serde_json::to_string_pretty(&report)?)
        }
        Command::Experiment {
            config,
            seed,
            order,
            alpha,
            boot,
            method,
            reps,
            out,
        } => {
            let csv_path = out.with_extension("csv");
            let json_path = out.with_extension("json");
            check_parent(&csv_path)?;
            let text = read_text(&config)?;
            let mut cfg = parse_experiment_config(&text)?;
            if let Some(s) = seed {
                cfg.scenario.seed = s;
            }
            if let Some(o) = order {
                cfg.inference.order = o;
            }
            if let Some(a) = alpha {
                cfg.inference.alpha = a;
            }
            if let Some(b) = boot {
                cfg.inference.n_boot = b;
            }
            if let Some(m) = method {
                cfg.methods = m;
            }
            if let Some(r) = reps {
                cfg.scenario.n_reps = r;
            }
            let result = run_experiment(&cfg)?;
            for c in &result.conditions {
                if !c.failures.is_empty() {
                    eprintln!(
                        "warning: {} of {} repetitions failed under {}",
                        c.failures.len(),
                        c.seeds.len(),
                        c.condition
                    );
                }
            }
            emit(Some(&csv_path), |w| write_results_csv(&result, w))?;
            let report = ExperimentReport {
                config_text: text,
                result,
            };
            emit_text(Some(&json_path), &serde_json::to_string_pretty(&report)?)
        }
        Command::Convert { input, out } => {
            if let Some(o) = &out {
                check_parent(o)?;
            }
            let model = parse_structural_json(&read_text(&input)?)?.to_var()?;
            emit_text(out.as_deref(), &model_to_json(&model)?)
        }
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("TRGC_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|&n| n >= 1)
            .ok_or_else(|| TrgcError::InvalidInput(format!("TRGC_THREADS must be a positive integer, got `{v}`")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| TrgcError::Internal(e.to_string()))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match configure_threads().and_then(|_| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::FAILURE
        }
    }
}
