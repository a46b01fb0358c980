use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use privforge::corpus::{load_dataset, save_dataset, Dataset, PromptCodePair};
use privforge::evaluation::{load_canaries, load_tasks, measure_leakage, run_benchmark};
use privforge::filters::{execution_validate, round_trip_validate, RoundTripConfig};
use privforge::lm::load_checkpoint;
use privforge::minilang::ExecBudget;
use privforge::pipeline::{run_pipeline, train_junior, Mode, PipelineConfig};
use privforge::privacy::{calibrate_sigma, epsilon_for, Conversion};
use privforge::synth::{batch_generate, SamplingConfig, Strategy};

/// `println!` that tolerates a closed stdout, e.g. when piped into `head`.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

/// Where reports go when `--out` is not given.
const REPORT_DIR_ENV: &str = "PRIVFORGE_REPORT_DIR";

#[derive(Parser)]
#[command(name = "privforge", version, about = "Two-stage differentially private code synthesis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FilterStage {
    Exec,
    Roundtrip,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Greedy,
    TopK,
    Temperature,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConversionArg {
    Classic,
    Improved,
}

impl From<ConversionArg> for Conversion {
    fn from(c: ConversionArg) -> Self {
        match c {
            ConversionArg::Classic => Conversion::Classic,
            ConversionArg::Improved => Conversion::Improved,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a full workflow from a config file.
    Pipeline {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the mode in the config.
        #[arg(long)]
        mode: Option<Mode>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = REPORT_DIR_ENV)]
        out: Option<PathBuf>,
        /// Directory for reusable public-pretraining checkpoints.
        #[arg(long)]
        pretrain_cache: Option<PathBuf>,
    },
    /// Stage one only: DP-train the junior model.
    TrainDp {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, env = REPORT_DIR_ENV)]
        out: Option<PathBuf>,
    },
    /// Sample snippets from a checkpoint for every prompt in a dataset.
    Generate {
        #[arg(long)]
        checkpoint: PathBuf,
        /// Dataset whose prompts are used; its code is ignored.
        #[arg(long)]
        prompts: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "temperature")]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 1.0)]
        temperature: f64,
        #[arg(long, default_value_t = 40)]
        top_k: usize,
        #[arg(long, default_value_t = 256)]
        max_tokens: usize,
        #[arg(long, default_value_t = 1)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Execution and/or round-trip filtering of a generated dataset.
    Filter {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "both")]
        stage: FilterStage,
        #[arg(long, default_value_t = 0.88)]
        tau: f64,
        #[arg(long, default_value_t = 100_000)]
        budget_steps: u64,
        /// Stats file; defaults to `<out>.stats.json`.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Greedy pass@1 on a task file.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        tasks: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 256)]
        max_tokens: usize,
    },
    /// Canary leakage audit of a checkpoint.
    Audit {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        canaries: PathBuf,
        /// Dataset of prompts to sample from; defaults to the canary prompts.
        #[arg(long)]
        prompts: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 500)]
        samples: usize,
        #[arg(long, default_value_t = 1.0)]
        temperature: f64,
        #[arg(long, default_value_t = 256)]
        max_tokens: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Privacy cost of a DP-SGD run, or the noise needed for a target.
    Accountant {
        /// Sampling rate.
        #[arg(long)]
        q: f64,
        /// Noise multiplier; omit to calibrate it for `--epsilon`.
        #[arg(long, required_unless_present = "epsilon")]
        sigma: Option<f64>,
        #[arg(long, conflicts_with = "sigma")]
        epsilon: Option<f64>,
        #[arg(long)]
        steps: usize,
        #[arg(long, default_value_t = 1e-5)]
        delta: f64,
        #[arg(long, value_enum, default_value = "classic")]
        conversion: ConversionArg,
    },
}

fn report_dir(out: Option<PathBuf>, cfg: &PipelineConfig) -> PathBuf {
    out.unwrap_or_else(|| PathBuf::from(format!("privforge-runs/{}-{}", cfg.mode.name(), cfg.seed)))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Pipeline {
            config,
            mode,
            seed,
            out,
            pretrain_cache,
        } => {
            let mut cfg = PipelineConfig::load(&config)?;
            if pretrain_cache.is_some() {
                cfg.pretrain_cache = pretrain_cache;
            }
            if let Some(m) = mode {
                cfg.mode = m;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let dir = report_dir(out, &cfg);
            let report = run_pipeline(&cfg, &dir)?;
            for p in &report.postconditions {
                say!("{} {}", if p.holds { "ok  " } else { "FAIL" }, p.name);
            }
            say!(
                "mode={} pass@1={:.3} compile={:.3} report={}",
                cfg.mode.name(),
                report.eval.pass_at_1,
                report.eval.compile_pass_rate,
                dir.display()
            );
            Ok(report.ok())
        }
        Command::TrainDp { config, out } => {
            let cfg = PipelineConfig::load(&config)?;
            let dir = report_dir(out, &cfg);
            let privacy = train_junior(&cfg, &dir)?;
            say!("{}", serde_json::to_string_pretty(&privacy)?);
            Ok(true)
        }
        Command::Generate {
            checkpoint,
            prompts,
            out,
            strategy,
            temperature,
            top_k,
            max_tokens,
            samples,
            seed,
        } => {
            let ck = load_checkpoint(&checkpoint)?;
            let prompts = load_dataset(&prompts)?.prompts();
            let strategy = match strategy {
                StrategyArg::Greedy => Strategy::Greedy,
                StrategyArg::TopK => Strategy::TopK { k: top_k },
                StrategyArg::Temperature => Strategy::Temperature { temperature },
            };
            let sampling = SamplingConfig {
                strategy,
                max_tokens,
                seed,
            };
            let gens = batch_generate(&ck.params, &ck.config, &prompts, &sampling, samples)?;
            let ds = Dataset::new(
                "generated",
                gens.into_iter().map(|g| PromptCodePair::new(g.prompt, g.snippet.source)).collect(),
            );
            save_dataset(&ds, &out)?;
            say!("wrote {} records to {}", ds.len(), out.display());
            Ok(true)
        }
        Command::Filter {
            input,
            out,
            stage,
            tau,
            budget_steps,
            report,
        } => {
            let ds = load_dataset(&input)?;
            let budget = ExecBudget::new(budget_steps, ExecBudget::default().max_output_bytes)?;
            let rt = RoundTripConfig {
                threshold: tau,
                ..Default::default()
            };
            if let Err(e) = rt.validate() {
                bail!("invalid --tau: {e}");
            }
            let mut stats = serde_json::Map::new();
            let mut current = ds;
            if matches!(stage, FilterStage::Exec | FilterStage::Both) {
                let (kept, s) = execution_validate(&current, budget);
                stats.insert("execution".into(), serde_json::to_value(&s)?);
                current = kept;
            }
            if matches!(stage, FilterStage::Roundtrip | FilterStage::Both) {
                let (kept, log) = round_trip_validate(&current, &rt);
                stats.insert("round_trip_input".into(), current.len().into());
                stats.insert("round_trip_kept".into(), kept.len().into());
                stats.insert("round_trip_log".into(), serde_json::to_value(&log)?);
                current = kept;
            }
            save_dataset(&current, &out)?;
            let report = report.unwrap_or_else(|| out.with_extension("stats.json"));
            write_json(&report, &stats)?;
            say!("kept {} records; stats in {}", current.len(), report.display());
            Ok(true)
        }
        Command::Evaluate {
            checkpoint,
            tasks,
            out,
            max_tokens,
        } => {
            let ck = load_checkpoint(&checkpoint)?;
            let tasks = load_tasks(&tasks)?;
            let report = run_benchmark(&ck.params, &ck.config, &tasks, max_tokens, ExecBudget::default())?;
            write_json(&out, &report)?;
            say!(
                "pass@1={:.3} compile={:.3} exec={:.3}",
                report.pass_at_1, report.compile_pass_rate, report.execution_pass_rate
            );
            Ok(true)
        }
        Command::Audit {
            checkpoint,
            canaries,
            prompts,
            out,
            samples,
            temperature,
            max_tokens,
            seed,
        } => {
            let ck = load_checkpoint(&checkpoint)?;
            let specs = load_canaries(&canaries)?;
            let prompts = match prompts {
                Some(p) => load_dataset(&p)?.prompts(),
                None => specs.iter().map(|s| s.sample.prompt.clone()).collect(),
            };
            let sampling = SamplingConfig {
                strategy: Strategy::Temperature { temperature },
                max_tokens,
                seed,
            };
            let gens = batch_generate(&ck.params, &ck.config, &prompts, &sampling, samples)?;
            let report = measure_leakage(&gens, &specs);
            write_json(&out, &report)?;
            say!("leakage_rate={:.1}", report.leakage_rate);
            Ok(true)
        }
        Command::Accountant {
            q,
            sigma,
            epsilon,
            steps,
            delta,
            conversion,
        } => {
            let conversion = conversion.into();
            let sigma = match (sigma, epsilon) {
                (Some(s), _) => s,
                (None, Some(e)) => calibrate_sigma(q, steps, delta, e, conversion)?,
                (None, None) => bail!("pass --sigma or --epsilon"),
            };
            let report = epsilon_for(q, sigma, steps, delta, conversion)?;
            say!("sigma = {sigma}");
            say!("epsilon = {}", report.epsilon);
            say!("delta = {}", report.delta);
            say!("best_order = {}", report.best_order);
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
