use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qkin::metrics::ContactConfig;
use qkin::runner::{
    ablate, eval_metrics, simulate, tune, write_ablation_outputs, write_simulate_outputs,
    RunConfig, TuneConfig,
};
use qkin::seq::PoseSequence;
use qkin::skeleton::Skeleton;
use qkin::synth::{corrupt, generate, MotionSpec};
use qkin::Error;

/// Quaternion state-space kinematics simulator and evaluation harness.
#[derive(Parser)]
#[command(name = "qkin", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Args)]
struct RunArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's seed list, e.g. `--seed 0,1,2,3,4`.
    #[arg(long, value_delimiter = ',')]
    seed: Option<Vec<u64>>,
    /// Directory for trajectories, CSVs, and reports.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Track synthetic references and report the metric suite.
    Simulate(RunArgs),
    /// Run the seven-row rotation-representation / component ablation.
    Ablate(RunArgs),
    /// Evaluate metrics between a predicted and a ground-truth pose file.
    Metrics {
        /// Predicted pose sequence (JSON-lines).
        pred: PathBuf,
        /// Ground-truth pose sequence (JSON-lines).
        gt: PathBuf,
        /// Skeleton definition; built-in humanoid when omitted.
        #[arg(long)]
        skeleton: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Search constant gains that minimize the training loss on a suite.
    Tune {
        /// Tune configuration (JSON: base run config plus search spec).
        #[arg(long)]
        config: PathBuf,
        /// Write the winning gains as JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Generate a synthetic motion: clean ground truth plus noisy references.
    Gen {
        /// Motion spec (JSON).
        #[arg(long)]
        config: PathBuf,
        /// Output directory for clean.jsonl / references.jsonl.
        #[arg(long)]
        out: PathBuf,
    },
}

fn metrics_csv(report: &qkin::metrics::MetricReport) -> String {
    format!(
        "mpjpe_mm,p_mpjpe_mm,accel,g_mpjpe_mm,gre_mm,g_accel,fs_pct\n\
         {:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}\n",
        report.mpjpe,
        report.p_mpjpe,
        report.accel,
        report.g_mpjpe,
        report.gre,
        report.g_accel,
        report.fs
    )
}

fn run() -> qkin::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate(args) => {
            let mut cfg = RunConfig::load(&args.config)?;
            if let Some(seeds) = args.seed {
                cfg.seeds = seeds;
            }
            let out = simulate(&cfg)?;
            if let Some(dir) = &args.out {
                write_simulate_outputs(&out, dir)?;
            }
            match args.format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&out.report).expect("report serializes")
                ),
                Format::Csv => {
                    print!("seed,{}", metrics_csv(&out.report.mean).lines().next().unwrap());
                    println!();
                    for s in &out.report.per_seed {
                        let line = metrics_csv(&s.metrics);
                        print!("{},{}", s.seed, line.lines().nth(1).unwrap());
                        println!();
                    }
                    println!("mean,{}", metrics_csv(&out.report.mean).lines().nth(1).unwrap());
                }
                Format::Table => {
                    println!("mean over seeds {:?}", cfg.seeds);
                    print!("{}", out.report.mean.to_table());
                    println!("\nsample standard deviation");
                    print!("{}", out.report.std.to_table());
                }
            }
            Ok(())
        }
        Command::Ablate(args) => {
            let mut cfg = RunConfig::load(&args.config)?;
            if let Some(seeds) = args.seed {
                cfg.seeds = seeds;
            }
            let out = ablate(&cfg)?;
            if let Some(dir) = &args.out {
                write_ablation_outputs(&out, dir)?;
            }
            match args.format {
                Format::Json => {
                    let reports: Vec<_> = out.rows.iter().map(|r| &r.output.report).collect();
                    println!(
                        "{}",
                        serde_json::to_string_pretty(&reports).expect("reports serialize")
                    );
                }
                Format::Csv => print!("{}", out.to_csv()),
                Format::Table => print!("{}", out.to_table()),
            }
            Ok(())
        }
        Command::Metrics {
            pred,
            gt,
            skeleton,
            format,
        } => {
            let skel = match skeleton {
                Some(path) => Skeleton::load(&path)?,
                None => Skeleton::default_humanoid(),
            };
            let report = eval_metrics(&pred, &gt, &skel, &ContactConfig::default())?;
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("report serializes")
                ),
                Format::Csv => print!("{}", metrics_csv(&report)),
                Format::Table => print!("{}", report.to_table()),
            }
            Ok(())
        }
        Command::Tune {
            config,
            out,
            format,
        } => {
            let cfg: TuneConfig = serde_json::from_str(&std::fs::read_to_string(&config)?)?;
            let result = tune(&cfg)?;
            if let Some(path) = out {
                std::fs::write(
                    &path,
                    serde_json::to_string_pretty(&result).expect("result serializes"),
                )?;
            }
            match format {
                Format::Json => println!(
                    "{}",
                    serde_json::to_string_pretty(&result).expect("result serializes")
                ),
                Format::Csv => println!(
                    "kappa_p,kappa_d,kappa_a,loss\n{},{},{},{:.9}",
                    result.best.kappa_p, result.best.kappa_d, result.best.kappa_a, result.loss
                ),
                Format::Table => {
                    println!("best constant gains (loss {:.9})", result.loss);
                    println!("  kappa_p  {:>10.4}", result.best.kappa_p);
                    println!("  kappa_d  {:>10.4}", result.best.kappa_d);
                    println!("  kappa_a  {:>10.4}", result.best.kappa_a);
                }
            }
            Ok(())
        }
        Command::Gen { config, out } => {
            let spec: MotionSpec = serde_json::from_str(&std::fs::read_to_string(&config)?)?;
            spec.validate()?;
            let clean = generate(&spec)?;
            std::fs::create_dir_all(&out)?;
            clean.save(&out.join("clean.jsonl"))?;
            let noisy: PoseSequence =
                corrupt(&clean, spec.angular_sigma, spec.positional_sigma, spec.seed);
            noisy.save(&out.join("references.jsonl"))?;
            println!(
                "wrote {} frames ({} joints) to {}",
                clean.len(),
                clean.n_joints(),
                out.display()
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err @ Error::Divergence { .. }) => {
            eprintln!("error: {err}");
            ExitCode::from(3)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
