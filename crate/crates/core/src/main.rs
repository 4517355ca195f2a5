//! Command-line front end: one subcommand per stage of the experiment.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use hyperghost::io::config::{ExperimentConfig, Preset};
use hyperghost::pipeline;
use hyperghost::polarization::{
    channel_settings, joint_probability, optimize_hardy, solve_hardy_angles, PolarizationState,
};
use hyperghost::Error;

#[derive(Parser)]
#[command(
    name = "hyperghost",
    version,
    about = "Hyper-entangled ghost-imaging simulator with Hardy nonlocality analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Config sources shared by the pipeline-style subcommands. Precedence:
/// preset < config file < individual flags.
#[derive(Args)]
struct ConfigArgs {
    /// Named parameter set: noise-free or paper-noisy.
    #[arg(long, default_value = "noise-free")]
    preset: String,
    /// key = value config file layered over the preset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Detector seed override.
    #[arg(long)]
    seed: Option<u64>,
    /// Additional key=value overrides (repeatable), e.g. --set grid.n=128.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let preset: Preset = self.preset.parse()?;
        let mut cfg = ExperimentConfig::preset(preset);
        if let Some(path) = &self.config {
            cfg = ExperimentConfig::parse_file(path, cfg)?;
        }
        if !self.set.is_empty() {
            let text: String = self
                .set
                .iter()
                .map(|kv| kv.replacen('=', " = ", 1) + "\n")
                .collect();
            cfg = ExperimentConfig::parse_over(cfg, &text)?;
        }
        if let Some(seed) = self.seed {
            cfg.detector.seed = seed;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Maximize the Hardy probability over the state family.
    Optimize,
    /// Solve the Hardy zero conditions for given amplitudes.
    Angles {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        beta: f64,
    },
    /// Write noise-free channel images.
    Image {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo acquisition: raw backgrounds and subtracted images.
    Acquire {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Analyze a directory of saved channel images.
    Analyze {
        #[command(flatten)]
        config: ConfigArgs,
        /// Directory holding channel_1..4.pgm, hh.pgm, vv.pgm.
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full pipeline: image, acquire, analyze, write the bundle.
    Run {
        #[command(flatten)]
        config: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {e}", e.code());
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<(), Error> {
    match command {
        Command::Optimize => {
            let opt = optimize_hardy();
            println!("alpha = {}", opt.alpha);
            println!("beta = {}", opt.beta);
            println!("theta0_deg = {}", opt.angles.theta0.to_degrees());
            println!("theta1_deg = {}", opt.angles.theta1.to_degrees());
            println!("probability = {}", opt.probability);
            Ok(())
        }
        Command::Angles { alpha, beta } => {
            let angles = solve_hardy_angles(alpha, beta)?;
            let p = hyperghost::hardy_probability(alpha, beta)?;
            println!("theta0_deg = {}", angles.theta0.to_degrees());
            println!("theta1_deg = {}", angles.theta1.to_degrees());
            println!("theta0_bar_deg = {}", angles.theta0_barred().to_degrees());
            println!("theta1_bar_deg = {}", angles.theta1_barred().to_degrees());
            println!("hardy_probability = {p}");
            // residuals of the three zero conditions at the solved angles
            let norm = (alpha * alpha + beta * beta).sqrt();
            let state = PolarizationState::from_hardy(
                alpha / norm,
                beta / norm,
                std::f64::consts::PI,
            )?;
            for channel in 1..=3u8 {
                let (sig, idl) = channel_settings(channel, &angles)?;
                let residual = joint_probability(&state, sig, idl)?;
                println!("zero_condition_{channel} = {residual}");
            }
            Ok(())
        }
        Command::Image { config, out } => {
            let mut cfg = config.resolve()?;
            cfg.detection = hyperghost::io::DetectionMode::Analytic;
            let summary = pipeline::run_pipeline(&cfg, &out)?;
            print_summary(&summary);
            Ok(())
        }
        Command::Acquire { config, out } => {
            let mut cfg = config.resolve()?;
            cfg.detection = hyperghost::io::DetectionMode::MonteCarlo;
            let summary = pipeline::run_pipeline(&cfg, &out)?;
            print_summary(&summary);
            Ok(())
        }
        Command::Analyze { config, input, out } => {
            let cfg = config.resolve()?;
            let setup = pipeline::prepare(&cfg)?;
            let images = pipeline::read_channel_images(&input)?;
            let analysis =
                pipeline::analyze(&images, &setup.mask, &setup.rois, cfg.histogram_bins)?;
            std::fs::create_dir_all(&out)?;
            hyperghost::io::csvio::write_cnr_table(&out.join(pipeline::CNR_FILE), &analysis.cnr)?;
            hyperghost::io::csvio::write_s_map(
                &out.join(pipeline::S_MAP_FILE),
                &analysis.report.s_map,
            )?;
            hyperghost::io::csvio::write_histogram(
                &out.join(pipeline::HISTOGRAM_FILE),
                &analysis.histogram,
            )?;
            println!("s_value = {}", analysis.report.s_value);
            println!("p_11 = {}", analysis.report.p_11);
            println!("positive_fraction = {}", analysis.report.positive_fraction);
            Ok(())
        }
        Command::Run { config, out } => {
            let cfg = config.resolve()?;
            let summary = pipeline::run_pipeline(&cfg, &out)?;
            print_summary(&summary);
            Ok(())
        }
    }
}

fn print_summary(summary: &pipeline::PipelineSummary) {
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    println!("theta0_deg = {}", summary.angles.theta0.to_degrees());
    println!("theta1_deg = {}", summary.angles.theta1.to_degrees());
    for (i, p) in summary.channel_probabilities.iter().enumerate() {
        println!("p_channel_{} = {p}", i + 1);
    }
    println!("p_11 = {}", summary.report.p_11);
    println!("s_value = {}", summary.report.s_value);
    println!("positive_fraction = {}", summary.report.positive_fraction);
    for (label, value) in &summary.cnr {
        match value {
            Some(v) => println!("cnr_{label} = {v}"),
            None => println!("cnr_{label} = nan"),
        }
    }
    println!("bundle = {}", summary.out_dir.display());
}
