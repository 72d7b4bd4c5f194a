use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use rainbench::framecore::io::{frame_file_name, save_frame};
use rainbench::harness::{
    apply_derainer, emit_report, generate_dataset, run_restoration_eval, run_segmentation_eval, run_tracking_eval,
    DatasetManifest, EvalConfig, EvalReport, HarnessError, SequenceData, SynthConfig,
};
use rainbench::track::write_tracking_csv;

#[derive(Parser)]
#[command(name = "rainbench", version, about = "Rain removal and its effect on segmentation and tracking")]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; falls back to `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Render a synthetic rain dataset and its manifest.
    Synth {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write the output of every configured derainer.
    Derain(EvalArgs),
    /// Score foreground segmentation against ground-truth masks.
    EvalSeg(EvalArgs),
    /// Count features that survive forward-backward tracking.
    EvalTrack(EvalArgs),
    /// Score derained frames against clean references.
    EvalRestore(EvalArgs),
    /// Render a report CSV as markdown tables.
    Report {
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_inputs(args: &EvalArgs) -> Result<(DatasetManifest, EvalConfig, PathBuf), HarnessError> {
    let manifest = DatasetManifest::load(&args.manifest)?;
    let mut config = match &args.config {
        Some(p) => EvalConfig::load(p)?,
        None => EvalConfig::default(),
    };
    if let Some(s) = args.seed {
        config.seed = s;
    }
    let out = match (&args.out, &config.output_dir) {
        (Some(o), _) => o.clone(),
        (None, Some(o)) => config.resolve(o),
        (None, None) => return Err(HarnessError::Config("no output directory given".into())),
    };
    Ok((manifest, config, out))
}

fn write_report(report: &EvalReport, out: &Path) -> Result<(), HarnessError> {
    let (csv, md) = emit_report(report, out)?;
    info!("wrote {} and {}", csv.display(), md.display());
    Ok(())
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    if let Some(n) = cli.jobs {
        if n == 0 {
            return Err(HarnessError::Config("--jobs must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
    }
    match cli.command {
        Command::Synth { config, out, seed } => {
            let mut cfg = SynthConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let m = generate_dataset(&cfg, &out)?;
            info!("rendered {} sequences into {}", m.sequences.len(), out.display());
        }
        Command::Derain(args) => {
            let (manifest, config, out) = load_inputs(&args)?;
            config.validate()?;
            for entry in &manifest.sequences {
                let data = SequenceData::load(&manifest, entry)?;
                for d in &config.derainers {
                    let seq = apply_derainer(d, &data, &config.base_dir)?;
                    let dir = out.join(d.label()).join(&data.name);
                    std::fs::create_dir_all(&dir).map_err(|source| HarnessError::Io { path: dir.clone(), source })?;
                    for (f, idx) in seq.frames().iter().zip(&data.indices) {
                        save_frame(&dir.join(frame_file_name(*idx)), f)?;
                    }
                }
            }
        }
        Command::EvalSeg(args) => {
            let (manifest, config, out) = load_inputs(&args)?;
            write_report(&run_segmentation_eval(&manifest, &config)?, &out)?;
        }
        Command::EvalTrack(args) => {
            let (manifest, config, out) = load_inputs(&args)?;
            let (report, runs) = run_tracking_eval(&manifest, &config)?;
            write_report(&report, &out)?;
            let path = out.join("tracks.csv");
            let file = std::fs::File::create(&path).map_err(|source| HarnessError::Io { path: path.clone(), source })?;
            write_tracking_csv(runs.iter().map(|(s, d, r)| (s.as_str(), d.as_str(), r)), file)?;
        }
        Command::EvalRestore(args) => {
            let (manifest, config, out) = load_inputs(&args)?;
            write_report(&run_restoration_eval(&manifest, &config)?, &out)?;
        }
        Command::Report { csv, out } => {
            let file = std::fs::File::open(&csv).map_err(|source| HarnessError::Io { path: csv.clone(), source })?;
            let report = EvalReport::read_csv(file)?;
            std::fs::write(&out, report.to_markdown()).map_err(|source| HarnessError::Io { path: out.clone(), source })?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
