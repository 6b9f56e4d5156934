//! `spectro` — batch front-end over the library pipelines.

use clap::{Args, Parser, Subcommand};
use spectro::fixtures::{run_fixture, FixtureResult, DEFAULT_SEED, FIXTURE_NAMES, HEAVY_FIXTURES};
use spectro::runner::{run_dispersion, run_noise_benchmark, run_spectrum, RunConfig};
use spectro::Error;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "spectro",
    about = "Transition energies and excitation spectra from simulated quantum dynamics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's `outputs` field).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed override.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate a spectral detector and locate its peaks.
    Spectrum(RunArgs),
    /// Site-resolved spectra, momentum transform, and dispersion extraction.
    Dispersion(RunArgs),
    /// Noise benchmark, decay fit, and optionally mitigated spectra.
    NoiseBench(RunArgs),
    /// Run validation fixtures and report pass/fail.
    Validate {
        /// Comma-separated fixture names, or "all". Defaults to the light
        /// set (the 11- and 13-site fixtures diagonalize large systems).
        #[arg(long, value_delimiter = ',')]
        fixtures: Option<Vec<String>>,
        /// Master seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Also write the results as JSON lines under this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Config(_) | Error::Parse { .. } => 2,
        Error::ResourceCap { .. } => 3,
        _ => 1,
    }
}

fn load_and_run(
    args: &RunArgs,
    run: fn(&RunConfig, &Path, &Path) -> spectro::Result<spectro::runner::RunArtifacts>,
) -> Result<(), Error> {
    let mut config = RunConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        config.sampling.seed = seed;
    }
    let base_dir = args
        .config
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or_else(|| Path::new("."))
        .to_path_buf();
    let out_dir = match (&args.out, &config.outputs) {
        (Some(out), _) => out.clone(),
        (None, Some(out)) => base_dir.join(out),
        (None, None) => {
            return Err(Error::Config(
                "outputs: set the config's `outputs` field or pass --out".into(),
            ))
        }
    };
    let artifacts = run(&config, &base_dir, &out_dir)?;
    for file in &artifacts.files {
        println!("wrote {}", file.display());
    }
    Ok(())
}

fn run_validate(
    fixtures: Option<Vec<String>>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<bool, Error> {
    let names: Vec<String> = match fixtures {
        None => FIXTURE_NAMES
            .iter()
            .filter(|n| !HEAVY_FIXTURES.contains(n))
            .map(|s| s.to_string())
            .collect(),
        Some(list) if list.len() == 1 && list[0] == "all" => {
            FIXTURE_NAMES.iter().map(|s| s.to_string()).collect()
        }
        Some(list) => list,
    };
    let seed = seed.unwrap_or(DEFAULT_SEED);
    let mut results: Vec<FixtureResult> = Vec::new();
    for name in &names {
        let result = run_fixture(name, seed)?;
        println!(
            "{} {} ({} measurements)",
            if result.pass { "PASS" } else { "FAIL" },
            result.name,
            result.measurements.len()
        );
        results.push(result);
    }
    let lines: String = results
        .iter()
        .map(|r| r.to_json_line())
        .collect::<Vec<_>>()
        .join("\n")
        + "\n";
    match out {
        Some(dir) => {
            std::fs::create_dir_all(&dir)?;
            let path = dir.join("fixtures.jsonl");
            std::fs::write(&path, &lines)?;
            println!("wrote {}", path.display());
        }
        None => print!("{lines}"),
    }
    Ok(results.iter().all(|r| r.pass))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome: Result<bool, Error> = match cli.command {
        Command::Spectrum(args) => load_and_run(&args, run_spectrum).map(|_| true),
        Command::Dispersion(args) => load_and_run(&args, run_dispersion).map(|_| true),
        Command::NoiseBench(args) => load_and_run(&args, run_noise_benchmark).map(|_| true),
        Command::Validate {
            fixtures,
            seed,
            out,
        } => run_validate(fixtures, seed, out),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
