//! `sketch3d` command-line tool.
//!
//! Exit codes: 0 on success, 1 when a property or self-test check fails,
//! 2 on usage or I/O errors.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use sketch3d::eval::{evaluate, format_sig9, EvalManifest};
use sketch3d::lossgrad::gradcheck;
use sketch3d::mlsdeform::{augment, deform_sketch, ControlPairSet, DEFAULT_FIELD_SPACING};
use sketch3d::pipeline::{standardize, StandardizeConfig};
use sketch3d::pointcloud::{chamfer, emd_exact, parse_pc3d, parse_xyz, PointCloud};
use sketch3d::selftest::run_selftest;
use sketch3d::sketchimg::{read_pgm, write_pgm};

use config::FileConfig;

#[derive(Parser)]
#[command(
    name = "sketch3d",
    version,
    about = "Sketch standardization, point-cloud metrics, and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    Cd,
    Emd,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Compute point-cloud distances between two cloud files (.xyz or .pc3d)
    Metrics {
        cloud_a: PathBuf,
        cloud_b: PathBuf,
        /// Which metric(s) to print
        #[arg(long, value_enum, default_value = "both")]
        which: Which,
    },
    /// Evaluate predicted clouds against a dataset manifest
    Eval {
        /// Dataset manifest (tab-separated: id, category, sketch, cloud, view)
        #[arg(long)]
        manifest: PathBuf,
        /// Directory holding one `<id>.xyz` prediction per manifest entry
        #[arg(long)]
        predictions: PathBuf,
        /// Output CSV path (columns: category, n, cd_e4, emd_e2)
        #[arg(long)]
        output: PathBuf,
    },
    /// Standardize a sketch: binarize, dilate, refine
    Standardize {
        input: PathBuf,
        output: PathBuf,
        /// Binarization threshold in (0, 1)
        #[arg(long)]
        threshold: Option<f64>,
        /// Dilation radius in pixels
        #[arg(long)]
        radius: Option<usize>,
        /// Dilation iteration count
        #[arg(long)]
        iterations: Option<usize>,
        /// Refiner name (identity or thinning)
        #[arg(long)]
        refiner: Option<String>,
        /// Config file with key=value defaults
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Warp a sketch by a control-point CSV deformation
    Deform {
        input: PathBuf,
        controls: PathBuf,
        output: PathBuf,
        /// Deformation field lattice spacing in pixels
        #[arg(long)]
        spacing: Option<usize>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Rotate then translate a sketch (backward warp, bilinear)
    Augment {
        input: PathBuf,
        output: PathBuf,
        /// Horizontal translation in pixels
        #[arg(long, default_value_t = 0.0)]
        dx: f64,
        /// Vertical translation in pixels
        #[arg(long, default_value_t = 0.0)]
        dy: f64,
        /// Rotation in degrees about the image center
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
    },
    /// Verify analytic gradients against central finite differences
    Gradcheck {
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Run the cross-module oracle checks
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Metrics {
            cloud_a,
            cloud_b,
            which,
        } => {
            let a = read_cloud(&cloud_a)?;
            let b = read_cloud(&cloud_b)?;
            if matches!(which, Which::Cd | Which::Both) {
                println!("cd {}", format_sig9(chamfer(&a, &b)));
            }
            if matches!(which, Which::Emd | Which::Both) {
                let (cost, _) = emd_exact(&a, &b)?;
                println!("emd {}", format_sig9(cost));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval {
            manifest,
            predictions,
            output,
        } => {
            let manifest = EvalManifest::load(&manifest)?;
            let table = evaluate(&manifest, &predictions)?;
            let csv = table.to_csv();
            fs::write(&output, &csv).with_context(|| format!("writing {}", output.display()))?;
            print!("{csv}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Standardize {
            input,
            output,
            threshold,
            radius,
            iterations,
            refiner,
            config,
        } => {
            let file = FileConfig::load(config.as_deref())?;
            let defaults = StandardizeConfig::default();
            let cfg = StandardizeConfig {
                threshold: resolve(threshold, &file, "threshold", defaults.threshold)?,
                dilation_radius: resolve(radius, &file, "radius", defaults.dilation_radius)?,
                dilation_iterations: resolve(
                    iterations,
                    &file,
                    "iterations",
                    defaults.dilation_iterations,
                )?,
                refiner: resolve(refiner, &file, "refiner", defaults.refiner)?,
            };
            let img = read_pgm(&input)?;
            let out = standardize(&img, &cfg)?;
            write_pgm(&out, &output)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Deform {
            input,
            controls,
            output,
            spacing,
            config,
        } => {
            let file = FileConfig::load(config.as_deref())?;
            let spacing = resolve(spacing, &file, "spacing", DEFAULT_FIELD_SPACING)?;
            let img = read_pgm(&input)?;
            let controls = ControlPairSet::read_csv(&controls)?;
            let out = deform_sketch(&img, &controls, spacing)?;
            write_pgm(&out, &output)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Augment {
            input,
            output,
            dx,
            dy,
            theta,
        } => {
            if dx.abs() > 10.0 || dy.abs() > 10.0 {
                eprintln!(
                    "warning: translation ({dx}, {dy}) is outside the +/-10 px augmentation range"
                );
            }
            if theta.abs() > 10.0 {
                eprintln!(
                    "warning: rotation {theta} deg is outside the +/-10 deg augmentation range"
                );
            }
            let img = read_pgm(&input)?;
            write_pgm(&augment(&img, dx, dy, theta), &output)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Gradcheck {
            trials,
            seed,
            config,
        } => {
            let file = FileConfig::load(config.as_deref())?;
            let trials = resolve(trials, &file, "trials", 100)?;
            let seed = resolve(seed, &file, "seed", 0)?;
            let report = gradcheck(trials, seed)?;
            print!("{}", report.to_text());
            Ok(if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Selftest { seed } => {
            let report = run_selftest(seed);
            print!("{}", report.to_text());
            Ok(if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

/// Flag value if given, else config-file value, else the built-in default.
fn resolve<T: std::str::FromStr>(
    flag: Option<T>,
    file: &FileConfig,
    key: &str,
    default: T,
) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    if let Some(v) = flag {
        return Ok(v);
    }
    match file.get(key) {
        Some(raw) => raw
            .parse()
            .map_err(|e| anyhow::anyhow!("config key {key}={raw:?}: {e}")),
        None => Ok(default),
    }
}

/// Clouds are read by content: a `PC3D` magic means the binary format,
/// anything else parses as ASCII XYZ.
fn read_cloud(path: &Path) -> Result<PointCloud> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    if bytes.starts_with(b"PC3D") {
        Ok(parse_pc3d(&bytes)?)
    } else {
        let text = std::str::from_utf8(&bytes)
            .with_context(|| format!("{} is neither PC3D nor ASCII", path.display()))?;
        match parse_xyz(text) {
            Ok(cloud) => Ok(cloud),
            Err(e) => bail!("{}: {e}", path.display()),
        }
    }
}
