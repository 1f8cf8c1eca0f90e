//! `difx` — render scene pairs, difference them, estimate jacket parameters,
//! and run the full sweep grid.
//!
//! Exit codes: 0 success, 2 invalid arguments or config, 3 no signal in the
//! difference, 4 I/O or file-format failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Parser, Subcommand};

use difx::differential::{diff, grayscale, threshold, ThresholdParams};
use difx::estimate::{estimate_all, EstimateParams};
use difx::harness::{
    read_csv, render_plot_svg, render_plot_svg_from_rows, run_sweep, write_csv, Preset,
    RenderCache, SweepParameter, SweepSpec,
};
use difx::noise::SnrLevel;
use difx::raster::{read_image, write_pbm, write_ppm16, write_rawf32};
use difx::render::render_scene;
use difx::scene::{scene_from_json, validate};
use difx::DifxError;

#[derive(Parser)]
#[command(name = "difx", version, about = "Differential-imaging toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render the scene with or without the photographer.
    #[command(group(ArgGroup::new("presence").required(true).args(["present", "absent"])))]
    Render {
        /// Scene JSON document.
        #[arg(long)]
        config: PathBuf,
        /// Photographer present (jacket in the scene).
        #[arg(long)]
        present: bool,
        /// Photographer absent.
        #[arg(long)]
        absent: bool,
        /// Render seed; defaults to the config's `render.seed`.
        #[arg(long)]
        seed: Option<u64>,
        /// Output path (lossless rawf32).
        #[arg(long)]
        out: PathBuf,
        /// Also write a quantized 16-bit PPM for inspection.
        #[arg(long)]
        ppm: Option<PathBuf>,
    },
    /// Pixelwise difference of two images.
    Diff {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        /// Output difference (rawf32, signed).
        #[arg(long)]
        out: PathBuf,
        /// Also export the thresholded mask as PBM.
        #[arg(long)]
        mask: Option<PathBuf>,
    },
    /// Estimate jacket parameters from an image pair.
    Estimate {
        /// Photographer-present image.
        #[arg(long)]
        a: PathBuf,
        /// Photographer-absent image.
        #[arg(long)]
        b: PathBuf,
        /// Output report (JSON).
        #[arg(long)]
        out: PathBuf,
        /// Mask threshold as a fraction of the grayscale maximum.
        #[arg(long, default_value_t = 0.05)]
        tau: f64,
        /// ROI half-extent multiplier on the RMS sizes.
        #[arg(long, default_value_t = 2.0)]
        alpha: f64,
        /// Gaussian smoothing sigma (pixels) for the bumpiness estimator.
        #[arg(long, default_value_t = 5.0)]
        sigma: f64,
    },
    /// Run one parameter sweep across the SNR grid.
    Sweep {
        /// Swept parameter: width | height | bump | green.
        #[arg(long)]
        param: String,
        /// Scene scale: desk | paper.
        #[arg(long, default_value = "desk")]
        preset: String,
        /// Comma-separated SNR levels in dB, `inf` for noiseless.
        #[arg(long)]
        snr: Option<String>,
        /// Base seed for the whole sweep.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory (sweep.csv, sweep.json, fig.svg).
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-plot a previously written sweep table.
    Report {
        /// Input CSV written by `difx sweep`.
        #[arg(long)]
        table: PathBuf,
        /// Output SVG.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                DifxError::InvalidArgument(_) | DifxError::InvalidConfig(_)
                | DifxError::DimensionMismatch(_) => 2,
                DifxError::NoSignal(_) => 3,
                DifxError::Io(_) | DifxError::Format(_) => 4,
            };
            ExitCode::from(code)
        }
    }
}

fn run(command: Command) -> difx::Result<()> {
    match command {
        Command::Render {
            config,
            present,
            absent: _,
            seed,
            out,
            ppm,
        } => {
            let json = std::fs::read_to_string(&config)?;
            let scene = scene_from_json(&json)?;
            validate(&scene).into_result()?;
            let seed = seed.unwrap_or(scene.render.seed);
            log::info!(
                "rendering {}x{} ({} photons, photographer {})",
                scene.resolution.0,
                scene.resolution.1,
                scene.render.photon_count,
                if present { "present" } else { "absent" }
            );
            let img = render_scene(&scene, present, seed);
            write_rawf32(&img, &out)?;
            if let Some(ppm_path) = ppm {
                write_ppm16(&img, &ppm_path)?;
            }
            Ok(())
        }
        Command::Diff { a, b, out, mask } => {
            let img_a = read_image(&a)?;
            let img_b = read_image(&b)?;
            let d = diff(&img_a, &img_b)?;
            write_rawf32(&d, &out)?;
            if let Some(mask_path) = mask {
                let m = threshold(&grayscale(&d), &ThresholdParams::default())?;
                write_pbm(&m, &mask_path)?;
            }
            Ok(())
        }
        Command::Estimate {
            a,
            b,
            out,
            tau,
            alpha,
            sigma,
        } => {
            if !(0.0 < tau && tau < 1.0) {
                return Err(DifxError::InvalidArgument(format!(
                    "tau must be in (0, 1), got {tau}"
                )));
            }
            let img_a = read_image(&a)?;
            let img_b = read_image(&b)?;
            let params = EstimateParams {
                threshold: ThresholdParams {
                    tau,
                    ..ThresholdParams::default()
                },
                alpha,
                sigma_px: sigma,
            };
            let report = estimate_all(&img_a, &img_b, &params)?;
            let json = serde_json::to_string_pretty(&report)
                .expect("reports always serialize");
            std::fs::write(&out, json)?;
            if report.no_signal {
                return Err(DifxError::NoSignal(format!(
                    "no usable difference between {} and {} (report written)",
                    a.display(),
                    b.display()
                )));
            }
            Ok(())
        }
        Command::Sweep {
            param,
            preset,
            snr,
            seed,
            out,
        } => {
            let parameter = SweepParameter::from_token(&param)?;
            let preset = Preset::from_token(&preset)?;
            let mut spec = SweepSpec::new(parameter, preset.scene(), seed);
            if let Some(list) = snr {
                spec.snr_levels = list
                    .split(',')
                    .map(SnrLevel::parse)
                    .collect::<difx::Result<Vec<_>>>()?;
            }
            std::fs::create_dir_all(&out)?;
            let cache_dir = std::env::var_os("DIFX_CACHE_DIR")
                .map(PathBuf::from)
                .unwrap_or_else(|| out.join("cache"));
            let cache = RenderCache::new(cache_dir)?;
            let table = run_sweep(&spec, &cache)?;
            write_csv(&table, &out.join("sweep.csv"))?;
            let json = serde_json::to_string_pretty(&table)
                .expect("tables always serialize");
            std::fs::write(out.join("sweep.json"), json)?;
            render_plot_svg(&table, &out.join("fig.svg"))?;
            log::info!(
                "{} rows written to {}",
                table.rows.len(),
                out.join("sweep.csv").display()
            );
            Ok(())
        }
        Command::Report { table, out } => {
            let rows = read_csv(&table)?;
            render_plot_svg_from_rows(&rows, &out)
        }
    }
}
