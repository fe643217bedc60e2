use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use qnonlin::basin::{self, render_basin, write_csv, write_ppm, Window};
use qnonlin::circuit::{apply_protocol_step, invert_preparation};
use qnonlin::experiment::{
    parse_complex, render_report, run_discrimination, ExperimentConfig, Mode, ReportFormat, DEFAULT_TRIALS,
};
use qnonlin::map::{map_step, overlap};
use qnonlin::tomography::{self, measurement_probabilities, substream, tomography_round, DensityMatrix};
use qnonlin::{Error, ProjectivePoint, Result};

#[derive(Parser, Debug)]
#[command(name = "qnonlin", version, about = "Measurement-induced nonlinear qubit map: protocol steps, discrimination runs, basins, tomography")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one protocol round on a single state.
    Step {
        /// Initial state parameter, e.g. `0.2`, `-0.2-0.1i`, `0.2@45`, `inf`.
        #[arg(allow_hyphen_values = true, value_parser = parse_point)]
        z: ProjectivePoint,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Iterate the protocol on a pair of states and report their overlap.
    Discriminate {
        #[arg(long, num_args = 2, required = true, allow_hyphen_values = true, value_parser = parse_point, value_names = ["Z1", "Z2"])]
        pair: Vec<ProjectivePoint>,
        #[arg(long, default_value_t = 3)]
        iterations: usize,
        #[arg(long, value_enum, default_value_t = Mode::Ideal)]
        mode: Mode,
        /// Coincidences per analyzer setting.
        #[arg(long, default_value_t = tomography::DEFAULT_SHOTS)]
        shots: u64,
        /// Monte-Carlo trials per error bar.
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        /// Required in noisy mode.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
    },
    /// Render the basins of attraction over a window of the plane.
    Basin {
        #[arg(long, num_args = 4, allow_hyphen_values = true, value_names = ["RMIN", "RMAX", "IMIN", "IMAX"])]
        window: Option<Vec<f64>>,
        /// Pixels, as `WIDTHxHEIGHT`.
        #[arg(long, default_value = "1000x1000", value_parser = parse_resolution)]
        resolution: (usize, usize),
        #[arg(long, default_value_t = basin::DEFAULT_MAX_ITER)]
        max_iter: usize,
        #[arg(long, default_value_t = basin::DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = ImageFormat::Ppm)]
        format: ImageFormat,
    },
    /// One tomography round trip on a pure state.
    Tomo {
        #[arg(allow_hyphen_values = true, value_parser = parse_point)]
        z: ProjectivePoint,
        #[arg(long, default_value_t = tomography::DEFAULT_SHOTS)]
        shots: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ImageFormat {
    Ppm,
    Csv,
}

fn parse_point(s: &str) -> std::result::Result<ProjectivePoint, String> {
    parse_complex(s).map_err(|e| e.to_string())
}

fn parse_resolution(s: &str) -> std::result::Result<(usize, usize), String> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected WIDTHxHEIGHT, got `{s}`"))?;
    let n = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad pixel count `{t}`"));
    Ok((n(w)?, n(h)?))
}

fn coord(p: &ProjectivePoint) -> serde_json::Value {
    match p.z() {
        Some(z) => json!([z.re, z.im]),
        None => serde_json::Value::Null,
    }
}

fn write_output(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("JSON values serialize");
    s.push('\n');
    s
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Step { z, out } => {
            let outcome = apply_protocol_step(&z);
            let (theta_q, theta_h) = invert_preparation(&z)?;
            let report = json!({
                "input": coord(&z),
                "preparation_deg": { "qwp": theta_q.to_degrees(), "hwp": theta_h.to_degrees() },
                "selected": {
                    "z": coord(&outcome.selected_state.to_point()),
                    "probability": outcome.selected_probability,
                },
                "rejected": {
                    "z": coord(&outcome.rejected_state.to_point()),
                    "probability": outcome.rejected_probability,
                },
                "map_step": coord(&map_step(&z)),
            });
            write_output(&pretty(&report), out.as_ref())
        }
        Command::Discriminate {
            pair,
            iterations,
            mode,
            shots,
            trials,
            seed,
            out,
            format,
        } => {
            if mode == Mode::Noisy && seed.is_none() {
                return Err(Error::InvalidArgument("--seed is required with --mode noisy".into()));
            }
            let config = ExperimentConfig {
                pair: (pair[0], pair[1]),
                iterations,
                mode,
                shots_per_setting: shots,
                monte_carlo_trials: trials,
                seed,
            };
            let record = run_discrimination(&config)?;
            write_output(&render_report(&record, format)?, out.as_ref())
        }
        Command::Basin {
            window,
            resolution: (width, height),
            max_iter,
            tol,
            out,
            format,
        } => {
            let [re_min, re_max, im_min, im_max] = match window.as_deref() {
                Some(&[a, b, c, d]) => [a, b, c, d],
                _ => [-2.0, 2.0, -2.0, 2.0],
            };
            let window = Window::new(re_min, re_max, im_min, im_max, width, height)?;
            let raster = render_basin(&window, tol, max_iter)?;
            match format {
                ImageFormat::Ppm => write_ppm(&raster, &out),
                ImageFormat::Csv => write_csv(&raster, &out),
            }
        }
        Command::Tomo { z, shots, seed, out } => {
            if shots == 0 {
                return Err(Error::InvalidArgument("--shots must be positive".into()));
            }
            let probabilities = measurement_probabilities(&DensityMatrix::pure(&z));
            let round = tomography_round(&z, shots, &mut substream(seed, 0))?;
            let m = round.rho.matrix();
            let entry = |i, j| json!([m[(i, j)].re, m[(i, j)].im]);
            let report = json!({
                "input": coord(&z),
                "probabilities": probabilities,
                "counts": round.counts.counts,
                "shots_per_setting": shots,
                "seed": seed,
                "rho": [[entry(0, 0), entry(0, 1)], [entry(1, 0), entry(1, 1)]],
                "estimate": coord(&round.estimate),
                "fidelity": round.rho.fidelity_with(&z),
                "overlap": overlap(&z, &round.estimate),
            });
            write_output(&pretty(&report), out.as_ref())
        }
    }
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
