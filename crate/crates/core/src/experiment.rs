//! Discrimination experiments: iterate the protocol on two initial states and
//! record how their overlap shrinks.
//!
//! In ideal mode the map is applied exactly. In noisy mode every round is
//! followed by simulated tomography of the kept polarization qubit, and the
//! next round starts from the pure state refitted from those counts, so shot
//! noise feeds forward exactly as it would in the lab.

use std::fmt;
use std::fs;
use std::path::Path;

use num_complex::Complex64;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::circuit::apply_protocol_step;
use crate::error::{Error, Result};
use crate::map::{iterate, overlap, success_probability};
use crate::point::ProjectivePoint;
use crate::tomography::{monte_carlo_error, substream, tomography_round, DEFAULT_SHOTS};

pub const DEFAULT_TRIALS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ideal,
    Noisy,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ReportFormat {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug)]
pub struct ExperimentConfig {
    pub pair: (ProjectivePoint, ProjectivePoint),
    pub iterations: usize,
    pub mode: Mode,
    pub shots_per_setting: u64,
    pub monte_carlo_trials: usize,
    /// Required in noisy mode.
    pub seed: Option<u64>,
}

impl ExperimentConfig {
    pub fn ideal(pair: (ProjectivePoint, ProjectivePoint), iterations: usize) -> Self {
        Self {
            pair,
            iterations,
            mode: Mode::Ideal,
            shots_per_setting: DEFAULT_SHOTS,
            monte_carlo_trials: DEFAULT_TRIALS,
            seed: None,
        }
    }

    pub fn noisy(pair: (ProjectivePoint, ProjectivePoint), iterations: usize, shots: u64, trials: usize, seed: u64) -> Self {
        Self {
            pair,
            iterations,
            mode: Mode::Noisy,
            shots_per_setting: shots,
            monte_carlo_trials: trials,
            seed: Some(seed),
        }
    }
}

/// One line of a report. Index 0 is the initial pair.
///
/// `p_success_k` is the success probability of the next round applied to
/// state `k`; `cum_success_k` is the probability that all rounds so far
/// succeeded. A missing `z` coordinate means the point at infinity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub iteration: usize,
    pub overlap_theory: f64,
    pub overlap_sim: Option<f64>,
    pub error_bar: Option<f64>,
    pub p_success_1: f64,
    pub p_success_2: f64,
    pub cum_success_1: f64,
    pub cum_success_2: f64,
    pub z1_re: Option<f64>,
    pub z1_im: Option<f64>,
    pub z2_re: Option<f64>,
    pub z2_im: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscriminationRecord {
    pub mode: Mode,
    pub shots_per_setting: Option<u64>,
    pub monte_carlo_trials: Option<usize>,
    pub seed: Option<u64>,
    pub rows: Vec<ReportRow>,
}

fn coords(p: &ProjectivePoint) -> (Option<f64>, Option<f64>) {
    match p.z() {
        Some(z) => (Some(z.re), Some(z.im)),
        None => (None, None),
    }
}

pub fn run_discrimination(config: &ExperimentConfig) -> Result<DiscriminationRecord> {
    match config.mode {
        Mode::Ideal => Ok(run_ideal(config)),
        Mode::Noisy => run_noisy(config),
    }
}

fn run_ideal(config: &ExperimentConfig) -> DiscriminationRecord {
    let n = config.iterations;
    let (t1, t2) = (iterate(&config.pair.0, n), iterate(&config.pair.1, n));
    let rows = (0..=n)
        .map(|k| {
            let (p1, p2) = (&t1.points()[k], &t2.points()[k]);
            let (z1_re, z1_im) = coords(p1);
            let (z2_re, z2_im) = coords(p2);
            ReportRow {
                iteration: k,
                overlap_theory: overlap(p1, p2),
                overlap_sim: None,
                error_bar: None,
                p_success_1: success_probability(p1),
                p_success_2: success_probability(p2),
                cum_success_1: t1.cumulative(k),
                cum_success_2: t2.cumulative(k),
                z1_re,
                z1_im,
                z2_re,
                z2_im,
            }
        })
        .collect();
    DiscriminationRecord {
        mode: Mode::Ideal,
        shots_per_setting: None,
        monte_carlo_trials: None,
        seed: None,
        rows,
    }
}

/// Seed for the Monte-Carlo error bar of row `k`, kept apart from the
/// streams used by the run itself.
fn error_bar_seed(seed: u64, k: usize) -> u64 {
    substream(seed, (1 << 32) | k as u64).next_u64()
}

fn run_noisy(config: &ExperimentConfig) -> Result<DiscriminationRecord> {
    let seed = config
        .seed
        .ok_or_else(|| Error::InvalidArgument("noisy mode needs a seed".into()))?;
    let shots = config.shots_per_setting;
    let trials = config.monte_carlo_trials;
    if shots == 0 {
        return Err(Error::InvalidArgument("shots per setting must be positive".into()));
    }
    if trials < 2 {
        return Err(Error::InvalidArgument("noisy mode needs at least 2 Monte-Carlo trials".into()));
    }
    let n = config.iterations;
    let (t1, t2) = (iterate(&config.pair.0, n), iterate(&config.pair.1, n));

    // `inputs` feed the next round; `measured` are the true states reaching
    // the analyzer in the current row.
    let mut inputs = [config.pair.0, config.pair.1];
    let mut measured = inputs;
    let mut cumulative = [1.0f64; 2];
    let mut rows = Vec::with_capacity(n + 1);
    for k in 0..=n {
        if k > 0 {
            for i in 0..2 {
                let outcome = apply_protocol_step(&inputs[i]);
                cumulative[i] *= outcome.selected_probability;
                measured[i] = outcome.selected_state.to_point();
            }
        }
        let mut estimates = [ProjectivePoint::infinity(); 2];
        for i in 0..2 {
            let mut rng = substream(seed, (2 * k + i) as u64);
            let round = tomography_round(&measured[i], shots, &mut rng).map_err(|e| Error::Iteration {
                iteration: k,
                source: Box::new(e),
            })?;
            estimates[i] = round.estimate;
        }
        let spread = monte_carlo_error((measured[0], measured[1]), shots, trials, error_bar_seed(seed, k))
            .map_err(|e| Error::Iteration {
                iteration: k,
                source: Box::new(e),
            })?;
        // The prepared initial pair is exact; later rounds restart from the
        // tomographic estimate.
        if k > 0 {
            inputs = estimates;
        }
        let (z1_re, z1_im) = coords(&estimates[0]);
        let (z2_re, z2_im) = coords(&estimates[1]);
        rows.push(ReportRow {
            iteration: k,
            overlap_theory: overlap(&t1.points()[k], &t2.points()[k]),
            overlap_sim: Some(overlap(&estimates[0], &estimates[1])),
            error_bar: Some(spread.std),
            p_success_1: success_probability(&inputs[0]),
            p_success_2: success_probability(&inputs[1]),
            cum_success_1: cumulative[0],
            cum_success_2: cumulative[1],
            z1_re,
            z1_im,
            z2_re,
            z2_im,
        });
    }
    Ok(DiscriminationRecord {
        mode: Mode::Noisy,
        shots_per_setting: Some(shots),
        monte_carlo_trials: Some(trials),
        seed: Some(seed),
        rows,
    })
}

/// Parses `a`, `a+bi`, `a-bi`, `bi`, polar `r@deg`, or `inf`.
pub fn parse_complex(text: &str) -> Result<ProjectivePoint> {
    let s = text.trim();
    let err = |token: &str| Error::ParseComplex {
        token: token.to_string(),
    };
    let num = |token: &str| -> Result<f64> {
        token
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| err(token))
    };
    if s.is_empty() {
        return Err(err(text));
    }
    if s.eq_ignore_ascii_case("inf") || s.eq_ignore_ascii_case("infinity") {
        return Ok(ProjectivePoint::infinity());
    }
    if let Some((r, deg)) = s.split_once('@') {
        let (r, deg) = (num(r.trim())?, num(deg.trim())?);
        return Ok(ProjectivePoint::from_z(Complex64::from_polar(r, deg.to_radians())));
    }
    let Some(body) = s.strip_suffix('i') else {
        return Ok(ProjectivePoint::from_re(num(s)?));
    };
    // The sign that starts the imaginary part: the last `+`/`-` that is not
    // leading and not part of an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&j| matches!(bytes[j], b'+' | b'-') && !matches!(bytes[j - 1], b'e' | b'E'));
    let (re_part, im_part) = match split {
        Some(j) => (&body[..j], &body[j..]),
        None => ("", body),
    };
    let re = if re_part.is_empty() { 0.0 } else { num(re_part)? };
    let im = match im_part {
        "" | "+" => 1.0,
        "-" => -1.0,
        t => num(t)?,
    };
    Ok(ProjectivePoint::from_z(Complex64::new(re, im)))
}

/// Rounds to 9 significant digits.
pub fn round_sig9(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.8e}").parse().expect("formatted float parses")
}

impl ReportRow {
    fn rounded(&self) -> Self {
        let r = round_sig9;
        let ro = |v: Option<f64>| v.map(round_sig9);
        Self {
            iteration: self.iteration,
            overlap_theory: r(self.overlap_theory),
            overlap_sim: ro(self.overlap_sim),
            error_bar: ro(self.error_bar),
            p_success_1: r(self.p_success_1),
            p_success_2: r(self.p_success_2),
            cum_success_1: r(self.cum_success_1),
            cum_success_2: r(self.cum_success_2),
            z1_re: ro(self.z1_re),
            z1_im: ro(self.z1_im),
            z2_re: ro(self.z2_re),
            z2_im: ro(self.z2_im),
        }
    }
}

impl DiscriminationRecord {
    /// The record as it reads back after serialization.
    pub fn rounded(&self) -> Self {
        Self {
            rows: self.rows.iter().map(ReportRow::rounded).collect(),
            ..self.clone()
        }
    }
}

/// Renders the report text. Numbers carry 9 significant digits.
pub fn render_report(record: &DiscriminationRecord, format: ReportFormat) -> Result<String> {
    let rounded = record.rounded();
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(&rounded).map_err(|e| Error::Json {
                path: "<report>".into(),
                source: e,
            })?;
            s.push('\n');
            Ok(s)
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in &rounded.rows {
                w.serialize(row).map_err(|e| Error::Csv {
                    path: "<report>".into(),
                    source: e,
                })?;
            }
            let bytes = w.into_inner().expect("in-memory writer");
            Ok(String::from_utf8(bytes).expect("CSV output is UTF-8"))
        }
    }
}

pub fn emit_report(record: &DiscriminationRecord, format: ReportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = render_report(record, format)?;
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json_report(path: impl AsRef<Path>) -> Result<DiscriminationRecord> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn read_csv_rows(path: impl AsRef<Path>) -> Result<Vec<ReportRow>> {
    let path = path.as_ref();
    let csv_err = |e| Error::Csv {
        path: path.to_path_buf(),
        source: e,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    reader.deserialize().collect::<std::result::Result<_, _>>().map_err(csv_err)
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Ideal => "ideal",
            Mode::Noisy => "noisy",
        })
    }
}
