//! Command-line interface: argument definitions and the batch subcommands.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use thermsense_core::codec::{read_sequence, write_sequence, FileError};
use thermsense_core::estimator::Roi;
use thermsense_core::export::{write_ground_truth_csv, write_rates_csv, write_rvs_csv, write_signal_csv};
use thermsense_core::pipeline::{run_pipeline, PipelineOutput, PipelineParams};
use thermsense_core::rvs::{rvs_to_pgm, rvs_to_png};
use thermsense_core::synth::{synthesize_sequence, RateProfile, SynthConfig};
use thermsense_core::{Error as CoreError, ThermalSequence};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Processing(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Input(_) => 3,
            CliError::Processing(_) => 4,
        }
    }
}

/// Errors from user-supplied parameters are usage errors; the rest arise while processing data.
fn classify(e: CoreError) -> CliError {
    match e {
        CoreError::InvalidParameter(_) | CoreError::RoiOutOfBounds { .. } | CoreError::RoiTooSmall { .. } => {
            CliError::Usage(e.to_string())
        }
        _ => CliError::Processing(e.to_string()),
    }
}

fn output_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Processing(format!("{}: {e}", path.display()))
}

/// Two comma-separated numbers, `lo,hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair(pub f64, pub f64);

impl FromStr for Pair {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (a, b) = s.split_once(',').ok_or_else(|| format!("expected two comma-separated numbers, got {s:?}"))?;
        let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
        Ok(Pair(parse(a)?, parse(b)?))
    }
}

#[derive(Debug, Parser)]
#[command(name = "thermsense", version, about = "Breathing estimation from thermal image sequences")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// Nostril region as x,y,w,h.
    #[arg(long, global = true)]
    pub roi: Option<Roi>,
    /// Bandpass edges in Hz as lo,hi.
    #[arg(long, global = true)]
    pub band: Option<Pair>,
    /// Kelvin per voxel.
    #[arg(long, global = true)]
    pub quantum: Option<f64>,
    /// Rate estimation window in seconds.
    #[arg(long = "window-s", global = true)]
    pub window_s: Option<f64>,
    /// Uniform resampling rate in Hz.
    #[arg(long, global = true)]
    pub fs: Option<f64>,
    /// Replay speed multiplier; 0 replays as fast as clients read.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub speed: f64,
    #[arg(long, global = true, default_value_t = 8080)]
    pub port: u16,
}

impl GlobalArgs {
    pub fn pipeline_params(&self) -> Result<PipelineParams, CliError> {
        let mut p = PipelineParams::default();
        if let Some(Pair(lo, hi)) = self.band {
            p.band.low_hz = lo;
            p.band.high_hz = hi;
        }
        if let Some(q) = self.quantum {
            p.voxel.quantum = q;
        }
        if let Some(w) = self.window_s {
            p.rate_window_s = w;
        }
        if let Some(fs) = self.fs {
            p.fs = fs;
        }
        p.validate().map_err(classify)?;
        Ok(p)
    }

    fn require_roi(&self) -> Result<Roi, CliError> {
        self.roi.ok_or_else(|| CliError::Usage("ROI required: pass --roi x,y,w,h".into()))
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic sequence and its ground truth.
    Synth(SynthArgs),
    /// Run the whole pipeline and write signal, rate and RVS outputs.
    Process(ProcessArgs),
    /// Write breathing-rate estimates as CSV.
    Rate(RateArgs),
    /// Write the respiration variability spectrogram as CSV and images.
    Rvs(ProcessArgs),
    /// Replay a sequence over WebSocket.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Constant breathing rate.
    #[arg(long, conflicts_with = "chirp_bpm")]
    pub rate_bpm: Option<f64>,
    /// Linear rate sweep as start,end bpm.
    #[arg(long)]
    pub chirp_bpm: Option<Pair>,
    #[arg(long, default_value_t = 60.0)]
    pub duration: f64,
    #[arg(long, default_value_t = 9.0)]
    pub fps: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Breathing temperature swing, kelvin.
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Per-pixel noise, kelvin.
    #[arg(long)]
    pub noise_sd: Option<f64>,
    /// Timestamp jitter, seconds.
    #[arg(long)]
    pub jitter_sd: Option<f64>,
    /// Baseline drift, kelvin per minute.
    #[arg(long)]
    pub drift: Option<f64>,
    #[arg(long)]
    pub width: Option<u16>,
    #[arg(long)]
    pub height: Option<u16>,
    /// Nostril region as x,y,w,h.
    #[arg(long)]
    pub nostril: Option<Roi>,
    #[arg(long)]
    pub emissivity: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Ground-truth CSV; defaults to the output path with a `.truth.csv` extension.
    #[arg(long)]
    pub truth: Option<PathBuf>,
}

impl SynthArgs {
    pub fn config(&self) -> SynthConfig {
        let d = SynthConfig::default();
        SynthConfig {
            width: self.width.unwrap_or(d.width),
            height: self.height.unwrap_or(d.height),
            duration: self.duration,
            fps: self.fps,
            rate_profile: match (self.rate_bpm, self.chirp_bpm) {
                (_, Some(Pair(start_bpm, end_bpm))) => RateProfile::Chirp { start_bpm, end_bpm },
                (Some(bpm), None) => RateProfile::Constant { bpm },
                (None, None) => d.rate_profile,
            },
            amplitude: self.amplitude.unwrap_or(d.amplitude),
            noise_sd: self.noise_sd.unwrap_or(d.noise_sd),
            jitter_sd: self.jitter_sd.unwrap_or(d.jitter_sd),
            drift: self.drift.unwrap_or(d.drift),
            nostril_roi: self.nostril.unwrap_or(d.nostril_roi),
            emissivity: self.emissivity.unwrap_or(d.emissivity),
            seed: self.seed,
            ..d
        }
    }

    fn truth_path(&self) -> PathBuf {
        self.truth.clone().unwrap_or_else(|| self.out.with_extension("truth.csv"))
    }
}

#[derive(Debug, Args)]
pub struct ProcessArgs {
    /// Input .tseq file.
    pub input: PathBuf,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct RateArgs {
    pub input: PathBuf,
    /// Output CSV; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    pub input: PathBuf,
    /// Wait for a `play` message instead of starting when the first client connects.
    #[arg(long)]
    pub paused: bool,
    /// Directory containing the built UI.
    #[arg(long, default_value = "ui/dist")]
    pub ui_dir: PathBuf,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
}

pub fn load(path: &Path) -> Result<ThermalSequence, CliError> {
    read_sequence(path).map_err(|e: FileError| CliError::Input(format!("{}: {e}", path.display())))
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| output_error(path, e))
}

pub fn synth(args: &SynthArgs) -> Result<String, CliError> {
    let cfg = args.config();
    let (seq, truth) = synthesize_sequence(&cfg).map_err(|e| CliError::Usage(e.to_string()))?;
    write_sequence(&args.out, &seq).map_err(|e| output_error(&args.out, e))?;
    let truth_path = args.truth_path();
    let mut w = create(&truth_path)?;
    write_ground_truth_csv(&mut w, &truth).map_err(|e| output_error(&truth_path, e))?;
    w.flush().map_err(|e| output_error(&truth_path, e))?;
    Ok(format!(
        "{}: {} frames, {} s at {} fps, rate {}",
        args.out.display(),
        seq.len(),
        cfg.duration,
        cfg.fps,
        cfg.rate_profile
    ))
}

fn pipeline(global: &GlobalArgs, input: &Path) -> Result<PipelineOutput, CliError> {
    let roi = global.require_roi()?;
    let params = global.pipeline_params()?;
    let seq = load(input)?;
    roi.check_bounds(seq.meta().width, seq.meta().height).map_err(classify)?;
    run_pipeline(&seq, &roi, &params).map_err(classify)
}

fn write_rvs_outputs(out: &PipelineOutput, dir: &Path) -> Result<(), CliError> {
    let path = dir.join("rvs.csv");
    let mut w = create(&path)?;
    write_rvs_csv(&mut w, &out.rvs).map_err(|e| output_error(&path, e))?;
    w.flush().map_err(|e| output_error(&path, e))?;
    let pgm = rvs_to_pgm(&out.rvs).map_err(classify)?;
    let path = dir.join("rvs.pgm");
    std::fs::write(&path, pgm).map_err(|e| output_error(&path, e))?;
    let png = rvs_to_png(&out.rvs).map_err(classify)?;
    let path = dir.join("rvs.png");
    std::fs::write(&path, png).map_err(|e| output_error(&path, e))
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| output_error(dir, e))
}

pub fn process(global: &GlobalArgs, args: &ProcessArgs) -> Result<String, CliError> {
    let out = pipeline(global, &args.input)?;
    ensure_dir(&args.out_dir)?;
    let path = args.out_dir.join("signal.csv");
    let mut w = create(&path)?;
    write_signal_csv(&mut w, &out.raw).map_err(|e| output_error(&path, e))?;
    w.flush().map_err(|e| output_error(&path, e))?;
    let path = args.out_dir.join("rates.csv");
    let mut w = create(&path)?;
    write_rates_csv(&mut w, &out.rates).map_err(|e| output_error(&path, e))?;
    w.flush().map_err(|e| output_error(&path, e))?;
    write_rvs_outputs(&out, &args.out_dir)?;
    let mut bpm: Vec<f64> = out.rates.iter().map(|r| r.bpm).collect();
    bpm.sort_by(f64::total_cmp);
    Ok(format!(
        "{} samples, {} rate windows, median {:.1} bpm, RVS {}x{} -> {}",
        out.raw.len(),
        out.rates.len(),
        bpm[bpm.len() / 2],
        out.rvs.n_freqs(),
        out.rvs.n_times(),
        args.out_dir.display()
    ))
}

pub fn rate(global: &GlobalArgs, args: &RateArgs) -> Result<String, CliError> {
    let out = pipeline(global, &args.input)?;
    match &args.out {
        Some(path) => {
            let mut w = create(path)?;
            write_rates_csv(&mut w, &out.rates).map_err(|e| output_error(path, e))?;
            w.flush().map_err(|e| output_error(path, e))?;
            Ok(format!("{} rate windows -> {}", out.rates.len(), path.display()))
        }
        None => {
            let stdout = std::io::stdout();
            write_rates_csv(stdout.lock(), &out.rates).map_err(|e| CliError::Processing(e.to_string()))?;
            Ok(String::new())
        }
    }
}

pub fn rvs(global: &GlobalArgs, args: &ProcessArgs) -> Result<String, CliError> {
    let out = pipeline(global, &args.input)?;
    ensure_dir(&args.out_dir)?;
    write_rvs_outputs(&out, &args.out_dir)?;
    Ok(format!(
        "RVS {} bins x {} columns -> {}",
        out.rvs.n_freqs(),
        out.rvs.n_times(),
        args.out_dir.display()
    ))
}

/// Loads the sequence and assembles the server configuration.
pub fn serve_setup(global: &GlobalArgs, args: &ServeArgs) -> Result<(ThermalSequence, crate::server::ServeConfig), CliError> {
    let params = global.pipeline_params()?;
    if !(global.speed.is_finite() && global.speed >= 0.0) {
        return Err(CliError::Usage(format!("--speed must be non-negative, got {}", global.speed)));
    }
    let seq = load(&args.input)?;
    if let Some(roi) = global.roi {
        roi.check_bounds(seq.meta().width, seq.meta().height).map_err(classify)?;
    }
    let replay = crate::replay::ReplayConfig {
        params,
        speed: global.speed,
        autoplay: !args.paused,
        ..Default::default()
    };
    Ok((
        seq,
        crate::server::ServeConfig {
            replay,
            ui_dir: Some(args.ui_dir.clone()),
        },
    ))
}
