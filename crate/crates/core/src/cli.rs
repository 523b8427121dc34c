//! `fmcw` command-line surface.
//!
//! Exit codes: 0 success, 1 usage or validation failure, 2 I/O or format error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{angular_resolution, RadarConfig};
use crate::detect::{track_frame, DetectorOptions, TrackPoint};
use crate::dsp::RangeDopplerProcessor;
use crate::error::{Error, Result};
use crate::eval::{align, compute_rmse, export_report, summarize_runs, truth_from_odometry, RunRmse};
use crate::io::framelog::{read_frame_log, write_frame_log};
use crate::io::text::{
    map_to_csv, map_to_pgm, odometry_from_csv, sniff_truth_format, tracks_from_csv, tracks_to_csv,
    truth_from_csv, truth_to_csv, TruthFormat,
};
use crate::scene::{simulate_run, GroundTruthPoint, RawFrame, Scenario};

#[derive(Debug, Parser)]
#[command(name = "fmcw", version, about = "FMCW radar simulation, range-doppler processing and tracking evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print derived radar parameters
    Info {
        #[arg(long)]
        config: PathBuf,
        /// Receive antennas used for the angular resolution line
        #[arg(long, default_value_t = 2)]
        antennas: usize,
    },
    /// Synthesize frame logs and ground truth
    Simulate {
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Range-doppler processing and max-energy tracking of a frame log
    Process {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Per-frame map exports: any of `pgm`, `csv`, comma separated
        #[arg(long, value_delimiter = ',')]
        maps: Vec<MapFormat>,
        #[command(flatten)]
        detector: DetectorArgs,
    },
    /// RMSE of track CSVs against truth CSVs, paired by position
    Eval {
        #[arg(long, value_delimiter = ',', required = true)]
        tracks: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', required = true)]
        truth: Vec<PathBuf>,
        #[arg(long, default_value_t = 25.0)]
        tolerance_ms: f64,
        /// Distance at the first odometry sample, for odometry files without range_m
        #[arg(long)]
        initial_distance: Option<f64>,
        /// Gate odometry truth at this range, meters
        #[arg(long)]
        max_range: Option<f64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// simulate + process + eval
    Run {
        #[command(flatten)]
        sim: SimArgs,
        #[command(flatten)]
        detector: DetectorArgs,
        #[arg(long, default_value_t = 25.0)]
        tolerance_ms: f64,
    },
}

#[derive(Debug, Args)]
struct SimArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    runs: usize,
    /// Base seed; run k uses seed + k. Defaults to the scenario's rng_seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct DetectorArgs {
    #[arg(long, default_value_t = 1)]
    exclude_zero_doppler: usize,
    #[arg(long, default_value_t = 2)]
    min_range_bins: usize,
    #[arg(long)]
    interp: bool,
    /// Floor of exported dB maps
    #[arg(long, default_value_t = -60.0, allow_negative_numbers = true)]
    floor_db: f64,
}

impl DetectorArgs {
    fn options(&self) -> DetectorOptions {
        DetectorOptions {
            exclude_zero_doppler_rows: self.exclude_zero_doppler,
            min_range_bins: self.min_range_bins,
            parabolic_interpolation: self.interp,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum MapFormat {
    Pgm,
    Csv,
}

/// Runs the CLI with `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(stdout, "{rendered}");
            } else {
                let _ = write!(stderr, "{rendered}");
            }
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Info { config, antennas } => {
            let cfg = load_config(&config)?;
            write_info(&cfg, antennas, stdout)
        }
        Command::Simulate { sim } => {
            let (cfg, scenario) = load_sim(&sim)?;
            fs::create_dir_all(&sim.out)?;
            for_each_run(&sim, &scenario, |k, sc| {
                let run = simulate_run(&cfg, sc)?;
                write_frame_log(&sim.out.join(frames_name(k)), &cfg, &run.frames)?;
                fs::write(sim.out.join(truth_name(k)), truth_to_csv(&run.truth))?;
                Ok(())
            })?;
            Ok(())
        }
        Command::Process {
            input,
            out,
            maps,
            detector,
        } => {
            let (cfg, frames) = read_frame_log(&input)?;
            fs::create_dir_all(&out)?;
            let stem = input
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "frames".into());
            let suffix = stem.strip_prefix("frames_").unwrap_or(&stem).to_string();
            let map_dir = (!maps.is_empty()).then(|| out.join("maps"));
            if let Some(d) = &map_dir {
                fs::create_dir_all(d)?;
            }
            let tracks = process_frames(&cfg, &frames, &detector, |map| {
                let Some(dir) = &map_dir else { return Ok(()) };
                let base = format!("{suffix}_frame_{:05}", map.frame_index);
                for fmt in &maps {
                    match fmt {
                        MapFormat::Pgm => {
                            fs::write(dir.join(format!("{base}.pgm")), map_to_pgm(map, detector.floor_db)?)?
                        }
                        MapFormat::Csv => fs::write(dir.join(format!("{base}.csv")), map_to_csv(map))?,
                    }
                }
                Ok(())
            })?;
            fs::write(out.join(format!("tracks_{suffix}.csv")), tracks_to_csv(&tracks))?;
            Ok(())
        }
        Command::Eval {
            tracks,
            truth,
            tolerance_ms,
            initial_distance,
            max_range,
            out,
        } => {
            if tracks.len() != truth.len() {
                return Err(Error::invalid(format!(
                    "{} track files but {} truth files",
                    tracks.len(),
                    truth.len()
                )));
            }
            let mut runs = Vec::with_capacity(tracks.len());
            for (tp, gp) in tracks.iter().zip(&truth) {
                let t = tracks_from_csv(&tp.display().to_string(), &fs::read_to_string(tp)?)?;
                let g = load_truth(gp, initial_distance, max_range)?;
                runs.push(evaluate(&t, &g, tolerance_ms)?);
            }
            let report = summarize_runs(&runs)?;
            fs::write(&out, export_report(&report))?;
            Ok(())
        }
        Command::Run {
            sim,
            detector,
            tolerance_ms,
        } => {
            let (cfg, scenario) = load_sim(&sim)?;
            fs::create_dir_all(&sim.out)?;
            let runs = for_each_run(&sim, &scenario, |k, sc| {
                let run = simulate_run(&cfg, sc)?;
                write_frame_log(&sim.out.join(frames_name(k)), &cfg, &run.frames)?;
                fs::write(sim.out.join(truth_name(k)), truth_to_csv(&run.truth))?;
                let tracks = process_frames(&cfg, &run.frames, &detector, |_| Ok(()))?;
                fs::write(sim.out.join(format!("tracks_{k:03}.csv")), tracks_to_csv(&tracks))?;
                evaluate(&tracks, &run.truth, tolerance_ms)
            })?;
            let report = summarize_runs(&runs)?;
            fs::write(sim.out.join("report.json"), export_report(&report))?;
            Ok(())
        }
    }
}

fn frames_name(k: usize) -> String {
    format!("frames_{k:03}.fmrd")
}

fn truth_name(k: usize) -> String {
    format!("truth_{k:03}.csv")
}

fn evaluate(tracks: &[TrackPoint], truth: &[GroundTruthPoint], tolerance_ms: f64) -> Result<RunRmse> {
    let pairs = align(tracks, truth, tolerance_ms * 1e-3)?;
    compute_rmse(&pairs)
}

fn process_frames(
    cfg: &RadarConfig,
    frames: &[RawFrame],
    detector: &DetectorArgs,
    mut on_map: impl FnMut(&crate::dsp::RangeDopplerMap) -> Result<()>,
) -> Result<Vec<TrackPoint>> {
    let proc = RangeDopplerProcessor::new(cfg)?;
    let opts = detector.options();
    frames
        .iter()
        .map(|f| {
            let map = proc.process(f)?;
            on_map(&map)?;
            track_frame(&map, &opts, cfg)
        })
        .collect()
}

/// Runs `body` once per run index with the run's scenario. Runs execute on
/// separate threads; results come back in run order.
fn for_each_run<T: Send>(
    sim: &SimArgs,
    scenario: &Scenario,
    body: impl Fn(usize, &Scenario) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    if sim.runs == 0 {
        return Err(Error::invalid("--runs must be at least 1"));
    }
    let base = sim.seed.unwrap_or(scenario.rng_seed);
    let scenarios: Vec<Scenario> = (0..sim.runs)
        .map(|k| Scenario {
            rng_seed: base.wrapping_add(k as u64),
            ..scenario.clone()
        })
        .collect();
    let body = &body;
    std::thread::scope(|s| {
        let handles: Vec<_> = scenarios
            .iter()
            .enumerate()
            .map(|(k, sc)| s.spawn(move || body(k, sc)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("run thread panicked"))
            .collect()
    })
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        source_name: path.display().to_string(),
        line: e.line(),
        msg: e.to_string(),
    })
}

pub fn load_config(path: &Path) -> Result<RadarConfig> {
    let cfg: RadarConfig = load_json(path)?;
    cfg.ensure_valid()?;
    Ok(cfg)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let sc: Scenario = load_json(path)?;
    sc.validate()?;
    Ok(sc)
}

fn load_sim(sim: &SimArgs) -> Result<(RadarConfig, Scenario)> {
    Ok((load_config(&sim.config)?, load_scenario(&sim.scenario)?))
}

fn load_truth(path: &Path, initial_distance: Option<f64>, max_range: Option<f64>) -> Result<Vec<GroundTruthPoint>> {
    let name = path.display().to_string();
    let text = fs::read_to_string(path)?;
    match sniff_truth_format(&text) {
        Some(TruthFormat::GroundTruth) => truth_from_csv(&name, &text),
        Some(TruthFormat::Odometry) => {
            truth_from_odometry(&odometry_from_csv(&name, &text)?, initial_distance, max_range)
        }
        None => Err(Error::Parse {
            source_name: name,
            line: 1,
            msg: "unrecognised truth header".into(),
        }),
    }
}

fn write_info(cfg: &RadarConfig, antennas: usize, out: &mut dyn Write) -> Result<()> {
    let rows: Vec<(&str, f64, &str)> = vec![
        ("chirp start frequency", cfg.f_low, "Hz"),
        ("chirp end frequency", cfg.f_high(), "Hz"),
        ("active chirp duration", cfg.chirp_duration(), "s"),
        ("chirp slope", cfg.chirp_slope(), "Hz/s"),
        ("wavelength", cfg.wavelength(), "m"),
        ("range resolution", cfg.range_resolution(), "m"),
        ("max range", cfg.max_range(), "m"),
        ("range bin spacing", cfg.range_bin_spacing(), "m"),
        ("velocity resolution", cfg.velocity_resolution(), "m/s"),
        ("max velocity", cfg.max_velocity(), "m/s"),
        ("velocity bin spacing", cfg.velocity_bin_spacing(), "m/s"),
        ("angular resolution", angular_resolution(antennas)?, "rad"),
    ];
    writeln!(out, "{:<24} {:>14}  unit", "parameter", "value")?;
    for (name, v, unit) in rows {
        writeln!(out, "{name:<24} {:>14}  {unit}", format_value(v))?;
    }
    writeln!(
        out,
        "{:<24} {:>14}  bins",
        "map size (doppler×range)",
        format!("{}×{}", cfg.doppler_bins(), cfg.range_bins())
    )?;
    Ok(())
}

fn format_value(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e5 || v.abs() < 1e-3) {
        format!("{v:.4e}")
    } else {
        format!("{v:.4}")
    }
}
