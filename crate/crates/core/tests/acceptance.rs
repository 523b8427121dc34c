//! Acceptance checks. Runs as a plain binary (`harness = false`), prints one
//! PASS/FAIL line per criterion and exits non-zero if any fails.

mod common;

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::time::Instant;

use common::{max_rel_err, oracle_spectrum, single_frame, target_frame};
use fmcw_sim::cli;
use fmcw_sim::detect::{detect_peak, track_run, DetectorOptions};
use fmcw_sim::dsp::RangeDopplerProcessor;
use fmcw_sim::eval::{align, compute_rmse, summarize_runs, AlignedPair, RmseReport, DEFAULT_TOLERANCE_S};
use fmcw_sim::io::framelog::{decode_frame_log, encode_frame_log};
use fmcw_sim::scene::{
    amplitude_at, build_track_clutter, noise_std_for_snr, radial_geometry, simulate_run, BoundaryWalls,
    GroundTruthPoint, Samples, Scatterer, ScattererKind, Scenario, SpeedProfile,
};
use fmcw_sim::{process_frame, AdcMode, RadarConfig, RawFrame, TrackPoint};
use ndarray::Array2;
use num_complex::Complex32;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tempfile::TempDir;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn reference() -> RadarConfig {
    RadarConfig::reference()
}

/// Noise level giving 20 dB per-sample SNR for a unit reflector at 1 m.
fn noise_20db() -> f64 {
    noise_std_for_snr(amplitude_at(1.0, 1.0), 20.0)
}

struct RunResult {
    tracks: Vec<TrackPoint>,
    truth: Vec<GroundTruthPoint>,
    pairs: Vec<AlignedPair>,
}

fn simulate_and_track(cfg: &RadarConfig, scenario: &Scenario) -> RunResult {
    let run = simulate_run(cfg, scenario).unwrap();
    let proc = RangeDopplerProcessor::new(cfg).unwrap();
    let maps: Vec<_> = run.frames.iter().map(|f| proc.process(f).unwrap()).collect();
    let tracks = track_run(&maps, &DetectorOptions::default(), cfg).unwrap();
    let pairs = align(&tracks, &run.truth, DEFAULT_TOLERANCE_S).unwrap();
    RunResult {
        tracks,
        truth: run.truth,
        pairs,
    }
}

fn seeded_runs(cfg: &RadarConfig, scenario: &Scenario, runs: u64) -> Vec<RunResult> {
    (0..runs)
        .map(|k| {
            simulate_and_track(
                cfg,
                &Scenario {
                    rng_seed: scenario.rng_seed + k,
                    ..scenario.clone()
                },
            )
        })
        .collect()
}

fn report_of(results: &[RunResult]) -> RmseReport {
    let runs: Vec<_> = results.iter().map(|r| compute_rmse(&r.pairs).unwrap()).collect();
    summarize_runs(&runs).unwrap()
}

fn info_value(info: &str, name: &str) -> Option<f64> {
    let line = info
        .lines()
        .find(|l| l.starts_with(name) && l[name.len()..].starts_with("  "))?;
    line[name.len()..].split_whitespace().next()?.parse().ok()
}

fn derived_parameters() -> Outcome {
    let dir = TempDir::new().unwrap();
    let cfg = RadarConfig {
        f_low: 60e9,
        bandwidth: 4.0527e13 * 32e-6,
        sample_rate: 2e6,
        samples_per_chirp: 64,
        chirps_per_frame: 64,
        chirp_interval: 156.25e-6,
        zero_pad_size: 256,
        ..reference()
    };
    let path = dir.path().join("config.json");
    fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();

    let start = Instant::now();
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = cli::run(["fmcw", "info", "--config", path.to_str().unwrap()], &mut out, &mut err);
    let elapsed = start.elapsed().as_secs_f64();
    let info = String::from_utf8(out).unwrap();
    let (Some(vres), Some(vmax), Some(rmax)) = (
        info_value(&info, "velocity resolution"),
        info_value(&info, "max velocity"),
        info_value(&info, "max range"),
    ) else {
        return Err(format!("info exit {code}, unparseable output: {info}{}", String::from_utf8_lossy(&err)));
    };
    check(
        code == 0 && (vres - 0.25).abs() <= 0.005 && (vmax - 8.0).abs() <= 0.1 && (rmax - 3.7).abs() <= 0.01 && elapsed < 1.0,
        format!("velocity resolution {vres} m/s, max velocity {vmax} m/s, max range {rmax} m, {elapsed:.3} s"),
    )
}

fn range_resolution_formula() -> Outcome {
    let r = RadarConfig {
        bandwidth: 5e9,
        ..reference()
    }
    .range_resolution();
    check((r - 0.02998).abs() <= 1e-5, format!("range_resolution(5 GHz) = {r:.6} m"))
}

fn receding_target() -> Outcome {
    let cfg = reference();
    let scenario = Scenario {
        duration: 5.0,
        ego_speed: SpeedProfile::constant(0.0),
        targets: vec![Scatterer::target(0.0, 1.0, 0.0, 0.5, 1.0)],
        boundary_walls: None,
        ground_clutter: None,
        noise_std: noise_20db(),
        rng_seed: 100,
    };
    let start = Instant::now();
    let results = seeded_runs(&cfg, &scenario, 5);
    let elapsed = start.elapsed().as_secs_f64();
    let frames: usize = results.iter().map(|r| r.tracks.len()).sum();
    let rep = report_of(&results);
    check(
        frames == 500 && rep.range_rmse_m <= 0.06 && rep.velocity_rmse_mps <= 0.07 && elapsed < 10.0,
        format!(
            "range RMSE {:.4} ± {:.4} m, velocity RMSE {:.4} ± {:.4} m/s over {} runs / {frames} frames, {elapsed:.2} s",
            rep.range_rmse_m, rep.range_rmse_std_m, rep.velocity_rmse_mps, rep.velocity_rmse_std_mps, rep.runs
        ),
    )
}

fn accelerating_target() -> Outcome {
    let cfg = reference();
    let mut target = Scatterer::target(0.0, 1.0, 0.0, 0.0, 1.0);
    target.speed_profile = Some(SpeedProfile(vec![(0.0, 0.5), (1.5, 3.0)]));
    let scenario = Scenario {
        duration: 3.0,
        ego_speed: SpeedProfile::constant(0.0),
        targets: vec![target],
        boundary_walls: None,
        ground_clutter: None,
        noise_std: noise_20db(),
        rng_seed: 200,
    };
    let results = seeded_runs(&cfg, &scenario, 5);
    let rep = report_of(&results);

    let mut problems = Vec::new();
    let mut excluded = 0;
    for (k, r) in results.iter().enumerate() {
        let in_range: Vec<f64> = r.truth.iter().filter(|g| g.in_range).map(|g| g.timestamp).collect();
        let paired: Vec<f64> = r.pairs.iter().map(|p| p.timestamp).collect();
        excluded += r.truth.len() - in_range.len();
        if in_range != paired {
            problems.push(format!("run {k}: paired frames differ from in-range frames"));
        }
        // wild estimates on out-of-range frames must not move the statistics
        let mut corrupted = r.tracks.clone();
        for (t, g) in corrupted.iter_mut().zip(&r.truth) {
            if !g.in_range {
                t.range = 1e6;
                t.radial_velocity = -1e6;
                t.in_range = true;
            }
        }
        let a = compute_rmse(&r.pairs).unwrap();
        let b = compute_rmse(&align(&corrupted, &r.truth, DEFAULT_TOLERANCE_S).unwrap()).unwrap();
        if a != b {
            problems.push(format!("run {k}: out-of-range estimates changed RMSE"));
        }
    }
    if excluded == 0 {
        problems.push("scenario never leaves range".into());
    }
    let bound = 2.0 * cfg.velocity_bin_spacing();
    check(
        problems.is_empty() && rep.velocity_rmse_mps <= bound,
        format!(
            "velocity RMSE {:.4} m/s (bound {bound:.4}), range RMSE {:.4} m, {} in-range pairs, {excluded} out-of-range frames excluded{}",
            rep.velocity_rmse_mps,
            rep.range_rmse_m,
            rep.sample_count,
            if problems.is_empty() {
                String::new()
            } else {
                format!("; {}", problems.join("; "))
            }
        ),
    )
}

fn random_frame(rng: &mut ChaCha8Rng, rows: usize, cols: usize, mode: AdcMode) -> Samples {
    match mode {
        AdcMode::Real => Samples::Real(Array2::from_shape_fn((rows, cols), |_| rng.random_range(-1.0f32..1.0))),
        AdcMode::Complex => Samples::Complex(Array2::from_shape_fn((rows, cols), |_| {
            Complex32::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })),
    }
}

fn dft_equivalence() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let start = Instant::now();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let rows = rng.random_range(1..=16);
        let cols = rng.random_range(1..=16);
        let pad = rng.random_range(rows.max(cols)..=16);
        let mode = if rng.random_bool(0.5) { AdcMode::Real } else { AdcMode::Complex };
        let cfg = RadarConfig {
            samples_per_chirp: cols,
            chirps_per_frame: rows,
            zero_pad_size: pad,
            adc_mode: mode,
            ..reference()
        };
        let frame = RawFrame {
            samples: random_frame(&mut rng, rows, cols, mode),
            timestamp: 0.0,
            frame_index: 0,
        };
        let map = process_frame(&cfg, &frame).unwrap();
        let oracle = oracle_spectrum(&frame.samples.to_complex64(), pad, cfg.range_bins());
        worst = worst.max(max_rel_err(&map.spectrum, &oracle));
    }
    let elapsed = start.elapsed().as_secs_f64();
    check(
        worst <= 1e-9 && elapsed < 5.0,
        format!("worst relative error {worst:.2e} over 100 frames, {elapsed:.3} s"),
    )
}

fn phase_step() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let cfg = RadarConfig {
            chirp_interval: rng.random_range(40e-6..700e-6),
            adc_mode: AdcMode::Complex,
            ..reference()
        };
        let v = rng.random_range(-1.0..1.0) * cfg.max_velocity();
        let range = rng.random_range(0.3..3.5);
        let frame = single_frame(&cfg, Scatterer::target(0.0, range, 0.0, v, 1.0), 0.0);
        let x = frame.samples.to_complex64();
        let expected = 4.0 * PI * v * cfg.chirp_interval / cfg.wavelength();
        for m in 1..cfg.chirps_per_frame {
            let step = (x[[m, 0]] * x[[m - 1, 0]].conj()).arg();
            let diff = (step - expected + PI).rem_euclid(2.0 * PI) - PI;
            worst = worst.max(diff.abs());
        }
    }
    check(worst <= 1e-6, format!("worst phase-step error {worst:.2e} rad over 50 (v, T_s) pairs"))
}

fn peak_velocity(cfg: &RadarConfig, frame: &RawFrame, opts: &DetectorOptions) -> f64 {
    let map = process_frame(cfg, frame).unwrap();
    let p = detect_peak(&map.magnitude, opts).unwrap();
    map.axes.velocity_mps[p.doppler_row]
}

fn clutter_curve() -> Outcome {
    let cfg = reference();
    let ego = 2.0;
    let bin = cfg.velocity_bin_spacing();
    let opts = DetectorOptions {
        exclude_zero_doppler_rows: 0,
        ..Default::default()
    };
    let scenario = Scenario {
        duration: 1.0,
        ego_speed: SpeedProfile::constant(ego),
        targets: Vec::new(),
        boundary_walls: Some(BoundaryWalls {
            lateral_offsets: [-0.8, 0.8],
            spacing: 0.1,
            extent: 4.0,
            amplitude: 1.0,
        }),
        ground_clutter: None,
        noise_std: 0.0,
        rng_seed: 0,
    };
    let walls = build_track_clutter(&scenario, &mut ChaCha8Rng::seed_from_u64(0));
    let speed = SpeedProfile::constant(ego);

    let mut wall_worst = 0.0f64;
    let mut wall_count = 0;
    for s in walls {
        let g = radial_geometry(&s, &speed, 0.0);
        if !(1.0..=3.0).contains(&g.range) {
            continue;
        }
        let v = peak_velocity(&cfg, &single_frame(&cfg, s, ego), &opts);
        wall_worst = wall_worst.max((v + ego * g.angle.cos()).abs());
        wall_count += 1;
    }

    let mut far_worst = 0.0f64;
    let mut far_count = 0;
    for x in [-0.2, -0.1, 0.0, 0.1, 0.2] {
        for y in [2.5, 2.75, 3.0, 3.25, 3.5] {
            let s = Scatterer::fixed(x, y, 1.0, ScattererKind::Ground);
            let v = peak_velocity(&cfg, &single_frame(&cfg, s, ego), &opts);
            far_worst = far_worst.max((v + ego).abs());
            far_count += 1;
        }
    }
    check(
        wall_count > 0 && wall_worst <= bin && far_worst <= bin,
        format!(
            "{wall_count} wall scatterers: worst |v − (−2 cos θ)| {wall_worst:.4} m/s; {far_count} far boresight points: worst |v + 2| {far_worst:.4} m/s (bin {bin:.4})"
        ),
    )
}

fn aliasing() -> Outcome {
    let cfg = reference();
    let vmax = cfg.max_velocity();
    let bin = cfg.velocity_bin_spacing();
    let v = peak_velocity(&cfg, &target_frame(&cfg, 2.0, vmax + 1.0), &DetectorOptions::default());
    let expected = -vmax + 1.0;
    let err = (v - expected).abs();
    check(
        err <= bin,
        format!("v_max + 1 = {:.4} m/s peaks at {v:.4} m/s, expected {expected:.4} ± {bin:.4}; off by {err:.4}", vmax + 1.0),
    )
}

fn bits(s: &Samples) -> Vec<u32> {
    match s {
        Samples::Real(a) => a.iter().map(|v| v.to_bits()).collect(),
        Samples::Complex(a) => a.iter().flat_map(|v| [v.re.to_bits(), v.im.to_bits()]).collect(),
    }
}

fn read_tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn determinism_and_io() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut mismatches = 0;
    let mut total = 0;
    for log in 0..10 {
        let mode = if log % 2 == 0 { AdcMode::Real } else { AdcMode::Complex };
        let cfg = RadarConfig {
            samples_per_chirp: rng.random_range(1..=64),
            chirps_per_frame: rng.random_range(1..=64),
            adc_mode: mode,
            ..reference()
        };
        let frames: Vec<RawFrame> = (0..100)
            .map(|k| {
                let mut samples = random_frame(&mut rng, cfg.chirps_per_frame, cfg.samples_per_chirp, mode);
                // arbitrary bit patterns, not just the sampled range
                if let Samples::Real(a) = &mut samples {
                    a.iter_mut().for_each(|v| *v = f32::from_bits(rng.random::<u32>() & 0x7f7f_ffff));
                }
                RawFrame {
                    samples,
                    timestamp: rng.random::<f64>() * 1e3,
                    frame_index: k,
                }
            })
            .collect();
        let mut buf = Vec::new();
        encode_frame_log(&mut buf, &cfg, &frames).unwrap();
        let (back_cfg, back) = decode_frame_log(&buf).unwrap();
        total += frames.len();
        if back_cfg != cfg || back.len() != frames.len() {
            mismatches += frames.len();
            continue;
        }
        mismatches += frames
            .iter()
            .zip(&back)
            .filter(|(a, b)| {
                bits(&a.samples) != bits(&b.samples)
                    || a.timestamp.to_bits() != b.timestamp.to_bits()
                    || a.frame_index != b.frame_index
            })
            .count();
    }

    let dir = TempDir::new().unwrap();
    let scenario = Scenario {
        duration: 1.0,
        ego_speed: SpeedProfile::constant(1.0),
        targets: vec![Scatterer::target(0.1, 1.2, 0.0, 1.5, 1.0)],
        boundary_walls: Some(BoundaryWalls {
            lateral_offsets: [-0.8, 0.8],
            spacing: 0.25,
            extent: 4.0,
            amplitude: 0.5,
        }),
        ground_clutter: Some(fmcw_sim::scene::GroundClutter {
            count: 20,
            max_range: 3.5,
            amplitude: 0.2,
        }),
        noise_std: noise_20db(),
        rng_seed: 77,
    };
    let cfg_path = dir.path().join("config.json");
    let sc_path = dir.path().join("scenario.json");
    fs::write(&cfg_path, serde_json::to_string(&reference()).unwrap()).unwrap();
    fs::write(&sc_path, serde_json::to_string(&scenario).unwrap()).unwrap();
    let mut trees = Vec::new();
    for attempt in 0..2 {
        let out = dir.path().join(format!("out{attempt}"));
        let code = cli::run(
            [
                "fmcw",
                "run",
                "--config",
                cfg_path.to_str().unwrap(),
                "--scenario",
                sc_path.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--runs",
                "3",
            ],
            &mut Vec::new(),
            &mut Vec::new(),
        );
        if code != 0 {
            return Err(format!("run exited with {code}"));
        }
        trees.push(read_tree(&out));
    }
    let identical = trees[0] == trees[1];
    check(
        total == 1000 && mismatches == 0 && identical,
        format!(
            "{total} frames round-tripped, {mismatches} mismatched; two seeded runs wrote {} files, byte-identical: {identical}",
            trees[0].len()
        ),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("derived parameters", derived_parameters),
        ("range-resolution formula", range_resolution_formula),
        ("receding target RMSE", receding_target),
        ("accelerating target, gated", accelerating_target),
        ("DFT oracle equivalence", dft_equivalence),
        ("chirp-to-chirp phase step", phase_step),
        ("clutter curve", clutter_curve),
        ("velocity aliasing", aliasing),
        ("determinism and frame-log I/O", determinism_and_io),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(d) => println!("[PASS] criterion {} ({name}): {d}", i + 1),
            Err(d) => {
                failed += 1;
                println!("[FAIL] criterion {} ({name}): {d}", i + 1)
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
