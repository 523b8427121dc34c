//! Matching radar estimates to ground truth and the RMSE statistics over runs.

use serde::{Deserialize, Serialize};

use crate::detect::TrackPoint;
use crate::error::{Error, Result};
use crate::scene::GroundTruthPoint;

/// Half the frame period at 20 Hz.
pub const DEFAULT_TOLERANCE_S: f64 = 0.025;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignedPair {
    pub timestamp: f64,
    pub est_range: f64,
    pub true_range: f64,
    pub est_velocity: f64,
    pub true_velocity: f64,
}

fn ensure_sorted(ts: impl Iterator<Item = f64>, what: &str) -> Result<()> {
    let mut prev = f64::NEG_INFINITY;
    for (i, t) in ts.enumerate() {
        if !(t >= prev) {
            return Err(Error::invalid(format!(
                "{what} timestamps not sorted at index {i} ({t} after {prev})"
            )));
        }
        prev = t;
    }
    Ok(())
}

/// Pairs every in-range track point with the nearest unused truth point within
/// `tolerance` seconds. Pairs whose truth is out of range are dropped, as are
/// unmatched points.
pub fn align(
    tracks: &[TrackPoint],
    truth: &[GroundTruthPoint],
    tolerance: f64,
) -> Result<Vec<AlignedPair>> {
    ensure_sorted(tracks.iter().map(|p| p.timestamp), "track")?;
    ensure_sorted(truth.iter().map(|p| p.timestamp), "truth")?;
    if !(tolerance >= 0.0) {
        return Err(Error::invalid("tolerance must be ≥ 0"));
    }

    let mut used = vec![false; truth.len()];
    let mut out = Vec::new();
    for tp in tracks.iter().filter(|p| p.in_range) {
        let lo = truth.partition_point(|g| g.timestamp < tp.timestamp - tolerance);
        let hi = truth.partition_point(|g| g.timestamp <= tp.timestamp + tolerance);
        let nearest = (lo..hi)
            .filter(|&i| !used[i])
            .min_by(|&a, &b| {
                let da = (truth[a].timestamp - tp.timestamp).abs();
                let db = (truth[b].timestamp - tp.timestamp).abs();
                da.total_cmp(&db)
            });
        let Some(i) = nearest else { continue };
        used[i] = true;
        let g = &truth[i];
        if !g.in_range {
            continue;
        }
        out.push(AlignedPair {
            timestamp: tp.timestamp,
            est_range: tp.range,
            true_range: g.range,
            est_velocity: tp.radial_velocity,
            true_velocity: g.radial_velocity,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRmse {
    pub range_rmse_m: f64,
    pub velocity_rmse_mps: f64,
    pub sample_count: usize,
}

pub fn compute_rmse(pairs: &[AlignedPair]) -> Result<RunRmse> {
    if pairs.is_empty() {
        return Err(Error::invalid("no aligned pairs to evaluate"));
    }
    let n = pairs.len() as f64;
    let rms = |f: &dyn Fn(&AlignedPair) -> f64| (pairs.iter().map(|p| f(p).powi(2)).sum::<f64>() / n).sqrt();
    Ok(RunRmse {
        range_rmse_m: rms(&|p| p.est_range - p.true_range),
        velocity_rmse_mps: rms(&|p| p.est_velocity - p.true_velocity),
        sample_count: pairs.len(),
    })
}

/// Mean and population standard deviation of per-run RMSE.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RmseReport {
    pub runs: usize,
    pub sample_count: usize,
    pub range_rmse_m: f64,
    pub range_rmse_std_m: f64,
    pub velocity_rmse_mps: f64,
    pub velocity_rmse_std_mps: f64,
    pub per_run_range_rmse_m: Vec<f64>,
    pub per_run_velocity_rmse_mps: Vec<f64>,
    pub per_run_sample_count: Vec<usize>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn summarize_runs(runs: &[RunRmse]) -> Result<RmseReport> {
    if runs.is_empty() {
        return Err(Error::invalid("no runs to summarize"));
    }
    let range: Vec<f64> = runs.iter().map(|r| r.range_rmse_m).collect();
    let vel: Vec<f64> = runs.iter().map(|r| r.velocity_rmse_mps).collect();
    let (rm, rs) = mean_std(&range);
    let (vm, vs) = mean_std(&vel);
    Ok(RmseReport {
        runs: runs.len(),
        sample_count: runs.iter().map(|r| r.sample_count).sum(),
        range_rmse_m: rm,
        range_rmse_std_m: rs,
        velocity_rmse_mps: vm,
        velocity_rmse_std_mps: vs,
        per_run_range_rmse_m: range,
        per_run_velocity_rmse_mps: vel,
        per_run_sample_count: runs.iter().map(|r| r.sample_count).collect(),
    })
}

/// Pretty JSON with a trailing newline. Field order is fixed, so output is stable.
pub fn export_report(report: &RmseReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn parse_report(s: &str) -> Result<RmseReport> {
    Ok(serde_json::from_str(s)?)
}

/// One odometry row: speed of the observed vehicle and optionally its distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdometrySample {
    pub timestamp: f64,
    pub speed: f64,
    pub range: Option<f64>,
}

/// Ground truth from odometry. Rows without a range get one by trapezoidal
/// integration of speed from `initial_distance` at the first timestamp.
/// `in_range` compares against `max_range` when given, otherwise is always true.
pub fn truth_from_odometry(
    samples: &[OdometrySample],
    initial_distance: Option<f64>,
    max_range: Option<f64>,
) -> Result<Vec<GroundTruthPoint>> {
    ensure_sorted(samples.iter().map(|s| s.timestamp), "odometry")?;
    let mut out = Vec::with_capacity(samples.len());
    let mut integrated = initial_distance;
    for (i, s) in samples.iter().enumerate() {
        if i > 0 {
            let p = &samples[i - 1];
            integrated = integrated.map(|d| d + 0.5 * (p.speed + s.speed) * (s.timestamp - p.timestamp));
        }
        let range = match (s.range, integrated) {
            (Some(r), _) => r,
            (None, Some(d)) => d,
            (None, None) => {
                return Err(Error::invalid(
                    "odometry row without range_m needs an initial distance",
                ))
            }
        };
        out.push(GroundTruthPoint {
            timestamp: s.timestamp,
            range,
            radial_velocity: s.speed,
            in_range: max_range.is_none_or(|m| range <= m),
        });
    }
    Ok(out)
}
