//! Test-only reference implementations. Nothing here calls into the crate's DSP
//! so it can serve as an independent check of it.
#![allow(dead_code)]

use std::f64::consts::PI;

use fmcw_sim::scene::{synthesize_frame, RawFrame, Scatterer, Scene, SpeedProfile};
use fmcw_sim::RadarConfig;
use ndarray::Array2;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn hann_ref(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    (0..len)
        .map(|k| {
            let x = PI * k as f64 / (len - 1) as f64;
            x.sin().powi(2)
        })
        .collect()
}

/// DC removal, both-axis Hann, then a direct separable DFT of the zero-padded
/// frame with rows rotated so frequency 0 lands on `pad / 2`.
pub fn oracle_spectrum(frame: &Array2<Complex64>, pad: usize, keep: usize) -> Array2<Complex64> {
    let (rows, cols) = frame.dim();
    let wf = hann_ref(cols);
    let ws = hann_ref(rows);
    let mut x = frame.clone();
    for m in 0..rows {
        let mean: Complex64 = (0..cols).map(|n| frame[[m, n]]).sum::<Complex64>() / cols as f64;
        for n in 0..cols {
            x[[m, n]] = (frame[[m, n]] - mean) * wf[n] * ws[m];
        }
    }
    // fast-time DFT, padded samples contribute nothing
    let mut range = Array2::<Complex64>::zeros((rows, keep));
    for m in 0..rows {
        for k in 0..keep {
            range[[m, k]] = (0..cols)
                .map(|n| x[[m, n]] * Complex64::from_polar(1.0, -2.0 * PI * ((k * n) % pad) as f64 / pad as f64))
                .sum();
        }
    }
    let center = pad / 2;
    let mut out = Array2::<Complex64>::zeros((pad, keep));
    for j in 0..pad {
        let d = (j + pad - center) % pad;
        for k in 0..keep {
            out[[j, k]] = (0..rows)
                .map(|m| range[[m, k]] * Complex64::from_polar(1.0, -2.0 * PI * ((d * m) % pad) as f64 / pad as f64))
                .sum();
        }
    }
    out
}

/// Largest |z| over the matrix; ties to the lowest column, then row.
pub fn exhaustive_argmax(m: &Array2<f64>) -> (usize, usize) {
    let (rows, cols) = m.dim();
    let mut best = (0, 0);
    for c in 0..cols {
        for r in 0..rows {
            if m[[r, c]] > m[[best.0, best.1]] {
                best = (r, c);
            }
        }
    }
    best
}

pub fn max_rel_err(a: &Array2<Complex64>, b: &Array2<Complex64>) -> f64 {
    let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let diff = a
        .iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    // absolute below 1e-12 so all-zero spectra (e.g. 2-point Hann) compare sanely
    diff / scale.max(1e-12)
}

/// Velocity whose Doppler the synthesized frame actually carries at the
/// range-FFT peak. The chirp-to-chirp phase picks up the beat term at the
/// window's centre sample, so the carrier is effectively
/// f_low + S * (Ns - 1) / (2 fs) rather than f_low.
pub fn effective_velocity(cfg: &RadarConfig, v: f64) -> f64 {
    let centre = (cfg.samples_per_chirp as f64 - 1.0) / (2.0 * cfg.sample_rate);
    v * (cfg.f_low + cfg.chirp_slope() * centre) / cfg.f_low
}

/// Wraps a velocity into [-max_velocity, max_velocity).
pub fn wrap_velocity(cfg: &RadarConfig, v: f64) -> f64 {
    let span = 2.0 * cfg.max_velocity();
    (v + cfg.max_velocity()).rem_euclid(span) - cfg.max_velocity()
}

/// Noiseless frame for a single scatterer at time 0.
pub fn single_frame(cfg: &RadarConfig, s: Scatterer, ego_speed: f64) -> RawFrame {
    let scene = Scene::new(vec![s], SpeedProfile::constant(ego_speed), 0.0);
    synthesize_frame(cfg, &scene, 0.0, 0, &mut ChaCha8Rng::seed_from_u64(0))
}

pub fn target_frame(cfg: &RadarConfig, range: f64, velocity: f64) -> RawFrame {
    single_frame(cfg, Scatterer::target(0.0, range, 0.0, velocity, 1.0), 0.0)
}

/// Index of the axis entry nearest `v`.
pub fn nearest_bin(axis: &[f64], v: f64) -> usize {
    (0..axis.len())
        .min_by(|&a, &b| (axis[a] - v).abs().total_cmp(&(axis[b] - v).abs()))
        .unwrap()
}
