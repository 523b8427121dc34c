//! Raw frame to range-doppler map: DC removal, Hanning window on both axes,
//! zero-padding, range FFT, Doppler FFT, magnitude.
//!
//! Matrices are chirps (slow time) by samples (fast time). After the Doppler
//! FFT the rows are rotated so that zero velocity sits at row `zero_pad_size / 2`.

use std::f64::consts::PI;
use std::sync::Arc;

use ndarray::{Array2, Axis};
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::config::{AdcMode, Axes, RadarConfig};
use crate::error::{Error, Result};
use crate::scene::RawFrame;

/// Symmetric Hann taps `0.5 (1 - cos(2πk / (L-1)))`. A single tap is 1.
pub fn hann(len: usize) -> Vec<f64> {
    if len == 1 {
        return vec![1.0];
    }
    let denom = (len - 1) as f64;
    (0..len)
        .map(|k| 0.5 * (1.0 - (2.0 * PI * k as f64 / denom).cos()))
        .collect()
}

/// Subtracts each chirp's mean.
pub fn dc_removal(frame: &Array2<Complex64>) -> Array2<Complex64> {
    let mut out = frame.clone();
    for mut row in out.rows_mut() {
        let n = row.len() as f64;
        if n == 0.0 {
            continue;
        }
        let mean = row.sum() / n;
        row.mapv_inplace(|v| v - mean);
    }
    out
}

/// Hann window along fast time, then along slow time.
pub fn apply_window(frame: &Array2<Complex64>) -> Array2<Complex64> {
    let (rows, cols) = frame.dim();
    let fast = hann(cols);
    let slow = hann(rows);
    let mut out = frame.clone();
    for ((m, n), v) in out.indexed_iter_mut() {
        *v *= fast[n] * slow[m];
    }
    out
}

/// Embeds `frame` at the origin of a `size × size` zero matrix.
pub fn zero_pad(frame: &Array2<Complex64>, size: usize) -> Result<Array2<Complex64>> {
    let (rows, cols) = frame.dim();
    if rows > size || cols > size {
        return Err(Error::invalid(format!(
            "cannot pad {rows}×{cols} frame to {size}×{size}"
        )));
    }
    let mut out = Array2::zeros((size, size));
    out.slice_mut(ndarray::s![..rows, ..cols]).assign(frame);
    Ok(out)
}

fn fft_rows(data: &mut Array2<Complex64>, fft: &dyn Fft<f64>) {
    let mut buf = vec![Complex64::new(0.0, 0.0); data.ncols()];
    for mut row in data.rows_mut() {
        if row.iter().all(|v| v.re == 0.0 && v.im == 0.0) {
            continue;
        }
        buf.iter_mut().zip(row.iter()).for_each(|(b, v)| *b = *v);
        fft.process(&mut buf);
        row.iter_mut().zip(&buf).for_each(|(v, b)| *v = *b);
    }
}

fn fft_columns(data: &mut Array2<Complex64>, fft: &dyn Fft<f64>) {
    let mut buf = vec![Complex64::new(0.0, 0.0); data.nrows()];
    for mut col in data.columns_mut() {
        buf.iter_mut().zip(col.iter()).for_each(|(b, v)| *b = *v);
        fft.process(&mut buf);
        col.iter_mut().zip(&buf).for_each(|(v, b)| *v = *b);
    }
}

/// Row index that holds zero frequency after rotation.
pub fn zero_doppler_index(len: usize) -> usize {
    len / 2
}

/// Range FFT along fast time, keeping the first `keep` bins.
pub fn range_spectrum(padded: &Array2<Complex64>, keep: usize) -> Array2<Complex64> {
    let fft = FftPlanner::new().plan_fft_forward(padded.ncols());
    range_spectrum_with(padded, keep, fft.as_ref())
}

fn range_spectrum_with(padded: &Array2<Complex64>, keep: usize, fft: &dyn Fft<f64>) -> Array2<Complex64> {
    let mut work = padded.clone();
    fft_rows(&mut work, fft);
    let keep = keep.min(work.ncols());
    work.slice_move(ndarray::s![.., ..keep])
}

/// Doppler FFT along slow time, rotated so zero velocity lands on `len / 2`.
pub fn doppler_spectrum(range_spec: &Array2<Complex64>) -> Array2<Complex64> {
    let fft = FftPlanner::new().plan_fft_forward(range_spec.nrows());
    doppler_spectrum_with(range_spec, fft.as_ref())
}

fn doppler_spectrum_with(range_spec: &Array2<Complex64>, fft: &dyn Fft<f64>) -> Array2<Complex64> {
    let mut work = range_spec.clone();
    fft_columns(&mut work, fft);
    let p = work.nrows();
    let center = zero_doppler_index(p);
    let mut out = Array2::zeros(work.dim());
    for (j, mut row) in out.axis_iter_mut(Axis(0)).enumerate() {
        row.assign(&work.row((j + p - center) % p));
    }
    out
}

#[derive(Debug, Clone)]
pub struct RangeDopplerMap {
    /// Doppler rows × range columns, linear magnitude.
    pub magnitude: Array2<f64>,
    /// Pre-magnitude spectrum, same shape.
    pub spectrum: Array2<Complex64>,
    pub axes: Arc<Axes>,
    pub timestamp: f64,
    pub frame_index: u32,
}

impl RangeDopplerMap {
    pub fn dim(&self) -> (usize, usize) {
        self.magnitude.dim()
    }

    /// `20 log10(m / max)` clamped below at `floor_db`. An all-zero map is all floor.
    pub fn magnitude_db(&self, floor_db: f64) -> Result<Array2<f64>> {
        if !(floor_db < 0.0) {
            return Err(Error::invalid(format!("floor_db must be < 0 (got {floor_db})")));
        }
        let max = self.magnitude.iter().cloned().fold(0.0, f64::max);
        if max == 0.0 {
            return Ok(Array2::from_elem(self.magnitude.dim(), floor_db));
        }
        Ok(self
            .magnitude
            .mapv(|m| (20.0 * (m / max).log10()).max(floor_db)))
    }

    pub fn energy(&self) -> f64 {
        self.magnitude.iter().map(|m| m * m).sum()
    }
}

/// The processing chain for one radar config, with FFT plans and axes built once.
pub struct RangeDopplerProcessor {
    config: RadarConfig,
    axes: Arc<Axes>,
    range_fft: Arc<dyn Fft<f64>>,
    doppler_fft: Arc<dyn Fft<f64>>,
}

impl RangeDopplerProcessor {
    pub fn new(config: &RadarConfig) -> Result<Self> {
        config.ensure_valid()?;
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(config.zero_pad_size);
        Ok(Self {
            config: *config,
            axes: config.axes(),
            range_fft: fft.clone(),
            doppler_fft: fft,
        })
    }

    pub fn config(&self) -> &RadarConfig {
        &self.config
    }

    pub fn axes(&self) -> &Arc<Axes> {
        &self.axes
    }

    pub fn process(&self, frame: &RawFrame) -> Result<RangeDopplerMap> {
        frame.check_dims(&self.config)?;
        let keep = match self.config.adc_mode {
            AdcMode::Real => self.config.zero_pad_size / 2,
            AdcMode::Complex => self.config.zero_pad_size,
        };
        let x = frame.samples.to_complex64();
        let x = apply_window(&dc_removal(&x));
        let x = zero_pad(&x, self.config.zero_pad_size)?;
        let x = range_spectrum_with(&x, keep, self.range_fft.as_ref());
        let spectrum = doppler_spectrum_with(&x, self.doppler_fft.as_ref());
        Ok(RangeDopplerMap {
            magnitude: spectrum.mapv(|v| v.norm()),
            spectrum,
            axes: self.axes.clone(),
            timestamp: frame.timestamp,
            frame_index: frame.frame_index,
        })
    }
}

/// One-shot convenience around [`RangeDopplerProcessor`].
pub fn process_frame(config: &RadarConfig, frame: &RawFrame) -> Result<RangeDopplerMap> {
    RangeDopplerProcessor::new(config)?.process(frame)
}
