//! Radar parameterization and the closed-form quantities derived from it.
//!
//! All values are SI: Hz, seconds, meters, m/s. The chirp model is a linear
//! sweep starting at `f_low` and covering `bandwidth` during the active part of
//! each chirp, `samples_per_chirp / sample_rate` seconds long.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, Violation};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdcMode {
    /// Single mixer, real-valued samples. Only `[0, fs/2)` of the beat spectrum is usable.
    #[default]
    Real,
    /// I/Q mixer, complex samples.
    Complex,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarConfig {
    /// Chirp start frequency, Hz.
    pub f_low: f64,
    /// Sweep bandwidth `f_high - f_low`, Hz.
    pub bandwidth: f64,
    /// ADC sample rate, Hz.
    pub sample_rate: f64,
    /// Fast-time samples per chirp.
    pub samples_per_chirp: usize,
    /// Chirps per frame (slow-time length).
    pub chirps_per_frame: usize,
    /// Chirp start to chirp start, seconds.
    pub chirp_interval: f64,
    /// Frames per second.
    pub frame_rate: f64,
    /// Length of each FFT axis after zero-padding.
    pub zero_pad_size: usize,
    #[serde(default)]
    pub adc_mode: AdcMode,
}

impl Default for RadarConfig {
    fn default() -> Self {
        Self::reference()
    }
}

impl RadarConfig {
    /// 60 GHz short-range setup: 20 Hz frames of 64 chirps, 64 samples at 2 MHz,
    /// 156.25 µs chirp spacing, zero-padded to 256. Gives about 3.7 m maximum range,
    /// 8 m/s maximum velocity and 0.25 m/s velocity resolution.
    pub fn reference() -> Self {
        Self {
            f_low: 60.0e9,
            bandwidth: 1.29685e9,
            sample_rate: 2.0e6,
            samples_per_chirp: 64,
            chirps_per_frame: 64,
            chirp_interval: 156.25e-6,
            frame_rate: 20.0,
            zero_pad_size: 256,
            adc_mode: AdcMode::Real,
        }
    }

    /// Returns every violated invariant; an empty list means the config is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut check = |ok: bool, msg: String| {
            if !ok {
                out.push(Violation(msg));
            }
        };

        for (name, v) in [
            ("f_low", self.f_low),
            ("bandwidth", self.bandwidth),
            ("sample_rate", self.sample_rate),
            ("chirp_interval", self.chirp_interval),
            ("frame_rate", self.frame_rate),
        ] {
            check(v.is_finite() && v > 0.0, format!("{name} > 0 (got {v})"));
        }
        check(
            self.samples_per_chirp > 0,
            "samples_per_chirp > 0".to_string(),
        );
        check(
            self.chirps_per_frame > 0,
            "chirps_per_frame > 0".to_string(),
        );

        if self.sample_rate > 0.0 && self.chirp_interval > 0.0 {
            let t_c = self.chirp_duration();
            check(
                t_c <= self.chirp_interval,
                format!(
                    "T_c ≤ T_s (active chirp {t_c:e} s exceeds chirp_interval {:e} s)",
                    self.chirp_interval
                ),
            );
        }
        if self.frame_rate > 0.0 && self.chirp_interval > 0.0 {
            let burst = self.chirps_per_frame as f64 * self.chirp_interval;
            check(
                burst <= 1.0 / self.frame_rate,
                format!(
                    "N × T_s ≤ 1/frame_rate (chirp burst {burst:e} s exceeds frame period {:e} s)",
                    1.0 / self.frame_rate
                ),
            );
        }
        check(
            self.zero_pad_size >= self.samples_per_chirp,
            format!(
                "zero_pad_size ≥ samples_per_chirp ({} < {})",
                self.zero_pad_size, self.samples_per_chirp
            ),
        );
        check(
            self.zero_pad_size >= self.chirps_per_frame,
            format!(
                "zero_pad_size ≥ chirps_per_frame ({} < {})",
                self.zero_pad_size, self.chirps_per_frame
            ),
        );
        out
    }

    pub fn ensure_valid(&self) -> Result<()> {
        let v = self.validate();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(v))
        }
    }

    /// Active chirp duration `T_c = Ns / fs`.
    pub fn chirp_duration(&self) -> f64 {
        self.samples_per_chirp as f64 / self.sample_rate
    }

    /// Chirp slope `S = B / T_c`, Hz/s.
    pub fn chirp_slope(&self) -> f64 {
        self.bandwidth / self.chirp_duration()
    }

    pub fn f_high(&self) -> f64 {
        self.f_low + self.bandwidth
    }

    /// Carrier wavelength, taken at the chirp start frequency.
    pub fn wavelength(&self) -> f64 {
        SPEED_OF_LIGHT / self.f_low
    }

    /// `c / 2B`
    pub fn range_resolution(&self) -> f64 {
        SPEED_OF_LIGHT / (2.0 * self.bandwidth)
    }

    /// Range whose beat frequency sits at the ADC Nyquist limit.
    pub fn max_range(&self) -> f64 {
        let nyquist_div = match self.adc_mode {
            AdcMode::Real => 4.0,
            AdcMode::Complex => 2.0,
        };
        SPEED_OF_LIGHT * self.sample_rate / (nyquist_div * self.chirp_slope())
    }

    /// Maximum unambiguous radial velocity `λ / 4T_s`.
    pub fn max_velocity(&self) -> f64 {
        self.wavelength() / (4.0 * self.chirp_interval)
    }

    /// `λ / (2 T_s N)`
    pub fn velocity_resolution(&self) -> f64 {
        self.wavelength() / (2.0 * self.chirp_interval * self.chirps_per_frame as f64)
    }

    /// Number of range bins kept after the range FFT.
    pub fn range_bins(&self) -> usize {
        match self.adc_mode {
            AdcMode::Real => self.zero_pad_size / 2,
            AdcMode::Complex => self.zero_pad_size,
        }
    }

    pub fn doppler_bins(&self) -> usize {
        self.zero_pad_size
    }

    /// Range per FFT bin after padding.
    pub fn range_bin_spacing(&self) -> f64 {
        self.max_range() / self.range_bins() as f64
    }

    /// Velocity per FFT bin after padding.
    pub fn velocity_bin_spacing(&self) -> f64 {
        2.0 * self.max_velocity() / self.zero_pad_size as f64
    }

    /// Index of the zero-velocity Doppler row.
    pub fn zero_doppler_row(&self) -> usize {
        self.zero_pad_size / 2
    }

    pub fn range_axis(&self) -> Vec<f64> {
        let dr = self.range_bin_spacing();
        (0..self.range_bins()).map(|k| k as f64 * dr).collect()
    }

    /// Zero-centred: row `zero_pad_size / 2` is 0 m/s.
    pub fn velocity_axis(&self) -> Vec<f64> {
        let dv = self.velocity_bin_spacing();
        let center = self.zero_doppler_row() as f64;
        (0..self.zero_pad_size)
            .map(|j| (j as f64 - center) * dv)
            .collect()
    }

    pub fn axes(&self) -> Arc<Axes> {
        Arc::new(Axes {
            range_m: self.range_axis(),
            velocity_mps: self.velocity_axis(),
        })
    }
}

/// Angular resolution `2 / N` in radians for an array of `antenna_count` elements.
pub fn angular_resolution(antenna_count: usize) -> Result<f64> {
    if antenna_count == 0 {
        return Err(Error::invalid("antenna_count must be at least 1"));
    }
    Ok(2.0 / antenna_count as f64)
}

/// Physical axes of a range-doppler map. Built once per config and shared by
/// every map produced under it.
#[derive(Debug, Clone, PartialEq)]
pub struct Axes {
    pub range_m: Vec<f64>,
    pub velocity_mps: Vec<f64>,
}
