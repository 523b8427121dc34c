//! Max-energy tracking on range-doppler maps.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::config::RadarConfig;
use crate::dsp::{zero_doppler_index, RangeDopplerMap};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorOptions {
    /// Rows removed on each side of zero velocity, together with the zero row
    /// itself. `0` disables the exclusion.
    pub exclude_zero_doppler_rows: usize,
    /// Nearest range columns removed from the search.
    pub min_range_bins: usize,
    pub parabolic_interpolation: bool,
}

impl Default for DetectorOptions {
    fn default() -> Self {
        Self {
            exclude_zero_doppler_rows: 1,
            min_range_bins: 2,
            parabolic_interpolation: false,
        }
    }
}

impl DetectorOptions {
    pub fn validate(&self, (rows, cols): (usize, usize)) -> Result<()> {
        if self.exclude_zero_doppler_rows >= rows.div_ceil(2) {
            return Err(Error::invalid(format!(
                "exclude_zero_doppler_rows {} must be below half of {rows} rows",
                self.exclude_zero_doppler_rows
            )));
        }
        if self.min_range_bins >= cols.div_ceil(2) {
            return Err(Error::invalid(format!(
                "min_range_bins {} must be below half of {cols} columns",
                self.min_range_bins
            )));
        }
        Ok(())
    }

    /// Whether Doppler row `row` of a map with `rows` rows is searchable.
    pub fn row_allowed(&self, row: usize, rows: usize) -> bool {
        let k = self.exclude_zero_doppler_rows;
        k == 0 || row.abs_diff(zero_doppler_index(rows)) > k
    }

    pub fn col_allowed(&self, col: usize) -> bool {
        col >= self.min_range_bins
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub doppler_row: usize,
    pub range_col: usize,
    pub magnitude: f64,
}

/// Maximum over the non-excluded cells. Ties go to the smaller range column,
/// then the smaller Doppler row.
pub fn detect_peak(magnitude: &Array2<f64>, options: &DetectorOptions) -> Result<Peak> {
    let (rows, cols) = magnitude.dim();
    if rows == 0 || cols == 0 {
        return Err(Error::invalid("empty map"));
    }
    options.validate((rows, cols))?;
    let mut best: Option<Peak> = None;
    for col in (0..cols).filter(|&c| options.col_allowed(c)) {
        for row in (0..rows).filter(|&r| options.row_allowed(r, rows)) {
            let m = magnitude[[row, col]];
            if best.is_none_or(|b| m > b.magnitude) {
                best = Some(Peak {
                    doppler_row: row,
                    range_col: col,
                    magnitude: m,
                });
            }
        }
    }
    best.ok_or_else(|| Error::invalid("exclusion zones leave no searchable cell"))
}

/// Vertex offset of the parabola through `(−1, l), (0, c), (1, r)`, clamped to ±0.5.
pub fn parabolic_offset(l: f64, c: f64, r: f64) -> f64 {
    let denom = l - 2.0 * c + r;
    if denom == 0.0 || !denom.is_finite() {
        return 0.0;
    }
    (0.5 * (l - r) / denom).clamp(-0.5, 0.5)
}

fn axis_value(axis: &[f64], idx: usize, offset: f64) -> f64 {
    let spacing = if axis.len() > 1 { axis[1] - axis[0] } else { 0.0 };
    axis[idx] + offset * spacing
}

/// Converts bin indices to `(range m, velocity m/s)`.
pub fn bins_to_physical(
    map: &RangeDopplerMap,
    doppler_row: usize,
    range_col: usize,
    options: &DetectorOptions,
) -> Result<(f64, f64)> {
    let (rows, cols) = map.dim();
    if doppler_row >= rows || range_col >= cols {
        return Err(Error::invalid(format!(
            "bin ({doppler_row}, {range_col}) outside {rows}×{cols} map"
        )));
    }
    let (mut dr, mut dc) = (0.0, 0.0);
    if options.parabolic_interpolation {
        let m = &map.magnitude;
        let c = m[[doppler_row, range_col]];
        if doppler_row > 0 && doppler_row + 1 < rows {
            dr = parabolic_offset(m[[doppler_row - 1, range_col]], c, m[[doppler_row + 1, range_col]]);
        }
        if range_col > 0 && range_col + 1 < cols {
            dc = parabolic_offset(m[[doppler_row, range_col - 1]], c, m[[doppler_row, range_col + 1]]);
        }
    }
    Ok((
        axis_value(&map.axes.range_m, range_col, dc),
        axis_value(&map.axes.velocity_mps, doppler_row, dr),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    pub timestamp: f64,
    pub range: f64,
    pub radial_velocity: f64,
    pub peak_magnitude: f64,
    pub in_range: bool,
}

/// Marks the point in range iff `range ≤ max_range` (closed bound).
pub fn gate(point: TrackPoint, config: &RadarConfig) -> TrackPoint {
    TrackPoint {
        in_range: point.range <= config.max_range(),
        ..point
    }
}

pub fn track_frame(
    map: &RangeDopplerMap,
    options: &DetectorOptions,
    config: &RadarConfig,
) -> Result<TrackPoint> {
    let peak = detect_peak(&map.magnitude, options)?;
    let (range, radial_velocity) = bins_to_physical(map, peak.doppler_row, peak.range_col, options)?;
    Ok(gate(
        TrackPoint {
            timestamp: map.timestamp,
            range,
            radial_velocity,
            peak_magnitude: peak.magnitude,
            in_range: false,
        },
        config,
    ))
}

/// Independent per-frame estimates, in input order. No temporal smoothing.
pub fn track_run(
    maps: &[RangeDopplerMap],
    options: &DetectorOptions,
    config: &RadarConfig,
) -> Result<Vec<TrackPoint>> {
    maps.iter().map(|m| track_frame(m, options, config)).collect()
}
