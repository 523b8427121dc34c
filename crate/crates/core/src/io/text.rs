//! CSV and PGM emitters and the matching CSV readers.
//!
//! Numbers are written with 9 significant digits, `.` decimal separator, LF
//! line endings.

use std::fmt::Write as _;

use crate::detect::TrackPoint;
use crate::dsp::RangeDopplerMap;
use crate::error::{Error, Result};
use crate::eval::OdometrySample;
use crate::scene::GroundTruthPoint;

pub const TRUTH_HEADER: &str = "timestamp_s,range_m,radial_velocity_mps,in_range";
pub const TRACK_HEADER: &str = "timestamp_s,range_m,radial_velocity_mps,peak_magnitude,in_range";
pub const ODOMETRY_HEADER: &str = "timestamp_s,speed_mps";
pub const ODOMETRY_RANGE_HEADER: &str = "timestamp_s,speed_mps,range_m";

/// Formats `x` with 9 significant digits, trailing zeros trimmed.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..15).contains(&exp) {
        return format!("{x:.8e}");
    }
    let decimals = (8 - exp).max(0) as usize;
    let mut s = format!("{x:.decimals$}");
    if s.contains('.') {
        let trimmed = s.trim_end_matches('0').trim_end_matches('.').len();
        s.truncate(trimmed);
    }
    s
}

pub fn truth_to_csv(points: &[GroundTruthPoint]) -> String {
    let mut s = String::from(TRUTH_HEADER);
    s.push('\n');
    for p in points {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_sig(p.timestamp),
            fmt_sig(p.range),
            fmt_sig(p.radial_velocity),
            p.in_range
        );
    }
    s
}

pub fn tracks_to_csv(points: &[TrackPoint]) -> String {
    let mut s = String::from(TRACK_HEADER);
    s.push('\n');
    for p in points {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            fmt_sig(p.timestamp),
            fmt_sig(p.range),
            fmt_sig(p.radial_velocity),
            fmt_sig(p.peak_magnitude),
            p.in_range
        );
    }
    s
}

struct Rows<'a> {
    name: &'a str,
    header: &'a str,
    body: Vec<(usize, Vec<&'a str>)>,
}

fn split_rows<'a>(name: &'a str, text: &'a str) -> Result<Rows<'a>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Parse {
        source_name: name.to_string(),
        line: 1,
        msg: "empty file".into(),
    })?;
    Ok(Rows {
        name,
        header: header.trim(),
        body: lines
            .map(|(i, l)| (i, l.split(',').map(str::trim).collect()))
            .collect(),
    })
}

impl Rows<'_> {
    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            source_name: self.name.to_string(),
            line,
            msg: msg.into(),
        }
    }

    fn expect_header(&self, want: &str) -> Result<()> {
        if self.header != want {
            return Err(self.err(1, format!("expected header `{want}`, found `{}`", self.header)));
        }
        Ok(())
    }

    fn num(&self, line: usize, s: &str) -> Result<f64> {
        s.parse::<f64>()
            .map_err(|_| self.err(line, format!("not a number: `{s}`")))
    }

    fn flag(&self, line: usize, s: &str) -> Result<bool> {
        match s {
            "true" | "1" => Ok(true),
            "false" | "0" => Ok(false),
            _ => Err(self.err(line, format!("not a boolean: `{s}`"))),
        }
    }

    fn width(&self, line: usize, cols: &[&str], n: usize) -> Result<()> {
        if cols.len() != n {
            return Err(self.err(line, format!("expected {n} fields, found {}", cols.len())));
        }
        Ok(())
    }
}

pub fn truth_from_csv(name: &str, text: &str) -> Result<Vec<GroundTruthPoint>> {
    let rows = split_rows(name, text)?;
    rows.expect_header(TRUTH_HEADER)?;
    rows.body
        .iter()
        .map(|(line, c)| {
            rows.width(*line, c, 4)?;
            Ok(GroundTruthPoint {
                timestamp: rows.num(*line, c[0])?,
                range: rows.num(*line, c[1])?,
                radial_velocity: rows.num(*line, c[2])?,
                in_range: rows.flag(*line, c[3])?,
            })
        })
        .collect()
}

pub fn tracks_from_csv(name: &str, text: &str) -> Result<Vec<TrackPoint>> {
    let rows = split_rows(name, text)?;
    rows.expect_header(TRACK_HEADER)?;
    rows.body
        .iter()
        .map(|(line, c)| {
            rows.width(*line, c, 5)?;
            Ok(TrackPoint {
                timestamp: rows.num(*line, c[0])?,
                range: rows.num(*line, c[1])?,
                radial_velocity: rows.num(*line, c[2])?,
                peak_magnitude: rows.num(*line, c[3])?,
                in_range: rows.flag(*line, c[4])?,
            })
        })
        .collect()
}

pub fn odometry_from_csv(name: &str, text: &str) -> Result<Vec<OdometrySample>> {
    let rows = split_rows(name, text)?;
    let with_range = match rows.header {
        ODOMETRY_HEADER => false,
        ODOMETRY_RANGE_HEADER => true,
        other => {
            return Err(rows.err(
                1,
                format!("expected `{ODOMETRY_HEADER}[,range_m]`, found `{other}`"),
            ))
        }
    };
    rows.body
        .iter()
        .map(|(line, c)| {
            rows.width(*line, c, if with_range { 3 } else { 2 })?;
            Ok(OdometrySample {
                timestamp: rows.num(*line, c[0])?,
                speed: rows.num(*line, c[1])?,
                range: if with_range {
                    Some(rows.num(*line, c[2])?)
                } else {
                    None
                },
            })
        })
        .collect()
}

/// Truth file kind, from its header line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruthFormat {
    GroundTruth,
    Odometry,
}

pub fn sniff_truth_format(text: &str) -> Option<TruthFormat> {
    let header = text.lines().next()?.trim();
    match header {
        TRUTH_HEADER => Some(TruthFormat::GroundTruth),
        ODOMETRY_HEADER | ODOMETRY_RANGE_HEADER => Some(TruthFormat::Odometry),
        _ => None,
    }
}

/// Linear magnitudes, one line per Doppler row. The header line carries the
/// range axis, the first column the velocity axis.
pub fn map_to_csv(map: &RangeDopplerMap) -> String {
    let mut s = String::from("velocity_mps\\range_m");
    for r in &map.axes.range_m {
        s.push(',');
        s.push_str(&fmt_sig(*r));
    }
    s.push('\n');
    for (v, row) in map.axes.velocity_mps.iter().zip(map.magnitude.rows()) {
        s.push_str(&fmt_sig(*v));
        for m in row {
            s.push(',');
            s.push_str(&fmt_sig(*m));
        }
        s.push('\n');
    }
    s
}

/// Binary P5 image of the dB map, `[floor_db, 0]` mapped linearly to `[0, 255]`.
/// Range runs left to right; the highest velocity row is at the top.
pub fn map_to_pgm(map: &RangeDopplerMap, floor_db: f64) -> Result<Vec<u8>> {
    let db = map.magnitude_db(floor_db)?;
    let (rows, cols) = db.dim();
    let mut out = format!("P5\n{cols} {rows}\n255\n").into_bytes();
    for row in db.rows().into_iter().rev() {
        out.extend(
            row.iter()
                .map(|&d| ((d - floor_db) / -floor_db * 255.0).round().clamp(0.0, 255.0) as u8),
        );
    }
    Ok(out)
}
