//! Binary frame log.
//!
//! Layout, all little-endian:
//!
//! ```text
//! "FMRD"              4 bytes
//! version             u16
//! f_low               f64
//! bandwidth           f64
//! sample_rate         f64
//! samples_per_chirp   u32
//! chirps_per_frame    u32
//! chirp_interval      f64
//! frame_rate          f64
//! zero_pad_size       u32
//! adc_mode            u8     0 = real, 1 = complex
//! frame count         u32
//! frames:
//!   timestamp         f64    seconds
//!   samples           f32    chirps × samples, row-major; complex is interleaved I, Q
//! ```
//!
//! Frame indices are not stored; they are the position in the file.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex32;

use crate::config::{AdcMode, RadarConfig};
use crate::error::{Error, Result};
use crate::scene::{RawFrame, Samples};

pub const MAGIC: &[u8; 4] = b"FMRD";
pub const VERSION: u16 = 1;
pub const HEADER_LEN: usize = 4 + 2 + 3 * 8 + 2 * 4 + 2 * 8 + 4 + 1 + 4;

fn frame_len(config: &RadarConfig) -> usize {
    let per_sample = match config.adc_mode {
        AdcMode::Real => 4,
        AdcMode::Complex => 8,
    };
    8 + config.chirps_per_frame * config.samples_per_chirp * per_sample
}

pub fn encode_frame_log<W: Write>(out: &mut W, config: &RadarConfig, frames: &[RawFrame]) -> Result<()> {
    config.ensure_valid()?;
    for f in frames {
        f.check_dims(config)?;
    }
    let count = u32::try_from(frames.len()).map_err(|_| Error::invalid("too many frames"))?;
    let to_u32 = |v: usize, name: &str| {
        u32::try_from(v).map_err(|_| Error::invalid(format!("{name} does not fit in u32")))
    };

    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&config.f_low.to_le_bytes())?;
    out.write_all(&config.bandwidth.to_le_bytes())?;
    out.write_all(&config.sample_rate.to_le_bytes())?;
    out.write_all(&to_u32(config.samples_per_chirp, "samples_per_chirp")?.to_le_bytes())?;
    out.write_all(&to_u32(config.chirps_per_frame, "chirps_per_frame")?.to_le_bytes())?;
    out.write_all(&config.chirp_interval.to_le_bytes())?;
    out.write_all(&config.frame_rate.to_le_bytes())?;
    out.write_all(&to_u32(config.zero_pad_size, "zero_pad_size")?.to_le_bytes())?;
    out.write_all(&[match config.adc_mode {
        AdcMode::Real => 0u8,
        AdcMode::Complex => 1u8,
    }])?;
    out.write_all(&count.to_le_bytes())?;

    for f in frames {
        out.write_all(&f.timestamp.to_le_bytes())?;
        match &f.samples {
            Samples::Real(a) => {
                for v in a.iter() {
                    out.write_all(&v.to_le_bytes())?;
                }
            }
            Samples::Complex(a) => {
                for v in a.iter() {
                    out.write_all(&v.re.to_le_bytes())?;
                    out.write_all(&v.im.to_le_bytes())?;
                }
            }
        }
    }
    Ok(())
}

pub fn write_frame_log(path: &Path, config: &RadarConfig, frames: &[RawFrame]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    encode_frame_log(&mut w, config, frames)?;
    w.flush()?;
    Ok(())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take<const N: usize>(&mut self, what: &str) -> Result<[u8; N]> {
        let end = self.pos + N;
        if end > self.buf.len() {
            return Err(Error::Format {
                offset: self.pos as u64,
                msg: format!(
                    "truncated reading {what}: need {N} bytes, {} left",
                    self.buf.len() - self.pos
                ),
            });
        }
        let mut b = [0u8; N];
        b.copy_from_slice(&self.buf[self.pos..end]);
        self.pos = end;
        Ok(b)
    }

    fn f64(&mut self, what: &str) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(what)?))
    }

    fn f32(&mut self, what: &str) -> Result<f32> {
        Ok(f32::from_le_bytes(self.take(what)?))
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(what)?))
    }
}

pub fn decode_frame_log(buf: &[u8]) -> Result<(RadarConfig, Vec<RawFrame>)> {
    let mut r = Reader { buf, pos: 0 };
    let magic: [u8; 4] = r.take("magic")?;
    if &magic != MAGIC {
        return Err(Error::Format {
            offset: 0,
            msg: format!("bad magic {magic:?}"),
        });
    }
    let version = u16::from_le_bytes(r.take("version")?);
    if version != VERSION {
        return Err(Error::Format {
            offset: 4,
            msg: format!("unsupported version {version}"),
        });
    }
    let config_at = r.pos as u64;
    let f_low = r.f64("f_low")?;
    let bandwidth = r.f64("bandwidth")?;
    let sample_rate = r.f64("sample_rate")?;
    let samples_per_chirp = r.u32("samples_per_chirp")? as usize;
    let chirps_per_frame = r.u32("chirps_per_frame")? as usize;
    let chirp_interval = r.f64("chirp_interval")?;
    let frame_rate = r.f64("frame_rate")?;
    let zero_pad_size = r.u32("zero_pad_size")? as usize;
    let mode_at = r.pos as u64;
    let adc_mode = match r.take::<1>("adc_mode")?[0] {
        0 => AdcMode::Real,
        1 => AdcMode::Complex,
        other => {
            return Err(Error::Format {
                offset: mode_at,
                msg: format!("unknown adc_mode {other}"),
            })
        }
    };
    let config = RadarConfig {
        f_low,
        bandwidth,
        sample_rate,
        samples_per_chirp,
        chirps_per_frame,
        chirp_interval,
        frame_rate,
        zero_pad_size,
        adc_mode,
    };
    let violations = config.validate();
    if !violations.is_empty() {
        return Err(Error::Format {
            offset: config_at,
            msg: format!(
                "stored config is invalid: {}",
                violations.iter().map(|v| v.0.clone()).collect::<Vec<_>>().join("; ")
            ),
        });
    }
    let count = r.u32("frame count")? as usize;

    let need = HEADER_LEN + count * frame_len(&config);
    if buf.len() > need {
        return Err(Error::Format {
            offset: need as u64,
            msg: format!("{} trailing bytes after {count} frames", buf.len() - need),
        });
    }

    let shape = (chirps_per_frame, samples_per_chirp);
    let mut frames = Vec::with_capacity(count.min(buf.len() / frame_len(&config).max(1)));
    for k in 0..count {
        let timestamp = r.f64("frame timestamp")?;
        let samples = match adc_mode {
            AdcMode::Real => {
                let mut v = Vec::with_capacity(shape.0 * shape.1);
                for _ in 0..shape.0 * shape.1 {
                    v.push(r.f32("sample")?);
                }
                Samples::Real(Array2::from_shape_vec(shape, v).expect("length matches shape"))
            }
            AdcMode::Complex => {
                let mut v = Vec::with_capacity(shape.0 * shape.1);
                for _ in 0..shape.0 * shape.1 {
                    let re = r.f32("sample")?;
                    let im = r.f32("sample")?;
                    v.push(Complex32::new(re, im));
                }
                Samples::Complex(Array2::from_shape_vec(shape, v).expect("length matches shape"))
            }
        };
        frames.push(RawFrame {
            samples,
            timestamp,
            frame_index: k as u32,
        });
    }
    Ok((config, frames))
}

pub fn read_frame_log(path: &Path) -> Result<(RadarConfig, Vec<RawFrame>)> {
    decode_frame_log(&fs::read(path)?)
}
