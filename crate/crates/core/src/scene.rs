//! Beat-signal synthesis for point scatterers seen from a radar moving along
//! its boresight.
//!
//! Coordinates are in the ego frame: `x` lateral, `y` along boresight. Static
//! world points (track boundaries, ground) pick up a radial velocity of
//! `-v_ego · cos θ`, which is what draws the curved clutter pattern in a
//! range-doppler map. Ranges are updated chirp to chirp only (stop-and-hop).

use std::f64::consts::PI;

use ndarray::Array2;
use num_complex::{Complex, Complex32, Complex64};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::config::{AdcMode, RadarConfig, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

/// Ranges below this are clamped in the amplitude law.
pub const MIN_AMPLITUDE_RANGE: f64 = 0.05;

/// Scatterers farther than this multiple of `max_range` are not synthesized.
pub const SYNTHESIS_RANGE_FACTOR: f64 = 1.5;

/// Piecewise-linear speed over time, held constant outside the knot span.
///
/// Serialized as a list of `[t_s, speed_mps]` pairs sorted by time.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SpeedProfile(pub Vec<(f64, f64)>);

impl SpeedProfile {
    pub fn constant(speed: f64) -> Self {
        SpeedProfile(vec![(0.0, speed)])
    }

    pub fn validate(&self, what: &str) -> Result<()> {
        for &(t, v) in &self.0 {
            if !t.is_finite() || !v.is_finite() {
                return Err(Error::invalid(format!("{what}: non-finite knot ({t}, {v})")));
            }
        }
        if self.0.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid(format!(
                "{what}: knot times must be strictly increasing"
            )));
        }
        Ok(())
    }

    pub fn speed_at(&self, t: f64) -> f64 {
        let knots = &self.0;
        match knots.len() {
            0 => 0.0,
            _ if t <= knots[0].0 => knots[0].1,
            _ if t >= knots[knots.len() - 1].0 => knots[knots.len() - 1].1,
            _ => {
                let i = knots.partition_point(|k| k.0 <= t);
                let (t0, v0) = knots[i - 1];
                let (t1, v1) = knots[i];
                v0 + (v1 - v0) * (t - t0) / (t1 - t0)
            }
        }
    }

    /// Distance travelled over `[0, t]`, exact for the piecewise-linear profile.
    pub fn displacement(&self, t: f64) -> f64 {
        let knots = &self.0;
        if knots.is_empty() {
            return 0.0;
        }
        // breakpoints inside (0, t) plus the ends; speed is linear between them
        let (lo, hi) = if t >= 0.0 { (0.0, t) } else { (t, 0.0) };
        let mut pts = vec![lo];
        pts.extend(knots.iter().map(|k| k.0).filter(|&k| k > lo && k < hi));
        pts.push(hi);
        let area: f64 = pts
            .windows(2)
            .map(|w| 0.5 * (self.speed_at(w[0]) + self.speed_at(w[1])) * (w[1] - w[0]))
            .sum();
        if t >= 0.0 {
            area
        } else {
            -area
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScattererKind {
    Target,
    Boundary,
    Ground,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scatterer {
    /// `[x, y]` in the ego frame at scene time 0, meters.
    pub position: [f64; 2],
    /// `[vx, vy]` in the world frame, m/s.
    #[serde(default)]
    pub velocity: [f64; 2],
    /// Reflectivity referenced to 1 m.
    pub amplitude: f64,
    pub kind: ScattererKind,
    /// Overrides `velocity[1]` with a time-varying boresight speed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed_profile: Option<SpeedProfile>,
}

impl Scatterer {
    pub fn fixed(x: f64, y: f64, amplitude: f64, kind: ScattererKind) -> Self {
        Scatterer {
            position: [x, y],
            velocity: [0.0, 0.0],
            amplitude,
            kind,
            speed_profile: None,
        }
    }

    pub fn target(x: f64, y: f64, vx: f64, vy: f64, amplitude: f64) -> Self {
        Scatterer {
            velocity: [vx, vy],
            ..Scatterer::fixed(x, y, amplitude, ScattererKind::Target)
        }
    }

    fn boresight_speed(&self, t: f64) -> f64 {
        match &self.speed_profile {
            Some(p) => p.speed_at(t),
            None => self.velocity[1],
        }
    }

    fn boresight_displacement(&self, t: f64) -> f64 {
        match &self.speed_profile {
            Some(p) => p.displacement(t),
            None => self.velocity[1] * t,
        }
    }

    /// Position and velocity relative to the radar at time `t`.
    pub fn relative_state(&self, ego: &SpeedProfile, t: f64) -> ([f64; 2], [f64; 2]) {
        let x = self.position[0] + self.velocity[0] * t;
        let y = self.position[1] + self.boresight_displacement(t) - ego.displacement(t);
        let v = [self.velocity[0], self.boresight_speed(t) - ego.speed_at(t)];
        ([x, y], v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialGeometry {
    pub range: f64,
    /// Line-of-sight velocity, positive when receding.
    pub radial_velocity: f64,
    /// Angle off boresight, radians.
    pub angle: f64,
}

pub fn radial_geometry(scatterer: &Scatterer, ego: &SpeedProfile, t: f64) -> RadialGeometry {
    let ([x, y], [vx, vy]) = scatterer.relative_state(ego, t);
    let range = x.hypot(y);
    let radial_velocity = if range > 0.0 {
        (x * vx + y * vy) / range
    } else {
        0.0
    };
    RadialGeometry {
        range,
        radial_velocity,
        angle: x.atan2(y),
    }
}

/// Echo amplitude at `range`: `amplitude / d²`, clamped near zero.
pub fn amplitude_at(amplitude: f64, range: f64) -> f64 {
    amplitude / range.max(MIN_AMPLITUDE_RANGE).powi(2)
}

/// One beat-signal sample for chirp `chirp` and fast-time index `sample`.
///
/// The range at chirp `m` is `range + radial_velocity · m · T_s`; the phase is
/// `2π S τ t_n + 2π f_low τ` with `τ = 2 d_m / c`. Real mode returns the cosine
/// in the real part and zero imaginary part.
pub fn beat_sample(
    config: &RadarConfig,
    range: f64,
    radial_velocity: f64,
    amplitude: f64,
    chirp: usize,
    sample: usize,
) -> Complex64 {
    let a = amplitude_at(amplitude, range);
    let d = range + radial_velocity * chirp as f64 * config.chirp_interval;
    let tau = 2.0 * d / SPEED_OF_LIGHT;
    let t = sample as f64 / config.sample_rate;
    let phase = 2.0 * PI * (config.chirp_slope() * tau * t + config.f_low * tau);
    match config.adc_mode {
        AdcMode::Real => Complex64::new(a * phase.cos(), 0.0),
        AdcMode::Complex => Complex64::from_polar(a, phase),
    }
}

/// Frame samples, chirps × samples_per_chirp.
#[derive(Debug, Clone, PartialEq)]
pub enum Samples {
    Real(Array2<f32>),
    Complex(Array2<Complex32>),
}

impl Samples {
    pub fn dim(&self) -> (usize, usize) {
        match self {
            Samples::Real(a) => a.dim(),
            Samples::Complex(a) => a.dim(),
        }
    }

    pub fn mode(&self) -> AdcMode {
        match self {
            Samples::Real(_) => AdcMode::Real,
            Samples::Complex(_) => AdcMode::Complex,
        }
    }

    pub fn to_complex64(&self) -> Array2<Complex64> {
        match self {
            Samples::Real(a) => a.mapv(|x| Complex64::new(x as f64, 0.0)),
            Samples::Complex(a) => a.mapv(|x| Complex64::new(x.re as f64, x.im as f64)),
        }
    }

    pub fn is_finite(&self) -> bool {
        match self {
            Samples::Real(a) => a.iter().all(|x| x.is_finite()),
            Samples::Complex(a) => a.iter().all(|x| x.re.is_finite() && x.im.is_finite()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawFrame {
    pub samples: Samples,
    /// Midpoint of the chirp burst, seconds.
    pub timestamp: f64,
    pub frame_index: u32,
}

impl RawFrame {
    pub fn check_dims(&self, config: &RadarConfig) -> Result<()> {
        let want = (config.chirps_per_frame, config.samples_per_chirp);
        if self.samples.dim() != want {
            return Err(Error::invalid(format!(
                "frame {} is {:?}, config expects {:?}",
                self.frame_index,
                self.samples.dim(),
                want
            )));
        }
        if self.samples.mode() != config.adc_mode {
            return Err(Error::invalid(format!(
                "frame {} sample type does not match adc_mode {:?}",
                self.frame_index, config.adc_mode
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryWalls {
    /// Lateral position of each wall, meters.
    pub lateral_offsets: [f64; 2],
    /// Scatterer spacing along each wall, meters.
    pub spacing: f64,
    /// Wall length ahead of the radar at scene time 0, meters.
    pub extent: f64,
    #[serde(default = "default_wall_amplitude")]
    pub amplitude: f64,
}

fn default_wall_amplitude() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroundClutter {
    pub count: usize,
    pub max_range: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub duration: f64,
    #[serde(default)]
    pub ego_speed: SpeedProfile,
    #[serde(default)]
    pub targets: Vec<Scatterer>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_walls: Option<BoundaryWalls>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ground_clutter: Option<GroundClutter>,
    #[serde(default)]
    pub noise_std: f64,
    #[serde(default)]
    pub rng_seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::invalid("scenario duration must be > 0"));
        }
        if !(self.noise_std.is_finite() && self.noise_std >= 0.0) {
            return Err(Error::invalid("noise_std must be ≥ 0"));
        }
        self.ego_speed.validate("ego_speed")?;
        for (i, s) in self.targets.iter().enumerate() {
            if !(s.amplitude >= 0.0) {
                return Err(Error::invalid(format!("target {i}: amplitude must be ≥ 0")));
            }
            if s.position.iter().chain(&s.velocity).any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("target {i}: non-finite kinematics")));
            }
            if let Some(p) = &s.speed_profile {
                p.validate(&format!("target {i} speed_profile"))?;
            }
        }
        if let Some(w) = &self.boundary_walls {
            if !(w.spacing > 0.0) {
                return Err(Error::invalid("wall spacing must be > 0"));
            }
            if !(w.extent >= 0.0) || !(w.amplitude >= 0.0) {
                return Err(Error::invalid("wall extent and amplitude must be ≥ 0"));
            }
        }
        if let Some(g) = &self.ground_clutter {
            if !(g.max_range > 0.0) || !(g.amplitude >= 0.0) {
                return Err(Error::invalid(
                    "ground clutter max_range must be > 0 and amplitude ≥ 0",
                ));
            }
        }
        Ok(())
    }
}

/// Static clutter for a scenario: scatterers along both walls from `y = 0`
/// to `extent`, then `ground_clutter.count` ground points drawn uniformly in
/// range (up to its `max_range`) and in azimuth within ±60°.
pub fn build_track_clutter<R: Rng>(scenario: &Scenario, rng: &mut R) -> Vec<Scatterer> {
    let mut out = Vec::new();
    if let Some(w) = &scenario.boundary_walls {
        let per_wall = (w.extent / w.spacing + 1e-9).floor() as usize + 1;
        for &x in &w.lateral_offsets {
            for i in 0..per_wall {
                out.push(Scatterer::fixed(
                    x,
                    i as f64 * w.spacing,
                    w.amplitude,
                    ScattererKind::Boundary,
                ));
            }
        }
    }
    if let Some(g) = &scenario.ground_clutter {
        for _ in 0..g.count {
            let r = g.max_range * (1.0 - rng.random::<f64>());
            let az = (rng.random::<f64>() * 2.0 - 1.0) * PI / 3.0;
            out.push(Scatterer::fixed(
                r * az.sin(),
                r * az.cos(),
                g.amplitude,
                ScattererKind::Ground,
            ));
        }
    }
    out
}

/// Every scatterer of a scenario with clutter resolved, plus its ego motion and noise.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub scatterers: Vec<Scatterer>,
    pub ego_speed: SpeedProfile,
    pub noise_std: f64,
}

impl Scene {
    pub fn new(scatterers: Vec<Scatterer>, ego_speed: SpeedProfile, noise_std: f64) -> Self {
        Scene {
            scatterers,
            ego_speed,
            noise_std,
        }
    }

    /// Targets first, then clutter drawn from `rng`.
    pub fn from_scenario<R: Rng>(scenario: &Scenario, rng: &mut R) -> Self {
        let mut scatterers = scenario.targets.clone();
        scatterers.extend(build_track_clutter(scenario, rng));
        Scene::new(scatterers, scenario.ego_speed.clone(), scenario.noise_std)
    }

    /// Largest echo amplitude among scatterers that contribute at time `t`.
    pub fn peak_amplitude(&self, config: &RadarConfig, t: f64) -> f64 {
        let limit = SYNTHESIS_RANGE_FACTOR * config.max_range();
        self.scatterers
            .iter()
            .filter_map(|s| {
                let ([_, y], _) = s.relative_state(&self.ego_speed, t);
                let g = radial_geometry(s, &self.ego_speed, t);
                (y > 0.0 && g.range <= limit).then(|| amplitude_at(s.amplitude, g.range))
            })
            .fold(0.0, f64::max)
    }

    /// Per-sample SNR in dB of the strongest scatterer at time `t`.
    pub fn snr_db(&self, config: &RadarConfig, t: f64) -> f64 {
        20.0 * (self.peak_amplitude(config, t) / self.noise_std).log10()
    }
}

/// Noise standard deviation that puts a sample amplitude `peak` at `snr_db`.
pub fn noise_std_for_snr(peak: f64, snr_db: f64) -> f64 {
    peak / 10f64.powf(snr_db / 20.0)
}

/// Synthesizes the frame whose chirp burst is centred on time `t`.
pub fn synthesize_frame<R: Rng>(
    config: &RadarConfig,
    scene: &Scene,
    t: f64,
    frame_index: u32,
    rng: &mut R,
) -> RawFrame {
    let (nc, ns) = (config.chirps_per_frame, config.samples_per_chirp);
    let mut acc = Array2::<Complex64>::zeros((nc, ns));
    let limit = SYNTHESIS_RANGE_FACTOR * config.max_range();
    let half_burst = 0.5 * (nc as f64 - 1.0) * config.chirp_interval;

    for s in &scene.scatterers {
        if s.amplitude == 0.0 {
            continue;
        }
        let ([_, y], _) = s.relative_state(&scene.ego_speed, t);
        let g = radial_geometry(s, &scene.ego_speed, t);
        if y <= 0.0 || g.range > limit {
            continue;
        }
        // chirp 0 sits half a burst before the frame timestamp
        let first = g.range - g.radial_velocity * half_burst;
        for ((m, n), v) in acc.indexed_iter_mut() {
            *v += beat_sample(config, first, g.radial_velocity, s.amplitude, m, n);
        }
    }

    if scene.noise_std > 0.0 {
        let normal = Normal::new(0.0, scene.noise_std).expect("noise_std validated finite");
        for v in acc.iter_mut() {
            v.re += normal.sample(rng);
            if config.adc_mode == AdcMode::Complex {
                v.im += normal.sample(rng);
            }
        }
    }

    let samples = match config.adc_mode {
        AdcMode::Real => Samples::Real(acc.mapv(|v| v.re as f32)),
        AdcMode::Complex => Samples::Complex(acc.mapv(|v| Complex::new(v.re as f32, v.im as f32))),
    };
    RawFrame {
        samples,
        timestamp: t,
        frame_index,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthPoint {
    pub timestamp: f64,
    pub range: f64,
    /// Positive when receding.
    pub radial_velocity: f64,
    pub in_range: bool,
}

pub fn ground_truth(config: &RadarConfig, scene: &Scene, target: usize, t: f64) -> GroundTruthPoint {
    let g = radial_geometry(&scene.scatterers[target], &scene.ego_speed, t);
    GroundTruthPoint {
        timestamp: t,
        range: g.range,
        radial_velocity: g.radial_velocity,
        in_range: g.range <= config.max_range(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedRun {
    pub frames: Vec<RawFrame>,
    /// Truth for the first target; empty when the scenario has none.
    pub truth: Vec<GroundTruthPoint>,
}

/// Frames at `1 / frame_rate` spacing from `t = 0` covering `scenario.duration`.
///
/// One RNG stream seeded from `scenario.rng_seed` drives clutter placement and
/// then per-frame noise, so a seed fixes the whole run.
pub fn simulate_run(config: &RadarConfig, scenario: &Scenario) -> Result<SimulatedRun> {
    config.ensure_valid()?;
    scenario.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(scenario.rng_seed);
    let scene = Scene::from_scenario(scenario, &mut rng);

    let count = (scenario.duration * config.frame_rate + 1e-9).floor() as usize;
    let mut frames = Vec::with_capacity(count);
    let mut truth = Vec::with_capacity(count);
    for k in 0..count {
        let t = k as f64 / config.frame_rate;
        frames.push(synthesize_frame(config, &scene, t, k as u32, &mut rng));
        if !scenario.targets.is_empty() {
            truth.push(ground_truth(config, &scene, 0, t));
        }
    }
    Ok(SimulatedRun { frames, truth })
}
