//! Seeded synthetic IMU gait generator.
//!
//! Each raw channel (four sensors by three axes) is a sum of harmonics of
//! the stride frequency plus a per-channel offset and Gaussian noise:
//!
//! ```text
//! x_c(t) = o_c + sum_h A_ch * g_c * d_c * sin(h * theta(t) + phi_ch) + e_c(t)
//! theta(t) = 2 pi f0 t + psi(t)
//! ```
//!
//! `f0` is half the step rate, `steps/s = 0.82 * speed_mph / L * k` with the
//! step-length scale `L` (short 0.8, normal 1.0, long 1.2, longer 1.35) and
//! the subject's cadence scale `k`. The factor gain is
//! `g_c = exp(0.5 * sum_f s_fc * code_f)` where speed is coded
//! `(speed - 2.2) / 0.8` and ordinal levels `(rank - 2) / 2`. `d_c` is a
//! per-recording drift of up to 3%, `psi` a slow random-walk phase, and the
//! noise std is the profile's noise level times the sensor's scale.
//!
//! Subject amplitudes, phases and offsets are deviations from a shared
//! population template. Every recording also gets a small random rotation
//! of each sensor's axes (phone placement), a cadence change of up to 3% and
//! an AR(1) stride-to-stride amplitude fluctuation.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dictattack::{
    EntryFiles, EntryKey, Factor, FactorSetting, Manifest, ManifestEntry, StepLength, StepWidth, ThighLift,
};
use crate::ingest::{sensor_file_name, write_recording};
use crate::seed;
use crate::signal::{ImuRecording, Sensor, SignalChannel};
use crate::{Error, Result};

pub const HARMONICS: usize = 4;
pub const RAW_CHANNELS: usize = 12;
pub const NATURAL_SPEEDS: [f64; 4] = [2.0, 2.2, 2.4, 2.6];
pub const AMPLITUDE_GAIN: f64 = 0.5;
pub const SESSION_DRIFT: f64 = 0.03;
pub const CLONE_PERTURBATION: f64 = 0.05;
pub const DEFAULT_NOISE_LEVEL: f64 = 0.25;
pub const DEFAULT_PHASE_JITTER: f64 = 0.15;
pub const DEFAULT_STRIDE_VARIABILITY: f64 = 0.1;
const POPULATION_SEED: u64 = 0x6a17;
const AMPLITUDE_SPREAD: f64 = 0.12;
const PHASE_SPREAD: f64 = 0.2;
const OFFSET_SPREAD: f64 = 0.1;
/// Time constant of the stride-to-stride amplitude fluctuation, seconds.
const STRIDE_TIME_CONSTANT: f64 = 1.0;
/// Std of the per-recording phone rotation angle, radians.
pub const PLACEMENT_ANGLE_STD: f64 = 0.15;
/// Per-recording relative cadence change, drawn uniformly in `[-c, c]`.
pub const CADENCE_WOBBLE: f64 = 0.03;

/// Oscillation scale of each sensor in its own units.
pub fn sensor_scale(sensor: Sensor) -> f64 {
    match sensor {
        Sensor::La => 1.5,
        Sensor::Gy => 0.8,
        Sensor::Ma => 5.0,
        Sensor::Rv => 0.05,
    }
}

fn channel_sensor(c: usize) -> Sensor {
    Sensor::ALL[c / 3]
}

pub fn step_length_scale(level: StepLength) -> f64 {
    match level {
        StepLength::Short => 0.8,
        StepLength::Normal => 1.0,
        StepLength::Long => 1.2,
        StepLength::Longer => 1.35,
    }
}

/// Signed level code of a factor: speed `(s - 2.2) / 0.8`, ordinal levels
/// `(rank - 2) / 2`.
pub fn factor_code(factor: Factor, setting: &FactorSetting) -> f64 {
    match factor {
        Factor::Speed => (setting.speed_mph - 2.2) / 0.8,
        other => (other.level(setting) - 2.0) / 2.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubjectProfile {
    pub subject_id: String,
    /// Per raw channel (sensor-major, then x, y, z), per harmonic.
    pub amplitudes: Vec<[f64; HARMONICS]>,
    pub phases: Vec<[f64; HARMONICS]>,
    pub offsets: Vec<f64>,
    pub cadence_scale: f64,
    /// Per factor (in [`Factor::ALL`] order), per raw channel; `|s|` in
    /// `[0.2, 1]`.
    pub sensitivities: Vec<Vec<f64>>,
    pub natural_speed_mph: f64,
    /// Noise std as a fraction of each sensor's scale.
    pub noise_level: f64,
    /// Random-walk phase std in radians per square-root second.
    pub phase_jitter: f64,
    /// Stationary std of the slow multiplicative amplitude fluctuation.
    pub stride_variability: f64,
}

impl SubjectProfile {
    pub fn sensitivity(&self, factor: Factor, sensor: Sensor, axis: usize) -> f64 {
        self.sensitivities[factor as usize][sensor.index() * 3 + axis]
    }

    pub fn natural_setting(&self) -> FactorSetting {
        FactorSetting::natural(self.natural_speed_mph)
    }

    /// Steps per second at a setting.
    pub fn step_rate(&self, setting: &FactorSetting) -> f64 {
        0.82 * setting.speed_mph / step_length_scale(setting.step_length) * self.cadence_scale
    }

    /// Multiplicative amplitude gain of one raw channel at a setting.
    pub fn gain(&self, channel: usize, setting: &FactorSetting) -> f64 {
        let z: f64 = Factor::ALL
            .iter()
            .map(|f| self.sensitivities[*f as usize][channel] * factor_code(*f, setting))
            .sum();
        (AMPLITUDE_GAIN * z).exp()
    }
}

/// Amplitudes, phases and offsets shared by the whole population; each
/// profile deviates from this template.
fn population_template() -> (Vec<[f64; HARMONICS]>, Vec<[f64; HARMONICS]>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(POPULATION_SEED);
    let mut amplitudes = Vec::with_capacity(RAW_CHANNELS);
    let mut phases = Vec::with_capacity(RAW_CHANNELS);
    let mut offsets = Vec::with_capacity(RAW_CHANNELS);
    for c in 0..RAW_CHANNELS {
        let scale = sensor_scale(channel_sensor(c));
        let mut a = [0.0; HARMONICS];
        let mut p = [0.0; HARMONICS];
        for h in 0..HARMONICS {
            a[h] = scale * rng.random_range(0.5..1.2) * 0.6f64.powi(h as i32);
            p[h] = rng.random_range(0.0..2.0 * PI);
        }
        amplitudes.push(a);
        phases.push(p);
        offsets.push(scale * rng.random_range(-1.0..1.0));
    }
    (amplitudes, phases, offsets)
}

pub fn make_subject_profile(subject_id: &str, seed: u64) -> SubjectProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("valid std");
    let (mut amplitudes, mut phases, mut offsets) = population_template();
    for c in 0..RAW_CHANNELS {
        let scale = sensor_scale(channel_sensor(c));
        for h in 0..HARMONICS {
            amplitudes[c][h] *= (AMPLITUDE_SPREAD * std_normal.sample(&mut rng)).exp();
            phases[c][h] += PHASE_SPREAD * std_normal.sample(&mut rng);
        }
        offsets[c] += OFFSET_SPREAD * scale * std_normal.sample(&mut rng);
    }
    let sensitivities = (0..Factor::ALL.len())
        .map(|_| {
            (0..RAW_CHANNELS)
                .map(|_| {
                    let m = rng.random_range(0.2..=1.0);
                    if rng.random::<bool>() {
                        m
                    } else {
                        -m
                    }
                })
                .collect()
        })
        .collect();
    SubjectProfile {
        subject_id: subject_id.to_string(),
        amplitudes,
        phases,
        offsets,
        cadence_scale: rng.random_range(0.9..1.1),
        sensitivities,
        natural_speed_mph: NATURAL_SPEEDS[rng.random_range(0..NATURAL_SPEEDS.len())],
        noise_level: DEFAULT_NOISE_LEVEL,
        phase_jitter: DEFAULT_PHASE_JITTER,
        stride_variability: DEFAULT_STRIDE_VARIABILITY,
    }
}

/// A copy of `target` under a new id with every amplitude scaled by an
/// independent `1 + N(0, 0.05)` factor.
pub fn make_clone(target: &SubjectProfile, subject_id: &str, seed: u64) -> SubjectProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, CLONE_PERTURBATION).expect("valid std");
    let mut p = target.clone();
    p.subject_id = subject_id.to_string();
    for a in p.amplitudes.iter_mut().flatten() {
        *a *= 1.0 + normal.sample(&mut rng);
    }
    p
}

/// Rotation by a normally distributed angle about a uniformly random axis
/// (Rodrigues' formula).
fn random_rotation(rng: &mut ChaCha8Rng, angle_std: f64) -> [[f64; 3]; 3] {
    let std_normal = Normal::new(0.0, 1.0).expect("valid std");
    let mut axis = [0.0; 3];
    for a in &mut axis {
        *a = std_normal.sample(rng);
    }
    let norm = axis.iter().map(|a| a * a).sum::<f64>().sqrt().max(1e-12);
    let [kx, ky, kz] = axis.map(|a| a / norm);
    let angle = angle_std * std_normal.sample(rng);
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [c + kx * kx * t, kx * ky * t - kz * s, kx * kz * t + ky * s],
        [ky * kx * t + kz * s, c + ky * ky * t, ky * kz * t - kx * s],
        [kz * kx * t - ky * s, kz * ky * t + kx * s, c + kz * kz * t],
    ]
}

/// One recording of `profile` walking at `setting`.
pub fn generate_recording(
    profile: &SubjectProfile,
    setting: &FactorSetting,
    session: &str,
    duration: f64,
    rate: f64,
    seed: u64,
) -> Result<ImuRecording> {
    if !(duration.is_finite() && duration > 0.0 && rate.is_finite() && rate > 0.0) {
        return Err(Error::invalid(format!(
            "duration ({duration}) and rate ({rate}) must be positive"
        )));
    }
    setting.validate()?;
    let n = (duration * rate).round() as usize;
    if n < 2 {
        return Err(Error::invalid("recording would hold fewer than 2 samples"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dt = 1.0 / rate;
    let drift: Vec<f64> = (0..RAW_CHANNELS)
        .map(|_| 1.0 + rng.random_range(-SESSION_DRIFT..=SESSION_DRIFT))
        .collect();
    let f0 = profile.step_rate(setting) / 2.0 * (1.0 + rng.random_range(-CADENCE_WOBBLE..=CADENCE_WOBBLE));
    let rotation = random_rotation(&mut rng, PLACEMENT_ANGLE_STD);
    let mut theta = Vec::with_capacity(n);
    let mut psi = 0.0;
    let step = Normal::new(0.0, profile.phase_jitter * dt.sqrt()).map_err(|e| Error::invalid(e.to_string()))?;
    for i in 0..n {
        theta.push(2.0 * PI * f0 * i as f64 * dt + psi);
        psi += step.sample(&mut rng);
    }

    let std_normal = Normal::new(0.0, 1.0).expect("valid std");
    let mut by_sensor: BTreeMap<Sensor, [SignalChannel; 3]> = BTreeMap::new();
    for (si, sensor) in Sensor::ALL.into_iter().enumerate() {
        let noise = Normal::new(0.0, profile.noise_level * sensor_scale(sensor))
            .map_err(|e| Error::invalid(e.to_string()))?;
        let mut axes = Vec::with_capacity(3);
        for axis in 0..3 {
            let c = si * 3 + axis;
            let scale = profile.gain(c, setting) * drift[c];
            let amp: Vec<f64> = profile.amplitudes[c].iter().map(|a| a * scale).collect();
            // AR(1) fluctuation with the requested stationary std
            let rho = (-dt / STRIDE_TIME_CONSTANT).exp();
            let innovation = profile.stride_variability * (1.0 - rho * rho).sqrt();
            let mut wobble = profile.stride_variability * std_normal.sample(&mut rng);
            let samples: Vec<f64> = theta
                .iter()
                .map(|&th| {
                    let mut v = 0.0;
                    for h in 0..HARMONICS {
                        v += amp[h] * ((h + 1) as f64 * th + profile.phases[c][h]).sin();
                    }
                    let out = profile.offsets[c] + (1.0 + wobble) * v + noise.sample(&mut rng);
                    wobble = rho * wobble + innovation * std_normal.sample(&mut rng);
                    out
                })
                .collect();
            axes.push(samples);
        }
        let raw: [Vec<f64>; 3] = axes.try_into().expect("three axes");
        let mut rotated = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
        for i in 0..n {
            for (r, out) in rotation.iter().zip(rotated.iter_mut()) {
                out.push(r[0] * raw[0][i] + r[1] * raw[1][i] + r[2] * raw[2][i]);
            }
        }
        let [x, y, z] = rotated;
        by_sensor.insert(
            sensor,
            [SignalChannel::new(x, rate)?, SignalChannel::new(y, rate)?, SignalChannel::new(z, rate)?],
        );
    }
    ImuRecording::from_axes(profile.subject_id.clone(), session.to_string(), by_sensor)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SettingGrid {
    /// 16 one-factor-at-a-time settings per imitator.
    Desk,
    /// 21/20/16 settings per imitator as in the recorded dictionary.
    FullScale,
}

/// The 16 desk-scale settings: seven speeds at normal levels, then three
/// off-normal levels of each ordinal factor at 2.2 mph.
pub fn desk_settings() -> Vec<FactorSetting> {
    let mut out: Vec<FactorSetting> = [1.4, 1.8, 2.0, 2.2, 2.4, 2.6, 3.0]
        .into_iter()
        .map(FactorSetting::natural)
        .collect();
    let base = FactorSetting::natural(2.2);
    for sl in [StepLength::Short, StepLength::Long, StepLength::Longer] {
        out.push(FactorSetting { step_length: sl, ..base });
    }
    for sw in [StepWidth::Close, StepWidth::Wide, StepWidth::Wider] {
        out.push(FactorSetting { step_width: sw, ..base });
    }
    for tl in [ThighLift::Back, ThighLift::Front, ThighLift::Up] {
        out.push(FactorSetting { thigh_lift: tl, ..base });
    }
    out
}

/// The 21-setting grid: all nine speeds, the nine off-normal ordinal
/// levels at 2.2 mph, and three off-normal levels at 2.6 mph.
pub fn full_settings() -> Vec<FactorSetting> {
    let mut out: Vec<FactorSetting> = crate::dictattack::speed_grid()
        .into_iter()
        .map(FactorSetting::natural)
        .collect();
    for speed in [2.2, 2.6] {
        let base = FactorSetting::natural(speed);
        let sl: &[StepLength] = if speed == 2.2 { &[StepLength::Short, StepLength::Long, StepLength::Longer] } else { &[StepLength::Long] };
        let sw: &[StepWidth] = if speed == 2.2 { &[StepWidth::Close, StepWidth::Wide, StepWidth::Wider] } else { &[StepWidth::Wide] };
        let tl: &[ThighLift] = if speed == 2.2 { &[ThighLift::Back, ThighLift::Front, ThighLift::Up] } else { &[ThighLift::Front] };
        out.extend(sl.iter().map(|&v| FactorSetting { step_length: v, ..base }));
        out.extend(sw.iter().map(|&v| FactorSetting { step_width: v, ..base }));
        out.extend(tl.iter().map(|&v| FactorSetting { thigh_lift: v, ..base }));
    }
    out
}

/// Settings walked by imitator `index` under a grid.
pub fn imitator_settings(grid: SettingGrid, index: usize) -> Vec<FactorSetting> {
    match grid {
        SettingGrid::Desk => desk_settings(),
        SettingGrid::FullScale => match index {
            0..=5 => full_settings(),
            6 => full_settings().into_iter().take(20).collect(),
            _ => desk_settings(),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub subjects: usize,
    pub sessions: usize,
    pub session_secs: f64,
    pub imitators: usize,
    pub entry_secs: f64,
    pub grid: SettingGrid,
    pub rate: f64,
    pub seed: u64,
    /// Plant one near-clone imitator for every three genuine subjects.
    pub clones: bool,
    pub noise_level: f64,
    pub phase_jitter: f64,
    pub stride_variability: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            subjects: 10,
            sessions: 2,
            session_secs: 93.0,
            imitators: 5,
            entry_secs: 77.0,
            grid: SettingGrid::Desk,
            rate: 50.0,
            seed: 0,
            clones: true,
            noise_level: DEFAULT_NOISE_LEVEL,
            phase_jitter: DEFAULT_PHASE_JITTER,
            stride_variability: DEFAULT_STRIDE_VARIABILITY,
        }
    }
}

impl SynthConfig {
    /// 55 subjects and nine imitators walking 178 settings.
    pub fn full_scale() -> Self {
        Self {
            subjects: 55,
            imitators: 9,
            grid: SettingGrid::FullScale,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.subjects < 1 || self.sessions < 1 {
            return Err(Error::invalid("synth needs at least one subject and one session"));
        }
        for (name, v) in [("session_secs", self.session_secs), ("entry_secs", self.entry_secs), ("rate", self.rate)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(format!("{name} must be positive, got {v}")));
            }
        }
        if [self.noise_level, self.phase_jitter, self.stride_variability]
            .iter()
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(Error::invalid("noise_level, phase_jitter and stride_variability must be non-negative"));
        }
        Ok(())
    }
}

pub fn subject_id(i: usize) -> String {
    format!("user{:02}", i + 1)
}

pub fn imitator_id(i: usize) -> String {
    format!("imit{:02}", i + 1)
}

fn with_noise(mut p: SubjectProfile, config: &SynthConfig) -> SubjectProfile {
    p.noise_level = config.noise_level;
    p.phase_jitter = config.phase_jitter;
    p.stride_variability = config.stride_variability;
    p
}

pub fn subject_profiles(config: &SynthConfig) -> Vec<SubjectProfile> {
    (0..config.subjects)
        .map(|i| {
            let id = subject_id(i);
            with_noise(make_subject_profile(&id, seed::derive(config.seed, &["profile", &id])), config)
        })
        .collect()
}

/// Imitator profiles with the subject each one clones, if any. Imitator `i`
/// clones subject `3 i` while `i < subjects / 3`.
pub fn imitator_profiles(config: &SynthConfig) -> Vec<(SubjectProfile, Option<String>)> {
    let subjects = subject_profiles(config);
    let n_clones = if config.clones { config.subjects / 3 } else { 0 };
    (0..config.imitators)
        .map(|i| {
            let id = imitator_id(i);
            if i < n_clones {
                let target = &subjects[3 * i];
                (
                    make_clone(target, &id, seed::derive(config.seed, &["clone", &id])),
                    Some(target.subject_id.clone()),
                )
            } else {
                (
                    with_noise(make_subject_profile(&id, seed::derive(config.seed, &["profile", &id])), config),
                    None,
                )
            }
        })
        .collect()
}

pub fn session_name(k: usize) -> String {
    (k + 1).to_string()
}

/// Directory slug of a setting, e.g. `2.2mph_normal_normal_normal`.
pub fn setting_slug(s: &FactorSetting) -> String {
    format!("{:.1}mph_{}_{}_{}", s.speed_mph, s.step_length, s.step_width, s.thigh_lift)
}

pub fn genuine_recording(config: &SynthConfig, profile: &SubjectProfile, session: usize) -> Result<ImuRecording> {
    let name = session_name(session);
    generate_recording(
        profile,
        &profile.natural_setting(),
        &name,
        config.session_secs,
        config.rate,
        seed::derive(config.seed, &["genuine", &profile.subject_id, &name]),
    )
}

pub fn entry_recording(config: &SynthConfig, profile: &SubjectProfile, setting: &FactorSetting) -> Result<ImuRecording> {
    let key = EntryKey {
        imitator_id: profile.subject_id.clone(),
        setting: *setting,
    }
    .to_string();
    generate_recording(
        profile,
        setting,
        &key,
        config.entry_secs,
        config.rate,
        seed::derive(config.seed, &["entry", &key]),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSession {
    pub session: String,
    pub dir: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSubject {
    pub subject_id: String,
    pub natural_speed_mph: f64,
    pub sessions: Vec<CorpusSession>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusImitator {
    pub imitator_id: String,
    pub clone_of: Option<String>,
    pub entries: usize,
}

/// Index of a generated corpus; paths are relative to the corpus root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub config: SynthConfig,
    pub rate: f64,
    pub subjects: Vec<CorpusSubject>,
    pub imitators: Vec<CorpusImitator>,
    pub dictionary_manifest: String,
    pub profiles: String,
}

pub const CORPUS_FILE: &str = "corpus.json";
pub const PROFILES_FILE: &str = "profiles.json";
pub const GENUINE_DIR: &str = "genuine";
pub const DICTIONARY_DIR: &str = "dictionary";
pub const DICTIONARY_MANIFEST: &str = "dictionary/manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSet {
    pub subjects: Vec<SubjectProfile>,
    pub imitators: Vec<SubjectProfile>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let json = serde_json::to_string_pretty(value).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    crate::render::write_text(path, &(json + "\n"))
}

/// Writes genuine sessions, dictionary entries, the dictionary manifest,
/// the profiles and `corpus.json` under `root`. Returns the written files
/// relative to `root`, sorted.
pub fn generate_corpus(config: &SynthConfig, root: &Path) -> Result<(CorpusManifest, Vec<PathBuf>)> {
    config.validate()?;
    let subjects = subject_profiles(config);
    let imitators = imitator_profiles(config);

    let mut jobs: Vec<(&SubjectProfile, Option<FactorSetting>, usize, PathBuf)> = Vec::new();
    let mut corpus_subjects = Vec::new();
    for p in &subjects {
        let mut sessions = Vec::new();
        for k in 0..config.sessions {
            let dir = PathBuf::from(GENUINE_DIR).join(&p.subject_id).join(format!("session{}", session_name(k)));
            sessions.push(CorpusSession {
                session: session_name(k),
                dir: dir.to_string_lossy().into_owned(),
            });
            jobs.push((p, None, k, dir));
        }
        corpus_subjects.push(CorpusSubject {
            subject_id: p.subject_id.clone(),
            natural_speed_mph: p.natural_speed_mph,
            sessions,
        });
    }
    let mut manifest = Manifest::default();
    let mut corpus_imitators = Vec::new();
    for (i, (p, clone_of)) in imitators.iter().enumerate() {
        let settings = imitator_settings(config.grid, i);
        for s in &settings {
            let rel = PathBuf::from(&p.subject_id).join(setting_slug(s));
            let file = |sensor| rel.join(sensor_file_name(sensor)).to_string_lossy().into_owned();
            manifest.entries.push(ManifestEntry {
                imitator_id: p.subject_id.clone(),
                speed_mph: s.speed_mph,
                step_length: s.step_length,
                step_width: s.step_width,
                thigh_lift: s.thigh_lift,
                files: EntryFiles {
                    la: file(Sensor::La),
                    gy: file(Sensor::Gy),
                    ma: file(Sensor::Ma),
                    rv: file(Sensor::Rv),
                },
            });
            jobs.push((p, Some(*s), 0, PathBuf::from(DICTIONARY_DIR).join(rel)));
        }
        corpus_imitators.push(CorpusImitator {
            imitator_id: p.subject_id.clone(),
            clone_of: clone_of.clone(),
            entries: settings.len(),
        });
    }

    jobs.par_iter()
        .map(|(p, setting, k, dir)| {
            let rec = match setting {
                None => genuine_recording(config, p, *k)?,
                Some(s) => entry_recording(config, p, s)?,
            };
            write_recording(&root.join(dir), &rec)
        })
        .collect::<Result<Vec<()>>>()?;

    crate::render::write_text(&root.join(DICTIONARY_MANIFEST), &manifest.to_json())?;
    write_json(
        &root.join(PROFILES_FILE),
        &ProfileSet {
            subjects: subjects.clone(),
            imitators: imitators.iter().map(|(p, _)| p.clone()).collect(),
        },
    )?;
    let corpus = CorpusManifest {
        config: config.clone(),
        rate: config.rate,
        subjects: corpus_subjects,
        imitators: corpus_imitators,
        dictionary_manifest: DICTIONARY_MANIFEST.to_string(),
        profiles: PROFILES_FILE.to_string(),
    };
    write_json(&root.join(CORPUS_FILE), &corpus)?;

    let mut files: Vec<PathBuf> = jobs
        .iter()
        .flat_map(|(_, _, _, dir)| Sensor::ALL.map(|s| dir.join(sensor_file_name(s))))
        .collect();
    files.extend([
        PathBuf::from(DICTIONARY_MANIFEST),
        PathBuf::from(PROFILES_FILE),
        PathBuf::from(CORPUS_FILE),
    ]);
    files.sort();
    Ok((corpus, files))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profiles_are_seeded() {
        assert_eq!(make_subject_profile("a", 1), make_subject_profile("a", 1));
        assert_ne!(make_subject_profile("a", 1).amplitudes, make_subject_profile("a", 2).amplitudes);
    }

    #[test]
    fn sensitivity_signs_are_balanced() {
        let (mut pos, mut total) = (0, 0);
        for s in 0..100 {
            let p = make_subject_profile("x", s);
            for v in p.sensitivities.iter().flatten() {
                assert!((0.2..=1.0).contains(&v.abs()));
                pos += usize::from(*v > 0.0);
                total += 1;
            }
        }
        let frac = pos as f64 / total as f64;
        assert!((0.4..=0.6).contains(&frac), "{frac}");
    }

    #[test]
    fn grids_have_expected_sizes() {
        assert_eq!(desk_settings().len(), 16);
        assert_eq!(full_settings().len(), 21);
        let total: usize = (0..9).map(|i| imitator_settings(SettingGrid::FullScale, i).len()).sum();
        assert_eq!(total, 21 * 6 + 20 + 16 * 2);
        for grid in [desk_settings(), full_settings()] {
            let keys: std::collections::BTreeSet<String> = grid.iter().map(setting_slug).collect();
            assert_eq!(keys.len(), grid.len());
            assert!(grid.iter().all(FactorSetting::is_grid_conformant));
        }
    }

    #[test]
    fn cadence_scales_with_speed() {
        let p = make_subject_profile("a", 3);
        let slow = FactorSetting::natural(1.4);
        let fast = FactorSetting::natural(2.8);
        assert!((p.step_rate(&fast) - 2.0 * p.step_rate(&slow)).abs() < 1e-12);
    }

    #[test]
    fn recordings_are_reproducible() {
        let p = make_subject_profile("a", 4);
        let s = FactorSetting::natural(2.2);
        let a = generate_recording(&p, &s, "1", 10.0, 50.0, 9).unwrap();
        let b = generate_recording(&p, &s, "1", 10.0, 50.0, 9).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 500);
        assert_eq!(a.sensors(), Sensor::ALL.to_vec());
        assert!(generate_recording(&p, &s, "1", 0.0, 50.0, 9).is_err());
    }

    #[test]
    fn clones_stay_close() {
        let t = make_subject_profile("t", 5);
        let c = make_clone(&t, "c", 6);
        assert_eq!(c.sensitivities, t.sensitivities);
        assert_eq!(c.natural_speed_mph, t.natural_speed_mph);
        for (a, b) in c.amplitudes.iter().flatten().zip(t.amplitudes.iter().flatten()) {
            assert!((a / b - 1.0).abs() < 0.3);
        }
    }
}
