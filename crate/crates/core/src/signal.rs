//! Raw IMU time series, smoothing, magnitude channels and windowing.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// The four Android virtual sensors recorded per session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sensor {
    /// linear_acceleration
    La,
    /// gyroscope
    Gy,
    /// magnetic_field
    Ma,
    /// rotation_vector
    Rv,
}

impl Sensor {
    pub const ALL: [Sensor; 4] = [Sensor::La, Sensor::Gy, Sensor::Ma, Sensor::Rv];

    pub fn name(self) -> &'static str {
        match self {
            Sensor::La => "la",
            Sensor::Gy => "gy",
            Sensor::Ma => "ma",
            Sensor::Rv => "rv",
        }
    }

    /// Single-letter code used in combo names such as `a+g+m+r`.
    pub fn letter(self) -> char {
        match self {
            Sensor::La => 'a',
            Sensor::Gy => 'g',
            Sensor::Ma => 'm',
            Sensor::Rv => 'r',
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Sensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Sensor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "la" | "a" => Ok(Sensor::La),
            "gy" | "g" => Ok(Sensor::Gy),
            "ma" | "m" => Ok(Sensor::Ma),
            "rv" | "r" => Ok(Sensor::Rv),
            other => Err(Error::invalid(format!("unknown sensor `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
    /// Euclidean magnitude of the three physical axes.
    M,
}

impl Axis {
    pub const ALL: [Axis; 4] = [Axis::X, Axis::Y, Axis::Z, Axis::M];

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
            Axis::M => "m",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ChannelId {
    pub sensor: Sensor,
    pub axis: Axis,
}

impl ChannelId {
    pub fn new(sensor: Sensor, axis: Axis) -> Self {
        Self { sensor, axis }
    }
}

impl fmt::Display for ChannelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.sensor.name(), self.axis.name())
    }
}

/// A non-empty subset of the four sensors, fused at the feature level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SensorCombo(u8);

impl SensorCombo {
    pub fn new(sensors: &[Sensor]) -> Result<Self> {
        let mask = sensors.iter().fold(0u8, |m, s| m | (1 << s.index()));
        if mask == 0 {
            return Err(Error::invalid("sensor combination is empty"));
        }
        Ok(SensorCombo(mask))
    }

    pub fn full() -> Self {
        SensorCombo(0b1111)
    }

    pub fn sensors(self) -> Vec<Sensor> {
        Sensor::ALL
            .into_iter()
            .filter(|s| self.0 & (1 << s.index()) != 0)
            .collect()
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, sensor: Sensor) -> bool {
        self.0 & (1 << sensor.index()) != 0
    }

    /// All 15 combinations in canonical report order: by size, then
    /// lexicographically over `a, g, m, r`.
    pub fn all() -> Vec<SensorCombo> {
        let mut combos: Vec<SensorCombo> = (1u8..16).map(SensorCombo).collect();
        combos.sort_by_key(|c| c.sort_key());
        combos
    }

    fn sort_key(self) -> (usize, Vec<usize>) {
        (
            self.len(),
            self.sensors().iter().map(|s| s.index()).collect(),
        )
    }
}

impl PartialOrd for SensorCombo {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SensorCombo {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl fmt::Display for SensorCombo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name: Vec<String> = self.sensors().iter().map(|s| s.letter().to_string()).collect();
        f.write_str(&name.join("+"))
    }
}

impl FromStr for SensorCombo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let sensors = s
            .split('+')
            .map(|part| part.trim().parse::<Sensor>())
            .collect::<Result<Vec<_>>>()?;
        SensorCombo::new(&sensors)
    }
}

impl Serialize for SensorCombo {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SensorCombo {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A uniformly sampled, finite, non-empty time series.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalChannel {
    samples: Vec<f64>,
    sampling_rate: f64,
}

impl SignalChannel {
    pub fn new(samples: Vec<f64>, sampling_rate: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::invalid("signal channel has no samples"));
        }
        if !(sampling_rate.is_finite() && sampling_rate > 0.0) {
            return Err(Error::invalid(format!(
                "sampling rate must be positive, got {sampling_rate}"
            )));
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite sample at index {i}")));
        }
        Ok(Self {
            samples,
            sampling_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sampling_rate(&self) -> f64 {
        self.sampling_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.samples.len() as f64 / self.sampling_rate
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }
}

/// Moving-average width for a sampling rate: `ceil(0.05 * rate)`, at least 1.
pub fn smoothing_width(sampling_rate: f64) -> Result<usize> {
    if !(sampling_rate.is_finite() && sampling_rate > 0.0) {
        return Err(Error::invalid(format!(
            "sampling rate must be positive, got {sampling_rate}"
        )));
    }
    // rate / 20 is exact for integral rates, unlike rate * 0.05.
    Ok(((sampling_rate / 20.0).ceil() as usize).max(1))
}

/// Forward moving average of width `s`; the last `s - 1` positions are
/// dropped rather than padded, so the output has `n - s + 1` samples.
pub fn smooth(channel: &SignalChannel, s: usize) -> Result<SignalChannel> {
    let x = channel.samples();
    if s == 0 {
        return Err(Error::invalid("smoothing width must be at least 1"));
    }
    if s > x.len() {
        return Err(Error::invalid(format!(
            "smoothing width {s} exceeds channel length {}",
            x.len()
        )));
    }
    if s == 1 {
        return Ok(channel.clone());
    }
    // Each output is summed directly so results do not accumulate drift
    // from a running sum.
    let out = x
        .windows(s)
        .map(|w| w.iter().sum::<f64>() / s as f64)
        .collect();
    SignalChannel::new(out, channel.sampling_rate())
}

/// Samplewise Euclidean norm of three aligned axes.
pub fn magnitude(x: &SignalChannel, y: &SignalChannel, z: &SignalChannel) -> Result<SignalChannel> {
    if x.len() != y.len() || x.len() != z.len() {
        return Err(Error::invalid(format!(
            "axis length mismatch: {} / {} / {}",
            x.len(),
            y.len(),
            z.len()
        )));
    }
    let out = x
        .samples()
        .iter()
        .zip(y.samples())
        .zip(z.samples())
        .map(|((a, b), c)| (a * a + b * b + c * c).sqrt())
        .collect();
    SignalChannel::new(out, x.sampling_rate())
}

/// One subject-session (or dictionary entry) worth of aligned channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ImuRecording {
    pub subject_id: String,
    /// `"1"`/`"2"` for genuine sessions, the entry key for dictionary data.
    pub session: String,
    channels: BTreeMap<ChannelId, SignalChannel>,
    sampling_rate: f64,
}

impl ImuRecording {
    /// Builds a recording; all channels must share one rate and length.
    pub fn new(
        subject_id: impl Into<String>,
        session: impl Into<String>,
        channels: BTreeMap<ChannelId, SignalChannel>,
    ) -> Result<Self> {
        let first = channels
            .values()
            .next()
            .ok_or_else(|| Error::invalid("recording has no channels"))?;
        let rate = first.sampling_rate();
        let len = first.len();
        for (id, ch) in &channels {
            if ch.sampling_rate() != rate {
                return Err(Error::invalid(format!(
                    "channel {id} rate {} differs from {rate}",
                    ch.sampling_rate()
                )));
            }
            if ch.len() != len {
                return Err(Error::invalid(format!(
                    "channel {id} has {} samples, expected {len}",
                    ch.len()
                )));
            }
        }
        Ok(Self {
            subject_id: subject_id.into(),
            session: session.into(),
            channels,
            sampling_rate: rate,
        })
    }

    /// Builds a recording from raw x/y/z channels and derives the `m` axis
    /// of every sensor.
    pub fn from_axes(
        subject_id: impl Into<String>,
        session: impl Into<String>,
        sensors: BTreeMap<Sensor, [SignalChannel; 3]>,
    ) -> Result<Self> {
        let mut channels = BTreeMap::new();
        for (sensor, [x, y, z]) in sensors {
            let m = magnitude(&x, &y, &z)?;
            channels.insert(ChannelId::new(sensor, Axis::X), x);
            channels.insert(ChannelId::new(sensor, Axis::Y), y);
            channels.insert(ChannelId::new(sensor, Axis::Z), z);
            channels.insert(ChannelId::new(sensor, Axis::M), m);
        }
        Self::new(subject_id, session, channels)
    }

    pub fn sampling_rate(&self) -> f64 {
        self.sampling_rate
    }

    pub fn len(&self) -> usize {
        self.channels.values().next().map_or(0, SignalChannel::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration(&self) -> f64 {
        self.len() as f64 / self.sampling_rate
    }

    pub fn channel(&self, id: ChannelId) -> Option<&SignalChannel> {
        self.channels.get(&id)
    }

    pub fn channels(&self) -> impl Iterator<Item = (ChannelId, &SignalChannel)> {
        self.channels.iter().map(|(k, v)| (*k, v))
    }

    pub fn sensors(&self) -> Vec<Sensor> {
        let mut s: Vec<Sensor> = self.channels.keys().map(|c| c.sensor).collect();
        s.dedup();
        s
    }

    pub fn has_sensor(&self, sensor: Sensor) -> bool {
        Axis::ALL
            .iter()
            .all(|&a| self.channels.contains_key(&ChannelId::new(sensor, a)))
    }

    /// Smooths every channel with the rate-derived moving-average width.
    pub fn smoothed(&self) -> Result<Self> {
        let s = smoothing_width(self.sampling_rate)?;
        let channels = self
            .channels
            .iter()
            .map(|(id, ch)| Ok((*id, smooth(ch, s)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Self::new(self.subject_id.clone(), self.session.clone(), channels)
    }
}

/// A fixed-length window into a recording.
#[derive(Debug, Clone)]
pub struct Frame<'a> {
    pub index: usize,
    /// Start time in seconds from the beginning of the recording.
    pub start: f64,
    /// Window length in seconds.
    pub length: f64,
    pub channels: BTreeMap<ChannelId, &'a [f64]>,
}

impl Frame<'_> {
    pub fn channel(&self, id: ChannelId) -> Option<&[f64]> {
        self.channels.get(&id).copied()
    }
}

pub const DEFAULT_WINDOW_SECS: f64 = 8.0;
pub const DEFAULT_SLIDE_SECS: f64 = 4.0;

/// Cuts a recording into sliding windows. Window and slide are converted to
/// sample counts by rounding; a recording shorter than one window yields no
/// frames.
pub fn segment(recording: &ImuRecording, window: f64, slide: f64) -> Result<Vec<Frame<'_>>> {
    if !(window.is_finite() && window > 0.0) || !(slide.is_finite() && slide > 0.0) {
        return Err(Error::invalid(format!(
            "window ({window}) and slide ({slide}) must be positive"
        )));
    }
    let rate = recording.sampling_rate();
    let win = (window * rate).round() as usize;
    let step = (slide * rate).round() as usize;
    if win == 0 || step == 0 {
        return Err(Error::invalid(format!(
            "window or slide shorter than one sample at {rate} Hz"
        )));
    }
    let n = recording.len();
    if n < win {
        return Ok(Vec::new());
    }
    let count = (n - win) / step + 1;
    let frames = (0..count)
        .map(|i| {
            let lo = i * step;
            Frame {
                index: i,
                start: lo as f64 / rate,
                length: win as f64 / rate,
                channels: recording
                    .channels()
                    .map(|(id, ch)| (id, &ch.samples()[lo..lo + win]))
                    .collect(),
            }
        })
        .collect();
    Ok(frames)
}
