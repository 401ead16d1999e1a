//! Per-window feature extraction, feature matrices and feature selection.
//!
//! Every channel window yields 34 values: 30 time-domain statistics
//! ([`time`]) followed by 4 statistics of its amplitude spectrum ([`freq`]).
//! A sensor contributes four channels (`x`, `y`, `z`, `m`), so 136 values.

pub mod freq;
pub mod histogram;
pub mod mi;
pub mod time;

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use freq::{extract_freq_features, FREQ_FEATURE_NAMES, N_FREQ_FEATURES};
pub use histogram::{intersection, Histogram};
pub use mi::{mutual_information, select_top_k};
pub use time::{extract_time_features, N_TIME_FEATURES, TIME_FEATURE_NAMES};

use crate::signal::{segment, Axis, ChannelId, Frame, ImuRecording, Sensor, SensorCombo};
use crate::{Error, Result};

pub const FEATURES_PER_CHANNEL: usize = N_TIME_FEATURES + N_FREQ_FEATURES;
pub const FEATURES_PER_SENSOR: usize = FEATURES_PER_CHANNEL * 4;
pub const DEFAULT_TOP_K: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Gen,
    Imp,
}

impl Label {
    pub fn index(self) -> usize {
        match self {
            Label::Gen => 0,
            Label::Imp => 1,
        }
    }

    pub fn other(self) -> Label {
        match self {
            Label::Gen => Label::Imp,
            Label::Imp => Label::Gen,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Gen => "gen",
            Label::Imp => "imp",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gen" => Ok(Label::Gen),
            "imp" => Ok(Label::Imp),
            other => Err(Error::invalid(format!("unknown label `{other}`"))),
        }
    }
}

/// Where a feature vector came from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub subject: String,
    /// Session number or dictionary entry key.
    pub session: String,
    pub window: usize,
}

/// Names of the 34 per-channel features in extraction order.
pub fn channel_feature_names() -> Vec<String> {
    let mut names: Vec<String> = TIME_FEATURE_NAMES.iter().map(|s| s.to_string()).collect();
    names.extend((0..time::N_BINS).map(|i| format!("bin{i:02}")));
    names.extend(FREQ_FEATURE_NAMES.iter().map(|s| s.to_string()));
    names
}

/// `<sensor>_<axis>_<feature>` names, sensor-major then axis `x,y,z,m`.
pub fn feature_names(sensors: &[Sensor]) -> Vec<String> {
    let per_channel = channel_feature_names();
    let mut names = Vec::with_capacity(sensors.len() * FEATURES_PER_SENSOR);
    for &sensor in sensors {
        for axis in Axis::ALL {
            let prefix = ChannelId::new(sensor, axis);
            names.extend(per_channel.iter().map(|f| format!("{prefix}_{f}")));
        }
    }
    names
}

/// All 34 features of one channel window.
pub fn extract_channel_features(window: &[f64]) -> Result<[f64; FEATURES_PER_CHANNEL]> {
    let mut out = [0.0; FEATURES_PER_CHANNEL];
    out[..N_TIME_FEATURES].copy_from_slice(&extract_time_features(window)?);
    out[N_TIME_FEATURES..].copy_from_slice(&extract_freq_features(window)?);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub names: Vec<String>,
    pub values: Vec<f64>,
    pub label: Option<Label>,
    pub provenance: Provenance,
}

/// Concatenates the per-channel features of the requested sensors.
pub fn featurize(frame: &Frame<'_>, sensors: &[Sensor], provenance: Provenance) -> Result<FeatureVector> {
    if sensors.is_empty() {
        return Err(Error::invalid("featurize needs at least one sensor"));
    }
    let mut values = Vec::with_capacity(sensors.len() * FEATURES_PER_SENSOR);
    for &sensor in sensors {
        for axis in Axis::ALL {
            let id = ChannelId::new(sensor, axis);
            let window = frame
                .channel(id)
                .ok_or_else(|| Error::invalid(format!("frame is missing channel {id}")))?;
            values.extend_from_slice(&extract_channel_features(window)?);
        }
    }
    Ok(FeatureVector {
        names: feature_names(sensors),
        values,
        label: None,
        provenance,
    })
}

/// Smooths a recording, cuts it into windows, and featurizes every window
/// over all of the recording's sensors. Rows are unlabeled.
pub fn featurize_recording(recording: &ImuRecording, window: f64, slide: f64) -> Result<FeatureMatrix> {
    let sensors = recording.sensors();
    let smoothed = recording.smoothed()?;
    let mut matrix = FeatureMatrix::new(feature_names(&sensors));
    for frame in segment(&smoothed, window, slide)? {
        let provenance = Provenance {
            subject: recording.subject_id.clone(),
            session: recording.session.clone(),
            window: frame.index,
        };
        matrix.push(featurize(&frame, &sensors, provenance)?)?;
    }
    Ok(matrix)
}

/// Rows sharing one name schema.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureMatrix {
    pub names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<Option<Label>>,
    pub provenance: Vec<Provenance>,
}

impl FeatureMatrix {
    pub fn new(names: Vec<String>) -> Self {
        Self {
            names,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn width(&self) -> usize {
        self.names.len()
    }

    pub fn push(&mut self, v: FeatureVector) -> Result<()> {
        if v.names != self.names {
            return Err(Error::invalid("feature vector schema does not match matrix"));
        }
        self.push_row(v.values, v.label, v.provenance)
    }

    pub fn push_row(&mut self, values: Vec<f64>, label: Option<Label>, provenance: Provenance) -> Result<()> {
        if values.len() != self.names.len() {
            return Err(Error::invalid(format!(
                "row has {} values, schema has {}",
                values.len(),
                self.names.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite feature {} in {}/{} window {}",
                self.names[i], provenance.subject, provenance.session, provenance.window
            )));
        }
        self.rows.push(values);
        self.labels.push(label);
        self.provenance.push(provenance);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Column indices of a sensor's 136-feature block.
    pub fn sensor_columns(&self, sensor: Sensor) -> Vec<usize> {
        let prefix = format!("{}_", sensor.name());
        self.names
            .iter()
            .enumerate()
            .filter(|(_, n)| n.starts_with(&prefix))
            .map(|(i, _)| i)
            .collect()
    }

    /// Keeps only `columns`, in the given order.
    pub fn project(&self, columns: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            names: columns.iter().map(|&c| self.names[c].clone()).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| columns.iter().map(|&c| r[c]).collect())
                .collect(),
            labels: self.labels.clone(),
            provenance: self.provenance.clone(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for name in &self.names {
            out.push_str(name);
            out.push(',');
        }
        out.push_str("label,subject,session,window\n");
        for ((row, label), prov) in self.rows.iter().zip(&self.labels).zip(&self.provenance) {
            for v in row {
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(
                out,
                "{},{},{},{}",
                label.map_or("", Label::as_str),
                prov.subject,
                prov.session,
                prov.window
            );
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header: Vec<&str> = lines
            .next()
            .ok_or_else(|| Error::data("empty feature matrix file"))?
            .split(',')
            .collect();
        let width = header.len().checked_sub(4).filter(|_| {
            header[header.len() - 4..] == ["label", "subject", "session", "window"]
        });
        let width = width.ok_or_else(|| Error::data("feature matrix header lacks provenance columns"))?;
        let mut m = FeatureMatrix::new(header[..width].iter().map(|s| s.to_string()).collect());
        for (i, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != width + 4 {
                return Err(Error::data(format!("feature matrix row {} has {} fields", i + 1, fields.len())));
            }
            let values = fields[..width]
                .iter()
                .map(|f| f.parse::<f64>().map_err(|_| Error::data(format!("bad feature value `{f}`"))))
                .collect::<Result<Vec<_>>>()?;
            let label = match fields[width] {
                "" => None,
                l => Some(l.parse().map_err(|e: Error| Error::data(e.to_string()))?),
            };
            let window = fields[width + 3]
                .parse()
                .map_err(|_| Error::data(format!("bad window index `{}`", fields[width + 3])))?;
            m.push_row(
                values,
                label,
                Provenance {
                    subject: fields[width + 1].to_string(),
                    session: fields[width + 2].to_string(),
                    window,
                },
            )
            .map_err(|e| Error::data(e.to_string()))?;
        }
        Ok(m)
    }
}

/// A frozen feature selection: column names in model order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Selection {
    pub names: Vec<String>,
}

impl Selection {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Resolves the selected names against a matrix schema.
    pub fn columns(&self, matrix_names: &[String]) -> Result<Vec<usize>> {
        self.names
            .iter()
            .map(|n| {
                matrix_names
                    .iter()
                    .position(|m| m == n)
                    .ok_or_else(|| Error::invalid(format!("feature `{n}` missing from matrix")))
            })
            .collect()
    }
}

/// Top-`k` selection run independently on each sensor of `combo`, then
/// concatenated in sensor order.
pub fn select_per_sensor(
    matrix: &FeatureMatrix,
    labels: &[Label],
    combo: SensorCombo,
    k: usize,
) -> Result<Selection> {
    let mut names = Vec::with_capacity(k * combo.len());
    for sensor in combo.sensors() {
        let cols = matrix.sensor_columns(sensor);
        if cols.is_empty() {
            return Err(Error::invalid(format!("no features for sensor {sensor}")));
        }
        let picked = select_top_k(&matrix.rows, labels, &cols, k)?;
        names.extend(picked.into_iter().map(|c| matrix.names[c].clone()));
    }
    Ok(Selection { names })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{segment, ImuRecording, SignalChannel};
    use std::collections::BTreeMap;

    fn recording() -> ImuRecording {
        let mut sensors = BTreeMap::new();
        for (k, s) in Sensor::ALL.into_iter().enumerate() {
            let mk = |phase: f64| {
                SignalChannel::new(
                    (0..600).map(|i| (i as f64 * 0.1 + phase + k as f64).sin()).collect(),
                    50.0,
                )
                .unwrap()
            };
            sensors.insert(s, [mk(0.0), mk(1.0), mk(2.0)]);
        }
        ImuRecording::from_axes("u1", "1", sensors).unwrap()
    }

    fn prov() -> Provenance {
        Provenance {
            subject: "u1".into(),
            session: "1".into(),
            window: 0,
        }
    }

    #[test]
    fn dimensions() {
        assert_eq!(FEATURES_PER_CHANNEL, 34);
        assert_eq!(FEATURES_PER_SENSOR, 136);
        let rec = recording();
        let frames = segment(&rec, 8.0, 4.0).unwrap();
        let one = featurize(&frames[0], &[Sensor::La], prov()).unwrap();
        assert_eq!(one.values.len(), 136);
        let all = featurize(&frames[0], &Sensor::ALL, prov()).unwrap();
        assert_eq!(all.values.len(), 544);
        assert_eq!(all.names[0], "la_x_mean");
        assert_eq!(all.names[30], "la_x_fft_q1");
        assert_eq!(all.names[543], "rv_m_fft_std");
        let mut unique = all.names.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(unique.len(), 544);
        assert!(featurize(&frames[0], &[], prov()).is_err());
    }

    #[test]
    fn missing_sensor_is_an_error() {
        let mut sensors = BTreeMap::new();
        let c = SignalChannel::new(vec![0.5; 500], 50.0).unwrap();
        sensors.insert(Sensor::La, [c.clone(), c.clone(), c]);
        let rec = ImuRecording::from_axes("u", "1", sensors).unwrap();
        let frames = segment(&rec, 8.0, 4.0).unwrap();
        assert!(featurize(&frames[0], &[Sensor::Gy], prov()).is_err());
    }

    #[test]
    fn matrix_csv_round_trip() {
        let rec = recording();
        let frames = segment(&rec, 8.0, 4.0).unwrap();
        let mut m = FeatureMatrix::new(feature_names(&[Sensor::La, Sensor::Rv]));
        for (i, f) in frames.iter().enumerate() {
            let mut v = featurize(f, &[Sensor::La, Sensor::Rv], Provenance { window: i, ..prov() }).unwrap();
            v.label = if i % 2 == 0 { Some(Label::Gen) } else { None };
            m.push(v).unwrap();
        }
        let back = FeatureMatrix::from_csv(&m.to_csv()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn per_sensor_selection_width() {
        let rec = recording();
        let frames = segment(&rec, 8.0, 1.0).unwrap();
        let mut m = FeatureMatrix::new(feature_names(&Sensor::ALL));
        let mut labels = Vec::new();
        for (i, f) in frames.iter().enumerate() {
            m.push(featurize(f, &Sensor::ALL, Provenance { window: i, ..prov() }).unwrap()).unwrap();
            labels.push(if i % 2 == 0 { Label::Gen } else { Label::Imp });
        }
        let sel = select_per_sensor(&m, &labels, SensorCombo::full(), DEFAULT_TOP_K).unwrap();
        assert_eq!(sel.len(), 120);
        assert!(sel.names[..30].iter().all(|n| n.starts_with("la_")));
        assert!(sel.names[90..].iter().all(|n| n.starts_with("rv_")));
        let cols = sel.columns(&m.names).unwrap();
        assert_eq!(cols.len(), 120);
    }
}
