//! Recording CSV files (`t,x,y,z`, one file per sensor) and normalization to
//! a uniform sampling grid.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::signal::{Axis, ChannelId, ImuRecording, Sensor, SignalChannel};
use crate::{Error, Result};

pub const CSV_HEADER: &str = "t,x,y,z";

/// One sensor file as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorSeries {
    pub t: Vec<f64>,
    pub xyz: [Vec<f64>; 3],
}

impl SensorSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

pub fn sensor_file_name(sensor: Sensor) -> String {
    format!("{}.csv", sensor.name())
}

pub fn parse_sensor_csv(text: &str, origin: &str) -> Result<SensorSeries> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::data(format!("{origin}: empty file")))?;
    if header.trim_end_matches('\r') != CSV_HEADER {
        return Err(Error::data(format!(
            "{origin}: expected header `{CSV_HEADER}`, found `{header}`"
        )));
    }
    let mut series = SensorSeries {
        t: Vec::new(),
        xyz: [Vec::new(), Vec::new(), Vec::new()],
    };
    for (lineno, line) in lines.enumerate() {
        let line = line.trim_end_matches('\r');
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(Error::data(format!(
                "{origin}:{}: expected 4 fields, found {}",
                lineno + 2,
                fields.len()
            )));
        }
        let mut vals = [0.0; 4];
        for (slot, field) in vals.iter_mut().zip(&fields) {
            *slot = field.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| {
                Error::data(format!("{origin}:{}: bad number `{field}`", lineno + 2))
            })?;
        }
        if let Some(&prev) = series.t.last() {
            if vals[0] <= prev {
                return Err(Error::data(format!(
                    "{origin}:{}: timestamps must be strictly increasing ({} after {prev})",
                    lineno + 2,
                    vals[0]
                )));
            }
        }
        series.t.push(vals[0]);
        for k in 0..3 {
            series.xyz[k].push(vals[k + 1]);
        }
    }
    if series.t.len() < 2 {
        return Err(Error::data(format!("{origin}: fewer than two samples")));
    }
    Ok(series)
}

pub fn read_sensor_csv(path: &Path) -> Result<SensorSeries> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sensor_csv(&text, &path.display().to_string())
}

pub fn format_sensor_csv(series: &SensorSeries) -> String {
    let mut out = String::with_capacity(series.len() * 48);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for i in 0..series.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            series.t[i], series.xyz[0][i], series.xyz[1][i], series.xyz[2][i]
        );
    }
    out
}

pub fn write_sensor_csv(path: &Path, series: &SensorSeries) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, format_sensor_csv(series)).map_err(|e| Error::io(path, e))
}

/// Extracts the raw x/y/z series of each sensor of a recording, stamped on
/// a uniform clock starting at zero.
pub fn recording_series(recording: &ImuRecording) -> BTreeMap<Sensor, SensorSeries> {
    let rate = recording.sampling_rate();
    let t: Vec<f64> = (0..recording.len()).map(|i| i as f64 / rate).collect();
    let mut out = BTreeMap::new();
    for sensor in recording.sensors() {
        let axis = |a| {
            recording
                .channel(ChannelId::new(sensor, a))
                .map(|c| c.samples().to_vec())
        };
        if let (Some(x), Some(y), Some(z)) = (axis(Axis::X), axis(Axis::Y), axis(Axis::Z)) {
            out.insert(
                sensor,
                SensorSeries {
                    t: t.clone(),
                    xyz: [x, y, z],
                },
            );
        }
    }
    out
}

/// Writes `la.csv`, `gy.csv`, ... for every sensor of the recording.
pub fn write_recording(dir: &Path, recording: &ImuRecording) -> Result<()> {
    for (sensor, series) in recording_series(recording) {
        write_sensor_csv(&dir.join(sensor_file_name(sensor)), &series)?;
    }
    Ok(())
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Rates are estimated from timestamps and carry rounding noise; snapping to
/// a micro-hertz grid keeps derived integer widths stable.
fn snap_rate(rate: f64) -> f64 {
    (rate * 1e6).round() / 1e6
}

fn is_uniform(t: &[f64], dt: f64) -> bool {
    t.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-6 * dt)
}

fn interpolate(t: &[f64], v: &[f64], grid: &[f64]) -> Vec<f64> {
    let mut j = 0;
    grid.iter()
        .map(|&g| {
            while j + 2 < t.len() && t[j + 1] < g {
                j += 1;
            }
            let (t0, t1) = (t[j], t[j + 1]);
            let w = ((g - t0) / (t1 - t0)).clamp(0.0, 1.0);
            v[j] + w * (v[j + 1] - v[j])
        })
        .collect()
}

/// Aligns per-sensor series onto one uniform grid at the session's median
/// sampling rate and derives magnitude channels. Series that already share a
/// uniform clock are taken verbatim.
pub fn normalize_session(
    subject_id: &str,
    session: &str,
    series: &BTreeMap<Sensor, SensorSeries>,
) -> Result<ImuRecording> {
    if series.is_empty() {
        return Err(Error::data(format!(
            "{subject_id}/{session}: no sensor files"
        )));
    }
    let mut dts: Vec<f64> = series
        .values()
        .flat_map(|s| s.t.windows(2).map(|w| w[1] - w[0]))
        .collect();
    let dt = median(&mut dts);
    let first = series.values().next().expect("non-empty");
    let shared_clock = series.values().all(|s| s.t == first.t);

    let mut axes = BTreeMap::new();
    if shared_clock && is_uniform(&first.t, dt) {
        let span = first.t[first.len() - 1] - first.t[0];
        let rate = snap_rate((first.len() - 1) as f64 / span);
        for (sensor, s) in series {
            axes.insert(
                *sensor,
                [
                    SignalChannel::new(s.xyz[0].clone(), rate)?,
                    SignalChannel::new(s.xyz[1].clone(), rate)?,
                    SignalChannel::new(s.xyz[2].clone(), rate)?,
                ],
            );
        }
    } else {
        let rate = snap_rate(1.0 / dt);
        let start = series.values().map(|s| s.t[0]).fold(f64::NEG_INFINITY, f64::max);
        let end = series
            .values()
            .map(|s| s.t[s.len() - 1])
            .fold(f64::INFINITY, f64::min);
        if end <= start {
            return Err(Error::data(format!(
                "{subject_id}/{session}: sensor time ranges do not overlap"
            )));
        }
        let n = ((end - start) * rate + 1e-9).floor() as usize + 1;
        let grid: Vec<f64> = (0..n).map(|i| start + i as f64 / rate).collect();
        for (sensor, s) in series {
            let resampled =
                |k: usize| SignalChannel::new(interpolate(&s.t, &s.xyz[k], &grid), rate);
            axes.insert(*sensor, [resampled(0)?, resampled(1)?, resampled(2)?]);
        }
    }
    ImuRecording::from_axes(subject_id, session, axes)
}

/// Reads every `<sensor>.csv` present in `dir` and normalizes them.
pub fn load_session_dir(dir: &Path, subject_id: &str, session: &str) -> Result<ImuRecording> {
    let mut series = BTreeMap::new();
    for sensor in Sensor::ALL {
        let path = dir.join(sensor_file_name(sensor));
        if path.exists() {
            series.insert(sensor, read_sensor_csv(&path)?);
        }
    }
    if series.is_empty() {
        return Err(Error::data(format!(
            "subject {subject_id} session {session}: no sensor files in {}",
            dir.display()
        )));
    }
    normalize_session(subject_id, session, &series)
}

/// Loads a session from explicit per-sensor paths.
pub fn load_session_files(
    files: &BTreeMap<Sensor, std::path::PathBuf>,
    subject_id: &str,
    session: &str,
) -> Result<ImuRecording> {
    let mut series = BTreeMap::new();
    for (sensor, path) in files {
        if !path.exists() {
            return Err(Error::data(format!(
                "{subject_id}/{session}: missing file {}",
                path.display()
            )));
        }
        series.insert(*sensor, read_sensor_csv(path)?);
    }
    normalize_session(subject_id, session, &series)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(t: Vec<f64>, f: impl Fn(f64) -> f64) -> SensorSeries {
        let x: Vec<f64> = t.iter().map(|&v| f(v)).collect();
        SensorSeries {
            xyz: [x.clone(), x.iter().map(|v| 2.0 * v).collect(), vec![0.0; x.len()]],
            t,
        }
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let t: Vec<f64> = (0..100).map(|i| i as f64 / 46.0).collect();
        let s = series(t, |v| (v * 3.7).sin() * 1.234_567_890_123);
        let parsed = parse_sensor_csv(&format_sensor_csv(&s), "mem").unwrap();
        assert_eq!(parsed, s);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(parse_sensor_csv("", "f").is_err());
        assert!(parse_sensor_csv("a,b,c,d\n0,1,2,3\n1,1,2,3\n", "f").is_err());
        assert!(parse_sensor_csv("t,x,y,z\n0,1,2,3\n0,1,2,3\n", "f").is_err());
        assert!(parse_sensor_csv("t,x,y,z\n0,1,2\n1,1,2,3\n", "f").is_err());
        assert!(parse_sensor_csv("t,x,y,z\n0,1,2,nan\n1,1,2,3\n", "f").is_err());
        assert!(parse_sensor_csv("t,x,y,z\r\n0,1,2,3\r\n1,1,2,3\r\n", "f").is_ok());
    }

    #[test]
    fn uniform_input_is_kept_verbatim() {
        let t: Vec<f64> = (0..500).map(|i| i as f64 / 100.0).collect();
        let s = series(t, |v| v.cos());
        let mut m = BTreeMap::new();
        m.insert(Sensor::La, s.clone());
        m.insert(Sensor::Gy, s.clone());
        let rec = normalize_session("u", "1", &m).unwrap();
        assert_eq!(rec.sampling_rate(), 100.0);
        assert_eq!(rec.len(), 500);
        assert_eq!(
            rec.channel(ChannelId::new(Sensor::La, Axis::X)).unwrap().samples(),
            &s.xyz[0][..]
        );
        let m = rec.channel(ChannelId::new(Sensor::Gy, Axis::M)).unwrap().samples();
        assert!((m[3] - (s.xyz[0][3].powi(2) * 5.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn irregular_input_is_resampled_linearly() {
        // jittered clock sampling a linear function: interpolation is exact
        let t: Vec<f64> = (0..400)
            .map(|i| i as f64 * 0.02 + if i % 3 == 0 { 0.004 } else { 0.0 })
            .collect();
        let s = series(t, |v| 3.0 * v - 1.0);
        let offset: Vec<f64> = (0..380).map(|i| 0.1 + i as f64 * 0.02).collect();
        let s2 = series(offset, |v| 3.0 * v - 1.0);
        let mut m = BTreeMap::new();
        m.insert(Sensor::La, s);
        m.insert(Sensor::Ma, s2);
        let rec = normalize_session("u", "1", &m).unwrap();
        assert_eq!(rec.sampling_rate(), 50.0);
        let x = rec.channel(ChannelId::new(Sensor::La, Axis::X)).unwrap().samples();
        let start = 0.1;
        for (i, v) in x.iter().enumerate() {
            let g = start + i as f64 / 50.0;
            assert!((v - (3.0 * g - 1.0)).abs() < 1e-9);
        }
    }
}
