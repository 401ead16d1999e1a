//! Exploratory analyses of a dictionary: factor/feature Pearson
//! correlations and same- versus cross-setting histogram overlap.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::dictattack::{Dictionary, DictionaryEntry, EntryFeatures, Factor, FactorSetting};
use crate::features::histogram::{intersection, Histogram};
use crate::render::Matrix;
use crate::signal::{segment, Axis, ChannelId, Sensor};
use crate::{Error, Result};

pub const DEFAULT_ALPHA: f64 = 0.05;
pub const DEFAULT_OVERLAP_BINS: usize = 80;
pub const DEFAULT_OVERLAP_WINDOW_SECS: f64 = 8.0;

pub const DEFAULT_EDA_FEATURES: [&str; 6] = [
    "la_x_std",
    "la_y_std",
    "la_z_std",
    "gy_x_std",
    "la_x_mean_crossings",
    "la_x_fft_std",
];

pub fn default_overlap_channel() -> ChannelId {
    ChannelId::new(Sensor::La, Axis::X)
}

/// Pearson correlation; `None` when either side is constant or there are
/// fewer than two points.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Two-sided p-value of `r` from the t-distribution with `n - 2` degrees of
/// freedom.
pub fn pearson_p_value(r: f64, n: usize) -> Result<f64> {
    if n < 3 {
        return Err(Error::invalid(format!("p-value needs at least 3 points, got {n}")));
    }
    if r.abs() >= 1.0 {
        return Ok(0.0);
    }
    let df = (n - 2) as f64;
    let t = r * (df / (1.0 - r * r)).sqrt();
    let dist = StudentsT::new(0.0, 1.0, df).map_err(|e| Error::invalid(e.to_string()))?;
    Ok((2.0 * (1.0 - dist.cdf(t.abs()))).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationCell {
    pub imitator: String,
    pub factor: Factor,
    pub feature: String,
    pub n: usize,
    pub r: Option<f64>,
    pub p_value: Option<f64>,
    pub significant: bool,
}

fn mode(values: impl Iterator<Item = f64>) -> Option<f64> {
    let mut counts: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for v in values {
        counts.entry(v.to_bits()).or_insert((v, 0)).1 += 1;
    }
    counts
        .values()
        .max_by(|a, b| a.1.cmp(&b.1).then(b.0.total_cmp(&a.0)))
        .map(|(v, _)| *v)
}

/// Settings of one imitator that vary `factor` while every other factor
/// sits at its most common level (ties to the lowest level).
pub fn sweep_subset<'a>(settings: &[&'a FactorSetting], factor: Factor) -> Vec<&'a FactorSetting> {
    let modes: Vec<(Factor, f64)> = Factor::ALL
        .into_iter()
        .filter(|f| *f != factor)
        .filter_map(|f| mode(settings.iter().map(|s| f.level(s))).map(|m| (f, m)))
        .collect();
    settings
        .iter()
        .copied()
        .filter(|s| modes.iter().all(|(f, m)| f.level(s) == *m))
        .collect()
}

fn column_means(entry: &EntryFeatures, feature: &str) -> Result<f64> {
    let c = entry
        .matrix
        .column_index(feature)
        .ok_or_else(|| Error::invalid(format!("unknown feature `{feature}`")))?;
    if entry.matrix.is_empty() {
        return Err(Error::invalid(format!("entry {} has no windows", entry.key)));
    }
    Ok(entry.matrix.rows.iter().map(|r| r[c]).sum::<f64>() / entry.matrix.len() as f64)
}

/// Pearson r between a factor's level and the per-entry mean of each
/// feature, over the imitator's sweep subset for that factor.
pub fn factor_feature_correlations(
    entries: &[EntryFeatures],
    imitator: &str,
    factor: Factor,
    features: &[String],
    alpha: f64,
) -> Result<Vec<CorrelationCell>> {
    let own: Vec<&EntryFeatures> = entries.iter().filter(|e| e.key.imitator_id == imitator).collect();
    let settings: Vec<&FactorSetting> = own.iter().map(|e| &e.key.setting).collect();
    let subset = sweep_subset(&settings, factor);
    let chosen: Vec<&EntryFeatures> = own
        .iter()
        .copied()
        .filter(|e| subset.iter().any(|s| std::ptr::eq(*s, &e.key.setting)))
        .collect();
    let mut levels: Vec<f64> = chosen.iter().map(|e| factor.level(&e.key.setting)).collect();
    let x = levels.clone();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    if levels.len() < 3 {
        return Err(Error::invalid(format!(
            "imitator {imitator} has {} levels of {factor}; need at least 3",
            levels.len()
        )));
    }
    features
        .iter()
        .map(|feature| {
            let y = chosen
                .iter()
                .map(|e| column_means(e, feature))
                .collect::<Result<Vec<f64>>>()?;
            let r = pearson(&x, &y);
            let p_value = r.map(|r| pearson_p_value(r, x.len())).transpose()?;
            Ok(CorrelationCell {
                imitator: imitator.to_string(),
                factor,
                feature: feature.clone(),
                n: x.len(),
                r,
                p_value,
                significant: p_value.is_some_and(|p| p < alpha),
            })
        })
        .collect()
}

pub fn correlations_csv(cells: &[CorrelationCell]) -> String {
    let mut out = String::from("imitator,factor,feature,n,r,p_value,significant\n");
    for c in cells {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |v| v.to_string());
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            c.imitator,
            c.factor,
            c.feature,
            c.n,
            opt(c.r),
            opt(c.p_value),
            c.significant
        ));
    }
    out
}

/// Mean histogram intersections between factor levels.
#[derive(Debug, Clone, PartialEq)]
pub struct OverlapGrid {
    pub factor: Factor,
    pub channel: ChannelId,
    pub window_secs: f64,
    pub bins: usize,
    /// Rows are reference levels, columns compared levels.
    pub values: Matrix,
    pub pair_counts: Vec<Vec<usize>>,
}

impl OverlapGrid {
    /// Mean of the present diagonal and off-diagonal cells.
    pub fn diagonal_means(&self) -> Option<(f64, f64)> {
        let (mut d, mut o) = (Vec::new(), Vec::new());
        for (i, row) in self.values.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                if let Some(v) = v {
                    if i == j {
                        d.push(*v)
                    } else {
                        o.push(*v)
                    }
                }
            }
        }
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        (!d.is_empty() && !o.is_empty()).then(|| (mean(&d), mean(&o)))
    }
}

/// Disjoint windows of one channel, raw (unsmoothed).
pub fn disjoint_windows(entry: &DictionaryEntry, channel: ChannelId, window_secs: f64) -> Result<Vec<Vec<f64>>> {
    if entry.recording.channel(channel).is_none() {
        return Err(Error::invalid(format!("entry {} lacks channel {channel}", entry.key)));
    }
    Ok(segment(&entry.recording, window_secs, window_secs)?
        .iter()
        .map(|f| f.channel(channel).expect("checked").to_vec())
        .collect())
}

/// Overlap grid over labeled groups of windows. Cell `(i, j)` averages
/// `I(P, Q)` over windows `P` of level `i` and `Q` of level `j`, with bin
/// edges spanning all of level `i`'s samples. Diagonal cells average over
/// unordered pairs of distinct windows. Levels with fewer than two windows
/// leave their row and column missing.
pub fn overlap_grid(
    factor: Factor,
    channel: ChannelId,
    window_secs: f64,
    bins: usize,
    levels: &[(String, Vec<Vec<f64>>)],
) -> Result<OverlapGrid> {
    if bins == 0 {
        return Err(Error::invalid("overlap needs at least one bin"));
    }
    let labels: Vec<String> = levels.iter().map(|(l, _)| l.clone()).collect();
    let mut values = Matrix::new(factor.as_str(), labels.clone(), labels);
    let k = levels.len();
    let mut pair_counts = vec![vec![0; k]; k];
    for (i, (_, ref_windows)) in levels.iter().enumerate() {
        if ref_windows.len() < 2 {
            continue;
        }
        let lo = ref_windows.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        let hi = ref_windows.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if lo < hi { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        let hist = |w: &[f64]| Histogram::with_range(w, lo, hi, bins);
        let ref_hists = ref_windows.iter().map(|w| hist(w)).collect::<Result<Vec<_>>>()?;
        for (j, (_, windows)) in levels.iter().enumerate() {
            if windows.len() < 2 {
                continue;
            }
            let mut total = 0.0;
            let mut count = 0;
            if i == j {
                for a in 0..ref_hists.len() {
                    for b in a + 1..ref_hists.len() {
                        total += intersection(&ref_hists[a], &ref_hists[b])?;
                        count += 1;
                    }
                }
            } else {
                let other = windows.iter().map(|w| hist(w)).collect::<Result<Vec<_>>>()?;
                for p in &ref_hists {
                    for q in &other {
                        total += intersection(p, q)?;
                        count += 1;
                    }
                }
            }
            values.set(i, j, total / count as f64);
            pair_counts[i][j] = count;
        }
    }
    Ok(OverlapGrid {
        factor,
        channel,
        window_secs,
        bins,
        values,
        pair_counts,
    })
}

fn level_label(factor: Factor, s: &FactorSetting) -> String {
    match factor {
        Factor::Speed => format!("{:.1}", s.speed_mph),
        Factor::StepLength => s.step_length.to_string(),
        Factor::StepWidth => s.step_width.to_string(),
        Factor::ThighLift => s.thigh_lift.to_string(),
    }
}

/// The overlap grid of one imitator's sweep over `factor`, levels in
/// ascending order.
pub fn overlap_heatmap(
    dictionary: &Dictionary,
    imitator: &str,
    factor: Factor,
    channel: ChannelId,
    window_secs: f64,
    bins: usize,
) -> Result<OverlapGrid> {
    let own: Vec<&DictionaryEntry> = dictionary.entries.iter().filter(|e| e.key.imitator_id == imitator).collect();
    let settings: Vec<&FactorSetting> = own.iter().map(|e| &e.key.setting).collect();
    let subset = sweep_subset(&settings, factor);
    let mut chosen: Vec<&DictionaryEntry> = own
        .into_iter()
        .filter(|e| subset.iter().any(|s| std::ptr::eq(*s, &e.key.setting)))
        .collect();
    chosen.sort_by(|a, b| factor.level(&a.key.setting).total_cmp(&factor.level(&b.key.setting)));
    let mut levels: Vec<(String, Vec<Vec<f64>>)> = Vec::new();
    for e in chosen {
        let label = level_label(factor, &e.key.setting);
        let windows = disjoint_windows(e, channel, window_secs)?;
        match levels.last_mut() {
            Some((l, w)) if *l == label => w.extend(windows),
            _ => levels.push((label, windows)),
        }
    }
    overlap_grid(factor, channel, window_secs, bins, &levels)
}

/// Imitator ids present in a dictionary, sorted.
pub fn imitators(dictionary: &Dictionary) -> Vec<String> {
    let mut ids: Vec<String> = dictionary.entries.iter().map(|e| e.key.imitator_id.clone()).collect();
    ids.dedup();
    ids
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_edge_cases() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert!((pearson(&x, &[3.0, 5.0, 7.0, 9.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&x, &[9.0, 7.0, 5.0, 3.0]).unwrap() + 1.0).abs() < 1e-15);
        assert_eq!(pearson(&x, &[1.0; 4]), None);
        assert_eq!(pearson(&[1.0], &[2.0]), None);
    }

    #[test]
    fn p_values() {
        assert_eq!(pearson_p_value(1.0, 5).unwrap(), 0.0);
        assert!((pearson_p_value(0.0, 10).unwrap() - 1.0).abs() < 1e-12);
        // r = 0.6, n = 10: t = 2.1213, two-sided p = 0.0667
        let p = pearson_p_value(0.6, 10).unwrap();
        assert!((p - 0.0667).abs() < 5e-4, "{p}");
        assert!(pearson_p_value(0.5, 2).is_err());
    }

    #[test]
    fn identical_levels_overlap_fully() {
        let w: Vec<f64> = (0..100).map(|i| (i as f64 * 0.3).sin()).collect();
        let levels = vec![("a".to_string(), vec![w.clone(), w.clone()]), ("b".to_string(), vec![w.clone(), w])];
        let g = overlap_grid(Factor::Speed, default_overlap_channel(), 8.0, 80, &levels).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((g.values.get(i, j).unwrap() - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(g.pair_counts[0][0], 1);
        assert_eq!(g.pair_counts[0][1], 4);
    }

    #[test]
    fn single_window_levels_are_missing() {
        let w: Vec<f64> = (0..50).map(f64::from).collect();
        let levels = vec![("a".to_string(), vec![w.clone()]), ("b".to_string(), vec![w.clone(), w])];
        let g = overlap_grid(Factor::Speed, default_overlap_channel(), 8.0, 80, &levels).unwrap();
        assert_eq!(g.values.get(0, 0), None);
        assert_eq!(g.values.get(0, 1), None);
        assert_eq!(g.values.get(1, 0), None);
        assert!(g.values.get(1, 1).is_some());
        assert_eq!(g.diagonal_means(), None);
    }

    #[test]
    fn sweep_subset_fixes_other_factors() {
        let settings = crate::synth::desk_settings();
        let refs: Vec<&FactorSetting> = settings.iter().collect();
        assert_eq!(sweep_subset(&refs, Factor::Speed).len(), 7);
        assert_eq!(sweep_subset(&refs, Factor::StepLength).len(), 4);
        assert_eq!(sweep_subset(&refs, Factor::ThighLift).len(), 4);
    }
}
