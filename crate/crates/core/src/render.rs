//! Labeled matrices and their deterministic CSV/SVG renderings.
//!
//! SVG heatmaps map a value `v`, clamped to `[0, 1]`, linearly from white
//! `#ffffff` (at 0) to `#b2182b` (at 1), channel by channel, rounding each
//! channel to the nearest integer.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Svg,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Svg => "svg",
        }
    }
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "svg" => Ok(Format::Svg),
            other => Err(Error::invalid(format!("unknown format `{other}` (expected csv or svg)"))),
        }
    }
}

/// A row/column labeled grid; `None` marks a missing cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub corner: String,
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub values: Vec<Vec<Option<f64>>>,
}

impl Matrix {
    pub fn new(corner: &str, row_labels: Vec<String>, col_labels: Vec<String>) -> Self {
        let values = vec![vec![None; col_labels.len()]; row_labels.len()];
        Self {
            corner: corner.to_string(),
            row_labels,
            col_labels,
            values,
        }
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.values[row][col] = Some(value);
    }

    pub fn get(&self, row: usize, col: usize) -> Option<f64> {
        self.values[row][col]
    }

    fn validate(&self) -> Result<()> {
        if self.values.len() != self.row_labels.len()
            || self.values.iter().any(|r| r.len() != self.col_labels.len())
        {
            return Err(Error::invalid("matrix shape does not match its labels"));
        }
        if self.values.iter().flatten().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("matrix holds a non-finite value"));
        }
        Ok(())
    }

    /// Mean of the present values in a row.
    pub fn row_mean(&self, row: usize) -> Option<f64> {
        let present: Vec<f64> = self.values[row].iter().flatten().copied().collect();
        if present.is_empty() {
            None
        } else {
            Some(present.iter().sum::<f64>() / present.len() as f64)
        }
    }

    /// Row indices ordered by row mean (stable; rows without values go last).
    pub fn row_order_by_mean(&self, descending: bool) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.row_labels.len()).collect();
        order.sort_by(|&a, &b| match (self.row_mean(a), self.row_mean(b)) {
            (Some(x), Some(y)) if descending => y.total_cmp(&x),
            (Some(x), Some(y)) => x.total_cmp(&y),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        });
        order
    }

    /// The rows at `order`, in that order.
    pub fn select_rows(&self, order: &[usize]) -> Matrix {
        Matrix {
            corner: self.corner.clone(),
            row_labels: order.iter().map(|&i| self.row_labels[i].clone()).collect(),
            col_labels: self.col_labels.clone(),
            values: order.iter().map(|&i| self.values[i].clone()).collect(),
        }
    }

    pub fn sorted_by_row_mean(&self, descending: bool) -> Matrix {
        self.select_rows(&self.row_order_by_mean(descending))
    }

    /// CSV with a header row; values printed with `decimals` places, missing
    /// cells left empty.
    pub fn to_csv(&self, decimals: usize) -> Result<String> {
        self.validate()?;
        Ok(self.csv_with(|v| format!("{v:.decimals$}")))
    }

    /// CSV of values as whole percentages.
    pub fn to_percent_csv(&self) -> Result<String> {
        self.validate()?;
        Ok(self.csv_with(|v| format!("{}", (v * 100.0).round() as i64)))
    }

    fn csv_with(&self, fmt: impl Fn(f64) -> String) -> String {
        let mut out = String::new();
        out.push_str(&self.corner);
        for c in &self.col_labels {
            out.push(',');
            out.push_str(c);
        }
        out.push('\n');
        for (label, row) in self.row_labels.iter().zip(&self.values) {
            out.push_str(label);
            for v in row {
                out.push(',');
                if let Some(v) = v {
                    out.push_str(&fmt(*v));
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn to_svg(&self) -> Result<String> {
        self.validate()?;
        const CELL_W: usize = 64;
        const CELL_H: usize = 24;
        const LABEL_W: usize = 120;
        const HEADER_H: usize = 28;
        let width = LABEL_W + CELL_W * self.col_labels.len();
        let height = HEADER_H + CELL_H * self.row_labels.len();
        let mut s = String::new();
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
        );
        for (j, c) in self.col_labels.iter().enumerate() {
            let x = LABEL_W + j * CELL_W + CELL_W / 2;
            let _ = writeln!(s, r#"<text x="{x}" y="18" text-anchor="middle">{}</text>"#, escape(c));
        }
        for (i, (label, row)) in self.row_labels.iter().zip(&self.values).enumerate() {
            let y = HEADER_H + i * CELL_H;
            let _ = writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
                LABEL_W - 6,
                y + CELL_H / 2 + 4,
                escape(label)
            );
            for (j, v) in row.iter().enumerate() {
                let x = LABEL_W + j * CELL_W;
                let (fill, text) = match v {
                    Some(v) => (ramp(*v), format!("{}", (v * 100.0).round() as i64)),
                    None => ("#dddddd".to_string(), String::new()),
                };
                let _ = writeln!(
                    s,
                    r##"<rect x="{x}" y="{y}" width="{CELL_W}" height="{CELL_H}" fill="{fill}" stroke="#ffffff"/>"##
                );
                if !text.is_empty() {
                    let _ = writeln!(
                        s,
                        r#"<text x="{}" y="{}" text-anchor="middle">{text}</text>"#,
                        x + CELL_W / 2,
                        y + CELL_H / 2 + 4
                    );
                }
            }
        }
        s.push_str("</svg>\n");
        Ok(s)
    }

    pub fn render(&self, format: Format) -> Result<String> {
        match format {
            Format::Csv => self.to_csv(4),
            Format::Svg => self.to_svg(),
        }
    }
}

/// Heatmap color for a value in `[0, 1]`.
pub fn ramp(v: f64) -> String {
    let t = v.clamp(0.0, 1.0);
    let mix = |hi: f64| (255.0 + t * (hi - 255.0)).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(178.0), mix(24.0), mix(43.0))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Writes `contents`, creating parent directories.
pub fn write_text(path: &Path, contents: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, contents).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> Matrix {
        let mut m = Matrix::new("combo", vec!["a".into(), "g".into()], vec!["knn".into(), "svm".into()]);
        m.set(0, 0, 0.1);
        m.set(0, 1, 0.25);
        m.set(1, 0, 0.5);
        m.set(1, 1, 0.04);
        m
    }

    #[test]
    fn csv_layout() {
        let csv = two_by_two().to_csv(4).unwrap();
        assert_eq!(csv, "combo,knn,svm\na,0.1000,0.2500\ng,0.5000,0.0400\n");
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(two_by_two().to_percent_csv().unwrap(), "combo,knn,svm\na,10,25\ng,50,4\n");
    }

    #[test]
    fn rendering_is_repeatable() {
        let m = two_by_two();
        assert_eq!(m.to_svg().unwrap(), m.to_svg().unwrap());
        assert_eq!(m.to_csv(4).unwrap(), m.to_csv(4).unwrap());
    }

    #[test]
    fn ramp_endpoints() {
        assert_eq!(ramp(0.0), "#ffffff");
        assert_eq!(ramp(1.0), "#b2182b");
        assert_eq!(ramp(7.0), "#b2182b");
    }

    #[test]
    fn missing_cells_and_bad_values() {
        let mut m = Matrix::new("r", vec!["x".into()], vec!["a".into(), "b".into()]);
        m.set(0, 1, 0.5);
        assert_eq!(m.to_csv(2).unwrap(), "r,a,b\nx,,0.50\n");
        m.set(0, 0, f64::NAN);
        assert!(m.to_csv(2).is_err());
    }

    #[test]
    fn sort_by_row_mean() {
        let m = two_by_two().sorted_by_row_mean(true);
        assert_eq!(m.row_labels, vec!["g", "a"]);
        assert_eq!(m.get(0, 0), Some(0.5));
    }
}
