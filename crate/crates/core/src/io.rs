//! File formats: JSON-lines cake snapshots, the monitor time series as CSV,
//! and scalar-grid input.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evolution::Record;
use crate::geometry::ClosedCurve;
use crate::kernel::AlphaParam;
use crate::layercake::{LayerCake, LevelComponent, ScalarGrid};
use crate::scalar::Real;
use crate::vec2::Vec2;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("invalid cake: {0}")]
    Cake(String),
}

/// One curve of a snapshot; coordinates are written with full `f64`
/// round-trip precision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveRecord {
    pub label: String,
    pub weight: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Option<usize>,
    pub nodes: Vec<[f64; 2]>,
}

/// First line of a cake file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CakeHeader {
    pub alpha: f64,
    pub c_alpha: f64,
    pub eta_default: f64,
    pub preset: String,
    #[serde(default)]
    pub parameters: serde_json::Value,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Line {
    Header(CakeHeader),
    Curve(CurveRecord),
}

pub fn curve_records<T: Real>(cake: &LayerCake<T>, time: Option<(T, usize)>) -> Vec<CurveRecord> {
    cake.components()
        .iter()
        .map(|c| CurveRecord {
            label: c.label.clone(),
            weight: c.weight().as_f64(),
            level: c.level.map(|l| l.as_f64()),
            t: time.map(|(t, _)| t.as_f64()),
            step: time.map(|(_, s)| s),
            nodes: c.curve().nodes().iter().map(|p| [p.x.as_f64(), p.y.as_f64()]).collect(),
        })
        .collect()
}

/// Appends one line per curve.
pub fn write_snapshot<T: Real>(out: &mut impl Write, cake: &LayerCake<T>, time: Option<(T, usize)>) -> Result<(), IoError> {
    for rec in curve_records(cake, time) {
        serde_json::to_writer(&mut *out, &rec).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

/// Header line followed by the curves.
pub fn write_cake<T: Real>(out: &mut impl Write, header: &CakeHeader, cake: &LayerCake<T>) -> Result<(), IoError> {
    serde_json::to_writer(&mut *out, header).map_err(std::io::Error::from)?;
    out.write_all(b"\n")?;
    write_snapshot(out, cake, None)
}

/// Reads a cake file: an optional header and the curve records, in order.
pub fn read_cake_lines(input: impl BufRead) -> Result<(Option<CakeHeader>, Vec<CurveRecord>), IoError> {
    let mut header = None;
    let mut curves = Vec::new();
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line =
            serde_json::from_str(&line).map_err(|e| IoError::Parse { line: k + 1, message: e.to_string() })?;
        match parsed {
            Line::Header(h) if header.is_none() && curves.is_empty() => header = Some(h),
            Line::Header(_) => {
                return Err(IoError::Parse { line: k + 1, message: "header must be the first record".into() })
            }
            Line::Curve(c) => curves.push(c),
        }
    }
    Ok((header, curves))
}

/// Builds a validated cake from curve records.
pub fn cake_from_records<T: Real>(records: &[CurveRecord], alpha: AlphaParam<T>) -> Result<LayerCake<T>, IoError> {
    let mut comps = Vec::with_capacity(records.len());
    for r in records {
        let nodes = r.nodes.iter().map(|p| Vec2::new(T::lit(p[0]), T::lit(p[1]))).collect();
        let curve = ClosedCurve::new(nodes).map_err(|e| IoError::Cake(format!("{}: {e}", r.label)))?;
        let comp = LevelComponent::new(r.label.clone(), r.level.map(T::lit), T::lit(r.weight), curve)
            .map_err(|e| IoError::Cake(e.to_string()))?;
        comps.push(comp);
    }
    Ok(LayerCake::new(comps, alpha))
}

/// Streams monitor records as CSV with one length and one area column per
/// curve label.
pub struct TimeSeriesWriter<W: Write> {
    inner: csv::Writer<W>,
    columns: usize,
}

impl<W: Write> TimeSeriesWriter<W> {
    pub fn new(out: W, labels: &[String]) -> Result<Self, IoError> {
        let mut inner = csv::Writer::from_writer(out);
        let mut head: Vec<String> =
            ["t", "L_eta", "R_eta", "Q", "Lambda", "Sigma", "min_delta", "lip_u", "max_kappa", "step", "sup_u", "area_drift"]
                .iter()
                .map(|s| s.to_string())
                .collect();
        for l in labels {
            head.push(format!("length[{l}]"));
            head.push(format!("area[{l}]"));
        }
        inner.write_record(&head)?;
        Ok(Self { columns: head.len(), inner })
    }

    pub fn write<T: Real>(&mut self, r: &Record<T>) -> Result<(), IoError> {
        let d = &r.diagnostics;
        let mut row: Vec<String> = [
            r.t,
            d.l_eta,
            d.r_eta,
            d.q,
            d.lambda,
            d.sigma,
            d.min_pairwise_delta,
            d.lipschitz_u_est.unwrap_or(T::nan()),
            d.max_kappa,
        ]
        .iter()
        .map(|v| v.as_f64().to_string())
        .collect();
        row.push(r.step.to_string());
        row.push(r.sup_u.as_f64().to_string());
        row.push(r.area_drift.as_f64().to_string());
        for (p, a) in d.per_curve.iter().zip(&r.areas) {
            row.push(p.length.as_f64().to_string());
            row.push(a.as_f64().to_string());
        }
        if row.len() != self.columns {
            return Err(IoError::Cake(format!("record has {} columns, header has {}", row.len(), self.columns)));
        }
        self.inner.write_record(&row)?;
        Ok(())
    }

    pub fn flush(&mut self) -> Result<(), IoError> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Reads a scalar grid: three text lines (`nx`, `ny`, and the bounding box
/// `xmin xmax ymin ymax`), then `nx·ny` row-major samples (`x` fastest)
/// either as text separated by commas/whitespace or as little-endian `f64`.
pub fn read_grid_file<T: Real>(path: &Path) -> Result<ScalarGrid<T>, IoError> {
    let bytes = std::fs::read(path)?;
    parse_grid(&bytes)
}

pub fn parse_grid<T: Real>(bytes: &[u8]) -> Result<ScalarGrid<T>, IoError> {
    let mut pos = 0;
    let mut header = Vec::new();
    for line in 1..=3 {
        let end = bytes[pos..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or(IoError::Parse { line, message: "grid header needs three lines".into() })?;
        let text = std::str::from_utf8(&bytes[pos..pos + end])
            .map_err(|_| IoError::Parse { line, message: "header is not text".into() })?;
        header.push(numbers(text));
        pos += end + 1;
    }
    let bad = |line: usize, what: &str| IoError::Parse { line, message: what.to_string() };
    let dim = |line: usize| -> Result<usize, IoError> {
        match header[line - 1].as_slice() {
            [v] if *v >= 2.0 && v.fract() == 0.0 => Ok(*v as usize),
            _ => Err(bad(line, "expected one integer ≥ 2")),
        }
    };
    let (nx, ny) = (dim(1)?, dim(2)?);
    let bbox = match header[2].as_slice() {
        [a, b, c, d] => (T::lit(*a), T::lit(*b), T::lit(*c), T::lit(*d)),
        _ => return Err(bad(3, "expected xmin xmax ymin ymax")),
    };
    let body = &bytes[pos..];
    let want = nx * ny;
    let text_values = std::str::from_utf8(body).ok().and_then(|s| {
        let v = numbers_strict(s)?;
        (v.len() == want).then_some(v)
    });
    let values = match text_values {
        Some(v) => v,
        None if body.len() == 8 * want => body
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
            .collect(),
        None => return Err(bad(4, &format!("expected {want} samples as text or {} bytes of f64", 8 * want))),
    };
    ScalarGrid::new(nx, ny, bbox, values.into_iter().map(T::lit).collect()).map_err(|e| IoError::Cake(e.to_string()))
}

/// Numeric tokens of a header line; words such as `nx` are skipped.
fn numbers(s: &str) -> Vec<f64> {
    s.split(|c: char| c.is_whitespace() || c == ',' || c == '=').filter_map(|t| t.parse().ok()).collect()
}

fn numbers_strict(s: &str) -> Option<Vec<f64>> {
    s.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).map(|t| t.parse().ok()).collect()
}
