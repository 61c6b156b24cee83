//! Tracking-data ingestion: CSV parsing, gap-aware windowing and unit
//! normalization.
//!
//! The interchange format is a headed CSV, one row per (entity, frame):
//!
//! ```text
//! frame,entity_id,x_cm,y_cm
//! 0,1,-120.5,330
//! ```
//!
//! Sample index `i` of every parsed series corresponds to frame `i`, so all
//! series from one file share a time axis. Frames an entity has no row for
//! are missing samples (substitutions, ball out of play).

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default sampling interval of the tracking feed, seconds (10 Hz).
pub const DEFAULT_DT: f64 = 0.1;

/// Points this far outside the field (cm) are clamped; beyond it they are rejected.
pub const BOUNDS_TOLERANCE_CM: f64 = 100.0;

pub const CSV_HEADER: &str = "frame,entity_id,x_cm,y_cm";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Axis-aligned pitch rectangle in centimeters, origin at the center spot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Default for FieldSpec {
    /// A 105 m by 68 m pitch.
    fn default() -> Self {
        Self {
            x_min: -5250.0,
            x_max: 5250.0,
            y_min: -3400.0,
            y_max: 3400.0,
        }
    }
}

impl FieldSpec {
    pub fn new(x_min: f64, x_max: f64, y_min: f64, y_max: f64) -> Result<Self> {
        if !(x_min < x_max && y_min < y_max) {
            return Err(Error::InvalidArgument(format!(
                "field bounds must satisfy x_min < x_max and y_min < y_max, got [{x_min}, {x_max}] x [{y_min}, {y_max}]"
            )));
        }
        Ok(Self { x_min, x_max, y_min, y_max })
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn contains(&self, p: &Point) -> bool {
        (self.x_min..=self.x_max).contains(&p.x) && (self.y_min..=self.y_max).contains(&p.y)
    }

    pub fn clamp(&self, p: &Point) -> Point {
        Point::new(p.x.clamp(self.x_min, self.x_max), p.y.clamp(self.y_min, self.y_max))
    }

    fn within_tolerance(&self, p: &Point) -> bool {
        p.x >= self.x_min - BOUNDS_TOLERANCE_CM
            && p.x <= self.x_max + BOUNDS_TOLERANCE_CM
            && p.y >= self.y_min - BOUNDS_TOLERANCE_CM
            && p.y <= self.y_max + BOUNDS_TOLERANCE_CM
    }

    /// Maps the field affinely onto `[0, 1]²`.
    pub fn to_unit(&self, p: &Point) -> Point {
        Point::new((p.x - self.x_min) / self.width(), (p.y - self.y_min) / self.height())
    }

    pub fn from_unit(&self, p: &Point) -> Point {
        Point::new(self.x_min + p.x * self.width(), self.y_min + p.y * self.height())
    }
}

/// Per-entity position series at a fixed sampling interval.
///
/// Entity 0 is the ball, 1–11 the home side and 12–22 the away side.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingSeries {
    pub entity_id: u32,
    pub dt: f64,
    pub samples: Vec<Option<Point>>,
}

impl TrackingSeries {
    pub fn new(entity_id: u32, dt: f64, samples: Vec<Option<Point>>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        Ok(Self { entity_id, dt, samples })
    }

    /// Builds a gap-free series from points.
    pub fn from_points(entity_id: u32, dt: f64, points: &[Point]) -> Result<Self> {
        Self::new(entity_id, dt, points.iter().copied().map(Some).collect())
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, index: usize) -> f64 {
        index as f64 * self.dt
    }

    pub fn present_count(&self) -> usize {
        self.samples.iter().filter(|s| s.is_some()).count()
    }

    /// Maximal runs without missing samples, as `(start, len)`.
    pub fn stretches(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut start = None;
        for (i, s) in self.samples.iter().enumerate() {
            match (s, start) {
                (Some(_), None) => start = Some(i),
                (None, Some(s0)) => {
                    out.push((s0, i - s0));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s0) = start {
            out.push((s0, self.samples.len() - s0));
        }
        out
    }

    /// Scales every coordinate by `factor` (e.g. `0.01` converts cm to m).
    pub fn scaled(&self, factor: f64) -> TrackingSeries {
        TrackingSeries {
            entity_id: self.entity_id,
            dt: self.dt,
            samples: self
                .samples
                .iter()
                .map(|s| s.map(|p| Point::new(p.x * factor, p.y * factor)))
                .collect(),
        }
    }
}

/// A gap-free run of consecutive samples taken from a series.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub start_index: usize,
    pub points: Vec<Point>,
}

impl Window {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Observation vectors `(x, y)` ready for the filter.
    pub fn observations(&self) -> Vec<Vec<Option<f64>>> {
        self.points.iter().map(|p| vec![Some(p.x), Some(p.y)]).collect()
    }

    /// Interleaved `x0, y0, x1, y1, ...` layout used by the VAE.
    pub fn flatten(&self) -> Vec<f64> {
        flatten_points(&self.points)
    }
}

pub fn flatten_points(points: &[Point]) -> Vec<f64> {
    points.iter().flat_map(|p| [p.x, p.y]).collect()
}

pub fn unflatten_points(values: &[f64]) -> Vec<Point> {
    values.chunks_exact(2).map(|c| Point::new(c[0], c[1])).collect()
}

fn parse_field<T: std::str::FromStr>(raw: &str, name: &str, line: usize) -> Result<T> {
    raw.trim().parse::<T>().map_err(|_| Error::MalformedRow {
        line,
        reason: format!("cannot parse {name} from {raw:?}"),
    })
}

/// Parses tracking CSV into one series per entity, ordered by entity id.
///
/// Every series spans frames `0..=max_frame` over the whole file. Points
/// within [`BOUNDS_TOLERANCE_CM`] of the field are clamped onto it.
pub fn parse_tracking_csv(text: &str, field: &FieldSpec, dt: f64) -> Result<Vec<TrackingSeries>> {
    let mut lines = text.lines().enumerate();
    let header = lines.next().map(|(_, h)| h.trim()).ok_or(Error::BadHeader)?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    if cols != ["frame", "entity_id", "x_cm", "y_cm"] {
        return Err(Error::BadHeader);
    }

    let mut rows: BTreeMap<u32, Vec<(usize, Point)>> = BTreeMap::new();
    let mut seen: HashSet<(u32, usize)> = HashSet::new();
    let mut max_frame: Option<usize> = None;

    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = raw.split(',').collect();
        if parts.len() != 4 {
            return Err(Error::MalformedRow {
                line,
                reason: format!("expected 4 fields, found {}", parts.len()),
            });
        }
        let frame: usize = parse_field(parts[0], "frame", line)?;
        let entity: u32 = parse_field(parts[1], "entity_id", line)?;
        let x: f64 = parse_field(parts[2], "x_cm", line)?;
        let y: f64 = parse_field(parts[3], "y_cm", line)?;
        if !x.is_finite() || !y.is_finite() {
            return Err(Error::MalformedRow { line, reason: "non-finite coordinate".into() });
        }
        let p = Point::new(x, y);
        if !field.within_tolerance(&p) {
            return Err(Error::OutOfBounds { line });
        }

        let entry = rows.entry(entity).or_default();
        if let Some(&(last, _)) = entry.last() {
            if frame <= last {
                return Err(if seen.contains(&(entity, frame)) {
                    Error::DuplicateFrame { entity, frame, line }
                } else {
                    Error::NonMonotoneFrame { entity, frame, line }
                });
            }
        }
        seen.insert((entity, frame));
        entry.push((frame, field.clamp(&p)));
        max_frame = Some(max_frame.map_or(frame, |m| m.max(frame)));
    }

    let len = max_frame.map_or(0, |m| m + 1);
    rows.into_iter()
        .map(|(entity, pts)| {
            let mut samples = vec![None; len];
            for (frame, p) in pts {
                samples[frame] = Some(p);
            }
            TrackingSeries::new(entity, dt, samples)
        })
        .collect()
}

/// Writes series back into tracking CSV, ordered by frame then entity.
pub fn serialize_tracking_csv(series: &[TrackingSeries]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let len = series.iter().map(TrackingSeries::len).max().unwrap_or(0);
    let mut ordered: Vec<&TrackingSeries> = series.iter().collect();
    ordered.sort_by_key(|s| s.entity_id);
    for frame in 0..len {
        for s in &ordered {
            if let Some(Some(p)) = s.samples.get(frame) {
                // `{}` on f64 prints the shortest round-tripping decimal.
                let _ = writeln!(out, "{frame},{},{},{}", s.entity_id, p.x, p.y);
            }
        }
    }
    out
}

/// Stride-1 windows of `length` samples over every gap-free stretch.
///
/// Windows that would straddle a missing sample are skipped. Lengths below
/// two yield no windows.
pub fn sliding_windows(series: &TrackingSeries, length: usize) -> Vec<Window> {
    if length < 2 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (start, run) in series.stretches() {
        if run < length {
            continue;
        }
        for s in start..=start + run - length {
            let points = series.samples[s..s + length]
                .iter()
                .map(|p| p.expect("stretch is gap-free"))
                .collect();
            out.push(Window { start_index: s, points });
        }
    }
    out
}

/// Maps a series into unit coordinates; fails on any point outside `field`.
pub fn normalize_unit(series: &TrackingSeries, field: &FieldSpec) -> Result<TrackingSeries> {
    let samples = series
        .samples
        .iter()
        .map(|s| match s {
            Some(p) if !field.contains(p) => Err(Error::OutsideField { x: p.x, y: p.y }),
            Some(p) => Ok(Some(field.to_unit(p))),
            None => Ok(None),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TrackingSeries { entity_id: series.entity_id, dt: series.dt, samples })
}

/// Inverse of [`normalize_unit`].
pub fn denormalize(series: &TrackingSeries, field: &FieldSpec) -> TrackingSeries {
    TrackingSeries {
        entity_id: series.entity_id,
        dt: series.dt,
        samples: series.samples.iter().map(|s| s.map(|p| field.from_unit(&p))).collect(),
    }
}
