//! JSON exchange formats: strokes, ground truth and fragmentations.
//!
//! Stroke file:
//! ```json
//! {"strokes": [{"id": "a", "points": [[0, 0], [1, 0, 16.5]]}]}
//! ```
//! Points are `[x, y]` or `[x, y, t]` with `t` in milliseconds.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fragment::{Fragmentation, PrimitiveKind, Segment};
use crate::geometry::{GeometryError, RawPoint, RawStroke};
use crate::scalar::Scalar;
use crate::synth::GroundTruth;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Stroke(#[from] GeometryError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointJson {
    Xy([f64; 2]),
    Xyt([f64; 3]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrokeJson {
    pub id: String,
    pub points: Vec<PointJson>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrokeFile {
    pub strokes: Vec<StrokeJson>,
}

impl StrokeJson {
    pub fn to_stroke<T: Scalar>(&self) -> Result<RawStroke<T>, GeometryError> {
        let points = self
            .points
            .iter()
            .map(|p| match *p {
                PointJson::Xy([x, y]) => RawPoint::new(T::lit(x), T::lit(y)),
                PointJson::Xyt([x, y, t]) => RawPoint::with_time(T::lit(x), T::lit(y), t),
            })
            .collect();
        RawStroke::new(self.id.clone(), points)
    }

    pub fn from_stroke<T: Scalar>(stroke: &RawStroke<T>) -> Self {
        let points = stroke
            .points()
            .iter()
            .map(|p| {
                let (x, y) = (p.x.to_f64_lossy(), p.y.to_f64_lossy());
                match p.t {
                    Some(t) => PointJson::Xyt([x, y, t]),
                    None => PointJson::Xy([x, y]),
                }
            })
            .collect();
        Self { id: stroke.id().to_owned(), points }
    }
}

impl StrokeFile {
    pub fn parse(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn from_strokes<T: Scalar>(strokes: &[RawStroke<T>]) -> Self {
        Self { strokes: strokes.iter().map(StrokeJson::from_stroke).collect() }
    }

    /// Validates every stroke; the first invalid one is reported with its id.
    pub fn to_strokes<T: Scalar>(&self) -> Result<Vec<RawStroke<T>>, GeometryError> {
        self.strokes.iter().map(StrokeJson::to_stroke).collect()
    }
}

/// Parses and validates a stroke file in one go.
pub fn read_strokes<T: Scalar>(text: &str) -> Result<Vec<RawStroke<T>>, IoError> {
    Ok(StrokeFile::parse(text)?.to_strokes()?)
}

/// Sidecar of a generated corpus, parallel to its stroke file.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthFile {
    pub truths: Vec<GroundTruth>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KindName {
    Line,
    ArcCw,
    ArcCcw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentJson {
    pub kind: KindName,
    /// Line direction sector, `null` for arcs.
    pub direction: Option<u8>,
    pub raw_start: usize,
    pub raw_end: usize,
}

impl SegmentJson {
    pub fn primitive(&self) -> Option<PrimitiveKind> {
        match (self.kind, self.direction) {
            (KindName::Line, Some(direction)) if direction < 8 => Some(PrimitiveKind::Line { direction }),
            (KindName::ArcCw, None) => Some(PrimitiveKind::ArcCw),
            (KindName::ArcCcw, None) => Some(PrimitiveKind::ArcCcw),
            _ => None,
        }
    }
}

impl From<&Segment> for SegmentJson {
    fn from(s: &Segment) -> Self {
        let kind = match s.kind {
            PrimitiveKind::Line { .. } => KindName::Line,
            PrimitiveKind::ArcCw => KindName::ArcCw,
            PrimitiveKind::ArcCcw => KindName::ArcCcw,
        };
        Self { kind, direction: s.kind.direction(), raw_start: s.raw_start, raw_end: s.raw_end }
    }
}

/// Result for one stroke as written by the `fragment` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FragmentationJson {
    pub id: String,
    pub step_d: f64,
    pub segment_points: Vec<usize>,
    pub segments: Vec<SegmentJson>,
}

impl FragmentationJson {
    pub fn new<T: Scalar>(id: &str, frag: &Fragmentation<T>) -> Self {
        Self {
            id: id.to_owned(),
            step_d: frag.step_d.to_f64_lossy(),
            segment_points: frag.segment_points.clone(),
            segments: frag.segments.iter().map(SegmentJson::from).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FragmentationFile {
    pub results: Vec<FragmentationJson>,
}
