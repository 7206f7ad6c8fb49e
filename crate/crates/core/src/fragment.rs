//! End-to-end fragmentation: resample, extract features, decode, and turn the
//! decoded state path into typed segments with refined segment points.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{self, FeatureConfig, FeatureError, ObservationSeq};
use crate::geometry::{self, GeometryError, RawStroke, ResampleConfig, ResampledStroke};
use crate::hmm::{self, HmmError, StatePath, TrellisStep};
use crate::model::{HmmModel, StateKind, SECTORS};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FragError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Feature(#[from] FeatureError),
    #[error(transparent)]
    Decode(#[from] HmmError),
}

/// Type of one fragment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PrimitiveKind {
    Line { direction: u8 },
    ArcCw,
    ArcCcw,
}

impl PrimitiveKind {
    pub fn of_state(kind: StateKind) -> Option<Self> {
        match kind {
            StateKind::Line { direction } => Some(PrimitiveKind::Line { direction }),
            StateKind::ArcCw { .. } => Some(PrimitiveKind::ArcCw),
            StateKind::ArcCcw { .. } => Some(PrimitiveKind::ArcCcw),
            _ => None,
        }
    }

    pub fn is_arc(self) -> bool {
        !matches!(self, PrimitiveKind::Line { .. })
    }

    pub fn direction(self) -> Option<u8> {
        match self {
            PrimitiveKind::Line { direction } => Some(direction),
            _ => None,
        }
    }

    /// Name used in the serialized formats.
    pub fn name(self) -> &'static str {
        match self {
            PrimitiveKind::Line { .. } => "line",
            PrimitiveKind::ArcCw => "arc_cw",
            PrimitiveKind::ArcCcw => "arc_ccw",
        }
    }
}

impl fmt::Display for PrimitiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PrimitiveKind::Line { direction } => write!(f, "line[{direction}]"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: PrimitiveKind,
    pub raw_start: usize,
    pub raw_end: usize,
    /// Resampled indices `[start, end)` decoded as this primitive.
    pub resampled_range: (usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fragmentation<T> {
    pub segments: Vec<Segment>,
    /// Raw indices between consecutive segments; the stroke ends are implicit.
    pub segment_points: Vec<usize>,
    /// Raw index of each segment point before curvature refinement.
    pub candidates: Vec<usize>,
    pub path: StatePath<T>,
    pub step_d: T,
}

/// How the resampling step is picked for each stroke.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum StepPolicy<T> {
    Adaptive(ResampleConfig<T>),
    Fixed { step: T },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FragConfig<T> {
    pub step: StepPolicy<T>,
    pub features: FeatureConfig,
    /// Primitive runs shorter than this many observations join a neighbour.
    pub min_run: usize,
    /// Equal-kind runs separated by at most this many boundary observations merge.
    pub max_boundary_run: usize,
    /// Raw points searched on each side of a candidate; `None` covers 1.5 steps.
    pub refine_window: Option<usize>,
    /// Half window of the raw curvature used for refinement; `None` spans one step.
    pub refine_half_window: Option<usize>,
    /// Standard deviation of the arc-length smoothing applied to the raw points
    /// before resampling, in steps; zero disables it.
    pub smoothing: T,
}

impl<T: Scalar> Default for FragConfig<T> {
    fn default() -> Self {
        Self {
            step: StepPolicy::Adaptive(ResampleConfig::default()),
            features: FeatureConfig::default(),
            min_run: 3,
            max_boundary_run: 3,
            refine_window: None,
            refine_half_window: None,
            smoothing: T::lit(0.75),
        }
    }
}

impl<T: Scalar> FragConfig<T> {
    pub fn fixed_step(step: T) -> Self {
        Self { step: StepPolicy::Fixed { step }, ..Self::default() }
    }

    pub fn step_for(&self, stroke: &RawStroke<T>) -> T {
        match &self.step {
            StepPolicy::Adaptive(cfg) => geometry::choose_resample_step(stroke, cfg),
            StepPolicy::Fixed { step } => *step,
        }
    }

    fn windows(&self, raw: &RawStroke<T>, step_d: T) -> (usize, usize) {
        let spacing = raw.median_spacing();
        let in_raw = |steps: T| (steps * step_d / spacing).to_usize().unwrap_or(usize::MAX);
        let refine = self.refine_window.unwrap_or_else(|| in_raw(T::lit(1.5)).saturating_add(1).max(1));
        let half = self
            .refine_half_window
            .unwrap_or_else(|| (step_d / spacing).round().to_usize().unwrap_or(1).max(1));
        (refine, half)
    }
}

/// Everything computed along the way, for debugging and inspection.
#[derive(Debug, Clone)]
pub struct Traced<T> {
    pub fragmentation: Fragmentation<T>,
    pub resampled: ResampledStroke<T>,
    pub observations: ObservationSeq<T>,
    pub trace: Vec<TrellisStep<T>>,
}

pub fn fragment<T: Scalar>(
    stroke: &RawStroke<T>,
    model: &HmmModel<T>,
    config: &FragConfig<T>,
) -> Result<Fragmentation<T>, FragError> {
    fragment_traced(stroke, model, config).map(|t| t.fragmentation)
}

pub fn fragment_traced<T: Scalar>(
    stroke: &RawStroke<T>,
    model: &HmmModel<T>,
    config: &FragConfig<T>,
) -> Result<Traced<T>, FragError> {
    let step_d = config.step_for(stroke);
    let smoothed = geometry::smooth(stroke, config.smoothing * step_d);
    let resampled = geometry::resample(&smoothed, step_d)?;
    let observations = features::extract_observations(&resampled, &config.features)?;
    let out = hmm::viterbi_with_trace(&model.hmm, &model.emission_matrix(&observations))?;
    let kinds: Vec<StateKind> = out.path.states.iter().map(|&s| model.kind(s)).collect();
    let mut fragmentation = segments_from_path(&kinds, &resampled, &smoothed, config);
    fragmentation.path = out.path;
    Ok(Traced { fragmentation, resampled, observations, trace: out.steps })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Label {
    Primitive(PrimitiveKind),
    Boundary,
}

#[derive(Debug, Clone, Copy)]
struct Run {
    label: Label,
    start: usize,
    end: usize,
}

impl Run {
    fn len(&self) -> usize {
        self.end - self.start
    }

    fn primitive(&self) -> Option<PrimitiveKind> {
        match self.label {
            Label::Primitive(k) => Some(k),
            Label::Boundary => None,
        }
    }
}

fn collapse(labels: &[Label]) -> Vec<Run> {
    let mut runs: Vec<Run> = Vec::new();
    for (i, &label) in labels.iter().enumerate() {
        match runs.last_mut() {
            Some(r) if r.label == label => r.end = i + 1,
            _ => runs.push(Run { label, start: i, end: i + 1 }),
        }
    }
    runs
}

fn relabel(labels: &mut [Label], start: usize, end: usize, label: Label) {
    labels[start..end].iter_mut().for_each(|l| *l = label);
}

/// Turns primitive runs shorter than `min_run` into boundary, keeping the
/// longest run when every run is short.
fn demote_short_runs(labels: &mut [Label], min_run: usize) {
    let runs = collapse(labels);
    let prims: Vec<Run> = runs.into_iter().filter(|r| r.primitive().is_some()).collect();
    if prims.iter().all(|r| r.len() < min_run) {
        if let Some(keep) = prims.iter().max_by_key(|r| (r.len(), std::cmp::Reverse(r.start))) {
            for r in prims.iter().filter(|r| r.start != keep.start) {
                relabel(labels, r.start, r.end, Label::Boundary);
            }
        }
        return;
    }
    for r in prims.iter().filter(|r| r.len() < min_run) {
        relabel(labels, r.start, r.end, Label::Boundary);
    }
}

/// Merges equal-kind primitive runs separated by a short boundary run, unless
/// the direction jumps across it (arcs whose sectors differ by more than one).
fn merge_across_short_boundaries(labels: &mut [Label], kinds: &[StateKind], max_boundary_run: usize) {
    let runs = collapse(labels);
    for w in runs.windows(3) {
        let (a, b, c) = (w[0], w[1], w[2]);
        if b.label == Label::Boundary && b.len() <= max_boundary_run && a.primitive().is_some() && a.label == c.label
        {
            let continuous = match (kinds[a.end - 1].sector(), kinds[c.start].sector()) {
                (Some(x), Some(y)) => matches!((y + SECTORS - x) % SECTORS, 0 | 1 | 7),
                _ => true,
            };
            if continuous {
                relabel(labels, b.start, b.end, a.label);
            }
        }
    }
}

/// Most frequent line direction among the states of a run (lowest on ties).
fn dominant_direction(kinds: &[StateKind]) -> Option<u8> {
    let mut counts = [0usize; 8];
    for k in kinds {
        if let StateKind::Line { direction } = k {
            counts[*direction as usize] += 1;
        }
    }
    let (best, &n) = counts.iter().enumerate().max_by_key(|&(d, n)| (*n, std::cmp::Reverse(d)))?;
    (n > 0).then_some(best as u8)
}

/// Converts a decoded state sequence into segments over the raw stroke.
///
/// Boundary states (connectors and line corners) mark candidate segment points
/// at their curvature-weighted centre; direct switches between primitive kinds
/// mark one at the switch. Candidates are then moved to the raw point of maximum
/// curvature nearby, except at a switch between arcs of opposite orientation,
/// where the nearest curvature sign change is used instead.
///
/// The returned `path` holds the state indices of `kinds` with a zero score;
/// [`fragment`] replaces it with the decoded path.
pub fn segments_from_path<T: Scalar>(
    kinds: &[StateKind],
    rs: &ResampledStroke<T>,
    raw: &RawStroke<T>,
    config: &FragConfig<T>,
) -> Fragmentation<T> {
    assert_eq!(kinds.len(), rs.len(), "one state per resampled point");
    let n = kinds.len();
    let raw_last = raw.len() - 1;
    let mut labels: Vec<Label> = kinds
        .iter()
        .map(|&k| PrimitiveKind::of_state(k).map_or(Label::Boundary, Label::Primitive))
        .collect();

    if labels.iter().all(|l| *l == Label::Boundary) {
        let kind = fallback_kind(kinds, raw, config);
        labels.fill(Label::Primitive(kind));
    }
    demote_short_runs(&mut labels, config.min_run.max(1));
    merge_across_short_boundaries(&mut labels, kinds, config.max_boundary_run);

    let runs = collapse(&labels);
    let prims: Vec<Run> = runs.iter().copied().filter(|r| r.primitive().is_some()).collect();
    let (refine, half) = config.windows(raw, rs.step_d);
    let magnitude: Vec<T> = (0..n).map(|i| features::unclamped_curvature(&rs.points, i).abs()).collect();

    let mut kinds_out = vec![run_kind(&prims[0], kinds)];
    let mut points = Vec::new();
    let mut candidates = Vec::new();
    let mut ranges = vec![(0usize, prims[0].end)];
    for w in prims.windows(2) {
        let (a, b) = (w[0], w[1]);
        let cand = if b.start > a.end {
            weighted_center(&magnitude, a.end, b.start)
        } else {
            b.start
        };
        let cand_raw = rs.origin_index[cand.min(n - 1)];
        let (ka, kb) = (run_kind(&a, kinds), run_kind(&b, kinds));
        let inflection = ka.is_arc() && kb.is_arc() && ka != kb;
        let refined = if inflection {
            refine_to_sign_change(raw, cand_raw, refine, half)
        } else {
            refine_to_max_curvature(raw, cand_raw, refine, half)
        }
        .clamp(1, raw_last.saturating_sub(1).max(1));

        let last_point = points.last().copied().unwrap_or(0);
        if refined <= last_point || refined >= raw_last {
            // collides with the previous boundary: the earlier segment absorbs this one
            ranges.last_mut().expect("non-empty").1 = b.end;
            continue;
        }
        points.push(refined);
        candidates.push(cand_raw);
        kinds_out.push(kb);
        ranges.push((b.start, b.end));
    }
    ranges.last_mut().expect("non-empty").1 = n;

    let mut segments = Vec::with_capacity(kinds_out.len());
    for (k, (&kind, &range)) in kinds_out.iter().zip(&ranges).enumerate() {
        let raw_start = if k == 0 { 0 } else { points[k - 1] };
        let raw_end = points.get(k).copied().unwrap_or(raw_last);
        segments.push(Segment { kind, raw_start, raw_end, resampled_range: range });
    }

    Fragmentation {
        segments,
        segment_points: points,
        candidates,
        path: StatePath { states: kinds.iter().map(|k| k.index()).collect(), log_score: T::zero() },
        step_d: rs.step_d,
    }
}

fn run_kind(run: &Run, kinds: &[StateKind]) -> PrimitiveKind {
    let kind = run.primitive().expect("primitive run");
    match kind {
        PrimitiveKind::Line { direction } => PrimitiveKind::Line {
            direction: dominant_direction(&kinds[run.start..run.end]).unwrap_or(direction),
        },
        other => other,
    }
}

/// Kind used when a path never leaves boundary states.
fn fallback_kind<T: Scalar>(kinds: &[StateKind], raw: &RawStroke<T>, config: &FragConfig<T>) -> PrimitiveKind {
    if let Some(StateKind::LineCorner { from, .. }) = kinds.first() {
        return PrimitiveKind::Line { direction: *from };
    }
    let chord = config.features.handedness.to_feature_frame(raw.xy(raw.len() - 1) - raw.xy(0));
    let angle = chord.y.atan2(chord.x).to_f64_lossy();
    let sector = (angle / std::f64::consts::FRAC_PI_4).round().rem_euclid(8.0) as u8;
    PrimitiveKind::Line { direction: sector }
}

/// Index nearest to the `|f3|`-weighted centre of `[start, end)`.
fn weighted_center<T: Scalar>(magnitude: &[T], start: usize, end: usize) -> usize {
    let (mut num, mut den) = (T::zero(), T::zero());
    for i in start..end {
        num += magnitude[i] * T::from_usize_lossy(i);
        den += magnitude[i];
    }
    if den > T::zero() {
        (num / den).round().to_usize().unwrap_or(start).clamp(start, end - 1)
    } else {
        (start + end - 1) / 2
    }
}

fn refine_to_max_curvature<T: Scalar>(raw: &RawStroke<T>, cand: usize, window: usize, half: usize) -> usize {
    let lo = cand.saturating_sub(window);
    let hi = (cand + window).min(raw.len() - 1);
    let mut best = cand;
    let mut best_val = geometry::raw_curvature(raw, cand, half);
    for i in lo..=hi {
        let v = geometry::raw_curvature(raw, i, half);
        let closer = i.abs_diff(cand) < best.abs_diff(cand);
        if v > best_val || (v == best_val && closer) {
            best = i;
            best_val = v;
        }
    }
    best
}

fn refine_to_sign_change<T: Scalar>(raw: &RawStroke<T>, cand: usize, window: usize, half: usize) -> usize {
    let lo = cand.saturating_sub(window);
    let hi = (cand + window).min(raw.len() - 1);
    let signed: Vec<T> = (lo..=hi).map(|i| geometry::raw_signed_curvature(raw, i, half)).collect();
    let mut best: Option<usize> = None;
    for k in 1..signed.len() {
        if (signed[k - 1] > T::zero()) != (signed[k] > T::zero()) {
            // pick the side closer to zero
            let i = if signed[k - 1].abs() <= signed[k].abs() { lo + k - 1 } else { lo + k };
            if best.is_none_or(|b| i.abs_diff(cand) < b.abs_diff(cand)) {
                best = Some(i);
            }
        }
    }
    best.unwrap_or(cand)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Point2, RawPoint};

    fn line_kind(d: u8) -> StateKind {
        StateKind::Line { direction: d }
    }

    /// Raw stroke and resampled stroke sharing the same points (unit spacing).
    fn strokes(points: &[Point2<f64>]) -> (RawStroke<f64>, ResampledStroke<f64>) {
        let raw = RawStroke::from_xy("t", points).unwrap();
        let rs = ResampledStroke { points: points.to_vec(), step_d: 1.0, origin_index: (0..points.len()).collect() };
        (raw, rs)
    }

    fn l_points(leg: usize) -> Vec<Point2<f64>> {
        // down (y-up frame) then right, screen frame flips y
        let mut p: Vec<_> = (0..=leg).map(|i| Point2::new(0.0, i as f64)).collect();
        p.extend((1..=leg).map(|i| Point2::new(i as f64, leg as f64)));
        p
    }

    fn config() -> FragConfig<f64> {
        FragConfig { refine_window: Some(2), refine_half_window: Some(2), ..FragConfig::fixed_step(1.0) }
    }

    #[test]
    fn constant_line_path_is_one_segment() {
        let pts: Vec<_> = (0..12).map(|i| Point2::new(i as f64, 0.0)).collect();
        let (raw, rs) = strokes(&pts);
        let f = segments_from_path(&vec![line_kind(0); 12], &rs, &raw, &config());
        assert_eq!(f.segments.len(), 1);
        assert!(f.segment_points.is_empty());
        assert_eq!((f.segments[0].raw_start, f.segments[0].raw_end), (0, 11));
    }

    #[test]
    fn corner_state_splits_lines() {
        let pts = l_points(9);
        let (raw, rs) = strokes(&pts);
        let mut kinds = vec![line_kind(6); 9];
        kinds.push(StateKind::LineCorner { from: 6, to: 0 });
        kinds.extend(vec![line_kind(0); 9]);
        let f = segments_from_path(&kinds, &rs, &raw, &config());
        assert_eq!(f.segments.len(), 2);
        assert_eq!(f.segment_points, vec![9]);
        assert_eq!(f.segments[0].kind, PrimitiveKind::Line { direction: 6 });
        assert_eq!(f.segments[1].kind, PrimitiveKind::Line { direction: 0 });
        assert_eq!(f.segments[0].raw_end, f.segments[1].raw_start);
    }

    #[test]
    fn candidate_is_refined_to_max_curvature() {
        let pts = l_points(9);
        let (raw, rs) = strokes(&pts);
        // corner state one sample late
        let mut kinds = vec![line_kind(6); 10];
        kinds.push(StateKind::LineCorner { from: 6, to: 0 });
        kinds.extend(vec![line_kind(0); 8]);
        let f = segments_from_path(&kinds, &rs, &raw, &config());
        assert_eq!(f.candidates, vec![10]);
        assert_eq!(f.segment_points, vec![9]);
    }

    #[test]
    fn arc_sector_progression_is_one_segment() {
        let pts: Vec<_> = (0..15).map(|i| Point2::new((i as f64 / 10.0).cos(), (i as f64 / 10.0).sin())).collect();
        let (raw, rs) = strokes(&pts);
        let kinds: Vec<_> = (0..15).map(|i| StateKind::ArcCcw { sector: (i / 5) as u8 }).collect();
        let f = segments_from_path(&kinds, &rs, &raw, &config());
        assert_eq!(f.segments.len(), 1);
        assert_eq!(f.segments[0].kind, PrimitiveKind::ArcCcw);
    }

    #[test]
    fn short_runs_are_absorbed() {
        let pts: Vec<_> = (0..20).map(|i| Point2::new(i as f64, 0.0)).collect();
        let (raw, rs) = strokes(&pts);
        let mut kinds = vec![line_kind(0); 8];
        kinds.extend([StateKind::ArcCw { sector: 0 }; 2]);
        kinds.extend(vec![line_kind(0); 10]);
        let f = segments_from_path(&kinds, &rs, &raw, &config());
        assert_eq!(f.segments.len(), 1);
        assert_eq!(f.segments[0].kind, PrimitiveKind::Line { direction: 0 });
    }

    #[test]
    fn short_boundary_between_equal_kinds_merges() {
        let pts: Vec<_> = (0..20).map(|i| Point2::new(i as f64, 0.0)).collect();
        let (raw, rs) = strokes(&pts);
        let mut kinds = vec![line_kind(0); 10];
        kinds.push(StateKind::Connector1);
        kinds.extend(vec![line_kind(0); 9]);
        assert_eq!(segments_from_path(&kinds, &rs, &raw, &config()).segments.len(), 1);
        let strict = FragConfig { max_boundary_run: 0, ..config() };
        let f = segments_from_path(&kinds, &rs, &raw, &strict);
        assert_eq!(f.segments.len(), 2);
        assert_eq!(f.segments[0].kind, f.segments[1].kind);
    }

    #[test]
    fn direct_switch_emits_point() {
        let pts = l_points(9);
        let (raw, rs) = strokes(&pts);
        let mut kinds = vec![line_kind(6); 10];
        kinds.extend(vec![line_kind(0); 9]);
        let f = segments_from_path(&kinds, &rs, &raw, &config());
        assert_eq!(f.segment_points, vec![9]);
    }

    #[test]
    fn all_boundary_path_falls_back_to_one_line() {
        let pts: Vec<_> = (0..6).map(|i| Point2::new(i as f64, 0.0)).collect();
        let (raw, rs) = strokes(&pts);
        let kinds = vec![StateKind::LineCorner { from: 2, to: 3 }; 6];
        let f = segments_from_path(&kinds, &rs, &raw, &config());
        assert_eq!(f.segments.len(), 1);
        assert_eq!(f.segments[0].kind, PrimitiveKind::Line { direction: 2 });
    }

    #[test]
    fn inflection_refines_to_sign_change() {
        // two quarter circles of opposite orientation joined at x = 0
        let r = 8.0;
        let mut pts = Vec::new();
        for i in (0..=12).rev() {
            let a = i as f64 / 12.0 * std::f64::consts::FRAC_PI_2;
            pts.push(Point2::new(-r * a.sin(), r * (1.0 - a.cos())));
        }
        for i in 1..=12 {
            let a = i as f64 / 12.0 * std::f64::consts::FRAC_PI_2;
            pts.push(Point2::new(r * a.sin(), -r * (1.0 - a.cos())));
        }
        let raw = RawStroke::new("s", pts.iter().map(|p| RawPoint::new(p.x, p.y)).collect()).unwrap();
        let rs = ResampledStroke { points: pts.clone(), step_d: 1.0, origin_index: (0..pts.len()).collect() };
        let mut kinds = vec![StateKind::ArcCw { sector: 0 }; 14];
        kinds.extend(vec![StateKind::ArcCcw { sector: 0 }; 11]);
        let f = segments_from_path(&kinds, &rs, &raw, &FragConfig { refine_window: Some(3), ..config() });
        assert_eq!(f.segments.len(), 2);
        assert_eq!(f.segment_points, vec![12]);
    }
}
