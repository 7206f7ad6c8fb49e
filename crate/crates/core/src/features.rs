//! The four local geometry features computed on a resampled stroke.
//!
//! For resampled point `p_i`:
//!
//! * `f1`, `f2`: cosine and sine of the chord `p_{i-1} p_{i+1}`;
//! * `f3`: signed distance from `p_i` to the chord `p_{i-2} p_{i+2}` (positive for a
//!   clockwise turn), clamped to `±2d`;
//! * `f4`: turning angle at `p_i`, i.e. `π` minus the interior angle between
//!   `p_i → p_{i-1}` and `p_i → p_{i+1}`.
//!
//! The formulas are evaluated in a y-up frame. Ink arriving in screen coordinates
//! (y down) is mirrored first, so direction sectors and the clockwise sign always
//! refer to what the writer sees.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Point2, ResampledStroke};
use crate::scalar::Scalar;

/// Points needed by the curvature window.
pub const WINDOW: usize = 5;

const CHORD_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FeatureError {
    #[error("degenerate chord at point {0}")]
    DegenerateChord(usize),
    #[error("resampled stroke has {0} point(s), the feature window needs {WINDOW}")]
    TooShort(usize),
}

/// Orientation of the input coordinate system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Handedness {
    /// Screen/tablet coordinates, y grows downward.
    #[default]
    ScreenYDown,
    /// Mathematical coordinates, y grows upward.
    MathYUp,
}

impl Handedness {
    /// Maps a device point into the y-up frame the features are defined in.
    #[inline]
    pub fn to_feature_frame<T: Scalar>(self, p: Point2<T>) -> Point2<T> {
        match self {
            Handedness::ScreenYDown => Point2::new(p.x, -p.y),
            Handedness::MathYUp => p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureConfig {
    pub handedness: Handedness,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation<T> {
    pub f1: T,
    pub f2: T,
    pub f3: T,
    pub f4: T,
    /// Direction was borrowed from a neighbour because the chord vanished.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub degenerate: bool,
}

impl<T: Scalar> Observation<T> {
    pub fn new(f1: T, f2: T, f3: T, f4: T) -> Self {
        Self { f1, f2, f3, f4, degenerate: false }
    }

    pub fn as_array(&self) -> [T; 4] {
        [self.f1, self.f2, self.f3, self.f4]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObservationSeq<T> {
    pub observations: Vec<Observation<T>>,
    pub step_d: T,
}

impl<T: Scalar> ObservationSeq<T> {
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// CSV dump `i,f1,f2,f3,f4` with `f3` in device units.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,f1,f2,f3,f4\n");
        for (i, o) in self.observations.iter().enumerate() {
            out.push_str(&format!("{i},{},{},{},{}\n", o.f1, o.f2, o.f3, o.f4));
        }
        out
    }
}

/// `(cos φ, sin φ)` of the chord `p_{i-1} p_{i+1}`; `i` is clamped to `[1, len-2]`.
pub fn direction_features<T: Scalar>(points: &[Point2<T>], i: usize) -> Result<(T, T), FeatureError> {
    let i = i.clamp(1, points.len().saturating_sub(2).max(1));
    let chord = points[i + 1] - points[i - 1];
    let len = chord.norm();
    if len < T::lit(CHORD_EPS) {
        return Err(FeatureError::DegenerateChord(i));
    }
    Ok((chord.x / len, chord.y / len))
}

/// Signed distance from `p_i` to the chord `p_{i-2} p_{i+2}`, clamped to `±2·step_d`.
///
/// Positive when `p_i` lies left of the chord, which is a clockwise turn in the
/// y-up frame. `i` is clamped to `[2, len-3]`; a vanishing chord yields 0.
pub fn curvature_feature<T: Scalar>(points: &[Point2<T>], i: usize, step_d: T) -> T {
    let bound = step_d + step_d;
    unclamped_curvature(points, i).max(-bound).min(bound)
}

/// [`curvature_feature`] without the `±2d` clamp.
pub fn unclamped_curvature<T: Scalar>(points: &[Point2<T>], i: usize) -> T {
    let i = i.clamp(2, points.len().saturating_sub(3).max(2));
    let a = points[i - 2];
    let chord = points[i + 2] - a;
    let len = chord.norm();
    if len < T::lit(CHORD_EPS) {
        return T::zero();
    }
    chord.cross(points[i] - a) / len
}

/// Turning angle at `p_i` in `[0, π]`; `i` is clamped to `[1, len-2]`.
pub fn direction_change<T: Scalar>(points: &[Point2<T>], i: usize) -> T {
    let i = i.clamp(1, points.len().saturating_sub(2).max(1));
    let incoming = points[i] - points[i - 1];
    let outgoing = points[i + 1] - points[i];
    let eps = T::lit(CHORD_EPS);
    if incoming.norm() < eps || outgoing.norm() < eps {
        return T::zero();
    }
    incoming.cross(outgoing).abs().atan2(incoming.dot(outgoing))
}

/// One observation per resampled point, boundary points replicating the nearest
/// index whose window fits.
pub fn extract_observations<T: Scalar>(
    rs: &ResampledStroke<T>,
    config: &FeatureConfig,
) -> Result<ObservationSeq<T>, FeatureError> {
    let n = rs.len();
    if n < WINDOW {
        return Err(FeatureError::TooShort(n));
    }
    let pts: Vec<Point2<T>> = rs.points.iter().map(|&p| config.handedness.to_feature_frame(p)).collect();

    let mut dirs: Vec<Option<(T, T)>> = (0..n).map(|i| direction_features(&pts, i).ok()).collect();
    // Retraced chords borrow the previous direction, or the next one at the start.
    let first_valid = dirs.iter().position(Option::is_some);
    let degenerate: Vec<bool> = dirs.iter().map(Option::is_none).collect();
    let mut carry = first_valid.and_then(|k| dirs[k]).unwrap_or((T::one(), T::zero()));
    for d in dirs.iter_mut() {
        match d {
            Some(v) => carry = *v,
            None => *d = Some(carry),
        }
    }

    let observations = (0..n)
        .map(|i| {
            let (f1, f2) = dirs[i].expect("filled above");
            Observation {
                f1,
                f2,
                f3: curvature_feature(&pts, i, rs.step_d),
                f4: direction_change(&pts, i),
                degenerate: degenerate[i],
            }
        })
        .collect();
    Ok(ObservationSeq { observations, step_d: rs.step_d })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn pts(xy: &[(f64, f64)]) -> Vec<Point2<f64>> {
        xy.iter().map(|&(x, y)| Point2::new(x, y)).collect()
    }

    /// Analytic circle sampled at equal arc length `d`, traversed anticlockwise
    /// (y-up) when `ccw`.
    fn circle_arc_spacing(r: f64, d: f64, n: usize, ccw: bool) -> Vec<Point2<f64>> {
        let s = if ccw { 1.0 } else { -1.0 };
        (0..n)
            .map(|k| {
                let a = s * k as f64 * d / r;
                Point2::new(r * a.cos(), r * a.sin())
            })
            .collect()
    }

    #[test]
    fn direction_of_basic_lines() {
        let h = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)]);
        assert_eq!(direction_features(&h, 1).unwrap(), (1.0, 0.0));
        let diag = pts(&[(0.0, 0.0), (1.0, 1.0), (2.0, 2.0)]);
        let (c, s) = direction_features(&diag, 1).unwrap();
        assert_relative_eq!(c, 0.5f64.sqrt(), epsilon = 1e-15);
        assert_relative_eq!(s, 0.5f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn direction_matches_circle_tangent() {
        let (r, d) = (20.0, 1.0);
        let p = circle_arc_spacing(r, d, 40, true);
        for i in 1..39 {
            let (c, s) = direction_features(&p, i).unwrap();
            let a = i as f64 * d / r;
            // tangent of an anticlockwise circle at angle a
            assert_relative_eq!(c, -a.sin(), epsilon = 1e-9);
            assert_relative_eq!(s, a.cos(), epsilon = 1e-9);
        }
    }

    #[test]
    fn retrace_is_degenerate() {
        let p = pts(&[(0.0, 0.0), (1.0, 0.0), (0.0, 0.0)]);
        assert_eq!(direction_features(&p, 1), Err(FeatureError::DegenerateChord(1)));
    }

    #[test]
    fn collinear_features_vanish() {
        let p = pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)]);
        assert_eq!(curvature_feature(&p, 2, 1.0), 0.0);
        assert_eq!(direction_change(&p, 2), 0.0);
    }

    #[test]
    fn sagitta_on_analytic_circles() {
        for (r, expect) in [(10.0, 0.19933), (20.0, 0.09992), (50.0, 0.039995)] {
            let p = circle_arc_spacing(r, 1.0, 9, false);
            let h = curvature_feature(&p, 4, 1.0);
            let exact = r * (1.0 - (2.0 / r).cos());
            assert_relative_eq!(h, exact, epsilon = 1e-9);
            assert!((h - expect).abs() < 5e-5, "R={r}: {h}");
            // anticlockwise flips the sign
            let p = circle_arc_spacing(r, 1.0, 9, true);
            assert_relative_eq!(curvature_feature(&p, 4, 1.0), -exact, epsilon = 1e-9);
        }
    }

    #[test]
    fn turning_angle_cases() {
        let corner = pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0)]);
        assert_relative_eq!(direction_change(&corner, 1), FRAC_PI_2, epsilon = 1e-15);
        let back = pts(&[(0.0, 0.0), (1.0, 0.0), (0.5, 0.0)]);
        assert_relative_eq!(direction_change(&back, 1), PI, epsilon = 1e-15);
        // chord spacing d on a circle of radius 20d
        let r: f64 = 20.0;
        let step = 2.0 * (1.0 / (2.0 * r)).asin();
        let p: Vec<_> = (0..3).map(|k| Point2::new(r * (k as f64 * step).cos(), r * (k as f64 * step).sin())).collect();
        assert_relative_eq!(direction_change(&p, 1), 2.0 * (1.0f64 / 40.0).asin(), epsilon = 1e-12);
        assert!((direction_change(&p, 1) - 0.0500052).abs() < 1e-6);
    }

    #[test]
    fn curvature_is_clamped() {
        let p = pts(&[(0.0, 0.0), (1.0, 0.0), (1.0, 5.0), (2.0, 0.0), (3.0, 0.0)]);
        assert_eq!(curvature_feature(&p, 2, 1.0), 2.0);
        assert_eq!(unclamped_curvature(&p, 2), 5.0);
    }

    #[test]
    fn too_short_and_straight() {
        let rs = |n: usize| ResampledStroke {
            points: (0..n).map(|i| Point2::new(i as f64, 0.0)).collect(),
            step_d: 1.0,
            origin_index: (0..n).collect(),
        };
        let cfg = FeatureConfig::default();
        assert_eq!(extract_observations(&rs(4), &cfg), Err(FeatureError::TooShort(4)));
        let seq = extract_observations(&rs(11), &cfg).unwrap();
        assert_eq!(seq.len(), 11);
        for o in &seq.observations {
            assert_eq!(o.as_array(), [1.0, 0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn screen_frame_is_mirrored() {
        // visually ascending in screen coordinates means decreasing y
        let rs = ResampledStroke {
            points: (0..6).map(|i| Point2::new(i as f64, -(i as f64))).collect(),
            step_d: 2f64.sqrt(),
            origin_index: (0..6).collect(),
        };
        let screen = extract_observations(&rs, &FeatureConfig::default()).unwrap();
        assert!(screen.observations[2].f2 > 0.7);
        let math = extract_observations(&rs, &FeatureConfig { handedness: Handedness::MathYUp }).unwrap();
        assert!(math.observations[2].f2 < -0.7);
    }

    #[test]
    fn degenerate_direction_reuses_previous() {
        let rs = ResampledStroke {
            points: pts(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (2.0, 0.0), (1.0, 0.0), (0.0, 0.0)]),
            step_d: 1.0,
            origin_index: (0..7).collect(),
        };
        let cfg = FeatureConfig { handedness: Handedness::MathYUp };
        let seq = extract_observations(&rs, &cfg).unwrap();
        let o = seq.observations[3];
        assert!(o.degenerate);
        assert_eq!((o.f1, o.f2), (1.0, 0.0));
        assert_relative_eq!(o.f4, PI);
    }
}
