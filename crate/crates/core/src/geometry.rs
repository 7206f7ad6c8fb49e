//! Stroke representation, arc-length resampling and raw-point curvature.

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("stroke `{id}` has {len} distinct point(s), at least 2 are required")]
    TooFewPoints { id: String, len: usize },
    #[error("stroke `{id}` has a non-finite coordinate at point {index}")]
    NonFinite { id: String, index: usize },
    #[error("stroke `{id}` has a decreasing timestamp at point {index}")]
    TimestampOrder { id: String, index: usize },
    #[error("stroke `{id}` is shorter ({length}) than one resampling step ({step})")]
    DegenerateStroke { id: String, length: f64, step: f64 },
    #[error("resampling step must be positive and finite, got {0}")]
    InvalidStep(f64),
}

/// A plain 2-D point / vector.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, other: Self) -> T {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 3-D cross product.
    #[inline]
    pub fn cross(self, other: Self) -> T {
        self.x * other.y - self.y * other.x
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn distance(self, other: Self) -> T {
        (self - other).norm()
    }

    #[inline]
    pub fn lerp(self, other: Self, t: T) -> Self {
        self + (other - self) * t
    }

    pub fn cast<U: Scalar>(self) -> Point2<U> {
        Point2::new(U::lit(self.x.to_f64_lossy()), U::lit(self.y.to_f64_lossy()))
    }
}

impl<T: Scalar> Add for Point2<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Scalar> Sub for Point2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Scalar> Mul<T> for Point2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

/// Distance from `p` to the segment `a`-`b`.
pub fn point_segment_distance<T: Scalar>(p: Point2<T>, a: Point2<T>, b: Point2<T>) -> T {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 <= T::zero() {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).max(T::zero()).min(T::one());
    p.distance(a.lerp(b, t))
}

/// A device point as captured by a pen or tablet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawPoint<T> {
    pub x: T,
    pub y: T,
    /// Milliseconds, when the device reports it.
    pub t: Option<f64>,
}

impl<T: Scalar> RawPoint<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y, t: None }
    }

    pub fn with_time(x: T, y: T, t: f64) -> Self {
        Self { x, y, t: Some(t) }
    }

    #[inline]
    pub fn xy(&self) -> Point2<T> {
        Point2::new(self.x, self.y)
    }
}

/// Time-ordered points between one pen-down and pen-up.
///
/// Construction drops consecutive duplicate points, so every polyline edge has
/// positive length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RawStroke<T> {
    id: String,
    points: Vec<RawPoint<T>>,
}

impl<T: Scalar> RawStroke<T> {
    pub fn new(id: impl Into<String>, points: Vec<RawPoint<T>>) -> Result<Self, GeometryError> {
        let id = id.into();
        let mut kept: Vec<RawPoint<T>> = Vec::with_capacity(points.len());
        for (index, p) in points.into_iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() || p.t.is_some_and(|t| !t.is_finite()) {
                return Err(GeometryError::NonFinite { id, index });
            }
            if let Some(last) = kept.last() {
                if let (Some(t0), Some(t1)) = (last.t, p.t) {
                    if t1 < t0 {
                        return Err(GeometryError::TimestampOrder { id, index });
                    }
                }
                if last.x == p.x && last.y == p.y {
                    continue;
                }
            }
            kept.push(p);
        }
        if kept.len() < 2 {
            return Err(GeometryError::TooFewPoints { id, len: kept.len() });
        }
        Ok(Self { id, points: kept })
    }

    /// Builds a stroke from bare coordinates.
    pub fn from_xy(id: impl Into<String>, xy: &[Point2<T>]) -> Result<Self, GeometryError> {
        Self::new(id, xy.iter().map(|p| RawPoint::new(p.x, p.y)).collect())
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn points(&self) -> &[RawPoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    #[inline]
    pub fn xy(&self, i: usize) -> Point2<T> {
        self.points[i].xy()
    }

    /// Total polyline length.
    pub fn length(&self) -> T {
        self.points
            .windows(2)
            .fold(T::zero(), |acc, w| acc + w[0].xy().distance(w[1].xy()))
    }

    /// Cumulative arc length at every raw point.
    pub fn cumulative_length(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.points.len());
        let mut acc = T::zero();
        out.push(acc);
        for w in self.points.windows(2) {
            acc += w[0].xy().distance(w[1].xy());
            out.push(acc);
        }
        out
    }

    /// Median distance between consecutive raw points.
    pub fn median_spacing(&self) -> T {
        let mut gaps: Vec<T> = self
            .points
            .windows(2)
            .map(|w| w[0].xy().distance(w[1].xy()))
            .collect();
        gaps.sort_by(|a, b| a.partial_cmp(b).expect("finite spacing"));
        gaps[gaps.len() / 2]
    }

    /// Converts the coordinates to another scalar type.
    pub fn cast<U: Scalar>(&self) -> RawStroke<U> {
        RawStroke {
            id: self.id.clone(),
            points: self
                .points
                .iter()
                .map(|p| RawPoint {
                    x: U::lit(p.x.to_f64_lossy()),
                    y: U::lit(p.y.to_f64_lossy()),
                    t: p.t,
                })
                .collect(),
        }
    }
}

/// Equidistant (by arc length) re-parameterization of a raw stroke.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResampledStroke<T> {
    pub points: Vec<Point2<T>>,
    pub step_d: T,
    /// Per resampled point, the raw index nearest by arc length.
    pub origin_index: Vec<usize>,
}

impl<T: Scalar> ResampledStroke<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Walks the raw polyline by arc length and emits a point every `step_d`.
///
/// The first raw point is always emitted; the last raw point is appended when it
/// lies farther than `step_d / 2` (along the polyline) from the last emitted one.
pub fn resample<T: Scalar>(stroke: &RawStroke<T>, step_d: T) -> Result<ResampledStroke<T>, GeometryError> {
    if !(step_d > T::zero()) || !step_d.is_finite() {
        return Err(GeometryError::InvalidStep(step_d.to_f64_lossy()));
    }
    let cum = stroke.cumulative_length();
    let total = *cum.last().expect("stroke has points");
    if total < step_d {
        return Err(GeometryError::DegenerateStroke {
            id: stroke.id().to_owned(),
            length: total.to_f64_lossy(),
            step: step_d.to_f64_lossy(),
        });
    }

    let eps = T::lit(1e-9);
    let count = (total / step_d + eps).floor().to_usize().unwrap_or(0);
    let mut points = Vec::with_capacity(count + 2);
    let mut origin_index = Vec::with_capacity(count + 2);
    let mut seg = 0usize;
    let last = stroke.len() - 1;
    for m in 0..=count {
        let s = (step_d * T::from_usize_lossy(m)).min(total);
        while seg + 1 < last && cum[seg + 1] < s {
            seg += 1;
        }
        let (s0, s1) = (cum[seg], cum[seg + 1]);
        let t = if s1 > s0 { ((s - s0) / (s1 - s0)).max(T::zero()).min(T::one()) } else { T::zero() };
        points.push(stroke.xy(seg).lerp(stroke.xy(seg + 1), t));
        origin_index.push(if s - s0 <= s1 - s { seg } else { seg + 1 });
    }

    let emitted = step_d * T::from_usize_lossy(count);
    if total - emitted > step_d / T::lit(2.0) {
        points.push(stroke.xy(last));
        origin_index.push(last);
    }

    Ok(ResampledStroke { points, step_d, origin_index })
}

/// Knobs of the adaptive resampling-step rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResampleConfig<T> {
    /// Shortest primitive the step must resolve, as a fraction of stroke length.
    pub min_primitive_fraction: T,
    /// Observations such a primitive must receive.
    pub min_obs_per_primitive: usize,
    pub d_min_abs: T,
    pub d_max_abs: T,
}

impl<T: Scalar> Default for ResampleConfig<T> {
    fn default() -> Self {
        Self {
            min_primitive_fraction: T::lit(0.08),
            min_obs_per_primitive: 5,
            d_min_abs: T::lit(1e-6),
            d_max_abs: T::max_value(),
        }
    }
}

/// Resampling distance `fraction · L / min_obs`, clamped to the configured range.
///
/// The rule is a stand-in for choosing the step from a histogram of primitive
/// lengths: any primitive at least `fraction · L` long receives at least
/// `min_obs` observations.
pub fn choose_resample_step<T: Scalar>(stroke: &RawStroke<T>, config: &ResampleConfig<T>) -> T {
    step_for_length(stroke.length(), config)
}

pub fn step_for_length<T: Scalar>(length: T, config: &ResampleConfig<T>) -> T {
    let obs = T::from_usize_lossy(config.min_obs_per_primitive.max(1));
    (config.min_primitive_fraction * length / obs)
        .max(config.d_min_abs)
        .min(config.d_max_abs)
}

/// Gaussian smoothing along arc length with standard deviation `sigma` (device
/// units). Near the ends the window shrinks symmetrically, so the first and last
/// points stay put. Point count and order are unchanged.
pub fn smooth<T: Scalar>(stroke: &RawStroke<T>, sigma: T) -> RawStroke<T> {
    let n = stroke.len();
    if !(sigma > T::zero()) || n < 3 {
        return stroke.clone();
    }
    let s = stroke.cumulative_length();
    let total = s[n - 1];
    let reach = T::lit(3.0) * sigma;
    let two_var = T::lit(2.0) * sigma * sigma;
    // length of polyline each point stands for; the ends use their single gap so
    // evenly spaced points weigh the same
    let ds: Vec<T> = (0..n)
        .map(|j| {
            let w = if j == 0 {
                s[1] - s[0]
            } else if j + 1 == n {
                s[n - 1] - s[n - 2]
            } else {
                (s[j + 1] - s[j - 1]) / T::lit(2.0)
            };
            w.max(T::lit(1e-12))
        })
        .collect();
    let mut points = stroke.points().to_vec();
    let mut start = 0;
    for i in 1..n - 1 {
        let half = reach.min(s[i]).min(total - s[i]);
        while s[start] < s[i] - half {
            start += 1;
        }
        let (mut wx, mut wy, mut wsum) = (T::zero(), T::zero(), T::zero());
        let mut j = start;
        while j < n && s[j] <= s[i] + half {
            let d = s[j] - s[i];
            let w = (-(d * d) / two_var).exp() * ds[j];
            wx += w * stroke.points[j].x;
            wy += w * stroke.points[j].y;
            wsum += w;
            j += 1;
        }
        if wsum > T::zero() {
            points[i].x = wx / wsum;
            points[i].y = wy / wsum;
        }
    }
    for i in 1..n {
        if points[i].x == points[i - 1].x && points[i].y == points[i - 1].y {
            points[i] = stroke.points[i];
        }
    }
    RawStroke { id: stroke.id.clone(), points }
}

/// Unsigned distance from raw point `index` to the chord joining its neighbours
/// `half_window` points away (clamped to the stroke ends).
pub fn raw_curvature<T: Scalar>(stroke: &RawStroke<T>, index: usize, half_window: usize) -> T {
    let n = stroke.len();
    let hw = half_window.max(1);
    let a = stroke.xy(index.saturating_sub(hw));
    let b = stroke.xy((index + hw).min(n - 1));
    let p = stroke.xy(index);
    let chord = b - a;
    let len = chord.norm();
    if len <= T::lit(1e-12) {
        return T::zero();
    }
    (chord.cross(p - a) / len).abs()
}

/// Signed variant of [`raw_curvature`]: positive when `p` lies left of the chord
/// in the coordinate frame the points are given in.
pub fn raw_signed_curvature<T: Scalar>(stroke: &RawStroke<T>, index: usize, half_window: usize) -> T {
    let n = stroke.len();
    let hw = half_window.max(1);
    let a = stroke.xy(index.saturating_sub(hw));
    let b = stroke.xy((index + hw).min(n - 1));
    let chord = b - a;
    let len = chord.norm();
    if len <= T::lit(1e-12) {
        return T::zero();
    }
    chord.cross(stroke.xy(index) - a) / len
}
