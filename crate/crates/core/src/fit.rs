//! Least-squares line and circle fits. Only used to draw segments nicely; the
//! fragmentation itself never looks at them.

use serde::{Deserialize, Serialize};

use crate::geometry::Point2;
use crate::scalar::Scalar;

/// Total least-squares line through the points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit<T> {
    pub centroid: Point2<T>,
    /// Unit direction.
    pub direction: Point2<T>,
    pub rms: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleFit<T> {
    pub center: Point2<T>,
    pub radius: T,
    pub rms: T,
}

fn centroid<T: Scalar>(points: &[Point2<T>]) -> Point2<T> {
    let n = T::from_usize_lossy(points.len());
    let sum = points.iter().fold(Point2::new(T::zero(), T::zero()), |acc, &p| acc + p);
    Point2::new(sum.x / n, sum.y / n)
}

/// Returns `None` for fewer than two distinct points.
pub fn fit_line<T: Scalar>(points: &[Point2<T>]) -> Option<LineFit<T>> {
    if points.len() < 2 {
        return None;
    }
    let c = centroid(points);
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for &p in points {
        let q = p - c;
        sxx = sxx + q.x * q.x;
        sxy = sxy + q.x * q.y;
        syy = syy + q.y * q.y;
    }
    if sxx + syy <= T::epsilon() {
        return None;
    }
    // principal axis of the scatter matrix
    let theta = T::lit(0.5) * (T::lit(2.0) * sxy).atan2(sxx - syy);
    let direction = Point2::new(theta.cos(), theta.sin());
    let ss = points.iter().fold(T::zero(), |acc, &p| {
        let r = (p - c).cross(direction);
        acc + r * r
    });
    Some(LineFit { centroid: c, direction, rms: (ss / T::from_usize_lossy(points.len())).sqrt() })
}

/// Algebraic (Kasa) circle fit: minimizes `Σ (x² + y² + D x + E y + F)²`.
/// Returns `None` for fewer than three points or collinear input.
pub fn fit_circle<T: Scalar>(points: &[Point2<T>]) -> Option<CircleFit<T>> {
    if points.len() < 3 {
        return None;
    }
    // centred coordinates keep the normal equations well conditioned
    let c = centroid(points);
    let (mut suu, mut suv, mut svv, mut suuu, mut svvv, mut suvv, mut svuu) =
        (T::zero(), T::zero(), T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
    for &p in points {
        let q = p - c;
        let (u, v) = (q.x, q.y);
        suu = suu + u * u;
        suv = suv + u * v;
        svv = svv + v * v;
        suuu = suuu + u * u * u;
        svvv = svvv + v * v * v;
        suvv = suvv + u * v * v;
        svuu = svuu + v * u * u;
    }
    let half = T::lit(0.5);
    let (b1, b2) = (half * (suuu + suvv), half * (svvv + svuu));
    let det = suu * svv - suv * suv;
    let scale = (suu + svv) * (suu + svv);
    if det.abs() <= T::lit(1e-12) * scale {
        return None;
    }
    let uc = (b1 * svv - b2 * suv) / det;
    let vc = (suu * b2 - suv * b1) / det;
    let n = T::from_usize_lossy(points.len());
    let radius = (uc * uc + vc * vc + (suu + svv) / n).sqrt();
    let center = Point2::new(c.x + uc, c.y + vc);
    let ss = points.iter().fold(T::zero(), |acc, &p| {
        let r = p.distance(center) - radius;
        acc + r * r
    });
    Some(CircleFit { center, radius, rms: (ss / n).sqrt() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn recovers_a_quarter_circle() {
        let pts: Vec<Point2<f64>> = (0..30)
            .map(|i| {
                let a = i as f64 * 0.05;
                Point2::new(3.0 + 12.0 * a.cos(), -4.0 + 12.0 * a.sin())
            })
            .collect();
        let fit = fit_circle(&pts).unwrap();
        assert_abs_diff_eq!(fit.center.x, 3.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.center.y, -4.0, epsilon = 1e-9);
        assert_abs_diff_eq!(fit.radius, 12.0, epsilon = 1e-9);
        assert!(fit.rms < 1e-9);
    }

    #[test]
    fn collinear_points_have_no_circle() {
        let pts: Vec<Point2<f64>> = (0..10).map(|i| Point2::new(i as f64, 2.0 * i as f64)).collect();
        assert!(fit_circle(&pts).is_none());
        let line = fit_line(&pts).unwrap();
        assert_abs_diff_eq!(line.direction.cross(Point2::new(1.0, 2.0)).abs(), 0.0, epsilon = 1e-12);
        assert!(line.rms < 1e-12);
    }
}
