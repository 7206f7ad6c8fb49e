//! Max-normalized feature densities.
//!
//! Every shape peaks at 1 (plus its floor). The decoder only ever compares states
//! at a fixed observation, so the shapes are calibrated relative to one another
//! rather than integrating to one.

use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[inline]
fn half_gauss<T: Scalar>(dist: T, sigma: T) -> T {
    let z = dist / sigma;
    (-(z * z) / T::lit(2.0)).exp()
}

/// Two half-Gaussians joined at `center`, lifted by `floor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdfShape<T> {
    pub center: T,
    pub sigma_left: T,
    pub sigma_right: T,
    pub floor: T,
}

impl<T: Scalar> PdfShape<T> {
    pub fn symmetric(center: T, sigma: T, floor: T) -> Self {
        Self { center, sigma_left: sigma, sigma_right: sigma, floor }
    }

    pub fn density(&self, x: T) -> T {
        let sigma = if x < self.center { self.sigma_left } else { self.sigma_right };
        self.floor + half_gauss(x - self.center, sigma)
    }

    pub fn mirrored(&self) -> Self {
        Self {
            center: -self.center,
            sigma_left: self.sigma_right,
            sigma_right: self.sigma_left,
            floor: self.floor,
        }
    }
}

/// Flat top over `[lo, hi]` with Gaussian tails, lifted by `floor`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandPdf<T> {
    pub lo: T,
    pub hi: T,
    pub sigma_lo: T,
    pub sigma_hi: T,
    pub floor: T,
}

impl<T: Scalar> BandPdf<T> {
    pub fn new(lo: T, hi: T, sigma: T, floor: T) -> Self {
        Self { lo, hi, sigma_lo: sigma, sigma_hi: sigma, floor }
    }

    pub fn density(&self, x: T) -> T {
        let g = if x < self.lo {
            half_gauss(self.lo - x, self.sigma_lo)
        } else if x > self.hi {
            half_gauss(x - self.hi, self.sigma_hi)
        } else {
            T::one()
        };
        self.floor + g
    }

    pub fn mirrored(&self) -> Self {
        Self {
            lo: -self.hi,
            hi: -self.lo,
            sigma_lo: self.sigma_hi,
            sigma_hi: self.sigma_lo,
            floor: self.floor,
        }
    }
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Integral of a half-Gaussian tail of width `a` on `u <= 0` (or `u >= 0` when
/// `upper`) against the normal density `N(x, s²)`.
fn blurred_tail(x: f64, a: f64, s: f64, upper: bool) -> f64 {
    let var = a * a + s * s;
    let m = x * a * a / var;
    let v = a * s / var.sqrt();
    let side = if upper { std_normal_cdf(m / v) } else { std_normal_cdf(-m / v) };
    (v / s) * (-(x * x) / (2.0 * var)).exp() * side
}

/// A band convolved with zero-mean Gaussian noise, optionally folded onto
/// `|x|` for unsigned features. Renormalized so the peak is 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlurredBand<T> {
    pub band: BandPdf<T>,
    pub noise: T,
    pub folded: bool,
    pub peak: T,
}

impl<T: Scalar> BlurredBand<T> {
    pub fn new(band: BandPdf<T>, noise: T, folded: bool) -> Self {
        let mut b = Self { band, noise, folded, peak: T::one() };
        let (lo, hi) = (band.lo.to_f64_lossy(), band.hi.to_f64_lossy());
        let reach = 4.0 * (band.sigma_lo.max(band.sigma_hi).to_f64_lossy() + noise.to_f64_lossy());
        let (start, end) = if folded { (0.0, lo.abs().max(hi.abs()) + reach) } else { (lo - reach, hi + reach) };
        let steps = 4000;
        let peak = (0..=steps)
            .map(|i| b.unnormalized(start + (end - start) * i as f64 / steps as f64))
            .fold(0.0, f64::max);
        b.peak = T::lit(peak);
        b
    }

    fn convolved(&self, x: f64) -> f64 {
        let b = &self.band;
        let s = self.noise.to_f64_lossy();
        if s <= 0.0 {
            return (b.density(T::lit(x)) - b.floor).to_f64_lossy();
        }
        let (lo, hi) = (b.lo.to_f64_lossy(), b.hi.to_f64_lossy());
        let core = std_normal_cdf((x - lo) / s) - std_normal_cdf((x - hi) / s);
        let below = blurred_tail(x - lo, b.sigma_lo.to_f64_lossy(), s, false);
        let above = blurred_tail(x - hi, b.sigma_hi.to_f64_lossy(), s, true);
        core + below + above
    }

    fn unnormalized(&self, x: f64) -> f64 {
        if self.folded {
            self.convolved(x.abs()) + self.convolved(-x.abs())
        } else {
            self.convolved(x)
        }
    }

    pub fn density(&self, x: T) -> T {
        self.band.floor + T::lit(self.unnormalized(x.to_f64_lossy())) / self.peak
    }

    pub fn mirrored(&self) -> Self {
        Self { band: self.band.mirrored(), ..*self }
    }
}

/// Density of one feature under one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum FeaturePdf<T> {
    Shape(PdfShape<T>),
    Band(BandPdf<T>),
    Blurred(BlurredBand<T>),
    /// Band evaluated on `|x|`.
    AbsBand(BandPdf<T>),
    /// `base`, but never below `raised` once `|x| > threshold`.
    Raised { base: PdfShape<T>, threshold: T, raised: T },
    /// Equal-weight mixture.
    Mixture(Vec<PdfShape<T>>),
    Constant(T),
}

impl<T: Scalar> FeaturePdf<T> {
    pub fn density(&self, x: T) -> T {
        match self {
            FeaturePdf::Shape(s) => s.density(x),
            FeaturePdf::Band(b) => b.density(x),
            FeaturePdf::Blurred(b) => b.density(x),
            FeaturePdf::AbsBand(b) => b.density(x.abs()),
            FeaturePdf::Raised { base, threshold, raised } => {
                let d = base.density(x);
                if x.abs() > *threshold {
                    d.max(*raised)
                } else {
                    d
                }
            }
            FeaturePdf::Mixture(parts) => {
                let sum = parts.iter().fold(T::zero(), |acc, p| acc + p.density(x));
                sum / T::from_usize_lossy(parts.len().max(1))
            }
            FeaturePdf::Constant(c) => *c,
        }
    }

    #[inline]
    pub fn log_density(&self, x: T) -> T {
        self.density(x).ln()
    }

    /// The density reflected about `x = 0`.
    pub fn mirrored(&self) -> Self {
        match self {
            FeaturePdf::Shape(s) => FeaturePdf::Shape(s.mirrored()),
            FeaturePdf::Band(b) => FeaturePdf::Band(b.mirrored()),
            FeaturePdf::Blurred(b) if b.folded => FeaturePdf::Blurred(*b),
            FeaturePdf::Blurred(b) => FeaturePdf::Blurred(b.mirrored()),
            FeaturePdf::AbsBand(b) => FeaturePdf::AbsBand(*b),
            FeaturePdf::Raised { base, threshold, raised } => FeaturePdf::Raised {
                base: base.mirrored(),
                threshold: *threshold,
                raised: *raised,
            },
            FeaturePdf::Mixture(parts) => FeaturePdf::Mixture(parts.iter().map(PdfShape::mirrored).collect()),
            FeaturePdf::Constant(c) => FeaturePdf::Constant(*c),
        }
    }

    /// Smallest value the density can take.
    pub fn min_density(&self) -> T {
        match self {
            FeaturePdf::Shape(s) => s.floor,
            FeaturePdf::Band(b) | FeaturePdf::AbsBand(b) => b.floor,
            FeaturePdf::Blurred(b) => b.band.floor,
            FeaturePdf::Raised { base, .. } => base.floor,
            FeaturePdf::Mixture(parts) => {
                parts.iter().fold(T::zero(), |acc, p| acc + p.floor) / T::from_usize_lossy(parts.len().max(1))
            }
            FeaturePdf::Constant(c) => *c,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn shape_is_continuous_and_peaks_at_center() {
        let s = PdfShape { center: 0.3, sigma_left: 0.1, sigma_right: 0.4, floor: 0.0 };
        assert_relative_eq!(s.density(0.3), 1.0);
        assert_relative_eq!(s.density(0.3 - 1e-12), 1.0, epsilon = 1e-9);
        assert_relative_eq!(s.density(0.1), (-2.0f64).exp(), epsilon = 1e-12);
        assert_relative_eq!(s.density(1.1), (-2.0f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn band_flat_top() {
        let b = BandPdf::new(0.04, 0.2, 0.04, 1e-3);
        assert_relative_eq!(b.density(0.1), 1.001);
        assert_relative_eq!(b.density(0.0), 1e-3 + (-0.5f64).exp());
        assert!(b.density(-1.0) >= 1e-3);
    }

    #[test]
    fn mirror_reflects() {
        let pdfs = [
            FeaturePdf::Band(BandPdf { lo: 0.04, hi: 0.2, sigma_lo: 0.01, sigma_hi: 0.05, floor: 1e-4 }),
            FeaturePdf::Raised {
                base: PdfShape { center: 0.1, sigma_left: 0.05, sigma_right: 0.2, floor: 1e-4 },
                threshold: 0.5,
                raised: 0.1,
            },
        ];
        for p in &pdfs {
            let m = p.mirrored();
            for k in -40..=40 {
                let x = k as f64 * 0.05;
                assert_relative_eq!(p.density(x), m.density(-x), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn blur_without_noise_is_the_band() {
        let band = BandPdf::new(0.04, 0.2, 0.04, 1e-3);
        let b = BlurredBand::new(band, 0.0, false);
        for k in -20..=20 {
            let x = k as f64 * 0.025;
            assert_relative_eq!(b.density(x), band.density(x), epsilon = 1e-12);
        }
    }

    #[test]
    fn blur_matches_numeric_convolution() {
        let band = BandPdf::new(0.04, 0.2, 0.04, 0.0);
        let s = 0.1;
        let b = BlurredBand::new(band, s, false);
        let conv = |x: f64| {
            let n = 20_000;
            let (a, z) = (-1.5, 1.5);
            let h = (z - a) / n as f64;
            (0..n)
                .map(|i| {
                    let y = a + (i as f64 + 0.5) * h;
                    let d = (x - y) / s;
                    band.density(y) * (-(d * d) / 2.0).exp() / (s * (2.0 * std::f64::consts::PI).sqrt()) * h
                })
                .sum::<f64>()
        };
        let peak = conv(0.12);
        for k in -10..=10 {
            let x = k as f64 * 0.05;
            assert_relative_eq!(b.density(x), conv(x) / peak, epsilon = 1e-6);
        }
        assert_relative_eq!(b.density(0.12), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn folded_blur_is_even() {
        let b = BlurredBand::new(BandPdf::new(0.02, 0.1, 0.02, 1e-2), 0.25, true);
        for k in 0..=20 {
            let x = k as f64 * 0.05;
            assert_relative_eq!(b.density(x), b.density(-x), epsilon = 1e-15);
            assert!(b.density(x) <= 1.0 + 1e-2 + 1e-12);
        }
    }

    #[test]
    fn raised_only_above_threshold() {
        let p = FeaturePdf::Raised { base: PdfShape::symmetric(0.0, 0.1, 1e-4), threshold: 0.5, raised: 0.05 };
        assert!(p.density(0.45) < 0.01);
        assert_relative_eq!(p.density(0.55), 0.05);
        assert_relative_eq!(p.density(-0.55), 0.05);
    }
}
