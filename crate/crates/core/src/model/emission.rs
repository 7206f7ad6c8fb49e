//! Hand-set emission densities for every state.
//!
//! Curvature (`f3`) densities are expressed in units of the resampling step `d`
//! so a single model can decode strokes resampled at different steps.

use serde::{Deserialize, Serialize};

use super::pdf::{BandPdf, BlurredBand, FeaturePdf, PdfShape};
use super::state::{StateKind, SECTORS};
use crate::features::Observation;
use crate::scalar::Scalar;

/// Tunable widths and thresholds of the default densities. Lengths are in units
/// of `d`, angles in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EmissionConfig {
    /// A sector boundary sits this many standard deviations from the sector centre.
    pub boundary_sigmas: f64,
    pub direction_floor: f64,
    /// Line curvature stays within `±line_band` (taken as two standard deviations).
    pub line_band: f64,
    /// Above this `|f3|` line states emit at least `line_raised`.
    pub h_corner: f64,
    pub line_raised: f64,
    pub curvature_floor: f64,
    /// Arc radii covered by the curvature band, in resampling steps.
    pub radius_min: f64,
    pub radius_max: f64,
    /// Tail width of arc bands as a fraction of the band width.
    pub arc_tail_fraction: f64,
    /// Lines keep `f4` within two of these standard deviations.
    pub line_turn_sigma: f64,
    pub turn_floor: f64,
    /// Tail width of line-corner bands on `f3`.
    pub corner_curvature_sigma: f64,
    /// Tail width of line-corner bands on `f1`, `f2`, `f4`.
    pub corner_angle_sigma: f64,
    /// Per-feature density of the connector states; `None` picks the uniform
    /// density over the feature box `[-1,1]² × [-2,2] × [0,π]`.
    pub connector_density: Option<f64>,
    /// Expected positional jitter of resampled points, in units of `d`. Curvature
    /// and turning densities are widened by the feature noise it induces.
    pub observation_noise: f64,
}

impl Default for EmissionConfig {
    fn default() -> Self {
        Self {
            boundary_sigmas: 2.0,
            direction_floor: 1e-4,
            line_band: 0.125,
            h_corner: 0.5,
            line_raised: 0.05,
            curvature_floor: 1e-4,
            radius_min: 10.0,
            radius_max: 50.0,
            arc_tail_fraction: 0.25,
            line_turn_sigma: 0.025,
            turn_floor: 1e-2,
            corner_curvature_sigma: 0.15,
            corner_angle_sigma: 0.1,
            connector_density: None,
            observation_noise: 0.04,
        }
    }
}

/// Chord-distance curvature of a circle of radius `r` sampled at unit arc length
/// with a five-point window.
pub fn sagitta(r: f64) -> f64 {
    r * (1.0 - (2.0 / r).cos())
}

/// Turning angle of a circle of radius `r` sampled at unit chord length.
pub fn turning_angle(r: f64) -> f64 {
    2.0 * (1.0 / (2.0 * r)).asin()
}

impl EmissionConfig {
    /// Standard deviation of `f3 / d` caused by the observation noise.
    pub fn curvature_noise(&self) -> f64 {
        1.03 * self.observation_noise
    }

    /// Standard deviation of the signed turn caused by the observation noise.
    pub fn turn_noise(&self) -> f64 {
        2.46 * self.observation_noise
    }
}

fn widen(sigma: f64, noise: f64) -> f64 {
    sigma.hypot(noise)
}

/// Densities of one state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum StateEmission<T> {
    /// Independent densities of `f1`, `f2`, `f3 / d`, `f4`.
    Features { pdfs: [FeaturePdf<T>; 4] },
    /// The same density for every feature value.
    Uniform { density: T },
}

impl<T: Scalar> StateEmission<T> {
    /// Sum of per-feature log densities; `f3` is divided by `step_d` first.
    pub fn log_likelihood(&self, obs: &Observation<T>, step_d: T) -> T {
        match self {
            StateEmission::Features { pdfs } => {
                pdfs[0].log_density(obs.f1)
                    + pdfs[1].log_density(obs.f2)
                    + pdfs[2].log_density(obs.f3 / step_d)
                    + pdfs[3].log_density(obs.f4)
            }
            StateEmission::Uniform { density } => T::lit(4.0) * density.ln(),
        }
    }
}

/// Emission table indexed by state index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionParams<T> {
    pub states: Vec<StateEmission<T>>,
}

fn lit<T: Scalar>(x: f64) -> T {
    T::lit(x)
}

/// Sector centre angle.
fn sector_angle(k: u8) -> f64 {
    k as f64 * std::f64::consts::FRAC_PI_4
}

/// Half-Gaussian pair peaking at `trig(centre)` that falls to `exp(-s²/2)` at
/// both sector boundaries (`s = boundary_sigmas`).
fn sector_shape<T: Scalar>(trig: fn(f64) -> f64, k: u8, cfg: &EmissionConfig) -> PdfShape<T> {
    let half = std::f64::consts::FRAC_PI_8;
    let a = sector_angle(k);
    let center = clean(trig(a));
    let mut left = None;
    let mut right = None;
    for b in [clean(trig(a - half)), clean(trig(a + half))] {
        let width = (b - center).abs() / cfg.boundary_sigmas;
        if b < center {
            left = Some(left.map_or(width, |w: f64| w.max(width)));
        } else {
            right = Some(right.map_or(width, |w: f64| w.max(width)));
        }
    }
    let (sl, sr) = match (left, right) {
        (Some(l), Some(r)) => (l, r),
        (Some(l), None) => (l, l),
        (None, Some(r)) => (r, r),
        (None, None) => unreachable!("sector boundaries differ from the centre"),
    };
    PdfShape { center: lit(center), sigma_left: lit(sl), sigma_right: lit(sr), floor: lit(cfg.direction_floor) }
}

/// Rounds away floating noise around the exact trig values at multiples of 45°.
fn clean(x: f64) -> f64 {
    for v in [-1.0, 0.0, 1.0] {
        if (x - v).abs() < 1e-12 {
            return v;
        }
    }
    x
}

/// Band on `trig` covering every direction swept when turning from sector
/// `from` to sector `to` the short way (both ways for a reversal), widened by
/// half a sector at each end.
fn swept_band<T: Scalar>(trig: fn(f64) -> f64, from: u8, to: u8, cfg: &EmissionConfig) -> BandPdf<T> {
    let half = std::f64::consts::FRAC_PI_8;
    let delta = (to + SECTORS - from) % SECTORS;
    let (lo, hi) = match delta {
        1..=3 => (sector_angle(from) - half, sector_angle(from) + delta as f64 * sector_angle(1) + half),
        5..=7 => (sector_angle(from) - (SECTORS - delta) as f64 * sector_angle(1) - half, sector_angle(from) + half),
        _ => (0.0, std::f64::consts::TAU),
    };
    let steps = 720;
    let (mut vmin, mut vmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..=steps {
        let v = trig(lo + (hi - lo) * i as f64 / steps as f64);
        vmin = vmin.min(v);
        vmax = vmax.max(v);
    }
    BandPdf::new(lit(vmin), lit(vmax), lit(cfg.corner_angle_sigma), lit(cfg.direction_floor))
}

fn line_curvature<T: Scalar>(cfg: &EmissionConfig) -> FeaturePdf<T> {
    FeaturePdf::Raised {
        base: PdfShape::symmetric(T::zero(), lit(widen(cfg.line_band / 2.0, cfg.curvature_noise())), lit(cfg.curvature_floor)),
        threshold: lit(cfg.h_corner),
        raised: lit(cfg.line_raised),
    }
}

/// Curvature band of clockwise arcs (positive `f3`).
fn clockwise_curvature<T: Scalar>(cfg: &EmissionConfig) -> FeaturePdf<T> {
    let (lo, hi) = (sagitta(cfg.radius_max), sagitta(cfg.radius_min));
    let band = BandPdf::new(lit(lo), lit(hi), lit(cfg.arc_tail_fraction * (hi - lo)), lit(cfg.curvature_floor));
    FeaturePdf::Blurred(BlurredBand::new(band, lit(cfg.curvature_noise()), false))
}

fn line_turn<T: Scalar>(cfg: &EmissionConfig) -> FeaturePdf<T> {
    FeaturePdf::Shape(PdfShape::symmetric(T::zero(), lit(widen(cfg.line_turn_sigma, cfg.turn_noise())), lit(cfg.turn_floor)))
}

fn arc_turn<T: Scalar>(cfg: &EmissionConfig) -> FeaturePdf<T> {
    let (lo, hi) = (turning_angle(cfg.radius_max), turning_angle(cfg.radius_min));
    let band = BandPdf::new(lit(lo), lit(hi), lit(cfg.arc_tail_fraction * (hi - lo)), lit(cfg.turn_floor));
    FeaturePdf::Blurred(BlurredBand::new(band, lit(cfg.turn_noise()), true))
}

/// Uniform per-feature density over the feature box, `f3` in units of `d`.
pub fn uniform_connector_density(cfg: &EmissionConfig) -> f64 {
    cfg.connector_density
        .unwrap_or_else(|| (1.0 / (2.0 * 2.0 * 4.0 * std::f64::consts::PI)).powf(0.25))
}

/// Densities of a single state.
pub fn state_emission<T: Scalar>(kind: StateKind, cfg: &EmissionConfig) -> StateEmission<T> {
    let cos = f64::cos as fn(f64) -> f64;
    let sin = f64::sin as fn(f64) -> f64;
    let direction = |k: u8| {
        (FeaturePdf::Shape(sector_shape::<T>(cos, k, cfg)), FeaturePdf::Shape(sector_shape::<T>(sin, k, cfg)))
    };
    match kind {
        StateKind::Line { direction: k } => {
            let (f1, f2) = direction(k);
            StateEmission::Features { pdfs: [f1, f2, line_curvature(cfg), line_turn(cfg)] }
        }
        StateKind::ArcCw { sector } => {
            let (f1, f2) = direction(sector);
            StateEmission::Features { pdfs: [f1, f2, clockwise_curvature(cfg), arc_turn(cfg)] }
        }
        StateKind::ArcCcw { sector } => {
            let (f1, f2) = direction(sector);
            StateEmission::Features { pdfs: [f1, f2, clockwise_curvature(cfg).mirrored(), arc_turn(cfg)] }
        }
        StateKind::Connector1 | StateKind::Connector2 => {
            StateEmission::Uniform { density: lit(uniform_connector_density(cfg)) }
        }
        StateKind::LineCorner { from, to } => {
            let delta = (to + SECTORS - from) % SECTORS;
            let turn = delta.min(SECTORS - delta) as f64 * std::f64::consts::FRAC_PI_4;
            let band = BandPdf::new(lit(cfg.h_corner), lit(2.0), lit(cfg.corner_curvature_sigma), lit(cfg.curvature_floor));
            // left turns put p_i right of the chord: negative curvature
            let f3 = match delta {
                1..=3 => FeaturePdf::Band(band.mirrored()),
                5..=7 => FeaturePdf::Band(band),
                _ => FeaturePdf::AbsBand(band),
            };
            let quarter = std::f64::consts::FRAC_PI_4;
            let f4 = FeaturePdf::Band(BandPdf::new(
                lit((turn / 2.0 - quarter / 2.0).max(0.1)),
                lit((turn + quarter).min(std::f64::consts::PI)),
                lit(cfg.corner_angle_sigma),
                lit(cfg.turn_floor),
            ));
            StateEmission::Features {
                pdfs: [
                    FeaturePdf::Band(swept_band(cos, from, to, cfg)),
                    FeaturePdf::Band(swept_band(sin, from, to, cfg)),
                    f3,
                    f4,
                ],
            }
        }
    }
}

/// Emission table for the given state catalogue.
pub fn default_emissions<T: Scalar>(kinds: &[StateKind], cfg: &EmissionConfig) -> EmissionParams<T> {
    EmissionParams { states: kinds.iter().map(|&k| state_emission(k, cfg)).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};

    fn pdfs(kind: StateKind) -> [FeaturePdf<f64>; 4] {
        match state_emission::<f64>(kind, &EmissionConfig::default()) {
            StateEmission::Features { pdfs } => pdfs,
            StateEmission::Uniform { .. } => panic!("expected feature densities"),
        }
    }

    #[test]
    fn horizontal_line_sine_is_symmetric() {
        let [_, f2, _, _] = pdfs(StateKind::Line { direction: 0 });
        let peak = f2.density(0.0);
        assert!((-100..=100).all(|k| f2.density(k as f64 / 100.0) <= peak));
        assert_relative_eq!(f2.density(FRAC_PI_8.sin()), f2.density((-FRAC_PI_8).sin()), epsilon = 1e-15);
        assert_relative_eq!(f2.density(FRAC_PI_8.sin()), 1e-4 + (-2.0f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn diagonal_cosine_is_two_gaussians() {
        let [f1, _, _, _] = pdfs(StateKind::Line { direction: 1 });
        let peak = f1.density(FRAC_PI_4.cos());
        assert_relative_eq!(peak, 1.0 + 1e-4, epsilon = 1e-12);
        assert_relative_eq!(f1.density(FRAC_PI_8.cos()), f1.density((3.0 * FRAC_PI_8).cos()), epsilon = 1e-12);
        match f1 {
            FeaturePdf::Shape(s) => assert!((s.sigma_left - s.sigma_right).abs() > 0.01),
            _ => panic!("expected a shape"),
        }
    }

    #[test]
    fn clockwise_band_edges_are_band_sagittas() {
        let [_, _, f3, _] = pdfs(StateKind::ArcCw { sector: 3 });
        match f3 {
            FeaturePdf::Blurred(BlurredBand { band: b, noise, folded: false, .. }) => {
                assert_relative_eq!(b.hi, 0.19933, epsilon = 1e-5);
                assert_relative_eq!(b.lo, 0.039995, epsilon = 1e-5);
                assert_relative_eq!(b.sigma_lo, 0.25 * (b.hi - b.lo));
                assert_relative_eq!(noise, EmissionConfig::default().curvature_noise());
            }
            _ => panic!("expected a blurred band"),
        }
        let cfg = EmissionConfig { observation_noise: 0.0, ..EmissionConfig::default() };
        let clean = match state_emission::<f64>(StateKind::ArcCw { sector: 3 }, &cfg) {
            StateEmission::Features { pdfs } => pdfs[2].clone(),
            StateEmission::Uniform { .. } => unreachable!(),
        };
        for h in [0.03, 0.04, 0.1, 0.19933, 0.25] {
            let band = BandPdf::new(sagitta(50.0), sagitta(10.0), 0.25 * (sagitta(10.0) - sagitta(50.0)), 1e-4);
            assert_relative_eq!(clean.density(h), band.density(h), epsilon = 1e-12);
        }
    }

    #[test]
    fn arc_turn_band_edges() {
        let [_, _, _, f4] = pdfs(StateKind::ArcCcw { sector: 0 });
        match f4 {
            FeaturePdf::Blurred(BlurredBand { band: b, folded: true, .. }) => {
                assert_relative_eq!(b.lo, 0.0200003, epsilon = 1e-6);
                assert_relative_eq!(b.hi, 0.1000417, epsilon = 1e-6);
            }
            _ => panic!("expected a folded blurred band"),
        }
    }

    #[test]
    fn corner_curvature_sign_follows_turn() {
        // 270° -> 0° is a left turn in the y-up frame
        let [_, _, f3, _] = pdfs(StateKind::LineCorner { from: 6, to: 0 });
        assert!(f3.density(-1.0) > 0.9);
        assert!(f3.density(1.0) < 1e-3);
        let [_, _, f3, _] = pdfs(StateKind::LineCorner { from: 0, to: 4 });
        assert!(f3.density(-1.0) > 0.9 && f3.density(1.0) > 0.9);
    }

    #[test]
    fn corner_direction_covers_the_bisector() {
        let [f1, f2, _, _] = pdfs(StateKind::LineCorner { from: 6, to: 0 });
        let a = -FRAC_PI_4;
        assert!(f1.density(a.cos()) > 0.99 && f2.density(a.sin()) > 0.99);
        // the opposite direction is excluded
        assert!(f1.density(-a.cos()) < 0.01);
    }

    #[test]
    fn connector_density_matches_feature_box() {
        let c = uniform_connector_density(&EmissionConfig::default());
        assert_relative_eq!(c.powi(4), 1.0 / (16.0 * std::f64::consts::PI), epsilon = 1e-12);
    }
}
