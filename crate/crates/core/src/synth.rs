//! Labelled synthetic strokes.
//!
//! Shapes are described turtle-style as a sequence of lines, arcs and in-place
//! turns, traced at a fixed raw spacing so that every junction between pieces
//! is an exact raw point. Geometry is built in a y-up frame and emitted in
//! screen coordinates (y down), the default input convention.

use std::f64::consts::{FRAC_PI_4, PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fragment::PrimitiveKind;
use crate::geometry::{Point2, RawPoint, RawStroke};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SynthError {
    #[error("invalid shape: {0}")]
    InvalidSpec(String),
    #[error("unknown shape family `{0}`")]
    UnknownFamily(String),
}

/// One drawing instruction. Lengths are device units, angles radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "piece", rename_all = "snake_case")]
pub enum Piece {
    Line { length: f64 },
    /// Arc turning by `sweep` (positive = anticlockwise) on a circle of `radius`.
    Arc { radius: f64, sweep: f64 },
    /// Sharp change of heading without moving.
    Turn { angle: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpec {
    pub start: (f64, f64),
    /// Initial heading, radians anticlockwise from +x.
    pub heading: f64,
    pub pieces: Vec<Piece>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseSpec {
    /// Standard deviation of per-point isotropic jitter, in resampling steps.
    pub jitter_sigma: f64,
    /// Amplitude of the slow tremor, in resampling steps.
    pub wobble_amp: f64,
    /// Tremor wavelength along the stroke, in resampling steps.
    pub wobble_wavelength: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn clean() -> Self {
        Self::default()
    }

    pub fn jitter(sigma: f64, seed: u64) -> Self {
        Self { jitter_sigma: sigma, seed, ..Self::default() }
    }
}

/// Scale of the generated stroke.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sampling {
    /// Nominal resampling step the shape is designed around.
    pub step_d: f64,
    /// Distance between consecutive raw points.
    pub raw_spacing: f64,
}

impl Sampling {
    pub fn new(step_d: f64, raw_spacing: f64) -> Self {
        Self { step_d, raw_spacing }
    }
}

impl Default for Sampling {
    fn default() -> Self {
        Self { step_d: 1.0, raw_spacing: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub id: String,
    pub family: String,
    pub true_segment_points: Vec<usize>,
    pub primitives: Vec<PrimitiveKind>,
    pub generator_spec: ShapeSpec,
    pub step_d: f64,
}

/// Exact geometry of a drawn piece, in the y-up frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PieceGeometry {
    Segment { a: Point2<f64>, b: Point2<f64> },
    Circle { center: Point2<f64>, radius: f64 },
}

impl PieceGeometry {
    pub fn distance(&self, p: Point2<f64>) -> f64 {
        match *self {
            PieceGeometry::Segment { a, b } => crate::geometry::point_segment_distance(p, a, b),
            PieceGeometry::Circle { center, radius } => (p.distance(center) - radius).abs(),
        }
    }
}

struct Turtle {
    pos: Point2<f64>,
    heading: f64,
}

impl Turtle {
    fn unit(&self) -> Point2<f64> {
        Point2::new(self.heading.cos(), self.heading.sin())
    }
}

fn validate(spec: &ShapeSpec) -> Result<(), SynthError> {
    let mut drawn = 0;
    for piece in &spec.pieces {
        match *piece {
            Piece::Line { length } if !(length > 0.0 && length.is_finite()) => {
                return Err(SynthError::InvalidSpec(format!("line length {length}")));
            }
            Piece::Arc { radius, sweep } if !(radius > 0.0 && radius.is_finite() && sweep != 0.0 && sweep.abs() <= TAU) => {
                return Err(SynthError::InvalidSpec(format!("arc radius {radius}, sweep {sweep}")));
            }
            Piece::Turn { angle } if !(angle.is_finite() && angle.abs() < PI) => {
                return Err(SynthError::InvalidSpec(format!("turn {angle}")));
            }
            Piece::Line { .. } | Piece::Arc { .. } => drawn += 1,
            Piece::Turn { .. } => {}
        }
    }
    if drawn == 0 {
        return Err(SynthError::InvalidSpec("no drawn pieces".into()));
    }
    if !matches!(spec.pieces.first(), Some(Piece::Line { .. } | Piece::Arc { .. }))
        || !matches!(spec.pieces.last(), Some(Piece::Line { .. } | Piece::Arc { .. }))
    {
        return Err(SynthError::InvalidSpec("shape must start and end with a drawn piece".into()));
    }
    Ok(())
}

fn primitive_of(piece: &Piece, heading: f64) -> Option<PrimitiveKind> {
    match *piece {
        Piece::Line { .. } => {
            let sector = (heading / FRAC_PI_4).round().rem_euclid(8.0) as u8;
            Some(PrimitiveKind::Line { direction: sector })
        }
        Piece::Arc { sweep, .. } if sweep > 0.0 => Some(PrimitiveKind::ArcCcw),
        Piece::Arc { .. } => Some(PrimitiveKind::ArcCw),
        Piece::Turn { .. } => None,
    }
}

/// Noise-free trace in the y-up frame with the piece geometry and ground truth.
pub struct Trace {
    pub points: Vec<Point2<f64>>,
    /// Index into `geometry` of the piece each point lies on.
    pub piece_of_point: Vec<usize>,
    pub geometry: Vec<PieceGeometry>,
    pub true_segment_points: Vec<usize>,
    pub primitives: Vec<PrimitiveKind>,
}

/// Traces a shape at the given raw spacing without noise.
pub fn trace(spec: &ShapeSpec, raw_spacing: f64) -> Result<Trace, SynthError> {
    validate(spec)?;
    if !(raw_spacing > 0.0) {
        return Err(SynthError::InvalidSpec(format!("raw spacing {raw_spacing}")));
    }
    let mut turtle = Turtle { pos: Point2::new(spec.start.0, spec.start.1), heading: spec.heading };
    let mut points = vec![turtle.pos];
    let mut piece_of_point = vec![0];
    let mut geometry = Vec::new();
    let mut segment_points = Vec::new();
    let mut primitives: Vec<PrimitiveKind> = Vec::new();
    let mut cornered = false;

    for piece in &spec.pieces {
        let kind = primitive_of(piece, turtle.heading);
        let junction = points.len() - 1;
        match *piece {
            Piece::Turn { angle } => {
                turtle.heading += angle;
                cornered = true;
                continue;
            }
            Piece::Line { length } => {
                let start = turtle.pos;
                let u = turtle.unit();
                let n = (length / raw_spacing).ceil().max(1.0) as usize;
                for k in 1..=n {
                    points.push(start + u * (length * k as f64 / n as f64));
                    piece_of_point.push(geometry.len());
                }
                turtle.pos = start + u * length;
                geometry.push(PieceGeometry::Segment { a: start, b: turtle.pos });
            }
            Piece::Arc { radius, sweep } => {
                let s = sweep.signum();
                let normal = Point2::new(-turtle.heading.sin(), turtle.heading.cos()) * s;
                let center = turtle.pos + normal * radius;
                let a0 = (turtle.pos - center).y.atan2((turtle.pos - center).x);
                let n = (radius * sweep.abs() / raw_spacing).ceil().max(1.0) as usize;
                for k in 1..=n {
                    let a = a0 + sweep * k as f64 / n as f64;
                    points.push(center + Point2::new(a.cos(), a.sin()) * radius);
                    piece_of_point.push(geometry.len());
                }
                let a = a0 + sweep;
                turtle.pos = center + Point2::new(a.cos(), a.sin()) * radius;
                turtle.heading += sweep;
                geometry.push(PieceGeometry::Circle { center, radius });
            }
        }
        let kind = kind.expect("drawn piece");
        match primitives.last() {
            // tangent continuation of the same primitive is not a segment point
            Some(&prev) if !cornered && prev.is_arc() && prev == kind => {}
            Some(&prev) if !cornered && prev == kind && matches!(kind, PrimitiveKind::Line { .. }) => {}
            Some(_) => {
                segment_points.push(junction);
                primitives.push(kind);
            }
            None => primitives.push(kind),
        }
        cornered = false;
    }

    Ok(Trace { points, piece_of_point, geometry, true_segment_points: segment_points, primitives })
}

fn to_screen(p: Point2<f64>) -> Point2<f64> {
    Point2::new(p.x, -p.y)
}

/// Generates a noisy raw stroke (screen coordinates) with exact ground truth.
pub fn generate(
    id: &str,
    family: &str,
    spec: &ShapeSpec,
    noise: &NoiseSpec,
    sampling: &Sampling,
) -> Result<(RawStroke<f64>, GroundTruth), SynthError> {
    if !(sampling.step_d > 0.0) {
        return Err(SynthError::InvalidSpec(format!("step {}", sampling.step_d)));
    }
    if noise.jitter_sigma < 0.0 || noise.wobble_amp < 0.0 || noise.wobble_wavelength < 0.0 {
        return Err(SynthError::InvalidSpec("negative noise amplitude".into()));
    }
    let tr = trace(spec, sampling.raw_spacing)?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let d = sampling.step_d;
    let jitter = Normal::new(0.0, noise.jitter_sigma * d).expect("finite sigma");
    let phases: (f64, f64) = (rng.random_range(0.0..TAU), rng.random_range(0.0..TAU));
    let mut arc = 0.0;
    let mut prev = tr.points[0];
    let points: Vec<RawPoint<f64>> = tr
        .points
        .iter()
        .map(|&p| {
            arc += p.distance(prev);
            prev = p;
            let mut q = p;
            if noise.wobble_amp > 0.0 && noise.wobble_wavelength > 0.0 {
                let w = TAU * arc / (noise.wobble_wavelength * d);
                q = q + Point2::new((w + phases.0).sin(), (w + phases.1).sin()) * (noise.wobble_amp * d);
            }
            if noise.jitter_sigma > 0.0 {
                q = q + Point2::new(jitter.sample(&mut rng), jitter.sample(&mut rng));
            }
            let s = to_screen(q);
            RawPoint::new(s.x, s.y)
        })
        .collect();
    // noise never produces exact duplicates in practice; dedup would shift indices
    let stroke = RawStroke::new(id, points).map_err(|e| SynthError::InvalidSpec(e.to_string()))?;
    if stroke.len() != tr.points.len() {
        return Err(SynthError::InvalidSpec(format!("stroke `{id}` collapsed duplicate points")));
    }
    let truth = GroundTruth {
        id: id.to_owned(),
        family: family.to_owned(),
        true_segment_points: tr.true_segment_points,
        primitives: tr.primitives,
        generator_spec: spec.clone(),
        step_d: d,
    };
    Ok((stroke, truth))
}

/// Shape families mirroring the sample sheet: polylines, arcs and circles,
/// line/arc compounds, smooth curves, and digit/letter-like compounds. The extra
/// `polyline` family draws 2 to 5 random legs.
pub const FAMILIES: [&str; 13] = [
    "l_shape",
    "square",
    "zigzag",
    "star",
    "circle",
    "arc",
    "d_shape",
    "s_curve",
    "j_curve",
    "digit_two",
    "digit_three",
    "letter_p",
    "polyline",
];

/// Parameter ranges, in resampling steps and degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamRanges {
    pub radius: (f64, f64),
    pub leg: (f64, f64),
    pub turn_deg: (f64, f64),
}

impl Default for ParamRanges {
    fn default() -> Self {
        Self { radius: (12.0, 45.0), leg: (8.0, 20.0), turn_deg: (45.0, 135.0) }
    }
}

fn uniform(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Draws a shape of the named family. Lengths come out in resampling steps.
pub fn family_shape(family: &str, ranges: &ParamRanges, rng: &mut ChaCha8Rng) -> Result<ShapeSpec, SynthError> {
    let r_lo = ranges.radius.0;
    // radius range clipped for compound shapes whose other pieces scale with it
    let small_r = (ranges.radius.0, ranges.radius.1.min(ranges.radius.0 + 10.0).max(ranges.radius.0));
    let heading = rng.random_range(0.0..TAU);
    let mirror = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let turn = |rng: &mut ChaCha8Rng| uniform(rng, ranges.turn_deg).to_radians();
    let leg = |rng: &mut ChaCha8Rng| uniform(rng, ranges.leg);
    use Piece::*;
    let pieces = match family {
        "l_shape" => vec![Line { length: leg(rng) }, Turn { angle: mirror * turn(rng) }, Line { length: leg(rng) }],
        "square" => {
            let side = uniform(rng, (ranges.leg.0.max(10.0), ranges.leg.1.max(10.0)));
            let a = mirror * PI / 2.0;
            vec![
                Line { length: side },
                Turn { angle: a },
                Line { length: side },
                Turn { angle: a },
                Line { length: side },
                Turn { angle: a },
                Line { length: side },
            ]
        }
        "zigzag" => {
            let mut p = vec![Line { length: leg(rng) }];
            let mut s = mirror;
            for _ in 0..3 {
                p.push(Turn { angle: s * uniform(rng, (60.0, 120.0)).to_radians() });
                p.push(Line { length: leg(rng) });
                s = -s;
            }
            p
        }
        "star" => {
            let side = uniform(rng, (ranges.leg.0.max(12.0), ranges.leg.1.max(12.0)));
            let mut p = vec![Line { length: side }];
            for _ in 0..4 {
                p.push(Turn { angle: mirror * 144f64.to_radians() });
                p.push(Line { length: side });
            }
            p
        }
        "circle" => vec![Arc { radius: uniform(rng, ranges.radius), sweep: mirror * TAU }],
        "arc" => vec![Arc { radius: uniform(rng, ranges.radius), sweep: mirror * uniform(rng, (90.0, 270.0)).to_radians() }],
        "d_shape" => {
            let r = uniform(rng, small_r);
            vec![Line { length: 2.0 * r }, Turn { angle: mirror * PI / 2.0 }, Arc { radius: r, sweep: mirror * PI }]
        }
        "s_curve" => {
            let sweep1 = uniform(rng, (90.0, 180.0)).to_radians();
            let sweep2 = uniform(rng, (90.0, 180.0)).to_radians();
            vec![
                Arc { radius: uniform(rng, ranges.radius), sweep: mirror * sweep1 },
                Arc { radius: uniform(rng, ranges.radius), sweep: -mirror * sweep2 },
            ]
        }
        "j_curve" => {
            let span = ranges.radius.1 - ranges.radius.0;
            let big = uniform(rng, (ranges.radius.0 + 0.6 * span, ranges.radius.1));
            let small = uniform(rng, (ranges.radius.0, ranges.radius.0 + 0.3 * span));
            vec![
                Arc { radius: big, sweep: mirror * uniform(rng, (60.0, 100.0)).to_radians() },
                Arc { radius: small, sweep: mirror * uniform(rng, (90.0, 180.0)).to_radians() },
            ]
        }
        "digit_two" => vec![
            Arc { radius: uniform(rng, small_r), sweep: -mirror * uniform(rng, (160.0, 200.0)).to_radians() },
            Turn { angle: -mirror * uniform(rng, (45.0, 90.0)).to_radians() },
            Line { length: uniform(rng, (15.0, 25.0)) },
            Turn { angle: mirror * uniform(rng, (100.0, 135.0)).to_radians() },
            Line { length: uniform(rng, (12.0, 20.0)) },
        ],
        "digit_three" => {
            let r = uniform(rng, small_r);
            vec![
                Arc { radius: r, sweep: -mirror * uniform(rng, (150.0, 200.0)).to_radians() },
                Turn { angle: mirror * uniform(rng, (100.0, 150.0)).to_radians() },
                Arc { radius: r, sweep: -mirror * uniform(rng, (150.0, 200.0)).to_radians() },
            ]
        }
        "letter_p" => {
            let r = uniform(rng, (r_lo, r_lo + 3.0));
            vec![
                Line { length: uniform(rng, (2.0 * r + 8.0, 2.0 * r + 16.0)) },
                Turn { angle: -mirror * PI / 2.0 },
                Arc { radius: r, sweep: -mirror * PI },
            ]
        }
        "polyline" => {
            let legs = rng.random_range(2..=5);
            let mut p = vec![Line { length: leg(rng) }];
            for _ in 1..legs {
                let s = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                p.push(Turn { angle: s * turn(rng) });
                p.push(Line { length: leg(rng) });
            }
            p
        }
        other => return Err(SynthError::UnknownFamily(other.to_owned())),
    };
    Ok(ShapeSpec { start: (0.0, 0.0), heading, pieces })
}

/// Scales every length of a shape.
pub fn scale_shape(spec: &ShapeSpec, s: f64) -> ShapeSpec {
    let pieces = spec
        .pieces
        .iter()
        .map(|p| match *p {
            Piece::Line { length } => Piece::Line { length: length * s },
            Piece::Arc { radius, sweep } => Piece::Arc { radius: radius * s, sweep },
            turn => turn,
        })
        .collect();
    ShapeSpec { start: (spec.start.0 * s, spec.start.1 * s), heading: spec.heading, pieces }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    pub family: String,
    pub count: usize,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub ranges: ParamRanges,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CorpusSpec {
    pub seed: u64,
    #[serde(default)]
    pub sampling: Sampling,
    pub families: Vec<FamilySpec>,
}

impl CorpusSpec {
    /// 600 strokes over the twelve sample families, in-band radii, jitter 0.1 d.
    pub fn default_acceptance() -> Self {
        Self::uniform(&FAMILIES[..12], 50, NoiseSpec::jitter(0.1, 0), 20_240_501)
    }

    pub fn uniform(families: &[&str], count: usize, noise: NoiseSpec, seed: u64) -> Self {
        Self {
            seed,
            sampling: Sampling::default(),
            families: families
                .iter()
                .map(|f| FamilySpec { family: (*f).to_owned(), count, noise, ranges: ParamRanges::default() })
                .collect(),
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn mix_seed(master: u64, family: usize, instance: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ family as u64) ^ instance as u64)
}

/// Deterministic corpus for a recipe.
pub fn corpus(recipe: &CorpusSpec) -> Result<Vec<(RawStroke<f64>, GroundTruth)>, SynthError> {
    let mut out = Vec::new();
    let d = recipe.sampling.step_d;
    for (fi, fam) in recipe.families.iter().enumerate() {
        if !FAMILIES.contains(&fam.family.as_str()) {
            return Err(SynthError::UnknownFamily(fam.family.clone()));
        }
        for k in 0..fam.count {
            let seed = mix_seed(recipe.seed, fi, k);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let shape = scale_shape(&family_shape(&fam.family, &fam.ranges, &mut rng)?, d);
            let noise = NoiseSpec { seed: seed ^ fam.noise.seed, ..fam.noise };
            let id = format!("{}-{k:04}", fam.family);
            out.push(generate(&id, &fam.family, &shape, &noise, &recipe.sampling)?);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l_spec() -> ShapeSpec {
        ShapeSpec {
            start: (0.0, 0.0),
            heading: -PI / 2.0,
            pieces: vec![Piece::Line { length: 10.0 }, Piece::Turn { angle: PI / 2.0 }, Piece::Line { length: 10.0 }],
        }
    }

    #[test]
    fn l_ground_truth() {
        let (stroke, truth) = generate("l", "l_shape", &l_spec(), &NoiseSpec::clean(), &Sampling::new(1.0, 0.5)).unwrap();
        assert_eq!(truth.true_segment_points, vec![20]);
        assert_eq!(
            truth.primitives,
            vec![PrimitiveKind::Line { direction: 6 }, PrimitiveKind::Line { direction: 0 }]
        );
        let corner = stroke.xy(20);
        assert!((corner.x).abs() < 1e-12 && (corner.y - 10.0).abs() < 1e-12);
    }

    #[test]
    fn circle_has_no_segment_points() {
        let spec = ShapeSpec { start: (0.0, 0.0), heading: 0.0, pieces: vec![Piece::Arc { radius: 20.0, sweep: TAU }] };
        let (stroke, truth) = generate("c", "circle", &spec, &NoiseSpec::clean(), &Sampling::default()).unwrap();
        assert!(truth.true_segment_points.is_empty());
        assert_eq!(truth.primitives, vec![PrimitiveKind::ArcCcw]);
        assert!(stroke.xy(0).distance(stroke.xy(stroke.len() - 1)) < 1e-9);
    }

    #[test]
    fn s_curve_is_reproducible() {
        let spec = ShapeSpec {
            start: (0.0, 0.0),
            heading: 0.0,
            pieces: vec![Piece::Arc { radius: 20.0, sweep: PI / 2.0 }, Piece::Arc { radius: 20.0, sweep: -PI / 2.0 }],
        };
        let noise = NoiseSpec::jitter(0.1, 42);
        let a = generate("s", "s_curve", &spec, &noise, &Sampling::default()).unwrap();
        let b = generate("s", "s_curve", &spec, &noise, &Sampling::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.1.true_segment_points.len(), 1);
        assert_eq!(a.1.primitives, vec![PrimitiveKind::ArcCcw, PrimitiveKind::ArcCw]);
    }

    #[test]
    fn tangent_same_orientation_arcs_merge() {
        let spec = ShapeSpec {
            start: (0.0, 0.0),
            heading: 0.0,
            pieces: vec![Piece::Arc { radius: 40.0, sweep: 1.0 }, Piece::Arc { radius: 15.0, sweep: 2.0 }],
        };
        let tr = trace(&spec, 0.25).unwrap();
        assert!(tr.true_segment_points.is_empty());
        assert_eq!(tr.primitives.len(), 1);
    }

    #[test]
    fn invalid_specs() {
        let bad = ShapeSpec { start: (0.0, 0.0), heading: 0.0, pieces: vec![Piece::Line { length: -1.0 }] };
        assert!(matches!(trace(&bad, 0.25), Err(SynthError::InvalidSpec(_))));
        let bad = ShapeSpec { start: (0.0, 0.0), heading: 0.0, pieces: vec![Piece::Turn { angle: 1.0 }] };
        assert!(trace(&bad, 0.25).is_err());
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(family_shape("hexagon", &ParamRanges::default(), &mut rng), Err(SynthError::UnknownFamily(_))));
    }

    #[test]
    fn every_family_traces_on_its_geometry() {
        for fam in FAMILIES {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let spec = family_shape(fam, &ParamRanges::default(), &mut rng).unwrap();
            let tr = trace(&spec, 0.25).unwrap();
            assert_eq!(tr.true_segment_points.len() + 1, tr.primitives.len(), "{fam}");
            for (p, &g) in tr.points.iter().zip(&tr.piece_of_point) {
                assert!(tr.geometry[g].distance(*p) < 1e-9, "{fam}");
            }
            assert!(tr.true_segment_points.windows(2).all(|w| w[0] < w[1]));
            assert!(tr.true_segment_points.iter().all(|&i| i > 0 && i < tr.points.len() - 1));
        }
    }

    #[test]
    fn zero_count_family_is_absent() {
        let mut recipe = CorpusSpec::uniform(&["l_shape", "circle"], 3, NoiseSpec::clean(), 1);
        recipe.families[1].count = 0;
        let c = corpus(&recipe).unwrap();
        assert_eq!(c.len(), 3);
        assert!(c.iter().all(|(_, t)| t.family == "l_shape"));
    }
}
