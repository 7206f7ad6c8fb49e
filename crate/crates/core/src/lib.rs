//! Fragmentation of online pen strokes into straight lines and circular arcs
//! with a structured hidden Markov model.
//!
//! The pipeline resamples a stroke at a fixed arc-length step, computes four
//! features per point (chord direction cosine and sine, signed chord-distance
//! curvature, turning angle), decodes the most probable state path and turns it
//! into typed segments separated by segment points.
//!
//! ```
//! use strokefrag::prelude::*;
//!
//! let mut xy: Vec<Point2<f64>> = (0..=40).map(|i| Point2::new(0.0, i as f64 * 0.25)).collect();
//! xy.extend((1..=40).map(|i| Point2::new(i as f64 * 0.25, 10.0)));
//! let stroke = RawStroke::from_xy("L", &xy).unwrap();
//! let model = build_structured_model(1.0, &ModelParams::default()).unwrap();
//! let frag = fragment(&stroke, &model, &FragConfig::fixed_step(1.0)).unwrap();
//! assert_eq!(frag.segments.len(), 2);
//! ```
//!
//! Everything numeric is generic over [`scalar::Scalar`] (`f32` or `f64`); the
//! aliases below fix the common choices.

pub mod eval;
pub mod features;
pub mod fit;
pub mod fragment;
pub mod geometry;
pub mod hmm;
pub mod io;
pub mod model;
pub mod scalar;
pub mod svg;
pub mod synth;

pub use fragment::{fragment, FragConfig, FragError, Fragmentation, PrimitiveKind, Segment};
pub use geometry::{Point2, RawPoint, RawStroke};
pub use model::{build_ergodic_baseline, build_structured_model, HmmModel, ModelParams};
pub use scalar::Scalar;

pub type Stroke = RawStroke<f64>;
pub type Stroke32 = RawStroke<f32>;
pub type Model = HmmModel<f64>;
pub type Model32 = HmmModel<f32>;
pub type Config = FragConfig<f64>;
pub type Config32 = FragConfig<f32>;
pub type Fragments = Fragmentation<f64>;
pub type Fragments32 = Fragmentation<f32>;

pub mod prelude {
    pub use crate::fragment::{fragment, FragConfig, Fragmentation, PrimitiveKind, Segment};
    pub use crate::geometry::{Point2, RawPoint, RawStroke};
    pub use crate::model::{build_ergodic_baseline, build_structured_model, HmmModel, ModelParams};
    pub use crate::scalar::Scalar;
}
