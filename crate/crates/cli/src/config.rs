//! Flat `key = value` run configuration. Every key is optional and unknown keys
//! are rejected. Command-line flags override the file.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use strokefrag::eval::EvalConfig;
use strokefrag::features::Handedness;
use strokefrag::fragment::{FragConfig, StepPolicy};
use strokefrag::geometry::ResampleConfig;
use strokefrag::model::ModelParams;
use strokefrag::svg::SvgStyle;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    #[default]
    Structured,
    Ergodic,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelChoice>,
    pub seed: Option<u64>,
    pub input: Option<PathBuf>,
    pub output: Option<PathBuf>,
    pub svg: Option<PathBuf>,

    // transitions
    pub arc_self: Option<f64>,
    pub arc_advance: Option<f64>,
    pub arc_exit: Option<f64>,
    pub line_self: Option<f64>,
    pub line_exit: Option<f64>,
    pub line_corner: Option<f64>,
    pub corner_self: Option<f64>,
    pub corner_exit: Option<f64>,
    pub connector1_to_connector2: Option<f64>,
    pub connector1_to_basic: Option<f64>,
    pub ergodic_self: Option<f64>,
    pub ergodic_switch: Option<f64>,

    // emissions
    pub boundary_sigmas: Option<f64>,
    pub direction_floor: Option<f64>,
    pub line_band: Option<f64>,
    pub h_corner: Option<f64>,
    pub line_raised: Option<f64>,
    pub curvature_floor: Option<f64>,
    pub radius_min: Option<f64>,
    pub radius_max: Option<f64>,
    pub arc_tail_fraction: Option<f64>,
    pub line_turn_sigma: Option<f64>,
    pub turn_floor: Option<f64>,
    pub corner_curvature_sigma: Option<f64>,
    pub corner_angle_sigma: Option<f64>,
    pub connector_density: Option<f64>,
    pub observation_noise: Option<f64>,

    // resampling and post-processing
    /// Fixed resampling step; the adaptive rule is used when absent.
    pub step: Option<f64>,
    pub min_primitive_fraction: Option<f64>,
    pub min_obs_per_primitive: Option<usize>,
    pub d_min_abs: Option<f64>,
    pub d_max_abs: Option<f64>,
    pub handedness: Option<Handedness>,
    pub min_run: Option<usize>,
    pub max_boundary_run: Option<usize>,
    pub refine_window: Option<usize>,
    pub refine_half_window: Option<usize>,
    pub smoothing: Option<f64>,

    // evaluation
    pub tolerance_steps: Option<f64>,
    pub use_truth_step: Option<bool>,

    // rendering
    pub svg_cell: Option<f64>,
    pub svg_columns: Option<usize>,
    pub svg_fitted: Option<bool>,
    pub line_colors: Option<[String; 8]>,
    pub arc_cw_color: Option<String>,
    pub arc_ccw_color: Option<String>,
}

macro_rules! set {
    ($cfg:expr, $target:expr, $($field:ident),+ $(,)?) => {
        $(if let Some(v) = $cfg.$field.clone() { $target.$field = v; })+
    };
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn model_params(&self) -> ModelParams {
        let mut p = ModelParams::default();
        set!(
            self,
            p,
            arc_self,
            arc_advance,
            arc_exit,
            line_self,
            line_exit,
            line_corner,
            corner_self,
            corner_exit,
            connector1_to_connector2,
            connector1_to_basic,
            ergodic_self,
            ergodic_switch
        );
        let e = &mut p.emission;
        set!(
            self,
            e,
            boundary_sigmas,
            direction_floor,
            line_band,
            h_corner,
            line_raised,
            curvature_floor,
            radius_min,
            radius_max,
            arc_tail_fraction,
            line_turn_sigma,
            turn_floor,
            corner_curvature_sigma,
            corner_angle_sigma,
            observation_noise
        );
        if self.connector_density.is_some() {
            e.connector_density = self.connector_density;
        }
        p
    }

    pub fn frag_config(&self) -> FragConfig<f64> {
        let mut f = FragConfig::<f64>::default();
        let mut r = ResampleConfig::<f64>::default();
        set!(self, r, min_primitive_fraction, min_obs_per_primitive, d_min_abs, d_max_abs);
        f.step = match self.step {
            Some(step) => StepPolicy::Fixed { step },
            None => StepPolicy::Adaptive(r),
        };
        set!(self, f, min_run, max_boundary_run, smoothing);
        if self.refine_window.is_some() {
            f.refine_window = self.refine_window;
        }
        if self.refine_half_window.is_some() {
            f.refine_half_window = self.refine_half_window;
        }
        if let Some(h) = self.handedness {
            f.features.handedness = h;
        }
        f
    }

    pub fn eval_config(&self) -> EvalConfig {
        let mut e = EvalConfig::default();
        set!(self, e, tolerance_steps, use_truth_step);
        e
    }

    pub fn svg_style(&self) -> SvgStyle {
        let mut s = SvgStyle::default();
        set!(self, s, line_colors, arc_cw_color, arc_ccw_color);
        if let Some(v) = self.svg_cell {
            s.cell = v;
        }
        if let Some(v) = self.svg_columns {
            s.columns = v;
        }
        if let Some(v) = self.svg_fitted {
            s.fitted = v;
        }
        s.y_up = self.handedness == Some(Handedness::MathYUp);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse("line_self = 0.5\nbogus = 1\n").is_err());
    }

    #[test]
    fn keys_reach_their_targets() {
        let cfg = RunConfig::parse(
            "model = \"ergodic\"\nline_self = 0.6\nobservation_noise = 0\nstep = 2.0\nmin_run = 4\nhandedness = \"math_y_up\"\ntolerance_steps = 3.0\n",
        )
        .unwrap();
        assert_eq!(cfg.model, Some(ModelChoice::Ergodic));
        let p = cfg.model_params();
        assert_eq!(p.line_self, 0.6);
        assert_eq!(p.emission.observation_noise, 0.0);
        assert_eq!(p.arc_self, ModelParams::default().arc_self);
        let f = cfg.frag_config();
        assert_eq!(f.step, StepPolicy::Fixed { step: 2.0 });
        assert_eq!(f.min_run, 4);
        assert_eq!(f.features.handedness, Handedness::MathYUp);
        assert_eq!(cfg.eval_config().tolerance_steps, 3.0);
        assert!(cfg.svg_style().y_up);
    }

    #[test]
    fn empty_file_is_all_defaults() {
        let cfg = RunConfig::parse("").unwrap();
        assert_eq!(cfg.model_params(), ModelParams::default());
        assert_eq!(cfg.frag_config(), FragConfig::default());
    }
}
