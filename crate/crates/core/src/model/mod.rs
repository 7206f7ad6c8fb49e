//! The structured fragmentation model and the fully connected baseline.
//!
//! The structured model chains three submodels through two connector states:
//! a clockwise-arc ring, an anticlockwise-arc ring and eight line states whose
//! direction changes pass through dedicated line-corner states.

pub mod emission;
pub mod pdf;
pub mod state;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{Observation, ObservationSeq};
use crate::hmm::{self, EmissionMatrix, HmmError, SparseHmm, StatePath, Transition};
use crate::scalar::Scalar;

pub use emission::{default_emissions, EmissionConfig, EmissionParams, StateEmission};
pub use pdf::{BandPdf, BlurredBand, FeaturePdf, PdfShape};
pub use state::{StateId, StateKind, CONNECTOR1, CONNECTOR2, NUM_BASIC, NUM_STRUCTURED, SECTORS};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("invalid model parameter `{name}` = {value}: weights must be positive and finite")]
    InvalidParams { name: &'static str, value: f64 },
    #[error(transparent)]
    Hmm(#[from] HmmError),
}

/// Transition weights. Each state's outgoing weights are normalized, so only
/// ratios within one state matter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelParams {
    pub arc_self: f64,
    /// Equal to `arc_self` by default: staying in a sector and advancing to the
    /// next are equally likely.
    pub arc_advance: f64,
    pub arc_exit: f64,
    pub line_self: f64,
    pub line_exit: f64,
    /// Total weight of the seven line-corner exits of a line state.
    pub line_corner: f64,
    pub corner_self: f64,
    pub corner_exit: f64,
    pub connector1_to_connector2: f64,
    /// Total weight from the first connector to the 24 basic states.
    pub connector1_to_basic: f64,
    /// Self-loop weight of the ergodic baseline.
    pub ergodic_self: f64,
    /// Total weight to the 23 other states in the ergodic baseline.
    pub ergodic_switch: f64,
    pub emission: EmissionConfig,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            arc_self: 0.45,
            arc_advance: 0.45,
            arc_exit: 0.10,
            line_self: 0.45,
            line_exit: 0.45,
            line_corner: 0.10,
            corner_self: 0.30,
            corner_exit: 0.70,
            connector1_to_connector2: 0.30,
            connector1_to_basic: 0.70,
            ergodic_self: 0.80,
            ergodic_switch: 0.20,
            emission: EmissionConfig::default(),
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), ModelError> {
        let weights = [
            ("arc_self", self.arc_self),
            ("arc_advance", self.arc_advance),
            ("arc_exit", self.arc_exit),
            ("line_self", self.line_self),
            ("line_exit", self.line_exit),
            ("line_corner", self.line_corner),
            ("corner_self", self.corner_self),
            ("corner_exit", self.corner_exit),
            ("connector1_to_connector2", self.connector1_to_connector2),
            ("connector1_to_basic", self.connector1_to_basic),
            ("ergodic_self", self.ergodic_self),
            ("ergodic_switch", self.ergodic_switch),
        ];
        for (name, value) in weights {
            if !(value > 0.0 && value.is_finite()) {
                return Err(ModelError::InvalidParams { name, value });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Structured,
    Ergodic,
}

/// A built fragmentation model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HmmModel<T> {
    pub topology: Topology,
    pub states: Vec<StateId>,
    pub hmm: SparseHmm<T>,
    pub emissions: EmissionParams<T>,
    /// Step the model is nominally built for; `f3` densities are in units of it.
    pub step_d: T,
}

/// Outgoing edges of one state as `(to, weight)`, normalized on insertion.
struct EdgeList {
    edges: Vec<(usize, usize, f64)>,
}

impl EdgeList {
    fn push_normalized(&mut self, from: usize, out: &[(usize, f64)]) {
        let total: f64 = out.iter().map(|(_, w)| w).sum();
        self.edges.extend(out.iter().map(|&(to, w)| (from, to, w / total)));
    }

    fn into_transitions<T: Scalar>(self) -> Vec<Transition<T>> {
        self.edges
            .into_iter()
            .map(|(from, to, p)| Transition { from, to, logp: T::lit(p.ln()) })
            .collect()
    }
}

fn uniform_basic_initial<T: Scalar>(n_states: usize) -> Vec<T> {
    let lp = T::lit((1.0 / NUM_BASIC as f64).ln());
    (0..n_states).map(|i| if i < NUM_BASIC { lp } else { hmm::log_zero() }).collect()
}

/// Builds the 82-state structured model.
pub fn build_structured_model<T: Scalar>(step_d: T, params: &ModelParams) -> Result<HmmModel<T>, ModelError> {
    params.validate()?;
    check_step(step_d)?;
    let p = params;
    let mut edges = EdgeList { edges: Vec::new() };
    let basic_share = |total: f64| -> Vec<(usize, f64)> {
        (0..NUM_BASIC).map(|s| (s, total / NUM_BASIC as f64)).collect()
    };

    for sector in 0..SECTORS {
        // anticlockwise arcs turn toward increasing direction angle
        let ccw = StateKind::ArcCcw { sector }.index();
        let ccw_next = StateKind::ArcCcw { sector: (sector + 1) % SECTORS }.index();
        edges.push_normalized(ccw, &[(ccw, p.arc_self), (ccw_next, p.arc_advance), (CONNECTOR1, p.arc_exit)]);
        let cw = StateKind::ArcCw { sector }.index();
        let cw_next = StateKind::ArcCw { sector: (sector + SECTORS - 1) % SECTORS }.index();
        edges.push_normalized(cw, &[(cw, p.arc_self), (cw_next, p.arc_advance), (CONNECTOR1, p.arc_exit)]);
    }

    for from in 0..SECTORS {
        let line = StateKind::Line { direction: from }.index();
        let mut out = vec![(line, p.line_self), (CONNECTOR1, p.line_exit)];
        for to in (0..SECTORS).filter(|&to| to != from) {
            out.push((StateKind::LineCorner { from, to }.index(), p.line_corner / 7.0));
        }
        edges.push_normalized(line, &out);
        for to in (0..SECTORS).filter(|&to| to != from) {
            let corner = StateKind::LineCorner { from, to }.index();
            let target = StateKind::Line { direction: to }.index();
            edges.push_normalized(corner, &[(corner, p.corner_self), (target, p.corner_exit)]);
        }
    }

    let mut c1 = vec![(CONNECTOR2, p.connector1_to_connector2)];
    c1.extend(basic_share(p.connector1_to_basic));
    edges.push_normalized(CONNECTOR1, &c1);
    edges.push_normalized(CONNECTOR2, &basic_share(1.0));

    let kinds: Vec<StateKind> = (0..NUM_STRUCTURED).map(|i| StateKind::from_index(i).expect("dense")).collect();
    let hmm = SparseHmm::new(uniform_basic_initial(NUM_STRUCTURED), edges.into_transitions())?;
    Ok(HmmModel {
        topology: Topology::Structured,
        states: kinds.iter().map(|&k| StateId::of(k)).collect(),
        emissions: default_emissions(&kinds, &p.emission),
        hmm,
        step_d,
    })
}

/// Builds the fully connected baseline over the 24 basic states.
pub fn build_ergodic_baseline<T: Scalar>(step_d: T, params: &ModelParams) -> Result<HmmModel<T>, ModelError> {
    params.validate()?;
    check_step(step_d)?;
    let mut edges = EdgeList { edges: Vec::new() };
    for from in 0..NUM_BASIC {
        let out: Vec<(usize, f64)> = (0..NUM_BASIC)
            .map(|to| {
                let w = if to == from { params.ergodic_self } else { params.ergodic_switch / (NUM_BASIC - 1) as f64 };
                (to, w)
            })
            .collect();
        edges.push_normalized(from, &out);
    }
    let kinds: Vec<StateKind> = (0..NUM_BASIC).map(|i| StateKind::from_index(i).expect("dense")).collect();
    let hmm = SparseHmm::new(uniform_basic_initial(NUM_BASIC), edges.into_transitions())?;
    Ok(HmmModel {
        topology: Topology::Ergodic,
        states: kinds.iter().map(|&k| StateId::of(k)).collect(),
        emissions: default_emissions(&kinds, &params.emission),
        hmm,
        step_d,
    })
}

fn check_step<T: Scalar>(step_d: T) -> Result<(), ModelError> {
    if step_d > T::zero() && step_d.is_finite() {
        Ok(())
    } else {
        Err(ModelError::InvalidParams { name: "step_d", value: step_d.to_f64_lossy() })
    }
}

impl<T: Scalar> HmmModel<T> {
    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    /// Position of a state kind in this model, if present.
    pub fn position(&self, kind: StateKind) -> Option<usize> {
        self.states.iter().position(|s| s.kind == kind)
    }

    pub fn kind(&self, index: usize) -> StateKind {
        self.states[index].kind
    }

    /// Log-likelihood of `obs` under state `index`, with `f3` scaled by the
    /// model's own step.
    pub fn emission_log_likelihood(&self, index: usize, obs: &Observation<T>) -> T {
        self.emissions.states[index].log_likelihood(obs, self.step_d)
    }

    /// Emission matrix for a sequence, scaling `f3` by the sequence's own step.
    pub fn emission_matrix(&self, seq: &ObservationSeq<T>) -> EmissionMatrix<T> {
        EmissionMatrix::from_fn(seq.len(), self.n_states(), |t, s| {
            self.emissions.states[s].log_likelihood(&seq.observations[t], seq.step_d)
        })
    }

    pub fn decode(&self, seq: &ObservationSeq<T>) -> Result<StatePath<T>, HmmError> {
        hmm::viterbi(&self.hmm, &self.emission_matrix(seq))
    }

    pub fn path_log_score(&self, seq: &ObservationSeq<T>, path: &[usize]) -> Result<T, HmmError> {
        hmm::path_log_score(&self.hmm, &self.emission_matrix(seq), path)
    }

    /// The same model with `f3` densities interpreted at a different step.
    pub fn with_step(&self, step_d: T) -> Self {
        Self { step_d, ..self.clone() }
    }
}
