//! Log-space Viterbi decoding over sparse transition lists.
//!
//! Nothing here knows about strokes: a model is an initial distribution plus a
//! list of `(from, to, log p)` edges, and emissions arrive as a precomputed
//! `T × N` matrix of log-likelihoods.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HmmError {
    #[error("no observations to decode")]
    EmptyObservations,
    #[error("path has {path} states but there are {observations} observations")]
    LengthMismatch { path: usize, observations: usize },
    #[error("state index {0} out of range")]
    StateOutOfRange(usize),
    #[error("duplicate transition {from} -> {to}")]
    DuplicateTransition { from: usize, to: usize },
    #[error("probability {0} is not in (0, 1]")]
    InvalidProbability(f64),
    #[error("emission matrix has {got} states, model has {expected}")]
    EmissionShape { got: usize, expected: usize },
    #[error("no path has finite score")]
    NoValidPath,
}

/// Log score of anything impossible.
pub fn log_zero<T: Scalar>() -> T {
    T::neg_infinity()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition<T> {
    pub from: usize,
    pub to: usize,
    pub logp: T,
}

/// Initial distribution plus sparse transitions, all in log space.
///
/// Transitions are kept sorted by `(from, to)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseHmm<T> {
    n_states: usize,
    initial_logp: Vec<T>,
    transitions: Vec<Transition<T>>,
}

impl<T: Scalar> SparseHmm<T> {
    pub fn new(initial_logp: Vec<T>, mut transitions: Vec<Transition<T>>) -> Result<Self, HmmError> {
        let n_states = initial_logp.len();
        for t in &transitions {
            if t.from >= n_states || t.to >= n_states {
                return Err(HmmError::StateOutOfRange(t.from.max(t.to)));
            }
        }
        transitions.sort_by_key(|t| (t.from, t.to));
        if let Some(w) = transitions.windows(2).find(|w| (w[0].from, w[0].to) == (w[1].from, w[1].to)) {
            return Err(HmmError::DuplicateTransition { from: w[0].from, to: w[0].to });
        }
        Ok(Self { n_states, initial_logp, transitions })
    }

    /// Builds from plain probabilities; zero initial entries become impossible.
    pub fn from_probabilities(initial: &[T], transitions: &[(usize, usize, T)]) -> Result<Self, HmmError> {
        let check = |p: T| {
            if p > T::zero() && p <= T::one() {
                Ok(p.ln())
            } else {
                Err(HmmError::InvalidProbability(p.to_f64_lossy()))
            }
        };
        let initial_logp = initial
            .iter()
            .map(|&p| if p == T::zero() { Ok(log_zero()) } else { check(p) })
            .collect::<Result<Vec<_>, _>>()?;
        let transitions = transitions
            .iter()
            .map(|&(from, to, p)| Ok(Transition { from, to, logp: check(p)? }))
            .collect::<Result<Vec<_>, HmmError>>()?;
        Self::new(initial_logp, transitions)
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn initial_logp(&self) -> &[T] {
        &self.initial_logp
    }

    pub fn transitions(&self) -> &[Transition<T>] {
        &self.transitions
    }

    pub fn outgoing(&self, from: usize) -> &[Transition<T>] {
        let lo = self.transitions.partition_point(|t| t.from < from);
        let hi = self.transitions.partition_point(|t| t.from <= from);
        &self.transitions[lo..hi]
    }

    pub fn log_transition(&self, from: usize, to: usize) -> Option<T> {
        self.transitions
            .binary_search_by_key(&(from, to), |t| (t.from, t.to))
            .ok()
            .map(|k| self.transitions[k].logp)
    }

    /// Largest deviation from 1 of any state's outgoing mass, and of the
    /// initial mass.
    pub fn stochasticity_error(&self) -> T {
        let mass = |logs: &mut dyn Iterator<Item = T>| logs.fold(T::zero(), |acc, l| acc + l.exp());
        let mut worst = (mass(&mut self.initial_logp.iter().copied()) - T::one()).abs();
        for s in 0..self.n_states {
            let out = mass(&mut self.outgoing(s).iter().map(|t| t.logp));
            worst = worst.max((out - T::one()).abs());
        }
        worst
    }
}

/// Per-observation, per-state emission log-likelihoods, row-major `T × N`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmissionMatrix<T> {
    n_states: usize,
    values: Vec<T>,
}

impl<T: Scalar> EmissionMatrix<T> {
    pub fn new(n_states: usize, values: Vec<T>) -> Self {
        assert!(n_states > 0 && values.len() % n_states == 0, "ragged emission matrix");
        Self { n_states, values }
    }

    pub fn from_fn(n_obs: usize, n_states: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut values = Vec::with_capacity(n_obs * n_states);
        for t in 0..n_obs {
            for s in 0..n_states {
                values.push(f(t, s));
            }
        }
        Self { n_states, values }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.n_states
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn row(&self, t: usize) -> &[T] {
        &self.values[t * self.n_states..(t + 1) * self.n_states]
    }

    #[inline]
    pub fn get(&self, t: usize, s: usize) -> T {
        self.values[t * self.n_states + s]
    }
}

/// Decoded state indices, one per observation, and the joint log score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatePath<T> {
    pub states: Vec<usize>,
    pub log_score: T,
}

/// Per-step diagnostics: the best state at every step and its lead over the
/// runner-up in the forward trellis.
#[derive(Debug, Clone, PartialEq)]
pub struct TrellisStep<T> {
    pub best_state: usize,
    pub best_score: T,
    pub margin: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ViterbiOutput<T> {
    pub path: StatePath<T>,
    pub steps: Vec<TrellisStep<T>>,
}

/// Exact most probable state sequence.
///
/// Runs in `O(E·T)` for `E` listed transitions. Ties between predecessors go to
/// the lower state index, as do ties among final states.
pub fn viterbi<T: Scalar>(hmm: &SparseHmm<T>, emissions: &EmissionMatrix<T>) -> Result<StatePath<T>, HmmError> {
    viterbi_with_trace(hmm, emissions).map(|o| o.path)
}

pub fn viterbi_with_trace<T: Scalar>(
    hmm: &SparseHmm<T>,
    emissions: &EmissionMatrix<T>,
) -> Result<ViterbiOutput<T>, HmmError> {
    let n = hmm.n_states();
    if emissions.n_states() != n {
        return Err(HmmError::EmissionShape { got: emissions.n_states(), expected: n });
    }
    let len = emissions.len();
    if len == 0 {
        return Err(HmmError::EmptyObservations);
    }

    let neg_inf = log_zero::<T>();
    let mut delta: Vec<T> = hmm
        .initial_logp()
        .iter()
        .zip(emissions.row(0))
        .map(|(&a, &b)| if a == neg_inf { neg_inf } else { a + b })
        .collect();
    let mut next = vec![neg_inf; n];
    let mut back = vec![usize::MAX; len * n];
    let mut steps = Vec::with_capacity(len);
    steps.push(trellis_step(&delta));

    for t in 1..len {
        next.fill(neg_inf);
        let bp = &mut back[t * n..(t + 1) * n];
        // sorted by `from`, so a strict comparison keeps the lowest predecessor on ties
        for tr in hmm.transitions() {
            let prev = delta[tr.from];
            if prev == neg_inf {
                continue;
            }
            let s = prev + tr.logp;
            if s > next[tr.to] {
                next[tr.to] = s;
                bp[tr.to] = tr.from;
            }
        }
        for (v, &e) in next.iter_mut().zip(emissions.row(t)) {
            if *v != neg_inf {
                *v += e;
            }
        }
        std::mem::swap(&mut delta, &mut next);
        steps.push(trellis_step(&delta));
    }

    let (mut state, log_score) = delta
        .iter()
        .enumerate()
        .fold((usize::MAX, neg_inf), |(bs, bv), (s, &v)| if v > bv { (s, v) } else { (bs, bv) });
    if state == usize::MAX || !log_score.is_finite() {
        return Err(HmmError::NoValidPath);
    }
    let mut states = vec![0; len];
    states[len - 1] = state;
    for t in (1..len).rev() {
        state = back[t * n + state];
        states[t - 1] = state;
    }
    Ok(ViterbiOutput { path: StatePath { states, log_score }, steps })
}

fn trellis_step<T: Scalar>(delta: &[T]) -> TrellisStep<T> {
    let neg_inf = log_zero::<T>();
    let (mut best, mut first, mut second) = (0, neg_inf, neg_inf);
    for (s, &v) in delta.iter().enumerate() {
        if v > first {
            second = first;
            first = v;
            best = s;
        } else if v > second {
            second = v;
        }
    }
    let margin = if second == neg_inf { T::infinity() } else { first - second };
    TrellisStep { best_state: best, best_score: first, margin }
}

/// Joint log score of a given path; `-∞` when it uses an absent transition or a
/// state with zero initial probability.
pub fn path_log_score<T: Scalar>(
    hmm: &SparseHmm<T>,
    emissions: &EmissionMatrix<T>,
    path: &[usize],
) -> Result<T, HmmError> {
    if path.len() != emissions.len() {
        return Err(HmmError::LengthMismatch { path: path.len(), observations: emissions.len() });
    }
    if path.is_empty() {
        return Err(HmmError::EmptyObservations);
    }
    if let Some(&s) = path.iter().find(|&&s| s >= hmm.n_states()) {
        return Err(HmmError::StateOutOfRange(s));
    }
    let neg_inf = log_zero::<T>();
    let init = hmm.initial_logp()[path[0]];
    if init == neg_inf {
        return Ok(neg_inf);
    }
    let mut score = init + emissions.get(0, path[0]);
    for (t, w) in path.windows(2).enumerate() {
        match hmm.log_transition(w[0], w[1]) {
            Some(lp) => score += lp + emissions.get(t + 1, w[1]),
            None => return Ok(neg_inf),
        }
    }
    Ok(score)
}
