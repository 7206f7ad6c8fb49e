//! Scoring fragmentations against ground truth.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fragment::{self, FragConfig, FragError, Fragmentation, StepPolicy};
use crate::geometry::RawStroke;
use crate::model::HmmModel;
use crate::scalar::Scalar;
use crate::synth::GroundTruth;

/// A corpus stroke that could not be fragmented.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("stroke `{id}`: {source}")]
pub struct StrokeError {
    pub id: String,
    #[source]
    pub source: FragError,
}

/// One-to-one pairing of predicted and true segment points (raw indices).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MatchResult {
    /// `(predicted, truth)` pairs.
    pub matched: Vec<(usize, usize)>,
    pub unmatched_predicted: Vec<usize>,
    pub unmatched_truth: Vec<usize>,
    pub tolerance: f64,
}

impl MatchResult {
    pub fn n_predicted(&self) -> usize {
        self.matched.len() + self.unmatched_predicted.len()
    }

    pub fn n_truth(&self) -> usize {
        self.matched.len() + self.unmatched_truth.len()
    }
}

/// Greedy nearest-first matching by distance between the referenced raw points.
/// The stroke's first and last points are never counted.
pub fn match_points<T: Scalar>(predicted: &[usize], truth: &[usize], raw: &RawStroke<T>, tolerance: f64) -> MatchResult {
    assert!(tolerance > 0.0, "tolerance must be positive");
    let last = raw.len() - 1;
    let interior = |v: &[usize]| {
        let mut v: Vec<usize> = v.iter().copied().filter(|&i| i > 0 && i < last).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let pred = interior(predicted);
    let truth = interior(truth);

    let mut pairs = Vec::new();
    for (a, &p) in pred.iter().enumerate() {
        for (b, &t) in truth.iter().enumerate() {
            let dist = raw.xy(p).distance(raw.xy(t)).to_f64().unwrap_or(f64::INFINITY);
            if dist <= tolerance {
                pairs.push((dist, a, b));
            }
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let mut pred_used = vec![false; pred.len()];
    let mut truth_used = vec![false; truth.len()];
    let mut matched = Vec::new();
    for (_, a, b) in pairs {
        if !pred_used[a] && !truth_used[b] {
            pred_used[a] = true;
            truth_used[b] = true;
            matched.push((pred[a], truth[b]));
        }
    }
    matched.sort_unstable();
    let keep = |v: &[usize], used: &[bool]| v.iter().zip(used).filter(|(_, &u)| !u).map(|(&i, _)| i).collect();
    MatchResult {
        unmatched_predicted: keep(&pred, &pred_used),
        unmatched_truth: keep(&truth, &truth_used),
        matched,
        tolerance,
    }
}

/// Per-stroke outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrokeRecord {
    pub id: String,
    pub family: String,
    pub matching: MatchResult,
    pub decode_ms: f64,
    pub observations: usize,
    /// Fraction of interior raw points whose decoded primitive equals the true one.
    pub kind_accuracy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Rates {
    pub predicted: usize,
    pub truth: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub false_positive_rate: f64,
    pub false_negative_rate: f64,
}

impl Rates {
    pub fn from_matches<'a>(results: impl IntoIterator<Item = &'a MatchResult>) -> Self {
        let mut r = Rates::default();
        for m in results {
            r.predicted += m.n_predicted();
            r.truth += m.n_truth();
            r.false_positives += m.unmatched_predicted.len();
            r.false_negatives += m.unmatched_truth.len();
        }
        r.false_positive_rate = ratio(r.false_positives, r.predicted);
        r.false_negative_rate = ratio(r.false_negatives, r.truth);
        r
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Timing {
    pub mean_ms: f64,
    pub max_ms: f64,
    pub max_observations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub false_positive_rate: f64,
    pub false_negative_rate: f64,
    pub rates: Rates,
    pub timing: Timing,
    pub mean_kind_accuracy: f64,
    pub strokes: Vec<StrokeRecord>,
}

/// Micro-averaged rates over all records.
pub fn score(records: Vec<StrokeRecord>) -> EvalReport {
    let rates = Rates::from_matches(records.iter().map(|r| &r.matching));
    let n = records.len().max(1) as f64;
    let timing = Timing {
        mean_ms: records.iter().map(|r| r.decode_ms).sum::<f64>() / n,
        max_ms: records.iter().map(|r| r.decode_ms).fold(0.0, f64::max),
        max_observations: records.iter().map(|r| r.observations).max().unwrap_or(0),
    };
    EvalReport {
        false_positive_rate: rates.false_positive_rate,
        false_negative_rate: rates.false_negative_rate,
        rates,
        timing,
        mean_kind_accuracy: records.iter().map(|r| r.kind_accuracy).sum::<f64>() / n,
        strokes: records,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Matching radius in resampling steps.
    pub tolerance_steps: f64,
    /// Resample each stroke at the step recorded in its ground truth.
    pub use_truth_step: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self { tolerance_steps: 2.5, use_truth_step: true }
    }
}

fn kind_accuracy(frag: &Fragmentation<f64>, truth: &GroundTruth, len: usize) -> f64 {
    if len <= 2 {
        return 1.0;
    }
    let mut hits = 0usize;
    let (mut seg, mut prim) = (0usize, 0usize);
    for i in 1..len - 1 {
        while seg + 1 < frag.segments.len() && frag.segments[seg].raw_end <= i {
            seg += 1;
        }
        while prim < truth.true_segment_points.len() && truth.true_segment_points[prim] <= i {
            prim += 1;
        }
        let predicted = frag.segments.get(seg).map(|s| s.kind);
        let expected = truth.primitives.get(prim).copied();
        if predicted.is_some() && predicted == expected {
            hits += 1;
        }
    }
    hits as f64 / (len - 2) as f64
}

/// Fragments one labelled stroke and scores it.
pub fn evaluate_stroke(
    stroke: &RawStroke<f64>,
    truth: &GroundTruth,
    model: &HmmModel<f64>,
    frag: &FragConfig<f64>,
    config: &EvalConfig,
) -> Result<StrokeRecord, FragError> {
    let mut frag = *frag;
    if config.use_truth_step {
        frag.step = StepPolicy::Fixed { step: truth.step_d };
    }
    let step = frag.step_for(stroke);
    let start = Instant::now();
    let result = fragment::fragment(stroke, model, &frag)?;
    let decode_ms = start.elapsed().as_secs_f64() * 1e3;
    let matching = match_points(&result.segment_points, &truth.true_segment_points, stroke, config.tolerance_steps * step);
    Ok(StrokeRecord {
        id: truth.id.clone(),
        family: truth.family.clone(),
        matching,
        decode_ms,
        observations: result.path.states.len(),
        kind_accuracy: kind_accuracy(&result, truth, stroke.len()),
    })
}

pub fn evaluate(
    corpus: &[(RawStroke<f64>, GroundTruth)],
    model: &HmmModel<f64>,
    frag: &FragConfig<f64>,
    config: &EvalConfig,
) -> Result<EvalReport, StrokeError> {
    let records = corpus
        .iter()
        .map(|(s, t)| evaluate_stroke(s, t, model, frag, config).map_err(|source| StrokeError { id: t.id.clone(), source }))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(score(records))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyRow {
    pub family: String,
    pub strokes: usize,
    pub structured: Rates,
    pub baseline: Rates,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub structured: EvalReport,
    pub baseline: EvalReport,
    pub families: Vec<FamilyRow>,
}

pub fn family_rates(report: &EvalReport) -> BTreeMap<String, (usize, Rates)> {
    let mut groups: BTreeMap<String, Vec<&MatchResult>> = BTreeMap::new();
    for r in &report.strokes {
        groups.entry(r.family.clone()).or_default().push(&r.matching);
    }
    groups
        .into_iter()
        .map(|(f, ms)| (f, (ms.len(), Rates::from_matches(ms))))
        .collect()
}

/// Mean decode milliseconds per stroke of each family.
pub fn family_mean_ms(report: &EvalReport) -> BTreeMap<String, f64> {
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for r in &report.strokes {
        let e = acc.entry(r.family.clone()).or_default();
        e.0 += r.decode_ms;
        e.1 += 1;
    }
    acc.into_iter().map(|(f, (sum, n))| (f, sum / n as f64)).collect()
}

/// Runs both models on the same corpus.
pub fn compare_models(
    corpus: &[(RawStroke<f64>, GroundTruth)],
    structured: &HmmModel<f64>,
    baseline: &HmmModel<f64>,
    frag: &FragConfig<f64>,
    config: &EvalConfig,
) -> Result<Comparison, StrokeError> {
    let structured = evaluate(corpus, structured, frag, config)?;
    let baseline = evaluate(corpus, baseline, frag, config)?;
    let base = family_rates(&baseline);
    let families = family_rates(&structured)
        .into_iter()
        .map(|(family, (strokes, s))| {
            let b = base.get(&family).map(|x| x.1).unwrap_or_default();
            FamilyRow { family, strokes, structured: s, baseline: b }
        })
        .collect();
    Ok(Comparison { structured, baseline, families })
}

fn pct(x: f64) -> String {
    format!("{:.2}%", 100.0 * x)
}

impl EvalReport {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:<14} {:>8} {:>8} {:>9} {:>9} {:>9}", "family", "strokes", "FP", "FN", "kind acc", "ms/stroke");
        let mut acc: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
        for r in &self.strokes {
            let e = acc.entry(&r.family).or_default();
            e.0 += r.kind_accuracy;
            e.1 += 1;
        }
        let ms = family_mean_ms(self);
        for (family, (n, rates)) in family_rates(self) {
            let ka = acc.get(family.as_str()).map_or(0.0, |(s, n)| s / *n as f64);
            let _ = writeln!(
                out,
                "{family:<14} {n:>8} {:>8} {:>9} {:>9} {:>9.3}",
                pct(rates.false_positive_rate),
                pct(rates.false_negative_rate),
                pct(ka),
                ms[&family]
            );
        }
        let _ = writeln!(
            out,
            "{:<14} {:>8} {:>8} {:>9} {:>9} {:>9.3}",
            "all",
            self.strokes.len(),
            pct(self.false_positive_rate),
            pct(self.false_negative_rate),
            pct(self.mean_kind_accuracy),
            self.timing.mean_ms
        );
        let _ = writeln!(
            out,
            "decode time: mean {:.3} ms, max {:.3} ms per stroke (max {} observations)",
            self.timing.mean_ms, self.timing.max_ms, self.timing.max_observations
        );
        out
    }

    /// One row per stroke.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,family,predicted,truth,false_positives,false_negatives,observations,decode_ms,kind_accuracy\n");
        for r in &self.strokes {
            let m = &r.matching;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{:.4},{:.4}",
                r.id,
                r.family,
                m.n_predicted(),
                m.n_truth(),
                m.unmatched_predicted.len(),
                m.unmatched_truth.len(),
                r.observations,
                r.decode_ms,
                r.kind_accuracy
            );
        }
        out
    }
}

impl Comparison {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<14} {:>8} {:>10} {:>10} {:>10} {:>10} {:>9} {:>9}",
            "family", "strokes", "FP struct", "FP base", "FN struct", "FN base", "ms struct", "ms base"
        );
        let ms_s = family_mean_ms(&self.structured);
        let ms_b = family_mean_ms(&self.baseline);
        let mut row = |name: &str, n: usize, s: &Rates, b: &Rates, ms: (f64, f64)| {
            let _ = writeln!(
                out,
                "{name:<14} {n:>8} {:>10} {:>10} {:>10} {:>10} {:>9.3} {:>9.3}",
                pct(s.false_positive_rate),
                pct(b.false_positive_rate),
                pct(s.false_negative_rate),
                pct(b.false_negative_rate),
                ms.0,
                ms.1
            );
        };
        for f in &self.families {
            let ms = (ms_s.get(&f.family).copied().unwrap_or(0.0), ms_b.get(&f.family).copied().unwrap_or(0.0));
            row(&f.family, f.strokes, &f.structured, &f.baseline, ms);
        }
        row(
            "all",
            self.structured.strokes.len(),
            &self.structured.rates,
            &self.baseline.rates,
            (self.structured.timing.mean_ms, self.baseline.timing.mean_ms),
        );
        let _ = writeln!(
            out,
            "decode time (ms/stroke): structured mean {:.3} max {:.3}; baseline mean {:.3} max {:.3}",
            self.structured.timing.mean_ms,
            self.structured.timing.max_ms,
            self.baseline.timing.mean_ms,
            self.baseline.timing.max_ms
        );
        out
    }
}
