//! Evaluates both models on the default noisy corpus and prints the comparison.

use strokefrag::eval::{compare_models, EvalConfig};
use strokefrag::fragment::FragConfig;
use strokefrag::model::{build_ergodic_baseline, build_structured_model, ModelParams};
use strokefrag::synth::{corpus, CorpusSpec};

fn main() {
    let mut recipe = CorpusSpec::default_acceptance();
    if let Some(sigma) = std::env::args().nth(1).and_then(|s| s.parse::<f64>().ok()) {
        for f in &mut recipe.families {
            f.noise.jitter_sigma = sigma;
        }
    }
    let strokes = corpus(&recipe).expect("corpus");
    let params = ModelParams::default();
    let structured = build_structured_model(1.0, &params).expect("model");
    let baseline = build_ergodic_baseline(1.0, &params).expect("model");
    let cmp = compare_models(&strokes, &structured, &baseline, &FragConfig::default(), &EvalConfig::default()).expect("eval");
    print!("{}", cmp.to_table());
    if std::env::var_os("SHOW_ERRORS").is_some() {
        for r in &cmp.structured.strokes {
            let m = &r.matching;
            if !m.unmatched_predicted.is_empty() || !m.unmatched_truth.is_empty() {
                println!("{} fp={:?} fn={:?} matched={:?}", r.id, m.unmatched_predicted, m.unmatched_truth, m.matched);
            }
        }
    }
}
