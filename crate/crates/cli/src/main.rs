//! `strokefrag` command-line tool.
//!
//! Exit codes: 0 success, 1 bad input (unreadable file, malformed JSON or TOML,
//! unknown family, id mismatch, invalid option), 2 degenerate stroke.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use strokefrag::eval::{compare_models, evaluate, StrokeError};
use strokefrag::fragment::{fragment_traced, FragError};
use strokefrag::geometry::RawStroke;
use strokefrag::io::{FragmentationFile, FragmentationJson, StrokeFile, TruthFile};
use strokefrag::model::{build_ergodic_baseline, build_structured_model, HmmModel, StateEmission, StateKind, Topology};
use strokefrag::svg::render_sheet;
use strokefrag::synth::{self, CorpusSpec};

use config::{ModelChoice, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "strokefrag", version, about = "Fragment pen strokes into lines and circular arcs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Model topology.
    #[arg(long, global = true, value_enum)]
    model: Option<ModelChoice>,
    /// Flat TOML run configuration; flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Master seed for corpus generation.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fragment every stroke of a stroke JSON file.
    Fragment {
        /// Stroke file; `-` or absent reads stdin.
        input: Option<PathBuf>,
        /// Fragmentation JSON; stdout when absent.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Annotated SVG sheet of all strokes.
        #[arg(long)]
        svg: Option<PathBuf>,
        /// CSV of the per-point features.
        #[arg(long, value_name = "PATH")]
        debug_observations: Option<PathBuf>,
        /// CSV of the decoded states and per-step trellis margins.
        #[arg(long, value_name = "PATH")]
        debug_path: Option<PathBuf>,
    },
    /// Generate a labelled synthetic corpus.
    Gen {
        /// Corpus recipe (JSON); the default acceptance recipe when absent.
        #[arg(long)]
        recipe: Option<PathBuf>,
        #[arg(short, long, default_value = "corpus.json")]
        output: PathBuf,
        #[arg(long, default_value = "truth.json")]
        truth: PathBuf,
    },
    /// Score fragmentations of a labelled corpus.
    Eval {
        corpus: PathBuf,
        truth: PathBuf,
        /// Run the structured model and the ergodic baseline side by side.
        #[arg(long)]
        compare: bool,
        /// Full report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
        /// One CSV row per stroke.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print the model's states, transitions and densities as JSON.
    DumpModel {
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("stroke `{id}`: {source}")]
    Degenerate { id: String, source: FragError },
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Input(_) => 1,
            CliError::Degenerate { .. } => 2,
        }
    }
}

fn input_err(context: impl std::fmt::Display, e: impl std::fmt::Display) -> CliError {
    CliError::Input(format!("{context}: {e}"))
}

fn read_text(path: Option<&Path>) -> Result<String, CliError> {
    match path {
        None => read_stdin(),
        Some(p) if p.as_os_str() == "-" => read_stdin(),
        Some(p) => fs::read_to_string(p).map_err(|e| input_err(p.display(), e)),
    }
}

fn read_stdin() -> Result<String, CliError> {
    let mut s = String::new();
    io::stdin().read_to_string(&mut s).map_err(|e| input_err("stdin", e))?;
    Ok(s)
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        // a closed pipe (`| head`) is not an error
        None => match io::stdout().write_all(text.as_bytes()) {
            Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(input_err("stdout", e)),
            _ => Ok(()),
        },
        Some(p) => fs::write(p, text).map_err(|e| input_err(p.display(), e)),
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn load_strokes(text: &str, source: &str) -> Result<Vec<RawStroke<f64>>, CliError> {
    let file = StrokeFile::parse(text).map_err(|e| input_err(source, e))?;
    file.strokes
        .iter()
        .map(|s| s.to_stroke().map_err(|e| CliError::Degenerate { id: s.id.clone(), source: e.into() }))
        .collect()
}

fn build_model(choice: ModelChoice, cfg: &RunConfig) -> Result<HmmModel<f64>, CliError> {
    let params = cfg.model_params();
    let built = match choice {
        ModelChoice::Structured => build_structured_model(1.0, &params),
        ModelChoice::Ergodic => build_ergodic_baseline(1.0, &params),
    };
    built.map_err(|e| input_err("model", e))
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::parse(&read_text(Some(p))?).map_err(|e| input_err(p.display(), e))?,
        None => RunConfig::default(),
    };
    if cli.model.is_some() {
        cfg.model = cli.model;
    }
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    let choice = cfg.model.unwrap_or_default();
    match cli.command {
        Command::Fragment { input, output, svg, debug_observations, debug_path } => {
            let input = input.or_else(|| cfg.input.clone());
            let output = output.or_else(|| cfg.output.clone());
            let svg = svg.or_else(|| cfg.svg.clone());
            let source = input.as_ref().map_or("stdin".to_owned(), |p| p.display().to_string());
            let strokes = load_strokes(&read_text(input.as_deref())?, &source)?;
            let model = build_model(choice, &cfg)?;
            let frag_cfg = cfg.frag_config();
            let mut traced = Vec::with_capacity(strokes.len());
            for s in &strokes {
                let t = fragment_traced(s, &model, &frag_cfg)
                    .map_err(|e| CliError::Degenerate { id: s.id().to_owned(), source: e })?;
                traced.push(t);
            }
            let file = FragmentationFile {
                results: strokes.iter().zip(&traced).map(|(s, t)| FragmentationJson::new(s.id(), &t.fragmentation)).collect(),
            };
            write_text(output.as_deref(), &to_json(&file))?;
            if let Some(p) = svg {
                let items: Vec<_> = strokes.iter().zip(&traced).map(|(s, t)| (s, &t.fragmentation)).collect();
                write_text(Some(&p), &render_sheet(&items, &cfg.svg_style()))?;
            }
            if let Some(p) = debug_observations {
                let mut csv = String::from("id,i,f1,f2,f3,f4\n");
                for (s, t) in strokes.iter().zip(&traced) {
                    for (i, o) in t.observations.observations.iter().enumerate() {
                        let _ = writeln!(csv, "{},{i},{},{},{},{}", s.id(), o.f1, o.f2, o.f3, o.f4);
                    }
                }
                write_text(Some(&p), &csv)?;
            }
            if let Some(p) = debug_path {
                let mut csv = String::from("id,t,state,kind,trellis_best,trellis_score,margin\n");
                for (s, t) in strokes.iter().zip(&traced) {
                    for (i, (&state, step)) in t.fragmentation.path.states.iter().zip(&t.trace).enumerate() {
                        let _ = writeln!(
                            csv,
                            "{},{i},{state},{},{},{},{}",
                            s.id(),
                            model.kind(state),
                            step.best_state,
                            step.best_score,
                            step.margin
                        );
                    }
                }
                write_text(Some(&p), &csv)?;
            }
            Ok(())
        }
        Command::Gen { recipe, output, truth } => {
            let mut spec = match &recipe {
                Some(p) => serde_json::from_str::<CorpusSpec>(&read_text(Some(p))?).map_err(|e| input_err(p.display(), e))?,
                None => CorpusSpec::default_acceptance(),
            };
            if let Some(seed) = cfg.seed {
                spec.seed = seed;
            }
            let items = synth::corpus(&spec).map_err(|e| input_err("recipe", e))?;
            let (strokes, truths): (Vec<_>, Vec<_>) = items.into_iter().unzip();
            write_text(Some(&output), &to_json(&StrokeFile::from_strokes(&strokes)))?;
            write_text(Some(&truth), &to_json(&TruthFile { truths }))?;
            eprintln!("wrote {} strokes to {} and {}", strokes.len(), output.display(), truth.display());
            Ok(())
        }
        Command::Eval { corpus, truth, compare, json, csv } => {
            let strokes = load_strokes(&read_text(Some(&corpus))?, &corpus.display().to_string())?;
            let truths: TruthFile =
                serde_json::from_str(&read_text(Some(&truth))?).map_err(|e| input_err(truth.display(), e))?;
            if strokes.len() != truths.truths.len() {
                return Err(CliError::Input(format!(
                    "id mismatch: {} strokes but {} ground-truth records",
                    strokes.len(),
                    truths.truths.len()
                )));
            }
            if let Some((s, t)) = strokes.iter().zip(&truths.truths).find(|(s, t)| s.id() != t.id) {
                return Err(CliError::Input(format!("id mismatch: stroke `{}` paired with truth `{}`", s.id(), t.id)));
            }
            let pairs: Vec<_> = strokes.into_iter().zip(truths.truths).collect();
            let frag_cfg = cfg.frag_config();
            let eval_cfg = cfg.eval_config();
            let degenerate = |e: StrokeError| CliError::Degenerate { id: e.id, source: e.source };
            if compare {
                let structured = build_model(ModelChoice::Structured, &cfg)?;
                let baseline = build_model(ModelChoice::Ergodic, &cfg)?;
                let cmp = compare_models(&pairs, &structured, &baseline, &frag_cfg, &eval_cfg).map_err(degenerate)?;
                write_text(None, &cmp.to_table())?;
                if let Some(p) = json {
                    write_text(Some(&p), &to_json(&cmp))?;
                }
                if let Some(p) = csv {
                    write_text(Some(&p), &cmp.structured.to_csv())?;
                }
            } else {
                let model = build_model(choice, &cfg)?;
                let report = evaluate(&pairs, &model, &frag_cfg, &eval_cfg).map_err(degenerate)?;
                write_text(None, &report.to_table())?;
                if let Some(p) = json {
                    write_text(Some(&p), &to_json(&report))?;
                }
                if let Some(p) = csv {
                    write_text(Some(&p), &report.to_csv())?;
                }
            }
            Ok(())
        }
        Command::DumpModel { output } => {
            let model = build_model(choice, &cfg)?;
            write_text(output.as_deref(), &to_json(&ModelDump::new(&model)))
        }
    }
}

#[derive(Serialize)]
struct StateDump {
    index: usize,
    kind: StateKind,
    initial_probability: f64,
}

#[derive(Serialize)]
struct TransitionDump {
    from: usize,
    to: usize,
    probability: f64,
}

/// Model tables with probabilities instead of logs, so the JSON stays finite.
#[derive(Serialize)]
struct ModelDump<'a> {
    topology: Topology,
    step_d: f64,
    states: Vec<StateDump>,
    transitions: Vec<TransitionDump>,
    emissions: &'a [StateEmission<f64>],
}

impl<'a> ModelDump<'a> {
    fn new(model: &'a HmmModel<f64>) -> Self {
        let initial = model.hmm.initial_logp();
        Self {
            topology: model.topology,
            step_d: model.step_d,
            states: model
                .states
                .iter()
                .map(|s| StateDump { index: s.index, kind: s.kind, initial_probability: initial[s.index].exp() })
                .collect(),
            transitions: model
                .hmm
                .transitions()
                .iter()
                .map(|t| TransitionDump { from: t.from, to: t.to, probability: t.logp.exp() })
                .collect(),
            emissions: &model.emissions.states,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
