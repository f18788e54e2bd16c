//! Command-line front end. Exit codes: 0 success, 1 usage, 2 data error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::config::{NerSource, RunConfig, SplitPart};
use crate::error::{Error, Result};
use crate::eval::MatchMode;
use crate::pipeline::{
    format_bench, format_reference_checks, reference_checks, run_bench, run_evaluate_to_disk,
    run_extract, run_inspect, run_train, TrainTarget,
};
use crate::relext::{MissingParse, Strategy};
use crate::relnet::OutputMode;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "forcegraph",
    version,
    about = "Extract person-unit graphs from annotated news text"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Predict entities and attachments; write .ann files and graph.json.
    Extract {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Train the tagger and/or relation models on the training split.
    Train {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = Component::All)]
        component: Component,
        #[arg(long, value_enum, default_value_t = ModeChoice::Both)]
        output_mode: ModeChoice,
    },
    /// Score strategies (or saved predictions) against gold annotations.
    Evaluate {
        #[command(flatten)]
        common: CommonArgs,
        /// Directory of predicted .ann files to score instead of running strategies.
        #[arg(long)]
        predictions: Option<PathBuf>,
        /// Recompute the published precision/recall/F1 cells from their counts.
        #[arg(long)]
        check_reference_metrics: bool,
    },
    /// Time each pipeline component per sentence.
    Bench {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Summarize the corpus, one document, or a model file.
    Inspect {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        doc: Option<String>,
        #[arg(long)]
        model: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Component {
    Tagger,
    Relnet,
    All,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeChoice {
    SelectK,
    Constrained3,
    Both,
}

#[derive(Args, Debug, Default)]
struct CommonArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long)]
    models_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    strategy: Option<Strategy>,
    /// Comma-separated strategies for evaluate.
    #[arg(long, value_delimiter = ',')]
    strategies: Vec<Strategy>,
    #[arg(long, value_parser = ["gold", "model"])]
    ner_mode: Option<String>,
    #[arg(long)]
    tagger_model: Option<PathBuf>,
    #[arg(long)]
    relnet_model: Option<PathBuf>,
    #[arg(long)]
    gazetteer: Option<PathBuf>,
    /// What to do when a document lacks a parse: fallback, skip or error.
    #[arg(long)]
    missing_parse: Option<MissingParse>,
    /// Keep or drop traversal direction in path patterns.
    #[arg(long)]
    directed_patterns: Option<bool>,
    #[arg(long)]
    min_count: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    relnet_epochs: Option<usize>,
    #[arg(long)]
    tagger_epochs: Option<usize>,
    #[arg(long)]
    split_fraction: Option<f64>,
    /// all, train or test.
    #[arg(long)]
    eval_split: Option<SplitPart>,
    #[arg(long, value_parser = ["exact", "overlap"])]
    match_mode: Option<String>,
    #[arg(long)]
    repetitions: Option<usize>,
    /// Extraction threads (0 = all cores).
    #[arg(long)]
    workers: Option<usize>,
    #[arg(short, long)]
    verbose: bool,
}

impl CommonArgs {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($field:ident => $target:ident),* $(,)?) => {
                $(if let Some(v) = &self.$field { cfg.$target = v.clone(); })*
            };
        }
        set!(
            corpus => corpus_dir,
            output => output_dir,
            seed => seed,
            strategy => strategy,
            missing_parse => missing_parse,
            directed_patterns => directed_patterns,
            min_count => min_count,
            hidden => hidden,
            learning_rate => learning_rate,
            relnet_epochs => relnet_epochs,
            tagger_epochs => tagger_epochs,
            split_fraction => split_fraction,
            eval_split => eval_split,
            repetitions => repetitions,
            workers => workers,
        );
        if self.models_dir.is_some() {
            cfg.models_dir = self.models_dir.clone();
        }
        if self.tagger_model.is_some() {
            cfg.tagger_model = self.tagger_model.clone();
        }
        if self.relnet_model.is_some() {
            cfg.relnet_model = self.relnet_model.clone();
        }
        if self.gazetteer.is_some() {
            cfg.gazetteer = self.gazetteer.clone();
        }
        if !self.strategies.is_empty() {
            cfg.strategies = self.strategies.clone();
        }
        match self.ner_mode.as_deref() {
            Some("model") => cfg.ner_mode = NerSource::Model,
            Some(_) => cfg.ner_mode = NerSource::Gold,
            None => {}
        }
        match self.match_mode.as_deref() {
            Some("overlap") => cfg.match_mode = MatchMode::Overlap,
            Some(_) => cfg.match_mode = MatchMode::Exact,
            None => {}
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn init_logging(verbose: bool) {
    let level = if verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .try_init();
}

/// Parse `args` (including the program name) and run. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{text}");
                    EXIT_USAGE
                }
            };
        }
    };
    match dispatch(cli, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            match e {
                Error::Config(_) => EXIT_USAGE,
                _ => EXIT_DATA,
            }
        }
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Extract { common } => {
            init_logging(common.verbose);
            let cfg = common.resolve()?;
            let s = run_extract(&cfg)?;
            emit(
                out,
                &format!(
                    "documents {}\nentities {}\nattachments {}\nabstentions {}\ngraph {}\n",
                    s.documents,
                    s.entities,
                    s.attachments - s.abstentions,
                    s.abstentions,
                    s.graph_path.display()
                ),
            )
        }
        Command::Train {
            common,
            component,
            output_mode,
        } => {
            init_logging(common.verbose);
            let cfg = common.resolve()?;
            let target = match component {
                Component::Tagger => TrainTarget::Tagger,
                Component::Relnet => TrainTarget::Relnet,
                Component::All => TrainTarget::All,
            };
            let modes: Vec<OutputMode> = match output_mode {
                ModeChoice::SelectK => vec![OutputMode::SelectK],
                ModeChoice::Constrained3 => vec![OutputMode::Constrained3],
                ModeChoice::Both => vec![OutputMode::SelectK, OutputMode::Constrained3],
            };
            let s = run_train(&cfg, target, &modes)?;
            let mut text = format!("training documents {}\n", s.training_documents);
            if let Some((path, params)) = &s.tagger {
                text.push_str(&format!("tagger {} parameters {params}\n", path.display()));
            }
            for r in &s.relnets {
                text.push_str(&format!(
                    "relnet {} {} parameters {} vocab {} examples {} loss {:.4} -> {:.4}\n",
                    r.mode,
                    r.path.display(),
                    r.parameters,
                    r.vocab_size,
                    r.examples,
                    r.loss_curve.first().copied().unwrap_or(f64::NAN),
                    r.loss_curve.last().copied().unwrap_or(f64::NAN),
                ));
            }
            emit(out, &text)
        }
        Command::Evaluate {
            common,
            predictions,
            check_reference_metrics,
        } => {
            init_logging(common.verbose);
            if check_reference_metrics {
                let checks = reference_checks();
                emit(out, &format_reference_checks(&checks))?;
                let failed = checks.iter().filter(|c| !c.ok).count();
                if failed > 0 {
                    return Err(Error::Check(format!(
                        "{failed} reference rows outside tolerance"
                    )));
                }
                return Ok(());
            }
            let cfg = common.resolve()?;
            let (_, text) = run_evaluate_to_disk(&cfg, predictions.as_deref())?;
            emit(out, &text)
        }
        Command::Bench { common } => {
            init_logging(common.verbose);
            let cfg = common.resolve()?;
            let rows = run_bench(&cfg)?;
            emit(out, &format_bench(&rows))
        }
        Command::Inspect { common, doc, model } => {
            init_logging(common.verbose);
            let cfg = common.resolve()?;
            emit(out, &run_inspect(&cfg, doc.as_deref(), model.as_deref())?)
        }
    }
}
