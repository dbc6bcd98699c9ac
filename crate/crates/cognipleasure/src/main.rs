//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for usage errors, 2 for data or parse errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cognipleasure::config::{BinningMode, OutputFormat, RunConfig};
use cognipleasure::fusion::{forward_pass, FusionDims, FusionParams, Modality, ModalitySequence};
use cognipleasure::pipeline::{
    appraisal_accuracy, evaluate_three_class, evaluate_two_class, fit_bins, load_appraisals_path,
    load_boundaries, load_gold_labels, load_predictions, render_evaluation_json, render_infer_csv,
    render_infer_json, round_json, Engine, PipelineError, VariableAccuracy,
};
use cognipleasure::rules::{parse_rules, validate, RuleSet};

const CONFIG_ENV: &str = "COGNIPLEASURE_CONFIG";

#[derive(Parser)]
#[command(
    name = "cognipleasure",
    version,
    about = "Appraisal-driven fuzzy inference of induced pleasure"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute pleasure scores and labels for a CSV of appraisal predictions.
    Infer(InferArgs),
    /// Evaluate a prediction report against gold labels.
    Evaluate(EvaluateArgs),
    /// Boundary fitting.
    Bins {
        #[command(subcommand)]
        command: BinsCommand,
    },
    /// Rule-file tooling.
    Rules {
        #[command(subcommand)]
        command: RulesCommand,
    },
    /// Cross-modal fusion toy.
    Fusion {
        #[command(subcommand)]
        command: FusionCommand,
    },
}

#[derive(Args)]
struct InferArgs {
    /// Input CSV of appraisal predictions.
    #[arg(long)]
    input: PathBuf,
    /// Configuration JSON (falls back to $COGNIPLEASURE_CONFIG, then defaults).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Rule file overriding the configured/embedded rules.
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Include fired-rule diagnostics per utterance.
    #[arg(long)]
    explain: bool,
    /// Output format, overriding the configured one.
    #[arg(long, value_parser = parse_format)]
    format: Option<OutputFormat>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Prediction report produced by `infer` (JSON).
    #[arg(long)]
    pred: PathBuf,
    /// Gold source: a CSV with gold_label columns (and optionally
    /// gold_<variable> values), or another inference JSON report.
    #[arg(long)]
    gold: PathBuf,
    /// Label scheme to evaluate.
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=3))]
    classes: u8,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output base path; writes <out>.metrics.json and <out>.confusion.csv.
    /// Both go to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum BinsCommand {
    /// Fit k-means cluster boundaries for CSV columns.
    Fit {
        #[arg(long)]
        input: PathBuf,
        /// Column to fit; repeatable.
        #[arg(long, required = true)]
        column: Vec<String>,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum RulesCommand {
    /// Parse a rule file and report coverage findings.
    Validate {
        /// Rule file (the embedded canonical rules when omitted).
        #[arg(long)]
        rules: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FusionCommand {
    /// Run the fusion forward pass on a seeded synthetic batch and print
    /// shapes, attention checksums, and the loss.
    Demo(DemoArgs),
}

#[derive(Args)]
struct DemoArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Audio sequence length.
    #[arg(long, default_value_t = 12)]
    t_a: usize,
    /// Visual sequence length.
    #[arg(long, default_value_t = 9)]
    t_v: usize,
    /// Text sequence length; text is absent when omitted.
    #[arg(long)]
    t_t: Option<usize>,
    /// Per-modality feature width (must be even).
    #[arg(long, default_value_t = 8)]
    d: usize,
}

fn parse_format(s: &str) -> Result<OutputFormat, String> {
    match s {
        "json" => Ok(OutputFormat::Json),
        "csv" => Ok(OutputFormat::Csv),
        other => Err(format!("unknown format '{other}', expected json or csv")),
    }
}

struct Failure {
    message: String,
    code: u8,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            message: message.into(),
            code: 1,
        }
    }

    fn data(message: impl Into<String>) -> Self {
        Failure {
            message: message.into(),
            code: 2,
        }
    }
}

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::data(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

fn load_config(flag: Option<&Path>) -> Result<RunConfig, Failure> {
    match flag {
        Some(path) => Ok(RunConfig::load(path)?),
        None => match std::env::var_os(CONFIG_ENV) {
            Some(path) => Ok(RunConfig::load(Path::new(&path))?),
            None => Ok(RunConfig::default()),
        },
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| {
            Failure::from(PipelineError::Write {
                path: path.to_path_buf(),
                source,
            })
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Infer(args) => cmd_infer(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Bins {
            command:
                BinsCommand::Fit {
                    input,
                    column,
                    k,
                    out,
                },
        } => cmd_bins_fit(&input, &column, k, out.as_deref()),
        Command::Rules {
            command: RulesCommand::Validate { rules, out },
        } => cmd_rules_validate(rules.as_deref(), out.as_deref()),
        Command::Fusion {
            command: FusionCommand::Demo(args),
        } => cmd_fusion_demo(args),
    }
}

fn cmd_infer(args: InferArgs) -> Result<(), Failure> {
    let config = load_config(args.config.as_deref())?;
    let engine = Engine::from_config(&config, args.rules.as_deref())?;
    let records = load_appraisals_path(&args.input)?;
    let reports = engine.infer_batch(&records, args.explain);
    let format = args.format.unwrap_or(config.output_format);
    let text = match format {
        OutputFormat::Json => render_infer_json(&reports),
        OutputFormat::Csv => render_infer_csv(&reports),
    };
    emit(args.out.as_deref(), &text)
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), Failure> {
    let config = load_config(args.config.as_deref())?;
    config.validate()?;
    let preds = load_predictions(&args.pred)?;
    let gold = load_gold_labels(&args.gold)?;
    let evaluation = match args.classes {
        2 => evaluate_two_class(&preds, &gold)?,
        _ => evaluate_three_class(&preds, &gold)?,
    };

    // Appraisal-level binned accuracies when the gold CSV carries
    // gold_<variable> columns.
    let mut variable_accuracy: Vec<VariableAccuracy> = Vec::new();
    if args.gold.extension().is_none_or(|e| e != "json") {
        let records = load_appraisals_path(&args.gold)?;
        let file_boundaries = match (config.binning_mode, &config.boundaries_path) {
            (BinningMode::File, Some(path)) => Some(load_boundaries_pairs(path)?),
            _ => None,
        };
        variable_accuracy =
            appraisal_accuracy(&records, config.binning_mode, file_boundaries.as_ref())?;
    }

    let metrics_json = render_evaluation_json(&evaluation, &variable_accuracy);
    let confusion_csv = evaluation.confusion.to_csv();
    match args.out {
        Some(base) => {
            let metrics_path = PathBuf::from(format!("{}.metrics.json", base.display()));
            let confusion_path = PathBuf::from(format!("{}.confusion.csv", base.display()));
            emit(Some(&metrics_path), &metrics_json)?;
            emit(Some(&confusion_path), &confusion_csv)
        }
        None => {
            print!("{metrics_json}");
            print!("{confusion_csv}");
            Ok(())
        }
    }
}

fn load_boundaries_pairs(path: &Path) -> Result<BTreeMap<String, [f64; 2]>, Failure> {
    Ok(load_boundaries(path)?)
}

fn cmd_bins_fit(
    input: &Path,
    columns: &[String],
    k: usize,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let records = load_appraisals_path(input)?;
    let bins = fit_bins(&records, columns, k)?;
    let mut value = serde_json::to_value(&bins).expect("boundary map serializes");
    round_json(&mut value, 6);
    let mut text = serde_json::to_string_pretty(&value).expect("values print");
    text.push('\n');
    emit(out, &text)
}

fn cmd_rules_validate(rules: Option<&Path>, out: Option<&Path>) -> Result<(), Failure> {
    let rule_set = match rules {
        None => RuleSet::canonical().clone(),
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|source| {
                Failure::from(PipelineError::Io {
                    path: path.to_path_buf(),
                    source,
                })
            })?;
            parse_rules(&text).map_err(|e| Failure::data(format!("{}: {e}", path.display())))?
        }
    };
    let report = validate(&rule_set);
    let mut value = serde_json::to_value(&report).expect("report serializes");
    value["source_hash"] = serde_json::Value::String(rule_set.source_hash().to_string());
    let mut text = serde_json::to_string_pretty(&value).expect("values print");
    text.push('\n');
    emit(out, &text)
}

fn cmd_fusion_demo(args: DemoArgs) -> Result<(), Failure> {
    if args.d == 0 || !args.d.is_multiple_of(2) {
        return Err(Failure::usage(format!(
            "--d must be a positive even width, got {}",
            args.d
        )));
    }
    for (name, t) in [
        ("--t-a", Some(args.t_a)),
        ("--t-v", Some(args.t_v)),
        ("--t-t", args.t_t),
    ] {
        if t == Some(0) {
            return Err(Failure::usage(format!("{name} must be at least 1")));
        }
    }
    let dims = FusionDims {
        d_in: args.d,
        d: args.d,
        heads: 4,
        ff_width: 4 * args.d,
        kernel_size: 3,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let params = FusionParams::random(&mut rng, dims)?;

    let mut sequences = Vec::new();
    let mut lengths = vec![(Modality::Audio, args.t_a), (Modality::Visual, args.t_v)];
    if let Some(t_t) = args.t_t {
        lengths.push((Modality::Text, t_t));
    }
    for (modality, t_len) in &lengths {
        let features = Array2::from_shape_fn((*t_len, dims.d_in), |_| rng.gen_range(-1.0..1.0));
        // The last position is padding whenever the sequence is long enough,
        // so the demo always exercises key masking.
        let mut mask = vec![true; *t_len];
        if *t_len > 1 {
            mask[*t_len - 1] = false;
        }
        sequences.push(ModalitySequence::new(*modality, features, mask)?);
    }
    let target = Array1::from_shape_fn(7, |_| rng.gen_range(0.0..5.0));

    let trace = forward_pass(&sequences, &params, &target)?;

    println!("seed {}", args.seed);
    for m in &trace.modalities {
        let name = match m.modality {
            Modality::Audio => "audio",
            Modality::Visual => "visual",
            Modality::Text => "text",
        };
        println!(
            "{name}: seq {t} x {d_in}, conv {t} x {d}, concat {t} x {wide}, \
             attention weight total {total:.6} (rows each sum to 1), cls norm {norm:.6}",
            t = m.seq_len,
            d_in = dims.d_in,
            d = m.conv_width,
            wide = m.concat_width,
            total = m.attention_weight_total,
            norm = m.cls_norm,
        );
    }
    println!("fused width {}", trace.fused_width);
    let pred: Vec<String> = trace.fused_pred.iter().map(|v| format!("{v:.6}")).collect();
    println!("fused prediction [{}]", pred.join(", "));
    println!("loss {:.6}", trace.loss);
    Ok(())
}
