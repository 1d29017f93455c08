use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use radext::config::{load_config, FileConfig, TrainOverrides};
use radext::error::Error;
use radext::formats::{
    read_dictionary, read_emission_blocks, read_sentences, read_tagged_corpus, write_tagged_corpus,
};
use radext::jsonl::{write_jsonl, QuadrupleRecord, RelationRecord};
use radext::model_file::{load_model, save_model};
use radext::pipeline::{align_emissions, annotate, check_aligned, extract, tag_sentences};
use radext::report::{confusion_csv, ErrorReport, EvalReport};
use radext_core::eval::{agreement_f1, classify_errors, entity_prf, relation_prf};
use radext_core::trainer::{train_with_observer, EpochStats};
use radext_core::{SecondaryPartDictionary, Sentence, TagSequence};

const DICT_ENV: &str = "RADEXT_DICT";

/// Extract {primary part, secondary part, degree, sign} quadruples from
/// character-level report sentences.
#[derive(Parser)]
#[command(name = "radext", version)]
struct Cli {
    /// TOML file with defaults; command-line flags take precedence.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a tagger and select the epoch with the best dev entity F1.
    Train(TrainArgs),
    /// Tag raw sentences, writing a tagged corpus.
    Tag(TagArgs),
    /// Tag sentences and extract relations and quadruples.
    Extract(ExtractArgs),
    /// Score predicted tags against gold tags.
    Eval(EvalArgs),
    /// Classify entity errors; same as `eval --mode errors`.
    Errors(ErrorsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum EmissionSource {
    Features,
    External,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvalMode {
    Entity,
    Relation,
    Agreement,
    Errors,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_name = "FILE")]
    train: PathBuf,
    #[arg(long, value_name = "FILE")]
    dev: PathBuf,
    #[arg(long, value_name = "FILE")]
    model_out: PathBuf,
    /// Where to write the training report; defaults to `<model-out>.report.json`.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    epochs: Option<u64>,
    #[arg(long)]
    initial_rate: Option<f64>,
    #[arg(long)]
    decayed_rate: Option<f64>,
    /// 1-based epoch from which the decayed rate applies.
    #[arg(long)]
    decay_epoch: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    l2: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Args)]
struct DecodeArgs {
    #[arg(long, value_name = "FILE")]
    model: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "features")]
    emission_source: EmissionSource,
    /// Emission blocks keyed by sentence id, for `--emission-source external`.
    #[arg(long, value_name = "FILE")]
    emissions: Option<PathBuf>,
    /// Decode without forbidding ill-formed BIO transitions.
    #[arg(long)]
    no_constrain: bool,
    /// Worker threads; 0 uses all cores.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct TagArgs {
    /// Raw sentences, one per line, optionally `<id>\t<text>`.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_name = "FILE")]
    output: PathBuf,
    #[command(flatten)]
    decode: DecodeArgs,
}

#[derive(Args)]
struct ExtractArgs {
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Treat the input as an already tagged corpus; no model is needed.
    #[arg(long)]
    tagged: bool,
    #[arg(long, env = DICT_ENV, value_name = "FILE")]
    dict: Option<PathBuf>,
    /// Quadruples, one JSON object per line.
    #[arg(long, value_name = "FILE")]
    output: PathBuf,
    /// Relations, one JSON object per line.
    #[arg(long, value_name = "FILE")]
    relations: Option<PathBuf>,
    #[command(flatten)]
    decode: DecodeArgs,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long, value_name = "FILE")]
    pred: PathBuf,
    #[arg(long, value_name = "FILE")]
    gold: PathBuf,
    /// JSON report destination.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    format: OutputFormat,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    score: ScoreArgs,
    #[arg(long, value_enum, default_value = "entity")]
    mode: EvalMode,
    /// Needed to derive relations for `relation`, optional for `agreement`.
    #[arg(long, env = DICT_ENV, value_name = "FILE")]
    dict: Option<PathBuf>,
    /// Confusion matrix as CSV, for `--mode errors`.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ErrorsArgs {
    #[command(flatten)]
    score: ScoreArgs,
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let numerical = e.chain().any(|c| {
        c.downcast_ref::<Error>().is_some_and(Error::is_numerical)
            || matches!(
                c.downcast_ref::<radext_core::Error>(),
                Some(radext_core::Error::NonFiniteLoss(_))
            )
    });
    if numerical {
        3
    } else {
        2
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let file = match &cli.config {
        Some(p) => load_config(p)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Train(a) => cmd_train(a, &file),
        Command::Tag(a) => cmd_tag(a, &file),
        Command::Extract(a) => cmd_extract(a, &file),
        Command::Eval(a) => cmd_eval(a, &file),
        Command::Errors(a) => {
            let dict = None;
            cmd_eval(
                EvalArgs {
                    score: a.score,
                    mode: EvalMode::Errors,
                    dict,
                    csv: a.csv,
                },
                &file,
            )
        }
    }
}

fn require_file(path: &Path, what: &str) -> anyhow::Result<()> {
    if !path.is_file() {
        bail!("{what} file not found: {}", path.display());
    }
    Ok(())
}

fn cmd_train(a: TrainArgs, file: &FileConfig) -> anyhow::Result<()> {
    require_file(&a.train, "training")?;
    require_file(&a.dev, "dev")?;
    let flags = TrainOverrides {
        epochs: a.epochs.map(|e| e as usize),
        initial_rate: a.initial_rate,
        decayed_rate: a.decayed_rate,
        decay_epoch: a.decay_epoch,
        batch_size: a.batch_size,
        seed: a.seed,
        l2: a.l2,
    };
    let config = flags.over(file.train).resolve();
    config.validate().context("invalid training configuration")?;
    let train = read_tagged_corpus(&a.train)?;
    let dev = read_tagged_corpus(&a.dev)?;

    let format = a.format;
    let (model, report) = train_with_observer(&train, &dev, &config, |s: &EpochStats| match format {
        OutputFormat::Text => println!(
            "epoch {:>4}  train NLL {:>12.4}  dev F1 {:>6.2}{}",
            s.epoch,
            s.train_nll,
            s.dev_f1,
            if s.best_so_far { "  *" } else { "" }
        ),
        OutputFormat::Json => println!(
            "{}",
            serde_json::json!({"epoch": s.epoch, "train_nll": s.train_nll, "dev_f1": s.dev_f1, "best": s.best_so_far})
        ),
    })?;

    save_model(&model, &a.model_out)?;
    let report_path = a.report.unwrap_or_else(|| {
        let mut p = a.model_out.clone().into_os_string();
        p.push(".report.json");
        p.into()
    });
    fs::write(&report_path, serde_json::to_string_pretty(&report)?)
        .with_context(|| format!("writing {}", report_path.display()))?;
    if let OutputFormat::Text = format {
        println!(
            "selected epoch {} with dev F1 {:.2}",
            report.selected_epoch + 1,
            report.dev_f1[report.selected_epoch]
        );
    }
    Ok(())
}

/// Tags `sentences` according to the decode flags.
fn decode(
    d: &DecodeArgs,
    file: &FileConfig,
    sentences: Vec<Sentence>,
) -> anyhow::Result<Vec<(Sentence, TagSequence)>> {
    let Some(model_path) = &d.model else {
        bail!("--model is required");
    };
    require_file(model_path, "model")?;
    let model = load_model(model_path)?;
    let constrain = !d.no_constrain && file.constrain_bio.unwrap_or(true);
    let jobs = d.jobs.or(file.jobs).unwrap_or(1);
    let external = match (d.emission_source, &d.emissions) {
        (EmissionSource::External, Some(p)) => {
            require_file(p, "emission")?;
            Some(align_emissions(&sentences, read_emission_blocks(p)?, p)?)
        }
        (EmissionSource::External, None) => bail!("--emission-source external requires --emissions"),
        (EmissionSource::Features, Some(_)) => bail!("--emissions requires --emission-source external"),
        (EmissionSource::Features, None) => None,
    };
    let tags = tag_sentences(&model, &sentences, external.as_deref(), constrain, jobs)?;
    Ok(sentences.into_iter().zip(tags).collect())
}

fn cmd_tag(a: TagArgs, file: &FileConfig) -> anyhow::Result<()> {
    require_file(&a.input, "input")?;
    let sentences = read_sentences(&a.input)?;
    let corpus = decode(&a.decode, file, sentences)?;
    write_tagged_corpus(&corpus, &a.output)?;
    Ok(())
}

fn load_dict(flag: Option<&PathBuf>, file: &FileConfig) -> anyhow::Result<Option<SecondaryPartDictionary>> {
    match flag.or(file.dictionary.as_ref()) {
        Some(p) => {
            require_file(p, "dictionary")?;
            Ok(Some(read_dictionary(p)?))
        }
        None => Ok(None),
    }
}

fn cmd_extract(a: ExtractArgs, file: &FileConfig) -> anyhow::Result<()> {
    require_file(&a.input, "input")?;
    let Some(dict) = load_dict(a.dict.as_ref(), file)? else {
        bail!("a dictionary is required: pass --dict or set {DICT_ENV}");
    };
    let corpus = if a.tagged {
        match read_tagged_corpus(&a.input) {
            Ok(c) => c,
            Err(Error::EmptyFile { .. }) => Vec::new(),
            Err(e) => return Err(e.into()),
        }
    } else {
        decode(&a.decode, file, read_sentences(&a.input)?)?
    };
    let jobs = a.decode.jobs.or(file.jobs).unwrap_or(1);
    let outputs = extract(&corpus, &dict, jobs);

    let mut quads = Vec::new();
    let mut rels = Vec::new();
    for ((s, _), out) in corpus.iter().zip(&outputs) {
        quads.extend(out.quadruples.iter().map(|q| QuadrupleRecord::new(&s.id, q)));
        rels.extend(out.relations.iter().map(|r| RelationRecord::new(&s.id, r)));
    }
    write_jsonl(&quads, &a.output)?;
    if let Some(p) = &a.relations {
        write_jsonl(&rels, p)?;
    }
    Ok(())
}

fn cmd_eval(a: EvalArgs, file: &FileConfig) -> anyhow::Result<()> {
    let s = &a.score;
    require_file(&s.pred, "prediction")?;
    require_file(&s.gold, "gold")?;
    let pred_corpus = read_tagged_corpus(&s.pred)?;
    let gold_corpus = read_tagged_corpus(&s.gold)?;
    check_aligned(&pred_corpus, &gold_corpus, &s.pred, &s.gold)?;

    let dict = match a.mode {
        EvalMode::Relation | EvalMode::Agreement => load_dict(a.dict.as_ref(), file)?,
        _ => None,
    };
    if matches!(a.mode, EvalMode::Relation) && dict.is_none() {
        bail!("relation evaluation needs a dictionary: pass --dict or set {DICT_ENV}");
    }
    let pred = annotate(&pred_corpus, dict.as_ref());
    let gold = annotate(&gold_corpus, dict.as_ref());

    let report = match a.mode {
        EvalMode::Entity => EvalReport::Entity {
            scores: entity_prf(&pred, &gold),
        },
        EvalMode::Relation => EvalReport::Relation {
            entities: entity_prf(&pred, &gold),
            relations: relation_prf(&pred, &gold),
        },
        EvalMode::Agreement => EvalReport::Agreement {
            scores: agreement_f1(&pred, &gold),
        },
        EvalMode::Errors => EvalReport::Errors(Box::new(ErrorReport::from(classify_errors(&pred, &gold)))),
    };
    match s.format {
        OutputFormat::Text => print!("{}", report.to_text()),
        OutputFormat::Json => println!("{}", report.to_json()),
    }
    if let Some(p) = &s.report {
        fs::write(p, report.to_json()).with_context(|| format!("writing {}", p.display()))?;
    }
    if let (Some(p), EvalReport::Errors(r)) = (&a.csv, &report) {
        fs::write(p, confusion_csv(&r.confusion)).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}
