//! One function per subcommand. All of them return `Result` so `main` can
//! map error kinds onto the stable exit codes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Args;
use log::info;

use stressdet::data::{
    load_corpus, split_interview, store_corpus, tokenize, CorpusFormat, Example, RawUtterance,
    SplitSpec, Vocabulary,
};
use stressdet::distant::{build_twitter_corpus, load_tweets, HashtagLexicon};
use stressdet::layers::{Arch, Net, NetConfig, SequenceBatch};
use stressdet::metrics::{confusion, metrics, Metrics};
use stressdet::serial::{net_from_model, net_to_model, ModelFile, ModelKind};
use stressdet::svm::{EmbeddingTable, SvmParams, TextSvm};
use stressdet::synth::{indicator_corpus, synthetic_tweets, IndicatorSpec};
use stressdet::train::{predict, two_phase_train};
use stressdet::{rng, Error, Result};

use crate::config::{self, parse_on_off, Overrides, Settings};
use crate::svg;

fn label_name(label: u8) -> &'static str {
    if label == 1 {
        "stressed"
    } else {
        "unstressed"
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64> {
    match flag {
        Some(s) => Ok(s),
        None => config::env_seed(),
    }
}

// ---------------------------------------------------------------- build-corpus

#[derive(Args, Debug)]
pub struct BuildCorpusArgs {
    /// Tweet stream: one JSON object per line with text and has_media fields.
    #[arg(long)]
    input: PathBuf,
    /// Hashtag lexicon file; the built-in lexicon when omitted.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Corpus file to write (.tsv for tab-separated, anything else JSONL).
    #[arg(long)]
    output: PathBuf,
    /// Emit the filter report as JSON instead of text.
    #[arg(long)]
    json: bool,
}

pub fn build_corpus(args: &BuildCorpusArgs) -> Result<()> {
    let tweets = load_tweets(&args.input)?;
    let lexicon = match &args.lexicon {
        Some(path) => HashtagLexicon::load(path)?,
        None => HashtagLexicon::default(),
    };
    let (corpus, report) = build_twitter_corpus(&tweets, &lexicon);
    store_corpus(&args.output, CorpusFormat::from_path(&args.output), &corpus)?;
    if args.json {
        let line = serde_json::to_string(&report)
            .map_err(|e| Error::Data(format!("serialize filter report: {e}")))?;
        eprintln!("{line}");
    } else {
        eprintln!("input tweets        {}", report.input);
        eprintln!("kept                {}", report.kept);
        eprintln!("empty text          {}", report.empty_text);
        eprintln!("url                 {}", report.url);
        eprintln!("media               {}", report.media);
        eprintln!("hashtag not last    {}", report.hashtag_not_terminal);
        eprintln!("too many hashtags   {}", report.too_many_hashtags);
        eprintln!("no label hashtag    {}", report.no_label_tag);
        eprintln!("conflicting labels  {}", report.conflicting_tags);
        eprintln!("duplicates          {}", report.duplicates);
    }
    Ok(())
}

// ------------------------------------------------------------------- train

#[derive(Args, Debug)]
pub struct TrainArgs {
    /// Labeled target corpus used for fine-tuning.
    #[arg(long)]
    corpus: PathBuf,
    /// Weakly labeled tweet corpus for pretraining; required when
    /// pretrain-iterations > 0.
    #[arg(long)]
    tweets: Option<PathBuf>,
    /// Model file to write.
    #[arg(long)]
    model_out: PathBuf,
    /// Write the per-epoch training log here instead of stdout.
    #[arg(long)]
    log_out: Option<PathBuf>,
    /// Flat key = value settings file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Recurrent architecture: lstm or blstm.
    #[arg(long, value_parser = Arch::parse)]
    arch: Option<Arch>,
    /// Attention pooling: on or off.
    #[arg(long, value_parser = parse_on_off)]
    attention: Option<bool>,
    /// Pretraining iterations over fresh tweet samples; 0 fine-tunes only.
    #[arg(long)]
    pretrain_iterations: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Fine-tuning epochs.
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    pretrain_epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    val_fraction: Option<f64>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    hidden: Option<usize>,
    #[arg(long)]
    embed_dim: Option<usize>,
    #[arg(long)]
    dropout: Option<f64>,
    #[arg(long)]
    patience: Option<usize>,
    /// Tweets drawn per class in each pretraining iteration.
    #[arg(long)]
    tweets_per_class: Option<usize>,
    /// Minimum token frequency for a vocabulary entry.
    #[arg(long)]
    min_count: Option<usize>,
    /// Sequences are padded or truncated to this many tokens.
    #[arg(long)]
    max_len: Option<usize>,
}

fn flag_overrides(args: &TrainArgs) -> Overrides {
    Overrides {
        arch: args.arch,
        attention: args.attention,
        hidden: args.hidden,
        embed_dim: args.embed_dim,
        dropout: args.dropout,
        max_len: args.max_len,
        min_count: args.min_count,
        batch_size: args.batch_size,
        lr: args.lr,
        pretrain_iterations: args.pretrain_iterations,
        tweets_per_class: args.tweets_per_class,
        pretrain_epochs: args.pretrain_epochs,
        epochs: args.epochs,
        patience: args.patience,
        val_fraction: args.val_fraction,
        seed: args.seed,
    }
}

fn encode_all(
    vocab: &Vocabulary,
    corpus: &[RawUtterance],
    max_len: usize,
) -> Result<Vec<Example>> {
    corpus
        .iter()
        .map(|u| Example::from_utterance(vocab, u, max_len))
        .collect()
}

pub fn train(args: &TrainArgs) -> Result<()> {
    let mut settings = Settings::default();
    settings.seed = config::env_seed()?;
    if let Some(path) = &args.config {
        settings.apply(&config::load_file(path)?);
    }
    settings.apply(&flag_overrides(args));

    let target = load_corpus(&args.corpus, CorpusFormat::from_path(&args.corpus))?;
    let tweets = match &args.tweets {
        Some(path) => load_corpus(path, CorpusFormat::from_path(path))?,
        None => Vec::new(),
    };
    if settings.pretrain_iterations > 0 && tweets.is_empty() {
        return Err(Error::Config(
            "pretraining requested but no tweet corpus given (use --tweets or --pretrain-iterations 0)"
                .into(),
        ));
    }

    let token_lists: Vec<Vec<String>> = target
        .iter()
        .chain(&tweets)
        .map(|u| tokenize(&u.text))
        .collect();
    let vocab = Vocabulary::build(token_lists.iter(), settings.min_count)?;
    let target_examples = encode_all(&vocab, &target, settings.max_len)?;
    let tweet_examples = encode_all(&vocab, &tweets, settings.max_len)?;

    let net_config = NetConfig {
        vocab_size: vocab.len(),
        embed_dim: settings.embed_dim,
        hidden: settings.hidden,
        arch: settings.arch,
        attention: settings.attention,
        dropout: settings.dropout,
    };
    let mut net = Net::init(net_config, &mut rng::stream(settings.seed, "net-init", 0))?;
    let log = two_phase_train(
        &mut net,
        &tweet_examples,
        &target_examples,
        &settings.train_config(),
    )?;

    net_to_model(&net, &vocab).save(&args.model_out)?;
    let tsv = log.to_tsv();
    match &args.log_out {
        Some(path) => {
            std::fs::write(path, &tsv).map_err(|e| Error::io(path, e))?;
        }
        None => print!("{tsv}"),
    }
    info!(
        "trained {}{} on {} target / {} tweet utterances, model written to {}",
        settings.arch.as_str(),
        if settings.attention { "+attention" } else { "" },
        target.len(),
        tweets.len(),
        args.model_out.display()
    );
    Ok(())
}

// ---------------------------------------------------------------- train-svm

#[derive(Args, Debug)]
pub struct TrainSvmArgs {
    /// Labeled corpus to train on.
    #[arg(long)]
    corpus: PathBuf,
    /// Word-vector table: one `token v1 v2 ...` line per entry.
    #[arg(long)]
    embeddings: PathBuf,
    /// Model file to write.
    #[arg(long)]
    model_out: PathBuf,
    /// Penalty parameter.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Kernel width; 1 / (dim * variance) when omitted.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, default_value_t = 1e-3)]
    tol: f64,
    #[arg(long, default_value_t = 10)]
    max_passes: usize,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn train_svm(args: &TrainSvmArgs) -> Result<()> {
    let corpus = load_corpus(&args.corpus, CorpusFormat::from_path(&args.corpus))?;
    let table = EmbeddingTable::load(&args.embeddings)?;
    let params = SvmParams {
        c: args.c,
        gamma: args.gamma,
        tol: args.tol,
        max_passes: args.max_passes,
        seed: resolve_seed(args.seed)?,
    };
    let (svm, skipped) = TextSvm::train(&corpus, table, &params)?;
    svm.to_model_file().save(&args.model_out)?;
    info!(
        "trained svm on {} utterances ({} skipped), {} support vectors, model written to {}",
        corpus.len() - skipped,
        skipped,
        svm.model.support_vectors.len(),
        args.model_out.display()
    );
    Ok(())
}

// ----------------------------------------------------------------- evaluate

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// Labeled test corpus.
    #[arg(long)]
    corpus: PathBuf,
    /// Vocabulary file the corpus was prepared against; evaluation refuses
    /// to run if its fingerprint differs from the model's.
    #[arg(long)]
    vocab: Option<PathBuf>,
    /// Also write the JSON report here.
    #[arg(long)]
    report_out: Option<PathBuf>,
    /// Print the JSON report on stdout instead of the text table.
    #[arg(long)]
    json: bool,
    #[arg(long, default_value_t = 128)]
    batch_size: usize,
}

fn method_name(file: &ModelFile) -> String {
    match file.kind {
        ModelKind::Svm => "svm".to_string(),
        ModelKind::Lstm | ModelKind::Blstm => {
            let base = if file.kind == ModelKind::Lstm { "lstm" } else { "blstm" };
            if file.attention {
                format!("{base}+attention")
            } else {
                base.to_string()
            }
        }
    }
}

fn check_vocab(expected: &Path, model_vocab: &Vocabulary) -> Result<()> {
    let given = Vocabulary::load(expected)?;
    if given.fingerprint() != model_vocab.fingerprint() {
        return Err(Error::Vocab(format!(
            "vocabulary fingerprint {:016x} from {} does not match the model's {:016x}",
            given.fingerprint(),
            expected.display(),
            model_vocab.fingerprint()
        )));
    }
    Ok(())
}

fn model_predictions(
    file: &ModelFile,
    corpus: &[RawUtterance],
    expected_vocab: Option<&Path>,
    batch_size: usize,
) -> Result<Vec<u8>> {
    match file.kind {
        ModelKind::Svm => {
            if expected_vocab.is_some() {
                return Err(Error::Config(
                    "--vocab applies to recurrent models; the svm file carries its own table"
                        .into(),
                ));
            }
            let svm = TextSvm::from_model_file(file)?;
            corpus.iter().map(|u| svm.predict_text(&u.text)).collect()
        }
        ModelKind::Lstm | ModelKind::Blstm => {
            let (net, vocab) = net_from_model(file)?;
            if let Some(path) = expected_vocab {
                check_vocab(path, &vocab)?;
            }
            let examples = encode_all(&vocab, corpus, stressdet::data::MAX_LEN)?;
            Ok(predict(&net, &examples, batch_size)?
                .into_iter()
                .map(|p| p as u8)
                .collect())
        }
    }
}

fn report_metrics(m: &Metrics, method: &str, json: bool, report_out: Option<&Path>) -> Result<()> {
    if json {
        println!("{}", m.json_object(method));
    } else {
        let [a, p, r, f] = m.rounded();
        println!("method     {method}");
        println!("accuracy   {a:.1}");
        println!("precision  {p:.1}");
        println!("recall     {r:.1}");
        println!("f-score    {f:.1}");
    }
    if m.degenerate_precision || m.degenerate_recall || m.degenerate_f {
        eprintln!("warning: at least one metric had a zero denominator and was reported as 0.0");
    }
    if let Some(path) = report_out {
        let mut out = m.json_object(method);
        out.push('\n');
        std::fs::write(path, out).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

pub fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let file = ModelFile::load(&args.model)?;
    let corpus = load_corpus(&args.corpus, CorpusFormat::from_path(&args.corpus))?;
    if corpus.is_empty() {
        return Err(Error::Data(format!(
            "test corpus {} is empty",
            args.corpus.display()
        )));
    }
    let predictions =
        model_predictions(&file, &corpus, args.vocab.as_deref(), args.batch_size)?;
    let labels: Vec<u8> = corpus.iter().map(|u| u.label).collect();
    let cm = confusion(&predictions, &labels)?;
    let m = metrics(&cm)?;
    report_metrics(&m, &method_name(&file), args.json, args.report_out.as_deref())
}

// ------------------------------------------------------------------ predict

#[derive(Args, Debug)]
pub struct PredictArgs {
    /// Trained model file.
    #[arg(long)]
    model: PathBuf,
    /// One or more utterances to classify.
    #[arg(required = true)]
    text: Vec<String>,
    /// One JSON object per utterance instead of text lines.
    #[arg(long)]
    json: bool,
}

fn no_tokens(text: &str) -> Error {
    Error::Data(format!("input has no tokens: {text:?}"))
}

pub fn predict_cmd(args: &PredictArgs) -> Result<()> {
    let file = ModelFile::load(&args.model)?;
    match file.kind {
        ModelKind::Svm => {
            let svm = TextSvm::from_model_file(&file)?;
            for text in &args.text {
                let tokens = tokenize(text);
                if tokens.is_empty() {
                    return Err(no_tokens(text));
                }
                let v = stressdet::svm::sentence_vector(&tokens, &svm.table)?;
                let decision = svm.model.decision(&v)?;
                let label = u8::from(decision > 0.0);
                if args.json {
                    println!(
                        "{}",
                        serde_json::json!({
                            "text": text,
                            "label": label_name(label),
                            "decision": decision,
                        })
                    );
                } else {
                    println!("{}\t{decision:+.6}\t{text}", label_name(label));
                }
            }
        }
        ModelKind::Lstm | ModelKind::Blstm => {
            let (net, vocab) = net_from_model(&file)?;
            for text in &args.text {
                let (probs, _) = forward_text(&net, &vocab, text)?;
                let label = u8::from(probs[1] > probs[0]);
                if args.json {
                    println!(
                        "{}",
                        serde_json::json!({
                            "text": text,
                            "label": label_name(label),
                            "p_stressed": probs[1],
                        })
                    );
                } else {
                    println!("{}\t{:.6}\t{text}", label_name(label), probs[1]);
                }
            }
        }
    }
    Ok(())
}

/// Run one utterance through a recurrent model without padding, returning
/// class probabilities and attention weights (when the model has them).
fn forward_text(net: &Net, vocab: &Vocabulary, text: &str) -> Result<([f64; 2], Option<Vec<f64>>)> {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Err(no_tokens(text));
    }
    let (ids, mask) = stressdet::data::encode(vocab, &tokens, tokens.len())?;
    let batch = SequenceBatch {
        ids: vec![ids],
        mask: vec![mask],
        labels: vec![0],
    };
    let fwd = net.forward_eval(&batch)?;
    let alphas = fwd.alphas(0).map(|a| a.to_vec());
    Ok((fwd.probs[0], alphas))
}

// ------------------------------------------------------------------ explain

#[derive(Args, Debug)]
pub struct ExplainArgs {
    /// Trained model file; must have attention enabled.
    #[arg(long)]
    model: PathBuf,
    /// One or more utterances to explain.
    #[arg(required = true)]
    text: Vec<String>,
    /// Write an SVG heatmap per utterance. With several utterances the file
    /// name gains a -0, -1, ... suffix before the extension.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// One JSON object per utterance instead of text lines.
    #[arg(long)]
    json: bool,
}

/// Per-token attention weights for one classified utterance.
pub struct AttentionTrace {
    pub tokens: Vec<String>,
    pub alphas: Vec<f64>,
    pub predicted: u8,
    pub true_label: Option<u8>,
}

fn svg_path(base: &Path, index: usize, total: usize) -> PathBuf {
    if total == 1 {
        return base.to_path_buf();
    }
    let stem = base.file_stem().and_then(|s| s.to_str()).unwrap_or("heatmap");
    let ext = base.extension().and_then(|s| s.to_str()).unwrap_or("svg");
    base.with_file_name(format!("{stem}-{index}.{ext}"))
}

pub fn explain(args: &ExplainArgs) -> Result<()> {
    let file = ModelFile::load(&args.model)?;
    if file.kind == ModelKind::Svm {
        return Err(Error::Config(
            "the svm baseline has no attention weights to explain".into(),
        ));
    }
    if !file.attention {
        return Err(Error::Config(
            "this model was trained with attention off; nothing to explain".into(),
        ));
    }
    let (net, vocab) = net_from_model(&file)?;
    for (i, text) in args.text.iter().enumerate() {
        let tokens = tokenize(text);
        let (probs, alphas) = forward_text(&net, &vocab, text)?;
        let alphas = alphas.expect("attention model yields weights");
        debug_assert!((alphas.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let trace = AttentionTrace {
            tokens,
            alphas,
            predicted: u8::from(probs[1] > probs[0]),
            true_label: None,
        };
        if args.json {
            println!(
                "{}",
                serde_json::json!({
                    "text": text,
                    "tokens": trace.tokens,
                    "alphas": trace.alphas,
                    "predicted": label_name(trace.predicted),
                    "true_label": trace.true_label,
                    "p_stressed": probs[1],
                })
            );
        } else {
            println!(
                "{} (p_stressed={:.3}): {text}",
                label_name(trace.predicted),
                probs[1]
            );
            for (token, alpha) in trace.tokens.iter().zip(&trace.alphas) {
                println!("  {token}\t{alpha:.3}");
            }
        }
        if let Some(base) = &args.svg {
            let path = svg_path(base, i, args.text.len());
            let rendered = svg::heatmap(&trace.tokens, &trace.alphas);
            std::fs::write(&path, rendered).map_err(|e| Error::io(&path, e))?;
            eprintln!("wrote {}", path.display());
        }
    }
    Ok(())
}

// -------------------------------------------------------------- synth-corpus

#[derive(Args, Debug)]
pub struct SynthCorpusArgs {
    /// Directory for tweets.jsonl, target-train.jsonl and target-test.jsonl.
    #[arg(long)]
    out_dir: PathBuf,
    /// Raw tweets to generate.
    #[arg(long, default_value_t = 600)]
    tweets: usize,
    /// Target utterances per class before the train/test split.
    #[arg(long, default_value_t = 200)]
    per_class: usize,
    /// Held-out utterances per class.
    #[arg(long, default_value_t = 80)]
    test_per_class: usize,
    #[arg(long)]
    seed: Option<u64>,
}

pub fn synth_corpus(args: &SynthCorpusArgs) -> Result<()> {
    let seed = resolve_seed(args.seed)?;
    std::fs::create_dir_all(&args.out_dir).map_err(|e| Error::io(&args.out_dir, e))?;

    let tweets_path = args.out_dir.join("tweets.jsonl");
    let file = File::create(&tweets_path).map_err(|e| Error::io(&tweets_path, e))?;
    let mut w = BufWriter::new(file);
    for tweet in synthetic_tweets(args.tweets, seed) {
        let line = serde_json::to_string(&tweet)
            .map_err(|e| Error::Data(format!("serialize tweet: {e}")))?;
        writeln!(w, "{line}").map_err(|e| Error::io(&tweets_path, e))?;
    }
    w.flush().map_err(|e| Error::io(&tweets_path, e))?;

    let spec = IndicatorSpec {
        per_class: args.per_class,
        indicators_per_class: 6,
        filler_vocab: 40,
        tokens_per_utterance: 9,
        seed,
        ..IndicatorSpec::default()
    };
    let corpus = indicator_corpus(&spec, stressdet::data::Source::Interview)?;
    let split = SplitSpec {
        test_per_class: args.test_per_class,
        seed,
    };
    let (train, test) = split_interview(&corpus, &split)?;
    let train_path = args.out_dir.join("target-train.jsonl");
    let test_path = args.out_dir.join("target-test.jsonl");
    store_corpus(&train_path, CorpusFormat::Jsonl, &train)?;
    store_corpus(&test_path, CorpusFormat::Jsonl, &test)?;
    eprintln!(
        "wrote {} ({} tweets), {} ({} utterances), {} ({} utterances)",
        tweets_path.display(),
        args.tweets,
        train_path.display(),
        train.len(),
        test_path.display(),
        test.len()
    );
    Ok(())
}
