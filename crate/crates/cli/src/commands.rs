use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use log::{info, warn};

use driftlab::corpus::{
    build_vocabulary, default_stoplist, ingest, read_cache, read_stoplist, slice, write_cache, Granularity,
    SliceConfig, Split, Stoplist, Vocabulary,
};
use driftlab::crosslingual::{
    apply_alignment, classify, cross_drift, fit_alignment, project_2d, projection_points, read_records,
    records_tsv, BilingualLexicon, CutRule, ProjectionSource, Thresholds,
};
use driftlab::drift::{
    drift_histogram, drift_report_with, histogram_edges, histograms_tsv, nearest_neighbors,
    normalized_drift_summary, top_drifting, BinScale, DriftMetric,
};
use driftlab::evaluation::{compare, evaluate, EvalCurve};
use driftlab::model::{read_embeddings, write_embeddings, EmbeddingState, ALPHA_FILE, RHO_FILE};
use driftlab::synth::{generate, parse_spec};
use driftlab::trainer::{
    init_dynamic, random_init, train_dynamic, train_static, Checkpoint, Init, Outcome, TrainingConfig,
};

use crate::manifest::{beside, Manifest, MANIFEST_FILE};
use crate::{
    AlignArgs, ClassifyArgs, CliError, Command, CompareArgs, DriftArgs, EvalArgs, NeighborsArgs, ProjectArgs,
    SliceArgs, SynthArgs, TrainArgs, XdriftArgs,
};

pub const CORPUS_FILE: &str = "corpus.dlc";
pub const VOCAB_FILE: &str = "vocab.tsv";
pub const CONFIG_FILE: &str = "config.txt";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const METRICS_FILE: &str = "metrics.tsv";
pub const VALID_FILE: &str = "valid.tsv";
pub const STATIC_DIR: &str = "static";

type CliResult<T> = Result<T, CliError>;

pub fn dispatch(command: Command, argv: &[String]) -> CliResult<()> {
    match command {
        Command::Synth(a) => synth(a, argv),
        Command::Slice(a) => slice_cmd(a, argv),
        Command::Train(a) => train(a, argv),
        Command::Eval(a) => eval(a, argv),
        Command::Compare(a) => compare_cmd(a, argv),
        Command::Drift(a) => drift(a, argv),
        Command::Neighbors(a) => neighbors(a, argv),
        Command::Align(a) => align(a, argv),
        Command::Xdrift(a) => xdrift(a, argv),
        Command::Classify(a) => classify_cmd(a, argv),
        Command::Project(a) => project(a, argv),
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into().trim_end().to_string() + "\n")
}

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

fn write_text(path: &Path, text: &str) -> CliResult<PathBuf> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        create_dir(parent)?;
    }
    fs::write(path, text).map_err(|e| CliError::io(path, e))?;
    Ok(path.to_path_buf())
}

fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// `dir/report.tsv` with tag `top` becomes `dir/report.top.tsv`.
fn tagged(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().unwrap_or_default().to_string_lossy();
    let name = match path.extension() {
        Some(ext) => format!("{stem}.{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}.{tag}"),
    };
    path.with_file_name(name)
}

fn parse_granularity(s: &str) -> CliResult<Granularity> {
    s.parse().map_err(|e: driftlab::Error| usage(e.to_string()))
}

fn synth(a: SynthArgs, argv: &[String]) -> CliResult<()> {
    let mut m = Manifest::new("synth", argv);
    let spec = parse_spec(&read_text(&a.spec)?)?;
    m.input(&a.spec);
    m.seed("seed", spec.seed);
    m.config("vocab_size", spec.vocab_size);
    m.config("num_slices", spec.num_slices);
    m.config("tokens_per_slice", spec.tokens_per_slice);
    let out = generate(&spec)?;
    create_dir(&a.out)?;
    m.output(write_text(&a.out.join("corpus.txt"), &out.source.corpus_text())?);
    m.output(write_text(&a.out.join("truth.tsv"), &out.source.truth_tsv())?);
    if let Some(mirror) = &out.mirror {
        let dir = a.out.join("mirror");
        m.output(write_text(&dir.join("corpus.txt"), &mirror.corpus_text())?);
        m.output(write_text(&dir.join("truth.tsv"), &mirror.truth_tsv())?);
        let mut lex = String::new();
        for (s, t) in &out.lexicon {
            writeln!(lex, "{s}\t{t}").unwrap();
        }
        m.output(write_text(&a.out.join("lexicon.tsv"), &lex)?);
    }
    info!("wrote {} documents to {}", out.source.documents.len(), a.out.display());
    m.write(&a.out.join(MANIFEST_FILE))
}

fn slice_cmd(a: SliceArgs, argv: &[String]) -> CliResult<()> {
    let mut m = Manifest::new("slice", argv);
    let granularity = parse_granularity(&a.granularity)?;
    let subsample_threshold = match a.subsample.as_str() {
        "none" => None,
        s => Some(
            s.parse::<f64>()
                .map_err(|_| usage(format!("bad --subsample value {s:?}")))?,
        ),
    };
    let stoplist: Stoplist = match a.stoplist.as_str() {
        "none" => Stoplist::new(),
        lang @ ("en" | "fr") => default_stoplist(lang).expect("shipped stoplist"),
        path => {
            m.input(path);
            read_stoplist(path)?
        }
    };
    let report = ingest(&a.input, &a.date_format)?;
    m.input(&a.input);
    let vocab = build_vocabulary(report.documents.iter().map(|d| &d.tokens), a.vocab_size, &stoplist)?;
    let config = SliceConfig {
        granularity,
        subsample_threshold,
        valid_fraction: a.valid,
        test_fraction: a.test,
        seed: a.seed,
    };
    let corpus = slice(&report.documents, &vocab, &config)?;
    m.seed("seed", a.seed);
    m.config("vocab_size", vocab.len());
    m.config("granularity", granularity.to_string());
    m.config("subsample", a.subsample.clone());
    m.config("stoplist", a.stoplist.clone());
    m.config("valid", a.valid);
    m.config("test", a.test);
    m.config("num_slices", corpus.num_slices());
    m.config("documents", report.documents.len());
    m.config("malformed_lines", report.malformed);

    create_dir(&a.out)?;
    let cache = a.out.join(CORPUS_FILE);
    write_cache(&corpus, &cache)?;
    m.output(cache);
    let vocab_path = a.out.join(VOCAB_FILE);
    vocab.write(&vocab_path)?;
    m.output(vocab_path);
    info!(
        "{} slices, {} words, {} tokens kept",
        corpus.num_slices(),
        vocab.len(),
        corpus.total_tokens()
    );
    m.write(&a.out.join(MANIFEST_FILE))
}

fn training_config(a: &TrainArgs, granularity: Granularity) -> CliResult<TrainingConfig> {
    let mut c = TrainingConfig::for_granularity(granularity);
    if let Some(p) = &a.config {
        c.apply_text(&read_text(p)?)
            .map_err(|e| CliError::Data(format!("{}: {e}", p.display())))?;
    }
    if let Some(v) = &a.variant {
        c.prior.variant = v.parse().map_err(|e: driftlab::Error| usage(e.to_string()))?;
    }
    if let Some(l) = a.lambda {
        c.prior.lambda = l;
        if a.lambda0.is_none() {
            c.prior.lambda0 = l / 1000.0;
        }
    }
    if let Some(l0) = a.lambda0 {
        c.prior.lambda0 = l0;
    }
    if let Some(i) = &a.init {
        c.init = i.parse().map_err(|e: driftlab::Error| usage(e.to_string()))?;
    }
    let fields: [(&str, Option<String>); 10] = [
        ("seed", a.seed.map(|x| x.to_string())),
        ("dim", a.dim.map(|x| x.to_string())),
        ("window", a.window.map(|x| x.to_string())),
        ("negatives", a.negatives.map(|x| x.to_string())),
        ("epochs", a.epochs.map(|x| x.to_string())),
        ("static_epochs", a.static_epochs.map(|x| x.to_string())),
        ("minibatches_per_slice", a.minibatches.map(|x| x.to_string())),
        ("batch_size", a.batch_size.map(|x| x.to_string())),
        ("learning_rate", a.learning_rate.map(|x| x.to_string())),
        ("validate", None),
    ];
    for (key, value) in fields {
        if let Some(v) = value {
            c.set(key, &v)?;
        }
    }
    for kv in &a.sets {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        c.set(k.trim(), v.trim()).map_err(|e| usage(e.to_string()))?;
    }
    c.validate()?;
    Ok(c)
}

/// Write every artifact of a model directory and return the written paths.
fn write_model(dir: &Path, ckpt: &Checkpoint, vocab: &Vocabulary) -> CliResult<Vec<PathBuf>> {
    create_dir(dir)?;
    let mut out = Vec::new();
    let vocab_path = dir.join(VOCAB_FILE);
    vocab.write(&vocab_path)?;
    out.push(vocab_path);
    out.push(write_text(&dir.join(CONFIG_FILE), &ckpt.config.to_text())?);
    write_embeddings(dir, &ckpt.state, vocab)?;
    out.push(dir.join(RHO_FILE));
    out.push(dir.join(ALPHA_FILE));
    let ckpt_path = dir.join(CHECKPOINT_FILE);
    ckpt.save(&ckpt_path)?;
    out.push(ckpt_path);
    out.push(write_text(&dir.join(METRICS_FILE), &ckpt.metrics_tsv())?);
    if ckpt.config.validate {
        out.push(write_text(&dir.join(VALID_FILE), &ckpt.validation_tsv())?);
    }
    Ok(out)
}

/// Save the outcome, then turn a divergence into a numerical error.
fn finish(outcome: Outcome, dir: &Path, vocab: &Vocabulary, m: &mut Manifest) -> CliResult<Checkpoint> {
    for p in write_model(dir, &outcome.checkpoint, vocab)? {
        m.output(p);
    }
    match outcome.diverged {
        None => Ok(outcome.checkpoint),
        Some((epoch, slice)) => Err(CliError::Numerical(format!(
            "non-finite loss at epoch {epoch}, slice {slice}; last finite state saved in {}",
            dir.display()
        ))),
    }
}

fn train(a: TrainArgs, argv: &[String]) -> CliResult<()> {
    let mut m = Manifest::new("train", argv);
    let corpus = read_cache(&a.corpus)?;
    m.input(&a.corpus);
    let vocab_path = a
        .vocab
        .clone()
        .unwrap_or_else(|| a.corpus.with_file_name(VOCAB_FILE));
    let vocab = Vocabulary::read(&vocab_path)?;
    m.input(&vocab_path);
    if vocab.len() != corpus.vocab_size {
        return Err(CliError::Data(format!(
            "{} has {} words but the corpus cache expects {}",
            vocab_path.display(),
            vocab.len(),
            corpus.vocab_size
        )));
    }
    let granularity = match &a.granularity {
        Some(g) => parse_granularity(g)?,
        None => corpus.granularity,
    };
    let config = training_config(&a, granularity)?;
    if let Some(p) = &a.config {
        m.input(p);
    }
    for line in config.to_text().lines() {
        if let Some((k, v)) = line.split_once(" = ") {
            m.config(k, v);
        }
    }
    m.seed("seed", config.seed);
    create_dir(&a.out)?;

    let result = train_model(&a, &corpus, &vocab, &config, &mut m);
    m.write(&a.out.join(MANIFEST_FILE))?;
    result
}

fn train_model(
    a: &TrainArgs,
    corpus: &driftlab::corpus::TimeSlicedCorpus,
    vocab: &Vocabulary,
    config: &TrainingConfig,
    m: &mut Manifest,
) -> CliResult<()> {
    let static_dir = if a.static_only { a.out.clone() } else { a.out.join(STATIC_DIR) };
    let init = match &config.init {
        Init::Static => {
            let ckpt = finish(train_static(corpus, config)?, &static_dir, vocab, m)?;
            if a.static_only {
                return Ok(());
            }
            init_dynamic(&ckpt.state, corpus.num_slices())?
        }
        _ if a.static_only => {
            return Err(usage("--static-only needs --init static"));
        }
        Init::Random => random_init(corpus, config),
        Init::File(dir) => {
            let state = read_embeddings(dir, vocab)?;
            m.input(dir.join(RHO_FILE));
            m.input(dir.join(ALPHA_FILE));
            if state.num_slices() == 1 {
                init_dynamic(&state, corpus.num_slices())?
            } else {
                state
            }
        }
    };
    finish(train_dynamic(corpus, config, init)?, &a.out, vocab, m)?;
    Ok(())
}

/// State, vocabulary and training configuration of a model directory.
struct Model {
    state: EmbeddingState,
    vocab: Vocabulary,
    config: TrainingConfig,
    files: Vec<PathBuf>,
}

fn load_model(dir: &Path) -> CliResult<Model> {
    let vocab_path = dir.join(VOCAB_FILE);
    let vocab = Vocabulary::read(&vocab_path)?;
    let config_path = dir.join(CONFIG_FILE);
    let config = if config_path.exists() {
        TrainingConfig::from_text(&read_text(&config_path)?)
            .map_err(|e| CliError::Data(format!("{}: {e}", config_path.display())))?
    } else {
        TrainingConfig::default()
    };
    let state = read_embeddings(dir, &vocab)?;
    let mut files = vec![vocab_path, dir.join(RHO_FILE), dir.join(ALPHA_FILE)];
    if config_path.exists() {
        files.push(config_path);
    }
    Ok(Model {
        state,
        vocab,
        config,
        files,
    })
}

/// The static model of a training run, or the model itself when it has no
/// static pretraining directory.
fn load_static(dir: &Path) -> CliResult<Model> {
    let sub = dir.join(STATIC_DIR);
    let model = if sub.join(RHO_FILE).exists() { load_model(&sub)? } else { load_model(dir)? };
    if model.state.num_slices() != 1 {
        warn!("{} has no static model; aligning on slice 0", dir.display());
    }
    Ok(model)
}

fn eval(a: EvalArgs, argv: &[String]) -> CliResult<()> {
    let mut m = Manifest::new("eval", argv);
    let model = load_model(&a.model)?;
    let corpus = read_cache(&a.corpus)?;
    if model.state.vocab_size() != corpus.vocab_size {
        return Err(CliError::Data(format!(
            "model has {} words, corpus {}",
            model.state.vocab_size(),
            corpus.vocab_size
        )));
    }
    let split: Split = a.split.parse().map_err(|e: driftlab::Error| usage(e.to_string()))?;
    let batch_size = a.batch_size.unwrap_or(model.config.batch_size);
    let curve = evaluate(&model.state, &corpus, split, model.config.window, batch_size)?;
    model.files.iter().for_each(|f| m.input(f));
    m.input(&a.corpus);
    m.config("split", a.split.clone());
    m.config("batch_size", batch_size);
    m.config("window", model.config.window);
    curve.write(&a.out)?;
    m.output(&a.out);
    println!("mean\t{}", curve.mean);
    m.write(&beside(&a.out))
}

fn compare_cmd(a: CompareArgs, argv: &[String]) -> CliResult<()> {
    let mut m = Manifest::new("compare", argv);
    let mut curves = Vec::new();
    for spec in &a.curves {
        let (name, path) = spec
            .split_once('=')
            .ok_or_else(|| usage(format!("--curve expects NAME=PATH, got {spec:?}")))?;
        curves.push((name.to_string(), EvalCurve::read(path)?));
        m.input(path);
    }
    let ranking = compare(&curves)?;
    write_text(&a.out, &ranking.to_tsv())?;
    m.output(&a.out);
    print!("{}", ranking.to_text());
    m.write(&beside(&a.out))
}

fn drift(a: DriftArgs, argv: &[String]) -> CliResult<()> {
    let mut m = Manifest::new("drift", argv);
    let metric = match a.metric.as_str() {
        "euclidean" => DriftMetric::Euclidean,
        "cosine" => DriftMetric::Cosine,
        other => return Err(usage(format!("unknown metric {other:?}"))),
    };
    let scale = match a.bin_scale.as_str() {
        "linear" => BinScale::Linear,
        "log" => BinScale::Log,
        other => return Err(usage(format!("unknown bin scale {other:?}"))),
    };
    let model = load_model(&a.model)?;
    model.files.iter().for_each(|f| m.input(f));
    m.config("t0", a.t0);
    m.config("top", a.top);
    m.config("metric", a.metric.clone());
    m.config("bins", a.bins);
    m.config("bin_scale", a.bin_scale.clone());
    let report = drift_report_with(&model.state, a.t0, metric)?;
    m.output(write_text(&a.out, &report.to_tsv(&model.vocab))?);

    let mut top = String::from("rank\tword\ttotal_drift\n");
    for (rank, (v, d)) in top_drifting(&report, a.top)?.into_iter().enumerate() {
        writeln!(top, "{}\t{}\t{d}", rank + 1, model.vocab.word(v)).unwrap();
    }
    m.output(write_text(&tagged(&a.out, "top"), &top)?);

    match normalized_drift_summary(&report, &[a.top, model.vocab.len()]) {
        Ok(summary) => {
            let mut text = String::from("k\tmean_normalized_drift\twords\n");
            for (k, mean, n) in &summary.rows {
                writeln!(text, "{k}\t{mean}\t{n}").unwrap();
            }
            m.output(write_text(&tagged(&a.out, "summary"), &text)?);
        }
        Err(driftlab::Error::DegenerateReport) => warn!("every word has zero total drift; no summary written"),
        Err(e) => return Err(e.into()),
    }

    let edges = histogram_edges(&report, a.bins, scale)?;
    let hists = (0..report.num_slices())
        .filter(|&t| t != a.t0)
        .map(|t| drift_histogram(&report, t, &edges))
        .collect::<driftlab::Result<Vec<_>>>()?;
    m.output(write_text(&tagged(&a.out, "hist"), &histograms_tsv(&hists))?);
    print!("{top}");
    m.write(&beside(&a.out))
}

fn neighbors(a: NeighborsArgs, argv: &[String]) -> CliResult<()> {
    let mut m = Manifest::new("neighbors", argv);
    let model = load_model(&a.model)?;
    model.files.iter().for_each(|f| m.input(f));
    let id = model
        .vocab
        .id(&a.word)
        .ok_or_else(|| CliError::Data(format!("word not in vocabulary: {}", a.word)))? as usize;
    let slices: Vec<usize> = match a.t {
        Some(t) => vec![t],
        None => (0..model.state.num_slices()).collect(),
    };
    let mut out = String::from("t\trank\tword\tcosine\n");
    for t in slices {
        if t >= model.state.num_slices() {
            return Err(usage(format!("slice {t} out of range")));
        }
        for (rank, (v, c)) in nearest_neighbors(&model.state, id, t, a.m)?.into_iter().enumerate() {
            writeln!(out, "{t}\t{}\t{}\t{c}", rank + 1, model.vocab.word(v)).unwrap();
        }
    }
    m.output(write_text(&a.out, &out)?);
    m.write(&beside(&a.out))
}

fn align(a: AlignArgs, argv: &[String]) -> CliResult<()> {
    let mut m = Manifest::new("align", argv);
    let src = load_static(&a.src)?;
    let tgt = load_static(&a.tgt)?;
    src.files.iter().chain(&tgt.files).for_each(|f| m.input(f));
    let lexicon = BilingualLexicon::read(&a.lexicon, &src.vocab, &tgt.vocab)?;
    m.input(&a.lexicon);
    m.config("pairs", lexicon.len());
    m.config("coverage_src", lexicon.coverage_src);
    m.config("coverage_tgt", lexicon.coverage_tgt);
    let map = fit_alignment(&src.state, &tgt.state, &lexicon)?;
    map.save(&a.out)?;
    m.output(&a.out);
    m.config("residual", map.residual);
    m.config("orthogonality_defect", map.orthogonality_defect());
    println!("residual\t{}\northogonality_defect\t{}", map.residual, map.orthogonality_defect());
    if let Some(dir) = &a.aligned {
        let aligned = apply_alignment(&map, &src.state)?;
        create_dir(dir)?;
        let vocab_path = dir.join(VOCAB_FILE);
        src.vocab.write(&vocab_path)?;
        write_embeddings(dir, &aligned, &src.vocab)?;
        m.output(vocab_path);
        m.output(dir.join(RHO_FILE));
        m.output(dir.join(ALPHA_FILE));
    }
    m.write(&beside(&a.out))
}

fn xdrift(a: XdriftArgs, argv: &[String]) -> CliResult<()> {
    let mut m = Manifest::new("xdrift", argv);
    let src = load_model(&a.src)?;
    let tgt = load_model(&a.tgt)?;
    src.files.iter().chain(&tgt.files).for_each(|f| m.input(f));
    let lexicon = BilingualLexicon::read(&a.lexicon, &src.vocab, &tgt.vocab)?;
    m.input(&a.lexicon);
    let t_last = a
        .t_last
        .unwrap_or(src.state.num_slices().min(tgt.state.num_slices()) - 1);
    m.config("t0", a.t0);
    m.config("t_last", t_last);
    let (records, skipped) = cross_drift(
        (&src.state, &src.vocab),
        (&tgt.state, &tgt.vocab),
        &lexicon.words,
        a.t0,
        t_last,
    )?;
    if skipped > 0 {
        warn!("skipped {skipped} pairs with words outside the models");
    }
    m.config("records", records.len());
    m.output(write_text(&a.out, &records_tsv(&records))?);
    m.write(&beside(&a.out))
}

fn parse_cuts(s: &str) -> CliResult<CutRule> {
    let bad = || usage(format!("bad --cuts value {s:?}; expected mean, percentile:P or fixed:SRC,TGT,SIM"));
    if s == "mean" {
        return Ok(CutRule::Mean);
    }
    if let Some(p) = s.strip_prefix("percentile:") {
        let p: f64 = p.parse().map_err(|_| bad())?;
        if !(0.0..=100.0).contains(&p) {
            return Err(bad());
        }
        return Ok(CutRule::Percentile(p));
    }
    if let Some(v) = s.strip_prefix("fixed:") {
        let xs: Vec<f64> = v.split(',').map(|x| x.trim().parse()).collect::<Result<_, _>>().map_err(|_| bad())?;
        if let [drift_src, drift_tgt, sim_drift] = xs[..] {
            return Ok(CutRule::Fixed(Thresholds {
                drift_src,
                drift_tgt,
                sim_drift,
            }));
        }
    }
    Err(bad())
}

fn classify_cmd(a: ClassifyArgs, argv: &[String]) -> CliResult<()> {
    let mut m = Manifest::new("classify", argv);
    let rule = parse_cuts(&a.cuts)?;
    let records = read_records(&a.records)?;
    m.input(&a.records);
    let c = classify(&records, rule)?;
    m.config("cuts", a.cuts.clone());
    m.config("cut_drift_src", c.cuts.drift_src);
    m.config("cut_drift_tgt", c.cuts.drift_tgt);
    m.config("cut_sim_drift", c.cuts.sim_drift);
    m.output(write_text(&a.out, &c.to_tsv(&records))?);
    let summary = c.summary_tsv();
    m.output(write_text(&tagged(&a.out, "summary"), &summary)?);
    print!("{summary}");
    m.write(&beside(&a.out))
}

fn project(a: ProjectArgs, argv: &[String]) -> CliResult<()> {
    let mut m = Manifest::new("project", argv);
    let mut models = Vec::new();
    for spec in &a.models {
        let (name, dir) = match spec.split_once('=') {
            Some((n, d)) => (n.to_string(), PathBuf::from(d)),
            None => {
                let dir = PathBuf::from(spec);
                let name = dir.file_name().map_or(spec.clone(), |n| n.to_string_lossy().into_owned());
                (name, dir)
            }
        };
        let model = load_model(&dir)?;
        model.files.iter().for_each(|f| m.input(f));
        models.push((name, model));
    }
    let sources: Vec<ProjectionSource> = models
        .iter()
        .map(|(name, model)| ProjectionSource {
            name,
            state: &model.state,
            vocab: &model.vocab,
        })
        .collect();
    let focus: Vec<&str> = a.words.split(',').map(str::trim).filter(|w| !w.is_empty()).collect();
    if focus.is_empty() {
        return Err(usage("--words needs at least one word"));
    }
    let points = projection_points(&sources, &focus, a.m)?;
    let projection = project_2d(&points)?;
    m.config("words", a.words.clone());
    m.config("m", a.m);
    m.config("variance", projection.variance.to_vec());
    m.output(write_text(&a.out, &projection.to_tsv())?);
    let mut vectors = String::new();
    for (label, x) in &points {
        let xs: Vec<String> = x.iter().map(f64::to_string).collect();
        writeln!(vectors, "{label}\t{}", xs.join(" ")).unwrap();
    }
    m.output(write_text(&tagged(&a.out, "vectors"), &vectors)?);
    m.write(&beside(&a.out))
}
