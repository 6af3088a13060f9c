//! Subcommand implementations. Each returns the manifest of its run;
//! [`execute`] writes it next to the command's primary output.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use newsxai_core::corpus::{read_corpus_dir, split_corpus, write_corpus, ingest_corpus, Corpus, CorpusSplit, Label, NewsStory, SplitPart, SplitRatios};
use newsxai_core::synth::{generate, SignalMode, SynthConfig};
use newsxai_core::textprep::TextBounds;
use newsxai_models::artifact::{load_ensemble, save_ensemble};
use newsxai_models::ensemble::{Ensemble, EnsembleConfig};
use newsxai_models::evaluate::{evaluate, AccuracyReport};
use newsxai_models::explain::{build_bundles, ExplanationBundle};
use newsxai_models::{ModelConfig, ModelKind, TextEncoder};
use newsxai_service::payload::StoryContent;
use newsxai_service::store::JsonlStore;
use newsxai_service::{AppState, Assignment, StudyDeployment};
use newsxai_stats::{analyze_study, render_text, AnalysisPlan};
use newsxai_study::metrics::report_from_log;
use newsxai_study::pool::pool_from_bundles;
use newsxai_study::{curate_queue, simulate_cohort, CuratedQueue, MetricsRecord, PoolItem, Policy, SessionLog, SimulationConfig, StudyCondition};

use crate::manifest::RunManifest;
use crate::{
    AnalyzeArgs, Command, CurateArgs, EvalArgs, ExplainArgs, IngestArgs, PipelineArgs, RerunArgs, ServeArgs, SimulateArgs,
    SplitArgs, SynthArgs, TrainArgs,
};

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    ensure_parent(path)?;
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_jsonl<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    ensure_parent(path)?;
    let mut w = BufWriter::new(fs::File::create(path).with_context(|| format!("creating {}", path.display()))?);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).with_context(|| format!("{}: line {}", path.display(), i + 1))?);
    }
    Ok(out)
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(p) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(p).with_context(|| format!("creating {}", p.display()))?;
    }
    Ok(())
}

fn parent_of(path: &Path) -> PathBuf {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    }
}

fn name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Synth(_) => "synth",
        Command::Ingest(_) => "ingest",
        Command::Split(_) => "split",
        Command::Train(_) => "train",
        Command::Eval(_) => "eval",
        Command::Explain(_) => "explain",
        Command::Curate(_) => "curate",
        Command::Serve(_) => "serve",
        Command::Simulate(_) => "simulate",
        Command::Analyze(_) => "analyze",
        Command::Pipeline(_) => "pipeline",
        Command::Rerun(_) => "rerun",
    }
}

/// Where a command's manifest goes: inside its output directory, or beside
/// its output file.
pub fn manifest_path(cmd: &Command) -> PathBuf {
    let dir = match cmd {
        Command::Synth(a) => a.out.clone(),
        Command::Ingest(a) => a.out.clone(),
        Command::Split(a) => parent_of(&split_out(a)),
        Command::Train(a) => a.out.clone(),
        Command::Eval(a) => parent_of(&a.out),
        Command::Explain(a) => parent_of(&a.out),
        Command::Curate(a) => a.out.clone(),
        Command::Serve(a) => a.store.clone(),
        Command::Simulate(a) => a.out.clone(),
        Command::Analyze(a) => a.out.clone(),
        Command::Pipeline(a) => a.workdir.clone(),
        Command::Rerun(a) => a.workdir.clone().unwrap_or_else(|| parent_of(&a.manifest)),
    };
    dir.join(format!("manifest-{}.json", name(cmd)))
}

/// Runs a command and writes its manifest.
pub fn execute(cmd: &Command) -> Result<RunManifest> {
    let started = Instant::now();
    let manifest = match cmd {
        Command::Synth(a) => synth(cmd, a)?,
        Command::Ingest(a) => ingest(cmd, a)?,
        Command::Split(a) => split(cmd, a)?,
        Command::Train(a) => train(cmd, a)?,
        Command::Eval(a) => eval(cmd, a)?,
        Command::Explain(a) => explain(cmd, a)?,
        Command::Curate(a) => curate(cmd, a)?,
        Command::Serve(a) => serve(cmd, a)?,
        Command::Simulate(a) => simulate(cmd, a)?,
        Command::Analyze(a) => analyze(cmd, a)?,
        Command::Pipeline(a) => pipeline(cmd, a)?,
        Command::Rerun(a) => rerun(cmd, a)?,
    };
    manifest.write(&manifest_path(cmd))?;
    tracing::info!("{} finished in {:.1}s", name(cmd), started.elapsed().as_secs_f64());
    Ok(manifest)
}

fn parse_mode(s: &str) -> Result<SignalMode> {
    match s {
        "triggers" => Ok(SignalMode::Triggers),
        "source-only" => Ok(SignalMode::SourceOnly),
        other => bail!("unknown synthetic mode {other:?} (expected triggers or source-only)"),
    }
}

fn synth(cmd: &Command, a: &SynthArgs) -> Result<RunManifest> {
    let cfg = SynthConfig {
        stories: a.stories,
        articles_per_story: a.articles_per_story,
        mode: parse_mode(&a.mode)?,
        seed: a.seed,
        ..SynthConfig::default()
    };
    let generated = generate(&cfg);
    let corpus = generated.corpus();
    write_corpus(&corpus, &a.out)?;
    let planted: Vec<_> = generated.planted.values().collect();
    write_jsonl(&a.out.join("planted.jsonl"), &planted)?;
    let mut m = RunManifest::new(cmd);
    m.config = serde_json::to_value(&cfg)?;
    m.seed("synth", a.seed);
    m.output("corpus", &a.out)?;
    Ok(m)
}

fn ingest(cmd: &Command, a: &IngestArgs) -> Result<RunManifest> {
    let corpus = ingest_corpus(&a.claims, &a.articles)?;
    write_corpus(&corpus, &a.out)?;
    let flagged = corpus.flagged_without_evidence();
    if !flagged.is_empty() {
        tracing::warn!("{} stories have no related articles", flagged.len());
    }
    let mut m = RunManifest::new(cmd);
    m.input("claims", &a.claims)?;
    m.input("articles", &a.articles)?;
    m.output("corpus", &a.out)?;
    Ok(m)
}

fn split_out(a: &SplitArgs) -> PathBuf {
    a.out.clone().unwrap_or_else(|| parent_of(&a.corpus).join("split.json"))
}

fn split(cmd: &Command, a: &SplitArgs) -> Result<RunManifest> {
    let out = split_out(a);
    let corpus = read_corpus_dir(&a.corpus)?;
    let ratios = SplitRatios {
        train: a.train,
        validation: a.validation,
        test: a.test,
    };
    let s = split_corpus(&corpus, ratios, a.seed)?;
    write_json(&out, &s)?;
    let mut m = RunManifest::new(cmd);
    m.config = serde_json::to_value(ratios)?;
    m.seed("split", a.seed);
    m.input("corpus", &a.corpus)?;
    m.output("split", &out)?;
    Ok(m)
}

/// Stories of one split part, or of validation and test for `held-out`, in
/// corpus order.
fn part_stories<'a>(corpus: &'a Corpus, split: &CorpusSplit, part: &str) -> Result<Vec<&'a NewsStory>> {
    let ids: BTreeSet<&String> = match part {
        "held-out" => split.validation.iter().chain(&split.test).collect(),
        "all" => split.train.iter().chain(&split.validation).chain(&split.test).collect(),
        p => split.part(p.parse::<SplitPart>().map_err(|e| anyhow!(e))?).iter().collect(),
    };
    Ok(corpus.stories().iter().filter(|s| ids.contains(&s.story_id)).collect())
}

/// Defaults, then the config file, then flags.
pub fn training_config(a: &TrainArgs) -> Result<EnsembleConfig> {
    let mut cfg = match &a.config {
        Some(p) => read_json::<EnsembleConfig>(p)?,
        None => EnsembleConfig::uniform(ModelConfig::default()),
    };
    for c in [&mut cfg.m1, &mut cfg.m2, &mut cfg.m3, &mut cfg.m4] {
        if let Some(v) = a.epochs {
            c.epochs = v;
        }
        if let Some(v) = a.hidden_size {
            c.hidden_size = v;
        }
        if let Some(v) = a.embedding_dim {
            c.embedding_dim = v;
        }
        if let Some(v) = a.learning_rate {
            c.learning_rate = v;
        }
        if let Some(v) = a.batch_size {
            c.batch_size = v;
        }
        if let Some(v) = a.seed {
            c.seed = v;
        }
        c.validate()?;
    }
    Ok(cfg)
}

fn train(cmd: &Command, a: &TrainArgs) -> Result<RunManifest> {
    let cfg = training_config(a)?;
    let corpus = read_corpus_dir(&a.corpus)?;
    let split: CorpusSplit = read_json(&a.split)?;
    let train_stories = part_stories(&corpus, &split, "train")?;
    let encoder = TextEncoder::fit(&train_stories, a.min_frequency, TextBounds::default())?;
    let train_set = encoder.encode_all(train_stories.iter().copied());
    tracing::info!("training on {} stories, vocabulary {}", train_set.len(), encoder.vocab_hash());
    let models = Ensemble::train(encoder, &train_set, &cfg, None)?;
    let validation = models.encode(&part_stories(&corpus, &split, "validation")?);
    let mut evaluations = BTreeMap::new();
    if !validation.is_empty() {
        for m in models.members() {
            evaluations.insert(m.kind(), evaluate(m, &validation)?);
        }
    }
    save_ensemble(&models, &a.out, &evaluations)?;
    let mut m = RunManifest::new(cmd);
    m.config = serde_json::to_value(&cfg)?;
    for (k, c) in [("m1", &cfg.m1), ("m2", &cfg.m2), ("m3", &cfg.m3), ("m4", &cfg.m4)] {
        m.seed(k, c.seed);
    }
    m.input("corpus", &a.corpus)?;
    m.input("split", &a.split)?;
    m.output("models", &a.out)?;
    Ok(m)
}

/// Held-out accuracy of every member and of the ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub part: String,
    pub n: usize,
    pub members: BTreeMap<String, AccuracyReport>,
    pub ensemble: AccuracyReport,
    /// Student/teacher label agreement of M3 on this part.
    pub m3_fidelity: f64,
}

pub fn evaluate_models(models: &Ensemble, stories: &[&NewsStory], part: &str) -> Result<EvalReport> {
    let encoded = models.encode(stories);
    let mut members = BTreeMap::new();
    for m in models.members() {
        members.insert(m.kind().name().to_string(), evaluate(m, &encoded)?);
    }
    let truth: Vec<Label> = encoded.iter().map(|s| s.label).collect();
    let scores: Vec<f64> = models.predict(&encoded).iter().map(|p| p.score).collect();
    Ok(EvalReport {
        part: part.to_string(),
        n: encoded.len(),
        members,
        ensemble: AccuracyReport::from_scores(&truth, &scores)?,
        m3_fidelity: models.m3.fidelity(&encoded),
    })
}

fn eval(cmd: &Command, a: &EvalArgs) -> Result<RunManifest> {
    let corpus = read_corpus_dir(&a.corpus)?;
    let split: CorpusSplit = read_json(&a.split)?;
    let models = load_ensemble(&a.models)?;
    let report = evaluate_models(&models, &part_stories(&corpus, &split, &a.part)?, &a.part)?;
    for k in ModelKind::ALL {
        tracing::info!("{} accuracy {:.4}", k.name(), report.members[k.name()].accuracy);
    }
    tracing::info!("ensemble accuracy {:.4}", report.ensemble.accuracy);
    write_json(&a.out, &report)?;
    let mut m = RunManifest::new(cmd);
    m.input("corpus", &a.corpus)?;
    m.input("split", &a.split)?;
    m.input("models", &a.models)?;
    m.output("eval", &a.out)?;
    Ok(m)
}

fn explain(cmd: &Command, a: &ExplainArgs) -> Result<RunManifest> {
    let corpus = read_corpus_dir(&a.corpus)?;
    let split: CorpusSplit = read_json(&a.split)?;
    let models = load_ensemble(&a.models)?;
    let encoded = models.encode(&part_stories(&corpus, &split, &a.part)?);
    let bundles = build_bundles(&models, &encoded, a.epsilon)?;
    write_jsonl(&a.out, &bundles)?;
    let mut m = RunManifest::new(cmd);
    m.config = serde_json::json!({ "part": a.part, "epsilon": a.epsilon });
    m.input("corpus", &a.corpus)?;
    m.input("split", &a.split)?;
    m.input("models", &a.models)?;
    m.output("bundles", &a.out)?;
    Ok(m)
}

fn labels(corpus: &Corpus) -> BTreeMap<String, Label> {
    corpus.stories().iter().map(|s| (s.story_id.clone(), s.label)).collect()
}

fn curate(cmd: &Command, a: &CurateArgs) -> Result<RunManifest> {
    let mut m = RunManifest::new(cmd);
    let pool: Vec<PoolItem> = match (&a.pool, &a.corpus, &a.bundles) {
        (Some(p), _, _) => {
            let file = if p.is_dir() { p.join("pool.json") } else { p.clone() };
            m.input("pool", &file)?;
            read_json(&file)?
        }
        (None, Some(corpus_dir), Some(bundles_path)) => {
            let corpus = read_corpus_dir(corpus_dir)?;
            let bundles: Vec<ExplanationBundle> = read_jsonl(bundles_path)?;
            m.input("corpus", corpus_dir)?;
            m.input("bundles", bundles_path)?;
            pool_from_bundles(&bundles, &labels(&corpus))
        }
        _ => bail!("curate needs --pool, or --corpus with --bundles"),
    };
    let queue = curate_queue(&pool, a.length, a.seed)?;
    if queue.override_count() > 0 {
        tracing::warn!("{} queue items display an overridden prediction", queue.override_count());
    }
    let (queue_path, pool_path) = (a.out.join("queue.json"), a.out.join("pool.json"));
    write_json(&queue_path, &queue)?;
    write_json(&pool_path, &pool)?;
    m.config = serde_json::json!({ "length": a.length });
    m.seed("queue", a.seed);
    m.output("queue", &queue_path)?;
    m.output("pool", &pool_path)?;
    Ok(m)
}

fn parse_condition(s: &str) -> Result<StudyCondition> {
    s.parse().map_err(|e: String| anyhow!(e))
}

fn serve(cmd: &Command, a: &ServeArgs) -> Result<RunManifest> {
    let corpus = read_corpus_dir(&a.corpus)?;
    let queue: CuratedQueue = read_json(&a.queue)?;
    let pool: Vec<PoolItem> = read_json(&a.pool)?;
    let wanted: BTreeSet<&str> = queue
        .items
        .iter()
        .map(|i| i.story_id.as_str())
        .chain(pool.iter().map(|p| p.story_id.as_str()))
        .collect();
    let stories = corpus
        .stories()
        .iter()
        .filter(|s| wanted.contains(s.story_id.as_str()))
        .map(|s| (s.story_id.clone(), StoryContent::from_story(s)))
        .collect();
    let bundles = read_jsonl::<ExplanationBundle>(&a.bundles)?
        .into_iter()
        .filter(|b| wanted.contains(b.story_id.as_str()))
        .map(|b| (b.story_id.clone(), b))
        .collect();
    let assignment = match &a.condition {
        Some(c) => Assignment::Fixed {
            condition: parse_condition(c)?,
        },
        None => Assignment::RoundRobin,
    };
    let deployment = StudyDeployment {
        study_id: a.study.clone(),
        assignment,
        queue,
        pool,
        stories,
        bundles,
    };
    let store = Arc::new(JsonlStore::open(&a.store)?);
    let state = Arc::new(AppState::new(vec![deployment], store)?);

    let mut m = RunManifest::new(cmd);
    m.config = serde_json::to_value(assignment)?;
    m.input("corpus", &a.corpus)?;
    m.input("bundles", &a.bundles)?;
    m.input("queue", &a.queue)?;
    m.input("pool", &a.pool)?;
    m.write(&manifest_path(cmd))?;

    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(&a.addr)
            .await
            .with_context(|| format!("binding {}", a.addr))?;
        tracing::info!("serving study {} on {}", a.study, listener.local_addr()?);
        newsxai_service::serve(listener, state).await?;
        anyhow::Ok(())
    })?;
    Ok(m)
}

/// Defaults, then the config file, then flags.
pub fn simulation_config(a: &SimulateArgs) -> Result<SimulationConfig> {
    let mut cfg = match &a.config {
        Some(p) => read_json::<SimulationConfig>(p)?,
        None => SimulationConfig::default(),
    };
    if let Some(p) = &a.policy {
        cfg.policy = p.parse::<Policy>().map_err(|e| anyhow!(e))?;
    }
    if let Some(s) = a.skip_rate {
        cfg.skip_rate = s;
    }
    Ok(cfg)
}

fn simulate(cmd: &Command, a: &SimulateArgs) -> Result<RunManifest> {
    let cfg = simulation_config(a)?;
    let queue: CuratedQueue = read_json(&a.queue)?;
    let pool: Option<Vec<PoolItem>> = a.pool.as_deref().map(read_json).transpose()?;
    let conditions = match a.condition.as_str() {
        "all" | "round-robin" => StudyCondition::ALL.to_vec(),
        c => vec![parse_condition(c)?],
    };
    let sessions = simulate_cohort(&queue, pool.as_deref(), &conditions, a.n, &cfg, a.seed)?;
    let logs_dir = a.out.join("logs");
    if logs_dir.exists() {
        fs::remove_dir_all(&logs_dir).with_context(|| format!("clearing {}", logs_dir.display()))?;
    }
    fs::create_dir_all(&logs_dir)?;
    let mut records = Vec::with_capacity(sessions.len());
    for s in &sessions {
        let log = SessionLog {
            header: s.header(),
            events: s.events.clone(),
        };
        fs::write(logs_dir.join(format!("{}.jsonl", s.session_id)), log.to_jsonl())?;
        records.push(newsxai_study::build_report(s)?);
    }
    let metrics_path = a.out.join("metrics.jsonl");
    write_jsonl(&metrics_path, &records)?;
    let mut m = RunManifest::new(cmd);
    m.config = serde_json::to_value(&cfg)?;
    m.seed("simulate", a.seed);
    m.input("queue", &a.queue)?;
    if let Some(p) = &a.pool {
        m.input("pool", p)?;
    }
    m.output("logs", &logs_dir)?;
    m.output("metrics", &metrics_path)?;
    Ok(m)
}

/// Metrics of every log in a directory, by file name order.
pub fn metrics_from_logs(dir: &Path) -> Result<Vec<MetricsRecord>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e == "jsonl"));
    files.sort();
    files
        .iter()
        .map(|p| {
            let f = fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
            let log = SessionLog::read_from(BufReader::new(f)).with_context(|| format!("reading {}", p.display()))?;
            report_from_log(log.header, &log.events).with_context(|| format!("replaying {}", p.display()))
        })
        .collect()
}

fn analyze(cmd: &Command, a: &AnalyzeArgs) -> Result<RunManifest> {
    let mut plan = AnalysisPlan::named(&a.plan).ok_or_else(|| anyhow!("unknown analysis plan {:?}", a.plan))?;
    if let Some(d) = a.min_duration {
        plan.min_duration_minutes = d;
    }
    let mut m = RunManifest::new(cmd);
    let records = match (&a.logs, &a.metrics) {
        (Some(dir), _) => {
            m.input("logs", dir)?;
            metrics_from_logs(dir)?
        }
        (None, Some(p)) => {
            m.input("metrics", p)?;
            read_jsonl(p)?
        }
        (None, None) => bail!("either --logs or --metrics is required"),
    };
    let report = analyze_study(&records, &plan);
    let (json_path, text_path) = (a.out.join("analysis.json"), a.out.join("analysis.txt"));
    write_json(&json_path, &report)?;
    fs::write(&text_path, render_text(&report))?;
    m.config = serde_json::to_value(&plan)?;
    m.output("analysis", &json_path)?;
    m.output("analysis_text", &text_path)?;
    Ok(m)
}

fn pipeline(cmd: &Command, a: &PipelineArgs) -> Result<RunManifest> {
    let w = &a.workdir;
    let corpus = w.join("corpus");
    let split_path = w.join("split.json");
    let models = w.join("models");
    let bundles = w.join("bundles.jsonl");
    let study = w.join("study");
    let sim = w.join("simulation");
    let analysis = w.join("analysis");
    let steps = [
        Command::Synth(SynthArgs {
            out: corpus.clone(),
            stories: a.stories,
            articles_per_story: 3,
            mode: "triggers".into(),
            seed: a.seed,
        }),
        Command::Split(SplitArgs {
            corpus: corpus.clone(),
            out: Some(split_path.clone()),
            seed: a.seed,
            train: 0.8,
            validation: 0.1,
            test: 0.1,
        }),
        Command::Train(TrainArgs {
            corpus: corpus.clone(),
            split: split_path.clone(),
            out: models.clone(),
            config: None,
            seed: Some(a.seed),
            epochs: a.epochs,
            hidden_size: None,
            embedding_dim: None,
            learning_rate: None,
            batch_size: None,
            min_frequency: 1,
        }),
        Command::Eval(EvalArgs {
            corpus: corpus.clone(),
            split: split_path.clone(),
            models: models.clone(),
            part: "test".into(),
            out: w.join("eval.json"),
        }),
        Command::Explain(ExplainArgs {
            corpus: corpus.clone(),
            split: split_path.clone(),
            models: models.clone(),
            part: "held-out".into(),
            epsilon: newsxai_models::explain::DEFAULT_HEATMAP_EPSILON,
            out: bundles.clone(),
        }),
        Command::Curate(CurateArgs {
            corpus: Some(corpus.clone()),
            bundles: Some(bundles.clone()),
            pool: None,
            length: a.queue_length,
            seed: a.seed,
            out: study.clone(),
        }),
        Command::Simulate(SimulateArgs {
            queue: study.join("queue.json"),
            pool: Some(study.join("pool.json")),
            condition: "all".into(),
            policy: Some(a.policy.clone()),
            n: a.participants,
            seed: a.seed,
            config: None,
            skip_rate: None,
            out: sim.clone(),
        }),
        Command::Analyze(AnalyzeArgs {
            logs: Some(sim.join("logs")),
            metrics: None,
            plan: "default".into(),
            min_duration: None,
            out: analysis.clone(),
        }),
    ];
    let mut m = RunManifest::new(cmd);
    let mut timings = BTreeMap::new();
    for step in &steps {
        let started = Instant::now();
        let sub = execute(step)?;
        let secs = started.elapsed().as_secs_f64();
        eprintln!("{:<9} done in {secs:.1}s", name(step));
        timings.insert(name(step), secs);
        for (k, v) in sub.seeds {
            m.seeds.insert(format!("{}.{k}", name(step)), v);
        }
        for (k, v) in sub.outputs {
            m.outputs.insert(format!("{}.{k}", name(step)), v);
        }
    }
    // wall-clock seconds per step; informational, so not a manifest output
    write_json(&w.join("timings.json"), &timings)?;
    m.config = serde_json::to_value(&steps)?;
    Ok(m)
}

/// Outputs whose hashes differ between two runs of one manifest.
pub fn compare_outputs(before: &RunManifest, after: &RunManifest) -> Vec<String> {
    before
        .outputs
        .iter()
        .filter(|(k, v)| after.outputs.get(*k).is_none_or(|w| w.sha256 != v.sha256))
        .map(|(k, _)| k.clone())
        .collect()
}

fn rerun(cmd: &Command, a: &RerunArgs) -> Result<RunManifest> {
    let recorded = RunManifest::read(&a.manifest)?;
    let mut again = recorded.command.clone();
    match (&mut again, &a.workdir) {
        (Command::Pipeline(p), Some(w)) => p.workdir = w.clone(),
        (_, Some(_)) => bail!("--workdir applies only to recorded pipeline runs"),
        (Command::Serve(_) | Command::Rerun(_), None) => bail!("a {} run cannot be replayed", name(&again)),
        _ => {}
    }
    let fresh = execute(&again)?;
    let differing = compare_outputs(&recorded, &fresh);
    for (k, v) in &fresh.outputs {
        let status = if differing.contains(k) { "DIFFERENT" } else { "identical" };
        println!("{k:<28} {status} {}", v.sha256);
    }
    if !differing.is_empty() {
        bail!("outputs differ from the recorded run: {}", differing.join(", "));
    }
    let mut m = RunManifest::new(cmd);
    m.input("manifest", &a.manifest)?;
    m.outputs = fresh.outputs;
    Ok(m)
}
