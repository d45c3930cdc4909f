//! Subcommand implementations. Every command reads its inputs from files and
//! writes its outputs plus a manifest into `--out`.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use serde::{Deserialize, Serialize};

use changekit::analytics::{self, read_prices, FlowTable, MeiklejohnVariant, DAY};
use changekit::chain::{parse_corpus, ChainView, CoinJoinRule, TagCategory, TagSet, TxIdx};
use changekit::cluster::{multi_input_clustering, ClusterAssignment};
use changekit::combiner::roc_threshold_vote;
use changekit::enhance::{constrained_enhance, naive_enhance, predict_all, PredictionSet, Thresholds};
use changekit::forest::ForestModel;
use changekit::ground_truth::{extract_ground_truth, GroundTruthConfig, GroundTruthSet};
use changekit::heuristics::{build_vote_table, evaluate_heuristics, write_scores_csv, HeuristicKind};
use changekit::pipeline::{train_models, TrainOutcome, TrainSettings};
use changekit::roc::RocCurve;
use changekit::synth::{generate as synthesize, SynthConfig};

use crate::manifest::Run;
use crate::{CoinJoinArgs, Out, ThresholdArgs};

impl From<CoinJoinArgs> for CoinJoinRule {
    fn from(a: CoinJoinArgs) -> Self {
        CoinJoinRule {
            min_inputs_outputs: a.coinjoin_min_io,
            min_equal_outputs: a.coinjoin_min_equal,
        }
    }
}

impl ThresholdArgs {
    fn thresholds(self) -> Result<Thresholds> {
        Ok(Thresholds::new(self.p_change, self.p_spend)?)
    }
}

fn corpus(run: &mut Run, path: &Path) -> Result<ChainView> {
    let r = run.open(path)?;
    parse_corpus(r).with_context(|| format!("corpus {}", path.display()))
}

fn clusters(run: &mut Run, path: &Path, view: &ChainView) -> Result<ClusterAssignment> {
    let r = run.open(path)?;
    ClusterAssignment::read_clusters(r, view).with_context(|| format!("clusters {}", path.display()))
}

fn ground_truth(run: &mut Run, path: &Path, view: &ChainView) -> Result<GroundTruthSet> {
    let r = run.open(path)?;
    GroundTruthSet::read(r, view).with_context(|| format!("ground truth {}", path.display()))
}

fn tags(run: &mut Run, path: Option<&Path>) -> Result<TagSet> {
    match path {
        Some(p) => {
            let r = run.open(p)?;
            TagSet::read(r).with_context(|| format!("tags {}", p.display()))
        }
        None => Ok(TagSet::new()),
    }
}

/// One txid per line.
fn txids(run: &mut Run, path: &Path, view: &ChainView) -> Result<Vec<TxIdx>> {
    let r = run.open(path)?;
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        let id = line.trim();
        if id.is_empty() {
            continue;
        }
        out.push(view.lookup(id).ok_or_else(|| anyhow!("{}:{}: unknown txid {id}", path.display(), n + 1))?);
    }
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

fn write_txids(w: &mut impl Write, view: &ChainView, txs: &[TxIdx]) -> Result<()> {
    for &t in txs {
        writeln!(w, "{}", view.tx(t).txid)?;
    }
    w.flush()?;
    Ok(())
}

fn non_coinbase(view: &ChainView) -> Vec<TxIdx> {
    view.tx_indices().filter(|&t| !view.tx(t).coinbase).collect()
}

#[derive(Serialize, Deserialize)]
struct ChangeRecord {
    txid: String,
    output_index: usize,
}

fn write_changes(w: &mut impl Write, view: &ChainView, changes: &[(TxIdx, Option<usize>)]) -> Result<()> {
    for (t, c) in changes {
        if let Some(c) = c {
            let rec = ChangeRecord {
                txid: view.tx(*t).txid.clone(),
                output_index: *c,
            };
            serde_json::to_writer(&mut *w, &rec)?;
            w.write_all(b"\n")?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reads `{txid, output_index}` lines; other fields are ignored.
fn read_changes(run: &mut Run, path: &Path, view: &ChainView) -> Result<Vec<(TxIdx, Option<usize>)>> {
    let r = run.open(path)?;
    let mut seen = BTreeMap::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let at = || format!("{}:{}", path.display(), n + 1);
        let rec: ChangeRecord = serde_json::from_str(&line).with_context(at)?;
        let t = view.lookup(&rec.txid).ok_or_else(|| anyhow!("{}: unknown txid {}", at(), rec.txid))?;
        if rec.output_index >= view.tx(t).outputs.len() {
            bail!("{}: output index {} out of range", at(), rec.output_index);
        }
        if seen.insert(t, rec.output_index).is_some() {
            bail!("{}: duplicate txid {}", at(), rec.txid);
        }
    }
    Ok(seen.into_iter().map(|(t, c)| (t, Some(c))).collect())
}

fn write_roc(run: &mut Run, file: &str, roc: &RocCurve<f64>) -> Result<()> {
    let mut w = run.create(file)?;
    roc.write_csv(&mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[command(flatten)]
    out: Out,
    /// Generator config (TOML); without it the standard population is used.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Simulated days for the standard population.
    #[arg(long, default_value_t = 120)]
    days: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

pub fn generate(a: GenerateArgs) -> Result<PathBuf> {
    let mut run = Run::new("generate", &a.out.out, &a, Some(a.seed))?;
    let config = match &a.config {
        Some(p) => {
            run.record_input(p);
            let text = std::fs::read_to_string(p).with_context(|| format!("missing input {}", p.display()))?;
            SynthConfig::from_toml(&text)?
        }
        None => SynthConfig::standard(a.days),
    };
    let corpus = run.time("generate", || synthesize(&config, a.seed))?;
    corpus.write_dir(&a.out.out)?;
    for f in ["corpus.jsonl", "labels.jsonl", "tags.jsonl", "ledger.csv"] {
        run.record_output(f);
    }
    let mut w = run.create("synth_config.toml")?;
    w.write_all(config.to_toml().as_bytes())?;
    w.flush()?;
    run.finish()
}

#[derive(Debug, Args, Serialize)]
pub struct ClusterBaseArgs {
    #[command(flatten)]
    out: Out,
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    coinjoin: CoinJoinArgs,
}

pub fn cluster_base(a: ClusterBaseArgs) -> Result<PathBuf> {
    let mut run = Run::new("cluster-base", &a.out.out, &a, None)?;
    let view = corpus(&mut run, &a.corpus)?;
    let base = run.time("cluster", || multi_input_clustering(&view, &a.coinjoin.into()));
    base.write_clusters(run.create("clusters.jsonl")?, &view)?;
    base.write_summary(run.create("cluster_summary.csv")?, &view)?;
    run.finish()
}

#[derive(Debug, Args, Serialize)]
pub struct ExtractGtArgs {
    #[command(flatten)]
    out: Out,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    clusters: PathBuf,
    /// Address tags; without them the tag filter removes nothing.
    #[arg(long)]
    tags: Option<PathBuf>,
    /// Addresses, one per line, whose clusters are excluded.
    #[arg(long)]
    blocklist: Option<PathBuf>,
    /// Two-candidate share above which a cluster is dropped.
    #[arg(long, default_value_t = 0.10)]
    self_rate_threshold: f64,
    #[command(flatten)]
    coinjoin: CoinJoinArgs,
}

pub fn extract_gt(a: ExtractGtArgs) -> Result<PathBuf> {
    let mut run = Run::new("extract-gt", &a.out.out, &a, None)?;
    let view = corpus(&mut run, &a.corpus)?;
    let base = clusters(&mut run, &a.clusters, &view)?;
    let tags = tags(&mut run, a.tags.as_deref())?;
    let mut blocklist = Vec::new();
    if let Some(p) = &a.blocklist {
        for line in run.open(p)?.lines() {
            let line = line?;
            if !line.trim().is_empty() {
                blocklist.push(line.trim().to_string());
            }
        }
    }
    let config = GroundTruthConfig {
        self_rate_threshold: a.self_rate_threshold,
        blocklist,
        coinjoin: a.coinjoin.into(),
    };
    let gt = run.time("extract", || extract_ground_truth(&view, &base, &tags, &config));
    gt.ground_truth.write(run.create("ground_truth.jsonl")?, &view)?;
    run.write_json("ground_truth_report.json", &gt.summary(&config))?;
    write_txids(&mut run.create("unknown_change.txt")?, &view, &gt.unknown_change)?;
    run.finish()
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    #[command(flatten)]
    out: Out,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    ground_truth: PathBuf,
    /// Transactions with unknown change, for coverage.
    #[arg(long)]
    unknown: PathBuf,
    #[command(flatten)]
    coinjoin: CoinJoinArgs,
}

pub fn eval_heuristics(a: EvalArgs) -> Result<PathBuf> {
    let mut run = Run::new("eval-heuristics", &a.out.out, &a, None)?;
    let view = corpus(&mut run, &a.corpus)?;
    let gt = ground_truth(&mut run, &a.ground_truth, &view)?;
    let unknown = txids(&mut run, &a.unknown, &view)?;
    let scores = run.time("evaluate", || {
        evaluate_heuristics(&gt, &HeuristicKind::ALL, &view, &unknown, &a.coinjoin.into())
    })?;
    let mut w = run.create("heuristics.csv")?;
    write_scores_csv(&mut w, &scores)?;
    w.flush()?;
    run.finish()
}

#[derive(Debug, Args, Serialize)]
pub struct VoteRocArgs {
    #[command(flatten)]
    out: Out,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    ground_truth: PathBuf,
    #[command(flatten)]
    coinjoin: CoinJoinArgs,
}

pub fn vote_roc(a: VoteRocArgs) -> Result<PathBuf> {
    let mut run = Run::new("vote-roc", &a.out.out, &a, None)?;
    let view = corpus(&mut run, &a.corpus)?;
    let gt = ground_truth(&mut run, &a.ground_truth, &view)?;
    let table = run.time("votes", || build_vote_table(&gt.txs(), &HeuristicKind::ALL, &view, &a.coinjoin.into()));
    let mut w = run.create("vote_table.bin")?;
    table.write_binary(&mut w, &view)?;
    w.flush()?;
    let roc: RocCurve<f64> = roc_threshold_vote(&gt, &table)?;
    write_roc(&mut run, "vote_roc.csv", &roc)?;
    run.finish()
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[command(flatten)]
    out: Out,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    clusters: PathBuf,
    #[arg(long)]
    ground_truth: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    n_trees: usize,
    /// Share of base clusters held out for testing.
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,
    /// Successive-halving search over max_features and min_samples_split.
    #[arg(long)]
    search: bool,
    /// Cross-validation folds of the search.
    #[arg(long, default_value_t = 4)]
    folds: usize,
    #[command(flatten)]
    coinjoin: CoinJoinArgs,
}

#[derive(Serialize)]
struct TrainingSummary<'a> {
    rows: usize,
    train_rows: usize,
    test_rows: usize,
    full_auc: f64,
    reduced_auc: f64,
    vote_auc: f64,
    full_params: &'a changekit::forest::ForestParams,
    reduced_params: &'a changekit::forest::ForestParams,
    full_split_counts: Vec<usize>,
    reduced_split_counts: Vec<usize>,
}

pub fn train(a: TrainArgs) -> Result<PathBuf> {
    let mut run = Run::new("train", &a.out.out, &a, Some(a.seed))?;
    let view = corpus(&mut run, &a.corpus)?;
    let base = clusters(&mut run, &a.clusters, &view)?;
    let gt = ground_truth(&mut run, &a.ground_truth, &view)?;
    let table = build_vote_table(&gt.txs(), &HeuristicKind::ALL, &view, &a.coinjoin.into());
    let settings = TrainSettings {
        test_fraction: a.test_fraction,
        seed: a.seed,
        n_trees: a.n_trees,
        search: a.search,
        folds: a.folds,
    };
    let t: TrainOutcome<f64> = run.time("train", || train_models(&view, &base, &gt, &table, &settings))?;
    t.full.write(run.create("model_full.ckrf")?)?;
    t.reduced.write(run.create("model_reduced.ckrf")?)?;
    write_roc(&mut run, "forest_roc_full.csv", &t.full_roc)?;
    write_roc(&mut run, "forest_roc_reduced.csv", &t.reduced_roc)?;
    write_roc(&mut run, "vote_roc_test.csv", &t.vote_roc)?;
    run.write_json(
        "training.json",
        &TrainingSummary {
            rows: t.rows.len(),
            train_rows: t.train.len(),
            test_rows: t.test.len(),
            full_auc: t.full_roc.auc,
            reduced_auc: t.reduced_roc.auc,
            vote_auc: t.vote_roc.auc,
            full_params: &t.full.params,
            reduced_params: &t.reduced.params,
            full_split_counts: t.full.split_counts(),
            reduced_split_counts: t.reduced.split_counts(),
        },
    )?;
    if a.search {
        let mut w = run.create("search.csv")?;
        writeln!(w, "variant,round,rows,max_features,min_samples_split,auc")?;
        for (variant, log) in &t.search {
            for r in log {
                for (mf, mss, auc) in &r.scores {
                    writeln!(w, "{variant:?},{},{},{mf},{mss},{auc:.6}", r.round, r.rows)?;
                }
            }
        }
        w.flush()?;
    }
    run.finish()
}

#[derive(Debug, Args, Serialize)]
pub struct PredictArgs {
    #[command(flatten)]
    out: Out,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    clusters: PathBuf,
    /// Transactions to score, one txid per line.
    #[arg(long)]
    unknown: PathBuf,
    #[arg(long)]
    model_full: PathBuf,
    #[arg(long)]
    model_reduced: PathBuf,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    #[command(flatten)]
    coinjoin: CoinJoinArgs,
}

pub fn predict(a: PredictArgs) -> Result<PathBuf> {
    let mut run = Run::new("predict", &a.out.out, &a, None)?;
    let view = corpus(&mut run, &a.corpus)?;
    let base = clusters(&mut run, &a.clusters, &view)?;
    let unknown = txids(&mut run, &a.unknown, &view)?;
    let full: ForestModel<f64> = ForestModel::read(run.open(&a.model_full)?)?;
    let reduced: ForestModel<f64> = ForestModel::read(run.open(&a.model_reduced)?)?;
    let thresholds = a.thresholds.thresholds()?;
    let preds = run.time("predict", || {
        predict_all(&view, &base, &a.coinjoin.into(), &full, &reduced, &unknown, thresholds)
    })?;
    preds.write(run.create("predictions.jsonl")?, &view)?;
    run.finish()
}

#[derive(Debug, Args, Serialize)]
pub struct EnhanceArgs {
    #[command(flatten)]
    out: Out,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    clusters: PathBuf,
    #[arg(long)]
    predictions: PathBuf,
    /// Merge every predicted change output.
    #[arg(long)]
    naive: bool,
    /// Refuse merges that join a spend-linked pair of clusters.
    #[arg(long)]
    constrained: bool,
    #[command(flatten)]
    thresholds: ThresholdArgs,
}

pub fn enhance(a: EnhanceArgs) -> Result<PathBuf> {
    let mode = if a.constrained { "constrained" } else { "naive" };
    let mut run = Run::new(&format!("enhance-{mode}"), &a.out.out, &a, None)?;
    let view = corpus(&mut run, &a.corpus)?;
    let base = clusters(&mut run, &a.clusters, &view)?;
    let thresholds = a.thresholds.thresholds()?;
    let preds = PredictionSet::read(run.open(&a.predictions)?, &view, thresholds)?;
    let outcome = run.time("merge", || {
        if a.constrained {
            constrained_enhance(&view, &base, &preds).0
        } else {
            naive_enhance(&view, &base, &preds)
        }
    });
    outcome.assignment.write_clusters(run.create(&format!("{mode}_clusters.jsonl"))?, &view)?;
    outcome.report.write_text(run.create(&format!("{mode}_collapse.txt"))?)?;
    outcome
        .report
        .write_clusters_csv(run.create(&format!("{mode}_collapse_clusters.csv"))?)?;
    outcome
        .report
        .write_histogram_csv(run.create(&format!("{mode}_collapse_histogram.csv"))?)?;
    run.write_json(&format!("{mode}_merge_stats.json"), &outcome.stats)?;
    run.finish()
}

#[derive(Debug, Args, Serialize)]
pub struct FlowsArgs {
    #[command(flatten)]
    out: Out,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    tags: PathBuf,
    /// Clustering to measure.
    #[arg(long)]
    clusters: PathBuf,
    /// Clustering to compare against; defaults to `--clusters` itself.
    #[arg(long)]
    baseline: Option<PathBuf>,
    #[arg(long, default_value = "darknet")]
    src: TagCategory,
    #[arg(long, default_value = "exchange")]
    dst: TagCategory,
}

pub fn flows(a: FlowsArgs) -> Result<PathBuf> {
    let mut run = Run::new("analyze-flows", &a.out.out, &a, None)?;
    let view = corpus(&mut run, &a.corpus)?;
    let tags = tags(&mut run, Some(&a.tags))?;
    let after = clusters(&mut run, &a.clusters, &view)?;
    let after = analytics::flows(&view, &after, &tags, a.src, a.dst)?;
    let before = match &a.baseline {
        Some(p) => {
            let b = clusters(&mut run, p, &view)?;
            analytics::flows(&view, &b, &tags, a.src, a.dst)?
        }
        None => after.clone(),
    };
    let mut w = run.create("flows.csv")?;
    FlowTable::compare(&before, &after).write_csv(&mut w)?;
    w.flush()?;
    run.finish()
}

#[derive(Debug, Args, Serialize)]
pub struct VelocityArgs {
    #[command(flatten)]
    out: Out,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    clusters: PathBuf,
    /// Bucket width in seconds.
    #[arg(long, default_value_t = DAY)]
    bucket_seconds: i64,
}

pub fn velocity(a: VelocityArgs) -> Result<PathBuf> {
    let mut run = Run::new("analyze-velocity", &a.out.out, &a, None)?;
    let view = corpus(&mut run, &a.corpus)?;
    let c = clusters(&mut run, &a.clusters, &view)?;
    let series = run.time("velocity", || analytics::velocity(&view, &c, a.bucket_seconds))?;
    let mut w = run.create("velocity.csv")?;
    analytics::write_velocity_csv(&mut w, &series)?;
    w.flush()?;
    run.finish()
}

#[derive(Debug, Clone, Copy, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VariantArg {
    Local,
    Global,
}

#[derive(Debug, Args, Serialize)]
pub struct MeiklejohnArgs {
    #[command(flatten)]
    out: Out,
    #[arg(long)]
    corpus: PathBuf,
    /// Base clustering the change addresses are joined to.
    #[arg(long)]
    clusters: PathBuf,
    /// Transactions to consider; defaults to every non-coinbase transaction.
    #[arg(long)]
    unknown: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = VariantArg::Local)]
    variant: VariantArg,
}

pub fn meiklejohn(a: MeiklejohnArgs) -> Result<PathBuf> {
    let name = match a.variant {
        VariantArg::Local => "local",
        VariantArg::Global => "global",
    };
    let variant: MeiklejohnVariant = name.parse().map_err(|e: String| anyhow!(e))?;
    let mut run = Run::new(&format!("analyze-meiklejohn-{name}"), &a.out.out, &a, None)?;
    let view = corpus(&mut run, &a.corpus)?;
    let base = clusters(&mut run, &a.clusters, &view)?;
    let txs = match &a.unknown {
        Some(p) => txids(&mut run, p, &view)?,
        None => non_coinbase(&view),
    };
    let changes = run.time("predict", || analytics::meiklejohn_predict(&view, &txs, variant));
    write_changes(&mut run.create(&format!("meiklejohn_{name}_changes.jsonl"))?, &view, &changes)?;
    let clustering = run.time("cluster", || analytics::change_clustering(&view, &base, &changes));
    clustering.write_clusters(run.create(&format!("meiklejohn_{name}_clusters.jsonl"))?, &view)?;
    run.finish()
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    #[command(flatten)]
    out: Out,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    ours: PathBuf,
    #[arg(long)]
    theirs: PathBuf,
    /// Our change probabilities, as written by `predict`.
    #[arg(long)]
    ours_predictions: PathBuf,
    /// Their change outputs, one `{txid, output_index}` per line.
    #[arg(long)]
    theirs_changes: PathBuf,
    /// Transactions both were asked about; defaults to every non-coinbase transaction.
    #[arg(long)]
    unknown: Option<PathBuf>,
    /// Address pairs sampled when the corpus is too large for exact counting.
    #[arg(long, default_value_t = 1_000_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV of `date,usd_per_btc` for dollar totals.
    #[arg(long)]
    prices: Option<PathBuf>,
    #[command(flatten)]
    thresholds: ThresholdArgs,
}

pub fn compare(a: CompareArgs) -> Result<PathBuf> {
    let mut run = Run::new("analyze-compare", &a.out.out, &a, Some(a.seed))?;
    let view = corpus(&mut run, &a.corpus)?;
    let ours = clusters(&mut run, &a.ours, &view)?;
    let theirs = clusters(&mut run, &a.theirs, &view)?;
    let thresholds = a.thresholds.thresholds()?;
    let preds = PredictionSet::read(run.open(&a.ours_predictions)?, &view, thresholds)?;
    let ours_changes: Vec<(TxIdx, Option<usize>)> = preds
        .predictions()
        .iter()
        .map(|p| (p.tx, thresholds.change_of(p.probability)))
        .collect();
    let theirs_changes = read_changes(&mut run, &a.theirs_changes, &view)?;
    let considered = match &a.unknown {
        Some(p) => txids(&mut run, p, &view)?.len(),
        None => non_coinbase(&view).len(),
    };
    let prices = match &a.prices {
        Some(p) => Some(read_prices(run.open(p)?)?),
        None => None,
    };
    let table = run.time("compare", || {
        analytics::compare_clusterings(
            &view,
            &ours,
            &theirs,
            &ours_changes,
            &theirs_changes,
            considered,
            a.samples,
            a.seed,
            prices.as_ref(),
        )
    })?;
    let mut w = run.create("compare.csv")?;
    table.write_csv(&mut w)?;
    w.flush()?;
    run.finish()
}

#[derive(Debug, Args, Serialize)]
pub struct ValidateArgs {
    #[command(flatten)]
    out: Out,
    #[arg(long)]
    corpus: PathBuf,
    /// Reference change outputs, one `{txid, change_index}` per line.
    #[arg(long)]
    labels: PathBuf,
    /// Predicted change outputs, one `{txid, output_index}` per line.
    #[arg(long)]
    predictions: PathBuf,
}

pub fn validate(a: ValidateArgs) -> Result<PathBuf> {
    let mut run = Run::new("validate", &a.out.out, &a, None)?;
    let view = corpus(&mut run, &a.corpus)?;
    let gt = ground_truth(&mut run, &a.labels, &view)?;
    if gt.is_empty() {
        bail!("{}: no labels", a.labels.display());
    }
    let preds = read_changes(&mut run, &a.predictions, &view)?;
    let (mut correct, mut wrong, mut unlabelled) = (0usize, 0usize, 0usize);
    for (t, c) in &preds {
        match (gt.change_index(*t), c) {
            (Some(l), Some(c)) if l as usize == *c => correct += 1,
            (Some(_), Some(_)) => wrong += 1,
            _ => unlabelled += 1,
        }
    }
    let labelled = gt.len();
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let mut w = run.create("validation.csv")?;
    writeln!(w, "measure,value")?;
    writeln!(w, "labelled,{labelled}")?;
    writeln!(w, "predicted,{}", preds.len())?;
    writeln!(w, "correct,{correct}")?;
    writeln!(w, "wrong,{wrong}")?;
    writeln!(w, "missed,{}", labelled - correct - wrong)?;
    writeln!(w, "unlabelled_predictions,{unlabelled}")?;
    writeln!(w, "tpr,{:.6}", ratio(correct, labelled))?;
    writeln!(w, "fpr,{:.6}", ratio(wrong, labelled))?;
    writeln!(w, "precision,{:.6}", ratio(correct, correct + wrong))?;
    w.flush()?;
    run.finish()
}
