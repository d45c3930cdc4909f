//! End-to-end runs over a corpus: training both forest variants and the full
//! synthetic pipeline writing every artifact to a directory.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use thiserror::Error;

use crate::analytics::{self, AnalyticsError, FlowTable, DAY};
use crate::chain::{ChainError, ChainView, TagCategory, TagSet};
use crate::cluster::{multi_input_clustering, ClusterAssignment, ClusterError};
use crate::combiner::{roc_threshold_vote, CombinerError};
use crate::enhance::{constrained_enhance, naive_enhance, predict_all, EnhanceError, MergeStats, Thresholds};
use crate::forest::{
    grouped_split, halving_search, labelled_rows, FeatureRow, ForestError, ForestModel, ForestParams, Matrix,
    SearchRound, Variant, DEFAULT_GRID,
};
use crate::ground_truth::{extract_ground_truth, GroundTruthConfig, GroundTruthError, GroundTruthSet};
use crate::heuristics::{build_vote_table, evaluate_heuristics, write_scores_csv, HeuristicError, HeuristicKind, VoteTable};
use crate::roc::{roc_auc, RocCurve, RocError};
use crate::synth::{generate, SynthConfig, SynthError};
use crate::Scalar;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Chain(#[from] ChainError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error(transparent)]
    GroundTruth(#[from] GroundTruthError),
    #[error(transparent)]
    Heuristic(#[from] HeuristicError),
    #[error(transparent)]
    Combiner(#[from] CombinerError),
    #[error(transparent)]
    Roc(#[from] RocError),
    #[error(transparent)]
    Forest(#[from] ForestError),
    #[error(transparent)]
    Enhance(#[from] EnhanceError),
    #[error(transparent)]
    Analytics(#[from] AnalyticsError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct TrainSettings {
    pub test_fraction: f64,
    pub seed: u64,
    pub n_trees: usize,
    /// Run the successive-halving search instead of the default parameters.
    pub search: bool,
    pub folds: usize,
}

impl Default for TrainSettings {
    fn default() -> Self {
        TrainSettings {
            test_fraction: 0.2,
            seed: 0,
            n_trees: 100,
            search: false,
            folds: 4,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<T> {
    pub full: ForestModel<T>,
    pub reduced: ForestModel<T>,
    pub rows: Vec<FeatureRow>,
    pub train: Vec<usize>,
    pub test: Vec<usize>,
    /// Forest and vote-margin curves on the test rows.
    pub full_roc: RocCurve<T>,
    pub reduced_roc: RocCurve<T>,
    pub vote_roc: RocCurve<T>,
    pub search: Vec<(Variant, Vec<SearchRound>)>,
}

fn select(rows: &[FeatureRow], ix: &[usize]) -> Vec<FeatureRow> {
    ix.iter().map(|&i| rows[i].clone()).collect()
}

/// Group-aware split of the labelled rows, then one model per variant.
pub fn train_models<T: Scalar>(
    view: &ChainView,
    base: &ClusterAssignment,
    gt: &GroundTruthSet,
    table: &VoteTable,
    settings: &TrainSettings,
) -> Result<TrainOutcome<T>, PipelineError> {
    let rows = labelled_rows(view, base, gt, table);
    if rows.is_empty() {
        return Err(PipelineError::Invalid("no ground-truth transaction has a vote".into()));
    }
    let groups: Vec<u32> = rows.iter().map(|r| r.group.0).collect();
    let (train, test) = grouped_split(&groups, settings.test_fraction, settings.seed)?;
    let train_rows = select(&rows, &train);
    let test_rows = select(&rows, &test);
    let ytr: Vec<bool> = train_rows.iter().map(|r| r.label).collect();
    let yte: Vec<bool> = test_rows.iter().map(|r| r.label).collect();
    let train_groups: Vec<u32> = train_rows.iter().map(|r| r.group.0).collect();
    let mut search = Vec::new();
    let mut fit = |variant: Variant| -> Result<(ForestModel<T>, RocCurve<T>), PipelineError> {
        let x = Matrix::<T>::from_rows(&train_rows, variant);
        let mut params = ForestParams {
            n_trees: settings.n_trees,
            ..ForestParams::for_variant(variant, settings.seed)
        };
        if settings.search {
            let (best, log) = halving_search(&x, &ytr, &train_groups, &DEFAULT_GRID, params, variant, settings.folds)?;
            params = best;
            search.push((variant, log));
        }
        let model = ForestModel::fit(&x, &ytr, params, variant)?;
        let roc = model.roc(&Matrix::from_rows(&test_rows, variant), &yte)?;
        Ok((model, roc))
    };
    let (full, full_roc) = fit(Variant::Full)?;
    let (reduced, reduced_roc) = fit(Variant::NoFingerprint)?;
    let margins: Vec<T> = test_rows.iter().map(|r| T::from_i32(r.margin).expect("small")).collect();
    let vote_roc = roc_auc(&margins, &yte)?;
    Ok(TrainOutcome {
        full,
        reduced,
        rows,
        train,
        test,
        full_roc,
        reduced_roc,
        vote_roc,
        search,
    })
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub synth: SynthConfig,
    pub seed: u64,
    pub ground_truth: GroundTruthConfig,
    pub train: TrainSettings,
    pub thresholds: Thresholds,
}

impl PipelineConfig {
    pub fn new(synth: SynthConfig, seed: u64) -> Self {
        PipelineConfig {
            synth,
            seed,
            ground_truth: GroundTruthConfig::default(),
            train: TrainSettings {
                seed,
                ..Default::default()
            },
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PipelineSummary {
    pub transactions: usize,
    pub addresses: usize,
    pub base_clusters: usize,
    pub ground_truth: usize,
    pub vote_auc: f64,
    pub test_vote_auc: f64,
    pub forest_auc: f64,
    pub reduced_forest_auc: f64,
    pub predictions: usize,
    pub naive: MergeStats,
    pub constrained: MergeStats,
    pub naive_clusters: usize,
    pub constrained_clusters: usize,
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, std::io::Error> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), PipelineError> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(std::io::Error::from)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Generates a corpus and runs every stage on it, writing all artifacts to `dir`.
pub fn run_pipeline(config: &PipelineConfig, dir: &Path) -> Result<PipelineSummary, PipelineError> {
    std::fs::create_dir_all(dir)?;
    let corpus = generate(&config.synth, config.seed)?;
    corpus.write_dir(dir)?;
    let view = corpus.view()?;
    let rule = config.ground_truth.coinjoin;
    let base = multi_input_clustering(&view, &rule);
    base.write_clusters(create(dir, "clusters.jsonl")?, &view)?;

    let gt = extract_ground_truth(&view, &base, &corpus.tags, &config.ground_truth);
    gt.ground_truth.write(create(dir, "ground_truth.jsonl")?, &view)?;
    write_json(dir, "ground_truth_report.json", &gt.summary(&config.ground_truth))?;

    let scores = evaluate_heuristics(&gt.ground_truth, &HeuristicKind::ALL, &view, &gt.unknown_change, &rule)?;
    write_scores_csv(create(dir, "heuristics.csv")?, &scores)?;
    let table = build_vote_table(&gt.ground_truth.txs(), &HeuristicKind::ALL, &view, &rule);
    let vote_roc: RocCurve<f64> = roc_threshold_vote(&gt.ground_truth, &table)?;
    vote_roc.write_csv(create(dir, "vote_roc.csv")?)?;

    let trained: TrainOutcome<f64> = train_models(&view, &base, &gt.ground_truth, &table, &config.train)?;
    trained.full.write(create(dir, "model_full.ckrf")?)?;
    trained.reduced.write(create(dir, "model_reduced.ckrf")?)?;
    trained.full_roc.write_csv(create(dir, "forest_roc_full.csv")?)?;
    trained.reduced_roc.write_csv(create(dir, "forest_roc_reduced.csv")?)?;
    trained.vote_roc.write_csv(create(dir, "vote_roc_test.csv")?)?;

    let predictions = predict_all(
        &view,
        &base,
        &rule,
        &trained.full,
        &trained.reduced,
        &gt.unknown_change,
        config.thresholds,
    )?;
    predictions.write(create(dir, "predictions.jsonl")?, &view)?;

    let naive = naive_enhance(&view, &base, &predictions);
    let (constrained, _) = constrained_enhance(&view, &base, &predictions);
    for (name, out) in [("naive", &naive), ("constrained", &constrained)] {
        out.assignment
            .write_clusters(create(dir, &format!("{name}_clusters.jsonl"))?, &view)?;
        out.report.write_text(create(dir, &format!("{name}_collapse.txt"))?)?;
        out.report
            .write_clusters_csv(create(dir, &format!("{name}_collapse_clusters.csv"))?)?;
        out.report
            .write_histogram_csv(create(dir, &format!("{name}_collapse_histogram.csv"))?)?;
    }

    let series = analytics::velocity(&view, &constrained.assignment, DAY)?;
    analytics::write_velocity_csv(create(dir, "velocity.csv")?, &series)?;
    if has_flow_tags(&corpus.tags) {
        let before = analytics::flows(&view, &base, &corpus.tags, TagCategory::Darknet, TagCategory::Exchange)?;
        let after =
            analytics::flows(&view, &constrained.assignment, &corpus.tags, TagCategory::Darknet, TagCategory::Exchange)?;
        FlowTable::compare(&before, &after).write_csv(create(dir, "flows.csv")?)?;
    }

    let summary = PipelineSummary {
        transactions: view.len(),
        addresses: view.address_count(),
        base_clusters: base.cluster_count(),
        ground_truth: gt.ground_truth.len(),
        vote_auc: vote_roc.auc,
        test_vote_auc: trained.vote_roc.auc,
        forest_auc: trained.full_roc.auc,
        reduced_forest_auc: trained.reduced_roc.auc,
        predictions: predictions.len(),
        naive: naive.stats,
        constrained: constrained.stats,
        naive_clusters: naive.assignment.cluster_count(),
        constrained_clusters: constrained.assignment.cluster_count(),
    };
    write_json(dir, "summary.json", &summary)?;
    Ok(summary)
}

fn has_flow_tags(tags: &TagSet) -> bool {
    tags.has_category(TagCategory::Darknet) && tags.has_category(TagCategory::Exchange)
}
