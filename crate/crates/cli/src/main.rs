mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "changekit", version, about = "Change detection and constrained address clustering", arg_required_else_help = true)]
struct Cli {
    /// Worker threads; 0 uses every available core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct CoinJoinArgs {
    /// CoinJoin detector: minimum inputs and outputs.
    #[arg(long, default_value_t = 5)]
    coinjoin_min_io: usize,
    /// CoinJoin detector: minimum count of equal-value outputs.
    #[arg(long, default_value_t = 3)]
    coinjoin_min_equal: usize,
}

#[derive(Debug, Clone, Copy, Args, Serialize)]
pub struct ThresholdArgs {
    /// Change probability an output must exceed.
    #[arg(long, default_value_t = 0.99)]
    p_change: f64,
    /// Probability at or below which an output counts as a spend.
    #[arg(long, default_value_t = 0.01)]
    p_spend: f64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic corpus with labels, tags and payment ledger.
    Generate(commands::GenerateArgs),
    /// Multi-input clustering of a corpus.
    ClusterBase(commands::ClusterBaseArgs),
    /// Extract ground-truth change from a corpus and its base clusters.
    ExtractGt(commands::ExtractGtArgs),
    /// Score each heuristic against ground truth.
    EvalHeuristics(commands::EvalArgs),
    /// Build the vote table and the threshold-vote ROC.
    VoteRoc(commands::VoteRocArgs),
    /// Train both forest variants.
    Train(commands::TrainArgs),
    /// Predict change probabilities for transactions with unknown change.
    Predict(commands::PredictArgs),
    /// Merge change outputs into the base clustering.
    #[command(group(ArgGroup::new("mode").required(true).args(["naive", "constrained"])))]
    Enhance(commands::EnhanceArgs),
    /// Analyses over clusterings.
    #[command(subcommand)]
    Analyze(Analyze),
    /// Score an external change-prediction file against ground truth.
    Validate(commands::ValidateArgs),
}

#[derive(Debug, Subcommand)]
enum Analyze {
    /// Value sent from one tag category to another, per source entity.
    Flows(commands::FlowsArgs),
    /// Value moved per time bucket, excluding self-transfers.
    Velocity(commands::VelocityArgs),
    /// Fresh-address change prediction and the clustering it induces.
    Meiklejohn(commands::MeiklejohnArgs),
    /// Compare two clusterings and the change predictions behind them.
    Compare(commands::CompareArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Out {
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::ClusterBase(a) => commands::cluster_base(a),
        Command::ExtractGt(a) => commands::extract_gt(a),
        Command::EvalHeuristics(a) => commands::eval_heuristics(a),
        Command::VoteRoc(a) => commands::vote_roc(a),
        Command::Train(a) => commands::train(a),
        Command::Predict(a) => commands::predict(a),
        Command::Enhance(a) => commands::enhance(a),
        Command::Analyze(Analyze::Flows(a)) => commands::flows(a),
        Command::Analyze(Analyze::Velocity(a)) => commands::velocity(a),
        Command::Analyze(Analyze::Meiklejohn(a)) => commands::meiklejohn(a),
        Command::Analyze(Analyze::Compare(a)) => commands::compare(a),
        Command::Validate(a) => commands::validate(a),
    };
    match result {
        Ok(manifest) => {
            println!("{}", manifest.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
