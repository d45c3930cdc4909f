use crate::chain::{AddrId, ChainView, TxIdx};
use crate::cluster::ClusterAssignment;
use crate::ground_truth::GroundTruthSet;
use crate::heuristics::{TxVotes, VoteTable, Votes, KIND_COUNT};
use crate::Scalar;

/// Blocks per epoch feature bucket (about one week).
pub const EPOCH_BLOCKS: u32 = 1008;

/// Number of universal heuristics; they occupy the first vote columns.
pub const UNIVERSAL_COUNT: usize = 9;

const NUMERIC_NAMES: [&str; 9] = [
    "out_index",
    "value_ratio",
    "total_value",
    "fee_per_byte",
    "version",
    "segwit",
    "locktime_nonzero",
    "input_count",
    "epoch",
];

/// Which vote columns a model sees.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Full,
    /// Universal heuristics only; usable when outputs are unspent.
    NoFingerprint,
}

impl Variant {
    pub fn vote_columns(self) -> usize {
        match self {
            Variant::Full => KIND_COUNT,
            Variant::NoFingerprint => UNIVERSAL_COUNT,
        }
    }

    pub fn feature_count(self) -> usize {
        self.vote_columns() + NUMERIC_NAMES.len()
    }

    pub fn feature_names(self) -> Vec<String> {
        let mut names: Vec<String> = crate::heuristics::HeuristicKind::ALL[..self.vote_columns()]
            .iter()
            .map(|k| format!("vote_{k}"))
            .collect();
        names.extend(NUMERIC_NAMES.iter().map(|s| s.to_string()));
        names
    }

    pub fn code(self) -> u8 {
        match self {
            Variant::Full => 0,
            Variant::NoFingerprint => 1,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(Variant::Full),
            1 => Some(Variant::NoFingerprint),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Full => "full",
            Variant::NoFingerprint => "no_fingerprint",
        }
    }
}

/// One output of a standard transaction.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub tx: TxIdx,
    pub output_index: u8,
    /// True for the change output; false when unknown.
    pub label: bool,
    /// Base cluster of the transaction's inputs.
    pub group: AddrId,
    pub votes: Votes,
    /// Vote margin of this output over the other one.
    pub margin: i32,
    pub value_ratio: f64,
    pub total_value: u64,
    pub fee_per_byte: f64,
    pub version: i32,
    pub segwit: bool,
    pub locktime_nonzero: bool,
    pub input_count: u32,
    pub epoch: u32,
}

impl FeatureRow {
    /// Feature vector in the variant's column order.
    pub fn features<T: Scalar>(&self, variant: Variant) -> Vec<T> {
        let mut f: Vec<T> = Vec::with_capacity(variant.feature_count());
        f.extend(
            self.votes[..variant.vote_columns()]
                .iter()
                .map(|v| T::from_i8(*v).expect("small")),
        );
        let numeric = [
            self.output_index as f64,
            self.value_ratio,
            self.total_value as f64,
            self.fee_per_byte,
            self.version as f64,
            self.segwit as u8 as f64,
            self.locktime_nonzero as u8 as f64,
            self.input_count as f64,
            self.epoch as f64,
        ];
        f.extend(numeric.iter().map(|x| T::of(*x)));
        f
    }
}

/// Both output rows of `votes.tx`; `change` labels one of them.
pub fn feature_rows_for(
    view: &ChainView,
    base: &ClusterAssignment,
    votes: &TxVotes,
    change: Option<u8>,
) -> [FeatureRow; 2] {
    let t = votes.tx;
    let tx = view.tx(t);
    let total: u64 = tx.outputs.iter().map(|o| o.value).sum();
    let group = base.input_root(view, t).expect("standard transactions have inputs");
    let fee_per_byte = view.fee_of(t) as f64 / tx.vsize as f64;
    let row = |i: usize| FeatureRow {
        tx: t,
        output_index: i as u8,
        label: change == Some(i as u8),
        group,
        votes: votes.outputs[i],
        margin: votes.margin(i),
        value_ratio: if total == 0 {
            0.5
        } else {
            tx.outputs[i].value as f64 / total as f64
        },
        total_value: total,
        fee_per_byte,
        version: tx.version,
        segwit: tx.segwit,
        locktime_nonzero: tx.locktime > 0,
        input_count: tx.inputs.len() as u32,
        epoch: tx.block_height / EPOCH_BLOCKS,
    };
    [row(0), row(1)]
}

/// Two rows per ground-truth transaction that received at least one vote.
pub fn labelled_rows(
    view: &ChainView,
    base: &ClusterAssignment,
    gt: &GroundTruthSet,
    table: &VoteTable,
) -> Vec<FeatureRow> {
    let mut rows = Vec::with_capacity(gt.len() * 2);
    for e in gt.entries() {
        let Some(v) = table.get(e.tx) else { continue };
        if v.has_votes() {
            rows.extend(feature_rows_for(view, base, v, Some(e.change_index)));
        }
    }
    rows
}

/// Row-major feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn from_rows(rows: &[FeatureRow], variant: Variant) -> Self {
        let cols = variant.feature_count();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            data.extend(r.features::<T>(variant));
        }
        Matrix { cols, data }
    }

    pub fn from_vecs(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        assert!(rows.iter().all(|r| r.len() == cols), "ragged rows");
        Matrix {
            cols,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        if self.cols == 0 {
            0
        } else {
            self.data.len() / self.cols
        }
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }
}
