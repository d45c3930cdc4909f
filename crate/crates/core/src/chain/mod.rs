//! Transaction corpus model, on-disk format, indexes and basic predicates.

mod corpus;
pub mod fixture;
mod tags;
mod view;

pub use corpus::{parse_corpus, read_corpus_file, write_corpus, write_corpus_file};
pub use tags::{TagCategory, TagRecord, TagSet};
pub use view::{AddrId, ChainBuilder, ChainView, OutPoint, TxIdx};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Integer satoshi amount.
pub type Sat = u64;

/// Output script classes distinguished by the heuristics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ScriptType {
    P2PKH,
    P2SH,
    P2WPKH,
    P2WSH,
    Multisig,
    OpReturn,
    Other,
}

impl ScriptType {
    pub const ALL: [ScriptType; 7] = [
        ScriptType::P2PKH,
        ScriptType::P2SH,
        ScriptType::P2WPKH,
        ScriptType::P2WSH,
        ScriptType::Multisig,
        ScriptType::OpReturn,
        ScriptType::Other,
    ];

    /// Native witness program.
    pub fn is_native_segwit(self) -> bool {
        matches!(self, ScriptType::P2WPKH | ScriptType::P2WSH)
    }

    /// Script types whose spend may carry witness data (P2SH may wrap a witness program).
    pub fn permits_segwit(self) -> bool {
        matches!(self, ScriptType::P2WPKH | ScriptType::P2WSH | ScriptType::P2SH)
    }

    pub fn bit(self) -> u8 {
        1 << (self as u8)
    }

    pub fn name(self) -> &'static str {
        match self {
            ScriptType::P2PKH => "P2PKH",
            ScriptType::P2SH => "P2SH",
            ScriptType::P2WPKH => "P2WPKH",
            ScriptType::P2WSH => "P2WSH",
            ScriptType::Multisig => "Multisig",
            ScriptType::OpReturn => "OpReturn",
            ScriptType::Other => "Other",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TxOutput {
    pub value: Sat,
    pub address: String,
    pub script_type: ScriptType,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TxInput {
    pub prev_tx: String,
    pub prev_index: u32,
    pub sequence: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transaction {
    pub txid: String,
    pub block_height: u32,
    pub block_time: i64,
    pub tx_index: u32,
    pub version: i32,
    pub locktime: u32,
    pub segwit: bool,
    pub vsize: u32,
    pub coinbase: bool,
    pub inputs: Vec<TxInput>,
    pub outputs: Vec<TxOutput>,
}

impl Transaction {
    /// Corpus order key.
    pub fn order_key(&self) -> (u32, u32) {
        (self.block_height, self.tx_index)
    }

    pub fn total_output_value(&self) -> Sat {
        self.outputs.iter().map(|o| o.value).sum()
    }

    pub fn has_op_return(&self) -> bool {
        self.outputs
            .iter()
            .any(|o| o.script_type == ScriptType::OpReturn)
    }
}

/// Block heights at which protocol features became available.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Activation {
    pub segwit: u32,
    pub rbf: u32,
    pub version2: u32,
}

/// First line of a corpus file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusHeader {
    pub format_version: u32,
    pub activation: Activation,
}

impl Default for CorpusHeader {
    fn default() -> Self {
        CorpusHeader {
            format_version: CORPUS_FORMAT_VERSION,
            activation: Activation::default(),
        }
    }
}

pub const CORPUS_FORMAT_VERSION: u32 = 1;

/// Equal-output CoinJoin detector parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoinJoinRule {
    /// Minimum number of inputs and of outputs.
    pub min_inputs_outputs: usize,
    /// Minimum multiplicity of the most frequent output value.
    pub min_equal_outputs: usize,
}

impl Default for CoinJoinRule {
    fn default() -> Self {
        CoinJoinRule {
            min_inputs_outputs: 5,
            min_equal_outputs: 3,
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ChainError {
    #[error("line {line}: malformed record: {msg}")]
    Malformed { line: usize, msg: String },
    #[error("line {line}: duplicate txid {txid}")]
    DuplicateTxid { line: usize, txid: String },
    #[error("line {line}: unknown outpoint {txid}:{index}")]
    UnknownOutpoint {
        line: usize,
        txid: String,
        index: u32,
    },
    #[error("line {line}: outpoint {txid}:{index} already spent")]
    DoubleSpend {
        line: usize,
        txid: String,
        index: u32,
    },
    #[error("line {line}: record out of order (block_height, tx_index) must strictly increase")]
    OutOfOrder { line: usize },
    #[error("line {line}: transaction {txid} spends more than its inputs")]
    ValueNotConserved { line: usize, txid: String },
    #[error("unsupported corpus format version {0}")]
    UnsupportedVersion(u32),
    #[error("transaction {0} is coinbase")]
    Coinbase(String),
    #[error("transaction {txid}: input {index} cannot be resolved")]
    Unresolvable { txid: String, index: usize },
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for ChainError {
    fn from(e: std::io::Error) -> Self {
        ChainError::Io(e.to_string())
    }
}

/// Fee paid by `tx`, resolving its inputs through `view`.
pub fn fee(tx: &Transaction, view: &ChainView) -> Result<Sat, ChainError> {
    if tx.coinbase {
        return Err(ChainError::Coinbase(tx.txid.clone()));
    }
    let mut input_total: Sat = 0;
    for (index, input) in tx.inputs.iter().enumerate() {
        let value = view
            .lookup(&input.prev_tx)
            .and_then(|prev| view.tx(prev).outputs.get(input.prev_index as usize))
            .map(|o| o.value)
            .ok_or_else(|| ChainError::Unresolvable {
                txid: tx.txid.clone(),
                index,
            })?;
        input_total += value;
    }
    let output_total = tx.total_output_value();
    input_total
        .checked_sub(output_total)
        .ok_or_else(|| ChainError::ValueNotConserved {
            line: 0,
            txid: tx.txid.clone(),
        })
}

/// BIP-125 opt-in: some input sequence below 0xFFFFFFFE.
pub fn is_rbf(tx: &Transaction) -> bool {
    tx.inputs.iter().any(|i| i.sequence < 0xFFFF_FFFE)
}

pub fn is_coinjoin(tx: &Transaction, rule: &CoinJoinRule) -> bool {
    if tx.inputs.len() < rule.min_inputs_outputs || tx.outputs.len() < rule.min_inputs_outputs {
        return false;
    }
    let mut values: Vec<Sat> = tx.outputs.iter().map(|o| o.value).collect();
    values.sort_unstable();
    let mut best = 0;
    let mut run = 0;
    for (i, v) in values.iter().enumerate() {
        run = if i > 0 && values[i - 1] == *v { run + 1 } else { 1 };
        best = best.max(run);
    }
    best >= rule.min_equal_outputs
}

/// Exactly two spendable outputs, not coinbase, not CoinJoin.
pub fn is_standard(tx: &Transaction, rule: &CoinJoinRule) -> bool {
    tx.outputs.len() == 2
        && !tx.has_op_return()
        && !tx.coinbase
        && !is_coinjoin(tx, rule)
}
