//! Synthetic corpora with known change outputs and address owners.

mod config;
mod labels;
mod sim;

pub use config::{
    CategoryChoice, EntityGroup, EntityKind, FeeMode, FingerprintSpec, SynthConfig, WalletFingerprint,
};
pub use labels::{read_ledger, write_ledger, EntityInfo, IndexedLabels, Payment, SimLabels};
pub use sim::generate;

use std::path::Path;

use thiserror::Error;

use crate::chain::{write_corpus, ChainError, ChainView, CorpusHeader, TagSet, Transaction};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid config: {0}")]
    Config(String),
    #[error("infeasible config: {0}")]
    Infeasible(String),
    #[error("{0}")]
    Format(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for SynthError {
    fn from(e: std::io::Error) -> Self {
        SynthError::Io(e.to_string())
    }
}

impl From<ChainError> for SynthError {
    fn from(e: ChainError) -> Self {
        SynthError::Format(e.to_string())
    }
}

/// Everything one generator run produces.
#[derive(Debug, Clone)]
pub struct SynthCorpus {
    pub header: CorpusHeader,
    pub transactions: Vec<Transaction>,
    pub labels: SimLabels,
    pub tags: TagSet,
    pub ledger: Vec<Payment>,
}

impl SynthCorpus {
    pub fn view(&self) -> Result<ChainView, ChainError> {
        ChainView::from_transactions(self.header, self.transactions.clone())
    }

    /// Writes `corpus.jsonl`, `labels.jsonl`, `tags.jsonl` and `ledger.csv` into `dir`.
    pub fn write_dir(&self, dir: &Path) -> Result<(), SynthError> {
        use std::fs::File;
        use std::io::BufWriter;
        std::fs::create_dir_all(dir)?;
        write_corpus(BufWriter::new(File::create(dir.join("corpus.jsonl"))?), &self.header, &self.transactions)?;
        self.labels.write(BufWriter::new(File::create(dir.join("labels.jsonl"))?))?;
        self.tags.write(BufWriter::new(File::create(dir.join("tags.jsonl"))?))?;
        write_ledger(BufWriter::new(File::create(dir.join("ledger.csv"))?), &self.ledger)?;
        Ok(())
    }
}
