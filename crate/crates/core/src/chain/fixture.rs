//! Small hand-built corpora.

use super::{ChainView, CorpusHeader, Sat, ScriptType, Transaction, TxInput, TxOutput};

/// Builds a corpus one transaction at a time; outpoints are referenced by
/// `(position, output index)` of earlier transactions.
#[derive(Debug, Clone, Default)]
pub struct Fixture {
    header: CorpusHeader,
    txs: Vec<Transaction>,
    same_block: bool,
}

impl Fixture {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_header(header: CorpusHeader) -> Self {
        Fixture {
            header,
            ..Self::default()
        }
    }

    /// Place the next transaction in the same block as the previous one.
    pub fn same_block(&mut self) -> &mut Self {
        self.same_block = true;
        self
    }

    fn push(&mut self, inputs: Vec<TxInput>, outputs: Vec<TxOutput>) -> usize {
        let (height, index) = match self.txs.last() {
            None => (0, 0),
            Some(last) if self.same_block => (last.block_height, last.tx_index + 1),
            Some(last) => (last.block_height + 1, 0),
        };
        self.same_block = false;
        let pos = self.txs.len();
        let coinbase = inputs.is_empty();
        let vsize = 10 + 148 * inputs.len() as u32 + 34 * outputs.len() as u32;
        self.txs.push(Transaction {
            txid: format!("{pos:064x}"),
            block_height: height,
            block_time: 1_500_000_000 + height as i64 * 600,
            tx_index: index,
            version: 1,
            locktime: 0,
            segwit: false,
            vsize,
            coinbase,
            inputs,
            outputs,
        });
        pos
    }

    pub fn coinbase(&mut self, outputs: &[(&str, Sat)]) -> usize {
        let outs = outputs
            .iter()
            .map(|(a, v)| (*a, *v, ScriptType::P2PKH))
            .collect::<Vec<_>>();
        self.coinbase_typed(&outs)
    }

    pub fn coinbase_typed(&mut self, outputs: &[(&str, Sat, ScriptType)]) -> usize {
        self.push(Vec::new(), make_outputs(outputs))
    }

    pub fn spend(&mut self, inputs: &[(usize, u32)], outputs: &[(&str, Sat)]) -> usize {
        let outs = outputs
            .iter()
            .map(|(a, v)| (*a, *v, ScriptType::P2PKH))
            .collect::<Vec<_>>();
        self.spend_typed(inputs, &outs)
    }

    pub fn spend_typed(
        &mut self,
        inputs: &[(usize, u32)],
        outputs: &[(&str, Sat, ScriptType)],
    ) -> usize {
        let ins = inputs
            .iter()
            .map(|(pos, index)| TxInput {
                prev_tx: self.txs[*pos].txid.clone(),
                prev_index: *index,
                sequence: 0xFFFF_FFFF,
            })
            .collect();
        self.push(ins, make_outputs(outputs))
    }

    pub fn tx_mut(&mut self, pos: usize) -> &mut Transaction {
        &mut self.txs[pos]
    }

    pub fn txid(&self, pos: usize) -> &str {
        &self.txs[pos].txid
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.txs
    }

    /// Index the corpus; panics on an inconsistent fixture.
    pub fn view(&self) -> ChainView {
        ChainView::from_transactions(self.header, self.txs.clone()).expect("valid fixture")
    }
}

fn make_outputs(outputs: &[(&str, Sat, ScriptType)]) -> Vec<TxOutput> {
    outputs
        .iter()
        .map(|(a, v, s)| TxOutput {
            value: *v,
            address: a.to_string(),
            script_type: *s,
        })
        .collect()
}
