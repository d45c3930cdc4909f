use std::collections::HashMap;

use super::{ChainError, CorpusHeader, Sat, ScriptType, Transaction};

/// Position of a transaction in corpus order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TxIdx(pub u32);

/// Dense address id, assigned in order of first appearance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct AddrId(pub u32);

impl TxIdx {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl AddrId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OutPoint {
    pub tx: TxIdx,
    pub index: u32,
}

const UNSPENT: u32 = u32::MAX;

/// Indexed, immutable corpus.
#[derive(Debug, Clone, Default)]
pub struct ChainView {
    header: CorpusHeader,
    txs: Vec<Transaction>,
    by_txid: HashMap<String, TxIdx>,
    addresses: Vec<String>,
    addr_ids: HashMap<String, AddrId>,
    first_seen: Vec<TxIdx>,
    output_occurrences: Vec<u32>,
    out_offsets: Vec<u32>,
    out_addr: Vec<AddrId>,
    spent_by: Vec<u32>,
    in_offsets: Vec<u32>,
    in_prev: Vec<OutPoint>,
    in_addr: Vec<AddrId>,
    fees: Vec<Sat>,
}

/// Streaming constructor for [`ChainView`]; records must arrive in corpus order.
#[derive(Debug, Default)]
pub struct ChainBuilder {
    view: ChainView,
    last_key: Option<(u32, u32)>,
}

impl ChainBuilder {
    pub fn new(header: CorpusHeader) -> Self {
        let mut view = ChainView {
            header,
            ..ChainView::default()
        };
        view.out_offsets.push(0);
        view.in_offsets.push(0);
        ChainBuilder {
            view,
            last_key: None,
        }
    }

    pub fn len(&self) -> usize {
        self.view.txs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.view.txs.is_empty()
    }

    /// Append one record; `line` is only used for error reporting.
    pub fn push(&mut self, tx: Transaction, line: usize) -> Result<TxIdx, ChainError> {
        let malformed = |msg: &str| ChainError::Malformed {
            line,
            msg: msg.to_string(),
        };
        if tx.outputs.is_empty() {
            return Err(malformed("transaction has no outputs"));
        }
        if tx.vsize == 0 {
            return Err(malformed("vsize must be positive"));
        }
        if tx.coinbase && !tx.inputs.is_empty() {
            return Err(malformed("coinbase transaction must not list inputs"));
        }
        if !tx.coinbase && tx.inputs.is_empty() {
            return Err(malformed("non-coinbase transaction without inputs"));
        }
        let key = tx.order_key();
        if let Some(last) = self.last_key {
            if key <= last {
                return Err(ChainError::OutOfOrder { line });
            }
        }
        if self.view.by_txid.contains_key(&tx.txid) {
            return Err(ChainError::DuplicateTxid {
                line,
                txid: tx.txid.clone(),
            });
        }

        let idx = TxIdx(self.view.txs.len() as u32);
        let v = &mut self.view;

        // Resolve inputs before mutating anything.
        let mut prevs = Vec::with_capacity(tx.inputs.len());
        let mut input_total: Sat = 0;
        for input in &tx.inputs {
            let unknown = || ChainError::UnknownOutpoint {
                line,
                txid: input.prev_tx.clone(),
                index: input.prev_index,
            };
            let prev = *v.by_txid.get(&input.prev_tx).ok_or_else(unknown)?;
            let prev_tx = &v.txs[prev.index()];
            let out = prev_tx
                .outputs
                .get(input.prev_index as usize)
                .ok_or_else(unknown)?;
            let slot = v.out_offsets[prev.index()] as usize + input.prev_index as usize;
            if v.spent_by[slot] != UNSPENT || prevs.iter().any(|(s, _, _)| *s == slot) {
                return Err(ChainError::DoubleSpend {
                    line,
                    txid: input.prev_tx.clone(),
                    index: input.prev_index,
                });
            }
            input_total += out.value;
            prevs.push((slot, OutPoint { tx: prev, index: input.prev_index }, v.out_addr[slot]));
        }
        let output_total = tx.total_output_value();
        let fee = if tx.coinbase {
            0
        } else {
            input_total
                .checked_sub(output_total)
                .ok_or_else(|| ChainError::ValueNotConserved {
                    line,
                    txid: tx.txid.clone(),
                })?
        };

        for (slot, outpoint, addr) in prevs {
            v.spent_by[slot] = idx.0;
            v.in_prev.push(outpoint);
            v.in_addr.push(addr);
        }
        v.in_offsets.push(v.in_prev.len() as u32);

        for out in &tx.outputs {
            let id = match v.addr_ids.get(&out.address) {
                Some(id) => *id,
                None => {
                    let id = AddrId(v.addresses.len() as u32);
                    v.addresses.push(out.address.clone());
                    v.addr_ids.insert(out.address.clone(), id);
                    v.first_seen.push(idx);
                    v.output_occurrences.push(0);
                    id
                }
            };
            v.output_occurrences[id.index()] += 1;
            v.out_addr.push(id);
            v.spent_by.push(UNSPENT);
        }
        v.out_offsets.push(v.out_addr.len() as u32);
        v.fees.push(fee);
        v.by_txid.insert(tx.txid.clone(), idx);
        v.txs.push(tx);
        self.last_key = Some(key);
        Ok(idx)
    }

    pub fn finish(self) -> ChainView {
        self.view
    }
}

impl ChainView {
    /// Build from records already in memory (line numbers count the header as line 1).
    pub fn from_transactions(
        header: CorpusHeader,
        txs: impl IntoIterator<Item = Transaction>,
    ) -> Result<ChainView, ChainError> {
        let mut builder = ChainBuilder::new(header);
        for (i, tx) in txs.into_iter().enumerate() {
            builder.push(tx, i + 2)?;
        }
        Ok(builder.finish())
    }

    pub fn header(&self) -> &CorpusHeader {
        &self.header
    }

    pub fn len(&self) -> usize {
        self.txs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.txs.is_empty()
    }

    pub fn transactions(&self) -> &[Transaction] {
        &self.txs
    }

    pub fn tx(&self, idx: TxIdx) -> &Transaction {
        &self.txs[idx.index()]
    }

    pub fn tx_indices(&self) -> impl Iterator<Item = TxIdx> + '_ {
        (0..self.txs.len() as u32).map(TxIdx)
    }

    pub fn lookup(&self, txid: &str) -> Option<TxIdx> {
        self.by_txid.get(txid).copied()
    }

    pub fn address_count(&self) -> usize {
        self.addresses.len()
    }

    pub fn address(&self, id: AddrId) -> &str {
        &self.addresses[id.index()]
    }

    pub fn address_id(&self, address: &str) -> Option<AddrId> {
        self.addr_ids.get(address).copied()
    }

    /// Transaction in which the address first received an output.
    pub fn first_seen(&self, id: AddrId) -> TxIdx {
        self.first_seen[id.index()]
    }

    /// `(block_height, tx_index)` of first appearance.
    pub fn first_seen_key(&self, id: AddrId) -> (u32, u32) {
        self.tx(self.first_seen(id)).order_key()
    }

    /// Number of outputs, over the whole corpus, paying this address.
    pub fn output_occurrences(&self, id: AddrId) -> u32 {
        self.output_occurrences[id.index()]
    }

    pub fn output_addresses(&self, idx: TxIdx) -> &[AddrId] {
        let i = idx.index();
        &self.out_addr[self.out_offsets[i] as usize..self.out_offsets[i + 1] as usize]
    }

    pub fn input_addresses(&self, idx: TxIdx) -> &[AddrId] {
        let i = idx.index();
        &self.in_addr[self.in_offsets[i] as usize..self.in_offsets[i + 1] as usize]
    }

    pub fn input_outpoints(&self, idx: TxIdx) -> &[OutPoint] {
        let i = idx.index();
        &self.in_prev[self.in_offsets[i] as usize..self.in_offsets[i + 1] as usize]
    }

    pub fn prev_output(&self, outpoint: OutPoint) -> &super::TxOutput {
        &self.tx(outpoint.tx).outputs[outpoint.index as usize]
    }

    pub fn input_values(&self, idx: TxIdx) -> impl Iterator<Item = Sat> + '_ {
        self.input_outpoints(idx)
            .iter()
            .map(|op| self.prev_output(*op).value)
    }

    pub fn input_script_types(&self, idx: TxIdx) -> impl Iterator<Item = ScriptType> + '_ {
        self.input_outpoints(idx)
            .iter()
            .map(|op| self.prev_output(*op).script_type)
    }

    /// Transaction spending output `index` of `idx`, if any.
    pub fn spent_by(&self, idx: TxIdx, index: usize) -> Option<TxIdx> {
        let slot = self.out_offsets[idx.index()] as usize + index;
        match self.spent_by.get(slot) {
            Some(&s) if s != UNSPENT && slot < self.out_offsets[idx.index() + 1] as usize => {
                Some(TxIdx(s))
            }
            _ => None,
        }
    }

    pub fn all_outputs_spent(&self, idx: TxIdx) -> bool {
        (0..self.tx(idx).outputs.len()).all(|i| self.spent_by(idx, i).is_some())
    }

    /// Fee of a transaction in the corpus (0 for coinbase).
    pub fn fee_of(&self, idx: TxIdx) -> Sat {
        self.fees[idx.index()]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{TxInput, TxOutput};

    fn out(value: Sat, address: &str) -> TxOutput {
        TxOutput {
            value,
            address: address.into(),
            script_type: ScriptType::P2PKH,
        }
    }

    fn tx(txid: &str, height: u32, inputs: &[(&str, u32)], outputs: Vec<TxOutput>) -> Transaction {
        Transaction {
            txid: txid.into(),
            block_height: height,
            block_time: height as i64 * 600,
            tx_index: 0,
            version: 1,
            locktime: 0,
            segwit: false,
            vsize: 200,
            coinbase: inputs.is_empty(),
            inputs: inputs
                .iter()
                .map(|(p, i)| TxInput {
                    prev_tx: p.to_string(),
                    prev_index: *i,
                    sequence: 0xFFFF_FFFF,
                })
                .collect(),
            outputs,
        }
    }

    fn abc() -> Vec<Transaction> {
        vec![
            tx("A", 1, &[], vec![out(1000, "x")]),
            tx("B", 2, &[("A", 0)], vec![out(900, "y")]),
            tx("C", 3, &[("B", 0)], vec![out(800, "z"), out(50, "x")]),
        ]
    }

    #[test]
    fn spent_by_chain() {
        let view = ChainView::from_transactions(CorpusHeader::default(), abc()).unwrap();
        let a = view.lookup("A").unwrap();
        let b = view.lookup("B").unwrap();
        let c = view.lookup("C").unwrap();
        assert_eq!(view.spent_by(a, 0), Some(b));
        assert_eq!(view.spent_by(b, 0), Some(c));
        assert_eq!(view.spent_by(c, 0), None);
        assert_eq!(view.fee_of(b), 100);
        assert_eq!(view.fee_of(c), 50);
        let x = view.address_id("x").unwrap();
        assert_eq!(view.first_seen(x), a);
        assert_eq!(view.output_occurrences(x), 2);
        assert_eq!(view.input_addresses(c), &[view.address_id("y").unwrap()]);
    }

    #[test]
    fn rejects_bad_records() {
        let mut bad = abc();
        bad[1].inputs[0].prev_tx = "nope".into();
        assert!(matches!(
            ChainView::from_transactions(CorpusHeader::default(), bad),
            Err(ChainError::UnknownOutpoint { line: 3, .. })
        ));

        let mut dup = abc();
        dup[2].txid = "A".into();
        assert!(matches!(
            ChainView::from_transactions(CorpusHeader::default(), dup),
            Err(ChainError::DuplicateTxid { .. })
        ));

        let mut order = abc();
        order[2].block_height = 2;
        assert!(matches!(
            ChainView::from_transactions(CorpusHeader::default(), order),
            Err(ChainError::OutOfOrder { line: 4 })
        ));

        let mut double = abc();
        double[2].inputs[0] = TxInput {
            prev_tx: "A".into(),
            prev_index: 0,
            sequence: 0,
        };
        assert!(matches!(
            ChainView::from_transactions(CorpusHeader::default(), double),
            Err(ChainError::DoubleSpend { .. })
        ));

        let mut inflate = abc();
        inflate[1].outputs[0].value = 2000;
        assert!(matches!(
            ChainView::from_transactions(CorpusHeader::default(), inflate),
            Err(ChainError::ValueNotConserved { .. })
        ));
    }
}
