use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rayon::prelude::*;

use crate::chain::{ChainView, CoinJoinRule, TxIdx};

use super::candidates::{candidates_all, OutputSet};
use super::kind::{HeuristicKind, KIND_COUNT};
use super::HeuristicError;

/// Ordinal votes of every heuristic for one output: +1 for, -1 against, 0 abstain.
pub type Votes = [i8; KIND_COUNT];

/// Votes for both outputs of a standard transaction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TxVotes {
    pub tx: TxIdx,
    pub outputs: [Votes; 2],
}

impl TxVotes {
    pub fn from_candidates(tx: TxIdx, sets: &[OutputSet; KIND_COUNT], enabled: &[bool; KIND_COUNT]) -> Self {
        let mut outputs = [[0i8; KIND_COUNT]; 2];
        for k in 0..KIND_COUNT {
            if !enabled[k] {
                continue;
            }
            if let Some(u) = sets[k].unique() {
                outputs[u][k] = 1;
                outputs[1 - u][k] = -1;
            }
        }
        TxVotes { tx, outputs }
    }

    pub fn has_votes(&self) -> bool {
        self.outputs[0].iter().any(|v| *v != 0)
    }

    /// Number of votes cast for output `i`.
    pub fn score(&self, i: usize) -> i32 {
        self.outputs[i].iter().map(|v| (*v).max(0) as i32).sum()
    }

    /// Votes for `i` minus votes for the other output.
    pub fn margin(&self, i: usize) -> i32 {
        self.score(i) - self.score(1 - i)
    }
}

/// Heuristic votes for a set of standard transactions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VoteTable {
    rows: Vec<TxVotes>,
}

const MAGIC: &[u8; 4] = b"CKVT";
const VERSION: u16 = 1;

impl VoteTable {
    pub fn from_rows(rows: Vec<TxVotes>) -> Self {
        VoteTable { rows }
    }

    pub fn rows(&self) -> &[TxVotes] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Rows without any vote.
    pub fn no_vote_count(&self) -> usize {
        self.rows.iter().filter(|r| !r.has_votes()).count()
    }

    pub fn get(&self, tx: TxIdx) -> Option<&TxVotes> {
        match self.rows.binary_search_by_key(&tx, |r| r.tx) {
            Ok(i) => Some(&self.rows[i]),
            Err(_) => self.rows.iter().find(|r| r.tx == tx),
        }
    }

    /// Layout (little endian): magic `CKVT`, u16 version, u16 vote width, u64 row
    /// count, then per output row: u16 txid length, txid bytes, u8 output index,
    /// one i8 per heuristic in enumeration order. Both rows of a transaction are
    /// adjacent.
    pub fn write_binary<W: Write>(&self, mut w: W, view: &ChainView) -> Result<(), HeuristicError> {
        w.write_all(MAGIC)?;
        w.write_u16::<LittleEndian>(VERSION)?;
        w.write_u16::<LittleEndian>(KIND_COUNT as u16)?;
        w.write_u64::<LittleEndian>(2 * self.rows.len() as u64)?;
        for row in &self.rows {
            let txid = view.tx(row.tx).txid.as_bytes();
            for (i, votes) in row.outputs.iter().enumerate() {
                w.write_u16::<LittleEndian>(txid.len() as u16)?;
                w.write_all(txid)?;
                w.write_u8(i as u8)?;
                for v in votes {
                    w.write_i8(*v)?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R, view: &ChainView) -> Result<Self, HeuristicError> {
        let bad = |m: &str| HeuristicError::Format(m.to_string());
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(bad("not a vote table"));
        }
        if r.read_u16::<LittleEndian>()? != VERSION {
            return Err(bad("unsupported vote table version"));
        }
        if r.read_u16::<LittleEndian>()? as usize != KIND_COUNT {
            return Err(bad("vote width mismatch"));
        }
        let n = r.read_u64::<LittleEndian>()?;
        if n % 2 != 0 {
            return Err(bad("odd number of output rows"));
        }
        let mut rows = Vec::with_capacity((n / 2) as usize);
        for _ in 0..n / 2 {
            let mut tx = None;
            let mut outputs = [[0i8; KIND_COUNT]; 2];
            for (expected, votes) in outputs.iter_mut().enumerate() {
                let len = r.read_u16::<LittleEndian>()? as usize;
                let mut buf = vec![0u8; len];
                r.read_exact(&mut buf)?;
                let txid = String::from_utf8(buf).map_err(|_| bad("txid not utf-8"))?;
                let t = view
                    .lookup(&txid)
                    .ok_or_else(|| HeuristicError::Format(format!("unknown txid {txid}")))?;
                if tx.is_some_and(|p| p != t) {
                    return Err(bad("output rows of a transaction are not adjacent"));
                }
                tx = Some(t);
                if r.read_u8()? as usize != expected {
                    return Err(bad("unexpected output index"));
                }
                for v in votes.iter_mut() {
                    *v = r.read_i8()?;
                }
            }
            rows.push(TxVotes {
                tx: tx.expect("two rows read"),
                outputs,
            });
        }
        Ok(VoteTable { rows })
    }
}

/// Votes of `kinds` (others recorded as 0) for each transaction, in the given order.
pub fn build_vote_table(
    txs: &[TxIdx],
    kinds: &[HeuristicKind],
    view: &ChainView,
    rule: &CoinJoinRule,
) -> VoteTable {
    let mut enabled = [false; KIND_COUNT];
    for k in kinds {
        enabled[k.index()] = true;
    }
    let rows = txs
        .par_iter()
        .map(|&t| TxVotes::from_candidates(t, &candidates_all(t, view, rule), &enabled))
        .collect();
    VoteTable { rows }
}
