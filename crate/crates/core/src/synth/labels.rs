use std::collections::HashMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::chain::{AddrId, ChainView, TagCategory, TxIdx};

use super::{EntityKind, SynthError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntityInfo {
    pub entity_id: u32,
    pub kind: EntityKind,
    pub name: String,
    pub category: Option<TagCategory>,
}

/// The generator's answer key: true change per transaction and owner per address.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimLabels {
    pub entities: Vec<EntityInfo>,
    /// Non-coinbase transactions in corpus order; `None` when there is no single change.
    pub change: Vec<(String, Option<u8>)>,
    /// Addresses in order of creation.
    pub owners: Vec<(String, u32)>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LabelRecord {
    Entity(EntityInfo),
    Change { txid: String, change_index: Option<u8> },
    Owner { address: String, entity_id: u32 },
}

/// Labels resolved against a corpus.
#[derive(Debug, Clone)]
pub struct IndexedLabels {
    /// `Some(change)` for labeled transactions.
    pub change: Vec<Option<Option<u8>>>,
    pub owner: Vec<u32>,
}

impl IndexedLabels {
    pub fn change_of(&self, t: TxIdx) -> Option<u8> {
        self.change[t.index()].flatten()
    }

    pub fn owner_of(&self, a: AddrId) -> u32 {
        self.owner[a.index()]
    }
}

impl SimLabels {
    pub fn write<W: Write>(&self, mut w: W) -> Result<(), SynthError> {
        let mut line = |rec: &LabelRecord| -> Result<(), SynthError> {
            serde_json::to_writer(&mut w, rec).map_err(|e| SynthError::Io(e.to_string()))?;
            w.write_all(b"\n")?;
            Ok(())
        };
        for e in &self.entities {
            line(&LabelRecord::Entity(e.clone()))?;
        }
        for (txid, c) in &self.change {
            line(&LabelRecord::Change {
                txid: txid.clone(),
                change_index: *c,
            })?;
        }
        for (address, id) in &self.owners {
            line(&LabelRecord::Owner {
                address: address.clone(),
                entity_id: *id,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self, SynthError> {
        let mut labels = SimLabels::default();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: LabelRecord = serde_json::from_str(&line)
                .map_err(|e| SynthError::Format(format!("labels line {}: {e}", i + 1)))?;
            match rec {
                LabelRecord::Entity(e) => labels.entities.push(e),
                LabelRecord::Change { txid, change_index } => labels.change.push((txid, change_index)),
                LabelRecord::Owner { address, entity_id } => labels.owners.push((address, entity_id)),
            }
        }
        Ok(labels)
    }

    pub fn indexed(&self, view: &ChainView) -> Result<IndexedLabels, SynthError> {
        let mut change = vec![None; view.len()];
        for (txid, c) in &self.change {
            let t = view
                .lookup(txid)
                .ok_or_else(|| SynthError::Format(format!("label for unknown txid {txid}")))?;
            change[t.index()] = Some(*c);
        }
        let by_address: HashMap<&str, u32> = self.owners.iter().map(|(a, e)| (a.as_str(), *e)).collect();
        let mut owner = Vec::with_capacity(view.address_count());
        for a in 0..view.address_count() {
            let addr = view.address(AddrId(a as u32));
            let e = by_address
                .get(addr)
                .ok_or_else(|| SynthError::Format(format!("address {addr} has no owner")))?;
            owner.push(*e);
        }
        Ok(IndexedLabels { change, owner })
    }
}

/// One payment from `payer` to `payee` recorded by the generator.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Payment {
    pub txid: String,
    pub payer: u32,
    pub payee: u32,
    pub value: u64,
}

/// CSV with columns `txid,payer,payee,value`.
pub fn write_ledger<W: Write>(mut w: W, ledger: &[Payment]) -> std::io::Result<()> {
    writeln!(w, "txid,payer,payee,value")?;
    for p in ledger {
        writeln!(w, "{},{},{},{}", p.txid, p.payer, p.payee, p.value)?;
    }
    w.flush()
}

pub fn read_ledger<R: BufRead>(r: R) -> Result<Vec<Payment>, SynthError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 || line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        let bad = || SynthError::Format(format!("ledger line {}", i + 1));
        if f.len() != 4 {
            return Err(bad());
        }
        out.push(Payment {
            txid: f[0].to_string(),
            payer: f[1].parse().map_err(|_| bad())?,
            payee: f[2].parse().map_err(|_| bad())?,
            value: f[3].parse().map_err(|_| bad())?,
        });
    }
    Ok(out)
}
