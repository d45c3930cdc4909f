use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{AddrId, ChainError, ChainView};
use crate::cluster::ClusterAssignment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TagCategory {
    Exchange,
    Darknet,
    Gambling,
    Other,
}

impl std::str::FromStr for TagCategory {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exchange" => Ok(TagCategory::Exchange),
            "darknet" => Ok(TagCategory::Darknet),
            "gambling" => Ok(TagCategory::Gambling),
            "other" => Ok(TagCategory::Other),
            _ => Err(format!("unknown tag category {s}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagRecord {
    pub address: String,
    pub label: String,
    pub category: TagCategory,
}

/// Address tags: one entity label and category per address.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TagSet {
    tags: BTreeMap<String, (String, TagCategory)>,
}

impl TagSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a tag; a second, different label for the same address is an error.
    pub fn insert(&mut self, address: &str, label: &str, category: TagCategory) -> Result<(), String> {
        match self.tags.get(address) {
            Some((l, c)) if l != label || *c != category => Err(format!(
                "address {address} already tagged as {l}"
            )),
            _ => {
                self.tags
                    .insert(address.to_string(), (label.to_string(), category));
                Ok(())
            }
        }
    }

    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn get(&self, address: &str) -> Option<(&str, TagCategory)> {
        self.tags.get(address).map(|(l, c)| (l.as_str(), *c))
    }

    pub fn iter(&self) -> impl Iterator<Item = TagRecord> + '_ {
        self.tags.iter().map(|(a, (l, c))| TagRecord {
            address: a.clone(),
            label: l.clone(),
            category: *c,
        })
    }

    pub fn has_category(&self, category: TagCategory) -> bool {
        self.tags.values().any(|(_, c)| *c == category)
    }

    /// Tags of corpus addresses, grouped by cluster root.
    pub fn by_cluster(
        &self,
        view: &ChainView,
        clusters: &ClusterAssignment,
    ) -> HashMap<AddrId, BTreeSet<(String, TagCategory)>> {
        let mut out: HashMap<AddrId, BTreeSet<(String, TagCategory)>> = HashMap::new();
        for (address, (label, category)) in &self.tags {
            if let Some(id) = view.address_id(address) {
                out.entry(clusters.root(id))
                    .or_default()
                    .insert((label.clone(), *category));
            }
        }
        out
    }

    pub fn read<R: BufRead>(r: R) -> Result<Self, ChainError> {
        let mut set = TagSet::new();
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: TagRecord = serde_json::from_str(&line).map_err(|e| ChainError::Malformed {
                line: i + 1,
                msg: e.to_string(),
            })?;
            set.insert(&rec.address, &rec.label, rec.category)
                .map_err(|msg| ChainError::Malformed { line: i + 1, msg })?;
        }
        Ok(set)
    }

    pub fn write<W: Write>(&self, mut w: W) -> Result<(), ChainError> {
        for rec in self.iter() {
            serde_json::to_writer(&mut w, &rec).map_err(|e| ChainError::Io(e.to_string()))?;
            w.write_all(b"\n")?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_label_per_address() {
        let mut t = TagSet::new();
        t.insert("a", "X", TagCategory::Exchange).unwrap();
        t.insert("a", "X", TagCategory::Exchange).unwrap();
        assert!(t.insert("a", "Y", TagCategory::Exchange).is_err());
        let mut buf = Vec::new();
        t.write(&mut buf).unwrap();
        assert_eq!(TagSet::read(&buf[..]).unwrap(), t);
    }
}
