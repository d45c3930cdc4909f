use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{ChainBuilder, ChainError, ChainView, CorpusHeader, Transaction, CORPUS_FORMAT_VERSION};

/// Parse a newline-delimited corpus: one header line, then one transaction per line.
///
/// An empty stream yields an empty view with a default header.
pub fn parse_corpus<R: BufRead>(reader: R) -> Result<ChainView, ChainError> {
    let mut builder: Option<ChainBuilder> = None;
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        match builder.as_mut() {
            None => {
                let header: CorpusHeader =
                    serde_json::from_str(trimmed).map_err(|e| ChainError::Malformed {
                        line: line_no,
                        msg: format!("bad corpus header: {e}"),
                    })?;
                if header.format_version != CORPUS_FORMAT_VERSION {
                    return Err(ChainError::UnsupportedVersion(header.format_version));
                }
                builder = Some(ChainBuilder::new(header));
            }
            Some(b) => {
                let tx: Transaction =
                    serde_json::from_str(trimmed).map_err(|e| ChainError::Malformed {
                        line: line_no,
                        msg: e.to_string(),
                    })?;
                b.push(tx, line_no)?;
            }
        }
    }
    Ok(builder
        .unwrap_or_else(|| ChainBuilder::new(CorpusHeader::default()))
        .finish())
}

pub fn write_corpus<W: Write>(
    mut writer: W,
    header: &CorpusHeader,
    txs: &[Transaction],
) -> Result<(), ChainError> {
    let to_io = |e: serde_json::Error| ChainError::Io(e.to_string());
    serde_json::to_writer(&mut writer, header).map_err(to_io)?;
    writer.write_all(b"\n")?;
    for tx in txs {
        serde_json::to_writer(&mut writer, tx).map_err(to_io)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_corpus_file(path: &Path) -> Result<ChainView, ChainError> {
    parse_corpus(BufReader::new(File::open(path)?))
}

pub fn write_corpus_file(path: &Path, view: &ChainView) -> Result<(), ChainError> {
    write_corpus(
        BufWriter::new(File::create(path)?),
        view.header(),
        view.transactions(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{Activation, ScriptType, TxInput, TxOutput};
    use proptest::prelude::*;

    #[test]
    fn empty_stream() {
        let view = parse_corpus(&b""[..]).unwrap();
        assert_eq!(view.len(), 0);
    }

    #[test]
    fn reports_line_of_malformed_record() {
        let text = "{\"format_version\":1,\"activation\":{\"segwit\":0,\"rbf\":0,\"version2\":0}}\n{\"txid\":5}\n";
        match parse_corpus(text.as_bytes()) {
            Err(ChainError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_outpoint_is_rejected() {
        let header = CorpusHeader::default();
        let tx = Transaction {
            txid: "b".into(),
            block_height: 1,
            block_time: 0,
            tx_index: 0,
            version: 1,
            locktime: 0,
            segwit: false,
            vsize: 100,
            coinbase: false,
            inputs: vec![TxInput {
                prev_tx: "missing".into(),
                prev_index: 0,
                sequence: 0,
            }],
            outputs: vec![TxOutput {
                value: 1,
                address: "a".into(),
                script_type: ScriptType::P2PKH,
            }],
        };
        let mut buf = Vec::new();
        write_corpus(&mut buf, &header, &[tx]).unwrap();
        let err = parse_corpus(&buf[..]).unwrap_err();
        assert!(err.to_string().contains("unknown outpoint"), "{err}");
    }

    fn script_type() -> impl Strategy<Value = ScriptType> {
        prop::sample::select(ScriptType::ALL.to_vec())
    }

    // Chains where every transaction spends some still-unspent outputs of earlier ones.
    fn arb_corpus() -> impl Strategy<Value = Vec<Transaction>> {
        prop::collection::vec(
            (
                prop::collection::vec((1u64..1_000_000, 0u8..20, script_type()), 1..4),
                any::<u64>(),
                any::<u32>(),
                any::<bool>(),
            ),
            1..25,
        )
        .prop_map(|specs| {
            let mut txs: Vec<Transaction> = Vec::new();
            let mut unspent: Vec<(String, u32, u64)> = Vec::new();
            for (i, (outs, pick, seq, segwit)) in specs.into_iter().enumerate() {
                let take = if unspent.is_empty() { 0 } else { 1 + (pick as usize) % unspent.len().min(3) };
                let mut inputs = Vec::new();
                let mut total = 0;
                for k in 0..take {
                    let j = (pick as usize).wrapping_add(k * 7) % unspent.len();
                    let (txid, index, value) = unspent.swap_remove(j);
                    total += value;
                    inputs.push(TxInput { prev_tx: txid, prev_index: index, sequence: seq });
                }
                let coinbase = inputs.is_empty();
                let mut outputs: Vec<TxOutput> = outs
                    .iter()
                    .map(|(v, a, s)| TxOutput { value: *v, address: format!("addr{a}"), script_type: *s })
                    .collect();
                if !coinbase {
                    let n = outputs.len() as u64;
                    for o in outputs.iter_mut() {
                        o.value = total / (n + 1);
                    }
                }
                let txid = format!("tx{i}");
                for (k, o) in outputs.iter().enumerate() {
                    unspent.push((txid.clone(), k as u32, o.value));
                }
                txs.push(Transaction {
                    txid,
                    block_height: i as u32 / 3,
                    block_time: 1_600_000_000 + i as i64,
                    tx_index: i as u32,
                    version: 1 + (seq % 2) as i32,
                    locktime: seq % 5,
                    segwit,
                    vsize: 100 + i as u32,
                    coinbase,
                    inputs,
                    outputs,
                });
            }
            txs
        })
    }

    proptest! {
        #[test]
        fn write_then_parse_is_identity(txs in arb_corpus(), h in 0u32..1000) {
            let header = CorpusHeader { format_version: 1, activation: Activation { segwit: h, rbf: h / 2, version2: h / 3 } };
            let mut buf = Vec::new();
            write_corpus(&mut buf, &header, &txs).unwrap();
            let view = parse_corpus(&buf[..]).unwrap();
            prop_assert_eq!(view.header(), &header);
            prop_assert_eq!(view.transactions(), &txs[..]);
            for id in 0..view.address_count() {
                let a = crate::chain::AddrId(id as u32);
                let first = view.first_seen(a);
                for t in view.tx_indices() {
                    if view.output_addresses(t).contains(&a) {
                        prop_assert!(first <= t);
                    }
                }
            }
            for t in view.tx_indices() {
                if !view.tx(t).coinbase {
                    prop_assert!(crate::chain::fee(view.tx(t), &view).is_ok());
                }
            }
        }
    }
}
