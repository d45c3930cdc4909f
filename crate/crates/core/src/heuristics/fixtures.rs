//! Hand-built transactions with the expected candidate set of each heuristic.
//! The tested transaction is always at position 1.

use super::{candidates, HeuristicKind, OutputSet};
use crate::chain::fixture::Fixture;
use crate::chain::{Activation, ChainView, CoinJoinRule, CorpusHeader, ScriptType, TxIdx};
use ScriptType::*;

pub const TESTED: TxIdx = TxIdx(1);
const FEE: u64 = 100;

/// Layout: coinbase 0, tested tx 1, spender of output 0 at 2, of output 1 at 3.
#[derive(Debug, Clone)]
pub struct Case {
    pub header: CorpusHeader,
    pub inputs: Vec<(u64, ScriptType)>,
    pub outputs: [(u64, ScriptType); 2],
    /// Output count of each spender.
    pub spender_outputs: [usize; 2],
    /// Whether each spender also spends a second, unrelated coin.
    pub spender_extra_input: [bool; 2],
    pub spent: [bool; 2],
}

impl Case {
    pub fn new(inputs: &[(u64, ScriptType)], outputs: [(u64, ScriptType); 2]) -> Self {
        Case {
            header: CorpusHeader::default(),
            inputs: inputs.to_vec(),
            outputs,
            spender_outputs: [2, 2],
            spender_extra_input: [false, false],
            spent: [true, true],
        }
    }

    /// One P2PKH input of 100000 paying 60000 and 39000.
    pub fn simple() -> Self {
        Self::new(&[(100_000, P2PKH)], [(60_000, P2PKH), (39_000, P2PKH)])
    }

    fn with(mut self, edit: impl FnOnce(&mut Case)) -> Self {
        edit(&mut self);
        self
    }

    pub fn fixture(&self) -> Fixture {
        let mut f = Fixture::with_header(self.header);
        let n = self.inputs.len();
        let mut cb_outs: Vec<(&str, u64, ScriptType)> = self.inputs.iter().map(|(v, s)| ("in", *v, *s)).collect();
        cb_outs.push(("extra", 10_000, P2PKH));
        cb_outs.push(("extra", 10_000, P2PKH));
        let cb = f.coinbase_typed(&cb_outs);
        let ins: Vec<(usize, u32)> = (0..n as u32).map(|i| (cb, i)).collect();
        let t = f.spend_typed(
            &ins,
            &[
                ("o0", self.outputs[0].0, self.outputs[0].1),
                ("o1", self.outputs[1].0, self.outputs[1].1),
            ],
        );
        for i in 0..2 {
            if !self.spent[i] {
                continue;
            }
            let mut ins = vec![(t, i as u32)];
            let mut v = self.outputs[i].0 - FEE;
            if self.spender_extra_input[i] {
                ins.push((cb, (n + i) as u32));
                v += 10_000;
            }
            let k = self.spender_outputs[i] as u64;
            let mut outs: Vec<(String, u64)> = (0..k).map(|j| (format!("s{i}{j}"), v / (k + 1))).collect();
            let rest = v - v / (k + 1) * (k - 1);
            outs.last_mut().expect("at least one output").1 = rest;
            let outs: Vec<(&str, u64)> = outs.iter().map(|(a, v)| (a.as_str(), *v)).collect();
            f.spend(&ins, &outs);
        }
        f
    }

    pub fn view(&self, edit: impl FnOnce(&mut Fixture)) -> ChainView {
        let mut f = self.fixture();
        edit(&mut f);
        f.view()
    }
}

pub fn header(segwit: u32, rbf: u32, version2: u32) -> CorpusHeader {
    CorpusHeader {
        activation: Activation { segwit, rbf, version2 },
        ..CorpusHeader::default()
    }
}

pub fn signal_rbf(f: &mut Fixture, pos: usize) {
    for i in f.tx_mut(pos).inputs.iter_mut() {
        i.sequence = 0xFFFF_FFFD;
    }
}

pub fn swap_outputs(f: &mut Fixture, pos: usize) {
    f.tx_mut(pos).outputs.swap(0, 1);
}

/// Lowers the value of output 1 of `pos` so that its fee becomes `total`.
fn set_fee(f: &mut Fixture, pos: usize, total: u64) {
    f.tx_mut(pos).outputs[1].value -= total - FEE;
}

fn segwit_pair(f: &mut Fixture) {
    f.tx_mut(1).segwit = true;
    f.tx_mut(2).segwit = true;
}

fn same_block_spender(f: &mut Fixture) {
    let h = f.tx_mut(1).block_height;
    let s = f.tx_mut(2);
    s.block_height = h;
    s.tx_index = 1;
}

fn all_zero_conf(f: &mut Fixture) {
    let t = f.tx_mut(1);
    t.block_height = 0;
    t.tx_index = 1;
    let s = f.tx_mut(2);
    s.block_height = 0;
    s.tx_index = 2;
}

pub struct HeuristicFixture {
    pub kind: HeuristicKind,
    pub note: &'static str,
    pub view: ChainView,
    pub expected: OutputSet,
}

impl HeuristicFixture {
    pub fn actual(&self) -> OutputSet {
        candidates(self.kind, TESTED, &self.view, &CoinJoinRule::default())
    }

    pub fn passes(&self) -> bool {
        self.actual() == self.expected
    }
}

fn set(ix: &[usize]) -> OutputSet {
    OutputSet::from_fn(|i| ix.contains(&i))
}

/// Every fixture, at least three per heuristic.
pub fn heuristic_fixtures() -> Vec<HeuristicFixture> {
    use HeuristicKind as K;
    let mut out = Vec::new();
    let mut add = |kind, note, view, expected: &[usize]| {
        out.push(HeuristicFixture {
            kind,
            note,
            view,
            expected: set(expected),
        })
    };
    let none = |_: &mut Fixture| {};

    let two_in = Case::new(&[(50_000, P2PKH), (50_000, P2PKH)], [(75_000, P2PKH), (20_000, P2PKH)]);
    let one_in = Case::new(&[(100_000, P2PKH)], [(75_000, P2PKH), (20_000, P2PKH)]);
    let both_small = Case::new(&[(50_000, P2PKH), (50_000, P2PKH)], [(45_000, P2PKH), (45_000, P2PKH)]);
    let k = K::OptimalChange { with_fee: false };
    add(k, "output below every input", two_in.view(none), &[1]);
    add(k, "no output below the single input", one_in.view(none), &[]);
    add(k, "both outputs below every input", both_small.view(none), &[0, 1]);
    let k = K::OptimalChange { with_fee: true };
    let fee_case = Case::new(&[(30_000, P2PKH), (70_000, P2PKH)], [(60_000, P2PKH), (28_000, P2PKH)]);
    add(k, "output plus fee below every input", two_in.view(none), &[1]);
    add(k, "fee lifts the output above an input", fee_case.view(none), &[]);
    add(k, "no output below the single input", one_in.view(none), &[]);
    add(
        K::OptimalChange { with_fee: false },
        "without the fee the same output qualifies",
        fee_case.view(none),
        &[1],
    );

    let k = K::AddressType;
    let p2sh_out = Case::new(&[(100_000, P2PKH)], [(60_000, P2PKH), (39_000, P2SH)]);
    add(k, "one output matches the input type", p2sh_out.view(none), &[0]);
    add(
        k,
        "mixed input types",
        Case::new(&[(50_000, P2PKH), (50_000, P2SH)], [(60_000, P2PKH), (39_000, P2SH)]).view(none),
        &[],
    );
    add(
        k,
        "both outputs match",
        Case::new(&[(100_000, P2WPKH)], [(60_000, P2WPKH), (39_000, P2WPKH)]).view(none),
        &[0, 1],
    );

    for n in 2u8..=7 {
        let p = 10u64.pow(n as u32);
        let round = 3 * p;
        let odd = 2 * p + p / 2;
        let odd2 = 4 * p + p / 5 + 1;
        let k = K::PowerOfTen(n);
        add(
            k,
            "one output not divisible",
            Case::new(&[(round + odd + FEE, P2PKH)], [(round, P2PKH), (odd, P2PKH)]).view(none),
            &[1],
        );
        add(
            k,
            "no output divisible",
            Case::new(&[(odd + odd2 + FEE, P2PKH)], [(odd, P2PKH), (odd2, P2PKH)]).view(none),
            &[0, 1],
        );
        add(
            k,
            "both outputs divisible",
            Case::new(&[(round + 2 * p + FEE, P2PKH)], [(round, P2PKH), (2 * p, P2PKH)]).view(none),
            &[],
        );
    }
    let c = Case::new(&[(95_200_000, P2PKH)], [(75_000_000, P2PKH), (20_000_000, P2PKH)]);
    add(K::PowerOfTen(6), "75000000 and 20000000 at 10^6", c.view(none), &[]);
    add(K::PowerOfTen(7), "75000000 and 20000000 at 10^7", c.view(none), &[0]);
    let c = Case::new(&[(100_000, P2PKH)], [(60_000, P2PKH), (39_900, P2PKH)]);
    add(K::PowerOfTen(2), "60000 and 39900 at 10^2", c.view(none), &[]);
    add(K::PowerOfTen(3), "60000 and 39900 at 10^3", c.view(none), &[1]);

    let k = K::OutputCount;
    let base = Case::simple();
    add(
        k,
        "only the spender of output 0 has two outputs",
        base.clone().with(|c| c.spender_outputs = [2, 1]).view(none),
        &[0],
    );
    add(k, "both spenders have two outputs", base.view(none), &[0, 1]);
    add(
        k,
        "neither spender has two outputs",
        base.clone().with(|c| c.spender_outputs = [1, 3]).view(none),
        &[],
    );

    let k = K::InOutCount;
    add(
        k,
        "only spender 0 keeps one input",
        base.clone().with(|c| c.spender_extra_input = [false, true]).view(none),
        &[0],
    );
    add(
        k,
        "both spenders add inputs",
        base.clone().with(|c| c.spender_extra_input = [true, true]).view(none),
        &[],
    );
    let two = Case::new(&[(50_000, P2PKH), (50_000, P2PKH)], [(60_000, P2PKH), (39_000, P2PKH)])
        .with(|c| c.spender_extra_input = [false, true]);
    add(k, "two-input transaction matched by spender 1", two.view(none), &[1]);
    add(K::OutputCount, "output count cannot separate these", two.view(none), &[0, 1]);

    let k = K::Version;
    add(k, "spender 0 differs in version", base.view(|f| f.tx_mut(2).version = 2), &[1]);
    add(
        k,
        "all version 2",
        base.view(|f| (1..4).for_each(|p| f.tx_mut(p).version = 2)),
        &[0, 1],
    );
    add(
        k,
        "before version 2 activation",
        base.clone().with(|c| c.header = header(0, 0, 5)).view(|f| f.tx_mut(2).version = 2),
        &[],
    );

    let k = K::Locktime;
    add(
        k,
        "spender 1 sets a locktime like the tx",
        base.view(|f| {
            f.tx_mut(1).locktime = 500;
            f.tx_mut(3).locktime = 700;
        }),
        &[1],
    );
    add(k, "nobody sets a locktime", base.view(none), &[0, 1]);
    add(
        k,
        "only the spenders set locktimes",
        base.view(|f| {
            f.tx_mut(2).locktime = 1;
            f.tx_mut(3).locktime = 2;
        }),
        &[],
    );

    let k = K::Rbf;
    add(
        k,
        "tx and spender 0 signal",
        base.view(|f| {
            signal_rbf(f, 1);
            signal_rbf(f, 2);
        }),
        &[0],
    );
    add(k, "nobody signals", base.view(none), &[0, 1]);
    add(
        k,
        "before activation",
        base.clone().with(|c| c.header = header(0, 2, 0)).view(|f| signal_rbf(f, 2)),
        &[],
    );

    let sw = Case::new(&[(100_000, P2WPKH)], [(60_000, P2WPKH), (39_000, P2PKH)]);
    let k = K::SegWit;
    add(k, "tx and spender 0 use segwit", sw.view(segwit_pair), &[0]);
    add(
        k,
        "before activation",
        sw.clone().with(|c| c.header = header(3, 0, 0)).view(none),
        &[],
    );
    add(
        k,
        "output 1 unspent",
        base.clone().with(|c| c.spent = [true, false]).view(none),
        &[],
    );

    let k = K::SegWitConform;
    add(k, "both spenders conform", sw.view(segwit_pair), &[0, 1]);
    let sw_p2sh = Case::new(&[(100_000, P2WPKH)], [(60_000, P2WPKH), (39_000, P2SH)]);
    add(k, "P2SH spent without segwit", sw_p2sh.view(segwit_pair), &[0]);
    add(
        k,
        "non-conform tx matches the non-conform spender",
        sw_p2sh.view(|f| f.tx_mut(2).segwit = true),
        &[1],
    );

    let k = K::Bip69Order;
    add(k, "tx unsorted, spenders sorted", base.view(none), &[]);
    add(k, "tx unsorted, spender 1 unsorted", base.view(|f| swap_outputs(f, 3)), &[1]);
    let sorted = Case::new(&[(100_000, P2PKH)], [(39_000, P2PKH), (60_000, P2PKH)]);
    add(k, "tx sorted, spender 0 sorted", sorted.view(|f| swap_outputs(f, 3)), &[0]);
    add(k, "all sorted", sorted.view(none), &[0, 1]);

    let k = K::ZeroConf;
    add(k, "spender 0 in the same block", base.view(same_block_spender), &[1]);
    add(k, "no zero-conf spend", base.view(none), &[0, 1]);
    add(k, "tx and spender 0 zero-conf", base.view(all_zero_conf), &[0]);

    let k = K::AbsoluteFee;
    let c = Case::new(&[(100_000, P2PKH)], [(60_000, P2PKH), (39_900, P2PKH)]);
    add(k, "same fee everywhere", c.view(none), &[0, 1]);
    let c = Case::new(&[(100_000, P2PKH)], [(60_000, P2PKH), (39_000, P2PKH)]);
    add(k, "tx fee differs from both", c.view(none), &[]);
    add(k, "spender 1 pays the tx fee", c.view(|f| f.tx_mut(3).outputs[1].value -= 900), &[1]);

    let k = K::RelativeFee;
    let c = Case::new(&[(100_000, P2PKH)], [(60_000, P2PKH), (37_740, P2PKH)]);
    add(
        k,
        "rates round to the same value",
        c.view(|f| {
            set_fee(f, 2, 2260);
            set_fee(f, 3, 2300);
        }),
        &[0, 1],
    );
    add(
        k,
        "only spender 0 matches",
        c.view(|f| {
            set_fee(f, 2, 2260);
            set_fee(f, 3, 3000);
        }),
        &[0],
    );
    add(k, "tx rate differs", c.view(none), &[]);
    add(
        K::AbsoluteFee,
        "absolute fees separate what rates do not",
        c.view(|f| {
            set_fee(f, 2, 2260);
            set_fee(f, 3, 2300);
        }),
        &[0],
    );

    let k = K::Multisig;
    add(
        k,
        "spender 0 spends multisig, the tx does not",
        Case::new(&[(100_000, P2PKH)], [(60_000, Multisig), (39_000, P2PKH)]).view(none),
        &[1],
    );
    add(
        k,
        "tx and spender 0 spend multisig",
        Case::new(&[(100_000, Multisig)], [(60_000, Multisig), (39_000, P2PKH)]).view(none),
        &[0],
    );
    add(k, "no multisig", base.view(none), &[0, 1]);

    let p2pkh_to_p2sh = Case::new(&[(100_000, P2PKH)], [(60_000, P2PKH), (39_000, P2SH)]);
    let p2sh_in = Case::new(&[(100_000, P2SH)], [(60_000, P2PKH), (39_000, P2SH)]);
    let all_p2sh = Case::new(&[(100_000, P2SH)], [(60_000, P2SH), (39_000, P2SH)]);
    let k = K::InputAddressType(P2PKH);
    add(k, "spender 0 spends P2PKH like the tx", p2pkh_to_p2sh.view(none), &[0]);
    add(k, "tx does not spend P2PKH", p2sh_in.view(none), &[]);
    add(k, "both spenders spend P2PKH", base.view(none), &[0, 1]);
    let k = K::InputAddressType(P2SH);
    add(k, "spender 1 spends P2SH like the tx", p2sh_in.view(none), &[1]);
    add(k, "both spenders spend P2SH", all_p2sh.view(none), &[0, 1]);
    add(k, "tx does not spend P2SH", p2pkh_to_p2sh.view(none), &[]);
    let k = K::InputAddressType(P2WPKH);
    let wpkh = Case::new(&[(100_000, P2WPKH)], [(60_000, P2PKH), (39_000, P2WPKH)]);
    add(k, "spender 1 spends P2WPKH like the tx", wpkh.view(none), &[1]);
    add(
        k,
        "before segwit activation",
        wpkh.clone().with(|c| c.header = header(5, 0, 0)).view(none),
        &[],
    );
    add(
        k,
        "both spenders spend P2WPKH",
        Case::new(&[(100_000, P2WPKH)], [(60_000, P2WPKH), (39_000, P2WPKH)]).view(none),
        &[0, 1],
    );
    let k = K::InputAddressType(P2WSH);
    add(
        k,
        "spender 0 spends P2WSH like the tx",
        Case::new(&[(100_000, P2WSH)], [(60_000, P2WSH), (39_000, P2PKH)]).view(none),
        &[0],
    );
    add(
        k,
        "both spenders spend P2WSH",
        Case::new(&[(100_000, P2WSH)], [(60_000, P2WSH), (39_000, P2WSH)]).view(none),
        &[0, 1],
    );
    add(k, "tx does not spend P2WSH", base.view(none), &[]);

    let k = K::AllAddressTypes;
    add(
        k,
        "input type sets overlap for spender 0 only",
        Case::new(&[(50_000, P2PKH), (50_000, P2SH)], [(60_000, P2SH), (39_000, P2WPKH)]).view(none),
        &[0],
    );
    add(
        k,
        "both overlap",
        Case::new(&[(100_000, P2WPKH)], [(60_000, P2WPKH), (39_000, P2WPKH)]).view(none),
        &[0, 1],
    );
    add(
        k,
        "no overlap",
        Case::new(&[(100_000, P2PKH)], [(60_000, P2SH), (39_000, P2WSH)]).view(none),
        &[],
    );
    out
}
