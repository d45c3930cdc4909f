use crate::chain::{is_rbf, is_standard, ChainView, CoinJoinRule, ScriptType, TxIdx};

use super::kind::{Feature, HeuristicKind, KIND_COUNT};

/// Subset of the two outputs of a standard transaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct OutputSet(u8);

impl OutputSet {
    pub const EMPTY: OutputSet = OutputSet(0);
    pub const BOTH: OutputSet = OutputSet(0b11);

    pub fn single(index: usize) -> Self {
        debug_assert!(index < 2);
        OutputSet(1 << index)
    }

    pub fn from_fn(f: impl Fn(usize) -> bool) -> Self {
        OutputSet((f(0) as u8) | ((f(1) as u8) << 1))
    }

    pub fn contains(self, index: usize) -> bool {
        index < 2 && self.0 & (1 << index) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..2).filter(move |i| self.contains(*i))
    }

    /// The constrained heuristic: the member when there is exactly one.
    pub fn unique(self) -> Option<usize> {
        match self.0 {
            0b01 => Some(0),
            0b10 => Some(1),
            _ => None,
        }
    }
}

/// Protocol characteristics compared by the fingerprint heuristics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fingerprint {
    pub input_count: usize,
    pub output_count: usize,
    pub version: i32,
    pub locktime_nonzero: bool,
    pub rbf: bool,
    pub segwit: bool,
    pub segwit_conform: bool,
    pub bip69: bool,
    pub zero_conf: bool,
    pub absolute_fee: u64,
    pub relative_fee: u64,
    pub multisig: bool,
    /// Bit set of input script types.
    pub input_types: u8,
}

impl Fingerprint {
    pub fn of(view: &ChainView, t: TxIdx) -> Self {
        let tx = view.tx(t);
        let mut input_types = 0u8;
        let mut permits_segwit = false;
        let mut multisig = false;
        let mut zero_conf = false;
        for op in view.input_outpoints(t) {
            let prev = view.prev_output(*op);
            input_types |= prev.script_type.bit();
            permits_segwit |= prev.script_type.permits_segwit();
            multisig |= prev.script_type == ScriptType::Multisig;
            zero_conf |= view.tx(op.tx).block_height == tx.block_height;
        }
        let fee = view.fee_of(t);
        Fingerprint {
            input_count: tx.inputs.len(),
            output_count: tx.outputs.len(),
            version: tx.version,
            locktime_nonzero: tx.locktime > 0,
            rbf: is_rbf(tx),
            segwit: tx.segwit,
            segwit_conform: tx.segwit == permits_segwit,
            bip69: is_bip69_sorted(view, t),
            zero_conf,
            absolute_fee: fee,
            relative_fee: rounded_fee_rate(fee, tx.vsize),
            multisig,
            input_types,
        }
    }
}

/// Integer sat/vB, rounded half up.
pub fn rounded_fee_rate(fee: u64, vsize: u32) -> u64 {
    let vsize = vsize.max(1) as u64;
    (2 * fee + vsize) / (2 * vsize)
}

/// Inputs in lexicographic outpoint order and outputs in non-decreasing value order.
/// Output scripts are not compared.
pub fn is_bip69_sorted(view: &ChainView, t: TxIdx) -> bool {
    let tx = view.tx(t);
    let inputs_sorted = tx.inputs.windows(2).all(|w| {
        (w[0].prev_tx.as_str(), w[0].prev_index) <= (w[1].prev_tx.as_str(), w[1].prev_index)
    });
    let outputs_sorted = tx.outputs.windows(2).all(|w| w[0].value <= w[1].value);
    inputs_sorted && outputs_sorted
}

fn feature_active(view: &ChainView, t: TxIdx, feature: Feature) -> bool {
    let a = view.header().activation;
    let h = view.tx(t).block_height;
    match feature {
        Feature::SegWit => h >= a.segwit,
        Feature::Rbf => h >= a.rbf,
        Feature::Version2 => h >= a.version2,
    }
}

fn universal(kind: HeuristicKind, view: &ChainView, t: TxIdx) -> OutputSet {
    let tx = view.tx(t);
    let values = [tx.outputs[0].value, tx.outputs[1].value];
    match kind {
        HeuristicKind::OptimalChange { with_fee } => {
            if tx.inputs.len() < 2 {
                return OutputSet::EMPTY;
            }
            let min_in = view.input_values(t).min().unwrap_or(0);
            let fee = if with_fee { view.fee_of(t) } else { 0 };
            OutputSet::from_fn(|i| values[i].saturating_add(fee) < min_in)
        }
        HeuristicKind::AddressType => {
            let mut types = view.input_script_types(t);
            let Some(first) = types.next() else {
                return OutputSet::EMPTY;
            };
            if types.any(|s| s != first) {
                return OutputSet::EMPTY;
            }
            OutputSet::from_fn(|i| tx.outputs[i].script_type == first)
        }
        HeuristicKind::PowerOfTen(n) => {
            let m = 10u64.pow(n as u32);
            OutputSet::from_fn(|i| values[i] % m != 0)
        }
        _ => unreachable!("not a universal heuristic"),
    }
}

fn matching(spenders: &[Fingerprint; 2], f: impl Fn(&Fingerprint) -> bool) -> OutputSet {
    OutputSet::from_fn(|i| f(&spenders[i]))
}

fn fingerprint(kind: HeuristicKind, own: &Fingerprint, sp: &[Fingerprint; 2]) -> OutputSet {
    match kind {
        HeuristicKind::OutputCount => matching(sp, |s| s.output_count == own.output_count),
        HeuristicKind::InOutCount => matching(sp, |s| {
            (s.input_count, s.output_count) == (own.input_count, own.output_count)
        }),
        HeuristicKind::Version => matching(sp, |s| s.version == own.version),
        HeuristicKind::Locktime => matching(sp, |s| s.locktime_nonzero == own.locktime_nonzero),
        HeuristicKind::Rbf => matching(sp, |s| s.rbf == own.rbf),
        HeuristicKind::SegWit => matching(sp, |s| s.segwit == own.segwit),
        HeuristicKind::SegWitConform => {
            matching(sp, |s| s.segwit_conform == own.segwit_conform)
        }
        HeuristicKind::Bip69Order => matching(sp, |s| s.bip69 == own.bip69),
        HeuristicKind::ZeroConf => matching(sp, |s| s.zero_conf == own.zero_conf),
        HeuristicKind::AbsoluteFee => matching(sp, |s| s.absolute_fee == own.absolute_fee),
        HeuristicKind::RelativeFee => matching(sp, |s| s.relative_fee == own.relative_fee),
        HeuristicKind::Multisig => matching(sp, |s| s.multisig == own.multisig),
        HeuristicKind::InputAddressType(t) => {
            if own.input_types & t.bit() == 0 {
                OutputSet::EMPTY
            } else {
                matching(sp, |s| s.input_types & t.bit() != 0)
            }
        }
        HeuristicKind::AllAddressTypes => matching(sp, |s| s.input_types & own.input_types != 0),
        _ => unreachable!("not a fingerprint heuristic"),
    }
}

/// Fingerprints of the transaction and of both spenders, when both outputs are spent.
fn fingerprints(view: &ChainView, t: TxIdx) -> Option<(Fingerprint, [Fingerprint; 2])> {
    let s0 = view.spent_by(t, 0)?;
    let s1 = view.spent_by(t, 1)?;
    Some((
        Fingerprint::of(view, t),
        [Fingerprint::of(view, s0), Fingerprint::of(view, s1)],
    ))
}

/// Potential change outputs according to `kind`. Abstains (empty set) when the
/// transaction is not standard, or, for fingerprints, when an output is unspent or
/// the compared feature is not yet active.
pub fn candidates(kind: HeuristicKind, t: TxIdx, view: &ChainView, rule: &CoinJoinRule) -> OutputSet {
    if !is_standard(view.tx(t), rule) {
        return OutputSet::EMPTY;
    }
    if !kind.is_fingerprint() {
        return universal(kind, view, t);
    }
    if let Some(f) = kind.activation() {
        if !feature_active(view, t, f) {
            return OutputSet::EMPTY;
        }
    }
    match fingerprints(view, t) {
        Some((own, sp)) => fingerprint(kind, &own, &sp),
        None => OutputSet::EMPTY,
    }
}

/// [`candidates`] for every kind, sharing the fingerprint computation.
pub fn candidates_all(t: TxIdx, view: &ChainView, rule: &CoinJoinRule) -> [OutputSet; KIND_COUNT] {
    let mut out = [OutputSet::EMPTY; KIND_COUNT];
    if !is_standard(view.tx(t), rule) {
        return out;
    }
    let fps = fingerprints(view, t);
    for (slot, kind) in out.iter_mut().zip(HeuristicKind::ALL) {
        *slot = if !kind.is_fingerprint() {
            universal(kind, view, t)
        } else if kind.activation().is_some_and(|f| !feature_active(view, t, f)) {
            OutputSet::EMPTY
        } else {
            match &fps {
                Some((own, sp)) => fingerprint(kind, own, sp),
                None => OutputSet::EMPTY,
            }
        };
    }
    out
}

pub fn unique_candidate(kind: HeuristicKind, t: TxIdx, view: &ChainView, rule: &CoinJoinRule) -> Option<usize> {
    candidates(kind, t, view, rule).unique()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unique_rule() {
        assert_eq!(OutputSet::single(1).unique(), Some(1));
        assert_eq!(OutputSet::BOTH.unique(), None);
        assert_eq!(OutputSet::EMPTY.unique(), None);
    }

    #[test]
    fn fee_rate_rounding() {
        assert_eq!(rounded_fee_rate(1000, 200), 5);
        assert_eq!(rounded_fee_rate(1100, 200), 6);
        assert_eq!(rounded_fee_rate(1099, 200), 5);
        assert_eq!(rounded_fee_rate(0, 0), 0);
    }
}
