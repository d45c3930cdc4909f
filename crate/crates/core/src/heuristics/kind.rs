use std::fmt;
use std::str::FromStr;

use crate::chain::ScriptType;

/// Number of heuristic variants (9 universal, 17 fingerprint).
pub const KIND_COUNT: usize = 26;

/// Change heuristics. The fingerprint variants compare a transaction with the
/// transactions spending its outputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HeuristicKind {
    /// An output smaller than every input (optionally after adding the fee).
    OptimalChange { with_fee: bool },
    /// The output sharing the inputs' single script type.
    AddressType,
    /// Outputs not divisible by 10^n.
    PowerOfTen(u8),
    OutputCount,
    InOutCount,
    Version,
    Locktime,
    Rbf,
    SegWit,
    SegWitConform,
    Bip69Order,
    ZeroConf,
    AbsoluteFee,
    RelativeFee,
    Multisig,
    /// Both transactions spend inputs of this script type.
    InputAddressType(ScriptType),
    /// Input script-type sets overlap.
    AllAddressTypes,
}

/// Protocol feature gating a fingerprint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feature {
    SegWit,
    Rbf,
    Version2,
}

impl HeuristicKind {
    pub const ALL: [HeuristicKind; KIND_COUNT] = [
        HeuristicKind::OptimalChange { with_fee: false },
        HeuristicKind::OptimalChange { with_fee: true },
        HeuristicKind::AddressType,
        HeuristicKind::PowerOfTen(2),
        HeuristicKind::PowerOfTen(3),
        HeuristicKind::PowerOfTen(4),
        HeuristicKind::PowerOfTen(5),
        HeuristicKind::PowerOfTen(6),
        HeuristicKind::PowerOfTen(7),
        HeuristicKind::OutputCount,
        HeuristicKind::InOutCount,
        HeuristicKind::Version,
        HeuristicKind::Locktime,
        HeuristicKind::Rbf,
        HeuristicKind::SegWit,
        HeuristicKind::SegWitConform,
        HeuristicKind::Bip69Order,
        HeuristicKind::ZeroConf,
        HeuristicKind::AbsoluteFee,
        HeuristicKind::RelativeFee,
        HeuristicKind::Multisig,
        HeuristicKind::InputAddressType(ScriptType::P2PKH),
        HeuristicKind::InputAddressType(ScriptType::P2SH),
        HeuristicKind::InputAddressType(ScriptType::P2WPKH),
        HeuristicKind::InputAddressType(ScriptType::P2WSH),
        HeuristicKind::AllAddressTypes,
    ];

    pub fn universal() -> impl Iterator<Item = HeuristicKind> {
        Self::ALL.into_iter().filter(|k| !k.is_fingerprint())
    }

    pub fn fingerprint() -> impl Iterator<Item = HeuristicKind> {
        Self::ALL.into_iter().filter(|k| k.is_fingerprint())
    }

    pub fn is_fingerprint(self) -> bool {
        !matches!(
            self,
            HeuristicKind::OptimalChange { .. }
                | HeuristicKind::AddressType
                | HeuristicKind::PowerOfTen(_)
        )
    }

    /// Position in [`HeuristicKind::ALL`] (and in vote rows).
    pub fn index(self) -> usize {
        Self::ALL
            .iter()
            .position(|k| *k == self)
            .expect("kind not in the enumerated set")
    }

    pub fn activation(self) -> Option<Feature> {
        match self {
            HeuristicKind::Version => Some(Feature::Version2),
            HeuristicKind::Rbf => Some(Feature::Rbf),
            HeuristicKind::SegWit
            | HeuristicKind::SegWitConform
            | HeuristicKind::InputAddressType(ScriptType::P2WPKH)
            | HeuristicKind::InputAddressType(ScriptType::P2WSH) => Some(Feature::SegWit),
            _ => None,
        }
    }

    pub fn name(self) -> String {
        match self {
            HeuristicKind::OptimalChange { with_fee: false } => "optimal_change".into(),
            HeuristicKind::OptimalChange { with_fee: true } => "optimal_change_fee".into(),
            HeuristicKind::AddressType => "address_type".into(),
            HeuristicKind::PowerOfTen(n) => format!("power_of_ten_{n}"),
            HeuristicKind::OutputCount => "fp_output_count".into(),
            HeuristicKind::InOutCount => "fp_in_out_count".into(),
            HeuristicKind::Version => "fp_version".into(),
            HeuristicKind::Locktime => "fp_locktime".into(),
            HeuristicKind::Rbf => "fp_rbf".into(),
            HeuristicKind::SegWit => "fp_segwit".into(),
            HeuristicKind::SegWitConform => "fp_segwit_conform".into(),
            HeuristicKind::Bip69Order => "fp_bip69_order".into(),
            HeuristicKind::ZeroConf => "fp_zero_conf".into(),
            HeuristicKind::AbsoluteFee => "fp_absolute_fee".into(),
            HeuristicKind::RelativeFee => "fp_relative_fee".into(),
            HeuristicKind::Multisig => "fp_multisig".into(),
            HeuristicKind::InputAddressType(t) => {
                format!("fp_address_type_{}", t.name().to_ascii_lowercase())
            }
            HeuristicKind::AllAddressTypes => "fp_all_address_types".into(),
        }
    }
}

impl fmt::Display for HeuristicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for HeuristicKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown heuristic {s}"))
    }
}
