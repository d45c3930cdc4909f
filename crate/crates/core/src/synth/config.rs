use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::chain::{Activation, ScriptType, TagCategory};

use super::SynthError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntityKind {
    User,
    Exchange,
    Gambler,
    Merchant,
}

impl EntityKind {
    pub const ALL: [EntityKind; 4] = [
        EntityKind::User,
        EntityKind::Exchange,
        EntityKind::Gambler,
        EntityKind::Merchant,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EntityKind::User => "user",
            EntityKind::Exchange => "exchange",
            EntityKind::Gambler => "gambler",
            EntityKind::Merchant => "merchant",
        }
    }

    pub fn default_category(self) -> Option<TagCategory> {
        match self {
            EntityKind::User => None,
            EntityKind::Exchange => Some(TagCategory::Exchange),
            EntityKind::Gambler => Some(TagCategory::Gambling),
            EntityKind::Merchant => Some(TagCategory::Other),
        }
    }

    /// Who this kind of entity pays, with relative weights.
    pub fn default_payees(self) -> BTreeMap<EntityKind, f64> {
        let w: &[(EntityKind, f64)] = match self {
            EntityKind::User => &[
                (EntityKind::Merchant, 0.4),
                (EntityKind::Exchange, 0.25),
                (EntityKind::Gambler, 0.15),
                (EntityKind::User, 0.2),
            ],
            EntityKind::Exchange => &[(EntityKind::User, 1.0)],
            EntityKind::Gambler => &[(EntityKind::User, 1.0)],
            EntityKind::Merchant => &[(EntityKind::Exchange, 0.7), (EntityKind::User, 0.3)],
        };
        w.iter().copied().collect()
    }
}

/// How a wallet sets its fee.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "value")]
pub enum FeeMode {
    /// Fixed fee in satoshi.
    Absolute(u64),
    /// Fixed rate in sat/vB.
    Relative(u64),
}

/// Order in which a wallet considers its coins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoinSelection {
    SmallestFirst,
    LargestFirst,
    Random,
}

/// Protocol choices of one wallet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalletFingerprint {
    pub version: i32,
    pub uses_segwit: bool,
    pub sets_locktime: bool,
    pub signals_rbf: bool,
    pub fee_mode: FeeMode,
    pub sorts_bip69: bool,
    pub address_type: ScriptType,
    pub coin_selection: CoinSelection,
}

/// Fingerprint fields pinned for a whole group; unset fields are drawn per entity.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FingerprintSpec {
    pub version: Option<i32>,
    pub uses_segwit: Option<bool>,
    pub sets_locktime: Option<bool>,
    pub signals_rbf: Option<bool>,
    pub fee_mode: Option<FeeMode>,
    pub sorts_bip69: Option<bool>,
    pub address_type: Option<ScriptType>,
    pub coin_selection: Option<CoinSelection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntityGroup {
    pub kind: EntityKind,
    pub count: usize,
    /// Expected outgoing transactions per simulated day.
    pub activity_rate: f64,
    /// Satoshi granted by coinbase at the start.
    pub funding: u64,
    /// Probability of sending change to an already used address.
    #[serde(default)]
    pub reuse_rate: f64,
    /// Probability of receiving a payment on an already used address.
    #[serde(default)]
    pub receive_reuse_rate: f64,
    /// Probability that a payment amount is rounded to a power of ten.
    #[serde(default = "default_round")]
    pub spend_round_prob: f64,
    /// Tag category; defaults by kind, `none` leaves the group untagged.
    #[serde(default)]
    pub category: Option<CategoryChoice>,
    /// Probability that an address after the first is tagged.
    #[serde(default = "default_tag_fraction")]
    pub tag_fraction: f64,
    #[serde(default)]
    pub payees: Option<BTreeMap<EntityKind, f64>>,
    #[serde(default)]
    pub fingerprint: FingerprintSpec,
    /// Label prefix; defaults to the kind name.
    #[serde(default)]
    pub name: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CategoryChoice {
    None,
    Exchange,
    Darknet,
    Gambling,
    Other,
}

impl CategoryChoice {
    pub fn category(self) -> Option<TagCategory> {
        match self {
            CategoryChoice::None => None,
            CategoryChoice::Exchange => Some(TagCategory::Exchange),
            CategoryChoice::Darknet => Some(TagCategory::Darknet),
            CategoryChoice::Gambling => Some(TagCategory::Gambling),
            CategoryChoice::Other => Some(TagCategory::Other),
        }
    }
}

fn default_round() -> f64 {
    0.5
}

fn default_tag_fraction() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub days: u32,
    #[serde(default = "default_blocks_per_day")]
    pub blocks_per_day: u32,
    #[serde(default)]
    pub start_height: u32,
    #[serde(default = "default_start_time")]
    pub start_time: i64,
    #[serde(default = "default_activation")]
    pub activation: Activation,
    /// Probability of adding one unnecessary input to a payment.
    #[serde(default = "default_suboptimal")]
    pub suboptimal_rate: f64,
    /// Probability that an exchange payout is batched.
    #[serde(default = "default_batch")]
    pub batch_rate: f64,
    /// Expected CoinJoin transactions per day.
    #[serde(default)]
    pub coinjoins_per_day: f64,
    /// Probability of an extra OP_RETURN output on a payment.
    #[serde(default)]
    pub op_return_rate: f64,
    /// Per-entity, per-day probability of switching to a new wallet.
    #[serde(default)]
    pub wallet_switch_rate: f64,
    #[serde(default = "default_min_payment")]
    pub min_payment: u64,
    #[serde(default = "default_max_payment")]
    pub max_payment: u64,
    /// Change below this is added to the fee instead.
    #[serde(default = "default_dust")]
    pub dust: u64,
    /// Coinbase income paid to random users every day.
    #[serde(default)]
    pub daily_income: u64,
    #[serde(default = "default_income_recipients")]
    pub income_recipients: usize,
    pub groups: Vec<EntityGroup>,
}

fn default_blocks_per_day() -> u32 {
    144
}
fn default_start_time() -> i64 {
    1_500_000_000
}
fn default_activation() -> Activation {
    Activation {
        segwit: 3000,
        rbf: 1000,
        version2: 1500,
    }
}
fn default_suboptimal() -> f64 {
    0.05
}
fn default_batch() -> f64 {
    0.2
}
fn default_min_payment() -> u64 {
    10_000
}
fn default_max_payment() -> u64 {
    50_000_000
}
fn default_dust() -> u64 {
    546
}
fn default_income_recipients() -> usize {
    5
}

impl SynthConfig {
    pub fn from_toml(text: &str) -> Result<Self, SynthError> {
        let c: SynthConfig = toml::from_str(text).map_err(|e| SynthError::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// A small mixed population, handy for tests.
    pub fn small(days: u32) -> Self {
        let group = |kind, count, activity_rate, funding, receive_reuse_rate| EntityGroup {
            kind,
            count,
            activity_rate,
            funding,
            reuse_rate: 0.1,
            receive_reuse_rate,
            spend_round_prob: 0.5,
            category: None,
            tag_fraction: 0.05,
            payees: None,
            fingerprint: FingerprintSpec::default(),
            name: None,
        };
        SynthConfig {
            days,
            blocks_per_day: default_blocks_per_day(),
            start_height: 0,
            start_time: default_start_time(),
            activation: default_activation(),
            suboptimal_rate: default_suboptimal(),
            batch_rate: default_batch(),
            coinjoins_per_day: 0.5,
            op_return_rate: 0.01,
            wallet_switch_rate: 0.0,
            min_payment: default_min_payment(),
            max_payment: default_max_payment(),
            dust: default_dust(),
            daily_income: 20_000_000,
            income_recipients: 5,
            groups: vec![
                group(EntityKind::User, 40, 0.5, 200_000_000, 0.3),
                group(EntityKind::Exchange, 3, 6.0, 20_000_000_000, 0.5),
                group(EntityKind::Gambler, 2, 4.0, 5_000_000_000, 0.5),
                group(EntityKind::Merchant, 3, 2.0, 100_000_000, 0.5),
            ],
        }
    }

    /// The default population: about 500 entities including darknet markets
    /// that cash out to exchanges.
    pub fn standard(days: u32) -> Self {
        let mut c = Self::small(days);
        let counts = [450, 20, 15, 15];
        for (g, n) in c.groups.iter_mut().zip(counts) {
            g.count = n;
        }
        let mut market = c.groups[3].clone();
        market.count = 5;
        market.activity_rate = 3.0;
        market.funding = 500_000_000;
        market.category = Some(CategoryChoice::Darknet);
        market.payees = Some([(EntityKind::Exchange, 0.8), (EntityKind::User, 0.2)].into_iter().collect());
        market.name = Some("market".into());
        c.groups.push(market);
        c
    }

    pub fn entity_count(&self) -> usize {
        self.groups.iter().map(|g| g.count).sum()
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |m: String| Err(SynthError::Config(m));
        if self.days == 0 {
            return bad("days must be positive".into());
        }
        if self.blocks_per_day == 0 {
            return bad("blocks_per_day must be positive".into());
        }
        if self.min_payment == 0 || self.min_payment > self.max_payment {
            return bad("need 0 < min_payment <= max_payment".into());
        }
        for (name, p) in [
            ("suboptimal_rate", self.suboptimal_rate),
            ("batch_rate", self.batch_rate),
            ("op_return_rate", self.op_return_rate),
            ("wallet_switch_rate", self.wallet_switch_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} must be a probability"));
            }
        }
        if !(self.coinjoins_per_day >= 0.0 && self.coinjoins_per_day.is_finite()) {
            return bad("coinjoins_per_day must be non-negative".into());
        }
        if self.entity_count() == 0 {
            return bad("no entities".into());
        }
        let present: Vec<EntityKind> = self
            .groups
            .iter()
            .filter(|g| g.count > 0)
            .map(|g| g.kind)
            .collect();
        for (i, g) in self.groups.iter().enumerate() {
            for (name, p) in [
                ("reuse_rate", g.reuse_rate),
                ("receive_reuse_rate", g.receive_reuse_rate),
                ("spend_round_prob", g.spend_round_prob),
                ("tag_fraction", g.tag_fraction),
            ] {
                if !(0.0..=1.0).contains(&p) {
                    return bad(format!("group {i}: {name} must be a probability"));
                }
            }
            if !(g.activity_rate >= 0.0 && g.activity_rate.is_finite()) {
                return bad(format!("group {i}: activity_rate must be non-negative"));
            }
            if g.count == 0 || g.activity_rate == 0.0 {
                continue;
            }
            if g.funding == 0 {
                return Err(SynthError::Infeasible(format!(
                    "group {i}: positive activity with zero funding"
                )));
            }
            let payees = g.payees.clone().unwrap_or_else(|| g.kind.default_payees());
            let reachable = payees.iter().any(|(k, w)| {
                *w > 0.0 && present.contains(k) && (*k != g.kind || self.kind_count(*k) >= 2)
            });
            if !reachable {
                return Err(SynthError::Infeasible(format!(
                    "group {i}: no counterparty to pay"
                )));
            }
        }
        Ok(())
    }

    fn kind_count(&self, kind: EntityKind) -> usize {
        self.groups.iter().filter(|g| g.kind == kind).map(|g| g.count).sum()
    }
}
