use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chain::{
    CorpusHeader, ScriptType, TagCategory, TagSet, Transaction, TxInput, TxOutput,
};

use super::config::{CoinSelection, EntityGroup, EntityKind, FeeMode, SynthConfig, WalletFingerprint};
use super::labels::{EntityInfo, Payment, SimLabels};
use super::{SynthCorpus, SynthError};

const ABSOLUTE_FEES: [u64; 6] = [1_000, 2_000, 2_500, 5_000, 10_000, 20_000];
const FEE_RATES: [u64; 8] = [1, 2, 3, 5, 8, 10, 15, 20];
const ADDRESS_TYPES: [(ScriptType, f64); 5] = [
    (ScriptType::P2PKH, 0.35),
    (ScriptType::P2SH, 0.2),
    (ScriptType::P2WPKH, 0.3),
    (ScriptType::P2WSH, 0.1),
    (ScriptType::Multisig, 0.05),
];
const MAX_INPUTS: usize = 40;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy)]
struct Utxo {
    tx: u32,
    index: u32,
    value: u64,
    addr: u32,
}

struct Entity {
    kind: EntityKind,
    group: usize,
    name: String,
    category: Option<TagCategory>,
    fp: WalletFingerprint,
    addrs: Vec<u32>,
    utxos: Vec<Utxo>,
    balance: u64,
}

struct Address {
    name: String,
    script: ScriptType,
    owner: u32,
}

enum Event {
    Spend(u32),
    CoinJoin,
}

struct Sim<'a> {
    cfg: &'a SynthConfig,
    seed: u64,
    rng: ChaCha8Rng,
    entities: Vec<Entity>,
    by_kind: [Vec<u32>; 4],
    addresses: Vec<Address>,
    txs: Vec<Transaction>,
    change: Vec<(String, Option<u8>)>,
    ledger: Vec<Payment>,
    tags: TagSet,
    height: u32,
    tx_index: u32,
}

fn kind_slot(k: EntityKind) -> usize {
    EntityKind::ALL.iter().position(|x| *x == k).expect("listed")
}

/// Draws a wallet fingerprint, honouring the group's pinned fields.
fn draw_fingerprint(rng: &mut ChaCha8Rng, g: &EntityGroup) -> WalletFingerprint {
    let s = g.fingerprint;
    let fee_mode = if rng.gen_bool(0.5) {
        FeeMode::Absolute(*ABSOLUTE_FEES.choose(rng).expect("non-empty"))
    } else {
        FeeMode::Relative(*FEE_RATES.choose(rng).expect("non-empty"))
    };
    let address_type = ADDRESS_TYPES
        .choose_weighted(rng, |(_, w)| *w)
        .expect("positive weights")
        .0;
    let coin_selection = *[
        CoinSelection::SmallestFirst,
        CoinSelection::SmallestFirst,
        CoinSelection::Random,
        CoinSelection::LargestFirst,
    ]
    .choose(rng)
    .expect("non-empty");
    let drawn = WalletFingerprint {
        version: if rng.gen_bool(0.5) { 2 } else { 1 },
        uses_segwit: rng.gen_bool(0.6),
        sets_locktime: rng.gen_bool(0.3),
        signals_rbf: rng.gen_bool(0.3),
        fee_mode,
        sorts_bip69: rng.gen_bool(0.3),
        address_type,
        coin_selection,
    };
    WalletFingerprint {
        version: s.version.unwrap_or(drawn.version),
        uses_segwit: s.uses_segwit.unwrap_or(drawn.uses_segwit),
        sets_locktime: s.sets_locktime.unwrap_or(drawn.sets_locktime),
        signals_rbf: s.signals_rbf.unwrap_or(drawn.signals_rbf),
        fee_mode: s.fee_mode.unwrap_or(drawn.fee_mode),
        sorts_bip69: s.sorts_bip69.unwrap_or(drawn.sorts_bip69),
        address_type: s.address_type.unwrap_or(drawn.address_type),
        coin_selection: s.coin_selection.unwrap_or(drawn.coin_selection),
    }
}

fn vsize(segwit: bool, inputs: usize, outputs: usize) -> u32 {
    if segwit {
        11 + 68 * inputs as u32 + 31 * outputs as u32
    } else {
        10 + 148 * inputs as u32 + 34 * outputs as u32
    }
}

fn fee_for(fp: &WalletFingerprint, segwit: bool, n_in: usize, n_out: usize) -> u64 {
    match fp.fee_mode {
        FeeMode::Absolute(f) => f,
        FeeMode::Relative(r) => r * vsize(segwit, n_in, n_out) as u64,
    }
}

/// Whole-number draws averaging `rate`.
fn count_with_rate(rng: &mut ChaCha8Rng, rate: f64) -> usize {
    let whole = rate.floor();
    whole as usize + rng.gen_bool(rate - whole) as usize
}

impl<'a> Sim<'a> {
    fn new(cfg: &'a SynthConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut entities = Vec::new();
        let mut by_kind: [Vec<u32>; 4] = Default::default();
        for (gi, g) in cfg.groups.iter().enumerate() {
            let prefix = g.name.clone().unwrap_or_else(|| g.kind.name().to_string());
            let category = match g.category {
                Some(c) => c.category(),
                None => g.kind.default_category(),
            };
            for i in 0..g.count {
                let id = entities.len() as u32;
                by_kind[kind_slot(g.kind)].push(id);
                entities.push(Entity {
                    kind: g.kind,
                    group: gi,
                    name: format!("{prefix}-{i}"),
                    category,
                    fp: draw_fingerprint(&mut rng, g),
                    addrs: Vec::new(),
                    utxos: Vec::new(),
                    balance: 0,
                });
            }
        }
        Sim {
            cfg,
            seed,
            rng,
            entities,
            by_kind,
            addresses: Vec::new(),
            txs: Vec::new(),
            change: Vec::new(),
            ledger: Vec::new(),
            tags: TagSet::new(),
            height: cfg.start_height,
            tx_index: 0,
        }
    }

    fn group(&self, e: u32) -> &EntityGroup {
        &self.cfg.groups[self.entities[e as usize].group]
    }

    fn segwit_active(&self) -> bool {
        self.height >= self.cfg.activation.segwit
    }

    /// A fresh address of the entity's current type.
    fn fresh_address(&mut self, e: u32) -> u32 {
        let ent = &self.entities[e as usize];
        let mut script = ent.fp.address_type;
        if matches!(script, ScriptType::P2WPKH | ScriptType::P2WSH) && !self.segwit_active() {
            script = ScriptType::P2PKH;
        }
        let n = ent.addrs.len();
        let prefix = match script {
            ScriptType::P2PKH => "1",
            ScriptType::P2SH => "3",
            ScriptType::P2WPKH => "bc1q",
            ScriptType::P2WSH => "bc1w",
            ScriptType::Multisig => "ms",
            ScriptType::OpReturn | ScriptType::Other => "x",
        };
        let id = self.addresses.len() as u32;
        let tag = splitmix(self.seed ^ splitmix(id as u64)) & 0xFFFF_FFFF;
        let name = format!("{prefix}{e:05x}{n:07x}{tag:08x}");
        let tagged = match ent.category {
            Some(_) if n == 0 => true,
            Some(_) => {
                let f = self.cfg.groups[ent.group].tag_fraction;
                self.rng.gen_bool(f)
            }
            None => false,
        };
        let ent = &self.entities[e as usize];
        if tagged {
            let cat = ent.category.expect("tagged entities have a category");
            self.tags
                .insert(&name, &ent.name, cat)
                .expect("fresh address is untagged");
        }
        self.addresses.push(Address {
            name,
            script,
            owner: e,
        });
        self.entities[e as usize].addrs.push(id);
        id
    }

    fn address_for(&mut self, e: u32, reuse: f64) -> u32 {
        let n = self.entities[e as usize].addrs.len();
        if n > 0 && self.rng.gen_bool(reuse) {
            let i = self.rng.gen_range(0..n);
            self.entities[e as usize].addrs[i]
        } else {
            self.fresh_address(e)
        }
    }

    fn next_txid(&mut self) -> String {
        let n = self.txs.len() as u64;
        let mut s = splitmix(self.seed.rotate_left(17) ^ n.wrapping_mul(0xA076_1D64_78BD_642F));
        let mut out = String::with_capacity(64);
        for _ in 0..4 {
            out.push_str(&format!("{s:016x}"));
            s = splitmix(s);
        }
        out
    }

    fn block_time(&self) -> i64 {
        self.cfg.start_time + (self.height - self.cfg.start_height) as i64 * 600
    }

    fn push_tx(&mut self, mut tx: Transaction, owners: &[u32]) {
        tx.tx_index = self.tx_index;
        tx.block_height = self.height;
        tx.block_time = self.block_time();
        self.tx_index += 1;
        let pos = self.txs.len() as u32;
        for (i, o) in tx.outputs.iter().enumerate() {
            if o.script_type == ScriptType::OpReturn {
                continue;
            }
            let addr = owners[i];
            let e = self.addresses[addr as usize].owner as usize;
            self.entities[e].utxos.push(Utxo {
                tx: pos,
                index: i as u32,
                value: o.value,
                addr,
            });
            self.entities[e].balance += o.value;
        }
        self.txs.push(tx);
    }

    fn output(&self, addr: u32, value: u64) -> TxOutput {
        let a = &self.addresses[addr as usize];
        TxOutput {
            value,
            address: a.name.clone(),
            script_type: a.script,
        }
    }

    /// Coinbase paying each `(entity, value)`; `fresh` forces a new address per output,
    /// otherwise an entity's outputs share one new address.
    fn coinbase(&mut self, pays: &[(u32, u64)], fresh: bool) {
        let mut outputs = Vec::new();
        let mut owners: Vec<u32> = Vec::new();
        for (j, &(e, v)) in pays.iter().enumerate() {
            let same = !fresh && j > 0 && pays[j - 1].0 == e;
            let a = if same { owners[j - 1] } else { self.fresh_address(e) };
            outputs.push(self.output(a, v));
            owners.push(a);
        }
        let tx = Transaction {
            txid: self.next_txid(),
            block_height: 0,
            block_time: 0,
            tx_index: 0,
            version: 1,
            locktime: 0,
            segwit: false,
            vsize: vsize(false, 0, outputs.len()),
            coinbase: true,
            inputs: Vec::new(),
            outputs,
        };
        self.push_tx(tx, &owners);
    }

    fn fund(&mut self) {
        for e in 0..self.entities.len() as u32 {
            let total = self.group(e).funding;
            if total == 0 {
                continue;
            }
            let chunk = self.cfg.max_payment.max(1);
            let parts = (total / chunk).clamp(1, 1000) * self.rng.gen_range(1..=2u64);
            let parts = parts.min(total);
            let mut pays = Vec::new();
            let mut left = total;
            for p in 0..parts {
                let v = if p + 1 == parts { left } else { total / parts };
                left -= v;
                pays.push((e, v));
            }
            self.coinbase(&pays, false);
        }
    }

    fn income(&mut self) {
        let users = &self.by_kind[kind_slot(EntityKind::User)];
        if self.cfg.daily_income == 0 || users.is_empty() || self.cfg.income_recipients == 0 {
            return;
        }
        let k = self.cfg.income_recipients;
        let each = (self.cfg.daily_income / k as u64).max(1);
        let picks: Vec<u32> = (0..k).map(|_| users[self.rng.gen_range(0..users.len())]).collect();
        let pays: Vec<(u32, u64)> = picks.into_iter().map(|e| (e, each)).collect();
        self.coinbase(&pays, true);
    }

    fn pick_payee(&mut self, payer: u32) -> Option<u32> {
        let g = self.group(payer);
        let weights = g.payees.clone().unwrap_or_else(|| g.kind.default_payees());
        let options: Vec<(EntityKind, f64)> = weights
            .into_iter()
            .filter(|(k, w)| {
                let n = self.by_kind[kind_slot(*k)].len();
                *w > 0.0 && (n >= 2 || (n == 1 && self.by_kind[kind_slot(*k)][0] != payer))
            })
            .collect();
        let kind = options.choose_weighted(&mut self.rng, |(_, w)| *w).ok()?.0;
        let pool = &self.by_kind[kind_slot(kind)];
        loop {
            let e = pool[self.rng.gen_range(0..pool.len())];
            if e != payer {
                return Some(e);
            }
        }
    }

    fn payment_amount(&mut self, payer: u32, upper: u64) -> Option<u64> {
        let lo = self.cfg.min_payment;
        let hi = self.cfg.max_payment.min(upper);
        if hi < lo {
            return None;
        }
        let x = self.rng.gen_range((lo as f64).ln()..=(hi as f64).ln()).exp();
        let mut v = (x as u64).clamp(lo, hi);
        if self.rng.gen_bool(self.group(payer).spend_round_prob) {
            let digits = (v as f64).log10().floor() as u32;
            if digits >= 2 {
                let n = self.rng.gen_range(2..=digits.min(7));
                let m = 10u64.pow(n);
                v = (v / m).max(1) * m;
            }
        }
        Some(v)
    }

    /// Chooses inputs covering `target` plus the fee for `n_out` outputs.
    fn select(&mut self, payer: u32, target: u64, n_out: usize) -> Option<(Vec<usize>, bool)> {
        let fp = self.entities[payer as usize].fp;
        let segwit_wanted = fp.uses_segwit && self.segwit_active();
        let utxos = &self.entities[payer as usize].utxos;
        let rng = &mut self.rng;
        if utxos.is_empty() {
            return None;
        }
        // legacy sizing is the larger one, so the final fee never exceeds this
        let need = |n: usize, _: bool| target + fee_for(&fp, false, n, n_out);
        let mut order: Vec<usize> = (0..utxos.len()).collect();
        match fp.coin_selection {
            CoinSelection::SmallestFirst => order.sort_by_key(|&i| (utxos[i].value, i)),
            CoinSelection::LargestFirst => order.sort_by_key(|&i| std::cmp::Reverse((utxos[i].value, i))),
            CoinSelection::Random => order.shuffle(rng),
        }
        let mut chosen: Vec<usize> = Vec::new();
        let mut sum = 0u64;
        for &i in &order {
            if chosen.len() >= MAX_INPUTS || sum >= need(chosen.len(), segwit_wanted) {
                break;
            }
            chosen.push(i);
            sum += utxos[i].value;
        }
        if sum < need(chosen.len(), segwit_wanted) {
            // too many small coins: retry with the largest ones
            order.sort_by_key(|&i| std::cmp::Reverse((utxos[i].value, i)));
            chosen.clear();
            sum = 0;
            for &i in &order {
                if chosen.len() >= MAX_INPUTS || sum >= need(chosen.len(), segwit_wanted) {
                    break;
                }
                chosen.push(i);
                sum += utxos[i].value;
            }
            if sum < need(chosen.len(), segwit_wanted) {
                return None;
            }
        }
        // drop inputs that are not needed, smallest first
        chosen.sort_by_key(|&i| (utxos[i].value, i));
        while chosen.len() > 1 && sum - utxos[chosen[0]].value >= need(chosen.len() - 1, segwit_wanted) {
            sum -= utxos[chosen[0]].value;
            chosen.remove(0);
        }
        let extra = rng.gen_bool(self.cfg.suboptimal_rate);
        if extra && chosen.len() < utxos.len() && chosen.len() < MAX_INPUTS {
            let rest: Vec<usize> = (0..utxos.len()).filter(|i| !chosen.contains(i)).collect();
            let pick = rest[rng.gen_range(0..rest.len())];
            if sum + utxos[pick].value >= need(chosen.len() + 1, segwit_wanted) {
                chosen.push(pick);
            }
        }
        Some((chosen, segwit_wanted))
    }

    fn take_inputs(&mut self, payer: u32, mut chosen: Vec<usize>) -> Vec<Utxo> {
        chosen.sort_unstable_by(|a, b| b.cmp(a));
        let ent = &mut self.entities[payer as usize];
        let mut out = Vec::with_capacity(chosen.len());
        for i in chosen {
            let u = ent.utxos.swap_remove(i);
            ent.balance -= u.value;
            out.push(u);
        }
        out
    }

    fn input(&self, u: &Utxo, sequence: u32) -> TxInput {
        TxInput {
            prev_tx: self.txs[u.tx as usize].txid.clone(),
            prev_index: u.index,
            sequence,
        }
    }

    /// Payment from `payer` to one or more payees, with change when above dust.
    fn spend(&mut self, payer: u32) {
        if self.cfg.wallet_switch_rate > 0.0 && self.rng.gen_bool(self.cfg.wallet_switch_rate) {
            let g = self.group(payer).clone();
            self.entities[payer as usize].fp = draw_fingerprint(&mut self.rng, &g);
        }
        let kind = self.entities[payer as usize].kind;
        let batch = kind == EntityKind::Exchange && self.rng.gen_bool(self.cfg.batch_rate);
        let k = if batch { self.rng.gen_range(3..=8) } else { 1 };
        let mut payees = Vec::with_capacity(k);
        for _ in 0..k {
            match self.pick_payee(payer) {
                Some(p) => payees.push(p),
                None => return,
            }
        }
        let balance = self.entities[payer as usize].balance;
        let budget = balance / 10 * 9 / k as u64;
        let mut amounts = Vec::with_capacity(k);
        for _ in 0..k {
            match self.payment_amount(payer, budget) {
                Some(v) => amounts.push(v),
                None => return,
            }
        }
        let target: u64 = amounts.iter().sum();
        let op_return = self.rng.gen_bool(self.cfg.op_return_rate);
        let n_out = k + 1 + op_return as usize;
        let Some((chosen, segwit_wanted)) = self.select(payer, target, n_out) else {
            return;
        };
        let inputs = self.take_inputs(payer, chosen);
        let fp = self.entities[payer as usize].fp;
        let in_sum: u64 = inputs.iter().map(|u| u.value).sum();
        let segwit = segwit_wanted
            && inputs
                .iter()
                .any(|u| self.addresses[u.addr as usize].script.permits_segwit());
        let fee = fee_for(&fp, segwit, inputs.len(), n_out);
        let change = in_sum - target - fee;

        let mut outs: Vec<(Option<u32>, u64, Option<u32>)> = Vec::new();
        for (p, v) in payees.iter().zip(&amounts) {
            let reuse = self.group(*p).receive_reuse_rate;
            let a = self.address_for(*p, reuse);
            outs.push((Some(a), *v, Some(*p)));
        }
        if change >= self.cfg.dust {
            let reuse = self.group(payer).reuse_rate;
            let a = self.address_for(payer, reuse);
            outs.push((Some(a), change, None));
        }
        if op_return {
            outs.push((None, 0, None));
        }

        let rbf = fp.signals_rbf && self.height >= self.cfg.activation.rbf;
        let locktime = if fp.sets_locktime { self.height.max(1) } else { 0 };
        let sequence = if rbf {
            0xFFFF_FFFD
        } else if locktime > 0 {
            0xFFFF_FFFE
        } else {
            0xFFFF_FFFF
        };
        let mut tx_inputs: Vec<TxInput> = inputs.iter().map(|u| self.input(u, sequence)).collect();
        if fp.sorts_bip69 {
            tx_inputs.sort_by(|a, b| (&a.prev_tx, a.prev_index).cmp(&(&b.prev_tx, b.prev_index)));
            outs.sort_by_key(|o| o.1);
        } else {
            tx_inputs.shuffle(&mut self.rng);
            outs.shuffle(&mut self.rng);
        }
        let version = if fp.version >= 2 && self.height >= self.cfg.activation.version2 {
            fp.version
        } else {
            1
        };
        let mut outputs = Vec::with_capacity(outs.len());
        let mut owners = Vec::with_capacity(outs.len());
        let mut change_index = None;
        for (i, (addr, v, payee)) in outs.iter().enumerate() {
            match addr {
                Some(a) => {
                    outputs.push(self.output(*a, *v));
                    owners.push(*a);
                    if payee.is_none() {
                        change_index = Some(i as u8);
                    }
                }
                None => {
                    let id = self.addresses.len() as u32;
                    let name = format!("opreturn{id:08x}");
                    self.addresses.push(Address {
                        name: name.clone(),
                        script: ScriptType::OpReturn,
                        owner: payer,
                    });
                    outputs.push(TxOutput {
                        value: 0,
                        address: name,
                        script_type: ScriptType::OpReturn,
                    });
                    owners.push(id);
                }
            }
        }
        let txid = self.next_txid();
        for (addr, v, payee) in &outs {
            if let (Some(_), Some(p)) = (addr, payee) {
                self.ledger.push(Payment {
                    txid: txid.clone(),
                    payer,
                    payee: *p,
                    value: *v,
                });
            }
        }
        self.change.push((txid.clone(), change_index));
        let tx = Transaction {
            txid,
            block_height: 0,
            block_time: 0,
            tx_index: 0,
            version,
            locktime,
            segwit,
            vsize: vsize(segwit, tx_inputs.len(), outputs.len()),
            coinbase: false,
            inputs: tx_inputs,
            outputs,
        };
        self.push_tx(tx, &owners);
    }

    /// Equal-value mix between five to seven users.
    fn coinjoin(&mut self) {
        let users = self.by_kind[kind_slot(EntityKind::User)].clone();
        if users.len() < 5 {
            return;
        }
        let n = self.rng.gen_range(5..=7.min(users.len()));
        let denom = 10u64.pow(self.rng.gen_range(5..=6));
        let share = 1_000u64;
        let parts: Vec<u32> = users.choose_multiple(&mut self.rng, n).copied().collect();
        let mut picks = Vec::new();
        for &e in &parts {
            let ent = &self.entities[e as usize];
            let best = (0..ent.utxos.len()).max_by_key(|&i| (ent.utxos[i].value, i));
            match best {
                Some(i) if ent.utxos[i].value >= denom + share => picks.push((e, i)),
                _ => return,
            }
        }
        let mut ins = Vec::new();
        let mut outs: Vec<(u32, u64)> = Vec::new();
        for (e, i) in picks {
            let u = self.take_inputs(e, vec![i]).pop().expect("one input");
            let a = self.fresh_address(e);
            outs.push((a, denom));
            let change = u.value - denom - share;
            if change >= self.cfg.dust {
                let c = self.fresh_address(e);
                outs.push((c, change));
            }
            ins.push(u);
        }
        let mut inputs: Vec<TxInput> = ins.iter().map(|u| self.input(u, 0xFFFF_FFFF)).collect();
        inputs.shuffle(&mut self.rng);
        outs.shuffle(&mut self.rng);
        let segwit = ins
            .iter()
            .any(|u| self.addresses[u.addr as usize].script.is_native_segwit());
        let outputs: Vec<TxOutput> = outs.iter().map(|(a, v)| self.output(*a, *v)).collect();
        let owners: Vec<u32> = outs.iter().map(|(a, _)| *a).collect();
        let txid = self.next_txid();
        self.change.push((txid.clone(), None));
        let tx = Transaction {
            txid,
            block_height: 0,
            block_time: 0,
            tx_index: 0,
            version: 1,
            locktime: 0,
            segwit,
            vsize: vsize(segwit, inputs.len(), outputs.len()),
            coinbase: false,
            inputs,
            outputs,
        };
        self.push_tx(tx, &owners);
    }

    fn set_height(&mut self, h: u32) {
        if h != self.height {
            self.height = h;
            self.tx_index = 0;
        }
    }

    fn run(mut self) -> SynthCorpus {
        self.fund();
        let bpd = self.cfg.blocks_per_day;
        for day in 0..self.cfg.days {
            let day_start = self.cfg.start_height + day * bpd;
            self.set_height(day_start);
            self.income();
            let mut events = Vec::new();
            for e in 0..self.entities.len() as u32 {
                let rate = self.group(e).activity_rate;
                let n = count_with_rate(&mut self.rng, rate);
                events.extend(std::iter::repeat_n(e, n).map(Event::Spend));
            }
            let cj = count_with_rate(&mut self.rng, self.cfg.coinjoins_per_day);
            events.extend((0..cj).map(|_| Event::CoinJoin));
            events.shuffle(&mut self.rng);
            let n = events.len().max(1) as u64;
            for (j, ev) in events.into_iter().enumerate() {
                let offset = (j as u64 * bpd as u64 / n) as u32;
                self.set_height(day_start + offset);
                match ev {
                    Event::Spend(e) => self.spend(e),
                    Event::CoinJoin => self.coinjoin(),
                }
            }
        }
        let header = CorpusHeader {
            activation: self.cfg.activation,
            ..CorpusHeader::default()
        };
        let entities = self
            .entities
            .iter()
            .enumerate()
            .map(|(i, e)| EntityInfo {
                entity_id: i as u32,
                kind: e.kind,
                name: e.name.clone(),
                category: e.category,
            })
            .collect();
        let owners = self
            .addresses
            .iter()
            .map(|a| (a.name.clone(), a.owner))
            .collect();
        SynthCorpus {
            header,
            transactions: self.txs,
            labels: SimLabels {
                entities,
                change: self.change,
                owners,
            },
            tags: self.tags,
            ledger: self.ledger,
        }
    }
}

/// Simulates the configured population; deterministic for fixed `(config, seed)`.
pub fn generate(config: &SynthConfig, seed: u64) -> Result<SynthCorpus, SynthError> {
    config.validate()?;
    Ok(Sim::new(config, seed).run())
}
