//! Live inventory of pre-distributed entanglement tuples: stochastic
//! generation per link, lifecycle state, reservation locks, and deadline
//! expiration.
//!
//! The ledger is single-writer: it is owned by the simulation event loop and
//! mutated in deterministic event order. Deadlines are absolute timestamps
//! fixed at generation (`t_gen + tau_q_p`), never sliding windows.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type TupleId = u64;
pub type TxnId = u64;
pub type ModuleId = u32;

/// Unordered module pair, stored canonically as (min, max).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LinkKey(pub ModuleId, pub ModuleId);

impl LinkKey {
    pub fn new(a: ModuleId, b: ModuleId) -> Self {
        if a <= b {
            Self(a, b)
        } else {
            Self(b, a)
        }
    }
}

/// Lifecycle state of one entanglement tuple.
///
/// Legal transitions: Available -> Reserved, Reserved -> Consumed,
/// Reserved -> Available (rollback release), Available -> Expired,
/// Reserved -> Expired. Consumed and Expired are terminal.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TupleState {
    Available,
    Reserved(TxnId),
    Consumed,
    Expired,
}

/// Classical metadata record for one pre-distributed entangled pair.
#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementTuple {
    pub id: TupleId,
    pub link: LinkKey,
    pub fidelity: f64,
    pub t_gen_ns: u64,
    /// Absolute expiration time, `t_gen + tau_q_p`.
    pub deadline_ns: u64,
    pub state: TupleState,
    /// History flag: the tuple was released back to Available by a rollback.
    pub released_back: bool,
    pub consumed_at_ns: Option<u64>,
}

/// Heralded-fidelity distribution for a link's generated tuples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FidelityDist {
    Fixed(f64),
    Uniform { lo: f64, hi: f64 },
}

impl FidelityDist {
    /// Maps one unit draw through the distribution. A draw is consumed for
    /// every successful generation regardless of variant, keeping traces
    /// structurally identical across fidelity configurations.
    fn sample(&self, unit: f64) -> f64 {
        match *self {
            FidelityDist::Fixed(f) => f,
            FidelityDist::Uniform { lo, hi } => lo + (hi - lo) * unit,
        }
    }

    pub fn validate(&self) -> Result<(), LedgerError> {
        let ok = |f: f64| f > 0.0 && f <= 1.0;
        let valid = match *self {
            FidelityDist::Fixed(f) => ok(f),
            FidelityDist::Uniform { lo, hi } => ok(lo) && ok(hi) && lo <= hi,
        };
        if valid {
            Ok(())
        } else {
            Err(LedgerError::BadLinkConfig("fidelity must lie in (0, 1]".into()))
        }
    }
}

/// Generation parameters for one entanglement link. Multi-hop repeater
/// chains are modeled as a single link with composite efficiency.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub link: LinkKey,
    pub attempt_period_ns: u64,
    pub eta_trans: f64,
    pub fidelity: FidelityDist,
}

impl LinkConfig {
    pub fn validate(&self) -> Result<(), LedgerError> {
        if self.link.0 == self.link.1 {
            return Err(LedgerError::BadLinkConfig("link endpoints must differ".into()));
        }
        if self.attempt_period_ns == 0 {
            return Err(LedgerError::BadLinkConfig("attempt period must be positive".into()));
        }
        if !(self.eta_trans > 0.0 && self.eta_trans <= 1.0) {
            return Err(LedgerError::BadLinkConfig(format!(
                "eta_trans must lie in (0, 1], got {}",
                self.eta_trans
            )));
        }
        self.fidelity.validate()
    }
}

/// Tuple selection policy for `query`. Youngest-first maximizes the temporal
/// margin available to the Reserve pre-check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelectionPolicy {
    #[default]
    YoungestFirst,
    OldestFirst,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LedgerError {
    #[error("unknown tuple id {0}")]
    UnknownTuple(TupleId),
    #[error("protocol violation: tuple {tuple} is {actual}, expected {expected}")]
    ProtocolViolation {
        tuple: TupleId,
        expected: &'static str,
        actual: String,
    },
    #[error("invalid link config: {0}")]
    BadLinkConfig(String),
}

/// Outcome of a reservation attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReserveResult {
    Ok,
    /// Already reserved by another transaction; no state change.
    Conflict(TxnId),
    /// Deadline passed; the tuple has been moved to Expired.
    Expired,
}

/// A tuple expired by a sweep, with the state it was in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpiredTuple {
    pub tuple: TupleId,
    /// Owner transaction if the tuple was Reserved when it expired.
    pub owner: Option<TxnId>,
}

/// End-of-run tuple accounting. Conservation requires
/// `generated == consumed + expired + available` once nothing is reserved.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct LedgerCounts {
    pub generated: u64,
    pub available: u64,
    pub reserved: u64,
    pub consumed: u64,
    pub expired: u64,
    pub released_back: u64,
}

#[derive(Debug, Clone)]
pub struct Ledger {
    tuples: Vec<EntanglementTuple>,
    /// Available tuples per link, keyed (deadline, id) for policy scans.
    available: BTreeMap<LinkKey, BTreeSet<(u64, TupleId)>>,
    /// All Available/Reserved tuples keyed (deadline, id) for sweeps.
    live: BTreeSet<(u64, TupleId)>,
    /// Deadline horizon applied at generation.
    tau_q_p_ns: u64,
    policy: SelectionPolicy,
    /// Minimum heralded fidelity accepted by `query` (0 disables the filter).
    min_fidelity: f64,
    released_back: u64,
}

impl Ledger {
    pub fn new(tau_q_p_ns: u64, policy: SelectionPolicy, min_fidelity: f64) -> Self {
        Self {
            tuples: Vec::new(),
            available: BTreeMap::new(),
            live: BTreeSet::new(),
            tau_q_p_ns,
            policy,
            min_fidelity,
            released_back: 0,
        }
    }

    pub fn tuple(&self, id: TupleId) -> Option<&EntanglementTuple> {
        self.tuples.get(id as usize)
    }

    pub fn tuples(&self) -> &[EntanglementTuple] {
        &self.tuples
    }

    /// One generation attempt on `link`. Consumes exactly one draw from
    /// `rng` per attempt, plus one fidelity draw when successful, so traces
    /// are reproducible. Success probability is the link's `eta_trans`.
    pub fn attempt_generate(
        &mut self,
        link: &LinkConfig,
        now_ns: u64,
        rng: &mut ChaCha8Rng,
    ) -> Option<TupleId> {
        let roll: f64 = rng.random();
        if roll >= link.eta_trans {
            return None;
        }
        let unit: f64 = rng.random();
        let id = self.tuples.len() as TupleId;
        let deadline = now_ns + self.tau_q_p_ns;
        self.tuples.push(EntanglementTuple {
            id,
            link: link.link,
            fidelity: link.fidelity.sample(unit),
            t_gen_ns: now_ns,
            deadline_ns: deadline,
            state: TupleState::Available,
            released_back: false,
            consumed_at_ns: None,
        });
        self.available.entry(link.link).or_default().insert((deadline, id));
        self.live.insert((deadline, id));
        Some(id)
    }

    /// Returns an Available, unexpired tuple on `link` chosen by the
    /// configured selection policy (youngest-first: maximum deadline, ties
    /// to the smallest id). Tuples found past their deadline are swept to
    /// Expired on the way.
    pub fn query(&mut self, link: LinkKey, now_ns: u64) -> Option<TupleId> {
        self.prune_expired_available(link, now_ns);
        let set = self.available.get(&link)?;
        let pick = |set: &BTreeSet<(u64, TupleId)>, deadline: u64| -> Option<TupleId> {
            set.range((deadline, 0)..=(deadline, TupleId::MAX))
                .map(|&(_, id)| id)
                .next()
        };
        if self.min_fidelity <= 0.0 {
            let deadline = match self.policy {
                SelectionPolicy::YoungestFirst => set.iter().next_back()?.0,
                SelectionPolicy::OldestFirst => set.iter().next()?.0,
            };
            return pick(set, deadline);
        }
        // Fidelity-filtered scan in policy order.
        let candidates: Box<dyn Iterator<Item = &(u64, TupleId)>> = match self.policy {
            SelectionPolicy::YoungestFirst => Box::new(set.iter().rev()),
            SelectionPolicy::OldestFirst => Box::new(set.iter()),
        };
        let mut best: Option<(u64, TupleId)> = None;
        for &(deadline, id) in candidates {
            if let Some((found, _)) = best {
                if deadline != found {
                    break;
                }
            }
            if self.tuples[id as usize].fidelity >= self.min_fidelity {
                best = Some(match best {
                    // Same deadline: keep the smallest id.
                    Some((d, prev)) => (d, prev.min(id)),
                    None => (deadline, id),
                });
            }
        }
        best.map(|(_, id)| id)
    }

    /// Locks `tuple` for `txn`. Expired tuples are swept on contact.
    pub fn reserve(&mut self, tuple: TupleId, txn: TxnId, now_ns: u64) -> Result<ReserveResult, LedgerError> {
        let entry = self
            .tuples
            .get(tuple as usize)
            .ok_or(LedgerError::UnknownTuple(tuple))?;
        match entry.state {
            TupleState::Available => {
                if entry.deadline_ns <= now_ns {
                    self.expire_one(tuple);
                    return Ok(ReserveResult::Expired);
                }
                let (deadline, link) = (entry.deadline_ns, entry.link);
                self.tuples[tuple as usize].state = TupleState::Reserved(txn);
                self.available.get_mut(&link).map(|s| s.remove(&(deadline, tuple)));
                Ok(ReserveResult::Ok)
            }
            TupleState::Reserved(owner) if owner != txn => Ok(ReserveResult::Conflict(owner)),
            ref state => Err(LedgerError::ProtocolViolation {
                tuple,
                expected: "Available",
                actual: format!("{state:?}"),
            }),
        }
    }

    /// Rollback release: the tuple returns to Available with its original
    /// deadline (deadlines are absolute, so remaining lifetime is unchanged).
    pub fn release(&mut self, tuple: TupleId, txn: TxnId) -> Result<(), LedgerError> {
        let entry = self
            .tuples
            .get(tuple as usize)
            .ok_or(LedgerError::UnknownTuple(tuple))?;
        match entry.state {
            TupleState::Reserved(owner) if owner == txn => {
                let (deadline, link) = (entry.deadline_ns, entry.link);
                let entry = &mut self.tuples[tuple as usize];
                entry.state = TupleState::Available;
                entry.released_back = true;
                self.available.entry(link).or_default().insert((deadline, tuple));
                self.released_back += 1;
                Ok(())
            }
            ref state => Err(LedgerError::ProtocolViolation {
                tuple,
                expected: "Reserved by caller",
                actual: format!("{state:?}"),
            }),
        }
    }

    /// Definitive consumption. Guards the no-post-deadline-consumption
    /// invariant: consuming at or after the deadline is refused and the
    /// tuple expires instead (the caller must take its expiry path).
    pub fn consume(&mut self, tuple: TupleId, txn: TxnId, now_ns: u64) -> Result<(), LedgerError> {
        let entry = self
            .tuples
            .get(tuple as usize)
            .ok_or(LedgerError::UnknownTuple(tuple))?;
        match entry.state {
            TupleState::Reserved(owner) if owner == txn => {
                if entry.deadline_ns <= now_ns {
                    self.expire_one(tuple);
                    return Err(LedgerError::ProtocolViolation {
                        tuple,
                        expected: "unexpired reservation",
                        actual: "deadline passed".into(),
                    });
                }
                let deadline = entry.deadline_ns;
                let entry = &mut self.tuples[tuple as usize];
                entry.state = TupleState::Consumed;
                entry.consumed_at_ns = Some(now_ns);
                self.live.remove(&(deadline, tuple));
                Ok(())
            }
            ref state => Err(LedgerError::ProtocolViolation {
                tuple,
                expected: "Reserved by caller",
                actual: format!("{state:?}"),
            }),
        }
    }

    /// Expires every Available or Reserved tuple whose deadline has passed.
    /// Reserved ones are reported with their owner so the protocol engine
    /// can run its degradation path.
    pub fn expire_sweep(&mut self, now_ns: u64) -> Vec<ExpiredTuple> {
        let mut out = Vec::new();
        while let Some(&(deadline, id)) = self.live.iter().next() {
            if deadline > now_ns {
                break;
            }
            let owner = match self.tuples[id as usize].state {
                TupleState::Reserved(txn) => Some(txn),
                _ => None,
            };
            self.expire_one(id);
            out.push(ExpiredTuple { tuple: id, owner });
        }
        out
    }

    /// Marks one tuple Expired and drops it from the live indexes.
    pub fn expire_one(&mut self, tuple: TupleId) {
        let entry = &self.tuples[tuple as usize];
        let (deadline, link, state) = (entry.deadline_ns, entry.link, entry.state);
        match state {
            TupleState::Available => {
                self.available.get_mut(&link).map(|s| s.remove(&(deadline, tuple)));
            }
            TupleState::Reserved(_) => {}
            _ => return,
        }
        self.live.remove(&(deadline, tuple));
        self.tuples[tuple as usize].state = TupleState::Expired;
    }

    fn prune_expired_available(&mut self, link: LinkKey, now_ns: u64) {
        let Some(set) = self.available.get_mut(&link) else {
            return;
        };
        while let Some(&(deadline, id)) = set.iter().next() {
            if deadline > now_ns {
                break;
            }
            set.remove(&(deadline, id));
            self.live.remove(&(deadline, id));
            self.tuples[id as usize].state = TupleState::Expired;
        }
    }

    pub fn counts(&self) -> LedgerCounts {
        let mut c = LedgerCounts {
            generated: self.tuples.len() as u64,
            released_back: self.released_back,
            ..LedgerCounts::default()
        };
        for t in &self.tuples {
            match t.state {
                TupleState::Available => c.available += 1,
                TupleState::Reserved(_) => c.reserved += 1,
                TupleState::Consumed => c.consumed += 1,
                TupleState::Expired => c.expired += 1,
            }
        }
        c
    }

    /// Observable resource state at `now_ns`, for rollback auditing. Two
    /// normalizations keep the comparison about reservation side effects
    /// only: history flags are excluded (a rolled-back reservation
    /// legitimately sets `released_back`), and live tuples whose deadline
    /// has passed read as Expired whether or not a sweep or lazy check has
    /// materialized the transition yet.
    pub fn audit_digest(&self, now_ns: u64) -> Vec<(TupleId, LinkKey, u64, u64, TupleState)> {
        self.tuples
            .iter()
            .map(|t| {
                let state = match t.state {
                    TupleState::Available | TupleState::Reserved(_) if t.deadline_ns <= now_ns => {
                        TupleState::Expired
                    }
                    s => s,
                };
                (t.id, t.link, t.t_gen_ns, t.deadline_ns, state)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn link(a: ModuleId, b: ModuleId, eta: f64) -> LinkConfig {
        LinkConfig {
            link: LinkKey::new(a, b),
            attempt_period_ns: 1_000,
            eta_trans: eta,
            fidelity: FidelityDist::Fixed(0.97),
        }
    }

    fn ledger() -> Ledger {
        Ledger::new(50_000, SelectionPolicy::YoungestFirst, 0.0)
    }

    #[test]
    fn certain_success_always_generates() {
        let mut led = ledger();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for i in 0..100 {
            let id = led.attempt_generate(&link(0, 1, 1.0), i * 10, &mut rng);
            assert!(id.is_some());
        }
        assert_eq!(led.counts().generated, 100);
    }

    #[test]
    fn near_zero_eta_rarely_generates() {
        let mut led = ledger();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lk = link(0, 1, 1e-9);
        let produced: u64 = (0..1_000)
            .filter(|&i| led.attempt_generate(&lk, i, &mut rng).is_some())
            .count() as u64;
        // Expected count 1e-6; zero successes is the overwhelmingly likely draw.
        assert_eq!(produced, 0);
    }

    #[test]
    fn generation_count_matches_binomial_oracle() {
        // Independent oracle: successes over 1e5 Bernoulli(0.1) attempts fall
        // within 3 sigma of the mean, sigma = sqrt(n p (1-p)) ~ 94.87.
        let n = 100_000u64;
        let expected = 10_000.0;
        let sigma = (n as f64 * 0.1 * 0.9).sqrt();
        let mut led = Ledger::new(u64::MAX / 2, SelectionPolicy::YoungestFirst, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let lk = link(0, 1, 0.1);
        let produced: u64 = (0..n)
            .filter(|&i| led.attempt_generate(&lk, i, &mut rng).is_some())
            .count() as u64;
        assert!(
            (produced as f64 - expected).abs() <= 3.0 * sigma,
            "produced {produced}, expected {expected} +- {:.1}",
            3.0 * sigma
        );
    }

    #[test]
    fn generation_trace_is_reproducible() {
        let trace = |seed: u64| {
            let mut led = ledger();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let lk = LinkConfig {
                fidelity: FidelityDist::Uniform { lo: 0.9, hi: 0.99 },
                ..link(0, 1, 0.3)
            };
            for i in 0..5_000 {
                led.attempt_generate(&lk, i * 100, &mut rng);
            }
            led.tuples().to_vec()
        };
        assert_eq!(trace(11), trace(11));
        assert_ne!(trace(11), trace(12));
    }

    #[test]
    fn query_prefers_freshest_deadline() {
        let mut led = ledger();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let lk = link(0, 1, 1.0);
        assert_eq!(led.query(lk.link, 0), None);
        let a = led.attempt_generate(&lk, 50, &mut rng).unwrap(); // deadline 50_050
        let b = led.attempt_generate(&lk, 150, &mut rng).unwrap(); // deadline 50_150
        assert_eq!(led.query(lk.link, 200), Some(b));
        // Oldest-first picks the other one.
        let mut oldest = Ledger::new(50_000, SelectionPolicy::OldestFirst, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a2 = oldest.attempt_generate(&lk, 50, &mut rng).unwrap();
        oldest.attempt_generate(&lk, 150, &mut rng).unwrap();
        assert_eq!(oldest.query(lk.link, 200), Some(a2));
        let _ = a;
    }

    #[test]
    fn query_sweeps_expired_tuples() {
        let mut led = ledger();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let lk = link(0, 1, 1.0);
        let id = led.attempt_generate(&lk, 0, &mut rng).unwrap(); // deadline 50_000
        assert_eq!(led.query(lk.link, 50_000), None);
        assert_eq!(led.tuple(id).unwrap().state, TupleState::Expired);
    }

    #[test]
    fn query_honors_fidelity_floor() {
        let mut led = Ledger::new(50_000, SelectionPolicy::YoungestFirst, 0.95);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let low = LinkConfig {
            fidelity: FidelityDist::Fixed(0.5),
            ..link(0, 1, 1.0)
        };
        let high = LinkConfig {
            fidelity: FidelityDist::Fixed(0.99),
            ..link(0, 1, 1.0)
        };
        led.attempt_generate(&low, 100, &mut rng).unwrap(); // fresher, too dim
        let good = led.attempt_generate(&high, 50, &mut rng).unwrap();
        assert_eq!(led.query(high.link, 200), Some(good));
    }

    #[test]
    fn reserve_release_consume_lifecycle() {
        let mut led = ledger();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let lk = link(0, 1, 1.0);
        let id = led.attempt_generate(&lk, 0, &mut rng).unwrap();

        assert_eq!(led.reserve(id, 1, 10).unwrap(), ReserveResult::Ok);
        assert_eq!(led.reserve(id, 2, 11).unwrap(), ReserveResult::Conflict(1));
        // Re-reserving by the owner is a protocol violation, not a conflict.
        assert!(led.reserve(id, 1, 11).is_err());

        led.release(id, 1).unwrap();
        assert_eq!(led.tuple(id).unwrap().state, TupleState::Available);
        assert!(led.tuple(id).unwrap().released_back);
        assert_eq!(led.tuple(id).unwrap().deadline_ns, 50_000);

        assert_eq!(led.reserve(id, 2, 20).unwrap(), ReserveResult::Ok);
        led.consume(id, 2, 30).unwrap();
        assert_eq!(led.tuple(id).unwrap().state, TupleState::Consumed);
        assert_eq!(led.tuple(id).unwrap().consumed_at_ns, Some(30));
        // Terminal: no further transitions.
        assert!(led.reserve(id, 3, 40).is_err());
        assert!(led.consume(id, 2, 40).is_err());
    }

    #[test]
    fn reserve_past_deadline_expires() {
        let mut led = ledger();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let id = led.attempt_generate(&link(0, 1, 1.0), 0, &mut rng).unwrap();
        assert_eq!(led.reserve(id, 1, 50_000).unwrap(), ReserveResult::Expired);
        assert_eq!(led.tuple(id).unwrap().state, TupleState::Expired);
    }

    #[test]
    fn consume_at_deadline_is_refused_and_expires() {
        let mut led = ledger();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let id = led.attempt_generate(&link(0, 1, 1.0), 0, &mut rng).unwrap();
        led.reserve(id, 1, 10).unwrap();
        assert!(led.consume(id, 1, 50_000).is_err());
        assert_eq!(led.tuple(id).unwrap().state, TupleState::Expired);
        assert_eq!(led.tuple(id).unwrap().consumed_at_ns, None);
    }

    #[test]
    fn foreign_release_and_consume_are_violations() {
        let mut led = ledger();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let id = led.attempt_generate(&link(0, 1, 1.0), 0, &mut rng).unwrap();
        led.reserve(id, 1, 10).unwrap();
        assert!(led.release(id, 2).is_err());
        assert!(led.consume(id, 2, 20).is_err());
        assert!(matches!(led.reserve(999, 1, 0), Err(LedgerError::UnknownTuple(999))));
    }

    #[test]
    fn sweep_expires_available_and_reserved() {
        let mut led = ledger();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let lk = link(0, 1, 1.0);
        let a = led.attempt_generate(&lk, 0, &mut rng).unwrap(); // deadline 50_000
        let b = led.attempt_generate(&lk, 10_000, &mut rng).unwrap(); // deadline 60_000
        let c = led.attempt_generate(&lk, 40_000, &mut rng).unwrap(); // deadline 90_000
        led.reserve(b, 7, 20_000).unwrap();

        let swept = led.expire_sweep(60_000);
        assert_eq!(
            swept,
            vec![
                ExpiredTuple { tuple: a, owner: None },
                ExpiredTuple { tuple: b, owner: Some(7) },
            ]
        );
        assert_eq!(led.tuple(c).unwrap().state, TupleState::Available);
        assert!(led.expire_sweep(60_000).is_empty());
    }

    #[test]
    fn conservation_over_mixed_history() {
        let mut led = ledger();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let lk = link(0, 1, 0.8);
        let mut reserved = Vec::new();
        for i in 0..500u64 {
            if let Some(id) = led.attempt_generate(&lk, i * 200, &mut rng) {
                if id % 3 == 0 {
                    led.reserve(id, id, i * 200 + 1).unwrap();
                    reserved.push((id, i * 200 + 1));
                }
            }
        }
        for &(id, t) in &reserved {
            match id % 2 {
                0 => led.consume(id, id, t + 10).unwrap(),
                _ => led.release(id, id).unwrap(),
            }
        }
        led.expire_sweep(30_000);
        let c = led.counts();
        assert_eq!(c.generated, c.available + c.reserved + c.consumed + c.expired);
        assert_eq!(c.reserved, 0);
        // No post-deadline consumption anywhere in the history.
        for t in led.tuples() {
            if let Some(at) = t.consumed_at_ns {
                assert!(at < t.deadline_ns);
            }
        }
    }
}
