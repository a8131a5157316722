//! Deterministic discrete-event simulation kernel.
//!
//! The clock is integer nanoseconds; all analytic reals are rounded half-up
//! at the scheduling boundary. Periodic sources (generation attempts,
//! arrivals, sweeps, snapshots) stop scheduling past `duration_ns`, then the
//! queue drains so every in-flight transaction reaches a terminal state and
//! tuple conservation holds exactly at the end of every run.

pub mod config;
pub mod event;
pub mod rng;

use serde::Serialize;

use crate::ledger::{Ledger, LedgerCounts, LinkKey, ModuleId, TupleId, TxnId};
use crate::protocol::{
    self, AbortReason, FailureRecord, LatencyEstimate, ProtocolError, Stage, StagePlan,
    Transaction, TxnState,
};
use crate::timing::TimingParams;
use config::{Selection, SimConfig, WorkloadConfig};
use event::{Event, EventQueue, Payload};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rng::StreamSplitter;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("config error: {0}")]
    Config(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

impl From<ProtocolError> for SimError {
    fn from(e: ProtocolError) -> Self {
        SimError::Invariant(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct EventCounts {
    pub generation_attempts: u64,
    pub arrivals: u64,
    pub stage_completes: u64,
    pub sweeps: u64,
    pub snapshots: u64,
}

/// Terminal record for one transaction.
#[derive(Debug, Clone, PartialEq)]
pub struct TxnOutcome {
    pub txn_id: TxnId,
    pub participants: Vec<ModuleId>,
    pub state: TxnState,
    pub created_ns: u64,
    pub finished_ns: u64,
    pub n_links: u32,
    /// Realized coordination-stage latency (committed transactions).
    pub tau_c_ns: Option<u64>,
    /// Protocol handshake latency (Query-stage delay) accrued before commit.
    pub tau_p_ns: Option<u64>,
    pub abort_reason: Option<AbortReason>,
}

/// Final state of one tuple, for conservation and deadline audits.
#[derive(Debug, Clone, PartialEq)]
pub struct TupleSnapshot {
    pub id: TupleId,
    pub link: LinkKey,
    pub t_gen_ns: u64,
    pub deadline_ns: u64,
    pub state: &'static str,
    pub consumed_at_ns: Option<u64>,
    pub released_back: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Snapshot {
    pub time_ns: u64,
    pub generated: u64,
    pub available: u64,
    pub reserved: u64,
    pub consumed: u64,
    pub expired: u64,
    pub committed: u64,
    pub aborted_temporal: u64,
    pub aborted_physical: u64,
}

/// Atomic-rollback audit tally (populated when `audit_rollback` is set).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct AuditSummary {
    pub checked_aborts: u64,
    pub violations: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub duration_ns: u64,
    /// Time of the last processed event (>= duration when draining).
    pub end_ns: u64,
    pub event_counts: EventCounts,
    /// Terminal transaction records in emission order.
    pub outcomes: Vec<TxnOutcome>,
    /// Failure records in emission order.
    pub records: Vec<FailureRecord>,
    pub ledger_counts: LedgerCounts,
    pub tuples: Vec<TupleSnapshot>,
    pub snapshots: Vec<Snapshot>,
    pub audit: AuditSummary,
    pub timing: TimingParams,
    pub module_names: Vec<String>,
}

impl RunResult {
    pub fn module_name(&self, id: ModuleId) -> &str {
        &self.module_names[id as usize]
    }

    pub fn committed(&self) -> impl Iterator<Item = &TxnOutcome> {
        self.outcomes.iter().filter(|o| o.state == TxnState::Committed)
    }
}

/// A committed transaction whose realized coordination latency reached the
/// high-percentile coherence deadline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimingViolation {
    pub txn_id: TxnId,
    pub tau_c_ns: u64,
    pub tau_q_p_ns: u64,
}

/// Checks the hard `tau_c < tau_q_p` precondition over a completed run: any
/// committed transaction whose coordination stage took at least `tau_q_p` is
/// flagged. Empty whenever the topology diameter respects the locality bound.
pub fn assert_timing_contract(result: &RunResult, timing: &TimingParams) -> Vec<TimingViolation> {
    result
        .committed()
        .filter_map(|o| {
            let tau_c = o.tau_c_ns?;
            (tau_c >= timing.tau_q_p_ns).then_some(TimingViolation {
                txn_id: o.txn_id,
                tau_c_ns: tau_c,
                tau_q_p_ns: timing.tau_q_p_ns,
            })
        })
        .collect()
}

/// Runs one scenario to completion. Identical config + seed produce an
/// identical result, event for event.
pub fn run_scenario(cfg: &SimConfig) -> Result<RunResult, SimError> {
    cfg.validate().map_err(SimError::Config)?;
    Kernel::new(cfg).run()
}

struct InFlight {
    plan: StagePlan,
    jitter_rng: ChaCha8Rng,
    fault_rng: ChaCha8Rng,
    retries_left: u32,
}

struct KernelTxn {
    txn: Transaction,
    inflight: Option<Box<InFlight>>,
}

struct Kernel<'a> {
    cfg: &'a SimConfig,
    queue: EventQueue,
    ledger: Ledger,
    splitter: StreamSplitter,
    link_rngs: Vec<ChaCha8Rng>,
    workload_rng: ChaCha8Rng,
    txns: Vec<KernelTxn>,
    outcomes: Vec<TxnOutcome>,
    records: Vec<FailureRecord>,
    snapshots: Vec<Snapshot>,
    counts: EventCounts,
    audit: AuditSummary,
    group_cursor: usize,
    committed: u64,
    aborted_temporal: u64,
    aborted_physical: u64,
    clock: u64,
}

impl<'a> Kernel<'a> {
    fn new(cfg: &'a SimConfig) -> Self {
        let splitter = StreamSplitter::new(cfg.seed);
        let link_rngs = cfg
            .links
            .iter()
            .enumerate()
            .map(|(i, link)| {
                let occurrence = cfg.links[..i].iter().filter(|l| l.link == link.link).count();
                splitter.link_stream(link.link, occurrence)
            })
            .collect();
        let mut kernel = Self {
            cfg,
            queue: EventQueue::new(),
            ledger: Ledger::new(cfg.timing.tau_q_p_ns, cfg.selection_policy, cfg.min_fidelity),
            splitter,
            link_rngs,
            workload_rng: splitter.workload_stream(),
            txns: Vec::new(),
            outcomes: Vec::new(),
            records: Vec::new(),
            snapshots: Vec::new(),
            counts: EventCounts::default(),
            audit: AuditSummary::default(),
            group_cursor: 0,
            committed: 0,
            aborted_temporal: 0,
            aborted_physical: 0,
            clock: 0,
        };
        kernel.schedule_initial();
        kernel
    }

    fn schedule_initial(&mut self) {
        let duration = self.cfg.duration_ns;
        for (i, link) in self.cfg.links.iter().enumerate() {
            if link.attempt_period_ns <= duration {
                self.queue
                    .push(link.attempt_period_ns, Payload::GenerationAttempt { link_index: i });
            }
        }
        match &self.cfg.workload {
            WorkloadConfig::None => {}
            WorkloadConfig::FixedRate { period_ns, .. } => {
                if *period_ns <= duration {
                    self.queue.push(
                        *period_ns,
                        Payload::TransactionArrival {
                            participants: None,
                            retries_left: self.cfg.retry.count,
                        },
                    );
                }
            }
            WorkloadConfig::Trace(arrivals) => {
                for a in arrivals {
                    self.queue.push(
                        a.at_ns,
                        Payload::TransactionArrival {
                            participants: Some(a.participants.clone()),
                            retries_left: self.cfg.retry.count,
                        },
                    );
                }
            }
        }
        if self.cfg.sweep_period_ns <= duration {
            self.queue.push(self.cfg.sweep_period_ns, Payload::ExpireSweep);
        }
        if let Some(period) = self.cfg.snapshot_period_ns {
            if period <= duration {
                self.queue.push(period, Payload::MetricsSnapshot);
            }
        }
    }

    fn run(mut self) -> Result<RunResult, SimError> {
        while let Some(Event { time_ns, payload, .. }) = self.queue.pop() {
            if time_ns < self.clock {
                return Err(SimError::Invariant(format!(
                    "event clock regressed from {} to {}",
                    self.clock, time_ns
                )));
            }
            self.clock = time_ns;
            match payload {
                Payload::GenerationAttempt { link_index } => self.on_generation(link_index),
                Payload::TransactionArrival { participants, retries_left } => {
                    self.on_arrival(participants, retries_left)?
                }
                Payload::StageComplete { txn, stage } => self.on_stage(txn, stage)?,
                Payload::ExpireSweep => {
                    self.counts.sweeps += 1;
                    self.run_sweep()?;
                    self.reschedule(Payload::ExpireSweep, self.cfg.sweep_period_ns);
                }
                Payload::MetricsSnapshot => {
                    self.counts.snapshots += 1;
                    self.take_snapshot();
                    if let Some(period) = self.cfg.snapshot_period_ns {
                        self.reschedule(Payload::MetricsSnapshot, period);
                    }
                }
            }
        }
        self.finalize()
    }

    fn reschedule(&mut self, payload: Payload, period_ns: u64) {
        let next = self.clock + period_ns;
        if next <= self.cfg.duration_ns {
            self.queue.push(next, payload);
        }
    }

    fn on_generation(&mut self, link_index: usize) {
        self.counts.generation_attempts += 1;
        let link = &self.cfg.links[link_index];
        self.ledger
            .attempt_generate(link, self.clock, &mut self.link_rngs[link_index]);
        self.reschedule(Payload::GenerationAttempt { link_index }, link.attempt_period_ns);
    }

    fn draw_uniform_pair(&mut self) -> Vec<ModuleId> {
        let m = self.cfg.topology.module_count() as u32;
        let i = self.workload_rng.random_range(0..m);
        let mut j = self.workload_rng.random_range(0..m - 1);
        if j >= i {
            j += 1;
        }
        vec![i, j]
    }

    fn on_arrival(
        &mut self,
        participants: Option<Vec<ModuleId>>,
        retries_left: u32,
    ) -> Result<(), SimError> {
        self.counts.arrivals += 1;
        let participants = match participants {
            Some(p) => p,
            // A periodic arrival: schedule the next one, then draw this one's
            // participants per the selection rule.
            None => {
                if let WorkloadConfig::FixedRate { period_ns, .. } = &self.cfg.workload {
                    self.reschedule(
                        Payload::TransactionArrival {
                            participants: None,
                            retries_left: self.cfg.retry.count,
                        },
                        *period_ns,
                    );
                }
                match &self.cfg.workload {
                    WorkloadConfig::FixedRate { selection: Selection::UniformPairs, .. } => {
                        self.draw_uniform_pair()
                    }
                    WorkloadConfig::FixedRate { selection: Selection::Groups(groups), .. } => {
                        let g = groups[self.group_cursor % groups.len()].clone();
                        self.group_cursor += 1;
                        g
                    }
                    _ => {
                        return Err(SimError::Invariant(
                            "drawn arrival without a fixed-rate workload".into(),
                        ))
                    }
                }
            }
        };

        let txn_id = self.txns.len() as TxnId;
        let mut txn = Transaction::new(txn_id, participants, self.clock)
            .map_err(|e| SimError::Invariant(e.to_string()))?;
        let plan = protocol::stage_plan(
            &txn.participants,
            &self.cfg.topology,
            &self.cfg.timing,
            &self.cfg.protocol,
        )?;
        let estimate = LatencyEstimate {
            tau_exec_star_ns: protocol::round_ns(
                self.cfg.protocol.multiplier * plan.nominal_total_ns(),
            ),
            percentile_multiplier: self.cfg.protocol.multiplier,
        };

        let digest_before = self.cfg.audit_rollback.then(|| self.ledger.audit_digest(self.clock));

        let outcome = protocol::reserve_phase(
            &mut txn,
            &mut self.ledger,
            self.clock,
            estimate,
            self.cfg.protocol.reserve_latency_ns,
        )?;
        match outcome {
            protocol::ReserveOutcome::Reserved => {
                self.queue.push(
                    self.clock + self.cfg.protocol.reserve_latency_ns,
                    Payload::StageComplete { txn: txn_id, stage: Stage::Query },
                );
                self.txns.push(KernelTxn {
                    txn,
                    inflight: Some(Box::new(InFlight {
                        plan,
                        jitter_rng: self.splitter.jitter_stream(txn_id),
                        fault_rng: self.splitter.fault_stream(txn_id),
                        retries_left,
                    })),
                });
            }
            protocol::ReserveOutcome::AbortedTemporal { records, .. } => {
                if let Some(before) = digest_before {
                    self.audit.checked_aborts += 1;
                    if before != self.ledger.audit_digest(self.clock) {
                        self.audit.violations += 1;
                    }
                }
                self.records.extend(records);
                self.txns.push(KernelTxn { txn, inflight: None });
                self.emit_outcome(txn_id);
                self.maybe_retry(txn_id, retries_left);
            }
        }
        Ok(())
    }

    fn maybe_retry(&mut self, txn_id: TxnId, retries_left: u32) {
        if retries_left == 0 {
            return;
        }
        let at = self.clock + self.cfg.retry.spacing_ns;
        if at > self.cfg.duration_ns {
            return;
        }
        let participants = self.txns[txn_id as usize].txn.participants.clone();
        self.queue.push(
            at,
            Payload::TransactionArrival {
                participants: Some(participants),
                retries_left: retries_left - 1,
            },
        );
    }

    fn on_stage(&mut self, txn_id: TxnId, stage: Stage) -> Result<(), SimError> {
        self.counts.stage_completes += 1;
        let entry = &mut self.txns[txn_id as usize];
        // Stale events: the transaction was aborted by a sweep after this
        // stage completion was scheduled.
        if entry.txn.state.is_terminal() {
            return Ok(());
        }
        if stage == Stage::Query {
            protocol::begin_commit(&mut entry.txn, self.clock)?;
            self.schedule_stage(txn_id, Stage::LocalEntangle);
            return Ok(());
        }
        let inflight = entry
            .inflight
            .as_mut()
            .ok_or_else(|| SimError::Invariant(format!("txn {txn_id} lost in-flight state")))?;
        let fault = self.cfg.faults.draw(stage, &mut inflight.fault_rng);
        let outcome = protocol::on_stage_complete(
            &mut entry.txn,
            &mut self.ledger,
            stage,
            self.clock,
            fault,
            &self.cfg.protocol,
        )?;
        match outcome {
            protocol::StageOutcome::Advance(next) => self.schedule_stage(txn_id, next),
            protocol::StageOutcome::Committed => self.emit_outcome(txn_id),
            protocol::StageOutcome::AbortedPhysical { records, .. } => {
                self.records.extend(records);
                self.emit_outcome(txn_id);
            }
        }
        Ok(())
    }

    fn schedule_stage(&mut self, txn_id: TxnId, stage: Stage) {
        let entry = &mut self.txns[txn_id as usize];
        let inflight = entry.inflight.as_mut().expect("scheduling stage for live txn");
        let duration = protocol::stage_duration_ns(
            &inflight.plan,
            stage,
            self.cfg.protocol.jitter_frac,
            &mut inflight.jitter_rng,
        );
        self.queue
            .push(self.clock + duration, Payload::StageComplete { txn: txn_id, stage });
    }

    fn run_sweep(&mut self) -> Result<(), SimError> {
        for ex in self.ledger.expire_sweep(self.clock) {
            let Some(owner) = ex.owner else { continue };
            let entry = &mut self.txns[owner as usize];
            match entry.txn.state {
                TxnState::Reserved => {
                    let records = protocol::abort_reserved_on_expiry(
                        &mut entry.txn,
                        &mut self.ledger,
                        ex.tuple,
                        self.clock,
                    )?;
                    self.records.extend(records);
                    let retries = entry.inflight.as_ref().map_or(0, |f| f.retries_left);
                    self.emit_outcome(owner);
                    self.maybe_retry(owner, retries);
                }
                TxnState::Committing(_) => {
                    let records = protocol::abort_committing_on_expiry(
                        &mut entry.txn,
                        &mut self.ledger,
                        self.clock,
                        &self.cfg.protocol,
                    )?;
                    self.records.extend(records);
                    self.emit_outcome(owner);
                }
                // Already terminal: a prior notification in this same sweep
                // handled the transaction.
                _ => {}
            }
        }
        Ok(())
    }

    fn take_snapshot(&mut self) {
        let c = self.ledger.counts();
        self.snapshots.push(Snapshot {
            time_ns: self.clock,
            generated: c.generated,
            available: c.available,
            reserved: c.reserved,
            consumed: c.consumed,
            expired: c.expired,
            committed: self.committed,
            aborted_temporal: self.aborted_temporal,
            aborted_physical: self.aborted_physical,
        });
    }

    fn emit_outcome(&mut self, txn_id: TxnId) {
        let entry = &mut self.txns[txn_id as usize];
        entry.inflight = None;
        let txn = &entry.txn;
        match txn.state {
            TxnState::Committed => self.committed += 1,
            TxnState::AbortedTemporal => self.aborted_temporal += 1,
            TxnState::AbortedPhysical => self.aborted_physical += 1,
            state => unreachable!("emitting outcome for live transaction in {state:?}"),
        }
        self.outcomes.push(TxnOutcome {
            txn_id,
            participants: txn.participants.clone(),
            state: txn.state,
            created_ns: txn.created_ns,
            finished_ns: txn.finished_ns.expect("terminal txn has finish time"),
            n_links: txn.required_links.len() as u32,
            tau_c_ns: txn.coord_realized_ns,
            tau_p_ns: txn.commit_started_ns.map(|_| txn.handshake_ns),
            abort_reason: txn.abort_reason,
        });
    }

    fn finalize(mut self) -> Result<RunResult, SimError> {
        let end_ns = self.clock.max(self.cfg.duration_ns);
        // Closing sweep so the Available/Expired split is crisp at the final
        // clock. No live transactions remain, so owners cannot appear.
        for ex in self.ledger.expire_sweep(end_ns) {
            if ex.owner.is_some() {
                return Err(SimError::Invariant(format!(
                    "tuple {} still reserved after drain",
                    ex.tuple
                )));
            }
        }

        for entry in &self.txns {
            if !entry.txn.state.is_terminal() {
                return Err(SimError::Invariant(format!(
                    "transaction {} finished the run in {:?}",
                    entry.txn.id, entry.txn.state
                )));
            }
        }
        let counts = self.ledger.counts();
        if counts.reserved != 0
            || counts.generated != counts.consumed + counts.expired + counts.available
        {
            return Err(SimError::Invariant(format!("tuple conservation failed: {counts:?}")));
        }
        if self.outcomes.len() != self.txns.len() {
            return Err(SimError::Invariant(format!(
                "outcome count {} != transaction count {}",
                self.outcomes.len(),
                self.txns.len()
            )));
        }
        for t in self.ledger.tuples() {
            if let Some(at) = t.consumed_at_ns {
                if at >= t.deadline_ns {
                    return Err(SimError::Invariant(format!(
                        "tuple {} consumed at {} on/after its deadline {}",
                        t.id, at, t.deadline_ns
                    )));
                }
            }
        }

        let tuples = self
            .ledger
            .tuples()
            .iter()
            .map(|t| TupleSnapshot {
                id: t.id,
                link: t.link,
                t_gen_ns: t.t_gen_ns,
                deadline_ns: t.deadline_ns,
                state: match t.state {
                    crate::ledger::TupleState::Available => "available",
                    crate::ledger::TupleState::Reserved(_) => "reserved",
                    crate::ledger::TupleState::Consumed => "consumed",
                    crate::ledger::TupleState::Expired => "expired",
                },
                consumed_at_ns: t.consumed_at_ns,
                released_back: t.released_back,
            })
            .collect();

        let module_names = (0..self.cfg.topology.module_count())
            .map(|i| self.cfg.topology.name(i as ModuleId).to_string())
            .collect();

        Ok(RunResult {
            seed: self.cfg.seed,
            duration_ns: self.cfg.duration_ns,
            end_ns,
            event_counts: self.counts,
            outcomes: self.outcomes,
            records: self.records,
            ledger_counts: counts,
            tuples,
            snapshots: self.snapshots,
            audit: self.audit,
            timing: self.cfg.timing,
            module_names,
        })
    }
}
