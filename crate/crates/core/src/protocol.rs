//! Time-aware Reserve-Commit transaction engine.
//!
//! A nonlocal operation runs as a five-stage composite transaction: Query,
//! Local Entanglement, Measurement, Coordination, Feedforward. The Reserve
//! phase locks one tuple per required link and runs a temporal pre-flight
//! check against each candidate's coherence deadline
//! (`now + tau_exec* > deadline` aborts fail-fast, rolling every lock back
//! atomically). The Commit phase executes the remaining stages; physical
//! rollback is impossible once they start, so failures degrade semantically:
//! qubits are measured or reset (Pauli-frame bookkeeping) and the failure is
//! classified as a location-known erasure or as depolarizing background.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::{Ledger, LedgerError, LinkKey, ModuleId, ReserveResult, TupleId, TxnId};
use crate::timing::TimingParams;
use crate::topology::{Topology, TopologyError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error("protocol violation: {op} on transaction {txn} in state {state:?}")]
    InvalidState {
        txn: TxnId,
        op: &'static str,
        state: TxnState,
    },
    #[error("transaction needs at least two participants, got {0}")]
    TooFewParticipants(usize),
    #[error("consecutive participants must differ (index {0})")]
    RepeatedParticipant(usize),
    #[error("multiplier must be >= 1, got {0}")]
    BadMultiplier(f64),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

/// The five sequential stages of a composite nonlocal transaction. Query
/// runs during Reserve; the commit phase executes the remaining four.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Query,
    LocalEntangle,
    Measurement,
    Coordination,
    Feedforward,
}

impl Stage {
    pub const COMMIT_SEQUENCE: [Stage; 4] = [
        Stage::LocalEntangle,
        Stage::Measurement,
        Stage::Coordination,
        Stage::Feedforward,
    ];

    pub fn index(self) -> u8 {
        match self {
            Stage::Query => 1,
            Stage::LocalEntangle => 2,
            Stage::Measurement => 3,
            Stage::Coordination => 4,
            Stage::Feedforward => 5,
        }
    }

    pub fn next(self) -> Option<Stage> {
        match self {
            Stage::Query => Some(Stage::LocalEntangle),
            Stage::LocalEntangle => Some(Stage::Measurement),
            Stage::Measurement => Some(Stage::Coordination),
            Stage::Coordination => Some(Stage::Feedforward),
            Stage::Feedforward => None,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Query => "query",
            Stage::LocalEntangle => "local_entangle",
            Stage::Measurement => "measurement",
            Stage::Coordination => "coordination",
            Stage::Feedforward => "feedforward",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TxnState {
    Pending,
    Reserved,
    Committing(Stage),
    Committed,
    AbortedTemporal,
    AbortedPhysical,
}

impl TxnState {
    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            TxnState::Committed | TxnState::AbortedTemporal | TxnState::AbortedPhysical
        )
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TxnState::Pending => "pending",
            TxnState::Reserved => "reserved",
            TxnState::Committing(_) => "committing",
            TxnState::Committed => "committed",
            TxnState::AbortedTemporal => "aborted_temporal",
            TxnState::AbortedPhysical => "aborted_physical",
        }
    }
}

/// Why a transaction aborted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AbortReason {
    /// A required link had no valid tuple at Reserve time.
    NoTuple(LinkKey),
    /// The temporal pre-flight check failed for a candidate tuple.
    DeadlinePrecheck {
        tuple: TupleId,
        projected_ns: u64,
        deadline_ns: u64,
    },
    /// The candidate was locked by another transaction first.
    ReserveConflict(TupleId),
    /// The candidate expired between query and reserve.
    ExpiredAtReserve(TupleId),
    /// A reserved tuple expired before the commit command arrived.
    ExpiredWhileReserved(TupleId),
    /// A reserved tuple's deadline passed mid-commit (jitter overrun).
    ExpiredMidCommit(Stage),
    /// A stage reported a heralded physical failure.
    HeraldedFault(Stage),
}

impl AbortReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            AbortReason::NoTuple(_) => "no_tuple",
            AbortReason::DeadlinePrecheck { .. } => "deadline_precheck",
            AbortReason::ReserveConflict(_) => "reserve_conflict",
            AbortReason::ExpiredAtReserve(_) => "expired_at_reserve",
            AbortReason::ExpiredWhileReserved(_) => "expired_while_reserved",
            AbortReason::ExpiredMidCommit(_) => "expired_mid_commit",
            AbortReason::HeraldedFault(_) => "heralded_fault",
        }
    }
}

/// Failure event kinds. The first two are heralded (the classical plane
/// observes them directly); unheralded decoherence is inferred from stalled
/// waiting windows; the qubit kinds record the degradation action applied to
/// participant data qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    HeraldedTimeoutAbort,
    HeraldedPhysicalLoss,
    UnheraldedDecoherence,
    QubitMeasured,
    QubitReset,
}

impl FailureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FailureKind::HeraldedTimeoutAbort => "heralded_timeout_abort",
            FailureKind::HeraldedPhysicalLoss => "heralded_physical_loss",
            FailureKind::UnheraldedDecoherence => "unheralded_decoherence",
            FailureKind::QubitMeasured => "qubit_measured",
            FailureKind::QubitReset => "qubit_reset",
        }
    }
}

/// What the downstream decoder is told about a failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    ErasureMarker,
    DepolarizingNoise,
    PauliFrameUpdate,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::ErasureMarker => "erasure_marker",
            Classification::DepolarizingNoise => "depolarizing_noise",
            Classification::PauliFrameUpdate => "pauli_frame_update",
        }
    }
}

/// Total kind -> classification map. Heralded failures become location-known
/// erasure markers; unheralded decoherence stays depolarizing background;
/// qubit degradation actions are Pauli-frame bookkeeping.
pub fn classify_failure(kind: FailureKind) -> Classification {
    match kind {
        FailureKind::HeraldedTimeoutAbort | FailureKind::HeraldedPhysicalLoss => {
            Classification::ErasureMarker
        }
        FailureKind::UnheraldedDecoherence => Classification::DepolarizingNoise,
        FailureKind::QubitMeasured | FailureKind::QubitReset => Classification::PauliFrameUpdate,
    }
}

/// Classified failure event with location metadata.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FailureRecord {
    pub txn_id: TxnId,
    pub module: ModuleId,
    pub kind: FailureKind,
    pub classification: Classification,
    pub time_ns: u64,
}

impl FailureRecord {
    pub fn new(txn_id: TxnId, module: ModuleId, kind: FailureKind, time_ns: u64) -> Self {
        Self {
            txn_id,
            module,
            kind,
            classification: classify_failure(kind),
            time_ns,
        }
    }
}

/// What to do with participant data qubits when a transaction degrades.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DegradationPolicy {
    /// Fast reset; the |0> state is a known initialization.
    #[default]
    Reset,
    /// Projective measurement; the collapse outcome updates the Pauli frame.
    Measure,
}

/// Protocol tuning knobs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolParams {
    /// Percentile multiplier applied to the nominal stage sum in tau_exec*.
    pub multiplier: f64,
    /// Bounded uniform stage jitter: realized = nominal * U[1-f, 1+f].
    pub jitter_frac: f64,
    /// Nominal duration of the local-entangle stage, ns.
    pub local_entangle_ns: u64,
    /// Nominal duration of the measurement stage, ns.
    pub measurement_ns: u64,
    /// Classical handshake between reserve success and the commit command
    /// (the Query stage's latency), ns.
    pub reserve_latency_ns: u64,
    pub degradation: DegradationPolicy,
    /// Report stalled-window decoherence as a heralded (erasure) event
    /// instead of depolarizing background.
    pub stalled_window_as_erasure: bool,
    /// Charge tau_decode once per routing hop instead of once per
    /// coordination stage.
    pub per_hop_decode: bool,
}

impl Default for ProtocolParams {
    fn default() -> Self {
        Self {
            multiplier: 1.5,
            jitter_frac: 0.3,
            local_entangle_ns: 100,
            measurement_ns: 500,
            reserve_latency_ns: 0,
            degradation: DegradationPolicy::Reset,
            stalled_window_as_erasure: false,
            per_hop_decode: false,
        }
    }
}

impl ProtocolParams {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        if !(self.multiplier.is_finite() && self.multiplier >= 1.0) {
            return Err(ProtocolError::BadMultiplier(self.multiplier));
        }
        if !(self.jitter_frac.is_finite() && (0.0..1.0).contains(&self.jitter_frac)) {
            return Err(ProtocolError::BadMultiplier(self.jitter_frac));
        }
        Ok(())
    }
}

/// Per-stage independent heralded-failure probabilities for the commit
/// stages, in commit order. Defaults to zero everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FaultModel {
    pub p_local_entangle: f64,
    pub p_measurement: f64,
    pub p_coordination: f64,
    pub p_feedforward: f64,
}

impl FaultModel {
    pub fn probability(&self, stage: Stage) -> f64 {
        match stage {
            Stage::Query => 0.0,
            Stage::LocalEntangle => self.p_local_entangle,
            Stage::Measurement => self.p_measurement,
            Stage::Coordination => self.p_coordination,
            Stage::Feedforward => self.p_feedforward,
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        for p in [
            self.p_local_entangle,
            self.p_measurement,
            self.p_coordination,
            self.p_feedforward,
        ] {
            if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
                return Err(ProtocolError::BadMultiplier(p));
            }
        }
        Ok(())
    }

    /// Draws the stage's heralded-failure Bernoulli from `rng`.
    pub fn draw(&self, stage: Stage, rng: &mut ChaCha8Rng) -> bool {
        let p = self.probability(stage);
        if p <= 0.0 {
            // Still consume a draw so traces are insensitive to p toggles.
            let _: f64 = rng.random();
            return false;
        }
        rng.random::<f64>() < p
    }
}

/// Nominal commit-stage durations, real ns, in commit order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StagePlan {
    pub nominal_ns: [f64; 4],
}

impl StagePlan {
    pub fn nominal_total_ns(&self) -> f64 {
        self.nominal_ns.iter().sum()
    }

    pub fn nominal(&self, stage: Stage) -> f64 {
        match stage {
            Stage::Query => 0.0,
            Stage::LocalEntangle => self.nominal_ns[0],
            Stage::Measurement => self.nominal_ns[1],
            Stage::Coordination => self.nominal_ns[2],
            Stage::Feedforward => self.nominal_ns[3],
        }
    }
}

/// Bounded worst-case projected commit latency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatencyEstimate {
    pub tau_exec_star_ns: u64,
    pub percentile_multiplier: f64,
}

/// Round half-up at the simulation boundary.
pub fn round_ns(x: f64) -> u64 {
    (x + 0.5).floor() as u64
}

/// Builds the nominal stage plan for a participant set: local entangle and
/// measurement from the protocol config, coordination as the worst pairwise
/// classical latency plus decoder time, feedforward from the timing params.
pub fn stage_plan(
    participants: &[ModuleId],
    topology: &Topology,
    timing: &TimingParams,
    params: &ProtocolParams,
) -> Result<StagePlan, ProtocolError> {
    let mut coordination = 0.0f64;
    for (k, &i) in participants.iter().enumerate() {
        for &j in &participants[k + 1..] {
            let flight = topology.classical_latency_ns(i, j)?;
            let decode = if params.per_hop_decode {
                timing.tau_decode_ns as f64 * topology.hops(i, j)? as f64
            } else {
                timing.tau_decode_ns as f64
            };
            coordination = coordination.max(flight + decode);
        }
    }
    Ok(StagePlan {
        nominal_ns: [
            params.local_entangle_ns as f64,
            params.measurement_ns as f64,
            coordination,
            timing.tau_ff_ns as f64,
        ],
    })
}

/// Bounded worst-case projected latency over the commit stages:
/// `tau_exec* = multiplier * sum(nominal stage latencies)`.
pub fn estimate_exec_latency(
    participants: &[ModuleId],
    topology: &Topology,
    timing: &TimingParams,
    params: &ProtocolParams,
    multiplier: f64,
) -> Result<LatencyEstimate, ProtocolError> {
    if !(multiplier.is_finite() && multiplier >= 1.0) {
        return Err(ProtocolError::BadMultiplier(multiplier));
    }
    let plan = stage_plan(participants, topology, timing, params)?;
    Ok(LatencyEstimate {
        tau_exec_star_ns: round_ns(multiplier * plan.nominal_total_ns()),
        percentile_multiplier: multiplier,
    })
}

/// Realized duration of one commit stage: nominal scaled by a bounded
/// uniform jitter factor and rounded half-up to whole ns.
pub fn stage_duration_ns(
    plan: &StagePlan,
    stage: Stage,
    jitter_frac: f64,
    jitter_rng: &mut ChaCha8Rng,
) -> u64 {
    let unit: f64 = jitter_rng.random();
    let factor = if jitter_frac > 0.0 {
        1.0 - jitter_frac + 2.0 * jitter_frac * unit
    } else {
        1.0
    };
    round_ns(plan.nominal(stage) * factor)
}

/// A five-stage nonlocal LOCC transaction.
#[derive(Debug, Clone, PartialEq)]
pub struct Transaction {
    pub id: TxnId,
    /// Ordered participant modules, length >= 2.
    pub participants: Vec<ModuleId>,
    /// One tuple required per consecutive participant pair.
    pub required_links: Vec<LinkKey>,
    pub reserved_tuples: Vec<TupleId>,
    pub state: TxnState,
    pub created_ns: u64,
    pub finished_ns: Option<u64>,
    pub commit_started_ns: Option<u64>,
    /// Timestamp of the last completed productive activity; the stalled
    /// waiting window at degradation time is measured from here.
    pub last_progress_ns: u64,
    /// Realized coordination-stage duration for committed transactions.
    pub coord_realized_ns: Option<u64>,
    /// Protocol handshake latency accrued (tau_p).
    pub handshake_ns: u64,
    pub estimate: Option<LatencyEstimate>,
    pub abort_reason: Option<AbortReason>,
}

impl Transaction {
    pub fn new(id: TxnId, participants: Vec<ModuleId>, created_ns: u64) -> Result<Self, ProtocolError> {
        if participants.len() < 2 {
            return Err(ProtocolError::TooFewParticipants(participants.len()));
        }
        let mut required_links = Vec::with_capacity(participants.len() - 1);
        for (i, pair) in participants.windows(2).enumerate() {
            if pair[0] == pair[1] {
                return Err(ProtocolError::RepeatedParticipant(i));
            }
            required_links.push(LinkKey::new(pair[0], pair[1]));
        }
        Ok(Self {
            id,
            participants,
            required_links,
            reserved_tuples: Vec::new(),
            state: TxnState::Pending,
            created_ns,
            finished_ns: None,
            commit_started_ns: None,
            last_progress_ns: created_ns,
            coord_realized_ns: None,
            handshake_ns: 0,
            estimate: None,
            abort_reason: None,
        })
    }

    fn finish(&mut self, state: TxnState, now_ns: u64) {
        self.state = state;
        self.finished_ns = Some(now_ns);
    }
}

/// Result of the Reserve phase. The abort is a modeled outcome, not an error.
#[derive(Debug, Clone, PartialEq)]
pub enum ReserveOutcome {
    Reserved,
    AbortedTemporal {
        reason: AbortReason,
        records: Vec<FailureRecord>,
    },
}

/// Phase 1: query and lock one tuple per required link, with the strict
/// temporal pre-flight check `now + handshake + tau_exec* > deadline`
/// evaluated against each candidate. `handshake_ns` is the deterministic
/// classical delay still ahead before the commit command lands (the Query
/// stage latency). Any miss rolls back every lock taken so far before
/// physical consumption begins and emits one heralded timeout record per
/// participant location.
pub fn reserve_phase(
    txn: &mut Transaction,
    ledger: &mut Ledger,
    now_ns: u64,
    estimate: LatencyEstimate,
    handshake_ns: u64,
) -> Result<ReserveOutcome, ProtocolError> {
    if txn.state != TxnState::Pending {
        return Err(ProtocolError::InvalidState {
            txn: txn.id,
            op: "reserve_phase",
            state: txn.state,
        });
    }
    txn.estimate = Some(estimate);
    let projected_ns = now_ns + handshake_ns + estimate.tau_exec_star_ns;

    let mut failure: Option<AbortReason> = None;
    'links: for &link in &txn.required_links {
        let Some(tuple) = ledger.query(link, now_ns) else {
            failure = Some(AbortReason::NoTuple(link));
            break 'links;
        };
        let deadline_ns = ledger.tuple(tuple).expect("queried tuple exists").deadline_ns;
        if projected_ns > deadline_ns {
            failure = Some(AbortReason::DeadlinePrecheck { tuple, projected_ns, deadline_ns });
            break 'links;
        }
        match ledger.reserve(tuple, txn.id, now_ns)? {
            ReserveResult::Ok => txn.reserved_tuples.push(tuple),
            ReserveResult::Conflict(_) => {
                failure = Some(AbortReason::ReserveConflict(tuple));
                break 'links;
            }
            ReserveResult::Expired => {
                failure = Some(AbortReason::ExpiredAtReserve(tuple));
                break 'links;
            }
        }
    }

    match failure {
        None => {
            txn.state = TxnState::Reserved;
            Ok(ReserveOutcome::Reserved)
        }
        Some(reason) => {
            for tuple in txn.reserved_tuples.drain(..) {
                ledger.release(tuple, txn.id)?;
            }
            txn.finish(TxnState::AbortedTemporal, now_ns);
            txn.abort_reason = Some(reason);
            let records = heralded_records(txn, FailureKind::HeraldedTimeoutAbort, now_ns);
            Ok(ReserveOutcome::AbortedTemporal { reason, records })
        }
    }
}

/// Marks the start of commit execution (the Query stage has completed).
pub fn begin_commit(txn: &mut Transaction, now_ns: u64) -> Result<Stage, ProtocolError> {
    if txn.state != TxnState::Reserved {
        return Err(ProtocolError::InvalidState {
            txn: txn.id,
            op: "begin_commit",
            state: txn.state,
        });
    }
    txn.state = TxnState::Committing(Stage::LocalEntangle);
    txn.commit_started_ns = Some(now_ns);
    txn.handshake_ns = now_ns - txn.created_ns;
    txn.last_progress_ns = now_ns;
    Ok(Stage::LocalEntangle)
}

/// Outcome of one completed commit stage.
#[derive(Debug, Clone, PartialEq)]
pub enum StageOutcome {
    /// The stage completed cleanly; schedule the next one.
    Advance(Stage),
    Committed,
    AbortedPhysical {
        reason: AbortReason,
        records: Vec<FailureRecord>,
    },
}

/// Advances the commit state machine when `stage` finishes at `now_ns`.
/// `fault` is the stage's pre-drawn heralded-failure Bernoulli.
///
/// Expiry of a reserved tuple mid-commit (jitter overrun past tau_exec*)
/// takes precedence over the fault draw and degrades with the stalled
/// window classified per config. Heralded faults spend the tuples, emit
/// one heralded-loss record per participant, and degrade.
pub fn on_stage_complete(
    txn: &mut Transaction,
    ledger: &mut Ledger,
    stage: Stage,
    now_ns: u64,
    fault: bool,
    params: &ProtocolParams,
) -> Result<StageOutcome, ProtocolError> {
    if txn.state != TxnState::Committing(stage) {
        return Err(ProtocolError::InvalidState {
            txn: txn.id,
            op: "on_stage_complete",
            state: txn.state,
        });
    }

    let any_expired = txn
        .reserved_tuples
        .iter()
        .any(|&t| ledger.tuple(t).expect("reserved tuple exists").deadline_ns <= now_ns);
    if any_expired {
        return abort_physical(txn, ledger, AbortReason::ExpiredMidCommit(stage), now_ns, params, false);
    }

    if fault {
        return abort_physical(txn, ledger, AbortReason::HeraldedFault(stage), now_ns, params, true);
    }

    if stage == Stage::Coordination {
        txn.coord_realized_ns = Some(now_ns - txn.last_progress_ns);
    }
    txn.last_progress_ns = now_ns;

    match stage.next() {
        Some(next) => {
            txn.state = TxnState::Committing(next);
            Ok(StageOutcome::Advance(next))
        }
        None => {
            for &tuple in &txn.reserved_tuples {
                ledger.consume(tuple, txn.id, now_ns)?;
            }
            txn.finish(TxnState::Committed, now_ns);
            Ok(StageOutcome::Committed)
        }
    }
}

/// A reserved tuple expired while commit stages were in flight (detected by
/// a sweep between stage events). The engaged hardware cannot be rolled
/// back: surviving tuples are spent and the transaction degrades.
pub fn abort_committing_on_expiry(
    txn: &mut Transaction,
    ledger: &mut Ledger,
    now_ns: u64,
    params: &ProtocolParams,
) -> Result<Vec<FailureRecord>, ProtocolError> {
    let TxnState::Committing(stage) = txn.state else {
        return Err(ProtocolError::InvalidState {
            txn: txn.id,
            op: "abort_committing_on_expiry",
            state: txn.state,
        });
    };
    match abort_physical(txn, ledger, AbortReason::ExpiredMidCommit(stage), now_ns, params, false)? {
        StageOutcome::AbortedPhysical { records, .. } => Ok(records),
        _ => unreachable!("abort_physical always aborts"),
    }
}

/// A reserved tuple expired before the commit command arrived: abort
/// temporally, roll the surviving locks back, and herald the timeout.
pub fn abort_reserved_on_expiry(
    txn: &mut Transaction,
    ledger: &mut Ledger,
    expired_tuple: TupleId,
    now_ns: u64,
) -> Result<Vec<FailureRecord>, ProtocolError> {
    if txn.state != TxnState::Reserved {
        return Err(ProtocolError::InvalidState {
            txn: txn.id,
            op: "abort_reserved_on_expiry",
            state: txn.state,
        });
    }
    for &tuple in &txn.reserved_tuples {
        if tuple != expired_tuple {
            ledger.release(tuple, txn.id)?;
        }
    }
    txn.reserved_tuples.clear();
    txn.finish(TxnState::AbortedTemporal, now_ns);
    txn.abort_reason = Some(AbortReason::ExpiredWhileReserved(expired_tuple));
    Ok(heralded_records(txn, FailureKind::HeraldedTimeoutAbort, now_ns))
}

fn abort_physical(
    txn: &mut Transaction,
    ledger: &mut Ledger,
    reason: AbortReason,
    now_ns: u64,
    params: &ProtocolParams,
    heralded: bool,
) -> Result<StageOutcome, ProtocolError> {
    spend_tuples(txn, ledger, now_ns)?;
    txn.finish(TxnState::AbortedPhysical, now_ns);
    txn.abort_reason = Some(reason);
    let mut records = Vec::new();
    if heralded {
        records.extend(heralded_records(txn, FailureKind::HeraldedPhysicalLoss, now_ns));
    }
    records.extend(degrade(txn, now_ns, params.degradation, params.stalled_window_as_erasure)?);
    Ok(StageOutcome::AbortedPhysical { reason, records })
}

/// Once the commit stages have engaged the hardware the tuples are
/// physically spent: consumed if still within deadline, expired otherwise.
fn spend_tuples(txn: &mut Transaction, ledger: &mut Ledger, now_ns: u64) -> Result<(), ProtocolError> {
    for &tuple in &txn.reserved_tuples {
        let entry = ledger.tuple(tuple).expect("reserved tuple exists");
        match entry.state {
            crate::ledger::TupleState::Reserved(owner) if owner == txn.id => {
                if entry.deadline_ns > now_ns {
                    ledger.consume(tuple, txn.id, now_ns)?;
                } else {
                    ledger.expire_one(tuple);
                }
            }
            crate::ledger::TupleState::Expired => {}
            _ => {
                return Err(ProtocolError::Ledger(LedgerError::ProtocolViolation {
                    tuple,
                    expected: "Reserved by caller or Expired",
                    actual: format!("{:?}", entry.state),
                }))
            }
        }
    }
    Ok(())
}

/// Semantic degradation of an aborting transaction: every participant data
/// qubit is measured or reset (a Pauli-frame update either way), and the
/// stalled waiting window since the last completed stage is reported per
/// participant when it is nonzero. By default the stalled window counts as
/// unheralded (depolarizing) background; `stalled_window_as_erasure` reports
/// it as a heralded timeout instead.
///
/// Invoking this on a committed (or still-running) transaction is a
/// protocol violation.
pub fn degrade(
    txn: &Transaction,
    now_ns: u64,
    policy: DegradationPolicy,
    stalled_window_as_erasure: bool,
) -> Result<Vec<FailureRecord>, ProtocolError> {
    if !matches!(txn.state, TxnState::AbortedTemporal | TxnState::AbortedPhysical) {
        return Err(ProtocolError::InvalidState {
            txn: txn.id,
            op: "degrade",
            state: txn.state,
        });
    }
    let qubit_kind = match policy {
        DegradationPolicy::Measure => FailureKind::QubitMeasured,
        DegradationPolicy::Reset => FailureKind::QubitReset,
    };
    let mut records: Vec<FailureRecord> = txn
        .participants
        .iter()
        .map(|&m| FailureRecord::new(txn.id, m, qubit_kind, now_ns))
        .collect();
    let stalled_window = now_ns.saturating_sub(txn.last_progress_ns);
    if stalled_window > 0 {
        let kind = if stalled_window_as_erasure {
            FailureKind::HeraldedTimeoutAbort
        } else {
            FailureKind::UnheraldedDecoherence
        };
        records.extend(heralded_records(txn, kind, now_ns));
    }
    Ok(records)
}

fn heralded_records(txn: &Transaction, kind: FailureKind, now_ns: u64) -> Vec<FailureRecord> {
    txn.participants
        .iter()
        .map(|&m| FailureRecord::new(txn.id, m, kind, now_ns))
        .collect()
}

/// Synchronous outcome of a full commit phase.
#[derive(Debug, Clone, PartialEq)]
pub enum CommitOutcome {
    Committed { finished_ns: u64 },
    AbortedPhysical {
        reason: AbortReason,
        records: Vec<FailureRecord>,
        finished_ns: u64,
    },
}

/// Phase 2, driven synchronously: executes stages 2-5 with jittered
/// durations and per-stage fault draws, starting from a Reserved
/// transaction at `now_ns`. The event-driven kernel uses the same step
/// functions; this driver serves direct library use and tests.
#[allow(clippy::too_many_arguments)]
pub fn commit_phase(
    txn: &mut Transaction,
    ledger: &mut Ledger,
    plan: &StagePlan,
    faults: &FaultModel,
    params: &ProtocolParams,
    now_ns: u64,
    jitter_rng: &mut ChaCha8Rng,
    fault_rng: &mut ChaCha8Rng,
) -> Result<CommitOutcome, ProtocolError> {
    let mut clock = now_ns + params.reserve_latency_ns;
    let mut stage = begin_commit(txn, clock)?;
    loop {
        clock += stage_duration_ns(plan, stage, params.jitter_frac, jitter_rng);
        let fault = faults.draw(stage, fault_rng);
        match on_stage_complete(txn, ledger, stage, clock, fault, params)? {
            StageOutcome::Advance(next) => stage = next,
            StageOutcome::Committed => return Ok(CommitOutcome::Committed { finished_ns: clock }),
            StageOutcome::AbortedPhysical { reason, records } => {
                return Ok(CommitOutcome::AbortedPhysical { reason, records, finished_ns: clock })
            }
        }
    }
}
