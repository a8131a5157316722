//! Aggregation of run results: compute-window shrinkage, abort and
//! starvation statistics, erasure composition, and effective-threshold
//! verdicts.

use serde::Serialize;
use thiserror::Error;

use crate::protocol::Classification;
use crate::sim::config::SimConfig;
use crate::sim::{run_scenario, RunResult, SimError};

/// Surface-code threshold under uncharacterized depolarizing noise.
pub const DEPOLARIZING_THRESHOLD: f64 = 0.0094;
/// Conservative edge of the erasure-regime threshold band.
pub const ERASURE_THRESHOLD: f64 = 0.031;
/// Upper edge of the erasure-regime band; reported as an annotation, never
/// used as a decision boundary.
pub const ERASURE_THRESHOLD_HIGH: f64 = 0.0415;
/// Fraction of noise records that must be erasure-flagged before the
/// erasure-regime threshold applies.
pub const DEFAULT_ERASURE_DOMINANCE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("probability argument out of [0, 1]: {0}")]
    BadProbability(f64),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Effective compute window `tau_compute = tau_q - (tau_c + tau_p)`.
/// Negative values are returned as-is; they signal an infeasible regime.
pub fn compute_window_ns(tau_q_ns: u64, tau_c_ns: u64, tau_p_ns: u64) -> i64 {
    tau_q_ns as i64 - (tau_c_ns as i64 + tau_p_ns as i64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdVerdict {
    WithinDepolarizingThreshold,
    WithinErasureRegimeOnly,
    AboveAllThresholds,
}

impl ThresholdVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            ThresholdVerdict::WithinDepolarizingThreshold => "within_depolarizing_threshold",
            ThresholdVerdict::WithinErasureRegimeOnly => "within_erasure_regime_only",
            ThresholdVerdict::AboveAllThresholds => "above_all_thresholds",
        }
    }
}

/// Places a residual depolarizing rate against the fault-tolerance
/// thresholds: below 0.94% any decoder tolerates it; between 0.94% and 3.1%
/// only an erasure-aware decoder does, and only when at least
/// `erasure_dominance` of the noise records are location-known erasures.
pub fn effective_threshold_check_with(
    residual_depolarizing_rate: f64,
    erasure_fraction: f64,
    erasure_dominance: f64,
) -> Result<ThresholdVerdict, MetricsError> {
    for p in [residual_depolarizing_rate, erasure_fraction, erasure_dominance] {
        if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
            return Err(MetricsError::BadProbability(p));
        }
    }
    Ok(if residual_depolarizing_rate < DEPOLARIZING_THRESHOLD {
        ThresholdVerdict::WithinDepolarizingThreshold
    } else if residual_depolarizing_rate < ERASURE_THRESHOLD && erasure_fraction >= erasure_dominance {
        ThresholdVerdict::WithinErasureRegimeOnly
    } else {
        ThresholdVerdict::AboveAllThresholds
    })
}

/// `effective_threshold_check_with` at the default dominance fraction.
pub fn effective_threshold_check(
    residual_depolarizing_rate: f64,
    erasure_fraction: f64,
) -> Result<ThresholdVerdict, MetricsError> {
    effective_threshold_check_with(residual_depolarizing_rate, erasure_fraction, DEFAULT_ERASURE_DOMINANCE)
}

/// Aggregated quantities of one run.
///
/// `erasure_fraction` and `depolarizing_fraction` partition the noise
/// records (erasure + depolarizing classifications); Pauli-frame updates are
/// bookkeeping, counted separately, so the two fractions sum to one whenever
/// noise records exist. `residual_depolarizing_rate` normalizes depolarizing
/// records per participant-transaction (qubit window).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub n_transactions: u64,
    pub n_committed: u64,
    pub n_aborted_temporal: u64,
    pub n_aborted_physical: u64,
    pub n_generated: u64,
    pub n_consumed: u64,
    pub n_expired: u64,
    pub n_available_at_end: u64,
    pub n_released_back: u64,
    pub abort_rate: Option<f64>,
    pub mean_tau_c_realized_ns: Option<f64>,
    pub mean_tau_p_ns: Option<f64>,
    pub mean_compute_window_ns: Option<f64>,
    pub n_negative_compute_windows: u64,
    pub n_records: u64,
    pub n_erasure_records: u64,
    pub n_depolarizing_records: u64,
    pub n_pauli_frame_records: u64,
    pub erasure_fraction: Option<f64>,
    pub depolarizing_fraction: Option<f64>,
    pub residual_depolarizing_rate: f64,
    pub threshold_verdict: ThresholdVerdict,
}

/// Aggregates a run with the default erasure-dominance fraction.
pub fn aggregate(result: &RunResult) -> MetricsReport {
    aggregate_with(result, DEFAULT_ERASURE_DOMINANCE)
}

pub fn aggregate_with(result: &RunResult, erasure_dominance: f64) -> MetricsReport {
    let n_transactions = result.outcomes.len() as u64;
    let mut n_committed = 0u64;
    let mut n_aborted_temporal = 0u64;
    let mut n_aborted_physical = 0u64;
    let mut tau_c_sum = 0u128;
    let mut tau_p_sum = 0u128;
    let mut window_sum = 0i128;
    let mut n_negative = 0u64;
    let mut qubit_windows = 0u64;
    let tau_q = result.timing.tau_q_ns;

    for o in &result.outcomes {
        qubit_windows += o.participants.len() as u64;
        match o.state {
            crate::protocol::TxnState::Committed => {
                n_committed += 1;
                let tau_c = o.tau_c_ns.unwrap_or(0);
                let tau_p = o.tau_p_ns.unwrap_or(0);
                tau_c_sum += tau_c as u128;
                tau_p_sum += tau_p as u128;
                let window = compute_window_ns(tau_q, tau_c, tau_p);
                window_sum += window as i128;
                if window < 0 {
                    n_negative += 1;
                }
            }
            crate::protocol::TxnState::AbortedTemporal => n_aborted_temporal += 1,
            crate::protocol::TxnState::AbortedPhysical => n_aborted_physical += 1,
            _ => {}
        }
    }

    let mut n_erasure = 0u64;
    let mut n_depolarizing = 0u64;
    let mut n_pauli = 0u64;
    for r in &result.records {
        match r.classification {
            Classification::ErasureMarker => n_erasure += 1,
            Classification::DepolarizingNoise => n_depolarizing += 1,
            Classification::PauliFrameUpdate => n_pauli += 1,
        }
    }
    let n_noise = n_erasure + n_depolarizing;

    let ratio = |num: u64, den: u64| (den > 0).then(|| num as f64 / den as f64);
    let mean_u = |sum: u128, den: u64| (den > 0).then(|| sum as f64 / den as f64);

    let residual_depolarizing_rate = if qubit_windows > 0 {
        n_depolarizing as f64 / qubit_windows as f64
    } else {
        0.0
    };
    let erasure_fraction = ratio(n_erasure, n_noise);
    let threshold_verdict = effective_threshold_check_with(
        residual_depolarizing_rate.min(1.0),
        erasure_fraction.unwrap_or(0.0),
        erasure_dominance,
    )
    .expect("rates are in range by construction");

    MetricsReport {
        n_transactions,
        n_committed,
        n_aborted_temporal,
        n_aborted_physical,
        n_generated: result.ledger_counts.generated,
        n_consumed: result.ledger_counts.consumed,
        n_expired: result.ledger_counts.expired,
        n_available_at_end: result.ledger_counts.available,
        n_released_back: result.ledger_counts.released_back,
        abort_rate: ratio(n_aborted_temporal + n_aborted_physical, n_transactions),
        mean_tau_c_realized_ns: mean_u(tau_c_sum, n_committed),
        mean_tau_p_ns: mean_u(tau_p_sum, n_committed),
        mean_compute_window_ns: (n_committed > 0).then(|| window_sum as f64 / n_committed as f64),
        n_negative_compute_windows: n_negative,
        n_records: result.records.len() as u64,
        n_erasure_records: n_erasure,
        n_depolarizing_records: n_depolarizing,
        n_pauli_frame_records: n_pauli,
        erasure_fraction,
        depolarizing_fraction: ratio(n_depolarizing, n_noise),
        residual_depolarizing_rate,
        threshold_verdict,
    }
}

/// Cross-checks the protocol's record-emission contract over a run: every
/// aborted transaction produced at least one failure record, committed
/// transactions produced none, and every record's classification matches
/// the kind map.
pub fn verify_record_contract(result: &RunResult) -> Result<(), String> {
    use std::collections::BTreeSet;
    let mut with_records: BTreeSet<u64> = BTreeSet::new();
    for r in &result.records {
        if r.classification != crate::protocol::classify_failure(r.kind) {
            return Err(format!(
                "record for txn {} has classification {:?} for kind {:?}",
                r.txn_id, r.classification, r.kind
            ));
        }
        with_records.insert(r.txn_id);
    }
    for o in &result.outcomes {
        let aborted = matches!(
            o.state,
            crate::protocol::TxnState::AbortedTemporal | crate::protocol::TxnState::AbortedPhysical
        );
        if aborted && !with_records.contains(&o.txn_id) {
            return Err(format!("aborted txn {} emitted no failure record", o.txn_id));
        }
        if !aborted && with_records.contains(&o.txn_id) {
            return Err(format!("committed txn {} emitted failure records", o.txn_id));
        }
    }
    Ok(())
}

/// One row of a starvation sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StarvationPoint {
    pub eta_trans: f64,
    pub n_transactions: u64,
    pub n_committed: u64,
    pub n_generated: u64,
    pub abort_rate: Option<f64>,
    pub commit_rate: Option<f64>,
    pub mean_compute_window_ns: Option<f64>,
}

/// Reruns `base` once per eta value with every link's transduction
/// efficiency substituted (same seed throughout). Rows keep input order.
pub fn starvation_curve(base: &SimConfig, eta_values: &[f64]) -> Result<Vec<StarvationPoint>, MetricsError> {
    for &eta in eta_values {
        if !(eta.is_finite() && eta > 0.0 && eta <= 1.0) {
            return Err(MetricsError::BadProbability(eta));
        }
    }
    let mut rows = Vec::with_capacity(eta_values.len());
    for &eta in eta_values {
        let mut cfg = base.clone();
        for link in &mut cfg.links {
            link.eta_trans = eta;
        }
        let result = run_scenario(&cfg)?;
        let report = aggregate(&result);
        rows.push(StarvationPoint {
            eta_trans: eta,
            n_transactions: report.n_transactions,
            n_committed: report.n_committed,
            n_generated: report.n_generated,
            abort_rate: report.abort_rate,
            commit_rate: (report.n_transactions > 0)
                .then(|| report.n_committed as f64 / report.n_transactions as f64),
            mean_compute_window_ns: report.mean_compute_window_ns,
        });
    }
    Ok(rows)
}
