//! Bit-stable serialization of run artifacts.
//!
//! Machine outputs are line-delimited JSON with a fixed field order and a
//! leading schema-version field, so external tooling can re-derive every
//! metric from the record streams alone. Rendering identical runs yields
//! byte-identical text.

use serde::Serialize;

use crate::metrics::MetricsReport;
use crate::sim::{RunResult, TxnOutcome};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize)]
struct OutcomeRecord<'a> {
    schema: u32,
    kind: &'static str,
    txn: u64,
    participants: Vec<&'a str>,
    state: &'static str,
    created_ns: u64,
    finished_ns: u64,
    links: u32,
    tau_c_ns: Option<u64>,
    tau_p_ns: Option<u64>,
    abort: Option<&'static str>,
}

#[derive(Serialize)]
struct FailureLine<'a> {
    schema: u32,
    kind: &'static str,
    txn: u64,
    module: &'a str,
    failure: &'static str,
    class: &'static str,
    time_ns: u64,
}

#[derive(Serialize)]
struct ManifestRecord<'a> {
    schema: u32,
    kind: &'static str,
    version: &'a str,
    config_sha256: &'a str,
    seed: u64,
}

#[derive(Serialize)]
struct MetricsRecord<'a> {
    schema: u32,
    kind: &'static str,
    #[serde(flatten)]
    report: &'a MetricsReport,
}

fn outcome_record<'a>(result: &'a RunResult, o: &'a TxnOutcome) -> OutcomeRecord<'a> {
    OutcomeRecord {
        schema: SCHEMA_VERSION,
        kind: "txn",
        txn: o.txn_id,
        participants: o.participants.iter().map(|&m| result.module_name(m)).collect(),
        state: o.state.as_str(),
        created_ns: o.created_ns,
        finished_ns: o.finished_ns,
        links: o.n_links,
        tau_c_ns: o.tau_c_ns,
        tau_p_ns: o.tau_p_ns,
        abort: o.abort_reason.map(|r| r.as_str()),
    }
}

/// Transaction outcome log, one JSON record per line in emission order.
pub fn render_outcomes(result: &RunResult) -> String {
    let mut out = String::new();
    for o in &result.outcomes {
        out.push_str(&serde_json::to_string(&outcome_record(result, o)).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Failure-record log, one JSON record per line in emission order.
pub fn render_failures(result: &RunResult) -> String {
    let mut out = String::new();
    for r in &result.records {
        let line = FailureLine {
            schema: SCHEMA_VERSION,
            kind: "failure",
            txn: r.txn_id,
            module: result.module_name(r.module),
            failure: r.kind.as_str(),
            class: r.classification.as_str(),
            time_ns: r.time_ns,
        };
        out.push_str(&serde_json::to_string(&line).expect("record serializes"));
        out.push('\n');
    }
    out
}

/// Single-line metrics record.
pub fn render_metrics(report: &MetricsReport) -> String {
    let record = MetricsRecord {
        schema: SCHEMA_VERSION,
        kind: "metrics",
        report,
    };
    let mut line = serde_json::to_string(&record).expect("record serializes");
    line.push('\n');
    line
}

/// Run manifest: tool version, canonical config hash, seed.
pub fn render_manifest(version: &str, config_sha256: &str, seed: u64) -> String {
    let record = ManifestRecord {
        schema: SCHEMA_VERSION,
        kind: "manifest",
        version,
        config_sha256,
        seed,
    };
    let mut line = serde_json::to_string(&record).expect("record serializes");
    line.push('\n');
    line
}

/// Fixed-width text table; the first row is the header.
pub fn render_table(rows: &[Vec<String>]) -> String {
    if rows.is_empty() {
        return String::new();
    }
    let columns = rows.iter().map(|r| r.len()).max().unwrap_or(0);
    let mut widths = vec![0usize; columns];
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.len());
        }
    }
    let mut out = String::new();
    for (index, row) in rows.iter().enumerate() {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            line.push_str(&format!("{cell:<width$}", width = widths[i]));
        }
        out.push_str(line.trim_end());
        out.push('\n');
        if index == 0 {
            let total: usize = widths.iter().sum::<usize>() + 2 * (columns.saturating_sub(1));
            out.push_str(&"-".repeat(total));
            out.push('\n');
        }
    }
    out
}

/// Human-readable run summary.
pub fn render_summary(result: &RunResult, report: &MetricsReport) -> String {
    let fmt_opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.1}"));
    let fmt_rate = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |x| format!("{x:.4}"));
    let rows = vec![
        vec!["quantity".to_string(), "value".to_string()],
        vec!["seed".into(), result.seed.to_string()],
        vec!["duration_ns".into(), result.duration_ns.to_string()],
        vec!["transactions".into(), report.n_transactions.to_string()],
        vec!["committed".into(), report.n_committed.to_string()],
        vec!["aborted_temporal".into(), report.n_aborted_temporal.to_string()],
        vec!["aborted_physical".into(), report.n_aborted_physical.to_string()],
        vec!["abort_rate".into(), fmt_rate(report.abort_rate)],
        vec!["tuples_generated".into(), report.n_generated.to_string()],
        vec!["tuples_consumed".into(), report.n_consumed.to_string()],
        vec!["tuples_expired".into(), report.n_expired.to_string()],
        vec!["tuples_available_at_end".into(), report.n_available_at_end.to_string()],
        vec!["mean_tau_c_ns".into(), fmt_opt(report.mean_tau_c_realized_ns)],
        vec!["mean_tau_p_ns".into(), fmt_opt(report.mean_tau_p_ns)],
        vec!["mean_compute_window_ns".into(), fmt_opt(report.mean_compute_window_ns)],
        vec!["erasure_fraction".into(), fmt_rate(report.erasure_fraction)],
        vec!["depolarizing_fraction".into(), fmt_rate(report.depolarizing_fraction)],
        vec!["threshold_verdict".into(), report.threshold_verdict.as_str().to_string()],
    ];
    render_table(&rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ledger::{FidelityDist, LinkConfig, LinkKey, SelectionPolicy};
    use crate::metrics::aggregate;
    use crate::protocol::{FaultModel, ProtocolParams};
    use crate::sim::config::{RetryPolicy, Selection, SimConfig, WorkloadConfig};
    use crate::sim::run_scenario;
    use crate::timing::TimingParams;
    use crate::topology::{GridModule, Topology};

    fn cfg(seed: u64) -> SimConfig {
        SimConfig {
            topology: Topology::grid(
                vec![
                    GridModule { name: "alpha".into(), x: 0, y: 0 },
                    GridModule { name: "beta".into(), x: 2, y: 1 },
                ],
                162.0,
            )
            .unwrap(),
            timing: TimingParams { tau_q_p_ns: 50_000, ..TimingParams::default() },
            links: vec![LinkConfig {
                link: LinkKey::new(0, 1),
                attempt_period_ns: 3_000,
                eta_trans: 0.4,
                fidelity: FidelityDist::Fixed(0.95),
            }],
            workload: WorkloadConfig::FixedRate {
                period_ns: 12_000,
                selection: Selection::UniformPairs,
            },
            faults: FaultModel { p_measurement: 0.3, ..FaultModel::default() },
            protocol: ProtocolParams { multiplier: 1.0, jitter_frac: 0.0, ..ProtocolParams::default() },
            selection_policy: SelectionPolicy::YoungestFirst,
            min_fidelity: 0.0,
            retry: RetryPolicy::default(),
            duration_ns: 3_000_000,
            sweep_period_ns: 1_000,
            snapshot_period_ns: None,
            audit_rollback: false,
            seed,
        }
    }

    #[test]
    fn rendering_is_deterministic_and_seed_sensitive() {
        let a = run_scenario(&cfg(1)).unwrap();
        let b = run_scenario(&cfg(1)).unwrap();
        let c = run_scenario(&cfg(2)).unwrap();
        assert_eq!(render_outcomes(&a), render_outcomes(&b));
        assert_eq!(render_failures(&a), render_failures(&b));
        assert_eq!(render_metrics(&aggregate(&a)), render_metrics(&aggregate(&b)));
        assert_ne!(render_outcomes(&a), render_outcomes(&c));
    }

    #[test]
    fn records_lead_with_schema_and_stable_fields() {
        let result = run_scenario(&cfg(5)).unwrap();
        let outcomes = render_outcomes(&result);
        let first = outcomes.lines().next().unwrap();
        assert!(first.starts_with("{\"schema\":1,\"kind\":\"txn\",\"txn\":"), "line: {first}");
        let failures = render_failures(&result);
        if let Some(line) = failures.lines().next() {
            assert!(line.starts_with("{\"schema\":1,\"kind\":\"failure\","), "line: {line}");
        }
        let manifest = render_manifest("0.1.0", "deadbeef", 5);
        assert_eq!(
            manifest,
            "{\"schema\":1,\"kind\":\"manifest\",\"version\":\"0.1.0\",\"config_sha256\":\"deadbeef\",\"seed\":5}\n"
        );
        let metrics = render_metrics(&aggregate(&result));
        assert!(metrics.starts_with("{\"schema\":1,\"kind\":\"metrics\",\"n_transactions\":"));
    }

    #[test]
    fn summary_table_lists_conservation_counts() {
        let result = run_scenario(&cfg(5)).unwrap();
        let summary = render_summary(&result, &aggregate(&result));
        assert!(summary.contains("tuples_generated"));
        assert!(summary.contains("threshold_verdict"));
    }

    #[test]
    fn table_alignment() {
        let t = render_table(&[
            vec!["a".into(), "long_header".into()],
            vec!["row_one".into(), "1".into()],
        ]);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("a        long_header"));
    }
}
