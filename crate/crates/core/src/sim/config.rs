//! Validated runtime scenario configuration.

use serde::{Deserialize, Serialize};

use crate::ledger::{LinkConfig, ModuleId, SelectionPolicy};
use crate::protocol::{FaultModel, ProtocolParams};
use crate::timing::TimingParams;
use crate::topology::Topology;

/// Participant selection rule for generated arrivals.
#[derive(Debug, Clone, PartialEq)]
pub enum Selection {
    /// Uniformly random distinct module pair per arrival.
    UniformPairs,
    /// Cycle deterministically through explicit participant groups.
    Groups(Vec<Vec<ModuleId>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceArrival {
    pub at_ns: u64,
    pub participants: Vec<ModuleId>,
}

/// Transaction arrival process.
#[derive(Debug, Clone, PartialEq)]
pub enum WorkloadConfig {
    /// No transactions; the supply chain runs alone.
    None,
    /// Fixed-period arrivals starting at one period.
    FixedRate { period_ns: u64, selection: Selection },
    /// Explicit arrival list, for regression scenarios.
    Trace(Vec<TraceArrival>),
}

/// Independent retries of temporally aborted transactions, scheduled by the
/// workload generator as fresh transactions (aborted threads never queue).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetryPolicy {
    pub count: u32,
    pub spacing_ns: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { count: 0, spacing_ns: 1_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub topology: Topology,
    pub timing: TimingParams,
    pub links: Vec<LinkConfig>,
    pub workload: WorkloadConfig,
    pub faults: FaultModel,
    pub protocol: ProtocolParams,
    pub selection_policy: SelectionPolicy,
    /// Minimum heralded fidelity accepted at query time (0 disables).
    pub min_fidelity: f64,
    pub retry: RetryPolicy,
    pub duration_ns: u64,
    /// Period of scheduled expiry sweeps.
    pub sweep_period_ns: u64,
    /// Optional periodic ledger/transaction count snapshots.
    pub snapshot_period_ns: Option<u64>,
    /// Compare ledger state before and after every temporally aborted
    /// reservation (atomic-rollback audit).
    pub audit_rollback: bool,
    pub seed: u64,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.timing.validate().map_err(|e| e.to_string())?;
        self.protocol.validate().map_err(|e| e.to_string())?;
        self.faults.validate().map_err(|e| e.to_string())?;
        if self.duration_ns == 0 {
            return Err("duration must be positive".into());
        }
        if self.sweep_period_ns == 0 {
            return Err("sweep period must be positive".into());
        }
        if self.snapshot_period_ns == Some(0) {
            return Err("snapshot period must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.min_fidelity) {
            return Err(format!("min_fidelity must lie in [0, 1], got {}", self.min_fidelity));
        }
        let modules = self.topology.module_count() as ModuleId;
        for link in &self.links {
            link.validate().map_err(|e| e.to_string())?;
            if link.link.1 >= modules {
                return Err(format!("link references unknown module id {}", link.link.1));
            }
        }
        let check_participants = |participants: &[ModuleId]| -> Result<(), String> {
            if participants.len() < 2 {
                return Err("participant groups need at least two modules".into());
            }
            for pair in participants.windows(2) {
                if pair[0] == pair[1] {
                    return Err("consecutive participants must differ".into());
                }
            }
            for &m in participants {
                if m >= modules {
                    return Err(format!("participant references unknown module id {m}"));
                }
            }
            Ok(())
        };
        match &self.workload {
            WorkloadConfig::None => {}
            WorkloadConfig::FixedRate { period_ns, selection } => {
                if *period_ns == 0 {
                    return Err("arrival period must be positive".into());
                }
                match selection {
                    Selection::UniformPairs => {
                        if modules < 2 {
                            return Err("uniform pair selection needs at least two modules".into());
                        }
                    }
                    Selection::Groups(groups) => {
                        if groups.is_empty() {
                            return Err("selection groups must not be empty".into());
                        }
                        for g in groups {
                            check_participants(g)?;
                        }
                    }
                }
            }
            WorkloadConfig::Trace(arrivals) => {
                for a in arrivals {
                    if a.at_ns > self.duration_ns {
                        return Err(format!(
                            "trace arrival at {} ns lies past the scenario duration",
                            a.at_ns
                        ));
                    }
                    check_participants(&a.participants)?;
                }
            }
        }
        Ok(())
    }
}
