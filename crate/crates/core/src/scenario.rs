//! Scenario configuration files: a strict-schema TOML document with
//! sections for the simulation, topology, timing, links, workload, faults,
//! protocol, and scaling model. Unknown keys are fatal.
//!
//! All durations are written with explicit unit suffixes (`ns`, `us`, `ms`,
//! `s`) and parse exactly to integer nanoseconds; inputs naming fractional
//! nanoseconds are rejected, never rounded. Canonical re-serialization
//! normalizes every duration to its `ns` form, so a parsed file round-trips
//! to an equivalent configuration.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::ledger::{FidelityDist, LinkConfig, LinkKey, SelectionPolicy};
use crate::protocol::{DegradationPolicy, FaultModel, ProtocolParams};
use crate::scaling::ScalingParams;
use crate::sim::config::{RetryPolicy, Selection, SimConfig, TraceArrival, WorkloadConfig};
use crate::timing::TimingParams;
use crate::topology::{GraphEdge, GridModule, Topology};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(String),
    #[error("scenario is missing the [{0}] section")]
    MissingSection(&'static str),
    #[error("invalid scenario: {0}")]
    Invalid(String),
}

/// Exact duration parser: decimal number + unit suffix -> integer ns.
pub fn parse_duration_ns(text: &str) -> Result<u64, String> {
    let s = text.trim();
    let (number, factor) = if let Some(n) = s.strip_suffix("ns") {
        (n, 1u128)
    } else if let Some(n) = s.strip_suffix("us") {
        (n, 1_000)
    } else if let Some(n) = s.strip_suffix("ms") {
        (n, 1_000_000)
    } else if let Some(n) = s.strip_suffix('s') {
        (n, 1_000_000_000)
    } else {
        return Err(format!("duration {text:?} lacks a unit suffix (ns, us, ms, s)"));
    };
    let number = number.trim_end();
    let (int_part, frac_part) = match number.split_once('.') {
        Some((i, f)) => (i, f),
        None => (number, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(format!("duration {text:?} has no digits"));
    }
    if !int_part.chars().all(|c| c.is_ascii_digit()) || !frac_part.chars().all(|c| c.is_ascii_digit()) {
        return Err(format!("duration {text:?} is not a plain decimal number"));
    }
    let int_value: u128 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().map_err(|_| format!("duration {text:?} overflows"))?
    };
    let mut total = int_value
        .checked_mul(factor)
        .ok_or_else(|| format!("duration {text:?} overflows"))?;
    if !frac_part.is_empty() {
        let frac_value: u128 = frac_part.parse().map_err(|_| format!("duration {text:?} overflows"))?;
        let scale = 10u128
            .checked_pow(frac_part.len() as u32)
            .ok_or_else(|| format!("duration {text:?} has too many fractional digits"))?;
        let scaled = frac_value
            .checked_mul(factor)
            .ok_or_else(|| format!("duration {text:?} overflows"))?;
        if scaled % scale != 0 {
            return Err(format!(
                "duration {text:?} names a fractional nanosecond; use a finer unit"
            ));
        }
        total = total
            .checked_add(scaled / scale)
            .ok_or_else(|| format!("duration {text:?} overflows"))?;
    }
    u64::try_from(total).map_err(|_| format!("duration {text:?} exceeds the ns clock range"))
}

/// Integer nanoseconds that read and write as a suffixed string
/// (canonically `"<n>ns"`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DurationNs(pub u64);

impl Serialize for DurationNs {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&format!("{}ns", self.0))
    }
}

impl<'de> Deserialize<'de> for DurationNs {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        parse_duration_ns(&text).map(DurationNs).map_err(serde::de::Error::custom)
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration: Option<DurationNs>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep_period: Option<DurationNs>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapshot_period: Option<DurationNs>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub audit_rollback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopologyMode {
    Grid,
    Graph,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridModuleEntry {
    pub name: String,
    pub pos: [i64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub a: String,
    pub b: String,
    pub latency: DurationNs,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TopologySection {
    pub mode: TopologyMode,
    /// Grid mode: named modules on integer 2D positions.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modules: Vec<GridModuleEntry>,
    /// Graph mode: node names plus an explicit edge list.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub nodes: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edges: Vec<EdgeEntry>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimingSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_q: Option<DurationNs>,
    /// Explicit high-percentile deadline; mutually exclusive with
    /// `tau_q_p_fraction`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_q_p: Option<DurationNs>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_q_p_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_decode: Option<DurationNs>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_ff: Option<DurationNs>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_route: Option<DurationNs>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refractive_index: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub safety_margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkSection {
    pub endpoints: [String; 2],
    pub attempt_period: DurationNs,
    pub eta_trans: f64,
    /// Fixed heralded fidelity; mutually exclusive with `fidelity_range`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fidelity_range: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WorkloadMode {
    None,
    FixedRate,
    Trace,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceEntry {
    pub at: DurationNs,
    pub participants: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadSection {
    pub mode: WorkloadMode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub period: Option<DurationNs>,
    /// Explicit participant groups cycled per arrival; uniform random pairs
    /// when absent.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub arrivals: Vec<TraceEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retry_count: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub retry_spacing: Option<DurationNs>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaultSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub local_entangle: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measurement: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coordination: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub feedforward: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub multiplier: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jitter_frac: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub local_entangle: Option<DurationNs>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measurement: Option<DurationNs>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reserve_latency: Option<DurationNs>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degradation: Option<DegradationPolicy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selection_policy: Option<SelectionPolicy>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_fidelity: Option<f64>,
    #[serde(default, skip_serializing_if = "is_false")]
    pub stalled_window_as_erasure: bool,
    #[serde(default, skip_serializing_if = "is_false")]
    pub per_hop_decode: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalingSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta_trans: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dimension: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
}

/// Parsed scenario document. Sections are optional at parse time; each
/// consumer demands the ones it needs.
///
/// `[annotations]` carries free-form descriptive key/value pairs (hardware
/// context such as a code distance or cycle time); they are preserved in
/// the canonical form and the config hash but never enter any computation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub annotations: Option<std::collections::BTreeMap<String, String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub topology: Option<TopologySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<TimingSection>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub links: Vec<LinkSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workload: Option<WorkloadSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub faults: Option<FaultSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub protocol: Option<ProtocolSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingSection>,
}

impl ScenarioFile {
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))
    }

    /// Canonical serialization: durations normalized to `ns`, defaulted
    /// fields omitted. Re-parsing yields an equal `ScenarioFile`.
    pub fn to_canonical_toml(&self) -> String {
        toml::to_string(self).expect("scenario sections serialize")
    }

    /// SHA-256 of the canonical serialization, hex-encoded. Insensitive to
    /// formatting and unit spellings of the source document.
    pub fn config_sha256(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.to_canonical_toml().as_bytes());
        hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Scaling parameters with defaults applied, validated.
    pub fn scaling_params(&self) -> Result<ScalingParams, ScenarioError> {
        let s = self.scaling.clone().unwrap_or_default();
        let d = ScalingParams::default();
        let params = ScalingParams {
            a: s.a.unwrap_or(d.a),
            b: s.b.unwrap_or(d.b),
            epsilon: s.epsilon.unwrap_or(d.epsilon),
            gamma: s.gamma.unwrap_or(d.gamma),
            eta_trans: s.eta_trans.unwrap_or(d.eta_trans),
            dimension: s.dimension.unwrap_or(d.dimension),
            kappa: s.kappa.unwrap_or(d.kappa),
        };
        params.validate().map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        Ok(params)
    }

    /// Timing parameters with defaults applied, validated. `tau_q_p`
    /// defaults to `tau_q_p_fraction` (default 0.001) of `tau_q`.
    pub fn timing_params(&self) -> Result<TimingParams, ScenarioError> {
        let t = self.timing.clone().unwrap_or_default();
        let d = TimingParams::default();
        let tau_q_ns = t.tau_q.map_or(d.tau_q_ns, |v| v.0);
        let tau_q_p_ns = match (t.tau_q_p, t.tau_q_p_fraction) {
            (Some(_), Some(_)) => {
                return Err(ScenarioError::Invalid(
                    "set either timing.tau_q_p or timing.tau_q_p_fraction, not both".into(),
                ))
            }
            (Some(v), None) => v.0,
            (None, fraction) => {
                let f = fraction.unwrap_or(0.001);
                if !(f.is_finite() && f > 0.0 && f <= 1.0) {
                    return Err(ScenarioError::Invalid(format!(
                        "tau_q_p_fraction must lie in (0, 1], got {f}"
                    )));
                }
                crate::protocol::round_ns(tau_q_ns as f64 * f)
            }
        };
        let params = TimingParams {
            tau_q_ns,
            tau_q_p_ns,
            tau_decode_ns: t.tau_decode.map_or(d.tau_decode_ns, |v| v.0),
            tau_ff_ns: t.tau_ff.map_or(d.tau_ff_ns, |v| v.0),
            tau_route_ns: t.tau_route.map_or(d.tau_route_ns, |v| v.0),
            alpha: t.alpha.unwrap_or(d.alpha),
            refractive_index: t.refractive_index.unwrap_or(d.refractive_index),
            light_speed_m_per_s: d.light_speed_m_per_s,
            safety_margin: t.safety_margin.unwrap_or(d.safety_margin),
        };
        params.validate().map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        Ok(params)
    }

    fn build_topology(&self, timing: &TimingParams) -> Result<Topology, ScenarioError> {
        let section = self
            .topology
            .as_ref()
            .ok_or(ScenarioError::MissingSection("topology"))?;
        let invalid = ScenarioError::Invalid;
        match section.mode {
            TopologyMode::Grid => {
                if !section.nodes.is_empty() || !section.edges.is_empty() {
                    return Err(invalid("grid topologies take modules, not nodes/edges".into()));
                }
                let modules = section
                    .modules
                    .iter()
                    .map(|m| GridModule { name: m.name.clone(), x: m.pos[0], y: m.pos[1] })
                    .collect();
                let per_unit = timing.alpha * timing.tau_route_ns as f64;
                Topology::grid(modules, per_unit).map_err(|e| invalid(e.to_string()))
            }
            TopologyMode::Graph => {
                if !section.modules.is_empty() {
                    return Err(invalid("graph topologies take nodes/edges, not modules".into()));
                }
                let names = section.nodes.clone();
                let index = |name: &str| {
                    names
                        .iter()
                        .position(|n| n == name)
                        .map(|i| i as u32)
                        .ok_or_else(|| ScenarioError::Invalid(format!("edge references unknown node {name:?}")))
                };
                let edges = section
                    .edges
                    .iter()
                    .map(|e| {
                        Ok(GraphEdge {
                            a: index(&e.a)?,
                            b: index(&e.b)?,
                            latency_ns: e.latency.0,
                        })
                    })
                    .collect::<Result<Vec<_>, ScenarioError>>()?;
                Topology::graph(names, edges).map_err(|e| ScenarioError::Invalid(e.to_string()))
            }
        }
    }

    fn protocol_params(&self) -> Result<ProtocolParams, ScenarioError> {
        let p = self.protocol.clone().unwrap_or_default();
        let d = ProtocolParams::default();
        let params = ProtocolParams {
            multiplier: p.multiplier.unwrap_or(d.multiplier),
            jitter_frac: p.jitter_frac.unwrap_or(d.jitter_frac),
            local_entangle_ns: p.local_entangle.map_or(d.local_entangle_ns, |v| v.0),
            measurement_ns: p.measurement.map_or(d.measurement_ns, |v| v.0),
            reserve_latency_ns: p.reserve_latency.map_or(d.reserve_latency_ns, |v| v.0),
            degradation: p.degradation.unwrap_or(d.degradation),
            stalled_window_as_erasure: p.stalled_window_as_erasure,
            per_hop_decode: p.per_hop_decode,
        };
        params.validate().map_err(|e| ScenarioError::Invalid(e.to_string()))?;
        Ok(params)
    }

    /// Full simulation config. Requires the sim, topology, and workload
    /// sections; the seed and duration are mandatory.
    pub fn sim_config(&self) -> Result<SimConfig, ScenarioError> {
        let sim = self.sim.as_ref().ok_or(ScenarioError::MissingSection("sim"))?;
        let duration_ns = sim
            .duration
            .ok_or_else(|| ScenarioError::Invalid("sim.duration is required".into()))?
            .0;
        let seed = sim
            .seed
            .ok_or_else(|| ScenarioError::Invalid("sim.seed is required".into()))?;
        let timing = self.timing_params()?;
        let topology = self.build_topology(&timing)?;
        let module_id = |name: &str| {
            topology
                .id_of(name)
                .map_err(|e| ScenarioError::Invalid(e.to_string()))
        };

        let mut links = Vec::with_capacity(self.links.len());
        for l in &self.links {
            let fidelity = match (l.fidelity, l.fidelity_range) {
                (Some(_), Some(_)) => {
                    return Err(ScenarioError::Invalid(
                        "set either fidelity or fidelity_range on a link, not both".into(),
                    ))
                }
                (Some(f), None) => FidelityDist::Fixed(f),
                (None, Some([lo, hi])) => FidelityDist::Uniform { lo, hi },
                (None, None) => FidelityDist::Fixed(1.0),
            };
            links.push(LinkConfig {
                link: LinkKey::new(module_id(&l.endpoints[0])?, module_id(&l.endpoints[1])?),
                attempt_period_ns: l.attempt_period.0,
                eta_trans: l.eta_trans,
                fidelity,
            });
        }

        let workload_section = self
            .workload
            .as_ref()
            .ok_or(ScenarioError::MissingSection("workload"))?;
        let to_ids = |names: &[String]| {
            names
                .iter()
                .map(|n| module_id(n))
                .collect::<Result<Vec<_>, _>>()
        };
        let workload = match workload_section.mode {
            WorkloadMode::None => WorkloadConfig::None,
            WorkloadMode::FixedRate => {
                let period_ns = workload_section
                    .period
                    .ok_or_else(|| ScenarioError::Invalid("fixed-rate workload needs a period".into()))?
                    .0;
                let selection = if workload_section.groups.is_empty() {
                    Selection::UniformPairs
                } else {
                    Selection::Groups(
                        workload_section
                            .groups
                            .iter()
                            .map(|g| to_ids(g))
                            .collect::<Result<Vec<_>, _>>()?,
                    )
                };
                WorkloadConfig::FixedRate { period_ns, selection }
            }
            WorkloadMode::Trace => WorkloadConfig::Trace(
                workload_section
                    .arrivals
                    .iter()
                    .map(|a| {
                        Ok(TraceArrival {
                            at_ns: a.at.0,
                            participants: to_ids(&a.participants)?,
                        })
                    })
                    .collect::<Result<Vec<_>, ScenarioError>>()?,
            ),
        };

        let f = self.faults.clone().unwrap_or_default();
        let faults = FaultModel {
            p_local_entangle: f.local_entangle.unwrap_or(0.0),
            p_measurement: f.measurement.unwrap_or(0.0),
            p_coordination: f.coordination.unwrap_or(0.0),
            p_feedforward: f.feedforward.unwrap_or(0.0),
        };

        let protocol_section = self.protocol.clone().unwrap_or_default();
        let cfg = SimConfig {
            topology,
            timing,
            links,
            workload,
            faults,
            protocol: self.protocol_params()?,
            selection_policy: protocol_section.selection_policy.unwrap_or_default(),
            min_fidelity: protocol_section.min_fidelity.unwrap_or(0.0),
            retry: RetryPolicy {
                count: workload_section.retry_count.unwrap_or(0),
                spacing_ns: workload_section
                    .retry_spacing
                    .map_or(RetryPolicy::default().spacing_ns, |v| v.0),
            },
            duration_ns,
            sweep_period_ns: sim.sweep_period.map_or(1_000, |v| v.0),
            snapshot_period_ns: sim.snapshot_period.map(|v| v.0),
            audit_rollback: sim.audit_rollback,
            seed,
        };
        cfg.validate().map_err(ScenarioError::Invalid)?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const FULL: &str = r#"
[sim]
duration = "1ms"
seed = 42
sweep_period = "1us"

[topology]
mode = "grid"

[[topology.modules]]
name = "A"
pos = [0, 0]

[[topology.modules]]
name = "B"
pos = [3, 0]

[timing]
tau_q = "100us"
tau_q_p_fraction = 0.5

[[links]]
endpoints = ["A", "B"]
attempt_period = "2.5us"
eta_trans = 0.5
fidelity = 0.97

[workload]
mode = "fixed-rate"
period = "10us"

[protocol]
multiplier = 1.0
jitter_frac = 0.0
"#;

    #[test]
    fn duration_parsing_is_exact() {
        assert_eq!(parse_duration_ns("2.5us").unwrap(), 2_500);
        assert_eq!(parse_duration_ns("100ns").unwrap(), 100);
        assert_eq!(parse_duration_ns("1ms").unwrap(), 1_000_000);
        assert_eq!(parse_duration_ns("1s").unwrap(), 1_000_000_000);
        assert_eq!(parse_duration_ns("0.000001s").unwrap(), 1_000);
        assert_eq!(parse_duration_ns(" 42us ").unwrap(), 42_000);
        assert_eq!(parse_duration_ns("0ns").unwrap(), 0);
        // Fractional nanoseconds are rejected, never rounded.
        assert!(parse_duration_ns("0.5ns").is_err());
        assert!(parse_duration_ns("1.0000001us").is_err());
        assert!(parse_duration_ns("10").is_err());
        assert!(parse_duration_ns("-5us").is_err());
        assert!(parse_duration_ns("1e3ns").is_err());
        assert!(parse_duration_ns("ns").is_err());
    }

    #[test]
    fn full_scenario_builds_a_config() {
        let file = ScenarioFile::parse(FULL).unwrap();
        let cfg = file.sim_config().unwrap();
        assert_eq!(cfg.duration_ns, 1_000_000);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.timing.tau_q_p_ns, 50_000);
        assert_eq!(cfg.links[0].attempt_period_ns, 2_500);
        assert_eq!(cfg.links[0].link, LinkKey::new(0, 1));
        assert_eq!(cfg.protocol.multiplier, 1.0);
        crate::sim::run_scenario(&cfg).unwrap();
    }

    #[test]
    fn unknown_keys_are_fatal() {
        let bad = FULL.replace("[protocol]", "[protocol]\ntypo_key = 3");
        assert!(matches!(ScenarioFile::parse(&bad), Err(ScenarioError::Parse(_))));
        assert!(ScenarioFile::parse("[nonsense]\nx = 1").is_err());
    }

    #[test]
    fn seed_and_duration_are_mandatory() {
        let file = ScenarioFile::parse(&FULL.replace("seed = 42\n", "")).unwrap();
        assert!(matches!(file.sim_config(), Err(ScenarioError::Invalid(_))));
        let file = ScenarioFile::parse(&FULL.replace("duration = \"1ms\"\n", "")).unwrap();
        assert!(file.sim_config().is_err());
    }

    #[test]
    fn canonical_form_round_trips() {
        let file = ScenarioFile::parse(FULL).unwrap();
        let canonical = file.to_canonical_toml();
        let reparsed = ScenarioFile::parse(&canonical).unwrap();
        assert_eq!(file, reparsed);
        assert_eq!(canonical, reparsed.to_canonical_toml());
        assert_eq!(file.config_sha256(), reparsed.config_sha256());
        // Semantically equal configs hash alike regardless of unit spelling.
        let respelled = FULL.replace("\"2.5us\"", "\"2500ns\"");
        assert_eq!(ScenarioFile::parse(&respelled).unwrap().config_sha256(), file.config_sha256());
    }

    #[test]
    fn graph_topology_and_trace_workload() {
        let text = r#"
[sim]
duration = "1ms"
seed = 7

[topology]
mode = "graph"
nodes = ["A", "B", "C"]

[[topology.edges]]
a = "A"
b = "B"
latency = "10ns"

[[topology.edges]]
a = "B"
b = "C"
latency = "5ns"

[[links]]
endpoints = ["A", "C"]
attempt_period = "5us"
eta_trans = 1.0

[workload]
mode = "trace"

[[workload.arrivals]]
at = "20us"
participants = ["A", "C"]
"#;
        let file = ScenarioFile::parse(text).unwrap();
        let cfg = file.sim_config().unwrap();
        assert_eq!(cfg.topology.classical_latency_ns(0, 2).unwrap(), 15.0);
        let result = crate::sim::run_scenario(&cfg).unwrap();
        assert_eq!(result.outcomes.len(), 1);
    }

    #[test]
    fn scaling_and_timing_defaults() {
        let file = ScenarioFile::parse("").unwrap();
        let scaling = file.scaling_params().unwrap();
        assert_eq!(scaling.a, 1.0);
        assert_eq!(scaling.b, 100.0);
        assert_eq!(scaling.eta_trans, 0.1);
        let timing = file.timing_params().unwrap();
        assert_eq!(timing.tau_q_ns, 100_000);
        assert_eq!(timing.tau_q_p_ns, 100);
        assert_eq!(timing.tau_route_ns, 115);

        let file = ScenarioFile::parse("[timing]\ntau_q_p = \"1us\"\ntau_q_p_fraction = 0.1").unwrap();
        assert!(file.timing_params().is_err());
    }

    #[test]
    fn mutually_exclusive_fidelity_forms() {
        let both = FULL.replace("fidelity = 0.97", "fidelity = 0.97\nfidelity_range = [0.9, 0.99]");
        let file = ScenarioFile::parse(&both).unwrap();
        assert!(file.sim_config().is_err());
    }
}
