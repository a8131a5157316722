//! Line-delimited JSON record rendering for the analytic subcommands.
//! Every record leads with the schema version and keeps a fixed field order.

use serde::Serialize;

use qarchsim_core::metrics::StarvationPoint;
use qarchsim_core::report::SCHEMA_VERSION;
use qarchsim_core::scaling::{CatalogEntry, ScalingParams};
use qarchsim_core::timing::TimingParams;

fn line<T: Serialize>(record: &T) -> String {
    let mut s = serde_json::to_string(record).expect("record serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct CostSample {
    schema: u32,
    kind: &'static str,
    n_qubits: f64,
    c_homogeneous: f64,
    c_modular: f64,
}

#[derive(Serialize)]
struct CrossoverLine {
    schema: u32,
    kind: &'static str,
    a: f64,
    b: f64,
    epsilon: f64,
    gamma: f64,
    eta_trans: f64,
    n_c: Option<f64>,
    n_c_logical: Option<f64>,
}

#[derive(Serialize)]
struct SweepLine {
    schema: u32,
    kind: &'static str,
    eta_trans: f64,
    n_c: Option<f64>,
}

pub fn crossover_records(
    params: &ScalingParams,
    crossover: Option<f64>,
    samples: &[(f64, f64, f64)],
    sweep: &[(f64, Option<f64>)],
) -> String {
    let mut out = line(&CrossoverLine {
        schema: SCHEMA_VERSION,
        kind: "crossover",
        a: params.a,
        b: params.b,
        epsilon: params.epsilon,
        gamma: params.gamma,
        eta_trans: params.eta_trans,
        n_c: crossover,
        n_c_logical: crossover.map(|nc| params.logical_equivalent(nc)),
    });
    for &(n_qubits, c_homogeneous, c_modular) in samples {
        out.push_str(&line(&CostSample {
            schema: SCHEMA_VERSION,
            kind: "cost_sample",
            n_qubits,
            c_homogeneous,
            c_modular,
        }));
    }
    for &(eta_trans, n_c) in sweep {
        out.push_str(&line(&SweepLine {
            schema: SCHEMA_VERSION,
            kind: "eta_sweep",
            eta_trans,
            n_c,
        }));
    }
    out
}

#[derive(Serialize)]
struct WallLine {
    schema: u32,
    kind: &'static str,
    tau_q_ns: u64,
    safety_margin: f64,
    tau_decode_ns: u64,
    tau_ff_ns: u64,
    alpha: f64,
    tau_route_ns: u64,
    wall_n: f64,
}

#[derive(Serialize)]
struct LatencySample {
    schema: u32,
    kind: &'static str,
    n_qubits: f64,
    tau_c_ns: f64,
}

#[derive(Serialize)]
struct SensitivityLine {
    schema: u32,
    kind: &'static str,
    tau_route_ns: f64,
    wall_n: f64,
}

pub fn wall_records(
    timing: &TimingParams,
    wall: f64,
    curve: &[(f64, f64)],
    sensitivity: &[(f64, f64)],
) -> String {
    let mut out = line(&WallLine {
        schema: SCHEMA_VERSION,
        kind: "wall",
        tau_q_ns: timing.tau_q_ns,
        safety_margin: timing.safety_margin,
        tau_decode_ns: timing.tau_decode_ns,
        tau_ff_ns: timing.tau_ff_ns,
        alpha: timing.alpha,
        tau_route_ns: timing.tau_route_ns,
        wall_n: wall,
    });
    for &(n_qubits, tau_c_ns) in curve {
        out.push_str(&line(&LatencySample {
            schema: SCHEMA_VERSION,
            kind: "latency_sample",
            n_qubits,
            tau_c_ns,
        }));
    }
    for &(tau_route_ns, wall_n) in sensitivity {
        out.push_str(&line(&SensitivityLine {
            schema: SCHEMA_VERSION,
            kind: "route_sensitivity",
            tau_route_ns,
            wall_n,
        }));
    }
    out
}

#[derive(Serialize)]
struct BoundLine {
    schema: u32,
    kind: &'static str,
    tau_q_p_ns: u64,
    tau_decode_ns: u64,
    tau_ff_ns: u64,
    refractive_index: f64,
    light_speed_m_per_s: f64,
    max_control_radius_m: f64,
}

pub fn bound_record(timing: &TimingParams, bound_m: f64) -> String {
    line(&BoundLine {
        schema: SCHEMA_VERSION,
        kind: "locality_bound",
        tau_q_p_ns: timing.tau_q_p_ns,
        tau_decode_ns: timing.tau_decode_ns,
        tau_ff_ns: timing.tau_ff_ns,
        refractive_index: timing.refractive_index,
        light_speed_m_per_s: timing.light_speed_m_per_s,
        max_control_radius_m: bound_m,
    })
}

#[derive(Serialize)]
struct NopsLine<'a> {
    schema: u32,
    kind: &'static str,
    platform: &'a str,
    tau_q_min_s: f64,
    tau_q_max_s: f64,
    tau_gate_min_s: Option<f64>,
    tau_gate_max_s: Option<f64>,
    n_ops_min: Option<f64>,
    n_ops_max: Option<f64>,
    n_ops_published: &'a str,
}

pub fn nops_records(catalog: &[CatalogEntry]) -> String {
    let mut out = String::new();
    for entry in catalog {
        let p = &entry.profile;
        let ops = p.ops_per_coherence().ok();
        out.push_str(&line(&NopsLine {
            schema: SCHEMA_VERSION,
            kind: "ops_per_window",
            platform: &p.name,
            tau_q_min_s: p.tau_q_min_s,
            tau_q_max_s: p.tau_q_max_s,
            tau_gate_min_s: p.tau_gate_s.map(|g| g.0),
            tau_gate_max_s: p.tau_gate_s.map(|g| g.1),
            n_ops_min: ops.map(|o| o.0),
            n_ops_max: ops.map(|o| o.1),
            n_ops_published: entry.published_n_ops,
        }));
    }
    out
}

#[derive(Serialize)]
struct StarvationLine<'a> {
    schema: u32,
    kind: &'static str,
    #[serde(flatten)]
    point: &'a StarvationPoint,
}

pub fn starvation_records(rows: &[StarvationPoint]) -> String {
    let mut out = String::new();
    for point in rows {
        out.push_str(&line(&StarvationLine {
            schema: SCHEMA_VERSION,
            kind: "starvation",
            point,
        }));
    }
    out
}
