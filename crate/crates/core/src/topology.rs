//! Module placement and the classical-latency model between modules.
//!
//! Two modes: a 2D grid with Manhattan routing (per-unit latency derived as
//! `alpha * tau_route`), or an explicit edge list with shortest-path routing.
//! Latencies are real-valued nanoseconds; the simulation rounds half-up when
//! converting them to event delays.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::ModuleId;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopologyError {
    #[error("unknown module id {0}")]
    UnknownModule(ModuleId),
    #[error("unknown module name {0:?}")]
    UnknownName(String),
    #[error("invalid topology: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridModule {
    pub name: String,
    pub x: i64,
    pub y: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphEdge {
    pub a: ModuleId,
    pub b: ModuleId,
    pub latency_ns: u64,
}

#[derive(Debug, Clone, PartialEq)]
enum Routing {
    /// Manhattan distance times a per-unit latency.
    Grid {
        positions: Vec<(i64, i64)>,
        per_unit_latency_ns: f64,
    },
    /// All-pairs shortest paths over the edge list, precomputed.
    Graph {
        /// latency[i][j] in ns; hops[i][j] counts edges on the chosen path.
        latency: Vec<Vec<f64>>,
        hops: Vec<Vec<u32>>,
    },
}

/// Validated module topology with a symmetric latency metric.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    names: Vec<String>,
    routing: Routing,
}

impl Topology {
    /// Grid mode. `per_unit_latency_ns` is normally `alpha * tau_route`.
    pub fn grid(modules: Vec<GridModule>, per_unit_latency_ns: f64) -> Result<Self, TopologyError> {
        if modules.len() < 2 {
            return Err(TopologyError::Invalid("need at least two modules".into()));
        }
        if !(per_unit_latency_ns.is_finite() && per_unit_latency_ns > 0.0) {
            return Err(TopologyError::Invalid(format!(
                "per-unit latency must be positive, got {per_unit_latency_ns}"
            )));
        }
        let mut names = Vec::with_capacity(modules.len());
        let mut positions = Vec::with_capacity(modules.len());
        for m in &modules {
            if names.contains(&m.name) {
                return Err(TopologyError::Invalid(format!("duplicate module name {:?}", m.name)));
            }
            if positions.contains(&(m.x, m.y)) {
                return Err(TopologyError::Invalid(format!(
                    "modules share position ({}, {})",
                    m.x, m.y
                )));
            }
            names.push(m.name.clone());
            positions.push((m.x, m.y));
        }
        Ok(Self {
            names,
            routing: Routing::Grid { positions, per_unit_latency_ns },
        })
    }

    /// Graph mode over an explicit edge list. The graph must be connected and
    /// edge latencies strictly positive (distinct modules at zero latency
    /// would break the locality metric).
    pub fn graph(names: Vec<String>, edges: Vec<GraphEdge>) -> Result<Self, TopologyError> {
        let n = names.len();
        if n < 2 {
            return Err(TopologyError::Invalid("need at least two modules".into()));
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(TopologyError::Invalid(format!("duplicate module name {name:?}")));
            }
        }
        let mut adj: Vec<Vec<(usize, u64)>> = vec![Vec::new(); n];
        for e in &edges {
            let (a, b) = (e.a as usize, e.b as usize);
            if a >= n {
                return Err(TopologyError::UnknownModule(e.a));
            }
            if b >= n {
                return Err(TopologyError::UnknownModule(e.b));
            }
            if a == b {
                return Err(TopologyError::Invalid("self-loop edge".into()));
            }
            if e.latency_ns == 0 {
                return Err(TopologyError::Invalid("edge latency must be positive".into()));
            }
            adj[a].push((b, e.latency_ns));
            adj[b].push((a, e.latency_ns));
        }
        let mut latency = vec![vec![0.0; n]; n];
        let mut hops = vec![vec![0u32; n]; n];
        for src in 0..n {
            let (dist, hop) = dijkstra(&adj, src);
            for dst in 0..n {
                let d = dist[dst].ok_or_else(|| {
                    TopologyError::Invalid(format!(
                        "graph is disconnected: no path {} -> {}",
                        names[src], names[dst]
                    ))
                })?;
                latency[src][dst] = d as f64;
                hops[src][dst] = hop[dst];
            }
        }
        Ok(Self {
            names,
            routing: Routing::Graph { latency, hops },
        })
    }

    pub fn module_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, id: ModuleId) -> &str {
        &self.names[id as usize]
    }

    pub fn id_of(&self, name: &str) -> Result<ModuleId, TopologyError> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| i as ModuleId)
            .ok_or_else(|| TopologyError::UnknownName(name.to_string()))
    }

    fn check(&self, id: ModuleId) -> Result<(), TopologyError> {
        if (id as usize) < self.names.len() {
            Ok(())
        } else {
            Err(TopologyError::UnknownModule(id))
        }
    }

    /// One-way classical latency between two modules, ns. Symmetric, and
    /// zero iff `i == j`.
    pub fn classical_latency_ns(&self, i: ModuleId, j: ModuleId) -> Result<f64, TopologyError> {
        self.check(i)?;
        self.check(j)?;
        if i == j {
            return Ok(0.0);
        }
        Ok(match &self.routing {
            Routing::Grid { positions, per_unit_latency_ns } => {
                let (xi, yi) = positions[i as usize];
                let (xj, yj) = positions[j as usize];
                let dist = (xi - xj).unsigned_abs() + (yi - yj).unsigned_abs();
                dist as f64 * per_unit_latency_ns
            }
            Routing::Graph { latency, .. } => latency[i as usize][j as usize],
        })
    }

    /// Routing hops between two modules: lattice units in grid mode, edge
    /// count along the shortest path in graph mode.
    pub fn hops(&self, i: ModuleId, j: ModuleId) -> Result<u32, TopologyError> {
        self.check(i)?;
        self.check(j)?;
        if i == j {
            return Ok(0);
        }
        Ok(match &self.routing {
            Routing::Grid { positions, .. } => {
                let (xi, yi) = positions[i as usize];
                let (xj, yj) = positions[j as usize];
                ((xi - xj).unsigned_abs() + (yi - yj).unsigned_abs()) as u32
            }
            Routing::Graph { hops, .. } => hops[i as usize][j as usize],
        })
    }

    /// Largest one-way latency over all module pairs, ns.
    pub fn diameter_latency_ns(&self) -> f64 {
        let n = self.names.len() as ModuleId;
        let mut max = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                max = max.max(self.classical_latency_ns(i, j).expect("ids in range"));
            }
        }
        max
    }
}

fn dijkstra(adj: &[Vec<(usize, u64)>], src: usize) -> (Vec<Option<u64>>, Vec<u32>) {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let mut dist: Vec<Option<u64>> = vec![None; adj.len()];
    let mut hops = vec![0u32; adj.len()];
    let mut heap = BinaryHeap::new();
    dist[src] = Some(0);
    heap.push(Reverse((0u64, 0u32, src)));
    while let Some(Reverse((d, h, u))) = heap.pop() {
        if dist[u] != Some(d) || (dist[u] == Some(d) && hops[u] != h && h > hops[u]) {
            continue;
        }
        for &(v, w) in &adj[u] {
            let nd = d + w;
            let better = match dist[v] {
                None => true,
                Some(cur) => nd < cur || (nd == cur && h + 1 < hops[v]),
            };
            if better {
                dist[v] = Some(nd);
                hops[v] = h + 1;
                heap.push(Reverse((nd, h + 1, v)));
            }
        }
    }
    (dist, hops)
}
