//! Deterministic discrete-event simulation and analytic toolkit for modular
//! quantum computing architectures.
//!
//! The analytic layer covers the homogeneous-vs-modular cost model with its
//! crossover scale, the causal locality bound on control distance, and the
//! sqrt(N) coordination-latency wall. The simulation layer runs a
//! deadline-bearing entanglement supply chain under the time-aware
//! Reserve-Commit protocol, classifying failures into location-known erasure
//! markers versus depolarizing background for downstream error correction.

pub mod ledger;
pub mod metrics;
pub mod protocol;
pub mod report;
pub mod scaling;
pub mod scenario;
pub mod sim;
pub mod timing;
pub mod topology;

pub use ledger::{EntanglementTuple, Ledger, LinkConfig, LinkKey, ModuleId, TupleId, TxnId};
pub use protocol::{Classification, FailureKind, FailureRecord, Transaction, TxnState};
pub use scaling::ScalingParams;
pub use timing::TimingParams;
pub use topology::Topology;
