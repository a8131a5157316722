//! Closed-form architectural cost model: homogeneous vs. modular space-time
//! cost, the crossover condition and scale, and per-platform
//! operations-per-coherence-window profiles.
//!
//! Costs are dimensionless, normalized per fixed algorithmic depth. `N` is
//! accepted as a real number since the model is asymptotic.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Errors from cost-model construction and evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScalingError {
    #[error("prefactor {name} must be positive and finite, got {value}")]
    BadPrefactor { name: &'static str, value: f64 },
    #[error("eta_trans must lie in (0, 1], got {0}")]
    BadEta(f64),
    #[error("gamma must be >= 1 (linear routing cost floor), got {0}")]
    BadGamma(f64),
    #[error("epsilon must be > 0 (excess geometric exponent), got {0}")]
    BadEpsilon(f64),
    #[error("n_qubits must be >= 1, got {0}")]
    BadQubitCount(f64),
    #[error("cost evaluation overflowed to a non-finite value")]
    NonFinite,
    #[error("platform profile {0:?} is memory-only (no gate time)")]
    MemoryOnly(String),
    #[error("platform profile has an invalid range: {0}")]
    BadProfile(String),
}

/// Prefactors and exponents of the architectural cost model.
///
/// Invariants are enforced by [`ScalingParams::new`] and [`ScalingParams::validate`]:
/// `a > 0`, `b > 0`, `epsilon > 0`, `gamma >= 1`, `eta_trans` in `(0, 1]`.
/// `dimension` is informational (it does not derive `epsilon`); `kappa` only
/// annotates outputs with logical-qubit equivalents `N_L = N / kappa`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    /// Homogeneous cost prefactor (per qubit-depth).
    pub a: f64,
    /// Per-interface cost prefactor.
    pub b: f64,
    /// Excess geometric exponent of the homogeneous architecture.
    pub epsilon: f64,
    /// Modular routing exponent.
    pub gamma: f64,
    /// Transduction success probability in (0, 1].
    pub eta_trans: f64,
    /// Spatial embedding dimension (informational).
    pub dimension: u32,
    /// Physical-to-logical overhead factor; annotation only.
    pub kappa: f64,
}

impl Default for ScalingParams {
    /// Representative planar-layout parameters: `A=1`, `B=100`, `epsilon=0.5`,
    /// `gamma=1`, `eta_trans=0.1`, `D=2`, `kappa=1e3`.
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 100.0,
            epsilon: 0.5,
            gamma: 1.0,
            eta_trans: 0.1,
            dimension: 2,
            kappa: 1e3,
        }
    }
}

impl ScalingParams {
    pub fn new(a: f64, b: f64, epsilon: f64, gamma: f64, eta_trans: f64) -> Result<Self, ScalingError> {
        let params = Self {
            a,
            b,
            epsilon,
            gamma,
            eta_trans,
            ..Self::default()
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<(), ScalingError> {
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(ScalingError::BadPrefactor { name: "A", value: self.a });
        }
        if !(self.b.is_finite() && self.b > 0.0) {
            return Err(ScalingError::BadPrefactor { name: "B", value: self.b });
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(ScalingError::BadPrefactor { name: "kappa", value: self.kappa });
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(ScalingError::BadEpsilon(self.epsilon));
        }
        if !(self.gamma.is_finite() && self.gamma >= 1.0) {
            return Err(ScalingError::BadGamma(self.gamma));
        }
        check_eta(self.eta_trans)?;
        Ok(())
    }

    /// Homogeneous space-time cost `A * N^(1+epsilon)`.
    pub fn cost_homogeneous(&self, n_qubits: f64) -> Result<f64, ScalingError> {
        check_n(n_qubits)?;
        finite(self.a * n_qubits.powf(1.0 + self.epsilon))
    }

    /// Modular space-time cost `(B / eta_trans) * N^gamma`.
    pub fn cost_modular(&self, n_qubits: f64) -> Result<f64, ScalingError> {
        check_n(n_qubits)?;
        finite(self.b / self.eta_trans * n_qubits.powf(self.gamma))
    }

    /// True iff the structural phase condition `1 + epsilon > gamma` holds,
    /// i.e. a finite crossover scale exists. Equality is excluded.
    pub fn crossover_condition(&self) -> bool {
        1.0 + self.epsilon > self.gamma
    }

    /// Crossover scale `N_c = ((B/A) / eta_trans)^(1 / ((1+epsilon) - gamma))`,
    /// or `None` when the exponent gap is not strictly positive.
    pub fn crossover_scale(&self) -> Option<f64> {
        if !self.crossover_condition() {
            return None;
        }
        let base = (self.b / self.a) / self.eta_trans;
        let gap = (1.0 + self.epsilon) - self.gamma;
        Some(base.powf(1.0 / gap))
    }

    /// Crossover scale for each transduction efficiency in `eta_values`,
    /// with that eta substituted for the stored one. Row order matches input.
    pub fn sweep_crossover(&self, eta_values: &[f64]) -> Result<Vec<(f64, Option<f64>)>, ScalingError> {
        let mut rows = Vec::with_capacity(eta_values.len());
        for &eta in eta_values {
            check_eta(eta)?;
            let point = Self { eta_trans: eta, ..*self };
            rows.push((eta, point.crossover_scale()));
        }
        Ok(rows)
    }

    /// Logical-qubit equivalent of a physical footprint, `N_L = N / kappa`.
    pub fn logical_equivalent(&self, n_qubits: f64) -> f64 {
        n_qubits / self.kappa
    }
}

fn check_n(n: f64) -> Result<(), ScalingError> {
    if !(n.is_finite() && n >= 1.0) {
        return Err(ScalingError::BadQubitCount(n));
    }
    Ok(())
}

fn check_eta(eta: f64) -> Result<(), ScalingError> {
    if !(eta.is_finite() && eta > 0.0 && eta <= 1.0) {
        return Err(ScalingError::BadEta(eta));
    }
    Ok(())
}

fn finite(v: f64) -> Result<f64, ScalingError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ScalingError::NonFinite)
    }
}

/// Coherence/gate-time envelope for one hardware platform. Times in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformProfile {
    pub name: String,
    pub tau_q_min_s: f64,
    pub tau_q_max_s: f64,
    /// Gate-time range; `None` for memory-only platforms.
    pub tau_gate_s: Option<(f64, f64)>,
}

impl PlatformProfile {
    pub fn new(
        name: impl Into<String>,
        tau_q_min_s: f64,
        tau_q_max_s: f64,
        tau_gate_s: Option<(f64, f64)>,
    ) -> Result<Self, ScalingError> {
        let profile = Self {
            name: name.into(),
            tau_q_min_s,
            tau_q_max_s,
            tau_gate_s,
        };
        profile.validate()?;
        Ok(profile)
    }

    pub fn validate(&self) -> Result<(), ScalingError> {
        let ordered_positive = |lo: f64, hi: f64| lo > 0.0 && hi >= lo && hi.is_finite();
        if !ordered_positive(self.tau_q_min_s, self.tau_q_max_s) {
            return Err(ScalingError::BadProfile(format!(
                "coherence range {}..{} for {}",
                self.tau_q_min_s, self.tau_q_max_s, self.name
            )));
        }
        if let Some((lo, hi)) = self.tau_gate_s {
            if !ordered_positive(lo, hi) {
                return Err(ScalingError::BadProfile(format!(
                    "gate range {}..{} for {}",
                    lo, hi, self.name
                )));
            }
        }
        Ok(())
    }

    /// Operations executable within a coherence window, `N_ops ~ tau_q / tau_gate`.
    ///
    /// The pessimistic bound divides the shortest coherence time by the
    /// longest gate time; the optimistic bound the reverse. Memory-only
    /// platforms yield a distinct error.
    pub fn ops_per_coherence(&self) -> Result<(f64, f64), ScalingError> {
        let (gate_min, gate_max) = self
            .tau_gate_s
            .ok_or_else(|| ScalingError::MemoryOnly(self.name.clone()))?;
        Ok((self.tau_q_min_s / gate_max, self.tau_q_max_s / gate_min))
    }
}

/// One row of the built-in platform catalog: measured envelope plus the
/// as-published order-of-magnitude annotation, stored verbatim and not
/// reconciled against the computed ratio.
#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub profile: PlatformProfile,
    /// Published operations-per-window annotation (order of magnitude).
    pub published_n_ops: &'static str,
}

/// Built-in read-only platform catalog (four representative modalities).
pub fn platform_catalog() -> Vec<CatalogEntry> {
    let rows = [
        ("Superconducting", 50e-6, 500e-6, Some((20e-9, 100e-9)), "10^3-10^5"),
        ("Neutral Atom (Rydberg)", 50e-6, 200e-6, Some((0.2e-6, 2e-6)), "10^2-10^3"),
        ("Neutral Atom (Hyperfine)", 1.0, 10.0, None, "Storage"),
        ("Trapped Ion", 1.0, 100.0, Some((1e-6, 100e-6)), "10^4-10^7"),
    ];
    rows.iter()
        .map(|&(name, qmin, qmax, gate, published)| CatalogEntry {
            profile: PlatformProfile::new(name, qmin, qmax, gate)
                .expect("catalog rows are well-formed"),
            published_n_ops: published,
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(a: f64, b: f64, epsilon: f64, gamma: f64, eta: f64) -> ScalingParams {
        ScalingParams::new(a, b, epsilon, gamma, eta).unwrap()
    }

    #[test]
    fn homogeneous_cost_hand_values() {
        let p = params(1.0, 1.0, 0.5, 1.0, 1.0);
        assert_relative_eq!(p.cost_homogeneous(1.0).unwrap(), 1.0);
        assert_relative_eq!(p.cost_homogeneous(100.0).unwrap(), 1000.0, max_relative = 1e-12);
        let p2 = params(2.0, 1.0, 0.5, 1.0, 1.0);
        assert_relative_eq!(p2.cost_homogeneous(1e4).unwrap(), 2e6, max_relative = 1e-12);
    }

    #[test]
    fn modular_cost_hand_values() {
        let p = params(1.0, 1.0, 0.5, 1.0, 1.0);
        assert_relative_eq!(p.cost_modular(7.0).unwrap(), 7.0);
        let p2 = params(1.0, 100.0, 0.5, 1.0, 0.1);
        assert_relative_eq!(p2.cost_modular(1000.0).unwrap(), 1e6, max_relative = 1e-12);
        let p3 = params(1.0, 10.0, 0.5, 1.2, 0.01);
        // 10^3 * 100^1.2
        assert_relative_eq!(p3.cost_modular(100.0).unwrap(), 1e3 * 100f64.powf(1.2), max_relative = 1e-12);
        assert_relative_eq!(p3.cost_modular(100.0).unwrap(), 251_188.643, max_relative = 1e-6);
    }

    #[test]
    fn rejects_subunit_qubit_counts() {
        let p = ScalingParams::default();
        assert!(matches!(p.cost_homogeneous(0.0), Err(ScalingError::BadQubitCount(_))));
        assert!(matches!(p.cost_modular(-3.0), Err(ScalingError::BadQubitCount(_))));
    }

    #[test]
    fn crossover_condition_is_strict() {
        assert!(params(1.0, 1.0, 0.5, 1.0, 1.0).crossover_condition());
        assert!(!params(1.0, 1.0, 0.5, 1.5, 1.0).crossover_condition());
        assert!(params(1.0, 1.0, 0.2, 1.1, 1.0).crossover_condition());
    }

    #[test]
    fn crossover_scale_reference_points() {
        let p = params(1.0, 100.0, 0.5, 1.0, 0.1);
        assert_relative_eq!(p.crossover_scale().unwrap(), 1e6, max_relative = 1e-9);
        let p = params(1.0, 100.0, 0.5, 1.0, 1e-3);
        assert_relative_eq!(p.crossover_scale().unwrap(), 1e10, max_relative = 1e-9);
        assert_eq!(params(1.0, 100.0, 0.5, 1.5, 0.1).crossover_scale(), None);
    }

    #[test]
    fn sweep_preserves_order_and_validates() {
        let p = params(1.0, 1.0, 0.5, 1.0, 0.5);
        let rows = p.sweep_crossover(&[1.0]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_relative_eq!(rows[0].1.unwrap(), 1.0);

        let p = params(1.0, 100.0, 0.5, 1.0, 0.9);
        let rows = p.sweep_crossover(&[0.1, 0.001]).unwrap();
        assert_relative_eq!(rows[0].1.unwrap(), 1e6, max_relative = 1e-9);
        assert_relative_eq!(rows[1].1.unwrap(), 1e10, max_relative = 1e-9);

        let rows = p.sweep_crossover(&[0.5]).unwrap();
        assert_relative_eq!(rows[0].1.unwrap(), 4e4, max_relative = 1e-9);

        assert!(p.sweep_crossover(&[0.0]).is_err());
        assert!(p.sweep_crossover(&[1.2]).is_err());
    }

    #[test]
    fn ops_per_coherence_reference_rows() {
        // Trapped-ion envelope: lower bound must agree with the published
        // order of magnitude (1e4); upper bound is the raw ratio 1e8.
        let ion = PlatformProfile::new("ion", 1.0, 100.0, Some((1e-6, 100e-6))).unwrap();
        let (lo, hi) = ion.ops_per_coherence().unwrap();
        assert_relative_eq!(lo, 1e4, max_relative = 1e-12);
        assert_relative_eq!(hi, 1e8, max_relative = 1e-12);
        assert_eq!(lo.log10().round() as i32, 4);

        let sc = PlatformProfile::new("sc", 50e-6, 500e-6, Some((20e-9, 100e-9))).unwrap();
        let (lo, hi) = sc.ops_per_coherence().unwrap();
        assert_relative_eq!(lo, 500.0, max_relative = 1e-12);
        assert_relative_eq!(hi, 25_000.0, max_relative = 1e-12);

        let flat = PlatformProfile::new("flat", 2.0, 2.0, Some((2.0, 2.0))).unwrap();
        assert_eq!(flat.ops_per_coherence().unwrap(), (1.0, 1.0));
    }

    #[test]
    fn memory_only_profile_is_distinct() {
        let mem = PlatformProfile::new("mem", 1.0, 10.0, None).unwrap();
        assert!(matches!(mem.ops_per_coherence(), Err(ScalingError::MemoryOnly(_))));
    }

    #[test]
    fn catalog_has_four_rows() {
        let catalog = platform_catalog();
        assert_eq!(catalog.len(), 4);
        assert_eq!(catalog[3].profile.name, "Trapped Ion");
        assert_eq!(catalog[2].published_n_ops, "Storage");
    }

    #[test]
    fn rejects_bad_params() {
        assert!(ScalingParams::new(0.0, 1.0, 0.5, 1.0, 0.5).is_err());
        assert!(ScalingParams::new(1.0, -1.0, 0.5, 1.0, 0.5).is_err());
        assert!(ScalingParams::new(1.0, 1.0, 0.0, 1.0, 0.5).is_err());
        assert!(ScalingParams::new(1.0, 1.0, 0.5, 0.9, 0.5).is_err());
        assert!(ScalingParams::new(1.0, 1.0, 0.5, 1.0, 0.0).is_err());
        assert!(ScalingParams::new(1.0, 1.0, 0.5, 1.0, 1.1).is_err());
    }
}
