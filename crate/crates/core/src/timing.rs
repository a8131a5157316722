//! Classical coordination timing: the causal locality bound on control
//! distance and the sqrt(N) coordination-latency model with its wall.
//!
//! Durations are integer nanoseconds at the API boundary; intermediate math
//! runs in f64, and results that are not timestamps (radii, wall sizes) stay
//! real-valued.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Effective signal speed numerator, meters per second.
pub const LIGHT_SPEED_M_PER_S: f64 = 2.998e8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TimingError {
    #[error("latency budget violated: tau_decode + tau_ff exceeds tau_q_p by {deficit_ns} ns")]
    BudgetExceeded { deficit_ns: u64 },
    #[error("coordination wall lies below one qubit: margin*tau_q = {budget_ns} ns leaves no room past decode+feedforward ({floor_ns} ns)")]
    WallBelowOneQubit { budget_ns: u64, floor_ns: u64 },
    #[error("n_qubits must be >= 1, got {0}")]
    BadQubitCount(f64),
    #[error("invalid tau_route sweep range {min_ns}..{max_ns} (steps {steps})")]
    BadSweepRange { min_ns: u64, max_ns: u64, steps: usize },
    #[error("invalid timing parameter: {0}")]
    BadParam(String),
}

/// Latency and coherence constants of the classical control plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimingParams {
    /// Coherence lifetime, ns.
    pub tau_q_ns: u64,
    /// High-percentile coherence deadline, ns (`<= tau_q_ns`).
    pub tau_q_p_ns: u64,
    /// Decoder latency, ns.
    pub tau_decode_ns: u64,
    /// Feedforward latency, ns.
    pub tau_ff_ns: u64,
    /// Control-distribution latency per lattice unit, ns.
    pub tau_route_ns: u64,
    /// Planar routing elongation factor, dimensionless (>= 1).
    pub alpha: f64,
    /// Refractive index of the control transmission medium (>= 1).
    pub refractive_index: f64,
    /// Effective light speed, m/s.
    pub light_speed_m_per_s: f64,
    /// Fraction of tau_q the coordination loop may consume, in (0, 1].
    pub safety_margin: f64,
}

impl Default for TimingParams {
    /// Representative superconducting control-plane constants:
    /// `tau_q = 100 us`, `tau_q_p = 0.001 tau_q = 100 ns`, `tau_decode = 2.5 us`,
    /// `tau_ff = 0.5 us`, `tau_route = 115 ns`, `alpha = sqrt(2)`, `n = 1.5`,
    /// 50% safety margin.
    fn default() -> Self {
        Self {
            tau_q_ns: 100_000,
            tau_q_p_ns: 100,
            tau_decode_ns: 2_500,
            tau_ff_ns: 500,
            tau_route_ns: 115,
            alpha: std::f64::consts::SQRT_2,
            refractive_index: 1.5,
            light_speed_m_per_s: LIGHT_SPEED_M_PER_S,
            safety_margin: 0.5,
        }
    }
}

impl TimingParams {
    pub fn validate(&self) -> Result<(), TimingError> {
        if self.tau_q_ns == 0 {
            return Err(TimingError::BadParam("tau_q must be positive".into()));
        }
        if self.tau_q_p_ns > self.tau_q_ns {
            return Err(TimingError::BadParam(format!(
                "tau_q_p ({} ns) exceeds tau_q ({} ns)",
                self.tau_q_p_ns, self.tau_q_ns
            )));
        }
        if !(self.alpha.is_finite() && self.alpha >= 1.0) {
            return Err(TimingError::BadParam(format!("alpha must be >= 1, got {}", self.alpha)));
        }
        if !(self.refractive_index.is_finite() && self.refractive_index >= 1.0) {
            return Err(TimingError::BadParam(format!(
                "refractive index must be >= 1, got {}",
                self.refractive_index
            )));
        }
        if !(self.light_speed_m_per_s.is_finite() && self.light_speed_m_per_s > 0.0) {
            return Err(TimingError::BadParam("light speed must be positive".into()));
        }
        if !(self.safety_margin.is_finite() && self.safety_margin > 0.0 && self.safety_margin <= 1.0) {
            return Err(TimingError::BadParam(format!(
                "safety margin must lie in (0, 1], got {}",
                self.safety_margin
            )));
        }
        Ok(())
    }

    /// Maximum allowable control distance in meters:
    /// `(c / 2n) * (tau_q_p - tau_decode - tau_ff)`.
    ///
    /// The factor 2 accounts for the measurement-to-feedback round trip.
    /// A budget already consumed by decode + feedforward is a distinct error
    /// carrying the deficit.
    pub fn locality_bound_m(&self) -> Result<f64, TimingError> {
        let floor = self.tau_decode_ns + self.tau_ff_ns;
        if floor > self.tau_q_p_ns {
            return Err(TimingError::BudgetExceeded {
                deficit_ns: floor - self.tau_q_p_ns,
            });
        }
        let residual_s = (self.tau_q_p_ns - floor) as f64 * 1e-9;
        Ok(self.light_speed_m_per_s / (2.0 * self.refractive_index) * residual_s)
    }

    /// Coordination latency at footprint `N`:
    /// `tau_c(N) = tau_decode + tau_ff + alpha * sqrt(N) * tau_route`, in ns.
    pub fn coordination_latency_ns(&self, n_qubits: f64) -> Result<f64, TimingError> {
        if !(n_qubits.is_finite() && n_qubits >= 1.0) {
            return Err(TimingError::BadQubitCount(n_qubits));
        }
        Ok(self.tau_decode_ns as f64
            + self.tau_ff_ns as f64
            + self.alpha * n_qubits.sqrt() * self.tau_route_ns as f64)
    }

    /// Footprint at which `tau_c(N)` consumes the allotted coherence fraction:
    /// the unique `N*` with `tau_c(N*) = safety_margin * tau_q`.
    pub fn coordination_wall(&self) -> Result<f64, TimingError> {
        self.wall_at_route(self.tau_route_ns as f64)
    }

    fn wall_at_route(&self, tau_route_ns: f64) -> Result<f64, TimingError> {
        let budget = self.safety_margin * self.tau_q_ns as f64;
        let floor = (self.tau_decode_ns + self.tau_ff_ns) as f64;
        let infeasible = || TimingError::WallBelowOneQubit {
            budget_ns: budget.round() as u64,
            floor_ns: floor as u64,
        };
        if budget <= floor || tau_route_ns <= 0.0 || self.alpha <= 0.0 {
            return Err(infeasible());
        }
        let root = (budget - floor) / (self.alpha * tau_route_ns);
        let wall = root * root;
        if wall < 1.0 {
            return Err(infeasible());
        }
        Ok(wall)
    }

    /// Coordination wall across an evenly spaced `tau_route` range, endpoints
    /// inclusive. The wall is strictly decreasing in `tau_route`.
    pub fn wall_sensitivity(
        &self,
        route_min_ns: u64,
        route_max_ns: u64,
        steps: usize,
    ) -> Result<Vec<(f64, f64)>, TimingError> {
        if route_min_ns == 0 || route_min_ns > route_max_ns || steps < 2 {
            return Err(TimingError::BadSweepRange {
                min_ns: route_min_ns,
                max_ns: route_max_ns,
                steps,
            });
        }
        let span = (route_max_ns - route_min_ns) as f64;
        let mut rows = Vec::with_capacity(steps);
        for i in 0..steps {
            let route = route_min_ns as f64 + span * i as f64 / (steps - 1) as f64;
            rows.push((route, self.wall_at_route(route)?));
        }
        Ok(rows)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn locality_bound_hand_values() {
        let p = TimingParams {
            tau_q_p_ns: 100,
            tau_decode_ns: 0,
            tau_ff_ns: 0,
            ..TimingParams::default()
        };
        // (2.998e8 / 3) * 100e-9 = 9.9933.. m
        assert_relative_eq!(p.locality_bound_m().unwrap(), 9.993_333, max_relative = 1e-6);

        let zero = TimingParams {
            tau_q_p_ns: 100,
            tau_decode_ns: 60,
            tau_ff_ns: 40,
            ..TimingParams::default()
        };
        assert_eq!(zero.locality_bound_m().unwrap(), 0.0);

        let p = TimingParams {
            tau_q_p_ns: 100,
            tau_decode_ns: 50,
            tau_ff_ns: 25,
            ..TimingParams::default()
        };
        assert_relative_eq!(p.locality_bound_m().unwrap(), 2.498_333, max_relative = 1e-6);
    }

    #[test]
    fn locality_bound_reports_deficit() {
        let p = TimingParams {
            tau_q_p_ns: 100,
            tau_decode_ns: 90,
            tau_ff_ns: 30,
            ..TimingParams::default()
        };
        assert_eq!(
            p.locality_bound_m(),
            Err(TimingError::BudgetExceeded { deficit_ns: 20 })
        );
    }

    #[test]
    fn locality_bound_is_linear_in_residual() {
        let base = TimingParams {
            tau_q_p_ns: 150,
            tau_decode_ns: 30,
            tau_ff_ns: 20,
            ..TimingParams::default()
        };
        let doubled = TimingParams {
            tau_q_p_ns: 250, // residual 100 -> 200
            ..base
        };
        assert_relative_eq!(
            doubled.locality_bound_m().unwrap(),
            2.0 * base.locality_bound_m().unwrap(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn coordination_latency_reference_points() {
        let p = TimingParams::default();
        // At N = 83516 the default constants give ~50 us.
        let tau_c = p.coordination_latency_ns(83_516.0).unwrap();
        assert_relative_eq!(tau_c, 50_000.0, max_relative = 1e-4);

        let unit = TimingParams {
            tau_decode_ns: 0,
            tau_ff_ns: 0,
            alpha: 1.0,
            tau_route_ns: 7,
            ..TimingParams::default()
        };
        assert_relative_eq!(unit.coordination_latency_ns(1.0).unwrap(), 7.0);

        let tau_c = p.coordination_latency_ns(1e4).unwrap();
        assert_relative_eq!(tau_c, 3000.0 + std::f64::consts::SQRT_2 * 115.0 * 100.0, max_relative = 1e-12);
        assert_relative_eq!(tau_c, 19_263.456, max_relative = 1e-6);
    }

    #[test]
    fn coordination_wall_reference_points() {
        let p = TimingParams::default();
        let wall = p.coordination_wall().unwrap();
        assert!((8.2e4..=8.5e4).contains(&wall), "wall = {wall}");
        assert_relative_eq!(wall, 8.3516e4, max_relative = 1e-3);

        let fast = TimingParams { tau_route_ns: 80, ..p };
        assert_relative_eq!(fast.coordination_wall().unwrap(), 1.7e5, max_relative = 0.05);

        let single = TimingParams {
            tau_q_ns: 10,
            safety_margin: 1.0,
            tau_decode_ns: 4,
            tau_ff_ns: 4,
            alpha: 1.0,
            tau_route_ns: 2,
            tau_q_p_ns: 10,
            ..p
        };
        // margin*tau_q - floor = 2 = alpha*tau_route -> wall at exactly one qubit
        assert_relative_eq!(single.coordination_wall().unwrap(), 1.0);
    }

    #[test]
    fn wall_round_trips_through_latency() {
        let p = TimingParams::default();
        let wall = p.coordination_wall().unwrap();
        let tau_c = p.coordination_latency_ns(wall).unwrap();
        let budget = p.safety_margin * p.tau_q_ns as f64;
        assert_relative_eq!(tau_c, budget, max_relative = 1e-9);
    }

    #[test]
    fn infeasible_wall_is_an_error() {
        let p = TimingParams {
            tau_q_ns: 2_000,
            safety_margin: 1.0,
            tau_decode_ns: 1_500,
            tau_ff_ns: 500,
            tau_q_p_ns: 2_000,
            ..TimingParams::default()
        };
        assert!(matches!(p.coordination_wall(), Err(TimingError::WallBelowOneQubit { .. })));
    }

    #[test]
    fn sensitivity_endpoints_match_reference_band() {
        let p = TimingParams::default();
        let rows = p.wall_sensitivity(80, 150, 2).unwrap();
        assert_eq!(rows.len(), 2);
        assert_relative_eq!(rows[0].1, 1.7e5, max_relative = 0.05);
        assert_relative_eq!(rows[1].1, 4.9e4, max_relative = 0.05);
        assert!(rows[0].1 > rows[1].1);

        let degenerate = p.wall_sensitivity(115, 115, 2).unwrap();
        assert_relative_eq!(degenerate[0].1, degenerate[1].1);
        assert_relative_eq!(degenerate[0].1, 8.3516e4, max_relative = 1e-3);

        let rows = p.wall_sensitivity(100, 100, 2).unwrap();
        let expected = (47_000.0 / (std::f64::consts::SQRT_2 * 100.0)).powi(2);
        assert_relative_eq!(rows[0].1, expected, max_relative = 1e-12);
        assert_relative_eq!(rows[0].1, 1.104e5, max_relative = 1e-3);

        assert!(p.wall_sensitivity(150, 80, 2).is_err());
        assert!(p.wall_sensitivity(80, 150, 1).is_err());
        assert!(p.wall_sensitivity(0, 150, 2).is_err());
    }

    #[test]
    fn default_params_validate() {
        TimingParams::default().validate().unwrap();
        let bad = TimingParams { tau_q_p_ns: 200_000, ..TimingParams::default() };
        assert!(bad.validate().is_err());
    }
}
