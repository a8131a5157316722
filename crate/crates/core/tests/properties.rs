//! Property tests for the analytic layer and the ledger lifecycle.

use proptest::prelude::*;

use qarchsim_core::ledger::{
    FidelityDist, Ledger, LinkConfig, LinkKey, SelectionPolicy, TupleState,
};
use qarchsim_core::scaling::ScalingParams;
use qarchsim_core::scenario::parse_duration_ns;
use qarchsim_core::timing::TimingParams;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Builds params with an exact crossover at `n_c` by solving for B.
fn params_with_crossover(a: f64, eta: f64, gap: f64, gamma: f64, n_c: f64) -> ScalingParams {
    let b = a * eta * n_c.powf(gap);
    ScalingParams::new(a, b, gamma + gap - 1.0, gamma, eta).unwrap()
}

proptest! {
    /// Below the crossover the homogeneous architecture is cheaper, above it
    /// the modular one is, with no exceptions.
    #[test]
    fn crossover_orders_costs(
        a in 0.1f64..10.0,
        eta in 0.01f64..1.0,
        gap in 0.1f64..1.0,
        gamma in 1.0f64..1.8,
        n_c_exp in 2.0f64..6.0,
        side in 1.01f64..50.0,
    ) {
        let n_c = 10f64.powf(n_c_exp);
        let p = params_with_crossover(a, eta, gap, gamma, n_c);
        prop_assert!((p.crossover_scale().unwrap() / n_c - 1.0).abs() < 1e-9);

        let above = n_c * side;
        prop_assert!(p.cost_modular(above).unwrap() < p.cost_homogeneous(above).unwrap());
        let below = (n_c / side).max(1.0);
        if below < n_c {
            prop_assert!(p.cost_modular(below).unwrap() > p.cost_homogeneous(below).unwrap());
        }
    }

    /// The homogeneous/modular cost ratio grows strictly with N whenever a
    /// finite crossover exists.
    #[test]
    fn cost_ratio_is_monotone(
        a in 0.1f64..10.0,
        eta in 0.01f64..1.0,
        gap in 0.1f64..1.0,
        n1 in 1.0f64..1e6,
        factor in 1.001f64..100.0,
    ) {
        let p = params_with_crossover(a, eta, gap, 1.0, 1e4);
        let n2 = n1 * factor;
        let ratio = |n: f64| p.cost_homogeneous(n).unwrap() / p.cost_modular(n).unwrap();
        prop_assert!(ratio(n2) > ratio(n1));
    }

    /// Finite-N surrogate of the vanishing-ratio limit: six decades past the
    /// crossover the modular cost is at most a thousandth of the homogeneous
    /// one when the exponent gap is at least 0.5 (equality holds exactly at
    /// gap = 0.5, hence the one-ulp slack).
    #[test]
    fn cost_ratio_vanishes_past_crossover(
        a in 0.1f64..10.0,
        eta in 0.01f64..1.0,
        gap in 0.5f64..1.0,
        n_c_exp in 1.0f64..4.0,
    ) {
        let n_c = 10f64.powf(n_c_exp);
        let p = params_with_crossover(a, eta, gap, 1.0, n_c);
        let n = 1e6 * n_c;
        let ratio = p.cost_modular(n).unwrap() / p.cost_homogeneous(n).unwrap();
        prop_assert!(ratio <= 1e-3 * (1.0 + 1e-12), "ratio = {ratio}");
    }

    /// The crossover scale falls as transduction improves and rises with the
    /// interface cost ratio.
    #[test]
    fn crossover_scale_sensitivities(
        a in 0.1f64..10.0,
        b in 1.0f64..1e4,
        gap in 0.1f64..1.0,
        eta in 0.01f64..0.5,
        eta_boost in 1.01f64..10.0,
        b_boost in 1.01f64..10.0,
    ) {
        prop_assume!(b / a > 1.0);
        let base = ScalingParams::new(a, b, gap, 1.0, eta).unwrap();
        let better_eta = ScalingParams { eta_trans: (eta * eta_boost).min(1.0), ..base };
        let costlier = ScalingParams { b: b * b_boost, ..base };
        prop_assert!(better_eta.crossover_scale().unwrap() < base.crossover_scale().unwrap());
        prop_assert!(costlier.crossover_scale().unwrap() > base.crossover_scale().unwrap());
    }

    /// Closed-form inverse: the wall plugged back into the latency model
    /// reproduces the coherence budget to one part in 1e9.
    #[test]
    fn wall_latency_round_trip(
        tau_q_us in 10u64..10_000,
        margin in 0.05f64..1.0,
        decode in 0u64..5_000,
        ff in 0u64..2_000,
        route in 10u64..500,
        alpha_extra in 0.0f64..1.0,
    ) {
        let p = TimingParams {
            tau_q_ns: tau_q_us * 1_000,
            tau_q_p_ns: tau_q_us * 1_000,
            tau_decode_ns: decode,
            tau_ff_ns: ff,
            tau_route_ns: route,
            alpha: 1.0 + alpha_extra,
            ..TimingParams::default()
        };
        let budget = margin * p.tau_q_ns as f64;
        prop_assume!(budget > (decode + ff) as f64 + p.alpha * route as f64);
        let p = TimingParams { safety_margin: margin, ..p };
        let wall = p.coordination_wall().unwrap();
        let tau_c = p.coordination_latency_ns(wall).unwrap();
        prop_assert!((tau_c / budget - 1.0).abs() < 1e-9);
    }

    /// Latency grows with N; the wall shrinks as overheads grow and widens
    /// with the budget.
    #[test]
    fn wall_monotonicities(
        n in 1.0f64..1e7,
        factor in 1.001f64..100.0,
        bump in 1u64..2_000,
    ) {
        let p = TimingParams { tau_q_p_ns: 100_000, ..TimingParams::default() };
        prop_assert!(
            p.coordination_latency_ns(n * factor).unwrap() > p.coordination_latency_ns(n).unwrap()
        );
        let wall = p.coordination_wall().unwrap();
        let slower_decode = TimingParams { tau_decode_ns: p.tau_decode_ns + bump, ..p };
        let slower_ff = TimingParams { tau_ff_ns: p.tau_ff_ns + bump, ..p };
        let slower_route = TimingParams { tau_route_ns: p.tau_route_ns + bump, ..p };
        let wider_alpha = TimingParams { alpha: p.alpha + bump as f64 / 1e3, ..p };
        let bigger_budget = TimingParams { tau_q_ns: p.tau_q_ns + bump * 1_000, ..p };
        prop_assert!(slower_decode.coordination_wall().unwrap() < wall);
        prop_assert!(slower_ff.coordination_wall().unwrap() < wall);
        prop_assert!(slower_route.coordination_wall().unwrap() < wall);
        prop_assert!(wider_alpha.coordination_wall().unwrap() < wall);
        prop_assert!(bigger_budget.coordination_wall().unwrap() > wall);
    }

    /// Doubling the residual latency budget exactly doubles the control
    /// radius.
    #[test]
    fn locality_bound_scales_linearly(
        decode in 0u64..1_000,
        ff in 0u64..1_000,
        residual in 1u64..100_000,
        refractive in 1.0f64..3.0,
    ) {
        let base = TimingParams {
            tau_q_ns: u64::MAX / 4,
            tau_q_p_ns: decode + ff + residual,
            tau_decode_ns: decode,
            tau_ff_ns: ff,
            refractive_index: refractive,
            ..TimingParams::default()
        };
        let doubled = TimingParams { tau_q_p_ns: decode + ff + 2 * residual, ..base };
        let r1 = base.locality_bound_m().unwrap();
        let r2 = doubled.locality_bound_m().unwrap();
        prop_assert!((r2 / r1 - 2.0).abs() < 1e-12);
    }

    /// Canonical duration text round-trips exactly.
    #[test]
    fn duration_canonical_round_trip(ns in 0u64..u64::MAX / 2) {
        prop_assert_eq!(parse_duration_ns(&format!("{ns}ns")).unwrap(), ns);
    }

    /// Whole-unit spellings agree across scales.
    #[test]
    fn duration_unit_agreement(us in 0u64..1_000_000) {
        let from_us = parse_duration_ns(&format!("{us}us")).unwrap();
        let from_ns = parse_duration_ns(&format!("{}ns", us * 1_000)).unwrap();
        prop_assert_eq!(from_us, from_ns);
    }
}

/// Random op sequences against the ledger keep every tuple in exactly one
/// lifecycle state, never double-reserve, and never consume past deadline.
#[derive(Debug, Clone)]
enum Op {
    Generate,
    Reserve { pick: u8, txn: u8 },
    Release { pick: u8, txn: u8 },
    Consume { pick: u8, txn: u8 },
    Sweep,
    Advance(u16),
}

fn op_strategy() -> impl Strategy<Value = Op> {
    prop_oneof![
        3 => Just(Op::Generate),
        3 => (any::<u8>(), any::<u8>()).prop_map(|(pick, txn)| Op::Reserve { pick, txn }),
        1 => (any::<u8>(), any::<u8>()).prop_map(|(pick, txn)| Op::Release { pick, txn }),
        2 => (any::<u8>(), any::<u8>()).prop_map(|(pick, txn)| Op::Consume { pick, txn }),
        1 => Just(Op::Sweep),
        3 => (1u16..2_000).prop_map(Op::Advance),
    ]
}

proptest! {
    #[test]
    fn ledger_lifecycle_invariants(ops in proptest::collection::vec(op_strategy(), 1..200), seed in 0u64..1_000) {
        let mut ledger = Ledger::new(3_000, SelectionPolicy::YoungestFirst, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let link = LinkConfig {
            link: LinkKey::new(0, 1),
            attempt_period_ns: 1,
            eta_trans: 0.9,
            fidelity: FidelityDist::Uniform { lo: 0.8, hi: 1.0 },
        };
        let mut now = 0u64;
        // (tuple, owner) pairs believed reserved, mirroring ledger state.
        let mut held: Vec<(u64, u64)> = Vec::new();

        for op in ops {
            match op {
                Op::Generate => {
                    ledger.attempt_generate(&link, now, &mut rng);
                }
                Op::Reserve { pick, txn } => {
                    if let Some(id) = ledger.query(link.link, now) {
                        // Exercise occasional contention on an already
                        // reserved tuple via a stale pick.
                        let target = if pick % 7 == 0 && !held.is_empty() {
                            held[pick as usize % held.len()].0
                        } else {
                            id
                        };
                        if let Ok(qarchsim_core::ledger::ReserveResult::Ok) =
                            ledger.reserve(target, txn as u64, now)
                        {
                            held.push((target, txn as u64));
                        }
                    }
                }
                Op::Release { pick, txn } => {
                    if !held.is_empty() {
                        let i = pick as usize % held.len();
                        let (id, owner) = held[i];
                        let _ = txn;
                        if ledger.release(id, owner).is_ok() {
                            held.remove(i);
                        }
                    }
                }
                Op::Consume { pick, txn } => {
                    if !held.is_empty() {
                        let i = pick as usize % held.len();
                        let (id, owner) = held[i];
                        let _ = txn;
                        let consumed = ledger.consume(id, owner, now).is_ok();
                        // A refused consume may still have expired the tuple.
                        if consumed || matches!(ledger.tuple(id).unwrap().state, TupleState::Expired) {
                            held.remove(i);
                        }
                    }
                }
                Op::Sweep => {
                    for expired in ledger.expire_sweep(now) {
                        held.retain(|&(id, _)| id != expired.tuple);
                    }
                }
                Op::Advance(dt) => now += dt as u64,
            }

            // Exactly-one-state partition and reservation mirror.
            let counts = ledger.counts();
            prop_assert_eq!(
                counts.generated,
                counts.available + counts.reserved + counts.consumed + counts.expired
            );
            prop_assert_eq!(counts.reserved as usize, held.len());
            for t in ledger.tuples() {
                if let Some(at) = t.consumed_at_ns {
                    prop_assert!(at < t.deadline_ns);
                }
                if let TupleState::Reserved(owner) = t.state {
                    prop_assert!(held.contains(&(t.id, owner)));
                }
            }
        }
    }
}
