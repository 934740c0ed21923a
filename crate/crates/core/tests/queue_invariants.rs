mod common;

use proptest::prelude::*;

use semantic_mec::baselines::{Policy, PolicyKind};
use semantic_mec::harness::run_with;
use semantic_mec::queueing::{ChiBatch, SlotFlows, TdState};
use semantic_mec::scheduler::BcdConfig;
use semantic_mec::SystemConfig;

use common::fifo_successor;

fn check_run(kind: PolicyKind, slots: usize) {
    let mut cfg = SystemConfig::default();
    cfg.horizon = slots;
    let policy = Policy { kind, exh_restarts: 4 };
    let mut prev: Vec<Vec<ChiBatch>> = vec![Vec::new(); cfg.num_tds];
    run_with(&cfg, policy, 5, BcdConfig::default(), |sim, m| {
        for (n, (s, t)) in sim.states().iter().zip(&m.tds).enumerate() {
            let e = &t.energy;
            for (name, v) in [
                ("q_local", s.q_local),
                ("q_remote", s.q_remote),
                ("q_down", s.q_down),
                ("x_q", s.x_q),
                ("x_r", s.x_r),
                ("e_local", e.local),
                ("e_uplink", e.uplink),
                ("e_remote", e.remote),
                ("e_downlink", e.downlink),
            ] {
                assert!(v.is_finite() && v >= 0.0, "{kind:?} slot {} td {n}: {name} = {v}", m.slot);
            }
            assert_eq!((s.q_local, s.x_q), (t.q_local, t.x_q));
            let held = s.chi.total_bits();
            assert!(
                (held - s.q_remote).abs() <= 1e-6,
                "{kind:?} slot {} td {n}: ledger {held} vs queue {}",
                m.slot,
                s.q_remote
            );
            let now: Vec<ChiBatch> = s.chi.batches().copied().collect();
            assert!(now.iter().all(|b| b.factor >= cfg.beta_min && b.factor <= 1.0));
            assert!(fifo_successor(&prev[n], &now), "{kind:?} slot {} td {n}", m.slot);
            prev[n] = now;
        }
    })
    .unwrap();
}

#[test]
fn drmsa_keeps_queues_and_ledger_consistent() {
    check_run(PolicyKind::Drmsa, 2000);
}

#[test]
fn ns_keeps_queues_and_ledger_consistent() {
    check_run(PolicyKind::Ns, 2000);
}

#[test]
fn nl_keeps_queues_and_ledger_consistent() {
    check_run(PolicyKind::Nl, 2000);
}

#[test]
fn myopic_keeps_queues_and_ledger_consistent() {
    check_run(PolicyKind::Myopic, 2000);
}

#[test]
fn exh_keeps_queues_and_ledger_consistent() {
    check_run(PolicyKind::Exh, 300);
}

#[test]
fn fifo_check_rejects_reordering() {
    let b = |factor, remaining_bits| ChiBatch { factor, remaining_bits };
    let old = [b(0.5, 10.0), b(0.7, 5.0)];
    assert!(fifo_successor(&old, &[b(0.7, 5.0)]));
    assert!(fifo_successor(&old, &[b(0.5, 4.0), b(0.7, 5.0), b(0.9, 1.0)]));
    assert!(fifo_successor(&old, &[b(0.9, 1.0)]));
    assert!(!fifo_successor(&old, &[b(0.5, 10.0), b(0.7, 4.0)]));
    assert!(!fifo_successor(&old, &[b(0.5, 11.0), b(0.7, 5.0)]));
    assert!(!fifo_successor(&old, &[b(0.7, 5.0), b(0.5, 10.0), b(0.9, 1.0)]));
}

fn flows() -> impl Strategy<Value = SlotFlows> {
    (0.0..4e6f64, 0.0..3e6f64, 0.0..3e6f64, 0.0..2e6f64, 0.0..2e6f64, 0.3..1.0f64).prop_map(
        |(arrival, local_bits, uplink_sem_bits, processed_sem_bits, downlink_bits, beta)| SlotFlows {
            arrival,
            extraction: 0.0,
            local_bits,
            uplink_sem_bits,
            offload_raw_bits: uplink_sem_bits / beta,
            processed_sem_bits,
            downlink_bits,
            result_ratio: 0.2,
            beta,
        },
    )
}

proptest! {
    #[test]
    fn advance_keeps_the_ledger_fifo_and_conserved(slots in prop::collection::vec(flows(), 1..60)) {
        let cfg = SystemConfig::default();
        let mut s = TdState::default();
        for f in &slots {
            let old: Vec<ChiBatch> = s.chi.batches().copied().collect();
            let out = s.advance(f, &cfg);
            let new: Vec<ChiBatch> = s.chi.batches().copied().collect();
            prop_assert!(fifo_successor(&old, &new));
            prop_assert!((s.chi.total_bits() - s.q_remote).abs() <= 1e-6 * (1.0 + s.q_remote));
            prop_assert!(out.admitted_bits >= 0.0 && out.served_sem_bits >= 0.0);
            if out.admitted_bits > 0.0 {
                prop_assert_eq!(new.last().map(|b| b.factor), Some(f.beta));
            }
        }
    }
}
