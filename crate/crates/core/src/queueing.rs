//! Per-device queue state: local buffer, remote processing queue, downlink
//! queue, the two virtual queues, and the ledger of extraction factors of the
//! semantic data waiting at the server.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::config::SystemConfig;

/// Batches below this size are treated as fully drained.
const BATCH_EPS: f64 = 1e-9;

/// One offloaded batch of semantic data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChiBatch {
    pub factor: f64,
    pub remaining_bits: f64,
}

/// FIFO record of extraction factors and their outstanding bits at the server.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ChiLedger {
    batches: VecDeque<ChiBatch>,
}

impl ChiLedger {
    pub fn batches(&self) -> impl Iterator<Item = &ChiBatch> {
        self.batches.iter()
    }

    pub fn len(&self) -> usize {
        self.batches.len()
    }

    pub fn is_empty(&self) -> bool {
        self.batches.is_empty()
    }

    pub fn total_bits(&self) -> f64 {
        self.batches.iter().map(|b| b.remaining_bits).sum()
    }

    /// Smallest outstanding factor; 1 (raw data) when nothing is queued.
    pub fn min_factor(&self) -> f64 {
        self.batches.iter().map(|b| b.factor).fold(1.0, f64::min)
    }

    pub fn push(&mut self, factor: f64, bits: f64) {
        if bits > 0.0 {
            self.batches.push_back(ChiBatch {
                factor,
                remaining_bits: bits,
            });
        }
    }

    /// Removes `bits` from the oldest batches first; returns the factors of
    /// the batches that were fully consumed, oldest first.
    pub fn drain(&mut self, bits: f64) -> Vec<f64> {
        let mut left = bits;
        let mut finished = Vec::new();
        while left > 0.0 {
            let Some(front) = self.batches.front_mut() else { break };
            if front.remaining_bits <= left + BATCH_EPS {
                left -= front.remaining_bits;
                finished.push(front.factor);
                self.batches.pop_front();
            } else {
                front.remaining_bits -= left;
                left = 0.0;
            }
        }
        finished
    }

    pub fn clear(&mut self) {
        self.batches.clear();
    }
}

/// Queue state of one terminal device. Starts all-empty.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TdState {
    pub q_local: f64,
    pub q_remote: f64,
    pub q_down: f64,
    pub x_q: f64,
    pub x_r: f64,
    pub chi: ChiLedger,
}

impl TdState {
    pub fn min_chi(&self) -> f64 {
        self.chi.min_factor()
    }

    pub fn q_total(&self) -> f64 {
        self.q_local + self.q_remote + self.q_down
    }

    /// Applies one slot's flows in order: local buffer, remote queue (and
    /// ledger), downlink queue, then both virtual queues. Every right-hand
    /// side uses the pre-update queue values.
    pub fn advance(&mut self, flows: &SlotFlows, cfg: &SystemConfig) -> FlowOutcome {
        let q_local_next = next_local_queue(
            self.q_local,
            flows.arrival,
            flows.extraction,
            flows.local_bits,
            flows.offload_raw_bits,
        );
        let (q_remote_next, admitted) = next_remote_queue(
            self.q_remote,
            self.q_local,
            flows.uplink_sem_bits,
            flows.processed_sem_bits,
            flows.local_bits,
        );
        let q_down_next = next_downlink_queue(
            self.q_down,
            self.q_remote,
            flows.downlink_bits,
            flows.result_ratio,
            flows.processed_sem_bits,
        );

        let served = flows.processed_sem_bits.min(self.q_remote);
        if q_remote_next - admitted <= 0.0 {
            self.chi.clear();
        } else {
            self.chi.drain(served);
        }
        self.chi.push(flows.beta, admitted);

        self.q_local = q_local_next;
        self.q_remote = q_remote_next;
        self.q_down = q_down_next;

        let processed = flows.local_bits + flows.offload_raw_bits;
        let (x_q, x_r) = next_virtual_queues(self.x_q, self.x_r, self.q_total(), processed, cfg);
        self.x_q = x_q;
        self.x_r = x_r;

        FlowOutcome {
            admitted_bits: admitted,
            served_sem_bits: served,
            processed_bits: processed,
        }
    }
}

/// Bit volumes moved by one slot's decision for one device.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SlotFlows {
    pub arrival: f64,
    /// Extraction workload added to the local buffer.
    pub extraction: f64,
    /// `tau R^L`.
    pub local_bits: f64,
    /// `tau_u R^U`.
    pub uplink_sem_bits: f64,
    /// `tau_u R^U / beta`.
    pub offload_raw_bits: f64,
    /// `tau R^M`.
    pub processed_sem_bits: f64,
    /// `tau_d R^D`.
    pub downlink_bits: f64,
    pub result_ratio: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FlowOutcome {
    /// Semantic bits that entered the remote queue.
    pub admitted_bits: f64,
    /// Semantic bits actually served by the server.
    pub served_sem_bits: f64,
    /// `tau R^L + tau_u R^U / beta`, the quantity credited to the rate target.
    pub processed_bits: f64,
}

/// `A + max{0, Q^L + C - tau R^L - tau_u R^U / beta}`.
pub fn next_local_queue(q_local: f64, arrival: f64, extraction: f64, local_bits: f64, offload_raw_bits: f64) -> f64 {
    arrival + (q_local + extraction - local_bits - offload_raw_bits).max(0.0)
}

/// `max{0, Q^O - tau R^M} + min{tau_u R^U, Q^L - tau R^L}`; the admitted
/// term is clamped at zero. Returns the new backlog and the admitted bits.
pub fn next_remote_queue(
    q_remote: f64,
    q_local: f64,
    uplink_sem_bits: f64,
    processed_sem_bits: f64,
    local_bits: f64,
) -> (f64, f64) {
    let admitted = uplink_sem_bits.min(q_local - local_bits).max(0.0);
    ((q_remote - processed_sem_bits).max(0.0) + admitted, admitted)
}

/// `max{0, Q^D - tau_d R^D} + H min{tau R^M, Q^O}`.
pub fn next_downlink_queue(
    q_down: f64,
    q_remote_before: f64,
    downlink_bits: f64,
    result_ratio: f64,
    processed_sem_bits: f64,
) -> f64 {
    (q_down - downlink_bits).max(0.0) + result_ratio * processed_sem_bits.min(q_remote_before)
}

/// Virtual backlogs for the delay and rate targets.
pub fn next_virtual_queues(x_q: f64, x_r: f64, q_total_next: f64, processed_bits: f64, cfg: &SystemConfig) -> (f64, f64) {
    let x_q = (x_q + q_total_next - cfg.q_avg).max(0.0);
    let x_r = (x_r - processed_bits + cfg.slot_tau * cfg.r_avg).max(0.0);
    (x_q, x_r)
}
