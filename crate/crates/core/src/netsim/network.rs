use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::protocol::{OpCounters, ProtocolMessage};
use crate::rng;

fn default_jitter_fraction() -> f64 {
    0.2
}

/// Latency and bandwidth of the simulated links. Every link is identical.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkModel {
    pub mean_rtt_ms: f64,
    pub bandwidth_bits_per_s: f64,
    pub jitter_seed: u64,
    /// Jitter is uniform on `[0, jitter_fraction · rtt]`.
    #[serde(default = "default_jitter_fraction")]
    pub jitter_fraction: f64,
}

impl Default for NetworkModel {
    fn default() -> Self {
        Self {
            mean_rtt_ms: 50.0,
            bandwidth_bits_per_s: 1e9,
            jitter_seed: 0,
            jitter_fraction: default_jitter_fraction(),
        }
    }
}

impl NetworkModel {
    pub fn validate(&self) -> Result<(), String> {
        let ok = self.mean_rtt_ms >= 0.0
            && self.mean_rtt_ms.is_finite()
            && self.bandwidth_bits_per_s > 0.0
            && (0.0..=10.0).contains(&self.jitter_fraction);
        if ok {
            Ok(())
        } else {
            Err(format!("invalid network model {self:?}"))
        }
    }

    /// `rtt/2 + size/bandwidth`, in milliseconds.
    pub fn base_latency_ms(&self, bytes: usize) -> f64 {
        self.mean_rtt_ms / 2.0 + bytes as f64 * 8.0 / self.bandwidth_bits_per_s * 1000.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Delivery {
    /// Position of the message in the scheduled input.
    pub message: usize,
    pub sender: u32,
    pub recipient: u32,
    pub round: u64,
    pub bytes: usize,
    pub sent_ms: f64,
    pub delivered_ms: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeliveryTrace {
    /// In delivery order.
    pub deliveries: Vec<Delivery>,
    pub makespan_ms: f64,
    pub counters: OpCounters,
}

/// Delivers `messages` round by round. A round starts when every message
/// of the previous round has arrived; within a round, messages are sent at
/// its start in `(logical_timestamp, sender, position)` order, and links
/// are FIFO per ordered pair of parties.
pub fn schedule(messages: &[ProtocolMessage], model: &NetworkModel) -> DeliveryTrace {
    let mut order: Vec<usize> = (0..messages.len()).collect();
    order.sort_by_key(|&i| (messages[i].logical_timestamp, messages[i].sender, i));

    let mut jitter = rng::stream(model.jitter_seed, "network-jitter", 0);
    let max_jitter = model.jitter_fraction * model.mean_rtt_ms;
    let mut last_on_link: HashMap<(u32, u32), f64> = HashMap::new();
    let mut deliveries = Vec::with_capacity(messages.len());
    let mut counters = OpCounters::default();
    let mut round_start = 0.0f64;
    let mut round_end = 0.0f64;
    let mut current_round = None;

    for i in order {
        let m = &messages[i];
        if current_round != Some(m.logical_timestamp) {
            current_round = Some(m.logical_timestamp);
            round_start = round_end;
            counters.rounds += 1;
        }
        let bytes = m.wire_len();
        let extra = if max_jitter > 0.0 {
            jitter.random_range(0.0..=max_jitter)
        } else {
            0.0
        };
        let mut at = round_start + model.base_latency_ms(bytes) + extra;
        let link = last_on_link
            .entry((m.sender, m.recipient))
            .or_insert(f64::NEG_INFINITY);
        at = at.max(*link);
        *link = at;
        round_end = round_end.max(at);
        counters.messages_sent += 1;
        counters.bytes_sent += bytes as u64;
        deliveries.push(Delivery {
            message: i,
            sender: m.sender,
            recipient: m.recipient,
            round: m.logical_timestamp,
            bytes,
            sent_ms: round_start,
            delivered_ms: at,
        });
    }
    // Stable sort keeps send order among equal arrival times.
    deliveries.sort_by(|a, b| a.delivered_ms.total_cmp(&b.delivered_ms));
    DeliveryTrace {
        deliveries,
        makespan_ms: round_end,
        counters,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{MessageBody, AGGREGATOR};

    fn msg(sender: u32, recipient: u32, round: u64, len: usize) -> ProtocolMessage {
        ProtocolMessage {
            sender,
            recipient,
            logical_timestamp: round,
            body: MessageBody::Abort {
                accused: 0,
                reason: "x".repeat(len),
            },
        }
    }

    #[test]
    fn single_message_without_jitter_takes_base_latency() {
        let model = NetworkModel {
            jitter_fraction: 0.0,
            ..Default::default()
        };
        let m = msg(1, AGGREGATOR, 1, 1000);
        let trace = schedule(std::slice::from_ref(&m), &model);
        let bytes = m.wire_len();
        assert_eq!(
            trace.deliveries[0].delivered_ms,
            25.0 + bytes as f64 * 8.0 / 1e9 * 1000.0
        );
        assert_eq!(trace.counters.bytes_sent, bytes as u64);
    }

    #[test]
    fn same_link_is_fifo() {
        let model = NetworkModel {
            jitter_fraction: 5.0,
            ..Default::default()
        };
        for seed in 0..50 {
            let msgs = vec![msg(1, 2, 1, 10), msg(1, 2, 1, 0), msg(2, 1, 1, 0)];
            let trace = schedule(
                &msgs,
                &NetworkModel {
                    jitter_seed: seed,
                    ..model
                },
            );
            let pos = |i| {
                trace
                    .deliveries
                    .iter()
                    .position(|d| d.message == i)
                    .unwrap()
            };
            assert!(pos(0) < pos(1));
            assert!(trace
                .deliveries
                .windows(2)
                .all(|w| w[0].delivered_ms <= w[1].delivered_ms));
        }
    }

    #[test]
    fn traces_replay_per_seed() {
        let msgs: Vec<_> = (0..1000)
            .map(|i| msg(i % 17, (i + 3) % 11, (i / 100) as u64, (i % 5) as usize))
            .collect();
        let a = schedule(
            &msgs,
            &NetworkModel {
                jitter_seed: 1,
                ..Default::default()
            },
        );
        let b = schedule(
            &msgs,
            &NetworkModel {
                jitter_seed: 1,
                ..Default::default()
            },
        );
        let c = schedule(
            &msgs,
            &NetworkModel {
                jitter_seed: 2,
                ..Default::default()
            },
        );
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.counters.messages_sent, 1000);
        assert_eq!(a.counters.rounds, 10);
    }

    #[test]
    fn rounds_are_sequential() {
        let msgs = vec![msg(1, 0, 1, 0), msg(2, 0, 2, 0)];
        let trace = schedule(&msgs, &NetworkModel::default());
        let first = &trace.deliveries[0];
        let second = &trace.deliveries[1];
        assert_eq!(second.sent_ms, first.delivered_ms);
        assert!(second.delivered_ms >= 2.0 * 25.0);
    }
}
