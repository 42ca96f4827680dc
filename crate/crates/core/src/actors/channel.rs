//! Broadcast medium with loss, fixed latency and an adversary hook.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SimRng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Delivery {
    pub at_us: u64,
    /// Index of the emitting drone. Injected frames keep the index of the
    /// drone whose frame they were derived from.
    pub sender: usize,
    pub frame: Vec<u8>,
    pub injected: bool,
    pub sent_us: u64,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChannelStats {
    pub sent: u64,
    pub lost: u64,
    pub injected: u64,
}

pub struct BroadcastChannel {
    pub loss_rate: f64,
    pub latency_us: u64,
    queue: Vec<(u64, u64, Delivery)>,
    seq: u64,
    rng: SimRng,
    pub stats: ChannelStats,
}

impl BroadcastChannel {
    pub fn new(loss_rate: f64, latency_us: u64, rng: SimRng) -> Self {
        BroadcastChannel {
            loss_rate,
            latency_us,
            queue: Vec::new(),
            seq: 0,
            rng,
            stats: ChannelStats::default(),
        }
    }

    fn push(&mut self, d: Delivery) {
        self.seq += 1;
        let key = (d.at_us, self.seq);
        let pos = self.queue.partition_point(|(t, s, _)| (*t, *s) <= key);
        self.queue.insert(pos, (key.0, key.1, d));
    }

    /// Returns false when the frame is lost.
    pub fn send(&mut self, sender: usize, frame: Vec<u8>, now_us: u64) -> bool {
        self.stats.sent += 1;
        if self.loss_rate > 0.0 && self.rng.gen_bool(self.loss_rate.min(1.0)) {
            self.stats.lost += 1;
            return false;
        }
        self.push(Delivery {
            at_us: now_us + self.latency_us,
            sender,
            frame,
            injected: false,
            sent_us: now_us,
        });
        true
    }

    /// Adversary hook: puts an arbitrary frame on the air at `at_us`.
    pub fn inject(&mut self, sender: usize, frame: Vec<u8>, at_us: u64) {
        self.stats.injected += 1;
        self.push(Delivery {
            at_us,
            sender,
            frame,
            injected: true,
            sent_us: at_us,
        });
    }

    /// Deliveries due by `now_us`, in delivery order.
    pub fn deliver_due(&mut self, now_us: u64) -> Vec<Delivery> {
        let n = self.queue.partition_point(|(t, _, _)| *t <= now_us);
        self.queue.drain(..n).map(|(_, _, d)| d).collect()
    }

    pub fn next_delivery_us(&self) -> Option<u64> {
        self.queue.first().map(|(t, _, _)| *t)
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }
}
