//! Per-stage instrumentation counters. Off unless a [`Probe`] is supplied.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::Serialize;

#[derive(Debug, Default)]
pub(crate) struct StageCounters {
    pub starts: AtomicU64,
    pub stops: AtomicU64,
    pub messages_in: AtomicU64,
    pub messages_out: AtomicU64,
    pub items_in: AtomicU64,
    pub blocked_nanos: AtomicU64,
}

impl StageCounters {
    pub fn add(field: &AtomicU64, n: u64) {
        field.fetch_add(n, Ordering::Relaxed);
    }
}

/// Snapshot of one stage's counters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StageStats {
    pub stage: String,
    pub starts: u64,
    pub stops: u64,
    pub messages_in: u64,
    pub messages_out: u64,
    /// Time points carried by the frames this stage received.
    pub items_in: u64,
    /// Time spent blocked in stream send/recv, in nanoseconds.
    pub blocked_nanos: u64,
}

type Registry = Vec<(String, Arc<StageCounters>)>;

/// Collects counters from every stage of one or more pipeline runs.
///
/// Stages register by name; running the same probe through several batches
/// accumulates into the same entries.
#[derive(Debug, Default, Clone)]
pub struct Probe {
    stages: Arc<Mutex<Registry>>,
}

impl Probe {
    pub fn new() -> Self {
        Self::default()
    }

    pub(crate) fn stage(&self, name: &str) -> Arc<StageCounters> {
        let mut stages = self.stages.lock().expect("probe lock poisoned");
        if let Some((_, counters)) = stages.iter().find(|(n, _)| n == name) {
            return counters.clone();
        }
        let counters = Arc::new(StageCounters::default());
        stages.push((name.to_owned(), counters.clone()));
        counters
    }

    /// Counters for every registered stage, in registration order.
    pub fn snapshot(&self) -> Vec<StageStats> {
        let load = |a: &AtomicU64| a.load(Ordering::Relaxed);
        self.stages
            .lock()
            .expect("probe lock poisoned")
            .iter()
            .map(|(name, c)| StageStats {
                stage: name.clone(),
                starts: load(&c.starts),
                stops: load(&c.stops),
                messages_in: load(&c.messages_in),
                messages_out: load(&c.messages_out),
                items_in: load(&c.items_in),
                blocked_nanos: load(&c.blocked_nanos),
            })
            .collect()
    }

    pub fn get(&self, stage: &str) -> Option<StageStats> {
        self.snapshot().into_iter().find(|s| s.stage == stage)
    }
}
