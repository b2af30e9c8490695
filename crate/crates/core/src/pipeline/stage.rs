//! Per-stage runtime context: counters, scheduling jitter, fault injection.

use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::probe::{Probe, StageCounters};
use super::stream::{StreamError, StreamReceiver, StreamSender};
use super::Jitter;
use crate::error::CdsError;

/// How a stage failed. `propagated` failures are consequences of another
/// stage dying (a poisoned or closed stream), not root causes.
#[derive(Debug)]
pub(crate) struct StageError {
    pub error: CdsError,
    pub propagated: bool,
}

pub(crate) type StageResult<T> = Result<T, StageError>;

/// Test hook: panic inside `stage` once it has sent `after_sends` messages.
#[derive(Debug, Clone)]
pub(crate) struct Fault {
    pub stage: String,
    pub after_sends: usize,
}

pub(crate) struct StageCtx {
    name: String,
    counters: Option<Arc<StageCounters>>,
    jitter: Option<(ChaCha8Rng, Jitter)>,
    fault_after: Option<usize>,
    sent: usize,
}

fn name_hash(name: &str) -> u64 {
    // FNV-1a
    name.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3)
    })
}

impl StageCtx {
    pub fn new(
        name: String,
        probe: Option<&Probe>,
        jitter: Option<Jitter>,
        fault: Option<&Fault>,
    ) -> Self {
        let counters = probe.map(|p| p.stage(&name));
        let jitter = jitter.map(|j| (ChaCha8Rng::seed_from_u64(j.seed ^ name_hash(&name)), j));
        let fault_after = fault.filter(|f| f.stage == name).map(|f| f.after_sends);
        Self {
            name,
            counters,
            jitter,
            fault_after,
            sent: 0,
        }
    }

    pub fn detached(name: &str) -> Self {
        Self::new(name.to_owned(), None, None, None)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn started(&self) {
        if let Some(c) = &self.counters {
            StageCounters::add(&c.starts, 1);
        }
    }

    pub fn stopped(&self) {
        if let Some(c) = &self.counters {
            StageCounters::add(&c.stops, 1);
        }
    }

    pub fn count_items(&self, n: usize) {
        if let Some(c) = &self.counters {
            StageCounters::add(&c.items_in, n as u64);
        }
    }

    fn stream_failure(&self, err: StreamError) -> StageError {
        StageError {
            error: CdsError::Stage {
                stage: self.name.clone(),
                reason: err.to_string(),
            },
            propagated: true,
        }
    }

    /// A failure originating in this stage.
    pub fn fail(&self, reason: impl Into<String>) -> StageError {
        StageError {
            error: CdsError::Stage {
                stage: self.name.clone(),
                reason: reason.into(),
            },
            propagated: false,
        }
    }

    fn perturb(&mut self) {
        let Some((rng, jitter)) = self.jitter.as_mut() else {
            return;
        };
        match rng.random_range(0..32u32) {
            0..=19 => {}
            20..=25 => std::thread::yield_now(),
            26..=30 => {
                let spins = rng.random_range(0..2_000u32);
                for _ in 0..spins {
                    std::hint::spin_loop();
                }
            }
            _ => {
                let micros = rng.random_range(0..=jitter.max_sleep_micros);
                std::thread::sleep(Duration::from_micros(micros));
            }
        }
    }

    pub fn recv<T>(&mut self, rx: &StreamReceiver<T>) -> StageResult<Option<T>> {
        let got = match &self.counters {
            None => rx.recv(),
            Some(c) => {
                let t0 = Instant::now();
                let got = rx.recv();
                StageCounters::add(&c.blocked_nanos, t0.elapsed().as_nanos() as u64);
                if matches!(got, Ok(Some(_))) {
                    StageCounters::add(&c.messages_in, 1);
                }
                got
            }
        };
        let got = got.map_err(|e| self.stream_failure(e))?;
        self.perturb();
        Ok(got)
    }

    pub fn send<T>(&mut self, tx: &StreamSender<T>, item: T) -> StageResult<()> {
        if self.fault_after.is_some_and(|n| self.sent >= n) {
            panic!("injected fault in stage `{}`", self.name);
        }
        self.perturb();
        match &self.counters {
            None => tx.send(item),
            Some(c) => {
                let t0 = Instant::now();
                let sent = tx.send(item);
                StageCounters::add(&c.blocked_nanos, t0.elapsed().as_nanos() as u64);
                StageCounters::add(&c.messages_out, 1);
                sent
            }
        }
        .map_err(|e| self.stream_failure(e))?;
        self.sent += 1;
        Ok(())
    }

    pub fn finish<T>(&mut self, tx: StreamSender<T>) -> StageResult<()> {
        tx.finish().map_err(|e| self.stream_failure(e))
    }
}
