//! Millisecond clocks. The executor is the only thing that advances time;
//! everything else just reads it.

use std::fmt::Debug;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::{Duration, Instant};

pub trait Clock: Send + Sync + Debug {
    fn now_ms(&self) -> u64;

    /// Block until `t_ms`. Virtual clocks jump there immediately.
    fn wait_until(&self, t_ms: u64);

    fn is_virtual(&self) -> bool {
        false
    }
}

/// Deterministic clock for tests and replays.
#[derive(Debug, Clone, Default)]
pub struct VirtualClock {
    now: Arc<AtomicU64>,
}

impl VirtualClock {
    pub fn new(start_ms: u64) -> Self {
        Self {
            now: Arc::new(AtomicU64::new(start_ms)),
        }
    }

    /// Move time forward to `t_ms`; never moves backwards.
    pub fn set(&self, t_ms: u64) {
        self.now.fetch_max(t_ms, Ordering::AcqRel);
    }

    pub fn advance(&self, ms: u64) {
        self.now.fetch_add(ms, Ordering::AcqRel);
    }
}

impl Clock for VirtualClock {
    fn now_ms(&self) -> u64 {
        self.now.load(Ordering::Acquire)
    }

    fn wait_until(&self, t_ms: u64) {
        self.set(t_ms);
    }

    fn is_virtual(&self) -> bool {
        true
    }
}

/// Wall clock measured from construction.
#[derive(Debug, Clone)]
pub struct SystemClock {
    origin: Instant,
}

impl SystemClock {
    pub fn new() -> Self {
        Self {
            origin: Instant::now(),
        }
    }
}

impl Default for SystemClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for SystemClock {
    fn now_ms(&self) -> u64 {
        self.origin.elapsed().as_millis() as u64
    }

    fn wait_until(&self, t_ms: u64) {
        let now = self.now_ms();
        if t_ms > now {
            std::thread::sleep(Duration::from_millis(t_ms - now));
        }
    }
}
