//! In-memory call counters for the dashboard.

use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

#[derive(Debug, Default)]
struct Counters {
    success: AtomicU64,
    client_error: AtomicU64,
    server_error: AtomicU64,
    other: AtomicU64,
    last_call: AtomicU64,
}

impl Counters {
    fn record(&self, status: u16, now: u64) {
        let slot = match status {
            200..=299 => &self.success,
            400..=499 => &self.client_error,
            500..=599 => &self.server_error,
            _ => &self.other,
        };
        slot.fetch_add(1, Ordering::Relaxed);
        self.last_call.fetch_max(now, Ordering::Relaxed);
    }

    fn snapshot(&self) -> CounterSnapshot {
        let success = self.success.load(Ordering::Relaxed);
        let client_error = self.client_error.load(Ordering::Relaxed);
        let server_error = self.server_error.load(Ordering::Relaxed);
        let other = self.other.load(Ordering::Relaxed);
        let last = self.last_call.load(Ordering::Relaxed);
        CounterSnapshot {
            total: success + client_error + server_error + other,
            success,
            client_error,
            server_error,
            other,
            last_call: (last > 0).then_some(last),
        }
    }
}

/// Counts read at one moment. `total` is the sum of the classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CounterSnapshot {
    pub total: u64,
    pub success: u64,
    pub client_error: u64,
    pub server_error: u64,
    pub other: u64,
    /// Seconds since the Unix epoch.
    pub last_call: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StatsSnapshot {
    pub global: CounterSnapshot,
    /// Indexed by api, then operation, in load order.
    pub operations: Vec<Vec<CounterSnapshot>>,
}

impl StatsSnapshot {
    pub fn operation(&self, api: usize, operation: usize) -> CounterSnapshot {
        self.operations[api][operation]
    }
}

/// Counters per operation plus a global set, safe to update from many
/// threads at once.
#[derive(Debug)]
pub struct CallStats {
    global: Counters,
    operations: Vec<Vec<Counters>>,
}

impl CallStats {
    /// `shape[i]` is the number of operations of api `i`.
    pub fn new(shape: impl IntoIterator<Item = usize>) -> Self {
        CallStats {
            global: Counters::default(),
            operations: shape
                .into_iter()
                .map(|n| (0..n).map(|_| Counters::default()).collect())
                .collect(),
        }
    }

    /// Counts one call, against its operation when it resolved to one.
    pub fn record_call(&self, operation: Option<(usize, usize)>, status: u16) {
        let now = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        if let Some((api, op)) = operation {
            self.operations[api][op].record(status, now);
        }
        self.global.record(status, now);
    }

    pub fn snapshot(&self) -> StatsSnapshot {
        StatsSnapshot {
            global: self.global.snapshot(),
            operations: self.operations.iter().map(|ops| ops.iter().map(Counters::snapshot).collect()).collect(),
        }
    }
}
