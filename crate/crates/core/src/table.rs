//! Byte-bounded transposition table with LRU eviction. Keys on the current
//! search path are pinned and never evicted.

use std::hash::BuildHasherDefault;

use hashlink::LinkedHashMap;
use rustc_hash::{FxHashSet, FxHasher};

/// Bookkeeping charged per entry on top of the key bytes.
pub const ENTRY_OVERHEAD: usize = 64;

pub struct TranspositionTable {
    capacity: usize,
    bytes: usize,
    peak: usize,
    pinned: FxHashSet<Box<[u8]>>,
    lru: LinkedHashMap<Box<[u8]>, (), BuildHasherDefault<FxHasher>>,
}

fn cost(key: &[u8]) -> usize {
    key.len() + ENTRY_OVERHEAD
}

impl TranspositionTable {
    pub fn new(capacity: usize) -> TranspositionTable {
        TranspositionTable {
            capacity,
            bytes: 0,
            peak: 0,
            pinned: FxHashSet::default(),
            lru: LinkedHashMap::default(),
        }
    }

    pub fn bytes(&self) -> usize {
        self.bytes
    }

    pub fn peak_bytes(&self) -> usize {
        self.peak
    }

    pub fn len(&self) -> usize {
        self.pinned.len() + self.lru.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_pinned(&self, key: &[u8]) -> bool {
        self.pinned.contains(key)
    }

    /// Looks `key` up, refreshing its recency on a hit.
    pub fn contains(&mut self, key: &[u8]) -> bool {
        self.pinned.contains(key) || self.lru.to_back(key).is_some()
    }

    /// Inserts a new key as pinned, evicting unpinned entries as needed.
    /// Fails when only pinned entries remain and the key still does not fit.
    pub fn insert_pinned(&mut self, key: &[u8]) -> bool {
        let need = cost(key);
        while self.bytes + need > self.capacity {
            match self.lru.pop_front() {
                Some((old, ())) => self.bytes -= cost(&old),
                None => return false,
            }
        }
        self.bytes += need;
        self.peak = self.peak.max(self.bytes);
        self.pinned.insert(key.into());
        true
    }

    /// Moves a pinned key into the LRU order as most recently used.
    pub fn unpin(&mut self, key: &[u8]) {
        if let Some(k) = self.pinned.take(key) {
            self.lru.insert(k, ());
        }
    }
}
