//! Priority queues keyed by integer costs.
//!
//! Both queues pop the minimum key and break ties first-in first-out, so a
//! given push sequence always produces the same pop sequence. Each queue
//! counts the elementary steps it performs; the delay benchmarks read these
//! counters instead of wall-clock time.

use std::collections::VecDeque;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QueueError {
    #[error("key {key} is below the current minimum {min}")]
    MonotonicityViolation { key: u64, min: u64 },
    #[error("queue is empty")]
    EmptyQueue,
}

/// Work counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueueStats {
    pub pushes: u64,
    pub pops: u64,
    pub peeks: u64,
    /// Comparisons made while restoring the heap property.
    pub sift_steps: u64,
    /// Empty buckets skipped while searching for the minimum.
    pub scan_steps: u64,
    /// Items that went to the overflow heap of a bucket queue.
    pub overflow_pushes: u64,
    /// Largest `key - base` seen at push time.
    pub max_spread: u64,
}

impl QueueStats {
    /// Total elementary operations.
    pub fn work(&self) -> u64 {
        self.pushes + self.pops + self.peeks + self.sift_steps + self.scan_steps
    }

    pub fn merge(&mut self, other: &QueueStats) {
        self.pushes += other.pushes;
        self.pops += other.pops;
        self.peeks += other.peeks;
        self.sift_steps += other.sift_steps;
        self.scan_steps += other.scan_steps;
        self.overflow_pushes += other.overflow_pushes;
        self.max_spread = self.max_spread.max(other.max_spread);
    }
}

/// Minimum-first queue with FIFO tie-breaking.
///
/// Pushed keys must not be smaller than the last popped or peeked key.
pub trait KeyedQueue<T> {
    fn push(&mut self, item: T, key: u64) -> Result<(), QueueError>;
    fn pop(&mut self) -> Option<(T, u64)>;
    fn peek(&mut self) -> Option<(&T, u64)>;
    fn len(&self) -> usize;
    fn stats(&self) -> &QueueStats;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn peek_key(&mut self) -> Option<u64> {
        self.peek().map(|(_, k)| k)
    }
}

#[derive(Debug, Clone)]
struct Entry<T> {
    key: u64,
    seq: u64,
    item: T,
}

impl<T> Entry<T> {
    #[inline]
    fn before(&self, other: &Entry<T>) -> bool {
        (self.key, self.seq) < (other.key, other.seq)
    }
}

/// Binary min-heap ordered by `(key, insertion order)`.
#[derive(Debug, Clone)]
pub struct BinaryQueue<T> {
    heap: Vec<Entry<T>>,
    seq: u64,
    stats: QueueStats,
}

impl<T> Default for BinaryQueue<T> {
    fn default() -> Self {
        BinaryQueue {
            heap: Vec::new(),
            seq: 0,
            stats: QueueStats::default(),
        }
    }
}

impl<T> BinaryQueue<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Iterates over the queued items in no particular order.
    pub fn iter(&self) -> impl Iterator<Item = (&T, u64)> {
        self.heap.iter().map(|e| (&e.item, e.key))
    }

    fn sift_up(&mut self, mut i: usize) {
        while i > 0 {
            let parent = (i - 1) / 2;
            self.stats.sift_steps += 1;
            if self.heap[i].before(&self.heap[parent]) {
                self.heap.swap(i, parent);
                i = parent;
            } else {
                break;
            }
        }
    }

    fn sift_down(&mut self, mut i: usize) {
        let n = self.heap.len();
        loop {
            let l = 2 * i + 1;
            if l >= n {
                break;
            }
            let r = l + 1;
            let mut child = l;
            if r < n {
                self.stats.sift_steps += 1;
                if self.heap[r].before(&self.heap[l]) {
                    child = r;
                }
            }
            self.stats.sift_steps += 1;
            if self.heap[child].before(&self.heap[i]) {
                self.heap.swap(i, child);
                i = child;
            } else {
                break;
            }
        }
    }
}

impl<T> KeyedQueue<T> for BinaryQueue<T> {
    fn push(&mut self, item: T, key: u64) -> Result<(), QueueError> {
        self.stats.pushes += 1;
        self.heap.push(Entry {
            key,
            seq: self.seq,
            item,
        });
        self.seq += 1;
        let last = self.heap.len() - 1;
        self.sift_up(last);
        Ok(())
    }

    fn pop(&mut self) -> Option<(T, u64)> {
        if self.heap.is_empty() {
            return None;
        }
        self.stats.pops += 1;
        let top = self.heap.swap_remove(0);
        if !self.heap.is_empty() {
            self.sift_down(0);
        }
        Some((top.item, top.key))
    }

    fn peek(&mut self) -> Option<(&T, u64)> {
        self.stats.peeks += 1;
        self.heap.first().map(|e| (&e.item, e.key))
    }

    fn len(&self) -> usize {
        self.heap.len()
    }

    fn stats(&self) -> &QueueStats {
        &self.stats
    }
}

/// Bucket queue over a window of `B` consecutive integer keys.
///
/// Bucket `j` holds the items of key `base_key`; an item of key `k` inside
/// the window sits in bucket `(j + k - base_key) mod B`. Keys beyond the
/// window wait in an overflow heap and move into the ring once the window
/// reaches them. With a key spread below `B` the overflow stays empty and
/// every operation is constant time.
#[derive(Debug, Clone)]
pub struct BucketQueue<T> {
    buckets: Vec<VecDeque<T>>,
    j: usize,
    base_key: u64,
    /// Last popped or peeked key, initially the base.
    floor: u64,
    ring_len: usize,
    overflow: BinaryQueue<T>,
    stats: QueueStats,
}

impl<T> BucketQueue<T> {
    pub fn new(bucket_count: usize) -> Self {
        Self::with_base(bucket_count, 0)
    }

    /// Empty queue whose window starts at `base_key`, which also acts as
    /// the smallest admissible key.
    pub fn with_base(bucket_count: usize, base_key: u64) -> Self {
        let b = bucket_count.max(1);
        BucketQueue {
            buckets: (0..b).map(|_| VecDeque::new()).collect(),
            j: 0,
            base_key,
            floor: base_key,
            ring_len: 0,
            overflow: BinaryQueue::new(),
            stats: QueueStats::default(),
        }
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    pub fn base_key(&self) -> u64 {
        self.base_key
    }

    pub fn overflow_len(&self) -> usize {
        self.overflow.len()
    }

    #[inline]
    fn window_end(&self) -> u64 {
        self.base_key + self.buckets.len() as u64
    }

    fn drain_overflow(&mut self) {
        while let Some(k) = self.overflow.peek_key() {
            if k >= self.window_end() {
                break;
            }
            let (item, key) = self.overflow.pop().expect("peeked");
            let idx = (self.j + (key - self.base_key) as usize) % self.buckets.len();
            self.buckets[idx].push_back(item);
            self.ring_len += 1;
        }
    }

    /// Moves `j` to the first non-empty bucket. Returns false when empty.
    fn settle(&mut self) -> bool {
        if self.ring_len == 0 {
            let Some(k) = self.overflow.peek_key() else {
                return false;
            };
            self.base_key = k;
            self.j = 0;
            self.drain_overflow();
        }
        while self.buckets[self.j].is_empty() {
            self.j = (self.j + 1) % self.buckets.len();
            self.base_key += 1;
            self.stats.scan_steps += 1;
            if !self.overflow.is_empty() {
                self.drain_overflow();
            }
        }
        true
    }

    fn sync_overflow_stats(&mut self) {
        let o = self.overflow.stats();
        self.stats.sift_steps = o.sift_steps;
    }
}

impl<T> KeyedQueue<T> for BucketQueue<T> {
    fn push(&mut self, item: T, key: u64) -> Result<(), QueueError> {
        // an empty queue falls back to the last popped or peeked key, so
        // that a later push between it and `key` still fits the window
        if self.is_empty() {
            self.base_key = self.floor;
            self.j = 0;
        }
        if key < self.base_key {
            return Err(QueueError::MonotonicityViolation {
                key,
                min: self.base_key,
            });
        }
        self.stats.pushes += 1;
        self.stats.max_spread = self.stats.max_spread.max(key - self.base_key);
        if key < self.window_end() {
            let idx = (self.j + (key - self.base_key) as usize) % self.buckets.len();
            self.buckets[idx].push_back(item);
            self.ring_len += 1;
        } else {
            self.stats.overflow_pushes += 1;
            self.overflow.push(item, key)?;
            self.sync_overflow_stats();
        }
        Ok(())
    }

    fn pop(&mut self) -> Option<(T, u64)> {
        if !self.settle() {
            return None;
        }
        self.stats.pops += 1;
        let item = self.buckets[self.j].pop_front().expect("settled on a non-empty bucket");
        self.ring_len -= 1;
        self.floor = self.base_key;
        self.sync_overflow_stats();
        Some((item, self.base_key))
    }

    fn peek(&mut self) -> Option<(&T, u64)> {
        self.stats.peeks += 1;
        if !self.settle() {
            return None;
        }
        self.sync_overflow_stats();
        let key = self.base_key;
        self.floor = key;
        self.buckets[self.j].front().map(|item| (item, key))
    }

    fn len(&self) -> usize {
        self.ring_len + self.overflow.len()
    }

    fn stats(&self) -> &QueueStats {
        &self.stats
    }
}

/// Either queue behind one type, chosen at construction.
#[derive(Debug, Clone)]
pub enum AnyQueue<T> {
    Binary(BinaryQueue<T>),
    Bucket(BucketQueue<T>),
}

impl<T> KeyedQueue<T> for AnyQueue<T> {
    #[inline]
    fn push(&mut self, item: T, key: u64) -> Result<(), QueueError> {
        match self {
            AnyQueue::Binary(q) => q.push(item, key),
            AnyQueue::Bucket(q) => q.push(item, key),
        }
    }

    #[inline]
    fn pop(&mut self) -> Option<(T, u64)> {
        match self {
            AnyQueue::Binary(q) => q.pop(),
            AnyQueue::Bucket(q) => q.pop(),
        }
    }

    #[inline]
    fn peek(&mut self) -> Option<(&T, u64)> {
        match self {
            AnyQueue::Binary(q) => q.peek(),
            AnyQueue::Bucket(q) => q.peek(),
        }
    }

    fn len(&self) -> usize {
        match self {
            AnyQueue::Binary(q) => q.len(),
            AnyQueue::Bucket(q) => q.len(),
        }
    }

    fn stats(&self) -> &QueueStats {
        match self {
            AnyQueue::Binary(q) => q.stats(),
            AnyQueue::Bucket(q) => q.stats(),
        }
    }
}
