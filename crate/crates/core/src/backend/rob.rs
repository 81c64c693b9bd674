use std::collections::{BTreeMap, HashMap, VecDeque};

use thiserror::Error;

/// Program-ordered window of in-flight ops, identified by trace seq.
#[derive(Clone, Debug)]
pub struct ReorderBuffer {
    capacity: usize,
    entries: VecDeque<usize>,
}

impl ReorderBuffer {
    pub fn new(capacity: usize) -> Self {
        ReorderBuffer {
            capacity,
            entries: VecDeque::with_capacity(capacity),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.entries.len() >= self.capacity
    }

    pub fn push(&mut self, seq: usize) {
        debug_assert!(!self.is_full());
        debug_assert!(self.entries.back().is_none_or(|&b| b < seq), "ROB entry out of order");
        self.entries.push_back(seq);
    }

    pub fn oldest(&self) -> Option<usize> {
        self.entries.front().copied()
    }

    /// Removes up to `width` oldest ops whose completion cycle is at or
    /// before `cycle`, stopping at the first one that is not done.
    pub fn commit_cycle(
        &mut self,
        cycle: u64,
        width: usize,
        completion: impl Fn(usize) -> Option<u64>,
    ) -> Vec<usize> {
        let mut out = Vec::new();
        while out.len() < width {
            match self.entries.front() {
                Some(&seq) if completion(seq).is_some_and(|c| c <= cycle) => {
                    self.entries.pop_front();
                    out.push(seq);
                }
                _ => break,
            }
        }
        out
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("load {load} issued at cycle {issue} before an older store to line {line:#x} completed at cycle {store_complete}")]
pub struct MemoryOrderViolation {
    pub load: usize,
    pub line: u64,
    pub issue: u64,
    pub store_complete: u64,
}

/// Uncommitted stores by seq, for line-granular load ordering.
#[derive(Clone, Debug)]
pub struct StoreQueue {
    line: u64,
    pending: BTreeMap<usize, (u64, Option<u64>)>,
    /// Completion of the most recently committed store, per line.
    committed: HashMap<u64, u64>,
}

impl StoreQueue {
    pub fn new(line: u64) -> Self {
        StoreQueue {
            line,
            pending: BTreeMap::new(),
            committed: HashMap::new(),
        }
    }

    pub fn add_store(&mut self, seq: usize, addr: u64) {
        self.pending.insert(seq, (addr / self.line, None));
    }

    pub fn store_issued(&mut self, seq: usize, completion: u64) {
        if let Some(s) = self.pending.get_mut(&seq) {
            s.1 = Some(completion);
        }
    }

    /// A load may issue once the youngest older uncommitted store to its line,
    /// if any, has completed. Lines are the unit of data, so that store is the
    /// one the load reads from.
    pub fn memory_order_ok(&self, load: usize, addr: u64, cycle: u64) -> bool {
        let line = addr / self.line;
        self.pending
            .range(..load)
            .rev()
            .find(|(_, s)| s.0 == line)
            .is_none_or(|(_, s)| s.1.is_some_and(|c| c <= cycle))
    }

    pub fn commit_store(&mut self, seq: usize) {
        if let Some((line, done)) = self.pending.remove(&seq) {
            let done = done.expect("store committed before issuing");
            self.committed.insert(line, done);
        }
    }

    /// Checked when a load commits, when every older store has committed and
    /// no younger one has.
    pub fn check_load_commit(&self, load: usize, addr: u64, issue: u64) -> Result<(), MemoryOrderViolation> {
        let line = addr / self.line;
        match self.committed.get(&line) {
            Some(&store_complete) if store_complete > issue => Err(MemoryOrderViolation {
                load,
                line,
                issue,
                store_complete,
            }),
            _ => Ok(()),
        }
    }

    pub fn pending(&self) -> usize {
        self.pending.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn commit_stops_at_incomplete_oldest() {
        let mut rob = ReorderBuffer::new(8);
        for s in 0..4 {
            rob.push(s);
        }
        let done = |s: usize| if s == 0 { None } else { Some(1) };
        assert!(rob.commit_cycle(5, 4, done).is_empty());
        let all = |_: usize| Some(1);
        assert_eq!(rob.commit_cycle(5, 4, all), vec![0, 1, 2, 3]);
        assert!(rob.is_empty());
    }

    #[test]
    fn commit_respects_width_and_cycle() {
        let mut rob = ReorderBuffer::new(8);
        for s in 0..4 {
            rob.push(s);
        }
        assert_eq!(rob.commit_cycle(5, 2, |_| Some(5)), vec![0, 1]);
        assert!(rob.commit_cycle(4, 2, |_| Some(5)).is_empty());
    }

    #[test]
    fn load_waits_for_older_same_line_store() {
        let mut sq = StoreQueue::new(64);
        sq.add_store(3, 0x1000);
        assert!(!sq.memory_order_ok(5, 0x1008, 10));
        assert!(sq.memory_order_ok(5, 0x2000, 10));
        // Younger stores do not constrain the load.
        assert!(sq.memory_order_ok(2, 0x1000, 10));
        sq.store_issued(3, 14);
        assert!(!sq.memory_order_ok(5, 0x1000, 13));
        assert!(sq.memory_order_ok(5, 0x1000, 14));
    }

    #[test]
    fn load_reads_from_the_youngest_older_store() {
        let mut sq = StoreQueue::new(64);
        sq.add_store(1, 0x1000);
        sq.add_store(2, 0x1010);
        sq.store_issued(2, 8);
        assert!(sq.memory_order_ok(3, 0x1020, 8));
        assert!(!sq.memory_order_ok(3, 0x1020, 7));
    }

    #[test]
    fn commit_check_flags_early_load() {
        let mut sq = StoreQueue::new(64);
        sq.add_store(1, 0x40);
        sq.store_issued(1, 20);
        sq.commit_store(1);
        assert!(sq.check_load_commit(2, 0x48, 20).is_ok());
        assert_eq!(
            sq.check_load_commit(2, 0x48, 19),
            Err(MemoryOrderViolation {
                load: 2,
                line: 1,
                issue: 19,
                store_complete: 20
            })
        );
    }
}
