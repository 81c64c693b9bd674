use std::cmp::Ordering;

/// Ordering key of a queue entry. `band` is zero outside the in-order warm-up
/// mode; `order` is the dispatch order and breaks priority ties.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PqKey {
    pub band: u64,
    pub priority: u64,
    pub order: u64,
}

impl PqKey {
    pub fn new(priority: u64, order: u64) -> Self {
        PqKey {
            band: 0,
            priority,
            order,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PqEntry {
    pub id: usize,
    pub key: PqKey,
    pub inserted_at: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PqFull;

/// Fixed-capacity priority queue laid out as a linear array of cells kept in
/// key order, the way a systolic queue settles: insertion shifts larger
/// entries one cell toward the tail, removal happens only at the head, and
/// an entry becomes visible at the head the cycle after it was inserted.
#[derive(Clone, Debug)]
pub struct SystolicPQ {
    capacity: usize,
    cells: Vec<PqEntry>,
}

impl SystolicPQ {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity >= 1, "queue capacity must be >= 1");
        SystolicPQ {
            capacity,
            cells: Vec::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.cells.len() == self.capacity
    }

    pub fn free_entries(&self) -> usize {
        self.capacity - self.cells.len()
    }

    pub fn insert(&mut self, id: usize, key: PqKey, cycle: u64) -> Result<(), PqFull> {
        if self.is_full() {
            return Err(PqFull);
        }
        let at = self
            .cells
            .partition_point(|e| e.key.cmp(&key) != Ordering::Greater);
        self.cells.insert(
            at,
            PqEntry {
                id,
                key,
                inserted_at: cycle,
            },
        );
        Ok(())
    }

    /// The minimum-key entry among those inserted before `cycle`.
    pub fn head(&self, cycle: u64) -> Option<&PqEntry> {
        self.cells.iter().find(|e| e.inserted_at < cycle)
    }

    pub fn pop(&mut self, cycle: u64) -> Option<PqEntry> {
        let at = self.cells.iter().position(|e| e.inserted_at < cycle)?;
        Some(self.cells.remove(at))
    }

    /// The last occupied cell.
    pub fn tail(&self) -> Option<&PqEntry> {
        self.cells.last()
    }

    pub fn contains(&self, id: usize) -> bool {
        self.cells.iter().any(|e| e.id == id)
    }

    pub fn iter(&self) -> impl Iterator<Item = &PqEntry> {
        self.cells.iter()
    }
}
