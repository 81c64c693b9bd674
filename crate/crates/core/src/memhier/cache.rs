use super::{CacheLevelConfig, Level};

#[derive(Clone, Debug)]
pub(crate) struct Line {
    pub tag: u64,
    pub dirty: bool,
    pub last_use: u64,
    /// Cycle the fill completes; earlier accesses merge into the fill.
    pub ready_at: u64,
    /// Where the in-flight (or last) fill came from.
    pub source: Level,
}

/// One set-associative, LRU, write-allocate cache level with a bound on
/// concurrent misses.
#[derive(Clone, Debug)]
pub(crate) struct Cache {
    pub cfg: CacheLevelConfig,
    sets: Vec<Vec<Line>>,
    mshr: Vec<u64>,
    stamp: u64,
}

pub(crate) enum Lookup {
    Hit { ready_at: u64, source: Level },
    Miss,
}

impl Cache {
    pub fn new(cfg: CacheLevelConfig) -> Self {
        let sets = cfg.sets();
        Cache {
            sets: vec![Vec::with_capacity(cfg.associativity); sets],
            mshr: Vec::new(),
            stamp: 0,
            cfg,
        }
    }

    pub fn line_of(&self, addr: u64) -> u64 {
        addr / self.cfg.line
    }

    fn set_of(&self, line: u64) -> usize {
        (line % self.sets.len() as u64) as usize
    }

    /// Looks the line up, refreshing LRU state and the dirty bit on a hit.
    pub fn lookup(&mut self, addr: u64, write: bool) -> Lookup {
        let line = self.line_of(addr);
        let set = self.set_of(line);
        self.stamp += 1;
        let stamp = self.stamp;
        match self.sets[set].iter_mut().find(|l| l.tag == line) {
            Some(l) => {
                l.last_use = stamp;
                l.dirty |= write;
                Lookup::Hit {
                    ready_at: l.ready_at,
                    source: l.source,
                }
            }
            None => Lookup::Miss,
        }
    }

    pub fn contains(&self, addr: u64) -> bool {
        let line = self.line_of(addr);
        self.sets[self.set_of(line)].iter().any(|l| l.tag == line)
    }

    /// Installs a line, returning the evicted victim's address if it was dirty.
    pub fn fill(&mut self, addr: u64, ready_at: u64, source: Level, dirty: bool) -> Option<u64> {
        let line = self.line_of(addr);
        let set = self.set_of(line);
        self.stamp += 1;
        let stamp = self.stamp;
        let ways = self.cfg.associativity;
        let lines = &mut self.sets[set];
        if let Some(l) = lines.iter_mut().find(|l| l.tag == line) {
            l.dirty |= dirty;
            l.last_use = stamp;
            return None;
        }
        let new = Line {
            tag: line,
            dirty,
            last_use: stamp,
            ready_at,
            source,
        };
        if lines.len() < ways {
            lines.push(new);
            return None;
        }
        let victim = lines
            .iter()
            .enumerate()
            .min_by_key(|(_, l)| l.last_use)
            .map(|(i, _)| i)
            .expect("associativity >= 1");
        let old = std::mem::replace(&mut lines[victim], new);
        old.dirty.then_some(old.tag * self.cfg.line)
    }

    /// Earliest cycle at or after `cycle` when a miss slot is free. Does not
    /// reserve the slot.
    pub fn miss_slot_at(&mut self, cycle: u64) -> u64 {
        self.mshr.retain(|&done| done > cycle);
        if self.mshr.len() < self.cfg.outstanding {
            cycle
        } else {
            *self.mshr.iter().min().expect("non-empty")
        }
    }

    /// Occupies a miss slot from `start` until `done`. The slot freed at
    /// `start`, if any, is taken over.
    pub fn reserve_miss(&mut self, start: u64, done: u64) {
        self.mshr.retain(|&d| d > start);
        if self.mshr.len() >= self.cfg.outstanding {
            let (i, _) = self
                .mshr
                .iter()
                .enumerate()
                .min_by_key(|(_, &d)| d)
                .expect("non-empty");
            self.mshr.swap_remove(i);
        }
        self.mshr.push(done);
    }

    pub fn outstanding(&self, cycle: u64) -> usize {
        self.mshr.iter().filter(|&&d| d > cycle).count()
    }
}
