//! Memory-hierarchy latency model: L1, L2 and an open-row DRAM.
//!
//! The model is purely timing: every access returns the level that served
//! it and the cycle its data becomes visible. Misses occupy a miss slot at
//! each level they pass; once a level's slots are exhausted, a new miss
//! waits for the earliest slot to free. Fills are installed immediately with
//! a future ready time, so a later access to an in-flight line merges with
//! the fill instead of missing again.

mod cache;
mod dram;
mod prefetch;

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use cache::{Cache, Lookup};
use dram::Dram;
pub use prefetch::StridePrefetcher;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Level {
    L1,
    L2,
    #[serde(rename = "DRAM")]
    Dram,
}

impl Level {
    pub fn name(self) -> &'static str {
        match self {
            Level::L1 => "L1",
            Level::L2 => "L2",
            Level::Dram => "DRAM",
        }
    }

    pub fn from_name(s: &str) -> Option<Level> {
        [Level::L1, Level::L2, Level::Dram].into_iter().find(|l| l.name() == s)
    }
}

impl fmt::Display for Level {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheLevelConfig {
    pub capacity: u64,
    pub associativity: usize,
    pub line: u64,
    pub hit_latency: u64,
    pub outstanding: usize,
}

impl CacheLevelConfig {
    pub fn l1_default() -> Self {
        CacheLevelConfig {
            capacity: 32 * 1024,
            associativity: 8,
            line: 64,
            hit_latency: 4,
            outstanding: 8,
        }
    }

    pub fn l2_default() -> Self {
        CacheLevelConfig {
            capacity: 512 * 1024,
            associativity: 8,
            line: 64,
            hit_latency: 8,
            outstanding: 12,
        }
    }

    pub fn sets(&self) -> usize {
        (self.capacity / (self.associativity as u64 * self.line)) as usize
    }

    pub fn validate(&self, name: &str) -> Result<(), String> {
        if self.associativity == 0 || self.line == 0 {
            return Err(format!("{name}: associativity and line size must be >= 1"));
        }
        if self.capacity == 0 || self.capacity % (self.associativity as u64 * self.line) != 0 {
            return Err(format!(
                "{name}: capacity {} not divisible by associativity x line ({} x {})",
                self.capacity, self.associativity, self.line
            ));
        }
        if self.hit_latency < 1 {
            return Err(format!("{name}: hit latency must be >= 1"));
        }
        if self.outstanding < 1 {
            return Err(format!("{name}: outstanding-miss limit must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DramConfig {
    /// Latency of an access that has to open a row.
    pub base_latency: u64,
    pub row_buffer: u64,
    pub row_hit_latency: u64,
    pub banks: usize,
    /// Upper bound of the uniform extra latency added to every access.
    pub jitter: u64,
    pub seed: u64,
}

impl Default for DramConfig {
    fn default() -> Self {
        DramConfig {
            base_latency: 100,
            row_buffer: 4096,
            row_hit_latency: 45,
            banks: 8,
            jitter: 16,
            seed: 0,
        }
    }
}

impl DramConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.row_hit_latency > self.base_latency {
            return Err("dram: row-hit latency exceeds base latency".into());
        }
        if self.banks == 0 || self.row_buffer == 0 {
            return Err("dram: banks and row-buffer size must be >= 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MemConfig {
    pub l1: CacheLevelConfig,
    pub l2: CacheLevelConfig,
    pub dram: DramConfig,
    /// Every access hits L1. Used for idealized examples.
    pub perfect_l1: bool,
    pub prefetcher: bool,
    pub prefetch_streams: usize,
    pub prefetch_degree: usize,
}

impl Default for MemConfig {
    fn default() -> Self {
        MemConfig {
            l1: CacheLevelConfig::l1_default(),
            l2: CacheLevelConfig::l2_default(),
            dram: DramConfig::default(),
            perfect_l1: false,
            prefetcher: true,
            prefetch_streams: 16,
            prefetch_degree: 1,
        }
    }
}

impl MemConfig {
    pub fn validate(&self) -> Result<(), String> {
        self.l1.validate("l1")?;
        self.l2.validate("l2")?;
        self.dram.validate()
    }

    /// Load-to-use latency of an L2 hit.
    pub fn l2_total(&self) -> u64 {
        self.l1.hit_latency + self.l2.hit_latency
    }

    /// Load-to-use latency of a DRAM access that opens a row.
    pub fn dram_total(&self) -> u64 {
        self.l2_total() + self.dram.base_latency
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AccessKind {
    Load,
    Store,
    Prefetch,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AccessResult {
    pub level: Level,
    pub latency: u64,
    pub completion: u64,
}

#[derive(Clone, Debug)]
pub struct MemoryHierarchy {
    cfg: MemConfig,
    l1: Cache,
    l2: Cache,
    dram: Dram,
    prefetcher: Option<StridePrefetcher>,
    last_cycle: u64,
    pub prefetches_issued: u64,
}

impl MemoryHierarchy {
    pub fn new(cfg: MemConfig) -> Self {
        let prefetcher = cfg
            .prefetcher
            .then(|| StridePrefetcher::new(cfg.prefetch_streams, cfg.prefetch_degree, cfg.l1.line));
        MemoryHierarchy {
            l1: Cache::new(cfg.l1.clone()),
            l2: Cache::new(cfg.l2.clone()),
            dram: Dram::new(cfg.dram.clone()),
            prefetcher,
            last_cycle: 0,
            prefetches_issued: 0,
            cfg,
        }
    }

    pub fn config(&self) -> &MemConfig {
        &self.cfg
    }

    /// Times one access issued at `cycle`. Prefetches return `None` when the
    /// line is already cached or no L1 miss slot is free.
    pub fn access(&mut self, addr: u64, cycle: u64, kind: AccessKind) -> Option<AccessResult> {
        debug_assert!(cycle >= self.last_cycle, "memory time went backwards");
        self.last_cycle = cycle;
        let l1_hit = self.cfg.l1.hit_latency;
        let hit = AccessResult {
            level: Level::L1,
            latency: l1_hit,
            completion: cycle + l1_hit,
        };
        if self.cfg.perfect_l1 {
            return (kind != AccessKind::Prefetch).then_some(hit);
        }
        let write = kind == AccessKind::Store;
        if kind == AccessKind::Prefetch {
            if self.l1.contains(addr) || self.l1.miss_slot_at(cycle) > cycle {
                return None;
            }
            self.prefetches_issued += 1;
        }
        if let Lookup::Hit { ready_at, source } = self.l1.lookup(addr, write) {
            let remaining = ready_at.saturating_sub(cycle);
            if remaining <= l1_hit {
                return Some(hit);
            }
            let latency = remaining.max(self.cfg.l2_total());
            return Some(AccessResult {
                level: source,
                latency,
                completion: cycle + latency,
            });
        }

        let start1 = self.l1.miss_slot_at(cycle);
        let at_l2 = start1 + l1_hit;
        let (level, done) = match self.l2.lookup(addr, false) {
            Lookup::Hit { ready_at, source } => {
                let hit_done = at_l2 + self.cfg.l2.hit_latency;
                if ready_at > hit_done {
                    (source, ready_at)
                } else {
                    (Level::L2, hit_done)
                }
            }
            Lookup::Miss => {
                let start2 = self.l2.miss_slot_at(at_l2);
                let done = start2 + self.cfg.l2.hit_latency + self.dram.access(addr);
                self.l2.reserve_miss(start2, done);
                self.l2.fill(addr, done, Level::Dram, false);
                (Level::Dram, done)
            }
        };
        self.l1.reserve_miss(start1, done);
        if let Some(victim) = self.l1.fill(addr, done, level, write) {
            self.l2.fill(victim, cycle, Level::L2, true);
        }
        Some(AccessResult {
            level,
            latency: done - cycle,
            completion: done,
        })
    }

    /// Whether a load to `addr` issued at `cycle` would hit L1 right now.
    pub fn would_hit_l1(&self, addr: u64) -> bool {
        self.cfg.perfect_l1 || self.l1.contains(addr)
    }

    /// Feeds a committed load to the stride prefetcher and installs any
    /// prefetches it emits.
    pub fn prefetcher_observe(&mut self, pc: u64, addr: u64, cycle: u64) -> Vec<u64> {
        let Some(p) = self.prefetcher.as_mut() else {
            return Vec::new();
        };
        let targets = p.observe(pc, addr);
        for &t in &targets {
            self.access(t, cycle, AccessKind::Prefetch);
        }
        targets
    }

    pub fn l1_outstanding(&self, cycle: u64) -> usize {
        self.l1.outstanding(cycle)
    }
}

/// Counts accesses per serving level. Empty input gives an empty map;
/// otherwise every level is present.
pub fn latency_histogram<'a>(results: impl IntoIterator<Item = &'a Level>) -> BTreeMap<Level, u64> {
    let mut map = BTreeMap::new();
    for &level in results {
        if map.is_empty() {
            for l in [Level::L1, Level::L2, Level::Dram] {
                map.insert(l, 0);
            }
        }
        *map.get_mut(&level).expect("seeded") += 1;
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet() -> MemConfig {
        MemConfig {
            prefetcher: false,
            dram: DramConfig {
                jitter: 0,
                ..DramConfig::default()
            },
            ..MemConfig::default()
        }
    }

    #[test]
    fn second_access_hits_l1_with_four_cycles() {
        let mut m = MemoryHierarchy::new(quiet());
        let first = m.access(0x1000, 0, AccessKind::Load).unwrap();
        let again = m.access(0x1008, first.completion, AccessKind::Load).unwrap();
        assert_eq!(again.level, Level::L1);
        assert_eq!(again.latency, 4);
    }

    #[test]
    fn cold_access_sums_level_latencies() {
        // Hand oracle: L1 lookup, L2 lookup, row-opening DRAM access.
        let cfg = quiet();
        let expect = cfg.l1.hit_latency + cfg.l2.hit_latency + cfg.dram.base_latency;
        assert_eq!(expect, 4 + 8 + 100);
        let mut m = MemoryHierarchy::new(cfg);
        let r = m.access(0xdead_0000, 10, AccessKind::Load).unwrap();
        assert_eq!(r.level, Level::Dram);
        assert_eq!(r.latency, expect);
        assert_eq!(r.completion, 10 + expect);
    }

    #[test]
    fn open_row_is_cheaper() {
        let cfg = quiet();
        let mut m = MemoryHierarchy::new(cfg.clone());
        m.access(0x10_0000, 0, AccessKind::Load).unwrap();
        let r = m.access(0x10_0040, 1, AccessKind::Load).unwrap();
        assert_eq!(r.level, Level::Dram);
        assert_eq!(r.latency, 4 + 8 + cfg.dram.row_hit_latency);
    }

    #[test]
    fn l2_hit_after_l1_eviction() {
        let cfg = quiet();
        let mut m = MemoryHierarchy::new(cfg);
        // Nine lines in L1 set 0 (stride = sets x line) evict the first.
        let stride = 64 * 64;
        let mut t = 0;
        for k in 0..9u64 {
            t = m.access(k * stride, t, AccessKind::Load).unwrap().completion;
        }
        let r = m.access(0, t, AccessKind::Load).unwrap();
        assert_eq!(r.level, Level::L2);
        assert_eq!(r.latency, 12);
    }

    #[test]
    fn single_miss_slot_serializes_misses() {
        let mut cfg = quiet();
        cfg.l1.outstanding = 1;
        let mut m = MemoryHierarchy::new(cfg);
        let a = m.access(0x100_0000, 5, AccessKind::Load).unwrap();
        let b = m.access(0x200_0000, 5, AccessKind::Load).unwrap();
        assert!(b.completion >= a.completion);
        assert!(b.completion >= a.completion + 12);
    }

    #[test]
    fn merged_access_waits_for_fill() {
        let mut m = MemoryHierarchy::new(quiet());
        let a = m.access(0x300_0000, 0, AccessKind::Load).unwrap();
        let b = m.access(0x300_0008, 2, AccessKind::Load).unwrap();
        assert_eq!(b.level, Level::Dram);
        assert_eq!(b.completion, a.completion);
    }

    #[test]
    fn perfect_l1_always_hits() {
        let mut m = MemoryHierarchy::new(MemConfig {
            perfect_l1: true,
            ..quiet()
        });
        for k in 0..100u64 {
            let r = m.access(k * 0x10_0000, k, AccessKind::Store).unwrap();
            assert_eq!((r.level, r.latency), (Level::L1, 4));
        }
    }

    #[test]
    fn histogram_shapes() {
        assert!(latency_histogram(&[]).is_empty());
        let h = latency_histogram(&[Level::L1, Level::L1]);
        assert_eq!(h[&Level::L1], 2);
        assert_eq!(h[&Level::L2], 0);
        assert_eq!(h[&Level::Dram], 0);
    }

    #[test]
    fn stream_larger_than_l2_reaches_dram() {
        // Capacity oracle: 2 MiB touched once cannot fit a 512 KiB L2.
        let mut m = MemoryHierarchy::new(quiet());
        let mut levels = Vec::new();
        for k in 0..(2 * 1024 * 1024 / 64) as u64 {
            levels.push(m.access(k * 64, k, AccessKind::Load).unwrap().level);
        }
        assert!(latency_histogram(&levels)[&Level::Dram] > 0);
    }

    #[test]
    fn prefetch_installs_line() {
        let mut cfg = quiet();
        cfg.prefetcher = true;
        let mut m = MemoryHierarchy::new(cfg);
        let mut t = 0;
        for a in [0x1000u64, 0x1040, 0x1080] {
            t = m.access(a, t, AccessKind::Load).unwrap().completion;
            m.prefetcher_observe(0x44, a, t);
        }
        assert_eq!(m.prefetches_issued, 1);
        assert!(m.would_hit_l1(0x10C0));
    }

    #[test]
    fn config_validation() {
        let mut c = CacheLevelConfig::l1_default();
        c.capacity = 1000;
        assert!(c.validate("l1").is_err());
        let d = DramConfig {
            row_hit_latency: 200,
            ..DramConfig::default()
        };
        assert!(d.validate().is_err());
    }
}
