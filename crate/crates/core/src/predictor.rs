//! Delay learning and issue-time prediction.
//!
//! An op's delay is the gap between its issue and its completion. Loads that
//! miss L1 record their last delay in a small direct-mapped DelayCache; a
//! consumer's issue time is predicted as the latest point at which any of
//! its in-flight producers will have delivered its value.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::trace::OpKind;

pub const DELAYCACHE_ENTRIES: usize = 512;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PredictorError {
    #[error("completion cycle {completion} precedes issue cycle {issue}")]
    CompletionBeforeIssue { issue: u64, completion: u64 },
    #[error("unknown policy `{0}` (expected learned, static-l1, hitmiss-l2, hitmiss-dram or dependence-only)")]
    UnknownPolicy(String),
}

pub fn compute_delay(issue: u64, completion: u64) -> Result<u64, PredictorError> {
    completion
        .checked_sub(issue)
        .ok_or(PredictorError::CompletionBeforeIssue { issue, completion })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DelayCacheEntry {
    pub tag: u64,
    pub delay: u64,
    pub candidate: u64,
    pub confirms: u32,
}

#[derive(Clone, Debug)]
pub struct DelayCache {
    entries: Vec<Option<DelayCacheEntry>>,
    pub lookups: u64,
    pub hits: u64,
}

impl DelayCache {
    pub fn new(entries: usize) -> Self {
        assert!(entries >= 1, "DelayCache needs at least one entry");
        DelayCache {
            entries: vec![None; entries],
            lookups: 0,
            hits: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.entries.len()
    }

    fn index(&self, pc: u64) -> usize {
        (pc % self.entries.len() as u64) as usize
    }

    pub fn entry(&self, pc: u64) -> Option<&DelayCacheEntry> {
        self.entries[self.index(pc)].as_ref().filter(|e| e.tag == pc)
    }

    /// Reads the stored delay without touching the hit counters.
    pub fn probe(&self, pc: u64) -> Option<u64> {
        self.entry(pc).map(|e| e.delay)
    }

    /// Counted lookup, as done for a producer at prediction time.
    pub fn lookup(&mut self, pc: u64) -> Option<u64> {
        self.lookups += 1;
        let found = self.probe(pc);
        if found.is_some() {
            self.hits += 1;
        }
        found
    }

    /// Stores an observed delay. With `threshold > 0` a resident entry only
    /// changes after `threshold` consecutive identical new observations;
    /// empty slots and conflicting tags are overwritten at once.
    pub fn store(&mut self, pc: u64, delay: u64, threshold: u32) {
        let idx = self.index(pc);
        let slot = &mut self.entries[idx];
        match slot {
            Some(e) if e.tag == pc && threshold > 0 => {
                if delay == e.delay {
                    e.confirms = 0;
                } else if delay == e.candidate && e.confirms > 0 {
                    e.confirms += 1;
                } else {
                    e.candidate = delay;
                    e.confirms = 1;
                }
                if e.confirms >= threshold {
                    e.delay = delay;
                    e.confirms = 0;
                }
            }
            _ => {
                *slot = Some(DelayCacheEntry {
                    tag: pc,
                    delay,
                    candidate: delay,
                    confirms: 0,
                })
            }
        }
    }

    pub fn hit_rate(&self) -> Option<f64> {
        (self.lookups > 0).then(|| self.hits as f64 / self.lookups as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Learned,
    StaticL1,
    HitMissL2,
    HitMissDram,
    DependenceOnly,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Learned,
        PolicyKind::StaticL1,
        PolicyKind::HitMissL2,
        PolicyKind::HitMissDram,
        PolicyKind::DependenceOnly,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Learned => "learned",
            PolicyKind::StaticL1 => "static-l1",
            PolicyKind::HitMissL2 => "hitmiss-l2",
            PolicyKind::HitMissDram => "hitmiss-dram",
            PolicyKind::DependenceOnly => "dependence-only",
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = PredictorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| PredictorError::UnknownPolicy(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DelayPolicy {
    pub kind: PolicyKind,
    /// Train on every `training_interval`-th execution of a pc.
    pub training_interval: u64,
    /// Consecutive identical delays needed to replace a stored one; 0 = off.
    pub saturating_threshold: u32,
    pub use_dispatch_time: bool,
}

impl Default for DelayPolicy {
    fn default() -> Self {
        DelayPolicy {
            kind: PolicyKind::Learned,
            training_interval: 1,
            saturating_threshold: 0,
            use_dispatch_time: false,
        }
    }
}

impl DelayPolicy {
    pub fn with_kind(kind: PolicyKind) -> Self {
        DelayPolicy {
            kind,
            ..DelayPolicy::default()
        }
    }
}

/// Fixed delays per op kind, plus the L2 and DRAM totals the hit/miss
/// policies assume.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StaticDelayTable {
    pub int_alu: u64,
    pub int_mul: u64,
    pub fp: u64,
    pub branch: u64,
    pub nop: u64,
    /// L1 hit latency, used for loads and stores.
    pub mem: u64,
    pub l2_total: u64,
    pub dram_total: u64,
}

impl Default for StaticDelayTable {
    fn default() -> Self {
        StaticDelayTable {
            int_alu: 1,
            int_mul: 3,
            fp: 3,
            branch: 1,
            nop: 1,
            mem: 4,
            l2_total: 12,
            dram_total: 112,
        }
    }
}

impl StaticDelayTable {
    pub fn delay(&self, kind: OpKind) -> u64 {
        match kind {
            OpKind::IntAlu => self.int_alu,
            OpKind::IntMul => self.int_mul,
            OpKind::Fp => self.fp,
            OpKind::Branch => self.branch,
            OpKind::Nop => self.nop,
            OpKind::Load | OpKind::Store => self.mem,
        }
    }
}

/// Delay assumed for a load/store producer at `pc`. `predicted_l1_hit` is the
/// hit oracle's answer and only matters for the hit/miss policies.
pub fn delay_lookup(
    cache: &mut DelayCache,
    pc: u64,
    policy: &DelayPolicy,
    statics: &StaticDelayTable,
    predicted_l1_hit: bool,
) -> u64 {
    let l1 = statics.mem;
    match policy.kind {
        PolicyKind::Learned => cache.lookup(pc).unwrap_or(l1),
        PolicyKind::StaticL1 => l1,
        PolicyKind::HitMissL2 if predicted_l1_hit => l1,
        PolicyKind::HitMissL2 => statics.l2_total,
        PolicyKind::HitMissDram if predicted_l1_hit => l1,
        PolicyKind::HitMissDram => statics.dram_total,
        PolicyKind::DependenceOnly => 0,
    }
}

/// Trains the cache on a completed load. `iteration` is the 1-based dynamic
/// execution count of `pc`. Returns whether the cache was written.
pub fn delay_train(
    cache: &mut DelayCache,
    pc: u64,
    issue: u64,
    completion: u64,
    missed_l1: bool,
    iteration: u64,
    policy: &DelayPolicy,
) -> Result<bool, PredictorError> {
    let delay = compute_delay(issue, completion)?;
    if !missed_l1 || iteration % policy.training_interval.max(1) != 0 {
        return Ok(false);
    }
    cache.store(pc, delay, policy.saturating_threshold);
    Ok(true)
}

/// One producer as seen by the predictor: when it is expected to start
/// (predicted issue, or dispatch under the dispatch-time variant) and how
/// long after that its value is ready.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ProducerTiming {
    pub start: u64,
    pub delay: u64,
    pub completed: bool,
}

pub fn predict_issue(dispatch: u64, producers: &[ProducerTiming]) -> u64 {
    producers
        .iter()
        .filter(|p| !p.completed)
        .map(|p| p.start + p.delay)
        .fold(dispatch + 1, u64::max)
}

/// Fraction of L1-missing load executions whose delay equals the previous
/// missing execution's delay at the same pc. Input is `(pc, delay)` in
/// program order; `None` when no pc misses twice.
pub fn repeat_accuracy(missing_loads: impl IntoIterator<Item = (u64, u64)>) -> Option<f64> {
    let mut last: HashMap<u64, u64> = HashMap::new();
    let (mut same, mut total) = (0u64, 0u64);
    for (pc, delay) in missing_loads {
        if let Some(prev) = last.insert(pc, delay) {
            total += 1;
            if prev == delay {
                same += 1;
            }
        }
    }
    (total > 0).then(|| same as f64 / total as f64)
}
