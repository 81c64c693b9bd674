use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet};

use crate::backend::{ReorderBuffer, StoreQueue, UnitKind};
use crate::memhier::{AccessKind, Level, MemoryHierarchy};
use crate::predictor::{delay_train, DelayCache, StaticDelayTable};
use crate::rename::{DependencyTable, MemProducerTable, RenameState, RenamedOp};
use crate::stats::{EventLog, OpRecord};
use crate::trace::{MicroOp, OpKind, Trace, ARCH_REGS};

use super::{CoreConfig, SimError};

/// Cycles without a dispatch or commit before a run is declared stuck.
const STALL_LIMIT: u64 = 200_000;

#[derive(Clone, Debug)]
pub(crate) struct OpState {
    pub renamed: RenamedOp,
    pub dispatch: u64,
    pub issue: Option<u64>,
    pub complete: Option<u64>,
    pub commit: Option<u64>,
    pub predicted: Option<u64>,
    pub priority: Option<u64>,
    pub queue: Option<usize>,
    pub level: Option<Level>,
    /// 1-based dynamic execution count of this op's pc.
    pub instance: u64,
    pub debut: bool,
}

/// State every core shares: front end, rename, ROB, store ordering, memory,
/// and the DelayCache (trained on every core so debut/repeated accounting is
/// comparable; only the proposed core reads it for prediction).
pub(crate) struct Machine<'a> {
    pub cfg: &'a CoreConfig,
    pub ops: &'a [MicroOp],
    pub state: Vec<OpState>,
    pub rename: RenameState,
    pub dt: DependencyTable,
    pub mpt: MemProducerTable,
    pub rob: ReorderBuffer,
    pub sq: StoreQueue,
    pub mem: MemoryHierarchy,
    pub dc: DelayCache,
    pub statics: StaticDelayTable,
    completions: BinaryHeap<Reverse<(u64, usize)>>,
    instances: HashMap<u64, u64>,
    missed_pcs: HashSet<u64>,
    fetch_blocker: Option<usize>,
    fetch_resume: u64,
    last_progress: u64,
}

impl<'a> Machine<'a> {
    pub fn new(trace: &'a Trace, cfg: &'a CoreConfig) -> Result<Self, SimError> {
        cfg.validate()?;
        let layout = cfg.units;
        for op in &trace.ops {
            let unit = UnitKind::for_op(op.kind);
            if layout.count(unit) == 0 {
                return Err(SimError::NoUnit {
                    seq: op.seq,
                    unit: unit.name(),
                });
            }
        }
        let line = cfg.mem.l1.line;
        Ok(Machine {
            cfg,
            ops: &trace.ops,
            state: Vec::with_capacity(trace.ops.len()),
            rename: RenameState::new(ARCH_REGS, cfg.phys_regs),
            dt: DependencyTable::new(cfg.phys_regs),
            mpt: MemProducerTable::new(line),
            rob: ReorderBuffer::new(cfg.rob_size),
            sq: StoreQueue::new(line),
            mem: MemoryHierarchy::new(cfg.mem.clone()),
            dc: DelayCache::new(cfg.delaycache_entries),
            statics: cfg.statics(),
            completions: BinaryHeap::new(),
            instances: HashMap::new(),
            missed_pcs: HashSet::new(),
            fetch_blocker: None,
            fetch_resume: 0,
            last_progress: 0,
        })
    }

    pub fn done(&self) -> bool {
        self.state.len() == self.ops.len() && self.rob.is_empty()
    }

    /// The next op in program order if the front end, ROB and register file
    /// can take it this cycle.
    pub fn next_to_dispatch(&self, cycle: u64) -> Option<&'a MicroOp> {
        let op = self.ops.get(self.state.len())?;
        let blocked = self.fetch_blocker.is_some()
            || cycle < self.fetch_resume
            || self.rob.is_full()
            || (op.writes().is_some() && !self.rename.can_allocate());
        (!blocked).then_some(op)
    }

    /// Renames and enters the next op into the ROB. Caller has checked
    /// [`Machine::next_to_dispatch`].
    pub fn dispatch(&mut self, cycle: u64) -> usize {
        let seq = self.state.len();
        let op = &self.ops[seq];
        let renamed = self.rename.rename(op).expect("free register checked");
        let instance = {
            let n = self.instances.entry(op.pc).or_insert(0);
            *n += 1;
            *n
        };
        let debut = instance == 1
            || (op.kind == OpKind::Load && self.missed_pcs.contains(&op.pc) && self.dc.probe(op.pc).is_none());
        self.rob.push(seq);
        if op.kind == OpKind::Store {
            self.sq.add_store(seq, op.addr.expect("validated store"));
        }
        if op.is_mispredicted_branch() {
            self.fetch_blocker = Some(seq);
        }
        self.state.push(OpState {
            renamed,
            dispatch: cycle,
            issue: None,
            complete: None,
            commit: None,
            predicted: None,
            priority: None,
            queue: None,
            level: None,
            instance,
            debut,
        });
        self.last_progress = cycle;
        seq
    }

    /// Register operands and memory ordering allow `seq` to issue at `cycle`.
    pub fn operands_ready(&self, seq: usize, cycle: u64) -> bool {
        let st = &self.state[seq];
        if st.dispatch >= cycle {
            return false;
        }
        if !st.renamed.srcs.iter().all(|&r| self.rename.is_ready(r, cycle)) {
            return false;
        }
        let op = &self.ops[seq];
        op.kind != OpKind::Load || self.sq.memory_order_ok(seq, op.addr.expect("validated load"), cycle)
    }

    pub fn issue(&mut self, seq: usize, cycle: u64) {
        let op = &self.ops[seq];
        let (latency, level) = match op.kind {
            OpKind::Load | OpKind::Store => {
                let kind = if op.kind == OpKind::Load {
                    AccessKind::Load
                } else {
                    AccessKind::Store
                };
                let r = self
                    .mem
                    .access(op.addr.expect("validated"), cycle, kind)
                    .expect("demand accesses always complete");
                (r.latency, Some(r.level))
            }
            kind => (self.statics.delay(kind), None),
        };
        let complete = cycle + latency;
        let st = &mut self.state[seq];
        st.issue = Some(cycle);
        st.complete = Some(complete);
        st.level = level;
        if let Some(dst) = st.renamed.dst {
            self.rename.set_ready(dst, complete);
        }
        if op.kind == OpKind::Store {
            self.sq.store_issued(seq, complete);
        }
        if self.fetch_blocker == Some(seq) {
            self.fetch_blocker = None;
            self.fetch_resume = cycle + self.cfg.branch_penalty();
        }
        self.completions.push(Reverse((complete, seq)));
    }

    /// Retires completion events due by `cycle`, training the DelayCache.
    pub fn complete(&mut self, cycle: u64) -> Result<(), SimError> {
        while let Some(&Reverse((at, seq))) = self.completions.peek() {
            if at > cycle {
                break;
            }
            self.completions.pop();
            let op = &self.ops[seq];
            if op.kind != OpKind::Load {
                continue;
            }
            let st = &self.state[seq];
            let missed = st.level != Some(Level::L1);
            if missed {
                self.missed_pcs.insert(op.pc);
            }
            let policy = &self.cfg.policy;
            let start = if policy.use_dispatch_time {
                st.dispatch
            } else {
                st.issue.expect("completed ops issued")
            };
            delay_train(&mut self.dc, op.pc, start, at, missed, st.instance, policy)?;
        }
        Ok(())
    }

    pub fn commit(&mut self, cycle: u64) -> Result<(), SimError> {
        let state = &self.state;
        let done = self
            .rob
            .commit_cycle(cycle, self.cfg.issue_width, |s| state[s].complete);
        for seq in done {
            let op = &self.ops[seq];
            let st = &mut self.state[seq];
            st.commit = Some(cycle);
            if let Some(prev) = st.renamed.prev {
                self.rename.release(prev);
            }
            match op.kind {
                OpKind::Store => {
                    self.mpt.commit_store(op.addr.expect("validated"), seq);
                    self.sq.commit_store(seq);
                }
                OpKind::Load => {
                    let addr = op.addr.expect("validated");
                    self.sq
                        .check_load_commit(seq, addr, st.issue.expect("committed ops issued"))?;
                    self.mem.prefetcher_observe(op.pc, addr, cycle);
                }
                _ => {}
            }
            self.last_progress = cycle;
        }
        Ok(())
    }

    pub fn check_progress(&self, cycle: u64) -> Result<(), SimError> {
        if cycle - self.last_progress > STALL_LIMIT {
            let oldest = self.rob.oldest();
            return Err(SimError::Deadlock { cycle, oldest });
        }
        Ok(())
    }

    pub fn into_log(self, core: &str, trace: &str, head_stalls: Vec<u64>, stall_cycles: u64) -> EventLog {
        let records = self
            .state
            .into_iter()
            .enumerate()
            .map(|(seq, st)| {
                let op = &self.ops[seq];
                OpRecord {
                    seq,
                    pc: op.pc,
                    kind: op.kind,
                    dispatch: st.dispatch,
                    issue: st.issue.expect("run finished"),
                    complete: st.complete.expect("run finished"),
                    commit: st.commit.expect("run finished"),
                    queue: st.queue,
                    priority: st.priority,
                    predicted: st.predicted,
                    level: st.level,
                    debut: st.debut,
                }
            })
            .collect();
        EventLog {
            core: core.to_string(),
            trace: trace.to_string(),
            records,
            head_stalls,
            stall_cycles,
            dc_lookups: self.dc.lookups,
            dc_hits: self.dc.hits,
        }
    }
}

/// Per-cycle issue slots left for each unit kind.
#[derive(Clone, Copy, Debug)]
pub(crate) struct UnitBudget {
    left: [usize; 4],
}

impl UnitBudget {
    pub fn new(cfg: &CoreConfig) -> Self {
        let u = cfg.units;
        UnitBudget {
            left: [u.int, u.fp, u.branch, u.ls],
        }
    }

    fn slot(kind: UnitKind) -> usize {
        match kind {
            UnitKind::Int => 0,
            UnitKind::Fp => 1,
            UnitKind::Branch => 2,
            UnitKind::Ls => 3,
        }
    }

    pub fn available(&self, kind: UnitKind) -> bool {
        self.left[Self::slot(kind)] > 0
    }

    pub fn take(&mut self, kind: UnitKind) {
        self.left[Self::slot(kind)] -= 1;
    }
}
