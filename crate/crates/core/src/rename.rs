//! Register renaming, the Dependency Table and the store→load producer table.
//!
//! Renaming maps each architectural destination to a fresh physical register,
//! so only true (read-after-write) dependencies survive. The Dependency Table
//! remembers, per physical register, which instruction last wrote it and when
//! that writer was predicted to issue; the predictor walks it to find an op's
//! producers.

use std::collections::{HashMap, VecDeque};

use crate::trace::{MicroOp, OpKind};

/// Default physical register count (one Dependency Table entry each).
pub const PHYS_REGS: usize = 256;

/// Ready-cycle marker for a register whose writer has not issued yet.
pub const NOT_READY: u64 = u64::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PhysReg(pub u16);

impl PhysReg {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenamedOp {
    pub seq: usize,
    pub srcs: Vec<PhysReg>,
    pub dst: Option<PhysReg>,
    /// The mapping `dst` replaced; freed when this op commits.
    pub prev: Option<PhysReg>,
}

/// The free list ran dry; dispatch retries next cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RenameStall;

#[derive(Clone, Debug)]
pub struct RenameState {
    map: Vec<PhysReg>,
    free: VecDeque<PhysReg>,
    ready_at: Vec<u64>,
}

impl RenameState {
    /// Architectural register `i` starts mapped to physical register `i`,
    /// holding an architected (always ready) value.
    pub fn new(arch_regs: usize, phys_regs: usize) -> Self {
        assert!(phys_regs > arch_regs, "need more physical than architectural registers");
        RenameState {
            map: (0..arch_regs).map(|i| PhysReg(i as u16)).collect(),
            free: (arch_regs..phys_regs).map(|i| PhysReg(i as u16)).collect(),
            ready_at: vec![0; phys_regs],
        }
    }

    /// Current physical names of the op's sources, without renaming.
    pub fn sources(&self, op: &MicroOp) -> Vec<PhysReg> {
        op.srcs.iter().map(|r| self.map[r.index()]).collect()
    }

    pub fn rename(&mut self, op: &MicroOp) -> Result<RenamedOp, RenameStall> {
        let srcs = self.sources(op);
        let (dst, prev) = match op.writes() {
            Some(r) => {
                let fresh = self.free.pop_front().ok_or(RenameStall)?;
                self.ready_at[fresh.index()] = NOT_READY;
                let prev = std::mem::replace(&mut self.map[r.index()], fresh);
                (Some(fresh), Some(prev))
            }
            None => (None, None),
        };
        Ok(RenamedOp {
            seq: op.seq,
            srcs,
            dst,
            prev,
        })
    }

    pub fn can_allocate(&self) -> bool {
        !self.free.is_empty()
    }

    pub fn free_count(&self) -> usize {
        self.free.len()
    }

    pub fn release(&mut self, reg: PhysReg) {
        debug_assert!(!self.free.contains(&reg), "double free of {reg:?}");
        self.free.push_back(reg);
    }

    pub fn set_ready(&mut self, reg: PhysReg, cycle: u64) {
        self.ready_at[reg.index()] = cycle;
    }

    pub fn ready_at(&self, reg: PhysReg) -> u64 {
        self.ready_at[reg.index()]
    }

    pub fn is_ready(&self, reg: PhysReg, cycle: u64) -> bool {
        self.ready_at[reg.index()] <= cycle
    }

    pub fn mapping(&self, arch: usize) -> PhysReg {
        self.map[arch]
    }

    /// Physical registers currently named by the architectural map.
    pub fn live(&self) -> Vec<PhysReg> {
        self.map.clone()
    }

    pub fn free_list(&self) -> Vec<PhysReg> {
        self.free.iter().copied().collect()
    }
}

/// What the predictor needs to know about a writer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Writer {
    pub seq: usize,
    pub pc: u64,
    pub kind: OpKind,
    pub predicted_issue: u64,
    pub dispatch: u64,
}

/// A producer of an op, as found through the Dependency Table or the memory
/// producer table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Producer {
    pub writer: Writer,
    pub completed: bool,
}

/// Per-physical-register record of the last writer.
#[derive(Clone, Debug)]
pub struct DependencyTable {
    entries: Vec<Option<Writer>>,
}

impl DependencyTable {
    pub fn new(phys_regs: usize) -> Self {
        DependencyTable {
            entries: vec![None; phys_regs],
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn record(&mut self, dst: PhysReg, writer: Writer) {
        self.entries[dst.index()] = Some(writer);
    }

    pub fn writer(&self, reg: PhysReg) -> Option<Writer> {
        self.entries[reg.index()]
    }

    /// One record per distinct writer of the given source registers.
    /// Architected initial values have no writer and are skipped.
    pub fn producers(&self, srcs: &[PhysReg], regs: &RenameState, now: u64) -> Vec<Producer> {
        let mut out: Vec<Producer> = Vec::with_capacity(srcs.len());
        for &src in srcs {
            let Some(writer) = self.entries[src.index()] else {
                continue;
            };
            if out.iter().any(|p| p.writer.seq == writer.seq) {
                continue;
            }
            out.push(Producer {
                writer,
                completed: regs.is_ready(src, now),
            });
        }
        out
    }
}

/// Last dispatched, uncommitted store per cache line.
#[derive(Clone, Debug, Default)]
pub struct MemProducerTable {
    line: u64,
    stores: HashMap<u64, Writer>,
}

impl MemProducerTable {
    pub fn new(line: u64) -> Self {
        MemProducerTable {
            line,
            stores: HashMap::new(),
        }
    }

    pub fn record_store(&mut self, addr: u64, writer: Writer) {
        self.stores.insert(addr / self.line, writer);
    }

    pub fn producer(&self, addr: u64) -> Option<Writer> {
        self.stores.get(&(addr / self.line)).copied()
    }

    /// Drops the entry if it still belongs to the committing store.
    pub fn commit_store(&mut self, addr: u64, seq: usize) {
        let line = addr / self.line;
        if self.stores.get(&line).is_some_and(|w| w.seq == seq) {
            self.stores.remove(&line);
        }
    }
}
