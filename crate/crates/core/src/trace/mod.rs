//! Micro-op trace model.
//!
//! A [`Trace`] is a flat, program-ordered list of [`MicroOp`]s. Each op names
//! its architectural source and destination registers and, for memory ops,
//! the byte address it touches. Traces are stored on disk as JSON lines (see
//! [`format`]) and can be synthesized with [`kernels::gen_kernel`].

mod format;
pub mod kernels;

use std::fmt;

use thiserror::Error;

pub use format::{parse_trace, write_trace};
pub use kernels::{gen_kernel, Kernel};

/// Default number of architectural registers.
pub const ARCH_REGS: usize = 64;

/// Maximum number of source operands per micro-op.
pub const MAX_SRCS: usize = 3;

/// An architectural register id.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Reg(pub u8);

impl Reg {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OpKind {
    IntAlu,
    IntMul,
    Fp,
    Load,
    Store,
    Branch,
    Nop,
}

impl OpKind {
    pub const ALL: [OpKind; 7] = [
        OpKind::IntAlu,
        OpKind::IntMul,
        OpKind::Fp,
        OpKind::Load,
        OpKind::Store,
        OpKind::Branch,
        OpKind::Nop,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OpKind::IntAlu => "int-alu",
            OpKind::IntMul => "int-mul",
            OpKind::Fp => "fp",
            OpKind::Load => "load",
            OpKind::Store => "store",
            OpKind::Branch => "branch",
            OpKind::Nop => "nop",
        }
    }

    pub fn from_name(s: &str) -> Option<OpKind> {
        OpKind::ALL.into_iter().find(|k| k.name() == s)
    }

    pub fn is_mem(self) -> bool {
        matches!(self, OpKind::Load | OpKind::Store)
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One trace record.
///
/// `token` is an optional completion-token register a store may write. It
/// carries no data; it only lets a younger op wait for the store to finish.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MicroOp {
    pub seq: usize,
    pub pc: u64,
    pub kind: OpKind,
    pub srcs: Vec<Reg>,
    pub dst: Option<Reg>,
    pub token: Option<Reg>,
    pub addr: Option<u64>,
    pub size: Option<u8>,
    pub mispred: Option<bool>,
}

impl MicroOp {
    pub fn new(pc: u64, kind: OpKind) -> Self {
        MicroOp {
            seq: 0,
            pc,
            kind,
            srcs: Vec::new(),
            dst: None,
            token: None,
            addr: None,
            size: None,
            mispred: None,
        }
    }

    pub fn srcs(mut self, srcs: &[u8]) -> Self {
        self.srcs = srcs.iter().map(|&r| Reg(r)).collect();
        self
    }

    pub fn dst(mut self, r: u8) -> Self {
        self.dst = Some(Reg(r));
        self
    }

    pub fn token(mut self, r: u8) -> Self {
        self.token = Some(Reg(r));
        self
    }

    pub fn mem(mut self, addr: u64, size: u8) -> Self {
        self.addr = Some(addr);
        self.size = Some(size);
        self
    }

    pub fn mispredicted(mut self, m: bool) -> Self {
        self.mispred = Some(m);
        self
    }

    /// The register this op makes ready on completion: its data destination,
    /// or a store's completion token.
    pub fn writes(&self) -> Option<Reg> {
        self.dst.or(self.token)
    }

    pub fn is_mispredicted_branch(&self) -> bool {
        self.kind == OpKind::Branch && self.mispred == Some(true)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TraceMeta {
    pub name: String,
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Trace {
    pub meta: TraceMeta,
    pub ops: Vec<MicroOp>,
}

impl Trace {
    pub fn new(name: impl Into<String>, seed: Option<u64>) -> Self {
        Trace {
            meta: TraceMeta {
                name: name.into(),
                seed,
            },
            ops: Vec::new(),
        }
    }

    /// Appends an op, assigning its sequence number.
    pub fn push(&mut self, mut op: MicroOp) {
        op.seq = self.ops.len();
        self.ops.push(op);
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }
}

/// A broken trace invariant, located by op sequence number.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub seq: usize,
    pub rule: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "op {}: {}", self.seq, self.rule)
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: field `{field}`: {msg}")]
    Malformed {
        line: usize,
        field: String,
        msg: String,
    },
    #[error("line {line}: {violation}")]
    Invalid { line: usize, violation: Violation },
    #[error("unknown kernel `{0}`")]
    UnknownKernel(String),
    #[error("kernel needs at least one iteration")]
    NoIterations,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Checks every op against the trace invariants. An empty result means the
/// trace is valid for a machine with `arch_regs` architectural registers.
pub fn validate_trace(trace: &Trace, arch_regs: usize) -> Vec<Violation> {
    let mut out = Vec::new();
    for (i, op) in trace.ops.iter().enumerate() {
        let mut bad = |rule: &str| {
            out.push(Violation {
                seq: op.seq,
                rule: rule.to_string(),
            })
        };
        if op.seq != i {
            bad("sequence number out of order");
        }
        match (op.kind.is_mem(), op.addr.is_some()) {
            (true, false) => bad(&format!("{} without address", op.kind)),
            (false, true) => bad(&format!("{} has address", op.kind)),
            _ => {}
        }
        if op.dst.is_some() && matches!(op.kind, OpKind::Store | OpKind::Branch | OpKind::Nop) {
            bad(&format!("{} has destination", op.kind));
        }
        if op.token.is_some() && op.kind != OpKind::Store {
            bad(&format!("{} has completion token", op.kind));
        }
        if op.srcs.len() > MAX_SRCS {
            bad("more than 3 sources");
        }
        let regs = op.srcs.iter().chain(op.dst.iter()).chain(op.token.iter());
        for r in regs {
            if r.index() >= arch_regs {
                bad(&format!("register {} out of range", r.0));
            }
        }
        if let Some(size) = op.size {
            if !op.kind.is_mem() {
                bad(&format!("{} has access size", op.kind));
            } else if !(1..=64).contains(&size) || !size.is_power_of_two() {
                bad(&format!("access size {size} is not a power of two in 1..=64"));
            }
        }
        if op.mispred.is_some() && op.kind != OpKind::Branch {
            bad(&format!("{} has mispredict flag", op.kind));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(op: MicroOp) -> Trace {
        let mut t = Trace::default();
        t.push(op);
        t
    }

    #[test]
    fn valid_table1_has_no_violations() {
        let t = gen_kernel("table1", 3, 0).unwrap();
        assert!(validate_trace(&t, ARCH_REGS).is_empty());
    }

    #[test]
    fn out_of_range_source() {
        let t = one(MicroOp::new(0, OpKind::IntAlu).srcs(&[64]).dst(1));
        let v = validate_trace(&t, 64);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].seq, 0);
        assert!(v[0].rule.contains("out of range"));
    }

    #[test]
    fn load_without_address() {
        let t = one(MicroOp::new(0, OpKind::Load).dst(1));
        let v = validate_trace(&t, 64);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].rule, "load without address");
    }

    #[test]
    fn destination_rules() {
        let t = one(MicroOp::new(0, OpKind::Store).dst(1).mem(0x40, 8));
        assert_eq!(validate_trace(&t, 64)[0].rule, "store has destination");
        let t = one(MicroOp::new(0, OpKind::Branch).dst(1));
        assert_eq!(validate_trace(&t, 64)[0].rule, "branch has destination");
        let t = one(MicroOp::new(0, OpKind::IntAlu).token(1));
        assert_eq!(validate_trace(&t, 64)[0].rule, "int-alu has completion token");
    }

    #[test]
    fn size_and_mispredict_rules() {
        let t = one(MicroOp::new(0, OpKind::Load).dst(1).mem(0, 3));
        assert_eq!(validate_trace(&t, 64).len(), 1);
        let t = one(MicroOp::new(0, OpKind::IntAlu).mispredicted(true));
        assert_eq!(validate_trace(&t, 64).len(), 1);
    }

    #[test]
    fn writes_prefers_dst_then_token() {
        let st = MicroOp::new(0, OpKind::Store).token(17).mem(0, 4);
        assert_eq!(st.writes(), Some(Reg(17)));
        assert_eq!(MicroOp::new(0, OpKind::Branch).writes(), None);
    }
}
