//! Scheduling structures shared by the cores: per-unit priority queues,
//! dependence-aware steering, the reorder buffer and store ordering.

mod pq;
mod rob;

use std::fmt;
use std::str::FromStr;

pub use pq::{PqEntry, PqFull, PqKey, SystolicPQ};
pub use rob::{MemoryOrderViolation, ReorderBuffer, StoreQueue};

use crate::trace::OpKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnitKind {
    Int,
    Fp,
    Branch,
    Ls,
}

impl UnitKind {
    pub fn for_op(kind: OpKind) -> UnitKind {
        match kind {
            OpKind::IntAlu | OpKind::IntMul | OpKind::Nop => UnitKind::Int,
            OpKind::Fp => UnitKind::Fp,
            OpKind::Branch => UnitKind::Branch,
            OpKind::Load | OpKind::Store => UnitKind::Ls,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            UnitKind::Int => "int",
            UnitKind::Fp => "fp",
            UnitKind::Branch => "branch",
            UnitKind::Ls => "ls",
        }
    }
}

/// Functional-unit counts. Each unit owns one queue in the proposed core.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UnitMix {
    pub int: usize,
    pub fp: usize,
    pub branch: usize,
    pub ls: usize,
}

impl Default for UnitMix {
    fn default() -> Self {
        UnitMix {
            int: 2,
            fp: 1,
            branch: 1,
            ls: 1,
        }
    }
}

impl UnitMix {
    pub fn count(&self, kind: UnitKind) -> usize {
        match kind {
            UnitKind::Int => self.int,
            UnitKind::Fp => self.fp,
            UnitKind::Branch => self.branch,
            UnitKind::Ls => self.ls,
        }
    }

    /// Unit kind of every queue, in index order.
    pub fn layout(&self) -> Vec<UnitKind> {
        [UnitKind::Int, UnitKind::Fp, UnitKind::Branch, UnitKind::Ls]
            .into_iter()
            .flat_map(|k| std::iter::repeat(k).take(self.count(k)))
            .collect()
    }

    pub fn total(&self) -> usize {
        self.int + self.fp + self.branch + self.ls
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SteeringScheme {
    #[default]
    TailDependencies,
    AllDependencies,
    RoundRobin,
}

impl SteeringScheme {
    pub const ALL: [SteeringScheme; 3] = [
        SteeringScheme::TailDependencies,
        SteeringScheme::AllDependencies,
        SteeringScheme::RoundRobin,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SteeringScheme::TailDependencies => "tail-dependencies",
            SteeringScheme::AllDependencies => "all-dependencies",
            SteeringScheme::RoundRobin => "round-robin",
        }
    }
}

impl fmt::Display for SteeringScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SteeringScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SteeringScheme::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown steering scheme `{s}`"))
    }
}

/// The chosen queue is full; dispatch retries next cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SteerStall;

/// Picks a queue among `admissible` (indices into `queues`) for an op whose
/// in-flight producers have trace seqs `producers`. `rr` is the round-robin
/// cursor for this op's unit kind and only advances on success.
pub fn steer(
    queues: &[SystolicPQ],
    admissible: &[usize],
    producers: &[usize],
    scheme: SteeringScheme,
    rr: &mut usize,
) -> Result<usize, SteerStall> {
    assert!(!admissible.is_empty(), "op has no admissible queue");
    let least_occupied = || {
        *admissible
            .iter()
            .min_by_key(|&&q| (queues[q].len(), q))
            .expect("non-empty")
    };
    let choice = match scheme {
        SteeringScheme::TailDependencies => admissible
            .iter()
            .copied()
            .find(|&q| queues[q].tail().is_some_and(|t| producers.contains(&t.id)))
            .unwrap_or_else(least_occupied),
        SteeringScheme::AllDependencies => admissible
            .iter()
            .copied()
            .find(|&q| queues[q].iter().any(|e| producers.contains(&e.id)))
            .unwrap_or_else(least_occupied),
        SteeringScheme::RoundRobin => admissible[*rr % admissible.len()],
    };
    if queues[choice].is_full() {
        return Err(SteerStall);
    }
    if scheme == SteeringScheme::RoundRobin {
        *rr += 1;
    }
    Ok(choice)
}
