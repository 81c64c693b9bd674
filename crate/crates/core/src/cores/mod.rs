//! Pipeline drivers: the priority-queue core with issue-time prediction, a
//! stall-on-use in-order core and a reservation-station out-of-order core.
//! All three share the trace, rename, memory and commit machinery.

mod config;
mod inorder;
mod machine;
mod ooo;
mod proposed;
mod table1;

use thiserror::Error;

pub use config::{ConfigError, CoreConfig, CoreKind, CONFIG_KEYS};
pub use inorder::run_inorder;
pub use ooo::run_ooo;
pub use proposed::run_proposed;
pub use table1::{table1_check, Table1Report, TABLE1_DELTA, TABLE1_INORDER_ITER1, TABLE1_PROPOSED_ITER2};

use crate::backend::MemoryOrderViolation;
use crate::predictor::{PolicyKind, PredictorError};
use crate::stats::{reduce, EventLog, RunStats, SeriesMetric, StatsError};
use crate::trace::{validate_trace, Trace, TraceError, Violation, ARCH_REGS};

#[derive(Debug, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("trace has {} invalid op(s); first: {}", .0.len(), .0[0])]
    InvalidTrace(Vec<Violation>),
    #[error("op {seq} needs a {unit} unit but the machine has none")]
    NoUnit { seq: usize, unit: &'static str },
    #[error(transparent)]
    Policy(PredictorError),
    #[error("no progress by cycle {cycle} (oldest in-flight op: {oldest:?})")]
    Deadlock { cycle: u64, oldest: Option<usize> },
    #[error("memory ordering violated: {0}")]
    MemoryOrder(#[from] MemoryOrderViolation),
    #[error("inconsistent timing: {0}")]
    Timing(PredictorError),
    #[error("event log rejected: {0}")]
    Log(#[from] StatsError),
}

impl From<PredictorError> for SimError {
    fn from(e: PredictorError) -> Self {
        match e {
            PredictorError::UnknownPolicy(_) => SimError::Policy(e),
            _ => SimError::Timing(e),
        }
    }
}

impl SimError {
    /// True for simulator bugs, false for bad input.
    pub fn is_internal(&self) -> bool {
        matches!(
            self,
            SimError::Deadlock { .. } | SimError::MemoryOrder(_) | SimError::Timing(_) | SimError::Log(_)
        )
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub stats: RunStats,
    pub log: EventLog,
}

/// Runs the core named in `cfg` and reduces its event log.
pub fn run(trace: &Trace, cfg: &CoreConfig) -> Result<RunOutput, SimError> {
    let violations = validate_trace(trace, ARCH_REGS);
    if !violations.is_empty() {
        return Err(SimError::InvalidTrace(violations));
    }
    let log = match cfg.core {
        CoreKind::Proposed => run_proposed(trace, cfg)?,
        CoreKind::InOrder => run_inorder(trace, cfg)?,
        CoreKind::Ooo => run_ooo(trace, cfg)?,
    };
    let stats = reduce(&log)?;
    Ok(RunOutput { stats, log })
}

/// The proposed core with the named delay policy.
pub fn run_variant(trace: &Trace, cfg: &CoreConfig, policy: &str) -> Result<RunOutput, SimError> {
    let kind: PolicyKind = policy.parse()?;
    let mut cfg = cfg.clone();
    cfg.core = CoreKind::Proposed;
    cfg.policy.kind = kind;
    run(trace, &cfg)
}

/// Applies one sweep point to a configuration.
pub fn apply_sweep(cfg: &CoreConfig, metric: SeriesMetric, x: u64) -> CoreConfig {
    let mut c = cfg.clone();
    match metric {
        SeriesMetric::IpcVsPqSize => c.pq_size = x as usize,
        SeriesMetric::IpcVsDelayCache => c.delaycache_entries = x as usize,
        SeriesMetric::IpcVsUnits => c.units.int = x as usize,
        SeriesMetric::IpcVsTrainingInterval => c.policy.training_interval = x,
    }
    c
}

pub fn sweep(
    trace: &Trace,
    base: &CoreConfig,
    metric: SeriesMetric,
    xs: &[u64],
) -> Result<Vec<(u64, RunStats)>, SimError> {
    xs.iter()
        .map(|&x| Ok((x, run(trace, &apply_sweep(base, metric, x))?.stats)))
        .collect()
}
