use crate::backend::UnitKind;
use crate::stats::EventLog;
use crate::trace::Trace;

use super::machine::{Machine, UnitBudget};
use super::{CoreConfig, SimError};

/// Unified reservation station with wakeup on completion and oldest-first
/// select among ready ops.
pub fn run_ooo(trace: &Trace, cfg: &CoreConfig) -> Result<EventLog, SimError> {
    let mut m = Machine::new(trace, cfg)?;
    // Kept in program order, so a front-to-back scan is oldest-first.
    let mut rs: Vec<usize> = Vec::with_capacity(cfg.rs_size);
    let mut stalls = 0u64;
    let mut cycle = 0;
    while !m.done() {
        cycle += 1;
        m.complete(cycle)?;
        m.commit(cycle)?;

        if let Some(&oldest) = rs.first() {
            if m.state[oldest].dispatch < cycle && !m.operands_ready(oldest, cycle) {
                stalls += 1;
            }
        }
        let mut budget = UnitBudget::new(cfg);
        let mut issued = 0;
        let mut i = 0;
        while i < rs.len() && issued < cfg.issue_width {
            let seq = rs[i];
            let unit = UnitKind::for_op(m.ops[seq].kind);
            if budget.available(unit) && m.operands_ready(seq, cycle) {
                budget.take(unit);
                rs.remove(i);
                m.issue(seq, cycle);
                issued += 1;
            } else {
                i += 1;
            }
        }

        for _ in 0..cfg.dispatch_width() {
            if rs.len() >= cfg.rs_size || m.next_to_dispatch(cycle).is_none() {
                break;
            }
            rs.push(m.dispatch(cycle));
        }
        m.check_progress(cycle)?;
    }
    Ok(m.into_log("ooo", &trace.meta.name, vec![stalls], stalls))
}
