use std::collections::VecDeque;

use crate::backend::UnitKind;
use crate::stats::EventLog;
use crate::trace::Trace;

use super::machine::{Machine, UnitBudget};
use super::{CoreConfig, SimError};

/// Stall-on-use pipeline: ops issue strictly in program order, and issue
/// stops at the first op whose operands are not ready.
pub fn run_inorder(trace: &Trace, cfg: &CoreConfig) -> Result<EventLog, SimError> {
    let mut m = Machine::new(trace, cfg)?;
    let mut waiting: VecDeque<usize> = VecDeque::new();
    let mut stalls = 0u64;
    let mut cycle = 0;
    while !m.done() {
        cycle += 1;
        m.complete(cycle)?;
        m.commit(cycle)?;

        let mut budget = UnitBudget::new(cfg);
        let mut issued = 0;
        while issued < cfg.issue_width {
            let Some(&seq) = waiting.front() else { break };
            if m.state[seq].dispatch >= cycle {
                break;
            }
            if !m.operands_ready(seq, cycle) {
                stalls += 1;
                break;
            }
            let unit = UnitKind::for_op(m.ops[seq].kind);
            if !budget.available(unit) {
                break;
            }
            budget.take(unit);
            waiting.pop_front();
            m.issue(seq, cycle);
            issued += 1;
        }

        for _ in 0..cfg.dispatch_width() {
            if m.next_to_dispatch(cycle).is_none() {
                break;
            }
            waiting.push_back(m.dispatch(cycle));
        }
        m.check_progress(cycle)?;
    }
    Ok(m.into_log("inorder", &trace.meta.name, vec![stalls], stalls))
}
