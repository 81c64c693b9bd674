use std::collections::BTreeSet;

use crate::backend::{steer, PqKey, SystolicPQ, UnitKind};
use crate::memhier::Level;
use crate::predictor::{delay_lookup, predict_issue, PolicyKind, ProducerTiming};
use crate::rename::{Producer, Writer};
use crate::stats::EventLog;
use crate::trace::{OpKind, Trace};

use super::machine::Machine;
use super::{CoreConfig, SimError};

/// Program-order constraints for first instances (warm-up mode). An op's
/// band is `2f` if repeated and `2f + 1` if a first instance, where `f`
/// counts older first instances, so each first instance sits behind every
/// older op and ahead of every younger op in its queue.
#[derive(Default)]
struct Warmup {
    firsts: u64,
    unissued: BTreeSet<usize>,
    unissued_firsts: BTreeSet<usize>,
}

impl Warmup {
    fn allows(&self, seq: usize, first: bool) -> bool {
        let older_first_pending = self.unissued_firsts.first().is_some_and(|&s| s < seq);
        let all_older_issued = self.unissued.first().is_none_or(|&s| s >= seq);
        !older_first_pending && (!first || all_older_issued)
    }
}

struct Proposed {
    queues: Vec<SystolicPQ>,
    /// Queue indices per unit kind: int, fp, branch, ls.
    by_kind: [Vec<usize>; 4],
    rr: [usize; 4],
    head_stalls: Vec<u64>,
    warmup: Option<Warmup>,
    /// Cycles in which at least one head was blocked.
    stall_cycles: u64,
}

fn kind_slot(k: UnitKind) -> usize {
    match k {
        UnitKind::Int => 0,
        UnitKind::Fp => 1,
        UnitKind::Branch => 2,
        UnitKind::Ls => 3,
    }
}

impl Proposed {
    fn new(cfg: &CoreConfig) -> Self {
        let layout = cfg.units.layout();
        let mut by_kind: [Vec<usize>; 4] = Default::default();
        for (i, &k) in layout.iter().enumerate() {
            by_kind[kind_slot(k)].push(i);
        }
        Proposed {
            queues: layout.iter().map(|_| SystolicPQ::new(cfg.pq_size)).collect(),
            by_kind,
            rr: [0; 4],
            head_stalls: vec![0; layout.len()],
            warmup: cfg.warmup_program_order.then(Warmup::default),
            stall_cycles: 0,
        }
    }

    fn producers(m: &Machine, seq: usize, cycle: u64) -> Vec<Producer> {
        let op = &m.ops[seq];
        let srcs = m.rename.sources(op);
        let mut out = m.dt.producers(&srcs, &m.rename, cycle);
        if op.kind == OpKind::Load {
            if let Some(w) = m.mpt.producer(op.addr.expect("validated load")) {
                let completed = m.state[w.seq].complete.is_some_and(|c| c <= cycle);
                out.push(Producer { writer: w, completed });
            }
        }
        out
    }

    fn producer_delay(m: &mut Machine, w: &Writer) -> u64 {
        let policy = m.cfg.policy;
        match w.kind {
            OpKind::Load => {
                let predicted_hit = match m.state[w.seq].level {
                    Some(level) => level == Level::L1,
                    None => m.mem.would_hit_l1(m.ops[w.seq].addr.expect("validated load")),
                };
                delay_lookup(&mut m.dc, w.pc, &policy, &m.statics, predicted_hit)
            }
            _ if policy.kind == PolicyKind::DependenceOnly => 0,
            kind => m.statics.delay(kind),
        }
    }

    fn dispatch(&mut self, m: &mut Machine, cycle: u64) {
        for _ in 0..m.cfg.dispatch_width() {
            let Some(op) = m.next_to_dispatch(cycle) else {
                return;
            };
            let seq = m.state.len();
            let producers = Self::producers(m, seq, cycle);
            let ids: Vec<usize> = producers.iter().map(|p| p.writer.seq).collect();
            let slot = kind_slot(UnitKind::for_op(op.kind));
            let Ok(q) = steer(&self.queues, &self.by_kind[slot], &ids, m.cfg.steering, &mut self.rr[slot]) else {
                return;
            };
            m.dispatch(cycle);
            let use_dispatch = m.cfg.policy.use_dispatch_time;
            let timings: Vec<ProducerTiming> = producers
                .iter()
                .map(|p| ProducerTiming {
                    start: if use_dispatch {
                        p.writer.dispatch
                    } else {
                        p.writer.predicted_issue
                    },
                    delay: Self::producer_delay(m, &p.writer),
                    completed: p.completed,
                })
                .collect();
            let predicted = predict_issue(cycle, &timings);
            let writer = Writer {
                seq,
                pc: op.pc,
                kind: op.kind,
                predicted_issue: predicted,
                dispatch: cycle,
            };
            if let Some(dst) = m.state[seq].renamed.dst {
                m.dt.record(dst, writer);
            }
            if op.kind == OpKind::Store {
                m.mpt.record_store(op.addr.expect("validated store"), writer);
            }
            let priority = if m.cfg.policy.kind == PolicyKind::DependenceOnly {
                seq as u64
            } else {
                predicted
            };
            let first = m.state[seq].instance == 1;
            let band = match self.warmup.as_mut() {
                Some(w) => {
                    let band = 2 * w.firsts + u64::from(first);
                    w.unissued.insert(seq);
                    if first {
                        w.firsts += 1;
                        w.unissued_firsts.insert(seq);
                    }
                    band
                }
                None => 0,
            };
            let key = PqKey {
                band,
                priority,
                order: seq as u64,
            };
            self.queues[q].insert(seq, key, cycle).expect("steer checked capacity");
            let st = &mut m.state[seq];
            st.predicted = Some(predicted);
            st.priority = Some(priority);
            st.queue = Some(q);
        }
    }

    fn issue(&mut self, m: &mut Machine, cycle: u64) {
        let mut used = vec![false; self.queues.len()];
        let mut blocked = false;
        for (q, queue) in self.queues.iter().enumerate() {
            if let Some(h) = queue.head(cycle) {
                if !m.operands_ready(h.id, cycle) {
                    self.head_stalls[q] += 1;
                    blocked = true;
                }
            }
        }
        self.stall_cycles += u64::from(blocked);
        for _ in 0..m.cfg.issue_width {
            let mut best: Option<(PqKey, usize)> = None;
            for (q, queue) in self.queues.iter().enumerate() {
                if used[q] {
                    continue;
                }
                let Some(h) = queue.head(cycle) else { continue };
                let first = m.state[h.id].instance == 1;
                if self.warmup.as_ref().is_some_and(|w| !w.allows(h.id, first)) {
                    continue;
                }
                if !m.operands_ready(h.id, cycle) {
                    continue;
                }
                if best.is_none_or(|(k, _)| h.key < k) {
                    best = Some((h.key, q));
                }
            }
            let Some((_, q)) = best else { break };
            let entry = self.queues[q].pop(cycle).expect("head present");
            used[q] = true;
            if let Some(w) = self.warmup.as_mut() {
                w.unissued.remove(&entry.id);
                w.unissued_firsts.remove(&entry.id);
            }
            m.issue(entry.id, cycle);
        }
    }
}

pub fn run_proposed(trace: &Trace, cfg: &CoreConfig) -> Result<EventLog, SimError> {
    let mut m = Machine::new(trace, cfg)?;
    let mut core = Proposed::new(cfg);
    let mut cycle = 0;
    while !m.done() {
        cycle += 1;
        m.complete(cycle)?;
        m.commit(cycle)?;
        core.issue(&mut m, cycle);
        core.dispatch(&mut m, cycle);
        m.check_progress(cycle)?;
    }
    Ok(m.into_log("proposed", &trace.meta.name, core.head_stalls, core.stall_cycles))
}
