//! Oracles shared by the integration tests.

#![allow(dead_code)]

use std::collections::HashMap;

use itpsim::cores::CoreConfig;
use itpsim::stats::EventLog;
use itpsim::trace::{OpKind, Reg, Trace};

/// Register producers and the last same-line store of every op, by a
/// last-writer scan of the trace.
pub fn producers(trace: &Trace, line: u64) -> Vec<Vec<usize>> {
    let mut last: HashMap<Reg, usize> = HashMap::new();
    let mut stores: HashMap<u64, usize> = HashMap::new();
    let mut out = Vec::with_capacity(trace.ops.len());
    for (i, op) in trace.ops.iter().enumerate() {
        let mut p: Vec<usize> = op.srcs.iter().filter_map(|r| last.get(r).copied()).collect();
        if op.kind == OpKind::Load {
            if let Some(&s) = stores.get(&(op.addr.unwrap() / line)) {
                p.push(s);
            }
        }
        if op.kind == OpKind::Store {
            stores.insert(op.addr.unwrap() / line, i);
        }
        if let Some(w) = op.writes() {
            last.insert(w, i);
        }
        out.push(p);
    }
    out
}

/// Every op committed once, in program order, at most `issue_width` per
/// cycle, after completing; no op issued before its producers completed.
pub fn check_legal(trace: &Trace, log: &EventLog, c: &CoreConfig) -> Result<(), String> {
    let who = format!("{} on {}", trace.meta.name, log.core);
    if log.records.len() != trace.ops.len() {
        return Err(format!("{who}: committed {} of {}", log.records.len(), trace.ops.len()));
    }
    let prods = producers(trace, c.mem.l1.line);
    let mut per_cycle: HashMap<u64, usize> = HashMap::new();
    for (i, r) in log.records.iter().enumerate() {
        if r.seq != i || r.pc != trace.ops[i].pc {
            return Err(format!("{who}: record {i} is op {} (pc {:#x})", r.seq, r.pc));
        }
        if r.issue <= r.dispatch {
            return Err(format!("{who}: op {i} issued at {} but dispatched at {}", r.issue, r.dispatch));
        }
        for &p in &prods[i] {
            if r.issue < log.records[p].complete {
                return Err(format!(
                    "{who}: op {i} issued at {} before producer {p} completed at {}",
                    r.issue, log.records[p].complete
                ));
            }
        }
        if i > 0 && r.commit < log.records[i - 1].commit {
            return Err(format!("{who}: op {i} committed before op {}", i - 1));
        }
        if r.commit < r.complete {
            return Err(format!("{who}: op {i} committed before completing"));
        }
        *per_cycle.entry(r.commit).or_default() += 1;
    }
    if let Some((cy, n)) = per_cycle.iter().find(|(_, &n)| n > c.issue_width) {
        return Err(format!("{who}: {n} commits in cycle {cy}"));
    }
    Ok(())
}

/// Proposed core only: each issued op was the minimum (priority, seq) among
/// the visible entries of its queue, and each queue issued at most once per
/// cycle. Assumes warm-up ordering is off.
pub fn check_head_only(log: &EventLog) -> Result<(), String> {
    let mut by_queue: HashMap<usize, Vec<usize>> = HashMap::new();
    for r in &log.records {
        let q = r.queue.ok_or_else(|| format!("op {} has no queue", r.seq))?;
        by_queue.entry(q).or_default().push(r.seq);
    }
    for (q, members) in by_queue {
        for &x in &members {
            let rx = &log.records[x];
            let kx = (rx.priority.unwrap(), rx.seq);
            for &y in &members {
                let ry = &log.records[y];
                if y == x || ry.dispatch >= rx.issue || ry.issue < rx.issue {
                    continue;
                }
                if ry.issue == rx.issue {
                    return Err(format!("queue {q}: ops {x} and {y} both issued at {}", rx.issue));
                }
                if (ry.priority.unwrap(), ry.seq) < kx {
                    return Err(format!("queue {q}: op {x} issued at {} ahead of higher-priority op {y}", rx.issue));
                }
            }
        }
    }
    Ok(())
}
