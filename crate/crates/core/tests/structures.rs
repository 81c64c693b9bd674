use std::collections::{HashMap, HashSet};

use proptest::prelude::*;

use itpsim::backend::{PqKey, SystolicPQ};
use itpsim::rename::{DependencyTable, MemProducerTable, PhysReg, RenameState, Writer, PHYS_REGS};
use itpsim::trace::{MicroOp, OpKind, ARCH_REGS};

#[test]
fn pq_pops_example_priorities_in_order() {
    let mut pq = SystolicPQ::new(13);
    for (i, p) in [25, 14, 19].into_iter().enumerate() {
        pq.insert(i, PqKey::new(p, i as u64), 1).unwrap();
    }
    let pops: Vec<u64> = (0..3).map(|_| pq.pop(2).unwrap().key.priority).collect();
    assert_eq!(pops, [14, 19, 25]);
}

#[derive(Clone, Debug)]
enum PqOp {
    Insert(u64),
    Pop,
    Tick,
}

fn pq_ops() -> impl Strategy<Value = Vec<PqOp>> {
    prop::collection::vec(
        prop_oneof![
            3 => (0u64..20).prop_map(PqOp::Insert),
            2 => Just(PqOp::Pop),
            1 => Just(PqOp::Tick),
        ],
        1..400,
    )
}

proptest! {
    #[test]
    fn pq_matches_sorted_list(ops in pq_ops(), cap in 1usize..16) {
        let mut pq = SystolicPQ::new(cap);
        // (priority, order, inserted_at), re-sorted on every insert.
        let mut list: Vec<(u64, u64, u64)> = Vec::new();
        let (mut cycle, mut order) = (1u64, 0u64);
        for op in ops {
            match op {
                PqOp::Tick => cycle += 1,
                PqOp::Insert(p) => {
                    let r = pq.insert(order as usize, PqKey::new(p, order), cycle);
                    prop_assert_eq!(r.is_ok(), list.len() < cap);
                    if r.is_ok() {
                        list.push((p, order, cycle));
                        list.sort();
                    }
                    order += 1;
                }
                PqOp::Pop => {
                    let want = list.iter().position(|e| e.2 < cycle).map(|i| list.remove(i));
                    let got = pq.pop(cycle).map(|e| (e.key.priority, e.key.order, e.inserted_at));
                    prop_assert_eq!(got, want);
                }
            }
            prop_assert_eq!(pq.len() + pq.free_entries(), cap);
            prop_assert_eq!(pq.tail().map(|e| (e.key.priority, e.key.order)), list.last().map(|e| (e.0, e.1)));
        }
    }
}

/// Writer ops (srcs, arch dst) interleaved with commits of the oldest
/// uncommitted op.
fn rename_script() -> impl Strategy<Value = Vec<(Vec<u8>, Option<u8>, bool)>> {
    prop::collection::vec(
        (
            prop::collection::vec(0u8..ARCH_REGS as u8, 0..=3),
            prop::option::weighted(0.8, 0u8..ARCH_REGS as u8),
            any::<bool>(),
        ),
        1..600,
    )
}

fn writer(seq: usize) -> Writer {
    Writer {
        seq,
        pc: 0x100 + 4 * seq as u64,
        kind: OpKind::IntAlu,
        predicted_issue: seq as u64,
        dispatch: seq as u64,
    }
}

proptest! {
    #[test]
    fn rename_legality_and_dt_soundness(script in rename_script(), phys in prop::sample::select(vec![ARCH_REGS + 8, PHYS_REGS])) {
        let mut rs = RenameState::new(ARCH_REGS, phys);
        let mut dt = DependencyTable::new(phys);
        // Regs allocated and not yet freed; each may be written only once.
        let mut allocated: HashSet<PhysReg> = (0..ARCH_REGS as u16).map(PhysReg).collect();
        let mut pending_free: std::collections::VecDeque<Option<PhysReg>> = Default::default();
        // Direct-scan oracle: last writer seq per architectural register.
        let mut last_writer: HashMap<u8, usize> = HashMap::new();
        for (seq, (srcs, dst, commit)) in script.into_iter().enumerate() {
            let mut op = MicroOp::new(0x100 + 4 * seq as u64, OpKind::IntAlu).srcs(&srcs);
            if let Some(d) = dst {
                op = op.dst(d);
            }
            op.seq = seq;
            while dst.is_some() && !rs.can_allocate() {
                let prev = pending_free.pop_front().expect("something to commit");
                if let Some(p) = prev {
                    prop_assert!(allocated.remove(&p));
                    rs.release(p);
                }
            }
            let renamed = rs.rename(&op).unwrap();
            let found: HashSet<usize> = dt
                .producers(&renamed.srcs, &rs, 0)
                .into_iter()
                .map(|p| p.writer.seq)
                .collect();
            let expect: HashSet<usize> = srcs.iter().filter_map(|r| last_writer.get(r).copied()).collect();
            prop_assert_eq!(found, expect);
            if let Some(d) = renamed.dst {
                prop_assert!(allocated.insert(d), "{:?} allocated twice", d);
                dt.record(d, writer(seq));
                last_writer.insert(dst.unwrap(), seq);
            }
            pending_free.push_back(renamed.prev);
            if commit {
                if let Some(Some(p)) = pending_free.pop_front() {
                    prop_assert!(allocated.remove(&p));
                    rs.release(p);
                }
            }
            let free: HashSet<PhysReg> = rs.free_list().into_iter().collect();
            prop_assert!(free.is_disjoint(&allocated));
            prop_assert_eq!(free.len() + allocated.len(), phys);
            let live: HashSet<PhysReg> = rs.live().into_iter().collect();
            prop_assert_eq!(live.len(), ARCH_REGS);
            prop_assert!(live.iter().all(|r| allocated.contains(r)));
        }
    }
}

#[derive(Clone, Debug)]
enum MemEvent {
    Store(u64),
    CommitOldest,
    Load(u64),
}

proptest! {
    /// Against a list of uncommitted stores: a load's producer is the youngest
    /// uncommitted store to its line.
    #[test]
    fn mem_producer_follows_event_order(events in prop::collection::vec(
        prop_oneof![
            (0u64..4).prop_map(MemEvent::Store),
            Just(MemEvent::CommitOldest),
            (0u64..4).prop_map(MemEvent::Load),
        ],
        1..200,
    )) {
        let mut mpt = MemProducerTable::new(64);
        let mut uncommitted: std::collections::VecDeque<(usize, u64)> = Default::default();
        for (seq, e) in events.into_iter().enumerate() {
            match e {
                MemEvent::Store(line) => {
                    mpt.record_store(64 * line + 8, writer(seq));
                    uncommitted.push_back((seq, line));
                }
                MemEvent::CommitOldest => {
                    if let Some((s, line)) = uncommitted.pop_front() {
                        mpt.commit_store(64 * line + 8, s);
                    }
                }
                MemEvent::Load(line) => {
                    let want = uncommitted.iter().rev().find(|(_, l)| *l == line).map(|(s, _)| *s);
                    prop_assert_eq!(mpt.producer(64 * line).map(|w| w.seq), want);
                }
            }
        }
    }
}

#[test]
fn committed_store_is_not_a_producer() {
    // store A; store B; commit A; load A → none; load B → B.
    let mut mpt = MemProducerTable::new(64);
    mpt.record_store(0x1000, writer(0));
    mpt.record_store(0x2000, writer(1));
    mpt.commit_store(0x1000, 0);
    assert_eq!(mpt.producer(0x1008), None);
    assert_eq!(mpt.producer(0x2010).map(|w| w.seq), Some(1));
}
