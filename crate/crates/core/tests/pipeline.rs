mod common;

use proptest::prelude::*;

use common::{check_head_only, check_legal};
use itpsim::backend::SteeringScheme;
use itpsim::cores::{run, CoreConfig, CoreKind};
use itpsim::predictor::PolicyKind;
use itpsim::trace::kernels::corpus;
use itpsim::trace::{MicroOp, OpKind, Trace};

const KINDS: [OpKind; 7] = [
    OpKind::IntAlu,
    OpKind::IntMul,
    OpKind::Fp,
    OpKind::Load,
    OpKind::Store,
    OpKind::Branch,
    OpKind::Nop,
];

#[derive(Clone, Debug)]
struct BodyOp {
    kind: usize,
    srcs: Vec<u8>,
    dst: u8,
    slot: u64,
    mispredict: bool,
}

fn body_op() -> impl Strategy<Value = BodyOp> {
    (0..KINDS.len(), prop::collection::vec(0u8..8, 0..=3), 0u8..8, 0u64..8, prop::bool::weighted(0.1))
        .prop_map(|(kind, srcs, dst, slot, mispredict)| BodyOp { kind, srcs, dst, slot, mispredict })
}

/// A loop body repeated `iters` times. Even slots revisit the same line every
/// iteration; odd slots walk a fresh page each iteration and miss.
fn looped_trace() -> impl Strategy<Value = Trace> {
    (prop::collection::vec(body_op(), 1..14), 1usize..10).prop_map(|(body, iters)| {
        let mut t = Trace::new("looped", None);
        for i in 0..iters as u64 {
            for (k, b) in body.iter().enumerate() {
                let kind = KINDS[b.kind];
                let mut op = MicroOp::new(0x100 + 4 * k as u64, kind).srcs(&b.srcs);
                if kind.is_mem() {
                    let page = if b.slot % 2 == 1 { i } else { 0 };
                    op = op.mem(0x4000_0000 + 64 * b.slot + 4096 * page, 8);
                }
                if matches!(kind, OpKind::IntAlu | OpKind::IntMul | OpKind::Fp | OpKind::Load) {
                    op = op.dst(b.dst);
                }
                if kind == OpKind::Branch {
                    op = op.mispredicted(b.mispredict);
                }
                t.push(op);
            }
        }
        t
    })
}

fn machine() -> impl Strategy<Value = CoreConfig> {
    (
        1usize..=4,
        2usize..=13,
        prop::sample::select(vec![8usize, 32, 128]),
        prop::sample::select(vec![72usize, 256]),
        prop::sample::select(PolicyKind::ALL.to_vec()),
        prop::sample::select(SteeringScheme::ALL.to_vec()),
    )
        .prop_map(|(width, pq, rob, phys, policy, steering)| {
            let mut c = CoreConfig::default();
            c.issue_width = width;
            c.pq_size = pq;
            c.rob_size = rob;
            c.rs_size = rob.min(64);
            c.phys_regs = phys;
            c.policy.kind = policy;
            c.steering = steering;
            c
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn every_core_is_dataflow_legal(t in looped_trace(), base in machine()) {
        let mut committed = Vec::new();
        for core in CoreKind::ALL {
            let c = CoreConfig { core, ..base.clone() };
            let out = run(&t, &c).map_err(|e| TestCaseError::fail(e.to_string()))?;
            check_legal(&t, &out.log, &c).map_err(TestCaseError::fail)?;
            committed.push(out.log.records.iter().map(|r| r.seq).collect::<Vec<_>>());
        }
        prop_assert!(committed.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn proposed_issues_only_from_queue_heads(t in looped_trace(), base in machine()) {
        let c = CoreConfig { core: CoreKind::Proposed, ..base };
        let out = run(&t, &c).map_err(|e| TestCaseError::fail(e.to_string()))?;
        check_head_only(&out.log).map_err(TestCaseError::fail)?;
    }

    #[test]
    fn warmup_ordering_stays_legal(t in looped_trace()) {
        let c = CoreConfig { warmup_program_order: true, ..CoreConfig::default() };
        let out = run(&t, &c).map_err(|e| TestCaseError::fail(e.to_string()))?;
        check_legal(&t, &out.log, &c).map_err(TestCaseError::fail)?;
    }
}

#[test]
fn ooo_never_slower_than_inorder_on_corpus() {
    for t in corpus() {
        let cycles = |core| run(&t, &CoreConfig { core, ..CoreConfig::default() }).unwrap().stats.cycles;
        let (ooo, inorder) = (cycles(CoreKind::Ooo), cycles(CoreKind::InOrder));
        assert!(ooo <= inorder, "{}: ooo {ooo} > inorder {inorder}", t.meta.name);
    }
}

#[test]
fn first_instances_issue_in_program_order_under_warmup() {
    let t = itpsim::trace::gen_kernel("random-dag", 3, 5).unwrap();
    let c = CoreConfig { warmup_program_order: true, ..CoreConfig::default() };
    let out = run(&t, &c).unwrap();
    let body = itpsim::trace::gen_kernel("random-dag", 1, 5).unwrap().ops.len();
    let first = &out.log.records[..body];
    // Each first instance issues after every older op.
    for (i, r) in first.iter().enumerate() {
        for older in &first[..i] {
            assert!(r.issue >= older.issue, "op {i} at {} before op {} at {}", r.issue, older.seq, older.issue);
        }
    }
}
