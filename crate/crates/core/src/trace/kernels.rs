//! Deterministic synthetic kernels.
//!
//! Every generator is a pure function of `(kernel, iterations, seed)`. Loop
//! kernels emit the same static body (same pcs) every iteration so the
//! delay learner sees repeated instructions; only addresses and, for
//! `random-dag`, branch outcomes vary between iterations.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{MicroOp, OpKind, Trace, TraceError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Kernel {
    /// The two-chain loop used as the worked scheduling example.
    Table1,
    /// `c[i] = a[i] * s + b[i]` over arrays much larger than L2.
    Stream,
    /// Serial pointer chase through a large heap plus independent int work.
    PointerChase,
    /// Loads from an L1-resident, an L2-resident and a DRAM-resident array.
    MixedLatency,
    /// A randomly generated loop body with random register dependencies.
    RandomDag,
    /// One DRAM load per iteration whose latency never changes.
    ConstantLatency,
    /// A load chain alternating between DRAM and L2 hits every iteration.
    AlternatingLatency,
}

impl Kernel {
    pub const ALL: [Kernel; 7] = [
        Kernel::Table1,
        Kernel::Stream,
        Kernel::PointerChase,
        Kernel::MixedLatency,
        Kernel::RandomDag,
        Kernel::ConstantLatency,
        Kernel::AlternatingLatency,
    ];

    /// Kernels with L1-missing loads used for performance comparisons.
    pub const CORPUS: [Kernel; 4] = [
        Kernel::Stream,
        Kernel::PointerChase,
        Kernel::MixedLatency,
        Kernel::RandomDag,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kernel::Table1 => "table1",
            Kernel::Stream => "stream",
            Kernel::PointerChase => "pointer-chase",
            Kernel::MixedLatency => "mixed-latency",
            Kernel::RandomDag => "random-dag",
            Kernel::ConstantLatency => "constant-latency",
            Kernel::AlternatingLatency => "alternating-latency",
        }
    }

    pub fn generate(self, iterations: usize, seed: u64) -> Result<Trace, TraceError> {
        if iterations == 0 {
            return Err(TraceError::NoIterations);
        }
        let mut t = Trace::new(self.name(), Some(seed));
        match self {
            Kernel::Table1 => table1(&mut t, iterations),
            Kernel::Stream => stream(&mut t, iterations),
            Kernel::PointerChase => pointer_chase(&mut t, iterations, seed),
            Kernel::MixedLatency => mixed_latency(&mut t, iterations),
            Kernel::RandomDag => random_dag(&mut t, iterations, seed),
            Kernel::ConstantLatency => constant_latency(&mut t, iterations, seed),
            Kernel::AlternatingLatency => alternating_latency(&mut t, iterations),
        }
        Ok(t)
    }
}

impl fmt::Display for Kernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Kernel {
    type Err = TraceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Kernel::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| TraceError::UnknownKernel(s.to_string()))
    }
}

/// Iterations and seed of the standard comparison corpus.
pub const CORPUS_ITERATIONS: usize = 200;
pub const CORPUS_SEED: u64 = 0;

/// One trace per [`Kernel::CORPUS`] kernel at the standard size and seed.
pub fn corpus() -> Vec<Trace> {
    Kernel::CORPUS
        .iter()
        .map(|k| k.generate(CORPUS_ITERATIONS, CORPUS_SEED).expect("iterations > 0"))
        .collect()
}

/// Generates the named kernel.
pub fn gen_kernel(name: &str, iterations: usize, seed: u64) -> Result<Trace, TraceError> {
    name.parse::<Kernel>()?.generate(iterations, seed)
}

/// Registers used by the `table1` kernel, named after the x86 operands of the
/// original loop.
pub mod table1_regs {
    pub const RAX: u8 = 0;
    pub const ECX: u8 = 2;
    pub const RBX: u8 = 3;
    pub const RDX: u8 = 4;
    pub const RSP: u8 = 7;
    pub const R9: u8 = 9;
    pub const R10: u8 = 10;
    pub const R15: u8 = 15;
    /// Flags written by the compare.
    pub const FLAGS: u8 = 16;
    /// Completion token of the first store.
    pub const STORE_TOKEN: u8 = 17;
    pub const COUNTER: u8 = 20;
    pub const COND: u8 = 21;
}

/// Ops per `table1` iteration: I1..I9 plus three loop-control ops.
pub const TABLE1_OPS_PER_ITER: usize = 12;
/// Base pc of the `table1` loop; op `k` of an iteration sits at `base + 4k`.
pub const TABLE1_PC: u64 = 0x400;

fn table1(t: &mut Trace, iterations: usize) {
    use table1_regs::*;
    let pc = |k: u64| TABLE1_PC + 4 * k;
    for i in 0..iterations as u64 {
        // I1 mov (r10,rax,4),ecx
        t.push(MicroOp::new(pc(0), OpKind::Load).srcs(&[R10, RAX]).dst(ECX).mem(0x1000 + 4 * i, 4));
        // I2 add 0x0(r13,rax,4),ecx
        t.push(MicroOp::new(pc(1), OpKind::IntAlu).srcs(&[ECX]).dst(ECX));
        // I3 mov ecx,0x4(rdx)
        t.push(MicroOp::new(pc(2), OpKind::Store).srcs(&[ECX, RDX]).token(STORE_TOKEN).mem(0x2004, 4));
        // I4 mov 0x18(rsp),rbx
        t.push(MicroOp::new(pc(3), OpKind::Load).srcs(&[RSP]).dst(RBX).mem(0x3018, 8));
        // I5 mov (r9,rax,4),r15d
        t.push(MicroOp::new(pc(4), OpKind::Load).srcs(&[R9, RAX]).dst(R15).mem(0x4000 + 4 * i, 4));
        // I6 add (rbx,rax,4),r15d
        t.push(MicroOp::new(pc(5), OpKind::IntAlu).srcs(&[RBX, R15]).dst(R15));
        // I7 cmp ecx,r15d
        t.push(MicroOp::new(pc(6), OpKind::IntAlu).srcs(&[STORE_TOKEN, R15]).dst(FLAGS));
        // I8 cmovge r15d,ecx
        t.push(MicroOp::new(pc(7), OpKind::IntAlu).srcs(&[FLAGS]).dst(ECX));
        // I9 mov ecx,0x4(rdx)
        t.push(MicroOp::new(pc(8), OpKind::Store).srcs(&[ECX, RDX]).mem(0x2004, 4));
        // loop control
        t.push(MicroOp::new(pc(9), OpKind::IntAlu).srcs(&[COUNTER]).dst(COUNTER));
        t.push(MicroOp::new(pc(10), OpKind::IntAlu).srcs(&[COUNTER]).dst(COND));
        t.push(MicroOp::new(pc(11), OpKind::Branch).srcs(&[COND]));
    }
}

const ARRAY_A: u64 = 0x1000_0000;
const ARRAY_B: u64 = 0x2000_0000;
const ARRAY_C: u64 = 0x3000_0000;
const HEAP: u64 = 0x4000_0000;
const SMALL: u64 = 0x5000_0000;
const MEDIUM: u64 = 0x6000_0000;
const LARGE: u64 = 0x7000_0000;

fn stream(t: &mut Trace, iterations: usize) {
    // r1 index, r2 a[i], r3 b[i], r4 scale, r5 product, r6 sum, r7 cond
    let pc = |k: u64| 0x1000 + 4 * k;
    for i in 0..iterations as u64 {
        let off = 64 * i;
        t.push(MicroOp::new(pc(0), OpKind::Load).srcs(&[1]).dst(2).mem(ARRAY_A + off, 8));
        t.push(MicroOp::new(pc(1), OpKind::Load).srcs(&[1]).dst(3).mem(ARRAY_B + off, 8));
        t.push(MicroOp::new(pc(2), OpKind::Fp).srcs(&[2, 4]).dst(5));
        t.push(MicroOp::new(pc(3), OpKind::Fp).srcs(&[5, 3]).dst(6));
        t.push(MicroOp::new(pc(4), OpKind::Store).srcs(&[6, 1]).mem(ARRAY_C + off, 8));
        t.push(MicroOp::new(pc(5), OpKind::IntAlu).srcs(&[1]).dst(1));
        t.push(MicroOp::new(pc(6), OpKind::IntAlu).srcs(&[1]).dst(7));
        t.push(MicroOp::new(pc(7), OpKind::Branch).srcs(&[7]));
    }
}

fn pointer_chase(t: &mut Trace, iterations: usize, seed: u64) {
    // r1 node pointer, r2 payload sum, r3/r4 independent accumulators,
    // r5 product, r6 counter, r7 cond
    const NODES: u64 = 1 << 16;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pc = |k: u64| 0x2000 + 4 * k;
    for _ in 0..iterations {
        let node = rng.gen_range(0..NODES);
        t.push(MicroOp::new(pc(0), OpKind::Load).srcs(&[1]).dst(1).mem(HEAP + 64 * node, 8));
        t.push(MicroOp::new(pc(1), OpKind::IntAlu).srcs(&[2, 1]).dst(2));
        t.push(MicroOp::new(pc(2), OpKind::IntAlu).srcs(&[3]).dst(3));
        t.push(MicroOp::new(pc(3), OpKind::IntAlu).srcs(&[4]).dst(4));
        t.push(MicroOp::new(pc(4), OpKind::IntMul).srcs(&[3, 4]).dst(5));
        t.push(MicroOp::new(pc(5), OpKind::IntAlu).srcs(&[3, 5]).dst(3));
        t.push(MicroOp::new(pc(6), OpKind::IntAlu).srcs(&[4]).dst(4));
        t.push(MicroOp::new(pc(7), OpKind::IntAlu).srcs(&[6]).dst(6));
        t.push(MicroOp::new(pc(8), OpKind::IntAlu).srcs(&[6]).dst(7));
        t.push(MicroOp::new(pc(9), OpKind::Branch).srcs(&[7]));
    }
}

fn mixed_latency(t: &mut Trace, iterations: usize) {
    // 8 KiB array stays in L1, 64 KiB array cycles through L2, the large
    // array streams from DRAM.
    const SMALL_LINES: u64 = 128;
    const MEDIUM_LINES: u64 = 1024;
    let pc = |k: u64| 0x3000 + 4 * k;
    for i in 0..iterations as u64 {
        t.push(MicroOp::new(pc(0), OpKind::Load).srcs(&[1]).dst(2).mem(SMALL + 64 * (i % SMALL_LINES), 8));
        t.push(MicroOp::new(pc(1), OpKind::Load).srcs(&[1]).dst(3).mem(MEDIUM + 64 * (i % MEDIUM_LINES), 8));
        t.push(MicroOp::new(pc(2), OpKind::Load).srcs(&[1]).dst(4).mem(LARGE + 64 * i, 8));
        t.push(MicroOp::new(pc(3), OpKind::IntAlu).srcs(&[2, 3]).dst(5));
        t.push(MicroOp::new(pc(4), OpKind::IntAlu).srcs(&[10, 5]).dst(10));
        t.push(MicroOp::new(pc(5), OpKind::Fp).srcs(&[4, 11]).dst(6));
        t.push(MicroOp::new(pc(6), OpKind::Fp).srcs(&[11, 6]).dst(11));
        t.push(MicroOp::new(pc(7), OpKind::IntMul).srcs(&[12]).dst(12));
        t.push(MicroOp::new(pc(8), OpKind::IntAlu).srcs(&[1]).dst(1));
        t.push(MicroOp::new(pc(9), OpKind::IntAlu).srcs(&[1]).dst(7));
        t.push(MicroOp::new(pc(10), OpKind::Branch).srcs(&[7]));
    }
}

#[derive(Clone, Copy, Debug)]
enum AddrPattern {
    Fixed(u64),
    Strided { base: u64, stride: u64 },
    Random { base: u64, lines: u64 },
}

struct Template {
    op: MicroOp,
    pattern: Option<AddrPattern>,
    mispredict_rate: f64,
}

const DAG_INDEX: u8 = 60;
const DAG_COND: u8 = 61;
const DAG_POOL: u8 = 40;

fn random_dag(t: &mut Trace, iterations: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_da6);
    let body_len = rng.gen_range(12..=40);
    let pc_base = 0x8000 + 0x1000 * (seed % 16);
    let hot: Vec<u64> = (0..4).map(|k| ARRAY_A + 0x40 * k).collect();
    let mut body: Vec<Template> = Vec::with_capacity(body_len + 3);
    let mut written: Vec<u8> = Vec::new();

    body.push(Template {
        op: MicroOp::new(0, OpKind::IntAlu).srcs(&[DAG_INDEX]).dst(DAG_INDEX),
        pattern: None,
        mispredict_rate: 0.0,
    });
    let mut have_dram_load = false;
    for k in 0..body_len {
        let roll: f64 = rng.gen();
        let kind = match roll {
            r if r < 0.36 => OpKind::IntAlu,
            r if r < 0.42 => OpKind::IntMul,
            r if r < 0.52 => OpKind::Fp,
            r if r < 0.78 => OpKind::Load,
            r if r < 0.90 => OpKind::Store,
            r if r < 0.96 => OpKind::Branch,
            _ => OpKind::Nop,
        };
        // Force at least one DRAM-streaming load per body.
        let kind = if k == body_len - 1 && !have_dram_load { OpKind::Load } else { kind };
        let pick_src = |rng: &mut ChaCha8Rng| -> u8 {
            if !written.is_empty() && rng.gen_bool(0.75) {
                *written.choose(rng).unwrap()
            } else {
                rng.gen_range(1..DAG_POOL)
            }
        };
        let nsrc = rng.gen_range(0..=2);
        let mut srcs: Vec<u8> = (0..nsrc).map(|_| pick_src(&mut rng)).collect();
        let dst = rng.gen_range(1..DAG_POOL);
        let mut pattern = None;
        let mut mispredict_rate = 0.0;
        let op = match kind {
            OpKind::Load | OpKind::Store => {
                srcs.truncate(1);
                srcs.push(DAG_INDEX);
                let p = match rng.gen_range(0..10) {
                    0..=2 => AddrPattern::Fixed(*hot.choose(&mut rng).unwrap()),
                    3..=5 => {
                        have_dram_load |= kind == OpKind::Load;
                        AddrPattern::Strided {
                            base: LARGE + 0x100_0000 * k as u64,
                            stride: [8, 64, 4096][rng.gen_range(0..3)],
                        }
                    }
                    6..=7 => AddrPattern::Random {
                        base: MEDIUM + 0x10_0000 * k as u64,
                        lines: 2048,
                    },
                    _ => AddrPattern::Random {
                        base: HEAP + 0x100_0000 * k as u64,
                        lines: 1 << 16,
                    },
                };
                if k == body_len - 1 && !have_dram_load {
                    have_dram_load = true;
                    pattern = Some(AddrPattern::Strided {
                        base: LARGE + 0x100_0000 * k as u64,
                        stride: 64,
                    });
                } else {
                    pattern = Some(p);
                }
                let op = MicroOp::new(0, kind).srcs(&srcs);
                if kind == OpKind::Load {
                    op.dst(dst)
                } else {
                    op
                }
            }
            OpKind::Branch => {
                if rng.gen_bool(0.5) {
                    mispredict_rate = 0.05;
                }
                MicroOp::new(0, kind).srcs(&srcs)
            }
            OpKind::Nop => MicroOp::new(0, kind),
            _ => MicroOp::new(0, kind).srcs(&srcs).dst(dst),
        };
        if let Some(d) = op.dst {
            written.push(d.0);
        }
        body.push(Template {
            op,
            pattern,
            mispredict_rate,
        });
    }
    body.push(Template {
        op: MicroOp::new(0, OpKind::IntAlu).srcs(&[DAG_INDEX]).dst(DAG_COND),
        pattern: None,
        mispredict_rate: 0.0,
    });
    body.push(Template {
        op: MicroOp::new(0, OpKind::Branch).srcs(&[DAG_COND]),
        pattern: None,
        mispredict_rate: 0.0,
    });
    for (k, tpl) in body.iter_mut().enumerate() {
        tpl.op.pc = pc_base + 4 * k as u64;
    }

    for i in 0..iterations as u64 {
        for tpl in &body {
            let mut op = tpl.op.clone();
            if let Some(p) = tpl.pattern {
                let addr = match p {
                    AddrPattern::Fixed(a) => a,
                    AddrPattern::Strided { base, stride } => base + stride * i,
                    AddrPattern::Random { base, lines } => base + 64 * rng.gen_range(0..lines),
                };
                op = op.mem(addr, 8);
            }
            if op.kind == OpKind::Branch {
                op = op.mispredicted(tpl.mispredict_rate > 0.0 && rng.gen_bool(tpl.mispredict_rate));
            }
            t.push(op);
        }
    }
}

/// Ops per `constant-latency` iteration.
pub const CONSTANT_OPS_PER_ITER: usize = 72;

fn constant_latency(t: &mut Trace, iterations: usize, seed: u64) {
    // Every third op is the load, an fp filler or the closing branch; the
    // other two are int fillers. Any three consecutive ops therefore fit the
    // default unit mix in one cycle. Each load touches a fresh DRAM row and
    // consecutive strides never repeat, so the prefetcher never fires.
    const ROWS: u64 = 1 << 14;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pc = |k: usize| 0x9000 + 4 * k as u64;
    let mut rows: Vec<u64> = Vec::with_capacity(iterations);
    let mut last_stride: Option<i64> = None;
    while rows.len() < iterations {
        let row = rng.gen_range(0..ROWS);
        if rows.contains(&row) {
            continue;
        }
        if let Some(&prev) = rows.last() {
            let stride = row as i64 - prev as i64;
            if Some(stride) == last_stride {
                continue;
            }
            last_stride = Some(stride);
        }
        rows.push(row);
    }
    for row in rows {
        for k in 0..CONSTANT_OPS_PER_ITER {
            let filler = 30 + (k % 8) as u8;
            let op = match (k, k % 3) {
                (0, _) => MicroOp::new(pc(k), OpKind::Load).srcs(&[1]).dst(2).mem(HEAP + 4096 * row, 8),
                (1, _) => MicroOp::new(pc(k), OpKind::IntAlu).srcs(&[3]).dst(3),
                (k, 0) if k == CONSTANT_OPS_PER_ITER - 3 => MicroOp::new(pc(k), OpKind::Branch).srcs(&[2, 3]),
                (_, 0) => MicroOp::new(pc(k), OpKind::Fp).srcs(&[62]).dst(40 + (k % 8) as u8),
                _ => MicroOp::new(pc(k), OpKind::IntAlu).srcs(&[63]).dst(filler),
            };
            t.push(op);
        }
    }
}

fn alternating_latency(t: &mut Trace, iterations: usize) {
    // All lines fall in L1 set 0. Sixteen warm-up stores fill L1 and L2; after
    // that the load chain alternates a fresh line (DRAM) with the line touched
    // sixteen accesses earlier, which has since left L1 but not L2.
    const WARM: usize = 16;
    let line = |j: u64| HEAP + 4096 * j;
    let mut seq: Vec<u64> = (0..WARM as u64).map(line).collect();
    for j in 0..WARM as u64 {
        t.push(MicroOp::new(0xa000, OpKind::Store).srcs(&[9]).mem(line(j), 8));
    }
    let mut next_new = WARM as u64;
    let pc = |k: u64| 0xa100 + 4 * k;
    for i in 0..iterations {
        let addr = if i % 2 == 0 {
            next_new += 1;
            line(next_new - 1)
        } else {
            seq[seq.len() - WARM]
        };
        seq.push(addr);
        t.push(MicroOp::new(pc(0), OpKind::Load).srcs(&[1]).dst(1).mem(addr, 8));
        t.push(MicroOp::new(pc(1), OpKind::IntAlu).srcs(&[5]).dst(5));
        t.push(MicroOp::new(pc(2), OpKind::Branch).srcs(&[5]));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{validate_trace, Reg, ARCH_REGS};
    use std::collections::HashMap;

    /// Producer edges inside each iteration, computed by a last-writer scan.
    fn edges(ops: &[MicroOp]) -> Vec<(usize, usize)> {
        let mut last: HashMap<Reg, usize> = HashMap::new();
        let mut out = Vec::new();
        for (i, op) in ops.iter().enumerate() {
            for s in &op.srcs {
                if let Some(&p) = last.get(s) {
                    out.push((p, i));
                }
            }
            if let Some(w) = op.writes() {
                last.insert(w, i);
            }
        }
        out.sort();
        out.dedup();
        out
    }

    #[test]
    fn table1_structure_matches_listing() {
        let t = gen_kernel("table1", 2, 7).unwrap();
        assert_eq!(t.len(), 24);
        for it in t.ops.chunks(TABLE1_OPS_PER_ITER) {
            let count = |k| it.iter().filter(|o| o.kind == k).count();
            assert_eq!(count(OpKind::Load), 3);
            assert_eq!(count(OpKind::Store), 2);
            assert_eq!(count(OpKind::Branch), 1);
            assert_eq!(count(OpKind::IntAlu), 6);
        }
        // 0-based: I1=0 .. I9=8, F1=9, F2=10, F3=11.
        let expected = vec![
            (0, 1),
            (1, 2),
            (2, 6),
            (3, 5),
            (4, 5),
            (5, 6),
            (6, 7),
            (7, 8),
            (9, 10),
            (10, 11),
        ];
        assert_eq!(edges(&t.ops[..12]), expected);
        // The second iteration adds only the loop-carried counter edge.
        let both = edges(&t.ops);
        let carried: Vec<_> = both.iter().filter(|(p, c)| *p < 12 && *c >= 12).collect();
        assert_eq!(carried, vec![&(9, 21)]);
    }

    #[test]
    fn iteration_prefix_property() {
        for k in Kernel::ALL {
            let one = k.generate(1, 3).unwrap();
            let two = k.generate(2, 3).unwrap();
            if k != Kernel::RandomDag && k != Kernel::PointerChase && k != Kernel::ConstantLatency {
                assert_eq!(&two.ops[..one.len()], &one.ops[..], "{k}");
            }
        }
        let one = gen_kernel("table1", 1, 5).unwrap();
        let two = gen_kernel("table1", 2, 5).unwrap();
        assert_eq!(&two.ops[..12], &one.ops[..]);
    }

    #[test]
    fn generators_are_deterministic_and_valid() {
        for k in Kernel::ALL {
            for seed in [0, 42, 9999] {
                let a = k.generate(20, seed).unwrap();
                let b = k.generate(20, seed).unwrap();
                assert_eq!(a, b, "{k}");
                assert!(validate_trace(&a, ARCH_REGS).is_empty(), "{k}: {:?}", validate_trace(&a, ARCH_REGS));
            }
        }
        assert_eq!(gen_kernel("random-dag", 1, 42).unwrap(), gen_kernel("random-dag", 1, 42).unwrap());
    }

    #[test]
    fn random_dag_always_streams_from_dram() {
        for seed in 0..200 {
            let t = gen_kernel("random-dag", 3, seed).unwrap();
            let loads = t.ops.iter().filter(|o| o.kind == OpKind::Load && o.addr.unwrap() >= LARGE).count();
            assert!(loads > 0, "seed {seed}");
        }
    }

    #[test]
    fn unknown_kernel_and_zero_iterations() {
        assert!(matches!(gen_kernel("matmul", 1, 0), Err(TraceError::UnknownKernel(_))));
        assert!(matches!(gen_kernel("stream", 0, 0), Err(TraceError::NoIterations)));
    }

    #[test]
    fn alternating_kernel_revisits_sixteen_back() {
        let t = gen_kernel("alternating-latency", 40, 0).unwrap();
        let loads: Vec<u64> = t.ops.iter().filter(|o| o.kind == OpKind::Load).map(|o| o.addr.unwrap()).collect();
        let stores: Vec<u64> = t.ops.iter().filter(|o| o.kind == OpKind::Store).map(|o| o.addr.unwrap()).collect();
        let all: Vec<u64> = stores.iter().chain(loads.iter()).copied().collect();
        for (i, &a) in all.iter().enumerate().skip(16) {
            let prev = all[..i].iter().rposition(|&x| x == a);
            if let Some(p) = prev {
                assert_eq!(i - p, 16);
                let window: std::collections::HashSet<_> = all[p + 1..i].iter().collect();
                assert_eq!(window.len(), 15);
            }
        }
    }
}
