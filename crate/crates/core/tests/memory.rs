use proptest::prelude::*;

use itpsim::memhier::{AccessKind, AccessResult, Level, MemConfig, MemoryHierarchy};

/// (address, cycle gap, is store) triples replayed in order.
fn accesses() -> impl Strategy<Value = Vec<(u64, u64, bool)>> {
    prop::collection::vec((0u64..1 << 24, 0u64..20, prop::bool::weighted(0.2)), 1..300)
}

fn replay(cfg: &MemConfig, seq: &[(u64, u64, bool)]) -> Vec<AccessResult> {
    let mut m = MemoryHierarchy::new(cfg.clone());
    let mut cycle = 1;
    seq.iter()
        .map(|&(addr, gap, store)| {
            cycle += gap;
            let kind = if store { AccessKind::Store } else { AccessKind::Load };
            m.access(addr * 8, cycle, kind).expect("demand access")
        })
        .collect()
}

fn quiet() -> MemConfig {
    let mut c = MemConfig::default();
    c.dram.jitter = 0;
    c.prefetcher = false;
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn replay_is_deterministic(seq in accesses(), seed in 0u64..1000) {
        let mut cfg = MemConfig::default();
        cfg.dram.seed = seed;
        prop_assert_eq!(replay(&cfg, &seq), replay(&cfg, &seq));
    }

    #[test]
    fn latency_never_below_l1_hit(seq in accesses()) {
        let cfg = MemConfig::default();
        for r in replay(&cfg, &seq) {
            prop_assert!(r.latency >= cfg.l1.hit_latency);
            match r.level {
                Level::L1 => prop_assert_eq!(r.latency, cfg.l1.hit_latency),
                Level::L2 => prop_assert!(r.latency >= cfg.l2_total()),
                Level::Dram => prop_assert!(r.latency >= cfg.l1.hit_latency + cfg.l2.hit_latency + cfg.dram.row_hit_latency),
            }
        }
    }

    /// A loop over a working set that fits L1 sees the same latency for each
    /// load from the second iteration on.
    #[test]
    fn repeated_loop_latencies_repeat(lines in prop::collection::btree_set(0u64..4096, 1..64), iters in 2usize..6) {
        let cfg = quiet();
        let mut m = MemoryHierarchy::new(cfg);
        let lines: Vec<u64> = lines.into_iter().collect();
        let mut cycle = 1;
        let mut rounds: Vec<Vec<u64>> = Vec::new();
        for _ in 0..iters {
            let mut lat = Vec::new();
            for &l in &lines {
                let r = m.access(0x100_0000 + 64 * l, cycle, AccessKind::Load).unwrap();
                cycle = r.completion + 1;
                lat.push(r.latency);
            }
            rounds.push(lat);
        }
        for k in 2..iters {
            prop_assert_eq!(&rounds[k], &rounds[k - 1]);
        }
    }
}

#[test]
fn first_cold_access_sums_configured_latencies() {
    let cfg = quiet();
    let mut m = MemoryHierarchy::new(cfg.clone());
    let r = m.access(0x7000_0000, 5, AccessKind::Load).unwrap();
    assert_eq!(r.level, Level::Dram);
    assert_eq!(r.latency, 4 + 8 + cfg.dram.base_latency);
}

#[test]
fn jitter_stays_within_amplitude() {
    let cfg = MemConfig {
        prefetcher: false,
        ..MemConfig::default()
    };
    let mut m = MemoryHierarchy::new(cfg.clone());
    let floor = cfg.l1.hit_latency + cfg.l2.hit_latency + cfg.dram.base_latency;
    let mut cycle = 1;
    for i in 0..200u64 {
        // One line per row keeps every access a row miss.
        let r = m.access(0x1000_0000 + i * cfg.dram.row_buffer * cfg.dram.banks as u64, cycle, AccessKind::Load).unwrap();
        assert_eq!(r.level, Level::Dram);
        assert!((floor..=floor + cfg.dram.jitter).contains(&r.latency), "latency {}", r.latency);
        cycle = r.completion + 1;
    }
}
