use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::DramConfig;

/// Open-row DRAM with seeded, bounded latency jitter.
#[derive(Clone, Debug)]
pub(crate) struct Dram {
    cfg: DramConfig,
    open_rows: Vec<Option<u64>>,
    rng: ChaCha8Rng,
}

impl Dram {
    pub fn new(cfg: DramConfig) -> Self {
        Dram {
            open_rows: vec![None; cfg.banks],
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg,
        }
    }

    pub fn access(&mut self, addr: u64) -> u64 {
        let row = addr / self.cfg.row_buffer;
        let bank = (row % self.cfg.banks as u64) as usize;
        let base = if self.open_rows[bank] == Some(row) {
            self.cfg.row_hit_latency
        } else {
            self.open_rows[bank] = Some(row);
            self.cfg.base_latency
        };
        let jitter = if self.cfg.jitter > 0 {
            self.rng.gen_range(0..=self.cfg.jitter)
        } else {
            0
        };
        base + jitter
    }
}
