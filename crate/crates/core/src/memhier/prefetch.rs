/// PC-indexed stride detector with a small, fully associative, LRU stream
/// table.
#[derive(Clone, Debug)]
pub struct StridePrefetcher {
    streams: Vec<Stream>,
    capacity: usize,
    degree: usize,
    line: u64,
    stamp: u64,
}

#[derive(Clone, Debug)]
struct Stream {
    pc: u64,
    last_addr: u64,
    stride: i64,
    /// Consecutive observations of `stride`.
    matches: u32,
    last_use: u64,
}

/// Equal consecutive strides needed before prefetches are emitted.
const CONFIRMATIONS: u32 = 2;

impl StridePrefetcher {
    pub fn new(streams: usize, degree: usize, line: u64) -> Self {
        StridePrefetcher {
            streams: Vec::with_capacity(streams),
            capacity: streams.max(1),
            degree: degree.max(1),
            line,
            stamp: 0,
        }
    }

    pub fn tracked_pcs(&self) -> Vec<u64> {
        self.streams.iter().map(|s| s.pc).collect()
    }

    /// Records a committed load and returns the line addresses to prefetch.
    pub fn observe(&mut self, pc: u64, addr: u64) -> Vec<u64> {
        self.stamp += 1;
        let stamp = self.stamp;
        let Some(s) = self.streams.iter_mut().find(|s| s.pc == pc) else {
            let fresh = Stream {
                pc,
                last_addr: addr,
                stride: 0,
                matches: 0,
                last_use: stamp,
            };
            if self.streams.len() < self.capacity {
                self.streams.push(fresh);
            } else {
                let lru = self
                    .streams
                    .iter_mut()
                    .min_by_key(|s| s.last_use)
                    .expect("capacity >= 1");
                *lru = fresh;
            }
            return Vec::new();
        };
        s.last_use = stamp;
        let stride = addr.wrapping_sub(s.last_addr) as i64;
        s.last_addr = addr;
        if stride != 0 && stride == s.stride {
            s.matches += 1;
        } else {
            s.stride = stride;
            s.matches = 1;
        }
        if s.matches < CONFIRMATIONS || stride == 0 {
            return Vec::new();
        }
        let line = self.line;
        let base = addr / line * line;
        let mut out: Vec<u64> = Vec::with_capacity(self.degree);
        for k in 1..=self.degree as i64 {
            let mut target = (addr as i64).wrapping_add(stride * k) as u64 / line * line;
            if target == base {
                target = (base as i64 + stride.signum() * line as i64 * k) as u64;
            }
            if !out.contains(&target) {
                out.push(target);
            }
        }
        out
    }
}
