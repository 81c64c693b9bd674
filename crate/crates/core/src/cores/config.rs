use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::backend::{SteeringScheme, UnitMix};
use crate::memhier::MemConfig;
use crate::predictor::{DelayPolicy, PolicyKind, StaticDelayTable, DELAYCACHE_ENTRIES};
use crate::rename::PHYS_REGS;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown config key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: bad value `{value}` for `{key}`: {msg}")]
    BadValue {
        line: usize,
        key: String,
        value: String,
        msg: String,
    },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoreKind {
    Proposed,
    InOrder,
    Ooo,
}

impl CoreKind {
    pub const ALL: [CoreKind; 3] = [CoreKind::Proposed, CoreKind::InOrder, CoreKind::Ooo];

    pub fn name(self) -> &'static str {
        match self {
            CoreKind::Proposed => "proposed",
            CoreKind::InOrder => "inorder",
            CoreKind::Ooo => "ooo",
        }
    }
}

impl fmt::Display for CoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CoreKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        CoreKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown core `{s}` (expected proposed, inorder or ooo)"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreConfig {
    pub core: CoreKind,
    pub issue_width: usize,
    /// Defaults to the issue width.
    pub dispatch_width: Option<usize>,
    pub rob_size: usize,
    pub rs_size: usize,
    pub pq_size: usize,
    pub units: UnitMix,
    pub mem: MemConfig,
    pub policy: DelayPolicy,
    pub warmup_program_order: bool,
    /// Defaults to 8 cycles, or 6 for the in-order core.
    pub branch_penalty: Option<u64>,
    pub delaycache_entries: usize,
    pub steering: SteeringScheme,
    pub phys_regs: usize,
    pub int_mul_latency: u64,
    pub fp_latency: u64,
    pub seed: u64,
}

impl Default for CoreConfig {
    fn default() -> Self {
        CoreConfig {
            core: CoreKind::Proposed,
            issue_width: 4,
            dispatch_width: None,
            rob_size: 128,
            rs_size: 64,
            pq_size: 13,
            units: UnitMix::default(),
            mem: MemConfig::default(),
            policy: DelayPolicy::default(),
            warmup_program_order: false,
            branch_penalty: None,
            delaycache_entries: DELAYCACHE_ENTRIES,
            steering: SteeringScheme::default(),
            phys_regs: PHYS_REGS,
            int_mul_latency: 3,
            fp_latency: 3,
            seed: 0,
        }
    }
}

fn parse_bool(v: &str) -> Result<bool, String> {
    match v {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err("expected true or false".into()),
    }
}

fn parse_num<T: FromStr>(v: &str) -> Result<T, String>
where
    T::Err: fmt::Display,
{
    v.parse::<T>().map_err(|e| e.to_string())
}

/// Accepts plain byte counts or a `K`/`M` suffix.
fn parse_size(v: &str) -> Result<u64, String> {
    let (digits, mult) = match v.as_bytes().last() {
        Some(b'K' | b'k') => (&v[..v.len() - 1], 1024),
        Some(b'M' | b'm') => (&v[..v.len() - 1], 1024 * 1024),
        _ => (v, 1),
    };
    Ok(parse_num::<u64>(digits)? * mult)
}

pub const CONFIG_KEYS: &[&str] = &[
    "core",
    "issue-width",
    "dispatch-width",
    "rob-size",
    "rs-size",
    "pq-size",
    "int-units",
    "fp-units",
    "branch-units",
    "ls-units",
    "l1-size",
    "l1-assoc",
    "l1-line",
    "l1-latency",
    "l1-mshrs",
    "l1-perfect",
    "l2-size",
    "l2-assoc",
    "l2-line",
    "l2-latency",
    "l2-mshrs",
    "dram-latency",
    "dram-row-hit-latency",
    "dram-row-size",
    "dram-banks",
    "dram-jitter",
    "prefetcher",
    "prefetch-streams",
    "prefetch-degree",
    "policy",
    "training-interval",
    "saturating-threshold",
    "use-dispatch-time",
    "warmup-program-order",
    "branch-penalty",
    "delaycache-entries",
    "steering",
    "phys-regs",
    "int-mul-latency",
    "fp-latency",
    "seed",
];

impl CoreConfig {
    pub fn dispatch_width(&self) -> usize {
        self.dispatch_width.unwrap_or(self.issue_width)
    }

    pub fn branch_penalty(&self) -> u64 {
        self.branch_penalty.unwrap_or(match self.core {
            CoreKind::InOrder => 6,
            _ => 8,
        })
    }

    pub fn statics(&self) -> StaticDelayTable {
        StaticDelayTable {
            int_mul: self.int_mul_latency,
            fp: self.fp_latency,
            mem: self.mem.l1.hit_latency,
            l2_total: self.mem.l2_total(),
            dram_total: self.mem.dram_total(),
            ..StaticDelayTable::default()
        }
    }

    /// Sets one key. Values are validated individually; cross-field checks
    /// happen in [`CoreConfig::validate`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let v = value;
        match key {
            "core" => self.core = v.parse()?,
            "issue-width" => self.issue_width = parse_num(v)?,
            "dispatch-width" => self.dispatch_width = Some(parse_num(v)?),
            "rob-size" => self.rob_size = parse_num(v)?,
            "rs-size" => self.rs_size = parse_num(v)?,
            "pq-size" => self.pq_size = parse_num(v)?,
            "int-units" => self.units.int = parse_num(v)?,
            "fp-units" => self.units.fp = parse_num(v)?,
            "branch-units" => self.units.branch = parse_num(v)?,
            "ls-units" => self.units.ls = parse_num(v)?,
            "l1-size" => self.mem.l1.capacity = parse_size(v)?,
            "l1-assoc" => self.mem.l1.associativity = parse_num(v)?,
            "l1-line" => self.mem.l1.line = parse_num(v)?,
            "l1-latency" => self.mem.l1.hit_latency = parse_num(v)?,
            "l1-mshrs" => self.mem.l1.outstanding = parse_num(v)?,
            "l1-perfect" => self.mem.perfect_l1 = parse_bool(v)?,
            "l2-size" => self.mem.l2.capacity = parse_size(v)?,
            "l2-assoc" => self.mem.l2.associativity = parse_num(v)?,
            "l2-line" => self.mem.l2.line = parse_num(v)?,
            "l2-latency" => self.mem.l2.hit_latency = parse_num(v)?,
            "l2-mshrs" => self.mem.l2.outstanding = parse_num(v)?,
            "dram-latency" => self.mem.dram.base_latency = parse_num(v)?,
            "dram-row-hit-latency" => self.mem.dram.row_hit_latency = parse_num(v)?,
            "dram-row-size" => self.mem.dram.row_buffer = parse_size(v)?,
            "dram-banks" => self.mem.dram.banks = parse_num(v)?,
            "dram-jitter" => self.mem.dram.jitter = parse_num(v)?,
            "prefetcher" => self.mem.prefetcher = parse_bool(v)?,
            "prefetch-streams" => self.mem.prefetch_streams = parse_num(v)?,
            "prefetch-degree" => self.mem.prefetch_degree = parse_num(v)?,
            "policy" => self.policy.kind = v.parse::<PolicyKind>().map_err(|e| e.to_string())?,
            "training-interval" => self.policy.training_interval = parse_num(v)?,
            "saturating-threshold" => self.policy.saturating_threshold = parse_num(v)?,
            "use-dispatch-time" => self.policy.use_dispatch_time = parse_bool(v)?,
            "warmup-program-order" => self.warmup_program_order = parse_bool(v)?,
            "branch-penalty" => self.branch_penalty = Some(parse_num(v)?),
            "delaycache-entries" => self.delaycache_entries = parse_num(v)?,
            "steering" => self.steering = v.parse()?,
            "phys-regs" => self.phys_regs = parse_num(v)?,
            "int-mul-latency" => self.int_mul_latency = parse_num(v)?,
            "fp-latency" => self.fp_latency = parse_num(v)?,
            "seed" => {
                self.seed = parse_num(v)?;
                self.mem.dram.seed = self.seed;
            }
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<CoreConfig, ConfigError> {
        CoreConfig::parse_over(CoreConfig::default(), text)
    }

    /// Applies `text` on top of `base`.
    pub fn parse_over(mut cfg: CoreConfig, text: &str) -> Result<CoreConfig, ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            if !CONFIG_KEYS.contains(&key) {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            }
            cfg.set(key, value).map_err(|msg| ConfigError::BadValue {
                line,
                key: key.to_string(),
                value: value.to_string(),
                msg,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        for (name, v) in [
            ("issue-width", self.issue_width),
            ("dispatch-width", self.dispatch_width()),
            ("rob-size", self.rob_size),
            ("rs-size", self.rs_size),
            ("pq-size", self.pq_size),
            ("delaycache-entries", self.delaycache_entries),
            ("prefetch-streams", self.mem.prefetch_streams),
            ("prefetch-degree", self.mem.prefetch_degree),
        ] {
            if v == 0 {
                return bad(format!("{name} must be >= 1"));
            }
        }
        if self.policy.training_interval == 0 {
            return bad("training-interval must be >= 1".into());
        }
        if self.units.total() == 0 {
            return bad("at least one functional unit is required".into());
        }
        if self.phys_regs <= crate::trace::ARCH_REGS || self.phys_regs > u16::MAX as usize {
            return bad(format!(
                "phys-regs must exceed the {} architectural registers",
                crate::trace::ARCH_REGS
            ));
        }
        if self.int_mul_latency == 0 || self.fp_latency == 0 {
            return bad("operation latencies must be >= 1".into());
        }
        self.mem.validate().map_err(ConfigError::Invalid)
    }

    /// Every key with its current value, parseable by [`CoreConfig::parse`].
    pub fn to_text(&self) -> String {
        let m = &self.mem;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("core", self.core.to_string());
        kv("issue-width", self.issue_width.to_string());
        kv("dispatch-width", self.dispatch_width().to_string());
        kv("rob-size", self.rob_size.to_string());
        kv("rs-size", self.rs_size.to_string());
        kv("pq-size", self.pq_size.to_string());
        kv("int-units", self.units.int.to_string());
        kv("fp-units", self.units.fp.to_string());
        kv("branch-units", self.units.branch.to_string());
        kv("ls-units", self.units.ls.to_string());
        for (p, c) in [("l1", &m.l1), ("l2", &m.l2)] {
            kv(&format!("{p}-size"), c.capacity.to_string());
            kv(&format!("{p}-assoc"), c.associativity.to_string());
            kv(&format!("{p}-line"), c.line.to_string());
            kv(&format!("{p}-latency"), c.hit_latency.to_string());
            kv(&format!("{p}-mshrs"), c.outstanding.to_string());
        }
        kv("l1-perfect", m.perfect_l1.to_string());
        kv("dram-latency", m.dram.base_latency.to_string());
        kv("dram-row-hit-latency", m.dram.row_hit_latency.to_string());
        kv("dram-row-size", m.dram.row_buffer.to_string());
        kv("dram-banks", m.dram.banks.to_string());
        kv("dram-jitter", m.dram.jitter.to_string());
        kv("prefetcher", m.prefetcher.to_string());
        kv("prefetch-streams", m.prefetch_streams.to_string());
        kv("prefetch-degree", m.prefetch_degree.to_string());
        kv("policy", self.policy.kind.to_string());
        kv("training-interval", self.policy.training_interval.to_string());
        kv("saturating-threshold", self.policy.saturating_threshold.to_string());
        kv("use-dispatch-time", self.policy.use_dispatch_time.to_string());
        kv("warmup-program-order", self.warmup_program_order.to_string());
        kv("branch-penalty", self.branch_penalty().to_string());
        kv("delaycache-entries", self.delaycache_entries.to_string());
        kv("steering", self.steering.to_string());
        kv("phys-regs", self.phys_regs.to_string());
        kv("int-mul-latency", self.int_mul_latency.to_string());
        kv("fp-latency", self.fp_latency.to_string());
        kv("seed", self.seed.to_string());
        s
    }

    /// The idealized machine of the worked example: one op per cycle, one
    /// load/store queue, two integer queues and a branch queue, every access
    /// an L1 hit, and first instances issued in program order.
    pub fn table1(core: CoreKind) -> CoreConfig {
        let mut cfg = CoreConfig {
            core,
            issue_width: 1,
            dispatch_width: Some(1),
            units: UnitMix {
                int: 2,
                fp: 0,
                branch: 1,
                ls: 1,
            },
            warmup_program_order: true,
            ..CoreConfig::default()
        };
        cfg.mem.perfect_l1 = true;
        cfg.mem.prefetcher = false;
        cfg
    }
}
